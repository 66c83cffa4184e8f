//! TOML run configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gdnls_core::data::{admissible_datum, gaussian_datum, soliton_solution, SolitonParams};
use gdnls_core::evolution::{EquationSpec, Form, PicardConfig, Scheme, StepperConfig, SOLITON_MU};
use gdnls_core::{Complex64, ComplexField, Grid};
use serde::{Deserialize, Serialize};

use crate::snapshot;

/// `|μ|` may differ from 1 by this much before a warning is logged.
pub const MU_WARN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for randomized corpora.
    pub seed: u64,
    pub grid: GridConfig,
    pub equation: EquationConfig,
    pub initial_data: InitialData,
    pub stepper: StepperSection,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            grid: GridConfig::default(),
            equation: EquationConfig::default(),
            initial_data: InitialData::default(),
            stepper: StepperSection::default(),
            diagnostics: DiagnosticsConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            length: 80.0 * PI,
            n: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationConfig {
    pub form: Form,
    pub alpha: f64,
    /// `(re, im)`.
    pub mu: [f64; 2],
}

impl Default for EquationConfig {
    fn default() -> Self {
        Self {
            form: Form::Advective,
            alpha: 1.0,
            mu: [SOLITON_MU.re, SOLITON_MU.im],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// Solitary wave at `t = 0`, exponent taken from the equation.
    Soliton { omega: f64, speed: f64 },
    /// `c0 / ⟨x⟩^m`, periodized.
    Admissible { c0: f64 },
    Gaussian {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        wavenumber: f64,
    },
    /// A field snapshot written by `simulate`.
    File { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Soliton { omega: 1.0, speed: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperSection {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub escape_factor: f64,
    pub max_step_halvings: u32,
    pub picard: PicardConfig,
}

impl Default for StepperSection {
    fn default() -> Self {
        let s = StepperConfig::default();
        Self {
            scheme: s.scheme,
            dt: s.dt,
            t_end: s.t_end,
            dealias: s.dealias,
            escape_factor: s.escape_factor,
            max_step_halvings: s.max_step_halvings,
            picard: s.picard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Steps (or Picard quadrature nodes) between ledger rows.
    pub cadence: usize,
    pub delta_budget: f64,
    /// Largest allowed `max |u0|` over the outer nodes relative to `max |u0|`.
    pub edge_tol: f64,
    /// Record `E(u)` in the ledger.
    pub energy: bool,
    pub admissibility: bool,
    pub ball_monitor: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            cadence: 10,
            delta_budget: 0.05,
            edge_tol: 1e-5,
            energy: false,
            admissibility: true,
            ball_monitor: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Run directory; relative paths resolve against `GDNLS_OUTPUT_ROOT` when set.
    pub directory: PathBuf,
    /// Write binary field snapshots.
    pub snapshots: bool,
    /// Ledger rows between snapshots; 0 keeps only the first and last.
    pub snapshot_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("gdnls-out"),
            snapshots: true,
            snapshot_every: 0,
        }
    }
}

impl RunConfig {
    /// Parses and validates; `μ` is normalized to unit modulus.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).context("invalid run configuration")?;
        cfg.normalize_mu()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("in {}", path.display()))?;
        if let InitialData::File { path: p } = &mut cfg.initial_data {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run configuration serializes")
    }

    fn normalize_mu(&mut self) -> anyhow::Result<()> {
        let [re, im] = self.equation.mu;
        let mu = Complex64::new(re, im);
        let r = mu.norm();
        if !(r.is_finite() && r > 0.0) {
            bail!("equation.mu must be a nonzero finite complex number, got ({re}, {im})");
        }
        if (r - 1.0).abs() > MU_WARN_TOL {
            log::warn!("equation.mu = ({re}, {im}) has modulus {r}; normalizing to 1");
        }
        let unit = mu / r;
        self.equation.mu = [unit.re, unit.im];
        Ok(())
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.grid().context("grid")?;
        self.equation().context("equation")?;
        self.stepper_config().validate().context("stepper")?;
        let d = &self.diagnostics;
        if d.cadence == 0 {
            bail!("diagnostics.cadence must be >= 1");
        }
        if !(d.delta_budget.is_finite() && d.delta_budget > 0.0) {
            bail!("diagnostics.delta_budget must be positive, got {}", d.delta_budget);
        }
        if !(d.edge_tol.is_finite() && d.edge_tol > 0.0) {
            bail!("diagnostics.edge_tol must be positive, got {}", d.edge_tol);
        }
        match &self.initial_data {
            InitialData::Soliton { omega, speed } => {
                SolitonParams::new(self.equation.alpha, *omega, *speed).context("initial_data")?;
            }
            InitialData::Admissible { c0 } if !(c0.is_finite() && *c0 > 0.0) => {
                bail!("initial_data.c0 must be positive, got {c0}");
            }
            InitialData::Gaussian { amplitude, width, center, wavenumber } => {
                if !(width.is_finite() && *width > 0.0) {
                    bail!("initial_data.width must be positive, got {width}");
                }
                if ![amplitude, center, wavenumber].iter().all(|v| v.is_finite()) {
                    bail!("initial_data parameters must be finite");
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.grid.length, self.grid.n)?)
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::new(self.equation.mu[0], self.equation.mu[1])
    }

    pub fn equation(&self) -> anyhow::Result<EquationSpec> {
        Ok(EquationSpec::new(self.equation.form, self.equation.alpha, self.mu())?)
    }

    pub fn stepper_config(&self) -> StepperConfig {
        let s = &self.stepper;
        StepperConfig {
            dt: s.dt,
            t_end: s.t_end,
            scheme: s.scheme,
            picard: s.picard,
            dealias: s.dealias,
            sample_every: self.diagnostics.cadence,
            escape_factor: s.escape_factor,
            max_step_halvings: s.max_step_halvings,
        }
    }

    /// Builds the configured initial datum.
    pub fn datum(&self, grid: &Grid) -> anyhow::Result<ComplexField> {
        Ok(match &self.initial_data {
            InitialData::Soliton { omega, speed } => {
                let p = SolitonParams::new(self.equation.alpha, *omega, *speed)?;
                soliton_solution(&p, grid, 0.0)?
            }
            InitialData::Admissible { c0 } => admissible_datum(self.equation.alpha, *c0, grid)?,
            InitialData::Gaussian { amplitude, width, center, wavenumber } => {
                gaussian_datum(grid, *amplitude, *width, *center, *wavenumber)?
            }
            InitialData::File { path } => {
                let snap = snapshot::read(path)?;
                if snap.header.n != grid.n() || snap.header.length != grid.length() {
                    bail!(
                        "snapshot {} has n = {}, L = {} but the grid has n = {}, L = {}",
                        path.display(),
                        snap.header.n,
                        snap.header.length,
                        grid.n(),
                        grid.length()
                    );
                }
                ComplexField::new(grid, snap.values)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.equation.form, Form::Advective);
        assert_eq!(cfg.mu(), SOLITON_MU);
    }

    #[test]
    fn round_trip() {
        let text = r#"
            seed = 7
            [grid]
            length = 100.0
            n = 1024
            [equation]
            form = "B"
            alpha = 2.0
            mu = [0.0, 1.0]
            [initial_data]
            kind = "gaussian"
            amplitude = 0.3
            width = 1.5
            [stepper]
            scheme = "picard"
            t_end = 0.2
            [stepper.picard]
            window = 0.01
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.stepper.picard.window, 0.01);
        assert_eq!(cfg.stepper.picard.substeps, PicardConfig::default().substeps);
        let again = RunConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        let defaults = RunConfig::default();
        assert_eq!(RunConfig::parse(&defaults.to_toml()).unwrap(), defaults);
    }

    #[test]
    fn mu_is_normalized() {
        let cfg = RunConfig::parse("[equation]\nmu = [0.0, 2.0]").unwrap();
        assert_eq!(cfg.mu(), Complex64::new(0.0, 1.0));
        assert!(RunConfig::parse("[equation]\nmu = [0.0, 0.0]").is_err());
    }

    #[test]
    fn errors_name_the_offending_field() {
        let err = RunConfig::parse("[grid]\nn = 1000").unwrap_err();
        assert!(format!("{err:#}").contains("power of two"), "{err:#}");
        let err = RunConfig::parse("[grid]\nlenght = 3.0").unwrap_err();
        assert!(format!("{err:#}").contains("lenght"), "{err:#}");
        let err = RunConfig::parse("[stepper]\ndt = -1.0").unwrap_err();
        assert!(format!("{err:#}").contains("dt"), "{err:#}");
        let err = RunConfig::parse("[initial_data]\nkind = \"soliton\"\nomega = 0.01\nspeed = 1.0").unwrap_err();
        assert!(format!("{err:#}").contains("branch"), "{err:#}");
    }
}
