//! `simulate`: evolve the configured datum and persist the run.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use gdnls_core::data::{check_admissibility, AdmissibilityReport};
use gdnls_core::diagnostics::{
    ball_monitor, ledger_entry, triple_norm, BallVerdict, MixedNormAccumulator, NormLedgerEntry,
};
use gdnls_core::evolution::{peak_location, solve, RunStatus, Scheme, SchemeStats};
use gdnls_core::norms::EdgeDecay;
use gdnls_core::ComplexField;
use serde::{Deserialize, Serialize};

use crate::config::{InitialData, RunConfig};
use crate::exit::{CliError, CliResult, Exit};
use crate::ledger::{LedgerRow, LedgerWriter};
use crate::manifest::{write_atomic, Manifest, SnapshotEntry, CONFIG_FILE, LEDGER_FILE, RESULT_FILE, SNAPSHOT_DIR};
use crate::snapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonDrift {
    pub expected: f64,
    pub measured: f64,
    /// Periodic distance between the two.
    pub drift: f64,
    pub dx: f64,
    pub within_two_dx: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    pub status: RunStatus,
    pub exit_code: i32,
    pub ledger_rows: usize,
    pub t_reached: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Only for `0 < α ≤ 1`.
    pub admissibility: Option<AdmissibilityReport>,
    pub ball: Option<BallVerdict>,
    /// `sup_t` of the instantaneous norms plus the mixed smoothing norm.
    pub triple_norm: Option<f64>,
    /// Rows whose high-mode share exceeded the resolution limit.
    pub under_resolved_rows: usize,
    pub scheme: SchemeStats,
    /// Longest converged Picard window.
    pub certified_window: Option<f64>,
    pub soliton: Option<SolitonDrift>,
    pub timings: Timings,
}

impl RunResult {
    pub fn exit(&self) -> Exit {
        if self.status.is_completed() {
            Exit::Success
        } else {
            Exit::Dynamics
        }
    }
}

/// Observer state; the first I/O error stops further writes.
struct Recorder<'a> {
    cfg: &'a RunConfig,
    dir: &'a Path,
    alpha: f64,
    writer: LedgerWriter,
    entries: Vec<NormLedgerEntry>,
    mixed: Option<MixedNormAccumulator>,
    baseline: Option<(f64, f64)>,
    snapshots: Vec<SnapshotEntry>,
    error: Option<anyhow::Error>,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, u: &ComplexField) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_record(t, u) {
            self.error = Some(e);
        }
    }

    fn try_record(&mut self, t: f64, u: &ComplexField) -> anyhow::Result<()> {
        let entry = ledger_entry(u, t, self.alpha, self.cfg.diagnostics.energy)?;
        let (lambda, delta0) = *self.baseline.get_or_insert((entry.inf_weighted, entry.total()));
        let row = self.writer.rows();
        self.writer.push(&LedgerRow::from_entry(&entry, lambda, delta0))?;
        if let Some(m) = &mut self.mixed {
            m.push(t, u);
        }
        let every = self.cfg.output.snapshot_every;
        if self.cfg.output.snapshots && (row == 0 || (every > 0 && row % every == 0)) {
            self.snapshot(row, t, u)?;
        }
        self.entries.push(entry);
        Ok(())
    }

    fn snapshot(&mut self, row: usize, t: f64, u: &ComplexField) -> anyhow::Result<()> {
        let file = format!("{SNAPSHOT_DIR}/field_{row:06}.bin");
        snapshot::write(&self.dir.join(&file), u, t)?;
        self.snapshots.push(SnapshotEntry { file, t, row });
        Ok(())
    }
}

fn periodic_distance(a: f64, b: f64, length: f64) -> f64 {
    let d = (a - b).rem_euclid(length);
    d.min(length - d)
}

/// Creates the run directory and writes the config echo and an incomplete
/// manifest.
pub fn prepare_dir(cfg: &RunConfig, dir: &Path, command: &str) -> CliResult<Manifest> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_atomic(&dir.join(CONFIG_FILE), cfg.to_toml().as_bytes())?;
    let manifest = Manifest::begin(command);
    manifest.write(dir)?;
    Ok(manifest)
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> CliResult<RunResult> {
    let start = Instant::now();
    let mut manifest = prepare_dir(cfg, dir, "simulate")?;
    let grid = cfg.grid()?;
    let eq = cfg.equation()?;
    let u0 = cfg.datum(&grid).context("initial datum")?;
    EdgeDecay::new(cfg.diagnostics.edge_tol)
        .check(&u0)
        .map_err(|e| CliError::admissibility(anyhow::Error::new(e).context("initial datum")))?;
    let alpha = cfg.equation.alpha;
    let admissibility = if cfg.diagnostics.admissibility && alpha > 0.0 && alpha <= 1.0 {
        Some(check_admissibility(
            &u0,
            alpha,
            eq.mu,
            cfg.diagnostics.delta_budget,
            EdgeDecay::new(cfg.diagnostics.edge_tol),
        )?)
    } else {
        None
    };
    if cfg.output.snapshots {
        std::fs::create_dir_all(dir.join(SNAPSHOT_DIR))?;
    }
    let mut rec = Recorder {
        cfg,
        dir,
        alpha,
        writer: LedgerWriter::create(&dir.join(LEDGER_FILE))?,
        entries: Vec::new(),
        mixed: cfg
            .diagnostics
            .ball_monitor
            .then(|| MixedNormAccumulator::for_alpha(alpha))
            .transpose()?,
        baseline: None,
        snapshots: Vec::new(),
        error: None,
    };
    let setup_s = start.elapsed().as_secs_f64();
    let solve_start = Instant::now();
    let traj = solve(&u0, &eq, &cfg.stepper_config(), &mut |t, u| rec.record(t, u))?;
    let solve_s = solve_start.elapsed().as_secs_f64();
    if let Some(e) = rec.error.take() {
        return Err(e.context("writing the ledger").into());
    }
    let last = traj.last();
    if cfg.output.snapshots && rec.snapshots.last().map(|s| s.t) != Some(last.t) {
        rec.snapshot(rec.writer.rows().saturating_sub(1), last.t, &last.field)?;
    }

    let (lambda, delta0) = rec.baseline.unwrap_or((0.0, 0.0));
    let ball = cfg.diagnostics.ball_monitor.then(|| ball_monitor(&rec.entries, lambda, delta0));
    let triple = match &rec.mixed {
        Some(m) => Some(triple_norm(&rec.entries, m.value())?),
        None => None,
    };
    let soliton = match &cfg.initial_data {
        InitialData::Soliton { speed, .. } => {
            let measured = peak_location(&last.field);
            let expected = speed * last.t;
            let drift = periodic_distance(measured, expected, grid.length());
            Some(SolitonDrift {
                expected,
                measured,
                drift,
                dx: grid.dx(),
                within_two_dx: drift <= 2.0 * grid.dx(),
            })
        }
        _ => None,
    };
    let certified_window = (cfg.stepper.scheme == Scheme::PicardDuhamel)
        .then(|| traj.stats.windows.iter().map(|w| w.length).fold(0.0, f64::max));
    let mut result = RunResult {
        config: cfg.clone(),
        exit_code: 0,
        ledger_rows: rec.writer.rows(),
        t_reached: last.t,
        initial_mass: u0.mass(),
        final_mass: last.field.mass(),
        admissibility,
        ball,
        triple_norm: triple,
        under_resolved_rows: rec.entries.iter().filter(|e| e.under_resolved()).count(),
        scheme: traj.stats.clone(),
        certified_window,
        soliton,
        status: traj.status.clone(),
        timings: Timings {
            setup_s,
            solve_s,
            total_s: 0.0,
        },
    };
    result.exit_code = result.exit().code();
    if result.under_resolved_rows > 0 {
        log::warn!("{} ledger rows are under-resolved in Fourier space", result.under_resolved_rows);
    }
    match &result.status {
        RunStatus::ContractionFailed { t, reason, .. } => log::warn!("run stopped at t = {t}: {reason}"),
        RunStatus::Escaped { t, linf } => log::warn!("run escaped at t = {t} with sup |u| = {linf:e}"),
        RunStatus::Completed => {}
    }
    result.timings.total_s = start.elapsed().as_secs_f64();
    write_atomic(&dir.join(RESULT_FILE), serde_json::to_string_pretty(&result)?.as_bytes())?;

    let mut files: Vec<PathBuf> = vec![CONFIG_FILE.into(), LEDGER_FILE.into(), RESULT_FILE.into()];
    files.extend(rec.snapshots.iter().map(|s| PathBuf::from(&s.file)));
    manifest.snapshots = rec.snapshots;
    manifest.finish(dir, &files)?;
    Ok(result)
}
