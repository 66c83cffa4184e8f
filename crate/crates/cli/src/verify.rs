//! `verify`: property suites with measured values and tolerances.

use std::path::{Path, PathBuf};

use anyhow::Context;
use gdnls_core::corpus::Corpus;
use gdnls_core::data::{admissible_datum, gaussian_datum};
use gdnls_core::diagnostics::{calibrate, compare_with_baseline, measure_lemmas, LemmaBaseline, BASELINE_TOLERANCE};
use gdnls_core::evolution::{
    gauge_transform, inverse_gauge_transform, solve, EquationSpec, Form, Scheme, StepperConfig, Trajectory,
};
use gdnls_core::norms::{commutation_residual, EdgeDecay};
use gdnls_core::spectral::{apply_multiplier, free_evolve, Multiplier};
use gdnls_core::{Complex64, ComplexField, Grid};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::exit::{CliResult, Exit};
use crate::manifest::{write_atomic, CONFIG_FILE};
use crate::simulate::prepare_dir;

pub const VERIFY_FILE: &str = "verify.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identities,
    Lemmas,
    Gauge,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    Below,
    AtLeast,
    /// `|measured - target| ≤ tolerance`.
    Near { target: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub passed: bool,
    /// Informational properties do not affect the exit code.
    pub gating: bool,
}

impl Property {
    pub fn new(name: impl Into<String>, measured: f64, relation: Relation, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => measured <= tolerance,
            Relation::Below => measured < tolerance,
            Relation::AtLeast => measured >= tolerance,
            Relation::Near { target } => (measured - target).abs() <= tolerance,
        };
        Self {
            name: name.into(),
            measured,
            relation,
            tolerance,
            passed,
            gating: true,
        }
    }

    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::new(name, measured, Relation::AtMost, tolerance)
    }

    pub fn informational(mut self) -> Self {
        self.gating = false;
        self
    }

    pub fn line(&self) -> String {
        let verdict = match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        };
        let bound = match self.relation {
            Relation::AtMost => format!("<= {:e}", self.tolerance),
            Relation::Below => format!("< {:e}", self.tolerance),
            Relation::AtLeast => format!(">= {:e}", self.tolerance),
            Relation::Near { target } => format!("= {target} ± {}", self.tolerance),
        };
        format!("{verdict} {:<58} measured {:<24e} required {bound}", self.name, self.measured)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<Property>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed || !p.gating)
    }
}

#[derive(Debug, Clone, Default)]
pub struct LemmaOptions {
    /// Baseline to compare against; the bundled file when absent.
    pub baseline: Option<PathBuf>,
    /// Recalibrate on the configured grid and seed and store the result here.
    pub write_baseline: Option<PathBuf>,
}

pub fn verify(cfg: &RunConfig, suite: Suite, lemmas: &LemmaOptions, dir: &Path) -> CliResult<(VerifyReport, Exit)> {
    let mut manifest = prepare_dir(cfg, dir, "verify")?;
    let grid = cfg.grid()?;
    let properties = match suite {
        Suite::Identities => identities(&grid, cfg.seed)?,
        Suite::Lemmas => lemma_suite(&grid, cfg.seed, lemmas)?,
        Suite::Gauge => gauge(&grid)?,
        Suite::Convergence => convergence(&grid)?,
    };
    let report = VerifyReport {
        suite,
        seed: cfg.seed,
        properties,
    };
    for p in &report.properties {
        println!("{}", p.line());
    }
    write_atomic(&dir.join(VERIFY_FILE), serde_json::to_string_pretty(&report)?.as_bytes())?;
    manifest.finish(dir, &[PathBuf::from(CONFIG_FILE), PathBuf::from(VERIFY_FILE)])?;
    let exit = if report.passed() { Exit::Success } else { Exit::VerifyFailed };
    Ok((report, exit))
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a
    } else {
        a / b
    }
}

fn max_over<T>(items: &[T], f: impl Fn(&T) -> anyhow::Result<f64>) -> anyhow::Result<f64> {
    items.iter().try_fold(0.0f64, |acc, x| Ok(acc.max(f(x)?)))
}

/// Identity fields used by the kernel checks.
const IDENTITY_CORPUS: usize = 12;

pub fn identities(grid: &Grid, seed: u64) -> anyhow::Result<Vec<Property>> {
    let fields: Vec<ComplexField> = Corpus::generate(grid, seed, IDENTITY_CORPUS)?
        .members
        .into_iter()
        .map(|m| m.field)
        .collect();
    let unitarity = max_over(&fields, |f| {
        let n0 = f.l2_norm();
        max_over(&[0.1, 1.0, 10.0], |&t| Ok(rel((free_evolve(f, t)?.l2_norm() - n0).abs(), n0)))
    })?;
    let group = max_over(&fields, |f| {
        let two = free_evolve(&free_evolve(f, 0.3)?, -1.7)?;
        Ok(rel(two.l2_distance(&free_evolve(f, -1.4)?)?, f.l2_norm()))
    })?;
    let reversal = max_over(&fields, |f| {
        Ok(rel(free_evolve(&free_evolve(f, 2.5)?, -2.5)?.l2_distance(f)?, f.l2_norm()))
    })?;
    let riesz = max_over(&fields, |f| {
        let ab = apply_multiplier(&apply_multiplier(f, &Multiplier::Riesz(0.7))?, &Multiplier::Riesz(1.3))?;
        let direct = apply_multiplier(f, &Multiplier::Riesz(2.0))?;
        Ok(rel(ab.l2_distance(&direct)?, direct.l2_norm()))
    })?;
    let parseval = max_over(&fields, |f| {
        let spectral = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx() / grid.n() as f64;
        Ok(rel((spectral.sqrt() - f.l2_norm()).abs(), f.l2_norm()))
    })?;
    let residual = |g: &Grid, m: u32| -> anyhow::Result<f64> {
        let f = ComplexField::from_real_fn(g, |x| (-x * x).exp())?;
        Ok(commutation_residual(&f, 0.5, m, EdgeDecay::default())?)
    };
    let mut props = vec![
        Property::at_most("propagator.unitarity", unitarity, 1e-12),
        Property::at_most("propagator.group_law", group, 1e-12),
        Property::at_most("propagator.time_reversal", reversal, 1e-12),
        Property::at_most("multiplier.riesz_composition", riesz, 1e-12),
        Property::at_most("parseval", parseval, 1e-12),
        Property::at_most("commutation.m1", residual(grid, 1)?, 1e-8),
        Property::at_most("commutation.m3", residual(grid, 3)?, 1e-6),
    ];
    for m in [1, 3] {
        let ladder = [256, 512, 1024]
            .iter()
            .map(|&n| residual(&Grid::new(grid.length(), n)?, m))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let worst = ladder.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min);
        props.push(Property::new(
            format!("commutation.m{m}.refinement_gain"),
            worst,
            Relation::AtLeast,
            4.0,
        ));
    }
    Ok(props)
}

pub fn lemma_suite(grid: &Grid, seed: u64, opts: &LemmaOptions) -> anyhow::Result<Vec<Property>> {
    let baseline = if let Some(path) = &opts.write_baseline {
        let b = calibrate(grid, seed, LemmaBaseline::bundled()?.corpus_size)?;
        write_atomic(path, b.to_json().as_bytes())?;
        log::info!("wrote lemma baseline to {}", path.display());
        b
    } else if let Some(path) = &opts.baseline {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        LemmaBaseline::parse(&text)?
    } else {
        LemmaBaseline::bundled()?
    };
    let lemma_grid = Grid::new(baseline.grid_length, baseline.grid_n)?;
    let measured = measure_lemmas(&lemma_grid, seed, baseline.corpus_size)?;
    let same_corpus = seed == baseline.seed;
    let mut props = Vec::new();
    for c in compare_with_baseline(&baseline, &measured) {
        let worst = measured
            .iter()
            .find(|m| m.name == c.name)
            .map(|m| m.max() / c.stored)
            .unwrap_or(f64::NAN);
        props.push(Property::at_most(
            format!("lemma.{}.ratio_over_constant", c.name),
            worst,
            1.0 + BASELINE_TOLERANCE,
        ));
        let drift = Property::at_most(format!("lemma.{}.drift", c.name), c.relative_drift, BASELINE_TOLERANCE);
        props.push(if same_corpus { drift } else { drift.informational() });
    }
    Ok(props)
}

fn run(u0: &ComplexField, eq: &EquationSpec, cfg: StepperConfig) -> anyhow::Result<Trajectory> {
    Ok(solve(u0, eq, &cfg, &mut |_, _| {})?)
}

pub fn gauge(grid: &Grid) -> anyhow::Result<Vec<Property>> {
    let u0 = gaussian_datum(grid, 0.3, 1.0, 0.0, 0.0)?;
    let v0 = gauge_transform(&u0)?;
    let back = inverse_gauge_transform(&v0)?;
    let cfg = StepperConfig {
        dt: 1e-3,
        t_end: 0.5,
        sample_every: usize::MAX,
        ..Default::default()
    };
    let u = run(&u0, &EquationSpec::dnls(), cfg)?;
    let v = run(&v0, &EquationSpec::dnls_gauged(), cfg)?;
    let dist = gauge_transform(&u.last().field)?.l2_distance(&v.last().field)?;
    Ok(vec![
        Property::at_most("gauge.round_trip", rel(back.l2_distance(&u0)?, u0.l2_norm()), 1e-12),
        Property::at_most("gauge.modulus", rel((v0.l2_norm() - u0.l2_norm()).abs(), u0.l2_norm()), 1e-14),
        Property::at_most("gauge.intertwining", dist, 1e-5),
    ])
}

pub fn convergence(grid: &Grid) -> anyhow::Result<Vec<Property>> {
    let eq = EquationSpec::new(Form::Advective, 1.0, Complex64::new(1.0, 0.0))?;
    let u0 = gaussian_datum(grid, 0.3, 1.0, 0.0, 0.0)?;
    let at = |dt| -> anyhow::Result<ComplexField> {
        let cfg = StepperConfig {
            dt,
            t_end: 0.1,
            sample_every: usize::MAX,
            ..Default::default()
        };
        Ok(run(&u0, &eq, cfg)?.last().field.clone())
    };
    let (a, b, c) = (at(0.02)?, at(0.01)?, at(0.005)?);
    let slope = (a.l2_distance(&b)? / b.l2_distance(&c)?).log2();

    let eq = EquationSpec::new(Form::Advective, 1.0, Complex64::new(0.0, 1.0))?;
    let u0 = admissible_datum(1.0, 0.01, grid)?;
    let base = StepperConfig {
        dt: 1e-3,
        t_end: 0.1,
        sample_every: 1,
        ..Default::default()
    };
    let picard = run(
        &u0,
        &eq,
        StepperConfig {
            scheme: Scheme::PicardDuhamel,
            ..base
        },
    )?;
    let ifrk4 = run(&u0, &eq, base)?;
    let sup = picard
        .samples
        .iter()
        .zip(&ifrk4.samples)
        .map(|(p, q)| p.field.l2_distance(&q.field))
        .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))?;
    let aligned = picard.samples.len() == ifrk4.samples.len() && picard.status.is_completed();
    let ratio = picard.stats.windows.iter().map(|w| w.max_ratio()).fold(0.0, f64::max);
    Ok(vec![
        Property::new("ifrk4.richardson_slope", slope, Relation::Near { target: 4.0 }, 0.3),
        Property::at_most("picard_vs_ifrk4.sup_l2", if aligned { sup } else { f64::INFINITY }, 1e-6),
        Property::new("picard.max_contraction_ratio", ratio, Relation::Below, 1.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Property::at_most("a", 1.0, 1.0).passed);
        assert!(!Property::new("a", 1.0, Relation::Below, 1.0).passed);
        assert!(Property::new("a", 2.0, Relation::AtLeast, 1.0).passed);
        assert!(Property::new("a", 4.2, Relation::Near { target: 4.0 }, 0.3).passed);
        assert!(!Property::new("a", 3.6, Relation::Near { target: 4.0 }, 0.3).passed);
        assert!(!Property::at_most("a", f64::NAN, 1.0).passed);
    }

    #[test]
    fn informational_failures_do_not_gate() {
        let report = VerifyReport {
            suite: Suite::Lemmas,
            seed: 1,
            properties: vec![Property::at_most("x", 2.0, 1.0).informational(), Property::at_most("y", 0.0, 1.0)],
        };
        assert!(report.passed());
        assert!(report.properties[0].line().starts_with("INFO"));
    }

    #[test]
    fn identities_pass_on_a_small_grid() {
        let g = Grid::new(80.0 * std::f64::consts::PI, 1024).unwrap();
        let props = identities(&g, 3).unwrap();
        for p in &props {
            assert!(p.passed, "{}", p.line());
        }
    }
}
