//! `sweep`: cross product of parameter axes, one run directory per cell.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use gdnls_core::data::TheoremIndices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{InitialData, RunConfig};
use crate::exit::{CliError, CliResult};
use crate::manifest::{write_atomic, Manifest};
use crate::simulate::{prepare_dir, simulate};

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Amplitude of the admissible datum.
    C0,
    Alpha,
    /// Initial Picard window.
    TW,
    /// Argument of `μ` in radians.
    MuPhase,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::C0 => "c0",
            AxisName::Alpha => "alpha",
            AxisName::TW => "t_w",
            AxisName::MuPhase => "mu_phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl FromStr for Axis {
    type Err = anyhow::Error;

    /// `name=v1,v2,...`.
    fn from_str(s: &str) -> anyhow::Result<Self> {
        let (name, list) = s.split_once('=').ok_or_else(|| anyhow!("axis `{s}` is not of the form name=v1,v2"))?;
        let name = match name.trim() {
            "c0" => AxisName::C0,
            "alpha" => AxisName::Alpha,
            "t_w" => AxisName::TW,
            "mu_phase" => AxisName::MuPhase,
            other => bail!("unknown axis `{other}` (expected c0, alpha, t_w or mu_phase)"),
        };
        let values = list
            .split(',')
            .map(|v| {
                let x: f64 = v.trim().parse().with_context(|| format!("axis {}: bad value `{v}`", name.as_str()))?;
                if !x.is_finite() {
                    bail!("axis {}: value {x} is not finite", name.as_str());
                }
                Ok(x)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("axis {} has no values", name.as_str());
        }
        Ok(Self { name, values })
    }
}

/// Axis assignments of one cell, in axis order.
pub type Cell = Vec<(AxisName, f64)>;

pub fn cross_product(axes: &[Axis]) -> anyhow::Result<Vec<Cell>> {
    for (i, a) in axes.iter().enumerate() {
        if axes[..i].iter().any(|b| b.name == a.name) {
            bail!("axis {} given twice", a.name.as_str());
        }
    }
    let mut cells: Vec<Cell> = vec![Vec::new()];
    for axis in axes {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                axis.values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.push((axis.name, v));
                    c
                })
            })
            .collect();
    }
    Ok(cells)
}

/// The template with the cell's values applied; a `c0` axis switches the
/// datum to the admissible family.
pub fn apply(template: &RunConfig, cell: &Cell) -> anyhow::Result<RunConfig> {
    let mut cfg = template.clone();
    for &(name, v) in cell {
        match name {
            AxisName::C0 => cfg.initial_data = InitialData::Admissible { c0: v },
            AxisName::Alpha => cfg.equation.alpha = v,
            AxisName::TW => cfg.stepper.picard.window = v,
            AxisName::MuPhase => cfg.equation.mu = [v.cos(), v.sin()],
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub cell: usize,
    pub directory: String,
    pub c0: Option<f64>,
    pub alpha: f64,
    pub t_w: f64,
    pub mu_phase: f64,
    pub m: Option<u32>,
    pub exit_code: i32,
    pub status: String,
    pub contraction_ok: Option<bool>,
    pub certified_window: Option<f64>,
    pub ball_exit: Option<f64>,
    pub lower_bound_exit: Option<f64>,
    pub error: Option<String>,
}

fn run_cell(template: &RunConfig, index: usize, cell: &Cell, root: &Path) -> SummaryRow {
    let name = format!("cell_{index:04}");
    let dir = root.join(&name);
    let cfg = apply(template, cell);
    let shown = cfg.as_ref().unwrap_or(template);
    let mut row = SummaryRow {
        cell: index,
        directory: name,
        c0: match shown.initial_data {
            InitialData::Admissible { c0 } => Some(c0),
            _ => None,
        },
        alpha: shown.equation.alpha,
        t_w: shown.stepper.picard.window,
        mu_phase: shown.mu().arg(),
        m: TheoremIndices::for_alpha(shown.equation.alpha).ok().map(|i| i.m),
        exit_code: 0,
        status: String::new(),
        contraction_ok: None,
        certified_window: None,
        ball_exit: None,
        lower_bound_exit: None,
        error: None,
    };
    let outcome = cfg.map_err(CliError::config).and_then(|cfg| {
        let mut cfg = cfg;
        cfg.output.directory = dir.clone();
        simulate(&cfg, &dir)
    });
    match outcome {
        Ok(r) => {
            row.exit_code = r.exit_code;
            row.status = serde_json::to_value(&r.status)
                .ok()
                .and_then(|v| v.get("status").and_then(|s| s.as_str()).map(str::to_owned))
                .unwrap_or_default();
            row.contraction_ok = r.certified_window.map(|_| r.scheme.failed_windows.is_empty());
            row.certified_window = r.certified_window;
            if let Some(b) = &r.ball {
                row.ball_exit = b.ball_exit;
                row.lower_bound_exit = b.lower_bound_exit;
            }
        }
        Err(e) => {
            row.exit_code = e.exit.code();
            row.status = "error".into();
            row.error = Some(e.to_string());
        }
    }
    row
}

/// Runs every cell on a pool of `workers` threads and writes the summary.
/// Failing cells are recorded, not fatal.
pub fn sweep(template: &RunConfig, axes: &[Axis], workers: usize, root: &Path) -> CliResult<Vec<SummaryRow>> {
    let cells = cross_product(axes)?;
    let mut manifest: Manifest = prepare_dir(template, root, "sweep")?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("cannot start the worker pool")?;
    let rows: Vec<SummaryRow> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, c)| run_cell(template, i, c, root))
            .collect()
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("summary: {e}"))?;
    write_atomic(&root.join(SUMMARY_FILE), &bytes)?;
    manifest.finish(root, &[PathBuf::from(crate::manifest::CONFIG_FILE), PathBuf::from(SUMMARY_FILE)])?;
    Ok(rows)
}

pub fn read_summary(root: &Path) -> anyhow::Result<Vec<SummaryRow>> {
    let mut rdr = csv::Reader::from_path(root.join(SUMMARY_FILE))?;
    Ok(rdr.deserialize().collect::<Result<Vec<SummaryRow>, _>>()?)
}
