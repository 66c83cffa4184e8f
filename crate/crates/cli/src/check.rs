//! `check-data`: hypotheses of the local theory for the configured datum.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use gdnls_core::data::{check_admissibility, AdmissibilityReport};
use gdnls_core::norms::EdgeDecay;

use crate::config::RunConfig;
use crate::exit::{CliError, CliResult, Exit};
use crate::manifest::{write_atomic, CONFIG_FILE};
use crate::simulate::prepare_dir;

pub const REPORT_FILE: &str = "report.json";

pub fn render_table(r: &AdmissibilityReport) -> String {
    let mut s = String::new();
    let mut row = |k: &str, v: String| writeln!(s, "  {k:<22} {v}").expect("string write");
    row("alpha", format!("{}", r.alpha));
    row("m", r.m.to_string());
    row("k", r.k.to_string());
    row("s", format!("{}", r.s));
    row("|u0|_{s,2}", format!("{:.6e}", r.norm_sobolev));
    row("|<x>^m u0|_inf", format!("{:.6e}", r.norm_winf));
    for (j, v) in r.norms_wder.iter().enumerate() {
        row(&format!("|<x>^m d^{} u0|_2", j + 1), format!("{v:.6e}"));
    }
    row("delta total", format!("{:.6e}", r.delta_total));
    row("delta budget", format!("{:.6e}", r.delta_budget));
    row("lambda", format!("{:.6e}", r.lambda));
    row("mizohata sup", format!("{:.6e}", r.mizohata_sup));
    row("admissible", r.admissible.to_string());
    s
}

/// Builds the report, prints it and writes `report.json`; exit 2 when the
/// datum is not admissible.
pub fn check_data(cfg: &RunConfig, dir: &Path) -> CliResult<(AdmissibilityReport, Exit)> {
    let alpha = cfg.equation.alpha;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CliError::config(anyhow!(
            "equation.alpha = {alpha}: the admissibility conditions are stated for 0 < alpha <= 1"
        )));
    }
    let mut manifest = prepare_dir(cfg, dir, "check-data")?;
    let grid = cfg.grid()?;
    let u0 = cfg.datum(&grid).context("initial datum")?;
    let report = check_admissibility(
        &u0,
        alpha,
        cfg.mu(),
        cfg.diagnostics.delta_budget,
        EdgeDecay::new(cfg.diagnostics.edge_tol),
    )
    .map_err(|e| CliError::admissibility(anyhow::Error::new(e).context("initial datum")))?;
    print!("{}", render_table(&report));
    write_atomic(&dir.join(REPORT_FILE), serde_json::to_string_pretty(&report).context("report")?.as_bytes())?;
    manifest.finish(dir, &[PathBuf::from(CONFIG_FILE), PathBuf::from(REPORT_FILE)])?;
    let exit = match report.rejection() {
        None => Exit::Success,
        Some(reason) => {
            println!("{reason}");
            Exit::Admissibility
        }
    };
    Ok((report, exit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(&format!("[grid]\nn = 1024\n{text}")).unwrap()
    }

    #[test]
    fn indices_for_alpha_one() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[initial_data]\nkind = \"admissible\"\nc0 = 0.01");
        let (r, _) = check_data(&c, dir.path()).unwrap();
        assert_eq!((r.m, r.k, r.s), (3, 6, 6.5));
        let table = render_table(&r);
        assert!(table.contains("6.5"));
        let back: AdmissibilityReport =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn real_coupling_has_zero_mizohata_value() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[equation]\nmu = [1.0, 0.0]\n[initial_data]\nkind = \"admissible\"\nc0 = 0.01");
        assert_eq!(check_data(&c, dir.path()).unwrap().0.mizohata_sup, 0.0);
    }

    #[test]
    fn zero_datum_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("[initial_data]\nkind = \"gaussian\"\namplitude = 0.0\nwidth = 1.0");
        let (r, exit) = check_data(&c, dir.path()).unwrap();
        assert_eq!(exit, Exit::Admissibility);
        assert!(r.rejection().unwrap().starts_with("not admissible: λ = 0"));
    }

    #[test]
    fn alpha_outside_the_theory_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = check_data(&cfg("[equation]\nalpha = 2.0\n[initial_data]\nkind = \"gaussian\"\namplitude = 0.1\nwidth = 1.0"), dir.path()).unwrap_err();
        assert_eq!(err.exit, Exit::Config);
    }
}
