//! `export`: plot-ready tab-separated series from a run directory.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail};
use gdnls_core::{ComplexField, Grid};
use serde::{Deserialize, Serialize};

use crate::ledger;
use crate::manifest::{Manifest, LEDGER_FILE};
use crate::snapshot;

pub const EXPORT_DIR: &str = "export";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum What {
    /// `t` against every ledger column.
    Ledger,
    /// `x`, `|u|`, `Re u`, `Im u` of one snapshot.
    Field,
    /// `ξ` against `|û|/n` of one snapshot, ascending `ξ`.
    Spectrum,
}

fn tsv_writer(path: &Path) -> anyhow::Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new().delimiter(b'\t').from_path(path)?)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Writes the series under `<run>/export/` (or `out`) and returns its path.
/// `snapshot` indexes the manifest's snapshot list; negative counts from the end.
pub fn export(run: &Path, what: What, snapshot: i64, out: Option<&Path>) -> anyhow::Result<PathBuf> {
    let manifest = Manifest::read(run)?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| run.join(EXPORT_DIR));
    std::fs::create_dir_all(&dir)?;
    let path = match what {
        What::Ledger => {
            let src = run.join(LEDGER_FILE);
            if !src.is_file() {
                bail!("{} has no {LEDGER_FILE}", run.display());
            }
            let rows = ledger::read(&src)?;
            let path = dir.join("ledger.tsv");
            let mut w = tsv_writer(&path)?;
            w.write_record(ledger::COLUMNS)?;
            for r in &rows {
                let mut rec = vec![num(r.t)];
                rec.extend(r.numeric_columns().iter().map(|&(_, v)| num(v)));
                w.write_record(&rec)?;
            }
            w.flush()?;
            path
        }
        What::Field | What::Spectrum => {
            let n = manifest.snapshots.len() as i64;
            let idx = if snapshot < 0 { n + snapshot } else { snapshot };
            if !(0..n).contains(&idx) {
                bail!("snapshot {snapshot} out of range: the run has {n}");
            }
            let entry = &manifest.snapshots[idx as usize];
            let snap = snapshot::read(&run.join(&entry.file))?;
            let grid = Grid::new(snap.header.length, snap.header.n)?;
            let u = ComplexField::new(&grid, snap.values)?;
            if what == What::Field {
                let path = dir.join(format!("field_{idx:04}.tsv"));
                let mut w = tsv_writer(&path)?;
                w.write_record(["x", "abs", "re", "im"])?;
                for (&x, z) in grid.nodes().iter().zip(u.values()) {
                    w.write_record([num(x), num(z.norm()), num(z.re), num(z.im)])?;
                }
                w.flush()?;
                path
            } else {
                let path = dir.join(format!("spectrum_{idx:04}.tsv"));
                let mut w = tsv_writer(&path)?;
                w.write_record(["xi", "abs_hat"])?;
                let mut bins: Vec<(f64, f64)> = grid
                    .freqs()
                    .iter()
                    .zip(u.spectrum())
                    .map(|(&xi, c)| (xi, c.norm() / grid.n() as f64))
                    .collect();
                bins.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (xi, a) in bins {
                    w.write_record([num(xi), num(a)])?;
                }
                w.flush()?;
                path
            }
        }
    };
    Ok(path)
}

/// Parses a TSV written by [`export`] into its header and numeric rows.
pub fn read_tsv(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_path(path)?;
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| anyhow!("{}: bad number `{s}`: {e}", path.display())))
            .collect::<anyhow::Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.iter().any(|r: &Vec<f64>| r.is_empty()) {
        bail!("{}: empty row", path.display());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::simulate::simulate;

    fn run(text: &str) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse(&format!("[grid]\nn = 256\nlength = 60.0\n{text}")).unwrap();
        simulate(&cfg, dir.path()).unwrap();
        dir
    }

    #[test]
    fn ledger_export_has_one_row_per_ledger_row() {
        let d = run("[stepper]\nt_end = 0.05");
        let p = export(d.path(), What::Ledger, 0, None).unwrap();
        let (header, rows) = read_tsv(&p).unwrap();
        assert_eq!(header.len(), 12);
        assert_eq!(rows.len(), ledger::read(&d.path().join(LEDGER_FILE)).unwrap().len());
    }

    #[test]
    fn field_export_reproduces_the_datum() {
        let d = run("[stepper]\nt_end = 0.0\n[initial_data]\nkind = \"gaussian\"\namplitude = 0.7\nwidth = 2.0\nwavenumber = 1.5");
        let cfg = RunConfig::parse(
            "[grid]\nn = 256\nlength = 60.0\n[initial_data]\nkind = \"gaussian\"\namplitude = 0.7\nwidth = 2.0\nwavenumber = 1.5",
        )
        .unwrap();
        let u0 = cfg.datum(&cfg.grid().unwrap()).unwrap();
        let (_, rows) = read_tsv(&export(d.path(), What::Field, 0, None).unwrap()).unwrap();
        assert_eq!(rows.len(), 256);
        for (r, z) in rows.iter().zip(u0.values()) {
            assert!((r[2] - z.re).abs() <= 1e-12 && (r[3] - z.im).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_mode_spectrum_has_one_dominant_bin() {
        // κ = 2π·5/L is a grid frequency; a plane wave needs the relaxed edge check.
        let kappa = 2.0 * std::f64::consts::PI * 5.0 / 60.0;
        let d = run(&format!(
            "[stepper]\nt_end = 0.0\n[diagnostics]\nedge_tol = 1.0\n[initial_data]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = 1e9\nwavenumber = {kappa}"
        ));
        let (_, rows) = read_tsv(&export(d.path(), What::Spectrum, -1, None).unwrap()).unwrap();
        let mut mags: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
        mags.sort_by(|a, b| b.1.total_cmp(&a.1));
        assert!((mags[0].0 - kappa).abs() < 1e-9);
        assert!(mags[1].1 < 1e-10 * mags[0].1);
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(export(dir.path(), What::Ledger, 0, None).is_err());
        let d = run("[stepper]\nt_end = 0.0");
        assert!(export(d.path(), What::Field, 5, None).is_err());
    }
}
