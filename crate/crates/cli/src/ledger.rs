//! Norm ledger CSV.

use std::fs::File;
use std::path::Path;

use anyhow::Context;
use gdnls_core::diagnostics::NormLedgerEntry;
use serde::{Deserialize, Serialize};

/// Column order of the ledger file.
pub const COLUMNS: [&str; 12] = [
    "t",
    "mass",
    "energy",
    "linf",
    "sobolev_s",
    "winf",
    "wder_1",
    "wder_2",
    "wder_3",
    "inf_weighted",
    "inside_ball",
    "lower_bound_ok",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    pub mass: f64,
    pub energy: Option<f64>,
    pub linf: f64,
    pub sobolev_s: f64,
    pub winf: f64,
    pub wder_1: f64,
    pub wder_2: f64,
    pub wder_3: f64,
    pub inf_weighted: f64,
    pub inside_ball: bool,
    pub lower_bound_ok: bool,
}

impl LedgerRow {
    /// Ball flags against `total ≤ 2δ0` and `inf ≥ λ/4`.
    pub fn from_entry(e: &NormLedgerEntry, lambda: f64, delta0: f64) -> Self {
        Self {
            t: e.t,
            mass: e.mass,
            energy: e.energy,
            linf: e.linf,
            sobolev_s: e.sobolev_s,
            winf: e.winf,
            wder_1: e.wder[0],
            wder_2: e.wder[1],
            wder_3: e.wder[2],
            inf_weighted: e.inf_weighted,
            inside_ball: e.total() <= 2.0 * delta0,
            lower_bound_ok: lambda > 0.0 && e.inf_weighted >= 0.25 * lambda,
        }
    }

    /// `(name, value)` for every column after `t`; `energy` is NaN when
    /// absent and the flags are 0/1.
    pub fn numeric_columns(&self) -> [(&'static str, f64); 11] {
        [
            ("mass", self.mass),
            ("energy", self.energy.unwrap_or(f64::NAN)),
            ("linf", self.linf),
            ("sobolev_s", self.sobolev_s),
            ("winf", self.winf),
            ("wder_1", self.wder_1),
            ("wder_2", self.wder_2),
            ("wder_3", self.wder_3),
            ("inf_weighted", self.inf_weighted),
            ("inside_ball", f64::from(u8::from(self.inside_ball))),
            ("lower_bound_ok", f64::from(u8::from(self.lower_bound_ok))),
        ]
    }
}

/// Appends rows, flushing after each so an interrupted run leaves a
/// parseable file.
pub struct LedgerWriter {
    inner: csv::Writer<File>,
    rows: usize,
}

impl LedgerWriter {
    pub fn create(path: &Path) -> anyhow::Result<Self> {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(COLUMNS)?;
        inner.flush()?;
        Ok(Self { inner, rows: 0 })
    }

    pub fn push(&mut self, row: &LedgerRow) -> anyhow::Result<()> {
        self.inner.serialize(row)?;
        self.inner.flush()?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

pub fn read(path: &Path) -> anyhow::Result<Vec<LedgerRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot read {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(COLUMNS) {
        anyhow::bail!("{}: unexpected ledger header {:?}", path.display(), headers);
    }
    rdr.deserialize()
        .collect::<Result<Vec<LedgerRow>, _>>()
        .with_context(|| format!("malformed ledger {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, energy: Option<f64>) -> LedgerRow {
        LedgerRow {
            t,
            mass: 0.1 + t,
            energy,
            linf: 1e-300,
            sobolev_s: 2.0 / 3.0,
            winf: 1.0,
            wder_1: 1e20,
            wder_2: 0.3,
            wder_3: 7.0,
            inf_weighted: 0.01,
            inside_ball: true,
            lower_bound_ok: false,
        }
    }

    #[test]
    fn rows_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        let rows = vec![row(0.0, None), row(0.1, Some(-1.5e-7))];
        let mut w = LedgerWriter::create(&path).unwrap();
        for r in &rows {
            w.push(r).unwrap();
        }
        assert_eq!(w.rows(), 2);
        drop(w);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), COLUMNS.join(","));
        assert!(text.lines().nth(1).unwrap().starts_with("0.0,0.1,,"));
        assert_eq!(read(&path).unwrap(), rows);
    }

    #[test]
    fn rows_are_flushed_as_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        let mut w = LedgerWriter::create(&path).unwrap();
        w.push(&row(0.0, None)).unwrap();
        assert_eq!(read(&path).unwrap().len(), 1);
        w.push(&row(0.5, None)).unwrap();
        assert_eq!(read(&path).unwrap().len(), 2);
    }
}
