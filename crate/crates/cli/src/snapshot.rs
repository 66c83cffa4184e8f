//! Binary field snapshots: one JSON header line, then little-endian `f64`
//! `(re, im)` pairs.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use gdnls_core::{Complex64, ComplexField};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub t: f64,
    /// SHA-256 of the payload, lowercase hex.
    pub checksum: String,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub values: Vec<Complex64>,
}

fn payload(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 * values.len());
    for z in values {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn encode(u: &ComplexField, t: f64) -> Vec<u8> {
    let body = payload(u.values());
    let header = SnapshotHeader {
        n: u.len(),
        length: u.grid().length(),
        t,
        checksum: sha256_hex(&body),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.extend_from_slice(&body);
    out
}

pub fn write(path: &Path, u: &ComplexField, t: f64) -> anyhow::Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_all(&encode(u, t))?;
    f.sync_all()?;
    Ok(())
}

pub fn decode(bytes: &[u8]) -> anyhow::Result<Snapshot> {
    let mut reader = BufReader::new(bytes);
    let mut line = String::new();
    reader.read_line(&mut line).context("snapshot header")?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end()).context("snapshot header")?;
    let mut body = Vec::new();
    reader.read_to_end(&mut body)?;
    if body.len() != 16 * header.n {
        bail!("snapshot payload has {} bytes, header promises {}", body.len(), 16 * header.n);
    }
    let sum = sha256_hex(&body);
    if sum != header.checksum {
        bail!("snapshot checksum mismatch: header {}, payload {}", header.checksum, sum);
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    Ok(Snapshot { header, values })
}

pub fn read(path: &Path) -> anyhow::Result<Snapshot> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    decode(&bytes).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gdnls_core::Grid;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(10.0, 64).unwrap();
        let u = ComplexField::from_fn(&g, |x| Complex64::new(x.sin() / 3.0, x.cos() * 1e-300)).unwrap();
        let snap = decode(&encode(&u, 0.125)).unwrap();
        assert_eq!(snap.header.n, 64);
        assert_eq!(snap.header.length, 10.0);
        assert_eq!(snap.header.t, 0.125);
        assert_eq!(snap.values, u.values());
    }

    #[test]
    fn header_is_one_json_line() {
        let g = Grid::new(10.0, 16).unwrap();
        let bytes = encode(&ComplexField::zeros(&g), 0.0);
        let nl = bytes.iter().position(|&b| b == b'\n').unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes[..nl]).unwrap();
        for key in ["n", "L", "t", "checksum"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(bytes.len() - nl - 1, 16 * 16);
    }

    #[test]
    fn corruption_is_detected() {
        let g = Grid::new(10.0, 16).unwrap();
        let mut bytes = encode(&ComplexField::from_real_fn(&g, |x| x).unwrap(), 0.0);
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        assert!(decode(&bytes).unwrap_err().to_string().contains("checksum"));
        bytes.truncate(last);
        assert!(decode(&bytes).is_err());
    }
}
