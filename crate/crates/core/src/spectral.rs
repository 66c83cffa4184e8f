//! Fourier multipliers on the periodic grid.
//!
//! Every operator here acts diagonally on DFT coefficients. Odd-order
//! derivatives zero the Nyquist mode so real fields stay real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;

/// Symbol of a Fourier multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "param")]
pub enum Multiplier {
    /// `∂ₓ^j`, symbol `(iξ)^j`.
    Derivative(u32),
    /// `D^s = (-∂ₓ²)^{s/2}`, symbol `|ξ|^s`, `s ≥ 0`.
    Riesz(f64),
    /// `J^s = (1 - ∂ₓ²)^{s/2}`, symbol `(1 + ξ²)^{s/2}`.
    Bessel(f64),
    /// Free propagator `e^{it∂ₓ²}`, symbol `e^{-iξ²t}`.
    Propagator(f64),
}

impl Multiplier {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Multiplier::Derivative(_) => Ok(()),
            Multiplier::Riesz(s) if s.is_finite() && s >= 0.0 => Ok(()),
            Multiplier::Riesz(s) => Err(Error::InvalidParameter(format!(
                "Riesz order must be finite and >= 0, got {s}"
            ))),
            Multiplier::Bessel(s) if s.is_finite() => Ok(()),
            Multiplier::Bessel(s) => Err(Error::InvalidParameter(format!(
                "Bessel order must be finite, got {s}"
            ))),
            Multiplier::Propagator(t) if t.is_finite() => Ok(()),
            Multiplier::Propagator(t) => Err(Error::InvalidParameter(format!(
                "propagator time must be finite, got {t}"
            ))),
        }
    }

    /// Symbol value at frequency `xi`; `nyquist` marks the unpaired mode.
    pub fn symbol(&self, xi: f64, nyquist: bool) -> Complex64 {
        match *self {
            Multiplier::Derivative(0) => Complex64::new(1.0, 0.0),
            Multiplier::Derivative(j) => {
                if nyquist && j % 2 == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, xi).powu(j)
                }
            }
            Multiplier::Riesz(s) => {
                if s == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else if xi == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(xi.abs().powf(s), 0.0)
                }
            }
            Multiplier::Bessel(s) => Complex64::new((1.0 + xi * xi).powf(0.5 * s), 0.0),
            Multiplier::Propagator(t) => schrodinger_phase(xi * xi, -t),
        }
    }
}

/// `e^{i·a·b}` with the product `a·b` carried in double-double precision.
///
/// For the propagator `a·b = -ξ²t` reaches 10⁴–10⁵ rad; rounding the product
/// alone would cost ~1e-12 of phase, which the group-law checks can see.
pub fn schrodinger_phase(a: f64, b: f64) -> Complex64 {
    let hi = a * b;
    let lo = a.mul_add(b, -hi);
    let (s, c) = hi.sin_cos();
    let (sl, cl) = lo.sin_cos();
    Complex64::new(c, s) * Complex64::new(cl, sl)
}

/// Multiplies the spectrum of `f` by `symbol(k)` (storage index `k`).
pub fn apply_symbol(f: &ComplexField, symbol: impl Fn(usize) -> Complex64) -> Result<ComplexField> {
    let spec: Vec<Complex64> = f
        .spectrum()
        .iter()
        .enumerate()
        .map(|(k, &c)| c * symbol(k))
        .collect();
    ComplexField::from_spectrum(f.grid(), spec)
}

pub fn apply_multiplier(f: &ComplexField, m: &Multiplier) -> Result<ComplexField> {
    m.validate()?;
    let grid = f.grid();
    let nyq = grid.nyquist();
    let freqs = grid.freqs();
    if matches!(m, Multiplier::Derivative(0) | Multiplier::Riesz(0.0) | Multiplier::Bessel(0.0)) {
        return Ok(f.clone());
    }
    apply_symbol(f, |k| m.symbol(freqs[k], k == nyq))
}

/// `e^{it∂ₓ²} f`.
pub fn free_evolve(f: &ComplexField, t: f64) -> Result<ComplexField> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &Multiplier::Propagator(t))
}

/// `∂ₓ^j f`.
pub fn derivative(f: &ComplexField, order: u32) -> ComplexField {
    apply_multiplier(f, &Multiplier::Derivative(order)).expect("derivative of a finite field is finite")
}

/// Propagator symbols `e^{-iξ²t}` for every storage index.
pub fn propagator_symbols(grid: &Grid, t: f64) -> Vec<Complex64> {
    grid.freqs().iter().map(|&xi| schrodinger_phase(xi * xi, -t)).collect()
}

/// Zeroes the modes outside the 2/3-rule band, in spectral storage order.
pub fn dealias_spectrum(grid: &Grid, spec: &mut [Complex64]) {
    for (k, c) in spec.iter_mut().enumerate() {
        if grid.is_dealiased_out(k) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Spectral antiderivative of real samples `q`, pinned to zero at the left
/// edge node: `F(x_j) ≈ ∫_{x_0}^{x_j} q dx`.
///
/// The periodic part is integrated exactly in Fourier space, the mean is
/// integrated as a linear ramp.
pub fn antiderivative_from_left(grid: &Grid, q: &[f64]) -> Vec<f64> {
    debug_assert_eq!(q.len(), grid.n());
    let n = grid.n();
    let mut buf: Vec<Complex64> = q.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.forward(&mut buf);
    let mean = buf[0].re / n as f64;
    let nyq = grid.nyquist();
    for (k, (c, &xi)) in buf.iter_mut().zip(grid.freqs()).enumerate() {
        if k == 0 || k == nyq {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= Complex64::new(0.0, xi);
        }
    }
    grid.inverse(&mut buf);
    let x0 = grid.nodes()[0];
    let start = buf[0].re;
    buf.iter()
        .zip(grid.nodes())
        .map(|(c, &x)| c.re - start + mean * (x - x0))
        .collect()
}
