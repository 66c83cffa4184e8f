//! Weighted and Sobolev norms on the grid, plus the commutation identity
//! `x^m e^{it∂ₓ²} f = e^{it∂ₓ²} (x - 2it∂ₓ)^m f`.
//!
//! All L² quantities use the rectangle rule with weight `dx`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::spectral::{apply_multiplier, derivative, free_evolve, Multiplier};

/// `⟨x⟩ = (1 + x²)^{1/2}`.
pub fn bracket(x: f64) -> f64 {
    1.0f64.hypot(x)
}

/// Which Lebesgue exponent a weighted norm uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Inf,
}

impl NormKind {
    /// Maps a numeric exponent to a supported norm; only 2 and ∞ exist.
    pub fn from_exponent(p: f64) -> Result<Self> {
        if p == 2.0 {
            Ok(NormKind::L2)
        } else if p == f64::INFINITY {
            Ok(NormKind::Inf)
        } else {
            Err(Error::InvalidParameter(format!("unsupported Lebesgue exponent p = {p}")))
        }
    }
}

/// Default relative amplitude the outer nodes may carry.
pub const DEFAULT_EDGE_TOL: f64 = 1e-10;

/// Number of nodes on each side inspected by the edge check.
const EDGE_BAND: usize = 8;

/// Tail-smallness requirement for fields on the periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDecay {
    pub tol: f64,
}

impl Default for EdgeDecay {
    fn default() -> Self {
        Self { tol: DEFAULT_EDGE_TOL }
    }
}

impl EdgeDecay {
    pub fn new(tol: f64) -> Self {
        Self { tol }
    }

    pub fn check(&self, f: &ComplexField) -> Result<()> {
        let ratio = edge_ratio(f);
        if ratio <= self.tol {
            Ok(())
        } else {
            Err(Error::EdgeDecay { ratio, tol: self.tol })
        }
    }
}

/// `max |f|` over the outermost nodes divided by `max |f|` (0 for the zero field).
pub fn edge_ratio(f: &ComplexField) -> f64 {
    let peak = f.linf_norm();
    if peak == 0.0 {
        return 0.0;
    }
    let v = f.values();
    let band = EDGE_BAND.min(v.len() / 2);
    let edge = v[..band]
        .iter()
        .chain(&v[v.len() - band..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    edge / peak
}

/// `‖⟨x⟩^w f‖₂` for a real weight exponent.
pub fn weighted_l2(f: &ComplexField, w: f64) -> f64 {
    let grid = f.grid();
    let s: f64 = grid
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&x, z)| bracket(x).powf(2.0 * w) * z.norm_sqr())
        .sum();
    (grid.dx() * s).sqrt()
}

/// `‖⟨x⟩^w f‖_∞` for a real weight exponent.
pub fn weighted_sup(f: &ComplexField, w: f64) -> f64 {
    f.grid()
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&x, z)| bracket(x).powf(w) * z.norm())
        .fold(0.0, f64::max)
}

/// `‖⟨x⟩^m f‖_p` for `p ∈ {2, ∞}`.
pub fn weighted_lp_norm(f: &ComplexField, m: u32, p: NormKind) -> f64 {
    match p {
        NormKind::L2 => weighted_l2(f, m as f64),
        NormKind::Inf => weighted_sup(f, m as f64),
    }
}

/// `min_j ⟨x_j⟩^m |f(x_j)|`.
pub fn weighted_infimum(f: &ComplexField, m: u32) -> f64 {
    f.grid()
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&x, z)| bracket(x).powi(m as i32) * z.norm())
        .fold(f64::INFINITY, f64::min)
}

/// `‖J^s f‖₂`.
pub fn sobolev_norm(f: &ComplexField, s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter(format!("Sobolev order must be finite, got {s}")));
    }
    if s == 0.0 {
        return Ok(f.l2_norm());
    }
    // Parseval: avoids an inverse transform.
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(grid.freqs())
        .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
        .sum();
    Ok((grid.dx() * sum / grid.n() as f64).sqrt())
}

/// `‖D^s f‖₂` via Parseval.
pub fn riesz_norm(f: &ComplexField, s: f64) -> Result<f64> {
    Multiplier::Riesz(s).validate()?;
    let grid = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(grid.freqs())
        .map(|(c, &xi)| Multiplier::Riesz(s).symbol(xi, false).re.powi(2) * c.norm_sqr())
        .sum();
    Ok((grid.dx() * sum / grid.n() as f64).sqrt())
}

/// `‖⟨x⟩^m ∂ₓ^j f‖₂`.
pub fn weighted_derivative_norm(f: &ComplexField, m: f64, j: u32) -> f64 {
    weighted_l2(&derivative(f, j), m)
}

/// `Γ_t f = (x + 2it∂ₓ) f`; `Γ_t` commutes with `∂ₜ - i∂ₓ²`, so
/// `Γ_t e^{it∂ₓ²} f = e^{it∂ₓ²} x f`.
pub fn gamma_operator(f: &ComplexField, t: f64) -> Result<ComplexField> {
    let df = derivative(f, 1);
    let two_it = Complex64::new(0.0, 2.0 * t);
    ComplexField::new(
        f.grid(),
        f.grid()
            .nodes()
            .iter()
            .zip(f.values().iter().zip(df.values()))
            .map(|(&x, (&u, &du))| x * u + two_it * du)
            .collect(),
    )
}

/// `‖x^m e^{it∂ₓ²} f - e^{it∂ₓ²} Γ_{-t}^m f‖₂`.
///
/// Moving `x` through the propagator flips the sign of the derivative term:
/// `x e^{it∂ₓ²} = e^{it∂ₓ²}(x - 2it∂ₓ)`. Written with `Γ_t` itself the
/// residual stays O(1) under refinement (see the unit tests).
///
/// Requires `f` to vanish at the box edges to `edge.tol`, otherwise the
/// multiplication by `x^m` on the periodic box is meaningless.
pub fn commutation_residual(f: &ComplexField, t: f64, m: u32, edge: EdgeDecay) -> Result<f64> {
    edge.check(f)?;
    let evolved = free_evolve(f, t)?;
    let lhs = evolved.map_with_nodes(|x, z| z * x.powi(m as i32))?;
    let mut g = f.clone();
    for _ in 0..m {
        g = gamma_operator(&g, -t)?;
    }
    let rhs = free_evolve(&g, t)?;
    lhs.l2_distance(&rhs)
}

/// Applies a multiplier then measures `‖·‖₂`; small helper for the lemma checks.
pub fn multiplier_l2(f: &ComplexField, m: &Multiplier) -> Result<f64> {
    Ok(apply_multiplier(f, m)?.l2_norm())
}
