//! Initial data and exact solutions, and the checks deciding whether a datum
//! meets the small-data hypotheses of the weighted local theory.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::norms::{bracket, sobolev_norm, weighted_derivative_norm, weighted_infimum, weighted_sup, EdgeDecay};

/// Which closed-form profile a soliton uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `4ω - c² > 0`: sech-type profile.
    Generic,
    /// `ω = c²/4`, `c > 0`: algebraically decaying profile.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub alpha: f64,
    pub omega: f64,
    pub speed: f64,
    pub branch: Branch,
}

impl SolitonParams {
    /// Picks the branch from `(ω, c)`.
    pub fn new(alpha: f64, omega: f64, speed: f64) -> Result<Self> {
        let branch = if 4.0 * omega - speed * speed > 0.0 {
            Branch::Generic
        } else {
            Branch::Degenerate
        };
        let p = Self {
            alpha,
            omega,
            speed,
            branch,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn degenerate(alpha: f64, speed: f64) -> Result<Self> {
        let p = Self {
            alpha,
            omega: 0.25 * speed * speed,
            speed,
            branch: Branch::Degenerate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("soliton exponent must be > 0, got {}", self.alpha)));
        }
        if !(self.omega.is_finite() && self.speed.is_finite()) {
            return Err(Error::InvalidParameter("soliton ω and c must be finite".into()));
        }
        let disc = 4.0 * self.omega - self.speed * self.speed;
        match self.branch {
            Branch::Generic if disc > 0.0 => Ok(()),
            Branch::Generic => Err(Error::InvalidParameter(format!(
                "generic soliton branch needs 4ω - c² > 0, got {disc}"
            ))),
            Branch::Degenerate if self.speed > 0.0 && disc.abs() <= 1e-12 * self.omega.abs().max(1.0) => Ok(()),
            Branch::Degenerate => Err(Error::InvalidParameter(format!(
                "degenerate soliton branch needs ω = c²/4 and c > 0, got ω = {}, c = {}",
                self.omega, self.speed
            ))),
        }
    }

    /// `φ^α(y)`, evaluated without overflow for large `|y|`.
    pub fn profile_pow_alpha(&self, y: f64) -> f64 {
        let (a, w, c) = (self.alpha, self.omega, self.speed);
        match self.branch {
            Branch::Generic => {
                let disc = 4.0 * w - c * c;
                let kappa = 0.5 * a * disc.sqrt();
                let num = (2.0 + a) * disc;
                // 4√ω cosh(κy) - 2c, multiplied through by 2e^{-κ|y|}
                let e = (-kappa * y.abs()).exp();
                let den = 4.0 * w.sqrt() * (1.0 + e * e) - 4.0 * c * e;
                2.0 * num * e / den
            }
            Branch::Degenerate => (a + 2.0) * c / (0.25 * a * a * (c * y).powi(2) + 1.0),
        }
    }

    /// `φ(y)`.
    pub fn profile(&self, y: f64) -> f64 {
        self.profile_pow_alpha(y).powf(1.0 / self.alpha)
    }

    /// `∫_{-∞}^{y} φ^α`, closed form.
    pub fn phase_integral(&self, y: f64) -> f64 {
        let (a, w, c) = (self.alpha, self.omega, self.speed);
        match self.branch {
            Branch::Generic => {
                let disc = 4.0 * w - c * c;
                let kappa = 0.5 * a * disc.sqrt();
                let big = 4.0 * w.sqrt();
                let small = 2.0 * c;
                let root = (big * big - small * small).sqrt();
                let r = ((big + small) / (big - small)).sqrt();
                let amp = (2.0 + a) * disc;
                amp * 2.0 / (kappa * root) * ((r * (0.5 * kappa * y).tanh()).atan() + r.atan())
            }
            Branch::Degenerate => 2.0 * (a + 2.0) / a * ((0.5 * a * c * y).atan() + 0.5 * PI),
        }
    }
}

/// Samples `φ_{ω,c}` on the grid nodes (real-valued field).
pub fn soliton_profile(p: &SolitonParams, grid: &Grid) -> Result<ComplexField> {
    p.validate()?;
    ComplexField::from_real_fn(grid, |x| p.profile(x))
}

/// `ψ_{ω,c}(x, t) = φ(x - ct) exp i{ωt + (c/2)(x - ct) - (α+2)^{-1} ∫_{-∞}^{x-ct} φ^α}`.
///
/// The phase integral uses its closed-form antiderivative, so nothing is
/// truncated at the box edge.
pub fn soliton_solution(p: &SolitonParams, grid: &Grid, t: f64) -> Result<ComplexField> {
    p.validate()?;
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite, got {t}")));
    }
    let (w, c) = (p.omega, p.speed);
    let inv = 1.0 / (p.alpha + 2.0);
    ComplexField::from_fn(grid, |x| {
        let y = x - c * t;
        let phase = w * t + 0.5 * c * y - inv * p.phase_integral(y);
        Complex64::from_polar(p.profile(y), phase)
    })
}

/// Weight exponent, regularity index and Sobolev order of the local theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremIndices {
    /// `m = ⌊2/α + 1⌋`.
    pub m: u32,
    /// `k = m + 3`.
    pub k: u32,
    /// `s = k + 1/2`.
    pub s: f64,
}

impl TheoremIndices {
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("α must be positive, got {alpha}")));
        }
        // The guard keeps 2/α that is an integer up to rounding on the right side of the floor.
        let m = (2.0 / alpha + 1.0 + 1e-9).floor() as u32;
        let k = m + 3;
        Ok(Self {
            m,
            k,
            s: k as f64 + 0.5,
        })
    }
}

/// Images kept explicitly in [`periodized_bracket_power`]; the rest is summed
/// by an integral tail.
const IMAGES: i64 = 256;

/// `Σ_{j∈ℤ} ⟨y + jP⟩^{-p}` for `p > 1`.
///
/// This is the function on the circle of circumference `P` whose restriction
/// to one period matches `⟨y⟩^{-p}` up to the image contributions; unlike the
/// raw restriction it is smooth across the wrap.
pub fn periodized_bracket_power(y: f64, period: f64, p: f64) -> f64 {
    let edge = period * (IMAGES as f64 + 0.5);
    // midpoint-rule integral plus its first Euler–Maclaurin correction
    let tail = |z: f64| z.powf(1.0 - p) / (period * (p - 1.0)) - p * period / 24.0 * z.powf(-p - 1.0);
    // smallest terms first
    let mut s = tail(edge + y) + tail(edge - y);
    for j in (1..=IMAGES).rev() {
        let shift = j as f64 * period;
        s += bracket(y + shift).powf(-p) + bracket(y - shift).powf(-p);
    }
    s + bracket(y).powf(-p)
}

/// Theorem-class datum `c0 / ⟨x⟩^m` with `m = ⌊2/α + 1⌋`, periodized over
/// the box so derivatives and Sobolev norms converge under refinement.
///
/// On the box, `inf ⟨x⟩^m |u0| = c0 (1 + O(L^{-m}))`.
pub fn admissible_datum(alpha: f64, c0: f64, grid: &Grid) -> Result<ComplexField> {
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Error::InvalidParameter(format!("c0 must be positive, got {c0}")));
    }
    let m = TheoremIndices::for_alpha(alpha)?.m as f64;
    let period = grid.length();
    ComplexField::from_real_fn(grid, |x| c0 * periodized_bracket_power(x, period, m))
}

/// `c0/⟨x⟩^m` sampled directly on the nodes, with no periodization.
pub fn truncated_admissible_datum(alpha: f64, c0: f64, grid: &Grid) -> Result<ComplexField> {
    let m = TheoremIndices::for_alpha(alpha)?.m as i32;
    ComplexField::from_real_fn(grid, |x| c0 / bracket(x).powi(m))
}

/// `a · exp(-((x - x0)/w)²) · e^{iκx}`.
pub fn gaussian_datum(grid: &Grid, amplitude: f64, width: f64, center: f64, wavenumber: f64) -> Result<ComplexField> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidParameter(format!("Gaussian width must be positive, got {width}")));
    }
    ComplexField::from_fn(grid, |x| {
        let y = (x - center) / width;
        Complex64::from_polar(amplitude * (-y * y).exp(), wavenumber * x)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub alpha: f64,
    pub m: u32,
    pub k: u32,
    pub s: f64,
    /// `‖u0‖_{s,2}`.
    pub norm_sobolev: f64,
    /// `‖⟨x⟩^m u0‖_∞`.
    pub norm_winf: f64,
    /// `‖⟨x⟩^m ∂ₓ^j u0‖₂`, `j = 1, 2, 3`.
    pub norms_wder: [f64; 3],
    pub delta_total: f64,
    pub delta_budget: f64,
    /// `inf ⟨x⟩^m |u0|`.
    pub lambda: f64,
    pub mizohata_sup: f64,
    pub admissible: bool,
}

impl AdmissibilityReport {
    /// Human-readable reason when not admissible.
    pub fn rejection(&self) -> Option<String> {
        if self.admissible {
            None
        } else if self.lambda <= 0.0 {
            Some(format!("not admissible: λ = {} (must be > 0)", self.lambda))
        } else {
            Some(format!(
                "not admissible: δ total {:.6e} is not below the budget {:.6e}",
                self.delta_total, self.delta_budget
            ))
        }
    }
}

/// Evaluates the smallness sum and lower bound of the weighted local theory.
///
/// `μ` only enters the Mizohata value carried in the report.
pub fn check_admissibility(
    u0: &ComplexField,
    alpha: f64,
    mu: Complex64,
    delta_budget: f64,
    edge: EdgeDecay,
) -> Result<AdmissibilityReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("α must lie in (0, 1], got {alpha}")));
    }
    if !(delta_budget.is_finite() && delta_budget > 0.0) {
        return Err(Error::InvalidParameter(format!("δ budget must be positive, got {delta_budget}")));
    }
    edge.check(u0)?;
    let idx = TheoremIndices::for_alpha(alpha)?;
    let m = idx.m as f64;
    let norm_sobolev = sobolev_norm(u0, idx.s)?;
    let norm_winf = weighted_sup(u0, m);
    let norms_wder = [1, 2, 3].map(|j| weighted_derivative_norm(u0, m, j));
    let delta_total = norm_sobolev + norm_winf + norms_wder.iter().sum::<f64>();
    let lambda = weighted_infimum(u0, idx.m);
    let mizohata_sup = mizohata_functional(u0, alpha, mu)?;
    Ok(AdmissibilityReport {
        alpha,
        m: idx.m,
        k: idx.k,
        s: idx.s,
        norm_sobolev,
        norm_winf,
        norms_wder,
        delta_total,
        delta_budget,
        lambda,
        mizohata_sup,
        admissible: delta_total < delta_budget && lambda > 0.0,
    })
}

/// One-dimensional Mizohata functional for `b(x) = μ|u0(x)|^α`:
/// `sup_{x, l} |∫_0^l Im b(x + r) dr|`, i.e. the oscillation (max − min) of
/// the cumulative trapezoid integral of `Im(μ)|u0|^α` over the box.
pub fn mizohata_functional(u0: &ComplexField, alpha: f64, mu: Complex64) -> Result<f64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("α must be positive, got {alpha}")));
    }
    if mu.im == 0.0 {
        return Ok(0.0);
    }
    let dx = u0.grid().dx();
    let b: Vec<f64> = u0.values().iter().map(|z| mu.im * z.norm().powf(alpha)).collect();
    let (mut lo, mut hi, mut acc) = (0.0f64, 0.0f64, 0.0f64);
    for w in b.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::weighted_infimum;

    fn grid() -> Grid {
        Grid::new(80.0 * PI, 4096).unwrap()
    }

    #[test]
    fn profile_peaks_match_closed_form() {
        let p = SolitonParams::new(1.0, 1.0, 0.0).unwrap();
        assert!((p.profile(0.0) - 3.0).abs() < 1e-15);
        let d = SolitonParams::degenerate(1.0, 1.0).unwrap();
        assert_eq!(d.branch, Branch::Degenerate);
        assert!((d.profile(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn branch_violations() {
        assert!(SolitonParams::new(1.0, 0.1, 1.0).is_err());
        assert!(SolitonParams::degenerate(1.0, -1.0).is_err());
        let bad = SolitonParams {
            alpha: 1.0,
            omega: 1.0,
            speed: 1.0,
            branch: Branch::Degenerate,
        };
        assert!(bad.validate().is_err());
        assert!(SolitonParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn far_tail_underflows_to_zero_instead_of_nan() {
        let p = SolitonParams::new(0.5, 1.0, 0.0).unwrap();
        for y in [800.0, -1e6, 1e300] {
            let v = p.profile(y);
            assert!(v.is_finite() && v >= 0.0);
        }
        assert_eq!(p.profile(1e6), 0.0);
    }

    #[test]
    fn profile_monotone_after_peak() {
        for p in [
            SolitonParams::new(1.0, 1.0, 0.5).unwrap(),
            SolitonParams::new(0.5, 2.0, -1.0).unwrap(),
            SolitonParams::degenerate(1.0, 1.0).unwrap(),
        ] {
            let g = grid();
            let prof = soliton_profile(&p, &g).unwrap();
            let vals: Vec<f64> = prof.values().iter().map(|z| z.re).collect();
            let peak = vals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            assert!(vals[peak..].windows(2).all(|w| w[1] <= w[0]));
            assert!(vals.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn generic_profile_even_at_zero_speed() {
        let p = SolitonParams::new(1.0, 1.3, 0.0).unwrap();
        for i in 0..200 {
            let x = 0.137 * i as f64;
            assert!((p.profile(x) - p.profile(-x)).abs() <= 1e-14);
        }
    }

    #[test]
    fn degenerate_branch_is_limit_of_generic() {
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
            let p = SolitonParams::new(1.0, 0.25 + eps, 1.0).unwrap();
            let gap = (p.profile(0.0) - 3.0).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn soliton_modulus_is_profile() {
        let g = grid();
        let p = SolitonParams::new(1.0, 1.0, 0.0).unwrap();
        let psi = soliton_solution(&p, &g, 0.0).unwrap();
        let phi = soliton_profile(&p, &g).unwrap();
        for (a, b) in psi.values().iter().zip(phi.values()) {
            assert!((a.norm() - b.re).abs() <= 1e-15 * b.re.max(1e-300));
        }
    }

    #[test]
    fn soliton_mass_constant_in_time() {
        let g = grid();
        let p = SolitonParams::new(1.0, 1.0, 0.5).unwrap();
        let m0 = soliton_solution(&p, &g, 0.0).unwrap().mass();
        for t in [0.3, 2.0, 5.0] {
            let m = soliton_solution(&p, &g, t).unwrap().mass();
            assert!((m - m0).abs() <= 1e-10 * m0);
        }
    }

    #[test]
    fn theorem_indices_floor_formula() {
        for (alpha, m) in [(1.0, 3), (0.75, 3), (2.0 / 3.0, 4), (0.5, 5), (1.0 / 3.0, 7), (0.4, 6)] {
            let idx = TheoremIndices::for_alpha(alpha).unwrap();
            assert_eq!(idx.m, m, "α = {alpha}");
            assert_eq!(idx.k, m + 3);
            assert_eq!(idx.s, (m + 3) as f64 + 0.5);
        }
        assert!(TheoremIndices::for_alpha(0.0).is_err());
    }

    #[test]
    fn admissible_datum_lower_bound() {
        let g = grid();
        for (alpha, m) in [(1.0, 3), (0.5, 5)] {
            let u = admissible_datum(alpha, 0.01, &g).unwrap();
            let lam = weighted_infimum(&u, m);
            assert!((lam - 0.01).abs() <= 1e-6 * 0.01, "{lam}");
            let raw = truncated_admissible_datum(alpha, 0.01, &g).unwrap();
            assert!((weighted_infimum(&raw, m) - 0.01).abs() <= 1e-15);
        }
    }

    #[test]
    fn periodized_power_matches_direct_sum() {
        let period = 7.0;
        for y in [-3.5, 0.0, 1.25] {
            let direct = (1..=1_000_000i64).rev().fold(0.0, |acc, j| {
                let shift = j as f64 * period;
                acc + bracket(y + shift).powf(-3.0) + bracket(y - shift).powf(-3.0)
            }) + bracket(y).powf(-3.0);
            let fast = periodized_bracket_power(y, period, 3.0);
            assert!((fast - direct).abs() < 1e-13, "{fast} vs {direct}");
        }
    }

    #[test]
    fn zero_datum_not_admissible() {
        let g = grid();
        let r = check_admissibility(&ComplexField::zeros(&g), 1.0, Complex64::new(1.0, 0.0), 0.05, EdgeDecay::default())
            .unwrap();
        assert_eq!(r.delta_total, 0.0);
        assert_eq!(r.lambda, 0.0);
        assert!(!r.admissible);
        assert!(r.rejection().unwrap().contains("λ = 0"));
    }

    #[test]
    fn non_decaying_datum_is_an_error() {
        let g = Grid::new(20.0, 256).unwrap();
        let u = ComplexField::from_real_fn(&g, |x| 1.0 / bracket(x)).unwrap();
        let r = check_admissibility(&u, 1.0, Complex64::new(1.0, 0.0), 0.05, EdgeDecay::new(1e-6));
        assert!(matches!(r, Err(Error::EdgeDecay { .. })));
        assert!(check_admissibility(&u, 1.5, Complex64::new(1.0, 0.0), 0.05, EdgeDecay::new(1.0)).is_err());
    }

    #[test]
    fn mizohata_real_mu_and_phase_invariance() {
        let g = grid();
        let u = truncated_admissible_datum(1.0, 1.0, &g).unwrap();
        assert_eq!(mizohata_functional(&u, 1.0, Complex64::new(1.0, 0.0)).unwrap(), 0.0);
        let i = Complex64::new(0.0, 1.0);
        let a = mizohata_functional(&u, 1.0, i).unwrap();
        let rotated = u.scale(Complex64::from_polar(1.0, 0.77));
        let b = mizohata_functional(&rotated, 1.0, i).unwrap();
        assert!((a - b).abs() < 1e-13);
    }
}
