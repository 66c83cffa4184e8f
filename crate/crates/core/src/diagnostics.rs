//! Quantities tracked along a trajectory and the inequality checks of the
//! linear estimates behind the local theory.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusKind};
use crate::data::TheoremIndices;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::norms::{bracket, sobolev_norm, weighted_derivative_norm, weighted_infimum, weighted_l2, weighted_sup};
use crate::spectral::{apply_multiplier, derivative, free_evolve, Multiplier};

/// Fraction of derivative energy in the top eighth of the modes above which a
/// ledger entry is flagged as under-resolved.
pub const SPECTRAL_TAIL_LIMIT: f64 = 0.01;

/// One row of the norm ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormLedgerEntry {
    pub t: f64,
    /// `‖u‖_{s,2}`.
    pub sobolev_s: f64,
    /// `‖⟨x⟩^m u‖_∞`.
    pub winf: f64,
    /// `‖⟨x⟩^m ∂ₓ^j u‖₂`, `j = 1, 2, 3`.
    pub wder: [f64; 3],
    /// `inf ⟨x⟩^m |u|`.
    pub inf_weighted: f64,
    /// `‖u‖₂²`.
    pub mass: f64,
    pub energy: Option<f64>,
    pub linf: f64,
    /// Share of `‖∂ₓ^{k+1}u‖₂²` carried by the top eighth of the modes.
    pub spectral_tail: f64,
}

impl NormLedgerEntry {
    /// Instantaneous part of the triple norm.
    pub fn total(&self) -> f64 {
        self.sobolev_s + self.winf + self.wder.iter().sum::<f64>()
    }

    pub fn under_resolved(&self) -> bool {
        self.spectral_tail > SPECTRAL_TAIL_LIMIT
    }
}

/// Fills every ledger column for `u` at time `t`, with `m`, `k`, `s` taken
/// from `α`. `energy` is only evaluated when `with_energy` is set.
pub fn ledger_entry(u: &ComplexField, t: f64, alpha: f64, with_energy: bool) -> Result<NormLedgerEntry> {
    let idx = TheoremIndices::for_alpha(alpha)?;
    let m = idx.m as f64;
    Ok(NormLedgerEntry {
        t,
        sobolev_s: sobolev_norm(u, idx.s)?,
        winf: weighted_sup(u, m),
        wder: [1, 2, 3].map(|j| weighted_derivative_norm(u, m, j)),
        inf_weighted: weighted_infimum(u, idx.m),
        mass: u.mass(),
        energy: with_energy.then(|| energy(u)),
        linf: u.linf_norm(),
        spectral_tail: spectral_tail(u, idx.k + 1),
    })
}

fn spectral_tail(u: &ComplexField, order: u32) -> f64 {
    let grid = u.grid();
    let cutoff = 3 * grid.n() as i64 / 8;
    let (mut total, mut tail) = (0.0, 0.0);
    for (k, (c, &xi)) in u.spectrum().iter().zip(grid.freqs()).enumerate() {
        let e = xi.abs().powi(2 * order as i32) * c.norm_sqr();
        total += e;
        if grid.alias(k).abs() > cutoff {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// Running `max_x (∫ |∂ₓ^j u(x, t)|² dt)^{1/2}` over snapshots, trapezoid in time.
#[derive(Debug, Clone)]
pub struct MixedNormAccumulator {
    order: u32,
    last: Option<(f64, Vec<f64>)>,
    acc: Vec<f64>,
}

impl MixedNormAccumulator {
    pub fn new(order: u32) -> Self {
        Self {
            order,
            last: None,
            acc: Vec::new(),
        }
    }

    /// Accumulator for `‖∂ₓ^{k+1}u‖_{L^∞_x L²_T}` with `k` derived from `α`.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        Ok(Self::new(TheoremIndices::for_alpha(alpha)?.k + 1))
    }

    pub fn push(&mut self, t: f64, u: &ComplexField) {
        let sq: Vec<f64> = derivative(u, self.order).values().iter().map(|z| z.norm_sqr()).collect();
        match &self.last {
            None => self.acc = vec![0.0; sq.len()],
            Some((t0, prev)) => {
                let h = 0.5 * (t - t0);
                for ((a, p), q) in self.acc.iter_mut().zip(prev).zip(&sq) {
                    *a += h * (p + q);
                }
            }
        }
        self.last = Some((t, sq));
    }

    pub fn value(&self) -> f64 {
        self.acc.iter().copied().fold(0.0, f64::max).sqrt()
    }
}

/// `sup_t (instantaneous total) + mixed`.
pub fn triple_norm(entries: &[NormLedgerEntry], mixed: f64) -> Result<f64> {
    entries
        .iter()
        .map(NormLedgerEntry::total)
        .reduce(f64::max)
        .map(|sup| sup + mixed)
        .ok_or(Error::EmptyLedger)
}

/// `½∫|∂ₓv|² + ¼ Im∫|v|² v̄ ∂ₓv`.
pub fn energy(v: &ComplexField) -> f64 {
    let dv = derivative(v, 1);
    let dx = v.grid().dx();
    let (kinetic, quartic) = v
        .values()
        .iter()
        .zip(dv.values())
        .fold((0.0, 0.0), |(k, q), (&z, &dz)| (k + dz.norm_sqr(), q + z.norm_sqr() * (z.conj() * dz).im));
    dx * (0.5 * kinetic + 0.25 * quartic)
}

/// Both sides of the homogeneous smoothing estimate for the free flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    /// `sup_t ‖D^{1/2} e^{it∂ₓ²}u0‖₂`.
    pub lhs_half: f64,
    /// `max_x (∫₀ᵀ |∂ₓ e^{it∂ₓ²}u0|² dt)^{1/2}`.
    pub lhs_smooth: f64,
    /// `‖D^{1/2}u0‖₂`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Evolves `u0` freely over `nt` uniform samples of `[0, T]` and measures
/// the smoothing gain.
pub fn smoothing_report(u0: &ComplexField, t_end: f64, nt: usize) -> Result<SmoothingReport> {
    if u0.is_zero() {
        return Err(Error::ZeroDatum);
    }
    if !(t_end.is_finite() && t_end > 0.0) || nt < 2 {
        return Err(Error::InvalidParameter(format!(
            "smoothing needs T > 0 and at least 2 samples, got T = {t_end}, nt = {nt}"
        )));
    }
    let half = Multiplier::Riesz(0.5);
    let du0 = derivative(u0, 1);
    let mut mixed = MixedNormAccumulator::new(0);
    let mut lhs_half = 0.0f64;
    for j in 0..nt {
        let t = t_end * j as f64 / (nt - 1) as f64;
        let u = free_evolve(u0, t)?;
        lhs_half = lhs_half.max(apply_multiplier(&u, &half)?.l2_norm());
        mixed.push(t, &free_evolve(&du0, t)?);
    }
    let rhs = apply_multiplier(u0, &half)?.l2_norm();
    let lhs_smooth = mixed.value();
    Ok(SmoothingReport {
        lhs_half,
        lhs_smooth,
        rhs,
        ratio: lhs_smooth / rhs,
    })
}

/// The two interpolation inequalities between weights and smoothness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterpolationVariant {
    /// `‖J^{γa}(⟨x⟩^{(1-γ)b} f)‖₂ ≤ c ‖⟨x⟩^b f‖₂^{1-γ} ‖J^a f‖₂^γ`.
    WeightInside,
    /// `‖⟨x⟩^{γa} J^{(1-γ)b} f‖₂ ≤ c ‖J^b f‖₂^{1-γ} ‖⟨x⟩^a f‖₂^γ`.
    SmoothnessInside,
}

/// Returns `(lhs, rhs)` of the chosen interpolation inequality, with the
/// constant left out of `rhs`.
pub fn interpolation_check(
    f: &ComplexField,
    a: f64,
    b: f64,
    gamma: f64,
    variant: InterpolationVariant,
) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("interpolation needs a, b > 0, got a = {a}, b = {b}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("γ must lie in (0, 1), got {gamma}")));
    }
    let weight = |g: &ComplexField, w: f64| g.map_with_nodes(|x, z| z * bracket(x).powf(w));
    match variant {
        InterpolationVariant::WeightInside => {
            let lhs = sobolev_norm(&weight(f, (1.0 - gamma) * b)?, gamma * a)?;
            let rhs = weighted_l2(f, b).powf(1.0 - gamma) * sobolev_norm(f, a)?.powf(gamma);
            Ok((lhs, rhs))
        }
        InterpolationVariant::SmoothnessInside => {
            let inner = apply_multiplier(f, &Multiplier::Bessel((1.0 - gamma) * b))?;
            let lhs = weighted_l2(&inner, gamma * a);
            let rhs = sobolev_norm(f, b)?.powf(1.0 - gamma) * weighted_l2(f, a).powf(gamma);
            Ok((lhs, rhs))
        }
    }
}

/// Returns `(‖⟨x⟩^k ∂ₓ^j f‖₂², rhs)` for one of the three weighted
/// integration-by-parts inequalities, with the constant left out of `rhs`.
///
/// Variants shift the weights of the product term: `(k, k)`, `(k-1, k+1)`
/// and `(k+1, k-1)` on `∂ₓ^{j+1}f` and `∂ₓ^{j-1}f` respectively. All share
/// the lower-order term `‖⟨x⟩^{k-1} ∂ₓ^{j-1} f‖₂²`.
pub fn weighted_ibp_check(f: &ComplexField, k: u32, j: u32, variant: u8) -> Result<(f64, f64)> {
    if k < 1 || j < 1 {
        return Err(Error::InvalidParameter(format!("need j, k >= 1, got j = {j}, k = {k}")));
    }
    let (wa, wb) = match variant {
        1 => (k as f64, k as f64),
        2 => (k as f64 - 1.0, k as f64 + 1.0),
        3 => (k as f64 + 1.0, k as f64 - 1.0),
        v => return Err(Error::InvalidParameter(format!("variant must be 1, 2 or 3, got {v}"))),
    };
    let lhs = weighted_derivative_norm(f, k as f64, j).powi(2);
    let up = weighted_derivative_norm(f, wa, j + 1);
    let down = weighted_derivative_norm(f, wb, j - 1);
    let low = weighted_derivative_norm(f, k as f64 - 1.0, j - 1).powi(2);
    Ok((lhs, up * down + low))
}

/// Ball and lower-bound status of one ledger sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSample {
    pub t: f64,
    pub inside_ball: bool,
    pub lower_bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallVerdict {
    /// Why the configuration itself is unusable (`λ ≤ 0`), if it is.
    pub rejection: Option<String>,
    pub samples: Vec<BallSample>,
    /// First time the tracked total exceeded `2δ0`.
    pub ball_exit: Option<f64>,
    /// First time `inf ⟨x⟩^m |u|` dropped below `λ/4`.
    pub lower_bound_exit: Option<f64>,
}

impl BallVerdict {
    pub fn has_exit(&self) -> bool {
        self.ball_exit.is_some() || self.lower_bound_exit.is_some()
    }

    pub fn passed(&self) -> bool {
        self.rejection.is_none() && !self.has_exit()
    }
}

/// Checks `total ≤ 2δ0` and `inf ⟨x⟩^m|u| ≥ λ/4` at every ledger sample.
pub fn ball_monitor(entries: &[NormLedgerEntry], lambda: f64, delta0: f64) -> BallVerdict {
    let samples: Vec<BallSample> = entries
        .iter()
        .map(|e| BallSample {
            t: e.t,
            inside_ball: e.total() <= 2.0 * delta0,
            lower_bound_ok: lambda > 0.0 && e.inf_weighted >= 0.25 * lambda,
        })
        .collect();
    let rejection = (!(lambda > 0.0)).then(|| format!("lower bound λ = {lambda} must be > 0"));
    BallVerdict {
        rejection,
        ball_exit: samples.iter().find(|s| !s.inside_ball).map(|s| s.t),
        lower_bound_exit: samples.iter().find(|s| !s.lower_bound_ok).map(|s| s.t),
        samples,
    }
}

/// Corpus-fitted constants of the linear inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaBaseline {
    pub seed: u64,
    pub corpus_size: usize,
    pub grid_length: f64,
    pub grid_n: usize,
    /// `max lhs/rhs` per check name.
    pub constants: std::collections::BTreeMap<String, f64>,
}

const BUNDLED_BASELINE: &str = include_str!("../baseline/lemma_constants.json");

/// Relative drift allowed between a rerun and the stored constants.
pub const BASELINE_TOLERANCE: f64 = 0.05;

/// Number of Schwartz-class data in the smoothing calibration.
pub const SMOOTHING_CORPUS: usize = 20;

/// Time horizon and sample count of the smoothing calibration.
pub const SMOOTHING_HORIZON: (f64, usize) = (1.0, 201);

const INTERPOLATION_PARAMS: [(f64, f64, f64); 3] = [(1.0, 1.0, 0.5), (2.0, 1.0, 0.25), (1.0, 2.0, 0.75)];
const IBP_PARAMS: [(u32, u32); 4] = [(1, 1), (2, 1), (3, 2), (2, 3)];

impl LemmaBaseline {
    pub fn bundled() -> Result<Self> {
        Self::parse(BUNDLED_BASELINE)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Baseline(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("baseline serializes")
    }
}

/// Measured ratios of one check over the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaMeasurement {
    pub name: String,
    pub ratios: Vec<f64>,
}

impl LemmaMeasurement {
    pub fn max(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn ratio((lhs, rhs): (f64, f64)) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Evaluates every lemma check over the seeded corpus.
pub fn measure_lemmas(grid: &Grid, seed: u64, count: usize) -> Result<Vec<LemmaMeasurement>> {
    let corpus = Corpus::generate(grid, seed, count)?;
    let mut out = Vec::new();
    for (pi, &(a, b, g)) in INTERPOLATION_PARAMS.iter().enumerate() {
        for (tag, variant) in [
            ("weight_inside", InterpolationVariant::WeightInside),
            ("smoothness_inside", InterpolationVariant::SmoothnessInside),
        ] {
            let ratios = corpus
                .members
                .iter()
                .map(|m| interpolation_check(&m.field, a, b, g, variant).map(ratio))
                .collect::<Result<Vec<_>>>()?;
            out.push(LemmaMeasurement {
                name: format!("interpolation.{tag}.{pi}"),
                ratios,
            });
        }
    }
    for variant in 1..=3u8 {
        let mut ratios = Vec::new();
        for &(k, j) in &IBP_PARAMS {
            for m in &corpus.members {
                ratios.push(ratio(weighted_ibp_check(&m.field, k, j, variant)?));
            }
        }
        out.push(LemmaMeasurement {
            name: format!("ibp.variant{variant}"),
            ratios,
        });
    }
    let schwartz = Corpus::generate_kind(grid, seed, SMOOTHING_CORPUS, CorpusKind::GaussianPolynomial)?;
    let (t_end, nt) = SMOOTHING_HORIZON;
    let ratios = schwartz
        .members
        .iter()
        .map(|m| smoothing_report(&m.field, t_end, nt).map(|r| r.ratio))
        .collect::<Result<Vec<_>>>()?;
    out.push(LemmaMeasurement {
        name: "smoothing".into(),
        ratios,
    });
    Ok(out)
}

/// Fits one constant (the largest observed ratio) per check.
pub fn calibrate(grid: &Grid, seed: u64, count: usize) -> Result<LemmaBaseline> {
    let constants = measure_lemmas(grid, seed, count)?
        .into_iter()
        .map(|m| {
            let c = m.max();
            (m.name, c)
        })
        .collect();
    Ok(LemmaBaseline {
        seed,
        corpus_size: count,
        grid_length: grid.length(),
        grid_n: grid.n(),
        constants,
    })
}

/// Outcome of comparing a rerun with the stored constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaComparison {
    pub name: String,
    pub stored: f64,
    pub measured: f64,
    pub relative_drift: f64,
    /// Every corpus member satisfies `lhs ≤ stored·(1 + tol)·rhs`.
    pub inequality_holds: bool,
    pub passed: bool,
}

pub fn compare_with_baseline(baseline: &LemmaBaseline, measured: &[LemmaMeasurement]) -> Vec<LemmaComparison> {
    measured
        .iter()
        .map(|m| {
            let stored = baseline.constants.get(&m.name).copied().unwrap_or(f64::NAN);
            let measured_c = m.max();
            let relative_drift = (measured_c - stored).abs() / stored;
            let inequality_holds = m.ratios.iter().all(|&r| r <= stored * (1.0 + BASELINE_TOLERANCE));
            LemmaComparison {
                name: m.name.clone(),
                stored,
                measured: measured_c,
                relative_drift,
                inequality_holds,
                passed: inequality_holds && relative_drift <= BASELINE_TOLERANCE,
            }
        })
        .collect()
}
