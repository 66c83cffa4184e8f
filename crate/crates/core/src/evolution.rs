//! Time evolution of `∂ₜu = i∂ₓ²u + N(u)` for both nonlinearity forms.
//!
//! Two independent integrators are provided: an integrating-factor RK4
//! stepper, and Picard iteration of the Duhamel map
//! `Φ(u)(t) = e^{it∂ₓ²}u0 + ∫₀ᵗ e^{i(t-t')∂ₓ²} N(u(t')) dt'`
//! over chained time windows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::spectral::{antiderivative_from_left, dealias_spectrum, derivative, propagator_symbols, schrodinger_phase};

/// The nonlinearity of `∂ₜu = i∂ₓ²u + N(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    /// `N(u) = μ|u|^α ∂ₓu`.
    #[serde(rename = "A", alias = "advective")]
    Advective,
    /// `N(u) = μ∂ₓ(|u|^α u)`.
    #[serde(rename = "B", alias = "conservative")]
    Conservative,
}

/// Coupling for which the closed-form solitary waves solve the advective form.
///
/// Fixed by the discrete residual oracle (see the `soliton` integration tests):
/// among `μ ∈ {1, -1, i, -i}` only `-1` makes the residual vanish.
pub const SOLITON_MU: Complex64 = Complex64::new(-1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub form: Form,
    pub alpha: f64,
    pub mu: Complex64,
}

impl EquationSpec {
    pub fn new(form: Form, alpha: f64, mu: Complex64) -> Result<Self> {
        let eq = Self { form, alpha, mu };
        eq.validate()?;
        Ok(eq)
    }

    /// Free Schrödinger flow (`μ = 0`), bypassing the `|μ| = 1` requirement.
    pub fn linear(form: Form, alpha: f64) -> Self {
        Self {
            form,
            alpha,
            mu: Complex64::new(0.0, 0.0),
        }
    }

    /// `i∂ₜu + ∂ₓ²u + i∂ₓ(|u|²u) = 0`, i.e. conservative form, `α = 2`, `μ = -1`.
    pub fn dnls() -> Self {
        Self {
            form: Form::Conservative,
            alpha: 2.0,
            mu: Complex64::new(-1.0, 0.0),
        }
    }

    /// `i∂ₜv + ∂ₓ²v + i|v|²∂ₓv = 0`, the gauged Hamiltonian form.
    pub fn dnls_gauged() -> Self {
        Self {
            form: Form::Advective,
            alpha: 2.0,
            mu: Complex64::new(-1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("α must be > 0, got {}", self.alpha)));
        }
        if (self.mu.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!("|μ| must be 1, got {}", self.mu.norm())));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.mu == Complex64::new(0.0, 0.0)
    }
}

/// `|z|^α` with the continuous extension `0^α = 0`.
#[inline]
fn modulus_pow(z: Complex64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        z.norm_sqr()
    } else if alpha == 1.0 {
        z.norm()
    } else {
        z.norm().powf(alpha)
    }
}

/// Evaluates `N(u)` in spectral storage order (unnormalized DFT).
fn nonlinearity_spectrum(u: &ComplexField, eq: &EquationSpec, dealias: bool) -> Result<Vec<Complex64>> {
    let grid = u.grid();
    if eq.is_linear() {
        return Ok(vec![Complex64::new(0.0, 0.0); grid.n()]);
    }
    let mut spec: Vec<Complex64> = match eq.form {
        Form::Advective => {
            let du = derivative(u, 1);
            let mut prod: Vec<Complex64> = u
                .values()
                .iter()
                .zip(du.values())
                .map(|(&z, &dz)| eq.mu * modulus_pow(z, eq.alpha) * dz)
                .collect();
            grid.forward(&mut prod);
            prod
        }
        Form::Conservative => {
            let mut prod: Vec<Complex64> = u.values().iter().map(|&z| modulus_pow(z, eq.alpha) * z).collect();
            grid.forward(&mut prod);
            let nyq = grid.nyquist();
            for (k, (c, &xi)) in prod.iter_mut().zip(grid.freqs()).enumerate() {
                *c *= if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    eq.mu * Complex64::new(0.0, xi)
                };
            }
            prod
        }
    };
    if dealias {
        dealias_spectrum(grid, &mut spec);
    }
    if spec.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("nonlinearity"));
    }
    Ok(spec)
}

/// `N(u)`: `μ|u|^α∂ₓu` (advective) or `μ∂ₓ(|u|^α u)` (conservative), with
/// spectral derivatives and an optional 2/3-rule filter on the product.
pub fn nonlinearity(u: &ComplexField, eq: &EquationSpec, dealias: bool) -> Result<ComplexField> {
    ComplexField::from_spectrum(u.grid(), nonlinearity_spectrum(u, eq, dealias)?)
}

fn propagate(f: &ComplexField, symbols: &[Complex64]) -> Result<ComplexField> {
    let spec = f.spectrum().iter().zip(symbols).map(|(&c, &s)| c * s).collect();
    ComplexField::from_spectrum(f.grid(), spec)
}

fn axpy(u: &ComplexField, h: f64, k: &ComplexField) -> Result<ComplexField> {
    u.combine(Complex64::new(1.0, 0.0), k, Complex64::new(h, 0.0))
}

/// One integrating-factor RK4 step of length `dt`.
///
/// The linear part is propagated exactly; RK4 runs on the interaction-picture
/// variable `e^{-it∂ₓ²}u`.
pub fn step_ifrk4(u: &ComplexField, eq: &EquationSpec, dt: f64, dealias: bool) -> Result<ComplexField> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let half = propagator_symbols(u.grid(), 0.5 * dt);
    let n = |v: &ComplexField| nonlinearity(v, eq, dealias);

    let uh = propagate(u, &half)?;
    let k1 = propagate(&n(u)?, &half)?;
    let k2 = n(&axpy(&uh, 0.5 * dt, &k1)?)?;
    let k3 = n(&axpy(&uh, 0.5 * dt, &k2)?)?;
    let k4 = n(&propagate(&axpy(&uh, dt, &k3)?, &half)?)?;

    let mut inner = uh.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3)] {
        inner = axpy(&inner, w * dt / 6.0, k)?;
    }
    axpy(&propagate(&inner, &half)?, dt / 6.0, &k4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "ifrk4")]
    Ifrk4,
    #[serde(rename = "picard")]
    PicardDuhamel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    /// Initial window length `T_w`.
    pub window: f64,
    /// Quadrature substeps in the initial window; the sample spacing
    /// `window / substeps` is kept when windows are halved.
    pub substeps: usize,
    pub max_iters: usize,
    /// Relative tolerance on `sup_t ‖u^{(n+1)} - u^{(n)}‖₂ / sup_t ‖u^{(n)}‖₂`.
    pub contraction_tol: f64,
    /// How many times a window may be halved after a contraction failure.
    pub max_halvings: u32,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            window: 0.05,
            substeps: 50,
            max_iters: 60,
            contraction_tol: 1e-12,
            max_halvings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub picard: PicardConfig,
    pub dealias: bool,
    /// Samples between observer calls (IFRK4 steps or Picard quadrature nodes).
    pub sample_every: usize,
    /// Escape when `‖u‖_∞` exceeds this factor times its initial value.
    pub escape_factor: f64,
    /// Step-halving retries for an IFRK4 step that produced non-finite values.
    pub max_step_halvings: u32,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            scheme: Scheme::Ifrk4,
            picard: PicardConfig::default(),
            dealias: true,
            sample_every: 10,
            escape_factor: 1e3,
            max_step_halvings: 4,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be >= 0, got {}", self.t_end));
        }
        if self.sample_every == 0 {
            return bad("sample cadence must be >= 1".into());
        }
        if !(self.escape_factor > 1.0) {
            return bad(format!("escape factor must exceed 1, got {}", self.escape_factor));
        }
        let p = &self.picard;
        if !(p.window.is_finite() && p.window > 0.0) || p.substeps == 0 || p.max_iters == 0 {
            return bad("Picard window, substeps and iteration cap must be positive".into());
        }
        if !(p.contraction_tol.is_finite() && p.contraction_tol > 0.0) {
            return bad(format!("contraction tolerance must be positive, got {}", p.contraction_tol));
        }
        Ok(())
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// `‖u‖_∞` left the escape bound, or the state became non-finite.
    Escaped { t: f64, linf: f64 },
    /// The Picard map failed to contract even on the smallest allowed window.
    ContractionFailed { t: f64, window: f64, reason: String },
}

impl RunStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunStatus::Completed)
    }
}

/// Convergence record of one Picard window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub t_start: f64,
    pub length: f64,
    pub iterations: usize,
    /// `sup_t ‖u^{(n+1)} - u^{(n)}‖₂` per iteration.
    pub distances: Vec<f64>,
    /// `sup_t ‖u^{(n+1)} - u^{(n)}‖_{H¹}` per iteration.
    pub h1_distances: Vec<f64>,
    /// Successive distance ratios (from the second iteration on).
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl WindowReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SchemeStats {
    pub steps: usize,
    pub step_rejections: usize,
    pub windows: Vec<WindowReport>,
    /// Windows discarded because the iteration did not contract.
    pub failed_windows: Vec<WindowReport>,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub t: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub status: RunStatus,
    pub stats: SchemeStats,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least the initial sample")
    }
}

/// Callback invoked at every sample time with the current state.
pub type Observer<'a> = dyn FnMut(f64, &ComplexField) + 'a;

fn escape_check(u: &ComplexField, bound: f64) -> Option<f64> {
    let linf = u.linf_norm();
    (bound > 0.0 && linf > bound).then_some(linf)
}

/// Integrates with the configured scheme, calling `observe` at `t = 0`,
/// every `sample_every` samples, and at `t_end` (hit exactly).
pub fn solve(u0: &ComplexField, eq: &EquationSpec, cfg: &StepperConfig, observe: &mut Observer<'_>) -> Result<Trajectory> {
    match cfg.scheme {
        Scheme::Ifrk4 => solve_ifrk4(u0, eq, cfg, observe),
        Scheme::PicardDuhamel => solve_picard(u0, eq, cfg, observe),
    }
}

fn solve_ifrk4(u0: &ComplexField, eq: &EquationSpec, cfg: &StepperConfig, observe: &mut Observer<'_>) -> Result<Trajectory> {
    cfg.validate()?;
    let mut samples = vec![Sample { t: 0.0, field: u0.clone() }];
    observe(0.0, u0);
    let mut stats = SchemeStats::default();
    if cfg.t_end == 0.0 {
        return Ok(Trajectory {
            samples,
            status: RunStatus::Completed,
            stats,
        });
    }
    let steps = (cfg.t_end / cfg.dt).ceil().max(1.0) as usize;
    let dt = cfg.t_end / steps as f64;
    let bound = cfg.escape_factor * u0.linf_norm();
    let mut u = u0.clone();
    for step in 1..=steps {
        let t = if step == steps { cfg.t_end } else { step as f64 * dt };
        let next = match step_with_halving(&u, eq, dt, cfg, &mut stats) {
            Some(v) => v,
            None => {
                return Ok(Trajectory {
                    samples,
                    status: RunStatus::Escaped { t, linf: f64::INFINITY },
                    stats,
                })
            }
        };
        u = next;
        stats.steps += 1;
        let escaped = escape_check(&u, bound);
        if step % cfg.sample_every == 0 || step == steps || escaped.is_some() {
            observe(t, &u);
            samples.push(Sample { t, field: u.clone() });
        }
        if let Some(linf) = escaped {
            return Ok(Trajectory {
                samples,
                status: RunStatus::Escaped { t, linf },
                stats,
            });
        }
    }
    Ok(Trajectory {
        samples,
        status: RunStatus::Completed,
        stats,
    })
}

fn step_with_halving(
    u: &ComplexField,
    eq: &EquationSpec,
    dt: f64,
    cfg: &StepperConfig,
    stats: &mut SchemeStats,
) -> Option<ComplexField> {
    for level in 0..=cfg.max_step_halvings {
        let pieces = 1usize << level;
        let h = dt / pieces as f64;
        let mut v = u.clone();
        let mut ok = true;
        for _ in 0..pieces {
            match step_ifrk4(&v, eq, h, cfg.dealias) {
                Ok(next) => v = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(v);
        }
        stats.step_rejections += 1;
    }
    None
}

/// Evaluates the Duhamel map on a window sampled at uniform `times`
/// (starting at 0, local to the window) with datum `u0 = u_traj[0]`'s start
/// value given separately.
///
/// The time integral is the composite trapezoid rule in the interaction
/// picture: `Φ(t_n) = e^{it_n∂ₓ²}(û0 + Σ trapezoid of e^{-it'∂ₓ²}N(u(t')))`.
pub fn picard_apply_phi(
    u_traj: &[ComplexField],
    times: &[f64],
    u0: &ComplexField,
    eq: &EquationSpec,
    dealias: bool,
) -> Result<Vec<ComplexField>> {
    if u_traj.len() != times.len() || times.is_empty() {
        return Err(Error::InvalidParameter(
            "Picard trajectory and time grid must be non-empty and equally long".into(),
        ));
    }
    let grid = u0.grid();
    for u in u_traj {
        grid.check_same(u.grid())?;
    }
    let base = u0.spectrum();
    let freqs = grid.freqs();
    let mut integral = vec![Complex64::new(0.0, 0.0); grid.n()];
    let mut prev: Option<Vec<Complex64>> = None;
    let mut out = Vec::with_capacity(times.len());
    for (j, (u, &t)) in u_traj.iter().zip(times).enumerate() {
        // interaction-picture integrand e^{-it∂ₓ²}N(u(t)), symbol e^{+iξ²t}
        let nl = nonlinearity_spectrum(u, eq, dealias)?;
        let w: Vec<Complex64> = nl
            .iter()
            .zip(freqs)
            .map(|(&c, &xi)| c * schrodinger_phase(xi * xi, t))
            .collect();
        if let Some(p) = &prev {
            let h = 0.5 * (t - times[j - 1]);
            for ((acc, a), b) in integral.iter_mut().zip(p).zip(&w) {
                *acc += h * (a + b);
            }
        }
        prev = Some(w);
        let spec: Vec<Complex64> = base
            .iter()
            .zip(&integral)
            .zip(freqs)
            .map(|((&b, &i), &xi)| (b + i) * schrodinger_phase(xi * xi, -t))
            .collect();
        out.push(ComplexField::from_spectrum(grid, spec)?);
    }
    Ok(out)
}

fn sup_distance(a: &[ComplexField], b: &[ComplexField]) -> Result<(f64, f64)> {
    let mut l2 = 0.0f64;
    let mut h1 = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = x.sub(y)?;
        l2 = l2.max(d.l2_norm());
        h1 = h1.max(crate::norms::sobolev_norm(&d, 1.0)?);
    }
    Ok((l2, h1))
}

enum WindowOutcome {
    Converged(Vec<ComplexField>, WindowReport),
    Failed(WindowReport, String),
}

fn picard_window(
    start: &ComplexField,
    t_start: f64,
    times: &[f64],
    eq: &EquationSpec,
    cfg: &StepperConfig,
) -> Result<WindowOutcome> {
    let p = &cfg.picard;
    let mut iterate = times
        .iter()
        .map(|&t| crate::spectral::free_evolve(start, t))
        .collect::<Result<Vec<_>>>()?;
    let mut report = WindowReport {
        t_start,
        length: *times.last().expect("window has samples"),
        iterations: 0,
        distances: Vec::new(),
        h1_distances: Vec::new(),
        ratios: Vec::new(),
        converged: false,
    };
    let mut rising = 0;
    for _ in 0..p.max_iters {
        let next = match picard_apply_phi(&iterate, times, start, eq, cfg.dealias) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) => return Ok(WindowOutcome::Failed(report, "iterate became non-finite".into())),
            Err(e) => return Err(e),
        };
        let (dist, h1) = sup_distance(&next, &iterate)?;
        let scale = iterate.iter().map(|u| u.l2_norm()).fold(0.0, f64::max);
        report.iterations += 1;
        if let Some(&last) = report.distances.last() {
            let ratio = if last > 0.0 { dist / last } else { 0.0 };
            report.ratios.push(ratio);
            rising = if ratio >= 1.0 { rising + 1 } else { 0 };
        }
        report.distances.push(dist);
        report.h1_distances.push(h1);
        iterate = next;
        if dist <= p.contraction_tol * scale || dist == 0.0 {
            report.converged = true;
            return Ok(WindowOutcome::Converged(iterate, report));
        }
        if !dist.is_finite() {
            return Ok(WindowOutcome::Failed(report, "iterate distance is not finite".into()));
        }
        if rising >= 3 {
            return Ok(WindowOutcome::Failed(
                report,
                "contraction failed: distance ratio >= 1 for 3 consecutive iterations".into(),
            ));
        }
    }
    Ok(WindowOutcome::Failed(
        report,
        format!("contraction failed: no convergence within {} iterations", p.max_iters),
    ))
}

/// Picard iteration `u^{(n+1)} = Φ(u^{(n)})` from the free evolution, over
/// chained windows; a window that fails to contract is halved and retried
/// up to `picard.max_halvings` times.
pub fn solve_picard(
    u0: &ComplexField,
    eq: &EquationSpec,
    cfg: &StepperConfig,
    observe: &mut Observer<'_>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let p = &cfg.picard;
    let h = p.window / p.substeps as f64;
    let mut samples = vec![Sample { t: 0.0, field: u0.clone() }];
    observe(0.0, u0);
    let mut stats = SchemeStats::default();
    let bound = cfg.escape_factor * u0.linf_norm();
    let mut t = 0.0;
    let mut window = p.window;
    let mut halvings = 0;
    let mut start = u0.clone();
    let mut since_sample = 0usize;
    while t < cfg.t_end {
        let len = window.min(cfg.t_end - t);
        let nsub = (len / h - 1e-9).ceil().max(1.0) as usize;
        let times: Vec<f64> = (0..=nsub)
            .map(|j| if j == nsub { len } else { j as f64 * len / nsub as f64 })
            .collect();
        match picard_window(&start, t, &times, eq, cfg)? {
            WindowOutcome::Converged(fields, report) => {
                stats.windows.push(report);
                let is_last = t + len >= cfg.t_end;
                for (j, (f, &tl)) in fields.iter().zip(&times).enumerate().skip(1) {
                    since_sample += 1;
                    stats.steps += 1;
                    let now = if is_last && j == nsub { cfg.t_end } else { t + tl };
                    let escaped = escape_check(f, bound);
                    if since_sample >= cfg.sample_every || (is_last && j == nsub) || escaped.is_some() {
                        since_sample = 0;
                        observe(now, f);
                        samples.push(Sample { t: now, field: f.clone() });
                    }
                    if let Some(linf) = escaped {
                        return Ok(Trajectory {
                            samples,
                            status: RunStatus::Escaped { t: now, linf },
                            stats,
                        });
                    }
                }
                start = fields.into_iter().last().expect("window has samples");
                t = if is_last { cfg.t_end } else { t + len };
            }
            WindowOutcome::Failed(report, reason) => {
                stats.failed_windows.push(report);
                if halvings < p.max_halvings && len > 2.0 * h {
                    halvings += 1;
                    window *= 0.5;
                    continue;
                }
                return Ok(Trajectory {
                    samples,
                    status: RunStatus::ContractionFailed { t, window: len, reason },
                    stats,
                });
            }
        }
    }
    Ok(Trajectory {
        samples,
        status: RunStatus::Completed,
        stats,
    })
}

/// `v = u · exp((i/2) ∫_{-∞}^x |u|² dy)`, the integral taken spectrally
/// from the left box edge.
pub fn gauge_transform(u: &ComplexField) -> Result<ComplexField> {
    gauge_with_sign(u, 1.0)
}

/// Inverse of [`gauge_transform`] (`|v| = |u|`, so the same integral undoes it).
pub fn inverse_gauge_transform(v: &ComplexField) -> Result<ComplexField> {
    gauge_with_sign(v, -1.0)
}

fn gauge_with_sign(u: &ComplexField, sign: f64) -> Result<ComplexField> {
    let q: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    let acc = antiderivative_from_left(u.grid(), &q);
    ComplexField::new(
        u.grid(),
        u.values()
            .iter()
            .zip(acc)
            .map(|(&z, a)| z * Complex64::from_polar(1.0, 0.5 * sign * a))
            .collect(),
    )
}

/// Default `h` of the centered time difference in [`residual`].
pub const DEFAULT_FD_HALF_WIDTH: f64 = 1e-6;

/// States at `t - h`, `t`, `t + h` for the centered-difference residual.
#[derive(Debug, Clone, Copy)]
pub struct TimeStencil<'a> {
    pub before: &'a ComplexField,
    pub at: &'a ComplexField,
    pub after: &'a ComplexField,
    pub half_width: f64,
}

/// `‖(u(t+h) - u(t-h))/(2h) - i∂ₓ²u(t) - N(u(t))‖₂`, no dealiasing.
pub fn residual(st: &TimeStencil<'_>, eq: &EquationSpec) -> Result<f64> {
    if !(st.half_width.is_finite() && st.half_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference half width must be positive, got {}",
            st.half_width
        )));
    }
    st.at.grid().check_same(st.before.grid())?;
    st.at.grid().check_same(st.after.grid())?;
    let uxx = derivative(st.at, 2);
    let nl = nonlinearity(st.at, eq, false)?;
    let inv = 0.5 / st.half_width;
    let i = Complex64::new(0.0, 1.0);
    let r = ComplexField::new(
        st.at.grid(),
        (0..st.at.len())
            .map(|j| (st.after.values()[j] - st.before.values()[j]) * inv - i * uxx.values()[j] - nl.values()[j])
            .collect(),
    )?;
    Ok(r.l2_norm())
}

/// Location of `max |u|²`, refined by a parabola through the neighbouring
/// nodes (periodic indexing).
pub fn peak_location(u: &ComplexField) -> f64 {
    let grid: &Grid = u.grid();
    let n = grid.n();
    let p: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    let j = p
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let (l, c, r) = (p[(j + n - 1) % n], p[j], p[(j + 1) % n]);
    let den = l - 2.0 * c + r;
    let offset = if den != 0.0 { 0.5 * (l - r) / den } else { 0.0 };
    grid.nodes()[j] + offset * grid.dx()
}
