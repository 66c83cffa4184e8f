use std::f64::consts::PI;

use gdnls_core::data::{soliton_solution, SolitonParams};
use gdnls_core::evolution::{
    peak_location, residual, solve, EquationSpec, Form, StepperConfig, TimeStencil, DEFAULT_FD_HALF_WIDTH, SOLITON_MU,
};
use gdnls_core::{Complex64, Grid};

fn grid() -> Grid {
    Grid::new(80.0 * PI, 4096).unwrap()
}

fn soliton_residual(p: &SolitonParams, g: &Grid, mu: Complex64, t: f64, h: f64) -> f64 {
    let eq = EquationSpec::new(Form::Advective, p.alpha, mu).unwrap();
    let (b, a, f) = (
        soliton_solution(p, g, t - h).unwrap(),
        soliton_solution(p, g, t).unwrap(),
        soliton_solution(p, g, t + h).unwrap(),
    );
    residual(
        &TimeStencil {
            before: &b,
            at: &a,
            after: &f,
            half_width: h,
        },
        &eq,
    )
    .unwrap()
}

#[test]
fn exactly_one_coupling_makes_the_soliton_exact() {
    let g = grid();
    let p = SolitonParams::new(1.0, 1.0, 0.5).unwrap();
    let candidates = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let vanishing: Vec<Complex64> = candidates
        .into_iter()
        .filter(|&mu| {
            let coarse = soliton_residual(&p, &g, mu, 0.3, 1e-3);
            let fine = soliton_residual(&p, &g, mu, 0.3, 1e-4);
            fine < 1e-6 && fine < 0.05 * coarse
        })
        .collect();
    assert_eq!(vanishing, vec![SOLITON_MU]);
}

#[test]
fn pinned_residual_is_below_threshold() {
    let g = grid();
    let p = SolitonParams::new(1.0, 1.0, 0.5).unwrap();
    for t in [0.0, 0.7, 2.0] {
        let r = soliton_residual(&p, &g, SOLITON_MU, t, DEFAULT_FD_HALF_WIDTH);
        assert!(r <= 1e-6, "t = {t}: {r}");
    }
}

#[test]
fn other_alphas_use_the_same_coupling() {
    let g = grid();
    for (alpha, omega, c) in [(0.5, 1.0, 0.3), (2.0, 0.8, -0.4)] {
        let p = SolitonParams::new(alpha, omega, c).unwrap();
        assert!(soliton_residual(&p, &g, SOLITON_MU, 0.2, DEFAULT_FD_HALF_WIDTH) <= 1e-6);
        assert!(soliton_residual(&p, &g, -SOLITON_MU, 0.2, DEFAULT_FD_HALF_WIDTH) > 1e-1);
    }
}

#[test]
fn random_field_is_not_a_solution() {
    use rand::{Rng, SeedableRng};
    let g = grid();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut field = || {
        let v: Vec<Complex64> = (0..g.n())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        gdnls_core::ComplexField::new(&g, v).unwrap()
    };
    let (b, a, f) = (field(), field(), field());
    let eq = EquationSpec::new(Form::Advective, 1.0, SOLITON_MU).unwrap();
    let r = residual(
        &TimeStencil {
            before: &b,
            at: &a,
            after: &f,
            half_width: DEFAULT_FD_HALF_WIDTH,
        },
        &eq,
    )
    .unwrap();
    assert!(r >= 1e-1);
}

/// Composite Simpson rule on `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn closed_form_phase_matches_quadrature() {
    for p in [
        SolitonParams::new(1.0, 1.0, 0.5).unwrap(),
        SolitonParams::new(0.5, 2.0, -1.0).unwrap(),
        SolitonParams::new(2.0, 1.0, 0.0).unwrap(),
    ] {
        for y in [-3.0, 0.0, 1.7] {
            let numeric = simpson(|s| p.profile_pow_alpha(s), -80.0, y, 200_000);
            assert!((p.phase_integral(y) - numeric).abs() <= 1e-9, "{p:?} at {y}");
        }
    }
    // the algebraic tail is integrated analytically beyond the cutoff
    let p = SolitonParams::degenerate(1.0, 1.0).unwrap();
    let cut = -2000.0;
    let tail = 2.0 * (p.alpha + 2.0) / p.alpha * ((0.5 * p.alpha * p.speed * cut).atan() + 0.5 * PI);
    let numeric = tail + simpson(|s| p.profile_pow_alpha(s), cut, 0.5, 2_000_000);
    assert!((p.phase_integral(0.5) - numeric).abs() <= 1e-9);
}

#[test]
fn degenerate_branch_is_the_limit() {
    let values: Vec<f64> = [0.4, 0.3, 0.26, 0.251, 0.2501, 0.250_001]
        .iter()
        .map(|&w| SolitonParams::new(1.0, w, 1.0).unwrap().profile(0.0))
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!((values.last().unwrap() - 3.0).abs() < 1e-5);
    assert_eq!(SolitonParams::degenerate(1.0, 1.0).unwrap().profile(0.0), 3.0);
}

#[test]
fn soliton_translates_at_its_speed() {
    // shorter than the acceptance run; same oracle
    let g = grid();
    let p = SolitonParams::new(1.0, 1.0, 0.5).unwrap();
    let eq = EquationSpec::new(Form::Advective, 1.0, SOLITON_MU).unwrap();
    let u0 = soliton_solution(&p, &g, 0.0).unwrap();
    let cfg = StepperConfig {
        dt: 1e-3,
        t_end: 1.0,
        sample_every: 100,
        ..Default::default()
    };
    let tr = solve(&u0, &eq, &cfg, &mut |_, _| {}).unwrap();
    let u = &tr.last().field;
    assert!((peak_location(u) - 0.5).abs() <= 2.0 * g.dx());
    assert!((u.mass() - u0.mass()).abs() <= 1e-8 * u0.mass());
    let exact = soliton_solution(&p, &g, 1.0).unwrap();
    assert!(u.l2_distance(&exact).unwrap() <= 1e-6);
}
