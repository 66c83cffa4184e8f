use std::f64::consts::PI;

use gdnls_core::data::{soliton_profile, SolitonParams};
use gdnls_core::norms::{
    bracket, commutation_residual, sobolev_norm, weighted_infimum, weighted_lp_norm, EdgeDecay, NormKind,
};
use gdnls_core::spectral::{apply_multiplier, free_evolve, Multiplier};
use gdnls_core::{Complex64, ComplexField, Grid};
use proptest::prelude::*;

fn random_field(g: &Grid, seed: &[(f64, f64)]) -> ComplexField {
    ComplexField::new(g, seed.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
}

fn samples(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn propagator_is_unitary(seed in samples(256), t in prop::sample::select(vec![0.1, 1.0, 10.0])) {
        let g = Grid::new(20.0, 256).unwrap();
        let f = random_field(&g, &seed);
        let u = free_evolve(&f, t).unwrap();
        prop_assert!((u.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn propagator_group_law(seed in samples(256), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let g = Grid::new(20.0, 256).unwrap();
        let f = random_field(&g, &seed);
        let two = free_evolve(&free_evolve(&f, t1).unwrap(), t2).unwrap();
        let one = free_evolve(&f, t1 + t2).unwrap();
        prop_assert!(two.l2_distance(&one).unwrap() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn time_reversal(seed in samples(128), t in -10.0f64..10.0) {
        let g = Grid::new(20.0, 128).unwrap();
        let f = random_field(&g, &seed);
        let back = free_evolve(&free_evolve(&f, t).unwrap(), -t).unwrap();
        prop_assert!(back.l2_distance(&f).unwrap() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn riesz_composition(seed in samples(256), a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let g = Grid::new(2.0 * PI, 256).unwrap();
        let f = random_field(&g, &seed);
        let ab = apply_multiplier(&apply_multiplier(&f, &Multiplier::Riesz(a)).unwrap(), &Multiplier::Riesz(b)).unwrap();
        let direct = apply_multiplier(&f, &Multiplier::Riesz(a + b)).unwrap();
        prop_assert!(ab.l2_distance(&direct).unwrap() <= 1e-12 * direct.l2_norm().max(f.l2_norm()));
    }

    #[test]
    fn second_derivative_is_minus_riesz_two(seed in samples(128)) {
        let g = Grid::new(2.0 * PI, 128).unwrap();
        let f = random_field(&g, &seed);
        let d2 = apply_multiplier(&f, &Multiplier::Derivative(2)).unwrap();
        let r2 = apply_multiplier(&f, &Multiplier::Riesz(2.0)).unwrap().scale(Complex64::new(-1.0, 0.0));
        prop_assert!(d2.l2_distance(&r2).unwrap() <= 1e-12 * r2.l2_norm());
    }

    #[test]
    fn parseval(seed in samples(256)) {
        let g = Grid::new(13.0, 256).unwrap();
        let f = random_field(&g, &seed);
        let spectral: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.dx() / g.n() as f64;
        prop_assert!((spectral.sqrt() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn bessel_dominates_riesz(xi in -1e3f64..1e3, s in 0.0f64..8.0) {
        let j = Multiplier::Bessel(s).symbol(xi, false).re;
        let d = Multiplier::Riesz(s).symbol(xi, false).re;
        prop_assert!(j >= d);
    }

    #[test]
    fn propagator_has_unit_modulus(xi in -2e3f64..2e3, t in -50.0f64..50.0) {
        let z = Multiplier::Propagator(t).symbol(xi, false);
        prop_assert!((z.norm() - 1.0).abs() <= 1e-15);
    }
}

fn default_grid() -> Grid {
    Grid::new(80.0 * PI, 4096).unwrap()
}

/// Composite Simpson rule on `[-a, a]` with `n` panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, n: usize) -> f64 {
    let h = 2.0 * a / n as f64;
    let mut s = f(-a) + f(a);
    for i in 1..n {
        let x = -a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

#[test]
fn weighted_gaussian_against_quadrature_oracle() {
    let f = ComplexField::from_real_fn(&default_grid(), |x| (-x * x).exp()).unwrap();
    let integrand = |x: f64| bracket(x).powi(2) * (-2.0 * x * x).exp();
    let coarse = simpson(integrand, 12.0, 20_000);
    let fine = simpson(integrand, 14.0, 80_000);
    assert!((coarse - fine).abs() < 1e-11, "oracle not converged");
    let got = weighted_lp_norm(&f, 1, NormKind::L2);
    assert!((got - fine.sqrt()).abs() <= 1e-8, "{got} vs {}", fine.sqrt());
}

#[test]
fn sobolev_norm_is_refinement_stable() {
    let norm = |n| {
        let g = Grid::new(80.0 * PI, n).unwrap();
        sobolev_norm(&ComplexField::from_real_fn(&g, |x| (-x * x).exp()).unwrap(), 6.5).unwrap()
    };
    let (a, b) = (norm(4096), norm(8192));
    assert!((a - b).abs() <= 1e-8 * b);
}

#[test]
fn soliton_edge_infimum_from_closed_form() {
    let g = default_grid();
    let p = SolitonParams::new(1.0, 1.0, 0.0).unwrap();
    let phi = soliton_profile(&p, &g).unwrap();
    let edge = -0.5 * g.length();
    let want = bracket(edge).powi(3) * p.profile(edge);
    let got = weighted_infimum(&phi, 3);
    assert!(got > 0.0);
    assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
}

#[test]
fn commutation_residual_thresholds_and_refinement() {
    let residual = |n: usize, m: u32| {
        let g = Grid::new(80.0 * PI, n).unwrap();
        let f = ComplexField::from_real_fn(&g, |x| (-x * x).exp()).unwrap();
        commutation_residual(&f, 0.5, m, EdgeDecay::default()).unwrap()
    };
    assert!(residual(4096, 1) <= 1e-8);
    assert!(residual(4096, 3) <= 1e-6);
    for m in [1, 3] {
        let ladder: Vec<f64> = [256, 512, 1024].iter().map(|&n| residual(n, m)).collect();
        for w in ladder.windows(2) {
            assert!(w[0] >= 4.0 * w[1], "m = {m}: {ladder:?}");
        }
    }
}
