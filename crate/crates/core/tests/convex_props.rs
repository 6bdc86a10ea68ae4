mod common;

use af_secrecy::convex::{
    golden_section_max, maximize_linear_over_ellipsoids, min_norm_qp, positive_quartic_root, quartic_value,
    EllipsoidSet, GOLDEN_RATIO,
};
use af_secrecy::SolverConfig;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn random_psd(rng: &mut impl Rng, n: usize, ridge: f64) -> DMatrix<f64> {
    let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut a = b.transpose() * b;
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    a
}

#[test]
fn barrier_beats_random_feasible_points() {
    let mut rng = common::rng(11);
    let cfg = SolverConfig::default();
    for _ in 0..100 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(1..=4);
        let mats: Vec<_> = (0..m).map(|k| random_psd(&mut rng, n, if k == 0 { 0.1 } else { 0.0 })).collect();
        let set = EllipsoidSet::new(mats.clone()).unwrap();
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let sol = maximize_linear_over_ellipsoids(&c, &set, &cfg).unwrap();

        assert!(set.quadratic_forms(&sol.v).iter().all(|q| *q <= 1.0 + cfg.feasibility_tol));
        assert!(sol.kkt_residual <= cfg.kkt_tol && sol.complementarity <= cfg.kkt_tol);
        assert!(sol.multipliers.iter().all(|l| *l >= 0.0));

        for _ in 0..10_000 {
            let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let worst = set.quadratic_forms(&u).into_iter().fold(0.0, f64::max);
            // Half the samples sit on the boundary, where the maximum lives.
            let shrink = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.0..1.0) };
            let scale = shrink / worst.sqrt();
            let value: f64 = c.iter().zip(&u).map(|(a, b)| a * b * scale).sum();
            assert!(value <= sol.value + 1e-8 * sol.value.abs().max(1.0));
        }
    }
}

#[test]
fn golden_finds_quadratic_peaks() {
    let mut rng = common::rng(12);
    for _ in 0..500 {
        let lo = rng.random_range(-10.0..0.0);
        let hi = lo + rng.random_range(0.1..20.0);
        let peak = rng.random_range(lo..hi);
        let curv = rng.random_range(0.1..10.0);
        let tol = 10f64.powf(rng.random_range(-9.0..-3.0));
        let r = golden_section_max(|x| -curv * (x - peak) * (x - peak), lo, hi, tol).unwrap();
        assert!((r.x - peak).abs() <= tol);
        let bound = (((hi - lo) / tol).ln() / GOLDEN_RATIO.ln()).ceil() as usize + 2;
        assert!(r.evaluations <= bound);
    }
}

proptest! {
    #[test]
    fn golden_handles_monotone_functions(lo in -5.0..5.0f64, width in 0.01..10.0f64, slope in 0.1..5.0f64) {
        let hi = lo + width;
        let up = golden_section_max(|x| slope * x, lo, hi, 1e-8).unwrap();
        prop_assert!(hi - up.x <= 1e-8);
        let down = golden_section_max(|x| -slope * x, lo, hi, 1e-8).unwrap();
        prop_assert!(down.x - lo <= 1e-8);
    }
}

#[test]
fn quartic_random_coefficients() {
    let mut rng = common::rng(13);
    for _ in 0..1000 {
        let c = [
            10f64.powf(rng.random_range(-3.0..4.0)),
            rng.random_range(0.0..100.0),
            rng.random_range(0.0..100.0),
            rng.random_range(0.0..100.0),
        ];
        let r = positive_quartic_root(c, 1e-10).unwrap();
        assert!(r > 0.0);
        assert!(quartic_value(c, r).abs() <= 1e-9 * c[0].max(1.0));
        // Strictly decreasing on (0, ∞): the only sign change is at r.
        assert!(quartic_value(c, r * (1.0 - 1e-6)) > 0.0);
        assert!(quartic_value(c, r * (1.0 + 1e-6)) < 0.0);
    }
}

#[test]
fn qp_row_rescaling_is_invariant() {
    let mut rng = common::rng(14);
    let cfg = SolverConfig::default();
    let mut checked = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=6);
        let k = rng.random_range(1..=3);
        let heq = DMatrix::from_fn(1, n, |_, _| rng.random_range(-1.0..1.0));
        let gineq = DMatrix::from_fn(k, n, |_, _| rng.random_range(-1.0..1.0));
        let Ok(base) = min_norm_qp(&heq, &[1.0], &gineq, &cfg) else { continue };
        let s_eq = rng.random_range(0.1..10.0);
        let scales: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..10.0)).collect();
        let heq2 = &heq * s_eq;
        let gineq2 = DMatrix::from_fn(k, n, |i, j| gineq[(i, j)] * scales[i]);
        let other = min_norm_qp(&heq2, &[s_eq], &gineq2, &cfg).unwrap();
        for (a, b) in base.w.iter().zip(&other.w) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        checked += 1;
    }
    assert!(checked > 50);
}
