mod common;

use af_secrecy::degraded::{solve_degraded, DegradedMode, DegradedProblem};
use af_secrecy::oracle::{grid_oracle, OracleConfig};
use af_secrecy::scaled::{rate_from_radius, solve_scaled, ScaledProblem};
use af_secrecy::{ChannelInstance, SolverConfig};
use rand::Rng;

fn omega_of(inst: &ChannelInstance, beta: &[f64]) -> Vec<f64> {
    beta.iter().zip(inst.h_t()).map(|(b, h)| b * h).collect()
}

fn with_signs(rng: &mut impl Rng, inst: &ChannelInstance) -> ChannelInstance {
    let h_s = inst.h_s().iter().map(|h| if rng.random_bool(0.3) { -h } else { *h }).collect();
    ChannelInstance::new(h_s, inst.h_t().to_vec(), inst.h_e().to_vec(), inst.p_s(), inst.p_relay().to_vec(), inst.sigma2())
        .unwrap()
}

#[test]
fn feasible_and_aligned() {
    let mut rng = common::rng(41);
    let cfg = SolverConfig::default();
    for _ in 0..300 {
        let m = rng.random_range(1..=6);
        let (inst, _) = common::scaled(&mut rng, m);
        let inst = with_signs(&mut rng, &inst);
        let problem = ScaledProblem::new(inst.clone()).unwrap();
        let r = solve_scaled(&problem, &cfg).unwrap();
        let omega = omega_of(&inst, &r.beta_opt);
        let (g, wmax) = (problem.g_s(), problem.omega_max());
        for i in 0..m {
            assert!(omega[i].abs() <= wmax[i] * (1.0 + 1e-12));
            assert!(omega[i] * g[i] >= 0.0);
        }
        let free: Vec<f64> = (0..m)
            .filter(|&i| omega[i].abs() < wmax[i] * (1.0 - 1e-9))
            .map(|i| omega[i] / g[i])
            .collect();
        for ratio in &free {
            assert!((ratio - free[0]).abs() <= 1e-9 * free[0].abs().max(1.0));
        }
    }
}

#[test]
fn dominates_random_feasible_points() {
    let mut rng = common::rng(42);
    let cfg = SolverConfig::default();
    for _ in 0..30 {
        let m = rng.random_range(2..=5);
        let (inst, _) = common::scaled(&mut rng, m);
        let problem = ScaledProblem::new(inst).unwrap();
        let best = solve_scaled(&problem, &cfg).unwrap().rate_bits;
        let wmax = problem.omega_max().to_vec();
        for _ in 0..10_000 {
            let omega = common::box_point(&mut rng, &wmax);
            assert!(problem.rate_of(&omega) <= best + 1e-9);
        }
    }
}

#[test]
fn agrees_with_degraded_solver_and_oracle() {
    let mut rng = common::rng(43);
    let cfg = SolverConfig::default();
    for k in 0..16 {
        let m = 2 + k % 4;
        let (inst, _) = common::scaled(&mut rng, m);
        let scaled = solve_scaled(&ScaledProblem::new(inst.clone()).unwrap(), &cfg).unwrap().rate_bits;
        let degraded = solve_degraded(&DegradedProblem::new(inst.clone(), DegradedMode::Individual).unwrap(), &cfg)
            .unwrap()
            .rate_bits;
        assert!((scaled - degraded).abs() <= 1e-3, "scaled {scaled} degraded {degraded}");
        if m == 2 {
            let oracle = grid_oracle(&inst, &OracleConfig::with_relative_step(0.005, 3)).unwrap().rate_bits;
            assert!((scaled - oracle).abs() <= 2e-3);
            assert!(scaled >= oracle - 1e-9);
        }
    }
}

#[test]
fn rate_increases_with_psi() {
    let mut rng = common::rng(44);
    for _ in 0..1000 {
        let alpha = rng.random_range(0.05..0.95);
        let r = rng.random_range(0.01..10.0);
        let psi = rng.random_range(0.01..100.0);
        let h = 1e-6 * psi;
        assert!(rate_from_radius(alpha, r, psi + h) > rate_from_radius(alpha, r, psi));
    }
}

#[test]
fn tie_order_does_not_matter() {
    let cfg = SolverConfig::default();
    // Two identical relays tie on |g|/ω_max; the third sorts elsewhere.
    let a = ChannelInstance::new(vec![1.0, 1.0, 2.0], vec![2.0, 2.0, 1.0], vec![0.6, 0.6, 0.3], 4.0, vec![0.5, 0.5, 5.0], 1.0)
        .unwrap();
    let b = ChannelInstance::new(vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 2.0], vec![0.3, 0.6, 0.6], 4.0, vec![5.0, 0.5, 0.5], 1.0)
        .unwrap();
    let pa = ScaledProblem::new(a).unwrap();
    let pb = ScaledProblem::new(b).unwrap();
    assert!(pa.order()[..2] == [0, 1] || pa.order()[1..] == [0, 1]);
    let (ra, rb) = (solve_scaled(&pa, &cfg).unwrap(), solve_scaled(&pb, &cfg).unwrap());
    assert!((ra.rate_bits - rb.rate_bits).abs() <= 1e-12);
    let mut wa = ra.beta_opt.to_vec();
    let mut wb = rb.beta_opt.to_vec();
    wa.sort_by(f64::total_cmp);
    wb.sort_by(f64::total_cmp);
    for (x, y) in wa.iter().zip(&wb) {
        assert!((x - y).abs() <= 1e-12);
    }
}
