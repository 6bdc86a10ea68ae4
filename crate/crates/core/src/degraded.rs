//! Optimal relay weights for degraded eavesdropper channels (`|h_ie| < |h_it|`).
//!
//! In the coordinates `v = ω/√(1+ωᵗω)` the destination SNR is `(g_sᵗv)²` and the
//! condition `SNR_e ≤ η` becomes the ellipsoid `vᵗC_e(η)v ≤ 1` with
//!
//! ```text
//! C_e(η) = γ_s ĥĥᵗ/η + I − diag(ρ²),   ρ_i = h_ie/h_it,   ĥ_i = h_si ρ_i.
//! ```
//!
//! For fixed η, maximizing `g_sᵗv` over that ellipsoid and the power constraints is a
//! convex problem. The secrecy objective `f(η) = (1 + (g_sᵗv*(η))²)/(1 + η)` is then
//! maximized over `η ∈ [0, η_max]` by golden-section search.
//!
//! Per-relay limits `ω_i² ≤ ω_max,i²` read `vᵗD_i v ≤ 1` with `D_i = I` except for
//! `(D_i)_ii = 1 + 1/ω_max,i²`. The total power limit `βᵗΛβ ≤ P_tot` reads
//! `vᵗD_T v ≤ 1` with `D_T = diag(1 + Λ_i/(h_it² P_tot))`.

use nalgebra::DMatrix;

use crate::convex::{
    maximize_linear_over_ellipsoids, try_golden_section_max, BarrierSolution, EllipsoidSet,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::model::{
    dot, from_transformed, omega_max_bounds, ChannelInstance, Diagnostics, Method, ScalingVector,
    SolveReport,
};
use crate::zero_forcing::solve_zero_forcing;

/// Smallest η handed to the inner solver; keeps `C_e(η)` finite.
pub const MIN_INTERIOR_ETA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegradedMode {
    /// `|β_i| ≤ β_max,i` for every relay.
    Individual,
    /// `Σ P_i` shared across relays.
    Total,
}

impl DegradedMode {
    pub fn method(self) -> Method {
        match self {
            DegradedMode::Individual => Method::DegradedIndividual,
            DegradedMode::Total => Method::DegradedTotal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegradedProblem {
    instance: ChannelInstance,
    mode: DegradedMode,
    rho: Vec<f64>,
    h_hat: Vec<f64>,
    g_s: Vec<f64>,
    omega_max: Vec<f64>,
    p_tot: f64,
    lambda: Vec<f64>,
}

impl DegradedProblem {
    pub fn new(instance: ChannelInstance, mode: DegradedMode) -> Result<Self> {
        if let Some(relay) = instance.first_non_degraded_relay() {
            return Err(Error::DegradednessViolated { relay });
        }
        let rho: Vec<f64> = instance
            .h_e()
            .iter()
            .zip(instance.h_t())
            .map(|(e, t)| e / t)
            .collect();
        let h_hat = instance.h_s().iter().zip(&rho).map(|(s, r)| s * r).collect();
        let root_gamma = instance.gamma_s().sqrt();
        let g_s = instance.h_s().iter().map(|h| root_gamma * h).collect();
        Ok(DegradedProblem {
            omega_max: omega_max_bounds(&instance),
            p_tot: instance.total_power(),
            lambda: instance.relay_input_power(),
            instance,
            mode,
            rho,
            h_hat,
            g_s,
        })
    }

    pub fn instance(&self) -> &ChannelInstance {
        &self.instance
    }

    pub fn mode(&self) -> DegradedMode {
        self.mode
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn h_hat(&self) -> &[f64] {
        &self.h_hat
    }

    pub fn g_s(&self) -> &[f64] {
        &self.g_s
    }

    pub fn omega_max(&self) -> &[f64] {
        &self.omega_max
    }

    pub fn total_power(&self) -> f64 {
        self.p_tot
    }

    fn relays(&self) -> usize {
        self.rho.len()
    }
}

pub fn build_ce(problem: &DegradedProblem, eta: f64) -> Result<DMatrix<f64>> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidEta(eta));
    }
    let m = problem.relays();
    let scale = problem.instance.gamma_s() / eta;
    let h = &problem.h_hat;
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let rank_one = scale * h[i] * h[j];
        if i == j {
            rank_one + 1.0 - problem.rho[i] * problem.rho[i]
        } else {
            rank_one
        }
    }))
}

pub fn build_individual_constraints(problem: &DegradedProblem) -> Vec<DMatrix<f64>> {
    let m = problem.relays();
    problem
        .omega_max
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut d = DMatrix::identity(m, m);
            d[(i, i)] = 1.0 + 1.0 / (w * w);
            d
        })
        .collect()
}

pub fn build_total_constraint(problem: &DegradedProblem) -> DMatrix<f64> {
    let zeta: Vec<f64> = problem
        .lambda
        .iter()
        .zip(problem.instance.h_t())
        .map(|(l, h)| 1.0 + l / (h * h * problem.p_tot))
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(zeta))
}

/// Largest eavesdropper SNR reachable under the total power budget,
/// `γ_s h_seᵗ(Λ/P_tot + diag(h_e²))⁻¹ h_se`.
pub fn eta_max(problem: &DegradedProblem) -> f64 {
    let inst = &problem.instance;
    let acc: f64 = inst
        .h_s()
        .iter()
        .zip(inst.h_e())
        .zip(&problem.lambda)
        .map(|((s, e), l)| {
            let hse = s * e;
            hse * hse / (l / problem.p_tot + e * e)
        })
        .sum();
    inst.gamma_s() * acc
}

fn power_constraints(problem: &DegradedProblem) -> Vec<DMatrix<f64>> {
    match problem.mode {
        DegradedMode::Individual => build_individual_constraints(problem),
        DegradedMode::Total => vec![build_total_constraint(problem)],
    }
}

/// `max g_sᵗv` s.t. `vᵗC_e(η)v ≤ 1` and the mode's power constraints.
pub fn solve_inner(problem: &DegradedProblem, eta: f64, cfg: &SolverConfig) -> Result<BarrierSolution> {
    let mut mats = vec![build_ce(problem, eta)?];
    mats.extend(power_constraints(problem));
    let set = EllipsoidSet::new(mats)?;
    maximize_linear_over_ellipsoids(&problem.g_s, &set, cfg)
}

/// The η = 0 slice, where the eavesdropper is nulled exactly.
struct Endpoint {
    v: Vec<f64>,
    objective: f64,
    beta: Option<ScalingVector>,
}

fn endpoint(problem: &DegradedProblem, cfg: &SolverConfig) -> Result<Endpoint> {
    match problem.mode {
        DegradedMode::Individual => {
            let report = solve_zero_forcing(&problem.instance, cfg)?;
            let objective = report.snr_d.sqrt();
            Ok(Endpoint {
                v: Vec::new(),
                objective,
                beta: Some(report.beta_opt),
            })
        }
        DegradedMode::Total => {
            // max g_sᵗv s.t. ĥᵗv = 0, vᵗD_T v ≤ 1: project in the D_T metric.
            let d = build_total_constraint(problem);
            let a: Vec<f64> = (0..problem.relays())
                .map(|i| problem.g_s[i] / d[(i, i)].sqrt())
                .collect();
            let b: Vec<f64> = (0..problem.relays())
                .map(|i| problem.h_hat[i] / d[(i, i)].sqrt())
                .collect();
            let bb = dot(&b, &b);
            let coef = if bb > 0.0 { dot(&a, &b) / bb } else { 0.0 };
            let proj: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - coef * y).collect();
            let norm = dot(&proj, &proj).sqrt();
            // Relative cancellation noise means the projection is really zero.
            if norm <= 1e-12 * dot(&a, &a).sqrt() {
                return Ok(Endpoint {
                    v: vec![0.0; problem.relays()],
                    objective: 0.0,
                    beta: None,
                });
            }
            let v = (0..problem.relays())
                .map(|i| proj[i] / norm / d[(i, i)].sqrt())
                .collect();
            Ok(Endpoint {
                v,
                objective: norm,
                beta: None,
            })
        }
    }
}

/// Secrecy objective `(1 + p²)/(1 + η)`, whose `½log₂` is the rate bound at η.
pub fn objective(inner: f64, eta: f64) -> f64 {
    (1.0 + inner * inner) / (1.0 + eta)
}

/// Golden-section search over `η ∈ [0, η_max]`.
pub fn solve_degraded(problem: &DegradedProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    cfg.validate()?;
    let method = problem.mode.method();
    let eta_hi = eta_max(problem);
    let end = endpoint(problem, cfg)?;
    let f0 = objective(end.objective, 0.0);

    let mut diagnostics = Diagnostics {
        eta_max: Some(eta_hi),
        ..Diagnostics::default()
    };

    let end_beta = |end: Endpoint| -> Result<ScalingVector> {
        match end.beta {
            Some(b) => Ok(b),
            None => from_transformed(&problem.instance, &end.v),
        }
    };

    if !(eta_hi > MIN_INTERIOR_ETA) {
        diagnostics.eta_star = Some(0.0);
        diagnostics.note = Some("eavesdropper channel is silent".into());
        return Ok(SolveReport::evaluate(&problem.instance, end_beta(end)?, method, diagnostics));
    }

    let mut newton = 0;
    let search = try_golden_section_max(
        |eta| {
            let sol = solve_inner(problem, eta.max(MIN_INTERIOR_ETA), cfg)?;
            newton += sol.newton_iterations;
            Ok(objective(sol.value, eta))
        },
        0.0,
        eta_hi,
        cfg.golden_tol,
    )?;
    diagnostics.iterations = search.evaluations;
    diagnostics.evaluations = search.evaluations + 1;

    if f0 >= search.value {
        diagnostics.newton_iterations = newton;
        diagnostics.eta_star = Some(0.0);
        return Ok(SolveReport::evaluate(&problem.instance, end_beta(end)?, method, diagnostics));
    }

    let eta_star = search.x.max(MIN_INTERIOR_ETA);
    let sol = solve_inner(problem, eta_star, cfg)?;
    newton += sol.newton_iterations;
    diagnostics.newton_iterations = newton;
    diagnostics.eta_star = Some(eta_star);
    diagnostics.kkt_residual = Some(sol.kkt_residual);
    diagnostics.feasibility_residual = Some(sol.max_violation.max(0.0));
    let beta = from_transformed(&problem.instance, &sol.v)?;
    Ok(SolveReport::evaluate(&problem.instance, beta, method, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single() -> ChannelInstance {
        ChannelInstance::new(vec![1.0], vec![2.0], vec![1.0], 1.0, vec![5.0], 1.0).unwrap()
    }

    fn instance_a() -> ChannelInstance {
        ChannelInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![0.5, 1.0],
            1.0,
            vec![5.0, 5.0],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn ce_entry() {
        let p = DegradedProblem::new(single(), DegradedMode::Individual).unwrap();
        let ce = build_ce(&p, 0.25).unwrap();
        assert_relative_eq!(ce[(0, 0)], 1.75, epsilon = 1e-15);
        assert!(matches!(build_ce(&p, 0.0), Err(Error::InvalidEta(_))));
        assert!(matches!(build_ce(&p, -1.0), Err(Error::InvalidEta(_))));
    }

    #[test]
    fn constraint_matrices() {
        let inst = ChannelInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            vec![0.5, 0.5],
            1.0,
            vec![5.0, 5.0],
            1.0,
        )
        .unwrap();
        let p = DegradedProblem::new(inst, DegradedMode::Individual).unwrap();
        // ω_max² = 5/2 → 1 + 1/2.5.
        let d = build_individual_constraints(&p);
        assert_relative_eq!(d[0][(0, 0)], 1.4, epsilon = 1e-15);
        assert_eq!(d[0][(1, 1)], 1.0);
        assert_eq!(d[0][(0, 1)], 0.0);

        let pa = DegradedProblem::new(instance_a(), DegradedMode::Total).unwrap();
        let dt = build_total_constraint(&pa);
        assert_relative_eq!(dt[(0, 0)], 1.2, epsilon = 1e-15);
        assert_relative_eq!(dt[(1, 1)], 1.05, epsilon = 1e-15);
    }

    #[test]
    fn eta_max_values() {
        let inst = ChannelInstance::new(vec![1.0], vec![2.0], vec![1.0], 1.0, vec![1.0], 1.0).unwrap();
        let p = DegradedProblem::new(inst, DegradedMode::Total).unwrap();
        assert_relative_eq!(eta_max(&p), 1.0 / 3.0, epsilon = 1e-15);
        let pa = DegradedProblem::new(instance_a(), DegradedMode::Total).unwrap();
        assert_relative_eq!(eta_max(&pa), 1.388_888_888_888_889, epsilon = 1e-12);
    }

    #[test]
    fn inner_with_box_binding() {
        // ω_max² = 10 with a huge η so only D₁ binds: v² = 1/(1 + 1/10).
        let inst = ChannelInstance::new(vec![1.0], vec![2.0], vec![1.0], 1.0, vec![5.0], 1.0).unwrap();
        let p = DegradedProblem::new(inst, DegradedMode::Individual).unwrap();
        assert_relative_eq!(p.omega_max()[0].powi(2), 10.0, epsilon = 1e-12);
        let sol = solve_inner(&p, 1e6, &SolverConfig::default()).unwrap();
        assert_relative_eq!(sol.v[0], (10.0f64 / 11.0).sqrt(), epsilon = 1e-8);
        assert_relative_eq!(sol.value, (10.0f64 / 11.0).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn single_relay_example() {
        let p = DegradedProblem::new(single(), DegradedMode::Individual).unwrap();
        let r = solve_degraded(&p, &SolverConfig::default()).unwrap();
        assert_relative_eq!(r.beta_opt[0], 0.594_603_557, epsilon = 1e-5);
        assert_relative_eq!(r.rate_bits, 0.165_198_492_276, epsilon = 1e-6);
        assert_relative_eq!(r.snr_d, 0.585_786, epsilon = 1e-4);
        assert_relative_eq!(r.snr_e, 0.261_204, epsilon = 1e-4);
    }

    #[test]
    fn instance_a_rate() {
        let p = DegradedProblem::new(instance_a(), DegradedMode::Individual).unwrap();
        let r = solve_degraded(&p, &SolverConfig::default()).unwrap();
        assert_relative_eq!(r.rate_bits, 0.258_401_240_265, epsilon = 1e-6);
    }

    #[test]
    fn rejects_non_degraded() {
        let inst = ChannelInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![0.5, 2.0],
            1.0,
            vec![5.0, 5.0],
            1.0,
        )
        .unwrap();
        assert_eq!(
            DegradedProblem::new(inst, DegradedMode::Individual).unwrap_err(),
            Error::DegradednessViolated { relay: 1 }
        );
    }

    #[test]
    fn silent_eavesdropper_skips_search() {
        let inst = ChannelInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            1.0,
            vec![5.0, 5.0],
            1.0,
        )
        .unwrap();
        for mode in [DegradedMode::Individual, DegradedMode::Total] {
            let p = DegradedProblem::new(inst.clone(), mode).unwrap();
            let r = solve_degraded(&p, &SolverConfig::default()).unwrap();
            assert_eq!(r.diagnostics.eta_star, Some(0.0));
            assert_eq!(r.snr_e, 0.0);
            assert!(r.rate_bits > 0.0);
        }
    }
}
