//! Exact optimum for scaled eavesdropper channels, `h_e = α·h_t` with `0 < α < 1`.
//!
//! With `g_i = √γ_s·h_si`, `r = ‖ω‖` and `Ψ = (gᵗω)²` the secrecy rate is
//!
//! ```text
//! R(ω) = ½log₂((1 + Ψ/(1+r²)) / (1 + α²Ψ/(1+α²r²)))
//! ```
//!
//! which grows with Ψ at fixed r, so the best ω for a given radius points along `g`.
//! Without power limits the optimal radius is `r*² = 1/(α√(1+‖g‖²))`. If `g/‖g‖·r*`
//! violates the box, relays are sorted by `|g_i|/ω_max,i` and, for each `m`, the first
//! `m` are saturated while the rest follow `λ_m·g`; `λ_m` is the positive root of a
//! quartic. Every admissible candidate and the all-saturated point are scored.

use crate::convex::{positive_quartic_root, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{
    dot, omega_max_bounds, ChannelInstance, Diagnostics, Method, ScalingVector, SolveReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledProblem {
    instance: ChannelInstance,
    alpha: f64,
    g_s: Vec<f64>,
    omega_max: Vec<f64>,
    /// Relay indices sorted by `|g_i|/ω_max,i` descending, ties by index.
    order: Vec<usize>,
    /// Prefix tables indexed by `m = 0..=M`.
    p: Vec<f64>,
    q: Vec<f64>,
    s: Vec<f64>,
}

impl ScaledProblem {
    /// Errors with `NotScaled` when no common ratio exists and `InvalidAlpha` when it
    /// is not positive. `α ≥ 1` is accepted; its optimal rate is zero.
    pub fn new(instance: ChannelInstance) -> Result<Self> {
        let alpha = instance.common_ratio().ok_or(Error::NotScaled)?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        let root_gamma = instance.gamma_s().sqrt();
        let g_s: Vec<f64> = instance.h_s().iter().map(|h| root_gamma * h).collect();
        let omega_max = omega_max_bounds(&instance);
        let m = g_s.len();

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            let ra = g_s[a].abs() / omega_max[a];
            let rb = g_s[b].abs() / omega_max[b];
            rb.total_cmp(&ra).then(a.cmp(&b))
        });

        let mut p = vec![0.0; m + 1];
        let mut q = vec![0.0; m + 1];
        let mut s = vec![0.0; m + 1];
        for k in 0..m {
            let i = order[k];
            p[k + 1] = p[k] + g_s[i].abs() * omega_max[i];
            q[k + 1] = q[k] + omega_max[i] * omega_max[i];
        }
        for k in (0..m).rev() {
            let i = order[k];
            s[k] = s[k + 1] + g_s[i] * g_s[i];
        }

        Ok(ScaledProblem {
            instance,
            alpha,
            g_s,
            omega_max,
            order,
            p,
            q,
            s,
        })
    }

    pub fn instance(&self) -> &ChannelInstance {
        &self.instance
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn g_s(&self) -> &[f64] {
        &self.g_s
    }

    pub fn omega_max(&self) -> &[f64] {
        &self.omega_max
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `(p_m, q_m, s_m)`.
    pub fn prefix(&self, m: usize) -> (f64, f64, f64) {
        (self.p[m], self.q[m], self.s[m])
    }

    /// Secrecy rate in bits as a function of `‖ω‖` and `Ψ = (gᵗω)²`.
    pub fn rate_at(&self, radius: f64, psi: f64) -> f64 {
        rate_from_radius(self.alpha, radius, psi)
    }

    /// Rate of an ω-vector through `rate_at`.
    pub fn rate_of(&self, omega: &[f64]) -> f64 {
        let r = dot(omega, omega).sqrt();
        let gw = dot(&self.g_s, omega);
        self.rate_at(r, gw * gw)
    }

    fn relays(&self) -> usize {
        self.g_s.len()
    }
}

/// `½log₂((1 + ϱ₁Ψ)/(1 + ϱ₂Ψ))` with `ϱ₁ = 1/(1+r²)`, `ϱ₂ = α²/(1+α²r²)`, clamped at 0.
pub fn rate_from_radius(alpha: f64, radius: f64, psi: f64) -> f64 {
    let r2 = radius * radius;
    let a2 = alpha * alpha;
    let rho1 = 1.0 / (1.0 + r2);
    let rho2 = a2 / (1.0 + a2 * r2);
    (0.5 * ((1.0 + rho1 * psi) / (1.0 + rho2 * psi)).log2()).max(0.0)
}

pub fn unconstrained_radius(problem: &ScaledProblem) -> Result<f64> {
    let alpha = problem.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let g2 = dot(&problem.g_s, &problem.g_s);
    Ok(1.0 / (alpha * (1.0 + g2).sqrt()).sqrt())
}

/// `r_1, …, r_M`: the radius at which relay `(m)` saturates.
pub fn interval_radii(problem: &ScaledProblem) -> Vec<f64> {
    let m_total = problem.relays();
    (1..=m_total)
        .map(|m| {
            let i = problem.order[m - 1];
            let g = problem.g_s[i];
            let tail = if m < m_total && g != 0.0 {
                problem.s[m] / (g * g) * problem.omega_max[i].powi(2)
            } else {
                0.0
            };
            (tail + problem.q[m]).sqrt()
        })
        .collect()
}

/// Quartic coefficients `[c0, c1, c2, c3]` for `λ_m` with `s > 0`.
pub fn quartic_coefficients(alpha: f64, p: f64, q: f64, s: f64) -> [f64; 4] {
    let a2 = alpha * alpha;
    let denom = s * s * a2 * (1.0 + s);
    [
        (1.0 + q) * (1.0 + a2 * q) / denom,
        p * (p * p * a2 + 2.0 * q * a2 + a2 + 1.0) / denom,
        3.0 * p * p / (s * (1.0 + s)),
        p * (2.0 + 3.0 * s) / (s * (1.0 + s)),
    ]
}

/// Candidate with relays `(1)…(m)` saturated and the rest along `λ_m·g`, in original
/// relay order. `None` if `λ_m` leaves the interval.
pub fn interval_candidate(problem: &ScaledProblem, m: usize, cfg: &SolverConfig) -> Result<Option<Vec<f64>>> {
    let m_total = problem.relays();
    if m == 0 || m >= m_total {
        return Err(Error::InvalidConfig(format!("interval index {m} outside 1..{m_total}")));
    }
    let mut omega = vec![0.0; m_total];
    for &i in &problem.order[..m] {
        omega[i] = problem.g_s[i].signum() * problem.omega_max[i];
    }
    let (p, q, s) = problem.prefix(m);
    if s == 0.0 {
        return Ok(Some(omega));
    }
    let lambda = positive_quartic_root(quartic_coefficients(problem.alpha, p, q, s), cfg.root_tol)?;
    let next = problem.order[m];
    if lambda >= problem.omega_max[next] / problem.g_s[next].abs() {
        return Ok(None);
    }
    for &i in &problem.order[m..] {
        omega[i] = lambda * problem.g_s[i];
    }
    Ok(Some(omega))
}

pub fn solve_scaled(problem: &ScaledProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let inst = &problem.instance;
    let m_total = problem.relays();
    let zero = |note: &str| {
        let diagnostics = Diagnostics {
            degenerate: true,
            note: Some(note.into()),
            ..Diagnostics::default()
        };
        SolveReport::evaluate(inst, ScalingVector::zeros(m_total), Method::Scaled, diagnostics)
    };
    if problem.alpha >= 1.0 {
        return Ok(zero("α ≥ 1: the eavesdropper is at least as strong as the destination"));
    }
    let g_norm = dot(&problem.g_s, &problem.g_s).sqrt();
    if g_norm == 0.0 {
        return Ok(zero("source links are silent"));
    }

    let r_star = unconstrained_radius(problem)?;
    let interior: Vec<f64> = problem.g_s.iter().map(|g| g / g_norm * r_star).collect();
    let fits = interior
        .iter()
        .zip(&problem.omega_max)
        .all(|(w, wmax)| w.abs() <= *wmax);
    if fits {
        let diagnostics = Diagnostics {
            evaluations: 1,
            note: Some("unconstrained radius fits the power box".into()),
            ..Diagnostics::default()
        };
        return Ok(report(problem, &interior, diagnostics));
    }

    let mut best: Option<(f64, Vec<f64>, String)> = None;
    let mut evaluations = 0;
    let mut consider = |omega: Vec<f64>, label: String| {
        evaluations += 1;
        let rate = problem.rate_of(&omega);
        if best.as_ref().is_none_or(|(b, _, _)| rate > *b) {
            best = Some((rate, omega, label));
        }
    };
    for m in 1..m_total {
        if let Some(omega) = interval_candidate(problem, m, cfg)? {
            consider(omega, format!("{m} relay(s) saturated"));
        }
    }
    let saturated: Vec<f64> = (0..m_total)
        .map(|i| {
            let sign = if problem.g_s[i] < 0.0 { -1.0 } else { 1.0 };
            sign * problem.omega_max[i]
        })
        .collect();
    consider(saturated, "all relays saturated".into());

    let (_, omega, label) = best.expect("the saturated candidate is always scored");
    let diagnostics = Diagnostics {
        evaluations,
        iterations: evaluations,
        note: Some(label),
        ..Diagnostics::default()
    };
    Ok(report(problem, &omega, diagnostics))
}

fn report(problem: &ScaledProblem, omega: &[f64], diagnostics: Diagnostics) -> SolveReport {
    let beta: Vec<f64> = omega
        .iter()
        .zip(problem.instance.h_t())
        .map(|(w, h)| w / h)
        .collect();
    SolveReport::evaluate(&problem.instance, ScalingVector(beta), Method::Scaled, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn instance_a(h_e: [f64; 2]) -> ChannelInstance {
        ChannelInstance::new(
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            h_e.to_vec(),
            1.0,
            vec![5.0, 5.0],
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn radius_examples() {
        let p = ScaledProblem::new(instance_a([0.5, 1.0])).unwrap();
        assert_relative_eq!(unconstrained_radius(&p).unwrap(), 1.074_569_931_823_542, epsilon = 1e-12);
        let radii = interval_radii(&p);
        assert_eq!(p.order(), &[0, 1]);
        assert_relative_eq!(radii[0], 5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(radii[1], 12.5f64.sqrt(), epsilon = 1e-12);

        let three = ChannelInstance::new(
            vec![1.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![0.5, 0.5, 0.5],
            1.0,
            vec![1.0, 1.0, 1.0],
            1.0,
        )
        .unwrap();
        let p3 = ScaledProblem::new(three).unwrap();
        assert_relative_eq!(unconstrained_radius(&p3).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_relay_radius() {
        let inst = ChannelInstance::new(vec![1.0], vec![2.0], vec![1.0], 1.0, vec![5.0], 1.0).unwrap();
        let p = ScaledProblem::new(inst).unwrap();
        assert_relative_eq!(interval_radii(&p)[0], p.omega_max()[0], epsilon = 1e-15);
    }

    #[test]
    fn interior_path() {
        let p = ScaledProblem::new(instance_a([0.5, 1.0])).unwrap();
        let r = solve_scaled(&p, &SolverConfig::default()).unwrap();
        let omega: Vec<f64> = r.beta_opt.iter().zip([1.0, 2.0]).map(|(b, h)| b * h).collect();
        assert_relative_eq!(omega[0], 0.759_835_685_651_592_6, epsilon = 1e-9);
        assert_relative_eq!(omega[1], omega[0], epsilon = 1e-12);
        assert_relative_eq!(r.rate_bits, 0.258_401_240_265, epsilon = 1e-9);
        assert_relative_eq!(r.snr_d, 1.071_796_8, epsilon = 1e-6);
        assert_relative_eq!(r.snr_e, 0.448_018_5, epsilon = 1e-6);
    }

    #[test]
    fn saturation_path() {
        let p = ScaledProblem::new(instance_a([0.1, 0.2])).unwrap();
        let c = quartic_coefficients(p.alpha(), p.prefix(1).0, p.prefix(1).1, p.prefix(1).2);
        assert_relative_eq!(c[0], 179.375, epsilon = 1e-9);
        assert_relative_eq!(c[1], 85.774, epsilon = 5e-3);
        assert_relative_eq!(c[2], 3.75, epsilon = 1e-12);
        assert_relative_eq!(c[3], 3.9528, epsilon = 1e-4);
        let cand = interval_candidate(&p, 1, &SolverConfig::default()).unwrap().unwrap();
        assert_relative_eq!(cand[0], 2.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(cand[1], 1.666_538_192, epsilon = 1e-8);
        let r = solve_scaled(&p, &SolverConfig::default()).unwrap();
        assert_relative_eq!(r.rate_bits, 0.642_304_765_791, epsilon = 1e-9);
    }

    #[test]
    fn alpha_at_least_one_is_zero() {
        let p = ScaledProblem::new(instance_a([1.0, 2.0])).unwrap();
        let r = solve_scaled(&p, &SolverConfig::default()).unwrap();
        assert_eq!(r.rate_bits, 0.0);
        assert_eq!(r.beta_opt.0, vec![0.0, 0.0]);
        assert!(matches!(unconstrained_radius(&p), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn rejects_unscaled_and_nonpositive_alpha() {
        assert_eq!(ScaledProblem::new(instance_a([0.5, 0.5])).unwrap_err(), Error::NotScaled);
        assert!(matches!(
            ScaledProblem::new(instance_a([-0.5, -1.0])),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn zero_tail_gain() {
        let inst = ChannelInstance::new(
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.1, 0.1],
            10.0,
            vec![0.1, 0.1],
            1.0,
        )
        .unwrap();
        let p = ScaledProblem::new(inst).unwrap();
        let cand = interval_candidate(&p, 1, &SolverConfig::default()).unwrap().unwrap();
        assert_eq!(cand[1], 0.0);
        assert_relative_eq!(cand[0], p.omega_max()[0], epsilon = 1e-15);
    }
}
