use nalgebra::{DMatrix, DVector};

use super::{EllipsoidSet, SolverConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSolution {
    pub v: Vec<f64>,
    pub value: f64,
    /// KKT multipliers for `c = Σ 2λ_j A_j v`.
    pub multipliers: Vec<f64>,
    pub newton_iterations: usize,
    pub centering_steps: usize,
    /// `‖c − Σ 2λ_j A_j v‖∞`.
    pub kkt_residual: f64,
    /// `max_j |λ_j (vᵗA_j v − 1)|`.
    pub complementarity: f64,
    /// `max_j (vᵗA_j v − 1)`, negative when strictly feasible.
    pub max_violation: f64,
}

/// Maximizes `cᵗv` subject to `vᵗA_j v ≤ 1` for every `A_j` in `constraints`.
///
/// Path-following log barrier started from the interior point `v = 0`. Each centering
/// step minimizes `−t ĉᵗv − Σ log(1 − vᵗA_j v)` by damped Newton, with `ĉ = c/‖c‖`,
/// and `t` grows by `barrier_mu` until the duality gap `m/t` drops below `gap_tol`.
pub fn maximize_linear_over_ellipsoids(
    c: &[f64],
    constraints: &EllipsoidSet,
    cfg: &SolverConfig,
) -> Result<BarrierSolution> {
    let n = constraints.dim();
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConstraints("objective is not finite".into()));
    }
    let m = constraints.len();
    let c_norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if c_norm == 0.0 {
        return Ok(BarrierSolution {
            v: vec![0.0; n],
            value: 0.0,
            multipliers: vec![0.0; m],
            newton_iterations: 0,
            centering_steps: 0,
            kkt_residual: 0.0,
            complementarity: 0.0,
            max_violation: -1.0,
        });
    }
    if !constraints.is_bounded() {
        return Err(Error::Unbounded);
    }

    let dir = DVector::from_iterator(n, c.iter().map(|x| x / c_norm));
    let mats = constraints.matrices();
    let mut v = DVector::zeros(n);
    let mut t = cfg.barrier_t0;
    let mut newton_total = 0;
    let mut centering = 0;

    loop {
        centering += 1;
        newton_total += center(&mut v, &dir, mats, t, cfg)?;
        if m as f64 / t <= cfg.gap_tol {
            break;
        }
        t *= cfg.barrier_mu;
    }

    let mut vs: Vec<f64> = v.iter().copied().collect();
    // Same slack arithmetic as the centering step, so the multipliers match its gradient.
    let state = slacks(&v, mats);
    let forms: Vec<f64> = state.iter().map(|(_, s)| 1.0 - s).collect();
    let normals: Vec<DVector<f64>> = state.iter().map(|(av, _)| av * 2.0).collect();
    let c_vec = DVector::from_column_slice(c);

    let central: Vec<f64> = state.iter().map(|(_, s)| c_norm / (t * s)).collect();
    let mut multipliers = central.clone();
    let mut kkt_residual = stationarity_residual(&c_vec, &normals, &central);
    let mut complementarity = complementarity_of(&forms, &central);
    if let Some((refined, r, comp)) = refit_multipliers(&c_vec, &normals, &state, &forms) {
        if r.max(comp) < kkt_residual.max(complementarity) {
            multipliers = refined;
            kkt_residual = r;
            complementarity = comp;
        }
    }
    let mut max_violation = forms.iter().map(|s| s - 1.0).fold(f64::MIN, f64::max);

    if kkt_residual.max(complementarity) > POLISH_TRIGGER * cfg.kkt_tol {
        if let Some(p) = polish(&c_vec, mats, &v, &state, cfg.feasibility_tol) {
            if p.residual.max(p.complementarity) < kkt_residual.max(complementarity) {
                vs = p.v.iter().copied().collect();
                multipliers = p.multipliers;
                kkt_residual = p.residual;
                complementarity = p.complementarity;
                max_violation = p.max_violation;
            }
        }
    }

    if kkt_residual > cfg.kkt_tol || complementarity > cfg.kkt_tol {
        return Err(Error::NoConvergence {
            iterations: newton_total,
            residual: kkt_residual.max(complementarity),
        });
    }

    Ok(BarrierSolution {
        value: c.iter().zip(&vs).map(|(a, b)| a * b).sum(),
        v: vs,
        multipliers,
        newton_iterations: newton_total,
        centering_steps: centering,
        kkt_residual,
        complementarity,
        max_violation,
    })
}

fn stationarity_residual(c: &DVector<f64>, normals: &[DVector<f64>], lambda: &[f64]) -> f64 {
    let mut r = c.clone();
    for (n, l) in normals.iter().zip(lambda) {
        r -= n * *l;
    }
    r.amax()
}

fn complementarity_of(forms: &[f64], lambda: &[f64]) -> f64 {
    forms
        .iter()
        .zip(lambda)
        .map(|(s, l)| (l * (s - 1.0)).abs())
        .fold(0.0, f64::max)
}

/// Slack below which a constraint may carry a multiplier in the refit.
const NEAR_ACTIVE_SLACK: f64 = 1e-3;
/// Subsets of near-active constraints are enumerated up to this many candidates.
const MAX_REFIT_CANDIDATES: usize = 10;

/// Nonnegative least-squares multipliers over the near-active constraints, found by
/// enumerating supports. The central-path estimate `1/(t·slack)` inherits the rounding
/// error of tiny slacks; this fit only depends on `v`. Returns the multipliers with
/// their stationarity residual and complementarity.
fn refit_multipliers(
    c: &DVector<f64>,
    normals: &[DVector<f64>],
    state: &[(DVector<f64>, f64)],
    forms: &[f64],
) -> Option<(Vec<f64>, f64, f64)> {
    let mut near: Vec<usize> = (0..state.len()).filter(|&j| state[j].1 <= NEAR_ACTIVE_SLACK).collect();
    if near.is_empty() {
        return None;
    }
    near.sort_by(|&a, &b| state[a].1.total_cmp(&state[b].1));
    near.truncate(MAX_REFIT_CANDIDATES);
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for mask in 1u32..(1 << near.len()) {
        let support: Vec<usize> = (0..near.len()).filter(|k| mask & (1 << k) != 0).map(|k| near[k]).collect();
        let cols: Vec<DVector<f64>> = support.iter().map(|&j| normals[j].clone()).collect();
        let Ok(fit) = DMatrix::from_columns(&cols).svd(true, true).solve(c, 1e-14) else {
            continue;
        };
        if fit.iter().any(|l| *l < 0.0 || !l.is_finite()) {
            continue;
        }
        let mut lambda = vec![0.0; state.len()];
        for (k, &j) in support.iter().enumerate() {
            lambda[j] = fit[k];
        }
        let r = stationarity_residual(c, normals, &lambda);
        let comp = complementarity_of(forms, &lambda);
        if best.as_ref().is_none_or(|(_, br, bc)| r.max(comp) < br.max(*bc)) {
            best = Some((lambda, r, comp));
        }
    }
    best
}

/// Fraction of `kkt_tol` above which the active-set polish is attempted.
const POLISH_TRIGGER: f64 = 0.1;
const POLISH_ITERS: usize = 30;

struct Polished {
    v: DVector<f64>,
    multipliers: Vec<f64>,
    residual: f64,
    complementarity: f64,
    max_violation: f64,
}

/// Newton's method on the KKT equations `c = Σ 2λ_j A_j v`, `vᵗA_j v = 1` over each
/// subset of the near-active constraints, started from the barrier point.
///
/// Near a degenerate optimum (a constraint active with zero multiplier) the central
/// path approaches the solution only like `√gap`, which the multiplier refit alone
/// cannot absorb. The best polished point that stays feasible and keeps `λ ≥ 0` wins.
fn polish(
    c: &DVector<f64>,
    mats: &[DMatrix<f64>],
    v0: &DVector<f64>,
    state: &[(DVector<f64>, f64)],
    feasibility_tol: f64,
) -> Option<Polished> {
    let n = v0.len();
    let mut near: Vec<usize> = (0..state.len()).filter(|&j| state[j].1 <= NEAR_ACTIVE_SLACK).collect();
    near.sort_by(|&a, &b| state[a].1.total_cmp(&state[b].1));
    near.truncate(MAX_REFIT_CANDIDATES.min(n));
    let mut best: Option<Polished> = None;
    for mask in 1u32..(1 << near.len()) {
        let support: Vec<usize> = (0..near.len()).filter(|k| mask & (1 << k) != 0).map(|k| near[k]).collect();
        let k = support.len();
        let mut v = v0.clone();
        let cols: Vec<DVector<f64>> = support.iter().map(|&j| &mats[j] * &v * 2.0).collect();
        let Ok(fit) = DMatrix::from_columns(&cols).svd(true, true).solve(c, 1e-14) else {
            continue;
        };
        let mut lambda: Vec<f64> = fit.iter().copied().collect();
        for _ in 0..POLISH_ITERS {
            let mut jac = DMatrix::<f64>::zeros(n + k, n + k);
            let mut f = DVector::<f64>::zeros(n + k);
            let mut stat = c.clone();
            for (q, &j) in support.iter().enumerate() {
                let av = &mats[j] * &v;
                stat -= &av * (2.0 * lambda[q]);
                let block = &mats[j] * (-2.0 * lambda[q]);
                let mut top = jac.view_mut((0, 0), (n, n));
                top += block;
                for i in 0..n {
                    jac[(i, n + q)] = -2.0 * av[i];
                    jac[(n + q, i)] = 2.0 * av[i];
                }
                f[n + q] = v.dot(&av) - 1.0;
            }
            f.rows_mut(0, n).copy_from(&stat);
            if f.amax() <= 1e-15 * c.amax().max(1.0) {
                break;
            }
            let Some(step) = jac.lu().solve(&(-&f)) else { break };
            v += step.rows(0, n);
            for q in 0..k {
                lambda[q] += step[n + q];
            }
        }
        if lambda.iter().any(|l| !(l.is_finite() && *l >= -1e-12)) || v.iter().any(|x| !x.is_finite()) {
            continue;
        }
        let mut full = vec![0.0; mats.len()];
        for (q, &j) in support.iter().enumerate() {
            full[j] = lambda[q].max(0.0);
        }
        let polished_state = slacks(&v, mats);
        let forms: Vec<f64> = polished_state.iter().map(|(_, s)| 1.0 - s).collect();
        let max_violation = forms.iter().map(|s| s - 1.0).fold(f64::MIN, f64::max);
        if max_violation > feasibility_tol {
            continue;
        }
        let normals: Vec<DVector<f64>> = polished_state.iter().map(|(av, _)| av * 2.0).collect();
        let residual = stationarity_residual(c, &normals, &full);
        let complementarity = complementarity_of(&forms, &full);
        if best
            .as_ref()
            .is_none_or(|b| residual.max(complementarity) < b.residual.max(b.complementarity))
        {
            best = Some(Polished {
                v,
                multipliers: full,
                residual,
                complementarity,
                max_violation,
            });
        }
    }
    best
}

/// Newton decrement² / 2 below which a centering step is done.
const NEWTON_EPS: f64 = 1e-13;
/// Once the decrement is this small and stops shrinking, rounding has taken over.
const NEWTON_STALL_EPS: f64 = 1e-7;
/// Decrement² below which the pure Newton step is taken (quadratic convergence region).
const PURE_NEWTON: f64 = 1e-2;

fn slacks(v: &DVector<f64>, mats: &[DMatrix<f64>]) -> Vec<(DVector<f64>, f64)> {
    mats.iter()
        .map(|a| {
            let av = a * v;
            let slack = 1.0 - v.dot(&av);
            (av, slack)
        })
        .collect()
}

fn center(
    v: &mut DVector<f64>,
    dir: &DVector<f64>,
    mats: &[DMatrix<f64>],
    t: f64,
    cfg: &SolverConfig,
) -> Result<usize> {
    let n = v.len();
    let mut prev = f64::INFINITY;
    for iter in 0..cfg.max_newton_iters {
        let mut grad = dir * (-t);
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for (a, (av, slack)) in mats.iter().zip(slacks(v, mats)) {
            grad += &av * (2.0 / slack);
            hess += a * (2.0 / slack);
            hess.ger(4.0 / (slack * slack), &av, &av, 1.0);
        }
        let step = solve_spd(hess, &grad);
        let decrement_sq = -grad.dot(&step);
        if decrement_sq / 2.0 <= NEWTON_EPS
            || (decrement_sq / 2.0 <= NEWTON_STALL_EPS && decrement_sq > 0.25 * prev)
        {
            return Ok(iter + 1);
        }
        prev = decrement_sq;

        let slope = grad.dot(&step);
        let phi0 = if decrement_sq < PURE_NEWTON {
            None
        } else {
            Some(barrier_value(v, dir, mats, t).expect("iterate is strictly feasible"))
        };
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-20 {
            let trial = &*v + &step * s;
            if let Some(phi) = barrier_value(&trial, dir, mats, t) {
                if phi0.is_none_or(|p0| phi <= p0 + 0.25 * s * slope) {
                    *v = trial;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            if decrement_sq / 2.0 <= NEWTON_STALL_EPS {
                return Ok(iter + 1);
            }
            return Err(Error::NoConvergence {
                iterations: iter + 1,
                residual: decrement_sq,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_newton_iters,
        residual: f64::NAN,
    })
}

fn barrier_value(v: &DVector<f64>, dir: &DVector<f64>, mats: &[DMatrix<f64>], t: f64) -> Option<f64> {
    let mut acc = -t * dir.dot(v);
    for a in mats {
        let slack = 1.0 - v.dot(&(a * v));
        if !(slack > 0.0) {
            return None;
        }
        acc -= slack.ln();
    }
    Some(acc)
}

/// Solves `H x = −g` for symmetric positive definite `H`, with a small ridge as a
/// fallback when rounding breaks the factorization.
fn solve_spd(hess: DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let rhs = -grad;
    let scale = hess.amax().max(1.0);
    let mut ridge = 0.0;
    loop {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += ridge;
        }
        if let Some(chol) = h.cholesky() {
            return chol.solve(&rhs);
        }
        ridge = if ridge == 0.0 { 1e-14 * scale } else { ridge * 10.0 };
    }
}
