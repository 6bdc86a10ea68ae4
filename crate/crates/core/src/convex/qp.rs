use nalgebra::{DMatrix, DVector};

use super::SolverConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub w: Vec<f64>,
    /// Multipliers of `½wᵗw`, one per row of `H`; zero for redundant rows.
    pub eq_multipliers: Vec<f64>,
    /// Nonnegative multipliers, one per row of `G`.
    pub ineq_multipliers: Vec<f64>,
    pub iterations: usize,
    /// `‖w − Hᵗμ + Gᵗν‖∞`.
    pub kkt_residual: f64,
    /// `max(‖Hw − b‖∞, max_j (Gw)_j⁺)`.
    pub feasibility_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Eq(usize),
    Ineq(usize),
}

#[derive(Debug, Clone)]
struct Active {
    row: Row,
    /// Normal in `nᵗw ≥ b` (inequalities) or `nᵗw = b` (equalities) form.
    normal: DVector<f64>,
    rhs: f64,
    /// `+1` if the stored normal matches the input row, `−1` if it was flipped.
    sign: f64,
    u: f64,
}

/// Relative size of `z` below which a new normal counts as dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

/// Minimizes `wᵗw` subject to `H w = b` and `G w ≤ 0`.
///
/// Dual active-set method with identity Hessian. Starting from the unconstrained
/// minimum `w = 0`, violated constraints are added one at a time. Each addition
/// moves along the projection of the new normal onto the complement of the active
/// normals, dropping active inequalities whose multipliers would turn negative.
/// Equalities go first and are never dropped.
pub fn min_norm_qp(
    heq: &DMatrix<f64>,
    beq: &[f64],
    gineq: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<QpSolution> {
    let n = heq.ncols();
    if beq.len() != heq.nrows() {
        return Err(Error::DimensionMismatch {
            expected: heq.nrows(),
            actual: beq.len(),
        });
    }
    if gineq.nrows() > 0 && gineq.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: gineq.ncols(),
        });
    }
    if heq.iter().chain(gineq.iter()).chain(beq).any(|x| !x.is_finite()) {
        return Err(Error::InvalidConstraints("QP data is not finite".into()));
    }

    let cap = 50 * (heq.nrows() + gineq.nrows() + n).max(1);
    let mut w = DVector::zeros(n);
    let mut active: Vec<Active> = Vec::new();
    let mut iterations = 0;

    for i in 0..heq.nrows() {
        let mut normal: DVector<f64> = heq.row(i).transpose();
        let mut rhs = beq[i];
        let mut sign = 1.0;
        // Orient so the constraint starts violated in `nᵗw ≥ b` sense.
        if normal.dot(&w) - rhs > 0.0 {
            normal = -normal;
            rhs = -rhs;
            sign = -1.0;
        }
        let candidate = Active {
            row: Row::Eq(i),
            normal,
            rhs,
            sign,
            u: 0.0,
        };
        add_constraint(&mut w, &mut active, candidate, &mut iterations, cap)?;
    }

    loop {
        let scale = w.norm().max(1.0);
        let mut worst: Option<(usize, f64)> = None;
        for j in 0..gineq.nrows() {
            if active.iter().any(|a| a.row == Row::Ineq(j)) {
                continue;
            }
            let g = gineq.row(j);
            let value = g.transpose().dot(&w);
            let tol = 1e-12 * g.norm() * scale;
            if value > tol && worst.is_none_or(|(_, v)| value > v) {
                worst = Some((j, value));
            }
        }
        let Some((j, _)) = worst else { break };
        let candidate = Active {
            row: Row::Ineq(j),
            normal: -gineq.row(j).transpose(),
            rhs: 0.0,
            sign: -1.0,
            u: 0.0,
        };
        add_constraint(&mut w, &mut active, candidate, &mut iterations, cap)?;
    }

    let mut eq_multipliers = vec![0.0; heq.nrows()];
    let mut ineq_multipliers = vec![0.0; gineq.nrows()];
    let mut stationarity = w.clone();
    for a in &active {
        stationarity -= &a.normal * a.u;
        match a.row {
            Row::Eq(i) => eq_multipliers[i] = a.sign * a.u,
            Row::Ineq(j) => ineq_multipliers[j] = a.u,
        }
    }
    let kkt_residual = stationarity.amax();
    let eq_res = (heq * &w - DVector::from_column_slice(beq)).amax();
    let ineq_res = if gineq.nrows() > 0 {
        (gineq * &w).max().max(0.0)
    } else {
        0.0
    };
    let feasibility_residual = eq_res.max(ineq_res);
    let scale = w.amax().max(1.0);
    if feasibility_residual > cfg.feasibility_tol * scale || kkt_residual > cfg.kkt_tol * scale {
        return Err(Error::NoConvergence {
            iterations,
            residual: feasibility_residual.max(kkt_residual),
        });
    }

    Ok(QpSolution {
        w: w.iter().copied().collect(),
        eq_multipliers,
        ineq_multipliers,
        iterations,
        kkt_residual,
        feasibility_residual,
    })
}

fn add_constraint(
    w: &mut DVector<f64>,
    active: &mut Vec<Active>,
    mut p: Active,
    iterations: &mut usize,
    cap: usize,
) -> Result<()> {
    let is_eq = matches!(p.row, Row::Eq(_));
    loop {
        *iterations += 1;
        if *iterations > cap {
            return Err(Error::NoConvergence {
                iterations: *iterations,
                residual: f64::NAN,
            });
        }
        let slack = p.normal.dot(w) - p.rhs;
        let (z, r) = directions(active, &p.normal);
        let dependent = z.norm() <= DEPENDENCE_TOL * p.normal.norm();

        if is_eq && dependent && slack.abs() <= 1e-12 * (1.0 + p.rhs.abs()) {
            // Redundant equality.
            return Ok(());
        }

        let mut partial = f64::INFINITY;
        let mut drop_at = None;
        for (k, (a, rk)) in active.iter().zip(r.iter()).enumerate() {
            if matches!(a.row, Row::Ineq(_)) && *rk > 0.0 {
                let ratio = a.u / rk;
                if ratio < partial {
                    partial = ratio;
                    drop_at = Some(k);
                }
            }
        }
        let full = if dependent {
            f64::INFINITY
        } else {
            -slack / z.dot(&p.normal)
        };
        let step = partial.min(full);
        if !step.is_finite() {
            return Err(Error::Infeasible(match p.row {
                Row::Eq(i) => format!("equality row {i} is inconsistent with earlier rows"),
                Row::Ineq(j) => format!("inequality row {j} cannot be satisfied"),
            }));
        }

        if !dependent {
            *w += &z * step;
        }
        for (a, rk) in active.iter_mut().zip(r.iter()) {
            a.u -= step * rk;
        }
        p.u += step;

        if full <= partial {
            active.push(p);
            return Ok(());
        }
        let k = drop_at.expect("partial step has a blocking constraint");
        active.remove(k);
    }
}

/// `z = (I − QQᵗ) n` and `r = R⁻¹Qᵗ n` for the thin QR of the active normals.
fn directions(active: &[Active], normal: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    if active.is_empty() {
        return (normal.clone(), DVector::zeros(0));
    }
    let cols: Vec<DVector<f64>> = active.iter().map(|a| a.normal.clone()).collect();
    let n_mat = DMatrix::from_columns(&cols);
    let qr = n_mat.qr();
    let q = qr.q();
    let r = qr.r();
    let qtn = q.transpose() * normal;
    let z = normal - &q * &qtn;
    let coeffs = r
        .solve_upper_triangular(&qtn)
        .expect("active normals are linearly independent");
    (z, coeffs)
}
