//! Numerical kernels shared by the solvers.
//!
//! * [`maximize_linear_over_ellipsoids`]: log-barrier interior point for
//!   `max cᵗv s.t. vᵗA_j v ≤ 1`.
//! * [`golden_section_max`]: derivative-free maximization of a unimodal function.
//! * [`positive_quartic_root`]: the single positive root of
//!   `c0 − c1λ − c2λ² − c3λ³ − λ⁴`.
//! * [`min_norm_qp`]: `min wᵗw s.t. H w = b, G w ≤ 0` (dual active set).

mod barrier;
mod golden;
mod qp;
mod quartic;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use barrier::{maximize_linear_over_ellipsoids, BarrierSolution};
pub use golden::{golden_section_max, try_golden_section_max, GoldenResult, GOLDEN_RATIO};
pub use qp::{min_norm_qp, QpSolution};
pub use quartic::{positive_quartic_root, quartic_value};

/// Tolerances and iteration caps for every kernel in this module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub kkt_tol: f64,
    /// Factor by which the barrier weight `t` grows between centering steps.
    pub barrier_mu: f64,
    pub barrier_t0: f64,
    /// Newton steps allowed per centering step.
    pub max_newton_iters: usize,
    pub golden_tol: f64,
    pub root_tol: f64,
    /// Target duality gap `m/t` of the barrier method.
    pub gap_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            feasibility_tol: 1e-8,
            kkt_tol: 1e-6,
            barrier_mu: 10.0,
            barrier_t0: 1.0,
            max_newton_iters: 200,
            golden_tol: 1e-7,
            root_tol: 1e-10,
            gap_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.feasibility_tol,
            self.kkt_tol,
            self.barrier_mu,
            self.barrier_t0,
            self.golden_tol,
            self.root_tol,
            self.gap_tol,
        ]
        .iter()
        .all(|x| x.is_finite() && *x > 0.0);
        if !positive || self.max_newton_iters == 0 {
            return Err(Error::InvalidConfig("solver tolerances must be positive".into()));
        }
        if self.barrier_mu <= 1.0 {
            return Err(Error::InvalidConfig("barrier_mu must exceed 1".into()));
        }
        Ok(())
    }
}

/// Constraints `vᵗA_j v ≤ 1` with every `A_j` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidSet {
    dim: usize,
    matrices: Vec<DMatrix<f64>>,
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

impl EllipsoidSet {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidConstraints("empty constraint set".into()));
        };
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidConstraints("zero-dimensional constraint".into()));
        }
        for (j, a) in matrices.iter().enumerate() {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::InvalidConstraints(format!(
                    "matrix {j} is {}x{}, expected {dim}x{dim}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConstraints(format!("matrix {j} is not finite")));
            }
            let scale = a.amax().max(1.0);
            if (a - a.transpose()).amax() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidConstraints(format!("matrix {j} is not symmetric")));
            }
            let min_eig = min_eigenvalue(a);
            // Eigenvalue noise grows with the entry scale, so the floor is relative.
            if min_eig < -PSD_TOL * scale {
                return Err(Error::InvalidConstraints(format!(
                    "matrix {j} is not positive semidefinite (λ_min = {min_eig:e})"
                )));
            }
        }
        Ok(EllipsoidSet { dim, matrices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    /// `vᵗA_j v` for every constraint.
    pub fn quadratic_forms(&self, v: &[f64]) -> Vec<f64> {
        self.matrices.iter().map(|a| quad_form(a, v)).collect()
    }

    /// The feasible set is bounded iff `Σ A_j` is positive definite.
    pub fn is_bounded(&self) -> bool {
        let sum = self
            .matrices
            .iter()
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, a| acc + a);
        let scale = sum.amax().max(1.0);
        min_eigenvalue(&sum) > 1e-12 * scale
    }
}

pub(crate) fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

pub(crate) fn quad_form(a: &DMatrix<f64>, v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a[(i, j)] * v[j];
        }
        acc += v[i] * row;
    }
    acc
}
