//! Zero-forcing: maximize the destination SNR subject to exact cancellation of the
//! signal at the eavesdropper.
//!
//! With `ω_i = h_it β_i` and `v̂ = Σ h_si ω_i`, the substitution `w = [ω/v̂, 1/v̂]`
//! turns the problem into `min wᵗw` over
//!
//! ```text
//! [h_sᵗ, 0] w = 1,   [ĥᵗ, 0] w = 0,   |w_i| ≤ ω_max,i · w_{M+1}
//! ```
//!
//! and the destination SNR at the optimum is `γ_s / wᵗw`. This works for any channel,
//! degraded or not.

use nalgebra::DMatrix;

use crate::convex::{min_norm_qp, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{omega_max_bounds, ChannelInstance, Diagnostics, Method, ScalingVector, SolveReport};

#[derive(Debug, Clone, PartialEq)]
pub struct ZfQp {
    /// 2×(M+1).
    pub heq: DMatrix<f64>,
    pub beq: [f64; 2],
    /// 2M×(M+1); rows `2i` and `2i+1` bound `w_i` above and below.
    pub gineq: DMatrix<f64>,
}

pub fn assemble_zf_qp(instance: &ChannelInstance) -> ZfQp {
    let m = instance.relays();
    let omega_max = omega_max_bounds(instance);
    let mut heq = DMatrix::zeros(2, m + 1);
    let mut gineq = DMatrix::zeros(2 * m, m + 1);
    for i in 0..m {
        let hs = instance.h_s()[i];
        let rho = instance.h_e()[i] / instance.h_t()[i];
        heq[(0, i)] = hs;
        heq[(1, i)] = hs * rho;
        gineq[(2 * i, i)] = 1.0;
        gineq[(2 * i, m)] = -omega_max[i];
        gineq[(2 * i + 1, i)] = -1.0;
        gineq[(2 * i + 1, m)] = -omega_max[i];
    }
    ZfQp {
        heq,
        beq: [1.0, 0.0],
        gineq,
    }
}

/// Best zero-forcing weights. When nulling the eavesdropper also nulls the
/// destination (a single relay, or `h_s∘h_e ∥ h_s∘h_t`) the report carries `β = 0`,
/// rate 0 and `diagnostics.degenerate = true`.
pub fn solve_zero_forcing(instance: &ChannelInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    let m = instance.relays();
    let qp = assemble_zf_qp(instance);
    let sol = match min_norm_qp(&qp.heq, &qp.beq, &qp.gineq, cfg) {
        Ok(sol) => sol,
        Err(Error::Infeasible(reason)) => {
            let diagnostics = Diagnostics {
                degenerate: true,
                note: Some(format!("zero-forcing infeasible: {reason}")),
                ..Diagnostics::default()
            };
            return Ok(SolveReport::evaluate(
                instance,
                ScalingVector::zeros(m),
                Method::ZeroForcing,
                diagnostics,
            ));
        }
        Err(e) => return Err(e),
    };

    let v_hat = 1.0 / sol.w[m];
    let beta: Vec<f64> = sol.w[..m]
        .iter()
        .zip(instance.h_t())
        .map(|(w, h)| w * v_hat / h)
        .collect();
    let diagnostics = Diagnostics {
        iterations: sol.iterations,
        kkt_residual: Some(sol.kkt_residual),
        feasibility_residual: Some(sol.feasibility_residual),
        eta_star: Some(0.0),
        ..Diagnostics::default()
    };
    Ok(SolveReport::evaluate(
        instance,
        ScalingVector(beta),
        Method::ZeroForcing,
        diagnostics,
    ))
}
