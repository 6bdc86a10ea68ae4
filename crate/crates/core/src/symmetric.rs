//! Closed forms for symmetric networks, where every relay sees the same gains and
//! power budget, and the single-relay special case.
//!
//! In a symmetric network the optimal weights are all equal, so `M` relays with gains
//! `(h_s, h_t, h_e)` behave like one relay with gains `(√M h_s, √M h_t, √M h_e)`
//! whose received power is `M h_s² P_s + σ²`. For one relay the rate is unimodal in
//! `β²` with stationary point
//!
//! ```text
//! β⁴ = σ² β_max² / (P_R h_t² h_e²),   β_max² = P_R/(h_s² P_s + σ²)
//! ```
//!
//! clipped at `β_max`. For `M` relays the stationary point is that of the equivalent
//! single relay while the clip uses each relay's own limit.

use crate::convex::golden_section_max;
use crate::error::{Error, Result};
use crate::model::{
    rate_from_snrs, ChannelInstance, Diagnostics, Method, ScalingVector, SolveReport,
    STRUCTURE_RTOL,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricInstance {
    pub relays: usize,
    pub h_s: f64,
    pub h_t: f64,
    pub h_e: f64,
    pub p_s: f64,
    pub p_r: f64,
    pub sigma2: f64,
}

impl SymmetricInstance {
    pub fn new(relays: usize, h_s: f64, h_t: f64, h_e: f64, p_s: f64, p_r: f64, sigma2: f64) -> Result<Self> {
        let inst = SymmetricInstance {
            relays,
            h_s,
            h_t,
            h_e,
            p_s,
            p_r,
            sigma2,
        };
        // Shares validation with the general model.
        inst.to_channel_instance()?;
        Ok(inst)
    }

    /// Recognizes equal gains and powers across relays (relative tolerance
    /// [`STRUCTURE_RTOL`]).
    pub fn from_instance(instance: &ChannelInstance) -> Result<Self> {
        let same = |xs: &[f64]| {
            let x0 = xs[0];
            xs.iter()
                .all(|x| (x - x0).abs() <= STRUCTURE_RTOL * x.abs().max(x0.abs()))
        };
        if !(same(instance.h_s()) && same(instance.h_t()) && same(instance.h_e()) && same(instance.p_relay())) {
            return Err(Error::NotSymmetric);
        }
        Ok(SymmetricInstance {
            relays: instance.relays(),
            h_s: instance.h_s()[0],
            h_t: instance.h_t()[0],
            h_e: instance.h_e()[0],
            p_s: instance.p_s(),
            p_r: instance.p_relay()[0],
            sigma2: instance.sigma2(),
        })
    }

    pub fn to_channel_instance(&self) -> Result<ChannelInstance> {
        let m = self.relays;
        ChannelInstance::new(
            vec![self.h_s; m],
            vec![self.h_t; m],
            vec![self.h_e; m],
            self.p_s,
            vec![self.p_r; m],
            self.sigma2,
        )
    }

    pub fn gamma_s(&self) -> f64 {
        self.p_s / self.sigma2
    }

    /// Per-relay limit `√(P_R/(h_s² P_s + σ²))`.
    pub fn beta_max(&self) -> f64 {
        (self.p_r / (self.h_s * self.h_s * self.p_s + self.sigma2)).sqrt()
    }

    /// Secrecy rate in bits with every relay at weight `beta`.
    pub fn rate_at(&self, beta: f64) -> f64 {
        let m = self.relays as f64;
        let snr = |h: f64| {
            let x = beta * beta;
            self.gamma_s() * m * m * self.h_s * self.h_s * h * h * x / (1.0 + m * h * h * x)
        };
        rate_from_snrs(snr(self.h_t), snr(self.h_e))
    }
}

/// Common optimal weight of a symmetric network.
pub fn symmetric_beta_star(inst: &SymmetricInstance) -> f64 {
    let beta_max = inst.beta_max();
    let root_m = (inst.relays as f64).sqrt();
    match stationary_beta(
        root_m * inst.h_s,
        root_m * inst.h_t,
        root_m * inst.h_e,
        inst.p_s,
        inst.p_r,
        inst.sigma2,
    ) {
        Some(b) => b.min(beta_max),
        None => beta_max,
    }
}

/// Optimal weight of a single relay with gains `h_sr`, `h_rd`, `h_re`.
pub fn single_relay_beta(h_sr: f64, h_rd: f64, h_re: f64, p_s: f64, p_r: f64, sigma2: f64) -> f64 {
    let beta_max = (p_r / (h_sr * h_sr * p_s + sigma2)).sqrt();
    match stationary_beta(h_sr, h_rd, h_re, p_s, p_r, sigma2) {
        Some(b) if b < beta_max => b,
        _ => beta_max,
    }
}

/// Stationary point of the single-relay rate, `None` when the rate is monotone.
fn stationary_beta(h_sr: f64, h_rd: f64, h_re: f64, p_s: f64, p_r: f64, sigma2: f64) -> Option<f64> {
    let hh = h_rd * h_rd * h_re * h_re;
    if hh == 0.0 {
        return None;
    }
    let beta_max = (p_r / (h_sr * h_sr * p_s + sigma2)).sqrt();
    Some((sigma2 / (p_r * hh)).powf(0.25) * beta_max.sqrt())
}

pub fn symmetric_rate(inst: &SymmetricInstance) -> Result<SolveReport> {
    let beta = symmetric_beta_star(inst);
    let channel = inst.to_channel_instance()?;
    let diagnostics = Diagnostics {
        note: Some(if beta < inst.beta_max() {
            "interior optimum".into()
        } else {
            "relays at full power".into()
        }),
        ..Diagnostics::default()
    };
    Ok(SolveReport::evaluate(
        &channel,
        ScalingVector(vec![beta; inst.relays]),
        Method::Symmetric,
        diagnostics,
    ))
}

/// Golden-section maximum of the common-weight rate over `[0, β_max]`.
pub fn numeric_symmetric_optimum(inst: &SymmetricInstance, tol: f64) -> Result<(f64, f64)> {
    let r = golden_section_max(|b| inst.rate_at(b), 0.0, inst.beta_max(), tol)?;
    Ok((r.x, r.value))
}

/// Rate of the symmetric network built from the strongest source and destination
/// gains, the weakest eavesdropper gain and the largest relay budget (all by
/// magnitude). Upper-bounds the degraded optimum of `instance`.
pub fn symmetric_upper_bound(instance: &ChannelInstance) -> Result<f64> {
    let max_abs = |xs: &[f64]| xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let min_abs = |xs: &[f64]| xs.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()));
    let sym = SymmetricInstance::new(
        instance.relays(),
        max_abs(instance.h_s()),
        max_abs(instance.h_t()),
        min_abs(instance.h_e()),
        instance.p_s(),
        instance.p_relay().iter().copied().fold(0.0, f64::max),
        instance.sigma2(),
    )?;
    Ok(symmetric_rate(&sym)?.rate_bits)
}
