//! Network model for the M-relay diamond with one eavesdropper.
//!
//! Relay `i` receives `h_s[i]·x_s + z_i`, scales it by `β_i` and forwards it to the
//! destination (gain `h_t[i]`) and, unintentionally, to the eavesdropper (gain
//! `h_e[i]`). With `γ_s = P_s/σ²`, the SNR at node `k ∈ {t, e}` is
//!
//! ```text
//!     SNR_k(β) = γ_s (Σ h_s[i] β_i h_k[i])² / (1 + Σ β_i² h_k[i]²)
//! ```
//!
//! The solvers work in two auxiliary coordinate systems: `ω_i = h_t[i]·β_i` and
//! `v = ω/√(1+ωᵗω)`, which maps ℝᴹ onto the open unit ball. The destination gain is
//! written `h_t` throughout (some references also call it `h_d`).

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to recognize scaled and symmetric instances.
pub const STRUCTURE_RTOL: f64 = 1e-12;

/// All parameters of one diamond network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ChannelInstance {
    h_s: Vec<f64>,
    h_t: Vec<f64>,
    h_e: Vec<f64>,
    p_s: f64,
    p_relay: Vec<f64>,
    sigma2: f64,
}

/// Wire form of [`ChannelInstance`]; the field names are part of the file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawInstance {
    M: usize,
    h_s: Vec<f64>,
    h_t: Vec<f64>,
    h_e: Vec<f64>,
    P_s: f64,
    P_relay: Vec<f64>,
    sigma2: f64,
}

impl TryFrom<RawInstance> for ChannelInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        if raw.h_s.len() != raw.M {
            return Err(Error::InvalidInstance(format!(
                "M = {} but h_s has {} entries",
                raw.M,
                raw.h_s.len()
            )));
        }
        ChannelInstance::new(raw.h_s, raw.h_t, raw.h_e, raw.P_s, raw.P_relay, raw.sigma2)
    }
}

impl From<ChannelInstance> for RawInstance {
    fn from(inst: ChannelInstance) -> Self {
        RawInstance {
            M: inst.h_s.len(),
            h_s: inst.h_s,
            h_t: inst.h_t,
            h_e: inst.h_e,
            P_s: inst.p_s,
            P_relay: inst.p_relay,
            sigma2: inst.sigma2,
        }
    }
}

impl ChannelInstance {
    pub fn new(
        h_s: Vec<f64>,
        h_t: Vec<f64>,
        h_e: Vec<f64>,
        p_s: f64,
        p_relay: Vec<f64>,
        sigma2: f64,
    ) -> Result<Self> {
        let m = h_s.len();
        if m == 0 {
            return Err(Error::InvalidInstance("at least one relay is required".into()));
        }
        for (name, v) in [("h_t", &h_t), ("h_e", &h_e), ("P_relay", &p_relay)] {
            if v.len() != m {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {} entries, expected {m}",
                    v.len()
                )));
            }
        }
        let all_finite = h_s
            .iter()
            .chain(&h_t)
            .chain(&h_e)
            .chain(&p_relay)
            .chain([&p_s, &sigma2])
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidInstance("non-finite parameter".into()));
        }
        if p_s <= 0.0 {
            return Err(Error::InvalidInstance(format!("P_s = {p_s} must be positive")));
        }
        if sigma2 <= 0.0 {
            return Err(Error::InvalidInstance(format!("sigma2 = {sigma2} must be positive")));
        }
        if let Some(i) = p_relay.iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidInstance(format!("P_relay[{i}] must be positive")));
        }
        if let Some(i) = h_t.iter().position(|&h| h == 0.0) {
            return Err(Error::InvalidInstance(format!("h_t[{i}] must be nonzero")));
        }
        Ok(ChannelInstance {
            h_s,
            h_t,
            h_e,
            p_s,
            p_relay,
            sigma2,
        })
    }

    /// Same network at a different source power.
    pub fn with_source_power(&self, p_s: f64) -> Result<Self> {
        ChannelInstance::new(
            self.h_s.clone(),
            self.h_t.clone(),
            self.h_e.clone(),
            p_s,
            self.p_relay.clone(),
            self.sigma2,
        )
    }

    pub fn relays(&self) -> usize {
        self.h_s.len()
    }

    pub fn h_s(&self) -> &[f64] {
        &self.h_s
    }

    pub fn h_t(&self) -> &[f64] {
        &self.h_t
    }

    pub fn h_e(&self) -> &[f64] {
        &self.h_e
    }

    pub fn p_s(&self) -> f64 {
        self.p_s
    }

    pub fn p_relay(&self) -> &[f64] {
        &self.p_relay
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// γ_s = P_s/σ².
    pub fn gamma_s(&self) -> f64 {
        self.p_s / self.sigma2
    }

    /// Σ P_i.
    pub fn total_power(&self) -> f64 {
        self.p_relay.iter().sum()
    }

    /// Diagonal of Λ: the received power `h_si² P_s + σ²` at each relay.
    pub fn relay_input_power(&self) -> Vec<f64> {
        self.h_s
            .iter()
            .map(|h| h * h * self.p_s + self.sigma2)
            .collect()
    }

    /// End-to-end gains `h_si·h_ik` towards `node`.
    pub fn path_gains(&self, node: Node) -> Vec<f64> {
        self.h_s
            .iter()
            .zip(self.second_hop(node))
            .map(|(a, b)| a * b)
            .collect()
    }

    pub fn second_hop(&self, node: Node) -> &[f64] {
        match node {
            Node::Destination => &self.h_t,
            Node::Eavesdropper => &self.h_e,
        }
    }

    /// `|h_ie| < |h_it|` for every relay.
    pub fn is_degraded(&self) -> bool {
        self.first_non_degraded_relay().is_none()
    }

    pub(crate) fn first_non_degraded_relay(&self) -> Option<usize> {
        self.h_e
            .iter()
            .zip(&self.h_t)
            .position(|(e, t)| e.abs() >= t.abs())
    }

    /// Common ratio `α` with `h_e = α·h_t`, of any value, if one exists.
    pub fn common_ratio(&self) -> Option<f64> {
        let alpha = self.h_e[0] / self.h_t[0];
        let consistent = self.h_e.iter().zip(&self.h_t).all(|(e, t)| {
            let r = e / t;
            (r - alpha).abs() <= STRUCTURE_RTOL * alpha.abs().max(r.abs())
        });
        consistent.then_some(alpha)
    }

    /// `Some(α)` when `h_e = α·h_t` with `0 < α < 1`.
    pub fn scaled_alpha(&self) -> Option<f64> {
        self.common_ratio().filter(|a| *a > 0.0 && *a < 1.0)
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled_alpha().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Node {
    Destination,
    Eavesdropper,
}

/// Relay amplification factors β.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalingVector(pub Vec<f64>);

impl ScalingVector {
    pub fn zeros(m: usize) -> Self {
        ScalingVector(vec![0.0; m])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ScalingVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ScalingVector {
    fn from(v: Vec<f64>) -> Self {
        ScalingVector(v)
    }
}

/// A point of the open unit ball, `vᵗv < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TransformedVector(Vec<f64>);

impl TransformedVector {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm_sq = dot(&v, &v);
        if !(norm_sq < 1.0) {
            return Err(Error::NonInvertible { norm_sq });
        }
        Ok(TransformedVector(v))
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for TransformedVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[serde(alias = "degraded")]
    DegradedIndividual,
    DegradedTotal,
    #[serde(alias = "zf")]
    ZeroForcing,
    Scaled,
    Symmetric,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::DegradedIndividual,
        Method::DegradedTotal,
        Method::ZeroForcing,
        Method::Scaled,
        Method::Symmetric,
        Method::Oracle,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Method::DegradedIndividual => "degraded-individual",
            Method::DegradedTotal => "degraded-total",
            Method::ZeroForcing => "zero-forcing",
            Method::Scaled => "scaled",
            Method::Symmetric => "symmetric",
            Method::Oracle => "oracle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    /// Accepts the tags and their short aliases (`degraded`, `zf`).
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Outer iterations (line-search steps, QP active-set changes, grid rounds).
    pub iterations: usize,
    /// Newton steps summed over all inner convex solves.
    pub newton_iterations: usize,
    /// Objective evaluations of the outer search.
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    /// Set when the method degenerated to the trivial solution (e.g. zero-forcing
    /// cannot null the eavesdropper without also nulling the destination).
    #[serde(default)]
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub beta_opt: ScalingVector,
    pub snr_d: f64,
    pub snr_e: f64,
    pub rate_bits: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    /// Builds a report whose SNRs and rate are recomputed from `beta`.
    pub fn evaluate(
        instance: &ChannelInstance,
        beta: ScalingVector,
        method: Method,
        diagnostics: Diagnostics,
    ) -> Self {
        let snr_d = snr(instance, &beta, Node::Destination);
        let snr_e = snr(instance, &beta, Node::Eavesdropper);
        SolveReport {
            rate_bits: rate_from_snrs(snr_d, snr_e),
            beta_opt: beta,
            snr_d,
            snr_e,
            method,
            diagnostics,
        }
    }
}

/// β_{i,max} = √(P_i/(h_si² P_s + σ²)).
pub fn beta_max_bounds(instance: &ChannelInstance) -> Vec<f64> {
    instance
        .p_relay
        .iter()
        .zip(instance.relay_input_power())
        .map(|(p, lambda)| (p / lambda).sqrt())
        .collect()
}

/// ω_{i,max} = |h_it|·β_{i,max}.
pub fn omega_max_bounds(instance: &ChannelInstance) -> Vec<f64> {
    beta_max_bounds(instance)
        .into_iter()
        .zip(&instance.h_t)
        .map(|(b, h)| b * h.abs())
        .collect()
}

pub fn snr(instance: &ChannelInstance, beta: &[f64], node: Node) -> f64 {
    assert_eq!(beta.len(), instance.relays(), "β has the wrong length");
    let hop = instance.second_hop(node);
    let mut signal = 0.0;
    let mut noise = 1.0;
    for ((hs, hk), b) in instance.h_s.iter().zip(hop).zip(beta) {
        signal += hs * b * hk;
        noise += b * b * hk * hk;
    }
    instance.gamma_s() * signal * signal / noise
}

/// ½log₂((1+snr_d)/(1+snr_e)), clamped below at zero.
pub fn rate_from_snrs(snr_d: f64, snr_e: f64) -> f64 {
    (0.5 * ((1.0 + snr_d) / (1.0 + snr_e)).log2()).max(0.0)
}

pub fn secrecy_rate(instance: &ChannelInstance, beta: &[f64]) -> f64 {
    rate_from_snrs(
        snr(instance, beta, Node::Destination),
        snr(instance, beta, Node::Eavesdropper),
    )
}

pub fn to_transformed(instance: &ChannelInstance, beta: &[f64]) -> TransformedVector {
    assert_eq!(beta.len(), instance.relays(), "β has the wrong length");
    let omega: Vec<f64> = beta.iter().zip(&instance.h_t).map(|(b, h)| b * h).collect();
    let scale = (1.0 + dot(&omega, &omega)).sqrt();
    TransformedVector(omega.into_iter().map(|w| w / scale).collect())
}

pub fn from_transformed(instance: &ChannelInstance, v: &[f64]) -> Result<ScalingVector> {
    if v.len() != instance.relays() {
        return Err(Error::DimensionMismatch {
            expected: instance.relays(),
            actual: v.len(),
        });
    }
    let norm_sq = dot(v, v);
    if !(norm_sq < 1.0) {
        return Err(Error::NonInvertible { norm_sq });
    }
    let scale = (1.0 - norm_sq).sqrt();
    Ok(ScalingVector(
        v.iter()
            .zip(&instance.h_t)
            .map(|(vi, h)| vi / (h * scale))
            .collect(),
    ))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
