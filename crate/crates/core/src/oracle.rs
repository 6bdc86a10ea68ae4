//! Brute-force reference maximizer of the secrecy rate over the power box.
//!
//! An exhaustive uniform grid over `∏[−β_max,i, β_max,i]` is followed by rounds of
//! local refinement: a 21-point-per-axis grid around the incumbent with a 10× finer
//! spacing each round. Evaluation is a parallel map with a max-reduction that breaks
//! ties towards the smallest flat index, i.e. the lexicographically smallest β, so the
//! result does not depend on scheduling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    beta_max_bounds, ChannelInstance, Diagnostics, Method, Node, ScalingVector, SolveReport,
};

/// Default cap on rate evaluations per oracle call.
pub const DEFAULT_EVALUATION_CAP: u128 = 2_000_000_000;
/// Points per axis in a refinement round.
pub const REFINE_POINTS: usize = 21;
/// Relative tolerance on `|h_seᵗβ|` accepted as nulled.
pub const ZF_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleConstraint {
    /// `|β_i| ≤ β_max,i`.
    Individual,
    /// `βᵗΛβ ≤ Σ P_i`.
    Total,
    /// Individual box plus exact nulling at the eavesdropper.
    ZeroForcing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Grid points per axis in the initial sweep, endpoints included.
    pub steps_per_axis: usize,
    pub refine_rounds: usize,
    pub max_evaluations: u128,
    pub parallel: bool,
}

impl OracleConfig {
    pub fn new(steps_per_axis: usize, refine_rounds: usize) -> Self {
        OracleConfig {
            steps_per_axis,
            refine_rounds,
            max_evaluations: DEFAULT_EVALUATION_CAP,
            parallel: true,
        }
    }

    /// Points per axis giving spacing `fraction · β_max` (e.g. 0.01 → 201).
    pub fn with_relative_step(fraction: f64, refine_rounds: usize) -> Self {
        Self::new((2.0 / fraction).round() as usize + 1, refine_rounds)
    }

    /// Total rate evaluations for `relays` axes.
    pub fn evaluations(&self, relays: usize) -> Option<u128> {
        let exp = u32::try_from(relays).ok()?;
        let base = (self.steps_per_axis as u128).checked_pow(exp)?;
        let refine = (REFINE_POINTS as u128).checked_pow(exp)?.checked_mul(self.refine_rounds as u128)?;
        base.checked_add(refine)
    }
}

pub fn grid_oracle(instance: &ChannelInstance, cfg: &OracleConfig) -> Result<SolveReport> {
    constrained_oracle(instance, OracleConstraint::Individual, cfg)
}

pub fn constrained_oracle(
    instance: &ChannelInstance,
    constraint: OracleConstraint,
    cfg: &OracleConfig,
) -> Result<SolveReport> {
    let m = instance.relays();
    if cfg.steps_per_axis < 2 {
        return Err(Error::InvalidConfig("oracle needs at least 2 points per axis".into()));
    }
    let evaluations = cfg.evaluations(m).unwrap_or(u128::MAX);
    if evaluations > cfg.max_evaluations {
        return Err(Error::BudgetExceeded {
            evaluations,
            cap: cfg.max_evaluations,
        });
    }

    let space = Space::new(instance, constraint);
    let mut spacing: Vec<f64> = space
        .bound
        .iter()
        .map(|b| 2.0 * b / (cfg.steps_per_axis - 1) as f64)
        .collect();
    let axes: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..cfg.steps_per_axis)
                .map(|k| -space.bound[i] + k as f64 * spacing[i])
                .collect()
        })
        .collect();
    let mut best = space.search(&axes, cfg.parallel);
    let mut history = vec![best.as_ref().map_or(0.0, |(r, _)| *r)];

    for _ in 0..cfg.refine_rounds {
        let Some((_, center)) = best.clone() else { break };
        for h in spacing.iter_mut() {
            *h /= 10.0;
        }
        let half = (REFINE_POINTS / 2) as f64;
        let axes: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..REFINE_POINTS)
                    .map(|k| (center[i] + (k as f64 - half) * spacing[i]).clamp(-space.bound[i], space.bound[i]))
                    .collect()
            })
            .collect();
        if let Some((rate, beta)) = space.search(&axes, cfg.parallel) {
            if best.as_ref().is_none_or(|(b, _)| rate > *b) {
                best = Some((rate, beta));
            }
        }
        history.push(best.as_ref().map_or(0.0, |(r, _)| *r));
    }

    let beta = best.map_or_else(|| vec![0.0; m], |(_, b)| b);
    let diagnostics = Diagnostics {
        iterations: cfg.refine_rounds,
        evaluations: usize::try_from(evaluations).unwrap_or(usize::MAX),
        note: Some(format!(
            "incumbent rate per round: {}",
            history.iter().map(|r| format!("{r:.9}")).collect::<Vec<_>>().join(", ")
        )),
        ..Diagnostics::default()
    };
    Ok(SolveReport::evaluate(instance, ScalingVector(beta), Method::Oracle, diagnostics))
}

/// Precomputed gains for fast rate evaluation.
struct Space {
    gamma: f64,
    path_t: Vec<f64>,
    path_e: Vec<f64>,
    ht2: Vec<f64>,
    he2: Vec<f64>,
    bound: Vec<f64>,
    constraint: OracleConstraint,
    lambda: Vec<f64>,
    p_tot: f64,
    beta_max: Vec<f64>,
}

impl Space {
    fn new(instance: &ChannelInstance, constraint: OracleConstraint) -> Self {
        let beta_max = beta_max_bounds(instance);
        let lambda = instance.relay_input_power();
        let p_tot = instance.total_power();
        let bound = match constraint {
            OracleConstraint::Total => lambda.iter().map(|l| (p_tot / l).sqrt()).collect(),
            _ => beta_max.clone(),
        };
        Space {
            gamma: instance.gamma_s(),
            path_t: instance.path_gains(Node::Destination),
            path_e: instance.path_gains(Node::Eavesdropper),
            ht2: instance.h_t().iter().map(|h| h * h).collect(),
            he2: instance.h_e().iter().map(|h| h * h).collect(),
            bound,
            constraint,
            lambda,
            p_tot,
            beta_max,
        }
    }

    fn rate(&self, beta: &[f64]) -> f64 {
        let (mut st, mut se, mut nt, mut ne) = (0.0, 0.0, 1.0, 1.0);
        for i in 0..beta.len() {
            let b = beta[i];
            st += self.path_t[i] * b;
            se += self.path_e[i] * b;
            nt += b * b * self.ht2[i];
            ne += b * b * self.he2[i];
        }
        let snr_d = self.gamma * st * st / nt;
        let snr_e = self.gamma * se * se / ne;
        (0.5 * ((1.0 + snr_d) / (1.0 + snr_e)).log2()).max(0.0)
    }

    /// Maps a grid point to the point actually evaluated; `false` if infeasible.
    fn admit(&self, beta: &mut [f64]) -> bool {
        match self.constraint {
            OracleConstraint::Individual => true,
            OracleConstraint::Total => {
                let used: f64 = beta.iter().zip(&self.lambda).map(|(b, l)| b * b * l).sum();
                used <= self.p_tot
            }
            OracleConstraint::ZeroForcing => {
                let a = &self.path_e;
                let aa: f64 = a.iter().map(|x| x * x).sum();
                if aa == 0.0 {
                    return true;
                }
                let ab: f64 = a.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
                for i in 0..beta.len() {
                    beta[i] = (beta[i] - ab / aa * a[i]).clamp(-self.beta_max[i], self.beta_max[i]);
                }
                let ab: f64 = a.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
                let bb: f64 = beta.iter().map(|b| b * b).sum();
                ab.abs() <= ZF_EPS * aa.sqrt() * bb.sqrt()
            }
        }
    }

    /// Best `(rate, β)` over the tensor grid `axes`; ties go to the smallest flat index.
    fn search(&self, axes: &[Vec<f64>], parallel: bool) -> Option<(f64, Vec<f64>)> {
        let m = axes.len();
        let total: usize = axes.iter().map(Vec::len).product();
        let point = |flat: usize| {
            let mut beta = vec![0.0; m];
            let mut rem = flat;
            for i in (0..m).rev() {
                let n = axes[i].len();
                beta[i] = axes[i][rem % n];
                rem /= n;
            }
            beta
        };
        let eval = |flat: usize| -> Option<(f64, usize)> {
            let mut beta = point(flat);
            self.admit(&mut beta).then(|| (self.rate(&beta), flat))
        };
        let better = |a: Option<(f64, usize)>, b: Option<(f64, usize)>| match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    Some(y)
                } else {
                    Some(x)
                }
            }
        };
        let best = if parallel {
            (0..total)
                .into_par_iter()
                .with_min_len(4096)
                .map(eval)
                .reduce(|| None, better)
        } else {
            (0..total).map(eval).fold(None, better)
        };
        best.map(|(rate, flat)| {
            let mut beta = point(flat);
            self.admit(&mut beta);
            (rate, beta)
        })
    }
}
