//! Monte Carlo sweep over Rayleigh-faded diamond networks.
//!
//! Instance `i` draws its gains from a ChaCha8 stream keyed by `(seed, i)`, so results
//! do not depend on how instances are scheduled. Each instance is sampled once and
//! solved at every source power of the grid. Aggregates are folded in instance order.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::convex::SolverConfig;
use crate::degraded::{solve_degraded, DegradedMode, DegradedProblem};
use crate::error::{Error, Result};
use crate::model::{ChannelInstance, Method};
use crate::zero_forcing::solve_zero_forcing;

/// Slack allowed in `R_ZF ≤ R_individual ≤ R_total`.
pub const SANDWICH_TOL: f64 = 1e-6;

/// Methods a sweep can run, in the order they are computed and reported.
pub const SWEEP_METHODS: [Method; 3] = [Method::ZeroForcing, Method::DegradedIndividual, Method::DegradedTotal];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub relays: usize,
    pub rayleigh_sigma: f64,
    pub n_instances: u64,
    #[serde(rename = "P_relay")]
    pub p_relay: f64,
    pub sigma2: f64,
    #[serde(rename = "P_s_grid")]
    pub p_s_grid: Vec<f64>,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub output_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            relays: 5,
            rayleigh_sigma: 0.5,
            n_instances: 1000,
            p_relay: 5.0,
            sigma2: 1.0,
            p_s_grid: (1..=20).map(f64::from).collect(),
            seed: 0,
            methods: SWEEP_METHODS.to_vec(),
            output_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.relays == 0 {
            return bad("M must be at least 1");
        }
        if self.n_instances == 0 {
            return bad("n_instances must be at least 1");
        }
        if !(self.rayleigh_sigma > 0.0 && self.rayleigh_sigma.is_finite()) {
            return bad("rayleigh_sigma must be positive");
        }
        if !(self.p_relay > 0.0 && self.p_relay.is_finite()) || !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad("P_relay and sigma2 must be positive");
        }
        if self.p_s_grid.is_empty() {
            return bad("P_s_grid is empty");
        }
        if self.p_s_grid.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return bad("P_s_grid entries must be positive");
        }
        if self.p_s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("P_s_grid must be strictly increasing");
        }
        if self.methods.is_empty() {
            return bad("methods is empty");
        }
        for m in &self.methods {
            if !SWEEP_METHODS.contains(m) {
                return Err(Error::InvalidConfig(format!("method {m} cannot run on sampled instances")));
            }
        }
        Ok(())
    }

    /// Requested methods, deduplicated, in [`SWEEP_METHODS`] order.
    pub fn ordered_methods(&self) -> Vec<Method> {
        SWEEP_METHODS.into_iter().filter(|m| self.methods.contains(m)).collect()
    }
}

/// Instance `index` of the ensemble, at the first grid power.
pub fn sample_instance(config: &ExperimentConfig, index: u64) -> Result<ChannelInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let m = config.relays;
    let sigma = config.rayleigh_sigma;
    let rayleigh = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.sample(Open01);
        sigma * (-2.0 * u.ln()).sqrt()
    };
    let h_s: Vec<f64> = (0..m).map(|_| rayleigh(&mut rng)).collect();
    let h_t: Vec<f64> = (0..m).map(|_| rayleigh(&mut rng)).collect();
    let h_e: Vec<f64> = h_t.iter().map(|h| rng.random::<f64>() * h).collect();
    ChannelInstance::new(
        h_s,
        h_t,
        h_e,
        config.p_s_grid[0],
        vec![config.p_relay; m],
        config.sigma2,
    )
}

/// SHA-256 over the little-endian bytes of every gain and power.
pub fn instance_hash(instance: &ChannelInstance) -> String {
    let mut hasher = Sha256::new();
    for xs in [instance.h_s(), instance.h_t(), instance.h_e(), instance.p_relay()] {
        for x in xs {
            hasher.update(x.to_le_bytes());
        }
    }
    hasher.update(instance.sigma2().to_le_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub method: Method,
    #[serde(rename = "P_s")]
    pub p_s: f64,
    pub mean_rate_bits: f64,
    pub std_rate_bits: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceRow {
    pub index: u64,
    #[serde(rename = "P_s")]
    pub p_s: f64,
    pub hash: String,
    pub zf_rate_bits: Option<f64>,
    pub individual_rate_bits: Option<f64>,
    pub total_rate_bits: Option<f64>,
}

impl InstanceRow {
    fn rate(&self, method: Method) -> Option<f64> {
        match method {
            Method::ZeroForcing => self.zf_rate_bits,
            Method::DegradedIndividual => self.individual_rate_bits,
            Method::DegradedTotal => self.total_rate_bits,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub aggregates: Vec<AggregateRow>,
    pub instances: Vec<InstanceRow>,
}

fn solve_instance(
    config: &ExperimentConfig,
    methods: &[Method],
    index: u64,
    cfg: &SolverConfig,
) -> Result<Vec<InstanceRow>> {
    let base = sample_instance(config, index)?;
    let hash = instance_hash(&base);
    let mut rows = Vec::with_capacity(config.p_s_grid.len());
    for &p_s in &config.p_s_grid {
        let inst = base.with_source_power(p_s)?;
        let fail = |e: Error| Error::InstanceFailed {
            index,
            p_s,
            instance: serde_json::to_string(&inst).unwrap_or_default(),
            source: Box::new(e),
        };
        let mut row = InstanceRow {
            index,
            p_s,
            hash: hash.clone(),
            zf_rate_bits: None,
            individual_rate_bits: None,
            total_rate_bits: None,
        };
        for &method in methods {
            let rate = match method {
                Method::ZeroForcing => solve_zero_forcing(&inst, cfg).map_err(fail)?.rate_bits,
                Method::DegradedIndividual | Method::DegradedTotal => {
                    let mode = if method == Method::DegradedTotal {
                        DegradedMode::Total
                    } else {
                        DegradedMode::Individual
                    };
                    let problem = DegradedProblem::new(inst.clone(), mode).map_err(fail)?;
                    solve_degraded(&problem, cfg).map_err(fail)?.rate_bits
                }
                _ => unreachable!("validated sweep method"),
            };
            match method {
                Method::ZeroForcing => row.zf_rate_bits = Some(rate),
                Method::DegradedIndividual => row.individual_rate_bits = Some(rate),
                _ => row.total_rate_bits = Some(rate),
            }
        }
        check_sandwich(&row)?;
        rows.push(row);
    }
    Ok(rows)
}

fn check_sandwich(row: &InstanceRow) -> Result<()> {
    let chain = [row.zf_rate_bits, row.individual_rate_bits, row.total_rate_bits];
    let present: Vec<(usize, f64)> = chain
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.map(|r| (k, r)))
        .collect();
    let names = ["zero-forcing", "degraded-individual", "degraded-total"];
    for w in present.windows(2) {
        let ((ka, a), (kb, b)) = (w[0], w[1]);
        if a > b + SANDWICH_TOL {
            return Err(Error::SandwichViolation {
                index: row.index,
                p_s: row.p_s,
                detail: format!("{} rate {a} exceeds {} rate {b}", names[ka], names[kb]),
            });
        }
    }
    Ok(())
}

/// Solves every instance at every grid power. With `parallel` the instances are
/// spread over the rayon pool; results are identical either way.
pub fn run_sweep(config: &ExperimentConfig, cfg: &SolverConfig, parallel: bool) -> Result<SweepResult> {
    config.validate()?;
    cfg.validate()?;
    let methods = config.ordered_methods();
    let per_instance: Vec<Vec<InstanceRow>> = if parallel {
        (0..config.n_instances)
            .into_par_iter()
            .map(|i| solve_instance(config, &methods, i, cfg))
            .collect::<Result<_>>()?
    } else {
        (0..config.n_instances)
            .map(|i| solve_instance(config, &methods, i, cfg))
            .collect::<Result<_>>()?
    };

    let mut aggregates = Vec::new();
    for (k, &p_s) in config.p_s_grid.iter().enumerate() {
        for &method in &methods {
            let rates: Vec<f64> = per_instance
                .iter()
                .map(|rows| rows[k].rate(method).expect("method was run"))
                .collect();
            let n = rates.len() as f64;
            let mean = rates.iter().sum::<f64>() / n;
            let var = if rates.len() > 1 {
                rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            aggregates.push(AggregateRow {
                method,
                p_s,
                mean_rate_bits: mean,
                std_rate_bits: var.sqrt(),
                n: rates.len() as u64,
            });
        }
    }

    // Row order: by P_s, then instance index.
    let mut instances = Vec::with_capacity(per_instance.len() * config.p_s_grid.len());
    for k in 0..config.p_s_grid.len() {
        instances.extend(per_instance.iter().map(|rows| rows[k].clone()));
    }
    Ok(SweepResult { aggregates, instances })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

pub fn write_aggregates<W: Write>(rows: &[AggregateRow], format: OutputFormat, out: W) -> Result<()> {
    write_rows(rows, format, out)
}

pub fn write_instances<W: Write>(rows: &[InstanceRow], format: OutputFormat, out: W) -> Result<()> {
    write_rows(rows, format, out)
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::InvalidConfig(format!("write failed: {e}"));
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)
                    .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
            }
            w.flush().map_err(io)?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)
                .map_err(|e| Error::InvalidConfig(format!("write failed: {e}")))?;
            out.write_all(b"\n").map_err(io)?;
        }
    }
    Ok(())
}

/// Path of the per-instance audit file next to `aggregate`.
pub fn instances_path(aggregate: &Path, format: OutputFormat) -> PathBuf {
    let stem = aggregate
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    aggregate.with_file_name(format!("{stem}.instances.{}", format.extension()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            relays: 3,
            n_instances: 4,
            p_s_grid: vec![1.0, 5.0],
            seed: 7,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn sampling_is_deterministic_and_degraded() {
        let c = small();
        for i in 0..20 {
            let a = sample_instance(&c, i).unwrap();
            assert_eq!(a, sample_instance(&c, i).unwrap());
            assert!(a.is_degraded());
            assert!(a.h_s().iter().chain(a.h_t()).all(|h| *h > 0.0));
        }
        assert_ne!(sample_instance(&c, 0).unwrap(), sample_instance(&c, 1).unwrap());
    }

    #[test]
    fn config_defaults_and_names() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"seed": 3, "P_s_grid": [1, 2]}"#).unwrap();
        assert_eq!(c.relays, 5);
        assert_eq!(c.n_instances, 1000);
        assert_eq!(c.p_relay, 5.0);
        assert_eq!(c.seed, 3);
        let m: ExperimentConfig = serde_json::from_str(r#"{"M": 2, "methods": ["zf", "degraded"]}"#).unwrap();
        assert_eq!(m.ordered_methods(), vec![Method::ZeroForcing, Method::DegradedIndividual]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut c = small();
        c.p_s_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        c.p_s_grid = vec![];
        assert!(c.validate().is_err());
        let mut c = small();
        c.methods = vec![Method::Scaled];
        assert!(c.validate().is_err());
        let mut c = small();
        c.n_instances = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_shape_and_ordering() {
        let c = small();
        let r = run_sweep(&c, &SolverConfig::default(), false).unwrap();
        assert_eq!(r.aggregates.len(), 2 * 3);
        assert_eq!(r.instances.len(), 2 * 4);
        for row in &r.instances {
            let (z, i, t) = (
                row.zf_rate_bits.unwrap(),
                row.individual_rate_bits.unwrap(),
                row.total_rate_bits.unwrap(),
            );
            assert!(z <= i + SANDWICH_TOL && i <= t + SANDWICH_TOL);
        }
    }

    #[test]
    fn single_instance_row_count() {
        let c = ExperimentConfig {
            n_instances: 1,
            methods: vec![Method::ZeroForcing],
            ..small()
        };
        let r = run_sweep(&c, &SolverConfig::default(), true).unwrap();
        assert_eq!(r.aggregates.len(), c.p_s_grid.len());
        assert!(r.aggregates.iter().all(|a| a.n == 1 && a.std_rate_bits == 0.0));
    }

    #[test]
    fn audit_path() {
        assert_eq!(
            instances_path(Path::new("out/rates.csv"), OutputFormat::Csv),
            PathBuf::from("out/rates.instances.csv")
        );
    }
}
