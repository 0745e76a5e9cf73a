//! Parallel parameter sweeps with deterministic aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CodebookSource, ExperimentConfig, SeOdiaMode, SweepVariable};
use super::gridsearch::{search_in_pool, tuning_seed};
use super::pipeline::{run_trial, TrialOutcome, TrialPlan};
use crate::codebook::{grassmannian_codebook, load_codebook, random_codebook, Codebook, CodebookKind};
use crate::error::{Error, Result};
use crate::numerics::{mix_seed, Rng};
use crate::receiver::GainExponent;
use crate::scheduler::{Algorithm, SeOdiaParams};

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const CODEBOOK_STREAM: u64 = 0x636f_6465;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub value: f64,
    pub algorithm: Algorithm,
    pub mean_sum_rate: f64,
    pub se_sum_rate: f64,
    pub mean_sum_interference: f64,
    pub se_sum_interference: f64,
    /// Outage streams over all scheduled streams.
    pub outage_rate: f64,
    pub trials: usize,
    /// Realizations redrawn after a numerical failure.
    pub resamples: u64,
    /// SE-ODIA thresholds in force at this point.
    pub se_odia_params: Option<SeOdiaParams>,
    /// Baselines are precoded with ZF on their own effective channels.
    pub baseline_zero_forcing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub sweep_var: SweepVariable,
    pub seed: u64,
    pub config_hash: String,
    pub code_version: String,
    pub trials: usize,
    /// Point-major, then algorithms in configured order.
    pub points: Vec<PointResult>,
}

/// Mean and standard error (`sd / √n`, `n-1` denominator) summed in order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Pool with `workers` threads, or rayon's default when 0.
pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))
}

/// Codebook used by ODIA-LF at `bits` feedback bits; deterministic in the
/// master seed and `bits`.
pub fn build_codebook(source: &CodebookSource, dim: usize, bits: u32, master: u64) -> Result<Codebook> {
    let cb = match source {
        CodebookSource::File(path) => load_codebook(path)?,
        CodebookSource::Generate { kind, iterations } => {
            if bits > 20 {
                return Err(Error::config(format!("{bits} feedback bits is too many to enumerate")));
            }
            let size = 1usize << bits;
            let mut rng = Rng::derive(master, &[CODEBOOK_STREAM, u64::from(bits)]);
            match kind {
                CodebookKind::Random => random_codebook(&mut rng, dim, size),
                CodebookKind::Grassmannian => grassmannian_codebook(&mut rng, dim, size, *iterations).0,
                CodebookKind::Custom => {
                    return Err(Error::config(
                        "custom codebooks are loaded with feedback.codebook = file",
                    ))
                }
            }
        }
    };
    if cb.dimension() != dim {
        return Err(Error::Shape(format!(
            "codebook dimension {} does not match S = {dim}",
            cb.dimension()
        )));
    }
    Ok(cb)
}

fn reduce(
    value: f64,
    algorithms: &[Algorithm],
    outcomes: &[TrialOutcome],
    streams_per_trial: usize,
    se_odia_params: Option<SeOdiaParams>,
) -> Vec<PointResult> {
    let resamples: u64 = outcomes.iter().map(|o| u64::from(o.resamples)).sum();
    algorithms
        .iter()
        .enumerate()
        .map(|(a, &algorithm)| {
            let rates: Vec<f64> = outcomes.iter().map(|o| o.outcomes[a].sum_rate).collect();
            let interference: Vec<f64> = outcomes.iter().map(|o| o.outcomes[a].sum_interference).collect();
            let outages: usize = outcomes.iter().map(|o| o.outcomes[a].outages).sum();
            let (mean_sum_rate, se_sum_rate) = mean_and_se(&rates);
            let (mean_sum_interference, se_sum_interference) = mean_and_se(&interference);
            PointResult {
                value,
                algorithm,
                mean_sum_rate,
                se_sum_rate,
                mean_sum_interference,
                se_sum_interference,
                outage_rate: outages as f64 / (streams_per_trial * outcomes.len()) as f64,
                trials: outcomes.len(),
                resamples,
                se_odia_params: if algorithm == Algorithm::SeOdia {
                    se_odia_params
                } else {
                    None
                },
                baseline_zero_forcing: algorithm.is_baseline(),
            }
        })
        .collect()
}

fn sweep_in_pool(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let mut codebooks: BTreeMap<u32, Codebook> = BTreeMap::new();
    let gain_exponent = cfg
        .feedback
        .as_ref()
        .map_or(GainExponent::default(), |f| f.gain_exponent);
    let mut points = Vec::with_capacity(cfg.sweep.values.len() * cfg.algorithms.len());
    for (idx, &value) in cfg.sweep.values.iter().enumerate() {
        let settings = cfg.point(value)?;
        let network = settings.network;
        if cfg.algorithms.contains(&Algorithm::OdiaLf) {
            let fb = cfg.feedback.as_ref().expect("validated");
            let bits = settings.feedback_bits.expect("feedback present");
            if let std::collections::btree_map::Entry::Vacant(slot) = codebooks.entry(bits) {
                slot.insert(build_codebook(&fb.source, network.s, bits, cfg.master_seed)?);
            }
        }
        let codebook = settings.feedback_bits.and_then(|b| codebooks.get(&b));

        let point = (!cfg.sweep.common_random_numbers).then_some(idx);
        let se_odia = if cfg.algorithms.contains(&Algorithm::SeOdia) {
            match cfg.se_odia {
                SeOdiaMode::Autotune => Some(
                    search_in_pool(
                        &network,
                        &cfg.grid,
                        cfg.tuning_trials,
                        tuning_seed(cfg.master_seed, point.unwrap_or(usize::MAX)),
                        cfg.outage_policy,
                    )?
                    .best,
                ),
                _ => settings.fixed_params,
            }
        } else {
            None
        };

        let plan = TrialPlan {
            network,
            algorithms: &cfg.algorithms,
            se_odia,
            outage_policy: cfg.outage_policy,
            codebook,
            gain_exponent,
        };
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(&plan, cfg.master_seed, point, t))
            .collect::<Result<_>>()?;
        points.extend(reduce(
            value,
            &cfg.algorithms,
            &outcomes,
            network.k * network.s,
            se_odia,
        ));
    }
    Ok(SweepResult {
        schema_version: SCHEMA_VERSION,
        sweep_var: cfg.sweep.variable,
        seed: cfg.master_seed,
        config_hash: cfg.config_hash(),
        code_version: CODE_VERSION.to_string(),
        trials: cfg.trials,
        points,
    })
}

/// Runs every grid point of `cfg`. Output depends only on the configuration
/// and its seed, not on the worker count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    worker_pool(cfg.workers)?.install(|| sweep_in_pool(cfg))
}

/// Seed for auxiliary studies derived from the master seed.
pub fn study_seed(master: u64, tag: u64) -> u64 {
    mix_seed(master, &[0x7374_7564, tag])
}
