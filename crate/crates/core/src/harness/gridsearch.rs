//! Exhaustive search over SE-ODIA thresholds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ParamGrid;
use super::pipeline::{all_reports, evaluate_se_odia, trial_seed, with_resampling};
use super::sweep::{mean_and_se, worker_pool};
use crate::channel::NetworkConfig;
use crate::error::{Error, Result};
use crate::numerics::mix_seed;
use crate::scheduler::{OutagePolicy, SeOdiaParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub params: SeOdiaParams,
    pub mean_sum_rate: f64,
    pub se_sum_rate: f64,
    pub outage_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: SeOdiaParams,
    pub best_mean_sum_rate: f64,
    /// One row per triple, `η_I`-major then `η_D` then `α`.
    pub table: Vec<GridRow>,
    pub trials: usize,
    pub seed: u64,
}

impl GridSearchResult {
    /// One row per triple.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta_I,eta_D,alpha,mean_sum_rate,se_sum_rate,outage_rate,trials,seed\n");
        for row in &self.table {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.params.eta_i,
                row.params.eta_d,
                row.params.alpha,
                row.mean_sum_rate,
                row.se_sum_rate,
                row.outage_rate,
                self.trials,
                self.seed
            ));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Degenerate(format!("cannot encode result: {e}")))
    }

    /// Row for `params`, matched to 1e-12.
    pub fn row(&self, params: &SeOdiaParams) -> Option<&GridRow> {
        self.table.iter().find(|r| {
            (r.params.eta_i - params.eta_i).abs() < 1e-12
                && (r.params.eta_d - params.eta_d).abs() < 1e-12
                && (r.params.alpha - params.alpha).abs() < 1e-12
        })
    }
}

/// Search inside the current rayon pool. Every triple is scored on the same
/// realizations and selection streams, so the table compares thresholds,
/// not draws.
pub(crate) fn search_in_pool(
    network: &NetworkConfig,
    grid: &ParamGrid,
    trials: usize,
    seed: u64,
    policy: OutagePolicy,
) -> Result<GridSearchResult> {
    grid.validate()?;
    network.validate()?;
    if trials == 0 {
        return Err(Error::config("grid search needs at least 1 trial"));
    }
    let triples = grid.triples();
    let per_trial: Vec<Vec<(f64, usize)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let (scores, _) = with_resampling(
                network,
                |attempt| trial_seed(seed, None, t, attempt),
                |real, trial_seed| {
                    let reports = all_reports(real)?;
                    triples
                        .iter()
                        .map(|p| {
                            evaluate_se_odia(real, &reports, p, policy, trial_seed).map(|o| (o.sum_rate, o.outages))
                        })
                        .collect()
                },
            )?;
            Ok(scores)
        })
        .collect::<Result<_>>()?;

    let streams = (network.k * network.s * trials) as f64;
    let table: Vec<GridRow> = triples
        .iter()
        .enumerate()
        .map(|(idx, &params)| {
            let rates: Vec<f64> = per_trial.iter().map(|row| row[idx].0).collect();
            let outages: usize = per_trial.iter().map(|row| row[idx].1).sum();
            let (mean, se) = mean_and_se(&rates);
            GridRow {
                params,
                mean_sum_rate: mean,
                se_sum_rate: se,
                outage_rate: outages as f64 / streams,
            }
        })
        .collect();
    let best_row = table
        .iter()
        .fold(None::<&GridRow>, |best, r| match best {
            Some(b) if b.mean_sum_rate >= r.mean_sum_rate => Some(b),
            _ => Some(r),
        })
        .expect("grid is nonempty");
    Ok(GridSearchResult {
        best: best_row.params,
        best_mean_sum_rate: best_row.mean_sum_rate,
        table,
        trials,
        seed,
    })
}

/// Mean SE-ODIA sum-rate for every threshold triple of `grid` and the first
/// triple attaining the maximum. `workers = 0` uses every core.
pub fn grid_search_se_odia(
    network: &NetworkConfig,
    grid: &ParamGrid,
    trials: usize,
    seed: u64,
    policy: OutagePolicy,
    workers: usize,
) -> Result<GridSearchResult> {
    worker_pool(workers)?.install(|| search_in_pool(network, grid, trials, seed, policy))
}

/// Seed of the tuning search at sweep point `point`, independent of the
/// evaluation draws.
pub fn tuning_seed(master: u64, point: usize) -> u64 {
    mix_seed(master, &[0x7475_6e65, point as u64])
}
