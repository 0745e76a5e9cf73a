//! Statistical studies behind the `validate` subcommand.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepVariable};
use super::sweep::{run_sweep, study_seed, worker_pool};
use crate::error::{Error, Result};
use crate::scheduler::{Algorithm, SeOdiaParams};
use crate::validation::{
    chi_squared_gof, decay_regression, eligibility_probe, fit_tail_exponent, metric_samples, projection_norm_samples,
    EligibilityReport, TailExponentReport,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    Tail,
    Chi2,
    Decay,
    Eligibility,
}

impl std::str::FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tail" => Ok(StudyKind::Tail),
            "chi2" => Ok(StudyKind::Chi2),
            "decay" => Ok(StudyKind::Decay),
            "eligibility" => Ok(StudyKind::Eligibility),
            other => Err(Error::config(format!("unknown study `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquaredReport {
    pub step: usize,
    pub dof: usize,
    pub samples: usize,
    pub ks_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub algorithm: Algorithm,
    /// `(N, mean sum-interference)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    /// `-1 / ((K-1)S - L + 1)`.
    pub theoretical_odia_slope: f64,
    pub series: Vec<DecaySeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "snake_case")]
pub enum StudyReport {
    Tail(TailExponentReport),
    Chi2(ChiSquaredReport),
    Decay(DecayReport),
    Eligibility(EligibilityReport),
}

impl StudyReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Degenerate(format!("cannot encode report: {e}")))
    }

    /// Plain CSV table of the headline numbers.
    pub fn to_csv(&self) -> String {
        match self {
            StudyReport::Tail(r) => format!(
                "fitted_exponent,theoretical_exponent,r_squared,samples\n{},{},{},{}\n",
                r.fitted_exponent, r.theoretical_exponent, r.r_squared, r.sample_count
            ),
            StudyReport::Chi2(r) => format!(
                "step,dof,samples,ks_distance\n{},{},{},{}\n",
                r.step, r.dof, r.samples, r.ks_distance
            ),
            StudyReport::Decay(r) => {
                let mut out = String::from("algorithm,n_users,mean_sum_interference,slope\n");
                for s in &r.series {
                    for (n, v) in &s.points {
                        out.push_str(&format!("{},{},{},{}\n", s.algorithm, n, v, s.slope));
                    }
                }
                out
            }
            StudyReport::Eligibility(r) => {
                let mut out = String::from("step,pr_c1,pr_c2,pr_c2_theory,p_s,mean_pool_size\n");
                for s in &r.steps {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        s.step, s.pr_c1, s.pr_c2, s.pr_c2_theory, s.p_s, s.mean_pool_size
                    ));
                }
                out
            }
        }
    }
}

/// Tail exponent of the ODIA metric at the nominal network.
pub fn tail_study(cfg: &ExperimentConfig) -> Result<TailExponentReport> {
    let samples = metric_samples(&cfg.network, cfg.validation_samples, study_seed(cfg.master_seed, 1))?;
    fit_tail_exponent(&samples, &cfg.network)
}

/// KS distance of `‖b_s‖²` at `validate.step` to chi-squared.
pub fn chi2_study(cfg: &ExperimentConfig) -> Result<ChiSquaredReport> {
    let step = cfg.validation_step;
    let samples = projection_norm_samples(
        &cfg.network,
        step,
        cfg.validation_samples,
        study_seed(cfg.master_seed, 2),
    )?;
    let dof = 2 * (cfg.network.s - step + 1);
    Ok(ChiSquaredReport {
        step,
        dof,
        samples: samples.len(),
        ks_distance: chi_squared_gof(&samples, dof)?,
    })
}

/// Log-log slope of mean sum-interference against `N` for every configured
/// algorithm. The sweep must run over `n_users`.
pub fn decay_study(cfg: &ExperimentConfig) -> Result<DecayReport> {
    if cfg.sweep.variable != SweepVariable::NUsers {
        return Err(Error::config("the decay study sweeps n_users"));
    }
    let result = run_sweep(cfg)?;
    let series = cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let points: Vec<(f64, f64)> = result
                .points
                .iter()
                .filter(|p| p.algorithm == algorithm)
                .map(|p| (p.value, p.mean_sum_interference))
                .collect();
            let slope = decay_regression(&points)?;
            Ok(DecaySeries {
                algorithm,
                points,
                slope,
            })
        })
        .collect::<Result<_>>()?;
    let tau = cfg.network.tail_exponent();
    Ok(DecayReport {
        theoretical_odia_slope: -1.0 / tau as f64,
        series,
    })
}

/// Empirical SE-ODIA eligibility at the nominal point.
pub fn eligibility_study(cfg: &ExperimentConfig) -> Result<EligibilityReport> {
    let params = cfg
        .point(cfg.sweep.values[0])?
        .fixed_params
        .unwrap_or_else(SeOdiaParams::unconstrained);
    eligibility_probe(
        &cfg.network,
        &params,
        cfg.validation_trials,
        study_seed(cfg.master_seed, 3),
    )
}

pub fn run_study(kind: StudyKind, cfg: &ExperimentConfig) -> Result<StudyReport> {
    worker_pool(cfg.workers)?.install(|| {
        Ok(match kind {
            StudyKind::Tail => StudyReport::Tail(tail_study(cfg)?),
            StudyKind::Chi2 => StudyReport::Chi2(chi2_study(cfg)?),
            StudyKind::Decay => StudyReport::Decay(decay_study(cfg)?),
            StudyKind::Eligibility => StudyReport::Eligibility(eligibility_study(cfg)?),
        })
    })
}
