//! One Monte Carlo trial: generate, report, schedule, precode, measure.

use crate::channel::{generate_realization, NetworkConfig, NetworkRealization};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::metrics::trial_metrics;
use crate::numerics::{ComplexMatrix, ComplexVector, Rng};
use crate::precoder::{quantized_precoder, zero_forcing_precoder_for, PrecoderSet};
use crate::receiver::{
    cell_reports, effective_channel, quantize_channel, EffectiveChannel, FeedbackMode, GainExponent, UserReport,
};
use crate::scheduler::{
    schedule_max_snr, schedule_min_inr, schedule_odia_tagged, schedule_se_odia, Algorithm, OutagePolicy,
    ScheduleDecision, SeOdiaParams,
};

/// Resampling attempts per trial before a numerical failure is surfaced.
pub const MAX_RESAMPLES: u32 = 100;

const CHANNEL_STREAM: u64 = 0x6368_616e;
const SELECTION_STREAM: u64 = 0x7365_6c65;
/// Stands in for the point index when trials share draws across points.
const SHARED_POINT: u64 = u64::MAX;

/// Everything one trial needs besides its seed.
#[derive(Clone, Copy, Debug)]
pub struct TrialPlan<'a> {
    pub network: NetworkConfig,
    pub algorithms: &'a [Algorithm],
    /// Thresholds used by SE-ODIA; required when it is listed.
    pub se_odia: Option<SeOdiaParams>,
    pub outage_policy: OutagePolicy,
    /// Codebook used by ODIA-LF.
    pub codebook: Option<&'a Codebook>,
    pub gain_exponent: GainExponent,
}

/// Per-algorithm result of one trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgorithmOutcome {
    pub sum_rate: f64,
    /// `Σ (inter + residual) · SNR` over scheduled users.
    pub sum_interference: f64,
    /// Streams filled by, or lost to, the outage policy, summed over cells.
    pub outages: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    /// Aligned with [`TrialPlan::algorithms`].
    pub outcomes: Vec<AlgorithmOutcome>,
    /// Realizations discarded after a numerical failure.
    pub resamples: u32,
}

/// Seed of trial `trial`, attempt `attempt` at sweep point `point`
/// (`None` when every point shares the same draws).
pub fn trial_seed(master: u64, point: Option<usize>, trial: usize, attempt: u32) -> u64 {
    let point = point.map_or(SHARED_POINT, |p| p as u64);
    crate::numerics::mix_seed(master, &[CHANNEL_STREAM, point, trial as u64, u64::from(attempt)])
}

/// Runs `body` on fresh realizations until it succeeds or a non-numerical
/// error occurs. Returns the value and the number of discarded draws.
pub fn with_resampling<T>(
    network: &NetworkConfig,
    seed_of: impl Fn(u32) -> u64,
    mut body: impl FnMut(&NetworkRealization, u64) -> Result<T>,
) -> Result<(T, u32)> {
    let mut last = None;
    for attempt in 0..=MAX_RESAMPLES {
        let seed = seed_of(attempt);
        let real = generate_realization(network, &mut Rng::new(seed));
        match body(&real, seed) {
            Ok(v) => return Ok((v, attempt)),
            Err(e) if e.is_numerical() => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

/// Exact reports for every cell, indexed by cell.
pub fn all_reports(real: &NetworkRealization) -> Result<Vec<Vec<UserReport>>> {
    (0..real.config().k)
        .map(|i| cell_reports(real, i, FeedbackMode::Exact))
        .collect()
}

fn empty_precoder(cell: usize, s: usize) -> PrecoderSet {
    PrecoderSet {
        cell,
        matrix: ComplexMatrix::zeros(s, 0),
        gains: Vec::new(),
        basis: ComplexMatrix::zeros(0, s),
    }
}

fn exact_channels(reports: &[UserReport], selected: &[usize]) -> Result<Vec<ComplexVector>> {
    selected
        .iter()
        .map(|&j| {
            reports[j]
                .effective_channel
                .exact()
                .cloned()
                .ok_or_else(|| Error::Degenerate("expected exact feedback".into()))
        })
        .collect()
}

fn zf_or_empty(cell: usize, s: usize, channels: &[ComplexVector]) -> Result<PrecoderSet> {
    if channels.is_empty() {
        Ok(empty_precoder(cell, s))
    } else {
        zero_forcing_precoder_for(cell, channels)
    }
}

fn measure(
    real: &NetworkRealization,
    decisions: &[ScheduleDecision],
    precoders: &[PrecoderSet],
) -> Result<AlgorithmOutcome> {
    let m = trial_metrics(real, decisions, precoders)?;
    if !(m.sum_rate.is_finite() && m.sum_interference.is_finite()) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    Ok(AlgorithmOutcome {
        sum_rate: m.sum_rate,
        sum_interference: m.sum_interference,
        outages: decisions.iter().map(|d| d.outage_count).sum(),
    })
}

/// SE-ODIA in every cell with exact-CSI ZF. The selection stream depends only
/// on the trial seed and the cell, so different thresholds see the same
/// random tie-breaking.
pub fn evaluate_se_odia(
    real: &NetworkRealization,
    reports: &[Vec<UserReport>],
    params: &SeOdiaParams,
    policy: OutagePolicy,
    seed: u64,
) -> Result<AlgorithmOutcome> {
    let cfg = real.config();
    let mut decisions = Vec::with_capacity(cfg.k);
    let mut precoders = Vec::with_capacity(cfg.k);
    for (i, cell) in reports.iter().enumerate() {
        let mut rng = Rng::derive(seed, &[SELECTION_STREAM, i as u64]);
        let d = schedule_se_odia(cell, cfg.s, params, policy, &mut rng)?;
        precoders.push(zf_or_empty(i, cfg.s, &exact_channels(cell, &d.selected)?)?);
        decisions.push(d);
    }
    measure(real, &decisions, &precoders)
}

fn evaluate_odia(real: &NetworkRealization, reports: &[Vec<UserReport>]) -> Result<AlgorithmOutcome> {
    let cfg = real.config();
    let mut decisions = Vec::with_capacity(cfg.k);
    let mut precoders = Vec::with_capacity(cfg.k);
    for (i, cell) in reports.iter().enumerate() {
        let d = schedule_odia_tagged(cell, cfg.s, Algorithm::Odia)?;
        precoders.push(zero_forcing_precoder_for(i, &exact_channels(cell, &d.selected)?)?);
        decisions.push(d);
    }
    measure(real, &decisions, &precoders)
}

/// ODIA selection on the fed-back scalar metric, precoding from quantized
/// directions. Quantization does not change the selection, so only the
/// selected users are quantized.
fn evaluate_odia_lf(
    real: &NetworkRealization,
    reports: &[Vec<UserReport>],
    cb: &Codebook,
    exponent: GainExponent,
) -> Result<AlgorithmOutcome> {
    let cfg = real.config();
    let mut decisions = Vec::with_capacity(cfg.k);
    let mut precoders = Vec::with_capacity(cfg.k);
    for (i, cell) in reports.iter().enumerate() {
        let mut d = schedule_odia_tagged(cell, cfg.s, Algorithm::OdiaLf)?;
        let mut quantized: Vec<UserReport> = Vec::with_capacity(cfg.s);
        let mut keep = Vec::with_capacity(cfg.s);
        for &j in &d.selected {
            let r = &cell[j];
            let f = r.effective_channel.exact().expect("reports are exact");
            let q = quantize_channel(f, cb)?;
            let duplicate = quantized
                .iter()
                .any(|o| matches!(o.effective_channel, EffectiveChannel::Quantized { index, .. } if index == q.index));
            keep.push(!duplicate);
            if !duplicate {
                quantized.push(UserReport {
                    effective_channel: EffectiveChannel::Quantized {
                        index: q.index,
                        gain: q.gain,
                    },
                    ..r.clone()
                });
            }
        }
        // Users sharing a codeword give parallel rows of F̂; only the first is served.
        if keep.iter().any(|k| !k) {
            let mut flags = keep.iter();
            d.selected.retain(|_| *flags.next().expect("aligned"));
            let mut flags = keep.iter();
            d.beamformers.retain(|_| *flags.next().expect("aligned"));
            d.outage_count = keep.iter().filter(|k| !**k).count();
        }
        let refs: Vec<&UserReport> = quantized.iter().collect();
        precoders.push(quantized_precoder(i, &refs, cb, exponent)?);
        decisions.push(d);
    }
    measure(real, &decisions, &precoders)
}

/// Baselines: own selection and receive filters, then ZF on the resulting
/// effective channels.
fn evaluate_baseline(real: &NetworkRealization, algorithm: Algorithm) -> Result<AlgorithmOutcome> {
    let cfg = real.config();
    let mut decisions = Vec::with_capacity(cfg.k);
    let mut precoders = Vec::with_capacity(cfg.k);
    for i in 0..cfg.k {
        let d = match algorithm {
            Algorithm::MaxSnr => schedule_max_snr(real, i)?,
            Algorithm::MinInr => schedule_min_inr(real, i)?,
            other => unreachable!("{other} is not a baseline"),
        };
        let channels: Vec<ComplexVector> = d
            .selected
            .iter()
            .zip(&d.beamformers)
            .map(|(&j, u)| effective_channel(real, i, j, u))
            .collect();
        precoders.push(zero_forcing_precoder_for(i, &channels)?);
        decisions.push(d);
    }
    measure(real, &decisions, &precoders)
}

/// Every algorithm of `plan` on one realization.
pub fn evaluate_realization(
    real: &NetworkRealization,
    seed: u64,
    plan: &TrialPlan<'_>,
) -> Result<Vec<AlgorithmOutcome>> {
    let needs_reports = plan
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::Odia | Algorithm::SeOdia | Algorithm::OdiaLf));
    let reports = if needs_reports { all_reports(real)? } else { Vec::new() };
    plan.algorithms
        .iter()
        .map(|&a| match a {
            Algorithm::Odia => evaluate_odia(real, &reports),
            Algorithm::OdiaLf => {
                let cb = plan.codebook.ok_or_else(|| Error::config("odia_lf needs a codebook"))?;
                evaluate_odia_lf(real, &reports, cb, plan.gain_exponent)
            }
            Algorithm::SeOdia => {
                let params = plan.se_odia.ok_or_else(|| Error::config("se_odia needs thresholds"))?;
                evaluate_se_odia(real, &reports, &params, plan.outage_policy, seed)
            }
            Algorithm::MaxSnr | Algorithm::MinInr => evaluate_baseline(real, a),
        })
        .collect()
}

/// Runs one trial, resampling the realization on numerical failure.
pub fn run_trial(plan: &TrialPlan<'_>, master: u64, point: Option<usize>, trial: usize) -> Result<TrialOutcome> {
    let (outcomes, resamples) = with_resampling(
        &plan.network,
        |attempt| trial_seed(master, point, trial, attempt),
        |real, seed| evaluate_realization(real, seed, plan),
    )?;
    Ok(TrialOutcome { outcomes, resamples })
}
