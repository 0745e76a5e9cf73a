//! User selection: ODIA (smallest leakage), SE-ODIA (thresholded
//! semiorthogonal selection) and the max-SNR / min-INR baselines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::numerics::{svd, ComplexMatrix, ComplexVector, Rng};
use crate::receiver::{optimal_beamformer, stack_interference_matrix, UserReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Odia,
    SeOdia,
    /// ODIA selection with quantized effective-channel feedback.
    OdiaLf,
    MaxSnr,
    MinInr,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Odia,
        Algorithm::SeOdia,
        Algorithm::OdiaLf,
        Algorithm::MaxSnr,
        Algorithm::MinInr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Odia => "odia",
            Algorithm::SeOdia => "se_odia",
            Algorithm::OdiaLf => "odia_lf",
            Algorithm::MaxSnr => "max_snr",
            Algorithm::MinInr => "min_inr",
        }
    }

    /// Baselines are selection rules only; their data phase reuses ZF.
    pub fn is_baseline(self) -> bool {
        matches!(self, Algorithm::MaxSnr | Algorithm::MinInr)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == key)
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}`")))
    }
}

/// What SE-ODIA does at a step where no pool member meets both thresholds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutagePolicy {
    /// Take the smallest-η user of the pool, or of all unselected users when
    /// the pool is empty.
    #[default]
    FallbackMinEta,
    /// Leave the stream unused.
    SkipStream,
}

impl FromStr for OutagePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "fallback-min-eta" => Ok(OutagePolicy::FallbackMinEta),
            "skip-stream" => Ok(OutagePolicy::SkipStream),
            other => Err(Error::config(format!("unknown outage policy `{other}`"))),
        }
    }
}

impl fmt::Display for OutagePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutagePolicy::FallbackMinEta => "fallback-min-eta",
            OutagePolicy::SkipStream => "skip-stream",
        })
    }
}

/// SE-ODIA thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeOdiaParams {
    /// Interference threshold on η (condition C1); may be infinite.
    #[serde(with = "crate::serde_float")]
    pub eta_i: f64,
    /// Desired-gain threshold on `‖b̃_s‖²` (condition C2).
    pub eta_d: f64,
    /// Semiorthogonality threshold for pool membership.
    pub alpha: f64,
}

impl SeOdiaParams {
    pub fn new(eta_i: f64, eta_d: f64, alpha: f64) -> Result<Self> {
        let p = SeOdiaParams { eta_i, eta_d, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta_i.is_nan() || self.eta_i < 0.0 {
            return Err(Error::config(format!("eta_I must be nonnegative, got {}", self.eta_i)));
        }
        if !(self.eta_d.is_finite() && self.eta_d >= 0.0) {
            return Err(Error::config(format!(
                "eta_D must be finite and nonnegative, got {}",
                self.eta_d
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        Ok(())
    }

    /// No thresholds at all: uniform random selection of distinct users.
    pub fn unconstrained() -> Self {
        SeOdiaParams {
            eta_i: f64::INFINITY,
            eta_d: 0.0,
            alpha: 1.0,
        }
    }

    /// Asymptotic schedule `η_D = ε_D ln SNR`, `η_I = ε_I / SNR`.
    pub fn theorem4(eps_d: f64, eps_i: f64, snr: f64, alpha: f64) -> Result<Self> {
        if !(eps_d > 0.0 && eps_i > 0.0) {
            return Err(Error::config("theorem4 preset needs positive epsilons"));
        }
        if snr.is_nan() || snr <= 1.0 {
            return Err(Error::config("theorem4 preset needs SNR above 0 dB"));
        }
        SeOdiaParams::new(eps_i / snr, eps_d * snr.ln(), alpha)
    }

    /// Settings under which SE-ODIA reproduces ODIA for one cell:
    /// `η_D = 0`, `α = 1`, `η_I = min_j η_j`.
    pub fn odia_compat(reports: &[UserReport]) -> Self {
        let eta_i = reports.iter().map(|r| r.metric).fold(f64::INFINITY, f64::min);
        SeOdiaParams {
            eta_i,
            eta_d: 0.0,
            alpha: 1.0,
        }
    }

    /// Denominator `1 + (S-1)⁴α² / (1 - (S-1)α²)` of the effective-gain
    /// bound; `None` when `(S-1)α² ≥ 1`.
    pub fn gain_bound_factor(&self, s: usize) -> Option<f64> {
        let sm1 = s.saturating_sub(1) as f64;
        let a2 = self.alpha * self.alpha;
        let denom = 1.0 - sm1 * a2;
        (denom > 0.0).then(|| 1.0 + sm1.powi(4) * a2 / denom)
    }
}

/// Accepted projection directions `b_1, …, b_{s-1}`.
#[derive(Clone, Debug, Default)]
pub struct OrthogonalBasisState {
    vectors: Vec<ComplexVector>,
}

impl OrthogonalBasisState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vectors(&self) -> &[ComplexVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn push(&mut self, b: ComplexVector) {
        self.vectors.push(b);
    }
}

/// `b̃ = f - Σ (b^H f / ‖b‖²) b` over the basis vectors.
pub fn orthogonal_projection(f: &ComplexVector, basis: &OrthogonalBasisState) -> ComplexVector {
    let mut out = f.clone();
    for b in basis.vectors() {
        let norm_sq = b.norm_sqr();
        if norm_sq > 0.0 {
            let coeff = b.dot(f) / norm_sq;
            out.sub_scaled(coeff, b);
        }
    }
    out
}

/// `|f^H b| / (‖f‖ ‖b‖)`.
pub fn coherence(f: &ComplexVector, b: &ComplexVector) -> f64 {
    let denom = f.norm() * b.norm();
    if denom > 0.0 {
        f.dot(b).norm() / denom
    } else {
        0.0
    }
}

/// Diagnostics of one SE-ODIA selection step.
#[derive(Clone, Debug, PartialEq)]
pub struct SeOdiaStep {
    /// `|N_s|`.
    pub pool_size: usize,
    /// Pool members meeting C1.
    pub c1_count: usize,
    /// Pool members meeting C2.
    pub c2_count: usize,
    /// Pool members meeting both.
    pub eligible_count: usize,
    pub selected: Option<usize>,
    /// Whether the selection came from the outage policy.
    pub fallback: bool,
    /// `b_s` of the selected user.
    pub projection: Option<ComplexVector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleDecision {
    pub cell: usize,
    pub algorithm: Algorithm,
    /// Selected users in selection order; distinct.
    pub selected: Vec<usize>,
    /// Receive filter each selected user applies, aligned with `selected`.
    pub beamformers: Vec<ComplexVector>,
    /// Streams filled by, or lost to, the outage policy.
    pub outage_count: usize,
    /// Per-step record; populated only by SE-ODIA.
    pub steps: Vec<SeOdiaStep>,
}

impl ScheduleDecision {
    fn from_reports(cell: usize, algorithm: Algorithm, selected: Vec<usize>, reports: &[UserReport]) -> Self {
        let beamformers = selected.iter().map(|&j| reports[j].beamformer.clone()).collect();
        ScheduleDecision {
            cell,
            algorithm,
            selected,
            beamformers,
            outage_count: 0,
            steps: Vec::new(),
        }
    }
}

fn cell_of(reports: &[UserReport]) -> usize {
    reports.first().map_or(0, |r| r.cell)
}

/// Indices of the `s` smallest metrics, ties by ascending index.
pub fn smallest_metric_indices(metrics: &[f64], s: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..metrics.len()).collect();
    order.sort_by(|&a, &b| metrics[a].total_cmp(&metrics[b]).then(a.cmp(&b)));
    order.truncate(s);
    order
}

/// The `s` users with the smallest η, in ascending-metric order.
pub fn schedule_odia(reports: &[UserReport], s: usize) -> Result<ScheduleDecision> {
    schedule_odia_tagged(reports, s, Algorithm::Odia)
}

pub(crate) fn schedule_odia_tagged(reports: &[UserReport], s: usize, algorithm: Algorithm) -> Result<ScheduleDecision> {
    if reports.len() < s {
        return Err(Error::config(format!(
            "{} users cannot fill {s} streams",
            reports.len()
        )));
    }
    let metrics: Vec<f64> = reports.iter().map(|r| r.metric).collect();
    let selected = smallest_metric_indices(&metrics, s);
    Ok(ScheduleDecision::from_reports(
        cell_of(reports),
        algorithm,
        selected,
        reports,
    ))
}

/// SE-ODIA selection of up to `s` users from exact reports.
pub fn schedule_se_odia(
    reports: &[UserReport],
    s: usize,
    params: &SeOdiaParams,
    policy: OutagePolicy,
    rng: &mut Rng,
) -> Result<ScheduleDecision> {
    params.validate()?;
    if reports.len() < s {
        return Err(Error::config(format!(
            "{} users cannot fill {s} streams",
            reports.len()
        )));
    }
    let channels: Vec<&ComplexVector> = reports
        .iter()
        .map(|r| {
            r.effective_channel
                .exact()
                .ok_or_else(|| Error::Degenerate("SE-ODIA needs exact effective channels".into()))
        })
        .collect::<Result<_>>()?;

    let mut pool: Vec<usize> = (0..reports.len()).collect();
    let mut taken = vec![false; reports.len()];
    let mut basis = OrthogonalBasisState::new();
    let mut selected = Vec::with_capacity(s);
    let mut outage_count = 0;
    let mut steps = Vec::with_capacity(s);

    for _ in 0..s {
        let projections: Vec<ComplexVector> = pool
            .iter()
            .map(|&j| orthogonal_projection(channels[j], &basis))
            .collect();
        let passes_c1: Vec<bool> = pool.iter().map(|&j| reports[j].metric <= params.eta_i).collect();
        let passes_c2: Vec<bool> = projections.iter().map(|b| b.norm_sqr() >= params.eta_d).collect();
        let eligible: Vec<usize> = (0..pool.len()).filter(|&p| passes_c1[p] && passes_c2[p]).collect();

        let mut step = SeOdiaStep {
            pool_size: pool.len(),
            c1_count: passes_c1.iter().filter(|&&x| x).count(),
            c2_count: passes_c2.iter().filter(|&&x| x).count(),
            eligible_count: eligible.len(),
            selected: None,
            fallback: false,
            projection: None,
        };

        let choice = if !eligible.is_empty() {
            let p = eligible[if eligible.len() == 1 {
                0
            } else {
                rng.below(eligible.len())
            }];
            Some((pool[p], projections[p].clone()))
        } else {
            outage_count += 1;
            step.fallback = true;
            match policy {
                OutagePolicy::SkipStream => None,
                OutagePolicy::FallbackMinEta => {
                    let candidates: Vec<usize> = if pool.is_empty() {
                        (0..reports.len()).filter(|&j| !taken[j]).collect()
                    } else {
                        pool.clone()
                    };
                    candidates
                        .into_iter()
                        .min_by(|&a, &b| reports[a].metric.total_cmp(&reports[b].metric).then(a.cmp(&b)))
                        .map(|j| (j, orthogonal_projection(channels[j], &basis)))
                }
            }
        };

        if let Some((user, b)) = choice {
            taken[user] = true;
            selected.push(user);
            step.selected = Some(user);
            step.projection = Some(b.clone());
            pool.retain(|&j| j != user && coherence(channels[j], &b) < params.alpha);
            basis.push(b);
        }
        steps.push(step);
    }

    let mut decision = ScheduleDecision::from_reports(cell_of(reports), Algorithm::SeOdia, selected, reports);
    decision.outage_count = outage_count;
    decision.steps = steps;
    Ok(decision)
}

/// Per-user max-SNR receive filter: dominant left-singular vector of
/// `H_i^{[i,j]} P_i` and the metric `σ_max²`.
pub fn max_snr_beamformer(real: &NetworkRealization, cell: usize, user: usize) -> Result<(ComplexVector, f64)> {
    let hp = real.channel(cell, user, cell).matmul(real.reference_beamformer(cell));
    let d = svd(&hp)?;
    let sigma = d.largest();
    Ok((d.left.column(0), sigma * sigma))
}

/// The `S` users with the largest `σ_max²`, ties by ascending index.
pub fn schedule_max_snr(real: &NetworkRealization, cell: usize) -> Result<ScheduleDecision> {
    let cfg = real.config();
    let filters = (0..cfg.n)
        .map(|j| max_snr_beamformer(real, cell, j))
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..cfg.n).collect();
    order.sort_by(|&a, &b| filters[b].1.total_cmp(&filters[a].1).then(a.cmp(&b)));
    order.truncate(cfg.s);
    let beamformers = order.iter().map(|&j| filters[j].0.clone()).collect();
    Ok(ScheduleDecision {
        cell,
        algorithm: Algorithm::MaxSnr,
        selected: order,
        beamformers,
        outage_count: 0,
        steps: Vec::new(),
    })
}

/// Leakage matrix for stream `m`: the home-cell block with column `m` of
/// `P_i` removed, stacked above the inter-cell blocks;
/// `((K-1)S + S-1) × L`.
pub fn min_inr_matrix(real: &NetworkRealization, cell: usize, user: usize, m: usize) -> ComplexMatrix {
    let cfg = real.config();
    let inter = stack_interference_matrix(real, cell, user);
    let mut blocks = Vec::with_capacity(2);
    if cfg.s > 1 {
        let p_tilde = real.reference_beamformer(cell).without_column(m);
        blocks.push(real.channel(cell, user, cell).matmul(&p_tilde).adjoint());
    }
    if inter.rows() > 0 {
        blocks.push(inter);
    }
    if blocks.is_empty() {
        return ComplexMatrix::zeros(0, cfg.l);
    }
    ComplexMatrix::stack(&blocks).expect("blocks share the user antenna count")
}

/// Min-INR receive filter and metric for `(user, stream m)`.
pub fn min_inr_beamformer(
    real: &NetworkRealization,
    cell: usize,
    user: usize,
    m: usize,
) -> Result<(ComplexVector, f64)> {
    optimal_beamformer(&min_inr_matrix(real, cell, user, m))
}

/// Greedy per-stream assignment: stream `m = 1..S` takes the unassigned user
/// with the smallest stream-`m` metric.
pub fn schedule_min_inr(real: &NetworkRealization, cell: usize) -> Result<ScheduleDecision> {
    let cfg = real.config();
    let mut taken = vec![false; cfg.n];
    let mut selected = Vec::with_capacity(cfg.s);
    let mut beamformers = Vec::with_capacity(cfg.s);
    for m in 0..cfg.s {
        let mut best: Option<(usize, ComplexVector, f64)> = None;
        for j in (0..cfg.n).filter(|&j| !taken[j]) {
            let (u, metric) = min_inr_beamformer(real, cell, j, m)?;
            if best.as_ref().is_none_or(|b| metric < b.2) {
                best = Some((j, u, metric));
            }
        }
        let (j, u, _) = best.ok_or_else(|| Error::config("not enough users for min-INR"))?;
        taken[j] = true;
        selected.push(j);
        beamformers.push(u);
    }
    Ok(ScheduleDecision {
        cell,
        algorithm: Algorithm::MinInr,
        selected,
        beamformers,
        outage_count: 0,
        steps: Vec::new(),
    })
}
