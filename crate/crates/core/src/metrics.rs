//! Signal-level accounting after scheduling and precoding: SINR, rate,
//! interference decomposition and DoF slope estimation.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkRealization;
use crate::error::{Error, Result};
use crate::precoder::PrecoderSet;
use crate::receiver::cross_channel;
use crate::scheduler::ScheduleDecision;

/// `log₂(1 + γ / (S/snr + inter + residual))`.
pub fn per_user_rate(gamma: f64, inter_cell: f64, residual_intra: f64, snr: f64, s: usize) -> f64 {
    let denom = s as f64 / snr + inter_cell + residual_intra;
    (gamma / denom).ln_1p() / std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    pub cell: usize,
    pub user: usize,
    pub rate: f64,
    /// `|f_i^H v_j|²` through the applied precoder.
    pub gamma: f64,
    /// `Σ_{k≠i} Σ_s |f_k^H v^{[k,s]}|²`.
    pub inter_cell_interference: f64,
    /// `Σ_{s≠j} |f_i^H v^{[i,s]}|²`.
    pub residual_intra_cell: f64,
    /// `I = S · Σ_{k≠i} ‖f_k‖² · SNR`.
    pub normalized_interference: f64,
    /// `Σ_{k≠i} ‖f_k‖²` for the applied receive filter.
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub users: Vec<UserMetrics>,
    pub sum_rate: f64,
    /// `Σ (inter + residual) · SNR` over scheduled users.
    pub sum_interference: f64,
    /// `sum_interference` divided by the number of scheduled users.
    pub normalized_sum_interference: f64,
    /// `Σ I` over scheduled users.
    pub sum_normalized_interference: f64,
}

impl TrialMetrics {
    pub fn scheduled_users(&self) -> usize {
        self.users.len()
    }
}

/// Evaluates every scheduled user against the precoders actually applied in
/// every cell. `decisions[i]` and `precoders[i]` belong to cell `i`.
pub fn trial_metrics(
    real: &NetworkRealization,
    decisions: &[ScheduleDecision],
    precoders: &[PrecoderSet],
) -> Result<TrialMetrics> {
    let cfg = real.config();
    if decisions.len() != cfg.k || precoders.len() != cfg.k {
        return Err(Error::Shape(format!(
            "need one decision and one precoder per cell ({}), got {} and {}",
            cfg.k,
            decisions.len(),
            precoders.len()
        )));
    }
    for (i, (d, p)) in decisions.iter().zip(precoders).enumerate() {
        if d.cell != i || p.cell != i || d.selected.len() != p.streams() {
            return Err(Error::Shape(format!("decision and precoder of cell {i} disagree")));
        }
    }
    let columns: Vec<Vec<_>> = precoders
        .iter()
        .map(|p| (0..p.streams()).map(|s| p.column(s)).collect())
        .collect();

    let mut users = Vec::new();
    for (i, d) in decisions.iter().enumerate() {
        for (slot, (&j, u)) in d.selected.iter().zip(&d.beamformers).enumerate() {
            let mut signal = 0.0;
            let mut residual = 0.0;
            let mut inter = 0.0;
            let mut leakage = 0.0;
            for k in 0..cfg.k {
                let f = cross_channel(real, i, j, k, u);
                if k == i {
                    for (s, v) in columns[i].iter().enumerate() {
                        let p = f.dot(v).norm_sqr();
                        if s == slot {
                            signal = p;
                        } else {
                            residual += p;
                        }
                    }
                } else {
                    leakage += f.norm_sqr();
                    inter += columns[k].iter().map(|v| f.dot(v).norm_sqr()).sum::<f64>();
                }
            }
            users.push(UserMetrics {
                cell: i,
                user: j,
                rate: per_user_rate(signal, inter, residual, cfg.snr, cfg.s),
                gamma: signal,
                inter_cell_interference: inter,
                residual_intra_cell: residual,
                normalized_interference: cfg.s as f64 * leakage * cfg.snr,
                leakage,
            });
        }
    }
    let sum_rate = users.iter().map(|u| u.rate).sum();
    let sum_interference: f64 = users
        .iter()
        .map(|u| (u.inter_cell_interference + u.residual_intra_cell) * cfg.snr)
        .sum();
    let normalized_sum_interference = if users.is_empty() {
        0.0
    } else {
        sum_interference / users.len() as f64
    };
    let sum_normalized_interference = users.iter().map(|u| u.normalized_interference).sum();
    Ok(TrialMetrics {
        users,
        sum_rate,
        sum_interference,
        normalized_sum_interference,
        sum_normalized_interference,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DofEstimate {
    /// Sum-rate increase per doubling of SNR.
    pub slope: f64,
    pub intercept: f64,
    pub snr_grid: Vec<f64>,
    pub sum_rates: Vec<f64>,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (my - slope * mx, slope, r2)
}

/// Least-squares slope of sum-rate against `log₂ snr`.
pub fn dof_slope(snr_grid: &[f64], sum_rates: &[f64]) -> Result<DofEstimate> {
    if snr_grid.len() != sum_rates.len() {
        return Err(Error::config("SNR grid and sum-rate list differ in length"));
    }
    if snr_grid.len() < 3 {
        return Err(Error::config("DoF slope needs at least 3 SNR points"));
    }
    if snr_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) || sum_rates.iter().any(|r| !r.is_finite()) {
        return Err(Error::config("DoF inputs must be finite with positive SNRs"));
    }
    if snr_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("SNR grid must be strictly increasing"));
    }
    if snr_grid[snr_grid.len() - 1] / snr_grid[0] < 100.0 * (1.0 - 1e-12) {
        return Err(Error::config("SNR grid must span at least 20 dB"));
    }
    let x: Vec<f64> = snr_grid.iter().map(|s| s.log2()).collect();
    let (intercept, slope, _) = linear_fit(&x, sum_rates);
    Ok(DofEstimate {
        slope,
        intercept,
        snr_grid: snr_grid.to_vec(),
        sum_rates: sum_rates.to_vec(),
    })
}
