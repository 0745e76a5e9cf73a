//! Statistical oracles for the distributional properties of the scheme:
//! metric tail exponent, quantization-error CDF, chi-squared projections,
//! interference decay and SE-ODIA eligibility.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::channel::{generate_realization, NetworkConfig};
use crate::codebook::random_codebook;
use crate::error::{Error, Result};
use crate::metrics::linear_fit;
use crate::numerics::{sample_gaussian_vector, Rng};
use crate::precoder::zero_forcing_precoder_for;
use crate::receiver::{build_report, cell_reports, quantize_channel, FeedbackMode};
use crate::scheduler::{schedule_se_odia, OutagePolicy, SeOdiaParams};

pub const MIN_TAIL_SAMPLES: usize = 10_000;
pub const MIN_GOF_SAMPLES: usize = 1_000;
/// Fraction of the sorted sample treated as the tail near zero.
pub const TAIL_QUANTILE: f64 = 0.1;
/// KS distance below which a fit passes at 10⁴ samples.
pub const KS_PASS: f64 = 0.02;
/// KS distance above which a fit is rejected as the wrong law.
pub const KS_FAIL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailExponentReport {
    pub fitted_exponent: f64,
    pub theoretical_exponent: usize,
    /// Smallest and largest sample used in the fit.
    pub fit_range: (f64, f64),
    pub sample_count: usize,
    pub r_squared: f64,
    /// `c₀` of the fitted `F(x) ≈ c₀ x^τ e^{βx}`.
    pub c0: f64,
    /// `β`, the first-order departure from the pure power law.
    pub correction: f64,
}

/// Solves the 3×3 system `a·θ = b` by elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&r, &q| a[r][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[r].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let acc: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - acc) / a[r][r];
    }
    Some(x)
}

/// Fit of `ln F(x) = ln c₀ + τ ln x + βx` to the empirical CDF on the samples
/// below the 10th percentile. The `βx` term absorbs the leading correction to
/// the power law, so `τ` is not dragged down by curvature inside the window.
/// The model family is closed under rescaling `x`, so `τ` is scale-free.
pub fn fit_tail_exponent(samples: &[f64], cfg: &NetworkConfig) -> Result<TailExponentReport> {
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_TAIL_SAMPLES,
            got: samples.len(),
        });
    }
    let mut sorted: Vec<f64> = samples.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
    if sorted.len() < MIN_TAIL_SAMPLES {
        return Err(Error::Degenerate(
            "too many zero or non-finite samples for a log-log fit".into(),
        ));
    }
    sorted.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let tail = ((TAIL_QUANTILE * n) as usize).min(sorted.len());
    let x: Vec<f64> = sorted[..tail].iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = (1..=tail).map(|k| ((k as f64 - 0.5) / n).ln()).collect();
    // Columns: 1, ln x, x / scale. Scaling keeps the normal equations tame.
    let scale = sorted[tail - 1];
    let z: Vec<f64> = sorted[..tail].iter().map(|v| v / scale).collect();
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for ((&lx, &zx), &yk) in x.iter().zip(&z).zip(&y) {
        let row = [1.0, lx, zx];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            aty[r] += row[r] * yk;
        }
    }
    let theta = match solve3(ata, aty) {
        Some(t) if t.iter().all(|v| v.is_finite()) => t,
        _ => {
            let (intercept, slope, _) = linear_fit(&x, &y);
            [intercept, slope, 0.0]
        }
    };
    let my = y.iter().sum::<f64>() / tail as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for ((&lx, &zx), &yk) in x.iter().zip(&z).zip(&y) {
        let fit = theta[0] + theta[1] * lx + theta[2] * zx;
        ss_res += (yk - fit).powi(2);
        ss_tot += (yk - my).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(TailExponentReport {
        fitted_exponent: theta[1],
        theoretical_exponent: cfg.tail_exponent(),
        fit_range: (sorted[0], sorted[tail - 1]),
        sample_count: samples.len(),
        r_squared,
        c0: theta[0].exp(),
        correction: theta[2] / scale,
    })
}

/// `sup_x |F_n(x) - F(x)|`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (f - lo).abs().max((hi - f).abs())
        })
        .fold(0.0, f64::max)
}

/// CDF of a chi-squared variable with `dof` degrees of freedom in the
/// complex-Gaussian normalization: the sum of `dof/2` unit-mean
/// exponentials, `P(dof/2, x)`.
pub fn chi_squared_cdf(x: f64, dof: usize) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(dof as f64 / 2.0, x)
    }
}

/// KS distance between the samples and [`chi_squared_cdf`].
pub fn chi_squared_gof(samples: &[f64], dof: usize) -> Result<f64> {
    if samples.len() < MIN_GOF_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_GOF_SAMPLES,
            got: samples.len(),
        });
    }
    if dof == 0 {
        return Err(Error::config("chi-squared needs at least 1 degree of freedom"));
    }
    Ok(ks_distance(samples, |x| chi_squared_cdf(x, dof)))
}

/// `Pr{d² ≤ z} = 1 - (1 - z^{S-1})^{N_f}` for a random codebook.
pub fn quantization_error_cdf(z: f64, s: usize, nf: usize) -> f64 {
    let z = z.clamp(0.0, 1.0);
    1.0 - (1.0 - z.powi(s as i32 - 1)).powi(nf as i32)
}

/// Log-log least-squares slope of mean interference against `N`.
pub fn decay_regression(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::config("decay regression needs at least 4 user counts"));
    }
    if points
        .iter()
        .any(|&(n, v)| !(n > 0.0 && v > 0.0 && n.is_finite() && v.is_finite()))
    {
        return Err(Error::config("decay regression needs positive finite points"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(n, _)| (lo.min(n), hi.max(n)));
    if (hi / lo).log10() < 1.5 - 1e-12 {
        return Err(Error::config("user counts must span at least 1.5 decades"));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    Ok(linear_fit(&x, &y).1)
}

/// `Pr{‖b̃_s‖² ≥ η_D} = Σ_{m=0}^{S-s} e^{-η_D} η_D^m / m!` under CN(0,1)
/// effective channels.
pub fn c2_probability(eta_d: f64, s_total: usize, step: usize) -> f64 {
    let r = s_total + 1 - step;
    let mut term = (-eta_d).exp();
    let mut acc = term;
    for m in 1..r {
        term *= eta_d / m as f64;
        acc += term;
    }
    acc.min(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EligibilityStep {
    pub step: usize,
    pub pr_c1: f64,
    pub pr_c2: f64,
    /// Closed-form `Pr{C2}` from [`c2_probability`].
    pub pr_c2_theory: f64,
    /// Fraction of trials with at least one eligible pool member.
    pub p_s: f64,
    /// Mean `|N_s|`.
    pub mean_pool_size: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EligibilityReport {
    pub params: SeOdiaParams,
    pub n: usize,
    pub snr: f64,
    pub trials: usize,
    pub steps: Vec<EligibilityStep>,
}

/// Runs SE-ODIA in cell 0 over independent blocks and tallies, per step, how
/// often pool members meet C1 and C2 and how often somebody is eligible.
pub fn eligibility_probe(
    cfg: &NetworkConfig,
    params: &SeOdiaParams,
    trials: usize,
    seed: u64,
) -> Result<EligibilityReport> {
    cfg.validate_dimensions()?;
    params.validate()?;
    if trials == 0 {
        return Err(Error::config("eligibility probe needs at least one trial"));
    }
    let s = cfg.s;
    let per_trial: Vec<Vec<(usize, usize, usize, bool)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng::derive(seed, &[t as u64]);
            let real = generate_realization(cfg, &mut rng);
            let reports = cell_reports(&real, 0, FeedbackMode::Exact)?;
            let d = schedule_se_odia(&reports, s, params, OutagePolicy::FallbackMinEta, &mut rng)?;
            Ok(d.steps
                .iter()
                .map(|st| (st.pool_size, st.c1_count, st.c2_count, st.eligible_count > 0))
                .collect())
        })
        .collect::<Result<_>>()?;

    let steps = (0..s)
        .map(|step| {
            let (mut pool, mut c1, mut c2, mut any) = (0usize, 0usize, 0usize, 0usize);
            for t in &per_trial {
                let (p, a, b, e) = t[step];
                pool += p;
                c1 += a;
                c2 += b;
                any += e as usize;
            }
            let ratio = |x: usize| if pool == 0 { 0.0 } else { x as f64 / pool as f64 };
            EligibilityStep {
                step: step + 1,
                pr_c1: ratio(c1),
                pr_c2: ratio(c2),
                pr_c2_theory: c2_probability(params.eta_d, s, step + 1),
                p_s: any as f64 / trials as f64,
                mean_pool_size: pool as f64 / trials as f64,
            }
        })
        .collect();
    Ok(EligibilityReport {
        params: *params,
        n: cfg.n,
        snr: cfg.snr,
        trials,
        steps,
    })
}

/// Scheduling metrics η of independent users; `count` samples.
pub fn metric_samples(cfg: &NetworkConfig, count: usize, seed: u64) -> Result<Vec<f64>> {
    cfg.validate_dimensions()?;
    let single = cfg.with_users(cfg.s);
    let per_block = single.k * single.n;
    let blocks = count.div_ceil(per_block);
    let nested: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = Rng::derive(seed, &[b as u64]);
            let real = generate_realization(&single, &mut rng);
            let mut out = Vec::with_capacity(per_block);
            for i in 0..single.k {
                for j in 0..single.n {
                    out.push(build_report(&real, i, j, FeedbackMode::Exact)?.metric);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut flat: Vec<f64> = nested.into_iter().flatten().collect();
    flat.truncate(count);
    Ok(flat)
}

/// Quantization errors `d²` of isotropic channels against a fresh random
/// codebook per sample.
pub fn distortion_samples(dim: usize, size: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng::derive(seed, &[t as u64]);
            let cb = random_codebook(&mut rng, dim, size);
            let f = sample_gaussian_vector(&mut rng, dim);
            Ok(quantize_channel(&f, &cb)?.distortion)
        })
        .collect()
}

/// `‖b_s‖²` of the user SE-ODIA selects at `step` (1-based) without any
/// threshold, one sample per block.
pub fn projection_norm_samples(cfg: &NetworkConfig, step: usize, count: usize, seed: u64) -> Result<Vec<f64>> {
    cfg.validate_dimensions()?;
    if step == 0 || step > cfg.s {
        return Err(Error::config(format!("step {step} outside 1..={}", cfg.s)));
    }
    let params = SeOdiaParams::unconstrained();
    (0..count)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng::derive(seed, &[t as u64]);
            let real = generate_realization(cfg, &mut rng);
            let reports = cell_reports(&real, 0, FeedbackMode::Exact)?;
            let d = schedule_se_odia(&reports, cfg.s, &params, OutagePolicy::FallbackMinEta, &mut rng)?;
            let b = d.steps[step - 1]
                .projection
                .as_ref()
                .ok_or_else(|| Error::Degenerate("unconstrained step made no selection".into()))?;
            Ok(b.norm_sqr())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainBoundReport {
    /// Trials in which cell 0 had no outage and a precoder was formed.
    pub checked_trials: usize,
    pub skipped_trials: usize,
    /// Selected users with `γ ≤ ‖b_j‖² / factor`.
    pub violations: usize,
    /// Smallest `γ · factor / ‖b_j‖²` observed.
    #[serde(with = "crate::serde_float")]
    pub min_ratio: f64,
}

/// Checks `γ_j > ‖b_j‖² / (1 + (S-1)⁴α² / (1-(S-1)α²))` for every user of
/// cell 0 until `trials` outage-free blocks have been examined.
pub fn gain_bound_check(
    cfg: &NetworkConfig,
    params: &SeOdiaParams,
    trials: usize,
    seed: u64,
) -> Result<GainBoundReport> {
    let factor = params
        .gain_bound_factor(cfg.s)
        .ok_or_else(|| Error::config("gain bound needs (S-1)·alpha² < 1"))?;
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    let mut t = 0u64;
    while checked < trials {
        let mut rng = Rng::derive(seed, &[t]);
        t += 1;
        if t > 1_000 * trials as u64 + 1_000 {
            return Err(Error::Degenerate(
                "too many outages to collect outage-free blocks".into(),
            ));
        }
        let real = generate_realization(cfg, &mut rng);
        let reports = cell_reports(&real, 0, FeedbackMode::Exact)?;
        let d = schedule_se_odia(&reports, cfg.s, params, OutagePolicy::FallbackMinEta, &mut rng)?;
        if d.outage_count > 0 {
            skipped += 1;
            continue;
        }
        let fs: Vec<_> = d
            .selected
            .iter()
            .map(|&j| reports[j].effective_channel.exact().expect("exact feedback").clone())
            .collect();
        let precoder = match zero_forcing_precoder_for(0, &fs) {
            Ok(p) => p,
            Err(e) if e.is_numerical() => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for (j, step) in d.steps.iter().enumerate() {
            let b = step.projection.as_ref().expect("outage-free step has a projection");
            let ratio = precoder.gains[j] * factor / b.norm_sqr();
            min_ratio = min_ratio.min(ratio);
            if ratio <= 1.0 {
                violations += 1;
            }
        }
        checked += 1;
    }
    Ok(GainBoundReport {
        checked_trials: checked,
        skipped_trials: skipped,
        violations,
        min_ratio,
    })
}
