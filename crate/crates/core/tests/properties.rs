//! Randomized invariants of the numerical kernels, scheduler, precoder,
//! metrics and estimators.

use odia_core::channel::generate_realization;
use odia_core::numerics::{invert, sample_gaussian_matrix, sample_gaussian_vector, sample_orthonormal_columns, svd};
use odia_core::precoder::zero_forcing_precoder_for;
use odia_core::receiver::{cell_reports, optimal_beamformer, stack_interference_matrix};
use odia_core::scheduler::{coherence, schedule_odia, schedule_se_odia};
use odia_core::validation::{chi_squared_gof, decay_regression, fit_tail_exponent};
use odia_core::{
    per_user_rate, Complex64, ComplexMatrix, FeedbackMode, NetworkConfig, OutagePolicy, Rng, SeOdiaParams,
};
use proptest::prelude::*;

fn network(n: usize) -> NetworkConfig {
    NetworkConfig::new(3, 4, 2, n, 2, 100.0).unwrap()
}

fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn singular_values_are_unitarily_invariant(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let mut rng = Rng::new(seed);
        let m = sample_gaussian_matrix(&mut rng, rows, cols);
        let left = sample_orthonormal_columns(&mut rng, rows, rows);
        let right = sample_orthonormal_columns(&mut rng, cols, cols);
        let a = svd(&m).unwrap().singular_values;
        let b = svd(&left.matmul(&m).matmul(&right)).unwrap().singular_values;
        prop_assert_eq!(a.len(), rows.min(cols));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }

    #[test]
    fn inversion_is_an_involution(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = Rng::new(seed);
        // Diagonal shift keeps the draw well conditioned.
        let shift = ComplexMatrix::identity(n).scale_real(3.0 * n as f64);
        let m = sample_gaussian_matrix(&mut rng, n, n);
        let m = ComplexMatrix::from_fn(n, n, |r, c| m.as_slice()[r * n + c] + shift.as_slice()[r * n + c]);
        let back = invert(&invert(&m).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&m, &back) < 1e-7);
    }

    #[test]
    fn metric_is_the_smallest_squared_singular_value(seed in any::<u64>()) {
        let cfg = network(4);
        let real = generate_realization(&cfg, &mut Rng::new(seed));
        let reports = cell_reports(&real, 1, FeedbackMode::Exact).unwrap();
        for r in &reports {
            let g = stack_interference_matrix(&real, r.cell, r.user);
            let sigma_min = *svd(&g).unwrap().singular_values.last().unwrap();
            prop_assert!((r.metric - sigma_min * sigma_min).abs() < 1e-9);
            prop_assert!((r.profile.total() - r.metric).abs() < 1e-9);
        }
    }

    #[test]
    fn beamformer_scales_with_the_matrix(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut rng = Rng::new(seed);
        let g = sample_gaussian_matrix(&mut rng, 4, 2);
        let (u, eta) = optimal_beamformer(&g).unwrap();
        let (v, eta_scaled) = optimal_beamformer(&g.scale_real(c)).unwrap();
        prop_assert!((eta_scaled - c * c * eta).abs() < 1e-9 * (1.0 + c * c * eta));
        prop_assert!((u.dot(&v).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_forcing_cancels_intra_cell_interference(seed in any::<u64>(), s in 1usize..5) {
        let mut rng = Rng::new(seed);
        let channels: Vec<_> = (0..s).map(|_| sample_gaussian_vector(&mut rng, s)).collect();
        let p = zero_forcing_precoder_for(0, &channels).unwrap();
        let mut power = 0.0;
        for j in 0..s {
            let col = p.column(j);
            prop_assert!((col.norm() - 1.0).abs() < 1e-9);
            power += col.norm_sqr() / s as f64;
            for (k, f) in channels.iter().enumerate() {
                if k != j {
                    prop_assert!(f.dot(&col).norm() <= 1e-8 * f.norm());
                }
            }
            // Gain from the column norm equals the diagonal of (F F^H)^{-1}.
            let gram_inv = invert(&p.basis.matmul(&p.basis.adjoint())).unwrap();
            let diag = gram_inv.as_slice()[j * s + j].re;
            prop_assert!((p.gains[j] - 1.0 / diag).abs() < 1e-8 * p.gains[j].max(1.0));
        }
        prop_assert!((power - 1.0).abs() < 1e-9);
    }

    #[test]
    fn odia_minimizes_the_metric_sum(seed in any::<u64>(), n in 2usize..9) {
        let cfg = network(n);
        let real = generate_realization(&cfg, &mut Rng::new(seed));
        let reports = cell_reports(&real, 0, FeedbackMode::Exact).unwrap();
        let d = schedule_odia(&reports, 2).unwrap();
        let chosen: f64 = d.selected.iter().map(|&j| reports[j].metric).sum();
        let mut best = f64::INFINITY;
        for a in 0..n {
            for b in a + 1..n {
                best = best.min(reports[a].metric + reports[b].metric);
            }
        }
        prop_assert!(chosen <= best + 1e-12);
        prop_assert_eq!(d.outage_count, 0);
    }

    #[test]
    fn se_odia_pool_entries_are_semi_orthogonal(
        seed in any::<u64>(),
        eta_i in 0.2f64..4.0,
        eta_d in 0.0f64..2.0,
        alpha in 0.3f64..1.0,
    ) {
        let cfg = NetworkConfig::new(3, 4, 2, 30, 2, 100.0).unwrap();
        let mut rng = Rng::new(seed);
        let real = generate_realization(&cfg, &mut rng);
        let reports = cell_reports(&real, 2, FeedbackMode::Exact).unwrap();
        let params = SeOdiaParams::new(eta_i, eta_d, alpha).unwrap();
        let d = schedule_se_odia(&reports, cfg.s, &params, OutagePolicy::FallbackMinEta, &mut rng).unwrap();
        let mut distinct = d.selected.clone();
        distinct.sort_unstable();
        distinct.dedup();
        prop_assert_eq!(distinct.len(), d.selected.len());
        for (b, step) in d.steps.iter().enumerate() {
            let Some(user) = step.selected else { continue };
            if step.fallback {
                continue;
            }
            let f = reports[user].effective_channel.exact().unwrap();
            prop_assert!(reports[user].metric <= eta_i);
            prop_assert!(step.projection.as_ref().unwrap().norm_sqr() >= eta_d);
            for earlier in &d.steps[..b] {
                let basis = earlier.projection.as_ref().unwrap();
                prop_assert!(coherence(f, basis) < alpha);
            }
        }
    }

    #[test]
    fn rate_is_monotone_in_gain_and_interference(
        gamma in 0.01f64..100.0,
        inter in 0.0f64..10.0,
        residual in 0.0f64..10.0,
        snr in 0.01f64..1000.0,
        bump in 0.01f64..1.0,
    ) {
        let base = per_user_rate(gamma, inter, residual, snr, 2);
        prop_assert!(per_user_rate(gamma + bump, inter, residual, snr, 2) > base);
        prop_assert!(per_user_rate(gamma, inter + bump, residual, snr, 2) < base);
        prop_assert!(per_user_rate(gamma, inter, residual + bump, snr, 2) < base);
    }

    #[test]
    fn tail_fit_is_scale_equivariant(seed in any::<u64>(), c in 0.01f64..100.0) {
        let cfg = network(2);
        let mut rng = Rng::new(seed);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| (0..3).map(|_| rng.exponential()).sum::<f64>())
            .collect();
        let scaled: Vec<f64> = samples.iter().map(|x| x * c).collect();
        let a = fit_tail_exponent(&samples, &cfg).unwrap().fitted_exponent;
        let b = fit_tail_exponent(&scaled, &cfg).unwrap().fitted_exponent;
        prop_assert!((a - b).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn chi_squared_gof_ignores_sample_order(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let samples: Vec<f64> = (0..1000).map(|_| rng.exponential() + rng.exponential()).collect();
        let mut shuffled = samples.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.below(i + 1);
            shuffled.swap(i, j);
        }
        prop_assert_eq!(chi_squared_gof(&samples, 4).unwrap(), chi_squared_gof(&shuffled, 4).unwrap());
    }

    #[test]
    fn decay_slope_follows_the_trend(
        start in 0.1f64..10.0,
        ratios in prop::collection::vec(0.2f64..0.95, 4..7),
        rising in any::<bool>(),
    ) {
        let mut v = start;
        let points: Vec<(f64, f64)> = ratios
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let p = (10f64.powi(i as i32), v);
                v = if rising { v / r } else { v * r };
                p
            })
            .collect();
        let slope = decay_regression(&points).unwrap();
        prop_assert_eq!(slope > 0.0, rising);
    }
}

#[test]
fn unit_complex_scalars_do_not_move_singular_values() {
    let mut rng = Rng::new(9);
    let m = sample_gaussian_matrix(&mut rng, 3, 4);
    let phase = Complex64::from_polar(1.0, 0.7);
    let a = svd(&m).unwrap().singular_values;
    let b = svd(&m.scale(phase)).unwrap().singular_values;
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}
