//! Zero-forcing user-specific precoding with unit-power columns.

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::numerics::{invert, ComplexMatrix, ComplexVector};
use crate::receiver::{EffectiveChannel, GainExponent, UserReport};

/// Inner precoder of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecoderSet {
    pub cell: usize,
    /// `V_i`: one unit-norm column per selected user, in selection order.
    pub matrix: ComplexMatrix,
    /// `γ_j = 1 / ‖column j of F⁻¹‖²`.
    pub gains: Vec<f64>,
    /// `F_i` (or `F̂_i`): row `j` is the conjugated effective channel of the
    /// `j`-th selected user.
    pub basis: ComplexMatrix,
}

impl PrecoderSet {
    pub fn streams(&self) -> usize {
        self.gains.len()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        self.matrix.column(j)
    }
}

/// `F⁻¹` when square, otherwise the right pseudo-inverse `F^H (F F^H)⁻¹`
/// used when fewer users than streams were scheduled.
fn right_inverse(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    if f.is_square() {
        invert(f)
    } else if f.rows() < f.cols() {
        let gram_inv = invert(&f.matmul(&f.adjoint()))?;
        Ok(f.adjoint().matmul(&gram_inv))
    } else {
        Err(Error::Shape(format!(
            "{} users cannot be zero-forced with {} streams",
            f.rows(),
            f.cols()
        )))
    }
}

/// ZF precoder for `cell` from the selected users' effective channels.
pub fn zero_forcing_precoder_for(cell: usize, channels: &[ComplexVector]) -> Result<PrecoderSet> {
    if channels.is_empty() {
        return Err(Error::Degenerate("no users to precode for".into()));
    }
    let basis = ComplexMatrix::from_adjoint_rows(channels);
    let mut matrix = right_inverse(&basis)?;
    let mut gains = Vec::with_capacity(channels.len());
    for j in 0..matrix.cols() {
        let col = matrix.column(j);
        let norm_sq = col.norm_sqr();
        if !(norm_sq > 0.0 && norm_sq.is_finite()) {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        matrix.set_column(j, &col.scale_real(1.0 / norm_sq.sqrt()));
        gains.push(1.0 / norm_sq);
    }
    Ok(PrecoderSet {
        cell,
        matrix,
        gains,
        basis,
    })
}

/// [`zero_forcing_precoder_for`] with cell index 0.
pub fn zero_forcing_precoder(channels: &[ComplexVector]) -> Result<PrecoderSet> {
    zero_forcing_precoder_for(0, channels)
}

/// `f̂ = g(‖f‖²)·c_index` for one quantized report.
pub fn reconstruct_channel(report: &UserReport, cb: &Codebook, exponent: GainExponent) -> Result<ComplexVector> {
    match report.effective_channel {
        EffectiveChannel::Quantized { index, gain } => {
            if index >= cb.size() {
                return Err(Error::Shape(format!(
                    "codeword index {index} outside a size-{} codebook",
                    cb.size()
                )));
            }
            Ok(cb.codeword(index).scale_real(exponent.magnitude(gain)))
        }
        EffectiveChannel::Exact(_) => Err(Error::Degenerate("quantized precoding needs quantized reports".into())),
    }
}

/// `V̂ = F̂⁻¹Γ` from quantized reports, with the same column normalization.
pub fn quantized_precoder(
    cell: usize,
    reports: &[&UserReport],
    cb: &Codebook,
    exponent: GainExponent,
) -> Result<PrecoderSet> {
    let channels = reports
        .iter()
        .map(|r| reconstruct_channel(r, cb, exponent))
        .collect::<Result<Vec<_>>>()?;
    zero_forcing_precoder_for(cell, &channels)
}

/// Precoder from whichever form of feedback the reports carry.
pub fn precoder_from_reports(
    cell: usize,
    reports: &[&UserReport],
    cb: Option<&Codebook>,
    exponent: GainExponent,
) -> Result<PrecoderSet> {
    match cb {
        Some(cb) => quantized_precoder(cell, reports, cb, exponent),
        None => {
            let channels = reports
                .iter()
                .map(|r| {
                    r.effective_channel
                        .exact()
                        .cloned()
                        .ok_or_else(|| Error::Degenerate("report has no exact channel".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            zero_forcing_precoder_for(cell, &channels)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{random_codebook, CodebookKind};
    use crate::numerics::{sample_gaussian_vector, Complex64, Rng};
    use crate::receiver::{quantize_channel, InterferenceProfile};

    fn rows_to_channels(f: &ComplexMatrix) -> Vec<ComplexVector> {
        (0..f.rows())
            .map(|r| f.row(r).iter().map(|z| z.conj()).collect())
            .collect()
    }

    fn quantized_report(f: &ComplexVector, cb: &Codebook) -> UserReport {
        let q = quantize_channel(f, cb).unwrap();
        UserReport {
            cell: 0,
            user: 0,
            metric: 0.0,
            effective_channel: EffectiveChannel::Quantized {
                index: q.index,
                gain: q.gain,
            },
            beamformer: ComplexVector::basis(1, 0),
            profile: InterferenceProfile { per_cell: vec![] },
        }
    }

    #[test]
    fn identity_channels() {
        let p = zero_forcing_precoder(&rows_to_channels(&ComplexMatrix::identity(3))).unwrap();
        assert!(p.matrix.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        assert!(p.gains.iter().all(|g| (g - 1.0).abs() < 1e-15));
    }

    #[test]
    fn diagonal_channels() {
        let f = ComplexMatrix::diagonal(&[2.0, 1.0]);
        let p = zero_forcing_precoder(&rows_to_channels(&f)).unwrap();
        assert!(p.matrix.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);
        assert!((p.gains[0] - 4.0).abs() < 1e-14 && (p.gains[1] - 1.0).abs() < 1e-14);
        assert!(f.matmul(&p.matrix).max_abs_diff(&f) < 1e-14);
    }

    /// `[(FF^H)⁻¹]_jj` for 2×2 `F` from the cofactor formula.
    fn cofactor_gram_inverse_diagonal(f: &ComplexMatrix) -> [f64; 2] {
        let g = f.matmul(&f.adjoint());
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        [g[(1, 1)].re / det, g[(0, 0)].re / det]
    }

    #[test]
    fn gains_match_cofactor_gram_inverse() {
        let mut rng = Rng::new(1);
        for _ in 0..1_000 {
            let channels = vec![sample_gaussian_vector(&mut rng, 2), sample_gaussian_vector(&mut rng, 2)];
            let p = zero_forcing_precoder(&channels).unwrap();
            let diag = cofactor_gram_inverse_diagonal(&p.basis);
            for (gain, d) in p.gains.iter().zip(&diag) {
                let expected = 1.0 / d;
                assert!((gain - expected).abs() < 1e-8 * expected.max(1.0));
            }
        }
    }

    #[test]
    fn zero_forcing_structure() {
        let mut rng = Rng::new(2);
        for _ in 0..200 {
            let channels: Vec<_> = (0..3).map(|_| sample_gaussian_vector(&mut rng, 3)).collect();
            let p = zero_forcing_precoder(&channels).unwrap();
            let fv = p.basis.matmul(&p.matrix);
            let expected = ComplexMatrix::diagonal(&p.gains.iter().map(|g| g.sqrt()).collect::<Vec<_>>());
            assert!(fv.max_abs_diff(&expected) < 1e-8 * expected.frobenius_norm().max(1.0));
            for (j, f) in channels.iter().enumerate() {
                assert!((p.column(j).norm() - 1.0).abs() < 1e-9);
                for s in 0..3 {
                    if s != j {
                        assert!(f.dot(&p.column(s)).norm() <= 1e-8 * f.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn singular_channels_are_reported() {
        let f = ComplexVector::from_real(&[1.0, 2.0]);
        let err = zero_forcing_precoder(&[f.clone(), f.scale_real(2.0)]).unwrap_err();
        assert!(err.is_numerical());
    }

    #[test]
    fn fewer_users_than_streams_uses_pseudo_inverse() {
        let mut rng = Rng::new(3);
        let f = sample_gaussian_vector(&mut rng, 3);
        let p = zero_forcing_precoder(std::slice::from_ref(&f)).unwrap();
        assert_eq!(p.matrix.shape(), (3, 1));
        // matched filter: gain ‖f‖²
        assert!((p.gains[0] - f.norm_sqr()).abs() < 1e-10);
        assert!((p.column(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distortion_codebook_reproduces_exact_precoder() {
        let mut rng = Rng::new(4);
        let channels = vec![sample_gaussian_vector(&mut rng, 2), sample_gaussian_vector(&mut rng, 2)];
        let cb = Codebook::new(
            CodebookKind::Custom,
            channels.iter().map(|f| f.normalized().unwrap()).collect(),
        )
        .unwrap();
        let reports: Vec<UserReport> = channels.iter().map(|f| quantized_report(f, &cb)).collect();
        let refs: Vec<&UserReport> = reports.iter().collect();
        let exact = zero_forcing_precoder(&channels).unwrap();
        for exponent in [GainExponent::Norm, GainExponent::Power] {
            let q = quantized_precoder(0, &refs, &cb, exponent).unwrap();
            assert!(q.matrix.max_abs_diff(&exact.matrix) < 1e-9);
        }
    }

    #[test]
    fn aligned_channels_give_diagonal_precoder() {
        let cb = Codebook::standard_basis(2);
        let a = ComplexVector::new(vec![Complex64::new(0.0, 3.0), Complex64::new(0.0, 0.0)]);
        let b = ComplexVector::from_real(&[0.0, 0.5]);
        let reports = [quantized_report(&a, &cb), quantized_report(&b, &cb)];
        let q = quantized_precoder(0, &[&reports[0], &reports[1]], &cb, GainExponent::Power).unwrap();
        assert!(q.matrix[(0, 1)].norm() < 1e-15 && q.matrix[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn gain_exponent_does_not_change_normalized_columns() {
        let mut rng = Rng::new(5);
        let cb = random_codebook(&mut rng, 2, 16);
        for _ in 0..100 {
            let reports: Vec<UserReport> = (0..2)
                .map(|_| quantized_report(&sample_gaussian_vector(&mut rng, 2), &cb))
                .collect();
            let refs: Vec<&UserReport> = reports.iter().collect();
            let (Ok(a), Ok(b)) = (
                quantized_precoder(0, &refs, &cb, GainExponent::Norm),
                quantized_precoder(0, &refs, &cb, GainExponent::Power),
            ) else {
                continue;
            };
            assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-8);
        }
    }

    fn mean_residual(bits: u32, trials: usize, seed: u64) -> f64 {
        let mut rng = Rng::new(seed);
        let cb = random_codebook(&mut rng, 2, 1 << bits);
        let mut acc = 0.0;
        let mut count = 0;
        while count < trials {
            let fs = [sample_gaussian_vector(&mut rng, 2), sample_gaussian_vector(&mut rng, 2)];
            let reports: Vec<UserReport> = fs.iter().map(|f| quantized_report(f, &cb)).collect();
            let refs: Vec<&UserReport> = reports.iter().collect();
            let Ok(p) = quantized_precoder(0, &refs, &cb, GainExponent::Power) else {
                continue;
            };
            acc += fs[0].dot(&p.column(1)).norm_sqr() + fs[1].dot(&p.column(0)).norm_sqr();
            count += 1;
        }
        acc / trials as f64
    }

    #[test]
    fn residual_interference_shrinks_with_codebook_size() {
        let coarse = mean_residual(4, 1_000, 6);
        let fine = mean_residual(8, 1_000, 6);
        assert!(fine < coarse, "2^4: {coarse}, 2^8: {fine}");
    }

    #[test]
    fn exact_reports_are_rejected_by_quantized_path() {
        let cb = Codebook::standard_basis(2);
        let r = UserReport {
            cell: 0,
            user: 0,
            metric: 0.0,
            effective_channel: EffectiveChannel::Exact(ComplexVector::basis(2, 0)),
            beamformer: ComplexVector::basis(1, 0),
            profile: InterferenceProfile { per_cell: vec![] },
        };
        assert!(reconstruct_channel(&r, &cb, GainExponent::Power).is_err());
    }
}
