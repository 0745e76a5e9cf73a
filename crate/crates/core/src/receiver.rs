//! Per-user processing from local CSI: receive beamformer, scheduling metric,
//! effective channel and limited-feedback quantization.

use serde::{Deserialize, Serialize};

use crate::channel::NetworkRealization;
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::numerics::{svd, ComplexMatrix, ComplexVector};

/// How a reconstructed effective channel is scaled from the fed-back gain
/// `‖f‖²`: magnitude `‖f‖` ([`Norm`](Self::Norm)) or `‖f‖²`
/// ([`Power`](Self::Power), the default).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainExponent {
    Norm,
    #[default]
    Power,
}

impl GainExponent {
    pub fn from_exponent(e: u32) -> Result<Self> {
        match e {
            1 => Ok(GainExponent::Norm),
            2 => Ok(GainExponent::Power),
            other => Err(Error::config(format!(
                "feedback gain exponent must be 1 or 2, got {other}"
            ))),
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            GainExponent::Norm => 1,
            GainExponent::Power => 2,
        }
    }

    /// Scale applied to the unit codeword given the fed-back power `‖f‖²`.
    pub fn magnitude(self, gain: f64) -> f64 {
        match self {
            GainExponent::Norm => gain.sqrt(),
            GainExponent::Power => gain,
        }
    }
}

/// Effective channel as seen by the base station.
#[derive(Clone, Debug, PartialEq)]
pub enum EffectiveChannel {
    Exact(ComplexVector),
    Quantized { index: usize, gain: f64 },
}

impl EffectiveChannel {
    pub fn exact(&self) -> Option<&ComplexVector> {
        match self {
            EffectiveChannel::Exact(f) => Some(f),
            EffectiveChannel::Quantized { .. } => None,
        }
    }
}

/// Per-source-cell leakage `‖u^H H_k P_k‖²`, `k ≠ home cell`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceProfile {
    /// `(source cell, power)` in ascending cell order.
    pub per_cell: Vec<(usize, f64)>,
}

impl InterferenceProfile {
    pub fn total(&self) -> f64 {
        self.per_cell.iter().map(|&(_, p)| p).sum()
    }
}

/// Everything user `(cell, user)` feeds back to its base station.
#[derive(Clone, Debug)]
pub struct UserReport {
    pub cell: usize,
    pub user: usize,
    /// Scheduling metric η, the total received inter-cell leakage.
    pub metric: f64,
    pub effective_channel: EffectiveChannel,
    /// Unit-norm receive filter `u` (length `L`).
    pub beamformer: ComplexVector,
    pub profile: InterferenceProfile,
}

/// What the user sends for its effective channel.
#[derive(Clone, Copy, Debug)]
pub enum FeedbackMode<'a> {
    Exact,
    Codebook(&'a Codebook),
}

/// Result of quantizing one effective channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quantization {
    pub index: usize,
    /// `‖f‖²`.
    pub gain: f64,
    /// Squared chordal distance `1 - |f^H c|² / ‖f‖²` to the chosen codeword.
    pub distortion: f64,
}

/// `G^{[i,j]}`: the `(K-1)S × L` matrix whose row blocks are
/// `(H_k^{[i,j]} P_k)^H` for every `k ≠ i`, ascending in `k`.
pub fn stack_interference_matrix(real: &NetworkRealization, cell: usize, user: usize) -> ComplexMatrix {
    let k_total = real.config().k;
    let blocks: Vec<ComplexMatrix> = (0..k_total)
        .filter(|&k| k != cell)
        .map(|k| {
            real.channel(cell, user, k)
                .matmul(real.reference_beamformer(k))
                .adjoint()
        })
        .collect();
    if blocks.is_empty() {
        return ComplexMatrix::zeros(0, real.config().l);
    }
    ComplexMatrix::stack(&blocks).expect("blocks share the user antenna count")
}

/// Minimizer of `‖g u‖²` over unit `u`: the right-singular vector of the
/// smallest singular value. Returns `(u, σ_min²)`.
///
/// When `g` has fewer rows than columns (or none), the minimum is zero and
/// `u` is taken from the null space.
pub fn optimal_beamformer(g: &ComplexMatrix) -> Result<(ComplexVector, f64)> {
    let cols = g.cols();
    if cols == 0 {
        return Err(Error::Shape("beamformer for a matrix with no columns".into()));
    }
    let padded;
    let target = if g.rows() < cols {
        let pad = ComplexMatrix::zeros(cols - g.rows(), cols);
        padded = if g.rows() == 0 {
            pad
        } else {
            ComplexMatrix::stack(&[g.clone(), pad])?
        };
        &padded
    } else {
        g
    };
    let decomposition = svd(target)?;
    let u = decomposition.right.column(cols - 1);
    let sigma = decomposition.smallest();
    Ok((u, sigma * sigma))
}

/// `(u^H H_source^{[cell,user]} P_source)^H`, length `S`. With
/// `source == cell` this is the effective desired channel `f_i^{[i,j]}`.
pub fn cross_channel(
    real: &NetworkRealization,
    cell: usize,
    user: usize,
    source: usize,
    u: &ComplexVector,
) -> ComplexVector {
    let row = real.channel(cell, user, source).adjoint_mul_vec(u);
    real.reference_beamformer(source).adjoint_mul_vec(&row)
}

/// Effective desired channel `f_i^{[i,j]} = (u^H H_i^{[i,j]} P_i)^H`.
pub fn effective_channel(real: &NetworkRealization, cell: usize, user: usize, u: &ComplexVector) -> ComplexVector {
    cross_channel(real, cell, user, cell, u)
}

/// Leakage from every other cell into receive filter `u`.
pub fn interference_profile(
    real: &NetworkRealization,
    cell: usize,
    user: usize,
    u: &ComplexVector,
) -> InterferenceProfile {
    let per_cell = (0..real.config().k)
        .filter(|&k| k != cell)
        .map(|k| (k, cross_channel(real, cell, user, k, u).norm_sqr()))
        .collect();
    InterferenceProfile { per_cell }
}

/// Picks the codeword most aligned with `f`; ties go to the lowest index.
pub fn quantize_channel(f: &ComplexVector, cb: &Codebook) -> Result<Quantization> {
    if f.len() != cb.dimension() {
        return Err(Error::Shape(format!(
            "channel of length {} against a dimension-{} codebook",
            f.len(),
            cb.dimension()
        )));
    }
    let gain = f.norm_sqr();
    if gain <= 0.0 || !gain.is_finite() {
        return Err(Error::Degenerate("cannot quantize a zero-norm channel".into()));
    }
    let mut best = 0;
    let mut best_alignment = f64::NEG_INFINITY;
    for (idx, c) in cb.codewords().iter().enumerate() {
        let alignment = f.dot(c).norm_sqr() / gain;
        if alignment > best_alignment {
            best = idx;
            best_alignment = alignment;
        }
    }
    Ok(Quantization {
        index: best,
        gain,
        distortion: (1.0 - best_alignment).clamp(0.0, 1.0),
    })
}

/// Full report for one user: optimal receive filter, metric, and the
/// effective channel in the requested feedback form.
pub fn build_report(
    real: &NetworkRealization,
    cell: usize,
    user: usize,
    feedback: FeedbackMode<'_>,
) -> Result<UserReport> {
    let g = stack_interference_matrix(real, cell, user);
    let (beamformer, _sigma_sq) = optimal_beamformer(&g)?;
    let profile = interference_profile(real, cell, user, &beamformer);
    let f = effective_channel(real, cell, user, &beamformer);
    let effective_channel = match feedback {
        FeedbackMode::Exact => EffectiveChannel::Exact(f),
        FeedbackMode::Codebook(cb) => {
            let q = quantize_channel(&f, cb)?;
            EffectiveChannel::Quantized {
                index: q.index,
                gain: q.gain,
            }
        }
    };
    Ok(UserReport {
        cell,
        user,
        metric: profile.total(),
        effective_channel,
        beamformer,
        profile,
    })
}

/// Reports for all users of one cell.
pub fn cell_reports(real: &NetworkRealization, cell: usize, feedback: FeedbackMode<'_>) -> Result<Vec<UserReport>> {
    (0..real.config().n)
        .map(|j| build_report(real, cell, j, feedback))
        .collect()
}
