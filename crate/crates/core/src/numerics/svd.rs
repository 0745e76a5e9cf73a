//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The matrices in this crate are tiny (a handful of rows and columns), so
//! the quadratic per-sweep cost of Jacobi is irrelevant and its high relative
//! accuracy on small singular values is what matters: the scheduling metric is
//! the square of the smallest one.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// Maximum number of full Jacobi sweeps before reporting non-convergence.
pub const MAX_SWEEPS: usize = 100;

/// Converged once the off-diagonal Gram mass falls below this fraction of
/// the squared Frobenius norm.
pub const CONVERGENCE_TOL: f64 = 1e-12;

/// Result of a thin SVD `m = left · diag(singular_values) · right^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult {
    /// `rows × min(rows, cols)`, orthonormal columns.
    pub left: ComplexMatrix,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// `cols × min(rows, cols)`, orthonormal columns.
    pub right: ComplexMatrix,
}

impl SvdResult {
    pub fn smallest(&self) -> f64 {
        *self.singular_values.last().expect("thin SVD has at least one value")
    }

    pub fn largest(&self) -> f64 {
        self.singular_values[0]
    }

    /// `left · diag(σ) · right^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.left.clone();
        for (c, &s) in self.singular_values.iter().enumerate() {
            for r in 0..scaled.rows() {
                scaled[(r, c)] *= s;
            }
        }
        scaled.matmul(&self.right.adjoint())
    }
}

/// Thin SVD with `min(rows, cols)` singular values.
///
/// Each right-singular vector is rotated so that its largest-magnitude entry
/// is real and positive; the matching left vector absorbs the same phase.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::Shape("SVD of an empty matrix".into()));
    }
    if !m.is_finite() {
        return Err(Error::Degenerate("SVD input has non-finite entries".into()));
    }

    let (mut left, singular_values, mut right) = if rows >= cols {
        jacobi_tall(m)?
    } else {
        let (u, s, v) = jacobi_tall(&m.adjoint())?;
        (v, s, u)
    };

    for c in 0..right.cols() {
        let mut best = 0;
        let mut best_mag = -1.0;
        for r in 0..right.rows() {
            let mag = right[(r, c)].norm();
            if mag > best_mag + 1e-15 {
                best = r;
                best_mag = mag;
            }
        }
        if best_mag > 0.0 {
            let phase = right[(best, c)].conj() / best_mag;
            for r in 0..right.rows() {
                right[(r, c)] *= phase;
            }
            right[(best, c)] = Complex64::new(right[(best, c)].re, 0.0);
            for r in 0..left.rows() {
                left[(r, c)] *= phase;
            }
        }
    }

    Ok(SvdResult {
        left,
        singular_values,
        right,
    })
}

/// One-sided Jacobi for `rows >= cols`. Returns `(U, σ, V)` sorted by σ.
fn jacobi_tall(m: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let (rows, n) = m.shape();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|c| m.column(c).into_inner()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n).map(|c| ComplexVector::basis(n, c).into_inner()).collect();

    let frob_sq: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let pair_tol = f64::EPSILON * rows as f64;

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off_sq = 0.0;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                off_sq += g * g;
                if g == 0.0 || g <= pair_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated || off_sq.sqrt() <= CONVERGENCE_TOL * frob_sq {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { rows, cols: n });
    }

    let norms: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let sigma_max = norms[order[0]];
    let zero_tol = sigma_max * f64::EPSILON * rows as f64;

    let mut u_cols: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut pending = Vec::new();
    let mut sigma = Vec::with_capacity(n);
    for (slot, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > zero_tol && norms[j] > 0.0 {
            u_cols.push(ComplexVector::new(a[j].clone()).scale_real(1.0 / norms[j]));
        } else {
            u_cols.push(ComplexVector::zeros(rows));
            pending.push(slot);
        }
    }
    complete_orthonormal(&mut u_cols, &pending);

    let left = ComplexMatrix::from_columns(&u_cols);
    let right_cols: Vec<ComplexVector> = order.iter().map(|&j| ComplexVector::new(v[j].clone())).collect();
    Ok((left, sigma, ComplexMatrix::from_columns(&right_cols)))
}

/// Applies `[x_p, x_q] <- [x_p, x_q] · [[c, s·e^{iφ}], [-s·e^{-iφ}, c]]`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (lo, hi) = cols.split_at_mut(q);
    let xp = &mut lo[p];
    let xq = &mut hi[0];
    let sp = phase * s;
    let sq = phase.conj() * s;
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (ap, aq) = (*a, *b);
        *a = ap * c - sq * aq;
        *b = sp * ap + aq * c;
    }
}

/// Fills the listed slots with unit vectors orthogonal to every other column,
/// drawing candidates from the standard basis.
fn complete_orthonormal(cols: &mut [ComplexVector], pending: &[usize]) {
    if pending.is_empty() {
        return;
    }
    let dim = cols[0].len();
    let mut candidate = 0;
    for &slot in pending {
        while candidate < dim {
            let mut w = ComplexVector::basis(dim, candidate);
            candidate += 1;
            for _ in 0..2 {
                for (k, col) in cols.iter().enumerate() {
                    if k == slot || col.norm_sqr() == 0.0 {
                        continue;
                    }
                    let proj = col.dot(&w);
                    w.sub_scaled(proj, col);
                }
            }
            let n = w.norm();
            if n > 0.5 {
                cols[slot] = w.scale_real(1.0 / n);
                break;
            }
        }
    }
}
