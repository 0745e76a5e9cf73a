use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Default upper bound on the 1-norm condition number accepted by [`invert`].
pub const DEFAULT_CONDITION_CAP: f64 = 1e12;

/// Inverse with the default condition cap.
pub fn invert(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    invert_with_cap(m, DEFAULT_CONDITION_CAP)
}

/// Gauss-Jordan inverse with partial pivoting.
///
/// Fails with [`Error::Singular`] when a pivot vanishes or when the estimate
/// `‖m‖₁·‖m⁻¹‖₁` exceeds `cap`.
pub fn invert_with_cap(m: &ComplexMatrix, cap: f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm()))
            .expect("non-empty pivot range");
        let pivot = a[(pivot_row, col)];
        if pivot.norm() == 0.0 || !pivot.norm().is_finite() {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot_row, c)];
                a[(pivot_row, c)] = tmp;
                let tmp = inv[(col, c)];
                inv[(col, c)] = inv[(pivot_row, c)];
                inv[(pivot_row, c)] = tmp;
            }
        }
        let scale = Complex64::new(1.0, 0.0) / pivot;
        for c in 0..n {
            a[(col, c)] *= scale;
            inv[(col, c)] *= scale;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor.norm() == 0.0 {
                continue;
            }
            for c in 0..n {
                let da = a[(col, c)];
                let di = inv[(col, c)];
                a[(r, c)] -= factor * da;
                inv[(r, c)] -= factor * di;
            }
        }
    }

    let condition = m.one_norm() * inv.one_norm();
    if !condition.is_finite() || condition > cap || !inv.is_finite() {
        return Err(Error::Singular { condition });
    }
    Ok(inv)
}
