use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, ComplexVector};

/// Seeded, portable random stream. All randomness in the crate flows through
/// this type; identical seeds and call sequences give bit-identical draws.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent child stream keyed by `tags`.
    pub fn derive(seed: u64, tags: &[u64]) -> Self {
        Rng::new(mix_seed(seed, tags))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 32-bit words consumed so far.
    pub fn word_position(&self) -> u128 {
        self.inner.get_word_pos()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw from an empty range");
        self.inner.random_range(0..n)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Circularly-symmetric CN(0, 1): real and imaginary parts N(0, 1/2).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    /// Unit-mean exponential.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds tags into a seed; distinct tag lists give unrelated seeds.
pub fn mix_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(seed), |acc, &t| {
        splitmix(acc ^ splitmix(t.wrapping_add(0x632b_e59b_d9b4_e019)))
    })
}

/// `rows × cols` matrix of i.i.d. CN(0, 1) entries, drawn row by row.
pub fn sample_gaussian_matrix(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian())
}

pub fn sample_gaussian_vector(rng: &mut Rng, len: usize) -> ComplexVector {
    (0..len).map(|_| rng.complex_gaussian()).collect()
}

/// Haar-distributed `rows × cols` matrix with orthonormal columns.
///
/// Gram-Schmidt (applied twice per column) on a Gaussian matrix; the implied
/// R factor has a positive diagonal, which is what makes the result Haar.
pub fn sample_orthonormal_columns(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(
        cols <= rows,
        "cannot fit {cols} orthonormal columns in dimension {rows}"
    );
    loop {
        let g = sample_gaussian_matrix(rng, rows, cols);
        if let Some(q) = orthonormalize_columns(&g) {
            return q;
        }
    }
}

/// Uniform unit vector in `C^len`.
pub fn sample_unit_vector(rng: &mut Rng, len: usize) -> ComplexVector {
    loop {
        if let Some(v) = sample_gaussian_vector(rng, len).normalized() {
            return v;
        }
    }
}

fn orthonormalize_columns(g: &ComplexMatrix) -> Option<ComplexMatrix> {
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(g.cols());
    for c in 0..g.cols() {
        let mut w = g.column(c);
        let original = w.norm();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dot(&w);
                w.sub_scaled(proj, q);
            }
        }
        let n = w.norm();
        if n <= 1e-10 * original || n == 0.0 {
            return None;
        }
        cols.push(w.scale_real(1.0 / n));
    }
    Some(ComplexMatrix::from_columns(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments_at_large_sample_size() {
        let mut rng = Rng::new(1);
        let n = 100_000;
        let samples: Vec<Complex64> = (0..n).map(|_| rng.complex_gaussian()).collect();
        let mean: Complex64 = samples.iter().sum::<Complex64>() / n as f64;
        let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n as f64;
        assert!(mean.norm() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        let re_var = samples.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        assert!((re_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = sample_gaussian_matrix(&mut Rng::new(42), 2, 2);
        let b = sample_gaussian_matrix(&mut Rng::new(42), 2, 2);
        assert_eq!(a, b);
        let c = sample_gaussian_matrix(&mut Rng::new(43), 2, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn derived_streams_differ() {
        assert_ne!(mix_seed(1, &[0, 1]), mix_seed(1, &[1, 0]));
        assert_ne!(mix_seed(1, &[0]), mix_seed(2, &[0]));
        assert_eq!(mix_seed(9, &[3, 4]), mix_seed(9, &[3, 4]));
    }

    #[test]
    fn scalar_orthonormal_column_has_unit_modulus() {
        let mut rng = Rng::new(2);
        let q = sample_orthonormal_columns(&mut rng, 1, 1);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_columns_gram_is_identity() {
        let mut rng = Rng::new(3);
        for _ in 0..100 {
            let q = sample_orthonormal_columns(&mut rng, 4, 2);
            let g = q.adjoint().matmul(&q);
            assert!(g.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-10);
        }
    }

    #[test]
    fn haar_first_entry_has_mean_power_one_over_rows() {
        let mut rng = Rng::new(4);
        let draws = 10_000;
        let mean = (0..draws)
            .map(|_| sample_orthonormal_columns(&mut rng, 4, 2)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 0.25).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn exponential_has_unit_mean() {
        let mut rng = Rng::new(5);
        let n = 50_000;
        let m = (0..n).map(|_| rng.exponential()).sum::<f64>() / n as f64;
        assert!((m - 1.0).abs() < 0.02);
    }
}
