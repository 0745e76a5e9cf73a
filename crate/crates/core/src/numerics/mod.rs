//! Dense complex linear algebra and seeded sampling.

mod inverse;
mod matrix;
pub mod random;
mod svd;

pub use inverse::{invert, invert_with_cap, DEFAULT_CONDITION_CAP};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use random::{
    mix_seed, sample_gaussian_matrix, sample_gaussian_vector, sample_orthonormal_columns, sample_unit_vector, Rng,
};
pub use svd::{svd, SvdResult};

pub use num_complex::Complex64;
