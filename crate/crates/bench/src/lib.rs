//! Fixed inputs shared by the benchmarks.

use odia_core::codebook::{grassmannian_codebook, Codebook};
use odia_core::receiver::{cell_reports, stack_interference_matrix};
use odia_core::{
    db_to_linear, generate_realization, Algorithm, ComplexMatrix, FeedbackMode, NetworkConfig, NetworkRealization, Rng,
    UserReport,
};

pub const ALGORITHMS: [Algorithm; 5] = [
    Algorithm::SeOdia,
    Algorithm::Odia,
    Algorithm::OdiaLf,
    Algorithm::MinInr,
    Algorithm::MaxSnr,
];

/// The reference network: K = 3, M = 4, L = 2, S = 2 at 20 dB.
pub fn network(n: usize) -> NetworkConfig {
    NetworkConfig::new(3, 4, 2, n, 2, db_to_linear(20.0)).expect("valid network")
}

pub fn realization(n: usize, seed: u64) -> NetworkRealization {
    generate_realization(&network(n), &mut Rng::new(seed))
}

/// Stacked interference matrix of user 0 in cell 0.
pub fn interference_matrix(seed: u64) -> ComplexMatrix {
    stack_interference_matrix(&realization(2, seed), 0, 0)
}

pub fn exact_reports(n: usize, seed: u64) -> Vec<UserReport> {
    cell_reports(&realization(n, seed), 0, FeedbackMode::Exact).expect("reports")
}

/// Grassmannian codebook in the effective-channel dimension.
pub fn codebook(bits: u32, seed: u64) -> Codebook {
    grassmannian_codebook(&mut Rng::new(seed), 2, 1 << bits, 200).0
}
