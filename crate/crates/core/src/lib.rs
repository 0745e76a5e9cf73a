//! Opportunistic downlink interference alignment for multi-cell MIMO
//! networks: per-user receive filtering and feedback, user scheduling,
//! zero-forcing precoding, limited feedback and a Monte Carlo harness.

pub mod channel;
pub mod codebook;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod precoder;
pub mod receiver;
pub mod scheduler;
pub mod validation;

mod serde_float;

pub use channel::{db_to_linear, generate_realization, linear_to_db, NetworkConfig, NetworkRealization};
pub use codebook::{Codebook, CodebookKind, PackingQuality};
pub use error::{Error, Result};
pub use harness::{
    emit_results, grid_search_se_odia, run_sweep, ExperimentConfig, GridSearchResult, OutputFormat, SweepResult,
};
pub use metrics::{per_user_rate, trial_metrics, DofEstimate, TrialMetrics, UserMetrics};
pub use numerics::{Complex64, ComplexMatrix, ComplexVector, Rng, SvdResult};
pub use precoder::PrecoderSet;
pub use receiver::{EffectiveChannel, FeedbackMode, GainExponent, InterferenceProfile, UserReport};
pub use scheduler::{Algorithm, OutagePolicy, ScheduleDecision, SeOdiaParams};
