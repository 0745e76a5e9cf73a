//! Network topology and per-block channel realizations.
//!
//! Every cell `k` has an `M`-antenna base station and `N` users with `L`
//! antennas. A realization holds the `L×M` channel from every base station to
//! every user, plus each cell's reference beamformer `P_k` (`M×S`, orthonormal
//! columns), regenerated per block from the same seeded stream that users and
//! base stations share.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sample_gaussian_matrix, sample_orthonormal_columns, ComplexMatrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Cells.
    pub k: usize,
    /// Base-station antennas.
    pub m: usize,
    /// Antennas per user.
    pub l: usize,
    /// Users per cell.
    pub n: usize,
    /// Streams (selected users) per cell.
    pub s: usize,
    /// Linear SNR; noise variance is `1/snr`.
    pub snr: f64,
}

impl NetworkConfig {
    pub fn new(k: usize, m: usize, l: usize, n: usize, s: usize, snr: f64) -> Result<Self> {
        let cfg = NetworkConfig { k, m, l, n, s, snr };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::config(format!("need at least 2 cells, got K={}", self.k)));
        }
        self.validate_dimensions()
    }

    /// Same as [`validate`](Self::validate) but admits a single cell, which is
    /// useful for interference-free sanity checks.
    pub fn validate_dimensions(&self) -> Result<()> {
        let NetworkConfig { k, m, l, n, s, snr } = *self;
        if k < 1 || m < 1 || l < 1 || s < 1 {
            return Err(Error::config("all dimensions must be at least 1"));
        }
        if s > m {
            return Err(Error::config(format!("S={s} streams exceed M={m} antennas")));
        }
        if n < s {
            return Err(Error::config(format!("N={n} users cannot fill S={s} streams")));
        }
        if k >= 2 && l > (k - 1) * s {
            return Err(Error::config(format!(
                "L={l} must be below (K-1)S+1={}; otherwise interference is trivially nulled",
                (k - 1) * s + 1
            )));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::config(format!("SNR must be positive and finite, got {snr}")));
        }
        Ok(())
    }

    pub fn with_snr(mut self, snr: f64) -> Self {
        self.snr = snr;
        self
    }

    pub fn with_users(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    /// Noise variance per receive antenna.
    pub fn noise_variance(&self) -> f64 {
        1.0 / self.snr
    }

    /// Tail exponent `(K-1)S - L + 1` of the scheduling-metric CDF.
    pub fn tail_exponent(&self) -> usize {
        ((self.k - 1) * self.s + 1).saturating_sub(self.l)
    }

    /// Rows of the stacked interference matrix, `(K-1)S`.
    pub fn interference_rows(&self) -> usize {
        (self.k - 1) * self.s
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One transmission block of channels and reference beamformers.
#[derive(Clone, Debug)]
pub struct NetworkRealization {
    config: NetworkConfig,
    /// Indexed by `(serving cell, user, source cell)` in row-major order.
    channels: Vec<ComplexMatrix>,
    reference_beamformers: Vec<ComplexMatrix>,
}

impl NetworkRealization {
    /// Assembles a realization from explicit matrices, checking shapes.
    pub fn from_parts(
        config: NetworkConfig,
        channels: Vec<ComplexMatrix>,
        reference_beamformers: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let NetworkConfig { k, m, l, n, s, .. } = config;
        if channels.len() != k * n * k {
            return Err(Error::Shape(format!(
                "expected {} channel matrices, got {}",
                k * n * k,
                channels.len()
            )));
        }
        if channels.iter().any(|h| h.shape() != (l, m)) {
            return Err(Error::Shape(format!("every channel must be {l}x{m}")));
        }
        if reference_beamformers.len() != k || reference_beamformers.iter().any(|p| p.shape() != (m, s)) {
            return Err(Error::Shape(format!("need {k} reference beamformers of shape {m}x{s}")));
        }
        Ok(NetworkRealization {
            config,
            channels,
            reference_beamformers,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// `H_source^{[cell, user]}`: channel from base station `source` to user
    /// `user` of cell `cell`.
    pub fn channel(&self, cell: usize, user: usize, source: usize) -> &ComplexMatrix {
        let NetworkConfig { k, n, .. } = self.config;
        debug_assert!(cell < k && user < n && source < k);
        &self.channels[(cell * n + user) * k + source]
    }

    /// `P_cell`.
    pub fn reference_beamformer(&self, cell: usize) -> &ComplexMatrix {
        &self.reference_beamformers[cell]
    }

    /// Same channels evaluated at a different SNR.
    pub fn at_snr(&self, snr: f64) -> NetworkRealization {
        NetworkRealization {
            config: self.config.with_snr(snr),
            channels: self.channels.clone(),
            reference_beamformers: self.reference_beamformers.clone(),
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }
}

/// Draws a fresh block: reference beamformers for cells `0..K` first, then
/// every channel in `(cell, user, source)` order.
pub fn generate_realization(cfg: &NetworkConfig, rng: &mut Rng) -> NetworkRealization {
    let NetworkConfig { k, m, l, n, s, .. } = *cfg;
    let reference_beamformers = (0..k).map(|_| sample_orthonormal_columns(rng, m, s)).collect();
    let channels = (0..k * n * k).map(|_| sample_gaussian_matrix(rng, l, m)).collect();
    NetworkRealization {
        config: *cfg,
        channels,
        reference_beamformers,
    }
}
