use serde::{Deserialize, Serialize};

use crate::bohr::MAX_RANK;
use crate::error::{Error, Result};
use crate::spectrum::check_mu;

/// Knobs shared by every pipeline.
///
/// `c_omega` is the single explicit constant behind every asymptotic bound:
/// `X << Y` is read as `X <= c_omega Y` and `X >> Y` as `X >= Y / c_omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mu: f64,
    /// Stands in for `f(16 mu)` of the structure theorem; must be `>= mu`.
    pub f: f64,
    pub c_omega: f64,
    /// Randomized restarts per extraction call.
    pub extraction_budget: usize,
    /// Cap on iterated extraction rounds.
    pub max_rounds: usize,
    /// Overrides the default target factor in the large-coefficient case.
    pub large_l: Option<f64>,
    /// Shortest progression the iteration driver will rescale onto.
    pub ap_floor: usize,
    pub tolerance: f64,
    pub max_rank: usize,
    /// Random subsets Y tested per selection certificate.
    pub selection_samples: usize,
    /// Cap on |Y| in the nonsmoothing transform sums.
    pub y_cap: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mu: 0.05,
            f: 0.05,
            c_omega: 1.0,
            extraction_budget: 8,
            max_rounds: 16,
            large_l: None,
            ap_floor: 8,
            tolerance: 1e-6,
            max_rank: MAX_RANK,
            selection_samples: 50,
            y_cap: 256,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        check_mu(self.mu)?;
        if !(self.f >= self.mu && self.f < 1.0) {
            return Err(Error::invalid(format!(
                "f must satisfy mu <= f < 1, got f = {} with mu = {}",
                self.f, self.mu
            )));
        }
        if !(self.c_omega > 0.0 && self.c_omega.is_finite()) {
            return Err(Error::invalid(format!("c_omega must be positive, got {}", self.c_omega)));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid(format!("tolerance must be >= 0, got {}", self.tolerance)));
        }
        if let Some(l) = self.large_l {
            if !(l >= 1.0) {
                return Err(Error::invalid(format!("large_l must be >= 1, got {l}")));
            }
        }
        if self.max_rank == 0 || self.max_rank > MAX_RANK {
            return Err(Error::invalid(format!(
                "max_rank must lie in [1, {MAX_RANK}], got {}",
                self.max_rank
            )));
        }
        if self.y_cap == 0 {
            return Err(Error::invalid("y_cap must be positive"));
        }
        Ok(())
    }

    pub(crate) fn round_seed(&self, round: usize) -> u64 {
        self.seed.wrapping_add(round as u64)
    }
}
