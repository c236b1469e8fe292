//! Joint beamformer and antenna-coder optimization.

pub mod alternating;
pub mod beamforming;
pub mod quasi_newton;
pub mod sebo;

use serde::{Deserialize, Serialize};

pub use alternating::{alternating_optimize, LinkModel, SolveReport};
pub use beamforming::{
    finite_difference_gradient, init_beamformer_svd, optimize_beamformer, Beamformer, BeamformerSolution,
    BeamformingObjective, GradientMode,
};
pub use sebo::{sebo, CoderObjective, SeboOptions, SeboOutcome};

/// Tuning knobs for the beamformer and coder searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Bits per exhaustive block (J).
    pub sebo_block_size: usize,
    /// Cap on stage-1 cycles per SEBO run.
    pub sebo_max_iters: usize,
    pub sebo_restarts: usize,
    /// Bits flipped in each coder per restart; `None` means ⌈Q/8⌉.
    pub sebo_flip_count: Option<usize>,
    /// Relative objective change that ends the alternating loop.
    pub ao_tolerance: f64,
    pub ao_max_iters: usize,
    pub qn_gradient_tolerance: f64,
    pub qn_max_iters: usize,
    pub gradient: GradientMode,
    pub rng_seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            sebo_block_size: 4,
            sebo_max_iters: 50,
            sebo_restarts: 3,
            sebo_flip_count: None,
            ao_tolerance: 1e-6,
            ao_max_iters: 20,
            qn_gradient_tolerance: 1e-8,
            qn_max_iters: 500,
            gradient: GradientMode::Analytic,
            rng_seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.sebo_block_size == 0 {
            return Err(crate::Error::InvalidParameter("sebo_block_size must be at least 1".into()));
        }
        if !(self.ao_tolerance > 0.0) || !(self.qn_gradient_tolerance > 0.0) {
            return Err(crate::Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.ao_max_iters == 0 {
            return Err(crate::Error::InvalidParameter("ao_max_iters must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sebo_options(&self, q_switches: usize) -> SeboOptions {
        SeboOptions {
            block_size: self.sebo_block_size,
            max_cycles: self.sebo_max_iters.max(1),
            restarts: self.sebo_restarts,
            flip_count: self.sebo_flip_count.unwrap_or(q_switches.div_ceil(8)),
        }
    }
}
