//! Numeric side: realizations, spectral radius, gain synthesis, simulation.

mod gain;
mod rng;
mod simulate;
mod spectral;
mod system;

pub use gain::{error_dynamics, synthesize_gain, GainConfig, GainMatrix, GainResult, GAIN_METHOD};
pub use rng::gaussian;
pub use simulate::{
    growth_ratio, simulate_nke, summarize, AgentSummary, EstimatorInit, SimConfig, SimulationTrace,
    DIVERGENCE_LEVEL,
};
pub use spectral::{gelfand_bound, numeric_observability_rank, spectral_radius};
pub use system::{instantiate, row_stochastic, NumericParams, NumericSystem, DEFAULT_MAGNITUDE};
