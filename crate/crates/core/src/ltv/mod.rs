//! Linear time-varying channel: Green's function, type I and type II
//! impulse responses, their interconversion, and the two filtering
//! structures.
//!
//! Conventions, with `g(n, m)` the response at sample `n` to an impulse
//! applied at sample `m`:
//!
//! - type I: `p_n(m) = g(n, n - m)`, rows switch at the output;
//! - type II: `r_n(m) = g(n + m, n)`, rows switch at the input;
//! - `p_n(m) = r_{n-m}(m)` and `r_n(m) = p_{n+m}(m)`.

mod filter;
mod green;
mod grid;
mod spatial;

pub use filter::{filter_type1, filter_type2, SignalBuffer};
pub use green::{DynamicScenario, GreensFunction, HistoryCounters, MatrixGreen, ScenarioGreen, SparseRow};
pub use grid::{
    compute_grid, convert_covered, convert_type1_to_type2, convert_type2_to_type1, truncation_len, CirKind, LtvCirGrid,
};
pub use spatial::SpatialChannel;

use serde::{Deserialize, Serialize};

/// What to do when a lag needs a transceiver position outside its
/// trajectory's `0..=duration` range.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryPolicy {
    /// Continue the straight-line motion before the start / after the end.
    #[default]
    Extrapolate,
    /// Treat the channel as silent for such lags.
    Truncate,
}

/// Knobs of the per-sample synthesis of static responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Half-width of the windowed-sinc fractional-delay kernel (samples).
    pub kernel_halfwidth: usize,
    /// Frequency at which each path's gain is evaluated (Hz).
    pub reference_frequency: f64,
    /// Distance spacing of the gain cache (m); 0 disables caching.
    pub cache_quantum_dd: f64,
    pub history: HistoryPolicy,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            kernel_halfwidth: 32,
            reference_frequency: 64e3,
            cache_quantum_dd: 0.01,
            history: HistoryPolicy::Extrapolate,
        }
    }
}
