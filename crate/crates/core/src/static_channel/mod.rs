//! The static (LTI) channel between two fixed points.
//!
//! Each eigenpath contributes a real gain (reflection losses, geometric
//! spreading and frequency-dependent absorption) and a pure delay. Summing
//! the paths gives the channel frequency response on a one-sided grid; the
//! impulse response is its Hermitian-extended inverse DFT. A sparse form
//! keeps one fractional-delay kernel per path and is what the time-varying
//! machinery samples lag by lag.

mod absorption;
mod cfr;
mod reflection;
mod sparse;

pub use absorption::{absorption_db_per_km, AbsorptionLaw};
pub use cfr::{
    forward_spectrum, hermitian_spectrum, path_gain, static_cfr, static_cir, FrequencyGrid, StaticCfr, StaticCir,
};
pub use reflection::{bottom_reflection, SURFACE_REFLECTION};
pub use sparse::{sparse_cir, SincKernel, SparseTap, SparseTapList};
