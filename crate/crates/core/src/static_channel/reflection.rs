use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::Waveguide;

/// Pressure-release sea surface.
pub const SURFACE_REFLECTION: f64 = -1.0;

/// Rayleigh reflection coefficient of a fluid half-space seabed at the given
/// grazing angle (radians, measured from the horizontal).
///
/// Beyond the critical angle the coefficient has unit magnitude; it is
/// returned as `1.0`, the value at the critical angle itself.
pub fn bottom_reflection(wg: &Waveguide, grazing: f64) -> Result<f64> {
    if !(grazing > 0.0 && grazing <= FRAC_PI_2) {
        return Err(Error::domain("grazing angle", grazing, "(0, pi/2]"));
    }
    let density_ratio = wg.bottom_density_rho_b / wg.water_density_rho;
    let index = wg.sound_speed_c / wg.bottom_speed_cb;
    let cos = grazing.cos();
    let disc = index * index - cos * cos;
    if disc < 0.0 {
        return Ok(1.0);
    }
    let a = density_ratio * grazing.sin();
    let b = disc.sqrt();
    Ok((a - b) / (a + b))
}
