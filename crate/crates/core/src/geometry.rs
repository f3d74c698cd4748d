//! Two-dimensional waveguide geometry and image-method eigenpaths.
//!
//! The water column is bounded by a flat pressure-release surface and a flat,
//! parallel fluid seabed. Heights are measured above the seabed; the depth of
//! a point below the surface is `depth_w - height_above_bottom`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::static_channel::{bottom_reflection, AbsorptionLaw, SURFACE_REFLECTION};

/// Physical environment of the shallow-water channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waveguide {
    /// Total water column depth in meters.
    pub depth_w: f64,
    /// Sound speed in the water column (m/s).
    pub sound_speed_c: f64,
    /// Sound speed in the (fluid) seabed (m/s).
    pub bottom_speed_cb: f64,
    /// Seabed density (kg/m³).
    pub bottom_density_rho_b: f64,
    /// Water density (kg/m³).
    pub water_density_rho: f64,
    /// Geometric spreading exponent, 1 (cylindrical) to 2 (spherical).
    pub spreading_exponent_k: f64,
    /// Largest number of surface and of bottom reflections retained.
    pub max_reflections_pmax: u32,
    /// Frequency-dependent absorption law applied along each path.
    #[serde(default)]
    pub absorption: AbsorptionLaw,
}

impl Default for Waveguide {
    fn default() -> Self {
        Self {
            depth_w: 18.0,
            sound_speed_c: 1500.0,
            bottom_speed_cb: 1300.0,
            bottom_density_rho_b: 1800.0,
            water_density_rho: 1000.0,
            spreading_exponent_k: 1.5,
            max_reflections_pmax: 10,
            absorption: AbsorptionLaw::Thorp,
        }
    }
}

impl Waveguide {
    pub fn validate(&self) -> Result<()> {
        positive("depth_w", self.depth_w)?;
        positive("sound_speed_c", self.sound_speed_c)?;
        positive("bottom_speed_cb", self.bottom_speed_cb)?;
        positive("bottom_density_rho_b", self.bottom_density_rho_b)?;
        positive("water_density_rho", self.water_density_rho)?;
        if !(self.spreading_exponent_k >= 1.0) || !self.spreading_exponent_k.is_finite() {
            return Err(Error::domain("spreading_exponent_k", self.spreading_exponent_k, ">= 1"));
        }
        Ok(())
    }

    pub fn check_height(&self, height: f64) -> Result<()> {
        if !(0.0..=self.depth_w).contains(&height) {
            return Err(Error::domain("height_above_bottom", height, "within [0, depth_w]"));
        }
        Ok(())
    }
}

fn positive(what: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, value, "> 0"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    /// Horizontal coordinate (m).
    pub x: f64,
    /// Height above the seabed (m).
    pub height_above_bottom: f64,
}

impl Position {
    pub fn new(x: f64, height_above_bottom: f64) -> Self {
        Self { x, height_above_bottom }
    }
}

/// Straight-line horizontal motion at constant speed, sampled every
/// `sample_period_ts` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub start: Position,
    /// Signed velocity along x (m/s).
    pub velocity_x: f64,
    pub sample_period_ts: f64,
    pub duration_samples: u64,
}

impl Trajectory {
    pub fn stationary(start: Position, sample_period_ts: f64, duration_samples: u64) -> Self {
        Self {
            start,
            velocity_x: 0.0,
            sample_period_ts,
            duration_samples,
        }
    }

    pub fn position_at(&self, n: i64) -> Result<Position> {
        if n < 0 || n as u64 > self.duration_samples {
            return Err(Error::Range {
                index: n,
                duration: self.duration_samples,
            });
        }
        Ok(Position::new(self.x_at(n), self.start.height_above_bottom))
    }

    /// Horizontal coordinate at `n`, extrapolating the straight line outside
    /// the trajectory duration.
    #[inline]
    pub fn x_at(&self, n: i64) -> f64 {
        self.start.x + self.velocity_x * (n as f64 * self.sample_period_ts)
    }

    #[inline]
    pub fn covers(&self, n: i64) -> bool {
        n >= 0 && n as u64 <= self.duration_samples
    }
}

/// Which boundary a ray with equal surface and bottom counts meets first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FirstBounce {
    None,
    Surface,
    Bottom,
}

/// A ray family between two heights: fixed reflection sequence and the
/// vertical extent of the unfolded (mirror-image) path. Its length at
/// horizontal separation `d` is `hypot(d, vertical)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayFamily {
    pub n_surface: u32,
    pub n_bottom: u32,
    pub first: FirstBounce,
    pub vertical: f64,
}

impl RayFamily {
    #[inline]
    pub fn length(&self, d: f64) -> f64 {
        d.hypot(self.vertical)
    }

    #[inline]
    pub fn grazing_angle(&self, d: f64) -> f64 {
        self.vertical.atan2(d)
    }

    /// Product of surface and bottom reflection coefficients at horizontal
    /// separation `d`.
    pub fn cum_reflection(&self, wg: &Waveguide, d: f64) -> f64 {
        let surface = SURFACE_REFLECTION.powi(self.n_surface as i32);
        if self.n_bottom == 0 {
            return surface;
        }
        let grazing = self.grazing_angle(d);
        // Grazing incidence is the limit of the two-fluid coefficient.
        let bottom = if grazing > 0.0 {
            bottom_reflection(wg, grazing).unwrap_or(-1.0)
        } else {
            -1.0
        };
        surface * bottom.powi(self.n_bottom as i32)
    }
}

/// All ray families with at most `pmax` surface and `pmax` bottom bounces
/// between a source at `h_tx` and a receiver at `h_rx` (heights above the
/// seabed), in a deterministic order.
pub fn ray_families(wg: &Waveguide, h_tx: f64, h_rx: f64) -> Vec<RayFamily> {
    let w = wg.depth_w;
    let pmax = wg.max_reflections_pmax;
    let (zs, zr) = (w - h_tx, w - h_rx);
    let mut out = Vec::with_capacity(4 * pmax as usize + 1);
    out.push(RayFamily {
        n_surface: 0,
        n_bottom: 0,
        first: FirstBounce::None,
        vertical: (zs - zr).abs(),
    });
    for k in 0..=pmax {
        let kf = k as f64;
        if k >= 1 {
            out.push(RayFamily {
                n_surface: k,
                n_bottom: k,
                first: FirstBounce::Surface,
                vertical: zs + (2.0 * kf - 1.0) * w + h_rx,
            });
            out.push(RayFamily {
                n_surface: k,
                n_bottom: k,
                first: FirstBounce::Bottom,
                vertical: h_tx + (2.0 * kf - 1.0) * w + zr,
            });
        }
        if k < pmax {
            // one more surface than bottom bounce: starts and ends at the surface
            out.push(RayFamily {
                n_surface: k + 1,
                n_bottom: k,
                first: FirstBounce::Surface,
                vertical: 2.0 * kf * w + zs + zr,
            });
            out.push(RayFamily {
                n_surface: k,
                n_bottom: k + 1,
                first: FirstBounce::Bottom,
                vertical: 2.0 * kf * w + h_tx + h_rx,
            });
        }
    }
    out
}

/// One geometric ray between two fixed points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpath {
    pub n_surface: u32,
    pub n_bottom: u32,
    pub first: FirstBounce,
    /// Vertical extent of the unfolded path (m).
    pub vertical: f64,
    pub length_lp: f64,
    pub delay_tau_p: f64,
    /// Angle between the ray and the horizontal (rad).
    pub grazing_angle: f64,
    pub cum_reflection: f64,
}

impl Eigenpath {
    pub fn from_family(wg: &Waveguide, family: &RayFamily, d: f64) -> Self {
        let length_lp = family.length(d);
        Self {
            n_surface: family.n_surface,
            n_bottom: family.n_bottom,
            first: family.first,
            vertical: family.vertical,
            length_lp,
            delay_tau_p: length_lp / wg.sound_speed_c,
            grazing_angle: family.grazing_angle(d),
            cum_reflection: family.cum_reflection(wg, d),
        }
    }
}

/// Eigenpaths between `tx` and `rx`, sorted by ascending delay.
pub fn enumerate_eigenpaths(wg: &Waveguide, tx: Position, rx: Position) -> Result<Vec<Eigenpath>> {
    wg.validate()?;
    wg.check_height(tx.height_above_bottom)?;
    wg.check_height(rx.height_above_bottom)?;
    let d = (tx.x - rx.x).abs();
    if d == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    let mut paths: Vec<Eigenpath> = ray_families(wg, tx.height_above_bottom, rx.height_above_bottom)
        .iter()
        .map(|f| Eigenpath::from_family(wg, f, d))
        .collect();
    paths.sort_by(|a, b| {
        a.delay_tau_p
            .total_cmp(&b.delay_tau_p)
            .then(a.n_surface.cmp(&b.n_surface))
            .then(a.n_bottom.cmp(&b.n_bottom))
            .then(a.first.cmp(&b.first))
    });
    Ok(paths)
}
