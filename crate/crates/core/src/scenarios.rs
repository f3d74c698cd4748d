//! Builders for the canonical motion cases: receiver moving away from a still
//! transmitter, transmitter moving away from a still receiver, both still,
//! and both moving with the same velocity.
//!
//! Positive `v` always increases the separation (or, in the co-moving case,
//! moves both transceivers in the direction from transmitter to receiver).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Position, Trajectory, Waveguide};
use crate::ltv::{DynamicScenario, SpatialChannel, SynthesisConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    MovingRx,
    MovingTx,
    Static,
    CoMoving,
}

impl CaseKind {
    pub const ALL: [CaseKind; 4] = [
        CaseKind::MovingRx,
        CaseKind::MovingTx,
        CaseKind::Static,
        CaseKind::CoMoving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::MovingRx => "moving_rx",
            CaseKind::MovingTx => "moving_tx",
            CaseKind::Static => "static",
            CaseKind::CoMoving => "co_moving",
        }
    }

    /// `(v_tx, v_rx)` with positive meaning "moving away from the other end".
    pub fn away_velocities(self, v: f64) -> (f64, f64) {
        match self {
            CaseKind::MovingRx => (0.0, v),
            CaseKind::MovingTx => (v, 0.0),
            CaseKind::Static => (0.0, 0.0),
            // the transmitter chases the receiver
            CaseKind::CoMoving => (-v, v),
        }
    }
}

impl std::str::FromStr for CaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case kind '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub kind: CaseKind,
    pub d0: f64,
    pub v: f64,
    pub wg: Waveguide,
    /// Common height of both transceivers above the seabed (m).
    pub height: f64,
    pub fs: f64,
    pub duration_samples: u64,
    /// Transmitter x coordinate at n = 0.
    pub a0: f64,
}

impl CaseSpec {
    /// Case with the default duration (a 1 m sweep of the distance at speed
    /// `v`, or a single sample when `v = 0`) and `a0 = 0`.
    pub fn new(kind: CaseKind, wg: Waveguide, d0: f64, v: f64, height: f64, fs: f64) -> Self {
        Self {
            kind,
            d0,
            v,
            wg,
            height,
            fs,
            duration_samples: default_duration(v, fs),
            a0: 0.0,
        }
    }

    pub fn sample_period(&self) -> f64 {
        1.0 / self.fs
    }

    pub fn validate(&self) -> Result<()> {
        self.wg.validate()?;
        self.wg.check_height(self.height)?;
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(Error::domain("d0", self.d0, "> 0 m"));
        }
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(Error::domain("fs", self.fs, "> 0 Hz"));
        }
        let c = self.wg.sound_speed_c;
        if !(self.v >= 0.0) {
            return Err(Error::domain("v", self.v, ">= 0 m/s"));
        }
        if !(self.v < c) {
            return Err(Error::UnsupportedRegime {
                speed: self.v,
                sound_speed: c,
            });
        }
        if self.v > 0.1 * c {
            log::warn!(
                "speed {} m/s exceeds 10% of the sound speed; results leave the slow-mobility regime",
                self.v
            );
        }
        Ok(())
    }

    /// Closed-form transceiver separation at sample `n`.
    pub fn distance_law(&self, n: i64) -> f64 {
        match self.kind {
            CaseKind::MovingRx | CaseKind::MovingTx => self.d0 + self.v * (n as f64 * self.sample_period()),
            CaseKind::Static | CaseKind::CoMoving => self.d0,
        }
    }

    /// Samples `0, stride, 2 stride, ..` up to the duration (inclusive).
    pub fn n_grid(&self, stride: usize) -> Vec<i64> {
        let stride = stride.max(1) as u64;
        (0..=self.duration_samples / stride)
            .map(|k| (k * stride) as i64)
            .collect()
    }

    /// Stride giving one row per `step` meters of relative displacement.
    pub fn stride_for_displacement(&self, step: f64) -> usize {
        if self.v == 0.0 {
            return self.duration_samples.max(1) as usize;
        }
        ((step / (self.v * self.sample_period())).round() as usize).max(1)
    }
}

fn default_duration(v: f64, fs: f64) -> u64 {
    if v > 0.0 {
        (fs / v).round() as u64
    } else {
        0
    }
}

/// Trajectories of the case, starting at `a0`.
pub fn build(case: &CaseSpec) -> Result<DynamicScenario> {
    case.validate()?;
    let ts = case.sample_period();
    let (vx_tx, vx_rx) = match case.kind {
        CaseKind::MovingRx => (0.0, case.v),
        CaseKind::MovingTx => (-case.v, 0.0),
        CaseKind::Static => (0.0, 0.0),
        CaseKind::CoMoving => (case.v, case.v),
    };
    let traj = |x: f64, vx: f64| Trajectory {
        start: Position::new(x, case.height),
        velocity_x: vx,
        sample_period_ts: ts,
        duration_samples: case.duration_samples,
    };
    let scenario = DynamicScenario {
        wg: case.wg,
        tx_traj: traj(case.a0, vx_tx),
        rx_traj: traj(case.a0 + case.d0, vx_rx),
        fs: case.fs,
        duration_samples: case.duration_samples,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn channel_for(case: &CaseSpec, cfg: &SynthesisConfig) -> Result<SpatialChannel> {
    case.validate()?;
    SpatialChannel::new(&case.wg, case.height, case.height, case.fs, cfg)
}

/// Static LTI response `h^S_{d0}(m)` at the case's separation.
pub fn static_response(case: &CaseSpec, cfg: &SynthesisConfig) -> Result<Vec<f64>> {
    let ch = channel_for(case, cfg)?;
    Ok(ch.static_taps(case.d0, ch.support_len(case.d0)))
}

/// LTI response of the co-moving case, `h^D(m) = h^S_{d0 + v m Ts}(m)`.
///
/// Each path's arrival solves `c t = |(d0 + v t, V)|` in closed form; the
/// lags around it are sampled from the static channel at the distance the
/// receiver has reached by then.
pub fn dynamic_lti_response(case: &CaseSpec, cfg: &SynthesisConfig) -> Result<Vec<f64>> {
    if case.kind != CaseKind::CoMoving {
        return Err(Error::Config(format!(
            "dynamic LTI response needs a co-moving case, got {}",
            case.kind.name()
        )));
    }
    let ch = channel_for(case, cfg)?;
    let (c, v, d0, fs) = (case.wg.sound_speed_c, case.v, case.d0, case.fs);
    let ts = case.sample_period();
    let half = ch.kernel().half_width() as f64 / (1.0 - v / c) + 2.0;
    let windows: Vec<(usize, i64, i64)> = ch
        .families()
        .iter()
        .enumerate()
        .map(|(p, fam)| {
            let (a, b, k) = (c * c - v * v, d0 * v, d0 * d0 + fam.vertical * fam.vertical);
            let t = (b + (b * b + a * k).sqrt()) / a;
            let center = t * fs;
            (
                p,
                (center - half).ceil().max(0.0) as i64,
                (center + half).floor() as i64,
            )
        })
        .collect();
    let len = windows.iter().map(|w| w.2 + 1).max().unwrap_or(0).max(0) as usize;
    let mut taps = vec![0.0; len];
    for (p, lo, hi) in windows {
        for lag in lo..=hi {
            let d = d0 + v * (lag as f64 * ts);
            taps[lag as usize] += ch.contribution(p, d, lag as f64);
        }
    }
    Ok(taps)
}
