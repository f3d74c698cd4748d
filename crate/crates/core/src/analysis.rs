//! Closed-form delay and Doppler predictions for the canonical cases, and
//! arrival-time measurements on simulated CIR rows.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ltv::{filter_type1, LtvCirGrid, ScenarioGreen, SignalBuffer, SynthesisConfig};
use crate::scenarios::{build, CaseKind, CaseSpec};

fn check_speed(v: f64, c: f64) -> Result<()> {
    if v.abs() < c {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime {
            speed: v.abs(),
            sound_speed: c,
        })
    }
}

/// Line-of-sight delay at separation `d` as it appears in a type-II row:
/// `d / c` when the receiver is still at reception time, `d / (c - v)` when
/// it keeps moving away while the wave travels.
pub fn los_delay(kind: CaseKind, d: f64, c: f64, v: f64) -> Result<f64> {
    check_speed(v, c)?;
    if !(d > 0.0) {
        return Err(Error::domain("d", d, "> 0 m"));
    }
    Ok(match kind {
        CaseKind::MovingTx | CaseKind::Static => d / c,
        CaseKind::MovingRx | CaseKind::CoMoving => d / (c - v),
    })
}

/// Extra delay of the moving-receiver case over the moving-transmitter case,
/// `d v / (c (c - v))`.
pub fn time_shift(d: f64, v: f64, c: f64) -> Result<f64> {
    check_speed(v, c)?;
    Ok(d * v / (c * (c - v)))
}

/// General Doppler equation `f0 (c - v_rx) / (c + v_tx)` with velocities
/// positive when moving away from the other end.
pub fn doppler_frequency(f0: f64, v_tx: f64, v_rx: f64, c: f64) -> Result<f64> {
    check_speed(v_tx, c)?;
    check_speed(v_rx, c)?;
    Ok(f0 * (c - v_rx) / (c + v_tx))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayReport {
    pub kind: CaseKind,
    pub d: f64,
    pub los_delay: f64,
    pub time_shift_vs_moving_tx: f64,
    /// `f_D / f0` for the case's transceiver velocities.
    pub doppler_factor: f64,
    /// Ratio of the moving-Rx to the moving-Tx Doppler factors, as implied
    /// by the general Doppler equation: `(c - v)(c + v) / c^2`.
    pub doppler_ratio_rx_over_tx: f64,
    /// The factor `(c + v) / (c - v)`, reported alongside for comparison.
    pub stated_factor: f64,
}

pub fn delay_report(kind: CaseKind, d: f64, c: f64, v: f64) -> Result<DelayReport> {
    let los = los_delay(kind, d, c, v)?;
    let shift = match kind {
        CaseKind::MovingRx | CaseKind::CoMoving => los - los_delay(CaseKind::MovingTx, d, c, v)?,
        CaseKind::MovingTx | CaseKind::Static => 0.0,
    };
    let (v_tx, v_rx) = kind.away_velocities(v);
    let rx = doppler_frequency(1.0, 0.0, v, c)?;
    let tx = doppler_frequency(1.0, v, 0.0, c)?;
    Ok(DelayReport {
        kind,
        d,
        los_delay: los,
        time_shift_vs_moving_tx: shift,
        doppler_factor: doppler_frequency(1.0, v_tx, v_rx, c)?,
        doppler_ratio_rx_over_tx: rx / tx,
        stated_factor: (c + v) / (c - v),
    })
}

/// A resolved arrival in a CIR row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    /// Fractional lag in samples.
    pub lag: f64,
    pub seconds: f64,
    /// Row magnitude at the nearest sample.
    pub magnitude: f64,
}

const INTERP_HALF: usize = 24;

/// Distance (samples) within which the sidelobes of a band-limited
/// fractional-delay pulse stay above -20 dB of its main lobe.
const SIDELOBE_SPAN: usize = 3;

/// Band-limited reconstruction of `row` at fractional lag `t`.
fn interpolate(row: &[f64], t: f64) -> f64 {
    let center = t.round() as i64;
    let lo = (center - INTERP_HALF as i64).max(0);
    let hi = (center + INTERP_HALF as i64).min(row.len() as i64 - 1);
    (lo..=hi)
        .map(|j| {
            let x = t - j as f64;
            let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
            row[j as usize] * s
        })
        .sum()
}

/// Fractional position of the band-limited peak near sample `k`, found by
/// golden-section search of `|row(t)|` on `[k - 1, k + 1]`.
pub fn refine_peak(row: &[f64], k: usize) -> f64 {
    let f = |t: f64| interpolate(row, t).abs();
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (k as f64 - 1.0, k as f64 + 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-7 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    // keep integer peaks exact when the neighbours are symmetric
    if (t - k as f64).abs() < 1e-6 {
        k as f64
    } else {
        t
    }
}

/// Leading-edge arrival detection relative to the row peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalDetector {
    /// Threshold below the row peak (dB, negative).
    pub threshold_db: f64,
}

impl Default for ArrivalDetector {
    fn default() -> Self {
        Self { threshold_db: -20.0 }
    }
}

impl ArrivalDetector {
    fn threshold(&self, row: &[f64]) -> Result<f64> {
        let peak = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if row.is_empty() || peak == 0.0 {
            return Err(Error::Measurement("row is empty or identically zero".into()));
        }
        Ok(peak * 10f64.powf(self.threshold_db / 20.0))
    }

    /// First sample reaching the threshold, moved to the strongest sample of
    /// the following sidelobe span, advanced to the top of its lobe and
    /// refined to a fractional lag.
    pub fn first_arrival(&self, row: &[f64], fs: f64) -> Result<Arrival> {
        let thr = self.threshold(row)?;
        let first = row
            .iter()
            .position(|v| v.abs() >= thr)
            .expect("peak reaches its own threshold");
        // the crossing may sit on a precursor sidelobe, separated from the
        // main lobe by a near-zero sample
        let end = (first + SIDELOBE_SPAN + 1).min(row.len());
        let mut k = (first..end)
            .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)))
            .expect("non-empty span");
        while k + 1 < row.len() && row[k + 1].abs() >= row[k].abs() {
            k += 1;
        }
        let lag = refine_peak(row, k);
        Ok(Arrival {
            lag,
            seconds: lag / fs,
            magnitude: row[k].abs(),
        })
    }

    /// Every local maximum at or above the threshold that is also the largest
    /// magnitude within `min_separation` samples, in lag order.
    pub fn arrivals(&self, row: &[f64], fs: f64, min_separation: usize) -> Result<Vec<Arrival>> {
        let thr = self.threshold(row)?;
        let mut out = Vec::new();
        for k in 0..row.len() {
            let v = row[k].abs();
            if v < thr {
                continue;
            }
            let lo = k.saturating_sub(min_separation);
            let hi = (k + min_separation + 1).min(row.len());
            // ties go to the earliest sample
            let dominant = (lo..hi).all(|j| row[j].abs() < v || (row[j].abs() == v && j >= k));
            if dominant {
                let lag = refine_peak(row, k);
                out.push(Arrival {
                    lag,
                    seconds: lag / fs,
                    magnitude: v,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowResidual {
    pub n: i64,
    pub d: f64,
    pub measured: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCheck {
    pub tolerance: f64,
    pub rows: Vec<RowResidual>,
}

impl GridCheck {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.residual.abs() <= self.tolerance)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |a, r| a.max(r.residual.abs()))
    }
}

fn check_row(grid: &LtvCirGrid, i: usize, d: f64, predicted: f64, det: &ArrivalDetector) -> Result<RowResidual> {
    let measured = det.first_arrival(&grid.rows[i], grid.fs)?.seconds;
    Ok(RowResidual {
        n: grid.n_values[i],
        d,
        measured,
        predicted,
        residual: measured - predicted,
    })
}

/// Measures the first arrival in the grid row at the report's distance (or
/// the only row, for single-row grids without distances) and compares it
/// with the predicted LOS delay.
pub fn verify_grid(grid: &LtvCirGrid, report: &DelayReport, tol: f64) -> Result<GridCheck> {
    verify_grid_with(grid, report, tol, &ArrivalDetector::default())
}

pub fn verify_grid_with(grid: &LtvCirGrid, report: &DelayReport, tol: f64, det: &ArrivalDetector) -> Result<GridCheck> {
    if grid.rows.is_empty() {
        return Err(Error::Measurement("grid has no rows".into()));
    }
    let i = match grid.row_nearest_distance(report.d) {
        Some(i) => i,
        None if grid.rows.len() == 1 => 0,
        None => {
            return Err(Error::Measurement(
                "grid rows carry no distances to match the report".into(),
            ))
        }
    };
    Ok(GridCheck {
        tolerance: tol,
        rows: vec![check_row(grid, i, report.d, report.los_delay, det)?],
    })
}

/// Residuals for every row, each predicted from its own recorded distance.
pub fn verify_rows(
    grid: &LtvCirGrid,
    kind: CaseKind,
    c: f64,
    v: f64,
    tol: f64,
    det: &ArrivalDetector,
) -> Result<GridCheck> {
    let distances = grid
        .distances
        .as_ref()
        .ok_or_else(|| Error::Measurement("grid rows carry no distances".into()))?;
    let rows = distances
        .iter()
        .enumerate()
        .map(|(i, &d)| check_row(grid, i, d, los_delay(kind, d, c, v)?, det))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridCheck { tolerance: tol, rows })
}

/// Frequency of a (nearly) sinusoidal signal from its upward zero
/// crossings, located by linear interpolation between samples.
pub fn zero_crossing_frequency(samples: &[f64], fs: f64) -> Result<f64> {
    let crossings: Vec<f64> = samples
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(i, w)| i as f64 + w[0] / (w[0] - w[1]))
        .collect();
    if crossings.len() < 2 {
        return Err(Error::Measurement(format!(
            "need at least two upward zero crossings, found {}",
            crossings.len()
        )));
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Ok((crossings.len() - 1) as f64 * fs / span)
}

/// Outcome of driving a scenario with a pure tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerMeasurement {
    pub f0: f64,
    pub measured: f64,
    /// `measured / f0`.
    pub factor: f64,
    /// Prediction of the general Doppler equation for the case.
    pub predicted_factor: f64,
}

/// Sends a tone of frequency `f0` through the type-I filter of `case` and
/// measures the received frequency once every path has arrived.
///
/// The case's duration is stretched to cover the whole simulation, so no
/// trajectory is extrapolated. Multipath makes the received signal beat; use
/// a line-of-sight-only waveguide for a clean tone.
pub fn measure_doppler(case: &CaseSpec, cfg: &SynthesisConfig, f0: f64) -> Result<DopplerMeasurement> {
    if !(f0 > 0.0 && f0 < 0.5 * case.fs) {
        return Err(Error::domain("tone frequency", f0, "in (0, fs / 2)"));
    }
    let probe = crate::ltv::SpatialChannel::new(&case.wg, case.height, case.height, case.fs, cfg)?;
    // generous bound on the longest lag: slowest path at 1.5x the start distance
    let lead = (1.5 * probe.support_len(1.5 * case.d0 + 1.0) as f64) as usize;
    let total = (4 * lead).max((0.1 * case.fs) as usize);
    let scenario = build(&CaseSpec {
        duration_samples: total as u64,
        ..*case
    })?;
    let green = ScenarioGreen::new(scenario, cfg)?;
    let w = 2.0 * PI * f0 / case.fs;
    let x = SignalBuffer::new((0..total).map(|n| (w * n as f64).sin()).collect(), case.fs);
    let y = filter_type1(&x, &green, total);
    let measured = zero_crossing_frequency(&y.samples[lead..], case.fs)?;
    let (v_tx, v_rx) = case.kind.away_velocities(case.v);
    Ok(DopplerMeasurement {
        f0,
        measured,
        factor: measured / f0,
        predicted_factor: doppler_frequency(1.0, v_tx, v_rx, case.wg.sound_speed_c)?,
    })
}
