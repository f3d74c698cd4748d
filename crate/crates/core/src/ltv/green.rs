use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::geometry::{Trajectory, Waveguide};

use super::spatial::SpatialChannel;
use super::{HistoryPolicy, SynthesisConfig};

/// Run of consecutive lags `start..start + values.len()`.
#[derive(Debug, Clone, PartialEq)]
struct Segment {
    start: usize,
    values: Vec<f64>,
}

/// Lag-indexed CIR row stored as (possibly overlapping) segments; overlapping
/// values add.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseRow {
    segments: Vec<Segment>,
}

impl SparseRow {
    pub fn push(&mut self, start: usize, values: Vec<f64>) {
        if !values.is_empty() {
            self.segments.push(Segment { start, values });
        }
    }

    pub fn from_dense(values: Vec<f64>) -> Self {
        let mut row = Self::default();
        row.push(0, values);
        row
    }

    /// One past the largest stored lag.
    pub fn len(&self) -> usize {
        self.segments
            .iter()
            .map(|s| s.start + s.values.len())
            .max()
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `(lag, value)` pairs in storage order; a lag may repeat.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.segments
            .iter()
            .flat_map(|s| s.values.iter().enumerate().map(move |(k, &v)| (s.start + k, v)))
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (lag, v) in self.iter() {
            if lag < len {
                out[lag] += v;
            }
        }
        out
    }
}

/// An LTV system described by its Green's function `g(n, m)`: the response
/// at sample `n` to a unit impulse applied at sample `m`.
pub trait GreensFunction: Sync {
    fn eval(&self, n: i64, m: i64) -> f64;

    /// Type I row `p_n(lag) = g(n, n - lag)`.
    fn type1_row(&self, n: i64) -> SparseRow;

    /// Type II row `r_n(lag) = g(n + lag, n)`.
    fn type2_row(&self, n: i64) -> SparseRow;
}

/// Green's function given as an explicit causal matrix over
/// `n, m in first..first + size`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGreen {
    first: i64,
    size: usize,
    // row-major, [n][m]
    values: Vec<f64>,
}

impl MatrixGreen {
    /// Entries with `m > n` are ignored.
    pub fn from_fn(first: i64, size: usize, mut g: impl FnMut(i64, i64) -> f64) -> Self {
        let mut values = vec![0.0; size * size];
        for i in 0..size {
            for j in 0..=i {
                values[i * size + j] = g(first + i as i64, first + j as i64);
            }
        }
        Self { first, size, values }
    }

    fn index(&self, n: i64) -> Option<usize> {
        let i = n - self.first;
        (i >= 0 && (i as usize) < self.size).then_some(i as usize)
    }
}

impl GreensFunction for MatrixGreen {
    fn eval(&self, n: i64, m: i64) -> f64 {
        match (self.index(n), self.index(m)) {
            (Some(i), Some(j)) if j <= i => self.values[i * self.size + j],
            _ => 0.0,
        }
    }

    fn type1_row(&self, n: i64) -> SparseRow {
        match self.index(n) {
            Some(i) => SparseRow::from_dense((0..=i as i64).map(|lag| self.eval(n, n - lag)).collect()),
            None => SparseRow::default(),
        }
    }

    fn type2_row(&self, n: i64) -> SparseRow {
        match self.index(n) {
            Some(i) => SparseRow::from_dense((0..(self.size - i) as i64).map(|lag| self.eval(n + lag, n)).collect()),
            None => SparseRow::default(),
        }
    }
}

/// Moving transmitter and receiver in a waveguide, sampled at `fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicScenario {
    pub wg: Waveguide,
    pub tx_traj: Trajectory,
    pub rx_traj: Trajectory,
    pub fs: f64,
    pub duration_samples: u64,
}

impl DynamicScenario {
    pub fn validate(&self) -> Result<()> {
        self.wg.validate()?;
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(Error::domain("fs", self.fs, "> 0 Hz"));
        }
        let c = self.wg.sound_speed_c;
        for traj in [&self.tx_traj, &self.rx_traj] {
            self.wg.check_height(traj.start.height_above_bottom)?;
            if ((traj.sample_period_ts * self.fs) - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "trajectory sample period {} s does not match fs = {} Hz",
                    traj.sample_period_ts, self.fs
                )));
            }
            if !(traj.velocity_x.abs() < c) {
                return Err(Error::UnsupportedRegime {
                    speed: traj.velocity_x.abs(),
                    sound_speed: c,
                });
            }
        }
        Ok(())
    }
}

/// Snapshot of how many position lookups fell outside a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HistoryCounters {
    pub extrapolated: u64,
    pub truncated: u64,
}

#[derive(Default)]
struct LocalCounts {
    extrapolated: u64,
    truncated: u64,
}

/// Green's function of a [`DynamicScenario`]:
/// `g(n, m) = h^S_{a(m), b(n)}(n - m)`, the lag-`(n - m)` tap of the static
/// channel between the transmitter position at `m` and the receiver position
/// at `n`.
#[derive(Debug)]
pub struct ScenarioGreen {
    scenario: DynamicScenario,
    channel: SpatialChannel,
    policy: HistoryPolicy,
    extrapolated: AtomicU64,
    truncated: AtomicU64,
}

impl ScenarioGreen {
    pub fn new(scenario: DynamicScenario, cfg: &SynthesisConfig) -> Result<Self> {
        scenario.validate()?;
        let channel = SpatialChannel::new(
            &scenario.wg,
            scenario.tx_traj.start.height_above_bottom,
            scenario.rx_traj.start.height_above_bottom,
            scenario.fs,
            cfg,
        )?;
        Ok(Self {
            scenario,
            channel,
            policy: cfg.history,
            extrapolated: AtomicU64::new(0),
            truncated: AtomicU64::new(0),
        })
    }

    pub fn scenario(&self) -> &DynamicScenario {
        &self.scenario
    }

    pub fn channel(&self) -> &SpatialChannel {
        &self.channel
    }

    pub fn history_counters(&self) -> HistoryCounters {
        HistoryCounters {
            extrapolated: self.extrapolated.load(Ordering::Relaxed),
            truncated: self.truncated.load(Ordering::Relaxed),
        }
    }

    fn locate(&self, traj: &Trajectory, n: i64, counts: &mut LocalCounts) -> Option<f64> {
        if traj.covers(n) {
            return Some(traj.x_at(n));
        }
        match self.policy {
            HistoryPolicy::Extrapolate => {
                counts.extrapolated += 1;
                Some(traj.x_at(n))
            }
            HistoryPolicy::Truncate => {
                counts.truncated += 1;
                None
            }
        }
    }

    fn flush(&self, counts: LocalCounts) {
        if counts.extrapolated > 0 {
            self.extrapolated.fetch_add(counts.extrapolated, Ordering::Relaxed);
        }
        if counts.truncated > 0 {
            self.truncated.fetch_add(counts.truncated, Ordering::Relaxed);
        }
    }

    /// Horizontal separation between the transmitter at `m` and the receiver
    /// at `n`, or `None` when a position is unavailable.
    fn separation(&self, n: i64, m: i64, counts: &mut LocalCounts) -> Option<f64> {
        let tx = self.locate(&self.scenario.tx_traj, m, counts)?;
        let rx = self.locate(&self.scenario.rx_traj, n, counts)?;
        Some((rx - tx).abs())
    }

    /// Lag (in samples, fractional) at which path `p` arrives when the lag
    /// also moves one endpoint: the fixed point of
    /// `lag = fs * length_p(distance(lag)) / c`.
    fn arrival_fixed_point(&self, p: usize, distance: impl Fn(f64) -> f64) -> f64 {
        let mut lag = self.channel.arrival_samples(p, distance(0.0));
        for _ in 0..200 {
            let next = self.channel.arrival_samples(p, distance(lag));
            let done = (next - lag).abs() < 1e-9;
            lag = next;
            if done {
                break;
            }
        }
        lag
    }

    /// Builds a row where lag `l` is evaluated as `g(out(l), inp(l))`.
    /// `moving` is the speed of the endpoint that changes with the lag.
    fn row(&self, fixed_is_rx: bool, n: i64) -> SparseRow {
        let s = &self.scenario;
        let (fixed_traj, moving_traj) = if fixed_is_rx {
            (&s.rx_traj, &s.tx_traj)
        } else {
            (&s.tx_traj, &s.rx_traj)
        };
        let mut counts = LocalCounts::default();
        let mut row = SparseRow::default();
        if self.locate(fixed_traj, n, &mut counts).is_none() {
            self.flush(counts);
            return row;
        }
        let fixed_x = fixed_traj.x_at(n);
        let ts = moving_traj.sample_period_ts;
        // type I: transmitter at n - lag; type II: receiver at n + lag
        let dir = if fixed_is_rx { -1.0 } else { 1.0 };
        let geometric = |lag: f64| {
            let x = moving_traj.start.x + moving_traj.velocity_x * ((n as f64 + dir * lag) * ts);
            (x - fixed_x).abs()
        };
        let beta = moving_traj.velocity_x.abs() / s.wg.sound_speed_c;
        let half = self.channel.kernel().half_width() as f64 / (1.0 - beta) + 2.0;
        for p in 0..self.channel.families().len() {
            let center = self.arrival_fixed_point(p, geometric);
            let lo = (center - half).ceil().max(0.0) as i64;
            let hi = (center + half).floor() as i64;
            if hi < lo {
                continue;
            }
            let mut memo = None;
            let values = (lo..=hi)
                .map(|lag| {
                    let (out_n, in_m) = if fixed_is_rx { (n, n - lag) } else { (n + lag, n) };
                    match self.separation(out_n, in_m, &mut counts) {
                        Some(d) => self.channel.contribution_memo(p, d, lag as f64, &mut memo),
                        None => 0.0,
                    }
                })
                .collect();
            row.push(lo as usize, values);
        }
        self.flush(counts);
        row
    }
}

impl GreensFunction for ScenarioGreen {
    fn eval(&self, n: i64, m: i64) -> f64 {
        if n < m {
            return 0.0;
        }
        let mut counts = LocalCounts::default();
        let value = match self.separation(n, m, &mut counts) {
            Some(d) => {
                let lag = (n - m) as f64;
                (0..self.channel.families().len())
                    .map(|p| self.channel.contribution(p, d, lag))
                    .sum()
            }
            None => 0.0,
        };
        self.flush(counts);
        value
    }

    fn type1_row(&self, n: i64) -> SparseRow {
        self.row(true, n)
    }

    fn type2_row(&self, n: i64) -> SparseRow {
        self.row(false, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Position;

    fn scenario(v_tx: f64, v_rx: f64, d0: f64) -> DynamicScenario {
        let fs = 256e3;
        let ts = 1.0 / fs;
        DynamicScenario {
            wg: Waveguide::default(),
            tx_traj: Trajectory {
                start: Position::new(0.0, 12.0),
                velocity_x: v_tx,
                sample_period_ts: ts,
                duration_samples: 5000,
            },
            rx_traj: Trajectory {
                start: Position::new(d0, 12.0),
                velocity_x: v_rx,
                sample_period_ts: ts,
                duration_samples: 5000,
            },
            fs,
            duration_samples: 5000,
        }
    }

    #[test]
    fn sparse_row_accumulates_overlaps() {
        let mut row = SparseRow::default();
        row.push(2, vec![1.0, 2.0]);
        row.push(3, vec![10.0]);
        row.push(9, vec![]);
        assert_eq!(row.len(), 4);
        assert_eq!(row.to_dense(5), vec![0.0, 0.0, 1.0, 12.0, 0.0]);
    }

    #[test]
    fn causality() {
        let g = ScenarioGreen::new(scenario(0.0, 20.0, 30.0), &SynthesisConfig::default()).unwrap();
        assert_eq!(g.eval(10, 11), 0.0);
        let m = MatrixGreen::from_fn(0, 4, |_, _| 1.0);
        assert_eq!(m.eval(1, 2), 0.0);
        assert_eq!(m.eval(2, 1), 1.0);
    }

    #[test]
    fn static_scenario_is_time_invariant() {
        let g = ScenarioGreen::new(scenario(0.0, 0.0, 100.0), &SynthesisConfig::default()).unwrap();
        for lag in [17060, 17066, 17067, 17190, 17551] {
            let a = g.eval(lag, 0);
            for n0 in [5, 1234, 4999] {
                assert_eq!(g.eval(n0 + lag, n0), a);
            }
        }
    }

    #[test]
    fn los_tap_dominates_static_row() {
        let g = ScenarioGreen::new(scenario(0.0, 0.0, 100.0), &SynthesisConfig::default()).unwrap();
        let row = g.type2_row(0).to_dense(20_000);
        let los = (100.0f64 / 1500.0 * 256e3).round() as usize;
        // LOS lobe: the surface-reflected arrival is 122 samples later
        let lobe = &row[los - 32..los + 32];
        let peak = lobe.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert_eq!(row[los].abs(), peak);
        assert_eq!(g.eval(los as i64, 0), row[los]);
        assert_eq!(g.eval(7 + los as i64, 7), row[los]);
    }

    #[test]
    fn rows_agree_with_pointwise_green() {
        let sc = scenario(-51.2, 30.0, 40.0);
        let g = ScenarioGreen::new(sc, &SynthesisConfig::default()).unwrap();
        for n in [0i64, 777, 5000] {
            let p = g.type1_row(n);
            let dense = p.to_dense(p.len());
            for (lag, _) in p.iter() {
                assert_eq!(dense[lag], g.eval(n, n - lag as i64));
            }
            let r = g.type2_row(n);
            let dense = r.to_dense(r.len());
            for (lag, v) in dense.iter().enumerate().step_by(7) {
                assert_eq!(*v, g.eval(n + lag as i64, n));
            }
        }
    }

    #[test]
    fn rows_capture_all_support() {
        // nonzero g(n, m) off the computed window would break filtering
        let sc = scenario(0.0, 51.2, 100.0);
        let g = ScenarioGreen::new(sc, &SynthesisConfig::default()).unwrap();
        let r = g.type2_row(100).to_dense(20_000);
        let first = r.iter().position(|v| *v != 0.0).unwrap();
        for lag in first.saturating_sub(200)..first {
            assert_eq!(g.eval(100 + lag as i64, 100), 0.0);
        }
    }

    #[test]
    fn truncate_policy_counts_and_zeroes() {
        let cfg = SynthesisConfig {
            history: HistoryPolicy::Truncate,
            ..SynthesisConfig::default()
        };
        let g = ScenarioGreen::new(scenario(-10.0, 0.0, 100.0), &cfg).unwrap();
        // lags beyond n reach before the transmitter's start
        let row = g.type1_row(10);
        assert!(row.iter().all(|(_, v)| v == 0.0));
        assert!(g.history_counters().truncated > 0);
        assert_eq!(g.history_counters().extrapolated, 0);

        let g = ScenarioGreen::new(scenario(-10.0, 0.0, 100.0), &SynthesisConfig::default()).unwrap();
        let row = g.type1_row(10);
        assert!(row.iter().any(|(_, v)| v != 0.0));
        assert!(g.history_counters().extrapolated > 0);
    }

    #[test]
    fn rejects_supersonic_and_mismatched_rate() {
        let sc = scenario(0.0, 1500.0, 100.0);
        assert!(matches!(
            ScenarioGreen::new(sc, &SynthesisConfig::default()),
            Err(Error::UnsupportedRegime { .. })
        ));
        let mut sc = scenario(0.0, 1.0, 100.0);
        sc.fs = 48e3;
        assert!(matches!(sc.validate(), Err(Error::Config(_))));
    }
}
