//! Static channel as a continuous function of horizontal separation.
//!
//! With both transceivers at fixed heights the static response depends on the
//! endpoints only through their horizontal distance `d`. Path delays are
//! evaluated exactly at `d`; path gains are read from a cache of nodes spaced
//! `cache_quantum_dd` apart and linearly interpolated between them.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::geometry::{RayFamily, Waveguide};
use crate::static_channel::{SincKernel, SparseTap, SparseTapList};

use super::SynthesisConfig;

type Gains = Arc<[f64]>;

/// Per-path gains keyed by quantized distance.
///
/// Readers share the map; a miss computes the node outside the lock and
/// inserts it with `entry().or_insert`, so a racing duplicate computation
/// never replaces an existing entry.
#[derive(Debug, Default)]
struct GainCache {
    nodes: RwLock<HashMap<i64, Gains>>,
}

impl GainCache {
    fn get_or_insert_with(&self, key: i64, compute: impl FnOnce() -> Gains) -> Gains {
        if let Some(g) = self.nodes.read().expect("gain cache poisoned").get(&key) {
            return Arc::clone(g);
        }
        let fresh = compute();
        let mut nodes = self.nodes.write().expect("gain cache poisoned");
        Arc::clone(nodes.entry(key).or_insert(fresh))
    }

    fn len(&self) -> usize {
        self.nodes.read().expect("gain cache poisoned").len()
    }
}

/// Pair of cache nodes bracketing a distance, reused while consecutive
/// lookups stay inside the same cell.
pub(crate) struct NodeMemo {
    key: i64,
    lo: Gains,
    hi: Gains,
}

#[derive(Debug)]
pub struct SpatialChannel {
    wg: Waveguide,
    families: Vec<RayFamily>,
    fs: f64,
    kernel: SincKernel,
    reference_frequency: f64,
    ln_a_ref: f64,
    quantum: f64,
    cache: GainCache,
}

impl SpatialChannel {
    pub fn new(wg: &Waveguide, h_tx: f64, h_rx: f64, fs: f64, cfg: &SynthesisConfig) -> Result<Self> {
        wg.validate()?;
        wg.check_height(h_tx)?;
        wg.check_height(h_rx)?;
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(Error::domain("sample rate", fs, "> 0 Hz"));
        }
        if !(cfg.cache_quantum_dd >= 0.0) {
            return Err(Error::domain("cache_quantum_dd", cfg.cache_quantum_dd, ">= 0 m"));
        }
        Ok(Self {
            wg: *wg,
            families: crate::geometry::ray_families(wg, h_tx, h_rx),
            fs,
            kernel: SincKernel::new(cfg.kernel_halfwidth)?,
            reference_frequency: cfg.reference_frequency,
            ln_a_ref: wg.absorption.ln_factor_per_m(cfg.reference_frequency)?,
            quantum: cfg.cache_quantum_dd,
            cache: GainCache::default(),
        })
    }

    pub fn waveguide(&self) -> &Waveguide {
        &self.wg
    }

    pub fn families(&self) -> &[RayFamily] {
        &self.families
    }

    pub fn sample_rate(&self) -> f64 {
        self.fs
    }

    pub fn kernel(&self) -> &SincKernel {
        &self.kernel
    }

    pub fn cached_nodes(&self) -> usize {
        self.cache.len()
    }

    fn exact_gain(&self, family: &RayFamily, d: f64) -> f64 {
        let length = family.length(d);
        if !(length > 0.0) {
            return 0.0;
        }
        let ln_loss = self.wg.spreading_exponent_k * length.ln() + length * self.ln_a_ref;
        family.cum_reflection(&self.wg, d) * (-0.5 * ln_loss).exp()
    }

    fn node(&self, key: i64) -> Gains {
        self.cache.get_or_insert_with(key, || {
            let d = key as f64 * self.quantum;
            self.families.iter().map(|f| self.exact_gain(f, d)).collect()
        })
    }

    pub(crate) fn memo(&self, d: f64) -> Option<NodeMemo> {
        if self.quantum == 0.0 || d < self.quantum {
            return None;
        }
        let key = (d / self.quantum).floor() as i64;
        Some(NodeMemo {
            key,
            lo: self.node(key),
            hi: self.node(key + 1),
        })
    }

    /// Gain of path `p` at the reference frequency and distance `d`.
    pub fn path_gain(&self, p: usize, d: f64) -> f64 {
        let mut memo = None;
        self.path_gain_memo(p, d, &mut memo)
    }

    pub(crate) fn path_gain_memo(&self, p: usize, d: f64, memo: &mut Option<NodeMemo>) -> f64 {
        // below one quantum the interpolation would straddle d = 0
        if self.quantum == 0.0 || d < self.quantum {
            return self.exact_gain(&self.families[p], d);
        }
        let u = d / self.quantum;
        let key = u.floor() as i64;
        if memo.as_ref().is_none_or(|m| m.key != key) {
            *memo = self.memo(d);
        }
        let m = memo.as_ref().expect("memo populated above");
        let t = u - key as f64;
        let (lo, hi) = (m.lo[p], m.hi[p]);
        lo + t * (hi - lo)
    }

    /// Arrival of path `p` at distance `d`, in (fractional) samples.
    #[inline]
    pub fn arrival_samples(&self, p: usize, d: f64) -> f64 {
        self.fs * self.families[p].length(d) / self.wg.sound_speed_c
    }

    #[inline]
    pub(crate) fn contribution_memo(&self, p: usize, d: f64, lag: f64, memo: &mut Option<NodeMemo>) -> f64 {
        let x = lag - self.arrival_samples(p, d);
        if !(x.abs() < self.kernel.half_width() as f64) {
            return 0.0;
        }
        self.path_gain_memo(p, d, memo) * self.kernel.eval(x)
    }

    /// Contribution of path `p` at `lag` samples for separation `d`.
    pub fn contribution(&self, p: usize, d: f64, lag: f64) -> f64 {
        self.contribution_memo(p, d, lag, &mut None)
    }

    /// Static impulse response `h^S_d` at one lag.
    pub fn static_tap(&self, d: f64, lag: f64) -> f64 {
        (0..self.families.len()).map(|p| self.contribution(p, d, lag)).sum()
    }

    /// `h^S_d(m)` for `m` in `0..len`.
    pub fn static_taps(&self, d: f64, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        let k = self.kernel.half_width() as f64;
        let mut memo = None;
        for p in 0..self.families.len() {
            let center = self.arrival_samples(p, d);
            let lo = (center - k).floor().max(0.0) as usize;
            let hi = ((center + k).ceil() as usize + 1).min(len);
            for (m, v) in out.iter_mut().enumerate().take(hi).skip(lo) {
                *v += self.contribution_memo(p, d, m as f64, &mut memo);
            }
        }
        out
    }

    /// Number of lags needed to hold every arrival at distance `d`.
    pub fn support_len(&self, d: f64) -> usize {
        let last = (0..self.families.len())
            .map(|p| self.arrival_samples(p, d))
            .fold(0.0, f64::max);
        (last + self.kernel.half_width() as f64).ceil() as usize + 1
    }

    /// Sparse tap list at distance `d` (gains from the same cache).
    pub fn sparse_taps(&self, d: f64) -> SparseTapList {
        let mut taps: Vec<SparseTap> = self
            .families
            .iter()
            .enumerate()
            .map(|(p, f)| SparseTap {
                n_surface: f.n_surface,
                n_bottom: f.n_bottom,
                delay_tau_p: f.length(d) / self.wg.sound_speed_c,
                gain: self.path_gain(p, d),
                cum_reflection: f.cum_reflection(&self.wg, d),
            })
            .collect();
        taps.sort_by(|a, b| a.delay_tau_p.total_cmp(&b.delay_tau_p));
        SparseTapList {
            taps,
            sample_rate_fs: self.fs,
            reference_frequency: self.reference_frequency,
            kernel: self.kernel,
        }
    }
}
