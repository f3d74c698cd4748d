use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{enumerate_eigenpaths, Eigenpath, Position, Waveguide};

/// Equispaced one-sided frequency grid `0, df, ..., f_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub f_max: f64,
    pub n_bins: usize,
}

impl FrequencyGrid {
    pub fn new(f_max: f64, n_bins: usize) -> Result<Self> {
        if !(f_max > 0.0 && f_max.is_finite()) {
            return Err(Error::domain("f_max", f_max, "> 0 Hz"));
        }
        if n_bins < 2 {
            return Err(Error::Config(format!("n_bins = {n_bins}, need at least 2")));
        }
        Ok(Self { f_max, n_bins })
    }

    pub fn spacing(&self) -> f64 {
        self.f_max / (self.n_bins - 1) as f64
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.spacing()
    }

    /// Sample rate of the impulse response obtained from this grid.
    pub fn sample_rate(&self) -> f64 {
        2.0 * self.f_max
    }

    /// Length of the real impulse response (full DFT size).
    pub fn dft_len(&self) -> usize {
        2 * (self.n_bins - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticCfr {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub endpoints: (Position, Position),
}

/// Real impulse response; `taps[m]` is lag `m / sample_rate_fs` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticCir {
    pub sample_rate_fs: f64,
    pub taps: Vec<f64>,
}

impl StaticCir {
    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }
}

/// Real gain of one path at frequency `f`:
/// `cum_reflection / sqrt(l^k * a(f)^l)`.
pub fn path_gain(wg: &Waveguide, path: &Eigenpath, f: f64) -> Result<f64> {
    let ln_a = wg.absorption.ln_factor_per_m(f)?;
    gain_from_parts(wg, path.length_lp, path.cum_reflection, ln_a)
}

pub(crate) fn gain_from_parts(wg: &Waveguide, length: f64, cum_reflection: f64, ln_a: f64) -> Result<f64> {
    if !(length > 0.0) {
        return Err(Error::domain("path length", length, "> 0 m"));
    }
    let ln_loss = wg.spreading_exponent_k * length.ln() + length * ln_a;
    Ok(cum_reflection * (-0.5 * ln_loss).exp())
}

/// `H(f) = sum_p gain_p(f) * exp(-j 2 pi f tau_p)` on every grid bin.
pub fn static_cfr(wg: &Waveguide, tx: Position, rx: Position, grid: FrequencyGrid) -> Result<StaticCfr> {
    let paths = enumerate_eigenpaths(wg, tx, rx)?;
    let mut values = Vec::with_capacity(grid.n_bins);
    for bin in 0..grid.n_bins {
        let f = grid.frequency(bin);
        let ln_a = wg.absorption.ln_factor_per_m(f)?;
        let mut h = Complex64::new(0.0, 0.0);
        for p in &paths {
            let g = gain_from_parts(wg, p.length_lp, p.cum_reflection, ln_a)?;
            // reduce the phase argument before the trig call
            let cycles = (f * p.delay_tau_p).fract();
            let (s, c) = (-2.0 * PI * cycles).sin_cos();
            h += Complex64::new(g * c, g * s);
        }
        values.push(h);
    }
    Ok(StaticCfr {
        grid,
        values,
        endpoints: (tx, rx),
    })
}

/// Full `2 (n_bins - 1)`-point spectrum of a real signal whose positive half
/// is the given CFR. DC and Nyquist bins keep only their real parts.
pub fn hermitian_spectrum(cfr: &StaticCfr) -> Vec<Complex64> {
    let n = cfr.grid.dft_len();
    let half = n / 2;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    spec[0] = Complex64::new(cfr.values[0].re, 0.0);
    spec[half] = Complex64::new(cfr.values[half].re, 0.0);
    for k in 1..half {
        spec[k] = cfr.values[k];
        spec[n - k] = cfr.values[k].conj();
    }
    spec
}

/// Impulse response by inverse DFT of the Hermitian-extended CFR.
pub fn static_cir(cfr: &StaticCfr) -> StaticCir {
    let mut spec = hermitian_spectrum(cfr);
    let n = spec.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let scale = 1.0 / n as f64;
    StaticCir {
        sample_rate_fs: cfr.grid.sample_rate(),
        taps: spec.iter().map(|v| v.re * scale).collect(),
    }
}

/// Forward DFT of an impulse response.
pub fn forward_spectrum(cir: &StaticCir) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = cir.taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}
