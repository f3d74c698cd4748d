use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{enumerate_eigenpaths, Position, Waveguide};

use super::path_gain;

/// Blackman-windowed sinc of half-width `half_width` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincKernel {
    half_width: usize,
}

impl SincKernel {
    pub fn new(half_width: usize) -> Result<Self> {
        if half_width < 1 {
            return Err(Error::Config("kernel_halfwidth must be at least 1".into()));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Kernel value at an offset of `x` samples; zero for `|x| >= half_width`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.half_width as f64;
        if !(x.abs() < k) {
            return 0.0;
        }
        if x == 0.0 {
            return 1.0;
        }
        let px = PI * x;
        let window = 0.42 + 0.5 * (px / k).cos() + 0.08 * (2.0 * px / k).cos();
        window * px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseTap {
    pub n_surface: u32,
    pub n_bottom: u32,
    pub delay_tau_p: f64,
    /// Path gain at the list's reference frequency.
    pub gain: f64,
    pub cum_reflection: f64,
}

/// One band-limited fractional-delay kernel per eigenpath.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTapList {
    pub taps: Vec<SparseTap>,
    pub sample_rate_fs: f64,
    pub reference_frequency: f64,
    pub kernel: SincKernel,
}

impl SparseTapList {
    /// Summed amplitude at an arbitrary (possibly fractional) lag in samples.
    pub fn synthesize(&self, lag: f64) -> f64 {
        self.taps
            .iter()
            .map(|t| t.gain * self.kernel.eval(lag - t.delay_tau_p * self.sample_rate_fs))
            .sum()
    }

    /// Dense taps for lags `0..len`.
    pub fn to_taps(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        let k = self.kernel.half_width() as f64;
        for t in &self.taps {
            let center = t.delay_tau_p * self.sample_rate_fs;
            let lo = (center - k).floor().max(0.0) as usize;
            let hi = ((center + k).ceil() as usize + 1).min(len);
            for (m, v) in out.iter_mut().enumerate().take(hi).skip(lo) {
                *v += t.gain * self.kernel.eval(m as f64 - center);
            }
        }
        out
    }
}

/// Sparse representation of the static channel between `tx` and `rx`.
pub fn sparse_cir(
    wg: &Waveguide,
    tx: Position,
    rx: Position,
    fs: f64,
    kernel_halfwidth: usize,
    reference_frequency: f64,
) -> Result<SparseTapList> {
    let kernel = SincKernel::new(kernel_halfwidth)?;
    if !(fs > 0.0) {
        return Err(Error::domain("sample rate", fs, "> 0 Hz"));
    }
    let taps = enumerate_eigenpaths(wg, tx, rx)?
        .iter()
        .map(|p| {
            Ok(SparseTap {
                n_surface: p.n_surface,
                n_bottom: p.n_bottom,
                delay_tau_p: p.delay_tau_p,
                gain: path_gain(wg, p, reference_frequency)?,
                cum_reflection: p.cum_reflection,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseTapList {
        taps,
        sample_rate_fs: fs,
        reference_frequency,
        kernel,
    })
}
