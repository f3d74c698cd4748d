use rayon::prelude::*;

use super::{GreensFunction, SparseRow};

/// Real samples `x(start), x(start + 1), ...` at rate `fs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    pub samples: Vec<f64>,
    pub fs: f64,
    pub start: i64,
}

impl SignalBuffer {
    pub fn new(samples: Vec<f64>, fs: f64) -> Self {
        Self { samples, fs, start: 0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    #[inline]
    fn at(&self, n: i64) -> f64 {
        let i = n - self.start;
        if i >= 0 && (i as usize) < self.samples.len() {
            self.samples[i as usize]
        } else {
            0.0
        }
    }
}

/// First structure: `y(n) = sum_m p_n(m) x(n - m)`. Every output sample uses
/// its own LTI response `p_n`. Output covers `x.start .. x.start + out_len`.
pub fn filter_type1<G: GreensFunction + ?Sized>(x: &SignalBuffer, green: &G, out_len: usize) -> SignalBuffer {
    let samples = (0..out_len)
        .into_par_iter()
        .map(|i| {
            let n = x.start + i as i64;
            green.type1_row(n).iter().map(|(lag, p)| p * x.at(n - lag as i64)).sum()
        })
        .collect();
    SignalBuffer {
        samples,
        fs: x.fs,
        start: x.start,
    }
}

const TYPE2_BLOCK: usize = 2048;

/// Second structure: `y(n) = sum_m r_m(n - m) x(m)`. Each input sample
/// drives its own LTI response `r_m` and the responses are superposed.
/// Output covers `x.start .. x.start + out_len`.
pub fn filter_type2<G: GreensFunction + ?Sized>(x: &SignalBuffer, green: &G, out_len: usize) -> SignalBuffer {
    let mut y = vec![0.0; out_len];
    let inputs = x.len().min(out_len);
    for block in (0..inputs).step_by(TYPE2_BLOCK) {
        let end = (block + TYPE2_BLOCK).min(inputs);
        let rows: Vec<Option<SparseRow>> = (block..end)
            .into_par_iter()
            .map(|i| (x.samples[i] != 0.0).then(|| green.type2_row(x.start + i as i64)))
            .collect();
        // sequential accumulation keeps the summation order fixed
        for (i, row) in (block..end).zip(rows) {
            let Some(row) = row else { continue };
            let xm = x.samples[i];
            for (lag, r) in row.iter() {
                if let Some(out) = y.get_mut(i + lag) {
                    *out += r * xm;
                }
            }
        }
    }
    SignalBuffer {
        samples: y,
        fs: x.fs,
        start: x.start,
    }
}
