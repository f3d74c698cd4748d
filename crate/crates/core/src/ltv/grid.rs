use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

use super::GreensFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CirKind {
    /// Row `n` holds `p_n(m) = g(n, n - m)`.
    TypeI,
    /// Row `n` holds `r_n(m) = g(n + m, n)`.
    TypeII,
}

impl CirKind {
    pub fn flipped(self) -> Self {
        match self {
            CirKind::TypeI => CirKind::TypeII,
            CirKind::TypeII => CirKind::TypeI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CirKind::TypeI => "type-I p_n(m)",
            CirKind::TypeII => "type-II r_n(m)",
        }
    }
}

/// Family of CIR rows indexed by time `n`. Every row has `n_lags` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LtvCirGrid {
    pub kind: CirKind,
    pub n_values: Vec<i64>,
    pub rows: Vec<Vec<f64>>,
    pub fs: f64,
    /// Transceiver separation at each row's `n` (m), when known.
    pub distances: Option<Vec<f64>>,
}

impl LtvCirGrid {
    pub fn n_lags(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn row_for(&self, n: i64) -> Option<&[f64]> {
        self.n_values
            .iter()
            .position(|&k| k == n)
            .map(|i| self.rows[i].as_slice())
    }

    /// Index of the row whose recorded distance is closest to `d`.
    pub fn row_nearest_distance(&self, d: f64) -> Option<usize> {
        let distances = self.distances.as_ref()?;
        distances
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - d).abs().total_cmp(&(b.1 - d).abs()))
            .map(|(i, _)| i)
    }

    pub fn lag_seconds(&self, lag: usize) -> f64 {
        lag as f64 / self.fs
    }
}

/// Smallest length `L` such that the energy of `row[L..]` is at most
/// `floor_db` below the squared row peak.
pub fn truncation_len(row: &[f64], floor_db: f64) -> usize {
    let peak = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if peak == 0.0 {
        return 0;
    }
    let limit = peak * peak * 10f64.powf(floor_db / 10.0);
    let mut tail = 0.0;
    for (i, v) in row.iter().enumerate().rev() {
        tail += v * v;
        if tail > limit {
            return i + 1;
        }
    }
    0
}

/// Evaluates `kind` rows of `green` at every `n` in `n_values` (rows are
/// computed concurrently). Rows are zero-padded to a common length; with
/// `floor_db` set, the common length is cut where every row's residual
/// energy has dropped below the floor.
pub fn compute_grid<G: GreensFunction + ?Sized>(
    green: &G,
    kind: CirKind,
    n_values: &[i64],
    fs: f64,
    floor_db: Option<f64>,
) -> LtvCirGrid {
    let sparse: Vec<_> = n_values
        .par_iter()
        .map(|&n| match kind {
            CirKind::TypeI => green.type1_row(n),
            CirKind::TypeII => green.type2_row(n),
        })
        .collect();
    let full = sparse.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut rows: Vec<Vec<f64>> = sparse.par_iter().map(|r| r.to_dense(full)).collect();
    if let Some(floor) = floor_db {
        let keep = rows.iter().map(|r| truncation_len(r, floor)).max().unwrap_or(0);
        for r in &mut rows {
            r.truncate(keep);
        }
    }
    LtvCirGrid {
        kind,
        n_values: n_values.to_vec(),
        rows,
        fs,
        distances: None,
    }
}

/// Rows of the opposite kind at `targets`.
///
/// Type I to type II uses `r_n(m) = p_{n+m}(m)`; type II to type I uses
/// `p_n(m) = r_{n-m}(m)`.
fn convert(grid: &LtvCirGrid, targets: &[i64]) -> Result<LtvCirGrid> {
    let index: HashMap<i64, usize> = grid.n_values.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let lags = grid.n_lags();
    let step: i64 = match grid.kind {
        CirKind::TypeI => 1,
        CirKind::TypeII => -1,
    };
    let mut missing = Vec::new();
    for &n in targets {
        for m in 0..lags as i64 {
            let src = n + step * m;
            if !index.contains_key(&src) {
                missing.push(src);
            }
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        missing.dedup();
        return Err(Error::Coverage { missing });
    }
    let rows = targets
        .iter()
        .map(|&n| (0..lags).map(|m| grid.rows[index[&(n + step * m as i64)]][m]).collect())
        .collect();
    Ok(LtvCirGrid {
        kind: grid.kind.flipped(),
        n_values: targets.to_vec(),
        rows,
        fs: grid.fs,
        distances: None,
    })
}

pub fn convert_type1_to_type2(grid: &LtvCirGrid, targets: &[i64]) -> Result<LtvCirGrid> {
    if grid.kind != CirKind::TypeI {
        return Err(Error::Config("expected a type-I grid".into()));
    }
    convert(grid, targets)
}

pub fn convert_type2_to_type1(grid: &LtvCirGrid, targets: &[i64]) -> Result<LtvCirGrid> {
    if grid.kind != CirKind::TypeII {
        return Err(Error::Config("expected a type-II grid".into()));
    }
    convert(grid, targets)
}

/// Converts every row of the grid whose required source rows are all present.
pub fn convert_covered(grid: &LtvCirGrid) -> Result<LtvCirGrid> {
    let present: std::collections::HashSet<i64> = grid.n_values.iter().copied().collect();
    let step: i64 = match grid.kind {
        CirKind::TypeI => 1,
        CirKind::TypeII => -1,
    };
    let lags = grid.n_lags() as i64;
    let targets: Vec<i64> = grid
        .n_values
        .iter()
        .copied()
        .filter(|&n| (0..lags).all(|m| present.contains(&(n + step * m))))
        .collect();
    convert(grid, &targets)
}
