use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;

use swa_core::analysis::{
    delay_report, measure_doppler, time_shift, ArrivalDetector, DelayReport, DopplerMeasurement, GridCheck,
};
use swa_core::geometry::{enumerate_eigenpaths, FirstBounce, Position};
use swa_core::ltv::{
    compute_grid, filter_type1, filter_type2, truncation_len, CirKind, GreensFunction, HistoryCounters, LtvCirGrid,
    ScenarioGreen, SignalBuffer,
};
use swa_core::scenarios::{build, dynamic_lti_response, static_response, CaseKind};
use swa_core::static_channel::{static_cfr, static_cir};

use crate::config::RunConfig;
use crate::output::{read_table, Table};

/// Largest allowed deviation, relative to the row peak, between responses
/// that must agree up to the distance-cache interpolation.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Structure {
    Type1,
    Type2,
}

fn kind_code(kind: CaseKind) -> f64 {
    CaseKind::ALL.iter().position(|&k| k == kind).expect("kind is listed") as f64
}

fn kind_legend() -> String {
    CaseKind::ALL
        .iter()
        .enumerate()
        .map(|(i, k)| format!("{i}={}", k.name()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn first_bounce_code(f: FirstBounce) -> f64 {
    match f {
        FirstBounce::None => 0.0,
        FirstBounce::Surface => 1.0,
        FirstBounce::Bottom => 2.0,
    }
}

fn peak(row: &[f64]) -> f64 {
    row.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// `max |a - b| / max |b|`, zero-padding the shorter row.
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |r: &[f64], i: usize| r.get(i).copied().unwrap_or(0.0);
    let diff = (0..len).map(|i| (at(a, i) - at(b, i)).abs()).fold(0.0, f64::max);
    let scale = peak(b).max(peak(a));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Type-II (or type-I) grid of one case over its configured `n` rows,
/// with the separation of each row recorded. Rows are cut at the configured
/// truncation floor when `truncate` is set.
pub fn case_grid(
    cfg: &RunConfig,
    kind: CaseKind,
    cir: CirKind,
    truncate: bool,
) -> Result<(LtvCirGrid, HistoryCounters)> {
    let spec = cfg.case_spec(kind);
    let green = ScenarioGreen::new(build(&spec)?, &cfg.synthesis())?;
    let ns = spec.n_grid(cfg.stride(&spec));
    let floor = truncate.then_some(cfg.truncation_floor_db);
    let mut grid = compute_grid(&green, cir, &ns, cfg.fs, floor);
    grid.distances = Some(ns.iter().map(|&n| spec.distance_law(n)).collect());
    Ok((grid, green.history_counters()))
}

fn truncate_rows(grid: &mut LtvCirGrid, floor_db: f64) {
    let keep = grid.rows.iter().map(|r| truncation_len(r, floor_db)).max().unwrap_or(0);
    for r in &mut grid.rows {
        r.truncate(keep);
    }
}

fn matrix_table(name: &str, cfg: &RunConfig, description: &str, grid: &LtvCirGrid, magnitude: bool) -> Table {
    let mut t = Table::new(name, cfg, description);
    t.meta("cir_kind", grid.kind.label())
        .meta("rows", grid.rows.len())
        .meta("lags", grid.n_lags())
        .meta("truncation_floor_db", cfg.truncation_floor_db)
        .meta(
            "values",
            if magnitude {
                "magnitude |CIR| (unnormalized, dimensionless)"
            } else {
                "CIR amplitude (unnormalized, dimensionless)"
            },
        );
    t.columns = "n (samples), d_m (separation at n, m), then value at lag_s = k / fs_hz for k = 0..lags-1".into();
    let distances = grid.distances.clone().unwrap_or_default();
    t.rows = grid
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out = Vec::with_capacity(row.len() + 2);
            out.push(grid.n_values[i] as f64);
            out.push(distances.get(i).copied().unwrap_or(f64::NAN));
            out.extend(row.iter().map(|v| if magnitude { v.abs() } else { *v }));
            out
        })
        .collect();
    t
}

fn trace_table(name: &str, cfg: &RunConfig, description: &str, taps: &[f64]) -> Table {
    let mut t = Table::new(name, cfg, description);
    t.columns = "lag_s, amplitude (dimensionless)".into();
    t.rows = taps
        .iter()
        .enumerate()
        .map(|(m, &h)| vec![m as f64 / cfg.fs, h])
        .collect();
    t
}

fn write_all(tables: &[Table], cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    tables
        .iter()
        .map(|t| {
            let path = t.write(&cfg.out_dir, cfg.format)?;
            info!("wrote {}", path.display());
            Ok(path)
        })
        .collect()
}

/// Eigenpaths, dense CFR/CIR and the synthesized static response at `d0`.
pub fn run_static(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let wg = cfg.waveguide();
    let h = cfg.height_above_bottom;
    let (tx, rx) = (Position::new(0.0, h), Position::new(cfg.d0, h));
    let grid = cfg.frequency_grid()?;
    let paths = enumerate_eigenpaths(&wg, tx, rx)?;
    let cfr = static_cfr(&wg, tx, rx, grid)?;
    let cir = static_cir(&cfr);
    let window = cir.n_taps() as f64 / cir.sample_rate_fs;
    if let Some(last) = paths.last().filter(|p| p.delay_tau_p >= window) {
        log::warn!(
            "the {:.1} ms impulse-response window is shorter than the {:.1} ms slowest path; raise n_bins to avoid wrap-around",
            window * 1e3,
            last.delay_tau_p * 1e3
        );
    }
    let first = ArrivalDetector {
        threshold_db: cfg.arrival_threshold_db,
    }
    .first_arrival(&cir.taps, cir.sample_rate_fs)?;

    let mut t_paths = Table::new("static_paths", cfg, "eigenpaths between the transceivers at d0");
    t_paths
        .meta("d_m", cfg.d0)
        .meta("first_bounce_code", "0=none 1=surface 2=bottom");
    t_paths.columns = "n_surface, n_bottom, first_bounce_code, length_m, delay_s, grazing_rad, cum_reflection".into();
    t_paths.rows = paths
        .iter()
        .map(|p| {
            vec![
                p.n_surface as f64,
                p.n_bottom as f64,
                first_bounce_code(p.first),
                p.length_lp,
                p.delay_tau_p,
                p.grazing_angle,
                p.cum_reflection,
            ]
        })
        .collect();

    let mut t_cfr = Table::new("static_cfr", cfg, "static channel frequency response at d0");
    t_cfr
        .meta("d_m", cfg.d0)
        .meta("f_max_hz", cfg.f_max)
        .meta("n_bins", cfg.n_bins);
    t_cfr.columns = "f_hz, re, im (dimensionless)".into();
    t_cfr.rows = cfr
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| vec![grid.frequency(k), v.re, v.im])
        .collect();

    let mut t_cir = Table::new(
        "static_cir",
        cfg,
        "static impulse response at d0, inverse DFT of the Hermitian-extended CFR",
    );
    t_cir
        .meta("d_m", cfg.d0)
        .meta("cir_sample_rate_hz", cir.sample_rate_fs)
        .meta("first_arrival_s", first.seconds);
    t_cir.columns = "lag_s, amplitude (dimensionless)".into();
    t_cir.rows = cir
        .taps
        .iter()
        .enumerate()
        .map(|(m, &v)| vec![m as f64 / cir.sample_rate_fs, v])
        .collect();

    let synth = static_response(&cfg.case_spec(CaseKind::Static), &cfg.synthesis())?;
    let mut t_syn = trace_table(
        "static_synth",
        cfg,
        "static impulse response at d0 synthesized at fs_hz (windowed-sinc taps, gains at reference_frequency)",
        &synth,
    );
    t_syn.meta("d_m", cfg.d0);

    info!(
        "{} eigenpaths, first arrival {:.6} ms",
        paths.len(),
        first.seconds * 1e3
    );
    write_all(&[t_paths, t_cfr, t_cir, t_syn], cfg)
}

#[derive(Debug, Clone)]
pub struct Fig3Data {
    pub moving_rx: LtvCirGrid,
    pub moving_tx: LtvCirGrid,
    /// Type-I grid of the moving-receiver case on the same rows.
    pub moving_rx_type1: LtvCirGrid,
    /// Largest row deviation between `moving_tx` and `moving_rx_type1`.
    pub identity_deviation: f64,
    pub counters: [HistoryCounters; 2],
}

pub fn fig3_grids(cfg: &RunConfig) -> Result<Fig3Data> {
    let (moving_rx, c_rx) = case_grid(cfg, CaseKind::MovingRx, CirKind::TypeII, true)?;
    // compared before truncation, so both sides keep their full tails
    let (mut moving_tx, c_tx) = case_grid(cfg, CaseKind::MovingTx, CirKind::TypeII, false)?;
    let (mut moving_rx_type1, _) = case_grid(cfg, CaseKind::MovingRx, CirKind::TypeI, false)?;
    let identity_deviation = moving_tx
        .rows
        .iter()
        .zip(&moving_rx_type1.rows)
        .map(|(a, b)| relative_deviation(a, b))
        .fold(0.0, f64::max);
    truncate_rows(&mut moving_tx, cfg.truncation_floor_db);
    truncate_rows(&mut moving_rx_type1, cfg.truncation_floor_db);
    Ok(Fig3Data {
        moving_rx,
        moving_tx,
        moving_rx_type1,
        identity_deviation,
        counters: [c_rx, c_tx],
    })
}

pub fn run_fig3(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = fig3_grids(cfg)?;
    if data.identity_deviation > IDENTITY_TOLERANCE {
        bail!(
            "moving-tx type-II grid deviates from the moving-rx type-I grid by {:e} (relative)",
            data.identity_deviation
        );
    }
    let spec = cfg.case_spec(CaseKind::MovingRx);
    let mut rx = matrix_table(
        "fig3_moving_rx_r",
        cfg,
        "moving receiver: |r_n(m)| over the distance sweep",
        &data.moving_rx,
        true,
    );
    let mut tx = matrix_table(
        "fig3_moving_tx_r",
        cfg,
        "moving transmitter: |r_n(m)| over the distance sweep; identical to |p_n(m)| of the moving receiver",
        &data.moving_tx,
        true,
    );
    tx.meta("also_equals", "p_n(m) of the moving_rx case")
        .meta("max_relative_deviation_from_moving_rx_p", data.identity_deviation);
    for (t, c) in [(&mut rx, data.counters[0]), (&mut tx, data.counters[1])] {
        t.meta("n_stride", cfg.stride(&spec))
            .meta("speed_v_m_per_s", cfg.v)
            .meta("history_policy", format!("{:?}", cfg.history).to_lowercase())
            .meta("history_extrapolated", c.extrapolated)
            .meta("history_truncated", c.truncated);
    }
    write_all(&[rx, tx], cfg)
}

#[derive(Debug, Clone)]
pub struct Fig4Data {
    pub static_trace: Vec<f64>,
    pub co_moving_trace: Vec<f64>,
    /// Deviation of the static trace from row n=0 of the moving-tx type-II grid.
    pub static_vs_row0: f64,
    /// Deviation of the co-moving trace from row n=0 of the moving-rx type-II grid.
    pub co_moving_vs_row0: f64,
    /// Largest deviation among the co-moving type-I rows and the trace.
    pub co_moving_n_invariance: f64,
}

pub fn fig4_traces(cfg: &RunConfig) -> Result<Fig4Data> {
    let synth = cfg.synthesis();
    let static_trace = static_response(&cfg.case_spec(CaseKind::Static), &synth)?;
    let co_moving_trace = dynamic_lti_response(&cfg.case_spec(CaseKind::CoMoving), &synth)?;
    let row0 = |kind: CaseKind| -> Result<Vec<f64>> {
        let spec = cfg.case_spec(kind);
        let green = ScenarioGreen::new(build(&spec)?, &synth)?;
        Ok(green.type2_row(0).to_dense(green.type2_row(0).len()))
    };
    let (co_grid, _) = case_grid(cfg, CaseKind::CoMoving, CirKind::TypeI, false)?;
    let co_moving_n_invariance = co_grid
        .rows
        .iter()
        .map(|r| relative_deviation(r, &co_moving_trace))
        .fold(0.0, f64::max);
    Ok(Fig4Data {
        static_vs_row0: relative_deviation(&static_trace, &row0(CaseKind::MovingTx)?),
        co_moving_vs_row0: relative_deviation(&co_moving_trace, &row0(CaseKind::MovingRx)?),
        co_moving_n_invariance,
        static_trace,
        co_moving_trace,
    })
}

pub fn run_fig4(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let data = fig4_traces(cfg)?;
    for (what, dev) in [
        ("static trace vs moving-tx row n=0", data.static_vs_row0),
        ("co-moving trace vs moving-rx row n=0", data.co_moving_vs_row0),
        ("co-moving type-I rows vs trace", data.co_moving_n_invariance),
    ] {
        if dev > IDENTITY_TOLERANCE {
            bail!("{what}: relative deviation {dev:e} exceeds {IDENTITY_TOLERANCE:e}");
        }
    }
    let mut s = trace_table(
        "fig4_static",
        cfg,
        "static LTI response h^S at d0 (both transceivers still)",
        &data.static_trace,
    );
    s.meta("d_m", cfg.d0)
        .meta("equals", "row n=0 of fig3_moving_tx_r")
        .meta("max_relative_deviation", data.static_vs_row0);
    let mut c = trace_table(
        "fig4_co_moving",
        cfg,
        "co-moving LTI response h^D(m) = h^S at d0 + v m / fs_hz (both transceivers at +v)",
        &data.co_moving_trace,
    );
    c.meta("d_m", cfg.d0)
        .meta("speed_v_m_per_s", cfg.v)
        .meta(
            "equals",
            "row n=0 of fig3_moving_rx_r; every type-I row of the co_moving case",
        )
        .meta("max_relative_deviation", data.co_moving_vs_row0)
        .meta("max_relative_row_deviation", data.co_moving_n_invariance);
    write_all(&[s, c], cfg)
}

/// Reads an amplitude stream and its declared sample rate.
///
/// Text files hold one sample per line (or `time, amplitude` pairs; the
/// last column is used) and declare the rate in a `# fs_hz = ...` header;
/// `.bin` files carry it in their `.hdr` sidecar. `declared_fs` overrides
/// a missing declaration.
pub fn read_waveform(path: &Path, declared_fs: Option<f64>) -> Result<SignalBuffer> {
    let table = read_table(path)?;
    let file_fs = table
        .get("fs_hz")
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("{}: bad fs_hz '{s}'", path.display()))
        })
        .transpose()?;
    let fs = match (file_fs, declared_fs) {
        (Some(a), Some(b)) if a != b => bail!("{} declares fs_hz = {a}, but {b} was given", path.display()),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => bail!(
            "{} does not declare its sample rate (add '# fs_hz = ...' or pass --input-fs)",
            path.display()
        ),
    };
    let samples = table
        .rows
        .iter()
        .map(|r| r.last().copied().context("empty row in waveform"))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignalBuffer::new(samples, fs))
}

pub struct FilterRun {
    pub output: SignalBuffer,
    pub counters: HistoryCounters,
}

/// Drives the configured case with `x`; the output runs until the slowest
/// path of the last input sample has arrived unless `out_len` is given.
pub fn filter_signal(
    cfg: &RunConfig,
    x: &SignalBuffer,
    structure: Structure,
    out_len: Option<usize>,
) -> Result<FilterRun> {
    if (x.fs - cfg.fs).abs() > 1e-9 * cfg.fs {
        return Err(swa_core::Error::Config(format!(
            "input sample rate {} Hz does not match fs = {} Hz",
            x.fs, cfg.fs
        ))
        .into());
    }
    let spec = cfg.case_spec(cfg.case);
    let green = ScenarioGreen::new(build(&spec)?, &cfg.synthesis())?;
    let out_len = out_len.unwrap_or_else(|| {
        let n_end = x.len() as i64;
        let d_max = spec.distance_law(n_end).max(spec.d0);
        let c = cfg.sound_speed_c;
        let tail = green.channel().support_len(d_max) as f64 * c / (c - cfg.v);
        x.len() + tail.ceil() as usize
    });
    let output = match structure {
        Structure::Type1 => filter_type1(x, &green, out_len),
        Structure::Type2 => filter_type2(x, &green, out_len),
    };
    Ok(FilterRun {
        output,
        counters: green.history_counters(),
    })
}

pub fn run_filter(
    cfg: &RunConfig,
    input: &Path,
    input_fs: Option<f64>,
    structure: Structure,
    out_len: Option<usize>,
    name: &str,
) -> Result<Vec<PathBuf>> {
    let x = read_waveform(input, input_fs)?;
    let run = filter_signal(cfg, &x, structure, out_len)?;
    let label = match structure {
        Structure::Type1 => "type1: y(n) = sum_m p_n(m) x(n - m)",
        Structure::Type2 => "type2: y(n) = sum_m r_m(n - m) x(m)",
    };
    let mut t = trace_table(name, cfg, "filtered waveform", &run.output.samples);
    t.columns = "t_s, amplitude (input units)".into();
    t.meta("structure", label)
        .meta("case", cfg.case.name())
        .meta("input", input.display())
        .meta("input_samples", x.len())
        .meta("output_samples", run.output.len())
        .meta("history_policy", format!("{:?}", cfg.history).to_lowercase())
        .meta("history_extrapolated", run.counters.extrapolated)
        .meta("history_truncated", run.counters.truncated);
    if run.counters.truncated > 0 {
        log::warn!(
            "{} lags were zeroed for lack of trajectory history",
            run.counters.truncated
        );
    }
    write_all(&[t], cfg)
}

/// Time shift between matched arrivals of a moving-rx and a moving-tx row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalShift {
    pub tx_arrival_s: f64,
    pub shift_s: f64,
}

/// Pairs every resolvable moving-tx arrival with the moving-rx arrival
/// nearest to where the common LOS shift puts it.
pub fn arrival_shifts(
    rx_row: &[f64],
    tx_row: &[f64],
    fs: f64,
    expected_shift: f64,
    det: &ArrivalDetector,
    min_separation: usize,
) -> Result<Vec<ArrivalShift>> {
    let rx = det.arrivals(rx_row, fs, min_separation)?;
    let tx = det.arrivals(tx_row, fs, min_separation)?;
    Ok(tx
        .iter()
        .filter_map(|a| {
            let target = a.seconds + expected_shift;
            rx.iter()
                .min_by(|p, q| (p.seconds - target).abs().total_cmp(&(q.seconds - target).abs()))
                .map(|b| ArrivalShift {
                    tx_arrival_s: a.seconds,
                    shift_s: b.seconds - a.seconds,
                })
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ShiftCheck {
    pub d: f64,
    pub predicted_s: f64,
    pub measured_los_s: f64,
    pub arrivals: Vec<ArrivalShift>,
    /// Largest deviation of any arrival's shift from the LOS shift.
    pub spread_s: f64,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub reports: Vec<DelayReport>,
    pub checks: Vec<(CaseKind, GridCheck)>,
    pub shifts: Vec<ShiftCheck>,
    pub doppler: Vec<(CaseKind, DopplerMeasurement)>,
    pub shift_tolerance_s: f64,
    pub doppler_tolerance: f64,
}

impl Analysis {
    pub fn grids_pass(&self) -> bool {
        self.checks.iter().all(|(_, c)| c.passed())
    }

    pub fn shifts_pass(&self, sample_period: f64) -> bool {
        self.shifts
            .iter()
            .all(|s| (s.measured_los_s - s.predicted_s).abs() <= self.shift_tolerance_s && s.spread_s <= sample_period)
    }

    pub fn doppler_pass(&self) -> bool {
        self.doppler
            .iter()
            .all(|(_, m)| (m.factor / m.predicted_factor - 1.0).abs() <= self.doppler_tolerance)
    }

    pub fn passed(&self, sample_period: f64) -> bool {
        self.grids_pass() && self.shifts_pass(sample_period) && self.doppler_pass()
    }
}

pub fn analyze(cfg: &RunConfig) -> Result<Analysis> {
    let (c, v, fs) = (cfg.sound_speed_c, cfg.v, cfg.fs);
    let ts = 1.0 / fs;
    let det = ArrivalDetector {
        threshold_db: cfg.arrival_threshold_db,
    };
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    let mut grids = Vec::new();
    for kind in CaseKind::ALL {
        let spec = cfg.case_spec(kind);
        for d in [spec.distance_law(0), spec.distance_law(spec.duration_samples as i64)] {
            reports.push(delay_report(kind, d, c, v)?);
        }
        let (grid, _) = case_grid(cfg, kind, CirKind::TypeII, true)?;
        checks.push((kind, swa_core::analysis::verify_rows(&grid, kind, c, v, ts, &det)?));
        grids.push((kind, grid));
    }
    let grid_of = |kind: CaseKind| &grids.iter().find(|(k, _)| *k == kind).expect("grid computed").1;
    let (rx, tx) = (grid_of(CaseKind::MovingRx), grid_of(CaseKind::MovingTx));
    let distances = rx.distances.as_ref().expect("case grids carry distances");
    let min_sep = (cfg.kernel_halfwidth / 2).max(1);
    let mut shifts = Vec::new();
    for i in [0, rx.rows.len() - 1] {
        let d = distances[i];
        let predicted = time_shift(d, v, c)?;
        let arrivals = arrival_shifts(&rx.rows[i], &tx.rows[i], fs, predicted, &det, min_sep)?;
        let measured_los = det.first_arrival(&rx.rows[i], fs)?.seconds - det.first_arrival(&tx.rows[i], fs)?.seconds;
        let spread = arrivals
            .iter()
            .map(|a| (a.shift_s - measured_los).abs())
            .fold(0.0, f64::max);
        shifts.push(ShiftCheck {
            d,
            predicted_s: predicted,
            measured_los_s: measured_los,
            arrivals,
            spread_s: spread,
        });
    }
    // a single path keeps the received tone free of multipath beating
    let mut los_cfg = cfg.clone();
    los_cfg.pmax = 0;
    let mut doppler = Vec::new();
    for kind in [CaseKind::MovingRx, CaseKind::MovingTx] {
        doppler.push((
            kind,
            measure_doppler(&los_cfg.case_spec(kind), &cfg.synthesis(), cfg.doppler_tone_hz)?,
        ));
    }
    Ok(Analysis {
        reports,
        checks,
        shifts,
        doppler,
        shift_tolerance_s: 0.02e-3,
        doppler_tolerance: 1e-3,
    })
}

/// Writes the analysis tables; the boolean is false when any check failed.
pub fn run_analyze(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool)> {
    let a = analyze(cfg)?;
    let ts = 1.0 / cfg.fs;
    let legend = kind_legend();

    let mut t_rep = Table::new("analyze_delays", cfg, "closed-form delay and Doppler predictions");
    t_rep.meta("kind_code", &legend).meta(
        "doppler_note",
        "doppler_ratio = (c - v)(c + v) / c^2 from the general equation; stated_factor = (c + v) / (c - v)",
    );
    t_rep.columns =
        "kind_code, d_m, los_delay_s, time_shift_vs_moving_tx_s, doppler_factor, doppler_ratio_rx_over_tx, stated_factor"
            .into();
    t_rep.rows = a
        .reports
        .iter()
        .map(|r| {
            vec![
                kind_code(r.kind),
                r.d,
                r.los_delay,
                r.time_shift_vs_moving_tx,
                r.doppler_factor,
                r.doppler_ratio_rx_over_tx,
                r.stated_factor,
            ]
        })
        .collect();

    let mut t_res = Table::new(
        "analyze_residuals",
        cfg,
        "measured vs predicted first arrival of every type-II row",
    );
    t_res
        .meta("kind_code", &legend)
        .meta("tolerance_s", ts)
        .meta("arrival_threshold_db", cfg.arrival_threshold_db);
    for (kind, check) in &a.checks {
        t_res.meta(&format!("{}_max_abs_residual_s", kind.name()), check.max_abs_residual());
        t_res.meta(&format!("{}_passed", kind.name()), check.passed());
    }
    t_res.columns = "kind_code, n, d_m, measured_s, predicted_s, residual_s".into();
    t_res.rows = a
        .checks
        .iter()
        .flat_map(|(kind, check)| {
            check
                .rows
                .iter()
                .map(move |r| vec![kind_code(*kind), r.n as f64, r.d, r.measured, r.predicted, r.residual])
        })
        .collect();

    let mut t_shift = Table::new("analyze_shifts", cfg, "moving-rx minus moving-tx arrival times");
    t_shift
        .meta("shift_tolerance_s", a.shift_tolerance_s)
        .meta("spread_tolerance_s", ts)
        .meta("passed", a.shifts_pass(ts));
    for s in &a.shifts {
        t_shift.meta(
            &format!("d_{}_m", s.d),
            format!(
                "predicted {} s, measured los {} s, max spread {} s over {} arrivals",
                s.predicted_s,
                s.measured_los_s,
                s.spread_s,
                s.arrivals.len()
            ),
        );
    }
    t_shift.columns = "d_m, predicted_shift_s, tx_arrival_s, shift_s".into();
    t_shift.rows = a
        .shifts
        .iter()
        .flat_map(|s| {
            s.arrivals
                .iter()
                .map(move |x| vec![s.d, s.predicted_s, x.tx_arrival_s, x.shift_s])
        })
        .collect();

    let mut t_dop = Table::new(
        "analyze_doppler",
        cfg,
        "tone through line-of-sight-only moving scenarios",
    );
    t_dop
        .meta("kind_code", &legend)
        .meta("relative_tolerance", a.doppler_tolerance)
        .meta("passed", a.doppler_pass());
    if let [(_, rx), (_, tx)] = a.doppler.as_slice() {
        t_dop.meta("measured_ratio_rx_over_tx", rx.factor / tx.factor);
    }
    t_dop.columns = "kind_code, f0_hz, measured_hz, factor, predicted_factor".into();
    t_dop.rows = a
        .doppler
        .iter()
        .map(|(k, m)| vec![kind_code(*k), m.f0, m.measured, m.factor, m.predicted_factor])
        .collect();

    let passed = a.passed(ts);
    for (kind, check) in &a.checks {
        info!(
            "{}: max first-arrival residual {:.3e} s ({})",
            kind.name(),
            check.max_abs_residual(),
            if check.passed() { "ok" } else { "FAILED" }
        );
    }
    let files = write_all(&[t_rep, t_res, t_shift, t_dop], cfg)?;
    Ok((files, passed))
}
