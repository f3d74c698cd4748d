//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swa_cli::commands::{arrival_shifts, fig3_grids, fig4_traces, relative_deviation, run_fig3};
use swa_cli::config::RunConfig;
use swa_cli::output::read_table;
use swa_core::analysis::{doppler_frequency, measure_doppler, time_shift, ArrivalDetector};
use swa_core::geometry::{enumerate_eigenpaths, Position, Trajectory, Waveguide};
use swa_core::ltv::{
    compute_grid, convert_covered, convert_type1_to_type2, convert_type2_to_type1, filter_type1, filter_type2, CirKind,
    DynamicScenario, GreensFunction, MatrixGreen, ScenarioGreen, SignalBuffer, SynthesisConfig,
};
use swa_core::static_channel::{forward_spectrum, hermitian_spectrum, static_cfr, static_cir};

const C: f64 = 1500.0;
const V: f64 = 51.2;
const FS: f64 = 256e3;
const TS: f64 = 1.0 / FS;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// A row of an emitted Fig. 3 matrix: `(d, |r_n(m)| for every lag)`.
struct Fig3Files {
    moving_rx: Vec<(f64, Vec<f64>)>,
    moving_tx: Vec<(f64, Vec<f64>)>,
}

fn emitted_fig3() -> Fig3Files {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = RunConfig {
        out_dir: dir.path().to_path_buf(),
        ..RunConfig::default()
    };
    run_fig3(&cfg).expect("fig3 runs");
    let load = |name: &str| {
        read_table(&dir.path().join(name))
            .expect("fig3 table reads")
            .rows
            .into_iter()
            .map(|r| (r[1], r[2..].to_vec()))
            .collect()
    };
    Fig3Files {
        moving_rx: load("fig3_moving_rx_r.txt"),
        moving_tx: load("fig3_moving_tx_r.txt"),
    }
}

fn row_at(rows: &[(f64, Vec<f64>)], d: f64) -> &[f64] {
    &rows
        .iter()
        .min_by(|a, b| (a.0 - d).abs().total_cmp(&(b.0 - d).abs()))
        .expect("rows present")
        .1
}

fn first_arrival(row: &[f64]) -> f64 {
    ArrivalDetector::default()
        .first_arrival(row, FS)
        .expect("row has an arrival")
        .seconds
}

fn criterion_1(fig3: &Fig3Files) -> Outcome {
    let expected = 100.0 / C;
    let from_grid = first_arrival(row_at(&fig3.moving_tx, 100.0));
    let wg = Waveguide::default();
    let cfg = RunConfig::default();
    let cfr = static_cfr(
        &wg,
        Position::new(0.0, 12.0),
        Position::new(100.0, 12.0),
        cfg.frequency_grid().expect("grid"),
    )
    .expect("cfr");
    let from_static = first_arrival(&static_cir(&cfr).taps);
    let ok = (from_grid - expected).abs() <= TS && (from_static - expected).abs() <= TS;
    outcome(
        ok,
        format!(
            "moving-tx row {:.5} ms, static CIR {:.5} ms, expected {:.5} ms +- {:.3} us",
            from_grid * 1e3,
            from_static * 1e3,
            expected * 1e3,
            TS * 1e6
        ),
    )
}

fn criterion_2(fig3: &Fig3Files) -> Outcome {
    let measured = first_arrival(row_at(&fig3.moving_rx, 100.0));
    let exact = 100.0 / (C - V);
    let ok = (measured - exact).abs() <= TS && (measured - 69.02e-3).abs() <= TS;
    outcome(
        ok,
        format!(
            "moving-rx row at 100 m {:.5} ms, d/(c-v) = {:.5} ms, stated 69.02 ms, tol {:.3} us",
            measured * 1e3,
            exact * 1e3,
            TS * 1e6
        ),
    )
}

fn criterion_3(fig3: &Fig3Files) -> Outcome {
    let det = ArrivalDetector::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, stated) in [(100.0, 2.356e-3), (101.0, 2.379e-3)] {
        let (rx, tx) = (row_at(&fig3.moving_rx, d), row_at(&fig3.moving_tx, d));
        let shift = first_arrival(rx) - first_arrival(tx);
        let predicted = time_shift(d, V, C).expect("shift");
        let arrivals = arrival_shifts(rx, tx, FS, predicted, &det, 16).expect("arrivals");
        let spread = arrivals.iter().map(|a| (a.shift_s - shift).abs()).fold(0.0, f64::max);
        ok &= (shift - stated).abs() <= 0.02e-3 && spread <= TS && arrivals.len() >= 2;
        parts.push(format!(
            "d={d} m: shift {:.4} ms (stated {:.3} +- 0.02), {} arrivals within {:.3} us of it",
            shift * 1e3,
            stated * 1e3,
            arrivals.len(),
            spread * 1e6
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_4(fig3: &Fig3Files) -> Outcome {
    let measured = first_arrival(row_at(&fig3.moving_rx, 101.0));
    let exact = 101.0 / (C - V);
    let ok = (measured - exact).abs() <= TS && (measured - 69.71e-3).abs() <= TS;
    outcome(
        ok,
        format!(
            "moving-rx row at 101 m {:.5} ms, d/(c-v) = {:.5} ms, stated 69.71 ms, tol {:.3} us",
            measured * 1e3,
            exact * 1e3,
            TS * 1e6
        ),
    )
}

fn brute_force<G: GreensFunction>(x: &SignalBuffer, g: &G, out_len: usize) -> Vec<f64> {
    (0..out_len as i64)
        .map(|i| {
            let n = x.start + i;
            x.samples
                .iter()
                .enumerate()
                .filter(|(j, _)| x.start + *j as i64 <= n)
                .map(|(j, &xm)| g.eval(n, x.start + j as i64) * xm)
                .sum()
        })
        .collect()
}

fn relative_error(y: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let diff = y.iter().zip(reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_501);
    let cfg = SynthesisConfig::default();
    let fs = 16e3;
    let mut worst = 0.0f64;
    let mut scenarios = 0;
    for _ in 0..100 {
        let w = rng.gen_range(6.0..20.0);
        let wg = Waveguide {
            depth_w: w,
            max_reflections_pmax: rng.gen_range(0..=2),
            ..Waveguide::default()
        };
        let len: usize = rng.gen_range(64..=256);
        let out_len = 1600; // 0.1 s
        let traj = |x: f64, h: f64, v: f64| Trajectory {
            start: Position::new(x, h),
            velocity_x: v,
            sample_period_ts: 1.0 / fs,
            duration_samples: out_len as u64,
        };
        let mut speed = || {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(-150.0..150.0)
            }
        };
        let (v_tx, v_rx) = (speed(), speed());
        let d0 = rng.gen_range(5.0..30.0);
        let (h_tx, h_rx) = (rng.gen_range(0.5..w - 0.5), rng.gen_range(0.5..w - 0.5));
        let scenario = DynamicScenario {
            wg,
            tx_traj: traj(0.0, h_tx, v_tx),
            rx_traj: traj(d0, h_rx, v_rx),
            fs,
            duration_samples: out_len as u64,
        };
        let green = ScenarioGreen::new(scenario, &cfg).expect("valid scenario");
        let x = SignalBuffer::new((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(), fs);
        let reference = brute_force(&x, &green, out_len);
        worst = worst
            .max(relative_error(&filter_type1(&x, &green, out_len).samples, &reference))
            .max(relative_error(&filter_type2(&x, &green, out_len).samples, &reference));
        scenarios += 1;
    }
    for _ in 0..50 {
        let size = rng.gen_range(8..=64);
        let entries: Vec<f64> = (0..size * size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = MatrixGreen::from_fn(0, size, |n, m| entries[n as usize * size + m as usize]);
        let x = SignalBuffer::new((0..size).map(|_| rng.gen_range(-1.0..1.0)).collect(), 1.0);
        let reference = brute_force(&x, &g, size);
        worst = worst
            .max(relative_error(&filter_type1(&x, &g, size).samples, &reference))
            .max(relative_error(&filter_type2(&x, &g, size).samples, &reference));
        scenarios += 1;
    }
    outcome(
        worst <= 1e-9 && scenarios >= 100,
        format!("{scenarios} randomized scenarios, worst relative error {worst:.2e} (tol 1e-9)"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ok = true;
    let mut checked = 0usize;
    for _ in 0..50 {
        let size = rng.gen_range(2..=64);
        let first = rng.gen_range(-100..100);
        let entries: Vec<f64> = (0..size * size).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = MatrixGreen::from_fn(first, size, |n, m| {
            entries[(n - first) as usize * size + (m - first) as usize]
        });
        let ns: Vec<i64> = (first..first + size as i64).collect();
        let p = compute_grid(&g, CirKind::TypeI, &ns, 1.0, None);
        let r = compute_grid(&g, CirKind::TypeII, &ns, 1.0, None);
        // p_n(m) = r_{n-m}(m) on every covered index
        for (i, &n) in ns.iter().enumerate() {
            for m in 0..p.n_lags() {
                if let Some(src) = r.row_for(n - m as i64) {
                    ok &= p.rows[i][m] == src[m];
                    checked += 1;
                }
            }
        }
        let r_from_p = convert_covered(&p).expect("covered conversion");
        let p_from_r = convert_covered(&r).expect("covered conversion");
        for (i, &n) in r_from_p.n_values.iter().enumerate() {
            ok &= r_from_p.rows[i] == r.row_for(n).expect("row");
        }
        for (i, &n) in p_from_r.n_values.iter().enumerate() {
            ok &= p_from_r.rows[i] == p.row_for(n).expect("row");
        }
        // round trip through both conversions on rows covered twice
        if let Some(&last) = r_from_p.n_values.last() {
            let targets: Vec<i64> = r_from_p
                .n_values
                .iter()
                .copied()
                .filter(|&n| n - (p.n_lags() as i64 - 1) >= r_from_p.n_values[0] && n <= last)
                .collect();
            if let Ok(back) = convert_type2_to_type1(&r_from_p, &targets) {
                for (i, &n) in back.n_values.iter().enumerate() {
                    ok &= back.rows[i] == p.row_for(n).expect("row");
                }
            }
        }
        ok &= convert_type1_to_type2(&p, &[first + size as i64]).is_err();
    }
    outcome(
        ok,
        format!("50 random grids, {checked} covered indices compared for exact equality"),
    )
}

fn criterion_7() -> Outcome {
    let data = fig3_grids(&RunConfig::default()).expect("fig3 grids");
    outcome(
        data.identity_deviation <= 1e-6 && data.moving_tx.rows.len() == 101,
        format!(
            "{} rows, max relative deviation of moving-tx r_n from moving-rx p_n {:.2e} (tol 1e-6)",
            data.moving_tx.rows.len(),
            data.identity_deviation
        ),
    )
}

fn criterion_8() -> Outcome {
    let moving = fig4_traces(&RunConfig::default()).expect("fig4 traces");
    let still_cfg = RunConfig {
        v: 0.0,
        ..RunConfig::default()
    };
    let still = fig4_traces(&still_cfg).expect("fig4 traces at v = 0");
    let still_dev = relative_deviation(&still.co_moving_trace, &still.static_trace);
    let ok = moving.co_moving_n_invariance <= 1e-6
        && moving.co_moving_vs_row0 <= 1e-6
        && still.co_moving_n_invariance <= 1e-6
        && still_dev <= 1e-6;
    outcome(
        ok,
        format!(
            "co-moving rows vs h^D {:.2e}, h^D vs moving-rx row n=0 {:.2e}, v=0 rows vs static {:.2e} (tol 1e-6)",
            moving.co_moving_n_invariance,
            moving.co_moving_vs_row0,
            still_dev.max(still.co_moving_n_invariance)
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig::default();
    let wg = Waveguide::default();
    let cfr = static_cfr(
        &wg,
        Position::new(0.0, 12.0),
        Position::new(100.0, 12.0),
        cfg.frequency_grid().expect("grid"),
    )
    .expect("cfr");
    let full = hermitian_spectrum(&cfr);
    let back = forward_spectrum(&static_cir(&cfr));
    let scale = full.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let err = back.iter().zip(&full).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;

    // mirror images of the source at 2 m w + zs and 2 m w - zs
    let mut image_ok = true;
    let mut compared = 0;
    for pmax in 0..=3u32 {
        let wg = Waveguide {
            max_reflections_pmax: pmax,
            ..Waveguide::default()
        };
        for &(h_tx, h_rx, d) in &[(12.0f64, 12.0f64, 100.0f64), (2.0, 16.0, 35.0), (9.5, 3.0, 400.0)] {
            let (w, zs, zr) = (wg.depth_w, wg.depth_w - h_tx, wg.depth_w - h_rx);
            let mut expected = Vec::new();
            for m in -5i64..=5 {
                let a = m.unsigned_abs() as u32;
                expected.push((a, a, d.hypot(2.0 * m as f64 * w + zs - zr)));
                let (ns, nb) = if m >= 1 { (a - 1, a) } else { (a + 1, a) };
                expected.push((ns, nb, d.hypot(2.0 * m as f64 * w - zs - zr)));
            }
            expected.retain(|e| e.0 <= pmax && e.1 <= pmax);
            let mut got: Vec<(u32, u32, f64)> =
                enumerate_eigenpaths(&wg, Position::new(0.0, h_tx), Position::new(d, h_rx))
                    .expect("paths")
                    .iter()
                    .map(|p| (p.n_surface, p.n_bottom, p.length_lp))
                    .collect();
            let key = |a: &(u32, u32, f64), b: &(u32, u32, f64)| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2));
            expected.sort_by(key);
            got.sort_by(key);
            image_ok &= got.len() == expected.len();
            for (g, e) in got.iter().zip(&expected) {
                image_ok &= (g.0, g.1) == (e.0, e.1) && (g.2 - e.2).abs() <= 1e-12 * e.2;
                compared += 1;
            }
        }
    }
    outcome(
        err <= 1e-10 && image_ok,
        format!(
            "CFR round trip relative error {err:.2e} (tol 1e-10); {compared} image-method paths match the image listing"
        ),
    )
}

fn criterion_10() -> Outcome {
    let f_tx = doppler_frequency(1.0, V, 0.0, C).expect("doppler");
    let f_rx = doppler_frequency(1.0, 0.0, V, C).expect("doppler");
    let formula_ok = f_tx != f_rx && (f_tx - 0.966993).abs() < 5e-7 && (f_rx - 0.965867).abs() < 5e-7;

    let cfg = RunConfig {
        pmax: 0,
        ..RunConfig::default()
    };
    let synth = cfg.synthesis();
    let f0 = cfg.doppler_tone_hz;
    let rx = measure_doppler(&cfg.case_spec(swa_core::scenarios::CaseKind::MovingRx), &synth, f0).expect("rx tone");
    let tx = measure_doppler(&cfg.case_spec(swa_core::scenarios::CaseKind::MovingTx), &synth, f0).expect("tx tone");
    let e_rx = (rx.factor / f_rx - 1.0).abs();
    let e_tx = (tx.factor / f_tx - 1.0).abs();
    // each measurement must also be closer to its own prediction than to the other
    let distinct =
        (rx.factor - f_rx).abs() < (rx.factor - f_tx).abs() && (tx.factor - f_tx).abs() < (tx.factor - f_rx).abs();
    outcome(
        formula_ok && e_rx <= 1e-3 && e_tx <= 1e-3 && distinct,
        format!(
            "predicted tx {f_tx:.6} / rx {f_rx:.6}; measured tx {:.6} ({e_tx:.1e}) / rx {:.6} ({e_rx:.1e}), tol 1e-3",
            tx.factor, rx.factor
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let fig3 = emitted_fig3();
    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "LOS delay, static / moving-tx", criterion_1(&fig3)),
        (2, "LOS delay, moving-rx", criterion_2(&fig3)),
        (3, "time shift between cases", criterion_3(&fig3)),
        (4, "moving-rx arrival at sweep end", criterion_4(&fig3)),
        (5, "filter structures vs direct superposition", criterion_5()),
        (6, "type I / type II conversion identities", criterion_6()),
        (7, "moving-rx type I equals moving-tx type II", criterion_7()),
        (8, "co-moving LTI property", criterion_8()),
        (9, "transform consistency and image oracle", criterion_9()),
        (10, "Doppler asymmetry", criterion_10()),
    ];
    let mut failed = 0;
    for (id, name, o) in &results {
        println!(
            "{} criterion {id:>2}: {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
