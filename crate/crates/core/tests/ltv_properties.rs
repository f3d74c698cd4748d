use proptest::prelude::*;

use swa_core::geometry::{Position, Waveguide};
use swa_core::ltv::{
    compute_grid, convert_covered, convert_type1_to_type2, convert_type2_to_type1, CirKind, GreensFunction, LtvCirGrid,
    MatrixGreen, ScenarioGreen, SynthesisConfig,
};
use swa_core::scenarios::{build, dynamic_lti_response, static_response, CaseKind, CaseSpec};
use swa_core::Error;

fn paper_case(kind: CaseKind) -> CaseSpec {
    CaseSpec::new(kind, Waveguide::default(), 100.0, 51.2, 12.0, 256e3)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Row-wise agreement relative to each row's peak.
fn grids_close(a: &LtvCirGrid, b: &LtvCirGrid, tol: f64) {
    assert_eq!(a.kind, b.kind);
    assert_eq!(a.n_values, b.n_values);
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        let len = ra.len().max(rb.len());
        let pad = |r: &[f64]| {
            let mut v = r.to_vec();
            v.resize(len, 0.0);
            v
        };
        let peak = rb.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(max_abs_diff(&pad(ra), &pad(rb)) <= tol * peak);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conversion_round_trip(size in 4usize..24, first in -20i64..20, seed in any::<u64>()) {
        let g = MatrixGreen::from_fn(first, size, |n, m| {
            let h = (n.wrapping_mul(31) ^ m.wrapping_mul(17)) as u64 ^ seed;
            (h % 1000) as f64 / 1000.0 - 0.5
        });
        let ns: Vec<i64> = (first..first + size as i64).collect();
        let p = compute_grid(&g, CirKind::TypeI, &ns, 1.0, None);
        let r = compute_grid(&g, CirKind::TypeII, &ns, 1.0, None);
        // every converted row must be the directly computed row of the other kind
        let r_from_p = convert_covered(&p).unwrap();
        for (i, &n) in r_from_p.n_values.iter().enumerate() {
            prop_assert_eq!(&r_from_p.rows[i][..], r.row_for(n).unwrap());
        }
        let p_from_r = convert_covered(&r).unwrap();
        for (i, &n) in p_from_r.n_values.iter().enumerate() {
            prop_assert_eq!(&p_from_r.rows[i][..], p.row_for(n).unwrap());
        }
        // p -> r -> p over the rows that survive both steps
        let back = convert_covered(&r_from_p);
        if let Ok(back) = back {
            for (i, &n) in back.n_values.iter().enumerate() {
                prop_assert_eq!(&back.rows[i][..], p.row_for(n).unwrap());
            }
        }
        for n in ns.iter().copied() {
            for m in 0..size as i64 {
                prop_assert_eq!(g.type1_row(n).to_dense(size)[m as usize], g.eval(n, n - m));
                prop_assert_eq!(g.type2_row(n).to_dense(size)[m as usize], g.eval(n + m, n));
            }
        }
    }

    #[test]
    fn path_length_grows_with_distance(d in 1.0f64..500.0, dd in 0.001f64..10.0, h_tx in 0.0f64..18.0, h_rx in 0.0f64..18.0) {
        let wg = Waveguide::default();
        let near = swa_core::geometry::enumerate_eigenpaths(&wg, Position::new(0.0, h_tx), Position::new(d, h_rx)).unwrap();
        let far = swa_core::geometry::enumerate_eigenpaths(&wg, Position::new(0.0, h_tx), Position::new(d + dd, h_rx)).unwrap();
        let key = |p: &swa_core::geometry::Eigenpath| (p.n_surface, p.n_bottom, p.first);
        for p in &near {
            let q = far.iter().find(|q| key(q) == key(p)).unwrap();
            prop_assert!(q.length_lp > p.length_lp);
        }
    }

    #[test]
    fn swapping_ends_keeps_paths(d in 1.0f64..500.0, h_tx in 0.0f64..18.0, h_rx in 0.0f64..18.0) {
        let wg = Waveguide::default();
        let mut ab: Vec<f64> = swa_core::geometry::enumerate_eigenpaths(&wg, Position::new(0.0, h_tx), Position::new(d, h_rx))
            .unwrap().iter().map(|p| p.length_lp).collect();
        let mut ba: Vec<f64> = swa_core::geometry::enumerate_eigenpaths(&wg, Position::new(0.0, h_rx), Position::new(d, h_tx))
            .unwrap().iter().map(|p| p.length_lp).collect();
        ab.sort_by(f64::total_cmp);
        ba.sort_by(f64::total_cmp);
        for (a, b) in ab.iter().zip(&ba) {
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

#[test]
fn scenario_grids_convert_consistently() {
    let wg = Waveguide {
        depth_w: 8.0,
        max_reflections_pmax: 1,
        ..Waveguide::default()
    };
    let case = CaseSpec {
        duration_samples: 100,
        ..CaseSpec::new(CaseKind::MovingRx, wg, 5.0, 60.0, 4.0, 16e3)
    };
    let green = ScenarioGreen::new(build(&case).unwrap(), &SynthesisConfig::default()).unwrap();
    let targets: Vec<i64> = (0..20).collect();
    let p_direct = compute_grid(&green, CirKind::TypeI, &targets, case.fs, None);
    let r_direct = compute_grid(&green, CirKind::TypeII, &targets, case.fs, None);
    let lags = p_direct.n_lags().max(r_direct.n_lags()) as i64;

    let r_wide = compute_grid(&green, CirKind::TypeII, &(-lags..20).collect::<Vec<_>>(), case.fs, None);
    let p_conv = convert_type2_to_type1(&r_wide, &targets).unwrap();
    let p_wide = compute_grid(
        &green,
        CirKind::TypeI,
        &(0..20 + lags).collect::<Vec<_>>(),
        case.fs,
        None,
    );
    let r_conv = convert_type1_to_type2(&p_wide, &targets).unwrap();

    for (conv, direct) in [(&p_conv, &p_direct), (&r_conv, &r_direct)] {
        assert_eq!(conv.kind, direct.kind);
        for (a, b) in conv.rows.iter().zip(&direct.rows) {
            let len = a.len().max(b.len());
            let (mut a, mut b) = (a.clone(), b.clone());
            a.resize(len, 0.0);
            b.resize(len, 0.0);
            assert!(max_abs_diff(&a, &b) <= 1e-10);
        }
    }
    // too few source rows
    assert!(matches!(
        convert_type2_to_type1(&r_direct, &targets),
        Err(Error::Coverage { .. })
    ));
}

#[test]
fn missing_rows_are_reported() {
    let g = MatrixGreen::from_fn(0, 8, |n, m| (n - m) as f64);
    let p = compute_grid(&g, CirKind::TypeI, &[0, 1, 2, 3], 1.0, None);
    match convert_type1_to_type2(&p, &[0, 1]) {
        Err(Error::Coverage { missing }) => assert_eq!(missing, vec![4]),
        other => panic!("expected a coverage error, got {other:?}"),
    }
    assert!(convert_type2_to_type1(&p, &[0]).is_err());
}

#[test]
fn co_moving_rows_are_time_invariant() {
    let case = paper_case(CaseKind::CoMoving);
    let cfg = SynthesisConfig::default();
    let green = ScenarioGreen::new(build(&case).unwrap(), &cfg).unwrap();
    let ns = case.n_grid(case.stride_for_displacement(0.01));
    let h_d = dynamic_lti_response(&case, &cfg).unwrap();
    for kind in [CirKind::TypeI, CirKind::TypeII] {
        let grid = compute_grid(&green, kind, &ns, case.fs, None);
        let mut reference = h_d.clone();
        reference.resize(grid.n_lags().max(h_d.len()), 0.0);
        let peak = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for row in &grid.rows {
            let mut r = row.clone();
            r.resize(reference.len(), 0.0);
            assert!(max_abs_diff(&r, &reference) <= 1e-6 * peak, "{}", kind.label());
        }
    }
}

#[test]
fn static_rows_equal_static_response() {
    let case = CaseSpec {
        duration_samples: 5000,
        ..paper_case(CaseKind::Static)
    };
    let cfg = SynthesisConfig::default();
    let green = ScenarioGreen::new(build(&case).unwrap(), &cfg).unwrap();
    let h_s = static_response(&case, &cfg).unwrap();
    let grid = compute_grid(&green, CirKind::TypeI, &[0, 2500, 5000], case.fs, None);
    for row in &grid.rows {
        let mut r = row.clone();
        r.resize(h_s.len(), 0.0);
        assert_eq!(r, h_s);
    }
}

#[test]
fn cache_quantum_does_not_change_rows() {
    let case = paper_case(CaseKind::MovingRx);
    let cached = ScenarioGreen::new(build(&case).unwrap(), &SynthesisConfig::default()).unwrap();
    let exact = ScenarioGreen::new(
        build(&case).unwrap(),
        &SynthesisConfig {
            cache_quantum_dd: 0.0,
            ..SynthesisConfig::default()
        },
    )
    .unwrap();
    let ns = [0, 1234, 5000];
    for kind in [CirKind::TypeI, CirKind::TypeII] {
        let a = compute_grid(&cached, kind, &ns, case.fs, None);
        let b = compute_grid(&exact, kind, &ns, case.fs, None);
        grids_close(&a, &b, 1e-6);
    }
    assert!(cached.channel().cached_nodes() > 0);
    assert_eq!(exact.channel().cached_nodes(), 0);
}
