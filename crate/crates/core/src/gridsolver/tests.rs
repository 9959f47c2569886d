use super::*;
use crate::dynamics::{hamiltonian_control, step_euler, Translation1D, VerticalDrone};

fn solve_translation(count: usize) -> GridValueFn<f64> {
    let sys = Translation1D::<f64>::new();
    let grid = Grid::new(vec![GridAxis {
        lo: -1.0,
        hi: 2.0,
        count,
    }])
    .with_snapshots(default_snapshot_times(1.0, 11));
    solve_vi(&sys, &grid).unwrap()
}

fn drone_grid(nz: usize, nv: usize, nk: usize) -> Grid {
    Grid::new(vec![
        GridAxis {
            lo: -0.5,
            hi: 3.5,
            count: nz,
        },
        GridAxis {
            lo: -4.0,
            hi: 4.0,
            count: nv,
        },
        GridAxis {
            lo: 0.0,
            hi: 12.0,
            count: nk,
        },
    ])
    .with_snapshots(default_snapshot_times(1.2, 13))
}

#[test]
fn translation_matches_analytic_solution() {
    let vf = solve_translation(301);
    let dx = 3.0 / 300.0;
    // V(x, t) = x - (T - t); linear fields are exact for central
    // differences, so only time discretization error remains
    for (ti, &t) in vf.times.iter().enumerate() {
        for (k, &v) in vf.values[ti].iter().enumerate() {
            let x = -1.0 + dx * k as f64;
            let expected = x - (1.0 - t);
            assert!(
                (v - expected).abs() <= dx,
                "V({x},{t}) = {v}, expected {expected}"
            );
        }
    }
}

#[test]
fn boundary_snapshot_is_exactly_l() {
    let vf = solve_translation(101);
    let dx = 3.0 / 100.0;
    let last = vf.times.len() - 1;
    assert_eq!(vf.times[last], 1.0);
    for (k, &v) in vf.values[last].iter().enumerate() {
        let x = -1.0 + dx * k as f64;
        assert_eq!(v, x);
    }
}

#[test]
fn vi_feasibility_and_temporal_monotonicity() {
    let sys = VerticalDrone::<f64>::new();
    let vf = solve_vi(&sys, &drone_grid(41, 41, 5)).unwrap();
    let last = vf.times.len() - 1;
    for node in 0..vf.values[0].len() {
        let l = vf.values[last][node];
        for ti in 0..vf.times.len() {
            assert!(vf.values[ti][node] <= l + 1e-9);
            if ti > 0 {
                assert!(vf.values[ti - 1][node] <= vf.values[ti][node] + 1e-9);
            }
        }
    }
}

#[test]
fn interpolation_node_and_midpoint() {
    let vf = solve_translation(101);
    let dx = 3.0 / 100.0;
    // grid node at a stored time is returned exactly
    let x = -1.0 + 7.0 * dx;
    let stored = vf.values[0][7];
    assert_eq!(vf.interpolate(&[x], 0.0).unwrap(), stored);
    // midpoint of two nodes on the (linear) field is the mean
    let mid = vf.interpolate(&[x + dx / 2.0], 0.0).unwrap();
    let mean = 0.5 * (vf.values[0][7] + vf.values[0][8]);
    assert!((mid - mean).abs() < 1e-12);
}

#[test]
fn interpolation_analytic_error_bound() {
    let vf = solve_translation(151);
    let dx = 3.0 / 150.0;
    let mut rng = crate::rng::stream(3, &[crate::rng::tag::EVAL]);
    use rand::Rng;
    for _ in 0..200 {
        let x = rng.random_range(-1.0..2.0);
        let t = rng.random_range(0.0..1.0);
        let v = vf.interpolate(&[x], t).unwrap();
        let expected = x - (1.0 - t);
        assert!((v - expected).abs() <= dx);
    }
}

#[test]
fn interpolation_rejects_out_of_domain() {
    let vf = solve_translation(51);
    assert!(matches!(
        vf.interpolate(&[2.5], 0.0),
        Err(crate::error::Error::OutOfDomain(_))
    ));
    assert!(vf.interpolate(&[0.0], 1.5).is_err());
}

#[test]
fn brt_volume_constants() {
    let mut vf = solve_translation(51);
    let n = vf.values[0].len();
    vf.values = vec![vec![1.0; n]];
    vf.times = vec![0.0];
    assert_eq!(vf.brt_volume(0.0).unwrap(), 0.0);
    vf.values = vec![vec![-1.0; n]];
    assert_eq!(vf.brt_volume(0.0).unwrap(), 1.0);
}

#[test]
fn cfl_violation_is_reported_with_bound() {
    let sys = Translation1D::<f64>::new();
    let mut grid = Grid::new(vec![GridAxis {
        lo: -1.0,
        hi: 2.0,
        count: 31,
    }]);
    grid.dt = Some(1.0); // way above dx / |f| = 0.1
    let err = solve_vi(&sys, &grid).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("CFL") && msg.contains("maximum admissible"), "{msg}");
}

#[test]
fn oracle_policy_keeps_deep_interior_state_safe() {
    let sys = VerticalDrone::<f64>::new();
    let vf = solve_vi(&sys, &drone_grid(101, 101, 7)).unwrap();
    // find a deep-interior safe state at K = 12
    let x0 = [1.5, 0.0, 12.0];
    assert!(vf.interpolate(&x0, 0.0).unwrap() > 0.5);
    let dt = 0.02;
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; 3];
    for step in 0..60 {
        let t = (dt * step as f64).min(1.2);
        let mut xq = x.clone();
        for (i, a) in vf.axes.iter().enumerate() {
            xq[i] = xq[i].clamp(a.lo, a.hi);
        }
        vf.gradient_at(&xq, t, &mut grad).unwrap();
        let u = hamiltonian_control(&sys, &x, &grad).unwrap();
        x = step_euler(&sys, &x, &u, dt).unwrap();
        assert!(
            sys.boundary(&x) > 0.0,
            "left safe set at step {step}: z = {}",
            x[0]
        );
    }
}

#[test]
fn value_fn_file_round_trip() {
    let vf = solve_translation(51);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.vf");
    save_value_fn(&vf, &path).unwrap();
    let back: GridValueFn<f64> = load_value_fn(&path).unwrap();
    assert_eq!(back.system_name, vf.system_name);
    assert_eq!(back.times, vf.times);
    assert_eq!(back.values, vf.values);

    // tampered version header is rejected
    let mut raw = std::fs::read(&path).unwrap();
    let pos = raw
        .windows(16)
        .position(|w| w == b"\"format_version\"")
        .map(|p| p + 17)
        .unwrap();
    raw[pos] = b'9';
    let bad = dir.path().join("bad.vf");
    std::fs::write(&bad, raw).unwrap();
    assert!(load_value_fn::<f64>(&bad).is_err());
}
