use super::*;
use crate::rng::{stream, tag};
use rand::Rng;

fn drone() -> VerticalDrone<f64> {
    VerticalDrone::new()
}

#[test]
fn drone_flow_matches_hand_computation() {
    let sys = drone();
    let f = flow(&sys, &[1.5, 0.0, 12.0], &[1.0]).unwrap();
    assert_eq!(f, vec![0.0, 12.0 * 1.0 - 9.8, 0.0]);
}

#[test]
fn drone_zero_gain_annihilates_control() {
    let sys = drone();
    for u in [-1.0, 0.3, 1.0] {
        let f = flow(&sys, &[1.0, 2.0, 0.0], &[u]).unwrap();
        assert_eq!(f[1], -9.8);
    }
}

#[test]
fn quadrotor_hover_thrust_cancels_gravity() {
    let sys = Quadrotor13D::<f64>::new();
    let mut x = vec![0.0; 13];
    x[3] = 1.0; // identity quaternion
    let f = flow(&sys, &x, &[9.8, 0.0, 0.0, 0.0]).unwrap();
    assert!(f[9].abs() < 1e-12, "v̇_z = {}", f[9]);
    assert!(f[7].abs() < 1e-12 && f[8].abs() < 1e-12);
}

#[test]
fn flow_rejects_dimension_mismatch() {
    let sys = drone();
    assert!(matches!(
        flow(&sys, &[1.0, 2.0], &[0.0]),
        Err(crate::error::Error::Contract(_))
    ));
}

#[test]
fn step_euler_drone_example() {
    let sys = drone();
    let x = step_euler(&sys, &[1.5, 0.0, 12.0], &[1.0], 0.02).unwrap();
    assert!((x[0] - 1.5).abs() < 1e-15);
    assert!((x[1] - 0.044).abs() < 1e-15);
    assert_eq!(x[2], 12.0);
}

#[test]
fn step_euler_rejects_nonpositive_dt() {
    let sys = drone();
    assert!(step_euler(&sys, &[1.5, 0.0, 12.0], &[1.0], 0.0).is_err());
    assert!(step_euler(&sys, &[1.5, 0.0, 12.0], &[1.0], -0.1).is_err());
}

#[test]
fn quadrotor_quaternion_renormalized_after_step() {
    let sys = Quadrotor13D::<f64>::new();
    let mut rng = stream(11, &[tag::EVAL, 0]);
    for _ in 0..50 {
        let mut x = vec![0.0; 13];
        sys.state_box().sample_uniform(&mut rng, &mut x);
        let mut u = vec![0.0; 4];
        sys.control_bounds().sample_uniform(&mut rng, &mut u);
        let next = step_euler(&sys, &x, &u, 0.02).unwrap();
        let norm: f64 = next[3..7].iter().map(|q| q * q).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn drone_boundary_values() {
    let sys = drone();
    assert_eq!(boundary_l(&sys, &[1.5, 0.0, 0.0]), 1.5);
    assert_eq!(boundary_l(&sys, &[0.0, 0.0, 0.0]), 0.0);
    assert_eq!(boundary_l(&sys, &[-0.5, 0.0, 0.0]), -0.5);
}

#[test]
fn quadrotor_boundary_hover_example() {
    let sys = Quadrotor13D::<f64>::new();
    let mut x = vec![0.0; 13];
    x[0] = 2.0;
    x[3] = 1.0;
    let l = boundary_l(&sys, &x);
    assert!((l - 1.33).abs() < 1e-12, "l = {l}");
}

#[test]
fn quadrotor_boundary_on_axis_is_negative_obstacle_radius() {
    let sys = Quadrotor13D::<f64>::new();
    let mut x = vec![0.0; 13];
    x[3] = 1.0;
    assert_eq!(boundary_l(&sys, &x), -0.5);
}

#[test]
fn pubsub_boundary_at_origin() {
    let sys = PubSub40::<f64>::new();
    let x = vec![0.0; 40];
    assert_eq!(boundary_l(&sys, &x), -0.25);
}

#[test]
fn boundary_sign_convention_per_system() {
    // hand-picked interior-safe and failure states
    let drone = VerticalDrone::<f64>::new();
    assert!(boundary_l(&drone, &[1.5, 0.0, 6.0]) > 0.0);
    assert!(boundary_l(&drone, &[3.2, 0.0, 6.0]) <= 0.0);

    let quad = Quadrotor13D::<f64>::new();
    let mut safe = vec![0.0; 13];
    safe[0] = 2.0;
    safe[3] = 1.0;
    let mut fail = vec![0.0; 13];
    fail[3] = 1.0;
    assert!(boundary_l(&quad, &safe) > 0.0);
    assert!(boundary_l(&quad, &fail) <= 0.0);

    let f1 = F1Tenth7D::<f64>::new(Track::default_oval()).unwrap();
    let p = f1.track.interior_point();
    let mut on_track = vec![0.0; 7];
    on_track[0] = p[0];
    on_track[1] = p[1];
    let mut off_track = vec![0.0; 7];
    off_track[0] = 31.25;
    off_track[1] = 25.0; // infield center
    assert!(boundary_l(&f1, &on_track) > 0.0);
    assert!(boundary_l(&f1, &off_track) <= 0.0);

    let ps = PubSub40::<f64>::new();
    let mut safe40 = vec![0.9; 40];
    safe40[0] = 0.0;
    assert!(boundary_l(&ps, &safe40) > 0.0);
    assert!(boundary_l(&ps, &vec![0.0; 40]) <= 0.0);
}

#[test]
fn boundary_grad_matches_finite_differences() {
    let systems: Vec<std::sync::Arc<dyn System<f64>>> = vec![
        std::sync::Arc::new(VerticalDrone::new()),
        std::sync::Arc::new(Quadrotor13D::new()),
        std::sync::Arc::new(F1Tenth7D::new(Track::default_oval()).unwrap()),
        std::sync::Arc::new(PubSub40::new()),
    ];
    for sys in systems {
        let n = sys.state_dim();
        let mut rng = stream(5, &[tag::EVAL, n as u64]);
        let mut worst = 0.0f64;
        for _ in 0..40 {
            let mut x = vec![0.0; n];
            sys.state_box().sample_uniform(&mut rng, &mut x);
            let mut grad = vec![0.0; n];
            sys.boundary_grad(&x, &mut grad);
            let h = 1e-6;
            for i in 0..n {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                let fd = (sys.boundary(&xp) - sys.boundary(&xm)) / (2.0 * h);
                let err = (grad[i] - fd).abs() / fd.abs().max(1.0);
                // skip straddled kinks: the two-sided difference is not a
                // subgradient there
                let mid = sys.boundary(&x);
                let curvature =
                    (sys.boundary(&xp) + sys.boundary(&xm) - 2.0 * mid).abs() / (h * h);
                if curvature < 1e3 {
                    worst = worst.max(err);
                }
            }
        }
        assert!(worst < 1e-4, "{}: worst grad err {worst}", sys.name());
    }
}

#[test]
fn hamiltonian_control_drone_examples() {
    let sys = drone();
    let u = hamiltonian_control(&sys, &[1.0, 0.0, 12.0], &[0.0, 1.0, 0.0]).unwrap();
    assert_eq!(u, vec![1.0]);
    // zero control coefficient -> midpoint tie-break
    let u = hamiltonian_control(&sys, &[1.0, 0.0, 12.0], &[1.0, 0.0, 0.0]).unwrap();
    assert_eq!(u, vec![0.0]);
}

#[test]
fn hamiltonian_drone_examples() {
    let sys = drone();
    let h = hamiltonian(&sys, &[1.0, 0.0, 12.0], &[0.0, 1.0, 0.0]).unwrap();
    assert!((h - 2.2).abs() < 1e-12);
    let h0 = hamiltonian(&sys, &[1.0, 0.0, 12.0], &[0.0, 0.0, 0.0]).unwrap();
    assert_eq!(h0, 0.0);
}

#[test]
fn bang_bang_dominates_sampled_controls() {
    let systems: Vec<std::sync::Arc<dyn System<f64>>> = vec![
        std::sync::Arc::new(VerticalDrone::new()),
        std::sync::Arc::new(Quadrotor13D::new()),
        std::sync::Arc::new(F1Tenth7D::new(Track::default_oval()).unwrap()),
        std::sync::Arc::new(PubSub40::new()),
    ];
    for sys in systems {
        let n = sys.state_dim();
        let mut rng = stream(17, &[tag::EVAL, n as u64]);
        let mut fx = vec![0.0; n];
        let mut u = vec![0.0; sys.control_dim()];
        for trial in 0..20 {
            let mut x = vec![0.0; n];
            sys.state_box().sample_uniform(&mut rng, &mut x);
            let grad: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = hamiltonian(sys.as_ref(), &x, &grad).unwrap();
            for _ in 0..50 {
                sys.control_bounds().sample_uniform(&mut rng, &mut u);
                sys.dynamics(&x, &u, &mut fx);
                let s: f64 = grad.iter().zip(&fx).map(|(g, f)| g * f).sum();
                assert!(
                    h >= s - 1e-12,
                    "{} trial {trial}: H {h} < sampled {s}",
                    sys.name()
                );
            }
        }
    }
}

#[test]
fn hamiltonian_matches_dense_sampling_on_drone() {
    let sys = drone();
    let mut rng = stream(23, &[tag::EVAL]);
    let mut fx = vec![0.0; 3];
    for _ in 0..20 {
        let mut x = vec![0.0; 3];
        sys.state_box().sample_uniform(&mut rng, &mut x);
        let grad: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let h = hamiltonian(&sys, &x, &grad).unwrap();
        let mut best = f64::NEG_INFINITY;
        for k in 0..=10_000 {
            let u = [-1.0 + 2.0 * (k as f64) / 10_000.0];
            sys.dynamics(&x, &u, &mut fx);
            best = best.max(grad.iter().zip(&fx).map(|(g, f)| g * f).sum());
        }
        assert!((h - best).abs() < 1e-10);
    }
}

#[test]
fn sampled_control_agrees_with_affine_on_drone() {
    let sys = drone();
    let mut rng = stream(29, &[tag::EVAL]);
    let x = [1.0, -1.0, 8.0];
    let grad = [0.3, 0.9, -0.1];
    let u_exact = hamiltonian_control(&sys, &x, &grad).unwrap();
    let u_sampled = sampled_hamiltonian_control(&sys, &x, &grad, 4000, &mut rng);
    assert!((u_exact[0] - u_sampled[0]).abs() < 2e-3);
}

#[test]
fn euler_halving_shows_second_order_local_error() {
    let sys = drone();
    let x0 = [1.0, 0.5, 7.0];
    let u = [0.4];
    let mut errs = Vec::new();
    for &dt in &[0.04, 0.02, 0.01] {
        let full = step_euler(&sys, &x0, &u, dt).unwrap();
        let half = step_euler(&sys, &x0, &u, dt / 2.0).unwrap();
        let half2 = step_euler(&sys, &half, &u, dt / 2.0).unwrap();
        let err: f64 = full
            .iter()
            .zip(&half2)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    // halving dt should cut the one-step difference by ~4x
    assert!(errs[0] / errs[1] > 3.0);
    assert!(errs[1] / errs[2] > 3.0);
}

#[test]
fn f1tenth_mode_switch_boundary() {
    let sys = F1Tenth7D::<f64>::new(Track::default_oval()).unwrap();
    assert!(sys.is_kinematic_mode(0.5 - 1e-9));
    assert!(!sys.is_kinematic_mode(0.5));
    // the two modes produce different yaw-rate dynamics: check the flows
    // actually differ across the boundary
    let mk = |v: f64| [10.0, 11.0, 0.2, v, 0.3, 1.0, 0.1];
    let f_kin = flow(&sys, &mk(0.5 - 1e-9), &[0.0, 0.0]).unwrap();
    let f_dyn = flow(&sys, &mk(0.5), &[0.0, 0.0]).unwrap();
    // kinematic: theta_dot = v tan(phi)/L; dynamic: theta_dot = omega
    assert!((f_dyn[4] - 1.0).abs() < 1e-9);
    assert!((f_kin[4] - 1.0).abs() > 1e-3);
}

#[test]
fn f1tenth_acceleration_cap_engages_at_speed() {
    let sys = F1Tenth7D::<f64>::new(Track::default_oval()).unwrap();
    let x_fast = [10.0, 11.0, 0.0, 7.9, 0.0, 0.0, 0.0];
    let f = flow(&sys, &x_fast, &[0.0, 9.51]).unwrap();
    let expected = 9.51 * 7.319 / 7.9;
    assert!((f[3] - expected).abs() < 1e-12);
    // at v_max, positive acceleration is zeroed
    let x_vmax = [10.0, 11.0, 0.0, 8.0, 0.0, 0.0, 0.0];
    let f = flow(&sys, &x_vmax, &[0.0, 9.51]).unwrap();
    assert_eq!(f[3], 0.0);
    // braking still allowed
    let f = flow(&sys, &x_vmax, &[0.0, -9.51]).unwrap();
    assert!(f[3] < -8.0);
}

#[test]
fn by_name_registry() {
    for name in SYSTEM_NAMES {
        let sys = by_name::<f64>(name, None).unwrap();
        assert_eq!(sys.name(), name);
        assert_eq!(sys.state_dim(), sys.state_box().dim());
        assert_eq!(sys.control_dim(), sys.control_bounds().dim());
    }
    assert!(by_name::<f64>("no_such_system", None).is_err());
}

#[test]
fn generic_scalar_f32_flows() {
    let sys = VerticalDrone::<f32>::new();
    let f = flow(&sys, &[1.5f32, 0.0, 12.0], &[1.0]).unwrap();
    assert!((f[1] - 2.2).abs() < 1e-5);
    let h = hamiltonian(&sys, &[1.0f32, 0.0, 12.0], &[0.0, 1.0, 0.0]).unwrap();
    assert!((h - 2.2).abs() < 1e-5);
}
