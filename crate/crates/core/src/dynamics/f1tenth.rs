use super::track::Track;
use super::{ControlBounds, StateBox, System};
use crate::dual::Dual;
use crate::error::Result;
use crate::scalar::Real;

/// Single-track race car with hybrid dynamics:
/// x = (p_x, p_y, phi, v, theta_yaw, omega_yaw, beta_slip),
/// u = (phi_dot, a). Below |v| = 0.5 m/s the kinematic bicycle model is
/// used; at and above it, the dynamic single-track model with linear
/// tire forces. Longitudinal acceleration saturates with speed:
/// |a| <= a_max * v_switch / |v| for |v| > v_switch, and positive
/// acceleration is zeroed once v >= v_max.
#[derive(Debug, Clone)]
pub struct F1Tenth7D<T> {
    pub track: Track,
    params: Params<T>,
    bounds: ControlBounds<T>,
    boxx: StateBox<T>,
    horizon: T,
}

#[derive(Debug, Clone)]
struct Params<T> {
    mu: T,
    csf: T,
    csr: T,
    lf: T,
    lr: T,
    h_cg: T,
    mass: T,
    inertia: T,
    gravity: T,
    v_switch: T,
    a_max: T,
    v_max: T,
    mode_switch_speed: T,
}

impl<T: Real> F1Tenth7D<T> {
    pub fn new(track: Track) -> Result<Self> {
        track.validate()?;
        let c = T::c;
        Ok(F1Tenth7D {
            track,
            params: Params {
                mu: c(1.0489),
                csf: c(4.718),
                csr: c(5.4562),
                lf: c(0.15875),
                lr: c(0.17145),
                h_cg: c(0.074),
                mass: c(3.74),
                inertia: c(0.04712),
                gravity: c(9.81),
                v_switch: c(7.319),
                a_max: c(9.51),
                v_max: c(8.0),
                mode_switch_speed: c(0.5),
            },
            bounds: ControlBounds::new(vec![c(-3.2), c(-9.51)], vec![c(3.2), c(9.51)]),
            boxx: StateBox::new(
                vec![
                    c(0.0),
                    c(0.0),
                    c(-0.4189),
                    c(0.0),
                    c(-std::f64::consts::PI),
                    c(-5.0),
                    c(-0.8),
                ],
                vec![
                    c(62.5),
                    c(50.0),
                    c(0.4189),
                    c(8.0),
                    c(std::f64::consts::PI),
                    c(5.0),
                    c(0.8),
                ],
            ),
            horizon: c(1.0),
        })
    }

    /// True below the 0.5 m/s switch (the boundary itself is dynamic mode).
    pub fn is_kinematic_mode(&self, v: T) -> bool {
        v.abs() < self.params.mode_switch_speed
    }

    /// Velocity-dependent acceleration saturation.
    fn accel_limits(&self, v: T) -> (T, T) {
        let p = &self.params;
        let lim = if v.abs() > p.v_switch {
            p.a_max * p.v_switch / v.abs()
        } else {
            p.a_max
        };
        let hi = if v >= p.v_max { T::zero() } else { lim };
        (-lim, hi)
    }

    fn cap_accel(&self, v: T, a: T) -> T {
        let (lo, hi) = self.accel_limits(v);
        num_traits::clamp(a, lo, hi)
    }

    /// Load-transfer tire coefficients for the dynamic model, split into
    /// base values and slopes in the (capped) longitudinal acceleration:
    /// front axle uses g*l_r − a*h, rear uses g*l_f + a*h.
    fn tire_terms(&self) -> TireTerms<T> {
        let p = &self.params;
        let wheelbase = p.lf + p.lr;
        TireTerms {
            yaw_gain: p.mu * p.mass / (p.inertia * wheelbase),
            slip_gain: p.mu / wheelbase,
            front_base: p.gravity * p.lr,
            rear_base: p.gravity * p.lf,
            h_cg: p.h_cg,
        }
    }
}

struct TireTerms<T> {
    yaw_gain: T,
    slip_gain: T,
    front_base: T,
    rear_base: T,
    h_cg: T,
}

impl<T: Real> System<T> for F1Tenth7D<T> {
    fn name(&self) -> &'static str {
        "f1tenth7d"
    }
    fn state_dim(&self) -> usize {
        7
    }
    fn control_dim(&self) -> usize {
        2
    }
    fn control_bounds(&self) -> &ControlBounds<T> {
        &self.bounds
    }
    fn state_box(&self) -> &StateBox<T> {
        &self.boxx
    }
    fn time_horizon(&self) -> T {
        self.horizon
    }

    fn dynamics(&self, x: &[T], u: &[T], out: &mut [T]) {
        let mut f0 = [T::zero(); 7];
        let mut g = [T::zero(); 14];
        self.affine_parts_fixed(x, &mut f0, &mut g);
        let steer_rate = num_traits::clamp(u[0], self.bounds.lo[0], self.bounds.hi[0]);
        let accel = self.cap_accel(x[3], u[1]);
        for i in 0..7 {
            out[i] = f0[i] + g[i] * steer_rate + g[7 + i] * accel;
        }
    }

    fn boundary(&self, x: &[T]) -> T {
        T::c(self.track.half_width) - self.track.centerline_distance::<T, T>(x[0], x[1])
    }

    fn boundary_grad(&self, x: &[T], out: &mut [T]) {
        let px = Dual::<T, 2>::var(x[0], 0);
        let py = Dual::<T, 2>::var(x[1], 1);
        let d = self.track.centerline_distance::<T, Dual<T, 2>>(px, py);
        out.fill(T::zero());
        out[0] = -d.dv[0];
        out[1] = -d.dv[1];
    }

    fn affine_parts(&self, x: &[T], f0: &mut [T], g: &mut [T]) {
        let mut f0a = [T::zero(); 7];
        let mut ga = [T::zero(); 14];
        self.affine_parts_fixed(x, &mut f0a, &mut ga);
        f0.copy_from_slice(&f0a);
        g.copy_from_slice(&ga);
    }

    fn effective_bounds(&self, x: &[T], lo: &mut [T], hi: &mut [T]) {
        lo[0] = self.bounds.lo[0];
        hi[0] = self.bounds.hi[0];
        let (alo, ahi) = self.accel_limits(x[3]);
        lo[1] = num_traits::Float::max(self.bounds.lo[1], alo);
        hi[1] = num_traits::Float::min(self.bounds.hi[1], ahi);
    }
}

impl<T: Real> F1Tenth7D<T> {
    fn affine_parts_fixed(&self, x: &[T], f0: &mut [T; 7], g: &mut [T; 14]) {
        let p = &self.params;
        let (v, phi, theta, omega, beta) = (x[3], x[2], x[4], x[5], x[6]);
        f0.fill(T::zero());
        g.fill(T::zero());
        // steer-rate column is g[0..7], acceleration column is g[7..14]
        g[2] = T::one();
        g[7 + 3] = T::one();

        if self.is_kinematic_mode(v) {
            let wheelbase = p.lf + p.lr;
            let cos_phi = phi.cos();
            f0[0] = v * theta.cos();
            f0[1] = v * theta.sin();
            f0[4] = v * phi.tan() / wheelbase;
            g[5] = v / (wheelbase * cos_phi * cos_phi);
            g[7 + 5] = phi.tan() / wheelbase;
        } else {
            let tt = self.tire_terms();
            f0[0] = v * (theta + beta).cos();
            f0[1] = v * (theta + beta).sin();
            f0[4] = omega;

            let (csf, csr, lf, lr, h) = (p.csf, p.csr, p.lf, p.lr, tt.h_cg);
            // yaw acceleration: base part and per-unit-accel part
            f0[5] = tt.yaw_gain
                * (-(lf * lf * csf * tt.front_base + lr * lr * csr * tt.rear_base) / v * omega
                    + (lr * csr * tt.rear_base - lf * csf * tt.front_base) * beta
                    + lf * csf * tt.front_base * phi);
            g[7 + 5] = tt.yaw_gain
                * ((lf * lf * csf * h - lr * lr * csr * h) / v * omega
                    + (lr * csr * h + lf * csf * h) * beta
                    - lf * csf * h * phi);
            // slip-angle rate
            f0[6] = (tt.slip_gain / (v * v) * (csr * tt.rear_base * lr - csf * tt.front_base * lf)
                - T::one())
                * omega
                - tt.slip_gain / v * (csr * tt.rear_base + csf * tt.front_base) * beta
                + tt.slip_gain / v * csf * tt.front_base * phi;
            g[7 + 6] = tt.slip_gain / (v * v) * (csr * h * lr + csf * h * lf) * omega
                - tt.slip_gain / v * (csr * h - csf * h) * beta
                - tt.slip_gain / v * csf * h * phi;
        }
    }
}
