use super::{ControlBounds, StateBox, System};
use crate::dual::Dual;
use crate::scalar::{Real, Sc};

/// Agile quadrotor with quaternion attitude:
/// x = (p_x, p_y, p_z, q_w, q_x, q_y, q_z, v_x, v_y, v_z, w_x, w_y, w_z),
/// u = (F, a_x, a_y, a_z) — collective thrust and angular accelerations.
/// The obstacle is an infinite vertical cylinder of radius `r_o` at the
/// origin; the vehicle is a disk of radius `r_a`, and l(x) is the signed
/// distance between the tilted disk and the cylinder.
#[derive(Debug, Clone)]
pub struct Quadrotor13D<T> {
    /// Gravity along -z (m/s^2), applied to v̇_z.
    pub gz: T,
    /// Lifting coefficient.
    pub ct: T,
    /// Mass (kg).
    pub mass: T,
    pub disk_radius: T,
    pub obstacle_radius: T,
    bounds: ControlBounds<T>,
    boxx: StateBox<T>,
    horizon: T,
}

impl<T: Real> Quadrotor13D<T> {
    pub fn new() -> Self {
        let c = T::c;
        Quadrotor13D {
            gz: c(-9.8),
            ct: c(1.0),
            mass: c(1.0),
            disk_radius: c(0.17),
            obstacle_radius: c(0.5),
            bounds: ControlBounds::new(
                vec![c(-20.0), c(-8.0), c(-8.0), c(-4.0)],
                vec![c(20.0), c(8.0), c(8.0), c(4.0)],
            ),
            boxx: StateBox::new(
                [
                    [-3.0; 3].as_slice(),
                    [-1.0; 4].as_slice(),
                    [-5.0; 3].as_slice(),
                    [-5.0; 3].as_slice(),
                ]
                .concat()
                .iter()
                .map(|&v| c(v))
                .collect(),
                [
                    [3.0; 3].as_slice(),
                    [1.0; 4].as_slice(),
                    [5.0; 3].as_slice(),
                    [5.0; 3].as_slice(),
                ]
                .concat()
                .iter()
                .map(|&v| c(v))
                .collect(),
            ),
            horizon: c(1.0),
        }
    }

    /// Signed disk-to-cylinder distance. `nu = q * e3 * q̄` is the disk
    /// normal (scaled by |q|^2, which cancels in the ratio), and
    /// d_x + d_y is the squared radial extent of the disk's projection.
    fn l_expr<S: Sc<T>>(&self, x: &[S]) -> S {
        let (px, py) = (x[0], x[1]);
        let (qw, qx, qy, qz) = (x[3], x[4], x[5], x[6]);
        let two = S::kc(2.0);
        let nux = two * (qw * qy + qx * qz);
        let nuy = two * (qy * qz - qw * qx);
        let nuz = qw * qw - qx * qx - qy * qy + qz * qz;

        let denom = px * px * nux * nux
            + px * px * nuz * nuz
            + two * px * py * nux * nuy
            + py * py * nuy * nuy
            + py * py * nuz * nuz;
        let ra2 = S::k(self.disk_radius * self.disk_radius);
        let dxdy = if denom.val() > T::c(1e-12) {
            ra2 * nuz * nuz * (px * px + py * py) / denom
        } else {
            // degenerate: disk edge-on to the radial direction, or on axis
            S::kc(0.0)
        };
        let radial = (px * px + py * py).sqrt();
        (radial - dxdy.sqrt()).max(S::kc(0.0)) - S::k(self.obstacle_radius)
    }
}

impl<T: Real> Default for Quadrotor13D<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> System<T> for Quadrotor13D<T> {
    fn name(&self) -> &'static str {
        "quadrotor13d"
    }
    fn state_dim(&self) -> usize {
        13
    }
    fn control_dim(&self) -> usize {
        4
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
        let half = T::c(0.5);
        let (qw, qx, qy, qz) = (x[3], x[4], x[5], x[6]);
        let (vx, vy, vz) = (x[7], x[8], x[9]);
        let (wx, wy, wz) = (x[10], x[11], x[12]);
        let (force, ax, ay, az) = (u[0], u[1], u[2], u[3]);
        let two = T::c(2.0);
        let gyro = T::c(5.0 / 9.0);
        let fm = self.ct * force / self.mass;

        out[0] = vx;
        out[1] = vy;
        out[2] = vz;
        out[3] = -(wx * qx + wy * qy + wz * qz) * half;
        out[4] = (wx * qw + wz * qy - wy * qz) * half;
        out[5] = (wy * qw - wz * qx + wx * qz) * half;
        out[6] = (wz * qw + wy * qx - wx * qy) * half;
        out[7] = (two * qw * qy + two * qx * qz) * fm;
        out[8] = (-two * qw * qx + two * qy * qz) * fm;
        out[9] = self.gz - (two * qx * qx + two * qy * qy - T::one()) * fm;
        out[10] = ax - gyro * wy * wz;
        out[11] = ay + gyro * wx * wz;
        out[12] = az;
    }

    fn boundary(&self, x: &[T]) -> T {
        self.l_expr(x)
    }

    fn boundary_grad(&self, x: &[T], out: &mut [T]) {
        let mut xd = [Dual::<T, 13>::constant(T::zero()); 13];
        for i in 0..13 {
            xd[i] = Dual::var(x[i], i);
        }
        let l = self.l_expr(&xd);
        out.copy_from_slice(&l.dv);
    }

    fn affine_parts(&self, x: &[T], f0: &mut [T], g: &mut [T]) {
        let zero = vec![T::zero(); 4];
        self.dynamics(x, &zero, f0);
        g.fill(T::zero());
        let (qw, qx, qy, qz) = (x[3], x[4], x[5], x[6]);
        let two = T::c(2.0);
        let cm = self.ct / self.mass;
        // thrust column
        g[7] = (two * qw * qy + two * qx * qz) * cm;
        g[8] = (-two * qw * qx + two * qy * qz) * cm;
        g[9] = -(two * qx * qx + two * qy * qy - T::one()) * cm;
        // angular acceleration columns
        g[13 + 10] = T::one();
        g[2 * 13 + 11] = T::one();
        g[3 * 13 + 12] = T::one();
    }

    fn project_state(&self, x: &mut [T]) {
        let norm = (x[3] * x[3] + x[4] * x[4] + x[5] * x[5] + x[6] * x[6]).sqrt();
        if norm > T::c(1e-9) {
            for q in &mut x[3..7] {
                *q = *q / norm;
            }
        }
    }
}
