use super::{ControlBounds, StateBox, System};
use crate::scalar::{Real, Sc};

/// Longitudinal drone with a control-gain parameter carried as a third
/// state: x = (z, v_z, K), dynamics ż = v_z, v̇_z = K·u − g, K̇ = 0.
/// Failure is hitting the ground or the ceiling (|z − 1.5| >= 1.5), so
/// l(x) = 1.5 − |z − 1.5|, the signed distance in height.
#[derive(Debug, Clone)]
pub struct VerticalDrone<T> {
    pub gravity: T,
    bounds: ControlBounds<T>,
    boxx: StateBox<T>,
    horizon: T,
}

impl<T: Real> VerticalDrone<T> {
    pub fn new() -> Self {
        VerticalDrone {
            gravity: T::c(9.8),
            bounds: ControlBounds::new(vec![T::c(-1.0)], vec![T::c(1.0)]),
            boxx: StateBox::new(
                vec![T::c(-0.5), T::c(-4.0), T::c(0.0)],
                vec![T::c(3.5), T::c(4.0), T::c(12.0)],
            ),
            horizon: T::c(1.2),
        }
    }

    fn l_expr<S: Sc<T>>(x: &[S]) -> S {
        S::kc(1.5) - (x[0] - S::kc(1.5)).abs()
    }
}

impl<T: Real> Default for VerticalDrone<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> System<T> for VerticalDrone<T> {
    fn name(&self) -> &'static str {
        "vertical_drone"
    }
    fn state_dim(&self) -> usize {
        3
    }
    fn control_dim(&self) -> usize {
        1
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
        out[0] = x[1];
        out[1] = x[2] * u[0] - self.gravity;
        out[2] = T::zero();
    }

    fn boundary(&self, x: &[T]) -> T {
        Self::l_expr(x)
    }

    fn boundary_grad(&self, x: &[T], out: &mut [T]) {
        // d/dz [1.5 - |z - 1.5|]; subgradient +? at the kink follows abs()
        out[0] = if x[0] >= T::c(1.5) { -T::one() } else { T::one() };
        out[1] = T::zero();
        out[2] = T::zero();
    }

    fn affine_parts(&self, x: &[T], f0: &mut [T], g: &mut [T]) {
        f0[0] = x[1];
        f0[1] = -self.gravity;
        f0[2] = T::zero();
        g[0] = T::zero();
        g[1] = x[2];
        g[2] = T::zero();
    }
}
