use super::{ControlBounds, StateBox, System};
use crate::scalar::Real;

/// Uncontrolled unit-speed leftward translation, ẋ = −1 with l(x) = x.
/// Its value function is known in closed form,
/// V(x, t) = x − (T − t), which makes it the analytic fixture for the
/// grid solver.
#[derive(Debug, Clone)]
pub struct Translation1D<T> {
    bounds: ControlBounds<T>,
    boxx: StateBox<T>,
    horizon: T,
}

impl<T: Real> Translation1D<T> {
    pub fn new() -> Self {
        Translation1D {
            bounds: ControlBounds::new(vec![], vec![]),
            boxx: StateBox::new(vec![T::c(-1.0)], vec![T::c(2.0)]),
            horizon: T::one(),
        }
    }
}

impl<T: Real> Default for Translation1D<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> System<T> for Translation1D<T> {
    fn name(&self) -> &'static str {
        "translation1d"
    }
    fn state_dim(&self) -> usize {
        1
    }
    fn control_dim(&self) -> usize {
        0
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

    fn dynamics(&self, _x: &[T], _u: &[T], out: &mut [T]) {
        out[0] = -T::one();
    }

    fn boundary(&self, x: &[T]) -> T {
        x[0]
    }

    fn boundary_grad(&self, _x: &[T], out: &mut [T]) {
        out[0] = T::one();
    }

    fn affine_parts(&self, _x: &[T], f0: &mut [T], _g: &mut [T]) {
        f0[0] = -T::one();
    }
}
