use super::{ControlBounds, StateBox, System};
use crate::scalar::Real;

/// 40-state publisher-subscriber network: one publisher state x_0 feeds
/// 39 actuated subscriber states,
///   ẋ_0 = a·x_0 + alpha·sin(x_0)·x_0²,
///   ẋ_i = −x_0 + a·x_i + b·u_i − beta·x_0·x_i²,
/// with l(x) = min_i ½(x_0² + x_i² − 0.5).
#[derive(Debug, Clone)]
pub struct PubSub40<T> {
    pub a: T,
    pub b: T,
    pub alpha: T,
    pub beta: T,
    bounds: ControlBounds<T>,
    boxx: StateBox<T>,
    horizon: T,
}

pub const PUBSUB_DIM: usize = 40;

impl<T: Real> PubSub40<T> {
    pub fn new() -> Self {
        let c = T::c;
        PubSub40 {
            a: c(-0.1),
            b: c(1.0),
            alpha: c(20.0),
            beta: c(0.0),
            bounds: ControlBounds::new(
                vec![c(-1.0); PUBSUB_DIM - 1],
                vec![c(1.0); PUBSUB_DIM - 1],
            ),
            boxx: StateBox::new(vec![c(-1.0); PUBSUB_DIM], vec![c(1.0); PUBSUB_DIM]),
            horizon: c(1.0),
        }
    }
}

impl<T: Real> Default for PubSub40<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> System<T> for PubSub40<T> {
    fn name(&self) -> &'static str {
        "pubsub40d"
    }
    fn state_dim(&self) -> usize {
        PUBSUB_DIM
    }
    fn control_dim(&self) -> usize {
        PUBSUB_DIM - 1
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
        let x0 = x[0];
        out[0] = self.a * x0 + self.alpha * x0.sin() * x0 * x0;
        for i in 1..PUBSUB_DIM {
            out[i] = -x0 + self.a * x[i] + self.b * u[i - 1] - self.beta * x0 * x[i] * x[i];
        }
    }

    fn boundary(&self, x: &[T]) -> T {
        let half = T::c(0.5);
        let x0sq = x[0] * x[0];
        let mut l = T::infinity();
        for i in 1..PUBSUB_DIM {
            let li = half * (x0sq + x[i] * x[i] - half);
            if li < l {
                l = li;
            }
        }
        l
    }

    fn boundary_grad(&self, x: &[T], out: &mut [T]) {
        // active term: the first subscriber attaining the min
        let mut best = 1;
        for i in 2..PUBSUB_DIM {
            if x[i] * x[i] < x[best] * x[best] {
                best = i;
            }
        }
        out.fill(T::zero());
        out[0] = x[0];
        out[best] = x[best];
    }

    fn affine_parts(&self, x: &[T], f0: &mut [T], g: &mut [T]) {
        let zero = vec![T::zero(); PUBSUB_DIM - 1];
        self.dynamics(x, &zero, f0);
        g.fill(T::zero());
        for j in 0..PUBSUB_DIM - 1 {
            g[j * PUBSUB_DIM + (j + 1)] = self.b;
        }
    }
}
