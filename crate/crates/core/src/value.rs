//! Shared interface for anything that behaves like a safety value
//! function: the grid oracle, the learned network, and test surrogates.

use crate::gridsolver::GridValueFn;
use crate::scalar::Real;

pub trait ValueFunction<T: Real>: Send + Sync {
    fn value(&self, x: &[T], t: f64) -> T;

    /// Spatial gradient at (x, t).
    fn grad_x(&self, x: &[T], t: f64, out: &mut [T]);
}

impl<T: Real> ValueFunction<T> for GridValueFn<T> {
    fn value(&self, x: &[T], t: f64) -> T {
        let mut xq: Vec<T> = x.to_vec();
        for (i, a) in self.axes.iter().enumerate() {
            xq[i] = num_traits::clamp(xq[i], T::c(a.lo), T::c(a.hi));
        }
        let t = t.clamp(0.0, self.horizon());
        self.interpolate(&xq, t).expect("clamped query")
    }

    fn grad_x(&self, x: &[T], t: f64, out: &mut [T]) {
        let mut xq: Vec<T> = x.to_vec();
        for (i, a) in self.axes.iter().enumerate() {
            xq[i] = num_traits::clamp(xq[i], T::c(a.lo), T::c(a.hi));
        }
        let t = t.clamp(0.0, self.horizon());
        self.gradient_at(&xq, t, out).expect("clamped query")
    }
}
