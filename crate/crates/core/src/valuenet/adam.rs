use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Adam moment buffers and hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub step: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct AdamHyper {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(param_count: usize, alpha: f64) -> Self {
        AdamState {
            m: vec![T::zero(); param_count],
            v: vec![T::zero(); param_count],
            step: 0,
            alpha,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update in place. A non-finite gradient is
/// rejected and leaves both parameters and state untouched.
pub fn adam_step<T: Real>(params: &mut [T], grad: &[T], st: &mut AdamState<T>) -> Result<()> {
    if grad.len() != params.len() || st.m.len() != params.len() {
        return Err(Error::Contract(format!(
            "adam: gradient length {} does not match parameter count {}",
            grad.len(),
            params.len()
        )));
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::numeric(
            "adam step",
            format!("non-finite gradient component at index {i}"),
        ));
    }
    st.step += 1;
    let b1 = T::c(st.beta1);
    let b2 = T::c(st.beta2);
    let one = T::one();
    let bc1 = T::c(1.0 - st.beta1.powi(st.step as i32));
    let bc2 = T::c(1.0 - st.beta2.powi(st.step as i32));
    let alpha = T::c(st.alpha);
    let eps = T::c(st.epsilon);
    for i in 0..params.len() {
        let g = grad[i];
        st.m[i] = b1 * st.m[i] + (one - b1) * g;
        st.v[i] = b2 * st.v[i] + (one - b2) * g * g;
        let mhat = st.m[i] / bc1;
        let vhat = st.v[i] / bc2;
        params[i] = params[i] - alpha * mhat / (vhat.sqrt() + eps);
    }
    Ok(())
}
