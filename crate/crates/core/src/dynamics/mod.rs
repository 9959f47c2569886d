//! System interface and the benchmark systems: parameterized vertical
//! drone, 13D quadrotor, 7D single-track car, and the 40D
//! publisher-subscriber network, plus the analytic Hamiltonian
//! machinery used by the solver, the MPC generator, and the
//! training/verification stack.

mod drone;
mod f1tenth;
mod linear1d;
mod pubsub;
mod quadrotor;
pub mod track;

pub use drone::VerticalDrone;
pub use f1tenth::F1Tenth7D;
pub use linear1d::Translation1D;
pub use pubsub::PubSub40;
pub use quadrotor::Quadrotor13D;
pub use track::Track;

use crate::error::{Error, Result};
use crate::scalar::Real;
use rand::Rng;
use std::sync::Arc;

/// Axis-aligned control box.
#[derive(Debug, Clone)]
pub struct ControlBounds<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> ControlBounds<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        ControlBounds { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn clamp(&self, u: &mut [T]) {
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = num_traits::clamp(*ui, self.lo[i], self.hi[i]);
        }
    }

    pub fn midpoint(&self) -> Vec<T> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| (l + h) * T::c(0.5))
            .collect()
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R, out: &mut [T]) {
        for i in 0..self.dim() {
            out[i] = if self.lo[i] == self.hi[i] {
                self.lo[i]
            } else {
                rng.random_range(self.lo[i]..=self.hi[i])
            };
        }
    }
}

/// State-space box of interest.
#[derive(Debug, Clone)]
pub struct StateBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> StateBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Self {
        assert_eq!(lo.len(), hi.len());
        assert!(lo.iter().zip(&hi).all(|(l, h)| l <= h));
        StateBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.iter()
            .enumerate()
            .all(|(i, &xi)| xi >= self.lo[i] && xi <= self.hi[i])
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R, out: &mut [T]) {
        for i in 0..self.dim() {
            out[i] = if self.lo[i] == self.hi[i] {
                self.lo[i]
            } else {
                rng.random_range(self.lo[i]..=self.hi[i])
            };
        }
    }

    pub fn clamp(&self, x: &mut [T]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = num_traits::clamp(*xi, self.lo[i], self.hi[i]);
        }
    }
}

/// A control system with a safety boundary function. Implementations
/// are immutable after construction and shareable across threads.
pub trait System<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn control_bounds(&self) -> &ControlBounds<T>;
    fn state_box(&self) -> &StateBox<T>;
    /// Problem horizon in seconds.
    fn time_horizon(&self) -> T;

    /// Continuous dynamics: writes dx/dt into `out`. Implementations may
    /// saturate controls internally (velocity-dependent caps and the
    /// like); callers are expected to have clamped `u` to the box.
    fn dynamics(&self, x: &[T], u: &[T], out: &mut [T]);

    /// Safety boundary function l(x); l <= 0 is the failure set.
    fn boundary(&self, x: &[T]) -> T;

    /// Exact gradient of `boundary` (fixed one-sided subgradients at
    /// kinks; see the per-system notes).
    fn boundary_grad(&self, x: &[T], out: &mut [T]);

    fn is_control_affine(&self) -> bool {
        true
    }

    /// Control-affine decomposition f(x,u) = f0(x) + G(x)·u_eff, with G
    /// column-major (`g[col * n + row]`). `u_eff` ranges over
    /// [`System::effective_bounds`].
    fn affine_parts(&self, x: &[T], f0: &mut [T], g: &mut [T]);

    /// Control box available at `x` after state-dependent saturation.
    /// Defaults to the global box.
    fn effective_bounds(&self, _x: &[T], lo: &mut [T], hi: &mut [T]) {
        lo.copy_from_slice(&self.control_bounds().lo);
        hi.copy_from_slice(&self.control_bounds().hi);
    }

    /// Post-integration projection hook (quaternion renormalization).
    fn project_state(&self, _x: &mut [T]) {}
}

/// Continuous dynamics with contract checks: returns dx/dt.
pub fn flow<T: Real>(system: &dyn System<T>, x: &[T], u: &[T]) -> Result<Vec<T>> {
    let n = system.state_dim();
    if x.len() != n || u.len() != system.control_dim() {
        return Err(Error::Contract(format!(
            "{}: expected state dim {} and control dim {}, got {} and {}",
            system.name(),
            n,
            system.control_dim(),
            x.len(),
            u.len()
        )));
    }
    let mut out = vec![T::zero(); n];
    system.dynamics(x, u, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            format!("{} dynamics", system.name()),
            format!("non-finite derivative at state {:?}", dump(x)),
        ));
    }
    Ok(out)
}

/// One explicit Euler step `x + f(x,u)·dt`, followed by the system's
/// state projection.
pub fn step_euler<T: Real>(system: &dyn System<T>, x: &[T], u: &[T], dt: T) -> Result<Vec<T>> {
    if dt <= T::zero() {
        return Err(Error::Contract(format!(
            "step_euler requires dt > 0, got {dt}"
        )));
    }
    let f = flow(system, x, u)?;
    let mut next: Vec<T> = x.iter().zip(&f).map(|(&xi, &fi)| xi + fi * dt).collect();
    system.project_state(&mut next);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            format!("{} step", system.name()),
            format!("non-finite state after step from {:?}", dump(x)),
        ));
    }
    Ok(next)
}

/// Evaluate l(x).
pub fn boundary_l<T: Real>(system: &dyn System<T>, x: &[T]) -> T {
    system.boundary(x)
}

/// Reusable buffers for the Hamiltonian computations.
#[derive(Debug, Clone)]
pub struct AffineScratch<T> {
    pub f0: Vec<T>,
    pub g: Vec<T>,
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> AffineScratch<T> {
    pub fn for_system(system: &dyn System<T>) -> Self {
        let n = system.state_dim();
        let nu = system.control_dim();
        AffineScratch {
            f0: vec![T::zero(); n],
            g: vec![T::zero(); n * nu],
            lo: vec![T::zero(); nu],
            hi: vec![T::zero(); nu],
        }
    }
}

fn require_affine<T: Real>(system: &dyn System<T>) -> Result<()> {
    if !system.is_control_affine() {
        return Err(Error::Unsupported(format!(
            "{} is not control-affine; use sampled_hamiltonian_control instead",
            system.name()
        )));
    }
    Ok(())
}

/// Maximizer of <grad_v, f(x,u)> over the control box: bang-bang on the
/// sign of G(x)^T grad_v, midpoint of the interval on exact ties.
pub fn hamiltonian_control_into<T: Real>(
    system: &dyn System<T>,
    x: &[T],
    grad_v: &[T],
    scratch: &mut AffineScratch<T>,
    u_out: &mut [T],
) -> Result<()> {
    require_affine(system)?;
    let n = system.state_dim();
    let nu = system.control_dim();
    system.affine_parts(x, &mut scratch.f0, &mut scratch.g);
    system.effective_bounds(x, &mut scratch.lo, &mut scratch.hi);
    for j in 0..nu {
        let col = &scratch.g[j * n..(j + 1) * n];
        let mut c = T::zero();
        for i in 0..n {
            c += grad_v[i] * col[i];
        }
        u_out[j] = if c > T::zero() {
            scratch.hi[j]
        } else if c < T::zero() {
            scratch.lo[j]
        } else {
            (scratch.lo[j] + scratch.hi[j]) * T::c(0.5)
        };
    }
    Ok(())
}

/// Allocating wrapper around [`hamiltonian_control_into`].
pub fn hamiltonian_control<T: Real>(
    system: &dyn System<T>,
    x: &[T],
    grad_v: &[T],
) -> Result<Vec<T>> {
    let mut scratch = AffineScratch::for_system(system);
    let mut u = vec![T::zero(); system.control_dim()];
    hamiltonian_control_into(system, x, grad_v, &mut scratch, &mut u)?;
    Ok(u)
}

/// H(x) = max_u <grad_v, f(x,u)> together with its maximizer.
pub fn hamiltonian_into<T: Real>(
    system: &dyn System<T>,
    x: &[T],
    grad_v: &[T],
    scratch: &mut AffineScratch<T>,
    u_out: &mut [T],
) -> Result<T> {
    hamiltonian_control_into(system, x, grad_v, scratch, u_out)?;
    let n = system.state_dim();
    let mut h = T::zero();
    for i in 0..n {
        let mut fi = scratch.f0[i];
        for j in 0..system.control_dim() {
            fi += scratch.g[j * n + i] * u_out[j];
        }
        h += grad_v[i] * fi;
    }
    Ok(h)
}

/// Allocating wrapper around [`hamiltonian_into`].
pub fn hamiltonian<T: Real>(system: &dyn System<T>, x: &[T], grad_v: &[T]) -> Result<T> {
    let mut scratch = AffineScratch::for_system(system);
    let mut u = vec![T::zero(); system.control_dim()];
    hamiltonian_into(system, x, grad_v, &mut scratch, &mut u)
}

/// Fallback maximizer for systems without an affine decomposition:
/// best of `n_samples` uniformly sampled controls (plus the box
/// midpoint).
pub fn sampled_hamiltonian_control<T: Real, R: Rng>(
    system: &dyn System<T>,
    x: &[T],
    grad_v: &[T],
    n_samples: usize,
    rng: &mut R,
) -> Vec<T> {
    let bounds = system.control_bounds();
    let mut best_u = bounds.midpoint();
    let mut fx = vec![T::zero(); system.state_dim()];
    system.dynamics(x, &best_u, &mut fx);
    let mut best = dot(grad_v, &fx);
    let mut u = best_u.clone();
    for _ in 0..n_samples {
        bounds.sample_uniform(rng, &mut u);
        system.dynamics(x, &u, &mut fx);
        let s = dot(grad_v, &fx);
        if s > best {
            best = s;
            best_u.copy_from_slice(&u);
        }
    }
    best_u
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn dump<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.f64()).collect()
}

/// An Euler-integrated trajectory: `states.len() == controls.len() + 1`.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub t0: T,
    pub dt: T,
    pub states: Vec<Vec<T>>,
    pub controls: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

/// Look up a benchmark system by name. The F1Tenth car uses the
/// built-in oval track unless one is supplied.
pub fn by_name<T: Real>(name: &str, track: Option<Track>) -> Result<Arc<dyn System<T>>> {
    match name {
        "vertical_drone" => Ok(Arc::new(VerticalDrone::<T>::new())),
        "quadrotor13d" => Ok(Arc::new(Quadrotor13D::<T>::new())),
        "f1tenth7d" => {
            let track = match track {
                Some(t) => t,
                None => Track::default_oval(),
            };
            Ok(Arc::new(F1Tenth7D::<T>::new(track)?))
        }
        "pubsub40d" => Ok(Arc::new(PubSub40::<T>::new())),
        other => Err(Error::config(format!(
            "unknown system '{other}'; expected one of \
             vertical_drone | quadrotor13d | f1tenth7d | pubsub40d"
        ))),
    }
}

/// All registered benchmark system names.
pub const SYSTEM_NAMES: [&str; 4] = ["vertical_drone", "quadrotor13d", "f1tenth7d", "pubsub40d"];

#[cfg(test)]
mod tests;
