//! Dense-grid Lax-Friedrichs solver for the safety variational
//! inequality
//!   min{ dV/dt + H(x, ∇V), l(x) − V } = 0,  V(x,T) = l(x),
//! integrated backward in time. Practical up to 4 state dimensions; it
//! is the ground-truth oracle the learned value functions are measured
//! against.

mod file;

pub use file::{load_value_fn, save_value_fn};

use crate::dynamics::{hamiltonian_into, AffineScratch, System};
use crate::error::{Error, Result};
use crate::scalar::Real;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.count as f64 - 1.0)
    }
}

/// Rectangular solver grid. `dt = None` picks half the CFL bound.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<GridAxis>,
    pub dt: Option<f64>,
    /// Times (ascending, within [0, T]) at which snapshots are stored;
    /// 0 and T are always added.
    pub snapshot_times: Vec<f64>,
}

impl Grid {
    pub fn new(axes: Vec<GridAxis>) -> Self {
        Grid {
            axes,
            dt: None,
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn validate<T: Real>(&self, system: &dyn System<T>) -> Result<()> {
        if self.axes.len() != system.state_dim() {
            return Err(Error::config(format!(
                "grid has {} axes but {} has {} states",
                self.axes.len(),
                system.name(),
                system.state_dim()
            )));
        }
        if system.state_dim() > 4 {
            return Err(Error::config(
                "grid solver is limited to systems with at most 4 state dimensions",
            ));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if a.count < 3 {
                return Err(Error::config(format!("axis {i}: count must be >= 3")));
            }
            if !(a.lo < a.hi) {
                return Err(Error::config(format!("axis {i}: lo must be < hi")));
            }
            let (blo, bhi) = (
                system.state_box().lo[i].f64(),
                system.state_box().hi[i].f64(),
            );
            if a.lo < blo - 1e-9 || a.hi > bhi + 1e-9 {
                return Err(Error::config(format!(
                    "axis {i} [{}, {}] exceeds the {} state box [{blo}, {bhi}]",
                    a.lo,
                    a.hi,
                    system.name()
                )));
            }
        }
        Ok(())
    }

    fn strides(&self) -> Vec<usize> {
        let d = self.axes.len();
        let mut s = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.axes[i + 1].count;
        }
        s
    }

    fn coords<T: Real>(&self, mut idx: usize, strides: &[usize], out: &mut [T]) {
        for (i, a) in self.axes.iter().enumerate() {
            let k = idx / strides[i];
            idx %= strides[i];
            out[i] = T::c(a.lo) + T::c(a.step()) * T::c(k as f64);
        }
    }
}

/// Value function stored as dense snapshots over a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridValueFn<T> {
    pub system_name: String,
    pub axes: Vec<GridAxis>,
    /// Ascending snapshot times; always contains 0 and T.
    pub times: Vec<f64>,
    /// One dense row-major array per snapshot time.
    pub values: Vec<Vec<T>>,
}

/// Solve the variational inequality backward from T to 0.
pub fn solve_vi<T: Real>(system: &dyn System<T>, grid: &Grid) -> Result<GridValueFn<T>> {
    grid.validate(system)?;
    let horizon = system.time_horizon().f64();
    let strides = grid.strides();
    let n_nodes = grid.node_count();
    let dim = grid.axes.len();

    // boundary values and per-axis dissipation bounds
    let l_values: Vec<T> = (0..n_nodes)
        .into_par_iter()
        .map(|idx| {
            let mut x = vec![T::zero(); dim];
            grid.coords(idx, &strides, &mut x);
            system.boundary(&x)
        })
        .collect();
    let alphas = dissipation_bounds(system, grid, &strides);

    // CFL bound: dt * sum_i alpha_i / dx_i <= 1
    let inv_sum: f64 = alphas
        .iter()
        .zip(&grid.axes)
        .map(|(&a, ax)| a / ax.step())
        .sum();
    let dt_max = if inv_sum > 0.0 { 1.0 / inv_sum } else { horizon };
    let dt = match grid.dt {
        Some(dt) => {
            if dt > dt_max {
                return Err(Error::config(format!(
                    "dt {dt} violates the CFL bound; maximum admissible dt is {dt_max}"
                )));
            }
            dt
        }
        None => 0.5 * dt_max,
    };

    let mut targets: Vec<f64> = grid
        .snapshot_times
        .iter()
        .copied()
        .chain([0.0, horizon])
        .filter(|t| (0.0..=horizon + 1e-12).contains(t))
        .collect();
    targets.sort_by(|a, b| b.partial_cmp(a).unwrap());
    targets.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut snapshots: Vec<(f64, Vec<T>)> = Vec::with_capacity(targets.len());
    let mut v = l_values.clone();
    let mut t = horizon;
    if (targets[0] - horizon).abs() < 1e-9 {
        snapshots.push((horizon, v.clone()));
        targets.remove(0);
    }

    let alphas_t: Vec<T> = alphas.iter().map(|&a| T::c(a)).collect();
    let mut step_index = 0usize;
    for target in targets {
        while t > target + 1e-12 {
            let h = (t - target).min(dt);
            v = lf_step(system, grid, &strides, &alphas_t, &l_values, &v, T::c(h))?;
            t -= h;
            step_index += 1;
            if let Some(bad) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::numeric(
                    "grid solve",
                    format!("non-finite value at node {bad} after step {step_index}"),
                ));
            }
        }
        snapshots.push((target, v.clone()));
    }

    snapshots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(GridValueFn {
        system_name: system.name().to_string(),
        axes: grid.axes.clone(),
        times: snapshots.iter().map(|s| s.0).collect(),
        values: snapshots.into_iter().map(|s| s.1).collect(),
    })
}

/// Global per-axis bounds max |f_i(x, u)| over grid nodes and control
/// box corners.
fn dissipation_bounds<T: Real>(system: &dyn System<T>, grid: &Grid, strides: &[usize]) -> Vec<f64> {
    let dim = grid.axes.len();
    let nu = system.control_dim();
    let corners: Vec<Vec<T>> = if nu == 0 {
        vec![vec![]]
    } else {
        (0..1usize << nu)
            .map(|mask| {
                (0..nu)
                    .map(|j| {
                        if mask >> j & 1 == 1 {
                            system.control_bounds().hi[j]
                        } else {
                            system.control_bounds().lo[j]
                        }
                    })
                    .collect()
            })
            .collect()
    };
    (0..grid.node_count())
        .into_par_iter()
        .fold(
            || vec![0.0f64; dim],
            |mut acc, idx| {
                let mut x = vec![T::zero(); dim];
                let mut fx = vec![T::zero(); dim];
                grid.coords(idx, strides, &mut x);
                for u in &corners {
                    system.dynamics(&x, u, &mut fx);
                    for i in 0..dim {
                        acc[i] = acc[i].max(fx[i].f64().abs());
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; dim],
            |mut a, b| {
                for i in 0..dim {
                    a[i] = a[i].max(b[i]);
                }
                a
            },
        )
}

/// One backward Euler step of V <- min(l, V + h*Ĥ_LF(V)).
fn lf_step<T: Real>(
    system: &dyn System<T>,
    grid: &Grid,
    strides: &[usize],
    alphas: &[T],
    l_values: &[T],
    v: &[T],
    h: T,
) -> Result<Vec<T>> {
    let dim = grid.axes.len();
    let steps: Vec<T> = grid.axes.iter().map(|a| T::c(a.step())).collect();
    let counts: Vec<usize> = grid.axes.iter().map(|a| a.count).collect();

    let out: Vec<T> = (0..v.len())
        .into_par_iter()
        .chunks(4096)
        .flat_map_iter(|chunk| {
            let mut x = vec![T::zero(); dim];
            let mut grad = vec![T::zero(); dim];
            let mut u = vec![T::zero(); system.control_dim()];
            let mut scratch = AffineScratch::for_system(system);
            let mut res = Vec::with_capacity(chunk.len());
            for idx in chunk {
                grid.coords(idx, strides, &mut x);
                let mut dissip = T::zero();
                for i in 0..dim {
                    let k = idx / strides[i] % counts[i];
                    // one-sided differences at the box edges
                    let dp = if k + 1 < counts[i] {
                        (v[idx + strides[i]] - v[idx]) / steps[i]
                    } else {
                        (v[idx] - v[idx - strides[i]]) / steps[i]
                    };
                    let dm = if k > 0 {
                        (v[idx] - v[idx - strides[i]]) / steps[i]
                    } else {
                        dp
                    };
                    grad[i] = (dm + dp) * T::c(0.5);
                    dissip += alphas[i] * (dp - dm) * T::c(0.5);
                }
                let ham = hamiltonian_into(system, &x, &grad, &mut scratch, &mut u)
                    .expect("affine system");
                // backward-time form: upwinding needs +alpha*(dp - dm)/2
                let mut cand = v[idx] + h * (ham + dissip);
                // the solution is non-increasing backward in time; the
                // one-sided edge stencils are not monotone at outflow
                // edges, so clamp away any spurious increase
                if cand > v[idx] {
                    cand = v[idx];
                }
                res.push(if l_values[idx] < cand {
                    l_values[idx]
                } else {
                    cand
                });
            }
            res
        })
        .collect();
    Ok(out)
}

impl<T: Real> GridValueFn<T> {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn locate_time(&self, t: f64) -> Result<(usize, usize, f64)> {
        if t < -1e-9 || t > self.horizon() + 1e-9 {
            return Err(Error::OutOfDomain(format!(
                "t = {t} outside stored range [0, {}]",
                self.horizon()
            )));
        }
        let t = t.clamp(0.0, self.horizon());
        let hi = self
            .times
            .iter()
            .position(|&s| s >= t - 1e-12)
            .unwrap_or(self.times.len() - 1);
        if hi == 0 {
            return Ok((0, 0, 0.0));
        }
        let lo = hi - 1;
        let w = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        Ok((lo, hi, w))
    }

    /// Multilinear interpolation in space, linear in time.
    pub fn interpolate(&self, x: &[T], t: f64) -> Result<T> {
        let (lo, hi, w) = self.locate_time(t)?;
        let a = self.interpolate_snapshot(x, lo)?;
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.interpolate_snapshot(x, hi)?;
        Ok(a + (b - a) * T::c(w))
    }

    fn interpolate_snapshot(&self, x: &[T], snap: usize) -> Result<T> {
        let dim = self.axes.len();
        assert_eq!(x.len(), dim);
        let mut base = vec![0usize; dim];
        let mut frac = vec![T::zero(); dim];
        for (i, a) in self.axes.iter().enumerate() {
            let xi = x[i].f64();
            if xi < a.lo - 1e-9 || xi > a.hi + 1e-9 {
                return Err(Error::OutOfDomain(format!(
                    "x[{i}] = {xi} outside grid axis [{}, {}]",
                    a.lo, a.hi
                )));
            }
            let mut u = ((xi - a.lo) / a.step()).clamp(0.0, (a.count - 1) as f64);
            // snap to the node so grid-point queries return stored values
            if (u - u.round()).abs() < 1e-9 {
                u = u.round();
            }
            let k = (u.floor() as usize).min(a.count - 2);
            base[i] = k;
            frac[i] = T::c(u - k as f64);
        }
        let strides = {
            let mut s = vec![1usize; dim];
            for i in (0..dim.saturating_sub(1)).rev() {
                s[i] = s[i + 1] * self.axes[i + 1].count;
            }
            s
        };
        let vals = &self.values[snap];
        let mut acc = T::zero();
        for corner in 0..1usize << dim {
            let mut idx = 0usize;
            let mut weight = T::one();
            for i in 0..dim {
                if corner >> i & 1 == 1 {
                    idx += (base[i] + 1) * strides[i];
                    weight = weight * frac[i];
                } else {
                    idx += base[i] * strides[i];
                    weight = weight * (T::one() - frac[i]);
                }
            }
            acc += weight * vals[idx];
        }
        Ok(acc)
    }

    /// Spatial gradient of the interpolant by central differences with
    /// the grid spacing, one-sided at domain edges.
    pub fn gradient_at(&self, x: &[T], t: f64, out: &mut [T]) -> Result<()> {
        for (i, a) in self.axes.iter().enumerate() {
            let h = a.step();
            let xi = x[i].f64();
            let up = (xi + h).min(a.hi);
            let dn = (xi - h).max(a.lo);
            let mut xq: Vec<T> = x.to_vec();
            xq[i] = T::c(up);
            let vu = self.interpolate(&xq, t)?;
            xq[i] = T::c(dn);
            let vd = self.interpolate(&xq, t)?;
            out[i] = (vu - vd) / T::c(up - dn);
        }
        Ok(())
    }

    /// Fraction of the grid with V(x, t) <= 0, trapezoidal weights at
    /// the box edges.
    pub fn brt_volume(&self, t: f64) -> Result<f64> {
        let (lo, hi, w) = self.locate_time(t)?;
        let dim = self.axes.len();
        let strides = {
            let mut s = vec![1usize; dim];
            for i in (0..dim.saturating_sub(1)).rev() {
                s[i] = s[i + 1] * self.axes[i + 1].count;
            }
            s
        };
        let mut inside = 0.0f64;
        let mut total = 0.0f64;
        for idx in 0..self.values[lo].len() {
            let mut weight = 1.0f64;
            for i in 0..dim {
                let k = idx / strides[i] % self.axes[i].count;
                if k == 0 || k + 1 == self.axes[i].count {
                    weight *= 0.5;
                }
            }
            let v = if w == 0.0 {
                self.values[lo][idx].f64()
            } else {
                let a = self.values[lo][idx].f64();
                let b = self.values[hi][idx].f64();
                a + (b - a) * w
            };
            total += weight;
            if v <= 0.0 {
                inside += weight;
            }
        }
        Ok(inside / total)
    }

    /// Complement of [`GridValueFn::brt_volume`].
    pub fn safe_volume(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.brt_volume(t)?)
    }
}

/// Evenly spaced snapshot times including both endpoints.
pub fn default_snapshot_times(horizon: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|i| horizon * i as f64 / (count as f64 - 1.0))
        .collect()
}

#[cfg(test)]
mod tests;
