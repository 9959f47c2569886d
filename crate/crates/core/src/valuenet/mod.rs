//! Sinusoidal value network V(x,t) = l(x) + (T−t)·O(x,t) with exact
//! input derivatives (forward-mode tangents through the sine layers)
//! and exact parameter gradients of losses that consume those input
//! derivatives (reverse accumulation over the tangent-augmented
//! forward pass).

mod adam;
mod checkpoint;
mod loss;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{checkpoint_load, checkpoint_save};
pub use loss::{data_loss_grad, pde_loss_grad, DataSample, LossKind, PdeBatch};

use crate::dynamics::System;
use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use crate::scalar::Real;
use crate::value::ValueFunction;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetConfig {
    /// Number of sine layers.
    pub layers: usize,
    /// Units per sine layer.
    pub width: usize,
    /// Input dimension n + 1 (state plus time).
    pub in_dim: usize,
    /// Sine frequency scale.
    pub omega0: f64,
    pub init_seed: u64,
}

impl NetConfig {
    pub fn for_system<T: Real>(system: &dyn System<T>, width: usize, init_seed: u64) -> Self {
        NetConfig {
            layers: 3,
            width,
            in_dim: system.state_dim() + 1,
            omega0: 30.0,
            init_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers < 1 || self.width < 1 || self.in_dim < 2 {
            return Err(Error::config(
                "network needs layers >= 1, width >= 1, in_dim >= 2",
            ));
        }
        Ok(())
    }

    /// Total parameter count.
    pub fn param_count(&self) -> usize {
        let w = self.width;
        w * self.in_dim + w + (self.layers - 1) * (w * w + w) + w + 1
    }
}

/// Offsets of one affine layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LayerSpec {
    pub w_off: usize,
    pub rows: usize,
    pub cols: usize,
    pub b_off: usize,
}

pub(crate) fn layout(cfg: &NetConfig) -> Vec<LayerSpec> {
    let mut specs = Vec::with_capacity(cfg.layers + 1);
    let mut off = 0;
    let mut cols = cfg.in_dim;
    for _ in 0..cfg.layers {
        specs.push(LayerSpec {
            w_off: off,
            rows: cfg.width,
            cols,
            b_off: off + cfg.width * cols,
        });
        off += cfg.width * cols + cfg.width;
        cols = cfg.width;
    }
    specs.push(LayerSpec {
        w_off: off,
        rows: 1,
        cols: cfg.width,
        b_off: off + cfg.width,
    });
    specs
}

/// The learned safety value function for one system.
pub struct ValueNet<T: Real> {
    pub config: NetConfig,
    pub params: Vec<T>,
    pub system: Arc<dyn System<T>>,
    /// Per-input affine map onto [-1, 1]: the state box then [0, T].
    pub scale_lo: Vec<f64>,
    pub scale_hi: Vec<f64>,
}

impl<T: Real> Clone for ValueNet<T> {
    fn clone(&self) -> Self {
        ValueNet {
            config: self.config.clone(),
            params: self.params.clone(),
            system: Arc::clone(&self.system),
            scale_lo: self.scale_lo.clone(),
            scale_hi: self.scale_hi.clone(),
        }
    }
}

/// Value and exact input derivatives at one point.
#[derive(Debug, Clone)]
pub struct EvalBundle<T> {
    pub v: T,
    pub dv_dt: T,
    pub grad_x: Vec<T>,
}

/// Initialize with the standard sinusoidal scheme: first layer
/// U(−1/in_dim, 1/in_dim), later layers U(±sqrt(6/fan_in)/omega0),
/// biases U(±1/sqrt(fan_in)).
pub fn init<T: Real>(config: NetConfig, system: Arc<dyn System<T>>) -> Result<ValueNet<T>> {
    config.validate()?;
    if config.in_dim != system.state_dim() + 1 {
        return Err(Error::config(format!(
            "in_dim {} does not match {} (state dim {} + time)",
            config.in_dim,
            system.name(),
            system.state_dim()
        )));
    }
    let mut params = vec![T::zero(); config.param_count()];
    for (li, spec) in layout(&config).iter().enumerate() {
        let mut rng = stream(config.init_seed, &[tag::NET_INIT, li as u64]);
        let fan_in = spec.cols as f64;
        let w_limit = if li == 0 {
            1.0 / fan_in
        } else {
            (6.0 / fan_in).sqrt() / config.omega0
        };
        for k in 0..spec.rows * spec.cols {
            params[spec.w_off + k] = T::c(rng.random_range(-w_limit..w_limit));
        }
        let b_limit = 1.0 / fan_in.sqrt();
        for k in 0..spec.rows {
            params[spec.b_off + k] = T::c(rng.random_range(-b_limit..b_limit));
        }
    }
    let boxx = system.state_box();
    let mut scale_lo: Vec<f64> = boxx.lo.iter().map(|v| v.f64()).collect();
    let mut scale_hi: Vec<f64> = boxx.hi.iter().map(|v| v.f64()).collect();
    scale_lo.push(0.0);
    scale_hi.push(system.time_horizon().f64());
    Ok(ValueNet {
        config,
        params,
        system,
        scale_lo,
        scale_hi,
    })
}

impl<T: Real> ValueNet<T> {
    pub fn horizon(&self) -> f64 {
        *self.scale_hi.last().unwrap()
    }

    /// Map (x, t) into [-1, 1]^in_dim.
    pub fn scale_input(&self, x: &[T], t: f64, out: &mut [T]) {
        for i in 0..x.len() {
            out[i] = (x[i] - T::c(self.scale_lo[i])) * T::c(self.scale_factor(i))
                - T::one();
        }
        let d = x.len();
        out[d] = T::c((t - self.scale_lo[d]) * self.scale_factor(d) - 1.0);
    }

    /// Inverse of [`ValueNet::scale_input`].
    pub fn unscale_input(&self, s: &[T]) -> (Vec<T>, f64) {
        let d = s.len() - 1;
        let x = (0..d)
            .map(|i| (s[i] + T::one()) / T::c(self.scale_factor(i)) + T::c(self.scale_lo[i]))
            .collect();
        let t = (s[d].f64() + 1.0) / self.scale_factor(d) + self.scale_lo[d];
        (x, t)
    }

    fn scale_factor(&self, i: usize) -> f64 {
        let span = self.scale_hi[i] - self.scale_lo[i];
        if span > 0.0 {
            2.0 / span
        } else {
            0.0
        }
    }

    /// Network raw output O(x, t).
    pub fn raw_output(&self, x: &[T], t: f64) -> T {
        let mut ws = Workspace::new(&self.config);
        forward_value(self, &mut ws, x, t)
    }

    /// V(x, t) = l(x) + (T − t)·O(x, t).
    pub fn eval(&self, x: &[T], t: f64) -> T {
        let o = self.raw_output(x, t);
        self.system.boundary(x) + T::c(self.horizon() - t) * o
    }

    /// Value with exact time derivative and spatial gradient.
    pub fn eval_with_grads(&self, x: &[T], t: f64) -> EvalBundle<T> {
        let mut ws = Workspace::new(&self.config);
        let mut bundle = EvalBundle {
            v: T::zero(),
            dv_dt: T::zero(),
            grad_x: vec![T::zero(); x.len()],
        };
        eval_with_grads_ws(self, &mut ws, x, t, &mut bundle);
        bundle
    }
}

impl<T: Real> ValueFunction<T> for ValueNet<T> {
    fn value(&self, x: &[T], t: f64) -> T {
        self.eval(x, t)
    }

    fn grad_x(&self, x: &[T], t: f64, out: &mut [T]) {
        let b = self.eval_with_grads(x, t);
        out.copy_from_slice(&b.grad_x);
    }
}

/// Reusable forward/backward buffers; one per worker chunk.
pub(crate) struct Workspace<T> {
    pub in_dim: usize,
    pub width: usize,
    pub layers: usize,
    /// scaled input
    pub s: Vec<T>,
    /// tangent seeds ds_j/dinput_j
    pub seeds: Vec<T>,
    /// activations a^l, layer-major [layers][width]
    pub act: Vec<T>,
    /// omega0*cos(omega0 z^l)
    pub cosz: Vec<T>,
    /// pre-activation tangents ż^l, [layers][width][in_dim]
    pub zt: Vec<T>,
    /// activation tangents ȧ^l, [layers][width][in_dim]
    pub at: Vec<T>,
    pub out_o: T,
    pub out_tangent: Vec<T>,
    // backward scratch
    pub abar: Vec<T>,
    pub atbar: Vec<T>,
    pub zbar: Vec<T>,
    pub ztbar: Vec<T>,
    pub abar_prev: Vec<T>,
    pub atbar_prev: Vec<T>,
    pub grad_l: Vec<T>,
}

impl<T: Real> Workspace<T> {
    pub fn new(cfg: &NetConfig) -> Self {
        let (w, d, l) = (cfg.width, cfg.in_dim, cfg.layers);
        Workspace {
            in_dim: d,
            width: w,
            layers: l,
            s: vec![T::zero(); d],
            seeds: vec![T::zero(); d],
            act: vec![T::zero(); l * w],
            cosz: vec![T::zero(); l * w],
            zt: vec![T::zero(); l * w * d],
            at: vec![T::zero(); l * w * d],
            out_o: T::zero(),
            out_tangent: vec![T::zero(); d],
            abar: vec![T::zero(); w],
            atbar: vec![T::zero(); w * d],
            zbar: vec![T::zero(); w],
            ztbar: vec![T::zero(); w * d],
            abar_prev: vec![T::zero(); w],
            atbar_prev: vec![T::zero(); w * d],
            grad_l: vec![T::zero(); d - 1],
        }
    }
}

/// Value-only forward pass (no tangents): returns O(x, t).
pub(crate) fn forward_value<T: Real>(
    net: &ValueNet<T>,
    ws: &mut Workspace<T>,
    x: &[T],
    t: f64,
) -> T {
    let cfg = &net.config;
    let specs = layout(cfg);
    net.scale_input(x, t, &mut ws.s);
    let omega = T::c(cfg.omega0);

    for (li, spec) in specs.iter().take(cfg.layers).enumerate() {
        let (prev_rest, cur) = ws.act.split_at_mut(li * ws.width);
        let cur = &mut cur[..ws.width];
        let prev: &[T] = if li == 0 {
            &ws.s
        } else {
            &prev_rest[(li - 1) * ws.width..]
        };
        for r in 0..spec.rows {
            let row = &net.params[spec.w_off + r * spec.cols..spec.w_off + (r + 1) * spec.cols];
            let mut z = net.params[spec.b_off + r];
            for c in 0..spec.cols {
                z += row[c] * prev[c];
            }
            cur[r] = (omega * z).sin();
        }
    }
    let out = specs[cfg.layers];
    let last = &ws.act[(cfg.layers - 1) * ws.width..cfg.layers * ws.width];
    let mut o = net.params[out.b_off];
    for c in 0..out.cols {
        o += net.params[out.w_off + c] * last[c];
    }
    ws.out_o = o;
    o
}

/// Forward pass with input tangents, filling the workspace caches.
pub(crate) fn forward_full<T: Real>(net: &ValueNet<T>, ws: &mut Workspace<T>, x: &[T], t: f64) {
    let cfg = &net.config;
    let specs = layout(cfg);
    let (w, d) = (ws.width, ws.in_dim);
    net.scale_input(x, t, &mut ws.s);
    for j in 0..d {
        ws.seeds[j] = T::c(net.scale_factor(j));
    }
    let omega = T::c(cfg.omega0);

    for (li, spec) in specs.iter().take(cfg.layers).enumerate() {
        for r in 0..spec.rows {
            let row = &net.params[spec.w_off + r * spec.cols..spec.w_off + (r + 1) * spec.cols];
            let mut z = net.params[spec.b_off + r];
            let zt_row = &mut ws.zt[(li * w + r) * d..(li * w + r + 1) * d];
            zt_row.fill(T::zero());
            if li == 0 {
                for c in 0..spec.cols {
                    z += row[c] * ws.s[c];
                    // seed: ds_c/dinput_c = scale factor
                    zt_row[c] = row[c] * ws.seeds[c];
                }
            } else {
                let prev_at = (li - 1) * w * d;
                for c in 0..spec.cols {
                    let a_prev = ws.act[(li - 1) * w + c];
                    z += row[c] * a_prev;
                    let at_prev = &ws.at[prev_at + c * d..prev_at + (c + 1) * d];
                    for j in 0..d {
                        zt_row[j] += row[c] * at_prev[j];
                    }
                }
            }
            let zs = omega * z;
            let a = zs.sin();
            let cz = omega * zs.cos();
            ws.act[li * w + r] = a;
            ws.cosz[li * w + r] = cz;
            let at_row_off = (li * w + r) * d;
            for j in 0..d {
                ws.at[at_row_off + j] = cz * ws.zt[at_row_off + j];
            }
        }
    }

    let out = specs[cfg.layers];
    let last_act = (cfg.layers - 1) * w;
    let mut o = net.params[out.b_off];
    ws.out_tangent.fill(T::zero());
    for c in 0..out.cols {
        let wc = net.params[out.w_off + c];
        o += wc * ws.act[last_act + c];
        let at_row = &ws.at[(last_act + c) * d..(last_act + c + 1) * d];
        for j in 0..d {
            ws.out_tangent[j] += wc * at_row[j];
        }
    }
    ws.out_o = o;
}

/// Evaluate value + derivatives using a caller-owned workspace.
pub(crate) fn eval_with_grads_ws<T: Real>(
    net: &ValueNet<T>,
    ws: &mut Workspace<T>,
    x: &[T],
    t: f64,
    out: &mut EvalBundle<T>,
) {
    forward_full(net, ws, x, t);
    let n = x.len();
    let ttg = T::c(net.horizon() - t);
    let l = net.system.boundary(x);
    net.system.boundary_grad(x, &mut ws.grad_l);
    out.v = l + ttg * ws.out_o;
    out.dv_dt = -ws.out_o + ttg * ws.out_tangent[n];
    for i in 0..n {
        out.grad_x[i] = ws.grad_l[i] + ttg * ws.out_tangent[i];
    }
}

/// Adjoint seeds for the reverse pass over the augmented graph.
#[derive(Debug, Clone)]
pub(crate) struct OutputAdjoint<T> {
    /// dL/dO
    pub o: T,
    /// dL/dȮ_j for each input direction
    pub tangent: Vec<T>,
}

/// Accumulate dL/dθ into `grad` for one sample whose forward pass (with
/// tangents if `adj.tangent` is nonzero) is cached in `ws`.
pub(crate) fn backward<T: Real>(
    net: &ValueNet<T>,
    ws: &mut Workspace<T>,
    adj: &OutputAdjoint<T>,
    with_tangents: bool,
    grad: &mut [T],
) {
    let cfg = &net.config;
    let specs = layout(cfg);
    let (w, d) = (ws.width, ws.in_dim);
    let omega2 = T::c(cfg.omega0 * cfg.omega0);

    // output layer
    let out = specs[cfg.layers];
    let last = (cfg.layers - 1) * w;
    grad[out.b_off] += adj.o;
    for c in 0..out.cols {
        let mut gw = adj.o * ws.act[last + c];
        let wc = net.params[out.w_off + c];
        ws.abar[c] = adj.o * wc;
        if with_tangents {
            let at_row = &ws.at[(last + c) * d..(last + c + 1) * d];
            let atbar_row = &mut ws.atbar[c * d..(c + 1) * d];
            for j in 0..d {
                gw += adj.tangent[j] * at_row[j];
                atbar_row[j] = adj.tangent[j] * wc;
            }
        }
        grad[out.w_off + c] += gw;
    }
    if !with_tangents {
        ws.atbar.fill(T::zero());
    }

    for li in (0..cfg.layers).rev() {
        let spec = specs[li];
        // sine: a = sin(omega z), cached cosz = omega*cos(omega z)
        for r in 0..spec.rows {
            let cz = ws.cosz[li * w + r];
            let mut zb = ws.abar[r] * cz;
            if with_tangents {
                let a = ws.act[li * w + r];
                let zt_row = &ws.zt[(li * w + r) * d..(li * w + r + 1) * d];
                let atbar_row = &ws.atbar[r * d..(r + 1) * d];
                let ztbar_row = &mut ws.ztbar[r * d..(r + 1) * d];
                for j in 0..d {
                    // d(cz)/dz = -omega^2 * sin(omega z) = -omega^2 * a
                    zb -= atbar_row[j] * omega2 * a * zt_row[j];
                    ztbar_row[j] = atbar_row[j] * cz;
                }
            }
            ws.zbar[r] = zb;
        }

        // affine: z = W a_prev + b, żj = W ȧ_prev,j
        if li == 0 {
            for r in 0..spec.rows {
                grad[spec.b_off + r] += ws.zbar[r];
                let grow = &mut grad[spec.w_off + r * spec.cols..spec.w_off + (r + 1) * spec.cols];
                let zb = ws.zbar[r];
                if with_tangents {
                    let ztbar_row = &ws.ztbar[r * d..(r + 1) * d];
                    for c in 0..spec.cols {
                        // seed tangent of input c is nonzero only at j = c
                        grow[c] += zb * ws.s[c] + ztbar_row[c] * ws.seeds[c];
                    }
                } else {
                    for c in 0..spec.cols {
                        grow[c] += zb * ws.s[c];
                    }
                }
            }
        } else {
            let prev_act = (li - 1) * w;
            ws.abar_prev[..spec.cols].fill(T::zero());
            if with_tangents {
                ws.atbar_prev[..spec.cols * d].fill(T::zero());
            }
            for r in 0..spec.rows {
                grad[spec.b_off + r] += ws.zbar[r];
                let zb = ws.zbar[r];
                let row_off = spec.w_off + r * spec.cols;
                for c in 0..spec.cols {
                    let wrc = net.params[row_off + c];
                    let mut gw = zb * ws.act[prev_act + c];
                    ws.abar_prev[c] += wrc * zb;
                    if with_tangents {
                        let at_prev =
                            &ws.at[(prev_act + c) * d..(prev_act + c + 1) * d];
                        let ztbar_row = &ws.ztbar[r * d..(r + 1) * d];
                        let atbar_prev_row = &mut ws.atbar_prev[c * d..(c + 1) * d];
                        for j in 0..d {
                            gw += ztbar_row[j] * at_prev[j];
                            atbar_prev_row[j] += wrc * ztbar_row[j];
                        }
                    }
                    grad[row_off + c] += gw;
                }
            }
            std::mem::swap(&mut ws.abar, &mut ws.abar_prev);
            if with_tangents {
                std::mem::swap(&mut ws.atbar, &mut ws.atbar_prev);
            }
        }
    }
}

#[cfg(test)]
mod tests;
