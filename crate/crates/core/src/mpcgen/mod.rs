//! Sampling-based MPC dataset generation: iterated Gaussian sampling
//! around a retained nominal sequence, trajectory bootstrapping of the
//! running minimum, and terminal-cost-guided dataset refinement.

mod file;

pub use file::{load_dataset, load_dataset_binary, save_dataset, save_dataset_binary};

use crate::dynamics::{hamiltonian_control_into, AffineScratch, System, Trajectory};
use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use crate::scalar::Real;
use crate::value::ValueFunction;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MpcConfig {
    /// Sampled control sequences per round (N).
    pub n_trajectories: usize,
    /// Iterative sampling rounds (R).
    pub n_rounds: usize,
    /// Integration step (seconds).
    pub dt: f64,
    /// Initial Gaussian std as a fraction of each control range.
    pub sigma: f64,
    /// Std multiplier applied per round.
    pub sigma_anneal: f64,
    /// Number of solved initial states |D_MPC|.
    pub dataset_points: usize,
    /// Optional rollout-horizon cap in seconds.
    pub horizon_cap: Option<f64>,
    pub seed: u64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            n_trajectories: 100,
            n_rounds: 10,
            dt: 0.02,
            sigma: 0.3,
            sigma_anneal: 0.8,
            dataset_points: 300,
            horizon_cap: None,
            seed: 0,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories < 2 {
            return Err(Error::config("MPC needs at least 2 sampled trajectories"));
        }
        if self.n_rounds < 1 {
            return Err(Error::config("MPC needs at least 1 round"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("MPC dt must be positive"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::config("MPC sigma must be positive"));
        }
        if self.dataset_points == 0 {
            return Err(Error::config("dataset size must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Direct,
    Bootstrapped,
    Refined,
}

#[derive(Debug, Clone)]
pub struct MpcSample<T> {
    pub t: T,
    pub x: Vec<T>,
    pub v_hat: T,
    pub provenance: Provenance,
    /// Index of the solved initial state this sample came from; samples
    /// sharing a point index and bootstrapped provenance form one chain
    /// in rollout order.
    pub point_index: u32,
}

#[derive(Debug, Clone)]
pub struct MpcDataset<T> {
    pub system_name: String,
    pub config_fingerprint: String,
    pub dt: f64,
    /// Rollout horizon of the solves that produced this dataset
    /// (seconds): the full remaining horizon for direct generation, H_R
    /// after refinement.
    pub effective_horizon: f64,
    pub samples: Vec<MpcSample<T>>,
}

impl<T: Real> MpcDataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Terminal cost evaluated at a rollout's final state.
pub trait TerminalCost<T: Real>: Sync {
    fn evaluate(&self, t: f64, x: &[T]) -> T;
}

/// Adapter so any value function can serve as an MPC terminal cost.
pub struct ValueTerminal<'a, T: Real>(pub &'a dyn ValueFunction<T>);

impl<T: Real> TerminalCost<T> for ValueTerminal<'_, T> {
    fn evaluate(&self, t: f64, x: &[T]) -> T {
        self.0.value(x, t)
    }
}

/// Result of one MPC solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome<T> {
    pub v_hat: T,
    pub trajectory: Trajectory<T>,
    /// Best score after each round; non-decreasing by nominal retention.
    pub round_best: Vec<T>,
}

/// Solve the discrete safety optimal-control problem at (t, x) by
/// iterated Gaussian sampling around the nominal sequence. `stream_key`
/// separates RNG streams between call sites.
pub fn solve_point<T: Real>(
    system: &dyn System<T>,
    cfg: &MpcConfig,
    t: f64,
    x: &[T],
    u_nom: Option<Vec<Vec<T>>>,
    terminal: Option<&dyn TerminalCost<T>>,
    stream_key: u64,
) -> Result<SolveOutcome<T>> {
    let horizon_t = system.time_horizon().f64();
    let remaining = (horizon_t - t).min(cfg.horizon_cap.unwrap_or(f64::INFINITY));
    let steps = (remaining / cfg.dt).round() as usize;
    let l0 = system.boundary(x);
    if steps == 0 {
        return Ok(SolveOutcome {
            v_hat: l0,
            trajectory: Trajectory {
                t0: T::c(t),
                dt: T::c(cfg.dt),
                states: vec![x.to_vec()],
                controls: vec![],
            },
            round_best: vec![],
        });
    }

    let nu = system.control_dim();
    let bounds = system.control_bounds();
    let ranges: Vec<f64> = (0..nu)
        .map(|i| (bounds.hi[i] - bounds.lo[i]).f64())
        .collect();
    let mut nominal = match u_nom {
        Some(seq) => {
            let mut seq = seq;
            seq.resize(steps, bounds.midpoint());
            seq
        }
        None => vec![bounds.midpoint(); steps],
    };

    let t_end = t + steps as f64 * cfg.dt;
    let use_terminal = terminal.is_some() && t_end < horizon_t - 1e-9;

    let dt_t = T::c(cfg.dt);
    let mut best_overall = T::neg_infinity();
    let mut best_states: Vec<Vec<T>> = Vec::new();
    let mut best_controls: Vec<Vec<T>> = Vec::new();
    let mut round_best = Vec::with_capacity(cfg.n_rounds);
    let mut candidate = vec![vec![T::zero(); nu]; steps];
    let mut states_buf: Vec<Vec<T>> = vec![vec![T::zero(); x.len()]; steps + 1];

    let mut round_winner = nominal.clone();
    for round in 0..cfg.n_rounds {
        let sigma_round = cfg.sigma * cfg.sigma_anneal.powi(round as i32);
        let mut best_round = T::neg_infinity();
        for traj in 0..cfg.n_trajectories {
            if traj == 0 {
                for (c, n) in candidate.iter_mut().zip(&nominal) {
                    c.copy_from_slice(n);
                }
            } else {
                let mut rng = stream(
                    cfg.seed,
                    &[tag::MPC_TRAJ, stream_key, round as u64, traj as u64],
                );
                for h in 0..steps {
                    for i in 0..nu {
                        let dist =
                            Normal::new(nominal[h][i].f64(), sigma_round * ranges[i]).unwrap();
                        let v = T::c(dist.sample(&mut rng));
                        candidate[h][i] = num_traits::clamp(v, bounds.lo[i], bounds.hi[i]);
                    }
                }
            }

            // roll out and score the running minimum of l
            states_buf[0].copy_from_slice(x);
            let mut score = l0;
            let mut finite = true;
            for h in 0..steps {
                let (head, tail) = states_buf.split_at_mut(h + 1);
                let cur = &head[h];
                let next = &mut tail[0];
                system.dynamics(cur, &candidate[h], next);
                for i in 0..cur.len() {
                    next[i] = cur[i] + next[i] * dt_t;
                }
                system.project_state(next);
                if next.iter().any(|v| !v.is_finite()) {
                    finite = false;
                    break;
                }
                let l = system.boundary(next);
                if l < score {
                    score = l;
                }
            }
            if !finite {
                return Err(Error::numeric(
                    "mpc rollout",
                    format!("non-finite state in round {round}, trajectory {traj}"),
                ));
            }
            if use_terminal {
                let term = terminal.unwrap().evaluate(t_end.min(horizon_t), &states_buf[steps]);
                if term < score {
                    score = term;
                }
            }

            if score > best_round {
                best_round = score;
                nominal_next_copy(&mut round_winner, &candidate);
                if score > best_overall {
                    best_overall = score;
                    best_states = states_buf.clone();
                    best_controls = candidate.clone();
                }
            }
        }
        // the best sequence of this round (which includes the retained
        // nominal) becomes the next round's nominal
        nominal_next_copy(&mut nominal, &round_winner);
        round_best.push(best_overall);
    }

    Ok(SolveOutcome {
        v_hat: best_overall,
        trajectory: Trajectory {
            t0: T::c(t),
            dt: dt_t,
            states: best_states,
            controls: best_controls,
        },
        round_best,
    })
}

fn nominal_next_copy<T: Copy>(nominal: &mut [Vec<T>], candidate: &[Vec<T>]) {
    for (n, c) in nominal.iter_mut().zip(candidate) {
        n.copy_from_slice(c);
    }
}

/// Running-minimum labels along a trajectory's boundary values, capped
/// by an optional terminal value, truncated at (and including) the
/// first index attaining the global minimum of l.
pub fn bootstrap_labels<T: Real>(l_values: &[T], terminal: Option<T>) -> (usize, Vec<T>) {
    assert!(!l_values.is_empty());
    let mut suffix_min = vec![T::zero(); l_values.len()];
    let mut m = l_values[l_values.len() - 1];
    for h in (0..l_values.len()).rev() {
        if l_values[h] < m {
            m = l_values[h];
        }
        suffix_min[h] = m;
    }
    let global = suffix_min[0];
    let argmin = l_values
        .iter()
        .position(|&l| l == global)
        .unwrap_or(l_values.len() - 1);
    let mut labels: Vec<T> = suffix_min[..=argmin].to_vec();
    if let Some(term) = terminal {
        for l in &mut labels {
            if term < *l {
                *l = term;
            }
        }
    }
    (argmin, labels)
}

enum NominalSeed<'a, T: Real> {
    Midpoint,
    Policy(&'a dyn ValueFunction<T>),
}

struct GenPlan<'a, T: Real> {
    t_lo: f64,
    t_hi: f64,
    horizon_cap: Option<f64>,
    terminal: Option<&'a dyn ValueFunction<T>>,
    nominal: NominalSeed<'a, T>,
    direct_provenance: Provenance,
    stream_salt: u64,
    effective_horizon: f64,
}

/// Generate the MPC dataset over uniformly sampled (t, x), then
/// bootstrap the running minimum along each optimized trajectory.
pub fn generate<T: Real>(system: &dyn System<T>, cfg: &MpcConfig) -> Result<MpcDataset<T>> {
    cfg.validate()?;
    let horizon = system.time_horizon().f64();
    generate_with_plan(
        system,
        cfg,
        &GenPlan {
            t_lo: 0.0,
            t_hi: horizon,
            horizon_cap: cfg.horizon_cap,
            terminal: None,
            nominal: NominalSeed::Midpoint,
            direct_provenance: Provenance::Direct,
            stream_salt: 0,
            effective_horizon: cfg.horizon_cap.unwrap_or(horizon),
        },
    )
}

/// Regenerate the dataset over [max(0, t_R − H_R), T] with rollout
/// horizon H_R, using the learned value function as terminal cost and
/// its induced policy to seed nominal control sequences. `value = None`
/// degenerates to plain restricted generation (used by tests and
/// ablations). `event` separates the RNG streams of successive
/// refinements.
pub fn refine<T: Real>(
    system: &dyn System<T>,
    cfg: &MpcConfig,
    old: &MpcDataset<T>,
    value: Option<&dyn ValueFunction<T>>,
    t_r: f64,
    h_r: f64,
    event: u64,
) -> Result<MpcDataset<T>> {
    cfg.validate()?;
    if old.system_name != system.name() {
        return Err(Error::config(format!(
            "dataset was generated for '{}', not '{}'",
            old.system_name,
            system.name()
        )));
    }
    if !(h_r > 0.0) || t_r - h_r < -1e-9 {
        return Err(Error::config(format!(
            "refinement needs 0 < H_R <= t_R (got t_R = {t_r}, H_R = {h_r})"
        )));
    }
    let horizon = system.time_horizon().f64();
    generate_with_plan(
        system,
        cfg,
        &GenPlan {
            t_lo: (t_r - h_r).max(0.0),
            t_hi: horizon,
            horizon_cap: Some(match cfg.horizon_cap {
                Some(cap) => cap.min(h_r),
                None => h_r,
            }),
            terminal: value,
            nominal: match value {
                Some(v) => NominalSeed::Policy(v),
                None => NominalSeed::Midpoint,
            },
            direct_provenance: Provenance::Refined,
            stream_salt: event + 1,
            effective_horizon: h_r,
        },
    )
}

fn generate_with_plan<T: Real>(
    system: &dyn System<T>,
    cfg: &MpcConfig,
    plan: &GenPlan<'_, T>,
) -> Result<MpcDataset<T>> {
    let n = system.state_dim();
    let boxx = system.state_box();
    let horizon = system.time_horizon().f64();
    let cfg_solve = MpcConfig {
        horizon_cap: plan.horizon_cap,
        ..cfg.clone()
    };

    let per_point: Vec<Result<Vec<MpcSample<T>>>> = (0..cfg.dataset_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(cfg.seed, &[tag::MPC_POINT, plan.stream_salt, i as u64]);
            let t_i = rng.random_range(plan.t_lo..plan.t_hi);
            let mut x = vec![T::zero(); n];
            boxx.sample_uniform(&mut rng, &mut x);

            let u_nom = match &plan.nominal {
                NominalSeed::Midpoint => None,
                NominalSeed::Policy(value) => Some(policy_rollout_controls(
                    system, *value, &x, t_i, &cfg_solve, horizon,
                )?),
            };
            let term_adapter = plan.terminal.map(ValueTerminal);
            let terminal: Option<&dyn TerminalCost<T>> = term_adapter
                .as_ref()
                .map(|t| t as &dyn TerminalCost<T>);
            let outcome = solve_point(
                system,
                &cfg_solve,
                t_i,
                &x,
                u_nom,
                terminal,
                combine_key(plan.stream_salt, i as u64),
            )?;

            let mut samples = Vec::new();
            samples.push(MpcSample {
                t: T::c(t_i),
                x: x.clone(),
                v_hat: outcome.v_hat,
                provenance: plan.direct_provenance,
                point_index: i as u32,
            });

            // bootstrap the running minimum along the optimized trajectory
            if !outcome.trajectory.states.is_empty() {
                let l_vals: Vec<T> = outcome
                    .trajectory
                    .states
                    .iter()
                    .map(|s| system.boundary(s))
                    .collect();
                let steps = outcome.trajectory.controls.len();
                let t_end = t_i + steps as f64 * cfg.dt;
                let term_val = match plan.terminal {
                    Some(v) if t_end < horizon - 1e-9 => Some(
                        v.value(&outcome.trajectory.states[steps], t_end.min(horizon)),
                    ),
                    _ => None,
                };
                let (argmin, labels) = bootstrap_labels(&l_vals, term_val);
                for (h, &label) in labels.iter().enumerate().take(argmin + 1) {
                    let xs = &outcome.trajectory.states[h];
                    if !boxx.contains(xs) {
                        continue;
                    }
                    samples.push(MpcSample {
                        t: T::c((t_i + h as f64 * cfg.dt).min(horizon)),
                        x: xs.clone(),
                        v_hat: label,
                        provenance: Provenance::Bootstrapped,
                        point_index: i as u32,
                    });
                }
            }
            Ok(samples)
        })
        .collect();

    let mut samples = Vec::new();
    for r in per_point {
        samples.extend(r?);
    }
    Ok(MpcDataset {
        system_name: system.name().to_string(),
        config_fingerprint: crate::manifest::fingerprint(cfg),
        dt: cfg.dt,
        effective_horizon: plan.effective_horizon,
        samples,
    })
}

fn combine_key(salt: u64, idx: u64) -> u64 {
    salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ idx
}

/// Closed-loop rollout under the value function's induced bang-bang
/// policy; returns the control sequence for nominal seeding.
fn policy_rollout_controls<T: Real>(
    system: &dyn System<T>,
    value: &dyn ValueFunction<T>,
    x0: &[T],
    t0: f64,
    cfg: &MpcConfig,
    horizon: f64,
) -> Result<Vec<Vec<T>>> {
    let remaining = (horizon - t0).min(cfg.horizon_cap.unwrap_or(f64::INFINITY));
    let steps = (remaining / cfg.dt).round() as usize;
    let mut controls = Vec::with_capacity(steps);
    let mut x = x0.to_vec();
    let mut grad = vec![T::zero(); x.len()];
    let mut u = vec![T::zero(); system.control_dim()];
    let mut scratch = AffineScratch::for_system(system);
    let dt_t = T::c(cfg.dt);
    let mut fx = vec![T::zero(); x.len()];
    for h in 0..steps {
        let t = (t0 + h as f64 * cfg.dt).clamp(0.0, horizon);
        value.grad_x(&x, t, &mut grad);
        hamiltonian_control_into(system, &x, &grad, &mut scratch, &mut u)?;
        controls.push(u.clone());
        system.dynamics(&x, &u, &mut fx);
        for i in 0..x.len() {
            x[i] = x[i] + fx[i] * dt_t;
        }
        system.project_state(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(
                "policy nominal rollout",
                format!("non-finite state at step {h}"),
            ));
        }
    }
    Ok(controls)
}

#[cfg(test)]
mod tests;
