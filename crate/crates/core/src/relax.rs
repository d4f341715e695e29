//! Relaxed problem solved by dynamic programming on a time × state grid.
//!
//! The state grid is anchored at the initial state `a` so that `b` is a
//! node; velocities are difference quotients `k·dx/h` between nodes, and
//! the cost of an interval is `h·[f**(tᵢ, ξᵢ) + g(tᵢ, xᵢ)]` at its left
//! endpoint.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::NagumoFn;
use crate::classify::{HypothesisConstants, ProbeBox};
use crate::convex::{lower_convex_hull, ConvexEnvelope, Grid1D, SampledFunction};
use crate::error::{Error, Result};
use crate::family::{IntegrandFamily, StateFamily};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Radii used to check that a configured θ is a Nagumo function.
pub const NAGUMO_PROBE: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Budget quanta per time interval when the caller does not choose.
pub const DEFAULT_LEVELS_PER_STEP: usize = 64;

/// Cells allowed in the budget-augmented backtracking table.
pub const MAX_BUDGET_CELLS: usize = 200_000_000;

const SETTLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Problem {
    pub horizon: f64,
    pub a: f64,
    pub b: f64,
    pub f: IntegrandFamily,
    pub g: StateFamily,
    pub state_box: (f64, f64),
    pub velocity_cap: f64,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.horizon,
            self.a,
            self.b,
            self.state_box.0,
            self.state_box.1,
            self.velocity_cap,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("problem data must be finite".into()));
        }
        if self.horizon <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        let (lo, hi) = self.state_box;
        if lo >= hi {
            return Err(Error::InvalidInput(format!("empty state box [{lo}, {hi}]")));
        }
        for (name, v) in [("a", self.a), ("b", self.b)] {
            if v < lo || v > hi {
                return Err(Error::InvalidInput(format!(
                    "endpoint {name} = {v} outside state box [{lo}, {hi}]"
                )));
            }
        }
        if self.velocity_cap <= 0.0 {
            return Err(Error::InvalidInput("velocity cap must be positive".into()));
        }
        let needed = libm::fabs(self.b - self.a) / self.horizon;
        if needed > self.velocity_cap * (1.0 + 1e-12) {
            return Err(Error::Infeasible(format!(
                "straight line needs velocity {needed} above the cap {}",
                self.velocity_cap
            )));
        }
        self.f.validate()?;
        self.g.validate()
    }

    /// Slope of the straight line from a to b.
    pub fn mean_velocity(&self) -> f64 {
        (self.b - self.a) / self.horizon
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct DpConfig {
    pub n_t: usize,
    pub n_x: usize,
    pub theta: Option<NagumoFn>,
    /// Weight r of the Nagumo penalty r·Θ(u).
    pub penalty: f64,
    /// Total budget quanta for budget-constrained solves and sweeps.
    pub budget_levels: Option<usize>,
}

impl DpConfig {
    pub fn new(n_t: usize, n_x: usize) -> Self {
        Self {
            n_t,
            n_x,
            theta: None,
            penalty: 0.0,
            budget_levels: None,
        }
    }

    pub fn with_theta(mut self, theta: NagumoFn) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_penalty(mut self, r: f64) -> Self {
        self.penalty = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(Error::InvalidInput(format!("n_t must be >= 2, got {}", self.n_t)));
        }
        if self.n_x < 3 {
            return Err(Error::InvalidInput(format!("n_x must be >= 3, got {}", self.n_x)));
        }
        if !(self.penalty.is_finite() && self.penalty >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "penalty weight must be finite and >= 0, got {}",
                self.penalty
            )));
        }
        if let Some(theta) = &self.theta {
            theta.probe(&NAGUMO_PROBE)?;
        }
        if self.budget_levels == Some(0) {
            return Err(Error::InvalidInput("budget_levels must be positive".into()));
        }
        Ok(())
    }

    fn levels(&self) -> usize {
        self.budget_levels
            .unwrap_or(DEFAULT_LEVELS_PER_STEP * self.n_t)
    }
}

/// Time nodes, anchored state grid and the velocity set of the DP.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub dx: f64,
    pub a_index: usize,
    pub b_index: usize,
    /// Largest admissible index jump per step.
    pub k_max: usize,
    /// Grid on which f(tᵢ, ·) is sampled: the DP velocities plus ±cap.
    pub velocity_grid: Grid1D,
}

impl Discretization {
    pub fn new(problem: &Problem, cfg: &DpConfig) -> Result<Self> {
        problem.validate()?;
        cfg.validate()?;
        let (lo, hi) = problem.state_box;
        let n_t = cfg.n_t;
        let h = problem.horizon / n_t as f64;
        let times: Vec<f64> = (0..=n_t)
            .map(|i| {
                if i == n_t {
                    problem.horizon
                } else {
                    problem.horizon * i as f64 / n_t as f64
                }
            })
            .collect();

        let dx0 = (hi - lo) / (cfg.n_x - 1) as f64;
        let span = libm::fabs(problem.b - problem.a);
        let dx = if span == 0.0 {
            dx0
        } else {
            let m = span / dx0;
            let mr = libm::round(m);
            let m = if libm::fabs(m - mr) <= 1e-9 * m.max(1.0) {
                mr
            } else {
                libm::ceil(m)
            };
            span / m.max(1.0)
        };
        let below = libm::floor((problem.a - lo) / dx + 1e-9) as usize;
        let above = libm::floor((hi - problem.a) / dx + 1e-9) as usize;
        let mut states: Vec<f64> = (0..=below + above)
            .map(|k| problem.a + (k as f64 - below as f64) * dx)
            .collect();
        let a_index = below;
        let steps_to_b = libm::round((problem.b - problem.a) / dx) as isize;
        let b_index = (a_index as isize + steps_to_b) as usize;
        states[a_index] = problem.a;
        states[b_index] = problem.b;

        let k_cap = libm::floor(problem.velocity_cap * h / dx + 1e-9) as usize;
        let k_max = k_cap.min(states.len() - 1);
        if k_max == 0 {
            return Err(Error::Infeasible(format!(
                "velocity cap {} allows no state step of size {dx} per time step {h}",
                problem.velocity_cap
            )));
        }
        let unit = dx / h;
        let mut vpoints: Vec<f64> = (-(k_max as isize)..=k_max as isize)
            .map(|k| k as f64 * unit)
            .collect();
        let top = k_max as f64 * unit;
        if top < problem.velocity_cap * (1.0 - 1e-12) {
            vpoints.insert(0, -problem.velocity_cap);
            vpoints.push(problem.velocity_cap);
        }
        let velocity_grid = Grid1D::new(vpoints)?;
        Ok(Self {
            h,
            times,
            states,
            dx,
            a_index,
            b_index,
            k_max,
            velocity_grid,
        })
    }

    pub fn n_t(&self) -> usize {
        self.times.len() - 1
    }

    /// Velocity of an index jump of `k` in one step.
    pub fn velocity(&self, k: isize) -> f64 {
        k as f64 * self.dx / self.h
    }

    /// Probe box matching the DP sampling.
    pub fn probe_box(&self, horizon: f64) -> ProbeBox {
        ProbeBox {
            horizon,
            t_nodes: self.times[..self.n_t()].to_vec(),
            states: self.states.clone(),
            velocities: self.velocity_grid.clone(),
        }
    }
}

/// Per-node discrete envelopes f**(tᵢ, ·) on the velocity grid.
#[derive(Debug, Clone)]
pub struct CostModel {
    samples: Vec<SampledFunction>,
    envelopes: Vec<ConvexEnvelope>,
}

impl CostModel {
    pub fn new(f: &IntegrandFamily, disc: &Discretization) -> Result<Self> {
        let nodes = if f.is_autonomous() { 1 } else { disc.n_t() };
        let mut samples = Vec::with_capacity(nodes);
        let mut envelopes = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let s = f.sample(disc.times[i], &disc.velocity_grid)?;
            envelopes.push(lower_convex_hull(&s)?);
            samples.push(s);
        }
        Ok(Self { samples, envelopes })
    }

    /// Envelope for interval `i`.
    pub fn envelope(&self, i: usize) -> &ConvexEnvelope {
        &self.envelopes[i.min(self.envelopes.len() - 1)]
    }

    pub fn samples(&self, i: usize) -> &SampledFunction {
        &self.samples[i.min(self.samples.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// (x_{i+1} − xᵢ)/h per interval.
    pub velocities: Vec<f64>,
    /// Σ h·[f**(tᵢ, ξᵢ) + g(tᵢ, xᵢ)].
    pub value: f64,
    /// Σ h·θ(|ξᵢ|) when θ is configured.
    pub theta_value: Option<f64>,
    /// Quantity the solver minimized: value + r·Θ.
    pub objective: f64,
    /// An interior node touches a state-box edge that is not an endpoint.
    pub boundary_contact: bool,
    /// Some step uses the largest admissible jump.
    pub cap_saturated: bool,
}

impl Trajectory {
    /// Trajectory with cost fields unset (NaN) from uniform nodes.
    pub fn from_states(times: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != states.len() {
            return Err(Error::InvalidInput(
                "trajectory needs matching times and states, at least 2 of each".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("trajectory times must increase".into()));
        }
        let velocities = times
            .windows(2)
            .zip(states.windows(2))
            .map(|(t, x)| (x[1] - x[0]) / (t[1] - t[0]))
            .collect();
        Ok(Self {
            times,
            states,
            velocities,
            value: f64::NAN,
            theta_value: None,
            objective: f64::NAN,
            boundary_contact: false,
            cap_saturated: false,
        })
    }

    pub fn n_t(&self) -> usize {
        self.velocities.len()
    }

    /// Σ h·|ξᵢ|.
    pub fn velocity_l1(&self) -> f64 {
        self.times
            .windows(2)
            .zip(&self.velocities)
            .map(|(t, v)| (t[1] - t[0]) * libm::fabs(*v))
            .sum()
    }

    /// Σ_{i<N} h·|xᵢ| (left endpoints, matching the cost quadrature).
    pub fn state_l1(&self) -> f64 {
        self.times
            .windows(2)
            .zip(&self.states)
            .map(|(t, x)| (t[1] - t[0]) * libm::fabs(*x))
            .sum()
    }
}

/// Relaxed cost Σ h·[f**(tᵢ, ξᵢ) + g(tᵢ, xᵢ)] of any trajectory on the
/// problem's time grid.
pub fn relaxed_cost(
    problem: &Problem,
    model: &CostModel,
    traj: &Trajectory,
) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..traj.n_t() {
        let h = traj.times[i + 1] - traj.times[i];
        let fs = model.envelope(i).evaluate(traj.velocities[i])?;
        total += h * (fs + problem.g.eval(traj.times[i], traj.states[i]));
    }
    Ok(total)
}

fn theta_cost(theta: &NagumoFn, traj: &Trajectory) -> f64 {
    traj.times
        .windows(2)
        .zip(&traj.velocities)
        .map(|(t, v)| (t[1] - t[0]) * theta.eval(*v))
        .sum()
}

struct Tables {
    /// step[i][k + k_max]: h·(f**(tᵢ, v_k) + r·θ(|v_k|)).
    step: Vec<Vec<f64>>,
    /// node[i][j]: h·g(tᵢ, x_j).
    node: Vec<Vec<f64>>,
}

fn build_tables(
    problem: &Problem,
    cfg: &DpConfig,
    disc: &Discretization,
    model: &CostModel,
) -> Result<Tables> {
    let n_t = disc.n_t();
    let km = disc.k_max as isize;
    let h = disc.h;
    let mut step: Vec<Vec<f64>> = Vec::with_capacity(n_t);
    for i in 0..n_t {
        if i > 0 && problem.f.is_autonomous() {
            let row: Vec<f64> = step[0].clone();
            step.push(row);
            continue;
        }
        let env = model.envelope(i);
        let mut row = Vec::with_capacity(2 * disc.k_max + 1);
        for k in -km..=km {
            let v = disc.velocity(k);
            let mut c = env.evaluate(v)?;
            if cfg.penalty > 0.0 {
                if let Some(theta) = &cfg.theta {
                    c += cfg.penalty * theta.eval(v);
                }
            }
            row.push(h * c);
        }
        step.push(row);
    }
    let node = (0..n_t)
        .map(|i| {
            disc.states
                .iter()
                .map(|&x| h * problem.g.eval(disc.times[i], x))
                .collect()
        })
        .collect();
    Ok(Tables { step, node })
}

fn finish(
    problem: &Problem,
    cfg: &DpConfig,
    disc: &Discretization,
    model: &CostModel,
    path: &[usize],
) -> Result<Trajectory> {
    let states: Vec<f64> = path.iter().map(|&j| disc.states[j]).collect();
    let mut traj = Trajectory::from_states(disc.times.clone(), states)?;
    // velocities from index jumps keep them exactly on the DP velocity set
    for (i, w) in path.windows(2).enumerate() {
        traj.velocities[i] = disc.velocity(w[1] as isize - w[0] as isize);
    }
    traj.value = relaxed_cost(problem, model, &traj)?;
    traj.theta_value = cfg.theta.as_ref().map(|th| theta_cost(th, &traj));
    traj.objective = match (cfg.penalty > 0.0, traj.theta_value) {
        (true, Some(th)) => traj.value + cfg.penalty * th,
        _ => traj.value,
    };
    let last = disc.states.len() - 1;
    let (lo_edge, hi_edge) = (disc.states[0], disc.states[last]);
    let edge_is_endpoint =
        |x: f64| x == problem.a || x == problem.b;
    traj.boundary_contact = path[1..path.len() - 1].iter().any(|&j| {
        (j == 0 && !edge_is_endpoint(lo_edge)) || (j == last && !edge_is_endpoint(hi_edge))
    });
    traj.cap_saturated = path
        .windows(2)
        .any(|w| (w[1] as isize - w[0] as isize).unsigned_abs() == disc.k_max);
    Ok(traj)
}

fn run_dp(problem: &Problem, cfg: &DpConfig) -> Result<Trajectory> {
    let disc = Discretization::new(problem, cfg)?;
    let model = CostModel::new(&problem.f, &disc)?;
    let tables = build_tables(problem, cfg, &disc, &model)?;
    let n = disc.states.len();
    let n_t = disc.n_t();
    let km = disc.k_max;
    let mut cost = vec![f64::INFINITY; n];
    cost[disc.a_index] = 0.0;
    let mut pred: Vec<Vec<u32>> = Vec::with_capacity(n_t);
    for i in 0..n_t {
        let mut next = vec![f64::INFINITY; n];
        let mut back = vec![u32::MAX; n];
        let step = &tables.step[i];
        let node = &tables.node[i];
        for jn in 0..n {
            let j_lo = jn.saturating_sub(km);
            let j_hi = (jn + km).min(n - 1);
            let mut best = f64::INFINITY;
            let mut arg = u32::MAX;
            for j in j_lo..=j_hi {
                if !cost[j].is_finite() {
                    continue;
                }
                let k = jn as isize - j as isize + km as isize;
                let c = cost[j] + node[j] + step[k as usize];
                if c < best {
                    best = c;
                    arg = j as u32;
                }
            }
            next[jn] = best;
            back[jn] = arg;
        }
        pred.push(back);
        cost = next;
    }
    if !cost[disc.b_index].is_finite() {
        return Err(Error::Infeasible(format!(
            "b = {} is unreachable from a = {} in {} steps under the velocity cap",
            problem.b, problem.a, n_t
        )));
    }
    let mut path = vec![0usize; n_t + 1];
    path[n_t] = disc.b_index;
    for i in (0..n_t).rev() {
        path[i] = pred[i][path[i + 1]] as usize;
    }
    finish(problem, cfg, &disc, &model, &path)
}

/// Exact minimizer of the discrete relaxed problem (no penalty).
pub fn solve_relaxed(problem: &Problem, cfg: &DpConfig) -> Result<Trajectory> {
    let mut cfg = cfg.clone();
    cfg.penalty = 0.0;
    run_dp(problem, &cfg)
}

/// Minimizer of F(u) + r·Θ(u) on the grid; `r = 0` is [`solve_relaxed`].
pub fn nagumo_penalized_solve(problem: &Problem, cfg: &DpConfig) -> Result<Trajectory> {
    if cfg.theta.is_none() {
        return Err(Error::InvalidInput("penalized solve needs theta".into()));
    }
    run_dp(problem, cfg)
}

/// Penalized solves for each weight in `weights`.
pub fn lagrangian_sweep(
    problem: &Problem,
    cfg: &DpConfig,
    weights: &[f64],
) -> Result<Vec<Trajectory>> {
    weights
        .iter()
        .map(|&r| nagumo_penalized_solve(problem, &cfg.clone().with_penalty(r)))
        .collect()
}

/// Quantized budget: each step consumes ⌈h·θ(|v|)/Δ⌉ quanta, so a
/// quantized-feasible path always satisfies the true budget.
struct Budget {
    quantum: f64,
    levels: usize,
    /// units[k + k_max]
    units: Vec<usize>,
}

fn budget_for(cfg: &DpConfig, disc: &Discretization, l_max: f64) -> Result<Budget> {
    let theta = cfg
        .theta
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("budget constraint needs theta".into()))?;
    if !(l_max.is_finite() && l_max > 0.0) {
        return Err(Error::InvalidInput(format!("budget must be positive, got {l_max}")));
    }
    let levels = cfg.levels();
    let quantum = l_max / levels as f64;
    let km = disc.k_max as isize;
    let units = (-km..=km)
        .map(|k| {
            let u = disc.h * theta.eval(disc.velocity(k)) / quantum;
            libm::ceil(u * (1.0 - 1e-12)) as usize
        })
        .collect();
    Ok(Budget {
        quantum,
        levels,
        units,
    })
}

/// Forward budget-augmented DP; returns D_N(b, q) for q = 0..=levels.
fn budget_values(
    problem: &Problem,
    cfg: &DpConfig,
    l_max: f64,
) -> Result<(Vec<f64>, Budget)> {
    let mut plain = cfg.clone();
    plain.penalty = 0.0;
    let disc = Discretization::new(problem, &plain)?;
    let model = CostModel::new(&problem.f, &disc)?;
    let tables = build_tables(problem, &plain, &disc, &model)?;
    let budget = budget_for(&plain, &disc, l_max)?;
    let n = disc.states.len();
    let q1 = budget.levels + 1;
    let km = disc.k_max;
    let mut cost = vec![f64::INFINITY; n * q1];
    cost[disc.a_index * q1] = 0.0;
    let mut next = vec![f64::INFINITY; n * q1];
    for i in 0..disc.n_t() {
        next.iter_mut().for_each(|c| *c = f64::INFINITY);
        let step = &tables.step[i];
        let node = &tables.node[i];
        for jn in 0..n {
            let j_lo = jn.saturating_sub(km);
            let j_hi = (jn + km).min(n - 1);
            let dst = &mut next[jn * q1..(jn + 1) * q1];
            for j in j_lo..=j_hi {
                let k = jn + km - j;
                let u = budget.units[k];
                if u > budget.levels {
                    continue;
                }
                let add = node[j] + step[k];
                let src = &cost[j * q1..(j + 1) * q1];
                for q in 0..q1 - u {
                    let c = src[q] + add;
                    if c < dst[q + u] {
                        dst[q + u] = c;
                    }
                }
            }
        }
        core::mem::swap(&mut cost, &mut next);
    }
    let b = disc.b_index;
    Ok((cost[b * q1..(b + 1) * q1].to_vec(), budget))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SweepReport {
    pub l_schedule: Vec<f64>,
    /// V(l); `None` where no grid path meets the budget.
    pub values: Vec<Option<f64>>,
    pub settle_index: Option<usize>,
    pub budget_quantum: f64,
    pub budget_levels: usize,
}

impl SweepReport {
    /// Largest increase between consecutive feasible values (≤ 0 when V is
    /// nonincreasing).
    pub fn max_increase(&self) -> f64 {
        let feasible: Vec<f64> = self.values.iter().flatten().copied().collect();
        feasible
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// V(l) = min { F(u) : Σ h·θ(|ξᵢ|) ≤ l } along `l_schedule`.
pub fn value_sweep(problem: &Problem, cfg: &DpConfig, l_schedule: &[f64]) -> Result<SweepReport> {
    if l_schedule.is_empty() || l_schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("l schedule must be increasing".into()));
    }
    if !(l_schedule[0] >= 0.0) {
        return Err(Error::InvalidInput("l schedule must be nonnegative".into()));
    }
    let l_max = l_schedule[l_schedule.len() - 1];
    let (at_b, budget) = budget_values(problem, cfg, l_max)?;
    let mut prefix = Vec::with_capacity(at_b.len());
    let mut run = f64::INFINITY;
    for &c in &at_b {
        run = run.min(c);
        prefix.push(run);
    }
    let values: Vec<Option<f64>> = l_schedule
        .iter()
        .map(|&l| {
            let q = libm::floor(l / budget.quantum * (1.0 + 1e-12)) as usize;
            let v = prefix[q.min(budget.levels)];
            v.is_finite().then_some(v)
        })
        .collect();
    let settle_index = settle_index(&values);
    Ok(SweepReport {
        l_schedule: l_schedule.to_vec(),
        values,
        settle_index,
        budget_quantum: budget.quantum,
        budget_levels: budget.levels,
    })
}

/// First index from which V stays within tolerance of its last value,
/// provided the last quarter of the schedule already agrees.
pub fn settle_index(values: &[Option<f64>]) -> Option<usize> {
    let k = values.len();
    let last = (*values.last()?)?;
    let window = k.div_ceil(4).max(1);
    let close = |v: &Option<f64>| matches!(v, Some(x) if libm::fabs(x - last) <= SETTLE_TOL);
    if !values[k - window..].iter().all(close) {
        return None;
    }
    let mut idx = k - 1;
    while idx > 0 && close(&values[idx - 1]) {
        idx -= 1;
    }
    Some(idx)
}

/// Minimizer of F under Σ h·θ(|ξᵢ|) ≤ l (quantized conservatively).
pub fn solve_budgeted(problem: &Problem, cfg: &DpConfig, l: f64) -> Result<Trajectory> {
    let mut plain = cfg.clone();
    plain.penalty = 0.0;
    let disc = Discretization::new(problem, &plain)?;
    let model = CostModel::new(&problem.f, &disc)?;
    let tables = build_tables(problem, &plain, &disc, &model)?;
    let budget = budget_for(&plain, &disc, l)?;
    let n = disc.states.len();
    let q1 = budget.levels + 1;
    let km = disc.k_max;
    let n_t = disc.n_t();
    if n_t.saturating_mul(n).saturating_mul(q1) > MAX_BUDGET_CELLS {
        return Err(Error::InvalidInput(format!(
            "budget table of {n_t}x{n}x{q1} cells is too large; lower budget_levels"
        )));
    }
    let mut cost = vec![f64::INFINITY; n * q1];
    cost[disc.a_index * q1] = 0.0;
    // back[i][(jn, q)] = predecessor state index
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(n_t);
    for i in 0..n_t {
        let mut next = vec![f64::INFINITY; n * q1];
        let mut arg = vec![u32::MAX; n * q1];
        let step = &tables.step[i];
        let node = &tables.node[i];
        for jn in 0..n {
            let j_lo = jn.saturating_sub(km);
            let j_hi = (jn + km).min(n - 1);
            for j in j_lo..=j_hi {
                let k = jn + km - j;
                let u = budget.units[k];
                if u > budget.levels {
                    continue;
                }
                let add = node[j] + step[k];
                for q in 0..q1 - u {
                    let c = cost[j * q1 + q] + add;
                    let d = jn * q1 + q + u;
                    if c < next[d] {
                        next[d] = c;
                        arg[d] = j as u32;
                    }
                }
            }
        }
        back.push(arg);
        cost = next;
    }
    let b = disc.b_index;
    let (mut q, best) = cost[b * q1..(b + 1) * q1]
        .iter()
        .enumerate()
        .fold((usize::MAX, f64::INFINITY), |acc, (q, &c)| if c < acc.1 { (q, c) } else { acc });
    if !best.is_finite() {
        return Err(Error::Infeasible(format!("no grid path meets the budget l = {l}")));
    }
    let mut path = vec![0usize; n_t + 1];
    path[n_t] = b;
    for i in (0..n_t).rev() {
        let jn = path[i + 1];
        let j = back[i][jn * q1 + q] as usize;
        path[i] = j;
        q -= budget.units[jn + km - j];
    }
    finish(problem, &plain, &disc, &model, &path)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct CoercivityReport {
    /// Cost of the grid-rounded straight line.
    pub f_u0: f64,
    /// Whether the rounded straight line respects the velocity cap (only
    /// then is it admissible for the DP and F(u₀) ≥ F(ũ) guaranteed).
    pub u0_admissible: bool,
    pub f_traj: f64,
    pub velocity_l1: f64,
    pub state_l1: f64,
    /// (−A−α)T + B‖u′‖₁ − β‖u‖₁.
    pub lower_bound: f64,
    /// (−A−α)T − βT|a|.
    pub a_tilde: f64,
    /// (F(u₀) − Ã)/(B − βT).
    pub velocity_bound: f64,
    pub minimality_holds: bool,
    pub lower_bound_holds: bool,
    pub velocity_bound_holds: bool,
    pub pass: bool,
}

/// Straight line from a to b rounded to the state grid.
pub fn rounded_straight_line(disc: &Discretization) -> Vec<usize> {
    let n_t = disc.n_t();
    let steps = disc.b_index as f64 - disc.a_index as f64;
    (0..=n_t)
        .map(|i| {
            if i == 0 {
                disc.a_index
            } else if i == n_t {
                disc.b_index
            } else {
                (disc.a_index as f64 + libm::round(steps * i as f64 / n_t as f64)) as usize
            }
        })
        .collect()
}

/// Check F(u₀) ≥ F(ũ) ≥ (−A−α)T + B‖ũ′‖₁ − β‖ũ‖₁ and the implied bound on
/// ‖ũ′‖₁ with discrete norms.
pub fn coercivity_bound_check(
    problem: &Problem,
    cfg: &DpConfig,
    traj: &Trajectory,
    constants: &HypothesisConstants,
) -> Result<CoercivityReport> {
    let HypothesisConstants {
        a: cap_a,
        b: cap_b,
        alpha,
        beta,
        ..
    } = *constants;
    let t = problem.horizon;
    let denom = cap_b - beta * t;
    if !(denom > 0.0) {
        return Err(Error::CertificateFailure(format!(
            "B − βT = {denom} is not positive; no a-priori velocity bound"
        )));
    }
    let disc = Discretization::new(problem, cfg)?;
    let model = CostModel::new(&problem.f, &disc)?;
    let path = rounded_straight_line(&disc);
    let u0_admissible = path
        .windows(2)
        .all(|w| (w[1] as isize - w[0] as isize).unsigned_abs() <= disc.k_max);
    let f_u0 = if u0_admissible {
        let states = path.iter().map(|&j| disc.states[j]).collect();
        relaxed_cost(problem, &model, &Trajectory::from_states(disc.times.clone(), states)?)?
    } else {
        let xi = problem.mean_velocity();
        let states = disc
            .times
            .iter()
            .map(|&s| problem.a + xi * s)
            .collect();
        relaxed_cost(problem, &model, &Trajectory::from_states(disc.times.clone(), states)?)?
    };
    let f_traj = relaxed_cost(problem, &model, traj)?;
    let velocity_l1 = traj.velocity_l1();
    let state_l1 = traj.state_l1();
    let lower_bound = (-cap_a - alpha) * t + cap_b * velocity_l1 - beta * state_l1;
    let a_tilde = (-cap_a - alpha) * t - beta * t * libm::fabs(problem.a);
    let velocity_bound = (f_u0 - a_tilde) / denom;
    let tol = 1e-9 * (1.0 + libm::fabs(f_u0) + libm::fabs(f_traj));
    let minimality_holds = !u0_admissible || f_u0 + tol >= f_traj;
    let lower_bound_holds = f_traj + tol >= lower_bound;
    let velocity_bound_holds = velocity_l1 <= velocity_bound + tol;
    Ok(CoercivityReport {
        f_u0,
        u0_admissible,
        f_traj,
        velocity_l1,
        state_l1,
        lower_bound,
        a_tilde,
        velocity_bound,
        minimality_holds,
        lower_bound_holds,
        velocity_bound_holds,
        pass: minimality_holds && lower_bound_holds && velocity_bound_holds,
    })
}
