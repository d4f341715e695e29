//! Turn a relaxed minimizer into a trajectory of the original problem:
//! each interval velocity is split into the hull vertices that realize
//! f**, and the two pieces are laid out as contiguous sub-intervals.

use alloc::format;
use alloc::vec::Vec;

use crate::convex::CaratheodoryDecomposition;
use crate::error::{Error, Result};
use crate::relax::{relaxed_cost, CostModel, DpConfig, Discretization, Problem, Trajectory};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Tolerance on mean preservation and on the per-interval f identity.
pub const SPLIT_TOL: f64 = 1e-9;
const ORDER_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct VelocityDecompositionTrack {
    /// Decomposition of ξᵢ for f(tᵢ, ·), one per interval. Discrete time
    /// makes the selection piecewise constant.
    pub intervals: Vec<CaratheodoryDecomposition<f64>>,
    /// max |qⱼ| over all intervals.
    pub support_radius: f64,
    pub nontrivial: usize,
}

/// Per-interval decomposition of the relaxed velocities.
pub fn decompose_velocities(
    problem: &Problem,
    cfg: &DpConfig,
    traj: &Trajectory,
) -> Result<VelocityDecompositionTrack> {
    let disc = Discretization::new(problem, cfg)?;
    let model = CostModel::new(&problem.f, &disc)?;
    check_grid(&disc, traj)?;
    let mut intervals = Vec::with_capacity(traj.n_t());
    let mut support_radius: f64 = 0.0;
    for (i, &xi) in traj.velocities.iter().enumerate() {
        let env = model.envelope(i);
        let d = env.decompose(xi)?;
        d.check(SPLIT_TOL * (1.0 + libm::fabs(d.envelope_value)))?;
        for &q in &d.points {
            support_radius = support_radius.max(libm::fabs(q));
        }
        intervals.push(d);
    }
    let nontrivial = intervals.iter().filter(|d| !d.is_trivial()).count();
    Ok(VelocityDecompositionTrack {
        intervals,
        support_radius,
        nontrivial,
    })
}

fn check_grid(disc: &Discretization, traj: &Trajectory) -> Result<()> {
    if traj.times.len() != disc.times.len() {
        return Err(Error::InvalidInput(format!(
            "trajectory has {} intervals, the grid {}",
            traj.n_t(),
            disc.n_t()
        )));
    }
    let h = disc.h;
    for (a, b) in traj.times.iter().zip(&disc.times) {
        if libm::fabs(a - b) > 1e-9 * h {
            return Err(Error::InvalidInput(format!(
                "trajectory time {a} is off the grid node {b}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ReconstructedTrajectory {
    /// Refined grid: every original interval contributes one or two pieces.
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    pub velocities: Vec<f64>,
    /// 0 for the first piece of an interval, 1 for the second.
    pub piece: Vec<u8>,
    /// Original interval of each piece.
    pub interval: Vec<usize>,
    /// Σ over pieces of length·f(tᵢ, q).
    pub f_cost: f64,
    /// Σ over pieces of length·g(start time, start state).
    pub g_cost: f64,
    pub total: f64,
    /// max |Σλq − ξᵢ| over intervals.
    pub mean_error: f64,
}

impl ReconstructedTrajectory {
    /// States at the original grid nodes.
    pub fn node_states(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.push(self.states[0]);
        for k in 0..self.piece.len() {
            let last_piece = k + 1 == self.piece.len() || self.interval[k + 1] != self.interval[k];
            if last_piece {
                out.push(self.states[k + 1]);
            }
        }
        out
    }
}

/// Midpoint-rule g cost of a piece.
fn piece_cost(problem: &Problem, t0: f64, x0: f64, len: f64, v: f64) -> f64 {
    len * problem.g.eval(t0 + 0.5 * len, x0 + 0.5 * len * v)
}

/// Lay out every split interval as two contiguous pieces, choosing the
/// order with the smaller midpoint g cost.
pub fn rearrange(
    problem: &Problem,
    traj: &Trajectory,
    track: &VelocityDecompositionTrack,
) -> Result<ReconstructedTrajectory> {
    if track.intervals.len() != traj.n_t() {
        return Err(Error::InvalidInput(format!(
            "track has {} intervals, trajectory {}",
            track.intervals.len(),
            traj.n_t()
        )));
    }
    let mut times = Vec::with_capacity(2 * traj.n_t() + 1);
    let mut states = Vec::with_capacity(2 * traj.n_t() + 1);
    let mut velocities = Vec::with_capacity(2 * traj.n_t());
    let mut piece = Vec::with_capacity(2 * traj.n_t());
    let mut interval = Vec::with_capacity(2 * traj.n_t());
    let (mut f_cost, mut g_cost) = (0.0, 0.0);
    let mut mean_error: f64 = 0.0;
    times.push(traj.times[0]);
    states.push(traj.states[0]);
    for (i, d) in track.intervals.iter().enumerate() {
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        let (x0, x1) = (traj.states[i], traj.states[i + 1]);
        let h = t1 - t0;
        if libm::fabs(d.target - traj.velocities[i]) > SPLIT_TOL * (1.0 + libm::fabs(d.target)) {
            return Err(Error::InvalidInput(format!(
                "track velocity {} does not match trajectory velocity {} on interval {i}",
                d.target, traj.velocities[i]
            )));
        }
        let mean: f64 = d.weights.iter().zip(&d.points).map(|(w, q)| w * q).sum();
        mean_error = mean_error.max(libm::fabs(mean - traj.velocities[i]));
        let pieces: Vec<(f64, f64, f64)> = if d.is_trivial() {
            alloc::vec![(1.0, traj.velocities[i], d.point_values[0])]
        } else {
            let left = (d.weights[0], d.points[0], d.point_values[0]);
            let right = (d.weights[1], d.points[1], d.point_values[1]);
            let cost = |first: (f64, f64, f64)| {
                let len = first.0 * h;
                let xm = x0 + len * first.1;
                piece_cost(problem, t0, x0, len, first.1)
                    + piece_cost(problem, t0 + len, xm, h - len, (x1 - xm) / (h - len))
            };
            let (c_left, c_right) = (cost(left), cost(right));
            let heavy_first = if right.0 > left.0 { (right, left) } else { (left, right) };
            let order = if libm::fabs(c_left - c_right) <= ORDER_TIE_TOL * (1.0 + libm::fabs(c_left)) {
                heavy_first
            } else if c_left < c_right {
                (left, right)
            } else {
                (right, left)
            };
            alloc::vec![order.0, order.1]
        };
        let last = pieces.len() - 1;
        let mut t = t0;
        let mut x = x0;
        for (k, &(w, q, fv)) in pieces.iter().enumerate() {
            let len = if k == last { t1 - t } else { w * h };
            let (t_next, x_next) = if k == last { (t1, x1) } else { (t + len, x + len * q) };
            let v = if k == last { (x_next - x) / len } else { q };
            f_cost += w * h * fv;
            g_cost += len * problem.g.eval(t, x);
            velocities.push(v);
            piece.push(k as u8);
            interval.push(i);
            times.push(t_next);
            states.push(x_next);
            t = t_next;
            x = x_next;
        }
    }
    Ok(ReconstructedTrajectory {
        times,
        states,
        velocities,
        piece,
        interval,
        f_cost,
        g_cost,
        total: f_cost + g_cost,
        mean_error,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct CostComparison {
    pub f_relaxed: f64,
    pub g_relaxed: f64,
    pub total_relaxed: f64,
    pub f_reconstructed: f64,
    pub g_reconstructed: f64,
    pub total_reconstructed: f64,
    pub f_difference: f64,
    pub g_difference: f64,
    /// total_reconstructed − total_relaxed.
    pub total_difference: f64,
    /// N·1e-9.
    pub f_tolerance: f64,
    pub lip_g: f64,
    pub support_radius: f64,
    /// Lip_g·ξ̄·h·T plus the caller's extra tolerance.
    pub gap_tolerance: f64,
    pub f_identity_holds: bool,
    pub pass: bool,
}

/// Compare relaxed and reconstructed costs.
pub fn compare_costs(
    problem: &Problem,
    cfg: &DpConfig,
    relaxed: &Trajectory,
    recon: &ReconstructedTrajectory,
    extra_tol: f64,
) -> Result<CostComparison> {
    let disc = Discretization::new(problem, cfg)?;
    let model = CostModel::new(&problem.f, &disc)?;
    check_grid(&disc, relaxed)?;
    let total_relaxed = relaxed_cost(problem, &model, relaxed)?;
    let g_relaxed: f64 = (0..relaxed.n_t())
        .map(|i| {
            (relaxed.times[i + 1] - relaxed.times[i])
                * problem.g.eval(relaxed.times[i], relaxed.states[i])
        })
        .sum();
    let f_relaxed = total_relaxed - g_relaxed;
    let n = relaxed.n_t() as f64;
    let f_tolerance = n * SPLIT_TOL;
    let f_difference = recon.f_cost - f_relaxed;
    let g_difference = recon.g_cost - g_relaxed;
    let total_difference = recon.total - total_relaxed;
    let (lo, hi) = relaxed
        .states
        .iter()
        .chain(&recon.states)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let lip_g = problem.g.x_lipschitz_on(lo, hi, problem.horizon);
    let support_radius = recon
        .velocities
        .iter()
        .fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let h = problem.horizon / n;
    let gap_tolerance = lip_g * support_radius * h * problem.horizon + extra_tol;
    let f_identity_holds = libm::fabs(f_difference) <= f_tolerance;
    let pass = f_identity_holds && total_difference <= gap_tolerance;
    Ok(CostComparison {
        f_relaxed,
        g_relaxed,
        total_relaxed,
        f_reconstructed: recon.f_cost,
        g_reconstructed: recon.g_cost,
        total_reconstructed: recon.total,
        f_difference,
        g_difference,
        total_difference,
        f_tolerance,
        lip_g,
        support_radius,
        gap_tolerance,
        f_identity_holds,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{StateFn, VelocityFn};
    use crate::family::{IntegrandFamily, StateFamily};
    use crate::relax::solve_relaxed;

    fn double_well(g: StateFamily, n: usize) -> (Problem, DpConfig) {
        let p = Problem {
            horizon: 1.0,
            a: 0.0,
            b: 0.0,
            f: IntegrandFamily::autonomous(VelocityFn::DoubleWell),
            g,
            state_box: (-1.0, 1.0),
            velocity_cap: 2.0,
        };
        (p, DpConfig::new(n, 2 * n + 1))
    }

    #[test]
    fn zero_velocity_splits_evenly() {
        let (p, cfg) = double_well(StateFamily::zero(), 8);
        let tr = Trajectory::from_states(
            (0..=8).map(|i| i as f64 / 8.0).collect(),
            alloc::vec![0.0; 9],
        )
        .unwrap();
        let track = decompose_velocities(&p, &cfg, &tr).unwrap();
        for d in &track.intervals {
            assert_eq!(d.weights, alloc::vec![0.5, 0.5]);
            assert_eq!(d.points, alloc::vec![-1.0, 1.0]);
        }
        assert_eq!(track.support_radius, 1.0);
        let rec = rearrange(&p, &tr, &track).unwrap();
        assert!(rec.velocities.iter().all(|v| libm::fabs(libm::fabs(*v) - 1.0) < 1e-12));
        assert_eq!(rec.node_states(), tr.states);
        assert_eq!(rec.f_cost, 0.0);
        assert_eq!(rec.piece.len(), 16);
    }

    #[test]
    fn strictly_convex_reconstruction_is_identity() {
        let p = Problem {
            f: IntegrandFamily::autonomous(VelocityFn::PowerP { p: 2.0 }),
            b: 1.0,
            state_box: (0.0, 1.0),
            ..double_well(StateFamily::zero(), 8).0
        };
        let cfg = DpConfig::new(8, 9);
        let tr = solve_relaxed(&p, &cfg).unwrap();
        let track = decompose_velocities(&p, &cfg, &tr).unwrap();
        assert_eq!(track.nontrivial, 0);
        let rec = rearrange(&p, &tr, &track).unwrap();
        assert_eq!(rec.times, tr.times);
        assert_eq!(rec.states, tr.states);
        assert_eq!(rec.velocities, tr.velocities);
        let cmp = compare_costs(&p, &cfg, &tr, &rec, 0.0).unwrap();
        assert_eq!(cmp.total_difference, 0.0);
        assert!(cmp.pass);
    }

    #[test]
    fn concave_state_cost_prefers_larger_excursion() {
        let g = StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: 1.0 });
        let (p, cfg) = double_well(g, 4);
        // ξ = 0 from x = 0.5: going outward first lowers ∫ −x²
        let tr = Trajectory::from_states(
            alloc::vec![0.0, 0.25, 0.5, 0.75, 1.0],
            alloc::vec![0.0, 0.25, 0.25, 0.0, 0.0],
        )
        .unwrap();
        let track = decompose_velocities(&p, &cfg, &tr).unwrap();
        let rec = rearrange(&p, &tr, &track).unwrap();
        let k = rec.interval.iter().position(|&i| i == 1).unwrap();
        assert_eq!(rec.velocities[k], 1.0);
        assert_eq!(rec.node_states(), tr.states);
    }

    #[test]
    fn mismatched_track_is_rejected() {
        let (p, cfg) = double_well(StateFamily::zero(), 4);
        let tr = Trajectory::from_states(
            alloc::vec![0.0, 0.25, 0.5, 0.75, 1.0],
            alloc::vec![0.0; 5],
        )
        .unwrap();
        let mut track = decompose_velocities(&p, &cfg, &tr).unwrap();
        track.intervals.pop();
        assert!(matches!(rearrange(&p, &tr, &track), Err(Error::InvalidInput(_))));
    }
}
