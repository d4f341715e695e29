//! One-dimensional discrete convex analysis: lower hulls of sampled
//! epigraphs, their subgradients, conjugates and two-point decompositions.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Absolute tolerance on the sum of simplex weights.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative tolerance on barycentric reconstruction of the target point.
pub const BARYCENTER_REL_TOL: f64 = 1e-9;

/// Relative distance below which a query is identified with a breakpoint.
const SNAP_REL: f64 = 1e-11;

/// Strictly increasing, finite velocity grid with at least two points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Grid1D {
    points: Vec<f64>,
}

impl Grid1D {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Degenerate(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("grid points must be finite".into()));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "grid must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(Self { points })
    }

    /// `n` equispaced points on `[lo, hi]`, endpoints exact.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(lo < hi) {
            return Err(Error::Degenerate(format!(
                "uniform grid needs n >= 2 and lo < hi (n = {n}, [{lo}, {hi}])"
            )));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        points[n - 1] = hi;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

/// An integrand slice tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SampledFunction {
    grid: Grid1D,
    values: Vec<f64>,
    lower_bound: f64,
}

impl SampledFunction {
    /// Samples with `lower_bound` set to the smallest value.
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        let lower_bound = values.iter().copied().fold(f64::INFINITY, f64::min);
        Self::with_lower_bound(grid, values, lower_bound)
    }

    pub fn with_lower_bound(grid: Grid1D, values: Vec<f64>, lower_bound: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !lower_bound.is_finite() {
            return Err(Error::InvalidInput("sampled values must be finite".into()));
        }
        if let Some(v) = values.iter().find(|&&v| v < lower_bound) {
            return Err(Error::InvalidInput(format!(
                "value {v} falls below the declared lower bound {lower_bound}"
            )));
        }
        Ok(Self {
            grid,
            values,
            lower_bound,
        })
    }

    /// Tabulate `f` on `grid`.
    pub fn sample(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

/// Closed interval of slopes `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SubgradientInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SubgradientInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

/// Weights and support points realizing an envelope value as a convex
/// combination of sampled values.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct CaratheodoryDecomposition<P> {
    pub weights: Vec<f64>,
    pub points: Vec<P>,
    pub point_values: Vec<f64>,
    pub target: P,
    pub envelope_value: f64,
}

impl<P> CaratheodoryDecomposition<P> {
    pub fn is_trivial(&self) -> bool {
        self.weights.len() == 1
    }

    /// Σλⱼ f(ξⱼ).
    pub fn combined_value(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.point_values)
            .map(|(l, v)| l * v)
            .sum()
    }

    fn check_weights(&self) -> Result<()> {
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Inconsistent("negative decomposition weight".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if libm::fabs(sum - 1.0) > WEIGHT_SUM_TOL {
            return Err(Error::Inconsistent(format!("weights sum to {sum}")));
        }
        Ok(())
    }

    fn check_value(&self, value_tol: f64) -> Result<()> {
        let combined = self.combined_value();
        if libm::fabs(combined - self.envelope_value) > value_tol {
            return Err(Error::Inconsistent(format!(
                "combined value {combined} differs from envelope value {}",
                self.envelope_value
            )));
        }
        Ok(())
    }
}

impl CaratheodoryDecomposition<f64> {
    /// Verify the simplex, barycenter and value identities.
    pub fn check(&self, value_tol: f64) -> Result<()> {
        self.check_weights()?;
        let mean: f64 = self
            .weights
            .iter()
            .zip(&self.points)
            .map(|(l, x)| l * x)
            .sum();
        if libm::fabs(mean - self.target) > BARYCENTER_REL_TOL * (1.0 + libm::fabs(self.target)) {
            return Err(Error::Inconsistent(format!(
                "barycenter {mean} differs from target {}",
                self.target
            )));
        }
        self.check_value(value_tol)
    }
}

impl CaratheodoryDecomposition<[f64; 2]> {
    pub fn check(&self, value_tol: f64) -> Result<()> {
        self.check_weights()?;
        for axis in 0..2 {
            let mean: f64 = self
                .weights
                .iter()
                .zip(&self.points)
                .map(|(l, x)| l * x[axis])
                .sum();
            let target = self.target[axis];
            if libm::fabs(mean - target) > BARYCENTER_REL_TOL * (1.0 + libm::fabs(target)) {
                return Err(Error::Inconsistent(format!(
                    "barycenter coordinate {mean} differs from target {target}"
                )));
            }
        }
        self.check_value(value_tol)
    }
}

/// Where a query point sits relative to the hull vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HullLocation {
    Vertex(usize),
    /// Strictly inside the edge `[k, k + 1]`.
    Edge(usize),
}

/// Piecewise-linear lower convex hull of a sampled function.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ConvexEnvelope {
    breakpoints: Vec<f64>,
    hull_values: Vec<f64>,
    edge_slopes: Vec<f64>,
    /// Index of each breakpoint in the originating sample grid.
    vertex_indices: Vec<usize>,
}

impl ConvexEnvelope {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn hull_values(&self) -> &[f64] {
        &self.hull_values
    }

    pub fn edge_slopes(&self) -> &[f64] {
        &self.edge_slopes
    }

    pub fn vertex_indices(&self) -> &[usize] {
        &self.vertex_indices
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.breakpoints.len() - 1])
    }

    fn snap_tol(&self, k: usize) -> f64 {
        let x = self.breakpoints[k];
        let mut tol = SNAP_REL * (1.0 + libm::fabs(x));
        if k > 0 {
            tol = tol.min(1e-6 * (x - self.breakpoints[k - 1]));
        }
        if k + 1 < self.breakpoints.len() {
            tol = tol.min(1e-6 * (self.breakpoints[k + 1] - x));
        }
        tol
    }

    /// Locate `xi`, identifying it with a breakpoint when within rounding
    /// distance. Errors when outside the hull domain.
    pub fn locate(&self, xi: f64) -> Result<HullLocation> {
        let n = self.breakpoints.len();
        let (lo, hi) = self.domain();
        if !xi.is_finite() {
            return Err(Error::OutOfDomain { value: xi, lo, hi });
        }
        let k = self.breakpoints.partition_point(|&b| b <= xi);
        if k > 0 && libm::fabs(xi - self.breakpoints[k - 1]) <= self.snap_tol(k - 1) {
            return Ok(HullLocation::Vertex(k - 1));
        }
        if k < n && libm::fabs(self.breakpoints[k] - xi) <= self.snap_tol(k) {
            return Ok(HullLocation::Vertex(k));
        }
        if k == 0 || k == n {
            return Err(Error::OutOfDomain { value: xi, lo, hi });
        }
        Ok(HullLocation::Edge(k - 1))
    }

    /// Envelope value by linear interpolation on the containing edge.
    pub fn evaluate(&self, xi: f64) -> Result<f64> {
        Ok(match self.locate(xi)? {
            HullLocation::Vertex(k) => self.hull_values[k],
            HullLocation::Edge(k) => {
                self.hull_values[k] + self.edge_slopes[k] * (xi - self.breakpoints[k])
            }
        })
    }

    /// Subdifferential of the envelope; the missing outward slope at the
    /// domain ends is replaced by the extreme edge slope.
    pub fn subdifferential(&self, xi: f64) -> Result<SubgradientInterval> {
        let last = self.edge_slopes.len() - 1;
        Ok(match self.locate(xi)? {
            HullLocation::Vertex(0) => SubgradientInterval {
                lo: self.edge_slopes[0],
                hi: self.edge_slopes[0],
            },
            HullLocation::Vertex(k) if k == self.breakpoints.len() - 1 => SubgradientInterval {
                lo: self.edge_slopes[last],
                hi: self.edge_slopes[last],
            },
            HullLocation::Vertex(k) => SubgradientInterval {
                lo: self.edge_slopes[k - 1],
                hi: self.edge_slopes[k],
            },
            HullLocation::Edge(k) => SubgradientInterval {
                lo: self.edge_slopes[k],
                hi: self.edge_slopes[k],
            },
        })
    }

    /// Two-point (or single-point) decomposition of the envelope at `xi`
    /// into hull vertices, which are genuine samples.
    pub fn decompose(&self, xi: f64) -> Result<CaratheodoryDecomposition<f64>> {
        let envelope_value = self.evaluate(xi)?;
        Ok(match self.locate(xi)? {
            HullLocation::Vertex(k) => CaratheodoryDecomposition {
                weights: alloc::vec![1.0],
                points: alloc::vec![self.breakpoints[k]],
                point_values: alloc::vec![self.hull_values[k]],
                target: xi,
                envelope_value,
            },
            HullLocation::Edge(k) => {
                let (xl, xr) = (self.breakpoints[k], self.breakpoints[k + 1]);
                let wl = (xr - xi) / (xr - xl);
                CaratheodoryDecomposition {
                    weights: alloc::vec![wl, 1.0 - wl],
                    points: alloc::vec![xl, xr],
                    point_values: alloc::vec![self.hull_values[k], self.hull_values[k + 1]],
                    target: xi,
                    envelope_value,
                }
            }
        })
    }

    /// Breakpoint where the envelope is minimal (smallest index on ties).
    pub fn argmin_vertex(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.hull_values.iter().enumerate() {
            if v < self.hull_values[best] {
                best = k;
            }
        }
        best
    }

    /// Conjugate of the envelope, max over its vertices of p·ξ − f**(ξ).
    pub fn conjugate(&self, p: f64) -> f64 {
        self.breakpoints
            .iter()
            .zip(&self.hull_values)
            .map(|(x, v)| p * x - v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Lower boundary of the convex hull of `{(ξᵢ, fᵢ)}` (monotone chain).
///
/// Collinear interior samples are dropped, so every breakpoint is a strict
/// vertex and decompositions use the fewest support points.
pub fn lower_convex_hull(samples: &SampledFunction) -> Result<ConvexEnvelope> {
    let xs = samples.grid().points();
    let ys = samples.values();
    if xs.len() < 2 {
        return Err(Error::Degenerate("need at least 2 samples".into()));
    }
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if a -> b -> i turns counterclockwise
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let breakpoints: Vec<f64> = hull.iter().map(|&i| xs[i]).collect();
    let hull_values: Vec<f64> = hull.iter().map(|&i| ys[i]).collect();
    let mut edge_slopes: Vec<f64> = breakpoints
        .windows(2)
        .zip(hull_values.windows(2))
        .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    // rounding in the chord slopes must not break monotonicity
    for k in 1..edge_slopes.len() {
        if edge_slopes[k] < edge_slopes[k - 1] {
            edge_slopes[k] = edge_slopes[k - 1];
        }
    }
    Ok(ConvexEnvelope {
        breakpoints,
        hull_values,
        edge_slopes,
        vertex_indices: hull,
    })
}

/// Discrete envelope value at `xi`.
pub fn evaluate_envelope(env: &ConvexEnvelope, xi: f64) -> Result<f64> {
    env.evaluate(xi)
}

pub fn subdifferential(env: &ConvexEnvelope, xi: f64) -> Result<SubgradientInterval> {
    env.subdifferential(xi)
}

/// Decompose `env(xi)` into samples of `samples`; `env` must be the hull of
/// `samples`.
pub fn caratheodory_decompose(
    samples: &SampledFunction,
    env: &ConvexEnvelope,
    xi: f64,
) -> Result<CaratheodoryDecomposition<f64>> {
    let xs = samples.grid().points();
    let ys = samples.values();
    let consistent = env
        .vertex_indices
        .iter()
        .zip(env.breakpoints.iter().zip(&env.hull_values))
        .all(|(&i, (&x, &v))| i < ys.len() && xs[i] == x && ys[i] == v);
    if !consistent {
        return Err(Error::InvalidInput(
            "envelope was not built from these samples".into(),
        ));
    }
    env.decompose(xi)
}

/// Discrete Legendre–Fenchel conjugate: max over the grid of p·ξᵢ − fᵢ.
pub fn legendre_conjugate(samples: &SampledFunction, p: f64) -> f64 {
    samples
        .grid()
        .points()
        .iter()
        .zip(samples.values())
        .map(|(x, v)| p * x - v)
        .fold(f64::NEG_INFINITY, f64::max)
}
