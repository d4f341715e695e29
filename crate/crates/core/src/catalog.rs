//! Closed catalog of the scalar functions a problem may be assembled from.
//!
//! Velocity integrands, state integrands, time factors and Nagumo penalties
//! are all plain enums: evaluation is deterministic and every entry carries
//! what the certificates need (Lipschitz constants for time factors, a
//! superlinearity probe for Nagumo functions).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Piecewise-linear table on a strictly increasing grid.
///
/// Outside the grid the first/last segment is extended linearly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Table1D {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Table1D {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::Degenerate(format!(
                "table needs at least 2 nodes, got {}",
                grid.len()
            )));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "table grid has {} nodes but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("table entries must be finite".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "table grid must be strictly increasing".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len();
        // index of the segment [k, k+1] used for interpolation/extrapolation
        let k = match self.grid.partition_point(|&g| g <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Largest absolute slope over the table segments.
    pub fn max_abs_slope(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| libm::fabs((v[1] - v[0]) / (g[1] - g[0])))
            .fold(0.0, f64::max)
    }
}

/// Velocity integrands ξ ↦ f(ξ).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum VelocityFn {
    /// |ξ|^p with p > 1.
    PowerP { p: f64 },
    Abs,
    /// (ξ² − 1)².
    DoubleWell,
    /// |ξ| − √(1 + |ξ|) + 1: convex, linear growth, still in class E.
    LinearMinusSqrt,
    /// √(1 + ξ²).
    SqrtOnePlus,
    Affine { slope: f64, intercept: f64 },
    Table { table: Table1D },
    Zero,
}

impl VelocityFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            VelocityFn::PowerP { p } if !(p.is_finite() && *p > 1.0) => Err(
                Error::InvalidInput(format!("power_p requires p > 1, got {p}")),
            ),
            VelocityFn::Affine { slope, intercept }
                if !(slope.is_finite() && intercept.is_finite()) =>
            {
                Err(Error::InvalidInput("affine coefficients must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let s = libm::fabs(xi);
        match self {
            VelocityFn::PowerP { p } => libm::pow(s, *p),
            VelocityFn::Abs => s,
            VelocityFn::DoubleWell => {
                let w = xi * xi - 1.0;
                w * w
            }
            VelocityFn::LinearMinusSqrt => s - libm::sqrt(1.0 + s) + 1.0,
            VelocityFn::SqrtOnePlus => libm::sqrt(1.0 + xi * xi),
            VelocityFn::Affine { slope, intercept } => slope * xi + intercept,
            VelocityFn::Table { table } => table.eval(xi),
            VelocityFn::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            VelocityFn::Zero => true,
            VelocityFn::Affine { slope, intercept } => *slope == 0.0 && *intercept == 0.0,
            _ => false,
        }
    }
}

/// State integrands x ↦ g(x).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum StateFn {
    Zero,
    Affine { slope: f64, intercept: f64 },
    /// −κx² with κ ≥ 0.
    ConcaveQuadratic { kappa: f64 },
    Table { table: Table1D },
}

impl StateFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            StateFn::ConcaveQuadratic { kappa } if !(kappa.is_finite() && *kappa >= 0.0) => Err(
                Error::InvalidInput(format!("concave_quadratic requires kappa >= 0, got {kappa}")),
            ),
            StateFn::Affine { slope, intercept }
                if !(slope.is_finite() && intercept.is_finite()) =>
            {
                Err(Error::InvalidInput("affine coefficients must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            StateFn::Zero => 0.0,
            StateFn::Affine { slope, intercept } => slope * x + intercept,
            StateFn::ConcaveQuadratic { kappa } => -kappa * x * x,
            StateFn::Table { table } => table.eval(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            StateFn::Zero => true,
            StateFn::Affine { slope, intercept } => *slope == 0.0 && *intercept == 0.0,
            StateFn::ConcaveQuadratic { kappa } => *kappa == 0.0,
            StateFn::Table { .. } => false,
        }
    }

    /// Lipschitz constant of x ↦ g(x) on `[lo, hi]`.
    pub fn lipschitz_on(&self, lo: f64, hi: f64) -> f64 {
        match self {
            StateFn::Zero => 0.0,
            StateFn::Affine { slope, .. } => libm::fabs(*slope),
            StateFn::ConcaveQuadratic { kappa } => 2.0 * kappa * libm::fabs(lo).max(libm::fabs(hi)),
            StateFn::Table { table } => table.max_abs_slope(),
        }
    }
}

/// Time factors t ↦ c(t); every entry is Lipschitz.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum TimeFactor {
    Const { value: f64 },
    /// c0 + c1·t
    AffineT { c0: f64, c1: f64 },
    /// κ·sin(ωt)
    Sine { kappa: f64, omega: f64 },
}

impl TimeFactor {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFactor::Const { value } => *value,
            TimeFactor::AffineT { c0, c1 } => c0 + c1 * t,
            TimeFactor::Sine { kappa, omega } => kappa * libm::sin(omega * t),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            TimeFactor::Const { .. } => 0.0,
            TimeFactor::AffineT { c1, .. } => libm::fabs(*c1),
            TimeFactor::Sine { kappa, omega } => libm::fabs(kappa * omega),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.lipschitz() == 0.0
    }
}

/// Nagumo functions θ: convex, increasing, θ(r)/r → ∞.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "name", rename_all = "snake_case"))]
pub enum NagumoFn {
    /// r^p, p > 1.
    PowerP { p: f64 },
    /// eʳ − 1 − r.
    ExpMinusLinear,
}

impl NagumoFn {
    pub fn eval(&self, r: f64) -> f64 {
        let r = libm::fabs(r);
        match self {
            NagumoFn::PowerP { p } => libm::pow(r, *p),
            NagumoFn::ExpMinusLinear => libm::expm1(r) - r,
        }
    }

    /// Sampled check of convexity, monotonicity and superlinearity on
    /// `schedule` (increasing positive radii, at least 3 entries).
    pub fn probe(&self, schedule: &[f64]) -> Result<()> {
        if let NagumoFn::PowerP { p } = self {
            if !(p.is_finite() && *p > 1.0) {
                return Err(Error::InvalidInput(format!(
                    "Nagumo power_p requires p > 1, got {p}"
                )));
            }
        }
        if schedule.len() < 3 || schedule.windows(2).any(|w| w[0] >= w[1]) || schedule[0] <= 0.0
        {
            return Err(Error::InvalidInput(
                "Nagumo probe schedule must be >= 3 increasing positive radii".into(),
            ));
        }
        let vals: Vec<f64> = schedule.iter().map(|&r| self.eval(r)).collect();
        if vals.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::CertificateFailure("Nagumo function not increasing".into()));
        }
        for k in 1..schedule.len() - 1 {
            let (r0, r1, r2) = (schedule[k - 1], schedule[k], schedule[k + 1]);
            let s01 = (vals[k] - vals[k - 1]) / (r1 - r0);
            let s12 = (vals[k + 1] - vals[k]) / (r2 - r1);
            if s12 < s01 * (1.0 - 1e-12) {
                return Err(Error::CertificateFailure(format!(
                    "Nagumo function not convex near r = {r1}"
                )));
            }
        }
        let ratios: Vec<f64> = schedule.iter().zip(&vals).map(|(r, v)| v / r).collect();
        if ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::CertificateFailure(
                "theta(r)/r does not increase along the probe schedule".into(),
            ));
        }
        Ok(())
    }
}
