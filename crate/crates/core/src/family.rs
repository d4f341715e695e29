//! Time-modulated integrands built from catalog entries:
//! f(t, ξ) = f₀(ξ) + c(t)·f₁(ξ) and g(t, x) = g₀(x) + d(t)·g₁(x).

use crate::catalog::{StateFn, TimeFactor, VelocityFn};
use crate::convex::{lower_convex_hull, ConvexEnvelope, Grid1D, SampledFunction};
use crate::error::Result;

#[cfg(feature = "serde")]
use serde::Serialize;

/// Velocity integrand family f(t, ξ) = f₀(ξ) + c(t)·f₁(ξ).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct IntegrandFamily {
    pub base: VelocityFn,
    pub modulation: VelocityFn,
    pub time_factor: TimeFactor,
}

impl IntegrandFamily {
    /// A time-independent integrand.
    pub fn autonomous(base: VelocityFn) -> Self {
        Self {
            base,
            modulation: VelocityFn::Zero,
            time_factor: TimeFactor::Const { value: 0.0 },
        }
    }

    pub fn new(base: VelocityFn, modulation: VelocityFn, time_factor: TimeFactor) -> Self {
        Self {
            base,
            modulation,
            time_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.modulation.validate()
    }

    pub fn eval(&self, t: f64, xi: f64) -> f64 {
        if self.modulation.is_zero() {
            return self.base.eval(xi);
        }
        self.base.eval(xi) + self.time_factor.eval(t) * self.modulation.eval(xi)
    }

    pub fn is_autonomous(&self) -> bool {
        self.modulation.is_zero() || self.time_factor.is_constant()
    }

    /// Lipschitz constant in t of f(·, ξ), uniform over ξ in `points`.
    pub fn t_lipschitz_over(&self, points: impl IntoIterator<Item = f64>) -> f64 {
        if self.is_autonomous() {
            return 0.0;
        }
        let lip = self.time_factor.lipschitz();
        points
            .into_iter()
            .map(|xi| lip * libm::fabs(self.modulation.eval(xi)))
            .fold(0.0, f64::max)
    }

    pub fn sample(&self, t: f64, grid: &Grid1D) -> Result<SampledFunction> {
        SampledFunction::sample(grid.clone(), |xi| self.eval(t, xi))
    }

    /// Discrete f**(t, ·) on `grid`.
    pub fn envelope(&self, t: f64, grid: &Grid1D) -> Result<ConvexEnvelope> {
        lower_convex_hull(&self.sample(t, grid)?)
    }
}

/// State integrand family g(t, x) = g₀(x) + d(t)·g₁(x).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct StateFamily {
    pub base: StateFn,
    pub modulation: StateFn,
    pub time_factor: TimeFactor,
}

impl StateFamily {
    pub fn zero() -> Self {
        Self::autonomous(StateFn::Zero)
    }

    pub fn autonomous(base: StateFn) -> Self {
        Self {
            base,
            modulation: StateFn::Zero,
            time_factor: TimeFactor::Const { value: 0.0 },
        }
    }

    pub fn new(base: StateFn, modulation: StateFn, time_factor: TimeFactor) -> Self {
        Self {
            base,
            modulation,
            time_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.modulation.validate()
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if self.modulation.is_zero() {
            return self.base.eval(x);
        }
        self.base.eval(x) + self.time_factor.eval(t) * self.modulation.eval(x)
    }

    pub fn is_autonomous(&self) -> bool {
        self.modulation.is_zero() || self.time_factor.is_constant()
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.modulation.is_zero()
    }

    /// Upper bound on the x-Lipschitz constant of g(t, ·) on `[lo, hi]`
    /// for t in `[0, horizon]`.
    pub fn x_lipschitz_on(&self, lo: f64, hi: f64, horizon: f64) -> f64 {
        let base = self.base.lipschitz_on(lo, hi);
        if self.modulation.is_zero() {
            return base;
        }
        let c_max = libm::fabs(self.time_factor.eval(0.0))
            + self.time_factor.lipschitz() * horizon;
        base + c_max * self.modulation.lipschitz_on(lo, hi)
    }
}
