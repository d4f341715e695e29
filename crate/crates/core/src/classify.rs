//! Numerical certificates for the structural hypotheses on the integrand.
//!
//! Every limit "as |ξ| → ∞" is replaced by a declared radius schedule and
//! a threshold, so a verdict is a statement about the probed range only.

use alloc::format;
use alloc::vec::Vec;

use crate::convex::{lower_convex_hull, ConvexEnvelope, Grid1D, SampledFunction};
use crate::error::{Error, Result};
use crate::family::{IntegrandFamily, StateFamily};

#[cfg(feature = "serde")]
use serde::Serialize;

/// Default divergence threshold for the class-E certificate (cost units).
pub const DEFAULT_THRESHOLD: f64 = 1e3;
/// Tolerance on monotonicity of χ(R).
pub const CHI_MONOTONE_TOL: f64 = 1e-9;
/// Stabilization window for a "bounded" verdict.
pub const CHI_STABLE_TOL: f64 = 1e-6;

/// Radii 10^(k/2), k = 0..=16.
pub fn default_radius_schedule() -> Vec<f64> {
    (0..=16).map(|k| libm::pow(10.0, k as f64 / 2.0)).collect()
}

/// Sampling of the probe boxes built around each radius.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ProbeSettings {
    /// Points in each probe grid (odd, so the base point is sampled).
    pub grid_points: usize,
    /// The probe box at radius R is `[-box_factor·R, box_factor·R]`.
    pub box_factor: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            grid_points: 4001,
            box_factor: 2.0,
        }
    }
}

fn probe_envelope(
    family: &IntegrandFamily,
    t: f64,
    center: f64,
    radius: f64,
    probe: &ProbeSettings,
) -> Result<(SampledFunction, ConvexEnvelope)> {
    let half = probe.box_factor * radius;
    let grid = Grid1D::uniform(center - half, center + half, probe.grid_points)?;
    let samples = family.sample(t, &grid)?;
    let env = lower_convex_hull(&samples)?;
    Ok((samples, env))
}

/// f**(ξ) − p·ξ with p the midpoint of the subdifferential.
pub fn erdmann_value(env: &ConvexEnvelope, xi: f64) -> Result<f64> {
    let p = env.subdifferential(xi)?.midpoint();
    Ok(env.evaluate(xi)? - p * xi)
}

/// sup over p ∈ ∂f**(ξ) of f**(ξ) − p·ξ; on piecewise-linear data the sup
/// sits at an endpoint of the interval.
pub fn erdmann_sup(env: &ConvexEnvelope, xi: f64) -> Result<f64> {
    let sub = env.subdifferential(xi)?;
    let v = env.evaluate(xi)?;
    Ok((v - sub.lo * xi).max(v - sub.hi * xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ClassEVerdict {
    Diverges,
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct ClassECertificate {
    pub radii: Vec<f64>,
    pub chi_values: Vec<f64>,
    pub verdict: ClassEVerdict,
    /// Least-squares slope of χ against R over the last half of the schedule.
    pub divergence_slope: f64,
    pub threshold: f64,
    pub t_samples: Vec<f64>,
}

/// χ(R) at one radius together with the magnitude of the terms it was
/// computed from (for rounding-aware comparisons).
fn chi_at_radius(
    family: &IntegrandFamily,
    t_grid: &[f64],
    radius: f64,
    probe: &ProbeSettings,
) -> Result<(f64, f64)> {
    let mut chi = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    for &t in t_grid {
        let (samples, env) = probe_envelope(family, t, 0.0, radius, probe)?;
        for &xi in samples.grid().points() {
            if libm::fabs(xi) <= radius {
                continue;
            }
            let v = env.evaluate(xi)?;
            let sub = env.subdifferential(xi)?;
            let e = (v - sub.lo * xi).max(v - sub.hi * xi);
            scale = scale.max(libm::fabs(v) + libm::fabs(sub.lo * xi).max(libm::fabs(sub.hi * xi)));
            chi = chi.max(e);
        }
    }
    if !chi.is_finite() {
        return Err(Error::CertificateFailure(format!(
            "no probe point beyond radius {radius}"
        )));
    }
    Ok((chi, scale))
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Certificate that sup over t and |ξ| > R of the Erdmann expression of
/// f** tends to −∞ along `radii`.
pub fn class_e_certificate(
    family: &IntegrandFamily,
    t_grid: &[f64],
    radii: &[f64],
    threshold: f64,
    probe: &ProbeSettings,
) -> Result<ClassECertificate> {
    if radii.len() < 4 || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(Error::InvalidInput(
            "radius schedule must hold >= 4 increasing positive radii".into(),
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::InvalidInput("no time samples".into()));
    }
    let t_samples: Vec<f64> = if family.is_autonomous() {
        alloc::vec![t_grid[0]]
    } else {
        t_grid.to_vec()
    };
    let mut chi_values = Vec::with_capacity(radii.len());
    let mut scales = Vec::with_capacity(radii.len());
    for &r in radii {
        let (chi, scale) = chi_at_radius(family, &t_samples, r, probe)?;
        chi_values.push(chi);
        scales.push(scale);
    }
    for k in 1..chi_values.len() {
        let slack = CHI_MONOTONE_TOL * chi_values[k - 1].abs().max(1.0)
            + 64.0 * f64::EPSILON * scales[k].max(scales[k - 1]);
        if chi_values[k] > chi_values[k - 1] + slack {
            return Err(Error::Inconsistent(format!(
                "chi increased from {} to {} between radii {} and {}",
                chi_values[k - 1],
                chi_values[k],
                radii[k - 1],
                radii[k]
            )));
        }
    }
    let strictly_decreasing = chi_values.windows(2).all(|w| w[1] < w[0]);
    let last = chi_values[chi_values.len() - 1];
    let prev = chi_values[chi_values.len() - 2];
    let verdict = if strictly_decreasing && last < -threshold {
        ClassEVerdict::Diverges
    } else if last >= -threshold && libm::fabs(last - prev) <= CHI_STABLE_TOL * last.abs().max(1.0)
    {
        ClassEVerdict::Bounded
    } else {
        ClassEVerdict::Inconclusive
    };
    let half = radii.len() / 2;
    let divergence_slope = ls_slope(&radii[half..], &chi_values[half..]);
    Ok(ClassECertificate {
        radii: radii.to_vec(),
        chi_values,
        verdict,
        divergence_slope,
        threshold,
        t_samples,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SciProbe {
    pub direction: f64,
    pub base_point: f64,
    /// Directional right-derivative of f** at base + direction·R, per radius.
    pub slopes: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SciReport {
    pub t: f64,
    pub radii: Vec<f64>,
    pub probes: Vec<SciProbe>,
    pub pass: bool,
}

/// Strict convexity at infinity: along every probed ray the slope of f**
/// must still increase between the last two radius shells.
pub fn sci_certificate(
    family: &IntegrandFamily,
    t: f64,
    directions: &[f64],
    base_points: &[f64],
    radii: &[f64],
    probe: &ProbeSettings,
) -> Result<SciReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "SCI needs at least 2 increasing radii".into(),
        ));
    }
    let mut probes = Vec::new();
    for &nu in directions {
        if nu == 0.0 || !nu.is_finite() {
            return Err(Error::InvalidInput("SCI directions must be nonzero".into()));
        }
        let unit = nu.signum();
        for &base in base_points {
            let mut slopes = Vec::with_capacity(radii.len());
            for &r in radii {
                let (_, env) = probe_envelope(family, t, base, r, probe)?;
                let sub = env.subdifferential(base + unit * r)?;
                slopes.push(if unit > 0.0 { sub.hi } else { -sub.lo });
            }
            let k = slopes.len() - 1;
            let margin = 1e-12 * slopes[k].abs().max(1.0);
            let pass = slopes[k] - slopes[k - 1] > margin;
            probes.push(SciProbe {
                direction: unit,
                base_point: base,
                slopes,
                pass,
            });
        }
    }
    let pass = probes.iter().all(|p| p.pass);
    Ok(SciReport {
        t,
        radii: radii.to_vec(),
        probes,
        pass,
    })
}

/// Affine support r(ξ) = value + slope·(ξ − anchor) subtracted before the
/// growth test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct SupportShift {
    pub anchor: f64,
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct GrowthConstants {
    pub c: f64,
    pub rho: f64,
    pub shift: SupportShift,
}

/// Linear growth constants at the envelope minimizer (midpoint of the
/// minimizing set).
pub fn growth_constants(samples: &SampledFunction, rho: Option<f64>) -> Result<GrowthConstants> {
    let env = lower_convex_hull(samples)?;
    let k = env.argmin_vertex();
    let min = env.hull_values()[k];
    let mut last = k;
    while last + 1 < env.breakpoints().len() && env.hull_values()[last + 1] == min {
        last += 1;
    }
    let anchor = 0.5 * (env.breakpoints()[k] + env.breakpoints()[last]);
    growth_constants_with(samples, &env, anchor, rho)
}

/// Linear growth constants after subtracting the support line of f** at
/// `anchor` (slope: midpoint of the subdifferential).
pub fn growth_constants_at(
    samples: &SampledFunction,
    anchor: f64,
    rho: Option<f64>,
) -> Result<GrowthConstants> {
    let env = lower_convex_hull(samples)?;
    growth_constants_with(samples, &env, anchor, rho)
}

fn growth_constants_with(
    samples: &SampledFunction,
    env: &ConvexEnvelope,
    anchor: f64,
    rho: Option<f64>,
) -> Result<GrowthConstants> {
    let value = env.evaluate(anchor)?;
    let slope = env.subdifferential(anchor)?.midpoint();
    let shift = SupportShift {
        anchor,
        value,
        slope,
    };
    let scale = samples
        .values()
        .iter()
        .fold(1.0f64, |m, v| m.max(libm::fabs(*v)));
    let tol = 1e-12 * scale;
    // (|η|, φ(η)/|η|) over the grid, η ≠ 0
    let mut ratios: Vec<(f64, f64)> = Vec::new();
    for &xi in samples.grid().points() {
        let eta = xi - anchor;
        if eta == 0.0 {
            continue;
        }
        let phi = env.evaluate(xi)? - value - slope * eta;
        ratios.push((libm::fabs(eta), phi / libm::fabs(eta)));
    }
    if ratios.is_empty() {
        return Err(Error::CertificateFailure("no probe points away from the anchor".into()));
    }
    match rho {
        Some(rho) => {
            let c = ratios
                .iter()
                .filter(|(r, _)| *r >= rho)
                .map(|(_, q)| *q)
                .fold(f64::INFINITY, f64::min);
            if !c.is_finite() {
                return Err(Error::CertificateFailure(format!(
                    "no probe points with |eta| >= {rho}"
                )));
            }
            if c <= tol {
                return Err(Error::CertificateFailure(format!(
                    "no positive growth constant beyond rho = {rho} (C = {c})"
                )));
            }
            Ok(GrowthConstants { c, rho, shift })
        }
        None => {
            ratios.sort_by(|a, b| b.0.total_cmp(&a.0));
            // walk inward keeping min ratio over |η| >= current radius
            let mut best: Option<(f64, f64)> = None;
            let mut running = f64::INFINITY;
            let mut i = 0;
            while i < ratios.len() {
                let r = ratios[i].0;
                while i < ratios.len() && ratios[i].0 == r {
                    running = running.min(ratios[i].1);
                    i += 1;
                }
                if running > tol {
                    best = Some((running, r));
                } else {
                    break;
                }
            }
            match best {
                Some((c, rho)) => Ok(GrowthConstants { c, rho, shift }),
                None => Err(Error::CertificateFailure(
                    "shifted envelope has no linear growth on the probe grid".into(),
                )),
            }
        }
    }
}

/// Sampling of `[0, T] × state box × velocity box` on which hypotheses are
/// certified.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeBox {
    pub horizon: f64,
    pub t_nodes: Vec<f64>,
    pub states: Vec<f64>,
    pub velocities: Grid1D,
}

/// Constants of the growth, Lipschitz and Gronwall-type hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct HypothesisConstants {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct HypothesisReport {
    /// Whether the constants were declared by the caller (verified) or fitted.
    pub declared: bool,
    pub a: f64,
    pub b: f64,
    pub h1_pass: bool,
    pub alpha: f64,
    pub beta: f64,
    pub beta_margin: f64,
    pub h2_pass: bool,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub h3_pass: bool,
    pub l: f64,
    pub l_radius: f64,
    pub g_concavity: Vec<bool>,
    pub g_concave: bool,
    pub pass: bool,
}

impl HypothesisReport {
    pub fn constants(&self) -> HypothesisConstants {
        HypothesisConstants {
            a: self.a,
            b: self.b,
            alpha: self.alpha,
            beta: self.beta,
            c0: self.c0,
            c1: self.c1,
            c2: self.c2,
            l: self.l,
        }
    }
}

/// Smallest minimizer of a convex function on `[lo, hi]`.
fn minimize_convex_1d(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
        if b - a <= 1e-15 * (1.0 + libm::fabs(a)) {
            break;
        }
    }
    let x_star = 0.5 * (a + b);
    let level = f(x_star);
    let level_tol = 1e-12 * (1.0 + libm::fabs(level));
    if f(lo) <= level + level_tol {
        return lo;
    }
    // ties: smallest x in the sublevel set
    let (mut a, mut b) = (lo, x_star);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) <= level + level_tol {
            b = m;
        } else {
            a = m;
        }
        if b - a <= 1e-15 * (1.0 + libm::fabs(a)) {
            break;
        }
    }
    b
}

/// Fit `value ≥ −offset + sign·c·|x|` with c ≥ 0 by minimizing the maximal
/// slack (smallest c on ties). Returns `(offset, c)`.
fn fit_abs_bound(points: &[(f64, f64)], sign: f64) -> (f64, f64) {
    let offset_for = |c: f64| {
        points
            .iter()
            .map(|&(ax, v)| sign * c * ax - v)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let max_slack = |c: f64| {
        let off = offset_for(c);
        points
            .iter()
            .map(|&(ax, v)| v + off - sign * c * ax)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (amin, amax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(a, _)| (lo.min(a), hi.max(a)));
    let (vmin, vmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    let spread = amax - amin;
    if !(spread > 0.0) {
        return (offset_for(0.0), 0.0);
    }
    let hi = (max_slack(0.0) + (vmax - vmin)) / spread + 1.0;
    let c = minimize_convex_1d(0.0, hi, max_slack);
    (offset_for(c), c)
}

fn lower_bound_slack(points: &[(f64, f64)], offset: f64, slope: f64) -> f64 {
    points
        .iter()
        .map(|&(ax, v)| v + offset - slope * ax)
        .fold(f64::INFINITY, f64::min)
}

struct H3Point {
    phi_abs: f64,
    x_abs: f64,
    v_abs: f64,
}

fn subsample(xs: &[f64], max: usize) -> Vec<f64> {
    if xs.len() <= max {
        return xs.to_vec();
    }
    let step = (xs.len() - 1) as f64 / (max - 1) as f64;
    (0..max)
        .map(|i| xs[((i as f64 * step) as usize).min(xs.len() - 1)])
        .collect()
}

fn h3_points(f: &IntegrandFamily, g: &StateFamily, probe: &ProbeBox) -> Result<Vec<H3Point>> {
    let ts = subsample(&probe.t_nodes, 17);
    let xs = subsample(&probe.states, 17);
    let xis = subsample(probe.velocities.points(), 33);
    let delta = probe.horizon / (4.0 * probe.t_nodes.len().max(1) as f64);
    let autonomous = f.is_autonomous() && g.is_autonomous();
    let mut pts = Vec::with_capacity(ts.len() * xs.len() * xis.len());
    for &t in &ts {
        let env = f.envelope(t, &probe.velocities)?;
        let shifted = if f.is_autonomous() {
            None
        } else {
            Some((
                f.envelope(t + delta, &probe.velocities)?,
                f.envelope(t - delta, &probe.velocities)?,
            ))
        };
        for &xi in &xis {
            let fs = env.evaluate(xi)?;
            let dfdt = match &shifted {
                Some((up, down)) => (up.evaluate(xi)? - down.evaluate(xi)?) / (2.0 * delta),
                None => 0.0,
            };
            for &x in &xs {
                let dgdt = if g.is_autonomous() {
                    0.0
                } else {
                    (g.eval(t + delta, x) - g.eval(t - delta, x)) / (2.0 * delta)
                };
                let v = if autonomous { 0.0 } else { dfdt + dgdt };
                pts.push(H3Point {
                    phi_abs: libm::fabs(g.eval(t, x) + fs),
                    x_abs: libm::fabs(x),
                    v_abs: libm::fabs(v),
                });
            }
        }
    }
    Ok(pts)
}

fn h3_c2(pts: &[H3Point], c0: f64, c1: f64) -> f64 {
    pts.iter()
        .map(|p| p.v_abs - c0 * p.phi_abs - c1 * p.x_abs)
        .fold(0.0, f64::max)
}

fn h3_max_slack(pts: &[H3Point], c0: f64, c1: f64) -> f64 {
    let c2 = h3_c2(pts, c0, c1);
    pts.iter()
        .map(|p| c0 * p.phi_abs + c1 * p.x_abs + c2 - p.v_abs)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn range(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let lo = it.clone().fold(f64::INFINITY, f64::min);
    let hi = it.fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn fit_h3(pts: &[H3Point]) -> (f64, f64, f64) {
    let rv = range(pts.iter().map(|p| p.v_abs));
    if rv == 0.0 {
        return (0.0, 0.0, h3_c2(pts, 0.0, 0.0));
    }
    let ra = range(pts.iter().map(|p| p.phi_abs));
    let rx = range(pts.iter().map(|p| p.x_abs));
    let c0_hi = if ra > 0.0 { 2.0 * rv / ra } else { 0.0 };
    let c1_hi = if rx > 0.0 { 2.0 * rv / rx } else { 0.0 };
    let best_c1 = |c0: f64| minimize_convex_1d(0.0, c1_hi, |c1| h3_max_slack(pts, c0, c1));
    let c0 = minimize_convex_1d(0.0, c0_hi, |c0| h3_max_slack(pts, c0, best_c1(c0)));
    let c1 = best_c1(c0);
    (c0, c1, h3_c2(pts, c0, c1))
}

/// Fit (or verify, when `declared` is given) the hypothesis constants on
/// the probe box, and test concavity of g(t, ·).
pub fn hypothesis_check(
    f: &IntegrandFamily,
    g: &StateFamily,
    probe: &ProbeBox,
    declared: Option<&HypothesisConstants>,
) -> Result<HypothesisReport> {
    if probe.t_nodes.is_empty() || probe.states.is_empty() {
        return Err(Error::InvalidInput("empty probe box".into()));
    }
    let horizon = probe.horizon;
    let velocities = probe.velocities.points();

    let f_points: Vec<(f64, f64)> = probe
        .t_nodes
        .iter()
        .flat_map(|&t| velocities.iter().map(move |&xi| (libm::fabs(xi), f.eval(t, xi))))
        .collect();
    let g_points: Vec<(f64, f64)> = probe
        .t_nodes
        .iter()
        .flat_map(|&t| probe.states.iter().map(move |&x| (libm::fabs(x), g.eval(t, x))))
        .collect();
    let h3 = h3_points(f, g, probe)?;

    let f_scale = f_points.iter().fold(1.0f64, |m, p| m.max(libm::fabs(p.1)));
    let g_scale = g_points.iter().fold(1.0f64, |m, p| m.max(libm::fabs(p.1)));

    let (a, b, alpha, beta, c0, c1, c2) = match declared {
        Some(d) => (d.a, d.b, d.alpha, d.beta, d.c0, d.c1, d.c2),
        None => {
            let (a, b) = fit_abs_bound(&f_points, 1.0);
            let (alpha, beta) = fit_abs_bound(&g_points, -1.0);
            let (c0, c1, c2) = fit_h3(&h3);
            (a, b, alpha, beta, c0, c1, c2)
        }
    };

    let h1_pass = b > 0.0 && lower_bound_slack(&f_points, a, b) >= -1e-9 * f_scale;
    let beta_margin = b / horizon - beta;
    let h2_pass = beta >= 0.0
        && beta_margin > 0.0
        && lower_bound_slack(&g_points, alpha, -beta) >= -1e-9 * g_scale;
    let h3_slack = h3
        .iter()
        .map(|p| c0 * p.phi_abs + c1 * p.x_abs + c2 - p.v_abs)
        .fold(f64::INFINITY, f64::min);
    let h3_pass = c0 >= 0.0 && c1 >= 0.0 && c2 >= 0.0 && h3_slack >= -1e-9 * (1.0 + f_scale + g_scale);

    let l_radius = velocities.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let l = match declared {
        Some(d) => d.l,
        None => f.t_lipschitz_over(velocities.iter().copied()),
    };

    let xs = subsample(&probe.states, 33);
    let g_concavity: Vec<bool> = subsample(&probe.t_nodes, 17)
        .iter()
        .map(|&t| {
            xs.iter().enumerate().all(|(i, &x)| {
                xs[i + 1..].iter().all(|&y| {
                    g.eval(t, 0.5 * (x + y)) >= 0.5 * (g.eval(t, x) + g.eval(t, y)) - 1e-9
                })
            })
        })
        .collect();
    let g_concave = g_concavity.iter().all(|&c| c);

    Ok(HypothesisReport {
        declared: declared.is_some(),
        a,
        b,
        h1_pass,
        alpha,
        beta,
        beta_margin,
        h2_pass,
        c0,
        c1,
        c2,
        h3_pass,
        l,
        l_radius,
        g_concavity,
        g_concave,
        pass: h1_pass && h2_pass && h3_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LipschitzEntry {
    pub xi: f64,
    /// Finite-difference t-Lipschitz constant of f**(·, ξ).
    pub measured: f64,
    /// Radius of the ball holding every support point used for ξ.
    pub support_radius: f64,
    /// Finite-difference t-Lipschitz constant of f over that ball.
    pub bound: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct LipschitzReport {
    pub entries: Vec<LipschitzEntry>,
    pub status: CheckStatus,
}

/// Compare the t-Lipschitz constant of f**(·, ξ) with that of f on the
/// ball containing the decomposition support points.
pub fn fstar_lipschitz_check(
    family: &IntegrandFamily,
    xi_probe: &[f64],
    t_grid: &[f64],
    velocities: &Grid1D,
) -> Result<LipschitzReport> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "Lipschitz check needs >= 2 increasing time samples".into(),
        ));
    }
    let envs: Vec<ConvexEnvelope> = t_grid
        .iter()
        .map(|&t| family.envelope(t, velocities))
        .collect::<Result<_>>()?;
    let (lo, hi) = (velocities.first(), velocities.last());
    let mut entries = Vec::with_capacity(xi_probe.len());
    for &xi in xi_probe {
        let mut radius: f64 = 0.0;
        let mut escaped = false;
        let mut values = Vec::with_capacity(envs.len());
        for env in &envs {
            let d = env.decompose(xi)?;
            for &q in &d.points {
                radius = radius.max(libm::fabs(q));
                if q == lo || q == hi {
                    escaped = true;
                }
            }
            values.push(d.envelope_value);
        }
        let measured = t_grid
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| libm::fabs(v[1] - v[0]) / (t[1] - t[0]))
            .fold(0.0, f64::max);
        let mut bound: f64 = 0.0;
        for &q in velocities.points().iter().filter(|q| libm::fabs(**q) <= radius) {
            for w in t_grid.windows(2) {
                let d = libm::fabs(family.eval(w[1], q) - family.eval(w[0], q)) / (w[1] - w[0]);
                bound = bound.max(d);
            }
        }
        let status = if escaped {
            CheckStatus::Inconclusive
        } else if measured <= (1.0 + 1e-6) * bound + 1e-12 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        entries.push(LipschitzEntry {
            xi,
            measured,
            support_radius: radius,
            bound,
            status,
        });
    }
    let status = if entries.iter().any(|e| e.status == CheckStatus::Fail) {
        CheckStatus::Fail
    } else if entries.iter().any(|e| e.status == CheckStatus::Inconclusive) {
        CheckStatus::Inconclusive
    } else {
        CheckStatus::Pass
    };
    Ok(LipschitzReport { entries, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{StateFn, TimeFactor, VelocityFn};
    use alloc::vec;

    fn fam(base: VelocityFn) -> IntegrandFamily {
        IntegrandFamily::autonomous(base)
    }

    fn env_of(base: VelocityFn, lo: f64, hi: f64, n: usize) -> ConvexEnvelope {
        fam(base)
            .envelope(0.0, &Grid1D::uniform(lo, hi, n).unwrap())
            .unwrap()
    }

    #[test]
    fn erdmann_values() {
        let env = env_of(VelocityFn::PowerP { p: 2.0 }, -6.0, 6.0, 121);
        assert!(libm::fabs(erdmann_value(&env, 3.0).unwrap() + 9.0) < 1e-9);
        let env = env_of(VelocityFn::Abs, -10.0, 10.0, 21);
        assert_eq!(erdmann_value(&env, 5.0).unwrap(), 0.0);
        let env = env_of(VelocityFn::SqrtOnePlus, -2.0, 2.0, 41);
        assert!(libm::fabs(erdmann_value(&env, 0.0).unwrap() - 1.0) < 1e-12);
    }

    #[test]
    fn erdmann_sup_dominates_midpoint() {
        let env = env_of(VelocityFn::Abs, -10.0, 10.0, 21);
        // at the kink ∂ = [-1, 1] and ξ = 0, every selection gives 0
        assert_eq!(erdmann_sup(&env, 0.0).unwrap(), 0.0);
        let env = env_of(VelocityFn::PowerP { p: 2.0 }, -4.0, 4.0, 9);
        let mid = erdmann_value(&env, 2.0).unwrap();
        let sup = erdmann_sup(&env, 2.0).unwrap();
        assert!(sup >= mid);
        // ∂ = [3, 5] at ξ = 2: sup is 4 − 3·2
        assert_eq!(sup, -2.0);
    }

    fn probe() -> ProbeSettings {
        ProbeSettings {
            grid_points: 1001,
            box_factor: 2.0,
        }
    }

    #[test]
    fn class_e_verdicts() {
        let radii = default_radius_schedule();
        let cert = |base| {
            class_e_certificate(&fam(base), &[0.0], &radii, DEFAULT_THRESHOLD, &probe()).unwrap()
        };
        assert_eq!(cert(VelocityFn::PowerP { p: 2.0 }).verdict, ClassEVerdict::Diverges);
        assert_eq!(cert(VelocityFn::LinearMinusSqrt).verdict, ClassEVerdict::Diverges);
        assert_eq!(cert(VelocityFn::SqrtOnePlus).verdict, ClassEVerdict::Bounded);
        assert_ne!(cert(VelocityFn::Abs).verdict, ClassEVerdict::Diverges);
    }

    #[test]
    fn class_e_rejects_short_schedule() {
        let r = class_e_certificate(&fam(VelocityFn::Abs), &[0.0], &[1.0, 2.0], 1.0, &probe());
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sci_verdicts() {
        let radii = [10.0, 100.0, 1000.0];
        let sci = |base| {
            sci_certificate(&fam(base), 0.0, &[1.0, -1.0], &[0.0, 0.5], &radii, &probe())
                .unwrap()
                .pass
        };
        assert!(sci(VelocityFn::PowerP { p: 2.0 }));
        assert!(sci(VelocityFn::LinearMinusSqrt));
        assert!(!sci(VelocityFn::Affine { slope: 2.0, intercept: 1.0 }));
        assert!(!sci(VelocityFn::Abs));
    }

    #[test]
    fn growth_of_square() {
        let grid = Grid1D::uniform(-4.0, 4.0, 81).unwrap();
        let s = SampledFunction::sample(grid, |x| x * x).unwrap();
        let g = growth_constants(&s, Some(1.0)).unwrap();
        assert!(libm::fabs(g.c - 1.0) < 1e-12);
        assert_eq!(g.shift.anchor, 0.0);
    }

    #[test]
    fn growth_of_double_well() {
        let grid = Grid1D::uniform(-3.0, 3.0, 61).unwrap();
        let s = SampledFunction::sample(grid, |x| (x * x - 1.0) * (x * x - 1.0)).unwrap();
        let g = growth_constants(&s, None).unwrap();
        assert!(g.c > 0.0);
        assert!(g.rho > 1.0 && g.rho < 1.2, "rho = {}", g.rho);
    }

    #[test]
    fn growth_fails_for_affine() {
        let grid = Grid1D::uniform(-4.0, 4.0, 81).unwrap();
        let s = SampledFunction::sample(grid, |x| 1.0 - x).unwrap();
        assert!(matches!(growth_constants(&s, None), Err(Error::CertificateFailure(_))));
    }

    fn probe_box(t_max: f64, xlim: f64, vlim: f64) -> ProbeBox {
        ProbeBox {
            horizon: t_max,
            t_nodes: (0..9).map(|i| t_max * i as f64 / 8.0).collect(),
            states: (0..41).map(|i| -xlim + 2.0 * xlim * i as f64 / 40.0).collect(),
            velocities: Grid1D::uniform(-vlim, vlim, 81).unwrap(),
        }
    }

    #[test]
    fn declared_h1_constants_verified() {
        let f = IntegrandFamily::new(
            VelocityFn::PowerP { p: 2.0 },
            VelocityFn::Affine { slope: 0.0, intercept: -1.0 },
            TimeFactor::Const { value: 1.0 },
        );
        let declared = HypothesisConstants {
            a: 2.0,
            b: 1.0,
            c2: 0.0,
            ..Default::default()
        };
        let rep = hypothesis_check(&f, &StateFamily::zero(), &probe_box(1.0, 1.0, 4.0), Some(&declared))
            .unwrap();
        assert!(rep.h1_pass && rep.h2_pass && rep.h3_pass);
        let bad = HypothesisConstants { a: 0.5, b: 1.0, ..Default::default() };
        let rep = hypothesis_check(&f, &StateFamily::zero(), &probe_box(1.0, 1.0, 4.0), Some(&bad))
            .unwrap();
        assert!(!rep.h1_pass);
    }

    #[test]
    fn fitted_h1_is_minimax() {
        let f = IntegrandFamily::new(
            VelocityFn::PowerP { p: 2.0 },
            VelocityFn::Affine { slope: 0.0, intercept: -1.0 },
            TimeFactor::Const { value: 1.0 },
        );
        let rep = hypothesis_check(&f, &StateFamily::zero(), &probe_box(1.0, 1.0, 4.0), None).unwrap();
        // minimax lower V of ξ² − 1 on |ξ| ≤ 4 is −5 + 4|ξ|
        assert!(libm::fabs(rep.b - 4.0) < 1e-6, "B = {}", rep.b);
        assert!(libm::fabs(rep.a - 5.0) < 1e-6, "A = {}", rep.a);
        assert!(rep.h1_pass);
    }

    #[test]
    fn concave_quadratic_state_cost() {
        let f = fam(VelocityFn::PowerP { p: 2.0 });
        let g = StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: 1.0 });
        let rep = hypothesis_check(&f, &g, &probe_box(1.0, 1.0, 4.0), None).unwrap();
        assert!(rep.g_concave);
        assert!(libm::fabs(rep.alpha) < 1e-9, "alpha = {}", rep.alpha);
        assert!(libm::fabs(rep.beta - 1.0) < 1e-6, "beta = {}", rep.beta);
        assert!(rep.h2_pass);
        let rep = hypothesis_check(&f, &g, &probe_box(1.0, 100.0, 4.0), None).unwrap();
        assert!(!rep.h2_pass);

        let convex = StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: 0.0 });
        assert!(hypothesis_check(&f, &convex, &probe_box(1.0, 1.0, 4.0), None).unwrap().g_concave);
        let g = StateFamily::autonomous(StateFn::Table {
            table: crate::catalog::Table1D::new(vec![-1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]).unwrap(),
        });
        assert!(!hypothesis_check(&f, &g, &probe_box(1.0, 1.0, 4.0), None).unwrap().g_concave);
    }

    #[test]
    fn zero_state_cost_constants() {
        let f = fam(VelocityFn::PowerP { p: 2.0 });
        let rep = hypothesis_check(&f, &StateFamily::zero(), &probe_box(2.0, 1.0, 4.0), None).unwrap();
        assert_eq!(rep.alpha, 0.0);
        assert_eq!(rep.beta, 0.0);
        assert_eq!(rep.beta_margin, rep.b / 2.0);
        assert_eq!((rep.c0, rep.c1, rep.c2), (0.0, 0.0, 0.0));
        assert_eq!(rep.l, 0.0);
    }

    #[test]
    fn lipschitz_of_constant_modulation_is_zero() {
        let f = IntegrandFamily::new(
            VelocityFn::DoubleWell,
            VelocityFn::PowerP { p: 2.0 },
            TimeFactor::Const { value: 0.7 },
        );
        let grid = Grid1D::uniform(-2.0, 2.0, 81).unwrap();
        let ts: Vec<f64> = (0..5).map(|i| i as f64 * 0.25).collect();
        let rep = fstar_lipschitz_check(&f, &[0.0, 0.5], &ts, &grid).unwrap();
        assert_eq!(rep.status, CheckStatus::Pass);
        assert!(rep.entries.iter().all(|e| e.measured == 0.0));
    }

    #[test]
    fn lipschitz_of_time_modulated_double_well() {
        let f = IntegrandFamily::new(
            VelocityFn::DoubleWell,
            VelocityFn::PowerP { p: 2.0 },
            TimeFactor::AffineT { c0: 0.0, c1: 1.0 },
        );
        let grid = Grid1D::uniform(-2.0, 2.0, 401).unwrap();
        let ts: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let rep = fstar_lipschitz_check(&f, &[0.0], &ts, &grid).unwrap();
        let e = &rep.entries[0];
        assert_eq!(e.status, CheckStatus::Pass);
        assert!(e.support_radius <= 1.0 + 1e-12);
        // ∂ₜf = ξ², so the bound is R²
        assert!(libm::fabs(e.bound - e.support_radius * e.support_radius) < 1e-9);
        assert!(e.measured > 0.0);
    }
}
