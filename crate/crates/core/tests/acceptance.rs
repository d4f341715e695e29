//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities; run with `--nocapture` to see them all.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varelax_core::catalog::{NagumoFn, StateFn, TimeFactor, VelocityFn};
use varelax_core::classify::{
    class_e_certificate, default_radius_schedule, fstar_lipschitz_check, hypothesis_check,
    sci_certificate, CheckStatus, ClassEVerdict, ProbeSettings, DEFAULT_THRESHOLD,
};
use varelax_core::conditions::energy_constancy;
use varelax_core::convex::{
    caratheodory_decompose, decompose_2d, lower_convex_hull, lower_hull_2d, EpigraphCloud2D,
    Grid1D, SampledFunction,
};
use varelax_core::family::{IntegrandFamily, StateFamily};
use varelax_core::reconstruct::{compare_costs, decompose_velocities, rearrange};
use varelax_core::relax::{
    coercivity_bound_check, solve_relaxed, value_sweep, DpConfig, Discretization, Problem,
    Trajectory,
};

fn report(name: &str, ok: bool, detail: String) {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn quadratic() -> Problem {
    Problem {
        horizon: 1.0,
        a: 0.0,
        b: 1.0,
        f: IntegrandFamily::autonomous(VelocityFn::PowerP { p: 2.0 }),
        g: StateFamily::zero(),
        state_box: (0.0, 1.0),
        velocity_cap: 4.0,
    }
}

fn double_well(g: StateFamily) -> Problem {
    Problem {
        horizon: 1.0,
        a: 0.0,
        b: 0.0,
        f: IntegrandFamily::autonomous(VelocityFn::DoubleWell),
        g,
        state_box: (-1.0, 1.0),
        velocity_cap: 2.0,
    }
}

/// n_x chosen so the state step equals the time step: velocities are integers.
fn double_well_cfg(n_t: usize) -> DpConfig {
    DpConfig::new(n_t, 2 * n_t + 1)
}

fn linear_minus_sqrt(cap: f64) -> Problem {
    Problem {
        horizon: 1.0,
        a: 0.0,
        b: 1.0,
        f: IntegrandFamily::autonomous(VelocityFn::LinearMinusSqrt),
        g: StateFamily::zero(),
        state_box: (-1.0, 2.0),
        velocity_cap: cap,
    }
}

#[test]
fn envelope_and_decomposition_match_exhaustive_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_1d: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=64);
        let xs = common::random_grid(&mut rng, n, -3.0, 3.0);
        if xs.len() < 2 {
            continue;
        }
        let ys = common::random_values(&mut rng, &xs);
        let samples = SampledFunction::new(Grid1D::new(xs.clone()).unwrap(), ys.clone()).unwrap();
        let env = lower_convex_hull(&samples).unwrap();
        let mut queries = xs.clone();
        for _ in 0..16 {
            queries.push(rng.gen_range(xs[0]..=xs[xs.len() - 1]));
        }
        for &q in &queries {
            let d = caratheodory_decompose(&samples, &env, q).unwrap();
            d.check(1e-12 * (1.0 + d.envelope_value.abs())).unwrap();
            let oracle = common::pair_min_1d(&xs, &ys, q);
            worst_1d = worst_1d.max((d.combined_value() - oracle).abs() / (1.0 + oracle.abs()));
        }
    }

    let mut worst_2d: f64 = 0.0;
    for _ in 0..40 {
        let nx = rng.gen_range(2..=7);
        let ny = rng.gen_range(2..=7);
        let gx: Vec<f64> = (0..nx).map(|i| -1.0 + 2.0 * i as f64 / (nx - 1) as f64).collect();
        let gy: Vec<f64> = (0..ny).map(|i| -1.0 + 2.0 * i as f64 / (ny - 1) as f64).collect();
        let noise: Vec<f64> = (0..nx * ny).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let cloud = EpigraphCloud2D::sample(&gx, &gy, |x, y| {
            let i = gx.iter().position(|v| *v == x).unwrap();
            let j = gy.iter().position(|v| *v == y).unwrap();
            (x * x + y * y - 0.5).powi(2) + noise[i * ny + j]
        })
        .unwrap();
        let facets = lower_hull_2d(&cloud).unwrap();
        let mut queries: Vec<[f64; 2]> = cloud.points().iter().map(|p| [p[0], p[1]]).collect();
        for _ in 0..12 {
            queries.push([rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)]);
        }
        for q in queries {
            let d = decompose_2d(&cloud, &facets, q).unwrap();
            d.check(1e-9).unwrap();
            let oracle = common::triple_min_2d(cloud.points(), q);
            worst_2d = worst_2d.max((d.combined_value() - oracle).abs());
        }
    }
    let elapsed = start.elapsed();
    let ok = worst_1d <= 1e-12 && worst_2d <= 1e-9 && elapsed < Duration::from_secs(10);
    report(
        "envelope/decomposition oracle",
        ok,
        format!("1D worst {worst_1d:.3e}, 2D worst {worst_2d:.3e}, {elapsed:?}"),
    );
    assert!(ok);
}

#[test]
fn double_well_envelope_is_zero_between_wells() {
    let mut worst: f64 = 0.0;
    let mut split_ok = true;
    for (lo, hi, n) in [(-2.0, 2.0, 41), (-3.0, 3.0, 61), (-1.5, 1.5, 13), (-2.0, 2.0, 5)] {
        let grid = Grid1D::uniform(lo, hi, n).unwrap();
        assert!(grid.points().contains(&1.0) && grid.points().contains(&-1.0));
        let samples = SampledFunction::sample(grid, |x| VelocityFn::DoubleWell.eval(x)).unwrap();
        let env = lower_convex_hull(&samples).unwrap();
        for k in 0..=200 {
            let xi = -1.0 + 2.0 * k as f64 / 200.0;
            worst = worst.max(env.evaluate(xi).unwrap().abs());
        }
        let d = caratheodory_decompose(&samples, &env, 0.0).unwrap();
        split_ok &= d.weights == vec![0.5, 0.5] && d.points == vec![-1.0, 1.0];
    }
    let ok = worst <= 1e-12 && split_ok;
    report(
        "double-well analytics",
        ok,
        format!("max |f**| on [-1,1] = {worst:.3e}, split at 0 exact: {split_ok}"),
    );
    assert!(ok);
}

fn verdicts(radii: &[f64]) -> (ClassEVerdict, ClassEVerdict, ClassEVerdict, bool, Duration) {
    let probe = ProbeSettings::default();
    let start = Instant::now();
    let fam = IntegrandFamily::autonomous;
    let e = |f: VelocityFn| {
        class_e_certificate(&fam(f), &[0.0], radii, DEFAULT_THRESHOLD, &probe)
            .unwrap()
            .verdict
    };
    let p2 = e(VelocityFn::PowerP { p: 2.0 });
    let lms = e(VelocityFn::LinearMinusSqrt);
    let sq = e(VelocityFn::SqrtOnePlus);
    let sci_abs = sci_certificate(
        &fam(VelocityFn::Abs),
        0.0,
        &[1.0, -1.0],
        &[0.0],
        radii,
        &probe,
    )
    .unwrap()
    .pass;
    (p2, lms, sq, sci_abs, start.elapsed())
}

#[test]
fn classifier_verdicts_are_stable() {
    let base = default_radius_schedule();
    let scaled: Vec<f64> = base.iter().map(|r| 2.0 * r).collect();
    let mut dense: Vec<f64> = base
        .windows(2)
        .flat_map(|w| [w[0], (w[0] * w[1]).sqrt()])
        .collect();
    dense.push(*base.last().unwrap());
    let mut ok = true;
    let mut lines = Vec::new();
    for (label, radii) in [("base", &base), ("x2", &scaled), ("dense", &dense)] {
        let (p2, lms, sq, sci_abs, t) = verdicts(radii);
        let good = p2 == ClassEVerdict::Diverges
            && lms == ClassEVerdict::Diverges
            && sq == ClassEVerdict::Bounded
            && !sci_abs
            && t < Duration::from_secs(5);
        ok &= good;
        lines.push(format!(
            "{label}: power_2 {p2:?}, linear_minus_sqrt {lms:?}, sqrt_one_plus {sq:?}, abs SCI pass={sci_abs} ({t:?})"
        ));
    }
    report("classifier verdicts", ok, lines.join("; "));
    assert!(ok);
}

#[test]
fn quadratic_benchmark_converges() {
    let mut errors = Vec::new();
    let mut elapsed_256 = Duration::ZERO;
    for n in [64, 128, 256] {
        let start = Instant::now();
        let t = solve_relaxed(&quadratic(), &DpConfig::new(n, n)).unwrap();
        if n == 256 {
            elapsed_256 = start.elapsed();
        }
        errors.push((t.value - 1.0).abs());
    }
    let ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let ok = errors[0] < 0.05
        && errors[2] < 0.01
        && ratios.iter().all(|r| (1.6..=2.4).contains(r))
        && elapsed_256 < Duration::from_secs(30);
    report(
        "quadratic benchmark",
        ok,
        format!("errors {errors:?}, ratios {ratios:.3?}, n=256 in {elapsed_256:?}"),
    );
    assert!(ok);
}

#[test]
fn energy_constancy_improves_under_refinement() {
    let mut best = Vec::new();
    let mut mid = Vec::new();
    for n in [32, 64, 128, 256] {
        let cfg = DpConfig::new(n, n);
        let t = solve_relaxed(&quadratic(), &cfg).unwrap();
        let e = energy_constancy(&quadratic(), &cfg, &t).unwrap();
        best.push(e.deviation);
        mid.push(e.midpoint_deviation);
    }
    let monotone = best.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let ok = monotone && best[3] < 0.05;
    report(
        "energy constancy",
        ok,
        format!("best-selection deviation {best:?}; midpoint-selection deviation {mid:?}"),
    );
    assert!(ok);
}

#[test]
fn value_sweep_settles() {
    let cfg = DpConfig::new(32, 32).with_theta(NagumoFn::PowerP { p: 2.0 });
    let ls: Vec<f64> = (0..26).map(|k| 0.5 + 0.1 * k as f64).collect();
    let rep = value_sweep(&quadratic(), &cfg, &ls).unwrap();
    let unconstrained = solve_relaxed(&quadratic(), &cfg).unwrap();
    let settle_l = rep.settle_index.map(|i| ls[i]);
    let settled_value = rep.values.last().copied().flatten();
    let ok = rep.max_increase() <= 1e-9
        && settle_l.is_some_and(|l| (0.95..=1.25).contains(&l))
        && settled_value.is_some_and(|v| (v - unconstrained.value).abs() <= 1e-9);
    report(
        "value sweep",
        ok,
        format!(
            "max increase {:.3e}, settles at l = {settle_l:?}, V = {settled_value:?}, unconstrained Θ = {:?}",
            rep.max_increase(),
            unconstrained.theta_value
        ),
    );
    assert!(ok);
}

/// (total gap, allowed O(h) gap, pass) for the concave-g double well.
fn gap(n: usize) -> (f64, f64, bool) {
    let p = double_well(StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: 0.25 }));
    let cfg = double_well_cfg(n);
    let t = solve_relaxed(&p, &cfg).unwrap();
    let track = decompose_velocities(&p, &cfg, &t).unwrap();
    let rec = rearrange(&p, &t, &track).unwrap();
    let cmp = compare_costs(&p, &cfg, &t, &rec, 0.0).unwrap();
    (cmp.total_difference, cmp.gap_tolerance, cmp.pass)
}

fn bang_bang_ok(p: &Problem, cfg: &DpConfig, t: &Trajectory) -> (bool, usize, f64) {
    let track = decompose_velocities(p, cfg, t).unwrap();
    let rec = rearrange(p, t, &track).unwrap();
    let bang_bang = rec.velocities.iter().all(|v| (v.abs() - 1.0).abs() <= 1e-12);
    let endpoints = rec.states[0] == p.a && *rec.states.last().unwrap() == p.b;
    let nodes = rec.node_states() == t.states;
    (bang_bang && endpoints && nodes && rec.total.abs() <= 1e-6, track.nontrivial, rec.total)
}

#[test]
fn nonconvex_pipeline_reconstructs_bang_bang() {
    let p = double_well(StateFamily::zero());
    let cfg = double_well_cfg(128);
    let t = solve_relaxed(&p, &cfg).unwrap();
    let (dp_ok, dp_split, dp_total) = bang_bang_ok(&p, &cfg, &t);
    // the resting path is an equally optimal relaxed minimizer; every one of
    // its intervals must be split
    let rest = Trajectory::from_states(t.times.clone(), vec![0.0; t.times.len()]).unwrap();
    let (rest_ok, rest_split, rest_total) = bang_bang_ok(&p, &cfg, &rest);
    let ok_plain = t.value.abs() <= 1e-9 && dp_ok && rest_ok && rest_split == 128;

    let gaps: Vec<(f64, f64, bool)> = [64, 128, 256].into_iter().map(gap).collect();
    let pass_all = gaps.iter().all(|g| g.2);
    let tol_halves = gaps
        .windows(2)
        .all(|w| (1.6..=2.4).contains(&(w[0].1 / w[1].1)));
    let ok = ok_plain && pass_all && tol_halves;
    report(
        "non-convex pipeline",
        ok,
        format!(
            "relaxed {:.3e}; DP path: {dp_split} split, total {dp_total:.3e}; resting path: {rest_split} split, total {rest_total:.3e}; concave (gap, allowed) {:?}",
            t.value,
            gaps.iter().map(|g| (g.0, g.1)).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

#[test]
fn class_e_solution_ignores_velocity_cap() {
    let cert = class_e_certificate(
        &IntegrandFamily::autonomous(VelocityFn::LinearMinusSqrt),
        &[0.0],
        &default_radius_schedule(),
        DEFAULT_THRESHOLD,
        &ProbeSettings::default(),
    )
    .unwrap();
    let cfg = DpConfig::new(64, 193);
    let base = solve_relaxed(&linear_minus_sqrt(2.0), &cfg).unwrap();
    let wide = solve_relaxed(&linear_minus_sqrt(4.0), &cfg).unwrap();
    let ok = cert.verdict == ClassEVerdict::Diverges
        && (base.value - wide.value).abs() <= 1e-9
        && base.velocities == wide.velocities;
    report(
        "velocity-cap echo",
        ok,
        format!(
            "cap 2: {:.12}, cap 4: {:.12}, same profile: {}",
            base.value,
            wide.value,
            base.velocities == wide.velocities
        ),
    );
    assert!(ok);
}

#[test]
fn envelope_lipschitz_in_time_is_inherited() {
    let f = IntegrandFamily::new(
        VelocityFn::DoubleWell,
        VelocityFn::PowerP { p: 2.0 },
        TimeFactor::Sine { kappa: 0.5, omega: 1.0 },
    );
    let grid = Grid1D::uniform(-2.0, 2.0, 401).unwrap();
    let ts: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let rep = fstar_lipschitz_check(&f, &[0.0], &ts, &grid).unwrap();
    let e = &rep.entries[0];
    let ok = e.status == CheckStatus::Pass && e.measured <= (1.0 + 1e-6) * e.bound;
    report(
        "Lipschitz propagation",
        ok,
        format!("measured {:.6e} vs bound {:.6e} on radius {}", e.measured, e.bound, e.support_radius),
    );
    assert!(ok);
}

#[test]
fn coercivity_bound_holds_on_solved_problems() {
    let cases: Vec<(&str, Problem, DpConfig)> = vec![
        ("quadratic", quadratic(), DpConfig::new(64, 64)),
        ("double well", double_well(StateFamily::zero()), double_well_cfg(64)),
        (
            "double well, concave g",
            double_well(StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: 0.25 })),
            double_well_cfg(64),
        ),
        ("linear_minus_sqrt", linear_minus_sqrt(2.0), DpConfig::new(64, 193)),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, p, cfg) in cases {
        let disc = Discretization::new(&p, &cfg).unwrap();
        let hyp = hypothesis_check(&p.f, &p.g, &disc.probe_box(p.horizon), None).unwrap();
        if !(hyp.h1_pass && hyp.h2_pass) {
            lines.push(format!("{name}: constants not certified"));
            ok = false;
            continue;
        }
        let t: Trajectory = solve_relaxed(&p, &cfg).unwrap();
        let c = coercivity_bound_check(&p, &cfg, &t, &hyp.constants()).unwrap();
        ok &= c.pass;
        lines.push(format!(
            "{name}: ‖u′‖₁ = {:.4} ≤ {:.4} ({})",
            c.velocity_l1,
            c.velocity_bound,
            if c.pass { "ok" } else { "violated" }
        ));
    }
    report("coercivity chain", ok, lines.join("; "));
    assert!(ok);
}
