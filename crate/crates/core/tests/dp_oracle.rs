//! The DP against brute-force enumeration of every grid path.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varelax_core::catalog::{StateFn, TimeFactor, VelocityFn};
use varelax_core::family::{IntegrandFamily, StateFamily};
use varelax_core::relax::{solve_relaxed, DpConfig, Discretization, Problem};

fn oracle_value(p: &Problem, cfg: &DpConfig) -> f64 {
    let d = Discretization::new(p, cfg).unwrap();
    let vs = d.velocity_grid.points().to_vec();
    let cost = |i: usize, j: usize, jn: usize| {
        let t = d.times[i];
        let v = (jn as f64 - j as f64) * d.dx / d.h;
        let fs: Vec<f64> = vs.iter().map(|&q| p.f.eval(t, q)).collect();
        d.h * (common::pair_min_1d(&vs, &fs, v) + p.g.eval(t, d.states[j]))
    };
    common::exhaustive_paths(d.n_t(), d.states.len(), d.a_index, d.b_index, d.k_max, &cost)
}

fn velocity_fn(rng: &mut ChaCha8Rng) -> VelocityFn {
    match rng.gen_range(0..5) {
        0 => VelocityFn::PowerP { p: rng.gen_range(1.2..3.0) },
        1 => VelocityFn::DoubleWell,
        2 => VelocityFn::LinearMinusSqrt,
        3 => VelocityFn::Abs,
        _ => VelocityFn::SqrtOnePlus,
    }
}

fn state_family(rng: &mut ChaCha8Rng) -> StateFamily {
    match rng.gen_range(0..4) {
        0 => StateFamily::zero(),
        1 => StateFamily::autonomous(StateFn::ConcaveQuadratic { kappa: rng.gen_range(0.0..2.0) }),
        2 => StateFamily::autonomous(StateFn::Affine {
            slope: rng.gen_range(-1.0..1.0),
            intercept: 0.0,
        }),
        _ => StateFamily::new(
            StateFn::Zero,
            StateFn::ConcaveQuadratic { kappa: 1.0 },
            TimeFactor::Sine { kappa: 1.0, omega: 3.0 },
        ),
    }
}

#[test]
fn dp_matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..40 {
        let f = if rng.gen_bool(0.3) {
            IntegrandFamily::new(
                velocity_fn(&mut rng),
                VelocityFn::PowerP { p: 2.0 },
                TimeFactor::AffineT { c0: 0.0, c1: 1.0 },
            )
        } else {
            IntegrandFamily::autonomous(velocity_fn(&mut rng))
        };
        let n_t = rng.gen_range(2..=5);
        let n_x = rng.gen_range(3..=7);
        let a = if rng.gen_bool(0.5) { 0.0 } else { 0.5 };
        let b = [0.0, 0.5, 1.0][rng.gen_range(0..3)];
        let p = Problem {
            horizon: rng.gen_range(0.5..2.0),
            a,
            b,
            f,
            g: state_family(&mut rng),
            state_box: (-1.0, 1.0),
            velocity_cap: 8.0,
        };
        let cfg = DpConfig::new(n_t, n_x);
        let expect = oracle_value(&p, &cfg);
        let got = solve_relaxed(&p, &cfg).unwrap();
        assert!(
            (got.value - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
            "case {case}: dp {} vs oracle {expect} for {p:?}",
            got.value
        );
        assert_eq!(got.states[0], p.a);
        assert_eq!(*got.states.last().unwrap(), p.b);
    }
}

#[test]
fn dp_is_deterministic() {
    let p = Problem {
        horizon: 1.0,
        a: 0.0,
        b: 0.0,
        f: IntegrandFamily::autonomous(VelocityFn::DoubleWell),
        g: StateFamily::zero(),
        state_box: (-1.0, 1.0),
        velocity_cap: 2.0,
    };
    let cfg = DpConfig::new(16, 33);
    assert_eq!(solve_relaxed(&p, &cfg).unwrap(), solve_relaxed(&p, &cfg).unwrap());
}
