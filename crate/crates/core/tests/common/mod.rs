//! Brute-force references shared by the integration tests. Nothing here
//! calls the hull code under test.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Lower envelope of sampled points at `xi` by scanning every pair.
pub fn pair_min_1d(xs: &[f64], ys: &[f64], xi: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..xs.len() {
        if xs[i] == xi {
            best = best.min(ys[i]);
        }
        for j in 0..xs.len() {
            if xs[i] < xi && xi < xs[j] {
                let w = (xs[j] - xi) / (xs[j] - xs[i]);
                best = best.min(w * ys[i] + (1.0 - w) * ys[j]);
            }
        }
    }
    best
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Lower envelope of a 2D cloud at `xi` by scanning every point, segment
/// and triangle containing it.
pub fn triple_min_2d(pts: &[[f64; 3]], xi: [f64; 2]) -> f64 {
    let p2 = |p: &[f64; 3]| [p[0], p[1]];
    let n = pts.len();
    let mut best = f64::INFINITY;
    for a in 0..n {
        if pts[a][0] == xi[0] && pts[a][1] == xi[1] {
            best = best.min(pts[a][2]);
        }
        for b in a + 1..n {
            let (pa, pb) = (p2(&pts[a]), p2(&pts[b]));
            if orient(pa, pb, xi).abs() <= 1e-13 {
                let d = [pb[0] - pa[0], pb[1] - pa[1]];
                let len2 = d[0] * d[0] + d[1] * d[1];
                let s = ((xi[0] - pa[0]) * d[0] + (xi[1] - pa[1]) * d[1]) / len2;
                if (0.0..=1.0).contains(&s) {
                    best = best.min((1.0 - s) * pts[a][2] + s * pts[b][2]);
                }
            }
            for c in b + 1..n {
                let pc = p2(&pts[c]);
                let area = orient(pa, pb, pc);
                if area.abs() <= 1e-13 {
                    continue;
                }
                let la = orient(xi, pb, pc) / area;
                let lb = orient(pa, xi, pc) / area;
                let lc = 1.0 - la - lb;
                if la >= -1e-12 && lb >= -1e-12 && lc >= -1e-12 {
                    best = best.min(la * pts[a][2] + lb * pts[b][2] + lc * pts[c][2]);
                }
            }
        }
    }
    best
}

/// Sorted distinct random grid with `n` points inside `[lo, hi]`.
pub fn random_grid(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Random values of one of a few shapes: noise, convex plus noise, wells.
pub fn random_values(rng: &mut ChaCha8Rng, xs: &[f64]) -> Vec<f64> {
    let shape = rng.gen_range(0..3);
    let c = rng.gen_range(-1.0..1.0);
    xs.iter()
        .map(|&x| match shape {
            0 => rng.gen_range(-5.0..5.0),
            1 => x * x + c * x + rng.gen_range(-0.5..0.5),
            _ => (x * x - 1.0).powi(2) + c * x.sin(),
        })
        .collect()
}

/// Minimal cost over every grid path with per-step jump in `[-k_max, k_max]`.
pub fn exhaustive_paths(
    n_t: usize,
    n_x: usize,
    start: usize,
    end: usize,
    k_max: usize,
    cost: &dyn Fn(usize, usize, usize) -> f64,
) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn go(
        i: usize,
        j: usize,
        acc: f64,
        n_t: usize,
        n_x: usize,
        end: usize,
        k_max: usize,
        cost: &dyn Fn(usize, usize, usize) -> f64,
        best: &mut f64,
    ) {
        if i == n_t {
            if j == end && acc < *best {
                *best = acc;
            }
            return;
        }
        let lo = j.saturating_sub(k_max);
        let hi = (j + k_max).min(n_x - 1);
        for jn in lo..=hi {
            go(i + 1, jn, acc + cost(i, j, jn), n_t, n_x, end, k_max, cost, best);
        }
    }
    let mut best = f64::INFINITY;
    go(0, start, 0.0, n_t, n_x, end, k_max, cost, &mut best);
    best
}
