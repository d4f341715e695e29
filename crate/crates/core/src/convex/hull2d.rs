//! Lower hull of a sampled epigraph over a planar velocity domain.
//!
//! Facets are found by exhaustive plane enumeration (O(n⁴) in the number of
//! samples), which is exact up to a relative coplanarity tolerance and
//! intended for desk-scale clouds of a few hundred points at most.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::envelope::CaratheodoryDecomposition;
use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::Serialize;

const COPLANAR_REL: f64 = 1e-12;
const INSIDE_TOL: f64 = 1e-12;

/// Finite set of epigraph samples `(ξ₁, ξ₂, value)`; duplicates of the
/// same ξ keep the smallest value.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct EpigraphCloud2D {
    points: Vec<[f64; 3]>,
}

impl EpigraphCloud2D {
    pub fn new(mut raw: Vec<[f64; 3]>) -> Result<Self> {
        if raw.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("cloud coordinates must be finite".into()));
        }
        raw.sort_by(|a, b| {
            a[0].total_cmp(&b[0])
                .then(a[1].total_cmp(&b[1]))
                .then(a[2].total_cmp(&b[2]))
        });
        // sorted so the first of each (ξ₁, ξ₂) run carries the minimum
        raw.dedup_by(|later, kept| later[0] == kept[0] && later[1] == kept[1]);
        Ok(Self { points: raw })
    }

    /// Tabulate `f` on the tensor grid `xs × ys`.
    pub fn sample(xs: &[f64], ys: &[f64], f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut pts = Vec::with_capacity(xs.len() * ys.len());
        for &x in xs {
            for &y in ys {
                pts.push([x, y, f(x, y)]);
            }
        }
        Self::new(pts)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    fn scales(&self) -> (f64, f64) {
        let mut sxy: f64 = 1.0;
        let mut sz: f64 = 1.0;
        for p in &self.points {
            sxy = sxy.max(libm::fabs(p[0])).max(libm::fabs(p[1]));
            sz = sz.max(libm::fabs(p[2]));
        }
        (sxy, sz)
    }
}

/// A lower-hull facet: a convex polygon of cloud points lying on a common
/// supporting plane `z = slope·ξ + offset`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize))]
pub struct Facet2D {
    /// Cloud indices of the polygon vertices, counterclockwise in the ξ-plane.
    pub vertices: Vec<usize>,
    /// Outward unit normal; its last component is negative.
    pub normal: [f64; 3],
    pub slope: [f64; 2],
    pub offset: f64,
}

fn orient(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Counterclockwise convex polygon (monotone chain, collinear points dropped)
/// of the ξ-projections of `idx`.
fn planar_hull(pts: &[[f64; 3]], mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && orient(pts[lower[lower.len() - 2]], pts[lower[lower.len() - 1]], pts[i]) <= 0.0
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && orient(pts[upper[upper.len() - 2]], pts[upper[upper.len() - 1]], pts[i]) <= 0.0
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// All facets of the lower convex hull of the cloud.
pub fn lower_hull_2d(cloud: &EpigraphCloud2D) -> Result<Vec<Facet2D>> {
    let pts = cloud.points();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Degenerate("2D hull needs at least 3 points".into()));
    }
    let (sxy, sz) = cloud.scales();
    let orient_tol = COPLANAR_REL * sxy * sxy;
    let mut facets: Vec<Facet2D> = Vec::new();
    let mut covered: Vec<BTreeSet<usize>> = Vec::new();
    let mut any_independent = false;

    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let area = orient(pts[i], pts[j], pts[k]);
                if libm::fabs(area) <= orient_tol {
                    continue;
                }
                any_independent = true;
                if covered
                    .iter()
                    .any(|s| s.contains(&i) && s.contains(&j) && s.contains(&k))
                {
                    continue;
                }
                let mut normal = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                if normal[2] > 0.0 {
                    normal = [-normal[0], -normal[1], -normal[2]];
                }
                let norm = libm::sqrt(dot(normal, normal));
                let tol = COPLANAR_REL * norm * (sxy + sz);
                let mut on_plane = Vec::new();
                let mut supporting = true;
                for (m, &p) in pts.iter().enumerate() {
                    let h = dot(normal, sub(p, pts[i]));
                    if h > tol {
                        supporting = false;
                        break;
                    }
                    if h >= -tol {
                        on_plane.push(m);
                    }
                }
                if !supporting {
                    continue;
                }
                covered.push(on_plane.iter().copied().collect());
                let vertices = planar_hull(pts, on_plane);
                let unit = [normal[0] / norm, normal[1] / norm, normal[2] / norm];
                // z = p₀ + slope·(ξ − ξ₀) on the plane
                let slope = [-normal[0] / normal[2], -normal[1] / normal[2]];
                let offset = pts[i][2] - slope[0] * pts[i][0] - slope[1] * pts[i][1];
                facets.push(Facet2D {
                    vertices,
                    normal: unit,
                    slope,
                    offset,
                });
            }
        }
    }
    if !any_independent {
        return Err(Error::Degenerate(
            "cloud projections are collinear; no 2D hull".into(),
        ));
    }
    Ok(facets)
}

fn barycentric(a: [f64; 3], b: [f64; 3], c: [f64; 3], q: [f64; 2]) -> [f64; 3] {
    let qp = [q[0], q[1], 0.0];
    let area = orient(a, b, c);
    let la = orient(qp, b, c) / area;
    let lb = orient(a, qp, c) / area;
    [la, lb, 1.0 - la - lb]
}

/// Decompose the lower-hull value at `xi` into at most three cloud points.
pub fn decompose_2d(
    cloud: &EpigraphCloud2D,
    facets: &[Facet2D],
    xi: [f64; 2],
) -> Result<CaratheodoryDecomposition<[f64; 2]>> {
    let pts = cloud.points();
    if let Some(p) = pts.iter().find(|p| p[0] == xi[0] && p[1] == xi[1]) {
        // a sample on the hull decomposes onto itself; above it, fall through
        let on_hull = facets.iter().any(|f| {
            let plane = f.offset + f.slope[0] * xi[0] + f.slope[1] * xi[1];
            libm::fabs(plane - p[2]) <= 1e-12 * (1.0 + libm::fabs(p[2]))
        });
        if on_hull {
            return Ok(CaratheodoryDecomposition {
                weights: alloc::vec![1.0],
                points: alloc::vec![[p[0], p[1]]],
                point_values: alloc::vec![p[2]],
                target: xi,
                envelope_value: p[2],
            });
        }
    }
    for facet in facets {
        let v = &facet.vertices;
        for t in 1..v.len().saturating_sub(1) {
            let tri = [v[0], v[t], v[t + 1]];
            let lam = barycentric(pts[tri[0]], pts[tri[1]], pts[tri[2]], xi);
            if lam.iter().any(|&l| l < -INSIDE_TOL) {
                continue;
            }
            let mut weights = Vec::new();
            let mut points = Vec::new();
            let mut point_values = Vec::new();
            let total: f64 = lam.iter().map(|l| l.max(0.0)).sum();
            for (m, &l) in tri.iter().zip(&lam) {
                let l = l.max(0.0) / total;
                if l > INSIDE_TOL {
                    weights.push(l);
                    points.push([pts[*m][0], pts[*m][1]]);
                    point_values.push(pts[*m][2]);
                }
            }
            let wsum: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= wsum;
            }
            let envelope_value = weights.iter().zip(&point_values).map(|(l, z)| l * z).sum();
            return Ok(CaratheodoryDecomposition {
                weights,
                points,
                point_values,
                target: xi,
                envelope_value,
            });
        }
    }
    Err(Error::OutsideHull { x: xi[0], y: xi[1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn paraboloid_vertex_is_trivial() {
        let g = axis(9, -2.0, 2.0);
        let cloud = EpigraphCloud2D::sample(&g, &g, |x, y| x * x + y * y).unwrap();
        let facets = lower_hull_2d(&cloud).unwrap();
        assert!(facets.iter().all(|f| f.normal[2] < 0.0));
        let d = decompose_2d(&cloud, &facets, [0.0, 0.0]).unwrap();
        assert!(d.is_trivial());
        assert_eq!(d.weights, vec![1.0]);
        d.check(1e-12).unwrap();
    }

    #[test]
    fn radial_double_well_is_zero_inside_unit_ball() {
        let g = axis(5, -2.0, 2.0);
        let cloud = EpigraphCloud2D::sample(&g, &g, |x, y| {
            let r = x * x + y * y - 1.0;
            r * r
        })
        .unwrap();
        let facets = lower_hull_2d(&cloud).unwrap();
        let d = decompose_2d(&cloud, &facets, [0.0, 0.0]).unwrap();
        assert_eq!(d.envelope_value, 0.0);
        assert!(d.point_values.iter().all(|&v| v == 0.0));
        assert!(d.weights.len() <= 3);
        d.check(1e-12).unwrap();
    }

    #[test]
    fn duplicates_keep_minimum() {
        let cloud =
            EpigraphCloud2D::new(vec![[0.0, 0.0, 3.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(cloud.points(), &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]);
    }

    #[test]
    fn degenerate_and_outside() {
        let cloud =
            EpigraphCloud2D::new(vec![[0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [2.0, 2.0, 5.0]]).unwrap();
        assert!(matches!(lower_hull_2d(&cloud), Err(Error::Degenerate(_))));

        let g = axis(3, 0.0, 1.0);
        let cloud = EpigraphCloud2D::sample(&g, &g, |x, y| x + y).unwrap();
        let facets = lower_hull_2d(&cloud).unwrap();
        assert_eq!(facets.len(), 1);
        assert_eq!(facets[0].vertices.len(), 4);
        assert!(matches!(
            decompose_2d(&cloud, &facets, [1.5, 0.5]),
            Err(Error::OutsideHull { .. })
        ));
    }
}
