//! Convex, downward-closed rate regions in the nonnegative quadrant and the
//! comparisons between them.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const VERTEX_EPS: f64 = 1e-12;

/// A convex, comprehensive subset of the nonnegative quadrant, stored as
/// its boundary vertices in bits per channel use, ordered from
/// `(R1_max, 0)` to `(0, R2_max)`.
///
/// The zero region is the single vertex `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    vertices: Vec<[f64; 2]>,
}

/// `n · r <= offset`, with `n` scaled to unit max-norm so violations read
/// in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl HalfPlane {
    fn new(normal: [f64; 2], offset: f64) -> Self {
        let scale = normal[0].abs().max(normal[1].abs());
        HalfPlane { normal: [normal[0] / scale, normal[1] / scale], offset: offset / scale }
    }

    pub fn violation(&self, p: [f64; 2]) -> f64 {
        self.normal[0] * p[0] + self.normal[1] * p[1] - self.offset
    }
}

impl RateRegion {
    /// Validates a boundary vertex list. Near-duplicate and collinear
    /// vertices are dropped.
    pub fn from_boundary(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Argument("a region needs at least one vertex".into()));
        }
        if vertices.iter().any(|v| !(v[0] >= -VERTEX_EPS && v[1] >= -VERTEX_EPS)) {
            return Err(Error::Argument("region vertices must be nonnegative".into()));
        }
        let mut vs: Vec<[f64; 2]> = Vec::with_capacity(vertices.len());
        for v in vertices {
            let v = [v[0].max(0.0), v[1].max(0.0)];
            if vs.last().is_none_or(|l| (l[0] - v[0]).abs() > VERTEX_EPS || (l[1] - v[1]).abs() > VERTEX_EPS) {
                vs.push(v);
            }
        }
        let first = vs[0];
        let last = vs[vs.len() - 1];
        if first[1] > VERTEX_EPS || last[0] > VERTEX_EPS {
            return Err(Error::Argument(
                "boundary must run from the R1 axis to the R2 axis".into(),
            ));
        }
        let n = vs.len();
        vs[0][1] = 0.0;
        vs[n - 1][0] = 0.0;
        for w in vs.windows(2) {
            if w[1][0] > w[0][0] + VERTEX_EPS || w[1][1] < w[0][1] - VERTEX_EPS {
                return Err(Error::Argument("boundary is not monotone".into()));
            }
        }
        // drop collinear interior vertices, then check convexity
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(vs.len());
        for v in vs {
            while out.len() >= 2 {
                let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
                if cross(a, b, v).abs() <= 1e-12 * (1.0 + norm(a) + norm(v)) {
                    out.pop();
                } else {
                    break;
                }
            }
            out.push(v);
        }
        for w in out.windows(3) {
            if cross(w[0], w[1], w[2]) < -1e-9 {
                return Err(Error::Argument("boundary is not convex".into()));
            }
        }
        Ok(RateRegion { vertices: out })
    }

    pub fn zero() -> Self {
        RateRegion { vertices: vec![[0.0, 0.0]] }
    }

    /// `[0, a] × [0, b]`.
    pub fn rectangle(a: f64, b: f64) -> Self {
        RateRegion::from_boundary(vec![[a, 0.0], [a, b], [0.0, b]]).expect("valid rectangle")
    }

    /// Downward closure of the convex hull of `points` (plus the origin).
    pub fn hull_of(points: &[[f64; 2]]) -> Self {
        let mut pts: Vec<[f64; 2]> = points
            .iter()
            .map(|p| [p[0].max(0.0), p[1].max(0.0)])
            .collect();
        let r1 = pts.iter().map(|p| p[0]).fold(0.0, f64::max);
        let r2 = pts.iter().map(|p| p[1]).fold(0.0, f64::max);
        pts.push([r1, 0.0]);
        pts.push([0.0, r2]);
        // upper-right chain by monotone chain on x descending
        pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(a[1].total_cmp(&b[1])));
        let mut chain: Vec<[f64; 2]> = Vec::new();
        for p in pts {
            while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
                chain.pop();
            }
            chain.push(p);
        }
        // keep the part from the lowest point at max R1 to the highest at R1=0
        let start = chain.iter().position(|p| p[0] >= r1 - VERTEX_EPS).unwrap_or(0);
        let mut boundary: Vec<[f64; 2]> = chain[start..].to_vec();
        boundary.retain(|p| p[1] <= r2 + VERTEX_EPS);
        if boundary.first().is_some_and(|p| p[1] > 0.0) {
            boundary.insert(0, [r1, 0.0]);
        }
        if boundary.last().is_some_and(|p| p[0] > 0.0) {
            boundary.push([0.0, r2]);
        }
        RateRegion::from_boundary(boundary).unwrap_or_else(|_| RateRegion::zero())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn is_zero(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn r1_max(&self) -> f64 {
        self.vertices[0][0]
    }

    pub fn r2_max(&self) -> f64 {
        self.vertices[self.vertices.len() - 1][1]
    }

    /// Boundary plus the origin, counterclockwise, without repeats.
    pub fn polygon(&self) -> Vec<[f64; 2]> {
        let mut p = vec![[0.0, 0.0]];
        for v in &self.vertices {
            if norm(*v) > VERTEX_EPS {
                p.push(*v);
            }
        }
        p
    }

    /// Half-plane description: the two axes, the two extent bounds and the
    /// supporting line of every boundary edge.
    pub fn half_planes(&self) -> Vec<HalfPlane> {
        let mut hs = vec![
            HalfPlane::new([-1.0, 0.0], 0.0),
            HalfPlane::new([0.0, -1.0], 0.0),
            HalfPlane::new([1.0, 0.0], self.r1_max()),
            HalfPlane::new([0.0, 1.0], self.r2_max()),
        ];
        for w in self.vertices.windows(2) {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
            if norm(d) <= VERTEX_EPS {
                continue;
            }
            let n = [d[1], -d[0]];
            hs.push(HalfPlane::new(n, n[0] * w[0][0] + n[1] * w[0][1]));
        }
        hs
    }

    /// Largest half-plane violation of `p`, zero or negative when inside.
    pub fn violation(&self, p: [f64; 2]) -> f64 {
        self.half_planes()
            .iter()
            .map(|h| h.violation(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: [f64; 2], tol: f64) -> bool {
        self.violation(p) <= tol
    }

    pub fn area(&self) -> f64 {
        let poly = self.polygon();
        let n = poly.len();
        if n < 3 {
            return 0.0;
        }
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
    }

    /// Euclidean distance from `p` to the region.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        if self.contains(p, 1e-12) {
            return 0.0;
        }
        let poly = self.polygon();
        if poly.len() == 1 {
            return norm(p);
        }
        (0..poly.len())
            .map(|i| segment_distance(p, poly[i], poly[(i + 1) % poly.len()]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Whether every vertex of `a` satisfies `b`'s half-plane description with
/// slack at least `-tol`, and the worst violation found (0 when none).
/// Violations below the vertex tolerance are rounding and count as zero.
pub fn region_subset(a: &RateRegion, b: &RateRegion, tol: f64) -> (bool, f64) {
    let hs = b.half_planes();
    let worst = a
        .polygon()
        .iter()
        .flat_map(|&v| hs.iter().map(move |h| h.violation(v)))
        .fold(0.0, f64::max);
    let worst = if worst <= VERTEX_EPS { 0.0 } else { worst };
    (worst <= tol, worst)
}

/// Hausdorff distance between two regions as point sets.
pub fn hausdorff(a: &RateRegion, b: &RateRegion) -> f64 {
    let one_way = |x: &RateRegion, y: &RateRegion| {
        x.polygon().iter().map(|&v| y.distance(v)).fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    norm([p[0] - a[0] - t * d[0], p[1] - a[1] - t * d[1]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> RateRegion {
        RateRegion::from_boundary(vec![[1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn subset_examples() {
        let sq = RateRegion::rectangle(1.0, 1.0);
        assert_eq!(region_subset(&sq, &sq, 0.0), (true, 0.0));
        let (ok, v) = region_subset(&sq, &triangle(), 1e-9);
        assert!(!ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert!(region_subset(&triangle(), &sq, 0.0).0);
    }

    #[test]
    fn hausdorff_examples() {
        let sq = RateRegion::rectangle(1.0, 1.0);
        assert_eq!(hausdorff(&sq, &sq), 0.0);
        let wide = RateRegion::rectangle(2.0, 1.0);
        assert!((hausdorff(&sq, &wide) - 1.0).abs() < 1e-12);
        assert!((hausdorff(&wide, &sq) - 1.0).abs() < 1e-12);
        assert!((hausdorff(&RateRegion::zero(), &sq) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_regions() {
        let seg = RateRegion::from_boundary(vec![[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(seg.area(), 0.0);
        assert!(!seg.contains([0.5, 0.1], 1e-9));
        assert!(seg.contains([0.5, 0.0], 1e-9));
        assert!(!seg.contains([1.1, 0.0], 1e-9));
        assert!((hausdorff(&seg, &triangle()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_boundaries_rejected() {
        assert!(RateRegion::from_boundary(vec![[1.0, 0.0], [0.2, 0.2], [0.0, 1.0]]).is_err());
        assert!(RateRegion::from_boundary(vec![[1.0, 0.5], [0.0, 1.0]]).is_err());
        assert!(RateRegion::from_boundary(vec![[0.0, 1.0], [1.0, 0.0]]).is_err());
        assert!(RateRegion::from_boundary(vec![[-1.0, 0.0], [0.0, 0.0]]).is_err());
    }

    #[test]
    fn hull_of_points() {
        let r = RateRegion::hull_of(&[[1.0, 0.0], [0.0, 1.0], [0.6, 0.6], [0.1, 0.1]]);
        assert_eq!(r.vertices(), &[[1.0, 0.0], [0.6, 0.6], [0.0, 1.0]]);
        assert!(RateRegion::hull_of(&[[0.0, 0.0]]).is_zero());
        let sq = RateRegion::hull_of(&[[1.0, 1.0]]);
        assert_eq!(sq, RateRegion::rectangle(1.0, 1.0));
    }

    proptest! {
        #[test]
        fn hausdorff_symmetric_and_subset_consistent(
            pts_a in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..6),
            pts_b in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 1..6),
        ) {
            let a = RateRegion::hull_of(&pts_a.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>());
            let b = RateRegion::hull_of(&pts_b.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>());
            let d = hausdorff(&a, &b);
            prop_assert!((d - hausdorff(&b, &a)).abs() < 1e-12);
            prop_assert!(hausdorff(&a, &a) < 1e-12);
            // if a ⊆ b then every point of a is at distance 0 from b
            if region_subset(&a, &b, 0.0).0 {
                prop_assert!(a.polygon().iter().all(|&v| b.distance(v) < 1e-9));
            }
            let union = RateRegion::hull_of(
                &a.vertices().iter().chain(b.vertices()).copied().collect::<Vec<_>>(),
            );
            prop_assert!(region_subset(&a, &union, 1e-9).0);
            prop_assert!(union.area() + 1e-12 >= a.area().max(b.area()));
        }
    }
}
