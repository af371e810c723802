//! Two-dimensional rate regions of the cognitive interference channel,
//! computed as intersections of supporting half-planes from a sweep of
//! weighted-sum-rate maximizations.
//!
//! For a fixed input distribution every region is a polygon
//! `{R >= 0 : c_j · R <= b_j(p)}`. The weighted sum `μ · R` over that polygon
//! equals the dual minimum `min_ν ν · b(p)` over the finitely many dual
//! vertices `ν`, so the support function `max_p max_R μ · R` becomes a
//! max-min of smooth information functionals that the simplex optimizer
//! handles directly.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::expr::{mi, InfoExpr, Scope, Var, Var::*};
use crate::functional::Compiled;
use crate::geometry::RateRegion;
use crate::optim::{sub_seed, Budget, GridCache, Objective};
use crate::prob::ProbTensor;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

/// Region comparisons at desk scale are made at this tolerance (bits).
pub const TOL_REGION: f64 = 5e-3;
/// Slack below which a constraint counts as tight (bits).
pub const TIGHT_TOL: f64 = 1e-6;
pub const DEFAULT_ANGLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionId {
    #[serde(rename = "C_I")]
    CI,
    #[serde(rename = "C_II")]
    CII,
    #[serde(rename = "C_III")]
    CIII,
    #[serde(rename = "C_III_prime")]
    CIIIPrime,
    #[serde(rename = "C_IV")]
    CIV,
    #[serde(rename = "R_o")]
    Ro,
    #[serde(rename = "R_o_prime")]
    RoPrime,
}

impl RegionId {
    pub const ALL: [RegionId; 7] = [
        RegionId::CI,
        RegionId::CII,
        RegionId::CIII,
        RegionId::CIIIPrime,
        RegionId::CIV,
        RegionId::Ro,
        RegionId::RoPrime,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionId::CI => "C_I",
            RegionId::CII => "C_II",
            RegionId::CIII => "C_III",
            RegionId::CIIIPrime => "C_III_prime",
            RegionId::CIV => "C_IV",
            RegionId::Ro => "R_o",
            RegionId::RoPrime => "R_o_prime",
        }
    }

    pub fn spec(self) -> RegionSpec {
        RegionSpec::new(self)
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RegionId::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown region `{s}`")))
    }
}

/// `coef · (R1, R2) <= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Stable identifier used in reports and CSV output.
    pub id: &'static str,
    pub coef: [f64; 2],
    pub bound: InfoExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub id: RegionId,
    pub constraints: Vec<Constraint>,
}

impl RegionSpec {
    pub fn new(id: RegionId) -> Self {
        let r1 = [1.0, 0.0];
        let r2 = [0.0, 1.0];
        let sum = [1.0, 1.0];
        let c = |id, coef, bound| Constraint { id, coef, bound };
        let split = || InfoExpr::term(mi(&[U, X1], &[Y1], &[])).plus(mi(&[X2], &[Y2], &[U, X1]));
        let constraints = match id {
            RegionId::CI => vec![
                c("r1", r1, InfoExpr::term(mi(&[U], &[Y1], &[]))),
                c("r2", r2, InfoExpr::term(mi(&[X2], &[Y2], &[U]))),
            ],
            RegionId::CII => vec![
                c("r1", r1, InfoExpr::term(mi(&[X1], &[Y1], &[]))),
                c("r2", r2, InfoExpr::term(mi(&[X2], &[Y2], &[X1]))),
            ],
            RegionId::CIII => vec![
                c("r1", r1, InfoExpr::term(mi(&[U, X1], &[Y1], &[]))),
                c("r2", r2, InfoExpr::term(mi(&[X2], &[Y2], &[U, X1]))),
            ],
            RegionId::CIIIPrime => vec![
                c("r1", r1, InfoExpr::term(mi(&[U, X1], &[Y1], &[]))),
                c("r2", r2, InfoExpr::term(mi(&[X2], &[Y2], &[X1]))),
                c("sum_split", sum, split()),
            ],
            RegionId::CIV | RegionId::RoPrime => vec![
                c("r1", r1, InfoExpr::term(mi(&[U, X1], &[Y1], &[]))),
                c("r2", r2, InfoExpr::term(mi(&[X2], &[Y2], &[U, X1]))),
                c("sum", sum, InfoExpr::term(mi(&[X1, X2], &[Y2], &[]))),
            ],
            RegionId::Ro => vec![
                c("r1", r1, InfoExpr::term(mi(&[U, X1], &[Y1], &[]))),
                c("sum_split", sum, split()),
                c("sum", sum, InfoExpr::term(mi(&[X1, X2], &[Y2], &[]))),
            ],
        };
        RegionSpec { id, constraints }
    }

    pub fn uses_aux(&self) -> bool {
        self.constraints.iter().any(|c| c.bound.uses(Var::U))
    }

    pub fn scope(&self, aux_card: usize) -> Scope {
        if self.uses_aux() {
            Scope::Auxiliary(aux_card)
        } else {
            Scope::Inputs
        }
    }

    /// The same region with one constraint removed.
    pub fn without(&self, constraint: &str) -> RegionSpec {
        RegionSpec {
            id: self.id,
            constraints: self.constraints.iter().filter(|c| c.id != constraint).cloned().collect(),
        }
    }

    pub fn coefficients(&self) -> Vec<[f64; 2]> {
        self.constraints.iter().map(|c| c.coef).collect()
    }
}

/// Maximum of `μ · R` over the polygon `{R >= 0 : coef_j · R <= bound_j}`,
/// together with a maximizing corner (ties broken toward larger `R1`).
pub fn polygon_max(coefs: &[[f64; 2]], bounds: &[f64], mu: [f64; 2]) -> (f64, [f64; 2]) {
    let mut lines: Vec<([f64; 2], f64)> = coefs.iter().copied().zip(bounds.iter().copied()).collect();
    lines.push(([1.0, 0.0], f64::INFINITY)); // placeholders for the axes below
    let n = coefs.len();
    let feasible = |r: [f64; 2]| {
        r[0] >= -1e-12
            && r[1] >= -1e-12
            && coefs
                .iter()
                .zip(bounds)
                .all(|(c, b)| c[0] * r[0] + c[1] * r[1] <= b + 1e-12 * (1.0 + b.abs()))
    };
    let axes = [([1.0, 0.0], 0.0), ([0.0, 1.0], 0.0)];
    let all: Vec<([f64; 2], f64)> = lines[..n].iter().copied().chain(axes).collect();
    let mut best = (0.0, [0.0, 0.0]);
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let ((a, p), (b, q)) = (all[i], all[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-15 {
                continue;
            }
            let r = [(p * b[1] - a[1] * q) / det, (a[0] * q - p * b[0]) / det];
            if !feasible(r) {
                continue;
            }
            let r = [r[0].max(0.0), r[1].max(0.0)];
            let v = mu[0] * r[0] + mu[1] * r[1];
            if v > best.0 + 1e-14 || ((v - best.0).abs() <= 1e-14 && r[0] > best.1[0]) {
                best = (v, r);
            }
        }
    }
    best
}

/// Vertices of the dual polyhedron `{ν >= 0 : Σ_j ν_j coef_j >= μ}`. The
/// polygon maximum equals `min_ν ν · bounds` over these whenever the bounds
/// are nonnegative.
pub fn dual_vertices(coefs: &[[f64; 2]], mu: [f64; 2]) -> Vec<Vec<f64>> {
    let m = coefs.len();
    // rows: 0,1 are the covering rows Σ ν_j coef_j[i] = μ_i; 2.. are ν_j = 0
    let row = |r: usize| -> (Vec<f64>, f64) {
        if r < 2 {
            (coefs.iter().map(|c| c[r]).collect(), mu[r])
        } else {
            let mut e = vec![0.0; m];
            e[r - 2] = 1.0;
            (e, 0.0)
        }
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    let total = m + 2;
    for subset in 0u32..(1 << total) {
        if subset.count_ones() as usize != m {
            continue;
        }
        let rows: Vec<(Vec<f64>, f64)> = (0..total).filter(|r| subset >> r & 1 == 1).map(row).collect();
        let Some(nu) = solve(rows) else { continue };
        let feasible = nu.iter().all(|&v| v >= -1e-12)
            && (0..2).all(|i| {
                coefs.iter().zip(&nu).map(|(c, v)| c[i] * v).sum::<f64>() >= mu[i] - 1e-12
            });
        if !feasible {
            continue;
        }
        let nu: Vec<f64> = nu.into_iter().map(|v| if v.abs() < 1e-14 { 0.0 } else { v }).collect();
        if !out.iter().any(|o| o.iter().zip(&nu).all(|(a, b)| (a - b).abs() < 1e-12)) {
            out.push(nu);
        }
    }
    out
}

/// Gaussian elimination with partial pivoting on a small square system.
fn solve(rows: Vec<(Vec<f64>, f64)>) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.into_iter().map(|(mut r, b)| {
        r.push(b);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in col..=n {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// One solved direction of the support-function sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SupportPoint {
    pub theta: f64,
    pub weights: [f64; 2],
    /// `max μ · R` over the region, in bits.
    pub value: f64,
    /// Input distribution attaining `value`.
    pub witness: ProbTensor,
    /// Constraint right-hand sides evaluated at the witness.
    pub bounds: Vec<f64>,
    /// Maximizing corner of the witness polygon.
    pub point: [f64; 2],
    pub restarts: usize,
    pub iterations: usize,
}

/// Compiled constraint bounds for one (channel, region, |U|) triple, shared
/// by every direction of a sweep.
struct Sweeper {
    channel: Channel,
    spec: RegionSpec,
    scope: Scope,
    compiled: Compiled,
    bounds: Vec<Vec<f64>>,
    grid: GridCache,
    budget: Budget,
}

impl Sweeper {
    fn new(channel: &Channel, spec: &RegionSpec, budget: &Budget) -> Result<Self> {
        budget.validate()?;
        if spec.constraints.is_empty() {
            return Err(Error::Argument("region has no constraints".into()));
        }
        let scope = spec.scope(budget.aux_card);
        let mut compiled = Compiled::new(channel, scope);
        let sparse = spec
            .constraints
            .iter()
            .map(|c| compiled.add(&c.bound))
            .collect::<Result<Vec<_>>>()?;
        let bounds = sparse.iter().map(|s| compiled.dense(s)).collect();
        let grid = GridCache::new(&compiled, budget);
        Ok(Sweeper {
            channel: channel.clone(),
            spec: spec.clone(),
            scope,
            compiled,
            bounds,
            grid,
            budget: *budget,
        })
    }

    fn bounds_at(&self, p: &[f64]) -> Vec<f64> {
        let mut scratch = self.compiled.scratch();
        let h = self.compiled.entropies(p, &mut scratch);
        self.bounds
            .iter()
            .map(|b| b.iter().zip(h).map(|(c, v)| c * v).sum::<f64>().max(0.0))
            .collect()
    }

    fn objective(&self, weights: [f64; 2]) -> Objective<'_> {
        let pieces: Vec<Vec<f64>> = dual_vertices(&self.spec.coefficients(), weights)
            .into_iter()
            .map(|nu| {
                let mut piece = vec![0.0; self.compiled.n_terms()];
                for (n, b) in nu.iter().zip(&self.bounds) {
                    for (p, c) in piece.iter_mut().zip(b) {
                        *p += n * c;
                    }
                }
                piece
            })
            .collect();
        Objective { compiled: &self.compiled, pieces }
    }

    fn search(&self, weights: [f64; 2], stream: u64) -> Search {
        let out = self.objective(weights).maximize(&self.grid, &[], &self.budget, stream);
        Search { value: out.value, point: out.point, restarts: out.restarts, iterations: out.iterations }
    }

    /// Refines from whichever of `candidates` scores best in this direction,
    /// keeping the result only if it improves on `own`.
    fn polish(&self, weights: [f64; 2], own: Search, candidates: &[Vec<f64>]) -> Search {
        let obj = self.objective(weights);
        let mut scratch = self.compiled.scratch();
        let best = candidates
            .iter()
            .map(|c| (obj.value_at(c, &mut scratch), c))
            .fold(None, |acc: Option<(f64, &Vec<f64>)>, (v, c)| match acc {
                Some((bv, _)) if bv >= v => acc,
                _ => Some((v, c)),
            });
        match best {
            Some((v, c)) if v > own.value + 1e-12 => {
                let (rv, rp, it, _) = obj.refine(c, self.budget.max_iters);
                let (value, point) = if rv >= v { (rv, rp) } else { (v, c.clone()) };
                Search { value, point, restarts: own.restarts + 1, iterations: own.iterations + it }
            }
            _ => own,
        }
    }

    fn support_point(&self, weights: [f64; 2], theta: f64, s: Search) -> Result<SupportPoint> {
        let coefs = self.spec.coefficients();
        let bounds = self.bounds_at(&s.point);
        let (value, point) = polygon_max(&coefs, &bounds, weights);
        Ok(SupportPoint {
            theta,
            weights,
            value,
            witness: self.scope.tensor(&self.channel, &s.point)?,
            bounds,
            point,
            restarts: s.restarts,
            iterations: s.iterations,
        })
    }
}

struct Search {
    value: f64,
    point: Vec<f64>,
    restarts: usize,
    iterations: usize,
}

fn check_weights(w: [f64; 2]) -> Result<()> {
    if !(w[0] >= 0.0 && w[1] >= 0.0 && w[0].is_finite() && w[1].is_finite()) || w == [0.0, 0.0] {
        return Err(Error::Argument(format!(
            "weights must be nonnegative and not both zero, got {w:?}"
        )));
    }
    Ok(())
}

/// `max μ1 R1 + μ2 R2` over the region, with the witness distribution.
pub fn weighted_sum_max(
    channel: &Channel,
    spec: &RegionSpec,
    weights: [f64; 2],
    budget: &Budget,
) -> Result<SupportPoint> {
    check_weights(weights)?;
    let sweeper = Sweeper::new(channel, spec, budget)?;
    let s = sweeper.search(weights, 0);
    sweeper.support_point(weights, weights[1].atan2(weights[0]), s)
}

/// A swept region with per-direction provenance.
#[derive(Debug, Clone, Serialize)]
pub struct ComputedRegion {
    pub id: RegionId,
    pub region: RateRegion,
    pub support: Vec<SupportPoint>,
    /// For each boundary vertex, the index in `support` of a direction whose
    /// supporting line passes through it.
    pub vertex_support: Vec<usize>,
    #[serde(skip)]
    spec: Option<RegionSpec>,
}

/// Sweeps `μ = (cos θ, sin θ)` over `angles` evenly spaced directions in
/// `[0, π/2]`, adds chord-normal directions where the outer polygon bulges,
/// and intersects the supporting half-planes.
pub fn compute_region(
    channel: &Channel,
    spec: &RegionSpec,
    angles: usize,
    budget: &Budget,
) -> Result<ComputedRegion> {
    if angles < 3 {
        return Err(Error::Argument(format!("angular resolution {angles} < 3")));
    }
    let sweeper = Sweeper::new(channel, spec, budget)?;
    let directions: Vec<(f64, [f64; 2])> = (0..angles)
        .map(|k| {
            let theta = FRAC_PI_2 * k as f64 / (angles - 1) as f64;
            let weights = if k == 0 {
                [1.0, 0.0]
            } else if k == angles - 1 {
                [0.0, 1.0]
            } else {
                [theta.cos(), theta.sin()]
            };
            (theta, weights)
        })
        .collect();
    let first: Vec<Search> = directions
        .par_iter()
        .enumerate()
        .map(|(k, &(_, w))| sweeper.search(w, sub_seed(budget.seed, spec.id as u64, k as u64)))
        .collect();
    let mut witnesses: Vec<Vec<f64>> = first.iter().map(|s| s.point.clone()).collect();
    let mut support = directions
        .par_iter()
        .zip(first)
        .map(|(&(theta, w), s)| sweeper.support_point(w, theta, sweeper.polish(w, s, &witnesses)))
        .collect::<Result<Vec<_>>>()?;
    let mut region = intersect_support(&support)?;
    // Where the half-plane polygon bulges past the chord between neighbouring
    // support points, also solve the chord's normal direction. Flat facets
    // whose normal falls between grid directions are recovered exactly.
    let mut stream = angles as u64;
    for _ in 0..REFINE_ROUNDS {
        let extra = chord_directions(&support, &region);
        if extra.is_empty() {
            break;
        }
        let found: Vec<Search> = extra
            .par_iter()
            .enumerate()
            .map(|(j, &(_, w))| sweeper.search(w, sub_seed(budget.seed, spec.id as u64, stream + j as u64)))
            .collect();
        stream += extra.len() as u64;
        witnesses.extend(found.iter().map(|s| s.point.clone()));
        let added = extra
            .par_iter()
            .zip(found)
            .map(|(&(theta, w), s)| sweeper.support_point(w, theta, sweeper.polish(w, s, &witnesses)))
            .collect::<Result<Vec<_>>>()?;
        support.extend(added);
        support.sort_by(|a, b| a.theta.total_cmp(&b.theta));
        region = intersect_support(&support)?;
    }
    // each vertex is attributed to the middle of the run of directions
    // whose supporting lines pass through it
    let vertex_support = region
        .vertices()
        .iter()
        .map(|v| {
            let slack = |s: &SupportPoint| (s.value - s.weights[0] * v[0] - s.weights[1] * v[1]).abs();
            let best = support.iter().map(slack).fold(f64::INFINITY, f64::min);
            let near: Vec<usize> = (0..support.len())
                .filter(|&k| slack(&support[k]) <= best + 1e-9)
                .collect();
            near[near.len() / 2]
        })
        .collect();
    Ok(ComputedRegion {
        id: spec.id,
        region,
        support,
        vertex_support,
        spec: Some(spec.clone()),
    })
}

/// Rounds of chord refinement after the even sweep.
const REFINE_ROUNDS: usize = 3;
/// Bulge (bits) beyond which a chord direction is added.
const REFINE_GAP: f64 = TOL_REGION / 10.0;

/// Normals of chords between adjacent support points where the outer
/// polygon sticks out by more than `REFINE_GAP`.
fn chord_directions(support: &[SupportPoint], region: &RateRegion) -> Vec<(f64, [f64; 2])> {
    let mut out = Vec::new();
    for pair in support.windows(2) {
        let (a, b) = (pair[0].point, pair[1].point);
        let n = [b[1] - a[1], a[0] - b[0]];
        let len = n[0].hypot(n[1]);
        if len < 1e-9 || n[0] < 0.0 || n[1] < 0.0 {
            continue;
        }
        let n = [n[0] / len, n[1] / len];
        let theta = n[1].atan2(n[0]);
        if theta <= pair[0].theta + 1e-9 || theta >= pair[1].theta - 1e-9 {
            continue;
        }
        let inner = n[0] * a[0] + n[1] * a[1];
        let outer = region.vertices().iter().map(|v| n[0] * v[0] + n[1] * v[1]).fold(0.0, f64::max);
        if outer - inner > REFINE_GAP {
            out.push((theta, n));
        }
    }
    out
}

/// Intersection of `{μ_k · R <= h_k}` with the nonnegative quadrant.
fn intersect_support(support: &[SupportPoint]) -> Result<RateRegion> {
    let extent = |axis: usize| {
        support
            .iter()
            .filter(|s| s.weights[axis] > 0.0)
            .map(|s| s.value / s.weights[axis])
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    };
    let (a, b) = (extent(0), extent(1));
    let mut poly = vec![[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]];
    for s in support {
        poly = clip(&poly, s.weights, s.value);
    }
    let mut pts: Vec<[f64; 2]> = poly.into_iter().filter(|p| p[0] > 1e-12 || p[1] > 1e-12).collect();
    if pts.is_empty() {
        return Ok(RateRegion::zero());
    }
    pts.sort_by(|p, q| p[1].atan2(p[0]).total_cmp(&q[1].atan2(q[0])));
    if pts[0][1] > 1e-12 {
        pts.insert(0, [pts[0][0], 0.0]);
    }
    let last = pts[pts.len() - 1];
    if last[0] > 1e-12 {
        pts.push([0.0, last[1]]);
    }
    // snap tiny axis offsets left by clipping
    let n = pts.len();
    pts[0][1] = 0.0;
    pts[n - 1][0] = 0.0;
    RateRegion::from_boundary(pts)
}

/// Sutherland–Hodgman step against `n · x <= h`.
fn clip(poly: &[[f64; 2]], n: [f64; 2], h: f64) -> Vec<[f64; 2]> {
    let inside = |p: [f64; 2]| n[0] * p[0] + n[1] * p[1] <= h + 1e-15;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(cur), inside(prev));
        if ci != pi {
            let fp = n[0] * prev[0] + n[1] * prev[1] - h;
            let fc = n[0] * cur[0] + n[1] * cur[1] - h;
            let t = fp / (fp - fc);
            out.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

/// Per-vertex constraint status at the vertex's witness distribution.
#[derive(Debug, Clone, Serialize)]
pub struct VertexActivity {
    pub theta: f64,
    pub vertex: [f64; 2],
    /// `(constraint id, bound at witness - coef · vertex)`.
    pub slacks: Vec<(&'static str, f64)>,
    /// Constraints with slack at most [`TIGHT_TOL`].
    pub tight: Vec<&'static str>,
    /// Constraints whose removal raises the weighted sum at this witness and
    /// direction by more than [`TIGHT_TOL`].
    pub binding: Vec<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActiveReport {
    pub id: RegionId,
    pub vertices: Vec<VertexActivity>,
}

impl ActiveReport {
    /// True when `constraint` is non-binding at every boundary vertex.
    pub fn inactive_everywhere(&self, constraint: &str) -> bool {
        self.vertices.iter().all(|v| !v.binding.contains(&constraint))
    }

    /// Smallest slack of `constraint` across the boundary.
    pub fn min_slack(&self, constraint: &str) -> Option<f64> {
        self.vertices
            .iter()
            .flat_map(|v| v.slacks.iter().filter(|(id, _)| *id == constraint).map(|(_, s)| *s))
            .reduce(f64::min)
    }
}

impl ComputedRegion {
    pub fn spec(&self) -> RegionSpec {
        self.spec.clone().unwrap_or_else(|| self.id.spec())
    }

    pub fn active_constraints(&self) -> ActiveReport {
        let spec = self.spec();
        let coefs = spec.coefficients();
        let vertices = self
            .region
            .vertices()
            .iter()
            .zip(&self.vertex_support)
            .map(|(&v, &k)| {
                let s = &self.support[k];
                let slacks: Vec<(&'static str, f64)> = spec
                    .constraints
                    .iter()
                    .zip(&s.bounds)
                    .map(|(c, b)| (c.id, b - c.coef[0] * v[0] - c.coef[1] * v[1]))
                    .collect();
                let tight = slacks.iter().filter(|(_, sl)| *sl <= TIGHT_TOL).map(|(id, _)| *id).collect();
                let (full, _) = polygon_max(&coefs, &s.bounds, s.weights);
                let binding = (0..coefs.len())
                    .filter(|&j| {
                        let c: Vec<[f64; 2]> = coefs.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, c)| *c).collect();
                        let b: Vec<f64> = s.bounds.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, b)| *b).collect();
                        let relaxed = if c.is_empty() {
                            f64::INFINITY
                        } else {
                            polygon_max(&c, &b, s.weights).0
                        };
                        relaxed > full + TIGHT_TOL
                    })
                    .map(|j| spec.constraints[j].id)
                    .collect();
                VertexActivity { theta: s.theta, vertex: v, slacks, tight, binding }
            })
            .collect();
        ActiveReport { id: self.id, vertices }
    }

    /// CSV with columns `theta,R1,R2,tight_constraints`; tight ids are
    /// `;`-separated.
    pub fn to_csv(&self) -> String {
        let active = self.active_constraints();
        let mut out = String::from("theta,R1,R2,tight_constraints\n");
        for v in &active.vertices {
            out.push_str(&format!(
                "{:.10},{:.10},{:.10},{}\n",
                v.theta,
                v.vertex[0],
                v.vertex[1],
                v.tight.join(";")
            ));
        }
        out
    }
}

/// Runs the sweep and reports constraint activity along the boundary.
pub fn active_constraints(
    channel: &Channel,
    spec: &RegionSpec,
    budget: &Budget,
) -> Result<ActiveReport> {
    if spec.constraints.len() < 2 {
        return Err(Error::Argument("active-constraint analysis needs >= 2 constraints".into()));
    }
    Ok(compute_region(channel, spec, DEFAULT_ANGLES, budget)?.active_constraints())
}
