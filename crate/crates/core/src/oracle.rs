//! Brute-force cross-checks at tiny scale: exhaustive simplex grids for
//! condition gaps and rate regions, and the Csiszár sum identity.
//!
//! Everything here evaluates information quantities through [`ProbTensor`]
//! directly. Nothing is shared with the optimizer or the compiled
//! functionals, so agreement between the two paths is meaningful.

use crate::channel::Channel;
use crate::classifier::RegimeCondition;
use crate::error::{Error, Result};
use crate::expr::InfoExpr;
use crate::geometry::RateRegion;
use crate::prob::{ProbTensor, VarGroup};
use crate::regions::RegionSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

/// Hard cap on enumerated grid points.
pub const MAX_GRID_POINTS: f64 = 1e7;
const CHUNK: usize = 4096;

/// The rational points `k / resolution` of the simplex over the listed
/// variables (slowest axis first).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub variables: Vec<(String, usize)>,
}

impl GridSpec {
    pub fn new<S: Into<String>>(resolution: usize, variables: Vec<(S, usize)>) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Argument(format!("grid resolution {resolution} < 2")));
        }
        let variables: Vec<(String, usize)> =
            variables.into_iter().map(|(n, c)| (n.into(), c)).collect();
        if variables.is_empty() || variables.iter().any(|(_, c)| *c == 0) {
            return Err(Error::Argument("grid needs variables with positive cardinality".into()));
        }
        Ok(GridSpec { resolution, variables })
    }

    /// Grid over `p(x1, x2)`.
    pub fn inputs(channel: &Channel, resolution: usize) -> Result<Self> {
        GridSpec::new(resolution, vec![("X1", channel.x1_card()), ("X2", channel.x2_card())])
    }

    /// Grid over `p(u, x1, x2)`.
    pub fn auxiliary(channel: &Channel, aux_card: usize, resolution: usize) -> Result<Self> {
        GridSpec::new(
            resolution,
            vec![("U", aux_card), ("X1", channel.x1_card()), ("X2", channel.x2_card())],
        )
    }

    pub fn dimension(&self) -> usize {
        self.variables.iter().map(|(_, c)| c).product()
    }

    /// `C(resolution + dim - 1, dim - 1)`.
    pub fn point_count(&self) -> f64 {
        let (n, k) = (self.resolution as f64, self.dimension() as f64 - 1.0);
        (1..=k as usize).fold(1.0, |acc, i| acc * (n + i as f64) / i as f64)
    }

    fn preflight(&self) -> Result<()> {
        let count = self.point_count();
        if count > MAX_GRID_POINTS {
            return Err(Error::Budget(format!(
                "grid of resolution {} over {} cells has about {count:.3e} points (cap {MAX_GRID_POINTS:.0e})",
                self.resolution,
                self.dimension()
            )));
        }
        Ok(())
    }

    fn has(&self, name: &str) -> bool {
        self.variables.iter().any(|(n, _)| n == name)
    }

    fn points(&self) -> Compositions {
        Compositions::new(self.resolution, self.dimension())
    }

    fn tensor(&self, counts: &[usize]) -> Result<ProbTensor> {
        let r = self.resolution as f64;
        ProbTensor::new(self.variables.clone(), counts.iter().map(|&k| k as f64 / r).collect())
    }
}

/// All compositions of `n` into `d` nonnegative parts.
struct Compositions {
    current: Option<Vec<usize>>,
}

impl Compositions {
    fn new(n: usize, d: usize) -> Self {
        let mut first = vec![0; d];
        first[0] = n;
        Compositions { current: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let mut a = out.clone();
        let d = a.len();
        if d > 1 {
            let tail = a[d - 1];
            a[d - 1] = 0;
            if let Some(i) = (0..d - 1).rev().find(|&i| a[i] > 0) {
                a[i] -= 1;
                a[i + 1] = tail + 1;
                self.current = Some(a);
            }
        }
        Some(out)
    }
}

/// Processes the grid in chunks, in parallel within a chunk, folding results
/// in enumeration order.
fn for_each_chunk<T: Send>(
    grid: &GridSpec,
    eval: impl Fn(&[usize]) -> Result<T> + Sync,
    mut fold: impl FnMut(&[usize], T),
) -> Result<()> {
    grid.preflight()?;
    let mut it = grid.points();
    loop {
        let chunk: Vec<Vec<usize>> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(());
        }
        let values = chunk.par_iter().map(|c| eval(c)).collect::<Result<Vec<T>>>()?;
        for (c, v) in chunk.iter().zip(values) {
            fold(c, v);
        }
    }
}

fn eval_all(exprs: &[InfoExpr], joint: &ProbTensor) -> Result<Vec<f64>> {
    exprs.iter().map(|e| e.eval(joint)).collect()
}

fn check_scope(grid: &GridSpec, needs_aux: bool) -> Result<()> {
    if !grid.has("X1") || !grid.has("X2") || grid.has("U") != needs_aux {
        return Err(Error::Argument(format!(
            "grid variables {:?} do not match the expression scope",
            grid.variables.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>()
        )));
    }
    Ok(())
}

/// Exact minimum of the condition's smallest part over the grid, with the
/// first minimizing grid point.
pub fn grid_min_gap(
    channel: &Channel,
    cond: &RegimeCondition,
    grid: &GridSpec,
) -> Result<(f64, ProbTensor)> {
    check_scope(grid, cond.id.uses_aux())?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for_each_chunk(
        grid,
        |c| {
            let joint = grid.tensor(c)?.attach_channel(channel)?;
            Ok(eval_all(&cond.parts, &joint)?.into_iter().fold(f64::INFINITY, f64::min))
        },
        |c, g| {
            if best.as_ref().is_none_or(|(b, _)| g < *b) {
                best = Some((g, c.to_vec()));
            }
        },
    )?;
    let (gap, at) = best.expect("grids are nonempty");
    Ok((gap, grid.tensor(&at)?))
}

/// Corners of `{R >= 0 : coef_j · R <= bound_j}`.
fn polygon_corners(coefs: &[[f64; 2]], bounds: &[f64]) -> Vec<[f64; 2]> {
    let mut lines: Vec<([f64; 2], f64)> = coefs.iter().copied().zip(bounds.iter().copied()).collect();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ((a, p), (b, q)) = (lines[i], lines[j]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-15 {
                continue;
            }
            let x = (p * b[1] - a[1] * q) / det;
            let y = (a[0] * q - p * b[0]) / det;
            let inside = x >= -1e-12
                && y >= -1e-12
                && coefs.iter().zip(bounds).all(|(c, b)| c[0] * x + c[1] * y <= b + 1e-12);
            if inside {
                out.push([x.max(0.0), y.max(0.0)]);
            }
        }
    }
    out
}

/// Upper-right convex chain of the downward closure of `points`, from the
/// R1 axis to the R2 axis.
fn closure_chain(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let r1 = points.iter().map(|p| p[0]).fold(0.0, f64::max);
    let r2 = points.iter().map(|p| p[1]).fold(0.0, f64::max);
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.push([r1, 0.0]);
    pts.push([0.0, r2]);
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(a[1].total_cmp(&b[1])));
    let mut chain: Vec<[f64; 2]> = Vec::new();
    for p in pts {
        while chain.len() >= 2 {
            let (o, a) = (chain[chain.len() - 2], chain[chain.len() - 1]);
            let cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]);
            if cross <= 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    // keep the part from (r1, 0) up to (0, r2)
    let start = chain.iter().position(|p| p[0] == r1 && p[1] == 0.0).unwrap_or(0);
    let end = chain.iter().rposition(|p| p[0] == 0.0 && p[1] == r2).unwrap_or(chain.len() - 1);
    chain[start..=end].to_vec()
}

/// Convexified union over the grid of the per-distribution constraint
/// polygons.
pub fn grid_region(channel: &Channel, spec: &RegionSpec, grid: &GridSpec) -> Result<RateRegion> {
    check_scope(grid, spec.uses_aux())?;
    let bounds: Vec<InfoExpr> = spec.constraints.iter().map(|c| c.bound.clone()).collect();
    let coefs: Vec<[f64; 2]> = spec.constraints.iter().map(|c| c.coef).collect();
    let mut hull: Vec<[f64; 2]> = Vec::new();
    let mut pending: Vec<[f64; 2]> = Vec::new();
    for_each_chunk(
        grid,
        |c| {
            let joint = grid.tensor(c)?.attach_channel(channel)?;
            let b: Vec<f64> = eval_all(&bounds, &joint)?.into_iter().map(|v| v.max(0.0)).collect();
            Ok(polygon_corners(&coefs, &b))
        },
        |_, corners| {
            pending.extend(corners);
            if pending.len() > 8 * CHUNK {
                pending.extend(hull.drain(..));
                hull = closure_chain(&pending);
                pending.clear();
            }
        },
    )?;
    pending.extend(hull);
    let chain = closure_chain(&pending);
    if chain.iter().all(|p| p[0] <= 1e-12 && p[1] <= 1e-12) {
        return Ok(RateRegion::zero());
    }
    RateRegion::from_boundary(chain)
}

/// `|Σ_i I(Y2_{i+1..n}; Y1_i | Y1_{1..i-1}) - Σ_i I(Y1_{1..i-1}; Y2_i | Y2_{i+1..n})|`
/// for a joint over `Y1_1..Y1_n, Y2_1..Y2_n`.
pub fn csiszar_identity_check(joint: &ProbTensor) -> Result<f64> {
    let n = (1..)
        .take_while(|i| joint.cardinality(&format!("Y1_{i}")).is_some())
        .count();
    if n == 0 || (1..=n).any(|i| joint.cardinality(&format!("Y2_{i}")).is_none()) {
        return Err(Error::UnknownVariable(
            "joint must hold Y1_1..Y1_n and Y2_1..Y2_n".into(),
        ));
    }
    let names = |prefix: &str, range: std::ops::Range<usize>| -> Vec<String> {
        range.map(|i| format!("{prefix}_{i}")).collect()
    };
    let cmi = |a: Vec<String>, b: Vec<String>, c: Vec<String>| -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let given = if c.is_empty() { None } else { Some(VarGroup::new(&c)?) };
        joint.mutual_information(&VarGroup::new(&a)?, &VarGroup::new(&b)?, given.as_ref())
    };
    let mut left = 0.0;
    let mut right = 0.0;
    for i in 1..=n {
        left += cmi(names("Y2", i + 1..n + 1), vec![format!("Y1_{i}")], names("Y1", 1..i))?;
        right += cmi(names("Y1", 1..i), vec![format!("Y2_{i}")], names("Y2", i + 1..n + 1))?;
    }
    Ok((left - right).abs())
}

/// A Dirichlet(1) joint over `n` binary pairs `(Y1_i, Y2_i)`.
pub fn dirichlet_joint(seed: u64, n: usize) -> Result<ProbTensor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<(String, usize)> = (1..=n)
        .map(|i| (format!("Y1_{i}"), 2))
        .chain((1..=n).map(|i| (format!("Y2_{i}"), 2)))
        .collect();
    let draw: Vec<f64> = (0..1usize << (2 * n)).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draw.iter().sum();
    ProbTensor::new(vars, draw.into_iter().map(|v| v / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{fixtures, ChannelFamily};
    use crate::classifier::ConditionId;
    use crate::geometry::hausdorff;
    use crate::regions::RegionId;

    #[test]
    fn composition_counts() {
        for (n, d) in [(8, 4), (3, 5), (5, 1), (0, 3)] {
            let g = Compositions::new(n, d).collect::<Vec<_>>();
            let spec = GridSpec { resolution: n.max(2), variables: vec![("A".into(), d)] };
            if n >= 2 {
                assert_eq!(g.len() as f64, spec.point_count());
            }
            assert!(g.iter().all(|c| c.iter().sum::<usize>() == n && c.len() == d));
            let mut sorted = g.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), g.len());
        }
    }

    #[test]
    fn grid_gap_examples() {
        let cmc = RegimeCondition::new(ConditionId::Cmc);
        let ch = ChannelFamily::IdenticalOutputs { flip: 0.1 }.build().unwrap();
        let (g, _) = grid_min_gap(&ch, &cmc, &GridSpec::inputs(&ch, 8).unwrap()).unwrap();
        assert!(g.abs() < 1e-12);

        let ch = ChannelFamily::NullCognitiveOutput { flip: 0.0 }.build().unwrap();
        let (g, at) = grid_min_gap(&ch, &cmc, &GridSpec::inputs(&ch, 8).unwrap()).unwrap();
        assert!((g + 1.0).abs() < 1e-12);
        // any p(x1, x2) with uniform X1 attains -1; the uniform input is one of them
        let x1 = at.marginalize(&VarGroup::new(&["X1"]).unwrap()).unwrap();
        assert!((x1.values()[0] - 0.5).abs() < 1e-12);

        let ch = ChannelFamily::DegradedCognitive { inner_flip: 0.1, degrade_flip: 0.2 }.build().unwrap();
        let (g, _) = grid_min_gap(&ch, &cmc, &GridSpec::inputs(&ch, 64).unwrap()).unwrap();
        assert!(g >= -1e-12);
    }

    #[test]
    fn grid_preflight_and_scope() {
        let ch = fixtures::noiseless_pair();
        let big = GridSpec::auxiliary(&ch, 4, 64).unwrap();
        let cln = RegimeCondition::new(ConditionId::Cln);
        match grid_min_gap(&ch, &cln, &big) {
            Err(Error::Budget(msg)) => assert!(msg.contains("points")),
            other => panic!("expected budget error, got {other:?}"),
        }
        let inputs = GridSpec::inputs(&ch, 4).unwrap();
        assert!(grid_min_gap(&ch, &cln, &inputs).is_err());
        assert!(GridSpec::inputs(&ch, 1).is_err());
    }

    #[test]
    fn grid_region_examples() {
        let ch = fixtures::noiseless_product();
        let civ = grid_region(&ch, &RegionId::CIV.spec(), &GridSpec::auxiliary(&ch, 2, 4).unwrap()).unwrap();
        assert_eq!(civ.vertices(), &[[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        // finer grids produce ulp-level near-duplicates of the corner
        let civ = grid_region(&ch, &RegionId::CIV.spec(), &GridSpec::auxiliary(&ch, 2, 8).unwrap()).unwrap();
        assert_eq!(civ.vertices().len(), 3);
        assert!((civ.vertices()[1][0] - 1.0).abs() < 1e-12 && (civ.vertices()[1][1] - 1.0).abs() < 1e-12);

        let ch = fixtures::zero_capacity();
        let z = grid_region(&ch, &RegionId::CIV.spec(), &GridSpec::auxiliary(&ch, 2, 4).unwrap()).unwrap();
        assert!(z.is_zero());

        // C_II inside C_IV on a strong-interference fixture
        let ch = ChannelFamily::IdenticalOutputs { flip: 0.1 }.build().unwrap();
        let cii = grid_region(&ch, &RegionId::CII.spec(), &GridSpec::inputs(&ch, 8).unwrap()).unwrap();
        let civ = grid_region(&ch, &RegionId::CIV.spec(), &GridSpec::auxiliary(&ch, 2, 8).unwrap()).unwrap();
        let (ok, viol) = crate::geometry::region_subset(&cii, &civ, 1e-12);
        assert!(ok, "violation {viol}");
        assert!(hausdorff(&cii, &civ) < 1e-9);
    }

    #[test]
    fn csiszar_examples() {
        // product distribution
        let prod = ProbTensor::uniform(vec![("Y1_1", 2), ("Y1_2", 2), ("Y2_1", 2), ("Y2_2", 2)]).unwrap();
        assert!(csiszar_identity_check(&prod).unwrap() < 1e-15);
        // Y1_i = Y2_i, pairs correlated across time
        let mut v = vec![0.0; 16];
        for (a, b, w) in [(0, 0, 0.4), (0, 1, 0.1), (1, 0, 0.2), (1, 1, 0.3)] {
            v[(a << 3) | (b << 2) | (a << 1) | b] = w;
        }
        let t = ProbTensor::new(vec![("Y1_1", 2), ("Y1_2", 2), ("Y2_1", 2), ("Y2_2", 2)], v).unwrap();
        assert!(csiszar_identity_check(&t).unwrap() < 1e-12);
        for seed in 0..20 {
            let j = dirichlet_joint(seed, 3).unwrap();
            assert!(csiszar_identity_check(&j).unwrap() < 1e-10);
        }
        let bad = ProbTensor::uniform(vec![("A", 2)]).unwrap();
        assert!(csiszar_identity_check(&bad).is_err());
    }
}
