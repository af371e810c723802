//! Global maximization over a probability simplex: coarse grid screening
//! followed by multi-start projected-gradient refinement.
//!
//! Objectives have the form `min_k c_k · H(p)`, a minimum of linear
//! combinations of compiled entropy terms. Single-piece objectives are
//! smooth; multi-piece ones are refined through a soft-min continuation and
//! scored with the exact minimum.

use crate::error::{Error, Result};
use crate::functional::{Compiled, Scratch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Optimizer and scope knobs shared by the classifier and the region sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Refinement starts per maximization.
    pub restarts: usize,
    /// Target grid resolution (denominator of the grid fractions).
    pub grid_res: usize,
    /// Upper bound on screened grid points; high-dimensional scopes use the
    /// finest resolution `<= grid_res` that fits.
    pub grid_cap: usize,
    /// Iteration cap per refinement stage.
    pub max_iters: usize,
    /// Cardinality of the auxiliary variable.
    pub aux_card: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            restarts: 32,
            grid_res: 8,
            grid_cap: 20_000,
            max_iters: 200,
            aux_card: 4,
            seed: 0,
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || self.grid_cap == 0 {
            return Err(Error::Argument("restarts, iterations and grid cap must be positive".into()));
        }
        if self.grid_res < 2 {
            return Err(Error::Argument(format!("grid resolution {} < 2", self.grid_res)));
        }
        if self.aux_card == 0 {
            return Err(Error::Argument("auxiliary cardinality must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Budget { seed, ..self }
    }

    pub fn with_aux_card(self, aux_card: usize) -> Self {
        Budget { aux_card, ..self }
    }
}

/// SplitMix64-style mixing for deriving independent sub-seeds.
pub fn sub_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    for _ in 0..2 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Number of points `k / res` on the simplex of dimension `dim`.
pub(crate) fn grid_count(dim: usize, res: usize) -> f64 {
    // C(res + dim - 1, dim - 1)
    let k = dim.saturating_sub(1);
    (1..=k).fold(1.0, |acc, i| acc * (res + i) as f64 / i as f64)
}

pub(crate) fn grid_resolution(dim: usize, max_res: usize, cap: usize) -> usize {
    let mut res = max_res.max(1);
    while res > 1 && grid_count(dim, res) > cap as f64 {
        res -= 1;
    }
    res
}

fn grid_points(dim: usize, res: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut counts = vec![0usize; dim];
    fn rec(pos: usize, left: usize, counts: &mut [usize], res: usize, out: &mut Vec<Vec<f64>>) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            out.push(counts.iter().map(|&c| c as f64 / res as f64).collect());
            return;
        }
        for c in (0..=left).rev() {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, res, out);
        }
    }
    rec(0, res, &mut counts, res, &mut out);
    out
}

/// Grid points with every compiled entropy term evaluated, reusable across
/// objectives that share the same compiled terms.
pub(crate) struct GridCache {
    pub resolution: usize,
    points: Vec<Vec<f64>>,
    entropies: Vec<Vec<f64>>,
}

impl GridCache {
    pub fn new(compiled: &Compiled, budget: &Budget) -> Self {
        let dim = compiled.dim();
        let resolution = grid_resolution(dim, budget.grid_res, budget.grid_cap);
        let points = grid_points(dim, resolution);
        let entropies = points
            .par_iter()
            .map_init(
                || compiled.scratch(),
                |scratch, p| compiled.entropies(p, scratch).to_vec(),
            )
            .collect();
        GridCache { resolution, points, entropies }
    }
}

/// `min_k pieces[k] · h`, each piece a dense coefficient vector over the
/// compiled entropy terms.
pub(crate) struct Objective<'a> {
    pub compiled: &'a Compiled,
    pub pieces: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub best_grid: f64,
    pub restarts: usize,
    pub iterations: usize,
    /// Some refinement stage stopped at the iteration cap.
    pub exhausted: bool,
}

impl Objective<'_> {
    fn piece_values(&self, h: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.pieces.iter().map(|c| dot(c, h)));
    }

    pub fn exact(&self, h: &[f64]) -> f64 {
        self.pieces.iter().map(|c| dot(c, h)).fold(f64::INFINITY, f64::min)
    }

    pub fn value_at(&self, p: &[f64], scratch: &mut Scratch) -> f64 {
        let h = self.compiled.entropies(p, scratch);
        self.exact(h)
    }

    /// Soft-min `-τ ln Σ exp(-f_k/τ)`; with `tau == 0` the exact minimum.
    fn smooth(&self, p: &[f64], tau: f64, scratch: &mut Scratch, buf: &mut Vec<f64>) -> f64 {
        let h = self.compiled.entropies(p, scratch);
        self.piece_values(h, buf);
        soft_min(buf, tau)
    }

    fn smooth_grad(
        &self,
        p: &[f64],
        tau: f64,
        scratch: &mut Scratch,
        buf: &mut Vec<f64>,
        grad: &mut [f64],
    ) -> f64 {
        let h = self.compiled.entropies(p, scratch);
        self.piece_values(h, buf);
        let value = soft_min(buf, tau);
        let weights = soft_min_weights(buf, tau);
        let mut coefs = vec![0.0; self.compiled.n_terms()];
        for (w, piece) in weights.iter().zip(&self.pieces) {
            if *w > 0.0 {
                for (c, pc) in coefs.iter_mut().zip(piece) {
                    *c += w * pc;
                }
            }
        }
        self.compiled.gradient(&coefs, scratch, grad);
        value
    }

    /// Screens the grid, then refines `budget.restarts` starts (top grid
    /// points, seeded random points) plus any `extra_starts`. Deterministic
    /// in `(budget.seed, stream)` regardless of thread count.
    pub fn maximize(
        &self,
        grid: &GridCache,
        extra_starts: &[Vec<f64>],
        budget: &Budget,
        stream: u64,
    ) -> Outcome {
        let dim = self.compiled.dim();
        let mut scored: Vec<(f64, usize)> = grid
            .entropies
            .iter()
            .enumerate()
            .map(|(i, h)| (self.exact(h), i))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let best_grid = scored.first().map_or(f64::NEG_INFINITY, |s| s.0);

        let n_grid = budget.restarts.div_ceil(2).min(scored.len());
        let mut starts: Vec<Vec<f64>> =
            scored[..n_grid].iter().map(|&(_, i)| grid.points[i].clone()).collect();
        for r in 0..budget.restarts - n_grid {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(budget.seed, stream, r as u64));
            let draw: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draw.iter().sum();
            let mut p: Vec<f64> = draw.iter().map(|d| d / total).collect();
            if r % 2 == 1 && !starts.is_empty() {
                // local perturbation of a top grid point
                let anchor = &starts[(r / 2) % n_grid.max(1)];
                for (v, a) in p.iter_mut().zip(anchor) {
                    *v = 0.8 * a + 0.2 * *v;
                }
            }
            starts.push(p);
        }
        starts.extend(extra_starts.iter().filter(|s| s.len() == dim).cloned());

        let taus = self.taus();
        let mut tracks: Vec<Track> = starts
            .par_iter()
            .map(|s| {
                let mut t = Track::new(self, s);
                self.run_stage(&mut t, taus[0], budget.max_iters);
                t
            })
            .collect();
        if taus.len() > 1 {
            // successive halving: only the leading quarter sees the later,
            // sharper smoothing stages
            let mut order: Vec<usize> = (0..tracks.len()).collect();
            order.sort_by(|&a, &b| tracks[b].best_val.total_cmp(&tracks[a].best_val).then(a.cmp(&b)));
            let keep = tracks.len().div_ceil(4);
            let mut lead: Vec<Track> = order[..keep].iter().map(|&i| tracks[i].clone()).collect();
            lead.par_iter_mut().for_each(|t| {
                for &tau in &taus[1..] {
                    self.run_stage(t, tau, budget.max_iters);
                }
            });
            for (&i, t) in order[..keep].iter().zip(lead) {
                tracks[i] = t;
            }
        }

        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut iterations = 0;
        let mut exhausted = false;
        for t in tracks {
            iterations += t.iterations;
            exhausted |= t.exhausted;
            if best.as_ref().is_none_or(|(bv, _)| t.best_val > *bv) {
                best = Some((t.best_val, t.best));
            }
        }
        let (value, point) = best.expect("at least one start");
        Outcome { value, point, best_grid, restarts: starts.len(), iterations, exhausted }
    }

    fn taus(&self) -> &'static [f64] {
        if self.pieces.len() > 1 {
            &[1e-2, 2e-3, 4e-4, 1e-4]
        } else {
            &[0.0]
        }
    }

    /// Projected-gradient ascent from `start` through every smoothing stage.
    /// Returns the best exact value seen, its point, the iteration count and
    /// whether any stage hit the iteration cap.
    pub fn refine(&self, start: &[f64], max_iters: usize) -> (f64, Vec<f64>, usize, bool) {
        let mut t = Track::new(self, start);
        for &tau in self.taus() {
            self.run_stage(&mut t, tau, max_iters);
        }
        (t.best_val, t.best, t.iterations, t.exhausted)
    }

    /// One smoothing stage of projected-gradient ascent with Armijo
    /// backtracking.
    fn run_stage(&self, t: &mut Track, tau: f64, max_iters: usize) {
        let dim = t.x.len();
        let mut scratch = self.compiled.scratch();
        let mut buf = Vec::with_capacity(self.pieces.len());
        let mut grad = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        let mut trial = vec![0.0; dim];
        let x = &mut t.x;
        let mut step = 0.5;
        let mut converged = false;
        let mut stalls = 0;
        let mut iters = 0;
        while iters < max_iters {
            iters += 1;
            let f = self.smooth_grad(x, tau, &mut scratch, &mut buf, &mut grad);
            // stationarity test on the unit-step projected gradient
            for i in 0..dim {
                trial[i] = x[i] + grad[i];
            }
            project_simplex(&trial, &mut y);
            if max_abs_diff(&y, x) < 1e-10 {
                converged = true;
                break;
            }
            let mut accepted = None;
            while step > 1e-14 {
                for i in 0..dim {
                    trial[i] = x[i] + step * grad[i];
                }
                project_simplex(&trial, &mut y);
                let ascent: f64 = (0..dim).map(|i| grad[i] * (y[i] - x[i])).sum();
                let fy = self.smooth(&y, tau, &mut scratch, &mut buf);
                if fy >= f + 1e-4 * ascent {
                    accepted = Some(fy);
                    break;
                }
                step *= 0.5;
            }
            let Some(fy) = accepted else {
                converged = true;
                break;
            };
            std::mem::swap(x, &mut y);
            step = (step * 2.0).min(1e3);
            if fy - f < 1e-13 {
                stalls += 1;
                if stalls >= 3 {
                    converged = true;
                    break;
                }
            } else {
                stalls = 0;
            }
        }
        t.iterations += iters;
        t.exhausted |= !converged;
        let v = self.value_at(&t.x, &mut scratch);
        if v > t.best_val {
            t.best_val = v;
            t.best.copy_from_slice(&t.x);
        }
    }
}

/// State of one multi-start trajectory.
#[derive(Clone)]
struct Track {
    x: Vec<f64>,
    best_val: f64,
    best: Vec<f64>,
    iterations: usize,
    exhausted: bool,
}

impl Track {
    fn new(obj: &Objective, start: &[f64]) -> Self {
        let mut scratch = obj.compiled.scratch();
        Track {
            x: start.to_vec(),
            best_val: obj.value_at(start, &mut scratch),
            best: start.to_vec(),
            iterations: 0,
            exhausted: false,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn soft_min(values: &[f64], tau: f64) -> f64 {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    if tau == 0.0 || values.len() == 1 {
        return m;
    }
    let s: f64 = values.iter().map(|v| (-(v - m) / tau).exp()).sum();
    m - tau * s.ln()
}

fn soft_min_weights(values: &[f64], tau: f64) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    if tau == 0.0 || values.len() == 1 {
        let k = values.iter().position(|&v| v == m).unwrap_or(0);
        let mut w = vec![0.0; values.len()];
        w[k] = 1.0;
        return w;
    }
    let e: Vec<f64> = values.iter().map(|v| (-(v - m) / tau).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64], out: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - theta).max(0.0);
    }
    // remove rounding drift
    let s: f64 = out.iter().sum();
    if s > 0.0 && s != 1.0 {
        out.iter_mut().for_each(|o| *o /= s);
    }
}
