//! Compiled information functionals over a flat input distribution.
//!
//! Every mutual-information expression over `(U, X1, X2, Y1, Y2)` is a
//! linear combination of entropies `H(Z)`, and each `q(z)` is a fixed linear
//! image of the input vector `p(u, x1, x2)` once the channel is attached.
//! Compiling those images once per (channel, scope) lets the optimizer
//! evaluate values and exact gradients without building joint tensors.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::expr::{InfoExpr, Scope, Var};
use std::f64::consts::LN_2;

/// Mass added to every input coordinate when forming logarithms for the
/// gradient, so that directional derivatives into zero coordinates stay
/// finite and consistent between nested marginals.
const GRADIENT_SMOOTHING: f64 = 1e-10;

struct LinearImage {
    n_out: usize,
    /// `(input index, output index, weight)`, grouped by input index.
    entries: Vec<(u32, u32, f64)>,
    /// Column sums of the image, `Σ_s w(z|s)`.
    col_sums: Vec<f64>,
}

impl LinearImage {
    fn build(channel: &Channel, scope: Scope, vars: u8) -> Result<Self> {
        let u_card = scope.aux_card().unwrap_or(1);
        if scope.aux_card().is_none() && vars & Var::U.bit() != 0 {
            return Err(Error::Argument(
                "expression uses U but the scope has no auxiliary variable".into(),
            ));
        }
        let (nx1, nx2, ny1, ny2) =
            (channel.x1_card(), channel.x2_card(), channel.y1_card(), channel.y2_card());
        let has = |v: Var| vars & v.bit() != 0;
        // output radix in canonical order U, X1, X2, Y1, Y2
        let radix = [
            (Var::U, u_card),
            (Var::X1, nx1),
            (Var::X2, nx2),
            (Var::Y1, ny1),
            (Var::Y2, ny2),
        ];
        let n_out: usize = radix.iter().filter(|(v, _)| has(*v)).map(|(_, c)| c).product();
        let mut entries = Vec::new();
        let mut s = 0u32;
        for u in 0..u_card {
            for x1 in 0..nx1 {
                for x2 in 0..nx2 {
                    let w1 = channel.marginal_y1(x1, x2);
                    let w2 = channel.marginal_y2(x1, x2);
                    let ys: Vec<(usize, usize, f64)> = match (has(Var::Y1), has(Var::Y2)) {
                        (true, true) => (0..ny1)
                            .flat_map(|y1| (0..ny2).map(move |y2| (y1, y2)))
                            .map(|(y1, y2)| (y1, y2, channel.prob(x1, x2, y1, y2)))
                            .collect(),
                        (true, false) => (0..ny1).map(|y1| (y1, 0, w1[y1])).collect(),
                        (false, true) => (0..ny2).map(|y2| (0, y2, w2[y2])).collect(),
                        (false, false) => vec![(0, 0, 1.0)],
                    };
                    for (y1, y2, w) in ys {
                        if w == 0.0 {
                            continue;
                        }
                        let vals = [u, x1, x2, y1, y2];
                        let z = radix
                            .iter()
                            .zip(vals)
                            .filter(|((v, _), _)| has(*v))
                            .fold(0usize, |acc, ((_, c), val)| acc * c + val);
                        entries.push((s, z as u32, w));
                    }
                    s += 1;
                }
            }
        }
        let mut col_sums = vec![0.0; n_out];
        for &(_, z, w) in &entries {
            col_sums[z as usize] += w;
        }
        Ok(LinearImage { n_out, entries, col_sums })
    }
}

/// A set of entropy functionals `H(Z_j)` of the joint induced by an input
/// distribution, plus the linear expressions built on top of them.
pub(crate) struct Compiled {
    dim: usize,
    masks: Vec<u8>,
    images: Vec<LinearImage>,
    channel: Channel,
    scope: Scope,
}

/// Reusable buffers for one evaluation thread.
pub(crate) struct Scratch {
    q: Vec<Vec<f64>>,
    h: Vec<f64>,
}

impl Compiled {
    pub fn new(channel: &Channel, scope: Scope) -> Self {
        Compiled {
            dim: scope.dimension(channel),
            masks: Vec::new(),
            images: Vec::new(),
            channel: channel.clone(),
            scope,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_terms(&self) -> usize {
        self.images.len()
    }

    fn image_index(&mut self, vars: u8) -> Result<usize> {
        if let Some(i) = self.masks.iter().position(|&m| m == vars) {
            return Ok(i);
        }
        self.images.push(LinearImage::build(&self.channel, self.scope, vars)?);
        self.masks.push(vars);
        Ok(self.images.len() - 1)
    }

    /// Registers the entropies an expression needs and returns its sparse
    /// coefficient vector over them.
    pub fn add(&mut self, expr: &InfoExpr) -> Result<Vec<(usize, f64)>> {
        let mut coefs: Vec<(usize, f64)> = Vec::new();
        for (c, term) in &expr.terms {
            for (m, sign) in term.entropy_terms() {
                let j = self.image_index(m)?;
                match coefs.iter_mut().find(|(k, _)| *k == j) {
                    Some(slot) => slot.1 += c * sign,
                    None => coefs.push((j, c * sign)),
                }
            }
        }
        coefs.retain(|(_, c)| *c != 0.0);
        Ok(coefs)
    }

    /// Dense coefficient vector over all registered terms.
    pub fn dense(&self, sparse: &[(usize, f64)]) -> Vec<f64> {
        let mut d = vec![0.0; self.images.len()];
        for &(j, c) in sparse {
            d[j] += c;
        }
        d
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            q: self.images.iter().map(|im| vec![0.0; im.n_out]).collect(),
            h: vec![0.0; self.images.len()],
        }
    }

    /// Evaluates every entropy term at `p`. Results are left in
    /// `scratch.h` (and the image vectors in `scratch.q`).
    pub fn entropies<'s>(&self, p: &[f64], scratch: &'s mut Scratch) -> &'s [f64] {
        for (j, im) in self.images.iter().enumerate() {
            let q = &mut scratch.q[j];
            q.iter_mut().for_each(|v| *v = 0.0);
            for &(s, z, w) in &im.entries {
                q[z as usize] += w * p[s as usize];
            }
            scratch.h[j] = -q
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| v * v.log2())
                .sum::<f64>();
        }
        &scratch.h
    }

    /// Gradient of `Σ_j coef_j H_j` with respect to `p`, using the image
    /// vectors left in `scratch` by the last [`Compiled::entropies`] call.
    pub fn gradient(&self, coefs: &[f64], scratch: &Scratch, grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut logs: Vec<f64> = Vec::new();
        for (j, im) in self.images.iter().enumerate() {
            let c = coefs[j];
            if c == 0.0 {
                continue;
            }
            logs.clear();
            logs.extend(
                scratch.q[j]
                    .iter()
                    .zip(&im.col_sums)
                    .map(|(q, cs)| (q + GRADIENT_SMOOTHING * cs).max(f64::MIN_POSITIVE).log2()
                        + 1.0 / LN_2),
            );
            for &(s, z, w) in &im.entries {
                grad[s as usize] -= c * w * logs[z as usize];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::random_channel;
    use crate::expr::{mi, Var::*};

    fn sample_point(dim: usize, seed: u64) -> Vec<f64> {
        // deterministic interior point
        let raw: Vec<f64> = (0..dim)
            .map(|i| 1.0 + ((i as u64 * 2654435761 + seed * 97) % 1000) as f64 / 250.0)
            .collect();
        let t: f64 = raw.iter().sum();
        raw.iter().map(|v| v / t).collect()
    }

    #[test]
    fn matches_tensor_layer() {
        let ch = random_channel(9, [2, 2, 2, 3]).unwrap();
        let scope = Scope::Auxiliary(3);
        let exprs = [
            InfoExpr::term(mi(&[U, X1], &[Y1], &[])),
            InfoExpr::term(mi(&[X2], &[Y2], &[U, X1])),
            InfoExpr::term(mi(&[X1, X2], &[Y2], &[])).minus(mi(&[U], &[Y1], &[X1])),
        ];
        let mut comp = Compiled::new(&ch, scope);
        let coefs: Vec<_> = exprs.iter().map(|e| comp.add(e).unwrap()).collect();
        let mut scratch = comp.scratch();
        let p = sample_point(comp.dim(), 4);
        let h = comp.entropies(&p, &mut scratch).to_vec();
        let tensor = scope.tensor(&ch, &p).unwrap();
        for (e, c) in exprs.iter().zip(&coefs) {
            let fast: f64 = c.iter().map(|(j, k)| k * h[*j]).sum();
            let slow = e.eval_input(&tensor, &ch).unwrap();
            assert!((fast - slow).abs() < 1e-12, "{e}: {fast} vs {slow}");
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let ch = random_channel(21, [2, 2, 2, 2]).unwrap();
        let scope = Scope::Auxiliary(2);
        let expr = InfoExpr::term(mi(&[U, X1], &[Y1], &[]))
            .plus(mi(&[X2], &[Y2], &[U, X1]))
            .minus(mi(&[X1, X2], &[Y2], &[]));
        let mut comp = Compiled::new(&ch, scope);
        let coefs = comp.add(&expr).unwrap();
        let dense = comp.dense(&coefs);
        let mut scratch = comp.scratch();
        let p = sample_point(comp.dim(), 1);
        let value = |x: &[f64], sc: &mut Scratch| -> f64 {
            let h = comp.entropies(x, sc);
            dense.iter().zip(h).map(|(c, v)| c * v).sum()
        };
        value(&p, &mut scratch);
        let mut grad = vec![0.0; comp.dim()];
        comp.gradient(&dense, &scratch, &mut grad);
        // compare along directions inside the simplex tangent space
        for (a, b) in [(0usize, 1usize), (2, 7), (5, 3), (6, 4)] {
            let eps = 1e-6;
            let mut plus = p.clone();
            let mut minus = p.clone();
            plus[a] += eps;
            plus[b] -= eps;
            minus[a] -= eps;
            minus[b] += eps;
            let fd = (value(&plus, &mut scratch) - value(&minus, &mut scratch)) / (2.0 * eps);
            let an = grad[a] - grad[b];
            assert!((fd - an).abs() < 1e-6, "direction ({a},{b}): fd {fd} vs analytic {an}");
        }
    }

    #[test]
    fn aux_variable_requires_aux_scope() {
        let ch = random_channel(1, [2, 2, 2, 2]).unwrap();
        let mut comp = Compiled::new(&ch, Scope::Inputs);
        assert!(comp.add(&InfoExpr::term(mi(&[U], &[Y1], &[]))).is_err());
    }
}
