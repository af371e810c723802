//! Probability tensors over named finite variables and the information
//! measures built on them.
//!
//! All logarithms are base 2. Variables are addressed by name, never by axis
//! position, so a 5-way joint `(U, X1, X2, Y1, Y2)` can be queried without
//! tracking its layout.

use crate::channel::Channel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Inputs whose total mass is off by more than this are rejected.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// A nonempty set of distinct variable names, used to select the arguments
/// of `H(·)` and `I(·;·|·)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarGroup(Vec<String>);

impl VarGroup {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Argument("variable group must be nonempty".into()));
        }
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::Argument(format!("variable `{n}` listed twice")));
            }
        }
        Ok(VarGroup(names))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|n| n == name)
    }

    pub fn is_disjoint(&self, other: &VarGroup) -> bool {
        self.0.iter().all(|n| !other.contains(n))
    }

    /// Names of `self` followed by the names of `other` not already present.
    pub fn union(&self, other: &VarGroup) -> VarGroup {
        let mut names = self.0.clone();
        names.extend(other.0.iter().filter(|n| !self.contains(n)).cloned());
        VarGroup(names)
    }
}

/// Joint probability mass function over an ordered list of named variables.
///
/// Values are stored row-major: the first variable is the slowest-varying
/// axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbTensor {
    variables: Vec<(String, usize)>,
    values: Vec<f64>,
}

impl ProbTensor {
    /// Validates and builds a tensor. A total mass within
    /// [`NORMALIZATION_SLACK`] of one is renormalized; anything further off is
    /// rejected.
    pub fn new<S: Into<String>>(variables: Vec<(S, usize)>, values: Vec<f64>) -> Result<Self> {
        let variables: Vec<(String, usize)> =
            variables.into_iter().map(|(n, c)| (n.into(), c)).collect();
        if variables.is_empty() {
            return Err(Error::Dimension("a tensor needs at least one variable".into()));
        }
        for (i, (name, card)) in variables.iter().enumerate() {
            if *card == 0 {
                return Err(Error::Dimension(format!("variable `{name}` has cardinality 0")));
            }
            if variables[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::Argument(format!("variable `{name}` listed twice")));
            }
        }
        let size: usize = variables.iter().map(|(_, c)| c).product();
        if values.len() != size {
            return Err(Error::Dimension(format!(
                "{} values supplied for a tensor of {size} entries",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Distribution(format!("entry {bad} is not a nonnegative number")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::Distribution(format!("entries sum to {total}")));
        }
        let values = if total == 1.0 {
            values
        } else {
            values.into_iter().map(|v| v / total).collect()
        };
        Ok(ProbTensor { variables, values })
    }

    pub fn uniform<S: Into<String>>(variables: Vec<(S, usize)>) -> Result<Self> {
        let variables: Vec<(String, usize)> =
            variables.into_iter().map(|(n, c)| (n.into(), c)).collect();
        let size: usize = variables.iter().map(|(_, c)| c).product();
        ProbTensor::new(variables, vec![1.0 / size.max(1) as f64; size])
    }

    pub fn point_mass<S: Into<String>>(variables: Vec<(S, usize)>, at: &[usize]) -> Result<Self> {
        let variables: Vec<(String, usize)> =
            variables.into_iter().map(|(n, c)| (n.into(), c)).collect();
        if at.len() != variables.len() || at.iter().zip(&variables).any(|(i, (_, c))| i >= c) {
            return Err(Error::Dimension("point-mass index out of range".into()));
        }
        let size: usize = variables.iter().map(|(_, c)| c).product();
        let mut values = vec![0.0; size];
        values[flat_index(&variables, at)] = 1.0;
        ProbTensor::new(variables, values)
    }

    pub fn variables(&self) -> &[(String, usize)] {
        &self.variables
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cardinality(&self, name: &str) -> Option<usize> {
        self.variables.iter().find(|(n, _)| n == name).map(|(_, c)| *c)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[flat_index(&self.variables, index)]
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Sums out every variable not in `keep`. The result lists the kept
    /// variables in the order given by `keep`.
    pub fn marginalize(&self, keep: &VarGroup) -> Result<ProbTensor> {
        let axes = keep
            .names()
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<Vec<_>>>()?;
        let out_vars: Vec<(String, usize)> =
            axes.iter().map(|&a| self.variables[a].clone()).collect();
        let mut out_strides = vec![0usize; self.variables.len()];
        let mut stride = 1;
        for &a in axes.iter().rev() {
            out_strides[a] = stride;
            stride *= self.variables[a].1;
        }
        let mut out = vec![0.0; stride];
        let cards: Vec<usize> = self.variables.iter().map(|(_, c)| *c).collect();
        let mut idx = vec![0usize; cards.len()];
        let mut target = 0usize;
        for &v in &self.values {
            out[target] += v;
            // odometer increment, keeping `target` in sync
            for ax in (0..cards.len()).rev() {
                idx[ax] += 1;
                target += out_strides[ax];
                if idx[ax] < cards[ax] {
                    break;
                }
                target -= out_strides[ax] * idx[ax];
                idx[ax] = 0;
            }
        }
        let total: f64 = out.iter().sum();
        for v in &mut out {
            *v /= total;
        }
        Ok(ProbTensor { variables: out_vars, values: out })
    }

    /// `H(of)` in bits.
    pub fn entropy(&self, of: &VarGroup) -> Result<f64> {
        Ok(entropy_bits(self.marginalize(of)?.values()))
    }

    /// `I(a; b | given)` in bits, computed as
    /// `H(a,c) + H(b,c) - H(a,b,c) - H(c)` and clamped at zero from below.
    pub fn mutual_information(
        &self,
        a: &VarGroup,
        b: &VarGroup,
        given: Option<&VarGroup>,
    ) -> Result<f64> {
        let disjoint = a.is_disjoint(b) && given.is_none_or(|c| a.is_disjoint(c) && b.is_disjoint(c));
        if !disjoint {
            return Err(Error::Argument(
                "mutual-information arguments must be pairwise disjoint".into(),
            ));
        }
        let mi = match given {
            None => self.entropy(a)? + self.entropy(b)? - self.entropy(&a.union(b))?,
            Some(c) => {
                let ac = a.union(c);
                let bc = b.union(c);
                self.entropy(&ac)? + self.entropy(&bc)?
                    - self.entropy(&ac.union(b))?
                    - self.entropy(c)?
            }
        };
        Ok(mi.max(0.0))
    }

    /// Multiplies an input distribution over `(…, X1, X2)` by the channel law,
    /// producing a joint over `(…, X1, X2, Y1, Y2)`. Variables other than
    /// `X1`/`X2` are carried along in their original order.
    pub fn attach_channel(&self, channel: &Channel) -> Result<ProbTensor> {
        for (name, want) in [("X1", channel.x1_card()), ("X2", channel.x2_card())] {
            match self.cardinality(name) {
                Some(c) if c == want => {}
                Some(c) => {
                    return Err(Error::Dimension(format!(
                        "`{name}` has cardinality {c}, channel expects {want}"
                    )))
                }
                None => return Err(Error::UnknownVariable(name.to_string())),
            }
        }
        for reserved in ["Y1", "Y2"] {
            if self.cardinality(reserved).is_some() {
                return Err(Error::Argument(format!("input already contains `{reserved}`")));
            }
        }
        let px1 = self.position("X1")?;
        let px2 = self.position("X2")?;
        let outs = channel.y1_card() * channel.y2_card();
        let mut variables = self.variables.clone();
        variables.push(("Y1".into(), channel.y1_card()));
        variables.push(("Y2".into(), channel.y2_card()));
        let mut values = Vec::with_capacity(self.values.len() * outs);
        let cards: Vec<usize> = self.variables.iter().map(|(_, c)| *c).collect();
        let mut idx = vec![0usize; cards.len()];
        for &p in &self.values {
            let row = channel.row(idx[px1], idx[px2]);
            values.extend(row.iter().map(|w| p * w));
            for ax in (0..cards.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < cards[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        ProbTensor::new(variables, values)
    }
}

fn flat_index(variables: &[(String, usize)], index: &[usize]) -> usize {
    variables
        .iter()
        .zip(index)
        .fold(0, |acc, ((_, card), i)| acc * card + i)
}

/// Entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Channel;

    fn g(names: &[&str]) -> VarGroup {
        VarGroup::new(names).unwrap()
    }

    #[test]
    fn marginal_of_uniform_product() {
        let t = ProbTensor::uniform(vec![("A", 2), ("B", 2)]).unwrap();
        let m = t.marginalize(&g(&["A"])).unwrap();
        assert_eq!(m.values(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_of_deterministic_copy() {
        let t = ProbTensor::new(vec![("X", 2), ("Y", 2)], vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        let m = t.marginalize(&g(&["Y"])).unwrap();
        assert!((m.values()[0] - 0.3).abs() < 1e-15);
        assert!((m.values()[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn marginal_keeps_requested_order() {
        let t = ProbTensor::uniform(vec![("U", 2), ("X1", 2), ("X2", 2)]).unwrap();
        let m = t.marginalize(&g(&["X1", "X2"])).unwrap();
        assert_eq!(m.variables().len(), 2);
        assert!(m.values().iter().all(|v| (v - 0.25).abs() < 1e-15));

        let t = ProbTensor::new(vec![("A", 2), ("B", 3)], vec![0.1, 0.2, 0.0, 0.3, 0.0, 0.4])
            .unwrap();
        let swapped = t.marginalize(&g(&["B", "A"])).unwrap();
        assert_eq!(swapped.variables()[0].0, "B");
        assert!((swapped.get(&[1, 0]) - 0.2).abs() < 1e-15);
        assert!((swapped.get(&[2, 1]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn unknown_name_is_reported() {
        let t = ProbTensor::uniform(vec![("A", 2)]).unwrap();
        assert!(matches!(t.marginalize(&g(&["Z"])), Err(Error::UnknownVariable(n)) if n == "Z"));
    }

    #[test]
    fn entropy_examples() {
        let u = ProbTensor::uniform(vec![("A", 2)]).unwrap();
        assert!((u.entropy(&g(&["A"])).unwrap() - 1.0).abs() < 1e-15);
        let pm = ProbTensor::point_mass(vec![("A", 3)], &[1]).unwrap();
        assert_eq!(pm.entropy(&g(&["A"])).unwrap(), 0.0);
        let skew = ProbTensor::new(vec![("A", 2)], vec![0.9, 0.1]).unwrap();
        // -(0.9 log2 0.9 + 0.1 log2 0.1)
        assert!((skew.entropy(&g(&["A"])).unwrap() - 0.468996).abs() < 1e-6);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = ProbTensor::uniform(vec![("A", 2), ("B", 2)]).unwrap();
        assert!(indep.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap() < 1e-15);

        let copy = ProbTensor::new(vec![("A", 2), ("B", 2)], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let mi = copy.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap();
        assert!((mi - 1.0).abs() < 1e-15);

        let bsc = ProbTensor::new(vec![("A", 2), ("B", 2)], vec![0.45, 0.05, 0.05, 0.45]).unwrap();
        let mi = bsc.mutual_information(&g(&["A"]), &g(&["B"]), None).unwrap();
        assert!((mi - 0.531004).abs() < 1e-6);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let t = ProbTensor::uniform(vec![("A", 2), ("B", 2), ("C", 2)]).unwrap();
        assert!(t.mutual_information(&g(&["A"]), &g(&["A", "B"]), None).is_err());
        assert!(t
            .mutual_information(&g(&["A"]), &g(&["B"]), Some(&g(&["B"])))
            .is_err());
    }

    #[test]
    fn normalization_policy() {
        let drift = ProbTensor::new(vec![("A", 2)], vec![0.5, 0.5 + 5e-10]).unwrap();
        let total: f64 = drift.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(ProbTensor::new(vec![("A", 2)], vec![0.5, 0.48]).is_err());
        assert!(ProbTensor::new(vec![("A", 2)], vec![1.5, -0.5]).is_err());
        assert!(ProbTensor::new(vec![("A", 2)], vec![1.0]).is_err());
    }

    #[test]
    fn attach_deterministic_channel() {
        let ch = Channel::from_fn(2, 2, 2, 2, |x1, x2, y1, y2| {
            f64::from(u8::from(y1 == x1 && y2 == x2))
        })
        .unwrap();
        let input = ProbTensor::uniform(vec![("X1", 2), ("X2", 2)]).unwrap();
        let joint = input.attach_channel(&ch).unwrap();
        assert_eq!(joint.variables().len(), 4);
        for x1 in 0..2 {
            for x2 in 0..2 {
                for y1 in 0..2 {
                    for y2 in 0..2 {
                        let want = if y1 == x1 && y2 == x2 { 0.25 } else { 0.0 };
                        assert_eq!(joint.get(&[x1, x2, y1, y2]), want);
                    }
                }
            }
        }
    }

    #[test]
    fn attach_point_mass_gives_channel_slice() {
        let ch = Channel::from_fn(2, 2, 2, 2, |x1, x2, y1, y2| {
            let base = [0.1, 0.2, 0.3, 0.4];
            let k = (y1 * 2 + y2 + x1 + 2 * x2) % 4;
            base[k]
        })
        .unwrap();
        let input = ProbTensor::point_mass(vec![("U", 2), ("X1", 2), ("X2", 2)], &[1, 0, 1]).unwrap();
        let joint = input.attach_channel(&ch).unwrap();
        for y1 in 0..2 {
            for y2 in 0..2 {
                assert_eq!(joint.get(&[1, 0, 1, y1, y2]), ch.prob(0, 1, y1, y2));
            }
        }
    }

    #[test]
    fn attach_rejects_shape_mismatch() {
        let ch = Channel::from_fn(2, 2, 2, 2, |_, _, _, _| 0.25).unwrap();
        let bad = ProbTensor::uniform(vec![("X1", 3), ("X2", 2)]).unwrap();
        assert!(matches!(bad.attach_channel(&ch), Err(Error::Dimension(_))));
        let missing = ProbTensor::uniform(vec![("X1", 2)]).unwrap();
        assert!(missing.attach_channel(&ch).is_err());
    }
}
