//! Symbolic mutual-information expressions over the channel variables
//! `U, X1, X2, Y1, Y2`, and the distribution scopes they are optimized over.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::prob::{ProbTensor, VarGroup};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    U,
    X1,
    X2,
    Y1,
    Y2,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::U, Var::X1, Var::X2, Var::Y1, Var::Y2];

    pub fn name(self) -> &'static str {
        match self {
            Var::U => "U",
            Var::X1 => "X1",
            Var::X2 => "X2",
            Var::Y1 => "Y1",
            Var::Y2 => "Y2",
        }
    }

    pub(crate) fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

pub(crate) fn mask(vars: &[Var]) -> u8 {
    vars.iter().fold(0, |m, v| m | v.bit())
}

/// `I(a; b | given)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiTerm {
    pub a: Vec<Var>,
    pub b: Vec<Var>,
    pub given: Vec<Var>,
}

impl MiTerm {
    pub fn new(a: &[Var], b: &[Var], given: &[Var]) -> Self {
        MiTerm { a: a.to_vec(), b: b.to_vec(), given: given.to_vec() }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.a.iter().chain(&self.b).chain(&self.given).copied()
    }

    /// Entropy decomposition `H(a,c) + H(b,c) - H(a,b,c) - H(c)` as
    /// `(variable mask, coefficient)` pairs; `H(∅)` is dropped.
    pub(crate) fn entropy_terms(&self) -> Vec<(u8, f64)> {
        let (a, b, c) = (mask(&self.a), mask(&self.b), mask(&self.given));
        let mut out = vec![(a | c, 1.0), (b | c, 1.0), (a | b | c, -1.0)];
        if c != 0 {
            out.push((c, -1.0));
        }
        out
    }

    /// Evaluates the term on a joint distribution through the generic
    /// probability-tensor layer.
    pub fn eval(&self, joint: &ProbTensor) -> Result<f64> {
        let group = |vs: &[Var]| VarGroup::new(&vs.iter().map(|v| v.name()).collect::<Vec<_>>());
        let given = if self.given.is_empty() { None } else { Some(group(&self.given)?) };
        joint.mutual_information(&group(&self.a)?, &group(&self.b)?, given.as_ref())
    }
}

impl fmt::Display for MiTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |vs: &[Var]| vs.iter().map(|v| v.name()).collect::<Vec<_>>().join(",");
        write!(f, "I({};{}", join(&self.a), join(&self.b))?;
        if !self.given.is_empty() {
            write!(f, "|{}", join(&self.given))?;
        }
        write!(f, ")")
    }
}

/// Shorthand for [`MiTerm::new`].
pub fn mi(a: &[Var], b: &[Var], given: &[Var]) -> MiTerm {
    MiTerm::new(a, b, given)
}

/// A linear combination of mutual-information terms.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoExpr {
    pub terms: Vec<(f64, MiTerm)>,
}

impl InfoExpr {
    pub fn term(t: MiTerm) -> Self {
        InfoExpr { terms: vec![(1.0, t)] }
    }

    pub fn plus(mut self, t: MiTerm) -> Self {
        self.terms.push((1.0, t));
        self
    }

    pub fn minus(mut self, t: MiTerm) -> Self {
        self.terms.push((-1.0, t));
        self
    }

    pub fn negated(&self) -> Self {
        InfoExpr { terms: self.terms.iter().map(|(c, t)| (-c, t.clone())).collect() }
    }

    pub fn uses(&self, v: Var) -> bool {
        self.terms.iter().any(|(_, t)| t.vars().any(|w| w == v))
    }

    pub fn eval(&self, joint: &ProbTensor) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (c, t)| Ok(acc + c * t.eval(joint)?))
    }

    /// Attaches the channel to an input distribution and evaluates.
    pub fn eval_input(&self, input: &ProbTensor, channel: &Channel) -> Result<f64> {
        self.eval(&input.attach_channel(channel)?)
    }
}

impl fmt::Display for InfoExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, t)) in self.terms.iter().enumerate() {
            match (i, *c) {
                (0, c) if c == 1.0 => write!(f, "{t}")?,
                (0, c) if c == -1.0 => write!(f, "-{t}")?,
                (0, c) => write!(f, "{c}*{t}")?,
                (_, c) if c == 1.0 => write!(f, " + {t}")?,
                (_, c) if c == -1.0 => write!(f, " - {t}")?,
                (_, c) => write!(f, " + {c}*{t}")?,
            }
        }
        Ok(())
    }
}

/// The family of input distributions an expression is optimized over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// `p(x1, x2)`.
    Inputs,
    /// `p(u, x1, x2)` with the given auxiliary cardinality.
    Auxiliary(usize),
}

impl Scope {
    /// Variables of the input tensor, slowest axis first.
    pub fn variables(&self, channel: &Channel) -> Vec<(String, usize)> {
        let mut v = Vec::with_capacity(3);
        if let Scope::Auxiliary(card) = *self {
            v.push(("U".to_string(), card));
        }
        v.push(("X1".to_string(), channel.x1_card()));
        v.push(("X2".to_string(), channel.x2_card()));
        v
    }

    pub fn dimension(&self, channel: &Channel) -> usize {
        self.variables(channel).iter().map(|(_, c)| c).product()
    }

    pub fn aux_card(&self) -> Option<usize> {
        match *self {
            Scope::Inputs => None,
            Scope::Auxiliary(c) => Some(c),
        }
    }

    /// Wraps a flat probability vector (slowest axis first) as a tensor.
    pub fn tensor(&self, channel: &Channel, flat: &[f64]) -> Result<ProbTensor> {
        if flat.len() != self.dimension(channel) {
            return Err(Error::Dimension(format!(
                "{} values for a scope of {} entries",
                flat.len(),
                self.dimension(channel)
            )));
        }
        ProbTensor::new(self.variables(channel), flat.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Var::*;

    #[test]
    fn display_forms() {
        let e = InfoExpr::term(mi(&[U, X1], &[Y1], &[])).plus(mi(&[X2], &[Y2], &[U, X1]));
        assert_eq!(e.to_string(), "I(U,X1;Y1) + I(X2;Y2|U,X1)");
        assert_eq!(e.negated().to_string(), "-I(U,X1;Y1) - I(X2;Y2|U,X1)");
    }

    #[test]
    fn chain_rule_through_tensor_layer() {
        let ch = crate::channel::random_channel(3, [2, 2, 2, 2]).unwrap();
        let input =
            ProbTensor::new(vec![("X1", 2), ("X2", 2)], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let joint = input.attach_channel(&ch).unwrap();
        let lhs = mi(&[X1, X2], &[Y1], &[]).eval(&joint).unwrap();
        let rhs = mi(&[X1], &[Y1], &[]).eval(&joint).unwrap()
            + mi(&[X2], &[Y1], &[X1]).eval(&joint).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
