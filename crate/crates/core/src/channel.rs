//! The two-user cognitive interference channel `p(y1,y2|x1,x2)`: storage,
//! file format, seeded random generation and the canned channel families used
//! as test fixtures.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Row sums of a transition tensor must be within this of one.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Discrete memoryless cognitive interference channel.
///
/// Internally the transition is stored as one contiguous row per input pair
/// `(x1, x2)`, each row indexed by `y1 * y2_card + y2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x1_card: usize,
    x2_card: usize,
    y1_card: usize,
    y2_card: usize,
    rows: Vec<f64>,
}

/// On-disk layout. `transition` is flat with `y1` slowest, then `y2`, `x1`,
/// and `x2` fastest.
#[derive(Serialize, Deserialize)]
struct ChannelFile {
    x1_card: usize,
    x2_card: usize,
    y1_card: usize,
    y2_card: usize,
    transition: Vec<f64>,
}

impl Channel {
    /// Builds a channel from its internal row layout (see type docs).
    pub fn from_rows(
        x1_card: usize,
        x2_card: usize,
        y1_card: usize,
        y2_card: usize,
        rows: Vec<f64>,
    ) -> Result<Self> {
        let ch = Channel { x1_card, x2_card, y1_card, y2_card, rows };
        ch.validate()?;
        Ok(ch)
    }

    pub fn from_fn(
        x1_card: usize,
        x2_card: usize,
        y1_card: usize,
        y2_card: usize,
        mut law: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut rows = Vec::with_capacity(x1_card * x2_card * y1_card * y2_card);
        for x1 in 0..x1_card {
            for x2 in 0..x2_card {
                for y1 in 0..y1_card {
                    for y2 in 0..y2_card {
                        rows.push(law(x1, x2, y1, y2));
                    }
                }
            }
        }
        Channel::from_rows(x1_card, x2_card, y1_card, y2_card, rows)
    }

    fn validate(&self) -> Result<()> {
        let dims = [self.x1_card, self.x2_card, self.y1_card, self.y2_card];
        if dims.contains(&0) {
            return Err(Error::Format(format!("alphabet sizes must be >= 1, got {dims:?}")));
        }
        let expected = dims.iter().product::<usize>();
        if self.rows.len() != expected {
            return Err(Error::Format(format!(
                "transition has {} entries, sizes {dims:?} need {expected}",
                self.rows.len()
            )));
        }
        for x1 in 0..self.x1_card {
            for x2 in 0..self.x2_card {
                let row = self.row(x1, x2);
                if let Some(v) = row.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(Error::Format(format!(
                        "row (x1={x1}, x2={x2}) has invalid entry {v}"
                    )));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > ROW_TOLERANCE {
                    return Err(Error::Format(format!(
                        "row (x1={x1}, x2={x2}) sums to {total}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn x1_card(&self) -> usize {
        self.x1_card
    }
    pub fn x2_card(&self) -> usize {
        self.x2_card
    }
    pub fn y1_card(&self) -> usize {
        self.y1_card
    }
    pub fn y2_card(&self) -> usize {
        self.y2_card
    }

    /// `p(·,·|x1,x2)` as a slice indexed by `y1 * y2_card + y2`.
    pub fn row(&self, x1: usize, x2: usize) -> &[f64] {
        let len = self.y1_card * self.y2_card;
        let start = (x1 * self.x2_card + x2) * len;
        &self.rows[start..start + len]
    }

    pub fn prob(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> f64 {
        self.row(x1, x2)[y1 * self.y2_card + y2]
    }

    /// `p(y1|x1,x2)`.
    pub fn marginal_y1(&self, x1: usize, x2: usize) -> Vec<f64> {
        self.row(x1, x2)
            .chunks(self.y2_card)
            .map(|c| c.iter().sum())
            .collect()
    }

    /// `p(y2|x1,x2)`.
    pub fn marginal_y2(&self, x1: usize, x2: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.y2_card];
        for chunk in self.row(x1, x2).chunks(self.y2_card) {
            for (o, v) in out.iter_mut().zip(chunk) {
                *o += v;
            }
        }
        out
    }

    /// True when every row puts all its mass on `y1 == y2`.
    pub fn has_identical_outputs(&self) -> bool {
        self.y1_card == self.y2_card
            && (0..self.x1_card).all(|x1| {
                (0..self.x2_card).all(|x2| {
                    (0..self.y1_card).all(|y1| {
                        (0..self.y2_card).all(|y2| y1 == y2 || self.prob(x1, x2, y1, y2) == 0.0)
                    })
                })
            })
    }

    /// If the channel factors as `p(y2|x1,x2) q(y1|y2)` (the primary output is
    /// a degraded copy of the cognitive one), returns `q` row-major in
    /// `(y2, y1)`.
    pub fn degradation_kernel(&self, tol: f64) -> Option<Vec<f64>> {
        let mut kernel: Vec<Option<Vec<f64>>> = vec![None; self.y2_card];
        for x1 in 0..self.x1_card {
            for x2 in 0..self.x2_card {
                let p2 = self.marginal_y2(x1, x2);
                for y2 in 0..self.y2_card {
                    if p2[y2] <= tol {
                        continue;
                    }
                    let cond: Vec<f64> = (0..self.y1_card)
                        .map(|y1| self.prob(x1, x2, y1, y2) / p2[y2])
                        .collect();
                    match &kernel[y2] {
                        None => kernel[y2] = Some(cond),
                        Some(k) => {
                            if k.iter().zip(&cond).any(|(a, b)| (a - b).abs() > tol) {
                                return None;
                            }
                        }
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(self.y1_card * self.y2_card);
        for k in kernel {
            out.extend(k.unwrap_or_else(|| vec![1.0 / self.y1_card as f64; self.y1_card]));
        }
        Some(out)
    }

    pub fn to_json(&self) -> String {
        let mut transition = Vec::with_capacity(self.rows.len());
        for y1 in 0..self.y1_card {
            for y2 in 0..self.y2_card {
                for x1 in 0..self.x1_card {
                    for x2 in 0..self.x2_card {
                        transition.push(self.prob(x1, x2, y1, y2));
                    }
                }
            }
        }
        let file = ChannelFile {
            x1_card: self.x1_card,
            x2_card: self.x2_card,
            y1_card: self.y1_card,
            y2_card: self.y2_card,
            transition,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("channel serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ChannelFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let dims = [file.x1_card, file.x2_card, file.y1_card, file.y2_card];
        let expected = dims.iter().product::<usize>();
        if file.transition.len() != expected {
            return Err(Error::Format(format!(
                "transition has {} entries, sizes {dims:?} need {expected}",
                file.transition.len()
            )));
        }
        let [nx1, nx2, ny1, ny2] = dims;
        Channel::from_fn(nx1, nx2, ny1, ny2, |x1, x2, y1, y2| {
            file.transition[((y1 * ny2 + y2) * nx1 + x1) * nx2 + x2]
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Channel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Channel with every row drawn independently from the symmetric
/// Dirichlet(1) distribution over the `(y1, y2)` simplex.
pub fn random_channel(seed: u64, sizes: [usize; 4]) -> Result<Channel> {
    let [x1, x2, y1, y2] = sizes;
    if sizes.contains(&0) {
        return Err(Error::Argument(format!("alphabet sizes must be >= 1, got {sizes:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let row_len = y1 * y2;
    let mut rows = Vec::with_capacity(x1 * x2 * row_len);
    for _ in 0..x1 * x2 {
        let draws: Vec<f64> = (0..row_len).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        rows.extend(draws.iter().map(|d| d / total));
    }
    Channel::from_rows(x1, x2, y1, y2, rows)
}

/// Parametrized constructions with a known regime structure. All
/// deterministic families are binary in every alphabet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelFamily {
    /// `Y1 = Y2 = X1 xor X2 xor Z`, `Z ~ Bern(flip)`.
    IdenticalOutputs { flip: f64 },
    /// `Y2 = X1 xor X2 xor Z_a`, `Y1 = Y2 xor Z_b`: the primary output is a
    /// degraded copy of the cognitive one.
    DegradedCognitive { inner_flip: f64, degrade_flip: f64 },
    /// `Y1` uniform and independent of the inputs, `Y2 = X1 xor X2 xor Z`.
    NullPrimaryOutput { flip: f64 },
    /// `Y2` uniform and independent of the inputs, `Y1 = X1 xor Z`.
    NullCognitiveOutput { flip: f64 },
    /// Dirichlet(1) rows, see [`random_channel`].
    Random { seed: u64, sizes: [usize; 4] },
}

impl ChannelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelFamily::IdenticalOutputs { .. } => "identical_outputs",
            ChannelFamily::DegradedCognitive { .. } => "degraded_cognitive",
            ChannelFamily::NullPrimaryOutput { .. } => "null_primary_output",
            ChannelFamily::NullCognitiveOutput { .. } => "null_cognitive_output",
            ChannelFamily::Random { .. } => "random",
        }
    }

    /// Parses `NAME ARGS...` as given on the command line. Noise parameters
    /// default to 0; `random` takes an optional size list `x1 x2 y1 y2` and
    /// uses `seed`.
    pub fn parse(name: &str, args: &[String], seed: Option<u64>) -> Result<Self> {
        let nums = args
            .iter()
            .map(|a| {
                f64::from_str(a).map_err(|_| Error::Argument(format!("`{a}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| -> Result<()> {
            if nums.len() > n {
                Err(Error::Argument(format!("family `{name}` takes at most {n} parameters")))
            } else {
                Ok(())
            }
        };
        let at = |i: usize| nums.get(i).copied().unwrap_or(0.0);
        let family = match name {
            "identical_outputs" => {
                arity(1)?;
                ChannelFamily::IdenticalOutputs { flip: at(0) }
            }
            "degraded_cognitive" => {
                arity(2)?;
                ChannelFamily::DegradedCognitive { inner_flip: at(0), degrade_flip: at(1) }
            }
            "null_primary_output" => {
                arity(1)?;
                ChannelFamily::NullPrimaryOutput { flip: at(0) }
            }
            "null_cognitive_output" => {
                arity(1)?;
                ChannelFamily::NullCognitiveOutput { flip: at(0) }
            }
            "random" => {
                let seed = seed.ok_or_else(|| {
                    Error::Argument("family `random` requires a seed".into())
                })?;
                let sizes = match nums.len() {
                    0 => [2, 2, 2, 2],
                    4 => {
                        let mut s = [0usize; 4];
                        for (slot, v) in s.iter_mut().zip(&nums) {
                            if v.fract() != 0.0 || *v < 1.0 {
                                return Err(Error::Argument(format!("invalid alphabet size {v}")));
                            }
                            *slot = *v as usize;
                        }
                        s
                    }
                    _ => {
                        return Err(Error::Argument(
                            "family `random` takes either no sizes or `x1 x2 y1 y2`".into(),
                        ))
                    }
                };
                ChannelFamily::Random { seed, sizes }
            }
            other => return Err(Error::Argument(format!("unknown channel family `{other}`"))),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn validate(&self) -> Result<()> {
        let flips: Vec<f64> = match *self {
            ChannelFamily::IdenticalOutputs { flip }
            | ChannelFamily::NullPrimaryOutput { flip }
            | ChannelFamily::NullCognitiveOutput { flip } => vec![flip],
            ChannelFamily::DegradedCognitive { inner_flip, degrade_flip } => {
                vec![inner_flip, degrade_flip]
            }
            ChannelFamily::Random { sizes, .. } => {
                if sizes.contains(&0) {
                    return Err(Error::Argument("alphabet sizes must be >= 1".into()));
                }
                vec![]
            }
        };
        match flips.iter().find(|f| !(0.0..=0.5).contains(*f)) {
            Some(f) => Err(Error::Argument(format!(
                "noise level {f} outside [0, 0.5] for family `{}`",
                self.name()
            ))),
            None => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Channel> {
        self.validate()?;
        let bsc = |flip: f64, a: usize, b: usize| if a == b { 1.0 - flip } else { flip };
        match *self {
            ChannelFamily::IdenticalOutputs { flip } => Channel::from_fn(2, 2, 2, 2, |x1, x2, y1, y2| {
                if y1 == y2 {
                    bsc(flip, x1 ^ x2, y1)
                } else {
                    0.0
                }
            }),
            ChannelFamily::DegradedCognitive { inner_flip, degrade_flip } => {
                Channel::from_fn(2, 2, 2, 2, |x1, x2, y1, y2| {
                    bsc(inner_flip, x1 ^ x2, y2) * bsc(degrade_flip, y2, y1)
                })
            }
            ChannelFamily::NullPrimaryOutput { flip } => {
                Channel::from_fn(2, 2, 2, 2, |x1, x2, _y1, y2| 0.5 * bsc(flip, x1 ^ x2, y2))
            }
            ChannelFamily::NullCognitiveOutput { flip } => {
                Channel::from_fn(2, 2, 2, 2, |x1, _x2, y1, _y2| 0.5 * bsc(flip, x1, y1))
            }
            ChannelFamily::Random { seed, sizes } => random_channel(seed, sizes),
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChannelFamily::IdenticalOutputs { flip }
            | ChannelFamily::NullPrimaryOutput { flip }
            | ChannelFamily::NullCognitiveOutput { flip } => write!(f, "{} {flip}", self.name()),
            ChannelFamily::DegradedCognitive { inner_flip, degrade_flip } => {
                write!(f, "{} {inner_flip} {degrade_flip}", self.name())
            }
            ChannelFamily::Random { seed, sizes } => write!(
                f,
                "random seed={seed} sizes={}x{}x{}x{}",
                sizes[0], sizes[1], sizes[2], sizes[3]
            ),
        }
    }
}

/// Fixed channels used throughout the tests and examples.
pub mod fixtures {
    use super::Channel;

    /// `Y1 = X1`, `Y2 = X2`, binary and noiseless.
    pub fn noiseless_pair() -> Channel {
        Channel::from_fn(2, 2, 2, 2, |x1, x2, y1, y2| {
            f64::from(u8::from(y1 == x1 && y2 == x2))
        })
        .expect("valid fixture")
    }

    /// `Y1 = X1` and `Y2 = (X1, X2)` encoded as `2 x1 + x2`.
    pub fn noiseless_product() -> Channel {
        Channel::from_fn(2, 2, 2, 4, |x1, x2, y1, y2| {
            f64::from(u8::from(y1 == x1 && y2 == 2 * x1 + x2))
        })
        .expect("valid fixture")
    }

    /// Both outputs uniform and independent of the inputs.
    pub fn zero_capacity() -> Channel {
        Channel::from_fn(2, 2, 2, 2, |_, _, _, _| 0.25).expect("valid fixture")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_pair_file_loads_deterministic() {
        let text = r#"{"x1_card":2,"x2_card":2,"y1_card":2,"y2_card":2,
            "transition":[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}"#;
        let ch = Channel::from_json(text).unwrap();
        assert_eq!(ch, fixtures::noiseless_pair());
    }

    #[test]
    fn unnormalized_row_is_rejected_with_location() {
        let text = r#"{"x1_card":1,"x2_card":2,"y1_card":1,"y2_card":2,
            "transition":[0.5, 0.5, 0.48, 0.5]}"#;
        let err = Channel::from_json(text).unwrap_err().to_string();
        assert!(err.contains("x1=0, x2=0"), "{err}");
        assert!(err.contains("0.98"), "{err}");
    }

    #[test]
    fn malformed_files_are_format_errors() {
        for text in [
            "not json",
            r#"{"x1_card":2,"x2_card":2,"y1_card":2,"y2_card":2,"transition":[1,0]}"#,
            r#"{"x1_card":2,"x2_card":2,"y1_card":2,"transition":[]}"#,
        ] {
            assert!(matches!(Channel::from_json(text), Err(Error::Format(_))), "{text}");
        }
    }

    #[test]
    fn file_order_is_y1_slowest_x2_fastest() {
        let ch = random_channel(11, [2, 3, 2, 2]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&ch.to_json()).unwrap();
        let flat: Vec<f64> =
            v["transition"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        // y1=1, y2=0, x1=1, x2=2
        assert_eq!(flat[((1 * 2 + 0) * 2 + 1) * 3 + 2], ch.prob(1, 2, 1, 0));
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let ch = random_channel(42, [2, 2, 3, 2]).unwrap();
        ch.save(&path).unwrap();
        let back = Channel::load(&path).unwrap();
        assert_eq!(ch, back);
    }

    #[test]
    fn random_channel_determinism() {
        let a = random_channel(5, [2, 2, 2, 2]).unwrap();
        let b = random_channel(5, [2, 2, 2, 2]).unwrap();
        let c = random_channel(6, [2, 2, 2, 2]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for x1 in 0..2 {
            for x2 in 0..2 {
                assert!((a.row(x1, x2).iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn family_structure() {
        let id = ChannelFamily::IdenticalOutputs { flip: 0.1 }.build().unwrap();
        assert!(id.has_identical_outputs());

        let deg = ChannelFamily::DegradedCognitive { inner_flip: 0.1, degrade_flip: 0.2 }
            .build()
            .unwrap();
        let q = deg.degradation_kernel(1e-12).expect("degraded");
        assert!((q[0] - 0.8).abs() < 1e-12 && (q[1] - 0.2).abs() < 1e-12);

        let np = ChannelFamily::NullPrimaryOutput { flip: 0.0 }.build().unwrap();
        for x1 in 0..2 {
            for x2 in 0..2 {
                assert_eq!(np.marginal_y1(x1, x2), vec![0.5, 0.5]);
            }
        }
        // a random channel is generically not degraded
        assert!(random_channel(1, [2, 2, 2, 2]).unwrap().degradation_kernel(1e-9).is_none());
    }

    #[test]
    fn family_parameter_ranges() {
        assert!(ChannelFamily::IdenticalOutputs { flip: 0.7 }.build().is_err());
        assert!(ChannelFamily::parse("degraded_cognitive", &["0.1".into(), "0.7".into()], None)
            .is_err());
        assert!(ChannelFamily::parse("random", &[], None).is_err());
        assert!(ChannelFamily::parse("bogus", &[], None).is_err());
        let f = ChannelFamily::parse("degraded_cognitive", &["0.1".into(), "0.2".into()], None)
            .unwrap();
        assert_eq!(f, ChannelFamily::DegradedCognitive { inner_flip: 0.1, degrade_flip: 0.2 });
    }
}
