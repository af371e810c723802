//! Regime conditions of the cognitive interference channel, decided by
//! globally minimizing mutual-information gaps over input (and auxiliary)
//! distributions.

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::expr::{mi, InfoExpr, Scope, Var::*};
use crate::functional::Compiled;
use crate::optim::{Budget, GridCache, Objective};
use crate::prob::ProbTensor;
use serde::{Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// Gaps above `-TOL_CLASSIFY` bits count as nonnegative.
pub const TOL_CLASSIFY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    Pmc,
    Cmc,
    Cln,
    SiPrimal,
    SiEquiv,
    Wi,
    Bcd,
}

impl ConditionId {
    pub const ALL: [ConditionId; 7] = [
        ConditionId::Pmc,
        ConditionId::Cmc,
        ConditionId::Cln,
        ConditionId::SiPrimal,
        ConditionId::SiEquiv,
        ConditionId::Wi,
        ConditionId::Bcd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::Pmc => "PMC",
            ConditionId::Cmc => "CMC",
            ConditionId::Cln => "CLN",
            ConditionId::SiPrimal => "SI_primal",
            ConditionId::SiEquiv => "SI_equiv",
            ConditionId::Wi => "WI",
            ConditionId::Bcd => "BCD",
        }
    }

    /// Whether the condition quantifies over `p(u, x1, x2)`.
    pub fn uses_aux(self) -> bool {
        matches!(
            self,
            ConditionId::Cln | ConditionId::SiEquiv | ConditionId::Wi | ConditionId::Bcd
        )
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ConditionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ConditionId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown condition `{s}`")))
    }
}

/// A condition `part(p) >= 0 for every part and every p in scope`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCondition {
    pub id: ConditionId,
    pub parts: Vec<InfoExpr>,
}

impl RegimeCondition {
    pub fn new(id: ConditionId) -> Self {
        let t = InfoExpr::term;
        let cmc = || t(mi(&[X1, X2], &[Y2], &[])).minus(mi(&[X1, X2], &[Y1], &[]));
        let parts = match id {
            ConditionId::Pmc => vec![cmc().negated()],
            ConditionId::Cmc => vec![cmc()],
            ConditionId::SiPrimal => vec![
                t(mi(&[X2], &[Y1], &[X1])).minus(mi(&[X2], &[Y2], &[X1])),
                cmc(),
            ],
            ConditionId::SiEquiv => {
                let diff = t(mi(&[U], &[Y1], &[X1])).minus(mi(&[U], &[Y2], &[X1]));
                vec![
                    diff.clone(),
                    diff.negated(),
                    t(mi(&[X1], &[Y2], &[])).minus(mi(&[X1], &[Y1], &[])),
                ]
            }
            ConditionId::Cln => vec![t(mi(&[U], &[Y2], &[])).minus(mi(&[U], &[Y1], &[]))],
            ConditionId::Wi => vec![
                t(mi(&[X1], &[Y2], &[])).minus(mi(&[X1], &[Y1], &[])),
                t(mi(&[U], &[Y2], &[X1])).minus(mi(&[U], &[Y1], &[X1])),
            ],
            ConditionId::Bcd => vec![t(mi(&[U, X1], &[Y2], &[])).minus(mi(&[U, X1], &[Y1], &[]))],
        };
        RegimeCondition { id, parts }
    }

    pub fn scope(&self, aux_card: usize) -> Scope {
        if self.id.uses_aux() {
            Scope::Auxiliary(aux_card)
        } else {
            Scope::Inputs
        }
    }

    /// Smallest part at one input distribution, through the tensor layer.
    pub fn gap_at(&self, channel: &Channel, input: &ProbTensor) -> Result<f64> {
        let joint = input.attach_channel(channel)?;
        self.parts
            .iter()
            .try_fold(f64::INFINITY, |m, part| Ok(m.min(part.eval(&joint)?)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub restarts: usize,
    pub iterations: usize,
    /// Smallest gap on the screening grid.
    pub best_grid: f64,
    pub grid_resolution: usize,
    /// Some refinement stopped at the iteration cap.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub id: ConditionId,
    pub verdict: Verdict,
    pub worst_gap: f64,
    /// Index into the condition's parts of the part attaining `worst_gap`.
    pub worst_part: usize,
    pub expression: String,
    /// `None` for conditions over `p(x1, x2)`.
    pub aux_card: Option<usize>,
    pub witness: ProbTensor,
    pub diagnostics: Diagnostics,
}

/// Gaps above `-NOISE_FLOOR` are rounding error in the entropy sums and count
/// as zero.
pub const NOISE_FLOOR: f64 = 1e-12;

pub fn verdict(worst_gap: f64, exhausted: bool) -> Verdict {
    if worst_gap >= -NOISE_FLOOR {
        Verdict::Holds
    } else if worst_gap < -TOL_CLASSIFY {
        Verdict::Fails
    } else if exhausted {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    }
}

pub fn check_condition(
    channel: &Channel,
    cond: &RegimeCondition,
    budget: &Budget,
) -> Result<ConditionReport> {
    check_with_starts(channel, cond, budget, &[])
}

fn check_with_starts(
    channel: &Channel,
    cond: &RegimeCondition,
    budget: &Budget,
    warm: &[Vec<f64>],
) -> Result<ConditionReport> {
    budget.validate()?;
    let scope = cond.scope(budget.aux_card);
    let mut compiled = Compiled::new(channel, scope);
    let sparse = cond
        .parts
        .iter()
        .map(|p| compiled.add(p))
        .collect::<Result<Vec<_>>>()?;
    let grid = GridCache::new(&compiled, budget);
    let mut worst: Option<(f64, usize, Vec<f64>)> = None;
    let mut diag = Diagnostics {
        restarts: 0,
        iterations: 0,
        best_grid: f64::INFINITY,
        grid_resolution: grid.resolution,
        exhausted: false,
    };
    let mut worst_exhausted = false;
    for (k, s) in sparse.iter().enumerate() {
        let neg: Vec<f64> = compiled.dense(s).into_iter().map(|c| -c).collect();
        let objective = Objective { compiled: &compiled, pieces: vec![neg] };
        let out = objective.maximize(&grid, warm, budget, cond.id as u64 * 16 + k as u64);
        diag.restarts += out.restarts;
        diag.iterations += out.iterations;
        diag.best_grid = diag.best_grid.min(-out.best_grid);
        diag.exhausted |= out.exhausted;
        let gap = -out.value;
        if worst.as_ref().is_none_or(|(g, _, _)| gap < *g) {
            worst = Some((gap, k, out.point));
            worst_exhausted = out.exhausted;
        }
    }
    let (worst_gap, worst_part, point) = worst.expect("conditions have parts");
    Ok(ConditionReport {
        id: cond.id,
        verdict: verdict(worst_gap, worst_exhausted),
        worst_gap,
        worst_part,
        expression: cond.parts[worst_part].to_string(),
        aux_card: scope.aux_card(),
        witness: scope.tensor(channel, &point)?,
        diagnostics: diag,
    })
}

/// Embeds `p(u, x1, x2)` at `|U| = from` into a larger auxiliary alphabet by
/// giving the new letters zero mass.
fn embed(point: &[f64], to_dim: usize) -> Vec<f64> {
    let mut v = point.to_vec();
    v.resize(to_dim, 0.0);
    v
}

/// Checks `cond` at each auxiliary cardinality in `cards` (ascending), warm
/// starting each run from the previous witness so the reported gaps are
/// nonincreasing.
pub fn saturation_sweep(
    channel: &Channel,
    cond: &RegimeCondition,
    cards: &[usize],
    budget: &Budget,
) -> Result<Vec<ConditionReport>> {
    if cards.is_empty() || cards.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!(
            "auxiliary cardinalities must be a nonempty ascending list, got {cards:?}"
        )));
    }
    let mut out: Vec<ConditionReport> = Vec::with_capacity(cards.len());
    for &card in cards {
        let b = budget.with_aux_card(card);
        let warm = match out.last() {
            Some(prev) if cond.id.uses_aux() => {
                vec![embed(prev.witness.values(), cond.scope(card).dimension(channel))]
            }
            _ => Vec::new(),
        };
        out.push(check_with_starts(channel, cond, &b, &warm)?);
    }
    Ok(out)
}

/// An implication between conditions contradicted by the computed verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct Alarm {
    pub antecedent: ConditionId,
    pub consequent: ConditionId,
    pub message: String,
}

/// Implications checked after classification: `(if, then)`.
pub const IMPLICATIONS: [(ConditionId, ConditionId); 5] = [
    (ConditionId::Cln, ConditionId::SiPrimal),
    (ConditionId::Cln, ConditionId::SiEquiv),
    (ConditionId::SiPrimal, ConditionId::Cmc),
    (ConditionId::SiEquiv, ConditionId::Cmc),
    (ConditionId::Bcd, ConditionId::Cmc),
];

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationProfile {
    pub aux_card: usize,
    pub reports: Vec<ConditionReport>,
    pub alarms: Vec<Alarm>,
}

impl ClassificationProfile {
    pub fn report(&self, id: ConditionId) -> &ConditionReport {
        self.reports.iter().find(|r| r.id == id).expect("every condition is classified")
    }

    pub fn holds(&self, id: ConditionId) -> bool {
        self.report(id).verdict == Verdict::Holds
    }
}

pub fn implication_alarms(reports: &[ConditionReport]) -> Vec<Alarm> {
    let find = |id| reports.iter().find(|r: &&ConditionReport| r.id == id);
    IMPLICATIONS
        .iter()
        .filter_map(|&(a, c)| {
            let (ra, rc) = (find(a)?, find(c)?);
            (ra.verdict == Verdict::Holds && rc.verdict == Verdict::Fails).then(|| Alarm {
                antecedent: a,
                consequent: c,
                message: format!(
                    "{a} holds (worst gap {:.3e}) but {c} fails (worst gap {:.3e})",
                    ra.worst_gap, rc.worst_gap
                ),
            })
        })
        .collect()
}

pub fn classify(channel: &Channel, budget: &Budget) -> Result<ClassificationProfile> {
    let reports = ConditionId::ALL
        .iter()
        .map(|&id| check_condition(channel, &RegimeCondition::new(id), budget))
        .collect::<Result<Vec<_>>>()?;
    let alarms = implication_alarms(&reports);
    Ok(ClassificationProfile { aux_card: budget.aux_card, reports, alarms })
}
