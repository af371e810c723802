//! Command implementations for the `dmcic` binary. Every command returns
//! its rendered output and exit code instead of printing, so the same code
//! paths are exercised by the integration tests.

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmcic::channel::fixtures;
use dmcic::classifier::{implication_alarms, Alarm, Diagnostics};
use dmcic::optim::sub_seed;
use dmcic::regions::ActiveReport;
use dmcic::{
    check_condition, compute_region, hausdorff, region_subset, saturation_sweep, Budget, Channel,
    ChannelFamily, ComputedRegion, ConditionId, ConditionReport, Error, ProbTensor, RegimeCondition,
    RegionId, Verdict, DEFAULT_ANGLES, TOL_REGION,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_THEOREM: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Stream id for deriving batch channel seeds.
const BATCH_STREAM: u64 = 0xBA7C;

#[derive(Parser, Debug)]
#[command(name = "dmcic", version, about = "Regime classification and rate regions for the cognitive interference channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide every regime condition for one channel.
    Classify(CommonArgs),
    /// Compute one rate region and export its boundary.
    Region {
        /// C_I, C_II, C_III, C_III_prime, C_IV, R_o or R_o_prime.
        #[arg(long)]
        region: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify a batch of seeded channels and check the region hierarchy.
    Hierarchy {
        /// Number of random binary channels (ignored with --channel/--family).
        #[arg(long, default_value_t = 100)]
        batch: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write a channel file from a named family.
    Generate(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Channel file (JSON).
    #[arg(long, conflicts_with = "family")]
    pub channel: Option<PathBuf>,
    /// Channel family and its parameters, e.g. `--family degraded_cognitive 0.1 0.2`.
    #[arg(long, num_args = 1.., value_names = ["NAME", "ARGS"], allow_negative_numbers = true)]
    pub family: Option<Vec<String>>,
    /// Seed for random channels and batches; also seeds the optimizer (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Refinement starts per maximization (default 32).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Screening grid resolution, the denominator of grid fractions (default 8).
    #[arg(long)]
    pub grid_res: Option<usize>,
    /// Iteration cap per refinement stage (default 200).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Directions in the support-function sweep.
    #[arg(long, default_value_t = DEFAULT_ANGLES)]
    pub angles: usize,
    /// Auxiliary cardinality `N`, or an ascending range `A..B` (classify only).
    #[arg(long)]
    pub aux_card: Option<String>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `csv` (region only, the default there) or a JSON `report`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Report,
}

/// Rendered result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(String, i32), Failure>;

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let common = match &cli.command {
        Command::Classify(c) | Command::Generate(c) => c,
        Command::Region { common, .. } | Command::Hierarchy { common, .. } => common,
    };
    let result = match common.threads {
        Some(0) => Err(Failure::Usage("--threads must be >= 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(Failure::Io(e.to_string())),
        },
        None => dispatch(&cli.command),
    };
    let (text, code) = match result {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {m}\n") }
        }
        Err(Failure::Io(m)) => {
            return Outcome { code: EXIT_IO, stdout: String::new(), stderr: format!("error: {m}\n") }
        }
    };
    match &common.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome {
                code: EXIT_IO,
                stdout: String::new(),
                stderr: format!("error: writing {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn dispatch(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Classify(c) => cmd_classify(c),
        Command::Region { region, common } => cmd_region(region, common),
        Command::Hierarchy { batch, common } => cmd_hierarchy(*batch, common),
        Command::Generate(c) => cmd_generate(c),
    }
}

fn budget(c: &CommonArgs) -> std::result::Result<Budget, Failure> {
    let d = Budget::default();
    let b = Budget {
        restarts: c.restarts.unwrap_or(d.restarts),
        grid_res: c.grid_res.unwrap_or(d.grid_res),
        max_iters: c.max_iters.unwrap_or(d.max_iters),
        aux_card: aux_cards(c)?.last().copied().unwrap_or(d.aux_card),
        seed: c.seed.unwrap_or(d.seed),
        ..d
    };
    b.validate()?;
    Ok(b)
}

/// Parses `--aux-card N` or `--aux-card A..B` (inclusive).
fn aux_cards(c: &CommonArgs) -> std::result::Result<Vec<usize>, Failure> {
    let Some(spec) = &c.aux_card else { return Ok(vec![Budget::default().aux_card]) };
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::Usage(format!("invalid auxiliary cardinality `{s}`")))
    };
    match spec.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(Failure::Usage(format!("empty cardinality range `{spec}`")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![num(spec)?]),
    }
}

/// A channel plus a human-readable description of where it came from.
fn load_channel(c: &CommonArgs) -> std::result::Result<(Channel, String), Failure> {
    match (&c.channel, &c.family) {
        (Some(path), None) => {
            let ch = Channel::load(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Ok((ch, format!("file {}", path.display())))
        }
        (None, Some(spec)) => {
            let (name, args) = spec.split_first().expect("clap requires a value");
            let fixture = match name.as_str() {
                "noiseless_pair" => Some(fixtures::noiseless_pair()),
                "noiseless_product" => Some(fixtures::noiseless_product()),
                "zero_capacity" => Some(fixtures::zero_capacity()),
                _ => None,
            };
            if let Some(ch) = fixture {
                if !args.is_empty() {
                    return Err(Failure::Usage(format!("fixture `{name}` takes no parameters")));
                }
                return Ok((ch, name.clone()));
            }
            let family = ChannelFamily::parse(name, args, c.seed)?;
            Ok((family.build()?, family.to_string()))
        }
        _ => Err(Failure::Usage("give exactly one of --channel PATH or --family NAME ARGS".into())),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct BudgetInfo {
    seed: u64,
    restarts: usize,
    grid_res: usize,
    grid_cap: usize,
    max_iters: usize,
    aux_card: usize,
}

impl From<&Budget> for BudgetInfo {
    fn from(b: &Budget) -> Self {
        BudgetInfo {
            seed: b.seed,
            restarts: b.restarts,
            grid_res: b.grid_res,
            grid_cap: b.grid_cap,
            max_iters: b.max_iters,
            aux_card: b.aux_card,
        }
    }
}

#[derive(Serialize)]
struct ChannelInfo {
    source: String,
    sizes: [usize; 4],
}

fn channel_info(ch: &Channel, source: String) -> ChannelInfo {
    ChannelInfo { source, sizes: [ch.x1_card(), ch.x2_card(), ch.y1_card(), ch.y2_card()] }
}

#[derive(Serialize)]
struct ConditionOut {
    id: ConditionId,
    verdict: Verdict,
    worst_gap: f64,
    expression: String,
    aux_card: Option<usize>,
    witness: ProbTensor,
    diagnostics: Diagnostics,
}

impl From<&ConditionReport> for ConditionOut {
    fn from(r: &ConditionReport) -> Self {
        ConditionOut {
            id: r.id,
            verdict: r.verdict,
            worst_gap: r.worst_gap,
            expression: r.expression.clone(),
            aux_card: r.aux_card,
            witness: r.witness.clone(),
            diagnostics: r.diagnostics.clone(),
        }
    }
}

#[derive(Serialize)]
struct ProfileOut {
    aux_card: usize,
    conditions: Vec<ConditionOut>,
    alarms: Vec<Alarm>,
}

#[derive(Serialize)]
struct ClassifyReport {
    command: &'static str,
    channel: ChannelInfo,
    budget: BudgetInfo,
    profiles: Vec<ProfileOut>,
}

/// One condition report per auxiliary cardinality, with warm-started
/// sweeps for the auxiliary conditions.
fn classify_over(
    channel: &Channel,
    cards: &[usize],
    budget: &Budget,
) -> dmcic::Result<Vec<Vec<ConditionReport>>> {
    let mut per_card: Vec<Vec<ConditionReport>> = vec![Vec::new(); cards.len()];
    for id in ConditionId::ALL {
        let cond = RegimeCondition::new(id);
        if id.uses_aux() {
            for (slot, r) in per_card.iter_mut().zip(saturation_sweep(channel, &cond, cards, budget)?) {
                slot.push(r);
            }
        } else {
            let r = check_condition(channel, &cond, budget)?;
            for slot in per_card.iter_mut() {
                slot.push(r.clone());
            }
        }
    }
    Ok(per_card)
}

fn cmd_classify(c: &CommonArgs) -> CmdResult {
    if c.format == Some(Format::Csv) {
        return Err(Failure::Usage("classify only produces reports".into()));
    }
    let (channel, source) = load_channel(c)?;
    let cards = aux_cards(c)?;
    let budget = budget(c)?;
    let per_card = classify_over(&channel, &cards, &budget)?;
    let mut alarmed = false;
    let profiles = cards
        .iter()
        .zip(per_card)
        .map(|(&card, reports)| {
            let alarms = implication_alarms(&reports);
            alarmed |= !alarms.is_empty();
            ProfileOut { aux_card: card, conditions: reports.iter().map(ConditionOut::from).collect(), alarms }
        })
        .collect();
    let report = ClassifyReport {
        command: "classify",
        channel: channel_info(&channel, source),
        budget: BudgetInfo::from(&budget),
        profiles,
    };
    Ok((to_json(&report), if alarmed { EXIT_THEOREM } else { EXIT_OK }))
}

#[derive(Serialize)]
struct RegionReport<'a> {
    command: &'static str,
    channel: ChannelInfo,
    budget: BudgetInfo,
    angles: usize,
    region: RegionId,
    area: f64,
    vertices: &'a [[f64; 2]],
    active: ActiveReport,
    support: &'a [dmcic::regions::SupportPoint],
}

fn parse_region(s: &str) -> std::result::Result<RegionId, Failure> {
    s.parse::<RegionId>().map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_region(region: &str, c: &CommonArgs) -> CmdResult {
    let id = parse_region(region)?;
    let (channel, source) = load_channel(c)?;
    if aux_cards(c)?.len() > 1 {
        return Err(Failure::Usage("region takes a single --aux-card".into()));
    }
    let budget = budget(c)?;
    let computed = compute_region(&channel, &id.spec(), c.angles, &budget)?;
    let text = match c.format.unwrap_or(Format::Csv) {
        Format::Csv => computed.to_csv(),
        Format::Report => to_json(&RegionReport {
            command: "region",
            channel: channel_info(&channel, source),
            budget: BudgetInfo::from(&budget),
            angles: c.angles,
            region: id,
            area: computed.region.area(),
            vertices: computed.region.vertices(),
            active: computed.active_constraints(),
            support: &computed.support,
        }),
    };
    Ok((text, EXIT_OK))
}

fn cmd_generate(c: &CommonArgs) -> CmdResult {
    if c.channel.is_some() {
        return Err(Failure::Usage("generate takes --family, not --channel".into()));
    }
    let (channel, _) = load_channel(c)?;
    Ok((channel.to_json(), EXIT_OK))
}

/// One inclusion or equivalence check between computed regions.
#[derive(Debug, Clone, Serialize)]
pub struct RegionCheck {
    pub relation: String,
    pub left: RegionId,
    pub right: RegionId,
    pub equivalence: bool,
    /// Conditions whose verdicts mandate the relation.
    pub mandated_by: Vec<ConditionId>,
    /// Worst subset violation, or Hausdorff distance for equivalences.
    pub margin: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionSummary {
    pub id: RegionId,
    pub area: f64,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSummary {
    pub id: ConditionId,
    pub verdict: Verdict,
    pub worst_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelHierarchy {
    pub source: String,
    pub verdicts: Vec<VerdictSummary>,
    pub alarms: Vec<Alarm>,
    pub checks: Vec<RegionCheck>,
    pub regions: Vec<RegionSummary>,
}

impl ChannelHierarchy {
    pub fn failed(&self) -> bool {
        !self.alarms.is_empty() || self.checks.iter().any(|c| !c.passed)
    }
}

/// Relations mandated by each condition: `(left, right, equivalence)`.
fn mandated(id: ConditionId) -> &'static [(RegionId, RegionId, bool)] {
    use RegionId::*;
    match id {
        ConditionId::Cln => &[(CI, CII, false), (CII, CIII, false), (CIII, CIV, false)],
        ConditionId::SiPrimal | ConditionId::SiEquiv => &[(CII, CIII, false), (CIII, CIV, false)],
        ConditionId::Bcd => &[(CIII, CIIIPrime, true), (CIIIPrime, CIV, false)],
        _ => &[],
    }
}

/// Classifies `channel` and runs every region relation its verdicts
/// mandate. Regions are computed only when some check needs them.
pub fn channel_hierarchy(
    channel: &Channel,
    source: String,
    budget: &Budget,
    angles: usize,
) -> dmcic::Result<ChannelHierarchy> {
    let reports = ConditionId::ALL
        .iter()
        .map(|&id| check_condition(channel, &RegimeCondition::new(id), budget))
        .collect::<dmcic::Result<Vec<_>>>()?;
    let alarms = implication_alarms(&reports);
    let mut wanted: Vec<(RegionId, RegionId, bool, Vec<ConditionId>)> = Vec::new();
    for r in reports.iter().filter(|r| r.verdict == Verdict::Holds) {
        for &(a, b, eq) in mandated(r.id) {
            match wanted.iter_mut().find(|w| w.0 == a && w.1 == b) {
                Some(w) => w.3.push(r.id),
                None => wanted.push((a, b, eq, vec![r.id])),
            }
        }
    }
    let mut computed: BTreeMap<usize, ComputedRegion> = BTreeMap::new();
    let order = |id: RegionId| RegionId::ALL.iter().position(|&r| r == id).expect("known id");
    for (a, b, _, _) in &wanted {
        for id in [*a, *b] {
            if !computed.contains_key(&order(id)) {
                computed.insert(order(id), compute_region(channel, &id.spec(), angles, budget)?);
            }
        }
    }
    let checks = wanted
        .into_iter()
        .map(|(a, b, equivalence, mandated_by)| {
            let (ra, rb) = (&computed[&order(a)].region, &computed[&order(b)].region);
            let margin = if equivalence { hausdorff(ra, rb) } else { region_subset(ra, rb, 0.0).1 };
            RegionCheck {
                relation: format!("{a} {} {b}", if equivalence { "==" } else { "<=" }),
                left: a,
                right: b,
                equivalence,
                mandated_by,
                margin,
                passed: margin <= TOL_REGION,
            }
        })
        .collect();
    let regions = computed
        .values()
        .map(|c| RegionSummary { id: c.id, area: c.region.area(), vertices: c.region.vertices().to_vec() })
        .collect();
    Ok(ChannelHierarchy {
        source,
        verdicts: reports
            .iter()
            .map(|r| VerdictSummary { id: r.id, verdict: r.verdict, worst_gap: r.worst_gap })
            .collect(),
        alarms,
        checks,
        regions,
    })
}

/// Seed of the `index`-th channel of a batch.
pub fn batch_channel_seed(seed: u64, index: usize) -> u64 {
    sub_seed(seed, BATCH_STREAM, index as u64)
}

#[derive(Serialize)]
struct HierarchySummary {
    channels: usize,
    holds: BTreeMap<&'static str, usize>,
    checks: usize,
    failed_checks: usize,
    alarms: usize,
}

#[derive(Serialize)]
struct HierarchyReport {
    command: &'static str,
    budget: BudgetInfo,
    angles: usize,
    summary: HierarchySummary,
    channels: Vec<ChannelHierarchy>,
}

fn cmd_hierarchy(batch: usize, c: &CommonArgs) -> CmdResult {
    let budget = budget(c)?;
    let channels: Vec<(Channel, String)> = if c.channel.is_some() || c.family.is_some() {
        vec![load_channel(c)?]
    } else {
        if batch == 0 {
            return Err(Failure::Usage("batch size must be >= 1".into()));
        }
        let Some(seed) = c.seed else {
            return Err(Failure::Usage("a seeded batch needs --seed".into()));
        };
        (0..batch)
            .map(|i| {
                let family = ChannelFamily::Random { seed: batch_channel_seed(seed, i), sizes: [2, 2, 2, 2] };
                Ok((family.build()?, family.to_string()))
            })
            .collect::<dmcic::Result<Vec<_>>>()?
    };
    let results = channels
        .into_iter()
        .map(|(ch, src)| channel_hierarchy(&ch, src, &budget, c.angles))
        .collect::<dmcic::Result<Vec<_>>>()?;
    let mut holds: BTreeMap<&'static str, usize> = BTreeMap::new();
    for r in &results {
        for v in r.verdicts.iter().filter(|v| v.verdict == Verdict::Holds) {
            *holds.entry(v.id.as_str()).or_default() += 1;
        }
    }
    let summary = HierarchySummary {
        channels: results.len(),
        holds,
        checks: results.iter().map(|r| r.checks.len()).sum(),
        failed_checks: results.iter().map(|r| r.checks.iter().filter(|c| !c.passed).count()).sum(),
        alarms: results.iter().map(|r| r.alarms.len()).sum(),
    };
    let code = if results.iter().any(ChannelHierarchy::failed) { EXIT_THEOREM } else { EXIT_OK };
    let report = HierarchyReport {
        command: "hierarchy",
        budget: BudgetInfo::from(&budget),
        angles: c.angles,
        summary,
        channels: results,
    };
    Ok((to_json(&report), code))
}
