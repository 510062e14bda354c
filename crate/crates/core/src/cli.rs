//! Command-line front end. Every command prints one JSON document on stdout.
//!
//! Exit codes: 0 success or pass, 1 verification failure, 2 usage error,
//! 3 domain error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::context::CandidateSet;
use crate::dominance::{dnt, intersection_probe, uded_with, FiniteMechanism, UdedMode};
use crate::error::{domain, Error, Result};
use crate::mechanisms::{
    check_d_dm, check_delta_good, check_monotone, second_price, AllocationRule, CheckOutcome, Mechanism, SecondPriceResult,
    TieRule,
};
use crate::rational::Rational;
use crate::welfare::{
    admissible_intervals, bracket_check, direct_mechanism, sweep_rows, theorem1_audit, theorem1_construction,
    theorem35_construction, verify_positive_theorem, write_csv, write_svg, DirectKind, PositiveTheorem,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

const DEFAULT_BUDGET: u128 = 1 << 40;

#[derive(Parser, Debug)]
#[command(name = "knightian", version, about = "Auctions for players with interval knowledge of their own value")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Allocation probabilities at a bid profile.
    Alloc(AllocArgs),
    /// Expected or per-win price of a player at a bid profile.
    Price(PriceArgs),
    /// Undominated strategies of a player with candidate set K.
    Uded(UdedArgs),
    /// Very-weakly-dominant pure strategies of a player with candidate set K.
    Dnt(TableArgs),
    /// Smallest allocation gap between mixtures over UDed(K) and UDed(K').
    Probe(ProbeArgs),
    /// Adversarial context behind an upper bound.
    Construct(ConstructArgs),
    /// Run one verification suite.
    Verify(VerifyArgs),
    /// Tabulate the bound curves to CSV and optionally SVG.
    Sweep(SweepArgs),
    /// Audit a direct mechanism that asks for interval reports.
    Audit(AuditArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MechKind {
    Opt,
    #[value(name = "2p")]
    SecondPrice,
    Random,
}

#[derive(Args, Debug, Clone)]
struct MechArgs {
    #[arg(long, value_enum, default_value = "opt")]
    mech: MechKind,
    /// Inaccuracy bound, as p/q or a decimal.
    #[arg(long)]
    delta: Option<Rational>,
    /// Tie rule for second price: lex or random.
    #[arg(long, default_value = "lex")]
    tie: TieRule,
}

impl MechArgs {
    fn build(&self) -> Result<Mechanism> {
        match self.mech {
            MechKind::Opt => Mechanism::optimal(self.require_delta()?),
            MechKind::SecondPrice => Ok(Mechanism::SecondPrice(self.tie)),
            MechKind::Random => Ok(Mechanism::RandomAssignment),
        }
    }

    fn require_delta(&self) -> Result<Rational> {
        self.delta.clone().ok_or_else(|| domain("--delta is required"))
    }
}

#[derive(Args, Debug)]
struct AllocArgs {
    #[command(flatten)]
    mech: MechArgs,
    /// Comma-separated bids.
    #[arg(long, value_delimiter = ',')]
    bids: Vec<Rational>,
    /// Number of players, when no bids are given.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PriceKindArg {
    Expected,
    Conditional,
}

#[derive(Args, Debug)]
struct PriceArgs {
    #[command(flatten)]
    mech: MechArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    bids: Vec<Rational>,
    /// One-based player; every player's expected price when omitted.
    #[arg(long)]
    player: Option<usize>,
    #[arg(long, value_enum, default_value = "expected")]
    kind: PriceKindArg,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    mech: MechArgs,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "B", alias = "bound", default_value_t = 10)]
    bound: i64,
    /// One-based player.
    #[arg(long, default_value_t = 1)]
    player: usize,
    /// Candidate set, as lo..hi or a comma list.
    #[arg(long = "K", value_parser = parse_set)]
    k: CandidateSet,
    /// Mechanism table in JSON, used instead of --mech.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

impl TableArgs {
    fn mechanism(&self) -> Result<FiniteMechanism> {
        match &self.table {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| domain(format!("{}: {e}", path.display())))?;
                FiniteMechanism::from_json(&text)
            }
            None => FiniteMechanism::tabulate(&self.mech.build()?, self.n, self.bound, self.budget),
        }
    }

    fn player(&self, m: &FiniteMechanism) -> Result<usize> {
        if self.player == 0 || self.player > m.players() {
            return Err(domain(format!("player {} out of range 1..={}", self.player, m.players())));
        }
        Ok(self.player - 1)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Full,
    Box,
}

#[derive(Args, Debug)]
struct UdedArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Distinguishability distance used by --mode box.
    #[arg(long, default_value_t = 1)]
    d: i64,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[command(flatten)]
    table: TableArgs,
    #[arg(long = "K2", value_parser = parse_set)]
    k2: CandidateSet,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// 1 for the truthful-mechanism bound, 3 or 5 for the second-price and optimal ones.
    #[arg(long)]
    theorem: u8,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "B", alias = "bound")]
    bound: i64,
    #[arg(long)]
    delta: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Allocation,
    Monotone,
    Dm,
    Good,
    Dominance,
    Theorem2,
    Theorem4,
    Bracket,
    Probe,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[command(flatten)]
    mech: MechArgs,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "B", alias = "bound", default_value_t = 8)]
    bound: i64,
    #[arg(long, default_value_t = 1)]
    d: i64,
    /// Grid step for the monotonicity scan; must divide B.
    #[arg(long, default_value = "1/2")]
    step: Rational,
    #[arg(long, default_value_t = 1)]
    player: usize,
    #[arg(long = "K", value_parser = parse_set)]
    k: Option<CandidateSet>,
    #[arg(long = "K2", value_parser = parse_set)]
    k2: Option<CandidateSet>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Comma-separated player counts.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    n: Vec<usize>,
    /// Comma-separated δ values.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid")]
    delta: Vec<Rational>,
    /// Inclusive grid lo:hi:step.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectArg {
    Uniform,
    Midpoint,
}

#[derive(Args, Debug)]
struct AuditArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    direct: DirectArg,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long = "B", alias = "bound", default_value_t = 10)]
    bound: i64,
    #[arg(long)]
    delta: Rational,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

fn parse_set(s: &str) -> std::result::Result<CandidateSet, String> {
    let t = s.trim().trim_start_matches('{').trim_end_matches('}');
    let int = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
    let set = if let Some((lo, hi)) = t.split_once("..") {
        CandidateSet::interval(int(lo)?, int(hi)?)
    } else {
        CandidateSet::new(t.split(',').map(int).collect::<std::result::Result<_, _>>()?)
    };
    set.map_err(|e| e.to_string())
}

fn parse_grid(spec: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(domain(format!("grid {spec:?} is not lo:hi:step")));
    };
    let (lo, hi, step): (Rational, Rational, Rational) = (lo.parse()?, hi.parse()?, step.parse()?);
    if !step.is_positive() {
        return Err(domain("grid step must be positive"));
    }
    let mut out = Vec::new();
    let mut x = lo;
    while x <= hi {
        out.push(x.clone());
        x += &step;
    }
    Ok(out)
}

/// Outcome of a command: a JSON document plus whether it counts as a pass.
struct Report {
    body: Value,
    pass: bool,
}

impl Report {
    fn ok(body: Value) -> Self {
        Report { body, pass: true }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn check_report(suite: &str, outcome: CheckOutcome) -> Report {
    let pass = outcome.is_pass();
    let mut body = json!({ "suite": suite, "pass": pass });
    if let Some(w) = outcome.witness() {
        body["witness"] = to_value(w);
        body["message"] = Value::String(w.to_string());
    }
    Report { body, pass }
}

fn cmd_alloc(a: &AllocArgs) -> Result<Report> {
    let mech = a.mech.build()?;
    let bids = if a.bids.is_empty() {
        let n = a.n.ok_or_else(|| domain("give --bids or --n"))?;
        vec![Rational::zero(); n]
    } else {
        a.bids.clone()
    };
    if bids.iter().any(Rational::is_negative) {
        return Err(domain("bids must be nonnegative"));
    }
    let mut body = to_value(&mech.allocate(&bids));
    if let Mechanism::SecondPrice(TieRule::Lexicographic) = mech {
        if let SecondPriceResult::Deterministic(o) = second_price(&bids, TieRule::Lexicographic) {
            body["winner"] = json!(o.winner.map(|w| w + 1));
        }
    }
    Ok(Report::ok(body))
}

fn cmd_price(a: &PriceArgs) -> Result<Report> {
    let mech = a.mech.build()?;
    let v = &a.bids;
    let show = |p: crate::PriceExpression| json!({ "price": to_value(&p), "display": p.to_string(), "approx": p.to_f64() });
    let body = match a.player {
        None => {
            let prices = mech.expected_prices(v)?;
            json!({ "kind": "expected", "prices": prices.into_iter().map(show).collect::<Vec<_>>() })
        }
        Some(p) => {
            if p == 0 || p > v.len() {
                return Err(domain(format!("player {p} out of range 1..={}", v.len())));
            }
            let (kind, price) = match a.kind {
                PriceKindArg::Expected => ("expected", mech.expected_price(p - 1, v)?),
                PriceKindArg::Conditional => ("conditional", mech.conditional_price(p - 1, v)?),
            };
            let mut b = show(price);
            b["player"] = json!(p);
            b["kind"] = json!(kind);
            b
        }
    };
    Ok(Report::ok(body))
}

fn cmd_uded(a: &UdedArgs) -> Result<Report> {
    let m = a.table.mechanism()?;
    let i = a.table.player(&m)?;
    let mode = match a.mode {
        ModeArg::Full => UdedMode::Full,
        ModeArg::Box => UdedMode::DmBox(a.d),
    };
    let rep = uded_with(&m, i, &a.table.k, mode)?;
    Ok(Report::ok(json!({
        "mechanism": m.id(),
        "player": a.table.player,
        "K": a.table.k.to_string(),
        "uded": rep.strategies,
        "undecided": rep.undecided,
    })))
}

fn cmd_dnt(a: &TableArgs) -> Result<Report> {
    let m = a.mechanism()?;
    let i = a.player(&m)?;
    Ok(Report::ok(json!({
        "mechanism": m.id(),
        "player": a.player,
        "K": a.k.to_string(),
        "dnt": dnt(&m, i, &a.k)?,
    })))
}

fn cmd_probe(a: &ProbeArgs) -> Result<Report> {
    let m = a.table.mechanism()?;
    let i = a.table.player(&m)?;
    let rep = intersection_probe(&m, i, &a.table.k, &a.k2)?;
    Ok(Report::ok(to_value(&rep)))
}

fn cmd_construct(a: &ConstructArgs) -> Result<Report> {
    let body = match a.theorem {
        1 => to_value(&theorem1_construction(a.n, a.bound, &a.delta)?),
        3 | 5 => to_value(&theorem35_construction(a.n, a.bound, &a.delta)?),
        t => return Err(domain(format!("no construction for theorem {t}; use 1, 3 or 5"))),
    };
    Ok(Report::ok(body))
}

fn cmd_verify(a: &VerifyArgs) -> Result<Report> {
    let name = a.suite.to_possible_value().expect("named").get_name().to_string();
    let name = name.as_str();
    let report = match a.suite {
        Suite::Allocation => {
            let mech = a.mech.build()?;
            verify_allocation(&mech, a.n, a.bound)?
        }
        Suite::Monotone => check_report(name, check_monotone(&a.mech.build()?, a.n, a.bound, &a.step)?),
        Suite::Dm => check_report(name, check_d_dm(&a.mech.build()?, a.d, a.n, a.bound)?),
        Suite::Good => check_report(name, check_delta_good(&a.mech.build()?, &a.mech.require_delta()?, a.n, a.bound)?),
        Suite::Dominance => verify_dm_inclusion(a)?,
        Suite::Theorem2 => {
            let th = match a.mech.tie {
                TieRule::Lexicographic => PositiveTheorem::SecondPriceLex,
                TieRule::UniformRandom => PositiveTheorem::SecondPriceRandom,
            };
            let rep = verify_positive_theorem(th, a.n, a.bound, &a.mech.require_delta()?, a.budget)?;
            Report { pass: rep.pass, body: to_value(&rep) }
        }
        Suite::Theorem4 => {
            let rep = verify_positive_theorem(PositiveTheorem::Optimal, a.n, a.bound, &a.mech.require_delta()?, a.budget)?;
            Report { pass: rep.pass, body: to_value(&rep) }
        }
        Suite::Bracket => {
            let rep = bracket_check(a.n, a.bound, &a.mech.require_delta()?, a.budget)?;
            Report { pass: rep.pass, body: to_value(&rep) }
        }
        Suite::Probe => {
            let (k, k2) = match (&a.k, &a.k2) {
                (Some(k), Some(k2)) => (k, k2),
                _ => return Err(domain("probe needs --K and --K2")),
            };
            let m = FiniteMechanism::tabulate(&a.mech.build()?, a.n, a.bound, a.budget)?;
            if a.player == 0 || a.player > a.n {
                return Err(domain(format!("player {} out of range 1..={}", a.player, a.n)));
            }
            let rep = intersection_probe(&m, a.player - 1, k, k2)?;
            Report { pass: rep.epsilon.is_zero(), body: to_value(&rep) }
        }
    };
    let mut body = report.body;
    body["suite"] = json!(name);
    body["pass"] = json!(report.pass);
    Ok(Report { body, pass: report.pass })
}

/// Every integer bid profile gets probabilities in `[0, 1]` summing to at most 1.
fn verify_allocation(mech: &Mechanism, n: usize, bound: i64) -> Result<Report> {
    if n == 0 || bound < 0 {
        return Err(domain("need n ≥ 1 and B ≥ 0"));
    }
    let mut v = vec![0i64; n];
    loop {
        let f = mech.allocate(&crate::mechanisms::bids(&v));
        let ok = f.probs().iter().all(|p| !p.is_negative() && p <= &Rational::one()) && f.total() <= Rational::one();
        if !ok {
            return Ok(Report {
                body: json!({ "witness": { "bids": v, "probs": to_value(&f) } }),
                pass: false,
            });
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(Report::ok(json!({})));
            }
            pos -= 1;
            v[pos] += 1;
            if v[pos] <= bound {
                break;
            }
            v[pos] = 0;
        }
    }
}

/// UDed lies within `{min K − (d−1), …, max K + (d−1)}` for every admissible interval.
fn verify_dm_inclusion(a: &VerifyArgs) -> Result<Report> {
    let delta = a.mech.require_delta()?;
    let m = FiniteMechanism::tabulate(&a.mech.build()?, a.n, a.bound, a.budget)?;
    let mut checked = 0usize;
    for k in &admissible_intervals(a.bound, &delta)? {
        for i in 0..a.n {
            let rep = uded_with(&m, i, k, UdedMode::Full)?;
            checked += 1;
            let (lo, hi) = (k.min() - (a.d - 1), k.max() + (a.d - 1));
            if let Some(&s) = rep.strategies.iter().find(|&&s| (s as i64) < lo || (s as i64) > hi) {
                return Ok(Report {
                    body: json!({ "checked": checked, "witness": { "player": i + 1, "K": k.to_string(), "strategy": s, "uded": rep.strategies } }),
                    pass: false,
                });
            }
        }
    }
    Ok(Report::ok(json!({ "checked": checked })))
}

fn cmd_sweep(a: &SweepArgs) -> Result<Report> {
    let deltas = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => a.delta.clone(),
    };
    let rows = sweep_rows(&a.n, &deltas)?;
    let create = |p: &PathBuf| File::create(p).map(BufWriter::new).map_err(|e| domain(format!("{}: {e}", p.display())));
    write_csv(&rows, create(&a.out)?)?;
    if let Some(svg) = &a.svg {
        write_svg(&rows, create(svg)?)?;
    }
    Ok(Report::ok(json!({
        "rows": rows.len(),
        "csv": a.out.display().to_string(),
        "svg": a.svg.as_ref().map(|p| p.display().to_string()),
    })))
}

fn cmd_audit(a: &AuditArgs) -> Result<Report> {
    let kind = match a.direct {
        DirectArg::Uniform => DirectKind::NaiveUniform,
        DirectArg::Midpoint => DirectKind::MidpointSecondPrice,
    };
    let direct = direct_mechanism(kind, a.n, a.bound, &a.delta, a.budget)?;
    match theorem1_audit(&direct) {
        Ok(rep) => Ok(Report { pass: rep.passes, body: to_value(&rep) }),
        Err(Error::NotTruthful(w)) => Ok(Report {
            body: json!({ "truthful": false, "passes": false, "witness": w }),
            pass: false,
        }),
        Err(e) => Err(e),
    }
}

fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Alloc(a) => cmd_alloc(a),
        Command::Price(a) => cmd_price(a),
        Command::Uded(a) => cmd_uded(a),
        Command::Dnt(a) => cmd_dnt(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Audit(a) => cmd_audit(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(rep) => {
            let _ = writeln!(out, "{}", rep.body);
            if rep.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let code = if matches!(e, Error::Parse { .. }) { EXIT_USAGE } else { EXIT_DOMAIN };
            let _ = writeln!(err, "{}", json!({ "error": e.to_string() }));
            code
        }
    }
}
