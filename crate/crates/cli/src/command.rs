use std::fmt::Write as _;

use apsquares_core::coloring::{find_mono_ap, witness_check};
use apsquares_core::congruence::solve_square_congruence;
use apsquares_core::extremal::{fermat_scan, fermat_upper_bound, find_4ap_in_set, no4ap_max_with_budget, qn_lower_search, DEFAULT_NODE_BUDGET};
use apsquares_core::faltings::{b_count_search, ledger_run};
use apsquares_core::square_count::{erdos_rudin_census, square_positions_fast, square_positions_naive, Ap};
use apsquares_core::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::int_arg::IntArg;

#[derive(Debug, Parser)]
#[command(name = "apsquares", version, about = "Squares in arithmetic progressions: exhaustive checks and counting ledgers")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Append a run record to this JSONL file (default: $APSQUARES_STORE).
    #[arg(long, global = true, value_name = "FILE")]
    pub store: Option<std::path::PathBuf>,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "params", rename_all = "kebab-case")]
pub enum Command {
    /// Search all root pairs a < b <= max-root for four squares in progression.
    FermatScan(FermatScanArgs),
    /// Locate the squares in first + n*step, 0 <= n < length.
    CountSquares(CountSquaresArgs),
    /// Lower bound for the most squares in a length-n progression.
    Qn(QnArgs),
    /// Largest subset of {0..n-1} without a 4-term progression.
    No4ap(No4apArgs),
    /// Print floor((3n+3)/4).
    Bound(BoundArgs),
    /// Count squares of 24i+1 against sqrt(8n/3) for every n <= n-max.
    ErdosRudin(ErdosRudinArgs),
    /// Find a monochromatic progression under the exponent-parity coloring.
    ColorDemo(ColorDemoArgs),
    /// Bounded-height census of six-fold rational square products.
    BCount(BCountArgs),
    /// Replay the interval-partition count on a progression.
    Ledger(LedgerArgs),
    /// Solve x^2 = c (mod m).
    Congruence(CongruenceArgs),
    /// Re-run every record of a store file and compare results.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FermatScanArgs {
    #[arg(long)]
    pub max_root: u64,
    /// Include every 3-term square progression in the JSON result.
    #[arg(long)]
    #[serde(default)]
    pub list: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Naive,
    Fast,
    Both,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountSquaresArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub first: IntArg,
    #[arg(long)]
    pub step: IntArg,
    #[arg(long)]
    pub length: u64,
    #[arg(long, value_enum, default_value = "both")]
    pub engine: EngineChoice,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QnArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 30)]
    pub d_max: u64,
    #[arg(long, default_value_t = 100)]
    pub x_max: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct No4apArgs {
    #[arg(long)]
    pub n: u64,
    /// Node budget for each branch of the search before giving up on optimality.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErdosRudinArgs {
    #[arg(long)]
    pub n_max: u64,
    /// Include one row per n in the JSON result.
    #[arg(long)]
    #[serde(default)]
    pub rows: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorDemoArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub n_max: u64,
    #[arg(long, default_value_t = 4)]
    pub len: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BCountArgs {
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub h: u64,
    /// Drop solutions whose product is zero.
    #[arg(long)]
    #[serde(default)]
    pub exclude_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub a: IntArg,
    #[arg(long)]
    pub d: IntArg,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongruenceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: IntArg,
    #[arg(long)]
    pub m: IntArg,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ReplayArgs {
    pub file: std::path::PathBuf,
}

/// What a library call produced.
#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    pub text: String,
    /// Set when an invariant that should never fail was observed failing.
    pub violation: Option<String>,
}

impl Outcome {
    fn ok(result: Value, text: String) -> Self {
        Outcome { result, text, violation: None }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FermatScan(_) => "fermat-scan",
            Command::CountSquares(_) => "count-squares",
            Command::Qn(_) => "qn",
            Command::No4ap(_) => "no4ap",
            Command::Bound(_) => "bound",
            Command::ErdosRudin(_) => "erdos-rudin",
            Command::ColorDemo(_) => "color-demo",
            Command::BCount(_) => "b-count",
            Command::Ledger(_) => "ledger",
            Command::Congruence(_) => "congruence",
            Command::Replay(_) => "replay",
        }
    }

    /// Runs a recordable command. `Replay` is handled by the driver.
    pub fn execute(&self) -> Result<Outcome, Error> {
        match self {
            Command::FermatScan(args) => fermat(args),
            Command::CountSquares(args) => count_squares(args),
            Command::Qn(args) => {
                let r = qn_lower_search(args.n, args.d_max, args.x_max)?;
                let bound = fermat_upper_bound(args.n);
                let mut text = format!(
                    "Q({}) >= {} (steps <= {}, roots <= {})\nwitness: start {}, step {}, squares at positions {:?}\nupper bound floor((3N+3)/4) = {}\n",
                    args.n, r.best_count, args.d_max, args.x_max, r.witness.start, r.witness.step, r.witness.positions.positions, bound
                );
                let violation = (r.best_count > bound).then(|| format!("lower bound {} exceeds {}", r.best_count, bound));
                if let Some(v) = &violation {
                    let _ = writeln!(text, "VIOLATION: {v}");
                }
                Ok(Outcome { result: json!({ "search": to_value(&r), "fermat_upper_bound": bound }), text, violation })
            }
            Command::No4ap(args) => {
                let r = no4ap_max_with_budget(args.n, args.budget)?;
                let text = format!(
                    "largest 4-AP-free subset of [0, {}): {}{}\nwitness: {:?}\n",
                    args.n,
                    r.max_size,
                    if r.optimal { " (exact)" } else { " (budget exhausted, lower bound)" },
                    r.witness
                );
                Ok(Outcome::ok(to_value(&r), text))
            }
            Command::Bound(args) => {
                let b = fermat_upper_bound(args.n);
                Ok(Outcome::ok(json!({ "n": args.n, "fermat_upper_bound": b }), format!("{b}\n")))
            }
            Command::ErdosRudin(args) => {
                let c = erdos_rudin_census(args.n_max, args.rows)?;
                let mut text = format!(
                    "24i+1, n <= {}: max |count - sqrt(8n/3)| = {:.9} at n = {}\nexact within-one violations: {}\n",
                    c.n_max,
                    c.max_abs_deviation,
                    c.max_abs_deviation_at,
                    c.violations.len()
                );
                if let Some(first) = c.violations.first() {
                    let _ = writeln!(text, "first violation at n = {first}");
                }
                Ok(Outcome::ok(to_value(&c), text))
            }
            Command::ColorDemo(args) => color_demo(args),
            Command::BCount(args) => {
                let r = b_count_search(args.m, args.h, !args.exclude_zero)?;
                let zero = r.solutions.iter().filter(|s| s.product_zero).count();
                let text = format!(
                    "B-hat(M={}, H={}) = {} ({} with zero product{})\n",
                    r.m,
                    r.height,
                    r.count,
                    zero,
                    if r.include_zero { "" } else { ", excluded" }
                );
                Ok(Outcome::ok(to_value(&r), text))
            }
            Command::Ledger(args) => {
                let r = ledger_run(&args.a.0, &args.d.0, args.n, args.m, args.delta)?;
                let mut text = format!(
                    "progression {} + {} n, n < {}; M = {}, k = {}\nsquares: {}  interval sizes: {:?}\nheavy intervals: {:?}  generated solutions: {} (distinct {})\n",
                    r.ap.first, r.ap.step, r.ap.length, r.m, r.k, r.square_count, r.interval_sizes, r.heavy_intervals, r.generated.len(), r.distinct_solutions
                );
                for v in &r.verdicts {
                    let _ = writeln!(text, "  [{}] {}: {} vs {}", if v.holds { "ok" } else { "FAIL" }, v.name, v.lhs, v.rhs);
                }
                let _ = writeln!(text, "N >= M(B+5): {}", r.large_n_premise);
                if let Some(c) = r.delta_conclusion {
                    let _ = writeln!(text, "delta conclusion (count < delta N via the chain): {c}");
                }
                Ok(Outcome::ok(to_value(&r), text))
            }
            Command::Congruence(args) => {
                let r = solve_square_congruence(&args.c.0, &args.m.0)?;
                let roots: Vec<String> = r.roots.iter().map(|x| x.to_string()).collect();
                let text = format!("x^2 = {} (mod {}): {} roots\n{}\n", args.c, args.m, roots.len(), roots.join(" "));
                Ok(Outcome::ok(to_value(&r), text))
            }
            Command::Replay(_) => unreachable!("replay is driven by the caller"),
        }
    }
}

const SAMPLE: usize = 10;

fn fermat(args: &FermatScanArgs) -> Result<Outcome, Error> {
    let r = fermat_scan(args.max_root)?;
    let mut text = format!(
        "roots <= {}: {} pairs checked\n3-term square progressions: {}\n",
        r.bound, r.pairs_checked, r.three_ap_census
    );
    for t in r.three_aps.iter().take(SAMPLE) {
        let [a, b, c] = t.roots;
        let _ = writeln!(text, "  {}, {}, {} (difference {})", a * a, b * b, c * c, t.difference);
    }
    let violation = r.four_ap_found.map(|f| format!("four squares in progression: roots {:?}", f.roots));
    let _ = writeln!(text, "4-term square progression: {}", violation.as_deref().unwrap_or("none"));
    let mut result = json!({
        "bound": r.bound,
        "pairs_checked": r.pairs_checked,
        "four_ap_found": r.four_ap_found,
        "three_ap_census": r.three_ap_census,
    });
    let listed: &[_] = if args.list { &r.three_aps } else { &r.three_aps[..r.three_aps.len().min(SAMPLE)] };
    result[if args.list { "three_aps" } else { "three_aps_sample" }] = to_value(&listed);
    Ok(Outcome { result, text, violation })
}

fn count_squares(args: &CountSquaresArgs) -> Result<Outcome, Error> {
    let ap = Ap::new(args.first.0.clone(), args.step.0.clone(), args.length)?;
    let (positions, mismatch) = match args.engine {
        EngineChoice::Naive => (square_positions_naive(&ap), false),
        EngineChoice::Fast => (square_positions_fast(&ap), false),
        EngineChoice::Both => {
            let fast = square_positions_fast(&ap);
            let naive = square_positions_naive(&ap);
            let mismatch = fast != naive;
            (naive, mismatch)
        }
    };
    let four = find_4ap_in_set(&positions.positions);
    let mut text = format!(
        "{} + {} n, n < {}: {} squares\npositions: {:?}\n",
        ap.first,
        ap.step,
        ap.length,
        positions.count(),
        positions.positions
    );
    let violation = if mismatch {
        Some("fast and naive engines disagree".to_string())
    } else {
        four.map(|f| format!("square positions {f:?} form a 4-term progression"))
    };
    if let Some(v) = &violation {
        let _ = writeln!(text, "VIOLATION: {v}");
    }
    let result = json!({
        "engine": args.engine,
        "ap": ap,
        "count": positions.count(),
        "positions": positions.positions,
        "four_ap_in_positions": four,
    });
    Ok(Outcome { result, text, violation })
}

fn color_demo(args: &ColorDemoArgs) -> Result<Outcome, Error> {
    let found = find_mono_ap(args.n_max, args.len, args.k)?;
    let Some(m) = found else {
        let text = format!("no monochromatic {}-term progression in [1, {}] with k = {}\n", args.len, args.n_max, args.k);
        return Ok(Outcome::ok(json!({ "mono_ap": null, "witness": null }), text));
    };
    let w = witness_check(&m, args.k)?;
    let mut text = format!(
        "monochromatic progression: first {}, step {}, length {}, color {}\nkernel R = {}: divides first {}, divides step {}\n",
        m.first, m.step, m.length, m.color, w.kernel, w.divides_first, w.divides_step
    );
    for t in &w.per_term {
        let _ = writeln!(text, "  {}: smooth {}, even after R {}", t.term, t.smooth, t.parity_even_after_kernel);
    }
    let violation = (w.all_terms_smooth && m.length >= 4)
        .then(|| "all terms smooth: the quotients by R would be four squares in progression".to_string());
    Ok(Outcome { result: json!({ "mono_ap": m, "witness": w }), text, violation })
}
