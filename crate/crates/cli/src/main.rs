//! `treasure`: values, tables, certification, LP solving, simulation and
//! sweeps for treasure search games.
//!
//! Exit codes: 0 success (or a tight certificate), 1 internal failure,
//! 2 usage, 3 invalid p-table, 4 certificate not tight or simulation check
//! failed, 5 budget exceeded.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use treasure_core::montecarlo::{compare_to_exact, run_mc, Comparison, McReport, CSV_HEADER};
use treasure_core::rational::{to_f64, Fraction};
use treasure_core::solver::{
    closed_form_value, evaluate_exact, hider_best_response_value, sequence_form_value, Budget, ValueReport,
    DEFAULT_LP_COLUMNS, DEFAULT_NODE_BUDGET,
};
use treasure_core::strategies::{HiderStrategy, PTableSearcher, SearcherStrategy};
use treasure_core::young::{min_valid_n, scaled_table, PTable};
use treasure_core::{Error, GameConfig, Occupancy, Rational, RevealRule};

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TABLE: u8 = 3;
const EXIT_NOT_TIGHT: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "treasure", version, about = "Exact and simulated values of treasure search games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form value with its applicability
    Value {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Scaled continuation table, or the smallest n where it is valid
    Ptable(PtableArgs),
    /// Guarantee of a searcher strategy against every allocation
    Certify {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        searcher: SearcherArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact game value by sequence-form linear programming
    Lp {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write the plan, hider mix and per-allocation values here
        #[arg(long, value_name = "PATH")]
        emit_certificate: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of a searcher against a hider
    Simulate {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        searcher: SearcherArgs,
        /// uniform | all-in-one | file PATH
        #[arg(long, num_args = 1..=2, value_names = ["KIND", "PATH"], default_values = ["uniform"])]
        hider: Vec<String>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare with the exact win probability
        #[arg(long)]
        check_exact: bool,
        #[command(flatten)]
        budget: BudgetArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Value, certification or LP over a range of n, d and k
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct GameArgs {
    #[arg(long, value_enum, default_value_t = Variant::Multi)]
    variant: Variant,
    #[arg(short = 'n')]
    n: usize,
    #[arg(short = 'd')]
    d: usize,
    #[arg(short = 'k')]
    k: usize,
    /// Defaults to adversarial, except lowest-index for simulate
    #[arg(long, value_enum)]
    reveal: Option<Reveal>,
}

#[derive(Args, Clone)]
struct SearcherArgs {
    /// fresh-k | ptable-scaled | ptable-file PATH | mu-mimic
    #[arg(long, num_args = 1..=2, value_names = ["KIND", "PATH"])]
    searcher: Option<Vec<String>>,
    /// Table for `--searcher ptable-file`; implies it when `--searcher` is absent
    #[arg(long, value_name = "PATH")]
    ptable_file: Option<PathBuf>,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    #[arg(long, default_value_t = DEFAULT_LP_COLUMNS)]
    lp_columns: u64,
}

impl BudgetArgs {
    fn budget(self) -> Budget {
        Budget { nodes: self.node_budget, lp_columns: self.lp_columns }
    }
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PtableArgs {
    #[arg(long, value_enum, default_value_t = Variant::Multi)]
    variant: Variant,
    #[arg(short = 'n', required_unless_present = "min_valid_n")]
    n: Option<usize>,
    #[arg(short = 'd')]
    d: usize,
    #[arg(short = 'k')]
    k: usize,
    /// Print the smallest n for which the scaled table is valid
    #[arg(long, conflicts_with = "n")]
    min_valid_n: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Variant::Multi)]
    variant: Variant,
    /// A value or an inclusive range such as 2..4
    #[arg(short = 'n', value_parser = parse_range)]
    n: Span,
    #[arg(short = 'd', value_parser = parse_range)]
    d: Span,
    #[arg(short = 'k', value_parser = parse_range)]
    k: Span,
    #[arg(long, value_enum)]
    reveal: Option<Reveal>,
    #[arg(long, value_enum, default_value_t = SweepMethod::Value)]
    method: SweepMethod,
    #[command(flatten)]
    searcher: SearcherArgs,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Single,
    Multi,
}

impl From<Variant> for Occupancy {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Single => Occupancy::Single,
            Variant::Multi => Occupancy::Multi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Reveal {
    #[value(alias = "lowest")]
    LowestIndex,
    UniformDoors,
    UniformTreasures,
    Adversarial,
}

impl From<Reveal> for RevealRule {
    fn from(r: Reveal) -> Self {
        match r {
            Reveal::LowestIndex => RevealRule::LowestIndex,
            Reveal::UniformDoors => RevealRule::UniformDoors,
            Reveal::UniformTreasures => RevealRule::UniformTreasures,
            Reveal::Adversarial => RevealRule::Adversarial,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMethod {
    Value,
    Certify,
    Lp,
}

impl SweepMethod {
    fn name(self) -> &'static str {
        match self {
            SweepMethod::Value => "value",
            SweepMethod::Certify => "certify",
            SweepMethod::Lp => "lp",
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Span {
    lo: usize,
    hi: usize,
}

fn parse_range(s: &str) -> Result<Span, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a nonnegative integer"));
    match s.split_once("..") {
        Some((a, b)) => Ok(Span { lo: parse(a)?, hi: parse(b.trim_start_matches('='))? }),
        None => {
            let v = parse(s)?;
            Ok(Span { lo: v, hi: v })
        }
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn table(e: Error) -> Self {
        Failure { code: EXIT_TABLE, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MissingDiagram(_)
        | Error::EntryOutOfRange { .. }
        | Error::ExceedsUnit { .. }
        | Error::DoorBudget { .. }
        | Error::InvalidTable(_) => EXIT_TABLE,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Value { game, out } => {
            let config = game.config(RevealRule::Adversarial)?;
            let report = closed_form_value(&config);
            emit_report(&report, &out)?;
            Ok(0)
        }
        Command::Ptable(args) => cmd_ptable(args),
        Command::Certify { game, searcher, budget, out } => {
            let config = game.config(RevealRule::Adversarial)?;
            let strategy = searcher.build(&config)?;
            let report = hider_best_response_value(&config, strategy.as_ref(), &budget.budget())?;
            emit_report(&report, &out)?;
            Ok(if report.tight { 0 } else { EXIT_NOT_TIGHT })
        }
        Command::Lp { game, budget, emit_certificate, out } => {
            let config = game.config(RevealRule::Adversarial)?;
            let mut report = sequence_form_value(&config, &budget.budget())?;
            let certificate = report.certificate.take();
            if let (Some(path), Some(cert)) = (emit_certificate, certificate.as_ref()) {
                let doc = json!({
                    "config": config,
                    "value": Fraction(report.value.clone()),
                    "size": cert.size,
                    "plan": cert.plan,
                    "hider": cert.hider,
                    "allocation_values": report.allocation_values,
                });
                fs::write(&path, serde_json::to_string_pretty(&doc).map_err(Error::from)?)?;
            }
            report.allocation_values = None;
            emit_report(&report, &out)?;
            Ok(0)
        }
        Command::Simulate { game, searcher, hider, trials, seed, check_exact, budget, out } => {
            let config = game.config(RevealRule::LowestIndex)?;
            if config.reveal == RevealRule::Adversarial {
                return Err(Failure::usage("simulate needs a chance reveal rule, not adversarial"));
            }
            let strategy = searcher.build(&config)?;
            let hider = build_hider(&config, &hider)?;
            let report = run_mc(&config, strategy.as_ref(), &hider, trials, seed)?;
            let check = if check_exact {
                let exact = exact_against(&config, strategy.as_ref(), &hider, &budget.budget())?;
                let cmp = compare_to_exact(&report, &exact);
                Some((exact, cmp))
            } else {
                None
            };
            emit_simulation(&report, check.as_ref(), &out)?;
            Ok(match check {
                Some((_, cmp)) if !cmp.pass => EXIT_NOT_TIGHT,
                _ => 0,
            })
        }
        Command::Sweep(args) => cmd_sweep(args),
    }
}

impl GameArgs {
    fn config(&self, default_reveal: RevealRule) -> Result<GameConfig, Failure> {
        let reveal = self.reveal.map_or(default_reveal, RevealRule::from);
        GameConfig::new(self.n, self.d, self.k, self.variant.into(), reveal).map_err(|e| Failure::usage(e.to_string()))
    }
}

impl SearcherArgs {
    fn build(&self, config: &GameConfig) -> Result<Box<dyn SearcherStrategy>, Failure> {
        let default = match (config.occupancy, &self.ptable_file) {
            (_, Some(_)) => "ptable-file",
            (Occupancy::Single, None) => "fresh-k",
            (Occupancy::Multi, None) => "ptable-scaled",
        };
        let words = self.searcher.clone().unwrap_or_else(|| vec![default.to_string()]);
        let kind = words[0].as_str();
        if words.len() > 1 && kind != "ptable-file" {
            return Err(Failure::usage(format!("searcher `{kind}` takes no path")));
        }
        let s: Box<dyn SearcherStrategy> = match kind {
            "fresh-k" => Box::new(PTableSearcher::fresh_k(config).map_err(Failure::table)?),
            "ptable-scaled" => Box::new(PTableSearcher::scaled(config).map_err(Failure::table)?),
            "mu-mimic" => Box::new(PTableSearcher::mu_mimic(config)?),
            "ptable-file" => {
                let path = match (words.get(1), &self.ptable_file) {
                    (Some(p), None) => PathBuf::from(p),
                    (None, Some(p)) => p.clone(),
                    (Some(_), Some(_)) => return Err(Failure::usage("give the table path once")),
                    (None, None) => return Err(Failure::usage("ptable-file needs a path")),
                };
                let table = load_table(&path)?;
                Box::new(PTableSearcher::with_table(config, table).map_err(Failure::table)?.with_label("ptable-file"))
            }
            other => return Err(Failure::usage(format!("unknown searcher `{other}`"))),
        };
        if self.ptable_file.is_some() && kind != "ptable-file" {
            return Err(Failure::usage("--ptable-file only goes with --searcher ptable-file"));
        }
        Ok(s)
    }
}

fn load_table(path: &Path) -> Result<PTable, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    PTable::from_json(&text).map_err(Failure::table)
}

fn build_hider(config: &GameConfig, words: &[String]) -> Result<HiderStrategy, Failure> {
    let kind = words[0].as_str();
    if words.len() > 1 && kind != "file" {
        return Err(Failure::usage(format!("hider `{kind}` takes no path")));
    }
    let hider = match kind {
        "uniform" => HiderStrategy::uniform(config),
        "all-in-one" => HiderStrategy::all_in_one(config),
        "file" => {
            let path = words.get(1).ok_or_else(|| Failure::usage("hider file needs a path"))?;
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{path}: {e}")))?;
            HiderStrategy::from_json(config, &text)
        }
        other => return Err(Failure::usage(format!("unknown hider `{other}`"))),
    };
    hider.map_err(|e| Failure::usage(e.to_string()))
}

/// Exact win probability against a hider distribution under a chance reveal.
fn exact_against(config: &GameConfig, searcher: &dyn SearcherStrategy, hider: &HiderStrategy, budget: &Budget) -> Result<Rational, Failure> {
    let mut total = Rational::default();
    for (a, p) in hider.entries() {
        total += evaluate_exact(config, searcher, a, budget)? * p;
    }
    Ok(total)
}

fn cmd_ptable(args: PtableArgs) -> Result<u8, Failure> {
    if matches!(args.variant, Variant::Single) {
        return Err(Failure::usage("p-tables are defined for the multi variant"));
    }
    if args.d == 0 || args.k == 0 {
        return Err(Failure::usage("d and k must be positive"));
    }
    if args.min_valid_n {
        let n = min_valid_n(args.d, args.k);
        let text = match args.out.format {
            Format::Json => serde_json::to_string_pretty(&json!({ "d": args.d, "k": args.k, "min_valid_n": n })).map_err(Error::from)?,
            Format::Csv => format!("d,k,min_valid_n\n{},{},{}", args.d, args.k, n),
            Format::Text => format!("{n}"),
        };
        write_output(&text, args.out.out.as_deref())?;
        return Ok(0);
    }
    let n = args.n.expect("clap requires n here");
    match scaled_table(n, args.d, args.k) {
        Ok(table) => {
            let text = match args.out.format {
                Format::Json => serde_json::to_string_pretty(&table.to_file()).map_err(Error::from)?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["diagram", "p_num", "p_den"]).map_err(csv_error)?;
                    for (diagram, p) in table.entries() {
                        w.write_record([diagram_text(diagram), p.numer().to_string(), p.denom().to_string()])
                            .map_err(csv_error)?;
                    }
                    csv_string(w)?
                }
                Format::Text => {
                    let mut s = String::new();
                    for (diagram, p) in table.entries() {
                        let _ = writeln!(s, "p{} = {}", diagram_text(diagram), Fraction(p.clone()));
                    }
                    s.trim_end().to_string()
                }
            };
            write_output(&text, args.out.out.as_deref())?;
            Ok(0)
        }
        Err(Error::ExceedsUnit { diagram, value }) => {
            let text = match args.out.format {
                Format::Text => format!("scaled entry p{} = {value} exceeds 1", diagram_text(diagram.parts())),
                _ => serde_json::to_string_pretty(&json!({
                    "error": "exceeds-unit",
                    "diagram": diagram.parts(),
                    "value": value,
                }))
                .map_err(Error::from)?,
            };
            write_output(&text, args.out.out.as_deref())?;
            eprintln!("error: scaled entry for diagram {diagram} is {value} > 1");
            Ok(EXIT_TABLE)
        }
        Err(e) => Err(Failure::table(e)),
    }
}

fn diagram_text(parts: &[u32]) -> String {
    let inner: Vec<String> = parts.iter().map(u32::to_string).collect();
    format!("({})", inner.join(","))
}

const SWEEP_HEADER: [&str; 12] =
    ["n", "d", "k", "variant", "reveal", "method", "value_num", "value_den", "bound_num", "bound_den", "tight", "error"];

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    d: usize,
    k: usize,
    variant: Occupancy,
    reveal: RevealRule,
    method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<Fraction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<Fraction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tight: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let occupancy: Occupancy = args.variant.into();
    let default_reveal = RevealRule::Adversarial;
    let reveal = args.reveal.map_or(default_reveal, RevealRule::from);
    let budget = args.budget.budget();
    let mut rows = Vec::new();
    for n in args.n.lo..=args.n.hi {
        for d in args.d.lo..=args.d.hi {
            for k in args.k.lo..=args.k.hi {
                let mut row = SweepRow {
                    n,
                    d,
                    k,
                    variant: occupancy,
                    reveal,
                    method: args.method.name(),
                    value: None,
                    bound: None,
                    tight: None,
                    error: None,
                };
                let result = GameConfig::new(n, d, k, occupancy, reveal).and_then(|config| match args.method {
                    SweepMethod::Value => Ok(closed_form_value(&config)),
                    SweepMethod::Lp => sequence_form_value(&config, &budget),
                    SweepMethod::Certify => {
                        let s = args.searcher.build(&config).map_err(|f| Error::InvalidConfig(f.message))?;
                        hider_best_response_value(&config, s.as_ref(), &budget)
                    }
                });
                match result {
                    Ok(report) => {
                        row.bound = Some(Fraction(report.upper_bound()));
                        row.value = Some(Fraction(report.value));
                        row.tight = Some(report.tight);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                rows.push(row);
            }
        }
    }
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(Error::from)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SWEEP_HEADER).map_err(csv_error)?;
            for r in &rows {
                let frac = |f: &Option<Fraction>| match f {
                    Some(Fraction(v)) => (v.numer().to_string(), v.denom().to_string()),
                    None => (String::new(), String::new()),
                };
                let (vn, vd) = frac(&r.value);
                let (bn, bd) = frac(&r.bound);
                w.write_record([
                    r.n.to_string(),
                    r.d.to_string(),
                    r.k.to_string(),
                    r.variant.to_string(),
                    r.reveal.to_string(),
                    r.method.to_string(),
                    vn,
                    vd,
                    bn,
                    bd,
                    r.tight.map_or(String::new(), |t| t.to_string()),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_error)?;
            }
            csv_string(w)?
        }
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                let v = r.value.as_ref().map_or_else(|| "-".to_string(), |f| f.to_string());
                let _ = write!(s, "n={} d={} k={}: {v}", r.n, r.d, r.k);
                if let Some(e) = &r.error {
                    let _ = write!(s, " ({e})");
                }
                s.push('\n');
            }
            s.trim_end().to_string()
        }
    };
    write_output(&text, args.out.as_deref())?;
    Ok(0)
}

fn emit_report(report: &ValueReport, out: &OutputArgs) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => serde_json::to_string_pretty(report).map_err(Error::from)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(SWEEP_HEADER).map_err(csv_error)?;
            let c = &report.config;
            let bound = report.upper_bound();
            w.write_record([
                c.n.to_string(),
                c.d.to_string(),
                c.k.to_string(),
                c.occupancy.to_string(),
                c.reveal.to_string(),
                serde_json::to_value(report.method).map_err(Error::from)?.as_str().unwrap_or_default().to_string(),
                report.value.numer().to_string(),
                report.value.denom().to_string(),
                bound.numer().to_string(),
                bound.denom().to_string(),
                report.tight.to_string(),
                String::new(),
            ])
            .map_err(csv_error)?;
            csv_string(w)?
        }
        Format::Text => report_text(report),
    };
    write_output(&text, out.out.as_deref())
}

fn report_text(r: &ValueReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "game:     {}", r.config);
    let _ = writeln!(s, "value:    {} (~{:.6})", Fraction(r.value.clone()), to_f64(&r.value));
    let _ = writeln!(s, "formula:  {}", Fraction(r.lemma_bound.clone()));
    if let Some(cap) = &r.claim_cap {
        let _ = writeln!(s, "cap k/n:  {}", Fraction(cap.clone()));
    }
    let _ = writeln!(s, "tight:    {}", r.tight);
    let _ = writeln!(s, "certified: {}", r.certified);
    if let Some(name) = &r.strategy {
        let _ = writeln!(s, "strategy: {name}");
    }
    if let Some(note) = &r.annotation {
        let _ = writeln!(s, "note:     {note}");
    }
    s.trim_end().to_string()
}

fn emit_simulation(report: &McReport, check: Option<&(Rational, Comparison)>, out: &OutputArgs) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => {
            let mut doc = serde_json::to_value(report).map_err(Error::from)?;
            if let Some((exact, cmp)) = check {
                doc["exact"] = serde_json::to_value(Fraction(exact.clone())).map_err(Error::from)?;
                doc["z_score"] = json!(cmp.z_score);
                doc["pass"] = json!(cmp.pass);
            }
            serde_json::to_string_pretty(&doc).map_err(Error::from)?
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).map_err(csv_error)?;
            w.write_record(report.csv_record()).map_err(csv_error)?;
            csv_string(w)?
        }
        Format::Text => {
            let mut s = format!(
                "{}: {} wins in {} trials, estimate {:.6} +- {:.6} (seed {})",
                report.config, report.wins, report.trials, report.estimate_decimal, report.stderr, report.seed
            );
            if let Some((exact, cmp)) = check {
                let verdict = if cmp.pass { "pass" } else { "FAIL" };
                let _ = write!(s, "\nexact {} (~{:.6}), z = {:.3}, {verdict}", Fraction(exact.clone()), to_f64(exact), cmp.z_score);
            }
            s
        }
    };
    write_output(&text, out.out.as_deref())
}

fn csv_error(e: csv::Error) -> Failure {
    Failure { code: EXIT_INTERNAL, message: e.to_string() }
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w.into_inner().map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() })?;
    let text = String::from_utf8(bytes).map_err(|e| Failure { code: EXIT_INTERNAL, message: e.to_string() })?;
    Ok(text.trim_end().to_string())
}

fn write_output(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}
