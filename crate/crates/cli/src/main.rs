//! `tpinv` — infer minimal DNF invariants and abstract automata.
//!
//! Exit codes: 0 success, 1 no solution / check failed, 2 inconclusive,
//! 3 usage or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use tpinv::automaton::{self, EdgeCoverMode};
use tpinv::engine::{self, Descent, EngineError, EngineOptions, GrowOptions, InferenceOutcome, Subsumption};
use tpinv::frontend::{parse_source, state_predicates, HarvestOptions, SourceKind, TransitionSystem};
use tpinv::harness::{self, HoareVerdict};
use tpinv::par::Parallelism;
use tpinv::report::{self, Outcome, ReportDocument};
use tpinv::solver::{Logic, SolverConfig, SOLVER_ENV, TIMEOUT_ENV};
use tpinv::template::{DnfInvariant, PredicateSet};

const OK: u8 = 0;
const FAILED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "tpinv", version, about = "Minimal disjunctive inductive invariants and abstract automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer an inductive invariant.
    Infer(Common),
    /// Infer an invariant (or load one) and build the abstract automaton.
    Abstract(Common),
    /// Check an invariant with three independent entailments.
    Check(Common),
    /// Run the system on random inputs.
    Simulate(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsumptionArg {
    Off,
    Blocking,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum DescentArg {
    Prop,
    Semantic,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogicArg {
    Lia,
    Lra,
    Lira,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Dot,
    Json,
    Text,
}

impl Emit {
    fn extension(self) -> &'static str {
        match self {
            Emit::Dot => "dot",
            Emit::Json => "json",
            Emit::Text => "txt",
        }
    }
}

#[derive(Clone, Copy)]
struct Cover(EdgeCoverMode);

impl FromStr for Cover {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "conj" => Ok(Cover(EdgeCoverMode::Conjunction)),
            _ => match s.strip_prefix("dnf:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(Cover(EdgeCoverMode::Dnf(k))),
                _ => Err(format!("expected `conj` or `dnf:K` with K >= 1, got `{s}`")),
            },
        }
    }
}

#[derive(Args)]
struct Common {
    /// Transition system (`.ts`) or dataflow node (`.node`, `.lus`).
    file: PathBuf,
    /// Number of disjuncts.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// After minimizing, try up to this many disjuncts for smaller invariants.
    #[arg(long, value_name = "MAXN")]
    grow: Option<usize>,
    /// Descend to an inclusion-minimal invariant.
    #[arg(long)]
    minimize: bool,
    /// Require pairwise disjoint disjuncts.
    #[arg(long)]
    disjoint: bool,
    #[arg(long, value_enum, default_value = "on")]
    symmetry: OnOff,
    #[arg(long, value_enum, default_value = "blocking")]
    subsumption: SubsumptionArg,
    #[arg(long, value_enum, default_value = "prop")]
    descent: DescentArg,
    /// Edge guard cover: `conj` or `dnf:K`.
    #[arg(long, default_value = "conj")]
    edge_cover: Cover,
    /// External SMT-LIB2 solver command line.
    #[arg(long, value_name = "CMD", env = SOLVER_ENV)]
    solver: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    logic: LogicArg,
    /// Per-query solver timeout in seconds (also bounds growth).
    #[arg(long, value_name = "SECS", env = TIMEOUT_ENV)]
    timeout: Option<u64>,
    /// Give up (inconclusive) after this many candidates.
    #[arg(long, value_name = "K")]
    max_iters: Option<u64>,
    /// Seed for the solver and the simulator.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Output formats.
    #[arg(long, value_enum, value_delimiter = ',')]
    emit: Vec<Emit>,
    /// Output file; with several formats, one file per format extension.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Use harvested atoms as they are, without comparison-family closure.
    #[arg(long)]
    no_closure: bool,
    /// Invariant taken from an earlier JSON report instead of inferring one.
    #[arg(long, value_name = "REPORT")]
    invariant: Option<PathBuf>,
    /// Invariant given as a formula over the state (`check`, `simulate`).
    #[arg(long, value_name = "TEXT", conflicts_with = "invariant")]
    formula: Option<String>,
    /// Simulation length.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
}

impl Common {
    fn engine_options(&self) -> EngineOptions {
        EngineOptions {
            n: self.n,
            minimize: self.minimize || self.grow.is_some(),
            grow: self.grow.map(|max_n| GrowOptions {
                max_n,
                timeout: self.timeout.map(Duration::from_secs),
            }),
            symmetry: matches!(self.symmetry, OnOff::On),
            subsumption: match self.subsumption {
                SubsumptionArg::Off => Subsumption::Off,
                SubsumptionArg::Blocking => Subsumption::BlockingClauses,
                SubsumptionArg::Full => Subsumption::Full,
            },
            disjoint: self.disjoint,
            descent: match self.descent {
                DescentArg::Prop => Descent::Propositional,
                DescentArg::Semantic => Descent::SemanticWitness,
            },
            max_iterations: self.max_iters,
            seed: self.seed,
            ..EngineOptions::default()
        }
    }

    fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(cmd) = self.solver.as_deref().filter(|c| !c.trim().is_empty()) {
            cfg.command = cmd.split_whitespace().map(String::from).collect();
        }
        cfg.logic = match self.logic {
            LogicArg::Lia => Logic::Lia,
            LogicArg::Lra => Logic::Lra,
            LogicArg::Lira => Logic::Lira,
            LogicArg::Auto => Logic::Auto,
        };
        cfg.timeout = self.timeout;
        cfg.seed = self.seed;
        cfg
    }

    fn emits(&self, default: &[Emit]) -> Vec<Emit> {
        if self.emit.is_empty() {
            default.to_vec()
        } else {
            let mut e = self.emit.clone();
            e.dedup();
            e
        }
    }
}

/// A failure that maps to the usage/IO exit code.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

struct Loaded {
    ts: TransitionSystem,
    preds: PredicateSet,
}

fn load(c: &Common) -> Result<Loaded> {
    let text = std::fs::read_to_string(&c.file).with_context(|| format!("cannot read {}", c.file.display()))?;
    let src = parse_source(&text, SourceKind::from_path(&c.file))
        .map_err(|e| anyhow!("{}: {e}", c.file.display()))?;
    let preds = state_predicates(
        &src.ts,
        HarvestOptions {
            family_closure: !c.no_closure,
        },
    );
    info!("{}: {} state predicates", src.ts.name, preds.len());
    Ok(Loaded { ts: src.ts, preds })
}

fn load_invariant(path: &Path, m: usize) -> Result<DnfInvariant> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc = report::parse_json(&text).with_context(|| format!("{} is not a report", path.display()))?;
    let inv = doc
        .dnf_invariant()
        .ok_or_else(|| anyhow!("{} carries no invariant", path.display()))?;
    if doc.predicates.len() != m {
        bail!(
            "{} was made with {} predicates, this system has {m}",
            path.display(),
            doc.predicates.len()
        );
    }
    Ok(inv)
}

fn engine_failure(e: EngineError) -> Usage {
    Usage(anyhow!(e))
}

fn write_outputs(c: &Common, outputs: &[(Emit, String)]) -> Result<()> {
    match &c.out {
        None => {
            for (_, s) in outputs {
                print!("{s}");
            }
        }
        Some(p) if outputs.len() == 1 => {
            std::fs::write(p, &outputs[0].1).with_context(|| format!("cannot write {}", p.display()))?
        }
        Some(p) => {
            for (e, s) in outputs {
                let q = p.with_extension(e.extension());
                std::fs::write(&q, s).with_context(|| format!("cannot write {}", q.display()))?;
            }
        }
    }
    Ok(())
}

fn render(doc: &ReportDocument, aut: Option<&automaton::AbstractAutomaton>, emits: &[Emit]) -> Vec<(Emit, String)> {
    let mut out = vec![];
    for &e in emits {
        match e {
            Emit::Json => out.push((e, report::emit_json(doc))),
            Emit::Text => out.push((e, report::emit_text(doc))),
            Emit::Dot => match aut {
                Some(a) => out.push((e, report::emit_dot(a))),
                None => warn!("no automaton to render as DOT"),
            },
        }
    }
    out
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Invariant | Outcome::Verified => OK,
        Outcome::NoSolution | Outcome::Refuted => FAILED,
        Outcome::Inconclusive => INCONCLUSIVE,
    }
}

fn infer_cmd(c: &Common) -> Result<u8, Usage> {
    let l = load(c)?;
    let (opts, cfg) = (c.engine_options(), c.solver_config());
    let inf = engine::run(&l.ts, &l.preds, &opts, &cfg).map_err(engine_failure)?;
    let doc = ReportDocument::new("infer", &l.ts, &l.preds, &opts, &cfg).with_inference(&inf, &l.preds);
    write_outputs(c, &render(&doc, None, &c.emits(&[Emit::Text])))?;
    Ok(outcome_code(doc.outcome))
}

fn abstract_cmd(c: &Common) -> Result<u8, Usage> {
    let l = load(c)?;
    let (opts, cfg) = (c.engine_options(), c.solver_config());
    let mut doc = ReportDocument::new("abstract", &l.ts, &l.preds, &opts, &cfg);
    let inv = match &c.invariant {
        Some(p) => {
            let inv = load_invariant(p, l.preds.len())?;
            let verdict = harness::check_invariant(&l.ts, &l.preds, &inv, &cfg)?;
            if !verdict.is_verified() {
                doc = doc.with_invariant(&inv, &l.preds).with_hoare(&verdict);
                write_outputs(c, &render(&doc, None, &c.emits(&[Emit::Text])))?;
                return Ok(outcome_code(doc.outcome));
            }
            doc.outcome = Outcome::Invariant;
            doc = doc.with_invariant(&inv, &l.preds);
            inv
        }
        None => {
            let inf = engine::run(&l.ts, &l.preds, &opts, &cfg).map_err(engine_failure)?;
            doc = doc.with_inference(&inf, &l.preds);
            match inf.outcome {
                InferenceOutcome::Invariant(inv) => inv,
                _ => {
                    write_outputs(c, &render(&doc, None, &c.emits(&[Emit::Text])))?;
                    return Ok(outcome_code(doc.outcome));
                }
            }
        }
    };
    let aut = automaton::build(&l.ts, &l.preds, &inv, c.edge_cover.0, &cfg, Parallelism::Auto)
        .map_err(engine_failure)?;
    doc = doc.with_automaton(&aut, c.edge_cover.0);
    write_outputs(c, &render(&doc, Some(&aut), &c.emits(&[Emit::Text])))?;
    Ok(OK)
}

fn check_cmd(c: &Common) -> Result<u8, Usage> {
    let l = load(c)?;
    let (opts, cfg) = (c.engine_options(), c.solver_config());
    let mut doc = ReportDocument::new("check", &l.ts, &l.preds, &opts, &cfg);
    let formula = if let Some(text) = &c.formula {
        l.ts
            .parse_formula(text, false)
            .map_err(|e| anyhow!("--formula: {e}"))?
    } else {
        let inv = match &c.invariant {
            Some(p) => load_invariant(p, l.preds.len())?,
            None => {
                let inf = engine::run(&l.ts, &l.preds, &opts, &cfg).map_err(engine_failure)?;
                doc = doc.with_inference(&inf, &l.preds);
                match inf.outcome {
                    InferenceOutcome::Invariant(inv) => inv,
                    _ => {
                        write_outputs(c, &render(&doc, None, &c.emits(&[Emit::Text, Emit::Json])))?;
                        return Ok(outcome_code(doc.outcome));
                    }
                }
            }
        };
        doc = doc.with_invariant(&inv, &l.preds);
        inv.formula(&l.preds)
    };
    let verdict = harness::check_hoare(&l.ts, &formula, &cfg)?;
    if let HoareVerdict::Failed { condition, .. } = &verdict {
        eprintln!("check failed: {condition:?} does not hold");
    }
    doc = doc.with_hoare(&verdict);
    write_outputs(c, &render(&doc, None, &c.emits(&[Emit::Text, Emit::Json])))?;
    Ok(outcome_code(doc.outcome))
}

fn simulate_cmd(c: &Common) -> Result<u8, Usage> {
    let l = load(c)?;
    let cfg = c.solver_config();
    let trace = harness::simulate(&l.ts, c.steps, c.seed.unwrap_or(0), &cfg)?;
    let inv = match &c.invariant {
        Some(p) => Some(load_invariant(p, l.preds.len())?.formula(&l.preds)),
        None => c
            .formula
            .as_deref()
            .map(|t| l.ts.parse_formula(t, false).map_err(|e| anyhow!("--formula: {e}")))
            .transpose()?,
    };
    let mut out = String::new();
    for (t, s) in trace.states.iter().enumerate() {
        out.push_str(&format!("{t}: {s}"));
        if let Some(io) = trace.io.get(t) {
            out.push_str(&format!("  | {io}"));
        }
        out.push('\n');
    }
    if let Some(r) = &trace.stuck {
        out.push_str(&format!("stuck: {r}\n"));
    }
    let mut code = OK;
    if let Some(f) = inv {
        match trace.first_outside(&f) {
            Some(t) => {
                out.push_str(&format!("state {t} is outside the invariant\n"));
                code = FAILED;
            }
            None => out.push_str("all states inside the invariant\n"),
        }
    }
    write_outputs(c, &[(Emit::Text, out)])?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let res = match &cli.cmd {
        Command::Infer(c) => infer_cmd(c),
        Command::Abstract(c) => abstract_cmd(c),
        Command::Check(c) => check_cmd(c),
        Command::Simulate(c) => simulate_cmd(c),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
