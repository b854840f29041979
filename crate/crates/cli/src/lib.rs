//! Command-line front end: argument definitions and dispatch.

mod report;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use revflow_core::conformance::{
    self, axiom_suite, check_corpus, check_full_abstraction, enumerate_programs,
    AbstractionVerdict, AxiomConfig, CheckOptions, Domain,
};
use revflow_core::denote::{denote_cmd, lower_to_fin};
use revflow_core::flowchart::{Interpreter, OpError, Store};
use revflow_core::invert::invert_program;
use revflow_core::point::{Direction, EvalResult, Evaluator};
use revflow_core::rint::{
    parse_infer_k, parse_with_spans, print_cmd, store_carrier, store_value, value_store, Model,
    ParseError, RintProgram, RintSemantics, SpanTable,
};

pub use report::{format_axioms, format_report, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNDEFINED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FUEL: i32 = 3;
pub const EXIT_DISAGREE: i32 = 4;

const DEFAULT_M: i64 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "revflow",
    version,
    about = "Run, invert and check reversible flowchart programs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a program from one store
    Run(RunArgs),
    /// Print the inverse of a program
    Invert(InvertArgs),
    /// Decide operational equivalence of two programs and compare it with
    /// equality of their denotations
    CheckEquiv(EquivArgs),
    /// Compare operational and denotational semantics on every small program
    Conformance(ConformanceArgs),
    /// Check the kernel laws on random partial injections
    VerifyAxioms(AxiomArgs),
    /// List every program up to a size bound
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Operational,
    DenotationalPoint,
    DenotationalFinite,
    All,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Program file
    #[arg(required_unless_present = "program", conflicts_with = "program")]
    pub file: Option<PathBuf>,
    /// Program text given inline
    #[arg(long, short = 'p')]
    pub program: Option<String>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    /// Initial store, comma-separated
    #[arg(long, allow_hyphen_values = true)]
    pub store: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Work modulo M; without it stores are unbounded integers (the finite
    /// engine then uses M = 5)
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,
    #[arg(long, value_enum, default_value_t = Engine::Operational)]
    pub semantics: Engine,
    /// Print the derivation rules applied by the operational engine
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct InvertArgs {
    #[command(flatten)]
    pub source: Source,
    /// Variable count; inferred from the program when absent
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct EquivArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_M)]
    pub m: i64,
    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,
}

#[derive(Args, Debug)]
pub struct ConformanceArgs {
    #[arg(long, default_value_t = 5)]
    pub size: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_M)]
    pub m: i64,
    #[arg(long, default_value_t = 10_000)]
    pub fuel: u64,
    /// Write the full JSON report to this file (`-` for standard output)
    #[arg(long, value_name = "OUT")]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AxiomArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub cases: usize,
    #[arg(long, default_value_t = 8)]
    pub carrier_max: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
}

/// Where output goes; tests pass buffers.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($t:tt)*) => {
        // a closed pipe is not worth a panic
        let _ = writeln!($w, $($t)*);
    };
}

pub fn dispatch(cli: Cli, io: &mut Io) -> i32 {
    match cli.command {
        Command::Run(a) => run(a, io),
        Command::Invert(a) => invert(a, io),
        Command::CheckEquiv(a) => check_equiv(a, io),
        Command::Conformance(a) => conformance(a, io),
        Command::VerifyAxioms(a) => verify_axioms(a, io),
        Command::Enumerate(a) => enumerate(a, io),
    }
}

struct Loaded {
    name: String,
    text: String,
}

fn load(src: &Source) -> Result<Loaded, String> {
    match (&src.file, &src.program) {
        (_, Some(text)) => Ok(Loaded {
            name: "<program>".into(),
            text: text.clone(),
        }),
        (Some(path), None) => fs::read_to_string(path)
            .map(|text| Loaded {
                name: path.display().to_string(),
                text,
            })
            .map_err(|e| format!("cannot read {}: {e}", path.display())),
        (None, None) => Err("no program given".into()),
    }
}

fn parse_error(io: &mut Io, name: &str, e: &ParseError) -> i32 {
    say!(io.err, "{name}:{e}");
    EXIT_INPUT
}

fn parse_store(text: &str, k: usize) -> Result<Store, String> {
    let values = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| format!("invalid store value `{}`", v.trim()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != k {
        return Err(format!("store has {} values but k = {k}", values.len()));
    }
    Ok(Store(values))
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum RunOutcome {
    Value(Store),
    Undefined(String),
    FuelOut(String),
}

impl RunOutcome {
    fn text(&self) -> String {
        match self {
            RunOutcome::Value(s) => s.to_string(),
            RunOutcome::Undefined(why) => format!("undefined: {why}"),
            RunOutcome::FuelOut(why) => why.clone(),
        }
    }

    fn same_as(&self, other: &RunOutcome) -> bool {
        match (self, other) {
            (RunOutcome::Value(a), RunOutcome::Value(b)) => a == b,
            (RunOutcome::Undefined(_), RunOutcome::Undefined(_)) => true,
            _ => false,
        }
    }
}

struct EngineRun {
    engine: &'static str,
    model: Model,
    outcome: RunOutcome,
}

fn describe_op_error(e: &OpError, spans: &SpanTable) -> String {
    match e {
        OpError::Stuck { kind, path, store } => match spans.get(path) {
            Some((line, col)) => format!("{kind} at {line}:{col} in store {store}"),
            None => format!("{kind} in store {store}"),
        },
        OpError::Env(e) => e.to_string(),
    }
}

fn run_operational(
    p: &RintProgram,
    spans: &SpanTable,
    store: &Store,
    model: Model,
    fuel: u64,
    rules: Option<&mut Vec<String>>,
) -> RunOutcome {
    let sem = RintSemantics::new(p.k, model);
    let mut interp = Interpreter::new(&sem, fuel);
    if rules.is_some() {
        interp = interp.with_trace();
    }
    let r = interp.eval(store, &p.body);
    if let Some(out) = rules {
        out.extend(interp.rules().iter().map(|r| r.to_string()));
    }
    match r {
        Ok(s) => RunOutcome::Value(s),
        Err(e) if e.is_fuel() => RunOutcome::FuelOut(describe_op_error(&e, spans)),
        Err(e) => RunOutcome::Undefined(describe_op_error(&e, spans)),
    }
}

fn run_point(p: &RintProgram, store: &Store, model: Model, fuel: u64) -> RunOutcome {
    let sem = RintSemantics::new(p.k, model);
    let e = match denote_cmd(&p.body, &sem) {
        Ok(e) => e,
        Err(e) => return RunOutcome::Undefined(e.to_string()),
    };
    match Evaluator::new(fuel).apply(&e, &store_value(store), Direction::Forward) {
        EvalResult::Value(v) => match value_store(&v) {
            Some(s) => RunOutcome::Value(s),
            None => RunOutcome::Undefined(format!("non-store result {v}")),
        },
        EvalResult::Undefined => RunOutcome::Undefined("denotation undefined at this store".into()),
        EvalResult::FuelExhausted => {
            RunOutcome::FuelOut(format!("fuel exhausted after {fuel} orbit steps"))
        }
    }
}

fn run_finite(p: &RintProgram, store: &Store, m: i64) -> RunOutcome {
    let sem = RintSemantics::new(p.k, Model::Modular(m));
    let lowered = denote_cmd(&p.body, &sem)
        .map_err(|e| e.to_string())
        .and_then(|e| lower_to_fin(&e, &store_carrier(p.k, m)).map_err(|e| e.to_string()));
    match lowered {
        Ok(f) => match f.apply(&store_value(store)).and_then(value_store) {
            Some(s) => RunOutcome::Value(s),
            None => RunOutcome::Undefined("denotation undefined at this store".into()),
        },
        Err(e) => RunOutcome::Undefined(format!("lowering failed: {e}")),
    }
}

fn reduce(store: &Store, m: i64) -> Store {
    Store(store.values().iter().map(|v| v.rem_euclid(m)).collect())
}

fn run(a: RunArgs, io: &mut Io) -> i32 {
    let src = match load(&a.source) {
        Ok(s) => s,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let (p, spans) = match parse_with_spans(&src.text, a.k) {
        Ok(r) => r,
        Err(e) => return parse_error(io, &src.name, &e),
    };
    if matches!(a.m, Some(m) if m < 1) {
        say!(io.err, "error: --m must be at least 1");
        return EXIT_INPUT;
    }
    let store = match parse_store(&a.store, a.k) {
        Ok(s) => s,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let model = a.m.map_or(Model::Integers, Model::Modular);
    let finite_m = a.m.unwrap_or(DEFAULT_M);
    let start = match model {
        Model::Modular(m) => reduce(&store, m),
        Model::Integers => store.clone(),
    };

    let mut rules = Vec::new();
    let mut runs = Vec::new();
    let want = |e: Engine| a.semantics == e || a.semantics == Engine::All;
    if want(Engine::Operational) {
        let trace = a.trace.then_some(&mut rules);
        runs.push(EngineRun {
            engine: "operational",
            model,
            outcome: run_operational(&p, &spans, &start, model, a.fuel, trace),
        });
    }
    if want(Engine::DenotationalPoint) {
        runs.push(EngineRun {
            engine: "denotational-point",
            model,
            outcome: run_point(&p, &start, model, a.fuel),
        });
    }
    if want(Engine::DenotationalFinite) {
        runs.push(EngineRun {
            engine: "denotational-finite",
            model: Model::Modular(finite_m),
            outcome: run_finite(&p, &reduce(&store, finite_m), finite_m),
        });
    }

    // every engine is compared with the operational run in its own model
    let mut disagree = false;
    if runs.len() > 1 {
        for r in &runs {
            let reference = match r.model {
                Model::Modular(m) if r.model != model => {
                    run_operational(&p, &spans, &reduce(&store, m), r.model, a.fuel, None)
                }
                _ => runs[0].outcome.clone(),
            };
            let fuel = |o: &RunOutcome| matches!(o, RunOutcome::FuelOut(_));
            if !fuel(&r.outcome) && !fuel(&reference) && !r.outcome.same_as(&reference) {
                disagree = true;
            }
        }
    }

    if a.json {
        let engines: Vec<_> = runs
            .iter()
            .map(|r| {
                json!({
                    "engine": r.engine,
                    "model": r.model.to_string(),
                    "outcome": r.outcome.text(),
                })
            })
            .collect();
        let mut doc = json!({
            "program": print_cmd(&p.body),
            "store": start.to_string(),
            "engines": engines,
            "agree": !disagree,
        });
        if a.trace {
            doc["rules"] = json!(rules);
        }
        say!(io.out, "{doc}");
    } else {
        for r in &rules {
            say!(io.out, "rule {r}");
        }
        if runs.len() == 1 {
            match &runs[0].outcome {
                RunOutcome::Value(s) => {
                    say!(io.out, "{s}");
                }
                other => {
                    say!(io.err, "error: {}", other.text());
                }
            }
        } else {
            for r in &runs {
                say!(io.out, "{} ({}): {}", r.engine, r.model, r.outcome.text());
            }
        }
    }
    if disagree {
        if !a.json {
            say!(io.err, "error: engines disagree");
        }
        return EXIT_DISAGREE;
    }
    let outcomes: Vec<_> = runs.iter().map(|r| &r.outcome).collect();
    if outcomes.iter().any(|o| matches!(o, RunOutcome::FuelOut(_))) {
        EXIT_FUEL
    } else if outcomes
        .iter()
        .any(|o| matches!(o, RunOutcome::Undefined(_)))
    {
        EXIT_UNDEFINED
    } else {
        EXIT_OK
    }
}

fn invert(a: InvertArgs, io: &mut Io) -> i32 {
    let src = match load(&a.source) {
        Ok(s) => s,
        Err(e) => {
            say!(io.err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let parsed = match a.k {
        Some(k) => parse_with_spans(&src.text, k).map(|(p, _)| p),
        None => parse_infer_k(&src.text),
    };
    let p = match parsed {
        Ok(p) => p,
        Err(e) => return parse_error(io, &src.name, &e),
    };
    let inv = invert_program(&p).expect("parsed programs have no meta-loops");
    say!(io.out, "{inv}");
    EXIT_OK
}

fn check_equiv(a: EquivArgs, io: &mut Io) -> i32 {
    let mut progs = Vec::new();
    for path in [&a.first, &a.second] {
        let src = match load(&Source {
            file: Some(path.clone()),
            program: None,
        }) {
            Ok(s) => s,
            Err(e) => {
                say!(io.err, "error: {e}");
                return EXIT_INPUT;
            }
        };
        match parse_with_spans(&src.text, a.k) {
            Ok((p, _)) => progs.push(p),
            Err(e) => return parse_error(io, &src.name, &e),
        }
    }
    if a.m < 1 {
        say!(io.err, "error: --m must be at least 1");
        return EXIT_INPUT;
    }
    let domain = Domain::new(a.k, a.m);
    match check_full_abstraction(&progs[0], &progs[1], &domain, a.fuel) {
        Ok(AbstractionVerdict::Holds { equivalent }) => {
            let word = if equivalent {
                "equivalent"
            } else {
                "not equivalent"
            };
            say!(
                io.out,
                "{word} over Z{}^{} (operational and denotational agree)",
                a.m,
                a.k
            );
            EXIT_OK
        }
        Ok(AbstractionVerdict::Violated {
            operational,
            denotational,
        }) => {
            say!(
                io.out,
                "mismatch: operationally {} but denotations {}",
                if operational {
                    "equivalent"
                } else {
                    "different"
                },
                if denotational { "equal" } else { "different" }
            );
            EXIT_DISAGREE
        }
        Ok(AbstractionVerdict::Inconclusive) => {
            say!(io.out, "inconclusive: fuel exhausted");
            EXIT_FUEL
        }
        Err(e) => {
            say!(io.err, "error: {e}");
            EXIT_DISAGREE
        }
    }
}

fn conformance(a: ConformanceArgs, io: &mut Io) -> i32 {
    if a.m < 1 {
        say!(io.err, "error: --m must be at least 1");
        return EXIT_INPUT;
    }
    let programs = enumerate_programs(a.size, a.k);
    let domain = Domain::new(a.k, a.m);
    let started = Instant::now();
    let report = check_corpus(
        &programs,
        &domain,
        CheckOptions {
            fuel: a.fuel,
            ..CheckOptions::default()
        },
    );
    let elapsed = started.elapsed();
    match &a.json {
        Some(path) if path.as_os_str() == "-" => {
            say!(io.out, "{}", format_report(&report, Format::Json, a.k, a.m));
        }
        Some(path) => {
            if let Err(e) = fs::write(path, format_report(&report, Format::Json, a.k, a.m)) {
                say!(io.err, "error: cannot write {}: {e}", path.display());
                return EXIT_INPUT;
            }
            let _ = write!(io.out, "{}", format_report(&report, Format::Text, a.k, a.m));
        }
        None => {
            let _ = write!(io.out, "{}", format_report(&report, Format::Text, a.k, a.m));
        }
    }
    say!(
        io.err,
        "{} programs x {} stores in {:.1}s",
        programs.len(),
        domain.stores().len(),
        elapsed.as_secs_f64()
    );
    if report.summary.disagree > 0 {
        EXIT_DISAGREE
    } else {
        EXIT_OK
    }
}

fn verify_axioms(a: AxiomArgs, io: &mut Io) -> i32 {
    let r = axiom_suite(&AxiomConfig::new(a.seed, a.cases, a.carrier_max));
    let fmt = if a.json { Format::Json } else { Format::Text };
    let _ = write!(io.out, "{}", format_axioms(&r, fmt));
    if a.json {
        say!(io.out, "");
    }
    if r.passed() {
        EXIT_OK
    } else {
        EXIT_DISAGREE
    }
}

fn enumerate(a: EnumerateArgs, io: &mut Io) -> i32 {
    for p in conformance::enumerate_programs(a.size, a.k) {
        say!(io.out, "{p}");
    }
    EXIT_OK
}

/// Parses `args` (without the program name) and dispatches into buffers.
/// Returns the exit code and captured stdout and stderr.
pub fn run_captured<I, S>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("revflow"))
        .chain(args.into_iter().map(Into::into));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = match Cli::try_parse_from(argv) {
        Ok(cli) => dispatch(
            cli,
            &mut Io {
                out: &mut out,
                err: &mut err,
            },
        ),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    };
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_literals() {
        assert_eq!(parse_store("0,3", 2), Ok(Store(vec![0, 3])));
        assert_eq!(parse_store(" -1, 2 ", 2), Ok(Store(vec![-1, 2])));
        assert!(parse_store("0", 2).is_err());
        assert!(parse_store("a,b", 2).is_err());
    }

    #[test]
    fn run_loop_program() {
        let (code, out, _) = run_captured([
            "run",
            "--program",
            "from x1 do x1 += 1; x2 += -1 until x2",
            "--store",
            "0,3",
        ]);
        assert_eq!((code, out.as_str()), (0, "(3,0)\n"));
    }

    #[test]
    fn undefined_run_names_the_rule() {
        let (code, _, err) = run_captured([
            "run",
            "--program",
            "if x1 then skip else skip fi x2",
            "--store",
            "0,3",
        ]);
        assert_eq!(code, EXIT_UNDEFINED);
        assert!(err.contains("exit assertion violated at 1:1"), "{err}");
    }

    #[test]
    fn bad_arguments_are_input_errors() {
        assert_eq!(
            run_captured(["run", "--program", "skip", "--store", "1"]).0,
            EXIT_INPUT
        );
        assert_eq!(run_captured(["frobnicate"]).0, EXIT_INPUT);
        assert_eq!(
            run_captured(["run", "--program", "x1 += x1", "--store", "1,2"]).0,
            EXIT_INPUT
        );
    }
}
