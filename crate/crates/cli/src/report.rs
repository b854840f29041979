//! Rendering of conformance and axiom reports.

use std::fmt::Write;

use revflow_core::conformance::{AxiomReport, ConformanceReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Shell-quotes `s` with single quotes.
fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn store_csv(store: &str) -> String {
    store.trim_matches(|c| c == '(' || c == ')').to_string()
}

/// Text mode prints the summary and one line per disagreement with a
/// command that reproduces it.
pub fn format_report(r: &ConformanceReport, fmt: Format, k: usize, m: i64) -> String {
    if fmt == Format::Json {
        return serde_json::to_string(r).expect("reports serialize");
    }
    let mut out = String::new();
    for c in r.disagreements() {
        let store = c.store.to_string();
        writeln!(
            out,
            "disagree: {} at {}: operational {} / denotational {}\n  reproduce: revflow run --program {} --store {} --k {k} --m {m} --semantics all",
            c.program,
            store,
            c.op,
            c.den,
            quote(&c.program),
            store_csv(&store),
        )
        .unwrap();
    }
    let s = r.summary;
    writeln!(
        out,
        "cases: {}  agree: {}  disagree: {}  unknown: {}",
        r.cases.len(),
        s.agree,
        s.disagree,
        s.unknown
    )
    .unwrap();
    out
}

pub fn format_axioms(r: &AxiomReport, fmt: Format) -> String {
    if fmt == Format::Json {
        return serde_json::to_string(r).expect("reports serialize");
    }
    let mut out = String::new();
    for (law, n) in &r.laws {
        let bad = r.violations.iter().filter(|v| &v.law == law).count();
        writeln!(out, "{law}: {n} checks, {bad} violations").unwrap();
    }
    for v in &r.violations {
        writeln!(
            out,
            "violation: {} in case {} (case seed {}): {}",
            v.law, v.case, v.case_seed, v.detail
        )
        .unwrap();
    }
    writeln!(
        out,
        "seed {}  cases {}  carrier-max {}  checks {}  violations {}",
        r.seed,
        r.cases,
        r.carrier_max,
        r.checks,
        r.violations.len()
    )
    .unwrap();
    out
}
