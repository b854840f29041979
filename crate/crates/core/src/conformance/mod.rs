//! Differential checks between the operational semantics and the lowered
//! denotations on finite store domains, plus the kernel law suites.

mod axioms;
mod enumerate;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::denote::{denote_cmd, denote_pred, denote_pred_with, LowerError, Lowering, OrMode};
use crate::flowchart::{Cmd, Interpreter, OpError, Pred, Store};
use crate::invert::invert_rint_cmd;
use crate::kernel::{self, decision_of, equals, Carrier, Element, PartialInjection};
use crate::point::{Direction, EvalResult, Evaluator};
use crate::rint::{
    all_stores, print_cmd, print_pred, store_carrier, store_value, value_store, Model, RintCmd,
    RintPred, RintProgram, RintSemantics,
};

pub use axioms::{
    axiom_suite, case_seed, first_member_join, random_carrier, random_pinj, trace_equivalence,
    AxiomConfig, AxiomReport, AxiomViolation, JoinFn, TraceReport,
};
pub use enumerate::{enumerate_predicates, enumerate_programs, ProgramEnumerator, DEFAULT_POOL};

/// A finite store domain `Z_m^k`.
#[derive(Clone, Debug)]
pub struct Domain {
    pub k: usize,
    pub m: i64,
    stores: Vec<Store>,
    carrier: Carrier,
}

impl Domain {
    pub fn new(k: usize, m: i64) -> Self {
        Domain {
            k,
            m,
            stores: all_stores(k, m),
            carrier: store_carrier(k, m),
        }
    }

    pub fn stores(&self) -> &[Store] {
        &self.stores
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn semantics(&self) -> RintSemantics {
        RintSemantics::new(self.k, Model::Modular(self.m))
    }

    pub fn lowering(&self) -> Lowering {
        Lowering::new(self.carrier.clone()).with_trace_cross_check()
    }
}

/// What one engine made of one program at one store.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Store),
    Undefined(String),
    FuelOut,
}

impl Outcome {
    fn from_op(r: Result<Store, OpError>) -> Self {
        match r {
            Ok(s) => Outcome::Value(s),
            Err(e) if e.is_fuel() => Outcome::FuelOut,
            Err(OpError::Stuck { kind, .. }) => Outcome::Undefined(kind.to_string()),
            Err(e) => Outcome::Undefined(e.to_string()),
        }
    }

    fn from_point(r: EvalResult) -> Self {
        match r {
            EvalResult::Value(v) => match value_store(&v) {
                Some(s) => Outcome::Value(s),
                None => Outcome::Undefined(format!("non-store result {v}")),
            },
            EvalResult::Undefined => Outcome::Undefined(String::new()),
            EvalResult::FuelExhausted => Outcome::FuelOut,
        }
    }

    fn from_graph(m: &PartialInjection, s: &Store) -> Self {
        match m.apply(&store_value(s)).and_then(value_store) {
            Some(t) => Outcome::Value(t),
            None => Outcome::Undefined(String::new()),
        }
    }

    /// Agreement up to the reason for undefinedness.
    fn same_as(&self, other: &Outcome) -> bool {
        match (self, other) {
            (Outcome::Value(a), Outcome::Value(b)) => a == b,
            (Outcome::Undefined(_), Outcome::Undefined(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Value(s) => write!(f, "{s}"),
            Outcome::Undefined(r) if r.is_empty() => write!(f, "undefined"),
            Outcome::Undefined(r) => write!(f, "undefined ({r})"),
            Outcome::FuelOut => write!(f, "fuel-out"),
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Disagree,
    Unknown,
}

pub fn verdict(op: &Outcome, den: &Outcome) -> Verdict {
    if *op == Outcome::FuelOut || *den == Outcome::FuelOut {
        Verdict::Unknown
    } else if op.same_as(den) {
        Verdict::Agree
    } else {
        Verdict::Disagree
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Case {
    pub program: String,
    #[serde(serialize_with = "display")]
    pub store: Store,
    pub op: Outcome,
    pub den: Outcome,
    pub verdict: Verdict,
}

fn display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub agree: usize,
    pub disagree: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConformanceReport {
    pub summary: Summary,
    pub cases: Vec<Case>,
}

impl ConformanceReport {
    pub fn from_cases(cases: Vec<Case>) -> Self {
        let mut summary = Summary::default();
        for c in &cases {
            match c.verdict {
                Verdict::Agree => summary.agree += 1,
                Verdict::Disagree => summary.disagree += 1,
                Verdict::Unknown => summary.unknown += 1,
            }
        }
        ConformanceReport { summary, cases }
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.verdict == Verdict::Disagree)
    }
}

/// Options for [`check_soundness_adequacy`].
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    /// Loop-iteration budget for the operational run and orbit budget for the
    /// point evaluator.
    pub fuel: u64,
    /// Also evaluate the denotation pointwise and require it to match the
    /// lowered graph.
    pub point: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            fuel: 10_000,
            point: true,
        }
    }
}

/// Runs `p` operationally at every store of `domain` and compares with its
/// lowered denotation.
pub fn check_soundness_adequacy(
    p: &RintProgram,
    domain: &Domain,
    opts: CheckOptions,
) -> ConformanceReport {
    ConformanceReport::from_cases(program_cases(p, domain, opts))
}

fn program_cases(p: &RintProgram, domain: &Domain, opts: CheckOptions) -> Vec<Case> {
    let sem = domain.semantics();
    let program = print_cmd(&p.body);
    let denotation = denote_cmd(&p.body, &sem);
    let lowered = denotation
        .as_ref()
        .map_err(|e| e.to_string())
        .and_then(|e| domain.lowering().lower(e).map_err(|e| e.to_string()));
    domain
        .stores()
        .iter()
        .map(|s| {
            let op = Outcome::from_op(Interpreter::new(&sem, opts.fuel).eval(s, &p.body));
            let mut den = match &lowered {
                Ok(m) => Outcome::from_graph(m, s),
                Err(e) => Outcome::Undefined(format!("lowering failed: {e}")),
            };
            let mut v = verdict(&op, &den);
            if let (true, Ok(e), Ok(_)) = (opts.point, &denotation, &lowered) {
                let pt = Outcome::from_point(Evaluator::new(opts.fuel).apply(
                    e,
                    &store_value(s),
                    Direction::Forward,
                ));
                if pt == Outcome::FuelOut {
                    v = Verdict::Unknown;
                } else if !pt.same_as(&den) {
                    v = Verdict::Disagree;
                    den = Outcome::Undefined(format!("lowered {den} but pointwise {pt}"));
                }
            }
            if lowered.is_err() {
                v = Verdict::Disagree;
            }
            Case {
                program: program.clone(),
                store: s.clone(),
                op,
                den,
                verdict: v,
            }
        })
        .collect()
}

/// [`check_soundness_adequacy`] over many programs, in parallel; cases keep
/// program order, then store order.
pub fn check_corpus(
    programs: &[RintProgram],
    domain: &Domain,
    opts: CheckOptions,
) -> ConformanceReport {
    let cases: Vec<Case> = programs
        .par_iter()
        .flat_map_iter(|p| program_cases(p, domain, opts))
        .collect();
    ConformanceReport::from_cases(cases)
}

/// Outcome of comparing operational equivalence with denotational equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstractionVerdict {
    /// Both sides agree; `equivalent` says which way.
    Holds { equivalent: bool },
    Violated {
        operational: bool,
        denotational: bool,
    },
    /// Some run ran out of fuel.
    Inconclusive,
}

/// Checks `p1 ≈ p2` (same outcome at every store) against equality of the
/// lowered denotations.
pub fn check_full_abstraction(
    p1: &RintProgram,
    p2: &RintProgram,
    domain: &Domain,
    fuel: u64,
) -> Result<AbstractionVerdict, LowerError> {
    let sem = domain.semantics();
    let mut operational = true;
    for s in domain.stores() {
        let a = Outcome::from_op(Interpreter::new(&sem, fuel).eval(s, &p1.body));
        let b = Outcome::from_op(Interpreter::new(&sem, fuel).eval(s, &p2.body));
        if a == Outcome::FuelOut || b == Outcome::FuelOut {
            return Ok(AbstractionVerdict::Inconclusive);
        }
        operational &= a.same_as(&b);
    }
    let denotational = equals(&lower_cmd(&p1.body, domain)?, &lower_cmd(&p2.body, domain)?)?;
    Ok(if operational == denotational {
        AbstractionVerdict::Holds {
            equivalent: operational,
        }
    } else {
        AbstractionVerdict::Violated {
            operational,
            denotational,
        }
    })
}

pub fn lower_cmd(c: &RintCmd, domain: &Domain) -> Result<PartialInjection, LowerError> {
    let e = denote_cmd(c, &domain.semantics())?;
    domain.lowering().lower(&e)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InversionVerdict {
    /// `⟦invert c⟧ = ⟦c⟧†` on the lowered morphisms.
    pub semantic: bool,
    /// `invert (invert c) = c` structurally.
    pub involution: bool,
    /// Running `c` then its inverse returns to the start at every store
    /// where `c` converges.
    pub round_trip: bool,
}

impl InversionVerdict {
    pub fn holds(&self) -> bool {
        self.semantic && self.involution && self.round_trip
    }
}

pub fn check_inversion(
    p: &RintProgram,
    domain: &Domain,
    fuel: u64,
) -> Result<InversionVerdict, LowerError> {
    let inv = invert_rint_cmd(&p.body).expect("source programs have no meta-loops");
    let semantic = equals(
        &lower_cmd(&inv, domain)?,
        &lower_cmd(&p.body, domain)?.dagger(),
    )?;
    let involution = invert_rint_cmd(&inv).ok().as_ref() == Some(&p.body);
    let sem = domain.semantics();
    let round_trip =
        domain
            .stores()
            .iter()
            .all(|s| match Interpreter::new(&sem, fuel).eval(s, &p.body) {
                Ok(t) => Interpreter::new(&sem, fuel).eval(&t, &inv).as_ref() == Ok(s),
                Err(_) => true,
            });
    Ok(InversionVerdict {
        semantic,
        involution,
        round_trip,
    })
}

/// Pairs for the full-abstraction check: `n` uniformly random pairs plus,
/// for contrast, up to `n` random pairs with equal lowered denotations.
pub fn sample_pairs(
    corpus: &[RintProgram],
    domain: &Domain,
    n: usize,
    seed: u64,
) -> Result<Vec<(RintProgram, RintProgram)>, LowerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<_> = (0..n)
        .map(|_| {
            (
                corpus.choose(&mut rng).unwrap().clone(),
                corpus.choose(&mut rng).unwrap().clone(),
            )
        })
        .collect();
    let mut classes: BTreeMap<Vec<(Element, Element)>, Vec<usize>> = BTreeMap::new();
    for (i, p) in corpus.iter().enumerate() {
        let m = lower_cmd(&p.body, domain)?;
        let key = m
            .graph()
            .iter()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        classes.entry(key).or_default().push(i);
    }
    let shared: Vec<&Vec<usize>> = classes.values().filter(|c| c.len() > 1).collect();
    if !shared.is_empty() {
        for _ in 0..n {
            let class = shared.choose(&mut rng).unwrap();
            let mut two = class.choose_multiple(&mut rng, 2);
            let (a, b) = (*two.next().unwrap(), *two.next().unwrap());
            pairs.push((corpus[a].clone(), corpus[b].clone()));
        }
    }
    Ok(pairs)
}

/// Per-predicate checks over a domain: decision axioms and totality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PredicateVerdict {
    pub decision: bool,
    pub total: bool,
}

pub fn check_predicate(p: &RintPred, domain: &Domain) -> Result<PredicateVerdict, LowerError> {
    let d = lower_pred(p, domain, OrMode::Formula)?;
    let sigma = domain.carrier();
    let (i1, i2) = (kernel::inj1(sigma, sigma), kernel::inj2(sigma, sigma));
    let d1 = kernel::join(&[i1.dagger().compose(&d)?, i2.dagger().compose(&d)?])?;
    let d2 = equals(
        &kernel::oplus(&d, &d).compose(&d)?,
        &kernel::oplus(&i1, &i2).compose(&d)?,
    )?;
    Ok(PredicateVerdict {
        decision: equals(&decision_of(&d)?, &d)? && equals(&d1, &d.restriction())? && d2,
        total: d.is_total(),
    })
}

pub fn lower_pred(
    p: &RintPred,
    domain: &Domain,
    mode: OrMode,
) -> Result<PartialInjection, LowerError> {
    let e = denote_pred_with(p, &domain.semantics(), mode)?;
    domain.lowering().lower(&e)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DeMorganReport {
    pub pairs: usize,
    pub de_morgan_mismatches: Vec<String>,
    pub predicates: usize,
    pub sugar_mismatches: Vec<String>,
}

/// `not (p and q) = not p or not q` for all pairs of predicates up to
/// `max_size`, and formula-`or` against desugared `or` for every predicate.
pub fn check_de_morgan(max_size: usize, domain: &Domain) -> Result<DeMorganReport, LowerError> {
    let preds = enumerate_predicates(max_size, domain.k);
    let mut r = DeMorganReport {
        pairs: preds.len() * preds.len(),
        predicates: preds.len(),
        ..Default::default()
    };
    let sem = domain.semantics();
    let mut low = domain.lowering();
    let mut lower = |p: &RintPred| -> Result<PartialInjection, LowerError> {
        let e = denote_pred(p, &sem).expect("enumerated predicates use known variables");
        low.lower(&e)
    };
    for p in &preds {
        for q in &preds {
            let lhs = Pred::not(Pred::and(p.clone(), q.clone()));
            let rhs = Pred::or(Pred::not(p.clone()), Pred::not(q.clone()));
            if !equals(&lower(&lhs)?, &lower(&rhs)?)? {
                r.de_morgan_mismatches
                    .push(format!("{} | {}", print_pred(p), print_pred(q)));
            }
        }
        let a = lower_pred(p, domain, OrMode::Formula)?;
        let b = lower_pred(p, domain, OrMode::Desugar)?;
        if !equals(&a, &b)? {
            r.sugar_mismatches.push(print_pred(p));
        }
    }
    Ok(r)
}

/// Rebuilds the trace of the loop body of `from p do c until q` from its direct part
/// and the pointwise loop join, and compares with the lowered trace.
pub fn check_meta_loop(c: &RintCmd, domain: &Domain) -> Result<bool, LowerError> {
    let Cmd::From { entry, body, exit } = c else {
        return Ok(true);
    };
    let sem = domain.semantics();
    let step = crate::denote::loop_body(
        denote_pred(entry, &sem)?,
        denote_cmd(body, &sem)?,
        denote_pred(exit, &sem)?,
    );
    let mut low = domain.lowering();
    let b = low.lower(&step)?;
    let tr = low.lower(&step.clone().trace())?;
    let parts = kernel::trace_components(&b)?;
    let (_, _, exits) = kernel::loop_orbit(&b)?;
    let mut rebuilt: BTreeMap<Element, Element> = parts.direct.graph().clone();
    for (x, u) in parts.enter.graph() {
        if let Some(y) = exits.get(u) {
            if rebuilt.insert(x.clone(), y.clone()).is_some() {
                return Ok(false);
            }
        }
    }
    Ok(&rebuilt == tr.graph())
}

/// Whether a lowered morphism's graph is injective (no two inputs share an
/// output).
pub fn is_injective(m: &PartialInjection) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    m.graph().values().all(|y| seen.insert(y))
}
