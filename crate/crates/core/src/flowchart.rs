//! Structured reversible flowcharts and their big-step operational semantics.
//!
//! The AST is generic over the atomic steps `A` and elementary predicates `E`
//! of a concrete language. Evaluation follows the derivation rules for
//! predicates (`σ ⊢ p ↓ b`) and commands (`σ ⊢ c ⇓ σ'`), including the
//! internal `loop` meta-command that gives meaning to re-entering a loop from
//! inside (where the entry assertion must be false).

use std::fmt;

use thiserror::Error;

/// A store: one integer per variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Store(pub Vec<i64>);

impl Store {
    pub fn new(values: Vec<i64>) -> Self {
        Store(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Pred<E> {
    True,
    False,
    Elem(E),
    Not(Box<Pred<E>>),
    And(Box<Pred<E>>, Box<Pred<E>>),
    Or(Box<Pred<E>>, Box<Pred<E>>),
}

impl<E> Pred<E> {
    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Pred<E>) -> Self {
        Pred::Not(Box::new(p))
    }

    pub fn and(p: Pred<E>, q: Pred<E>) -> Self {
        Pred::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Pred<E>, q: Pred<E>) -> Self {
        Pred::Or(Box::new(p), Box::new(q))
    }

    pub fn size(&self) -> usize {
        match self {
            Pred::True | Pred::False | Pred::Elem(_) => 1,
            Pred::Not(p) => 1 + p.size(),
            Pred::And(p, q) | Pred::Or(p, q) => 1 + p.size() + q.size(),
        }
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Pred::True | Pred::False | Pred::Elem(_) => false,
            Pred::Not(p) => p.contains_or(),
            Pred::And(p, q) => p.contains_or() || q.contains_or(),
            Pred::Or(..) => true,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Cmd<A, E> {
    Skip,
    Atomic(A),
    Seq(Box<Cmd<A, E>>, Box<Cmd<A, E>>),
    If {
        test: Pred<E>,
        then_branch: Box<Cmd<A, E>>,
        else_branch: Box<Cmd<A, E>>,
        assertion: Pred<E>,
    },
    From {
        entry: Pred<E>,
        body: Box<Cmd<A, E>>,
        exit: Pred<E>,
    },
    /// Internal meta-command: a loop entered from inside.
    Loop {
        entry: Pred<E>,
        body: Box<Cmd<A, E>>,
        exit: Pred<E>,
    },
}

impl<A, E> Cmd<A, E> {
    pub fn seq(c1: Cmd<A, E>, c2: Cmd<A, E>) -> Self {
        Cmd::Seq(Box::new(c1), Box::new(c2))
    }

    pub fn if_(test: Pred<E>, c1: Cmd<A, E>, c2: Cmd<A, E>, assertion: Pred<E>) -> Self {
        Cmd::If {
            test,
            then_branch: Box::new(c1),
            else_branch: Box::new(c2),
            assertion,
        }
    }

    pub fn from_loop(entry: Pred<E>, body: Cmd<A, E>, exit: Pred<E>) -> Self {
        Cmd::From {
            entry,
            body: Box::new(body),
            exit,
        }
    }

    pub fn meta_loop(entry: Pred<E>, body: Cmd<A, E>, exit: Pred<E>) -> Self {
        Cmd::Loop {
            entry,
            body: Box::new(body),
            exit,
        }
    }

    /// Number of AST nodes, predicates included.
    pub fn size(&self) -> usize {
        match self {
            Cmd::Skip | Cmd::Atomic(_) => 1,
            Cmd::Seq(a, b) => 1 + a.size() + b.size(),
            Cmd::If {
                test,
                then_branch,
                else_branch,
                assertion,
            } => 1 + test.size() + then_branch.size() + else_branch.size() + assertion.size(),
            Cmd::From { entry, body, exit } | Cmd::Loop { entry, body, exit } => {
                1 + entry.size() + body.size() + exit.size()
            }
        }
    }

    pub fn contains_loop(&self) -> bool {
        match self {
            Cmd::Skip | Cmd::Atomic(_) => false,
            Cmd::Seq(a, b) => a.contains_loop() || b.contains_loop(),
            Cmd::If {
                then_branch,
                else_branch,
                ..
            } => then_branch.contains_loop() || else_branch.contains_loop(),
            Cmd::From { body, .. } => body.contains_loop(),
            Cmd::Loop { .. } => true,
        }
    }
}

/// Rewrites every `p or q` to `not (not p and not q)`.
pub fn desugar_or<E: Clone>(p: &Pred<E>) -> Pred<E> {
    match p {
        Pred::True => Pred::True,
        Pred::False => Pred::False,
        Pred::Elem(e) => Pred::Elem(e.clone()),
        Pred::Not(a) => Pred::not(desugar_or(a)),
        Pred::And(a, b) => Pred::and(desugar_or(a), desugar_or(b)),
        Pred::Or(a, b) => Pred::not(Pred::and(
            Pred::not(desugar_or(a)),
            Pred::not(desugar_or(b)),
        )),
    }
}

/// Position of a command node: the child indices taken from the root.
///
/// `Seq` children are 0 and 1, `If` branches are 0 (then) and 1 (else), and a
/// loop body is 0.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodePath(pub Vec<u8>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("unknown elementary predicate {0}")]
    UnknownPredicate(String),
    #[error("unknown atomic step {0}")]
    UnknownAtomic(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpErrorKind {
    EntryAssertionViolation,
    ExitAssertionViolation,
    LoopAssertionViolation,
    AtomicUndefined,
    FuelExhausted,
}

impl fmt::Display for OpErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OpErrorKind::EntryAssertionViolation => "entry assertion violated",
            OpErrorKind::ExitAssertionViolation => "exit assertion violated",
            OpErrorKind::LoopAssertionViolation => {
                "loop assertion violated (entry assertion true on re-entry)"
            }
            OpErrorKind::AtomicUndefined => "atomic step undefined",
            OpErrorKind::FuelExhausted => "fuel exhausted",
        };
        f.write_str(s)
    }
}

/// Why a command has no derivation from a given store.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OpError {
    #[error("{kind} at {path} in store {store}")]
    Stuck {
        kind: OpErrorKind,
        path: NodePath,
        store: Store,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl OpError {
    pub fn kind(&self) -> Option<OpErrorKind> {
        match self {
            OpError::Stuck { kind, .. } => Some(*kind),
            OpError::Env(_) => None,
        }
    }

    pub fn is_fuel(&self) -> bool {
        self.kind() == Some(OpErrorKind::FuelExhausted)
    }
}

/// Interpretation of a language's atomic steps and elementary predicates.
pub trait Semantics {
    type Atom;
    type Elem;

    /// Runs an atomic step; `Ok(None)` means the step is undefined at `store`.
    fn step(&self, atom: &Self::Atom, store: &Store) -> Result<Option<Store>, EnvError>;

    fn test(&self, elem: &Self::Elem, store: &Store) -> Result<bool, EnvError>;
}

/// Name of an applied derivation rule, for `--trace` output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Skip,
    Atomic,
    Seq,
    IfThen,
    IfElse,
    FromSkip,
    FromEnter,
    LoopIter,
    LoopExit,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Skip => "Skip",
            Rule::Atomic => "Atomic",
            Rule::Seq => "Seq",
            Rule::IfThen => "If-then",
            Rule::IfElse => "If-else",
            Rule::FromSkip => "From-skip",
            Rule::FromEnter => "From-enter",
            Rule::LoopIter => "Loop-iter",
            Rule::LoopExit => "Loop-exit",
        };
        f.write_str(s)
    }
}

/// Evaluates `σ ⊢ p ↓ b`. Predicates are total; `or` goes through its
/// desugaring.
pub fn eval_pred<S: Semantics>(
    store: &Store,
    p: &Pred<S::Elem>,
    sem: &S,
) -> Result<bool, EnvError> {
    Ok(match p {
        Pred::True => true,
        Pred::False => false,
        Pred::Elem(e) => sem.test(e, store)?,
        Pred::Not(a) => !eval_pred(store, a, sem)?,
        Pred::And(a, b) => {
            let x = eval_pred(store, a, sem)?;
            let y = eval_pred(store, b, sem)?;
            x && y
        }
        // not (not a and not b)
        Pred::Or(a, b) => {
            let na = !eval_pred(store, a, sem)?;
            let nb = !eval_pred(store, b, sem)?;
            !(na && nb)
        }
    })
}

/// Big-step command evaluator with a loop-iteration budget.
pub struct Interpreter<'s, S> {
    sem: &'s S,
    fuel: u64,
    trace: Option<Vec<Rule>>,
}

impl<'s, S: Semantics> Interpreter<'s, S> {
    pub fn new(sem: &'s S, fuel: u64) -> Self {
        Interpreter {
            sem,
            fuel,
            trace: None,
        }
    }

    /// Records every applied rule.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn rules(&self) -> &[Rule] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn fuel_left(&self) -> u64 {
        self.fuel
    }

    fn note(&mut self, r: Rule) {
        if let Some(t) = &mut self.trace {
            t.push(r);
        }
    }

    fn stuck(kind: OpErrorKind, path: &NodePath, store: &Store) -> OpError {
        OpError::Stuck {
            kind,
            path: path.clone(),
            store: store.clone(),
        }
    }

    pub fn eval(&mut self, store: &Store, c: &Cmd<S::Atom, S::Elem>) -> Result<Store, OpError> {
        self.eval_at(store, c, &NodePath::root())
    }

    fn eval_at(
        &mut self,
        store: &Store,
        c: &Cmd<S::Atom, S::Elem>,
        path: &NodePath,
    ) -> Result<Store, OpError> {
        match c {
            // σ ⊢ skip ⇓ σ
            Cmd::Skip => {
                self.note(Rule::Skip);
                Ok(store.clone())
            }
            Cmd::Atomic(a) => {
                self.note(Rule::Atomic);
                self.sem
                    .step(a, store)?
                    .ok_or_else(|| Self::stuck(OpErrorKind::AtomicUndefined, path, store))
            }
            // σ ⊢ c1 ⇓ σ'  σ' ⊢ c2 ⇓ σ''
            Cmd::Seq(c1, c2) => {
                self.note(Rule::Seq);
                let mid = self.eval_at(store, c1, &path.child(0))?;
                self.eval_at(&mid, c2, &path.child(1))
            }
            // p↓tt, c1⇓σ', q@σ'↓tt   or   p↓ff, c2⇓σ', q@σ'↓ff
            Cmd::If {
                test,
                then_branch,
                else_branch,
                assertion,
            } => {
                let b = eval_pred(store, test, self.sem)?;
                let out = if b {
                    self.note(Rule::IfThen);
                    self.eval_at(store, then_branch, &path.child(0))?
                } else {
                    self.note(Rule::IfElse);
                    self.eval_at(store, else_branch, &path.child(1))?
                };
                if eval_pred(&out, assertion, self.sem)? != b {
                    return Err(Self::stuck(OpErrorKind::ExitAssertionViolation, path, &out));
                }
                Ok(out)
            }
            // p↓tt, q↓tt ⇒ σ   or   p↓tt, q↓ff, c⇓σ', loop@σ'⇓σ''
            Cmd::From { entry, body, exit } => {
                if !eval_pred(store, entry, self.sem)? {
                    return Err(Self::stuck(
                        OpErrorKind::EntryAssertionViolation,
                        path,
                        store,
                    ));
                }
                if eval_pred(store, exit, self.sem)? {
                    self.note(Rule::FromSkip);
                    return Ok(store.clone());
                }
                self.note(Rule::FromEnter);
                let next = self.eval_at(store, body, &path.child(0))?;
                self.run_loop(next, entry, body, exit, path)
            }
            Cmd::Loop { entry, body, exit } => {
                self.run_loop(store.clone(), entry, body, exit, path)
            }
        }
    }

    // loop: p↓ff, q↓tt ⇒ σ   or   p↓ff, q↓ff, c⇓σ', loop@σ'⇓σ''
    // The recursive premise is unrolled into iteration so deep loops do not
    // grow the stack.
    fn run_loop(
        &mut self,
        mut store: Store,
        entry: &Pred<S::Elem>,
        body: &Cmd<S::Atom, S::Elem>,
        exit: &Pred<S::Elem>,
        path: &NodePath,
    ) -> Result<Store, OpError> {
        loop {
            if self.fuel == 0 {
                return Err(Self::stuck(OpErrorKind::FuelExhausted, path, &store));
            }
            self.fuel -= 1;
            if eval_pred(&store, entry, self.sem)? {
                return Err(Self::stuck(
                    OpErrorKind::LoopAssertionViolation,
                    path,
                    &store,
                ));
            }
            if eval_pred(&store, exit, self.sem)? {
                self.note(Rule::LoopExit);
                return Ok(store);
            }
            self.note(Rule::LoopIter);
            store = self.eval_at(&store, body, &path.child(0))?;
        }
    }
}

/// Evaluates `σ ⊢ c ⇓ σ'` with the given loop-iteration budget.
pub fn eval_cmd<S: Semantics>(
    store: &Store,
    c: &Cmd<S::Atom, S::Elem>,
    sem: &S,
    fuel: u64,
) -> Result<Store, OpError> {
    Interpreter::new(sem, fuel).eval(store, c)
}
