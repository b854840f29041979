//! Denotations of predicates (as decisions) and commands, plus lowering of
//! the resulting expressions to extensional morphisms on a finite store set.

use std::collections::HashMap;

use thiserror::Error;

use crate::flowchart::{desugar_or, Cmd, EnvError, Pred};
use crate::kernel::{self, Carrier, KernelError, PartialInjection};
use crate::point::{ArrowExpr, Node, Obj};

/// Denotations of a language's atomic steps and elementary predicates.
///
/// Atomic steps are partial isomorphisms `Σ -> Σ`; elementary predicates are
/// decisions `Σ -> Σ ⊕ Σ`.
pub trait SemanticEnv {
    type Atom;
    type Elem;

    fn atomic(&self, atom: &Self::Atom) -> Result<ArrowExpr, EnvError>;

    fn elementary(&self, elem: &Self::Elem) -> Result<ArrowExpr, EnvError>;
}

/// How `p or q` is compiled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OrMode {
    /// The dedicated disjunction formula.
    #[default]
    Formula,
    /// Through `not (not p and not q)`.
    Desugar,
}

fn sigma() -> Obj {
    Obj::Store
}

fn inj1() -> ArrowExpr {
    ArrowExpr::inj1(sigma(), sigma())
}

fn inj2() -> ArrowExpr {
    ArrowExpr::inj2(sigma(), sigma())
}

/// `r̄(inj_i† ∘ d)`: the witnesses (i = 1) or counterexamples (i = 2) of `d`.
fn side(inj: ArrowExpr, d: &ArrowExpr) -> ArrowExpr {
    ArrowExpr::compose(inj.dagger(), d.clone()).restriction()
}

/// `(inj1 ∘ w ∨ inj2 ∘ c) ∘ r̄p ∘ r̄q`, the shape shared by `and` and `or`.
fn boolean_decision(
    witnesses: ArrowExpr,
    counterexamples: ArrowExpr,
    p: &ArrowExpr,
    q: &ArrowExpr,
) -> ArrowExpr {
    let tagged = ArrowExpr::join(vec![
        ArrowExpr::compose(inj1(), witnesses),
        ArrowExpr::compose(inj2(), counterexamples),
    ]);
    ArrowExpr::chain([tagged, p.clone().restriction(), q.clone().restriction()])
}

pub fn denote_pred<V: SemanticEnv>(p: &Pred<V::Elem>, env: &V) -> Result<ArrowExpr, EnvError>
where
    V::Elem: Clone,
{
    denote_pred_with(p, env, OrMode::Formula)
}

pub fn denote_pred_with<V: SemanticEnv>(
    p: &Pred<V::Elem>,
    env: &V,
    mode: OrMode,
) -> Result<ArrowExpr, EnvError>
where
    V::Elem: Clone,
{
    Ok(match p {
        Pred::True => inj1(),
        Pred::False => inj2(),
        Pred::Elem(e) => env.elementary(e)?,
        Pred::Not(a) => ArrowExpr::compose(
            ArrowExpr::gamma(sigma(), sigma()),
            denote_pred_with(a, env, mode)?,
        ),
        Pred::And(a, b) => {
            let dp = denote_pred_with(a, env, mode)?;
            let dq = denote_pred_with(b, env, mode)?;
            // witnesses: meet; counterexamples: join
            let w = ArrowExpr::compose(side(inj1(), &dp), side(inj1(), &dq));
            let c = ArrowExpr::join(vec![side(inj2(), &dp), side(inj2(), &dq)]);
            boolean_decision(w, c, &dp, &dq)
        }
        Pred::Or(a, b) => match mode {
            OrMode::Desugar => denote_pred_with(&desugar_or(p), env, mode)?,
            OrMode::Formula => {
                let dp = denote_pred_with(a, env, mode)?;
                let dq = denote_pred_with(b, env, mode)?;
                // witnesses: join; counterexamples: meet
                let w = ArrowExpr::join(vec![side(inj1(), &dp), side(inj1(), &dq)]);
                let c = ArrowExpr::compose(side(inj2(), &dp), side(inj2(), &dq));
                boolean_decision(w, c, &dp, &dq)
            }
        },
    })
}

/// `(id ⊕ ⟦c⟧) ∘ ⟦q⟧ ∘ ⟦p⟧†`, the loop body on `Σ ⊕ Σ`.
pub fn loop_body(p: ArrowExpr, c: ArrowExpr, q: ArrowExpr) -> ArrowExpr {
    ArrowExpr::chain([
        ArrowExpr::oplus(ArrowExpr::identity(sigma()), c),
        q,
        p.dagger(),
    ])
}

pub fn denote_cmd<V: SemanticEnv>(c: &Cmd<V::Atom, V::Elem>, env: &V) -> Result<ArrowExpr, EnvError>
where
    V::Elem: Clone,
{
    denote_cmd_with(c, env, OrMode::Formula)
}

pub fn denote_cmd_with<V: SemanticEnv>(
    c: &Cmd<V::Atom, V::Elem>,
    env: &V,
    mode: OrMode,
) -> Result<ArrowExpr, EnvError>
where
    V::Elem: Clone,
{
    let pred = |p: &Pred<V::Elem>| denote_pred_with(p, env, mode);
    Ok(match c {
        Cmd::Skip => ArrowExpr::identity(sigma()),
        Cmd::Atomic(a) => env.atomic(a)?,
        Cmd::Seq(c1, c2) => ArrowExpr::compose(
            denote_cmd_with(c2, env, mode)?,
            denote_cmd_with(c1, env, mode)?,
        ),
        Cmd::If {
            test,
            then_branch,
            else_branch,
            assertion,
        } => ArrowExpr::chain([
            pred(assertion)?.dagger(),
            ArrowExpr::oplus(
                denote_cmd_with(then_branch, env, mode)?,
                denote_cmd_with(else_branch, env, mode)?,
            ),
            pred(test)?,
        ]),
        Cmd::From { entry, body, exit } => {
            loop_body(pred(entry)?, denote_cmd_with(body, env, mode)?, pred(exit)?).trace()
        }
        Cmd::Loop { entry, body, exit } => {
            loop_body(pred(entry)?, denote_cmd_with(body, env, mode)?, pred(exit)?).meta_loop_join()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("primitive {name}: {source}")]
    Primitive { name: String, source: KernelError },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Tabulates expressions as partial injections over a finite store carrier.
///
/// Shared subexpressions are lowered once.
pub struct Lowering {
    sigma: Carrier,
    carriers: HashMap<Obj, Carrier>,
    memo: HashMap<usize, (ArrowExpr, PartialInjection)>,
    cross_check_traces: bool,
}

impl Lowering {
    pub fn new(sigma: Carrier) -> Self {
        Lowering {
            sigma,
            carriers: HashMap::new(),
            memo: HashMap::new(),
            cross_check_traces: false,
        }
    }

    /// Also computes every trace by its disjoint-join formula and fails with
    /// [`KernelError::TraceMismatch`] if it differs from the orbit result.
    pub fn with_trace_cross_check(mut self) -> Self {
        self.cross_check_traces = true;
        self
    }

    pub fn sigma(&self) -> &Carrier {
        &self.sigma
    }

    pub fn carrier(&mut self, o: &Obj) -> Carrier {
        if let Some(c) = self.carriers.get(o) {
            return c.clone();
        }
        let c = match o {
            Obj::Store => self.sigma.clone(),
            Obj::Sum(a, b) => {
                let (ca, cb) = (self.carrier(a), self.carrier(b));
                kernel::oplus_carrier(&ca, &cb)
            }
        };
        self.carriers.insert(o.clone(), c.clone());
        c
    }

    pub fn lower(&mut self, e: &ArrowExpr) -> Result<PartialInjection, LowerError> {
        let key = e.addr();
        if let Some((_, m)) = self.memo.get(&key) {
            return Ok(m.clone());
        }
        let m = self.lower_node(e)?;
        self.memo.insert(key, (e.clone(), m.clone()));
        Ok(m)
    }

    fn lower_node(&mut self, e: &ArrowExpr) -> Result<PartialInjection, LowerError> {
        Ok(match e.node() {
            Node::Prim(p) => {
                let dom = self.carrier(&p.dom);
                let cod = self.carrier(&p.cod);
                let pairs: Vec<_> = dom
                    .iter()
                    .filter_map(|x| (p.forward)(x).map(|y| (x.clone(), y)))
                    .collect();
                PartialInjection::new(dom, cod, pairs).map_err(|source| LowerError::Primitive {
                    name: p.name.clone(),
                    source,
                })?
            }
            Node::Identity(a) => PartialInjection::identity(&self.carrier(a)),
            Node::Zero(a, b) => PartialInjection::zero(&self.carrier(a), &self.carrier(b)),
            Node::Compose(g, f) => {
                let (g, f) = (self.lower(g)?, self.lower(f)?);
                g.compose(&f)?
            }
            Node::Dagger(f) => self.lower(f)?.dagger(),
            Node::Join(fs) => {
                let ms = fs
                    .iter()
                    .map(|f| self.lower(f))
                    .collect::<Result<Vec<_>, _>>()?;
                kernel::join(&ms)?
            }
            Node::Oplus(f, g) => {
                let (f, g) = (self.lower(f)?, self.lower(g)?);
                kernel::oplus(&f, &g)
            }
            Node::Inj1(a, b) => kernel::inj1(&self.carrier(a), &self.carrier(b)),
            Node::Inj2(a, b) => kernel::inj2(&self.carrier(a), &self.carrier(b)),
            Node::Gamma(a, b) => kernel::gamma(&self.carrier(a), &self.carrier(b)),
            Node::Restriction(f) => self.lower(f)?.restriction(),
            Node::Trace(f) => {
                let m = self.lower(f)?;
                let t = kernel::trace(&m)?;
                if self.cross_check_traces && kernel::trace_by_joins(&m)? != t {
                    return Err(KernelError::TraceMismatch.into());
                }
                t
            }
            Node::MetaLoopJoin(f) => kernel::loop_join(&self.lower(f)?)?,
        })
    }
}

/// Lowers `e` over the store carrier `sigma`.
pub fn lower_to_fin(e: &ArrowExpr, sigma: &Carrier) -> Result<PartialInjection, LowerError> {
    Lowering::new(sigma.clone()).lower(e)
}
