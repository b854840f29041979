//! Symbolic morphism expressions and their evaluation at a single point.
//!
//! An [`ArrowExpr`] is built from primitives with the inverse-category
//! combinators (composition, dagger, joins, the disjointness tensor, trace).
//! [`Evaluator`] runs an expression forward or backward at one value, which
//! works over unbounded integer stores where the finite kernel cannot.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::kernel::Element;

/// Values at which expressions are evaluated: stores and tagged sums of them.
pub type PointValue = Element;

/// Objects of the store model: `Σ` and sums built from it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Obj {
    Store,
    Sum(Box<Obj>, Box<Obj>),
}

impl Obj {
    pub fn sum(a: Obj, b: Obj) -> Self {
        Obj::Sum(Box::new(a), Box::new(b))
    }

    /// `Σ ⊕ Σ`
    pub fn store_sum() -> Self {
        Obj::sum(Obj::Store, Obj::Store)
    }
}

pub type Rule = Arc<dyn Fn(&PointValue) -> Option<PointValue> + Send + Sync>;

/// An opaque partial isomorphism given by a forward and a backward rule.
pub struct Prim {
    pub name: String,
    pub dom: Obj,
    pub cod: Obj,
    pub forward: Rule,
    pub backward: Rule,
}

impl fmt::Debug for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Debug)]
pub enum Node {
    Prim(Prim),
    Identity(Obj),
    Zero(Obj, Obj),
    /// `Compose(g, f)` is `g ∘ f`.
    Compose(ArrowExpr, ArrowExpr),
    Dagger(ArrowExpr),
    Join(Vec<ArrowExpr>),
    Oplus(ArrowExpr, ArrowExpr),
    Inj1(Obj, Obj),
    Inj2(Obj, Obj),
    Gamma(Obj, Obj),
    Restriction(ArrowExpr),
    Trace(ArrowExpr),
    /// `⋁ₙ f21 ∘ f22ⁿ`: enter at the internal component, exit on the left.
    MetaLoopJoin(ArrowExpr),
}

/// A shared, immutable morphism expression.
#[derive(Clone)]
pub struct ArrowExpr(Arc<Node>);

impl fmt::Debug for ArrowExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl ArrowExpr {
    fn wrap(n: Node) -> Self {
        ArrowExpr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Address of the shared node, stable while any clone is alive.
    pub(crate) fn addr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &ArrowExpr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn prim(
        name: impl Into<String>,
        dom: Obj,
        cod: Obj,
        forward: impl Fn(&PointValue) -> Option<PointValue> + Send + Sync + 'static,
        backward: impl Fn(&PointValue) -> Option<PointValue> + Send + Sync + 'static,
    ) -> Self {
        Self::wrap(Node::Prim(Prim {
            name: name.into(),
            dom,
            cod,
            forward: Arc::new(forward),
            backward: Arc::new(backward),
        }))
    }

    pub fn identity(a: Obj) -> Self {
        Self::wrap(Node::Identity(a))
    }

    pub fn zero(a: Obj, b: Obj) -> Self {
        Self::wrap(Node::Zero(a, b))
    }

    /// `g ∘ f`
    pub fn compose(g: ArrowExpr, f: ArrowExpr) -> Self {
        Self::wrap(Node::Compose(g, f))
    }

    /// Composes right to left: `chain([h, g, f])` is `h ∘ g ∘ f`.
    pub fn chain(parts: impl IntoIterator<Item = ArrowExpr>) -> Self {
        let mut parts: Vec<ArrowExpr> = parts.into_iter().collect();
        let mut acc = parts.pop().expect("chain of at least one arrow");
        while let Some(g) = parts.pop() {
            acc = ArrowExpr::compose(g, acc);
        }
        acc
    }

    pub fn dagger(self) -> Self {
        Self::wrap(Node::Dagger(self))
    }

    pub fn join(members: Vec<ArrowExpr>) -> Self {
        assert!(!members.is_empty(), "join of no members");
        Self::wrap(Node::Join(members))
    }

    pub fn oplus(f: ArrowExpr, g: ArrowExpr) -> Self {
        Self::wrap(Node::Oplus(f, g))
    }

    pub fn inj1(a: Obj, b: Obj) -> Self {
        Self::wrap(Node::Inj1(a, b))
    }

    pub fn inj2(a: Obj, b: Obj) -> Self {
        Self::wrap(Node::Inj2(a, b))
    }

    pub fn gamma(a: Obj, b: Obj) -> Self {
        Self::wrap(Node::Gamma(a, b))
    }

    pub fn restriction(self) -> Self {
        Self::wrap(Node::Restriction(self))
    }

    pub fn trace(self) -> Self {
        Self::wrap(Node::Trace(self))
    }

    pub fn meta_loop_join(self) -> Self {
        Self::wrap(Node::MetaLoopJoin(self))
    }

    pub fn dom(&self) -> Obj {
        match self.node() {
            Node::Prim(p) => p.dom.clone(),
            Node::Identity(a) | Node::Zero(a, _) | Node::Inj1(a, _) => a.clone(),
            Node::Inj2(_, b) => b.clone(),
            Node::Gamma(a, b) => Obj::sum(a.clone(), b.clone()),
            Node::Compose(_, f) => f.dom(),
            Node::Dagger(f) => f.cod(),
            Node::Join(fs) => fs[0].dom(),
            Node::Oplus(f, g) => Obj::sum(f.dom(), g.dom()),
            Node::Restriction(f) => f.dom(),
            Node::Trace(f) => sum_parts(f.dom()).0,
            Node::MetaLoopJoin(f) => sum_parts(f.dom()).1,
        }
    }

    pub fn cod(&self) -> Obj {
        match self.node() {
            Node::Prim(p) => p.cod.clone(),
            Node::Identity(a) => a.clone(),
            Node::Zero(_, b) => b.clone(),
            Node::Inj1(a, b) | Node::Inj2(a, b) => Obj::sum(a.clone(), b.clone()),
            Node::Gamma(a, b) => Obj::sum(b.clone(), a.clone()),
            Node::Compose(g, _) => g.cod(),
            Node::Dagger(f) => f.dom(),
            Node::Join(fs) => fs[0].cod(),
            Node::Oplus(f, g) => Obj::sum(f.cod(), g.cod()),
            Node::Restriction(f) => f.dom(),
            Node::Trace(f) | Node::MetaLoopJoin(f) => sum_parts(f.cod()).0,
        }
    }
}

fn sum_parts(o: Obj) -> (Obj, Obj) {
    match o {
        Obj::Sum(a, b) => (*a, *b),
        Obj::Store => panic!("trace of a morphism whose carrier is not a sum"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EvalResult {
    Value(PointValue),
    Undefined,
    /// The orbit budget ran out; definedness is unknown.
    FuelExhausted,
}

impl EvalResult {
    pub fn value(self) -> Option<PointValue> {
        match self {
            EvalResult::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// Internal outcome: `Err(())` is fuel exhaustion.
type Step = Result<Option<PointValue>, ()>;

/// Point evaluator with a shared orbit-step budget.
///
/// With join checking on, every member of a join is evaluated and any two
/// defined members must agree (a compatibility witness); disagreements are
/// counted in [`Evaluator::join_conflicts`].
pub struct Evaluator {
    fuel: u64,
    check_joins: bool,
    join_conflicts: usize,
    join_overlaps: usize,
}

impl Evaluator {
    pub fn new(fuel: u64) -> Self {
        Evaluator {
            fuel,
            check_joins: false,
            join_conflicts: 0,
            join_overlaps: 0,
        }
    }

    pub fn with_join_check(mut self) -> Self {
        self.check_joins = true;
        self
    }

    pub fn fuel_left(&self) -> u64 {
        self.fuel
    }

    /// Joins where two defined members gave different values.
    pub fn join_conflicts(&self) -> usize {
        self.join_conflicts
    }

    /// Joins where more than one member was defined (with equal values).
    pub fn join_overlaps(&self) -> usize {
        self.join_overlaps
    }

    pub fn apply(&mut self, e: &ArrowExpr, v: &PointValue, dir: Direction) -> EvalResult {
        match self.eval(e, v, dir) {
            Ok(Some(w)) => EvalResult::Value(w),
            Ok(None) => EvalResult::Undefined,
            Err(()) => EvalResult::FuelExhausted,
        }
    }

    fn eval(&mut self, e: &ArrowExpr, v: &PointValue, dir: Direction) -> Step {
        use Direction::*;
        match (e.node(), dir) {
            (Node::Prim(p), Forward) => Ok((p.forward)(v)),
            (Node::Prim(p), Backward) => Ok((p.backward)(v)),
            (Node::Identity(_), _) => Ok(Some(v.clone())),
            (Node::Zero(..), _) => Ok(None),
            (Node::Compose(g, f), Forward) => match self.eval(f, v, Forward)? {
                Some(w) => self.eval(g, &w, Forward),
                None => Ok(None),
            },
            (Node::Compose(g, f), Backward) => match self.eval(g, v, Backward)? {
                Some(w) => self.eval(f, &w, Backward),
                None => Ok(None),
            },
            (Node::Dagger(f), d) => self.eval(f, v, d.flip()),
            (Node::Join(fs), d) => self.eval_join(fs, v, d),
            (Node::Oplus(f, g), d) => Ok(match v {
                Element::Left(x) => self.eval(f, x, d)?.map(Element::left),
                Element::Right(y) => self.eval(g, y, d)?.map(Element::right),
                Element::Store(_) => None,
            }),
            (Node::Inj1(..), Forward) => Ok(Some(Element::left(v.clone()))),
            (Node::Inj2(..), Forward) => Ok(Some(Element::right(v.clone()))),
            (Node::Inj1(..), Backward) => Ok(match v {
                Element::Left(x) => Some((**x).clone()),
                _ => None,
            }),
            (Node::Inj2(..), Backward) => Ok(match v {
                Element::Right(y) => Some((**y).clone()),
                _ => None,
            }),
            (Node::Gamma(..), _) => Ok(match v {
                Element::Left(x) => Some(Element::Right(x.clone())),
                Element::Right(y) => Some(Element::Left(y.clone())),
                Element::Store(_) => None,
            }),
            // restriction idempotents are their own inverses
            (Node::Restriction(f), _) => Ok(self.eval(f, v, Forward)?.map(|_| v.clone())),
            // Tr(f)† = Tr(f†)
            (Node::Trace(f), d) => self.orbit(f, Element::left(v.clone()), d),
            (Node::MetaLoopJoin(f), Forward) => self.orbit(f, Element::right(v.clone()), Forward),
            (Node::MetaLoopJoin(f), Backward) => self.meta_loop_backward(f, v),
        }
    }

    fn eval_join(&mut self, fs: &[ArrowExpr], v: &PointValue, dir: Direction) -> Step {
        let mut found: Option<PointValue> = None;
        for f in fs {
            if let Some(w) = self.eval(f, v, dir)? {
                match &found {
                    None if !self.check_joins => return Ok(Some(w)),
                    None => found = Some(w),
                    Some(prev) => {
                        if *prev == w {
                            self.join_overlaps += 1;
                        } else {
                            self.join_conflicts += 1;
                        }
                    }
                }
            }
        }
        Ok(found)
    }

    fn burn(&mut self) -> Result<(), ()> {
        if self.fuel == 0 {
            return Err(());
        }
        self.fuel -= 1;
        Ok(())
    }

    /// Iterates `f` from `start` until it produces a `Left` value.
    fn orbit(&mut self, f: &ArrowExpr, start: PointValue, dir: Direction) -> Step {
        let mut x = start;
        loop {
            self.burn()?;
            match self.eval(f, &x, dir)? {
                None => return Ok(None),
                Some(Element::Left(b)) => return Ok(Some(*b)),
                Some(r @ Element::Right(_)) => x = r,
                Some(Element::Store(_)) => return Ok(None),
            }
        }
    }

    /// Backward through `⋁ f21 f22ⁿ`: step back from `L(v)` through internal
    /// states for as long as the predecessor is itself internal, and return
    /// the earliest internal state reached.
    fn meta_loop_backward(&mut self, f: &ArrowExpr, v: &PointValue) -> Step {
        self.burn()?;
        let mut u = match self.eval(f, &Element::left(v.clone()), Direction::Backward)? {
            Some(Element::Right(u)) => *u,
            _ => return Ok(None),
        };
        let mut seen = HashSet::new();
        loop {
            if !seen.insert(u.clone()) {
                return Ok(None);
            }
            self.burn()?;
            match self.eval(f, &Element::right(u.clone()), Direction::Backward)? {
                Some(Element::Right(prev)) => u = *prev,
                _ => return Ok(Some(u)),
            }
        }
    }
}

/// Evaluates `e` at `v` with the given orbit budget.
pub fn apply(e: &ArrowExpr, v: &PointValue, dir: Direction, fuel: u64) -> EvalResult {
    Evaluator::new(fuel).apply(e, v, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> PointValue {
        Element::store(v)
    }

    fn inj1() -> ArrowExpr {
        ArrowExpr::inj1(Obj::Store, Obj::Store)
    }

    #[test]
    fn injections_at_points() {
        assert_eq!(
            apply(&inj1(), &s(&[0, 3]), Direction::Forward, 0),
            EvalResult::Value(Element::left(s(&[0, 3])))
        );
        assert_eq!(
            apply(
                &inj1().dagger(),
                &Element::right(s(&[0, 3])),
                Direction::Forward,
                0
            ),
            EvalResult::Undefined
        );
    }

    /// Counter loop on one-slot stores: `L(n) -> R(n)` for n = 0, then
    /// `R(n) -> R(n+1)` until 3, and `R(3) -> L(3)`.
    fn count_to_three() -> ArrowExpr {
        let fwd = |v: &PointValue| match v {
            Element::Left(x) if **x == Element::int(0) => Some(Element::right(Element::int(1))),
            Element::Right(x) => {
                let n = x.as_store()?[0];
                if n == 3 {
                    Some(Element::left(Element::int(3)))
                } else if (1..3).contains(&n) {
                    Some(Element::right(Element::int(n + 1)))
                } else {
                    None
                }
            }
            _ => None,
        };
        let bwd = |v: &PointValue| match v {
            Element::Left(x) if **x == Element::int(3) => Some(Element::right(Element::int(3))),
            Element::Right(x) => {
                let n = x.as_store()?[0];
                if n == 1 {
                    Some(Element::left(Element::int(0)))
                } else if (2..=3).contains(&n) {
                    Some(Element::right(Element::int(n - 1)))
                } else {
                    None
                }
            }
            _ => None,
        };
        ArrowExpr::prim("count", Obj::store_sum(), Obj::store_sum(), fwd, bwd)
    }

    #[test]
    fn trace_runs_orbit_both_ways() {
        let t = count_to_three().trace();
        assert_eq!(
            apply(&t, &Element::int(0), Direction::Forward, 10),
            EvalResult::Value(Element::int(3))
        );
        assert_eq!(
            apply(&t, &Element::int(3), Direction::Backward, 10),
            EvalResult::Value(Element::int(0))
        );
        assert_eq!(
            apply(&t, &Element::int(0), Direction::Forward, 2),
            EvalResult::FuelExhausted
        );
        assert_eq!(
            apply(&t, &Element::int(5), Direction::Forward, 10),
            EvalResult::Undefined
        );
    }

    #[test]
    fn meta_loop_join_enters_inside() {
        let l = count_to_three().meta_loop_join();
        for n in 1..=3 {
            assert_eq!(
                apply(&l, &Element::int(n), Direction::Forward, 10),
                EvalResult::Value(Element::int(3))
            );
        }
        // backward returns the start of the internal chain
        assert_eq!(
            apply(&l, &Element::int(3), Direction::Backward, 10),
            EvalResult::Value(Element::int(1))
        );
    }

    #[test]
    fn join_checking_counts_overlaps_and_conflicts() {
        let id = ArrowExpr::identity(Obj::Store);
        let shift = ArrowExpr::prim(
            "shift",
            Obj::Store,
            Obj::Store,
            |v| v.as_store().map(|x| Element::int(x[0] + 1)),
            |v| v.as_store().map(|x| Element::int(x[0] - 1)),
        );
        let mut ev = Evaluator::new(0).with_join_check();
        let j = ArrowExpr::join(vec![id.clone(), id.clone()]);
        assert_eq!(
            ev.apply(&j, &Element::int(1), Direction::Forward),
            EvalResult::Value(Element::int(1))
        );
        assert_eq!((ev.join_overlaps(), ev.join_conflicts()), (1, 0));
        let bad = ArrowExpr::join(vec![id, shift]);
        ev.apply(&bad, &Element::int(1), Direction::Forward);
        assert_eq!(ev.join_conflicts(), 1);
    }

    #[test]
    fn object_inference() {
        let t = count_to_three().trace();
        assert_eq!(t.dom(), Obj::Store);
        let c = ArrowExpr::compose(ArrowExpr::gamma(Obj::Store, Obj::Store), inj1());
        assert_eq!(c.dom(), Obj::Store);
        assert_eq!(c.cod(), Obj::store_sum());
        assert_eq!(inj1().dagger().dom(), Obj::store_sum());
    }
}
