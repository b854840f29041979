//! Extensional partial injections over finite carriers.
//!
//! This is the category of sets and partial injective functions, cut down to
//! finite sets so that composition, joins, traces and equality are all exact.
//! Objects are [`Carrier`]s, morphisms are [`PartialInjection`]s, and the
//! disjointness tensor is the tagged union built by [`oplus_carrier`].

mod tensor;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use tensor::{
    decision_of, gamma, inj1, inj2, loop_join, loop_orbit, oplus, oplus_carrier, trace,
    trace_by_joins, trace_components, TraceParts,
};

/// Errors raised by kernel operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("carrier mismatch in {op}")]
    CarrierMismatch { op: &'static str },
    #[error("element {0} is not in the domain carrier")]
    NotInDomain(Element),
    #[error("element {0} is not in the codomain carrier")]
    NotInCodomain(Element),
    #[error("graph is not injective: {value} has two preimages")]
    NotInjective { value: Element },
    #[error("incompatible join: {reason}")]
    IncompatibleJoin { reason: String },
    #[error("join members are not disjoint: {reason}")]
    NotDisjoint { reason: String },
    #[error("empty join has no carriers")]
    EmptyJoin,
    #[error("carrier is not a tagged sum")]
    NotASum,
    #[error("trace shape mismatch: {0}")]
    ShapeMismatch(&'static str),
    #[error("trace cross-check failed: orbit and join formula disagree")]
    TraceMismatch,
}

/// A point of a carrier: an integer tuple or a tagged component of a sum.
///
/// The derived ordering is the canonical one: tuples first (lexicographic),
/// then `Left`, then `Right`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Store(Vec<i64>),
    Left(Box<Element>),
    Right(Box<Element>),
}

impl Element {
    /// A one-slot tuple, printed as a bare integer.
    pub fn int(n: i64) -> Self {
        Element::Store(vec![n])
    }

    pub fn store(values: &[i64]) -> Self {
        Element::Store(values.to_vec())
    }

    pub fn left(e: Element) -> Self {
        Element::Left(Box::new(e))
    }

    pub fn right(e: Element) -> Self {
        Element::Right(Box::new(e))
    }

    pub fn as_store(&self) -> Option<&[i64]> {
        match self {
            Element::Store(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_tagged(&self) -> bool {
        !matches!(self, Element::Store(_))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Store(v) if v.len() == 1 => write!(f, "{}", v[0]),
            Element::Store(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Element::Left(e) => write!(f, "L({e})"),
            Element::Right(e) => write!(f, "R({e})"),
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite object: a canonically ordered set of distinct elements.
#[derive(Clone)]
pub struct Carrier(Arc<[Element]>);

impl Carrier {
    pub fn empty() -> Self {
        Carrier(Arc::from(Vec::new()))
    }

    /// Builds a carrier from elements, sorting and dropping duplicates.
    pub fn new(elements: impl IntoIterator<Item = Element>) -> Self {
        let mut v: Vec<Element> = elements.into_iter().collect();
        v.sort();
        v.dedup();
        Carrier(Arc::from(v))
    }

    /// Carrier of one-slot integers.
    pub fn ints(values: impl IntoIterator<Item = i64>) -> Self {
        Carrier::new(values.into_iter().map(Element::int))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.0.binary_search(e).is_ok()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Element> + '_ {
        self.0.iter()
    }

    pub fn elements(&self) -> &[Element] {
        &self.0
    }

    /// Splits a sum carrier `A ⊕ B` into its components.
    pub fn split_sum(&self) -> Result<(Carrier, Carrier), KernelError> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for e in self.iter() {
            match e {
                Element::Left(x) => left.push((**x).clone()),
                Element::Right(x) => right.push((**x).clone()),
                Element::Store(_) => return Err(KernelError::NotASum),
            }
        }
        Ok((Carrier::new(left), Carrier::new(right)))
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Carrier {}

impl fmt::Debug for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A partial injective function between two finite carriers.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialInjection {
    dom: Carrier,
    cod: Carrier,
    graph: BTreeMap<Element, Element>,
}

impl PartialInjection {
    /// Validates and builds a morphism from its graph.
    pub fn new(
        dom: Carrier,
        cod: Carrier,
        pairs: impl IntoIterator<Item = (Element, Element)>,
    ) -> Result<Self, KernelError> {
        let mut graph = BTreeMap::new();
        let mut seen = BTreeMap::new();
        for (x, y) in pairs {
            if !dom.contains(&x) {
                return Err(KernelError::NotInDomain(x));
            }
            if !cod.contains(&y) {
                return Err(KernelError::NotInCodomain(y));
            }
            if let Some(prev) = seen.insert(y.clone(), x.clone()) {
                if prev != x {
                    return Err(KernelError::NotInjective { value: y });
                }
            }
            if let Some(old) = graph.insert(x.clone(), y.clone()) {
                if old != y {
                    return Err(KernelError::NotInjective { value: y });
                }
            }
        }
        Ok(PartialInjection { dom, cod, graph })
    }

    /// Builds a morphism whose graph is known to be valid.
    pub(crate) fn from_graph_unchecked(
        dom: Carrier,
        cod: Carrier,
        graph: BTreeMap<Element, Element>,
    ) -> Self {
        debug_assert!(graph.keys().all(|k| dom.contains(k)));
        debug_assert!(graph.values().all(|v| cod.contains(v)));
        PartialInjection { dom, cod, graph }
    }

    pub fn dom(&self) -> &Carrier {
        &self.dom
    }

    pub fn cod(&self) -> &Carrier {
        &self.cod
    }

    pub fn graph(&self) -> &BTreeMap<Element, Element> {
        &self.graph
    }

    pub fn apply(&self, x: &Element) -> Option<&Element> {
        self.graph.get(x)
    }

    pub fn is_total(&self) -> bool {
        self.graph.len() == self.dom.len()
    }

    pub fn is_zero(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn identity(a: &Carrier) -> Self {
        let graph = a.iter().map(|x| (x.clone(), x.clone())).collect();
        PartialInjection::from_graph_unchecked(a.clone(), a.clone(), graph)
    }

    /// The nowhere-defined map `a -> b`.
    pub fn zero(a: &Carrier, b: &Carrier) -> Self {
        PartialInjection::from_graph_unchecked(a.clone(), b.clone(), BTreeMap::new())
    }

    /// `self ∘ f`: apply `f` first, then `self`.
    pub fn compose(&self, f: &PartialInjection) -> Result<Self, KernelError> {
        if f.cod != self.dom {
            return Err(KernelError::CarrierMismatch { op: "compose" });
        }
        let graph = f
            .graph
            .iter()
            .filter_map(|(x, y)| self.graph.get(y).map(|z| (x.clone(), z.clone())))
            .collect();
        Ok(PartialInjection::from_graph_unchecked(
            f.dom.clone(),
            self.cod.clone(),
            graph,
        ))
    }

    /// The partial inverse.
    pub fn dagger(&self) -> Self {
        let graph = self
            .graph
            .iter()
            .map(|(x, y)| (y.clone(), x.clone()))
            .collect();
        PartialInjection::from_graph_unchecked(self.cod.clone(), self.dom.clone(), graph)
    }

    /// The partial identity defined exactly where `self` is.
    pub fn restriction(&self) -> Self {
        let graph = self.graph.keys().map(|x| (x.clone(), x.clone())).collect();
        PartialInjection::from_graph_unchecked(self.dom.clone(), self.dom.clone(), graph)
    }

    fn check_parallel(&self, g: &PartialInjection, op: &'static str) -> Result<(), KernelError> {
        if self.dom != g.dom || self.cod != g.cod {
            return Err(KernelError::CarrierMismatch { op });
        }
        Ok(())
    }

    /// `self ≤ g` iff `g ∘ r̄(self) = self`.
    pub fn leq(&self, g: &PartialInjection) -> Result<bool, KernelError> {
        self.check_parallel(g, "leq")?;
        Ok(g.compose(&self.restriction())? == *self)
    }

    /// Compatibility in the inverse-category sense: the maps agree where both
    /// are defined, and so do their daggers.
    pub fn compatible(&self, g: &PartialInjection) -> Result<bool, KernelError> {
        self.check_parallel(g, "compatible")?;
        let fwd = self.compose(&g.restriction())? == g.compose(&self.restriction())?;
        let (fd, gd) = (self.dagger(), g.dagger());
        let bwd = fd.compose(&gd.restriction())? == gd.compose(&fd.restriction())?;
        Ok(fwd && bwd)
    }

    /// Disjointness in the inverse-category sense: `f r̄g = 0` and
    /// `f† r̄(g†) = 0`.
    pub fn disjoint(&self, g: &PartialInjection) -> Result<bool, KernelError> {
        self.check_parallel(g, "disjoint")?;
        let fwd = self.compose(&g.restriction())?.is_zero();
        let bwd = self.dagger().compose(&g.dagger().restriction())?.is_zero();
        Ok(fwd && bwd)
    }
}

impl fmt::Display for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, y)) in self.graph.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} -> {y}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PartialInjection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Extensional equality of parallel morphisms.
pub fn equals(f: &PartialInjection, g: &PartialInjection) -> Result<bool, KernelError> {
    f.check_parallel(g, "equals")?;
    Ok(f.graph == g.graph)
}

/// Join of pairwise compatible parallel maps: the union of their graphs.
pub fn join(fs: &[PartialInjection]) -> Result<PartialInjection, KernelError> {
    let first = fs.first().ok_or(KernelError::EmptyJoin)?;
    let mut graph: BTreeMap<Element, Element> = BTreeMap::new();
    let mut inverse: BTreeMap<&Element, &Element> = BTreeMap::new();
    for f in fs {
        first.check_parallel(f, "join")?;
        for (x, y) in &f.graph {
            if let Some(old) = graph.get(x) {
                if old != y {
                    return Err(KernelError::IncompatibleJoin {
                        reason: format!("{x} maps to both {old} and {y}"),
                    });
                }
                continue;
            }
            if let Some(&prev) = inverse.get(y) {
                if prev != x {
                    return Err(KernelError::IncompatibleJoin {
                        reason: format!("{prev} and {x} both map to {y}"),
                    });
                }
            }
            inverse.insert(y, x);
            graph.insert(x.clone(), y.clone());
        }
    }
    Ok(PartialInjection::from_graph_unchecked(
        first.dom.clone(),
        first.cod.clone(),
        graph,
    ))
}

/// Join that additionally insists the members are pairwise disjoint.
pub fn disjoint_join(fs: &[PartialInjection]) -> Result<PartialInjection, KernelError> {
    let first = fs.first().ok_or(KernelError::EmptyJoin)?;
    let mut graph = BTreeMap::new();
    let mut image = BTreeMap::new();
    for f in fs {
        first.check_parallel(f, "disjoint_join")?;
        for (x, y) in &f.graph {
            if graph.insert(x.clone(), y.clone()).is_some() {
                return Err(KernelError::NotDisjoint {
                    reason: format!("two members are defined at {x}"),
                });
            }
            if image.insert(y.clone(), ()).is_some() {
                return Err(KernelError::NotDisjoint {
                    reason: format!("two members reach {y}"),
                });
            }
        }
    }
    Ok(PartialInjection::from_graph_unchecked(
        first.dom.clone(),
        first.cod.clone(),
        graph,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi(dom: &Carrier, cod: &Carrier, pairs: &[(i64, i64)]) -> PartialInjection {
        PartialInjection::new(
            dom.clone(),
            cod.clone(),
            pairs
                .iter()
                .map(|&(x, y)| (Element::int(x), Element::int(y))),
        )
        .unwrap()
    }

    fn c123() -> Carrier {
        Carrier::ints([1, 2, 3, 4])
    }

    #[test]
    fn identity_examples() {
        let a = Carrier::ints([1, 2]);
        assert_eq!(
            PartialInjection::identity(&a).to_string(),
            "{1 -> 1, 2 -> 2}"
        );
        assert_eq!(
            PartialInjection::identity(&Carrier::empty()).to_string(),
            "{}"
        );
        let s = Carrier::new([Element::store(&[0, 0])]);
        assert_eq!(
            PartialInjection::identity(&s).to_string(),
            "{(0,0) -> (0,0)}"
        );
    }

    #[test]
    fn zero_examples() {
        let a = Carrier::ints([1]);
        let b = Carrier::ints([2]);
        let z = PartialInjection::zero(&a, &b);
        assert!(z.is_zero());
        assert_eq!(z.restriction(), PartialInjection::zero(&a, &a));
        let f = pi(&a, &b, &[(1, 2)]);
        assert_eq!(
            f.compose(&PartialInjection::zero(&a, &a)).unwrap(),
            PartialInjection::zero(&a, &b)
        );
    }

    #[test]
    fn compose_examples() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2)]);
        let g = pi(&c, &c, &[(2, 3)]);
        assert_eq!(g.compose(&f).unwrap(), pi(&c, &c, &[(1, 3)]));
        assert_eq!(PartialInjection::identity(&c).compose(&f).unwrap(), f);

        let c3 = Carrier::ints([1, 2, 3]);
        let f = pi(&c3, &c3, &[(1, 2), (2, 1)]);
        let g = pi(&c3, &c3, &[(1, 1)]);
        // pointwise: x=1 -> 2 -> undefined; x=2 -> 1 -> 1; x=3 undefined
        assert_eq!(g.compose(&f).unwrap(), pi(&c3, &c3, &[(2, 1)]));
    }

    #[test]
    fn compose_rejects_mismatched_carriers() {
        let f = pi(&Carrier::ints([1]), &Carrier::ints([2]), &[(1, 2)]);
        let g = pi(&Carrier::ints([3]), &Carrier::ints([3]), &[]);
        assert!(matches!(
            g.compose(&f),
            Err(KernelError::CarrierMismatch { .. })
        ));
    }

    #[test]
    fn dagger_examples() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2), (3, 1)]);
        assert_eq!(f.dagger(), pi(&c, &c, &[(2, 1), (1, 3)]));
        assert_eq!(f.dagger().dagger(), f);
        assert_eq!(
            f.dagger().compose(&f).unwrap(),
            pi(&c, &c, &[(1, 1), (3, 3)])
        );
    }

    #[test]
    fn restriction_examples() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2), (3, 1)]);
        assert_eq!(f.restriction(), pi(&c, &c, &[(1, 1), (3, 3)]));
        let id = PartialInjection::identity(&c);
        assert_eq!(id.restriction(), id);
        let z = PartialInjection::zero(&c, &c);
        assert_eq!(z.restriction(), z);
    }

    #[test]
    fn order_and_compatibility() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2)]);
        let g = pi(&c, &c, &[(1, 2), (3, 4)]);
        assert!(f.leq(&g).unwrap());
        assert!(!g.leq(&f).unwrap());

        let h = pi(&c, &c, &[(1, 3)]);
        assert!(!f.compatible(&h).unwrap());
        assert!(!f.disjoint(&h).unwrap());

        let k = pi(&c, &c, &[(3, 2)]);
        assert!(!f.disjoint(&k).unwrap());
        assert!(!f.compatible(&k).unwrap());

        let d = pi(&c, &c, &[(3, 4)]);
        assert!(f.disjoint(&d).unwrap());
        assert!(f.compatible(&d).unwrap());
    }

    #[test]
    fn join_examples() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2)]);
        let g = pi(&c, &c, &[(3, 4)]);
        assert_eq!(
            join(&[f.clone(), g]).unwrap(),
            pi(&c, &c, &[(1, 2), (3, 4)])
        );
        let key_conflict = pi(&c, &c, &[(1, 3)]);
        assert!(matches!(
            join(&[f.clone(), key_conflict]),
            Err(KernelError::IncompatibleJoin { .. })
        ));
        let value_conflict = pi(&c, &c, &[(3, 2)]);
        assert!(matches!(
            join(&[f.clone(), value_conflict]),
            Err(KernelError::IncompatibleJoin { .. })
        ));
        // overlapping but compatible members are fine for join, not for disjoint_join
        assert_eq!(join(&[f.clone(), f.clone()]).unwrap(), f);
        assert!(matches!(
            disjoint_join(&[f.clone(), f]),
            Err(KernelError::NotDisjoint { .. })
        ));
        assert_eq!(join(&[]), Err(KernelError::EmptyJoin));
    }

    #[test]
    fn new_rejects_bad_graphs() {
        let c = Carrier::ints([1, 2]);
        let err = PartialInjection::new(
            c.clone(),
            c.clone(),
            [
                (Element::int(1), Element::int(2)),
                (Element::int(2), Element::int(2)),
            ],
        );
        assert!(matches!(err, Err(KernelError::NotInjective { .. })));
        let err = PartialInjection::new(c.clone(), c, [(Element::int(9), Element::int(2))]);
        assert!(matches!(err, Err(KernelError::NotInDomain(_))));
    }

    #[test]
    fn equals_examples() {
        let c = c123();
        let f = pi(&c, &c, &[(1, 2)]);
        assert!(equals(&f, &f).unwrap());
        assert!(!equals(&f, &pi(&c, &c, &[(1, 2), (3, 4)])).unwrap());
    }

    #[test]
    fn canonical_element_order_and_printing() {
        let c = Carrier::new([
            Element::right(Element::int(1)),
            Element::left(Element::int(2)),
            Element::store(&[0, 3]),
            Element::left(Element::int(1)),
        ]);
        let printed: Vec<String> = c.iter().map(|e| e.to_string()).collect();
        assert_eq!(printed, ["(0,3)", "L(1)", "L(2)", "R(1)"]);
    }
}
