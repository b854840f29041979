//! Disjointness tensor, decisions and the trace.

use std::collections::{BTreeMap, BTreeSet};

use super::{disjoint_join, Carrier, Element, KernelError, PartialInjection};

/// The object `a ⊕ b`: left elements tagged `L`, right elements tagged `R`.
pub fn oplus_carrier(a: &Carrier, b: &Carrier) -> Carrier {
    Carrier::new(
        a.iter()
            .map(|x| Element::left(x.clone()))
            .chain(b.iter().map(|y| Element::right(y.clone()))),
    )
}

/// `f ⊕ g`, acting componentwise on tagged elements.
pub fn oplus(f: &PartialInjection, g: &PartialInjection) -> PartialInjection {
    let graph = f
        .graph()
        .iter()
        .map(|(x, y)| (Element::left(x.clone()), Element::left(y.clone())))
        .chain(
            g.graph()
                .iter()
                .map(|(x, y)| (Element::right(x.clone()), Element::right(y.clone()))),
        )
        .collect();
    PartialInjection::from_graph_unchecked(
        oplus_carrier(f.dom(), g.dom()),
        oplus_carrier(f.cod(), g.cod()),
        graph,
    )
}

/// First quasi-injection `a -> a ⊕ b`.
pub fn inj1(a: &Carrier, b: &Carrier) -> PartialInjection {
    let graph = a
        .iter()
        .map(|x| (x.clone(), Element::left(x.clone())))
        .collect();
    PartialInjection::from_graph_unchecked(a.clone(), oplus_carrier(a, b), graph)
}

/// Second quasi-injection `b -> a ⊕ b`.
pub fn inj2(a: &Carrier, b: &Carrier) -> PartialInjection {
    let graph = b
        .iter()
        .map(|y| (y.clone(), Element::right(y.clone())))
        .collect();
    PartialInjection::from_graph_unchecked(b.clone(), oplus_carrier(a, b), graph)
}

/// Symmetry `a ⊕ b -> b ⊕ a`.
pub fn gamma(a: &Carrier, b: &Carrier) -> PartialInjection {
    let graph = a
        .iter()
        .map(|x| (Element::left(x.clone()), Element::right(x.clone())))
        .chain(
            b.iter()
                .map(|y| (Element::right(y.clone()), Element::left(y.clone()))),
        )
        .collect();
    PartialInjection::from_graph_unchecked(oplus_carrier(a, b), oplus_carrier(b, a), graph)
}

/// The unique decision of `f : a -> b ⊕ c`: tags each input with the side
/// `f` sends it to.
pub fn decision_of(f: &PartialInjection) -> Result<PartialInjection, KernelError> {
    f.cod().split_sum()?;
    let graph = f
        .graph()
        .iter()
        .map(|(x, y)| {
            let tagged = match y {
                Element::Left(_) => Element::left(x.clone()),
                Element::Right(_) => Element::right(x.clone()),
                Element::Store(_) => unreachable!("codomain was checked to be a sum"),
            };
            (x.clone(), tagged)
        })
        .collect();
    Ok(PartialInjection::from_graph_unchecked(
        f.dom().clone(),
        oplus_carrier(f.dom(), f.dom()),
        graph,
    ))
}

struct TraceShape {
    a: Carrier,
    b: Carrier,
    u: Carrier,
}

fn trace_shape(f: &PartialInjection) -> Result<TraceShape, KernelError> {
    let (a, u) = f
        .dom()
        .split_sum()
        .map_err(|_| KernelError::ShapeMismatch("domain is not a sum"))?;
    let (b, u2) = f
        .cod()
        .split_sum()
        .map_err(|_| KernelError::ShapeMismatch("codomain is not a sum"))?;
    if u != u2 {
        return Err(KernelError::ShapeMismatch(
            "internal components of domain and codomain differ",
        ));
    }
    Ok(TraceShape { a, b, u })
}

/// Follows `f` from `start` through `R(_)` states until it leaves on the
/// left. A revisited internal state means no finite unrolling exits.
fn orbit(f: &PartialInjection, start: Element) -> Option<Element> {
    let mut visited = BTreeSet::new();
    let mut x = f.apply(&start)?.clone();
    loop {
        match x {
            Element::Left(b) => return Some(*b),
            Element::Right(u) => {
                if !visited.insert(u.clone()) {
                    return None;
                }
                x = f.apply(&Element::Right(u))?.clone();
            }
            Element::Store(_) => unreachable!("codomain was checked to be a sum"),
        }
    }
}

/// The trace `Tr(f) : a -> b` of `f : a ⊕ u -> b ⊕ u`, computed by running
/// each input's orbit to its exit.
pub fn trace(f: &PartialInjection) -> Result<PartialInjection, KernelError> {
    let shape = trace_shape(f)?;
    let graph = shape
        .a
        .iter()
        .filter_map(|x| orbit(f, Element::left(x.clone())).map(|y| (x.clone(), y)))
        .collect();
    Ok(PartialInjection::from_graph_unchecked(
        shape.a, shape.b, graph,
    ))
}

/// The four blocks of `f : a ⊕ u -> b ⊕ u`.
#[derive(Clone, Debug)]
pub struct TraceParts {
    /// `a -> b`, leaving without a loop step.
    pub direct: PartialInjection,
    /// `a -> u`, entering the loop.
    pub enter: PartialInjection,
    /// `u -> b`, leaving the loop.
    pub exit: PartialInjection,
    /// `u -> u`, one more loop step.
    pub step: PartialInjection,
}

pub fn trace_components(f: &PartialInjection) -> Result<TraceParts, KernelError> {
    let s = trace_shape(f)?;
    let in1 = inj1(&s.a, &s.u);
    let in2 = inj2(&s.a, &s.u);
    let out1 = inj1(&s.b, &s.u).dagger();
    let out2 = inj2(&s.b, &s.u).dagger();
    Ok(TraceParts {
        direct: out1.compose(&f.compose(&in1)?)?,
        enter: out2.compose(&f.compose(&in1)?)?,
        exit: out1.compose(&f.compose(&in2)?)?,
        step: out2.compose(&f.compose(&in2)?)?,
    })
}

/// The trace as the join of `direct` and every `exit ∘ stepⁿ ∘ enter`,
/// truncated at `n = |u|` (no exit path can be longer without revisiting a
/// state).
pub fn trace_by_joins(f: &PartialInjection) -> Result<PartialInjection, KernelError> {
    let parts = trace_components(f)?;
    let n_max = parts.step.dom().len();
    let mut terms = vec![parts.direct];
    let mut iter = parts.enter;
    for _ in 0..=n_max {
        terms.push(parts.exit.compose(&iter)?);
        iter = parts.step.compose(&iter)?;
    }
    disjoint_join(&terms)
}

/// The graph of the join of every `exit ∘ stepⁿ : u -> b`, entering at `R(u)`.
///
/// This is a partial function but need not be injective: two internal states
/// on the same orbit exit at the same point.
pub fn loop_orbit(
    f: &PartialInjection,
) -> Result<(Carrier, Carrier, BTreeMap<Element, Element>), KernelError> {
    let shape = trace_shape(f)?;
    let graph = shape
        .u
        .iter()
        .filter_map(|u| orbit(f, Element::right(u.clone())).map(|b| (u.clone(), b)))
        .collect();
    Ok((shape.u, shape.b, graph))
}

/// [`loop_orbit`] as a morphism; fails when the orbit map is not injective.
pub fn loop_join(f: &PartialInjection) -> Result<PartialInjection, KernelError> {
    let (u, b, graph) = loop_orbit(f)?;
    PartialInjection::new(u, b, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::equals;

    fn e(n: i64) -> Element {
        Element::int(n)
    }

    #[test]
    fn tensor_examples() {
        let a = Carrier::ints([1, 2]);
        let id = PartialInjection::identity(&a);
        assert_eq!(
            oplus(&id, &id),
            PartialInjection::identity(&oplus_carrier(&a, &a))
        );

        let f = PartialInjection::new(a.clone(), a.clone(), [(e(1), e(2))]).unwrap();
        let z = PartialInjection::zero(&a, &a);
        assert_eq!(oplus(&f, &z).to_string(), "{L(1) -> L(2)}");
    }

    #[test]
    fn injections_and_gamma() {
        let a = Carrier::ints([1]);
        let b = Carrier::ints([2]);
        assert_eq!(inj1(&a, &b).to_string(), "{1 -> L(1)}");
        assert!(inj2(&a, &b)
            .dagger()
            .compose(&inj1(&a, &b))
            .unwrap()
            .is_zero());
        assert_eq!(gamma(&a, &b).compose(&inj1(&a, &b)).unwrap(), inj2(&b, &a));
        assert!(gamma(&a, &b).is_total());
    }

    #[test]
    fn decision_examples() {
        let a = Carrier::ints([1, 2, 3]);
        let cod = oplus_carrier(&Carrier::ints([10]), &Carrier::ints([20]));
        let f = PartialInjection::new(
            a.clone(),
            cod,
            [(e(1), Element::left(e(10))), (e(2), Element::right(e(20)))],
        )
        .unwrap();
        assert_eq!(
            decision_of(&f).unwrap().to_string(),
            "{1 -> L(1), 2 -> R(2)}"
        );

        let i1 = inj1(&a, &a);
        assert_eq!(decision_of(&i1).unwrap(), i1);

        let zero = PartialInjection::zero(&a, &oplus_carrier(&a, &a));
        assert!(decision_of(&zero).unwrap().is_zero());

        let not_sum = PartialInjection::identity(&a);
        assert_eq!(decision_of(&not_sum), Err(KernelError::NotASum));
    }

    fn loop_shape() -> (Carrier, Carrier) {
        let a = Carrier::ints([0, 1]);
        let u = Carrier::ints([10, 11]);
        (oplus_carrier(&a, &u), oplus_carrier(&a, &u))
    }

    #[test]
    fn trace_through_internal_states() {
        let (dom, cod) = loop_shape();
        let f = PartialInjection::new(
            dom,
            cod,
            [
                (Element::left(e(0)), Element::right(e(10))),
                (Element::right(e(10)), Element::right(e(11))),
                (Element::right(e(11)), Element::left(e(1))),
            ],
        )
        .unwrap();
        let t = trace(&f).unwrap();
        assert_eq!(t.to_string(), "{0 -> 1}");
        assert_eq!(trace_by_joins(&f).unwrap(), t);
    }

    #[test]
    fn trace_direct_exit() {
        let (dom, cod) = loop_shape();
        let f =
            PartialInjection::new(dom, cod, [(Element::left(e(0)), Element::left(e(1)))]).unwrap();
        assert_eq!(trace(&f).unwrap().to_string(), "{0 -> 1}");
    }

    #[test]
    fn trace_stuck_orbit_is_undefined() {
        // injectivity means an orbit entered from the left can never cycle;
        // it either exits or gets stuck
        let (dom, cod) = loop_shape();
        let f = PartialInjection::new(
            dom,
            cod,
            [
                (Element::left(e(0)), Element::right(e(10))),
                (Element::right(e(10)), Element::right(e(11))),
            ],
        )
        .unwrap();
        let t = trace(&f).unwrap();
        assert!(t.apply(&e(0)).is_none());
        assert_eq!(trace_by_joins(&f).unwrap(), t);
        assert!(equals(&trace(&f.dagger()).unwrap(), &t.dagger()).unwrap());
    }

    #[test]
    fn trace_rejects_bad_shape() {
        let a = Carrier::ints([1]);
        let f = PartialInjection::identity(&a);
        assert!(matches!(trace(&f), Err(KernelError::ShapeMismatch(_))));
        let g = PartialInjection::zero(
            &oplus_carrier(&a, &a),
            &oplus_carrier(&a, &Carrier::ints([2])),
        );
        assert!(matches!(trace(&g), Err(KernelError::ShapeMismatch(_))));
    }

    #[test]
    fn loop_join_can_be_non_injective() {
        let (dom, cod) = loop_shape();
        let f = PartialInjection::new(
            dom,
            cod,
            [
                (Element::right(e(10)), Element::right(e(11))),
                (Element::right(e(11)), Element::left(e(1))),
            ],
        )
        .unwrap();
        let (_, _, graph) = loop_orbit(&f).unwrap();
        assert_eq!(graph.len(), 2);
        assert!(matches!(
            loop_join(&f),
            Err(KernelError::NotInjective { .. })
        ));
    }
}
