use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use revflow_core::conformance::{
    enumerate_programs, is_injective, lower_cmd, random_carrier, random_pinj, Domain,
};
use revflow_core::denote::denote_cmd;
use revflow_core::flowchart::{eval_cmd, eval_pred, Cmd, Pred, Store};
use revflow_core::invert::invert_rint_cmd;
use revflow_core::kernel::{
    decision_of, equals, inj1, inj2, join, oplus, oplus_carrier, trace, trace_by_joins,
    PartialInjection,
};
use revflow_core::point::{Direction, EvalResult, Evaluator};
use revflow_core::rint::{
    elem_step, invert_elem, parse, print_cmd, store_value, Model, RintCmd, RintOp, RintPred,
    RintProgram, RintSemantics, VarZero,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pair(seed: u64, max: usize) -> (PartialInjection, PartialInjection) {
    let mut r = rng(seed);
    let (x, y, z) = (
        random_carrier(&mut r, max),
        random_carrier(&mut r, max),
        random_carrier(&mut r, max),
    );
    (random_pinj(&mut r, &x, &y), random_pinj(&mut r, &y, &z))
}

fn op() -> impl Strategy<Value = RintOp> {
    prop_oneof![
        (1..=2usize).prop_map(|i| RintOp::AddVar(i, 3 - i)),
        (1..=2usize).prop_map(|i| RintOp::SubVar(i, 3 - i)),
        (1..=2usize, -3..=3i64).prop_map(|(i, n)| RintOp::AddConst(i, n)),
    ]
}

fn pred() -> impl Strategy<Value = RintPred> {
    let leaf = prop_oneof![
        Just(Pred::True),
        Just(Pred::False),
        (1..=2usize).prop_map(|i| Pred::Elem(VarZero(i))),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Pred::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Pred::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Pred::or(a, b)),
        ]
    })
}

/// Commands whose sequences are right-nested, as the parser builds them.
fn cmd() -> impl Strategy<Value = RintCmd> {
    let leaf = prop_oneof![Just(Cmd::Skip), op().prop_map(Cmd::Atomic)];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| right_seq(a, b)),
            (pred(), inner.clone(), inner.clone(), pred())
                .prop_map(|(p, a, b, q)| Cmd::if_(p, a, b, q)),
            (pred(), inner, pred()).prop_map(|(p, c, q)| Cmd::from_loop(p, c, q)),
        ]
    })
}

fn right_seq(a: RintCmd, b: RintCmd) -> RintCmd {
    match a {
        Cmd::Seq(a1, a2) => Cmd::seq(*a1, right_seq(*a2, b)),
        a => Cmd::seq(a, b),
    }
}

fn corpus() -> &'static [RintProgram] {
    use std::sync::OnceLock;
    static C: OnceLock<Vec<RintProgram>> = OnceLock::new();
    C.get_or_init(|| enumerate_programs(5, 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn restriction_axioms(seed in any::<u64>()) {
        let (f, g) = pair(seed, 7);
        prop_assert_eq!(f.compose(&f.restriction()).unwrap(), f.clone());
        prop_assert_eq!(
            g.restriction().compose(&f).unwrap(),
            f.compose(&g.compose(&f).unwrap().restriction()).unwrap()
        );
        prop_assert_eq!(f.dagger().compose(&f).unwrap(), f.restriction());
        prop_assert_eq!(f.compose(&f.dagger()).unwrap(), f.dagger().restriction());
        prop_assert_eq!(f.dagger().dagger(), f);
    }

    #[test]
    fn decisions_satisfy_their_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, a, b) = (random_carrier(&mut r, 6), random_carrier(&mut r, 6), random_carrier(&mut r, 6));
        let f = random_pinj(&mut r, &x, &oplus_carrier(&a, &b));
        let d = decision_of(&f).unwrap();
        let d1 = join(&[
            inj1(&x, &x).dagger().compose(&d).unwrap(),
            inj2(&x, &x).dagger().compose(&d).unwrap(),
        ]).unwrap();
        prop_assert_eq!(d1, f.restriction());
        prop_assert_eq!(
            oplus(&f, &f).compose(&d).unwrap(),
            oplus(&inj1(&a, &b), &inj2(&a, &b)).compose(&f).unwrap()
        );
    }

    #[test]
    fn trace_formula_and_dagger(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_carrier(&mut r, 5), random_carrier(&mut r, 5));
        let u = revflow_core::kernel::Carrier::ints(100..100 + (seed % 7) as i64);
        let f = random_pinj(&mut r, &oplus_carrier(&a, &u), &oplus_carrier(&b, &u));
        let t = trace(&f).unwrap();
        prop_assert_eq!(&t, &trace_by_joins(&f).unwrap());
        prop_assert!(equals(&t.dagger(), &trace(&f.dagger()).unwrap()).unwrap());
    }

    #[test]
    fn atomic_steps_undo_in_z(op in op(), a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000) {
        let s = Store(vec![a, b]);
        let t = elem_step(&op, &s, Model::Integers).unwrap();
        prop_assert_eq!(elem_step(&invert_elem(&op), &t, Model::Integers), Some(s));
    }

    #[test]
    fn parse_print_round_trip(c in cmd()) {
        let text = print_cmd(&c);
        let back = parse(&text, 2).unwrap();
        prop_assert_eq!(&back.body, &c);
        prop_assert_eq!(print_cmd(&back.body), text);
    }

    #[test]
    fn inversion_is_an_involution(c in cmd()) {
        let inv = invert_rint_cmd(&c).unwrap();
        prop_assert_eq!(invert_rint_cmd(&inv).unwrap(), c);
    }

    #[test]
    fn or_desugars_operationally(p in pred(), a in 0i64..5, b in 0i64..5) {
        let sem = RintSemantics::new(2, Model::Modular(5));
        let s = Store(vec![a, b]);
        prop_assert_eq!(
            eval_pred(&s, &p, &sem).unwrap(),
            eval_pred(&s, &revflow_core::flowchart::desugar_or(&p), &sem).unwrap()
        );
    }

    #[test]
    fn point_round_trip_in_z(i in 0usize..3927, a in -6i64..6, b in -6i64..6) {
        let p = &corpus()[i];
        let sem = RintSemantics::new(2, Model::Integers);
        let e = denote_cmd(&p.body, &sem).unwrap();
        let v = store_value(&Store(vec![a, b]));
        if let EvalResult::Value(w) = Evaluator::new(10_000).apply(&e, &v, Direction::Forward) {
            prop_assert_eq!(
                Evaluator::new(10_000).apply(&e, &w, Direction::Backward),
                EvalResult::Value(v)
            );
        }
    }

    #[test]
    fn point_matches_operational_in_z(c in cmd(), a in -4i64..4, b in -4i64..4) {
        let sem = RintSemantics::new(2, Model::Integers);
        let s = Store(vec![a, b]);
        let op = eval_cmd(&s, &c, &sem, 2_000);
        let e = denote_cmd(&c, &sem).unwrap();
        let den = Evaluator::new(2_000).apply(&e, &store_value(&s), Direction::Forward);
        match (op, den) {
            (Ok(t), EvalResult::Value(w)) => prop_assert_eq!(store_value(&t), w),
            (Err(e), EvalResult::Undefined) => prop_assert!(!e.is_fuel()),
            (Err(e), EvalResult::FuelExhausted) => prop_assert!(e.is_fuel()),
            (Err(e), EvalResult::Value(_)) => prop_assert!(e.is_fuel(), "{}", e),
            (Ok(_), EvalResult::Undefined) => prop_assert!(false, "denotation undefined where a run converged"),
            (Ok(_), EvalResult::FuelExhausted) => {}
        }
    }
}

#[test]
fn point_matches_lowered_graph_on_corpus() {
    let d = Domain::new(2, 5);
    let sem = d.semantics();
    for p in corpus().iter().step_by(7) {
        let m = lower_cmd(&p.body, &d).unwrap();
        let e = denote_cmd(&p.body, &sem).unwrap();
        for s in d.stores() {
            let v = store_value(s);
            let mut ev = Evaluator::new(10_000).with_join_check();
            let got = ev.apply(&e, &v, Direction::Forward).value();
            assert_eq!(got.as_ref(), m.apply(&v), "{p} at {s}");
            assert_eq!(ev.join_conflicts(), 0, "{p} at {s}");
        }
    }
}

#[test]
fn corpus_denotations_are_injective_and_runs_backward_deterministic() {
    let d = Domain::new(2, 5);
    let sem = d.semantics();
    for p in corpus() {
        assert!(is_injective(&lower_cmd(&p.body, &d).unwrap()), "{p}");
        let mut seen = std::collections::BTreeMap::new();
        for s in d.stores() {
            if let Ok(t) = eval_cmd(s, &p.body, &sem, 10_000) {
                assert!(seen.insert(t, s.clone()).is_none(), "{p}");
            }
        }
    }
}

#[test]
fn evaluation_does_not_depend_on_point_join_checks() {
    let d = Domain::new(2, 5);
    let sem = d.semantics();
    let p = parse(
        "if x1 and x2 then x1 += 1 else skip fi not x1 and x2 or ff",
        2,
    )
    .unwrap();
    let e = denote_cmd(&p.body, &sem).unwrap();
    for s in d.stores() {
        let v = store_value(s);
        let plain = Evaluator::new(100).apply(&e, &v, Direction::Forward);
        let mut checked = Evaluator::new(100).with_join_check();
        assert_eq!(checked.apply(&e, &v, Direction::Forward), plain);
        assert_eq!(checked.join_conflicts(), 0);
    }
}
