//! Randomized checks of the inverse-category laws on the finite kernel.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kernel::{
    self, decision_of, equals, oplus, oplus_carrier, trace, trace_by_joins, Carrier, Element,
    KernelError, PartialInjection,
};

pub type JoinFn = fn(&[PartialInjection]) -> Result<PartialInjection, KernelError>;

#[derive(Clone, Debug)]
pub struct AxiomConfig {
    pub seed: u64,
    pub cases: usize,
    pub carrier_max: usize,
    /// Join used by every join law; swapped out by the mutation test.
    pub join: JoinFn,
}

impl AxiomConfig {
    pub fn new(seed: u64, cases: usize, carrier_max: usize) -> Self {
        AxiomConfig {
            seed,
            cases,
            carrier_max,
            join: kernel::join,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub law: String,
    pub case: usize,
    /// Seed that regenerates this case alone.
    pub case_seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub seed: u64,
    pub cases: usize,
    pub carrier_max: usize,
    pub checks: usize,
    /// Number of evaluations of each law.
    pub laws: BTreeMap<String, usize>,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn case_seed(seed: u64, case: usize) -> u64 {
    seed ^ (case as u64)
        .wrapping_add(1)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn random_carrier(rng: &mut impl Rng, max: usize) -> Carrier {
    Carrier::ints(0..rng.gen_range(0..=max) as i64)
}

/// Uniformly sized random partial matching between `dom` and `cod`.
pub fn random_pinj(rng: &mut impl Rng, dom: &Carrier, cod: &Carrier) -> PartialInjection {
    let mut xs = dom.elements().to_vec();
    let mut ys = cod.elements().to_vec();
    xs.shuffle(rng);
    ys.shuffle(rng);
    let r = rng.gen_range(0..=xs.len().min(ys.len()));
    PartialInjection::new(dom.clone(), cod.clone(), xs.into_iter().zip(ys).take(r))
        .expect("a matching is injective")
}

fn random_total(rng: &mut impl Rng, dom: &Carrier, cod: &Carrier) -> Option<PartialInjection> {
    if dom.len() > cod.len() {
        return None;
    }
    let mut ys = cod.elements().to_vec();
    ys.shuffle(rng);
    Some(
        PartialInjection::new(dom.clone(), cod.clone(), dom.iter().cloned().zip(ys))
            .expect("a matching is injective"),
    )
}

fn random_idempotent(rng: &mut impl Rng, a: &Carrier) -> PartialInjection {
    let pairs: Vec<_> = a
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|x| (x.clone(), x.clone()))
        .collect();
    PartialInjection::new(a.clone(), a.clone(), pairs).expect("partial identity")
}

/// Splits `parent` into `n` restrictions with pairwise disjoint domains.
fn random_partition(
    rng: &mut impl Rng,
    parent: &PartialInjection,
    n: usize,
) -> Vec<PartialInjection> {
    let mut parts = vec![Vec::new(); n];
    for (x, y) in parent.graph() {
        parts[rng.gen_range(0..n)].push((x.clone(), y.clone()));
    }
    parts
        .into_iter()
        .map(|g| PartialInjection::new(parent.dom().clone(), parent.cod().clone(), g).unwrap())
        .collect()
}

struct Checker<'a> {
    cfg: &'a AxiomConfig,
    report: &'a mut AxiomReport,
    case: usize,
    case_seed: u64,
}

impl Checker<'_> {
    fn law(&mut self, name: &str, check: impl FnOnce() -> Result<bool, KernelError>) {
        self.report.checks += 1;
        *self.report.laws.entry(name.to_string()).or_default() += 1;
        let detail = match check() {
            Ok(true) => return,
            Ok(false) => "equation does not hold".to_string(),
            Err(e) => format!("kernel error: {e}"),
        };
        self.report.violations.push(AxiomViolation {
            law: name.to_string(),
            case: self.case,
            case_seed: self.case_seed,
            detail,
        });
    }
}

type R = Result<bool, KernelError>;

fn eq(a: &PartialInjection, b: &PartialInjection) -> R {
    equals(a, b)
}

fn restriction_laws(c: &mut Checker, rng: &mut ChaCha8Rng, max: usize) {
    let (x, y, z) = (
        random_carrier(rng, max),
        random_carrier(rng, max),
        random_carrier(rng, max),
    );
    let f = random_pinj(rng, &x, &y);
    let g = random_pinj(rng, &y, &z);
    let h = random_pinj(rng, &x, &z);

    c.law("restriction is a right unit", || {
        eq(&f.compose(&f.restriction())?, &f)
    });
    c.law("restriction idempotents commute", || {
        eq(
            &h.restriction().compose(&f.restriction())?,
            &f.restriction().compose(&h.restriction())?,
        )
    });
    c.law("restriction of a restricted map", || {
        eq(
            &f.compose(&h.restriction())?.restriction(),
            &f.restriction().compose(&h.restriction())?,
        )
    });
    c.law("restriction slides along composition", || {
        eq(
            &g.restriction().compose(&f)?,
            &f.compose(&g.compose(&f)?.restriction())?,
        )
    });

    let gf = || g.compose(&f);
    c.law("identity is its own restriction", || {
        let id = PartialInjection::identity(&x);
        eq(&id.restriction(), &id)
    });
    c.law("restriction is idempotent", || {
        eq(&f.restriction().restriction(), &f.restriction())
    });
    c.law("composite domain within first domain", || {
        let r = gf()?.restriction();
        eq(&r.compose(&f.restriction())?, &r)
    });
    c.law(
        "restricting the second factor keeps the composite domain",
        || {
            eq(
                &g.restriction().compose(&f)?.restriction(),
                &gf()?.restriction(),
            )
        },
    );
    if let Some(t) = random_total(rng, &y, &z) {
        c.law("total second factor keeps the domain", || {
            eq(&t.compose(&f)?.restriction(), &f.restriction())
        });
    }
    c.law("total composite has a total first factor", || {
        Ok(!gf()?.is_total() || f.is_total())
    });

    c.law("dagger inverse", || {
        eq(&f.dagger().compose(&f)?, &f.restriction())
    });
    c.law("dagger coinverse", || {
        eq(&f.compose(&f.dagger())?, &f.dagger().restriction())
    });
    c.law("dagger involution", || eq(&f.dagger().dagger(), &f));
    c.law("dagger contravariant", || {
        eq(&gf()?.dagger(), &f.dagger().compose(&g.dagger())?)
    });
    c.law("order via restriction", || {
        let e = random_idempotent(rng, &x);
        let below = f.compose(&e)?;
        Ok(below.leq(&f)? && (f.leq(&below)? == eq(&below, &f)?))
    });
}

fn join_laws(c: &mut Checker, rng: &mut ChaCha8Rng, max: usize) {
    let join = c.cfg.join;
    let (w, x, y, z) = (
        random_carrier(rng, max),
        random_carrier(rng, max),
        random_carrier(rng, max),
        random_carrier(rng, max),
    );
    let parent = random_pinj(rng, &x, &y);
    let n = rng.gen_range(2..=3);
    // compatible members: restrictions of one map, possibly overlapping
    let members: Vec<_> = (0..n)
        .map(|_| parent.compose(&random_idempotent(rng, &x)).unwrap())
        .collect();
    let disjoint = random_partition(rng, &parent, n);
    let post = random_pinj(rng, &y, &z);
    let pre = random_pinj(rng, &w, &x);

    for (tag, s) in [("compatible", &members), ("disjoint", &disjoint)] {
        let j = match join(s) {
            Ok(j) => j,
            Err(e) => {
                c.law(&format!("join exists ({tag})"), || Err(e));
                continue;
            }
        };
        c.law(&format!("join upper bound ({tag})"), || {
            for m in s.iter() {
                if !m.leq(&j)? {
                    return Ok(false);
                }
            }
            Ok(true)
        });
        c.law(&format!("join least ({tag})"), || j.leq(&parent));
        c.law(&format!("join restriction ({tag})"), || {
            let rs: Vec<_> = s.iter().map(PartialInjection::restriction).collect();
            eq(&j.restriction(), &join(&rs)?)
        });
        c.law(&format!("join postcomposition ({tag})"), || {
            let ps = s
                .iter()
                .map(|m| post.compose(m))
                .collect::<Result<Vec<_>, _>>()?;
            eq(&post.compose(&j)?, &join(&ps)?)
        });
        c.law(&format!("join precomposition ({tag})"), || {
            let ps = s
                .iter()
                .map(|m| m.compose(&pre))
                .collect::<Result<Vec<_>, _>>()?;
            eq(&j.compose(&pre)?, &join(&ps)?)
        });
    }
    c.law("compatible members are compatible", || {
        Ok(members[0].compatible(&members[1])? && disjoint[0].disjoint(&disjoint[1])?)
    });
    let (a, b) = (random_pinj(rng, &x, &y), random_pinj(rng, &x, &y));
    c.law("disjoint implies compatible", || {
        Ok(!a.disjoint(&b)? || a.compatible(&b)?)
    });
    c.law("incompatible pairs have no join", || {
        Ok(a.compatible(&b)? || kernel::join(&[a.clone(), b.clone()]).is_err())
    });
}

fn tensor_laws(c: &mut Checker, rng: &mut ChaCha8Rng, max: usize) {
    let join = c.cfg.join;
    let (a, b, x) = (
        random_carrier(rng, max),
        random_carrier(rng, max),
        random_carrier(rng, max),
    );
    let (i1, i2) = (kernel::inj1(&a, &b), kernel::inj2(&a, &b));
    let (id_a, id_b) = (
        PartialInjection::identity(&a),
        PartialInjection::identity(&b),
    );
    let (z_a, z_b) = (
        PartialInjection::zero(&a, &a),
        PartialInjection::zero(&b, &b),
    );

    c.law("injections are total", || {
        Ok(eq(&i1.restriction(), &id_a)? && eq(&i2.restriction(), &id_b)?)
    });
    c.law("injections land in their summand", || {
        Ok(eq(&i1.dagger().restriction(), &oplus(&id_a, &z_b))?
            && eq(&i2.dagger().restriction(), &oplus(&z_a, &id_b))?)
    });
    c.law("injections are split monic", || {
        Ok(eq(&i1.dagger().compose(&i1)?, &id_a)?
            && eq(&i2.dagger().compose(&i2)?, &id_b)?
            && i2.dagger().compose(&i1)?.is_zero()
            && i1.dagger().compose(&i2)?.is_zero())
    });
    c.law("symmetry", || {
        let g = kernel::gamma(&a, &b);
        Ok(eq(
            &kernel::gamma(&b, &a).compose(&g)?,
            &PartialInjection::identity(g.dom()),
        )? && eq(&g.compose(&i1)?, &kernel::inj2(&b, &a))?)
    });

    // decisions of a random f : x -> a ⊕ b
    let f = random_pinj(rng, &x, &oplus_carrier(&a, &b));
    let d = match decision_of(&f) {
        Ok(d) => d,
        Err(e) => return c.law("decision exists", || Err(e)),
    };
    let (x1, x2) = (kernel::inj1(&x, &x), kernel::inj2(&x, &x));
    let left = || x1.dagger().compose(&d);
    let right = || x2.dagger().compose(&d);

    c.law("decision parts cover the domain", || {
        eq(&join(&[left()?, right()?])?, &f.restriction())
    });
    c.law("decision tags agree with the map", || {
        eq(&oplus(&f, &f).compose(&d)?, &oplus(&i1, &i2).compose(&f)?)
    });
    c.law("decision parts are idempotents", || {
        Ok(eq(&left()?.restriction(), &left()?)? && eq(&right()?.restriction(), &right()?)?)
    });
    c.law("summands cover the sum", || {
        let j = join(&[x1.dagger().restriction(), x2.dagger().restriction()])?;
        eq(&j, &PartialInjection::identity(x1.cod()))
    });
    c.law("decision rebuilt from its parts", || {
        let rebuilt = join(&[
            x1.compose(&left()?.restriction())?,
            x2.compose(&right()?.restriction())?,
        ])?;
        eq(&d, &rebuilt)
    });
    c.law("decision has the map's domain", || {
        eq(&f.restriction(), &d.restriction())
    });
    c.law("decision is idempotent", || eq(&decision_of(&d)?, &d));
}

fn random_trace_input(rng: &mut impl Rng, max: usize, max_u: usize) -> PartialInjection {
    let a = random_carrier(rng, max);
    let b = random_carrier(rng, max);
    // internal states are offset so they never coincide with visible ones
    let u = Carrier::ints((0..rng.gen_range(0..=max_u) as i64).map(|i| 100 + i));
    random_pinj(rng, &oplus_carrier(&a, &u), &oplus_carrier(&b, &u))
}

/// Like `random_trace_input` but with a matching of maximal size, so most
/// orbits pass through the internal states.
fn dense_trace_input(rng: &mut impl Rng, max: usize, max_u: usize) -> PartialInjection {
    let a = random_carrier(rng, max);
    let b = random_carrier(rng, max);
    let u = Carrier::ints((0..rng.gen_range(1..=max_u.max(1)) as i64).map(|i| 100 + i));
    let (dom, cod) = (oplus_carrier(&a, &u), oplus_carrier(&b, &u));
    let mut ys = cod.elements().to_vec();
    ys.shuffle(rng);
    PartialInjection::new(dom.clone(), cod, dom.iter().cloned().zip(ys))
        .expect("a matching is injective")
}

fn trace_laws(c: &mut Checker, rng: &mut ChaCha8Rng, max: usize) {
    let f = random_trace_input(rng, max, max.min(6));
    c.law("trace join formula", || {
        eq(&trace(&f)?, &trace_by_joins(&f)?)
    });
    c.law("trace dagger", || {
        eq(&trace(&f)?.dagger(), &trace(&f.dagger())?)
    });
}

/// Runs every law family once per case.
pub fn axiom_suite(cfg: &AxiomConfig) -> AxiomReport {
    let mut report = AxiomReport {
        seed: cfg.seed,
        cases: cfg.cases,
        carrier_max: cfg.carrier_max,
        ..Default::default()
    };
    for case in 0..cfg.cases {
        let seed = case_seed(cfg.seed, case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Checker {
            cfg,
            report: &mut report,
            case,
            case_seed: seed,
        };
        restriction_laws(&mut c, &mut rng, cfg.carrier_max);
        join_laws(&mut c, &mut rng, cfg.carrier_max);
        tensor_laws(&mut c, &mut rng, cfg.carrier_max);
        trace_laws(&mut c, &mut rng, cfg.carrier_max);
    }
    report
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceReport {
    pub cases: usize,
    pub mismatches: Vec<u64>,
    /// Cases whose trace was defined somewhere after at least one internal step.
    pub nontrivial: usize,
}

/// Compares the orbit trace with the truncated join formula on random maps
/// `a ⊕ u -> b ⊕ u` with `|u| ≤ max_u`. Odd cases use dense matchings.
pub fn trace_equivalence(seed: u64, cases: usize, carrier_max: usize, max_u: usize) -> TraceReport {
    let mut report = TraceReport {
        cases,
        ..Default::default()
    };
    for case in 0..cases {
        let s = case_seed(seed, case);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = if case % 2 == 1 {
            dense_trace_input(&mut rng, carrier_max, max_u)
        } else {
            random_trace_input(&mut rng, carrier_max, max_u)
        };
        let (Ok(t), Ok(j)) = (trace(&f), trace_by_joins(&f)) else {
            report.mismatches.push(s);
            continue;
        };
        if t != j {
            report.mismatches.push(s);
        }
        let direct = f
            .graph()
            .iter()
            .filter(|(x, y)| matches!((x, y), (Element::Left(_), Element::Left(_))))
            .count();
        if t.graph().len() > direct {
            report.nontrivial += 1;
        }
    }
    report
}

/// A faulty join that keeps only its first member, for mutation testing.
pub fn first_member_join(fs: &[PartialInjection]) -> Result<PartialInjection, KernelError> {
    fs.first().cloned().ok_or(KernelError::EmptyJoin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = axiom_suite(&AxiomConfig::new(7, 200, 6));
        assert!(
            r.passed(),
            "{:?}",
            &r.violations[..r.violations.len().min(5)]
        );
        assert!(r.laws.contains_key("decision tags agree with the map"));
        assert!(r.laws.contains_key("trace dagger"));
    }

    #[test]
    fn degenerate_carriers_pass() {
        let r = axiom_suite(&AxiomConfig::new(1, 100, 1));
        assert!(r.passed());
        let r = axiom_suite(&AxiomConfig::new(1, 20, 0));
        assert!(r.passed());
    }

    #[test]
    fn corrupted_join_is_caught() {
        let mut cfg = AxiomConfig::new(3, 100, 5);
        cfg.join = first_member_join;
        let r = axiom_suite(&cfg);
        assert!(!r.passed());
        assert!(r
            .violations
            .iter()
            .any(|v| v.law.starts_with("join upper bound")));
    }

    #[test]
    fn single_case_reproduces_from_its_seed() {
        let mut cfg = AxiomConfig::new(3, 40, 5);
        cfg.join = first_member_join;
        let r = axiom_suite(&cfg);
        let v = &r.violations[0];
        let mut rng = ChaCha8Rng::seed_from_u64(v.case_seed);
        let mut again = AxiomReport::default();
        let mut c = Checker {
            cfg: &cfg,
            report: &mut again,
            case: v.case,
            case_seed: v.case_seed,
        };
        restriction_laws(&mut c, &mut rng, 5);
        join_laws(&mut c, &mut rng, 5);
        tensor_laws(&mut c, &mut rng, 5);
        trace_laws(&mut c, &mut rng, 5);
        assert_eq!(again.violations.first(), Some(v));
    }

    #[test]
    fn trace_equivalence_holds() {
        let r = trace_equivalence(11, 200, 5, 6);
        assert!(r.mismatches.is_empty());
        assert!(r.nontrivial > 0);
    }

    #[test]
    fn generators_respect_carriers() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let a = random_carrier(&mut rng, 8);
            let b = random_carrier(&mut rng, 8);
            assert!(a.len() <= 8);
            let f = random_pinj(&mut rng, &a, &b);
            assert!(f.graph().len() <= a.len().min(b.len()));
        }
    }
}
