//! RINT_k: a reversible language over `k` integer variables.
//!
//! Atomic steps are `xi += xj`, `xi -= xj` (with `i ≠ j`) and `xi += n`;
//! the only elementary predicate tests a variable for zero. Stores range over
//! either unbounded integers or residues modulo `m`.

mod parser;
mod printer;

use std::fmt;

use crate::denote::SemanticEnv;
use crate::flowchart::{Cmd, EnvError, Pred, Semantics, Store};
use crate::kernel::{Carrier, Element};
use crate::point::{ArrowExpr, Obj, PointValue};

pub use parser::{parse, parse_infer_k, parse_with_spans, ErrorKind, ParseError, SpanTable};
pub use printer::{print_cmd, print_pred};

/// Atomic steps. Variable indices are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RintOp {
    /// `xi += xj`
    AddVar(usize, usize),
    /// `xi -= xj`
    SubVar(usize, usize),
    /// `xi += n`
    AddConst(usize, i64),
}

impl RintOp {
    pub fn target(&self) -> usize {
        match *self {
            RintOp::AddVar(i, _) | RintOp::SubVar(i, _) | RintOp::AddConst(i, _) => i,
        }
    }

    fn source(&self) -> Option<usize> {
        match *self {
            RintOp::AddVar(_, j) | RintOp::SubVar(_, j) => Some(j),
            RintOp::AddConst(..) => None,
        }
    }

    /// Indices in range and distinct.
    pub fn is_valid(&self, k: usize) -> bool {
        let ok = |i: usize| (1..=k).contains(&i);
        ok(self.target())
            && match self.source() {
                Some(j) => ok(j) && j != self.target(),
                None => true,
            }
    }
}

impl fmt::Display for RintOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RintOp::AddVar(i, j) => write!(f, "x{i} += x{j}"),
            RintOp::SubVar(i, j) => write!(f, "x{i} -= x{j}"),
            RintOp::AddConst(i, n) => write!(f, "x{i} += {n}"),
        }
    }
}

/// `xi` as a predicate: true iff the variable is zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarZero(pub usize);

impl fmt::Display for VarZero {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

pub type RintCmd = Cmd<RintOp, VarZero>;
pub type RintPred = Pred<VarZero>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RintProgram {
    pub k: usize,
    pub body: RintCmd,
}

impl RintProgram {
    pub fn new(k: usize, body: RintCmd) -> Self {
        RintProgram { k, body }
    }
}

impl fmt::Display for RintProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_cmd(&self.body))
    }
}

/// The store model.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Model {
    /// `Z^k`, with `i64` slots. Overflow makes a step undefined.
    Integers,
    /// `Z_m^k`, residues kept in `0..m`.
    Modular(i64),
}

impl Model {
    fn reduce(self, v: i64) -> i64 {
        match self {
            Model::Integers => v,
            Model::Modular(m) => v.rem_euclid(m),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Integers => write!(f, "Z"),
            Model::Modular(m) => write!(f, "Z{m}"),
        }
    }
}

/// Runs one atomic step. `None` only on `i64` overflow in [`Model::Integers`].
///
/// Panics if an index is out of range for `σ`.
pub fn elem_step(op: &RintOp, s: &Store, model: Model) -> Option<Store> {
    let v = s.values();
    let i = op.target() - 1;
    let delta = match *op {
        RintOp::AddVar(_, j) => v[j - 1],
        RintOp::SubVar(_, j) => v[j - 1].checked_neg()?,
        RintOp::AddConst(_, n) => n,
    };
    let updated = match model {
        Model::Integers => v[i].checked_add(delta)?,
        Model::Modular(m) => {
            (i128::from(v[i]) + i128::from(delta)).rem_euclid(i128::from(m)) as i64
        }
    };
    let mut out = v.to_vec();
    out[i] = updated;
    Some(Store(out))
}

/// `σ_i = 0` (or `≡ 0 (mod m)`).
pub fn elem_pred(i: usize, s: &Store, model: Model) -> bool {
    model.reduce(s.values()[i - 1]) == 0
}

pub fn invert_elem(op: &RintOp) -> RintOp {
    match *op {
        RintOp::AddVar(i, j) => RintOp::SubVar(i, j),
        RintOp::SubVar(i, j) => RintOp::AddVar(i, j),
        RintOp::AddConst(i, n) => RintOp::AddConst(i, n.wrapping_neg()),
    }
}

/// All stores of `Z_m^k` in lexicographic order.
pub fn all_stores(k: usize, m: i64) -> Vec<Store> {
    let mut out = vec![Vec::with_capacity(k)];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..m).map(move |v| {
                    let mut s = prefix.clone();
                    s.push(v);
                    s
                })
            })
            .collect();
    }
    out.into_iter().map(Store).collect()
}

/// [`all_stores`] as a kernel carrier.
pub fn store_carrier(k: usize, m: i64) -> Carrier {
    Carrier::new(all_stores(k, m).iter().map(store_value))
}

pub fn store_value(s: &Store) -> PointValue {
    Element::store(s.values())
}

pub fn value_store(v: &PointValue) -> Option<Store> {
    v.as_store().map(|s| Store(s.to_vec()))
}

/// Both semantic views of RINT_k for a fixed `k` and store model.
#[derive(Clone, Copy, Debug)]
pub struct RintSemantics {
    pub k: usize,
    pub model: Model,
}

impl RintSemantics {
    pub fn new(k: usize, model: Model) -> Self {
        RintSemantics { k, model }
    }

    fn fits(&self, s: &Store) -> bool {
        s.len() == self.k
    }

    fn check_op(&self, op: &RintOp) -> Result<(), EnvError> {
        if op.is_valid(self.k) {
            Ok(())
        } else {
            Err(EnvError::UnknownAtomic(op.to_string()))
        }
    }

    fn check_var(&self, e: &VarZero) -> Result<(), EnvError> {
        if (1..=self.k).contains(&e.0) {
            Ok(())
        } else {
            Err(EnvError::UnknownPredicate(e.to_string()))
        }
    }

    fn step_value(&self, op: &RintOp, v: &PointValue) -> Option<PointValue> {
        let s = value_store(v).filter(|s| self.fits(s))?;
        elem_step(op, &s, self.model).map(|t| store_value(&t))
    }
}

impl Semantics for RintSemantics {
    type Atom = RintOp;
    type Elem = VarZero;

    fn step(&self, op: &RintOp, s: &Store) -> Result<Option<Store>, EnvError> {
        self.check_op(op)?;
        Ok(elem_step(op, s, self.model))
    }

    fn test(&self, e: &VarZero, s: &Store) -> Result<bool, EnvError> {
        self.check_var(e)?;
        Ok(elem_pred(e.0, s, self.model))
    }
}

impl SemanticEnv for RintSemantics {
    type Atom = RintOp;
    type Elem = VarZero;

    fn atomic(&self, op: &RintOp) -> Result<ArrowExpr, EnvError> {
        self.check_op(op)?;
        let (fwd, bwd) = (*op, invert_elem(op));
        let (s1, s2) = (*self, *self);
        Ok(ArrowExpr::prim(
            op.to_string(),
            Obj::Store,
            Obj::Store,
            move |v| s1.step_value(&fwd, v),
            move |v| s2.step_value(&bwd, v),
        ))
    }

    fn elementary(&self, e: &VarZero) -> Result<ArrowExpr, EnvError> {
        self.check_var(e)?;
        let i = e.0;
        let (s1, s2) = (*self, *self);
        Ok(ArrowExpr::prim(
            e.to_string(),
            Obj::Store,
            Obj::store_sum(),
            move |v| {
                let s = value_store(v).filter(|s| s1.fits(s))?;
                Some(if elem_pred(i, &s, s1.model) {
                    Element::left(v.clone())
                } else {
                    Element::right(v.clone())
                })
            },
            // only accepts values tagged on the side the test sends them to
            move |v| {
                let (inner, zero) = match v {
                    Element::Left(x) => (x, true),
                    Element::Right(x) => (x, false),
                    Element::Store(_) => return None,
                };
                let s = value_store(inner).filter(|s| s2.fits(s))?;
                (elem_pred(i, &s, s2.model) == zero).then(|| (**inner).clone())
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[i64]) -> Store {
        Store(v.to_vec())
    }

    const Z5: Model = Model::Modular(5);

    #[test]
    fn step_examples() {
        let z = Model::Integers;
        assert_eq!(
            elem_step(&RintOp::AddVar(1, 2), &st(&[3, 4]), z),
            Some(st(&[7, 4]))
        );
        assert_eq!(
            elem_step(&RintOp::SubVar(1, 2), &st(&[7, 4]), z),
            Some(st(&[3, 4]))
        );
        assert_eq!(
            elem_step(&RintOp::AddConst(1, 0), &st(&[2, 9]), z),
            Some(st(&[2, 9]))
        );
        assert_eq!(
            elem_step(&RintOp::AddConst(2, -1), &st(&[0, 0]), Z5),
            Some(st(&[0, 4]))
        );
        assert_eq!(
            elem_step(&RintOp::AddConst(1, 1), &st(&[i64::MAX, 0]), z),
            None
        );
    }

    #[test]
    fn pred_examples() {
        assert!(elem_pred(1, &st(&[0, 5]), Model::Integers));
        assert!(!elem_pred(2, &st(&[0, 5]), Model::Integers));
        assert!(elem_pred(1, &st(&[5, 5]), Z5));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(invert_elem(&RintOp::AddVar(1, 2)), RintOp::SubVar(1, 2));
        assert_eq!(
            invert_elem(&RintOp::AddConst(1, 5)),
            RintOp::AddConst(1, -5)
        );
        for op in [
            RintOp::AddVar(2, 1),
            RintOp::SubVar(1, 2),
            RintOp::AddConst(2, 3),
        ] {
            assert_eq!(invert_elem(&invert_elem(&op)), op);
        }
    }

    #[test]
    fn steps_undo_exhaustively_in_z5() {
        let ops = [
            RintOp::AddVar(1, 2),
            RintOp::AddVar(2, 1),
            RintOp::SubVar(1, 2),
            RintOp::SubVar(2, 1),
            RintOp::AddConst(1, -1),
            RintOp::AddConst(2, 3),
        ];
        for s in all_stores(2, 5) {
            for op in &ops {
                let t = elem_step(op, &s, Z5).unwrap();
                assert_eq!(elem_step(&invert_elem(op), &t, Z5), Some(s.clone()));
            }
        }
    }

    #[test]
    fn validity() {
        assert!(RintOp::AddVar(1, 2).is_valid(2));
        assert!(!RintOp::AddVar(1, 1).is_valid(2));
        assert!(!RintOp::AddConst(3, 1).is_valid(2));
        assert!(!RintOp::SubVar(0, 1).is_valid(2));
    }

    #[test]
    fn store_enumeration() {
        let s = all_stores(2, 3);
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], st(&[0, 0]));
        assert_eq!(s[1], st(&[0, 1]));
        assert_eq!(s[8], st(&[2, 2]));
        assert_eq!(store_carrier(2, 5).len(), 25);
        assert_eq!(all_stores(0, 5), vec![st(&[])]);
    }

    #[test]
    fn semantics_reject_unknown_ids() {
        let sem = RintSemantics::new(2, Z5);
        assert!(sem.step(&RintOp::AddConst(3, 1), &st(&[0, 0])).is_err());
        assert!(sem.test(&VarZero(3), &st(&[0, 0])).is_err());
        assert!(sem.atomic(&RintOp::AddVar(2, 2)).is_err());
    }
}
