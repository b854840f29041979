//! Structural program inversion.

use thiserror::Error;

use crate::flowchart::Cmd;
use crate::rint::{invert_elem, RintCmd, RintOp, RintProgram};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot invert the internal loop meta-command")]
pub struct InvertError;

/// Inverts a command: sequences reverse, `if` and `from` swap their two
/// predicates, atomic steps go through `atom_inverse`.
pub fn invert<A, E: Clone>(
    c: &Cmd<A, E>,
    atom_inverse: &impl Fn(&A) -> A,
) -> Result<Cmd<A, E>, InvertError> {
    Ok(match c {
        Cmd::Skip => Cmd::Skip,
        Cmd::Atomic(a) => Cmd::Atomic(atom_inverse(a)),
        Cmd::Seq(c1, c2) => Cmd::seq(invert(c2, atom_inverse)?, invert(c1, atom_inverse)?),
        Cmd::If {
            test,
            then_branch,
            else_branch,
            assertion,
        } => Cmd::if_(
            assertion.clone(),
            invert(then_branch, atom_inverse)?,
            invert(else_branch, atom_inverse)?,
            test.clone(),
        ),
        Cmd::From { entry, body, exit } => {
            Cmd::from_loop(exit.clone(), invert(body, atom_inverse)?, entry.clone())
        }
        Cmd::Loop { .. } => return Err(InvertError),
    })
}

pub fn invert_rint_cmd(c: &RintCmd) -> Result<RintCmd, InvertError> {
    invert(c, &|op: &RintOp| invert_elem(op))
}

pub fn invert_program(p: &RintProgram) -> Result<RintProgram, InvertError> {
    Ok(RintProgram::new(p.k, invert_rint_cmd(&p.body)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowchart::{eval_cmd, Pred, Store};
    use crate::rint::{parse, print_cmd, Model, RintSemantics};

    fn inv_text(src: &str) -> String {
        print_cmd(&invert_rint_cmd(&parse(src, 2).unwrap().body).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(inv_text("skip"), "skip");
        assert_eq!(inv_text("x1 += x2; x1 += 1"), "x1 += -1; x1 -= x2");
        assert_eq!(
            inv_text("from x1 do x1 += 1; x2 += -1 until x2"),
            "from x2 do x2 += 1; x1 += -1 until x1"
        );
        assert_eq!(
            inv_text("if x1 then x2 += 1 else x1 -= x2 fi not x2"),
            "if not x2 then x2 += -1 else x1 += x2 fi x1"
        );
    }

    #[test]
    fn inverse_loop_runs_backward() {
        let c = parse("from x1 do x1 += 1; x2 += -1 until x2", 2)
            .unwrap()
            .body;
        let inv = invert_rint_cmd(&c).unwrap();
        let sem = RintSemantics::new(2, Model::Integers);
        assert_eq!(
            eval_cmd(&Store(vec![3, 0]), &inv, &sem, 100).unwrap(),
            Store(vec![0, 3])
        );
    }

    #[test]
    fn involution() {
        let c = parse(
            "x1 += x2; if x1 then from x2 do x2 += 1 until tt else skip fi x2; x2 -= x1",
            2,
        )
        .unwrap()
        .body;
        let back = invert_rint_cmd(&invert_rint_cmd(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn meta_loop_is_rejected() {
        let c: RintCmd = Cmd::meta_loop(Pred::True, Cmd::Skip, Pred::True);
        assert_eq!(invert_rint_cmd(&c), Err(InvertError));
    }
}
