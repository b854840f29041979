//! Canonical single-line rendering of RINT programs.

use super::{RintCmd, RintPred};
use crate::flowchart::{Cmd, Pred};

pub fn print_pred(p: &RintPred) -> String {
    let mut out = String::new();
    write_pred(&mut out, p, 0);
    out
}

// precedence levels: 0 = or, 1 = and, 2 = unary and atoms
fn write_pred(out: &mut String, p: &RintPred, ctx: u8) {
    let (level, paren) = match p {
        Pred::Or(..) => (0, ctx > 0),
        Pred::And(..) => (1, ctx > 1),
        _ => (2, false),
    };
    if paren {
        out.push('(');
    }
    match p {
        Pred::True => out.push_str("tt"),
        Pred::False => out.push_str("ff"),
        Pred::Elem(v) => out.push_str(&v.to_string()),
        Pred::Not(a) => {
            out.push_str("not ");
            write_pred(out, a, 2);
        }
        Pred::And(a, b) | Pred::Or(a, b) => {
            write_pred(out, a, level + 1);
            out.push_str(if level == 0 { " or " } else { " and " });
            write_pred(out, b, level);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Renders a command. Sequences print flat, so a left-nested `Seq` reads
/// back right-nested.
pub fn print_cmd(c: &RintCmd) -> String {
    let mut out = String::new();
    write_cmd(&mut out, c);
    out
}

fn write_cmd(out: &mut String, c: &RintCmd) {
    match c {
        Cmd::Skip => out.push_str("skip"),
        Cmd::Atomic(op) => out.push_str(&op.to_string()),
        Cmd::Seq(a, b) => {
            write_cmd(out, a);
            out.push_str("; ");
            write_cmd(out, b);
        }
        Cmd::If {
            test,
            then_branch,
            else_branch,
            assertion,
        } => {
            out.push_str("if ");
            write_pred(out, test, 0);
            out.push_str(" then ");
            write_cmd(out, then_branch);
            out.push_str(" else ");
            write_cmd(out, else_branch);
            out.push_str(" fi ");
            write_pred(out, assertion, 0);
        }
        Cmd::From { entry, body, exit } | Cmd::Loop { entry, body, exit } => {
            out.push_str(if matches!(c, Cmd::From { .. }) {
                "from "
            } else {
                "loop "
            });
            write_pred(out, entry, 0);
            out.push_str(" do ");
            write_cmd(out, body);
            out.push_str(" until ");
            write_pred(out, exit, 0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rint::{parse, RintOp, VarZero};

    fn x(i: usize) -> RintPred {
        Pred::Elem(VarZero(i))
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(print_cmd(&Cmd::Skip), "skip");
        assert_eq!(print_cmd(&Cmd::Atomic(RintOp::AddConst(1, -1))), "x1 += -1");
        assert_eq!(print_cmd(&Cmd::Atomic(RintOp::SubVar(2, 1))), "x2 -= x1");
        let text = "from x1 do x1 += 1; x2 += -1 until x2";
        assert_eq!(print_cmd(&parse(text, 2).unwrap().body), text);
    }

    #[test]
    fn minimal_parentheses() {
        let p = Pred::and(Pred::or(x(1), x(2)), Pred::not(Pred::and(x(1), Pred::True)));
        assert_eq!(print_pred(&p), "(x1 or x2) and not (x1 and tt)");
        let p = Pred::or(Pred::and(x(1), x(2)), Pred::or(Pred::False, x(1)));
        assert_eq!(print_pred(&p), "x1 and x2 or ff or x1");
        let p = Pred::and(Pred::and(x(1), x(2)), x(1));
        assert_eq!(print_pred(&p), "(x1 and x2) and x1");
        assert_eq!(print_pred(&Pred::not(Pred::not(x(2)))), "not not x2");
    }

    #[test]
    fn left_nested_sequence_reads_back_right_nested() {
        let a = || Cmd::Atomic(RintOp::AddConst(1, 1));
        let left = Cmd::seq(Cmd::seq(a(), Cmd::Skip), a());
        let text = print_cmd(&left);
        assert_eq!(text, "x1 += 1; skip; x1 += 1");
        assert_eq!(
            parse(&text, 2).unwrap().body,
            Cmd::seq(a(), Cmd::seq(Cmd::Skip, a()))
        );
    }
}
