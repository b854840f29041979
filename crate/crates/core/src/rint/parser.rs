//! Lexer and recursive-descent parser for RINT source text.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{RintCmd, RintOp, RintPred, RintProgram, VarZero};
use crate::flowchart::{Cmd, NodePath, Pred};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    /// Well-formed text that breaks a static rule (`i ≠ j`, `i ≤ k`).
    Validation,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Validation => "invalid program",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Source position (line, column) of every command node, keyed by path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpanTable(BTreeMap<NodePath, (usize, usize)>);

impl SpanTable {
    pub fn get(&self, path: &NodePath) -> Option<(usize, usize)> {
        self.0.get(path).copied()
    }

    fn fill(&mut self, path: NodePath, span: &SpanNode) {
        for (i, c) in span.children.iter().enumerate() {
            self.fill(path.child(i as u8), c);
        }
        self.0.insert(path, span.pos);
    }
}

struct SpanNode {
    pos: (usize, usize),
    children: Vec<SpanNode>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Skip,
    If,
    Then,
    Else,
    Fi,
    From,
    Do,
    Until,
    Not,
    And,
    Or,
    True,
    False,
    Var(usize),
    Int(i64),
    Semi,
    PlusEq,
    MinusEq,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self {
            Tok::Skip => "skip",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Fi => "fi",
            Tok::From => "from",
            Tok::Do => "do",
            Tok::Until => "until",
            Tok::Not => "not",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::True => "tt",
            Tok::False => "ff",
            Tok::Semi => ";",
            Tok::PlusEq => "+=",
            Tok::MinusEq => "-=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Var(i) => return write!(f, "variable `x{i}`"),
            Tok::Int(n) => return write!(f, "integer `{n}`"),
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{kw}`")
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "skip" => Tok::Skip,
        "if" => Tok::If,
        "then" => Tok::Then,
        "else" => Tok::Else,
        "fi" => Tok::Fi,
        "from" => Tok::From,
        "do" => Tok::Do,
        "until" => Tok::Until,
        "not" => Tok::Not,
        "and" => Tok::And,
        "or" => Tok::Or,
        "tt" => Tok::True,
        "ff" => Tok::False,
        _ => return None,
    })
}

type Spanned = (Tok, (usize, usize));

fn syntax(pos: (usize, usize), message: impl Into<String>) -> ParseError {
    ParseError {
        kind: ErrorKind::Syntax,
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

fn invalid(pos: (usize, usize), message: impl Into<String>) -> ParseError {
    ParseError {
        kind: ErrorKind::Validation,
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, col: &mut usize, n: usize| {
        *i += n;
        *col += n;
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(&mut i, &mut col, 1);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut col, 1);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut col, 1);
            }
            let word: String = chars[start..i].iter().collect();
            toks.push((word_token(&word, pos)?, pos));
        } else if c.is_ascii_digit()
            || (c == '-' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let start = i;
            advance(&mut i, &mut col, 1);
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut col, 1);
            }
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(syntax(
                    (line, col),
                    format!("unexpected character `{}` after number", chars[i]),
                ));
            }
            let lit: String = chars[start..i].iter().collect();
            let n = lit
                .parse::<i64>()
                .map_err(|_| syntax(pos, format!("integer literal `{lit}` out of range")))?;
            toks.push((Tok::Int(n), pos));
        } else {
            let two = (c, chars.get(i + 1).copied());
            let (tok, len) = match two {
                ('+', Some('=')) => (Tok::PlusEq, 2),
                ('-', Some('=')) => (Tok::MinusEq, 2),
                (';', _) => (Tok::Semi, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                _ => return Err(syntax(pos, format!("unexpected character `{c}`"))),
            };
            advance(&mut i, &mut col, len);
            toks.push((tok, pos));
        }
    }
    toks.push((Tok::Eof, (line, col)));
    Ok(toks)
}

fn word_token(word: &str, pos: (usize, usize)) -> Result<Tok, ParseError> {
    if let Some(t) = keyword(word) {
        return Ok(t);
    }
    if let Some(digits) = word.strip_prefix('x') {
        let well_formed = digits.chars().all(|d| d.is_ascii_digit())
            && digits.chars().next().is_some_and(|d| d != '0');
        if well_formed {
            // an index too large for usize is certainly out of range
            return Ok(Tok::Var(digits.parse().unwrap_or(usize::MAX)));
        }
        return Err(syntax(pos, format!("malformed variable name `{word}`")));
    }
    Err(syntax(pos, format!("unknown word `{word}`")))
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    k: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> (usize, usize) {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.at].clone();
        if t.0 != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, context: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {want} {context}, found {}", self.peek()),
            ))
        }
    }

    fn var(&mut self, context: &str) -> Result<usize, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Var(i) => {
                self.check_range(i, pos)?;
                Ok(i)
            }
            other => Err(syntax(
                pos,
                format!("expected a variable {context}, found {other}"),
            )),
        }
    }

    fn check_range(&self, i: usize, pos: (usize, usize)) -> Result<(), ParseError> {
        match self.k {
            Some(k) if i > k => Err(invalid(
                pos,
                format!("variable `x{i}` out of range (k = {k})"),
            )),
            _ => Ok(()),
        }
    }

    fn cmd(&mut self) -> Result<(RintCmd, SpanNode), ParseError> {
        let pos = self.pos();
        let first = self.cmd1()?;
        if *self.peek() != Tok::Semi {
            return Ok(first);
        }
        self.bump();
        let rest = self.cmd()?;
        Ok((
            Cmd::seq(first.0, rest.0),
            SpanNode {
                pos,
                children: vec![first.1, rest.1],
            },
        ))
    }

    fn cmd1(&mut self) -> Result<(RintCmd, SpanNode), ParseError> {
        let pos = self.pos();
        let leaf = |c| {
            Ok((
                c,
                SpanNode {
                    pos,
                    children: vec![],
                },
            ))
        };
        match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                leaf(Cmd::Skip)
            }
            Tok::Var(_) => {
                let i = self.var("")?;
                let (op, op_pos) = self.bump();
                let atom = match op {
                    Tok::PlusEq => match self.bump() {
                        (Tok::Var(j), p) => {
                            self.check_range(j, p)?;
                            RintOp::AddVar(i, j)
                        }
                        (Tok::Int(n), _) => RintOp::AddConst(i, n),
                        (other, p) => {
                            return Err(syntax(
                                p,
                                format!("expected a variable or integer after `+=`, found {other}"),
                            ))
                        }
                    },
                    Tok::MinusEq => RintOp::SubVar(i, self.var("after `-=`")?),
                    other => {
                        return Err(syntax(
                            op_pos,
                            format!("expected `+=` or `-=`, found {other}"),
                        ))
                    }
                };
                if let RintOp::AddVar(i, j) | RintOp::SubVar(i, j) = atom {
                    if i == j {
                        return Err(invalid(
                            pos,
                            format!("`{atom}` updates a variable by itself"),
                        ));
                    }
                }
                leaf(Cmd::Atomic(atom))
            }
            Tok::If => {
                self.bump();
                let test = self.pred()?;
                self.expect(Tok::Then, "after the `if` test")?;
                let (c1, s1) = self.cmd()?;
                self.expect(Tok::Else, "after the `then` branch")?;
                let (c2, s2) = self.cmd()?;
                self.expect(Tok::Fi, "after the `else` branch")?;
                let assertion = self.pred()?;
                Ok((
                    Cmd::if_(test, c1, c2, assertion),
                    SpanNode {
                        pos,
                        children: vec![s1, s2],
                    },
                ))
            }
            Tok::From => {
                self.bump();
                let entry = self.pred()?;
                self.expect(Tok::Do, "after the `from` assertion")?;
                let (body, s) = self.cmd()?;
                self.expect(Tok::Until, "after the loop body")?;
                let exit = self.pred()?;
                Ok((
                    Cmd::from_loop(entry, body, exit),
                    SpanNode {
                        pos,
                        children: vec![s],
                    },
                ))
            }
            other => Err(syntax(pos, format!("expected a command, found {other}"))),
        }
    }

    fn pred(&mut self) -> Result<RintPred, ParseError> {
        let p = self.pand()?;
        if *self.peek() == Tok::Or {
            self.bump();
            return Ok(Pred::or(p, self.pred()?));
        }
        Ok(p)
    }

    fn pand(&mut self) -> Result<RintPred, ParseError> {
        let p = self.punit()?;
        if *self.peek() == Tok::And {
            self.bump();
            return Ok(Pred::and(p, self.pand()?));
        }
        Ok(p)
    }

    fn punit(&mut self) -> Result<RintPred, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::True => Ok(Pred::True),
            Tok::False => Ok(Pred::False),
            Tok::Var(i) => {
                self.check_range(i, pos)?;
                Ok(Pred::Elem(VarZero(i)))
            }
            Tok::Not => Ok(Pred::not(self.punit()?)),
            Tok::LParen => {
                let p = self.pred()?;
                self.expect(Tok::RParen, "to close `(`")?;
                Ok(p)
            }
            other => Err(syntax(pos, format!("expected a predicate, found {other}"))),
        }
    }

    fn program(&mut self) -> Result<(RintCmd, SpanNode), ParseError> {
        let c = self.cmd()?;
        if *self.peek() != Tok::Eof {
            return Err(syntax(
                self.pos(),
                format!("expected `;` or end of input, found {}", self.peek()),
            ));
        }
        Ok(c)
    }
}

fn parse_body(text: &str, k: Option<usize>) -> Result<(RintCmd, SpanTable), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        k,
    };
    let (body, span) = p.program()?;
    let mut table = SpanTable::default();
    table.fill(NodePath::root(), &span);
    Ok((body, table))
}

/// Parses a RINT_k program, validating variable indices against `k`.
pub fn parse(text: &str, k: usize) -> Result<RintProgram, ParseError> {
    parse_with_spans(text, k).map(|(p, _)| p)
}

pub fn parse_with_spans(text: &str, k: usize) -> Result<(RintProgram, SpanTable), ParseError> {
    let (body, spans) = parse_body(text, Some(k))?;
    Ok((RintProgram::new(k, body), spans))
}

/// Parses without a fixed `k`, taking `k` to be the largest variable index
/// used (at least 1).
pub fn parse_infer_k(text: &str) -> Result<RintProgram, ParseError> {
    let (body, _) = parse_body(text, None)?;
    let k = max_var_cmd(&body).max(1);
    Ok(RintProgram::new(k, body))
}

fn max_var_pred(p: &RintPred) -> usize {
    match p {
        Pred::True | Pred::False => 0,
        Pred::Elem(VarZero(i)) => *i,
        Pred::Not(a) => max_var_pred(a),
        Pred::And(a, b) | Pred::Or(a, b) => max_var_pred(a).max(max_var_pred(b)),
    }
}

fn max_var_cmd(c: &RintCmd) -> usize {
    match c {
        Cmd::Skip => 0,
        Cmd::Atomic(op) => match *op {
            RintOp::AddVar(i, j) | RintOp::SubVar(i, j) => i.max(j),
            RintOp::AddConst(i, _) => i,
        },
        Cmd::Seq(a, b) => max_var_cmd(a).max(max_var_cmd(b)),
        Cmd::If {
            test,
            then_branch,
            else_branch,
            assertion,
        } => max_var_pred(test)
            .max(max_var_cmd(then_branch))
            .max(max_var_cmd(else_branch))
            .max(max_var_pred(assertion)),
        Cmd::From { entry, body, exit } | Cmd::Loop { entry, body, exit } => max_var_pred(entry)
            .max(max_var_cmd(body))
            .max(max_var_pred(exit)),
    }
}
