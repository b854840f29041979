//! Exhaustive enumeration of small RINT programs and predicates.

use crate::flowchart::{Cmd, Pred};
use crate::rint::{RintCmd, RintOp, RintPred, RintProgram, VarZero};

/// All programs with at most `max_size` AST nodes (predicate nodes count).
///
/// Control predicates are `tt`, `ff` or `xi` under any number of `not`s.
/// Sequences are generated right-nested only, which is the shape the parser
/// produces, so every program appears once per printed text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramEnumerator {
    pub max_size: usize,
    pub k: usize,
    pub pool: Vec<i64>,
}

pub const DEFAULT_POOL: [i64; 3] = [-1, 0, 1];

impl ProgramEnumerator {
    pub fn new(max_size: usize, k: usize) -> Self {
        ProgramEnumerator {
            max_size,
            k,
            pool: DEFAULT_POOL.to_vec(),
        }
    }

    pub fn with_pool(mut self, pool: Vec<i64>) -> Self {
        self.pool = pool;
        self
    }

    /// Programs ordered by size, then by construction order.
    pub fn programs(&self) -> Vec<RintProgram> {
        let mut by_size: Vec<Vec<RintCmd>> = vec![Vec::new()];
        let preds = control_preds(self.max_size, self.k);
        for n in 1..=self.max_size {
            let next = self.cmds_of_size(n, &by_size, &preds);
            by_size.push(next);
        }
        by_size
            .into_iter()
            .flatten()
            .map(|c| RintProgram::new(self.k, c))
            .collect()
    }

    fn atoms(&self) -> Vec<RintCmd> {
        let k = self.k;
        let pairs: Vec<(usize, usize)> = (1..=k)
            .flat_map(|i| (1..=k).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect();
        let mut out = vec![Cmd::Skip];
        out.extend(
            pairs
                .iter()
                .map(|&(i, j)| Cmd::Atomic(RintOp::AddVar(i, j))),
        );
        out.extend(
            pairs
                .iter()
                .map(|&(i, j)| Cmd::Atomic(RintOp::SubVar(i, j))),
        );
        for i in 1..=k {
            out.extend(
                self.pool
                    .iter()
                    .map(|&n| Cmd::Atomic(RintOp::AddConst(i, n))),
            );
        }
        out
    }

    fn cmds_of_size(
        &self,
        n: usize,
        by_size: &[Vec<RintCmd>],
        preds: &[Vec<RintPred>],
    ) -> Vec<RintCmd> {
        if n == 1 {
            return self.atoms();
        }
        let mut out = Vec::new();
        // c1; c2 with c1 not itself a sequence
        for a in 1..n - 1 {
            let b = n - 1 - a;
            for c1 in by_size[a].iter().filter(|c| !matches!(c, Cmd::Seq(..))) {
                for c2 in &by_size[b] {
                    out.push(Cmd::seq(c1.clone(), c2.clone()));
                }
            }
        }
        // if p then c1 else c2 fi q
        for (sp, sc1, sc2, sq) in splits4(n - 1) {
            for p in &preds[sp] {
                for c1 in &by_size[sc1] {
                    for c2 in &by_size[sc2] {
                        for q in &preds[sq] {
                            out.push(Cmd::if_(p.clone(), c1.clone(), c2.clone(), q.clone()));
                        }
                    }
                }
            }
        }
        // from p do c until q
        for (sp, sc, sq) in splits3(n - 1) {
            for p in &preds[sp] {
                for c in &by_size[sc] {
                    for q in &preds[sq] {
                        out.push(Cmd::from_loop(p.clone(), c.clone(), q.clone()));
                    }
                }
            }
        }
        out
    }
}

/// Shorthand for [`ProgramEnumerator::new`] with the default constant pool.
pub fn enumerate_programs(max_size: usize, k: usize) -> Vec<RintProgram> {
    ProgramEnumerator::new(max_size, k).programs()
}

fn splits3(total: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 1..total {
        for b in 1..total - a {
            let c = total - a - b;
            if c >= 1 {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn splits4(total: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 1..total {
        for (b, c, d) in splits3(total - a) {
            out.push((a, b, c, d));
        }
    }
    out
}

/// Leaf predicates under `not`s, indexed by exact size.
fn control_preds(max_size: usize, k: usize) -> Vec<Vec<RintPred>> {
    let mut by_size = vec![Vec::new()];
    if max_size == 0 {
        return by_size;
    }
    let mut leaves = vec![Pred::True, Pred::False];
    leaves.extend((1..=k).map(|i| Pred::Elem(VarZero(i))));
    by_size.push(leaves);
    for n in 2..=max_size {
        let next = by_size[n - 1].iter().cloned().map(Pred::not).collect();
        by_size.push(next);
    }
    by_size
}

/// Every predicate over `tt`, `ff`, `x1..xk`, `not`, `and`, `or` with at
/// most `max_size` nodes.
pub fn enumerate_predicates(max_size: usize, k: usize) -> Vec<RintPred> {
    let mut by_size: Vec<Vec<RintPred>> = vec![Vec::new()];
    for n in 1..=max_size {
        let mut out = Vec::new();
        if n == 1 {
            out.extend([Pred::True, Pred::False]);
            out.extend((1..=k).map(|i| Pred::Elem(VarZero(i))));
        } else {
            out.extend(by_size[n - 1].iter().cloned().map(Pred::not));
            for a in 1..n - 1 {
                let b = n - 1 - a;
                for p in &by_size[a] {
                    for q in &by_size[b] {
                        out.push(Pred::and(p.clone(), q.clone()));
                        out.push(Pred::or(p.clone(), q.clone()));
                    }
                }
            }
        }
        by_size.push(out);
    }
    by_size.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rint::print_cmd;
    use std::collections::HashSet;

    #[test]
    fn size_one_programs() {
        let ps = enumerate_programs(1, 2);
        let texts: Vec<String> = ps.iter().map(|p| print_cmd(&p.body)).collect();
        assert_eq!(ps.len(), 11);
        assert_eq!(&texts[..3], ["skip", "x1 += x2", "x2 += x1"]);
        assert!(texts.contains(&"x1 += -1".to_string()));
        assert!(!texts.iter().any(|t| t == "x1 += x1"));
    }

    #[test]
    fn empty_for_size_zero() {
        assert!(enumerate_programs(0, 2).is_empty());
    }

    // counts by size: 11, 0, 11², 4·11·4, 11·121 + 4·11·11·4 + 2·4·11·4
    #[test]
    fn counts_match_combinatorics() {
        let count = |n| {
            enumerate_programs(n, 2)
                .iter()
                .filter(|p| p.body.size() == n)
                .count()
        };
        assert_eq!(count(2), 0);
        assert_eq!(count(3), 121);
        assert_eq!(count(4), 176);
        let all = enumerate_programs(5, 2);
        assert_eq!(all.len(), 11 + 121 + 176 + 1331 + 1936 + 352);
        assert!(all.iter().all(|p| p.body.size() <= 5));
    }

    #[test]
    fn programs_are_distinct_and_deterministic() {
        let a = enumerate_programs(5, 2);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
        assert_eq!(a, enumerate_programs(5, 2));
    }

    #[test]
    fn predicate_counts() {
        // 4 leaves; 4 negations; 4 double negations + 16 and + 16 or
        assert_eq!(enumerate_predicates(3, 2).len(), 4 + 4 + 36);
        assert_eq!(enumerate_predicates(1, 1).len(), 3);
    }
}
