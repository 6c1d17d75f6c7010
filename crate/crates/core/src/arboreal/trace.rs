use thiserror::Error;

use super::{PositionOrder, TermTree};
use crate::chase::ChaseTrace;
use crate::model::{FactStore, Position, Program, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("fact {fact}: {left} ⪯ {right} but the node of argument {i} is not an ancestor of the node of argument {j}")]
pub struct OrderViolation {
    pub fact: String,
    pub left: String,
    pub right: String,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("step {step}: {side} terms are not on one root path of the term tree")]
pub struct LocalityViolation {
    pub step: usize,
    pub side: &'static str,
}

/// For every fact and surviving pair `⟨p,i⟩ ⪯ ⟨p,j⟩`, `𝔅(t_i)` is an
/// ancestor-or-self of `𝔅(t_j)`. Returns the number of pairs checked.
pub fn check_order_soundness(interp: &FactStore, tree: &TermTree, order: &PositionOrder) -> Result<usize, OrderViolation> {
    let mut checked = 0;
    for a in interp.iter() {
        for (i, &ti) in a.args.iter().enumerate() {
            for (j, &tj) in a.args.iter().enumerate() {
                if i == j {
                    continue;
                }
                let pi = Position { pred: a.pred, index: i as u32 + 1 };
                let pj = Position { pred: a.pred, index: j as u32 + 1 };
                if !order.holds(pi, pj) {
                    continue;
                }
                checked += 1;
                if !tree.is_ancestor_or_self(tree.node_of(ti), tree.node_of(tj)) {
                    return Err(OrderViolation {
                        fact: a.to_string(),
                        left: pi.to_string(),
                        right: pj.to_string(),
                        i: i + 1,
                        j: j + 1,
                    });
                }
            }
        }
    }
    Ok(checked)
}

/// Every step's body terms lie on one root path of the term tree, and so do
/// its head terms. Returns the number of steps checked.
pub fn check_locality(p: &Program, trace: &ChaseTrace, tree: &TermTree) -> Result<usize, LocalityViolation> {
    for s in &trace.steps {
        let r = p.rule(s.rule);
        let body: Vec<Term> = r.body_vars().into_iter().filter_map(|v| s.image(v)).collect();
        let head: Vec<Term> = r
            .frontier
            .iter()
            .chain(&r.existentials)
            .filter_map(|&v| s.image(v))
            .collect();
        for (side, terms) in [("body", body), ("head", head)] {
            if !terms.is_empty() && tree.common_path(terms.iter().map(|&t| tree.node_of(t))).is_none() {
                return Err(LocalityViolation { step: s.index, side });
            }
        }
    }
    Ok(trace.steps.len())
}
