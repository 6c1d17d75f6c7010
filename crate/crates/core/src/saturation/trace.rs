use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::path::path_query;
use crate::chase::ChaseTrace;
use crate::depgraph::{Edge, LabelledDepGraph};
use crate::matching::apply;
use crate::model::{FactStore, NullId, Program, Term, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceCheckError {
    #[error("chain edge {from} -{label}-> {to} has no dependency graph edge")]
    EdgeMissing { from: String, label: String, to: String },
    #[error("path query atom {atom} of chain {chain:?} is not in the interpretation")]
    PathQueryUnmatched { chain: Vec<String>, atom: String },
    #[error("rule of {edge} applied twice in one chain with the same context (steps {a} and {b})")]
    ContextRepeated { edge: String, a: usize, b: usize },
}

/// Null-to-null chain edges `(from, label, to)`.
fn null_chain(p: &Program, trace: &ChaseTrace) -> Vec<(NullId, VarId, NullId)> {
    trace
        .chain_edges(p)
        .into_iter()
        .filter_map(|c| c.from.as_null().map(|m| (m, c.label, c.to)))
        .collect()
}

/// Every chain edge between nulls projects onto an edge of the dependency
/// graph. Returns the number of edges checked.
pub fn check_edge_projection(p: &Program, g: &LabelledDepGraph, trace: &ChaseTrace) -> Result<usize, TraceCheckError> {
    let edges: HashSet<Edge> = g.edges.iter().copied().collect();
    let chain = null_chain(p, trace);
    for &(m, y, n) in &chain {
        let e = Edge {
            from: trace.var_of(m),
            label: y,
            to: trace.var_of(n),
        };
        if !edges.contains(&e) {
            return Err(TraceCheckError::EdgeMissing {
                from: trace.null_label(p, m),
                label: p.var_name(y).to_string(),
                to: trace.null_label(p, n),
            });
        }
    }
    Ok(chain.len())
}

/// For every chain of nulls with at most `max_len` edges (up to `limit`
/// chains), the path query of its projection holds in `interp` under the
/// substitution read off the trace. Returns the number of chains checked.
pub fn check_path_queries(
    p: &Program,
    trace: &ChaseTrace,
    interp: &FactStore,
    max_len: usize,
    limit: usize,
) -> Result<usize, TraceCheckError> {
    let mut succ: HashMap<NullId, Vec<(VarId, NullId)>> = HashMap::new();
    for (m, y, n) in null_chain(p, trace) {
        succ.entry(m).or_default().push((y, n));
    }
    let mut starts: Vec<NullId> = succ.keys().copied().collect();
    starts.sort();
    let mut checked = 0;
    let mut stack: Vec<Vec<(NullId, VarId)>> = starts.iter().map(|&n| vec![(n, VarId(u32::MAX))]).collect();
    stack.reverse();
    while let Some(chain) = stack.pop() {
        if checked >= limit {
            break;
        }
        if chain.len() > 1 {
            check_one(p, trace, interp, &chain)?;
            checked += 1;
        }
        if chain.len() <= max_len {
            let last = chain.last().expect("nonempty").0;
            for &(y, n) in succ.get(&last).map(Vec::as_slice).unwrap_or(&[]).iter().rev() {
                let mut next = chain.clone();
                next.push((n, y));
                stack.push(next);
            }
        }
    }
    Ok(checked)
}

fn check_one(p: &Program, trace: &ChaseTrace, interp: &FactStore, chain: &[(NullId, VarId)]) -> Result<(), TraceCheckError> {
    let edges: Vec<Edge> = chain
        .windows(2)
        .map(|w| Edge {
            from: trace.var_of(w[0].0),
            label: w[1].1,
            to: trace.var_of(w[1].0),
        })
        .collect();
    let names = || chain.iter().map(|c| trace.null_label(p, c.0)).collect::<Vec<_>>();
    let q = path_query(p, &edges).map_err(|_| TraceCheckError::EdgeMissing {
        from: names().join(" "),
        label: String::new(),
        to: String::new(),
    })?;
    let mut theta: HashMap<VarId, Term> = HashMap::new();
    for (i, s) in q.steps.iter().enumerate() {
        let n = chain[i + 1].0;
        let step = &trace.steps[trace.step_of(n)];
        for (&orig, &renamed) in &s.rename {
            if let Some(t) = step.image(orig) {
                theta.insert(renamed, t);
            }
        }
    }
    theta.insert(q.y(q.len() + 1), Term::Null(chain[chain.len() - 1].0));
    for a in q.atoms() {
        let ga = apply(&a, &theta);
        if !interp.contains(&ga) {
            return Err(TraceCheckError::PathQueryUnmatched {
                chain: names(),
                atom: ga.to_string(),
            });
        }
    }
    Ok(())
}

/// Along any chain that enters and leaves through the same edge `u →y v` of
/// `e_sets`, the two applications of the rule of `v` differ on the frontier
/// variables other than `y`. Returns the number of step pairs compared.
pub fn check_context_distinct(p: &Program, trace: &ChaseTrace, e_sets: &[Edge]) -> Result<usize, TraceCheckError> {
    let mut succ: HashMap<NullId, Vec<NullId>> = HashMap::new();
    for (m, _, n) in null_chain(p, trace) {
        succ.entry(m).or_default().push(n);
    }
    let mut compared = 0;
    for e in e_sets {
        let rid = p.rule_of_var(e.to);
        let r = p.rule(rid);
        let z: Vec<VarId> = r.frontier.iter().copied().filter(|&x| x != e.label).collect();
        let apps: Vec<usize> = trace
            .steps
            .iter()
            .filter(|s| s.rule == rid)
            .filter(|s| matches!(s.image(e.label), Some(Term::Null(m)) if trace.var_of(m) == e.from))
            .map(|s| s.index)
            .collect();
        for (i, &a) in apps.iter().enumerate() {
            let sa = &trace.steps[a];
            let Some(Term::Null(n1)) = sa.image(e.to) else { continue };
            let mut seen: BTreeSet<NullId> = BTreeSet::from([n1]);
            let mut queue = VecDeque::from([n1]);
            while let Some(m) = queue.pop_front() {
                for &n in succ.get(&m).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
            let ctx_a: Vec<Option<Term>> = z.iter().map(|&x| sa.image(x)).collect();
            for &b in &apps[i + 1..] {
                let sb = &trace.steps[b];
                let Some(Term::Null(m)) = sb.image(e.label) else { continue };
                if !seen.contains(&m) {
                    continue;
                }
                compared += 1;
                let ctx_b: Vec<Option<Term>> = z.iter().map(|&x| sb.image(x)).collect();
                if ctx_a == ctx_b {
                    return Err(TraceCheckError::ContextRepeated {
                        edge: e.display(p),
                        a,
                        b,
                    });
                }
            }
        }
    }
    Ok(compared)
}
