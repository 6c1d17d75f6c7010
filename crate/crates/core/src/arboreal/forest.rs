use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use thiserror::Error;

use super::ArboreousInfo;
use crate::chase::ChaseTrace;
use crate::model::{FactStore, NullId, Program, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantViolation {
    #[error("null {0} has {1} forest parents")]
    InDegree(String, usize),
    #[error("null forest has a cycle through {0}")]
    ForestCycle(String),
    #[error("null {null} belongs to the sets of steps {a} and {b}")]
    Overlap { null: String, a: usize, b: usize },
    #[error("term-tree node of step {step} has {count} predecessors")]
    TreeInDegree { step: usize, count: usize },
    #[error("term tree has a cycle through the node of step {0}")]
    TreeCycle(usize),
}

/// Nulls of `Ĉ` variables with the chain edges between them.
#[derive(Clone, Debug, Default)]
pub struct NullForest {
    pub nodes: BTreeSet<NullId>,
    pub edges: Vec<(NullId, NullId)>,
    pub parent: BTreeMap<NullId, NullId>,
}

impl NullForest {
    pub fn children(&self) -> BTreeMap<NullId, Vec<NullId>> {
        let mut out: BTreeMap<NullId, Vec<NullId>> = BTreeMap::new();
        for &(a, b) in &self.edges {
            out.entry(a).or_default().push(b);
        }
        out
    }

    pub fn roots(&self) -> Vec<NullId> {
        self.nodes.iter().copied().filter(|n| !self.parent.contains_key(n)).collect()
    }
}

pub fn build_null_forest(p: &Program, trace: &ChaseTrace, info: &ArboreousInfo) -> Result<NullForest, InvariantViolation> {
    let nodes: BTreeSet<NullId> = (0..trace.nulls.len() as u32)
        .map(NullId)
        .filter(|&n| info.c_hat.contains(&trace.var_of(n)))
        .collect();
    let mut edges = BTreeSet::new();
    for c in trace.chain_edges(p) {
        if let Some(m) = c.from.as_null() {
            if nodes.contains(&m) && nodes.contains(&c.to) {
                edges.insert((m, c.to));
            }
        }
    }
    let edges: Vec<(NullId, NullId)> = edges.into_iter().collect();
    let mut parents: BTreeMap<NullId, Vec<NullId>> = BTreeMap::new();
    for &(a, b) in &edges {
        parents.entry(b).or_default().push(a);
    }
    let mut parent = BTreeMap::new();
    for (n, ps) in parents {
        if ps.len() > 1 {
            return Err(InvariantViolation::InDegree(trace.null_label(p, n), ps.len()));
        }
        parent.insert(n, ps[0]);
    }
    for &n in &nodes {
        let mut cur = n;
        let mut hops = 0;
        while let Some(&q) = parent.get(&cur) {
            hops += 1;
            if q == n || hops > nodes.len() {
                return Err(InvariantViolation::ForestCycle(trace.null_label(p, n)));
            }
            cur = q;
        }
    }
    Ok(NullForest { nodes, edges, parent })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Creating `Ê`-step, `None` for the root `𝔅0`.
    pub step: Option<usize>,
    pub terms: BTreeSet<Term>,
    pub parent: Option<usize>,
    pub depth: usize,
}

/// Term tree; node 0 is the root `𝔅0`, the others follow their creating
/// steps in order.
#[derive(Clone, Debug)]
pub struct TermTree {
    pub nodes: Vec<TreeNode>,
    node_of: HashMap<Term, usize>,
}

impl TermTree {
    /// `𝔅(t)`. Terms outside the chase (constants of the program only) are
    /// placed at the root.
    pub fn node_of(&self, t: Term) -> usize {
        self.node_of.get(&t).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_ancestor_or_self(&self, a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.nodes[b].parent {
                Some(q) => b = q,
                None => return false,
            }
        }
    }

    /// Root-first path `P(𝔅)`.
    pub fn path(&self, mut n: usize) -> Vec<usize> {
        let mut out = vec![n];
        while let Some(q) = self.nodes[n].parent {
            out.push(q);
            n = q;
        }
        out.reverse();
        out
    }

    /// Deepest node when all nodes of `ns` lie on one root path.
    pub fn common_path(&self, ns: impl IntoIterator<Item = usize>) -> Option<usize> {
        let ns: BTreeSet<usize> = ns.into_iter().collect();
        let deepest = *ns.iter().max_by_key(|&&n| (self.nodes[n].depth, n))?;
        ns.iter().all(|&n| self.is_ancestor_or_self(n, deepest)).then_some(deepest)
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }
}

pub fn build_term_tree(
    p: &Program,
    trace: &ChaseTrace,
    interp: &FactStore,
    info: &ArboreousInfo,
    forest: &NullForest,
) -> Result<TermTree, InvariantViolation> {
    let mut seeds: BTreeMap<usize, Vec<NullId>> = BTreeMap::new();
    for s in &trace.steps {
        if info.e_rules.contains(&s.rule) && !s.extension.is_empty() {
            seeds.insert(s.index, s.extension.iter().map(|&(_, n)| n).collect());
        }
    }
    let in_r: BTreeSet<NullId> = seeds.values().flatten().copied().collect();
    let children = forest.children();
    let mut owner: HashMap<NullId, usize> = HashMap::new();
    let mut nodes = vec![TreeNode {
        step: None,
        terms: BTreeSet::new(),
        parent: None,
        depth: 0,
    }];
    for (&step, r) in &seeds {
        let id = nodes.len();
        let mut terms = BTreeSet::new();
        let mut queue: VecDeque<NullId> = r.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            if let Some(&prev) = owner.get(&n) {
                if prev != id {
                    return Err(InvariantViolation::Overlap {
                        null: trace.null_label(p, n),
                        a: nodes[prev].step.unwrap_or(0),
                        b: step,
                    });
                }
                continue;
            }
            owner.insert(n, id);
            terms.insert(Term::Null(n));
            for &m in children.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
                if !in_r.contains(&m) {
                    queue.push_back(m);
                }
            }
        }
        nodes.push(TreeNode {
            step: Some(step),
            terms,
            parent: None,
            depth: 0,
        });
    }
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
    for &(a, b) in &forest.edges {
        if let (Some(&fa), Some(&fb)) = (owner.get(&a), owner.get(&b)) {
            if fa != fb {
                preds[fb].insert(fa);
            }
        }
    }
    for (id, ps) in preds.iter().enumerate().skip(1) {
        if ps.len() > 1 {
            return Err(InvariantViolation::TreeInDegree {
                step: nodes[id].step.unwrap_or(0),
                count: ps.len(),
            });
        }
        nodes[id].parent = Some(ps.iter().next().copied().unwrap_or(0));
    }
    for id in 1..nodes.len() {
        let mut cur = id;
        let mut depth = 0;
        while let Some(q) = nodes[cur].parent {
            depth += 1;
            if depth > nodes.len() {
                return Err(InvariantViolation::TreeCycle(nodes[id].step.unwrap_or(0)));
            }
            cur = q;
        }
        nodes[id].depth = depth;
    }
    let mut node_of: HashMap<Term, usize> = owner.iter().map(|(&n, &i)| (Term::Null(n), i)).collect();
    for t in interp.terms() {
        node_of.entry(t).or_insert_with(|| {
            nodes[0].terms.insert(t);
            0
        });
    }
    Ok(TermTree { nodes, node_of })
}

pub fn term_tree_dot(p: &Program, trace: &ChaseTrace, tree: &TermTree) -> String {
    let mut s = String::from("digraph termtree {\n  node [shape=box];\n");
    for (i, n) in tree.nodes.iter().enumerate() {
        let label = match n.step {
            None => format!("B0\\n{} terms", n.terms.len()),
            Some(st) => format!(
                "F[{st}] {}\\n{} terms",
                p.fmt_rule(p.rule(trace.steps[st].rule)).replace('"', "'"),
                n.terms.len()
            ),
        };
        let _ = writeln!(s, "  n{i} [label=\"{label}\"];");
    }
    for (i, n) in tree.nodes.iter().enumerate() {
        if let Some(q) = n.parent {
            let _ = writeln!(s, "  n{q} -> n{i};");
        }
    }
    s.push_str("}\n");
    s
}
