use std::collections::BTreeMap;
use std::rc::Rc;

use crate::arboreal::TermTree;
use crate::chase::ChaseTrace;
use crate::model::{Atom, FactStore, Program};

/// Deepest node of the smallest root path holding all `nodes`; the root for
/// an empty set. `None` when the nodes are not on one path.
fn deepest(tree: &TermTree, nodes: impl IntoIterator<Item = usize>) -> Option<usize> {
    let ns: Vec<usize> = nodes.into_iter().collect();
    if ns.is_empty() {
        return Some(0);
    }
    tree.common_path(ns)
}

/// `P(α)` as a root-first node list.
pub fn atom_path(tree: &TermTree, a: &Atom) -> Option<Vec<usize>> {
    deepest(tree, a.args.iter().map(|&t| tree.node_of(t))).map(|n| tree.path(n))
}

/// `P_B(i)` as a root-first node list.
pub fn body_path(p: &Program, trace: &ChaseTrace, tree: &TermTree, step: usize) -> Option<Vec<usize>> {
    let s = &trace.steps[step];
    let r = p.rule(s.rule);
    deepest(tree, r.body_vars().into_iter().filter_map(|v| s.image(v)).map(|t| tree.node_of(t))).map(|n| tree.path(n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskTree {
    pub depth: usize,
    pub step: usize,
    pub children: Vec<Rc<TaskTree>>,
}

impl TaskTree {
    /// Children before parents, siblings by increasing depth.
    pub fn schedule(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.post_order(&mut out);
        out
    }

    fn post_order(&self, out: &mut Vec<usize>) {
        for c in &self.children {
            c.post_order(out);
        }
        out.push(self.step);
    }

    pub fn schedule_len(&self) -> usize {
        1 + self.children.iter().map(|c| c.schedule_len()).sum::<usize>()
    }

    /// Every node's step exceeds the steps of its descendants.
    pub fn steps_decrease(&self) -> bool {
        self.children
            .iter()
            .all(|c| c.max_step() < self.step && c.steps_decrease())
    }

    fn max_step(&self) -> usize {
        self.children.iter().map(|c| c.max_step()).max().unwrap_or(0).max(self.step)
    }
}

pub fn schedule_sequence(t: &TaskTree) -> Vec<usize> {
    t.schedule()
}

/// Builds task trees over one terminated trace.
pub struct TaskPlanner<'a> {
    p: &'a Program,
    trace: &'a ChaseTrace,
    tree: &'a TermTree,
    /// Steps producing a new atom whose path ends at the node, ascending.
    producers: BTreeMap<usize, Vec<usize>>,
    memo: BTreeMap<(usize, usize), Rc<TaskTree>>,
}

impl<'a> TaskPlanner<'a> {
    pub fn new(p: &'a Program, trace: &'a ChaseTrace, interp: &'a FactStore, tree: &'a TermTree) -> Self {
        let mut producers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in &trace.steps {
            let mut nodes: Vec<usize> = (s.new_facts.0..s.new_facts.1)
                .filter_map(|k| deepest(tree, interp.get(k).args.iter().map(|&t| tree.node_of(t))))
                .collect();
            nodes.sort_unstable();
            nodes.dedup();
            for n in nodes {
                producers.entry(n).or_default().push(s.index);
            }
        }
        TaskPlanner {
            p,
            trace,
            tree,
            producers,
            memo: BTreeMap::new(),
        }
    }

    /// Task tree rooted at `⟨d, i⟩`.
    pub fn task_tree(&mut self, d: usize, i: usize) -> Rc<TaskTree> {
        if let Some(t) = self.memo.get(&(d, i)) {
            return t.clone();
        }
        let path = body_path(self.p, self.trace, self.tree, i).unwrap_or_else(|| vec![0]);
        let mut children = Vec::new();
        for e in d..=path.len() {
            let node = path[e - 1];
            let Some(steps) = self.producers.get(&node) else { continue };
            let k = steps.partition_point(|&j| j < i);
            if k > 0 {
                let j = steps[k - 1];
                children.push(self.task_tree(e, j));
            }
        }
        let t = Rc::new(TaskTree { depth: d, step: i, children });
        self.memo.insert((d, i), t.clone());
        t
    }
}

pub fn build_task_tree(p: &Program, trace: &ChaseTrace, interp: &FactStore, tree: &TermTree, step: usize) -> Rc<TaskTree> {
    TaskPlanner::new(p, trace, interp, tree).task_tree(1, step)
}
