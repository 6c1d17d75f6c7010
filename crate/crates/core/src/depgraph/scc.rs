use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::{Edge, LabelledDepGraph};
use crate::model::VarId;

#[derive(Clone, Debug)]
pub struct Component {
    /// Position in the topological order.
    pub id: usize,
    pub vertices: Vec<VarId>,
    /// Has a cycle (more than one vertex, or a self-loop).
    pub nontrivial: bool,
    /// Confluence: the largest label set of a member.
    pub beta: usize,
    /// Edges entering from other components.
    pub incoming: Vec<Edge>,
    /// Edges with both endpoints in the component.
    pub internal: Vec<Edge>,
}

#[derive(Clone, Debug)]
pub struct SccAnalysis {
    /// Components in topological order of the condensation.
    pub components: Vec<Component>,
    pub comp_of: BTreeMap<VarId, usize>,
    /// `λ(v)`: labels of in-edges of `v` from its own component.
    pub lambda: BTreeMap<VarId, BTreeSet<VarId>>,
    /// Direct predecessors (`C_j ≺ C_i`) of each component.
    pub preds: Vec<BTreeSet<usize>>,
}

impl SccAnalysis {
    pub fn component_of(&self, v: VarId) -> &Component {
        &self.components[self.comp_of[&v]]
    }

    pub fn beta_of(&self, v: VarId) -> usize {
        self.lambda.get(&v).map_or(0, BTreeSet::len)
    }

    /// All components `C_j` with `C_j ≺⁺ C_i`.
    pub fn ancestors(&self, i: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<usize> = self.preds[i].iter().copied().collect();
        while let Some(j) = stack.pop() {
            if out.insert(j) {
                stack.extend(self.preds[j].iter().copied());
            }
        }
        out
    }
}

/// SCCs via Tarjan's algorithm; the condensation is ordered topologically,
/// breaking ties by the smallest member rule id (then variable id).
pub fn scc_analysis(g: &LabelledDepGraph) -> SccAnalysis {
    scc_analysis_with(g, |v| v.0 as usize)
}

/// As [`scc_analysis`], with `key` giving the tie-break key of a vertex.
pub fn scc_analysis_with(g: &LabelledDepGraph, key: impl Fn(VarId) -> usize) -> SccAnalysis {
    let mut dg: DiGraph<VarId, ()> = DiGraph::new();
    let idx: BTreeMap<VarId, NodeIndex> = g.vertices.iter().map(|&v| (v, dg.add_node(v))).collect();
    for e in &g.edges {
        dg.add_edge(idx[&e.from], idx[&e.to], ());
    }
    let raw: Vec<Vec<VarId>> = tarjan_scc(&dg)
        .into_iter()
        .map(|c| {
            let mut vs: Vec<VarId> = c.into_iter().map(|n| dg[n]).collect();
            vs.sort();
            vs
        })
        .collect();
    let mut raw_of: BTreeMap<VarId, usize> = BTreeMap::new();
    for (i, c) in raw.iter().enumerate() {
        for &v in c {
            raw_of.insert(v, i);
        }
    }
    let n = raw.len();
    let mut raw_preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for e in &g.edges {
        let (a, b) = (raw_of[&e.from], raw_of[&e.to]);
        if a != b {
            raw_preds[b].insert(a);
        }
    }
    // Kahn's algorithm, always taking the ready component with the least key.
    let ckey = |c: &Vec<VarId>| (c.iter().map(|&v| key(v)).min().unwrap_or(0), c[0]);
    let mut indeg: Vec<usize> = raw_preds.iter().map(BTreeSet::len).collect();
    let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (b, ps) in raw_preds.iter().enumerate() {
        for &a in ps {
            succs[a].push(b);
        }
    }
    let mut ready: BTreeSet<((usize, VarId), usize)> = (0..n)
        .filter(|&i| indeg[i] == 0)
        .map(|i| (ckey(&raw[i]), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.iter().next().copied() {
        ready.remove(&first);
        let i = first.1;
        order.push(i);
        for &s in &succs[i] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.insert((ckey(&raw[s]), s));
            }
        }
    }
    let mut new_id = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        new_id[i] = pos;
    }
    let mut comp_of = BTreeMap::new();
    for (v, &i) in &raw_of {
        comp_of.insert(*v, new_id[i]);
    }
    let mut lambda: BTreeMap<VarId, BTreeSet<VarId>> =
        g.vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
    for e in &g.edges {
        if comp_of[&e.from] == comp_of[&e.to] {
            lambda.get_mut(&e.to).expect("vertex").insert(e.label);
        }
    }
    let mut components: Vec<Component> = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| Component {
            id: pos,
            vertices: raw[i].clone(),
            nontrivial: false,
            beta: 0,
            incoming: Vec::new(),
            internal: Vec::new(),
        })
        .collect();
    for e in &g.edges {
        let (a, b) = (comp_of[&e.from], comp_of[&e.to]);
        if a == b {
            components[b].internal.push(*e);
        } else {
            components[b].incoming.push(*e);
        }
    }
    for c in &mut components {
        c.nontrivial = c.vertices.len() > 1 || !c.internal.is_empty();
        c.beta = c.vertices.iter().map(|v| lambda[v].len()).max().unwrap_or(0);
    }
    let preds = order
        .iter()
        .map(|&i| raw_preds[i].iter().map(|&j| new_id[j]).collect())
        .collect();
    SccAnalysis {
        components,
        comp_of,
        lambda,
        preds,
    }
}
