use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Mutex;

use serde_json::{json, Value};
use thiserror::Error;

use super::path::Propagation;
use crate::depgraph::{vertex_name, Component, Edge};
use crate::model::{Program, VarId};
use crate::par::{par_map, Parallelism};

pub const DEFAULT_PATH_CAP: usize = 10_000;
/// Step pairs allowed per component, as a multiple of the path cap.
const PAIR_FACTOR: usize = 100;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EbarError {
    #[error("component without E contains the cycle {0:?}")]
    Cyclic(Vec<Edge>),
    #[error("more than {0} E-bar paths")]
    TooMany(usize),
}

/// Topological order of `vertices` under `edges`, or a cycle.
pub fn topo_order(vertices: &[VarId], edges: &[Edge]) -> Result<Vec<VarId>, Vec<Edge>> {
    let mut indeg: BTreeMap<VarId, usize> = vertices.iter().map(|&v| (v, 0)).collect();
    for e in edges {
        *indeg.entry(e.to).or_default() += 1;
        indeg.entry(e.from).or_default();
    }
    let mut ready: BTreeSet<VarId> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
    let mut order = Vec::with_capacity(indeg.len());
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for e in edges.iter().filter(|e| e.from == v) {
            let d = indeg.get_mut(&e.to).expect("vertex");
            *d -= 1;
            if *d == 0 {
                ready.insert(e.to);
            }
        }
    }
    if order.len() == indeg.len() {
        return Ok(order);
    }
    Err(find_cycle(edges).expect("Kahn left vertices, so a cycle exists"))
}

/// Some cycle among `edges`, as an edge sequence.
pub fn find_cycle(edges: &[Edge]) -> Option<Vec<Edge>> {
    let mut out: BTreeMap<VarId, Vec<Edge>> = BTreeMap::new();
    for e in edges {
        out.entry(e.from).or_default().push(*e);
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: HashMap<VarId, u8> = HashMap::new();
    let starts: Vec<VarId> = out.keys().copied().collect();
    for s in starts {
        if state.get(&s).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(VarId, usize)> = vec![(s, 0)];
        let mut trail: Vec<Edge> = Vec::new();
        state.insert(s, 1);
        while let Some(&mut (v, ref mut i)) = stack.last_mut() {
            let succ = out.get(&v).map(Vec::as_slice).unwrap_or(&[]);
            if *i < succ.len() {
                let e = succ[*i];
                *i += 1;
                match state.get(&e.to).copied().unwrap_or(0) {
                    0 => {
                        state.insert(e.to, 1);
                        trail.push(e);
                        stack.push((e.to, 0));
                    }
                    1 => {
                        let at = trail.iter().position(|t| t.from == e.to).unwrap_or(trail.len());
                        let mut cyc = trail[at..].to_vec();
                        cyc.push(e);
                        return Some(cyc);
                    }
                    _ => {}
                }
            } else {
                state.insert(v, 2);
                stack.pop();
                trail.pop();
            }
        }
    }
    None
}

/// An `Ē`-path; `start` matters only for the empty path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EbarPath {
    pub start: VarId,
    pub edges: Vec<Edge>,
}

/// All `Ē`-paths of a component: paths over `edges ∖ e` from an `E`-target to
/// an `E`-source, including the empty path at vertices that are both.
pub fn enumerate_ebar_paths(edges: &[Edge], e: &[Edge], cap: usize) -> Result<Vec<EbarPath>, EbarError> {
    let rest: Vec<Edge> = edges.iter().filter(|x| !e.contains(x)).copied().collect();
    let verts: Vec<VarId> = edges.iter().flat_map(|x| [x.from, x.to]).collect();
    topo_order(&verts, &rest).map_err(EbarError::Cyclic)?;
    let targets: BTreeSet<VarId> = e.iter().map(|x| x.to).collect();
    let sources: BTreeSet<VarId> = e.iter().map(|x| x.from).collect();
    let mut succ: BTreeMap<VarId, Vec<Edge>> = BTreeMap::new();
    for x in &rest {
        succ.entry(x.from).or_default().push(*x);
    }
    let mut out = Vec::new();
    for &t in &targets {
        let mut cur = Vec::new();
        walk(t, t, &succ, &sources, &mut cur, &mut out, cap)?;
    }
    Ok(out)
}

fn walk(
    start: VarId,
    v: VarId,
    succ: &BTreeMap<VarId, Vec<Edge>>,
    sources: &BTreeSet<VarId>,
    cur: &mut Vec<Edge>,
    out: &mut Vec<EbarPath>,
    cap: usize,
) -> Result<(), EbarError> {
    if sources.contains(&v) {
        if out.len() >= cap {
            return Err(EbarError::TooMany(cap));
        }
        out.push(EbarPath {
            start,
            edges: cur.clone(),
        });
    }
    for x in succ.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
        cur.push(*x);
        walk(start, x.to, succ, sources, cur, out, cap)?;
        cur.pop();
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Cycle(Vec<Edge>),
    Labels(Edge, Edge),
    Base(Vec<Edge>),
    Step { a: Vec<Edge>, b: Vec<Edge>, e: Edge },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    Holds,
    Fails(Witness),
    /// Not evaluated because an earlier condition failed.
    Skipped,
    /// The path cap was reached before the condition could be decided.
    Inconclusive,
}

impl Condition {
    pub fn holds(&self) -> bool {
        *self == Condition::Holds
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPair {
    pub a: Vec<Edge>,
    pub b: Vec<Edge>,
    pub e: Edge,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub component: usize,
    pub vertices: Vec<VarId>,
    pub edges: Vec<Edge>,
    pub e: Vec<Edge>,
    pub conditions: [Condition; 4],
    /// Topological order of the component without `E`, when acyclic.
    pub order: Option<Vec<VarId>>,
    pub base_paths: Vec<Vec<Edge>>,
    pub step_pairs: Vec<StepPair>,
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        self.conditions.iter().all(Condition::holds)
    }

    pub fn inconclusive(&self) -> bool {
        self.conditions.contains(&Condition::Inconclusive)
    }

    pub fn reasons(&self, p: &Program) -> Vec<String> {
        let path = |es: &[Edge]| {
            if es.is_empty() {
                "(empty)".to_string()
            } else {
                es.iter().map(|e| e.display(p)).collect::<Vec<_>>().join(" ; ")
            }
        };
        let mut out = Vec::new();
        for (i, c) in self.conditions.iter().enumerate() {
            let msg = match c {
                Condition::Holds | Condition::Skipped => continue,
                Condition::Inconclusive => "path cap reached".to_string(),
                Condition::Fails(Witness::Cycle(c)) => format!("cycle without E: {}", path(c)),
                Condition::Fails(Witness::Labels(a, b)) => {
                    format!("E-edges {} and {} share a target but not a label", a.display(p), b.display(p))
                }
                Condition::Fails(Witness::Base(x)) => format!("not base-propagating: {}", path(x)),
                Condition::Fails(Witness::Step { a, b, e }) => format!(
                    "not step-propagating for {}: {} | {}",
                    e.display(p),
                    path(a),
                    path(b)
                ),
            };
            out.push(format!("condition {}: {}", i + 1, msg));
        }
        out
    }

    pub fn to_json(&self, p: &Program) -> Value {
        let edges = |es: &[Edge]| es.iter().map(|e| e.display(p)).collect::<Vec<_>>();
        let verdict = if self.holds() {
            "saturating"
        } else if self.inconclusive() {
            "inconclusive"
        } else {
            "not-saturating"
        };
        json!({
            "vertices": self.vertices.iter().map(|&v| vertex_name(p, v)).collect::<Vec<_>>(),
            "edges": edges(&self.edges),
            "E": edges(&self.e),
            "conditions": self.conditions.iter().map(Condition::holds).collect::<Vec<_>>(),
            "basePathsChecked": self.base_paths.len(),
            "stepPairsChecked": self.step_pairs.len(),
            "verdict": verdict,
            "reasons": self.reasons(p),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum PropKey {
    Base(Vec<Edge>),
    Step(Vec<Edge>, Vec<Edge>, Edge),
}

/// Propagation results shared between candidate edge sets.
pub struct PropCache<'p> {
    prop: Propagation<'p>,
    memo: Mutex<HashMap<PropKey, bool>>,
    par: Parallelism,
}

impl<'p> PropCache<'p> {
    pub fn new(p: &'p Program, par: Parallelism) -> PropCache<'p> {
        PropCache {
            prop: Propagation::new(p),
            memo: Mutex::new(HashMap::new()),
            par,
        }
    }

    pub fn program(&self) -> &'p Program {
        self.prop.program()
    }

    pub fn len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Evaluates `keys` (missing ones concurrently) and returns results in order.
    fn eval(&self, keys: &[PropKey]) -> Vec<bool> {
        let missing: Vec<PropKey> = {
            let memo = self.memo.lock().unwrap();
            let mut seen = HashSet::new();
            keys.iter()
                .filter(|k| !memo.contains_key(k) && seen.insert(*k))
                .cloned()
                .collect()
        };
        let results = par_map(self.par, &missing, |k| match k {
            PropKey::Base(path) => self.prop.is_base_propagating(path).unwrap_or(false),
            PropKey::Step(a, b, e) => self.prop.is_step_propagating(a, b, *e).unwrap_or(false),
        });
        let mut memo = self.memo.lock().unwrap();
        for (k, r) in missing.into_iter().zip(results) {
            memo.insert(k, r);
        }
        keys.iter().map(|k| memo[k]).collect()
    }
}

/// Checks all four conditions for `c` and `e`, evaluating every condition
/// that can be evaluated.
pub fn check_e_saturating(p: &Program, c: &Component, e: &[Edge]) -> CheckReport {
    let cache = PropCache::new(p, Parallelism::default());
    check_with(&cache, c, e, DEFAULT_PATH_CAP, false)
}

/// As [`check_e_saturating`] with a shared cache. With `lazy`, stops at the
/// first failing condition.
pub fn check_with(cache: &PropCache<'_>, c: &Component, e: &[Edge], cap: usize, lazy: bool) -> CheckReport {
    let mut e: Vec<Edge> = e.to_vec();
    e.sort();
    e.dedup();
    let mut rep = CheckReport {
        component: c.id,
        vertices: c.vertices.clone(),
        edges: c.internal.clone(),
        e: e.clone(),
        conditions: [Condition::Skipped, Condition::Skipped, Condition::Skipped, Condition::Skipped],
        order: None,
        base_paths: Vec::new(),
        step_pairs: Vec::new(),
    };
    let rest: Vec<Edge> = c.internal.iter().filter(|x| !e.contains(x)).copied().collect();
    match topo_order(&c.vertices, &rest) {
        Ok(o) => {
            rep.order = Some(o);
            rep.conditions[0] = Condition::Holds;
        }
        Err(cyc) => rep.conditions[0] = Condition::Fails(Witness::Cycle(cyc)),
    }
    rep.conditions[1] = Condition::Holds;
    'outer: for (i, a) in e.iter().enumerate() {
        for b in &e[i + 1..] {
            if a.to == b.to && a.label != b.label {
                rep.conditions[1] = Condition::Fails(Witness::Labels(*a, *b));
                break 'outer;
            }
        }
    }
    if rep.order.is_none() || (lazy && !rep.conditions[1].holds()) {
        return rep;
    }
    let ebar = match enumerate_ebar_paths(&c.internal, &e, cap) {
        Ok(x) => x,
        Err(_) => {
            rep.conditions[2] = Condition::Inconclusive;
            rep.conditions[3] = Condition::Inconclusive;
            return rep;
        }
    };
    let mut starts: Vec<Vec<Edge>> = Vec::new();
    for x in &e {
        for q in ebar.iter().filter(|q| q.start == x.to) {
            let mut path = vec![*x];
            path.extend_from_slice(&q.edges);
            starts.push(path);
        }
    }
    let pair_bound = starts.len().saturating_mul(starts.len()).saturating_mul(e.len());
    if starts.len() > cap || pair_bound > cap.saturating_mul(PAIR_FACTOR) {
        rep.conditions[2] = Condition::Inconclusive;
        rep.conditions[3] = Condition::Inconclusive;
        return rep;
    }
    let keys: Vec<PropKey> = starts.iter().map(|s| PropKey::Base(s.clone())).collect();
    let res = cache.eval(&keys);
    rep.base_paths = starts.clone();
    rep.conditions[2] = match starts.iter().zip(&res).find(|(_, ok)| !**ok) {
        None => Condition::Holds,
        Some((s, _)) => Condition::Fails(Witness::Base(s.clone())),
    };
    if lazy && !rep.conditions[2].holds() {
        return rep;
    }
    let mut pairs = Vec::new();
    for a in &starts {
        let end = a.last().expect("nonempty").to;
        for b in starts.iter().filter(|b| b[0].from == end) {
            for &x in &e {
                pairs.push(StepPair {
                    a: a.clone(),
                    b: b.clone(),
                    e: x,
                });
            }
        }
    }
    let keys: Vec<PropKey> = pairs
        .iter()
        .map(|s| PropKey::Step(s.a.clone(), s.b.clone(), s.e))
        .collect();
    let res = cache.eval(&keys);
    rep.conditions[3] = match pairs.iter().zip(&res).find(|(_, ok)| !**ok) {
        None => Condition::Holds,
        Some((s, _)) => Condition::Fails(Witness::Step {
            a: s.a.clone(),
            b: s.b.clone(),
            e: s.e,
        }),
    };
    rep.step_pairs = pairs;
    rep
}
