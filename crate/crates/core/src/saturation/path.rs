use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::datalog::{entails_compiled, CompiledRule};
use crate::depgraph::Edge;
use crate::matching::apply;
use crate::model::{fmt_atom_named, Atom, Program, Term, VarId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("empty path")]
    Empty,
    #[error("edge {index} is not an edge shape of the program")]
    NotAnEdge { index: usize },
    #[error("edge {index} does not start where edge {} ends", index - 1)]
    NotComposable { index: usize },
}

/// One renamed rule variant of a path query.
#[derive(Clone, Debug)]
pub struct PathStep {
    pub edge: Edge,
    pub rule: usize,
    /// Original rule variable to its renamed copy.
    pub rename: BTreeMap<VarId, VarId>,
    pub body: Vec<Atom>,
    /// Renamed head with the edge target replaced by the next chaining variable.
    pub head: Vec<Atom>,
}

/// The conjunctive query of a path in the dependency graph.
#[derive(Clone, Debug)]
pub struct PathQuery {
    pub edges: Vec<Edge>,
    pub steps: Vec<PathStep>,
    /// Chaining variables `ỹ_1 .. ỹ_{k+1}` (index 0 is `ỹ_1`).
    pub y: Vec<VarId>,
    names: BTreeMap<VarId, String>,
    next: u32,
}

fn check_shape(p: &Program, e: &Edge) -> bool {
    let n = p.var_count() as u32;
    if e.from.0 >= n || e.to.0 >= n || e.label.0 >= n {
        return false;
    }
    let r = p.rule(p.rule_of_var(e.to));
    r.existentials.contains(&e.to)
        && r.frontier.contains(&e.label)
        && p.rule(p.rule_of_var(e.from)).existentials.contains(&e.from)
}

/// Builds the path query of `edges`.
///
/// Step `i` uses a variant of the rule of `edges[i].to` whose variables are
/// disjoint from every other step and from the program.
pub fn path_query(p: &Program, edges: &[Edge]) -> Result<PathQuery, PathError> {
    if edges.is_empty() {
        return Err(PathError::Empty);
    }
    for (i, e) in edges.iter().enumerate() {
        if !check_shape(p, e) {
            return Err(PathError::NotAnEdge { index: i });
        }
        if i > 0 && edges[i - 1].to != e.from {
            return Err(PathError::NotComposable { index: i });
        }
    }
    let mut q = PathQuery {
        edges: edges.to_vec(),
        steps: Vec::with_capacity(edges.len()),
        y: Vec::with_capacity(edges.len() + 1),
        names: BTreeMap::new(),
        next: p.var_count() as u32,
    };
    let mut renames = Vec::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let rid = p.rule_of_var(e.to);
        let mut rename = BTreeMap::new();
        for v in p.rule(rid).all_vars() {
            let nv = q.fresh(format!("{}~{}", p.var_name(v), i + 1));
            rename.insert(v, nv);
        }
        q.y.push(rename[&e.label]);
        renames.push(rename);
    }
    let last = q.fresh(format!("y~{}", edges.len() + 1));
    q.y.push(last);
    for (i, (e, rename)) in edges.iter().zip(renames).enumerate() {
        let rid = p.rule_of_var(e.to);
        let r = p.rule(rid);
        let body_map: HashMap<VarId, Term> = rename.iter().map(|(&a, &b)| (a, Term::Var(b))).collect();
        let mut head_map = body_map.clone();
        head_map.insert(e.to, Term::Var(q.y[i + 1]));
        q.steps.push(PathStep {
            edge: *e,
            rule: rid,
            body: r.body.iter().map(|a| apply(a, &body_map)).collect(),
            head: r.head.iter().map(|a| apply(a, &head_map)).collect(),
            rename,
        });
    }
    Ok(q)
}

impl PathQuery {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn fresh(&mut self, name: String) -> VarId {
        let v = VarId(self.next);
        self.next += 1;
        self.names.insert(v, name);
        v
    }

    /// `Path(𝔭)_{B,i}` for `1 ≤ i ≤ k`.
    pub fn body(&self, i: usize) -> &[Atom] {
        &self.steps[i - 1].body
    }

    /// `Path(𝔭)_{H,i}` for `1 ≤ i ≤ k`.
    pub fn head(&self, i: usize) -> &[Atom] {
        &self.steps[i - 1].head
    }

    /// `ỹ_i` for `1 ≤ i ≤ k+1`.
    pub fn y(&self, i: usize) -> VarId {
        self.y[i - 1]
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for s in &self.steps {
            out.extend(s.body.iter().cloned());
            out.extend(s.head.iter().cloned());
        }
        out
    }

    pub fn var_name(&self, v: VarId) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("?{}", v.0))
    }

    pub fn fmt_atoms(&self, atoms: &[Atom]) -> String {
        atoms
            .iter()
            .map(|a| fmt_atom_named(a, |v| self.var_name(v)))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl PathQuery {
    pub fn display(&self) -> String {
        self.fmt_atoms(&self.atoms())
    }
}

fn subst(atoms: &[Atom], map: &HashMap<VarId, Term>) -> Vec<Atom> {
    atoms.iter().map(|a| apply(a, map)).collect()
}

/// Propagation checks against the Datalog part of one program.
pub struct Propagation<'p> {
    p: &'p Program,
    datalog: Vec<CompiledRule>,
}

impl<'p> Propagation<'p> {
    pub fn new(p: &'p Program) -> Propagation<'p> {
        let datalog = p
            .rules()
            .iter()
            .filter(|r| r.is_datalog())
            .map(CompiledRule::new)
            .collect();
        Propagation { p, datalog }
    }

    pub fn program(&self) -> &'p Program {
        self.p
    }

    /// The entailment query for base propagation: hypothesis and conclusion.
    pub fn base_query(&self, path: &[Edge]) -> Result<(PathQuery, Vec<Atom>, Vec<Atom>), PathError> {
        let q = path_query(self.p, path)?;
        let l = q.len();
        let map = HashMap::from([(q.y(1), Term::Var(q.y(l + 1)))]);
        let concl = subst(q.head(1), &map);
        let hyp = q.atoms();
        Ok((q, hyp, concl))
    }

    pub fn is_base_propagating(&self, path: &[Edge]) -> Result<bool, PathError> {
        let (_, hyp, concl) = self.base_query(path)?;
        Ok(entails_compiled(&self.datalog, &hyp, &concl))
    }

    /// The entailment query for step propagation of `a·b` for `e_star`.
    pub fn step_query(
        &self,
        a: &[Edge],
        b: &[Edge],
        e_star: Edge,
    ) -> Result<(PathQuery, Vec<Atom>, Vec<Atom>), PathError> {
        if a.is_empty() || b.is_empty() {
            return Err(PathError::Empty);
        }
        if !check_shape(self.p, &e_star) {
            return Err(PathError::NotAnEdge { index: a.len() + b.len() });
        }
        let mut path = a.to_vec();
        path.extend_from_slice(b);
        let mut q = path_query(self.p, &path)?;
        let (l, k) = (a.len(), b.len());
        let r = self.p.rule(self.p.rule_of_var(e_star.to));
        let mut hyp_map = HashMap::new();
        for &z in r.frontier.iter().filter(|&&z| z != e_star.label) {
            let nm = format!("xz.{}", self.p.var_name(z));
            hyp_map.insert(z, Term::Var(q.fresh(nm)));
        }
        for &w in r.existentials.iter().filter(|&&w| w != e_star.to) {
            let nm = format!("xw.{}", self.p.var_name(w));
            hyp_map.insert(w, Term::Var(q.fresh(nm)));
        }
        let mut concl_map = hyp_map.clone();
        hyp_map.insert(e_star.label, Term::Var(q.y(l + 1)));
        hyp_map.insert(e_star.to, Term::Var(q.y(2)));
        concl_map.insert(e_star.label, Term::Var(q.y(l + k + 1)));
        concl_map.insert(e_star.to, Term::Var(q.y(l + 2)));
        let mut hyp = q.atoms();
        hyp.extend(subst(&r.head, &hyp_map));
        let concl = subst(&r.head, &concl_map);
        Ok((q, hyp, concl))
    }

    pub fn is_step_propagating(&self, a: &[Edge], b: &[Edge], e_star: Edge) -> Result<bool, PathError> {
        let (_, hyp, concl) = self.step_query(a, b, e_star)?;
        Ok(entails_compiled(&self.datalog, &hyp, &concl))
    }
}

pub fn is_base_propagating(p: &Program, path: &[Edge]) -> Result<bool, PathError> {
    Propagation::new(p).is_base_propagating(path)
}

pub fn is_step_propagating(p: &Program, a: &[Edge], b: &[Edge], e_star: Edge) -> Result<bool, PathError> {
    Propagation::new(p).is_step_propagating(a, b, e_star)
}
