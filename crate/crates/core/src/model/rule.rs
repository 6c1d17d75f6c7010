use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use super::atom::{Atom, Position};
use super::term::{write_constant, Sym, Term, VarId};
use super::ModelError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Frontier,
    Existential,
    BodyOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct VarInfo {
    pub name: String,
    pub rule: usize,
    pub kind: VarKind,
}

/// A tgd `B[x, y] -> exists v. H[y, v]`.
///
/// Variable lists are ordered by first syntactic occurrence: the frontier and
/// existentials by their first occurrence in the head, body-only variables by
/// their first occurrence in the body.
#[derive(Clone, Debug)]
pub struct Tgd {
    pub id: usize,
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    pub frontier: Vec<VarId>,
    pub existentials: Vec<VarId>,
    pub body_only: Vec<VarId>,
}

impl Tgd {
    pub fn is_datalog(&self) -> bool {
        self.existentials.is_empty()
    }

    /// Universally quantified variables in order of first body occurrence.
    pub fn body_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for a in &self.body {
            for v in a.vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn all_vars(&self) -> Vec<VarId> {
        let mut out = self.body_vars();
        out.extend(self.existentials.iter().copied());
        out
    }

    pub fn positions_in(atoms: &[Atom], v: VarId) -> BTreeSet<Position> {
        let mut out = BTreeSet::new();
        for a in atoms {
            for (i, t) in a.args.iter().enumerate() {
                if *t == Term::Var(v) {
                    out.insert(Position {
                        pred: a.pred,
                        index: i as u32 + 1,
                    });
                }
            }
        }
        out
    }

    pub fn body_positions(&self, v: VarId) -> BTreeSet<Position> {
        Tgd::positions_in(&self.body, v)
    }

    pub fn head_positions(&self, v: VarId) -> BTreeSet<Position> {
        Tgd::positions_in(&self.head, v)
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.body.iter().chain(&self.head).any(|a| a.args.contains(&Term::Var(v)))
    }
}

/// Predicate name to arity table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    arities: IndexMap<Sym, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn arity(&self, pred: Sym) -> Option<usize> {
        self.arities.get(&pred).copied()
    }

    /// Records the arity on first use and reports a clash afterwards.
    pub fn declare(&mut self, pred: Sym, arity: usize) -> Result<(), (usize, usize)> {
        match self.arities.get(&pred) {
            Some(&a) if a != arity => Err((a, arity)),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(pred, arity);
                Ok(())
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Sym, usize)> + '_ {
        self.arities.iter().map(|(&p, &a)| (p, a))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }
}

/// One rule with rule-local variable ids `0..names.len()`, before renaming apart.
#[derive(Clone, Debug)]
pub struct RuleDraft {
    pub body: Vec<Atom>,
    pub head: Vec<Atom>,
    pub names: Vec<String>,
    /// Variables listed in an `exists` declaration, if the rule has one.
    pub declared: Option<Vec<VarId>>,
}

#[derive(Clone, Debug)]
pub struct Program {
    rules: Vec<Tgd>,
    vars: Vec<VarInfo>,
    signature: Signature,
}

impl Program {
    /// Builds a renamed-apart program from rule drafts.
    pub fn from_drafts(drafts: Vec<RuleDraft>) -> Result<Program, ModelError> {
        let mut rules = Vec::with_capacity(drafts.len());
        let mut vars: Vec<VarInfo> = Vec::new();
        let mut signature = Signature::new();
        for (rid, d) in drafts.into_iter().enumerate() {
            let offset = vars.len() as u32;
            let shift = |a: &Atom| {
                a.map_terms(|t| match t {
                    Term::Var(v) => Term::Var(VarId(v.0 + offset)),
                    other => other,
                })
            };
            for a in d.body.iter().chain(&d.head) {
                if a.has_null() {
                    return Err(ModelError::NullInRule { rule: rid });
                }
                if let Err((expected, found)) = signature.declare(a.pred, a.arity()) {
                    return Err(ModelError::Arity {
                        pred: a.pred.to_string(),
                        expected,
                        found,
                    });
                }
            }
            let body: Vec<Atom> = d.body.iter().map(shift).collect();
            let head: Vec<Atom> = d.head.iter().map(shift).collect();
            let mut body_set = BTreeSet::new();
            for a in &body {
                body_set.extend(a.vars());
            }
            let mut frontier = Vec::new();
            let mut existentials = Vec::new();
            for a in &head {
                for v in a.vars() {
                    if body_set.contains(&v) {
                        if !frontier.contains(&v) {
                            frontier.push(v);
                        }
                    } else if !existentials.contains(&v) {
                        existentials.push(v);
                    }
                }
            }
            if let Some(declared) = &d.declared {
                for &v in &existentials {
                    let local = VarId(v.0 - offset);
                    if !declared.contains(&local) {
                        return Err(ModelError::Unsafe {
                            rule: rid,
                            var: d.names[local.0 as usize].clone(),
                        });
                    }
                }
                for &local in declared {
                    if body_set.contains(&VarId(local.0 + offset)) {
                        return Err(ModelError::ExistentialInBody {
                            rule: rid,
                            var: d.names[local.0 as usize].clone(),
                        });
                    }
                }
            }
            let mut body_only = Vec::new();
            for a in &body {
                for v in a.vars() {
                    if !frontier.contains(&v) && !body_only.contains(&v) {
                        body_only.push(v);
                    }
                }
            }
            for (i, name) in d.names.iter().enumerate() {
                let v = VarId(offset + i as u32);
                let kind = if frontier.contains(&v) {
                    VarKind::Frontier
                } else if existentials.contains(&v) {
                    VarKind::Existential
                } else {
                    VarKind::BodyOnly
                };
                vars.push(VarInfo {
                    name: name.clone(),
                    rule: rid,
                    kind,
                });
            }
            rules.push(Tgd {
                id: rid,
                body,
                head,
                frontier,
                existentials,
                body_only,
            });
        }
        Ok(Program {
            rules,
            vars,
            signature,
        })
    }

    pub fn rules(&self) -> &[Tgd] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Tgd {
        &self.rules[id]
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_info(&self, v: VarId) -> &VarInfo {
        &self.vars[v.0 as usize]
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize].name
    }

    /// Looks up a variable by rule and display name.
    pub fn var_by_name(&self, rule: usize, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|i| i.rule == rule && i.name == name)
            .map(|p| VarId(p as u32))
    }

    pub fn rule_of_var(&self, v: VarId) -> usize {
        self.vars[v.0 as usize].rule
    }

    pub fn datalog_part(&self) -> Vec<usize> {
        self.rules.iter().filter(|r| r.is_datalog()).map(|r| r.id).collect()
    }

    pub fn existential_vars(&self) -> Vec<VarId> {
        self.rules.iter().flat_map(|r| r.existentials.iter().copied()).collect()
    }

    pub fn constants(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            for a in r.body.iter().chain(&r.head) {
                out.extend(a.args.iter().copied().filter(Term::is_const));
            }
        }
        out
    }

    /// Rules back as drafts, with rule-local variable ids.
    pub fn to_drafts(&self) -> Vec<RuleDraft> {
        self.rules
            .iter()
            .map(|r| {
                let offset = self
                    .vars
                    .iter()
                    .position(|i| i.rule == r.id)
                    .unwrap_or(0) as u32;
                let unshift = |a: &Atom| {
                    a.map_terms(|t| match t {
                        Term::Var(v) => Term::Var(VarId(v.0 - offset)),
                        other => other,
                    })
                };
                let names = self
                    .vars
                    .iter()
                    .filter(|i| i.rule == r.id)
                    .map(|i| i.name.clone())
                    .collect();
                RuleDraft {
                    body: r.body.iter().map(unshift).collect(),
                    head: r.head.iter().map(unshift).collect(),
                    names,
                    declared: None,
                }
            })
            .collect()
    }

    /// The program restricted to rules accepted by `keep`, with fresh ids.
    pub fn filter_rules(&self, mut keep: impl FnMut(&Tgd) -> bool) -> Program {
        let drafts = self
            .to_drafts()
            .into_iter()
            .zip(&self.rules)
            .filter(|(_, r)| keep(r))
            .map(|(d, _)| d)
            .collect();
        Program::from_drafts(drafts).expect("subset of a valid program is valid")
    }

    /// The Datalog part as a program of its own.
    pub fn datalog_program(&self) -> Program {
        self.filter_rules(|r| r.is_datalog())
    }

    /// Concatenation of two programs, renamed apart.
    pub fn union(&self, other: &Program) -> Result<Program, ModelError> {
        let mut drafts = self.to_drafts();
        drafts.extend(other.to_drafts());
        Program::from_drafts(drafts)
    }

    pub fn fmt_atom(&self, a: &Atom) -> String {
        fmt_atom_named(a, |v| self.var_name(v).to_string())
    }

    pub fn fmt_rule(&self, r: &Tgd) -> String {
        let body: Vec<String> = r.body.iter().map(|a| self.fmt_atom(a)).collect();
        let head: Vec<String> = r.head.iter().map(|a| self.fmt_atom(a)).collect();
        format!("{} -> {} .", body.join(", "), head.join(", "))
    }
}

/// Renders an atom, printing variables through `name`.
pub fn fmt_atom_named(a: &Atom, name: impl Fn(VarId) -> String) -> String {
    struct W<'a, F: Fn(VarId) -> String>(&'a Atom, F);
    impl<F: Fn(VarId) -> String> fmt::Display for W<'_, F> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}", self.0.pred)?;
            if self.0.args.is_empty() {
                return Ok(());
            }
            f.write_str("(")?;
            for (i, t) in self.0.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match t {
                    Term::Var(v) => f.write_str(&(self.1)(*v))?,
                    Term::Const(c) => write_constant(f, c.as_str())?,
                    Term::Null(n) => write!(f, "{n}")?,
                }
            }
            f.write_str(")")
        }
    }
    W(a, name).to_string()
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{}", self.fmt_rule(r))?;
        }
        Ok(())
    }
}
