use std::collections::{BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::chase::evaluate_bcq;
use crate::datalog::CompiledRule;
use crate::matching::{apply, search, Order};
use crate::model::{Bcq, FactStore, NullId, Program, Term, VarId};

pub use crate::model::RUNNER_NULL_BASE;

/// A rule together with the images of its body variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Choice {
    pub rule: usize,
    pub matched: Vec<(VarId, Term)>,
}

impl Choice {
    pub fn map(&self) -> HashMap<VarId, Term> {
        self.matched.iter().copied().collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeChaseError {
    #[error("query atom {atom}, iteration {iteration}: invalid choice: {reason}")]
    InvalidChoice {
        atom: usize,
        iteration: usize,
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SpaceProfile {
    /// Largest `|I|`.
    pub max_interp: usize,
    /// Largest `|𝒯|` (number of term sets).
    pub max_stack: usize,
    /// Largest `|∪𝒯|`.
    pub max_terms: usize,
    /// Rule applications performed.
    pub applications: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LogEntry {
    pub atom: usize,
    pub iteration: usize,
    pub rule: usize,
    pub popped: usize,
    pub pushed: bool,
    pub last_size: usize,
    pub interp_size: usize,
}

/// State of Algorithm 1: interpretation `I` and the term-set stack `𝒯`.
#[derive(Clone, Debug)]
pub struct TreeChase<'p> {
    p: &'p Program,
    rules: std::rc::Rc<Vec<CompiledRule>>,
    v_e: BTreeSet<VarId>,
    pub interp: FactStore,
    pub stack: Vec<BTreeSet<Term>>,
    next_null: u32,
    pub profile: SpaceProfile,
    pub log: Vec<LogEntry>,
    atom: usize,
    iteration: usize,
    local_datalog: bool,
}

impl<'p> TreeChase<'p> {
    pub fn new(p: &'p Program, database: &FactStore, v_e: &BTreeSet<VarId>) -> TreeChase<'p> {
        let mut root = p.constants();
        root.extend(database.terms());
        let mut s = TreeChase {
            p,
            rules: std::rc::Rc::new(p.rules().iter().map(CompiledRule::new).collect()),
            v_e: v_e.clone(),
            interp: database.clone(),
            stack: vec![root],
            next_null: RUNNER_NULL_BASE,
            profile: SpaceProfile::default(),
            log: Vec::new(),
            atom: 0,
            iteration: 0,
            local_datalog: false,
        };
        s.record();
        s
    }

    /// Only Datalog triggers that keep the top term set block existential
    /// steps.
    pub fn with_local_datalog(mut self) -> Self {
        self.local_datalog = true;
        self
    }

    /// Whether applying `c` pops term sets off the stack.
    pub fn pops(&self, c: &Choice) -> bool {
        let m = c.map();
        let last = self.stack.last().expect("root");
        self.stack.len() > 1 && self.p.rule(c.rule).frontier.iter().all(|v| !last.contains(&m[v]))
    }

    pub fn program(&self) -> &'p Program {
        self.p
    }

    fn record(&mut self) {
        let pr = &mut self.profile;
        pr.max_interp = pr.max_interp.max(self.interp.len());
        pr.max_stack = pr.max_stack.max(self.stack.len());
        pr.max_terms = pr.max_terms.max(self.stack.iter().map(BTreeSet::len).sum());
    }

    pub fn in_scope(&self, t: &Term) -> bool {
        self.stack.iter().any(|s| s.contains(t))
    }

    pub fn scope(&self) -> impl Iterator<Item = Term> + '_ {
        self.stack.iter().flatten().copied()
    }

    /// Body matches of rule `ri` whose head is not yet satisfied.
    fn triggers(&self, ri: usize, first_only: bool) -> Vec<Choice> {
        let r = &self.rules[ri];
        let nb = r.slot_count() - r.exist_slots.len();
        let datalog = r.exist_slots.is_empty();
        let mut out = Vec::new();
        let mut b = vec![None; r.slot_count()];
        let _ = search(&self.interp, &r.body, &mut b, Order::Dynamic, None, |b, _| {
            let unsatisfied = if datalog {
                !r.head_atoms(b).iter().all(|a| self.interp.contains(a))
            } else {
                !r.head_satisfied(&self.interp, b)
            };
            if unsatisfied {
                out.push(Choice {
                    rule: r.rule,
                    matched: r.body.vars[..nb].iter().zip(b).map(|(&v, t)| (v, t.expect("bound"))).collect(),
                });
                if first_only {
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        out
    }

    /// First applicable Datalog trigger, if `I` is not closed.
    pub fn datalog_trigger(&self) -> Option<Choice> {
        (0..self.rules.len())
            .filter(|&i| self.p.rule(i).is_datalog())
            .find_map(|i| {
                if self.local_datalog {
                    self.triggers(i, false).into_iter().find(|c| !self.pops(c))
                } else {
                    self.triggers(i, true).pop()
                }
            })
    }

    /// Every choice applicable under the Datalog-first restricted chase.
    pub fn applicable(&self) -> Vec<Choice> {
        let dl: Vec<Choice> = (0..self.rules.len())
            .filter(|&i| self.p.rule(i).is_datalog())
            .flat_map(|i| self.triggers(i, false))
            .collect();
        if !dl.is_empty() {
            return dl;
        }
        (0..self.rules.len())
            .filter(|&i| !self.p.rule(i).is_datalog())
            .flat_map(|i| self.triggers(i, false))
            .collect()
    }

    /// Why `c` is not applicable, if it is not.
    pub fn check(&self, c: &Choice) -> Result<(), String> {
        let Some(r) = self.p.rules().get(c.rule) else {
            return Err(format!("no rule {}", c.rule));
        };
        let m = c.map();
        for v in r.body_vars() {
            if !m.contains_key(&v) {
                return Err(format!("body variable {} unbound", self.p.var_name(v)));
            }
        }
        for a in &r.body {
            let g = apply(a, &m);
            if !self.interp.contains(&g) {
                return Err(format!("body atom {g} not in I"));
            }
        }
        let cr = &self.rules[c.rule];
        if r.is_datalog() {
            if r.head.iter().all(|a| self.interp.contains(&apply(a, &m))) {
                return Err("head already present".into());
            }
        } else {
            let mut b = cr.body.binding_from(&m);
            b.resize(cr.slot_count(), None);
            if cr.head_satisfied(&self.interp, &b) {
                return Err("head already satisfied".into());
            }
            if let Some(d) = self.datalog_trigger() {
                return Err(format!("Datalog rule {} still applicable", d.rule));
            }
        }
        Ok(())
    }

    /// Applies a choice; returns the fresh nulls.
    pub fn apply(&mut self, c: &Choice) -> Result<Vec<(VarId, Term)>, TreeChaseError> {
        self.check(c).map_err(|reason| TreeChaseError::InvalidChoice {
            atom: self.atom,
            iteration: self.iteration,
            reason,
        })?;
        Ok(self.apply_unchecked(c))
    }

    pub(crate) fn apply_unchecked(&mut self, c: &Choice) -> Vec<(VarId, Term)> {
        let r = self.p.rule(c.rule);
        let mut m = c.map();
        let frontier: BTreeSet<Term> = r.frontier.iter().map(|v| m[v]).collect();
        let mut popped = 0;
        while self.stack.len() > 1 && self.stack.last().expect("root").is_disjoint(&frontier) {
            self.stack.pop();
            popped += 1;
        }
        let mut fresh = Vec::new();
        for &v in &r.existentials {
            let t = Term::Null(NullId(self.next_null));
            self.next_null += 1;
            m.insert(v, t);
            fresh.push((v, t));
        }
        let pushed = r.existentials.iter().any(|v| self.v_e.contains(v));
        let new_terms = fresh.iter().map(|&(_, t)| t);
        if pushed {
            self.stack.push(new_terms.collect());
        } else {
            self.stack.last_mut().expect("root").extend(new_terms);
        }
        if popped > 0 {
            let scope: BTreeSet<Term> = self.scope().collect();
            self.interp.retain(|a| a.args.iter().all(|t| scope.contains(t)));
        }
        for a in &r.head {
            let g = apply(a, &m);
            if g.args.iter().all(|t| self.in_scope(t)) {
                self.interp.insert(g);
            }
        }
        self.profile.applications += 1;
        self.log.push(LogEntry {
            atom: self.atom,
            iteration: self.iteration,
            rule: c.rule,
            popped,
            pushed,
            last_size: self.stack.last().map_or(0, BTreeSet::len),
            interp_size: self.interp.len(),
        });
        self.iteration += 1;
        self.record();
        fresh
    }

    /// `𝒯 := ⟨∪𝒯⟩` at the end of one query atom.
    pub fn next_atom(&mut self) {
        let all: BTreeSet<Term> = self.scope().collect();
        self.stack = vec![all];
        self.atom += 1;
        self.iteration = 0;
    }

    pub fn entails(&self, q: &Bcq) -> bool {
        evaluate_bcq(&self.interp, q)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunOutcome {
    pub entailed: bool,
    pub profile: SpaceProfile,
    pub log: Vec<LogEntry>,
}

/// Algorithm 1 driven by an explicit script: for query atom `i`,
/// `script[i]` lists the choices of the inner loop; a missing entry is a
/// break. At most `m` choices per atom are used.
pub fn tree_chase_run(
    p: &Program,
    database: &FactStore,
    q: &Bcq,
    v_e: &BTreeSet<VarId>,
    m: usize,
    script: &[Vec<Choice>],
) -> Result<RunOutcome, TreeChaseError> {
    let mut st = TreeChase::new(p, database, v_e);
    for i in 0..q.len() {
        for c in script.get(i).map(Vec::as_slice).unwrap_or(&[]).iter().take(m) {
            st.apply(c)?;
        }
        st.next_atom();
    }
    Ok(RunOutcome {
        entailed: st.entails(q),
        profile: st.profile,
        log: st.log,
    })
}
