//! The restricted chase under a Datalog-first strategy, with provenance.

mod export;
mod validate;

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datalog::CompiledRule;
use crate::matching::{has_match, Binding};
use crate::model::{Atom, Bcq, FactStore, NullId, Program, Term, VarId};

pub use export::{trace_json, trace_text};
pub use validate::{check_model, replay_check, TraceViolation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Rules in id order, matches oldest first, round-robin over rules.
    Deterministic,
    /// Random order of Datalog matches per round and random pending match.
    Seeded(u64),
}

#[derive(Clone, Debug)]
pub struct ChaseStep {
    pub index: usize,
    pub rule: usize,
    /// Image of every body variable.
    pub matched: Vec<(VarId, Term)>,
    /// Fresh null of every existential variable.
    pub extension: Vec<(VarId, NullId)>,
    /// Insertion-index range of the facts this step added to the
    /// interpretation.
    pub new_facts: (u32, u32),
}

impl ChaseStep {
    pub fn binding(&self) -> HashMap<VarId, Term> {
        let mut m: HashMap<VarId, Term> = self.matched.iter().copied().collect();
        for &(v, n) in &self.extension {
            m.insert(v, Term::Null(n));
        }
        m
    }

    pub fn image(&self, v: VarId) -> Option<Term> {
        self.matched
            .iter()
            .find(|(w, _)| *w == v)
            .map(|&(_, t)| t)
            .or_else(|| {
                self.extension
                    .iter()
                    .find(|(w, _)| *w == v)
                    .map(|&(_, n)| Term::Null(n))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NullInfo {
    pub step: usize,
    pub var: VarId,
}

/// A labelled provenance edge `from →label to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChainEdge {
    pub from: Term,
    pub label: VarId,
    pub to: NullId,
}

#[derive(Clone, Debug)]
pub struct ChaseTrace {
    pub database: FactStore,
    pub steps: Vec<ChaseStep>,
    pub nulls: Vec<NullInfo>,
    pub strategy: Strategy,
}

impl ChaseTrace {
    /// The existential variable a null instantiates.
    pub fn var_of(&self, n: NullId) -> VarId {
        self.nulls[n.0 as usize].var
    }

    pub fn step_of(&self, n: NullId) -> usize {
        self.nulls[n.0 as usize].step
    }

    /// Human-readable null name encoding its creating step and variable.
    pub fn null_label(&self, p: &Program, n: NullId) -> String {
        match self.nulls.get(n.0 as usize) {
            Some(i) => format!("_:{}.{}", i.step, p.var_name(i.var)),
            None => n.to_string(),
        }
    }

    /// `(t, y, n)` for every null `n` created at a step whose frontier
    /// variable `y` was matched to `t`.
    pub fn chain_edges(&self, p: &Program) -> Vec<ChainEdge> {
        let mut out = Vec::new();
        for s in &self.steps {
            if s.extension.is_empty() {
                continue;
            }
            let r = p.rule(s.rule);
            for &y in &r.frontier {
                let t = s.image(y).expect("frontier variable matched");
                for &(_, n) in &s.extension {
                    out.push(ChainEdge {
                        from: t,
                        label: y,
                        to: n,
                    });
                }
            }
        }
        out
    }

    /// `head(rule)σ+` of a step.
    pub fn head_facts(&self, p: &Program, step: usize) -> Vec<Atom> {
        let s = &self.steps[step];
        let b = s.binding();
        p.rule(s.rule)
            .head
            .iter()
            .map(|a| crate::matching::apply(a, &b))
            .collect()
    }

    pub fn body_facts(&self, p: &Program, step: usize) -> Vec<Atom> {
        let s = &self.steps[step];
        let b = s.binding();
        p.rule(s.rule)
            .body
            .iter()
            .map(|a| crate::matching::apply(a, &b))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum ChaseResult {
    Terminated { interp: FactStore, trace: ChaseTrace },
    StepCapExceeded { interp: FactStore, trace: ChaseTrace },
}

impl ChaseResult {
    pub fn terminated(&self) -> bool {
        matches!(self, ChaseResult::Terminated { .. })
    }

    pub fn interp(&self) -> &FactStore {
        match self {
            ChaseResult::Terminated { interp, .. } | ChaseResult::StepCapExceeded { interp, .. } => {
                interp
            }
        }
    }

    pub fn trace(&self) -> &ChaseTrace {
        match self {
            ChaseResult::Terminated { trace, .. } | ChaseResult::StepCapExceeded { trace, .. } => {
                trace
            }
        }
    }

    pub fn into_parts(self) -> (bool, FactStore, ChaseTrace) {
        match self {
            ChaseResult::Terminated { interp, trace } => (true, interp, trace),
            ChaseResult::StepCapExceeded { interp, trace } => (false, interp, trace),
        }
    }

    pub fn null_count(&self) -> usize {
        self.trace().nulls.len()
    }
}

struct Pending {
    binding: Binding,
}

struct Engine<'p> {
    program: &'p Program,
    rules: Vec<CompiledRule>,
    datalog: Vec<usize>,
    existential: Vec<usize>,
    store: FactStore,
    steps: Vec<ChaseStep>,
    nulls: Vec<NullInfo>,
    queues: Vec<VecDeque<Pending>>,
    rr: usize,
    rng: Option<ChaCha8Rng>,
    max_steps: usize,
    dl_seen: u32,
    ex_seen: u32,
}

struct CapHit;

impl Engine<'_> {
    fn apply(&mut self, ri: usize, b: &Binding) -> Result<(), CapHit> {
        if self.steps.len() >= self.max_steps {
            return Err(CapHit);
        }
        let r = &self.rules[ri];
        let tgd = self.program.rule(r.rule);
        let mut full = b.clone();
        full.resize(r.slot_count(), None);
        let index = self.steps.len();
        let mut extension = Vec::new();
        for (k, &s) in r.exist_slots.iter().enumerate() {
            let n = NullId(self.nulls.len() as u32);
            self.nulls.push(NullInfo {
                step: index,
                var: tgd.existentials[k],
            });
            full[s] = Some(Term::Null(n));
            extension.push((tgd.existentials[k], n));
        }
        let start = self.store.len() as u32;
        for a in r.head_atoms(&full) {
            self.store.insert(a);
        }
        let matched = r
            .body
            .vars
            .iter()
            .zip(&full)
            .take(r.slot_count() - r.exist_slots.len())
            .map(|(&v, t)| (v, t.expect("body variable bound")))
            .collect();
        self.steps.push(ChaseStep {
            index,
            rule: r.rule,
            matched,
            extension,
            new_facts: (start, self.store.len() as u32),
        });
        Ok(())
    }

    fn datalog_fixpoint(&mut self) -> Result<(), CapHit> {
        loop {
            let hi = self.store.len() as u32;
            if self.dl_seen >= hi {
                return Ok(());
            }
            let mut found: Vec<(usize, Vec<u32>, Binding)> = Vec::new();
            for &ri in &self.datalog {
                let mut local: Vec<(usize, Vec<u32>, Binding)> = Vec::new();
                self.rules[ri].delta_matches(&self.store, (self.dl_seen, hi), |b, m| {
                    local.push((ri, m.to_vec(), b.clone()));
                });
                local.sort_by(|a, b| a.1.cmp(&b.1));
                found.extend(local);
            }
            self.dl_seen = hi;
            if let Some(rng) = self.rng.as_mut() {
                found.shuffle(rng);
            }
            for (ri, _, b) in found {
                let r = &self.rules[ri];
                let satisfied = (0..r.head.len()).all(|i| self.store.contains(&r.head_atom(i, &b)));
                if !satisfied {
                    self.apply(ri, &b)?;
                }
            }
        }
    }

    fn discover_existential(&mut self) {
        let hi = self.store.len() as u32;
        if self.ex_seen >= hi {
            return;
        }
        for (qi, &ri) in self.existential.iter().enumerate() {
            let mut local: Vec<(Vec<u32>, Binding)> = Vec::new();
            self.rules[ri].delta_matches(&self.store, (self.ex_seen, hi), |b, m| {
                local.push((m.to_vec(), b.clone()));
            });
            local.sort_by(|a, b| a.0.cmp(&b.0));
            self.queues[qi].extend(local.into_iter().map(|(_, binding)| Pending { binding }));
        }
        self.ex_seen = hi;
    }

    /// Takes the next pending existential match, if any.
    fn next_pending(&mut self) -> Option<(usize, Pending)> {
        let n = self.queues.len();
        match self.rng.as_mut() {
            None => {
                for k in 0..n {
                    let qi = (self.rr + k) % n;
                    if let Some(p) = self.queues[qi].pop_front() {
                        self.rr = (qi + 1) % n;
                        return Some((qi, p));
                    }
                }
                None
            }
            Some(rng) => {
                let total: usize = self.queues.iter().map(VecDeque::len).sum();
                if total == 0 {
                    return None;
                }
                let mut pick = rng.gen_range(0..total);
                for qi in 0..n {
                    let len = self.queues[qi].len();
                    if pick < len {
                        return self.queues[qi].remove(pick).map(|p| (qi, p));
                    }
                    pick -= len;
                }
                unreachable!("pick within total")
            }
        }
    }

    fn run(&mut self) -> Result<(), CapHit> {
        loop {
            self.datalog_fixpoint()?;
            self.discover_existential();
            loop {
                let Some((qi, p)) = self.next_pending() else {
                    return Ok(());
                };
                let ri = self.existential[qi];
                if self.rules[ri].head_satisfied(&self.store, &p.binding) {
                    continue;
                }
                self.apply(ri, &p.binding)?;
                break;
            }
        }
    }
}

/// Runs the Datalog-first restricted chase.
pub fn chase(program: &Program, database: &FactStore, strategy: Strategy, max_steps: usize) -> ChaseResult {
    let rules: Vec<CompiledRule> = program.rules().iter().map(CompiledRule::new).collect();
    let datalog: Vec<usize> = (0..rules.len()).filter(|&i| program.rule(i).is_datalog()).collect();
    let existential: Vec<usize> = (0..rules.len()).filter(|&i| !program.rule(i).is_datalog()).collect();
    let mut e = Engine {
        program,
        queues: existential.iter().map(|_| VecDeque::new()).collect(),
        rules,
        datalog,
        existential,
        store: database.clone(),
        steps: Vec::new(),
        nulls: Vec::new(),
        rr: 0,
        rng: match strategy {
            Strategy::Deterministic => None,
            Strategy::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        },
        max_steps,
        dl_seen: 0,
        ex_seen: 0,
    };
    let done = e.run().is_ok();
    let trace = ChaseTrace {
        database: database.clone(),
        steps: e.steps,
        nulls: e.nulls,
        strategy,
    };
    if done {
        ChaseResult::Terminated {
            interp: e.store,
            trace,
        }
    } else {
        ChaseResult::StepCapExceeded {
            interp: e.store,
            trace,
        }
    }
}

/// Whether `q` maps homomorphically into `interp`.
pub fn evaluate_bcq(interp: &FactStore, q: &Bcq) -> bool {
    has_match(interp, &q.atoms, &HashMap::new())
}

/// A homomorphism of `q` into `interp`, if one exists.
pub fn bcq_match(interp: &FactStore, q: &Bcq) -> Option<HashMap<VarId, Term>> {
    crate::matching::find_match(interp, &q.atoms, &HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_facts, parse_program, parse_query};

    #[test]
    fn datalog_only_equals_saturation() {
        let p = parse_program("e(X,Y) -> t(X,Y) .\ne(X,Y), t(Y,Z) -> t(X,Z) .").unwrap();
        let d = parse_facts("e(1,2). e(2,3). e(3,4).").unwrap();
        let r = chase(&p, &d, Strategy::Deterministic, 1000);
        assert!(r.terminated());
        assert_eq!(r.interp(), &crate::datalog::saturate(p.rules(), &d));
        assert!(r.trace().chain_edges(&p).is_empty());
    }

    #[test]
    fn restricted_check_blocks_satisfied_match() {
        let p = parse_program("p(X) -> q(X, V) .").unwrap();
        let d = parse_facts("p(a). p(b). q(a, c).").unwrap();
        let r = chase(&p, &d, Strategy::Deterministic, 100);
        assert!(r.terminated());
        assert_eq!(r.trace().steps.len(), 1);
        assert_eq!(r.null_count(), 1);
    }

    #[test]
    fn step_cap_on_infinite_chain() {
        let p = parse_program("p(X) -> e(X, V), p(V) .").unwrap();
        let d = parse_facts("p(a).").unwrap();
        let r = chase(&p, &d, Strategy::Deterministic, 50);
        assert!(!r.terminated());
        assert_eq!(r.trace().steps.len(), 50);
    }

    #[test]
    fn deterministic_runs_are_identical() {
        let p = parse_program(
            "elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V) .
             su(X, S, T), su(Y, S, S) -> su(Y, T, T) .",
        )
        .unwrap();
        let d = parse_facts("elem(a). elem(b). set(e0).").unwrap();
        let a = chase(&p, &d, Strategy::Deterministic, 10_000);
        let b = chase(&p, &d, Strategy::Deterministic, 10_000);
        assert_eq!(trace_text(&p, a.trace()), trace_text(&p, b.trace()));
        assert_eq!(a.interp().sorted(), b.interp().sorted());
    }

    #[test]
    fn chain_edges_follow_frontier() {
        let p = parse_program("p(X, Y) -> q(Y, V) .").unwrap();
        let d = parse_facts("p(a, b).").unwrap();
        let r = chase(&p, &d, Strategy::Deterministic, 10);
        let edges = r.trace().chain_edges(&p);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].from, Term::constant("b"));
        assert_eq!(p.var_name(edges[0].label), "Y");
    }

    #[test]
    fn bcq_examples() {
        let i = parse_facts("p(a, b).").unwrap();
        assert!(evaluate_bcq(&i, &parse_query("?- p(X, Y).").unwrap()));
        assert!(!evaluate_bcq(&i, &parse_query("?- p(X, X).").unwrap()));
    }
}
