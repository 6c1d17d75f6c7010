use std::collections::HashSet;
use std::ops::ControlFlow;

use thiserror::Error;

use super::ChaseTrace;
use crate::datalog::CompiledRule;
use crate::matching::{search, Order};
use crate::model::{FactStore, NullId, Program, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceViolation {
    #[error("step {step}: body fact {fact} missing")]
    BodyMissing { step: usize, fact: String },
    #[error("step {step}: match was already satisfied")]
    Satisfied { step: usize },
    #[error("step {step}: existential rule applied before Datalog fixpoint (rule {rule} pending)")]
    DatalogFirst { step: usize, rule: usize },
    #[error("step {step}: null {null} is not fresh")]
    StaleNull { step: usize, null: String },
    #[error("step {step}: recorded new facts differ from replay")]
    NewFacts { step: usize },
    #[error("final interpretation differs from replay")]
    Final,
    #[error("rule {rule} has an unsatisfied match")]
    Unsatisfied { rule: usize },
}

/// Replays a trace step by step, confirming that each applied match was
/// present and unsatisfied, that fresh nulls were fresh, and that Datalog
/// rules were at fixpoint before every existential step.
pub fn replay_check(p: &Program, trace: &ChaseTrace, fin: &FactStore) -> Result<(), TraceViolation> {
    let rules: Vec<CompiledRule> = p.rules().iter().map(CompiledRule::new).collect();
    let datalog: Vec<&CompiledRule> = rules.iter().filter(|r| p.rule(r.rule).is_datalog()).collect();
    let mut store = trace.database.clone();
    let mut used: HashSet<NullId> = HashSet::new();
    let mut closed_upto = 0u32;
    for s in &trace.steps {
        let r = p.rule(s.rule);
        for a in trace.body_facts(p, s.index) {
            if !store.contains(&a) {
                return Err(TraceViolation::BodyMissing {
                    step: s.index,
                    fact: a.to_string(),
                });
            }
        }
        let cr = &rules[s.rule];
        let binding: Vec<Option<Term>> = cr.body.vars.iter().map(|&v| s.image(v)).collect();
        if r.is_datalog() {
            if cr.head_atoms(&binding).iter().all(|a| store.contains(a)) {
                return Err(TraceViolation::Satisfied { step: s.index });
            }
        } else {
            if cr.head_satisfied(&store, &binding) {
                return Err(TraceViolation::Satisfied { step: s.index });
            }
            let hi = store.len() as u32;
            for d in &datalog {
                let mut pending = false;
                d.delta_matches(&store, (closed_upto, hi), |b, _| {
                    if !pending && !d.head_atoms(b).iter().all(|a| store.contains(a)) {
                        pending = true;
                    }
                });
                if pending {
                    return Err(TraceViolation::DatalogFirst {
                        step: s.index,
                        rule: d.rule,
                    });
                }
            }
            closed_upto = hi;
            for &(_, n) in &s.extension {
                let fresh = used.insert(n)
                    && trace.nulls.get(n.0 as usize).map(|i| i.step) == Some(s.index);
                if !fresh {
                    return Err(TraceViolation::StaleNull {
                        step: s.index,
                        null: n.to_string(),
                    });
                }
            }
        }
        let mut added = Vec::new();
        for a in trace.head_facts(p, s.index) {
            if store.insert(a.clone()) {
                added.push(a);
            }
        }
        let (lo, hi) = s.new_facts;
        let recorded: Vec<_> = (lo..hi).map(|i| fin.get(i).clone()).collect();
        if recorded != added {
            return Err(TraceViolation::NewFacts { step: s.index });
        }
    }
    if !store.same_atoms(fin) {
        return Err(TraceViolation::Final);
    }
    Ok(())
}

/// Confirms that `interp` satisfies every rule of `p`.
pub fn check_model(p: &Program, interp: &FactStore) -> Result<(), TraceViolation> {
    for r in p.rules() {
        let cr = CompiledRule::new(r);
        let mut b = cr.body.empty_binding();
        let bad = search(interp, &cr.body, &mut b, Order::Dynamic, None, |b, _| {
            if cr.head_satisfied(interp, b) {
                ControlFlow::Continue(())
            } else {
                ControlFlow::Break(())
            }
        });
        if bad.is_break() {
            return Err(TraceViolation::Unsatisfied { rule: r.id });
        }
    }
    Ok(())
}
