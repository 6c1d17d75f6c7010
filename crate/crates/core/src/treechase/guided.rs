use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use super::runner::{Choice, LogEntry, SpaceProfile, TreeChase};
use super::tasks::TaskPlanner;
use crate::arboreal::{build_null_forest, build_term_tree, ArboreousInfo, InvariantViolation};
use crate::chase::{bcq_match, chase, ChaseResult, Strategy};
use crate::matching::apply;
use crate::model::{Bcq, FactStore, Program, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GuidedError {
    #[error("reference chase did not terminate within {0} steps")]
    NotTerminated(usize),
    #[error("replay of chase step {step} diverged: {reason}")]
    ReplayDivergence { step: usize, reason: String },
    #[error(transparent)]
    Tree(#[from] InvariantViolation),
    #[error("correspondence broken: {0}")]
    Correspondence(String),
}

#[derive(Clone, Debug, Serialize)]
pub struct GuidedOutcome {
    pub entailed: bool,
    pub reference_entailed: bool,
    /// Producing step of each query atom (`None`: database fact).
    pub targets: Vec<Option<usize>>,
    pub schedule_lengths: Vec<usize>,
    /// Longest inner loop actually run, including inserted Datalog steps.
    pub m: usize,
    pub skipped: usize,
    pub inserted: usize,
    pub profile: SpaceProfile,
    pub reference_size: usize,
    pub log: Vec<LogEntry>,
}

struct Replay<'a, 'p> {
    st: TreeChase<'p>,
    /// `τ` from runner terms to reference terms.
    tau: HashMap<Term, Term>,
    reference: &'a FactStore,
    skipped: usize,
    inserted: usize,
}

impl Replay<'_, '_> {
    fn image(&self, t: Term) -> Term {
        match t {
            Term::Null(_) => self.tau[&t],
            other => other,
        }
    }

    fn preimage(&self, r: Term) -> Option<Term> {
        match r {
            Term::Null(_) => self.st.scope().find(|u| self.tau.get(u) == Some(&r)),
            other => Some(other),
        }
    }

    fn check_invariants(&self) -> Result<(), GuidedError> {
        let mut seen = HashMap::new();
        for u in self.st.scope().filter(Term::is_null) {
            if let Some(prev) = seen.insert(self.image(u), u) {
                return Err(GuidedError::Correspondence(format!("{prev} and {u} share an image")));
            }
        }
        for a in self.st.interp.iter() {
            let img = a.map_terms(|t| self.image(t));
            if !self.reference.contains(&img) {
                return Err(GuidedError::Correspondence(format!("{a} maps to {img}, absent from the chase")));
            }
        }
        Ok(())
    }

    fn apply(&mut self, c: &Choice) -> Vec<(crate::model::VarId, Term)> {
        self.st.apply_unchecked(c)
    }

    fn close_datalog(&mut self) -> Result<(), GuidedError> {
        while let Some(c) = self.st.datalog_trigger() {
            self.apply(&c);
            self.inserted += 1;
            self.check_invariants()?;
        }
        Ok(())
    }

    fn translate(&self, step: usize, matched: &[(crate::model::VarId, Term)]) -> Result<Vec<(crate::model::VarId, Term)>, GuidedError> {
        matched
            .iter()
            .map(|&(v, t)| {
                self.preimage(t).map(|u| (v, u)).ok_or_else(|| GuidedError::ReplayDivergence {
                    step,
                    reason: format!("term {t} has no counterpart on the current path"),
                })
            })
            .collect()
    }
}

/// Tree chase guided by task-tree schedules read off a reference chase.
pub fn tree_chase_guided(
    p: &Program,
    database: &FactStore,
    q: &Bcq,
    info: &ArboreousInfo,
    chase_cap: usize,
) -> Result<GuidedOutcome, GuidedError> {
    let reference: ChaseResult = chase(p, database, Strategy::Deterministic, chase_cap);
    if !reference.terminated() {
        return Err(GuidedError::NotTerminated(chase_cap));
    }
    let (interp, trace) = (reference.interp(), reference.trace());
    let mut rep = Replay {
        st: TreeChase::new(p, database, &info.v_e).with_local_datalog(),
        tau: HashMap::new(),
        reference: interp,
        skipped: 0,
        inserted: 0,
    };
    let Some(theta) = bcq_match(interp, q) else {
        return Ok(GuidedOutcome {
            entailed: rep.st.entails(q),
            reference_entailed: false,
            targets: Vec::new(),
            schedule_lengths: Vec::new(),
            m: 0,
            skipped: 0,
            inserted: 0,
            profile: rep.st.profile,
            reference_size: interp.len(),
            log: Vec::new(),
        });
    };
    let forest = build_null_forest(p, trace, info)?;
    let tree = build_term_tree(p, trace, interp, info, &forest)?;
    let mut planner = TaskPlanner::new(p, trace, interp, &tree);
    let targets: Vec<Option<usize>> = q
        .atoms
        .iter()
        .map(|a| {
            let k = interp.index_of(&apply(a, &theta)).expect("query match");
            trace.steps.iter().find(|s| s.new_facts.0 <= k && k < s.new_facts.1).map(|s| s.index)
        })
        .collect();
    let schedules: Vec<Vec<usize>> = targets
        .iter()
        .map(|t| t.map(|s| planner.task_tree(1, s).schedule()).unwrap_or_default())
        .collect();
    let mut m = 0;
    for sched in &schedules {
        let before = rep.st.profile.applications;
        for &s in sched {
            let step = &trace.steps[s];
            let r = p.rule(step.rule);
            if !r.is_datalog() {
                rep.close_datalog()?;
            }
            let c = Choice {
                rule: step.rule,
                matched: rep.translate(s, &step.matched)?,
            };
            match rep.st.check(&c) {
                Ok(()) => {}
                Err(reason) if reason.starts_with("head") => {
                    rep.skipped += 1;
                    continue;
                }
                Err(reason) => return Err(GuidedError::ReplayDivergence { step: s, reason }),
            }
            for (v, u) in rep.apply(&c) {
                let n = step.image(v).expect("fresh null of the step");
                rep.tau.insert(u, n);
            }
            rep.check_invariants()?;
        }
        m = m.max(rep.st.profile.applications - before);
        rep.st.next_atom();
    }
    let entailed = rep.st.entails(q);
    Ok(GuidedOutcome {
        entailed,
        reference_entailed: true,
        targets,
        schedule_lengths: schedules.iter().map(Vec::len).collect(),
        m,
        skipped: rep.skipped,
        inserted: rep.inserted,
        profile: rep.st.profile,
        reference_size: interp.len(),
        log: rep.st.log,
    })
}

