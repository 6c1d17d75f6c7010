use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use super::check::{check_with, topo_order, CheckReport, PropCache, DEFAULT_PATH_CAP};
use crate::depgraph::{build_ledgraph, scc_analysis, Component, Edge, LabelledDepGraph, SccAnalysis};
use crate::model::Program;
use crate::par::Parallelism;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Edge subsets examined per component before giving up.
    pub candidate_budget: usize,
    /// `Ē`-paths per candidate before the candidate is inconclusive.
    pub path_cap: usize,
    pub parallelism: Parallelism,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            candidate_budget: 100_000,
            path_cap: DEFAULT_PATH_CAP,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ComponentOutcome {
    Trivial,
    Certified(CheckReport),
    /// Every feedback edge set was examined and failed.
    NotSaturating {
        candidates: usize,
        first_failure: Option<CheckReport>,
    },
    BudgetExceeded { candidates: usize },
    /// No candidate passed, and at least one hit the path cap.
    Inconclusive {
        candidates: usize,
        report: CheckReport,
    },
}

#[derive(Clone, Debug)]
pub struct ComponentResult {
    pub component: usize,
    pub outcome: ComponentOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    Saturating,
    NotSaturating,
    BudgetExceeded,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct SaturationAnalysis {
    pub components: Vec<ComponentResult>,
}

impl SaturationAnalysis {
    pub fn verdict(&self) -> Verdict {
        let mut v = Verdict::Saturating;
        for c in &self.components {
            match c.outcome {
                ComponentOutcome::NotSaturating { .. } => return Verdict::NotSaturating,
                ComponentOutcome::BudgetExceeded { .. } => v = Verdict::BudgetExceeded,
                ComponentOutcome::Inconclusive { .. } if v == Verdict::Saturating => v = Verdict::Inconclusive,
                _ => {}
            }
        }
        v
    }

    pub fn is_saturating(&self) -> bool {
        self.verdict() == Verdict::Saturating
    }

    /// Edge set per component (empty for trivial ones), when saturating.
    pub fn edge_sets(&self) -> Option<BTreeMap<usize, Vec<Edge>>> {
        self.components
            .iter()
            .map(|c| match &c.outcome {
                ComponentOutcome::Trivial => Some((c.component, Vec::new())),
                ComponentOutcome::Certified(r) => Some((c.component, r.e.clone())),
                _ => None,
            })
            .collect()
    }

    pub fn to_json(&self, p: &Program, scc: &SccAnalysis) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .filter(|c| !matches!(c.outcome, ComponentOutcome::Trivial))
            .map(|c| match &c.outcome {
                ComponentOutcome::Certified(r) => r.to_json(p),
                ComponentOutcome::NotSaturating { candidates, first_failure } => {
                    let mut v = match first_failure {
                        Some(r) => r.to_json(p),
                        None => base_json(p, &scc.components[c.component]),
                    };
                    v["verdict"] = json!("not-saturating");
                    v["candidatesTried"] = json!(candidates);
                    v
                }
                ComponentOutcome::BudgetExceeded { candidates } => {
                    let mut v = base_json(p, &scc.components[c.component]);
                    v["verdict"] = json!("budget-exceeded");
                    v["candidatesTried"] = json!(candidates);
                    v
                }
                ComponentOutcome::Inconclusive { candidates, report } => {
                    let mut v = report.to_json(p);
                    v["verdict"] = json!("inconclusive");
                    v["candidatesTried"] = json!(candidates);
                    v
                }
                ComponentOutcome::Trivial => unreachable!(),
            })
            .collect();
        json!({ "verdict": self.verdict(), "components": comps })
    }
}

fn base_json(p: &Program, c: &Component) -> Value {
    json!({
        "vertices": c.vertices.iter().map(|&v| crate::depgraph::vertex_name(p, v)).collect::<Vec<_>>(),
        "edges": c.internal.iter().map(|e| e.display(p)).collect::<Vec<_>>(),
        "E": Value::Null,
        "conditions": [false, false, false, false],
        "basePathsChecked": 0,
        "stepPairsChecked": 0,
    })
}

/// Index subsets of `0..n` by ascending size, lexicographic within a size.
struct Subsets {
    n: usize,
    cur: Vec<usize>,
    done: bool,
}

impl Subsets {
    fn new(n: usize) -> Subsets {
        Subsets {
            n,
            cur: Vec::new(),
            done: false,
        }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let k = self.cur.len();
        let mut i = k;
        loop {
            if i == 0 {
                if k == self.n {
                    self.done = true;
                } else {
                    self.cur = (0..=k).collect();
                }
                break;
            }
            i -= 1;
            if self.cur[i] < self.n - k + i {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn acyclic_without(c: &Component, e: &[Edge]) -> bool {
    let rest: Vec<Edge> = c.internal.iter().filter(|x| !e.contains(x)).copied().collect();
    topo_order(&c.vertices, &rest).is_ok()
}

fn is_minimal(c: &Component, e: &[Edge]) -> bool {
    (0..e.len()).all(|i| {
        let mut smaller = e.to_vec();
        smaller.remove(i);
        !acyclic_without(c, &smaller)
    })
}

/// Searches for an edge set certifying that `c` is `E`-saturating.
///
/// Feedback edge sets are tried minimal ones first, then the rest, each
/// group by ascending size in edge order.
pub fn search_component(cache: &PropCache<'_>, c: &Component, opts: &SearchOptions) -> ComponentOutcome {
    if !c.nontrivial {
        return ComponentOutcome::Trivial;
    }
    let edges = &c.internal;
    let mut visited = 0usize;
    let mut first_failure: Option<CheckReport> = None;
    let mut inconclusive: Option<CheckReport> = None;
    for minimal_pass in [true, false] {
        for idx in Subsets::new(edges.len()) {
            visited += 1;
            if visited > opts.candidate_budget {
                return ComponentOutcome::BudgetExceeded { candidates: visited - 1 };
            }
            let e: Vec<Edge> = idx.iter().map(|&i| edges[i]).collect();
            if !acyclic_without(c, &e) || is_minimal(c, &e) != minimal_pass {
                continue;
            }
            let rep = check_with(cache, c, &e, opts.path_cap, true);
            if rep.holds() {
                let full = check_with(cache, c, &e, opts.path_cap, false);
                return ComponentOutcome::Certified(full);
            }
            if rep.inconclusive() {
                inconclusive.get_or_insert(rep);
            } else if first_failure.is_none() {
                first_failure = Some(check_with(cache, c, &e, opts.path_cap, false));
            }
        }
    }
    match inconclusive {
        Some(report) => ComponentOutcome::Inconclusive {
            candidates: visited,
            report,
        },
        None => ComponentOutcome::NotSaturating {
            candidates: visited,
            first_failure,
        },
    }
}

pub fn analyze_saturation(p: &Program, scc: &SccAnalysis, opts: &SearchOptions) -> SaturationAnalysis {
    let cache = PropCache::new(p, opts.parallelism);
    let components = scc
        .components
        .iter()
        .map(|c| ComponentResult {
            component: c.id,
            outcome: search_component(&cache, c, opts),
        })
        .collect();
    SaturationAnalysis { components }
}

/// Verified edge sets for every nontrivial component.
#[derive(Clone, Debug)]
pub struct SaturationCertificate {
    pub graph: LabelledDepGraph,
    pub scc: SccAnalysis,
    pub reports: BTreeMap<usize, CheckReport>,
}

impl SaturationCertificate {
    /// Edge set per component, empty for trivial components.
    pub fn edge_sets(&self) -> BTreeMap<usize, Vec<Edge>> {
        self.scc
            .components
            .iter()
            .map(|c| (c.id, self.reports.get(&c.id).map(|r| r.e.clone()).unwrap_or_default()))
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SaturationError {
    #[error("component {component} is not E-saturating for any E: {}", reasons.join("; "))]
    NotSaturating { component: usize, reasons: Vec<String> },
    #[error("component {component}: candidate budget exhausted after {candidates} edge sets")]
    SearchBudgetExceeded { component: usize, candidates: usize },
    #[error("component {component}: path cap reached, verdict inconclusive")]
    Inconclusive { component: usize },
}

pub fn find_saturating_certificate(
    p: &Program,
    opts: &SearchOptions,
) -> Result<SaturationCertificate, SaturationError> {
    let graph = build_ledgraph(p);
    let scc = scc_analysis(&graph);
    let a = analyze_saturation(p, &scc, opts);
    let mut reports = BTreeMap::new();
    let mut pending = None;
    for c in a.components {
        match c.outcome {
            ComponentOutcome::Trivial => {}
            ComponentOutcome::Certified(r) => {
                reports.insert(c.component, r);
            }
            ComponentOutcome::NotSaturating { first_failure, .. } => {
                let reasons = first_failure.map(|r| r.reasons(p)).unwrap_or_default();
                return Err(SaturationError::NotSaturating {
                    component: c.component,
                    reasons,
                });
            }
            ComponentOutcome::BudgetExceeded { candidates } => {
                pending.get_or_insert(SaturationError::SearchBudgetExceeded {
                    component: c.component,
                    candidates,
                });
            }
            ComponentOutcome::Inconclusive { .. } => {
                pending.get_or_insert(SaturationError::Inconclusive { component: c.component });
            }
        }
    }
    match pending {
        Some(e) => Err(e),
        None => Ok(SaturationCertificate { graph, scc, reports }),
    }
}
