//! The static analysis pipeline and its serializable report.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::arboreal::{check_arboreous, compute_position_order, is_path_guarded, ArboreousVerdict, PathGuardedness, PositionOrder};
use crate::depgraph::{build_ledgraph, compute_rank, scc_analysis, vertex_name, Edge, LabelledDepGraph, RankReport, SccAnalysis};
use crate::model::Program;
use crate::saturation::{analyze_saturation, SaturationAnalysis, SearchOptions, Verdict};

/// Everything computed for one program.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub graph: LabelledDepGraph,
    pub scc: SccAnalysis,
    pub saturation: SaturationAnalysis,
    pub edge_sets: Option<BTreeMap<usize, Vec<Edge>>>,
    pub rank: Option<RankReport>,
    pub arboreous: Option<ArboreousVerdict>,
    pub order: Option<PositionOrder>,
    pub guarded: Option<PathGuardedness>,
    pub timing: Timing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub ledgraph_ms: f64,
    pub saturation_ms: f64,
    pub rank_ms: f64,
    pub arboreal_ms: f64,
    pub total_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Runs ledgraph, SCCs, saturation search, rank, arboreousness, `⪯` and
/// path-guardedness. Later stages are skipped when an earlier one fails.
pub fn analyze(p: &Program, opts: &SearchOptions) -> Analysis {
    let start = Instant::now();
    let graph = build_ledgraph(p);
    let scc = scc_analysis(&graph);
    let t_graph = start.elapsed();

    let t = Instant::now();
    let saturation = analyze_saturation(p, &scc, opts);
    let edge_sets = saturation.edge_sets();
    let t_sat = t.elapsed();

    let t = Instant::now();
    let rank = edge_sets
        .as_ref()
        .map(|e| compute_rank(&graph, &scc, e).expect("every nontrivial component is certified"));
    let t_rank = t.elapsed();

    let t = Instant::now();
    let arboreous = match (&rank, &edge_sets) {
        (Some(r), Some(e)) => Some(check_arboreous(p, &scc, r, e)),
        _ => None,
    };
    let order = arboreous
        .as_ref()
        .and_then(ArboreousVerdict::info)
        .map(|info| compute_position_order(p, &graph, &scc, info));
    let guarded = order.as_ref().map(is_path_guarded);
    let t_arb = t.elapsed();

    Analysis {
        graph,
        scc,
        saturation,
        edge_sets,
        rank,
        arboreous,
        order,
        guarded,
        timing: Timing {
            ledgraph_ms: ms(t_graph),
            saturation_ms: ms(t_sat),
            rank_ms: ms(t_rank),
            arboreal_ms: ms(t_arb),
            total_ms: ms(start.elapsed()),
        },
    }
}

impl Analysis {
    pub fn is_saturating(&self) -> bool {
        self.saturation.is_saturating()
    }

    pub fn is_arboreous(&self) -> bool {
        self.arboreous.as_ref().is_some_and(ArboreousVerdict::is_arboreous)
    }

    pub fn is_path_guarded(&self) -> bool {
        self.guarded.as_ref().is_some_and(|g| g.guarded)
    }

    pub fn report(&self, p: &Program) -> AnalysisReport {
        let ledgraph = LedgraphSummary {
            vertices: self.graph.vertices.iter().map(|&v| vertex_name(p, v)).collect(),
            edges: self.graph.edges.iter().map(|e| e.display(p)).collect(),
            omega: self
                .graph
                .omega
                .iter()
                .map(|(&v, ps)| (vertex_name(p, v), ps.iter().map(ToString::to_string).collect()))
                .collect(),
            components: self
                .scc
                .components
                .iter()
                .map(|c| ComponentSummary {
                    id: c.id,
                    vertices: c.vertices.iter().map(|&v| vertex_name(p, v)).collect(),
                    nontrivial: c.nontrivial,
                    beta: c.beta,
                })
                .collect(),
        };
        let arboreous = self.arboreous.as_ref().map(|a| ArboreousRecord {
            verdict: match a {
                ArboreousVerdict::Arboreous(_) => ArboreousKind::Arboreous,
                ArboreousVerdict::NotArboreous(_) => ArboreousKind::NotArboreous,
                ArboreousVerdict::NotApplicable(_) => ArboreousKind::NotApplicable,
            },
            reason: a.reason().map(str::to_string),
            info: a.info().map(|i| i.to_json(p)),
        });
        let position_order = self.order.as_ref().map(|o| {
            o.to_json()
                .into_iter()
                .map(|(a, i, b, j)| format!("<{a},{i}> <= <{b},{j}>"))
                .collect()
        });
        let path_guarded_record = self.guarded.as_ref().map(|g| GuardedRecord {
            guarded: g.guarded,
            offending: g
                .offending
                .iter()
                .map(|(rule, pairs)| OffendingRule {
                    rule: *rule,
                    pairs: pairs
                        .iter()
                        .map(|&(x, y)| (p.var_name(x).to_string(), p.var_name(y).to_string()))
                        .collect(),
                })
                .collect(),
        });
        AnalysisReport {
            program_hash: program_hash(p),
            rules: p.len(),
            saturating: self.is_saturating(),
            saturation_verdict: self.saturation.verdict(),
            rank: self.rank.as_ref().map(|r| r.program_rank),
            arboreous: self.is_arboreous(),
            path_guarded: self.guarded.as_ref().map(|g| g.guarded),
            ledgraph,
            saturation_records: self.saturation.to_json(p, &self.scc),
            rank_report: self.rank.clone(),
            arboreous_record: arboreous,
            position_order,
            path_guarded_record,
            timing: self.timing,
        }
    }
}

/// SHA-256 of the normalized program text.
pub fn program_hash(p: &Program) -> String {
    format!("{:x}", Sha256::digest(p.to_string().as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub program_hash: String,
    pub rules: usize,
    pub saturating: bool,
    pub saturation_verdict: Verdict,
    pub rank: Option<usize>,
    pub arboreous: bool,
    pub path_guarded: Option<bool>,
    pub ledgraph: LedgraphSummary,
    pub saturation_records: Value,
    pub rank_report: Option<RankReport>,
    pub arboreous_record: Option<ArboreousRecord>,
    pub position_order: Option<Vec<String>>,
    pub path_guarded_record: Option<GuardedRecord>,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LedgraphSummary {
    pub vertices: Vec<String>,
    pub edges: Vec<String>,
    pub omega: BTreeMap<String, Vec<String>>,
    pub components: Vec<ComponentSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub id: usize,
    pub vertices: Vec<String>,
    pub nontrivial: bool,
    pub beta: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArboreousKind {
    Arboreous,
    NotArboreous,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArboreousRecord {
    pub verdict: ArboreousKind,
    pub reason: Option<String>,
    pub info: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedRecord {
    pub guarded: bool,
    pub offending: Vec<OffendingRule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffendingRule {
    pub rule: usize,
    pub pairs: Vec<(String, String)>,
}
