use serde::Serialize;

use super::{ChaseTrace, Strategy};
use crate::model::{Atom, Program, Term};

fn term_label(p: &Program, trace: &ChaseTrace, t: Term) -> String {
    match t {
        Term::Null(n) => trace.null_label(p, n),
        other => other.to_string(),
    }
}

fn atom_label(p: &Program, trace: &ChaseTrace, a: &Atom) -> String {
    let args: Vec<String> = a.args.iter().map(|&t| term_label(p, trace, t)).collect();
    if args.is_empty() {
        a.pred.to_string()
    } else {
        format!("{}({})", a.pred, args.join(", "))
    }
}

/// One line per step: `step i: rule R, match {X=t,...}, new {atoms}`.
pub fn trace_text(p: &Program, trace: &ChaseTrace) -> String {
    let mut out = String::new();
    for s in &trace.steps {
        let m: Vec<String> = s
            .matched
            .iter()
            .map(|&(v, t)| format!("{}={}", p.var_name(v), term_label(p, trace, t)))
            .collect();
        let new: Vec<String> = trace
            .head_facts(p, s.index)
            .iter()
            .map(|a| atom_label(p, trace, a))
            .collect();
        out.push_str(&format!(
            "step {}: rule {}, match {{{}}}, new {{{}}}\n",
            s.index,
            s.rule,
            m.join(", "),
            new.join(", ")
        ));
    }
    out
}

#[derive(Serialize)]
struct StepJson {
    index: usize,
    rule: usize,
    #[serde(rename = "match")]
    matched: Vec<(String, String)>,
    extension: Vec<(String, String)>,
    head_facts: Vec<String>,
    added_facts: usize,
}

#[derive(Serialize)]
struct TraceJson {
    strategy: Strategy,
    database: Vec<String>,
    steps: Vec<StepJson>,
    nulls: Vec<(String, usize, String)>,
}

/// Structured export mirroring the step fields.
pub fn trace_json(p: &Program, trace: &ChaseTrace) -> serde_json::Value {
    let steps = trace
        .steps
        .iter()
        .map(|s| StepJson {
            index: s.index,
            rule: s.rule,
            matched: s
                .matched
                .iter()
                .map(|&(v, t)| (p.var_name(v).to_string(), term_label(p, trace, t)))
                .collect(),
            extension: s
                .extension
                .iter()
                .map(|&(v, n)| (p.var_name(v).to_string(), trace.null_label(p, n)))
                .collect(),
            head_facts: trace
                .head_facts(p, s.index)
                .iter()
                .map(|a| atom_label(p, trace, a))
                .collect(),
            added_facts: (s.new_facts.1 - s.new_facts.0) as usize,
        })
        .collect();
    let nulls = trace
        .nulls
        .iter()
        .enumerate()
        .map(|(i, n)| {
            (
                trace.null_label(p, crate::model::NullId(i as u32)),
                n.step,
                p.var_name(n.var).to_string(),
            )
        })
        .collect();
    let doc = TraceJson {
        strategy: trace.strategy,
        database: trace.database.iter().map(|a| a.to_string()).collect(),
        steps,
        nulls,
    };
    serde_json::to_value(doc).expect("trace serializes")
}
