//! Generators for the worked example programs and constructions used as
//! fixtures and acceptance instances.

mod qbf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::model::{parse_facts_with, parse_program, parse_query_with, Bcq, FactStore, Program};

pub use qbf::{qbf_suite, Lit, Quant, Qbf};

/// Where an expected verdict comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Basis {
    /// Stated for a worked example.
    Example,
    /// Computed by an independent oracle (reference chase or QBF evaluation).
    Oracle,
    /// Holds by the shape of the generated program.
    ByConstruction,
}

#[derive(Clone, Debug, Serialize)]
pub struct Expectation {
    pub key: &'static str,
    pub value: Value,
    pub basis: Basis,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Oracle {
    None,
    FullChase,
    QbfBruteForce(Qbf),
}

#[derive(Clone, Debug)]
pub struct CorpusInstance {
    pub name: &'static str,
    pub params: Value,
    pub program_text: String,
    pub facts_text: String,
    pub query_texts: Vec<String>,
    pub program: Program,
    pub database: FactStore,
    pub queries: Vec<Bcq>,
    pub expected: Vec<Expectation>,
    pub oracle: Oracle,
}

impl CorpusInstance {
    fn build(name: &'static str, params: Value, program_text: String, facts_text: String, query_texts: Vec<String>) -> Self {
        let program = parse_program(&program_text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut sig = program.signature().clone();
        let database = parse_facts_with(&facts_text, &mut sig).unwrap_or_else(|e| panic!("{name}: {e}"));
        let queries = query_texts
            .iter()
            .map(|q| parse_query_with(q, &mut sig).unwrap_or_else(|e| panic!("{name}: {e}")))
            .collect();
        CorpusInstance {
            name,
            params,
            program_text,
            facts_text,
            query_texts,
            program,
            database,
            queries,
            expected: Vec::new(),
            oracle: Oracle::None,
        }
    }

    fn expect(mut self, key: &'static str, value: Value, basis: Basis) -> Self {
        self.expected.push(Expectation { key, value, basis });
        self
    }

    fn with_oracle(mut self, o: Oracle) -> Self {
        self.oracle = o;
        self
    }

    pub fn expected(&self, key: &str) -> Option<&Value> {
        self.expected.iter().find(|e| e.key == key).map(|e| &e.value)
    }

    /// Same program with a different database.
    pub fn with_facts(&self, facts_text: String) -> CorpusInstance {
        let mut c = CorpusInstance::build(
            self.name,
            self.params.clone(),
            self.program_text.clone(),
            facts_text,
            self.query_texts.clone(),
        );
        c.oracle = self.oracle.clone();
        c
    }
}

pub const DEXP_RULES: &str = "\
first(Z) -> lvl(f, Z), lvl(t, Z) .
lvl(X1, Z), lvl(X2, Z) -> cat(X1, X2, Z, V) .
cat(X1, X2, Z, X) -> part(X1, X), part(X2, X) .
cat(X1, X2, Z, X), next(Z, Zp) -> up(X, Zp, W) .
cat(X1, X2, Z, X), next(Z, Zp), up(X, Zp, Xb) -> lvl(Xb, Zp) .
";

pub const DEXP_PROPAGATION: &str = "\
up(Y1, Z, Y2), part(Y2, Y3) -> up(Y3, Z, Y2) .
up(Y3, Z, Y2), part(Y2, Y3), up(Y3, Zp, Y4), part(Y4, Y5) -> up(Y5, Z, Y4) .
";

pub const COUNTER_RULES: &str = "\
first(Z) -> min(f, Z), max(t, Z), succ(f, t, Z) .
cat(X1, X2, Z, X), next(Z, Zp), up(X, Zp, Xb) -> cnu(X1, X2, Xb, Z, Zp) .
cnu(X1, X2, Xb, Z, Zp), cnu(X1, X2p, Xbp, Z, Zp), succ(X2, X2p, Z) -> succ(Xb, Xbp, Zp) .
cnu(X1, X2, Xb, Z, Zp), cnu(X1p, X2p, Xbp, Z, Zp), succ(X1, X1p, Z), max(X2, Z), min(X2p, Z) -> succ(Xb, Xbp, Zp) .
cnu(X1, X1, Xb, Z, Zp), min(X1, Z) -> min(Xb, Zp) .
cnu(X1, X1, Xb, Z, Zp), max(X1, Z) -> max(Xb, Zp) .
";

pub const SETS_RULES: &str = "\
elem(X), set(S) -> set(V), su(X, S, V), su(X, V, V) .
su(X, S, T), su(Y, S, S) -> su(Y, T, T) .
";

pub const SETS_CONFLUENT: &str = "\
set(S) -> elem(S) .
su(X, S, T) -> su(T, S, T) .
su(X, S, T), su(Y, X, X) -> su(Y, T, T) .
su(X, S, T), su(S, Y, S) -> su(T, Y, T) .
su(X, S, T), su(X, Y, X) -> su(T, Y, T) .
";

pub const QBF_SETS: &str = "\
getSU(X, S) -> su(X, S, V), su(X, V, V) .
su(X, S, T), su(Y, S, S) -> su(Y, T, T) .
new(X, S), nxt(X, Y) -> getSU(Y, S) .
new(X, S), nxt(X, Y), su(Y, S, T) -> new(Y, T) .
";

pub const QBF_MATRIX: &str = "\
su(X, S, S), in(X, C), first(C) -> csat(C, S) .
csat(C, S), next(C, D), su(X, S, S), in(X, D) -> csat(D, S) .
csat(C, S), last(C) -> sat(S) .
";

pub const QBF_QUANTIFIERS: &str = "\
su(X, S, T), ex(X), sat(T) -> sat(S) .
su(X, S, T), pos(X), sat(T) -> satp(S) .
su(X, S, T), neg(X), sat(T) -> satn(S) .
satp(S), satn(S) -> sat(S) .
";

pub const QBF_QUANTIFIERS_MERGED: &str = "\
su(X, S, T), ex(X), sat(T) -> sat(S) .
su(X, S, T), pos(X), sat(T), su(X2, S, T2), neg(X2), sat(T2) -> sat(S) .
";

pub const QBF_QUERY: &str = "?- empty(V), sat(V) .";

/// `first(1)`, `last(ℓ)` and `next(i, i+1)` for `i < ℓ`.
pub fn level_facts(levels: usize) -> String {
    let mut s = format!("first(1) .\nlast({levels}) .\n");
    for i in 1..levels {
        s.push_str(&format!("next({i}, {}) .\n", i + 1));
    }
    s
}

pub fn gen_dexp(levels: usize, with_propagation: bool) -> CorpusInstance {
    assert!(levels >= 1, "at least one level");
    let mut rules = DEXP_RULES.to_string();
    if with_propagation {
        rules.push_str(DEXP_PROPAGATION);
    }
    let c = CorpusInstance::build(
        "dexp",
        json!({ "levels": levels, "propagation": with_propagation }),
        rules,
        level_facts(levels),
        Vec::new(),
    )
    .with_oracle(Oracle::FullChase)
    .expect("ledgraphEdges", json!(3), Basis::Example);
    if with_propagation {
        c.expect("saturating", json!(true), Basis::Example)
            .expect("E", json!(["V@rule1 -X-> W@rule3"]), Basis::Example)
            .expect("rank", json!(2), Basis::ByConstruction)
            .expect("arboreous", json!(false), Basis::ByConstruction)
            .expect("terminates", json!(true), Basis::Example)
    } else {
        c.expect("saturating", json!(false), Basis::ByConstruction)
    }
}

/// The level program without propagation over the looping database
/// `first(1), last(1), next(1, 1)`.
pub fn dexp_nonterm() -> CorpusInstance {
    let mut c = gen_dexp(1, false).with_facts("first(1) .\nlast(1) .\nnext(1, 1) .\n".into());
    c.name = "dexp_nonterm";
    c.params = json!({ "levels": 1, "propagation": false, "database": "loop" });
    c.expect("saturating", json!(false), Basis::ByConstruction)
        .expect("terminates", json!(false), Basis::Example)
}

pub fn gen_sets(elements: usize) -> CorpusInstance {
    let mut facts = String::from("set(e0) .\n");
    for i in 1..=elements {
        facts.push_str(&format!("elem(a{i}) .\n"));
    }
    let queries = if elements > 0 {
        vec!["?- su(a1, S, S) .".to_string()]
    } else {
        Vec::new()
    };
    CorpusInstance::build("sets", json!({ "elements": elements }), SETS_RULES.into(), facts, queries)
        .with_oracle(Oracle::FullChase)
        .expect("ledgraphEdges", json!(1), Basis::Example)
        .expect("saturating", json!(true), Basis::Example)
        .expect("E", json!(["V@rule0 -S-> V@rule0"]), Basis::Example)
        .expect("rank", json!(1), Basis::ByConstruction)
        .expect("arboreous", json!(true), Basis::ByConstruction)
        .expect("pathGuarded", json!(true), Basis::ByConstruction)
        .expect("terminates", json!(true), Basis::Example)
}

/// Sets with the confluent extension over `{set(e0), elem(a1)}`. Without the
/// trigger rule `set(S) -> elem(S)` the program is saturating again.
pub fn gen_sets_nonterm(with_trigger: bool) -> CorpusInstance {
    let mut rules = SETS_RULES.to_string();
    for line in SETS_CONFLUENT.lines() {
        if with_trigger || !line.starts_with("set(S)") {
            rules.push_str(line);
            rules.push('\n');
        }
    }
    let c = CorpusInstance::build(
        "sets_nonterm",
        json!({ "trigger": with_trigger }),
        rules,
        "set(e0) .\nelem(a1) .\n".into(),
        Vec::new(),
    )
    .with_oracle(Oracle::FullChase);
    if with_trigger {
        c.expect("saturating", json!(false), Basis::Example)
            .expect("terminates", json!(false), Basis::Example)
    } else {
        c.expect("saturating", json!(true), Basis::ByConstruction)
            .expect("terminates", json!(true), Basis::ByConstruction)
    }
}

fn qbf_facts(phi: &Qbf) -> String {
    assert!(!phi.prefix.is_empty() && !phi.clauses.is_empty(), "need a variable and a clause");
    let n = phi.prefix.len();
    let lits = |i: usize| [Lit::pos(i).constant(), Lit::neg(i).constant()];
    let mut s = String::from("empty(e0) .\nnew(start, e0) .\n");
    for l in lits(1) {
        s.push_str(&format!("nxt(start, {l}) .\n"));
    }
    for i in 1..n {
        for a in lits(i) {
            for b in lits(i + 1) {
                s.push_str(&format!("nxt({a}, {b}) .\n"));
            }
        }
    }
    let k = phi.clauses.len();
    for (j, clause) in phi.clauses.iter().enumerate() {
        for l in clause {
            s.push_str(&format!("in({}, c{}) .\n", l.constant(), j + 1));
        }
        if j > 0 {
            s.push_str(&format!("next(c{j}, c{}) .\n", j + 1));
        }
    }
    s.push_str(&format!("first(c1) .\nlast(c{k}) .\n"));
    for (i, q) in phi.prefix.iter().enumerate() {
        let [p, np] = lits(i + 1);
        if *q == Quant::Exists {
            s.push_str(&format!("ex({p}) .\nex({np}) .\n"));
        }
        s.push_str(&format!("pos({p}) .\nneg({np}) .\n"));
    }
    s
}

fn qbf_instance(name: &'static str, phi: &Qbf, quantifier_rules: &str) -> CorpusInstance {
    let rules = format!("{QBF_SETS}{QBF_MATRIX}{quantifier_rules}");
    CorpusInstance::build(
        name,
        json!({ "formula": phi.to_string() }),
        rules,
        qbf_facts(phi),
        vec![QBF_QUERY.to_string()],
    )
    .with_oracle(Oracle::QbfBruteForce(phi.clone()))
    .expect("entailed", json!(phi.eval()), Basis::Oracle)
    .expect("saturating", json!(true), Basis::ByConstruction)
    .expect("arboreous", json!(true), Basis::ByConstruction)
    .expect("terminates", json!(true), Basis::ByConstruction)
}

pub fn gen_qbf(phi: &Qbf) -> CorpusInstance {
    qbf_instance("qbf", phi, QBF_QUANTIFIERS).expect("pathGuarded", json!(true), Basis::Example)
}

/// The QBF program with the universal-quantifier rules merged into one rule
/// over two sibling sets.
pub fn gen_qbf_merged(phi: &Qbf) -> CorpusInstance {
    qbf_instance("qbf_merged", phi, QBF_QUANTIFIERS_MERGED).expect("pathGuarded", json!(false), Basis::ByConstruction)
}

pub fn gen_counter(levels: usize) -> CorpusInstance {
    assert!(levels >= 1, "at least one level");
    let rules = format!("{DEXP_RULES}{DEXP_PROPAGATION}{COUNTER_RULES}");
    CorpusInstance::build("counter", json!({ "levels": levels }), rules, level_facts(levels), Vec::new())
        .with_oracle(Oracle::FullChase)
        .expect("terminates", json!(true), Basis::ByConstruction)
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &["dexp", "dexp_nonterm", "sets", "sets_nonterm", "qbf", "qbf_merged", "counter"];

/// Looks up a generator. `param` is the level count, element count, QBF suite
/// index or trigger flag (nonzero) depending on the generator.
pub fn by_name(name: &str, param: Option<usize>, propagation: bool) -> Option<CorpusInstance> {
    Some(match name {
        "dexp" => gen_dexp(param.unwrap_or(1).max(1), propagation),
        "dexp_nonterm" => dexp_nonterm(),
        "sets" => gen_sets(param.unwrap_or(1)),
        "sets_nonterm" => gen_sets_nonterm(param.unwrap_or(1) != 0),
        "qbf" => gen_qbf(qbf_suite().get(param.unwrap_or(0))?),
        "qbf_merged" => gen_qbf_merged(qbf_suite().get(param.unwrap_or(0))?),
        "counter" => gen_counter(param.unwrap_or(2).max(1)),
        _ => return None,
    })
}

/// Every instance that terminates by construction or certificate, over the
/// databases exercised by the acceptance sweep.
pub fn terminating_instances() -> Vec<CorpusInstance> {
    let mut out = vec![gen_dexp(1, true), gen_dexp(2, true), gen_dexp(3, true)];
    out.extend((0..=4).map(gen_sets));
    out.push(gen_sets_nonterm(false));
    out.extend(qbf_suite().iter().map(gen_qbf));
    out.push(gen_counter(1));
    out.push(gen_counter(2));
    out
}

#[cfg(test)]
mod tests;
