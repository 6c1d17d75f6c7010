use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use sattgd::analysis::{analyze, Analysis};
use sattgd::chase::{chase, evaluate_bcq, trace_json, trace_text, ChaseResult, Strategy};
use sattgd::corpus;
use sattgd::depgraph::ledgraph_dot;
use sattgd::model::{parse_facts_with, parse_program, parse_query_with, Bcq, FactStore, Program};
use sattgd::par::Parallelism;
use sattgd::saturation::SearchOptions;
use sattgd::treechase::{tree_chase_guided, tree_chase_search, GuidedError, SearchVerdict};

#[derive(Parser)]
#[command(name = "sattgd", version, about = "Termination analysis and chase engines for existential rules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a rule file, echoing it in normal form.
    Parse { file: PathBuf },
    /// Run the static analysis pipeline.
    Analyze {
        file: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
        /// Write the dependency graph as DOT into this directory.
        #[arg(long, value_name = "DIR")]
        dot: Option<PathBuf>,
        /// Candidate edge sets per component.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// E-bar paths per candidate.
        #[arg(long, default_value_t = 10_000)]
        path_cap: usize,
        /// Run propagation checks on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Run the Datalog-first restricted chase.
    Chase {
        file: PathBuf,
        facts: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Deterministic)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the step trace here (`.json` for JSON, text otherwise).
        #[arg(long, value_name = "OUT")]
        trace: Option<PathBuf>,
        /// Print the final interpretation.
        #[arg(long)]
        print: bool,
    },
    /// Decide a Boolean conjunctive query.
    Query {
        file: PathBuf,
        facts: PathBuf,
        query: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Full)]
        engine: Engine,
        /// Inner-loop bound of the tree chase (tree-search).
        #[arg(long = "M", alias = "m", default_value_t = 64)]
        m: usize,
        /// Node budget of tree-search.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Step cap of the full chase, also used for the tree-guided reference run.
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
    },
    /// Write a corpus instance as .tgd/.facts/.query files.
    Examples {
        /// Generator name; omit to list them.
        name: Option<String>,
        /// Level count, element count, QBF suite index or trigger flag.
        #[arg(long)]
        param: Option<usize>,
        /// dexp without the two propagation rules.
        #[arg(long)]
        no_propagation: bool,
        #[arg(long, short, default_value = ".")]
        out: PathBuf,
    },
    /// Print the labelled dependency graph as DOT.
    Graph {
        file: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Deterministic,
    Seeded,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Full,
    TreeGuided,
    TreeSearch,
}

enum Failure {
    Input(String),
    Refused(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Refused(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Refused(m) | Failure::Internal(m) => m,
        }
    }
}

type Res = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Failure> {
    parse_program(&read(path)?).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn load_facts(p: &Program, path: &Path) -> Result<FactStore, Failure> {
    let mut sig = p.signature().clone();
    parse_facts_with(&read(path)?, &mut sig).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn load_query(p: &Program, path: &Path) -> Result<Bcq, Failure> {
    let mut sig = p.signature().clone();
    parse_query_with(&read(path)?, &mut sig).map_err(|e| Failure::Input(format!("{}:{e}", path.display())))
}

fn cmd_parse(file: &Path) -> Res {
    let p = load_program(file)?;
    print!("{p}");
    Ok(())
}

fn summary(p: &Program, a: &Analysis) -> String {
    let r = a.report(p);
    let mut s = format!(
        "rules: {}\nledgraph: {} vertices, {} edges\nsaturation: {:?}\n",
        r.rules,
        r.ledgraph.vertices.len(),
        r.ledgraph.edges.len(),
        r.saturation_verdict
    );
    if let Some(sets) = &a.edge_sets {
        for (c, e) in sets.iter().filter(|(_, e)| !e.is_empty()) {
            let shown: Vec<String> = e.iter().map(|x| x.display(p)).collect();
            s += &format!("  component {c}: E = {{{}}}\n", shown.join(", "));
        }
    }
    if let Some(rank) = r.rank {
        s += &format!("rank: {rank}\n");
    }
    if let Some(rec) = &r.arboreous_record {
        s += &format!("arboreous: {}", r.arboreous);
        if let Some(reason) = &rec.reason {
            s += &format!(" ({reason})");
        }
        s.push('\n');
    }
    if let Some(g) = &r.path_guarded_record {
        s += &format!("path-guarded: {}\n", g.guarded);
        for o in &g.offending {
            let pairs: Vec<String> = o.pairs.iter().map(|(x, y)| format!("{x}/{y}")).collect();
            s += &format!("  rule {}: incomparable {}\n", o.rule, pairs.join(", "));
        }
    }
    s
}

fn cmd_analyze(file: &Path, json_out: bool, dot: Option<&Path>, budget: usize, path_cap: usize, sequential: bool) -> Res {
    let p = load_program(file)?;
    let opts = SearchOptions {
        candidate_budget: budget,
        path_cap,
        parallelism: if sequential { Parallelism::Sequential } else { Parallelism::Parallel },
    };
    let a = analyze(&p, &opts);
    if let Some(dir) = dot {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        write(&dir.join("ledgraph.dot"), &ledgraph_dot(&p, &a.graph, &a.scc))?;
    }
    if json_out {
        let text = serde_json::to_string_pretty(&a.report(&p)).map_err(|e| Failure::Internal(e.to_string()))?;
        println!("{text}");
    } else {
        print!("{}", summary(&p, &a));
    }
    Ok(())
}

fn cmd_chase(
    file: &Path,
    facts: &Path,
    max_steps: usize,
    strategy: StrategyArg,
    seed: u64,
    trace: Option<&Path>,
    print: bool,
) -> Res {
    let p = load_program(file)?;
    let db = load_facts(&p, facts)?;
    let strat = match strategy {
        StrategyArg::Deterministic => Strategy::Deterministic,
        StrategyArg::Seeded => Strategy::Seeded(seed),
    };
    let res = chase(&p, &db, strat, max_steps);
    let verdict = if res.terminated() { "terminated" } else { "step-cap-exceeded" };
    println!(
        "{verdict}: {} steps, {} nulls, {} facts",
        res.trace().steps.len(),
        res.null_count(),
        res.interp().len()
    );
    if let Some(out) = trace {
        let text = if out.extension().is_some_and(|e| e == "json") {
            serde_json::to_string_pretty(&trace_json(&p, res.trace())).map_err(|e| Failure::Internal(e.to_string()))?
        } else {
            trace_text(&p, res.trace())
        };
        write(out, &text)?;
    }
    if print {
        print!("{}", res.interp());
    }
    Ok(())
}

fn tree_refusal(p: &Program) -> Result<sattgd::arboreal::ArboreousInfo, Failure> {
    let a = analyze(p, &SearchOptions::default());
    if !a.is_saturating() {
        return Err(Failure::Refused(format!(
            "tree engines need a saturating program; saturation check: {:?}",
            a.saturation.verdict()
        )));
    }
    let verdict = a.arboreous.as_ref().expect("saturating programs get an arboreous verdict");
    let Some(info) = verdict.info() else {
        return Err(Failure::Refused(format!(
            "tree engines need an arboreous program; arboreous check: {}",
            verdict.reason().unwrap_or("failed")
        )));
    };
    let g = a.guarded.as_ref().expect("arboreous programs get a guardedness verdict");
    if !g.guarded {
        let rules: Vec<String> = g.offending.iter().map(|(r, _)| r.to_string()).collect();
        return Err(Failure::Refused(format!(
            "tree engines need a path-guarded program; path-guarded check fails for rules {}",
            rules.join(", ")
        )));
    }
    Ok(info.clone())
}

fn cmd_query(file: &Path, facts: &Path, query: &Path, engine: Engine, m: usize, budget: usize, max_steps: usize) -> Res {
    let p = load_program(file)?;
    let db = load_facts(&p, facts)?;
    let q = load_query(&p, query)?;
    match engine {
        Engine::Full => {
            let res: ChaseResult = chase(&p, &db, Strategy::Deterministic, max_steps);
            let verdict = match (evaluate_bcq(res.interp(), &q), res.terminated()) {
                (true, _) => "entailed",
                (false, true) => "not entailed",
                (false, false) => "inconclusive",
            };
            println!("{verdict}");
        }
        Engine::TreeGuided => {
            let info = tree_refusal(&p)?;
            match tree_chase_guided(&p, &db, &q, &info, max_steps) {
                Ok(out) => {
                    println!("{}", if out.entailed { "entailed" } else { "not entailed" });
                    let profile = json!({ "M": out.m, "profile": out.profile, "referenceSize": out.reference_size });
                    eprintln!("{profile}");
                }
                Err(e @ GuidedError::NotTerminated(_)) => return Err(Failure::Refused(e.to_string())),
                Err(e) => return Err(Failure::Internal(e.to_string())),
            }
        }
        Engine::TreeSearch => {
            let info = tree_refusal(&p)?;
            let out = tree_chase_search(&p, &db, &q, &info.v_e, m, budget);
            let verdict = match out.verdict {
                SearchVerdict::Entailed => "entailed",
                SearchVerdict::NotEntailed => "not entailed",
                SearchVerdict::Inconclusive => "inconclusive",
            };
            println!("{verdict}");
            eprintln!("{}", json!({ "nodes": out.nodes, "profile": out.profile }));
        }
    }
    Ok(())
}

fn cmd_examples(name: Option<&str>, param: Option<usize>, no_propagation: bool, out: &Path) -> Res {
    let Some(name) = name else {
        for n in corpus::NAMES {
            println!("{n}");
        }
        return Ok(());
    };
    let inst = corpus::by_name(name, param, !no_propagation).ok_or_else(|| {
        Failure::Input(format!("unknown example {name}; known: {}", corpus::NAMES.join(", ")))
    })?;
    fs::create_dir_all(out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    let stem = match param {
        Some(k) => format!("{name}_{k}"),
        None => name.to_string(),
    };
    let mut written = vec![out.join(format!("{stem}.tgd")), out.join(format!("{stem}.facts"))];
    write(&written[0], &inst.program_text)?;
    write(&written[1], &inst.facts_text)?;
    if !inst.query_texts.is_empty() {
        let path = out.join(format!("{stem}.query"));
        write(&path, &(inst.query_texts.join("\n") + "\n"))?;
        written.push(path);
    }
    for w in written {
        println!("{}", w.display());
    }
    Ok(())
}

fn cmd_graph(file: &Path, out: Option<&Path>) -> Res {
    let p = load_program(file)?;
    let a = analyze(&p, &SearchOptions::default());
    let dot = ledgraph_dot(&p, &a.graph, &a.scc);
    match out {
        Some(path) => write(path, &dot),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Parse { file } => cmd_parse(file),
        Cmd::Analyze {
            file,
            json,
            dot,
            budget,
            path_cap,
            sequential,
        } => cmd_analyze(file, *json, dot.as_deref(), *budget, *path_cap, *sequential),
        Cmd::Chase {
            file,
            facts,
            max_steps,
            strategy,
            seed,
            trace,
            print,
        } => cmd_chase(file, facts, *max_steps, *strategy, *seed, trace.as_deref(), *print),
        Cmd::Query {
            file,
            facts,
            query,
            engine,
            m,
            budget,
            max_steps,
        } => cmd_query(file, facts, query, *engine, *m, *budget, *max_steps),
        Cmd::Examples {
            name,
            param,
            no_propagation,
            out,
        } => cmd_examples(name.as_deref(), *param, *no_propagation, out),
        Cmd::Graph { file, out } => cmd_graph(file, out.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
