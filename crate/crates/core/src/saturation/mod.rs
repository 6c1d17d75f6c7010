//! Path queries, propagation checks and the search for edge sets that make
//! each strongly connected component `E`-saturating.

mod check;
mod path;
mod search;
mod trace;

pub use check::{
    check_e_saturating, check_with, enumerate_ebar_paths, find_cycle, topo_order, CheckReport, Condition,
    EbarError, EbarPath, PropCache, StepPair, Witness, DEFAULT_PATH_CAP,
};
pub use path::{is_base_propagating, is_step_propagating, path_query, PathError, PathQuery, PathStep, Propagation};
pub use search::{
    analyze_saturation, find_saturating_certificate, search_component, ComponentOutcome, ComponentResult,
    SaturationAnalysis, SaturationCertificate, SaturationError, SearchOptions, Verdict,
};
pub use trace::{check_context_distinct, check_edge_projection, check_path_queries, TraceCheckError};
