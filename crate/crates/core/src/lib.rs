//! Existential rules: the Datalog-first restricted chase with provenance,
//! static termination analysis via saturating dependency graphs, and a
//! space-bounded tree chase for Boolean conjunctive queries.

pub mod datalog;
pub mod matching;
pub mod model;
pub mod chase;
pub mod depgraph;
pub mod par;
pub mod saturation;
pub mod corpus;
pub mod arboreal;
pub mod treechase;
pub mod analysis;
