//! Terms, atoms, rules, fact stores and queries.

mod atom;
mod parse;
mod query;
mod rule;
mod store;
mod term;

use thiserror::Error;

pub use atom::{Atom, Position};
pub use parse::{
    parse_facts, parse_facts_with, parse_program, parse_query, parse_query_with, ParseError,
};
pub use query::Bcq;
pub use rule::{fmt_atom_named, Program, RuleDraft, Signature, Tgd, VarInfo, VarKind};
pub use store::FactStore;
pub use term::{NullId, Sym, Term, VarId, RUNNER_NULL_BASE};


#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("arity mismatch for predicate {pred}: expected {expected}, found {found}")]
    Arity {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("rule {rule} contains a null")]
    NullInRule { rule: usize },
    #[error("unsafe rule {rule}: variable {var} occurs only in the head but is not declared existential")]
    Unsafe { rule: usize, var: String },
    #[error("rule {rule}: declared existential {var} occurs in the body")]
    ExistentialInBody { rule: usize, var: String },
}
