use std::fmt;

use super::atom::Atom;
use super::rule::fmt_atom_named;
use super::term::VarId;

/// A Boolean conjunctive query. Variables are local: `VarId(i)` is the
/// variable named `var_names[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bcq {
    pub atoms: Vec<Atom>,
    pub var_names: Vec<String>,
}

impl Bcq {
    pub fn new(atoms: Vec<Atom>, var_names: Vec<String>) -> Bcq {
        Bcq { atoms, var_names }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.var_names[v.0 as usize]
    }
}

impl fmt::Display for Bcq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| fmt_atom_named(a, |v| self.var_name(v).to_string()))
            .collect();
        write!(f, "?- {} .", parts.join(", "))
    }
}
