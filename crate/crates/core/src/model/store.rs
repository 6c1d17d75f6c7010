use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexSet;

use super::atom::Atom;
use super::term::{Sym, Term};

const EMPTY: &[u32] = &[];

/// Append-only set of ground atoms indexed by predicate and by
/// `(predicate, position, term)`.
///
/// Atoms keep their insertion index for their whole life in the store, so a
/// range of indices names the facts added during a phase of a computation.
#[derive(Clone, Default)]
pub struct FactStore {
    atoms: IndexSet<Atom>,
    by_pred: HashMap<Sym, Vec<u32>>,
    by_pos: HashMap<(Sym, u32, Term), Vec<u32>>,
}

impl FactStore {
    pub fn new() -> FactStore {
        FactStore::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> FactStore {
        let mut s = FactStore::new();
        for a in atoms {
            s.insert(a);
        }
        s
    }

    /// Inserts a ground atom; returns whether it was new.
    pub fn insert(&mut self, atom: Atom) -> bool {
        debug_assert!(atom.is_ground(), "variables in fact {atom}");
        if self.atoms.contains(&atom) {
            return false;
        }
        let idx = self.atoms.len() as u32;
        self.by_pred.entry(atom.pred).or_default().push(idx);
        for (i, t) in atom.args.iter().enumerate() {
            self.by_pos.entry((atom.pred, i as u32, *t)).or_default().push(idx);
        }
        self.atoms.insert(atom);
        true
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn index_of(&self, atom: &Atom) -> Option<u32> {
        self.atoms.get_index_of(atom).map(|i| i as u32)
    }

    pub fn get(&self, idx: u32) -> &Atom {
        &self.atoms[idx as usize]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.atoms.iter()
    }

    /// Indices of atoms with the given predicate, ascending.
    pub fn with_pred(&self, pred: Sym) -> &[u32] {
        self.by_pred.get(&pred).map(Vec::as_slice).unwrap_or(EMPTY)
    }

    /// Indices of atoms with `term` at 0-based argument `pos`, ascending.
    pub fn with_term(&self, pred: Sym, pos: u32, term: Term) -> &[u32] {
        self.by_pos
            .get(&(pred, pos, term))
            .map(Vec::as_slice)
            .unwrap_or(EMPTY)
    }

    pub fn terms(&self) -> BTreeSet<Term> {
        self.atoms.iter().flat_map(|a| a.args.iter().copied()).collect()
    }

    pub fn nulls(&self) -> BTreeSet<Term> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter().copied())
            .filter(Term::is_null)
            .collect()
    }

    pub fn has_nulls(&self) -> bool {
        self.atoms.iter().any(Atom::has_null)
    }

    /// Keeps only atoms accepted by `keep`. Insertion indices are renumbered.
    pub fn retain(&mut self, mut keep: impl FnMut(&Atom) -> bool) {
        let old = std::mem::take(self);
        for a in old.atoms {
            if keep(&a) {
                self.insert(a);
            }
        }
    }

    pub fn is_subset(&self, other: &FactStore) -> bool {
        self.atoms.iter().all(|a| other.contains(a))
    }

    pub fn same_atoms(&self, other: &FactStore) -> bool {
        self.len() == other.len() && self.is_subset(other)
    }

    pub fn sorted(&self) -> Vec<Atom> {
        let mut v: Vec<Atom> = self.atoms.iter().cloned().collect();
        v.sort();
        v
    }
}

impl PartialEq for FactStore {
    fn eq(&self, other: &FactStore) -> bool {
        self.same_atoms(other)
    }
}

impl Eq for FactStore {}

impl fmt::Debug for FactStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms.iter().map(|a| a.to_string())).finish()
    }
}

impl fmt::Display for FactStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.atoms {
            writeln!(f, "{a} .")?;
        }
        Ok(())
    }
}

impl FromIterator<Atom> for FactStore {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> FactStore {
        FactStore::from_atoms(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn insert_and_index() {
        let mut s = FactStore::new();
        assert!(s.insert(Atom::new("p", vec![c("a"), c("b")])));
        assert!(!s.insert(Atom::new("p", vec![c("a"), c("b")])));
        assert!(s.insert(Atom::new("p", vec![c("b"), c("b")])));
        assert_eq!(s.with_pred(Sym::new("p")), &[0, 1]);
        assert_eq!(s.with_term(Sym::new("p"), 1, c("b")), &[0, 1]);
        assert_eq!(s.with_term(Sym::new("p"), 0, c("a")), &[0]);
        assert!(s.with_pred(Sym::new("q")).is_empty());
    }

    #[test]
    fn retain_rebuilds_indexes() {
        let mut s: FactStore = vec![
            Atom::new("p", vec![c("a")]),
            Atom::new("p", vec![c("b")]),
        ]
        .into_iter()
        .collect();
        s.retain(|a| a.args[0] == c("b"));
        assert_eq!(s.len(), 1);
        assert_eq!(s.with_pred(Sym::new("p")), &[0]);
        assert_eq!(s.with_term(Sym::new("p"), 0, c("b")), &[0]);
    }
}
