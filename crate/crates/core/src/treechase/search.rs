use std::collections::BTreeSet;

use serde::Serialize;

use super::runner::{SpaceProfile, TreeChase};
use crate::model::{Bcq, FactStore, Program, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SearchVerdict {
    Entailed,
    NotEntailed,
    /// The node budget ran out before every script up to `M` was explored.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub verdict: SearchVerdict,
    pub nodes: usize,
    /// Profile of the accepting run, if any.
    pub profile: Option<SpaceProfile>,
}

struct Dfs<'q> {
    q: &'q Bcq,
    m: usize,
    budget: usize,
    nodes: usize,
    exhausted: bool,
}

impl Dfs<'_> {
    /// Explores every script from `st`, which is at query atom `atom` after
    /// `iter` inner iterations.
    fn go(&mut self, st: &TreeChase<'_>, atom: usize, iter: usize) -> Option<SpaceProfile> {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return None;
        }
        self.nodes += 1;
        if st.entails(self.q) {
            return Some(st.profile);
        }
        if atom >= self.q.len() {
            return None;
        }
        if iter < self.m {
            for c in st.applicable() {
                let mut next = st.clone();
                next.apply_unchecked(&c);
                if let Some(p) = self.go(&next, atom, iter + 1) {
                    return Some(p);
                }
                if self.exhausted {
                    return None;
                }
            }
        }
        if atom + 1 < self.q.len() {
            let mut next = st.clone();
            next.next_atom();
            return self.go(&next, atom + 1, 0);
        }
        None
    }
}

/// Depth-first exploration of Algorithm 1's choices with at most `m` rule
/// applications per query atom and at most `budget` visited states.
pub fn tree_chase_search(
    p: &Program,
    database: &FactStore,
    q: &Bcq,
    v_e: &BTreeSet<VarId>,
    m: usize,
    budget: usize,
) -> SearchOutcome {
    let st = TreeChase::new(p, database, v_e);
    let mut dfs = Dfs {
        q,
        m,
        budget,
        nodes: 0,
        exhausted: false,
    };
    let found = dfs.go(&st, 0, 0);
    let verdict = match (found, dfs.exhausted) {
        (Some(_), _) => SearchVerdict::Entailed,
        (None, true) => SearchVerdict::Inconclusive,
        (None, false) => SearchVerdict::NotEntailed,
    };
    SearchOutcome {
        verdict,
        nodes: dfs.nodes,
        profile: found,
    }
}
