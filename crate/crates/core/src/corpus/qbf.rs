use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quant {
    Exists,
    Forall,
}

/// Literal over variable `var` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lit {
    pub var: usize,
    pub neg: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit { var, neg: false }
    }

    pub fn neg(var: usize) -> Lit {
        Lit { var, neg: true }
    }

    /// Constant naming this literal in generated facts.
    pub fn constant(self) -> String {
        if self.neg {
            format!("np{}", self.var)
        } else {
            format!("p{}", self.var)
        }
    }
}

/// A prenex QBF with a CNF matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qbf {
    pub prefix: Vec<Quant>,
    pub clauses: Vec<Vec<Lit>>,
}

impl Qbf {
    pub fn new(prefix: Vec<Quant>, clauses: Vec<Vec<Lit>>) -> Qbf {
        assert!(
            clauses.iter().flatten().all(|l| l.var >= 1 && l.var <= prefix.len()),
            "clause literal outside the prefix"
        );
        Qbf { prefix, clauses }
    }

    fn matrix(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| assignment[l.var - 1] != l.neg))
    }

    fn eval_from(&self, i: usize, assignment: &mut Vec<bool>) -> bool {
        if i == self.prefix.len() {
            return self.matrix(assignment);
        }
        let branch = |v: bool, a: &mut Vec<bool>| {
            a.push(v);
            let r = self.eval_from(i + 1, a);
            a.pop();
            r
        };
        match self.prefix[i] {
            Quant::Exists => branch(false, assignment) || branch(true, assignment),
            Quant::Forall => branch(false, assignment) && branch(true, assignment),
        }
    }

    /// Truth value by enumerating every assignment.
    pub fn eval(&self) -> bool {
        self.eval_from(0, &mut Vec::with_capacity(self.prefix.len()))
    }
}

impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.prefix.iter().enumerate() {
            let s = match q {
                Quant::Exists => "E",
                Quant::Forall => "A",
            };
            write!(f, "{s}p{} ", i + 1)?;
        }
        let cs: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let ls: Vec<String> = c
                    .iter()
                    .map(|l| format!("{}p{}", if l.neg { "-" } else { "" }, l.var))
                    .collect();
                format!("({})", ls.join(" | "))
            })
            .collect();
        write!(f, ". {}", cs.join(" & "))
    }
}

/// The fixed suite of twelve small formulas (at most three quantifiers and
/// three clauses), mixing true and false instances.
pub fn qbf_suite() -> Vec<Qbf> {
    use Quant::{Exists as E, Forall as A};
    let (p, n) = (Lit::pos, Lit::neg);
    vec![
        Qbf::new(vec![E], vec![vec![p(1)]]),
        Qbf::new(vec![A], vec![vec![p(1)]]),
        Qbf::new(vec![E, A], vec![vec![p(1), p(2)], vec![p(1), n(2)]]),
        Qbf::new(vec![A, E], vec![vec![p(1), p(2)], vec![n(1), n(2)]]),
        Qbf::new(vec![E, A], vec![vec![p(1), p(2)], vec![n(1), n(2)]]),
        Qbf::new(vec![A, A], vec![vec![p(1), p(2)]]),
        Qbf::new(vec![E, E], vec![vec![p(1)], vec![n(1), p(2)], vec![n(2)]]),
        Qbf::new(vec![A, E, A], vec![vec![p(1), p(2), p(3)], vec![n(1), n(2)], vec![p(2), n(3)]]),
        Qbf::new(vec![E, A, E], vec![vec![p(1), p(2)], vec![n(2), p(3)], vec![n(1), n(3)]]),
        Qbf::new(vec![A, E, E], vec![vec![p(1), p(2)], vec![n(1), p(3)], vec![n(2), n(3)]]),
        Qbf::new(vec![E, E, A], vec![vec![p(1), p(3)], vec![p(2), n(3)]]),
        Qbf::new(vec![A, A, E], vec![vec![p(1), p(2), p(3)], vec![n(1), n(3)], vec![n(2), n(3)]]),
    ]
}
