use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::term::{Atom, Clause, Query, Term, Var};

/// A finite map from variables to terms, applied simultaneously.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Builds a substitution, dropping trivial `x -> x` bindings.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Substitution {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    pub fn bind(&mut self, v: Var, t: Term) {
        if t != Term::Var(v.clone()) {
            self.bindings.insert(v, t);
        } else {
            self.bindings.remove(&v);
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.bindings.is_empty() {
            return t.clone();
        }
        self.apply_inner(t).unwrap_or_else(|| t.clone())
    }

    // None means "unchanged", so untouched subterms keep sharing their Arc.
    fn apply_inner(&self, t: &Term) -> Option<Term> {
        match t {
            Term::Var(v) => self.bindings.get(v).cloned(),
            Term::App(f, args) => {
                let mut changed: Option<Vec<Term>> = None;
                for (i, a) in args.iter().enumerate() {
                    if let Some(new) = self.apply_inner(a) {
                        let buf = changed.get_or_insert_with(|| args[..i].to_vec());
                        buf.push(new);
                    } else if let Some(buf) = changed.as_mut() {
                        buf.push(a.clone());
                    }
                }
                changed.map(|v| Term::App(f.clone(), Arc::from(v)))
            }
        }
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        Atom {
            pred: a.pred.clone(),
            args: a
                .args
                .iter()
                .map(|t| self.apply(t))
                .collect::<Vec<_>>()
                .into(),
        }
    }

    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause {
            head: self.apply_atom(&c.head),
            body: c.body.iter().map(|b| self.apply_atom(b)).collect(),
        }
    }

    pub fn apply_query(&self, q: &Query) -> Query {
        Query::new(q.atoms.iter().map(|a| self.apply_atom(a)).collect())
    }

    /// `self` followed by `other`: `t(self.then(other)) = (t self) other`.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), other.apply(t));
        }
        for (v, t) in &other.bindings {
            if !self.bindings.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    pub fn is_idempotent(&self) -> bool {
        self.bindings
            .values()
            .all(|t| self.bindings.keys().all(|v| !t.occurs(v)))
    }

    pub fn restrict(&self, vars: &[Var]) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }

    /// Fresh variables for every variable of the clause.
    pub fn renaming(vars: &[Var]) -> Substitution {
        Substitution::from_pairs(vars.iter().map(|v| (v.clone(), Term::Var(Var::fresh()))))
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        write!(f, "}}")
    }
}

/// Renames a clause apart with fresh variables.
pub fn rename_clause(c: &Clause) -> Clause {
    Substitution::renaming(&c.vars()).apply_clause(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> (Var, Term) {
        let var = Var::named(name);
        let t = Term::Var(var.clone());
        (var, t)
    }

    #[test]
    fn apply_examples() {
        let (x, tx) = v("X");
        let (y, ty) = v("Y");
        let s = Substitution::from_pairs([(x.clone(), Term::numeral(0))]);
        assert_eq!(s.apply(&Term::app("s", vec![tx.clone()])), Term::numeral(1));
        let g = Term::app("f", vec![Term::constant("a")]);
        assert_eq!(Substitution::new().apply(&tx), tx);
        assert_eq!(s.apply(&g), g);
        let s2 = Substitution::from_pairs([(x, Term::numeral(1)), (y, Term::nil())]);
        assert_eq!(
            s2.apply(&Term::cons(tx, ty)),
            Term::list([Term::numeral(1)])
        );
    }

    #[test]
    fn trivial_bindings_dropped() {
        let (x, tx) = v("X");
        let s = Substitution::from_pairs([(x, tx)]);
        assert!(s.is_empty());
    }

    #[test]
    fn composition() {
        let (x, tx) = v("X");
        let (y, ty) = v("Y");
        let s = Substitution::from_pairs([(x.clone(), Term::app("s", vec![ty.clone()]))]);
        let t = Substitution::from_pairs([(y.clone(), Term::numeral(0))]);
        let st = s.then(&t);
        let term = Term::app("f", vec![tx, ty]);
        assert_eq!(st.apply(&term), t.apply(&s.apply(&term)));
        assert!(st.is_idempotent());
    }
}
