//! Most general unifiers with a switchable occur-check.
//!
//! With the check disabled the occurs scan is skipped when a variable is
//! bound. Cyclic bindings are still never returned: the solved form is tested
//! for cycles before it is resolved, so both modes agree on every outcome
//! and the term model stays inductive.

use std::collections::HashMap;

use crate::subst::Substitution;
use crate::term::{Atom, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnifyOptions {
    pub occur_check: bool,
}

impl Default for UnifyOptions {
    fn default() -> Self {
        UnifyOptions { occur_check: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unification {
    Unified(Substitution),
    Clash,
    /// A variable would have been bound to a term containing it.
    OccurViolation,
}

impl Unification {
    pub fn ok(self) -> Option<Substitution> {
        match self {
            Unification::Unified(s) => Some(s),
            _ => None,
        }
    }
}

pub fn mgu(t1: &Term, t2: &Term, opts: UnifyOptions) -> Option<Substitution> {
    unify_pairs(vec![(t1.clone(), t2.clone())], opts).ok()
}

/// Fails on predicate or arity mismatch, otherwise unifies the argument tuples.
pub fn unify_atoms(a1: &Atom, a2: &Atom, opts: UnifyOptions) -> Option<Substitution> {
    unify_atoms_traced(a1, a2, opts).ok()
}

pub fn unify_atoms_traced(a1: &Atom, a2: &Atom, opts: UnifyOptions) -> Unification {
    if a1.pred != a2.pred || a1.arity() != a2.arity() {
        return Unification::Clash;
    }
    unify_pairs(
        a1.args
            .iter()
            .cloned()
            .zip(a2.args.iter().cloned())
            .collect(),
        opts,
    )
}

struct Solver {
    bindings: HashMap<Var, Term>,
    occur_check: bool,
}

impl Solver {
    fn deref<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.bindings.get(v) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: &Var, t: &Term) -> bool {
        match self.deref(t) {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| self.occurs(v, a)),
        }
    }

    /// Whether following bindings from `v` can lead back to `v`.
    fn has_cycle(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit(s: &Solver, t: &Term, marks: &mut HashMap<Var, Mark>) -> bool {
            match t {
                Term::Var(v) => match marks.get(v) {
                    Some(Mark::Active) => true,
                    Some(Mark::Done) => false,
                    None => match s.bindings.get(v) {
                        None => false,
                        Some(b) => {
                            marks.insert(v.clone(), Mark::Active);
                            let cyc = visit(s, b, marks);
                            marks.insert(v.clone(), Mark::Done);
                            cyc
                        }
                    },
                },
                Term::App(_, args) => args.iter().any(|a| visit(s, a, marks)),
            }
        }
        let mut marks = HashMap::new();
        self.bindings
            .keys()
            .any(|v| visit(self, &Term::Var(v.clone()), &mut marks))
    }

    fn resolve(&self, t: &Term, memo: &mut HashMap<Var, Term>) -> Term {
        match t {
            Term::Var(v) => {
                if let Some(r) = memo.get(v) {
                    return r.clone();
                }
                match self.bindings.get(v) {
                    None => t.clone(),
                    Some(b) => {
                        let r = self.resolve(b, memo);
                        memo.insert(v.clone(), r.clone());
                        r
                    }
                }
            }
            Term::App(f, args) => {
                if args.is_empty() {
                    return t.clone();
                }
                Term::App(
                    f.clone(),
                    args.iter()
                        .map(|a| self.resolve(a, memo))
                        .collect::<Vec<_>>()
                        .into(),
                )
            }
        }
    }
}

pub fn unify_pairs(pairs: Vec<(Term, Term)>, opts: UnifyOptions) -> Unification {
    let mut solver = Solver {
        bindings: HashMap::new(),
        occur_check: opts.occur_check,
    };
    let input_size: usize = pairs.iter().map(|(a, b)| a.size() + b.size()).sum();
    let mut budget = 4 * input_size + 16;
    let mut steps = 0usize;
    let mut work = pairs;
    while let Some((a, b)) = work.pop() {
        steps += 1;
        if !solver.occur_check && steps > budget {
            // Without the scan a cyclic solved form could make decomposition run forever.
            if solver.has_cycle() {
                return Unification::OccurViolation;
            }
            budget *= 2;
        }
        let a = solver.deref(&a).clone();
        let b = solver.deref(&b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if solver.occur_check && solver.occurs(x, t) {
                    return Unification::OccurViolation;
                }
                solver.bindings.insert(x.clone(), t.clone());
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return Unification::Clash;
                }
                // reversed so that the leftmost argument pair is solved first
                for (x, y) in fa.iter().zip(ga.iter()).rev() {
                    work.push((x.clone(), y.clone()));
                }
            }
        }
    }
    if !solver.occur_check && solver.has_cycle() {
        return Unification::OccurViolation;
    }
    let mut memo = HashMap::new();
    let mut out = Substitution::new();
    let vars: Vec<Var> = solver.bindings.keys().cloned().collect();
    for v in vars {
        let r = solver.resolve(&Term::Var(v.clone()), &mut memo);
        out.bind(v, r);
    }
    Unification::Unified(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_term;
    use crate::term::Signature;

    const ON: UnifyOptions = UnifyOptions { occur_check: true };
    const OFF: UnifyOptions = UnifyOptions { occur_check: false };

    #[test]
    fn identity_case() {
        let x = Term::Var(Var::named("X"));
        assert_eq!(mgu(&x, &x, ON), Some(Substitution::new()));
    }

    #[test]
    fn occur_violation_in_both_modes() {
        let x = Term::Var(Var::named("X"));
        let sx = Term::app("s", vec![x.clone()]);
        assert_eq!(mgu(&x, &sx, ON), None);
        assert_eq!(mgu(&x, &sx, OFF), None);
        assert_eq!(
            unify_pairs(vec![(x.clone(), sx)], OFF),
            Unification::OccurViolation
        );
    }

    #[test]
    fn cyclic_system_terminates_without_check() {
        let sig = Signature::default_queens();
        let t1 = parse_term("cons(X, cons(Y, X))", &sig).unwrap();
        let t2 = parse_term("cons(cons(Y, X), cons(X, Y))", &sig).unwrap();
        assert_eq!(mgu(&t1, &t2, OFF), None);
        assert_eq!(mgu(&t1, &t2, ON), None);
    }

    #[test]
    fn atoms() {
        let sig = Signature::default_queens();
        let p = |s: &str| crate::parse::parse_atom(s, &sig).unwrap();
        let s = unify_atoms(&p("pqs(0,X,Y,Z)"), &p("pqs(0,nil,nil,nil)"), ON).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|(_, t)| *t == Term::nil()));
        assert_eq!(unify_atoms(&p("pqs(0,X,Y,Z)"), &p("pq(0,X,Y,Z)"), ON), None);
        assert_eq!(
            unify_atoms(&p("pq(0,nil,nil,nil)"), &p("pq(s(0),nil,nil,nil)"), ON),
            None
        );
    }
}
