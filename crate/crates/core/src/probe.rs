//! Term inspection shared by ground evaluation and lazy refinement.
//!
//! Every predicate over terms in this crate asks only two questions: "is the
//! principal functor of `t` equal to `f/n`?" and "are `a` and `b` equal?".
//! [`Syntactic`] answers them directly, treating variables as opaque leaves.
//! [`crate::refine::Cell`] answers them for partial terms and reports a split
//! when the answer depends on how a variable is later instantiated.

use std::convert::Infallible;

use crate::term::{Term, CONS, NIL, SUCC, ZERO};

pub trait Probe {
    type Stuck;

    /// Arguments of `t` if its principal functor is `name/arity`.
    fn functor<'t>(
        &self,
        t: &'t Term,
        name: &str,
        arity: usize,
    ) -> Result<Option<&'t [Term]>, Self::Stuck>;

    fn equal(&self, a: &Term, b: &Term) -> Result<bool, Self::Stuck>;

    /// Whether `t` has nesting depth at most `bound`.
    fn depth_at_most(&self, t: &Term, bound: u32) -> Result<bool, Self::Stuck>;
}

/// Plain syntactic inspection; never gets stuck.
#[derive(Clone, Copy, Debug, Default)]
pub struct Syntactic;

impl Probe for Syntactic {
    type Stuck = Infallible;

    fn functor<'t>(
        &self,
        t: &'t Term,
        name: &str,
        arity: usize,
    ) -> Result<Option<&'t [Term]>, Infallible> {
        Ok(match t {
            Term::App(f, args) if &**f == name && args.len() == arity => Some(args),
            _ => None,
        })
    }

    fn equal(&self, a: &Term, b: &Term) -> Result<bool, Infallible> {
        Ok(a == b)
    }

    fn depth_at_most(&self, t: &Term, bound: u32) -> Result<bool, Infallible> {
        Ok(t.depth() <= bound as usize)
    }
}

pub fn infallible<T>(r: Result<T, Infallible>) -> T {
    match r {
        Ok(v) => v,
        Err(never) => match never {},
    }
}

pub fn cons_cell<'t, P: Probe>(
    p: &P,
    t: &'t Term,
) -> Result<Option<(&'t Term, &'t Term)>, P::Stuck> {
    Ok(p.functor(t, CONS, 2)?.map(|a| (&a[0], &a[1])))
}

pub fn numeral_value<P: Probe>(p: &P, t: &Term) -> Result<Option<u64>, P::Stuck> {
    let mut n = 0u64;
    let mut cur = t;
    loop {
        if p.functor(cur, ZERO, 0)?.is_some() {
            return Ok(Some(n));
        }
        match p.functor(cur, SUCC, 1)? {
            Some(args) => {
                n += 1;
                cur = &args[0];
            }
            None => return Ok(None),
        }
    }
}

/// The k-th member (1-based) of a cons chain, if the chain reaches that far.
pub fn kth_member<P: Probe>(p: &P, t: &Term, k: usize) -> Result<Option<Term>, P::Stuck> {
    if k == 0 {
        return Ok(None);
    }
    let mut cur = t;
    for _ in 1..k {
        match cons_cell(p, cur)? {
            Some((_, tail)) => cur = tail,
            None => return Ok(None),
        }
    }
    Ok(cons_cell(p, cur)?.map(|(h, _)| h.clone()))
}

/// All members of a cons chain in order.
pub fn members<P: Probe>(p: &P, t: &Term) -> Result<Vec<Term>, P::Stuck> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Some((h, tail)) = cons_cell(p, cur)? {
        out.push(h.clone());
        cur = tail;
    }
    Ok(out)
}

/// Length of a proper list, `None` if the spine does not end in `nil`.
pub fn list_length<P: Probe>(p: &P, t: &Term) -> Result<Option<usize>, P::Stuck> {
    let mut n = 0;
    let mut cur = t;
    while let Some((_, tail)) = cons_cell(p, cur)? {
        n += 1;
        cur = tail;
    }
    Ok(p.functor(cur, NIL, 0)?.map(|_| n))
}

pub fn distinct_members<P: Probe>(p: &P, t: &Term) -> Result<bool, P::Stuck> {
    if list_length(p, t)?.is_none() {
        return Ok(false);
    }
    let items = members(p, t)?;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            if p.equal(&items[i], &items[j])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Generalized membership: `e` is the k-th member of `t` for some k.
pub fn is_member<P: Probe>(p: &P, t: &Term, e: &Term) -> Result<bool, P::Stuck> {
    Ok(position(p, t, e)?.is_some())
}

/// Smallest k such that `e` is the k-th member of `t`.
pub fn position<P: Probe>(p: &P, t: &Term, e: &Term) -> Result<Option<usize>, P::Stuck> {
    let mut cur = t;
    let mut k = 1;
    while let Some((h, tail)) = cons_cell(p, cur)? {
        if p.equal(h, e)? {
            return Ok(Some(k));
        }
        k += 1;
        cur = tail;
    }
    Ok(None)
}

/// `|[h|t]| = 1 + |t|`, `|s(t)| = 1 + |t|`, every other term has size 0.
pub fn term_size<P: Probe>(p: &P, t: &Term) -> Result<u64, P::Stuck> {
    let mut n = 0;
    let mut cur = t;
    loop {
        if let Some((_, tail)) = cons_cell(p, cur)? {
            n += 1;
            cur = tail;
        } else if let Some(args) = p.functor(cur, SUCC, 1)? {
            n += 1;
            cur = &args[0];
        } else {
            return Ok(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Var;

    #[test]
    fn term_size_follows_spines() {
        let s = Syntactic;
        let n = Term::numeral;
        assert_eq!(infallible(term_size(&s, &n(4))), 4);
        assert_eq!(infallible(term_size(&s, &Term::list([n(1), n(2)]))), 2);
        assert_eq!(infallible(term_size(&s, &Term::cons(n(0), n(0)))), 1);
        // s([a]) mixes both spines
        let mixed = Term::app("s", vec![Term::list([Term::constant("a")])]);
        assert_eq!(infallible(term_size(&s, &mixed)), 2);
        assert_eq!(infallible(term_size(&s, &Term::Var(Var::fresh()))), 0);
    }

    #[test]
    fn positions() {
        let s = Syntactic;
        let n = Term::numeral;
        let t = Term::list([n(3), n(1), n(1)]);
        assert_eq!(infallible(position(&s, &t, &n(1))), Some(2));
        assert_eq!(infallible(position(&s, &t, &n(2))), None);
        assert!(infallible(is_member(&s, &t, &n(3))));
    }
}
