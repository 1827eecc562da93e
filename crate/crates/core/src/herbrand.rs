//! Finite slices of the Herbrand universe and base, and bottom-up evaluation
//! over them.
//!
//! The base of depth `d` is the set of ground atoms whose arguments all have
//! depth at most `d`. The explicit routines here materialize terms and atoms
//! and are only usable at small bounds; [`symbolic_fixpoint`] computes the
//! same least fixpoint as a finite set of non-ground facts with depth budgets.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::parse::parse_atom;
use crate::refine::Cell;
use crate::subst::Substitution;
use crate::term::{Atom, Clause, Program, Signature, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepthBound {
    pub max_term_depth: u32,
}

impl DepthBound {
    pub fn new(max_term_depth: u32) -> DepthBound {
        DepthBound { max_term_depth }
    }
}

/// Ground terms of exactly depth `k`, for `k = 0..=d`, in enumeration order.
fn layers(sig: &Signature, d: u32) -> Vec<Vec<Term>> {
    let mut layers: Vec<Vec<Term>> = Vec::new();
    let mut upto: Vec<Term> = Vec::new();
    let mut depth_of: HashMap<Term, u32> = HashMap::new();
    for k in 0..=d {
        let mut layer = Vec::new();
        for (name, arity) in sig.symbols() {
            if arity == 0 {
                if k == 0 {
                    layer.push(Term::app_sym(name.clone(), Vec::new()));
                }
                continue;
            }
            if k == 0 {
                continue;
            }
            // odometer over argument tuples from `upto`, keeping those whose
            // deepest argument sits at depth k-1
            let mut idx = vec![0usize; arity];
            'tuples: loop {
                let args: Vec<Term> = idx.iter().map(|&i| upto[i].clone()).collect();
                if args.iter().any(|a| depth_of[a] == k - 1) {
                    layer.push(Term::app_sym(name.clone(), args));
                }
                for pos in (0..arity).rev() {
                    idx[pos] += 1;
                    if idx[pos] < upto.len() {
                        continue 'tuples;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        for t in &layer {
            depth_of.insert(t.clone(), k);
        }
        upto.extend(layer.iter().cloned());
        layers.push(layer);
    }
    layers
}

/// All ground terms of depth at most `d`: by depth, then by functor name,
/// then lexicographically by argument position in this same order.
pub fn enumerate_terms(sig: &Signature, d: DepthBound) -> impl Iterator<Item = Term> {
    layers(sig, d.max_term_depth).into_iter().flatten()
}

/// Number of ground terms of depth at most `d`, by the recurrence
/// `|U_0| = #constants`, `|U_k| = #constants + sum_f |U_(k-1)|^arity(f)`.
pub fn count_terms(sig: &Signature, d: DepthBound) -> u128 {
    let consts = sig.constants().len() as u128;
    let mut u = consts;
    for _ in 0..d.max_term_depth {
        let mut next = consts;
        for (_, arity) in sig.compounds() {
            next = next.saturating_add(u.saturating_pow(arity as u32));
        }
        u = next;
    }
    u
}

/// Depth budgets making every argument of every atom have depth at most `d`.
/// `None` if some skeleton is already deeper.
pub fn slice_budgets<'a>(
    atoms: impl IntoIterator<Item = &'a Atom>,
    d: DepthBound,
) -> Option<BTreeMap<Var, u32>> {
    fn go(t: &Term, b: u32, out: &mut BTreeMap<Var, u32>) -> bool {
        match t {
            Term::Var(v) => {
                out.entry(v.clone())
                    .and_modify(|x| *x = (*x).min(b))
                    .or_insert(b);
                true
            }
            Term::App(_, args) if args.is_empty() => true,
            Term::App(_, args) => b > 0 && args.iter().all(|a| go(a, b - 1, out)),
        }
    }
    let mut out = BTreeMap::new();
    for a in atoms {
        for t in a.args.iter() {
            if !go(t, d.max_term_depth, &mut out) {
                return None;
            }
        }
    }
    Some(out)
}

/// Lazily enumerated ground instances of one clause.
pub struct GroundInstances {
    clause: Clause,
    vars: Vec<Var>,
    domains: Vec<Arc<[Term]>>,
    idx: Option<Vec<usize>>,
    blowup: bool,
}

impl GroundInstances {
    /// Set when the clause has more than six variables at depth two or more.
    pub fn blowup_warning(&self) -> bool {
        self.blowup
    }
}

impl Iterator for GroundInstances {
    type Item = Clause;

    fn next(&mut self) -> Option<Clause> {
        let idx = self.idx.as_mut()?;
        let sigma = Substitution::from_pairs(
            self.vars
                .iter()
                .zip(idx.iter())
                .zip(self.domains.iter())
                .map(|((v, &i), dom)| (v.clone(), dom[i].clone())),
        );
        let out = sigma.apply_clause(&self.clause);
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                self.idx = None;
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < self.domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
        Some(out)
    }
}

/// Ground instances of `c` lying in the depth-`d` slice: every argument of
/// every atom has depth at most `d`.
pub fn enumerate_ground_instances(c: &Clause, sig: &Signature, d: DepthBound) -> GroundInstances {
    let budgets = slice_budgets(c.atoms(), d);
    let layers = layers(sig, d.max_term_depth);
    let mut by_budget: Vec<Arc<[Term]>> = Vec::new();
    let mut acc = Vec::new();
    for layer in &layers {
        acc.extend(layer.iter().cloned());
        by_budget.push(acc.clone().into());
    }
    let (vars, domains): (Vec<Var>, Vec<Arc<[Term]>>) = match &budgets {
        Some(b) => b
            .iter()
            .map(|(v, &k)| (v.clone(), by_budget[k as usize].clone()))
            .unzip(),
        None => (Vec::new(), Vec::new()),
    };
    let blowup = vars.len() > 6 && d.max_term_depth >= 2;
    GroundInstances {
        clause: c.clone(),
        idx: budgets.map(|_| vec![0; vars.len()]),
        vars,
        domains,
        blowup,
    }
}

/// A finite set of ground atoms.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct GroundAtomSet {
    atoms: HashSet<Atom>,
}

impl GroundAtomSet {
    pub fn new() -> GroundAtomSet {
        GroundAtomSet::default()
    }

    pub fn insert(&mut self, a: Atom) -> bool {
        debug_assert!(a.is_ground());
        self.atoms.insert(a)
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn is_subset(&self, other: &GroundAtomSet) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    /// Canonically printed atoms, sorted, one per line.
    pub fn to_text(&self) -> String {
        let lines: BTreeSet<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        let mut out = String::new();
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    }

    pub fn from_text(
        text: &str,
        sig: &Signature,
    ) -> Result<GroundAtomSet, crate::parse::ParseError> {
        let mut set = GroundAtomSet::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            set.insert(parse_atom(line, sig)?);
        }
        Ok(set)
    }
}

impl FromIterator<Atom> for GroundAtomSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        GroundAtomSet {
            atoms: iter.into_iter().collect(),
        }
    }
}

impl fmt::Debug for GroundAtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// The depth-`d` Herbrand base over a signature, as a membership test.
#[derive(Clone, Debug)]
pub struct DepthBase {
    pub sig: Arc<Signature>,
    pub depth: DepthBound,
}

impl DepthBase {
    pub fn new(sig: Arc<Signature>, depth: DepthBound) -> DepthBase {
        DepthBase { sig, depth }
    }

    pub fn contains(&self, a: &Atom) -> bool {
        a.is_ground()
            && a.args
                .iter()
                .all(|t| t.depth() <= self.depth.max_term_depth as usize && self.sig.admits(t))
    }
}

fn match_into(p: &Term, g: &Term, sigma: &mut Substitution) -> bool {
    match (p, g) {
        (Term::Var(v), _) => match sigma.get(v) {
            Some(t) => t == g,
            None => {
                sigma.bind(v.clone(), g.clone());
                true
            }
        },
        (Term::App(f, fa), Term::App(h, ga)) => {
            f == h
                && fa.len() == ga.len()
                && fa
                    .iter()
                    .zip(ga.iter())
                    .all(|(x, y)| match_into(x, y, sigma))
        }
        _ => false,
    }
}

fn match_atom(p: &Atom, g: &Atom, sigma: &Substitution) -> Option<Substitution> {
    if p.pred != g.pred || p.arity() != g.arity() {
        return None;
    }
    let mut s = sigma.clone();
    p.args
        .iter()
        .zip(g.args.iter())
        .all(|(x, y)| match_into(x, y, &mut s))
        .then_some(s)
}

/// `s` plus every head in `base` of a ground clause instance whose body
/// atoms all lie in `s`.
pub fn tp_step(p: &Program, s: &GroundAtomSet, base: &DepthBase) -> GroundAtomSet {
    let mut out = s.clone();
    let mut by_pred: HashMap<(&str, usize), Vec<&Atom>> = HashMap::new();
    for a in s.iter() {
        by_pred.entry((&a.pred, a.arity())).or_default().push(a);
    }
    for c in &p.clauses {
        let mut partial = vec![Substitution::new()];
        for b in &c.body {
            let cands = by_pred
                .get(&(&*b.pred, b.arity()))
                .map(|v| &v[..])
                .unwrap_or(&[]);
            partial = partial
                .iter()
                .flat_map(|sigma| cands.iter().filter_map(move |g| match_atom(b, g, sigma)))
                .collect();
            if partial.is_empty() {
                break;
            }
        }
        for sigma in partial {
            let head = sigma.apply_atom(&c.head);
            if head.is_ground() {
                if base.contains(&head) {
                    out.insert(head);
                }
                continue;
            }
            // head-only variables range over the base
            let unit = Clause::fact(head);
            for g in enumerate_ground_instances(&unit, &base.sig, base.depth) {
                out.insert(g.head);
            }
        }
    }
    out
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("fixpoint exceeded {cap} atoms after {rounds} rounds")]
pub struct FixpointCapped {
    pub cap: usize,
    pub rounds: usize,
    pub partial: GroundAtomSet,
}

/// Least fixpoint of [`tp_step`] on the depth-`d` base. An under-approximation
/// of the least Herbrand model restricted to the base: derivations that pass
/// through deeper atoms are cut.
pub fn tp_fixpoint(
    p: &Program,
    sig: &Signature,
    d: DepthBound,
    cap: usize,
) -> Result<GroundAtomSet, FixpointCapped> {
    let base = DepthBase::new(Arc::new(sig.clone()), d);
    let mut cur = GroundAtomSet::new();
    let mut rounds = 0;
    loop {
        let next = tp_step(p, &cur, &base);
        rounds += 1;
        if next.len() > cap {
            return Err(FixpointCapped {
                cap,
                rounds,
                partial: next,
            });
        }
        if next.len() == cur.len() {
            return Ok(cur);
        }
        cur = next;
    }
}

/// A finite union of plain cells: each fact stands for all instances of its
/// atom with variables within their depth budgets.
#[derive(Clone, Debug, Default)]
pub struct FactSet {
    facts: Vec<Cell>,
}

impl FactSet {
    pub fn facts(&self) -> &[Cell] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    fn subsumed(&self, c: &Cell) -> bool {
        self.facts.iter().any(|f| subsumes(f, c))
    }

    /// Whether the ground atom is an instance of some fact.
    pub fn contains_ground(&self, a: &Atom) -> bool {
        self.facts.iter().any(|f| {
            match_atom(&f.roots()[0], a, &Substitution::new()).is_some_and(|s| {
                s.iter()
                    .all(|(v, t)| t.depth() <= f.budget(v).unwrap_or(0) as usize)
            })
        })
    }

    /// All ground atoms denoted. Only for small bounds.
    pub fn ground_atoms(&self) -> GroundAtomSet {
        let mut out = GroundAtomSet::new();
        for f in &self.facts {
            let sig = f.signature();
            let max = f.budgets().map(|(_, b)| b).max().unwrap_or(0);
            let layers = layers(sig, max);
            let mut upto: Vec<Vec<Term>> = Vec::new();
            let mut acc = Vec::new();
            for l in &layers {
                acc.extend(l.iter().cloned());
                upto.push(acc.clone());
            }
            let vars: Vec<(Var, u32)> = f.budgets().map(|(v, b)| (v.clone(), b)).collect();
            let mut idx = vec![0usize; vars.len()];
            'outer: loop {
                let sigma = Substitution::from_pairs(
                    vars.iter()
                        .zip(idx.iter())
                        .map(|((v, b), &i)| (v.clone(), upto[*b as usize][i].clone())),
                );
                out.insert(sigma.apply_atom(&f.roots()[0]));
                for pos in (0..idx.len()).rev() {
                    idx[pos] += 1;
                    if idx[pos] < upto[vars[pos].1 as usize].len() {
                        continue 'outer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        out
    }
}

/// Every instance of `small` is an instance of `big`.
fn subsumes(big: &Cell, small: &Cell) -> bool {
    let Some(sigma) = match_atom(&big.roots()[0], &small.roots()[0], &Substitution::new()) else {
        return false;
    };
    big.budgets().all(|(v, b)| match sigma.get(v) {
        Some(t) => small.max_depth(t) <= b,
        None => true,
    })
}

/// Least fixpoint of the immediate-consequence operator on the depth-`d`
/// base, as non-ground facts. Denotes exactly the atoms of [`tp_fixpoint`].
pub fn symbolic_fixpoint(
    p: &Program,
    sig: &Arc<Signature>,
    d: DepthBound,
    max_facts: usize,
) -> Result<FactSet, FactSet> {
    let skeletons: Vec<(usize, Cell)> = p
        .clauses
        .iter()
        .filter_map(|c| {
            let mut roots = vec![c.head.clone()];
            roots.extend(c.body.iter().cloned());
            Cell::slice(sig.clone(), roots, d.max_term_depth).map(|cell| (c.body.len(), cell))
        })
        .collect();
    let mut facts = FactSet::default();
    loop {
        let mut added = false;
        for (nbody, skel) in &skeletons {
            let mut partial = vec![skel.renamed()];
            for i in 0..*nbody {
                let mut next = Vec::new();
                for cell in &partial {
                    for f in &facts.facts {
                        let joined = cell.join(&f.renamed());
                        let j = joined.roots().len() - 1;
                        if let Some(u) = joined.unify_roots(1 + i, j) {
                            next.push(u.project(j));
                        }
                    }
                }
                partial = next;
            }
            for cell in partial {
                let head = cell.project(1);
                if !facts.subsumed(&head) {
                    facts.facts.retain(|f| !subsumes(&head, f));
                    facts.facts.push(head);
                    added = true;
                    if facts.len() > max_facts {
                        return Err(facts);
                    }
                }
            }
        }
        if !added {
            return Ok(facts);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;

    #[test]
    fn constants_at_depth_zero() {
        let sig = Signature::default_queens();
        let got: Vec<String> = enumerate_terms(&sig, DepthBound::new(0))
            .map(|t| t.to_string())
            .collect();
        assert_eq!(got, ["0", "a", "b", "c", "d", "e", "f", "[]"]);
    }

    #[test]
    fn minimal_counts() {
        let sig = Signature::minimal();
        let n1 = enumerate_terms(&sig, DepthBound::new(1)).count();
        assert_eq!(n1, 8);
        for d in 0..=3 {
            let n = enumerate_terms(&sig, DepthBound::new(d)).count() as u128;
            assert_eq!(n, count_terms(&sig, DepthBound::new(d)));
        }
        let all: HashSet<Term> = enumerate_terms(&sig, DepthBound::new(2)).collect();
        assert_eq!(all.len() as u128, count_terms(&sig, DepthBound::new(2)));
    }

    #[test]
    fn depth_one_members() {
        let sig = Signature::default_queens();
        let all: Vec<Term> = enumerate_terms(&sig, DepthBound::new(1)).collect();
        assert!(all.contains(&Term::numeral(1)));
        assert!(all.contains(&Term::list([Term::numeral(0)])));
        assert!(all.contains(&Term::cons(Term::constant("a"), Term::constant("b"))));
        assert!(all.iter().all(|t| t.depth() <= 1));
    }

    #[test]
    fn ground_instance_counts() {
        let sig = Signature::default_queens();
        let p = crate::queens::nqueens_program();
        let c1 = &p.clauses[0];
        assert_eq!(
            enumerate_ground_instances(c1, &sig, DepthBound::new(0)).count(),
            512
        );
        let c3 = &p.clauses[2];
        assert_eq!(
            enumerate_ground_instances(c3, &sig, DepthBound::new(0)).count(),
            0
        );
        assert!(enumerate_ground_instances(c3, &sig, DepthBound::new(1)).count() > 0);
        let g = parse_program("p(0, [a]).", &sig).unwrap();
        let inst: Vec<Clause> =
            enumerate_ground_instances(&g.clauses[0], &sig, DepthBound::new(1)).collect();
        assert_eq!(inst, vec![g.clauses[0].clone()]);
    }

    #[test]
    fn step_from_empty() {
        let sig = Arc::new(Signature::minimal());
        let p = crate::queens::nqueens_program();
        let base = DepthBase::new(sig.clone(), DepthBound::new(1));
        let one = tp_step(&p, &GroundAtomSet::new(), &base);
        // clause (1): 8^3 atoms; clause (3): I at depth 0 and tails of depth 0
        let zero_row = one.iter().filter(|a| &*a.pred == "pqs").count();
        assert_eq!(zero_row, 512);
        let pq = one.iter().filter(|a| &*a.pred == "pq").count();
        assert_eq!(pq, 2 * 2 * 2 * 2);
        let again = tp_step(&p, &one, &base);
        assert!(one.is_subset(&again));
    }

    #[test]
    fn empty_program_fixpoint() {
        let sig = Signature::minimal();
        let fp = tp_fixpoint(&Program::new(vec![]), &sig, DepthBound::new(2), 1000).unwrap();
        assert!(fp.is_empty());
    }

    #[test]
    fn symbolic_matches_explicit_on_small_bases() {
        let sig = Arc::new(Signature::minimal());
        let nq = crate::queens::nqueens_program();
        let programs = [
            nq.fragment(&["pq"]),
            parse_program(
                "nat(0).\nnat(s(X)) :- nat(X).\nev(0).\nev(s(s(X))) :- ev(X).",
                &sig,
            )
            .unwrap(),
            parse_program(
                "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).",
                &sig,
            )
            .unwrap(),
        ];
        for p in &programs {
            for d in 0..=2 {
                let d = DepthBound::new(d);
                let explicit = tp_fixpoint(p, &sig, d, 2_000_000).unwrap();
                let symbolic = symbolic_fixpoint(p, &sig, d, 10_000).unwrap();
                assert_eq!(symbolic.ground_atoms(), explicit, "program {p} at {d:?}");
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let sig = Signature::minimal();
        let fp = tp_fixpoint(
            &crate::queens::nqueens_program().fragment(&["pq"]),
            &sig,
            DepthBound::new(1),
            10_000,
        )
        .unwrap();
        let text = fp.to_text();
        let back = GroundAtomSet::from_text(&text, &sig).unwrap();
        assert_eq!(back, fp);
        let lines: Vec<&str> = text.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
    }
}
