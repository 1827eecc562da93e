//! Exact search over depth-bounded ground instances by lazy refinement.
//!
//! A [`Cell`] stands for the set of all ground instances of its root atoms
//! in which every variable `X` is replaced by a term of depth at most its
//! budget whose principal symbol is not excluded for `X`, subject to a list
//! of disequalities. Predicates written against [`Probe`] are evaluated on a
//! cell directly. When an answer depends on how a variable is instantiated
//! the probe returns a [`Split`], and [`search`] continues with the children,
//! which partition the parent. A cell on which the formula is decided is
//! never looked at again, so the search visits far fewer cells than there
//! are ground instances while still covering all of them.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::probe::Probe;
use crate::subst::Substitution;
use crate::term::{Atom, Signature, Sym, Term, Var};
use crate::unify::{mgu, UnifyOptions};

#[derive(Clone, Debug, PartialEq, Eq)]
struct VarInfo {
    budget: u32,
    excluded: Vec<Sym>,
}

impl VarInfo {
    fn new(budget: u32) -> VarInfo {
        VarInfo {
            budget,
            excluded: Vec::new(),
        }
    }

    fn allows(&self, name: &str, arity: usize) -> bool {
        (arity == 0 || self.budget > 0) && !self.excluded.iter().any(|e| &**e == name)
    }
}

/// Why a cell could not decide a question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Split {
    /// Case on whether the variable has principal symbol `name/arity`.
    Functor { var: Var, name: Sym, arity: usize },
    /// Case on whether the two terms are equal.
    Equal(Term, Term),
}

#[derive(Clone, Debug)]
pub struct Cell {
    sig: Arc<Signature>,
    roots: Vec<Atom>,
    vars: BTreeMap<Var, VarInfo>,
    diseqs: Vec<(Term, Term)>,
}

impl Cell {
    /// All ground instances of `roots` with every variable at depth at most
    /// its given budget. Every variable of `roots` needs a budget.
    pub fn new(
        sig: Arc<Signature>,
        roots: Vec<Atom>,
        budgets: impl IntoIterator<Item = (Var, u32)>,
    ) -> Option<Cell> {
        let vars: BTreeMap<Var, VarInfo> = budgets
            .into_iter()
            .map(|(v, b)| (v, VarInfo::new(b)))
            .collect();
        for a in &roots {
            for v in a.vars() {
                assert!(vars.contains_key(&v), "variable {v} has no budget");
            }
        }
        let cell = Cell {
            sig,
            roots,
            vars,
            diseqs: Vec::new(),
        };
        cell.domains_nonempty().then_some(cell)
    }

    /// Ground instances of `roots` in which every argument of every atom has
    /// depth at most `d`. `None` if there are none.
    pub fn slice(sig: Arc<Signature>, roots: Vec<Atom>, d: u32) -> Option<Cell> {
        let mut vars = BTreeMap::new();
        for a in &roots {
            for t in a.args.iter() {
                if !constrain(&mut vars, t, d) {
                    return None;
                }
            }
        }
        let cell = Cell {
            sig,
            roots,
            vars,
            diseqs: Vec::new(),
        };
        cell.domains_nonempty().then_some(cell)
    }

    pub fn roots(&self) -> &[Atom] {
        &self.roots
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn budget(&self, v: &Var) -> Option<u32> {
        self.vars.get(v).map(|i| i.budget)
    }

    /// Open variables with their depth budgets.
    pub fn budgets(&self) -> impl Iterator<Item = (&Var, u32)> {
        self.vars.iter().map(|(v, i)| (v, i.budget))
    }

    pub fn is_ground(&self) -> bool {
        self.vars.is_empty()
    }

    /// Whether the cell carries only depth budgets, so that it is exactly
    /// the set of budget-respecting instances of its roots.
    pub fn is_plain(&self) -> bool {
        self.diseqs.is_empty() && self.vars.values().all(|i| i.excluded.is_empty())
    }

    fn domains_nonempty(&self) -> bool {
        self.vars.values().all(|info| {
            self.sig
                .symbols()
                .any(|(name, arity)| info.allows(name, arity))
        })
    }

    /// Constraint store after applying `sigma`, or `None` if some variable
    /// is left without admissible values.
    fn constrained_vars(
        &self,
        sigma: &Substitution,
        extra: &BTreeMap<Var, VarInfo>,
    ) -> Option<BTreeMap<Var, VarInfo>> {
        let mut vars = self.vars.clone();
        vars.extend(extra.iter().map(|(v, i)| (v.clone(), i.clone())));
        let mut pending = Vec::new();
        for (x, _) in sigma.iter() {
            if let Some(info) = vars.remove(x) {
                pending.push((x.clone(), info));
            }
        }
        for (x, info) in pending {
            let t = sigma.get(&x).expect("domain variable");
            match t {
                Term::App(f, args) => {
                    if !info.allows(f, args.len()) {
                        return None;
                    }
                }
                Term::Var(y) => {
                    let entry = vars
                        .entry(y.clone())
                        .or_insert_with(|| VarInfo::new(info.budget));
                    for e in &info.excluded {
                        if !entry.excluded.contains(e) {
                            entry.excluded.push(e.clone());
                        }
                    }
                    entry.excluded.sort();
                }
            }
            if !constrain(&mut vars, t, info.budget) {
                return None;
            }
        }
        let ok = vars.values().all(|info| {
            self.sig
                .symbols()
                .any(|(name, arity)| info.allows(name, arity))
        });
        ok.then_some(vars)
    }

    /// Most general unifier of `a` and `b` that respects budgets and
    /// excluded symbols, ignoring disequalities.
    fn try_unify(&self, a: &Term, b: &Term) -> Option<(Substitution, BTreeMap<Var, VarInfo>)> {
        let sigma = mgu(a, b, UnifyOptions::default())?;
        let vars = self.constrained_vars(&sigma, &BTreeMap::new())?;
        Some((sigma, vars))
    }

    fn bind(&self, sigma: &Substitution, extra: BTreeMap<Var, VarInfo>) -> Option<Cell> {
        let vars = self.constrained_vars(sigma, &extra)?;
        let mut cell = Cell {
            sig: self.sig.clone(),
            roots: self.roots.iter().map(|a| sigma.apply_atom(a)).collect(),
            vars,
            diseqs: Vec::new(),
        };
        let mut diseqs = Vec::with_capacity(self.diseqs.len());
        for (u, v) in &self.diseqs {
            let (u, v) = (sigma.apply(u), sigma.apply(v));
            if u == v {
                return None;
            }
            if cell.try_unify(&u, &v).is_some() {
                diseqs.push((u, v));
            }
        }
        cell.diseqs = diseqs;
        Some(cell)
    }

    /// Child where `var` has principal symbol `name/arity`.
    fn bind_functor(&self, var: &Var, name: &Sym, arity: usize) -> Option<Cell> {
        let info = self.vars.get(var)?;
        if !info.allows(name, arity) {
            return None;
        }
        let child_budget = info.budget.saturating_sub(1);
        let fresh: Vec<Var> = (0..arity).map(|_| Var::fresh()).collect();
        let extra = fresh
            .iter()
            .map(|v| (v.clone(), VarInfo::new(child_budget)))
            .collect();
        let t = Term::app_sym(name.clone(), fresh.into_iter().map(Term::Var).collect());
        self.bind(&Substitution::from_pairs([(var.clone(), t)]), extra)
    }

    /// Child where `var` does not have principal symbol `name`.
    fn exclude_functor(&self, var: &Var, name: &Sym) -> Option<Cell> {
        let mut cell = self.clone();
        let info = cell.vars.get_mut(var)?;
        if !info.excluded.contains(name) {
            info.excluded.push(name.clone());
            info.excluded.sort();
        }
        cell.domains_nonempty().then_some(cell)
    }

    /// The nonempty children of a split, in search order.
    pub fn refine(&self, split: &Split) -> Vec<Cell> {
        match split {
            Split::Functor { var, name, arity } => [
                self.bind_functor(var, name, *arity),
                self.exclude_functor(var, name),
            ]
            .into_iter()
            .flatten()
            .collect(),
            Split::Equal(a, b) => {
                let mut out = Vec::with_capacity(2);
                if let Some(sigma) = mgu(a, b, UnifyOptions::default()) {
                    out.extend(self.bind(&sigma, BTreeMap::new()));
                }
                let mut apart = self.clone();
                apart.diseqs.push((a.clone(), b.clone()));
                out.push(apart);
                out
            }
        }
    }

    /// Some ground instance in the cell, choosing the smallest symbols first.
    pub fn ground_witness(&self) -> Option<Vec<Atom>> {
        let Some((var, info)) = self.vars.iter().next() else {
            return Some(self.roots.clone());
        };
        let sig = self.sig.clone();
        let mut order: Vec<(&Sym, usize)> = sig.symbols().filter(|(_, a)| *a == 0).collect();
        order.extend(sig.symbols().filter(|(_, a)| *a > 0));
        for (name, arity) in order {
            if !info.allows(name, arity) {
                continue;
            }
            if let Some(child) = self.bind_functor(var, name, arity) {
                if let Some(w) = child.ground_witness() {
                    return Some(w);
                }
            }
        }
        None
    }

    /// Copy with every variable replaced by a fresh one.
    pub fn renamed(&self) -> Cell {
        let sigma = Substitution::renaming(&self.vars.keys().cloned().collect::<Vec<_>>());
        let fresh = |v: &Var| match sigma.get(v) {
            Some(Term::Var(w)) => w.clone(),
            _ => v.clone(),
        };
        Cell {
            sig: self.sig.clone(),
            roots: self.roots.iter().map(|a| sigma.apply_atom(a)).collect(),
            vars: self
                .vars
                .iter()
                .map(|(v, i)| (fresh(v), i.clone()))
                .collect(),
            diseqs: self
                .diseqs
                .iter()
                .map(|(u, v)| (sigma.apply(u), sigma.apply(v)))
                .collect(),
        }
    }

    /// Conjunction of two cells over disjoint variables; roots are concatenated.
    pub fn join(&self, other: &Cell) -> Cell {
        debug_assert!(other.vars.keys().all(|v| !self.vars.contains_key(v)));
        let mut cell = self.clone();
        cell.roots.extend(other.roots.iter().cloned());
        cell.vars
            .extend(other.vars.iter().map(|(v, i)| (v.clone(), i.clone())));
        cell.diseqs.extend(other.diseqs.iter().cloned());
        cell
    }

    /// Restricts to instances where roots `i` and `j` coincide.
    pub fn unify_roots(&self, i: usize, j: usize) -> Option<Cell> {
        let (a, b) = (&self.roots[i], &self.roots[j]);
        if a.pred != b.pred || a.arity() != b.arity() {
            return None;
        }
        let sigma = mgu(&a.as_term(), &b.as_term(), UnifyOptions::default())?;
        self.bind(&sigma, BTreeMap::new())
    }

    /// Keeps the first `n` roots. Only meaningful on plain cells, where
    /// forgetting variables does not change the projected instance set.
    pub fn project(&self, n: usize) -> Cell {
        debug_assert!(self.is_plain());
        let roots: Vec<Atom> = self.roots[..n].to_vec();
        let keep: std::collections::BTreeSet<Var> = roots.iter().flat_map(|a| a.vars()).collect();
        Cell {
            sig: self.sig.clone(),
            vars: self
                .vars
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, i)| (v.clone(), i.clone()))
                .collect(),
            roots,
            diseqs: Vec::new(),
        }
    }

    /// Largest depth any instance of `t` can have.
    pub fn max_depth(&self, t: &Term) -> u32 {
        match t {
            Term::Var(v) => self.info(v).budget,
            Term::App(_, args) => args
                .iter()
                .map(|a| 1 + self.max_depth(a))
                .max()
                .unwrap_or(0),
        }
    }

    fn info(&self, v: &Var) -> &VarInfo {
        self.vars
            .get(v)
            .unwrap_or_else(|| panic!("variable {v} is not governed by this cell"))
    }
}

/// Lowers the budgets of the variables of `t` so that `t` has depth at most
/// `budget`. False if the skeleton of `t` is already too deep.
fn constrain(vars: &mut BTreeMap<Var, VarInfo>, t: &Term, budget: u32) -> bool {
    match t {
        Term::Var(v) => {
            vars.entry(v.clone())
                .and_modify(|i| i.budget = i.budget.min(budget))
                .or_insert_with(|| VarInfo::new(budget));
            true
        }
        Term::App(_, args) if args.is_empty() => true,
        Term::App(_, args) => budget > 0 && args.iter().all(|a| constrain(vars, a, budget - 1)),
    }
}

impl Probe for Cell {
    type Stuck = Split;

    fn functor<'t>(
        &self,
        t: &'t Term,
        name: &str,
        arity: usize,
    ) -> Result<Option<&'t [Term]>, Split> {
        match t {
            Term::App(f, args) => Ok((&**f == name && args.len() == arity).then_some(&args[..])),
            Term::Var(v) => {
                let info = self.info(v);
                if self.sig.arity(name) != Some(arity) || !info.allows(name, arity) {
                    return Ok(None);
                }
                Err(Split::Functor {
                    var: v.clone(),
                    name: name.into(),
                    arity,
                })
            }
        }
    }

    fn equal(&self, a: &Term, b: &Term) -> Result<bool, Split> {
        if a == b {
            return Ok(true);
        }
        let Some((sigma, _)) = self.try_unify(a, b) else {
            return Ok(false);
        };
        for (u, v) in &self.diseqs {
            if sigma.apply(u) == sigma.apply(v) {
                return Ok(false);
            }
        }
        Err(Split::Equal(a.clone(), b.clone()))
    }

    fn depth_at_most(&self, t: &Term, bound: u32) -> Result<bool, Split> {
        match t {
            Term::App(_, args) if args.is_empty() => Ok(true),
            Term::App(_, args) => {
                if bound == 0 {
                    return Ok(false);
                }
                for a in args.iter() {
                    if !self.depth_at_most(a, bound - 1)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Term::Var(v) => {
                let info = self.info(v);
                if info.budget <= bound {
                    return Ok(true);
                }
                match self
                    .sig
                    .compounds()
                    .into_iter()
                    .find(|(f, a)| info.allows(f, *a))
                {
                    None => Ok(true),
                    Some((name, arity)) => Err(Split::Functor {
                        var: v.clone(),
                        name,
                        arity,
                    }),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Cells examined before giving up.
    pub max_cells: u64,
    /// Stop after this many witnesses.
    pub max_witnesses: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_cells: 10_000_000,
            max_witnesses: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Ground instances of the roots on which the formula holds.
    pub witnesses: Vec<Vec<Atom>>,
    pub cells: u64,
    /// The cell limit was hit before the search space was exhausted.
    pub capped: bool,
}

impl SearchOutcome {
    pub fn found(&self) -> bool {
        !self.witnesses.is_empty()
    }

    /// Exhausted without a witness.
    pub fn refuted(&self) -> bool {
        self.witnesses.is_empty() && !self.capped
    }
}

/// Depth-first search for ground instances of `start` satisfying `formula`.
///
/// Cells on which the formula is decided true contribute one witness each,
/// provided they contain a ground instance at all.
pub fn search<F>(start: Cell, limits: SearchLimits, mut formula: F) -> SearchOutcome
where
    F: FnMut(&Cell) -> Result<bool, Split>,
{
    let mut out = SearchOutcome::default();
    let mut stack = vec![start];
    while let Some(cell) = stack.pop() {
        if out.cells >= limits.max_cells {
            out.capped = true;
            break;
        }
        out.cells += 1;
        match formula(&cell) {
            Ok(false) => {}
            Ok(true) => {
                if let Some(w) = cell.ground_witness() {
                    out.witnesses.push(w);
                    if out.witnesses.len() >= limits.max_witnesses {
                        break;
                    }
                }
            }
            Err(split) => {
                let mut kids = cell.refine(&split);
                kids.reverse();
                stack.extend(kids);
            }
        }
    }
    out
}
