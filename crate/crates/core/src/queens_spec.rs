//! Specifications of the n-queens program as decidable sets of atoms.
//!
//! A placement triple `(cs, us, ds)` describes queens on a board: queen `j`
//! sits in column `k` when `j` is the k-th member of `cs`. Relative to a
//! context row `i`, the queen has up-diagonal number `k + j - i` and
//! down-diagonal number `k + i - j`, and a positive number `l` says that `j`
//! is the l-th member of `us` (respectively `ds`).
//!
//! All predicates are generic over [`Probe`], so the same code decides
//! membership of ground atoms and drives the refinement search.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::probe::{
    cons_cell, distinct_members, infallible, is_member, kth_member, list_length, numeral_value,
    position, term_size, Probe, Syntactic,
};
use crate::term::{Atom, Term};

pub const PQS: &str = "pqs";
pub const PQ: &str = "pq";

pub fn up_diag_number(j: i64, k: i64, i: i64) -> i64 {
    k + j - i
}

pub fn down_diag_number(j: i64, k: i64, i: i64) -> i64 {
    k + i - j
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlacementTriple {
    pub cs: Term,
    pub us: Term,
    pub ds: Term,
}

impl PlacementTriple {
    pub fn new(cs: Term, us: Term, ds: Term) -> PlacementTriple {
        PlacementTriple { cs, us, ds }
    }
}

/// Whether the triple places queens `1..=m` correctly w.r.t. row `i`.
pub fn correct_up_to<P: Probe>(
    p: &P,
    t: &PlacementTriple,
    m: u64,
    i: u64,
) -> Result<bool, P::Stuck> {
    if m > i || list_length(p, &t.cs)?.is_none() {
        return Ok(false);
    }
    let mut cols = Vec::with_capacity(m as usize);
    for j in 1..=m {
        match position(p, &t.cs, &Term::numeral(j))? {
            Some(k) => cols.push((j as i64, k as i64)),
            None => return Ok(false),
        }
    }
    let i = i as i64;
    let ups: Vec<i64> = cols.iter().map(|&(j, k)| up_diag_number(j, k, i)).collect();
    let downs: Vec<i64> = cols
        .iter()
        .map(|&(j, k)| down_diag_number(j, k, i))
        .collect();
    if !pairwise_distinct(&ups) || !pairwise_distinct(&downs) {
        return Ok(false);
    }
    if !distinct_members(p, &t.cs)? {
        return Ok(false);
    }
    for (idx, &(j, _)) in cols.iter().enumerate() {
        let queen = Term::numeral(j as u64);
        for (l, list) in [(ups[idx], &t.us), (downs[idx], &t.ds)] {
            if l > 0 {
                match kth_member(p, list, l as usize)? {
                    Some(e) if p.equal(&e, &queen)? => {}
                    _ => return Ok(false),
                }
            }
        }
    }
    Ok(true)
}

fn pairwise_distinct(xs: &[i64]) -> bool {
    let set: HashSet<i64> = xs.iter().copied().collect();
    set.len() == xs.len()
}

fn args_of<'a>(a: &'a Atom, pred: &str) -> Option<&'a [Term]> {
    (&*a.pred == pred && a.arity() == 4).then_some(&a.args[..])
}

/// `pq(i, cs, us, ds)` with `i` the k-th member of all three lists for one k.
pub fn in_s_pq<P: Probe>(p: &P, a: &Atom) -> Result<bool, P::Stuck> {
    let Some(args) = args_of(a, PQ) else {
        return Ok(false);
    };
    let i = &args[0];
    let (mut c, mut u, mut d) = (&args[1], &args[2], &args[3]);
    loop {
        let Some((hc, tc)) = cons_cell(p, c)? else {
            return Ok(false);
        };
        let Some((hu, tu)) = cons_cell(p, u)? else {
            return Ok(false);
        };
        let Some((hd, td)) = cons_cell(p, d)? else {
            return Ok(false);
        };
        if p.equal(hc, i)? && p.equal(hu, i)? && p.equal(hd, i)? {
            return Ok(true);
        }
        (c, u, d) = (tc, tu, td);
    }
}

/// Row 0 with anything, or row `i > 0` with a nonempty fourth argument,
/// queens `1..=i` present, and a correct placement when the columns are
/// distinct.
pub fn in_s_pqs<P: Probe>(p: &P, a: &Atom) -> Result<bool, P::Stuck> {
    let Some(args) = args_of(a, PQS) else {
        return Ok(false);
    };
    let Some(i) = numeral_value(p, &args[0])? else {
        return Ok(false);
    };
    if i == 0 {
        return Ok(true);
    }
    let Some((_, ds)) = cons_cell(p, &args[3])? else {
        return Ok(false);
    };
    for j in 1..=i {
        if !is_member(p, &args[1], &Term::numeral(j))? {
            return Ok(false);
        }
    }
    if !distinct_members(p, &args[1])? {
        return Ok(true);
    }
    let t = PlacementTriple::new(args[1].clone(), args[2].clone(), ds.clone());
    correct_up_to(p, &t, i, i)
}

pub fn in_s<P: Probe>(p: &P, a: &Atom) -> Result<bool, P::Stuck> {
    if &*a.pred == PQ {
        in_s_pq(p, a)
    } else {
        in_s_pqs(p, a)
    }
}

/// `pqs(i, cs, us, [t|ds])` with `i > 0` and `(cs, us, ds)` correct up to `i`
/// w.r.t. `i`.
pub fn in_s0_pqs<P: Probe>(p: &P, a: &Atom) -> Result<bool, P::Stuck> {
    let Some(args) = args_of(a, PQS) else {
        return Ok(false);
    };
    let Some(i) = numeral_value(p, &args[0])? else {
        return Ok(false);
    };
    if i == 0 {
        return Ok(false);
    }
    let Some((_, ds)) = cons_cell(p, &args[3])? else {
        return Ok(false);
    };
    let t = PlacementTriple::new(args[1].clone(), args[2].clone(), ds.clone());
    correct_up_to(p, &t, i, i)
}

pub fn in_s0<P: Probe>(p: &P, a: &Atom) -> Result<bool, P::Stuck> {
    if &*a.pred == PQ {
        return in_s_pq(p, a);
    }
    match args_of(a, PQS) {
        None => Ok(false),
        Some(args) if p.functor(&args[0], crate::term::ZERO, 0)?.is_some() => Ok(true),
        Some(_) => in_s0_pqs(p, a),
    }
}

/// The named specifications, plus the empty and the full set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecSet {
    SPq,
    SPqs,
    S,
    S0Pqs,
    S0,
    Nothing,
    Everything,
}

impl SpecSet {
    pub const NAMED: [SpecSet; 5] = [
        SpecSet::SPq,
        SpecSet::SPqs,
        SpecSet::S,
        SpecSet::S0Pqs,
        SpecSet::S0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecSet::SPq => "s_pq",
            SpecSet::SPqs => "s_pqs",
            SpecSet::S => "s",
            SpecSet::S0Pqs => "s0_pqs",
            SpecSet::S0 => "s0",
            SpecSet::Nothing => "nothing",
            SpecSet::Everything => "everything",
        }
    }

    pub fn contains<P: Probe>(self, p: &P, a: &Atom) -> Result<bool, P::Stuck> {
        match self {
            SpecSet::SPq => in_s_pq(p, a),
            SpecSet::SPqs => in_s_pqs(p, a),
            SpecSet::S => in_s(p, a),
            SpecSet::S0Pqs => in_s0_pqs(p, a),
            SpecSet::S0 => in_s0(p, a),
            SpecSet::Nothing => Ok(false),
            SpecSet::Everything => Ok(true),
        }
    }

    /// Membership of a ground atom.
    pub fn holds(self, a: &Atom) -> bool {
        infallible(self.contains(&Syntactic, a))
    }

    /// Members of the set within the sample base, lazily and in a fixed
    /// order. `S_pq` and `S0_pqs` are generated directly, `S0` interleaves
    /// `S0_pqs`, `S_pq` and the zero row. The remaining sets filter the base.
    pub fn sample(self, bound: &SampleBound) -> Box<dyn Iterator<Item = Atom>> {
        match self {
            SpecSet::SPq => Box::new(bound.clone().s_pq()),
            SpecSet::S0Pqs => Box::new(bound.clone().s0_pqs()),
            SpecSet::S0 => {
                let zero = bound.clone().zero_row();
                Box::new(Interleave {
                    parts: vec![
                        Box::new(bound.clone().s0_pqs()),
                        Box::new(bound.clone().s_pq()),
                        Box::new(zero),
                    ],
                    next: 0,
                })
            }
            SpecSet::Nothing => Box::new(std::iter::empty()),
            _ => self.filter_sample(bound),
        }
    }

    /// Members of the set within the sample base, by filtering the base.
    pub fn filter_sample(self, bound: &SampleBound) -> Box<dyn Iterator<Item = Atom>> {
        Box::new(bound.base().filter(move |a| self.holds(a)))
    }
}

impl fmt::Display for SpecSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpecSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            SpecSet::SPq,
            SpecSet::SPqs,
            SpecSet::S,
            SpecSet::S0Pqs,
            SpecSet::S0,
            SpecSet::Nothing,
            SpecSet::Everything,
        ]
        .into_iter()
        .find(|x| x.name() == s)
        .ok_or_else(|| format!("unknown specification {s:?}"))
    }
}

/// Round-robin over several streams until all are exhausted.
struct Interleave {
    parts: Vec<Box<dyn Iterator<Item = Atom>>>,
    next: usize,
}

impl Iterator for Interleave {
    type Item = Atom;

    fn next(&mut self) -> Option<Atom> {
        while !self.parts.is_empty() {
            let idx = self.next % self.parts.len();
            match self.parts[idx].next() {
                Some(a) => {
                    self.next = idx + 1;
                    return Some(a);
                }
                None => {
                    drop(self.parts.remove(idx));
                    self.next = idx;
                }
            }
        }
        None
    }
}

/// A finite base of `pq/4` and `pqs/4` atoms for sampling.
///
/// The first argument ranges over the numerals `0..=max_row` and the
/// fillers. Every other argument is a list of length at most `max_len`
/// whose members are numerals `1..=max_row` or fillers, in which no numeral
/// occurs twice, ending in one of `tails`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleBound {
    pub max_row: u64,
    pub max_len: usize,
    pub fillers: Vec<Term>,
    pub tails: Vec<Term>,
}

impl SampleBound {
    pub fn new(max_row: u64, max_len: usize, fillers: Vec<Term>, tails: Vec<Term>) -> SampleBound {
        SampleBound {
            max_row,
            max_len,
            fillers,
            tails,
        }
    }

    fn members(&self) -> Vec<Term> {
        let mut m: Vec<Term> = (1..=self.max_row).map(Term::numeral).collect();
        m.extend(self.fillers.iter().cloned());
        m
    }

    fn rows(&self) -> Vec<Term> {
        let mut r: Vec<Term> = (0..=self.max_row).map(Term::numeral).collect();
        r.extend(self.fillers.iter().cloned());
        r
    }

    /// Lists of the base as member vectors, by length then member order.
    fn shapes(&self) -> Vec<Vec<Term>> {
        let members = self.members();
        let mut out = vec![Vec::new()];
        let mut frontier = vec![Vec::<Term>::new()];
        for _ in 0..self.max_len {
            let mut next = Vec::new();
            for prefix in &frontier {
                for m in &members {
                    if m.numeral_value().is_some() && prefix.contains(m) {
                        continue;
                    }
                    let mut v = prefix.clone();
                    v.push(m.clone());
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Every list argument of the base.
    pub fn lists(&self) -> Vec<Term> {
        let mut out = Vec::new();
        for shape in self.shapes() {
            for tail in &self.tails {
                out.push(Term::list_with_tail(shape.iter().cloned(), tail.clone()));
            }
        }
        out
    }

    /// Lists of the base with the given members at the given 1-based
    /// positions and at least `min_len` members.
    fn lists_with(&self, fixed: &BTreeMap<usize, Term>, min_len: usize) -> Vec<Term> {
        let members = self.members();
        let need = fixed.keys().next_back().copied().unwrap_or(0).max(min_len);
        let fixed_nums: Vec<&Term> = fixed
            .values()
            .filter(|t| t.numeral_value().is_some())
            .collect();
        let mut out = Vec::new();
        let mut frontier: Vec<Vec<Term>> = vec![Vec::new()];
        for len in 0..=self.max_len {
            if len >= need {
                for shape in &frontier {
                    for tail in &self.tails {
                        out.push(Term::list_with_tail(shape.iter().cloned(), tail.clone()));
                    }
                }
            }
            if len == self.max_len {
                break;
            }
            let choices: Vec<&Term> = match fixed.get(&(len + 1)) {
                Some(t) => vec![t],
                None => members.iter().filter(|m| !fixed_nums.contains(m)).collect(),
            };
            let mut next = Vec::new();
            for prefix in &frontier {
                for &m in &choices {
                    if m.numeral_value().is_some() && prefix.contains(m) {
                        continue;
                    }
                    let mut v = prefix.clone();
                    v.push(m.clone());
                    next.push(v);
                }
            }
            frontier = next;
        }
        out
    }

    /// All atoms of the base: `pq` first, then `pqs`.
    pub fn base(&self) -> impl Iterator<Item = Atom> {
        let lists = self.lists();
        let rows = self.rows();
        [PQ, PQS].into_iter().flat_map(move |pred| {
            let lists = lists.clone();
            rows.clone().into_iter().flat_map(move |i| {
                let lists = lists.clone();
                let n = lists.len();
                (0..n * n * n).map(move |idx| {
                    let (x, y, z) = (idx / (n * n), (idx / n) % n, idx % n);
                    Atom::new(
                        pred,
                        vec![
                            i.clone(),
                            lists[x].clone(),
                            lists[y].clone(),
                            lists[z].clone(),
                        ],
                    )
                })
            })
        })
    }

    /// `pqs(0, x, y, z)` for all base lists.
    fn zero_row(self) -> impl Iterator<Item = Atom> {
        let lists = self.lists();
        let n = lists.len();
        (0..n * n * n).map(move |idx| {
            let (x, y, z) = (idx / (n * n), (idx / n) % n, idx % n);
            Atom::new(
                PQS,
                vec![
                    Term::numeral(0),
                    lists[x].clone(),
                    lists[y].clone(),
                    lists[z].clone(),
                ],
            )
        })
    }

    /// `S_pq` on the base: for each row term and the first index `k` at which
    /// all three lists carry it.
    fn s_pq(self) -> impl Iterator<Item = Atom> {
        let members = self.members();
        let max_len = self.max_len;
        members.into_iter().flat_map(move |i| {
            let this = self.clone();
            (1..=max_len).flat_map(move |k| {
                let fixed = BTreeMap::from([(k, i.clone())]);
                let candidates = this.lists_with(&fixed, 0);
                let i = i.clone();
                let n = candidates.len();
                (0..n * n * n).filter_map(move |idx| {
                    let (x, y, z) = (idx / (n * n), (idx / n) % n, idx % n);
                    let (c, u, d) = (&candidates[x], &candidates[y], &candidates[z]);
                    let earlier = (1..k).any(|k2| {
                        [c, u, d]
                            .iter()
                            .all(|l| l.kth_member(k2).as_ref() == Some(&i))
                    });
                    (!earlier)
                        .then(|| Atom::new(PQ, vec![i.clone(), c.clone(), u.clone(), d.clone()]))
                })
            })
        })
    }

    /// `S0_pqs` on the base, by ascending row, then column list, then the
    /// diagonal lists.
    fn s0_pqs(self) -> impl Iterator<Item = Atom> {
        let shapes = self.shapes();
        let max_row = self.max_row;
        (1..=max_row).flat_map(move |i| {
            let this = self.clone();
            let placements: Vec<Placement> = shapes
                .iter()
                .filter_map(|shape| placement(shape, i))
                .collect();
            placements.into_iter().flat_map(move |(cs, ups, downs)| {
                let us_all = this.lists_with(&ups, 0);
                // ds = [t|ds'] with the down-diagonal positions shifted by one
                let shifted: BTreeMap<usize, Term> =
                    downs.iter().map(|(l, j)| (l + 1, j.clone())).collect();
                let members = this.members();
                let ds_all: Vec<Term> = members
                    .iter()
                    .flat_map(|t| {
                        let mut f = shifted.clone();
                        f.insert(1, t.clone());
                        this.lists_with(&f, 1)
                    })
                    .collect();
                let i_term = Term::numeral(i);
                us_all.into_iter().flat_map(move |us| {
                    let cs = cs.clone();
                    let i_term = i_term.clone();
                    ds_all.clone().into_iter().map(move |ds| {
                        Atom::new(PQS, vec![i_term.clone(), cs.clone(), us.clone(), ds])
                    })
                })
            })
        })
    }
}

/// A column list with its required up- and down-diagonal entries.
type Placement = (Term, BTreeMap<usize, Term>, BTreeMap<usize, Term>);

/// For a proper list of distinct members holding every queen `1..=i` with
/// distinct diagonal numbers, the list and its required diagonal entries.
fn placement(shape: &[Term], i: u64) -> Option<Placement> {
    let distinct = shape.iter().collect::<HashSet<_>>().len() == shape.len();
    if !distinct {
        return None;
    }
    let mut ups = BTreeMap::new();
    let mut downs = BTreeMap::new();
    let mut seen_up = HashSet::new();
    let mut seen_down = HashSet::new();
    for j in 1..=i {
        let q = Term::numeral(j);
        let k = shape.iter().position(|m| *m == q)? as i64 + 1;
        let (u, d) = (
            up_diag_number(j as i64, k, i as i64),
            down_diag_number(j as i64, k, i as i64),
        );
        if !seen_up.insert(u) || !seen_down.insert(d) {
            return None;
        }
        if u > 0 {
            ups.insert(u as usize, q.clone());
        }
        if d > 0 {
            downs.insert(d as usize, q);
        }
    }
    Some((Term::list(shape.iter().cloned()), ups, downs))
}

/// Which arguments of each predicate contribute to its level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelMapping {
    rules: BTreeMap<(String, usize), Vec<usize>>,
}

impl LevelMapping {
    pub fn new() -> LevelMapping {
        LevelMapping::default()
    }

    /// `|pqs(i,cs,us,ds)| = |i| + |cs|`, `|pq(i,cs,us,ds)| = |cs|`.
    pub fn queens() -> LevelMapping {
        LevelMapping::new().with(PQS, 4, &[0, 1]).with(PQ, 4, &[1])
    }

    /// Level of `pred/arity` atoms is the sum of the sizes of `args`.
    pub fn with(mut self, pred: &str, arity: usize, args: &[usize]) -> LevelMapping {
        assert!(
            args.iter().all(|&a| a < arity),
            "argument index out of range"
        );
        self.rules.insert((pred.to_string(), arity), args.to_vec());
        self
    }

    pub fn covers(&self, pred: &str, arity: usize) -> bool {
        self.rules.contains_key(&(pred.to_string(), arity))
    }

    pub fn level_of<P: Probe>(&self, p: &P, a: &Atom) -> Result<Option<u64>, P::Stuck> {
        let Some(idx) = self.rules.get(&(a.pred.to_string(), a.arity())) else {
            return Ok(None);
        };
        let mut sum = 0;
        for &k in idx {
            sum += term_size(p, &a.args[k])?;
        }
        Ok(Some(sum))
    }

    /// Level of a ground atom; `None` for unmapped predicates.
    pub fn level(&self, a: &Atom) -> Option<u64> {
        infallible(self.level_of(&Syntactic, a))
    }

    /// Arguments whose size the level depends on.
    pub fn arguments(&self, pred: &str, arity: usize) -> Option<&[usize]> {
        self.rules.get(&(pred.to_string(), arity)).map(|v| &v[..])
    }
}
