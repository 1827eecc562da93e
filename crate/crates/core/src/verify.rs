//! Sufficient conditions for correctness, completeness and termination,
//! checked on depth-bounded slices.
//!
//! Clause-level checks quantify over every ground instance of a clause in
//! the depth-`d` slice (every argument of every atom of depth at most `d`).
//! They run the refinement search of [`crate::refine`], which covers the
//! whole slice exactly; `instances_examined` counts search cells, and the
//! size of the slice itself is reported as a parameter.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::herbrand::{symbolic_fixpoint, DepthBound, FactSet};
use crate::probe::{infallible, Probe, Syntactic};
use crate::queens_spec::{
    correct_up_to, down_diag_number, up_diag_number, LevelMapping, PlacementTriple, SampleBound,
    SpecSet,
};
use crate::refine::{search, Cell, SearchLimits, Split};
use crate::subst::Substitution;
use crate::term::{Atom, Clause, Program, Query, Signature, Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    ResourceCapped,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ResourceCapped => "resource-capped",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Offender {
    ClauseInstance {
        clause_index: usize,
        instance: Clause,
    },
    Atom(Atom),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub offender: Offender,
    pub explanation: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub check_name: String,
    pub parameters: BTreeMap<String, String>,
    pub counterexamples: Vec<Counterexample>,
    pub instances_examined: u64,
    pub capped: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check_name: &str) -> CheckReport {
        CheckReport {
            check_name: check_name.to_string(),
            parameters: BTreeMap::new(),
            counterexamples: Vec::new(),
            instances_examined: 0,
            capped: false,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> CheckReport {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Fail if there is a counterexample, else capped if the search was cut.
    pub fn verdict(&self) -> Verdict {
        if !self.counterexamples.is_empty() {
            Verdict::Fail
        } else if self.capped {
            Verdict::ResourceCapped
        } else {
            Verdict::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::Pass
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "check {}: {}", self.check_name, self.verdict());
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "  {k} = {v}");
        }
        let _ = writeln!(s, "  examined = {}", self.instances_examined);
        if self.capped {
            let _ = writeln!(s, "  search stopped at the instance cap");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        let _ = writeln!(s, "  counterexamples = {}", self.counterexamples.len());
        for c in &self.counterexamples {
            match &c.offender {
                Offender::ClauseInstance {
                    clause_index,
                    instance,
                } => {
                    let _ = writeln!(s, "    clause {}: {instance}", clause_index + 1);
                }
                Offender::Atom(a) => {
                    let _ = writeln!(s, "    atom: {a}");
                }
            }
            let _ = writeln!(s, "      {}", c.explanation);
        }
        s
    }

    /// One JSON object per line: a summary, then one per counterexample.
    pub fn to_records(&self) -> String {
        let mut s = String::new();
        let summary = json!({
            "record": "check",
            "check": self.check_name,
            "verdict": self.verdict().as_str(),
            "instances_examined": self.instances_examined,
            "capped": self.capped,
            "parameters": self.parameters,
            "notes": self.notes,
            "counterexamples": self.counterexamples.len(),
        });
        s.push_str(&summary.to_string());
        s.push('\n');
        for c in &self.counterexamples {
            let rec = match &c.offender {
                Offender::ClauseInstance {
                    clause_index,
                    instance,
                } => json!({
                    "record": "counterexample",
                    "check": self.check_name,
                    "kind": "clause_instance",
                    "clause": clause_index + 1,
                    "instance": instance.to_string(),
                    "explanation": c.explanation,
                }),
                Offender::Atom(a) => json!({
                    "record": "counterexample",
                    "check": self.check_name,
                    "kind": "atom",
                    "atom": a.to_string(),
                    "explanation": c.explanation,
                }),
            };
            s.push_str(&rec.to_string());
            s.push('\n');
        }
        s
    }

    fn absorb(&mut self, cells: u64, capped: bool) {
        self.instances_examined += cells;
        self.capped |= capped;
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub sig: Arc<Signature>,
    pub depth: DepthBound,
    /// Search cells allowed per check.
    pub max_instances: u64,
    /// Counterexamples collected per clause before moving on.
    pub max_counterexamples: usize,
}

impl VerifyConfig {
    pub fn new(sig: Signature, depth: u32) -> VerifyConfig {
        VerifyConfig {
            sig: Arc::new(sig),
            depth: DepthBound::new(depth),
            max_instances: 10_000_000,
            max_counterexamples: 5,
        }
    }

    fn limits(&self, used: u64) -> SearchLimits {
        SearchLimits {
            max_cells: self.max_instances.saturating_sub(used),
            max_witnesses: self.max_counterexamples,
        }
    }

    fn describe(&self, r: CheckReport) -> CheckReport {
        r.param("depth", self.depth.max_term_depth)
            .param("signature", &*self.sig)
            .param("max_instances", self.max_instances)
    }
}

fn clause_cell(c: &Clause, cfg: &VerifyConfig) -> Option<Cell> {
    let roots: Vec<Atom> = c.atoms().cloned().collect();
    Cell::slice(cfg.sig.clone(), roots, cfg.depth.max_term_depth)
}

/// Number of ground instances of `c` in the depth slice, as a float since
/// it overflows integers from depth 4 on.
pub fn slice_size(c: &Clause, cfg: &VerifyConfig) -> f64 {
    match crate::herbrand::slice_budgets(c.atoms(), cfg.depth) {
        None => 0.0,
        Some(b) => b.values().map(|&k| term_count(&cfg.sig, k)).product(),
    }
}

fn term_count(sig: &Signature, d: u32) -> f64 {
    let consts = sig.constants().len() as f64;
    let mut u = consts;
    for _ in 0..d {
        u = consts
            + sig
                .compounds()
                .iter()
                .map(|&(_, arity)| u.powi(arity as i32))
                .sum::<f64>();
    }
    u
}

fn format_count(x: f64) -> String {
    if x < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:.3e}")
    }
}

fn instance_of(roots: &[Atom], clause_index: usize) -> Offender {
    Offender::ClauseInstance {
        clause_index,
        instance: Clause::new(roots[0].clone(), roots[1..].to_vec()),
    }
}

/// Every ground instance in the slice whose body atoms are all in `s` has
/// its head in `s`.
pub fn check_model(p: &Program, s: SpecSet, cfg: &VerifyConfig) -> CheckReport {
    let mut report = cfg.describe(CheckReport::new("model")).param("spec", s);
    let mut slice = 0.0;
    for (ci, c) in p.clauses.iter().enumerate() {
        slice += slice_size(c, cfg);
        let Some(cell) = clause_cell(c, cfg) else {
            continue;
        };
        let out = search(cell, cfg.limits(report.instances_examined), |cell| {
            let roots = cell.roots();
            for b in &roots[1..] {
                if !s.contains(cell, b)? {
                    return Ok(false);
                }
            }
            Ok(!s.contains(cell, &roots[0])?)
        });
        report.absorb(out.cells, out.capped);
        for w in out.witnesses {
            report.counterexamples.push(Counterexample {
                offender: instance_of(&w, ci),
                explanation: format!("body atoms in {s}, head not in {s}"),
            });
        }
        if report.capped {
            break;
        }
    }
    report.param("ground_instances", format_count(slice))
}

/// A ground clause instance showing that an atom is covered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub clause_index: usize,
    pub grounding: Substitution,
    pub instance: Clause,
}

impl Witness {
    /// Recomputes the instance from the grounding and checks it.
    pub fn verify(&self, a: &Atom, p: &Program, s: SpecSet) -> bool {
        let Some(c) = p.clauses.get(self.clause_index) else {
            return false;
        };
        let inst = self.grounding.apply_clause(c);
        inst == self.instance
            && inst.is_ground()
            && inst.head == *a
            && inst.body.iter().all(|b| s.holds(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coverage {
    pub witness: Option<Witness>,
    pub cells: u64,
    pub capped: bool,
}

fn match_term(p: &Term, g: &Term, sigma: &mut Substitution) -> bool {
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
                    .all(|(x, y)| match_term(x, y, sigma))
        }
        _ => false,
    }
}

/// Searches for a ground instance of a clause with head `a` and every body
/// atom in `s`, giving body-only variables terms of depth at most `d`.
/// Absence of a witness means "not covered within depth d".
pub fn check_covered(a: &Atom, p: &Program, s: SpecSet, cfg: &VerifyConfig) -> Coverage {
    assert!(a.is_ground(), "check_covered needs a ground atom");
    let mut cells = 0;
    let mut capped = false;
    for (ci, c) in p.clauses.iter().enumerate() {
        if c.head.pred != a.pred || c.head.arity() != a.arity() {
            continue;
        }
        let mut head_match = Substitution::new();
        if !c
            .head
            .args
            .iter()
            .zip(a.args.iter())
            .all(|(x, y)| match_term(x, y, &mut head_match))
        {
            continue;
        }
        let body: Vec<Atom> = c.body.iter().map(|b| head_match.apply_atom(b)).collect();
        let free: Vec<Var> = {
            let mut v: Vec<Var> = body.iter().flat_map(|b| b.vars()).collect();
            v.sort();
            v.dedup();
            v
        };
        let budgets = free.iter().map(|v| (v.clone(), cfg.depth.max_term_depth));
        let Some(cell) = Cell::new(cfg.sig.clone(), body.clone(), budgets) else {
            continue;
        };
        let limits = SearchLimits {
            max_cells: cfg.max_instances.saturating_sub(cells),
            max_witnesses: 1,
        };
        let out = search(cell, limits, |cell| {
            for b in cell.roots() {
                if !s.contains(cell, b)? {
                    return Ok(false);
                }
            }
            Ok(true)
        });
        cells += out.cells;
        capped |= out.capped;
        if let Some(w) = out.witnesses.first() {
            let mut grounding = head_match.clone();
            for (pat, g) in body.iter().zip(w) {
                for (x, y) in pat.args.iter().zip(g.args.iter()) {
                    match_term(x, y, &mut grounding);
                }
            }
            let instance = grounding.apply_clause(c);
            return Coverage {
                witness: Some(Witness {
                    clause_index: ci,
                    grounding,
                    instance,
                }),
                cells,
                capped,
            };
        }
        if capped {
            break;
        }
    }
    Coverage {
        witness: None,
        cells,
        capped,
    }
}

/// Every atom of `atoms` is covered by `p` w.r.t. `s`. Atoms are checked
/// in parallel chunks; the report keeps the input order.
pub fn check_completeness_condition(
    p: &Program,
    s: SpecSet,
    atoms: impl Iterator<Item = Atom>,
    cfg: &VerifyConfig,
) -> CheckReport {
    let mut report = cfg.describe(CheckReport::new("covered")).param("spec", s);
    report.notes.push(format!(
        "bounded evidence: atoms not covered within depth {} are reported",
        cfg.depth.max_term_depth
    ));
    let mut atoms = atoms;
    let mut sampled = 0usize;
    let mut uncovered = 0usize;
    loop {
        let chunk: Vec<Atom> = atoms.by_ref().take(4096).collect();
        if chunk.is_empty() {
            break;
        }
        sampled += chunk.len();
        let results: Vec<Coverage> = chunk
            .par_iter()
            .map(|a| check_covered(a, p, s, cfg))
            .collect();
        for (a, cov) in chunk.into_iter().zip(results) {
            report.absorb(cov.cells, cov.capped);
            if cov.witness.is_some() {
                continue;
            }
            uncovered += 1;
            if report.counterexamples.len() < cfg.max_counterexamples {
                let why = if cov.capped {
                    "search cap reached before a witness was found".to_string()
                } else {
                    format!("not covered within depth {}", cfg.depth.max_term_depth)
                };
                report.counterexamples.push(Counterexample {
                    offender: Offender::Atom(a),
                    explanation: why,
                });
            }
        }
    }
    report.param("atoms", sampled).param("uncovered", uncovered)
}

/// `check_completeness_condition` over the first `budget` atoms that
/// `s` samples from `bound`.
pub fn check_completeness_sampled(
    p: &Program,
    s: SpecSet,
    bound: &SampleBound,
    budget: usize,
    cfg: &VerifyConfig,
) -> CheckReport {
    check_completeness_condition(p, s, s.sample(bound).take(budget), cfg)
        .param("sample_max_row", bound.max_row)
        .param("sample_max_len", bound.max_len)
        .param("sample_budget", budget)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("level mapping does not cover predicate {0}/{1}")]
    Unmapped(String, usize),
}

/// Every ground instance in the slice has each body atom at a strictly
/// lower level than its head.
pub fn check_recurrent(
    p: &Program,
    lm: &LevelMapping,
    cfg: &VerifyConfig,
) -> Result<CheckReport, VerifyError> {
    for (pred, arity) in p.predicates() {
        if !lm.covers(&pred, arity) {
            return Err(VerifyError::Unmapped(pred.to_string(), arity));
        }
    }
    let mut report = cfg.describe(CheckReport::new("recurrent"));
    let mut slice = 0.0;
    for (ci, c) in p.clauses.iter().enumerate() {
        slice += slice_size(c, cfg);
        if c.body.is_empty() {
            continue;
        }
        let Some(cell) = clause_cell(c, cfg) else {
            continue;
        };
        let out = search(cell, cfg.limits(report.instances_examined), |cell| {
            let roots = cell.roots();
            let head = lm.level_of(cell, &roots[0])?.expect("mapped");
            for b in &roots[1..] {
                if lm.level_of(cell, b)?.expect("mapped") >= head {
                    return Ok(true);
                }
            }
            Ok(false)
        });
        report.absorb(out.cells, out.capped);
        for w in out.witnesses {
            let head = lm.level(&w[0]).unwrap_or(0);
            let body: Vec<String> = w[1..]
                .iter()
                .map(|b| lm.level(b).unwrap_or(0).to_string())
                .collect();
            report.counterexamples.push(Counterexample {
                offender: instance_of(&w, ci),
                explanation: format!("head level {head}, body levels {}", body.join(", ")),
            });
        }
        if report.capped {
            break;
        }
    }
    Ok(report.param("ground_instances", format_count(slice)))
}

/// Size of `t` if it is the same for all instances: the cons/successor
/// spine must end in a non-variable.
fn closed_size(t: &Term) -> Option<u64> {
    let mut n = 0;
    let mut cur = t;
    loop {
        match cur {
            Term::Var(_) => return None,
            Term::App(f, args) if (&**f == crate::term::CONS && args.len() == 2) => {
                n += 1;
                cur = &args[1];
            }
            Term::App(f, args) if (&**f == crate::term::SUCC && args.len() == 1) => {
                n += 1;
                cur = &args[0];
            }
            Term::App(..) => return Some(n),
        }
    }
}

/// An upper bound on the level of every ground instance of `q`, when the
/// mapped arguments have closed spines. The maximum over the atoms.
pub fn check_query_bound(q: &Query, lm: &LevelMapping) -> Option<u64> {
    let mut best = 0;
    for a in &q.atoms {
        let idx = lm.arguments(&a.pred, a.arity())?;
        let mut sum = 0;
        for &k in idx {
            sum += closed_size(&a.args[k])?;
        }
        best = best.max(sum);
    }
    Some(best)
}

/// Whether ground `a` is an instance of the fact, three-valued on cells.
fn matches_fact<P: Probe>(p: &P, fact: &Cell, a: &Atom) -> Result<bool, P::Stuck> {
    let pat = &fact.roots()[0];
    if pat.pred != a.pred || pat.arity() != a.arity() {
        return Ok(false);
    }
    let mut env: Vec<(Var, Term)> = Vec::new();
    for (x, t) in pat.args.iter().zip(a.args.iter()) {
        if !match_partial(p, fact, x, t, &mut env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn match_partial<P: Probe>(
    p: &P,
    fact: &Cell,
    pat: &Term,
    t: &Term,
    env: &mut Vec<(Var, Term)>,
) -> Result<bool, P::Stuck> {
    match pat {
        Term::Var(x) => {
            if let Some((_, bound)) = env.iter().find(|(v, _)| v == x) {
                let bound = bound.clone();
                return p.equal(&bound, t);
            }
            let budget = fact.budget(x).expect("fact variable has a budget");
            if !p.depth_at_most(t, budget)? {
                return Ok(false);
            }
            env.push((x.clone(), t.clone()));
            Ok(true)
        }
        Term::App(f, pargs) => match p.functor(t, f, pargs.len())? {
            None => Ok(false),
            Some(targs) => {
                for (x, y) in pargs.iter().zip(targs.iter()) {
                    if !match_partial(p, fact, x, y, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        },
    }
}

fn in_facts<P: Probe>(p: &P, facts: &FactSet, a: &Atom) -> Result<bool, P::Stuck> {
    for f in facts.facts() {
        if matches_fact(p, f, a)? {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug)]
pub struct FixpointComparison {
    /// Derived atoms outside the correctness specification.
    pub containment: CheckReport,
    /// Base atoms of the completeness specification that are not derived.
    /// Evidence only: the bounded fixpoint under-approximates the model.
    pub completeness: CheckReport,
    pub facts: usize,
}

/// Compares the bounded least fixpoint with a pair of specifications:
/// `fixpoint ⊆ s_corr` exactly on the base, and `s_compl ∩ base ⊆ fixpoint`
/// by exhaustive search, plus sampled atoms when a sample base is given.
pub fn compare_spec_fixpoint(
    p: &Program,
    s_corr: SpecSet,
    s_compl: SpecSet,
    cfg: &VerifyConfig,
    sample: Option<(&SampleBound, usize)>,
) -> FixpointComparison {
    let mut containment = cfg
        .describe(CheckReport::new("fixpoint_containment"))
        .param("spec", s_corr);
    let mut completeness = cfg
        .describe(CheckReport::new("fixpoint_completeness"))
        .param("spec", s_compl);
    completeness.notes.push(
        "bounded evidence: the depth-bounded fixpoint under-approximates the least model".into(),
    );
    let facts = match symbolic_fixpoint(p, &cfg.sig, cfg.depth, 100_000) {
        Ok(f) => f,
        Err(partial) => {
            containment.capped = true;
            completeness.capped = true;
            containment
                .notes
                .push("fixpoint exceeded 100000 facts".into());
            partial
        }
    };
    for f in facts.facts() {
        let out = search(
            f.clone(),
            cfg.limits(containment.instances_examined),
            |cell| Ok(!s_corr.contains(cell, &cell.roots()[0])?),
        );
        containment.absorb(out.cells, out.capped);
        for w in out.witnesses {
            containment.counterexamples.push(Counterexample {
                offender: Offender::Atom(w[0].clone()),
                explanation: format!("derived, not in {s_corr}"),
            });
        }
    }
    for (pred, arity) in p.predicates() {
        let args: Vec<Term> = (0..arity).map(|_| Term::Var(Var::fresh())).collect();
        let root = Atom {
            pred: pred.clone(),
            args: args.into(),
        };
        let Some(cell) = Cell::slice(cfg.sig.clone(), vec![root], cfg.depth.max_term_depth) else {
            continue;
        };
        let out = search(cell, cfg.limits(completeness.instances_examined), |cell| {
            let a = &cell.roots()[0];
            Ok(s_compl.contains(cell, a)? && !in_facts(cell, &facts, a)?)
        });
        completeness.absorb(out.cells, out.capped);
        for w in out.witnesses {
            completeness.counterexamples.push(Counterexample {
                offender: Offender::Atom(w[0].clone()),
                explanation: format!(
                    "in {s_compl} and the base, not derived within depth {}",
                    cfg.depth.max_term_depth
                ),
            });
        }
    }
    if let Some((bound, budget)) = sample {
        let base = crate::herbrand::DepthBase::new(cfg.sig.clone(), cfg.depth);
        let (mut inside, mut present) = (0usize, 0usize);
        for a in s_compl.sample(bound).take(budget) {
            if base.contains(&a) {
                inside += 1;
                present += facts.contains_ground(&a) as usize;
            }
        }
        completeness.notes.push(format!(
            "sampled {inside} atoms of {s_compl} in the base, {present} derived"
        ));
    }
    FixpointComparison {
        containment: containment.param("facts", facts.len()),
        completeness: completeness.param("facts", facts.len()),
        facts: facts.len(),
    }
}

/// Settings for the randomized check of the row-shift property of correct
/// placements.
#[derive(Clone, Debug)]
pub struct RowShiftConfig {
    pub instances: usize,
    pub seed: u64,
    /// Largest context row `i`; `m` ranges over `1..=i`.
    pub max_row: u64,
    /// Depth budget of the existential witness search.
    pub witness_depth: u32,
    pub sig: Arc<Signature>,
}

impl Default for RowShiftConfig {
    fn default() -> Self {
        RowShiftConfig {
            instances: 100_000,
            seed: 0x5eed,
            max_row: 4,
            witness_depth: 4,
            sig: Arc::new(Signature::default_queens()),
        }
    }
}

/// Ground data for one instance of the property. `forward` reads the
/// triple `(cs, [t|us], ds)` at row `i` against `(cs, us, [t2|ds])` at row
/// `i + 1`; `backward` reads them the other way round with `t` open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowShiftInstance {
    pub cs: Term,
    pub us: Term,
    pub ds: Term,
    pub t: Term,
    pub t2: Term,
    pub m: u64,
    pub i: u64,
}

impl RowShiftInstance {
    pub fn before(&self) -> PlacementTriple {
        PlacementTriple::new(
            self.cs.clone(),
            Term::cons(self.t.clone(), self.us.clone()),
            self.ds.clone(),
        )
    }

    pub fn after(&self) -> PlacementTriple {
        PlacementTriple::new(
            self.cs.clone(),
            self.us.clone(),
            Term::cons(self.t2.clone(), self.ds.clone()),
        )
    }

    fn as_atom(&self, pred: &str) -> Atom {
        Atom::new(
            pred,
            vec![
                Term::numeral(self.m),
                Term::numeral(self.i),
                self.cs.clone(),
                self.t.clone(),
                self.us.clone(),
                self.ds.clone(),
                self.t2.clone(),
            ],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowShiftOutcome {
    pub forward_premise: bool,
    pub forward_holds: bool,
    pub backward_premise: bool,
    /// A `t` making the earlier triple correct, when the premise holds.
    pub backward_witness: Option<Term>,
    pub cells: u64,
    pub capped: bool,
}

/// Searches for `t` of depth at most `depth` with `(cs, [t|us], ds)`
/// correct up to `m` w.r.t. `i`. The witness is re-checked syntactically.
pub fn find_backward_witness(
    inst: &RowShiftInstance,
    sig: &Arc<Signature>,
    depth: u32,
) -> (Option<Term>, u64, bool) {
    let v = Var::fresh();
    let root = Atom::new(
        "triple",
        vec![
            inst.cs.clone(),
            Term::cons(Term::Var(v.clone()), inst.us.clone()),
            inst.ds.clone(),
        ],
    );
    let Some(cell) = Cell::new(sig.clone(), vec![root], [(v, depth)]) else {
        return (None, 0, false);
    };
    let (m, i) = (inst.m, inst.i);
    let out = search(cell, SearchLimits::default(), |cell| {
        let a = &cell.roots()[0];
        let t = PlacementTriple::new(a.args[0].clone(), a.args[1].clone(), a.args[2].clone());
        correct_up_to(cell, &t, m, i)
    });
    let witness = out.witnesses.first().and_then(|w| {
        let t = w[0].args[1].args()[0].clone();
        let mut check = inst.clone();
        check.t = t.clone();
        infallible(correct_up_to(&Syntactic, &check.before(), m, i)).then_some(t)
    });
    (witness, out.cells, out.capped)
}

pub fn row_shift_check(
    inst: &RowShiftInstance,
    sig: &Arc<Signature>,
    depth: u32,
) -> RowShiftOutcome {
    let (m, i) = (inst.m, inst.i);
    let forward_premise = infallible(correct_up_to(&Syntactic, &inst.before(), m, i));
    let forward_holds =
        !forward_premise || infallible(correct_up_to(&Syntactic, &inst.after(), m, i + 1));
    let backward_premise = infallible(correct_up_to(&Syntactic, &inst.after(), m, i + 1));
    let (backward_witness, cells, capped) = if backward_premise {
        find_backward_witness(inst, sig, depth)
    } else {
        (None, 0, false)
    };
    RowShiftOutcome {
        forward_premise,
        forward_holds,
        backward_premise,
        backward_witness,
        cells,
        capped,
    }
}

/// Random instances with `0 < m <= i <= max_row`. Most are built from a
/// correct placement at row `i` or `i + 1`, some with one entry disturbed,
/// so that both premises hold often.
pub fn row_shift_instances(cfg: &RowShiftConfig) -> Vec<RowShiftInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.instances)
        .map(|_| random_instance(&mut rng, cfg.max_row))
        .collect()
}

fn random_term(rng: &mut ChaCha8Rng) -> Term {
    match rng.gen_range(0..10) {
        0..=3 => Term::constant(["a", "b", "c", "d", "e", "f"][rng.gen_range(0..6)]),
        4..=7 => Term::numeral(rng.gen_range(0..7)),
        8 => Term::nil(),
        _ => Term::app(crate::term::SUCC, vec![Term::constant("a")]),
    }
}

fn random_tail(rng: &mut ChaCha8Rng) -> Term {
    if rng.gen_bool(0.9) {
        Term::nil()
    } else {
        random_term(rng)
    }
}

/// A list with the given 1-based entries, padded with random members.
fn random_list(rng: &mut ChaCha8Rng, entries: &BTreeMap<usize, Term>) -> Vec<Term> {
    let len = entries.keys().next_back().copied().unwrap_or(0) + rng.gen_range(0..3);
    (1..=len)
        .map(|l| entries.get(&l).cloned().unwrap_or_else(|| random_term(rng)))
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng, max_row: u64) -> RowShiftInstance {
    let i = rng.gen_range(1..=max_row);
    let m = rng.gen_range(1..=i);
    let len = rng.gen_range(m as usize..=6);
    let mut pool: Vec<Term> = (m + 1..=6).map(Term::numeral).collect();
    pool.extend(["a", "b", "c", "d", "e", "f"].map(Term::constant));
    pool.shuffle(rng);
    let mut cs: Vec<Term> = (1..=m).map(Term::numeral).collect();
    cs.extend(pool.into_iter().take(len - m as usize));
    cs.shuffle(rng);
    let spare: Vec<usize> = (0..cs.len())
        .filter(|&k| cs[k].numeral_value().is_none_or(|j| j > m))
        .collect();
    if rng.gen_bool(0.05) && !spare.is_empty() {
        let k = spare[rng.gen_range(0..spare.len())];
        cs[k] = cs[rng.gen_range(0..cs.len())].clone();
    }
    let shift_later = rng.gen_bool(0.5);
    let row = if shift_later { i + 1 } else { i } as i64;
    let mut ups = BTreeMap::new();
    let mut downs = BTreeMap::new();
    for j in 1..=m {
        let k = cs
            .iter()
            .position(|c| *c == Term::numeral(j))
            .expect("queen placed") as i64
            + 1;
        let (u, d) = (
            up_diag_number(j as i64, k, row),
            down_diag_number(j as i64, k, row),
        );
        if u > 0 {
            ups.insert(u as usize, Term::numeral(j));
        }
        if d > 0 {
            downs.insert(d as usize, Term::numeral(j));
        }
    }
    let mut u = random_list(rng, &ups);
    let mut d = random_list(rng, &downs);
    if rng.gen_bool(0.2) {
        let target = if rng.gen_bool(0.5) { &mut u } else { &mut d };
        if !target.is_empty() {
            let k = rng.gen_range(0..target.len());
            target[k] = random_term(rng);
        }
    }
    let cs_tail = if rng.gen_bool(0.98) {
        Term::nil()
    } else {
        random_term(rng)
    };
    let cs = Term::list_with_tail(cs, cs_tail);
    let (u_tail, d_tail) = (random_tail(rng), random_tail(rng));
    let split = |mut l: Vec<Term>, tail: Term, rng: &mut ChaCha8Rng| {
        if l.is_empty() {
            (random_term(rng), tail)
        } else {
            let head = l.remove(0);
            (head, Term::list_with_tail(l, tail))
        }
    };
    if shift_later {
        let (t2, ds) = split(d, d_tail, rng);
        RowShiftInstance {
            cs,
            us: Term::list_with_tail(u, u_tail),
            ds,
            t: random_term(rng),
            t2,
            m,
            i,
        }
    } else {
        let (t, us) = split(u, u_tail, rng);
        RowShiftInstance {
            cs,
            us,
            ds: Term::list_with_tail(d, d_tail),
            t,
            t2: random_term(rng),
            m,
            i,
        }
    }
}

/// Checks both directions of the row-shift property on random instances.
pub fn check_row_shift(cfg: &RowShiftConfig) -> CheckReport {
    let mut report = CheckReport::new("row_shift")
        .param("instances", cfg.instances)
        .param("seed", cfg.seed)
        .param("max_row", cfg.max_row)
        .param("witness_depth", cfg.witness_depth)
        .param("signature", &*cfg.sig);
    let instances = row_shift_instances(cfg);
    let outcomes: Vec<RowShiftOutcome> = instances
        .par_iter()
        .map(|inst| row_shift_check(inst, &cfg.sig, cfg.witness_depth))
        .collect();
    let mut forward = BTreeMap::<(u64, u64), usize>::new();
    let mut backward = BTreeMap::<(u64, u64), usize>::new();
    for (inst, out) in instances.iter().zip(&outcomes) {
        report.absorb(1 + out.cells, out.capped);
        if out.forward_premise {
            *forward.entry((inst.m, inst.i)).or_default() += 1;
        }
        if out.backward_premise {
            *backward.entry((inst.m, inst.i)).or_default() += 1;
        }
        if !out.forward_holds && report.counterexamples.len() < 20 {
            report.counterexamples.push(Counterexample {
                offender: Offender::Atom(inst.as_atom("forward")),
                explanation: "premise holds at row i, conclusion fails at row i + 1".into(),
            });
        }
        if out.backward_premise
            && out.backward_witness.is_none()
            && !out.capped
            && report.counterexamples.len() < 20
        {
            report.counterexamples.push(Counterexample {
                offender: Offender::Atom(inst.as_atom("backward")),
                explanation: format!("no witness of depth at most {}", cfg.witness_depth),
            });
        }
    }
    let fmt_counts = |m: &BTreeMap<(u64, u64), usize>| {
        m.iter()
            .map(|((m, i), n)| format!("m{m}/i{i}:{n}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    report.notes.push(format!(
        "forward premises by (m, i): {}",
        fmt_counts(&forward)
    ));
    report.notes.push(format!(
        "backward premises by (m, i): {}",
        fmt_counts(&backward)
    ));
    report
        .param("forward_premises", forward.values().sum::<usize>())
        .param("backward_premises", backward.values().sum::<usize>())
}

/// The split type is re-exported for callers writing their own formulas.
pub type Stuck = Split;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_atom, parse_program, parse_query};
    use crate::queens::{initial_query, nqueens_program};

    fn cfg(d: u32) -> VerifyConfig {
        VerifyConfig::new(Signature::default_queens(), d)
    }

    fn atom(s: &str) -> Atom {
        parse_atom(s, &Signature::default_queens()).unwrap()
    }

    #[test]
    fn empty_spec_is_not_a_model_of_a_fact() {
        let p = parse_program("q(0).", &Signature::minimal()).unwrap();
        let r = check_model(&p, SpecSet::Nothing, &cfg(2));
        assert_eq!(r.verdict(), Verdict::Fail);
        match &r.counterexamples[0].offender {
            Offender::ClauseInstance { instance, .. } => assert_eq!(instance.to_string(), "q(0)."),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn model_check_at_small_depth() {
        let r = check_model(&nqueens_program(), SpecSet::S, &cfg(2));
        assert!(r.passed(), "{}", r.to_text());
    }

    #[test]
    fn covered_examples() {
        let p = nqueens_program();
        let c = cfg(4);
        let a = atom("pqs(0, 0, 0, 0)");
        let w = check_covered(&a, &p, SpecSet::S0, &c).witness.unwrap();
        assert_eq!(w.clause_index, 0);
        assert!(w.verify(&a, &p, SpecSet::S0));
        let a = atom("pq(1, [1], [1], [1])");
        let w = check_covered(&a, &p, SpecSet::S0, &c).witness.unwrap();
        assert_eq!(w.clause_index, 2);
        let a = atom("pqs(2, [1,a,2,b], [c,d,2|e], [f,e,1,2|e])");
        assert!(SpecSet::S0.holds(&a));
        let w = check_covered(&a, &p, SpecSet::S0, &c).witness.unwrap();
        assert_eq!(w.clause_index, 1);
        assert!(w.verify(&a, &p, SpecSet::S0));
        // the up-diagonal entry for row 1 w.r.t. row 1 is forced
        assert_eq!(
            w.instance.body[0].args[2],
            parse_atom("p([1,c,d,2|e])", &Signature::default_queens())
                .unwrap()
                .args[0]
        );
    }

    #[test]
    fn pq_fragment_does_not_cover_pqs() {
        let p = nqueens_program().fragment(&["pq"]);
        let a = atom("pqs(0, a, b, c)");
        assert!(check_covered(&a, &p, SpecSet::S0, &cfg(2))
            .witness
            .is_none());
    }

    #[test]
    fn recurrence() {
        let lm = LevelMapping::queens();
        let r = check_recurrent(&nqueens_program(), &lm, &cfg(2)).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let loop_prog = parse_program("p(X) :- p(X).", &Signature::minimal()).unwrap();
        let lm2 = LevelMapping::new().with("p", 1, &[0]);
        let r = check_recurrent(&loop_prog, &lm2, &cfg(1)).unwrap();
        assert_eq!(r.verdict(), Verdict::Fail);
        assert!(check_recurrent(&loop_prog, &lm, &cfg(1)).is_err());
    }

    #[test]
    fn query_bounds() {
        let lm = LevelMapping::queens();
        for n in 1..=8 {
            assert_eq!(
                check_query_bound(&initial_query(n).unwrap(), &lm),
                Some(2 * n)
            );
        }
        let sig = Signature::default_queens();
        let open = parse_query("pqs(N, Cs, _, _)", &sig).unwrap();
        assert_eq!(check_query_bound(&open, &lm), None);
        let pq = parse_query("pq(0, [a], [b], [c])", &sig).unwrap();
        assert_eq!(check_query_bound(&pq, &lm), Some(1));
    }

    #[test]
    fn fixpoint_comparison_small() {
        let c = VerifyConfig::new(Signature::minimal(), 2);
        let frag = nqueens_program().fragment(&["pq"]);
        let cmp = compare_spec_fixpoint(&frag, SpecSet::SPq, SpecSet::SPq, &c, None);
        assert!(cmp.containment.passed(), "{}", cmp.containment.to_text());
        assert!(cmp.completeness.passed(), "{}", cmp.completeness.to_text());
        let q = parse_program("q(0).", &Signature::minimal()).unwrap();
        let cmp = compare_spec_fixpoint(&q, SpecSet::Everything, SpecSet::Nothing, &c, None);
        assert!(cmp.containment.passed());
    }

    #[test]
    fn records_are_json_lines() {
        let p = parse_program("q(0).", &Signature::minimal()).unwrap();
        let r = check_model(&p, SpecSet::Nothing, &cfg(1));
        let recs = r.to_records();
        let lines: Vec<&str> = recs.lines().collect();
        assert_eq!(lines.len(), 2);
        for l in lines {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            assert!(v.get("record").is_some());
        }
    }

    #[test]
    fn slice_sizes_match_enumeration() {
        use crate::herbrand::enumerate_ground_instances;
        let c = VerifyConfig::new(Signature::minimal(), 1);
        for cl in &nqueens_program().clauses {
            let n = enumerate_ground_instances(cl, &c.sig, c.depth).count();
            assert_eq!(slice_size(cl, &c), n as f64, "{cl}");
        }
    }

    #[test]
    fn row_shift_small_run() {
        let cfg = RowShiftConfig {
            instances: 2000,
            ..RowShiftConfig::default()
        };
        let r = check_row_shift(&cfg);
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(row_shift_instances(&cfg), row_shift_instances(&cfg));
    }

    #[test]
    fn row_shift_detects_a_wrong_shift() {
        // shifting by two rows is not a valid transformation
        let cfg = RowShiftConfig {
            instances: 2000,
            ..RowShiftConfig::default()
        };
        let broken = row_shift_instances(&cfg).iter().any(|inst| {
            infallible(correct_up_to(&Syntactic, &inst.before(), inst.m, inst.i))
                && !infallible(correct_up_to(&Syntactic, &inst.after(), inst.m, inst.i + 2))
        });
        assert!(broken);
    }

    #[test]
    fn backward_witness_is_forced_queen() {
        let sig = Arc::new(Signature::default_queens());
        let t = |s: &str| crate::parse::parse_term(s, &sig).unwrap();
        // queen 1 in column 1: up-diagonal number 1 at row 1
        let inst = RowShiftInstance {
            cs: t("[1]"),
            us: t("[]"),
            ds: t("[1]"),
            t: t("b"),
            t2: t("c"),
            m: 1,
            i: 1,
        };
        let out = row_shift_check(&inst, &sig, 4);
        assert!(out.backward_premise);
        assert_eq!(out.backward_witness, Some(Term::numeral(1)));
        assert!(!out.forward_premise);
    }
}
