//! SLD resolution with a selectable selection rule.
//!
//! The search is depth-first with chronological backtracking; clauses are
//! tried in source order. Every resolvent is built by applying the mgu to
//! the remaining goals, so frames are independent values and backtracking
//! is just popping the stack.

use std::rc::Rc;

use crate::subst::{rename_clause, Substitution};
use crate::term::{Atom, Program, Query, Term, Var};
use crate::unify::{unify_atoms_traced, Unification, UnifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelectionRule {
    Leftmost,
    Rightmost,
    /// Rotates the selected position with every resolution step.
    FairRoundRobin,
}

impl SelectionRule {
    pub const ALL: [SelectionRule; 3] = [
        SelectionRule::Leftmost,
        SelectionRule::Rightmost,
        SelectionRule::FairRoundRobin,
    ];

    fn select(self, goals: usize, steps: usize) -> usize {
        match self {
            SelectionRule::Leftmost => 0,
            SelectionRule::Rightmost => goals - 1,
            SelectionRule::FairRoundRobin => steps % goals,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub selection_rule: SelectionRule,
    /// Resolution steps allowed on one derivation.
    pub depth_limit: Option<usize>,
    pub answer_limit: Option<usize>,
    pub occur_check: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            selection_rule: SelectionRule::Leftmost,
            depth_limit: None,
            answer_limit: None,
            occur_check: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Answer {
    /// Restricted to the variables of the query.
    pub substitution: Substitution,
    pub instantiated_query: Query,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveEvent {
    Answer(Answer),
    /// Emitted once, after the last answer, if some branch hit the depth limit.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub goal: Atom,
    pub clause_index: usize,
    pub mgu: Substitution,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub resolution_steps: u64,
    pub unification_attempts: u64,
    /// Unifications that failed only because of a would-be cyclic binding.
    pub occur_violations: u64,
    pub truncated_branches: u64,
}

struct TraceNode {
    step: TraceStep,
    parent: Option<Rc<TraceNode>>,
}

struct Frame {
    goals: Vec<Atom>,
    bindings: Vec<Term>,
    steps: usize,
    next_clause: usize,
    trace: Option<Rc<TraceNode>>,
}

/// Lazily produced computed answers of one query.
pub struct Solutions<'p> {
    program: &'p Program,
    query: Query,
    query_vars: Vec<Var>,
    opts: SolveOptions,
    stack: Vec<Frame>,
    emitted: usize,
    stats: SolveStats,
    tracing: bool,
    last_trace: Vec<TraceStep>,
    finished: bool,
}

pub fn solve<'p>(program: &'p Program, query: &Query, opts: SolveOptions) -> Solutions<'p> {
    Solutions::new(program, query, opts, false)
}

impl<'p> Solutions<'p> {
    fn new(program: &'p Program, query: &Query, opts: SolveOptions, tracing: bool) -> Self {
        assert!(
            opts.depth_limit != Some(0),
            "depth_limit must be at least 1"
        );
        let query_vars = query.vars();
        let root = Frame {
            goals: query.atoms.clone(),
            bindings: query_vars.iter().cloned().map(Term::Var).collect(),
            steps: 0,
            next_clause: 0,
            trace: None,
        };
        Solutions {
            program,
            query: query.clone(),
            query_vars,
            opts,
            stack: vec![root],
            emitted: 0,
            stats: SolveStats::default(),
            tracing,
            last_trace: Vec::new(),
            finished: false,
        }
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// Collects the answers, dropping the truncation marker.
    pub fn answers(self) -> Vec<Answer> {
        self.filter_map(|e| match e {
            SolveEvent::Answer(a) => Some(a),
            SolveEvent::Truncated => None,
        })
        .collect()
    }

    fn answer_of(&self, frame: &Frame) -> Answer {
        let substitution = Substitution::from_pairs(
            self.query_vars
                .iter()
                .cloned()
                .zip(frame.bindings.iter().cloned()),
        );
        let instantiated_query = substitution.apply_query(&self.query);
        Answer {
            substitution,
            instantiated_query,
        }
    }

    fn step(&mut self) -> Option<SolveEvent> {
        let unify_opts = UnifyOptions {
            occur_check: self.opts.occur_check,
        };
        while let Some(mut frame) = self.stack.pop() {
            if frame.goals.is_empty() {
                let answer = self.answer_of(&frame);
                if self.tracing {
                    let mut steps = Vec::new();
                    let mut node = frame.trace.clone();
                    while let Some(n) = node {
                        steps.push(n.step.clone());
                        node = n.parent.clone();
                    }
                    steps.reverse();
                    self.last_trace = steps;
                }
                return Some(SolveEvent::Answer(answer));
            }
            if let Some(limit) = self.opts.depth_limit {
                if frame.steps >= limit {
                    self.stats.truncated_branches += 1;
                    continue;
                }
            }
            let selected = self
                .opts
                .selection_rule
                .select(frame.goals.len(), frame.steps);
            let goal = &frame.goals[selected];
            let clauses = &self.program.clauses;
            let mut i = frame.next_clause;
            while i < clauses.len() {
                let clause = &clauses[i];
                i += 1;
                if clause.head.pred != goal.pred || clause.head.arity() != goal.arity() {
                    continue;
                }
                let renamed = rename_clause(clause);
                self.stats.unification_attempts += 1;
                let mgu = match unify_atoms_traced(goal, &renamed.head, unify_opts) {
                    Unification::Unified(s) => s,
                    Unification::Clash => continue,
                    Unification::OccurViolation => {
                        self.stats.occur_violations += 1;
                        continue;
                    }
                };
                self.stats.resolution_steps += 1;
                let mut goals = Vec::with_capacity(frame.goals.len() - 1 + renamed.body.len());
                goals.extend(frame.goals[..selected].iter().map(|g| mgu.apply_atom(g)));
                goals.extend(renamed.body.iter().map(|g| mgu.apply_atom(g)));
                goals.extend(
                    frame.goals[selected + 1..]
                        .iter()
                        .map(|g| mgu.apply_atom(g)),
                );
                let trace = if self.tracing {
                    Some(Rc::new(TraceNode {
                        step: TraceStep {
                            goal: goal.clone(),
                            clause_index: i - 1,
                            mgu: mgu.clone(),
                        },
                        parent: frame.trace.clone(),
                    }))
                } else {
                    None
                };
                let child = Frame {
                    goals,
                    bindings: frame.bindings.iter().map(|t| mgu.apply(t)).collect(),
                    steps: frame.steps + 1,
                    next_clause: 0,
                    trace,
                };
                frame.next_clause = i;
                self.stack.push(frame);
                self.stack.push(child);
                break;
            }
        }
        None
    }
}

impl Iterator for Solutions<'_> {
    type Item = SolveEvent;

    fn next(&mut self) -> Option<SolveEvent> {
        if self.finished {
            return None;
        }
        if let Some(limit) = self.opts.answer_limit {
            if self.emitted >= limit {
                self.finished = true;
                return None;
            }
        }
        match self.step() {
            Some(ev) => {
                self.emitted += 1;
                Some(ev)
            }
            None => {
                self.finished = true;
                (self.stats.truncated_branches > 0).then_some(SolveEvent::Truncated)
            }
        }
    }
}

/// The resolution steps of the first successful derivation, if any.
pub fn derivation_trace(
    program: &Program,
    query: &Query,
    opts: SolveOptions,
) -> Option<Vec<TraceStep>> {
    let mut sols = Solutions::new(program, query, opts, true);
    match sols.next()? {
        SolveEvent::Answer(_) => Some(std::mem::take(&mut sols.last_trace)),
        SolveEvent::Truncated => None,
    }
}
