//! Definite-clause logic programs: an SLD engine, bounded Herbrand
//! semantics, and checks of correctness and termination conditions,
//! applied to the layered n-queens program.

pub mod engine;
pub mod herbrand;
pub mod parse;
pub mod probe;
pub mod queens;
pub mod queens_spec;
pub mod refine;
pub mod subst;
pub mod term;
pub mod unify;
pub mod verify;

pub use engine::{solve, Answer, SelectionRule, SolveEvent, SolveOptions};
pub use parse::{parse_atom, parse_program, parse_query, parse_term, ParseError};
pub use subst::Substitution;
pub use term::{Atom, Clause, Program, Query, Signature, Term, Var};
pub use unify::{mgu, unify_atoms, UnifyOptions};
