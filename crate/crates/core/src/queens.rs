//! The n-queens program, its initial queries, and an independent oracle.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::engine::Answer;
use crate::parse::parse_program;
use crate::term::{Atom, Program, Query, Signature, Term, Var};

pub const NQUEENS_SOURCE: &str = "\
pqs(0,_,_,_).
pqs(s(I),Cs,Us,[_|Ds]) :- pqs(I,Cs,[_|Us],Ds), pq(s(I),Cs,Us,Ds).
pq(I,[I|_],[I|_],[I|_]).
pq(I,[_|Cs],[_|Us],[_|Ds]) :- pq(I,Cs,Us,Ds).
";

pub fn nqueens_program() -> Program {
    parse_program(NQUEENS_SOURCE, &Signature::minimal()).expect("built-in program parses")
}

/// Single-clause edits of the program used to test that the checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutant {
    /// Second clause passes `Ds` and `Us` to `pq` in swapped order.
    SwapUsDs,
    /// Second clause head takes `Ds` instead of `[_|Ds]`.
    DropDsWrapper,
    /// Fourth clause keeps the head of the up-diagonal list.
    NonuniformStrip,
}

impl Mutant {
    pub const ALL: [Mutant; 3] = [
        Mutant::SwapUsDs,
        Mutant::DropDsWrapper,
        Mutant::NonuniformStrip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::SwapUsDs => "swap-us-ds",
            Mutant::DropDsWrapper => "drop-ds-wrapper",
            Mutant::NonuniformStrip => "nonuniform-strip",
        }
    }

    /// Index of the replaced clause and its new text.
    fn replacement(self) -> (usize, &'static str) {
        match self {
            Mutant::SwapUsDs => (
                1,
                "pqs(s(I),Cs,Us,[_|Ds]) :- pqs(I,Cs,[_|Us],Ds), pq(s(I),Cs,Ds,Us).",
            ),
            Mutant::DropDsWrapper => (
                1,
                "pqs(s(I),Cs,Us,Ds) :- pqs(I,Cs,[_|Us],Ds), pq(s(I),Cs,Us,Ds).",
            ),
            Mutant::NonuniformStrip => (3, "pq(I,[_|Cs],Us,[_|Ds]) :- pq(I,Cs,Us,Ds)."),
        }
    }

    pub fn program(self) -> Program {
        let (idx, text) = self.replacement();
        let mut p = nqueens_program();
        let c = parse_program(text, &Signature::minimal()).expect("mutant parses");
        p.clauses[idx] = c.clauses[0].clone();
        p
    }
}

impl fmt::Display for Mutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutant::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutant {s:?}"))
    }
}

/// `pqs(n, [V1,...,Vn], W1, W2)` with fresh, pairwise distinct variables.
pub fn initial_query(n: u64) -> Result<Query, QueensError> {
    if n == 0 {
        return Err(QueensError::ZeroBoard);
    }
    let cols: Vec<Term> = (1..=n)
        .map(|k| Term::Var(Var::named(&format!("V{k}"))))
        .collect();
    let atom = Atom::new(
        "pqs",
        vec![
            Term::numeral(n),
            Term::list(cols),
            Term::Var(Var::named("W1")),
            Term::Var(Var::named("W2")),
        ],
    );
    Ok(Query::new(vec![atom]))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueensError {
    #[error("board size must be at least 1")]
    ZeroBoard,
    #[error("answer is not an instance of the initial query")]
    NotAQueensAnswer,
    #[error("column list {0} is not ground")]
    NonGround(String),
    #[error("column list {0} is not a permutation of 1..{1}")]
    NotPermutation(String, u64),
    #[error("placement {0:?} has two queens on a diagonal")]
    Attacking(Vec<u64>),
}

/// Position `k` (0-based) holds the row of the queen in column `k + 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QueensSolution {
    pub columns_to_rows: Vec<u64>,
}

impl QueensSolution {
    pub fn new(columns_to_rows: Vec<u64>) -> Result<QueensSolution, QueensError> {
        let n = columns_to_rows.len() as u64;
        let mut sorted = columns_to_rows.clone();
        sorted.sort();
        if sorted != (1..=n).collect::<Vec<_>>() {
            let text = format!("{columns_to_rows:?}");
            return Err(QueensError::NotPermutation(text, n));
        }
        if !non_attacking(&columns_to_rows) {
            return Err(QueensError::Attacking(columns_to_rows));
        }
        Ok(QueensSolution { columns_to_rows })
    }

    pub fn n(&self) -> usize {
        self.columns_to_rows.len()
    }

    /// `n;r1,r2,...,rn`.
    pub fn to_line(&self) -> String {
        let rows: Vec<String> = self.columns_to_rows.iter().map(|r| r.to_string()).collect();
        format!("{};{}", self.n(), rows.join(","))
    }
}

fn non_attacking(p: &[u64]) -> bool {
    let sums: BTreeSet<i64> = p
        .iter()
        .enumerate()
        .map(|(k, &r)| k as i64 + r as i64)
        .collect();
    let diffs: BTreeSet<i64> = p
        .iter()
        .enumerate()
        .map(|(k, &r)| k as i64 - r as i64)
        .collect();
    sums.len() == p.len() && diffs.len() == p.len()
}

/// Reads the column list of an answer to `initial_query(n)`.
pub fn extract_solution(ans: &Answer, n: u64) -> Result<QueensSolution, QueensError> {
    let atom = ans
        .instantiated_query
        .atoms
        .first()
        .filter(|a| &*a.pred == "pqs" && a.arity() == 4)
        .ok_or(QueensError::NotAQueensAnswer)?;
    let cols = &atom.args[1];
    if !cols.is_ground() {
        return Err(QueensError::NonGround(cols.to_string()));
    }
    let rows: Option<Vec<u64>> = cols
        .list_items()
        .and_then(|items| items.iter().map(Term::numeral_value).collect());
    match rows {
        Some(r) if r.len() as u64 == n => QueensSolution::new(r),
        _ => Err(QueensError::NotPermutation(cols.to_string(), n)),
    }
}

/// All solutions by checking every permutation of `1..=n`.
pub fn brute_force(n: u64) -> BTreeSet<QueensSolution> {
    assert!((1..=10).contains(&n), "oracle supports 1 <= n <= 10");
    let mut out = BTreeSet::new();
    let mut perm: Vec<u64> = (1..=n).collect();
    loop {
        if non_attacking(&perm) {
            out.insert(QueensSolution {
                columns_to_rows: perm.clone(),
            });
        }
        if !next_permutation(&mut perm) {
            return out;
        }
    }
}

fn next_permutation(v: &mut [u64]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len())
        .rev()
        .find(|&j| v[j] > v[i - 1])
        .expect("pivot exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Rows top to bottom, columns left to right; `Q` marks a queen.
pub fn render_board(sol: &QueensSolution) -> String {
    let n = sol.n();
    let mut out = String::new();
    for row in 1..=n as u64 {
        let line: Vec<&str> = sol
            .columns_to_rows
            .iter()
            .map(|&r| if r == row { "Q" } else { "." })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
