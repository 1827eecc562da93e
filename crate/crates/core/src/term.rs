//! First-order terms, atoms, clauses and the signature they live in.
//!
//! Terms are immutable and cheap to clone: compound arguments sit behind an
//! `Arc<[Term]>`, symbols are `Arc<str>`. Variables are identified by a
//! process-unique id; the name is only kept for printing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use crate::probe::{self, Syntactic};

pub type Sym = Arc<str>;

pub const ZERO: &str = "0";
pub const SUCC: &str = "s";
pub const NIL: &str = "nil";
pub const CONS: &str = "cons";

static NEXT_VAR: AtomicU32 = AtomicU32::new(1);

/// A logic variable. Equality and hashing use the id only.
#[derive(Clone)]
pub struct Var {
    id: u32,
    name: Option<Sym>,
}

impl Var {
    /// A fresh anonymous variable.
    pub fn fresh() -> Var {
        Var {
            id: NEXT_VAR.fetch_add(1, Ordering::Relaxed),
            name: None,
        }
    }

    pub fn named(name: &str) -> Var {
        Var {
            id: NEXT_VAR.fetch_add(1, Ordering::Relaxed),
            name: Some(name.into()),
        }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Var {}

impl std::hash::Hash for Var {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "_G{}", self.id),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    App(Sym, Arc<[Term]>),
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn constant(name: &str) -> Term {
        Term::App(name.into(), Arc::from(Vec::new()))
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.into(), args.into())
    }

    pub fn app_sym(name: Sym, args: Vec<Term>) -> Term {
        Term::App(name, args.into())
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::app(CONS, vec![head, tail])
    }

    /// `[e1, ..., en | tail]`.
    pub fn list_with_tail(items: impl IntoIterator<Item = Term>, tail: Term) -> Term {
        let items: Vec<Term> = items.into_iter().collect();
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc))
    }

    pub fn list(items: impl IntoIterator<Item = Term>) -> Term {
        Term::list_with_tail(items, Term::nil())
    }

    /// The numeral s^n(0).
    pub fn numeral(n: u64) -> Term {
        let mut t = Term::constant(ZERO);
        for _ in 0..n {
            t = Term::app(SUCC, vec![t]);
        }
        t
    }

    /// Partial inverse of [`Term::numeral`].
    pub fn numeral_value(&self) -> Option<u64> {
        probe::infallible(probe::numeral_value(&Syntactic, self))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Var(_) => None,
            Term::App(f, args) => Some((f, args.len())),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Constructor nesting depth: constants (and variables) have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| 1 + a.depth()).max().unwrap_or(0),
        }
    }

    pub fn occurs(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::App(_, args) => args.iter().any(|a| a.occurs(v)),
        }
    }

    /// Variables in order of first occurrence, without repetition.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub(crate) fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Number of symbol occurrences (variables count 1).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn kth_member(&self, k: usize) -> Option<Term> {
        probe::infallible(probe::kth_member(&Syntactic, self, k))
    }

    pub fn members_with_index(&self) -> Vec<(usize, Term)> {
        probe::infallible(probe::members(&Syntactic, self))
            .into_iter()
            .enumerate()
            .map(|(i, t)| (i + 1, t))
            .collect()
    }

    pub fn is_proper_list(&self) -> bool {
        probe::infallible(probe::list_length(&Syntactic, self)).is_some()
    }

    pub fn list_length(&self) -> Option<usize> {
        probe::infallible(probe::list_length(&Syntactic, self))
    }

    /// Proper list whose members are pairwise syntactically different.
    pub fn distinct_members(&self) -> bool {
        probe::infallible(probe::distinct_members(&Syntactic, self))
    }

    /// Members of a proper list, `None` otherwise.
    pub fn list_items(&self) -> Option<Vec<Term>> {
        self.is_proper_list()
            .then(|| probe::infallible(probe::members(&Syntactic, self)))
    }

    /// Structural key identifying the term up to variable renaming.
    pub fn variant_key(&self) -> String {
        let mut seen = Vec::new();
        let mut out = String::new();
        self.write_variant(&mut seen, &mut out);
        out
    }

    fn write_variant(&self, seen: &mut Vec<Var>, out: &mut String) {
        match self {
            Term::Var(v) => {
                let idx = match seen.iter().position(|w| w == v) {
                    Some(i) => i,
                    None => {
                        seen.push(v.clone());
                        seen.len() - 1
                    }
                };
                out.push_str(&format!("_V{idx}"));
            }
            Term::App(f, args) => {
                out.push_str(f);
                if !args.is_empty() {
                    out.push('(');
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            out.push(',');
                        }
                        a.write_variant(seen, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical printing: numerals in decimal, lists in bracket syntax.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                if let Some(n) = self.numeral_value() {
                    return write!(f, "{n}");
                }
                match (&**name, args.len()) {
                    (NIL, 0) => write!(f, "[]"),
                    (CONS, 2) => {
                        write!(f, "[{}", args[0])?;
                        let mut rest = &args[1];
                        loop {
                            match rest {
                                Term::App(n, a) if &**n == CONS && a.len() == 2 => {
                                    write!(f, ",{}", a[0])?;
                                    rest = &a[1];
                                }
                                Term::App(n, a) if &**n == NIL && a.is_empty() => break,
                                other => {
                                    write!(f, "|{other}")?;
                                    break;
                                }
                            }
                        }
                        write!(f, "]")
                    }
                    (_, 0) => write!(f, "{name}"),
                    _ => {
                        write!(f, "{name}(")?;
                        for (i, a) in args.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            write!(f, "{a}")?;
                        }
                        write!(f, ")")
                    }
                }
            }
        }
    }
}

/// A predicate applied to arguments.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: Sym,
    pub args: Arc<[Term]>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Atom {
        Atom {
            pred: pred.into(),
            args: args.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// The atom viewed as a term with the predicate as principal functor.
    pub fn as_term(&self) -> Term {
        Term::App(self.pred.clone(), self.args.clone())
    }

    pub fn from_term(t: &Term) -> Option<Atom> {
        match t {
            Term::Var(_) => None,
            Term::App(f, args) => Some(Atom {
                pred: f.clone(),
                args: args.clone(),
            }),
        }
    }

    /// Largest argument depth (0 for propositional atoms).
    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// A definite clause `head :- body`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(head: Atom, body: Vec<Atom>) -> Clause {
        Clause { head, body }
    }

    pub fn fact(head: Atom) -> Clause {
        Clause { head, body: vec![] }
    }

    pub fn is_unit(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(Atom::is_ground)
    }

    /// Variables in order of first occurrence (head first).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in std::iter::once(&self.head).chain(&self.body) {
            a.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(self.body.iter())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            write!(f, " :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        write!(f, ".")
    }
}

/// A sequence of definite clauses, kept in source order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

impl Program {
    pub fn new(clauses: Vec<Clause>) -> Program {
        Program { clauses }
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Predicate name/arity pairs defined or used by the program.
    pub fn predicates(&self) -> BTreeSet<(Sym, usize)> {
        self.clauses
            .iter()
            .flat_map(|c| c.atoms())
            .map(|a| (a.pred.clone(), a.arity()))
            .collect()
    }

    /// Clauses whose head predicate is `pred/arity`, restricted to a sub-program.
    pub fn fragment(&self, preds: &[&str]) -> Program {
        Program::new(
            self.clauses
                .iter()
                .filter(|c| preds.contains(&&*c.head.pred))
                .cloned()
                .collect(),
        )
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A conjunction of atoms.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Query {
    pub atoms: Vec<Atom>,
}

impl Query {
    pub fn new(atoms: Vec<Atom>) -> Query {
        Query { atoms }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        for a in &self.atoms {
            a.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        out
    }

    /// Key identifying the query up to variable renaming.
    pub fn variant_key(&self) -> String {
        let as_term = Term::app(",", self.atoms.iter().map(Atom::as_term).collect());
        as_term.variant_key()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// The function symbols of the Herbrand universe, name -> arity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signature {
    symbols: BTreeMap<Sym, usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol {0} declared with arities {1} and {2}")]
    Conflict(String, usize, usize),
    #[error("signature must contain 0/0, s/1, nil/0 and cons/2")]
    MissingCore,
    #[error("signature line {line}: expected name/arity, got {text:?}")]
    BadLine { line: usize, text: String },
}

impl Signature {
    /// `{0/0, s/1, nil/0, cons/2}` only.
    pub fn minimal() -> Signature {
        Signature::from_symbols([(ZERO, 0), (SUCC, 1), (NIL, 0), (CONS, 2)])
            .expect("core symbols are consistent")
    }

    /// The core symbols plus the filler constants a..f.
    pub fn default_queens() -> Signature {
        let mut sig = Signature::minimal();
        for c in ["a", "b", "c", "d", "e", "f"] {
            sig.symbols.insert(c.into(), 0);
        }
        sig
    }

    pub fn from_symbols<'a>(
        symbols: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<Signature, SignatureError> {
        let mut map: BTreeMap<Sym, usize> = BTreeMap::new();
        for (name, arity) in symbols {
            if let Some(&old) = map.get(name) {
                if old != arity {
                    return Err(SignatureError::Conflict(name.to_string(), old, arity));
                }
            }
            map.insert(name.into(), arity);
        }
        let sig = Signature { symbols: map };
        for (name, arity) in [(ZERO, 0), (SUCC, 1), (NIL, 0), (CONS, 2)] {
            if sig.arity(name) != Some(arity) {
                return Err(SignatureError::MissingCore);
            }
        }
        Ok(sig)
    }

    /// Parses `name/arity` lines; `%` starts a comment.
    pub fn parse(text: &str) -> Result<Signature, SignatureError> {
        let mut syms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('%').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || SignatureError::BadLine {
                line: i + 1,
                text: raw.to_string(),
            };
            let (name, arity) = line.rsplit_once('/').ok_or_else(bad)?;
            let arity: usize = arity.trim().parse().map_err(|_| bad())?;
            let name = match name.trim() {
                "[]" => NIL,
                "" => return Err(bad()),
                n => n,
            };
            syms.push((name.to_string(), arity));
        }
        Signature::from_symbols(syms.iter().map(|(n, a)| (n.as_str(), *a)))
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    /// Constants sorted by name.
    pub fn constants(&self) -> Vec<Sym> {
        self.symbols
            .iter()
            .filter(|(_, &a)| a == 0)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Symbols of positive arity sorted by name.
    pub fn compounds(&self) -> Vec<(Sym, usize)> {
        self.symbols
            .iter()
            .filter(|(_, &a)| a > 0)
            .map(|(s, &a)| (s.clone(), a))
            .collect()
    }

    /// All symbols sorted by name.
    pub fn symbols(&self) -> impl Iterator<Item = (&Sym, usize)> {
        self.symbols.iter().map(|(s, &a)| (s, a))
    }

    /// Whether every function symbol of `t` is declared with the right arity.
    pub fn admits(&self, t: &Term) -> bool {
        match t {
            Term::Var(_) => true,
            Term::App(f, args) => {
                self.arity(f) == Some(args.len()) && args.iter().all(|a| self.admits(a))
            }
        }
    }
}

impl Default for Signature {
    fn default() -> Self {
        Signature::default_queens()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols().map(|(s, a)| format!("{s}/{a}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
