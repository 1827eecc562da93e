//! Reader for the Prolog subset: definite clauses, lists, decimal numerals.
//!
//! ```text
//! clause ::= atom "." | atom ":-" atom ("," atom)* "."
//! term   ::= Var | "_" | digits | name ["(" term ("," term)* ")"]
//!          | "[" "]" | "[" term ("," term)* ["|" term] "]"
//! ```
//! Decimal integers are desugared to `s^n(0)`; `%` starts a line comment.

use std::collections::HashMap;
use std::fmt;

use crate::term::{Atom, Clause, Program, Query, Signature, Sym, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownSymbol(String),
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    PredicateArity {
        name: String,
        first: usize,
        found: usize,
    },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::UnknownSymbol(s) => write!(f, "function symbol {s} not in signature"),
            ParseErrorKind::ArityMismatch {
                name,
                expected,
                found,
            } => write!(
                f,
                "{name} has arity {expected} in the signature, used with {found} arguments"
            ),
            ParseErrorKind::PredicateArity { name, first, found } => {
                write!(f, "predicate {name} used with arity {first} and {found}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Var(String),
    Int(u64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar,
    Comma,
    Neck,
    Dot,
    Eof,
}

#[derive(Clone)]
struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, m: String| ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(m),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' | ')' | '[' | ']' | '|' | ',' | '.' => {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '|' => Tok::Bar,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                advance(1, &mut i);
                out.push(Lexed {
                    tok,
                    line: l0,
                    column: c0,
                });
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    advance(2, &mut i);
                    out.push(Lexed {
                        tok: Tok::Neck,
                        line: l0,
                        column: c0,
                    });
                } else {
                    return Err(err(l0, c0, "expected ':-'".into()));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let n = s
                    .parse::<u64>()
                    .map_err(|_| err(l0, c0, format!("integer {s} out of range")))?;
                out.push(Lexed {
                    tok: Tok::Int(n),
                    line: l0,
                    column: c0,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = if c.is_uppercase() || c == '_' {
                    Tok::Var(s)
                } else {
                    Tok::Name(s)
                };
                out.push(Lexed {
                    tok,
                    line: l0,
                    column: c0,
                });
            }
            other => return Err(err(l0, c0, format!("unexpected character {other:?}"))),
        }
    }
    out.push(Lexed {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Recursive-descent reader over one input text.
pub struct Parser<'s> {
    toks: Vec<Lexed>,
    pos: usize,
    sig: &'s Signature,
    scope: HashMap<String, Var>,
    pred_arity: HashMap<Sym, usize>,
}

impl<'s> Parser<'s> {
    pub fn new(text: &str, sig: &'s Signature) -> Result<Parser<'s>, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            sig,
            scope: HashMap::new(),
            pred_arity: HashMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn syntax(&self, m: impl Into<String>) -> ParseError {
        self.error(ParseErrorKind::Syntax(m.into()))
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.pos;
        match self.next() {
            Tok::Var(name) => {
                if name == "_" {
                    return Ok(Term::Var(Var::fresh()));
                }
                let v = self
                    .scope
                    .entry(name.clone())
                    .or_insert_with(|| Var::named(&name))
                    .clone();
                Ok(Term::Var(v))
            }
            Tok::Int(n) => Ok(Term::numeral(n)),
            Tok::Name(name) => {
                let args = self.arguments()?;
                let declared = self.sig.arity(&name);
                match declared {
                    None => {
                        self.pos = at;
                        Err(self.error(ParseErrorKind::UnknownSymbol(name)))
                    }
                    Some(a) if a != args.len() => {
                        self.pos = at;
                        Err(self.error(ParseErrorKind::ArityMismatch {
                            name,
                            expected: a,
                            found: args.len(),
                        }))
                    }
                    Some(_) => Ok(Term::app(&name, args)),
                }
            }
            Tok::LBrack => {
                if *self.peek() == Tok::RBrack {
                    self.next();
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    items.push(self.term()?);
                }
                let tail = if *self.peek() == Tok::Bar {
                    self.next();
                    self.term()?
                } else {
                    Term::nil()
                };
                self.expect(Tok::RBrack, "']'")?;
                Ok(Term::list_with_tail(items, tail))
            }
            other => {
                self.pos = at;
                Err(self.syntax(format!("expected a term, found {other:?}")))
            }
        }
    }

    fn arguments(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.next();
            args.push(self.term()?);
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(args)
    }

    pub fn atom(&mut self) -> Result<Atom, ParseError> {
        let at = self.pos;
        match self.next() {
            Tok::Name(name) => {
                let args = self.arguments()?;
                let sym: Sym = name.as_str().into();
                if let Some(&first) = self.pred_arity.get(&sym) {
                    if first != args.len() {
                        self.pos = at;
                        return Err(self.error(ParseErrorKind::PredicateArity {
                            name,
                            first,
                            found: args.len(),
                        }));
                    }
                } else {
                    self.pred_arity.insert(sym.clone(), args.len());
                }
                Ok(Atom {
                    pred: sym,
                    args: args.into(),
                })
            }
            other => {
                self.pos = at;
                Err(self.syntax(format!("expected an atom, found {other:?}")))
            }
        }
    }

    fn conjunction(&mut self) -> Result<Vec<Atom>, ParseError> {
        let mut atoms = vec![self.atom()?];
        while *self.peek() == Tok::Comma {
            self.next();
            atoms.push(self.atom()?);
        }
        Ok(atoms)
    }

    pub fn clause(&mut self) -> Result<Clause, ParseError> {
        self.scope.clear();
        let head = self.atom()?;
        let body = if *self.peek() == Tok::Neck {
            self.next();
            self.conjunction()?
        } else {
            Vec::new()
        };
        self.expect(Tok::Dot, "'.'")?;
        Ok(Clause::new(head, body))
    }

    pub fn program(&mut self) -> Result<Program, ParseError> {
        let mut clauses = Vec::new();
        while !self.at_eof() {
            clauses.push(self.clause()?);
        }
        Ok(Program::new(clauses))
    }

    /// A conjunction of atoms with an optional final `.`.
    pub fn query(&mut self) -> Result<Query, ParseError> {
        self.scope.clear();
        let atoms = self.conjunction()?;
        if *self.peek() == Tok::Dot {
            self.next();
        }
        if !self.at_eof() {
            return Err(self.syntax("trailing input after query"));
        }
        Ok(Query::new(atoms))
    }
}

pub fn parse_program(text: &str, sig: &Signature) -> Result<Program, ParseError> {
    Parser::new(text, sig)?.program()
}

pub fn parse_query(text: &str, sig: &Signature) -> Result<Query, ParseError> {
    Parser::new(text, sig)?.query()
}

pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let t = p.term()?;
    if !p.at_eof() {
        return Err(p.syntax("trailing input after term"));
    }
    Ok(t)
}

pub fn parse_atom(text: &str, sig: &Signature) -> Result<Atom, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let a = p.atom()?;
    if *p.peek() == Tok::Dot {
        p.next();
    }
    if !p.at_eof() {
        return Err(p.syntax("trailing input after atom"));
    }
    Ok(a)
}
