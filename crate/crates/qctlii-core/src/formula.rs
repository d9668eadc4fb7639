//! Formula AST, concrete syntax, and syntactic analyses.
//!
//! The surface grammar (ASCII, whitespace-insensitive):
//!
//! ```text
//! state  ::= "true" | "false" | ident | "!" state | state ("&"|"|"|"->") state
//!          | "(" state ")" | ("E"|"A") path
//!          | "exists" ident "^{" [nat {"," nat}] "}" "." state
//!          | "exists" ident "." state
//! path   ::= state | "!" path | path ("&"|"|"|"->") path | "X" path
//!          | path "U" path | "F" path | "G" path
//! ```
//!
//! Precedence: unary > `U` > `&` > `|` > `->`, binaries right-associative.
//! `E`, `A` and `exists ... .` extend as far right as possible.
//!
//! Derived forms are desugared at parse time: `false` is `!true`,
//! `a -> b` is `!a | b`, `F p` is `true U p`, `G p` is `!F !p`,
//! `A p` is `!E !p`, and path-level `&` is rewritten by De Morgan.
//! Plain `exists p. f` is sugar for `exists p^{[n]}. f` with `n` taken from
//! the model at check time; it parses to [`Observation::Full`] and is
//! resolved by [`resolve_full`].

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::kripke::LocalAlphabets;

/// The set of local-state coordinates a quantifier can see.
///
/// `Full` stands for `[n]` with `n` not yet known (plain `exists p.`);
/// resolve it with [`resolve_full`] before semantic analyses that need a
/// concrete set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observation {
    Full,
    Set(BTreeSet<usize>),
}

impl Observation {
    /// An explicit observation. All indices must be >= 1.
    pub fn set<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let s: BTreeSet<usize> = indices.into_iter().collect();
        assert!(!s.contains(&0), "observation indices start at 1");
        Observation::Set(s)
    }

    pub fn empty() -> Self {
        Observation::Set(BTreeSet::new())
    }

    /// The concrete coordinate set, intersected with `[n]`.
    pub fn resolved(&self, n: usize) -> BTreeSet<usize> {
        match self {
            Observation::Full => (1..=n).collect(),
            Observation::Set(s) => s.iter().copied().filter(|&i| i <= n).collect(),
        }
    }

    /// Subset test. `Full` is treated as a superset of everything and a
    /// subset only of `Full`; resolve first if that is too conservative.
    pub fn is_subset(&self, other: &Observation) -> bool {
        match (self, other) {
            (_, Observation::Full) => true,
            (Observation::Full, Observation::Set(_)) => false,
            (Observation::Set(a), Observation::Set(b)) => a.is_subset(b),
        }
    }

    /// Number of indices; the contribution of `o` to `|exists p^o. f|`.
    /// Panics on an unresolved `Full`.
    pub fn len(&self) -> usize {
        match self {
            Observation::Full => panic!("formula size of an unresolved plain quantifier"),
            Observation::Set(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Observation::Set(s) if s.is_empty())
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Full => Ok(()),
            Observation::Set(s) => {
                write!(f, "^{{")?;
                for (k, i) in s.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{i}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// State formulas of quantified CTL* with imperfect information.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateFormula {
    True,
    Prop(String),
    Not(Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    /// `E psi`
    ExistsPath(Box<PathFormula>),
    /// `exists p^o. f`
    Exists {
        prop: String,
        obs: Observation,
        body: Box<StateFormula>,
    },
}

/// Path formulas; state formulas embed through [`PathFormula::State`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PathFormula {
    State(Box<StateFormula>),
    Not(Box<PathFormula>),
    Or(Box<PathFormula>, Box<PathFormula>),
    Next(Box<PathFormula>),
    Until(Box<PathFormula>, Box<PathFormula>),
}

// Smart constructors. These keep ASTs free of double negations, so that
// desugared operators come out in the shape the rest of the crate (and the
// pretty-printer round-trip) expects.

pub fn snot(f: StateFormula) -> StateFormula {
    match f {
        StateFormula::Not(g) => *g,
        g => StateFormula::Not(Box::new(g)),
    }
}

pub fn sor(a: StateFormula, b: StateFormula) -> StateFormula {
    StateFormula::Or(Box::new(a), Box::new(b))
}

pub fn sand(a: StateFormula, b: StateFormula) -> StateFormula {
    StateFormula::And(Box::new(a), Box::new(b))
}

pub fn simp(a: StateFormula, b: StateFormula) -> StateFormula {
    sor(snot(a), b)
}

pub fn embed(f: StateFormula) -> PathFormula {
    PathFormula::State(Box::new(f))
}

pub fn pnot(p: PathFormula) -> PathFormula {
    match p {
        PathFormula::Not(q) => *q,
        PathFormula::State(f) => embed(snot(*f)),
        q => PathFormula::Not(Box::new(q)),
    }
}

pub fn por(a: PathFormula, b: PathFormula) -> PathFormula {
    // A disjunction of pure state formulas is a state formula.
    match (a, b) {
        (PathFormula::State(a), PathFormula::State(b)) => embed(sor(*a, *b)),
        (a, b) => PathFormula::Or(Box::new(a), Box::new(b)),
    }
}

pub fn pand(a: PathFormula, b: PathFormula) -> PathFormula {
    match (a, b) {
        (PathFormula::State(a), PathFormula::State(b)) => embed(sand(*a, *b)),
        (a, b) => pnot(por(pnot(a), pnot(b))),
    }
}

pub fn pnext(p: PathFormula) -> PathFormula {
    PathFormula::Next(Box::new(p))
}

pub fn puntil(a: PathFormula, b: PathFormula) -> PathFormula {
    PathFormula::Until(Box::new(a), Box::new(b))
}

/// `F p := true U p`
pub fn pfinally(p: PathFormula) -> PathFormula {
    puntil(embed(StateFormula::True), p)
}

/// `G p := !F !p`
pub fn pglobally(p: PathFormula) -> PathFormula {
    pnot(pfinally(pnot(p)))
}

/// `A psi := !E !psi`
pub fn aquant(p: PathFormula) -> StateFormula {
    snot(StateFormula::ExistsPath(Box::new(pnot(p))))
}

pub fn equant(p: PathFormula) -> StateFormula {
    StateFormula::ExistsPath(Box::new(p))
}

pub fn prop(name: &str) -> StateFormula {
    StateFormula::Prop(name.to_owned())
}

pub fn exists(p: &str, obs: Observation, body: StateFormula) -> StateFormula {
    StateFormula::Exists {
        prop: p.to_owned(),
        obs,
        body: Box::new(body),
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing

const PREC_IMP: u8 = 0; // reserved by the grammar; the AST never holds ->
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNTIL: u8 = 3;
const PREC_UNARY: u8 = 4;
const _: () = {
    let _ = PREC_IMP;
};

fn fmt_state(sf: &StateFormula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match sf {
        StateFormula::True => write!(f, "true"),
        StateFormula::Prop(p) => write!(f, "{p}"),
        StateFormula::Not(x) => {
            write!(f, "!")?;
            fmt_state(x, PREC_UNARY + 1, f)
        }
        StateFormula::Or(a, b) => {
            let parens = prec > PREC_OR;
            if parens {
                write!(f, "(")?;
            }
            fmt_state(a, PREC_OR + 1, f)?;
            write!(f, " | ")?;
            fmt_state(b, PREC_OR, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        StateFormula::And(a, b) => {
            let parens = prec > PREC_AND;
            if parens {
                write!(f, "(")?;
            }
            fmt_state(a, PREC_AND + 1, f)?;
            write!(f, " & ")?;
            fmt_state(b, PREC_AND, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        StateFormula::ExistsPath(p) => {
            // E swallows maximally; parenthesize unless nothing follows.
            let parens = prec > 0;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "E ")?;
            fmt_path(p, 0, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        StateFormula::Exists { prop, obs, body } => {
            let parens = prec > 0;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "exists {prop}{obs}. ")?;
            fmt_state(body, 0, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

fn fmt_path(pf: &PathFormula, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match pf {
        PathFormula::State(s) => fmt_state(s, prec, f),
        PathFormula::Not(x) => {
            write!(f, "!")?;
            fmt_path(x, PREC_UNARY + 1, f)
        }
        PathFormula::Or(a, b) => {
            let parens = prec > PREC_OR;
            if parens {
                write!(f, "(")?;
            }
            fmt_path(a, PREC_OR + 1, f)?;
            write!(f, " | ")?;
            fmt_path(b, PREC_OR, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        PathFormula::Next(x) => {
            write!(f, "X ")?;
            fmt_path(x, PREC_UNARY + 1, f)
        }
        PathFormula::Until(a, b) => {
            let parens = prec > PREC_UNTIL;
            if parens {
                write!(f, "(")?;
            }
            fmt_path(a, PREC_UNTIL + 1, f)?;
            write!(f, " U ")?;
            fmt_path(b, PREC_UNTIL, f)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_state(self, 0, f)
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_path(self, 0, f)
    }
}

// ---------------------------------------------------------------------------
// Lexer and parser

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(usize),
    True,
    False,
    ExistsKw,
    E,
    A,
    X,
    U,
    F,
    G,
    Bang,
    Amp,
    Pipe,
    Arrow,
    LParen,
    RParen,
    Caret,
    LBrace,
    RBrace,
    Comma,
    Dot,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.to_owned(),
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match c {
                b'!' => {
                    self.bump();
                    Tok::Bang
                }
                b'&' => {
                    self.bump();
                    Tok::Amp
                }
                b'|' => {
                    self.bump();
                    Tok::Pipe
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'^' => {
                    self.bump();
                    Tok::Caret
                }
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'.' => {
                    self.bump();
                    Tok::Dot
                }
                b'-' => {
                    self.bump();
                    if self.pos < self.src.len() && self.src[self.pos] == b'>' {
                        self.bump();
                        Tok::Arrow
                    } else {
                        return Err(self.err("expected '>' after '-'"));
                    }
                }
                b'0'..=b'9' => {
                    let mut v: usize = 0;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        v = v
                            .checked_mul(10)
                            .and_then(|v| v.checked_add((self.src[self.pos] - b'0') as usize))
                            .ok_or_else(|| self.err("number too large"))?;
                        self.bump();
                    }
                    Tok::Nat(v)
                }
                c if c.is_ascii_alphabetic() || c == b'_' || c == b'@' => {
                    let start = self.pos;
                    while self.pos < self.src.len() {
                        let c = self.src[self.pos];
                        if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' || c == b'@' {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let word = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match word {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "exists" => Tok::ExistsKw,
                        "E" => Tok::E,
                        "A" => Tok::A,
                        "X" => Tok::X,
                        "U" => Tok::U,
                        "F" => Tok::F,
                        "G" => Tok::G,
                        _ => Tok::Ident(word.to_owned()),
                    }
                }
                _ => return Err(self.err(&format!("unexpected character '{}'", c as char))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: &str) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            msg: msg.to_owned(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    // state ::= imp-level expression of state formulas
    fn state_expr(&mut self, level: u8) -> Result<StateFormula, ParseError> {
        if level >= PREC_UNARY {
            return self.state_unary();
        }
        let mut lhs = self.state_expr(level + 1)?;
        loop {
            match (level, self.peek()) {
                (PREC_OR, Some(Tok::Pipe)) => {
                    self.pos += 1;
                    let rhs = self.state_expr(level)?;
                    lhs = sor(lhs, rhs);
                }
                (PREC_AND, Some(Tok::Amp)) => {
                    self.pos += 1;
                    let rhs = self.state_expr(level)?;
                    lhs = sand(lhs, rhs);
                }
                (PREC_IMP, Some(Tok::Arrow)) => {
                    self.pos += 1;
                    let rhs = self.state_expr(level)?;
                    lhs = simp(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn state_unary(&mut self) -> Result<StateFormula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(snot(self.state_unary()?))
            }
            _ => self.state_primary(),
        }
    }

    fn state_primary(&mut self) -> Result<StateFormula, ParseError> {
        match self.next() {
            Some(Tok::True) => Ok(StateFormula::True),
            Some(Tok::False) => Ok(snot(StateFormula::True)),
            Some(Tok::Ident(p)) => Ok(StateFormula::Prop(p)),
            Some(Tok::LParen) => {
                let f = self.state_expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(f)
            }
            Some(Tok::E) => Ok(equant(self.path_expr(0)?)),
            Some(Tok::A) => Ok(aquant(self.path_expr(0)?)),
            Some(Tok::ExistsKw) => self.exists_tail(),
            Some(_) => {
                self.pos -= 1;
                Err(self.err("expected a state formula"))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn exists_tail(&mut self) -> Result<StateFormula, ParseError> {
        let p = match self.next() {
            Some(Tok::Ident(p)) => p,
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return Err(self.err("expected a proposition name after 'exists'"));
            }
        };
        let obs = if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            self.expect(Tok::LBrace, "'{' after '^'")?;
            let mut indices = BTreeSet::new();
            if self.peek() != Some(&Tok::RBrace) {
                loop {
                    match self.next() {
                        Some(Tok::Nat(0)) => {
                            self.pos -= 1;
                            return Err(self.err("observation indices start at 1"));
                        }
                        Some(Tok::Nat(i)) => {
                            indices.insert(i);
                        }
                        _ => {
                            self.pos = self.pos.saturating_sub(1);
                            return Err(self.err("expected an index in observation"));
                        }
                    }
                    match self.peek() {
                        Some(Tok::Comma) => {
                            self.pos += 1;
                        }
                        Some(Tok::RBrace) => break,
                        _ => return Err(self.err("unterminated observation: expected ',' or '}'")),
                    }
                }
            }
            self.expect(Tok::RBrace, "'}'")?;
            Observation::Set(indices)
        } else {
            Observation::Full
        };
        self.expect(Tok::Dot, "'.' after quantifier")?;
        let body = self.state_expr(0)?;
        Ok(StateFormula::Exists {
            prop: p,
            obs,
            body: Box::new(body),
        })
    }

    fn path_expr(&mut self, level: u8) -> Result<PathFormula, ParseError> {
        if level > PREC_UNARY {
            unreachable!()
        }
        if level == PREC_UNARY {
            return self.path_unary();
        }
        let mut lhs = self.path_expr(level + 1)?;
        loop {
            match (level, self.peek()) {
                (PREC_UNTIL, Some(Tok::U)) => {
                    self.pos += 1;
                    let rhs = self.path_expr(level)?;
                    lhs = puntil(lhs, rhs);
                }
                (PREC_AND, Some(Tok::Amp)) => {
                    self.pos += 1;
                    let rhs = self.path_expr(level)?;
                    lhs = pand(lhs, rhs);
                }
                (PREC_OR, Some(Tok::Pipe)) => {
                    self.pos += 1;
                    let rhs = self.path_expr(level)?;
                    lhs = por(lhs, rhs);
                }
                (PREC_IMP, Some(Tok::Arrow)) => {
                    self.pos += 1;
                    let rhs = self.path_expr(level)?;
                    lhs = por(pnot(lhs), rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn path_unary(&mut self) -> Result<PathFormula, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(pnot(self.path_unary()?))
            }
            Some(Tok::X) => {
                self.pos += 1;
                Ok(pnext(self.path_unary()?))
            }
            Some(Tok::F) => {
                self.pos += 1;
                Ok(pfinally(self.path_unary()?))
            }
            Some(Tok::G) => {
                self.pos += 1;
                Ok(pglobally(self.path_unary()?))
            }
            _ => self.path_primary(),
        }
    }

    fn path_primary(&mut self) -> Result<PathFormula, ParseError> {
        match self.peek() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let p = self.path_expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(p)
            }
            Some(Tok::True) => {
                self.pos += 1;
                Ok(embed(StateFormula::True))
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(embed(snot(StateFormula::True)))
            }
            Some(Tok::Ident(_)) => {
                if let Some(Tok::Ident(p)) = self.next() {
                    Ok(embed(StateFormula::Prop(p)))
                } else {
                    unreachable!()
                }
            }
            Some(Tok::E) => {
                self.pos += 1;
                Ok(embed(equant(self.path_expr(0)?)))
            }
            Some(Tok::A) => {
                self.pos += 1;
                Ok(embed(aquant(self.path_expr(0)?)))
            }
            Some(Tok::ExistsKw) => {
                self.pos += 1;
                Ok(embed(self.exists_tail()?))
            }
            _ => Err(self.err("expected a path formula")),
        }
    }
}

/// Parse a state formula from the surface syntax.
pub fn parse_formula(text: &str) -> Result<StateFormula, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    if toks.is_empty() {
        return Err(ParseError {
            line: 1,
            col: 1,
            msg: "empty input".to_owned(),
        });
    }
    let mut p = Parser { toks, pos: 0 };
    let f = p.state_expr(0)?;
    if p.peek().is_some() {
        Err(p.err("trailing input after formula"))
    } else {
        Ok(f)
    }
}

// ---------------------------------------------------------------------------
// Syntactic analyses

/// Inductive formula size; the quantifier case counts `1 + |o| + |f|`.
pub fn formula_size(f: &StateFormula) -> usize {
    match f {
        StateFormula::True | StateFormula::Prop(_) => 1,
        StateFormula::Not(x) => 1 + formula_size(x),
        StateFormula::Or(a, b) | StateFormula::And(a, b) => 1 + formula_size(a) + formula_size(b),
        StateFormula::ExistsPath(p) => 1 + path_size(p),
        StateFormula::Exists { obs, body, .. } => 1 + obs.len() + formula_size(body),
    }
}

pub fn path_size(p: &PathFormula) -> usize {
    match p {
        PathFormula::State(f) => formula_size(f),
        PathFormula::Not(x) | PathFormula::Next(x) => 1 + path_size(x),
        PathFormula::Or(a, b) | PathFormula::Until(a, b) => 1 + path_size(a) + path_size(b),
    }
}

/// Replace every `Observation::Full` by the concrete `[n]`.
pub fn resolve_full(f: &StateFormula, n: usize) -> StateFormula {
    fn go_s(f: &StateFormula, n: usize) -> StateFormula {
        match f {
            StateFormula::True => StateFormula::True,
            StateFormula::Prop(p) => StateFormula::Prop(p.clone()),
            StateFormula::Not(x) => StateFormula::Not(Box::new(go_s(x, n))),
            StateFormula::Or(a, b) => StateFormula::Or(Box::new(go_s(a, n)), Box::new(go_s(b, n))),
            StateFormula::And(a, b) => {
                StateFormula::And(Box::new(go_s(a, n)), Box::new(go_s(b, n)))
            }
            StateFormula::ExistsPath(p) => StateFormula::ExistsPath(Box::new(go_p(p, n))),
            StateFormula::Exists { prop, obs, body } => StateFormula::Exists {
                prop: prop.clone(),
                obs: Observation::Set(obs.resolved(n)),
                body: Box::new(go_s(body, n)),
            },
        }
    }
    fn go_p(p: &PathFormula, n: usize) -> PathFormula {
        match p {
            PathFormula::State(f) => PathFormula::State(Box::new(go_s(f, n))),
            PathFormula::Not(x) => PathFormula::Not(Box::new(go_p(x, n))),
            PathFormula::Or(a, b) => PathFormula::Or(Box::new(go_p(a, n)), Box::new(go_p(b, n))),
            PathFormula::Next(x) => PathFormula::Next(Box::new(go_p(x, n))),
            PathFormula::Until(a, b) => {
                PathFormula::Until(Box::new(go_p(a, n)), Box::new(go_p(b, n)))
            }
        }
    }
    go_s(f, n)
}

fn visit_state<'a>(f: &'a StateFormula, on_exists: &mut dyn FnMut(&'a str, &'a Observation)) {
    match f {
        StateFormula::True | StateFormula::Prop(_) => {}
        StateFormula::Not(x) => visit_state(x, on_exists),
        StateFormula::Or(a, b) | StateFormula::And(a, b) => {
            visit_state(a, on_exists);
            visit_state(b, on_exists);
        }
        StateFormula::ExistsPath(p) => visit_path(p, on_exists),
        StateFormula::Exists { prop, obs, body } => {
            on_exists(prop, obs);
            visit_state(body, on_exists);
        }
    }
}

fn visit_path<'a>(p: &'a PathFormula, on_exists: &mut dyn FnMut(&'a str, &'a Observation)) {
    match p {
        PathFormula::State(f) => visit_state(f, on_exists),
        PathFormula::Not(x) | PathFormula::Next(x) => visit_path(x, on_exists),
        PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
            visit_path(a, on_exists);
            visit_path(b, on_exists);
        }
    }
}

/// All observations occurring in `f`, outermost first is not guaranteed.
pub fn observations(f: &StateFormula) -> Vec<&Observation> {
    let mut out = Vec::new();
    visit_state(f, &mut |_, o| out.push(o));
    out
}

/// A quantifier pair violating the hierarchy condition: the outer
/// observation is not included in the inner one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyViolation {
    pub outer_prop: String,
    pub outer_obs: Observation,
    pub inner_prop: String,
    pub inner_obs: Observation,
}

impl fmt::Display for HierarchyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quantifier exists {}{} nests exists {}{} with a smaller observation",
            self.outer_prop, self.outer_obs, self.inner_prop, self.inner_obs
        )
    }
}

/// First violating pair, if the formula is not hierarchical.
pub fn hierarchy_violation(f: &StateFormula) -> Option<HierarchyViolation> {
    fn go_s(f: &StateFormula) -> Option<HierarchyViolation> {
        match f {
            StateFormula::True | StateFormula::Prop(_) => None,
            StateFormula::Not(x) => go_s(x),
            StateFormula::Or(a, b) | StateFormula::And(a, b) => go_s(a).or_else(|| go_s(b)),
            StateFormula::ExistsPath(p) => go_p(p),
            StateFormula::Exists { prop, obs, body } => {
                let mut bad = None;
                visit_state(body, &mut |ip, io| {
                    if bad.is_none() && !obs.is_subset(io) {
                        bad = Some(HierarchyViolation {
                            outer_prop: prop.clone(),
                            outer_obs: obs.clone(),
                            inner_prop: ip.to_owned(),
                            inner_obs: io.clone(),
                        });
                    }
                });
                bad.or_else(|| go_s(body))
            }
        }
    }
    fn go_p(p: &PathFormula) -> Option<HierarchyViolation> {
        match p {
            PathFormula::State(f) => go_s(f),
            PathFormula::Not(x) | PathFormula::Next(x) => go_p(x),
            PathFormula::Or(a, b) | PathFormula::Until(a, b) => go_p(a).or_else(|| go_p(b)),
        }
    }
    go_s(f)
}

/// True iff every inner quantifier observes at least as much as every
/// quantifier it is nested under.
pub fn is_hierarchical(f: &StateFormula) -> bool {
    hierarchy_violation(f).is_none()
}

/// `I_f`: the intersection of all observations occurring in `f`, with the
/// empty intersection defined as `[n]`.
pub fn obs_intersection(f: &StateFormula, n: usize) -> Observation {
    let obs = observations(f);
    let mut acc: BTreeSet<usize> = (1..=n).collect();
    for o in obs {
        let r = o.resolved(n);
        acc = acc.intersection(&r).copied().collect();
    }
    Observation::Set(acc)
}

/// Propositions with a free occurrence in `f`.
pub fn free_props(f: &StateFormula) -> BTreeSet<String> {
    fn go_s(f: &StateFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match f {
            StateFormula::True => {}
            StateFormula::Prop(p) => {
                if !bound.iter().any(|b| b == p) {
                    out.insert(p.clone());
                }
            }
            StateFormula::Not(x) => go_s(x, bound, out),
            StateFormula::Or(a, b) | StateFormula::And(a, b) => {
                go_s(a, bound, out);
                go_s(b, bound, out);
            }
            StateFormula::ExistsPath(p) => go_p(p, bound, out),
            StateFormula::Exists { prop, body, .. } => {
                bound.push(prop.clone());
                go_s(body, bound, out);
                bound.pop();
            }
        }
    }
    fn go_p(p: &PathFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match p {
            PathFormula::State(f) => go_s(f, bound, out),
            PathFormula::Not(x) | PathFormula::Next(x) => go_p(x, bound, out),
            PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
                go_p(a, bound, out);
                go_p(b, bound, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go_s(f, &mut Vec::new(), &mut out);
    out
}

fn all_props(f: &StateFormula) -> BTreeSet<String> {
    fn go_s(f: &StateFormula, out: &mut BTreeSet<String>) {
        match f {
            StateFormula::True => {}
            StateFormula::Prop(p) => {
                out.insert(p.clone());
            }
            StateFormula::Not(x) => go_s(x, out),
            StateFormula::Or(a, b) | StateFormula::And(a, b) => {
                go_s(a, out);
                go_s(b, out);
            }
            StateFormula::ExistsPath(p) => go_p(p, out),
            StateFormula::Exists { prop, body, .. } => {
                out.insert(prop.clone());
                go_s(body, out);
            }
        }
    }
    fn go_p(p: &PathFormula, out: &mut BTreeSet<String>) {
        match p {
            PathFormula::State(f) => go_s(f, out),
            PathFormula::Not(x) | PathFormula::Next(x) => go_p(x, out),
            PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
                go_p(a, out);
                go_p(b, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    go_s(f, &mut out);
    out
}

/// Maximum nesting depth of propositional quantifiers.
pub fn quantifier_depth(f: &StateFormula) -> usize {
    fn go_s(f: &StateFormula) -> usize {
        match f {
            StateFormula::True | StateFormula::Prop(_) => 0,
            StateFormula::Not(x) => go_s(x),
            StateFormula::Or(a, b) | StateFormula::And(a, b) => go_s(a).max(go_s(b)),
            StateFormula::ExistsPath(p) => go_p(p),
            StateFormula::Exists { body, .. } => 1 + go_s(body),
        }
    }
    fn go_p(p: &PathFormula) -> usize {
        match p {
            PathFormula::State(f) => go_s(f),
            PathFormula::Not(x) | PathFormula::Next(x) => go_p(x),
            PathFormula::Or(a, b) | PathFormula::Until(a, b) => go_p(a).max(go_p(b)),
        }
    }
    go_s(f)
}

/// Quantified versus free proposition names after [`rename_apart`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PropPartition {
    pub quantified: BTreeSet<String>,
    pub free: BTreeSet<String>,
}

/// Rename every quantified proposition to a globally fresh name, so that
/// quantified and free propositions are disjoint and no name is bound twice.
pub fn rename_apart(f: &StateFormula) -> (StateFormula, PropPartition) {
    struct Ctx {
        used: BTreeSet<String>,
        quantified: BTreeSet<String>,
    }

    impl Ctx {
        fn fresh(&mut self, base: &str) -> String {
            for i in 0usize.. {
                let cand = format!("{base}{i}");
                if !self.used.contains(&cand) {
                    self.used.insert(cand.clone());
                    return cand;
                }
            }
            unreachable!()
        }
    }

    fn go_s(f: &StateFormula, env: &mut BTreeMap<String, Vec<String>>, cx: &mut Ctx) -> StateFormula {
        match f {
            StateFormula::True => StateFormula::True,
            StateFormula::Prop(p) => {
                let name = env
                    .get(p)
                    .and_then(|stack| stack.last())
                    .cloned()
                    .unwrap_or_else(|| p.clone());
                StateFormula::Prop(name)
            }
            StateFormula::Not(x) => snot_keep(go_s(x, env, cx)),
            StateFormula::Or(a, b) => sor(go_s(a, env, cx), go_s(b, env, cx)),
            StateFormula::And(a, b) => sand(go_s(a, env, cx), go_s(b, env, cx)),
            StateFormula::ExistsPath(p) => StateFormula::ExistsPath(Box::new(go_p(p, env, cx))),
            StateFormula::Exists { prop, obs, body } => {
                let fresh = cx.fresh(prop);
                cx.quantified.insert(fresh.clone());
                env.entry(prop.clone()).or_default().push(fresh.clone());
                let body = go_s(body, env, cx);
                env.get_mut(prop).unwrap().pop();
                StateFormula::Exists {
                    prop: fresh,
                    obs: obs.clone(),
                    body: Box::new(body),
                }
            }
        }
    }
    fn go_p(p: &PathFormula, env: &mut BTreeMap<String, Vec<String>>, cx: &mut Ctx) -> PathFormula {
        match p {
            PathFormula::State(f) => PathFormula::State(Box::new(go_s(f, env, cx))),
            PathFormula::Not(x) => PathFormula::Not(Box::new(go_p(x, env, cx))),
            PathFormula::Or(a, b) => por(go_p(a, env, cx), go_p(b, env, cx)),
            PathFormula::Next(x) => pnext(go_p(x, env, cx)),
            PathFormula::Until(a, b) => puntil(go_p(a, env, cx), go_p(b, env, cx)),
        }
    }
    // Plain Not here: renaming must not restructure the AST.
    fn snot_keep(f: StateFormula) -> StateFormula {
        StateFormula::Not(Box::new(f))
    }

    let mut cx = Ctx {
        used: all_props(f),
        quantified: BTreeSet::new(),
    };
    let out = go_s(f, &mut BTreeMap::new(), &mut cx);
    let part = PropPartition {
        free: free_props(&out),
        quantified: cx.quantified,
    };
    (out, part)
}

// ---------------------------------------------------------------------------
// CTL fragment recognition and the structural quantifier translation

/// One-level view of a formula in the CTL-shaped fragment
/// (`EX`/`AX`/`EU`/`AU` plus booleans and quantifiers).
#[derive(Debug)]
pub enum CtlShape<'a> {
    True,
    Prop(&'a str),
    Not(&'a StateFormula),
    Or(&'a StateFormula, &'a StateFormula),
    And(&'a StateFormula, &'a StateFormula),
    Ex(&'a StateFormula),
    Ax(&'a StateFormula),
    Eu(&'a StateFormula, &'a StateFormula),
    Au(&'a StateFormula, &'a StateFormula),
    Exists(&'a str, &'a Observation, &'a StateFormula),
}

fn as_state(p: &PathFormula) -> Option<&StateFormula> {
    match p {
        PathFormula::State(f) => Some(f),
        _ => None,
    }
}

/// Match the outermost connective of a CTL-shaped formula, seeing through
/// the parse-time desugaring of `A X` and `A U`.
pub fn ctl_shape(f: &StateFormula) -> Option<CtlShape<'_>> {
    match f {
        StateFormula::True => Some(CtlShape::True),
        StateFormula::Prop(p) => Some(CtlShape::Prop(p)),
        StateFormula::Or(a, b) => Some(CtlShape::Or(a, b)),
        StateFormula::And(a, b) => Some(CtlShape::And(a, b)),
        StateFormula::Exists { prop, obs, body } => Some(CtlShape::Exists(prop, obs, body)),
        StateFormula::ExistsPath(p) => match &**p {
            PathFormula::Next(x) => as_state(x).map(CtlShape::Ex),
            PathFormula::Until(a, b) => match (as_state(a), as_state(b)) {
                (Some(a), Some(b)) => Some(CtlShape::Eu(a, b)),
                _ => None,
            },
            _ => None,
        },
        StateFormula::Not(g) => {
            // A X f  desugars to  !E !X f   (with !X f kept as a path Not)
            // A f U g  desugars to  !E !(f U g)
            if let StateFormula::ExistsPath(p) = &**g {
                if let PathFormula::Not(q) = &**p {
                    match &**q {
                        PathFormula::Next(x) => {
                            if let Some(x) = as_state(x) {
                                return Some(CtlShape::Ax(x));
                            }
                        }
                        PathFormula::Until(a, b) => {
                            if let (Some(a), Some(b)) = (as_state(a), as_state(b)) {
                                return Some(CtlShape::Au(a, b));
                            }
                        }
                        _ => {}
                    }
                }
            }
            Some(CtlShape::Not(g))
        }
    }
}

/// True iff `f` lies in the CTL-shaped fragment (recursively).
pub fn is_ctl(f: &StateFormula) -> bool {
    match ctl_shape(f) {
        None => false,
        Some(CtlShape::True) | Some(CtlShape::Prop(_)) => true,
        Some(CtlShape::Not(x)) | Some(CtlShape::Ex(x)) | Some(CtlShape::Ax(x)) => is_ctl(x),
        Some(CtlShape::Or(a, b))
        | Some(CtlShape::And(a, b))
        | Some(CtlShape::Eu(a, b))
        | Some(CtlShape::Au(a, b)) => is_ctl(a) && is_ctl(b),
        Some(CtlShape::Exists(_, _, b)) => is_ctl(b),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslateError {
    /// The input contains a CTL*-only shape (a path formula that is not an
    /// `X` or `U` immediately under its path quantifier).
    NotCtl,
}

impl fmt::Display for TranslateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslateError::NotCtl => write!(f, "formula is outside the CTL-shaped fragment"),
        }
    }
}

impl core::error::Error for TranslateError {}

/// Name of the dedicated proposition identifying local state `l`.
pub fn local_prop(local: &str) -> String {
    format!("@{local}")
}

/// `A G f := !E (true U !f)`
pub fn ag(f: StateFormula) -> StateFormula {
    snot(equant(puntil(embed(StateFormula::True), pnot(embed(f)))))
}

/// Translate a CTL-shaped formula with observation-annotated quantifiers
/// into one with full-observation quantifiers only, preserving the verdict
/// under structure semantics. Each `exists p^o` becomes a plain `exists p`
/// guarded by the uniformity conjunction over the tuples of `o ∩ [n]`,
/// phrased with the dedicated local-state propositions `@l`.
pub fn translate_structural(
    f: &StateFormula,
    locals: &LocalAlphabets,
) -> Result<StateFormula, TranslateError> {
    let shape = ctl_shape(f).ok_or(TranslateError::NotCtl)?;
    Ok(match shape {
        CtlShape::True => StateFormula::True,
        CtlShape::Prop(p) => prop(p),
        CtlShape::Not(x) => snot(translate_structural(x, locals)?),
        CtlShape::Or(a, b) => sor(
            translate_structural(a, locals)?,
            translate_structural(b, locals)?,
        ),
        CtlShape::And(a, b) => sand(
            translate_structural(a, locals)?,
            translate_structural(b, locals)?,
        ),
        CtlShape::Ex(x) => equant(pnext(embed(translate_structural(x, locals)?))),
        CtlShape::Ax(x) => aquant(pnext(embed(translate_structural(x, locals)?))),
        CtlShape::Eu(a, b) => equant(puntil(
            embed(translate_structural(a, locals)?),
            embed(translate_structural(b, locals)?),
        )),
        CtlShape::Au(a, b) => aquant(puntil(
            embed(translate_structural(a, locals)?),
            embed(translate_structural(b, locals)?),
        )),
        CtlShape::Exists(p, obs, body) => {
            let coords: Vec<usize> = obs.resolved(locals.n()).into_iter().collect();
            let mut conj: Option<StateFormula> = None;
            for tuple in locals.tuples(&coords) {
                let guard = tuple
                    .iter()
                    .map(|l| prop(&local_prop(l)))
                    .reduce(sand)
                    .unwrap_or(StateFormula::True);
                let uniform = sor(
                    ag(simp(guard.clone(), prop(p))),
                    ag(simp(guard, snot(prop(p)))),
                );
                conj = Some(match conj {
                    None => uniform,
                    Some(c) => sand(c, uniform),
                });
            }
            let body = translate_structural(body, locals)?;
            let guarded = match conj {
                None => body,
                Some(c) => sand(c, body),
            };
            exists(p, Observation::Full, guarded)
        }
    })
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;
    use super::*;
    use alloc::vec;

    fn obs(xs: &[usize]) -> Observation {
        Observation::set(xs.iter().copied())
    }

    #[test]
    fn parses_the_blind_quantifier_example() {
        let f = parse_formula("exists p^{} . E F p").unwrap();
        let expected = exists(
            "p",
            Observation::empty(),
            equant(puntil(embed(StateFormula::True), embed(prop("p")))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn desugars_ag_not_p() {
        let f = parse_formula("A G !p").unwrap();
        let expected = snot(equant(puntil(embed(StateFormula::True), embed(prop("p")))));
        assert_eq!(f, expected);
    }

    #[test]
    fn unterminated_observation_is_an_error() {
        let e = parse_formula("exists p^{1,2").unwrap_err();
        assert!(e.msg.contains("unterminated") || e.msg.contains("expected"), "{e}");
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_formula("   ").is_err());
    }

    #[test]
    fn rejects_zero_index() {
        assert!(parse_formula("exists p^{0}. p").is_err());
    }

    #[test]
    fn plain_exists_parses_to_full() {
        let f = parse_formula("exists p. p").unwrap();
        assert_eq!(f, exists("p", Observation::Full, prop("p")));
    }

    #[test]
    fn size_base_cases() {
        assert_eq!(formula_size(&prop("p")), 1);
        assert_eq!(formula_size(&exists("p", obs(&[1, 2]), prop("q"))), 4);
        assert_eq!(formula_size(&sor(prop("p"), prop("q"))), 3);
    }

    #[test]
    fn hierarchy_examples() {
        let f = parse_formula("exists p^{1}. exists q^{1,2}. E F (p & q)").unwrap();
        assert!(is_hierarchical(&f));
        let g = parse_formula("exists p^{1,2}. exists q^{1}. E F (p & q)").unwrap();
        assert!(!is_hierarchical(&g));
        let v = hierarchy_violation(&g).unwrap();
        assert_eq!(v.outer_obs, obs(&[1, 2]));
        assert_eq!(v.inner_obs, obs(&[1]));
        let h = parse_formula("E F p").unwrap();
        assert!(is_hierarchical(&h));
    }

    #[test]
    fn obs_intersection_examples() {
        let f = parse_formula("E F p").unwrap();
        assert_eq!(obs_intersection(&f, 2), obs(&[1, 2]));
        let g = parse_formula("exists p^{1}. exists q^{1,2}. p").unwrap();
        assert_eq!(obs_intersection(&g, 2), obs(&[1]));
        let h = parse_formula("(exists p^{1}. p) & (exists q^{2}. q)").unwrap();
        assert_eq!(obs_intersection(&h, 2), obs(&[]));
    }

    #[test]
    fn rename_apart_examples() {
        let f = parse_formula("exists p^{1}. p").unwrap();
        let (g, part) = rename_apart(&f);
        assert_eq!(g, exists("p0", obs(&[1]), prop("p0")));
        assert!(part.quantified.contains("p0"));
        assert!(part.free.is_empty());

        let f = parse_formula("(exists p^{1}. p) & (exists p^{2}. p)").unwrap();
        let (g, part) = rename_apart(&f);
        assert_eq!(
            g,
            sand(
                exists("p0", obs(&[1]), prop("p0")),
                exists("p1", obs(&[2]), prop("p1"))
            )
        );
        assert_eq!(part.quantified.len(), 2);

        let f = parse_formula("q & exists q^{}. q").unwrap();
        let (g, part) = rename_apart(&f);
        assert_eq!(g, sand(prop("q"), exists("q0", obs(&[]), prop("q0"))));
        assert!(part.free.contains("q"));
        assert!(part.quantified.contains("q0"));
    }

    #[test]
    fn print_parse_roundtrip_spot_checks() {
        for src in [
            "exists p^{} . E F p",
            "A G !p",
            "exists p^{1,2}. (q | !p) & E (p U q U !p)",
            "E X X (p | q)",
            "exists p. E ((exists q^{2}. q) U p)",
            "!(p | q) & !!r",
            "E (p -> q)",
            "A (X p & F q)",
        ] {
            let f = parse_formula(src).unwrap();
            let printed = f.to_string();
            let g = parse_formula(&printed)
                .unwrap_or_else(|e| panic!("reparse of {printed:?}: {e}"));
            assert_eq!(f, g, "round-trip of {src:?} via {printed:?}");
        }
    }

    #[test]
    fn ctl_shapes() {
        let f = parse_formula("A X p").unwrap();
        assert!(matches!(ctl_shape(&f), Some(CtlShape::Ax(_))));
        let f = parse_formula("A (p U q)").unwrap();
        assert!(matches!(ctl_shape(&f), Some(CtlShape::Au(_, _))));
        let f = parse_formula("E (p U q)").unwrap();
        assert!(matches!(ctl_shape(&f), Some(CtlShape::Eu(_, _))));
        assert!(is_ctl(&parse_formula("exists p^{1}. A X (p | E (q U p))").unwrap()));
        assert!(!is_ctl(&parse_formula("E (X p U q)").unwrap()));
        assert!(!is_ctl(&parse_formula("E G p").unwrap()));
    }

    #[test]
    fn translate_rejects_ctl_star() {
        let locals = LocalAlphabets::new(vec![vec!["a".into(), "b".into()]]).unwrap();
        let f = parse_formula("E (X p U q)").unwrap();
        assert_eq!(
            translate_structural(&f, &locals),
            Err(TranslateError::NotCtl)
        );
    }

    #[test]
    fn translate_quantifier_free_is_identity() {
        let locals = LocalAlphabets::new(vec![vec!["a".into(), "b".into()]]).unwrap();
        let f = parse_formula("(E (p U q)) & A X !p").unwrap();
        assert_eq!(translate_structural(&f, &locals).unwrap(), f);
    }

    #[test]
    fn translate_full_observation_single_coordinate() {
        // exists p^{[1]} q  over L1 = {a, b}  becomes
        // exists p. (AG(@a -> p) | AG(@a -> !p)) & (AG(@b -> p) | AG(@b -> !p)) & q
        let locals = LocalAlphabets::new(vec![vec!["a".into(), "b".into()]]).unwrap();
        let f = parse_formula("exists p^{1}. q").unwrap();
        let got = translate_structural(&f, &locals).unwrap();
        let unif = |l: &str| {
            sor(
                ag(simp(prop(&local_prop(l)), prop("p"))),
                ag(simp(prop(&local_prop(l)), snot(prop("p")))),
            )
        };
        let expected = exists(
            "p",
            Observation::Full,
            sand(sand(unif("a"), unif("b")), prop("q")),
        );
        assert_eq!(got, expected);
        // No annotated binder remains.
        for o in observations(&got) {
            assert_eq!(*o, Observation::Full);
        }
    }

    #[test]
    fn translate_blind_quantifier_uses_single_trivial_guard() {
        let locals = LocalAlphabets::new(vec![vec!["a".into(), "b".into()]]).unwrap();
        let f = parse_formula("exists p^{}. q").unwrap();
        let got = translate_structural(&f, &locals).unwrap();
        let unif = sor(
            ag(simp(StateFormula::True, prop("p"))),
            ag(simp(StateFormula::True, snot(prop("p")))),
        );
        assert_eq!(got, exists("p", Observation::Full, sand(unif, prop("q"))));
    }

    #[test]
    fn quantifier_depth_counts_nesting() {
        let f = parse_formula("exists p^{1}. (exists q^{1,2}. q) & exists r^{1}. r").unwrap();
        assert_eq!(quantifier_depth(&f), 2);
        assert_eq!(quantifier_depth(&parse_formula("E X p").unwrap()), 0);
    }
}
