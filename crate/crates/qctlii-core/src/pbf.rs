//! Positive boolean formulas over (direction, state) atoms: the transition
//! formulas of alternating tree automata. No negation anywhere; dualization
//! swaps the connectives and constants.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// An atom `[direction index, state index]`.
pub type Atom = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pbf {
    True,
    False,
    Atom(Atom),
    And(Box<Pbf>, Box<Pbf>),
    Or(Box<Pbf>, Box<Pbf>),
}

pub fn and(a: Pbf, b: Pbf) -> Pbf {
    match (a, b) {
        (Pbf::False, _) | (_, Pbf::False) => Pbf::False,
        (Pbf::True, x) | (x, Pbf::True) => x,
        (a, b) => Pbf::And(Box::new(a), Box::new(b)),
    }
}

pub fn or(a: Pbf, b: Pbf) -> Pbf {
    match (a, b) {
        (Pbf::True, _) | (_, Pbf::True) => Pbf::True,
        (Pbf::False, x) | (x, Pbf::False) => x,
        (a, b) => Pbf::Or(Box::new(a), Box::new(b)),
    }
}

pub fn and_all<I: IntoIterator<Item = Pbf>>(xs: I) -> Pbf {
    xs.into_iter().fold(Pbf::True, and)
}

pub fn or_all<I: IntoIterator<Item = Pbf>>(xs: I) -> Pbf {
    xs.into_iter().fold(Pbf::False, or)
}

impl Pbf {
    /// Swap ∧/∨ and ⊤/⊥; atoms are untouched.
    pub fn dual(&self) -> Pbf {
        match self {
            Pbf::True => Pbf::False,
            Pbf::False => Pbf::True,
            Pbf::Atom(x) => Pbf::Atom(*x),
            Pbf::And(a, b) => Pbf::Or(Box::new(a.dual()), Box::new(b.dual())),
            Pbf::Or(a, b) => Pbf::And(Box::new(a.dual()), Box::new(b.dual())),
        }
    }

    /// Constant folding.
    pub fn simplify(&self) -> Pbf {
        match self {
            Pbf::True | Pbf::False | Pbf::Atom(_) => self.clone(),
            Pbf::And(a, b) => and(a.simplify(), b.simplify()),
            Pbf::Or(a, b) => or(a.simplify(), b.simplify()),
        }
    }

    pub fn eval(&self, truth: &dyn Fn(Atom) -> bool) -> bool {
        match self {
            Pbf::True => true,
            Pbf::False => false,
            Pbf::Atom(x) => truth(*x),
            Pbf::And(a, b) => a.eval(truth) && b.eval(truth),
            Pbf::Or(a, b) => a.eval(truth) || b.eval(truth),
        }
    }

    pub fn atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Pbf::True | Pbf::False => {}
            Pbf::Atom(x) => {
                out.insert(*x);
            }
            Pbf::And(a, b) | Pbf::Or(a, b) => {
                a.atoms(out);
                b.atoms(out);
            }
        }
    }

    /// Replace every atom by a formula.
    pub fn map_atoms(&self, f: &dyn Fn(Atom) -> Pbf) -> Pbf {
        match self {
            Pbf::True => Pbf::True,
            Pbf::False => Pbf::False,
            Pbf::Atom(x) => f(*x),
            Pbf::And(a, b) => and(a.map_atoms(f), b.map_atoms(f)),
            Pbf::Or(a, b) => or(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    /// The antichain of minimal satisfying atom sets. Positive formulas are
    /// monotone, so these determine the whole truth table.
    /// Keep only the subset-minimal sets.
    pub fn antichain_reduce(models: Vec<BTreeSet<Atom>>) -> Vec<BTreeSet<Atom>> {
        let mut out: Vec<BTreeSet<Atom>> = Vec::new();
        for m in models {
            if out.iter().any(|o| o.is_subset(&m)) {
                continue;
            }
            out.retain(|o| !m.is_subset(o));
            out.push(m);
        }
        out
    }

    pub fn minimal_models(&self) -> Vec<BTreeSet<Atom>> {
        let reduce = Pbf::antichain_reduce;
        match self {
            Pbf::True => alloc::vec![BTreeSet::new()],
            Pbf::False => Vec::new(),
            Pbf::Atom(x) => alloc::vec![[*x].into_iter().collect()],
            Pbf::Or(a, b) => {
                let mut ms = a.minimal_models();
                ms.extend(b.minimal_models());
                reduce(ms)
            }
            Pbf::And(a, b) => {
                let ma = a.minimal_models();
                let mb = b.minimal_models();
                let mut ms = Vec::new();
                for x in &ma {
                    for y in &mb {
                        ms.push(x.union(y).copied().collect());
                    }
                }
                reduce(ms)
            }
        }
    }

    /// Disjunctive normal form as a list of atom conjunctions, or None if
    /// the formula is not literally an Or-of-Ands-of-atoms. `True` is the
    /// single empty conjunction, `False` the empty list.
    pub fn dnf_disjuncts(&self) -> Option<Vec<Vec<Atom>>> {
        fn conj(p: &Pbf, out: &mut Vec<Atom>) -> bool {
            match p {
                Pbf::True => true,
                Pbf::Atom(x) => {
                    out.push(*x);
                    true
                }
                Pbf::And(a, b) => conj(a, out) && conj(b, out),
                _ => false,
            }
        }
        fn disj(p: &Pbf, out: &mut Vec<Vec<Atom>>) -> bool {
            match p {
                Pbf::False => true,
                Pbf::Or(a, b) => disj(a, out) && disj(b, out),
                _ => {
                    let mut c = Vec::new();
                    if conj(p, &mut c) {
                        out.push(c);
                        true
                    } else {
                        false
                    }
                }
            }
        }
        let mut out = Vec::new();
        if disj(self, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    /// Flatten into an indexed node arena (root is the returned id);
    /// used to give game positions stable identities.
    pub fn flatten(&self) -> (Vec<FlatPbf>, usize) {
        fn go(p: &Pbf, arena: &mut Vec<FlatPbf>) -> usize {
            let node = match p {
                Pbf::True => FlatPbf::True,
                Pbf::False => FlatPbf::False,
                Pbf::Atom(x) => FlatPbf::Atom(*x),
                Pbf::And(a, b) => {
                    let (a, b) = (go(a, arena), go(b, arena));
                    FlatPbf::And(a, b)
                }
                Pbf::Or(a, b) => {
                    let (a, b) = (go(a, arena), go(b, arena));
                    FlatPbf::Or(a, b)
                }
            };
            arena.push(node);
            arena.len() - 1
        }
        let mut arena = Vec::new();
        let root = go(self, &mut arena);
        (arena, root)
    }

    /// Render with direction/state names supplied by the caller.
    pub fn render(&self, dir_name: &dyn Fn(usize) -> String, state_name: &dyn Fn(usize) -> String) -> String {
        fn go(
            p: &Pbf,
            prec: u8,
            dir_name: &dyn Fn(usize) -> String,
            state_name: &dyn Fn(usize) -> String,
            out: &mut String,
        ) {
            use core::fmt::Write;
            match p {
                Pbf::True => {
                    let _ = write!(out, "true");
                }
                Pbf::False => {
                    let _ = write!(out, "false");
                }
                Pbf::Atom((d, q)) => {
                    let _ = write!(out, "[{},{}]", dir_name(*d), state_name(*q));
                }
                Pbf::And(a, b) => {
                    if prec > 1 {
                        out.push('(');
                    }
                    go(a, 2, dir_name, state_name, out);
                    let _ = write!(out, " & ");
                    go(b, 1, dir_name, state_name, out);
                    if prec > 1 {
                        out.push(')');
                    }
                }
                Pbf::Or(a, b) => {
                    if prec > 0 {
                        out.push('(');
                    }
                    go(a, 1, dir_name, state_name, out);
                    let _ = write!(out, " | ");
                    go(b, 0, dir_name, state_name, out);
                    if prec > 0 {
                        out.push(')');
                    }
                }
            }
        }
        let mut out = String::new();
        go(self, 0, dir_name, state_name, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatPbf {
    True,
    False,
    Atom(Atom),
    And(usize, usize),
    Or(usize, usize),
}

impl fmt::Display for Pbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.render(
            &|d| alloc::format!("d{d}"),
            &|q| alloc::format!("q{q}"),
        );
        write!(f, "{s}")
    }
}
