//! Word-level machinery: LTL evaluation on ultimately periodic words, a
//! tableau translation from LTL to nondeterministic Büchi word automata,
//! and lasso membership. Büchi automata are parity automata of index 2
//! (colours 1/2, accepting = 2) in the global max-even convention.
//!
//! Path formulas serve as the LTL syntax; their embedded state formulas
//! must be boolean combinations of atomic propositions (the model checkers
//! substitute maximal state subformulas by fresh atoms first).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{PathFormula, StateFormula};

/// A letter: the set of atoms true at a position.
pub type Letter = BTreeSet<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordError {
    pub msg: String,
}

impl fmt::Display for WordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl core::error::Error for WordError {}

fn err(msg: String) -> WordError {
    WordError { msg }
}

/// The ultimately periodic word `prefix · loop^ω`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<Letter>,
    pub loop_: Vec<Letter>,
}

impl LassoWord {
    pub fn new(prefix: Vec<Letter>, loop_: Vec<Letter>) -> Result<Self, WordError> {
        if loop_.is_empty() {
            return Err(err("lasso loop must be nonempty".into()));
        }
        Ok(LassoWord { prefix, loop_ })
    }

    /// Number of distinct positions (prefix plus one loop iteration).
    pub fn len(&self) -> usize {
        self.prefix.len() + self.loop_.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, i: usize) -> &Letter {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.loop_[i - self.prefix.len()]
        }
    }

    /// Successor position, wrapping the last position to the loop start.
    pub fn next(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix.len()
        }
    }
}

fn check_atoms_state(f: &StateFormula, sigma: &BTreeSet<String>) -> Result<(), WordError> {
    match f {
        StateFormula::True => Ok(()),
        StateFormula::Prop(p) => {
            if sigma.contains(p) {
                Ok(())
            } else {
                Err(err(format!("unknown atom '{p}'")))
            }
        }
        StateFormula::Not(x) => check_atoms_state(x, sigma),
        StateFormula::Or(a, b) | StateFormula::And(a, b) => {
            check_atoms_state(a, sigma)?;
            check_atoms_state(b, sigma)
        }
        StateFormula::ExistsPath(_) | StateFormula::Exists { .. } => Err(err(
            "embedded state formula is not a boolean combination of atoms".into(),
        )),
    }
}

fn check_atoms_path(p: &PathFormula, sigma: &BTreeSet<String>) -> Result<(), WordError> {
    match p {
        PathFormula::State(f) => check_atoms_state(f, sigma),
        PathFormula::Not(x) | PathFormula::Next(x) => check_atoms_path(x, sigma),
        PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
            check_atoms_path(a, sigma)?;
            check_atoms_path(b, sigma)
        }
    }
}

fn eval_state_letter(f: &StateFormula, a: &Letter) -> bool {
    match f {
        StateFormula::True => true,
        StateFormula::Prop(p) => a.contains(p),
        StateFormula::Not(x) => !eval_state_letter(x, a),
        StateFormula::Or(x, y) => eval_state_letter(x, a) || eval_state_letter(y, a),
        StateFormula::And(x, y) => eval_state_letter(x, a) && eval_state_letter(y, a),
        StateFormula::ExistsPath(_) | StateFormula::Exists { .. } => {
            unreachable!("atoms checked before evaluation")
        }
    }
}

/// Standard LTL semantics on `w`, decided by evaluating at the finitely
/// many distinct suffix positions; `U` is the least fixpoint.
pub fn ltl_eval_lasso(
    psi: &PathFormula,
    w: &LassoWord,
    sigma: &BTreeSet<String>,
) -> Result<bool, WordError> {
    check_atoms_path(psi, sigma)?;
    Ok(eval_positions(psi, w)[0])
}

fn eval_positions(psi: &PathFormula, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match psi {
        PathFormula::State(f) => (0..n).map(|i| eval_state_letter(f, w.letter(i))).collect(),
        PathFormula::Not(x) => eval_positions(x, w).into_iter().map(|b| !b).collect(),
        PathFormula::Or(a, b) => {
            let va = eval_positions(a, w);
            let vb = eval_positions(b, w);
            (0..n).map(|i| va[i] || vb[i]).collect()
        }
        PathFormula::Next(x) => {
            let vx = eval_positions(x, w);
            (0..n).map(|i| vx[w.next(i)]).collect()
        }
        PathFormula::Until(a, b) => {
            let va = eval_positions(a, w);
            let vb = eval_positions(b, w);
            let mut v = alloc::vec![false; n];
            // least fixpoint; n iterations suffice on n positions
            for _ in 0..n {
                for i in 0..n {
                    v[i] = vb[i] || (va[i] && v[w.next(i)]);
                }
            }
            v
        }
    }
}

// ---------------------------------------------------------------------------
// Negation normal form

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Ltl {
    True,
    False,
    Pos(String),
    Neg(String),
    And(alloc::boxed::Box<Ltl>, alloc::boxed::Box<Ltl>),
    Or(alloc::boxed::Box<Ltl>, alloc::boxed::Box<Ltl>),
    X(alloc::boxed::Box<Ltl>),
    U(alloc::boxed::Box<Ltl>, alloc::boxed::Box<Ltl>),
    R(alloc::boxed::Box<Ltl>, alloc::boxed::Box<Ltl>),
}

fn nnf_state(f: &StateFormula, neg: bool) -> Ltl {
    match f {
        StateFormula::True => {
            if neg {
                Ltl::False
            } else {
                Ltl::True
            }
        }
        StateFormula::Prop(p) => {
            if neg {
                Ltl::Neg(p.clone())
            } else {
                Ltl::Pos(p.clone())
            }
        }
        StateFormula::Not(x) => nnf_state(x, !neg),
        StateFormula::Or(a, b) => {
            let (a, b) = (nnf_state(a, neg), nnf_state(b, neg));
            if neg {
                Ltl::And(a.into(), b.into())
            } else {
                Ltl::Or(a.into(), b.into())
            }
        }
        StateFormula::And(a, b) => {
            let (a, b) = (nnf_state(a, neg), nnf_state(b, neg));
            if neg {
                Ltl::Or(a.into(), b.into())
            } else {
                Ltl::And(a.into(), b.into())
            }
        }
        StateFormula::ExistsPath(_) | StateFormula::Exists { .. } => {
            unreachable!("atoms checked before translation")
        }
    }
}

fn nnf_path(p: &PathFormula, neg: bool) -> Ltl {
    match p {
        PathFormula::State(f) => nnf_state(f, neg),
        PathFormula::Not(x) => nnf_path(x, !neg),
        PathFormula::Or(a, b) => {
            let (a, b) = (nnf_path(a, neg), nnf_path(b, neg));
            if neg {
                Ltl::And(a.into(), b.into())
            } else {
                Ltl::Or(a.into(), b.into())
            }
        }
        PathFormula::Next(x) => Ltl::X(nnf_path(x, neg).into()),
        PathFormula::Until(a, b) => {
            let (a, b) = (nnf_path(a, neg), nnf_path(b, neg));
            if neg {
                Ltl::R(a.into(), b.into())
            } else {
                Ltl::U(a.into(), b.into())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tableau construction

/// Nondeterministic Büchi word automaton over letters `2^sigma`, total via
/// a rejecting sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nbw {
    pub sigma: BTreeSet<String>,
    pub state_count: usize,
    pub initial: usize,
    pub accepting: BTreeSet<usize>,
    /// delta[q][letter] is never empty (totality).
    pub delta: Vec<BTreeMap<Letter, BTreeSet<usize>>>,
}

impl Nbw {
    /// All letters over the alphabet, `2^sigma`.
    pub fn letters(&self) -> Vec<Letter> {
        all_letters(&self.sigma)
    }

    /// Debug dump: transition list text format.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nbw states={} initial={} accepting={:?}",
            self.state_count, self.initial, self.accepting
        );
        for (q, row) in self.delta.iter().enumerate() {
            for (a, qs) in row {
                let letter: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
                for q2 in qs {
                    let _ = writeln!(out, "{q} -{{{}}}-> {q2}", letter.join(","));
                }
            }
        }
        out
    }
}

pub fn all_letters(sigma: &BTreeSet<String>) -> Vec<Letter> {
    let atoms: Vec<&String> = sigma.iter().collect();
    (0..(1usize << atoms.len()))
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, s)| (*s).clone())
                .collect()
        })
        .collect()
}

/// One tableau expansion leaf: literal constraints on the current letter,
/// obligations for the next position, and the untils fulfilled now.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Leaf {
    pos: BTreeSet<String>,
    neg: BTreeSet<String>,
    next: BTreeSet<Ltl>,
    fulfilled: BTreeSet<Ltl>,
}

/// Expand a set of NNF obligations into its consistent leaves.
fn expand(todo: BTreeSet<Ltl>) -> BTreeSet<Leaf> {
    fn go(
        mut todo: Vec<Ltl>,
        mut leaf: Leaf,
        out: &mut BTreeSet<Leaf>,
    ) {
        while let Some(f) = todo.pop() {
            match f {
                Ltl::True => {}
                Ltl::False => return,
                Ltl::Pos(p) => {
                    if leaf.neg.contains(&p) {
                        return;
                    }
                    leaf.pos.insert(p);
                }
                Ltl::Neg(p) => {
                    if leaf.pos.contains(&p) {
                        return;
                    }
                    leaf.neg.insert(p);
                }
                Ltl::And(a, b) => {
                    todo.push(*a);
                    todo.push(*b);
                }
                Ltl::Or(a, b) => {
                    let mut t2 = todo.clone();
                    t2.push(*a);
                    go(t2, leaf.clone(), out);
                    todo.push(*b);
                }
                Ltl::X(g) => {
                    leaf.next.insert(*g);
                }
                Ltl::U(a, b) => {
                    // fulfil now, or defer with a holding
                    let u = Ltl::U(a.clone(), b.clone());
                    let mut t2 = todo.clone();
                    t2.push((*b).clone());
                    let mut l2 = leaf.clone();
                    l2.fulfilled.insert(u.clone());
                    go(t2, l2, out);
                    todo.push(*a);
                    leaf.next.insert(u);
                }
                Ltl::R(a, b) => {
                    // b holds now; released by a now or carried on
                    let r = Ltl::R(a.clone(), b.clone());
                    let mut t2 = todo.clone();
                    t2.push((*b).clone());
                    t2.push(*a);
                    go(t2, leaf.clone(), out);
                    todo.push(*b);
                    leaf.next.insert(r);
                }
            }
        }
        out.insert(leaf);
    }
    let mut out = BTreeSet::new();
    go(
        todo.into_iter().collect(),
        Leaf {
            pos: BTreeSet::new(),
            neg: BTreeSet::new(),
            next: BTreeSet::new(),
            fulfilled: BTreeSet::new(),
        },
        &mut out,
    );
    out
}

fn untils_of(f: &Ltl, out: &mut BTreeSet<Ltl>) {
    match f {
        Ltl::True | Ltl::False | Ltl::Pos(_) | Ltl::Neg(_) => {}
        Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::R(a, b) => {
            untils_of(a, out);
            untils_of(b, out);
        }
        Ltl::X(a) => untils_of(a, out),
        Ltl::U(a, b) => {
            out.insert(f.clone());
            untils_of(a, out);
            untils_of(b, out);
        }
    }
}

/// Translate a path formula (over atom propositions in `sigma`) into a
/// Büchi automaton accepting exactly its models. Declarative tableau:
/// reachable obligation sets as states, degeneralized per-until counters,
/// a rejecting sink for totality.
pub fn ltl_to_nbw(psi: &PathFormula, sigma: &BTreeSet<String>) -> Result<Nbw, WordError> {
    check_atoms_path(psi, sigma)?;
    let phi = nnf_path(psi, false);
    let mut untils = BTreeSet::new();
    untils_of(&phi, &mut untils);
    let untils: Vec<Ltl> = untils.into_iter().collect();
    let k = untils.len();

    // state = (obligation set, counter in 0..=k); counter == k is accepting
    type ObState = (BTreeSet<Ltl>, usize);
    let letters = all_letters(sigma);
    let mut index: BTreeMap<ObState, usize> = BTreeMap::new();
    let mut delta: Vec<BTreeMap<Letter, BTreeSet<usize>>> = Vec::new();
    let mut worklist: Vec<ObState> = Vec::new();

    let intern = |s: ObState,
                      delta: &mut Vec<BTreeMap<Letter, BTreeSet<usize>>>,
                      worklist: &mut Vec<ObState>,
                      index: &mut BTreeMap<ObState, usize>| {
        if let Some(&i) = index.get(&s) {
            return i;
        }
        let i = delta.len();
        index.insert(s.clone(), i);
        delta.push(letters.iter().map(|a| (a.clone(), BTreeSet::new())).collect());
        worklist.push(s);
        i
    };

    let init_set: BTreeSet<Ltl> = [phi].into_iter().collect();
    let initial = intern((init_set, 0), &mut delta, &mut worklist, &mut index);

    while let Some((obs, counter)) = worklist.pop() {
        let q = index[&(obs.clone(), counter)];
        for leaf in expand(obs.clone()) {
            // advance the degeneralization counter through satisfied untils
            let mut c = if counter == k { 0 } else { counter };
            while c < k && (!obs.contains(&untils[c]) || leaf.fulfilled.contains(&untils[c])) {
                c += 1;
            }
            let target = intern((leaf.next.clone(), c), &mut delta, &mut worklist, &mut index);
            for a in &letters {
                if leaf.pos.is_subset(a) && leaf.neg.intersection(a).next().is_none() {
                    delta[q].get_mut(a).unwrap().insert(target);
                }
            }
        }
    }

    // totality: rejecting sink
    let sink = delta.len();
    let mut need_sink = false;
    for row in &mut delta {
        for succs in row.values_mut() {
            if succs.is_empty() {
                succs.insert(sink);
                need_sink = true;
            }
        }
    }
    let mut accepting: BTreeSet<usize> = index
        .iter()
        .filter(|((_, c), _)| *c == k)
        .map(|(_, &i)| i)
        .collect();
    if need_sink {
        delta.push(letters.iter().map(|a| (a.clone(), [sink].into_iter().collect())).collect());
    }
    // an automaton with no accepting state at all still needs a well-formed
    // accepting set; leave it empty (empty language)
    accepting.retain(|&i| i < delta.len());
    Ok(Nbw {
        sigma: sigma.clone(),
        state_count: delta.len(),
        initial,
        accepting,
        delta,
    })
}

/// Does some run of `a` on `w` visit accepting states infinitely often?
/// Product-graph cycle analysis over the lasso positions.
pub fn nbw_accepts_lasso(a: &Nbw, w: &LassoWord) -> Result<bool, WordError> {
    for letter in w.prefix.iter().chain(w.loop_.iter()) {
        if !letter.is_subset(&a.sigma) {
            return Err(err(format!("letter {letter:?} uses atoms outside the alphabet")));
        }
    }
    let n = w.len();
    let m = a.state_count;
    let id = |q: usize, i: usize| q * n + i;
    let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); m * n];
    for q in 0..m {
        for i in 0..n {
            if let Some(succs) = a.delta[q].get(w.letter(i)) {
                for &q2 in succs {
                    edges[id(q, i)].push(id(q2, w.next(i)));
                }
            }
        }
    }
    // reachability from the initial product node
    let mut reach = alloc::vec![false; m * n];
    let mut stack = alloc::vec![id(a.initial, 0)];
    reach[id(a.initial, 0)] = true;
    while let Some(v) = stack.pop() {
        for &u in &edges[v] {
            if !reach[u] {
                reach[u] = true;
                stack.push(u);
            }
        }
    }
    // accepting cycle among reachable nodes
    for (scc, cyclic) in crate::parity::sccs(&edges, &reach) {
        if cyclic && scc.iter().any(|&v| a.accepting.contains(&(v / n))) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, StateFormula};
    use alloc::string::ToString;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sigma(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn letter(names: &[&str]) -> Letter {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// Parse the path formula inside an `E ...` wrapper.
    fn path(src: &str) -> PathFormula {
        match parse_formula(&alloc::format!("E ({src})")).unwrap() {
            StateFormula::ExistsPath(p) => *p,
            _ => unreachable!(),
        }
    }

    #[test]
    fn eval_examples() {
        let s = sigma(&["p", "q"]);
        let w = LassoWord::new(vec![], vec![letter(&["p"])]).unwrap();
        assert!(ltl_eval_lasso(&path("G p"), &w, &s).unwrap());
        let w = LassoWord::new(vec![letter(&["p"])], vec![letter(&["q"])]).unwrap();
        assert!(ltl_eval_lasso(&path("X q"), &w, &s).unwrap());
        let w = LassoWord::new(vec![], vec![letter(&[])]).unwrap();
        assert!(!ltl_eval_lasso(&path("F p"), &w, &s).unwrap());
    }

    #[test]
    fn eval_rejects_unknown_atoms() {
        let w = LassoWord::new(vec![], vec![letter(&[])]).unwrap();
        assert!(ltl_eval_lasso(&path("F r"), &w, &sigma(&["p"])).is_err());
    }

    #[test]
    fn lasso_needs_a_loop() {
        assert!(LassoWord::new(vec![letter(&[])], vec![]).is_err());
    }

    #[test]
    fn nbw_trivial_cases() {
        let s = sigma(&["p"]);
        let univ = ltl_to_nbw(&path("true"), &s).unwrap();
        let empty = ltl_to_nbw(&path("false"), &s).unwrap();
        for w in [
            LassoWord::new(vec![], vec![letter(&[])]).unwrap(),
            LassoWord::new(vec![letter(&["p"])], vec![letter(&["p"]), letter(&[])]).unwrap(),
        ] {
            assert!(nbw_accepts_lasso(&univ, &w).unwrap());
            assert!(!nbw_accepts_lasso(&empty, &w).unwrap());
        }
    }

    #[test]
    fn nbw_alphabet_mismatch_is_an_error() {
        let s = sigma(&["p"]);
        let a = ltl_to_nbw(&path("G p"), &s).unwrap();
        let w = LassoWord::new(vec![], vec![letter(&["q"])]).unwrap();
        assert!(nbw_accepts_lasso(&a, &w).is_err());
    }

    fn random_letter(rng: &mut ChaCha8Rng, atoms: &[&str]) -> Letter {
        atoms
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|s| s.to_string())
            .collect()
    }

    fn random_lasso(rng: &mut ChaCha8Rng, atoms: &[&str]) -> LassoWord {
        let np = rng.gen_range(0..=4);
        let nl = rng.gen_range(1..=4);
        LassoWord::new(
            (0..np).map(|_| random_letter(rng, atoms)).collect(),
            (0..nl).map(|_| random_letter(rng, atoms)).collect(),
        )
        .unwrap()
    }

    fn random_ltl(rng: &mut ChaCha8Rng, atoms: &[&str], size: usize) -> PathFormula {
        use crate::formula::{embed, pnext, pnot, por, prop, puntil};
        if size <= 1 {
            return match rng.gen_range(0..=2) {
                0 => embed(StateFormula::True),
                _ => embed(prop(atoms[rng.gen_range(0..atoms.len())])),
            };
        }
        match rng.gen_range(0..4) {
            0 => pnot(random_ltl(rng, atoms, size - 1)),
            1 => pnext(random_ltl(rng, atoms, size - 1)),
            2 => {
                let l = rng.gen_range(1..size);
                por(random_ltl(rng, atoms, l), random_ltl(rng, atoms, size - l))
            }
            _ => {
                let l = rng.gen_range(1..size);
                puntil(random_ltl(rng, atoms, l), random_ltl(rng, atoms, size - l))
            }
        }
    }

    #[test]
    fn nbw_matches_direct_evaluation() {
        let atoms = ["p", "q"];
        let s = sigma(&atoms);
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
        for i in 0..100 {
            let size = rng.gen_range(1..=6);
            let psi = random_ltl(&mut rng, &atoms, size);
            let a = ltl_to_nbw(&psi, &s).unwrap();
            for j in 0..20 {
                let w = random_lasso(&mut rng, &atoms);
                let direct = ltl_eval_lasso(&psi, &w, &s).unwrap();
                let via_nbw = nbw_accepts_lasso(&a, &w).unwrap();
                assert_eq!(direct, via_nbw, "formula {i} ({psi}), lasso {j}: {w:?}");
            }
        }
    }

    #[test]
    fn eval_negation_is_complement() {
        let atoms = ["p", "q"];
        let s = sigma(&atoms);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let size = rng.gen_range(1..=6);
            let psi = random_ltl(&mut rng, &atoms, size);
            let w = random_lasso(&mut rng, &atoms);
            assert_eq!(
                ltl_eval_lasso(&crate::formula::pnot(psi.clone()), &w, &s).unwrap(),
                !ltl_eval_lasso(&psi, &w, &s).unwrap()
            );
        }
    }

    #[test]
    fn nbw_is_total() {
        let s = sigma(&["p", "q"]);
        for src in ["p U q", "G (p -> X q)", "false", "X X p"] {
            let a = ltl_to_nbw(&path(src), &s).unwrap();
            for row in &a.delta {
                assert_eq!(row.len(), 4, "{src}: every letter present");
                for succs in row.values() {
                    assert!(!succs.is_empty(), "{src}: totality");
                }
            }
        }
    }
}
