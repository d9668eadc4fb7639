//! Structure-semantics model checking: direct evaluation of the satisfaction
//! clauses on a compound Kripke structure. The quantifier case enumerates
//! all o-uniform labellings as unions of o-equivalence classes; path
//! quantification goes through the LTL skeleton over maximal state
//! subformulas and a Büchi product. A CTL fixpoint evaluator serves as an
//! independent oracle for the quantifier-free fragment.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::formula::{
    ctl_shape, rename_apart, resolve_full, CtlShape, Observation, PathFormula, StateFormula,
};
use crate::kripke::Cks;
use crate::parity::sccs;
use crate::word::ltl_to_nbw;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum McError {
    /// Bad input: unknown state, free-proposition mismatch, unsupported
    /// fragment, hierarchy violation.
    Input(String),
    /// A resource guard tripped; the query is too large, not wrong.
    Resource(String),
}

impl core::fmt::Display for McError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            McError::Input(m) => write!(f, "{m}"),
            McError::Resource(m) => write!(f, "resource limit: {m}"),
        }
    }
}

impl core::error::Error for McError {}

fn input(msg: String) -> McError {
    McError::Input(msg)
}

/// Structure semantics: does (K, s) satisfy f? Quantifiers range over
/// o-uniform labellings of K itself.
pub fn check_structure(k: &Cks, s: usize, f: &StateFormula) -> Result<bool, McError> {
    if s >= k.state_count() {
        return Err(input(format!("state id {s} out of range")));
    }
    let f = resolve_full(f, k.n());
    let (f, parts) = rename_apart(&f);
    let atoms = k.atoms();
    for p in &parts.free {
        // "@" props are reserved for local components; a local that labels
        // no state is simply false everywhere
        if p.starts_with('@') {
            continue;
        }
        if !atoms.contains(p) {
            return Err(input(format!(
                "free proposition {p} is not labelled in the model"
            )));
        }
    }
    Ok(eval_states(k, &f)?.contains(&s))
}

/// The set of states of K satisfying f (set semantics; the quantifier case
/// takes the union over all uniform labellings).
fn eval_states(k: &Cks, f: &StateFormula) -> Result<BTreeSet<usize>, McError> {
    let all: BTreeSet<usize> = k.state_ids().collect();
    match f {
        StateFormula::True => Ok(all),
        StateFormula::Prop(p) => Ok(k
            .state_ids()
            .filter(|&s| k.label(s).contains(p))
            .collect()),
        StateFormula::Not(x) => {
            let sat = eval_states(k, x)?;
            Ok(all.difference(&sat).copied().collect())
        }
        StateFormula::Or(a, b) => {
            let sa = eval_states(k, a)?;
            let sb = eval_states(k, b)?;
            Ok(sa.union(&sb).copied().collect())
        }
        StateFormula::And(a, b) => {
            let sa = eval_states(k, a)?;
            let sb = eval_states(k, b)?;
            Ok(sa.intersection(&sb).copied().collect())
        }
        StateFormula::ExistsPath(psi) => exists_path_states(k, psi),
        StateFormula::Exists { prop, obs, body } => {
            let classes = k.obs_classes(obs);
            let mut acc = BTreeSet::new();
            // every o-uniform labelling is a union of o-classes, and vice versa
            for mask in 0..(1usize << classes.len()) {
                let mut holds = BTreeSet::new();
                for (i, class) in classes.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        holds.extend(class.iter().copied());
                    }
                }
                let k2 = k.with_prop(prop, &holds);
                acc.extend(eval_states(&k2, body)?);
                if acc.len() == k.state_count() {
                    break;
                }
            }
            Ok(acc)
        }
    }
}

/// Maximal state subformulas of a path formula, in reading order.
pub fn max_state_subformulas(psi: &PathFormula) -> Vec<&StateFormula> {
    fn go<'a>(p: &'a PathFormula, out: &mut Vec<&'a StateFormula>) {
        match p {
            PathFormula::State(f) => {
                if !out.iter().any(|g| *g == f.as_ref()) {
                    out.push(f);
                }
            }
            PathFormula::Not(x) | PathFormula::Next(x) => go(x, out),
            PathFormula::Or(a, b) | PathFormula::Until(a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(psi, &mut out);
    out
}

/// Replace each maximal state subformula by a placeholder atom `#i`.
pub fn ltl_skeleton(psi: &PathFormula, maxes: &[&StateFormula]) -> PathFormula {
    fn go(p: &PathFormula, maxes: &[&StateFormula]) -> PathFormula {
        match p {
            PathFormula::State(f) => {
                let i = maxes.iter().position(|g| *g == f.as_ref()).unwrap();
                PathFormula::State(alloc::boxed::Box::new(StateFormula::Prop(format!("#{i}"))))
            }
            PathFormula::Not(x) => PathFormula::Not(alloc::boxed::Box::new(go(x, maxes))),
            PathFormula::Next(x) => PathFormula::Next(alloc::boxed::Box::new(go(x, maxes))),
            PathFormula::Or(a, b) => PathFormula::Or(
                alloc::boxed::Box::new(go(a, maxes)),
                alloc::boxed::Box::new(go(b, maxes)),
            ),
            PathFormula::Until(a, b) => PathFormula::Until(
                alloc::boxed::Box::new(go(a, maxes)),
                alloc::boxed::Box::new(go(b, maxes)),
            ),
        }
    }
    go(psi, maxes)
}

/// States from which some path satisfies psi: evaluate the maximal state
/// subformulas first, then check Büchi-product nonemptiness against the
/// LTL skeleton's word automaton.
fn exists_path_states(k: &Cks, psi: &PathFormula) -> Result<BTreeSet<usize>, McError> {
    let maxes = max_state_subformulas(psi);
    let mut sat: Vec<BTreeSet<usize>> = Vec::with_capacity(maxes.len());
    for f in &maxes {
        sat.push(eval_states(k, f)?);
    }
    let sigma: BTreeSet<String> = (0..maxes.len()).map(|i| format!("#{i}")).collect();
    let skeleton = ltl_skeleton(psi, &maxes);
    let nbw = ltl_to_nbw(&skeleton, &sigma).map_err(|e| input(e.to_string()))?;
    // product node (q, s) = automaton in q, about to read the letter of s
    let ns = k.state_count();
    let node = |q: usize, s: usize| q * ns + s;
    let letters: Vec<BTreeSet<String>> = k
        .state_ids()
        .map(|s| {
            (0..maxes.len())
                .filter(|&i| sat[i].contains(&s))
                .map(|i| format!("#{i}"))
                .collect()
        })
        .collect();
    let total = nbw.state_count * ns;
    let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); total];
    for q in 0..nbw.state_count {
        for s in k.state_ids() {
            let targets = &nbw.delta[q][&letters[s]];
            for &q2 in targets {
                for &s2 in k.successors(s) {
                    edges[node(q, s)].push(node(q2, s2));
                }
            }
        }
    }
    // a node is live iff it reaches a cyclic SCC containing an accepting
    // automaton state
    let sub = alloc::vec![true; total];
    let comps = sccs(&edges, &sub);
    let mut good = alloc::vec![false; total];
    for (comp, cyclic) in &comps {
        if *cyclic && comp.iter().any(|&v| nbw.accepting.contains(&(v / ns))) {
            for &v in comp {
                good[v] = true;
            }
        }
    }
    // backward closure over reachability
    let mut rev: Vec<Vec<usize>> = alloc::vec![Vec::new(); total];
    for (v, outs) in edges.iter().enumerate() {
        for &w in outs {
            rev[w].push(v);
        }
    }
    let mut stack: Vec<usize> = (0..total).filter(|&v| good[v]).collect();
    while let Some(v) = stack.pop() {
        for &u in &rev[v] {
            if !good[u] {
                good[u] = true;
                stack.push(u);
            }
        }
    }
    Ok(k
        .state_ids()
        .filter(|&s| good[node(nbw.initial, s)])
        .collect())
}

/// Independent oracle: classic fixpoint evaluation for quantifier-free CTL.
pub fn check_ctl_fixpoint(k: &Cks, s: usize, f: &StateFormula) -> Result<bool, McError> {
    if s >= k.state_count() {
        return Err(input(format!("state id {s} out of range")));
    }
    Ok(ctl_states(k, f)?.contains(&s))
}

fn ctl_states(k: &Cks, f: &StateFormula) -> Result<BTreeSet<usize>, McError> {
    let all: BTreeSet<usize> = k.state_ids().collect();
    let pre_exists = |x: &BTreeSet<usize>| -> BTreeSet<usize> {
        k.state_ids()
            .filter(|&s| k.successors(s).iter().any(|t| x.contains(t)))
            .collect()
    };
    let pre_all = |x: &BTreeSet<usize>| -> BTreeSet<usize> {
        k.state_ids()
            .filter(|&s| k.successors(s).iter().all(|t| x.contains(t)))
            .collect()
    };
    let shape = ctl_shape(f).ok_or_else(|| {
        input(format!("formula is outside the CTL fragment: {f}"))
    })?;
    match shape {
        CtlShape::True => Ok(all),
        CtlShape::Prop(p) => Ok(k
            .state_ids()
            .filter(|&s| k.label(s).contains(p))
            .collect()),
        CtlShape::Not(x) => {
            let sat = ctl_states(k, x)?;
            Ok(all.difference(&sat).copied().collect())
        }
        CtlShape::Or(a, b) => {
            let sa = ctl_states(k, a)?;
            let sb = ctl_states(k, b)?;
            Ok(sa.union(&sb).copied().collect())
        }
        CtlShape::And(a, b) => {
            let sa = ctl_states(k, a)?;
            let sb = ctl_states(k, b)?;
            Ok(sa.intersection(&sb).copied().collect())
        }
        CtlShape::Ex(x) => Ok(pre_exists(&ctl_states(k, x)?)),
        CtlShape::Ax(x) => Ok(pre_all(&ctl_states(k, x)?)),
        CtlShape::Eu(a, b) => {
            let sa = ctl_states(k, a)?;
            let sb = ctl_states(k, b)?;
            let mut x = sb.clone();
            loop {
                let step: BTreeSet<usize> = sb
                    .union(&sa.intersection(&pre_exists(&x)).copied().collect())
                    .copied()
                    .collect();
                if step == x {
                    return Ok(x);
                }
                x = step;
            }
        }
        CtlShape::Au(a, b) => {
            let sa = ctl_states(k, a)?;
            let sb = ctl_states(k, b)?;
            let mut x = sb.clone();
            loop {
                let step: BTreeSet<usize> = sb
                    .union(&sa.intersection(&pre_all(&x)).copied().collect())
                    .copied()
                    .collect();
                if step == x {
                    return Ok(x);
                }
                x = step;
            }
        }
        CtlShape::Exists(..) => Err(input(
            "quantified formula given to the quantifier-free CTL oracle".into(),
        )),
    }
}

/// All labellings of the states of K (not necessarily uniform), as sets of
/// state ids. Oracle helper for quantifier tests.
pub fn all_labellings(k: &Cks) -> Vec<BTreeSet<usize>> {
    (0..(1usize << k.state_count()))
        .map(|mask| {
            k.state_ids()
                .filter(|&s| mask & (1 << s) != 0)
                .collect()
        })
        .collect()
}

/// Oracle for the plain (full-observation) quantifier: unrestricted
/// enumeration of every labelling.
pub fn exists_unrestricted(
    k: &Cks,
    s: usize,
    p: &str,
    body: &StateFormula,
) -> Result<bool, McError> {
    for holds in all_labellings(k) {
        let k2 = k.with_prop(p, &holds);
        if eval_states(&k2, body)?.contains(&s) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Oracle for the dual universal quantifier: body must hold under every
/// o-uniform labelling.
pub fn forall_uniform(
    k: &Cks,
    s: usize,
    p: &str,
    obs: &Observation,
    body: &StateFormula,
) -> Result<bool, McError> {
    let classes = k.obs_classes(obs);
    for mask in 0..(1usize << classes.len()) {
        let mut holds = BTreeSet::new();
        for (i, class) in classes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                holds.extend(class.iter().copied());
            }
        }
        let k2 = k.with_prop(p, &holds);
        if !eval_states(&k2, body)?.contains(&s) {
            return Ok(false);
        }
    }
    Ok(true)
}
