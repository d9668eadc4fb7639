//! Tree-semantics decision procedure for the hierarchical fragment.
//!
//! [`build_automaton`] realizes the inductive construction: for a subformula
//! `phi` and a model state `s`, an alternating tree automaton over
//! `Λ_{I_phi}`-trees that accepts exactly the labelled direction trees whose
//! lift-merge with the unfolding of `(K, s)` satisfies `phi`. [`check_tree`]
//! then decides the whole formula by playing the membership game on the full
//! direction tree with the empty labelling, rooted at the projection of `s`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ata::{dualize, membership, narrow, project, Ata, AtaError, Nta, RegularTree};
use crate::formula::{
    hierarchy_violation, quantifier_depth, rename_apart, resolve_full, Observation, PathFormula,
    StateFormula,
};
use crate::kripke::{project_dir, Cks, Dir};
use crate::mc::{ltl_skeleton, max_state_subformulas, McError};
use crate::pbf::{self, Pbf};
use crate::simulate::simulate_capped;
use crate::word::{all_letters, ltl_to_nbw};

/// Resource limits for the tree-semantics procedure. The construction is
/// nonelementary in the quantifier depth, so both knobs guard against
/// thrashing rather than correctness.
#[derive(Debug, Clone)]
pub struct TreeOptions {
    /// Formulas nesting quantifiers deeper than this abort with
    /// [`McError::Resource`] before any automaton is built.
    pub max_quantifier_depth: usize,
    /// State cap handed to the simulation theorem; overflowing it aborts
    /// with [`McError::Resource`].
    pub simulate_cap: usize,
}

impl Default for TreeOptions {
    fn default() -> Self {
        TreeOptions {
            max_quantifier_depth: 2,
            simulate_cap: 200_000,
        }
    }
}

/// Outcome of a tree-semantics check, with the statistics the front end
/// reports.
#[derive(Debug, Clone)]
pub struct TreeRun {
    pub verdict: bool,
    /// States of the final automaton the membership game ran on.
    pub automaton_states: usize,
    /// Debug dumps of every memoized intermediate automaton, in build order,
    /// as (label, dump text) pairs.
    pub dumps: Vec<(String, String)>,
}

fn input(msg: String) -> McError {
    McError::Input(msg)
}

fn internal(e: AtaError) -> McError {
    McError::Input(format!("internal automaton error: {e}"))
}

/// Shrink an automaton without changing its language: constant folding of
/// trivial states, bisimulation quotient and colour relaxation feed each
/// other, so iterate to a fixpoint before the final colour renumbering.
fn reduce(a: &Ata) -> Ata {
    let mut a = a.prune_unreachable();
    loop {
        let next = a.solve_sinks().quotient().relax_colours();
        if next == a {
            return a.compact_colours();
        }
        a = next;
    }
}

fn obs_set(o: &Observation, n: usize) -> BTreeSet<usize> {
    match o {
        Observation::Full => (1..=n).collect(),
        Observation::Set(s) => s.clone(),
    }
}

/// `I_phi`: intersection of all observations in `phi`, `[n]` when there are
/// none.
fn i_coords(f: &StateFormula, n: usize) -> BTreeSet<usize> {
    obs_set(&crate::formula::obs_intersection(f, n), n)
}

/// Canonical direction list for a coordinate set: all tuples, sorted. Every
/// constructor below uses this, so that [`narrow`] (which sorts projected
/// directions) lands on the same list and automata can be combined directly.
fn sorted_dirs(k: &Cks, coords: &BTreeSet<usize>) -> (Vec<usize>, Vec<Dir>) {
    let cv: Vec<usize> = coords.iter().copied().collect();
    let mut dirs = k.locals().dirs(&cv);
    dirs.sort();
    (cv, dirs)
}

fn shift(f: &Pbf, off: usize) -> Pbf {
    f.map_atoms(&|(d, q)| Pbf::Atom((d, q + off)))
}

/// Append the states of `src` to `dst` (same directions and atoms), shifting
/// state references; returns the offset of `src`'s block.
fn append(dst: &mut Ata, src: &Ata) -> usize {
    debug_assert_eq!(dst.dirs, src.dirs);
    debug_assert_eq!(dst.atoms, src.atoms);
    let off = dst.delta.len();
    for row in &src.delta {
        dst.delta.push(row.iter().map(|f| shift(f, off)).collect());
    }
    dst.colours.extend_from_slice(&src.colours);
    dst.top.extend_from_slice(&src.top);
    off
}

struct Builder<'a> {
    k: &'a Cks,
    quantified: &'a BTreeSet<String>,
    opts: &'a TreeOptions,
    /// One automaton per (subformula, state); the path case instantiates
    /// subformula automata for every model state.
    memo: BTreeMap<(String, usize), Ata>,
    dumps: Vec<(String, String)>,
}

impl Builder<'_> {
    fn build(&mut self, f: &StateFormula, s: usize) -> Result<Ata, McError> {
        let key = (format!("{f}"), s);
        if let Some(a) = self.memo.get(&key) {
            return Ok(a.clone());
        }
        let a = self.build_uncached(f, s)?;
        self.dumps
            .push((format!("{} @ {}", key.0, self.k.state_name(s)), a.dump()));
        self.memo.insert(key, a.clone());
        Ok(a)
    }

    fn build_uncached(&mut self, f: &StateFormula, s: usize) -> Result<Ata, McError> {
        match f {
            StateFormula::True => {
                let (cv, dirs) = sorted_dirs(self.k, &(1..=self.k.n()).collect());
                Ok(Ata::accept_all(cv, dirs, Vec::new()))
            }
            StateFormula::Prop(p) => Ok(self.atomic(p, s)),
            StateFormula::Not(g) => Ok(dualize(&self.build(g, s)?)),
            StateFormula::Or(a, b) => self.junction(f, a, b, s, false),
            StateFormula::And(a, b) => self.junction(f, a, b, s, true),
            StateFormula::ExistsPath(psi) => self.exists_path(f, psi, s),
            StateFormula::Exists { prop, obs, body } => self.quantifier(prop, obs, body, s),
        }
    }

    /// One state over the full direction set. A free proposition is read off
    /// the model state `s`; a quantified one is read from the input label.
    fn atomic(&self, p: &str, s: usize) -> Ata {
        let (cv, dirs) = sorted_dirs(self.k, &(1..=self.k.n()).collect());
        let quantified = self.quantified.contains(p);
        let atoms: Vec<String> = if quantified {
            alloc::vec![p.to_string()]
        } else {
            Vec::new()
        };
        let row: Vec<Pbf> = (0..1usize << atoms.len())
            .map(|m| {
                let holds = if quantified {
                    m & 1 == 1
                } else {
                    self.k.label(s).contains(p)
                };
                if holds {
                    Pbf::True
                } else {
                    Pbf::False
                }
            })
            .collect();
        Ata {
            coords: cv,
            dirs,
            atoms,
            initial: 0,
            delta: alloc::vec![row],
            colours: alloc::vec![0],
            top: alloc::vec![false],
        }
    }

    /// Disjunction and conjunction: narrow both children to the joint
    /// coordinates and add a fresh initial state that combines their initial
    /// transitions.
    fn junction(
        &mut self,
        whole: &StateFormula,
        a: &StateFormula,
        b: &StateFormula,
        s: usize,
        conj: bool,
    ) -> Result<Ata, McError> {
        let i = i_coords(whole, self.k.n());
        let a1 = narrow(&self.build(a, s)?, &i).map_err(internal)?;
        let a2 = narrow(&self.build(b, s)?, &i).map_err(internal)?;
        let union: BTreeSet<String> = a1.atoms.iter().chain(a2.atoms.iter()).cloned().collect();
        let a1 = a1.extend_atoms(&union);
        let a2 = a2.extend_atoms(&union);
        let mut out = Ata {
            coords: a1.coords.clone(),
            dirs: a1.dirs.clone(),
            atoms: a1.atoms.clone(),
            initial: 0,
            delta: alloc::vec![Vec::new()],
            colours: alloc::vec![0],
            top: alloc::vec![false],
        };
        let o1 = append(&mut out, &a1);
        let o2 = append(&mut out, &a2);
        out.delta[0] = (0..out.letter_count())
            .map(|m| {
                let l = shift(&a1.delta[a1.initial][m], o1);
                let r = shift(&a2.delta[a2.initial][m], o2);
                if conj {
                    pbf::and(l, r)
                } else {
                    pbf::or(l, r)
                }
            })
            .collect();
        Ok(reduce(&out))
    }

    /// `E psi`: product of the word automaton for the LTL skeleton of `psi`
    /// with the model states, guessing a path of the unfolding and following
    /// its projection in the input tree, wrapped with a guess-and-check layer
    /// that verifies maximal state subformulas via their (narrowed) automata
    /// and duals.
    fn exists_path(
        &mut self,
        whole: &StateFormula,
        psi: &PathFormula,
        s: usize,
    ) -> Result<Ata, McError> {
        let n = self.k.n();
        let i = i_coords(whole, n);
        let (cv, dirs) = sorted_dirs(self.k, &i);
        let dir_ix: BTreeMap<&Dir, usize> = dirs.iter().enumerate().map(|(x, d)| (d, x)).collect();
        let maxes = max_state_subformulas(psi);
        let sigma: BTreeSet<String> = (0..maxes.len()).map(|x| format!("#{x}")).collect();
        let skel = ltl_skeleton(psi, &maxes);
        let nbw = ltl_to_nbw(&skel, &sigma)
            .map_err(|e| input(format!("path formula translation failed: {e}")))?;
        let ns = self.k.state_count();

        // subformula automata per (maximal subformula, model state), narrowed
        // to the joint coordinates
        let mut children: Vec<Vec<Ata>> = Vec::new();
        let mut union_atoms: BTreeSet<String> = BTreeSet::new();
        for &phi_i in &maxes {
            let mut per_state = Vec::new();
            for sp in 0..ns {
                let c = narrow(&self.build(phi_i, sp)?, &i).map_err(internal)?;
                union_atoms.extend(c.atoms.iter().cloned());
                per_state.push(c);
            }
            children.push(per_state);
        }

        let atoms: Vec<String> = union_atoms.iter().cloned().collect();
        let letters = 1usize << atoms.len();
        // product block first: state (q, s') has id q * ns + s'
        let np = nbw.state_count * ns;
        let mut out = Ata {
            coords: cv.clone(),
            dirs: dirs.clone(),
            atoms,
            initial: nbw.initial * ns + s,
            delta: alloc::vec![Vec::new(); np],
            colours: (0..np)
                .map(|id| if nbw.accepting.contains(&(id / ns)) { 2 } else { 1 })
                .collect(),
            // the guessed path must stay inside the input tree: the whole
            // product block is in Q-bottom
            top: alloc::vec![false; np],
        };
        // per (i, s'): aligned child, its dual, and their block offsets;
        // identical children (common for subformulas that ignore the model
        // state) share one block
        let mut block_cache: BTreeMap<String, usize> = BTreeMap::new();
        let mut block_data: Vec<(Ata, usize, Ata, usize)> = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for per_state in &children {
            let mut row = Vec::new();
            for c in per_state {
                let ext = c.extend_atoms(&union_atoms);
                let idx = *block_cache.entry(ext.dump()).or_insert_with(|| {
                    let dual = dualize(&ext);
                    let off_c = append(&mut out, &ext);
                    let off_d = append(&mut out, &dual);
                    block_data.push((ext.clone(), off_c, dual, off_d));
                    block_data.len() - 1
                });
                row.push(idx);
            }
            blocks.push(row);
        }

        let skel_letters = all_letters(&sigma);
        let full_coords = self.k.full_coords();
        for q in 0..nbw.state_count {
            for sp in 0..ns {
                // core transition per skeleton letter: choose a word
                // transition and a model successor, move in its projection
                let mut cores: Vec<Pbf> = Vec::with_capacity(skel_letters.len());
                for a_prime in &skel_letters {
                    let mut opts = Vec::new();
                    for &q2 in &nbw.delta[q][a_prime] {
                        for &s2 in self.k.successors(sp) {
                            let d = project_dir(&full_coords, self.k.tuple(s2), &i);
                            opts.push(Pbf::Atom((dir_ix[&d], q2 * ns + s2)));
                        }
                    }
                    cores.push(pbf::or_all(opts));
                }
                out.delta[q * ns + sp] = (0..letters)
                    .map(|m| {
                        pbf::or_all(skel_letters.iter().enumerate().map(|(ai, a_prime)| {
                            let mut parts = alloc::vec![cores[ai].clone()];
                            for (x, row) in blocks.iter().enumerate() {
                                let (ext, off_c, dual, off_d) = &block_data[row[sp]];
                                let guessed = a_prime.contains(&format!("#{x}"));
                                parts.push(if guessed {
                                    shift(&ext.delta[ext.initial][m], *off_c)
                                } else {
                                    shift(&dual.delta[dual.initial][m], *off_d)
                                });
                            }
                            pbf::and_all(parts)
                        }))
                        .simplify()
                    })
                    .collect();
            }
        }
        Ok(reduce(&out))
    }

    /// `exists p^o`: narrow to the observed coordinates (hierarchy guarantees
    /// `o` is a subset of the body's coordinates), nondeterminize, project.
    fn quantifier(
        &mut self,
        p: &str,
        obs: &Observation,
        body: &StateFormula,
        s: usize,
    ) -> Result<Ata, McError> {
        let o = obs_set(obs, self.k.n());
        let a1 = reduce(&narrow(&self.build(body, s)?, &o).map_err(internal)?);
        let nta: Nta = simulate_capped(&a1, self.opts.simulate_cap).map_err(|e| {
            McError::Resource(format!(
                "nondeterminization for exists {p} exceeded {} states: {e}",
                self.opts.simulate_cap
            ))
        })?;
        Ok(project(&nta, p).into_ata().prune_unreachable())
    }
}

/// Automaton for a (sub)formula `phi` at state `s`. `quantified` names the
/// propositions to read from the input tree; all others are read from the
/// model labelling. Rejects non-hierarchical formulas with the violating
/// quantifier pair.
pub fn build_automaton(
    k: &Cks,
    s: usize,
    phi: &StateFormula,
    quantified: &BTreeSet<String>,
    opts: &TreeOptions,
) -> Result<Ata, McError> {
    if s >= k.state_count() {
        return Err(input(format!("state {s} is out of range")));
    }
    let phi = resolve_full(phi, k.n());
    if let Some(v) = hierarchy_violation(&phi) {
        return Err(input(format!("formula is not hierarchical: {v}")));
    }
    let mut b = Builder {
        k,
        quantified,
        opts,
        memo: BTreeMap::new(),
        dumps: Vec::new(),
    };
    b.build(&phi, s)
}

/// Tree-semantics model checking with default limits.
pub fn check_tree(k: &Cks, s: usize, f: &StateFormula) -> Result<bool, McError> {
    check_tree_opts(k, s, f, &TreeOptions::default()).map(|r| r.verdict)
}

/// Tree-semantics model checking: does the unfolding of `(K, s)` satisfy `f`?
/// Requires `f` hierarchical; aborts per `opts` on the nonelementary cases.
pub fn check_tree_opts(
    k: &Cks,
    s: usize,
    f: &StateFormula,
    opts: &TreeOptions,
) -> Result<TreeRun, McError> {
    if s >= k.state_count() {
        return Err(input(format!("state {s} is out of range")));
    }
    let resolved = resolve_full(f, k.n());
    let (renamed, parts) = rename_apart(&resolved);
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
    if let Some(v) = hierarchy_violation(&renamed) {
        return Err(input(format!("formula is not hierarchical: {v}")));
    }
    let depth = quantifier_depth(&renamed);
    if depth > opts.max_quantifier_depth {
        return Err(McError::Resource(format!(
            "quantifier depth {depth} exceeds the limit {}",
            opts.max_quantifier_depth
        )));
    }
    let mut b = Builder {
        k,
        quantified: &parts.quantified,
        opts,
        memo: BTreeMap::new(),
        dumps: Vec::new(),
    };
    let a = b.build(&renamed, s)?;
    // the full blank direction tree rooted at the projection of s
    let i = i_coords(&renamed, k.n());
    let root_proj = project_dir(&k.full_coords(), k.tuple(s), &i);
    let root_dir = a
        .dirs
        .iter()
        .position(|d| *d == root_proj)
        .expect("projection of a model state is a direction");
    let t = RegularTree::full(a.coords.clone(), a.dirs.clone(), root_dir);
    let verdict = membership(&a, &t, t.root).map_err(internal)?;
    Ok(TreeRun {
        verdict,
        automaton_states: a.state_count(),
        dumps: b.dumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::kripke::LocalAlphabets;
    use crate::mc::check_structure;
    use alloc::vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pf(text: &str) -> StateFormula {
        parse_formula(text).unwrap()
    }

    /// Single state with a self loop, one coordinate.
    pub(super) fn k1() -> Cks {
        let locals = LocalAlphabets::new(vec![vec!["a".into()]]).unwrap();
        Cks::new(
            locals,
            vec![("s".into(), vec!["a".into()])],
            &[("s".into(), "s".into())],
            &[],
        )
        .unwrap()
    }

    /// Two states on a one-letter-per-state alphabet, edges u -> v -> v and
    /// v -> u: a lasso with a stem choice.
    pub(super) fn k2() -> Cks {
        let locals = LocalAlphabets::new(vec![vec!["l1".into(), "l2".into()]]).unwrap();
        Cks::new(
            locals,
            vec![
                ("u".into(), vec!["l1".into()]),
                ("v".into(), vec!["l2".into()]),
            ],
            &[
                ("u".into(), "v".into()),
                ("v".into(), "v".into()),
                ("v".into(), "u".into()),
            ],
            &[],
        )
        .unwrap()
    }

    /// Deterministic two-state cycle u -> v -> u.
    pub(super) fn k3() -> Cks {
        let locals = LocalAlphabets::new(vec![vec!["a".into(), "b".into()]]).unwrap();
        Cks::new(
            locals,
            vec![
                ("u".into(), vec!["a".into()]),
                ("v".into(), vec!["b".into()]),
            ],
            &[("u".into(), "v".into()), ("v".into(), "u".into())],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn free_prop_reads_the_model_state() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let v = k.state_id("v").unwrap();
        let k = k.with_prop("p", &[u].into_iter().collect());
        let opts = TreeOptions::default();
        let none = BTreeSet::new();
        let a = build_automaton(&k, u, &pf("p"), &none, &opts).unwrap();
        assert_eq!(a.state_count(), 1);
        assert_eq!(a.delta[0][0], Pbf::True);
        let b = build_automaton(&k, v, &pf("p"), &none, &opts).unwrap();
        assert_eq!(b.delta[0][0], Pbf::False);
        assert!(check_tree(&k, u, &pf("p")).unwrap());
        assert!(!check_tree(&k, v, &pf("p")).unwrap());
    }

    #[test]
    fn quantified_prop_reads_the_root_label() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let quantified: BTreeSet<String> = ["p".to_string()].into_iter().collect();
        let a = build_automaton(&k, u, &pf("p"), &quantified, &TreeOptions::default()).unwrap();
        // trees differing only in the root label
        let dirs = a.dirs.clone();
        for root_label in [false, true] {
            for child_label in [false, true] {
                let mut t = RegularTree::full(a.coords.clone(), dirs.clone(), 0);
                // vertex 0 plays the root; label the other vertex as "child"
                if root_label {
                    t.vertices[0].label.insert("p".into());
                }
                if child_label {
                    t.vertices[1].label.insert("p".into());
                }
                assert_eq!(membership(&a, &t, 0).unwrap(), root_label);
            }
        }
    }

    #[test]
    fn ex_p_exhaustive_on_k0() {
        let base = Cks::k0();
        let f = pf("E X p");
        for mask in 0..4usize {
            let holds: BTreeSet<usize> = (0..2).filter(|i| mask & (1 << i) != 0).collect();
            let k = base.with_prop("p", &holds);
            for s in k.state_ids().collect::<Vec<_>>() {
                let expect = k.successors(s).iter().any(|t| holds.contains(t));
                assert_eq!(check_tree(&k, s, &f).unwrap(), expect, "mask {mask} s {s}");
            }
        }
    }

    // small random generators for the quantifier-free differential
    fn random_cks(rng: &mut StdRng) -> Cks {
        let letters: Vec<String> = (0..rng.gen_range(2..=3)).map(|i| format!("x{i}")).collect();
        let locals = LocalAlphabets::new(vec![letters.clone()]).unwrap();
        let states: Vec<(String, Vec<String>)> = letters
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("s{i}"), vec![l.clone()]))
            .collect();
        let n = states.len();
        let mut edges = Vec::new();
        for i in 0..n {
            let mut any = false;
            for j in 0..n {
                if rng.gen_bool(0.4) {
                    edges.push((format!("s{i}"), format!("s{j}")));
                    any = true;
                }
            }
            if !any {
                edges.push((format!("s{i}"), format!("s{}", rng.gen_range(0..n))));
            }
        }
        let k = Cks::new(locals, states, &edges, &[]).unwrap();
        let mut with_p: BTreeSet<usize> = BTreeSet::new();
        let mut with_r: BTreeSet<usize> = BTreeSet::new();
        for s in 0..n {
            if rng.gen_bool(0.5) {
                with_p.insert(s);
            }
            if rng.gen_bool(0.5) {
                with_r.insert(s);
            }
        }
        k.with_prop("p", &with_p).with_prop("r", &with_r)
    }

    fn random_path(rng: &mut StdRng, depth: usize) -> PathFormula {
        use crate::formula::{pnext, pnot, por, prop, puntil};
        if depth == 0 {
            let p = if rng.gen_bool(0.5) { "p" } else { "r" };
            return PathFormula::State(alloc::boxed::Box::new(prop(p)));
        }
        match rng.gen_range(0..5) {
            0 => pnext(random_path(rng, depth - 1)),
            1 => pnot(random_path(rng, depth - 1)),
            2 => por(random_path(rng, depth - 1), random_path(rng, depth - 1)),
            3 => puntil(random_path(rng, depth - 1), random_path(rng, depth - 1)),
            _ => PathFormula::State(alloc::boxed::Box::new(random_qfree(rng, depth - 1))),
        }
    }

    fn random_qfree(rng: &mut StdRng, depth: usize) -> StateFormula {
        use crate::formula::{equant, prop, snot, sor};
        if depth == 0 {
            let p = if rng.gen_bool(0.5) { "p" } else { "r" };
            return prop(p);
        }
        match rng.gen_range(0..4) {
            0 => snot(random_qfree(rng, depth - 1)),
            1 => sor(random_qfree(rng, depth - 1), random_qfree(rng, depth - 1)),
            _ => equant(random_path(rng, depth - 1)),
        }
    }

    #[test]
    fn quantifier_free_matches_structure_semantics() {
        let mut rng = StdRng::seed_from_u64(0x9e11);
        for round in 0..30 {
            let k = random_cks(&mut rng);
            let f = random_qfree(&mut rng, 2);
            let s = rng.gen_range(0..k.state_count());
            let tree = check_tree(&k, s, &f).unwrap();
            let structure = check_structure(&k, s, &f).unwrap();
            assert_eq!(tree, structure, "round {round}: {f} at {}", k.state_name(s));
        }
    }

    #[test]
    fn blind_line_quantifier_is_true() {
        // placing one horizontal line of q's in the tree: A F q, and once q
        // holds it never holds again
        let line = "exists q^{}. ((A (true U q)) & (!E (true U (q & E X E (true U q)))))";
        let f = pf(line);
        for k in [k1(), Cks::k0(), k3()] {
            for s in k.state_ids().collect::<Vec<_>>() {
                assert!(check_tree(&k, s, &f).unwrap(), "state {}", k.state_name(s));
            }
        }
    }

    #[test]
    fn separation_on_the_single_loop_model() {
        let k = k1();
        // q & A X A G !q, with A G phi spelled as !E(true U !phi)
        let f = pf("exists q^{1}. (q & (!(E X (E (true U q)))))");
        // the unfolding can label the root node only; the structure cannot
        assert!(check_tree(&k, 0, &f).unwrap());
        assert!(!check_structure(&k, 0, &f).unwrap());
    }

    #[test]
    fn blind_versus_full_observation_on_k0() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let body = "((E X q) & (E X !q))";
        // full observation distinguishes sibling nodes; the blind labelling
        // is per-level, so siblings agree
        assert!(check_tree(&k, u, &pf(&format!("exists q^{{1}}. {body}"))).unwrap());
        assert!(!check_tree(&k, u, &pf(&format!("exists q^{{}}. {body}"))).unwrap());
    }

    #[test]
    fn negation_duality_on_curated_cases() {
        for k in [Cks::k0(), k2()] {
            let u = k.state_id("u").unwrap();
            for text in [
                "exists q^{1}. ((E X q) & (E X !q))",
                "exists q^{}. ((E X q) & (E X !q))",
                "E X true",
            ] {
                let f = pf(text);
                let neg = crate::formula::snot(f.clone());
                assert_eq!(
                    check_tree(&k, u, &neg).unwrap(),
                    !check_tree(&k, u, &f).unwrap(),
                    "{text}"
                );
            }
        }
    }

    #[test]
    fn observation_monotonicity_curated() {
        // anything blind observation can do, full observation can do
        let k = k3();
        for body in ["(q & (!(E X (E (true U q)))))", "(E (true U q))"] {
            for s in k.state_ids().collect::<Vec<_>>() {
                let blind = check_tree(&k, s, &pf(&format!("exists q^{{}}. {body}"))).unwrap();
                let full = check_tree(&k, s, &pf(&format!("exists q^{{1}}. {body}"))).unwrap();
                assert!(!blind || full, "{body} at {}", k.state_name(s));
            }
        }
    }

    #[test]
    fn hierarchy_gate_rejects_with_the_violating_pair() {
        let k = Cks::k0();
        let f = pf("exists p^{1}. exists q^{}. (E (true U (p & q)))");
        let e = check_tree(&k, 0, &f).unwrap_err();
        match e {
            McError::Input(msg) => assert!(msg.contains("hierarchical"), "{msg}"),
            other => panic!("expected an input error, got {other:?}"),
        }
        let e = build_automaton(&k, 0, &f, &BTreeSet::new(), &TreeOptions::default()).unwrap_err();
        assert!(matches!(e, McError::Input(_)));
    }

    #[test]
    fn resource_guard_trips_on_deep_nesting() {
        let k = Cks::k0();
        let f = pf("exists a^{}. exists b^{}. exists c^{}. ((a | b) | c)");
        assert!(matches!(check_tree(&k, 0, &f), Err(McError::Resource(_))));
        // a tiny simulation cap trips the other guard
        let opts = TreeOptions {
            max_quantifier_depth: 2,
            simulate_cap: 1,
        };
        let f = pf("exists q^{1}. (q & E X q)");
        assert!(matches!(
            check_tree_opts(&k, 0, &f, &opts),
            Err(McError::Resource(_))
        ));
    }

    #[test]
    fn dump_collection_covers_subformulas() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let run = check_tree_opts(
            &k,
            u,
            &pf("exists q^{1}. (q & E X q)"),
            &TreeOptions::default(),
        )
        .unwrap();
        assert!(run.verdict);
        assert!(run.dumps.len() >= 3, "got {} dumps", run.dumps.len());
        assert!(run.automaton_states >= 1);
    }
}
