//! Alternating parity tree automata over direction sets Λ_I, with the
//! Q⊤/Q⊥ partition deciding plays that run into missing children, plus the
//! pillar constructions dualize / narrow / project and membership over
//! regular trees via parity games. (The fourth pillar, simulation, lives in
//! its own module.)

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::kripke::{project_dir, Dir};
use crate::parity::{solve_zielonka, Owner, ParityGame, Position};
use crate::pbf::{self, FlatPbf, Pbf};
use crate::tree::FiniteLabelledTree;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtaError {
    pub msg: String,
}

impl fmt::Display for AtaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl core::error::Error for AtaError {}

fn err(msg: String) -> AtaError {
    AtaError { msg }
}

/// Alternating parity tree automaton. Letters are subsets of `atoms`,
/// encoded as bitmasks (bit i set iff `atoms[i]` is in the letter); the
/// transition table is total over all `2^|atoms|` letters. Max-even parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ata {
    /// Sorted coordinate index set I.
    pub coords: Vec<usize>,
    /// The direction set Λ_I, sorted and duplicate-free.
    pub dirs: Vec<Dir>,
    /// Relevant propositions, sorted and duplicate-free.
    pub atoms: Vec<String>,
    pub initial: usize,
    /// `delta[q][letter mask]`; atoms of the formulas are (dir index, state).
    pub delta: Vec<Vec<Pbf>>,
    pub colours: Vec<usize>,
    /// Q⊤ flag per state; Q⊥ is the complement.
    pub top: Vec<bool>,
}

impl Ata {
    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn letter_count(&self) -> usize {
        1usize << self.atoms.len()
    }

    /// Bitmask of `label ∩ atoms`.
    pub fn letter_index(&self, label: &BTreeSet<String>) -> usize {
        let mut mask = 0;
        for (i, a) in self.atoms.iter().enumerate() {
            if label.contains(a) {
                mask |= 1 << i;
            }
        }
        mask
    }

    pub fn letter_set(&self, mask: usize) -> BTreeSet<String> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect()
    }

    pub fn validate(&self) -> Result<(), AtaError> {
        let n = self.state_count();
        if n == 0 {
            return Err(err("automaton must have at least one state".into()));
        }
        if self.initial >= n {
            return Err(err("initial state out of range".into()));
        }
        if self.colours.len() != n || self.top.len() != n {
            return Err(err("colour/partition vectors must cover all states".into()));
        }
        if self.dirs.is_empty() {
            return Err(err("direction set must be nonempty".into()));
        }
        let mut seen_dirs = BTreeSet::new();
        for d in &self.dirs {
            if d.len() != self.coords.len() {
                return Err(err("direction arity does not match the coordinate set".into()));
            }
            if !seen_dirs.insert(d.clone()) {
                return Err(err("duplicate direction".into()));
            }
        }
        if self.atoms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(err("atom set must be sorted and duplicate-free".into()));
        }
        let letters = self.letter_count();
        for row in &self.delta {
            if row.len() != letters {
                return Err(err("transition table must be total over the letter set".into()));
            }
            for f in row {
                let mut used = BTreeSet::new();
                f.atoms(&mut used);
                for (d, q) in used {
                    if d >= self.dirs.len() || q >= n {
                        return Err(err("transition atom out of range".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// The one-state automaton accepting every tree (δ ≡ ⊤, state in Q⊤).
    pub fn accept_all(coords: Vec<usize>, dirs: Vec<Dir>, atoms: Vec<String>) -> Ata {
        let letters = 1usize << atoms.len();
        Ata {
            coords,
            dirs,
            atoms,
            initial: 0,
            delta: alloc::vec![alloc::vec![Pbf::True; letters]],
            colours: alloc::vec![0],
            top: alloc::vec![true],
        }
    }

    /// Drop states unreachable from the initial state, preserving order.
    pub fn prune_unreachable(&self) -> Ata {
        let n = self.state_count();
        let mut reach = alloc::vec![false; n];
        let mut stack = alloc::vec![self.initial];
        reach[self.initial] = true;
        while let Some(q) = stack.pop() {
            for f in &self.delta[q] {
                let mut used = BTreeSet::new();
                f.atoms(&mut used);
                for (_, q2) in used {
                    if !reach[q2] {
                        reach[q2] = true;
                        stack.push(q2);
                    }
                }
            }
        }
        let mut remap = alloc::vec![usize::MAX; n];
        let mut next = 0;
        for q in 0..n {
            if reach[q] {
                remap[q] = next;
                next += 1;
            }
        }
        let mut delta = Vec::new();
        let mut colours = Vec::new();
        let mut top = Vec::new();
        for q in 0..n {
            if !reach[q] {
                continue;
            }
            delta.push(
                self.delta[q]
                    .iter()
                    .map(|f| f.map_atoms(&|(d, q2)| Pbf::Atom((d, remap[q2]))))
                    .collect(),
            );
            colours.push(self.colours[q]);
            top.push(self.top[q]);
        }
        Ata {
            coords: self.coords.clone(),
            dirs: self.dirs.clone(),
            atoms: self.atoms.clone(),
            initial: remap[self.initial],
            delta,
            colours,
            top,
        }
    }

    /// Renumber colours to the smallest range with the same max-even
    /// semantics: occurring colours of equal parity with no opposite-parity
    /// colour between them are merged, and order and parity are preserved,
    /// so the maximal colour of any trace keeps its parity.
    pub fn compact_colours(&self) -> Ata {
        let distinct: BTreeSet<usize> = self.colours.iter().copied().collect();
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut prev: Option<usize> = None;
        let mut next = 0;
        for &c in &distinct {
            match prev {
                None => next = c % 2,
                Some(p) => {
                    if c % 2 != p % 2 {
                        next += 1;
                    }
                }
            }
            map.insert(c, next);
            prev = Some(c);
        }
        let mut out = self.clone();
        out.colours = self.colours.iter().map(|c| map[c]).collect();
        out
    }

    /// Merge states that are syntactically identical (same transition row,
    /// colour and deadlock class), to a fixpoint. The construction of
    /// product automata copies identical blocks per model state; this undoes
    /// the copying without any language analysis.
    pub fn merge_duplicates(&self) -> Ata {
        let mut a = self.clone();
        for row in &mut a.delta {
            for f in row.iter_mut() {
                *f = f.simplify();
            }
        }
        loop {
            let mut reps: BTreeMap<(Vec<Pbf>, usize, bool), usize> = BTreeMap::new();
            let mut remap: Vec<usize> = (0..a.state_count()).collect();
            let mut changed = false;
            for q in 0..a.state_count() {
                let key = (a.delta[q].clone(), a.colours[q], a.top[q]);
                match reps.get(&key) {
                    Some(&r) => {
                        remap[q] = r;
                        changed = true;
                    }
                    None => {
                        reps.insert(key, q);
                    }
                }
            }
            if !changed {
                return a;
            }
            let mut b = a.clone();
            b.initial = remap[b.initial];
            b.delta = a
                .delta
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|f| f.map_atoms(&|(d, q2)| Pbf::Atom((d, remap[q2]))).simplify())
                        .collect()
                })
                .collect();
            a = b.prune_unreachable();
        }
    }

    /// Quotient by the coarsest partition under which equivalent states
    /// share colour and deadlock class and have identical transition rows
    /// after replacing every state by its class. Unlike
    /// [`Ata::merge_duplicates`] this also collapses mutually recursive
    /// copies, where the rows only differ by which copy they loop through.
    pub fn quotient(&self) -> Ata {
        let n = self.state_count();
        let mut class: Vec<usize> = {
            let mut ids: BTreeMap<(usize, bool), usize> = BTreeMap::new();
            (0..n)
                .map(|q| {
                    let fresh = ids.len();
                    *ids.entry((self.colours[q], self.top[q])).or_insert(fresh)
                })
                .collect()
        };
        let mut count = class.iter().copied().collect::<BTreeSet<_>>().len();
        loop {
            let mut ids: BTreeMap<(usize, Vec<Pbf>), usize> = BTreeMap::new();
            let mut next: Vec<usize> = Vec::with_capacity(n);
            for q in 0..n {
                let sig: Vec<Pbf> = self.delta[q]
                    .iter()
                    .map(|f| f.map_atoms(&|(d, q2)| Pbf::Atom((d, class[q2]))).simplify())
                    .collect();
                let fresh = ids.len();
                next.push(*ids.entry((class[q], sig)).or_insert(fresh));
            }
            let stable = ids.len() == count;
            count = ids.len();
            class = next;
            if stable {
                break;
            }
        }
        let mut rep: Vec<usize> = alloc::vec![usize::MAX; count];
        for q in (0..n).rev() {
            rep[class[q]] = q;
        }
        let out = Ata {
            coords: self.coords.clone(),
            dirs: self.dirs.clone(),
            atoms: self.atoms.clone(),
            initial: class[self.initial],
            delta: rep
                .iter()
                .map(|&q| {
                    self.delta[q]
                        .iter()
                        .map(|f| f.map_atoms(&|(d, q2)| Pbf::Atom((d, class[q2]))).simplify())
                        .collect()
                })
                .collect(),
            colours: rep.iter().map(|&q| self.colours[q]).collect(),
            top: rep.iter().map(|&q| self.top[q]).collect(),
        };
        out.prune_unreachable()
    }

    /// Resolve states whose language is trivially all trees or no trees and
    /// fold the constant into every referring row, cascading to a fixpoint.
    /// A state only ever referring to itself accepts everything when its
    /// colour is even and no row is `false` (runs loop with even maximum),
    /// and nothing when its colour is odd and no row is `true` (runs loop
    /// with odd maximum or die). Rows that are wholly constant decide the
    /// state regardless of colour.
    pub fn solve_sinks(&self) -> Ata {
        let mut a = self.clone();
        for row in &mut a.delta {
            for f in row.iter_mut() {
                *f = f.simplify();
            }
        }
        let mut solved: BTreeSet<usize> = BTreeSet::new();
        loop {
            let mut found: Option<(usize, bool)> = None;
            for q in 0..a.state_count() {
                if solved.contains(&q) {
                    continue;
                }
                let mut atoms = BTreeSet::new();
                for f in &a.delta[q] {
                    f.atoms(&mut atoms);
                }
                // simplified rows contain constants only as whole rows
                let has_true = a.delta[q].iter().any(|f| *f == Pbf::True);
                let has_false = a.delta[q].iter().any(|f| *f == Pbf::False);
                let self_only = atoms.iter().all(|&(_, q2)| q2 == q);
                let verdict = if atoms.is_empty() && !has_false {
                    Some(true)
                } else if atoms.is_empty() && !has_true {
                    Some(false)
                } else if self_only && a.colours[q] % 2 == 0 && !has_false {
                    Some(true)
                } else if self_only && a.colours[q] % 2 == 1 && !has_true {
                    Some(false)
                } else {
                    None
                };
                if let Some(v) = verdict {
                    found = Some((q, v));
                    break;
                }
            }
            let Some((q, v)) = found else {
                return a.prune_unreachable();
            };
            solved.insert(q);
            let c = if v { Pbf::True } else { Pbf::False };
            for row in &mut a.delta {
                for f in row.iter_mut() {
                    let c = c.clone();
                    *f = f
                        .map_atoms(&|(d, q2)| if q2 == q { c.clone() } else { Pbf::Atom((d, q2)) })
                        .simplify();
                }
            }
            for f in a.delta[q].iter_mut() {
                *f = c.clone();
            }
        }
    }

    /// Lower colours as far as the max-even semantics allows without
    /// language analysis. The states a trace visits infinitely often lie in
    /// one strongly connected component of the state graph, so only the
    /// colour order within an SCC matters: compact colours per SCC (as in
    /// [`Ata::compact_colours`], preserving order and parity locally) and
    /// zero out states on no cycle, which no trace repeats.
    pub fn relax_colours(&self) -> Ata {
        let n = self.state_count();
        let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for q in 0..n {
            let mut atoms = BTreeSet::new();
            for f in &self.delta[q] {
                f.atoms(&mut atoms);
            }
            let succs: BTreeSet<usize> = atoms.into_iter().map(|(_, q2)| q2).collect();
            edges[q] = succs.into_iter().collect();
        }
        let sub = alloc::vec![true; n];
        let mut out = self.clone();
        for (scc, cyclic) in crate::parity::sccs(&edges, &sub) {
            if !cyclic {
                for &q in &scc {
                    out.colours[q] = 0;
                }
                continue;
            }
            let distinct: BTreeSet<usize> = scc.iter().map(|&q| self.colours[q]).collect();
            let mut map: BTreeMap<usize, usize> = BTreeMap::new();
            let mut prev: Option<usize> = None;
            let mut next = 0;
            for &c in &distinct {
                match prev {
                    None => next = c % 2,
                    Some(p) => {
                        if c % 2 != p % 2 {
                            next += 1;
                        }
                    }
                }
                map.insert(c, next);
                prev = Some(c);
            }
            for &q in &scc {
                out.colours[q] = map[&self.colours[q]];
            }
        }
        out
    }

    /// Retabulate over a larger atom set; extra atoms are ignored by the
    /// transitions, so the language over the richer labels is unchanged.
    pub fn extend_atoms(&self, extra: &BTreeSet<String>) -> Ata {
        let mut atoms: BTreeSet<String> = self.atoms.iter().cloned().collect();
        atoms.extend(extra.iter().cloned());
        let atoms: Vec<String> = atoms.into_iter().collect();
        let letters = 1usize << atoms.len();
        let delta = self
            .delta
            .iter()
            .map(|row| {
                (0..letters)
                    .map(|mask| {
                        let set: BTreeSet<String> = atoms
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, a)| a.clone())
                            .collect();
                        row[self.letter_index(&set)].clone()
                    })
                    .collect()
            })
            .collect();
        Ata {
            coords: self.coords.clone(),
            dirs: self.dirs.clone(),
            atoms,
            initial: self.initial,
            delta,
            colours: self.colours.clone(),
            top: self.top.clone(),
        }
    }

    /// Stable text dump for golden tests.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "ata coords={:?} dirs={} atoms={} states={} initial=q{}",
            self.coords,
            self.dirs.len(),
            self.atoms.len(),
            self.state_count(),
            self.initial
        );
        let dir_name = |d: usize| format!("({})", self.dirs[d].join(","));
        let state_name = |q: usize| format!("q{q}");
        for q in 0..self.state_count() {
            let part = if self.top[q] { "top" } else { "bot" };
            let _ = writeln!(out, "state q{q} colour {} {part}", self.colours[q]);
            for mask in 0..self.letter_count() {
                let set = self.letter_set(mask);
                let letter: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
                let _ = writeln!(
                    out,
                    "  {{{}}}: {}",
                    letter.join(" "),
                    self.delta[q][mask].render(&dir_name, &state_name)
                );
            }
        }
        out
    }

    /// Check the nondeterministic shape: every transition formula is in
    /// disjunctive normal form and every disjunct mentions, per direction,
    /// exactly one atom of {d} x Q.
    pub fn nta_shape(&self) -> Result<(), AtaError> {
        for (q, row) in self.delta.iter().enumerate() {
            for (mask, f) in row.iter().enumerate() {
                let disjuncts = f.dnf_disjuncts().ok_or_else(|| {
                    err(format!("delta(q{q}, letter {mask}) is not in disjunctive normal form"))
                })?;
                for disjunct in disjuncts {
                    let set: BTreeSet<(usize, usize)> = disjunct.into_iter().collect();
                    for d in 0..self.dirs.len() {
                        let count = set.iter().filter(|(dd, _)| *dd == d).count();
                        if count != 1 {
                            return Err(err(format!(
                                "delta(q{q}, letter {mask}): a disjunct mentions direction {d} {count} times (want exactly 1)"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// A nondeterministic tree automaton: an `Ata` whose transitions pass the
/// per-direction-exactly-one-atom disjunct check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nta(Ata);

impl Nta {
    pub fn new(a: Ata) -> Result<Nta, AtaError> {
        a.validate()?;
        a.nta_shape()?;
        Ok(Nta(a))
    }

    pub fn ata(&self) -> &Ata {
        &self.0
    }

    pub fn into_ata(self) -> Ata {
        self.0
    }
}

/// Complement the language: swap ∧/∨ and ⊤/⊥ in every transition, increment
/// every colour (flipping parity while staying in ℕ), swap Q⊤ and Q⊥.
pub fn dualize(a: &Ata) -> Ata {
    Ata {
        coords: a.coords.clone(),
        dirs: a.dirs.clone(),
        atoms: a.atoms.clone(),
        initial: a.initial,
        delta: a
            .delta
            .iter()
            .map(|row| row.iter().map(|f| f.dual()).collect())
            .collect(),
        colours: a.colours.iter().map(|c| c + 1).collect(),
        top: a.top.iter().map(|b| !b).collect(),
    }
}

/// Narrow from Λ_I to Λ_J for J ⊆ I: each atom [d, q] becomes
/// [proj_J(d), q]. Subtrees of a lift at directions with equal J-projection
/// are isomorphic, so for alternating automata replacing atoms is the whole
/// construction; state count is unchanged.
pub fn narrow(a: &Ata, j: &BTreeSet<usize>) -> Result<Ata, AtaError> {
    if !j.iter().all(|x| a.coords.contains(x)) {
        return Err(err(format!(
            "narrowing target {j:?} is not a subset of the coordinate set {:?}",
            a.coords
        )));
    }
    let coords: Vec<usize> = a.coords.iter().copied().filter(|c| j.contains(c)).collect();
    let mut new_dirs: BTreeSet<Dir> = BTreeSet::new();
    for d in &a.dirs {
        new_dirs.insert(project_dir(&a.coords, d, j));
    }
    let new_dirs: Vec<Dir> = new_dirs.into_iter().collect();
    let dir_map: Vec<usize> = a
        .dirs
        .iter()
        .map(|d| {
            let p = project_dir(&a.coords, d, j);
            new_dirs.binary_search(&p).unwrap()
        })
        .collect();
    Ok(Ata {
        coords,
        dirs: new_dirs,
        atoms: a.atoms.clone(),
        initial: a.initial,
        delta: a
            .delta
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| f.map_atoms(&|(d, q)| Pbf::Atom((dir_map[d], q))))
                    .collect()
            })
            .collect(),
        colours: a.colours.clone(),
        top: a.top.clone(),
    })
}

/// Existential projection on proposition p, sound only for nondeterministic
/// automata: δ'(q, a) = δ(q, a ∪ {p}) ∨ δ(q, a ∖ {p}), and p leaves the
/// atom set. Same states, same colours.
pub fn project(n: &Nta, p: &str) -> Nta {
    let a = n.ata();
    let Some(bit) = a.atoms.iter().position(|x| x == p) else {
        return n.clone();
    };
    let atoms: Vec<String> = a
        .atoms
        .iter()
        .filter(|x| x.as_str() != p)
        .cloned()
        .collect();
    let letters = 1usize << atoms.len();
    let delta = a
        .delta
        .iter()
        .map(|row| {
            (0..letters)
                .map(|mask| {
                    // reinsert the p bit position to index the old table
                    let low = mask & ((1 << bit) - 1);
                    let high = (mask >> bit) << (bit + 1);
                    let without = high | low;
                    let with = without | (1 << bit);
                    pbf::or(row[with].clone(), row[without].clone())
                })
                .collect()
        })
        .collect();
    Nta(Ata {
        coords: a.coords.clone(),
        dirs: a.dirs.clone(),
        atoms,
        initial: a.initial,
        delta,
        colours: a.colours.clone(),
        top: a.top.clone(),
    })
}

/// A regular tree: pointed finite graph presenting an infinite (or partial)
/// Λ_I-tree. Each vertex carries the direction labelling it, a label set,
/// and at most one child per direction; missing children are missing tree
/// nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtVertex {
    /// Index into `dirs`: the direction by which this node is reached.
    pub dir: usize,
    pub label: BTreeSet<String>,
    /// Child vertex ids; each child's own `dir` names its direction, and
    /// they must be pairwise distinct.
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularTree {
    pub coords: Vec<usize>,
    pub dirs: Vec<Dir>,
    pub vertices: Vec<RtVertex>,
    pub root: usize,
}

impl RegularTree {
    pub fn validate(&self) -> Result<(), AtaError> {
        if self.vertices.is_empty() {
            return Err(err("regular tree must have a root vertex".into()));
        }
        if self.root >= self.vertices.len() {
            return Err(err("root vertex out of range".into()));
        }
        let mut seen = BTreeSet::new();
        for d in &self.dirs {
            if d.len() != self.coords.len() {
                return Err(err("direction arity does not match the coordinate set".into()));
            }
            if !seen.insert(d.clone()) {
                return Err(err("duplicate direction".into()));
            }
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.dir >= self.dirs.len() {
                return Err(err(format!("vertex {i}: direction out of range")));
            }
            let mut dirs_used = BTreeSet::new();
            for &c in &v.children {
                if c >= self.vertices.len() {
                    return Err(err(format!("vertex {i}: child out of range")));
                }
                if !dirs_used.insert(self.vertices[c].dir) {
                    return Err(err(format!("vertex {i}: two children in one direction")));
                }
            }
        }
        Ok(())
    }

    /// The child of `v` in direction index `d`, if present.
    pub fn child(&self, v: usize, d: usize) -> Option<usize> {
        self.vertices[v]
            .children
            .iter()
            .copied()
            .find(|&c| self.vertices[c].dir == d)
    }

    /// The full tree: one vertex per direction, every vertex has every
    /// vertex as a child, all labels empty. Its unfolding from the vertex
    /// for direction `root_dir` is the complete Λ-tree rooted there.
    pub fn full(coords: Vec<usize>, dirs: Vec<Dir>, root_dir: usize) -> RegularTree {
        let all: Vec<usize> = (0..dirs.len()).collect();
        let vertices = (0..dirs.len())
            .map(|d| RtVertex {
                dir: d,
                label: BTreeSet::new(),
                children: all.clone(),
            })
            .collect();
        RegularTree {
            coords,
            dirs,
            vertices,
            root: root_dir,
        }
    }

    /// Bounded-depth unfolding into an explicit tree (test oracle surface).
    pub fn unfold(&self, depth: usize) -> FiniteLabelledTree {
        let mut nodes: BTreeMap<Vec<Dir>, BTreeSet<String>> = BTreeMap::new();
        let root_word = alloc::vec![self.dirs[self.vertices[self.root].dir].clone()];
        let mut frontier = alloc::vec![(root_word.clone(), self.root)];
        nodes.insert(root_word, self.vertices[self.root].label.clone());
        for _ in 0..depth {
            let mut next = Vec::new();
            for (word, v) in frontier {
                for &c in &self.vertices[v].children {
                    let mut w = word.clone();
                    w.push(self.dirs[self.vertices[c].dir].clone());
                    nodes.insert(w.clone(), self.vertices[c].label.clone());
                    next.push((w, c));
                }
            }
            frontier = next;
        }
        FiniteLabelledTree {
            coords: self.coords.clone(),
            nodes,
        }
    }
}

fn interleave(
    coords_a: &[usize],
    a: &Dir,
    coords_b: &[usize],
    b: &Dir,
) -> (Vec<usize>, Dir) {
    let mut pairs: Vec<(usize, String)> = coords_a
        .iter()
        .zip(a)
        .map(|(&c, v)| (c, v.clone()))
        .chain(coords_b.iter().zip(b).map(|(&c, v)| (c, v.clone())))
        .collect();
    pairs.sort();
    let coords = pairs.iter().map(|(c, _)| *c).collect();
    let dir = pairs.into_iter().map(|(_, v)| v).collect();
    (coords, dir)
}

/// The lift of a Λ_J regular tree to Λ_I (J = t.coords ⊆ I): vertices are
/// pairs (vertex of t, hidden Λ_{I∖J} tuple), labels pulled back through
/// projection, root paired with `extra`. Unfolds to lift_tree of t's
/// unfolding.
pub fn lift_regular_tree(
    t: &RegularTree,
    hidden_coords: &[usize],
    hidden_dirs: &[Dir],
    extra: usize,
) -> Result<RegularTree, AtaError> {
    if hidden_dirs.is_empty() || extra >= hidden_dirs.len() {
        return Err(err("lift needs a nonempty hidden direction set and a valid extra tuple".into()));
    }
    if hidden_coords.iter().any(|c| t.coords.contains(c)) {
        return Err(err("hidden coordinates must be disjoint from the tree coordinates".into()));
    }
    let mut coords_full: Vec<usize> = Vec::new();
    let mut dirs_full: BTreeSet<Dir> = BTreeSet::new();
    for d in &t.dirs {
        for h in hidden_dirs {
            let (c, dir) = interleave(&t.coords, d, hidden_coords, h);
            coords_full = c;
            dirs_full.insert(dir);
        }
    }
    let dirs_full: Vec<Dir> = dirs_full.into_iter().collect();
    let dir_id = |jd: usize, h: usize| -> usize {
        let (_, dir) = interleave(&t.coords, &t.dirs[jd], hidden_coords, &hidden_dirs[h]);
        dirs_full.binary_search(&dir).unwrap()
    };
    // vertex (v, h) has id v * |hidden| + h
    let hn = hidden_dirs.len();
    let mut vertices = Vec::with_capacity(t.vertices.len() * hn);
    for v in &t.vertices {
        for h in 0..hn {
            let mut children = Vec::new();
            for &c in &v.children {
                for h2 in 0..hn {
                    children.push(c * hn + h2);
                }
            }
            vertices.push(RtVertex {
                dir: dir_id(v.dir, h),
                label: v.label.clone(),
                children,
            });
        }
    }
    let lifted = RegularTree {
        coords: coords_full,
        dirs: dirs_full,
        vertices,
        root: t.root * hn + extra,
    };
    lifted.validate()?;
    Ok(lifted)
}

/// Acceptance-game membership: does the automaton accept the unfolding of
/// `t` from `start`? Game positions are (vertex, state) plus (vertex,
/// state, transition subformula); Eve resolves disjunctions, Adam
/// conjunctions, atoms move to the child in their direction, and a missing
/// child is won by the player named by the sent state's partition.
pub fn membership(a: &Ata, t: &RegularTree, start: usize) -> Result<bool, AtaError> {
    a.validate()?;
    t.validate()?;
    if a.coords != t.coords || a.dirs != t.dirs {
        return Err(err("automaton and tree have different direction sets".into()));
    }
    if start >= t.vertices.len() {
        return Err(err("start vertex out of range".into()));
    }
    // flattened transition formula per (state, letter), built on demand
    let mut flat: BTreeMap<(usize, usize), (Vec<FlatPbf>, usize)> = BTreeMap::new();
    #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum Key {
        State(usize, usize),
        Node(usize, usize, usize, usize), // vertex, state, letter, node id
    }
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    let mut order: Vec<Key> = Vec::new();
    let intern = |k: Key, order: &mut Vec<Key>, ids: &mut BTreeMap<Key, usize>| -> usize {
        *ids.entry(k).or_insert_with(|| {
            order.push(k);
            order.len() - 1
        })
    };
    let init = intern(Key::State(start, a.initial), &mut order, &mut ids);
    let mut positions: Vec<Position> = Vec::new();
    let mut i = 0;
    // each iteration appends the position for order[i]; interning may extend order
    while i < order.len() {
        let key = order[i];
        let pos = match key {
            Key::State(v, q) => {
                let letter = a.letter_index(&t.vertices[v].label);
                flat.entry((q, letter))
                    .or_insert_with(|| a.delta[q][letter].flatten());
                let root = flat[&(q, letter)].1;
                let succ = intern(Key::Node(v, q, letter, root), &mut order, &mut ids);
                Position {
                    owner: Owner::Eve,
                    colour: a.colours[q],
                    succs: alloc::vec![succ],
                    deadlock_winner: None,
                }
            }
            Key::Node(v, q, letter, node) => match flat[&(q, letter)].0[node] {
                FlatPbf::True => Position {
                    owner: Owner::Eve,
                    colour: 0,
                    succs: Vec::new(),
                    deadlock_winner: Some(Owner::Eve),
                },
                FlatPbf::False => Position {
                    owner: Owner::Adam,
                    colour: 0,
                    succs: Vec::new(),
                    deadlock_winner: Some(Owner::Adam),
                },
                FlatPbf::And(l, r) => Position {
                    owner: Owner::Adam,
                    colour: 0,
                    succs: alloc::vec![
                        intern(Key::Node(v, q, letter, l), &mut order, &mut ids),
                        intern(Key::Node(v, q, letter, r), &mut order, &mut ids),
                    ],
                    deadlock_winner: None,
                },
                FlatPbf::Or(l, r) => Position {
                    owner: Owner::Eve,
                    colour: 0,
                    succs: alloc::vec![
                        intern(Key::Node(v, q, letter, l), &mut order, &mut ids),
                        intern(Key::Node(v, q, letter, r), &mut order, &mut ids),
                    ],
                    deadlock_winner: None,
                },
                FlatPbf::Atom((d, q2)) => match t.child(v, d) {
                    Some(w) => Position {
                        owner: Owner::Eve,
                        colour: 0,
                        succs: alloc::vec![intern(Key::State(w, q2), &mut order, &mut ids)],
                        deadlock_winner: None,
                    },
                    // missing child: the sent state's partition decides
                    None => Position {
                        owner: Owner::Eve,
                        colour: 0,
                        succs: Vec::new(),
                        deadlock_winner: Some(if a.top[q2] { Owner::Eve } else { Owner::Adam }),
                    },
                },
            },
        };
        positions.push(pos);
        i += 1;
    }
    let game = ParityGame {
        positions,
        initial: init,
    };
    let sol = solve_zielonka(&game).map_err(|e| err(format!("membership game: {e}")))?;
    Ok(sol.winner[init] == Owner::Eve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::LocalAlphabets;
    use crate::pbf::{and_all, or_all};
    use crate::tree::lift_tree;
    use alloc::string::ToString;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn two_dirs() -> (Vec<usize>, Vec<Dir>) {
        (vec![1], vec![vec![s("l1")], vec![s("l2")]])
    }

    /// Single state, accepts iff p labels the root.
    fn root_p(atoms_p: &str) -> Ata {
        let (coords, dirs) = two_dirs();
        Ata {
            coords,
            dirs,
            atoms: vec![s(atoms_p)],
            initial: 0,
            delta: vec![vec![Pbf::False, Pbf::True]],
            colours: vec![1],
            top: vec![false],
        }
    }

    fn full_tree_with_root_label(label: &[&str]) -> RegularTree {
        let (coords, dirs) = two_dirs();
        let mut t = RegularTree::full(coords, dirs, 0);
        t.vertices[0].label = label.iter().map(|x| s(x)).collect();
        t
    }

    #[test]
    fn accept_all_and_its_dual() {
        let (coords, dirs) = two_dirs();
        let a = Ata::accept_all(coords.clone(), dirs.clone(), vec![]);
        let t = RegularTree::full(coords, dirs, 1);
        assert!(membership(&a, &t, t.root).unwrap());
        let d = dualize(&a);
        assert_eq!(d.delta[0][0], Pbf::False);
        assert!(!membership(&d, &t, t.root).unwrap());
    }

    #[test]
    fn root_label_membership() {
        let a = root_p("p");
        let with_p = full_tree_with_root_label(&["p"]);
        let without = full_tree_with_root_label(&[]);
        assert!(membership(&a, &with_p, with_p.root).unwrap());
        assert!(!membership(&a, &without, without.root).unwrap());
    }

    #[test]
    fn missing_child_partition_decides() {
        let (coords, dirs) = two_dirs();
        // q0 demands q1 in direction 0; the tree has no children at all.
        let mk = |top1: bool| Ata {
            coords: coords.clone(),
            dirs: dirs.clone(),
            atoms: vec![],
            initial: 0,
            delta: vec![vec![Pbf::Atom((0, 1))], vec![Pbf::True]],
            colours: vec![0, 0],
            top: vec![false, top1],
        };
        let t = RegularTree {
            coords: coords.clone(),
            dirs: dirs.clone(),
            vertices: vec![RtVertex {
                dir: 0,
                label: BTreeSet::new(),
                children: vec![],
            }],
            root: 0,
        };
        assert!(!membership(&mk(false), &t, 0).unwrap());
        assert!(membership(&mk(true), &t, 0).unwrap());
    }

    #[test]
    fn dualize_involution_up_to_colour_shift() {
        let a = root_p("p");
        let dd = dualize(&dualize(&a));
        let mut shifted = a.clone();
        for c in &mut shifted.colours {
            *c += 2;
        }
        assert_eq!(dd, shifted);
    }

    fn random_pbf(rng: &mut ChaCha8Rng, dirs: usize, states: usize, depth: usize) -> Pbf {
        if depth == 0 || rng.gen_bool(0.4) {
            match rng.gen_range(0..6) {
                0 => Pbf::True,
                1 => Pbf::False,
                _ => Pbf::Atom((rng.gen_range(0..dirs), rng.gen_range(0..states))),
            }
        } else {
            let a = random_pbf(rng, dirs, states, depth - 1);
            let b = random_pbf(rng, dirs, states, depth - 1);
            if rng.gen_bool(0.5) {
                pbf::and(a, b)
            } else {
                pbf::or(a, b)
            }
        }
    }

    fn random_ata(
        rng: &mut ChaCha8Rng,
        coords: Vec<usize>,
        dirs: Vec<Dir>,
        atoms: Vec<String>,
    ) -> Ata {
        let states = rng.gen_range(1..=4);
        let letters = 1usize << atoms.len();
        let delta = (0..states)
            .map(|_| {
                (0..letters)
                    .map(|_| random_pbf(rng, dirs.len(), states, 2))
                    .collect()
            })
            .collect();
        Ata {
            coords,
            dirs,
            atoms,
            initial: 0,
            delta,
            colours: (0..states).map(|_| rng.gen_range(0..4)).collect(),
            top: (0..states).map(|_| rng.gen_bool(0.5)).collect(),
        }
    }

    fn random_tree(
        rng: &mut ChaCha8Rng,
        coords: Vec<usize>,
        dirs: Vec<Dir>,
        atoms: &[String],
    ) -> RegularTree {
        let n = rng.gen_range(1..=4);
        let vertices: Vec<RtVertex> = (0..n)
            .map(|_| RtVertex {
                dir: rng.gen_range(0..dirs.len()),
                label: atoms
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .cloned()
                    .collect(),
                children: vec![],
            })
            .collect();
        let mut t = RegularTree {
            coords,
            dirs,
            vertices,
            root: rng.gen_range(0..n),
        };
        for v in 0..n {
            for d in 0..t.dirs.len() {
                if rng.gen_bool(0.7) {
                    let cands: Vec<usize> =
                        (0..n).filter(|&c| t.vertices[c].dir == d).collect();
                    if !cands.is_empty() {
                        let c = cands[rng.gen_range(0..cands.len())];
                        t.vertices[v].children.push(c);
                    }
                }
            }
        }
        t.validate().unwrap();
        t
    }

    #[test]
    fn dualize_flips_membership_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (coords, dirs) = two_dirs();
        let atoms = vec![s("p")];
        for _ in 0..60 {
            let a = random_ata(&mut rng, coords.clone(), dirs.clone(), atoms.clone());
            let t = random_tree(&mut rng, coords.clone(), dirs.clone(), &atoms);
            let m = membership(&a, &t, t.root).unwrap();
            let md = membership(&dualize(&a), &t, t.root).unwrap();
            assert_eq!(m, !md);
        }
    }

    #[test]
    fn narrow_identity_and_accept_all() {
        let (coords, dirs) = two_dirs();
        let a = root_p("p");
        let full: BTreeSet<usize> = coords.iter().copied().collect();
        assert_eq!(narrow(&a, &full).unwrap(), a);
        let all = Ata::accept_all(coords, dirs, vec![]);
        let nar = narrow(&all, &[1].into_iter().collect()).unwrap();
        assert_eq!(nar.delta[0][0], Pbf::True);
    }

    #[test]
    fn narrow_contract_randomized() {
        // membership(narrow(a, {1}), t) == membership(a, lift(t, e)) over
        // coordinates {1,2}, hidden alphabet {x, y}
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let locals = LocalAlphabets::new(vec![
            vec![s("a"), s("b")],
            vec![s("x"), s("y")],
        ])
        .unwrap();
        let coords_full = vec![1, 2];
        let dirs_full = {
            let mut d = locals.dirs(&coords_full);
            d.sort();
            d
        };
        let coords_j = vec![1usize];
        let dirs_j: Vec<Dir> = vec![vec![s("a")], vec![s("b")]];
        let hidden: Vec<Dir> = vec![vec![s("x")], vec![s("y")]];
        let atoms = vec![s("p")];
        let j: BTreeSet<usize> = [1].into_iter().collect();
        for _ in 0..40 {
            let a = random_ata(&mut rng, coords_full.clone(), dirs_full.clone(), atoms.clone());
            let t = random_tree(&mut rng, coords_j.clone(), dirs_j.clone(), &atoms);
            let e = rng.gen_range(0..hidden.len());
            let narrowed = narrow(&a, &j).unwrap();
            assert_eq!(narrowed.state_count(), a.state_count());
            let lifted = lift_regular_tree(&t, &[2], &hidden, e).unwrap();
            assert_eq!(lifted.dirs, dirs_full);
            let lhs = membership(&narrowed, &t, t.root).unwrap();
            let rhs = membership(&a, &lifted, lifted.root).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lift_regular_tree_unfolds_to_lift_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let locals = LocalAlphabets::new(vec![
            vec![s("a"), s("b")],
            vec![s("x"), s("y")],
        ])
        .unwrap();
        let coords_j = vec![1usize];
        let dirs_j: Vec<Dir> = vec![vec![s("a")], vec![s("b")]];
        let hidden: Vec<Dir> = vec![vec![s("x")], vec![s("y")]];
        for _ in 0..10 {
            let t = random_tree(&mut rng, coords_j.clone(), dirs_j.clone(), &[s("p")]);
            let e = rng.gen_range(0..hidden.len());
            let lifted = lift_regular_tree(&t, &[2], &hidden, e).unwrap();
            let depth = 3;
            let explicit = t.unfold(depth);
            let expected = lift_tree(&explicit, &[1, 2], &hidden[e], &locals).unwrap();
            assert_eq!(lifted.unfold(depth), expected);
        }
    }

    #[test]
    fn project_root_p_accepts_everything() {
        let a = root_p("p");
        // make it nondeterministic in shape: conjoin a successor per direction
        let succ = and_all((0..2).map(|d| Pbf::Atom((d, 1))));
        let nta = Nta::new(Ata {
            coords: a.coords.clone(),
            dirs: a.dirs.clone(),
            atoms: a.atoms.clone(),
            initial: 0,
            delta: vec![
                vec![Pbf::False, succ.clone()],
                vec![succ.clone(), succ.clone()],
            ],
            colours: vec![2, 2],
            top: vec![false, false],
        })
        .unwrap();
        let projected = project(&nta, "p");
        assert!(projected.ata().atoms.is_empty());
        let without = full_tree_with_root_label(&[]);
        assert!(!membership(nta.ata(), &without, without.root).unwrap());
        assert!(membership(projected.ata(), &without, without.root).unwrap());
    }

    #[test]
    fn project_ignoring_p_is_identity_modulo_atoms() {
        let (coords, dirs) = two_dirs();
        let succ = and_all((0..2).map(|d| Pbf::Atom((d, 0))));
        let nta = Nta::new(Ata {
            coords,
            dirs,
            atoms: vec![s("p")],
            initial: 0,
            delta: vec![vec![succ.clone(), succ.clone()]],
            colours: vec![2],
            top: vec![false],
        })
        .unwrap();
        let projected = project(&nta, "p");
        // p requested but both letters agreed, so the or collapses
        assert_eq!(projected.ata().delta[0][0], pbf::or(succ.clone(), succ));
        let q = project(&nta, "q");
        assert_eq!(q, nta);
    }

    #[test]
    fn nta_shape_check() {
        let (coords, dirs) = two_dirs();
        let good = and_all((0..2).map(|d| Pbf::Atom((d, 0))));
        let a = Ata {
            coords: coords.clone(),
            dirs: dirs.clone(),
            atoms: vec![],
            initial: 0,
            delta: vec![vec![good]],
            colours: vec![0],
            top: vec![false],
        };
        assert!(a.nta_shape().is_ok());
        let bad = Ata {
            delta: vec![vec![Pbf::Atom((0, 0))]],
            ..a.clone()
        };
        assert!(bad.nta_shape().is_err());
        let not_dnf = Ata {
            delta: vec![vec![pbf::and(
                or_all((0..2).map(|d| Pbf::Atom((d, 0)))),
                Pbf::Atom((1, 0)),
            )]],
            ..a
        };
        assert!(not_dnf.nta_shape().is_err());
    }

    #[test]
    fn prune_unreachable_keeps_language_entry() {
        let (coords, dirs) = two_dirs();
        let a = Ata {
            coords,
            dirs,
            atoms: vec![],
            initial: 1,
            delta: vec![
                vec![Pbf::True],
                vec![Pbf::Atom((0, 2))],
                vec![Pbf::True],
            ],
            colours: vec![0, 2, 0],
            top: vec![true, false, true],
        };
        let p = a.prune_unreachable();
        assert_eq!(p.state_count(), 2);
        assert_eq!(p.initial, 0);
        assert_eq!(p.delta[0][0], Pbf::Atom((0, 1)));
        assert!(p.top[1]);
    }

    #[test]
    fn membership_position_bound() {
        // |positions| <= |vertices| * |Q| * (1 + max subformula count) is
        // implied by construction; spot-check the game solves on a larger
        // random instance without blowup
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (coords, dirs) = two_dirs();
        let atoms = vec![s("p"), s("q")];
        for _ in 0..10 {
            let a = random_ata(&mut rng, coords.clone(), dirs.clone(), atoms.clone());
            let t = random_tree(&mut rng, coords.clone(), dirs.clone(), &atoms);
            membership(&a, &t, t.root).unwrap();
        }
    }

    #[test]
    fn dump_golden() {
        let a = root_p("p");
        let d = a.dump();
        assert!(d.contains("state q0 colour 1 bot"));
        assert!(d.contains("{}: false"));
        assert!(d.contains("{p}: true"));
    }

    #[test]
    fn extend_atoms_keeps_behaviour() {
        let a = root_p("p");
        let b = a.extend_atoms(&[s("q")].into_iter().collect());
        assert_eq!(b.atoms, vec![s("p"), s("q")]);
        for mask in 0..4usize {
            let set = b.letter_set(mask);
            assert_eq!(b.delta[0][mask], a.delta[0][a.letter_index(&set)]);
        }
    }
}
