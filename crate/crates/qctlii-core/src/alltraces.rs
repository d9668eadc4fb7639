//! Deterministic parity word automata over annotation alphabets.
//!
//! An annotation is a set of state pairs; an infinite annotation sequence
//! carries traces: state sequences following the pairs, starting at any
//! position and state. [`AllTraces`] is a deterministic parity machine
//! accepting exactly the sequences all of whose infinite traces satisfy the
//! max-even parity condition of a given colouring. It is the engine behind
//! the simulation construction (alternating to nondeterministic tree
//! automata), where it checks that every trace of a guessed run annotation
//! is accepting.
//!
//! Pipeline: a Büchi automaton for "some trace is bad" (guess the trace and
//! its eventual colour cap), then a Safra-style compact-tree determinization
//! to a parity automaton: node names are renamed to the seniority order
//! 1..k after every step, so a surviving node's name only ever decreases and
//! eventually stabilizes; priorities read off the minimal dead and minimal
//! green name, and a final parity flip complements ("no trace is bad").
//! States are produced on demand because the alphabet `2^(Q×Q)` is huge.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

/// An annotation letter: a set of (source, target) state pairs.
pub type Ann = BTreeSet<(usize, usize)>;

// ---------------------------------------------------------------------------
// The bad-trace Büchi automaton, kept implicit

/// B guesses a trace and an odd colour cap c: phase Pre before the point
/// from which all trace colours are ≤ c, phase Fin after; accepting states
/// are Fin states of colour exactly c. The cap is only chosen at the
/// Pre-to-Fin switch, so Pre states carry just the trace position.
struct BadTrace {
    colours: Vec<usize>,
    odd: Vec<usize>,
}

const WATCH: usize = 0;

impl BadTrace {
    fn new(colours: &[usize]) -> Self {
        let odd: BTreeSet<usize> = colours.iter().copied().filter(|c| c % 2 == 1).collect();
        BadTrace {
            colours: colours.to_vec(),
            odd: odd.into_iter().collect(),
        }
    }

    /// States: 0 = Watch, then Pre(q), then (q, cap index) Fin states.
    fn state_count(&self) -> usize {
        let n = self.colours.len();
        1 + n + n * self.odd.len()
    }

    fn pre(&self, q: usize) -> usize {
        1 + q
    }

    fn fin(&self, q: usize, ci: usize) -> usize {
        1 + self.colours.len() + q * self.odd.len() + ci
    }

    fn is_accepting(&self, s: usize) -> bool {
        let base = 1 + self.colours.len();
        if s < base {
            return false;
        }
        let x = s - base;
        let ci = x % self.odd.len();
        let q = x / self.odd.len();
        self.colours[q] == self.odd[ci]
    }

    /// Successor Fin states of one trace step into `y`: every cap that
    /// still admits y's colour.
    fn fins(&self, y: usize, out: &mut BTreeSet<usize>) {
        for ci in 0..self.odd.len() {
            if self.colours[y] <= self.odd[ci] {
                out.insert(self.fin(y, ci));
            }
        }
    }

    fn succs(&self, s: usize, ann: &Ann) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let base = 1 + self.colours.len();
        if s == WATCH {
            out.insert(WATCH);
            // start tracking a trace at any pair of the letter
            for &(_, y) in ann.iter() {
                out.insert(self.pre(y));
                self.fins(y, &mut out);
            }
        } else if s < base {
            let q = s - 1;
            for &(a, y) in ann.iter() {
                if a != q {
                    continue;
                }
                out.insert(self.pre(y));
                self.fins(y, &mut out);
            }
        } else {
            let x = s - base;
            let ci = x % self.odd.len();
            let q = x / self.odd.len();
            for &(a, y) in ann.iter() {
                if a != q {
                    continue;
                }
                if self.colours[y] <= self.odd[ci] {
                    out.insert(self.fin(y, ci));
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Safra trees

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    name: usize,
    label: BTreeSet<usize>,
    /// Oldest first; youngest appended at the end.
    children: Vec<Node>,
}

type Tree = Option<Node>;

fn tree_names(t: &Tree, out: &mut BTreeSet<usize>) {
    if let Some(n) = t {
        node_names(n, out);
    }
}

fn node_names(n: &Node, out: &mut BTreeSet<usize>) {
    out.insert(n.name);
    for c in &n.children {
        node_names(c, out);
    }
}

struct StepEvents {
    dead: BTreeSet<usize>,
    green: BTreeSet<usize>,
}

/// One Safra step: branch on accepting states, powerset-update labels,
/// horizontal merge (keep each state in the oldest sibling), delete empty
/// nodes (dead events), vertical merge (green events), then rename the
/// survivors to 1..k preserving name order. Events report pre-rename names.
fn safra_step(b: &BadTrace, tree: &Tree, ann: &Ann) -> (Tree, StepEvents) {
    let mut events = StepEvents {
        dead: BTreeSet::new(),
        green: BTreeSet::new(),
    };
    let mut tree = tree.clone();

    // 1. branch: every node with an accepting part gets a fresh youngest
    // child, named above every existing name
    let mut used = BTreeSet::new();
    tree_names(&tree, &mut used);
    if let Some(root) = tree.as_mut() {
        let mut next = used.iter().max().copied().unwrap_or(0) + 1;
        branch(b, root, &mut next);
    }

    // 2. powerset update
    if let Some(root) = tree.as_mut() {
        powerset(b, root, ann);
    }

    // 3. horizontal merge
    if let Some(root) = tree.as_mut() {
        horizontal(root);
    }

    // 4. delete empty nodes
    if let Some(root) = tree.take() {
        if root.label.is_empty() {
            let mut names = BTreeSet::new();
            node_names(&root, &mut names);
            events.dead.extend(names);
            tree = None;
        } else {
            let mut root = root;
            delete_empty(&mut root, &mut events.dead);
            tree = Some(root);
        }
    }

    // 5. vertical merge
    if let Some(root) = tree.as_mut() {
        vertical(root, &mut events);
    }

    // 6. compact rename: survivors get 1..k in the old name order, so a
    // node's name never increases and eventually stabilizes
    if let Some(root) = tree.as_mut() {
        let mut names = BTreeSet::new();
        node_names(root, &mut names);
        let map: BTreeMap<usize, usize> = names.into_iter().zip(1..).collect();
        rename(root, &map);
    }

    (tree, events)
}

fn branch(b: &BadTrace, node: &mut Node, next: &mut usize) {
    let existing = node.children.len();
    for i in 0..existing {
        branch(b, &mut node.children[i], next);
    }
    let acc: BTreeSet<usize> = node
        .label
        .iter()
        .copied()
        .filter(|&q| b.is_accepting(q))
        .collect();
    if !acc.is_empty() {
        let name = *next;
        *next += 1;
        node.children.push(Node {
            name,
            label: acc,
            children: Vec::new(),
        });
    }
}

fn rename(node: &mut Node, map: &BTreeMap<usize, usize>) {
    node.name = map[&node.name];
    for c in &mut node.children {
        rename(c, map);
    }
}

fn powerset(b: &BadTrace, node: &mut Node, ann: &Ann) {
    let mut next = BTreeSet::new();
    for &q in &node.label {
        next.extend(b.succs(q, ann));
    }
    node.label = next;
    for c in &mut node.children {
        powerset(b, c, ann);
    }
}

fn remove_states(node: &mut Node, states: &BTreeSet<usize>) {
    node.label.retain(|q| !states.contains(q));
    for c in &mut node.children {
        remove_states(c, states);
    }
}

fn horizontal(node: &mut Node) {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for c in &mut node.children {
        remove_states(c, &seen);
        seen.extend(c.label.iter().copied());
    }
    for c in &mut node.children {
        horizontal(c);
    }
}

fn delete_empty(node: &mut Node, dead: &mut BTreeSet<usize>) {
    let mut kept = Vec::new();
    for mut c in core::mem::take(&mut node.children) {
        if c.label.is_empty() {
            node_names(&c, dead);
        } else {
            delete_empty(&mut c, dead);
            kept.push(c);
        }
    }
    node.children = kept;
}

fn vertical(node: &mut Node, events: &mut StepEvents) {
    let union: BTreeSet<usize> = node
        .children
        .iter()
        .flat_map(|c| c.label.iter().copied())
        .collect();
    if !node.children.is_empty() && union == node.label {
        for c in core::mem::take(&mut node.children) {
            node_names(&c, &mut events.dead);
        }
        events.green.insert(node.name);
    } else {
        for c in &mut node.children {
            vertical(c, events);
        }
    }
}

// ---------------------------------------------------------------------------
// The public machine

/// Deterministic parity machine over annotations; accepts (max-even) iff
/// every infinite trace of the input satisfies max-even parity for the
/// state colouring given at construction. States are interned lazily.
pub struct AllTraces {
    b: BadTrace,
    /// Colour scale: the neutral "no event" step gets colour 2, events at
    /// smaller (older) names get larger colours, bounded by 4N+4.
    scale: usize,
    states: Vec<Tree>,
    colours: Vec<usize>,
    index: BTreeMap<(Tree, usize), usize>,
    memo: BTreeMap<(usize, Ann), usize>,
}

impl AllTraces {
    pub fn new(q_count: usize, state_colours: &[usize]) -> AllTraces {
        assert_eq!(state_colours.len(), q_count);
        let b = BadTrace::new(state_colours);
        // at most N live nodes, plus at most N temporaries per step, so
        // every event name is at most 2N
        let scale = 4 * b.state_count() + 3;
        AllTraces {
            b,
            scale,
            states: Vec::new(),
            colours: Vec::new(),
            index: BTreeMap::new(),
            memo: BTreeMap::new(),
        }
    }

    fn intern(&mut self, tree: Tree, colour: usize) -> usize {
        // the transition colour is folded into the state, so it is part of
        // the interning key: the same tree with different colours gives
        // distinct states
        if let Some(&i) = self.index.get(&(tree.clone(), colour)) {
            return i;
        }
        let i = self.states.len();
        self.index.insert((tree.clone(), colour), i);
        self.states.push(tree);
        self.colours.push(colour);
        i
    }

    /// The state before any letter is read. Its colour is neutral.
    pub fn initial(&mut self) -> usize {
        let root = Node {
            name: 1,
            label: [WATCH].into_iter().collect(),
            children: Vec::new(),
        };
        self.intern(Some(root), 2)
    }

    pub fn colour(&self, s: usize) -> usize {
        self.colours[s]
    }

    /// Deterministic successor on an annotation letter.
    pub fn step(&mut self, s: usize, ann: &Ann) -> usize {
        if let Some(&t) = self.memo.get(&(s, ann.clone())) {
            return t;
        }
        let tree = self.states[s].clone();
        let (tree2, events) = safra_step(&self.b, &tree, ann);
        // For the bad-trace language, min-parity priority min(2e-1, 2f)
        // where e is the least dead and f the least green name: B accepts
        // iff the least priority seen infinitely often is even (some node
        // name stabilizes and is green infinitely often). Flipping the
        // scale to max-parity and the parity to the complement in one go:
        // the colour is scale - priority, with neutral steps lowest.
        let e = events.dead.iter().next().copied();
        let f = events.green.iter().next().copied();
        let priority = match (e, f) {
            (None, None) => self.scale - 2,
            (Some(e), None) => 2 * e - 1,
            (None, Some(f)) => 2 * f,
            (Some(e), Some(f)) => core::cmp::min(2 * e - 1, 2 * f),
        };
        let t = self.intern(tree2, self.scale - priority);
        self.memo.insert((s, ann.clone()), t);
        t
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }
}

/// Materialized deterministic parity word automaton over an explicit
/// annotation alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dpw {
    pub letters: Vec<Ann>,
    pub state_count: usize,
    pub initial: usize,
    /// delta[state][letter index]
    pub delta: Vec<Vec<usize>>,
    pub colour: Vec<usize>,
}

impl Dpw {
    /// Debug dump: transition list text format.
    pub fn dump(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut out = alloc::string::String::new();
        let _ = writeln!(out, "dpw states={} initial={}", self.state_count, self.initial);
        for (s, row) in self.delta.iter().enumerate() {
            let _ = writeln!(out, "state {s} colour {}", self.colour[s]);
            for (li, &t) in row.iter().enumerate() {
                let _ = writeln!(out, "{s} -{:?}-> {t}", self.letters[li]);
            }
        }
        out
    }
}

/// All annotations over `q_count` states.
pub fn all_annotations(q_count: usize) -> Vec<Ann> {
    let pairs: Vec<(usize, usize)> = (0..q_count)
        .flat_map(|a| (0..q_count).map(move |b| (a, b)))
        .collect();
    (0..(1usize << pairs.len()))
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

/// Materialize the all-traces machine over the full annotation alphabet.
/// Exponential in `q_count`²; intended for small state counts.
pub fn det_all_traces(q_count: usize, state_colours: &[usize]) -> Dpw {
    let letters = all_annotations(q_count);
    let mut m = AllTraces::new(q_count, state_colours);
    let initial = m.initial();
    // explore to closure first; afterwards every step below is memoized
    let mut frontier = alloc::vec![initial];
    let mut done: BTreeSet<usize> = BTreeSet::new();
    while let Some(s) = frontier.pop() {
        if !done.insert(s) {
            continue;
        }
        for ann in &letters {
            let t = m.step(s, ann);
            if !done.contains(&t) {
                frontier.push(t);
            }
        }
    }
    let mut delta: Vec<Vec<usize>> = alloc::vec![Vec::new(); m.state_count()];
    for s in 0..m.state_count() {
        for ann in &letters {
            delta[s].push(m.step(s, ann));
        }
    }
    let colour = (0..m.state_count()).map(|s| m.colour(s)).collect();
    Dpw {
        letters,
        state_count: m.state_count(),
        initial,
        delta,
        colour,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Run the machine on `prefix · loop^ω`; accept iff the max colour on
    /// the eventual cycle is even.
    fn machine_accepts(m: &mut AllTraces, prefix: &[Ann], lp: &[Ann]) -> bool {
        let mut s = m.initial();
        for a in prefix {
            s = m.step(s, a);
        }
        // iterate the loop until the state at the loop head repeats
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut heads: Vec<usize> = Vec::new();
        let mut trace_colours: Vec<Vec<usize>> = Vec::new();
        loop {
            if let Some(&first) = seen.get(&s) {
                // cycle spans loop iterations first..heads.len()
                let max = trace_colours[first..]
                    .iter()
                    .flatten()
                    .copied()
                    .max()
                    .unwrap();
                return max % 2 == 0;
            }
            seen.insert(s, heads.len());
            heads.push(s);
            let mut cols = Vec::new();
            for a in lp {
                s = m.step(s, a);
                cols.push(m.colour(s));
            }
            trace_colours.push(cols);
        }
    }

    /// Oracle: does the lasso carry a bad trace? A trace may start at any
    /// position and state; bad means its max infinitely-repeated colour is
    /// odd. Cycle analysis on the (state, position) product.
    fn has_bad_trace(q_count: usize, colours: &[usize], prefix: &[Ann], lp: &[Ann]) -> bool {
        let n = prefix.len() + lp.len();
        let letter = |i: usize| -> &Ann {
            if i < prefix.len() {
                &prefix[i]
            } else {
                &lp[i - prefix.len()]
            }
        };
        let next = |i: usize| if i + 1 < n { i + 1 } else { prefix.len() };
        let id = |q: usize, i: usize| q * n + i;
        let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); q_count * n];
        for i in 0..n {
            for &(a, b) in letter(i) {
                edges[id(a, i)].push(id(b, next(i)));
            }
        }
        // a bad trace settles into a cycle of odd max colour; traces can
        // start anywhere so no reachability restriction applies
        let all_colours: BTreeSet<usize> = colours.iter().copied().collect();
        for &c in all_colours.iter().filter(|&&c| c % 2 == 1) {
            let sub: Vec<bool> = (0..q_count * n).map(|v| colours[v / n] <= c).collect();
            for (scc, cyclic) in crate::parity::sccs(&edges, &sub) {
                if cyclic && scc.iter().any(|&v| colours[v / n] == c) {
                    return true;
                }
            }
        }
        false
    }

    fn ann(pairs: &[(usize, usize)]) -> Ann {
        pairs.iter().copied().collect()
    }

    #[test]
    fn single_even_state_accepts_everything() {
        let mut m = AllTraces::new(1, &[2]);
        for lp in [ann(&[]), ann(&[(0, 0)])] {
            assert!(machine_accepts(&mut m, &[], &[lp]));
        }
    }

    #[test]
    fn single_odd_state_rejects_infinite_traces() {
        let mut m = AllTraces::new(1, &[1]);
        assert!(machine_accepts(&mut m, &[], &[ann(&[])]));
        assert!(!machine_accepts(&mut m, &[], &[ann(&[(0, 0)])]));
        // a trace that always dies is fine
        assert!(machine_accepts(&mut m, &[ann(&[(0, 0)])], &[ann(&[])]));
    }

    #[test]
    fn exhaustive_two_state_lassos() {
        // every colouring over {1,2}, all lassos with |prefix| ≤ 1 and
        // |loop| ≤ 2 over the 16-letter annotation alphabet
        let letters = all_annotations(2);
        for colours in [[1, 2], [2, 1], [1, 1], [2, 2]] {
            let mut m = AllTraces::new(2, &colours);
            let mut checked = 0usize;
            for lp1 in &letters {
                // loop length 1, empty prefix
                let got = machine_accepts(&mut m, &[], core::slice::from_ref(lp1));
                let want = !has_bad_trace(2, &colours, &[], core::slice::from_ref(lp1));
                assert_eq!(got, want, "colours {colours:?} loop [{lp1:?}]");
                checked += 1;
                for lp2 in &letters {
                    let lp = [lp1.clone(), lp2.clone()];
                    let got = machine_accepts(&mut m, &[], &lp);
                    let want = !has_bad_trace(2, &colours, &[], &lp);
                    assert_eq!(got, want, "colours {colours:?} loop {lp:?}");
                    checked += 1;
                }
                // prefix of length 1 with a fixed stressing loop
                for pre in &letters {
                    let got = machine_accepts(&mut m, core::slice::from_ref(pre), core::slice::from_ref(lp1));
                    let want =
                        !has_bad_trace(2, &colours, core::slice::from_ref(pre), core::slice::from_ref(lp1));
                    assert_eq!(got, want, "colours {colours:?} prefix {pre:?} loop {lp1:?}");
                    checked += 1;
                }
            }
            assert!(checked > 500);
        }
    }

    #[test]
    fn three_state_spot_checks() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11);
        let colours = [1, 2, 3];
        let mut m = AllTraces::new(3, &colours);
        for _ in 0..300 {
            let rand_ann = |rng: &mut ChaCha8Rng| -> Ann {
                (0..3)
                    .flat_map(|a| (0..3).map(move |b| (a, b)))
                    .filter(|_| rng.gen_bool(0.3))
                    .collect()
            };
            let np = rng.gen_range(0..=1);
            let nl = rng.gen_range(1..=3);
            let prefix: Vec<Ann> = (0..np).map(|_| rand_ann(&mut rng)).collect();
            let lp: Vec<Ann> = (0..nl).map(|_| rand_ann(&mut rng)).collect();
            let got = machine_accepts(&mut m, &prefix, &lp);
            let want = !has_bad_trace(3, &colours, &prefix, &lp);
            assert_eq!(got, want, "prefix {prefix:?} loop {lp:?}");
        }
    }

    #[test]
    fn materialized_machine_is_total_and_deterministic() {
        let d = det_all_traces(1, &[1]);
        assert_eq!(d.letters.len(), 2);
        for row in &d.delta {
            assert_eq!(row.len(), d.letters.len());
            for &t in row {
                assert!(t < d.state_count);
            }
        }
        // spot-check against the lazy machine semantics
        let li_empty = d.letters.iter().position(|a| a.is_empty()).unwrap();
        let li_loop = d.letters.iter().position(|a| a.contains(&(0, 0))).unwrap();
        // (0,0)^ω: rejected (bad trace), colours on the cycle have odd max
        let mut s = d.initial;
        let mut seen = alloc::vec![];
        loop {
            if seen.contains(&s) {
                break;
            }
            seen.push(s);
            s = d.delta[s][li_loop];
        }
        let cycle_start = seen.iter().position(|&x| x == s).unwrap();
        let maxc = seen[cycle_start..]
            .iter()
            .map(|&x| d.colour[x])
            .chain([d.colour[s]])
            .max()
            .unwrap();
        assert_eq!(maxc % 2, 1);
        let _ = li_empty;
    }
}
