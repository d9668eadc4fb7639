//! Explicit bounded-depth labelled trees: the reference oracle surface for
//! the tree semantics. Nodes are nonempty words of directions (tuples over
//! a sorted coordinate set); the empty tuple is the blank direction, the
//! only direction of the zero-coordinate tree.
//!
//! Everything here is truncated at a finite depth; each oracle states its
//! own depth bound. Infinite regular trees live in the tree-automata
//! module as pointed graphs, not here.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::kripke::{obs_equiv_tuples, project_dir, Dir, LocalAlphabets};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeError {
    pub msg: String,
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl core::error::Error for TreeError {}

fn err(msg: String) -> TreeError {
    TreeError { msg }
}

/// A finite prefix of a labelled tree over the direction set `Λ_coords`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLabelledTree {
    /// Sorted coordinate set `I`; empty for the blank tree.
    pub coords: Vec<usize>,
    /// Node words (nonempty, prefix-closed, common first letter) with their
    /// label sets.
    pub nodes: BTreeMap<Vec<Dir>, BTreeSet<String>>,
}

impl FiniteLabelledTree {
    pub fn new(
        coords: Vec<usize>,
        nodes: BTreeMap<Vec<Dir>, BTreeSet<String>>,
    ) -> Result<Self, TreeError> {
        if nodes.is_empty() {
            return Err(err("a tree must have at least one node".into()));
        }
        let mut root: Option<&Dir> = None;
        for word in nodes.keys() {
            if word.is_empty() {
                return Err(err("node words must be nonempty".into()));
            }
            for d in word {
                if d.len() != coords.len() {
                    return Err(err(format!(
                        "direction {d:?} has arity {} but the tree has {} coordinates",
                        d.len(),
                        coords.len()
                    )));
                }
            }
            match root {
                None => root = Some(&word[0]),
                Some(r) if r != &word[0] => {
                    return Err(err("all nodes must start with the root direction".into()))
                }
                _ => {}
            }
            if word.len() > 1 && !nodes.contains_key(&word[..word.len() - 1].to_vec()) {
                return Err(err(format!("node {word:?} lacks its parent")));
            }
        }
        Ok(FiniteLabelledTree { coords, nodes })
    }

    /// The blank tree of the given depth: a single branch of blank
    /// directions ("the only zero-coordinate tree", truncated).
    pub fn blank(depth: usize, labels_per_level: &[BTreeSet<String>]) -> Self {
        let mut nodes = BTreeMap::new();
        for d in 0..=depth {
            let word: Vec<Dir> = alloc::vec![Dir::new(); d + 1];
            let lab = labels_per_level.get(d).cloned().unwrap_or_default();
            nodes.insert(word, lab);
        }
        FiniteLabelledTree {
            coords: Vec::new(),
            nodes,
        }
    }

    pub fn root(&self) -> &Dir {
        &self.nodes.keys().next().unwrap()[0]
    }

    /// Longest node word length minus one.
    pub fn depth(&self) -> usize {
        self.nodes.keys().map(|w| w.len()).max().unwrap() - 1
    }

    /// Debug dump: one `node d1.d2...: p q` line per node, blank rendered
    /// as `#blank`.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        for (word, labels) in &self.nodes {
            let _ = write!(out, "node ");
            for (i, d) in word.iter().enumerate() {
                if i > 0 {
                    let _ = write!(out, ".");
                }
                if d.is_empty() {
                    let _ = write!(out, "#blank");
                } else {
                    let _ = write!(out, "{}", d.join(","));
                }
            }
            let _ = write!(out, ":");
            for p in labels {
                let _ = write!(out, " {p}");
            }
            let _ = writeln!(out);
        }
        out
    }
}

fn project_word(coords: &[usize], word: &[Dir], j: &BTreeSet<usize>) -> Vec<Dir> {
    word.iter().map(|d| project_dir(coords, d, j)).collect()
}

/// Project a tree to the coordinates in `j`: nodes with the same projected
/// word are merged. Merging nodes with different labels is an error (the
/// operation is only used on uniform labellings or unlabelled domains).
pub fn project_tree(t: &FiniteLabelledTree, j: &BTreeSet<usize>) -> Result<FiniteLabelledTree, TreeError> {
    if !j.iter().all(|x| t.coords.contains(x)) {
        return Err(err(format!(
            "projection target {j:?} is not a subset of the tree coordinates {:?}",
            t.coords
        )));
    }
    let new_coords: Vec<usize> = t.coords.iter().copied().filter(|i| j.contains(i)).collect();
    let mut nodes: BTreeMap<Vec<Dir>, BTreeSet<String>> = BTreeMap::new();
    for (word, labels) in &t.nodes {
        let pw = project_word(&t.coords, word, j);
        match nodes.get(&pw) {
            None => {
                nodes.insert(pw, labels.clone());
            }
            Some(existing) if existing == labels => {}
            Some(existing) => {
                return Err(err(format!(
                    "label conflict while merging nodes projected to {pw:?}: {existing:?} vs {labels:?}"
                )));
            }
        }
    }
    FiniteLabelledTree::new(new_coords, nodes)
}

/// Lift a tree over `Λ_J` to `Λ_I` (`J ⊆ I`), rooting the extra
/// coordinates at `extra` (a tuple over `Λ_{I∖J}`, aligned with the sorted
/// missing coordinates). Nodes are all `Λ_I`-words from the combined root
/// whose `J`-projection is in `t`, truncated at `t`'s depth; labels are
/// pulled back through the projection.
pub fn lift_tree(
    t: &FiniteLabelledTree,
    i_coords: &[usize],
    extra: &Dir,
    locals: &LocalAlphabets,
) -> Result<FiniteLabelledTree, TreeError> {
    if !t.coords.iter().all(|x| i_coords.contains(x)) {
        return Err(err(format!(
            "lift target {i_coords:?} does not contain the tree coordinates {:?}",
            t.coords
        )));
    }
    let missing: Vec<usize> = i_coords
        .iter()
        .copied()
        .filter(|i| !t.coords.contains(i))
        .collect();
    if extra.len() != missing.len() {
        return Err(err(format!(
            "extra tuple {extra:?} has arity {} but {} coordinates are missing",
            extra.len(),
            missing.len()
        )));
    }
    let j: BTreeSet<usize> = t.coords.iter().copied().collect();
    // combined root: t's root on J, extra on I∖J
    let mut root = Dir::new();
    {
        let troot = t.root();
        let mut jk = 0;
        let mut mk = 0;
        for &i in i_coords {
            if j.contains(&i) {
                root.push(troot[jk].clone());
                jk += 1;
            } else {
                root.push(extra[mk].clone());
                mk += 1;
            }
        }
    }
    let depth = t.depth();
    let dirs = locals.dirs(i_coords);
    let mut nodes: BTreeMap<Vec<Dir>, BTreeSet<String>> = BTreeMap::new();
    let root_word = alloc::vec![root];
    let root_proj = project_word(i_coords, &root_word, &j);
    if !t.nodes.contains_key(&root_proj) {
        return Err(err("combined root does not project into the tree".into()));
    }
    nodes.insert(root_word.clone(), t.nodes[&root_proj].clone());
    let mut frontier = alloc::vec![root_word];
    for _ in 0..depth {
        let mut next = Vec::new();
        for word in frontier {
            for d in &dirs {
                let mut w = word.clone();
                w.push(d.clone());
                let pw = project_word(i_coords, &w, &j);
                if let Some(lab) = t.nodes.get(&pw) {
                    nodes.insert(w.clone(), lab.clone());
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    FiniteLabelledTree::new(i_coords.to_vec(), nodes)
}

/// Merge two trees over the same direction set: node domain is the
/// intersection, labels are united per node.
pub fn merge_trees(
    t: &FiniteLabelledTree,
    t2: &FiniteLabelledTree,
) -> Result<FiniteLabelledTree, TreeError> {
    if t.coords != t2.coords {
        return Err(err(format!(
            "cannot merge trees over different coordinates {:?} and {:?}",
            t.coords, t2.coords
        )));
    }
    let mut nodes = BTreeMap::new();
    for (word, labels) in &t.nodes {
        if let Some(labels2) = t2.nodes.get(word) {
            nodes.insert(word.clone(), labels.union(labels2).cloned().collect());
        }
    }
    FiniteLabelledTree::new(t.coords.clone(), nodes)
}

/// o-indistinguishability of two nodes over the same coordinates: equal
/// length and letterwise tuple equivalence. Note blank-observation
/// equivalence still requires equal depth.
pub fn node_obs_equiv(coords: &[usize], u: &[Dir], u2: &[Dir], o: &BTreeSet<usize>) -> bool {
    u.len() == u2.len()
        && u.iter()
            .zip(u2.iter())
            .all(|(d, d2)| obs_equiv_tuples(coords, d, d2, o))
}

/// True iff all o-equivalent node pairs agree on `p`.
pub fn is_tree_uniform(t: &FiniteLabelledTree, p: &str, o: &BTreeSet<usize>) -> bool {
    let words: Vec<&Vec<Dir>> = t.nodes.keys().collect();
    for (i, u) in words.iter().enumerate() {
        for u2 in &words[i + 1..] {
            if node_obs_equiv(&t.coords, u, u2, o)
                && t.nodes[*u].contains(p) != t.nodes[*u2].contains(p)
            {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::{unfold_bounded, Cks};
    use alloc::vec;

    fn d(xs: &[&str]) -> Dir {
        xs.iter().map(|s| (*s).into()).collect()
    }

    fn labels(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| (*s).into()).collect()
    }

    fn two_coord_locals() -> LocalAlphabets {
        LocalAlphabets::new(vec![vec!["a".into(), "b".into()], vec!["x".into(), "y".into()]])
            .unwrap()
    }

    fn small_tree() -> FiniteLabelledTree {
        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a", "x"])], labels(&["p"]));
        nodes.insert(vec![d(&["a", "x"]), d(&["b", "x"])], labels(&[]));
        FiniteLabelledTree::new(vec![1, 2], nodes).unwrap()
    }

    #[test]
    fn validation_rejects_orphans_and_mixed_roots() {
        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a", "x"])], labels(&[]));
        nodes.insert(vec![d(&["b", "x"])], labels(&[]));
        assert!(FiniteLabelledTree::new(vec![1, 2], nodes).is_err());

        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a", "x"])], labels(&[]));
        nodes.insert(
            vec![d(&["a", "x"]), d(&["b", "x"]), d(&["b", "x"])],
            labels(&[]),
        );
        assert!(FiniteLabelledTree::new(vec![1, 2], nodes).is_err());
    }

    #[test]
    fn project_examples() {
        let t = small_tree();
        let p = project_tree(&t, &[1].into_iter().collect()).unwrap();
        assert_eq!(p.coords, vec![1]);
        assert!(p.nodes.contains_key(&vec![d(&["a"])]));
        assert!(p.nodes.contains_key(&vec![d(&["a"]), d(&["b"])]));
        assert_eq!(p.nodes.len(), 2);

        // J = ∅: a path of blanks of equal depth
        let b = project_tree(&t, &BTreeSet::new()).unwrap();
        assert_eq!(b.coords, Vec::<usize>::new());
        assert_eq!(b.nodes.len(), 2);
        assert!(b.nodes.contains_key(&vec![Dir::new()]));

        // J = I: identity
        assert_eq!(project_tree(&t, &[1, 2].into_iter().collect()).unwrap(), t);
    }

    #[test]
    fn project_reports_label_conflicts() {
        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a", "x"])], labels(&[]));
        nodes.insert(vec![d(&["a", "x"]), d(&["b", "x"])], labels(&["p"]));
        nodes.insert(vec![d(&["a", "x"]), d(&["b", "y"])], labels(&[]));
        let t = FiniteLabelledTree::new(vec![1, 2], nodes).unwrap();
        let e = project_tree(&t, &[1].into_iter().collect()).unwrap_err();
        assert!(e.msg.contains("conflict"), "{e}");
    }

    #[test]
    fn lift_then_project_is_identity() {
        let locals = two_coord_locals();
        // a {1}-tree of depth 2 with assorted labels
        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a"])], labels(&["p"]));
        nodes.insert(vec![d(&["a"]), d(&["a"])], labels(&[]));
        nodes.insert(vec![d(&["a"]), d(&["b"])], labels(&["q"]));
        nodes.insert(vec![d(&["a"]), d(&["b"]), d(&["a"])], labels(&["p", "q"]));
        nodes.insert(vec![d(&["a"]), d(&["a"]), d(&["a"])], labels(&[]));
        nodes.insert(vec![d(&["a"]), d(&["a"]), d(&["b"])], labels(&[]));
        let t = FiniteLabelledTree::new(vec![1], nodes).unwrap();

        let lifted = lift_tree(&t, &[1, 2], &d(&["x"]), &locals).unwrap();
        assert_eq!(project_tree(&lifted, &[1].into_iter().collect()).unwrap(), t);
        // lift is uniform in its labels with respect to the lifted-from coords
        assert!(is_tree_uniform(&lifted, "p", &[1].into_iter().collect()));
        assert!(is_tree_uniform(&lifted, "q", &[1].into_iter().collect()));
    }

    #[test]
    fn lift_of_blank_tree_is_full_tree() {
        let locals = two_coord_locals();
        let b = FiniteLabelledTree::blank(1, &[]);
        let lifted = lift_tree(&b, &[1, 2], &d(&["a", "x"]), &locals).unwrap();
        // root plus all four children
        assert_eq!(lifted.nodes.len(), 5);
        assert_eq!(lifted.root(), &d(&["a", "x"]));
    }

    #[test]
    fn merge_laws() {
        let t = small_tree();
        assert_eq!(merge_trees(&t, &t).unwrap(), t);

        let mut nodes = BTreeMap::new();
        nodes.insert(vec![d(&["a", "x"])], labels(&["q"]));
        nodes.insert(vec![d(&["a", "x"]), d(&["a", "y"])], labels(&[]));
        let t2 = FiniteLabelledTree::new(vec![1, 2], nodes).unwrap();
        let m = merge_trees(&t, &t2).unwrap();
        // only the roots survive; labels united
        assert_eq!(m.nodes.len(), 1);
        assert_eq!(m.nodes[&vec![d(&["a", "x"])]], labels(&["p", "q"]));

        let m2 = merge_trees(&t2, &t).unwrap();
        assert_eq!(m, m2);

        let b = FiniteLabelledTree::blank(0, &[]);
        assert!(merge_trees(&t, &b).is_err());
    }

    #[test]
    fn node_equiv_examples() {
        let coords = vec![1, 2];
        let u = vec![d(&["a", "x"]), d(&["a", "y"])];
        let u2 = vec![d(&["a", "y"]), d(&["a", "x"])];
        assert!(node_obs_equiv(&coords, &u, &u2, &[1].into_iter().collect()));
        assert!(!node_obs_equiv(&coords, &u, &u2, &[2].into_iter().collect()));
        // different lengths are inequivalent even blindly
        assert!(!node_obs_equiv(&coords, &u, &u2[..1], &BTreeSet::new()));
        assert!(node_obs_equiv(&coords, &u, &u2, &BTreeSet::new()));
    }

    #[test]
    fn tree_uniformity_examples() {
        let k = Cks::k0();
        let t = unfold_bounded(&k, 0, 2);
        // p nowhere: uniform
        assert!(is_tree_uniform(&t, "p", &BTreeSet::new()));
        // p exactly on depth-2 nodes: blind-uniform (levels are the classes)
        let mut t2 = t.clone();
        for (w, lab) in t2.nodes.iter_mut() {
            if w.len() == 3 {
                lab.insert("p".into());
            }
        }
        assert!(is_tree_uniform(&t2, "p", &BTreeSet::new()));
        // p on one of two equivalent nodes: not uniform
        let mut t3 = t.clone();
        let some_depth2 = t3.nodes.keys().find(|w| w.len() == 2).unwrap().clone();
        t3.nodes.get_mut(&some_depth2).unwrap().insert("p".into());
        assert!(!is_tree_uniform(&t3, "p", &BTreeSet::new()));
        // ... but it is uniform at full observation on K0's unfolding
        // (distinct nodes are distinct words)
        assert!(is_tree_uniform(&t3, "p", &[1].into_iter().collect()));
    }

    #[test]
    fn dump_format() {
        let t = small_tree();
        let s = t.dump();
        assert!(s.contains("node a,x: p\n"), "{s}");
        assert!(s.contains("node a,x.b,x:\n"), "{s}");
        let b = FiniteLabelledTree::blank(1, &[labels(&["p"])]);
        assert!(b.dump().contains("node #blank: p\n"));
        assert!(b.dump().contains("node #blank.#blank:\n"));
    }
}
