//! Compound Kripke structures: states are n-tuples of local states drawn
//! from fixed, pairwise disjoint alphabets. Houses tuple projection,
//! observational indistinguishability, uniformity of labellings, and
//! bounded unfolding into an explicit tree (for test oracles).

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::Observation;
use crate::tree::FiniteLabelledTree;

/// A direction or state tuple: local-state names aligned with a sorted
/// coordinate list. The empty tuple is the blank symbol.
pub type Dir = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ModelError {
    fn new(msg: String) -> Self {
        ModelError { line: None, msg }
    }

    fn at(line: usize, msg: String) -> Self {
        ModelError {
            line: Some(line),
            msg,
        }
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

impl core::error::Error for ModelError {}

/// The fixed collection of disjoint local-state alphabets; fixes the
/// dimension `n` and the universe of possible state tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalAlphabets {
    alphabets: Vec<Vec<String>>,
}

impl LocalAlphabets {
    pub fn new(alphabets: Vec<Vec<String>>) -> Result<Self, ModelError> {
        if alphabets.is_empty() {
            return Err(ModelError::new("at least one local alphabet required".into()));
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for (i, a) in alphabets.iter().enumerate() {
            if a.is_empty() {
                return Err(ModelError::new(format!("alphabet {} is empty", i + 1)));
            }
            for l in a {
                if !seen.insert(l) {
                    return Err(ModelError::new(format!(
                        "local state '{l}' appears in two alphabets or twice in one"
                    )));
                }
            }
        }
        Ok(LocalAlphabets { alphabets })
    }

    pub fn n(&self) -> usize {
        self.alphabets.len()
    }

    /// Alphabet of coordinate `i` (1-based).
    pub fn alphabet(&self, i: usize) -> &[String] {
        &self.alphabets[i - 1]
    }

    /// All tuples over the product of the alphabets at `coords` (which must
    /// be sorted, 1-based). The empty coordinate list yields the single
    /// blank tuple.
    pub fn tuples(&self, coords: &[usize]) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = alloc::vec![Vec::new()];
        for &i in coords {
            let mut next = Vec::new();
            for t in &out {
                for l in self.alphabet(i) {
                    let mut t2 = t.clone();
                    t2.push(l.as_str());
                    next.push(t2);
                }
            }
            out = next;
        }
        out
    }

    /// Owned variant of [`tuples`](Self::tuples).
    pub fn dirs(&self, coords: &[usize]) -> Vec<Dir> {
        self.tuples(coords)
            .into_iter()
            .map(|t| t.into_iter().map(|s| s.to_owned()).collect())
            .collect()
    }
}

/// Result of projecting a tuple: the blank symbol when the target
/// coordinate set is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlankOrTuple {
    Blank,
    Tuple(Dir),
}

/// Restrict a tuple `d`, aligned with sorted `coords`, to the coordinates
/// in `j`. Errors unless `j ⊆ coords`.
pub fn project_state(coords: &[usize], d: &[String], j: &BTreeSet<usize>) -> Result<BlankOrTuple, ModelError> {
    if !j.iter().all(|x| coords.contains(x)) {
        return Err(ModelError::new(format!(
            "projection target {j:?} is not a subset of the tuple coordinates {coords:?}"
        )));
    }
    let t = project_dir(coords, d, j);
    if t.is_empty() {
        Ok(BlankOrTuple::Blank)
    } else {
        Ok(BlankOrTuple::Tuple(t))
    }
}

/// Unchecked projection used internally; blank is the empty tuple.
pub fn project_dir(coords: &[usize], d: &[String], j: &BTreeSet<usize>) -> Dir {
    coords
        .iter()
        .zip(d.iter())
        .filter(|(i, _)| j.contains(i))
        .map(|(_, l)| l.clone())
        .collect()
}

/// o-indistinguishability of two tuples over the same coordinates: their
/// projections to `coords ∩ o` agree.
pub fn obs_equiv_tuples(coords: &[usize], d: &[String], d2: &[String], o: &BTreeSet<usize>) -> bool {
    assert_eq!(d.len(), coords.len(), "tuple arity mismatch");
    assert_eq!(d2.len(), coords.len(), "tuple arity mismatch");
    project_dir(coords, d, o) == project_dir(coords, d2, o)
}

/// A compound Kripke structure. States are identified by small ids; names
/// from the model file are kept for messages and the CLI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cks {
    locals: LocalAlphabets,
    names: Vec<String>,
    tuples: Vec<Dir>,
    succs: Vec<BTreeSet<usize>>,
    labels: Vec<BTreeSet<String>>,
    /// Every proposition the model knows about, including ones whose
    /// extension is empty (e.g. overridden to hold nowhere).
    declared: BTreeSet<String>,
}

impl Cks {
    pub fn new(
        locals: LocalAlphabets,
        states: Vec<(String, Dir)>,
        edges: &[(String, String)],
        labels: &[(String, Vec<String>)],
    ) -> Result<Cks, ModelError> {
        let n = locals.n();
        let mut names = Vec::new();
        let mut tuples: Vec<Dir> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for (name, tuple) in states {
            if index.contains_key(&name) {
                return Err(ModelError::new(format!("duplicate state name '{name}'")));
            }
            if tuple.len() != n {
                return Err(ModelError::new(format!(
                    "state '{name}' has arity {} but n = {n}",
                    tuple.len()
                )));
            }
            for (i, l) in tuple.iter().enumerate() {
                if !locals.alphabet(i + 1).contains(l) {
                    return Err(ModelError::new(format!(
                        "state '{name}': '{l}' is not in the alphabet of coordinate {}",
                        i + 1
                    )));
                }
            }
            if tuples.contains(&tuple) {
                return Err(ModelError::new(format!(
                    "state '{name}' duplicates the tuple of an earlier state"
                )));
            }
            index.insert(name.clone(), names.len());
            names.push(name);
            tuples.push(tuple);
        }
        if names.is_empty() {
            return Err(ModelError::new("at least one state required".into()));
        }
        let mut succs: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); names.len()];
        for (a, b) in edges {
            let ia = *index
                .get(a)
                .ok_or_else(|| ModelError::new(format!("unknown state '{a}' in edge")))?;
            let ib = *index
                .get(b)
                .ok_or_else(|| ModelError::new(format!("unknown state '{b}' in edge")))?;
            succs[ia].insert(ib);
        }
        for (i, s) in succs.iter().enumerate() {
            if s.is_empty() {
                return Err(ModelError::new(format!(
                    "state '{}' has no successor (the edge relation must be left-total)",
                    names[i]
                )));
            }
        }
        let mut lab: Vec<BTreeSet<String>> = alloc::vec![BTreeSet::new(); names.len()];
        for (name, props) in labels {
            let i = *index
                .get(name)
                .ok_or_else(|| ModelError::new(format!("unknown state '{name}' in label")))?;
            lab[i].extend(props.iter().cloned());
        }
        let declared = lab.iter().flatten().cloned().collect();
        Ok(Cks {
            locals,
            names,
            tuples,
            succs,
            labels: lab,
            declared,
        })
    }

    /// The two-state one-coordinate clique used as the running desk example.
    pub fn k0() -> Cks {
        let locals = LocalAlphabets::new(alloc::vec![alloc::vec!["l1".into(), "l2".into()]]).unwrap();
        Cks::new(
            locals,
            alloc::vec![
                ("u".into(), alloc::vec!["l1".into()]),
                ("v".into(), alloc::vec!["l2".into()]),
            ],
            &[
                ("u".into(), "u".into()),
                ("u".into(), "v".into()),
                ("v".into(), "u".into()),
                ("v".into(), "v".into()),
            ],
            &[],
        )
        .unwrap()
    }

    pub fn locals(&self) -> &LocalAlphabets {
        &self.locals
    }

    pub fn n(&self) -> usize {
        self.locals.n()
    }

    /// The sorted coordinate list `[1..n]` that state tuples align with.
    pub fn full_coords(&self) -> Vec<usize> {
        (1..=self.n()).collect()
    }

    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = usize> {
        0..self.names.len()
    }

    pub fn state_id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn state_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn tuple(&self, id: usize) -> &Dir {
        &self.tuples[id]
    }

    pub fn successors(&self, id: usize) -> &BTreeSet<usize> {
        &self.succs[id]
    }

    pub fn label(&self, id: usize) -> &BTreeSet<String> {
        &self.labels[id]
    }

    /// Every proposition of the model, whether or not its extension is
    /// currently empty.
    pub fn atoms(&self) -> BTreeSet<String> {
        self.declared.clone()
    }

    /// A copy with an overridden labelling for one proposition: `p` holds
    /// exactly on the states in `holds`.
    pub fn with_prop(&self, p: &str, holds: &BTreeSet<usize>) -> Cks {
        let mut k = self.clone();
        k.declared.insert(p.to_owned());
        for (i, lab) in k.labels.iter_mut().enumerate() {
            if holds.contains(&i) {
                lab.insert(p.to_owned());
            } else {
                lab.remove(p);
            }
        }
        k
    }

    /// A copy where every state additionally carries the dedicated
    /// proposition `@l` for each of its local states `l`.
    pub fn with_local_props(&self) -> Cks {
        let mut k = self.clone();
        for (i, lab) in k.labels.iter_mut().enumerate() {
            for l in &self.tuples[i] {
                let p = crate::formula::local_prop(l);
                k.declared.insert(p.clone());
                lab.insert(p);
            }
        }
        k
    }

    /// o-indistinguishability of two states.
    pub fn obs_equiv(&self, a: usize, b: usize, o: &Observation) -> bool {
        let coords = self.full_coords();
        let os = o.resolved(self.n());
        obs_equiv_tuples(&coords, &self.tuples[a], &self.tuples[b], &os)
    }

    /// Partition of the states into o-indistinguishability classes.
    pub fn obs_classes(&self, o: &Observation) -> Vec<Vec<usize>> {
        let coords = self.full_coords();
        let os = o.resolved(self.n());
        let mut classes: BTreeMap<Dir, Vec<usize>> = BTreeMap::new();
        for id in self.state_ids() {
            classes
                .entry(project_dir(&coords, &self.tuples[id], &os))
                .or_default()
                .push(id);
        }
        classes.into_values().collect()
    }
}

/// True iff every pair of o-indistinguishable states agrees on `p`
/// (a full pair scan).
pub fn is_uniform_labelling(k: &Cks, p: &str, o: &Observation) -> bool {
    for a in k.state_ids() {
        for b in k.state_ids() {
            if a < b && k.obs_equiv(a, b, o) && k.label(a).contains(p) != k.label(b).contains(p) {
                return false;
            }
        }
    }
    true
}

/// All finite paths from `s` of length at most `depth + 1`, as an explicit
/// labelled tree over the full direction set; node labels come from the
/// last state of the path.
pub fn unfold_bounded(k: &Cks, s: usize, depth: usize) -> FiniteLabelledTree {
    assert!(s < k.state_count(), "unknown state id");
    let coords = k.full_coords();
    let mut nodes: BTreeMap<Vec<Dir>, BTreeSet<String>> = BTreeMap::new();
    // frontier of (node word, last state id)
    let mut frontier = alloc::vec![(alloc::vec![k.tuple(s).clone()], s)];
    nodes.insert(alloc::vec![k.tuple(s).clone()], k.label(s).clone());
    for _ in 0..depth {
        let mut next = Vec::new();
        for (word, last) in frontier {
            for &t in k.successors(last) {
                let mut w = word.clone();
                w.push(k.tuple(t).clone());
                nodes.insert(w.clone(), k.label(t).clone());
                next.push((w, t));
            }
        }
        frontier = next;
    }
    FiniteLabelledTree::new(coords, nodes).expect("unfolding is a well-formed tree")
}

// ---------------------------------------------------------------------------
// Model file parsing

fn parse_tuple(text: &str, line: usize) -> Result<Dir, ModelError> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|x| x.strip_suffix(')'))
        .ok_or_else(|| ModelError::at(line, format!("expected a tuple '(..)', got '{t}'")))?;
    let parts: Vec<String> = inner
        .split(',')
        .map(|x| x.trim().to_owned())
        .collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ModelError::at(line, format!("malformed tuple '{t}'")));
    }
    Ok(parts)
}

/// Parse the line-oriented model format:
///
/// ```text
/// locals 1: a b        # alphabet of coordinate 1
/// locals 2: x y
/// state s1 = (a,x)
/// state s2 = (b,x)
/// edge s1 -> s2
/// label s1: p q
/// ```
pub fn parse_model(text: &str) -> Result<Cks, ModelError> {
    let mut alphabets: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut states: Vec<(String, Dir)> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut labels: Vec<(String, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "locals" => {
                let (i, names) = rest
                    .split_once(':')
                    .ok_or_else(|| ModelError::at(lineno, "expected 'locals <i>: names...'".into()))?;
                let i: usize = i
                    .trim()
                    .parse()
                    .map_err(|_| ModelError::at(lineno, "bad coordinate number".into()))?;
                if i == 0 {
                    return Err(ModelError::at(lineno, "coordinates start at 1".into()));
                }
                if alphabets.contains_key(&i) {
                    return Err(ModelError::at(lineno, format!("coordinate {i} declared twice")));
                }
                let names: Vec<String> = names.split_whitespace().map(|s| s.to_owned()).collect();
                if names.is_empty() {
                    return Err(ModelError::at(lineno, format!("empty alphabet for coordinate {i}")));
                }
                alphabets.insert(i, names);
            }
            "state" => {
                let (name, tuple) = rest
                    .split_once('=')
                    .ok_or_else(|| ModelError::at(lineno, "expected 'state <name> = (tuple)'".into()))?;
                states.push((name.trim().to_owned(), parse_tuple(tuple, lineno)?));
            }
            "edge" => {
                let (a, b) = rest
                    .split_once("->")
                    .ok_or_else(|| ModelError::at(lineno, "expected 'edge <a> -> <b>'".into()))?;
                edges.push((a.trim().to_owned(), b.trim().to_owned()));
            }
            "label" => {
                let (name, props) = rest
                    .split_once(':')
                    .ok_or_else(|| ModelError::at(lineno, "expected 'label <state>: props...'".into()))?;
                let props: Vec<String> = props.split_whitespace().map(|s| s.to_owned()).collect();
                for p in &props {
                    if p.starts_with('@') {
                        return Err(ModelError::at(
                            lineno,
                            format!("proposition '{p}': names starting with '@' are reserved"),
                        ));
                    }
                }
                labels.push((name.trim().to_owned(), props));
            }
            _ => return Err(ModelError::at(lineno, format!("unknown directive '{kw}'"))),
        }
    }

    let n = alphabets.keys().next_back().copied().unwrap_or(0);
    if n == 0 {
        return Err(ModelError::new("no 'locals' declaration".into()));
    }
    let mut alph = Vec::new();
    for i in 1..=n {
        alph.push(alphabets.remove(&i).ok_or_else(|| {
            ModelError::new(format!("missing 'locals {i}:' declaration (coordinates must be contiguous)"))
        })?);
    }
    Cks::new(LocalAlphabets::new(alph)?, states, &edges, &labels)
}

#[cfg(test)]
mod tests {
    use alloc::string::ToString;
    use super::*;
    use crate::formula::Observation;
    use alloc::vec;

    const K0_FILE: &str = "\
# two-state clique, one coordinate
locals 1: l1 l2
state u = (l1)
state v = (l2)
edge u -> u
edge u -> v
edge v -> u
edge v -> v
";

    fn obs(xs: &[usize]) -> Observation {
        Observation::set(xs.iter().copied())
    }

    #[test]
    fn parses_k0() {
        let k = parse_model(K0_FILE).unwrap();
        assert_eq!(k, Cks::k0());
        assert_eq!(k.n(), 1);
        assert_eq!(k.state_count(), 2);
        assert_eq!(k.successors(0).len(), 2);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        let e = parse_model("locals 1: a b\nstate s = (a,b)\nedge s -> s\n").unwrap_err();
        assert!(e.msg.contains("arity"), "{e}");
    }

    #[test]
    fn missing_successor_is_an_error() {
        let e = parse_model("locals 1: a b\nstate s = (a)\nstate t = (b)\nedge s -> t\nedge t -> t\n");
        // t has successors, s does too; break s instead
        assert!(e.is_ok());
        let e = parse_model("locals 1: a b\nstate s = (a)\nstate t = (b)\nedge t -> t\n").unwrap_err();
        assert!(e.msg.contains("left-total"), "{e}");
    }

    #[test]
    fn duplicate_local_across_alphabets_is_an_error() {
        let e = parse_model("locals 1: a\nlocals 2: a\nstate s = (a,a)\nedge s -> s\n").unwrap_err();
        assert!(e.msg.contains("two alphabets"), "{e}");
    }

    #[test]
    fn unknown_state_in_edge_is_an_error() {
        let e = parse_model("locals 1: a\nstate s = (a)\nedge s -> t\n").unwrap_err();
        assert!(e.msg.contains("unknown state"), "{e}");
    }

    #[test]
    fn reserved_prop_is_an_error() {
        let e =
            parse_model("locals 1: a\nstate s = (a)\nedge s -> s\nlabel s: @a\n").unwrap_err();
        assert!(e.msg.contains("reserved"), "{e}");
    }

    #[test]
    fn projection_examples() {
        let coords = vec![1, 2];
        let d: Dir = vec!["a".into(), "x".into()];
        assert_eq!(
            project_state(&coords, &d, &[1].into_iter().collect()).unwrap(),
            BlankOrTuple::Tuple(vec!["a".into()])
        );
        assert_eq!(
            project_state(&coords, &d, &BTreeSet::new()).unwrap(),
            BlankOrTuple::Blank
        );
        assert_eq!(
            project_state(&coords, &d, &[1, 2].into_iter().collect()).unwrap(),
            BlankOrTuple::Tuple(d.clone())
        );
        assert!(project_state(&[1], &d[..1].to_vec(), &[2].into_iter().collect()).is_err());
    }

    #[test]
    fn projection_composes() {
        let coords = vec![1, 2, 3];
        let d: Dir = vec!["a".into(), "x".into(), "m".into()];
        let j: BTreeSet<usize> = [1, 3].into_iter().collect();
        let j2: BTreeSet<usize> = [3].into_iter().collect();
        let once = project_dir(&coords, &d, &j);
        let jc: Vec<usize> = j.iter().copied().collect();
        assert_eq!(project_dir(&jc, &once, &j2), project_dir(&coords, &d, &j2));
    }

    #[test]
    fn obs_equiv_examples() {
        let coords = vec![1, 2];
        let d: Dir = vec!["a".into(), "x".into()];
        let d2: Dir = vec!["a".into(), "y".into()];
        assert!(obs_equiv_tuples(&coords, &d, &d2, &[1].into_iter().collect()));
        assert!(!obs_equiv_tuples(&coords, &d, &d2, &[1, 2].into_iter().collect()));
        assert!(obs_equiv_tuples(&coords, &d, &d2, &BTreeSet::new()));
    }

    #[test]
    fn uniformity_on_k0() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let kp = k.with_prop("p", &[u].into_iter().collect());
        assert!(!is_uniform_labelling(&kp, "p", &obs(&[])));
        assert!(is_uniform_labelling(&kp, "p", &obs(&[1])));
        assert!(is_uniform_labelling(&k, "p", &obs(&[])));
    }

    #[test]
    fn uniformity_monotone_in_observation() {
        // On K0 every pair of distinct states is distinguishable at o = {1},
        // so any labelling is {1}-uniform; blind uniformity implies it too.
        let k = Cks::k0();
        for mask in 0..4u32 {
            let holds: BTreeSet<usize> = (0..2).filter(|i| mask & (1 << i) != 0).collect();
            let kp = k.with_prop("p", &holds);
            if is_uniform_labelling(&kp, "p", &obs(&[])) {
                assert!(is_uniform_labelling(&kp, "p", &obs(&[1])));
            }
            assert!(is_uniform_labelling(&kp, "p", &obs(&[1])));
        }
    }

    #[test]
    fn obs_classes_on_k0() {
        let k = Cks::k0();
        assert_eq!(k.obs_classes(&obs(&[])).len(), 1);
        assert_eq!(k.obs_classes(&obs(&[1])).len(), 2);
    }

    #[test]
    fn unfold_k0_depth1() {
        let k = Cks::k0();
        let u = k.state_id("u").unwrap();
        let t = unfold_bounded(&k, u, 1);
        // nodes: u, u.u, u.v
        assert_eq!(t.nodes.len(), 3);
        let tu = k.tuple(u).clone();
        assert!(t.nodes.contains_key(&vec![tu.clone()]));
        assert!(t.nodes.contains_key(&vec![tu.clone(), tu.clone()]));
    }

    #[test]
    fn unfold_depth0_is_root_only() {
        let k = Cks::k0();
        let t = unfold_bounded(&k, 0, 0);
        assert_eq!(t.nodes.len(), 1);
    }

    #[test]
    fn unfold_labels_follow_last_state() {
        let k = Cks::k0();
        let v = k.state_id("v").unwrap();
        let kp = k.with_prop("p", &[v].into_iter().collect());
        let u = kp.state_id("u").unwrap();
        let t = unfold_bounded(&kp, u, 1);
        let word = vec![kp.tuple(u).clone(), kp.tuple(v).clone()];
        assert!(t.nodes[&word].contains("p"));
        assert!(!t.nodes[&vec![kp.tuple(u).clone()]].contains("p"));
    }

    #[test]
    fn with_local_props_adds_reserved_names() {
        let k = Cks::k0().with_local_props();
        let u = k.state_id("u").unwrap();
        assert!(k.label(u).contains("@l1"));
        assert!(!k.label(u).contains("@l2"));
    }

    #[test]
    fn tuples_enumeration() {
        let la = LocalAlphabets::new(vec![
            vec!["a".into(), "b".into()],
            vec!["x".into()],
        ])
        .unwrap();
        assert_eq!(la.tuples(&[]), vec![Vec::<&str>::new()]);
        assert_eq!(la.tuples(&[1, 2]).len(), 2);
        assert_eq!(la.dirs(&[1])[0], vec!["a".to_string()]);
    }
}
