//! Random instance generators for the self-test suites. Everything is driven
//! by a caller-supplied ChaCha stream, so a failing instance can be replayed
//! from the suite seed and the draw number.

use std::collections::BTreeSet;

use qctlii_core::ata::{Ata, Nta, RegularTree, RtVertex};
use qctlii_core::formula::{
    aquant, embed, equant, exists, pnext, pnot, por, prop, puntil, sand, snot, sor, Observation,
    PathFormula, StateFormula,
};
use qctlii_core::kripke::{Dir, LocalAlphabets};
use qctlii_core::parity::{Owner, ParityGame, Position};
use qctlii_core::pbf::{and_all, or_all, Pbf};
use qctlii_core::word::LassoWord;
use qctlii_core::Cks;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Small random compound Kripke structure: n <= 2 coordinates, local
/// alphabets of size <= 2, at most 4 states, left-total edges, and the free
/// propositions `p` and `r` labelled on nonempty sets.
pub fn random_cks(rng: &mut ChaCha8Rng) -> Cks {
    loop {
        let n_coords = rng.gen_range(1..=2);
        let mut alphabets = Vec::new();
        let mut letter = b'a';
        for _ in 0..n_coords {
            let size = rng.gen_range(1..=2);
            alphabets.push(
                (0..size)
                    .map(|_| {
                        let l = (letter as char).to_string();
                        letter += 1;
                        l
                    })
                    .collect::<Vec<_>>(),
            );
        }
        let locals = LocalAlphabets::new(alphabets).unwrap();
        let coords: Vec<usize> = (1..=n_coords).collect();
        let tuples = locals.dirs(&coords);
        let mut states: Vec<(String, Dir)> = Vec::new();
        for (i, t) in tuples.iter().enumerate() {
            if states.is_empty() || rng.gen_bool(0.8) {
                states.push((format!("s{i}"), t.clone()));
            }
        }
        let names: Vec<String> = states.iter().map(|(n, _)| n.clone()).collect();
        let mut edges = Vec::new();
        for a in &names {
            let mut any = false;
            for b in &names {
                if rng.gen_bool(0.5) {
                    edges.push((a.clone(), b.clone()));
                    any = true;
                }
            }
            if !any {
                let b = &names[rng.gen_range(0..names.len())];
                edges.push((a.clone(), b.clone()));
            }
        }
        if let Ok(k) = Cks::new(locals, states, &edges, &[]) {
            let mut k2 = k;
            for prop_name in ["p", "r"] {
                let mut holds: BTreeSet<usize> =
                    k2.state_ids().filter(|_| rng.gen_bool(0.5)).collect();
                if holds.is_empty() {
                    holds.insert(rng.gen_range(0..k2.state_count()));
                }
                k2 = k2.with_prop(prop_name, &holds);
            }
            return k2;
        }
    }
}

/// Random CTL formula over the given atoms (plus `true`), within the CTL
/// shape grammar so the fixpoint oracle applies.
pub fn random_ctl(rng: &mut ChaCha8Rng, depth: usize, atoms: &[&str]) -> StateFormula {
    if depth == 0 {
        let i = rng.gen_range(0..=atoms.len());
        return if i == atoms.len() {
            StateFormula::True
        } else {
            prop(atoms[i])
        };
    }
    let a = random_ctl(rng, depth - 1, atoms);
    let b = random_ctl(rng, depth - 1, atoms);
    match rng.gen_range(0..7) {
        0 => {
            // keep negations inside the CTL shape grammar
            let c = snot(a.clone());
            if qctlii_core::formula::is_ctl(&c) {
                c
            } else {
                a
            }
        }
        1 => sor(a, b),
        2 => sand(a, b),
        3 => equant(pnext(embed(a))),
        4 => aquant(pnext(embed(a))),
        5 => equant(puntil(embed(a), embed(b))),
        _ => aquant(puntil(embed(a), embed(b))),
    }
}

/// Random quantified formula: up to `qnest` nested quantifiers with random
/// observations over `1..=n`, each body a CTL formula (depth <= 3) that
/// mentions the bound proposition. Quantifiers sit above the temporal layer,
/// so the enumeration oracle stays total.
pub fn random_quantified(rng: &mut ChaCha8Rng, n: usize, qnest: usize) -> StateFormula {
    if qnest == 0 {
        let depth = rng.gen_range(1..=3);
        return random_ctl(rng, depth, &["p", "r"]);
    }
    let name = format!("q{qnest}");
    let bound: &str = &name;
    let inner = if rng.gen_bool(0.5) && qnest > 1 {
        random_quantified(rng, n, qnest - 1)
    } else {
        let depth = rng.gen_range(1..=2);
        random_ctl(rng, depth, &["p", "r", bound])
    };
    // tie the bound prop into the body so the quantifier matters
    let body = match rng.gen_range(0..3) {
        0 => sand(prop(bound), inner),
        1 => sor(snot(prop(bound)), inner),
        _ => sand(equant(pnext(embed(prop(bound)))), inner),
    };
    let obs: BTreeSet<usize> = (1..=n).filter(|_| rng.gen_bool(0.5)).collect();
    let f = exists(bound, Observation::Set(obs), body);
    if rng.gen_bool(0.3) {
        snot(f)
    } else {
        f
    }
}

/// Random quantifier-free CTL* state formula over `p` and `r`.
pub fn random_qfree(rng: &mut ChaCha8Rng, depth: usize) -> StateFormula {
    if depth == 0 {
        return prop(if rng.gen_bool(0.5) { "p" } else { "r" });
    }
    match rng.gen_range(0..4) {
        0 => snot(random_qfree(rng, depth - 1)),
        1 => sor(random_qfree(rng, depth - 1), random_qfree(rng, depth - 1)),
        _ => equant(random_qfree_path(rng, depth - 1)),
    }
}

fn random_qfree_path(rng: &mut ChaCha8Rng, depth: usize) -> PathFormula {
    if depth == 0 {
        return embed(prop(if rng.gen_bool(0.5) { "p" } else { "r" }));
    }
    match rng.gen_range(0..5) {
        0 => pnext(random_qfree_path(rng, depth - 1)),
        1 => pnot(random_qfree_path(rng, depth - 1)),
        2 => por(
            random_qfree_path(rng, depth - 1),
            random_qfree_path(rng, depth - 1),
        ),
        3 => puntil(
            random_qfree_path(rng, depth - 1),
            random_qfree_path(rng, depth - 1),
        ),
        _ => embed(random_qfree(rng, depth - 1)),
    }
}

/// Random LTL formula over `p`, `q` of syntactic size at most `max_size`.
pub fn random_ltl(rng: &mut ChaCha8Rng, max_size: usize) -> PathFormula {
    let atom = |rng: &mut ChaCha8Rng| {
        embed(match rng.gen_range(0..3) {
            0 => StateFormula::True,
            1 => prop("p"),
            _ => prop("q"),
        })
    };
    if max_size <= 1 {
        return atom(rng);
    }
    match rng.gen_range(0..6) {
        0 => atom(rng),
        1 => pnot(random_ltl(rng, max_size - 1)),
        2 => pnext(random_ltl(rng, max_size - 1)),
        3 => por(
            random_ltl(rng, (max_size - 1) / 2),
            random_ltl(rng, max_size - 1 - (max_size - 1) / 2),
        ),
        _ => puntil(
            random_ltl(rng, (max_size - 1) / 2),
            random_ltl(rng, max_size - 1 - (max_size - 1) / 2),
        ),
    }
}

/// Random lasso word over subsets of `sigma`: prefix length <= 3, loop
/// length 1..=3.
pub fn random_lasso(rng: &mut ChaCha8Rng, sigma: &BTreeSet<String>) -> LassoWord {
    let letter = |rng: &mut ChaCha8Rng| -> BTreeSet<String> {
        sigma.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
    };
    let prefix: Vec<_> = (0..rng.gen_range(0..=3)).map(|_| letter(rng)).collect();
    let loop_: Vec<_> = (0..rng.gen_range(1..=3)).map(|_| letter(rng)).collect();
    LassoWord::new(prefix, loop_).unwrap()
}

/// Random parity game: <= 6 positions, colours <= 4, random deadlocks.
pub fn random_game(rng: &mut ChaCha8Rng) -> ParityGame {
    let n = rng.gen_range(1..=6);
    let positions = (0..n)
        .map(|_| {
            let succs: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let deadlock_winner = if succs.is_empty() {
                Some(if rng.gen_bool(0.5) {
                    Owner::Eve
                } else {
                    Owner::Adam
                })
            } else {
                None
            };
            Position {
                owner: if rng.gen_bool(0.5) {
                    Owner::Eve
                } else {
                    Owner::Adam
                },
                colour: rng.gen_range(0..=4),
                succs,
                deadlock_winner,
            }
        })
        .collect();
    ParityGame {
        positions,
        initial: rng.gen_range(0..n),
    }
}

/// The one-coordinate two-direction frame the automata suites run over.
pub fn two_dirs() -> (Vec<usize>, Vec<Dir>) {
    (
        vec![1],
        vec![vec!["l1".to_string()], vec!["l2".to_string()]],
    )
}

/// Random positive boolean formula over (direction, state) atoms.
pub fn random_pbf(rng: &mut ChaCha8Rng, dirs: usize, states: usize, depth: usize) -> Pbf {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..6) {
            0 => Pbf::True,
            1 => Pbf::False,
            _ => Pbf::Atom((rng.gen_range(0..dirs), rng.gen_range(0..states))),
        };
    }
    let a = random_pbf(rng, dirs, states, depth - 1);
    let b = random_pbf(rng, dirs, states, depth - 1);
    if rng.gen_bool(0.5) {
        qctlii_core::pbf::and(a, b)
    } else {
        qctlii_core::pbf::or(a, b)
    }
}

/// Random alternating parity tree automaton with <= 4 states.
pub fn random_ata(
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

/// Random nondeterministic parity tree automaton with <= 4 states: every
/// row is False or a disjunction of full one-successor-per-direction
/// conjunctions, which is exactly the NTA shape.
pub fn random_nta(
    rng: &mut ChaCha8Rng,
    coords: Vec<usize>,
    dirs: Vec<Dir>,
    atoms: Vec<String>,
) -> Nta {
    let states = rng.gen_range(1..=4);
    let letters = 1usize << atoms.len();
    let ndirs = dirs.len();
    let delta = (0..states)
        .map(|_| {
            (0..letters)
                .map(|_| {
                    if rng.gen_bool(0.15) {
                        return Pbf::False;
                    }
                    or_all((0..rng.gen_range(1..=2)).map(|_| {
                        and_all(
                            (0..ndirs).map(|d| Pbf::Atom((d, rng.gen_range(0..states)))),
                        )
                    }))
                })
                .collect()
        })
        .collect();
    Nta::new(Ata {
        coords,
        dirs,
        atoms,
        initial: 0,
        delta,
        colours: (0..states).map(|_| rng.gen_range(0..4)).collect(),
        top: (0..states).map(|_| rng.gen_bool(0.5)).collect(),
    })
    .unwrap()
}

/// Random regular tree with <= 4 vertices over the given frame; every
/// vertex has at most one child per direction.
pub fn random_tree(
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
                let cands: Vec<usize> = (0..n).filter(|&c| t.vertices[c].dir == d).collect();
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
