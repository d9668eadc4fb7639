//! Simulation: alternating to nondeterministic tree automata by annotation
//! guessing. An NTA state is a slice of a positional Eve strategy: the set
//! of ATA states active at a node, paired with the state of the
//! deterministic all-traces parity machine fed the per-branch annotation
//! history. The machine's colour becomes the state colour, so every branch
//! of an accepting NTA run certifies that every trace of ATA states along
//! it satisfies the parity condition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::alltraces::{AllTraces, Ann};
use crate::ata::{Ata, AtaError, Nta};
use crate::pbf::{self, Atom, Pbf};

/// Simulate with a cap on the number of output states; exceeding it is an
/// error so callers can surface a resource diagnostic instead of thrashing.
pub fn simulate_capped(a: &Ata, max_states: usize) -> Result<Nta, AtaError> {
    a.validate()?;
    let q_count = a.state_count();
    let dir_count = a.dirs.len();
    let mut traces = AllTraces::new(q_count, &a.colours);
    let m0 = traces.initial();

    // interned composite states (S, m); T_miss is appended at the end
    let mut ids: BTreeMap<(BTreeSet<usize>, usize), usize> = BTreeMap::new();
    let mut states: Vec<(BTreeSet<usize>, usize)> = Vec::new();
    let intern = |s: (BTreeSet<usize>, usize),
                      ids: &mut BTreeMap<(BTreeSet<usize>, usize), usize>,
                      states: &mut Vec<(BTreeSet<usize>, usize)>|
     -> usize {
        *ids.entry(s.clone()).or_insert_with(|| {
            states.push(s);
            states.len() - 1
        })
    };

    let init_set: BTreeSet<usize> = [a.initial].into_iter().collect();
    let initial = intern((init_set, m0), &mut ids, &mut states);

    // minimal models of the ATA transitions, computed once per (q, letter);
    // atoms are tagged with the source state (d, q2) -> (d, q * q_count + q2)
    // so that joint models keep the trace attribution
    let mut models: BTreeMap<(usize, usize), Vec<BTreeSet<Atom>>> = BTreeMap::new();
    for q in 0..q_count {
        for letter in 0..a.letter_count() {
            let ms = a.delta[q][letter]
                .minimal_models()
                .into_iter()
                .map(|m| m.into_iter().map(|(d, q2)| (d, q * q_count + q2)).collect())
                .collect();
            models.insert((q, letter), ms);
        }
    }

    let mut delta: Vec<Vec<Pbf>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        if states.len() + 1 > max_states {
            return Err(AtaError {
                msg: format!(
                    "simulation exceeded the state cap of {max_states} states"
                ),
            });
        }
        let (s_set, m) = states[i].clone();
        let active: Vec<usize> = s_set.iter().copied().collect();
        let mut row: Vec<Pbf> = Vec::with_capacity(a.letter_count());
        for letter in 0..a.letter_count() {
            // joint minimal models of the conjunction over the active states:
            // the source tags keep the per-state parts disjoint, so these are
            // exactly the pointwise-minimal combinations of per-state minimal
            // models, and non-minimal combinations never help acceptance
            let mut joint: Vec<BTreeSet<Atom>> = alloc::vec![BTreeSet::new()];
            for &q in &active {
                let ms = &models[&(q, letter)];
                if ms.is_empty() {
                    joint.clear();
                    break;
                }
                let mut next = Vec::with_capacity(joint.len() * ms.len());
                for x in &joint {
                    for y in ms {
                        next.push(x.union(y).copied().collect());
                    }
                }
                joint = Pbf::antichain_reduce(next);
            }
            let mut outcomes: BTreeSet<Vec<Ann>> = BTreeSet::new();
            for model in joint {
                let mut anns: Vec<Ann> = alloc::vec![Ann::new(); dir_count];
                for &(d, tag) in &model {
                    anns[d].insert((tag / q_count, tag % q_count));
                }
                outcomes.insert(anns);
            }
            let mut disjuncts: BTreeSet<Vec<Atom>> = BTreeSet::new();
            for anns in outcomes {
                // per direction: follow the child, or claim it missing when
                // every demanded state would accept a missing child
                let mut options: Vec<Vec<OptionAtom>> = Vec::with_capacity(dir_count);
                for ann_d in anns.iter() {
                    let s_d: BTreeSet<usize> = ann_d.iter().map(|&(_, q2)| q2).collect();
                    let m_d = traces.step(m, ann_d);
                    let mut opts = alloc::vec![OptionAtom::Present(s_d.clone(), m_d)];
                    if !s_d.is_empty() && s_d.iter().all(|&q2| a.top[q2]) {
                        opts.push(OptionAtom::Miss);
                    }
                    options.push(opts);
                }
                let mut pick = alloc::vec![0usize; dir_count];
                'opt: loop {
                    let mut disjunct: Vec<Atom> = Vec::with_capacity(dir_count);
                    for d in 0..dir_count {
                        let atom = match &options[d][pick[d]] {
                            OptionAtom::Present(s_d, m_d) => {
                                (d, intern((s_d.clone(), *m_d), &mut ids, &mut states))
                            }
                            OptionAtom::Miss => (d, usize::MAX), // patched to T_miss below
                        };
                        disjunct.push(atom);
                    }
                    disjuncts.insert(disjunct);
                    let mut d = 0;
                    loop {
                        if d == dir_count {
                            break 'opt;
                        }
                        pick[d] += 1;
                        if pick[d] < options[d].len() {
                            break;
                        }
                        pick[d] = 0;
                        d += 1;
                    }
                }
            }
            row.push(pbf::or_all(disjuncts.into_iter().map(|disjunct| {
                pbf::and_all(disjunct.into_iter().map(Pbf::Atom))
            })));
        }
        delta.push(row);
        i += 1;
    }

    // append T_miss: rejects any present child, accepts a missing one
    let t_miss = states.len();
    let patch = |f: &Pbf| f.map_atoms(&|(d, q)| Pbf::Atom((d, if q == usize::MAX { t_miss } else { q })));
    let mut delta: Vec<Vec<Pbf>> = delta
        .iter()
        .map(|row| row.iter().map(&patch).collect())
        .collect();
    delta.push(alloc::vec![Pbf::False; a.letter_count()]);

    let mut colours: Vec<usize> = states.iter().map(|(_, m)| traces.colour(*m)).collect();
    colours.push(0);
    let mut top: Vec<bool> = states.iter().map(|(s, _)| s.is_empty()).collect();
    top.push(true);

    Nta::new(Ata {
        coords: a.coords.clone(),
        dirs: a.dirs.clone(),
        atoms: a.atoms.clone(),
        initial,
        delta,
        colours,
        top,
    })
}

enum OptionAtom {
    Present(BTreeSet<usize>, usize),
    Miss,
}

pub fn simulate(a: &Ata) -> Result<Nta, AtaError> {
    simulate_capped(a, usize::MAX)
}
