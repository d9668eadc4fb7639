//! Finite parity games under the global max-even convention: Eve wins an
//! infinite play iff the maximum colour occurring infinitely often is even.
//! Deadlock positions carry an explicit winner tag instead of successors.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Owner {
    Eve,
    Adam,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Eve => Owner::Adam,
            Owner::Adam => Owner::Eve,
        }
    }

    /// The player winning infinite repetition of colour `c`.
    pub fn of_colour(c: usize) -> Owner {
        if c % 2 == 0 {
            Owner::Eve
        } else {
            Owner::Adam
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub owner: Owner,
    pub colour: usize,
    pub succs: Vec<usize>,
    /// Set iff `succs` is empty: who wins a play ending here.
    pub deadlock_winner: Option<Owner>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGame {
    pub positions: Vec<Position>,
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameError {
    pub msg: String,
}

impl fmt::Display for GameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl core::error::Error for GameError {}

impl ParityGame {
    pub fn validate(&self) -> Result<(), GameError> {
        if self.positions.is_empty() {
            return Err(GameError {
                msg: "empty arena".into(),
            });
        }
        if self.initial >= self.positions.len() {
            return Err(GameError {
                msg: "initial position out of range".into(),
            });
        }
        for (i, p) in self.positions.iter().enumerate() {
            if p.succs.is_empty() != p.deadlock_winner.is_some() {
                return Err(GameError {
                    msg: format!("position {i}: deadlock tag must be set iff there are no moves"),
                });
            }
            if p.succs.iter().any(|&s| s >= self.positions.len()) {
                return Err(GameError {
                    msg: format!("position {i}: successor out of range"),
                });
            }
        }
        Ok(())
    }

    /// PGSolver-style text dump: `id colour owner successors;` per line,
    /// with `win:Eve|Adam` in place of successors at deadlocks.
    pub fn dump(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "parity {};", self.positions.len());
        for (i, p) in self.positions.iter().enumerate() {
            let owner = match p.owner {
                Owner::Eve => 0,
                Owner::Adam => 1,
            };
            let _ = write!(out, "{i} {} {owner} ", p.colour);
            match p.deadlock_winner {
                Some(Owner::Eve) => {
                    let _ = write!(out, "win:Eve");
                }
                Some(Owner::Adam) => {
                    let _ = write!(out, "win:Adam");
                }
                None => {
                    for (k, s) in p.succs.iter().enumerate() {
                        if k > 0 {
                            let _ = write!(out, ",");
                        }
                        let _ = write!(out, "{s}");
                    }
                }
            }
            let _ = writeln!(out, ";");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Owner>,
    /// For each position owned by its winner (and not a deadlock), the
    /// chosen successor.
    pub strategy: Vec<Option<usize>>,
}

/// Internal arena with deadlocks replaced by coloured self-loops: an
/// Eve-winning deadlock becomes a colour-0 self-loop, an Adam-winning one
/// colour 1. Positional winners are unchanged.
struct Arena {
    owner: Vec<Owner>,
    colour: Vec<usize>,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
    was_deadlock: Vec<bool>,
}

impl Arena {
    fn of(g: &ParityGame) -> Arena {
        let n = g.positions.len();
        let mut owner = Vec::with_capacity(n);
        let mut colour = Vec::with_capacity(n);
        let mut succs = Vec::with_capacity(n);
        let mut was_deadlock = Vec::with_capacity(n);
        for (i, p) in g.positions.iter().enumerate() {
            owner.push(p.owner);
            match p.deadlock_winner {
                Some(w) => {
                    colour.push(if w == Owner::Eve { 0 } else { 1 });
                    succs.push(alloc::vec![i]);
                    was_deadlock.push(true);
                }
                None => {
                    colour.push(p.colour);
                    succs.push(p.succs.clone());
                    was_deadlock.push(false);
                }
            }
        }
        let mut preds = alloc::vec![Vec::new(); n];
        for (i, ss) in succs.iter().enumerate() {
            for &s in ss {
                preds[s].push(i);
            }
        }
        Arena {
            owner,
            colour,
            succs,
            preds,
            was_deadlock,
        }
    }

    fn len(&self) -> usize {
        self.owner.len()
    }
}

/// Attractor of `target` for `player` inside `sub`; records the attracting
/// move for player-owned positions in `strategy` (not overwriting target
/// positions).
fn attractor(
    arena: &Arena,
    sub: &[bool],
    target: &[bool],
    player: Owner,
    strategy: &mut [Option<usize>],
) -> Vec<bool> {
    let n = arena.len();
    let mut attr = target.to_vec();
    // count of sub-successors outside attr, for opponent positions
    let mut out_count = alloc::vec![0usize; n];
    for v in 0..n {
        if sub[v] {
            // every queued attr vertex is popped exactly once, so count all
            // sub-successors and let the pops bring the counter down
            out_count[v] = arena.succs[v].iter().filter(|&&s| sub[s]).count();
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
    while let Some(v) = queue.pop() {
        for &u in &arena.preds[v] {
            if !sub[u] || attr[u] {
                continue;
            }
            if arena.owner[u] == player {
                attr[u] = true;
                if strategy[u].is_none() {
                    strategy[u] = Some(v);
                }
                queue.push(u);
            } else {
                out_count[u] -= 1;
                if out_count[u] == 0 {
                    attr[u] = true;
                    queue.push(u);
                }
            }
        }
    }
    attr
}

fn zielonka(arena: &Arena, sub: Vec<bool>, winner: &mut [Option<Owner>], strategy: &mut [Option<usize>]) {
    let n = arena.len();
    let mut sub = sub;
    loop {
        let max_c = match (0..n).filter(|&v| sub[v]).map(|v| arena.colour[v]).max() {
            Some(c) => c,
            None => return,
        };
        let player = Owner::of_colour(max_c);
        let target: Vec<bool> = (0..n).map(|v| sub[v] && arena.colour[v] == max_c).collect();
        let mut attr_strat = alloc::vec![None; n];
        let attr = attractor(arena, &sub, &target, player, &mut attr_strat);

        let rest: Vec<bool> = (0..n).map(|v| sub[v] && !attr[v]).collect();
        let mut sub_winner = alloc::vec![None; n];
        let mut sub_strat = alloc::vec![None; n];
        zielonka(arena, rest.clone(), &mut sub_winner, &mut sub_strat);

        let opp = player.opponent();
        let opp_region: Vec<bool> = (0..n).map(|v| sub_winner[v] == Some(opp)).collect();
        if opp_region.iter().all(|&b| !b) {
            // player wins the whole subgame
            for v in 0..n {
                if !sub[v] {
                    continue;
                }
                winner[v] = Some(player);
                if arena.owner[v] != player {
                    continue;
                }
                if sub_winner[v] == Some(player) {
                    strategy[v] = sub_strat[v];
                } else if let Some(s) = attr_strat[v] {
                    strategy[v] = Some(s);
                } else {
                    // a player-owned target position: any move staying in sub
                    strategy[v] = arena.succs[v].iter().copied().find(|&s| sub[s]);
                }
            }
            return;
        }
        // carve out the opponent's attractor and iterate on the remainder
        let mut opp_strat = alloc::vec![None; n];
        let opp_attr = attractor(arena, &sub, &opp_region, opp, &mut opp_strat);
        for v in 0..n {
            if sub[v] && opp_attr[v] {
                winner[v] = Some(opp);
                if arena.owner[v] == opp {
                    strategy[v] = if opp_region[v] { sub_strat[v] } else { opp_strat[v] };
                }
                sub[v] = false;
            }
        }
    }
}

/// Solve the game exactly under max-even parity, with positional winning
/// strategies for both players on their regions.
pub fn solve_zielonka(g: &ParityGame) -> Result<Solution, GameError> {
    g.validate()?;
    let arena = Arena::of(g);
    let n = arena.len();
    let mut winner = alloc::vec![None; n];
    let mut strategy = alloc::vec![None; n];
    zielonka(&arena, alloc::vec![true; n], &mut winner, &mut strategy);
    // deadlocks have no moves; drop the self-loop pseudo-strategy
    for v in 0..n {
        if arena.was_deadlock[v] {
            strategy[v] = None;
        }
    }
    Ok(Solution {
        winner: winner.into_iter().map(|w| w.unwrap()).collect(),
        strategy,
    })
}

/// Check a solution by graph analysis only (no game solving): strategies
/// stay in the winner's region, the opponent cannot leave it, deadlock tags
/// match, and every cycle under the winner's strategy inside their region
/// has a max colour of the winner's parity.
pub fn verify_strategy(g: &ParityGame, sol: &Solution) -> bool {
    let n = g.positions.len();
    if sol.winner.len() != n || sol.strategy.len() != n {
        return false;
    }
    for (v, p) in g.positions.iter().enumerate() {
        if let Some(w) = p.deadlock_winner {
            if sol.winner[v] != w || sol.strategy[v].is_some() {
                return false;
            }
        }
    }
    for player in [Owner::Eve, Owner::Adam] {
        let region: Vec<bool> = (0..n).map(|v| sol.winner[v] == player).collect();
        // restricted edges inside the region
        let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for v in 0..n {
            if !region[v] {
                continue;
            }
            let p = &g.positions[v];
            if p.deadlock_winner.is_some() {
                continue;
            }
            if p.owner == player {
                match sol.strategy[v] {
                    Some(s) if p.succs.contains(&s) && region[s] => edges[v].push(s),
                    _ => return false,
                }
            } else {
                // the opponent must be trapped
                for &s in &p.succs {
                    if !region[s] {
                        return false;
                    }
                    edges[v].push(s);
                }
            }
        }
        // no cycle whose max colour has the opponent's parity
        let bad_parity = |c: usize| Owner::of_colour(c) != player;
        let colours: BTreeSet<usize> = (0..n)
            .filter(|&v| region[v] && g.positions[v].deadlock_winner.is_none())
            .map(|v| g.positions[v].colour)
            .collect();
        for &c in colours.iter().filter(|&&c| bad_parity(c)) {
            let sub: Vec<bool> = (0..n)
                .map(|v| region[v] && g.positions[v].deadlock_winner.is_none() && g.positions[v].colour <= c)
                .collect();
            if has_cycle_through_colour(&edges, &sub, |v| g.positions[v].colour == c) {
                return false;
            }
        }
    }
    true
}

/// Is there a cycle, within `sub` using `edges`, passing through a vertex
/// satisfying `marked`? Checked via SCCs of the subgraph.
fn has_cycle_through_colour(edges: &[Vec<usize>], sub: &[bool], marked: impl Fn(usize) -> bool) -> bool {
    for (scc, cyclic) in sccs(edges, sub) {
        if cyclic && scc.iter().any(|&v| marked(v)) {
            return true;
        }
    }
    false
}

/// Tarjan-style SCC decomposition (iterative) of the subgraph induced by
/// `sub`; each component is returned with a flag for containing a cycle.
pub(crate) fn sccs(edges: &[Vec<usize>], sub: &[bool]) -> Vec<(Vec<usize>, bool)> {
    let n = edges.len();
    let mut index = alloc::vec![usize::MAX; n];
    let mut low = alloc::vec![0usize; n];
    let mut on_stack = alloc::vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut out = Vec::new();

    for root in 0..n {
        if !sub[root] || index[root] != usize::MAX {
            continue;
        }
        // explicit DFS: (vertex, next edge position)
        let mut call: Vec<(usize, usize)> = alloc::vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut ei)) = call.last_mut() {
            if *ei < edges[v].len() {
                let w = edges[v][*ei];
                *ei += 1;
                if !sub[w] {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let cyclic = comp.len() > 1 || edges[comp[0]].contains(&comp[0]);
                    out.push((comp, cyclic));
                }
            }
        }
    }
    out
}

/// Exhaustive oracle: winner per position by enumerating Eve's positional
/// strategies; for a fixed strategy Adam wins from `v` iff some odd-max
/// cycle or Adam-winning deadlock is reachable. Exponential; tests only.
pub fn brute_force_winners(g: &ParityGame) -> Vec<Owner> {
    let n = g.positions.len();
    let eve_pos: Vec<usize> = (0..n)
        .filter(|&v| g.positions[v].owner == Owner::Eve && !g.positions[v].succs.is_empty())
        .collect();
    let mut eve_wins = alloc::vec![false; n];
    let mut choice = alloc::vec![0usize; eve_pos.len()];
    loop {
        // edges under this Eve strategy
        let mut edges: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        for v in 0..n {
            let p = &g.positions[v];
            if p.owner == Owner::Adam {
                edges[v] = p.succs.clone();
            }
        }
        for (k, &v) in eve_pos.iter().enumerate() {
            edges[v].push(g.positions[v].succs[choice[k]]);
        }
        // vertices on a cycle of odd max colour
        let mut bad = alloc::vec![false; n];
        let colours: BTreeSet<usize> = (0..n)
            .filter(|&v| g.positions[v].deadlock_winner.is_none())
            .map(|v| g.positions[v].colour)
            .collect();
        for &c in colours.iter().filter(|&&c| c % 2 == 1) {
            let sub: Vec<bool> = (0..n)
                .map(|v| g.positions[v].deadlock_winner.is_none() && g.positions[v].colour <= c)
                .collect();
            for (scc, cyclic) in sccs(&edges, &sub) {
                if cyclic && scc.iter().any(|&v| g.positions[v].colour == c) {
                    for &v in &scc {
                        bad[v] = true;
                    }
                }
            }
        }
        for v in 0..n {
            if g.positions[v].deadlock_winner == Some(Owner::Adam) {
                bad[v] = true;
            }
        }
        // Eve wins from v under this strategy iff no bad vertex is reachable
        let mut reach_bad = bad.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..n {
                if !reach_bad[v] && edges[v].iter().any(|&s| reach_bad[s]) {
                    reach_bad[v] = true;
                    changed = true;
                }
            }
        }
        for v in 0..n {
            if !reach_bad[v] {
                eve_wins[v] = true;
            }
        }
        // next strategy
        let mut k = 0;
        loop {
            if k == eve_pos.len() {
                return (0..n)
                    .map(|v| if eve_wins[v] { Owner::Eve } else { Owner::Adam })
                    .collect();
            }
            choice[k] += 1;
            if choice[k] < g.positions[eve_pos[k]].succs.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pos(owner: Owner, colour: usize, succs: Vec<usize>) -> Position {
        Position {
            owner,
            colour,
            succs,
            deadlock_winner: None,
        }
    }

    fn deadlock(owner: Owner, winner: Owner) -> Position {
        Position {
            owner,
            colour: 0,
            succs: vec![],
            deadlock_winner: Some(winner),
        }
    }

    #[test]
    fn self_loop_parity() {
        for (c, expected) in [(0, Owner::Eve), (1, Owner::Adam), (2, Owner::Eve)] {
            let g = ParityGame {
                positions: vec![pos(Owner::Eve, c, vec![0])],
                initial: 0,
            };
            let sol = solve_zielonka(&g).unwrap();
            assert_eq!(sol.winner[0], expected, "colour {c}");
            assert!(verify_strategy(&g, &sol));
        }
    }

    #[test]
    fn deadlock_tags_decide() {
        for w in [Owner::Eve, Owner::Adam] {
            let g = ParityGame {
                positions: vec![pos(Owner::Adam, 3, vec![1]), deadlock(Owner::Eve, w)],
                initial: 0,
            };
            let sol = solve_zielonka(&g).unwrap();
            assert_eq!(sol.winner[0], w);
            assert_eq!(sol.winner[1], w);
            assert!(verify_strategy(&g, &sol));
        }
    }

    #[test]
    fn eve_chooses_the_even_loop() {
        // Eve at 0 can go to an odd self-loop (1) or an even one (2).
        let g = ParityGame {
            positions: vec![
                pos(Owner::Eve, 0, vec![1, 2]),
                pos(Owner::Adam, 1, vec![1]),
                pos(Owner::Adam, 2, vec![2]),
            ],
            initial: 0,
        };
        let sol = solve_zielonka(&g).unwrap();
        assert_eq!(sol.winner, vec![Owner::Eve, Owner::Adam, Owner::Eve]);
        assert_eq!(sol.strategy[0], Some(2));
        assert!(verify_strategy(&g, &sol));
    }

    #[test]
    fn corrupted_strategy_fails_verification() {
        let g = ParityGame {
            positions: vec![
                pos(Owner::Eve, 0, vec![1, 2]),
                pos(Owner::Adam, 1, vec![1]),
                pos(Owner::Adam, 2, vec![2]),
            ],
            initial: 0,
        };
        let mut sol = solve_zielonka(&g).unwrap();
        sol.strategy[0] = Some(1);
        assert!(!verify_strategy(&g, &sol));
    }

    #[test]
    fn validation_errors() {
        let g = ParityGame {
            positions: vec![pos(Owner::Eve, 0, vec![5])],
            initial: 0,
        };
        assert!(solve_zielonka(&g).is_err());
        let g = ParityGame {
            positions: vec![Position {
                owner: Owner::Eve,
                colour: 0,
                succs: vec![],
                deadlock_winner: None,
            }],
            initial: 0,
        };
        assert!(solve_zielonka(&g).is_err());
    }

    fn random_game(rng: &mut ChaCha8Rng) -> ParityGame {
        let n = rng.gen_range(1..=6);
        let positions = (0..n)
            .map(|_| {
                let owner = if rng.gen_bool(0.5) { Owner::Eve } else { Owner::Adam };
                if rng.gen_bool(0.1) {
                    deadlock(owner, if rng.gen_bool(0.5) { Owner::Eve } else { Owner::Adam })
                } else {
                    let k = rng.gen_range(1..=3.min(n));
                    let succs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
                    pos(owner, rng.gen_range(0..=4), succs)
                }
            })
            .collect();
        ParityGame {
            positions,
            initial: rng.gen_range(0..n),
        }
    }

    #[test]
    fn matches_brute_force_on_random_games() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for i in 0..200 {
            let g = random_game(&mut rng);
            let sol = solve_zielonka(&g).unwrap();
            let brute = brute_force_winners(&g);
            assert_eq!(sol.winner, brute, "game {i}:\n{}", g.dump());
            assert!(verify_strategy(&g, &sol), "strategy check, game {i}:\n{}", g.dump());
        }
    }

    #[test]
    fn colour_shift_by_two_preserves_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_game(&mut rng);
            let mut g2 = g.clone();
            for p in &mut g2.positions {
                p.colour += 2;
            }
            assert_eq!(solve_zielonka(&g).unwrap().winner, solve_zielonka(&g2).unwrap().winner);
        }
    }

    #[test]
    fn colour_and_owner_shift_swaps_regions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let g = random_game(&mut rng);
            let mut g2 = g.clone();
            for p in &mut g2.positions {
                p.colour += 1;
                p.owner = p.owner.opponent();
                p.deadlock_winner = p.deadlock_winner.map(Owner::opponent);
            }
            let w = solve_zielonka(&g).unwrap().winner;
            let w2 = solve_zielonka(&g2).unwrap().winner;
            assert_eq!(w2, w.into_iter().map(Owner::opponent).collect::<Vec<_>>());
        }
    }

    #[test]
    fn dump_is_stable() {
        let g = ParityGame {
            positions: vec![pos(Owner::Eve, 2, vec![0, 1]), deadlock(Owner::Adam, Owner::Eve)],
            initial: 0,
        };
        assert_eq!(g.dump(), "parity 2;\n0 2 0 0,1;\n1 0 1 win:Eve;\n");
    }
}
