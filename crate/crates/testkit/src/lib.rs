//! Seeded corpus generators and brute-force oracles shared by the test suites.
//!
//! The oracles work on nodes (finite sequences) and only ask the tree
//! membership questions; they never look at state-level analyses.

use std::sync::Arc;

use baire_core::conditions::{Condition, ConditionSet, CsKind, FirstLetterAbove, FirstLetterBit, PrefixCondition, SharedCs};
use baire_core::games::{pair, GameConfig, IMove, Move, PlayHistory, Side, Strategy};
use baire_core::smallness::{is_b_nowhere_dense, BPerfectTree, NdMode, Witness};
use baire_core::tree::{Alphabet, ChildSpec, FinSeq, Letter, RegularTree, StateId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The three built-in condition sets; ex62 enumerates letters below 3.
pub fn canonical_sets() -> Vec<SharedCs> {
    vec![
        Arc::new(FirstLetterBit),
        Arc::new(PrefixCondition::new(3).unwrap()),
        Arc::new(FirstLetterAbove),
    ]
}

/* Trees */

/// A random non-empty tree with at most `max_states` states. Letters in
/// `Set` specs are below 5; some states get an `Above(k)` or `All` spec.
pub fn random_tree(rng: &mut impl Rng, max_states: u32) -> RegularTree {
    loop {
        let alphabet = if rng.gen_bool(0.2) {
            Alphabet::Finite(rng.gen_range(2..=4))
        } else {
            Alphabet::Omega
        };
        let n = rng.gen_range(1..=max_states);
        let mut edges = Vec::new();
        for src in 0..n {
            edges.extend(random_specs(rng, alphabet, n, src, 5, 0.35));
        }
        if let Ok(t) = RegularTree::new(alphabet, Some(0), edges) {
            if !t.is_empty() {
                return t;
            }
        }
    }
}

fn random_specs(
    rng: &mut impl Rng,
    alphabet: Alphabet,
    n: u32,
    src: StateId,
    letter_bound: u32,
    infinite_p: f64,
) -> Vec<(StateId, ChildSpec, StateId)> {
    let bound = alphabet.size().map_or(letter_bound, |s| s.min(letter_bound));
    let mut out = Vec::new();
    if alphabet == Alphabet::Omega && rng.gen_bool(infinite_p / 3.0) {
        out.push((src, ChildSpec::All, rng.gen_range(0..n)));
        return out;
    }
    let mut by_target: Vec<Vec<Letter>> = vec![Vec::new(); n as usize];
    let mut top = None;
    for x in 0..bound {
        if rng.gen_bool(0.45) {
            by_target[rng.gen_range(0..n) as usize].push(x);
            top = Some(x);
        }
    }
    for (t, letters) in by_target.into_iter().enumerate() {
        if !letters.is_empty() {
            out.push((src, ChildSpec::set(letters), t as StateId));
        }
    }
    if alphabet == Alphabet::Omega && rng.gen_bool(infinite_p) {
        let k = top.map_or(0, |m| m + rng.gen_range(0..2));
        out.push((src, ChildSpec::Above(k), rng.gen_range(0..n)));
    }
    out
}

/// `count` random trees from `seed`, at most 6 states each.
pub fn tree_corpus(seed: u64, count: usize) -> Vec<RegularTree> {
    let mut r = rng(seed);
    (0..count).map(|_| random_tree(&mut r, 6)).collect()
}

/// Largest letter written in any spec; every letter above it behaves alike.
pub fn max_explicit_letter(t: &RegularTree) -> Letter {
    t.edge_list()
        .iter()
        .map(|(_, spec, _)| match spec {
            ChildSpec::Set(s) => s.iter().next_back().copied().unwrap_or(0),
            ChildSpec::All => 0,
            ChildSpec::Above(k) => *k,
        })
        .max()
        .unwrap_or(0)
}

/// Letters `0..=M+1`: one representative for every class of letters the tree can tell apart.
pub fn representative_letters(t: &RegularTree) -> Vec<Letter> {
    t.alphabet()
        .letters_below(max_explicit_letter(t) + 2)
        .collect()
}

/// Nodes of `t` up to `depth` over the representative letters, in discovery order.
pub fn representative_nodes(t: &RegularTree, depth: usize) -> Vec<Vec<Letter>> {
    let letters = representative_letters(t);
    let mut out = Vec::new();
    if !t.contains(&[]) {
        return out;
    }
    let mut level = vec![Vec::new()];
    out.push(Vec::new());
    for _ in 0..depth {
        let mut next = Vec::new();
        for u in &level {
            for &x in &letters {
                let mut v = u.clone();
                v.push(x);
                if t.contains(&v) {
                    next.push(v);
                }
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Node `u` has infinitely many children: probe a letter above every explicit one.
pub fn is_sigma_node(t: &RegularTree, u: &[Letter]) -> bool {
    if t.alphabet().size().is_some() {
        return false;
    }
    let mut v = u.to_vec();
    v.push(max_explicit_letter(t) + 1);
    t.contains(&v)
}

/// No node to `depth` has infinitely many children.
pub fn bounded_branching_oracle(t: &RegularTree, depth: usize) -> bool {
    let letters = representative_letters(t);
    let mut level = if t.contains(&[]) { vec![Vec::new()] } else { Vec::new() };
    for _ in 0..=depth {
        if level.iter().any(|u| is_sigma_node(t, u)) {
            return false;
        }
        let mut next = Vec::new();
        for u in &level {
            for &x in &letters {
                let mut v: Vec<Letter> = u.clone();
                v.push(x);
                if t.contains(&v) {
                    next.push(v);
                }
            }
        }
        level = next;
    }
    true
}

/// Node-level derivative: `u` stays if it starts a path of `fuel + 1` more
/// letters whose nodes each have a σ-node at most `fuel` letters below.
/// Exact on trees with at most `fuel + 1` states: a longer path repeats a
/// state, and every σ-reaching state sees one within `states - 1` letters.
pub fn derivative_oracle(t: &RegularTree, u: &[Letter], fuel: usize) -> bool {
    let letters = representative_letters(t);
    path(t, &letters, &mut u.to_vec(), fuel + 1, fuel)
}

fn reaches_sigma(t: &RegularTree, letters: &[Letter], u: &mut Vec<Letter>, fuel: usize) -> bool {
    if !t.contains(u) {
        return false;
    }
    if is_sigma_node(t, u) {
        return true;
    }
    fuel > 0
        && letters.iter().any(|&x| {
            u.push(x);
            let hit = reaches_sigma(t, letters, u, fuel - 1);
            u.pop();
            hit
        })
}

fn path(t: &RegularTree, letters: &[Letter], u: &mut Vec<Letter>, steps: usize, fuel: usize) -> bool {
    reaches_sigma(t, letters, u, fuel)
        && (steps == 0
            || letters.iter().any(|&x| {
                u.push(x);
                let ok = path(t, letters, u, steps - 1, fuel);
                u.pop();
                ok
            }))
}

/// Trees of `corpus` on which the state-level derivative and the node-level
/// oracle disagree on some representative node up to `depth`.
pub fn derivative_disagreements(corpus: &[RegularTree], depth: usize, fuel: usize) -> Vec<(usize, Vec<Letter>)> {
    use rayon::prelude::*;
    corpus
        .par_iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let d = baire_core::smallness::derivative(t);
            representative_nodes(t, depth)
                .into_iter()
                .find(|u| d.contains(u) != derivative_oracle(t, u, fuel))
                .map(|u| (i, u))
        })
        .collect()
}

/* Certificates */

/// A random complete prefix code over letters `< cap` with at least two words.
pub fn random_prefix_code(rng: &mut impl Rng, cap: Letter, splits: usize) -> Vec<FinSeq> {
    let mut leaves: Vec<FinSeq> = (0..cap).map(|x| FinSeq::from([x])).collect();
    for _ in 0..splits {
        let i = rng.gen_range(0..leaves.len());
        let w = leaves.swap_remove(i);
        if w.len() < 3 {
            leaves.extend((0..cap).map(|x| w.pushed(x)));
        } else {
            leaves.push(w);
        }
    }
    leaves.sort();
    leaves
}

/// A random B-perfect graph dense for the first `dense_for` conditions of `cs`.
pub fn random_bperfect(rng: &mut impl Rng, cs: &dyn ConditionSet, dense_for: usize) -> BPerfectTree {
    let k = rng.gen_range(1..=4);
    let mut j = BPerfectTree::root_only();
    let ids: Vec<usize> = (0..k).map(|_| j.add_vertex(false)).collect();
    let first = FinSeq((0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..2)).collect());
    j.add_edge(j.root(), first, ids[0]);
    for &v in &ids {
        let splits = rng.gen_range(0..3);
        let labels: Vec<FinSeq> = match cs.kind() {
            CsKind::Ex61 => random_prefix_code(rng, 2, splits),
            CsKind::Ex62 => random_prefix_code(rng, 3, splits),
            _ => {
                let top = dense_for as Letter + rng.gen_range(0..3);
                (0..=top)
                    .map(|x| {
                        let mut s = vec![x];
                        s.extend((0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..4)));
                        FinSeq(s)
                    })
                    .collect()
            }
        };
        for s in labels {
            let c = *ids.choose(rng).unwrap();
            j.add_edge(v, s, c);
        }
    }
    j
}

/// A random non-empty tree that is B-nowhere-dense for the built-in `kind`.
pub fn random_nd_piece(rng: &mut impl Rng, kind: CsKind) -> RegularTree {
    loop {
        let n = rng.gen_range(1..=3);
        let mut edges = Vec::new();
        let alphabet = if kind == CsKind::Ex61 { Alphabet::Finite(2) } else { Alphabet::Omega };
        for src in 0..n {
            match kind {
                CsKind::Ex61 => edges.push((src, ChildSpec::set([rng.gen_range(0..2)]), rng.gen_range(0..n))),
                CsKind::Ex62 => {
                    let mut specs = random_specs(rng, alphabet, n, src, 4, 0.0);
                    if rng.gen_bool(0.3) {
                        specs.push((src, ChildSpec::Above(4), rng.gen_range(0..n)));
                    }
                    edges.extend(specs);
                }
                _ => edges.extend(random_specs(rng, alphabet, n, src, 4, 0.0)),
            }
        }
        if let Ok(t) = RegularTree::new(alphabet, Some(0), edges) {
            if !t.is_empty() {
                return t;
            }
        }
    }
}

/// 1 to 4 exactly certified pieces and their witnesses.
pub fn random_cover(rng: &mut impl Rng, cs: &dyn ConditionSet) -> (Vec<RegularTree>, Vec<Witness>) {
    loop {
        let m = rng.gen_range(1..=4);
        let pieces: Vec<RegularTree> = (0..m).map(|_| random_nd_piece(rng, cs.kind())).collect();
        let ws: Option<Vec<Witness>> = pieces
            .iter()
            .map(|p| is_b_nowhere_dense(p, cs, NdMode::Exact).ok().flatten())
            .collect();
        if let Some(ws) = ws {
            return (pieces, ws);
        }
    }
}

/// A random tree over paired letters `pair(x, xi)` with `x, xi < cap`.
pub fn random_product_payoff(rng: &mut impl Rng, cap: Letter) -> RegularTree {
    loop {
        let n = rng.gen_range(1..=3);
        let mut edges = Vec::new();
        for src in 0..n {
            let mut by_target: Vec<Vec<Letter>> = vec![Vec::new(); n as usize];
            for x in 0..cap {
                for xi in 0..cap {
                    if rng.gen_bool(0.5) {
                        by_target[rng.gen_range(0..n) as usize].push(pair(x, xi));
                    }
                }
            }
            for (t, letters) in by_target.into_iter().enumerate() {
                if !letters.is_empty() {
                    edges.push((src, ChildSpec::set(letters), t as StateId));
                }
            }
        }
        if let Ok(t) = RegularTree::new(Alphabet::Omega, Some(0), edges) {
            if !t.is_empty() {
                return t;
            }
        }
    }
}

/// `x` is a prefix of some `f` with a witness stream keeping the pairs in `c`.
pub fn projection_contains(c: &RegularTree, x: &[Letter]) -> bool {
    let reps = max_explicit_letter(c) + 2;
    fn go(c: &RegularTree, x: &[Letter], pairs: &mut Vec<Letter>, reps: Letter) -> bool {
        if pairs.len() == x.len() {
            return true;
        }
        for xi in 0..reps {
            pairs.push(pair(x[pairs.len()], xi));
            let ok = c.contains(pairs) && go(c, x, pairs, reps);
            pairs.pop();
            if ok {
                return true;
            }
        }
        false
    }
    go(c, x, &mut Vec::new(), reps)
}

/* Games */

/// Every block of length `1..=move_len_cap` over `letters`, plus witness letters below `xi_cap` when given.
pub fn all_blocks(letters: &[Letter], move_len_cap: usize, xi_cap: Option<Letter>) -> Vec<IMove> {
    let mut seqs: Vec<Vec<Letter>> = Vec::new();
    let mut level: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..move_len_cap {
        level = level
            .iter()
            .flat_map(|s| letters.iter().map(move |&x| {
                let mut t = s.clone();
                t.push(x);
                t
            }))
            .collect();
        seqs.extend(level.iter().cloned());
    }
    let mut out = Vec::new();
    for s in seqs {
        match xi_cap {
            None => out.push(IMove {
                xi: None,
                u: FinSeq(s),
            }),
            Some(cap) => out.extend((0..cap).map(|xi| IMove {
                xi: Some(xi),
                u: FinSeq(s.clone()),
            })),
        }
    }
    out
}

fn blocks_for(cfg: &GameConfig) -> Vec<IMove> {
    let letters: Vec<Letter> = (0..cfg.letter_cap).filter(|x| cfg.cs.alphabet().contains(*x)).collect();
    all_blocks(&letters, cfg.move_len_cap, cfg.witness_payoff.as_ref().map(|_| cfg.letter_cap))
}

/// I survives block `k` (0-based) of a play whose blocks so far are `blocks`.
pub fn survives(cfg: &GameConfig, blocks: &[IMove], b: Option<&Condition>) -> bool {
    let last = blocks.last().unwrap();
    if b.is_some_and(|b| !cfg.cs.holds(last.u.letters(), b)) {
        return false;
    }
    let f: Vec<Letter> = blocks.iter().flat_map(|m| m.u.0.iter().copied()).collect();
    match &cfg.witness_payoff {
        None => cfg.payoff.contains(&f),
        Some(c) => {
            let k = blocks.len() - 1;
            let pairs: Vec<Letter> = (0..k.min(f.len()))
                .map(|j| pair(f[j], blocks[j].xi.unwrap()))
                .collect();
            c.contains(&pairs)
        }
    }
}

/// Plain minimax over the explicit finite game tree, no memoization.
pub fn minimax_i_wins(cfg: &GameConfig) -> bool {
    let blocks = blocks_for(cfg);
    let conds = cfg.cs.enumerate(cfg.cond_limit);
    fn i_turn(cfg: &GameConfig, blocks: &[IMove], conds: &[Condition], played: &mut Vec<IMove>, b: Option<&Condition>) -> bool {
        for m in blocks {
            played.push(m.clone());
            let ok = survives(cfg, played, b) && (played.len() > cfg.horizon || ii_turn(cfg, blocks, conds, played));
            played.pop();
            if ok {
                return true;
            }
        }
        false
    }
    fn ii_turn(cfg: &GameConfig, blocks: &[IMove], conds: &[Condition], played: &mut Vec<IMove>) -> bool {
        conds.iter().all(|b| i_turn(cfg, blocks, conds, played, Some(b)))
    }
    i_turn(cfg, &blocks, &conds, &mut Vec::new(), None)
}

/// A play against which `strat` does not win, searching every opponent
/// move within the config's finite move sets. `Ok(None)`: `strat` wins all.
pub fn refute_strategy(cfg: &GameConfig, strat: &dyn Strategy) -> baire_core::Result<Option<PlayHistory>> {
    let blocks = blocks_for(cfg);
    let conds = cfg.cs.enumerate(cfg.cond_limit);
    let mut played = Vec::new();
    refute(cfg, strat, &blocks, &conds, &mut PlayHistory::new(), &mut played, None)
}

fn refute(
    cfg: &GameConfig,
    strat: &dyn Strategy,
    blocks: &[IMove],
    conds: &[Condition],
    h: &mut PlayHistory,
    played: &mut Vec<IMove>,
    b: Option<Condition>,
) -> baire_core::Result<Option<PlayHistory>> {
    match strat.side() {
        Side::I => {
            let Move::I(m) = strat.next_move(h)? else {
                return Ok(Some(h.clone()));
            };
            if !blocks.contains(&m) {
                return Ok(Some(h.pushed(Move::I(m))));
            }
            played.push(m.clone());
            h.moves.push(Move::I(m));
            let result = if !survives(cfg, played, b.as_ref()) {
                Some(h.clone())
            } else if played.len() > cfg.horizon {
                None
            } else {
                let mut found = None;
                for c in conds {
                    h.moves.push(Move::II(c.clone()));
                    found = refute(cfg, strat, blocks, conds, h, played, Some(c.clone()))?;
                    h.moves.pop();
                    if found.is_some() {
                        break;
                    }
                }
                found
            };
            h.moves.pop();
            played.pop();
            Ok(result)
        }
        Side::II => {
            for m in blocks {
                played.push(m.clone());
                h.moves.push(Move::I(m.clone()));
                let result = if !survives(cfg, played, b.as_ref()) {
                    None
                } else if played.len() > cfg.horizon {
                    Some(h.clone())
                } else {
                    match strat.next_move(h)? {
                        Move::II(c) if cfg.cs.is_valid(&c) => {
                            h.moves.push(Move::II(c.clone()));
                            let r = refute(cfg, strat, blocks, conds, h, played, Some(c))?;
                            h.moves.pop();
                            r
                        }
                        _ => Some(h.clone()),
                    }
                };
                h.moves.pop();
                played.pop();
                if result.is_some() {
                    return Ok(result);
                }
            }
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_on_known_trees() {
        let zero = RegularTree::constant_branch(Alphabet::Omega, 0).unwrap();
        let full = RegularTree::full(Alphabet::Omega);
        assert!(bounded_branching_oracle(&zero, 8));
        assert!(!bounded_branching_oracle(&full, 8));
        assert!(!derivative_oracle(&zero, &[], 3));
        assert!(derivative_oracle(&full, &[0, 1], 3));
    }

    #[test]
    fn prefix_codes_are_complete_antichains() {
        let mut r = rng(3);
        for _ in 0..20 {
            let code = random_prefix_code(&mut r, 3, 4);
            for (i, a) in code.iter().enumerate() {
                for b in &code[i + 1..] {
                    assert!(!a.compatible(b));
                }
            }
            let weight: f64 = code.iter().map(|w| 3f64.powi(-(w.len() as i32))).sum();
            assert!((weight - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_of_full_product_is_everything() {
        let full = RegularTree::full(Alphabet::Omega);
        assert!(projection_contains(&full, &[3, 1, 4]));
        let only_zero_pairs = RegularTree::new(Alphabet::Omega, Some(0), [(0, ChildSpec::set([pair(0, 0), pair(1, 2)]), 0)]).unwrap();
        assert!(projection_contains(&only_zero_pairs, &[0, 1, 0]));
        assert!(!projection_contains(&only_zero_pairs, &[2]));
    }
}

pub mod criteria;
