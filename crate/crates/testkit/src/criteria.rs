//! Runners for the game-level properties, parameterized so the acceptance
//! harness and the integration tests can share them at different scales.

use std::collections::BTreeSet;
use std::sync::Mutex;

use baire_core::conditions::{Condition, ConditionSet, CsKind, SharedCs};
use baire_core::games::{
    fn_strategy, play, random_strategy, solve_finite, strategy_i_from_bperfect, strategy_ii_from_cover, CoverStrategy, GameConfig, Move,
    PlayHistory, Side, Strategy, Verdict,
};
use baire_core::smallness::{validate_bperfect, BPerfectTree, JBudget};
use baire_core::tree::{Alphabet, FinSeq, RegularTree};
use rayon::prelude::*;

use crate::{all_blocks, minimax_i_wins, projection_contains, random_bperfect, random_cover, random_product_payoff, refute_strategy, rng, survives};

/// Conditions that B-perfect trees are generated and checked against.
pub const DENSE_FOR: usize = 5;

pub fn j_budget() -> JBudget {
    JBudget {
        cond_limit: DENSE_FOR,
        ext_depth: 3,
        letter_cap: 4,
    }
}

/// Validated B-perfect trees for `cs`, drawn from `seed`.
pub fn bperfect_corpus(cs: &dyn ConditionSet, seed: u64, count: usize) -> Vec<BPerfectTree> {
    let mut r = rng(seed);
    (0..count).map(|_| random_bperfect(&mut r, cs, DENSE_FOR)).collect()
}

fn full_payoff(cs: &dyn ConditionSet) -> RegularTree {
    RegularTree::full(cs.alphabet())
}

/// I plays blocks up to this long and letters below 64 when following a B-perfect tree.
fn roomy(cs: &SharedCs, payoff: RegularTree, horizon: usize) -> GameConfig {
    GameConfig::new(cs.clone(), payoff, horizon).with_caps(10_000, 64, DENSE_FOR)
}

fn scripted_ii(seq: Vec<Condition>) -> impl Strategy {
    struct Scripted(Vec<Condition>);
    impl Strategy for Scripted {
        fn side(&self) -> Side {
            Side::II
        }
        fn next_move(&self, h: &PlayHistory) -> baire_core::Result<Move> {
            Ok(Move::II(self.0[h.round() - 1].clone()))
        }
    }
    Scripted(seq)
}

fn tuples(conds: &[Condition], len: usize) -> Vec<Vec<Condition>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                conds.iter().map(move |c| {
                    let mut t = t.clone();
                    t.push(c.clone());
                    t
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessI {
    pub trees: usize,
    pub invalid_trees: usize,
    pub plays: usize,
    /// Plays II won or the strategy faulted on, as `tree#: verdict`.
    pub failures: Vec<String>,
    /// Moves whose reduction chain exceeded the condition's rank.
    pub long_chains: usize,
}

/// I's strategies from generated B-perfect trees against every condition
/// sequence of length `exhaustive_len` over the first five conditions and
/// `random_plays` random sequences of length `random_horizon`.
pub fn soundness_i(cs: &SharedCs, seed: u64, count: usize, exhaustive_len: usize, random_plays: usize, random_horizon: usize) -> SoundnessI {
    let conds = cs.enumerate(DENSE_FOR);
    let scripts = tuples(&conds, exhaustive_len);
    let corpus = bperfect_corpus(cs.as_ref(), seed, count);
    let per_tree: Vec<SoundnessI> = corpus
        .par_iter()
        .enumerate()
        .map(|(ti, j)| {
            let mut rep = SoundnessI {
                trees: 1,
                ..Default::default()
            };
            if !validate_bperfect(j, cs.as_ref(), j_budget()).is_empty() {
                rep.invalid_trees = 1;
            }
            let s = strategy_i_from_bperfect(j.clone(), cs.clone());
            let record = |h: &PlayHistory, v: Result<Verdict, baire_core::Error>, rep: &mut SoundnessI| {
                rep.plays += 1;
                match v {
                    Ok(Verdict::IAliveAtHorizon) => {}
                    Ok(v) => rep.failures.push(format!("tree {ti}: {v}")),
                    Err(e) => rep.failures.push(format!("tree {ti}: {e}")),
                }
                if cs.kind() == CsKind::Ex62 {
                    let mut prefix = PlayHistory::new();
                    for m in &h.moves {
                        prefix.moves.push(m.clone());
                        if let Move::II(b) = m {
                            if s.choose(&prefix).is_ok_and(|c| c.chain > cs.rank(b)) {
                                rep.long_chains += 1;
                            }
                        }
                    }
                }
            };
            let cfg = roomy(cs, full_payoff(cs.as_ref()), exhaustive_len);
            for script in &scripts {
                match play(&cfg, &s, &scripted_ii(script.clone())) {
                    Ok((h, v)) => record(&h, Ok(v), &mut rep),
                    Err(e) => record(&PlayHistory::new(), Err(e), &mut rep),
                }
            }
            let cfg = roomy(cs, full_payoff(cs.as_ref()), random_horizon);
            for k in 0..random_plays {
                let ii = random_strategy(Side::II, seed ^ ((ti as u64) << 20) ^ k as u64, &cfg);
                match play(&cfg, &s, &ii) {
                    Ok((h, v)) => record(&h, Ok(v), &mut rep),
                    Err(e) => record(&PlayHistory::new(), Err(e), &mut rep),
                }
            }
            rep
        })
        .collect();
    per_tree.into_iter().fold(SoundnessI::default(), |mut a, r| {
        a.trees += r.trees;
        a.invalid_trees += r.invalid_trees;
        a.plays += r.plays;
        a.failures.extend(r.failures);
        a.long_chains += r.long_chains;
        a
    })
}

pub struct Cover {
    pub pieces: Vec<RegularTree>,
    pub payoff: RegularTree,
    pub strategy: CoverStrategy,
}

pub fn cover_corpus(cs: &SharedCs, seed: u64, count: usize) -> Vec<Cover> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let (pieces, ws) = random_cover(&mut r, cs.as_ref());
            let alphabet = pieces[0].alphabet();
            let payoff = RegularTree::union(alphabet, &pieces).expect("pieces share the alphabet");
            let strategy = strategy_ii_from_cover(pieces.clone(), ws, cs.clone()).unwrap();
            Cover { pieces, payoff, strategy }
        })
        .collect()
}

/// Distinct pieces II engaged before each of its moves.
pub fn engaged_pieces(s: &CoverStrategy, h: &PlayHistory) -> usize {
    let mut seen = BTreeSet::new();
    let mut prefix = Vec::new();
    for m in &h.moves {
        match m {
            Move::I(x) => prefix.extend_from_slice(x.u.letters()),
            Move::II(_) => {
                if let Some(i) = s.engaged(&FinSeq(prefix.clone())) {
                    seen.insert(i);
                }
            }
        }
    }
    seen.len()
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessII {
    pub covers: usize,
    pub exhaustive_plays: usize,
    pub random_plays: usize,
    pub failures: Vec<String>,
}

/// II's cover strategies against every I-block sequence within the caps and
/// against `random_plays` compliant random I strategies.
pub fn soundness_ii(cs: &SharedCs, seed: u64, count: usize, horizon: usize, random_plays: usize) -> SoundnessII {
    let covers = cover_corpus(cs, seed, count);
    let per: Vec<SoundnessII> = covers
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut rep = SoundnessII {
                covers: 1,
                ..Default::default()
            };
            let cfg = GameConfig::new(cs.clone(), c.payoff.clone(), horizon).with_caps(2, 4, DENSE_FOR);
            let letters = cfg.letters();
            let blocks = all_blocks(&letters, 2, None);
            let mut stack = vec![PlayHistory::new()];
            while let Some(h) = stack.pop() {
                for m in &blocks {
                    let hm = h.pushed(Move::I(m.clone()));
                    let played: Vec<_> = hm.i_moves().cloned().collect();
                    let round = played.len() - 1;
                    if !survives(&cfg, &played, h.pending_condition()) {
                        rep.exhaustive_plays += 1;
                        let engaged = engaged_pieces(&c.strategy, &hm);
                        if round > engaged {
                            rep.failures.push(format!("cover {ci}: won at round {round} with {engaged} engaged"));
                        }
                        continue;
                    }
                    if round == horizon {
                        rep.exhaustive_plays += 1;
                        rep.failures.push(format!("cover {ci}: I survived {}", hm.prefix()));
                        continue;
                    }
                    match c.strategy.next_move(&hm) {
                        Ok(b) => stack.push(hm.pushed(b)),
                        Err(e) => rep.failures.push(format!("cover {ci}: {e}")),
                    }
                }
            }
            for k in 0..random_plays {
                let i = random_strategy(Side::I, seed ^ ((ci as u64) << 20) ^ k as u64, &cfg).compliant();
                rep.random_plays += 1;
                match play(&cfg, &i, &c.strategy) {
                    Ok((h, v)) => match v.ii_round() {
                        Some(r) if r <= engaged_pieces(&c.strategy, &h) => {}
                        _ => rep.failures.push(format!("cover {ci}: {v}")),
                    },
                    Err(e) => rep.failures.push(format!("cover {ci}: {e}")),
                }
            }
            rep
        })
        .collect();
    per.into_iter().fold(SoundnessII::default(), |mut a, r| {
        a.covers += r.covers;
        a.exhaustive_plays += r.exhaustive_plays;
        a.random_plays += r.random_plays;
        a.failures.extend(r.failures);
        a
    })
}

/// Every small config over the corpus: letter cap, block length, condition count, horizon.
pub fn solver_grid() -> Vec<(u32, usize, usize, usize)> {
    let mut out = Vec::new();
    for letter_cap in 1..=3 {
        for move_len in 1..=2 {
            for cond_limit in 1..=3 {
                for horizon in 1..=3 {
                    out.push((letter_cap, move_len, cond_limit, horizon));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct SolverCheck {
    pub configs: usize,
    pub i_wins: usize,
    pub failures: Vec<String>,
}

/// Solver winner against plain minimax, and the winner's strategy against
/// every counter-play, for each canonical set, corpus tree and grid point.
pub fn solver_cross_check(sets: &[SharedCs], corpus: &[RegularTree]) -> SolverCheck {
    let mut jobs = Vec::new();
    for cs in sets {
        for (ti, t) in corpus.iter().enumerate() {
            for g in solver_grid() {
                jobs.push((cs.clone(), ti, t, g));
            }
        }
    }
    let per: Vec<SolverCheck> = jobs
        .par_iter()
        .map(|(cs, ti, t, (lc, ml, cl, hz))| {
            let mut rep = SolverCheck {
                configs: 1,
                ..Default::default()
            };
            let cfg = GameConfig::new(cs.clone(), (*t).clone(), *hz).with_caps(*ml, *lc, *cl);
            let tag = format!("{} tree {ti} caps ({lc},{ml},{cl},{hz})", cs.name());
            match solve_finite(&cfg) {
                Err(e) => rep.failures.push(format!("{tag}: {e}")),
                Ok(sol) => {
                    let i_wins = minimax_i_wins(&cfg);
                    if i_wins {
                        rep.i_wins = 1;
                    }
                    if (sol.winner == Side::I) != i_wins {
                        rep.failures.push(format!("{tag}: solver says {} minimax disagrees", sol.winner));
                    }
                    match refute_strategy(&cfg, &sol.strategy) {
                        Ok(None) => {}
                        Ok(Some(h)) => rep.failures.push(format!("{tag}: winner's strategy loses after {} moves", h.len())),
                        Err(e) => rep.failures.push(format!("{tag}: {e}")),
                    }
                }
            }
            rep
        })
        .collect();
    per.into_iter().fold(SolverCheck::default(), |mut a, r| {
        a.configs += r.configs;
        a.i_wins += r.i_wins;
        a.failures.extend(r.failures);
        a
    })
}

/// Records the conditions a II-strategy plays.
pub struct Recording<'a> {
    inner: &'a dyn Strategy,
    pub seen: Mutex<BTreeSet<Condition>>,
}

impl<'a> Recording<'a> {
    pub fn new(inner: &'a dyn Strategy) -> Self {
        Recording {
            inner,
            seen: Mutex::new(BTreeSet::new()),
        }
    }
}

impl Strategy for Recording<'_> {
    fn side(&self) -> Side {
        self.inner.side()
    }
    fn next_move(&self, h: &PlayHistory) -> baire_core::Result<Move> {
        let m = self.inner.next_move(h)?;
        if let Move::II(b) = &m {
            self.seen.lock().unwrap().insert(b.clone());
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Default)]
pub struct CertificateAgreement {
    /// Certificates whose strategy wins the small finite game outright.
    pub feasible: usize,
    pub failures: Vec<String>,
}

/// Whenever a B-perfect or cover strategy wins a small finite game using
/// only moves the solver also considers, the solver must name the same winner.
pub fn solver_agrees_with_certificates(cs: &SharedCs, seed: u64, count: usize) -> CertificateAgreement {
    let mut rep = CertificateAgreement::default();
    let (lc, ml, cl, hz) = (3, 2, 3, 3);
    for (k, j) in bperfect_corpus(cs.as_ref(), seed, count).into_iter().enumerate() {
        let cfg = GameConfig::new(cs.clone(), full_payoff(cs.as_ref()), hz).with_caps(ml, lc, cl);
        let s = strategy_i_from_bperfect(j, cs.clone());
        if let Ok(None) = refute_strategy(&cfg, &s) {
            rep.feasible += 1;
            match solve_finite(&cfg) {
                Ok(sol) if sol.winner == Side::I => {}
                Ok(_) => rep.failures.push(format!("tree {k}: solver says II")),
                Err(e) => rep.failures.push(format!("tree {k}: {e}")),
            }
        }
    }
    for (k, c) in cover_corpus(cs, seed, count).into_iter().enumerate() {
        let cfg = GameConfig::new(cs.clone(), c.payoff.clone(), hz).with_caps(ml, lc, cl);
        let rec = Recording::new(&c.strategy);
        let allowed: BTreeSet<Condition> = cs.enumerate(cl).into_iter().collect();
        if let Ok(None) = refute_strategy(&cfg, &rec) {
            if rec.seen.lock().unwrap().is_subset(&allowed) {
                rep.feasible += 1;
                match solve_finite(&cfg) {
                    Ok(sol) if sol.winner == Side::II => {}
                    Ok(_) => rep.failures.push(format!("cover {k}: solver says I")),
                    Err(e) => rep.failures.push(format!("cover {k}: {e}")),
                }
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Default)]
pub struct ProjectionBridge {
    pub seeds_scanned: u64,
    pub payoffs: usize,
    pub plays: usize,
    pub failures: Vec<String>,
}

/// Scans seeds for product payoffs where the witness-game solver hands I a
/// win, then replays that strategy against every condition sequence and
/// checks the stripped play against the brute-force projection to `depth`.
pub fn projection_bridge(cs: &SharedCs, wanted: usize, depth: usize, max_seeds: u64) -> ProjectionBridge {
    let mut rep = ProjectionBridge::default();
    let horizon = depth;
    let conds = cs.enumerate(2);
    for seed in 0..max_seeds {
        if rep.payoffs == wanted {
            break;
        }
        rep.seeds_scanned += 1;
        let c = random_product_payoff(&mut rng(seed), 2);
        let cfg = GameConfig::new(cs.clone(), RegularTree::full(Alphabet::Omega), horizon)
            .with_caps(2, 2, 2)
            .with_witness_payoff(c.clone());
        let sol = match solve_finite(&cfg) {
            Ok(s) => s,
            Err(e) => {
                rep.failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        if sol.winner != Side::I {
            continue;
        }
        rep.payoffs += 1;
        for script in tuples(&conds, horizon) {
            rep.plays += 1;
            match play(&cfg, &sol.strategy, &scripted_ii(script)) {
                Ok((h, Verdict::IAliveAtHorizon)) => {
                    let f = h.stripped().prefix();
                    let x = &f.letters()[..depth.min(f.len())];
                    if !projection_contains(&c, x) {
                        rep.failures.push(format!("seed {seed}: {} outside the projection", FinSeq(x.to_vec())));
                    }
                }
                Ok((_, v)) => rep.failures.push(format!("seed {seed}: winning strategy lost: {v}")),
                Err(e) => rep.failures.push(format!("seed {seed}: {e}")),
            }
        }
    }
    rep
}

/// Cross-plays B-perfect strategies against cover strategies on the cover's
/// payoff; a surviving I would contradict one of the two certificates.
pub fn mutual_exclusion(cs: &SharedCs, seed: u64, count: usize) -> (usize, Vec<String>) {
    let js = bperfect_corpus(cs.as_ref(), seed, count);
    let covers = cover_corpus(cs, seed ^ 0x5eed, count);
    let allowed: BTreeSet<Condition> = cs.enumerate(DENSE_FOR).into_iter().collect();
    let mut bad = Vec::new();
    let mut checked = 0;
    for (a, j) in js.iter().enumerate() {
        let s = strategy_i_from_bperfect(j.clone(), cs.clone());
        for (b, c) in covers.iter().enumerate() {
            let cfg = roomy(cs, c.payoff.clone(), 4);
            let rec = Recording::new(&c.strategy);
            let outcome = play(&cfg, &s, &rec);
            // The tree is only known dense for the first few conditions.
            if !rec.seen.lock().unwrap().is_subset(&allowed) {
                continue;
            }
            checked += 1;
            match outcome {
                Ok((_, v)) if v.ii_wins() => {}
                Ok((_, v)) => bad.push(format!("tree {a} vs cover {b}: {v}")),
                Err(e) => bad.push(format!("tree {a} vs cover {b}: {e}")),
            }
        }
    }
    (checked, bad)
}

/// A strategy for I that always plays `block`, for ad-hoc checks.
pub fn constant_block(block: FinSeq) -> impl Strategy {
    let f = fn_strategy(Side::I, move |_| Ok(Move::I(baire_core::games::IMove::plain(block.clone()))));
    struct Wrap(baire_core::games::SharedStrategy);
    impl Strategy for Wrap {
        fn side(&self) -> Side {
            self.0.side()
        }
        fn next_move(&self, h: &PlayHistory) -> baire_core::Result<Move> {
            self.0.next_move(h)
        }
    }
    Wrap(f)
}
