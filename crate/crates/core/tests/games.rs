use baire_core::games::{
    play, solve_finite, strategy_i_from_bperfect, strategy_to_bperfect, strategy_to_cover, CoverBudgetSpec, ExploreBudget, GameConfig, Side,
};
use baire_core::smallness::{bperfect_prefix_member, find_witness_counterexample, validate_bperfect, NdBudget};
use baire_core::tree::{FinSeq, RegularTree};
use baire_testkit::criteria::{bperfect_corpus, j_budget, DENSE_FOR};
use baire_testkit::{canonical_sets, tree_corpus};

#[test]
fn explored_bperfect_stays_inside_the_source() {
    for cs in canonical_sets() {
        for (k, j0) in bperfect_corpus(cs.as_ref(), 99, 10).into_iter().enumerate() {
            let s = strategy_i_from_bperfect(j0.clone(), cs.clone());
            let budget = ExploreBudget {
                rounds: 2,
                cond_limit: DENSE_FOR,
            };
            let j = strategy_to_bperfect(&s, cs.as_ref(), budget).unwrap();
            for t in j.tuples(3) {
                let flat = FinSeq(t.iter().flat_map(|s| s.0.clone()).collect());
                assert!(bperfect_prefix_member(&j0, &flat).is_some(), "{} tree {k}: {flat}", cs.name());
            }
            let mut jb = j_budget();
            jb.cond_limit = DENSE_FOR;
            let report = validate_bperfect(&j, cs.as_ref(), jb);
            assert!(report.is_empty(), "{} tree {k}: {:?}", cs.name(), report.findings);
        }
    }
}

#[test]
fn solver_wins_for_ii_yield_certified_covers() {
    let mut covers = 0;
    for cs in canonical_sets() {
        for t in tree_corpus(404, 12) {
            let cfg = GameConfig::new(cs.clone(), t.clone(), 2).with_caps(1, 3, 3);
            let sol = solve_finite(&cfg).unwrap();
            if sol.winner != Side::II {
                continue;
            }
            covers += 1;
            let d = 3;
            let pieces = strategy_to_cover(&sol.strategy, &cfg, CoverBudgetSpec { prefix_depth: d }).unwrap();
            // Witnesses only speak for continuations inside the truncation depth.
            for p in &pieces {
                for nd in 0..p.depth {
                    let budget = NdBudget {
                        node_depth: nd,
                        cond_limit: 3,
                        ext_depth: p.depth - nd,
                        letter_cap: 3,
                    };
                    let bad = find_witness_counterexample(&p.tree, cs.as_ref(), &p.witness, budget);
                    assert!(bad.is_none(), "{}: {bad:?}\n{}", cs.name(), p.tree.to_text());
                }
            }
            let letters = cfg.letters();
            for u in t.enumerate_nodes(d, Some(2)).unwrap().into_iter().filter(|u| !u.is_empty() && playable(&t, u.letters(), &letters, d + t.state_count())) {
                assert!(pieces.iter().any(|p| p.tree.contains(u.letters())), "{}: {u} uncovered\n{}", cs.name(), t.to_text());
            }
        }
    }
    assert!(covers > 5, "{covers}");
}

/// `u` extends to length `len` inside `t` using only `letters`.
fn playable(t: &RegularTree, u: &[u32], letters: &[u32], len: usize) -> bool {
    if !u.iter().all(|x| letters.contains(x)) || !t.contains(u) {
        return false;
    }
    u.len() >= len
        || letters.iter().any(|&x| {
            let mut v = u.to_vec();
            v.push(x);
            playable(t, &v, letters, len)
        })
}

#[test]
fn solver_strategies_replay_their_value() {
    for cs in canonical_sets() {
        for t in tree_corpus(505, 10) {
            let cfg = GameConfig::new(cs.clone(), t, 2).with_caps(2, 3, 3);
            let sol = solve_finite(&cfg).unwrap();
            let (_, v) = play(&cfg, &sol.other, &sol.strategy)
                .or_else(|_| play(&cfg, &sol.strategy, &sol.other))
                .unwrap();
            let (i, ii) = match sol.winner {
                Side::I => (&sol.strategy, &sol.other),
                Side::II => (&sol.other, &sol.strategy),
            };
            let (_, v2) = play(&cfg, i, ii).unwrap();
            assert_eq!(v2.ii_wins(), sol.winner == Side::II, "{v} / {v2}");
        }
    }
}

#[test]
fn empty_payoff_is_rejected() {
    let cs = canonical_sets().remove(2);
    let cfg = GameConfig::new(cs.clone(), RegularTree::empty(cs.alphabet()), 2);
    assert!(solve_finite(&cfg).is_err());
}
