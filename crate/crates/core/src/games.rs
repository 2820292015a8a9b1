//! Generalized Banach–Mazur games: I plays non-empty blocks, II answers with
//! conditions the next block must satisfy. Includes the engine, strategies,
//! synthesis in both directions and a finite-horizon solver.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::{Condition, ConditionSet, SharedCs};
use crate::error::{input, Error, Result};
use crate::smallness::{state_witness_holds, BPerfectTree, Witness};
use crate::tree::{Alphabet, ChildSpec, FinSeq, Letter, RegularTree, StateId};

pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

/// Reads `BAIRE_GAMES_NODE_BUDGET`, falling back to [`DEFAULT_NODE_BUDGET`].
pub fn node_budget_from_env() -> usize {
    std::env::var("BAIRE_GAMES_NODE_BUDGET")
        .ok()
        .and_then(|v| v.trim().replace('_', "").parse().ok())
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

/// Cantor pairing of a sequence letter with a witness letter.
pub fn pair(x: Letter, xi: Letter) -> Letter {
    let s = x as u64 + xi as u64;
    (s * (s + 1) / 2 + xi as u64) as Letter
}

pub fn unpair(z: Letter) -> (Letter, Letter) {
    let z = z as u64;
    let mut s = (((8 * z + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while (s + 1) * (s + 2) / 2 <= z {
        s += 1;
    }
    while s * (s + 1) / 2 > z {
        s -= 1;
    }
    let xi = z - s * (s + 1) / 2;
    ((s - xi) as Letter, xi as Letter)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    I,
    II,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::I => "I",
            Side::II => "II",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IMove {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Letter>,
    pub u: FinSeq,
}

impl IMove {
    pub fn plain(u: impl Into<FinSeq>) -> Self {
        IMove { xi: None, u: u.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    I(IMove),
    II(Condition),
}

impl Move {
    pub fn side(&self) -> Side {
        match self {
            Move::I(_) => Side::I,
            Move::II(_) => Side::II,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::I(m) => {
                f.write_str("I: ")?;
                if let Some(xi) = m.xi {
                    write!(f, "xi={xi} ")?;
                }
                f.write_str(&m.u.comma_list())
            }
            Move::II(b) => write!(f, "II: b={b}"),
        }
    }
}

/// Alternating moves, starting with I.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayHistory {
    pub moves: Vec<Move>,
}

impl PlayHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a history from I-blocks and conditions, interleaved.
    pub fn from_parts(blocks: &[IMove], conds: &[Condition]) -> Result<Self> {
        if conds.len() + 1 < blocks.len() || conds.len() > blocks.len() {
            return input("blocks and conditions do not alternate");
        }
        let mut moves = Vec::new();
        for (i, m) in blocks.iter().enumerate() {
            if i > 0 {
                moves.push(Move::II(conds[i - 1].clone()));
            }
            moves.push(Move::I(m.clone()));
        }
        if conds.len() == blocks.len() && !conds.is_empty() {
            moves.push(Move::II(conds[conds.len() - 1].clone()));
        }
        Ok(PlayHistory { moves })
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn to_move(&self) -> Side {
        if self.moves.len().is_multiple_of(2) {
            Side::I
        } else {
            Side::II
        }
    }

    pub fn pushed(&self, m: Move) -> Self {
        let mut h = self.clone();
        h.moves.push(m);
        h
    }

    pub fn i_moves(&self) -> impl Iterator<Item = &IMove> {
        self.moves.iter().filter_map(|m| match m {
            Move::I(x) => Some(x),
            Move::II(_) => None,
        })
    }

    pub fn conditions(&self) -> impl Iterator<Item = &Condition> {
        self.moves.iter().filter_map(|m| match m {
            Move::II(b) => Some(b),
            Move::I(_) => None,
        })
    }

    /// Index of the next (or current) I-block.
    pub fn round(&self) -> usize {
        self.moves.len().div_ceil(2)
    }

    /// The condition I must satisfy next, if any.
    pub fn pending_condition(&self) -> Option<&Condition> {
        match self.moves.last() {
            Some(Move::II(b)) => Some(b),
            _ => None,
        }
    }

    /// Concatenation of I's blocks.
    pub fn prefix(&self) -> FinSeq {
        FinSeq(self.i_moves().flat_map(|m| m.u.0.iter().copied()).collect())
    }

    /// The same play with witness letters removed.
    pub fn stripped(&self) -> Self {
        PlayHistory {
            moves: self
                .moves
                .iter()
                .map(|m| match m {
                    Move::I(x) => Move::I(IMove::plain(x.u.clone())),
                    other => other.clone(),
                })
                .collect(),
        }
    }

    fn stable_hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for line in self.moves.iter().map(|m| m.to_string()) {
            for b in line.bytes().chain(*b"\n") {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

/// A finite game: conditions from `cs`, payoff `[payoff]`, I-blocks `u_0..u_horizon`.
#[derive(Clone, Debug)]
pub struct GameConfig {
    pub cs: SharedCs,
    pub payoff: RegularTree,
    /// Number of condition rounds; I plays `horizon + 1` blocks.
    pub horizon: usize,
    pub move_len_cap: usize,
    /// I's letters (and witness letters) are `< letter_cap`.
    pub letter_cap: u32,
    /// II's conditions for the solver and random strategies.
    pub cond_limit: usize,
    /// Tree over paired letters; its presence switches on witness mode.
    pub witness_payoff: Option<RegularTree>,
}

impl GameConfig {
    pub fn new(cs: SharedCs, payoff: RegularTree, horizon: usize) -> Self {
        GameConfig {
            cs,
            payoff,
            horizon,
            move_len_cap: 2,
            letter_cap: 4,
            cond_limit: 4,
            witness_payoff: None,
        }
    }

    pub fn with_caps(mut self, move_len_cap: usize, letter_cap: u32, cond_limit: usize) -> Self {
        self.move_len_cap = move_len_cap;
        self.letter_cap = letter_cap;
        self.cond_limit = cond_limit;
        self
    }

    pub fn with_witness_payoff(mut self, c: RegularTree) -> Self {
        self.witness_payoff = Some(c);
        self
    }

    pub fn witness_mode(&self) -> bool {
        self.witness_payoff.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return input("horizon must be at least 1");
        }
        if self.move_len_cap < 1 || self.letter_cap < 1 || self.cond_limit < 1 {
            return input("caps must be at least 1");
        }
        if self.witness_mode() {
            if self.witness_payoff.as_ref().is_some_and(|c| c.is_empty()) {
                return input("witness payoff tree is empty");
            }
        } else if self.payoff.is_empty() {
            return input("payoff tree is empty");
        }
        Ok(())
    }

    /// I's letters: below the cap and inside the condition set's alphabet.
    pub fn letters(&self) -> Vec<Letter> {
        self.cs.alphabet().letters_below(self.letter_cap).collect()
    }

    pub fn conditions(&self) -> Vec<Condition> {
        self.cs.enumerate(self.cond_limit)
    }

    /// Every legal I-block within the caps, length-then-lex.
    pub fn i_moves(&self) -> Vec<IMove> {
        let letters = self.letters();
        let mut blocks = Vec::new();
        let mut level = vec![Vec::new()];
        for _ in 0..self.move_len_cap {
            let mut next = Vec::new();
            for s in &level {
                for &x in &letters {
                    let mut t: Vec<Letter> = s.clone();
                    t.push(x);
                    blocks.push(FinSeq(t.clone()));
                    next.push(t);
                }
            }
            level = next;
        }
        if self.witness_mode() {
            blocks
                .into_iter()
                .flat_map(|u| {
                    (0..self.letter_cap).map(move |xi| IMove {
                        xi: Some(xi),
                        u: u.clone(),
                    })
                })
                .collect()
        } else {
            blocks.into_iter().map(|u| IMove { xi: None, u }).collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Reason {
    /// `prefix` is the shortest prefix of the play outside the payoff
    /// (in witness mode: of the paired stream outside the witness payoff).
    LeftPayoff { prefix: FinSeq },
    ConditionViolated { i: usize, u: FinSeq, b: Condition },
    /// I returned an illegal block.
    Fault { detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    #[serde(rename = "II_wins_at")]
    IIWinsAt { round: usize, reason: Reason },
    /// Provisional: nothing went wrong up to the horizon.
    #[serde(rename = "I_alive_at_horizon")]
    IAliveAtHorizon,
    /// II returned an illegal condition.
    #[serde(rename = "I_wins_by_fault")]
    IWinsByFault { round: usize, detail: String },
}

impl Verdict {
    pub fn ii_wins(&self) -> bool {
        matches!(self, Verdict::IIWinsAt { .. })
    }

    pub fn ii_round(&self) -> Option<usize> {
        match self {
            Verdict::IIWinsAt { round, .. } => Some(*round),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::IIWinsAt { round, reason } => match reason {
                Reason::LeftPayoff { prefix } => {
                    write!(f, "II_wins_at({round}, left_payoff: {prefix})")
                }
                Reason::ConditionViolated { i, u, b } => {
                    write!(f, "II_wins_at({round}, condition_violated: u_{i}={u} b_{i}={b})")
                }
                Reason::Fault { detail } => write!(f, "II_wins_at({round}, fault: {detail})"),
            },
            Verdict::IAliveAtHorizon => f.write_str("I_alive_at_horizon"),
            Verdict::IWinsByFault { round, detail } => {
                write!(f, "I_wins_by_fault({round}, {detail})")
            }
        }
    }
}

/// Deterministic, effect-free move function for one side.
pub trait Strategy: Send + Sync {
    fn side(&self) -> Side;
    /// Called only when it is this side's turn. `Err` is a synthesis fault.
    fn next_move(&self, h: &PlayHistory) -> Result<Move>;
}

pub type SharedStrategy = Arc<dyn Strategy>;

/// A strategy from a closure.
pub struct FnStrategy<F> {
    side: Side,
    f: F,
}

impl<F> Strategy for FnStrategy<F>
where
    F: Fn(&PlayHistory) -> Result<Move> + Send + Sync,
{
    fn side(&self) -> Side {
        self.side
    }
    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        (self.f)(h)
    }
}

pub fn fn_strategy<F>(side: Side, f: F) -> SharedStrategy
where
    F: Fn(&PlayHistory) -> Result<Move> + Send + Sync + 'static,
{
    Arc::new(FnStrategy { side, f })
}

/// I always plays the same block.
pub fn constant_i(u: impl Into<FinSeq>) -> SharedStrategy {
    let u = u.into();
    fn_strategy(Side::I, move |_| Ok(Move::I(IMove::plain(u.clone()))))
}

/// II always plays the same condition.
pub fn constant_ii(b: Condition) -> SharedStrategy {
    fn_strategy(Side::II, move |_| Ok(Move::II(b.clone())))
}

/* Engine */

/// What the engine remembers between rounds.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Pos {
    /// Number of I-blocks played.
    played: usize,
    /// Payoff state (plain mode) or witness-payoff state (witness mode).
    q: StateId,
    /// Witness mode: letters of the play not yet paired.
    pending: Vec<Letter>,
    /// Witness mode: the witness letter not yet paired.
    xi: Option<Letter>,
}

enum Loss {
    /// Offending prefix length (plain mode: of the play; witness mode: of the pair stream).
    Left(usize),
    Violated,
    Fault(String),
}

fn initial_pos(cfg: &GameConfig) -> Pos {
    let tree = cfg.witness_payoff.as_ref().unwrap_or(&cfg.payoff);
    Pos {
        played: 0,
        q: tree.start().unwrap_or(0),
        pending: Vec::new(),
        xi: None,
    }
}

fn check_block(cfg: &GameConfig, m: &IMove) -> std::result::Result<(), String> {
    if m.u.is_empty() {
        return Err("empty block".into());
    }
    if m.u.len() > cfg.move_len_cap {
        return Err(format!("block {} longer than {}", m.u, cfg.move_len_cap));
    }
    let alphabet = cfg.cs.alphabet();
    if let Some(x) = m.u.letters().iter().find(|x| **x >= cfg.letter_cap || !alphabet.contains(**x)) {
        return Err(format!("letter {x} outside the allowed letters"));
    }
    match (cfg.witness_mode(), m.xi) {
        (true, None) => Err("missing witness letter".into()),
        (false, Some(_)) => Err("witness letter outside witness mode".into()),
        (true, Some(xi)) if xi >= cfg.letter_cap => Err(format!("witness letter {xi} over the cap")),
        _ => Ok(()),
    }
}

/// One I-block: legality, then the pending condition, then the payoff.
fn advance(cfg: &GameConfig, pos: &Pos, b: Option<&Condition>, m: &IMove, consumed: usize) -> std::result::Result<Pos, Loss> {
    check_block(cfg, m).map_err(Loss::Fault)?;
    if let Some(b) = b {
        if !cfg.cs.holds(m.u.letters(), b) {
            return Err(Loss::Violated);
        }
    }
    let mut next = pos.clone();
    next.played += 1;
    match &cfg.witness_payoff {
        None => {
            for (i, &x) in m.u.letters().iter().enumerate() {
                if !cfg.payoff.alphabet().contains(x) {
                    return Err(Loss::Left(consumed + i + 1));
                }
                next.q = cfg
                    .payoff
                    .successor(next.q, x)
                    .ok_or(Loss::Left(consumed + i + 1))?;
            }
        }
        Some(c) => {
            next.pending.extend_from_slice(m.u.letters());
            // Block k pairs position k-1 with the previous witness letter.
            if let Some(xi) = pos.xi {
                let x = next.pending.remove(0);
                let z = pair(x, xi);
                if !c.alphabet().contains(z) {
                    return Err(Loss::Left(pos.played));
                }
                next.q = c.successor(next.q, z).ok_or(Loss::Left(pos.played))?;
            }
            next.xi = m.xi;
        }
    }
    Ok(next)
}

/// Plays `horizon + 1` I-blocks (fewer if someone loses first).
pub fn play(cfg: &GameConfig, strat_i: &dyn Strategy, strat_ii: &dyn Strategy) -> Result<(PlayHistory, Verdict)> {
    cfg.validate()?;
    if strat_i.side() != Side::I || strat_ii.side() != Side::II {
        return input("strategies are attached to the wrong sides");
    }
    let mut h = PlayHistory::new();
    let mut pos = initial_pos(cfg);
    let mut consumed = 0;
    for round in 0..=cfg.horizon {
        let b = if round > 0 {
            let b = match strat_ii.next_move(&h)? {
                Move::II(b) => b,
                Move::I(_) => {
                    let v = Verdict::IWinsByFault {
                        round,
                        detail: "II returned a block".into(),
                    };
                    return Ok((h, v));
                }
            };
            h.moves.push(Move::II(b.clone()));
            if !cfg.cs.is_valid(&b) {
                let detail = format!("`{b}` is not a condition of {}", cfg.cs.name());
                return Ok((h, Verdict::IWinsByFault { round, detail }));
            }
            Some(b)
        } else {
            None
        };
        let m = match strat_i.next_move(&h)? {
            Move::I(m) => m,
            Move::II(_) => {
                let reason = Reason::Fault {
                    detail: "I returned a condition".into(),
                };
                return Ok((h, Verdict::IIWinsAt { round, reason }));
            }
        };
        h.moves.push(Move::I(m.clone()));
        match advance(cfg, &pos, b.as_ref(), &m, consumed) {
            Ok(p) => pos = p,
            Err(loss) => {
                let reason = match loss {
                    Loss::Fault(detail) => Reason::Fault { detail },
                    Loss::Violated => Reason::ConditionViolated {
                        i: round,
                        u: m.u.clone(),
                        b: b.expect("violations need a condition"),
                    },
                    Loss::Left(n) => Reason::LeftPayoff {
                        prefix: if cfg.witness_mode() {
                            paired_prefix(&h, n)
                        } else {
                            h.prefix().slice(0, n)
                        },
                    },
                };
                return Ok((h, Verdict::IIWinsAt { round, reason }));
            }
        }
        consumed += m.u.len();
    }
    Ok((h, Verdict::IAliveAtHorizon))
}

/// The witness-game variant; identical to [`play`] but insists on witness mode.
pub fn play_with_witnesses(cfg: &GameConfig, strat_i: &dyn Strategy, strat_ii: &dyn Strategy) -> Result<(PlayHistory, Verdict)> {
    if !cfg.witness_mode() {
        return input("play_with_witnesses needs a witness payoff");
    }
    play(cfg, strat_i, strat_ii)
}

/// The first `n` letters `pair(f(j), xi_j)` of a witness play.
pub fn paired_prefix(h: &PlayHistory, n: usize) -> FinSeq {
    let f = h.prefix();
    let xis: Vec<Letter> = h.i_moves().filter_map(|m| m.xi).collect();
    FinSeq((0..n.min(f.len()).min(xis.len())).map(|j| pair(f.0[j], xis[j])).collect())
}

/// One transcript line per half-move and a final verdict line.
pub fn transcript(h: &PlayHistory, v: &Verdict) -> String {
    let mut out = String::new();
    for m in &h.moves {
        out.push_str(&m.to_string());
        out.push('\n');
    }
    out.push_str(&format!("verdict: {v}\n"));
    out
}

/* Strategies from certificates */

/// I's strategy read off a B-perfect tree: answer `b` with the first child
/// satisfying it, else descend into the first child that reduces `b`.
pub struct BPerfectStrategy {
    j: BPerfectTree,
    cs: SharedCs,
}

/// One I-block assembled from tree labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockChoice {
    pub block: FinSeq,
    pub vertex: usize,
    /// Number of reductions performed before a child satisfied the condition.
    pub chain: usize,
}

pub fn strategy_i_from_bperfect(j: BPerfectTree, cs: SharedCs) -> BPerfectStrategy {
    BPerfectStrategy { j, cs }
}

impl BPerfectStrategy {
    pub fn tree(&self) -> &BPerfectTree {
        &self.j
    }

    fn answer(&self, mut v: usize, b: &Condition) -> Result<BlockChoice> {
        let mut b = b.clone();
        let mut block = Vec::new();
        let mut chain = 0;
        loop {
            let kids = self.j.children(v);
            if kids.is_empty() {
                let why = if self.j.vertex(v).frontier {
                    "tree exhausted at a frontier vertex (insufficient depth)"
                } else {
                    "tree has a leaf (not B-perfect)"
                };
                return Err(Error::Synthesis(format!("{why} while answering {b}")));
            }
            if let Some((s, c)) = kids.iter().find(|(s, _)| !s.is_empty() && self.cs.holds(s.letters(), &b)) {
                block.extend_from_slice(s.letters());
                return Ok(BlockChoice {
                    block: FinSeq(block),
                    vertex: *c,
                    chain,
                });
            }
            let step = kids
                .iter()
                .filter(|(s, _)| !s.is_empty())
                .find_map(|(s, c)| self.cs.reduce(&b, s.letters()).map(|b2| (s, *c, b2)));
            match step {
                Some((s, c, b2)) => {
                    if self.cs.rank(&b2) >= self.cs.rank(&b) {
                        return Err(Error::Synthesis(format!(
                            "reduction of {b} along {s} did not lower the rank"
                        )));
                    }
                    block.extend_from_slice(s.letters());
                    b = b2;
                    v = c;
                    chain += 1;
                }
                None => {
                    return Err(Error::Synthesis(format!(
                        "no child satisfies or reduces {b} (tree not dense or axioms fail)"
                    )))
                }
            }
        }
    }

    /// The block for I's next turn, replaying the whole history.
    pub fn choose(&self, h: &PlayHistory) -> Result<BlockChoice> {
        let (s, first) = self
            .j
            .children(self.j.root())
            .first()
            .cloned()
            .ok_or_else(|| Error::Synthesis("B-perfect tree has no root child".into()))?;
        let mut current = BlockChoice {
            block: s,
            vertex: first,
            chain: 0,
        };
        for b in h.conditions() {
            current = self.answer(current.vertex, b)?;
        }
        Ok(current)
    }
}

impl Strategy for BPerfectStrategy {
    fn side(&self) -> Side {
        Side::I
    }
    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        Ok(Move::I(IMove::plain(self.choose(h)?.block)))
    }
}

/// II's strategy from a B-meager cover: play the witness of the first piece still containing the play.
pub struct CoverStrategy {
    pieces: Vec<RegularTree>,
    witnesses: Vec<Witness>,
    cs: SharedCs,
}

pub fn strategy_ii_from_cover(pieces: Vec<RegularTree>, witnesses: Vec<Witness>, cs: SharedCs) -> Result<CoverStrategy> {
    if pieces.len() != witnesses.len() {
        return input(format!(
            "{} pieces but {} witnesses",
            pieces.len(),
            witnesses.len()
        ));
    }
    Ok(CoverStrategy {
        pieces,
        witnesses,
        cs,
    })
}

impl CoverStrategy {
    pub fn pieces(&self) -> &[RegularTree] {
        &self.pieces
    }

    /// Index of the piece engaged at prefix `u`.
    pub fn engaged(&self, u: &FinSeq) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(u.letters()))
    }

    pub fn condition_at(&self, u: &FinSeq) -> Result<Condition> {
        let Some(i) = self.engaged(u) else {
            return self.cs.distinguisher(0);
        };
        let piece = &self.pieces[i];
        let b = self.witnesses[i]
            .at(piece, u)
            .ok_or_else(|| Error::Synthesis(format!("piece {i} has no witness at {u}")))?;
        if let Witness::PerState(_) = self.witnesses[i] {
            if !self.cs.bounded_only() {
                let q = piece.state_at(u)?.expect("engaged pieces contain the prefix");
                if !state_witness_holds(piece, self.cs.as_ref(), q, &b)? {
                    return Err(Error::Synthesis(format!(
                        "witness {b} of piece {i} fails at state {q}"
                    )));
                }
            }
        }
        Ok(b)
    }
}

impl Strategy for CoverStrategy {
    fn side(&self) -> Side {
        Side::II
    }
    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        Ok(Move::II(self.condition_at(&h.prefix())?))
    }
}

/// Uniform random moves, seeded by `(seed, history)` so replays are stable.
/// In compliant mode I tries to satisfy the pending condition.
pub struct RandomStrategy {
    side: Side,
    seed: u64,
    cfg: GameConfig,
    compliant: bool,
}

pub fn random_strategy(side: Side, seed: u64, cfg: &GameConfig) -> RandomStrategy {
    RandomStrategy {
        side,
        seed,
        cfg: cfg.clone(),
        compliant: false,
    }
}

impl RandomStrategy {
    pub fn compliant(mut self) -> Self {
        self.compliant = true;
        self
    }

    fn rng(&self, h: &PlayHistory) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ h.stable_hash().rotate_left(17))
    }

    fn random_block(&self, rng: &mut ChaCha8Rng, letters: &[Letter]) -> IMove {
        let len = rng.gen_range(1..=self.cfg.move_len_cap);
        let u = FinSeq((0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect());
        let xi = self
            .cfg
            .witness_mode()
            .then(|| rng.gen_range(0..self.cfg.letter_cap));
        IMove { xi, u }
    }
}

impl Strategy for RandomStrategy {
    fn side(&self) -> Side {
        self.side
    }
    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        let mut rng = self.rng(h);
        match self.side {
            Side::II => {
                let conds = self.cfg.conditions();
                if conds.is_empty() {
                    return Err(Error::Synthesis("no conditions to choose from".into()));
                }
                Ok(Move::II(conds[rng.gen_range(0..conds.len())].clone()))
            }
            Side::I => {
                let letters = self.cfg.letters();
                if letters.is_empty() {
                    return Err(Error::Synthesis("no letters below the cap".into()));
                }
                if self.compliant {
                    if let Some(b) = h.pending_condition() {
                        let ok: Vec<IMove> = self
                            .cfg
                            .i_moves()
                            .into_iter()
                            .filter(|m| self.cfg.cs.holds(m.u.letters(), b))
                            .collect();
                        if !ok.is_empty() {
                            return Ok(Move::I(ok[rng.gen_range(0..ok.len())].clone()));
                        }
                    }
                }
                Ok(Move::I(self.random_block(&mut rng, &letters)))
            }
        }
    }
}

/* Synthesis from strategies */

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreBudget {
    /// Condition rounds explored; vertices of I's block `rounds` are frontier.
    pub rounds: usize,
    pub cond_limit: usize,
}

fn i_block(strat: &dyn Strategy, h: &PlayHistory) -> Result<FinSeq> {
    let fault = |why: String| Error::Synthesis(format!("{why} after history [{}]", history_inline(h)));
    match strat.next_move(h) {
        Ok(Move::I(m)) if !m.u.is_empty() => Ok(m.u),
        Ok(Move::I(_)) => Err(fault("empty block".into())),
        Ok(Move::II(_)) => Err(fault("I-strategy returned a condition".into())),
        Err(e) => Err(fault(e.to_string())),
    }
}

fn history_inline(h: &PlayHistory) -> String {
    h.moves.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("; ")
}

/// Explores I's replies to every condition tuple over the first `cond_limit`
/// conditions and keeps, among comparable sibling replies, the shortest.
pub fn strategy_to_bperfect(strat_i: &dyn Strategy, cs: &dyn ConditionSet, budget: ExploreBudget) -> Result<BPerfectTree> {
    let conds = cs.enumerate(budget.cond_limit);
    let mut j = BPerfectTree::root_only();
    let h0 = PlayHistory::new();
    let u0 = i_block(strat_i, &h0)?;
    let v0 = j.add_child(j.root(), u0.clone(), budget.rounds == 0);
    let mut work = vec![(v0, h0.pushed(Move::I(IMove::plain(u0))), 0)];
    while let Some((v, h, depth)) = work.pop() {
        if depth == budget.rounds {
            continue;
        }
        let mut kept: Vec<(FinSeq, PlayHistory)> = Vec::new();
        for b in &conds {
            let hb = h.pushed(Move::II(b.clone()));
            let s = i_block(strat_i, &hb)?;
            if kept.iter().any(|(t, _)| t.is_prefix_of(&s)) {
                continue;
            }
            kept.retain(|(t, _)| !s.is_proper_prefix_of(t));
            let hs = hb.pushed(Move::I(IMove::plain(s.clone())));
            kept.push((s, hs));
        }
        for (s, hs) in kept {
            let c = j.add_child(v, s, depth + 1 == budget.rounds);
            work.push((c, hs, depth + 1));
        }
    }
    Ok(j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverBudgetSpec {
    pub prefix_depth: usize,
}

/// A depth-truncated piece of the cover read off II's strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverPiece {
    pub tree: RegularTree,
    /// Nodes deeper than this are unconstrained.
    pub depth: usize,
    /// The good history the piece hangs off.
    pub history: PlayHistory,
    /// Concatenation of that history followed by a minimal block satisfying II's reply.
    pub anchor: FinSeq,
    /// Per-node witnesses up to `depth`.
    pub witness: Witness,
}

/// Pieces of prefixes where II's strategy stalls I after a good history.
///
/// For every good history `p` (every block satisfies II's reply, total
/// length `< prefix_depth`) and every minimal block `a` satisfying II's
/// next reply, the piece holds the payoff nodes compatible with `p⌢a` that
/// do not contain a further good step followed by a block satisfying II's
/// answer to it. Leaves at `prefix_depth` continue with every letter below the cap.
pub fn strategy_to_cover(strat_ii: &dyn Strategy, cfg: &GameConfig, budget: CoverBudgetSpec) -> Result<Vec<CoverPiece>> {
    let d = budget.prefix_depth;
    // Pieces live over the payoff alphabet; letters outside it leave the payoff anyway.
    let letters: Vec<Letter> = cfg.letters().into_iter().filter(|x| cfg.payoff.alphabet().contains(*x)).collect();
    if d == 0 {
        return Ok(vec![CoverPiece {
            tree: beyond_only(cfg.payoff.alphabet(), &letters)?,
            depth: 0,
            history: PlayHistory::new(),
            anchor: FinSeq::empty(),
            witness: Witness::PerNode(BTreeMap::new()),
        }]);
    }
    let reply = |h: &PlayHistory| -> Result<Condition> {
        match strat_ii.next_move(h) {
            Ok(Move::II(b)) => Ok(b),
            Ok(Move::I(_)) => Err(Error::Synthesis("II-strategy returned a block".into())),
            Err(e) => Err(Error::Synthesis(format!(
                "{e} after history [{}]",
                history_inline(h)
            ))),
        }
    };
    let mut pieces = Vec::new();
    // (history, its concatenation, II's reply to it)
    let mut stack: Vec<(PlayHistory, FinSeq, Option<Condition>)> =
        vec![(PlayHistory::new(), FinSeq::empty(), None)];
    while let Some((p, w, b)) = stack.pop() {
        let room = d - w.len();
        let blocks = blocks_upto(&letters, room);
        let sat: Vec<&FinSeq> = blocks
            .iter()
            .filter(|a| b.as_ref().is_none_or(|b| cfg.cs.holds(a.letters(), b)))
            .collect();
        for a in &sat {
            let minimal = !sat.iter().any(|c| c.is_proper_prefix_of(a));
            let wa = w.concat(a);
            if !cfg.payoff.contains(wa.letters()) {
                continue;
            }
            if minimal {
                if let Some(piece) = build_piece(strat_ii, cfg, &p, &w, b.as_ref(), &wa, d, &letters, &reply)? {
                    pieces.push(piece);
                }
            }
            if wa.len() < d {
                let ha = p.pushed(Move::I(IMove::plain((*a).clone())));
                let next = reply(&ha)?;
                stack.push((ha.pushed(Move::II(next.clone())), wa, Some(next)));
            }
        }
    }
    pieces.sort_by(|x, y| x.anchor.cmp(&y.anchor).then(x.history.len().cmp(&y.history.len())));
    Ok(pieces)
}

fn blocks_upto(letters: &[Letter], max_len: usize) -> Vec<FinSeq> {
    let mut out = Vec::new();
    let mut level = vec![FinSeq::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &level {
            for &x in letters {
                let t = s.pushed(x);
                out.push(t.clone());
                next.push(t);
            }
        }
        level = next;
    }
    out
}

fn beyond_only(alphabet: Alphabet, letters: &[Letter]) -> Result<RegularTree> {
    RegularTree::new(alphabet, Some(0), [(0, ChildSpec::set(letters.iter().copied()), 0)])
}

#[allow(clippy::too_many_arguments)]
fn build_piece(
    strat_ii: &dyn Strategy,
    cfg: &GameConfig,
    p: &PlayHistory,
    w: &FinSeq,
    b: Option<&Condition>,
    anchor: &FinSeq,
    d: usize,
    letters: &[Letter],
    reply: &dyn Fn(&PlayHistory) -> Result<Condition>,
) -> Result<Option<CoverPiece>> {
    let _ = strat_ii;
    // Replies to `p⌢(y − w)` for the blocks seen so far.
    let mut replies: HashMap<FinSeq, Condition> = HashMap::new();
    let mut reply_to = |seg: &FinSeq| -> Result<Condition> {
        if let Some(c) = replies.get(seg) {
            return Ok(c.clone());
        }
        let c = reply(&p.pushed(Move::I(IMove::plain(seg.clone()))))?;
        replies.insert(seg.clone(), c.clone());
        Ok(c)
    };
    let mut forbidden = |y: &FinSeq| -> Result<bool> {
        for k in w.len() + 1..y.len() {
            let seg = y.slice(w.len(), k);
            if b.is_some_and(|b| !cfg.cs.holds(seg.letters(), b)) {
                continue;
            }
            let c = reply_to(&seg)?;
            if cfg.cs.holds(&y.letters()[k..], &c) {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let mut nodes: Vec<FinSeq> = vec![FinSeq::empty()];
    let mut i = 0;
    while i < nodes.len() {
        let y = nodes[i].clone();
        i += 1;
        if y.len() == d {
            continue;
        }
        for &x in letters {
            let z = y.pushed(x);
            if !(z.is_prefix_of(anchor) || anchor.is_prefix_of(&z)) {
                continue;
            }
            if !cfg.payoff.contains(z.letters()) || forbidden(&z)? {
                continue;
            }
            nodes.push(z);
        }
    }
    let ids: HashMap<&FinSeq, StateId> = nodes.iter().enumerate().map(|(i, n)| (n, i as StateId)).collect();
    let beyond = nodes.len() as StateId;
    let mut edges = Vec::new();
    for (n, &id) in &ids {
        if n.len() == d {
            edges.push((id, ChildSpec::set(letters.iter().copied()), beyond));
        }
        if !n.is_empty() {
            let parent = n.slice(0, n.len() - 1);
            edges.push((ids[&parent], ChildSpec::set([*n.letters().last().unwrap()]), id));
        }
    }
    edges.push((beyond, ChildSpec::set(letters.iter().copied()), beyond));
    let tree = RegularTree::new(cfg.payoff.alphabet(), Some(0), edges)?;
    if tree.is_empty() {
        return Ok(None);
    }
    let mut witness = BTreeMap::new();
    for n in nodes.iter().filter(|n| tree.contains(n.letters())) {
        let c = if n.len() < anchor.len() {
            cfg.cs.distinguisher(anchor.0[n.len()])?
        } else {
            reply_to(&n.slice(w.len(), n.len()))?
        };
        witness.insert(n.clone(), c);
    }
    Ok(Some(CoverPiece {
        tree,
        depth: d,
        history: p.clone(),
        anchor: anchor.clone(),
        witness: Witness::PerNode(witness),
    }))
}

/* Finite solver */

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Key {
    pos: Pos,
    consumed: usize,
    pending_b: Option<Condition>,
    to_move: Side,
}

struct Solver {
    cfg: GameConfig,
    moves: Vec<IMove>,
    conds: Vec<Condition>,
    memo: HashMap<Key, bool>,
    budget: usize,
    visited: usize,
    depth: usize,
}

impl Solver {
    fn new(cfg: &GameConfig, budget: usize) -> Self {
        Solver {
            cfg: cfg.clone(),
            moves: cfg.i_moves(),
            conds: cfg.conditions(),
            memo: HashMap::new(),
            budget,
            visited: 0,
            depth: 0,
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.visited += 1;
        if self.visited > self.budget {
            return Err(Error::Resource {
                budget: self.budget,
                visited: self.visited,
                frontier: self.depth,
            });
        }
        Ok(())
    }

    /// Whether I wins from `key`.
    fn value(&mut self, key: &Key) -> Result<bool> {
        if let Some(v) = self.memo.get(key) {
            return Ok(*v);
        }
        self.tick()?;
        self.depth += 1;
        let v = match key.to_move {
            Side::I => self.i_value(key),
            Side::II => self.ii_value(key),
        };
        self.depth -= 1;
        let v = v?;
        self.memo.insert(key.clone(), v);
        Ok(v)
    }

    fn after_i(&self, key: &Key, m: &IMove) -> Option<Key> {
        let pos = advance(&self.cfg, &key.pos, key.pending_b.as_ref(), m, key.consumed).ok()?;
        Some(Key {
            pos,
            consumed: key.consumed + m.u.len(),
            pending_b: None,
            to_move: Side::II,
        })
    }

    fn i_value(&mut self, key: &Key) -> Result<bool> {
        for i in 0..self.moves.len() {
            let m = self.moves[i].clone();
            if let Some(next) = self.after_i(key, &m) {
                if next.pos.played > self.cfg.horizon || self.value(&next)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn ii_value(&mut self, key: &Key) -> Result<bool> {
        for i in 0..self.conds.len() {
            let next = Key {
                pending_b: Some(self.conds[i].clone()),
                to_move: Side::I,
                ..key.clone()
            };
            if !self.value(&next)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn root(&self) -> Key {
        Key {
            pos: initial_pos(&self.cfg),
            consumed: 0,
            pending_b: None,
            to_move: Side::I,
        }
    }

    /// The key reached by `h`, or `None` once the play is already decided.
    fn key_of(&self, h: &PlayHistory) -> Option<Key> {
        let mut key = self.root();
        for m in &h.moves {
            match m {
                Move::I(x) => {
                    key = self.after_i(&key, x)?;
                }
                Move::II(b) => {
                    key.pending_b = Some(b.clone());
                    key.to_move = Side::I;
                }
            }
        }
        Some(key)
    }
}

/// Plays a value-preserving move from the solver's tables, computing more on demand.
pub struct SolverStrategy {
    side: Side,
    solver: Arc<Mutex<Solver>>,
}

impl Strategy for SolverStrategy {
    fn side(&self) -> Side {
        self.side
    }
    fn next_move(&self, h: &PlayHistory) -> Result<Move> {
        let mut s = self.solver.lock().expect("solver lock");
        let key = s.key_of(h);
        match self.side {
            Side::I => {
                if let Some(key) = key {
                    for i in 0..s.moves.len() {
                        let m = s.moves[i].clone();
                        if let Some(next) = s.after_i(&key, &m) {
                            if next.pos.played > s.cfg.horizon || s.value(&next)? {
                                return Ok(Move::I(m));
                            }
                        }
                    }
                    // Losing anyway: prefer a block that at least survives this round.
                    for m in s.moves.clone() {
                        if s.after_i(&key, &m).is_some() {
                            return Ok(Move::I(m));
                        }
                    }
                }
                s.moves
                    .first()
                    .cloned()
                    .map(Move::I)
                    .ok_or_else(|| Error::Synthesis("no legal blocks".into()))
            }
            Side::II => {
                if let Some(key) = key {
                    for i in 0..s.conds.len() {
                        let next = Key {
                            pending_b: Some(s.conds[i].clone()),
                            to_move: Side::I,
                            ..key.clone()
                        };
                        if !s.value(&next)? {
                            return Ok(Move::II(s.conds[i].clone()));
                        }
                    }
                }
                s.conds
                    .first()
                    .cloned()
                    .map(Move::II)
                    .ok_or_else(|| Error::Synthesis("no conditions".into()))
            }
        }
    }
}

pub struct Solution {
    pub winner: Side,
    /// The winner's strategy.
    pub strategy: SolverStrategy,
    /// The loser's best-effort strategy (same tables).
    pub other: SolverStrategy,
    pub visited: usize,
}

/// Backward induction over the truncated game with I-blocks from
/// [`GameConfig::i_moves`] and II's first `cond_limit` conditions.
pub fn solve_finite(cfg: &GameConfig) -> Result<Solution> {
    solve_finite_with_budget(cfg, node_budget_from_env())
}

pub fn solve_finite_with_budget(cfg: &GameConfig, budget: usize) -> Result<Solution> {
    cfg.validate()?;
    let mut s = Solver::new(cfg, budget);
    let root = s.root();
    let i_wins = s.value(&root)?;
    let visited = s.visited;
    let winner = if i_wins { Side::I } else { Side::II };
    let shared = Arc::new(Mutex::new(s));
    let make = |side| SolverStrategy {
        side,
        solver: shared.clone(),
    };
    Ok(Solution {
        winner,
        strategy: make(winner),
        other: make(if i_wins { Side::II } else { Side::I }),
        visited,
    })
}

/// The plain game on letters: players alternate single letters `< letter_cap`,
/// I first, for `half_moves` moves; I wins iff the result stays in the tree.
pub fn solve_base(tree: &RegularTree, letter_cap: u32, half_moves: usize) -> Result<Side> {
    fn go(t: &RegularTree, q: StateId, cap: u32, left: usize, i_to_move: bool) -> bool {
        if left == 0 {
            return true;
        }
        let mut outcomes = t
            .alphabet()
            .letters_below(cap)
            .map(|x| t.successor(q, x).is_some_and(|r| go(t, r, cap, left - 1, !i_to_move)));
        if i_to_move {
            outcomes.any(|w| w)
        } else {
            outcomes.all(|w| w) && t.alphabet().letters_below(cap).next().is_some()
        }
    }
    let Some(q) = tree.start() else {
        return Ok(Side::II);
    };
    if letter_cap == 0 {
        return input("letter cap must be positive");
    }
    Ok(if go(tree, q, letter_cap, half_moves, true) {
        Side::I
    } else {
        Side::II
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{FirstLetterAbove, FirstLetterBit, PrefixCondition};

    fn ex61() -> SharedCs {
        Arc::new(FirstLetterBit)
    }
    fn ex62() -> SharedCs {
        Arc::new(PrefixCondition::new(3).unwrap())
    }
    fn ex63() -> SharedCs {
        Arc::new(FirstLetterAbove)
    }
    fn zero_branch() -> RegularTree {
        RegularTree::constant_branch(Alphabet::Omega, 0).unwrap()
    }
    fn seq<const N: usize>(v: [Letter; N]) -> FinSeq {
        FinSeq::from(v)
    }

    #[test]
    fn pairing_round_trips() {
        for x in 0..30 {
            for xi in 0..30 {
                assert_eq!(unpair(pair(x, xi)), (x, xi));
            }
        }
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
    }

    #[test]
    fn play_examples() {
        let cfg = GameConfig::new(ex63(), RegularTree::full(Alphabet::Omega), 3).with_caps(2, 16, 8);
        let i = fn_strategy(Side::I, |h: &PlayHistory| {
            let k = match h.pending_condition() {
                Some(Condition::Nat(k)) => k + 1,
                _ => 0,
            };
            Ok(Move::I(IMove::plain([k])))
        });
        let (h, v) = play(&cfg, i.as_ref(), constant_ii(Condition::Nat(5)).as_ref()).unwrap();
        assert_eq!(v, Verdict::IAliveAtHorizon);
        assert_eq!(h.len(), 7);

        let cfg = GameConfig::new(ex63(), zero_branch(), 2);
        let (_, v) = play(&cfg, constant_i([0]).as_ref(), constant_ii(Condition::Nat(0)).as_ref()).unwrap();
        assert_eq!(
            v,
            Verdict::IIWinsAt {
                round: 1,
                reason: Reason::ConditionViolated {
                    i: 1,
                    u: seq([0]),
                    b: Condition::Nat(0)
                }
            }
        );
    }

    #[test]
    fn ex61_branch_case_split() {
        let cfg = GameConfig::new(ex61(), zero_branch(), 2);
        for u in cfg.i_moves() {
            let first = IMove::plain([0, 0]);
            let i = fn_strategy(Side::I, move |h: &PlayHistory| {
                Ok(Move::I(if h.round() == 0 { first.clone() } else { u.clone() }))
            });
            let (_, v) = play(&cfg, i.as_ref(), constant_ii(Condition::Bit(1)).as_ref()).unwrap();
            assert_eq!(v.ii_round(), Some(1), "{v}");
        }
    }

    #[test]
    fn faults_lose_immediately() {
        let cfg = GameConfig::new(ex63(), RegularTree::full(Alphabet::Omega), 2);
        let (_, v) = play(&cfg, constant_i(FinSeq::empty()).as_ref(), constant_ii(Condition::Nat(0)).as_ref()).unwrap();
        assert!(matches!(v, Verdict::IIWinsAt { round: 0, reason: Reason::Fault { .. } }));
        let (_, v) = play(&cfg, constant_i([1]).as_ref(), constant_ii(Condition::Bit(0)).as_ref()).unwrap();
        assert!(matches!(v, Verdict::IWinsByFault { round: 1, .. }));
        let (_, v) = play(&cfg, constant_i([1, 1, 1]).as_ref(), constant_ii(Condition::Nat(0)).as_ref()).unwrap();
        assert!(v.ii_wins());
    }

    #[test]
    fn left_payoff_cites_first_outside_prefix() {
        let cfg = GameConfig::new(ex63(), zero_branch(), 1);
        let (_, v) = play(&cfg, constant_i([0, 1]).as_ref(), constant_ii(Condition::Nat(0)).as_ref()).unwrap();
        assert_eq!(
            v,
            Verdict::IIWinsAt {
                round: 0,
                reason: Reason::LeftPayoff { prefix: seq([0, 1]) }
            }
        );
    }

    #[test]
    fn witness_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        let cfg = GameConfig::new(ex63(), full.clone(), 3).with_witness_payoff(full.clone());
        let i = fn_strategy(Side::I, |h: &PlayHistory| {
            let k = match h.pending_condition() {
                Some(Condition::Nat(k)) => k + 1,
                _ => 0,
            };
            Ok(Move::I(IMove {
                xi: Some(1),
                u: FinSeq::from([k]),
            }))
        });
        let ii = constant_ii(Condition::Nat(1));
        assert_eq!(play_with_witnesses(&cfg, i.as_ref(), ii.as_ref()).unwrap().1, Verdict::IAliveAtHorizon);

        let c = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [(0, ChildSpec::set([pair(0, 0)]), 1), (1, ChildSpec::All, 1)],
        )
        .unwrap();
        let cfg = GameConfig::new(ex63(), full, 3).with_witness_payoff(c);
        let i = fn_strategy(Side::I, |h: &PlayHistory| {
            let u = if h.round() == 0 { FinSeq::from([0]) } else { FinSeq::from([3]) };
            Ok(Move::I(IMove { xi: Some(1), u }))
        });
        let (h, v) = play_with_witnesses(&cfg, i.as_ref(), ii.as_ref()).unwrap();
        assert_eq!(v.ii_round(), Some(1));
        assert!(matches!(v, Verdict::IIWinsAt { reason: Reason::LeftPayoff { .. }, .. }));
        assert!(transcript(&h, &v).starts_with("I: xi=1 0\nII: b=1\n"));
    }

    fn ex63_fan() -> BPerfectTree {
        // Root child (0); every later vertex offers (0), (1), ..., (7) and loops.
        let mut j = BPerfectTree::root_only();
        let v = j.add_child(0, seq([0]), false);
        for x in 0..8 {
            j.add_edge(v, seq([x]), v);
        }
        j
    }

    #[test]
    fn bperfect_strategy_examples() {
        let s = strategy_i_from_bperfect(ex63_fan(), ex63());
        let h = PlayHistory::from_parts(&[IMove::plain([0])], &[Condition::Nat(2)]).unwrap();
        assert_eq!(s.choose(&h).unwrap().block, seq([3]));

        let mut j = BPerfectTree::root_only();
        let v = j.add_child(0, seq([0]), false);
        for x in 0..3 {
            j.add_edge(v, seq([x]), v);
        }
        let s = strategy_i_from_bperfect(j, ex62());
        let b = Condition::Seq(seq([0, 1]));
        let h = PlayHistory::from_parts(&[IMove::plain([0])], &[b]).unwrap();
        let c = s.choose(&h).unwrap();
        assert_eq!(c.block, seq([0, 1]));
        assert_eq!(c.chain, 1);
        let h = PlayHistory::from_parts(&[IMove::plain([0])], &[Condition::Seq(seq([2]))]).unwrap();
        assert_eq!(s.choose(&h).unwrap().chain, 0);
    }

    #[test]
    fn bperfect_strategy_reports_exhaustion() {
        let mut j = BPerfectTree::root_only();
        let v = j.add_child(0, seq([0]), false);
        j.add_child(v, seq([1]), true);
        let s = strategy_i_from_bperfect(j, ex63());
        let h = PlayHistory::from_parts(
            &[IMove::plain([0]), IMove::plain([1])],
            &[Condition::Nat(0), Condition::Nat(0)],
        )
        .unwrap();
        let err = s.choose(&h).unwrap_err();
        assert!(err.to_string().contains("frontier"), "{err}");
    }

    #[test]
    fn cover_strategy_examples() {
        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        let w = crate::smallness::is_b_nowhere_dense(&k4, &FirstLetterAbove, crate::smallness::NdMode::Exact)
            .unwrap()
            .unwrap();
        let s = strategy_ii_from_cover(vec![k4], vec![w], ex63()).unwrap();
        assert_eq!(s.condition_at(&FinSeq::empty()).unwrap(), Condition::Nat(3));
        assert_eq!(s.condition_at(&seq([9])).unwrap(), Condition::Nat(0));

        let z = zero_branch();
        let w = crate::smallness::is_b_nowhere_dense(&z, &FirstLetterBit, crate::smallness::NdMode::Exact)
            .unwrap()
            .unwrap();
        let s = strategy_ii_from_cover(vec![z], vec![w], ex61()).unwrap();
        assert_eq!(s.condition_at(&seq([0, 0])).unwrap(), Condition::Bit(1));
        assert_eq!(s.condition_at(&seq([1])).unwrap(), Condition::Bit(1));

        let broken = Witness::PerState(BTreeMap::from([(0, Condition::Bit(0))]));
        let s = strategy_ii_from_cover(vec![zero_branch()], vec![broken], ex61()).unwrap();
        assert!(matches!(s.condition_at(&FinSeq::empty()), Err(Error::Synthesis(_))));
    }

    #[test]
    fn to_bperfect_examples() {
        let j = strategy_to_bperfect(
            constant_i([0]).as_ref(),
            &FirstLetterBit,
            ExploreBudget {
                rounds: 2,
                cond_limit: 2,
            },
        )
        .unwrap();
        assert_eq!(j.children(1).len(), 1);
        let r = crate::smallness::validate_bperfect(
            &j,
            &FirstLetterBit,
            crate::smallness::JBudget {
                cond_limit: 2,
                ext_depth: 0,
                letter_cap: 2,
            },
        );
        assert!(r.findings.iter().any(|f| matches!(
            f,
            crate::smallness::JFinding::NotDense { b: Condition::Bit(1), .. }
        )));

        let echo = fn_strategy(Side::I, |h: &PlayHistory| {
            Ok(Move::I(IMove::plain(match h.pending_condition() {
                Some(Condition::Seq(s)) => s.pushed(0),
                _ => FinSeq::from([0]),
            })))
        });
        let e62 = PrefixCondition::new(2).unwrap();
        let j = strategy_to_bperfect(
            echo.as_ref(),
            &e62,
            ExploreBudget {
                rounds: 1,
                cond_limit: 2,
            },
        )
        .unwrap();
        let labels: Vec<FinSeq> = j.children(1).iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(labels, vec![seq([0, 0]), seq([1, 0])]);
    }

    #[test]
    fn round_trip_stays_inside_the_tree() {
        let j0 = ex63_fan();
        let s = strategy_i_from_bperfect(j0.clone(), ex63());
        let j = strategy_to_bperfect(
            &s,
            &FirstLetterAbove,
            ExploreBudget {
                rounds: 3,
                cond_limit: 4,
            },
        )
        .unwrap();
        for t in j.tuples(4) {
            let flat = FinSeq(t.iter().flat_map(|s| s.0.clone()).collect());
            assert!(crate::smallness::bperfect_prefix_member(&j0, &flat).is_some(), "{flat}");
        }
    }

    #[test]
    fn to_cover_examples() {
        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        let w = crate::smallness::is_b_nowhere_dense(&k4, &FirstLetterAbove, crate::smallness::NdMode::Exact)
            .unwrap()
            .unwrap();
        let tau = strategy_ii_from_cover(vec![k4.clone()], vec![w], ex63()).unwrap();
        let cfg = GameConfig::new(ex63(), k4.clone(), 2).with_caps(2, 4, 4);
        let pieces = strategy_to_cover(&tau, &cfg, CoverBudgetSpec { prefix_depth: 3 }).unwrap();
        for u in k4.enumerate_nodes(3, Some(3)).unwrap() {
            assert!(pieces.iter().any(|p| p.tree.contains(u.letters())), "{u}");
        }

        let full = RegularTree::full(Alphabet::Omega);
        let cfg = GameConfig::new(ex63(), full, 2).with_caps(2, 3, 4);
        let pieces = strategy_to_cover(constant_ii(Condition::Nat(0)).as_ref(), &cfg, CoverBudgetSpec { prefix_depth: 3 })
            .unwrap();
        assert!(!pieces.is_empty());
        for p in &pieces {
            let bad = crate::smallness::find_witness_counterexample(
                &p.tree,
                &FirstLetterAbove,
                &p.witness,
                crate::smallness::NdBudget {
                    node_depth: 1,
                    cond_limit: 4,
                    ext_depth: 2,
                    letter_cap: 3,
                },
            );
            assert!(bad.is_none(), "{bad:?}");
            assert!(p.witness.conditions().contains(&Condition::Nat(0)));
        }

        let pieces = strategy_to_cover(constant_ii(Condition::Nat(0)).as_ref(), &cfg, CoverBudgetSpec { prefix_depth: 0 })
            .unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].depth, 0);
    }

    #[test]
    fn solver_examples() {
        assert_eq!(
            solve_base(
                &RegularTree::new(
                    Alphabet::Finite(2),
                    Some(0),
                    [(0, ChildSpec::set([0]), 1), (1, ChildSpec::All, 1)]
                )
                .unwrap(),
                2,
                2
            )
            .unwrap(),
            Side::I
        );

        let cfg = GameConfig::new(ex63(), zero_branch(), 1).with_caps(2, 2, 2);
        assert_eq!(solve_finite(&cfg).unwrap().winner, Side::II);

        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        let cfg = GameConfig::new(ex63(), k4, 2).with_caps(2, 4, 6);
        let sol = solve_finite(&cfg).unwrap();
        assert_eq!(sol.winner, Side::II);
        let h = PlayHistory::from_parts(&[IMove::plain([0]), IMove::plain([1])], &[Condition::Nat(0)]).unwrap();
        assert_eq!(sol.strategy.next_move(&h).unwrap(), Move::II(Condition::Nat(3)));

        let cfg = GameConfig::new(ex63(), RegularTree::full(Alphabet::Omega), 2).with_caps(1, 4, 2);
        let sol = solve_finite(&cfg).unwrap();
        assert_eq!(sol.winner, Side::I);
        let (_, v) = play(&cfg, &sol.strategy, &sol.other).unwrap();
        assert_eq!(v, Verdict::IAliveAtHorizon);
    }

    #[test]
    fn solver_respects_budget() {
        let cfg = GameConfig::new(ex63(), RegularTree::full(Alphabet::Omega), 3).with_caps(2, 4, 4);
        assert!(matches!(
            solve_finite_with_budget(&cfg, 10),
            Err(Error::Resource { budget: 10, .. })
        ));
    }

    #[test]
    fn random_strategies_are_reproducible() {
        let cfg = GameConfig::new(ex63(), RegularTree::full(Alphabet::Omega), 3);
        let a = random_strategy(Side::I, 7, &cfg);
        let b = random_strategy(Side::II, 7, &cfg);
        let first = play(&cfg, &a, &b).unwrap();
        assert_eq!(first, play(&cfg, &a, &b).unwrap());
    }
}
