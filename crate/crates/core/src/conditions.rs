//! Condition sets: conditions player II may impose on player I's next block.
//!
//! Three built-in sets are provided ([`FirstLetterBit`], [`PrefixCondition`],
//! [`FirstLetterAbove`]) together with table-driven custom sets and a bounded
//! validator for the monotonicity, distinguishability and reducibility axioms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::tree::{Alphabet, FinSeq, Letter};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Bit(u8),
    Seq(FinSeq),
    Nat(u32),
    /// Condition of a table-driven set, by id.
    Id(u32),
}

impl fmt::Display for Condition {
    /// The bare payload, as used in transcripts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Bit(b) => write!(f, "{b}"),
            Condition::Seq(s) => write!(f, "{}", s.comma_list()),
            Condition::Nat(n) => write!(f, "{n}"),
            Condition::Id(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsKind {
    /// `u ⊨ b` iff `u(0) = b`, `b ∈ {0,1}`.
    Ex61,
    /// `u ⊨ b` iff `b ⪯ u`.
    Ex62,
    /// `u ⊨ b` iff `u(0) > b`.
    Ex63,
    Custom,
}

/// A countable set of conditions with its satisfaction relation and hooks.
pub trait ConditionSet: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn kind(&self) -> CsKind;
    fn alphabet(&self) -> Alphabet;
    fn is_valid(&self, b: &Condition) -> bool;
    /// `u ⊨ b` for non-empty `u`; callers guarantee `u` is non-empty and `b` valid.
    fn holds(&self, u: &[Letter], b: &Condition) -> bool;
    fn rank(&self, b: &Condition) -> usize;
    /// A condition no sequence starting with `x` satisfies.
    fn distinguisher(&self, x: Letter) -> Result<Condition>;
    /// `b'` with `w ⊨ b' ⇔ u⌢w ⊨ b` and smaller rank, when `u ⊭ b` but some extension of `u` satisfies `b`.
    fn reduce(&self, b: &Condition, u: &[Letter]) -> Option<Condition>;
    /// The first `limit` conditions of a fixed enumeration.
    fn enumerate(&self, limit: usize) -> Vec<Condition>;
    fn parse_condition(&self, text: &str) -> Result<Condition>;

    /// Table-driven sets are only checked on samples, never by exact deciders.
    fn bounded_only(&self) -> bool {
        self.kind() == CsKind::Custom
    }

    fn satisfies(&self, u: &FinSeq, b: &Condition) -> Result<bool> {
        if u.is_empty() {
            return input("satisfaction is only defined for non-empty sequences");
        }
        if !self.is_valid(b) {
            return input(format!("`{b}` is not a condition of {}", self.name()));
        }
        Ok(self.holds(u.letters(), b))
    }
}

pub type SharedCs = Arc<dyn ConditionSet>;

/// Resolves `ex61`, `ex62` and `ex63`. `letter_cap` bounds the letters used when enumerating `ex62`.
pub fn builtin(selector: &str, letter_cap: u32) -> Result<SharedCs> {
    match selector {
        "ex61" => Ok(Arc::new(FirstLetterBit)),
        "ex62" => Ok(Arc::new(PrefixCondition::new(letter_cap)?)),
        "ex63" => Ok(Arc::new(FirstLetterAbove)),
        other => input(format!("unknown condition set `{other}`")),
    }
}

/* Built-in instances */

/// Over `{0,1}`: `u ⊨ b` iff `u(0) = b`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstLetterBit;

impl ConditionSet for FirstLetterBit {
    fn name(&self) -> String {
        "ex61".into()
    }
    fn kind(&self) -> CsKind {
        CsKind::Ex61
    }
    fn alphabet(&self) -> Alphabet {
        Alphabet::Finite(2)
    }
    fn is_valid(&self, b: &Condition) -> bool {
        matches!(b, Condition::Bit(0 | 1))
    }
    fn holds(&self, u: &[Letter], b: &Condition) -> bool {
        matches!(b, Condition::Bit(x) if u[0] == *x as Letter)
    }
    fn rank(&self, _b: &Condition) -> usize {
        0
    }
    fn distinguisher(&self, x: Letter) -> Result<Condition> {
        match x {
            0 => Ok(Condition::Bit(1)),
            1 => Ok(Condition::Bit(0)),
            _ => input(format!("letter {x} is outside {{0,1}}")),
        }
    }
    fn reduce(&self, _b: &Condition, _u: &[Letter]) -> Option<Condition> {
        None
    }
    fn enumerate(&self, limit: usize) -> Vec<Condition> {
        [Condition::Bit(0), Condition::Bit(1)]
            .into_iter()
            .take(limit)
            .collect()
    }
    fn parse_condition(&self, text: &str) -> Result<Condition> {
        match text.trim() {
            "0" => Ok(Condition::Bit(0)),
            "1" => Ok(Condition::Bit(1)),
            other => input(format!("`{other}` is not a bit")),
        }
    }
}

/// `u ⊨ b` iff `b` is a prefix of `u`; rank is the length of `b`.
#[derive(Clone, Copy, Debug)]
pub struct PrefixCondition {
    letter_cap: u32,
}

impl PrefixCondition {
    pub fn new(letter_cap: u32) -> Result<Self> {
        if letter_cap < 2 {
            return input("ex62 needs a letter cap of at least 2");
        }
        Ok(PrefixCondition { letter_cap })
    }

    pub fn letter_cap(&self) -> u32 {
        self.letter_cap
    }
}

impl ConditionSet for PrefixCondition {
    fn name(&self) -> String {
        "ex62".into()
    }
    fn kind(&self) -> CsKind {
        CsKind::Ex62
    }
    fn alphabet(&self) -> Alphabet {
        Alphabet::Omega
    }
    fn is_valid(&self, b: &Condition) -> bool {
        matches!(b, Condition::Seq(s) if !s.is_empty())
    }
    fn holds(&self, u: &[Letter], b: &Condition) -> bool {
        matches!(b, Condition::Seq(s) if u.starts_with(s.letters()))
    }
    fn rank(&self, b: &Condition) -> usize {
        match b {
            Condition::Seq(s) => s.len(),
            _ => 0,
        }
    }
    fn distinguisher(&self, x: Letter) -> Result<Condition> {
        let y = if x == 0 { 1 } else { 0 };
        Ok(Condition::Seq(FinSeq::from([y])))
    }
    fn reduce(&self, b: &Condition, u: &[Letter]) -> Option<Condition> {
        let Condition::Seq(s) = b else { return None };
        (u.len() < s.len() && s.letters().starts_with(u))
            .then(|| Condition::Seq(FinSeq::from(&s.letters()[u.len()..])))
    }
    fn enumerate(&self, limit: usize) -> Vec<Condition> {
        let mut out = Vec::with_capacity(limit);
        let mut level = vec![FinSeq::empty()];
        while out.len() < limit {
            let mut next = Vec::new();
            for s in &level {
                for x in 0..self.letter_cap {
                    let t = s.pushed(x);
                    if out.len() < limit {
                        out.push(Condition::Seq(t.clone()));
                    }
                    next.push(t);
                }
                if out.len() >= limit {
                    break;
                }
            }
            level = next;
        }
        out
    }
    fn parse_condition(&self, text: &str) -> Result<Condition> {
        let s: FinSeq = text.parse()?;
        if s.is_empty() {
            return input("ex62 conditions are non-empty sequences");
        }
        Ok(Condition::Seq(s))
    }
}

/// `u ⊨ b` iff `u(0) > b`.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstLetterAbove;

impl ConditionSet for FirstLetterAbove {
    fn name(&self) -> String {
        "ex63".into()
    }
    fn kind(&self) -> CsKind {
        CsKind::Ex63
    }
    fn alphabet(&self) -> Alphabet {
        Alphabet::Omega
    }
    fn is_valid(&self, b: &Condition) -> bool {
        matches!(b, Condition::Nat(_))
    }
    fn holds(&self, u: &[Letter], b: &Condition) -> bool {
        matches!(b, Condition::Nat(k) if u[0] > *k)
    }
    fn rank(&self, _b: &Condition) -> usize {
        0
    }
    fn distinguisher(&self, x: Letter) -> Result<Condition> {
        Ok(Condition::Nat(x))
    }
    fn reduce(&self, _b: &Condition, _u: &[Letter]) -> Option<Condition> {
        None
    }
    fn enumerate(&self, limit: usize) -> Vec<Condition> {
        (0..limit as u32).map(Condition::Nat).collect()
    }
    fn parse_condition(&self, text: &str) -> Result<Condition> {
        text.trim()
            .parse()
            .map(Condition::Nat)
            .map_err(|_| Error::Input(format!("`{}` is not a natural", text.trim())))
    }
}

/* Table-driven sets */

/// Explicit satisfaction pairs; anything not listed is unsatisfied.
#[derive(Clone, Debug)]
pub struct TableSet {
    alphabet: Alphabet,
    pairs: HashMap<(Vec<Letter>, u32), bool>,
    ranks: BTreeMap<u32, usize>,
}

#[derive(Deserialize, Serialize)]
struct TableJson {
    alphabet: Alphabet,
    pairs: Vec<(Vec<Letter>, u32, bool)>,
    #[serde(default)]
    ranks: BTreeMap<String, usize>,
}

impl TableSet {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TableJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut ranks = BTreeMap::new();
        for (k, r) in raw.ranks {
            let id: u32 = k
                .parse()
                .map_err(|_| Error::Input(format!("rank key `{k}` is not a condition id")))?;
            ranks.insert(id, r);
        }
        let mut pairs = HashMap::new();
        for (u, b, v) in raw.pairs {
            if u.is_empty() {
                return input("table pairs need non-empty sequences");
            }
            if let Some(x) = u.iter().find(|x| !raw.alphabet.contains(**x)) {
                return input(format!("letter {x} is outside the table alphabet"));
            }
            ranks.entry(b).or_insert(0);
            pairs.insert((u, b), v);
        }
        Ok(TableSet {
            alphabet: raw.alphabet,
            pairs,
            ranks,
        })
    }

    fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.ranks.keys().copied()
    }

    /// Sequences mentioned in the table.
    fn domain(&self) -> BTreeSet<Vec<Letter>> {
        self.pairs.keys().map(|(u, _)| u.clone()).collect()
    }
}

impl ConditionSet for TableSet {
    fn name(&self) -> String {
        "table".into()
    }
    fn kind(&self) -> CsKind {
        CsKind::Custom
    }
    fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
    fn is_valid(&self, b: &Condition) -> bool {
        matches!(b, Condition::Id(i) if self.ranks.contains_key(i))
    }
    fn holds(&self, u: &[Letter], b: &Condition) -> bool {
        let Condition::Id(i) = b else { return false };
        self.pairs.get(&(u.to_vec(), *i)).copied().unwrap_or(false)
    }
    fn rank(&self, b: &Condition) -> usize {
        match b {
            Condition::Id(i) => self.ranks.get(i).copied().unwrap_or(0),
            _ => 0,
        }
    }
    fn distinguisher(&self, x: Letter) -> Result<Condition> {
        self.ids()
            .find(|b| {
                !self
                    .pairs
                    .iter()
                    .any(|((u, c), v)| *v && c == b && u[0] == x)
            })
            .map(Condition::Id)
            .ok_or_else(|| Error::Input(format!("the table has no distinguisher for letter {x}")))
    }
    fn reduce(&self, b: &Condition, u: &[Letter]) -> Option<Condition> {
        let rank = self.rank(b);
        let domain = self.domain();
        self.ids()
            .filter(|c| self.ranks[c] < rank)
            .map(Condition::Id)
            .find(|c| {
                domain.iter().all(|w| {
                    let mut uw = u.to_vec();
                    uw.extend_from_slice(w);
                    self.holds(w, c) == self.holds(&uw, b)
                })
            })
    }
    fn enumerate(&self, limit: usize) -> Vec<Condition> {
        self.ids().take(limit).map(Condition::Id).collect()
    }
    fn parse_condition(&self, text: &str) -> Result<Condition> {
        let id: u32 = text
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("`{}` is not a condition id", text.trim())))?;
        let c = Condition::Id(id);
        if self.is_valid(&c) {
            Ok(c)
        } else {
            input(format!("condition {id} is not in the table"))
        }
    }
}

/* Axiom validation */

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomBudget {
    /// Longest sequence examined.
    pub max_len: usize,
    /// Letters `< letter_cap` are used.
    pub letter_cap: u32,
    /// Number of enumerated conditions examined.
    pub cond_limit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum Violation {
    /// `u ⊨ b` but the extension `v` does not.
    Monotonicity { u: FinSeq, v: FinSeq, b: Condition },
    /// `u ⊨ distinguisher(x)` although `u(0) = x`.
    Distinguishability { x: Letter, b: Condition, u: FinSeq },
    /// The distinguisher hook failed for letter `x`.
    NoDistinguisher { x: Letter, detail: String },
    /// Reduction of `b` after `u` is missing or wrong.
    Reducibility { b: Condition, u: FinSeq, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Monotonicity { u, v, b } => {
                write!(f, "monotonicity: u={u} satisfies b={b} but v={v} does not")
            }
            Violation::Distinguishability { x, b, u } => {
                write!(f, "distinguishability: x={x} b={b} satisfied by u={u}")
            }
            Violation::NoDistinguisher { x, detail } => {
                write!(f, "distinguishability: x={x}: {detail}")
            }
            Violation::Reducibility { b, u, detail } => {
                write!(f, "reducibility: b={b} u={u}: {detail}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub condition_set: String,
    pub budget: AxiomBudget,
    /// The first violations found, at most [`MAX_REPORTED`].
    pub violations: Vec<Violation>,
    pub total_violations: usize,
}

impl AxiomReport {
    pub fn is_empty(&self) -> bool {
        self.total_violations == 0
    }
}

pub const MAX_REPORTED: usize = 100;

struct Collector {
    violations: Vec<Violation>,
    total: usize,
}

impl Collector {
    fn push(&mut self, v: Violation) {
        self.total += 1;
        if self.violations.len() < MAX_REPORTED {
            self.violations.push(v);
        }
    }
}

/// Exhaustively checks the three axioms on all sequences up to the budget.
pub fn validate_axioms(cs: &dyn ConditionSet, budget: AxiomBudget) -> Result<AxiomReport> {
    if budget.max_len == 0 || budget.letter_cap == 0 || budget.cond_limit == 0 {
        return Err(Error::Precondition("budget fields must be >= 1".into()));
    }
    let letters: Vec<Letter> = cs.alphabet().letters_below(budget.letter_cap).collect();
    let conds = cs.enumerate(budget.cond_limit);
    let mut out = Collector {
        violations: Vec::new(),
        total: 0,
    };
    let walker = Walker {
        cs,
        letters: &letters,
        max_len: budget.max_len,
    };

    for b in &conds {
        let mut u = Vec::new();
        for &x in &letters {
            u.push(x);
            walker.monotone_and_reduce(&mut u, b, false, &mut out);
            u.pop();
        }
    }

    for &x in &letters {
        match cs.distinguisher(x) {
            Err(e) => out.push(Violation::NoDistinguisher {
                x,
                detail: e.to_string(),
            }),
            Ok(d) => {
                let mut u = vec![x];
                walker.distinguished(&mut u, &d, x, &mut out);
            }
        }
    }

    Ok(AxiomReport {
        condition_set: cs.name(),
        budget,
        violations: out.violations,
        total_violations: out.total,
    })
}

struct Walker<'a> {
    cs: &'a dyn ConditionSet,
    letters: &'a [Letter],
    max_len: usize,
}

impl Walker<'_> {
    /// Returns whether `u` or one of its extensions within budget satisfies `b`.
    fn monotone_and_reduce(
        &self,
        u: &mut Vec<Letter>,
        b: &Condition,
        parent_sat: bool,
        out: &mut Collector,
    ) -> bool {
        let sat = self.cs.holds(u, b);
        if parent_sat && !sat {
            out.push(Violation::Monotonicity {
                u: FinSeq::from(&u[..u.len() - 1]),
                v: FinSeq::from(&u[..]),
                b: b.clone(),
            });
        }
        let mut ext = false;
        if u.len() < self.max_len {
            for &x in self.letters {
                u.push(x);
                ext |= self.monotone_and_reduce(u, b, sat, out);
                u.pop();
            }
        }
        let reduced = self.cs.reduce(b, u);
        if !sat && ext && reduced.is_none() {
            out.push(Violation::Reducibility {
                b: b.clone(),
                u: FinSeq::from(&u[..]),
                detail: "an extension satisfies b but reduce returned none".into(),
            });
        }
        if let Some(b2) = reduced {
            self.check_reduction(u, b, &b2, out);
        }
        sat || ext
    }

    fn check_reduction(&self, u: &[Letter], b: &Condition, b2: &Condition, out: &mut Collector) {
        let fail = |detail: String| Violation::Reducibility {
            b: b.clone(),
            u: FinSeq::from(u),
            detail,
        };
        if !self.cs.is_valid(b2) {
            out.push(fail(format!("reduct {b2} is not a valid condition")));
            return;
        }
        if self.cs.rank(b2) >= self.cs.rank(b) {
            out.push(fail(format!(
                "reduct {b2} has rank {} >= {}",
                self.cs.rank(b2),
                self.cs.rank(b)
            )));
            return;
        }
        let mut w = Vec::new();
        let room = self.max_len.saturating_sub(u.len());
        if let Some(bad) = self.find_inequivalent(u, &mut w, b, b2, room) {
            out.push(fail(format!(
                "w={} separates the reduct {b2} from b after u",
                FinSeq(bad)
            )));
        }
    }

    fn find_inequivalent(
        &self,
        u: &[Letter],
        w: &mut Vec<Letter>,
        b: &Condition,
        b2: &Condition,
        room: usize,
    ) -> Option<Vec<Letter>> {
        if w.len() == room {
            return None;
        }
        for &x in self.letters {
            w.push(x);
            let mut uw = u.to_vec();
            uw.extend_from_slice(w);
            if self.cs.holds(w, b2) != self.cs.holds(&uw, b) {
                return Some(w.clone());
            }
            if let Some(bad) = self.find_inequivalent(u, w, b, b2, room) {
                return Some(bad);
            }
            w.pop();
        }
        None
    }

    fn distinguished(&self, u: &mut Vec<Letter>, d: &Condition, x: Letter, out: &mut Collector) {
        if self.cs.holds(u, d) {
            out.push(Violation::Distinguishability {
                x,
                b: d.clone(),
                u: FinSeq::from(&u[..]),
            });
        }
        if u.len() < self.max_len {
            for &y in self.letters {
                u.push(y);
                self.distinguished(u, d, x, out);
                u.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq<const N: usize>(v: [Letter; N]) -> FinSeq {
        FinSeq::from(v)
    }

    #[test]
    fn satisfies_examples() {
        let e63 = FirstLetterAbove;
        assert!(e63.satisfies(&seq([5, 0]), &Condition::Nat(4)).unwrap());
        assert!(!e63.satisfies(&seq([3]), &Condition::Nat(4)).unwrap());
        let e62 = PrefixCondition::new(4).unwrap();
        assert!(e62
            .satisfies(&seq([2, 3, 4, 9]), &Condition::Seq(seq([2, 3])))
            .unwrap());
        assert!(matches!(
            e63.satisfies(&FinSeq::empty(), &Condition::Nat(0)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(FirstLetterAbove.rank(&Condition::Nat(17)), 0);
        let e62 = PrefixCondition::new(4).unwrap();
        assert_eq!(e62.rank(&Condition::Seq(seq([4, 4, 4]))), 3);
        assert_eq!(FirstLetterBit.rank(&Condition::Bit(1)), 0);
    }

    #[test]
    fn distinguisher_examples() {
        assert_eq!(FirstLetterBit.distinguisher(0).unwrap(), Condition::Bit(1));
        assert_eq!(FirstLetterAbove.distinguisher(7).unwrap(), Condition::Nat(7));
        let e62 = PrefixCondition::new(4).unwrap();
        assert_eq!(e62.distinguisher(0).unwrap(), Condition::Seq(seq([1])));
        assert_eq!(e62.distinguisher(5).unwrap(), Condition::Seq(seq([0])));
    }

    #[test]
    fn reduce_examples() {
        let e62 = PrefixCondition::new(4).unwrap();
        assert_eq!(
            e62.reduce(&Condition::Seq(seq([2, 3, 4])), &[2]),
            Some(Condition::Seq(seq([3, 4])))
        );
        assert_eq!(FirstLetterAbove.reduce(&Condition::Nat(4), &[2]), None);
        assert_eq!(e62.reduce(&Condition::Seq(seq([2, 3])), &[9]), None);
        assert_eq!(e62.reduce(&Condition::Seq(seq([2, 3])), &[2, 3]), None);
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            FirstLetterBit.enumerate(5),
            vec![Condition::Bit(0), Condition::Bit(1)]
        );
        assert_eq!(
            FirstLetterAbove.enumerate(3),
            vec![Condition::Nat(0), Condition::Nat(1), Condition::Nat(2)]
        );
        let e62 = PrefixCondition::new(2).unwrap();
        assert_eq!(
            e62.enumerate(4),
            vec![
                Condition::Seq(seq([0])),
                Condition::Seq(seq([1])),
                Condition::Seq(seq([0, 0])),
                Condition::Seq(seq([0, 1]))
            ]
        );
    }

    #[test]
    fn builtin_sets_pass_validation() {
        let e62 = PrefixCondition::new(3).unwrap();
        let r = validate_axioms(
            &e62,
            AxiomBudget {
                max_len: 4,
                letter_cap: 3,
                cond_limit: 16,
            },
        )
        .unwrap();
        assert!(r.is_empty(), "{:?}", r.violations);
        let r = validate_axioms(
            &FirstLetterAbove,
            AxiomBudget {
                max_len: 4,
                letter_cap: 6,
                cond_limit: 8,
            },
        )
        .unwrap();
        assert!(r.is_empty(), "{:?}", r.violations);
        assert_eq!(r.budget.letter_cap, 6);
    }

    /// `u ⊨ b` iff `u(0) = b` and `u` has length one.
    #[derive(Debug)]
    struct OnlyLengthOne;

    impl ConditionSet for OnlyLengthOne {
        fn name(&self) -> String {
            "only-length-one".into()
        }
        fn kind(&self) -> CsKind {
            CsKind::Custom
        }
        fn alphabet(&self) -> Alphabet {
            Alphabet::Finite(2)
        }
        fn is_valid(&self, b: &Condition) -> bool {
            FirstLetterBit.is_valid(b)
        }
        fn holds(&self, u: &[Letter], b: &Condition) -> bool {
            u.len() == 1 && FirstLetterBit.holds(u, b)
        }
        fn rank(&self, _b: &Condition) -> usize {
            0
        }
        fn distinguisher(&self, x: Letter) -> Result<Condition> {
            FirstLetterBit.distinguisher(x)
        }
        fn reduce(&self, _b: &Condition, _u: &[Letter]) -> Option<Condition> {
            None
        }
        fn enumerate(&self, limit: usize) -> Vec<Condition> {
            FirstLetterBit.enumerate(limit)
        }
        fn parse_condition(&self, text: &str) -> Result<Condition> {
            FirstLetterBit.parse_condition(text)
        }
    }

    #[test]
    fn broken_instance_reports_monotonicity() {
        let r = validate_axioms(
            &OnlyLengthOne,
            AxiomBudget {
                max_len: 3,
                letter_cap: 2,
                cond_limit: 2,
            },
        )
        .unwrap();
        assert!(r.violations.contains(&Violation::Monotonicity {
            u: seq([0]),
            v: seq([0, 0]),
            b: Condition::Bit(0)
        }));
    }

    #[test]
    fn table_sets_load_and_validate() {
        let t = TableSet::from_json(
            r#"{"alphabet":{"finite":2},"pairs":[[[0],0,true],[[0,0],0,false]],"ranks":{"0":0,"1":0}}"#,
        )
        .unwrap();
        assert!(t.bounded_only());
        assert!(t.holds(&[0], &Condition::Id(0)));
        assert!(!t.holds(&[1], &Condition::Id(0)));
        let r = validate_axioms(
            &t,
            AxiomBudget {
                max_len: 2,
                letter_cap: 2,
                cond_limit: 2,
            },
        )
        .unwrap();
        assert!(matches!(r.violations[0], Violation::Monotonicity { .. }));
    }

    #[test]
    fn parse_conditions() {
        let e62 = PrefixCondition::new(3).unwrap();
        assert_eq!(e62.parse_condition("(0,1)").unwrap(), Condition::Seq(seq([0, 1])));
        assert!(e62.parse_condition("()").is_err());
        assert_eq!(FirstLetterAbove.parse_condition(" 4 ").unwrap(), Condition::Nat(4));
        assert!(FirstLetterBit.parse_condition("2").is_err());
    }
}
