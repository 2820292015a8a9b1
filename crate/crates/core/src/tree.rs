//! Finite-state pruned trees over `{0..n-1}` or over all naturals.
//!
//! A [`RegularTree`] is a deterministic automaton whose edges carry
//! [`ChildSpec`] letter sets. Every state is live and reachable, so the set
//! of finite words the automaton reads is a pruned tree and stands for the
//! closed set of its infinite branches.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

pub type Letter = u32;
pub type StateId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    /// Letters `0..n`.
    Finite(u32),
    /// All naturals.
    Omega,
}

impl Alphabet {
    pub fn contains(self, x: Letter) -> bool {
        match self {
            Alphabet::Finite(n) => x < n,
            Alphabet::Omega => true,
        }
    }

    pub fn size(self) -> Option<u32> {
        match self {
            Alphabet::Finite(n) => Some(n),
            Alphabet::Omega => None,
        }
    }

    /// Letters `< cap` that belong to the alphabet.
    pub fn letters_below(self, cap: Letter) -> std::ops::Range<Letter> {
        match self {
            Alphabet::Finite(n) => 0..n.min(cap),
            Alphabet::Omega => 0..cap,
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Finite(n) => write!(f, "finite {n}"),
            Alphabet::Omega => write!(f, "omega"),
        }
    }
}

/// A finite sequence of letters. Ordered length-first, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FinSeq(pub Vec<Letter>);

impl FinSeq {
    pub fn empty() -> Self {
        FinSeq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &FinSeq) -> bool {
        other.0.starts_with(&self.0)
    }

    /// `self ≺ other` and `self != other`.
    pub fn is_proper_prefix_of(&self, other: &FinSeq) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn compatible(&self, other: &FinSeq) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &FinSeq) -> FinSeq {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FinSeq(v)
    }

    pub fn pushed(&self, x: Letter) -> FinSeq {
        let mut v = self.0.clone();
        v.push(x);
        FinSeq(v)
    }

    /// The rest of `self` after `prefix`, if `prefix ⪯ self`.
    pub fn strip_prefix(&self, prefix: &FinSeq) -> Option<FinSeq> {
        self.0.strip_prefix(prefix.0.as_slice()).map(|s| FinSeq(s.to_vec()))
    }

    pub fn slice(&self, from: usize, to: usize) -> FinSeq {
        FinSeq(self.0[from..to].to_vec())
    }

    /// Letters joined by commas, no brackets; the empty sequence prints as `()`.
    pub fn comma_list(&self) -> String {
        if self.is_empty() {
            return "()".to_string();
        }
        self.0.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
    }
}

impl Ord for FinSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for FinSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<Letter>> for FinSeq {
    fn from(v: Vec<Letter>) -> Self {
        FinSeq(v)
    }
}

impl From<&[Letter]> for FinSeq {
    fn from(v: &[Letter]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl<const N: usize> From<[Letter; N]> for FinSeq {
    fn from(v: [Letter; N]) -> Self {
        FinSeq(v.to_vec())
    }
}

impl fmt::Display for FinSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for FinSeq {
    type Err = Error;

    /// Accepts `1,2,3`, `(1,2,3)`, `()` and the empty string.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let t = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t)
            .trim();
        if t.is_empty() {
            return Ok(FinSeq::empty());
        }
        t.split(',')
            .map(|p| {
                p.trim()
                    .parse::<Letter>()
                    .map_err(|_| Error::Input(format!("`{}` is not a letter", p.trim())))
            })
            .collect::<Result<Vec<_>>>()
            .map(FinSeq)
    }
}

/// The letters a state may read next.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChildSpec {
    Set(BTreeSet<Letter>),
    All,
    /// Every letter strictly greater than `k`.
    Above(Letter),
}

impl ChildSpec {
    pub fn set<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        ChildSpec::Set(letters.into_iter().collect())
    }

    pub fn contains(&self, x: Letter) -> bool {
        match self {
            ChildSpec::Set(s) => s.contains(&x),
            ChildSpec::All => true,
            ChildSpec::Above(k) => x > *k,
        }
    }

    /// Only `Set` is finite on its own; `All` is finite under a finite alphabet too.
    pub fn is_finite(&self) -> bool {
        matches!(self, ChildSpec::Set(_))
    }

    pub fn is_finite_under(&self, alphabet: Alphabet) -> bool {
        match self {
            ChildSpec::Set(_) => true,
            ChildSpec::All => alphabet.size().is_some(),
            ChildSpec::Above(_) => false,
        }
    }

    pub fn min_letter(&self) -> Letter {
        match self {
            ChildSpec::Set(s) => *s.iter().next().expect("set specs are non-empty"),
            ChildSpec::All => 0,
            ChildSpec::Above(k) => k + 1,
        }
    }

    /// Largest member, when the spec is finite under `alphabet`.
    pub fn max_letter(&self, alphabet: Alphabet) -> Option<Letter> {
        match (self, alphabet) {
            (ChildSpec::Set(s), _) => s.iter().next_back().copied(),
            (ChildSpec::All, Alphabet::Finite(n)) => Some(n - 1),
            _ => None,
        }
    }

    /// Members that are `<= max` and in the alphabet, ascending.
    pub fn letters_upto(&self, alphabet: Alphabet, max: Letter) -> Vec<Letter> {
        let top = match alphabet {
            Alphabet::Finite(n) => max.min(n.saturating_sub(1)),
            Alphabet::Omega => max,
        };
        if alphabet.size() == Some(0) {
            return Vec::new();
        }
        match self {
            ChildSpec::Set(s) => s.range(..=top).copied().collect(),
            ChildSpec::All => (0..=top).collect(),
            ChildSpec::Above(k) => {
                if *k >= top {
                    Vec::new()
                } else {
                    (k + 1..=top).collect()
                }
            }
        }
    }

    fn overlaps(&self, other: &ChildSpec) -> bool {
        use ChildSpec::*;
        match (self, other) {
            (Set(a), Set(b)) => a.intersection(b).next().is_some(),
            (Set(s), Above(k)) | (Above(k), Set(s)) => s.iter().any(|x| x > k),
            _ => true,
        }
    }

    fn validate(&self, alphabet: Alphabet) -> std::result::Result<(), String> {
        match self {
            ChildSpec::Set(s) => {
                if s.is_empty() {
                    return Err("empty letter set".into());
                }
                if let Some(x) = s.iter().find(|x| !alphabet.contains(**x)) {
                    return Err(format!("letter {x} is outside the alphabet ({alphabet})"));
                }
            }
            ChildSpec::All => {}
            ChildSpec::Above(k) => {
                if alphabet != Alphabet::Omega {
                    return Err(format!("above({k}) requires the omega alphabet"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ChildSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChildSpec::Set(s) => {
                let body: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                write!(f, "set{{{}}}", body.join(","))
            }
            ChildSpec::All => write!(f, "all"),
            ChildSpec::Above(k) => write!(f, "above({k})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub spec: ChildSpec,
    pub target: StateId,
}

/// A canonical finite-state pruned tree.
///
/// Construction always canonicalizes: dead states (no way to continue
/// forever) and unreachable states are dropped, so the value is either the
/// empty tree or has a live, reachable start state. State ids are kept
/// as given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TreeJson", into = "TreeJson")]
pub struct RegularTree {
    alphabet: Alphabet,
    start: Option<StateId>,
    states: BTreeMap<StateId, Vec<Edge>>,
}

impl RegularTree {
    /// Builds and canonicalizes a tree from `(src, spec, dst)` triples.
    pub fn new<I>(alphabet: Alphabet, start: Option<StateId>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (StateId, ChildSpec, StateId)>,
    {
        if alphabet.size() == Some(0) {
            return input("finite alphabets need at least one letter");
        }
        let mut states: BTreeMap<StateId, Vec<Edge>> = BTreeMap::new();
        if let Some(s) = start {
            states.entry(s).or_default();
        }
        for (src, spec, dst) in edges {
            if start.is_none() {
                return input("a tree without a start state cannot have edges");
            }
            spec.validate(alphabet)
                .map_err(|m| Error::Input(format!("edge {src} -> {dst}: {m}")))?;
            states.entry(dst).or_default();
            states.entry(src).or_default().push(Edge { spec, target: dst });
        }
        for (id, edges) in &states {
            for i in 0..edges.len() {
                for j in i + 1..edges.len() {
                    if edges[i].spec.overlaps(&edges[j].spec) {
                        return input(format!(
                            "state {id}: specs {} and {} overlap",
                            edges[i].spec, edges[j].spec
                        ));
                    }
                }
            }
        }
        let raw = RegularTree {
            alphabet,
            start,
            states,
        };
        let all: BTreeSet<StateId> = raw.states.keys().copied().collect();
        Ok(raw.restrict_to_states(&all))
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        RegularTree {
            alphabet,
            start: None,
            states: BTreeMap::new(),
        }
    }

    /// The tree of all finite sequences.
    pub fn full(alphabet: Alphabet) -> Self {
        RegularTree::new(alphabet, Some(0), [(0, ChildSpec::All, 0)]).expect("valid")
    }

    /// The tree of the single branch `x^ω`.
    pub fn constant_branch(alphabet: Alphabet, x: Letter) -> Result<Self> {
        RegularTree::new(alphabet, Some(0), [(0, ChildSpec::set([x]), 0)])
    }

    /// Every node has children `0..k`.
    pub fn full_k_ary(alphabet: Alphabet, k: u32) -> Result<Self> {
        if k == 0 {
            return input("k-ary trees need k >= 1");
        }
        RegularTree::new(alphabet, Some(0), [(0, ChildSpec::set(0..k), 0)])
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start.is_none()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states.keys().copied()
    }

    pub fn edges(&self, state: StateId) -> &[Edge] {
        self.states.get(&state).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// All `(src, spec, dst)` triples in storage order.
    pub fn edge_list(&self) -> Vec<(StateId, ChildSpec, StateId)> {
        self.states
            .iter()
            .flat_map(|(s, es)| es.iter().map(move |e| (*s, e.spec.clone(), e.target)))
            .collect()
    }

    pub fn has_infinite_spec(&self, state: StateId) -> bool {
        self.edges(state)
            .iter()
            .any(|e| !e.spec.is_finite_under(self.alphabet))
    }

    pub fn successor(&self, state: StateId, x: Letter) -> Option<StateId> {
        self.edges(state)
            .iter()
            .find(|e| e.spec.contains(x))
            .map(|e| e.target)
    }

    fn check_letters(&self, u: &[Letter]) -> Result<()> {
        match u.iter().find(|x| !self.alphabet.contains(**x)) {
            Some(x) => input(format!("letter {x} is outside the alphabet ({})", self.alphabet)),
            None => Ok(()),
        }
    }

    /// Routes `u` from the start state.
    pub fn state_at(&self, u: &FinSeq) -> Result<Option<StateId>> {
        self.check_letters(&u.0)?;
        Ok(self.route_from(self.start, &u.0))
    }

    pub(crate) fn route_from(&self, from: Option<StateId>, u: &[Letter]) -> Option<StateId> {
        let mut q = from?;
        for &x in u {
            q = self.successor(q, x)?;
        }
        Some(q)
    }

    /// States visited while reading `u`, starting with the start state.
    pub fn route(&self, u: &FinSeq) -> Option<Vec<StateId>> {
        let mut q = self.start?;
        let mut out = vec![q];
        for &x in &u.0 {
            q = self.successor(q, x)?;
            out.push(q);
        }
        Some(out)
    }

    pub fn contains_prefix(&self, u: &FinSeq) -> Result<bool> {
        Ok(self.state_at(u)?.is_some())
    }

    /// Alphabet-tolerant membership: letters outside the alphabet are simply not in the tree.
    pub fn contains(&self, u: &[Letter]) -> bool {
        u.iter().all(|x| self.alphabet.contains(*x)) && self.route_from(self.start, u).is_some()
    }

    pub fn is_finitely_branching(&self) -> bool {
        self.states
            .values()
            .flatten()
            .all(|e| e.spec.is_finite_under(self.alphabet))
    }

    /// `(f(0), ..., f(depth-1))` where `f(n)` is the largest letter read at level `n`.
    /// Levels without nodes (only in the empty tree) report 0.
    pub fn compact_bound_prefix(&self, depth: usize) -> Result<Vec<Letter>> {
        if !self.is_finitely_branching() {
            return Err(Error::Precondition(
                "compact_bound_prefix needs a finitely branching tree".into(),
            ));
        }
        let mut level: BTreeSet<StateId> = self.start.into_iter().collect();
        let mut out = Vec::with_capacity(depth);
        for _ in 0..depth {
            let mut best = 0;
            let mut next = BTreeSet::new();
            for q in &level {
                for e in self.edges(*q) {
                    best = best.max(e.spec.max_letter(self.alphabet).unwrap_or(0));
                    next.insert(e.target);
                }
            }
            out.push(best);
            level = next;
        }
        Ok(out)
    }

    /// Keeps only `keep`, then prunes dead states and drops unreachable ones.
    pub fn restrict_to_states(&self, keep: &BTreeSet<StateId>) -> RegularTree {
        let mut alive: BTreeSet<StateId> = self
            .states
            .keys()
            .copied()
            .filter(|s| keep.contains(s))
            .collect();
        loop {
            let dead: Vec<StateId> = alive
                .iter()
                .copied()
                .filter(|s| !self.edges(*s).iter().any(|e| alive.contains(&e.target)))
                .collect();
            if dead.is_empty() {
                break;
            }
            for d in dead {
                alive.remove(&d);
            }
        }
        let start = match self.start {
            Some(s) if alive.contains(&s) => s,
            _ => return RegularTree::empty(self.alphabet),
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for e in self.edges(q) {
                if alive.contains(&e.target) && seen.insert(e.target) {
                    queue.push_back(e.target);
                }
            }
        }
        let states = seen
            .iter()
            .map(|q| {
                let mut es: Vec<Edge> = self
                    .edges(*q)
                    .iter()
                    .filter(|e| seen.contains(&e.target))
                    .cloned()
                    .collect();
                es.sort_by_key(|e| e.spec.min_letter());
                (*q, es)
            })
            .collect();
        RegularTree {
            alphabet: self.alphabet,
            start: Some(start),
            states,
        }
    }

    /// States reachable from `from` (including itself).
    pub fn reachable_from(&self, from: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(q) = queue.pop_front() {
            for e in self.edges(q) {
                if seen.insert(e.target) {
                    queue.push_back(e.target);
                }
            }
        }
        seen
    }

    /// The subtree below any node that routes to `state`.
    pub fn subtree_at(&self, state: StateId) -> RegularTree {
        let moved = RegularTree {
            alphabet: self.alphabet,
            start: Some(state),
            states: self.states.clone(),
        };
        let all = moved.states.keys().copied().collect();
        moved.restrict_to_states(&all)
    }

    /// `{prefixes of u} ∪ {u⌢v : v ∈ self}`. Fresh ids above the current maximum
    /// are used for the path states.
    pub fn prefixed(&self, u: &FinSeq) -> Result<RegularTree> {
        self.check_letters(&u.0)?;
        let Some(start) = self.start else {
            return Ok(self.clone());
        };
        let base = self.states.keys().next_back().copied().unwrap_or(0) + 1;
        let mut edges = self.edge_list();
        for (i, &x) in u.0.iter().enumerate() {
            let src = base + i as StateId;
            let dst = if i + 1 == u.len() {
                start
            } else {
                src + 1
            };
            edges.push((src, ChildSpec::set([x]), dst));
        }
        let new_start = if u.is_empty() { start } else { base };
        RegularTree::new(self.alphabet, Some(new_start), edges)
    }

    /// For every state, the length-then-lex least node routed to it.
    pub fn shortest_nodes(&self) -> BTreeMap<StateId, FinSeq> {
        let mut out = BTreeMap::new();
        let Some(start) = self.start else {
            return out;
        };
        out.insert(start, FinSeq::empty());
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            let mut best: BTreeMap<StateId, Letter> = BTreeMap::new();
            for e in self.edges(q) {
                let x = e.spec.min_letter();
                best.entry(e.target)
                    .and_modify(|y| *y = (*y).min(x))
                    .or_insert(x);
            }
            let mut order: Vec<(Letter, StateId)> = best.into_iter().map(|(t, x)| (x, t)).collect();
            order.sort();
            let base = out[&q].clone();
            for (x, t) in order {
                if let std::collections::btree_map::Entry::Vacant(e) = out.entry(t) {
                    e.insert(base.pushed(x));
                    queue.push_back(t);
                }
            }
        }
        out
    }

    /// All nodes of length `<= depth` (letters `<= max_letter` when given),
    /// length-then-lex sorted. Without `max_letter` the reachable specs must be finite.
    pub fn enumerate_nodes(&self, depth: usize, max_letter: Option<Letter>) -> Result<Vec<FinSeq>> {
        let Some(start) = self.start else {
            return Ok(Vec::new());
        };
        if max_letter.is_none() && !self.is_finitely_branching() {
            return input("enumerating a tree with infinite branching needs a letter cap");
        }
        let mut out = vec![FinSeq::empty()];
        let mut level = vec![(FinSeq::empty(), start)];
        for _ in 0..depth {
            let mut next = Vec::new();
            for (u, q) in &level {
                for e in self.edges(*q) {
                    let letters = match max_letter {
                        Some(m) => e.spec.letters_upto(self.alphabet, m),
                        None => match &e.spec {
                            ChildSpec::Set(s) => s.iter().copied().collect(),
                            other => {
                                other.letters_upto(self.alphabet, self.alphabet.size().unwrap_or(1) - 1)
                            }
                        },
                    };
                    for x in letters {
                        next.push((u.pushed(x), e.target));
                    }
                }
            }
            next.sort();
            out.extend(next.iter().map(|(u, _)| u.clone()));
            level = next;
        }
        Ok(out)
    }

    /// The tree whose body is the union of the bodies of `trees` (subset construction).
    pub fn union(alphabet: Alphabet, trees: &[RegularTree]) -> Result<RegularTree> {
        if let Some(t) = trees.iter().find(|t| t.alphabet != alphabet) {
            return input(format!(
                "union over {alphabet} got a tree over {}",
                t.alphabet
            ));
        }
        let starts: BTreeSet<(usize, StateId)> = trees
            .iter()
            .enumerate()
            .filter_map(|(i, t)| t.start.map(|s| (i, s)))
            .collect();
        if starts.is_empty() {
            return Ok(RegularTree::empty(alphabet));
        }
        let atoms = letter_atoms(alphabet, trees);
        let mut ids: BTreeMap<BTreeSet<(usize, StateId)>, StateId> = BTreeMap::new();
        ids.insert(starts.clone(), 0);
        let mut queue = VecDeque::from([starts]);
        let mut edges = Vec::new();
        while let Some(macro_state) = queue.pop_front() {
            let src = ids[&macro_state];
            let mut by_target: BTreeMap<BTreeSet<(usize, StateId)>, Vec<Atom>> = BTreeMap::new();
            for atom in &atoms {
                let succ: BTreeSet<(usize, StateId)> = macro_state
                    .iter()
                    .filter_map(|(i, q)| trees[*i].successor(*q, atom.lo).map(|t| (*i, t)))
                    .collect();
                if !succ.is_empty() {
                    by_target.entry(succ).or_default().push(*atom);
                }
            }
            for (target, group) in by_target {
                let next_id = ids.len() as StateId;
                let dst = *ids.entry(target.clone()).or_insert_with(|| {
                    queue.push_back(target.clone());
                    next_id
                });
                for spec in atoms_to_specs(alphabet, &group) {
                    edges.push((src, spec, dst));
                }
            }
        }
        RegularTree::new(alphabet, Some(0), edges)
    }

    /// Line-oriented text form; see [`RegularTree::parse_text`].
    pub fn to_text(&self) -> String {
        let mut out = format!("alphabet {}\n", self.alphabet);
        if let Some(s) = self.start {
            out.push_str(&format!("start {s}\n"));
        }
        for (src, spec, dst) in self.edge_list() {
            out.push_str(&format!("edge {src} {spec} {dst}\n"));
        }
        out
    }

    /// Parses the text form, or JSON when the document starts with `{`.
    pub fn parse(text: &str) -> Result<RegularTree> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })
        } else {
            RegularTree::parse_text(text)
        }
    }

    /// ```text
    /// alphabet omega          # or: alphabet finite 3
    /// start 0
    /// edge 0 set{0,1} 1
    /// edge 0 above(1) 0
    /// edge 1 all 1
    /// ```
    pub fn parse_text(text: &str) -> Result<RegularTree> {
        let mut alphabet = None;
        let mut start = None;
        let mut edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut cur = Cursor::new(content, line_no);
            let Some(keyword) = cur.word() else { continue };
            match keyword.1.as_str() {
                "alphabet" => {
                    let kind = cur.expect_word("alphabet kind")?;
                    alphabet = Some(match kind.1.as_str() {
                        "omega" => Alphabet::Omega,
                        "finite" => {
                            let n = cur.number("alphabet size")?;
                            if n == 0 {
                                return Err(cur.error_at(kind.0, "finite alphabets need n >= 1"));
                            }
                            Alphabet::Finite(n)
                        }
                        other => {
                            return Err(cur.error_at(kind.0, format!("unknown alphabet `{other}`")))
                        }
                    });
                }
                "start" => start = Some(cur.number("start state")?),
                "edge" => {
                    let src = cur.number("source state")?;
                    let spec = cur.spec()?;
                    let dst = cur.number("target state")?;
                    edges.push((src, spec, dst));
                }
                other => {
                    return Err(cur.error_at(keyword.0, format!("unknown directive `{other}`")))
                }
            }
            cur.end()?;
        }
        let alphabet = alphabet.ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "missing `alphabet` line".into(),
        })?;
        if start.is_none() && !edges.is_empty() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "edges given but no `start` line".into(),
            });
        }
        RegularTree::new(alphabet, start, edges)
    }

    /// Graphviz form. Edges with infinite specs get a doubled arrowhead.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  rankdir=LR;\n");
        if let Some(s) = self.start {
            out.push_str("  init [shape=point];\n");
            out.push_str(&format!("  init -> s{s};\n"));
        }
        for q in self.states.keys() {
            out.push_str(&format!("  s{q} [label=\"{q}\"];\n"));
        }
        for (src, spec, dst) in self.edge_list() {
            let head = if spec.is_finite_under(self.alphabet) {
                String::new()
            } else {
                ", arrowhead=normalnormal".to_string()
            };
            out.push_str(&format!("  s{src} -> s{dst} [label=\"{spec}\"{head}];\n"));
        }
        out.push_str("}\n");
        out
    }
}

/// An interval `[lo, hi]` of letters (`hi = None` means unbounded) on which
/// every spec of a tree family behaves the same.
#[derive(Clone, Copy, Debug)]
struct Atom {
    lo: Letter,
    hi: Option<Letter>,
}

fn letter_atoms(alphabet: Alphabet, trees: &[RegularTree]) -> Vec<Atom> {
    let mut cuts = BTreeSet::from([0]);
    for t in trees {
        for e in t.states.values().flatten() {
            match &e.spec {
                ChildSpec::Set(s) => {
                    for x in s {
                        cuts.insert(*x);
                        cuts.insert(x + 1);
                    }
                }
                ChildSpec::Above(k) => {
                    cuts.insert(k + 1);
                }
                ChildSpec::All => {}
            }
        }
    }
    if let Alphabet::Finite(n) = alphabet {
        cuts.retain(|c| *c < n);
        cuts.insert(n);
    }
    let cuts: Vec<Letter> = cuts.into_iter().collect();
    let mut atoms: Vec<Atom> = cuts
        .windows(2)
        .map(|w| Atom {
            lo: w[0],
            hi: Some(w[1] - 1),
        })
        .collect();
    if alphabet == Alphabet::Omega {
        atoms.push(Atom {
            lo: *cuts.last().expect("non-empty"),
            hi: None,
        });
    }
    atoms
}

fn atoms_to_specs(alphabet: Alphabet, atoms: &[Atom]) -> Vec<ChildSpec> {
    let mut letters = BTreeSet::new();
    let mut tail = None;
    for a in atoms {
        match a.hi {
            Some(hi) => letters.extend(a.lo..=hi),
            None => tail = Some(a.lo),
        }
    }
    match (tail, alphabet) {
        (Some(lo), _) if letters.len() as u64 == lo as u64 => vec![ChildSpec::All],
        (None, Alphabet::Finite(n)) if letters.len() as u64 == n as u64 => vec![ChildSpec::All],
        (Some(lo), _) => {
            let mut v = Vec::new();
            if !letters.is_empty() {
                v.push(ChildSpec::Set(letters));
            }
            v.push(ChildSpec::Above(lo - 1));
            v
        }
        (None, _) => vec![ChildSpec::Set(letters)],
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    src: StateId,
    spec: ChildSpec,
    dst: StateId,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    alphabet: Alphabet,
    start: Option<StateId>,
    edges: Vec<EdgeJson>,
}

impl TryFrom<TreeJson> for RegularTree {
    type Error = Error;
    fn try_from(j: TreeJson) -> Result<Self> {
        RegularTree::new(
            j.alphabet,
            j.start,
            j.edges.into_iter().map(|e| (e.src, e.spec, e.dst)),
        )
    }
}

impl From<RegularTree> for TreeJson {
    fn from(t: RegularTree) -> Self {
        TreeJson {
            alphabet: t.alphabet,
            start: t.start,
            edges: t
                .edge_list()
                .into_iter()
                .map(|(src, spec, dst)| EdgeJson { src, spec, dst })
                .collect(),
        }
    }
}

/* Text-format tokenizer */

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn error_at(&self, col0: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            column: col0 + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    /// Next whitespace-delimited token and its 0-based column.
    fn word(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let begin = self.pos;
        while self.pos < self.chars.len() && !self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        (self.pos > begin).then(|| (begin, self.chars[begin..self.pos].iter().collect()))
    }

    fn expect_word(&mut self, what: &str) -> Result<(usize, String)> {
        let col = self.pos;
        self.word()
            .ok_or_else(|| self.error_at(col, format!("expected {what}")))
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let (col, w) = self.expect_word(what)?;
        w.parse()
            .map_err(|_| self.error_at(col, format!("expected {what}, found `{w}`")))
    }

    fn spec(&mut self) -> Result<ChildSpec> {
        self.skip_ws();
        let col = self.pos;
        let rest: String = self.chars[self.pos..].iter().collect();
        let close = |open: char, close: char| -> Option<usize> {
            rest.find(open)?;
            rest.find(close)
        };
        if rest.starts_with("set{") {
            let end = close('{', '}').ok_or_else(|| self.error_at(col, "unterminated `set{`"))?;
            let body = &rest[4..end];
            let mut letters = BTreeSet::new();
            for part in body.split(',') {
                let p = part.trim();
                let x: Letter = p
                    .parse()
                    .map_err(|_| self.error_at(col, format!("bad letter `{p}` in `{}`", &rest[..=end])))?;
                letters.insert(x);
            }
            self.pos += rest[..=end].chars().count();
            Ok(ChildSpec::Set(letters))
        } else if rest.starts_with("above(") {
            let end = close('(', ')').ok_or_else(|| self.error_at(col, "unterminated `above(`"))?;
            let p = rest[6..end].trim();
            let k: Letter = p
                .parse()
                .map_err(|_| self.error_at(col, format!("bad bound `{p}` in `{}`", &rest[..=end])))?;
            self.pos += rest[..=end].chars().count();
            Ok(ChildSpec::Above(k))
        } else {
            let (c, w) = self.expect_word("child spec")?;
            if w == "all" {
                Ok(ChildSpec::All)
            } else {
                Err(self.error_at(c, format!("unknown spec token `{w}`")))
            }
        }
    }

    fn end(&mut self) -> Result<()> {
        match self.word() {
            None => Ok(()),
            Some((c, w)) => Err(self.error_at(c, format!("unexpected trailing token `{w}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_branch() -> RegularTree {
        RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [
                (0, ChildSpec::set([0]), 1),
                (0, ChildSpec::set([1]), 2),
                (1, ChildSpec::All, 1),
                (2, ChildSpec::set([1]), 2),
            ],
        )
        .unwrap()
    }

    fn zero_branch() -> RegularTree {
        RegularTree::constant_branch(Alphabet::Omega, 0).unwrap()
    }

    #[test]
    fn state_at_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        assert_eq!(full.state_at(&FinSeq::from([7, 0, 42])).unwrap(), Some(0));
        assert_eq!(zero_branch().state_at(&FinSeq::from([0, 1])).unwrap(), None);
        assert_eq!(two_branch().state_at(&FinSeq::from([1, 1, 1])).unwrap(), Some(2));
        assert_eq!(full.state_at(&FinSeq::empty()).unwrap(), Some(0));
    }

    #[test]
    fn out_of_alphabet_letters_are_input_errors() {
        let t = RegularTree::full(Alphabet::Finite(2));
        assert!(matches!(t.state_at(&FinSeq::from([2])), Err(Error::Input(_))));
        assert!(!t.contains(&[2]));
    }

    #[test]
    fn contains_prefix_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        assert!(full.contains_prefix(&FinSeq::from([5, 5])).unwrap());
        assert!(zero_branch().contains_prefix(&FinSeq::from([0, 0, 0])).unwrap());
        assert!(!zero_branch().contains_prefix(&FinSeq::from([1])).unwrap());
        assert!(!RegularTree::empty(Alphabet::Omega).contains_prefix(&FinSeq::empty()).unwrap());
    }

    #[test]
    fn finitely_branching_examples() {
        assert!(RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap().is_finitely_branching());
        assert!(!RegularTree::full(Alphabet::Omega).is_finitely_branching());
        assert!(zero_branch().is_finitely_branching());
        assert!(RegularTree::full(Alphabet::Finite(3)).is_finitely_branching());
    }

    #[test]
    fn compact_bound_examples() {
        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        assert_eq!(k4.compact_bound_prefix(3).unwrap(), vec![3, 3, 3]);
        assert_eq!(zero_branch().compact_bound_prefix(5).unwrap(), vec![0; 5]);
        let t = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [(0, ChildSpec::set([2, 7]), 1), (1, ChildSpec::set([0]), 1)],
        )
        .unwrap();
        assert_eq!(t.compact_bound_prefix(2).unwrap(), vec![7, 0]);
        assert!(matches!(
            RegularTree::full(Alphabet::Omega).compact_bound_prefix(1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn restrict_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        assert_eq!(full.restrict_to_states(&BTreeSet::from([0])), full);
        assert!(two_branch().restrict_to_states(&BTreeSet::new()).is_empty());
        let r = two_branch().restrict_to_states(&BTreeSet::from([0, 2]));
        assert_eq!(r.state_count(), 2);
        assert_eq!(
            r.enumerate_nodes(3, Some(3)).unwrap(),
            vec![
                FinSeq::empty(),
                FinSeq::from([1]),
                FinSeq::from([1, 1]),
                FinSeq::from([1, 1, 1])
            ]
        );
    }

    #[test]
    fn dead_and_unreachable_states_are_dropped() {
        let t = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [
                (0, ChildSpec::set([0]), 1),
                (0, ChildSpec::set([1]), 0),
                (5, ChildSpec::All, 5),
            ],
        )
        .unwrap();
        assert_eq!(t.state_count(), 1);
        assert_eq!(t.edges(0).len(), 1);
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            zero_branch().enumerate_nodes(2, None).unwrap(),
            vec![FinSeq::empty(), FinSeq::from([0]), FinSeq::from([0, 0])]
        );
        let bin = RegularTree::full(Alphabet::Finite(2));
        assert_eq!(
            bin.enumerate_nodes(1, None).unwrap(),
            vec![FinSeq::empty(), FinSeq::from([0]), FinSeq::from([1])]
        );
        assert_eq!(
            two_branch().enumerate_nodes(2, Some(1)).unwrap(),
            vec![
                FinSeq::empty(),
                FinSeq::from([0]),
                FinSeq::from([1]),
                FinSeq::from([0, 0]),
                FinSeq::from([0, 1]),
                FinSeq::from([1, 1])
            ]
        );
        assert!(matches!(
            two_branch().enumerate_nodes(2, None),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn overlapping_specs_are_rejected() {
        let err = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [(0, ChildSpec::set([3]), 0), (0, ChildSpec::Above(2), 0)],
        );
        assert!(matches!(err, Err(Error::Input(_))));
        let err = RegularTree::new(Alphabet::Finite(3), Some(0), [(0, ChildSpec::Above(0), 0)]);
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn text_round_trip() {
        let t = two_branch();
        let back = RegularTree::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(RegularTree::parse(&json).unwrap(), t);
        let e = RegularTree::empty(Alphabet::Finite(2));
        assert_eq!(RegularTree::parse(&e.to_text()).unwrap(), e);
    }

    #[test]
    fn parse_errors_name_the_token() {
        let err = RegularTree::parse("alphabet omega\nstart 0\nedge 0 some{1} 0\n").unwrap_err();
        match err {
            Error::Parse { line, column, message } => {
                assert_eq!(line, 3);
                assert_eq!(column, 8);
                assert!(message.contains("some{1}"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_accepts_comments_and_spaces_in_sets() {
        let t = RegularTree::parse("# header\nalphabet finite 3\nstart 0 # root\nedge 0 set{0, 2} 0\n")
            .unwrap();
        assert!(t.contains(&[2, 0, 2]));
        assert!(!t.contains(&[1]));
    }

    #[test]
    fn dot_marks_infinite_edges() {
        let dot = two_branch().to_dot();
        assert!(dot.contains("s1 -> s1 [label=\"all\", arrowhead=normalnormal]"));
        assert!(dot.contains("s0 -> s2 [label=\"set{1}\"]"));
    }

    #[test]
    fn shortest_nodes_are_length_then_lex_least() {
        let t = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [
                (0, ChildSpec::Above(4), 1),
                (0, ChildSpec::set([2]), 2),
                (2, ChildSpec::set([9]), 1),
                (1, ChildSpec::All, 1),
            ],
        )
        .unwrap();
        let s = t.shortest_nodes();
        assert_eq!(s[&1], FinSeq::from([5]));
        assert_eq!(s[&2], FinSeq::from([2]));
    }

    #[test]
    fn union_of_branches() {
        let a = zero_branch();
        let b = RegularTree::constant_branch(Alphabet::Omega, 1).unwrap();
        let u = RegularTree::union(Alphabet::Omega, &[a, b]).unwrap();
        assert!(u.contains(&[0, 0, 0]));
        assert!(u.contains(&[1, 1]));
        assert!(!u.contains(&[0, 1]));
        let full = RegularTree::union(Alphabet::Omega, &[two_branch(), RegularTree::full(Alphabet::Omega)])
            .unwrap();
        for u in full.enumerate_nodes(3, Some(4)).unwrap() {
            assert!(RegularTree::full(Alphabet::Omega).contains(u.letters()));
        }
        assert_eq!(full.enumerate_nodes(2, Some(2)).unwrap().len(), 13);
    }

    #[test]
    fn prefixed_adds_a_path() {
        let t = zero_branch().prefixed(&FinSeq::from([3, 4])).unwrap();
        assert!(t.contains(&[3, 4, 0, 0]));
        assert!(t.contains(&[3]));
        assert!(!t.contains(&[4]));
        assert!(t.is_finitely_branching());
    }
}
