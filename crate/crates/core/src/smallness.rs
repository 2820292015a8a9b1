//! Smallness and largeness checkers with certificates: compactness,
//! superperfectness, the Cantor–Bendixson derivative and decomposition,
//! σ-boundedness, B-nowhere-density, B-meager covers and B-perfect trees.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{Condition, ConditionSet, CsKind};
use crate::error::{input, Error, Result};
use crate::tree::{Alphabet, ChildSpec, FinSeq, Letter, RegularTree, StateId};

/* Superperfect sets and the derivative */

/// States that can reach (or are) a state with an infinitely branching spec.
fn sigma_reaching(tree: &RegularTree) -> BTreeSet<StateId> {
    let sigma: BTreeSet<StateId> = tree.states().filter(|q| tree.has_infinite_spec(*q)).collect();
    tree.states()
        .filter(|q| !tree.reachable_from(*q).is_disjoint(&sigma))
        .collect()
}

/// Every node has an extension with infinitely many children.
pub fn is_superperfect(tree: &RegularTree) -> bool {
    sigma_reaching(tree).len() == tree.state_count()
}

/// Removes the nodes without an extension having infinitely many children, then prunes.
pub fn derivative(tree: &RegularTree) -> RegularTree {
    tree.restrict_to_states(&sigma_reaching(tree))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// 1-based.
    pub iteration: usize,
    pub removed: BTreeSet<StateId>,
}

/// Iterations of the derivative that removed states. A tree that is already
/// a fixpoint gets one step with nothing removed; the empty tree gets none.
/// On finite-state trees the iteration ends after at most `|states|` steps,
/// so no limit stage is ever needed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelTrace {
    pub steps: Vec<TraceStep>,
}

impl KernelTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// The compact sets `O_w ∩ [T_k]` for every node `w` of the pre-iteration tree
/// `T_k` routed to `state`, grouped into one family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedPiece {
    pub iteration: usize,
    pub state: StateId,
    /// Length-then-lex least node routed to `state` in `T_k`.
    pub anchor: FinSeq,
    /// The family member at `anchor`: the anchor path followed by the finitely branching subtree.
    pub tree: RegularTree,
    source: RegularTree,
}

impl RemovedPiece {
    /// The tree the piece was cut from.
    pub fn source(&self) -> &RegularTree {
        &self.source
    }

    /// `u` passes through `state` in the source tree, i.e. `u` belongs to the
    /// part of some family member at or below its anchor.
    pub fn owns(&self, u: &FinSeq) -> bool {
        self.source
            .route(u)
            .is_some_and(|r| r.contains(&self.state))
    }

    /// `u` is a node of some family member: it passes through `state` or
    /// has an extension that does.
    pub fn family_contains(&self, u: &FinSeq) -> bool {
        match self.source.route(u) {
            None => false,
            Some(r) => {
                r.contains(&self.state)
                    || self
                        .source
                        .reachable_from(*r.last().expect("non-empty route"))
                        .contains(&self.state)
            }
        }
    }

    /// The family member anchored at `w`, which must route to `state`.
    pub fn member_at(&self, w: &FinSeq) -> Result<RegularTree> {
        if self.source.state_at(w)? != Some(self.state) {
            return input(format!("{w} does not reach state {}", self.state));
        }
        self.source.subtree_at(self.state).prefixed(w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub kernel: RegularTree,
    pub pieces: Vec<RemovedPiece>,
    pub trace: KernelTrace,
}

/// Iterates the derivative to its fixpoint.
///
/// Every removed state that can no longer reach an infinitely branching
/// state yields a [`RemovedPiece`]. Removed states that could still reach one
/// (they die only because pruning cuts them off) get no piece: every branch
/// through them enters a piece-bearing state after finitely many steps.
pub fn cantor_bendixson(tree: &RegularTree) -> Decomposition {
    let mut current = tree.clone();
    let mut pieces = Vec::new();
    let mut trace = KernelTrace::default();
    let mut iteration = 0;
    while !current.is_empty() {
        iteration += 1;
        let next = derivative(&current);
        let kept: BTreeSet<StateId> = next.states().collect();
        let removed: BTreeSet<StateId> = current.states().filter(|q| !kept.contains(q)).collect();
        if removed.is_empty() {
            break;
        }
        let reaching = sigma_reaching(&current);
        let anchors = current.shortest_nodes();
        for q in &removed {
            if reaching.contains(q) {
                continue;
            }
            let anchor = anchors[q].clone();
            let piece_tree = current
                .subtree_at(*q)
                .prefixed(&anchor)
                .expect("anchor letters come from the tree");
            pieces.push(RemovedPiece {
                iteration,
                state: *q,
                anchor,
                tree: piece_tree,
                source: current.clone(),
            });
        }
        trace.steps.push(TraceStep { iteration, removed });
        current = next;
    }
    if trace.is_empty() && !tree.is_empty() {
        trace.steps.push(TraceStep {
            iteration: 1,
            removed: BTreeSet::new(),
        });
    }
    Decomposition {
        kernel: current,
        pieces,
        trace,
    }
}

/// `Some(pieces)` (a σ-compact cover of the body) iff the kernel is empty.
pub fn is_sigma_bounded(tree: &RegularTree) -> Option<Vec<RemovedPiece>> {
    let d = cantor_bendixson(tree);
    d.kernel.is_empty().then_some(d.pieces)
}

/// A prefix of length `out_len` extending `u` that is pointwise dominated by
/// none of `candidates[i]` for `i < out_len`: candidate `i <= len(u)` is
/// beaten at position `len(u)`, later candidates at their own index.
pub fn escape_sigma_bound(u: &FinSeq, candidates: &[Vec<Letter>], out_len: usize) -> Result<FinSeq> {
    if out_len <= u.len() {
        return input(format!("out_len {out_len} must exceed len(u) = {}", u.len()));
    }
    if let Some((i, c)) = candidates.iter().enumerate().find(|(_, c)| c.len() < out_len) {
        return input(format!("candidate {i} has length {} < {out_len}", c.len()));
    }
    let l = u.len();
    let mut g = u.0.clone();
    let first = candidates
        .iter()
        .take(l + 1)
        .map(|c| c[l] + 1)
        .max()
        .unwrap_or(0);
    g.push(first);
    for j in l + 1..out_len {
        g.push(candidates.get(j).map(|c| c[j] + 1).unwrap_or(0));
    }
    Ok(FinSeq(g))
}

/* B-nowhere-dense sets */

/// A condition per state (valid for every node routed there) or per node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    PerState(BTreeMap<StateId, Condition>),
    PerNode(#[serde(with = "node_pairs")] BTreeMap<FinSeq, Condition>),
}

/// JSON object keys must be strings, so node-keyed maps travel as pairs.
mod node_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::conditions::Condition;
    use crate::tree::FinSeq;

    pub fn serialize<S: Serializer>(m: &BTreeMap<FinSeq, Condition>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<FinSeq, Condition>, D::Error> {
        Ok(Vec::<(FinSeq, Condition)>::deserialize(d)?.into_iter().collect())
    }
}

impl Witness {
    pub fn at(&self, tree: &RegularTree, u: &FinSeq) -> Option<Condition> {
        match self {
            Witness::PerState(m) => m.get(&tree.state_at(u).ok()??).cloned(),
            Witness::PerNode(m) => m.get(u).cloned(),
        }
    }

    /// Distinct conditions used.
    pub fn conditions(&self) -> BTreeSet<Condition> {
        match self {
            Witness::PerState(m) => m.values().cloned().collect(),
            Witness::PerNode(m) => m.values().cloned().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NdBudget {
    pub node_depth: usize,
    pub cond_limit: usize,
    pub ext_depth: usize,
    /// Letters `< letter_cap`.
    pub letter_cap: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NdMode {
    Exact,
    Bounded(NdBudget),
}

/// `∀u ∈ T ∃b ∀v (u⌢v ∈ T ⇒ v ⊭ b)`.
///
/// Exact mode decides the property for the built-in condition sets and
/// returns a per-state witness. Bounded mode searches a per-node witness;
/// `None` there means "not certified", not "refuted".
pub fn is_b_nowhere_dense(
    tree: &RegularTree,
    cs: &dyn ConditionSet,
    mode: NdMode,
) -> Result<Option<Witness>> {
    match mode {
        NdMode::Exact => exact_nowhere_dense(tree, cs),
        NdMode::Bounded(b) => Ok(bounded_nowhere_dense(tree, cs, b)),
    }
}

fn exact_nowhere_dense(tree: &RegularTree, cs: &dyn ConditionSet) -> Result<Option<Witness>> {
    let mut map = BTreeMap::new();
    match cs.kind() {
        CsKind::Custom => {
            return input(format!(
                "{} is bounded-only; exact nowhere-density is not available",
                cs.name()
            ))
        }
        CsKind::Ex63 => {
            for q in tree.states() {
                let mut best = 0;
                for e in tree.edges(q) {
                    match e.spec.max_letter(tree.alphabet()) {
                        Some(m) => best = best.max(m),
                        None => return Ok(None),
                    }
                }
                map.insert(q, Condition::Nat(best));
            }
        }
        CsKind::Ex61 => {
            for q in tree.states() {
                let reads = |x: Letter| tree.edges(q).iter().any(|e| e.spec.contains(x));
                let bit = match (reads(0), reads(1)) {
                    (_, false) => 1,
                    (false, true) => 0,
                    (true, true) => return Ok(None),
                };
                map.insert(q, Condition::Bit(bit));
            }
        }
        CsKind::Ex62 => {
            for q in tree.states() {
                match shortest_escape(tree, q) {
                    Some(s) => {
                        map.insert(q, Condition::Seq(s));
                    }
                    None => return Ok(None),
                }
            }
        }
    }
    Ok(Some(Witness::PerState(map)))
}

/// The least letter no spec of `q` reads.
fn unread_letter(tree: &RegularTree, q: StateId) -> Option<Letter> {
    let mut limit: Letter = 0;
    for e in tree.edges(q) {
        limit = limit.max(match &e.spec {
            ChildSpec::Set(s) => s.iter().next_back().map_or(0, |m| m + 1),
            ChildSpec::All => 0,
            ChildSpec::Above(k) => k + 1,
        });
    }
    let bound = match tree.alphabet() {
        Alphabet::Finite(n) => n,
        Alphabet::Omega => limit + 1,
    };
    (0..bound).find(|x| !tree.edges(q).iter().any(|e| e.spec.contains(*x)))
}

/// Length-then-lex least non-empty `s` with `w⌢s ∉ T` for nodes `w` at `q`.
fn shortest_escape(tree: &RegularTree, q: StateId) -> Option<FinSeq> {
    let sub = tree.subtree_at(q);
    sub.shortest_nodes()
        .into_iter()
        .filter_map(|(r, w)| unread_letter(&sub, r).map(|x| w.pushed(x)))
        .min()
}

fn bounded_nowhere_dense(tree: &RegularTree, cs: &dyn ConditionSet, b: NdBudget) -> Option<Witness> {
    let nodes = tree
        .enumerate_nodes(b.node_depth, Some(b.letter_cap.saturating_sub(1)))
        .expect("capped enumeration never fails");
    let conds = cs.enumerate(b.cond_limit);
    let found: Option<Vec<(FinSeq, Condition)>> = nodes
        .par_iter()
        .map(|u| {
            let q = tree.state_at(u).ok()??;
            conds
                .iter()
                .find(|c| refuted_below(tree, cs, q, c, b.ext_depth, b.letter_cap).is_none())
                .map(|c| (u.clone(), c.clone()))
        })
        .collect();
    found.map(|v| Witness::PerNode(v.into_iter().collect()))
}

/// An extension `v` (`1 <= len <= depth`, letters `< cap`) of a node at `q`
/// that stays in the tree and satisfies `b`.
fn refuted_below(
    tree: &RegularTree,
    cs: &dyn ConditionSet,
    q: StateId,
    b: &Condition,
    depth: usize,
    cap: Letter,
) -> Option<FinSeq> {
    fn go(
        tree: &RegularTree,
        cs: &dyn ConditionSet,
        q: StateId,
        b: &Condition,
        v: &mut Vec<Letter>,
        depth: usize,
        cap: Letter,
    ) -> Option<FinSeq> {
        if v.len() == depth {
            return None;
        }
        for x in tree.alphabet().letters_below(cap) {
            let Some(t) = tree.successor(q, x) else { continue };
            v.push(x);
            if cs.holds(v, b) {
                return Some(FinSeq(v.clone()));
            }
            if let Some(found) = go(tree, cs, t, b, v, depth, cap) {
                return Some(found);
            }
            v.pop();
        }
        None
    }
    go(tree, cs, q, b, &mut Vec::new(), depth, cap)
}

/// A counterexample `(u, b, v)` to a witness: `u⌢v ∈ T` and `v ⊨ b = witness(u)`,
/// searched over nodes to `node_depth` and extensions to `ext_depth`.
/// A node without a witness entry is reported with an empty `v`.
pub fn find_witness_counterexample(
    tree: &RegularTree,
    cs: &dyn ConditionSet,
    witness: &Witness,
    budget: NdBudget,
) -> Option<(FinSeq, Option<Condition>, FinSeq)> {
    let nodes = tree
        .enumerate_nodes(budget.node_depth, Some(budget.letter_cap.saturating_sub(1)))
        .expect("capped enumeration never fails");
    nodes.into_iter().find_map(|u| {
        let q = tree.state_at(&u).ok()??;
        match witness.at(tree, &u) {
            None => Some((u, None, FinSeq::empty())),
            Some(b) => refuted_below(tree, cs, q, &b, budget.ext_depth, budget.letter_cap)
                .map(|v| (u, Some(b), v)),
        }
    })
}

/// Exact check that no continuation of a node at `q` satisfies `b` (built-in sets only).
pub fn state_witness_holds(
    tree: &RegularTree,
    cs: &dyn ConditionSet,
    q: StateId,
    b: &Condition,
) -> Result<bool> {
    if !cs.is_valid(b) {
        return input(format!("`{b}` is not a condition of {}", cs.name()));
    }
    match (cs.kind(), b) {
        (CsKind::Ex63, Condition::Nat(k)) => Ok(tree.edges(q).iter().all(|e| {
            e.spec
                .max_letter(tree.alphabet())
                .is_some_and(|m| m <= *k)
        })),
        (CsKind::Ex61, Condition::Bit(x)) => {
            Ok(!tree.edges(q).iter().any(|e| e.spec.contains(*x as Letter)))
        }
        (CsKind::Ex62, Condition::Seq(s)) => {
            let inside = s.letters().iter().all(|x| tree.alphabet().contains(*x))
                && tree.route_from(Some(q), s.letters()).is_some();
            Ok(!inside)
        }
        _ => input(format!("{} has no exact witness check", cs.name())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverBudget {
    /// Target nodes are checked to this depth.
    pub depth: usize,
    /// Letters `< letter_cap` when enumerating target nodes.
    pub letter_cap: u32,
    /// Used for pieces when the condition set is bounded-only.
    pub nd: NdBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    /// Per piece, the witness found (exact when available, else bounded).
    pub witnesses: Vec<Option<Witness>>,
    /// First target node outside every piece.
    pub uncovered: Option<FinSeq>,
}

impl CoverReport {
    pub fn holds(&self) -> bool {
        self.uncovered.is_none() && self.witnesses.iter().all(|w| w.is_some())
    }
}

/// Checks that `pieces` are B-nowhere-dense and cover `target` to the budget depth.
pub fn verify_b_meager_cover(
    target: &RegularTree,
    pieces: &[RegularTree],
    cs: &dyn ConditionSet,
    budget: CoverBudget,
) -> Result<CoverReport> {
    let mode = if cs.bounded_only() {
        NdMode::Bounded(budget.nd)
    } else {
        NdMode::Exact
    };
    let witnesses = pieces
        .iter()
        .map(|p| is_b_nowhere_dense(p, cs, mode))
        .collect::<Result<Vec<_>>>()?;
    let nodes = target.enumerate_nodes(budget.depth, Some(budget.letter_cap.saturating_sub(1)))?;
    let uncovered = nodes
        .into_iter()
        .find(|u| !pieces.iter().any(|p| p.contains(u.letters())));
    Ok(CoverReport {
        witnesses,
        uncovered,
    })
}

/* B-perfect trees */

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JVertex {
    /// Labelled children, kept length-then-lex sorted by label.
    pub children: Vec<(FinSeq, usize)>,
    /// Trusted to be extensible; excluded from density and leaf checks.
    #[serde(default)]
    pub frontier: bool,
}

/// A finitely presented tree on finite sequences. Vertices may be shared, so
/// a finite graph can present an infinite tree; an explicit tree is the
/// special case without sharing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JJson", into = "JJson")]
pub struct BPerfectTree {
    root: usize,
    vertices: Vec<JVertex>,
}

#[derive(Serialize, Deserialize)]
struct JJson {
    root: usize,
    vertices: Vec<JVertex>,
}

impl TryFrom<JJson> for BPerfectTree {
    type Error = Error;
    fn try_from(j: JJson) -> Result<Self> {
        BPerfectTree::new(j.root, j.vertices)
    }
}

impl From<BPerfectTree> for JJson {
    fn from(t: BPerfectTree) -> Self {
        JJson {
            root: t.root,
            vertices: t.vertices,
        }
    }
}

impl BPerfectTree {
    pub fn new(root: usize, mut vertices: Vec<JVertex>) -> Result<Self> {
        let n = vertices.len();
        if root >= n {
            return input(format!("root {root} out of range ({n} vertices)"));
        }
        for (i, v) in vertices.iter_mut().enumerate() {
            if let Some((_, c)) = v.children.iter().find(|(_, c)| *c >= n) {
                return input(format!("vertex {i} points to missing vertex {c}"));
            }
            v.children.sort();
        }
        Ok(BPerfectTree { root, vertices })
    }

    /// A root without children.
    pub fn root_only() -> Self {
        BPerfectTree {
            root: 0,
            vertices: vec![JVertex {
                children: Vec::new(),
                frontier: false,
            }],
        }
    }

    /// Adds a fresh vertex below `parent` and returns its id.
    pub fn add_child(&mut self, parent: usize, label: FinSeq, frontier: bool) -> usize {
        let id = self.add_vertex(frontier);
        self.add_edge(parent, label, id);
        id
    }

    /// Adds a vertex without linking it anywhere.
    pub fn add_vertex(&mut self, frontier: bool) -> usize {
        self.vertices.push(JVertex {
            children: Vec::new(),
            frontier,
        });
        self.vertices.len() - 1
    }

    /// Links an existing vertex below `parent`.
    pub fn add_edge(&mut self, parent: usize, label: FinSeq, child: usize) {
        let kids = &mut self.vertices[parent].children;
        kids.push((label, child));
        kids.sort();
    }

    pub fn set_frontier(&mut self, v: usize, frontier: bool) {
        self.vertices[v].frontier = frontier;
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn vertex(&self, v: usize) -> &JVertex {
        &self.vertices[v]
    }

    pub fn children(&self, v: usize) -> &[(FinSeq, usize)] {
        &self.vertices[v].children
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Vertex ids reachable from the root, root first.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.root]);
        let mut order = vec![self.root];
        let mut i = 0;
        while i < order.len() {
            for (_, c) in &self.vertices[order[i]].children {
                if seen.insert(*c) {
                    order.push(*c);
                }
            }
            i += 1;
        }
        order
    }

    /// All label tuples `(s_0, ..., s_{n-1})` with `n <= max_len`, including `()`.
    pub fn tuples(&self, max_len: usize) -> Vec<Vec<FinSeq>> {
        let mut out = vec![Vec::new()];
        let mut level = vec![(Vec::new(), self.root)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for (p, v) in &level {
                for (s, c) in &self.vertices[*v].children {
                    let mut q: Vec<FinSeq> = p.clone();
                    q.push(s.clone());
                    next.push((q, *c));
                }
            }
            out.extend(next.iter().map(|(p, _)| p.clone()));
            level = next;
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JBudget {
    pub cond_limit: usize,
    /// Extra letters allowed when extending a child label to satisfy a condition.
    pub ext_depth: usize,
    /// Letters `< letter_cap` in those extensions.
    pub letter_cap: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum JFinding {
    EmptyLabel { vertex: usize },
    /// Two sibling labels are comparable.
    Compatible { vertex: usize, a: FinSeq, b: FinSeq },
    /// No child label extends to a sequence satisfying `b`.
    NotDense { vertex: usize, b: Condition },
    Childless { vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JReport {
    pub findings: Vec<JFinding>,
    /// Reachable vertices marked as frontier (trusted, unchecked).
    pub frontier_size: usize,
    pub checked_vertices: usize,
}

impl JReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Checks sibling incompatibility everywhere, density of the child labels at
/// every non-root, non-frontier vertex, and that no non-frontier vertex is a leaf.
pub fn validate_bperfect(j: &BPerfectTree, cs: &dyn ConditionSet, budget: JBudget) -> JReport {
    let conds = cs.enumerate(budget.cond_limit);
    let letters: Vec<Letter> = cs.alphabet().letters_below(budget.letter_cap).collect();
    let mut findings = Vec::new();
    let mut frontier_size = 0;
    let reachable = j.reachable();
    for &v in &reachable {
        let vert = j.vertex(v);
        let kids = &vert.children;
        for (a, _) in kids {
            if a.is_empty() {
                findings.push(JFinding::EmptyLabel { vertex: v });
            }
        }
        for x in 0..kids.len() {
            for y in x + 1..kids.len() {
                if kids[x].0.compatible(&kids[y].0) {
                    findings.push(JFinding::Compatible {
                        vertex: v,
                        a: kids[x].0.clone(),
                        b: kids[y].0.clone(),
                    });
                }
            }
        }
        if vert.frontier {
            frontier_size += 1;
            continue;
        }
        if kids.is_empty() {
            findings.push(JFinding::Childless { vertex: v });
            continue;
        }
        if v == j.root() {
            continue;
        }
        for b in &conds {
            let dense = kids
                .iter()
                .any(|(s, _)| !s.is_empty() && extends_to_satisfy(cs, s.0.clone(), b, budget.ext_depth, &letters));
            if !dense {
                findings.push(JFinding::NotDense {
                    vertex: v,
                    b: b.clone(),
                });
            }
        }
    }
    JReport {
        findings,
        frontier_size,
        checked_vertices: reachable.len(),
    }
}

fn extends_to_satisfy(
    cs: &dyn ConditionSet,
    mut s: Vec<Letter>,
    b: &Condition,
    room: usize,
    letters: &[Letter],
) -> bool {
    if cs.holds(&s, b) {
        return true;
    }
    if room == 0 {
        return false;
    }
    for &x in letters {
        s.push(x);
        if extends_to_satisfy(cs, s.clone(), b, room - 1, letters) {
            return true;
        }
        s.pop();
    }
    false
}

/// Whether `u` is a prefix of some `s_0⌢…⌢s_n` along a path of `j`, with the
/// labels fully consumed along the way. Frontier vertices accept any rest.
pub fn bperfect_prefix_member(j: &BPerfectTree, u: &FinSeq) -> Option<Vec<FinSeq>> {
    let mut v = j.root();
    let mut rest: &[Letter] = u.letters();
    let mut segments = Vec::new();
    loop {
        if rest.is_empty() {
            return Some(segments);
        }
        let mut moved = false;
        for (s, c) in j.children(v) {
            if s.is_empty() {
                continue;
            }
            if rest.starts_with(s.letters()) {
                segments.push(s.clone());
                rest = &rest[s.len()..];
                v = *c;
                moved = true;
                break;
            }
            if s.letters().starts_with(rest) {
                return Some(segments);
            }
        }
        if !moved {
            return j.vertex(v).frontier.then_some(segments);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{FirstLetterAbove, FirstLetterBit, PrefixCondition};

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

    fn seq<const N: usize>(v: [Letter; N]) -> FinSeq {
        FinSeq::from(v)
    }

    #[test]
    fn superperfect_examples() {
        assert!(is_superperfect(&RegularTree::full(Alphabet::Omega)));
        assert!(is_superperfect(&RegularTree::empty(Alphabet::Omega)));
        assert!(!is_superperfect(&zero_branch()));
        assert!(!is_superperfect(&RegularTree::full(Alphabet::Finite(3))));
    }

    #[test]
    fn derivative_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        assert_eq!(derivative(&full), full);
        assert!(derivative(&zero_branch()).is_empty());
        let d = derivative(&two_branch());
        assert!(d.contains(&[0, 5, 9]));
        assert!(!d.contains(&[1]));
        assert_eq!(d.state_count(), 2);
    }

    #[test]
    fn derivative_prunes_sigma_nodes_whose_children_all_die() {
        let t = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [
                (0, ChildSpec::set([0]), 1),
                (0, ChildSpec::set([1]), 3),
                (1, ChildSpec::All, 2),
                (2, ChildSpec::set([0]), 2),
                (3, ChildSpec::All, 3),
            ],
        )
        .unwrap();
        let d = derivative(&t);
        assert!(!d.contains(&[0]));
        assert!(d.contains(&[1, 4]));
        let cb = cantor_bendixson(&t);
        assert_eq!(cb.trace.len(), 1);
        assert_eq!(cb.trace.steps[0].removed, BTreeSet::from([1, 2]));
        assert_eq!(cb.pieces.len(), 1);
        assert_eq!(cb.pieces[0].state, 2);
        assert_eq!(cb.pieces[0].anchor, seq([0, 0]));
        assert!(cb.pieces[0].family_contains(&seq([0])));
        assert!(cb.pieces[0].family_contains(&seq([0, 7, 0])));
        assert!(!cb.pieces[0].owns(&seq([0])));
        assert!(cb.pieces[0].owns(&seq([0, 7, 0])));
    }

    #[test]
    fn cantor_bendixson_examples() {
        let full = RegularTree::full(Alphabet::Omega);
        let cb = cantor_bendixson(&full);
        assert_eq!(cb.kernel, full);
        assert!(cb.pieces.is_empty());
        assert_eq!(cb.trace.len(), 1);

        let cb = cantor_bendixson(&zero_branch());
        assert!(cb.kernel.is_empty());
        assert_eq!(cb.pieces.len(), 1);
        assert_eq!(cb.pieces[0].tree, zero_branch());
        assert_eq!(cb.trace.len(), 1);

        let cb = cantor_bendixson(&two_branch());
        assert_eq!(cb.kernel, derivative(&two_branch()));
        assert_eq!(cb.pieces.len(), 1);
        assert!(cb.pieces[0].tree.contains(&[1, 1, 1]));
        assert!(!cb.pieces[0].tree.contains(&[0]));
        assert_eq!(cb.trace.len(), 1);

        assert!(cantor_bendixson(&RegularTree::empty(Alphabet::Omega)).trace.is_empty());
    }

    #[test]
    fn sigma_bounded_examples() {
        assert_eq!(is_sigma_bounded(&zero_branch()).unwrap().len(), 1);
        assert!(is_sigma_bounded(&RegularTree::full(Alphabet::Omega)).is_none());
        assert!(is_sigma_bounded(&RegularTree::empty(Alphabet::Omega))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn escape_examples() {
        let g = escape_sigma_bound(&FinSeq::empty(), &[vec![3, 3, 3, 3]], 4).unwrap();
        assert_eq!(g.0[0], 4);
        assert_eq!(escape_sigma_bound(&seq([9]), &[], 3).unwrap(), seq([9, 0, 0]));
        let g = escape_sigma_bound(&seq([0]), &[vec![5, 5, 5], vec![1, 7, 1]], 3).unwrap();
        assert_eq!(g, seq([0, 8, 0]));
        assert!(escape_sigma_bound(&seq([0]), &[vec![1]], 3).is_err());
    }

    #[test]
    fn nowhere_dense_examples() {
        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        let w = is_b_nowhere_dense(&k4, &FirstLetterAbove, NdMode::Exact)
            .unwrap()
            .unwrap();
        assert_eq!(w.at(&k4, &seq([1, 2])), Some(Condition::Nat(3)));
        assert!(is_b_nowhere_dense(&RegularTree::full(Alphabet::Omega), &FirstLetterAbove, NdMode::Exact)
            .unwrap()
            .is_none());
        let w = is_b_nowhere_dense(&zero_branch(), &FirstLetterBit, NdMode::Exact)
            .unwrap()
            .unwrap();
        assert_eq!(w.at(&zero_branch(), &seq([0, 0])), Some(Condition::Bit(1)));
    }

    #[test]
    fn ex62_witness_is_shortest_escape() {
        let e62 = PrefixCondition::new(3).unwrap();
        let t = RegularTree::new(
            Alphabet::Omega,
            Some(0),
            [
                (0, ChildSpec::set([0]), 1),
                (0, ChildSpec::Above(0), 0),
                (1, ChildSpec::set([0, 1]), 0),
            ],
        )
        .unwrap();
        let w = is_b_nowhere_dense(&t, &e62, NdMode::Exact).unwrap().unwrap();
        assert_eq!(w.at(&t, &FinSeq::empty()), Some(Condition::Seq(seq([0, 2]))));
        assert_eq!(w.at(&t, &seq([0])), Some(Condition::Seq(seq([2]))));
        assert!(is_b_nowhere_dense(&RegularTree::full(Alphabet::Omega), &e62, NdMode::Exact)
            .unwrap()
            .is_none());
    }

    #[test]
    fn bounded_mode_finds_node_witnesses() {
        let k4 = RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap();
        let budget = NdBudget {
            node_depth: 2,
            cond_limit: 6,
            ext_depth: 2,
            letter_cap: 6,
        };
        let w = is_b_nowhere_dense(&k4, &FirstLetterAbove, NdMode::Bounded(budget))
            .unwrap()
            .unwrap();
        assert_eq!(w.at(&k4, &seq([2])), Some(Condition::Nat(3)));
        assert!(find_witness_counterexample(&k4, &FirstLetterAbove, &w, budget).is_none());
        let small = NdBudget {
            cond_limit: 3,
            ..budget
        };
        assert!(is_b_nowhere_dense(&k4, &FirstLetterAbove, NdMode::Bounded(small))
            .unwrap()
            .is_none());
    }

    #[test]
    fn meager_cover_examples() {
        let budget = CoverBudget {
            depth: 3,
            letter_cap: 8,
            nd: NdBudget {
                node_depth: 2,
                cond_limit: 8,
                ext_depth: 2,
                letter_cap: 8,
            },
        };
        let r = verify_b_meager_cover(&zero_branch(), &[zero_branch()], &FirstLetterBit, budget).unwrap();
        assert!(r.holds());
        let r = verify_b_meager_cover(
            &RegularTree::full(Alphabet::Omega),
            &[RegularTree::full_k_ary(Alphabet::Omega, 4).unwrap()],
            &FirstLetterAbove,
            budget,
        )
        .unwrap();
        assert!(!r.holds());
        assert_eq!(r.uncovered, Some(seq([4])));
    }

    #[test]
    fn exact_mode_refuses_tables() {
        let t = crate::conditions::TableSet::from_json(
            r#"{"alphabet":"omega","pairs":[[[0],0,true]],"ranks":{}}"#,
        )
        .unwrap();
        assert!(matches!(
            is_b_nowhere_dense(&zero_branch(), &t, NdMode::Exact),
            Err(Error::Input(_))
        ));
    }

    fn fan(k: u32) -> BPerfectTree {
        let mut j = BPerfectTree::root_only();
        let top = j.add_child(0, seq([0]), false);
        for x in 0..=k {
            j.add_child(top, seq([x]), true);
        }
        j
    }

    #[test]
    fn bperfect_validation_examples() {
        let budget = JBudget {
            cond_limit: 4,
            ext_depth: 1,
            letter_cap: 8,
        };
        assert!(validate_bperfect(&fan(5), &FirstLetterAbove, budget).is_empty());
        assert_eq!(validate_bperfect(&fan(5), &FirstLetterAbove, budget).frontier_size, 6);

        let mut j = BPerfectTree::root_only();
        j.add_child(0, seq([0]), true);
        j.add_child(0, seq([0, 1]), true);
        let r = validate_bperfect(&j, &FirstLetterAbove, budget);
        assert!(matches!(r.findings[0], JFinding::Compatible { .. }));

        let mut j = BPerfectTree::root_only();
        let v = j.add_child(0, seq([0]), false);
        j.add_child(v, seq([0]), true);
        let r = validate_bperfect(&j, &FirstLetterBit, budget);
        assert_eq!(
            r.findings,
            vec![JFinding::NotDense {
                vertex: v,
                b: Condition::Bit(1)
            }]
        );
    }

    #[test]
    fn prefix_member_examples() {
        let mut j = BPerfectTree::root_only();
        let a = j.add_child(0, seq([0]), false);
        j.add_child(a, seq([1]), false);
        assert_eq!(
            bperfect_prefix_member(&j, &seq([0, 1])),
            Some(vec![seq([0]), seq([1])])
        );
        assert_eq!(bperfect_prefix_member(&j, &seq([1])), None);

        let mut j = BPerfectTree::root_only();
        j.add_child(0, seq([0]), true);
        j.add_child(0, seq([1, 0]), true);
        assert_eq!(
            bperfect_prefix_member(&j, &seq([1, 0, 0])),
            Some(vec![seq([1, 0])])
        );
        assert_eq!(bperfect_prefix_member(&j, &seq([1])), Some(vec![]));
    }

    #[test]
    fn shared_vertices_present_infinite_trees() {
        let mut j = BPerfectTree::root_only();
        let v = j.add_child(0, seq([0]), false);
        j.add_edge(v, seq([1]), v);
        j.add_edge(v, seq([2]), v);
        let long = FinSeq((0..50).map(|i| if i == 0 { 0 } else { 1 + (i % 2) }).collect());
        assert_eq!(bperfect_prefix_member(&j, &long).unwrap().len(), 50);
        assert!(validate_bperfect(
            &j,
            &FirstLetterAbove,
            JBudget {
                cond_limit: 2,
                ext_depth: 0,
                letter_cap: 4
            }
        )
        .is_empty());
    }
}
