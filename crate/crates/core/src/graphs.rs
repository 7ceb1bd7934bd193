//! Action graphs: a finite vertex set with one permutation per generator
//! label. An edge labelled `x` runs from `p` to `act[x](p)`; walking an edge
//! backwards applies the inverse permutation. Words act on the right, the
//! leftmost letter first.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::{FiniteGroup, Subgroup};
use crate::perm::{lcm, Perm};
use crate::words::{Factor, FpcLetter, FpcPresentation, FpcWord, HnnLetter, HnnPresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("label {0} is not a permutation of the vertex set")]
    NotPermutation(String),
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("relation violated: {0}")]
    RelationViolation(String),
    #[error("paths have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("graph too large: {0} vertices")]
    TooLarge(usize),
}

/// Generator label. HNN graphs use `Base` and `Stable`; graphs of free
/// products with commutative subgroups use `A` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Base(usize),
    Stable,
    A(usize),
    B(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Base(g) => write!(f, "g{g}"),
            Label::Stable => write!(f, "t"),
            Label::A(g) => write!(f, "a{g}"),
            Label::B(g) => write!(f, "b{g}"),
        }
    }
}

impl std::str::FromStr for Label {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "t" {
            return Ok(Label::Stable);
        }
        let bad = || GraphError::UnknownLabel(s.to_string());
        let (head, rest) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        let k: usize = rest.parse().map_err(|_| bad())?;
        match head {
            "g" => Ok(Label::Base(k)),
            "a" => Ok(Label::A(k)),
            "b" => Ok(Label::B(k)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One edge traversal: a label index and a direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub label: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionGraph {
    vertices: usize,
    labels: Vec<Label>,
    act: Vec<Vec<usize>>,
    inv: Vec<Vec<usize>>,
    index: HashMap<Label, usize>,
}

/// JSON export shape: `{"vertices": n, "labels": {label: permutation}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: usize,
    pub labels: BTreeMap<Label, Vec<usize>>,
}

/// A located failure of a graph predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub property: String,
    pub vertex: Option<usize>,
    pub detail: String,
}

impl Violation {
    pub fn new(property: &str, vertex: Option<usize>, detail: impl Into<String>) -> Self {
        Violation { property: property.to_string(), vertex, detail: detail.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.vertex {
            Some(v) => write!(f, "{} at vertex {}: {}", self.property, v, self.detail),
            None => write!(f, "{}: {}", self.property, self.detail),
        }
    }
}

pub type Verdict = Result<(), Violation>;

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

fn is_bijection(p: &[usize], n: usize) -> bool {
    if p.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    p.iter().all(|&y| y < n && !std::mem::replace(&mut seen[y], true))
}

impl ActionGraph {
    pub fn new(vertices: usize, labelled: Vec<(Label, Vec<usize>)>) -> Result<Self, GraphError> {
        let mut index = HashMap::new();
        let mut labels = Vec::with_capacity(labelled.len());
        let mut act = Vec::with_capacity(labelled.len());
        for (l, p) in labelled {
            if !is_bijection(&p, vertices) {
                return Err(GraphError::NotPermutation(l.to_string()));
            }
            if index.insert(l, labels.len()).is_some() {
                return Err(GraphError::DuplicateLabel(l.to_string()));
            }
            labels.push(l);
            act.push(p);
        }
        let inv = act.iter().map(|p| invert(p)).collect();
        Ok(ActionGraph { vertices, labels, act, inv, index })
    }

    /// Builds from permutations known to be bijections (internal fast path).
    pub(crate) fn from_parts(vertices: usize, labels: Vec<Label>, act: Vec<Vec<usize>>) -> Self {
        debug_assert!(act.iter().all(|p| is_bijection(p, vertices)));
        let index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let inv = act.iter().map(|p| invert(p)).collect();
        ActionGraph { vertices, labels, act, inv, index }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_index(&self, l: Label) -> Option<usize> {
        self.index.get(&l).copied()
    }

    pub fn perm_of(&self, label: usize) -> &[usize] {
        &self.act[label]
    }

    pub(crate) fn perms(&self) -> &[Vec<usize>] {
        &self.act
    }

    #[inline]
    pub fn act(&self, label: usize, v: usize) -> usize {
        self.act[label][v]
    }

    #[inline]
    pub fn act_inv(&self, label: usize, v: usize) -> usize {
        self.inv[label][v]
    }

    #[inline]
    pub fn step(&self, v: usize, s: Step) -> usize {
        if s.forward {
            self.act[label_of(s)][v]
        } else {
            self.inv[label_of(s)][v]
        }
    }

    pub fn walk(&self, v: usize, steps: &[Step]) -> usize {
        steps.iter().fold(v, |x, &s| self.step(x, s))
    }

    /// The permutation induced by a word (rho(w)).
    pub fn word_perm(&self, steps: &[Step]) -> Perm {
        Perm::from_images((0..self.vertices).map(|v| self.walk(v, steps)).collect())
    }

    /// Replaces one permutation; used for perturbation tests.
    pub fn with_perm(&self, label: usize, perm: Vec<usize>) -> Result<Self, GraphError> {
        let mut labelled: Vec<(Label, Vec<usize>)> = self.labels.iter().copied().zip(self.act.iter().cloned()).collect();
        labelled[label].1 = perm;
        Self::new(self.vertices, labelled)
    }

    /// Neighbours of `v` across every label in both directions.
    pub fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.labels.len()).flat_map(move |l| [self.act[l][v], self.inv[l][v]])
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices,
            labels: self.labels.iter().copied().zip(self.act.iter().cloned()).collect(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, GraphError> {
        Self::new(j.vertices, j.labels.iter().map(|(l, p)| (*l, p.clone())).collect())
    }

    /// Graphviz rendering with positively oriented edges only.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph action {\n");
        for v in 0..self.vertices {
            let _ = writeln!(out, "  {v};");
        }
        for (l, p) in self.labels.iter().zip(&self.act) {
            for (v, &w) in p.iter().enumerate() {
                let _ = writeln!(out, "  {v} -> {w} [label=\"{l}\"];");
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn hnn_steps(&self, letters: &[HnnLetter]) -> Vec<Step> {
        letters
            .iter()
            .filter_map(|&l| match l {
                HnnLetter::Base(g) => self.label_index(Label::Base(g)).map(|label| Step { label, forward: true }),
                HnnLetter::Stable(e) => Some(Step { label: self.label_index(Label::Stable).expect("stable label"), forward: e > 0 }),
            })
            .collect()
    }

    pub fn fpc_steps(&self, w: &FpcWord) -> Vec<Step> {
        w.letters
            .iter()
            .filter_map(|&FpcLetter { f, g }| {
                let l = match f {
                    Factor::A => Label::A(g),
                    Factor::B => Label::B(g),
                };
                self.label_index(l).map(|label| Step { label, forward: true })
            })
            .collect()
    }
}

#[inline]
fn label_of(s: Step) -> usize {
    s.label
}

/// Labels of an HNN action graph: nonidentity base elements, then `t`.
pub fn hnn_alphabet(g: &FiniteGroup) -> Vec<Label> {
    (0..g.order())
        .filter(|&x| x != g.identity())
        .map(Label::Base)
        .chain(std::iter::once(Label::Stable))
        .collect()
}

/// Labels of an FPC action graph: nonidentity elements of A, then of B.
pub fn fpc_alphabet(p: &FpcPresentation) -> Vec<Label> {
    let a = p.a_grp();
    let b = p.b_grp();
    (0..a.order())
        .filter(|&x| x != a.identity())
        .map(Label::A)
        .chain((0..b.order()).filter(|&x| x != b.identity()).map(Label::B))
        .collect()
}

/// Orbit partition of the vertices under the permutations of a label subset.
#[derive(Debug, Clone)]
pub struct Components {
    id: Vec<u32>,
    count: usize,
}

impl Components {
    pub fn new(g: &ActionGraph, labels: &[usize]) -> Self {
        let mut id = vec![u32::MAX; g.vertex_count()];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for start in 0..g.vertex_count() {
            if id[start] != u32::MAX {
                continue;
            }
            id[start] = count;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for &l in labels {
                    for w in [g.act(l, v), g.act_inv(l, v)] {
                        if id[w] == u32::MAX {
                            id[w] = count;
                            queue.push_back(w);
                        }
                    }
                }
            }
            count += 1;
        }
        Components { id, count: count as usize }
    }

    #[inline]
    pub fn of(&self, v: usize) -> u32 {
        self.id[v]
    }

    #[inline]
    pub fn same(&self, v: usize, w: usize) -> bool {
        self.id[v] == self.id[w]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn members(&self, v: usize) -> Vec<usize> {
        let c = self.id[v];
        (0..self.id.len()).filter(|&w| self.id[w] == c).collect()
    }
}

/// Which subgroup's labels generate a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentKind {
    A,
    B,
    M,
    N,
}

/// The subgraph A(p), B(p), M(p) or N(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRef {
    pub base_vertex: usize,
    pub kind: ComponentKind,
    member: Vec<bool>,
    vertices: Vec<usize>,
}

impl ComponentRef {
    pub fn contains(&self, v: usize) -> bool {
        self.member[v]
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Orbit of `p` under the label subset.
pub fn component(g: &ActionGraph, p: usize, labels: &[usize], kind: ComponentKind) -> ComponentRef {
    let mut member = vec![false; g.vertex_count()];
    member[p] = true;
    let mut vertices = vec![p];
    let mut i = 0;
    while i < vertices.len() {
        let v = vertices[i];
        for &l in labels {
            for w in [g.act(l, v), g.act_inv(l, v)] {
                if !member[w] {
                    member[w] = true;
                    vertices.push(w);
                }
            }
        }
        i += 1;
    }
    vertices.sort_unstable();
    ComponentRef { base_vertex: p, kind, member, vertices }
}

/// Label indices of the elements of a subgroup (identity excluded).
pub fn subgroup_labels(g: &ActionGraph, sub: &Subgroup, wrap: fn(usize) -> Label) -> Vec<usize> {
    sub.elements().iter().filter_map(|&x| g.label_index(wrap(x))).collect()
}

/// Label subsets and component partitions of an HNN action graph.
#[derive(Debug, Clone)]
pub struct HnnLabels {
    pub base: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub stable: usize,
}

impl HnnLabels {
    pub fn new(g: &ActionGraph, p: &HnnPresentation) -> Self {
        HnnLabels {
            base: (0..p.base().order()).filter_map(|x| g.label_index(Label::Base(x))).collect(),
            a: subgroup_labels(g, p.a_sub(), Label::Base),
            b: subgroup_labels(g, p.b_sub(), Label::Base),
            stable: g.label_index(Label::Stable).expect("HNN graph has a stable label"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HnnComponents {
    pub a: Components,
    pub b: Components,
}

impl HnnComponents {
    pub fn new(g: &ActionGraph, p: &HnnPresentation) -> Self {
        let l = HnnLabels::new(g, p);
        HnnComponents { a: Components::new(g, &l.a), b: Components::new(g, &l.b) }
    }
}

#[derive(Debug, Clone)]
pub struct FpcLabels {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub m: Vec<usize>,
    pub n: Vec<usize>,
}

impl FpcLabels {
    pub fn new(g: &ActionGraph, p: &FpcPresentation) -> Self {
        FpcLabels {
            a: (0..p.a_grp().order()).filter_map(|x| g.label_index(Label::A(x))).collect(),
            b: (0..p.b_grp().order()).filter_map(|x| g.label_index(Label::B(x))).collect(),
            m: subgroup_labels(g, p.m_sub(), Label::A),
            n: subgroup_labels(g, p.n_sub(), Label::B),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FpcComponents {
    pub a: Components,
    pub b: Components,
    pub m: Components,
    pub n: Components,
}

impl FpcComponents {
    pub fn new(g: &ActionGraph, p: &FpcPresentation) -> Self {
        let l = FpcLabels::new(g, p);
        FpcComponents {
            a: Components::new(g, &l.a),
            b: Components::new(g, &l.b),
            m: Components::new(g, &l.m),
            n: Components::new(g, &l.n),
        }
    }
}

/// True iff every relator, spelled from every vertex, returns to its start.
pub fn verify_action_axioms(g: &ActionGraph, relators: &[Vec<Step>]) -> Verdict {
    for (r, rel) in relators.iter().enumerate() {
        for v in 0..g.vertex_count() {
            if g.walk(v, rel) != v {
                return Err(Violation::new("relator cycle", Some(v), format!("relator #{r} does not close")));
            }
        }
    }
    Ok(())
}

/// Checks that the labels named by `elem_label` realise a free right action
/// of `grp`: `x.g.h = x.(gh)`, and `x.g = x` only for `g = 1`.
fn verify_free_group_action(g: &ActionGraph, grp: &FiniteGroup, elem_label: impl Fn(usize) -> Label, what: &str) -> Verdict {
    let idx: Vec<Option<usize>> = (0..grp.order())
        .map(|x| if x == grp.identity() { None } else { g.label_index(elem_label(x)) })
        .collect();
    for x in 0..grp.order() {
        if x != grp.identity() && idx[x].is_none() {
            return Err(Violation::new(what, None, format!("missing label {}", elem_label(x))));
        }
    }
    let apply = |x: usize, v: usize| idx[x].map_or(v, |l| g.act(l, v));
    for v in 0..g.vertex_count() {
        for x in 0..grp.order() {
            let vx = apply(x, v);
            if x != grp.identity() && vx == v {
                return Err(Violation::new(what, Some(v), format!("{} fixes the vertex", elem_label(x))));
            }
            for y in 0..grp.order() {
                if apply(y, vx) != apply(grp.mul(x, y), v) {
                    return Err(Violation::new(
                        what,
                        Some(v),
                        format!("{} then {} differs from their product", elem_label(x), elem_label(y)),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Free action graph of an HNN extension: (1) labels are permutations,
/// (2) base components are Cayley graphs of the base, (3) the square
/// `a t = t phi(a)` closes at every vertex.
pub fn verify_hnn_free_axioms(g: &ActionGraph, p: &HnnPresentation) -> Verdict {
    let base = p.base();
    let stable = g
        .label_index(Label::Stable)
        .ok_or_else(|| Violation::new("labels", None, "missing stable label"))?;
    for l in hnn_alphabet(base) {
        if g.label_index(l).is_none() {
            return Err(Violation::new("labels", None, format!("missing label {l}")));
        }
    }
    verify_free_group_action(g, base, Label::Base, "base components")?;
    for &a in p.a_sub().elements() {
        if a == base.identity() {
            continue;
        }
        let la = g.label_index(Label::Base(a)).expect("checked");
        let lb = g.label_index(Label::Base(p.phi().apply(a))).expect("checked");
        for v in 0..g.vertex_count() {
            if g.act(stable, g.act(la, v)) != g.act(lb, g.act(stable, v)) {
                return Err(Violation::new("stable-letter square", Some(v), format!("a = {a}")));
            }
        }
    }
    Ok(())
}

/// Free action graph of `(A * B; [M, N])`: free A- and B-actions and
/// `M ∪ N` components that are Cayley graphs of `M x N`.
pub fn verify_fpc_free_axioms(g: &ActionGraph, p: &FpcPresentation) -> Verdict {
    verify_free_group_action(g, p.a_grp(), Label::A, "A components")?;
    verify_free_group_action(g, p.b_grp(), Label::B, "B components")?;
    let l = FpcLabels::new(g, p);
    for &m in &l.m {
        for &n in &l.n {
            for v in 0..g.vertex_count() {
                if g.act(n, g.act(m, v)) != g.act(m, g.act(n, v)) {
                    return Err(Violation::new("M x N components", Some(v), format!("{} and {} do not commute", g.labels()[m], g.labels()[n])));
                }
            }
        }
    }
    // Free action of M x N: v.m.n = v forces m = n = 1.
    let mut seen = vec![u32::MAX; g.vertex_count()];
    for v in 0..g.vertex_count() {
        let tag = v as u32;
        let ms = std::iter::once(None).chain(l.m.iter().map(Some));
        for m in ms {
            let vm = m.map_or(v, |&m| g.act(m, v));
            for n in std::iter::once(None).chain(l.n.iter().map(Some)) {
                let w = n.map_or(vm, |&n| g.act(n, vm));
                if seen[w] == tag {
                    return Err(Violation::new("M x N components", Some(v), "M x N does not act freely"));
                }
                seen[w] = tag;
            }
        }
    }
    Ok(())
}

/// Cayley graph of the permutation group generated by `images`, with
/// `act[label]` the right multiplication by the label's image.
pub fn cayley_graph(labels: &[Label], images: &[Perm], max_vertices: usize) -> Result<ActionGraph, GraphError> {
    assert_eq!(labels.len(), images.len());
    let degree = images.first().map_or(1, Perm::degree);
    let mut elems = vec![Perm::identity(degree)];
    let mut index: HashMap<Perm, usize> = HashMap::from([(elems[0].clone(), 0)]);
    let mut act = vec![Vec::new(); labels.len()];
    let mut i = 0;
    while i < elems.len() {
        for (l, img) in images.iter().enumerate() {
            let p = elems[i].then(img);
            let j = match index.get(&p) {
                Some(&j) => j,
                None => {
                    if elems.len() >= max_vertices {
                        return Err(GraphError::TooLarge(elems.len() + 1));
                    }
                    index.insert(p.clone(), elems.len());
                    elems.push(p);
                    elems.len() - 1
                }
            };
            act[l].push(j);
        }
        i += 1;
    }
    Ok(ActionGraph::from_parts(elems.len(), labels.to_vec(), act))
}

/// Length of the u-cycle through `p`: the orbit length of `p` under rho(w).
pub fn u_cycle_length(g: &ActionGraph, p: usize, steps: &[Step]) -> usize {
    let mut k = 1;
    let mut x = g.walk(p, steps);
    while x != p {
        x = g.walk(x, steps);
        k += 1;
    }
    k
}

/// Orbit length of every vertex under rho(w).
pub fn cycle_lengths(g: &ActionGraph, steps: &[Step]) -> Vec<usize> {
    g.word_perm(steps).orbit_lengths()
}

pub fn max_cycle_length(g: &ActionGraph, steps: &[Step]) -> usize {
    cycle_lengths(g, steps).into_iter().max().unwrap_or(1)
}

/// Order of rho(w): the lcm of all u-cycle lengths.
pub fn order_of_action(g: &ActionGraph, steps: &[Step]) -> u128 {
    g.word_perm(steps).cycle_lengths().into_iter().fold(1, |acc, l| lcm(acc, l as u128))
}

/// True iff every cycle length divides the maximal one.
pub fn lengths_divide_max(g: &ActionGraph, steps: &[Step]) -> bool {
    let lens = cycle_lengths(g, steps);
    let max = lens.iter().copied().max().unwrap_or(1);
    lens.iter().all(|&l| max % l == 0)
}

/// A based path of edge traversals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub start: usize,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `alpha(e_i)` for every step, followed by the final endpoint.
    pub fn vertices(&self, g: &ActionGraph) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut v = self.start;
        out.push(v);
        for &s in &self.steps {
            v = g.step(v, s);
            out.push(v);
        }
        out
    }

    pub fn end(&self, g: &ActionGraph) -> usize {
        g.walk(self.start, &self.steps)
    }

    pub fn is_closed(&self, g: &ActionGraph) -> bool {
        self.end(g) == self.start
    }

    pub fn subpath(&self, g: &ActionGraph, from: usize, len: usize) -> Path {
        let start = g.walk(self.start, &self.steps[..from]);
        Path { start, steps: self.steps[from..from + len].to_vec() }
    }
}

/// The closed path from `p` spelling `steps` until it first returns to `p`
/// at a spelling boundary.
pub fn cycle_representative(g: &ActionGraph, p: usize, steps: &[Step]) -> Path {
    let k = u_cycle_length(g, p, steps);
    let mut all = Vec::with_capacity(k * steps.len());
    for _ in 0..k {
        all.extend_from_slice(steps);
    }
    Path { start: p, steps: all }
}

/// Breadth-first distance treating every label as traversable both ways.
pub fn distance(g: &ActionGraph, p: usize, q: usize) -> Option<usize> {
    if p == q {
        return Some(0);
    }
    let mut dist = vec![usize::MAX; g.vertex_count()];
    dist[p] = 0;
    let mut queue = VecDeque::from([p]);
    while let Some(v) = queue.pop_front() {
        for w in g.neighbours(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if w == q {
                    return Some(dist[w]);
                }
                queue.push_back(w);
            }
        }
    }
    None
}

/// Reusable scratch space for many bounded breadth-first searches.
pub struct BallSearch {
    stamp: Vec<u32>,
    dist: Vec<u8>,
    generation: u32,
    queue: Vec<usize>,
}

impl BallSearch {
    pub fn new(n: usize) -> Self {
        BallSearch { stamp: vec![0; n], dist: vec![0; n], generation: 0, queue: Vec::new() }
    }

    /// Calls `visit(w, d)` for every vertex within `radius` of `p`.
    pub fn ball(&mut self, g: &ActionGraph, p: usize, radius: usize, mut visit: impl FnMut(usize, usize)) {
        self.generation += 1;
        let gen = self.generation;
        self.queue.clear();
        self.queue.push(p);
        self.stamp[p] = gen;
        self.dist[p] = 0;
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let d = self.dist[v] as usize;
            visit(v, d);
            if d == radius {
                continue;
            }
            for w in g.neighbours(v) {
                if self.stamp[w] != gen {
                    self.stamp[w] = gen;
                    self.dist[w] = (d + 1) as u8;
                    self.queue.push(w);
                }
            }
        }
    }
}

fn near_threshold(i: usize, j: usize, n: usize, l: usize) -> usize {
    let sep = i.abs_diff(j);
    sep.min(n - sep).min(l + 1)
}

/// Presence of l-near vertices on a closed path: positions `i < j` whose
/// start vertices are closer than `min(|i-j|, n-|i-j|, l+1)`.
pub fn has_l_near_vertices(g: &ActionGraph, cycle: &Path, l: usize) -> bool {
    let verts = cycle.vertices(g);
    let n = cycle.len();
    let verts = &verts[..n];
    let mut positions: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &v) in verts.iter().enumerate() {
        positions.entry(v).or_default().push(i);
    }
    if positions.values().any(|ps| ps.len() > 1) && n > 1 {
        // A repeated vertex is at distance 0 from itself.
        for ps in positions.values() {
            for a in 0..ps.len() {
                for b in a + 1..ps.len() {
                    if near_threshold(ps[a], ps[b], n, l) > 0 {
                        return true;
                    }
                }
            }
        }
    }
    let mut search = BallSearch::new(g.vertex_count());
    for (i, &v) in verts.iter().enumerate() {
        let mut found = false;
        search.ball(g, v, l, |w, d| {
            if let Some(ps) = positions.get(&w) {
                if ps.iter().any(|&j| j != i && d < near_threshold(i, j, n, l)) {
                    found = true;
                }
            }
        });
        if found {
            return true;
        }
    }
    false
}

/// Checks every u-cycle representative (one per orbit of rho(w)) for
/// l-near vertices. Returns the start vertex of an offending cycle.
pub fn cycles_near_free(g: &ActionGraph, steps: &[Step], l: usize) -> Result<(), usize> {
    let nv = g.vertex_count();
    let perm = g.word_perm(steps);
    let mut done = vec![false; nv];
    let mut pos_stamp = vec![u32::MAX; nv];
    let mut pos = vec![0usize; nv];
    let mut search = BallSearch::new(nv);
    let mut cycle_id = 0u32;
    let mut verts = Vec::new();
    for start in 0..nv {
        if done[start] {
            continue;
        }
        // Mark the orbit of rho(w) through `start`.
        let mut x = start;
        loop {
            done[x] = true;
            x = perm.apply(x);
            if x == start {
                break;
            }
        }
        verts.clear();
        let mut v = start;
        loop {
            for &s in steps {
                verts.push(v);
                v = g.step(v, s);
            }
            if v == start {
                break;
            }
        }
        let n = verts.len();
        for (i, &w) in verts.iter().enumerate() {
            if pos_stamp[w] == cycle_id {
                if near_threshold(pos[w], i, n, l) > 0 {
                    return Err(start);
                }
            }
            pos_stamp[w] = cycle_id;
            pos[w] = i;
        }
        for (i, &w) in verts.iter().enumerate() {
            let mut found = false;
            search.ball(g, w, l, |y, d| {
                if pos_stamp[y] == cycle_id {
                    let j = pos[y];
                    if j != i && d < near_threshold(i, j, n, l) {
                        found = true;
                    }
                }
            });
            if found {
                return Err(start);
            }
        }
        cycle_id += 1;
    }
    Ok(())
}

/// Stable-letter steps of a path: `(index, forward, alpha, omega)`.
fn stable_steps(g: &ActionGraph, stable: usize, s: &Path) -> Vec<(bool, usize, usize)> {
    let mut out = Vec::new();
    let mut v = s.start;
    for &st in &s.steps {
        let w = g.step(v, st);
        if st.label == stable {
            out.push((st.forward, v, w));
        }
        v = w;
    }
    out
}

/// G-nearness of two paths in an HNN action graph: equally many stable
/// steps, matched orientation, and matching A-/B-components at their ends.
pub fn g_near(g: &ActionGraph, comps: &HnnComponents, s: &Path, t: &Path) -> bool {
    let stable = match g.label_index(Label::Stable) {
        Some(l) => l,
        None => return false,
    };
    let a = stable_steps(g, stable, s);
    let b = stable_steps(g, stable, t);
    if a.is_empty() || a.len() != b.len() {
        return false;
    }
    a.iter().zip(&b).all(|(&(fa, sa, ea), &(fb, sb, eb))| {
        fa == fb
            && if fa {
                comps.a.same(sa, sb) && comps.b.same(ea, eb)
            } else {
                comps.b.same(sa, sb) && comps.a.same(ea, eb)
            }
    })
}

fn mn_same(comps: &FpcComponents, x: usize, y: usize) -> bool {
    comps.m.same(x, y) || comps.n.same(x, y)
}

/// Nearness of two equally long paths in an FPC action graph.
pub fn near(g: &ActionGraph, comps: &FpcComponents, s: &Path, t: &Path) -> Result<bool, GraphError> {
    if s.len() != t.len() {
        return Err(GraphError::LengthMismatch(s.len(), t.len()));
    }
    let vs = s.vertices(g);
    let vt = t.vertices(g);
    Ok(vs.iter().zip(&vt).all(|(&x, &y)| mn_same(comps, x, y)))
}

/// No nonempty reduced closed path of length at most `bound` starts at any
/// of the basepoints. Reduced: no two adjacent base letters, no
/// `t^-1 a t` with `a` in A and no `t b t^-1` with `b` in B (which covers
/// immediate backtracking along `t`).
pub fn girth_check(g: &ActionGraph, p: &HnnPresentation, basepoints: &[usize], bound: usize) -> Verdict {
    if bound == 0 {
        return Ok(());
    }
    let labels = HnnLabels::new(g, p);
    let base_elem: Vec<Option<usize>> = g
        .labels()
        .iter()
        .map(|l| match l {
            Label::Base(x) => Some(*x),
            _ => None,
        })
        .collect();
    let mut ctx = GirthSearch {
        g,
        p,
        labels: &labels,
        base_elem: &base_elem,
        bound,
        dist: vec![usize::MAX; g.vertex_count()],
        touched: Vec::new(),
    };
    for &root in basepoints {
        ctx.reset_dist(root);
        if let Some(len) = ctx.search(root, root, 0, Last::None) {
            return Err(Violation::new("girth", Some(root), format!("reduced closed path of length {len}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Last {
    None,
    Stable(bool),
    /// base letter `g` preceded by the stable step with the given direction
    Base(usize, Option<bool>),
}

struct GirthSearch<'a> {
    g: &'a ActionGraph,
    p: &'a HnnPresentation,
    labels: &'a HnnLabels,
    base_elem: &'a [Option<usize>],
    bound: usize,
    dist: Vec<usize>,
    touched: Vec<usize>,
}

impl GirthSearch<'_> {
    fn reset_dist(&mut self, root: usize) {
        for &v in &self.touched {
            self.dist[v] = usize::MAX;
        }
        self.touched.clear();
        self.dist[root] = 0;
        self.touched.push(root);
        let mut head = 0;
        let radius = self.bound / 2 + 1;
        while head < self.touched.len() {
            let v = self.touched[head];
            head += 1;
            let d = self.dist[v];
            if d >= radius {
                continue;
            }
            for w in self.g.neighbours(v).collect::<Vec<_>>() {
                if self.dist[w] == usize::MAX {
                    self.dist[w] = d + 1;
                    self.touched.push(w);
                }
            }
        }
    }

    fn lower_bound(&self, v: usize) -> usize {
        let d = self.dist[v];
        if d == usize::MAX {
            self.bound / 2 + 2
        } else {
            d
        }
    }

    fn search(&self, root: usize, v: usize, len: usize, last: Last) -> Option<usize> {
        if len > 0 && v == root {
            return Some(len);
        }
        if len + self.lower_bound(v).max(1) > self.bound {
            return None;
        }
        // Stable steps.
        for forward in [true, false] {
            let allowed = match last {
                Last::None => true,
                Last::Stable(prev) => prev == forward,
                Last::Base(x, Some(prev)) => {
                    prev == forward
                        || (prev && !forward && !self.p.b_sub().contains(x))
                        || (!prev && forward && !self.p.a_sub().contains(x))
                }
                Last::Base(_, None) => true,
            };
            if !allowed {
                continue;
            }
            let w = self.g.step(v, Step { label: self.labels.stable, forward });
            if let Some(found) = self.search(root, w, len + 1, Last::Stable(forward)) {
                return Some(found);
            }
        }
        // Base steps.
        if !matches!(last, Last::Base(..)) {
            let prev = match last {
                Last::Stable(f) => Some(f),
                _ => None,
            };
            for &l in &self.labels.base {
                let x = self.base_elem[l].expect("base label");
                let w = self.g.act(l, v);
                if let Some(found) = self.search(root, w, len + 1, Last::Base(x, prev)) {
                    return Some(found);
                }
            }
        }
        None
    }
}

/// No closed path `a1 b1 a2 b2` (labels alternating between A and B, all
/// nontrivial) with `a1` or `a2` outside M.
pub fn no_mixed_square(g: &ActionGraph, p: &FpcPresentation) -> Verdict {
    let l = FpcLabels::new(g, p);
    let b_comp = Components::new(g, &l.b);
    let m_labels: Vec<bool> = (0..g.labels().len()).map(|i| l.m.contains(&i)).collect();
    for v in 0..g.vertex_count() {
        for &a1 in &l.a {
            let x1 = g.act(a1, v);
            for &b1 in &l.b {
                let x2 = g.act(b1, x1);
                for &a2 in &l.a {
                    if m_labels[a1] && m_labels[a2] {
                        continue;
                    }
                    let x3 = g.act(a2, x2);
                    if x3 != v && b_comp.same(x3, v) {
                        return Err(Violation::new(
                            "mixed square",
                            Some(v),
                            format!("{} {} {} closes with a B-label", g.labels()[a1], g.labels()[b1], g.labels()[a2]),
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
