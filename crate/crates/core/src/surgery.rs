//! Finite covers of action graphs: `n` disjoint copies with the edges that
//! cross one subgroup component rewired cyclically between copies.
//!
//! Copy `i` of vertex `v` is stored at `v + i * |V|` (copies indexed from 0
//! internally). A cut edge `(label, source)` with shift `s` sends copy `i`
//! of `source` to copy `i + s (mod n)` of its old target.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{
    component, verify_fpc_free_axioms, verify_hnn_free_axioms, ActionGraph, ComponentKind, ComponentRef, FpcLabels,
    HnnLabels, Label, Violation,
};
use crate::words::{FpcPresentation, HnnPresentation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("need at least {min} copies, got {n}")]
    TooFewCopies { n: usize, min: usize },
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("edge {label} at vertex {vertex} has both endpoints in the component")]
    DegenerateEdge { label: String, vertex: usize },
    #[error("surgery output violates the axioms: {0}")]
    AxiomViolation(Violation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Into,
    From,
}

/// One rewired edge: the label, the source vertex in the input graph, and
/// the copy shift applied to its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEdge {
    pub label: Label,
    pub source: usize,
    pub shift: i8,
}

#[derive(Debug, Clone)]
pub struct Surgered {
    pub graph: ActionGraph,
    pub cut: Vec<CutEdge>,
}

pub fn disjoint_copies(g: &ActionGraph, n: usize) -> ActionGraph {
    assert!(n >= 1, "need at least one copy");
    rewire(g, n, &[])
}

/// Projection of a vertex of an `n`-fold cover onto the input graph.
pub fn project(g: &ActionGraph, v: usize) -> usize {
    v % g.vertex_count()
}

fn rewire(g: &ActionGraph, n: usize, cut: &[(usize, usize, i8)]) -> ActionGraph {
    let nv = g.vertex_count();
    let mut act: Vec<Vec<usize>> = g
        .perms()
        .iter()
        .map(|p| (0..n).flat_map(|c| p.iter().map(move |&w| w + c * nv)).collect())
        .collect();
    for &(label, source, shift) in cut {
        let target = g.act(label, source);
        for c in 0..n {
            let to = (c as isize + shift as isize).rem_euclid(n as isize) as usize;
            act[label][source + c * nv] = target + to * nv;
        }
    }
    ActionGraph::from_parts(nv * n, g.labels().to_vec(), act)
}

fn record(g: &ActionGraph, cut: &[(usize, usize, i8)]) -> Vec<CutEdge> {
    cut.iter()
        .map(|&(l, source, shift)| CutEdge { label: g.labels()[l], source, shift })
        .collect()
}

fn check_component(g: &ActionGraph, k: &ComponentRef, labels: &[usize], kind: ComponentKind) -> Result<(), SurgeryError> {
    if k.kind != kind {
        return Err(SurgeryError::InvalidComponent(format!("expected a {kind:?}-component, got {:?}", k.kind)));
    }
    if k.base_vertex >= g.vertex_count() {
        return Err(SurgeryError::InvalidComponent(format!("vertex {} out of range", k.base_vertex)));
    }
    let actual = component(g, k.base_vertex, labels, kind);
    if actual.vertices() != k.vertices() {
        return Err(SurgeryError::InvalidComponent(format!("not the {kind:?}-orbit of vertex {}", k.base_vertex)));
    }
    Ok(())
}

/// HNN surgery. `Into`: every t-edge ending in the B-component `k` is
/// rerouted from copy `i+1` of its source to copy `i` of its target.
/// `From`: the same for every t-edge starting in the A-component `k`.
pub fn delta_hnn(g: &ActionGraph, p: &HnnPresentation, k: &ComponentRef, side: Side, n: usize) -> Result<Surgered, SurgeryError> {
    if n < 2 {
        return Err(SurgeryError::TooFewCopies { n, min: 2 });
    }
    let labels = HnnLabels::new(g, p);
    match side {
        Side::Into => check_component(g, k, &labels.b, ComponentKind::B)?,
        Side::From => check_component(g, k, &labels.a, ComponentKind::A)?,
    }
    let t = labels.stable;
    let cut: Vec<(usize, usize, i8)> = (0..g.vertex_count())
        .filter(|&x| match side {
            Side::Into => k.contains(g.act(t, x)),
            Side::From => k.contains(x),
        })
        .map(|x| (t, x, -1))
        .collect();
    let out = rewire(g, n, &cut);
    verify_hnn_free_axioms(&out, p).map_err(SurgeryError::AxiomViolation)?;
    Ok(Surgered { graph: out, cut: record(g, &cut) })
}

/// FPC surgery along an M-component (rewiring A∖M edges) or an
/// N-component (rewiring B∖N edges). Edges leaving the component move up one
/// copy, edges entering it move down one.
pub fn delta_fpc(g: &ActionGraph, p: &FpcPresentation, r: &ComponentRef, n: usize) -> Result<Surgered, SurgeryError> {
    if n < 2 {
        return Err(SurgeryError::TooFewCopies { n, min: 2 });
    }
    let labels = FpcLabels::new(g, p);
    let (sub_labels, factor_labels) = match r.kind {
        ComponentKind::M => (&labels.m, &labels.a),
        ComponentKind::N => (&labels.n, &labels.b),
        other => return Err(SurgeryError::InvalidComponent(format!("expected an M- or N-component, got {other:?}"))),
    };
    check_component(g, r, sub_labels, r.kind)?;
    let mut cut = Vec::new();
    for &l in factor_labels.iter().filter(|l| !sub_labels.contains(l)) {
        for &x in r.vertices() {
            let y = g.act(l, x);
            if r.contains(y) {
                return Err(SurgeryError::DegenerateEdge { label: g.labels()[l].to_string(), vertex: x });
            }
            cut.push((l, x, 1));
            let w = g.act_inv(l, x);
            cut.push((l, w, -1));
        }
    }
    cut.sort_unstable();
    let out = rewire(g, n, &cut);
    verify_fpc_free_axioms(&out, p).map_err(SurgeryError::AxiomViolation)?;
    Ok(Surgered { graph: out, cut: record(g, &cut) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteGroup, GroupIso};
    use crate::graphs::{cycle_lengths, Step};

    /// Z/4 with t acting by +1 on Z/4, the trivial subgroup associated to
    /// itself: the Cayley graph of Z/4 x Z/4 generated by (1,0) and (0,1).
    fn torus() -> (HnnPresentation, ActionGraph) {
        let z4 = FiniteGroup::cyclic(4);
        let p = HnnPresentation::new(z4.clone(), GroupIso::identity_on(z4.trivial_subgroup())).unwrap();
        let mut labelled = Vec::new();
        for g in 1..4 {
            labelled.push((Label::Base(g), (0..16).map(|v| 4 * (v / 4) + (v % 4 + g) % 4).collect()));
        }
        labelled.push((Label::Stable, (0..16).map(|v| (v + 4) % 16).collect()));
        (p, ActionGraph::new(16, labelled).unwrap())
    }

    #[test]
    fn copies_multiply_vertices() {
        let (p, g) = torus();
        let d = disjoint_copies(&g, 3);
        assert_eq!(d.vertex_count(), 48);
        assert!(verify_hnn_free_axioms(&d, &p).is_ok());
    }

    #[test]
    fn hnn_rewires_exactly_the_cut() {
        let (p, g) = torus();
        let labels = HnnLabels::new(&g, &p);
        let k = component(&g, 5, &labels.b, ComponentKind::B);
        assert_eq!(k.len(), 1);
        let s = delta_hnn(&g, &p, &k, Side::Into, 2).unwrap();
        assert_eq!(s.cut.len(), 1);
        let t = labels.stable;
        let changed = (0..32).filter(|&v| s.graph.act(t, v) % 16 == g.act(t, v % 16) && s.graph.act(t, v) / 16 != v / 16).count();
        assert_eq!(changed, 2);
        // The t-cycle through the cut now has twice the length.
        let tt = vec![Step { label: t, forward: true }];
        let lens = cycle_lengths(&s.graph, &tt);
        assert_eq!(lens.iter().copied().max(), Some(8));
    }

    #[test]
    fn hnn_component_kind_must_match_side() {
        let (p, g) = torus();
        let labels = HnnLabels::new(&g, &p);
        let k = component(&g, 0, &labels.b, ComponentKind::B);
        assert!(matches!(delta_hnn(&g, &p, &k, Side::From, 2), Err(SurgeryError::InvalidComponent(_))));
        assert!(matches!(delta_hnn(&g, &p, &k, Side::Into, 1), Err(SurgeryError::TooFewCopies { .. })));
    }

    #[test]
    fn fpc_regular_quotient_surgery() {
        // A = B = Z/2, M = N = 1: the regular action of Z/2 x Z/2 on itself.
        let z2 = FiniteGroup::cyclic(2);
        let p = FpcPresentation::new(z2.clone(), z2.clone(), z2.trivial_subgroup(), z2.trivial_subgroup()).unwrap();
        let g = ActionGraph::new(4, vec![(Label::A(1), vec![1, 0, 3, 2]), (Label::B(1), vec![2, 3, 0, 1])]).unwrap();
        assert!(verify_fpc_free_axioms(&g, &p).is_ok());
        let labels = FpcLabels::new(&g, &p);
        let r = component(&g, 0, &labels.m, ComponentKind::M);
        let s = delta_fpc(&g, &p, &r, 3).unwrap();
        assert_eq!(s.graph.vertex_count(), 12);
        assert_eq!(s.cut.len(), 2);
        let ab = vec![Step { label: 0, forward: true }, Step { label: 1, forward: true }];
        assert_eq!(cycle_lengths(&s.graph, &ab).into_iter().max(), Some(6));
    }
}
