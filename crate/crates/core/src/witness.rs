//! Separation witnesses and their verification from the generator images
//! alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::graphs::{fpc_alphabet, hnn_alphabet, ActionGraph, ComponentKind, Label, Violation};
use crate::instance::{Instance, InstanceSpec, PresentationSpec, WordSpec};
use crate::perm::Perm;
use crate::surgery::{CutEdge, Side};
use crate::words::{Factor, FpcPresentation, FpcWord, HnnPresentation, HnnWord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TranscriptEntry {
    Gamma0 { vertices: usize, copies: usize, attempts: usize, seed: u64 },
    Surgery {
        kind: ComponentKind,
        base_vertex: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        side: Option<Side>,
        n: usize,
        vertices_after: usize,
        cut: Vec<CutEdge>,
    },
    Oracle { degree: usize, candidates: u64 },
    Retraction { onto: Factor, quotient_order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub vertices: usize,
    pub images: BTreeMap<Label, Vec<usize>>,
    pub order_u: u128,
    pub order_v: u128,
    pub transcript: Vec<TranscriptEntry>,
}

/// Certificate file: the instance, the witness and how it was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub presentation: PresentationSpec,
    pub u: WordSpec,
    pub v: WordSpec,
    pub instance_hash: String,
    pub vertices: usize,
    pub images: BTreeMap<Label, Vec<usize>>,
    pub order_u: u128,
    pub order_v: u128,
    pub transcript: Vec<TranscriptEntry>,
    pub engine: serde_json::Value,
}

impl Certificate {
    pub fn new(instance: &Instance, witness: SeparationWitness, engine: serde_json::Value) -> Self {
        let spec = instance.to_spec();
        Certificate {
            instance_hash: spec.hash(),
            presentation: spec.presentation,
            u: spec.u,
            v: spec.v,
            vertices: witness.vertices,
            images: witness.images,
            order_u: witness.order_u,
            order_v: witness.order_v,
            transcript: witness.transcript,
            engine,
        }
    }

    pub fn witness(&self) -> SeparationWitness {
        SeparationWitness {
            vertices: self.vertices,
            images: self.images.clone(),
            order_u: self.order_u,
            order_v: self.order_v,
            transcript: self.transcript.clone(),
        }
    }

    pub fn instance(&self) -> InstanceSpec {
        InstanceSpec { presentation: self.presentation.clone(), u: self.u.clone(), v: self.v.clone() }
    }
}

impl SeparationWitness {
    pub fn from_graph(g: &ActionGraph, order_u: u128, order_v: u128, transcript: Vec<TranscriptEntry>) -> Self {
        SeparationWitness {
            vertices: g.vertex_count(),
            images: g.to_json().labels,
            order_u,
            order_v,
            transcript,
        }
    }
}

/// Generator images as permutations, with missing labels read as the
/// identity.
pub struct Images {
    degree: usize,
    map: BTreeMap<Label, Perm>,
}

impl Images {
    pub fn new(degree: usize, map: BTreeMap<Label, Perm>) -> Self {
        Images { degree, map }
    }

    pub fn from_witness(w: &SeparationWitness) -> Result<Self, Violation> {
        let mut map = BTreeMap::new();
        for (&l, p) in &w.images {
            let perm = (p.len() == w.vertices)
                .then(|| Perm::try_from_images(p.clone()))
                .flatten()
                .ok_or_else(|| Violation::new("images", None, format!("{l} is not a permutation of the vertices")))?;
            map.insert(l, perm);
        }
        Ok(Images { degree: w.vertices, map })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, l: Label) -> Perm {
        self.map.get(&l).cloned().unwrap_or_else(|| Perm::identity(self.degree))
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.map.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Perm)> {
        self.map.iter()
    }

    pub fn hnn_word(&self, p: &HnnPresentation, w: &HnnWord) -> Perm {
        let id = p.base().identity();
        let base = |g: usize| if g == id { Perm::identity(self.degree) } else { self.get(Label::Base(g)) };
        let t = self.get(Label::Stable);
        let t_inv = t.inverse();
        let mut acc = base(w.g0);
        for s in &w.tail {
            acc = acc.then(if s.e > 0 { &t } else { &t_inv }).then(&base(s.g));
        }
        acc
    }

    pub fn fpc_word(&self, w: &FpcWord) -> Perm {
        w.letters.iter().fold(Perm::identity(self.degree), |acc, l| {
            let label = match l.f {
                Factor::A => Label::A(l.g),
                Factor::B => Label::B(l.g),
            };
            acc.then(&self.get(label))
        })
    }
}

fn check_labels(images: &Images, expected: &[Label]) -> Result<(), Violation> {
    let have: Vec<Label> = images.labels().copied().collect();
    let mut want = expected.to_vec();
    want.sort();
    if have != want {
        return Err(Violation::new("images", None, "label set does not match the presentation"));
    }
    Ok(())
}

fn check_hom(images: &Images, grp: &crate::groups::FiniteGroup, wrap: fn(usize) -> Label, what: &str) -> Result<(), Violation> {
    let id = grp.identity();
    let img = |x: usize| if x == id { Perm::identity(images.degree()) } else { images.get(wrap(x)) };
    let all: Vec<Perm> = (0..grp.order()).map(img).collect();
    for x in 0..grp.order() {
        for y in 0..grp.order() {
            if all[x].then(&all[y]) != all[grp.mul(x, y)] {
                return Err(Violation::new(what, None, format!("{} {} is not the image of their product", wrap(x), wrap(y))));
            }
        }
    }
    Ok(())
}

pub fn verify_hnn_relations(images: &Images, p: &HnnPresentation) -> Result<(), Violation> {
    check_labels(images, &hnn_alphabet(p.base()))?;
    check_hom(images, p.base(), Label::Base, "base relations")?;
    let t = images.get(Label::Stable);
    let t_inv = t.inverse();
    let id = p.base().identity();
    for &a in p.a_sub().elements() {
        if a == id {
            continue;
        }
        let lhs = t_inv.then(&images.get(Label::Base(a))).then(&t);
        if lhs != images.get(Label::Base(p.phi().apply(a))) {
            return Err(Violation::new("stable-letter relation", None, format!("fails for a = {a}")));
        }
    }
    Ok(())
}

pub fn verify_fpc_relations(images: &Images, p: &FpcPresentation) -> Result<(), Violation> {
    check_labels(images, &fpc_alphabet(p))?;
    check_hom(images, p.a_grp(), Label::A, "A relations")?;
    check_hom(images, p.b_grp(), Label::B, "B relations")?;
    for &m in p.m_sub().elements() {
        for &n in p.n_sub().elements() {
            if m == p.a_grp().identity() || n == p.b_grp().identity() {
                continue;
            }
            let pm = images.get(Label::A(m));
            let pn = images.get(Label::B(n));
            if pm.then(&pn) != pn.then(&pm) {
                return Err(Violation::new("commutation", None, format!("a{m} and b{n} do not commute")));
            }
        }
    }
    Ok(())
}

/// Recomputes relations and both orders from the generator images.
pub fn verify_witness(w: &SeparationWitness, inst: &Instance) -> Result<(), Violation> {
    let images = Images::from_witness(w)?;
    let (pu, pv) = match inst {
        Instance::Hnn { p, u, v } => {
            verify_hnn_relations(&images, p)?;
            (images.hnn_word(p, u), images.hnn_word(p, v))
        }
        Instance::Fpc { p, u, v } => {
            verify_fpc_relations(&images, p)?;
            (images.fpc_word(u), images.fpc_word(v))
        }
    };
    let (ou, ov) = (pu.order(), pv.order());
    if ou != w.order_u {
        return Err(Violation::new("orders", None, format!("order of u is {ou}, recorded {}", w.order_u)));
    }
    if ov != w.order_v {
        return Err(Violation::new("orders", None, format!("order of v is {ov}, recorded {}", w.order_v)));
    }
    if ou == ov {
        return Err(Violation::new("orders", None, format!("both orders equal {ou}")));
    }
    Ok(())
}

/// Checks a certificate against an instance: same instance hash, then the
/// witness itself.
pub fn verify_certificate(cert: &Certificate, inst: &Instance) -> Result<(), Violation> {
    let hash = inst.to_spec().hash();
    if cert.instance_hash != hash || cert.instance().hash() != hash {
        return Err(Violation::new("instance", None, "certificate belongs to a different instance"));
    }
    verify_witness(&cert.witness(), inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteGroup, GroupIso};

    fn z4_instance() -> Instance {
        let z4 = FiniteGroup::cyclic(4);
        let a = z4.subgroup(&[0, 2]).unwrap();
        let p = HnnPresentation::new(z4, GroupIso::identity_on(a)).unwrap();
        Instance::Hnn { p, u: HnnWord::new(1, &[(1, 0)]), v: HnnWord::new(1, &[(1, 1), (1, 0)]) }
    }

    /// Base acts trivially, t is a transposition: u and v map to orders 2 and 1.
    fn small_witness() -> SeparationWitness {
        let mut images = BTreeMap::new();
        for g in 1..4 {
            images.insert(Label::Base(g), vec![0, 1]);
        }
        images.insert(Label::Stable, vec![1, 0]);
        SeparationWitness { vertices: 2, images, order_u: 2, order_v: 1, transcript: Vec::new() }
    }

    #[test]
    fn accepts_valid_and_rejects_tampered() {
        let inst = z4_instance();
        let w = small_witness();
        assert!(verify_witness(&w, &inst).is_ok());
        let mut swapped = w.clone();
        std::mem::swap(&mut swapped.order_u, &mut swapped.order_v);
        assert!(verify_witness(&swapped, &inst).is_err());
        let mut broken = w.clone();
        broken.images.insert(Label::Base(1), vec![1, 0]);
        assert!(verify_witness(&broken, &inst).is_err());
        let mut missing = w;
        missing.images.remove(&Label::Base(3));
        assert!(verify_witness(&missing, &inst).is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let inst = z4_instance();
        let cert = Certificate::new(&inst, small_witness(), serde_json::json!({"seed": 0}));
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert!(verify_certificate(&back, &inst).is_ok());
        let tampered = json.replace("\"order_u\":2", "\"order_u\":4");
        let back: Certificate = serde_json::from_str(&tampered).unwrap();
        assert!(verify_certificate(&back, &inst).is_err());
    }
}
