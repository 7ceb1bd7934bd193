//! Presentations, random free action graphs and random words shared by the
//! integration suites.
#![allow(dead_code)]

use std::collections::HashMap;
use std::io::Write;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ordsep::graphs::{fpc_alphabet, hnn_alphabet, ActionGraph, Label, Step};
use ordsep::groups::{FiniteGroup, GroupIso};
use ordsep::oracle::{equivariant_bijections, fpc_block_action, random_hom, subgroup_generators};
use ordsep::perm::Perm;
use ordsep::surgery::CutEdge;
use ordsep::words::{Factor, FpcLetter, FpcPresentation, FpcWord, HnnPresentation, HnnWord};

/// Writes a criterion verdict past the test harness's output capture.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion}: {verdict} ({detail})");
}

fn elements_of_order(g: &FiniteGroup, k: usize) -> Vec<usize> {
    (0..g.order()).filter(|&x| g.element_order(x) == k).collect()
}

fn hnn(g: FiniteGroup, a: &[usize], pairs: &[(usize, usize)]) -> HnnPresentation {
    let b: Vec<usize> = pairs.iter().map(|&(_, y)| y).collect();
    let a_sub = g.subgroup(a).unwrap();
    let b_sub = g.subgroup(&b).unwrap();
    let iso = GroupIso::from_pairs(a_sub, b_sub, pairs).unwrap();
    HnnPresentation::new(g, iso).unwrap()
}

/// HNN extensions over base groups of order at most 8.
pub fn hnn_presentations() -> Vec<HnnPresentation> {
    let mut out = vec![
        hnn(FiniteGroup::cyclic(4), &[0, 2], &[(0, 0), (2, 2)]),
        hnn(FiniteGroup::cyclic(3), &[0], &[(0, 0)]),
        hnn(FiniteGroup::cyclic(6), &[0, 3], &[(0, 0), (3, 3)]),
        hnn(FiniteGroup::cyclic(8), &[0, 2, 4, 6], &[(0, 0), (2, 6), (4, 4), (6, 2)]),
        hnn(FiniteGroup::cyclic(5), &[0, 1, 2, 3, 4], &[(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)]),
    ];
    let s3 = FiniteGroup::symmetric3();
    let inv = elements_of_order(&s3, 2);
    let e = s3.identity();
    out.push(hnn(s3, &[e, inv[0]], &[(e, e), (inv[0], inv[1])]));
    let v4 = FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2));
    let inv = elements_of_order(&v4, 2);
    let e = v4.identity();
    out.push(hnn(v4, &[e, inv[0]], &[(e, e), (inv[0], inv[1])]));
    let d8 = FiniteGroup::dihedral(4);
    let e = d8.identity();
    let z = (0..8).find(|&x| x != e && (0..8).all(|y| d8.mul(x, y) == d8.mul(y, x))).unwrap();
    out.push(hnn(d8, &[e, z], &[(e, e), (z, z)]));
    out
}

fn fpc(a: FiniteGroup, b: FiniteGroup, m: &[usize], n: &[usize]) -> FpcPresentation {
    let ms = a.subgroup_closure(m);
    let ns = b.subgroup_closure(n);
    FpcPresentation::new(a, b, ms, ns).unwrap()
}

pub fn z4_fpc() -> FpcPresentation {
    fpc(FiniteGroup::cyclic(4), FiniteGroup::cyclic(4), &[2], &[2])
}

/// Free products with commuting subgroups over small factors.
pub fn fpc_presentations() -> Vec<FpcPresentation> {
    let s3 = FiniteGroup::symmetric3();
    let r = elements_of_order(&s3, 3)[0];
    let s = elements_of_order(&s3, 2)[0];
    vec![
        z4_fpc(),
        fpc(FiniteGroup::cyclic(2), FiniteGroup::cyclic(3), &[], &[]),
        fpc(FiniteGroup::cyclic(4), FiniteGroup::cyclic(2), &[2], &[]),
        fpc(FiniteGroup::cyclic(6), FiniteGroup::cyclic(4), &[3], &[2]),
        fpc(s3.clone(), FiniteGroup::cyclic(2), &[r], &[]),
        fpc(s3, FiniteGroup::cyclic(3), &[s], &[]),
    ]
}

/// A free action graph with `k` regular base orbits and a random stable
/// letter compatible with the associated subgroups.
pub fn random_hnn_graph(p: &HnnPresentation, k: usize, rng: &mut ChaCha8Rng) -> ActionGraph {
    let g = p.base();
    let d = k * g.order();
    let rho = random_hom(g, &[g.trivial_subgroup()], d, rng);
    let a_gens = subgroup_generators(g, p.a_sub());
    let src: Vec<Perm> = a_gens.iter().map(|&a| rho[a].clone()).collect();
    let dst: Vec<Perm> = a_gens.iter().map(|&a| rho[p.phi().apply(a)].clone()).collect();
    let mut tau = None;
    let _ = equivariant_bijections(&src, &dst, d, Some(rng), &mut |t| {
        tau = Some(t.clone());
        ControlFlow::Break(())
    });
    let tau = tau.expect("free actions of A and B on equally many points are equivalent");
    let labelled = hnn_alphabet(g)
        .into_iter()
        .map(|l| match l {
            Label::Base(x) => (l, rho[x].images().to_vec()),
            _ => (l, tau.images().to_vec()),
        })
        .collect();
    ActionGraph::new(d, labelled).unwrap()
}

/// A free action graph of the free product built from `k` blocks of
/// `M x N`, or `None` if `k` blocks cannot be glued.
pub fn random_fpc_graph(p: &FpcPresentation, k: usize, rng: &mut ChaCha8Rng) -> Option<ActionGraph> {
    let (ra, rb) = fpc_block_action(p, k, rng)?;
    let d = ra[0].degree();
    let mut sigma: Vec<usize> = (0..d).collect();
    sigma.shuffle(rng);
    let sigma = Perm::from_images(sigma);
    let inv = sigma.inverse();
    let conj = |q: &Perm| inv.then(q).then(&sigma).images().to_vec();
    let labelled = fpc_alphabet(p)
        .into_iter()
        .map(|l| match l {
            Label::A(x) => (l, conj(&ra[x])),
            Label::B(x) => (l, conj(&rb[x])),
            _ => unreachable!(),
        })
        .collect();
    Some(ActionGraph::new(d, labelled).unwrap())
}

/// Block counts for which `random_fpc_graph` succeeds, up to `max_vertices`.
pub fn fpc_block_counts(p: &FpcPresentation, max_vertices: usize) -> Vec<usize> {
    let (mm, nn) = (p.m_sub().len(), p.n_sub().len());
    let (q, r) = (p.a_grp().order() / mm, p.b_grp().order() / nn);
    (1..=max_vertices / (mm * nn)).filter(|k| (k * nn) % q == 0 && (k * mm) % r == 0).collect()
}

/// A random HNN word with `len` stable letters.
pub fn random_hnn_word(p: &HnnPresentation, len: usize, rng: &mut ChaCha8Rng) -> HnnWord {
    let n = p.base().order();
    let tail: Vec<(i8, usize)> = (0..len).map(|_| (if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(0..n))).collect();
    HnnWord::new(rng.gen_range(0..n), &tail)
}

/// A random FPC word of `len` letters alternating between the factors.
pub fn random_fpc_word(p: &FpcPresentation, len: usize, rng: &mut ChaCha8Rng) -> FpcWord {
    let mut f = if rng.gen_bool(0.5) { Factor::A } else { Factor::B };
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let order = p.group(f).order();
        letters.push(FpcLetter { f, g: rng.gen_range(1..order) });
        f = f.other();
    }
    FpcWord { letters }
}

/// A random word in the letters outside M and N, alternating factors.
pub fn random_hyperbolic_fpc_word(p: &FpcPresentation, len: usize, rng: &mut ChaCha8Rng) -> FpcWord {
    let mut f = Factor::A;
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        let choices: Vec<usize> = (0..p.group(f).order()).filter(|&x| !p.commuting(f).contains(x)).collect();
        letters.push(FpcLetter { f, g: *choices.choose(rng).unwrap() });
        f = f.other();
    }
    FpcWord { letters }
}

/// Net copy shift accumulated by the closed path `steps` from `x`, given
/// the rewired edges of a surgery on `g`.
pub fn net_shift(g: &ActionGraph, cut: &[CutEdge], x: usize, steps: &[Step]) -> i64 {
    let shifts: HashMap<(usize, usize), i64> = cut
        .iter()
        .map(|c| ((g.label_index(c.label).unwrap(), c.source), i64::from(c.shift)))
        .collect();
    let mut v = x;
    let mut total = 0;
    for &s in steps {
        if s.forward {
            total += shifts.get(&(s.label, v)).copied().unwrap_or(0);
            v = g.act(s.label, v);
        } else {
            let w = g.act_inv(s.label, v);
            total -= shifts.get(&(s.label, w)).copied().unwrap_or(0);
            v = w;
        }
    }
    total
}

/// `r b1` against `r^2 b1` over `S3 * Z/3` with M the rotations and N
/// trivial: equal M- and N-parts up to conjugacy, yet not conjugate.
pub fn s3_excluded_instance() -> (FpcPresentation, FpcWord, FpcWord) {
    let s3 = FiniteGroup::symmetric3();
    let r = elements_of_order(&s3, 3)[0];
    let r2 = s3.mul(r, r);
    let p = fpc(s3, FiniteGroup::cyclic(3), &[r], &[1]);
    let u = FpcWord::new(&[(Factor::A, r), (Factor::B, 1)]);
    let v = FpcWord::new(&[(Factor::A, r2), (Factor::B, 1)]);
    (p, u, v)
}
