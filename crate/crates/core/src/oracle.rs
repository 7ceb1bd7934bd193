//! Brute-force search for finite permutation quotients.
//!
//! Small degrees are enumerated exhaustively: generator images range over
//! all of `S_d`, and stable-letter images are all equivariant bijections
//! (found orbit by orbit, so each is produced exactly once). Beyond the
//! exhaustive threshold, actions are sampled: unions of coset actions for
//! the base group, and row/column gluings of `M x N` blocks for free
//! products with commuting subgroups. Every emitted assignment has passed
//! the relation check.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graphs::{fpc_alphabet, hnn_alphabet, Label};
use crate::groups::{CosetSide, FiniteGroup, Subgroup};
use crate::instance::Instance;
use crate::perm::Perm;
use crate::witness::{verify_fpc_relations, verify_hnn_relations, Images, SeparationWitness, TranscriptEntry};
use crate::words::{FpcPresentation, HnnPresentation};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub max_degree: usize,
    /// Total number of candidate assignments examined across all degrees.
    pub budget: u64,
    pub seed: u64,
    /// Degrees with `d * |group| <= exhaustive_threshold` (and `d <= 8`) are
    /// enumerated exhaustively.
    pub exhaustive_threshold: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_degree: 8, budget: 20_000, seed: 0, exhaustive_threshold: 16 }
    }
}

const MAX_EXHAUSTIVE_DEGREE: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotFound {
    pub candidates: u64,
}

/// All permutations of `0..d` in lexicographic order.
pub fn all_perms(d: usize) -> Vec<Perm> {
    let mut cur: Vec<usize> = (0..d).collect();
    let mut out = vec![Perm::from_images(cur.clone())];
    loop {
        let Some(i) = (1..d).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..d).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Perm::from_images(cur.clone()));
    }
}

/// Greedy generating set of a subgroup.
pub fn subgroup_generators(g: &FiniteGroup, h: &Subgroup) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut span = g.trivial_subgroup();
    for &x in h.elements() {
        if !span.contains(x) {
            gens.push(x);
            span = g.subgroup_closure(&gens);
        }
    }
    gens
}

/// Extends generator images to every element along the spelling words and
/// checks that the result is a homomorphism.
fn extend_hom(g: &FiniteGroup, gens: &[usize], words: &[Vec<usize>], gen_images: &[Perm], d: usize) -> Option<Vec<Perm>> {
    let all: Vec<Perm> = words
        .iter()
        .map(|w| w.iter().fold(Perm::identity(d), |acc, &i| acc.then(&gen_images[i])))
        .collect();
    for x in 0..g.order() {
        for (i, &s) in gens.iter().enumerate() {
            if all[x].then(&gen_images[i]) != all[g.mul(x, s)] {
                return None;
            }
        }
    }
    Some(all)
}

/// Every homomorphism `g -> S_d`, as the image of each element.
pub fn all_homs(g: &FiniteGroup, d: usize) -> Vec<Vec<Perm>> {
    let (gens, words) = g.generator_words();
    let sd = all_perms(d);
    let mut out = Vec::new();
    let mut idx = vec![0usize; gens.len()];
    loop {
        let imgs: Vec<Perm> = idx.iter().map(|&i| sd[i].clone()).collect();
        if let Some(h) = extend_hom(g, &gens, &words, &imgs, d) {
            out.push(h);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < sd.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A random homomorphism `g -> S_d`: a disjoint union of right-coset
/// actions of random subgroups, with the points shuffled.
pub fn random_hom(g: &FiniteGroup, subgroups: &[Subgroup], d: usize, rng: &mut impl Rng) -> Vec<Perm> {
    let mut pieces: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut remaining = d;
    while remaining > 0 {
        let fits: Vec<&Subgroup> = subgroups.iter().filter(|h| g.order() / h.len() <= remaining).collect();
        let h = fits.choose(rng).expect("the whole group always fits");
        let (rep, reps) = g.coset_labels(h, CosetSide::Right);
        remaining -= reps.len();
        pieces.push((rep, reps));
    }
    let mut relabel: Vec<usize> = (0..d).collect();
    relabel.shuffle(rng);
    (0..g.order())
        .map(|x| {
            let mut images = vec![0; d];
            let mut offset = 0;
            for (rep, reps) in &pieces {
                for (i, &r) in reps.iter().enumerate() {
                    let target = rep[g.mul(r, x)];
                    let j = reps.binary_search(&target).expect("coset representative");
                    images[relabel[offset + i]] = relabel[offset + j];
                }
                offset += reps.len();
            }
            Perm::from_images(images)
        })
        .collect()
}

struct Orbit {
    points: Vec<usize>,
    /// BFS tree: for each point after the first, (parent, generator index).
    tree: Vec<(usize, usize, usize)>,
}

fn orbits(gens: &[&Perm], d: usize) -> Vec<Orbit> {
    let mut seen = vec![false; d];
    let mut out = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut points = vec![start];
        let mut tree = Vec::new();
        let mut i = 0;
        while i < points.len() {
            let x = points[i];
            for (k, p) in gens.iter().enumerate() {
                let y = p.apply(x);
                if !seen[y] {
                    seen[y] = true;
                    points.push(y);
                    tree.push((x, k, y));
                }
            }
            i += 1;
        }
        out.push(Orbit { points, tree });
    }
    out
}

/// Enumerates bijections `tau` with `tau(x . src[i]) = tau(x) . dst[i]`.
/// With an rng the candidate order is shuffled (use `ControlFlow::Break`
/// after the first hit to sample one).
pub fn equivariant_bijections(
    src: &[Perm],
    dst: &[Perm],
    d: usize,
    mut rng: Option<&mut ChaCha8Rng>,
    visit: &mut dyn FnMut(&Perm) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let src_refs: Vec<&Perm> = src.iter().collect();
    let dst_refs: Vec<&Perm> = dst.iter().collect();
    let so = orbits(&src_refs, d);
    let dorb = orbits(&dst_refs, d);
    let mut orbit_of = vec![0usize; d];
    for (i, o) in dorb.iter().enumerate() {
        for &x in &o.points {
            orbit_of[x] = i;
        }
    }
    let mut tau = vec![usize::MAX; d];
    let mut used = vec![false; dorb.len()];
    let mut order: Vec<Vec<usize>> = so
        .iter()
        .map(|o| (0..d).filter(|&y| dorb[orbit_of[y]].points.len() == o.points.len()).collect())
        .collect();
    if let Some(r) = rng.as_deref_mut() {
        for c in &mut order {
            c.shuffle(r);
        }
    }
    fn rec(
        k: usize,
        so: &[Orbit],
        order: &[Vec<usize>],
        orbit_of: &[usize],
        src: &[Perm],
        dst: &[Perm],
        tau: &mut Vec<usize>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&Perm) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if k == so.len() {
            return visit(&Perm::from_images(tau.clone()));
        }
        let o = &so[k];
        for &y in &order[k] {
            if used[orbit_of[y]] {
                continue;
            }
            tau[o.points[0]] = y;
            for &(x, gi, z) in &o.tree {
                tau[z] = dst[gi].apply(tau[x]);
            }
            let consistent = o
                .points
                .iter()
                .all(|&x| (0..src.len()).all(|gi| tau[src[gi].apply(x)] == dst[gi].apply(tau[x])));
            if consistent {
                used[orbit_of[y]] = true;
                rec(k + 1, so, order, orbit_of, src, dst, tau, used, visit)?;
                used[orbit_of[y]] = false;
            }
        }
        for &x in &o.points {
            tau[x] = usize::MAX;
        }
        ControlFlow::Continue(())
    }
    rec(0, &so, &order, &orbit_of, src, dst, &mut tau, &mut used, visit)
}

fn images_of(labels: &[Label], d: usize, image: impl Fn(Label) -> Perm) -> Images {
    Images::new(d, labels.iter().map(|&l| (l, image(l))).collect::<BTreeMap<_, _>>())
}

fn hnn_images(p: &HnnPresentation, d: usize, rho: &[Perm], tau: &Perm) -> Images {
    images_of(&hnn_alphabet(p.base()), d, |l| match l {
        Label::Base(g) => rho[g].clone(),
        _ => tau.clone(),
    })
}

fn fpc_images(p: &FpcPresentation, d: usize, ra: &[Perm], rb: &[Perm]) -> Images {
    images_of(&fpc_alphabet(p), d, |l| match l {
        Label::A(g) => ra[g].clone(),
        Label::B(g) => rb[g].clone(),
        _ => unreachable!("FPC alphabet"),
    })
}

fn exhaustive(d: usize, group_order: usize, threshold: usize) -> bool {
    d <= MAX_EXHAUSTIVE_DEGREE && d * group_order <= threshold
}

/// Streams homomorphisms of the HNN extension into `S_d` to `visit`, at
/// most `budget` of them (the budget is decremented per emitted candidate).
pub fn for_each_hnn_hom(
    p: &HnnPresentation,
    d: usize,
    cfg: &OracleConfig,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
    visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let g = p.base();
    let a_gens = subgroup_generators(g, p.a_sub());
    let mut emit = |rho: &[Perm], tau: &Perm, budget: &mut u64| -> ControlFlow<()> {
        if *budget == 0 {
            return ControlFlow::Break(());
        }
        *budget -= 1;
        let images = hnn_images(p, d, rho, tau);
        debug_assert!(verify_hnn_relations(&images, p).is_ok());
        if verify_hnn_relations(&images, p).is_err() {
            return ControlFlow::Continue(());
        }
        visit(&images)
    };
    if exhaustive(d, g.order(), cfg.exhaustive_threshold) {
        for rho in all_homs(g, d) {
            let src: Vec<Perm> = a_gens.iter().map(|&a| rho[a].clone()).collect();
            let dst: Vec<Perm> = a_gens.iter().map(|&a| rho[p.phi().apply(a)].clone()).collect();
            equivariant_bijections(&src, &dst, d, None, &mut |tau| emit(&rho, tau, budget))?;
        }
        return ControlFlow::Continue(());
    }
    let subgroups = g.all_subgroups();
    let mut attempts = 0u64;
    while *budget > 0 && attempts < 4 * cfg.budget.max(1) {
        attempts += 1;
        let rho = random_hom(g, &subgroups, d, rng);
        let src: Vec<Perm> = a_gens.iter().map(|&a| rho[a].clone()).collect();
        let dst: Vec<Perm> = a_gens.iter().map(|&a| rho[p.phi().apply(a)].clone()).collect();
        let mut found = None;
        let _ = equivariant_bijections(&src, &dst, d, Some(rng), &mut |tau| {
            found = Some(tau.clone());
            ControlFlow::Break(())
        });
        if let Some(tau) = found {
            emit(&rho, &tau, budget)?;
        }
    }
    ControlFlow::Continue(())
}

fn commute(p: &FpcPresentation, ra: &[Perm], rb: &[Perm]) -> bool {
    p.m_sub()
        .elements()
        .iter()
        .all(|&m| p.n_sub().elements().iter().all(|&n| ra[m].then(&rb[n]) == rb[n].then(&ra[m])))
}

/// `k` blocks of `M x N`; M-rows glued into A-orbits and N-columns into
/// B-orbits at random. Returns the images of every element of A and of B.
pub fn fpc_block_action(p: &FpcPresentation, k: usize, rng: &mut impl Rng) -> Option<(Vec<Perm>, Vec<Perm>)> {
    let (ms, ns) = (p.m_sub().elements(), p.n_sub().elements());
    let (mm, nn) = (ms.len(), ns.len());
    let q = p.a_grp().order() / mm;
    let r = p.b_grp().order() / nn;
    if (k * nn) % q != 0 || (k * mm) % r != 0 {
        return None;
    }
    let d = k * mm * nn;
    let point = |beta: usize, mi: usize, ni: usize| beta * mm * nn + mi * nn + ni;
    // rows[(beta, ni)] contains the points with m varying
    let mut rows: Vec<(usize, usize)> = (0..k).flat_map(|b| (0..nn).map(move |n| (b, n))).collect();
    let mut cols: Vec<(usize, usize)> = (0..k).flat_map(|b| (0..mm).map(move |m| (b, m))).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let side = |grp: &FiniteGroup, sub_elems: &[usize], sub: &Subgroup, lines: &[(usize, usize)], width: usize, line_point: &dyn Fn((usize, usize), usize) -> usize, rng: &mut dyn rand::RngCore| -> Vec<Perm> {
        let (rep, reps) = grp.coset_labels(sub, CosetSide::Left);
        let index_in_sub = |x: usize| sub_elems.iter().position(|&s| s == x).expect("subgroup element");
        let mut images = vec![vec![0usize; d]; grp.order()];
        for group in lines.chunks(width) {
            // line j <-> coset reps[j] * twist[j]
            let twist: Vec<usize> = (0..width).map(|_| sub_elems[rng.gen_range(0..sub_elems.len())]).collect();
            for (j, &line) in group.iter().enumerate() {
                let t = grp.mul(reps[j], twist[j]);
                for (si, &s) in sub_elems.iter().enumerate() {
                    let x = grp.mul(t, s);
                    for y in 0..grp.order() {
                        let z = grp.mul(x, y);
                        let c = reps.binary_search(&rep[z]).expect("coset rep");
                        let tc = grp.mul(reps[c], twist[c]);
                        let s2 = index_in_sub(grp.mul(grp.inv(tc), z));
                        images[y][line_point(line, si)] = line_point(group[c], s2);
                    }
                }
            }
        }
        images.into_iter().map(Perm::from_images).collect()
    };
    let ra = side(p.a_grp(), ms, p.m_sub(), &rows, q, &|(b, n), mi| point(b, mi, n), rng);
    let rb = side(p.b_grp(), ns, p.n_sub(), &cols, r, &|(b, m), ni| point(b, m, ni), rng);
    Some((ra, rb))
}

fn relabel(perms: &[Perm], sigma: &Perm) -> Vec<Perm> {
    let inv = sigma.inverse();
    perms.iter().map(|p| inv.then(p).then(sigma)).collect()
}

/// Streams homomorphisms of the free product with commuting subgroups into
/// `S_d`.
pub fn for_each_fpc_hom(
    p: &FpcPresentation,
    d: usize,
    cfg: &OracleConfig,
    rng: &mut ChaCha8Rng,
    budget: &mut u64,
    visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut emit = |ra: &[Perm], rb: &[Perm], budget: &mut u64| -> ControlFlow<()> {
        if *budget == 0 {
            return ControlFlow::Break(());
        }
        *budget -= 1;
        let images = fpc_images(p, d, ra, rb);
        if verify_fpc_relations(&images, p).is_err() {
            return ControlFlow::Continue(());
        }
        visit(&images)
    };
    let big = p.a_grp().order().max(p.b_grp().order());
    if exhaustive(d, big, cfg.exhaustive_threshold) {
        let ha = all_homs(p.a_grp(), d);
        let hb = all_homs(p.b_grp(), d);
        for ra in &ha {
            for rb in &hb {
                if commute(p, ra, rb) {
                    emit(ra, rb, budget)?;
                }
            }
        }
        return ControlFlow::Continue(());
    }
    let product = FiniteGroup::direct_product(p.a_grp(), p.b_grp());
    let product_subgroups = product.all_subgroups();
    let nb = p.b_grp().order();
    let block = p.m_sub().len() * p.n_sub().len();
    let mut attempts = 0u64;
    while *budget > 0 && attempts < 4 * cfg.budget.max(1) {
        attempts += 1;
        let blocks = (d % block == 0).then(|| fpc_block_action(p, d / block, rng)).flatten();
        let (ra, rb) = match blocks {
            Some(pair) if rng.gen_bool(0.5) => pair,
            _ => {
                let rho = random_hom(&product, &product_subgroups, d, rng);
                let ra = (0..p.a_grp().order()).map(|a| rho[a * nb + p.b_grp().identity()].clone()).collect();
                let rb = (0..nb).map(|b| rho[p.a_grp().identity() * nb + b].clone()).collect();
                (ra, rb)
            }
        };
        let mut sigma: Vec<usize> = (0..d).collect();
        sigma.shuffle(rng);
        let sigma = Perm::from_images(sigma);
        emit(&relabel(&ra, &sigma), &relabel(&rb, &sigma), budget)?;
    }
    ControlFlow::Continue(())
}

fn collect(run: impl FnOnce(&mut dyn FnMut(&Images) -> ControlFlow<()>)) -> Vec<Images> {
    let mut out = Vec::new();
    run(&mut |im| {
        out.push(Images::new(im.degree(), im.iter().map(|(l, p)| (*l, p.clone())).collect()));
        ControlFlow::Continue(())
    });
    out
}

pub fn enumerate_hnn_homs(p: &HnnPresentation, d: usize, budget: u64, seed: u64) -> Vec<Images> {
    let cfg = OracleConfig { budget, seed, ..OracleConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = budget;
    collect(|f| {
        let _ = for_each_hnn_hom(p, d, &cfg, &mut rng, &mut left, f);
    })
}

pub fn enumerate_fpc_homs(p: &FpcPresentation, d: usize, budget: u64, seed: u64) -> Vec<Images> {
    let cfg = OracleConfig { budget, seed, ..OracleConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut left = budget;
    collect(|f| {
        let _ = for_each_fpc_hom(p, d, &cfg, &mut rng, &mut left, f);
    })
}

/// Searches degrees `1..=max_degree` for a quotient in which `u` and `v`
/// have images of different orders.
pub fn oracle_separate(inst: &Instance, cfg: &OracleConfig) -> Result<SeparationWitness, NotFound> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut spent = 0u64;
    for d in 1..=cfg.max_degree {
        let remaining = cfg.budget - spent;
        let share = remaining / (cfg.max_degree - d + 1) as u64;
        let mut budget = if exhaustive_for(inst, d, cfg) { remaining } else { share.max(remaining.min(1)) };
        let before = budget;
        let mut hit = None;
        let mut check = |im: &Images| {
            let (pu, pv) = match inst {
                Instance::Hnn { p, u, v } => (im.hnn_word(p, u), im.hnn_word(p, v)),
                Instance::Fpc { u, v, .. } => (im.fpc_word(u), im.fpc_word(v)),
            };
            let (ou, ov) = (pu.order(), pv.order());
            if ou != ov {
                hit = Some((im.iter().map(|(l, p)| (*l, p.images().to_vec())).collect::<BTreeMap<_, _>>(), ou, ov));
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        };
        let _ = match inst {
            Instance::Hnn { p, .. } => for_each_hnn_hom(p, d, cfg, &mut rng, &mut budget, &mut check),
            Instance::Fpc { p, .. } => for_each_fpc_hom(p, d, cfg, &mut rng, &mut budget, &mut check),
        };
        spent += before - budget;
        if let Some((images, order_u, order_v)) = hit {
            return Ok(SeparationWitness {
                vertices: d,
                images,
                order_u,
                order_v,
                transcript: vec![TranscriptEntry::Oracle { degree: d, candidates: spent }],
            });
        }
        if spent >= cfg.budget {
            break;
        }
    }
    Err(NotFound { candidates: spent })
}

fn exhaustive_for(inst: &Instance, d: usize, cfg: &OracleConfig) -> bool {
    let order = match inst {
        Instance::Hnn { p, .. } => p.base().order(),
        Instance::Fpc { p, .. } => p.a_grp().order().max(p.b_grp().order()),
    };
    exhaustive(d, order, cfg.exhaustive_threshold)
}
