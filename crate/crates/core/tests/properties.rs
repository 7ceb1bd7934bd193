//! Module invariants as property tests over seeded random instances.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use ordsep::graphs::{
    component, cycle_representative, has_l_near_vertices, near, order_of_action, u_cycle_length, verify_action_axioms,
    ActionGraph, ComponentKind, FpcComponents, FpcLabels, HnnLabels, Path, Step,
};
use ordsep::groups::{CosetSide, FiniteGroup};
use ordsep::oracle::{all_perms, enumerate_hnn_homs};
use ordsep::surgery::{delta_fpc, delta_hnn, project, Side};
use ordsep::words::hnn::{hnn_cyclically_reduce, hnn_equal, hnn_reduce, is_reduced};
use ordsep::words::HnnPresentation;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn groups() -> Vec<FiniteGroup> {
    vec![
        FiniteGroup::cyclic(6),
        FiniteGroup::cyclic(8),
        FiniteGroup::symmetric3(),
        FiniteGroup::dihedral(4),
        FiniteGroup::dihedral(6),
        FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(4)),
    ]
}

fn random_steps(g: &ActionGraph, len: usize, r: &mut ChaCha8Rng) -> Vec<Step> {
    (0..len).map(|_| Step { label: r.gen_range(0..g.labels().len()), forward: r.gen_bool(0.5) }).collect()
}

fn small_hnn_graph(r: &mut ChaCha8Rng) -> (HnnPresentation, ActionGraph) {
    let p = hnn_presentations().choose(r).unwrap().clone();
    let k = r.gen_range(1..=6);
    let g = random_hnn_graph(&p, k, r);
    (p, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn subgroup_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = groups().choose(&mut r).unwrap().clone();
        for x in 0..g.order() {
            prop_assert_eq!(g.element_order(x), g.element_order(g.inv(x)));
        }
        let a: Vec<usize> = (0..2).map(|_| r.gen_range(0..g.order())).collect();
        let mut b = a.clone();
        b.push(r.gen_range(0..g.order()));
        let (ha, hb) = (g.subgroup_closure(&a), g.subgroup_closure(&b));
        prop_assert_eq!(g.order() % ha.len(), 0);
        prop_assert!(ha.elements().iter().all(|&x| hb.contains(x)));
        prop_assert_eq!(g.subgroup_closure(ha.elements()), ha.clone());
        for side in [CosetSide::Left, CosetSide::Right] {
            let reps = g.coset_transversal(&ha, side);
            let mut seen = BTreeSet::new();
            for &t in &reps {
                for &h in ha.elements() {
                    let x = match side {
                        CosetSide::Left => g.mul(t, h),
                        CosetSide::Right => g.mul(h, t),
                    };
                    prop_assert!(seen.insert(x), "cosets overlap");
                }
            }
            prop_assert_eq!(seen.len(), g.order());
        }
    }

    #[test]
    fn hnn_reduction_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = hnn_presentations().choose(&mut r).unwrap().clone();
        let w = random_hnn_word(&p, r.gen_range(0..=7), &mut r);
        let red = hnn_reduce(&p, &w);
        prop_assert!(is_reduced(&p, &red));
        prop_assert_eq!(hnn_reduce(&p, &red), red.clone());
        prop_assert!(hnn_equal(&p, &w, &red));
        let g = p.base();
        let inv = w.inverse(g);
        prop_assert!(hnn_reduce(&p, &w.concat(g, &inv)).tail.is_empty());
    }

    #[test]
    fn cyclic_tail_length_is_conjugacy_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = hnn_presentations().choose(&mut r).unwrap().clone();
        let w = random_hnn_word(&p, r.gen_range(1..=4), &mut r);
        let len = hnn_cyclically_reduce(&p, &w).0.tail_len();
        for _ in 0..100 {
            let c = random_hnn_word(&p, r.gen_range(0..=3), &mut r);
            let conj = w.conjugate_by(p.base(), &c);
            prop_assert_eq!(hnn_cyclically_reduce(&p, &conj).0.tail_len(), len);
        }
    }

    #[test]
    fn fpc_reduction_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = fpc_presentations().choose(&mut r).unwrap().clone();
        let w = random_fpc_word(&p, r.gen_range(0..=8), &mut r);
        let red = p.fpc_reduce(&w);
        prop_assert!(p.is_reduced(&red));
        prop_assert_eq!(p.fpc_reduce(&red), red.clone());
        prop_assert!(p.fpc_equal(&w, &red));
        prop_assert!(p.fpc_reduce(&w.concat(&p.inverse(&w))).is_empty());
    }

    #[test]
    fn action_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, g) = small_hnn_graph(&mut r);
        let rels: Vec<Vec<Step>> = Vec::new();
        prop_assert!(verify_action_axioms(&g, &rels).is_ok());
        let w1 = random_hnn_word(&p, r.gen_range(0..=3), &mut r);
        let w2 = random_hnn_word(&p, r.gen_range(0..=3), &mut r);
        let (s1, s2) = (g.hnn_steps(&w1.letters()), g.hnn_steps(&w2.letters()));
        let s12: Vec<Step> = s1.iter().chain(&s2).copied().collect();
        prop_assert_eq!(g.word_perm(&s12), g.word_perm(&s1).then(&g.word_perm(&s2)));
        let joined = g.hnn_steps(&w1.concat(p.base(), &w2).letters());
        prop_assert_eq!(g.word_perm(&joined), g.word_perm(&s12));
    }

    #[test]
    fn cycle_lengths_divide_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, g) = small_hnn_graph(&mut r);
        let u = random_hnn_word(&p, r.gen_range(0..=3), &mut r);
        let steps = g.hnn_steps(&u.letters());
        let order = order_of_action(&g, &steps);
        let mut lcm = 1u128;
        for v in 0..g.vertex_count() {
            let l = u_cycle_length(&g, v, &steps) as u128;
            prop_assert_eq!(order % l, 0);
            lcm = ordsep::perm::lcm(lcm, l);
        }
        prop_assert_eq!(lcm, order);
    }

    #[test]
    fn l_near_absence_is_antitone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, g) = small_hnn_graph(&mut r);
        let u = random_hnn_word(&p, r.gen_range(1..=3), &mut r);
        let cyc = cycle_representative(&g, r.gen_range(0..g.vertex_count()), &g.hnn_steps(&u.letters()));
        for l in 1..5 {
            if !has_l_near_vertices(&g, &cyc, l) {
                for k in 0..l {
                    prop_assert!(!has_l_near_vertices(&g, &cyc, k));
                }
            }
        }
    }

    #[test]
    fn near_is_reflexive_symmetric_transitive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = fpc_presentations().choose(&mut r).unwrap().clone();
        let k = *fpc_block_counts(&p, 96).choose(&mut r).unwrap();
        let g = random_fpc_graph(&p, k, &mut r).unwrap();
        let comps = FpcComponents::new(&g, &p);
        let labels = FpcLabels::new(&g, &p);
        let steps = random_steps(&g, r.gen_range(1..=5), &mut r);
        let start = r.gen_range(0..g.vertex_count());
        let shift = |x: usize, r: &mut ChaCha8Rng| labels.n.choose(r).map_or(x, |&n| g.act(n, x));
        let paths: Vec<Path> = (0..3)
            .scan(start, |x, _| {
                *x = shift(*x, &mut r);
                Some(Path { start: *x, steps: steps.clone() })
            })
            .collect();
        for s in &paths {
            prop_assert!(near(&g, &comps, s, s).unwrap());
            for t in &paths {
                prop_assert_eq!(near(&g, &comps, s, t).unwrap(), near(&g, &comps, t, s).unwrap());
            }
        }
        let (a, b, c) = (&paths[0], &paths[1], &paths[2]);
        if near(&g, &comps, a, b).unwrap() && near(&g, &comps, b, c).unwrap() {
            let (va, vb, vc) = (a.vertices(&g), b.vertices(&g), c.vertices(&g));
            for i in 0..va.len() {
                let m = comps.m.same(va[i], vb[i]) && comps.m.same(vb[i], vc[i]);
                let n = comps.n.same(va[i], vb[i]) && comps.n.same(vb[i], vc[i]);
                if m || n {
                    prop_assert!(comps.m.same(va[i], vc[i]) || comps.n.same(va[i], vc[i]));
                }
            }
        }
    }

    #[test]
    fn hnn_surgery_is_a_covering(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (p, g) = small_hnn_graph(&mut r);
        let labels = HnnLabels::new(&g, &p);
        let x = r.gen_range(0..g.vertex_count());
        let (k, side) = if r.gen_bool(0.5) {
            (component(&g, x, &labels.a, ComponentKind::A), Side::From)
        } else {
            (component(&g, x, &labels.b, ComponentKind::B), Side::Into)
        };
        let n = r.gen_range(2..=4);
        let out = delta_hnn(&g, &p, &k, side, n).unwrap().graph;
        prop_assert_eq!(out.vertex_count(), n * g.vertex_count());
        for _ in 0..100 {
            let steps = random_steps(&g, r.gen_range(1..=6), &mut r);
            let v = r.gen_range(0..out.vertex_count());
            prop_assert_eq!(project(&g, out.walk(v, &steps)), g.walk(project(&g, v), &steps));
        }
        let m = r.gen_range(2..=3);
        let y = r.gen_range(0..out.vertex_count());
        let k2 = match side {
            Side::From => component(&out, y, &HnnLabels::new(&out, &p).a, ComponentKind::A),
            Side::Into => component(&out, y, &HnnLabels::new(&out, &p).b, ComponentKind::B),
        };
        let twice = delta_hnn(&out, &p, &k2, side, m).unwrap().graph;
        prop_assert_eq!(twice.vertex_count(), n * m * g.vertex_count());
    }

    #[test]
    fn fpc_cut_edges_leave_the_component(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = fpc_presentations().choose(&mut r).unwrap().clone();
        let k = *fpc_block_counts(&p, 96).choose(&mut r).unwrap();
        let g = random_fpc_graph(&p, k, &mut r).unwrap();
        let labels = FpcLabels::new(&g, &p);
        let x = r.gen_range(0..g.vertex_count());
        let (comp, outside): (_, Vec<usize>) = if r.gen_bool(0.5) {
            (component(&g, x, &labels.m, ComponentKind::M), labels.a.iter().copied().filter(|l| !labels.m.contains(l)).collect())
        } else {
            (component(&g, x, &labels.n, ComponentKind::N), labels.b.iter().copied().filter(|l| !labels.n.contains(l)).collect())
        };
        for &l in &outside {
            for &v in comp.vertices() {
                prop_assert!(!comp.contains(g.act(l, v)));
            }
        }
        let n = r.gen_range(2..=4);
        let out = delta_fpc(&g, &p, &comp, n).unwrap().graph;
        for _ in 0..100 {
            let steps = random_steps(&g, r.gen_range(1..=6), &mut r);
            let v = r.gen_range(0..out.vertex_count());
            prop_assert_eq!(project(&g, out.walk(v, &steps)), g.walk(project(&g, v), &steps));
        }
    }

    #[test]
    fn fpc_conjugacy_is_an_equivalence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = z4_fpc();
        let base: Vec<_> = (0..4).map(|_| random_fpc_word(&p, r.gen_range(1..=4), &mut r)).collect();
        let mut pool = base.clone();
        for w in &base {
            for _ in 0..3 {
                let c = random_fpc_word(&p, r.gen_range(1..=2), &mut r);
                pool.push(p.conjugate_by(w, &c));
            }
        }
        let rel: Vec<Vec<bool>> = pool.iter().map(|x| pool.iter().map(|y| p.fpc_conjugate(x, y)).collect()).collect();
        for i in 0..pool.len() {
            prop_assert!(rel[i][i]);
            for j in 0..pool.len() {
                prop_assert_eq!(rel[i][j], rel[j][i]);
                for k in 0..pool.len() {
                    if rel[i][j] && rel[j][k] {
                        prop_assert!(rel[i][k]);
                    }
                }
            }
        }
    }
}

/// Homomorphisms of `<Z/2, t | t^-1 a t = a>` into `S_d` counted by brute
/// force over all pairs of permutations.
fn brute_force_count(p: &HnnPresentation, d: usize) -> usize {
    let perms = all_perms(d);
    let mut count = 0;
    for x in &perms {
        if !x.then(x).is_identity() {
            continue;
        }
        for t in &perms {
            let ok = p.a_sub().elements().iter().all(|&a| a == 0 || t.inverse().then(x).then(t) == *x);
            count += usize::from(ok);
        }
    }
    count
}

#[test]
fn enumeration_is_exhaustive_at_tiny_degree() {
    let z2 = FiniteGroup::cyclic(2);
    let free = HnnPresentation::new(z2.clone(), ordsep::groups::GroupIso::identity_on(z2.trivial_subgroup())).unwrap();
    let tied = HnnPresentation::new(z2.clone(), ordsep::groups::GroupIso::identity_on(z2.whole())).unwrap();
    for p in [&free, &tied] {
        for d in 1..=4 {
            let emitted = enumerate_hnn_homs(p, d, u64::MAX, 0).len();
            assert_eq!(emitted, brute_force_count(p, d), "degree {d}");
        }
    }
}
