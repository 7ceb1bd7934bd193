//! Starting graphs: Cayley graphs of finite permutation quotients, screened
//! for the side conditions the loops rely on.
//!
//! Cayley graphs are vertex-transitive, so girth and near-freeness of the
//! u- and v-cycles are checked at the identity vertex only.

use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graphs::{
    cayley_graph, cycle_representative, fpc_alphabet, girth_check, has_l_near_vertices, hnn_alphabet, no_mixed_square,
    verify_fpc_free_axioms, verify_hnn_free_axioms, ActionGraph, Label, Step,
};
use crate::oracle::{equivariant_bijections, fpc_block_action, random_hom, subgroup_generators};
use crate::perm::Perm;
use crate::words::{FpcPresentation, FpcWord, HnnLetter, HnnPresentation};

use super::{EngineConfig, EngineError};

#[derive(Debug, Clone)]
pub struct Gamma0 {
    pub graph: ActionGraph,
    pub attempts: usize,
    pub degree: usize,
}

/// Why candidates were rejected, for the error report.
#[derive(Debug, Default, Clone)]
pub(crate) struct Rejections {
    pub no_candidate: usize,
    pub too_large: usize,
    pub axioms: usize,
    pub girth: usize,
    pub near: usize,
    pub mixed_square: usize,
}

impl Rejections {
    fn summary(&self) -> String {
        format!(
            "no candidate {}, quotient too large {}, axioms {}, girth {}, near vertices {}, mixed squares {}",
            self.no_candidate, self.too_large, self.axioms, self.girth, self.near, self.mixed_square
        )
    }
}

fn near_free_at(g: &ActionGraph, v: usize, steps: &[Step], l: usize) -> bool {
    !has_l_near_vertices(g, &cycle_representative(g, v, steps), l)
}

fn pick_degree(rng: &mut ChaCha8Rng, min: usize, max: usize) -> usize {
    if min >= max {
        max
    } else {
        rng.gen_range(min..=max)
    }
}

/// Images of the HNN generators (in alphabet order) under a random faithful
/// action of the base group and a random compatible stable letter.
fn hnn_generators(p: &HnnPresentation, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Perm>> {
    let g = p.base();
    let subgroups = g.all_subgroups();
    let rho = random_hom(g, &subgroups, d, rng);
    if (0..g.order()).any(|x| x != g.identity() && rho[x].is_identity()) {
        return None;
    }
    let a_gens = subgroup_generators(g, p.a_sub());
    let src: Vec<Perm> = a_gens.iter().map(|&a| rho[a].clone()).collect();
    let dst: Vec<Perm> = a_gens.iter().map(|&a| rho[p.phi().apply(a)].clone()).collect();
    let mut tau = None;
    let _ = equivariant_bijections(&src, &dst, d, Some(rng), &mut |t| {
        tau = Some(t.clone());
        ControlFlow::Break(())
    });
    let tau = tau?;
    Some(
        hnn_alphabet(g)
            .iter()
            .map(|l| match l {
                Label::Base(x) => rho[*x].clone(),
                _ => tau.clone(),
            })
            .collect(),
    )
}

/// Resumable search over screened starting graphs; each call to `next`
/// continues from the previous candidate.
pub struct Gamma0Search<'a> {
    target: Target<'a>,
    labels: Vec<Label>,
    cfg: &'a EngineConfig,
    rng: ChaCha8Rng,
    attempts: usize,
    rej: Rejections,
}

enum Target<'a> {
    Hnn { p: &'a HnnPresentation, spellings: [&'a [HnnLetter]; 2] },
    Fpc { p: &'a FpcPresentation, words: [&'a FpcWord; 2] },
}

impl<'a> Gamma0Search<'a> {
    /// Candidates for the HNN loop: free axioms, no reduced closed path of
    /// length at most `girth_bound`, and no near vertices on the u- and
    /// v-cycles. `spellings` are the cyclic spellings of u and v.
    pub fn hnn(p: &'a HnnPresentation, spellings: [&'a [HnnLetter]; 2], cfg: &'a EngineConfig) -> Self {
        Self::new(Target::Hnn { p, spellings }, hnn_alphabet(p.base()), cfg)
    }

    /// Candidates for the FPC loop: free axioms, no mixed squares, and no
    /// near vertices on the u- and v-cycles.
    pub fn fpc(p: &'a FpcPresentation, words: [&'a FpcWord; 2], cfg: &'a EngineConfig) -> Self {
        Self::new(Target::Fpc { p, words }, fpc_alphabet(p), cfg)
    }

    fn new(target: Target<'a>, labels: Vec<Label>, cfg: &'a EngineConfig) -> Self {
        Gamma0Search { target, labels, cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), attempts: 0, rej: Rejections::default() }
    }

    fn candidate(&mut self) -> Option<(usize, Vec<Perm>)> {
        match &self.target {
            Target::Hnn { p, .. } => {
                let d = pick_degree(&mut self.rng, 2, self.cfg.gamma0_max_degree);
                hnn_generators(p, d, &mut self.rng).map(|im| (d, im))
            }
            Target::Fpc { p, .. } => {
                let block = p.m_sub().len() * p.n_sub().len();
                let k = self.rng.gen_range(1..=(self.cfg.gamma0_max_degree / block).max(1));
                fpc_generators(p, k, &mut self.rng)
            }
        }
    }

    fn screen(&mut self, graph: &ActionGraph) -> bool {
        let cfg = self.cfg;
        match &self.target {
            Target::Hnn { p, spellings } => {
                if verify_hnn_free_axioms(graph, p).is_err() {
                    self.rej.axioms += 1;
                    return false;
                }
                if girth_check(graph, p, &[0], cfg.girth_bound).is_err() {
                    self.rej.girth += 1;
                    return false;
                }
                if !spellings.iter().all(|s| near_free_at(graph, 0, &graph.hnn_steps(s), cfg.near_bound_hnn)) {
                    self.rej.near += 1;
                    return false;
                }
            }
            Target::Fpc { p, words } => {
                if verify_fpc_free_axioms(graph, p).is_err() {
                    self.rej.axioms += 1;
                    return false;
                }
                if no_mixed_square(graph, p).is_err() {
                    self.rej.mixed_square += 1;
                    return false;
                }
                if !words.iter().all(|w| near_free_at(graph, 0, &graph.fpc_steps(w), cfg.near_bound_fpc)) {
                    self.rej.near += 1;
                    return false;
                }
            }
        }
        true
    }

    pub fn next(&mut self) -> Result<Gamma0, EngineError> {
        while self.attempts < self.cfg.max_gamma0_attempts {
            self.attempts += 1;
            let Some((degree, images)) = self.candidate() else {
                self.rej.no_candidate += 1;
                continue;
            };
            let Ok(graph) = cayley_graph(&self.labels, &images, self.cfg.gamma0_max_vertices) else {
                self.rej.too_large += 1;
                continue;
            };
            if self.screen(&graph) {
                return Ok(Gamma0 { graph, attempts: self.attempts, degree });
            }
        }
        Err(EngineError::Gamma0NotFound { attempts: self.attempts, detail: self.rej.summary() })
    }
}

pub fn build_gamma0_hnn(p: &HnnPresentation, spellings: [&[HnnLetter]; 2], cfg: &EngineConfig) -> Result<Gamma0, EngineError> {
    Gamma0Search::hnn(p, spellings, cfg).next()
}

pub fn build_gamma0_fpc(p: &FpcPresentation, words: [&FpcWord; 2], cfg: &EngineConfig) -> Result<Gamma0, EngineError> {
    Gamma0Search::fpc(p, words, cfg).next()
}

fn relabel(perms: &[Perm], sigma: &Perm) -> Vec<Perm> {
    let inv = sigma.inverse();
    perms.iter().map(|p| inv.then(p).then(sigma)).collect()
}

/// Generator images for a random block action of the free product with
/// commuting subgroups, possibly a union of two block actions.
fn fpc_generators(p: &FpcPresentation, k: usize, rng: &mut ChaCha8Rng) -> Option<(usize, Vec<Perm>)> {
    let (ra, rb) = fpc_block_action(p, k, rng)?;
    let d = ra[0].degree();
    let mut sigma: Vec<usize> = (0..d).collect();
    sigma.shuffle(rng);
    let sigma = Perm::from_images(sigma);
    let (ra, rb) = (relabel(&ra, &sigma), relabel(&rb, &sigma));
    let images = fpc_alphabet(p)
        .iter()
        .map(|l| match l {
            Label::A(x) => ra[*x].clone(),
            Label::B(x) => rb[*x].clone(),
            _ => unreachable!("FPC alphabet"),
        })
        .collect();
    Some((d, images))
}
