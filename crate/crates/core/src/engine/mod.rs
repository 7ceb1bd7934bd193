//! Separation engines: build a starting action graph, then grow it by
//! surgery until the orders of the images of `u` and `v` differ.

mod fpc;
pub mod gamma0;
mod hnn;

pub use fpc::{run_fpc_loop, separate_fpc, separate_fpc_case1, separate_fpc_case2};
pub use gamma0::{build_gamma0_fpc, build_gamma0_hnn, Gamma0, Gamma0Search};
pub use hnn::{run_hnn_loop, separate_hnn};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphs::{order_of_action, ActionGraph, Violation};
use crate::instance::Instance;
use crate::oracle::OracleConfig;
use crate::surgery::SurgeryError;
use crate::witness::{verify_witness, SeparationWitness, TranscriptEntry};
use crate::words::FpcCase;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub girth_bound: usize,
    pub near_bound_hnn: usize,
    pub near_bound_fpc: usize,
    /// Loop stages allowed. Building the starting graph is the first stage,
    /// so zero permits no work at all.
    pub max_iterations: usize,
    pub max_gamma0_attempts: usize,
    /// Fresh starting graphs tried after a loop run stalls.
    pub max_restarts: usize,
    /// Largest permutation degree tried for starting quotients.
    pub gamma0_max_degree: usize,
    /// Largest starting quotient, in vertices.
    pub gamma0_max_vertices: usize,
    /// Surgery is refused once the graph would exceed this many vertices.
    pub max_vertices: usize,
    pub seed: u64,
    /// Candidate budget for the case that falls back to the oracle.
    pub oracle_budget: u64,
}

impl EngineConfig {
    pub fn oracle(&self) -> OracleConfig {
        OracleConfig { seed: self.seed, budget: self.oracle_budget, ..OracleConfig::default() }
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            girth_bound: 10,
            near_bound_hnn: 3,
            near_bound_fpc: 2,
            max_iterations: 16,
            max_gamma0_attempts: 2000,
            max_restarts: 64,
            gamma0_max_degree: 12,
            gamma0_max_vertices: 200_000,
            max_vertices: 4_000_000,
            seed: 0,
            oracle_budget: 20_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("u and v are conjugate")]
    Conjugate,
    #[error("u and v lie in one coset of an associated subgroup")]
    ExcludedShape,
    #[error("instance is in {found:?}, not handled here ({hint})")]
    CaseMismatch { found: FpcCase, hint: String },
    #[error("no starting graph after {attempts} attempts ({detail})")]
    Gamma0NotFound { attempts: usize, detail: String },
    #[error("iteration budget exhausted after {} steps", transcript.len())]
    IterationBudgetExceeded { transcript: Vec<TranscriptEntry> },
    #[error("surgery would need {needed} vertices, limit {limit}")]
    VertexBudgetExceeded { needed: usize, limit: usize, transcript: Vec<TranscriptEntry> },
    #[error("property {} fails at iteration {iteration}: {}", violation.property, violation.detail)]
    PropertyViolation { iteration: usize, violation: Violation, transcript: Vec<TranscriptEntry> },
    #[error("not separable at this scale: {0}")]
    NotSeparableAtScale(String),
    #[error("no witness among {candidates} candidates")]
    WitnessNotFound { candidates: u64 },
    #[error("orders agree: both are {0}")]
    OrdersEqual(u128),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error("witness failed verification: {0}")]
    WitnessRejected(Violation),
}

/// Reads the witness off the final graph and checks it from the generator
/// images alone.
pub(crate) fn finish(g: &ActionGraph, inst: &Instance, transcript: Vec<TranscriptEntry>) -> Result<SeparationWitness, EngineError> {
    let (su, sv) = match inst {
        Instance::Hnn { u, v, .. } => (g.hnn_steps(&u.letters()), g.hnn_steps(&v.letters())),
        Instance::Fpc { u, v, .. } => (g.fpc_steps(u), g.fpc_steps(v)),
    };
    let (ou, ov) = (order_of_action(g, &su), order_of_action(g, &sv));
    if ou == ov {
        return Err(EngineError::OrdersEqual(ou));
    }
    let w = SeparationWitness::from_graph(g, ou, ov, transcript);
    verify_witness(&w, inst).map_err(EngineError::WitnessRejected)?;
    Ok(w)
}

/// Runs the loop on successive starting graphs until one run separates.
/// A run that stalls (an invariant fails while the orders still agree, or a
/// budget runs out) moves on to the next candidate; the last such error is
/// returned when candidates or restarts run out.
pub(crate) fn with_restarts(
    cfg: &EngineConfig,
    search: &mut Gamma0Search,
    mut run: impl FnMut(Gamma0) -> Result<SeparationWitness, EngineError>,
) -> Result<SeparationWitness, EngineError> {
    if cfg.max_iterations == 0 {
        return Err(EngineError::IterationBudgetExceeded { transcript: Vec::new() });
    }
    let mut last = None;
    for _ in 0..=cfg.max_restarts {
        let g0 = match search.next() {
            Ok(g0) => g0,
            Err(e) => return Err(last.unwrap_or(e)),
        };
        match run(g0) {
            Ok(w) => return Ok(w),
            Err(e @ (EngineError::PropertyViolation { .. }
            | EngineError::VertexBudgetExceeded { .. }
            | EngineError::IterationBudgetExceeded { .. })) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one run"))
}

/// Runs the engine that matches the instance. FPC instances are routed by
/// their case.
pub fn separate(inst: &Instance, cfg: &EngineConfig) -> Result<SeparationWitness, EngineError> {
    match inst {
        Instance::Hnn { p, u, v } => separate_hnn(p, u, v, cfg),
        Instance::Fpc { p, u, v } => match p.classify_case_fpc(u, v).map_err(|_| EngineError::Conjugate)? {
            FpcCase::Case1 => separate_fpc_case1(p, u, v),
            FpcCase::Case2 { .. } => separate_fpc_case2(p, u, v, &cfg.oracle()),
            FpcCase::Case3 => separate_fpc(p, u, v, cfg),
            FpcCase::Excluded => Err(EngineError::ExcludedShape),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteGroup, GroupIso};
    use crate::words::{Factor, FpcPresentation, FpcWord, HnnPresentation, HnnWord};

    fn z4_hnn() -> HnnPresentation {
        let z4 = FiniteGroup::cyclic(4);
        let a = z4.subgroup(&[0, 2]).unwrap();
        HnnPresentation::new(z4, GroupIso::identity_on(a)).unwrap()
    }

    fn z4_fpc(m: &[usize], n: &[usize]) -> FpcPresentation {
        let a = FiniteGroup::cyclic(4);
        let b = FiniteGroup::cyclic(4);
        let ms = a.subgroup(m).unwrap();
        let ns = b.subgroup(n).unwrap();
        FpcPresentation::new(a, b, ms, ns).unwrap()
    }

    fn fw(letters: &[(Factor, usize)]) -> FpcWord {
        FpcWord::new(letters)
    }

    fn check(inst: &Instance, w: &SeparationWitness) {
        verify_witness(w, inst).unwrap();
        assert_ne!(w.order_u, w.order_v);
    }

    #[test]
    fn hnn_z4_example_separates() {
        let p = z4_hnn();
        let u = HnnWord::new(1, &[(1, 0)]);
        let v = u.pow(p.base(), 2);
        let w = separate_hnn(&p, &u, &v, &EngineConfig::default()).unwrap();
        check(&Instance::Hnn { p, u, v }, &w);
        assert!(matches!(w.transcript[0], TranscriptEntry::Gamma0 { .. }));
    }

    #[test]
    fn hnn_is_deterministic_for_a_seed() {
        let p = z4_hnn();
        let u = HnnWord::new(0, &[(1, 1)]);
        let v = HnnWord::new(0, &[(1, 1), (1, 3)]);
        let cfg = EngineConfig::default();
        let w1 = separate_hnn(&p, &u, &v, &cfg).unwrap();
        let w2 = separate_hnn(&p, &u, &v, &cfg).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn hnn_rejections() {
        let p = z4_hnn();
        let cfg = EngineConfig::default();
        let u = HnnWord::new(1, &[(1, 0)]);
        let shifted = HnnWord::new(0, &[(1, 1)]);
        assert!(matches!(separate_hnn(&p, &u, &shifted, &cfg), Err(EngineError::Conjugate)));
        let coset = HnnWord::new(1, &[(1, 2)]);
        assert!(matches!(separate_hnn(&p, &u, &coset, &cfg), Err(EngineError::ExcludedShape)));
        let base = HnnWord::base(1);
        assert!(matches!(separate_hnn(&p, &u, &base, &cfg), Err(EngineError::Precondition(_))));
    }

    #[test]
    fn budgets_are_reported() {
        let p = z4_hnn();
        let u = HnnWord::new(1, &[(1, 0)]);
        let v = u.pow(p.base(), 2);
        let cfg = EngineConfig { max_iterations: 0, ..EngineConfig::default() };
        assert!(matches!(separate_hnn(&p, &u, &v, &cfg), Err(EngineError::IterationBudgetExceeded { .. })));
        let cfg = EngineConfig { gamma0_max_vertices: 4, ..EngineConfig::default() };
        assert!(matches!(separate_hnn(&p, &u, &v, &cfg), Err(EngineError::Gamma0NotFound { .. })));
    }

    #[test]
    fn fpc_case3_separates() {
        use Factor::{A, B};
        let p = z4_fpc(&[0, 2], &[0, 2]);
        let u = fw(&[(A, 1), (B, 1)]);
        let v = fw(&[(A, 1), (B, 1), (A, 1), (B, 1)]);
        let w = separate_fpc(&p, &u, &v, &EngineConfig::default()).unwrap();
        check(&Instance::Fpc { p, u, v }, &w);
    }

    #[test]
    fn fpc_case_routing() {
        use Factor::{A, B};
        let p = z4_fpc(&[0, 2], &[0, 2]);
        let cfg = EngineConfig::default();
        let u = fw(&[(A, 1), (B, 1)]);
        let shifted = fw(&[(B, 1), (A, 1)]);
        assert!(matches!(separate_fpc(&p, &u, &shifted, &cfg), Err(EngineError::Conjugate)));
        let (a2, b2) = (fw(&[(A, 2)]), fw(&[(B, 2)]));
        assert!(matches!(separate_fpc(&p, &a2, &b2, &cfg), Err(EngineError::CaseMismatch { .. })));
        assert!(matches!(separate_fpc_case2(&p, &a2, &b2, &cfg.oracle()), Err(EngineError::CaseMismatch { .. })));
    }

    #[test]
    fn fpc_excluded_shape() {
        use Factor::{A, B};
        let s3 = FiniteGroup::symmetric3();
        let r = (0..6).find(|&x| s3.element_order(x) == 3).unwrap();
        let r2 = s3.mul(r, r);
        let m = s3.subgroup(&[s3.identity(), r, r2]).unwrap();
        let z3 = FiniteGroup::cyclic(3);
        let n = z3.subgroup(&[0, 1, 2]).unwrap();
        let p = FpcPresentation::new(s3, z3, m, n).unwrap();
        let (u, v) = (fw(&[(A, r), (B, 1)]), fw(&[(A, r2), (B, 1)]));
        assert_eq!(p.classify_case_fpc(&u, &v).unwrap(), crate::words::FpcCase::Excluded);
        assert!(matches!(separate_fpc_case1(&p, &u, &v), Err(EngineError::ExcludedShape)));
    }

    #[test]
    fn fpc_case1_retraction() {
        use Factor::{A, B};
        let p = z4_fpc(&[0, 2], &[0, 2]);
        let (u, v) = (fw(&[(A, 2)]), fw(&[(B, 2)]));
        let w = separate_fpc_case1(&p, &u, &v).unwrap();
        check(&Instance::Fpc { p, u, v }, &w);
    }

    #[test]
    fn fpc_case1_honest_failure() {
        use Factor::A;
        let a = FiniteGroup::cyclic(5);
        let b = FiniteGroup::cyclic(2);
        let m = a.subgroup(&[0, 1, 2, 3, 4]).unwrap();
        let n = b.subgroup(&[0]).unwrap();
        let p = FpcPresentation::new(a, b, m, n).unwrap();
        let r = separate_fpc_case1(&p, &fw(&[(A, 1)]), &fw(&[(A, 2)]));
        assert!(matches!(r, Err(EngineError::NotSeparableAtScale(_))));
    }

    #[test]
    fn fpc_case2_uses_quotient_search() {
        use Factor::{A, B};
        let p = z4_fpc(&[0, 2], &[0, 2]);
        let (u, v) = (fw(&[(A, 2)]), fw(&[(A, 1), (B, 1)]));
        let w = separate_fpc_case2(&p, &u, &v, &EngineConfig::default().oracle()).unwrap();
        check(&Instance::Fpc { p, u, v }, &w);
    }

    #[test]
    fn loop_from_tied_start_reports_outcome() {
        use crate::graphs::order_of_action;
        use Factor::{A, B};
        let p = z4_fpc(&[0, 2], &[0, 2]);
        let (u, v) = (fw(&[(A, 1), (B, 1)]), fw(&[(A, 1), (B, 3)]));
        let (su, sv) = (fpc::fpc_spelling(&p, &u).unwrap(), fpc::fpc_spelling(&p, &v).unwrap());
        let cfg = EngineConfig::default();
        let mut search = Gamma0Search::fpc(&p, [&su, &sv], &cfg);
        let g0 = loop {
            let g0 = search.next().unwrap();
            let g = &g0.graph;
            if order_of_action(g, &g.fpc_steps(&su)) == order_of_action(g, &g.fpc_steps(&sv)) {
                break g0;
            }
        };
        let inst = Instance::Fpc { p: p.clone(), u, v };
        match run_fpc_loop(&inst, &su, &sv, g0.graph, Vec::new(), &cfg) {
            Ok(w) => check(&inst, &w),
            Err(EngineError::PropertyViolation { transcript, .. })
            | Err(EngineError::IterationBudgetExceeded { transcript })
            | Err(EngineError::VertexBudgetExceeded { transcript, .. }) => {
                assert!(transcript.iter().all(|e| matches!(e, TranscriptEntry::Surgery { .. })));
            }
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
}
