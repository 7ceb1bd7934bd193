//! The FPC loop (neither word conjugate into `M x N`) and the two
//! remaining cases: retractions when both are, the oracle when one is.

use std::collections::BTreeMap;

use crate::graphs::{
    component, cycles_near_free, fpc_alphabet, lengths_divide_max, max_cycle_length, no_mixed_square, order_of_action,
    u_cycle_length, ActionGraph, ComponentKind, ComponentRef, FpcComponents, FpcLabels, Label, Step, Violation,
};
use crate::instance::Instance;
use crate::oracle::{oracle_separate, OracleConfig};
use crate::perm::Perm;
use crate::surgery::delta_fpc;
use crate::witness::{verify_witness, Images, SeparationWitness, TranscriptEntry};
use crate::words::{Factor, FpcCase, FpcPresentation, FpcWord};

use super::{finish, with_restarts, EngineConfig, EngineError, Gamma0Search};

#[derive(Debug, Clone, Copy)]
struct Track {
    start: usize,
    l: usize,
    m: usize,
}

/// Vertices along the closed path spelling `w` repeatedly from `start`,
/// one per step (the closing vertex is not repeated).
fn cycle_vertices(g: &ActionGraph, start: usize, w: &[Step]) -> Vec<usize> {
    let k = u_cycle_length(g, start, w);
    let mut out = Vec::with_capacity(k * w.len());
    let mut v = start;
    for _ in 0..k {
        for &s in w {
            out.push(v);
            v = g.step(v, s);
        }
    }
    out
}

fn window_vertices(g: &ActionGraph, w: &[Step], t: Track) -> Vec<usize> {
    let n = w.len();
    let mut v = t.start;
    for i in 0..t.l {
        v = g.step(v, w[i % n]);
    }
    let mut out = vec![v];
    for i in t.l..t.l + t.m {
        v = g.step(v, w[i % n]);
        out.push(v);
    }
    out
}

fn mn_same(c: &FpcComponents, x: usize, y: usize) -> bool {
    c.m.same(x, y) || c.n.same(x, y)
}

/// Offset of a cyclic window of `cycle` whose vertices are pairwise in the
/// same M- or N-component as those of `s`.
fn near_window(c: &FpcComponents, s: &[usize], cycle: &[usize]) -> Option<usize> {
    let q = cycle.len();
    (0..q).find(|&j| s.iter().enumerate().all(|(k, &x)| mn_same(c, x, cycle[(j + k) % q])))
}

/// One start vertex per maximal cycle of `w`.
fn maximal_cycle_starts(g: &ActionGraph, w: &[Step]) -> Vec<usize> {
    let perm = g.word_perm(w);
    let max = max_cycle_length(g, w);
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::new();
    for x in 0..g.vertex_count() {
        if seen[x] {
            continue;
        }
        let mut y = x;
        let mut len = 0;
        while !seen[y] {
            seen[y] = true;
            y = perm.apply(y);
            len += 1;
        }
        if len == max {
            out.push(x);
        }
    }
    out
}

fn validate(g: &ActionGraph, p: &FpcPresentation, us: &[Step], vs: &[Step], near_bound: usize, track: Track) -> Result<Track, Violation> {
    for (name, w) in [("u", us), ("v", vs)] {
        if !lengths_divide_max(g, w) {
            return Err(Violation::new("divisibility", None, format!("{name}-cycle lengths do not all divide the maximum")));
        }
        if let Err(x) = cycles_near_free(g, w, near_bound) {
            return Err(Violation::new("near vertices", Some(x), format!("{name}-cycle has {near_bound}-near vertices")));
        }
    }
    no_mixed_square(g, p)?;
    if track.m == 0 {
        return Ok(track);
    }
    let comps = FpcComponents::new(g, p);
    let s = window_vertices(g, us, track);
    let next = if u_cycle_length(g, track.start, us) == max_cycle_length(g, us) {
        Some(track)
    } else {
        maximal_cycle_starts(g, us).into_iter().find_map(|x| {
            near_window(&comps, &s, &cycle_vertices(g, x, us)).map(|l| Track { start: x, l, m: track.m })
        })
    };
    let next = next.ok_or_else(|| Violation::new("following", None, "no maximal u-cycle follows the tracked path"))?;
    for x in maximal_cycle_starts(g, vs) {
        if near_window(&comps, &s, &cycle_vertices(g, x, vs)).is_none() {
            return Err(Violation::new("following", Some(x), "a maximal v-cycle does not follow the tracked path"));
        }
    }
    Ok(next)
}

/// The first step at or after position `i` of the tracked cycle whose label
/// lies outside M and N: its distance `w` from `i` (counting it), and the
/// M- or N-component of its end vertex.
fn next_cut(g: &ActionGraph, labels: &FpcLabels, us: &[Step], start: usize, i: usize) -> Result<(usize, ComponentRef), Violation> {
    let n = us.len();
    let in_mn = |s: Step| labels.m.contains(&s.label) || labels.n.contains(&s.label);
    let mut v = start;
    for k in 0..i {
        v = g.step(v, us[k % n]);
    }
    for w in 1..=2 {
        let s = us[(i + w - 1) % n];
        let next = g.step(v, s);
        if !in_mn(s) {
            let r = if labels.a.contains(&s.label) {
                component(g, next, &labels.m, ComponentKind::M)
            } else {
                component(g, next, &labels.n, ComponentKind::N)
            };
            return Ok((w, r));
        }
        v = next;
    }
    Err(Violation::new("spelling", None, "two adjacent letters from M and N on the u-cycle"))
}

struct Run<'a> {
    inst: &'a Instance,
    p: &'a FpcPresentation,
    cfg: &'a EngineConfig,
    g: ActionGraph,
    us: Vec<Step>,
    vs: Vec<Step>,
    transcript: Vec<TranscriptEntry>,
}

impl Run<'_> {
    fn diverged(&self) -> bool {
        order_of_action(&self.g, &self.us) != order_of_action(&self.g, &self.vs)
    }

    /// Surgery along `r` with as many copies as the longest u-cycle.
    fn surgery(&mut self, r: &ComponentRef) -> Result<(), EngineError> {
        let n = max_cycle_length(&self.g, &self.us).max(2);
        let needed = self.g.vertex_count().saturating_mul(n);
        if needed > self.cfg.max_vertices {
            return Err(EngineError::VertexBudgetExceeded {
                needed,
                limit: self.cfg.max_vertices,
                transcript: std::mem::take(&mut self.transcript),
            });
        }
        let out = delta_fpc(&self.g, self.p, r, n)?;
        self.transcript.push(TranscriptEntry::Surgery {
            kind: r.kind,
            base_vertex: r.base_vertex,
            side: None,
            n,
            vertices_after: out.graph.vertex_count(),
            cut: out.cut,
        });
        self.g = out.graph;
        Ok(())
    }

    fn check(&mut self, iteration: usize, track: Track) -> Result<Track, EngineError> {
        validate(&self.g, self.p, &self.us, &self.vs, self.cfg.near_bound_fpc, track).map_err(|violation| {
            EngineError::PropertyViolation { iteration, violation, transcript: self.transcript.clone() }
        })
    }

    fn violation(&self, iteration: usize, violation: Violation) -> EngineError {
        EngineError::PropertyViolation { iteration, violation, transcript: self.transcript.clone() }
    }

    fn run(mut self) -> Result<SeparationWitness, EngineError> {
        if self.cfg.max_iterations == 0 {
            return Err(EngineError::IterationBudgetExceeded { transcript: self.transcript });
        }
        if self.diverged() {
            return finish(&self.g, self.inst, self.transcript);
        }
        self.check(0, Track { start: 0, l: 0, m: 0 })?;
        if self.cfg.max_iterations < 2 {
            return Err(EngineError::IterationBudgetExceeded { transcript: self.transcript });
        }
        // First iteration: cut at the first letter, then again at the next
        // letter outside M and N with the square of the cycle length.
        let labels = FpcLabels::new(&self.g, self.p);
        let (_, r) = next_cut(&self.g, &labels, &self.us, 0, 0).map_err(|e| self.violation(1, e))?;
        self.surgery(&r)?;
        if self.diverged() {
            return finish(&self.g, self.inst, self.transcript);
        }
        let (w, r) = next_cut(&self.g, &labels, &self.us, 0, 1).map_err(|e| self.violation(1, e))?;
        self.surgery(&r)?;
        if self.diverged() {
            return finish(&self.g, self.inst, self.transcript);
        }
        let mut track = self.check(1, Track { start: 0, l: w, m: 1 })?;
        for iteration in 2..self.cfg.max_iterations {
            let labels = FpcLabels::new(&self.g, self.p);
            let (w, r) = next_cut(&self.g, &labels, &self.us, track.start, track.l + track.m)
                .map_err(|e| self.violation(iteration, e))?;
            self.surgery(&r)?;
            if self.diverged() {
                return finish(&self.g, self.inst, self.transcript);
            }
            track.m += w;
            track = self.check(iteration, track)?;
        }
        Err(EngineError::IterationBudgetExceeded { transcript: self.transcript })
    }
}

/// The cyclically reduced form of `w`, rotated to start with a letter
/// outside M and N.
pub(crate) fn fpc_spelling(p: &FpcPresentation, w: &FpcWord) -> Option<FpcWord> {
    let (r, _) = p.fpc_cyclically_reduce(w);
    let k = r.letters.iter().position(|&l| !p.in_mn(l))?;
    let mut letters = r.letters[k..].to_vec();
    letters.extend_from_slice(&r.letters[..k]);
    Some(FpcWord { letters })
}

/// Runs the loop from a given starting graph; `su`, `sv` are spellings as
/// returned for the starting-graph search.
pub fn run_fpc_loop(
    inst: &Instance,
    su: &FpcWord,
    sv: &FpcWord,
    gamma0: ActionGraph,
    transcript: Vec<TranscriptEntry>,
    cfg: &EngineConfig,
) -> Result<SeparationWitness, EngineError> {
    let Instance::Fpc { p, .. } = inst else {
        return Err(EngineError::Precondition("expected an FPC instance".into()));
    };
    let us = gamma0.fpc_steps(su);
    let vs = gamma0.fpc_steps(sv);
    Run { inst, p, cfg, g: gamma0, us, vs, transcript }.run()
}

fn require_case(p: &FpcPresentation, u: &FpcWord, v: &FpcWord, want: fn(FpcCase) -> bool, hint: &str) -> Result<(), EngineError> {
    for w in [u, v] {
        p.validate_word(w).map_err(|e| EngineError::Precondition(e.to_string()))?;
    }
    let case = p.classify_case_fpc(u, v).map_err(|_| EngineError::Conjugate)?;
    if case == FpcCase::Excluded {
        return Err(EngineError::ExcludedShape);
    }
    if !want(case) {
        return Err(EngineError::CaseMismatch { found: case, hint: hint.into() });
    }
    Ok(())
}

/// Separates two elements neither of which is conjugate into `M x N`.
pub fn separate_fpc(p: &FpcPresentation, u: &FpcWord, v: &FpcWord, cfg: &EngineConfig) -> Result<SeparationWitness, EngineError> {
    require_case(p, u, v, |c| c == FpcCase::Case3, "use the case-1 retraction or the oracle")?;
    let (su, sv) = match (fpc_spelling(p, u), fpc_spelling(p, v)) {
        (Some(su), Some(sv)) if su.len() > 1 && sv.len() > 1 => (su, sv),
        _ => {
            return Err(EngineError::CaseMismatch {
                found: FpcCase::Case3,
                hint: "a cyclically reduced word of length one lies in a factor; use the oracle".into(),
            })
        }
    };
    let block = p.m_sub().len() * p.n_sub().len();
    let inst = Instance::Fpc { p: p.clone(), u: u.clone(), v: v.clone() };
    let mut search = Gamma0Search::fpc(p, [&su, &sv], cfg);
    with_restarts(cfg, &mut search, |g0| {
        let transcript = vec![TranscriptEntry::Gamma0 {
            vertices: g0.graph.vertex_count(),
            copies: g0.graph.vertex_count() / block,
            attempts: g0.attempts,
            seed: cfg.seed,
        }];
        run_fpc_loop(&inst, &su, &sv, g0.graph, transcript, cfg)
    })
}

/// Both words conjugate into `M x N`: retract onto one factor and look for a
/// quotient of it in which the images have different orders.
pub fn separate_fpc_case1(p: &FpcPresentation, u: &FpcWord, v: &FpcWord) -> Result<SeparationWitness, EngineError> {
    require_case(p, u, v, |c| c == FpcCase::Case1, "case 1 needs both words conjugate into M x N")?;
    let inst = Instance::Fpc { p: p.clone(), u: u.clone(), v: v.clone() };
    for onto in [Factor::A, Factor::B] {
        let grp = p.group(onto);
        let mut normals = grp.normal_subgroups();
        normals.sort_by_key(|k| k.len());
        for k in &normals {
            let (proj, q) = grp.quotient(k);
            let degree = q.order();
            let mut map = BTreeMap::new();
            for l in fpc_alphabet(p) {
                let perm = match (l, onto) {
                    (Label::A(x), Factor::A) | (Label::B(x), Factor::B) => q.regular_perm(proj[x]),
                    _ => Perm::identity(degree),
                };
                map.insert(l, perm);
            }
            let images = Images::new(degree, map);
            let (ou, ov) = (images.fpc_word(u).order(), images.fpc_word(v).order());
            if ou == ov {
                continue;
            }
            let w = SeparationWitness {
                vertices: degree,
                images: images.iter().map(|(l, p)| (*l, p.images().to_vec())).collect(),
                order_u: ou,
                order_v: ov,
                transcript: vec![TranscriptEntry::Retraction { onto, quotient_order: degree }],
            };
            verify_witness(&w, &inst).map_err(EngineError::WitnessRejected)?;
            return Ok(w);
        }
    }
    let (_, note) = p.case1_parts(u, v);
    Err(EngineError::NotSeparableAtScale(match note {
        Some(n) => format!("no quotient of either factor separates the images ({n})"),
        None => "no quotient of either factor separates the images".into(),
    }))
}

/// Exactly one word conjugate into `M x N`: search finite quotients directly.
pub fn separate_fpc_case2(p: &FpcPresentation, u: &FpcWord, v: &FpcWord, ocfg: &OracleConfig) -> Result<SeparationWitness, EngineError> {
    require_case(p, u, v, |c| matches!(c, FpcCase::Case2 { .. }), "case 2 needs exactly one word conjugate into M x N")?;
    let inst = Instance::Fpc { p: p.clone(), u: u.clone(), v: v.clone() };
    let w = oracle_separate(&inst, ocfg).map_err(|nf| EngineError::WitnessNotFound { candidates: nf.candidates })?;
    verify_witness(&w, &inst).map_err(EngineError::WitnessRejected)?;
    Ok(w)
}
