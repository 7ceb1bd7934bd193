//! The HNN loop: repeated stable-letter surgery along the A- or
//! B-component that a maximal u-cycle enters next.

use crate::graphs::{
    component, cycles_near_free, lengths_divide_max, max_cycle_length, order_of_action, u_cycle_length, ActionGraph,
    Components, ComponentKind, HnnComponents, HnnLabels, Path, Step, Violation,
};
use crate::instance::Instance;
use crate::surgery::{delta_hnn, Side};
use crate::witness::{SeparationWitness, TranscriptEntry};
use crate::words::hnn::{cyclic_spelling, hnn_conjugate, hnn_cyclically_reduce, same_associated_coset};
use crate::words::{HnnLetter, HnnPresentation, HnnWord};

use super::{finish, with_restarts, EngineConfig, EngineError, Gamma0Search};

/// A stable step of a closed path: orientation and end vertices.
#[derive(Debug, Clone, Copy)]
struct StableStep {
    pos: usize,
    forward: bool,
    from: usize,
    to: usize,
}

fn stable_steps(g: &ActionGraph, stable: usize, p: &Path) -> Vec<StableStep> {
    let mut out = Vec::new();
    let mut v = p.start;
    for (pos, &s) in p.steps.iter().enumerate() {
        let w = g.step(v, s);
        if s.label == stable {
            out.push(StableStep { pos, forward: s.forward, from: v, to: w });
        }
        v = w;
    }
    out
}

fn matches(comps: &HnnComponents, x: &StableStep, y: &StableStep) -> bool {
    let (src, dst): (&Components, &Components) = if x.forward { (&comps.a, &comps.b) } else { (&comps.b, &comps.a) };
    x.forward == y.forward && src.same(x.from, y.from) && dst.same(x.to, y.to)
}

/// Offset `l` and length `m` of a cyclic subpath of `cycle` that is G-near
/// to `s` and ends with a stable step.
fn g_near_window(comps: &HnnComponents, s: &[StableStep], cycle: &[StableStep], cycle_len: usize) -> Option<(usize, usize)> {
    let q = cycle.len();
    if s.is_empty() || q == 0 {
        return None;
    }
    (0..q).find(|&j| (0..s.len()).all(|k| matches(comps, &s[k], &cycle[(j + k) % q]))).map(|j| {
        let first = cycle[j].pos;
        let last_index = j + s.len() - 1;
        let last = cycle[last_index % q].pos + (last_index / q) * cycle_len;
        (first, last + 1 - first)
    })
}

/// The tracked maximal u-cycle `T` (by start vertex) and the window
/// `T[l .. l+m]` that the loop has followed so far.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Track {
    start: usize,
    l: usize,
    m: usize,
}

fn walk_path(g: &ActionGraph, start: usize, steps: &[Step], from: usize, len: usize) -> Path {
    let n = steps.len();
    let mut v = start;
    for i in 0..from {
        v = g.step(v, steps[i % n]);
    }
    Path { start: v, steps: (from..from + len).map(|i| steps[i % n]).collect() }
}

/// Checks the loop invariants on the current graph and returns the track
/// to follow next.
fn validate(
    g: &ActionGraph,
    p: &HnnPresentation,
    us: &[Step],
    vs: &[Step],
    near_bound: usize,
    track: Track,
) -> Result<Track, Violation> {
    for (name, w) in [("u", us), ("v", vs)] {
        if !lengths_divide_max(g, w) {
            return Err(Violation::new("divisibility", None, format!("{name}-cycle lengths do not all divide the maximum")));
        }
        if let Err(x) = cycles_near_free(g, w, near_bound) {
            return Err(Violation::new("near vertices", Some(x), format!("{name}-cycle has {near_bound}-near vertices")));
        }
    }
    if track.m == 0 {
        return Ok(track);
    }
    let labels = HnnLabels::new(g, p);
    let comps = HnnComponents::new(g, p);
    let nu = max_cycle_length(g, us);
    let cycle_steps = |start: usize, w: &[Step]| {
        let k = u_cycle_length(g, start, w);
        walk_path(g, start, w, 0, k * w.len())
    };
    let s_path = walk_path(g, track.start, us, track.l, track.m);
    if s_path.steps.last().map(|s| s.label) != Some(labels.stable) {
        return Err(Violation::new("last step", None, "followed path does not end with a stable step"));
    }
    let s = stable_steps(g, labels.stable, &s_path);
    let mut next = None;
    if u_cycle_length(g, track.start, us) == nu {
        next = Some(track);
    } else {
        let perm = g.word_perm(us);
        let mut seen = vec![false; g.vertex_count()];
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
            if len != nu {
                continue;
            }
            let c = cycle_steps(x, us);
            if let Some((l, m)) = g_near_window(&comps, &s, &stable_steps(g, labels.stable, &c), c.len()) {
                next = Some(Track { start: x, l, m });
                break;
            }
        }
    }
    let next = next.ok_or_else(|| Violation::new("following", None, "no maximal u-cycle follows the tracked path"))?;
    let nv = max_cycle_length(g, vs);
    let perm = g.word_perm(vs);
    let mut seen = vec![false; g.vertex_count()];
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
        if len != nv {
            continue;
        }
        let c = cycle_steps(x, vs);
        if g_near_window(&comps, &s, &stable_steps(g, labels.stable, &c), c.len()).is_none() {
            return Err(Violation::new("following", Some(x), "a maximal v-cycle does not follow the tracked path"));
        }
    }
    Ok(next)
}

/// Where the next surgery happens: the component containing the start of
/// the next stable step along the tracked cycle, and how many steps that
/// consumes.
fn next_cut(g: &ActionGraph, stable: usize, us: &[Step], track: Track) -> Result<(usize, bool, usize), Violation> {
    let n = us.len();
    let i = track.l + track.m;
    let mut v = track.start;
    for k in 0..i {
        v = g.step(v, us[k % n]);
    }
    let f = us[i % n];
    if f.label == stable {
        return Ok((v, f.forward, 1));
    }
    let f2 = us[(i + 1) % n];
    if f2.label != stable {
        return Err(Violation::new("spelling", None, "two adjacent base letters on the u-cycle"));
    }
    Ok((g.step(v, f), f2.forward, 2))
}

/// Runs the loop from a given starting graph. `su` and `sv` are the cyclic
/// spellings of the cyclically reduced u and v.
pub fn run_hnn_loop(
    inst: &Instance,
    su: &[HnnLetter],
    sv: &[HnnLetter],
    gamma0: ActionGraph,
    mut transcript: Vec<TranscriptEntry>,
    cfg: &EngineConfig,
) -> Result<SeparationWitness, EngineError> {
    let Instance::Hnn { p, .. } = inst else {
        return Err(EngineError::Precondition("expected an HNN instance".into()));
    };
    if cfg.max_iterations == 0 {
        return Err(EngineError::IterationBudgetExceeded { transcript });
    }
    let mut g = gamma0;
    let us = g.hnn_steps(su);
    let vs = g.hnn_steps(sv);
    let stable = HnnLabels::new(&g, p).stable;
    if order_of_action(&g, &us) != order_of_action(&g, &vs) {
        return finish(&g, inst, transcript);
    }
    let mut track = validate(&g, p, &us, &vs, cfg.near_bound_hnn, Track { start: 0, l: 0, m: 0 })
        .map_err(|violation| EngineError::PropertyViolation { iteration: 0, violation, transcript: transcript.clone() })?;
    for iteration in 1..cfg.max_iterations {
        let (x, forward, consumed) = next_cut(&g, stable, &us, track).map_err(|violation| {
            EngineError::PropertyViolation { iteration, violation, transcript: transcript.clone() }
        })?;
        let labels = HnnLabels::new(&g, p);
        let (k, side) = if forward {
            (component(&g, x, &labels.a, ComponentKind::A), Side::From)
        } else {
            (component(&g, x, &labels.b, ComponentKind::B), Side::Into)
        };
        let n = max_cycle_length(&g, &us).max(2);
        let needed = g.vertex_count().saturating_mul(n);
        if needed > cfg.max_vertices {
            return Err(EngineError::VertexBudgetExceeded { needed, limit: cfg.max_vertices, transcript });
        }
        let out = delta_hnn(&g, p, &k, side, n)?;
        transcript.push(TranscriptEntry::Surgery {
            kind: k.kind,
            base_vertex: x,
            side: Some(side),
            n,
            vertices_after: out.graph.vertex_count(),
            cut: out.cut,
        });
        g = out.graph;
        if order_of_action(&g, &us) != order_of_action(&g, &vs) {
            return finish(&g, inst, transcript);
        }
        track.m += consumed;
        track = validate(&g, p, &us, &vs, cfg.near_bound_hnn, track)
            .map_err(|violation| EngineError::PropertyViolation { iteration, violation, transcript: transcript.clone() })?;
    }
    Err(EngineError::IterationBudgetExceeded { transcript })
}

/// Separates `u` and `v` in an HNN extension by a finite action graph in
/// which their images have different orders.
pub fn separate_hnn(p: &HnnPresentation, u: &HnnWord, v: &HnnWord, cfg: &EngineConfig) -> Result<SeparationWitness, EngineError> {
    for w in [u, v] {
        p.validate_word(w).map_err(|e| EngineError::Precondition(e.to_string()))?;
    }
    let g = p.base();
    let (ru, _) = hnn_cyclically_reduce(p, u);
    let (rv, _) = hnn_cyclically_reduce(p, v);
    if ru.tail.is_empty() || rv.tail.is_empty() {
        return Err(EngineError::Precondition("u and v must not be conjugate into the base group".into()));
    }
    let v_inv = rv.inverse(g);
    if hnn_conjugate(p, &ru, &rv) || hnn_conjugate(p, &ru, &v_inv) {
        return Err(EngineError::Conjugate);
    }
    if same_associated_coset(p, &ru, &rv) || same_associated_coset(p, &ru, &v_inv) {
        return Err(EngineError::ExcludedShape);
    }
    let su = cyclic_spelling(g, &ru);
    let sv = cyclic_spelling(g, &rv);
    let inst = Instance::Hnn { p: p.clone(), u: u.clone(), v: v.clone() };
    let mut search = Gamma0Search::hnn(p, [&su, &sv], cfg);
    with_restarts(cfg, &mut search, |g0| {
        let transcript = vec![TranscriptEntry::Gamma0 {
            vertices: g0.graph.vertex_count(),
            copies: g0.graph.vertex_count() / g.order(),
            attempts: g0.attempts,
            seed: cfg.seed,
        }];
        run_hnn_loop(&inst, &su, &sv, g0.graph, transcript, cfg)
    })
}
