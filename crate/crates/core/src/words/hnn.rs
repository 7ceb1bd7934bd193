//! HNN extensions `<G, t | t^-1 a t = phi(a), a in A>` of a finite group:
//! Britton reduction, coset normal forms, cyclic reduction and conjugacy.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::WordError;
use crate::groups::{check_iso, CosetSide, FiniteGroup, GroupIso, Subgroup};

#[derive(Debug, Clone)]
pub struct HnnPresentation {
    base: FiniteGroup,
    a_sub: Subgroup,
    b_sub: Subgroup,
    phi: GroupIso,
}

impl HnnPresentation {
    pub fn new(base: FiniteGroup, phi: GroupIso) -> Result<Self, WordError> {
        let a_sub = phi.source().clone();
        let b_sub = phi.target().clone();
        if a_sub.parent_order() != base.order() {
            return Err(WordError::Presentation("associated subgroups live in a different group".into()));
        }
        if !check_iso(&base, &phi) {
            return Err(WordError::Presentation("phi is not an isomorphism A -> B".into()));
        }
        Ok(HnnPresentation { base, a_sub, b_sub, phi })
    }

    pub fn base(&self) -> &FiniteGroup {
        &self.base
    }

    pub fn a_sub(&self) -> &Subgroup {
        &self.a_sub
    }

    pub fn b_sub(&self) -> &Subgroup {
        &self.b_sub
    }

    pub fn phi(&self) -> &GroupIso {
        &self.phi
    }

    /// Elements of A and of B, without repetition, identity excluded.
    pub fn associated_elements(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .a_sub
            .elements()
            .iter()
            .chain(self.b_sub.elements())
            .copied()
            .filter(|&x| x != self.base.identity())
            .collect();
        set.into_iter().collect()
    }

    pub fn validate_word(&self, w: &HnnWord) -> Result<(), WordError> {
        let n = self.base.order();
        if w.g0 >= n {
            return Err(WordError::BadElement { index: 0, element: w.g0 });
        }
        for (i, s) in w.tail.iter().enumerate() {
            if s.e != 1 && s.e != -1 {
                return Err(WordError::BadExponent(i + 1));
            }
            if s.g >= n {
                return Err(WordError::BadElement { index: i + 1, element: s.g });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syllable {
    pub e: i8,
    pub g: usize,
}

/// `g0 * t^e1 g1 * ... * t^en gn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HnnWord {
    pub g0: usize,
    #[serde(default)]
    pub tail: Vec<Syllable>,
}

/// A single generator occurrence: a base element or `t^{+-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HnnLetter {
    Base(usize),
    Stable(i8),
}

impl HnnWord {
    pub fn base(g: usize) -> Self {
        HnnWord { g0: g, tail: Vec::new() }
    }

    pub fn new(g0: usize, tail: &[(i8, usize)]) -> Self {
        HnnWord { g0, tail: tail.iter().map(|&(e, g)| Syllable { e, g }).collect() }
    }

    /// Number of stable letters.
    pub fn tail_len(&self) -> usize {
        self.tail.len()
    }

    pub fn letters(&self) -> Vec<HnnLetter> {
        let mut out = vec![HnnLetter::Base(self.g0)];
        for s in &self.tail {
            out.push(HnnLetter::Stable(s.e));
            out.push(HnnLetter::Base(s.g));
        }
        out
    }

    /// Collects letters into syllable form, multiplying adjacent base letters.
    pub fn from_letters(g: &FiniteGroup, letters: &[HnnLetter]) -> Self {
        let mut w = HnnWord::base(g.identity());
        for l in letters {
            match *l {
                HnnLetter::Base(x) => match w.tail.last_mut() {
                    Some(s) => s.g = g.mul(s.g, x),
                    None => w.g0 = g.mul(w.g0, x),
                },
                HnnLetter::Stable(e) => w.tail.push(Syllable { e, g: g.identity() }),
            }
        }
        w
    }

    pub fn concat(&self, g: &FiniteGroup, other: &HnnWord) -> Self {
        let mut letters = self.letters();
        letters.extend(other.letters());
        Self::from_letters(g, &letters)
    }

    pub fn inverse(&self, g: &FiniteGroup) -> Self {
        let letters: Vec<HnnLetter> = self
            .letters()
            .into_iter()
            .rev()
            .map(|l| match l {
                HnnLetter::Base(x) => HnnLetter::Base(g.inv(x)),
                HnnLetter::Stable(e) => HnnLetter::Stable(-e),
            })
            .collect();
        Self::from_letters(g, &letters)
    }

    pub fn pow(&self, g: &FiniteGroup, k: usize) -> Self {
        (0..k).fold(HnnWord::base(g.identity()), |acc, _| acc.concat(g, self))
    }

    /// `c^-1 self c`
    pub fn conjugate_by(&self, g: &FiniteGroup, c: &HnnWord) -> Self {
        c.inverse(g).concat(g, self).concat(g, c)
    }

    /// Rewrites as letters with identity base letters dropped.
    pub fn nontrivial_letters(&self, g: &FiniteGroup) -> Vec<HnnLetter> {
        self.letters()
            .into_iter()
            .filter(|l| *l != HnnLetter::Base(g.identity()))
            .collect()
    }
}

fn pinch(p: &HnnPresentation, before: i8, middle: usize, after: i8) -> Option<usize> {
    match (before, after) {
        (-1, 1) if p.a_sub.contains(middle) => Some(p.phi.apply(middle)),
        (1, -1) if p.b_sub.contains(middle) => Some(p.phi.apply_inv(middle)),
        _ => None,
    }
}

/// Removes pinches `t^-1 a t` (a in A) and `t b t^-1` (b in B) until none is
/// left. Each removal shortens the tail by two.
pub fn hnn_reduce(p: &HnnPresentation, w: &HnnWord) -> HnnWord {
    let g = &p.base;
    let mut head = w.g0;
    let mut stack: Vec<Syllable> = Vec::with_capacity(w.tail.len());
    for s in &w.tail {
        match stack.last().and_then(|top| pinch(p, top.e, top.g, s.e)) {
            Some(x) => {
                stack.pop();
                let y = g.mul(x, s.g);
                match stack.last_mut() {
                    Some(prev) => prev.g = g.mul(prev.g, y),
                    None => head = g.mul(head, y),
                }
            }
            None => stack.push(*s),
        }
    }
    HnnWord { g0: head, tail: stack }
}

pub fn is_reduced(p: &HnnPresentation, w: &HnnWord) -> bool {
    w.tail.windows(2).all(|pair| pinch(p, pair[0].e, pair[0].g, pair[1].e).is_none())
}

/// True iff every cyclic permutation of the syllables is pinch-free.
pub fn is_cyclically_reduced(p: &HnnPresentation, w: &HnnWord) -> bool {
    if !is_reduced(p, w) {
        return false;
    }
    match (w.tail.first(), w.tail.last()) {
        (Some(first), Some(last)) => {
            let wrap = p.base.mul(last.g, w.g0);
            pinch(p, last.e, wrap, first.e).is_none()
        }
        _ => true,
    }
}

/// Britton normal form of a reduced word: each base letter before `t` is a
/// least representative of its left coset of A, before `t^-1` of B.
pub fn normal_form(p: &HnnPresentation, w: &HnnWord) -> HnnWord {
    let r = hnn_reduce(p, w);
    let g = &p.base;
    let (rep_a, _) = g.coset_labels(&p.a_sub, CosetSide::Left);
    let (rep_b, _) = g.coset_labels(&p.b_sub, CosetSide::Left);
    let mut out = HnnWord { g0: r.g0, tail: Vec::with_capacity(r.tail.len()) };
    let mut bases: Vec<usize> = std::iter::once(r.g0).chain(r.tail.iter().map(|s| s.g)).collect();
    for (i, s) in r.tail.iter().enumerate() {
        let x = bases[i];
        let (rep, pushed) = if s.e == 1 {
            let rep = rep_a[x];
            let a = g.mul(g.inv(rep), x);
            (rep, p.phi.apply(a))
        } else {
            let rep = rep_b[x];
            let b = g.mul(g.inv(rep), x);
            (rep, p.phi.apply_inv(b))
        };
        bases[i] = rep;
        bases[i + 1] = g.mul(pushed, bases[i + 1]);
    }
    out.g0 = bases[0];
    for (i, s) in r.tail.iter().enumerate() {
        out.tail.push(Syllable { e: s.e, g: bases[i + 1] });
    }
    out
}

/// Equality of group elements via Britton normal forms.
pub fn hnn_equal(p: &HnnPresentation, w1: &HnnWord, w2: &HnnWord) -> bool {
    normal_form(p, w1) == normal_form(p, w2)
}

/// Returns `(r, c)` with `r` cyclically reduced and `w = c r c^-1`.
pub fn hnn_cyclically_reduce(p: &HnnPresentation, w: &HnnWord) -> (HnnWord, HnnWord) {
    let g = &p.base;
    let mut cur = hnn_reduce(p, w);
    let mut conj = HnnWord::base(g.identity());
    loop {
        let (first, last) = match (cur.tail.first(), cur.tail.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return (cur, conj),
        };
        let wrap = g.mul(last.g, cur.g0);
        if pinch(p, last.e, wrap, first.e).is_none() {
            return (cur, conj);
        }
        // cur = g0 y g0^-1 with y = t^e1 g1 ... t^en (gn g0); with x = t^en (gn g0)
        // the conjugate x y x^-1 has the wrap-around pinch in its interior.
        let y = HnnWord { g0: g.identity(), tail: rotated_tail(g, &cur) };
        let x = HnnWord { g0: g.identity(), tail: vec![Syllable { e: last.e, g: wrap }] };
        let x_inv = x.inverse(g);
        conj = conj.concat(g, &HnnWord::base(cur.g0)).concat(g, &x_inv);
        cur = hnn_reduce(p, &x.concat(g, &y).concat(g, &x_inv));
    }
}

/// The syllables of `g0^-1 w g0`, i.e. `t^e1 g1 ... t^en (gn g0)`.
fn rotated_tail(g: &FiniteGroup, w: &HnnWord) -> Vec<Syllable> {
    let mut tail = w.tail.clone();
    if let Some(last) = tail.last_mut() {
        last.g = g.mul(last.g, w.g0);
    }
    tail
}

/// All cyclic permutations of a cyclically reduced word with nonempty tail,
/// both those starting with a stable letter and those ending with one.
pub fn cyclic_rotations(g: &FiniteGroup, w: &HnnWord) -> Vec<HnnWord> {
    let base = rotated_tail(g, w);
    let n = base.len();
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        let tail: Vec<Syllable> = (0..n).map(|i| base[(k + i) % n]).collect();
        let starts_t = HnnWord { g0: g.identity(), tail: tail.clone() };
        // Move the trailing base letter to the front.
        let h = tail[n - 1].g;
        let mut t_end = HnnWord { g0: h, tail };
        t_end.tail[n - 1].g = g.identity();
        out.push(starts_t);
        out.push(t_end);
    }
    out
}

/// The letter sequence used to walk a cyclically reduced word around a
/// cycle: starts with a stable letter and merges the wrap-around base
/// letters, so repeating it never produces adjacent base letters.
pub fn cyclic_spelling(g: &FiniteGroup, w: &HnnWord) -> Vec<HnnLetter> {
    if w.tail.is_empty() {
        return if w.g0 == g.identity() { Vec::new() } else { vec![HnnLetter::Base(w.g0)] };
    }
    let mut out = Vec::new();
    for s in rotated_tail(g, w) {
        out.push(HnnLetter::Stable(s.e));
        if s.g != g.identity() {
            out.push(HnnLetter::Base(s.g));
        }
    }
    out
}

/// Conjugacy of elliptic elements: closure of a base element under base
/// conjugation and the moves a -> phi(a), b -> phi^-1(b).
fn elliptic_class(p: &HnnPresentation, x: usize) -> Vec<bool> {
    let g = &p.base;
    let mut seen = vec![false; g.order()];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(y) = queue.pop_front() {
        let mut next: Vec<usize> = (0..g.order()).map(|c| g.conj(y, c)).collect();
        if p.a_sub.contains(y) {
            next.push(p.phi.apply(y));
        }
        if p.b_sub.contains(y) {
            next.push(p.phi.apply_inv(y));
        }
        for z in next {
            if !seen[z] {
                seen[z] = true;
                queue.push_back(z);
            }
        }
    }
    seen
}

/// Decides conjugacy of two elements.
pub fn hnn_conjugate(p: &HnnPresentation, u: &HnnWord, v: &HnnWord) -> bool {
    let g = &p.base;
    let (ru, _) = hnn_cyclically_reduce(p, u);
    let (rv, _) = hnn_cyclically_reduce(p, v);
    if ru.tail_len() != rv.tail_len() {
        return false;
    }
    if ru.tail.is_empty() {
        return elliptic_class(p, ru.g0)[rv.g0];
    }
    let signs = |w: &HnnWord| {
        let mut s: Vec<i8> = w.tail.iter().map(|s| s.e).collect();
        s.sort_unstable();
        s
    };
    if signs(&ru) != signs(&rv) {
        return false;
    }
    let target = normal_form(p, &rv);
    let conjugators: Vec<usize> = std::iter::once(g.identity()).chain(p.associated_elements()).collect();
    cyclic_rotations(g, &ru).iter().any(|rot| {
        conjugators.iter().any(|&c| {
            let cw = HnnWord::base(c);
            normal_form(p, &rot.conjugate_by(g, &cw)) == target
        })
    })
}

/// True iff some cyclic permutations `x` of `u` and `y` of `v` satisfy
/// `y = x h` with `h` in A or B, i.e. the cyclically reduced forms lie in
/// one coset of an associated subgroup.
pub fn same_associated_coset(p: &HnnPresentation, u: &HnnWord, v: &HnnWord) -> bool {
    let g = &p.base;
    let (ru, _) = hnn_cyclically_reduce(p, u);
    let (rv, _) = hnn_cyclically_reduce(p, v);
    if ru.tail.is_empty() || rv.tail.is_empty() {
        return false;
    }
    let hs = p.associated_elements();
    let rots_v: Vec<HnnWord> = cyclic_rotations(g, &rv).iter().map(|y| normal_form(p, y)).collect();
    cyclic_rotations(g, &ru).iter().any(|x| {
        hs.iter().any(|&h| {
            let xh = normal_form(p, &x.concat(g, &HnnWord::base(h)));
            rots_v.contains(&xh)
        })
    })
}
