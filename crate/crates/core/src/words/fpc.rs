//! Free products `(A * B; [M, N])` of finite groups in which every element
//! of `M < A` commutes with every element of `N < B`.
//!
//! Reduced notation: no two adjacent letters from one factor, and (for
//! words longer than two letters) no two adjacent letters both in `M ∪ N`.
//! Reduced notations of one element have equal length but are not unique:
//! an interior letter from `N` lets an element of `M` slide between its two
//! neighbours (and symmetrically). The canonical form fixes this by taking
//! the least element of the coset `xM` (resp. `xN`) for the left neighbour
//! and pushing the remainder to the right.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::WordError;
use crate::groups::{CosetSide, FiniteGroup, Subgroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::A => Factor::B,
            Factor::B => Factor::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpcLetter {
    pub f: Factor,
    pub g: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpcWord {
    pub letters: Vec<FpcLetter>,
}

impl FpcWord {
    pub fn empty() -> Self {
        FpcWord { letters: Vec::new() }
    }

    pub fn new(letters: &[(Factor, usize)]) -> Self {
        FpcWord { letters: letters.iter().map(|&(f, g)| FpcLetter { f, g }).collect() }
    }

    pub fn letter(f: Factor, g: usize) -> Self {
        FpcWord { letters: vec![FpcLetter { f, g }] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &FpcWord) -> FpcWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        FpcWord { letters }
    }
}

#[derive(Debug, Clone)]
pub struct FpcPresentation {
    a_grp: FiniteGroup,
    b_grp: FiniteGroup,
    m_sub: Subgroup,
    n_sub: Subgroup,
}

/// Case split for a pair of non-conjugate elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FpcCase {
    /// Both lie in conjugates of `<M, N>`.
    Case1,
    /// Exactly one lies in a conjugate of `<M, N>`; `elliptic_is_u` says which.
    Case2 { elliptic_is_u: bool },
    /// Neither does.
    Case3,
    /// `u = x^-1 m x y^-1 n y`, `v = x'^-1 m x' y'^-1 n y'` with shared `m`, `n`.
    Excluded,
}

impl FpcPresentation {
    pub fn new(a_grp: FiniteGroup, b_grp: FiniteGroup, m_sub: Subgroup, n_sub: Subgroup) -> Result<Self, WordError> {
        if m_sub.parent_order() != a_grp.order() || n_sub.parent_order() != b_grp.order() {
            return Err(WordError::Presentation("commutative subgroups live in the wrong factor".into()));
        }
        Ok(FpcPresentation { a_grp, b_grp, m_sub, n_sub })
    }

    pub fn a_grp(&self) -> &FiniteGroup {
        &self.a_grp
    }

    pub fn b_grp(&self) -> &FiniteGroup {
        &self.b_grp
    }

    pub fn m_sub(&self) -> &Subgroup {
        &self.m_sub
    }

    pub fn n_sub(&self) -> &Subgroup {
        &self.n_sub
    }

    pub fn group(&self, f: Factor) -> &FiniteGroup {
        match f {
            Factor::A => &self.a_grp,
            Factor::B => &self.b_grp,
        }
    }

    /// M for factor A, N for factor B.
    pub fn commuting(&self, f: Factor) -> &Subgroup {
        match f {
            Factor::A => &self.m_sub,
            Factor::B => &self.n_sub,
        }
    }

    pub fn in_mn(&self, l: FpcLetter) -> bool {
        self.commuting(l.f).contains(l.g)
    }

    pub fn is_identity(&self, l: FpcLetter) -> bool {
        l.g == self.group(l.f).identity()
    }

    pub fn validate_word(&self, w: &FpcWord) -> Result<(), WordError> {
        for (i, l) in w.letters.iter().enumerate() {
            let g = self.group(l.f);
            if l.g >= g.order() {
                return Err(WordError::BadElement { index: i, element: l.g });
            }
            if l.g == g.identity() {
                return Err(WordError::IdentityLetter(i));
            }
        }
        Ok(())
    }

    pub fn inverse(&self, w: &FpcWord) -> FpcWord {
        FpcWord {
            letters: w
                .letters
                .iter()
                .rev()
                .map(|l| FpcLetter { f: l.f, g: self.group(l.f).inv(l.g) })
                .collect(),
        }
    }

    /// `c^-1 w c`, unreduced.
    pub fn conjugate_by(&self, w: &FpcWord, c: &FpcWord) -> FpcWord {
        self.inverse(c).concat(w).concat(c)
    }

    pub fn pow(&self, w: &FpcWord, k: usize) -> FpcWord {
        FpcWord { letters: (0..k).flat_map(|_| w.letters.iter().copied()).collect() }
    }

    /// All nonidentity letters of both factors.
    pub fn alphabet(&self) -> Vec<FpcLetter> {
        let mut out = Vec::new();
        for f in [Factor::A, Factor::B] {
            let g = self.group(f);
            out.extend((0..g.order()).filter(|&x| x != g.identity()).map(|x| FpcLetter { f, g: x }));
        }
        out
    }

    fn merge_adjacent(&self, letters: &[FpcLetter]) -> Vec<FpcLetter> {
        let mut out: Vec<FpcLetter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if self.is_identity(l) {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.f == l.f => {
                    top.g = self.group(l.f).mul(top.g, l.g);
                    if self.is_identity(*top) {
                        out.pop();
                    }
                }
                _ => out.push(l),
            }
        }
        out
    }

    /// Some reduced notation of `w` (not yet canonical).
    pub fn reduced_notation(&self, w: &FpcWord) -> FpcWord {
        let mut letters = self.merge_adjacent(&w.letters);
        while letters.len() > 2 {
            let pos = letters.windows(2).position(|p| self.in_mn(p[0]) && self.in_mn(p[1]));
            match pos {
                Some(i) => {
                    letters.swap(i, i + 1);
                    letters = self.merge_adjacent(&letters);
                }
                None => break,
            }
        }
        FpcWord { letters }
    }

    pub fn is_reduced(&self, w: &FpcWord) -> bool {
        w.letters.iter().all(|&l| !self.is_identity(l))
            && w.letters.windows(2).all(|p| p[0].f != p[1].f)
            && (w.len() <= 2 || w.letters.windows(2).all(|p| !(self.in_mn(p[0]) && self.in_mn(p[1]))))
    }

    /// Canonical reduced notation.
    pub fn fpc_reduce(&self, w: &FpcWord) -> FpcWord {
        let mut letters = self.reduced_notation(w).letters;
        let n = letters.len();
        if n == 2 && self.in_mn(letters[0]) && self.in_mn(letters[1]) && letters[0].f == Factor::B {
            letters.swap(0, 1);
        }
        for i in 1..n.saturating_sub(1) {
            if !self.in_mn(letters[i]) {
                continue;
            }
            // letters[i] lies in N (resp. M); its neighbours lie in A (resp. B)
            // and elements of M (resp. N) slide across it.
            let f = letters[i - 1].f;
            let g = self.group(f);
            let sub = self.commuting(f);
            let (rep, _) = g.coset_labels(sub, CosetSide::Left);
            let x = letters[i - 1].g;
            let c = rep[x];
            let moved = g.mul(g.inv(c), x);
            letters[i - 1].g = c;
            letters[i + 1].g = g.mul(moved, letters[i + 1].g);
        }
        FpcWord { letters }
    }

    pub fn product(&self, w1: &FpcWord, w2: &FpcWord) -> FpcWord {
        self.fpc_reduce(&w1.concat(w2))
    }

    pub fn fpc_equal(&self, w1: &FpcWord, w2: &FpcWord) -> bool {
        self.fpc_reduce(&w1.concat(&self.inverse(w2))).is_empty()
    }

    /// Returns `(r, c)` with `r` cyclically reduced and `w = c r c^-1`.
    pub fn fpc_cyclically_reduce(&self, w: &FpcWord) -> (FpcWord, FpcWord) {
        let mut cur = self.fpc_reduce(w);
        let mut conj = FpcWord::empty();
        loop {
            let n = cur.len();
            if n < 2 {
                return (cur, conj);
            }
            let (first, last) = (cur.letters[0], cur.letters[n - 1]);
            let wrap = first.f == last.f || (n > 2 && self.in_mn(first) && self.in_mn(last));
            if !wrap {
                return (cur, conj);
            }
            // cur = last^-1 (last cur last^-1) last
            let l = FpcWord { letters: vec![last] };
            conj = conj.concat(&self.inverse(&l));
            cur = self.fpc_reduce(&self.conjugate_by(&cur, &self.inverse(&l)));
        }
    }

    pub fn is_cyclically_reduced(&self, w: &FpcWord) -> bool {
        if !self.is_reduced(w) {
            return false;
        }
        let n = w.len();
        if n < 2 {
            return true;
        }
        let (first, last) = (w.letters[0], w.letters[n - 1]);
        first.f != last.f && !(n > 2 && self.in_mn(first) && self.in_mn(last))
    }

    /// True iff some conjugate of `w` lies in `<M, N> = M x N`.
    pub fn in_mn_conjugate(&self, w: &FpcWord) -> bool {
        let (r, _) = self.fpc_cyclically_reduce(w);
        r.len() <= 2 && r.letters.iter().all(|&l| self.in_mn(l))
    }

    /// Conjugators tried by the conjugacy closure: single letters and
    /// products `m n` of the commuting subgroups.
    fn closure_conjugators(&self) -> Vec<FpcWord> {
        let mut out: Vec<FpcWord> = self.alphabet().into_iter().map(|l| FpcWord { letters: vec![l] }).collect();
        for &m in self.m_sub.elements() {
            for &n in self.n_sub.elements() {
                if m != self.a_grp.identity() && n != self.b_grp.identity() {
                    out.push(FpcWord::new(&[(Factor::A, m), (Factor::B, n)]));
                }
            }
        }
        out
    }

    /// Every cyclically reduced conjugate of `w`, in canonical form.
    pub fn cyclic_conjugates(&self, w: &FpcWord) -> BTreeSet<FpcWord> {
        let (start, _) = self.fpc_cyclically_reduce(w);
        let len = start.len();
        let conjugators = self.closure_conjugators();
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for c in &conjugators {
                let (y, _) = self.fpc_cyclically_reduce(&self.conjugate_by(&x, c));
                if y.len() == len && seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    pub fn fpc_conjugate(&self, u: &FpcWord, v: &FpcWord) -> bool {
        let (ru, _) = self.fpc_cyclically_reduce(u);
        let (rv, _) = self.fpc_cyclically_reduce(v);
        if ru.len() != rv.len() {
            return false;
        }
        let class = self.cyclic_conjugates(&ru);
        class.contains(&rv) || class.iter().any(|x| self.fpc_equal(x, &rv))
    }

    /// `(m, n)` parts of an element of `M x N`, given any word for it.
    fn mn_parts(&self, r: &FpcWord) -> (usize, usize) {
        let mut m = self.a_grp.identity();
        let mut n = self.b_grp.identity();
        for l in &r.letters {
            match l.f {
                Factor::A => m = self.a_grp.mul(m, l.g),
                Factor::B => n = self.b_grp.mul(n, l.g),
            }
        }
        (m, n)
    }

    /// Case split for non-conjugate `u`, `v`.
    pub fn classify_case_fpc(&self, u: &FpcWord, v: &FpcWord) -> Result<FpcCase, WordError> {
        if self.fpc_conjugate(u, v) || self.fpc_conjugate(u, &self.inverse(v)) {
            return Err(WordError::Conjugate);
        }
        let eu = self.in_mn_conjugate(u);
        let ev = self.in_mn_conjugate(v);
        Ok(match (eu, ev) {
            (true, true) => {
                let (mu, nu) = self.mn_parts(&self.fpc_cyclically_reduce(u).0);
                let (mv, nv) = self.mn_parts(&self.fpc_cyclically_reduce(v).0);
                if self.a_grp.are_conjugate(mu, mv) && self.b_grp.are_conjugate(nu, nv) {
                    FpcCase::Excluded
                } else {
                    FpcCase::Case1
                }
            }
            (true, false) => FpcCase::Case2 { elliptic_is_u: true },
            (false, true) => FpcCase::Case2 { elliptic_is_u: false },
            (false, false) => FpcCase::Case3,
        })
    }

    /// For a case-1 pair, the M-parts `(a, a')` of the cyclically reduced
    /// forms and a note when only one of the M- and N-parts is shared up to
    /// conjugacy (a configuration the case split leaves open).
    pub fn case1_parts(&self, u: &FpcWord, v: &FpcWord) -> ((usize, usize), Option<String>) {
        let (mu, nu) = self.mn_parts(&self.fpc_cyclically_reduce(u).0);
        let (mv, nv) = self.mn_parts(&self.fpc_cyclically_reduce(v).0);
        let shared_m = self.a_grp.are_conjugate(mu, mv);
        let shared_n = self.b_grp.are_conjugate(nu, nv);
        let note = (shared_m != shared_n).then(|| {
            format!(
                "partial match: M-parts {} conjugate, N-parts {} conjugate; classified as case 1",
                if shared_m { "are" } else { "are not" },
                if shared_n { "are" } else { "are not" }
            )
        });
        ((mu, mv), note)
    }
}
