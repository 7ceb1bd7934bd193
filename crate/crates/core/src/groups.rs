//! Finite groups given by multiplication tables, their subgroups and
//! isomorphisms between subgroups.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Perm;

/// Largest group order accepted when checking associativity eagerly.
pub const MAX_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("empty multiplication table")]
    Empty,
    #[error("group order {0} exceeds supported maximum {MAX_ORDER}")]
    TooLarge(usize),
    #[error("row {row} has length {len}, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("entry mul[{row}][{col}] = {value} out of range")]
    OutOfRange { row: usize, col: usize, value: usize },
    #[error("row or column {0} of the table is not a permutation")]
    NotLatin(usize),
    #[error("table has no two-sided identity")]
    NoIdentity,
    #[error("table is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} out of range for group of order {1}")]
    BadElement(usize, usize),
    #[error("element set is not a subgroup")]
    NotSubgroup,
    #[error("map is not an isomorphism: {0}")]
    NotIso(String),
}

/// A finite group stored as its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    mul: Vec<Vec<usize>>,
    identity: usize,
    inv: Vec<usize>,
}

/// JSON shape of a group: `{"order": n, "mul": [[...]], "name": "..."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    #[serde(default)]
    pub name: String,
}

impl FiniteGroup {
    /// Builds a group from a table, verifying the group axioms eagerly.
    pub fn from_table(name: impl Into<String>, mul: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = mul.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        if n > MAX_ORDER {
            return Err(GroupError::TooLarge(n));
        }
        for (row, r) in mul.iter().enumerate() {
            if r.len() != n {
                return Err(GroupError::Ragged { row, len: r.len(), expected: n });
            }
            for (col, &value) in r.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::OutOfRange { row, col, value });
                }
            }
        }
        for i in 0..n {
            let mut seen_row = vec![false; n];
            let mut seen_col = vec![false; n];
            for j in 0..n {
                seen_row[mul[i][j]] = true;
                seen_col[mul[j][i]] = true;
            }
            if seen_row.iter().chain(seen_col.iter()).any(|s| !s) {
                return Err(GroupError::NotLatin(i));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e][x] == x && mul[x][e] == x))
            .ok_or(GroupError::NoIdentity)?;
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a][b];
                for c in 0..n {
                    if mul[ab][c] != mul[a][mul[b][c]] {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        let inv = (0..n)
            .map(|x| (0..n).find(|&y| mul[x][y] == identity).expect("latin square"))
            .collect();
        Ok(FiniteGroup { name: name.into(), mul, identity, inv })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self, GroupError> {
        if spec.order != spec.mul.len() {
            return Err(GroupError::Ragged { row: 0, len: spec.mul.len(), expected: spec.order });
        }
        Self::from_table(spec.name.clone(), spec.mul.clone())
    }

    pub fn to_spec(&self) -> GroupSpec {
        GroupSpec { order: self.order(), mul: self.mul.clone(), name: self.name.clone() }
    }

    /// Cyclic group Z/n with element k standing for k mod n.
    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(format!("Z/{n}"), mul).expect("cyclic table is a group")
    }

    /// Direct product; element (a, b) has index a * |h| + b.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (m, k) = (g.order(), h.order());
        let mul = (0..m * k)
            .map(|x| {
                (0..m * k)
                    .map(|y| g.mul(x / k, y / k) * k + h.mul(x % k, y % k))
                    .collect()
            })
            .collect();
        Self::from_table(format!("{}x{}", g.name, h.name), mul).expect("product of groups")
    }

    /// The group generated by the given permutations, elements listed in
    /// breadth-first order from the identity (so the identity is 0 and each
    /// generator appears as early as possible).
    pub fn from_permutations(name: impl Into<String>, gens: &[Perm]) -> Result<(Self, Vec<Perm>), GroupError> {
        let degree = gens.first().map(|p| p.degree()).unwrap_or(1);
        let mut elems = vec![Perm::identity(degree)];
        let mut index = std::collections::HashMap::new();
        index.insert(elems[0].clone(), 0usize);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let p = elems[i].then(g);
                if !index.contains_key(&p) {
                    if elems.len() >= MAX_ORDER {
                        return Err(GroupError::TooLarge(elems.len() + 1));
                    }
                    index.insert(p.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(p);
                }
            }
        }
        let mul = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&a.then(b)]).collect())
            .collect();
        Ok((Self::from_table(name, mul)?, elems))
    }

    /// Symmetric group on three points.
    pub fn symmetric3() -> Self {
        let s = Perm::from_images(vec![1, 0, 2]);
        let r = Perm::from_images(vec![1, 2, 0]);
        Self::from_permutations("S3", &[s, r]).expect("S3").0
    }

    /// Dihedral group of order 2n (symmetries of an n-gon).
    pub fn dihedral(n: usize) -> Self {
        let r = Perm::from_images((0..n).map(|i| (i + 1) % n).collect());
        let s = Perm::from_images((0..n).map(|i| (n - i) % n).collect());
        Self::from_permutations(format!("D{}", 2 * n), &[r, s]).expect("dihedral").0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn contains(&self, x: usize) -> bool {
        x < self.order()
    }

    pub fn check_element(&self, x: usize) -> Result<(), GroupError> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(GroupError::BadElement(x, self.order()))
        }
    }

    /// Product of a sequence of elements, left to right.
    pub fn product<I: IntoIterator<Item = usize>>(&self, xs: I) -> usize {
        xs.into_iter().fold(self.identity, |acc, x| self.mul(acc, x))
    }

    pub fn pow(&self, x: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, x))
    }

    /// `x^-1 g x`
    pub fn conj(&self, g: usize, x: usize) -> usize {
        self.mul(self.mul(self.inv(x), g), x)
    }

    /// Least k >= 1 with x^k = 1.
    pub fn element_order(&self, x: usize) -> usize {
        let mut k = 1;
        let mut y = x;
        while y != self.identity {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    pub fn are_conjugate(&self, a: usize, b: usize) -> bool {
        (0..self.order()).any(|x| self.conj(a, x) == b)
    }

    /// Smallest subgroup containing `seed`.
    pub fn subgroup_closure(&self, seed: &[usize]) -> Subgroup {
        let mut member = vec![false; self.order()];
        member[self.identity] = true;
        let mut elems = vec![self.identity];
        let gens: Vec<usize> = seed.iter().copied().filter(|&s| s != self.identity).collect();
        let mut i = 0;
        while i < elems.len() {
            let x = elems[i];
            for &g in &gens {
                let y = self.mul(x, g);
                if !member[y] {
                    member[y] = true;
                    elems.push(y);
                }
            }
            i += 1;
        }
        Subgroup::from_membership(member)
    }

    /// Accepts an explicit element list, failing if it is not a subgroup.
    pub fn subgroup(&self, elements: &[usize]) -> Result<Subgroup, GroupError> {
        for &x in elements {
            self.check_element(x)?;
        }
        let closure = self.subgroup_closure(elements);
        let given: BTreeSet<usize> = elements.iter().copied().collect();
        if given.len() != closure.len() || !given.iter().all(|&x| closure.contains(x)) {
            return Err(GroupError::NotSubgroup);
        }
        Ok(closure)
    }

    pub fn trivial_subgroup(&self) -> Subgroup {
        self.subgroup_closure(&[])
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup::from_membership(vec![true; self.order()])
    }

    pub fn is_normal(&self, h: &Subgroup) -> bool {
        h.elements().iter().all(|&x| (0..self.order()).all(|g| h.contains(self.conj(x, g))))
    }

    /// Every subgroup, each listed once, ordered by size then elements.
    pub fn all_subgroups(&self) -> Vec<Subgroup> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier = vec![self.trivial_subgroup()];
        found.insert(frontier[0].elements().to_vec());
        while let Some(h) = frontier.pop() {
            for g in 0..self.order() {
                if h.contains(g) {
                    continue;
                }
                let mut seed = h.elements().to_vec();
                seed.push(g);
                let k = self.subgroup_closure(&seed);
                if found.insert(k.elements().to_vec()) {
                    frontier.push(k);
                }
            }
        }
        let mut subs: Vec<Subgroup> = found
            .into_iter()
            .map(|els| {
                let mut member = vec![false; self.order()];
                for x in els {
                    member[x] = true;
                }
                Subgroup::from_membership(member)
            })
            .collect();
        subs.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.elements().cmp(b.elements())));
        subs
    }

    pub fn normal_subgroups(&self) -> Vec<Subgroup> {
        self.all_subgroups().into_iter().filter(|h| self.is_normal(h)).collect()
    }

    /// One representative per coset of `h`, the lowest element index of
    /// each coset, in increasing order.
    pub fn coset_transversal(&self, h: &Subgroup, side: CosetSide) -> Vec<usize> {
        self.coset_labels(h, side).1
    }

    /// Coset representative of every element alongside the transversal.
    pub fn coset_labels(&self, h: &Subgroup, side: CosetSide) -> (Vec<usize>, Vec<usize>) {
        let n = self.order();
        let mut rep = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for x in 0..n {
            if rep[x] != usize::MAX {
                continue;
            }
            reps.push(x);
            for &k in h.elements() {
                let y = match side {
                    CosetSide::Left => self.mul(x, k),
                    CosetSide::Right => self.mul(k, x),
                };
                rep[y] = x;
            }
        }
        (rep, reps)
    }

    /// Regular right action of the quotient by a normal subgroup: returns the
    /// coset index of every element and the quotient's multiplication table.
    pub fn quotient(&self, k: &Subgroup) -> (Vec<usize>, FiniteGroup) {
        let (rep, reps) = self.coset_labels(k, CosetSide::Left);
        let index_of = |r: usize| reps.iter().position(|&q| q == r).expect("coset rep");
        let class: Vec<usize> = (0..self.order()).map(|x| index_of(rep[x])).collect();
        let mul = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| class[self.mul(a, b)]).collect())
            .collect();
        let q = FiniteGroup::from_table(format!("{}/K{}", self.name, k.len()), mul)
            .expect("quotient by a normal subgroup is a group");
        (class, q)
    }

    /// Right regular representation: element x acts on y by y -> y x.
    pub fn regular_perm(&self, x: usize) -> Perm {
        Perm::from_images((0..self.order()).map(|y| self.mul(y, x)).collect())
    }

    /// A small generating set, chosen greedily by element index.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = self.trivial_subgroup();
        for x in 0..self.order() {
            if !span.contains(x) {
                gens.push(x);
                span = self.subgroup_closure(&gens);
            }
        }
        gens
    }

    /// Spells every element as a word in `generators()`, by breadth-first search.
    pub fn generator_words(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        let gens = self.generators();
        let mut words: Vec<Option<Vec<usize>>> = vec![None; self.order()];
        words[self.identity] = Some(Vec::new());
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in gens.iter().enumerate() {
                let y = self.mul(x, g);
                if words[y].is_none() {
                    let mut w = words[x].clone().expect("visited");
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        (gens, words.into_iter().map(|w| w.expect("generated")).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CosetSide {
    /// cosets x H
    Left,
    /// cosets H x
    Right,
}

/// Subgroup of some parent group, stored as a membership table over the
/// parent's elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    member: Vec<bool>,
    elements: Vec<usize>,
}

impl Subgroup {
    fn from_membership(member: Vec<bool>) -> Self {
        let elements = member.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        Subgroup { member, elements }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.member.get(x).copied().unwrap_or(false)
    }

    /// Sorted element indices.
    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn parent_order(&self) -> usize {
        self.member.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.elements.len() == self.member.len()
    }
}

/// A bijection between two subgroups of the same group, stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIso {
    source: Subgroup,
    target: Subgroup,
    forward: Vec<Option<usize>>,
    backward: Vec<Option<usize>>,
}

impl GroupIso {
    /// Builds the map from index pairs without checking homomorphy; use
    /// [`check_iso`] for that.
    pub fn from_pairs(source: Subgroup, target: Subgroup, pairs: &[(usize, usize)]) -> Result<Self, GroupError> {
        let n = source.parent_order();
        let mut forward = vec![None; n];
        let mut backward = vec![None; n];
        for &(a, b) in pairs {
            if !source.contains(a) || !target.contains(b) {
                return Err(GroupError::NotIso(format!("pair ({a}, {b}) leaves the subgroups")));
            }
            if forward[a].replace(b).is_some() {
                return Err(GroupError::NotIso(format!("{a} mapped twice")));
            }
            if backward[b].replace(a).is_some() {
                return Err(GroupError::NotIso(format!("{b} hit twice")));
            }
        }
        if source.elements().iter().any(|&a| forward[a].is_none()) {
            return Err(GroupError::NotIso("map is not total on the source".into()));
        }
        Ok(GroupIso { source, target, forward, backward })
    }

    pub fn identity_on(h: Subgroup) -> Self {
        let pairs: Vec<_> = h.elements().iter().map(|&x| (x, x)).collect();
        Self::from_pairs(h.clone(), h, &pairs).expect("identity map")
    }

    pub fn source(&self) -> &Subgroup {
        &self.source
    }

    pub fn target(&self) -> &Subgroup {
        &self.target
    }

    /// Image of a source element.
    pub fn apply(&self, a: usize) -> usize {
        self.forward[a].expect("element of the source subgroup")
    }

    /// Preimage of a target element.
    pub fn apply_inv(&self, b: usize) -> usize {
        self.backward[b].expect("element of the target subgroup")
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.source.elements().iter().map(|&a| (a, self.apply(a))).collect()
    }
}

/// True iff `iso` is a bijection between its subgroups that respects the
/// multiplication of `g`.
pub fn check_iso(g: &FiniteGroup, iso: &GroupIso) -> bool {
    let src = iso.source();
    let tgt = iso.target();
    if src.len() != tgt.len() || src.parent_order() != g.order() || tgt.parent_order() != g.order() {
        return false;
    }
    let mut hit = vec![false; g.order()];
    for &a in src.elements() {
        match iso.forward[a] {
            Some(b) if tgt.contains(b) && !hit[b] => hit[b] = true,
            _ => return false,
        }
    }
    src.elements().iter().all(|&x| {
        src.elements()
            .iter()
            .all(|&y| iso.apply(g.mul(x, y)) == g.mul(iso.apply(x), iso.apply(y)))
    })
}
