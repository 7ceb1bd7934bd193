//! Permutations of `0..n`, composed left to right: `p.then(q)` sends
//! `x` to `q(p(x))`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { images: (0..n).collect() }
    }

    /// Panics if `images` is not a bijection of `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Self {
        assert!(is_bijection(&images), "not a permutation: {images:?}");
        Perm { images }
    }

    pub fn try_from_images(images: Vec<usize>) -> Option<Self> {
        is_bijection(&images).then_some(Perm { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y] = x;
        }
        Perm { images: inv }
    }

    /// Apply `self` first, then `other`.
    pub fn then(&self, other: &Perm) -> Self {
        Perm { images: self.images.iter().map(|&y| other.images[y]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn pow(&self, mut k: usize) -> Self {
        let mut result = Perm::identity(self.degree());
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = result.then(&base);
            }
            base = base.then(&base);
            k >>= 1;
        }
        result
    }

    /// Lengths of all cycles, one entry per cycle, in order of their least point.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x];
                len += 1;
            }
            out.push(len);
        }
        out
    }

    /// Length of the cycle through every point.
    pub fn orbit_lengths(&self) -> Vec<usize> {
        let mut len = vec![0; self.degree()];
        for start in 0..self.degree() {
            if len[start] != 0 {
                continue;
            }
            let mut cycle = vec![start];
            let mut x = self.images[start];
            while x != start {
                cycle.push(x);
                x = self.images[x];
            }
            for &y in &cycle {
                len[y] = cycle.len();
            }
        }
        len
    }

    /// Order of the permutation (lcm of its cycle lengths).
    pub fn order(&self) -> u128 {
        self.cycle_lengths().into_iter().fold(1u128, |acc, l| lcm(acc, l as u128))
    }
}

fn is_bijection(images: &[usize]) -> bool {
    let mut seen = vec![false; images.len()];
    for &y in images {
        if y >= images.len() || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

pub fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}
