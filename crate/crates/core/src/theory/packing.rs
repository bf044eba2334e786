//! Randomized greedy Gilbert–Varshamov packing of constant-weight binary words.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// shadowed by inherent methods whenever std is in the dependency graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::rng::{tags, SeedSpec};

/// Smallest `M` with `ln M >= (s/8) ln(1 + d/(2s))`, up to `1e-12` of slack.
pub fn gv_target(d: usize, s: usize) -> usize {
    let v = (s as f64 / 8.0) * (1.0 + d as f64 / (2.0 * s as f64)).ln() - 1e-12;
    let mut m = v.exp().ceil().max(1.0) as usize;
    while m > 1 && ((m - 1) as f64).ln() >= v {
        m -= 1;
    }
    while (m as f64).ln() < v {
        m += 1;
    }
    m
}

/// Constant-weight words stored as sorted support sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingSet {
    d: usize,
    s: usize,
    codewords: Vec<Vec<usize>>,
    min_pairwise_distance: usize,
}

/// The three packing properties, checked independently of construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PackingVerdict {
    pub weights_ok: bool,
    pub distances_ok: bool,
    pub cardinality_ok: bool,
}

impl PackingVerdict {
    pub fn all(&self) -> bool {
        self.weights_ok && self.distances_ok && self.cardinality_ok
    }
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                k += 1;
                i += 1;
                j += 1;
            }
        }
    }
    k
}

impl PackingSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    pub fn min_pairwise_distance(&self) -> usize {
        self.min_pairwise_distance
    }

    /// Codeword `i` as a dense 0/1 vector of length `d`.
    pub fn dense(&self, i: usize) -> Vec<u8> {
        let mut w = vec![0u8; self.d];
        for &j in &self.codewords[i] {
            w[j] = 1;
        }
        w
    }

    /// Re-verifies weight, pairwise distance and cardinality from dense words.
    pub fn verify(&self) -> PackingVerdict {
        let dense: Vec<Vec<u8>> = (0..self.len()).map(|i| self.dense(i)).collect();
        let weights_ok = dense.iter().all(|w| w.iter().map(|&b| b as usize).sum::<usize>() == self.s);
        let mut distances_ok = true;
        for (i, a) in dense.iter().enumerate() {
            for b in &dense[i + 1..] {
                let dh = a.iter().zip(b).filter(|(x, y)| x != y).count();
                distances_ok &= 2 * dh >= self.s;
            }
        }
        let cardinality_ok = (self.len() as f64).ln()
            >= (self.s as f64 / 8.0) * (1.0 + self.d as f64 / (2.0 * self.s as f64)).ln() - 1e-12;
        PackingVerdict { weights_ok, distances_ok, cardinality_ok }
    }
}

/// Samples uniform weight-`s` words and keeps each one at Hamming distance
/// at least `s/2` from all kept words until [`gv_target`] words are kept.
pub fn gv_packing(d: usize, s: usize, attempts: u64, seed: SeedSpec) -> Result<PackingSet> {
    if s == 0 || 8 * s > d {
        return Err(invalid("s", format!("need 1 <= s <= d/8, got s = {s}, d = {d}")));
    }
    let target = gv_target(d, s);
    let mut rng = seed.derive(tags::GRID).rng();
    let mut codewords: Vec<Vec<usize>> = Vec::with_capacity(target);
    // d_H = 2 (s - overlap) >= s/2  <=>  4 overlap <= 3 s
    let max_overlap = 3 * s / 4;
    let mut tried = 0u64;
    while codewords.len() < target {
        if tried == attempts {
            return Err(Error::PackingExhausted { reached: codewords.len(), target, attempts });
        }
        tried += 1;
        let mut w = rand::seq::index::sample(&mut rng, d, s).into_vec();
        w.sort_unstable();
        if codewords.iter().all(|c| overlap(c, &w) <= max_overlap) {
            codewords.push(w);
        }
    }
    let mut min_d = usize::MAX;
    for (i, a) in codewords.iter().enumerate() {
        for b in &codewords[i + 1..] {
            min_d = min_d.min(2 * (s - overlap(a, b)));
        }
    }
    Ok(PackingSet { d, s, codewords, min_pairwise_distance: min_d })
}
