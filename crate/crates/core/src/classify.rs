//! Isomorphism classes of small directed graphs.
//!
//! A size-k pattern is encoded as the row-major k×k adjacency matrix read as a
//! binary number, entry `(0, 0)` being the most significant bit. The canonical
//! code of a class is the minimum code over all k! relabelings, so the fully
//! mutual triad is `0b011_101_110 = 238` and the path `1→2→0` is `12`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest k for which a k×k adjacency code fits in a `u64`.
pub const MAX_K: usize = 8;

#[inline]
pub fn bit_position(k: usize, i: usize, j: usize) -> u32 {
    (k * k - 1 - (i * k + j)) as u32
}

#[inline]
pub fn has_arc(code: u64, k: usize, i: usize, j: usize) -> bool {
    code >> bit_position(k, i, j) & 1 == 1
}

pub fn diagonal_mask(k: usize) -> u64 {
    (0..k).fold(0, |m, i| m | 1 << bit_position(k, i, i))
}

/// Code of the same graph after relabeling node `perm[i]` as `i`.
pub fn permute_code(code: u64, k: usize, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    for i in 0..k {
        for j in 0..k {
            if i != j && has_arc(code, k, perm[i], perm[j]) {
                out |= 1 << bit_position(k, i, j);
            }
        }
    }
    out
}

/// Lexicographic successor of `p`; false once `p` is the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Minimum adjacency code over all node permutations.
pub fn canonical_code(code: u64, k: usize) -> u64 {
    assert!((1..=MAX_K).contains(&k), "k must be in 1..={MAX_K}");
    debug_assert_eq!(code & diagonal_mask(k), 0, "self-loop bit set");
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = code;
    while next_permutation(&mut perm) {
        best = best.min(permute_code(code, k, &perm));
    }
    best
}

/// Weak connectivity of the pattern.
pub fn is_connected(code: u64, k: usize) -> bool {
    if k == 0 {
        return true;
    }
    let mut seen = 1u32;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for v in 0..k {
            if seen >> v & 1 == 0 && (has_arc(code, k, u, v) || has_arc(code, k, v, u)) {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen.count_ones() as usize == k
}

/// Directed arcs `(i, j)` of a pattern.
pub fn arcs(code: u64, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j && has_arc(code, k, i, j) {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifClass {
    /// Minimum adjacency code over all relabelings.
    pub canonical_id: u64,
    /// Other member codes under which the class is commonly published.
    pub alias_ids: Vec<u64>,
    pub name: String,
    pub k: usize,
}

impl MotifClass {
    /// Id used in reports: the published alias when there is one.
    pub fn display_id(&self) -> u64 {
        self.alias_ids.first().copied().unwrap_or(self.canonical_id)
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        arcs(self.canonical_id, self.k)
    }
}

/// `(canonical id, triad census label, name, published aliases)` for the 13
/// connected triads.
const TRIADS: [(u64, &str, &str, &[u64]); 13] = [
    (6, "021D", "out-star", &[]),
    (12, "021C", "directed path", &[]),
    (14, "111U", "mutual dyad with outgoing edge", &[]),
    (36, "021U", "in-star", &[]),
    (38, "030T", "feed-forward loop", &[]),
    (46, "120U", "uplinked mutual dyad", &[]),
    (74, "111D", "mutual dyad with incoming edge", &[164]),
    (78, "201", "two mutual dyads", &[]),
    (98, "030C", "directed cycle", &[]),
    (102, "120C", "mutual dyad closing a cycle", &[]),
    (108, "120D", "downlinked mutual dyad", &[]),
    (110, "210", "two mutual dyads with one edge", &[]),
    (238, "300", "fully connected triad", &[]),
];

/// Class table plus an O(1) code → class lookup for one motif size.
#[derive(Clone, Debug)]
pub struct Classifier {
    k: usize,
    classes: Vec<MotifClass>,
    /// Indexed by raw code; `NONE` for disconnected or looped patterns.
    lookup: Vec<u32>,
    total_classes: usize,
}

const NONE: u32 = u32::MAX;

impl Classifier {
    /// Brute force over every loop-free labeled digraph on k nodes.
    pub fn new(k: usize) -> Result<Self> {
        if !(3..=4).contains(&k) {
            return Err(Error::UnsupportedMotifSize(k));
        }
        let diag = diagonal_mask(k);
        let mut lookup = vec![NONE; 1 << (k * k)];
        let mut canon_of = vec![0u64; 1 << (k * k)];
        let mut connected = std::collections::BTreeSet::new();
        let mut all = std::collections::BTreeSet::new();
        for code in 0..(1u64 << (k * k)) {
            if code & diag != 0 {
                continue;
            }
            let c = canonical_code(code, k);
            canon_of[code as usize] = c;
            all.insert(c);
            if is_connected(code, k) {
                connected.insert(c);
            }
        }
        let classes: Vec<MotifClass> = connected
            .iter()
            .map(|&c| {
                let named = (k == 3).then(|| TRIADS.iter().find(|t| t.0 == c)).flatten();
                MotifClass {
                    canonical_id: c,
                    alias_ids: named.map(|t| t.3.to_vec()).unwrap_or_default(),
                    name: match named {
                        Some(t) => format!("{} ({})", t.2, t.1),
                        None => format!("size-{k} class {c}"),
                    },
                    k,
                }
            })
            .collect();
        for code in 0..(1u64 << (k * k)) {
            if code & diag != 0 || !is_connected(code, k) {
                continue;
            }
            let c = canon_of[code as usize];
            lookup[code as usize] = classes.binary_search_by_key(&c, |m| m.canonical_id).unwrap() as u32;
        }
        Ok(Classifier {
            k,
            classes,
            lookup,
            total_classes: all.len(),
        })
    }

    /// Shared read-only table for k = 3.
    pub fn triads() -> &'static Classifier {
        static T: OnceLock<Classifier> = OnceLock::new();
        T.get_or_init(|| Classifier::new(3).unwrap())
    }

    /// Shared read-only table for k = 4.
    pub fn tetrads() -> &'static Classifier {
        static T: OnceLock<Classifier> = OnceLock::new();
        T.get_or_init(|| Classifier::new(4).unwrap())
    }

    pub fn for_size(k: usize) -> Result<&'static Classifier> {
        match k {
            3 => Ok(Self::triads()),
            4 => Ok(Self::tetrads()),
            _ => Err(Error::UnsupportedMotifSize(k)),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Connected classes, ascending by canonical id.
    pub fn classes(&self) -> &[MotifClass] {
        &self.classes
    }

    /// Isomorphism classes including disconnected ones.
    pub fn total_class_count(&self) -> usize {
        self.total_classes
    }

    /// Index into `classes()` for an induced-edge code, `None` if the pattern
    /// is disconnected or has a loop.
    #[inline]
    pub fn classify(&self, code: u64) -> Option<usize> {
        match self.lookup.get(code as usize) {
            Some(&i) if i != NONE => Some(i as usize),
            _ => None,
        }
    }

    pub fn index_of_canonical(&self, canonical_id: u64) -> Option<usize> {
        self.classes.binary_search_by_key(&canonical_id, |m| m.canonical_id).ok()
    }

    /// Class containing the pattern whose code is `id`. Any member code is
    /// accepted, not only the canonical one, so published ids resolve.
    pub fn resolve_id(&self, id: u64) -> Result<&MotifClass> {
        self.classify(id)
            .map(|i| &self.classes[i])
            .ok_or(Error::InvalidMotifId(id))
    }
}

pub fn build_class_table(k: usize) -> Result<Vec<MotifClass>> {
    Ok(Classifier::for_size(k)?.classes().to_vec())
}

/// Resolve a size-3 motif id as printed in published triad tables.
pub fn resolve_paper_id(id: u64) -> Result<&'static MotifClass> {
    Classifier::triads().resolve_id(id)
}
