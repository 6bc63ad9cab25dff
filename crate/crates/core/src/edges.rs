//! Degree splitting and configuration-model edge generation.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::random_round;

/// Provenance tag of background edges; community `j` (0-based) uses `j + 1`.
pub const BACKGROUND: u32 = 0;

pub fn community_tag(community: usize) -> u32 {
    community as u32 + 1
}

/// Unordered node pair stored as `(min, max)`.
pub type Edge = (u32, u32);

#[inline]
pub fn edge(a: u32, b: u32) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
pub(crate) fn edge_key(e: Edge) -> u64 {
    ((e.0 as u64) << 32) | e.1 as u64
}

/// Edge multiset with one provenance tag per edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiGraph {
    pub edges: Vec<Edge>,
    pub tags: Vec<u32>,
}

impl MultiGraph {
    pub fn tagged(edges: Vec<Edge>, tag: u32) -> Self {
        let tags = vec![tag; edges.len()];
        MultiGraph { edges, tags }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degrees(&self, n: usize) -> Vec<u32> {
        let mut deg = vec![0u32; n];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }
}

/// Per-node community/background split and per-community half-edge quotas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSplit {
    /// Community degree `Y_i`.
    pub community: Vec<u32>,
    /// Background degree `Z_i`.
    pub background: Vec<u32>,
    /// Per community: `(node, half-edges)` in ascending node order.
    pub quotas: Vec<Vec<(u32, u32)>>,
    pub parity_fixes: usize,
}

/// `Y_i` is `(1 - xi) d_i` randomly rounded for non-outliers and 0 for
/// outliers; `Z_i = d_i - Y_i`.
pub fn split_degrees<R: Rng + ?Sized>(degrees: &[u32], outlier: &[bool], xi: f64, rng: &mut R) -> DegreeSplit {
    assert_eq!(degrees.len(), outlier.len());
    let mut community = Vec::with_capacity(degrees.len());
    let mut background = Vec::with_capacity(degrees.len());
    for (&d, &out) in degrees.iter().zip(outlier) {
        let y = if out {
            0
        } else {
            (random_round((1.0 - xi) * d as f64, rng) as u32).min(d)
        };
        community.push(y);
        background.push(d - y);
    }
    DegreeSplit {
        community,
        background,
        quotas: Vec::new(),
        parity_fixes: 0,
    }
}

/// Spreads each node's community degree over its communities as evenly as
/// possible: `Y mod eta` randomly chosen communities get one extra half-edge.
///
/// `memberships[i]` lists node `i`'s communities; it is empty for outliers.
pub fn allocate_community_halfedges<R: Rng + ?Sized>(
    split: &mut DegreeSplit,
    memberships: &[Vec<u32>],
    communities: usize,
    rng: &mut R,
) {
    let mut quotas: Vec<Vec<(u32, u32)>> = vec![Vec::new(); communities];
    for (i, comms) in memberships.iter().enumerate() {
        let y = split.community[i];
        if comms.is_empty() {
            debug_assert_eq!(y, 0);
            continue;
        }
        let eta = comms.len() as u32;
        let base = y / eta;
        let extra = (y - eta * base) as usize;
        let mut bonus = vec![0u32; comms.len()];
        for k in index::sample(rng, comms.len(), extra) {
            bonus[k] = 1;
        }
        for (k, &c) in comms.iter().enumerate() {
            quotas[c as usize].push((i as u32, base + bonus[k]));
        }
    }
    split.quotas = quotas;
}

/// Makes community `j`'s half-edge total even by moving one half-edge of its
/// highest-degree member with a positive quota (lowest index on ties) to the
/// background. Returns whether a fix was applied.
pub fn fix_parity(split: &mut DegreeSplit, community: usize, degrees: &[u32]) -> bool {
    let list = &mut split.quotas[community];
    let total: u64 = list.iter().map(|&(_, q)| q as u64).sum();
    if total.is_multiple_of(2) {
        return false;
    }
    let pos = list
        .iter()
        .enumerate()
        .filter(|(_, &(_, q))| q > 0)
        .max_by(|(_, &(a, _)), (_, &(b, _))| {
            degrees[a as usize]
                .cmp(&degrees[b as usize])
                .then(b.cmp(&a))
        })
        .map(|(k, _)| k)
        .expect("odd total implies a positive quota");
    let node = list[pos].0 as usize;
    list[pos].1 -= 1;
    split.community[node] -= 1;
    split.background[node] += 1;
    split.parity_fixes += 1;
    true
}

/// Count of `(node, community)` quotas exceeding `|C_j| - 1`.
pub fn quota_capacity_violations(split: &DegreeSplit) -> usize {
    split
        .quotas
        .iter()
        .map(|list| {
            let room = list.len().saturating_sub(1) as u32;
            list.iter().filter(|&&(_, q)| q > room).count()
        })
        .sum()
}

/// Uniform random pairing of half-edges: node `v` contributes `d` half-edges
/// for each `(v, d)`. Loops and parallel edges are kept.
pub fn configuration_model<R: Rng + ?Sized>(degrees: &[(u32, u32)], rng: &mut R) -> Result<Vec<Edge>> {
    let total: u64 = degrees.iter().map(|&(_, d)| d as u64).sum();
    if total % 2 == 1 {
        return Err(Error::Domain(format!(
            "configuration model needs an even number of half-edges, got {total}"
        )));
    }
    let mut stubs = Vec::with_capacity(total as usize);
    for &(v, d) in degrees {
        stubs.extend(std::iter::repeat_n(v, d as usize));
    }
    stubs.shuffle(rng);
    Ok(stubs.chunks_exact(2).map(|p| edge(p[0], p[1])).collect())
}

/// Multiset union of tagged component graphs, in the given order.
pub fn assemble_union(components: Vec<MultiGraph>) -> MultiGraph {
    let mut out = MultiGraph::default();
    for g in components {
        out.edges.extend(g.edges);
        out.tags.extend(g.tags);
    }
    out
}
