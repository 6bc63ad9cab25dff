//! Bipartite community-affiliation baseline.
//!
//! Nodes draw a number of memberships from one truncated power law and
//! communities draw a size from another; the two sides are then joined by a
//! uniform bipartite configuration model.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Phase};
use crate::sampling::PowerLawSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CkbSpec {
    pub n: usize,
    /// Memberships per node.
    pub membership_law: PowerLawSpec,
    /// Community sizes.
    pub size_law: PowerLawSpec,
    pub seed: u64,
}

impl CkbSpec {
    pub fn validate(&self) -> Result<()> {
        self.membership_law.validate()?;
        self.size_law.validate()
    }
}

/// `floor(n E[memberships] / E[size])`.
pub fn ckb_community_count(spec: &CkbSpec) -> usize {
    let ratio = spec.membership_law.mean() / spec.size_law.mean();
    (spec.n as f64 * ratio).floor() as usize
}

/// Which side of the bipartite graph received the balancing half-edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalancedSide {
    None,
    Nodes,
    Communities,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdges {
    pub node: Vec<u32>,
    pub community: Vec<u32>,
    pub added: u64,
    pub side: BalancedSide,
}

/// Samples both half-edge sequences and balances their totals by adding
/// single half-edges to uniformly chosen entries of the smaller side.
pub fn sample_half_edges<R: Rng + ?Sized>(spec: &CkbSpec, rng: &mut R) -> HalfEdges {
    let communities = ckb_community_count(spec);
    let ms = spec.membership_law.sampler();
    let ss = spec.size_law.sampler();
    let mut node: Vec<u32> = (0..spec.n).map(|_| ms.sample(rng)).collect();
    let mut community: Vec<u32> = (0..communities).map(|_| ss.sample(rng)).collect();
    let sum = |v: &[u32]| v.iter().map(|&x| x as u64).sum::<u64>();
    let (tn, tc) = (sum(&node), sum(&community));
    let (smaller, added, side) = if tn < tc {
        (&mut node, tc - tn, BalancedSide::Nodes)
    } else if tc < tn {
        (&mut community, tn - tc, BalancedSide::Communities)
    } else {
        (&mut node, 0, BalancedSide::None)
    };
    if added > 0 && !smaller.is_empty() {
        for _ in 0..added {
            let i = rng.random_range(0..smaller.len());
            smaller[i] += 1;
        }
    }
    HalfEdges {
        node,
        community,
        added,
        side,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CkbStats {
    pub communities: usize,
    pub half_edges: u64,
    pub added_half_edges: u64,
    pub balanced_side: BalancedSide,
    /// Repeated node-community incidences merged into one membership.
    pub collapsed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CkbAffiliation {
    /// Communities per node, ascending.
    pub memberships: Vec<Vec<u32>>,
    pub stats: CkbStats,
}

pub fn generate_ckb(spec: &CkbSpec) -> Result<CkbAffiliation> {
    spec.validate()?;
    let mut rng = substream(spec.seed, Phase::Ckb, 0);
    let halves = sample_half_edges(spec, &mut rng);
    if spec.n > 0 && halves.community.is_empty() {
        return Err(Error::Domain(
            "the community count formula yields zero communities for a non-empty node set".into(),
        ));
    }
    let mut stubs: Vec<u32> = Vec::new();
    for (c, &k) in halves.community.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(c as u32, k as usize));
    }
    stubs.shuffle(&mut rng);
    let mut memberships = Vec::with_capacity(spec.n);
    let mut cursor = 0;
    let mut collapsed = 0;
    for &k in &halves.node {
        let mut m = stubs[cursor..cursor + k as usize].to_vec();
        cursor += k as usize;
        m.sort_unstable();
        let before = m.len();
        m.dedup();
        collapsed += (before - m.len()) as u64;
        memberships.push(m);
    }
    Ok(CkbAffiliation {
        memberships,
        stats: CkbStats {
            communities: halves.community.len(),
            half_edges: stubs.len() as u64,
            added_half_edges: halves.added,
            balanced_side: halves.side,
            collapsed,
        },
    })
}
