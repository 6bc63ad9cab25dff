//! The hidden geometric layer that shapes overlapping communities.
//!
//! Elements are points drawn uniformly from the unit ball. Primary
//! communities are carved out one at a time: the unassigned element furthest
//! from the origin seeds the community and takes its nearest unassigned
//! neighbours. Each community then grows by absorbing the elements closest to
//! the centroid of its primary members.
//!
//! Distances are compared as `(squared distance, element id)` pairs; norms as
//! `(squared norm descending, element id ascending)`. Centroids sum member
//! coordinates in ascending element order.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::exec::{self, ExecMode};
use crate::kdtree::SpatialIndex;

/// Element coordinates, row-major; the element id is the row index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoints {
    dim: usize,
    coords: Vec<f64>,
}

impl ReferencePoints {
    /// `n_hat` i.i.d. points uniform in the unit ball: an isotropic Gaussian
    /// direction scaled to radius `U^(1/dim)`.
    pub fn sample<R: Rng + ?Sized>(n_hat: usize, dim: usize, rng: &mut R) -> Self {
        assert!(dim >= 1);
        let mut coords = Vec::with_capacity(n_hat * dim);
        let mut dir = vec![0.0f64; dim];
        for _ in 0..n_hat {
            let norm = loop {
                for x in dir.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    break norm;
                }
            };
            let u: f64 = rng.random();
            // Keeps rounding in the normalization from leaving the ball.
            let radius = u.powf(1.0 / dim as f64).min(1.0 - 1e-12);
            coords.extend(dir.iter().map(|x| x / norm * radius));
        }
        ReferencePoints { dim, coords }
    }

    pub fn from_coords(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim >= 1 && coords.len().is_multiple_of(dim));
        ReferencePoints { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm2(&self, id: usize) -> f64 {
        self.point(id).iter().map(|x| x * x).sum()
    }
}

/// Primary communities only: a partition of the elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimaryAssignment {
    pub primary_of: Vec<u32>,
    /// Primary members per community, ascending element id.
    pub members: Vec<Vec<u32>>,
}

/// Seeds primary communities in the order of `primary_sizes`.
///
/// `primary_sizes` must sum to the number of points.
pub fn assign_primary_communities(points: &ReferencePoints, primary_sizes: &[u32]) -> PrimaryAssignment {
    let n = points.len();
    assert_eq!(
        primary_sizes.iter().map(|&x| x as usize).sum::<usize>(),
        n,
        "primary sizes must exhaust the elements"
    );
    let norms: Vec<f64> = (0..n).map(|i| points.norm2(i)).collect();
    let mut by_norm: Vec<u32> = (0..n as u32).collect();
    by_norm.sort_unstable_by(|&a, &b| {
        norms[b as usize]
            .total_cmp(&norms[a as usize])
            .then(a.cmp(&b))
    });

    let mut index = SpatialIndex::new(points.coords(), points.dim());
    let mut primary_of = vec![u32::MAX; n];
    let mut members = Vec::with_capacity(primary_sizes.len());
    let mut cursor = 0;
    for (j, &size) in primary_sizes.iter().enumerate() {
        while !index.is_active(by_norm[cursor]) {
            cursor += 1;
        }
        let seed = by_norm[cursor];
        index.deactivate(seed);
        let mut community = vec![seed];
        for nb in index.nearest(points.point(seed as usize), size as usize - 1) {
            community.push(nb.id);
        }
        for &v in &community {
            index.deactivate(v);
            primary_of[v as usize] = j as u32;
        }
        community.sort_unstable();
        members.push(community);
    }
    PrimaryAssignment { primary_of, members }
}

/// Final overlapping communities over the elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityLayout {
    pub primary_of: Vec<u32>,
    /// Primary members (ascending id) followed by secondary members in the
    /// order they were absorbed.
    pub members: Vec<Vec<u32>>,
    pub primary_counts: Vec<u32>,
    /// Communities of each element, ascending.
    pub memberships: Vec<Vec<u32>>,
    pub centroids: Vec<Vec<f64>>,
    /// Communities whose target size exceeded the number of elements.
    pub capped: usize,
}

impl CommunityLayout {
    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    pub fn element_count(&self) -> usize {
        self.primary_of.len()
    }

    /// Number of communities containing each element.
    pub fn membership_counts(&self) -> Vec<u32> {
        self.memberships.iter().map(|m| m.len() as u32).collect()
    }

    pub fn size(&self, community: usize) -> usize {
        self.members[community].len()
    }
}

/// Mean of the primary members' coordinates.
pub fn centroid(points: &ReferencePoints, primary_members: &[u32]) -> Vec<f64> {
    let mut c = vec![0.0; points.dim()];
    for &v in primary_members {
        for (acc, x) in c.iter_mut().zip(points.point(v as usize)) {
            *acc += x;
        }
    }
    let count = primary_members.len() as f64;
    c.iter_mut().for_each(|x| *x /= count);
    c
}

/// Grows every community to its target size by scanning elements in order of
/// increasing distance from its primary centroid. Targets above the element
/// count are capped (and counted in [`CommunityLayout::capped`]).
pub fn grow_communities(
    primaries: &PrimaryAssignment,
    grown_sizes: &[u32],
    points: &ReferencePoints,
    mode: ExecMode,
) -> CommunityLayout {
    assert_eq!(primaries.members.len(), grown_sizes.len());
    let n = points.len();
    let index = SpatialIndex::new(points.coords(), points.dim());
    let grown: Vec<(Vec<u32>, Vec<f64>, bool)> = exec::map_slice(mode, &primaries.members, |j, prim| {
        let target = grown_sizes[j] as usize;
        let capped = target > n;
        let target = target.min(n);
        let center = centroid(points, prim);
        let mut members = prim.clone();
        if target > prim.len() {
            // The first `target` elements in scan order always contain enough
            // non-primary ones.
            for nb in index.nearest(&center, target) {
                if members.len() == target {
                    break;
                }
                if primaries.primary_of[nb.id as usize] != j as u32 {
                    members.push(nb.id);
                }
            }
        }
        (members, center, capped)
    });

    let mut memberships: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut members = Vec::with_capacity(grown.len());
    let mut centroids = Vec::with_capacity(grown.len());
    let mut capped = 0;
    for (j, (m, c, was_capped)) in grown.into_iter().enumerate() {
        for &v in &m {
            memberships[v as usize].push(j as u32);
        }
        members.push(m);
        centroids.push(c);
        capped += was_capped as usize;
    }
    CommunityLayout {
        primary_of: primaries.primary_of.clone(),
        primary_counts: primaries.members.iter().map(|m| m.len() as u32).collect(),
        members,
        memberships,
        centroids,
        capped,
    }
}
