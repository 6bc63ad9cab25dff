//! Measurements on networks with known overlapping communities.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::assignment::pearson;
use crate::edges::{Edge, BACKGROUND};
use crate::error::{Error, Result};

/// Simple graph with overlapping community labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledNetwork {
    pub n: usize,
    pub edges: Vec<Edge>,
    /// Communities of each node (dense ids, ascending); empty for outliers.
    pub memberships: Vec<Vec<u32>>,
    /// External label of each dense community id.
    pub labels: Vec<u64>,
    pub provenance: Option<Vec<u32>>,
}

impl LabeledNetwork {
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        memberships: Vec<Vec<u32>>,
        labels: Vec<u64>,
        provenance: Option<Vec<u32>>,
    ) -> Result<Self> {
        if memberships.len() != n {
            return Err(Error::Domain(format!(
                "{} membership lists for {n} nodes",
                memberships.len()
            )));
        }
        for m in &memberships {
            if m.windows(2).any(|w| w[0] >= w[1]) || m.iter().any(|&c| c as usize >= labels.len()) {
                return Err(Error::Domain("membership lists must be ascending known community ids".into()));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= b || b as usize >= n {
                return Err(Error::Domain(format!("edge ({a}, {b}) is not a pair of distinct known nodes")));
            }
            if !seen.insert((a, b)) {
                return Err(Error::Domain(format!("edge ({a}, {b}) appears twice")));
            }
        }
        if let Some(p) = &provenance {
            if p.len() != edges.len() {
                return Err(Error::Domain("one provenance tag per edge required".into()));
            }
        }
        Ok(LabeledNetwork {
            n,
            edges,
            memberships,
            labels,
            provenance,
        })
    }

    pub fn community_count(&self) -> usize {
        self.labels.len()
    }

    /// Member lists per community, ascending.
    pub fn communities(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.community_count()];
        for (v, m) in self.memberships.iter().enumerate() {
            for &c in m {
                out[c as usize].push(v as u32);
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }
}

/// Empirical complementary CDF: `ccdf[i]` is the fraction of samples that
/// are at least `values[i]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    pub values: Vec<u64>,
    pub ccdf: Vec<f64>,
    pub samples: usize,
}

impl Ecdf {
    pub fn from_samples(mut samples: Vec<u64>) -> Self {
        samples.sort_unstable();
        let total = samples.len();
        let mut values = Vec::new();
        let mut ccdf = Vec::new();
        let mut i = 0;
        while i < total {
            let x = samples[i];
            values.push(x);
            ccdf.push((total - i) as f64 / total as f64);
            while i < total && samples[i] == x {
                i += 1;
            }
        }
        Ecdf {
            values,
            ccdf,
            samples: total,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples == 0
    }

    /// `1 - |{samples < x}| / |samples|`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.values.partition_point(|&v| (v as f64) < x);
        self.ccdf.get(below).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        // Mass of value i is ccdf[i] - ccdf[i+1].
        let mut sum = 0.0;
        for i in 0..self.values.len() {
            let next = self.ccdf.get(i + 1).copied().unwrap_or(0.0);
            sum += self.values[i] as f64 * (self.ccdf[i] - next);
        }
        sum
    }
}

pub fn community_size_ccdf(net: &LabeledNetwork) -> Ecdf {
    Ecdf::from_samples(net.communities().iter().map(|c| c.len() as u64).collect())
}

/// Over all nodes; outliers count with zero memberships.
pub fn communities_per_node_ccdf(net: &LabeledNetwork) -> Ecdf {
    Ecdf::from_samples(net.memberships.iter().map(|m| m.len() as u64).collect())
}

/// Sizes of all non-empty `k`-wise intersections, keyed by the ascending
/// community tuple. Only nodes in at least `k` communities contribute, so
/// disjoint tuples are never enumerated.
pub fn intersection_sizes(net: &LabeledNetwork, k: usize) -> HashMap<Vec<u32>, u64> {
    assert!(k >= 2, "intersections need at least two communities");
    let mut sizes: HashMap<Vec<u32>, u64> = HashMap::new();
    let mut combo = vec![0usize; k];
    for m in &net.memberships {
        if m.len() < k {
            continue;
        }
        // Lexicographic walk over k-subsets of the node's communities.
        for (i, c) in combo.iter_mut().enumerate() {
            *c = i;
        }
        loop {
            let key: Vec<u32> = combo.iter().map(|&i| m[i]).collect();
            *sizes.entry(key).or_insert(0) += 1;
            let mut i = k;
            while i > 0 && combo[i - 1] == m.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..k {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    sizes
}

pub fn intersection_size_ccdf(net: &LabeledNetwork, k: usize) -> Ecdf {
    Ecdf::from_samples(intersection_sizes(net, k).into_values().collect())
}

/// Shared communities of two ascending lists.
fn shared(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

fn shares_community(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Fraction of edges whose endpoints share no community.
pub fn realized_xi(net: &LabeledNetwork) -> f64 {
    realized_xi_parts(&net.edges, &net.memberships)
}

pub(crate) fn realized_xi_parts(edges: &[Edge], memberships: &[Vec<u32>]) -> f64 {
    if edges.is_empty() {
        return 0.0;
    }
    let between = edges
        .iter()
        .filter(|&&(a, b)| !shares_community(&memberships[a as usize], &memberships[b as usize]))
        .count();
    between as f64 / edges.len() as f64
}

/// Fraction of edges tagged as background, when provenance is known.
pub fn background_edge_fraction(net: &LabeledNetwork) -> Option<f64> {
    let tags = net.provenance.as_ref()?;
    if tags.is_empty() {
        return Some(0.0);
    }
    Some(tags.iter().filter(|&&t| t == BACKGROUND).count() as f64 / tags.len() as f64)
}

/// Pearson correlation of degree and membership count over non-outliers.
pub fn realized_rho(net: &LabeledNetwork) -> Result<f64> {
    let degrees = net.degrees();
    let (xs, ys): (Vec<f64>, Vec<f64>) = net
        .memberships
        .iter()
        .zip(&degrees)
        .filter(|(m, _)| !m.is_empty())
        .map(|(m, &d)| (d as f64, m.len() as f64))
        .unzip();
    pearson(&xs, &ys)
}

/// `|E(H)| / (|V(H)| choose 2)`, and 0 for fewer than two nodes.
pub fn density(edges: u64, nodes: u64) -> f64 {
    if nodes < 2 {
        return 0.0;
    }
    edges as f64 / (nodes as f64 * (nodes - 1) as f64 / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub community_a: u32,
    pub community_b: u32,
    pub overlap_size: u64,
    pub size_a: u64,
    pub size_b: u64,
    pub overlap_density: f64,
    pub density_a: f64,
    pub density_b: f64,
}

/// Induced-subgraph densities of each qualifying community pair, of its
/// intersection, and of both communities. A pair qualifies when the overlap
/// has at least `min_overlap` nodes and at most `ratio_cap` times the size of
/// the smaller community. Records are sorted by community pair.
pub fn intersection_density_profile(net: &LabeledNetwork, min_overlap: u64, ratio_cap: f64) -> Vec<DensityRecord> {
    let sizes: Vec<u64> = net.communities().iter().map(|c| c.len() as u64).collect();
    let mut pairs: Vec<(Vec<u32>, u64)> = intersection_sizes(net, 2)
        .into_iter()
        .filter(|(key, overlap)| {
            let smaller = sizes[key[0] as usize].min(sizes[key[1] as usize]);
            *overlap >= min_overlap && *overlap as f64 <= ratio_cap * smaller as f64
        })
        .collect();
    pairs.sort_unstable();
    let slot: HashMap<(u32, u32), usize> = pairs
        .iter()
        .enumerate()
        .map(|(i, (key, _))| ((key[0], key[1]), i))
        .collect();

    let mut internal = vec![0u64; net.community_count()];
    let mut overlap_edges = vec![0u64; pairs.len()];
    let mut common = Vec::new();
    for &(a, b) in &net.edges {
        shared(&net.memberships[a as usize], &net.memberships[b as usize], &mut common);
        for (i, &c) in common.iter().enumerate() {
            internal[c as usize] += 1;
            if slot.is_empty() {
                continue;
            }
            for &d in &common[i + 1..] {
                if let Some(&s) = slot.get(&(c, d)) {
                    overlap_edges[s] += 1;
                }
            }
        }
    }

    pairs
        .iter()
        .zip(overlap_edges)
        .map(|((key, overlap), e)| {
            let (a, b) = (key[0] as usize, key[1] as usize);
            DensityRecord {
                community_a: a as u32,
                community_b: b as u32,
                overlap_size: *overlap,
                size_a: sizes[a],
                size_b: sizes[b],
                overlap_density: density(e, *overlap),
                density_a: density(internal[a], sizes[a]),
                density_b: density(internal[b], sizes[b]),
            }
        })
        .collect()
}

/// Linear-interpolation quantile of ascending `sorted`, `p` in `[0, 1]`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IefRow {
    pub node: u32,
    pub memberships: u32,
    /// Largest internal edge fractions, descending, padded with zeros.
    pub top: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IefProfile {
    pub k: usize,
    pub rows: Vec<IefRow>,
    pub isolated_skipped: usize,
}

/// For every node with positive degree, the `k` largest values of
/// `IEF(v, C) = |{ {u,v} in E : u in C }| / deg(v)` over all communities.
pub fn ief_top_k(net: &LabeledNetwork, k: usize) -> IefProfile {
    let adj = net.adjacency();
    let mut counts = vec![0u32; net.community_count()];
    let mut touched = Vec::new();
    let mut rows = Vec::new();
    let mut isolated_skipped = 0;
    for (v, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            isolated_skipped += 1;
            continue;
        }
        for &u in nbrs {
            for &c in &net.memberships[u as usize] {
                if counts[c as usize] == 0 {
                    touched.push(c);
                }
                counts[c as usize] += 1;
            }
        }
        let deg = nbrs.len() as f64;
        let mut values: Vec<f64> = touched.iter().map(|&c| counts[c as usize] as f64 / deg).collect();
        for &c in &touched {
            counts[c as usize] = 0;
        }
        touched.clear();
        values.sort_unstable_by(|a, b| b.total_cmp(a));
        values.resize(k, 0.0);
        rows.push(IefRow {
            node: v as u32,
            memberships: net.memberships[v].len() as u32,
            top: values,
        });
    }
    IefProfile {
        k,
        rows,
        isolated_skipped,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IefQuantiles {
    pub memberships: u32,
    /// 1-based rank within the top-k list.
    pub rank: usize,
    pub count: usize,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

/// Quartiles of each rank's IEF value, grouped by membership count.
pub fn ief_summary(profile: &IefProfile) -> Vec<IefQuantiles> {
    let mut groups: std::collections::BTreeMap<u32, Vec<&IefRow>> = Default::default();
    for row in &profile.rows {
        groups.entry(row.memberships).or_default().push(row);
    }
    let mut out = Vec::new();
    for (memberships, rows) in groups {
        for rank in 0..profile.k {
            let mut vals: Vec<f64> = rows.iter().map(|r| r.top[rank]).collect();
            vals.sort_unstable_by(f64::total_cmp);
            out.push(IefQuantiles {
                memberships,
                rank: rank + 1,
                count: vals.len(),
                q25: quantile(&vals, 0.25),
                median: quantile(&vals, 0.5),
                q75: quantile(&vals, 0.75),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: Vec<Edge>, memberships: Vec<Vec<u32>>, communities: usize) -> LabeledNetwork {
        LabeledNetwork::new(n, edges, memberships, (1..=communities as u64).collect(), None).unwrap()
    }

    #[test]
    fn ccdf_caption_formula() {
        let e = Ecdf::from_samples(vec![10]);
        assert_eq!(e.eval(10.0), 1.0);
        assert_eq!(e.eval(11.0), 0.0);
        let e = Ecdf::from_samples(vec![10, 20, 10]);
        assert!((e.eval(15.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.eval(1.0), 1.0);
        assert!((e.mean() - 40.0 / 3.0).abs() < 1e-12);
        assert!(Ecdf::from_samples(vec![]).is_empty());
    }

    #[test]
    fn outliers_have_zero_memberships() {
        let g = net(3, vec![], vec![vec![0], vec![], vec![0]], 1);
        let e = communities_per_node_ccdf(&g);
        assert_eq!(e.values, vec![0, 1]);
        assert!((e.eval(1.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn overlaps() {
        // C1 = {1,2,3}, C2 = {2,3}
        let g = net(4, vec![], vec![vec![], vec![0], vec![0, 1], vec![0, 1]], 2);
        let e = intersection_size_ccdf(&g, 2);
        assert_eq!(e.values, vec![2]);
        assert!(intersection_size_ccdf(&g, 3).is_empty());
        let disjoint = net(2, vec![], vec![vec![0], vec![1]], 2);
        assert!(intersection_size_ccdf(&disjoint, 2).is_empty());
    }

    #[test]
    fn k_subsets_enumerated() {
        let g = net(2, vec![], vec![vec![0, 1, 2, 3, 4], vec![1, 2, 3]], 5);
        let three = intersection_sizes(&g, 3);
        assert_eq!(three.len(), 10);
        assert_eq!(three[&vec![1, 2, 3]], 2);
        assert_eq!(intersection_sizes(&g, 4).len(), 5);
    }

    #[test]
    fn xi_extremes() {
        let edges = vec![(0, 1), (1, 2), (0, 2)];
        assert_eq!(realized_xi(&net(3, edges.clone(), vec![vec![0]; 3], 1)), 0.0);
        assert_eq!(realized_xi(&net(3, edges, vec![vec![]; 3], 0)), 1.0);
    }

    #[test]
    fn densities() {
        assert_eq!(density(0, 5), 0.0);
        assert_eq!(density(10, 5), 1.0);
        assert_eq!(density(0, 1), 0.0);
        // K4 on {0,1,2,3} and K5 on {1,2,3,4,5}, sharing the triangle {1,2,3}.
        let mut edges = Vec::new();
        for group in [[0u32, 1, 2, 3].as_slice(), [1, 2, 3, 4, 5].as_slice()] {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    if !edges.contains(&(a, b)) {
                        edges.push((a, b));
                    }
                }
            }
        }
        let memberships = vec![vec![0], vec![0, 1], vec![0, 1], vec![0, 1], vec![1], vec![1]];
        let g = net(6, edges, memberships, 2);
        let recs = intersection_density_profile(&g, 3, 1.0);
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!((r.overlap_size, r.size_a, r.size_b), (3, 4, 5));
        assert_eq!((r.overlap_density, r.density_a, r.density_b), (1.0, 1.0, 1.0));
        // The default ratio cap of one half excludes this pair.
        assert!(intersection_density_profile(&g, 3, 0.5).is_empty());
    }

    #[test]
    fn ief_counts() {
        // Node 0 has four neighbours, three of them in community 0.
        let edges = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
        let memberships = vec![vec![0], vec![0], vec![0], vec![0], vec![1], vec![]];
        let g = net(6, edges, memberships, 2);
        let p = ief_top_k(&g, 3);
        assert_eq!(p.isolated_skipped, 1);
        assert_eq!(p.rows[0].top, vec![0.75, 0.25, 0.0]);
        assert_eq!(p.rows[1].top, vec![1.0, 0.0, 0.0]);
        let s = ief_summary(&p);
        assert!(s.iter().all(|q| q.q25 <= q.median && q.median <= q.q75));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&v, 1.0), 4.0);
    }

    #[test]
    fn rho_ignores_outliers() {
        let edges = vec![(0, 1), (0, 2), (1, 2), (2, 3)];
        let g = net(4, edges, vec![vec![0, 1], vec![0], vec![0, 1], vec![]], 2);
        // degrees (2, 2, 3) vs memberships (2, 1, 2)
        let expected = pearson(&[2.0, 2.0, 3.0], &[2.0, 1.0, 2.0]).unwrap();
        assert_eq!(realized_rho(&g).unwrap(), expected);
        let flat = net(3, vec![(0, 1)], vec![vec![0]; 3], 1);
        assert_eq!(realized_rho(&flat).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_networks() {
        assert!(LabeledNetwork::new(2, vec![(1, 1)], vec![vec![], vec![]], vec![], None).is_err());
        assert!(LabeledNetwork::new(2, vec![(0, 1), (0, 1)], vec![vec![], vec![]], vec![], None).is_err());
        assert!(LabeledNetwork::new(2, vec![], vec![vec![3], vec![]], vec![1], None).is_err());
    }
}
