//! Repair of self-loops and parallel edges by degree-preserving rewiring.
//!
//! Each component graph is first cleaned on its own with a recycle list of
//! offending edges; what cannot be fixed locally, together with duplicates
//! between components, is re-paired and rewired against the merged graph.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edges::{edge, edge_key, Edge, MultiGraph};
use crate::error::{Error, Result};

/// Offending edge indices in index order: every self-loop, and every copy of
/// a repeated pair except the first.
pub fn collect_offenders(edges: &[Edge]) -> Vec<usize> {
    let mut seen = HashSet::with_capacity(edges.len());
    edges
        .iter()
        .enumerate()
        .filter(|&(_, &(a, b))| a == b || !seen.insert(edge_key((a, b))))
        .map(|(i, _)| i)
        .collect()
}

/// Edge multiplicities, kept in sync with an edge array during rewiring.
struct Multiset(HashMap<u64, u32>);

impl Multiset {
    fn new(edges: &[Edge]) -> Self {
        let mut map = HashMap::with_capacity(edges.len());
        for &e in edges {
            *map.entry(edge_key(e)).or_insert(0) += 1;
        }
        Multiset(map)
    }

    fn count(&self, e: Edge) -> u32 {
        self.0.get(&edge_key(e)).copied().unwrap_or(0)
    }

    fn insert(&mut self, e: Edge) {
        *self.0.entry(edge_key(e)).or_insert(0) += 1;
    }

    fn remove(&mut self, e: Edge) {
        let key = edge_key(e);
        let c = self.0.get_mut(&key).expect("edge present");
        *c -= 1;
        if *c == 0 {
            self.0.remove(&key);
        }
    }

    fn is_offending(&self, e: Edge) -> bool {
        e.0 == e.1 || self.count(e) > 1
    }
}

/// Tries to rewire edge `e` with a uniformly chosen partner `f != e`: the
/// four endpoints `{a,b},{c,d}` are re-paired as `{a,c},{b,d}` or
/// `{a,d},{b,c}` (equally likely). The change is kept only if it creates no
/// self-loop and no parallel edge. Returns the partner index on success.
fn try_rewire<R: Rng + ?Sized>(edges: &mut [Edge], multiset: &mut Multiset, e: usize, rng: &mut R) -> Option<usize> {
    if edges.len() < 2 {
        return None;
    }
    let mut f = rng.random_range(0..edges.len() - 1);
    if f >= e {
        f += 1;
    }
    let (a, b) = edges[e];
    let (c, d) = edges[f];
    let (x, y) = if rng.random::<bool>() {
        (edge(a, c), edge(b, d))
    } else {
        (edge(a, d), edge(b, c))
    };
    if x.0 == x.1 || y.0 == y.1 || x == y {
        return None;
    }
    multiset.remove(edges[e]);
    multiset.remove(edges[f]);
    if multiset.count(x) > 0 || multiset.count(y) > 0 {
        multiset.insert(edges[e]);
        multiset.insert(edges[f]);
        return None;
    }
    multiset.insert(x);
    multiset.insert(y);
    edges[e] = x;
    edges[f] = y;
    Some(f)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRewire {
    /// Simple graph left after removing unfixable edges.
    pub edges: Vec<Edge>,
    /// Offending edges handed over to the global phase.
    pub leftovers: Vec<Edge>,
    pub initial_offenders: usize,
    pub rounds: usize,
}

/// Rewires one component graph until its recycle list stops shrinking.
pub fn rewire_graph<R: Rng + ?Sized>(mut edges: Vec<Edge>, rng: &mut R) -> LocalRewire {
    let mut list = collect_offenders(&edges);
    let initial_offenders = list.len();
    let mut rounds = 0;
    if !list.is_empty() {
        let mut multiset = Multiset::new(&edges);
        loop {
            list.shuffle(rng);
            for &e in &list {
                try_rewire(&mut edges, &mut multiset, e, rng);
            }
            rounds += 1;
            let next = collect_offenders(&edges);
            let shrunk = next.len() < list.len();
            list = next;
            if list.is_empty() || !shrunk {
                break;
            }
        }
    }
    let leftovers = if list.is_empty() {
        Vec::new()
    } else {
        let mut drop = vec![false; edges.len()];
        for &i in &list {
            drop[i] = true;
        }
        let leftovers = list.iter().map(|&i| edges[i]).collect();
        let mut k = 0;
        edges.retain(|_| {
            k += 1;
            !drop[k - 1]
        });
        leftovers
    };
    LocalRewire {
        edges,
        leftovers,
        initial_offenders,
        rounds,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalRewireStats {
    pub cross_component_duplicates: usize,
    pub global_list_size: usize,
    /// Re-paired edges that were still loops or duplicates.
    pub offenders_after_repairing: usize,
    pub attempts: usize,
    pub failed_attempts: usize,
}

/// Merges simple component graphs, collects duplicates across components
/// (first copy in component order is kept), dissolves them together with the
/// local leftovers into half-edges, re-pairs those at random and rewires
/// the result into a simple graph.
///
/// Fails once more than `100 x (size of the recycle list)` consecutive
/// rewiring attempts make no progress.
pub fn global_rewire<R: Rng + ?Sized>(
    components: Vec<MultiGraph>,
    leftovers: MultiGraph,
    rng: &mut R,
) -> Result<(MultiGraph, GlobalRewireStats)> {
    let mut stats = GlobalRewireStats::default();
    let total: usize = components.iter().map(MultiGraph::len).sum();
    let mut edges = Vec::with_capacity(total + leftovers.len());
    let mut tags = Vec::with_capacity(total + leftovers.len());
    let mut seen = HashSet::with_capacity(total);
    let mut recycle = leftovers;
    for g in components {
        for (e, t) in g.edges.into_iter().zip(g.tags) {
            if seen.insert(edge_key(e)) {
                edges.push(e);
                tags.push(t);
            } else {
                recycle.edges.push(e);
                recycle.tags.push(t);
                stats.cross_component_duplicates += 1;
            }
        }
    }
    drop(seen);
    stats.global_list_size = recycle.len();
    if recycle.is_empty() {
        return Ok((MultiGraph { edges, tags }, stats));
    }

    let mut stubs: Vec<u32> = recycle.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    stubs.shuffle(rng);
    let mut multiset = Multiset::new(&edges);
    let mut list = Vec::new();
    for (k, pair) in stubs.chunks_exact(2).enumerate() {
        let e = edge(pair[0], pair[1]);
        multiset.insert(e);
        if multiset.is_offending(e) {
            list.push(edges.len());
        }
        edges.push(e);
        tags.push(recycle.tags[k]);
    }
    stats.offenders_after_repairing = list.len();

    let mut stalled = 0usize;
    while !list.is_empty() {
        list.shuffle(rng);
        let mut remaining = Vec::with_capacity(list.len());
        for &e in &list {
            if !multiset.is_offending(edges[e]) {
                continue;
            }
            stats.attempts += 1;
            match try_rewire(&mut edges, &mut multiset, e, rng) {
                // The rewired edges keep the tags of the slots they replace.
                Some(_) => stalled = 0,
                None => {
                    stats.failed_attempts += 1;
                    stalled += 1;
                    remaining.push(e);
                }
            }
            if stalled > 100 * list.len() {
                return Err(Error::RewiringFailed {
                    remaining: remaining.len(),
                    attempts: stalled,
                });
            }
        }
        list = remaining;
    }
    Ok((MultiGraph { edges, tags }, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Phase};

    fn rng(i: u64) -> crate::rng::Rng {
        substream(21, Phase::LocalRewire, i)
    }

    fn is_simple(edges: &[Edge]) -> bool {
        collect_offenders(edges).is_empty()
    }

    #[test]
    fn offenders() {
        assert!(collect_offenders(&[(0, 1), (1, 2)]).is_empty());
        assert_eq!(collect_offenders(&[(0, 0), (1, 2), (1, 2)]), vec![0, 2]);
        assert_eq!(collect_offenders(&[(1, 2), (1, 2), (1, 2)]), vec![1, 2]);
    }

    #[test]
    fn simple_graph_untouched() {
        let out = rewire_graph(vec![(0, 1), (1, 2), (0, 2)], &mut rng(0));
        assert_eq!(out.edges, vec![(0, 1), (1, 2), (0, 2)]);
        assert!(out.leftovers.is_empty());
        assert_eq!(out.rounds, 0);
    }

    #[test]
    fn loop_rewired_with_path() {
        for k in 0..20 {
            let out = rewire_graph(vec![(0, 1), (2, 2)], &mut rng(k));
            let mut e = out.edges.clone();
            e.sort_unstable();
            assert_eq!(e, vec![(0, 2), (1, 2)]);
            assert!(out.leftovers.is_empty());
        }
    }

    #[test]
    fn lone_loop_is_left_over() {
        let out = rewire_graph(vec![(0, 0)], &mut rng(1));
        assert!(out.edges.is_empty());
        assert_eq!(out.leftovers, vec![(0, 0)]);
        assert_eq!(out.initial_offenders, 1);
    }

    #[test]
    fn cross_component_duplicate_goes_to_global_list() {
        let community = MultiGraph::tagged(vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], 1);
        let background = MultiGraph::tagged(vec![(0, 1), (5, 6), (6, 7), (7, 8)], 0);
        let (g, stats) =
            global_rewire(vec![community, background], MultiGraph::default(), &mut rng(2)).unwrap();
        assert_eq!(stats.cross_component_duplicates, 1);
        assert_eq!(stats.global_list_size, 1);
        assert!(is_simple(&g.edges));
        assert_eq!(g.degrees(9), vec![2, 3, 2, 2, 2, 2, 2, 2, 1]);
    }

    #[test]
    fn clean_merge_returned_as_is() {
        let a = MultiGraph::tagged(vec![(0, 1)], 1);
        let b = MultiGraph::tagged(vec![(1, 2)], 0);
        let (g, stats) = global_rewire(vec![a, b], MultiGraph::default(), &mut rng(3)).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 2)]);
        assert_eq!(g.tags, vec![1, 0]);
        assert_eq!(stats.global_list_size, 0);
    }

    #[test]
    fn non_graphic_input_fails() {
        // A single node with a loop can never become simple.
        let err = global_rewire(vec![], MultiGraph::tagged(vec![(0, 0)], 1), &mut rng(4)).unwrap_err();
        assert!(matches!(err, Error::RewiringFailed { .. }));
        // Two nodes with a triple edge: degrees (3, 3) are not graphic.
        let err = global_rewire(
            vec![MultiGraph::tagged(vec![(0, 1), (0, 1), (0, 1)], 0)],
            MultiGraph::default(),
            &mut rng(5),
        )
        .unwrap_err();
        assert!(matches!(err, Error::RewiringFailed { .. }));
    }
}
