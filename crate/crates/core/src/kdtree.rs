//! Exact k-nearest-neighbour index over points in `R^dim`.
//!
//! Neighbours are ordered by `(squared distance, element id)`, so ties are
//! broken towards the lower id. Points can be masked out; subtrees without
//! active points are skipped and the tree is rebuilt once more than half of
//! the indexed points are masked.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;
const NONE: u32 = u32::MAX;

/// Squared Euclidean distance, accumulated in coordinate order.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        acc += t * t;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub dist2: f64,
    pub id: u32,
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
    parent: u32,
    active: u32,
}

pub struct SpatialIndex<'a> {
    dim: usize,
    coords: &'a [f64],
    /// Tree slot -> element id.
    slots: Vec<u32>,
    nodes: Vec<Node>,
    /// Per node: `dim` lower bounds followed by `dim` upper bounds.
    bounds: Vec<f64>,
    leaf_of: Vec<u32>,
    active: Vec<bool>,
    n_active: usize,
}

impl<'a> SpatialIndex<'a> {
    /// Indexes every point of `coords` (row-major, `dim` values per point).
    pub fn new(coords: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && coords.len().is_multiple_of(dim));
        let n = coords.len() / dim;
        let mut index = SpatialIndex {
            dim,
            coords,
            slots: Vec::new(),
            nodes: Vec::new(),
            bounds: Vec::new(),
            leaf_of: vec![NONE; n],
            active: vec![true; n],
            n_active: n,
        };
        index.rebuild();
        index
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.n_active
    }

    pub fn is_active(&self, id: u32) -> bool {
        self.active[id as usize]
    }

    pub fn point(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.coords[i..i + self.dim]
    }

    fn rebuild(&mut self) {
        self.slots = (0..self.active.len() as u32)
            .filter(|&id| self.active[id as usize])
            .collect();
        self.nodes.clear();
        self.bounds.clear();
        self.leaf_of.iter_mut().for_each(|x| *x = NONE);
        if !self.slots.is_empty() {
            self.build(0, self.slots.len(), NONE);
        }
    }

    fn build(&mut self, start: usize, end: usize, parent: u32) -> u32 {
        let node_id = self.nodes.len() as u32;
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            left: NONE,
            right: NONE,
            parent,
            active: (end - start) as u32,
        });
        let dim = self.dim;
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for &id in &self.slots[start..end] {
            let p = &self.coords[id as usize * dim..(id as usize + 1) * dim];
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap();
        let spread = hi[axis] - lo[axis];
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if end - start <= LEAF_SIZE || spread == 0.0 {
            for &id in &self.slots[start..end] {
                self.leaf_of[id as usize] = node_id;
            }
            return node_id;
        }
        let mid = start + (end - start) / 2;
        let coords = self.coords;
        self.slots[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a as usize * dim + axis].total_cmp(&coords[b as usize * dim + axis])
        });
        let left = self.build(start, mid, node_id);
        let right = self.build(mid, end, node_id);
        let node = &mut self.nodes[node_id as usize];
        node.left = left;
        node.right = right;
        node_id
    }

    /// Masks `id` out of all subsequent queries.
    pub fn deactivate(&mut self, id: u32) {
        if !std::mem::replace(&mut self.active[id as usize], false) {
            return;
        }
        self.n_active -= 1;
        let mut node = self.leaf_of[id as usize];
        while node != NONE {
            let n = &mut self.nodes[node as usize];
            n.active -= 1;
            node = n.parent;
        }
        if self.n_active * 2 < self.slots.len() {
            self.rebuild();
        }
    }

    fn box_dist2(&self, node: u32, q: &[f64]) -> f64 {
        let b = &self.bounds[node as usize * 2 * self.dim..(node as usize + 1) * 2 * self.dim];
        let (lo, hi) = b.split_at(self.dim);
        let mut acc = 0.0;
        for k in 0..self.dim {
            let t = if q[k] < lo[k] {
                lo[k] - q[k]
            } else if q[k] > hi[k] {
                q[k] - hi[k]
            } else {
                0.0
            };
            acc += t * t;
        }
        acc
    }

    /// The `k` active points nearest to `q`, sorted by `(distance, id)`.
    pub fn nearest(&self, q: &[f64], k: usize) -> Vec<Neighbor> {
        assert_eq!(q.len(), self.dim);
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, q, k, &mut heap);
        heap.into_sorted_vec()
    }

    fn search(&self, node: u32, q: &[f64], k: usize, heap: &mut BinaryHeap<Neighbor>) {
        let n = &self.nodes[node as usize];
        if n.active == 0 {
            return;
        }
        if n.left == NONE {
            for &id in &self.slots[n.start as usize..n.end as usize] {
                if !self.active[id as usize] {
                    continue;
                }
                let cand = Neighbor {
                    dist2: dist2(self.point(id), q),
                    id,
                };
                if heap.len() < k {
                    heap.push(cand);
                } else if cand < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        let dl = self.box_dist2(n.left, q);
        let dr = self.box_dist2(n.right, q);
        let (first, d_first, second, d_second) = if dl <= dr {
            (n.left, dl, n.right, dr)
        } else {
            (n.right, dr, n.left, dl)
        };
        // Equal distances must still be explored: a lower id may win the tie.
        if heap.len() < k || d_first <= heap.peek().unwrap().dist2 {
            self.search(first, q, k, heap);
        }
        if heap.len() < k || d_second <= heap.peek().unwrap().dist2 {
            self.search(second, q, k, heap);
        }
    }
}
