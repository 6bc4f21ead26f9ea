//! Exact spatial queries over an [`Octree`].
//!
//! Every result is ordered by `(squared distance, id)`; reported distances are
//! `sqrt` of the squared distance. Cutoffs are inclusive.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geom::{check_finite, dist2, Vec3};
use crate::octree::{NodeHandle, NodeKind, Octree};
use crate::PointId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub id: PointId,
    pub distance: f64,
}

/// Per-point lists of every other point within `cutoff`, stored CSR-style
/// with points in ascending id order.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborList {
    cutoff: f64,
    ids: Vec<PointId>,
    offsets: Vec<usize>,
    entries: Vec<Neighbor>,
}

impl NeighborList {
    /// Assembles a list from per-point neighbor vectors supplied in ascending
    /// id order. Each inner vector must already be sorted by `(distance, id)`.
    pub fn from_sorted_lists(cutoff: f64, lists: impl IntoIterator<Item = (PointId, Vec<Neighbor>)>) -> Self {
        let mut ids = Vec::new();
        let mut offsets = vec![0];
        let mut entries = Vec::new();
        for (id, list) in lists {
            debug_assert!(ids.last().is_none_or(|&last| last < id));
            ids.push(id);
            entries.extend(list);
            offsets.push(entries.len());
        }
        NeighborList { cutoff, ids, offsets, entries }
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Number of points (including those with empty lists).
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Total directed entries; twice the number of unordered pairs.
    pub fn total_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, id: PointId) -> Option<&[Neighbor]> {
        let i = self.ids.binary_search(&id).ok()?;
        Some(&self.entries[self.offsets[i]..self.offsets[i + 1]])
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &[Neighbor])> {
        self.ids.iter().enumerate().map(move |(i, &id)| (id, &self.entries[self.offsets[i]..self.offsets[i + 1]]))
    }

    pub fn mean_degree(&self) -> f64 {
        if self.ids.is_empty() {
            0.0
        } else {
            self.entries.len() as f64 / self.ids.len() as f64
        }
    }
}

/// Candidate ordered by `(d2, id)`; max-heap top is the worst kept candidate.
#[derive(Clone, Copy, Debug)]
struct Candidate {
    d2: f64,
    id: PointId,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.id.cmp(&other.id))
    }
}

/// Node queued for best-first search; reversed so `BinaryHeap` pops nearest.
#[derive(Clone, Copy, Debug)]
struct Pending {
    d2: f64,
    node: NodeHandle,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.d2.total_cmp(&self.d2).then(other.node.cmp(&self.node))
    }
}

pub(crate) fn sort_by_distance_then_id(v: &mut [(f64, PointId)]) {
    v.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
}

fn to_neighbors(v: Vec<(f64, PointId)>) -> Vec<Neighbor> {
    v.into_iter().map(|(d2, id)| Neighbor { id, distance: d2.sqrt() }).collect()
}

impl Octree {
    /// All points within `radius` of `center` (inclusive).
    pub fn range_query(&self, center: Vec3, radius: f64) -> Result<Vec<Neighbor>> {
        check_finite(&center)?;
        if !(radius >= 0.0) {
            return Err(Error::input(format!("radius must be non-negative, got {radius}")));
        }
        let r2 = radius * radius;
        let mut hits = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(h) = stack.pop() {
            let node = self.node(h);
            if node.bounds.min_dist2_point(&center) > r2 {
                continue;
            }
            match &node.kind {
                NodeKind::Leaf(leaf) => {
                    for (id, p) in leaf.ids.iter().zip(&leaf.pts) {
                        let d2 = dist2(p, &center);
                        if d2 <= r2 {
                            hits.push((d2, *id));
                        }
                    }
                }
                NodeKind::Internal { .. } => stack.extend(node.children()),
                NodeKind::Free => unreachable!(),
            }
        }
        sort_by_distance_then_id(&mut hits);
        Ok(to_neighbors(hits))
    }

    /// The `k` points smallest in `(distance, id)`; fewer if the tree is
    /// smaller. Best-first over nodes ordered by box distance.
    pub fn k_nearest(&self, query: Vec3, k: usize) -> Vec<Neighbor> {
        if k == 0 || self.is_empty() || !crate::geom::is_finite(&query) {
            return Vec::new();
        }
        let mut best: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k.min(self.len()) + 1);
        let mut frontier = BinaryHeap::new();
        let root = self.root();
        frontier.push(Pending { d2: self.node(root).bounds.min_dist2_point(&query), node: root });
        while let Some(Pending { d2, node: h }) = frontier.pop() {
            // Equal distance may still win on id, so prune only strictly.
            if best.len() == k && d2 > best.peek().expect("non-empty").d2 {
                break;
            }
            let node = self.node(h);
            match &node.kind {
                NodeKind::Leaf(leaf) => {
                    for (id, p) in leaf.ids.iter().zip(&leaf.pts) {
                        let c = Candidate { d2: dist2(p, &query), id: *id };
                        if best.len() < k {
                            best.push(c);
                        } else if c < *best.peek().expect("non-empty") {
                            best.pop();
                            best.push(c);
                        }
                    }
                }
                NodeKind::Internal { .. } => {
                    for c in node.children() {
                        let cd2 = self.node(c).bounds.min_dist2_point(&query);
                        if best.len() < k || cd2 <= best.peek().expect("non-empty").d2 {
                            frontier.push(Pending { d2: cd2, node: c });
                        }
                    }
                }
                NodeKind::Free => unreachable!(),
            }
        }
        let mut out: Vec<(f64, PointId)> = best.into_iter().map(|c| (c.d2, c.id)).collect();
        sort_by_distance_then_id(&mut out);
        to_neighbors(out)
    }

    /// Symmetric, self-free neighbor lists at cutoff `d` via dual-tree
    /// traversal. Node pairs whose boxes are farther apart than `d` are
    /// pruned; leaf pairs are tested exhaustively.
    pub fn build_neighbor_lists(&self, d: f64) -> Result<NeighborList> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::input(format!("cutoff must be a finite positive value, got {d}")));
        }
        let r2 = d * d;
        let n = self.len();

        // Dense numbering: leaves in DFS order, points in slot order.
        let mut base = vec![u32::MAX; self.node_slots()];
        let mut dense_ids: Vec<PointId> = Vec::with_capacity(n);
        let mut stack = vec![self.root()];
        while let Some(h) = stack.pop() {
            let node = self.node(h);
            match &node.kind {
                NodeKind::Leaf(leaf) => {
                    base[h.index()] = dense_ids.len() as u32;
                    dense_ids.extend_from_slice(&leaf.ids);
                }
                _ => stack.extend(node.children()),
            }
        }

        let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
        let mut walker = DualWalk { tree: self, r2, base: &base, pairs: &mut pairs };
        walker.self_pair(self.root());

        // Counting sort of directed entries by source.
        let mut degree = vec![0usize; n + 1];
        for &(a, b, _) in &pairs {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let mut fill = degree.clone();
        let mut scratch = vec![(0.0f64, PointId(0)); pairs.len() * 2];
        for &(a, b, d2) in &pairs {
            scratch[fill[a as usize]] = (d2, dense_ids[b as usize]);
            fill[a as usize] += 1;
            scratch[fill[b as usize]] = (d2, dense_ids[a as usize]);
            fill[b as usize] += 1;
        }
        drop(pairs);

        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&i| dense_ids[i as usize]);
        let mut ids = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut entries = Vec::with_capacity(scratch.len());
        for i in order {
            let seg = &mut scratch[degree[i as usize]..degree[i as usize + 1]];
            sort_by_distance_then_id(seg);
            ids.push(dense_ids[i as usize]);
            entries.extend(seg.iter().map(|&(d2, id)| Neighbor { id, distance: d2.sqrt() }));
            offsets.push(entries.len());
        }
        Ok(NeighborList { cutoff: d, ids, offsets, entries })
    }
}

struct DualWalk<'a> {
    tree: &'a Octree,
    r2: f64,
    base: &'a [u32],
    pairs: &'a mut Vec<(u32, u32, f64)>,
}

impl DualWalk<'_> {
    /// All qualifying pairs with both points under `h`.
    fn self_pair(&mut self, h: NodeHandle) {
        let node = self.tree.node(h);
        match &node.kind {
            NodeKind::Leaf(leaf) => {
                let b = self.base[h.index()];
                for i in 0..leaf.pts.len() {
                    for j in i + 1..leaf.pts.len() {
                        let d2 = dist2(&leaf.pts[i], &leaf.pts[j]);
                        if d2 <= self.r2 {
                            self.pairs.push((b + i as u32, b + j as u32, d2));
                        }
                    }
                }
            }
            NodeKind::Internal { children, .. } => {
                let mut kids = [NodeHandle(0); 8];
                let mut len = 0;
                for &c in children.iter().flatten() {
                    kids[len] = c;
                    len += 1;
                }
                let kids = &kids[..len];
                for (i, &a) in kids.iter().enumerate() {
                    self.self_pair(a);
                    for &c in &kids[i + 1..] {
                        self.cross_pair(a, c);
                    }
                }
            }
            NodeKind::Free => unreachable!(),
        }
    }

    /// All qualifying pairs with one point under `a` and one under `b`
    /// (disjoint subtrees).
    fn cross_pair(&mut self, a: NodeHandle, b: NodeHandle) {
        let na = self.tree.node(a);
        let nb = self.tree.node(b);
        if na.bounds.min_dist2_box(&nb.bounds) > self.r2 {
            return;
        }
        match (&na.kind, &nb.kind) {
            (NodeKind::Leaf(la), NodeKind::Leaf(lb)) => {
                let ba = self.base[a.index()];
                let bb = self.base[b.index()];
                for (i, p) in la.pts.iter().enumerate() {
                    for (j, q) in lb.pts.iter().enumerate() {
                        let d2 = dist2(p, q);
                        if d2 <= self.r2 {
                            self.pairs.push((ba + i as u32, bb + j as u32, d2));
                        }
                    }
                }
            }
            (NodeKind::Internal { .. }, NodeKind::Leaf(_)) => {
                for c in na.children() {
                    self.cross_pair(c, b);
                }
            }
            (NodeKind::Leaf(_), NodeKind::Internal { .. }) => {
                for c in nb.children() {
                    self.cross_pair(a, c);
                }
            }
            _ => {
                // Split the larger box so both sides shrink at a similar rate.
                if na.bounds.volume() >= nb.bounds.volume() {
                    for c in na.children() {
                        self.cross_pair(c, b);
                    }
                } else {
                    for c in nb.children() {
                        self.cross_pair(a, c);
                    }
                }
            }
        }
    }
}
