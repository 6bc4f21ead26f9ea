//! The (K, alpha)-admissible dynamic octree.
//!
//! Nodes live in an index-addressed arena with free-list reuse. Leaves store
//! point ids and coordinates contiguously; a registry maps every live id to
//! its leaf and slot so updates never need a top-down search.
//!
//! Octant membership is half-open: a child covers `[min, max)` on each axis,
//! except that faces lying on the root's upper boundary are closed.

mod node;
mod validate;

use std::collections::HashMap;

pub use node::NodeHandle;
use node::Slot;
pub(crate) use node::{LeafData, Node, NodeKind};
pub use validate::{AdmissibilityReport, Violation};

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::geom::{check_finite, is_finite, octant_index, Aabb, Vec3};
use crate::PointId;

#[derive(Clone, Debug)]
pub struct Octree {
    config: OctreeConfig,
    nodes: Vec<Node>,
    free: Vec<NodeHandle>,
    root: NodeHandle,
    registry: HashMap<PointId, Slot>,
}

impl Octree {
    /// Empty tree whose root is a single leaf spanning `bounds`.
    pub fn new(config: OctreeConfig, bounds: Aabb) -> Result<Self> {
        config.validate()?;
        if bounds.is_degenerate() || !is_finite(&bounds.min) || !is_finite(&bounds.max) {
            return Err(Error::input(format!("initial bounds {bounds:?} are degenerate")));
        }
        Ok(Octree {
            config,
            nodes: vec![Node::leaf(bounds, None, 0)],
            free: Vec::new(),
            root: NodeHandle(0),
            registry: HashMap::new(),
        })
    }

    /// Builds a tree over `points`, sizing the root to their padded bounding box.
    pub fn from_points(config: OctreeConfig, points: &[(PointId, Vec3)]) -> Result<Self> {
        let bounds = Aabb::from_points(points.iter().map(|(_, p)| p)).map(|b| b.padded(0.0)).unwrap_or_else(Aabb::unit);
        let mut tree = Octree::new(config, bounds)?;
        for &(id, p) in points {
            tree.insert(id, p)?;
        }
        Ok(tree)
    }

    pub fn config(&self) -> &OctreeConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.registry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registry.is_empty()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[self.root.idx()].bounds
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.registry.contains_key(&id)
    }

    pub fn position(&self, id: PointId) -> Option<Vec3> {
        self.registry.get(&id).map(|s| s.pos)
    }

    /// The leaf currently holding `id`.
    pub fn leaf_of(&self, id: PointId) -> Option<NodeHandle> {
        self.registry.get(&id).map(|s| s.leaf)
    }

    pub fn root_handle(&self) -> NodeHandle {
        self.root
    }

    /// All live points, sorted by id.
    pub fn points(&self) -> Vec<(PointId, Vec3)> {
        let mut v: Vec<_> = self.registry.iter().map(|(&id, s)| (id, s.pos)).collect();
        v.sort_unstable_by_key(|&(id, _)| id);
        v
    }

    pub fn ids(&self) -> Vec<PointId> {
        let mut v: Vec<_> = self.registry.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Depth of the deepest leaf (0 for a leaf root).
    pub fn depth(&self) -> u32 {
        self.live_nodes().filter(|(_, n)| n.is_leaf()).map(|(_, n)| n.depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() - self.free.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.live_nodes().filter(|(_, n)| n.is_leaf()).count()
    }

    pub fn is_leaf(&self, h: NodeHandle) -> bool {
        self.nodes.get(h.idx()).is_some_and(|n| n.is_leaf())
    }

    pub fn subtree_count(&self, h: NodeHandle) -> Option<usize> {
        self.nodes.get(h.idx()).filter(|n| !matches!(n.kind, NodeKind::Free)).map(|n| n.count)
    }

    /// Point ids grouped by leaf: each group sorted, groups sorted.
    ///
    /// Two trees with equal partitions assign every point to the same cell
    /// content, independent of arena layout.
    pub fn leaf_partition(&self) -> Vec<Vec<PointId>> {
        let mut groups: Vec<Vec<PointId>> = self
            .live_nodes()
            .filter_map(|(_, n)| match &n.kind {
                NodeKind::Leaf(l) if !l.ids.is_empty() => {
                    let mut ids = l.ids.clone();
                    ids.sort_unstable();
                    Some(ids)
                }
                _ => None,
            })
            .collect();
        groups.sort();
        groups
    }

    pub(crate) fn root(&self) -> NodeHandle {
        self.root
    }

    #[inline]
    pub(crate) fn node(&self, h: NodeHandle) -> &Node {
        &self.nodes[h.idx()]
    }

    pub(crate) fn node_slots(&self) -> usize {
        self.nodes.len()
    }

    fn live_nodes(&self) -> impl Iterator<Item = (NodeHandle, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !matches!(n.kind, NodeKind::Free))
            .map(|(i, n)| (NodeHandle(i as u32), n))
    }

    // ---- mutation ----------------------------------------------------------

    pub fn insert(&mut self, id: PointId, pos: Vec3) -> Result<()> {
        check_finite(&pos)?;
        if self.registry.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.expand_bounds(pos)?;
        self.insert_below(self.root, id, pos, true);
        Ok(())
    }

    /// Removes `id` and returns its last position.
    pub fn remove(&mut self, id: PointId) -> Result<Vec3> {
        let slot = self.registry.remove(&id).ok_or(Error::NotFound(id))?;
        self.take_from_leaf(slot.leaf, slot.index);
        let mut cur = Some(slot.leaf);
        while let Some(h) = cur {
            let n = &mut self.nodes[h.idx()];
            n.count -= 1;
            cur = n.parent;
        }
        self.rebalance_after_removal(slot.leaf, None);
        Ok(slot.pos)
    }

    /// Moves `id` to `new_pos`, touching only the nodes between its old and
    /// new leaf.
    pub fn update_position(&mut self, id: PointId, new_pos: Vec3) -> Result<()> {
        check_finite(&new_pos)?;
        let slot = *self.registry.get(&id).ok_or(Error::NotFound(id))?;
        if self.in_cell(slot.leaf, &new_pos) {
            self.set_in_place(id, slot, new_pos);
            return Ok(());
        }
        if !self.bounds().contains(&new_pos) {
            self.expand_bounds(new_pos)?;
        }
        // Expansion may have re-rooted or rebuilt the tree.
        let slot = self.registry[&id];
        if self.in_cell(slot.leaf, &new_pos) {
            self.set_in_place(id, slot, new_pos);
            return Ok(());
        }

        // Lowest common ancestor: first ancestor whose cell holds the target.
        let mut lca = self.nodes[slot.leaf.idx()].parent.expect("leaf root contains every in-bounds point");
        while !self.in_cell(lca, &new_pos) {
            lca = self.nodes[lca.idx()].parent.expect("root contains the target after expansion");
        }

        self.registry.remove(&id);
        self.take_from_leaf(slot.leaf, slot.index);
        let mut cur = slot.leaf;
        while cur != lca {
            let n = &mut self.nodes[cur.idx()];
            n.count -= 1;
            cur = n.parent.expect("lca is an ancestor");
        }
        // The two paths below the LCA are disjoint, so inserting first cannot
        // disturb the nodes the removal side will rebalance.
        self.insert_below(lca, id, new_pos, false);
        self.rebalance_after_removal(slot.leaf, Some(lca));
        Ok(())
    }

    /// Grows the root until it contains `target`.
    ///
    /// With the default factor of 2 the old root becomes an octant of a new
    /// root, so existing leaves are untouched. Any other factor rebuilds the
    /// tree inside the grown box.
    pub fn expand_bounds(&mut self, target: Vec3) -> Result<()> {
        check_finite(&target)?;
        if self.bounds().contains(&target) {
            return Ok(());
        }
        if self.config.expansion_factor == 2.0 {
            self.expand_by_doubling(&target)
        } else {
            self.expand_by_rebuild(&target)
        }
    }

    pub fn validate_admissibility(&self) -> AdmissibilityReport {
        validate::validate(self)
    }

    // ---- internals ---------------------------------------------------------

    fn alloc(&mut self, node: Node) -> NodeHandle {
        if let Some(h) = self.free.pop() {
            self.nodes[h.idx()] = node;
            h
        } else {
            self.nodes.push(node);
            NodeHandle((self.nodes.len() - 1) as u32)
        }
    }

    fn release(&mut self, h: NodeHandle) {
        self.nodes[h.idx()].kind = NodeKind::Free;
        self.nodes[h.idx()].parent = None;
        self.free.push(h);
    }

    /// Whether `p` descends into node `h` under the half-open convention.
    pub(crate) fn in_cell(&self, h: NodeHandle, p: &Vec3) -> bool {
        let b = &self.nodes[h.idx()].bounds;
        let top = &self.nodes[self.root.idx()].bounds.max;
        (0..3).all(|a| b.min[a] <= p[a] && (p[a] < b.max[a] || (p[a] == b.max[a] && b.max[a] == top[a])))
    }

    fn set_in_place(&mut self, id: PointId, slot: Slot, pos: Vec3) {
        if let NodeKind::Leaf(leaf) = &mut self.nodes[slot.leaf.idx()].kind {
            leaf.pts[slot.index as usize] = pos;
        }
        self.registry.get_mut(&id).expect("live id").pos = pos;
    }

    /// Descends from `start` to the leaf whose cell holds `pos`, creating the
    /// octant child if absent, stores the point and splits if over capacity.
    /// Subtree counts are incremented along the way (`start` only when
    /// `count_start`).
    fn insert_below(&mut self, start: NodeHandle, id: PointId, pos: Vec3, count_start: bool) {
        let mut cur = start;
        if count_start {
            self.nodes[cur.idx()].count += 1;
        }
        loop {
            let (center, child) = match &self.nodes[cur.idx()].kind {
                NodeKind::Leaf(_) => break,
                NodeKind::Internal { center, children } => {
                    let o = octant_index(center, &pos);
                    (*center, children[o].ok_or(o))
                }
                NodeKind::Free => unreachable!("descended into a freed node"),
            };
            let next = match child {
                Ok(c) => c,
                Err(octant) => {
                    let parent = &self.nodes[cur.idx()];
                    let node = Node::leaf(parent.bounds.octant(&center, octant), Some(cur), parent.depth + 1);
                    let c = self.alloc(node);
                    if let NodeKind::Internal { children, .. } = &mut self.nodes[cur.idx()].kind {
                        children[octant] = Some(c);
                    }
                    c
                }
            };
            self.nodes[next.idx()].count += 1;
            cur = next;
        }
        let NodeKind::Leaf(leaf) = &mut self.nodes[cur.idx()].kind else { unreachable!() };
        let index = leaf.push(id, pos);
        self.registry.insert(id, Slot { leaf: cur, index, pos });
        self.split_if_needed(cur);
    }

    fn split_if_needed(&mut self, h: NodeHandle) {
        let node = &self.nodes[h.idx()];
        if node.count <= self.config.leaf_capacity() || node.depth >= self.config.max_depth {
            return;
        }
        let bounds = node.bounds;
        let depth = node.depth;
        let center = bounds.center();
        let old = std::mem::replace(&mut self.nodes[h.idx()].kind, NodeKind::Internal { center, children: [None; 8] });
        let NodeKind::Leaf(leaf) = old else { unreachable!("only leaves split") };

        let mut buckets: [LeafData; 8] = Default::default();
        for (id, p) in leaf.ids.into_iter().zip(leaf.pts) {
            buckets[octant_index(&center, &p)].push(id, p);
        }
        let mut children = [None; 8];
        for (octant, bucket) in buckets.into_iter().enumerate() {
            if bucket.ids.is_empty() {
                continue;
            }
            let child = self.alloc(Node {
                bounds: bounds.octant(&center, octant),
                parent: Some(h),
                depth: depth + 1,
                count: bucket.len(),
                kind: NodeKind::Leaf(bucket),
            });
            if let NodeKind::Leaf(l) = &self.nodes[child.idx()].kind {
                for (i, id) in l.ids.iter().enumerate() {
                    let s = self.registry.get_mut(id).expect("registered");
                    s.leaf = child;
                    s.index = i as u32;
                }
            }
            children[octant] = Some(child);
        }
        if let NodeKind::Internal { children: slot, .. } = &mut self.nodes[h.idx()].kind {
            *slot = children;
        }
        for c in children.into_iter().flatten() {
            self.split_if_needed(c);
        }
    }

    /// Swap-removes slot `index` of leaf `h`, fixing the moved point's slot.
    fn take_from_leaf(&mut self, h: NodeHandle, index: u32) {
        let NodeKind::Leaf(leaf) = &mut self.nodes[h.idx()].kind else { unreachable!("registry points at a non-leaf") };
        let i = index as usize;
        leaf.ids.swap_remove(i);
        leaf.pts.swap_remove(i);
        if i < leaf.ids.len() {
            let moved = leaf.ids[i];
            self.registry.get_mut(&moved).expect("registered").index = index;
        }
    }

    /// Restores admissibility after a point left `leaf`. Only ancestors
    /// strictly below `stop` had their counts reduced.
    ///
    /// The highest under-floor ancestor is collapsed; counts grow towards the
    /// root, so this absorbs every lower violator on the path too.
    fn rebalance_after_removal(&mut self, leaf: NodeHandle, stop: Option<NodeHandle>) {
        let floor = self.config.internal_floor();
        let mut highest = None;
        let mut cur = self.nodes[leaf.idx()].parent;
        while let Some(h) = cur {
            if Some(h) == stop {
                break;
            }
            if self.nodes[h.idx()].count <= floor {
                highest = Some(h);
            }
            cur = self.nodes[h.idx()].parent;
        }
        let target = match highest {
            Some(h) => {
                self.collapse(h);
                h
            }
            None => leaf,
        };
        if self.nodes[target.idx()].count == 0 && target != self.root {
            self.detach(target);
        }
    }

    /// Turns internal node `h` into a leaf holding every point below it.
    fn collapse(&mut self, h: NodeHandle) {
        let mut merged = LeafData::default();
        let mut stack: Vec<NodeHandle> = self.nodes[h.idx()].children().collect();
        stack.reverse();
        while let Some(c) = stack.pop() {
            let kind = std::mem::replace(&mut self.nodes[c.idx()].kind, NodeKind::Free);
            match kind {
                NodeKind::Leaf(l) => {
                    merged.ids.extend(l.ids);
                    merged.pts.extend(l.pts);
                }
                NodeKind::Internal { children, .. } => {
                    stack.extend(children.iter().rev().flatten());
                }
                NodeKind::Free => unreachable!(),
            }
            self.nodes[c.idx()].parent = None;
            self.free.push(c);
        }
        debug_assert_eq!(merged.len(), self.nodes[h.idx()].count);
        for (i, id) in merged.ids.iter().enumerate() {
            let s = self.registry.get_mut(id).expect("registered");
            s.leaf = h;
            s.index = i as u32;
        }
        self.nodes[h.idx()].kind = NodeKind::Leaf(merged);
    }

    /// Unlinks an empty non-root node from its parent and frees it.
    fn detach(&mut self, h: NodeHandle) {
        let parent = self.nodes[h.idx()].parent.expect("non-root");
        if let NodeKind::Internal { children, .. } = &mut self.nodes[parent.idx()].kind {
            for c in children.iter_mut() {
                if *c == Some(h) {
                    *c = None;
                }
            }
        }
        self.release(h);
    }

    fn expand_by_doubling(&mut self, target: &Vec3) -> Result<()> {
        let mut relocate = Vec::new();
        while !self.bounds().contains(target) {
            let old = self.bounds();
            let size = old.size();
            let mut grown = old;
            let mut center = [0.0; 3];
            let mut upward = [false; 3];
            for a in 0..3 {
                if target[a] < old.min[a] {
                    grown.min[a] = old.min[a] - size[a];
                    center[a] = old.min[a];
                } else {
                    grown.max[a] = old.max[a] + size[a];
                    center[a] = old.max[a];
                    upward[a] = true;
                }
            }
            if !is_finite(&grown.min) || !is_finite(&grown.max) {
                return Err(Error::input(format!("cannot grow bounds to contain {target:?}")));
            }
            let root = self.root;
            if self.nodes[root.idx()].is_leaf() {
                self.nodes[root.idx()].bounds = grown;
                continue;
            }
            // Faces of the old root on the grown side stop being closed, so
            // points lying exactly on them now belong to a sibling octant.
            relocate.extend(
                self.registry
                    .iter()
                    .filter(|(_, s)| (0..3).any(|a| upward[a] && s.pos[a] == old.max[a]))
                    .map(|(&id, _)| id),
            );
            let octant = octant_index(&center, &old.center());
            let mut children = [None; 8];
            children[octant] = Some(root);
            let count = self.nodes[root.idx()].count;
            let new_root = self.alloc(Node {
                bounds: grown,
                parent: None,
                depth: 0,
                count,
                kind: NodeKind::Internal { center, children },
            });
            self.nodes[root.idx()].parent = Some(new_root);
            self.root = new_root;
            let mut stack = vec![root];
            while let Some(h) = stack.pop() {
                self.nodes[h.idx()].depth += 1;
                stack.extend(self.nodes[h.idx()].children());
            }
        }
        relocate.sort_unstable();
        relocate.dedup();
        for id in relocate {
            let slot = self.registry[&id];
            if !self.in_cell(slot.leaf, &slot.pos) {
                self.remove(id)?;
                self.insert_below(self.root, id, slot.pos, true);
            }
        }
        Ok(())
    }

    fn expand_by_rebuild(&mut self, target: &Vec3) -> Result<()> {
        let f = self.config.expansion_factor;
        let mut grown = self.bounds();
        while !grown.contains(target) {
            let size = grown.size();
            for a in 0..3 {
                if target[a] < grown.min[a] {
                    grown.min[a] = grown.max[a] - size[a] * f;
                } else {
                    grown.max[a] = grown.min[a] + size[a] * f;
                }
            }
            if !is_finite(&grown.min) || !is_finite(&grown.max) {
                return Err(Error::input(format!("cannot grow bounds to contain {target:?}")));
            }
        }
        let points = self.points();
        self.nodes.clear();
        self.free.clear();
        self.registry.clear();
        self.nodes.push(Node::leaf(grown, None, 0));
        self.root = NodeHandle(0);
        for (id, p) in points {
            self.insert_below(self.root, id, p, true);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
