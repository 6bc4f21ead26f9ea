use crate::geom::{Aabb, Vec3};
use crate::PointId;

/// Handle into the node arena. Stable for as long as the node lives; freed
/// handles are recycled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeHandle(pub(crate) u32);

impl NodeHandle {
    #[inline]
    pub(crate) fn idx(self) -> usize {
        self.0 as usize
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, Default)]
pub(crate) struct LeafData {
    pub ids: Vec<PointId>,
    pub pts: Vec<Vec3>,
}

impl LeafData {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn push(&mut self, id: PointId, p: Vec3) -> u32 {
        self.ids.push(id);
        self.pts.push(p);
        (self.ids.len() - 1) as u32
    }
}

#[derive(Clone, Debug)]
pub(crate) enum NodeKind {
    Leaf(LeafData),
    Internal { center: Vec3, children: [Option<NodeHandle>; 8] },
    Free,
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub bounds: Aabb,
    pub parent: Option<NodeHandle>,
    pub depth: u32,
    /// Number of points in this subtree.
    pub count: usize,
    pub kind: NodeKind,
}

impl Node {
    pub fn leaf(bounds: Aabb, parent: Option<NodeHandle>, depth: u32) -> Self {
        Node { bounds, parent, depth, count: 0, kind: NodeKind::Leaf(LeafData::default()) }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }

    pub fn children(&self) -> impl Iterator<Item = NodeHandle> + '_ {
        let slots: &[Option<NodeHandle>] = match &self.kind {
            NodeKind::Internal { children, .. } => children,
            _ => &[],
        };
        slots.iter().flatten().copied()
    }
}

/// Where a live point is stored.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Slot {
    pub leaf: NodeHandle,
    pub index: u32,
    pub pos: Vec3,
}
