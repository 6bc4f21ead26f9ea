use std::collections::HashSet;
use std::fmt;

use super::{NodeHandle, NodeKind, Octree};
use crate::PointId;

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    LeafOverCapacity { node: NodeHandle, count: usize, capacity: usize },
    InternalUnderFloor { node: NodeHandle, count: usize, floor: usize },
    CountMismatch { node: NodeHandle, stored: usize, actual: usize },
    PointOutsideCell { id: PointId, node: NodeHandle },
    RegistryMismatch { id: PointId, reason: String },
    EmptyChild { node: NodeHandle },
    BrokenLink { node: NodeHandle },
    SizeMismatch { registry: usize, root_count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LeafOverCapacity { node, count, capacity } => {
                write!(f, "leaf {} holds {count} points > capacity {capacity}", node.index())
            }
            Violation::InternalUnderFloor { node, count, floor } => {
                write!(f, "internal node {} holds {count} points <= floor {floor}", node.index())
            }
            Violation::CountMismatch { node, stored, actual } => {
                write!(f, "node {} stores count {stored} but holds {actual}", node.index())
            }
            Violation::PointOutsideCell { id, node } => write!(f, "point {id} lies outside leaf {}", node.index()),
            Violation::RegistryMismatch { id, reason } => write!(f, "registry entry for {id}: {reason}"),
            Violation::EmptyChild { node } => write!(f, "empty child node {}", node.index()),
            Violation::BrokenLink { node } => write!(f, "parent link of node {} is inconsistent", node.index()),
            Violation::SizeMismatch { registry, root_count } => {
                write!(f, "registry holds {registry} ids but root counts {root_count}")
            }
        }
    }
}

/// Outcome of a full structural audit.
#[derive(Clone, Debug, Default)]
pub struct AdmissibilityReport {
    pub violations: Vec<Violation>,
    /// Leaves at `max_depth` holding more than the leaf capacity; exempt from
    /// the capacity rule.
    pub depth_capped: Vec<NodeHandle>,
    pub leaves: usize,
    pub internal_nodes: usize,
    pub max_depth: u32,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub(super) fn validate(tree: &Octree) -> AdmissibilityReport {
    let cap = tree.config.leaf_capacity();
    let floor = tree.config.internal_floor();
    let max_depth = tree.config.max_depth;
    let mut report = AdmissibilityReport::default();
    let mut seen: HashSet<PointId> = HashSet::with_capacity(tree.len());

    // Post-order walk computing actual subtree sizes.
    let mut stack = vec![(tree.root, false)];
    let mut actual = vec![0usize; tree.nodes.len()];
    while let Some((h, visited)) = stack.pop() {
        let node = tree.node(h);
        match &node.kind {
            NodeKind::Free => report.violations.push(Violation::BrokenLink { node: h }),
            NodeKind::Leaf(leaf) => {
                report.leaves += 1;
                report.max_depth = report.max_depth.max(node.depth);
                let n = leaf.len();
                actual[h.idx()] = n;
                if n > cap {
                    if node.depth >= max_depth {
                        report.depth_capped.push(h);
                    } else {
                        report.violations.push(Violation::LeafOverCapacity { node: h, count: n, capacity: cap });
                    }
                }
                if n == 0 && h != tree.root {
                    report.violations.push(Violation::EmptyChild { node: h });
                }
                for (i, (id, p)) in leaf.ids.iter().zip(&leaf.pts).enumerate() {
                    if !seen.insert(*id) {
                        report.violations.push(Violation::RegistryMismatch {
                            id: *id,
                            reason: "stored in more than one slot".into(),
                        });
                    }
                    if !tree.in_cell(h, p) {
                        report.violations.push(Violation::PointOutsideCell { id: *id, node: h });
                    }
                    match tree.registry.get(id) {
                        None => {
                            report.violations.push(Violation::RegistryMismatch { id: *id, reason: "missing".into() })
                        }
                        Some(s) if s.leaf != h || s.index as usize != i || s.pos != *p => {
                            report.violations.push(Violation::RegistryMismatch {
                                id: *id,
                                reason: format!("points at leaf {} slot {}", s.leaf.index(), s.index),
                            })
                        }
                        Some(_) => {}
                    }
                }
                check_count(&mut report, h, node.count, n);
            }
            NodeKind::Internal { .. } if !visited => {
                stack.push((h, true));
                for c in node.children() {
                    let child = tree.node(c);
                    if child.parent != Some(h) || child.depth != node.depth + 1 {
                        report.violations.push(Violation::BrokenLink { node: c });
                    }
                    stack.push((c, false));
                }
            }
            NodeKind::Internal { .. } => {
                report.internal_nodes += 1;
                let sum: usize = node.children().map(|c| actual[c.idx()]).sum();
                actual[h.idx()] = sum;
                if node.count <= floor {
                    report.violations.push(Violation::InternalUnderFloor { node: h, count: node.count, floor });
                }
                check_count(&mut report, h, node.count, sum);
            }
        }
    }
    let root_count = tree.node(tree.root).count;
    if tree.registry.len() != root_count || seen.len() != tree.registry.len() {
        report.violations.push(Violation::SizeMismatch { registry: tree.registry.len(), root_count });
    }
    report
}

fn check_count(report: &mut AdmissibilityReport, node: NodeHandle, stored: usize, actual: usize) {
    if stored != actual {
        report.violations.push(Violation::CountMismatch { node, stored, actual });
    }
}
