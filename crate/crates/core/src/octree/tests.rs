use super::*;
use crate::PointId;

fn cfg(k: usize, alpha: f64) -> OctreeConfig {
    OctreeConfig::new(k, alpha).unwrap()
}

fn unit_tree(k: usize, alpha: f64) -> Octree {
    Octree::new(cfg(k, alpha), Aabb::unit()).unwrap()
}

fn pid(i: u64) -> PointId {
    PointId(i)
}

#[test]
fn create_empty() {
    let t = unit_tree(10, 2.0);
    assert_eq!(t.len(), 0);
    assert_eq!(t.depth(), 0);
    assert!(t.is_leaf(t.root_handle()));
    assert!(t.validate_admissibility().is_admissible());
}

#[test]
fn create_rejects_bad_config_and_bounds() {
    let bad = OctreeConfig { k: 0, ..Default::default() };
    assert!(matches!(Octree::new(bad, Aabb::unit()), Err(Error::Config(_))));
    let flat = Aabb::new([0.0; 3], [1.0, 1.0, 0.0]).unwrap();
    assert!(matches!(Octree::new(cfg(4, 2.0), flat), Err(Error::InvalidInput(_))));
}

#[test]
fn insert_single_point() {
    let mut t = unit_tree(10, 2.0);
    t.insert(pid(7), [0.2, 0.3, 0.4]).unwrap();
    assert_eq!(t.len(), 1);
    assert!(t.is_leaf(t.root_handle()));
    assert_eq!(t.leaf_of(pid(7)), Some(t.root_handle()));
    assert_eq!(t.position(pid(7)), Some([0.2, 0.3, 0.4]));
}

#[test]
fn insert_errors() {
    let mut t = unit_tree(10, 2.0);
    t.insert(pid(1), [0.5; 3]).unwrap();
    assert_eq!(t.insert(pid(1), [0.1; 3]), Err(Error::DuplicateId(pid(1))));
    assert!(matches!(t.insert(pid(2), [f64::NAN, 0.0, 0.0]), Err(Error::InvalidInput(_))));
    assert!(matches!(t.insert(pid(2), [f64::INFINITY, 0.0, 0.0]), Err(Error::InvalidInput(_))));
    assert_eq!(t.len(), 1);
}

#[test]
fn five_points_split_small_capacity() {
    // K=2, alpha=2: leaf capacity 4, internal floor 1. One point per octant
    // for five octants forces a single split into five singleton leaves.
    let mut t = unit_tree(2, 2.0);
    let pts = [[0.1, 0.1, 0.1], [0.9, 0.1, 0.1], [0.1, 0.9, 0.1], [0.1, 0.1, 0.9], [0.9, 0.9, 0.9]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    assert!(!t.is_leaf(t.root_handle()));
    assert_eq!(t.depth(), 1);
    assert_eq!(t.leaf_count(), 5);
    let report = t.validate_admissibility();
    assert!(report.is_admissible(), "{:?}", report.violations);
    assert!(t.leaf_partition().iter().all(|g| g.len() <= 4));
}

#[test]
fn insert_outside_grows_root() {
    let mut t = unit_tree(2, 2.0);
    for i in 0..20 {
        let f = i as f64 / 20.0;
        t.insert(pid(i), [f, (f * 7.0) % 1.0, (f * 3.0) % 1.0]).unwrap();
    }
    t.insert(pid(100), [-3.0, 0.5, 4.0]).unwrap();
    assert!(t.bounds().contains(&[-3.0, 0.5, 4.0]));
    assert_eq!(t.len(), 21);
    assert!(t.validate_admissibility().is_admissible());
}

#[test]
fn insert_then_remove_is_empty() {
    let mut t = unit_tree(4, 2.0);
    t.insert(pid(3), [0.4, 0.4, 0.4]).unwrap();
    assert_eq!(t.remove(pid(3)).unwrap(), [0.4, 0.4, 0.4]);
    assert!(t.is_empty());
    assert!(t.points().is_empty());
    assert_eq!(t.node_count(), 1);
    assert!(t.validate_admissibility().is_admissible());
}

#[test]
fn remove_unknown() {
    let mut t = unit_tree(4, 2.0);
    assert_eq!(t.remove(pid(9)), Err(Error::NotFound(pid(9))));
    assert_eq!(t.update_position(pid(9), [0.0; 3]), Err(Error::NotFound(pid(9))));
}

#[test]
fn remove_collapses_at_floor() {
    // K=4, alpha=1: capacity 4 and floor 4. Five points make an internal
    // root; dropping to four collapses it back into one leaf.
    let mut t = unit_tree(4, 1.0);
    let pts = [[0.1, 0.1, 0.1], [0.9, 0.1, 0.1], [0.1, 0.9, 0.1], [0.1, 0.1, 0.9], [0.9, 0.9, 0.9]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    assert!(!t.is_leaf(t.root_handle()));
    t.remove(pid(2)).unwrap();
    assert!(t.is_leaf(t.root_handle()));
    assert_eq!(t.leaf_partition(), vec![vec![pid(0), pid(1), pid(3), pid(4)]]);
    assert_eq!(t.node_count(), 1);
    assert!(t.validate_admissibility().is_admissible());
}

#[test]
fn collapse_absorbs_single_child_chain() {
    // Every point sits in the same deep octant, so the root and its only
    // child both fall to the floor together and must both collapse.
    let mut t = unit_tree(2, 1.0);
    let pts = [[0.01, 0.01, 0.01], [0.02, 0.02, 0.02], [0.03, 0.01, 0.02]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    assert!(t.depth() >= 2);
    t.remove(pid(1)).unwrap();
    let report = t.validate_admissibility();
    assert!(report.is_admissible(), "{:?}", report.violations);
    assert!(t.is_leaf(t.root_handle()));
}

#[test]
fn move_within_leaf_keeps_structure() {
    let mut t = unit_tree(10, 2.0);
    for i in 0..5 {
        t.insert(pid(i), [0.1 * i as f64 + 0.05, 0.5, 0.5]).unwrap();
    }
    let leaf = t.leaf_of(pid(2)).unwrap();
    let nodes = t.node_count();
    t.update_position(pid(2), [0.33, 0.41, 0.52]).unwrap();
    assert_eq!(t.leaf_of(pid(2)), Some(leaf));
    assert_eq!(t.node_count(), nodes);
    assert_eq!(t.position(pid(2)), Some([0.33, 0.41, 0.52]));
}

#[test]
fn move_across_midplane_matches_remove_insert() {
    let mut pts = Vec::new();
    for i in 0..40u64 {
        let f = (i as f64 * 0.618_033_988_75) % 1.0;
        let g = (i as f64 * 0.414_213_562_37) % 1.0;
        let h = (i as f64 * 0.732_050_807_57) % 1.0;
        pts.push((pid(i), [f, g, h]));
    }
    let mut moved = Octree::from_points(cfg(2, 2.0), &pts).unwrap();
    let mut oracle = moved.clone();

    let old_leaf = moved.leaf_of(pid(5)).unwrap();
    let old_count = moved.subtree_count(old_leaf).unwrap();
    let old = moved.position(pid(5)).unwrap();
    let target = [1.0 - old[0], old[1], old[2]];
    moved.update_position(pid(5), target).unwrap();

    oracle.remove(pid(5)).unwrap();
    oracle.insert(pid(5), target).unwrap();

    assert_eq!(moved.leaf_partition(), oracle.leaf_partition());
    assert_eq!(moved.points(), oracle.points());
    assert_ne!(moved.leaf_of(pid(5)), Some(old_leaf));
    if moved.is_leaf(old_leaf) {
        assert_eq!(moved.subtree_count(old_leaf), Some(old_count - 1));
    }
    assert_eq!(moved.len(), 40);
    assert!(moved.validate_admissibility().is_admissible());
}

#[test]
fn move_outside_matches_remove_insert() {
    let pts: Vec<_> = (0..30u64).map(|i| (pid(i), [i as f64 / 30.0, 0.5, (i % 7) as f64 / 7.0])).collect();
    let mut moved = Octree::from_points(cfg(2, 2.0), &pts).unwrap();
    let mut oracle = moved.clone();
    moved.update_position(pid(4), [3.5, -2.0, 0.5]).unwrap();
    oracle.remove(pid(4)).unwrap();
    oracle.insert(pid(4), [3.5, -2.0, 0.5]).unwrap();
    assert_eq!(moved.points(), oracle.points());
    assert!(moved.bounds().contains(&[3.5, -2.0, 0.5]));
    assert!(moved.validate_admissibility().is_admissible());
}

#[test]
fn expand_noop_when_inside() {
    let mut t = unit_tree(4, 2.0);
    t.insert(pid(0), [0.5; 3]).unwrap();
    let before = t.bounds();
    t.expand_bounds([0.9, 0.1, 1.0]).unwrap();
    assert_eq!(t.bounds(), before);
    assert_eq!(t.node_count(), 1);
}

#[test]
fn expand_doubles_towards_target() {
    let mut t = unit_tree(4, 2.0);
    t.expand_bounds([1.5, 0.5, 0.5]).unwrap();
    let b = t.bounds();
    assert_eq!((b.min[0], b.max[0]), (0.0, 2.0));

    let mut t = unit_tree(4, 2.0);
    t.expand_bounds([-0.5, 0.5, 0.5]).unwrap();
    assert_eq!((t.bounds().min[0], t.bounds().max[0]), (-1.0, 1.0));
}

#[test]
fn expand_wraps_internal_root() {
    let mut t = unit_tree(1, 1.0);
    let pts = [[0.1, 0.1, 0.1], [0.9, 0.9, 0.9], [0.6, 0.2, 0.3], [0.3, 0.7, 0.8]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    let before = t.leaf_partition();
    let depth = t.depth();
    t.expand_bounds([2.5, 0.5, 0.5]).unwrap();
    assert_eq!(t.bounds().max[0], 4.0);
    assert_eq!(t.leaf_partition(), before);
    assert_eq!(t.depth(), depth + 2);
    assert!(t.validate_admissibility().is_admissible());
}

#[test]
fn expand_relocates_points_on_old_top_face() {
    let mut t = unit_tree(1, 1.0);
    let pts = [[1.0, 0.2, 0.2], [0.1, 0.1, 0.1], [0.9, 0.9, 0.9], [1.0, 1.0, 1.0], [0.4, 0.6, 0.2]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    assert!(t.validate_admissibility().is_admissible());
    t.expand_bounds([1.7, 0.3, 0.3]).unwrap();
    let report = t.validate_admissibility();
    assert!(report.is_admissible(), "{:?}", report.violations);
    assert_eq!(t.len(), 5);
}

#[test]
fn expand_with_other_factor_rebuilds() {
    let config = cfg(2, 2.0).with_expansion_factor(3.0);
    let mut t = Octree::new(config, Aabb::unit()).unwrap();
    for i in 0..25u64 {
        t.insert(pid(i), [(i % 5) as f64 / 5.0, (i / 5) as f64 / 5.0, 0.5]).unwrap();
    }
    let before = t.points();
    t.insert(pid(99), [5.0, 0.5, 0.5]).unwrap();
    assert_eq!(t.bounds().max[0], 9.0);
    assert!(t.validate_admissibility().is_admissible());
    t.remove(pid(99)).unwrap();
    assert_eq!(t.points(), before);
}

#[test]
fn hand_built_floor_node_is_one_violation() {
    // K=4, alpha=1: floor 4. Two points share octant 0, so removing one of
    // them behind the tree's back leaves no empty leaf, only a root whose
    // count equals the floor.
    let mut t = unit_tree(4, 1.0);
    let pts = [[0.1, 0.1, 0.1], [0.2, 0.2, 0.2], [0.9, 0.1, 0.1], [0.1, 0.9, 0.1], [0.9, 0.9, 0.9]];
    for (i, p) in pts.iter().enumerate() {
        t.insert(pid(i as u64), *p).unwrap();
    }
    assert!(!t.is_leaf(t.root_handle()));
    let slot = t.registry.remove(&pid(1)).unwrap();
    t.take_from_leaf(slot.leaf, slot.index);
    let mut cur = Some(slot.leaf);
    while let Some(h) = cur {
        t.nodes[h.idx()].count -= 1;
        cur = t.nodes[h.idx()].parent;
    }
    let report = t.validate_admissibility();
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert!(matches!(report.violations[0], Violation::InternalUnderFloor { count: 4, floor: 4, .. }));
}

#[test]
fn coincident_points_stop_at_max_depth() {
    let config = cfg(2, 2.0).with_max_depth(6);
    let mut t = Octree::new(config, Aabb::unit()).unwrap();
    for i in 0..50 {
        t.insert(pid(i), [0.3, 0.3, 0.3]).unwrap();
    }
    let report = t.validate_admissibility();
    assert!(report.is_admissible(), "{:?}", report.violations);
    assert_eq!(report.depth_capped.len(), 1);
    assert_eq!(t.depth(), 6);
    for i in 0..50 {
        t.remove(pid(i)).unwrap();
    }
    assert!(t.is_empty());
    assert_eq!(t.node_count(), 1);
}

#[test]
fn random_ops_stay_admissible() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut t = unit_tree(100, 2.0);
    let mut live: Vec<PointId> = Vec::new();
    let mut next = 0u64;
    for _ in 0..10_000 {
        let r: f64 = rng.random();
        if r < 0.45 || live.len() < 10 {
            let p = [rng.random(), rng.random(), rng.random()];
            t.insert(pid(next), p).unwrap();
            live.push(pid(next));
            next += 1;
        } else if r < 0.8 {
            let id = live[rng.random_range(0..live.len())];
            let p = t.position(id).unwrap();
            let q = [p[0] + rng.random_range(-0.1..0.1), p[1] + rng.random_range(-0.1..0.1), p[2]];
            t.update_position(id, q).unwrap();
        } else {
            let id = live.swap_remove(rng.random_range(0..live.len()));
            t.remove(id).unwrap();
        }
    }
    let report = t.validate_admissibility();
    assert!(report.is_admissible(), "{:?}", report.violations);
    assert!(report.depth_capped.is_empty());
    assert_eq!(t.len(), live.len());
}

#[test]
fn size_changes_by_one() {
    let mut t = unit_tree(3, 1.5);
    for i in 0..30u64 {
        let before = t.len();
        t.insert(pid(i), [(i as f64 * 0.37) % 1.0, (i as f64 * 0.11) % 1.0, 0.2]).unwrap();
        assert_eq!(t.len(), before + 1);
    }
    t.update_position(pid(3), [0.99, 0.99, 0.99]).unwrap();
    assert_eq!(t.len(), 30);
    t.remove(pid(0)).unwrap();
    assert_eq!(t.len(), 29);
}
