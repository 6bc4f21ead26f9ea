//! Brute-force reference implementations.
//!
//! These share the octree's conventions exactly (inclusive cutoffs, squared
//! distances compared in the same arithmetic, `(distance, id)` ordering) so
//! results can be compared for equality rather than approximately.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::{check_finite, dist2, Vec3};
use crate::query::{Neighbor, NeighborList};
use crate::PointId;

/// A flat id → position map with the same mutation contract as [`crate::Octree`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlatPointSet {
    points: BTreeMap<PointId, Vec3>,
}

impl FlatPointSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (PointId, Vec3)>) -> Result<Self> {
        let mut set = FlatPointSet::new();
        for (id, p) in entries {
            set.insert(id, p)?;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: PointId) -> Option<Vec3> {
        self.points.get(&id).copied()
    }

    pub fn insert(&mut self, id: PointId, p: Vec3) -> Result<()> {
        check_finite(&p)?;
        if self.points.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.points.insert(id, p);
        Ok(())
    }

    pub fn remove(&mut self, id: PointId) -> Result<Vec3> {
        self.points.remove(&id).ok_or(Error::NotFound(id))
    }

    pub fn update_position(&mut self, id: PointId, p: Vec3) -> Result<()> {
        check_finite(&p)?;
        let slot = self.points.get_mut(&id).ok_or(Error::NotFound(id))?;
        *slot = p;
        Ok(())
    }

    /// Entries in ascending id order.
    pub fn entries(&self) -> Vec<(PointId, Vec3)> {
        self.points.iter().map(|(&id, &p)| (id, p)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, Vec3)> + '_ {
        self.points.iter().map(|(&id, &p)| (id, p))
    }
}

fn ordered(mut hits: Vec<(f64, PointId)>) -> Vec<Neighbor> {
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    hits.into_iter().map(|(d2, id)| Neighbor { id, distance: d2.sqrt() }).collect()
}

pub fn brute_range(set: &FlatPointSet, center: Vec3, radius: f64) -> Vec<Neighbor> {
    let r2 = radius * radius;
    let hits = set
        .iter()
        .filter_map(|(id, p)| {
            let d2 = dist2(&p, &center);
            (d2 <= r2).then_some((d2, id))
        })
        .collect();
    ordered(hits)
}

pub fn brute_knn(set: &FlatPointSet, query: Vec3, k: usize) -> Vec<Neighbor> {
    let all = set.iter().map(|(id, p)| (dist2(&p, &query), id)).collect();
    let mut out = ordered(all);
    out.truncate(k);
    out
}

/// Full O(n²) pair scan at inclusive cutoff `d`.
pub fn brute_pairs(set: &FlatPointSet, d: f64) -> NeighborList {
    let r2 = d * d;
    let entries = set.entries();
    let mut lists: Vec<Vec<(f64, PointId)>> = vec![Vec::new(); entries.len()];
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let d2 = dist2(&entries[i].1, &entries[j].1);
            if d2 <= r2 {
                lists[i].push((d2, entries[j].0));
                lists[j].push((d2, entries[i].0));
            }
        }
    }
    NeighborList::from_sorted_lists(d, entries.iter().map(|e| e.0).zip(lists.into_iter().map(ordered)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_set() {
        let s = FlatPointSet::new();
        assert!(brute_range(&s, [0.0; 3], 1.0).is_empty());
        assert!(brute_knn(&s, [0.0; 3], 3).is_empty());
        assert_eq!(brute_pairs(&s, 1.0).len(), 0);
    }

    #[test]
    fn boundary_is_inclusive() {
        let s = FlatPointSet::from_entries([(PointId(0), [0.0; 3]), (PointId(1), [0.5, 0.0, 0.0])]).unwrap();
        assert_eq!(brute_range(&s, [0.0; 3], 0.5).len(), 2);
        let nl = brute_pairs(&s, 0.5);
        assert_eq!(nl.get(PointId(0)).unwrap()[0].id, PointId(1));
        assert_eq!(brute_knn(&s, [0.3, 0.0, 0.0], 1)[0].id, PointId(1));
    }

    #[test]
    fn duplicate_and_missing_ids() {
        let mut s = FlatPointSet::new();
        s.insert(PointId(1), [0.0; 3]).unwrap();
        assert_eq!(s.insert(PointId(1), [1.0; 3]), Err(Error::DuplicateId(PointId(1))));
        assert_eq!(s.remove(PointId(2)), Err(Error::NotFound(PointId(2))));
    }
}
