//! Incrementally trained k-nearest-neighbor classifier backed by the octree.
//!
//! Training data is only ever appended; each batch is inserted point by point
//! into the existing tree, so the cost of an update does not depend on how
//! much data was added before it.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::octree::Octree;
use crate::oracle::{brute_knn, FlatPointSet};
use crate::query::Neighbor;
use crate::PointId;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub id: PointId,
    pub pos: Vec3,
    pub label: u32,
}

#[derive(Clone, Debug)]
pub struct Classifier {
    tree: Octree,
    labels: HashMap<PointId, u32>,
    k: usize,
    num_classes: u32,
}

impl Classifier {
    pub fn new(k: usize, config: OctreeConfig, bounds: Aabb) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        Ok(Classifier { tree: Octree::new(config, bounds)?, labels: HashMap::new(), k, num_classes: 0 })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> u32 {
        self.num_classes
    }

    pub fn tree(&self) -> &Octree {
        &self.tree
    }

    pub fn label(&self, id: PointId) -> Option<u32> {
        self.labels.get(&id).copied()
    }

    /// Inserts every point of `batch`. The batch is checked for duplicate
    /// ids up front, so a rejected batch leaves the classifier unchanged.
    pub fn add_batch(&mut self, batch: &[LabeledPoint]) -> Result<()> {
        let mut fresh = std::collections::HashSet::with_capacity(batch.len());
        for p in batch {
            if self.labels.contains_key(&p.id) || !fresh.insert(p.id) {
                return Err(Error::DuplicateId(p.id));
            }
            crate::geom::check_finite(&p.pos)?;
        }
        for p in batch {
            self.tree.insert(p.id, p.pos)?;
            self.labels.insert(p.id, p.label);
            self.num_classes = self.num_classes.max(p.label + 1);
        }
        Ok(())
    }

    pub fn neighbors(&self, query: Vec3) -> Vec<Neighbor> {
        self.tree.k_nearest(query, self.k)
    }

    pub fn classify(&self, query: Vec3) -> Result<u32> {
        if self.is_empty() {
            return Err(Error::EmptyState("classifier has no training points".into()));
        }
        let nearest = self.neighbors(query);
        let votes: Vec<(u32, f64)> = nearest.iter().map(|n| (self.labels[&n.id], n.distance)).collect();
        Ok(majority_vote(&votes))
    }

    /// Fraction of `test` points whose predicted label matches.
    pub fn evaluate(&self, test: &[LabeledPoint]) -> Result<f64> {
        if test.is_empty() {
            return Err(Error::input("test set is empty"));
        }
        let mut correct = 0usize;
        for p in test {
            if self.classify(p.pos)? == p.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / test.len() as f64)
    }
}

/// Winner among `(label, distance)` votes listed nearest first: most votes,
/// then smallest summed distance, then smallest label.
pub fn majority_vote(votes: &[(u32, f64)]) -> u32 {
    let mut tally: Vec<(u32, usize, f64)> = Vec::new();
    for &(label, d) in votes {
        match tally.iter_mut().find(|t| t.0 == label) {
            Some(t) => {
                t.1 += 1;
                t.2 += d;
            }
            None => tally.push((label, 1, d)),
        }
    }
    tally
        .into_iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)))
        .map(|t| t.0)
        .expect("at least one vote")
}

/// Linear-scan classifier with the same vote rule, used as a reference.
#[derive(Clone, Debug)]
pub struct BruteForceClassifier {
    set: FlatPointSet,
    labels: HashMap<PointId, u32>,
    k: usize,
}

impl BruteForceClassifier {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        Ok(BruteForceClassifier { set: FlatPointSet::new(), labels: HashMap::new(), k })
    }

    pub fn add_batch(&mut self, batch: &[LabeledPoint]) -> Result<()> {
        for p in batch {
            self.set.insert(p.id, p.pos)?;
            self.labels.insert(p.id, p.label);
        }
        Ok(())
    }

    pub fn classify(&self, query: Vec3) -> Result<u32> {
        if self.set.is_empty() {
            return Err(Error::EmptyState("classifier has no training points".into()));
        }
        let votes: Vec<(u32, f64)> =
            brute_knn(&self.set, query, self.k).iter().map(|n| (self.labels[&n.id], n.distance)).collect();
        Ok(majority_vote(&votes))
    }
}

pub const BLOB_CENTER: Vec3 = [5.0, 5.0, 5.0];

/// `n` points from three unit-variance Gaussian blobs whose centres sit
/// 120 degrees apart on a radius-2 circle around [`BLOB_CENTER`]. Ids are
/// `id_offset..id_offset + n`; labels are the blob index.
pub fn gaussian_blobs(n: usize, seed: u64, id_offset: u64) -> Vec<LabeledPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec3> = (0..3)
        .map(|c| {
            let a = std::f64::consts::TAU * c as f64 / 3.0;
            [BLOB_CENTER[0] + 2.0 * a.cos(), BLOB_CENTER[1] + 2.0 * a.sin(), BLOB_CENTER[2]]
        })
        .collect();
    (0..n)
        .map(|i| {
            let label = rng.random_range(0..3u32);
            let c = centers[label as usize];
            let pos = c.map(|x| x + rng.sample::<f64, _>(StandardNormal));
            LabeledPoint { id: PointId(id_offset + i as u64), pos, label }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(id: u64, pos: Vec3, label: u32) -> LabeledPoint {
        LabeledPoint { id: PointId(id), pos, label }
    }

    fn classifier(k: usize) -> Classifier {
        Classifier::new(k, OctreeConfig::default(), Aabb::unit()).unwrap()
    }

    #[test]
    fn vote_tie_breaks() {
        assert_eq!(majority_vote(&[(0, 0.1), (0, 0.2), (1, 0.05)]), 0);
        // 1-1 tie: smaller summed distance wins.
        assert_eq!(majority_vote(&[(2, 0.1), (1, 0.3)]), 2);
        // full tie: smaller label wins.
        assert_eq!(majority_vote(&[(5, 0.2), (3, 0.2)]), 3);
    }

    #[test]
    fn empty_batch_is_noop() {
        let mut c = classifier(3);
        c.add_batch(&[]).unwrap();
        assert!(c.is_empty());
        assert!(matches!(c.classify([0.5; 3]), Err(Error::EmptyState(_))));
    }

    #[test]
    fn duplicate_ids_rejected_atomically() {
        let mut c = classifier(3);
        c.add_batch(&[lp(1, [0.1; 3], 0)]).unwrap();
        let err = c.add_batch(&[lp(2, [0.2; 3], 1), lp(1, [0.3; 3], 1)]);
        assert_eq!(err, Err(Error::DuplicateId(PointId(1))));
        assert_eq!(c.len(), 1);
        let err = c.add_batch(&[lp(4, [0.2; 3], 1), lp(4, [0.3; 3], 1)]);
        assert_eq!(err, Err(Error::DuplicateId(PointId(4))));
        assert_eq!(c.tree().len(), 1);
    }

    #[test]
    fn k1_on_stored_point() {
        let mut c = classifier(1);
        c.add_batch(&[lp(0, [0.1; 3], 2), lp(1, [0.9; 3], 1)]).unwrap();
        assert_eq!(c.classify([0.9; 3]).unwrap(), 1);
        assert_eq!(c.classify([0.1; 3]).unwrap(), 2);
        assert_eq!(c.num_classes(), 3);
    }

    #[test]
    fn k3_strict_majority() {
        let mut c = classifier(3);
        c.add_batch(&[lp(0, [0.50, 0.5, 0.5], 1), lp(1, [0.52, 0.5, 0.5], 0), lp(2, [0.54, 0.5, 0.5], 0)]).unwrap();
        c.add_batch(&[lp(3, [0.9, 0.9, 0.9], 1)]).unwrap();
        assert_eq!(c.classify([0.5, 0.5, 0.5]).unwrap(), 0);
    }

    #[test]
    fn evaluate_on_training_points() {
        let mut c = classifier(1);
        let pts: Vec<_> = (0..50).map(|i| lp(i, [i as f64 / 50.0, 0.3, 0.6], (i % 3) as u32)).collect();
        c.add_batch(&pts).unwrap();
        assert_eq!(c.evaluate(&pts).unwrap(), 1.0);
        assert!(c.evaluate(&[]).is_err());
    }

    #[test]
    fn blobs_match_brute_force() {
        let train = gaussian_blobs(600, 1, 0);
        let test = gaussian_blobs(200, 2, 10_000);
        let mut c = Classifier::new(5, OctreeConfig::default(), Aabb::cube([0.0; 3], 10.0).unwrap()).unwrap();
        let mut b = BruteForceClassifier::new(5).unwrap();
        c.add_batch(&train).unwrap();
        b.add_batch(&train).unwrap();
        for p in &test {
            assert_eq!(c.classify(p.pos).unwrap(), b.classify(p.pos).unwrap());
        }
        assert!(c.evaluate(&test).unwrap() > 0.6);
    }
}
