//! Seeded point clouds and mutation sequences for stress and equivalence
//! testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::geom::Vec3;
use crate::octree::Octree;
use crate::oracle::FlatPointSet;
use crate::PointId;

/// `n` points uniform in the unit cube, ids `0..n`.
pub fn uniform_cloud(n: usize, seed: u64) -> Vec<(PointId, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| (PointId(i as u64), [rng.random(), rng.random(), rng.random()])).collect()
}

/// `n` points in five tight Gaussian clusters (sigma 0.02) inside the unit
/// cube.
pub fn clustered_cloud(n: usize, seed: u64) -> Vec<(PointId, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec3> = (0..5).map(|_| [0.0; 3].map(|_: f64| rng.random_range(0.1..0.9))).collect();
    (0..n)
        .map(|i| {
            let c = centers[i % centers.len()];
            let p = c.map(|x| x + 0.02 * rng.sample::<f64, _>(StandardNormal));
            (PointId(i as u64), p)
        })
        .collect()
}

/// `n` points snapped to a dyadic grid on `[0, 1]^3`, so many lie exactly on
/// split planes and on the closed upper faces, with repeated positions and
/// many tied distances.
pub fn boundary_cloud(n: usize, seed: u64) -> Vec<(PointId, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let p = [0.0; 3].map(|_: f64| rng.random_range(0..=16u32) as f64 / 16.0);
            (PointId(i as u64), p)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Insert(PointId, Vec3),
    Move(PointId, Vec3),
    Remove(PointId),
}

impl Op {
    pub fn apply_to_tree(&self, tree: &mut Octree) -> Result<()> {
        match *self {
            Op::Insert(id, p) => tree.insert(id, p),
            Op::Move(id, p) => tree.update_position(id, p),
            Op::Remove(id) => tree.remove(id).map(drop),
        }
    }

    pub fn apply_to_flat(&self, set: &mut FlatPointSet) -> Result<()> {
        match *self {
            Op::Insert(id, p) => set.insert(id, p),
            Op::Move(id, p) => set.update_position(id, p),
            Op::Remove(id) => set.remove(id).map(drop),
        }
    }
}

/// Endless stream of mixed mutations (45% insert, 35% move, 20% remove)
/// over a domain that slowly drifts and widens, so moves and inserts keep
/// landing outside the current root.
pub struct MixedOps {
    rng: ChaCha8Rng,
    live: Vec<PointId>,
    next_id: u64,
    step: u64,
}

impl MixedOps {
    pub fn new(seed: u64) -> Self {
        MixedOps { rng: ChaCha8Rng::seed_from_u64(seed), live: Vec::new(), next_id: 0, step: 0 }
    }

    fn position(&mut self) -> Vec3 {
        let t = self.step as f64;
        let offset = [t * 1e-4, -t * 5e-5, t * 2e-5];
        let width = 1.0 + t * 1e-5;
        [0, 1, 2].map(|a| offset[a] + width * self.rng.random::<f64>())
    }
}

impl Iterator for MixedOps {
    type Item = Op;

    fn next(&mut self) -> Option<Op> {
        self.step += 1;
        let roll: f64 = self.rng.random();
        let op = if self.live.is_empty() || roll < 0.45 {
            let id = PointId(self.next_id);
            self.next_id += 1;
            self.live.push(id);
            Op::Insert(id, self.position())
        } else if roll < 0.80 {
            let id = self.live[self.rng.random_range(0..self.live.len())];
            Op::Move(id, self.position())
        } else {
            let id = self.live.swap_remove(self.rng.random_range(0..self.live.len()));
            Op::Remove(id)
        };
        Some(op)
    }
}
