//! Shared fixtures for the criterion benchmarks.

use dynoct::workload::uniform_cloud;
use dynoct::{Octree, OctreeConfig, PointId, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A tree over `n` uniform points in the unit cube.
pub fn uniform_tree(n: usize, config: OctreeConfig, seed: u64) -> Octree {
    Octree::from_points(config, &uniform_cloud(n, seed)).expect("uniform cloud is valid")
}

/// `count` moves of random existing ids (`0..n`) to fresh uniform positions.
pub fn random_moves(n: usize, count: usize, seed: u64) -> Vec<(PointId, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (PointId(rng.random_range(0..n as u64)), rng.random())).collect()
}

/// `count` uniform query points in the unit cube.
pub fn random_queries(count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}

/// Cutoff giving a mean neighbor count of about `degree` for `n` uniform
/// points in the unit cube (boundary effects ignored).
pub fn cutoff_for_degree(n: usize, degree: f64) -> f64 {
    (3.0 * degree / (4.0 * std::f64::consts::PI * n as f64)).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_roughly_hits_the_degree() {
        let n = 20_000;
        let tree = uniform_tree(n, OctreeConfig::default(), 1);
        let deg = tree.build_neighbor_lists(cutoff_for_degree(n, 20.0)).unwrap().mean_degree();
        assert!((15.0..=21.0).contains(&deg), "{deg}");
    }
}
