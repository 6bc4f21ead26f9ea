//! Structure-preservation metrics between an input cloud `X` and its image
//! `Z`, and smoothness of per-point trajectories.
//!
//! Points are identified by their index; neighborhoods exclude the point
//! itself and are the `k` nearest by `(distance, index)`.

use std::collections::HashSet;

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::geom::{check_finite, dist, Vec3};
use crate::octree::Octree;
use crate::PointId;

pub const DEFAULT_K: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct PairedPointSets {
    x: Vec<Vec3>,
    z: Vec<Vec3>,
    k: usize,
}

impl PairedPointSets {
    pub fn new(x: Vec<Vec3>, z: Vec<Vec3>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if x.len() != z.len() {
            return Err(Error::input(format!("X has {} points but Z has {}", x.len(), z.len())));
        }
        if x.len() < k + 1 {
            return Err(Error::input(format!("need at least k+1 = {} points, got {}", k + 1, x.len())));
        }
        for p in x.iter().chain(&z) {
            check_finite(p)?;
        }
        Ok(PairedPointSets { x, z, k })
    }

    pub fn x(&self) -> &[Vec3] {
        &self.x
    }

    pub fn z(&self) -> &[Vec3] {
        &self.z
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Per-point trajectories, all sampled at the same `T >= 3` times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<Vec<Vec3>>,
}

impl Trajectory {
    pub fn new(samples: Vec<Vec<Vec3>>) -> Result<Self> {
        let t = samples.first().map_or(0, Vec::len);
        if t < 3 {
            return Err(Error::input(format!("trajectories need at least 3 samples, got {t}")));
        }
        if let Some(i) = samples.iter().position(|s| s.len() != t) {
            return Err(Error::input(format!("trajectory {i} has {} samples, expected {t}", samples[i].len())));
        }
        for p in samples.iter().flatten() {
            check_finite(p)?;
        }
        Ok(Trajectory { samples })
    }

    pub fn samples(&self) -> &[Vec<Vec3>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricValues {
    pub values: Vec<f64>,
    pub mean: f64,
}

impl MetricValues {
    fn from_values(values: Vec<f64>) -> Self {
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 };
        MetricValues { values, mean }
    }
}

fn index_tree(points: &[Vec3]) -> Result<Octree> {
    let entries: Vec<(PointId, Vec3)> = points.iter().enumerate().map(|(i, &p)| (PointId(i as u64), p)).collect();
    Octree::from_points(OctreeConfig::default(), &entries)
}

fn neighborhood(tree: &Octree, points: &[Vec3], i: usize, k: usize) -> Vec<usize> {
    tree.k_nearest(points[i], k + 1).into_iter().map(|n| n.id.0 as usize).filter(|&j| j != i).take(k).collect()
}

/// Mean latent distance over mean input distance across each point's
/// input-space neighborhood.
pub fn neighborhood_distortion(pairs: &PairedPointSets) -> Result<MetricValues> {
    let tree = index_tree(&pairs.x)?;
    let mut values = Vec::with_capacity(pairs.len());
    for i in 0..pairs.len() {
        let nbrs = neighborhood(&tree, &pairs.x, i, pairs.k);
        let dx: f64 = nbrs.iter().map(|&j| dist(&pairs.x[i], &pairs.x[j])).sum();
        let dz: f64 = nbrs.iter().map(|&j| dist(&pairs.z[i], &pairs.z[j])).sum();
        if dx == 0.0 {
            return Err(Error::Degenerate {
                index: i,
                reason: format!("all {} input-space neighbors coincide with the point", pairs.k),
            });
        }
        values.push(dz / dx);
    }
    Ok(MetricValues::from_values(values))
}

/// Overlap over union of each point's k-neighborhoods in `X` and in `Z`.
pub fn neighborhood_jaccard(pairs: &PairedPointSets) -> Result<MetricValues> {
    let tx = index_tree(&pairs.x)?;
    let tz = index_tree(&pairs.z)?;
    let values = (0..pairs.len())
        .map(|i| {
            let nx: HashSet<usize> = neighborhood(&tx, &pairs.x, i, pairs.k).into_iter().collect();
            let nz: HashSet<usize> = neighborhood(&tz, &pairs.z, i, pairs.k).into_iter().collect();
            let inter = nx.intersection(&nz).count();
            inter as f64 / (nx.len() + nz.len() - inter) as f64
        })
        .collect();
    Ok(MetricValues::from_values(values))
}

/// Mean second-difference magnitude along each trajectory.
pub fn trajectory_curvature(traj: &Trajectory) -> MetricValues {
    let values = traj
        .samples
        .iter()
        .map(|s| {
            let total: f64 = s
                .windows(3)
                .map(|w| {
                    let d = [0, 1, 2].map(|a| w[2][a] - 2.0 * w[1][a] + w[0][a]);
                    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
                })
                .sum();
            total / (s.len() - 2) as f64
        })
        .collect();
    MetricValues::from_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|i| {
                let t = i as f64;
                [(t * 0.37).sin() * 3.0, (t * 0.71).cos() * 2.0, (t * 0.13).sin() + t * 0.01]
            })
            .collect()
    }

    #[test]
    fn identity_and_scaling() {
        let x = cloud(40);
        let same = PairedPointSets::new(x.clone(), x.clone(), 5).unwrap();
        let d = neighborhood_distortion(&same).unwrap();
        assert!(d.values.iter().all(|&v| v == 1.0));
        assert_eq!(neighborhood_jaccard(&same).unwrap().mean, 1.0);

        let doubled: Vec<Vec3> = x.iter().map(|p| p.map(|c| 2.0 * c)).collect();
        let scaled = PairedPointSets::new(x, doubled, 5).unwrap();
        for v in neighborhood_distortion(&scaled).unwrap().values {
            assert!((v - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reflection_keeps_neighborhoods() {
        let x = cloud(30);
        let z: Vec<Vec3> = x.iter().map(|p| p.map(|c| -c)).collect();
        let pairs = PairedPointSets::new(x, z, 4).unwrap();
        assert!(neighborhood_jaccard(&pairs).unwrap().values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn coincident_neighbors_are_degenerate() {
        let mut x = vec![[0.0; 3]; 3];
        x.push([1.0, 0.0, 0.0]);
        let pairs = PairedPointSets::new(x.clone(), x, 2).unwrap();
        assert!(matches!(neighborhood_distortion(&pairs), Err(Error::Degenerate { index: 0, .. })));
    }

    #[test]
    fn shape_errors() {
        assert!(PairedPointSets::new(cloud(3), cloud(3), 3).is_err());
        assert!(PairedPointSets::new(cloud(5), cloud(4), 2).is_err());
        assert!(PairedPointSets::new(cloud(5), cloud(5), 0).is_err());
        assert!(Trajectory::new(vec![vec![[0.0; 3]; 2]]).is_err());
        assert!(Trajectory::new(vec![vec![[0.0; 3]; 3], vec![[0.0; 3]; 4]]).is_err());
    }

    #[test]
    fn curvature_values() {
        let kink = Trajectory::new(vec![vec![[0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]]]).unwrap();
        assert_eq!(trajectory_curvature(&kink).values, vec![1.0]);

        let line: Vec<Vec3> = (0..6).map(|t| [t as f64 * 0.5, 1.0 - t as f64, 2.0]).collect();
        let straight = Trajectory::new(vec![line]).unwrap();
        assert_eq!(trajectory_curvature(&straight).values, vec![0.0]);
    }
}
