//! Seeded clustered vectors with low intrinsic dimension.
//!
//! Each cluster is a centre plus a handful of latent directions with
//! geometrically decaying scales, plus small isotropic noise. Real embedding
//! clusters concentrate most variance in few directions too; a 3D
//! projection of pure isotropic noise would carry no neighborhood signal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::EmbeddingStore;
use crate::error::Result;
use crate::PointId;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusteredVectors {
    pub dim: usize,
    pub num_clusters: usize,
    pub latent_dims: usize,
    pub noise: f64,
    pub seed: u64,
}

impl ClusteredVectors {
    pub fn new(dim: usize, num_clusters: usize, seed: u64) -> Self {
        ClusteredVectors { dim, num_clusters: num_clusters.max(1), latent_dims: 6, noise: 0.02, seed }
    }

    fn model(&self, rng: &mut ChaCha8Rng) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
        (0..self.num_clusters)
            .map(|_| {
                let center = gaussian(rng, self.dim, 1.0);
                let dirs = (0..self.latent_dims)
                    .map(|l| {
                        let mut d = gaussian(rng, self.dim, 1.0);
                        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let scale = 1.5 * 0.6f64.powi(l as i32) / norm;
                        d.iter_mut().for_each(|x| *x *= scale);
                        d
                    })
                    .collect();
                (center, dirs)
            })
            .collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, model: &[(Vec<f64>, Vec<Vec<f64>>)]) -> Vec<f64> {
        let (center, dirs) = &model[rng.random_range(0..model.len())];
        let mut v = center.clone();
        for d in dirs {
            let c: f64 = rng.sample(StandardNormal);
            v.iter_mut().zip(d).for_each(|(x, di)| *x += c * di);
        }
        for x in v.iter_mut() {
            *x += self.noise * rng.sample::<f64, _>(StandardNormal);
        }
        v
    }

    /// `n` stored vectors with ids `0..n` followed by `queries` fresh
    /// vectors drawn from the same clusters.
    pub fn generate(&self, n: usize, queries: usize) -> Result<(EmbeddingStore, Vec<Vec<f64>>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let model = self.model(&mut rng);
        let mut store = EmbeddingStore::new(self.dim)?;
        for i in 0..n {
            let v = self.sample(&mut rng, &model);
            store.insert(PointId(i as u64), &v)?;
        }
        let qs = (0..queries).map(|_| self.sample(&mut rng, &model)).collect();
        Ok((store, qs))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, sigma: f64) -> Vec<f64> {
    (0..dim).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect()
}
