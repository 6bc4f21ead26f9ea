//! Hybrid high-dimensional vector index.
//!
//! Vectors are partitioned with k-means; each cluster gets its own rank-3 PCA
//! projection and an octree over the projected points. A query probes the
//! nearest clusters, over-fetches candidates from their octrees in 3D and
//! re-ranks the union by exact distance in the original space.
//!
//! Centroids and projections are frozen after [`HybridIndex::build`]; later
//! inserts only route into the existing clusters.

mod kmeans;
mod projection;
pub mod synthetic;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use projection::Projection;

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::octree::Octree;
use crate::query::Neighbor;
use crate::PointId;

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Id-addressed D-dimensional vectors, kept in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    ids: Vec<PointId>,
    data: Vec<f64>,
    index: HashMap<PointId, usize>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("embedding dimension must be positive"));
        }
        Ok(EmbeddingStore { dim, ids: Vec::new(), data: Vec::new(), index: HashMap::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::input(format!("expected {} components, got {}", self.dim, v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("vector components must be finite"));
        }
        Ok(())
    }

    pub fn insert(&mut self, id: PointId, v: &[f64]) -> Result<()> {
        self.check(v)?;
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.index.insert(id, self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(v);
        Ok(())
    }

    pub fn get(&self, id: PointId) -> Option<&[f64]> {
        self.index.get(&id).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, &[f64])> {
        self.ids.iter().enumerate().map(|(i, &id)| (id, self.row(i)))
    }

    /// Exact top-`k` by `(distance, id)`, by linear scan.
    pub fn exact_search(&self, query: &[f64], k: usize) -> Vec<Neighbor> {
        let mut all: Vec<(f64, PointId)> = self.iter().map(|(id, v)| (sq_dist(v, query), id)).collect();
        all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        all.into_iter().map(|(d2, id)| Neighbor { id, distance: d2.sqrt() }).collect()
    }
}

#[derive(Clone, Debug)]
pub struct IndexOptions {
    pub num_clusters: usize,
    pub seed: u64,
    pub max_kmeans_iterations: usize,
    pub power_iterations: usize,
    pub octree: OctreeConfig,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            num_clusters: 8,
            seed: 0,
            max_kmeans_iterations: 100,
            power_iterations: 30,
            octree: OctreeConfig::default(),
        }
    }
}

/// How much of the index a query explores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchParams {
    pub probe_clusters: usize,
    /// Each probed cluster contributes `candidate_multiplier * top_k`
    /// octree candidates.
    pub candidate_multiplier: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { probe_clusters: 3, candidate_multiplier: 10 }
    }
}

impl SearchParams {
    /// Probes every cluster and fetches every point: exact search.
    pub fn exhaustive(index: &HybridIndex) -> Self {
        SearchParams { probe_clusters: index.num_clusters(), candidate_multiplier: usize::MAX }
    }
}

#[derive(Clone, Debug)]
pub struct HybridIndex {
    centroids: Vec<Vec<f64>>,
    projections: Vec<Projection>,
    octrees: Vec<Octree>,
    store: EmbeddingStore,
    assignment: HashMap<PointId, usize>,
    octree_config: OctreeConfig,
}

impl HybridIndex {
    pub fn build(store: EmbeddingStore, opts: &IndexOptions) -> Result<Self> {
        if opts.num_clusters == 0 {
            return Err(Error::input("num_clusters must be positive"));
        }
        if store.len() < opts.num_clusters {
            return Err(Error::input(format!("{} vectors cannot form {} clusters", store.len(), opts.num_clusters)));
        }
        opts.octree.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let rows: Vec<&[f64]> = store.iter().map(|(_, v)| v).collect();
        let clustering = kmeans::kmeans(&rows, opts.num_clusters, opts.max_kmeans_iterations, &mut rng);

        // Drop empty clusters, renumbering the survivors densely.
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); opts.num_clusters];
        for (row, &c) in clustering.assignment.iter().enumerate() {
            members[c].push(row);
        }
        let mut centroids = Vec::new();
        let mut projections = Vec::new();
        let mut octrees = Vec::new();
        let mut assignment = HashMap::with_capacity(store.len());
        for (c, rows_in) in members.iter().enumerate() {
            if rows_in.is_empty() {
                continue;
            }
            let cluster = centroids.len();
            let vecs: Vec<&[f64]> = rows_in.iter().map(|&r| rows[r]).collect();
            let projection = projection::fit(&vecs, opts.power_iterations, &mut rng);
            let pts: Vec<(PointId, [f64; 3])> = rows_in
                .iter()
                .map(|&r| {
                    let id = store.ids[r];
                    assignment.insert(id, cluster);
                    (id, projection.apply(rows[r]))
                })
                .collect();
            octrees.push(Octree::from_points(opts.octree, &pts)?);
            projections.push(projection);
            centroids.push(clustering.centroids[c].clone());
        }
        Ok(HybridIndex { centroids, projections, octrees, store, assignment, octree_config: opts.octree })
    }

    pub fn num_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.store.dim()
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn octrees(&self) -> &[Octree] {
        &self.octrees
    }

    pub fn octree_config(&self) -> &OctreeConfig {
        &self.octree_config
    }

    pub fn cluster_of(&self, id: PointId) -> Option<usize> {
        self.assignment.get(&id).copied()
    }

    /// Routes to the nearest frozen centroid, projects, and inserts into that
    /// cluster's octree.
    pub fn insert(&mut self, id: PointId, v: &[f64]) -> Result<()> {
        self.store.check(v)?;
        if self.assignment.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let cluster = kmeans::nearest(&self.centroids, v);
        let p = self.projections[cluster].apply(v);
        self.octrees[cluster].insert(id, p)?;
        self.store.insert(id, v)?;
        self.assignment.insert(id, cluster);
        Ok(())
    }

    /// Approximate top-`top_k` by exact distance among octree candidates
    /// from the `probe_clusters` nearest clusters.
    pub fn query(&self, v: &[f64], top_k: usize, params: SearchParams) -> Result<Vec<Neighbor>> {
        self.store.check(v)?;
        if params.probe_clusters == 0 {
            return Err(Error::input("probe_clusters must be at least 1"));
        }
        if params.candidate_multiplier == 0 || top_k == 0 {
            return Err(Error::input("top_k and candidate_multiplier must be at least 1"));
        }
        if self.is_empty() {
            return Err(Error::EmptyState("index holds no vectors".into()));
        }
        let mut order: Vec<(f64, usize)> = self.centroids.iter().enumerate().map(|(i, c)| (sq_dist(c, v), i)).collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let per_cluster = top_k.saturating_mul(params.candidate_multiplier);
        let mut ranked: Vec<(f64, PointId)> = Vec::new();
        for &(_, c) in order.iter().take(params.probe_clusters) {
            let q = self.projections[c].apply(v);
            for cand in self.octrees[c].k_nearest(q, per_cluster) {
                let stored = self.store.get(cand.id).expect("indexed ids are stored");
                ranked.push((sq_dist(stored, v), cand.id));
            }
        }
        ranked.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        ranked.truncate(top_k);
        Ok(ranked.into_iter().map(|(d2, id)| Neighbor { id, distance: d2.sqrt() }).collect())
    }

    /// Mean fraction of the exact top-`k` recovered by [`HybridIndex::query`].
    pub fn recall_at_k(&self, queries: &[Vec<f64>], k: usize, params: SearchParams) -> Result<f64> {
        if queries.is_empty() {
            return Err(Error::input("no queries given"));
        }
        let mut total = 0.0;
        for q in queries {
            let exact = self.store.exact_search(q, k);
            let found = self.query(q, k, params)?;
            let hits = exact.iter().filter(|e| found.iter().any(|f| f.id == e.id)).count();
            total += if exact.is_empty() { 1.0 } else { hits as f64 / exact.len() as f64 };
        }
        Ok(total / queries.len() as f64)
    }
}
