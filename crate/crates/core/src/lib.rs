//! Dynamic (K, alpha)-admissible octree for evolving 3D point sets.
//!
//! The [`Octree`] supports logarithmic-cost insertion, deletion and movement
//! of points with split/merge rebalancing, plus exact range, k-nearest and
//! fixed-radius neighbor-list queries ([`query`]). Built on top of it:
//!
//! - [`svgd`]: Stein variational gradient descent with an octree-truncated
//!   kernel sum,
//! - [`knn`]: an incrementally trained nearest-neighbor classifier,
//! - [`embed`]: a k-means + per-cluster 3D projection vector index,
//! - [`metrics`]: neighborhood distortion, Jaccard and trajectory curvature,
//! - [`benchgen`]: seeded time-varying point clouds and a timing harness.
//!
//! [`oracle`] holds brute-force references used to check all of the above,
//! and [`workload`] the seeded clouds and mutation streams fed to them.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod benchgen;
pub mod config;
pub mod embed;
pub mod error;
pub mod geom;
pub mod knn;
pub mod metrics;
pub mod octree;
pub mod oracle;
pub mod query;
pub mod svgd;
pub mod workload;

pub use config::OctreeConfig;
pub use error::{Error, Result};
pub use geom::{Aabb, Vec3};
pub use octree::{AdmissibilityReport, NodeHandle, Octree, Violation};
pub use query::{Neighbor, NeighborList};

/// Caller-assigned identity of a point, stable across moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u64);

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for PointId {
    fn from(v: u64) -> Self {
        PointId(v)
    }
}
