use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Balance parameters of a (K, alpha)-admissible octree.
///
/// Leaves hold at most `floor(alpha * K)` points (unless capped by depth) and
/// internal nodes hold strictly more than `floor(K / alpha)` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OctreeConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    #[serde(default = "default_expansion_factor")]
    pub expansion_factor: f64,
}

fn default_max_depth() -> u32 {
    32
}

fn default_expansion_factor() -> f64 {
    2.0
}

impl Default for OctreeConfig {
    fn default() -> Self {
        OctreeConfig { k: 10, alpha: 2.0, max_depth: default_max_depth(), expansion_factor: 2.0 }
    }
}

impl OctreeConfig {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        let cfg = OctreeConfig { k, alpha, ..Default::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_depth(mut self, max_depth: u32) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn with_expansion_factor(mut self, factor: f64) -> Self {
        self.expansion_factor = factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(self.alpha >= 1.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be a finite value >= 1, got {}", self.alpha)));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if !(self.expansion_factor > 1.0) || !self.expansion_factor.is_finite() {
            return Err(Error::Config(format!(
                "expansion_factor must be a finite value > 1, got {}",
                self.expansion_factor
            )));
        }
        if self.leaf_capacity() == 0 {
            return Err(Error::Config("leaf capacity floor(alpha*K) must be at least 1".into()));
        }
        Ok(())
    }

    /// `floor(alpha * K)`.
    pub fn leaf_capacity(&self) -> usize {
        (self.alpha * self.k as f64).floor() as usize
    }

    /// `floor(K / alpha)`; internal nodes must hold strictly more points.
    pub fn internal_floor(&self) -> usize {
        (self.k as f64 / self.alpha).floor() as usize
    }
}
