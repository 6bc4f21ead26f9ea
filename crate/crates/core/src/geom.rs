//! Small fixed-size geometry used throughout the crate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

#[inline]
pub fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn dist(a: &Vec3, b: &Vec3) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn is_finite(p: &Vec3) -> bool {
    p.iter().all(|c| c.is_finite())
}

pub(crate) fn check_finite(p: &Vec3) -> Result<()> {
    if is_finite(p) {
        Ok(())
    } else {
        Err(Error::input(format!("non-finite coordinate {p:?}")))
    }
}

/// Index of the octant of `p` relative to the split point `center`.
///
/// Bit `a` is set when `p[a] >= center[a]`, so points on a split plane go
/// to the upper octant and every point has exactly one child.
#[inline]
pub fn octant_index(center: &Vec3, p: &Vec3) -> usize {
    (p[0] >= center[0]) as usize | ((p[1] >= center[1]) as usize) << 1 | ((p[2] >= center[2]) as usize) << 2
}

/// Axis-aligned box. `min[i] <= max[i]` on every axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if !is_finite(&min) || !is_finite(&max) {
            return Err(Error::input("box corners must be finite"));
        }
        if (0..3).any(|a| min[a] > max[a]) {
            return Err(Error::input(format!("box min {min:?} exceeds max {max:?}")));
        }
        Ok(Aabb { min, max })
    }

    pub fn cube(min: Vec3, edge: f64) -> Result<Self> {
        Aabb::new(min, [min[0] + edge, min[1] + edge, min[2] + edge])
    }

    pub fn unit() -> Self {
        Aabb { min: [0.0; 3], max: [1.0; 3] }
    }

    /// Tight box around `points`, or `None` when empty.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb { min: first, max: first };
        for p in it {
            for a in 0..3 {
                b.min[a] = b.min[a].min(p[a]);
                b.max[a] = b.max[a].max(p[a]);
            }
        }
        Some(b)
    }

    /// Grows each axis by `margin` on both sides and forces a minimum extent
    /// so the result is never degenerate.
    pub fn padded(&self, margin: f64) -> Self {
        let mut b = *self;
        for a in 0..3 {
            let scale = 1.0 + b.min[a].abs().max(b.max[a].abs());
            let extent = (b.max[a] - b.min[a]).max(1e-9 * scale);
            let pad = margin.max(extent * 1e-6);
            b.min[a] -= pad;
            b.max[a] += pad;
        }
        b
    }

    pub fn is_degenerate(&self) -> bool {
        (0..3).any(|a| !(self.max[a] > self.min[a]))
    }

    #[inline]
    pub fn center(&self) -> Vec3 {
        [0.5 * (self.min[0] + self.max[0]), 0.5 * (self.min[1] + self.max[1]), 0.5 * (self.min[2] + self.max[2])]
    }

    pub fn size(&self) -> Vec3 {
        [self.max[0] - self.min[0], self.max[1] - self.min[1], self.max[2] - self.min[2]]
    }

    pub fn diagonal(&self) -> f64 {
        dist(&self.min, &self.max)
    }

    /// Closed containment on every face.
    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    /// Bounds of child `octant` when this box is split at `center`.
    #[inline]
    pub fn octant(&self, center: &Vec3, octant: usize) -> Aabb {
        let mut b = *self;
        for a in 0..3 {
            if octant >> a & 1 == 1 {
                b.min[a] = center[a];
            } else {
                b.max[a] = center[a];
            }
        }
        b
    }

    /// Squared distance from `p` to the closest point of the box (0 inside).
    #[inline]
    pub fn min_dist2_point(&self, p: &Vec3) -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            let gap = if p[a] < self.min[a] {
                self.min[a] - p[a]
            } else if p[a] > self.max[a] {
                p[a] - self.max[a]
            } else {
                0.0
            };
            acc += gap * gap;
        }
        acc
    }

    /// Squared minimum distance between any two points of the two boxes.
    #[inline]
    pub fn min_dist2_box(&self, other: &Aabb) -> f64 {
        let mut acc = 0.0;
        for a in 0..3 {
            let gap = if other.max[a] < self.min[a] {
                self.min[a] - other.max[a]
            } else if self.max[a] < other.min[a] {
                other.min[a] - self.max[a]
            } else {
                0.0
            };
            acc += gap * gap;
        }
        acc
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s[0] * s[1] * s[2]
    }
}
