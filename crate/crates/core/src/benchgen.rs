//! Seeded time-varying point clouds and a timing/memory harness.
//!
//! All clouds live in the domain `[0, 100]^3`. Within a step, ids are
//! `0..count`. When two consecutive steps use the same placement law, ids
//! present in both are carried over with a small Gaussian jitter; otherwise
//! every point of the new step is drawn fresh.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::octree::Octree;
use crate::oracle::{brute_pairs, FlatPointSet};
use crate::PointId;

pub const DOMAIN_EDGE: f64 = 100.0;
/// Standard deviation of the per-step jitter of carried-over points.
pub const JITTER_SIGMA: f64 = 0.01 * DOMAIN_EDGE;

pub fn domain() -> Aabb {
    Aabb { min: [0.0; 3], max: [DOMAIN_EDGE; 3] }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    VaryingDensity,
    Stepwise,
    Exponential,
    Multimodal,
    Wave,
}

impl Distribution {
    pub const ALL: [Distribution; 5] = [
        Distribution::VaryingDensity,
        Distribution::Stepwise,
        Distribution::Exponential,
        Distribution::Multimodal,
        Distribution::Wave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::VaryingDensity => "varying",
            Distribution::Stepwise => "stepwise",
            Distribution::Exponential => "exponential",
            Distribution::Multimodal => "multimodal",
            Distribution::Wave => "wave",
        }
    }

    /// Generates the series. `scale` applies to the count-driven
    /// distributions; the wave uses `wave_n` points per step.
    pub fn generate(self, seed: u64, scale: f64, wave_n: usize) -> Result<TimeStepSeries> {
        match self {
            Distribution::VaryingDensity => gen_varying_density(seed, scale),
            Distribution::Stepwise => gen_stepwise(seed, scale),
            Distribution::Exponential => gen_exponential(seed, scale),
            Distribution::Multimodal => gen_multimodal(seed, scale),
            Distribution::Wave => gen_wave(seed, wave_n),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::input(format!("unknown distribution {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeStepSeries {
    pub distribution: Distribution,
    /// Human-readable generator parameters.
    pub params: String,
    pub seed: u64,
    pub steps: Vec<Vec<(PointId, Vec3)>>,
}

impl TimeStepSeries {
    pub fn counts(&self) -> Vec<usize> {
        self.steps.iter().map(Vec::len).collect()
    }

    pub fn max_count(&self) -> usize {
        self.steps.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Placement {
    Uniform(Aabb),
    /// Gaussian clusters `(center, sigma)` plus `background` uniform points.
    Clusters {
        clusters: Vec<(Vec3, f64)>,
        background: usize,
    },
    /// Density along x proportional to `1 + sin(2 pi (freq u - phase))`,
    /// `u = x / DOMAIN_EDGE`; y and z uniform.
    Wave {
        freq: u32,
        phase: f64,
    },
}

impl Placement {
    fn jitter_box(&self) -> Aabb {
        match self {
            Placement::Uniform(b) => *b,
            _ => domain(),
        }
    }

    /// Whether points may be carried over from a step placed by `prev`.
    fn continues(&self, prev: &Placement) -> bool {
        matches!((self, prev), (Placement::Uniform(a), Placement::Uniform(b)) if a == b)
    }

    fn sample(&self, i: usize, rng: &mut ChaCha8Rng) -> Vec3 {
        match self {
            Placement::Uniform(b) => uniform_in(b, rng),
            Placement::Clusters { clusters, background } => {
                if i < *background {
                    return uniform_in(&domain(), rng);
                }
                let (c, sigma) = clusters[(i - background) % clusters.len()];
                let normal = Normal::new(0.0, sigma).expect("positive sigma");
                clamp(c.map(|x| x + normal.sample(rng)), &domain())
            }
            Placement::Wave { freq, phase } => {
                let u = wave_inverse_cdf(rng.random::<f64>(), *freq, *phase);
                [u * DOMAIN_EDGE, rng.random::<f64>() * DOMAIN_EDGE, rng.random::<f64>() * DOMAIN_EDGE]
            }
        }
    }
}

fn uniform_in(b: &Aabb, rng: &mut ChaCha8Rng) -> Vec3 {
    let mut p = [0.0; 3];
    for a in 0..3 {
        p[a] = b.min[a] + rng.random::<f64>() * (b.max[a] - b.min[a]);
    }
    p
}

fn clamp(p: Vec3, b: &Aabb) -> Vec3 {
    [0, 1, 2].map(|a| p[a].clamp(b.min[a], b.max[a]))
}

/// Cumulative distribution of the normalized wave density on `[0, 1]`.
pub fn wave_cdf(u: f64, freq: u32, phase: f64) -> f64 {
    let w = TAU * freq as f64;
    u + ((TAU * phase).cos() - (w * u - TAU * phase).cos()) / w
}

fn wave_inverse_cdf(target: f64, freq: u32, phase: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if wave_cdf(mid, freq, phase) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scaled(count: usize, scale: f64) -> usize {
    ((count as f64 * scale).round() as usize).max(1)
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(())
    } else {
        Err(Error::input(format!("scale must lie in (0, 1], got {scale}")))
    }
}

fn assemble(
    distribution: Distribution,
    params: String,
    seed: u64,
    rng: &mut ChaCha8Rng,
    plan: Vec<(usize, Placement)>,
) -> TimeStepSeries {
    let mut steps: Vec<Vec<(PointId, Vec3)>> = Vec::with_capacity(plan.len());
    let mut prev: Option<&Placement> = None;
    let jitter = Normal::new(0.0, JITTER_SIGMA).expect("positive sigma");
    for (count, placement) in &plan {
        let carry = prev.is_some_and(|p| placement.continues(p));
        let bounds = placement.jitter_box();
        let step: Vec<(PointId, Vec3)> = (0..*count)
            .map(|i| {
                let p = match steps.last() {
                    Some(last) if carry && i < last.len() => clamp(last[i].1.map(|x| x + jitter.sample(rng)), &bounds),
                    _ => placement.sample(i, rng),
                };
                (PointId(i as u64), p)
            })
            .collect();
        steps.push(step);
        prev = Some(placement);
    }
    TimeStepSeries { distribution, params, seed, steps }
}

/// Ten steps cycling high density (10,000 points in a central box), low
/// density (100 over the domain), a density spike (20,000 in a small box)
/// and a variable regime (uniform count in [100, 15,000]).
pub fn gen_varying_density(seed: u64, scale: f64) -> Result<TimeStepSeries> {
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let high = Aabb { min: [40.0; 3], max: [60.0; 3] };
    let spike = Aabb { min: [45.0; 3], max: [55.0; 3] };
    let variable = Aabb { min: [20.0; 3], max: [80.0; 3] };
    let plan = (0..10)
        .map(|i| match i % 4 {
            0 => (scaled(10_000, scale), Placement::Uniform(high)),
            1 => (scaled(100, scale), Placement::Uniform(domain())),
            2 => (scaled(20_000, scale), Placement::Uniform(spike)),
            _ => {
                let c = rng.random_range(100..=15_000);
                (scaled(c, scale), Placement::Uniform(variable))
            }
        })
        .collect();
    Ok(assemble(Distribution::VaryingDensity, format!("scale={scale}"), seed, &mut rng, plan))
}

/// Ten uniform steps alternating 50,000 and 10 points.
pub fn gen_stepwise(seed: u64, scale: f64) -> Result<TimeStepSeries> {
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan =
        (0..10).map(|i| (scaled(if i % 2 == 0 { 50_000 } else { 10 }, scale), Placement::Uniform(domain()))).collect();
    Ok(assemble(Distribution::Stepwise, format!("scale={scale}"), seed, &mut rng, plan))
}

/// Exponential-growth step counts: 20 geometric steps from 10 up to 50,000.
pub fn exponential_counts() -> Vec<usize> {
    let up: Vec<usize> = (0..20).map(|i| (10.0 * 5000f64.powf(i as f64 / 19.0)).round() as usize).collect();
    up.iter().chain(up.iter().rev()).copied().collect()
}

/// 20 geometric steps up from 10 to 50,000 points, then the same 20 down.
pub fn gen_exponential(seed: u64, scale: f64) -> Result<TimeStepSeries> {
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = exponential_counts().into_iter().map(|c| (scaled(c, scale), Placement::Uniform(domain()))).collect();
    Ok(assemble(Distribution::Exponential, format!("scale={scale}"), seed, &mut rng, plan))
}

pub const MULTIMODAL_COUNTS: [usize; 10] = [100, 15_100, 100, 30_100, 100, 45_100, 100, 30_100, 100, 15_100];
pub const MULTIMODAL_CENTERS: [Vec3; 3] = [[25.0, 25.0, 25.0], [75.0, 25.0, 50.0], [50.0, 75.0, 75.0]];
pub const MULTIMODAL_SIGMA: f64 = 5.0;

/// Sparse steps of 100 uniform points alternating with peaks of three
/// Gaussian clusters (on top of the same 100-point background).
pub fn gen_multimodal(seed: u64, scale: f64) -> Result<TimeStepSeries> {
    check_scale(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sparse = scaled(100, scale);
    let plan = MULTIMODAL_COUNTS
        .iter()
        .map(|&c| {
            let count = scaled(c, scale);
            if c == 100 {
                (count, Placement::Uniform(domain()))
            } else {
                let clusters = MULTIMODAL_CENTERS.iter().map(|&m| (m, MULTIMODAL_SIGMA)).collect();
                (count, Placement::Clusters { clusters, background: sparse.min(count) })
            }
        })
        .collect();
    Ok(assemble(Distribution::Multimodal, format!("scale={scale}"), seed, &mut rng, plan))
}

pub const WAVE_FREQ: u32 = 3;
pub const WAVE_STEPS: usize = 10;

/// `n` points per step with a sinusoidal density along x whose phase
/// advances by a tenth of a period each step.
pub fn gen_wave(seed: u64, n: usize) -> Result<TimeStepSeries> {
    if n == 0 {
        return Err(Error::input("wave needs at least one point per step"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = (0..WAVE_STEPS)
        .map(|t| (n, Placement::Wave { freq: WAVE_FREQ, phase: t as f64 / WAVE_STEPS as f64 }))
        .collect();
    Ok(assemble(Distribution::Wave, format!("n={n} freq={WAVE_FREQ}"), seed, &mut rng, plan))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Structure {
    Octree(OctreeConfig),
    /// Brute-force baseline; every update is a rebuild.
    FlatOracle,
}

impl Structure {
    pub fn name(&self) -> String {
        match self {
            Structure::Octree(c) => format!("octree-K{}-a{}", c.k, c.alpha),
            Structure::FlatOracle => "flat-oracle".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub structure: String,
    pub distribution: String,
    pub step: usize,
    pub build_s: f64,
    pub update_s: f64,
    pub nb_s: f64,
    /// Resident-set samples taken during the step; `None` when the
    /// platform does not expose them.
    pub peak_mem_mb: Option<f64>,
    pub avg_mem_mb: Option<f64>,
    /// Total directed neighbor-list entries, for cross-checking structures.
    pub nb_entries: usize,
}

/// Current resident set size in megabytes, if the platform reports it.
pub fn resident_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

#[derive(Default)]
struct MemSamples(Vec<f64>);

impl MemSamples {
    fn sample(&mut self) {
        if let Some(mb) = resident_mb() {
            self.0.push(mb);
        }
    }

    fn summary(&self) -> (Option<f64>, Option<f64>) {
        if self.0.is_empty() {
            return (None, None);
        }
        let peak = self.0.iter().copied().fold(f64::MIN, f64::max);
        (Some(peak), Some(self.0.iter().sum::<f64>() / self.0.len() as f64))
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// Applies `next` to `tree` relative to `prev`: shared ids move, surplus
/// ids are removed, new ids are inserted.
pub fn apply_step(tree: &mut Octree, prev: &[(PointId, Vec3)], next: &[(PointId, Vec3)]) -> Result<()> {
    let next_ids: std::collections::HashSet<PointId> = next.iter().map(|e| e.0).collect();
    for &(id, _) in prev {
        if !next_ids.contains(&id) {
            tree.remove(id)?;
        }
    }
    for &(id, p) in next {
        if tree.contains(id) {
            tree.update_position(id, p)?;
        } else {
            tree.insert(id, p)?;
        }
    }
    Ok(())
}

/// Times every structure on every step: a from-scratch build, an
/// incremental update from the previous step (step 0 populates an empty
/// tree), and a neighbor-list construction at cutoff `d`.
pub fn run_bench(series: &TimeStepSeries, structures: &[Structure], d: f64) -> Result<Vec<BenchRecord>> {
    if series.steps.is_empty() {
        return Err(Error::input("series has no steps"));
    }
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::input(format!("cutoff must be finite and non-negative, got {d}")));
    }
    let mut records = Vec::with_capacity(series.steps.len() * structures.len());
    for structure in structures {
        let mut maintained: Option<Octree> = None;
        for (step, points) in series.steps.iter().enumerate() {
            let mut mem = MemSamples::default();
            mem.sample();
            let (build_s, update_s, nb_s, nb_entries) = match structure {
                Structure::Octree(config) => {
                    let (built, build_s) = timed(|| Octree::from_points(*config, points));
                    drop(built?);
                    mem.sample();
                    let (updated, update_s) = timed(|| -> Result<()> {
                        match maintained.as_mut() {
                            None => {
                                let mut tree = Octree::new(*config, domain())?;
                                for &(id, p) in points {
                                    tree.insert(id, p)?;
                                }
                                maintained = Some(tree);
                            }
                            Some(tree) => apply_step(tree, &series.steps[step - 1], points)?,
                        }
                        Ok(())
                    });
                    updated?;
                    mem.sample();
                    let tree = maintained.as_ref().expect("populated above");
                    let (nl, nb_s) = timed(|| tree.build_neighbor_lists(d));
                    (build_s, update_s, nb_s, nl?.total_entries())
                }
                Structure::FlatOracle => {
                    let (set, build_s) = timed(|| FlatPointSet::from_entries(points.iter().copied()));
                    let set = set?;
                    mem.sample();
                    let (nl, nb_s) = timed(|| brute_pairs(&set, d));
                    (build_s, build_s, nb_s, nl.total_entries())
                }
            };
            mem.sample();
            let (peak_mem_mb, avg_mem_mb) = mem.summary();
            records.push(BenchRecord {
                structure: structure.name(),
                distribution: series.distribution.name().to_string(),
                step,
                build_s,
                update_s,
                nb_s,
                peak_mem_mb,
                avg_mem_mb,
                nb_entries,
            });
        }
    }
    Ok(records)
}
