//! Stein variational gradient descent in 3D with an RBF kernel
//! `k(x, y) = exp(-|x - y|^2 / h)`.
//!
//! Two step implementations are provided. [`svgd_step_naive`] evaluates the
//! full `n^2` kernel sum. [`svgd_step_octree`] restricts each particle's sum to
//! neighbors within `r = sqrt(4h)` (where the kernel has decayed to `e^-4`),
//! found with the octree's neighbor lists, and by default averages over the
//! neighbor count rather than `n`. [`Normalization::Ensemble`] switches the
//! octree step to the naive normalization (divide by `n`, self term included)
//! so the two can be compared exactly.

use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::OctreeConfig;
use crate::error::{Error, Result};
use crate::geom::{dist2, is_finite, Vec3};
use crate::octree::Octree;
use crate::PointId;

pub fn rbf_kernel(x: &Vec3, y: &Vec3, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    Ok((-dist2(x, y) / h).exp())
}

/// Gradient of `k(x, y)` with respect to `x`: `(2/h)(y - x) k(x, y)`.
pub fn rbf_kernel_grad(x: &Vec3, y: &Vec3, h: f64) -> Result<Vec3> {
    let k = rbf_kernel(x, y, h)?;
    let s = 2.0 / h * k;
    Ok([s * (y[0] - x[0]), s * (y[1] - x[1]), s * (y[2] - x[2])])
}

/// Interaction radius `sqrt(4h)` beyond which kernel terms are dropped.
pub fn truncation_radius(h: f64) -> f64 {
    (4.0 * h).sqrt()
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("bandwidth must be positive and finite, got {h}")))
    }
}

/// Adds particle `j`'s contribution `k(x_j, x_i) grad_j + grad_{x_j} k(x_j, x_i)`
/// to `phi`. Both step variants go through here so their arithmetic matches.
#[inline]
fn accumulate(phi: &mut Vec3, xi: &Vec3, xj: &Vec3, grad_j: &Vec3, h: f64) {
    let k = (-dist2(xj, xi) / h).exp();
    let s = 2.0 / h * k;
    for a in 0..3 {
        phi[a] += k * grad_j[a] + s * (xi[a] - xj[a]);
    }
}

#[derive(Clone, Debug)]
struct GaussianComponent {
    mean: Vector3<f64>,
    precision: Matrix3<f64>,
    /// `ln w - 1.5 ln(2 pi) - 0.5 ln det(cov)`.
    log_norm: f64,
}

/// Target density `p(x)`: a weighted mixture of 3D Gaussians.
#[derive(Clone, Debug)]
pub struct TargetDistribution {
    name: String,
    components: Vec<GaussianComponent>,
}

impl TargetDistribution {
    pub fn isotropic_gaussian(mean: Vec3, sigma: f64) -> Result<Self> {
        let var = sigma * sigma;
        let cov = [[var, 0.0, 0.0], [0.0, var, 0.0], [0.0, 0.0, var]];
        let mut t = Self::mixture(&[(1.0, mean, cov)])?;
        t.name = "gauss".into();
        Ok(t)
    }

    pub fn standard_gaussian() -> Self {
        Self::isotropic_gaussian([0.0; 3], 1.0).expect("valid parameters")
    }

    /// Mixture from `(weight, mean, covariance)` triples. Weights are
    /// normalized; covariances must be symmetric positive definite.
    pub fn mixture(components: &[(f64, Vec3, [[f64; 3]; 3])]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if !(total > 0.0) || components.iter().any(|c| !(c.0 > 0.0)) {
            return Err(Error::input("mixture weights must be positive"));
        }
        let mut out = Vec::with_capacity(components.len());
        for (w, mean, cov) in components {
            let cov = Matrix3::from_fn(|r, c| cov[r][c]);
            if (cov - cov.transpose()).abs().max() > 1e-12 {
                return Err(Error::input("covariance must be symmetric"));
            }
            let chol = cov.cholesky().ok_or_else(|| Error::input("covariance must be positive definite"))?;
            let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            out.push(GaussianComponent {
                mean: Vector3::from_column_slice(mean),
                precision: chol.inverse(),
                log_norm: (w / total).ln() - 1.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det,
            });
        }
        Ok(TargetDistribution { name: "mixture".into(), components: out })
    }

    /// Two equally weighted Gaussians with means (0,1,1) and (2,1,1) and
    /// covariance 0.36 I; overall mean (1,1,1).
    pub fn mixture2() -> Self {
        let cov = [[0.36, 0.0, 0.0], [0.0, 0.36, 0.0], [0.0, 0.0, 0.36]];
        let mut t = Self::mixture(&[(0.5, [0.0, 1.0, 1.0], cov), (0.5, [2.0, 1.0, 1.0], cov)]).expect("valid preset");
        t.name = "mixture2".into();
        t
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "gauss" => Ok(Self::standard_gaussian()),
            "mixture2" => Ok(Self::mixture2()),
            other => Err(Error::input(format!("unknown target preset `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn component_terms(&self, x: &Vec3) -> impl Iterator<Item = (f64, Vector3<f64>)> + '_ {
        let x = Vector3::from_column_slice(x);
        self.components.iter().map(move |c| {
            let diff = x - c.mean;
            let pd = c.precision * diff;
            (c.log_norm - 0.5 * diff.dot(&pd), pd)
        })
    }

    pub fn log_density(&self, x: &Vec3) -> f64 {
        let logs: Vec<f64> = self.component_terms(x).map(|(l, _)| l).collect();
        log_sum_exp(&logs)
    }

    pub fn grad_log_density(&self, x: &Vec3) -> Vec3 {
        let terms: Vec<(f64, Vector3<f64>)> = self.component_terms(x).collect();
        let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        let mut num = Vector3::zeros();
        let mut den = 0.0;
        for (l, pd) in &terms {
            let w = (l - max).exp();
            num -= pd * w;
            den += w;
        }
        let g = num / den;
        [g[0], g[1], g[2]]
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Particle positions (particle `i` has octree id `i`) plus step size and
/// kernel bandwidth.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleEnsemble {
    pub positions: Vec<Vec3>,
    pub step_size: f64,
    pub bandwidth: f64,
}

impl ParticleEnsemble {
    pub fn new(positions: Vec<Vec3>, step_size: f64, bandwidth: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::input("ensemble needs at least one particle"));
        }
        if positions.iter().any(|p| !is_finite(p)) {
            return Err(Error::input("particle positions must be finite"));
        }
        if !(step_size > 0.0) || !step_size.is_finite() {
            return Err(Error::input(format!("step size must be positive, got {step_size}")));
        }
        check_bandwidth(bandwidth)?;
        Ok(ParticleEnsemble { positions, step_size, bandwidth })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn mean_log_density(&self, target: &TargetDistribution) -> f64 {
        self.positions.iter().map(|p| target.log_density(p)).sum::<f64>() / self.len() as f64
    }

    /// Octree indexing particle `i` under id `i`.
    pub fn build_octree(&self, config: OctreeConfig) -> Result<Octree> {
        let pts: Vec<(PointId, Vec3)> =
            self.positions.iter().enumerate().map(|(i, p)| (PointId(i as u64), *p)).collect();
        Octree::from_points(config, &pts)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the number of neighbors within the cutoff (self excluded).
    #[default]
    NeighborCount,
    /// Divide by `n` and include the self term, as in the full sum.
    Ensemble,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub kernel_evals: u64,
}

/// One full `O(n^2)` update, applied simultaneously to all particles.
pub fn svgd_step_naive(ensemble: &mut ParticleEnsemble, target: &TargetDistribution) -> StepStats {
    let h = ensemble.bandwidth;
    let n = ensemble.len();
    let xs = &ensemble.positions;
    let grads: Vec<Vec3> = xs.iter().map(|x| target.grad_log_density(x)).collect();
    let phis: Vec<Vec3> = xs
        .iter()
        .map(|xi| {
            let mut phi = [0.0; 3];
            for (xj, gj) in xs.iter().zip(&grads) {
                accumulate(&mut phi, xi, xj, gj, h);
            }
            phi.map(|c| c / n as f64)
        })
        .collect();
    apply(ensemble, &phis);
    StepStats { kernel_evals: (n * n) as u64 }
}

/// One truncated update using neighbor lists at `sqrt(4h)`; `tree` must index
/// exactly the current particle positions and is updated in place afterwards.
pub fn svgd_step_octree(
    ensemble: &mut ParticleEnsemble,
    target: &TargetDistribution,
    tree: &mut Octree,
    normalization: Normalization,
) -> Result<StepStats> {
    let n = ensemble.len();
    if tree.len() != n {
        return Err(Error::Consistency(format!("octree holds {} points for {} particles", tree.len(), n)));
    }
    for (i, p) in ensemble.positions.iter().enumerate() {
        if tree.position(PointId(i as u64)) != Some(*p) {
            return Err(Error::Consistency(format!("particle {i} is not at its indexed position")));
        }
    }
    let h = ensemble.bandwidth;
    let xs = &ensemble.positions;
    let grads: Vec<Vec3> = xs.iter().map(|x| target.grad_log_density(x)).collect();
    let lists = tree.build_neighbor_lists(truncation_radius(h))?;

    let mut evals = 0u64;
    let mut phis = vec![[0.0; 3]; n];
    let mut scratch: Vec<usize> = Vec::new();
    for (id, neighbors) in lists.iter() {
        let i = id.0 as usize;
        scratch.clear();
        scratch.extend(neighbors.iter().map(|nb| nb.id.0 as usize));
        if normalization == Normalization::Ensemble {
            scratch.push(i);
        }
        // Index order keeps the summation identical to the naive loop.
        scratch.sort_unstable();
        let mut phi = [0.0; 3];
        for &j in &scratch {
            accumulate(&mut phi, &xs[i], &xs[j], &grads[j], h);
        }
        evals += scratch.len() as u64;
        let denom = match normalization {
            Normalization::NeighborCount => neighbors.len(),
            Normalization::Ensemble => n,
        };
        phis[i] = if denom == 0 { [0.0; 3] } else { phi.map(|c| c / denom as f64) };
    }
    apply(ensemble, &phis);
    for (i, p) in ensemble.positions.iter().enumerate() {
        tree.update_position(PointId(i as u64), *p)?;
    }
    Ok(StepStats { kernel_evals: evals })
}

fn apply(ensemble: &mut ParticleEnsemble, phis: &[Vec3]) {
    let eps = ensemble.step_size;
    for (x, phi) in ensemble.positions.iter_mut().zip(phis) {
        for a in 0..3 {
            x[a] += eps * phi[a];
        }
    }
}

/// `median(pairwise squared distances) / ln(n + 1)`.
pub fn median_bandwidth(positions: &[Vec3]) -> Result<f64> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::input("median bandwidth needs at least two particles"));
    }
    let mut d2 = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            d2.push(dist2(&positions[i], &positions[j]));
        }
    }
    let m = d2.len();
    let (_, &mut upper, _) = d2.select_nth_unstable_by(m / 2, f64::total_cmp);
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = d2[..m / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    let h = median / ((n + 1) as f64).ln();
    if !(h > 0.0) {
        return Err(Error::input("median pairwise distance is zero; particles coincide"));
    }
    Ok(h)
}

/// Bandwidth whose truncation radius gives each particle `target` neighbors
/// on average, found by bisection on the radius.
pub fn neighbor_count_bandwidth(positions: &[Vec3], target: f64) -> Result<f64> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::input("neighbor-count bandwidth needs at least two particles"));
    }
    if !(target > 0.0 && target <= (n - 1) as f64) {
        return Err(Error::input(format!("target neighbor count must lie in (0, {}], got {target}", n - 1)));
    }
    let pts: Vec<(PointId, Vec3)> = positions.iter().enumerate().map(|(i, p)| (PointId(i as u64), *p)).collect();
    let tree = Octree::from_points(OctreeConfig::default(), &pts)?;
    let degree = |r: f64| tree.build_neighbor_lists(r).map(|nl| nl.mean_degree());

    let diagonal = tree.bounds().diagonal();
    let mut hi = diagonal / (n as f64).cbrt();
    while degree(hi)? < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if degree(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !(hi > 0.0) {
        return Err(Error::input("particles coincide; no positive bandwidth reaches the target"));
    }
    Ok(hi * hi / 4.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvgdMode {
    Naive,
    Octree,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// Median heuristic, evaluated once on the initial particles.
    Median,
    Fixed(f64),
    /// [`neighbor_count_bandwidth`] on the initial particles.
    MeanNeighbors(f64),
}

#[derive(Clone, Debug)]
pub struct SvgdOptions {
    pub n: usize,
    pub iterations: usize,
    pub mode: SvgdMode,
    pub seed: u64,
    pub step_size: f64,
    pub bandwidth: Bandwidth,
    pub normalization: Normalization,
    /// Rebuild the octree from scratch every this many iterations; `None`
    /// maintains it incrementally.
    pub rebuild_every: Option<usize>,
    pub octree: OctreeConfig,
}

impl Default for SvgdOptions {
    fn default() -> Self {
        SvgdOptions {
            n: 100,
            iterations: 100,
            mode: SvgdMode::Octree,
            seed: 0,
            step_size: 0.05,
            bandwidth: Bandwidth::Median,
            normalization: Normalization::NeighborCount,
            rebuild_every: None,
            octree: OctreeConfig::default(),
        }
    }
}

/// Per-run record. `positions[0]` and `mean_log_density[0]` describe the
/// initial state; `wall_ms[t]` and `kernel_evals[t]` belong to iteration
/// `t + 1`.
#[derive(Clone, Debug)]
pub struct SvgdTrajectory {
    pub positions: Vec<Vec<Vec3>>,
    pub wall_ms: Vec<f64>,
    pub mean_log_density: Vec<f64>,
    pub kernel_evals: Vec<u64>,
    pub bandwidth: f64,
}

impl SvgdTrajectory {
    pub fn final_positions(&self) -> &[Vec3] {
        self.positions.last().expect("initial state is always recorded")
    }
}

/// `n` standard-normal particles drawn from `seed`.
pub fn initial_particles(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut p = [0.0; 3];
            for c in &mut p {
                *c = StandardNormal.sample(&mut rng);
            }
            p
        })
        .collect()
}

pub fn run_svgd(target: &TargetDistribution, opts: &SvgdOptions) -> Result<SvgdTrajectory> {
    if opts.n < 2 {
        return Err(Error::input("SVGD needs at least two particles"));
    }
    if opts.rebuild_every == Some(0) {
        return Err(Error::input("rebuild interval must be positive"));
    }
    let init = initial_particles(opts.n, opts.seed);
    let h = match opts.bandwidth {
        Bandwidth::Median => median_bandwidth(&init)?,
        Bandwidth::Fixed(h) => h,
        Bandwidth::MeanNeighbors(m) => neighbor_count_bandwidth(&init, m)?,
    };
    let mut ensemble = ParticleEnsemble::new(init, opts.step_size, h)?;
    let mut tree = match opts.mode {
        SvgdMode::Octree => Some(ensemble.build_octree(opts.octree)?),
        SvgdMode::Naive => None,
    };

    let mut traj = SvgdTrajectory {
        positions: vec![ensemble.positions.clone()],
        wall_ms: Vec::with_capacity(opts.iterations),
        mean_log_density: vec![ensemble.mean_log_density(target)],
        kernel_evals: Vec::with_capacity(opts.iterations),
        bandwidth: h,
    };
    for t in 0..opts.iterations {
        let start = Instant::now();
        let stats = match tree.as_mut() {
            None => svgd_step_naive(&mut ensemble, target),
            Some(tree) => {
                if opts.rebuild_every.is_some_and(|r| t > 0 && t % r == 0) {
                    *tree = ensemble.build_octree(opts.octree)?;
                }
                svgd_step_octree(&mut ensemble, target, tree, opts.normalization)?
            }
        };
        traj.wall_ms.push(start.elapsed().as_secs_f64() * 1e3);
        traj.kernel_evals.push(stats.kernel_evals);
        traj.positions.push(ensemble.positions.clone());
        traj.mean_log_density.push(ensemble.mean_log_density(target));
    }
    Ok(traj)
}
