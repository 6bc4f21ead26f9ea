use dynoct::metrics::*;
use dynoct::workload::uniform_cloud;
use dynoct::Vec3;

fn brute_neighbors(points: &[Vec3], i: usize, k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..points.len())
        .filter(|&j| j != i)
        .map(|j| ((0..3).map(|a| (points[i][a] - points[j][a]).powi(2)).sum(), j))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().take(k).map(|e| e.1).collect()
}

fn norm(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|c| (a[c] - b[c]).powi(2)).sum::<f64>().sqrt()
}

fn brute_distortion(x: &[Vec3], z: &[Vec3], k: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let nb = brute_neighbors(x, i, k);
            let mz = nb.iter().map(|&j| norm(&z[i], &z[j])).sum::<f64>() / k as f64;
            let mx = nb.iter().map(|&j| norm(&x[i], &x[j])).sum::<f64>() / k as f64;
            mz / mx
        })
        .collect()
}

fn brute_jaccard(x: &[Vec3], z: &[Vec3], k: usize) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let a = brute_neighbors(x, i, k);
            let b = brute_neighbors(z, i, k);
            let inter = a.iter().filter(|j| b.contains(j)).count();
            inter as f64 / (a.len() + b.len() - inter) as f64
        })
        .collect()
}

fn nonlinear(x: &[Vec3]) -> Vec<Vec3> {
    x.iter().map(|p| [p[0] + 0.3 * (4.0 * p[1]).sin(), p[1] * p[1] + p[2], (p[0] * p[2]).exp()]).collect()
}

fn close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
    }
}

#[test]
fn distortion_and_jaccard_match_brute_force() {
    let x: Vec<Vec3> = uniform_cloud(500, 21).into_iter().map(|e| e.1).collect();
    let z = nonlinear(&x);
    let pairs = PairedPointSets::new(x.clone(), z.clone(), DEFAULT_K).unwrap();
    close(&neighborhood_distortion(&pairs).unwrap().values, &brute_distortion(&x, &z, DEFAULT_K));
    close(&neighborhood_jaccard(&pairs).unwrap().values, &brute_jaccard(&x, &z, DEFAULT_K));
}

#[test]
fn random_permutation_jaccard_is_near_chance() {
    let x: Vec<Vec3> = uniform_cloud(500, 4).into_iter().map(|e| e.1).collect();
    // Fixed-stride permutation decorrelates the two neighborhoods.
    let z: Vec<Vec3> = (0..500).map(|i| x[(i * 211 + 17) % 500]).collect();
    let pairs = PairedPointSets::new(x.clone(), z.clone(), 10).unwrap();
    let got = neighborhood_jaccard(&pairs).unwrap();
    close(&got.values, &brute_jaccard(&x, &z, 10));
    // Two random 10-subsets of 499 share ~0.2 points: Jaccard ~0.01.
    assert!(got.mean < 0.05, "{}", got.mean);
}

#[test]
fn rigid_motion_keeps_jaccard() {
    let x: Vec<Vec3> = uniform_cloud(300, 8).into_iter().map(|e| e.1).collect();
    let (s, c) = 0.7f64.sin_cos();
    let z: Vec<Vec3> = x.iter().map(|p| [c * p[0] - s * p[1] + 3.0, s * p[0] + c * p[1] - 1.0, p[2] + 0.5]).collect();
    let pairs = PairedPointSets::new(x, z, 8).unwrap();
    assert!(neighborhood_jaccard(&pairs).unwrap().values.iter().all(|&v| v == 1.0));
}

#[test]
fn distortion_scales_with_z() {
    let x: Vec<Vec3> = uniform_cloud(200, 3).into_iter().map(|e| e.1).collect();
    let z = nonlinear(&x);
    let base = neighborhood_distortion(&PairedPointSets::new(x.clone(), z.clone(), 6).unwrap()).unwrap();
    let z3: Vec<Vec3> = z.iter().map(|p| p.map(|v| 3.0 * v)).collect();
    let scaled = neighborhood_distortion(&PairedPointSets::new(x, z3, 6).unwrap()).unwrap();
    for (a, b) in base.values.iter().zip(&scaled.values) {
        assert!((3.0 * a - b).abs() < 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn curvature_ignores_added_constant_velocity() {
    let samples: Vec<Vec<Vec3>> =
        (0..20).map(|i| (0..7).map(|t| [((i + t) as f64).sin(), (t * t) as f64 * 0.1, i as f64]).collect()).collect();
    let drifted: Vec<Vec<Vec3>> = samples
        .iter()
        .map(|s| s.iter().enumerate().map(|(t, p)| [p[0] + 0.5 * t as f64, p[1] - 2.0 * t as f64, p[2]]).collect())
        .collect();
    let a = trajectory_curvature(&Trajectory::new(samples).unwrap());
    let b = trajectory_curvature(&Trajectory::new(drifted).unwrap());
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-12);
    }
}
