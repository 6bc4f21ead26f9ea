use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sq_dist;

pub(crate) struct Clustering {
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
}

/// Index of the nearest centroid, ties to the smaller index.
pub(crate) fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(c, v);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn kmeans_pp_seed(rows: &[&[f64]], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![rows[rng.random_range(0..rows.len())].to_vec()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = rows.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if target < *w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..rows.len())
        };
        let c = rows[pick].to_vec();
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// k-means++ seeding followed by Lloyd iterations until the assignment is
/// stable or `max_iterations` is reached. The returned assignment is always
/// nearest-centroid with respect to the returned centroids.
pub(crate) fn kmeans(rows: &[&[f64]], k: usize, max_iterations: usize, rng: &mut ChaCha8Rng) -> Clustering {
    let dim = rows[0].len();
    let mut centroids = kmeans_pp_seed(rows, k, rng);
    let mut assignment: Vec<usize> = rows.iter().map(|r| nearest(&centroids, r)).collect();
    for _ in 0..max_iterations {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (r, &a) in rows.iter().zip(&assignment) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(r.iter()) {
                *s += x;
            }
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            if n > 0 {
                *c = s.into_iter().map(|x| x / n as f64).collect();
            }
        }
        let next: Vec<usize> = rows.iter().map(|r| nearest(&centroids, r)).collect();
        let stable = next == assignment;
        assignment = next;
        if stable {
            break;
        }
    }
    Clustering { centroids, assignment }
}
