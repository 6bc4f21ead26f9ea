use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Affine map from D dimensions to 3: `x -> axes . (x - mean)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// Orthonormal rows spanning the leading principal subspace.
    pub axes: [Vec<f64>; 3],
}

impl Projection {
    pub fn apply(&self, v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, axis) in out.iter_mut().zip(&self.axes) {
            *o = axis.iter().zip(v).zip(&self.mean).map(|((a, x), m)| a * (x - m)).sum();
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt on `vs` in order; a vector that collapses is replaced by the
/// first standard basis direction that survives orthogonalization.
fn orthonormalize(vs: &mut [Vec<f64>]) {
    let dim = vs[0].len();
    for i in 0..vs.len() {
        let mut basis = 0;
        loop {
            for j in 0..i {
                let (done, rest) = vs.split_at_mut(i);
                let p = dot(&rest[0], &done[j]);
                for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                    *x -= p * y;
                }
            }
            let norm = dot(&vs[i], &vs[i]).sqrt();
            if norm > 1e-10 {
                vs[i].iter_mut().for_each(|x| *x /= norm);
                break;
            }
            // Degenerate direction (rank-deficient cluster): any completion
            // of the basis projects the same way.
            vs[i] = vec![0.0; dim];
            vs[i][basis % dim] = 1.0;
            basis += 1;
        }
    }
}

/// Rank-3 PCA by subspace iteration on the implicit covariance of `rows`.
pub(crate) fn fit(rows: &[&[f64]], iterations: usize, rng: &mut ChaCha8Rng) -> Projection {
    let dim = rows[0].len();
    let m = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (s, x) in mean.iter_mut().zip(r.iter()) {
            *s += x;
        }
    }
    mean.iter_mut().for_each(|s| *s /= m);
    let centered: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&mean).map(|(x, mu)| x - mu).collect()).collect();

    let mut basis: Vec<Vec<f64>> = (0..3).map(|_| (0..dim).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
    orthonormalize(&mut basis);
    for _ in 0..iterations {
        let mut next = vec![vec![0.0; dim]; 3];
        for c in &centered {
            for (nv, v) in next.iter_mut().zip(&basis) {
                let w = dot(c, v) / m;
                for (o, x) in nv.iter_mut().zip(c) {
                    *o += w * x;
                }
            }
        }
        basis = next;
        orthonormalize(&mut basis);
    }
    let [a, b, c]: [Vec<f64>; 3] = basis.try_into().expect("three axes");
    Projection { mean, axes: [a, b, c] }
}
