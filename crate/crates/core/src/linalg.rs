//! Dense singular value decomposition by one-sided Jacobi rotations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Thin SVD `a = u diag(sigma) v^T` with `k = min(m, n)` columns, sorted by
/// decreasing singular value. Columns of `u` belonging to zero singular values
/// are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        if a.nrows() >= a.ncols() {
            jacobi(a.clone())
        } else {
            let t = jacobi(a.transpose());
            Svd { u: t.v, sigma: t.sigma, v: t.u }
        }
    }

    /// Indices of singular values above `cutoff * sigma_max`.
    pub fn kept(&self, cutoff: f64) -> Vec<usize> {
        let top = self.sigma.iter().cloned().fold(0.0, f64::max);
        (0..self.sigma.len()).filter(|&i| top > 0.0 && self.sigma[i] > cutoff * top).collect()
    }

    /// Moore-Penrose inverse with the relative cutoff.
    pub fn pseudo_inverse(&self, cutoff: f64) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.v.nrows(), self.u.nrows());
        for i in self.kept(cutoff) {
            p += self.v.column(i) * self.u.column(i).transpose() / self.sigma[i];
        }
        p
    }
}

/// Hestenes iteration on the columns of a tall matrix.
fn jacobi(mut w: DMatrix<f64>) -> Svd {
    let n = w.ncols();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let m = w.nrows();
    let mut u = DMatrix::zeros(m, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut sigma = DVector::zeros(n);
    for (k, &j) in order.iter().enumerate() {
        sigma[k] = norms[j];
        if norms[j] > 0.0 {
            u.column_mut(k).copy_from(&(w.column(j) / norms[j]));
        }
        vs.column_mut(k).copy_from(&v.column(j));
    }
    Svd { u, sigma, v: vs }
}

fn rotate(m: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..m.nrows() {
        let (x, y) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * x - s * y;
        m[(i, q)] = s * x + c * y;
    }
}

/// Orthonormal basis of the complement of the span of the orthonormal columns `q`.
pub fn orthogonal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let n = q.nrows();
    let p = DMatrix::<f64>::identity(n, n) - q * q.transpose();
    let eig = SymmetricEigen::new(p);
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}
