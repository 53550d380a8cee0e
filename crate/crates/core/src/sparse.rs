//! Compressed sparse row storage with the iterative kernels the solver needs:
//! Jacobi-preconditioned conjugate gradients and Lanczos with full
//! reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries in the order they appear in the input, so the
    /// result depends only on the triplet sequence.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= n_rows || *c >= n_cols) {
            return Err(Error::invalid(format!("triplet ({r}, {c}) outside {n_rows}x{n_cols}")));
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));

        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for i in order {
            let (r, c, v) = triplets[i];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.n_rows) {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_rc - A_cr|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b - Ax‖ / ‖b‖`.
    pub relative_residual: f64,
}

/// Conjugate gradients with Jacobi preconditioning, stopping at
/// `‖b - Ax‖ ≤ tol ‖b‖`.
pub fn pcg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = b.len();
    if a.n_rows() != n || a.n_cols() != n {
        return Err(Error::invalid("pcg: dimension mismatch"));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { f64::NAN })
        .collect();
    if inv_diag.iter().any(|d| d.is_nan()) {
        return Err(Error::NotPositiveDefinite("non-positive diagonal entry".into()));
    }
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = 1.0;
    // Restarts from the true residual; the run stops once they stop helping.
    let mut best_true = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite(format!("p·Ap = {pap:e} at iteration {it}")));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        res = norm(&r) / bnorm;
        if res <= tol {
            let ax = a.mul_vec(&x);
            r = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let true_res = norm(&r) / bnorm;
            if true_res <= tol {
                return Ok(CgOutcome {
                    x,
                    iterations: it,
                    relative_residual: true_res,
                });
            }
            if true_res < 0.5 * best_true {
                stalled = 0;
            } else {
                stalled += 1;
            }
            best_true = best_true.min(true_res);
            res = true_res;
            if stalled >= 3 {
                return Err(Error::NotConverged {
                    iterations: it,
                    residual: true_res,
                });
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: res,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosOutcome {
    /// Ritz values, ascending.
    pub ritz: Vec<f64>,
    pub steps: usize,
    /// Whether the largest Ritz value met the residual test.
    pub converged: bool,
}

/// Deterministic, dense start vector.
pub(crate) fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|i| 1.5 + (0.7 * i as f64 + 0.3).sin()).collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Lanczos on a symmetric operator with full reorthogonalization. Stops after
/// `max_steps`, on breakdown, or when `tol > 0` and the largest Ritz pair has
/// residual `≤ tol · θ_max`.
pub fn lanczos<F>(n: usize, mut apply: F, max_steps: usize, tol: f64) -> Result<LanczosOutcome>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    if n == 0 {
        return Err(Error::invalid("lanczos on an empty operator"));
    }
    let m = max_steps.min(n).max(1);
    let mut q: Vec<Vec<f64>> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![0.0; n];
    let mut converged = false;
    let mut ritz = Vec::new();
    for k in 0..m {
        apply(&q[k], &mut w)?;
        let a = dot(&q[k], &w);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                for (wj, qj) in w.iter_mut().zip(qi) {
                    *wj -= c * qj;
                }
            }
        }
        let b = norm(&w);

        let t = tridiagonal(&alpha, &beta);
        let eig = SymmetricEigen::new(t);
        let (imax, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let resid = b * eig.eigenvectors[(k, imax)].abs();
        ritz = eig.eigenvalues.iter().copied().collect();
        ritz.sort_by(f64::total_cmp);
        if tol > 0.0 && resid <= tol * theta.abs() {
            converged = true;
            return Ok(LanczosOutcome {
                ritz,
                steps: k + 1,
                converged,
            });
        }
        if b <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE) || k + 1 == m {
            converged = converged || b <= 1e-14 * theta.abs().max(f64::MIN_POSITIVE) || k + 1 == n;
            return Ok(LanczosOutcome {
                ritz,
                steps: k + 1,
                converged,
            });
        }
        beta.push(b);
        q.push(w.iter().map(|x| x / b).collect());
    }
    Ok(LanczosOutcome {
        ritz,
        steps: m,
        converged,
    })
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Dirichlet Laplacian `tridiag(-1, 2, -1)`.
    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]).unwrap();
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.mul_vec(&[1.0, 2.0, 3.0]), vec![0.0, 4.5]);
        assert!(CsrMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn cg_solves_laplacian() {
        let n = 50;
        let a = laplace_1d(n);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.mul_vec(&x_true);
        let out = pcg(&a, &b, 1e-12, 10 * n).unwrap();
        assert!(out.relative_residual <= 1e-12);
        for (x, y) in out.x.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!(matches!(
            pcg(&a, &b, 1e-12, 3),
            Err(Error::NotConverged { iterations: 3, .. })
        ));
        assert_eq!(pcg(&a, &vec![0.0; n], 1e-12, 1).unwrap().x, vec![0.0; n]);
    }

    #[test]
    fn lanczos_extreme_eigenvalues() {
        let n = 200;
        let a = laplace_1d(n);
        let h = std::f64::consts::PI / (n + 1) as f64;
        let lmax = 2.0 - 2.0 * (n as f64 * h).cos();
        let out = lanczos(n, |x, y| Ok(a.mul_vec_into(x, y)), 200, 1e-10).unwrap();
        assert!(out.converged);
        assert!((out.ritz.last().unwrap() - lmax).abs() < 1e-8 * lmax);
        let few = lanczos(n, |x, y| Ok(a.mul_vec_into(x, y)), 20, 0.0).unwrap();
        assert_eq!(few.steps, 20);
        assert!(few.ritz[0] > 0.0);
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let a = laplace_1d(5);
        assert_eq!(a.symmetry_defect(), 0.0);
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 0.5)]).unwrap();
        assert_eq!(b.symmetry_defect(), 0.5);
    }
}
