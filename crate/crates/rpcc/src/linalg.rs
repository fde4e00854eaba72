//! Dense linear-algebra kernels used internally: Cholesky factorization
//! with multi-right-hand-side solves, and symmetric eigenvalue extraction.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
pub(crate) struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    /// Factor `a = L L^T`. Fails if `a` is not positive definite.
    pub(crate) fn new(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Shape(format!(
                "cholesky needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        let mut l = a.clone();
        {
            let ls = l
                .as_slice_mut()
                .expect("cholesky input must be standard layout");
            for j in 0..n {
                let mut diag = ls[j * n + j];
                for k in 0..j {
                    diag -= ls[j * n + k] * ls[j * n + k];
                }
                if diag <= 0.0 || !diag.is_finite() {
                    return Err(Error::NonConvergence(format!(
                        "matrix not positive definite at pivot {j}"
                    )));
                }
                let d = diag.sqrt();
                ls[j * n + j] = d;
                for i in (j + 1)..n {
                    let (prev, cur) = ls.split_at_mut(i * n);
                    let row_j = &prev[j * n..j * n + j];
                    let row_i = &mut cur[..n];
                    let mut s = row_i[j];
                    for k in 0..j {
                        s -= row_i[k] * row_j[k];
                    }
                    row_i[j] = s / d;
                }
                for k in (j + 1)..n {
                    ls[j * n + k] = 0.0;
                }
            }
        }
        Ok(Self { l })
    }

    pub(crate) fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve `(L L^T) X = B` in place, where the rows of `b` are the
    /// unknown vectors (n rows, any number of columns).
    pub(crate) fn solve_rows(&self, b: &mut Array2<f64>) {
        let n = self.dim();
        assert_eq!(b.nrows(), n, "rhs row count must match factor dimension");
        let m = b.ncols();
        let ls = self.l.as_slice().unwrap();
        let bs = b.as_slice_mut().expect("rhs must be standard layout");
        // Forward: L y = b.
        for i in 0..n {
            let (prev, cur) = bs.split_at_mut(i * m);
            let row_i = &mut cur[..m];
            for k in 0..i {
                let c = ls[i * n + k];
                if c != 0.0 {
                    let row_k = &prev[k * m..k * m + m];
                    for (x, &y) in row_i.iter_mut().zip(row_k) {
                        *x -= c * y;
                    }
                }
            }
            let d = ls[i * n + i];
            for x in row_i.iter_mut() {
                *x /= d;
            }
        }
        // Backward: L^T x = y.
        for i in (0..n).rev() {
            let (cur, next) = bs.split_at_mut((i + 1) * m);
            let row_i = &mut cur[i * m..];
            for k in (i + 1)..n {
                let c = ls[k * n + i];
                if c != 0.0 {
                    let row_k = &next[(k - i - 1) * m..(k - i - 1) * m + m];
                    for (x, &y) in row_i.iter_mut().zip(row_k) {
                        *x -= c * y;
                    }
                }
            }
            let d = ls[i * n + i];
            for x in row_i.iter_mut() {
                *x /= d;
            }
        }
    }
}

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations. Intended for moderate dimensions (a few hundred).
pub(crate) fn sym_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[[0, 0]]];
    }
    let mut m = a.clone();
    let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += m[[p, q]].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Largest and smallest eigenvalues of a symmetric positive semidefinite
/// matrix by power iteration and Cholesky-based inverse iteration, to the
/// given residual tolerance. Used instead of a full decomposition when the
/// matrix is large.
pub(crate) fn extreme_eigs_iterative(a: &Array2<f64>, tol: f64) -> (f64, f64) {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    let matvec = |v: &[f64], out: &mut [f64]| {
        let s = a.as_slice().unwrap();
        for i in 0..n {
            let row = &s[i * n..(i + 1) * n];
            out[i] = row.iter().zip(v).map(|(x, y)| x * y).sum();
        }
    };
    let normalize = |v: &mut [f64]| {
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
        }
        nrm
    };

    // Power iteration for the largest eigenvalue.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 1e-3).collect();
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut lam_max = 0.0;
    for _ in 0..20_000 {
        matvec(&v, &mut av);
        lam_max = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        let resid: f64 = av
            .iter()
            .zip(&v)
            .map(|(x, y)| (x - lam_max * y).powi(2))
            .sum::<f64>()
            .sqrt();
        v.copy_from_slice(&av);
        normalize(&mut v);
        if resid <= tol * lam_max.abs().max(1.0) {
            break;
        }
    }

    // Inverse iteration for the smallest eigenvalue.
    let lam_min = match Cholesky::new(a) {
        Err(_) => 0.0, // singular within working precision
        Ok(chol) => {
            let mut w: Vec<f64> = (0..n).map(|i| 1.0 - (i as f64) * 1e-3).collect();
            normalize(&mut w);
            let mut lam = 0.0;
            for _ in 0..20_000 {
                let mut b = Array2::from_shape_vec((n, 1), w.clone()).unwrap();
                chol.solve_rows(&mut b);
                let mut next: Vec<f64> = b.iter().copied().collect();
                normalize(&mut next);
                matvec(&next, &mut av);
                lam = next.iter().zip(&av).map(|(x, y)| x * y).sum();
                let resid: f64 = av
                    .iter()
                    .zip(&next)
                    .map(|(x, y)| (x - lam * y).powi(2))
                    .sum::<f64>()
                    .sqrt();
                w = next;
                if resid <= tol * lam.abs().max(1.0) {
                    break;
                }
            }
            lam
        }
    };
    (lam_max, lam_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn cholesky_solves_small_system() {
        let a = arr2(&[[4.0, 2.0, 0.0], [2.0, 5.0, 1.0], [0.0, 1.0, 3.0]]);
        let chol = Cholesky::new(&a).unwrap();
        let mut b = arr2(&[[2.0, 4.0], [1.0, 5.0], [3.0, 6.0]]);
        chol.solve_rows(&mut b);
        let recon = a.dot(&b);
        let expect = arr2(&[[2.0, 4.0], [1.0, 5.0], [3.0, 6.0]]);
        for (x, y) in recon.iter().zip(expect.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = arr2(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(Cholesky::new(&a).is_err());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // diag(1, 2, 3) conjugated by a rotation keeps its spectrum.
        let a = arr2(&[
            [2.0, -1.0, 0.0],
            [-1.0, 2.0, -1.0],
            [0.0, -1.0, 2.0],
        ]);
        let eigs = sym_eigenvalues(&a);
        let sqrt2 = 2.0f64.sqrt();
        let expect = [2.0 - sqrt2, 2.0, 2.0 + sqrt2];
        for (x, y) in eigs.iter().zip(expect.iter()) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn iterative_extremes_match_jacobi() {
        let a = arr2(&[
            [5.0, 1.0, 0.5, 0.0],
            [1.0, 4.0, 0.2, 0.1],
            [0.5, 0.2, 3.0, 0.3],
            [0.0, 0.1, 0.3, 2.0],
        ]);
        let eigs = sym_eigenvalues(&a);
        let (hi, lo) = extreme_eigs_iterative(&a, 1e-10);
        assert!((hi - eigs[3]).abs() < 1e-8);
        assert!((lo - eigs[0]).abs() < 1e-8);
    }
}
