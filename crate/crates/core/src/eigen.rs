//! Iterative symmetric eigensolvers for the lowest few states.
//!
//! [`lowest_eigenpairs`] is a thick-restart Lanczos with full
//! reorthogonalisation, suited to the envelope and chain problems where a
//! handful of vectors of moderate length are needed. [`ground_energy`] is a
//! storage-free three-term Lanczos for very large operators where only the
//! lowest eigenvalue is wanted.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Real symmetric linear operator.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub n_eigen: usize,
    /// Maximum basis size per restart cycle.
    pub krylov_dim: usize,
    /// Residual norm ‖A y - θ y‖ required for every requested pair.
    pub tol: f64,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            n_eigen: 1,
            krylov_dim: 60,
            tol: 1e-8,
            max_restarts: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, same order as `values`.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Total operator applications.
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalise `v` against `basis` (two passes of classical Gram-Schmidt)
/// and return its remaining norm before normalisation.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|b| dot(b, v)).collect();
        for (c, b) in coeffs.iter().zip(basis) {
            axpy(-c, b, v);
        }
    }
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest `opts.n_eigen` eigenpairs of `op`, starting from `start`.
///
/// Deterministic for a given start vector. Fails with
/// [`Error::NoConvergence`] when the residual tolerance is not met within
/// `opts.max_restarts` cycles.
pub fn lowest_eigenpairs(
    op: &dyn SymmetricOperator,
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::param("start", "length does not match operator"));
    }
    let nev = opts.n_eigen.max(1);
    if nev > n {
        return Err(Error::param("n_eigen", "exceeds operator dimension"));
    }
    let m_max = opts.krylov_dim.max(nev + 8).min(n);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m_max);
    let mut matvecs = 0;

    let mut next = start.to_vec();
    if orthonormalize(&mut next, &basis) == 0.0 {
        return Err(Error::param("start", "zero start vector"));
    }

    let mut last_residual = f64::INFINITY;
    for _cycle in 0..=opts.max_restarts {
        // Extend the basis with Krylov vectors until full or invariant.
        let mut candidate = Some(next.clone());
        while basis.len() < m_max {
            let Some(v) = candidate.take() else { break };
            let mut w = vec![0.0; n];
            op.apply(&v, &mut w);
            matvecs += 1;
            basis.push(v);
            let mut nv = w.clone();
            images.push(w);
            let nrm = orthonormalize(&mut nv, &basis);
            let scale = norm(images.last().unwrap()).max(1.0);
            if nrm > 1e-12 * scale {
                candidate = Some(nv);
            } else if basis.len() < n {
                // Invariant subspace found; continue with a fresh direction.
                let mut fresh: Vec<f64> = (0..n)
                    .map(|i| ((i * 2_654_435_761usize) % 1000) as f64 / 1000.0 - 0.5)
                    .collect();
                if orthonormalize(&mut fresh, &basis) > 1e-8 {
                    candidate = Some(fresh);
                }
            }
        }

        let m = basis.len();
        let mut h = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let keep = (nev + 2).min(m);
        let mut ritz_vecs = Vec::with_capacity(keep);
        let mut ritz_imgs = Vec::with_capacity(keep);
        let mut values = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for &k in order.iter().take(keep) {
            let s = eig.eigenvectors.column(k);
            let mut y = vec![0.0; n];
            let mut ay = vec![0.0; n];
            for j in 0..m {
                axpy(s[j], &basis[j], &mut y);
                axpy(s[j], &images[j], &mut ay);
            }
            let theta = eig.eigenvalues[k];
            let r: f64 = ay
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            values.push(theta);
            residuals.push(r);
            ritz_vecs.push(y);
            ritz_imgs.push(ay);
        }

        let worst = residuals[..nev].iter().copied().fold(0.0, f64::max);
        last_residual = worst;
        if worst <= opts.tol || m == n {
            return Ok(EigenPairs {
                values: values[..nev].to_vec(),
                vectors: ritz_vecs[..nev].to_vec(),
                residuals: residuals[..nev].to_vec(),
                matvecs,
            });
        }

        // Thick restart: keep the lowest Ritz pairs, continue from the
        // residual of the least converged wanted pair.
        let target = (0..nev)
            .max_by(|&a, &b| residuals[a].total_cmp(&residuals[b]))
            .unwrap();
        let mut r: Vec<f64> = ritz_imgs[target]
            .iter()
            .zip(&ritz_vecs[target])
            .map(|(a, b)| a - values[target] * b)
            .collect();
        basis = Vec::with_capacity(m_max);
        images = Vec::with_capacity(m_max);
        for (y, ay) in ritz_vecs.into_iter().zip(ritz_imgs) {
            basis.push(y);
            images.push(ay);
        }
        // Re-orthonormalise the kept vectors to remove drift.
        for i in 0..basis.len() {
            let (done, rest) = basis.split_at_mut(i);
            let nrm = orthonormalize(&mut rest[0], done);
            if (nrm - 1.0).abs() > 1e-6 {
                let mut w = vec![0.0; n];
                op.apply(&rest[0], &mut w);
                matvecs += 1;
                images[i] = w;
            }
        }
        if orthonormalize(&mut r, &basis) <= 1e-14 {
            let mut fresh: Vec<f64> = (0..n)
                .map(|i| ((i * 40_503usize) % 977) as f64 / 977.0 - 0.5)
                .collect();
            orthonormalize(&mut fresh, &basis);
            r = fresh;
        }
        next = r;
    }
    Err(Error::NoConvergence {
        iterations: matvecs,
        residual: last_residual,
    })
}

/// Lowest eigenvalue of a symmetric tridiagonal matrix with diagonal `a`
/// and off-diagonal `b` (`b.len() == a.len() - 1`), by Sturm bisection.
pub fn tridiagonal_lowest(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < n { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            d = a[i] - x - if i > 0 { off / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ground-state energy by plain three-term Lanczos without stored basis.
///
/// `project` is applied to every new Lanczos vector; use it to confine the
/// iteration to a symmetry sector. Convergence is declared when the lowest
/// Ritz value changes by less than `tol` between checks spaced
/// `check_every` iterations apart.
pub fn ground_energy(
    op: &dyn SymmetricOperator,
    start: &[f64],
    project: Option<&dyn Fn(&mut [f64])>,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let n = op.dim();
    let mut v = start.to_vec();
    if let Some(p) = project {
        p(&mut v);
    }
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::param("start", "zero after projection"));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut beta_prev = 0.0;
    let check_every = 25;
    let mut last = f64::INFINITY;
    let mut stable = 0;
    for it in 0..max_iter {
        op.apply(&v, &mut w);
        let alpha = dot(&w, &v);
        for i in 0..n {
            w[i] -= alpha * v[i] + beta_prev * v_prev[i];
        }
        if let Some(p) = project {
            p(&mut w);
        }
        alphas.push(alpha);
        let beta = norm(&w);
        if (it + 1) % check_every == 0 || beta < 1e-14 {
            let e = tridiagonal_lowest(&alphas, &betas);
            if (e - last).abs() < tol {
                stable += 1;
                if stable >= 2 {
                    return Ok(e);
                }
            } else {
                stable = 0;
            }
            last = e;
            if beta < 1e-14 {
                return Ok(e);
            }
        }
        betas.push(beta);
        std::mem::swap(&mut v_prev, &mut v);
        for i in 0..n {
            v[i] = w[i] / beta;
        }
        beta_prev = beta;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: f64::NAN,
    })
}

/// Dense matrix wrapper, mainly for tests and small problems.
pub struct DenseOperator(pub DMatrix<f64>);

impl SymmetricOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.nrows();
        for i in 0..n {
            y[i] = (0..n).map(|j| self.0[(i, j)] * x[j]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                2.0 + 0.01 * i as f64
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn matches_dense_solver() {
        let h = laplacian(150);
        let dense = SymmetricEigen::new(h.clone());
        let mut exact: Vec<f64> = dense.eigenvalues.iter().copied().collect();
        exact.sort_by(f64::total_cmp);
        let op = DenseOperator(h);
        let start = vec![1.0; 150];
        let opts = LanczosOptions {
            n_eigen: 3,
            krylov_dim: 30,
            tol: 1e-9,
            max_restarts: 500,
        };
        let res = lowest_eigenpairs(&op, &start, &opts).unwrap();
        for k in 0..3 {
            assert!((res.values[k] - exact[k]).abs() < 1e-9, "{k}");
        }
    }

    #[test]
    fn tridiagonal_bisection() {
        let a = vec![2.0; 50];
        let b = vec![-1.0; 49];
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / 51.0).cos();
        assert!((tridiagonal_lowest(&a, &b) - exact).abs() < 1e-12);
    }

    #[test]
    fn plain_lanczos_ground() {
        let h = laplacian(120);
        let dense = SymmetricEigen::new(h.clone());
        let exact = dense
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let op = DenseOperator(h);
        let e = ground_energy(&op, &vec![1.0; 120], None, 1e-12, 5000).unwrap();
        assert!((e - exact).abs() < 1e-9);
    }
}
