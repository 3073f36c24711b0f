//! Thick-restart Lanczos for a few extremal eigenpairs of a symmetric
//! operator that is only available through matrix-vector products.

use ndarray::Array2;

use super::dense::{symmetric_eigen, SymEigen};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    LargestAlgebraic,
    LargestMagnitude,
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    /// Residual tolerance relative to the largest Ritz value magnitude.
    pub tol: f64,
    pub max_restarts: usize,
    /// Subspace size before a restart; chosen from `k` when `None`.
    pub subspace: Option<usize>,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_restarts: 1000,
            subspace: None,
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram-Schmidt against `basis`.
fn orthogonalize<T: Real>(v: &mut [T], basis: &[Vec<T>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * *y;
            }
        }
    }
}

fn ranked(values: &[impl Real], which: Which) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = match which {
            Which::LargestAlgebraic => (values[j], values[i]),
            Which::LargestMagnitude => (values[j].abs(), values[i].abs()),
        };
        a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

/// Top `k` eigenpairs of the symmetric operator `op` on `R^n`, ordered by
/// `which` (largest first). Eigenvectors are the columns of the result.
pub fn top_eigenpairs<T, F>(
    n: usize,
    k: usize,
    op: F,
    which: Which,
    options: KrylovOptions,
) -> Result<SymEigen<T>>
where
    T: Real,
    F: Fn(&[T]) -> Vec<T>,
{
    if k == 0 || k > n {
        return Err(Error::TooManyComponents {
            requested: k,
            available: n,
        });
    }
    let ncv = options
        .subspace
        .unwrap_or_else(|| (2 * k + 20).max(40))
        .clamp(k + 1, n.max(k + 1))
        .min(n);
    let tol = T::from_f64_lossy(options.tol);

    let mut seed = 0x9e37_79b9_7f4a_7c15u64;
    let mut fresh = |len: usize| -> Vec<T> {
        (0..len)
            .map(|_| {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                T::from_f64_lossy((seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            })
            .collect()
    };

    let mut basis: Vec<Vec<T>> = Vec::with_capacity(ncv);
    let mut images: Vec<Vec<T>> = Vec::with_capacity(ncv);
    let mut candidate: Vec<T> = (0..n)
        .map(|i| T::one() + T::from_f64_lossy(0.25 * ((i + 1) as f64).sin()))
        .collect();

    for restart in 0..=options.max_restarts {
        while basis.len() < ncv {
            let before = norm(&candidate);
            orthogonalize(&mut candidate, &basis);
            let mut after = norm(&candidate);
            if !(after > T::from_f64_lossy(1e-10) * before) {
                candidate = fresh(n);
                orthogonalize(&mut candidate, &basis);
                after = norm(&candidate);
                if !(after > T::from_f64_lossy(1e-10)) {
                    break;
                }
            }
            for x in candidate.iter_mut() {
                *x /= after;
            }
            let image = op(&candidate);
            basis.push(std::mem::take(&mut candidate));
            candidate = image.clone();
            images.push(image);
        }

        let m = basis.len();
        let mut h = Array2::<T>::zeros((m, m));
        for i in 0..m {
            for j in 0..=i {
                let x = (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
                    / (T::one() + T::one());
                h[[i, j]] = x;
                h[[j, i]] = x;
            }
        }
        let small = symmetric_eigen(&h)?;
        let order = ranked(&small.values, which);
        let anorm = small
            .values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
            .max(T::eps());

        let ritz = |col: usize| -> (Vec<T>, Vec<T>) {
            let mut x = vec![T::zero(); n];
            let mut ax = vec![T::zero(); n];
            for j in 0..m {
                let c = small.vectors[[j, col]];
                for i in 0..n {
                    x[i] += c * basis[j][i];
                    ax[i] += c * images[j][i];
                }
            }
            (x, ax)
        };

        let mut first_unconverged: Option<Vec<T>> = None;
        let mut worst = T::zero();
        for &col in order.iter().take(k) {
            let (x, ax) = ritz(col);
            let theta = small.values[col];
            let r: Vec<T> = ax.iter().zip(&x).map(|(a, b)| *a - theta * *b).collect();
            let rn = norm(&r);
            worst = worst.max(rn / anorm);
            if rn > tol * anorm && first_unconverged.is_none() {
                first_unconverged = Some(r);
            }
        }

        if first_unconverged.is_none() || m == n {
            let mut vectors = Array2::zeros((n, k));
            let mut values = Vec::with_capacity(k);
            for (out, &col) in order.iter().take(k).enumerate() {
                let (x, _) = ritz(col);
                for i in 0..n {
                    vectors[[i, out]] = x[i];
                }
                values.push(small.values[col]);
            }
            return Ok(SymEigen { values, vectors });
        }
        if restart == options.max_restarts {
            return Err(Error::NoConvergence {
                iterations: restart,
                residual: worst.as_f64(),
            });
        }

        let keep = (k + k / 2 + 1).min(m - 1).max(k.min(m - 1));
        let mut new_basis = Vec::with_capacity(ncv);
        let mut new_images = Vec::with_capacity(ncv);
        for &col in order.iter().take(keep) {
            let (x, ax) = ritz(col);
            new_basis.push(x);
            new_images.push(ax);
        }
        basis = new_basis;
        images = new_images;
        candidate = first_unconverged.expect("checked above");
    }
    unreachable!("loop returns on the final restart")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64 / n as f64 - 0.6).collect();
        let op = |v: &[f64]| v.iter().zip(&diag).map(|(x, d)| x * d).collect();
        let eig = top_eigenpairs(n, 4, op, Which::LargestAlgebraic, KrylovOptions::default()).unwrap();
        let mut sorted = diag.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in eig.values.iter().zip(&sorted) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }

        let eig = top_eigenpairs(n, 2, op, Which::LargestMagnitude, KrylovOptions::default()).unwrap();
        assert!((eig.values[0] + 0.6).abs() < 1e-8);
    }

    #[test]
    fn tiny_space_is_exact() {
        let a = [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]];
        let op = |v: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * v[j]).sum()).collect();
        let eig = top_eigenpairs(3, 3, op, Which::LargestAlgebraic, KrylovOptions::default()).unwrap();
        assert!((eig.values[0] - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((eig.values[2] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
    }
}
