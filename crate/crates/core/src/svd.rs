//! One-sided Jacobi (Hestenes) singular value decomposition.
//!
//! Slower than bidiagonalization but simple, reentrant, and accurate for the
//! small singular values that decide numerical rank of ill-conditioned
//! Hankel matrices.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U·diag(σ)·Vᵀ` with `σ` non-increasing.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// `rows × k` left singular vectors (columns), `k = min(rows, cols)`.
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    /// `cols × k` right singular vectors (columns).
    pub v: Matrix<T>,
}

pub(crate) fn check_finite<T: Real>(matrix: &Matrix<T>) -> Result<()> {
    match matrix.as_slice().iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn svd<T: Real>(matrix: &Matrix<T>) -> Result<Svd<T>> {
    check_finite(matrix)?;
    let (rows, cols) = matrix.shape();
    if rows < cols {
        let t = svd(&matrix.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    // work column-major: columns of A are orthogonalized in place
    let mut a: Vec<Vec<T>> = (0..cols)
        .map(|j| (0..rows).map(|i| matrix[(i, j)]).collect())
        .collect();
    let mut v: Vec<Vec<T>> = (0..cols)
        .map(|j| {
            (0..cols)
                .map(|i| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = a[p].iter().zip(&a[q]).fold(
                    (T::zero(), T::zero(), T::zero()),
                    |(al, be, ga), (&x, &y)| (al + x * x, be + y * y, ga + x * y),
                );
                if gamma == T::zero() || alpha == T::zero() || beta == T::zero() {
                    continue;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = (T::one() + t * t).sqrt().recip();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = a
        .iter()
        .enumerate()
        .map(|(j, col)| (col.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));

    let sigma: Vec<T> = order.iter().map(|&(s, _)| s).collect();
    let u = Matrix::from_fn(rows, cols, |i, k| {
        let (s, j) = order[k];
        if s > T::zero() {
            a[j][i] / s
        } else {
            T::zero()
        }
    });
    let v = Matrix::from_fn(cols, cols, |i, k| v[order[k].1][i]);
    Ok(Svd { u, sigma, v })
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}
