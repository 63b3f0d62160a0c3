//! Small dense kernels generic over [`Real`], row-major `n×n` storage.

use crate::jets::Real;

/// Lower Cholesky factor of a symmetric matrix, or `None` if a pivot is not
/// positive (judged on the primal value).
pub fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d.re() > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ z = b`.
pub fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let l = cholesky(a, n)?;
    let mut inv = vec![T::zero(); n * n];
    for c in 0..n {
        let mut e = vec![T::zero(); n];
        e[c] = T::one();
        let col = cholesky_solve(&l, n, &e);
        for r in 0..n {
            inv[r * n + c] = col[r];
        }
    }
    Some(inv)
}

/// `sqrt(det a)` of a symmetric positive definite matrix.
pub fn spd_sqrt_det<T: Real>(a: &[T], n: usize) -> Option<T> {
    let l = cholesky(a, n)?;
    Some((0..n).fold(T::one(), |p, i| p * l[i * n + i]))
}

/// `v^T a w`.
pub fn quad<T: Real>(a: &[T], n: usize, v: &[T], w: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s += a[i * n + j] * v[i] * w[j];
        }
    }
    s
}

pub fn mat_vec<T: Real>(a: &[T], n: usize, v: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |s, j| s + a[i * n + j] * v[j]))
        .collect()
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&p, &q)| s + p * q)
}

pub(crate) fn nan<T: Real>() -> T {
    T::cst(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_determinant() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let inv = spd_inverse(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let p: f64 = (0..3).map(|k| a[i * 3 + k] * inv[k * 3 + j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let det = 4.0 * (3.0 * 2.0 - 0.04) - 1.0 * (2.0 - 0.1) + 0.5 * (0.2 - 1.5);
        assert!((spd_sqrt_det(&a, 3).unwrap() - f64::sqrt(det)).abs() < 1e-14);
        assert_eq!(spd_sqrt_det(&[4.0, 0.0, 0.0, 9.0], 2), Some(6.0));
    }

    #[test]
    fn indefinite_is_rejected() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
