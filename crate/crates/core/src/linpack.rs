//! Dense LU factorization with partial pivoting and the matching solve,
//! column-major, in single or double precision.

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LuError {
    #[error("matrix is singular: zero pivot in column {0}")]
    SingularMatrix(usize),
    #[error("matrix order must be positive")]
    Empty,
}

pub trait LuScalar:
    Copy
    + PartialOrd
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
{
    const ZERO: Self;
    const ONE: Self;
    const EPSILON: Self;
    fn abs(self) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

macro_rules! lu_scalar {
    ($t:ty) => {
        impl LuScalar for $t {
            const ZERO: Self = 0.0;
            const ONE: Self = 1.0;
            const EPSILON: Self = <$t>::EPSILON;
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

lu_scalar!(f32);
lu_scalar!(f64);

/// Factors the column-major `n × n` matrix `a` in place into `L U` with row
/// pivots recorded in `piv`.
pub fn lu_factor<T: LuScalar>(a: &mut [T], n: usize, piv: &mut [usize]) -> Result<(), LuError> {
    if n == 0 {
        return Err(LuError::Empty);
    }
    assert_eq!(a.len(), n * n);
    assert_eq!(piv.len(), n);
    for k in 0..n {
        let col = k * n;
        let mut p = k;
        let mut best = a[col + k].abs();
        for i in k + 1..n {
            let v = a[col + i].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[k] = p;
        if best == T::ZERO {
            return Err(LuError::SingularMatrix(k));
        }
        if p != k {
            for j in 0..n {
                a.swap(j * n + k, j * n + p);
            }
        }
        let inv = T::ONE / a[col + k];
        for i in k + 1..n {
            a[col + i] = a[col + i] * inv;
        }
        for j in k + 1..n {
            let t = a[j * n + k];
            if t == T::ZERO {
                continue;
            }
            for i in k + 1..n {
                a[j * n + i] = a[j * n + i] - t * a[col + i];
            }
        }
    }
    Ok(())
}

/// Solves `A x = b` in place given the output of [`lu_factor`].
pub fn lu_solve<T: LuScalar>(lu: &[T], n: usize, piv: &[usize], b: &mut [T]) {
    for k in 0..n {
        b.swap(k, piv[k]);
    }
    for k in 0..n {
        let t = b[k];
        for i in k + 1..n {
            b[i] = b[i] - t * lu[k * n + i];
        }
    }
    for k in (0..n).rev() {
        b[k] = b[k] / lu[k * n + k];
        let t = b[k];
        for i in 0..k {
            b[i] = b[i] - t * lu[k * n + i];
        }
    }
}

/// Nominal operation count of one factor-and-solve.
pub fn lu_flop_count(n: u64) -> u64 {
    2 * n * n * n / 3 + 2 * n * n
}

/// Column-major matrix with entries uniform in `[-0.5, 0.5)`.
pub fn random_matrix<T: LuScalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    (0..n * n).map(|_| T::from_f64(rng.random::<f64>() - 0.5)).collect()
}

pub fn mat_vec<T: LuScalar>(a: &[T], n: usize, x: &[T]) -> Vec<T> {
    let mut y = vec![T::ZERO; n];
    for j in 0..n {
        for i in 0..n {
            y[i] = y[i] + a[j * n + i] * x[j];
        }
    }
    y
}

/// `‖A x - b‖∞ / (n ‖A‖∞ ‖x‖∞ ε)`, the scale-free residual; values of
/// order one or ten indicate a correct solve.
pub fn normalized_residual<T: LuScalar>(a: &[T], n: usize, x: &[T], b: &[T]) -> f64 {
    let ax = mat_vec(a, n, x);
    let r = ax
        .iter()
        .zip(b)
        .map(|(&p, &q)| (p - q).to_f64().abs())
        .fold(0.0, f64::max);
    let norm_a = (0..n)
        .map(|i| (0..n).map(|j| a[j * n + i].to_f64().abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let norm_x = x.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    r / (n as f64 * norm_a * norm_x * T::EPSILON.to_f64())
}
