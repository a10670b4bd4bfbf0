//! 3×3 complex matrices, SU(3) link variables and the SU(2) subgroups used
//! by the link updates.
//!
//! Storage is row-major, `m[row][col]`. All arithmetic is double precision.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::rng::RngKey;

/// Tolerance on `U†U - I` and `det U - 1` accepted for a stored link.
pub const UNITARITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Su3Error {
    #[error("degenerate matrix: rows are linearly dependent")]
    DegenerateMatrix,
    #[error("matrix is not special unitary (deviation {0:e})")]
    NotSpecialUnitary(f64),
}

/// General 3×3 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex3x3 {
    pub m: [[Complex64; 3]; 3],
}

impl Default for Complex3x3 {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Complex3x3 {
    pub const ZERO: Self = Self { m: [[ZERO; 3]; 3] };
    pub const IDENTITY: Self = Self {
        m: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
    };

    pub fn from_rows(m: [[Complex64; 3]; 3]) -> Self {
        Self { m }
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        let mut r = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[j][i].conj();
            }
        }
        r
    }

    #[inline]
    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    #[inline]
    pub fn trace_re(&self) -> f64 {
        self.m[0][0].re + self.m[1][1].re + self.m[2][2].re
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut r = *self;
        r.m.iter_mut().flatten().for_each(|z| *z *= s);
        r
    }

    /// `self · other†` without materializing the adjoint.
    #[inline]
    pub fn mul_adj(&self, other: &Self) -> Self {
        let mut r = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[i][0] * other.m[j][0].conj()
                    + self.m[i][1] * other.m[j][1].conj()
                    + self.m[i][2] * other.m[j][2].conj();
            }
        }
        r
    }

    /// `self† · other` without materializing the adjoint.
    #[inline]
    pub fn adj_mul(&self, other: &Self) -> Self {
        let mut r = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = self.m[0][i].conj() * other.m[0][j]
                    + self.m[1][i].conj() * other.m[1][j]
                    + self.m[2][i].conj() * other.m[2][j];
            }
        }
        r
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max absolute entry of `M†M - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adj_mul(self);
        let mut dev = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { ONE } else { ZERO };
                dev = dev.max((p.m[i][j] - target).norm());
            }
        }
        dev
    }

    /// Larger of the unitarity deviation and `|det - 1|`.
    pub fn su3_deviation(&self) -> f64 {
        self.unitarity_deviation().max((self.det() - ONE).norm())
    }

    /// Row-major `(re, im)` pairs, 18 doubles.
    pub fn to_array(&self) -> [f64; 18] {
        let mut out = [0.0; 18];
        for (k, z) in self.m.iter().flatten().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
        out
    }

    pub fn from_array(a: &[f64; 18]) -> Self {
        let mut r = Self::ZERO;
        for (k, z) in r.m.iter_mut().flatten().enumerate() {
            *z = Complex64::new(a[2 * k], a[2 * k + 1]);
        }
        r
    }
}

impl Mul for Complex3x3 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        mat_mul(&self, &rhs)
    }
}

impl Add for Complex3x3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for Complex3x3 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += rhs.m[i][j];
            }
        }
    }
}

impl Sub for Complex3x3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] -= rhs.m[i][j];
            }
        }
        r
    }
}

impl fmt::Display for Complex3x3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.m {
            writeln!(f, "[{} {} {}]", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

/// Standard complex matrix product.
#[inline]
pub fn mat_mul(a: &Complex3x3, b: &Complex3x3) -> Complex3x3 {
    let mut r = Complex3x3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
        }
    }
    r
}

/// Conjugate transpose.
pub fn adjoint(a: &Complex3x3) -> Complex3x3 {
    a.adjoint()
}

pub fn trace_re(a: &Complex3x3) -> f64 {
    a.trace_re()
}

/// A special-unitary 3×3 matrix: the gauge link variable.
#[derive(Clone, Copy, Debug, PartialEq)]
#[repr(transparent)]
pub struct Su3Matrix(Complex3x3);

impl Default for Su3Matrix {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Su3Matrix {
    pub const IDENTITY: Self = Su3Matrix(Complex3x3::IDENTITY);

    /// Wraps a matrix the caller knows to be in SU(3).
    #[inline]
    pub fn new_unchecked(m: Complex3x3) -> Self {
        Su3Matrix(m)
    }

    pub fn try_new(m: Complex3x3) -> Result<Self, Su3Error> {
        let dev = if m.is_finite() {
            m.su3_deviation()
        } else {
            f64::INFINITY
        };
        if dev <= UNITARITY_TOL {
            Ok(Su3Matrix(m))
        } else {
            Err(Su3Error::NotSpecialUnitary(dev))
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Complex3x3 {
        &self.0
    }

    #[inline]
    pub fn into_matrix(self) -> Complex3x3 {
        self.0
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        Su3Matrix(self.0.adjoint())
    }

    pub fn reunitarized(&self) -> Self {
        // Rows of an SU(3) matrix stay far from degenerate.
        reunitarize(&self.0).unwrap_or(*self)
    }
}

impl std::ops::Deref for Su3Matrix {
    type Target = Complex3x3;
    fn deref(&self) -> &Complex3x3 {
        &self.0
    }
}

impl Mul for Su3Matrix {
    type Output = Su3Matrix;
    #[inline]
    fn mul(self, rhs: Su3Matrix) -> Su3Matrix {
        Su3Matrix(mat_mul(&self.0, &rhs.0))
    }
}

#[inline]
fn row_dot(a: &[Complex64; 3], b: &[Complex64; 3]) -> Complex64 {
    // <a, b> = sum conj(a_k) b_k
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

#[inline]
fn row_norm(a: &[Complex64; 3]) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

/// Projects a drifted matrix back onto SU(3) by Gram-Schmidt on the first two
/// rows; the third row is the conjugated cross product of the first two.
pub fn reunitarize(m: &Complex3x3) -> Result<Su3Matrix, Su3Error> {
    let mut r0 = m.m[0];
    let mut r1 = m.m[1];

    let n0 = row_norm(&r0);
    if !(n0 > 1e-30) {
        return Err(Su3Error::DegenerateMatrix);
    }
    r0.iter_mut().for_each(|z| *z /= n0);

    let n1_before = row_norm(&r1);
    let d = row_dot(&r0, &r1);
    for k in 0..3 {
        r1[k] -= r0[k] * d;
    }
    let n1 = row_norm(&r1);
    if !(n1 > 1e-30) || n1 <= 1e-13 * n1_before {
        return Err(Su3Error::DegenerateMatrix);
    }
    r1.iter_mut().for_each(|z| *z /= n1);

    let r2 = [
        (r0[1] * r1[2] - r0[2] * r1[1]).conj(),
        (r0[2] * r1[0] - r0[0] * r1[2]).conj(),
        (r0[0] * r1[1] - r0[1] * r1[0]).conj(),
    ];
    Ok(Su3Matrix(Complex3x3 { m: [r0, r1, r2] }))
}

/// Row/column pair of each SU(2) subgroup: (0,1), (1,2), (0,2).
pub const SUBGROUPS: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

/// SU(2) element in quaternion form.
///
/// The 2×2 block is `[[a0 + i a3, a2 + i a1], [-a2 + i a1, a0 - i a3]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Params {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Su2Params {
    pub const IDENTITY: Self = Su2Params {
        a0: 1.0,
        a1: 0.0,
        a2: 0.0,
        a3: 0.0,
    };

    pub fn new(a0: f64, a1: f64, a2: f64, a3: f64) -> Self {
        Su2Params { a0, a1, a2, a3 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0 * self.a0 + self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3
    }

    pub fn scale(&self, s: f64) -> Self {
        Su2Params::new(self.a0 * s, self.a1 * s, self.a2 * s, self.a3 * s)
    }

    /// Inverse of a unit element (the block adjoint).
    pub fn conj(&self) -> Self {
        Su2Params::new(self.a0, -self.a1, -self.a2, -self.a3)
    }

    /// Product matching the product of the 2×2 blocks, `block(self)·block(b)`.
    pub fn mul(&self, b: &Su2Params) -> Su2Params {
        let a = self;
        Su2Params {
            a0: a.a0 * b.a0 - a.a1 * b.a1 - a.a2 * b.a2 - a.a3 * b.a3,
            a1: a.a0 * b.a1 + a.a1 * b.a0 + a.a3 * b.a2 - a.a2 * b.a3,
            a2: a.a0 * b.a2 + a.a2 * b.a0 + a.a1 * b.a3 - a.a3 * b.a1,
            a3: a.a0 * b.a3 + a.a3 * b.a0 + a.a2 * b.a1 - a.a1 * b.a2,
        }
    }

    /// The 2×2 block `[[b00, b01], [b10, b11]]`.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::new(self.a0, self.a3), Complex64::new(self.a2, self.a1)],
            [Complex64::new(-self.a2, self.a1), Complex64::new(self.a0, -self.a3)],
        ]
    }

    /// Vector `p` with `Re tr[embed(r, subgroup) · w] = r · p + const` for all `r`.
    ///
    /// `|p|` is the subgroup coupling strength and `conj(p)/|p|` the SU(2)
    /// element the subgroup block of `w` is proportional to.
    pub fn projection(w: &Complex3x3, subgroup: usize) -> Su2Params {
        let (i, j) = SUBGROUPS[subgroup];
        let (w00, w01, w10, w11) = (w.m[i][i], w.m[i][j], w.m[j][i], w.m[j][j]);
        Su2Params {
            a0: w00.re + w11.re,
            a1: -(w01.im + w10.im),
            a2: w10.re - w01.re,
            a3: -(w00.im - w11.im),
        }
    }

    /// Uniform (Haar) SU(2) element: a point drawn uniformly on the 3-sphere.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Su2Params {
        // x-coordinate of a uniform point in the unit disk has density ∝ √(1-x²).
        let r = rng.random::<f64>().sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        let a0 = r * phi.cos();
        Self::with_random_axis(a0, rng)
    }

    /// Completes `a0` with `(a1,a2,a3)` uniform on the sphere of radius √(1-a0²).
    pub fn with_random_axis<R: Rng + ?Sized>(a0: f64, rng: &mut R) -> Su2Params {
        let rad = (1.0 - a0 * a0).max(0.0).sqrt();
        let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
        let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
        let phi = std::f64::consts::TAU * rng.random::<f64>();
        Su2Params {
            a0,
            a1: rad * sin_theta * phi.cos(),
            a2: rad * sin_theta * phi.sin(),
            a3: rad * cos_theta,
        }
    }

    /// `m ← embed(self, subgroup) · m`, touching only the two affected rows.
    #[inline]
    pub fn left_mul_into(&self, subgroup: usize, m: &mut Complex3x3) {
        let (i, j) = SUBGROUPS[subgroup];
        let b = self.block();
        for c in 0..3 {
            let (x, y) = (m.m[i][c], m.m[j][c]);
            m.m[i][c] = b[0][0] * x + b[0][1] * y;
            m.m[j][c] = b[1][0] * x + b[1][1] * y;
        }
    }
}

/// Embeds an SU(2) element into SU(3): identity outside the subgroup block.
pub fn embed_su2(s: &Su2Params, subgroup: usize) -> Su3Matrix {
    let (i, j) = SUBGROUPS[subgroup];
    let b = s.block();
    let mut m = Complex3x3::IDENTITY;
    m.m[i][i] = b[0][0];
    m.m[i][j] = b[0][1];
    m.m[j][i] = b[1][0];
    m.m[j][j] = b[1][1];
    Su3Matrix(m)
}

/// Random SU(3) element: product of three Haar-random SU(2) subgroup elements.
pub fn random_su3(key: &RngKey) -> Su3Matrix {
    let mut rng = key.stream();
    random_su3_from(&mut rng)
}

pub fn random_su3_from<R: Rng + ?Sized>(rng: &mut R) -> Su3Matrix {
    let mut m = Complex3x3::IDENTITY;
    for sg in 0..3 {
        Su2Params::haar(rng).left_mul_into(sg, &mut m);
    }
    Su3Matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(seed: u64) -> Complex3x3 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = Complex3x3::ZERO;
        m.m.iter_mut()
            .flatten()
            .for_each(|z| *z = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        m
    }

    fn max_diff(a: &Complex3x3, b: &Complex3x3) -> f64 {
        a.m.iter()
            .flatten()
            .zip(b.m.iter().flatten())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity_products() {
        let i = Complex3x3::IDENTITY;
        assert_eq!(mat_mul(&i, &i), i);
        assert_eq!(adjoint(&i), i);
        assert_eq!(trace_re(&i), 3.0);
    }

    #[test]
    fn product_entry_matches_scalar_loop() {
        let (a, b) = (random_matrix(1), random_matrix(2));
        let p = mat_mul(&a, &b);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = c(0.0, 0.0);
                for k in 0..3 {
                    s += a.m[i][k] * b.m[k][j];
                }
                assert!((p.m[i][j] - s).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_by_hand() {
        let mut a = Complex3x3::ZERO;
        a.m[0][0] = c(0.0, 1.0);
        a.m[1][1] = c(0.0, 1.0);
        a.m[2][2] = c(0.0, -2.0);
        a.m[0][2] = c(3.0, 4.0);
        let h = adjoint(&a);
        assert_eq!(h.m[0][0], c(0.0, -1.0));
        assert_eq!(h.m[1][1], c(0.0, -1.0));
        assert_eq!(h.m[2][2], c(0.0, 2.0));
        assert_eq!(h.m[2][0], c(3.0, -4.0));
        assert_eq!(h.m[0][2], c(0.0, 0.0));
    }

    #[test]
    fn mul_adj_helpers_agree_with_explicit_adjoint() {
        let (a, b) = (random_matrix(3), random_matrix(4));
        assert!(max_diff(&a.mul_adj(&b), &mat_mul(&a, &b.adjoint())) < 1e-15);
        assert!(max_diff(&a.adj_mul(&b), &mat_mul(&a.adjoint(), &b)) < 1e-15);
    }

    #[test]
    fn reunitarize_identity() {
        assert_eq!(reunitarize(&Complex3x3::IDENTITY).unwrap(), Su3Matrix::IDENTITY);
    }

    #[test]
    fn reunitarize_scaled_unitary() {
        let u = random_su3(&RngKey::new(9));
        let r = reunitarize(&u.scale(1.0001)).unwrap();
        assert!(max_diff(&r, &u) < 1e-3);
        assert!(r.su3_deviation() < 1e-14);
    }

    #[test]
    fn reunitarize_degenerate_rows() {
        let mut m = random_matrix(5);
        m.m[1] = m.m[0];
        assert_eq!(reunitarize(&m), Err(Su3Error::DegenerateMatrix));
        assert_eq!(reunitarize(&Complex3x3::ZERO), Err(Su3Error::DegenerateMatrix));
    }

    #[test]
    fn reunitarize_general_matrix_is_su3() {
        for seed in 0..50 {
            let r = reunitarize(&random_matrix(seed)).unwrap();
            assert!(r.su3_deviation() < 1e-14, "seed {seed}: {}", r.su3_deviation());
        }
    }

    #[test]
    fn embed_identity_and_placement() {
        for sg in 0..3 {
            assert_eq!(embed_su2(&Su2Params::IDENTITY, sg), Su3Matrix::IDENTITY);
        }
        let s = Su2Params::new(0.5, 0.5, 0.5, 0.5);
        assert_eq!(embed_su2(&s, 1).m[0][0], c(1.0, 0.0));
        assert_eq!(embed_su2(&s, 0).m[2][2], c(1.0, 0.0));
        assert_eq!(embed_su2(&s, 2).m[1][1], c(1.0, 0.0));
    }

    #[test]
    fn embed_pure_a2_block() {
        let e = embed_su2(&Su2Params::new(0.0, 0.0, 1.0, 0.0), 0);
        assert_eq!(e.m[0][1], c(1.0, 0.0));
        assert_eq!(e.m[1][0], c(-1.0, 0.0));
        assert_eq!(e.m[0][0], c(0.0, 0.0));
        assert!((e.det() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(e.unitarity_deviation() < 1e-15);
    }

    #[test]
    fn quaternion_product_matches_block_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = Su2Params::haar(&mut rng);
            let b = Su2Params::haar(&mut rng);
            for sg in 0..3 {
                let lhs = embed_su2(&a.mul(&b), sg);
                let rhs = embed_su2(&a, sg) * embed_su2(&b, sg);
                assert!(max_diff(&lhs, &rhs) < 1e-14);
                let inv = embed_su2(&a.conj(), sg);
                assert!(max_diff(&inv, &embed_su2(&a, sg).adjoint()) < 1e-15);
            }
        }
    }

    #[test]
    fn projection_reproduces_subgroup_trace() {
        let w = random_matrix(21);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for sg in 0..3 {
            let p = Su2Params::projection(&w, sg);
            let base = w.trace_re() - p.a0;
            for _ in 0..5 {
                let r = Su2Params::haar(&mut rng);
                let lhs = mat_mul(&embed_su2(&r, sg), &w).trace_re();
                let dot = r.a0 * p.a0 + r.a1 * p.a1 + r.a2 * p.a2 + r.a3 * p.a3;
                assert!((lhs - (dot + base)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn left_mul_into_matches_embedding() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let m = random_matrix(32);
        for sg in 0..3 {
            let s = Su2Params::haar(&mut rng);
            let mut fast = m;
            s.left_mul_into(sg, &mut fast);
            assert!(max_diff(&fast, &mat_mul(&embed_su2(&s, sg), &m)) < 1e-15);
        }
    }

    #[test]
    fn random_su3_deterministic_and_special_unitary() {
        let key = RngKey::new(3).with_link(5, 1);
        assert_eq!(random_su3(&key), random_su3(&key));
        for site in 0..1000 {
            let u = random_su3(&RngKey::new(3).with_link(site, 0));
            assert!(u.su3_deviation() < 1e-14);
        }
    }

    #[test]
    fn random_su3_trace_range() {
        for site in 0..100_000u64 {
            let t = random_su3(&RngKey::new(17).with_link(site, 2)).trace_re();
            assert!((-1.5 - 1e-12..=3.0 + 1e-12).contains(&t), "{t}");
        }
    }

    #[test]
    fn random_su3_mean_trace_vanishes() {
        let n = 100_000u64;
        let xs: Vec<f64> = (0..n)
            .map(|s| random_su3(&RngKey::new(23).with_link(s, 0)).trace_re() / 3.0)
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(mean.abs() < 5.0 * se, "mean {mean} se {se}");
    }

    proptest! {
        #[test]
        fn su3_closed_under_product(s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = random_su3(&RngKey::new(s1));
            let b = random_su3(&RngKey::new(s2));
            let p = a * b;
            prop_assert!(p.su3_deviation() < 1e-12);
            prop_assert!((a * a.adjoint()).into_matrix().unitarity_deviation() < 1e-12);
            prop_assert!(max_diff(&(a * a.adjoint()), &Complex3x3::IDENTITY) < 1e-12);
        }

        #[test]
        fn adjoint_is_exact_involution(seed in any::<u64>()) {
            let a = random_matrix(seed);
            let back = adjoint(&adjoint(&a));
            for (x, y) in a.m.iter().flatten().zip(back.m.iter().flatten()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }

        #[test]
        fn reunitarize_idempotent_on_su3(seed in any::<u64>()) {
            let u = random_su3(&RngKey::new(seed));
            let r = reunitarize(&u).unwrap();
            prop_assert!(max_diff(&r, &u) < 1e-14);
        }

        #[test]
        fn trace_re_is_entry_sum(seed in any::<u64>()) {
            let a = random_matrix(seed);
            let oracle = a.m[0][0].re + a.m[1][1].re + a.m[2][2].re;
            prop_assert_eq!(trace_re(&a), oracle);
        }
    }
}
