//! Sparse multivariate Laurent polynomials with real coefficients,
//! matrices over them, and evaluation on the torus.
//!
//! A polynomial is a finite map from exponent vectors `k` in Z^n to real
//! coefficients, where the term keyed by `k` holds the coefficient of
//! `z^-k`. With `z = e^{i omega}` this makes evaluation the classical
//! z-transform sum `sum_k c(k) e^{-i k.omega}`, so filters convert to
//! polynomials without sign gymnastics.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intmat::IntMatrix;

/// Coefficients at or below this magnitude are dropped when a polynomial is
/// put in canonical form. Keeps supports exact without chasing roundoff dust.
pub const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LaurentError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("shape mismatch: {lr}x{lc} incompatible with {rr}x{rc}")]
    ShapeMismatch {
        lr: usize,
        lc: usize,
        rr: usize,
        rc: usize,
    },
    #[error("matrix needs {expected} entries, got {got}")]
    BadEntryCount { expected: usize, got: usize },
    #[error("exponent vector has length {got}, polynomial dimension is {dim}")]
    BadExponent { dim: usize, got: usize },
    #[error("dimension must be positive")]
    ZeroDim,
}

/// Finitely supported map `k -> c(k)` representing `sum_k c(k) z^-k`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct LaurentPoly {
    dim: usize,
    terms: BTreeMap<Vec<i64>, f64>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    k: Vec<i64>,
    c: f64,
}

impl From<LaurentPoly> for PolyRepr {
    fn from(p: LaurentPoly) -> Self {
        PolyRepr {
            dim: p.dim,
            terms: p
                .terms
                .into_iter()
                .map(|(k, c)| TermRepr { k, c })
                .collect(),
        }
    }
}

impl TryFrom<PolyRepr> for LaurentPoly {
    type Error = LaurentError;
    fn try_from(r: PolyRepr) -> Result<Self, LaurentError> {
        LaurentPoly::new(r.dim, r.terms.into_iter().map(|t| (t.k, t.c)))
    }
}

impl LaurentPoly {
    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// duplicates and dropping negligible coefficients.
    pub fn new(
        dim: usize,
        terms: impl IntoIterator<Item = (Vec<i64>, f64)>,
    ) -> Result<Self, LaurentError> {
        if dim == 0 {
            return Err(LaurentError::ZeroDim);
        }
        let mut map: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (k, c) in terms {
            if k.len() != dim {
                return Err(LaurentError::BadExponent { dim, got: k.len() });
            }
            *map.entry(k).or_insert(0.0) += c;
        }
        map.retain(|_, c| c.abs() > DROP_TOL);
        Ok(LaurentPoly { dim, terms: map })
    }

    pub fn zero(dim: usize) -> Self {
        LaurentPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::new(dim, [(vec![0; dim], c)]).expect("constant term is well formed")
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, 1.0)
    }

    /// The single term `c * z^-k`.
    pub fn monomial(dim: usize, k: &[i64], c: f64) -> Result<Self, LaurentError> {
        Self::new(dim, [(k.to_vec(), c)])
    }

    /// Univariate convenience: `c * z^-k`.
    pub fn monomial1(k: i64, c: f64) -> Self {
        Self::monomial(1, &[k], c).expect("dim 1 monomial")
    }

    /// Univariate polynomial from consecutive coefficients of
    /// `z^-offset, z^-(offset+1), ...`.
    pub fn from_coeffs1(offset: i64, coeffs: &[f64]) -> Self {
        Self::new(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| (vec![offset + j as i64], c)),
        )
        .expect("dim 1 coefficients")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.terms.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coeff(&self, k: &[i64]) -> f64 {
        self.terms.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Exponent range along one axis, `None` for the zero polynomial.
    pub fn exp_range(&self, axis: usize) -> Option<(i64, i64)> {
        let mut r: Option<(i64, i64)> = None;
        for k in self.terms.keys() {
            let e = k[axis];
            r = Some(match r {
                None => (e, e),
                Some((lo, hi)) => (lo.min(e), hi.max(e)),
            });
        }
        r
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, LaurentError> {
        if self.dim != rhs.dim {
            return Err(LaurentError::DimMismatch(self.dim, rhs.dim));
        }
        let mut terms = self.terms.clone();
        for (k, &c) in &rhs.terms {
            *terms.entry(k.clone()).or_insert(0.0) += c;
        }
        terms.retain(|_, c| c.abs() > DROP_TOL);
        Ok(LaurentPoly {
            dim: self.dim,
            terms,
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, LaurentError> {
        self.try_add(&rhs.neg())
    }

    /// Term-map convolution; the support of the product lies in the
    /// Minkowski sum of the supports.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LaurentError> {
        if self.dim != rhs.dim {
            return Err(LaurentError::DimMismatch(self.dim, rhs.dim));
        }
        let mut terms: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &rhs.terms {
                let k: Vec<i64> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                *terms.entry(k).or_insert(0.0) += ca * cb;
            }
        }
        terms.retain(|_, c| c.abs() > DROP_TOL);
        Ok(LaurentPoly {
            dim: self.dim,
            terms,
        })
    }

    pub fn neg(&self) -> Self {
        LaurentPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, &c)| (k.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut terms: BTreeMap<Vec<i64>, f64> = self
            .terms
            .iter()
            .map(|(k, &c)| (k.clone(), s * c))
            .collect();
        terms.retain(|_, c| c.abs() > DROP_TOL);
        LaurentPoly {
            dim: self.dim,
            terms,
        }
    }

    /// The involution `z -> z^-1`: every exponent vector negated. On the
    /// torus this is the complex conjugate, since coefficients are real.
    pub fn involution(&self) -> Self {
        LaurentPoly {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(k, &c)| (k.iter().map(|e| -e).collect(), c))
                .collect(),
        }
    }

    /// Substitutes `z -> z^L` for an integer matrix `L`, i.e. maps each
    /// exponent `k` to `L k`. Univariate case: `k -> lambda k`.
    pub fn dilate(&self, lambda: &IntMatrix) -> Result<Self, LaurentError> {
        if lambda.cols() != self.dim {
            return Err(LaurentError::DimMismatch(lambda.cols(), self.dim));
        }
        LaurentPoly::new(
            lambda.rows(),
            self.terms.iter().map(|(k, &c)| (lambda.mul_vec(k), c)),
        )
    }

    pub fn dilate1(&self, lambda: i64) -> Self {
        self.dilate(&IntMatrix::scalar(lambda))
            .expect("univariate dilation")
    }

    /// Exact summation of the terms at `z = e^{i omega}`.
    pub fn eval(&self, t: &TorusPoint) -> Complex64 {
        debug_assert_eq!(self.dim, t.dim());
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in &self.terms {
            let phase: f64 = k.iter().zip(&t.omega).map(|(&e, &w)| e as f64 * w).sum();
            // z^-k = e^{-i k.omega}
            acc += c * Complex64::from_polar(1.0, -phase);
        }
        acc
    }

    /// Max coefficient difference over the union of supports; infinite when
    /// dimensions differ.
    pub fn max_coeff_diff(&self, rhs: &Self) -> f64 {
        if self.dim != rhs.dim {
            return f64::INFINITY;
        }
        let mut m = 0.0f64;
        for (k, &c) in &self.terms {
            m = m.max((c - rhs.coeff(k)).abs());
        }
        for (k, &c) in &rhs.terms {
            m = m.max((c - self.coeff(k)).abs());
        }
        m
    }

    /// Support-union max-norm equality. Absolute rather than relative:
    /// legitimately tiny coefficients appear throughout the constructions.
    pub fn approx_eq(&self, rhs: &Self, tol: f64) -> bool {
        self.max_coeff_diff(rhs) <= tol
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        self.max_abs_coeff() <= tol
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("polynomial dimensions agree")
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_sub(rhs).expect("polynomial dimensions agree")
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("polynomial dimensions agree")
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({})", self)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in &self.terms {
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
                first = false;
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if k.iter().all(|&e| e == 0) {
                write!(f, "{a}")?;
            } else {
                write!(f, "{a}*z^-{k:?}")?;
            }
        }
        Ok(())
    }
}

/// A point `z = e^{i omega}` on the n-torus, stored by its angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    omega: Vec<f64>,
}

impl TorusPoint {
    pub fn new(omega: Vec<f64>) -> Self {
        TorusPoint { omega }
    }

    /// Univariate point at angle `omega`.
    pub fn angle(omega: f64) -> Self {
        TorusPoint { omega: vec![omega] }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn z(&self) -> Vec<Complex64> {
        self.omega
            .iter()
            .map(|&w| Complex64::from_polar(1.0, w))
            .collect()
    }

    /// Componentwise shifted point `omega + gamma`.
    pub fn shifted(&self, gamma: &[f64]) -> Self {
        TorusPoint {
            omega: self.omega.iter().zip(gamma).map(|(a, b)| a + b).collect(),
        }
    }
}

/// How to sample the torus for the checks that are not polynomial
/// identities (rank, kernels, sup-norms).
#[derive(Clone, Debug)]
pub enum SamplingGrid {
    /// Uniform tensor grid, `points_per_dim` angles per axis over [-pi, pi).
    Uniform { points_per_dim: usize },
    /// Seeded uniform random points, reproducible across runs.
    Random { count: usize, seed: u64 },
}

impl SamplingGrid {
    pub fn uniform(points_per_dim: usize) -> Self {
        SamplingGrid::Uniform { points_per_dim }
    }

    pub fn random(count: usize, seed: u64) -> Self {
        SamplingGrid::Random { count, seed }
    }

    pub fn points(&self, dim: usize) -> Vec<TorusPoint> {
        match *self {
            SamplingGrid::Uniform { points_per_dim } => {
                let n = points_per_dim.max(1);
                let total = n.pow(dim as u32);
                let mut pts = Vec::with_capacity(total);
                for idx in 0..total {
                    let mut rem = idx;
                    let mut omega = Vec::with_capacity(dim);
                    for _ in 0..dim {
                        let j = rem % n;
                        rem /= n;
                        omega.push(
                            -std::f64::consts::PI
                                + 2.0 * std::f64::consts::PI * j as f64 / n as f64,
                        );
                    }
                    pts.push(TorusPoint::new(omega));
                }
                pts
            }
            SamplingGrid::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        TorusPoint::new(
                            (0..dim)
                                .map(|_| {
                                    rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)
                                })
                                .collect(),
                        )
                    })
                    .collect()
            }
        }
    }
}

/// Dense row-major grid of Laurent polynomials with a uniform dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    dim: usize,
    entries: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<LaurentPoly>) -> Result<Self, LaurentError> {
        if entries.len() != rows * cols {
            return Err(LaurentError::BadEntryCount {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        let dim = entries.first().map(|p| p.dim()).unwrap_or(1);
        for e in &entries {
            if e.dim() != dim {
                return Err(LaurentError::DimMismatch(dim, e.dim()));
            }
        }
        Ok(LaurentMatrix {
            rows,
            cols,
            dim,
            entries,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> LaurentPoly,
    ) -> Result<Self, LaurentError> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                LaurentPoly::one(dim)
            } else {
                LaurentPoly::zero(dim)
            }
        })
        .expect("identity is well formed")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<LaurentPoly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Standard product over the Laurent ring.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LaurentError> {
        if self.cols != rhs.rows {
            return Err(LaurentError::ShapeMismatch {
                lr: self.rows,
                lc: self.cols,
                rr: rhs.rows,
                rc: rhs.cols,
            });
        }
        if self.dim != rhs.dim {
            return Err(LaurentError::DimMismatch(self.dim, rhs.dim));
        }
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = LaurentPoly::zero(self.dim);
            for l in 0..self.cols {
                acc = &acc + &(self.get(i, l) * rhs.get(l, j));
            }
            acc
        })
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, LaurentError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LaurentError::ShapeMismatch {
                lr: self.rows,
                lc: self.cols,
                rr: rhs.rows,
                rc: rhs.cols,
            });
        }
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    /// Transpose with the involution applied entrywise, `A*(z) = A(z^-1)^T`.
    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).involution())
            .expect("transpose preserves shape")
    }

    pub fn eval(&self, t: &TorusPoint) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(t))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries
            .iter()
            .fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    pub fn max_coeff_diff(&self, rhs: &Self) -> f64 {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&rhs.entries)
            .fold(0.0, |m, (a, b)| m.max(a.max_coeff_diff(b)))
    }

    /// Max coefficient deviation from the identity matrix.
    pub fn residual_vs_identity(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.max_coeff_diff(&Self::identity(self.rows, self.dim))
    }
}

impl std::ops::Mul for &LaurentMatrix {
    type Output = LaurentMatrix;
    fn mul(self, rhs: &LaurentMatrix) -> LaurentMatrix {
        self.try_mul(rhs).expect("matrix shapes agree")
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[ ")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// Deterministic random polynomials for property tests and corpora.
pub fn random_poly(
    rng: &mut impl Rng,
    dim: usize,
    max_terms: usize,
    exp_bound: i64,
) -> LaurentPoly {
    let n_terms = rng.random_range(1..=max_terms.max(1));
    LaurentPoly::new(
        dim,
        (0..n_terms).map(|_| {
            let k: Vec<i64> = (0..dim)
                .map(|_| rng.random_range(-exp_bound..=exp_bound))
                .collect();
            (k, rng.random_range(-1.0..1.0))
        }),
    )
    .expect("random terms are well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p1(pairs: &[(i64, f64)]) -> LaurentPoly {
        LaurentPoly::new(1, pairs.iter().map(|&(k, c)| (vec![k], c))).unwrap()
    }

    #[test]
    fn add_cancels() {
        // (1 + z^-1) + (-z^-1) = 1
        let a = p1(&[(0, 1.0), (1, 1.0)]);
        let b = p1(&[(1, -1.0)]);
        let s = &a + &b;
        assert!(s.approx_eq(&LaurentPoly::one(1), 0.0));
        assert_eq!(s.num_terms(), 1);
    }

    #[test]
    fn add_identity() {
        let p = p1(&[(-2, 0.25), (3, -1.5)]);
        assert!((&p + &LaurentPoly::zero(1)).approx_eq(&p, 0.0));
    }

    #[test]
    fn add_assembles_hat_scaling_target() {
        // 3/2 - |(1 + z^-1)/(2 sqrt 2)|^2 = 3/2 - (2 + z + z^-1)/8
        //                                 = 5/4 - z/8 - z^-1/8
        let a = LaurentPoly::constant(1, 1.5);
        let quarter = p1(&[(0, 1.0), (1, 1.0)]).scale(1.0 / (2.0 * 2.0f64.sqrt()));
        let b = (&quarter * &quarter.involution()).neg();
        let got = &a + &b;
        let want = p1(&[(0, 1.25), (-1, -0.125), (1, -0.125)]);
        assert!(got.approx_eq(&want, 1e-15));
    }

    #[test]
    fn mul_binomial() {
        let a = p1(&[(0, 1.0), (1, 1.0)]);
        let sq = &a * &a;
        assert!(sq.approx_eq(&p1(&[(0, 1.0), (1, 2.0), (2, 1.0)]), 0.0));
    }

    #[test]
    fn mul_identity() {
        let p = p1(&[(-1, 2.0), (4, -0.5)]);
        assert!((&p * &LaurentPoly::one(1)).approx_eq(&p, 0.0));
    }

    #[test]
    fn mul_recovers_hat_autocorrelation() {
        // ((2+sqrt6)/4 + (2-sqrt6)/4 z^-1) ((2+sqrt6)/4 + (2-sqrt6)/4 z) = 5/4 - z/8 - z^-1/8
        let a = (2.0 + 6.0f64.sqrt()) / 4.0;
        let b = (2.0 - 6.0f64.sqrt()) / 4.0;
        let q = p1(&[(0, a), (1, b)]);
        let prod = &q * &q.involution();
        let want = p1(&[(0, 1.25), (-1, -0.125), (1, -0.125)]);
        assert!(prod.approx_eq(&want, 1e-15));
    }

    #[test]
    fn involution_basics() {
        assert!(p1(&[(1, 1.0)])
            .involution()
            .approx_eq(&p1(&[(-1, 1.0)]), 0.0));
        let c = LaurentPoly::constant(1, 3.25);
        assert!(c.involution().approx_eq(&c, 0.0));
    }

    #[test]
    fn dim_mismatch_reported() {
        let a = LaurentPoly::one(1);
        let b = LaurentPoly::one(2);
        assert!(matches!(
            a.try_add(&b),
            Err(LaurentError::DimMismatch(1, 2))
        ));
        assert!(matches!(
            a.try_mul(&b),
            Err(LaurentError::DimMismatch(1, 2))
        ));
    }

    #[test]
    fn eval_binomial_vanishes_at_pi() {
        let a = p1(&[(0, 1.0), (1, 1.0)]);
        let v = a.eval(&TorusPoint::angle(std::f64::consts::PI));
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn eval_constant_matrix() {
        let m = LaurentMatrix::from_fn(2, 2, |i, j| LaurentPoly::constant(1, (i * 2 + j) as f64))
            .unwrap();
        let e = m.eval(&TorusPoint::angle(0.7));
        for i in 0..2 {
            for j in 0..2 {
                assert!((e[(i, j)] - Complex64::new((i * 2 + j) as f64, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn poly_eq_tolerances() {
        let p = p1(&[(0, 1.0)]);
        assert!(p.approx_eq(&p, 0.0));
        let q = p1(&[(0, 1.0), (-1, 1e-6)]);
        assert!(!p.approx_eq(&q, 1e-9));
        assert!(p.approx_eq(&q, 1e-5));
    }

    #[test]
    fn mat_mul_identity_and_swap() {
        let b = LaurentMatrix::from_fn(2, 2, |i, j| {
            p1(&[(i as i64 - j as i64, 1.0 + i as f64 + j as f64)])
        })
        .unwrap();
        let i2 = LaurentMatrix::identity(2, 1);
        assert!((&i2 * &b).max_coeff_diff(&b) == 0.0);

        let swap = LaurentMatrix::new(
            2,
            2,
            vec![
                LaurentPoly::zero(1),
                LaurentPoly::one(1),
                LaurentPoly::one(1),
                LaurentPoly::zero(1),
            ],
        )
        .unwrap();
        assert_eq!((&swap * &swap).residual_vs_identity(), 0.0);
    }

    #[test]
    fn conj_transpose_examples() {
        let i2 = LaurentMatrix::identity(2, 1);
        assert_eq!(i2.conj_transpose().max_coeff_diff(&i2), 0.0);

        let col = LaurentMatrix::new(2, 1, vec![p1(&[(1, 1.0)]), LaurentPoly::one(1)]).unwrap();
        let row = col.conj_transpose();
        assert_eq!(row.rows(), 1);
        assert!(row.get(0, 0).approx_eq(&p1(&[(-1, 1.0)]), 0.0));
        assert!(row.get(0, 1).approx_eq(&LaurentPoly::one(1), 0.0));
    }

    #[test]
    fn serde_roundtrip_is_bit_exact() {
        let p = LaurentPoly::new(
            2,
            [
                (vec![0, 3], 1.0 / 3.0),
                (vec![-2, 1], 5e-13),
                (vec![4, 0], -(7.0f64.sqrt())),
            ],
        )
        .unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: LaurentPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back.num_terms(), p.num_terms());
        for (k, c) in p.terms() {
            assert_eq!(back.coeff(k).to_bits(), c.to_bits());
        }
        // schema shape
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v.get("dim").is_some() && v.get("terms").is_some());
        assert!(v["terms"][0].get("k").is_some() && v["terms"][0].get("c").is_some());
    }

    fn arb_poly(dim: usize) -> impl Strategy<Value = LaurentPoly> {
        proptest::collection::vec(
            (proptest::collection::vec(-3i64..=3, dim), -2.0f64..2.0),
            1..5,
        )
        .prop_map(move |terms| LaurentPoly::new(dim, terms).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(1), b in arb_poly(1), c in arb_poly(1)) {
            let ab = &a * &b;
            let ba = &b * &a;
            prop_assert!(ab.max_coeff_diff(&ba) <= 1e-12);
            let assoc_l = &ab * &c;
            let assoc_r = &a * &(&b * &c);
            prop_assert!(assoc_l.max_coeff_diff(&assoc_r) <= 1e-12);
            let dist_l = &a * &(&b + &c);
            let dist_r = &(&a * &b) + &(&a * &c);
            prop_assert!(dist_l.max_coeff_diff(&dist_r) <= 1e-12);
        }

        #[test]
        fn eval_is_ring_hom(a in arb_poly(2), b in arb_poly(2), w0 in -3.1f64..3.1, w1 in -3.1f64..3.1) {
            let t = TorusPoint::new(vec![w0, w1]);
            let lhs = (&a * &b).eval(&t);
            let rhs = a.eval(&t) * b.eval(&t);
            prop_assert!((lhs - rhs).norm() <= 1e-10);
            let lhs_add = (&a + &b).eval(&t);
            prop_assert!((lhs_add - (a.eval(&t) + b.eval(&t))).norm() <= 1e-12);
        }

        #[test]
        fn involution_is_conjugation(a in arb_poly(1), w in -3.1f64..3.1) {
            let t = TorusPoint::angle(w);
            prop_assert!((a.involution().eval(&t) - a.eval(&t).conj()).norm() <= 1e-12);
            prop_assert!(a.involution().involution().max_coeff_diff(&a) == 0.0);
        }

        #[test]
        fn involution_is_automorphism(a in arb_poly(1), b in arb_poly(1)) {
            let lhs = (&a * &b).involution();
            let rhs = &a.involution() * &b.involution();
            prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn mat_mul_commutes_with_eval(
            a in proptest::collection::vec(arb_poly(1), 4),
            b in proptest::collection::vec(arb_poly(1), 4),
            w in -3.1f64..3.1,
        ) {
            let ma = LaurentMatrix::new(2, 2, a).unwrap();
            let mb = LaurentMatrix::new(2, 2, b).unwrap();
            let t = TorusPoint::angle(w);
            let lhs = (&ma * &mb).eval(&t);
            let rhs = ma.eval(&t) * mb.eval(&t);
            prop_assert!((lhs - rhs).norm() <= 1e-10);
        }
    }
}
