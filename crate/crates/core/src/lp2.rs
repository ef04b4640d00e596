//! Pyramid-style Laurent matrices `[H, I - H H*]` built from a polyphase
//! column, their diagonal scalings, and the structure results that decide
//! when the scaling diagonal is unique.
//!
//! The central objects: for a nonzero column `H` of q Laurent polynomials,
//! the q x (q+1) matrix `Phi_H = [H, I - H H*]` always satisfies
//! `Phi_H [H*; I] = I`. Right-multiplying by `diag(2 - H*H, 1, ..., 1)`
//! and then by `Phi_H*` gives the identity; off an exceptional set of torus
//! points that diagonal is the only one that works.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intmat::IntMatrix;
use crate::laurent::{LaurentError, LaurentMatrix, LaurentPoly, SamplingGrid, TorusPoint};

/// Default tolerance for residuals of polynomial identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Default tolerance deciding membership in the exceptional set.
pub const EXCEPTIONAL_TOL: f64 = 1e-9;
/// Relative singular value cutoff for numerical rank decisions.
pub const RANK_CUTOFF: f64 = 1e-8;
/// Max angle (radians) between the sampled kernel and the predicted one.
pub const KERNEL_ANGLE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum Lp2Error {
    #[error("polyphase vector must have at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("polyphase vector must not be identically zero")]
    ZeroVector,
    #[error("scaling diagonal has {got} entries, expected {expected}")]
    DiagonalLength { expected: usize, got: usize },
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Nonzero column of q Laurent polynomials with a uniform dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyphaseVector {
    entries: Vec<LaurentPoly>,
}

impl PolyphaseVector {
    pub fn new(entries: Vec<LaurentPoly>) -> Result<Self, Lp2Error> {
        if entries.len() < 2 {
            return Err(Lp2Error::TooShort(entries.len()));
        }
        let dim = entries[0].dim();
        for e in &entries {
            if e.dim() != dim {
                return Err(Lp2Error::Laurent(LaurentError::DimMismatch(dim, e.dim())));
            }
        }
        if entries.iter().all(|e| e.is_zero()) {
            return Err(Lp2Error::ZeroVector);
        }
        Ok(PolyphaseVector { entries })
    }

    /// Column of univariate constants, handy in tests and small examples.
    pub fn constants(values: &[f64]) -> Result<Self, Lp2Error> {
        Self::new(
            values
                .iter()
                .map(|&v| LaurentPoly::constant(1, v))
                .collect(),
        )
    }

    pub fn q(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.entries
    }

    pub fn entry(&self, j: usize) -> &LaurentPoly {
        &self.entries[j]
    }

    /// `H*H = sum_j H_j(z) H_j(z^-1)`, real on the torus.
    pub fn norm_sq(&self) -> LaurentPoly {
        let mut acc = LaurentPoly::zero(self.dim());
        for h in &self.entries {
            acc = &acc + &(h * &h.involution());
        }
        acc
    }

    /// The q x 1 column matrix.
    pub fn as_matrix(&self) -> LaurentMatrix {
        LaurentMatrix::new(self.q(), 1, self.entries.clone()).expect("column shape")
    }

    pub fn eval(&self, t: &TorusPoint) -> Vec<Complex64> {
        self.entries.iter().map(|h| h.eval(t)).collect()
    }
}

/// The q x (q+1) matrix `[H, I - H H*]` together with its source column.
#[derive(Clone, Debug)]
pub struct Lp2Matrix {
    source: PolyphaseVector,
    matrix: LaurentMatrix,
}

/// Builds `Phi_H = [H, I - H H*]`.
pub fn build_lp2(h: &PolyphaseVector) -> Lp2Matrix {
    let q = h.q();
    let dim = h.dim();
    let matrix = LaurentMatrix::from_fn(q, q + 1, |i, j| {
        if j == 0 {
            h.entry(i).clone()
        } else {
            let delta = if i == j - 1 {
                LaurentPoly::one(dim)
            } else {
                LaurentPoly::zero(dim)
            };
            &delta - &(h.entry(i) * &h.entry(j - 1).involution())
        }
    })
    .expect("lp2 shape");
    Lp2Matrix {
        source: h.clone(),
        matrix,
    }
}

impl Lp2Matrix {
    pub fn source(&self) -> &PolyphaseVector {
        &self.source
    }

    pub fn matrix(&self) -> &LaurentMatrix {
        &self.matrix
    }

    pub fn q(&self) -> usize {
        self.source.q()
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// Residual of the defining identity `Phi_H [H*; I] = I`.
    pub fn defining_identity_residual(&self) -> f64 {
        let q = self.q();
        let dim = self.dim();
        let h = &self.source;
        let stacked = LaurentMatrix::from_fn(q + 1, q, |i, j| {
            if i == 0 {
                h.entry(j).involution()
            } else if i - 1 == j {
                LaurentPoly::one(dim)
            } else {
                LaurentPoly::zero(dim)
            }
        })
        .expect("stacked shape");
        (&self.matrix * &stacked).residual_vs_identity()
    }
}

/// Diagonal of q+1 Laurent polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingDiagonal {
    diag: Vec<LaurentPoly>,
}

impl ScalingDiagonal {
    pub fn new(diag: Vec<LaurentPoly>) -> Self {
        ScalingDiagonal { diag }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn entry(&self, i: usize) -> &LaurentPoly {
        &self.diag[i]
    }

    pub fn entries(&self) -> &[LaurentPoly] {
        &self.diag
    }

    pub fn as_matrix(&self, dim: usize) -> LaurentMatrix {
        let n = self.diag.len();
        LaurentMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i].clone()
            } else {
                LaurentPoly::zero(dim)
            }
        })
        .expect("diagonal shape")
    }
}

/// The scaling diagonal `diag(2 - H*H, 1, ..., 1)`, which always satisfies
/// `Phi_H B Phi_H* = I`.
pub fn canonical_scaling(h: &PolyphaseVector) -> ScalingDiagonal {
    let dim = h.dim();
    let b0 = &LaurentPoly::constant(dim, 2.0) - &h.norm_sq();
    let mut diag = vec![b0];
    diag.extend((0..h.q()).map(|_| LaurentPoly::one(dim)));
    ScalingDiagonal::new(diag)
}

/// Paraunitarity check: polynomial identity plus a sampled grid scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParaunitaryReport {
    pub passed: bool,
    pub tolerance: f64,
    /// Max residual of `A(z)A*(z) - I` over the sampled grid.
    pub grid_residual: f64,
    /// Coefficientwise residual of the exact polynomial identity.
    pub poly_residual: f64,
    pub worst_point: Option<Vec<f64>>,
}

/// Tests `A(z) A*(z) = I` for all torus z. The boolean is decided on the
/// sampled grid; the exact polynomial residual is carried alongside.
pub fn is_paraunitary(a: &LaurentMatrix, grid: &SamplingGrid, tol: f64) -> ParaunitaryReport {
    let gram = &(a * &a.conj_transpose());
    let poly_residual = gram.residual_vs_identity();

    let mut grid_residual = 0.0f64;
    let mut worst_point = None;
    for t in grid.points(a.dim()) {
        let m = gram.eval(&t);
        let mut r = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                r = r.max((m[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        if r > grid_residual {
            grid_residual = r;
            worst_point = Some(t.omega().to_vec());
        }
    }
    ParaunitaryReport {
        passed: grid_residual <= tol,
        tolerance: tol,
        grid_residual,
        poly_residual,
        worst_point,
    }
}

/// Dimension of the image of the quadratic map for a column of length q.
pub fn f_map_len(q: usize) -> usize {
    (q - 1) * (q + 2) / 2
}

/// The quadratic map sending a column `x` to the stacked blocks
/// `[|x_0|^2 - |x_j|^2]_j` and `[x_{k-1} conj(x_j)]_{k <= j}`, with
/// `|x|^2` realized as `x * involution(x)`.
pub fn f_map(x: &[LaurentPoly]) -> Vec<LaurentPoly> {
    let q = x.len();
    assert!(q >= 2, "f_map needs q >= 2");
    let sq: Vec<LaurentPoly> = x.iter().map(|p| p * &p.involution()).collect();
    let mut out = Vec::with_capacity(f_map_len(q));
    // block 0: |x_0|^2 - |x_i|^2, i = 1..q-1
    for i in 1..q {
        out.push(&sq[0] - &sq[i]);
    }
    // block k: x_{k-1} conj(x_{i+k-1}), i = 1..q-k
    for k in 1..q {
        for i in 1..=(q - k) {
            out.push(
                x[k - 1]
                    .try_mul(&x[i + k - 1].involution())
                    .expect("uniform dim"),
            );
        }
    }
    out
}

/// Applies the quadratic map to every column of `Phi_H`, giving the
/// d x (q+1) coefficient matrix of the homogeneous system.
pub fn f_of_phi(p: &Lp2Matrix) -> LaurentMatrix {
    let q = p.q();
    let d = f_map_len(q);
    let cols: Vec<Vec<LaurentPoly>> = (0..=q).map(|j| f_map(&p.matrix().column(j))).collect();
    LaurentMatrix::from_fn(d, q + 1, |i, j| cols[j][i].clone()).expect("f map shape")
}

/// The same matrix assembled from the closed-form entry tables; used as an
/// independent route against [`f_of_phi`].
pub fn f_of_phi_closed_form(p: &Lp2Matrix) -> LaurentMatrix {
    let q = p.q();
    let dim = p.dim();
    let h = p.source();
    let sq: Vec<LaurentPoly> = (0..q)
        .map(|j| h.entry(j) * &h.entry(j).involution())
        .collect();
    let one = LaurentPoly::one(dim);

    let mut rows: Vec<Vec<LaurentPoly>> = Vec::with_capacity(f_map_len(q));
    // block 0 rows, i = 1..q-1 (1-indexed as in the entry tables)
    for i in 1..q {
        let mut row = Vec::with_capacity(q + 1);
        for j in 1..=(q + 1) {
            let entry = if j == 1 {
                &sq[0] - &sq[i]
            } else if j == 2 {
                let a = &one - &sq[0];
                &(&a * &a) - &(&sq[i] * &sq[0])
            } else if j == i + 2 {
                let a = &one - &sq[i];
                &(&sq[0] * &sq[i]) - &(&a * &a)
            } else {
                &(&sq[0] - &sq[i]) * &sq[j - 2]
            };
            row.push(entry);
        }
        rows.push(row);
    }
    // block k rows, k = 1..q-1, i = 1..q-k
    for k in 1..q {
        for i in 1..=(q - k) {
            let prod = h
                .entry(k - 1)
                .try_mul(&h.entry(i + k - 1).involution())
                .expect("uniform dim");
            let mut row = Vec::with_capacity(q + 1);
            for j in 1..=(q + 1) {
                let entry = if j == 1 {
                    prod.clone()
                } else if j == k + 1 || j == i + k + 1 {
                    (&(&one - &sq[j - 2]) * &prod).neg()
                } else {
                    &prod * &sq[j - 2]
                };
                row.push(entry);
            }
            rows.push(row);
        }
    }
    LaurentMatrix::from_fn(f_map_len(q), q + 1, |i, j| rows[i][j].clone()).expect("f map shape")
}

/// Checks that a diagonal solves both the inhomogeneous scalar identity and
/// the homogeneous system (equivalently `Phi B Phi* = I`, which is also
/// cross-checked directly).
pub fn verify_system(p: &Lp2Matrix, b: &ScalingDiagonal, tol: f64) -> Result<bool, Lp2Error> {
    let q = p.q();
    if b.len() != q + 1 {
        return Err(Lp2Error::DiagonalLength {
            expected: q + 1,
            got: b.len(),
        });
    }
    let dim = p.dim();
    let h = p.source();
    let sq0 = h.entry(0) * &h.entry(0).involution();

    // |H_0|^2 b_0 + (1 - |H_0|^2)^2 b_1 + sum_j |H_0|^2 |H_{j-1}|^2 b_j = 1
    let one = LaurentPoly::one(dim);
    let mut lhs = &sq0 * b.entry(0);
    let a = &one - &sq0;
    lhs = &lhs + &(&(&a * &a) * b.entry(1));
    for j in 2..=q {
        let sqj = h.entry(j - 1) * &h.entry(j - 1).involution();
        lhs = &lhs + &(&(&sq0 * &sqj) * b.entry(j));
    }
    let inhomo_ok = lhs.approx_eq(&one, tol);

    // F(Phi_H) [b_0 ... b_q]^T = 0
    let f = f_of_phi(p);
    let bcol = LaurentMatrix::new(q + 1, 1, b.entries().to_vec())?;
    let homo = f.try_mul(&bcol)?;
    let homo_ok = homo.max_abs_coeff() <= tol;

    // direct cross-check
    let phi = p.matrix();
    let prod = &(phi * &b.as_matrix(dim)) * &phi.conj_transpose();
    let direct_ok = prod.residual_vs_identity() <= tol;

    Ok(inhomo_ok && homo_ok && direct_ok)
}

/// The `D(z) A U(z)` factorization of the lower blocks of the quadratic-map
/// matrix: `D` diagonal in the pair products, `A` a 0/1 scalar matrix, `U`
/// upper triangular with the squared moduli in its first row.
pub struct DauFactorization {
    pub d: LaurentMatrix,
    pub a: IntMatrix,
    pub u: LaurentMatrix,
}

impl DauFactorization {
    /// Product `D * A * U` as a Laurent matrix.
    pub fn product(&self, dim: usize) -> LaurentMatrix {
        let a_poly = LaurentMatrix::from_fn(self.a.rows(), self.a.cols(), |i, j| {
            LaurentPoly::constant(dim, self.a.get(i, j) as f64)
        })
        .expect("scalar matrix lift");
        &(&self.d * &a_poly) * &self.u
    }

    /// The stacked blocks `F_1, ..., F_{q-1}` this factorization reproduces.
    pub fn target(p: &Lp2Matrix) -> LaurentMatrix {
        let q = p.q();
        let f = f_of_phi(p);
        let skip = q - 1; // rows of block 0
        let m = q * (q - 1) / 2;
        LaurentMatrix::from_fn(m, q + 1, |i, j| f.get(i + skip, j).clone()).expect("target shape")
    }
}

pub fn dau_factorization(p: &Lp2Matrix) -> DauFactorization {
    let q = p.q();
    let dim = p.dim();
    let h = p.source();
    let m = q * (q - 1) / 2;

    // D: block-diagonal, block k = diag(H_{k-1} conj(H_{i+k-1}))_i
    let mut diag_entries = Vec::with_capacity(m);
    for k in 1..q {
        for i in 1..=(q - k) {
            diag_entries.push(
                h.entry(k - 1)
                    .try_mul(&h.entry(i + k - 1).involution())
                    .expect("uniform dim"),
            );
        }
    }
    let d = LaurentMatrix::from_fn(m, m, |i, j| {
        if i == j {
            diag_entries[i].clone()
        } else {
            LaurentPoly::zero(dim)
        }
    })
    .expect("block diagonal shape");

    // A: rows follow the same (k, i) order; entry 1 at j = 1, k+1, i+k+1
    let mut a_rows: Vec<Vec<i64>> = Vec::with_capacity(m);
    for k in 1..q {
        for i in 1..=(q - k) {
            let mut row = vec![0i64; q + 1];
            for (j, slot) in row.iter_mut().enumerate() {
                let j1 = j + 1; // 1-indexed column
                if j1 == 1 || j1 == k + 1 || j1 == i + k + 1 {
                    *slot = 1;
                }
            }
            a_rows.push(row);
        }
    }
    let a = IntMatrix::from_rows(&a_rows);

    // U: first row [1, |H_0|^2, ..., |H_{q-1}|^2], then -1 diagonal
    let u = LaurentMatrix::from_fn(q + 1, q + 1, |i, j| {
        if i == 0 && j == 0 {
            LaurentPoly::one(dim)
        } else if i == 0 {
            h.entry(j - 1) * &h.entry(j - 1).involution()
        } else if i == j {
            LaurentPoly::constant(dim, -1.0)
        } else {
            LaurentPoly::zero(dim)
        }
    })
    .expect("upper triangular shape");

    DauFactorization { d, a, u }
}

/// Membership in the exceptional set: for q = 2 the point is exceptional
/// when `H_0 conj(H_1)` or `1 - |H_0|^2 - |H_1|^2` (numerically) vanishes;
/// for q >= 3 when any pair product `H_{k-1} conj(H_{i+k-1})` vanishes.
pub fn in_exceptional_set(h: &PolyphaseVector, t: &TorusPoint, tol: f64) -> bool {
    let v = h.eval(t);
    let q = h.q();
    if q == 2 {
        let pair = (v[0] * v[1].conj()).norm();
        let gap = (1.0 - v[0].norm_sqr() - v[1].norm_sqr()).abs();
        pair <= tol || gap <= tol
    } else {
        for k in 1..q {
            for i in 1..=(q - k) {
                if (v[k - 1] * v[i + k - 1].conj()).norm() <= tol {
                    return true;
                }
            }
        }
        false
    }
}

/// Per-point outcome of the uniqueness scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessPoint {
    pub omega: Vec<f64>,
    pub kernel_dim: usize,
    pub angle: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub points_checked: usize,
    pub points_skipped_exceptional: usize,
    pub violations: Vec<UniquenessPoint>,
    pub all_passed: bool,
    /// True when every sampled point fell in the exceptional set.
    pub no_points_outside: bool,
}

/// At every sampled point outside the exceptional set, checks that the
/// kernel of the evaluated quadratic-map matrix is one-dimensional and
/// aligned with `[2 - H*H, 1, ..., 1]`.
pub fn uniqueness_check(h: &PolyphaseVector, grid: &SamplingGrid) -> UniquenessReport {
    let p = build_lp2(h);
    let f = f_of_phi(&p);
    let q = h.q();
    let dim = h.dim();
    let norm_sq = h.norm_sq();

    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut violations = Vec::new();

    for t in grid.points(dim) {
        if in_exceptional_set(h, &t, EXCEPTIONAL_TOL) {
            skipped += 1;
            continue;
        }
        checked += 1;
        let m = f.eval(&t);
        // pad square so the SVD carries the full right singular basis;
        // zero rows change neither singular values nor right vectors
        let nrows = m.nrows().max(q + 1);
        let padded = DMatrix::from_fn(nrows, q + 1, |i, j| {
            if i < m.nrows() {
                m[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let svd = padded.svd(false, true);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
        });
        let svals: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
        let smax = svals[0].max(f64::MIN_POSITIVE);
        let rank = svals.iter().filter(|&&s| s / smax > RANK_CUTOFF).count();
        let kernel_dim = (q + 1) - rank;

        // predicted kernel direction [2 - H*H, 1, ..., 1] evaluated at t
        let mut target = DMatrix::zeros(q + 1, 1);
        target[(0, 0)] = Complex64::new(2.0, 0.0) - norm_sq.eval(&t);
        for i in 1..=q {
            target[(i, 0)] = Complex64::new(1.0, 0.0);
        }

        // right singular vector of the smallest singular value: v_t = V^H,
        // so the vector is the conjugated row
        let v_t = svd.v_t.as_ref().expect("svd with v requested");
        let kernel_row = v_t.row(*order.last().expect("nonempty"));
        let kernel_vec: Vec<Complex64> = kernel_row.iter().map(|c| c.conj()).collect();
        // sin(angle) via the orthogonal residual, stable for small angles
        let tn = target.norm();
        let inner: Complex64 = target
            .iter()
            .zip(kernel_vec.iter())
            .map(|(u, v)| u.conj() * v)
            .sum();
        let proj_coeff = inner / Complex64::new(tn * tn, 0.0);
        let mut resid = 0.0f64;
        let mut vnorm = 0.0f64;
        for i in 0..=q {
            let w = kernel_vec[i] - proj_coeff * target[(i, 0)];
            resid += w.norm_sqr();
            vnorm += kernel_vec[i].norm_sqr();
        }
        let angle = (resid.sqrt() / vnorm.sqrt()).min(1.0).asin();

        let passed = kernel_dim == 1 && angle <= KERNEL_ANGLE_TOL;
        if !passed {
            violations.push(UniquenessPoint {
                omega: t.omega().to_vec(),
                kernel_dim,
                angle,
                passed,
            });
        }
    }

    UniquenessReport {
        points_checked: checked,
        points_skipped_exceptional: skipped,
        all_passed: violations.is_empty() && checked > 0,
        no_points_outside: checked == 0,
        violations,
    }
}
