//! Univariate nonnegativity certification on the torus and spectral
//! factorization `P(z) = |Q(z)|^2` with `Q` supported on `{0, ..., r}`.
//!
//! The factor is computed from the roots of `z^r P(z)`: roots come in
//! reciprocal-conjugate pairs, we keep one root per pair (the one inside
//! the unit disk), split even clusters on the circle evenly, and rescale
//! so the product reproduces `P`. Together with the positive leading
//! normalization `q(0) > 0` this makes the factor unique and reproduces
//! the closed-form factors of the worked constructions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPoly};

/// Conjugate-symmetry slack allowed when admitting a polynomial as
/// self-adjoint on the torus.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Roots with `||lambda| - 1|` at or below this ride on the unit circle.
pub const CIRCLE_TOL: f64 = 1e-7;
/// Relative slack when matching a root against the reciprocal of another.
/// This is a coarse sanity check on the reciprocal pair structure (it
/// rejects asymmetric inputs early, where distances are O(1)); the factor
/// itself is built from the inside roots alone and is ultimately
/// validated by the residual gate. Clustered roots are located with
/// roughly sqrt(eps) accuracy, hence the loose setting.
pub const PAIR_TOL: f64 = 1e-3;
/// Residual gate on `|Q|^2 - P` for an accepted factorization, relative
/// to the largest coefficient of the input.
pub const FACTOR_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("polynomial must be univariate, got dimension {0}")]
    NotUnivariate(usize),
    #[error("coefficients are not conjugate-symmetric: |p({k}) - p(-{k})| = {diff:e}")]
    NotSymmetric { k: i64, diff: f64 },
    #[error("polynomial is negative on the torus: sampled value {min:e} at omega = {at}")]
    Negative { min: f64, at: f64 },
    #[error("positivity inconclusive: grid min {grid_min:e} positive but certified bound {bound:e} straddles 0; retry with a denser grid")]
    Inconclusive { grid_min: f64, bound: f64 },
    #[error("roots do not pair under the reciprocal map: {0}")]
    UnpairedRoots(String),
    #[error("odd-multiplicity root cluster on the unit circle near angle {0}")]
    OddCircleCluster(f64),
    #[error("factor verification failed: residual {0:e}")]
    ResidualTooLarge(f64),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Univariate Laurent polynomial that is real-valued on the torus:
/// `p(-k) = p(k)` with real coefficients, support in `{-r, ..., r}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianLaurentPoly {
    base: LaurentPoly,
    half_degree: i64,
}

impl HermitianLaurentPoly {
    pub fn new(base: LaurentPoly) -> Result<Self, SpectralError> {
        if base.dim() != 1 {
            return Err(SpectralError::NotUnivariate(base.dim()));
        }
        let mut r = 0i64;
        for (k, c) in base.terms() {
            let k = k[0];
            let mirror = base.coeff(&[-k]);
            if (c - mirror).abs() > SYMMETRY_TOL {
                return Err(SpectralError::NotSymmetric {
                    k,
                    diff: (c - mirror).abs(),
                });
            }
            r = r.max(k.abs());
        }
        Ok(HermitianLaurentPoly {
            base,
            half_degree: r,
        })
    }

    /// From consecutive coefficients of `z^-offset, z^-(offset+1), ...`.
    pub fn from_coeffs(offset: i64, coeffs: &[f64]) -> Result<Self, SpectralError> {
        Self::new(LaurentPoly::from_coeffs1(offset, coeffs))
    }

    pub fn poly(&self) -> &LaurentPoly {
        &self.base
    }

    pub fn half_degree(&self) -> i64 {
        self.half_degree
    }

    /// Real value at angle `omega` (imaginary part is zero by symmetry).
    pub fn value_at(&self, omega: f64) -> f64 {
        self.base
            .terms()
            .map(|(k, c)| c * (k[0] as f64 * omega).cos())
            .sum()
    }
}

/// Sampling-plus-derivative-bound positivity certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub passed: bool,
    /// Certified lower bound for P on the whole torus.
    pub lower_bound: f64,
    /// Smallest sampled value and where it occurred.
    pub grid_min: f64,
    pub grid_argmin: f64,
    pub grid_points: usize,
}

fn default_grid(r: i64) -> usize {
    (64 * r.max(1) as usize).max(32_768)
}

/// Certifies `P >= 0` (or `P > 0` in strict mode) on the torus.
///
/// Samples N uniform angles and subtracts the worst-case excursion between
/// samples, using both the first-derivative bound `L1 = sum |k||p(k)|` and
/// the curvature bound `L2 = sum k^2 |p(k)|`; the certified bound is
/// `grid_min - min(pi L1 / N, pi^2 L2 / (2 N^2))`.
pub fn certify_positive(
    p: &HermitianLaurentPoly,
    strict: bool,
) -> Result<PositivityCertificate, SpectralError> {
    certify_positive_n(p, strict, default_grid(p.half_degree()))
}

pub fn certify_positive_n(
    p: &HermitianLaurentPoly,
    strict: bool,
    n: usize,
) -> Result<PositivityCertificate, SpectralError> {
    let n = n.max(4);
    let terms: Vec<(f64, f64)> = p.poly().terms().map(|(k, c)| (k[0] as f64, c)).collect();
    let scale: f64 = terms.iter().map(|&(_, c)| c.abs()).sum::<f64>().max(1.0);

    let mut grid_min = f64::INFINITY;
    let mut grid_argmin = 0.0;
    for j in 0..n {
        let w = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let v: f64 = terms.iter().map(|&(k, c)| c * (k * w).cos()).sum();
        if v < grid_min {
            grid_min = v;
            grid_argmin = w;
        }
    }

    let l1: f64 = terms.iter().map(|&(k, c)| k.abs() * c.abs()).sum();
    let l2: f64 = terms.iter().map(|&(k, c)| k * k * c.abs()).sum();
    let gap1 = std::f64::consts::PI * l1 / n as f64;
    let gap2 = std::f64::consts::PI.powi(2) * l2 / (2.0 * (n as f64) * (n as f64));
    let lower_bound = grid_min - gap1.min(gap2);

    if strict {
        if lower_bound > 0.0 {
            Ok(PositivityCertificate {
                passed: true,
                lower_bound,
                grid_min,
                grid_argmin,
                grid_points: n,
            })
        } else if grid_min <= SYMMETRY_TOL * scale {
            // witness of a zero or negative value on the grid
            Ok(PositivityCertificate {
                passed: false,
                lower_bound,
                grid_min,
                grid_argmin,
                grid_points: n,
            })
        } else {
            Err(SpectralError::Inconclusive {
                grid_min,
                bound: lower_bound,
            })
        }
    } else {
        // nonnegativity: sampled values must not be (numerically) negative
        let passed = grid_min >= -1e-10 * scale;
        Ok(PositivityCertificate {
            passed,
            lower_bound,
            grid_min,
            grid_argmin,
            grid_points: n,
        })
    }
}

/// The spectral factor `Q` with support in `{0, ..., r}`, plus the
/// certified lower bound of the input that was factored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralFactor {
    pub q_poly: LaurentPoly,
    pub certified_min: f64,
    /// Roots of `z^r P(z)` retained in the factor (inside-disk selection).
    pub selected_roots: Vec<(f64, f64)>,
}

/// Roots of the real polynomial with ascending coefficients `coeffs`
/// (leading coefficient nonzero), by companion-matrix eigenvalues with a
/// Newton polish, sorted canonically.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let n = deg;
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -coeffs[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();

    // one step of Newton polish per root (skipped near critical points)
    let horner = |x: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            d = d * x + v;
            v = v * x + Complex64::new(c, 0.0);
        }
        (v, d)
    };
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum();
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let (v, d) = horner(*r);
            if d.norm() > 1e-8 * scale {
                let step = v / d;
                if step.norm() < 0.5 {
                    *r -= step;
                }
            }
        }
    }
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    roots
}

/// Fejer-Riesz spectral factorization of a nonnegative polynomial.
pub fn fejer_riesz(p: &HermitianLaurentPoly) -> Result<SpectralFactor, SpectralError> {
    let cert = certify_positive(p, false)?;
    if !cert.passed {
        return Err(SpectralError::Negative {
            min: cert.grid_min,
            at: cert.grid_argmin,
        });
    }
    let certified_min = cert.lower_bound;

    // effective half degree from the actual support
    let r = p.poly().terms().map(|(k, _)| k[0].abs()).max().unwrap_or(0);

    if r == 0 {
        let c = p.poly().coeff(&[0]).max(0.0);
        return Ok(SpectralFactor {
            q_poly: LaurentPoly::constant(1, c.sqrt()),
            certified_min,
            selected_roots: Vec::new(),
        });
    }

    // z^r P(z) = sum_j p(r - j) z^j, degree 2r, palindromic coefficients
    let coeffs: Vec<f64> = (0..=2 * r).map(|j| p.poly().coeff(&[r - j])).collect();
    let roots = poly_roots(&coeffs);

    let mut inside: Vec<Complex64> = Vec::new();
    let mut outside: Vec<Complex64> = Vec::new();
    let mut circle: Vec<Complex64> = Vec::new();
    for root in roots {
        let m = root.norm();
        if (m - 1.0).abs() <= CIRCLE_TOL {
            circle.push(root);
        } else if m < 1.0 {
            inside.push(root);
        } else {
            outside.push(root);
        }
    }

    // pair every inside root with its reciprocal conjugate outside
    if inside.len() != outside.len() {
        return Err(SpectralError::UnpairedRoots(format!(
            "{} inside vs {} outside the unit circle",
            inside.len(),
            outside.len()
        )));
    }
    let mut used = vec![false; outside.len()];
    for &lam in &inside {
        let mirror = Complex64::new(1.0, 0.0) / lam.conj();
        let mut best: Option<(usize, f64)> = None;
        for (i, &mu) in outside.iter().enumerate() {
            if used[i] {
                continue;
            }
            let d = (mu - mirror).norm();
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((i, d));
            }
        }
        match best {
            Some((i, d)) if d <= PAIR_TOL * mirror.norm().max(1.0) => used[i] = true,
            _ => {
                return Err(SpectralError::UnpairedRoots(format!(
                    "no partner for root {lam} (expected near {mirror})"
                )))
            }
        }
    }

    // cluster circle roots and keep half of each cluster
    let mut selected: Vec<Complex64> = inside.clone();
    let mut remaining = circle;
    while let Some(seed) = remaining.pop() {
        let mut cluster = vec![seed];
        remaining.retain(|&c| {
            if (c - seed).norm() <= PAIR_TOL {
                cluster.push(c);
                false
            } else {
                true
            }
        });
        if cluster.len() % 2 != 0 {
            return Err(SpectralError::OddCircleCluster(seed.arg()));
        }
        // project the cluster mean back onto the circle
        let mean: Complex64 = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        let root = Complex64::from_polar(1.0, mean.arg());
        for _ in 0..cluster.len() / 2 {
            selected.push(root);
        }
    }

    if selected.len() != r as usize {
        return Err(SpectralError::UnpairedRoots(format!(
            "selected {} roots, expected {}",
            selected.len(),
            r
        )));
    }

    // monic product prod (z - zeta): ascending complex coefficients
    let mut prod = vec![Complex64::new(1.0, 0.0)];
    for &zeta in &selected {
        let mut next = vec![Complex64::new(0.0, 0.0); prod.len() + 1];
        for (m, &c) in prod.iter().enumerate() {
            next[m + 1] += c;
            next[m] -= c * zeta;
        }
        prod = next;
    }
    // Q0(z) = z^-r * prod(z): coefficient of z^-k is prod[r - k]
    let q0 = LaurentPoly::from_coeffs1(
        0,
        &(0..=r as usize)
            .map(|k| prod[r as usize - k].re)
            .collect::<Vec<_>>(),
    );
    let imag_leak = prod.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
    if imag_leak > 1e-8 * prod.iter().map(|c| c.norm()).fold(0.0f64, f64::max) {
        return Err(SpectralError::UnpairedRoots(format!(
            "selected roots are not conjugate-closed (imaginary leak {imag_leak:e})"
        )));
    }

    // positive rescale: least-squares fit of |Q0|^2 against P
    let g = &q0 * &q0.involution();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (k, gc) in g.terms() {
        num += p.poly().coeff(k) * gc;
        den += gc * gc;
    }
    let s2 = num / den;
    if s2.is_nan() || s2 <= 0.0 {
        return Err(SpectralError::UnpairedRoots(
            "inconsistent rescale; input is numerically degenerate".into(),
        ));
    }
    let mut q = q0.scale(s2.sqrt());
    if q.coeff(&[0]) < 0.0 {
        q = q.scale(-1.0);
    }

    let residual = (&q * &q.involution()).max_coeff_diff(p.poly());
    if residual > FACTOR_RESIDUAL_TOL * p.poly().max_abs_coeff().max(1.0) {
        return Err(SpectralError::ResidualTooLarge(residual));
    }

    Ok(SpectralFactor {
        q_poly: q,
        certified_min,
        selected_roots: selected.iter().map(|c| (c.re, c.im)).collect(),
    })
}

/// Round-trip oracle: builds `P = Q involution(Q)`, factors it back, and
/// returns the max coefficient difference between `|Q'|^2` and `P`.
pub fn roundtrip_check(q: &LaurentPoly) -> Result<f64, SpectralError> {
    if q.dim() != 1 {
        return Err(SpectralError::NotUnivariate(q.dim()));
    }
    let p_poly = q * &q.involution();
    let p = HermitianLaurentPoly::new(p_poly.clone())?;
    let factor = fejer_riesz(&p)?;
    let rebuilt = &factor.q_poly * &factor.q_poly.involution();
    Ok(rebuilt.max_coeff_diff(&p_poly))
}
