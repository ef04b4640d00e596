//! Evaluation of univariate refinable functions by exact subdivision, the
//! two-scale residual, a heuristic stability probe, and the smoothness
//! lower bound `alpha = beta - log_lambda ||xi||_inf - 1`.
//!
//! The refinement equation in the time domain reads
//! `phi(x) = lambda sum_k t(k) phi(lambda x - k)` where `t` are the mask
//! coefficients. Starting from the exact integer-grid values (the
//! eigenvalue-1 eigenvector of the transition matrix) every subdivision
//! step reproduces the next dyadic-level values exactly, so the sampled
//! profile satisfies the two-scale relation to roundoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filterbank::{FilterError, RefinementMask};
use crate::laurent::LaurentPoly;

/// Tolerance for accepting the transition-matrix kernel as 1-dimensional.
pub const EIGEN_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("cascade evaluation is univariate only (dim {0})")]
    NotUnivariate(usize),
    #[error("transition matrix lacks a simple eigenvalue 1 (kernel dimension {0})")]
    DegenerateMask(usize),
    #[error("mask has empty support")]
    EmptyMask,
    #[error(transparent)]
    Filter(#[from] FilterError),
}

/// Sampled refinable function on the grid `{offset + j / lambda^J}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinableProfile {
    /// Mask coefficients, re-indexed to start at 0.
    coeffs: Vec<f64>,
    lambda: i64,
    level: u32,
    /// Left end of the support interval in original coordinates.
    offset: f64,
    /// Integer grid length M: samples cover [offset, offset + M].
    grid_end: i64,
    samples: Vec<f64>,
}

impl RefinableProfile {
    pub fn lambda(&self) -> i64 {
        self.lambda
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Abscissa of sample `j`.
    pub fn x_of(&self, j: usize) -> f64 {
        self.offset + j as f64 / (self.lambda as f64).powi(self.level as i32)
    }

    /// Upper end of the true support, `offset + s / (lambda - 1)`.
    pub fn support_end(&self) -> f64 {
        self.offset + (self.coeffs.len() as f64 - 1.0) / (self.lambda as f64 - 1.0)
    }

    /// Riemann sum of the profile; 1 for a mask with positive accuracy.
    pub fn integral(&self) -> f64 {
        let h = (self.lambda as f64).powi(-(self.level as i32));
        self.samples.iter().sum::<f64>() * h
    }

    /// Builds a profile from externally produced samples (negative
    /// controls, measured data). No two-scale property is implied.
    pub fn from_samples(
        coeffs: Vec<f64>,
        lambda: i64,
        level: u32,
        offset: f64,
        samples: Vec<f64>,
    ) -> Self {
        let s = coeffs.len() as i64 - 1;
        let grid_end = div_ceil(s, lambda - 1).max(1);
        RefinableProfile {
            coeffs,
            lambda,
            level,
            offset,
            grid_end,
            samples,
        }
    }

    /// Max deviation from `sum_m phi(x - m) = 1` over one period of the
    /// sampling grid (partition of unity).
    pub fn partition_of_unity_residual(&self) -> f64 {
        let n = self.lambda.pow(self.level) as usize;
        let mut worst = 0.0f64;
        for r in 0..n {
            let mut acc = 0.0;
            let mut j = r;
            while j < self.samples.len() {
                acc += self.samples[j];
                j += n;
            }
            worst = worst.max((acc - 1.0).abs());
        }
        worst
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    (a + b - 1) / b
}

/// Exact integer-grid values of the refinable function: the normalized
/// kernel vector of `T - I` on the interior points, with the boundary
/// pinned to zero. Masks supported on at most one integer interval get
/// the indicator-style values `[1, 0]`.
fn integer_values(coeffs: &[f64], lambda: i64) -> Result<Vec<f64>, CascadeError> {
    let s = coeffs.len() as i64 - 1;
    let m_end = div_ceil(s, lambda - 1).max(1);
    if m_end == 1 {
        return Ok(vec![1.0, 0.0]);
    }
    let n = (m_end - 1) as usize; // interior points 1..=M-1
    let t = nalgebra::DMatrix::from_fn(n, n, |mi, ji| {
        let m = (mi + 1) as i64;
        let j = (ji + 1) as i64;
        let idx = lambda * m - j;
        if (0..=s).contains(&idx) {
            lambda as f64 * coeffs[idx as usize]
        } else {
            0.0
        }
    });
    let shifted = &t - nalgebra::DMatrix::identity(n, n);
    let svd = shifted.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let scale = sv[0].max(1.0);
    let kernel_dim = sv.iter().filter(|&&s| s / scale <= EIGEN_TOL).count();
    if kernel_dim != 1 {
        return Err(CascadeError::DegenerateMask(kernel_dim));
    }
    let v_t = svd.v_t.expect("svd with v requested");
    let kernel = v_t.row(n - 1); // singular values come ordered, smallest last
    let sum: f64 = kernel.iter().sum();
    if sum.abs() < 1e-12 {
        return Err(CascadeError::DegenerateMask(1));
    }
    let mut values = vec![0.0; m_end as usize + 1];
    for (i, &v) in kernel.iter().enumerate() {
        values[i + 1] = v / sum;
    }
    Ok(values)
}

/// Evaluates the refinable function of `mask` on the lambda-adic grid of
/// the given level by exact subdivision.
pub fn cascade(mask: &RefinementMask, levels: u32) -> Result<RefinableProfile, CascadeError> {
    if mask.dilation().n() != 1 {
        return Err(CascadeError::NotUnivariate(mask.dilation().n()));
    }
    let lambda = mask.dilation().lambda().get(0, 0);
    let (lo, hi) = mask.tau().exp_range(0).ok_or(CascadeError::EmptyMask)?;
    let coeffs: Vec<f64> = (lo..=hi).map(|k| mask.tau().coeff(&[k])).collect();
    let offset = lo as f64 / (lambda as f64 - 1.0);

    let mut values = integer_values(&coeffs, lambda)?;
    let s = coeffs.len() as i64 - 1;
    let grid_end = div_ceil(s, lambda - 1).max(1);

    for level in 0..levels {
        let step = lambda.pow(level);
        let old = values;
        let old_len = old.len() as i64;
        let new_len = (old_len - 1) * lambda + 1;
        let mut new = vec![0.0f64; new_len as usize];
        for (j, slot) in new.iter_mut().enumerate() {
            // phi(j / l^{L+1}) = lambda sum_k t_k phi((j - k l^L) / l^L)
            let mut acc = 0.0;
            for (k, &c) in coeffs.iter().enumerate() {
                let i = j as i64 - k as i64 * step;
                if (0..old_len).contains(&i) {
                    acc += c * old[i as usize];
                }
            }
            *slot = lambda as f64 * acc;
        }
        values = new;
    }

    Ok(RefinableProfile {
        coeffs,
        lambda,
        level: levels,
        offset,
        grid_end,
        samples: values,
    })
}

/// Max violation of the two-scale relation over the sampled grid.
pub fn refinement_residual(p: &RefinableProfile) -> f64 {
    let lambda = p.lambda;
    let level = p.level;
    if level == 0 {
        return 0.0;
    }
    let coarse_step = lambda.pow(level - 1);
    let len = p.samples.len() as i64;
    let get = |i: i64| -> f64 {
        if (0..len).contains(&i) {
            p.samples[i as usize]
        } else {
            0.0
        }
    };
    let mut worst = 0.0f64;
    for j in 0..len {
        // x = j / l^J, lambda x - k sits on the level-(J-1) grid, whose
        // points are the level-J indices divisible by lambda
        let mut acc = 0.0;
        for (k, &c) in p.coeffs.iter().enumerate() {
            acc += c * get(lambda * j - k as i64 * coarse_step * lambda);
        }
        worst = worst.max((p.samples[j as usize] - lambda as f64 * acc).abs());
    }
    worst
}

/// Smoothness data: `alpha = beta - log_lambda(xi_sup) - 1`, where
/// `xi_sup` is the sup of `|m|` on the torus. Positive alpha certifies
/// square integrability of the scaled refinable function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothnessEstimate {
    pub beta: f64,
    /// Sup of |m| on the torus (grid max with a Newton refinement).
    pub xi_sup: f64,
    pub alpha: f64,
    /// Sound upper bound for xi_sup (grid max plus excursion bound).
    pub xi_sup_bound: f64,
    /// Alpha recomputed from the sound bound; the conservative figure.
    pub alpha_certified: f64,
}

impl SmoothnessEstimate {
    pub fn l2_guaranteed(&self) -> bool {
        self.alpha_certified > 0.0
    }
}

/// Computes the smoothness bound for decay exponent `beta` and scaling
/// factor `m` with dilation `lambda`, maximizing `|m|` on a grid of
/// `grid_n` angles with one Newton refinement of the best point.
pub fn smoothness_bound(
    beta: f64,
    m: &LaurentPoly,
    lambda: i64,
    grid_n: usize,
) -> SmoothnessEstimate {
    let msq = &m.involution() * m; // |m|^2, real on the torus
    let terms: Vec<(f64, f64)> = msq.terms().map(|(k, c)| (k[0] as f64, c)).collect();
    let value = |w: f64| -> f64 { terms.iter().map(|&(k, c)| c * (k * w).cos()).sum() };
    let deriv = |w: f64| -> f64 { terms.iter().map(|&(k, c)| -c * k * (k * w).sin()).sum() };
    let second = |w: f64| -> f64 { terms.iter().map(|&(k, c)| -c * k * k * (k * w).cos()).sum() };

    let n = grid_n.max(64);
    let mut best_w = 0.0f64;
    let mut best_v = f64::NEG_INFINITY;
    for j in 0..n {
        let w = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let v = value(w);
        if v > best_v {
            best_v = v;
            best_w = w;
        }
    }
    // Newton refinement of the located maximum
    let mut w = best_w;
    for _ in 0..8 {
        let d2 = second(w);
        if d2 >= -1e-12 {
            break;
        }
        w -= deriv(w) / d2;
    }
    let refined = value(w).max(best_v);

    let l1: f64 = terms.iter().map(|&(k, c)| k.abs() * c.abs()).sum();
    let l2: f64 = terms.iter().map(|&(k, c)| k * k * c.abs()).sum();
    let gap = (std::f64::consts::PI * l1 / n as f64)
        .min(std::f64::consts::PI.powi(2) * l2 / (2.0 * (n as f64) * (n as f64)));

    let xi_sup = refined.max(0.0).sqrt();
    let xi_sup_bound = (best_v + gap).max(refined).max(0.0).sqrt();
    let log_lam = (lambda as f64).ln();
    let alpha = beta - xi_sup.ln() / log_lam - 1.0;
    let alpha_certified = beta - xi_sup_bound.ln() / log_lam - 1.0;
    SmoothnessEstimate {
        beta,
        xi_sup,
        alpha,
        xi_sup_bound,
        alpha_certified,
    }
}

/// Filter family selector for the built-in decay exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Interpolatory family of order 2k.
    Dd(u32),
    /// B-spline of order k.
    Bspline(u32),
    /// Hat function with non-dyadic dilation.
    Hat,
}

/// Lower bound for the decay exponent beta of the family's refinable
/// function: `2k - log2 P_k(3/4)` for the interpolatory family, `k` for
/// B-splines, and 2 for the hat.
pub fn family_beta(family: Family) -> f64 {
    match family {
        Family::Dd(k) => {
            assert!(k >= 1, "order parameter must be positive");
            2.0 * k as f64 - crate::families::dd_kernel(k, 0.75).log2()
        }
        Family::Bspline(k) => {
            assert!(k >= 1, "order parameter must be positive");
            k as f64
        }
        Family::Hat => 2.0,
    }
}

/// Advisory stability probe: approximates `phi_hat` from the samples and
/// reports the smallest value of `sum_j |phi_hat(w + 2 pi j)|^2` over an
/// omega grid. Near-zero minima flag a 2-pi-periodic zero. Heuristic,
/// not a proof.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub min_value: f64,
    pub argmin: f64,
    pub mean_value: f64,
    pub periods: i64,
}

pub fn stability_probe(p: &RefinableProfile, grid_n: usize) -> StabilityReport {
    let periods = 32i64;
    let h = (p.lambda as f64).powi(-(p.level as i32));
    let phi_hat = |w: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &v) in p.samples.iter().enumerate() {
            if v != 0.0 {
                let x = j as f64 * h;
                acc += v * Complex64::from_polar(1.0, -x * w);
            }
        }
        acc * h
    };
    let n = grid_n.max(32);
    let mut min_value = f64::INFINITY;
    let mut argmin = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let w = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let mut s = 0.0;
        for j in -periods..=periods {
            s += phi_hat(w + 2.0 * std::f64::consts::PI * j as f64).norm_sqr();
        }
        total += s;
        if s < min_value {
            min_value = s;
            argmin = w;
        }
    }
    StabilityReport {
        min_value,
        argmin,
        mean_value: total / n as f64,
        periods,
    }
}
