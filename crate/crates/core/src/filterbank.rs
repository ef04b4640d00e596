//! FIR filters on Z^n with integer dilation, polyphase decomposition and
//! reconstruction, refinement masks and accuracy orders, and the scaled
//! tight wavelet filter bank construction.
//!
//! Given a lowpass filter `h` with positive accuracy and polyphase column
//! `H`, the scaled matrix `[m_H H, I - H H*]` is paraunitary whenever
//! `|m_H|^2 = 2 - H*H`; in one dimension that factor always exists under
//! strict positivity and is produced by the spectral module. The columns
//! of `I - H H*` reconstruct to highpass filters, so the result is a tight
//! wavelet filter bank with the same accuracy as `h` and support at most
//! doubled.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intmat::IntMatrix;
use crate::laurent::{LaurentError, LaurentMatrix, LaurentPoly, SamplingGrid, TorusPoint};
use crate::lp2::{self, Lp2Error, PolyphaseVector};
use crate::spectral::{self, HermitianLaurentPoly, SpectralError};

/// Tolerance for classifying a filter by its coefficient sum.
pub const KIND_TOL: f64 = 1e-10;
/// Tolerance on the residual of a caller-supplied spectral factor.
pub const FACTOR_TOL: f64 = 1e-9;
/// Tolerance for derivative values when counting mask zeros.
pub const ACCURACY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("dilation matrix must have |det| >= 2, got {0}")]
    BadDeterminant(i64),
    #[error("expected {expected} coset representatives, got {got}")]
    CosetCount { expected: usize, got: usize },
    #[error("first coset representative must be 0")]
    NonzeroFirstCoset,
    #[error("coset representatives {0:?} and {1:?} coincide modulo the dilation lattice")]
    CosetCollision(Vec<i64>, Vec<i64>),
    #[error("tap index {0:?} does not fall in any coset")]
    CosetMismatch(Vec<i64>),
    #[error("dual coset offsets fail the orthogonality identity (residual {0:e})")]
    BadDualCosets(f64),
    #[error("filter is not lowpass: coefficient sum {got} != sqrt(q) = {want}")]
    NotLowpass { got: f64, want: f64 },
    #[error("filter lacks positive accuracy: H_nu(1) = {got} != 1/sqrt(q) at coset {nu:?}")]
    NoPositiveAccuracy { nu: Vec<i64>, got: f64 },
    #[error("supplied spectral factor does not square to 2 - H*H (residual {0:e})")]
    FactorMismatch(f64),
    #[error("accuracy order is only defined for univariate masks (dim {0})")]
    NotUnivariate(usize),
    #[error("signal length {len} is not a multiple of the dilation factor {lambda}")]
    BadSignalLength { len: usize, lambda: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Lp2(#[from] Lp2Error),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
}

/// Integer dilation data: the matrix, a complete set of coset
/// representatives of `Z^n / Lambda Z^n` with `nu_0 = 0`, and the matching
/// dual frequency offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct DilationSpec {
    lambda: IntMatrix,
    cosets: Vec<Vec<i64>>,
    dual_cosets: Vec<Vec<f64>>,
}

impl DilationSpec {
    /// Univariate dilation by an integer `lambda >= 2`, cosets
    /// `{0, ..., lambda-1}` and duals `2 pi j / lambda` folded to (-pi, pi].
    pub fn univariate(lambda: i64) -> Result<Self, FilterError> {
        let cosets = (0..lambda.abs().max(1)).map(|j| vec![j]).collect();
        let duals = (0..lambda.abs().max(1))
            .map(|j| {
                let mut g = 2.0 * std::f64::consts::PI * j as f64 / lambda.abs() as f64;
                if g > std::f64::consts::PI {
                    g -= 2.0 * std::f64::consts::PI;
                }
                vec![g]
            })
            .collect();
        Self::new(IntMatrix::scalar(lambda), cosets, duals)
    }

    pub fn new(
        lambda: IntMatrix,
        cosets: Vec<Vec<i64>>,
        dual_cosets: Vec<Vec<f64>>,
    ) -> Result<Self, FilterError> {
        let det = lambda.det();
        let q = det.unsigned_abs() as usize;
        if q < 2 {
            return Err(FilterError::BadDeterminant(det));
        }
        if cosets.len() != q {
            return Err(FilterError::CosetCount {
                expected: q,
                got: cosets.len(),
            });
        }
        if dual_cosets.len() != q {
            return Err(FilterError::CosetCount {
                expected: q,
                got: dual_cosets.len(),
            });
        }
        if cosets[0].iter().any(|&v| v != 0) {
            return Err(FilterError::NonzeroFirstCoset);
        }
        // pairwise distinct mod Lambda Z^n
        for i in 0..q {
            for j in i + 1..q {
                let diff: Vec<i64> = cosets[i]
                    .iter()
                    .zip(&cosets[j])
                    .map(|(a, b)| a - b)
                    .collect();
                if lambda.solve_integer(&diff).is_some() {
                    return Err(FilterError::CosetCollision(
                        cosets[i].clone(),
                        cosets[j].clone(),
                    ));
                }
            }
        }
        // orthogonality: sum_nu e^{i gamma . nu} = q for gamma = 0, else 0
        let mut worst = 0.0f64;
        for (gi, gamma) in dual_cosets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for nu in &cosets {
                let phase: f64 = gamma.iter().zip(nu).map(|(g, &n)| g * n as f64).sum();
                acc += Complex64::from_polar(1.0, phase);
            }
            let target = if gi == 0 { q as f64 } else { 0.0 };
            worst = worst.max((acc - Complex64::new(target, 0.0)).norm());
        }
        if worst > 1e-9 {
            return Err(FilterError::BadDualCosets(worst));
        }
        Ok(DilationSpec {
            lambda,
            cosets,
            dual_cosets,
        })
    }

    pub fn n(&self) -> usize {
        self.lambda.rows()
    }

    pub fn q(&self) -> usize {
        self.lambda.det().unsigned_abs() as usize
    }

    pub fn lambda(&self) -> &IntMatrix {
        &self.lambda
    }

    pub fn cosets(&self) -> &[Vec<i64>] {
        &self.cosets
    }

    pub fn dual_cosets(&self) -> &[Vec<f64>] {
        &self.dual_cosets
    }

    /// Which coset `k` belongs to, along with the quotient `k'` such that
    /// `k = Lambda k' + nu_j`.
    pub fn locate(&self, k: &[i64]) -> Option<(usize, Vec<i64>)> {
        for (j, nu) in self.cosets.iter().enumerate() {
            let diff: Vec<i64> = k.iter().zip(nu).map(|(a, b)| a - b).collect();
            if let Some(x) = self.lambda.solve_integer(&diff) {
                return Some((j, x));
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    Lowpass,
    Highpass,
    Neither,
}

/// Real FIR filter on Z^n carrying its dilation data.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter {
    dilation: DilationSpec,
    coeffs: BTreeMap<Vec<i64>, f64>,
}

impl Filter {
    pub fn new(dilation: DilationSpec, coeffs: impl IntoIterator<Item = (Vec<i64>, f64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in coeffs {
            assert_eq!(k.len(), dilation.n(), "tap index dimension mismatch");
            if c != 0.0 {
                *map.entry(k).or_insert(0.0) += c;
            }
        }
        map.retain(|_, c: &mut f64| *c != 0.0);
        Filter {
            dilation,
            coeffs: map,
        }
    }

    /// Univariate filter from consecutive taps starting at `offset`.
    pub fn univariate(lambda: i64, offset: i64, taps: &[f64]) -> Result<Self, FilterError> {
        let d = DilationSpec::univariate(lambda)?;
        Ok(Filter::new(
            d,
            taps.iter()
                .enumerate()
                .map(|(j, &c)| (vec![offset + j as i64], c)),
        ))
    }

    pub fn dilation(&self) -> &DilationSpec {
        &self.dilation
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.coeffs.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn coeff(&self, k: &[i64]) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn num_taps(&self) -> usize {
        self.coeffs.len()
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.values().sum()
    }

    pub fn kind(&self) -> FilterKind {
        let s = self.sum();
        let q = self.dilation.q() as f64;
        if (s - q.sqrt()).abs() <= KIND_TOL {
            FilterKind::Lowpass
        } else if s.abs() <= KIND_TOL {
            FilterKind::Highpass
        } else {
            FilterKind::Neither
        }
    }

    /// Tap index range along one axis, `None` for the zero filter.
    pub fn support_range(&self, axis: usize) -> Option<(i64, i64)> {
        let mut r = None;
        for k in self.coeffs.keys() {
            let e = k[axis];
            r = Some(match r {
                None => (e, e),
                Some((lo, hi)) => (i64::min(lo, e), i64::max(hi, e)),
            });
        }
        r
    }

    /// The z-transform `H(z) = sum_k h(k) z^-k`.
    pub fn z_transform(&self) -> LaurentPoly {
        LaurentPoly::new(
            self.dilation.n(),
            self.coeffs.iter().map(|(k, &c)| (k.clone(), c)),
        )
        .expect("filter taps are well formed")
    }

    /// Same filter with all tap indices shifted by `t`.
    pub fn shifted(&self, t: &[i64]) -> Self {
        Filter {
            dilation: self.dilation.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, &c)| (k.iter().zip(t).map(|(a, b)| a + b).collect(), c))
                .collect(),
        }
    }
}

/// Splits a filter into its q coset subfilters: entry `j` is the
/// z-transform of `k -> h(Lambda k + nu_j)`.
pub fn polyphase_decompose(h: &Filter) -> Result<PolyphaseVector, FilterError> {
    let d = h.dilation();
    let q = d.q();
    let n = d.n();
    let mut parts: Vec<Vec<(Vec<i64>, f64)>> = vec![Vec::new(); q];
    for (k, c) in h.coeffs() {
        let (j, kp) = d
            .locate(k)
            .ok_or_else(|| FilterError::CosetMismatch(k.to_vec()))?;
        parts[j].push((kp, c));
    }
    let entries: Vec<LaurentPoly> = parts
        .into_iter()
        .map(|terms| LaurentPoly::new(n, terms).expect("polyphase terms"))
        .collect();
    Ok(PolyphaseVector::new(entries)?)
}

/// Inverse of [`polyphase_decompose`]: `h(Lambda k + nu_j)` is the
/// coefficient of `z^-k` in entry `j`.
pub fn polyphase_reconstruct(h: &PolyphaseVector, d: &DilationSpec) -> Filter {
    assert_eq!(h.q(), d.q(), "polyphase length must match |det Lambda|");
    let mut coeffs: Vec<(Vec<i64>, f64)> = Vec::new();
    for (j, nu) in d.cosets().iter().enumerate() {
        for (kp, c) in h.entry(j).terms() {
            let k: Vec<i64> = d
                .lambda()
                .mul_vec(kp)
                .iter()
                .zip(nu)
                .map(|(a, b)| a + b)
                .collect();
            coeffs.push((k, c));
        }
    }
    Filter::new(d.clone(), coeffs)
}

/// Reconstructs a filter from a bare column of q polynomials, allowing
/// identically zero entries (unlike [`PolyphaseVector`]).
fn reconstruct_column(col: &[LaurentPoly], d: &DilationSpec) -> Filter {
    let mut coeffs: Vec<(Vec<i64>, f64)> = Vec::new();
    for (j, nu) in d.cosets().iter().enumerate() {
        for (kp, c) in col[j].terms() {
            let k: Vec<i64> = d
                .lambda()
                .mul_vec(kp)
                .iter()
                .zip(nu)
                .map(|(a, b)| a + b)
                .collect();
            coeffs.push((k, c));
        }
    }
    Filter::new(d.clone(), coeffs)
}

/// Normalized frequency response `tau(omega) = H(e^{i omega}) / sqrt(q)`
/// of a lowpass filter.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementMask {
    tau: LaurentPoly,
    dilation: DilationSpec,
}

impl RefinementMask {
    pub fn tau(&self) -> &LaurentPoly {
        &self.tau
    }

    pub fn dilation(&self) -> &DilationSpec {
        &self.dilation
    }

    pub fn eval(&self, t: &TorusPoint) -> Complex64 {
        self.tau.eval(t)
    }
}

pub fn mask_of(h: &Filter) -> Result<RefinementMask, FilterError> {
    let q = h.dilation().q() as f64;
    if h.kind() != FilterKind::Lowpass {
        return Err(FilterError::NotLowpass {
            got: h.sum(),
            want: q.sqrt(),
        });
    }
    Ok(RefinementMask {
        tau: h.z_transform().scale(1.0 / q.sqrt()),
        dilation: h.dilation().clone(),
    })
}

/// Positive accuracy criterion: `H_nu(1) = 1/sqrt(q)` for every coset.
/// Works in any dimension.
pub fn has_positive_accuracy(h: &Filter) -> Result<(), FilterError> {
    let hv = polyphase_decompose(h)?;
    let d = h.dilation();
    let origin = TorusPoint::new(vec![0.0; d.n()]);
    let want = 1.0 / (d.q() as f64).sqrt();
    for (j, nu) in d.cosets().iter().enumerate() {
        let v = hv.entry(j).eval(&origin).re;
        if (v - want).abs() > ACCURACY_TOL {
            return Err(FilterError::NoPositiveAccuracy {
                nu: nu.clone(),
                got: v,
            });
        }
    }
    Ok(())
}

/// Largest N such that all derivatives of order < N of `tau` vanish at
/// every nonzero dual coset offset. Univariate only.
pub fn accuracy_order(m: &RefinementMask) -> Result<usize, FilterError> {
    if m.dilation.n() != 1 {
        return Err(FilterError::NotUnivariate(m.dilation.n()));
    }
    let terms: Vec<(f64, f64)> = m.tau.terms().map(|(k, c)| (k[0] as f64, c)).collect();
    if terms.is_empty() {
        return Ok(0);
    }
    let max_order = terms.len(); // a trig polynomial cannot vanish deeper
    for order in 0..max_order {
        let scale: f64 = terms
            .iter()
            .map(|&(k, c)| c.abs() * k.abs().powi(order as i32))
            .sum::<f64>()
            .max(1.0);
        for gamma in m.dilation.dual_cosets().iter().skip(1) {
            let g = gamma[0];
            // d^m/domega^m of sum c e^{-ik omega} is sum c (-ik)^m e^{-ik omega}
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k, c) in &terms {
                let factor = Complex64::new(0.0, -k).powu(order as u32);
                acc += c * factor * Complex64::from_polar(1.0, -k * g);
            }
            if acc.norm() > ACCURACY_TOL * scale {
                return Ok(order);
            }
        }
    }
    Ok(max_order)
}

/// Residual certificate attached to a constructed bank.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TightnessCertificate {
    pub poly_residual: f64,
    pub grid_residual: f64,
    pub tolerance: f64,
    pub accuracy_in: Option<usize>,
    pub accuracy_out: Option<usize>,
    /// Tap index range of the constructed lowpass, per axis.
    pub lowpass_support: Vec<(i64, i64)>,
}

/// One lowpass plus q highpass synthesis filters with dilation data.
#[derive(Clone, Debug)]
pub struct WaveletBank {
    pub lowpass: Filter,
    pub highpass: Vec<Filter>,
    pub tight: bool,
    /// The polyphase column and scaling factor that produced the bank.
    pub provenance: Option<(PolyphaseVector, LaurentPoly)>,
    pub certificate: TightnessCertificate,
}

impl WaveletBank {
    /// Synthesis polyphase matrix `[G, highpass columns]` with `G` the
    /// lowpass polyphase column.
    pub fn polyphase_matrix(&self) -> Result<LaurentMatrix, FilterError> {
        let d = self.lowpass.dilation();
        let q = d.q();
        let n = d.n();
        let mut cols: Vec<Vec<LaurentPoly>> = Vec::with_capacity(q + 1);
        for f in self.all_filters() {
            let mut parts: Vec<Vec<(Vec<i64>, f64)>> = vec![Vec::new(); q];
            for (k, c) in f.coeffs() {
                let (j, kp) = d
                    .locate(k)
                    .ok_or_else(|| FilterError::CosetMismatch(k.to_vec()))?;
                parts[j].push((kp, c));
            }
            cols.push(
                parts
                    .into_iter()
                    .map(|t| LaurentPoly::new(n, t).expect("polyphase terms"))
                    .collect(),
            );
        }
        Ok(LaurentMatrix::from_fn(q, cols.len(), |i, j| {
            cols[j][i].clone()
        })?)
    }

    pub fn all_filters(&self) -> impl Iterator<Item = &Filter> {
        std::iter::once(&self.lowpass).chain(self.highpass.iter())
    }
}

fn assemble_bank(
    hv: &PolyphaseVector,
    d: &DilationSpec,
    m_h: &LaurentPoly,
    accuracy_in: Option<usize>,
) -> Result<WaveletBank, FilterError> {
    let q = d.q();
    let dim = d.n();

    // scaled lowpass column m_H * H
    let scaled = PolyphaseVector::new(hv.entries().iter().map(|e| e * m_h).collect::<Vec<_>>())?;
    let lowpass = polyphase_reconstruct(&scaled, d);

    // highpass filters from the columns of I - H H*
    let phi = lp2::build_lp2(hv);
    let highpass: Vec<Filter> = (1..=q)
        .map(|j| reconstruct_column(&phi.matrix().column(j), d))
        .collect();

    // paraunitarity of [m_H H, I - H H*]
    let scaled_matrix = LaurentMatrix::from_fn(q, q + 1, |i, j| {
        if j == 0 {
            scaled.entry(i).clone()
        } else {
            phi.matrix().get(i, j).clone()
        }
    })?;
    let grid = SamplingGrid::uniform(if dim == 1 { 256 } else { 32 });
    let report = lp2::is_paraunitary(&scaled_matrix, &grid, lp2::IDENTITY_TOL);

    let accuracy_out = if dim == 1 {
        Some(accuracy_order(&mask_of(&lowpass)?)?)
    } else {
        None
    };
    let lowpass_support = (0..dim)
        .map(|ax| lowpass.support_range(ax).unwrap_or((0, 0)))
        .collect();

    Ok(WaveletBank {
        lowpass,
        highpass,
        tight: report.passed,
        provenance: Some((hv.clone(), m_h.clone())),
        certificate: TightnessCertificate {
            poly_residual: report.poly_residual,
            grid_residual: report.grid_residual,
            tolerance: report.tolerance,
            accuracy_in,
            accuracy_out,
            lowpass_support,
        },
    })
}

/// Univariate tight wavelet bank construction. The input must be lowpass
/// with positive accuracy and satisfy `2 - H*H > 0` on the torus; the
/// scaling factor is produced by spectral factorization. The input
/// support is normalized to start at 0 first.
pub fn construct_tight(h: &Filter) -> Result<WaveletBank, FilterError> {
    let d = h.dilation();
    if d.n() != 1 {
        return Err(FilterError::NotUnivariate(d.n()));
    }
    let q = d.q() as f64;
    if h.kind() != FilterKind::Lowpass {
        return Err(FilterError::NotLowpass {
            got: h.sum(),
            want: q.sqrt(),
        });
    }
    let h = match h.support_range(0) {
        Some((lo, _)) if lo != 0 => h.shifted(&[-lo]),
        _ => h.clone(),
    };
    has_positive_accuracy(&h)?;

    let hv = polyphase_decompose(&h)?;
    let b0 = &LaurentPoly::constant(1, 2.0) - &hv.norm_sq();
    let p = HermitianLaurentPoly::new(b0)?;
    let cert = spectral::certify_positive(&p, true)?;
    if !cert.passed {
        return Err(FilterError::Spectral(SpectralError::Negative {
            min: cert.grid_min,
            at: cert.grid_argmin,
        }));
    }
    let factor = spectral::fejer_riesz(&p)?;

    let accuracy_in = Some(accuracy_order(&mask_of(&h)?)?);
    assemble_bank(&hv, h.dilation(), &factor.q_poly, accuracy_in)
}

/// Multivariate variant: the caller supplies the factor `m_H`, which is
/// checked against `2 - H*H` before the bank is assembled.
pub fn construct_tight_with_factor(
    h: &Filter,
    m_h: &LaurentPoly,
) -> Result<WaveletBank, FilterError> {
    let d = h.dilation();
    let q = d.q() as f64;
    if h.kind() != FilterKind::Lowpass {
        return Err(FilterError::NotLowpass {
            got: h.sum(),
            want: q.sqrt(),
        });
    }
    has_positive_accuracy(h)?;

    let hv = polyphase_decompose(h)?;
    let b0 = &LaurentPoly::constant(d.n(), 2.0) - &hv.norm_sq();
    let sq = m_h.try_mul(&m_h.involution())?;
    let residual = sq.max_coeff_diff(&b0);
    if residual > FACTOR_TOL {
        return Err(FilterError::FactorMismatch(residual));
    }

    let accuracy_in = if d.n() == 1 {
        Some(accuracy_order(&mask_of(h)?)?)
    } else {
        None
    };
    assemble_bank(&hv, d, m_h, accuracy_in)
}

/// Discrepancy report for the autocorrelation identity
/// `H*(e^{i Lambda^T omega}) H(e^{i Lambda^T omega}) =
///  sum_gamma |tau(omega + gamma)|^2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutocorrelationReport {
    pub max_discrepancy: f64,
    pub worst_omega: Vec<f64>,
    /// Largest left-hand value seen; bounding it below 2 is how the
    /// positivity hypothesis is read off from the mask side.
    pub max_lhs: f64,
}

pub fn mask_autocorrelation_sum(
    h: &Filter,
    grid: &SamplingGrid,
) -> Result<AutocorrelationReport, FilterError> {
    let d = h.dilation();
    let hv = polyphase_decompose(h)?;
    let mask = mask_of(h)?;
    let lt = d.lambda().transpose();

    let mut worst = 0.0f64;
    let mut worst_omega = vec![0.0; d.n()];
    let mut max_lhs = 0.0f64;
    for t in grid.points(d.n()) {
        let folded: Vec<f64> = (0..d.n())
            .map(|i| (0..d.n()).map(|j| lt.get(i, j) as f64 * t.omega()[j]).sum())
            .collect();
        let tp = TorusPoint::new(folded);
        let lhs: f64 = hv.entries().iter().map(|e| e.eval(&tp).norm_sqr()).sum();
        let rhs: f64 = d
            .dual_cosets()
            .iter()
            .map(|g| mask.eval(&t.shifted(g)).norm_sqr())
            .sum();
        let diff = (lhs - rhs).abs();
        if diff > worst {
            worst = diff;
            worst_omega = t.omega().to_vec();
        }
        max_lhs = max_lhs.max(lhs);
    }
    Ok(AutocorrelationReport {
        max_discrepancy: worst,
        worst_omega,
        max_lhs,
    })
}

/// Analysis by the time-reversed filters with downsampling, then synthesis
/// by upsampling and filtering, on a periodic signal. Returns the max
/// absolute reconstruction error; zero up to roundoff for a tight bank.
pub fn simulate_pr(bank: &WaveletBank, signal: &[f64]) -> Result<f64, FilterError> {
    let d = bank.lowpass.dilation();
    if d.n() != 1 {
        return Err(FilterError::NotUnivariate(d.n()));
    }
    let lambda = d.q();
    let len = signal.len();
    if len == 0 || !len.is_multiple_of(lambda) {
        return Err(FilterError::BadSignalLength { len, lambda });
    }
    let m = len / lambda;
    let mut recon = vec![0.0f64; len];
    for f in bank.all_filters() {
        let taps: Vec<(i64, f64)> = f.coeffs().map(|(k, c)| (k[0], c)).collect();
        // analysis: y[t] = sum_k f(k) x[lambda t + k], indices periodic
        let mut sub = vec![0.0f64; m];
        for (t, slot) in sub.iter_mut().enumerate() {
            let base = (t * lambda) as i64;
            *slot = taps
                .iter()
                .map(|&(k, c)| c * signal[(base + k).rem_euclid(len as i64) as usize])
                .sum();
        }
        // synthesis: recon[lambda t + k] += y[t] f(k)
        for (t, &y) in sub.iter().enumerate() {
            let base = (t * lambda) as i64;
            for &(k, c) in &taps {
                recon[(base + k).rem_euclid(len as i64) as usize] += y * c;
            }
        }
    }
    Ok(signal
        .iter()
        .zip(&recon)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------
// file formats

/// Serialized filter: `lambda` is a scalar (univariate) or an integer
/// matrix; cosets and dual cosets may be omitted in the univariate case.
#[derive(Serialize, Deserialize)]
pub struct FilterFile {
    pub lambda: LambdaRepr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cosets: Option<Vec<Vec<i64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_cosets: Option<Vec<Vec<f64>>>,
    pub coeffs: Vec<TapRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaRepr {
    Scalar(i64),
    Matrix(Vec<Vec<i64>>),
}

#[derive(Serialize, Deserialize)]
pub struct TapRepr {
    pub k: Vec<i64>,
    pub v: f64,
}

impl FilterFile {
    pub fn into_filter(self) -> Result<Filter, FilterError> {
        let dilation = match self.lambda {
            LambdaRepr::Scalar(l) => match (self.cosets, self.dual_cosets) {
                (None, None) => DilationSpec::univariate(l)?,
                (cosets, duals) => {
                    let default = DilationSpec::univariate(l)?;
                    DilationSpec::new(
                        IntMatrix::scalar(l),
                        cosets.unwrap_or_else(|| default.cosets().to_vec()),
                        duals.unwrap_or_else(|| default.dual_cosets().to_vec()),
                    )?
                }
            },
            LambdaRepr::Matrix(rows) => {
                let lam = IntMatrix::from_rows(&rows);
                let q = lam.det().unsigned_abs() as usize;
                let cosets = self.cosets.ok_or(FilterError::CosetCount {
                    expected: q,
                    got: 0,
                })?;
                let duals = self.dual_cosets.ok_or(FilterError::CosetCount {
                    expected: q,
                    got: 0,
                })?;
                DilationSpec::new(lam, cosets, duals)?
            }
        };
        Ok(Filter::new(
            dilation,
            self.coeffs.into_iter().map(|t| (t.k, t.v)),
        ))
    }

    pub fn from_filter(f: &Filter) -> Self {
        let d = f.dilation();
        let lambda = if d.n() == 1 {
            LambdaRepr::Scalar(d.lambda().get(0, 0))
        } else {
            LambdaRepr::Matrix(
                (0..d.n())
                    .map(|i| (0..d.n()).map(|j| d.lambda().get(i, j)).collect())
                    .collect(),
            )
        };
        FilterFile {
            lambda,
            cosets: Some(d.cosets().to_vec()),
            dual_cosets: Some(d.dual_cosets().to_vec()),
            coeffs: f
                .coeffs()
                .map(|(k, v)| TapRepr { k: k.to_vec(), v })
                .collect(),
        }
    }
}

/// Serialized wavelet bank: the dilation data, all filters, the tightness
/// certificate, and (when present) the polyphase column and scaling
/// factor the bank was built from.
#[derive(Serialize, Deserialize)]
pub struct BankFile {
    pub lambda: LambdaRepr,
    pub cosets: Vec<Vec<i64>>,
    pub dual_cosets: Vec<Vec<f64>>,
    pub tight: bool,
    pub lowpass: Vec<TapRepr>,
    pub highpass: Vec<Vec<TapRepr>>,
    pub certificate: TightnessCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<BankProvenance>,
}

#[derive(Serialize, Deserialize)]
pub struct BankProvenance {
    pub h: PolyphaseVector,
    pub m_h: LaurentPoly,
}

impl BankFile {
    pub fn from_bank(bank: &WaveletBank) -> Self {
        let d = bank.lowpass.dilation();
        let lambda = if d.n() == 1 {
            LambdaRepr::Scalar(d.lambda().get(0, 0))
        } else {
            LambdaRepr::Matrix(
                (0..d.n())
                    .map(|i| (0..d.n()).map(|j| d.lambda().get(i, j)).collect())
                    .collect(),
            )
        };
        let taps = |f: &Filter| -> Vec<TapRepr> {
            f.coeffs()
                .map(|(k, v)| TapRepr { k: k.to_vec(), v })
                .collect()
        };
        BankFile {
            lambda,
            cosets: d.cosets().to_vec(),
            dual_cosets: d.dual_cosets().to_vec(),
            tight: bank.tight,
            lowpass: taps(&bank.lowpass),
            highpass: bank.highpass.iter().map(taps).collect(),
            certificate: bank.certificate.clone(),
            provenance: bank.provenance.as_ref().map(|(h, m_h)| BankProvenance {
                h: h.clone(),
                m_h: m_h.clone(),
            }),
        }
    }

    pub fn into_bank(self) -> Result<WaveletBank, FilterError> {
        let lambda = match self.lambda {
            LambdaRepr::Scalar(l) => IntMatrix::scalar(l),
            LambdaRepr::Matrix(rows) => IntMatrix::from_rows(&rows),
        };
        let d = DilationSpec::new(lambda, self.cosets, self.dual_cosets)?;
        let build = |taps: Vec<TapRepr>| -> Filter {
            Filter::new(d.clone(), taps.into_iter().map(|t| (t.k, t.v)))
        };
        Ok(WaveletBank {
            lowpass: build(self.lowpass),
            highpass: self.highpass.into_iter().map(build).collect(),
            tight: self.tight,
            provenance: self.provenance.map(|p| (p.h, p.m_h)),
            certificate: self.certificate,
        })
    }
}
