//! Built-in lowpass filter families: Deslauriers-Dubuc interpolatory
//! filters, B-splines, and the hat filter for general integer dilation.
//! These are the inputs of the worked bank constructions, generated in
//! closed form so no external data files are needed.

use crate::filterbank::{Filter, FilterError};
use crate::laurent::LaurentPoly;

/// Binomial coefficient in f64; arguments stay tiny here.
fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// `P_k(x) = sum_{j=0}^{k-1} C(k-1+j, j) x^j`, the kernel polynomial of
/// the interpolatory family.
pub fn dd_kernel(k: u32, x: f64) -> f64 {
    (0..k as u64)
        .map(|j| binomial(k as u64 - 1 + j, j) * x.powi(j as i32))
        .sum()
}

/// Deslauriers-Dubuc interpolatory lowpass filter of order 2k, dyadic
/// dilation, support {0, ..., 4k-2}, accuracy order 2k.
///
/// `H(z) = sqrt(2) z^{-(2k-1)} ((z + 2 + z^-1)/4)^k P_k(-(z - 2 + z^-1)/4)`.
pub fn dd_filter(k: u32) -> Result<Filter, FilterError> {
    assert!(k >= 1, "order parameter must be positive");
    let cos_sq = LaurentPoly::from_coeffs1(-1, &[0.25, 0.5, 0.25]);
    let sin_sq = LaurentPoly::from_coeffs1(-1, &[-0.25, 0.5, -0.25]);

    let mut cos_pow = LaurentPoly::one(1);
    for _ in 0..k {
        cos_pow = &cos_pow * &cos_sq;
    }
    let mut kernel = LaurentPoly::zero(1);
    let mut sin_pow = LaurentPoly::one(1);
    for j in 0..k as u64 {
        kernel = &kernel + &sin_pow.scale(binomial(k as u64 - 1 + j, j));
        sin_pow = &sin_pow * &sin_sq;
    }
    let shift = LaurentPoly::monomial1(2 * k as i64 - 1, 2.0f64.sqrt());
    let h = &(&shift * &cos_pow) * &kernel;

    let (lo, hi) = h.exp_range(0).expect("nonzero filter");
    let taps: Vec<f64> = (lo..=hi).map(|j| h.coeff(&[j])).collect();
    Filter::univariate(2, lo, &taps)
}

/// B-spline lowpass filter of order k, dyadic dilation: taps
/// `sqrt(2) C(k, j) / 2^k` on {0, ..., k}. Order 1 is the Haar filter.
pub fn bspline_filter(k: u32) -> Result<Filter, FilterError> {
    assert!(k >= 1, "order parameter must be positive");
    let scale = 2.0f64.sqrt() / 2.0f64.powi(k as i32);
    let taps: Vec<f64> = (0..=k as u64)
        .map(|j| scale * binomial(k as u64, j))
        .collect();
    Filter::univariate(2, 0, &taps)
}

/// Hat (triangle) lowpass filter for integer dilation `lambda >= 2`:
/// taps `sqrt(lambda) (lambda - |j - lambda + 1|) / lambda^2` on
/// {0, ..., 2 lambda - 2}. The refinable function is the hat on [0, 2].
pub fn hat_filter(lambda: i64) -> Result<Filter, FilterError> {
    assert!(lambda >= 2, "dilation factor must be at least 2");
    let l = lambda as f64;
    let taps: Vec<f64> = (0..=2 * (lambda - 1))
        .map(|j| l.sqrt() * (l - (j - lambda + 1).abs() as f64) / (l * l))
        .collect();
    Filter::univariate(lambda, 0, &taps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterbank::FilterKind;

    #[test]
    fn dd1_is_the_hat() {
        let dd = dd_filter(1).unwrap();
        let hat = hat_filter(2).unwrap();
        assert_eq!(dd, hat);
        let s = 2.0f64.sqrt();
        assert!((dd.coeff(&[0]) - s / 4.0).abs() <= 1e-15);
        assert!((dd.coeff(&[1]) - s / 2.0).abs() <= 1e-15);
        assert!((dd.coeff(&[2]) - s / 4.0).abs() <= 1e-15);
    }

    #[test]
    fn dd_support_and_kind() {
        for k in 1..=6 {
            let f = dd_filter(k).unwrap();
            assert_eq!(f.kind(), FilterKind::Lowpass, "k={k}");
            let (lo, hi) = f.support_range(0).unwrap();
            assert_eq!((lo, hi), (0, 4 * k as i64 - 2), "k={k}");
        }
    }

    #[test]
    fn dd_is_interpolatory() {
        // the odd subfilter is a pure delay: h(2m + 1) = delta at the center
        for k in 1..=4u32 {
            let f = dd_filter(k).unwrap();
            let center = 2 * k as i64 - 1;
            for m in 0..(2 * k as i64) {
                let idx = 2 * m + 1;
                let v = f.coeff(&[idx]);
                let want = if idx == center {
                    1.0 / 2.0f64.sqrt()
                } else {
                    0.0
                };
                assert!((v - want).abs() <= 1e-12, "k={k} idx={idx} v={v}");
            }
        }
    }

    #[test]
    fn dd2_known_coefficients() {
        // tau for the order-4 interpolatory filter: (-1, 0, 9, 16, 9, 0, -1)/32
        let f = dd_filter(2).unwrap();
        let want = [-1.0, 0.0, 9.0, 16.0, 9.0, 0.0, -1.0];
        for (j, w) in want.iter().enumerate() {
            let tap = f.coeff(&[j as i64]);
            assert!(
                (tap - 2.0f64.sqrt() * w / 32.0).abs() <= 1e-14,
                "tap {j}: {tap}"
            );
        }
    }

    #[test]
    fn bspline_taps() {
        let haar = bspline_filter(1).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((haar.coeff(&[0]) - s).abs() <= 1e-15);
        assert!((haar.coeff(&[1]) - s).abs() <= 1e-15);

        for k in 1..=8 {
            let f = bspline_filter(k).unwrap();
            assert_eq!(f.kind(), FilterKind::Lowpass, "k={k}");
            assert_eq!(f.support_range(0).unwrap(), (0, k as i64));
        }
    }

    #[test]
    fn hat_taps_general_lambda() {
        for lambda in 2..=6i64 {
            let f = hat_filter(lambda).unwrap();
            assert_eq!(f.kind(), FilterKind::Lowpass, "lambda={lambda}");
            assert_eq!(f.support_range(0).unwrap(), (0, 2 * lambda - 2));
            // symmetric triangle peaking at lambda - 1
            let peak = f.coeff(&[lambda - 1]);
            assert!((peak - 1.0 / (lambda as f64).sqrt()).abs() <= 1e-14);
        }
        let f3 = hat_filter(3).unwrap();
        let s3 = 3.0f64.sqrt();
        for (j, w) in [1.0, 2.0, 3.0, 2.0, 1.0].iter().enumerate() {
            assert!((f3.coeff(&[j as i64]) - s3 * w / 9.0).abs() <= 1e-15);
        }
    }

    #[test]
    fn dd_kernel_values() {
        assert_eq!(dd_kernel(1, 0.75), 1.0);
        assert!((dd_kernel(2, 0.75) - 2.5).abs() <= 1e-15); // 1 + 2x
        assert!((dd_kernel(3, 0.5) - (1.0 + 3.0 * 0.5 + 6.0 * 0.25)).abs() <= 1e-15);
    }
}
