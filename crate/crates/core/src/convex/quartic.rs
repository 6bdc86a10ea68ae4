use crate::error::{Error, Result};

/// `P(λ) = c0 − c1λ − c2λ² − c3λ³ − λ⁴`, evaluated in Horner form.
pub fn quartic_value(coeffs: [f64; 4], lambda: f64) -> f64 {
    let [c0, c1, c2, c3] = coeffs;
    c0 - lambda * (c1 + lambda * (c2 + lambda * (c3 + lambda)))
}

/// Unique positive root of `c0 − c1λ − c2λ² − c3λ³ − λ⁴` for `c0 > 0` and
/// `c1, c2, c3 ≥ 0`.
///
/// One sign change in the coefficients means exactly one positive root (Descartes),
/// and `P` is strictly decreasing on `(0, ∞)`, so doubling an upper bracket until
/// `P(b) < 0` and bisecting always converges. Bisection runs to full double precision;
/// `root_tol` only decides when an exact zero is accepted early.
pub fn positive_quartic_root(coeffs: [f64; 4], root_tol: f64) -> Result<f64> {
    let [c0, c1, c2, c3] = coeffs;
    if !coeffs.iter().all(|c| c.is_finite()) || !(c0 > 0.0) || c1 < 0.0 || c2 < 0.0 || c3 < 0.0 {
        return Err(Error::BadSignPattern);
    }
    let accept = root_tol * c0.max(1.0);

    let mut hi = 1.0;
    while quartic_value(coeffs, hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = if hi == 1.0 { 0.0 } else { hi / 2.0 };
    if quartic_value(coeffs, hi) == 0.0 {
        return Ok(hi);
    }

    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p = quartic_value(coeffs, mid);
        if p == 0.0 {
            return Ok(mid);
        }
        if p > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi && p.abs() <= accept {
            break;
        }
    }
    let (plo, phi) = (quartic_value(coeffs, lo).abs(), quartic_value(coeffs, hi).abs());
    Ok(if lo > 0.0 && plo <= phi { lo } else { hi })
}
