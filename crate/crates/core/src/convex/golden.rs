use crate::error::{Error, Result};

pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;
const INV_PHI: f64 = GOLDEN_RATIO - 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// The bracket shrinks until its width is at most `tol`, which takes
/// `⌈ln((hi−lo)/tol)/ln φ⌉` iterations after the two initial evaluations. On ties the
/// left part of the bracket is kept, so flat plateaus resolve to their smallest point.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<GoldenResult> {
    try_golden_section_max(|x| Ok(f(x)), lo, hi, tol)
}

/// Fallible variant of [`golden_section_max`]; the first error from `f` aborts the search.
pub fn try_golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<GoldenResult> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidBracket { lo, hi });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!("golden tolerance {tol} must be positive")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evaluations = 2;

    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        evaluations += 1;
    }

    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(GoldenResult {
        x,
        value,
        evaluations,
    })
}
