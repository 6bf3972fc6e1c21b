//! Confidence widths and tail-bound predicates.
//!
//! All constants live here so estimators and elimination tests agree exactly.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{BanditError, Result};
use crate::scalar::Scalar;

/// Constant inside the iterated logarithm of every width.
pub const LIL_CONSTANT: f64 = 40.0;

/// Open interval `(center − half_width, center + half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval<S> {
    pub center: S,
    pub half_width: S,
}

impl<S: Scalar> ConfidenceInterval<S> {
    pub fn new(center: S, half_width: S) -> Result<Self> {
        if !(half_width >= S::zero()) {
            return Err(BanditError::domain(format!(
                "half width must be >= 0, got {half_width}"
            )));
        }
        Ok(Self { center, half_width })
    }

    pub fn lower(&self) -> S {
        self.center - self.half_width
    }

    pub fn upper(&self) -> S {
        self.center + self.half_width
    }

    /// Open-interval membership.
    pub fn contains(&self, x: S) -> bool {
        (x - self.center).abs() < self.half_width
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !intervals_disjoint(self, other)
    }
}

/// True iff the open intervals do not meet. Exactly touching intervals are
/// disjoint.
pub fn intervals_disjoint<S: Scalar>(a: &ConfidenceInterval<S>, b: &ConfidenceInterval<S>) -> bool {
    let gap = (a.center - b.center).abs();
    let reach = a.half_width + b.half_width;
    // an infinite reach never separates, even against an infinite gap
    reach.is_finite() && gap >= reach
}

fn check_count(n: u64) -> Result<()> {
    if n < 1 {
        return Err(BanditError::domain("sample count must be >= 1"));
    }
    Ok(())
}

/// Width used by the norm estimator's stopping rule:
/// `b_n = √(3 (1 + ‖h‖² + ‖p‖²) ln(40 ln(2n)) / n)`.
pub fn estimator_width<S: Scalar>(n: u64, h_norm_sq: S, p_norm_sq: S) -> Result<S> {
    check_count(n)?;
    let nf = S::from_u64(n).unwrap();
    let two = S::lit(2.0);
    let lil = (S::lit(LIL_CONSTANT) * (two * nf).ln()).ln();
    Ok((S::lit(3.0) * (S::one() + h_norm_sq + p_norm_sq) * lil / nf).sqrt())
}

/// Time-uniform sub-Gaussian width for a running mean of `n` samples:
/// `σ √(3 ln(40 ln(2n) / δ) / n)`.
pub fn anytime_hoeffding_width<S: Scalar>(n: u64, sigma: S, delta: S) -> Result<S> {
    union_anytime_width(n, sigma, delta, 1)
}

/// [`anytime_hoeffding_width`] with the confidence split across `copies`
/// simultaneously monitored sequences: `σ √(3 ln(40 m ln(2n) / δ) / n)`.
pub fn union_anytime_width<S: Scalar>(n: u64, sigma: S, delta: S, copies: usize) -> Result<S> {
    check_count(n)?;
    if !(delta > S::zero() && delta < S::one()) {
        return Err(BanditError::domain(format!("delta must lie in (0,1), got {delta}")));
    }
    if copies == 0 {
        return Err(BanditError::domain("copies must be >= 1"));
    }
    let nf = S::from_u64(n).unwrap();
    let m = S::from_usize(copies).unwrap();
    let arg = S::lit(LIL_CONSTANT) * m * (S::lit(2.0) * nf).ln() / delta;
    Ok(sigma * (S::lit(3.0) * arg.ln() / nf).sqrt())
}

/// Thresholds of the four chi-square tail events for `G ~ N(0, I/d)` and a
/// fixed direction `v`. Each event holds with probability at least `1 − δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTails {
    pub dim: usize,
    pub delta: f64,
    /// `‖G‖² ≤ norm_upper`
    pub norm_upper: f64,
    /// `‖G‖² ≥ norm_lower`
    pub norm_lower: f64,
    /// `⟨v,G⟩² ≤ proj_upper · ‖v‖²`
    pub proj_upper: f64,
    /// `⟨v,G⟩² ≥ proj_lower · ‖v‖²`
    pub proj_lower: f64,
}

impl ChiSquareTails {
    pub fn new(dim: usize, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(BanditError::domain("dimension must be >= 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BanditError::domain(format!("delta must lie in (0,1), got {delta}")));
        }
        let d = dim as f64;
        let l = (1.0 / delta).ln();
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        let upper_q = std.inverse_cdf(1.0 - delta / 2.0);
        let lower_q = std.inverse_cdf(0.5 + delta / 2.0);
        Ok(Self {
            dim,
            delta,
            norm_upper: 1.0 + 2.0 * (l / d).sqrt() + 2.0 * l / d,
            norm_lower: 1.0 - 2.0 * (l / d).sqrt(),
            proj_upper: 2.0 / d * (upper_q * upper_q).min(0.5 + l + l.sqrt()),
            proj_lower: 1.0 / d * (lower_q * lower_q).max(1.0 - 2.0 * l.sqrt()),
        })
    }

    /// Evaluates the four events `[norm ≤, norm ≥, proj ≤, proj ≥]` for one
    /// sample `g` and direction `v`.
    pub fn events<S: Scalar>(&self, g: &[S], v: &[S]) -> [bool; 4] {
        let gg = crate::vecmath::norm_sq(g).as_f64();
        let vg = crate::vecmath::dot(v, g).as_f64();
        let vv = crate::vecmath::norm_sq(v).as_f64();
        [
            gg <= self.norm_upper,
            gg >= self.norm_lower,
            vg * vg <= self.proj_upper * vv,
            vg * vg >= self.proj_lower * vv,
        ]
    }
}
