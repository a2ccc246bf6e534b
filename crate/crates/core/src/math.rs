//! Floating-point helpers shared by every module.
//!
//! All transcendental functions go through `libm` so the crate behaves the same
//! with and without `std`.

use alloc::vec::Vec;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Closed interval `[lo, hi]` used for certified enclosures.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Widens both ends by `pad`.
    pub fn widen(self, pad: f64) -> Self {
        Interval {
            lo: self.lo - pad,
            hi: self.hi + pad,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Interval::new(c * self.lo, c * self.hi)
        } else {
            Interval::new(c * self.hi, c * self.lo)
        }
    }

    /// Square of a nonnegative interval.
    pub fn square_nonneg(self) -> Self {
        let lo = self.lo.max(0.0);
        Interval::new(lo * lo, self.hi * self.hi)
    }
}

impl core::ops::Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if abs(self.sum) >= abs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

const PAIRWISE_LEAF: usize = 64;

/// Sum with a fixed-shape pairwise tree. The tree depends only on the slice
/// length, so the result is reproducible regardless of how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let half = xs.len() / 2;
    pairwise_sum(&xs[..half]) + pairwise_sum(&xs[half..])
}

/// Pairwise sum of `f(i)` for `i in 0..len`, without materialising the terms.
pub fn pairwise_sum_by(len: usize, f: &impl Fn(usize) -> f64) -> f64 {
    fn rec(start: usize, len: usize, f: &impl Fn(usize) -> f64) -> f64 {
        if len <= PAIRWISE_LEAF {
            let mut s = 0.0;
            for i in start..start + len {
                s += f(i);
            }
            return s;
        }
        let half = len / 2;
        rec(start, half, f) + rec(start + half, len - half, f)
    }
    rec(0, len, f)
}

/// `log(sum_i exp(xs[i]))`, evaluated stably.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + ln(pairwise_sum_by(xs.len(), &|i| exp(xs[i] - max)))
}

/// Weighted `log(sum_i w[i] exp(xs[i]))` for nonnegative weights.
pub fn log_weighted_sum_exp(weights: &[f64], xs: &[f64]) -> f64 {
    debug_assert_eq!(weights.len(), xs.len());
    let max = xs
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + ln(pairwise_sum_by(xs.len(), &|i| {
        weights[i] * exp(xs[i] - max)
    }))
}

/// `x log x` with the convention `0 log 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

/// Evenly spaced grid `start, start+step, ..., <= stop` (inclusive up to rounding).
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if step <= 0.0 {
        out.push(start);
        return out;
    }
    let count = libm::floor((stop - start) / step + 1e-9) as i64;
    for i in 0..=count.max(0) {
        out.push(start + step * i as f64);
    }
    out
}
