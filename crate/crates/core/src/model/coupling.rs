//! Coupling sequences `J(k)` and certified tail sums `T(i) = sum_{k>=i} J(k)`.
//!
//! Every family is a finite explicit head `J(1..=K)` followed by an optional
//! power-law tail `scale * k^-alpha` for `k > K`. The standard Dyson family is the
//! empty head with unit scale.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{powf, CompensatedSum, Interval};

/// Target width for the analytic part of a tail bracket.
const REMAINDER_WIDTH: f64 = 1e-11;

/// Behaviour of an explicit table beyond its last entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "kebab-case"))]
pub enum TailRule {
    /// `J(k) = 0` past the table.
    Zero,
    /// `J(k) = scale * k^-alpha` past the table.
    PowerLaw { alpha: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum CouplingKind {
    PowerLaw { alpha: f64 },
    Table { values: Vec<f64>, tail: TailRule },
}

/// A ferromagnetic, summable coupling sequence.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingFamily {
    kind: CouplingKind,
}

impl CouplingFamily {
    /// `J(k) = k^-alpha`; rejects `alpha <= 1` (not summable).
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::NotSummable { alpha });
        }
        Ok(CouplingFamily {
            kind: CouplingKind::PowerLaw { alpha },
        })
    }

    /// Explicit table `values[k-1] = J(k)` with a tail rule.
    pub fn table(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::NotFerromagnetic { distance: pos + 1 });
        }
        if let TailRule::PowerLaw { alpha, scale } = tail {
            if !(alpha > 1.0) || !alpha.is_finite() {
                return Err(Error::NotSummable { alpha });
            }
            if !(scale >= 0.0) || !scale.is_finite() {
                return Err(Error::param(
                    "scale",
                    "tail scale must be finite and nonnegative",
                ));
            }
        }
        Ok(CouplingFamily {
            kind: CouplingKind::Table { values, tail },
        })
    }

    /// Nearest-neighbour coupling `J(1) = j1`, zero beyond.
    pub fn nearest_neighbor(j1: f64) -> Result<Self> {
        Self::table(alloc::vec![j1], TailRule::Zero)
    }

    pub fn kind(&self) -> &CouplingKind {
        &self.kind
    }

    /// Exponent of the pure power law, if this is one.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            CouplingKind::PowerLaw { alpha } => Some(alpha),
            _ => None,
        }
    }

    fn head(&self) -> &[f64] {
        match &self.kind {
            CouplingKind::PowerLaw { .. } => &[],
            CouplingKind::Table { values, .. } => values,
        }
    }

    /// `(alpha, scale)` of the power-law tail, if any.
    fn power_tail(&self) -> Option<(f64, f64)> {
        match &self.kind {
            CouplingKind::PowerLaw { alpha } => Some((*alpha, 1.0)),
            CouplingKind::Table {
                tail: TailRule::PowerLaw { alpha, scale },
                ..
            } => Some((*alpha, *scale)),
            CouplingKind::Table {
                tail: TailRule::Zero,
                ..
            } => None,
        }
    }

    pub(crate) fn head_len(&self) -> usize {
        self.head().len()
    }

    /// Exponent and scale of the tail beyond the head, if nonzero.
    pub(crate) fn tail_law(&self) -> Option<(f64, f64)> {
        self.power_tail().filter(|&(_, s)| s > 0.0)
    }

    /// `J(k)` for `k >= 1`; `J(0)` is reported as zero.
    #[inline]
    pub fn j(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let head = self.head();
        if k <= head.len() {
            return head[k - 1];
        }
        match self.power_tail() {
            Some((alpha, scale)) => scale * powf(k as f64, -alpha),
            None => 0.0,
        }
    }

    /// Smallest index from which the analytic remainder bracket is narrow enough.
    fn anchor(&self) -> usize {
        let first = self.head_len() + 1;
        match self.tail_law() {
            None => first,
            Some((alpha, scale)) => {
                let mut k = first.max(16);
                while remainder_width(alpha, scale, k) > REMAINDER_WIDTH {
                    k *= 2;
                }
                k
            }
        }
    }

    /// Bracket for `sum_{k >= from} J(k)` when `from` lies past the head.
    fn remainder(&self, from: usize) -> Interval {
        debug_assert!(from > self.head_len());
        match self.tail_law() {
            None => Interval::ZERO,
            Some((alpha, scale)) => power_sum_bracket(alpha, scale, from),
        }
    }

    /// Certified bracket for `T(i) = sum_{k >= i} J(k)`, width at most `1e-10`.
    pub fn tail(&self, i: usize) -> Interval {
        assert!(i >= 1, "tail index starts at 1");
        let anchor = self.anchor().max(i);
        let rem = self.remainder(anchor);
        let mut head = CompensatedSum::new();
        let mut terms = 0usize;
        for k in (i..anchor).rev() {
            head.add(self.j(k));
            terms += 1;
        }
        let (lo, hi) = (head.value() + rem.lo, head.value() + rem.hi);
        let pad = rounding_pad(terms, hi);
        Interval::new((lo - pad).max(0.0), hi + pad)
    }

    /// Brackets for `T(1), ..., T(m)` computed by one backward recurrence.
    pub fn tail_table(&self, m: usize) -> Vec<Interval> {
        let mut out = alloc::vec![Interval::ZERO; m];
        if m == 0 {
            return out;
        }
        let anchor = self.anchor().max(m + 1);
        let rem = self.remainder(anchor);
        let mut head = CompensatedSum::new();
        let mut terms = 0usize;
        for k in (1..anchor).rev() {
            head.add(self.j(k));
            terms += 1;
            if k <= m {
                let (lo, hi) = (head.value() + rem.lo, head.value() + rem.hi);
                let pad = rounding_pad(terms, hi);
                out[k - 1] = Interval::new((lo - pad).max(0.0), hi + pad);
            }
        }
        out
    }

    /// `sum_k J(k)`.
    pub fn total(&self) -> Interval {
        self.tail(1)
    }

    /// `kappa = 2 sum_k J(k)`, the row-sum bound of every coupling matrix.
    pub fn kappa(&self) -> Interval {
        self.total().scale(2.0)
    }

    /// `sup_p p J(p)`: scanned over the head, analytic over a power-law tail.
    pub fn sup_p_jp(&self) -> f64 {
        let head = self.head();
        let mut best = head
            .iter()
            .enumerate()
            .map(|(i, &v)| (i + 1) as f64 * v)
            .fold(0.0, f64::max);
        if let Some((alpha, scale)) = self.tail_law() {
            // p^(1-alpha) is nonincreasing for alpha >= 1: the tail maximum sits at its first index.
            let p = (head.len() + 1) as f64;
            best = best.max(scale * powf(p, 1.0 - alpha));
        }
        best
    }
}

/// Compensated summation error plus one ulp per evaluated term.
fn rounding_pad(terms: usize, magnitude: f64) -> f64 {
    (8.0 + 2.0 * terms as f64 * f64::EPSILON) * f64::EPSILON * magnitude.abs()
}

/// Width of [`power_sum_bracket`] at cut `k`.
fn remainder_width(p: f64, scale: f64, k: usize) -> f64 {
    let k = k as f64;
    scale * (p * powf(k, -p - 1.0) + p * (p + 1.0) * powf(k, -p - 2.0)) / 12.0
}

/// Bracket for `scale * sum_{k >= from} k^-p` with `p > 1`.
///
/// For a convex decreasing `f` with decreasing `f''` the trapezoid rule gives
/// `I + f(K)/2 <= sum_{k>=K} f(k) <= I + f(K)/2 + (f''(K) - f'(K))/12`,
/// where `I` is the integral from `K` to infinity.
pub(crate) fn power_sum_bracket(p: f64, scale: f64, from: usize) -> Interval {
    debug_assert!(p > 1.0 && from >= 1);
    let k = from as f64;
    let integral = powf(k, 1.0 - p) / (p - 1.0);
    let half = 0.5 * powf(k, -p);
    let lo = scale * (integral + half);
    let hi = lo + remainder_width(p, scale, from);
    Interval::new(lo, hi * (1.0 + 4.0 * f64::EPSILON))
}
