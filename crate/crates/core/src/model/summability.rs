//! Summability of a coupling family: `sum J`, `sum_k k J(k)^2`, `sup_p p J(p)` and
//! `C1 = sum_i T(i)^2` with `T(i) = sum_{k>=i} J(k)`.

use alloc::vec::Vec;

use crate::math::{ln, powf, Interval};
use crate::model::coupling::{power_sum_bracket, CouplingFamily};
use crate::model::mask::{InteractionMask, MaskMode};

/// Number of tail values summed explicitly before switching to integral bounds.
pub const EXPLICIT_TAIL_TERMS: usize = 1 << 20;

/// Default partial-sum level used to certify divergence of `sum_i T(i)^2`.
pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 1e3;

/// Either a certified bracket or a divergence certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "status", rename_all = "kebab-case"))]
pub enum SeriesValue {
    Finite(Interval),
    /// The partial sum up to `witness_index` provably exceeds `threshold`, and the
    /// terms are positive, so the partial sums increase past any level.
    Divergent {
        threshold: f64,
        witness_index: f64,
    },
}

impl SeriesValue {
    pub fn finite(&self) -> Option<Interval> {
        match self {
            SeriesValue::Finite(i) => Some(*i),
            SeriesValue::Divergent { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, SeriesValue::Finite(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummabilityReport {
    pub total: Interval,
    pub kappa: Interval,
    /// `sum_i sum_{k>=i} J(k)^2 = sum_k k J(k)^2`.
    pub sum_tail_squares: SeriesValue,
    pub sup_p_jp: f64,
    pub c1: SeriesValue,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub condition_iii: bool,
}

pub fn summability_report(couplings: &CouplingFamily) -> SummabilityReport {
    summability_report_with(couplings, DEFAULT_DIVERGENCE_THRESHOLD)
}

pub fn summability_report_with(couplings: &CouplingFamily, threshold: f64) -> SummabilityReport {
    let sum_tail_squares = weighted_square_sum(couplings);
    let c1 = match SquaredTailSeries::new(couplings, threshold) {
        Ok(s) => SeriesValue::Finite(s.from(1)),
        Err(d) => d,
    };
    let sup = couplings.sup_p_jp();
    SummabilityReport {
        total: couplings.total(),
        kappa: couplings.kappa(),
        condition_i: sum_tail_squares.is_finite(),
        sum_tail_squares,
        sup_p_jp: sup,
        condition_ii: sup.is_finite(),
        condition_iii: c1.is_finite(),
        c1,
    }
}

/// Terms summed explicitly before the tail bracket takes over.
const EXPLICIT_WEIGHTED_TERMS: usize = 4096;

/// `sum_k k J(k)^2`; the tail `s^2 k^(1-2a)` is summable whenever `a > 1`.
fn weighted_square_sum(couplings: &CouplingFamily) -> SeriesValue {
    let h = match couplings.tail_law() {
        Some(_) => couplings.head_len().max(EXPLICIT_WEIGHTED_TERMS),
        None => couplings.head_len(),
    };
    let mut acc = 0.0;
    for k in (1..=h).rev() {
        let v = couplings.j(k);
        acc += k as f64 * v * v;
    }
    let mut out = Interval::new(acc, acc).widen((h as f64 + 4.0) * f64::EPSILON * acc);
    if let Some((a, s)) = couplings.tail_law() {
        out = out + power_sum_bracket(2.0 * a - 1.0, s * s, h + 1);
    }
    SeriesValue::Finite(out)
}

/// Suffix sums `S(i) = sum_{m>=i} T(m)^2` with certified brackets.
#[derive(Debug, Clone)]
pub struct SquaredTailSeries {
    /// `suffix[i-1]` brackets `sum_{m=i}^{M} T(m)^2`.
    suffix: Vec<Interval>,
    law: Option<(f64, f64)>,
    head_len: usize,
}

impl SquaredTailSeries {
    /// Fails with a divergence certificate when the power-law tail has `alpha <= 3/2`.
    pub fn new(couplings: &CouplingFamily, threshold: f64) -> Result<Self, SeriesValue> {
        let head_len = couplings.head_len();
        let law = couplings.tail_law();
        if let Some((a, s)) = law {
            if a <= 1.5 {
                return Err(SeriesValue::Divergent {
                    threshold,
                    witness_index: divergence_witness(a, s, head_len, threshold),
                });
            }
        }
        let m = match law {
            Some(_) => EXPLICIT_TAIL_TERMS.max(head_len + 1),
            None => head_len,
        };
        let mut suffix = couplings.tail_table(m);
        let (mut lo, mut hi) = (0.0, 0.0);
        for (count, t) in suffix.iter_mut().rev().enumerate() {
            let sq = t.square_nonneg();
            lo += sq.lo;
            hi += sq.hi;
            let pad = (count as f64 + 4.0) * f64::EPSILON * hi;
            *t = Interval::new((lo - pad).max(0.0), hi + pad);
        }
        Ok(SquaredTailSeries {
            suffix,
            law,
            head_len,
        })
    }

    pub fn explicit_terms(&self) -> usize {
        self.suffix.len()
    }

    /// Bracket for `sum_{m>=i} T(m)^2`, `i >= 1`.
    pub fn from(&self, i: usize) -> Interval {
        assert!(i >= 1);
        let m = self.suffix.len();
        let beyond = |from: usize| match self.law {
            Some((a, s)) => integral_tail_bracket(a, s, from.max(self.head_len + 1)),
            None => Interval::ZERO,
        };
        if i <= m {
            self.suffix[i - 1] + beyond(m + 1)
        } else {
            beyond(i)
        }
    }
}

/// Bracket for `sum_{m>=from} T(m)^2` when every `m >= from` lies in the tail `s k^-a`, `a > 3/2`.
///
/// With `g_c(x) = s^2 (x^(1-a)/(a-1) + c x^-a)^2`, one has `g_{1/2}(m) <= T(m)^2 <= g_1(m)`
/// and both are decreasing, so `int_from^inf g_{1/2} <= sum <= g_1(from) + int_from^inf g_1`.
fn integral_tail_bracket(a: f64, s: f64, from: usize) -> Interval {
    let x = from as f64;
    let lead = 1.0 / (a - 1.0);
    let integral = |c: f64| {
        s * s
            * (lead * lead * powf(x, 3.0 - 2.0 * a) / (2.0 * a - 3.0)
                + 2.0 * c * lead * powf(x, 2.0 - 2.0 * a) / (2.0 * a - 2.0)
                + c * c * powf(x, 1.0 - 2.0 * a) / (2.0 * a - 1.0))
    };
    let g1 = {
        let t = s * (lead * powf(x, 1.0 - a) + powf(x, -a));
        t * t
    };
    let lo = integral(0.5);
    let hi = g1 + integral(1.0);
    Interval::new(
        lo * (1.0 - 8.0 * f64::EPSILON),
        hi * (1.0 + 8.0 * f64::EPSILON),
    )
}

/// Smallest `Q` such that `sum_{m<=Q} T(m)^2 >= threshold` follows from
/// `T(m) >= s m^(1-a)/(a-1)` for `m > head_len` and the integral test.
fn divergence_witness(a: f64, s: f64, head_len: usize, threshold: f64) -> f64 {
    let c = s * s / ((a - 1.0) * (a - 1.0));
    let x0 = (head_len + 1) as f64;
    // sum_{m=x0}^{Q} m^(2-2a) >= int_{x0}^{Q+1} x^(2-2a) dx.
    let target = threshold / c;
    let q_plus_1 = if a == 1.5 {
        x0 * crate::math::exp(target)
    } else {
        let e = 3.0 - 2.0 * a;
        powf(target * e + powf(x0, e), 1.0 / e)
    };
    libm::ceil(q_plus_1 - 1.0).max(x0)
}

/// Lower bound on `sum_{m<=q} T(m)^2` used to check a divergence witness.
pub fn divergence_partial_lower_bound(a: f64, s: f64, head_len: usize, q: f64) -> f64 {
    let c = s * s / ((a - 1.0) * (a - 1.0));
    let x0 = (head_len + 1) as f64;
    if a == 1.5 {
        c * ln((q + 1.0) / x0)
    } else {
        let e = 3.0 - 2.0 * a;
        c * (powf(q + 1.0, e) - powf(x0, e)) / e
    }
}

/// `||beta Psi|| = sup_i sum_{V containing i} ||beta Psi_V||_inf` for pair interactions.
///
/// Far from the origin every mask except an explicit pair list contains all pairs, so
/// the supremum equals `2 beta sum_k J(k)` and is returned with its tail bracket.
pub fn suac_norm(mask: &InteractionMask, beta: f64, couplings: &CouplingFamily) -> Interval {
    if beta == 0.0 {
        return Interval::ZERO;
    }
    match mask.mode() {
        MaskMode::Pairs(list) => {
            let mut sites: Vec<i64> = list.iter().flat_map(|&(a, b)| [a, b]).collect();
            sites.sort_unstable();
            sites.dedup();
            let best = sites
                .iter()
                .map(|&i| {
                    list.iter()
                        .filter(|&&(a, b)| a == i || b == i)
                        .map(|&(a, b)| couplings.j(a.abs_diff(b) as usize))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            Interval::point(beta * best)
        }
        _ => couplings.kappa().scale(beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;
    use crate::model::coupling::TailRule;
    use core::f64::consts::PI;

    #[test]
    fn alpha_two_conditions() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let r = summability_report(&j);
        assert!(r.condition_i && r.condition_ii && r.condition_iii);
        assert!(r.kappa.contains(PI * PI / 3.0));
        assert!(r.kappa.width() < 1e-9);
        // sum_k k * k^-4 = zeta(3).
        let z3 = 1.2020569031595942;
        assert!(r.sum_tail_squares.finite().unwrap().contains(z3));
        // C1 = sum_i psi'(i)^2 = 3 zeta(3) for alpha = 2 (mpmath).
        let c1 = r.c1.finite().unwrap();
        assert!(c1.contains(3.0 * z3), "{c1:?}");
        assert!(c1.width() < 1e-8, "{c1:?}");
    }

    const ZETA_2_2: f64 = 1.4905432565068934;

    #[test]
    fn alpha_one_point_six_is_finite() {
        let r = summability_report(&CouplingFamily::power_law(1.6).unwrap());
        assert!(r.condition_iii);
        let c1 = r.c1.finite().unwrap();
        // mpmath: sum_{i<=20000} hurwitz_zeta(1.6, i)^2 plus an Euler-Maclaurin tail.
        assert!(c1.contains(18.9201077782521), "{c1:?}");
        assert!(c1.width() < 1e-6);
        // sum_k k^(1 - 3.2) = zeta(2.2) (mpmath).
        let w = r.sum_tail_squares.finite().unwrap();
        assert!(w.contains(ZETA_2_2) && w.width() < 1e-9, "{w:?}");
    }

    #[test]
    fn alpha_one_point_four_diverges() {
        let r = summability_report(&CouplingFamily::power_law(1.4).unwrap());
        assert!(r.condition_i && r.condition_ii);
        assert!(!r.condition_iii);
        let SeriesValue::Divergent {
            threshold,
            witness_index,
        } = r.c1
        else {
            panic!("expected divergence");
        };
        assert_eq!(threshold, 1e3);
        assert!(divergence_partial_lower_bound(1.4, 1.0, 0, witness_index) >= threshold);
        assert!(divergence_partial_lower_bound(1.4, 1.0, 0, witness_index - 1.0) < threshold);
    }

    #[test]
    fn witness_agrees_with_explicit_partial_sums() {
        // alpha = 1.5: T(m) >= 2 m^-1/2, so T(m)^2 >= 4/m; check against actual sums at a low threshold.
        let j = CouplingFamily::power_law(1.5).unwrap();
        let SeriesValue::Divergent { witness_index, .. } = summability_report_with(&j, 30.0).c1
        else {
            panic!("expected divergence");
        };
        let q = witness_index as usize;
        let t = j.tail_table(q);
        let partial: f64 = t.iter().map(|x| x.lo * x.lo).sum();
        assert!(partial >= 30.0, "{partial}");
    }

    #[test]
    fn finite_table_sums_exactly() {
        let j = CouplingFamily::table(alloc::vec![1.0, 0.5], TailRule::Zero).unwrap();
        let r = summability_report(&j);
        // T(1) = 1.5, T(2) = 0.5.
        assert!(r.c1.finite().unwrap().contains(2.5));
        assert!(r
            .sum_tail_squares
            .finite()
            .unwrap()
            .contains(1.0 + 2.0 * 0.25));
        assert_eq!(r.sup_p_jp, 1.0);
    }

    #[test]
    fn squared_tail_series_suffix() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let s = SquaredTailSeries::new(&j, 1e3).unwrap();
        let t = j.tail_table(3);
        let head: f64 = t.iter().map(|x| x.mid() * x.mid()).sum();
        let diff = s.from(1).mid() - s.from(4).mid();
        assert!(abs(diff - head) < 1e-10, "{diff} {head}");
        let far = s.from(s.explicit_terms() + 10);
        assert!(far.lo > 0.0 && far.hi < s.from(s.explicit_terms()).hi);
        let mut prev = f64::INFINITY;
        for i in [1usize, 10, 100, 1000, 1 << 21, 1 << 24] {
            let v = s.from(i).hi;
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn suac_examples() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        assert!(suac_norm(&InteractionMask::full(), 1.0, &j).contains(PI * PI / 3.0));
        assert_eq!(suac_norm(&InteractionMask::full(), 0.0, &j), Interval::ZERO);
        let nn = CouplingFamily::nearest_neighbor(1.0).unwrap();
        assert_eq!(
            suac_norm(&InteractionMask::pairs([(-1, 0)]), 1.0, &nn),
            Interval::point(1.0)
        );
    }
}
