//! Local functions and their oscillations.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::abs;
use crate::model::config::{bit_spin, Window};

/// Largest domain a [`LocalFunction`] table may have.
pub const MAX_LOCAL_DOMAIN: usize = 24;

/// A real function of the spins on a finite set of sites.
///
/// `table[idx]` is the value at the configuration whose `k`-th domain site has
/// spin `bit_spin(idx, k)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalFunction {
    domain: Vec<i64>,
    table: Vec<f64>,
}

impl LocalFunction {
    /// `domain` must be strictly increasing; `table` has `2^|domain|` entries.
    pub fn from_table(domain: Vec<i64>, table: Vec<f64>) -> Result<Self> {
        if domain.len() > MAX_LOCAL_DOMAIN {
            return Err(Error::VolumeTooLarge {
                sites: domain.len(),
                limit: MAX_LOCAL_DOMAIN,
            });
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("domain", "sites must be strictly increasing"));
        }
        if table.len() != 1 << domain.len() {
            return Err(Error::param(
                "table",
                alloc::format!(
                    "expected {} entries, got {}",
                    1usize << domain.len(),
                    table.len()
                ),
            ));
        }
        if table.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("table", "values must be finite"));
        }
        Ok(LocalFunction { domain, table })
    }

    /// Builds the table by evaluating `f` on the spins of the (sorted, deduplicated) domain.
    pub fn from_fn(
        domain: impl IntoIterator<Item = i64>,
        f: impl Fn(&[i8]) -> f64,
    ) -> Result<Self> {
        let mut domain: Vec<i64> = domain.into_iter().collect();
        domain.sort_unstable();
        domain.dedup();
        if domain.len() > MAX_LOCAL_DOMAIN {
            return Err(Error::VolumeTooLarge {
                sites: domain.len(),
                limit: MAX_LOCAL_DOMAIN,
            });
        }
        let n = domain.len();
        let mut spins = alloc::vec![0i8; n];
        let table = (0..1u64 << n)
            .map(|idx| {
                for (k, s) in spins.iter_mut().enumerate() {
                    *s = bit_spin(idx, k);
                }
                f(&spins)
            })
            .collect();
        Self::from_table(domain, table)
    }

    pub fn constant(c: f64) -> Self {
        LocalFunction {
            domain: Vec::new(),
            table: alloc::vec![c],
        }
    }

    /// `sigma_site`.
    pub fn spin(site: i64) -> Self {
        LocalFunction {
            domain: alloc::vec![site],
            table: alloc::vec![-1.0, 1.0],
        }
    }

    /// `prod_{i in sites} sigma_i`.
    pub fn product(sites: impl IntoIterator<Item = i64>) -> Result<Self> {
        Self::from_fn(sites, |s| s.iter().map(|&x| x as f64).product())
    }

    /// `sum_k coeffs[k] * sigma_{sites[k]}`.
    pub fn linear(sites: &[i64], coeffs: &[f64]) -> Result<Self> {
        if sites.len() != coeffs.len() {
            return Err(Error::param(
                "coeffs",
                "one coefficient per site is required",
            ));
        }
        let mut pairs: Vec<(i64, f64)> =
            sites.iter().copied().zip(coeffs.iter().copied()).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::param("sites", "sites must be distinct"));
        }
        let c: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        Self::from_fn(pairs.iter().map(|p| p.0), |s| {
            s.iter().zip(&c).map(|(&x, &a)| a * x as f64).sum()
        })
    }

    pub fn domain(&self) -> &[i64] {
        &self.domain
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn value_at(&self, idx: usize) -> f64 {
        self.table[idx]
    }

    /// Evaluates on spins given for the domain sites in order.
    pub fn eval_spins(&self, spins: &[i8]) -> f64 {
        let mut idx = 0usize;
        for (k, &s) in spins.iter().enumerate() {
            if s > 0 {
                idx |= 1 << k;
            }
        }
        self.table[idx]
    }

    /// `delta_site F = sup { F(xi) - F(eta) : xi, eta differ only at site }`.
    pub fn oscillation(&self, site: i64) -> f64 {
        let Ok(k) = self.domain.binary_search(&site) else {
            return 0.0;
        };
        let bit = 1usize << k;
        let mut best = 0.0f64;
        for idx in 0..self.table.len() {
            if idx & bit == 0 {
                best = best.max(abs(self.table[idx] - self.table[idx | bit]));
            }
        }
        best
    }

    /// `||delta F||_2^2 = sum_k (delta_k F)^2`.
    pub fn total_oscillation(&self) -> f64 {
        self.domain
            .iter()
            .map(|&s| {
                let d = self.oscillation(s);
                d * d
            })
            .sum()
    }

    pub fn add_constant(&self, c: f64) -> Self {
        LocalFunction {
            domain: self.domain.clone(),
            table: self.table.iter().map(|v| v + c).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        LocalFunction {
            domain: self.domain.clone(),
            table: self.table.iter().map(|v| v * c).collect(),
        }
    }

    /// Binds the function to a volume, checking that its domain is covered.
    pub fn bind(&self, volume: &Window) -> Result<BoundLocal<'_>> {
        let positions = self
            .domain
            .iter()
            .map(|&s| volume.position(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundLocal { f: self, positions })
    }
}

/// A [`LocalFunction`] evaluated on packed configurations of a fixed volume.
#[derive(Debug, Clone)]
pub struct BoundLocal<'a> {
    f: &'a LocalFunction,
    positions: Vec<usize>,
}

impl BoundLocal<'_> {
    #[inline]
    pub fn eval(&self, bits: u64) -> f64 {
        let mut idx = 0usize;
        for (k, &p) in self.positions.iter().enumerate() {
            idx |= (((bits >> p) & 1) as usize) << k;
        }
        self.f.table[idx]
    }

    /// Values on every configuration of the volume, indexed by packed bits.
    pub fn tabulate(&self, sites: usize) -> Vec<f64> {
        (0..1u64 << sites).map(|x| self.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spin_oscillation() {
        let f = LocalFunction::spin(0);
        assert_eq!(f.oscillation(0), 2.0);
        assert_eq!(f.oscillation(1), 0.0);
        assert_eq!(f.total_oscillation(), 4.0);
    }

    #[test]
    fn pair_term_oscillation() {
        let (beta, j) = (0.7, 0.25);
        let f = LocalFunction::product([-1, 2]).unwrap().scaled(-beta * j);
        let expect = 8.0 * beta * beta * j * j;
        assert!(abs(f.total_oscillation() - expect) < 1e-15);
    }

    #[test]
    fn constant_has_no_oscillation() {
        assert_eq!(LocalFunction::constant(3.5).total_oscillation(), 0.0);
    }

    #[test]
    fn bound_evaluation_uses_positions() {
        let w = Window::new(-2, 2).unwrap();
        let f = LocalFunction::linear(&[1, -2], &[3.0, 0.5]).unwrap();
        let b = f.bind(&w).unwrap();
        // sigma_{-2} = +1 (bit 0), sigma_1 = -1 (bit 3 clear).
        assert_eq!(b.eval(0b00001), 0.5 - 3.0);
        assert!(LocalFunction::spin(5).bind(&w).is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(LocalFunction::from_table(alloc::vec![1, 0], alloc::vec![0.0; 4]).is_err());
        assert!(LocalFunction::from_table(alloc::vec![0], alloc::vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn oscillation_shift_and_scale(values in proptest::collection::vec(-5.0f64..5.0, 8), c in -3.0f64..3.0) {
            let f = LocalFunction::from_table(alloc::vec![-1, 0, 4], values).unwrap();
            let base = f.total_oscillation();
            prop_assert!(abs(f.add_constant(c).total_oscillation() - base) <= 1e-12 * (1.0 + base));
            prop_assert!(abs(f.scaled(c).total_oscillation() - c * c * base) <= 1e-12 * (1.0 + base));
        }
    }
}
