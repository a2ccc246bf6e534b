use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default bound on the number of sites handled by exhaustive enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// Hard bound imposed by the single-word packing of [`SpinConfig`].
pub const MAX_PACKED_SITES: usize = 63;

/// Integer interval `[lo, hi]` of lattice sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::param(
                "window",
                alloc::format!("empty window [{lo}, {hi}]"),
            ));
        }
        Ok(Window { lo, hi })
    }

    /// `[-n, n]`.
    pub fn symmetric(n: usize) -> Self {
        Window {
            lo: -(n as i64),
            hi: n as i64,
        }
    }

    /// `[0, len - 1]`.
    pub fn from_origin(len: usize) -> Self {
        assert!(len > 0);
        Window {
            lo: 0,
            hi: len as i64 - 1,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Bit position of `site` inside the window.
    pub fn position(&self, site: i64) -> Result<usize> {
        if self.contains(site) {
            Ok((site - self.lo) as usize)
        } else {
            Err(Error::SiteOutsideWindow {
                site,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + Clone {
        self.lo..=self.hi
    }
}

/// Spin configuration on a finite window, packed one bit per site.
///
/// Bit `p` holds `(sigma_{lo+p} + 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpinConfig {
    window: Window,
    bits: u64,
}

impl SpinConfig {
    pub fn from_bits(window: Window, bits: u64) -> Result<Self> {
        let n = window.len();
        if n > MAX_PACKED_SITES {
            return Err(Error::VolumeTooLarge {
                sites: n,
                limit: MAX_PACKED_SITES,
            });
        }
        Ok(SpinConfig {
            window,
            bits: bits & low_mask(n),
        })
    }

    pub fn all_plus(window: Window) -> Result<Self> {
        Self::from_bits(window, u64::MAX)
    }

    pub fn all_minus(window: Window) -> Result<Self> {
        Self::from_bits(window, 0)
    }

    /// Builds a configuration from spins listed left to right; each entry must be `+1` or `-1`.
    pub fn from_spins(window: Window, spins: &[i8]) -> Result<Self> {
        if spins.len() != window.len() {
            return Err(Error::param(
                "spins",
                alloc::format!("expected {} spins, got {}", window.len(), spins.len()),
            ));
        }
        let mut bits = 0u64;
        for (p, &s) in spins.iter().enumerate() {
            match s {
                1 => bits |= 1 << p,
                -1 => {}
                other => {
                    return Err(Error::param(
                        "spins",
                        alloc::format!("spin value {other} is not +-1"),
                    ))
                }
            }
        }
        Self::from_bits(window, bits)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn spin(&self, site: i64) -> Result<i8> {
        let p = self.window.position(site)?;
        Ok(bit_spin(self.bits, p))
    }

    pub fn spins(&self) -> Vec<i8> {
        (0..self.window.len())
            .map(|p| bit_spin(self.bits, p))
            .collect()
    }

    pub fn flipped(&self, site: i64) -> Result<Self> {
        let p = self.window.position(site)?;
        Ok(SpinConfig {
            window: self.window,
            bits: self.bits ^ (1 << p),
        })
    }

    /// Global spin flip.
    pub fn negated(&self) -> Self {
        SpinConfig {
            window: self.window,
            bits: !self.bits & low_mask(self.window.len()),
        }
    }
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Spin `+-1` encoded at bit `p`.
#[inline]
pub fn bit_spin(bits: u64, p: usize) -> i8 {
    if (bits >> p) & 1 == 1 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn window_positions() {
        let w = Window::new(-2, 2).unwrap();
        assert_eq!(w.len(), 5);
        assert_eq!(w.position(-2).unwrap(), 0);
        assert_eq!(w.position(2).unwrap(), 4);
        assert!(matches!(
            w.position(3),
            Err(Error::SiteOutsideWindow { site: 3, .. })
        ));
        assert!(Window::new(1, 0).is_err());
    }

    #[test]
    fn spins_and_flip() {
        let w = Window::new(0, 2).unwrap();
        let c = SpinConfig::from_spins(w, &[1, -1, 1]).unwrap();
        assert_eq!(c.bits(), 0b101);
        assert_eq!(c.spin(1).unwrap(), -1);
        assert_eq!(c.flipped(1).unwrap().spins(), alloc::vec![1, 1, 1]);
        assert_eq!(c.negated().spins(), alloc::vec![-1, 1, -1]);
        assert!(SpinConfig::from_spins(w, &[1, 0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn decode_encode_identity(lo in -30i64..30, len in 1usize..=24, bits in any::<u64>()) {
            let w = Window::new(lo, lo + len as i64 - 1).unwrap();
            let c = SpinConfig::from_bits(w, bits).unwrap();
            let back = SpinConfig::from_spins(w, &c.spins()).unwrap();
            prop_assert_eq!(c, back);
            prop_assert_eq!(c.negated().negated(), c);
        }
    }
}
