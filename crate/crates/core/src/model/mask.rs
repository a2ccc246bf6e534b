//! Which pairs `{i, j}` carry a coupling.
//!
//! Cross pairs `{-i, j}` (`i >= 1`, `j >= 0`) straddle the origin cut. They are
//! indexed in a fixed canonical order: by radius `r = max(i, j)`, then `i`, then
//! `j`. With this order the first `k_N = N(N+1)` cross pairs are exactly those
//! inside `[-N, N]`, so `Intermediate(k_N)` restores every cut coupling in that window.
//! Any order with this prefix property would do; this one is fixed for reproducibility.

use alloc::vec::Vec;

/// A cross pair `{left, right}` with `left < 0 <= right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossPair {
    pub left: i64,
    pub right: i64,
}

impl CrossPair {
    pub fn distance(&self) -> usize {
        (self.right - self.left) as usize
    }

    pub fn radius(&self) -> i64 {
        (-self.left).max(self.right)
    }
}

/// `k_N = N(N+1)`, the number of cross pairs inside `[-N, N]`.
pub fn k_n(n: usize) -> usize {
    n * (n + 1)
}

/// Zero-based canonical position of the cross pair `{-i, j}`.
pub fn cross_pair_index(i: usize, j: usize) -> usize {
    debug_assert!(i >= 1);
    let r = i.max(j);
    let before = (r - 1) * r;
    if i < r {
        before + (i - 1)
    } else {
        before + (r - 1) + j
    }
}

/// Inverse of [`cross_pair_index`].
pub fn cross_pair_at(index: usize) -> CrossPair {
    // Largest r with (r - 1) r <= index.
    let mut r = ((1.0 + libm::sqrt(1.0 + 4.0 * index as f64)) / 2.0) as usize;
    while r > 1 && (r - 1) * r > index {
        r -= 1;
    }
    while r * (r + 1) <= index {
        r += 1;
    }
    let offset = index - (r - 1) * r;
    let (i, j) = if offset < r - 1 {
        (offset + 1, r)
    } else {
        (r, offset - (r - 1))
    };
    CrossPair {
        left: -(i as i64),
        right: j as i64,
    }
}

/// The first `k_N` cross pairs in canonical order.
pub fn enumerate_cross_pairs(n: usize) -> Vec<CrossPair> {
    (0..k_n(n)).map(cross_pair_at).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "mode", content = "arg", rename_all = "kebab-case")
)]
pub enum MaskMode {
    /// Every pair.
    Full,
    /// Pairs with both sites `>= 0`.
    HalfLineRight,
    /// Pairs with both sites `< 0`.
    HalfLineLeft,
    /// Same-side pairs plus the first `k` cross pairs.
    Intermediate(usize),
    /// An explicit finite pair list.
    Pairs(Vec<(i64, i64)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionMask {
    mode: MaskMode,
}

impl InteractionMask {
    pub fn full() -> Self {
        InteractionMask {
            mode: MaskMode::Full,
        }
    }

    pub fn half_line_right() -> Self {
        InteractionMask {
            mode: MaskMode::HalfLineRight,
        }
    }

    pub fn half_line_left() -> Self {
        InteractionMask {
            mode: MaskMode::HalfLineLeft,
        }
    }

    pub fn intermediate(k: usize) -> Self {
        InteractionMask {
            mode: MaskMode::Intermediate(k),
        }
    }

    pub fn pairs(pairs: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut list: Vec<(i64, i64)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        list.sort_unstable();
        list.dedup();
        InteractionMask {
            mode: MaskMode::Pairs(list),
        }
    }

    pub fn mode(&self) -> &MaskMode {
        &self.mode
    }

    /// Whether the pair `{a, b}` (`a != b`) is coupled.
    pub fn is_active(&self, a: i64, b: i64) -> bool {
        if a == b {
            return false;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        match &self.mode {
            MaskMode::Full => true,
            MaskMode::HalfLineRight => lo >= 0,
            MaskMode::HalfLineLeft => hi < 0,
            MaskMode::Intermediate(k) => {
                if lo >= 0 || hi < 0 {
                    true
                } else {
                    cross_pair_index((-lo) as usize, hi as usize) < *k
                }
            }
            MaskMode::Pairs(list) => list.binary_search(&(lo, hi)).is_ok(),
        }
    }

    /// Numeric identifier used in binary dumps: `k >= 0` for intermediate masks,
    /// negative codes for the others.
    pub fn id(&self) -> i64 {
        match self.mode {
            MaskMode::Full => -1,
            MaskMode::HalfLineRight => -2,
            MaskMode::HalfLineLeft => -3,
            MaskMode::Pairs(_) => -4,
            MaskMode::Intermediate(k) => k as i64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn cross_pairs_in_window(n: i64) -> BTreeSet<CrossPair> {
        let mut set = BTreeSet::new();
        for i in 1..=n {
            for j in 0..=n {
                set.insert(CrossPair { left: -i, right: j });
            }
        }
        set
    }

    #[test]
    fn first_two_pairs() {
        let p = enumerate_cross_pairs(1);
        assert_eq!(
            p,
            alloc::vec![
                CrossPair { left: -1, right: 0 },
                CrossPair { left: -1, right: 1 }
            ]
        );
        assert_eq!(k_n(1), 2);
    }

    #[test]
    fn n_two_set_equality() {
        let p = enumerate_cross_pairs(2);
        assert_eq!(p.len(), 6);
        let set: BTreeSet<_> = p.into_iter().collect();
        assert_eq!(set, cross_pairs_in_window(2));
    }

    #[test]
    fn prefix_and_k_n_property_up_to_eight() {
        for n in 1..=8usize {
            let pairs = enumerate_cross_pairs(n);
            let set: BTreeSet<_> = pairs.iter().copied().collect();
            assert_eq!(set.len(), pairs.len(), "duplicates at N={n}");
            assert_eq!(set, cross_pairs_in_window(n as i64), "N={n}");
            let shorter = enumerate_cross_pairs(n - 1);
            assert_eq!(&pairs[..shorter.len()], &shorter[..]);
        }
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..5000 {
            let p = cross_pair_at(idx);
            assert_eq!(cross_pair_index((-p.left) as usize, p.right as usize), idx);
        }
    }

    #[test]
    fn intermediate_activity() {
        let m0 = InteractionMask::intermediate(0);
        assert!(m0.is_active(-2, -1));
        assert!(m0.is_active(0, 3));
        assert!(!m0.is_active(-1, 0));
        let m1 = InteractionMask::intermediate(1);
        assert!(m1.is_active(0, -1));
        assert!(!m1.is_active(-1, 1));
        let right = InteractionMask::half_line_right();
        assert!(!right.is_active(-1, 2));
        assert!(right.is_active(1, 2));
        let single = InteractionMask::pairs([(0, -1)]);
        assert!(single.is_active(-1, 0));
        assert!(!single.is_active(0, 1));
        assert!(!InteractionMask::full().is_active(3, 3));
    }
}
