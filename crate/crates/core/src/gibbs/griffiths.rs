//! Correlation inequalities checked over every subset of the volume.

use alloc::vec::Vec;

use crate::error::Result;
use crate::gibbs::measure::{boltzmann, ExactMeasure};
use crate::model::config::Window;
use crate::model::{cross_pair_index, BoundaryCondition, CouplingFamily, InteractionMask};

/// `<sigma_A>` for every subset `A` (as a position mask), by a Walsh-Hadamard transform.
pub fn all_correlations(m: &ExactMeasure) -> Vec<f64> {
    let n = m.sites();
    let mut h = m.probabilities().to_vec();
    let mut len = 1;
    while len < h.len() {
        for start in (0..h.len()).step_by(2 * len) {
            for k in start..start + len {
                let (a, b) = (h[k], h[k + len]);
                h[k] = a + b;
                h[k + len] = a - b;
            }
        }
        len *= 2;
    }
    // h[A] = sum_x p(x) (-1)^{|x & A|} and prod_{i in A} sigma_i = (-1)^{|A| - |x & A|}.
    for (a, v) in h.iter_mut().enumerate() {
        if (a as u64 & crate::model::config::low_mask(n)).count_ones() & 1 == 1 {
            *v = -*v;
        }
    }
    h
}

/// A single violated inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GriffithsViolation {
    pub kind: GriffithsKind,
    pub alpha_or_table: f64,
    pub sites: usize,
    pub beta: f64,
    pub subset: u64,
    pub mask_k: Option<usize>,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum GriffithsKind {
    /// `<sigma_A> >= 0`.
    Positivity,
    /// `<sigma_A>` nondecreasing in beta.
    BetaMonotone,
    /// `<sigma_A>` under `Psi^(k)` at most under `Psi^(k+1)`, at most under the full interaction.
    MaskMonotone,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GriffithsReport {
    pub checks: u64,
    pub violations: Vec<GriffithsViolation>,
    pub worst_gap: f64,
}

impl GriffithsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The volume of `n` sites used by the suite: `[-floor(n/2), n - floor(n/2) - 1]`, straddling the cut.
pub fn straddling_window(n: usize) -> Window {
    let lo = -((n / 2) as i64);
    Window {
        lo,
        hi: lo + n as i64 - 1,
    }
}

/// Intermediate indices at which the mask restricted to `volume` changes, starting at 0.
pub fn relevant_intermediate_indices(volume: &Window) -> Vec<usize> {
    let mut ks = Vec::new();
    for i in 1..=(-volume.lo).max(0) as usize {
        for j in 0..=volume.hi.max(-1) as usize {
            if volume.contains(-(i as i64)) && volume.contains(j as i64) {
                ks.push(cross_pair_index(i, j) + 1);
            }
        }
    }
    ks.push(0);
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Runs positivity, beta-monotonicity and mask-monotonicity on the straddling volume of `n` sites
/// for every beta in the (increasing) grid.
pub fn griffiths_suite(
    couplings: &CouplingFamily,
    label: f64,
    n: usize,
    betas: &[f64],
    tol: f64,
    report: &mut GriffithsReport,
) -> Result<()> {
    let volume = straddling_window(n);
    let ks = relevant_intermediate_indices(&volume);
    let record = |kind, beta, subset, mask_k, gap: f64, report: &mut GriffithsReport| {
        report.checks += 1;
        if gap > report.worst_gap {
            report.worst_gap = gap;
        }
        if gap > tol {
            report.violations.push(GriffithsViolation {
                kind,
                alpha_or_table: label,
                sites: n,
                beta,
                subset,
                mask_k,
                gap,
            });
        }
    };
    let mut previous_full: Option<Vec<f64>> = None;
    for &beta in betas {
        let full = all_correlations(&boltzmann(
            volume,
            beta,
            &InteractionMask::full(),
            &BoundaryCondition::Free,
            couplings,
        )?);
        let mut chain: Vec<(Option<usize>, Vec<f64>)> = Vec::with_capacity(ks.len() + 1);
        for &k in &ks {
            let m = boltzmann(
                volume,
                beta,
                &InteractionMask::intermediate(k),
                &BoundaryCondition::Free,
                couplings,
            )?;
            chain.push((Some(k), all_correlations(&m)));
        }
        chain.push((None, full.clone()));
        for (k, corr) in &chain {
            for (a, c) in corr.iter().enumerate() {
                record(GriffithsKind::Positivity, beta, a as u64, *k, -c, report);
            }
        }
        for pair in chain.windows(2) {
            let (k, lower) = (&pair[0].0, &pair[0].1);
            let upper = &pair[1].1;
            for a in 0..lower.len() {
                record(
                    GriffithsKind::MaskMonotone,
                    beta,
                    a as u64,
                    *k,
                    lower[a] - upper[a],
                    report,
                );
            }
        }
        if let Some(prev) = &previous_full {
            for a in 0..prev.len() {
                record(
                    GriffithsKind::BetaMonotone,
                    beta,
                    a as u64,
                    None,
                    prev[a] - full[a],
                    report,
                );
            }
        }
        previous_full = Some(full);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{abs, tanh};

    #[test]
    fn transform_matches_direct_correlations() {
        let j = CouplingFamily::power_law(1.5).unwrap();
        let m = boltzmann(
            Window::new(-2, 1).unwrap(),
            0.4,
            &InteractionMask::intermediate(2),
            &BoundaryCondition::Free,
            &j,
        )
        .unwrap();
        let all = all_correlations(&m);
        for a in 0..16u64 {
            assert!(abs(all[a as usize] - m.correlation_bits(a)) < 1e-14);
        }
        assert!(abs(all[0] - 1.0) < 1e-15);
    }

    #[test]
    fn two_site_correlation() {
        let nn = CouplingFamily::nearest_neighbor(1.0).unwrap();
        let m = boltzmann(
            Window::from_origin(2),
            0.8,
            &InteractionMask::full(),
            &BoundaryCondition::Free,
            &nn,
        )
        .unwrap();
        assert!(abs(all_correlations(&m)[3] - tanh(0.8)) < 1e-15);
    }

    #[test]
    fn relevant_indices_cover_window() {
        let ks = relevant_intermediate_indices(&Window::symmetric(2));
        assert_eq!(ks, alloc::vec![0, 1, 2, 3, 4, 5, 6]);
        let ks = relevant_intermediate_indices(&straddling_window(3));
        // [-1, 1]: pairs {-1,0}, {-1,1}.
        assert_eq!(ks, alloc::vec![0, 1, 2]);
    }

    #[test]
    fn small_suite_passes() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let mut rep = GriffithsReport::default();
        griffiths_suite(&j, 2.0, 5, &[0.0, 0.3, 0.6], 1e-12, &mut rep).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations.first());
        assert!(rep.checks > 0);
    }
}
