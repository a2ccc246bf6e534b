use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, exp, ln, pairwise_sum, pairwise_sum_by};
use crate::model::config::{bit_spin, low_mask, Window, DEFAULT_ENUMERATION_LIMIT};
use crate::model::{
    BoundaryCondition, CouplingFamily, DenseMatrix, EnergyKernel, InteractionMask, LocalFunction,
};
use crate::par::fill;

/// Finite-volume Gibbs measure stored as an explicit table over all `2^n` configurations.
///
/// Entry `x` is the probability of the configuration with packed bits `x`
/// (bit `p` set means spin `+1` at site `volume.lo + p`).
#[derive(Debug, Clone)]
pub struct ExactMeasure {
    volume: Window,
    beta: f64,
    mask: InteractionMask,
    bc: BoundaryCondition,
    kernel: Option<EnergyKernel>,
    probs: Vec<f64>,
    log_partition: f64,
    truncation_remainder: f64,
}

/// `exp(-H_Lambda) / Z` over the volume, enumerated exhaustively.
pub fn boltzmann(
    volume: Window,
    beta: f64,
    mask: &InteractionMask,
    bc: &BoundaryCondition,
    couplings: &CouplingFamily,
) -> Result<ExactMeasure> {
    boltzmann_with_limit(volume, beta, mask, bc, couplings, DEFAULT_ENUMERATION_LIMIT)
}

pub fn boltzmann_with_limit(
    volume: Window,
    beta: f64,
    mask: &InteractionMask,
    bc: &BoundaryCondition,
    couplings: &CouplingFamily,
    limit: usize,
) -> Result<ExactMeasure> {
    check_beta(beta)?;
    let n = volume.len();
    if n > limit {
        return Err(Error::VolumeTooLarge { sites: n, limit });
    }
    let kernel = EnergyKernel::new(volume, mask, bc, couplings)?;
    let mut table = alloc::vec![0.0; 1usize << n];
    fill(&mut table, |x| beta * kernel.coupling_sum(x));
    let log_partition = normalize_log_weights(&mut table);
    Ok(ExactMeasure {
        volume,
        beta,
        mask: mask.clone(),
        bc: bc.clone(),
        truncation_remainder: bc.truncation_remainder(&volume, beta, couplings),
        kernel: Some(kernel),
        probs: table,
        log_partition,
    })
}

/// `tau(omega) ~ exp(-beta/2 (omega, A omega))` for a symmetric matrix `A` indexed by the volume.
pub fn boltzmann_matrix(matrix: &DenseMatrix, volume: Window, beta: f64) -> Result<ExactMeasure> {
    check_beta(beta)?;
    let n = volume.len();
    if matrix.dim() != n {
        return Err(Error::param("matrix", "dimension must match the volume"));
    }
    if n > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::VolumeTooLarge {
            sites: n,
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    if let Some((i, j, gap)) = matrix.asymmetry(0.0) {
        return Err(Error::NotSymmetric { i, j, gap });
    }
    let mut table = alloc::vec![0.0; 1usize << n];
    fill(&mut table, |x| {
        let mut q = 0.0;
        for i in 0..n {
            let si = bit_spin(x, i) as f64;
            q += matrix.get(i, i);
            for j in i + 1..n {
                q += 2.0 * matrix.get(i, j) * si * bit_spin(x, j) as f64;
            }
        }
        -0.5 * beta * q
    });
    let log_partition = normalize_log_weights(&mut table);
    Ok(ExactMeasure {
        volume,
        beta,
        mask: InteractionMask::full(),
        bc: BoundaryCondition::Free,
        kernel: None,
        probs: table,
        log_partition,
        truncation_remainder: 0.0,
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param(
            "beta",
            "inverse temperature must be finite and nonnegative",
        ));
    }
    Ok(())
}

/// Turns log-weights into probabilities in place and returns the log-partition function.
fn normalize_log_weights(table: &mut [f64]) -> f64 {
    let max = table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in table.iter_mut() {
        *v = exp(*v - max);
    }
    let z = pairwise_sum(table);
    let inv = 1.0 / z;
    for v in table.iter_mut() {
        *v *= inv;
    }
    max + ln(z)
}

impl ExactMeasure {
    /// A measure from an explicit probability table (renormalized).
    pub fn from_probabilities(volume: Window, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << volume.len() {
            return Err(Error::param("probabilities", "table length must be 2^n"));
        }
        if probs.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::param(
                "probabilities",
                "entries must be finite and positive",
            ));
        }
        let z = pairwise_sum(&probs);
        Ok(ExactMeasure {
            volume,
            beta: 0.0,
            mask: InteractionMask::full(),
            bc: BoundaryCondition::Free,
            kernel: None,
            probs: probs.into_iter().map(|p| p / z).collect(),
            log_partition: ln(z),
            truncation_remainder: 0.0,
        })
    }

    /// Reassembles a stored measure without touching its table, so reloaded copies are
    /// bit-identical. The energy kernel is not restored.
    pub fn from_stored(
        volume: Window,
        beta: f64,
        mask: InteractionMask,
        bc: BoundaryCondition,
        probs: Vec<f64>,
        log_partition: f64,
        truncation_remainder: f64,
    ) -> Result<Self> {
        check_beta(beta)?;
        if probs.len() != 1usize << volume.len() {
            return Err(Error::param("probabilities", "table length must be 2^n"));
        }
        if probs.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::param(
                "probabilities",
                "entries must be finite and positive",
            ));
        }
        if abs(pairwise_sum(&probs) - 1.0) > 1e-12 {
            return Err(Error::param("probabilities", "table does not sum to one"));
        }
        Ok(ExactMeasure {
            volume,
            beta,
            mask,
            bc,
            kernel: None,
            probs,
            log_partition,
            truncation_remainder,
        })
    }

    pub fn volume(&self) -> Window {
        self.volume
    }

    pub fn sites(&self) -> usize {
        self.volume.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mask(&self) -> &InteractionMask {
        &self.mask
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.bc
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, bits: u64) -> f64 {
        self.probs[bits as usize]
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Bound on the energy discarded by truncating the boundary condition.
    pub fn truncation_remainder(&self) -> f64 {
        self.truncation_remainder
    }

    pub(crate) fn kernel(&self) -> Option<&EnergyKernel> {
        self.kernel.as_ref()
    }

    /// `sum_x p(x) g(x)` with a fixed-shape pairwise reduction.
    pub fn integrate(&self, g: impl Fn(u64) -> f64) -> f64 {
        pairwise_sum_by(self.probs.len(), &|x| self.probs[x] * g(x as u64))
    }

    /// `sum_x p(x) values[x]`.
    pub fn integrate_table(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.probs.len());
        pairwise_sum_by(self.probs.len(), &|x| self.probs[x] * values[x])
    }

    pub fn expectation(&self, f: &LocalFunction) -> Result<f64> {
        let bound = f.bind(&self.volume)?;
        Ok(self.integrate(|x| bound.eval(x)))
    }

    /// `< prod_{i in sites} sigma_i >`.
    pub fn correlation(&self, sites: &[i64]) -> Result<f64> {
        let mut m = 0u64;
        for &s in sites {
            m ^= 1 << self.volume.position(s)?;
        }
        Ok(self.correlation_bits(m))
    }

    /// Correlation of the sites whose positions are set in `m`.
    pub fn correlation_bits(&self, m: u64) -> f64 {
        self.integrate(|x| {
            if (!x & m).count_ones() & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    /// `<sigma_i sigma_j>` for all positions, row-major `n x n`.
    pub fn two_point_matrix(&self) -> Vec<f64> {
        let n = self.sites();
        let mut out = alloc::vec![1.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let c = self.correlation_bits((1 << i) | (1 << j));
                out[i * n + j] = c;
                out[j * n + i] = c;
            }
        }
        out
    }

    /// `sup_j sum_i <sigma_i sigma_j>`.
    pub fn susceptibility(&self) -> f64 {
        let n = self.sites();
        let c = self.two_point_matrix();
        (0..n)
            .map(|j| (0..n).map(|i| c[i * n + j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_i <sigma_mid sigma_i>` at the site `lo + n/2`.
    pub fn centered_correlation_sum(&self) -> f64 {
        let n = self.sites();
        let mid = n / 2;
        (0..n)
            .map(|i| {
                if i == mid {
                    1.0
                } else {
                    self.correlation_bits((1 << i) | (1 << mid))
                }
            })
            .sum()
    }

    /// Marginal on the sub-window `sub` (which must lie inside the volume).
    pub fn marginal(&self, sub: Window) -> Result<ExactMeasure> {
        if !self.volume.contains_window(&sub) {
            return Err(Error::SiteOutsideWindow {
                site: if sub.lo < self.volume.lo {
                    sub.lo
                } else {
                    sub.hi
                },
                lo: self.volume.lo,
                hi: self.volume.hi,
            });
        }
        let shift = (sub.lo - self.volume.lo) as usize;
        let m = low_mask(sub.len());
        let mut out = alloc::vec![0.0; 1usize << sub.len()];
        for (x, p) in self.probs.iter().enumerate() {
            out[((x as u64 >> shift) & m) as usize] += p;
        }
        Ok(ExactMeasure {
            volume: sub,
            beta: self.beta,
            mask: self.mask.clone(),
            bc: self.bc.clone(),
            kernel: None,
            log_partition: f64::NAN,
            probs: out,
            truncation_remainder: self.truncation_remainder,
        })
    }

    /// `P(F - E F >= t)` for every `t` in the grid.
    pub fn tail_probabilities(&self, f: &LocalFunction, t_grid: &[f64]) -> Result<Vec<f64>> {
        let bound = f.bind(&self.volume)?;
        let values = bound.tabulate(self.sites());
        let mean = self.integrate_table(&values);
        Ok(t_grid
            .iter()
            .map(|&t| {
                self.integrate(|x| {
                    if values[x as usize] - mean >= t {
                        1.0
                    } else {
                        0.0
                    }
                })
            })
            .collect())
    }
}

/// Site-position mask helper for callers working with packed configurations.
pub fn position_mask(volume: &Window, sites: &[i64]) -> Result<u64> {
    let mut m = 0u64;
    for &s in sites {
        m |= 1 << volume.position(s)?;
    }
    Ok(m)
}
