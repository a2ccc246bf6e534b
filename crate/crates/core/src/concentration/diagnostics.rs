use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gibbs::{boltzmann, intermediate_density};
use crate::math::{exp, lgamma, ln, powf, sqrt};
use crate::model::summability::{SeriesValue, SquaredTailSeries, DEFAULT_DIVERGENCE_THRESHOLD};
use crate::model::{k_n, BoundaryCondition, CouplingFamily, InteractionMask, Window};

use super::constants::ChiSource;

/// Which intermediate indices to tabulate at each `N`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "policy", rename_all = "kebab-case"))]
pub enum KPolicy {
    /// Every `k` in `0..=k_N`.
    #[default]
    All,
    /// `0, s, 2s, ...` and `k_N`.
    Stride { step: usize },
    /// Explicit indices (those above `k_N` are skipped).
    List { ks: Vec<usize> },
}

impl KPolicy {
    fn indices(&self, k_max: usize) -> Vec<usize> {
        match self {
            KPolicy::All => (0..=k_max).collect(),
            KPolicy::Stride { step } => {
                let mut ks: Vec<usize> = (0..=k_max).step_by((*step).max(1)).collect();
                if ks.last() != Some(&k_max) {
                    ks.push(k_max);
                }
                ks
            }
            KPolicy::List { ks } => ks.iter().copied().filter(|k| *k <= k_max).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UiRow {
    pub n: usize,
    pub k: usize,
    /// `int f^(k) log f^(k) d nu^(0)`.
    pub entropy: f64,
    /// `-int W_k d nu^(k)`.
    pub minus_mean_w: f64,
    /// `log int e^{-W_k} d nu^(0)`.
    pub log_normalizer: f64,
    pub chi: f64,
    pub chi_source: ChiSource,
    /// `beta sup_p p J(p) chi`.
    pub bound: f64,
    pub exceeds: bool,
}

/// Entropies of the intermediate densities against `beta sup_p p J(p) chi`, with `chi`
/// the exact susceptibility of the full measure on `[-N, N]`.
pub fn uniform_integrability_diag(
    ns: &[usize],
    policy: &KPolicy,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<Vec<UiRow>> {
    let sup_pj = couplings.sup_p_jp();
    let mut rows = Vec::new();
    for &n in ns {
        let window = Window::symmetric(n);
        let mu = boltzmann(
            window,
            beta,
            &InteractionMask::full(),
            &BoundaryCondition::Free,
            couplings,
        )?;
        let chi = mu.susceptibility();
        let bound = beta * sup_pj * chi;
        for k in policy.indices(k_n(n)) {
            let d = intermediate_density(n, k, beta, couplings)?;
            rows.push(UiRow {
                n,
                k,
                entropy: d.entropy,
                minus_mean_w: d.minus_mean_w,
                log_normalizer: d.log_normalizer,
                chi,
                chi_source: ChiSource::ExactFv {
                    sites: window.len(),
                },
                bound,
                exceeds: d.entropy > bound * (1.0 + 1e-9),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModulusRow {
    pub n: usize,
    /// `16 beta^2 sum_{i>=1} (sum_{j>=n+i} J(j))^2` (upper end of its bracket).
    pub u_n: f64,
    /// `sqrt(D u_n / 2)`.
    pub v_n: f64,
    /// `C_2 ((6 v_n^2 + 8 v_n) e^{v_n^2})^{1/2}` with `C_2 = e^{8 D beta^2 C_1}`.
    pub modulus: f64,
}

/// Equicontinuity moduli of the half-line densities; needs `C_1 < infinity`.
pub fn continuity_modulus(
    ns: &[usize],
    d: f64,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<Vec<ModulusRow>> {
    let series =
        SquaredTailSeries::new(couplings, DEFAULT_DIVERGENCE_THRESHOLD).map_err(|e| match e {
            SeriesValue::Divergent {
                threshold,
                witness_index,
            } => Error::ConditionIiiDivergent {
                threshold,
                witness_index,
            },
            SeriesValue::Finite(_) => Error::param("couplings", "unexpected series state"),
        })?;
    let c1 = series.from(1).hi;
    let c2 = exp(8.0 * d * beta * beta * c1);
    Ok(ns
        .iter()
        .map(|&n| {
            let u_n = 16.0 * beta * beta * series.from(n + 1).hi;
            let v_n = sqrt(0.5 * d * u_n);
            ModulusRow {
                n,
                u_n,
                v_n,
                modulus: c2 * sqrt((6.0 * v_n * v_n + 8.0 * v_n) * exp(v_n * v_n)),
            }
        })
        .collect())
}

/// `sum_{m>=1} (2^m + 2) / m! * m v^m Gamma(m/2)`, summed until the terms are negligible.
pub fn moment_series(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let lv = ln(v);
    let mut acc = 0.0;
    for m in 1..400 {
        let mf = m as f64;
        // (2^m + 2) m v^m Gamma(m/2) / m!, in logs to avoid inf * 0.
        let lt = ln(powf(2.0, mf) + 2.0) + ln(mf) + mf * lv + lgamma(0.5 * mf) - lgamma(mf + 1.0);
        let term = exp(lt);
        acc += term;
        if m > 10 && term < 1e-17 * acc {
            break;
        }
    }
    acc
}
