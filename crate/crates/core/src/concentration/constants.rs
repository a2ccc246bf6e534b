use crate::error::{Error, Result};
use crate::math::exp;
use crate::model::summability::{summability_report, SeriesValue};
use crate::model::{suac_norm, CouplingFamily, InteractionMask};

/// Where a susceptibility value came from. The constants of the infinite-volume
/// statements use the infinite-volume susceptibility, which is never available here.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "source", rename_all = "kebab-case"))]
pub enum ChiSource {
    /// Exact enumeration on a volume of `sites` sites.
    ExactFv {
        sites: usize,
    },
    /// Monte Carlo estimate on `sites` sites.
    Mc {
        sites: usize,
        stderr: f64,
    },
    User,
}

/// `1/4 + (beta/2) exp(2 beta chi)`.
pub fn lsi_bound(beta: f64, chi: f64) -> f64 {
    0.25 + 0.5 * beta * exp(2.0 * beta * chi)
}

/// `1/4 + kappa beta exp(4 kappa beta chi)`: the finite-volume bound for the matrix `(A + kappa I) / (2 kappa)`
/// at inverse temperature `2 kappa beta`, which reproduces the Gibbs measure at `beta`.
pub fn lsi_bound_rescaled(beta: f64, chi: f64, kappa: f64) -> f64 {
    0.25 + kappa * beta * exp(4.0 * kappa * beta * chi)
}

/// `(1/8) (1 + 2 beta exp(2 beta chi)) (exp(4 beta sum J) + 1)`.
pub fn gcb_constant(beta: f64, chi: f64, total: f64) -> f64 {
    0.125 * (1.0 + 2.0 * beta * exp(2.0 * beta * chi)) * (exp(4.0 * beta * total) + 1.0)
}

/// GCB constant obtained from a log-Sobolev constant `d_lsi` and the SUAC norm: `d_lsi (e^{2 suac} + 1) / 2`.
pub fn herbst_constant(d_lsi: f64, suac: f64) -> f64 {
    0.5 * d_lsi * (exp(2.0 * suac) + 1.0)
}

/// `exp(-2 t^2 / (D ||delta F||^2))`.
pub fn gcb_tail_bound(t: f64, d: f64, total_oscillation: f64) -> f64 {
    if total_oscillation == 0.0 {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    exp(-2.0 * t * t / (d * total_oscillation))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantBundle {
    pub beta: f64,
    pub chi: f64,
    pub chi_source: ChiSource,
    /// `2 sum J` (upper end of its certified bracket).
    pub kappa: f64,
    /// `sum J` (upper end).
    pub total: f64,
    /// SUAC norm of `beta Psi` for the mask (upper end).
    pub suac: f64,
    pub d_lsi_bound: f64,
    /// [`lsi_bound_rescaled`] with `kappa` above.
    pub d_lsi_rescaled: f64,
    pub d_gcb: f64,
    /// [`herbst_constant`] applied to `d_lsi_bound`.
    pub d_herbst: f64,
    /// `sum_i (sum_{k>=i} J(k))^2`, possibly certified divergent.
    pub c1: SeriesValue,
}

impl ConstantBundle {
    /// Upper end of `C_1`, or the reason it is unavailable.
    pub fn c1_upper(&self) -> Result<f64> {
        match self.c1 {
            SeriesValue::Finite(iv) => Ok(iv.hi),
            SeriesValue::Divergent {
                threshold,
                witness_index,
            } => Err(Error::ConditionIiiDivergent {
                threshold,
                witness_index,
            }),
        }
    }
}

pub fn constants(
    beta: f64,
    chi: f64,
    chi_source: ChiSource,
    couplings: &CouplingFamily,
    mask: &InteractionMask,
) -> Result<ConstantBundle> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param(
            "beta",
            "inverse temperature must be finite and nonnegative",
        ));
    }
    if !(chi >= 1.0) || !chi.is_finite() {
        return Err(Error::param(
            "chi",
            "susceptibility of a ferromagnet is at least 1",
        ));
    }
    let report = summability_report(couplings);
    let total = report.total.hi;
    let suac = suac_norm(mask, beta, couplings).hi;
    let d_lsi_bound = lsi_bound(beta, chi);
    Ok(ConstantBundle {
        beta,
        chi,
        chi_source,
        kappa: report.kappa.hi,
        total,
        suac,
        d_lsi_bound,
        d_lsi_rescaled: lsi_bound_rescaled(beta, chi, report.kappa.hi),
        d_gcb: gcb_constant(beta, chi, total),
        d_herbst: herbst_constant(d_lsi_bound, suac),
        c1: report.c1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        for chi in [1.0, 3.0, 40.0] {
            let b = constants(0.0, chi, ChiSource::User, &j, &InteractionMask::full()).unwrap();
            assert_eq!(b.d_gcb, 0.25);
            assert_eq!(b.d_lsi_bound, 0.25);
            assert_eq!(b.d_herbst, 0.25);
        }
        assert_eq!(herbst_constant(0.25, 0.0), 0.25);
    }

    #[test]
    fn gcb_is_herbst_with_full_suac() {
        // For the full pair interaction the SUAC norm is 2 beta sum J.
        let j = CouplingFamily::power_law(2.0).unwrap();
        let b = constants(0.3, 2.5, ChiSource::User, &j, &InteractionMask::full()).unwrap();
        assert!((b.d_gcb - b.d_herbst).abs() < 1e-12 * b.d_gcb);
        assert!(b.c1_upper().is_ok());
        let j = CouplingFamily::power_law(1.4).unwrap();
        let b = constants(0.3, 2.5, ChiSource::User, &j, &InteractionMask::full()).unwrap();
        assert!(matches!(
            b.c1_upper(),
            Err(Error::ConditionIiiDivergent { .. })
        ));
    }

    #[test]
    fn rejects_subunit_chi() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        assert!(constants(0.3, 0.5, ChiSource::User, &j, &InteractionMask::full()).is_err());
    }

    #[test]
    fn tail_bound_shape() {
        assert_eq!(gcb_tail_bound(0.0, 0.25, 4.0), 1.0);
        assert!((gcb_tail_bound(1.0, 0.25, 4.0) - exp(-2.0)).abs() < 1e-16);
    }
}
