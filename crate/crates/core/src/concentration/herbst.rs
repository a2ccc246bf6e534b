use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gibbs::functional::tabulate;
use crate::gibbs::ExactMeasure;
use crate::math::{exp, exp_m1, ln_1p};
use crate::model::LocalFunction;

use super::verify::{table_total_oscillation, RATIO_SLACK};

/// Finite-difference step of the scan.
pub const HERBST_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HerbstRow {
    pub lambda: f64,
    /// `u(lambda) = log Z(lambda) / lambda`.
    pub u: f64,
    /// Centered difference of `u`, refined once by Richardson extrapolation.
    pub du: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HerbstScan {
    /// `int F dm = u(0)`.
    pub mean: f64,
    /// `u(0)` extrapolated from `u(h)` and `u(2h)`.
    pub u0_limit: f64,
    /// `D (e^{2 ||Psi||} + 1) / 2 * ||delta F||^2`.
    pub slope_bound: f64,
    pub rows: Vec<HerbstRow>,
    pub violations: usize,
}

/// `u(lambda)` with `Z(lambda) = int e^{lambda F} dm`, centred for stability.
fn u_at(m: &ExactMeasure, f: &[f64], mean: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return mean;
    }
    mean + ln_1p(m.integrate_table_by(|x| exp_m1(lambda * (f[x] - mean)))) / lambda
}

fn derivative(m: &ExactMeasure, f: &[f64], mean: f64, lambda: f64) -> f64 {
    let central =
        |h: f64| (u_at(m, f, mean, lambda + h) - u_at(m, f, mean, lambda - h)) / (2.0 * h);
    let (coarse, fine) = (central(HERBST_STEP), central(0.5 * HERBST_STEP));
    (4.0 * fine - coarse) / 3.0
}

/// Tabulates `u` and `u'` on a grid in `(0, 1]` and flags slopes above the bound
/// implied by a log-Sobolev constant `d_lsi` and the SUAC norm `suac`.
pub fn herbst_scan(
    m: &ExactMeasure,
    f: &LocalFunction,
    lambdas: &[f64],
    d_lsi: f64,
    suac: f64,
) -> Result<HerbstScan> {
    herbst_scan_table(m, &tabulate(m, f)?, lambdas, d_lsi, suac)
}

pub fn herbst_scan_table(
    m: &ExactMeasure,
    f: &[f64],
    lambdas: &[f64],
    d_lsi: f64,
    suac: f64,
) -> Result<HerbstScan> {
    if lambdas.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return Err(Error::param("lambda", "grid points must lie in (0, 1]"));
    }
    let mean = m.integrate_table(f);
    let slope_bound = 0.5 * d_lsi * (exp(2.0 * suac) + 1.0) * table_total_oscillation(f, m.sites());
    let rows: Vec<HerbstRow> = lambdas
        .iter()
        .map(|&lambda| {
            let du = derivative(m, f, mean, lambda);
            HerbstRow {
                lambda,
                u: u_at(m, f, mean, lambda),
                du,
                violation: du > slope_bound * (1.0 + RATIO_SLACK) + 1e-10,
            }
        })
        .collect();
    let h = HERBST_STEP;
    Ok(HerbstScan {
        mean,
        u0_limit: 2.0 * u_at(m, f, mean, h) - u_at(m, f, mean, 2.0 * h),
        slope_bound,
        violations: rows.iter().filter(|r| r.violation).count(),
        rows,
    })
}
