//! Radon-Nikodym densities of intermediate measures and half-line restrictions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gibbs::measure::{boltzmann, ExactMeasure};
use crate::math::{abs, exp, ln, ln_1p};
use crate::model::config::{bit_spin, Window, DEFAULT_ENUMERATION_LIMIT};
use crate::model::{cross_pair_at, k_n, BoundaryCondition, CouplingFamily, InteractionMask};

/// Values of a density over the configurations of `window`, indexed by packed bits.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityTable {
    pub window: Window,
    pub values: Vec<f64>,
}

impl DensityTable {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `int value d(base)` for a measure on the same window.
    pub fn integral(&self, base: &ExactMeasure) -> Result<f64> {
        if base.volume() != self.window {
            let w = base.volume();
            return Err(Error::WindowMismatch {
                got_lo: w.lo,
                got_hi: w.hi,
                want_lo: self.window.lo,
                want_hi: self.window.hi,
            });
        }
        Ok(base.integrate_table(&self.values))
    }
}

/// Everything computed by [`intermediate_density`].
#[derive(Debug, Clone)]
pub struct IntermediateDensity {
    pub n: usize,
    pub k: usize,
    /// `f^(k) = exp(-W_k) / int exp(-W_k) d nu^(0)` on `[-N, N]`.
    pub density: DensityTable,
    /// `int f log f d nu^(0)`.
    pub entropy: f64,
    /// `-int W_k d nu^(k)`.
    pub minus_mean_w: f64,
    /// `log int exp(-W_k) d nu^(0)`.
    pub log_normalizer: f64,
    /// `|entropy - (minus_mean_w - log_normalizer)|`.
    pub identity_residual: f64,
    /// `int exp(-beta Phi_{Lambda_iota}) d nu^(iota-1)` for `iota = 1..=k`.
    pub factors: Vec<f64>,
    /// `|sum log factors - log_normalizer|`.
    pub telescoping_residual: f64,
}

/// Density of the intermediate measure `nu^(k)` with respect to the cut measure `nu^(0)` on `[-N, N]`.
pub fn intermediate_density(
    n: usize,
    k: usize,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<IntermediateDensity> {
    if n == 0 {
        return Err(Error::param("n", "window radius must be positive"));
    }
    let k_max = k_n(n);
    if k > k_max {
        return Err(Error::IntermediateIndexTooLarge { k, k_max, n });
    }
    let window = Window::symmetric(n);
    if window.len() > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::VolumeTooLarge {
            sites: window.len(),
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let nu0 = boltzmann(
        window,
        beta,
        &InteractionMask::intermediate(0),
        &BoundaryCondition::Free,
        couplings,
    )?;
    let size = 1usize << window.len();
    let pair_term = |iota: usize| -> (u64, f64) {
        let pair = cross_pair_at(iota);
        let a = (pair.left - window.lo) as u64;
        let b = (pair.right - window.lo) as u64;
        ((1 << a) | (1 << b), -beta * couplings.j(pair.distance()))
    };
    // beta Phi_pair(x) = coeff * sigma_a sigma_b, with sigma_a sigma_b = -1 iff exactly one bit is set.
    let term = |x: u64, (m, c): (u64, f64)| if (x & m).count_ones() == 1 { -c } else { c };

    let mut w = alloc::vec![0.0; size];
    let mut factors = Vec::with_capacity(k);
    for iota in 0..k {
        let t = pair_term(iota);
        let z_prev = nu0.integrate(|x| exp(-w[x as usize]));
        let num = nu0.integrate(|x| exp(-w[x as usize] - term(x, t)));
        factors.push(num / z_prev);
        for (x, v) in w.iter_mut().enumerate() {
            *v += term(x as u64, t);
        }
    }
    let z = nu0.integrate(|x| exp(-w[x as usize]));
    let log_normalizer = ln(z);
    let values: Vec<f64> = w.iter().map(|wx| exp(-wx) / z).collect();
    let entropy = nu0.integrate(|x| {
        let f = values[x as usize];
        f * ln(f)
    });
    let minus_mean_w = -nu0.integrate(|x| values[x as usize] * w[x as usize]);
    let log_factors: f64 = factors.iter().map(|f| ln(*f)).sum();
    Ok(IntermediateDensity {
        n,
        k,
        identity_residual: abs(entropy - (minus_mean_w - log_normalizer)),
        telescoping_residual: abs(log_factors - log_normalizer),
        density: DensityTable { window, values },
        entropy,
        minus_mean_w,
        log_normalizer,
        factors,
    })
}

/// Half-line density `f_+^[N]` on depth-`d` cylinders of the right half-line.
#[derive(Debug, Clone)]
pub struct HalfLineDensity {
    pub n: usize,
    pub depth: usize,
    pub left_window: usize,
    /// `f_+^[N](eta)` indexed by packed `eta_0 .. eta_{d-1}`.
    pub density: DensityTable,
    /// `int exp(-W_[N](xi, eta)) d nu_-(xi)` before normalization.
    pub numerator: Vec<f64>,
    /// `int int exp(-W_[N]) d nu_- d nu`.
    pub denominator: f64,
    /// `max_eta |int W_[N](xi, eta) d nu_-(xi)|`, zero by flip symmetry of `nu_-`.
    pub max_mean_w: f64,
}

/// Computes `f_+^[N]` with `nu_-` approximated by the free measure on `[-M, -1]`
/// (`M = left_window`) and `nu` by the free measure on `[0, depth - 1]`.
///
/// `W_[N](xi, eta) = sum_{i <= min(N, M)} sum_{j < depth} -beta J(i + j) xi_{-i} eta_j`.
pub fn half_line_density(
    n: usize,
    depth: usize,
    beta: f64,
    couplings: &CouplingFamily,
    left_window: usize,
) -> Result<HalfLineDensity> {
    if depth == 0 || depth > n {
        return Err(Error::DepthTooLarge {
            depth,
            available: n,
        });
    }
    if left_window == 0 {
        return Err(Error::param(
            "left_window",
            "the left window needs at least one site",
        ));
    }
    if left_window > DEFAULT_ENUMERATION_LIMIT || depth > DEFAULT_ENUMERATION_LIMIT {
        return Err(Error::VolumeTooLarge {
            sites: left_window.max(depth),
            limit: DEFAULT_ENUMERATION_LIMIT,
        });
    }
    let left = Window::new(-(left_window as i64), -1)?;
    let right = Window::from_origin(depth);
    let nu_minus = boltzmann(
        left,
        beta,
        &InteractionMask::full(),
        &BoundaryCondition::Free,
        couplings,
    )?;
    let nu = boltzmann(
        right,
        beta,
        &InteractionMask::full(),
        &BoundaryCondition::Free,
        couplings,
    )?;
    let reach = n.min(left_window);

    // g_j(xi) = beta sum_i J(i + j) xi_{-i}, so that -W = sum_j g_j(xi) eta_j.
    let lsize = 1usize << left_window;
    let mut g = alloc::vec![0.0; lsize * depth];
    for xi in 0..lsize as u64 {
        for j in 0..depth {
            let mut acc = 0.0;
            for i in 1..=reach {
                let pos = left_window - i;
                acc += couplings.j(i + j) * bit_spin(xi, pos) as f64;
            }
            g[xi as usize * depth + j] = beta * acc;
        }
    }
    let rsize = 1usize << depth;
    let mut numerator = alloc::vec![0.0; rsize];
    let mut max_mean_w = 0.0f64;
    for (eta, slot) in numerator.iter_mut().enumerate() {
        let minus_w = |xi: u64| {
            let row = &g[xi as usize * depth..(xi as usize + 1) * depth];
            let mut e = 0.0;
            for (j, gj) in row.iter().enumerate() {
                e += gj * bit_spin(eta as u64, j) as f64;
            }
            e
        };
        *slot = nu_minus.integrate(|xi| exp(minus_w(xi)));
        max_mean_w = max_mean_w.max(abs(nu_minus.integrate(minus_w)));
    }
    let denominator = nu.integrate_table(&numerator);
    let values = numerator.iter().map(|v| v / denominator).collect();
    Ok(HalfLineDensity {
        n,
        depth,
        left_window,
        density: DensityTable {
            window: right,
            values,
        },
        numerator,
        denominator,
        max_mean_w,
    })
}

/// Drift of `f_+^[N]` as the left window grows: `(M, max relative change from the previous M)`.
pub fn half_line_sensitivity(
    n: usize,
    depth: usize,
    beta: f64,
    couplings: &CouplingFamily,
    windows: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(windows.len());
    let mut prev: Option<Vec<f64>> = None;
    for &m in windows {
        let d = half_line_density(n, depth, beta, couplings, m)?;
        let drift = match &prev {
            None => 0.0,
            Some(p) => p
                .iter()
                .zip(&d.density.values)
                .map(|(a, b)| abs(ln_1p((b - a) / a)))
                .fold(0.0, f64::max),
        };
        out.push((m, drift));
        prev = Some(d.density.values);
    }
    Ok(out)
}
