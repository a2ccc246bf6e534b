//! Depth-`m` truncation of the transfer operator
//! `(L f)(x) = sum_a exp(beta phi(ax)) f(ax)` on half-line cylinder functions.
//!
//! A state is a packed word `x_0 .. x_{m-1}` (bit `p` set means `x_p = +1`).
//! Prepending a symbol `a` shifts the word right by one site and drops `x_{m-1}`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gibbs::half_line_density;
use crate::math::{abs, exp, ln};
use crate::model::config::{bit_spin, low_mask};
use crate::model::CouplingFamily;
use crate::par::fill;

/// Largest supported depth (the action table holds `2 * 2^m` weights).
pub const MAX_TRANSFER_DEPTH: usize = 26;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct TransferTruncation {
    depth: usize,
    beta: f64,
    /// `weights[2x + b]` is the weight of the transition `x -> ax` with `a = +1` iff `b = 1`.
    weights: Vec<f64>,
}

/// Builds the action table with weights `exp(beta sum_{n=1}^m J(n) a x_{n-1})`.
pub fn build_truncation(
    m: usize,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<TransferTruncation> {
    if m == 0 {
        return Err(Error::param("m", "depth must be at least 1"));
    }
    if m > MAX_TRANSFER_DEPTH {
        return Err(Error::DepthTooLarge {
            depth: m,
            available: MAX_TRANSFER_DEPTH,
        });
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param(
            "beta",
            "inverse temperature must be finite and nonnegative",
        ));
    }
    let js: Vec<f64> = (1..=m).map(|n| couplings.j(n)).collect();
    let mut weights = alloc::vec![0.0; 2usize << m];
    fill(&mut weights, |idx| {
        let x = idx >> 1;
        let a = if idx & 1 == 1 { 1.0 } else { -1.0 };
        let mut s = 0.0;
        for (p, j) in js.iter().enumerate() {
            s += j * bit_spin(x, p) as f64;
        }
        exp(beta * a * s)
    });
    Ok(TransferTruncation {
        depth: m,
        beta,
        weights,
    })
}

impl TransferTruncation {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn states(&self) -> usize {
        1 << self.depth
    }

    /// Weight of `x -> ax`.
    pub fn weight(&self, x: u64, a: i8) -> f64 {
        self.weights[2 * x as usize + usize::from(a > 0)]
    }

    /// Index of the state `ax`.
    pub fn successor(&self, x: u64, a: i8) -> u64 {
        ((x << 1) | u64::from(a > 0)) & low_mask(self.depth)
    }

    /// The two `(successor, weight)` pairs of a state.
    pub fn transitions(&self, x: u64) -> [(u64, f64); 2] {
        [
            (self.successor(x, -1), self.weight(x, -1)),
            (self.successor(x, 1), self.weight(x, 1)),
        ]
    }

    /// `(L f)(x) = sum_a w(a, x) f(ax)`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.states()];
        self.apply_into(f, &mut out);
        out
    }

    fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let m = low_mask(self.depth);
        let w = &self.weights;
        fill(out, |x| {
            let up = ((x << 1) & m) as usize;
            w[2 * x as usize] * f[up] + w[2 * x as usize + 1] * f[up | 1]
        });
    }

    /// `(L* nu)(y) = sum over the two predecessors x with ax = y of w(a, x) nu(x)`.
    pub fn apply_adjoint(&self, nu: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.states()];
        self.apply_adjoint_into(nu, &mut out);
        out
    }

    fn apply_adjoint_into(&self, nu: &[f64], out: &mut [f64]) {
        let top = 1u64 << (self.depth - 1);
        let w = &self.weights;
        fill(out, |y| {
            let b = (y & 1) as usize;
            let x0 = y >> 1;
            let x1 = x0 | top;
            w[2 * x0 as usize + b] * nu[x0 as usize] + w[2 * x1 as usize + b] * nu[x1 as usize]
        });
    }
}

/// Principal eigen-data `(lambda, h, nu)` of a truncation, with `<nu, h> = 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenTriple {
    pub lambda: f64,
    pub log_lambda: f64,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    /// `||L h - lambda h||_inf / ||h||_inf`.
    pub residual_h: f64,
    /// `(1/2) ||L* nu / lambda - nu||_1`.
    pub residual_nu: f64,
    pub iterations: usize,
}

/// Power iteration on the action and its adjoint.
///
/// Stops once successive Rayleigh quotients agree to `tol` (relative) and both residuals are at most `tol`.
pub fn principal_eigen(t: &TransferTruncation, tol: f64, max_iters: usize) -> Result<EigenTriple> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "tolerance must be positive"));
    }
    let n = t.states();
    let (lambda, h, iters_h) = power_right(t, tol, max_iters)?;
    let (nu, iters_nu) = power_left(t, lambda, tol, max_iters)?;
    let pairing: f64 = nu.iter().zip(&h).map(|(a, b)| a * b).sum();
    let h: Vec<f64> = h.iter().map(|v| v / pairing).collect();
    let mut scratch = alloc::vec![0.0; n];
    t.apply_into(&h, &mut scratch);
    let residual_h = sup_residual(&scratch, &h, lambda) / sup(&h);
    t.apply_adjoint_into(&nu, &mut scratch);
    let residual_nu = 0.5
        * scratch
            .iter()
            .zip(&nu)
            .map(|(q, v)| abs(q / lambda - v))
            .sum::<f64>();
    Ok(EigenTriple {
        lambda,
        log_lambda: ln(lambda),
        h,
        nu,
        residual_h,
        residual_nu,
        iterations: iters_h.max(iters_nu),
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, |m, x| m.max(abs(x)))
}

fn sup_residual(lf: &[f64], f: &[f64], lambda: f64) -> f64 {
    lf.iter()
        .zip(f)
        .fold(0.0, |m, (a, b)| m.max(abs(a - lambda * b)))
}

fn power_right(
    t: &TransferTruncation,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, Vec<f64>, usize)> {
    let n = t.states();
    let mut h = alloc::vec![1.0; n];
    let mut g = alloc::vec![0.0; n];
    let mut prev = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        t.apply_into(&h, &mut g);
        let lambda = g.iter().sum::<f64>() / h.iter().sum::<f64>();
        residual = sup_residual(&g, &h, lambda) / sup(&h);
        if abs(lambda - prev) <= tol * lambda && residual <= tol {
            return Ok((lambda, h, it));
        }
        prev = lambda;
        let scale = 1.0 / sup(&g);
        for (hv, gv) in h.iter_mut().zip(&g) {
            *hv = gv * scale;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        residual,
    })
}

fn power_left(
    t: &TransferTruncation,
    lambda: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = t.states();
    let mut nu = alloc::vec![1.0 / n as f64; n];
    let mut q = alloc::vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        t.apply_adjoint_into(&nu, &mut q);
        let mass: f64 = q.iter().sum();
        residual = 0.5
            * q.iter()
                .zip(&nu)
                .map(|(a, b)| abs(a / lambda - b))
                .sum::<f64>();
        if abs(mass - lambda) <= tol * lambda && residual <= tol {
            return Ok((nu, it));
        }
        for (v, a) in nu.iter_mut().zip(&q) {
            *v = a / mass;
        }
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        residual,
    })
}

/// `sup_x |(L f)(x) - lambda f(x)| / (lambda ||f||_inf)`.
pub fn eigen_residual(f: &[f64], lambda: f64, t: &TransferTruncation) -> f64 {
    let lf = t.apply(f);
    sup_residual(&lf, f, lambda) / (lambda * sup(f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressureRow {
    pub m: usize,
    pub log_lambda: f64,
    /// `|log lambda_m - log lambda_prev|`, absent for the first row.
    pub gap: Option<f64>,
    pub residual_h: f64,
    pub residual_nu: f64,
}

/// `log lambda_m` for each depth in `depths` (in the given order).
pub fn pressure_table(
    depths: &[usize],
    beta: f64,
    couplings: &CouplingFamily,
    tol: f64,
) -> Result<Vec<PressureRow>> {
    let mut rows: Vec<PressureRow> = Vec::with_capacity(depths.len());
    for &m in depths {
        let t = build_truncation(m, beta, couplings)?;
        let e = principal_eigen(&t, tol, DEFAULT_MAX_ITERATIONS)?;
        let gap = rows.last().map(|r| abs(e.log_lambda - r.log_lambda));
        rows.push(PressureRow {
            m,
            log_lambda: e.log_lambda,
            gap,
            residual_h: e.residual_h,
            residual_nu: e.residual_nu,
        });
    }
    Ok(rows)
}

/// The half-line density route to the eigenfunction, next to the truncation it is compared with.
#[derive(Debug, Clone)]
pub struct DensityRoute {
    /// `f_+^[N]` on depth-`d` states, normalized so that `<nu, f> = 1`.
    pub f: Vec<f64>,
    pub eigen: EigenTriple,
    /// `||f - h||_inf / ||h||_inf`.
    pub relative_distance: f64,
    /// [`eigen_residual`] of `f` against the truncation's `lambda`.
    pub residual: f64,
}

/// `f_+^[N]` on depth-`depth` cylinders, normalized against the depth-`depth` eigenprobability.
pub fn eigenfunction_density_route(
    n: usize,
    depth: usize,
    beta: f64,
    couplings: &CouplingFamily,
    left_window: usize,
) -> Result<DensityRoute> {
    let t = build_truncation(depth, beta, couplings)?;
    let eigen = principal_eigen(&t, DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS)?;
    let d = half_line_density(n, depth, beta, couplings, left_window)?;
    let pairing: f64 = eigen
        .nu
        .iter()
        .zip(&d.density.values)
        .map(|(a, b)| a * b)
        .sum();
    let f: Vec<f64> = d.density.values.iter().map(|v| v / pairing).collect();
    let relative_distance = f
        .iter()
        .zip(&eigen.h)
        .fold(0.0f64, |m, (a, b)| m.max(abs(a - b)))
        / sup(&eigen.h);
    let residual = eigen_residual(&f, eigen.lambda, &t);
    Ok(DensityRoute {
        f,
        eigen,
        relative_distance,
        residual,
    })
}

/// `var_d(f) = max { |f(x) - f(y)| : x_i = y_i for i < d }` for `d = 0..=m`.
pub fn variation(f: &[f64]) -> Vec<f64> {
    let m = f.len().trailing_zeros() as usize;
    debug_assert_eq!(f.len(), 1 << m);
    (0..=m)
        .map(|d| {
            let key = low_mask(d);
            let mut lo = alloc::vec![f64::INFINITY; 1 << d];
            let mut hi = alloc::vec![f64::NEG_INFINITY; 1 << d];
            for (x, v) in f.iter().enumerate() {
                let k = (x as u64 & key) as usize;
                lo[k] = lo[k].min(*v);
                hi[k] = hi[k].max(*v);
            }
            lo.iter().zip(&hi).fold(0.0f64, |m, (a, b)| m.max(b - a))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::cosh;

    fn flip(x: u64, m: usize) -> u64 {
        !x & low_mask(m)
    }

    #[test]
    fn depth_one_action() {
        let j = CouplingFamily::nearest_neighbor(0.7).unwrap();
        let t = build_truncation(1, 0.9, &j).unwrap();
        let (p, q) = (exp(0.9 * 0.7), exp(-0.9 * 0.7));
        assert_eq!(t.transitions(1), [(0, q), (1, p)]);
        assert_eq!(t.transitions(0), [(0, p), (1, q)]);
        let e = principal_eigen(&t, 1e-13, 1000).unwrap();
        assert!(abs(e.lambda - 2.0 * cosh(0.63)) < 1e-12);
        assert!(abs(e.h[0] - e.h[1]) < 1e-14);
    }

    #[test]
    fn infinite_temperature() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        for m in [1, 3, 7] {
            let t = build_truncation(m, 0.0, &j).unwrap();
            assert!(t.weights.iter().all(|w| *w == 1.0));
            let e = principal_eigen(&t, 1e-12, 100).unwrap();
            assert_eq!(e.lambda, 2.0);
            assert!(e.h.iter().all(|v| abs(v - 1.0) < 1e-15));
            assert!(e.nu.iter().all(|v| abs(v - 1.0 / (1 << m) as f64) < 1e-15));
            assert_eq!(eigen_residual(&alloc::vec![1.0; 1 << m], 2.0, &t), 0.0);
        }
    }

    #[test]
    fn flip_symmetry_and_normalization() {
        let j = CouplingFamily::power_law(1.5).unwrap();
        let m = 9;
        let t = build_truncation(m, 0.5, &j).unwrap();
        for x in 0..1u64 << m {
            assert_eq!(t.weight(x, 1), t.weight(flip(x, m), -1));
        }
        let e = principal_eigen(&t, 1e-12, 10_000).unwrap();
        for x in 0..1u64 << m {
            let y = flip(x, m) as usize;
            assert!(abs(e.h[x as usize] - e.h[y]) <= 1e-13 * e.h[y]);
            assert!(abs(e.nu[x as usize] - e.nu[y]) <= 1e-13 * e.nu[y]);
        }
        let pairing: f64 = e.nu.iter().zip(&e.h).map(|(a, b)| a * b).sum();
        assert!(abs(pairing - 1.0) < 1e-13);
        assert!(abs(e.nu.iter().sum::<f64>() - 1.0) < 1e-12);
        assert!(e.h.iter().all(|v| *v > 0.0));
        assert!(e.residual_h <= 1e-11 && e.residual_nu <= 1e-11);
    }

    #[test]
    fn adjoint_is_transpose() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let t = build_truncation(4, 0.8, &j).unwrap();
        let f: Vec<f64> = (0..16).map(|x| 1.0 + x as f64 * 0.1).collect();
        let g: Vec<f64> = (0..16).map(|x| 2.0 - x as f64 * 0.05).collect();
        let lhs: f64 = g.iter().zip(t.apply(&f)).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.iter().zip(t.apply_adjoint(&g)).map(|(a, b)| a * b).sum();
        assert!(abs(lhs - rhs) < 1e-12 * lhs);
    }

    #[test]
    fn depth_limits() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        assert!(matches!(
            build_truncation(27, 0.1, &j),
            Err(Error::DepthTooLarge { .. })
        ));
        assert!(build_truncation(0, 0.1, &j).is_err());
        let t = build_truncation(2, 0.1, &j).unwrap();
        assert!(principal_eigen(&t, 0.0, 10).is_err());
    }

    #[test]
    fn variation_of_cylinder_vectors() {
        let v = variation(&[1.0, 2.0, 3.0, 5.0]);
        assert_eq!(v, alloc::vec![4.0, 3.0, 0.0]);
    }
}
