//! Coupling matrices and the conditions under which a symmetric matrix defines
//! a ferromagnetic Ising measure with a log-Sobolev inequality.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};
use crate::model::config::Window;
use crate::model::coupling::CouplingFamily;
use crate::model::mask::InteractionMask;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: alloc::vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::param("matrix", "rows must form a square matrix"));
        }
        Ok(DenseMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `sup_j sum_i |A_ij|`.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `(u, A u)`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            let mut r = 0.0;
            for j in 0..self.n {
                r += self.get(i, j) * u[j];
            }
            acc += u[i] * r;
        }
        acc
    }

    /// First index pair violating symmetry beyond `tol`.
    pub fn asymmetry(&self, tol: f64) -> Option<(usize, usize, f64)> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let gap = abs(self.get(i, j) - self.get(j, i));
                if gap > tol {
                    return Some((i, j, gap));
                }
            }
        }
        None
    }

    /// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
    pub fn symmetric_eigenvalues(&self) -> Result<Vec<f64>> {
        if let Some((i, j, gap)) = self.asymmetry(1e-12 * (1.0 + self.max_abs_row_sum())) {
            return Err(Error::NotSymmetric { i, j, gap });
        }
        let (vals, _) = jacobi(self.clone(), false);
        Ok(vals)
    }

    /// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
    pub fn symmetric_eigen(&self) -> Result<(Vec<f64>, DenseMatrix)> {
        if let Some((i, j, gap)) = self.asymmetry(1e-12 * (1.0 + self.max_abs_row_sum())) {
            return Err(Error::NotSymmetric { i, j, gap });
        }
        let (vals, vecs) = jacobi(self.clone(), true);
        Ok((vals, vecs.expect("vectors requested")))
    }
}

fn jacobi(mut a: DenseMatrix, want_vectors: bool) -> (Vec<f64>, Option<DenseMatrix>) {
    let n = a.n;
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a.get(i, i) * a.get(i, i);
            for j in i + 1..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off <= 1e-32 * (diag + off) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (abs(theta) + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a.get(x, x).total_cmp(&a.get(y, y)));
    let vals = order.iter().map(|&i| a.get(i, i)).collect();
    let vecs = v.map(|v| {
        let mut out = DenseMatrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                out.set(k, col, v.get(k, src));
            }
        }
        out
    });
    (vals, vecs)
}

/// `A_ij = -J(|i-j|)` for active pairs of the volume, zero otherwise (zero diagonal).
pub fn coupling_matrix(
    volume: Window,
    mask: &InteractionMask,
    couplings: &CouplingFamily,
) -> DenseMatrix {
    let n = volume.len();
    let mut m = DenseMatrix::zeros(n);
    for a in 0..n {
        for b in a + 1..n {
            let (i, j) = (volume.lo + a as i64, volume.lo + b as i64);
            if mask.is_active(i, j) {
                let v = -couplings.j(b - a);
                m.set(a, b, v);
                m.set(b, a, v);
            }
        }
    }
    m
}

/// `(A + kappa I) / (2 kappa)`; requires `kappa` at least the largest absolute row sum.
pub fn rescale_bd(matrix: &DenseMatrix, kappa: f64) -> Result<DenseMatrix> {
    let row_sum = matrix.max_abs_row_sum();
    if !(kappa > 0.0) || kappa < row_sum {
        return Err(Error::KappaTooSmall { kappa, row_sum });
    }
    let mut out = matrix.clone();
    for i in 0..out.n {
        for j in 0..out.n {
            let diag = if i == j { kappa } else { 0.0 };
            out.set(i, j, (matrix.get(i, j) + diag) / (2.0 * kappa));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BdReport {
    pub symmetric: bool,
    pub off_diagonal_nonpositive: bool,
    pub smallest_eigenvalue: f64,
    pub spectral_radius: f64,
    /// Symmetric with nonpositive off-diagonal entries.
    pub c1: bool,
    /// Positive definite.
    pub c2: bool,
    /// Spectral radius at most one.
    pub c3: bool,
}

impl BdReport {
    pub fn all(&self) -> bool {
        self.c1 && self.c2 && self.c3
    }
}

/// Checks symmetry, off-diagonal signs, positive definiteness and the spectral radius bound.
pub fn check_bd_conditions(matrix: &DenseMatrix) -> Result<BdReport> {
    let eig = matrix.symmetric_eigenvalues()?;
    let n = matrix.dim();
    let mut off_ok = true;
    for i in 0..n {
        for j in 0..n {
            if i != j && matrix.get(i, j) > 0.0 {
                off_ok = false;
            }
        }
    }
    let smallest = eig.first().copied().unwrap_or(0.0);
    let largest = eig.last().copied().unwrap_or(0.0);
    let radius = abs(smallest).max(abs(largest));
    // Jacobi eigenvalues are accurate to a few ulps of the matrix norm.
    let slack = 64.0 * f64::EPSILON * (1.0 + matrix.max_abs_row_sum());
    Ok(BdReport {
        symmetric: true,
        off_diagonal_nonpositive: off_ok,
        smallest_eigenvalue: smallest,
        spectral_radius: radius,
        c1: off_ok,
        c2: n > 0 && smallest > 0.0,
        c3: radius <= 1.0 + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_coupling_matrix() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let m = coupling_matrix(Window::new(0, 1).unwrap(), &InteractionMask::full(), &j);
        assert_eq!(m.get(0, 1), -1.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn cut_mask_zeroes_cross_entries() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let w = Window::symmetric(2);
        let m = coupling_matrix(w, &InteractionMask::intermediate(0), &j);
        for a in 0..5 {
            for b in 0..5 {
                let (i, k) = (w.lo + a as i64, w.lo + b as i64);
                if (i < 0) != (k < 0) {
                    assert_eq!(m.get(a, b), 0.0);
                }
            }
        }
        assert_eq!(m.get(0, 1), -1.0);
    }

    #[test]
    fn jacobi_two_by_two() {
        let m = DenseMatrix::from_rows(&[alloc::vec![2.0, 1.0], alloc::vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = m.symmetric_eigen().unwrap();
        assert!(abs(vals[0] - 1.0) < 1e-14 && abs(vals[1] - 3.0) < 1e-14);
        assert!(abs(abs(vecs.get(0, 0)) - core::f64::consts::FRAC_1_SQRT_2) < 1e-14);
    }

    #[test]
    fn non_symmetric_is_rejected() {
        let m = DenseMatrix::from_rows(&[alloc::vec![0.0, 1.0], alloc::vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            check_bd_conditions(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn small_kappa_is_rejected() {
        let j = CouplingFamily::power_law(2.0).unwrap();
        let m = coupling_matrix(Window::symmetric(3), &InteractionMask::full(), &j);
        assert!(matches!(
            rescale_bd(&m, 0.5),
            Err(Error::KappaTooSmall { .. })
        ));
    }

    #[test]
    fn rescaled_matrices_satisfy_conditions() {
        for alpha in [1.2, 1.5, 2.0, 3.0] {
            let j = CouplingFamily::power_law(alpha).unwrap();
            let kappa = j.kappa().hi;
            for n in 1..=12usize {
                let w = Window::new(-(n as i64) / 2, (n as i64 + 1) / 2 - 1).unwrap();
                for mask in [
                    InteractionMask::full(),
                    InteractionMask::intermediate(0),
                    InteractionMask::intermediate(n),
                ] {
                    let r = rescale_bd(&coupling_matrix(w, &mask, &j), kappa).unwrap();
                    let rep = check_bd_conditions(&r).unwrap();
                    assert!(rep.all(), "alpha={alpha} n={n} {rep:?}");
                }
            }
        }
    }
}
