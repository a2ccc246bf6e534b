//! Entropy and Dirichlet functionals, flip densities and the log-Sobolev search.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gibbs::measure::ExactMeasure;
use crate::math::{exp, sqrt, xlogx};
use crate::model::config::bit_spin;
use crate::model::{DenseMatrix, LocalFunction};

/// Largest volume accepted by [`lsi_constant_search`].
pub const LSI_SEARCH_MAX_SITES: usize = 6;

/// `Ent(f^2) = int f^2 log f^2 - (int f^2) log int f^2`, with `0 log 0 = 0`.
///
/// Evaluated as `S int phi(f^2 / S)` with `S = int f^2` and `phi(u) = u log u - u + 1 >= 0`,
/// which avoids the cancellation of the textbook form for nearly constant `f`.
pub fn entropy_of_square(m: &ExactMeasure, f: &[f64]) -> f64 {
    let s = m.integrate_table_by(|x| f[x] * f[x]);
    if !(s > 0.0) {
        return 0.0;
    }
    s * m.integrate_table_by(|x| relative_entropy_density(f[x] * f[x] / s))
}

/// `phi(u) = u log u - u + 1`, by its Taylor series near `u = 1`.
fn relative_entropy_density(u: f64) -> f64 {
    let d = u - 1.0;
    if crate::math::abs(d) < 1e-2 {
        // sum_{k>=2} (-1)^k d^k / (k (k - 1))
        let mut term = d * d;
        let mut acc = 0.0;
        for k in 2..12 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / (k * (k - 1)) as f64;
            term *= d;
        }
        acc
    } else {
        xlogx(u) - d
    }
}

/// Smallest relative spread `max |f^2 / int f^2 - 1|` accepted by the search; below it the
/// ratio is dominated by rounding.
const MIN_SPREAD: f64 = 1e-4;
const MAX_ASCENT_SWEEPS: usize = 400;

fn spread(m: &ExactMeasure, f: &[f64]) -> f64 {
    let s = m.integrate_table_by(|x| f[x] * f[x]);
    f.iter()
        .map(|v| crate::math::abs(v * v / s - 1.0))
        .fold(0.0, f64::max)
}

/// `int sum_{i in volume} (f(omega) - f(omega^(i)))^2 dm`.
pub fn dirichlet_form(m: &ExactMeasure, f: &[f64]) -> f64 {
    let n = m.sites();
    m.integrate_table_by(|x| {
        let mut acc = 0.0;
        for i in 0..n {
            let d = f[x] - f[x ^ (1 << i)];
            acc += d * d;
        }
        acc
    })
}

/// Values of a local function on every configuration of the measure's volume.
pub fn tabulate(m: &ExactMeasure, f: &LocalFunction) -> Result<Vec<f64>> {
    Ok(f.bind(&m.volume())?.tabulate(m.sites()))
}

pub fn entropy_functional(m: &ExactMeasure, f: &LocalFunction) -> Result<f64> {
    Ok(entropy_of_square(m, &tabulate(m, f)?))
}

pub fn dirichlet(m: &ExactMeasure, f: &LocalFunction) -> Result<f64> {
    Ok(dirichlet_form(m, &tabulate(m, f)?))
}

/// `Ent(f^2) / (2 Dirichlet(f))`, or `None` when the Dirichlet form vanishes.
pub fn lsi_ratio(m: &ExactMeasure, f: &[f64]) -> Option<f64> {
    let d = dirichlet_form(m, f);
    if !(d > 0.0) {
        return None;
    }
    Some(entropy_of_square(m, f) / (2.0 * d))
}

/// Density of the pushforward of `m` under the flip at `site`: `p(omega^(i)) / p(omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlipDensity {
    pub site: i64,
    pub values: Vec<f64>,
    /// `exp(H_{i}(omega) - H_{i}(omega^(i)))` from the local field, when the measure has a Hamiltonian.
    pub analytic: Option<Vec<f64>>,
}

impl FlipDensity {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest entrywise gap between the table and its analytic form.
    pub fn analytic_gap(&self) -> Option<f64> {
        self.analytic.as_ref().map(|a| {
            a.iter()
                .zip(&self.values)
                .map(|(x, y)| crate::math::abs(x - y) / x.max(1.0))
                .fold(0.0, f64::max)
        })
    }
}

pub fn pushforward_flip_density(m: &ExactMeasure, site: i64) -> Result<FlipDensity> {
    let p = m.volume().position(site)?;
    let bit = 1u64 << p;
    let probs = m.probabilities();
    let values = (0..probs.len())
        .map(|x| probs[x ^ bit as usize] / probs[x])
        .collect();
    let analytic = m.kernel().map(|k| {
        (0..probs.len() as u64)
            .map(|x| exp(-2.0 * m.beta() * bit_spin(x, p) as f64 * k.local_field(x, p)))
            .collect()
    });
    Ok(FlipDensity {
        site,
        values,
        analytic,
    })
}

/// Result of the log-Sobolev constant search.
#[derive(Debug, Clone)]
pub struct LsiSearch {
    /// Best ratio `Ent(f^2) / (2 Dirichlet(f))` found: a lower bound on the optimal constant.
    pub lower_bound: f64,
    /// Poincare ratio `Var(g) / Dirichlet(g)` of the best linearized direction.
    pub poincare_ratio: f64,
    pub witness: LocalFunction,
    pub trials: usize,
}

/// Maximizes `Ent(f^2) / (2 Dirichlet(f))` over positive tables.
///
/// Starts from the Poincare direction `1 + eps g` and from `trials` random tables, and
/// improves each by coordinate ascent with shrinking multiplicative steps.
pub fn lsi_constant_search(m: &ExactMeasure, trials: usize, seed: u64) -> Result<LsiSearch> {
    let n = m.sites();
    if n > LSI_SEARCH_MAX_SITES {
        return Err(Error::VolumeTooLarge {
            sites: n,
            limit: LSI_SEARCH_MAX_SITES,
        });
    }
    let size = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (poincare_ratio, direction) = poincare_direction(m)?;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for eps in [1e-2, 0.3, 1.0] {
        let scale = eps
            / direction
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                .max(1e-300);
        starts.push(
            direction
                .iter()
                .map(|g| (1.0 + scale * g).max(0.0))
                .collect(),
        );
    }
    for t in 0..trials {
        let f: Vec<f64> = match t % 3 {
            0 => (0..size).map(|_| rng.random_range(0.0..2.0)).collect(),
            1 => (0..size)
                .map(|_| exp(rng.random_range(-3.0..3.0)))
                .collect(),
            _ => {
                let mut f = alloc::vec![1e-3; size];
                f[rng.random_range(0..size)] = 1.0;
                f
            }
        };
        starts.push(f);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for f in starts {
        if let Some((r, f)) = coordinate_ascent(m, f) {
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, f));
            }
        }
    }
    let (lower_bound, table) = best.ok_or(Error::DegenerateFamily)?;
    let witness = LocalFunction::from_table(m.volume().sites().collect(), table)?;
    Ok(LsiSearch {
        lower_bound,
        poincare_ratio,
        witness,
        trials,
    })
}

fn coordinate_ascent(m: &ExactMeasure, mut f: Vec<f64>) -> Option<(f64, Vec<f64>)> {
    if spread(m, &f) < MIN_SPREAD {
        return None;
    }
    let mut r = lsi_ratio(m, &f)?;
    let mut step = 0.5;
    let mut sweeps = 0;
    while step > 1e-6 && sweeps < MAX_ASCENT_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for x in 0..f.len() {
            let old = f[x];
            for cand in [old * (1.0 + step), old * (1.0 - step), old + step * 0.1] {
                f[x] = cand;
                match lsi_ratio(m, &f) {
                    Some(v) if v > r * (1.0 + 1e-9) && spread(m, &f) >= MIN_SPREAD => {
                        r = v;
                        improved = true;
                        break;
                    }
                    _ => f[x] = old,
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Some((r, f))
}

/// Largest `Var(g) / Dirichlet(g)` and its maximizer, from the spectrum of
/// `P^{-1/2} L P^{-1/2}` where `L` is the Dirichlet form matrix and `P = diag(p)`.
pub fn poincare_direction(m: &ExactMeasure) -> Result<(f64, Vec<f64>)> {
    let n = m.sites();
    let size = 1usize << n;
    let p = m.probabilities();
    let mut l = DenseMatrix::zeros(size);
    for x in 0..size {
        for i in 0..n {
            let y = x ^ (1 << i);
            // sum_x p(x) (g(x) - g(y))^2 counts each unordered edge from both ends.
            let w = p[x];
            l.set(x, x, l.get(x, x) + w);
            l.set(y, y, l.get(y, y) + w);
            l.set(x, y, l.get(x, y) - w);
            l.set(y, x, l.get(y, x) - w);
        }
    }
    let mut s = DenseMatrix::zeros(size);
    for x in 0..size {
        for y in 0..size {
            s.set(x, y, l.get(x, y) / sqrt(p[x] * p[y]));
        }
    }
    let (vals, vecs) = s.symmetric_eigen()?;
    // vals[0] = 0 belongs to sqrt(p), i.e. constants.
    if size < 2 || !(vals[1] > 0.0) {
        return Err(Error::DegenerateFamily);
    }
    let g = (0..size).map(|x| vecs.get(x, 1) / sqrt(p[x])).collect();
    Ok((1.0 / vals[1], g))
}

impl ExactMeasure {
    /// `sum_x p(x) g(x)` for index-based integrands.
    pub fn integrate_table_by(&self, g: impl Fn(usize) -> f64) -> f64 {
        self.integrate(|x| g(x as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::boltzmann;
    use crate::math::{abs, ln};
    use crate::model::{BoundaryCondition, CouplingFamily, InteractionMask, Window};

    fn measure(n: usize, beta: f64) -> ExactMeasure {
        let j = CouplingFamily::power_law(2.0).unwrap();
        boltzmann(
            Window::from_origin(n),
            beta,
            &InteractionMask::full(),
            &BoundaryCondition::Free,
            &j,
        )
        .unwrap()
    }

    #[test]
    fn constant_function_has_zero_functionals() {
        let m = measure(3, 0.4);
        let f = alloc::vec![2.0; 8];
        assert!(abs(entropy_of_square(&m, &f)) < 1e-14);
        assert_eq!(dirichlet_form(&m, &f), 0.0);
        assert_eq!(lsi_ratio(&m, &f), None);
    }

    #[test]
    fn indicator_entropy_on_two_points() {
        let m = measure(1, 0.0);
        let f = LocalFunction::from_table(alloc::vec![0], alloc::vec![0.0, 1.0]).unwrap();
        let ent = entropy_functional(&m, &f).unwrap();
        assert!(abs(ent - ln(2.0) / 2.0) < 1e-15);
    }

    #[test]
    fn two_point_search_matches_grid() {
        let m = measure(1, 0.0);
        let s = lsi_constant_search(&m, 10, 7).unwrap();
        // Dense grid over (a, 1): the supremum 1/4 is approached as a -> 1.
        let mut grid = 0.0f64;
        for k in 0..2000 {
            let a = k as f64 / 1000.0;
            if let Some(r) = lsi_ratio(&m, &[a, 1.0]) {
                grid = grid.max(r);
            }
        }
        assert!(
            s.lower_bound >= 0.2 && s.lower_bound <= 0.25 + 1e-9,
            "{}",
            s.lower_bound
        );
        assert!(s.lower_bound >= grid - 1e-6);
        assert!(abs(s.poincare_ratio - 0.25) < 1e-12);
        assert!(dirichlet(&m, &s.witness).unwrap() > 0.0);
    }

    #[test]
    fn flip_density_matches_analytic_form() {
        let j = CouplingFamily::power_law(1.5).unwrap();
        let bc = BoundaryCondition::Plus {
            outer: Window::new(-3, 5).unwrap(),
        };
        let m = boltzmann(
            Window::new(0, 3).unwrap(),
            0.7,
            &InteractionMask::full(),
            &bc,
            &j,
        )
        .unwrap();
        for site in 0..4 {
            let d = pushforward_flip_density(&m, site).unwrap();
            assert!(d.analytic_gap().unwrap() < 1e-12);
            assert!(abs(m.integrate_table(&d.values) - 1.0) < 1e-12);
        }
        let uniform = measure(3, 0.0);
        assert!(pushforward_flip_density(&uniform, 1)
            .unwrap()
            .values
            .iter()
            .all(|v| *v == 1.0));
    }
}
