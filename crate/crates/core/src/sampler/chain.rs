use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::exp;
use crate::model::config::Window;
use crate::model::{BoundaryCondition, CouplingFamily, InteractionMask, LocalFunction, MaskMode};
use crate::sampler::stats::{batch_means, EstimateWithError};

/// Largest volume a chain accepts.
pub const MAX_CHAIN_SITES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum InitialState {
    #[default]
    AllPlus,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainOptions {
    /// Stream of the seeded generator; chains with distinct streams are independent.
    pub stream: u64,
    pub init: InitialState,
    /// Drop couplings beyond this distance.
    pub cutoff: Option<usize>,
    /// Recompute the cached fields from scratch every this many sweeps (0 disables).
    pub resync_sweeps: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            stream: 0,
            init: InitialState::AllPlus,
            cutoff: None,
            resync_sweeps: 100,
        }
    }
}

/// Random-site heat-bath chain for `exp(-H) / Z` on a finite volume.
#[derive(Debug, Clone)]
pub struct ChainState {
    volume: Window,
    beta: f64,
    mask: InteractionMask,
    spins: Vec<i8>,
    /// `sum_j J(|i-j|) sigma_j` over active in-volume partners.
    fields: Vec<f64>,
    /// Field from the boundary condition.
    boundary: Vec<f64>,
    /// `js[d] = J(d)` for `d <= reach` (`js[0] = 0`).
    js: Vec<f64>,
    reach: usize,
    cutoff_remainder: f64,
    magnetization: i64,
    /// `-(sum_{i<j} J sigma_i sigma_j + sum_i b_i sigma_i)`, without the factor beta.
    energy: f64,
    rng: ChaCha8Rng,
    seed: u64,
    steps: u64,
    resync_sweeps: u64,
}

/// A chain with default options.
pub fn new_chain(
    volume: Window,
    beta: f64,
    mask: &InteractionMask,
    bc: &BoundaryCondition,
    couplings: &CouplingFamily,
    seed: u64,
) -> Result<ChainState> {
    new_chain_with(
        volume,
        beta,
        mask,
        bc,
        couplings,
        seed,
        &ChainOptions::default(),
    )
}

pub fn new_chain_with(
    volume: Window,
    beta: f64,
    mask: &InteractionMask,
    bc: &BoundaryCondition,
    couplings: &CouplingFamily,
    seed: u64,
    options: &ChainOptions,
) -> Result<ChainState> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param(
            "beta",
            "inverse temperature must be finite and nonnegative",
        ));
    }
    let n = volume.len();
    if n > MAX_CHAIN_SITES {
        return Err(Error::VolumeTooLarge {
            sites: n,
            limit: MAX_CHAIN_SITES,
        });
    }
    bc.validate(&volume)?;
    let reach = match options.cutoff {
        Some(0) => return Err(Error::param("cutoff", "cutoff distance must be at least 1")),
        Some(c) => c.min(n - 1),
        None => n - 1,
    };
    let mut js = alloc::vec![0.0; reach + 1];
    for (d, slot) in js.iter_mut().enumerate().skip(1) {
        *slot = couplings.j(d);
        if !(*slot >= 0.0) {
            return Err(Error::NotFerromagnetic { distance: d });
        }
    }
    let cutoff_remainder = match options.cutoff {
        Some(c) => couplings.tail(c + 1).hi,
        None => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(options.stream);
    let spins: Vec<i8> = match options.init {
        InitialState::AllPlus => alloc::vec![1; n],
        InitialState::Random => (0..n)
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect(),
    };
    let mut chain = ChainState {
        volume,
        beta,
        mask: mask.clone(),
        spins,
        fields: alloc::vec![0.0; n],
        boundary: boundary_field(&volume, mask, bc, couplings, options.cutoff)?,
        js,
        reach,
        cutoff_remainder,
        magnetization: 0,
        energy: 0.0,
        rng,
        seed,
        steps: 0,
        resync_sweeps: options.resync_sweeps,
    };
    chain.resync();
    Ok(chain)
}

fn boundary_field(
    volume: &Window,
    mask: &InteractionMask,
    bc: &BoundaryCondition,
    couplings: &CouplingFamily,
    cutoff: Option<usize>,
) -> Result<Vec<f64>> {
    let n = volume.len();
    let Some(outer) = bc.outer() else {
        return Ok(alloc::vec![0.0; n]);
    };
    let within = |d: u64| cutoff.is_none_or(|c| d as usize <= c);
    let mut out = alloc::vec![0.0; n];
    let uniform = match bc {
        BoundaryCondition::Plus { .. } => Some(1.0),
        BoundaryCondition::Minus { .. } => Some(-1.0),
        _ => None,
    };
    if let (Some(s), MaskMode::Full) = (uniform, mask.mode()) {
        // Prefix sums of J over distances reaching the outer window.
        let span = (outer.hi - outer.lo) as usize + 1;
        let mut prefix = alloc::vec![0.0; span + 1];
        for d in 1..=span {
            let j = if within(d as u64) {
                couplings.j(d)
            } else {
                0.0
            };
            prefix[d] = prefix[d - 1] + j;
        }
        for (p, slot) in out.iter_mut().enumerate() {
            let site = volume.lo + p as i64;
            let left = prefix[(site - outer.lo) as usize] - prefix[(site - volume.lo) as usize];
            let right = prefix[(outer.hi - site) as usize] - prefix[(volume.hi - site) as usize];
            *slot = s * (left + right);
        }
        return Ok(out);
    }
    for (p, slot) in out.iter_mut().enumerate() {
        let site = volume.lo + p as i64;
        let mut h = 0.0;
        for j in outer.sites().filter(|s| !volume.contains(*s)) {
            if !mask.is_active(site, j) || !within(site.abs_diff(j)) {
                continue;
            }
            let spin = bc.spin_at(j).ok_or(Error::SiteOutsideWindow {
                site: j,
                lo: outer.lo,
                hi: outer.hi,
            })?;
            h += couplings.j(site.abs_diff(j) as usize) * spin as f64;
        }
        *slot = h;
    }
    Ok(out)
}

impl ChainState {
    pub fn volume(&self) -> Window {
        self.volume
    }

    pub fn sites(&self) -> usize {
        self.spins.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Single-site updates performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Spin at a site of the volume.
    pub fn spin(&self, site: i64) -> Result<i8> {
        Ok(self.spins[self.volume.position(site)?])
    }

    pub fn magnetization(&self) -> i64 {
        self.magnetization
    }

    /// Energy without the factor beta.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `sum_{k > cutoff} J(k)` (zero without a cutoff).
    pub fn cutoff_remainder(&self) -> f64 {
        self.cutoff_remainder
    }

    /// Cached in-volume fields.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    fn active(&self, p: usize, q: usize) -> bool {
        matches!(self.mask.mode(), MaskMode::Full)
            || self
                .mask
                .is_active(self.volume.lo + p as i64, self.volume.lo + q as i64)
    }

    /// In-volume fields computed from scratch.
    pub fn recomputed_fields(&self) -> Vec<f64> {
        let n = self.sites();
        (0..n)
            .map(|p| {
                let lo = p.saturating_sub(self.reach);
                let hi = (p + self.reach).min(n - 1);
                let mut h = 0.0;
                for q in lo..=hi {
                    if q != p && self.active(p, q) {
                        h += self.js[p.abs_diff(q)] * self.spins[q] as f64;
                    }
                }
                h
            })
            .collect()
    }

    /// `max_i |cached - recomputed|`.
    pub fn max_field_drift(&self) -> f64 {
        self.recomputed_fields()
            .iter()
            .zip(&self.fields)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Replaces the cached fields, magnetization and energy by fresh values.
    pub fn resync(&mut self) {
        self.fields = self.recomputed_fields();
        self.magnetization = self.spins.iter().map(|s| *s as i64).sum();
        let mut e = 0.0;
        for (p, s) in self.spins.iter().enumerate() {
            e -= (0.5 * self.fields[p] + self.boundary[p]) * *s as f64;
        }
        self.energy = e;
    }

    /// Overwrites the configuration (positions in volume order) and resyncs.
    pub fn set_spins(&mut self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.sites() || spins.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::param("spins", "expected one +1/-1 entry per site"));
        }
        self.spins.copy_from_slice(spins);
        self.resync();
        Ok(())
    }

    /// Total local field at a position, boundary included.
    pub fn local_field(&self, p: usize) -> f64 {
        self.fields[p] + self.boundary[p]
    }

    /// Heat-bath probability that an update at `p` flips the spin: `1 / (1 + exp(2 beta sigma_p F_p))`.
    pub fn flip_probability(&self, p: usize) -> f64 {
        1.0 / (1.0 + exp(2.0 * self.beta * self.spins[p] as f64 * self.local_field(p)))
    }

    /// Heat-bath update at position `p`. Returns whether the spin changed.
    pub fn update_site(&mut self, p: usize) -> bool {
        let up = 1.0 / (1.0 + exp(-2.0 * self.beta * self.local_field(p)));
        let new: i8 = if self.rng.random::<f64>() < up { 1 } else { -1 };
        self.steps += 1;
        if new == self.spins[p] {
            return false;
        }
        let old = self.spins[p];
        self.energy += 2.0 * old as f64 * self.local_field(p);
        self.spins[p] = new;
        self.magnetization += 2 * new as i64;
        let delta = 2.0 * new as f64;
        let n = self.sites();
        let lo = p.saturating_sub(self.reach);
        let hi = (p + self.reach).min(n - 1);
        if matches!(self.mask.mode(), MaskMode::Full) {
            for q in lo..p {
                self.fields[q] += delta * self.js[p - q];
            }
            for q in p + 1..=hi {
                self.fields[q] += delta * self.js[q - p];
            }
        } else {
            for q in lo..=hi {
                if q != p && self.active(p, q) {
                    self.fields[q] += delta * self.js[p.abs_diff(q)];
                }
            }
        }
        true
    }

    /// One update at a uniformly chosen site.
    pub fn step(&mut self) -> bool {
        let p = self.rng.random_range(0..self.sites());
        self.update_site(p)
    }

    /// `count * n` random-site updates.
    pub fn sweep(&mut self, count: u64) {
        let n = self.sites() as u64;
        for _ in 0..count {
            for _ in 0..n {
                self.step();
            }
            if self.resync_sweeps > 0 && (self.steps / n).is_multiple_of(self.resync_sweeps) {
                self.resync();
            }
        }
    }

    /// Runs `burnin` sweeps, then records `observable` after each of `sweeps` sweeps.
    pub fn record(
        &mut self,
        burnin: u64,
        sweeps: u64,
        mut observable: impl FnMut(&ChainState) -> f64,
    ) -> Vec<f64> {
        self.sweep(burnin);
        let mut out = Vec::with_capacity(sweeps as usize);
        for _ in 0..sweeps {
            self.sweep(1);
            out.push(observable(self));
        }
        out
    }

    /// Batch-means estimate of an observable; flags a burn-in shorter than ten autocorrelation times.
    pub fn estimate(
        &mut self,
        burnin: u64,
        sweeps: u64,
        observable: impl FnMut(&ChainState) -> f64,
    ) -> Result<EstimateWithError> {
        let series = self.record(burnin, sweeps, observable);
        let mut e = batch_means(&series)?;
        if (burnin as f64) < 10.0 * e.autocorrelation_time {
            e.warning = true;
        }
        Ok(e)
    }

    /// `sum_i sigma_mid sigma_i` with `mid = n / 2`, the estimator of the correlation sum.
    pub fn centered_correlation_sample(&self) -> f64 {
        (self.spins[self.sites() / 2] as i64 * self.magnetization) as f64
    }

    /// Value of a local function at the current configuration.
    pub fn eval(&self, f: &LocalFunction) -> Result<f64> {
        let mut spins = Vec::with_capacity(f.domain().len());
        for &s in f.domain() {
            spins.push(self.spin(s)?);
        }
        Ok(f.eval_spins(&spins))
    }
}

/// Batch-means estimate of `sum_i <sigma_mid sigma_i>`.
pub fn susceptibility_mc(
    chain: &mut ChainState,
    burnin: u64,
    sweeps: u64,
) -> Result<EstimateWithError> {
    chain.estimate(burnin, sweeps, ChainState::centered_correlation_sample)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailEstimate {
    pub t: f64,
    /// Estimate of `P(F - E F >= t)`.
    pub probability: EstimateWithError,
}

/// Empirical tails of `F - mean(F)` over `samples` sweeps, after `burnin` sweeps.
pub fn empirical_tail(
    chain: &mut ChainState,
    f: &LocalFunction,
    t_grid: &[f64],
    burnin: u64,
    samples: u64,
) -> Result<Vec<TailEstimate>> {
    for &s in f.domain() {
        chain.volume.position(s)?;
    }
    let values = chain.record(burnin, samples, |c| c.eval(f).unwrap_or(f64::NAN));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let ind: Vec<f64> = values
                .iter()
                .map(|v| if v - mean >= t { 1.0 } else { 0.0 })
                .collect();
            Ok(TailEstimate {
                t,
                probability: batch_means(&ind)?,
            })
        })
        .collect()
}
