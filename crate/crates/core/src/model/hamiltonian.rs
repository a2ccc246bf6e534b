//! Finite-volume Hamiltonians.
//!
//! [`EnergyKernel`] precomputes, for every distance `d`, the bit mask of active
//! pairs `(p, p + d)` inside the volume, so that the pair energy of a packed
//! configuration costs one `popcount` per distance.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::boundary::BoundaryCondition;
use crate::model::config::{bit_spin, SpinConfig, Window, MAX_PACKED_SITES};
use crate::model::coupling::CouplingFamily;
use crate::model::mask::InteractionMask;

#[derive(Debug, Clone)]
struct DistanceShell {
    /// Bit `p` set when the pair `(p, p + d)` is active.
    mask: u64,
    active: u32,
    coupling: f64,
}

/// Pair structure of `H_Lambda` for a fixed volume, mask and boundary condition.
#[derive(Debug, Clone)]
pub struct EnergyKernel {
    volume: Window,
    shells: Vec<DistanceShell>,
    /// Boundary field `sum_j J(|i-j|) xi_j` per volume position.
    field: Vec<f64>,
    field_total: f64,
    /// Active partners `(position, J)` per volume position.
    partners: Vec<Vec<(usize, f64)>>,
}

impl EnergyKernel {
    pub fn new(
        volume: Window,
        mask: &InteractionMask,
        bc: &BoundaryCondition,
        couplings: &CouplingFamily,
    ) -> Result<Self> {
        let n = volume.len();
        if n > MAX_PACKED_SITES {
            return Err(Error::VolumeTooLarge {
                sites: n,
                limit: MAX_PACKED_SITES,
            });
        }
        bc.validate(&volume)?;
        let mut shells = Vec::with_capacity(n.saturating_sub(1));
        let mut partners = alloc::vec![Vec::new(); n];
        for d in 1..n {
            let coupling = couplings.j(d);
            let mut m = 0u64;
            for p in 0..n - d {
                let (a, b) = (volume.lo + p as i64, volume.lo + (p + d) as i64);
                if mask.is_active(a, b) && coupling != 0.0 {
                    m |= 1 << p;
                    partners[p].push((p + d, coupling));
                    partners[p + d].push((p, coupling));
                }
            }
            shells.push(DistanceShell {
                mask: m,
                active: m.count_ones(),
                coupling,
            });
        }
        let mut field = alloc::vec![0.0; n];
        if let Some(outer) = bc.outer() {
            for (p, slot) in field.iter_mut().enumerate() {
                let site = volume.lo + p as i64;
                let mut h = 0.0;
                for j in outer.sites().filter(|s| !volume.contains(*s)) {
                    if !mask.is_active(site, j) {
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
        }
        let field_total = field.iter().sum();
        Ok(EnergyKernel {
            volume,
            shells,
            field,
            field_total,
            partners,
        })
    }

    pub fn volume(&self) -> Window {
        self.volume
    }

    pub fn sites(&self) -> usize {
        self.volume.len()
    }

    /// `sum_{active pairs} J sigma_i sigma_j + sum_i h_i sigma_i`, so that `H = -beta * coupling_sum`.
    #[inline]
    pub fn coupling_sum(&self, bits: u64) -> f64 {
        let mut pair = 0.0;
        for (idx, shell) in self.shells.iter().enumerate() {
            if shell.active == 0 {
                continue;
            }
            let d = idx + 1;
            let disagree = ((bits ^ (bits >> d)) & shell.mask).count_ones();
            pair += shell.coupling * (shell.active as f64 - 2.0 * disagree as f64);
        }
        if self.field_total == 0.0 && self.field.iter().all(|h| *h == 0.0) {
            return pair;
        }
        let mut up = 0.0;
        let mut rest = bits;
        while rest != 0 {
            let p = rest.trailing_zeros() as usize;
            up += self.field[p];
            rest &= rest - 1;
        }
        pair + (2.0 * up - self.field_total)
    }

    /// Local field at position `p`: active partner spins plus the boundary field.
    pub fn local_field(&self, bits: u64, p: usize) -> f64 {
        let mut f = self.field[p];
        for &(q, j) in &self.partners[p] {
            f += j * bit_spin(bits, q) as f64;
        }
        f
    }

    pub fn boundary_field(&self) -> &[f64] {
        &self.field
    }

    pub fn partners(&self, p: usize) -> &[(usize, f64)] {
        &self.partners[p]
    }
}

/// Energy together with the bound on what the boundary truncation discarded.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Energy {
    pub value: f64,
    pub truncation_remainder: f64,
}

/// `H_Lambda = sum over active pairs {i, j} meeting the volume of -beta J(|i-j|) sigma_i sigma_j`.
pub fn hamiltonian(
    volume: Window,
    config: &SpinConfig,
    bc: &BoundaryCondition,
    mask: &InteractionMask,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<Energy> {
    if config.window() != volume {
        let w = config.window();
        return Err(Error::WindowMismatch {
            got_lo: w.lo,
            got_hi: w.hi,
            want_lo: volume.lo,
            want_hi: volume.hi,
        });
    }
    let kernel = EnergyKernel::new(volume, mask, bc, couplings)?;
    Ok(Energy {
        value: -beta * kernel.coupling_sum(config.bits()),
        truncation_remainder: bc.truncation_remainder(&volume, beta, couplings),
    })
}

/// `beta * sum_{n=1}^{depth} J(n) sigma_0 sigma_n` on a configuration starting at site 0.
pub fn potential_phi(
    config: &SpinConfig,
    depth: usize,
    beta: f64,
    couplings: &CouplingFamily,
) -> Result<f64> {
    let w = config.window();
    if w.lo != 0 {
        return Err(Error::param(
            "config",
            "half-line configurations start at site 0",
        ));
    }
    if depth == 0 || depth > w.len() - 1 {
        return Err(Error::DepthTooLarge {
            depth,
            available: w.len() - 1,
        });
    }
    let bits = config.bits();
    let s0 = bit_spin(bits, 0) as f64;
    let mut acc = 0.0;
    for n in 1..=depth {
        acc += couplings.j(n) * bit_spin(bits, n) as f64;
    }
    Ok(beta * s0 * acc)
}
