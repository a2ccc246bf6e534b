use crate::error::{Error, Result};
use crate::math::Interval;
use crate::model::config::{SpinConfig, Window};
use crate::model::coupling::CouplingFamily;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum BoundaryCondition {
    Free,
    /// All spins `+1` on `outer` minus the volume.
    Plus {
        outer: Window,
    },
    /// All spins `-1` on `outer` minus the volume.
    Minus {
        outer: Window,
    },
    /// Spins read from `config` on its window minus the volume.
    Fixed {
        config: SpinConfig,
    },
}

impl BoundaryCondition {
    pub fn outer(&self) -> Option<Window> {
        match self {
            BoundaryCondition::Free => None,
            BoundaryCondition::Plus { outer } | BoundaryCondition::Minus { outer } => Some(*outer),
            BoundaryCondition::Fixed { config } => Some(config.window()),
        }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, BoundaryCondition::Free)
    }

    /// Spin imposed at an outside site, or `None` if the site is not covered.
    pub fn spin_at(&self, site: i64) -> Option<i8> {
        match self {
            BoundaryCondition::Free => None,
            BoundaryCondition::Plus { outer } => outer.contains(site).then_some(1),
            BoundaryCondition::Minus { outer } => outer.contains(site).then_some(-1),
            BoundaryCondition::Fixed { config } => config.spin(site).ok(),
        }
    }

    pub fn validate(&self, volume: &Window) -> Result<()> {
        match self.outer() {
            Some(outer) if !outer.contains_window(volume) => Err(Error::param(
                "boundary",
                alloc::format!(
                    "boundary window [{}, {}] does not cover the volume [{}, {}]",
                    outer.lo,
                    outer.hi,
                    volume.lo,
                    volume.hi
                ),
            )),
            _ => Ok(()),
        }
    }

    /// Upper bound on `beta * sum_{i in volume} sum_{j beyond the outer window} J(|i-j|)`,
    /// i.e. the energy discarded by truncating the boundary to its declared window.
    pub fn truncation_remainder(
        &self,
        volume: &Window,
        beta: f64,
        couplings: &CouplingFamily,
    ) -> f64 {
        let Some(outer) = self.outer() else {
            return 0.0;
        };
        let mut total = Interval::ZERO;
        for site in volume.sites() {
            let left = (site - outer.lo + 1) as usize;
            let right = (outer.hi - site + 1) as usize;
            total = total + couplings.tail(left) + couplings.tail(right);
        }
        beta * total.hi
    }
}
