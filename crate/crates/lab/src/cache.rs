//! Exact measures stored under `<out>/cache`, keyed by a digest of their parameters.
//!
//! Each entry is a `DYEX` dump of the probability table plus a JSON sidecar with the
//! window, mask, boundary and log-partition function. Reloaded measures are
//! bit-identical to freshly enumerated ones.

use std::fs;
use std::path::PathBuf;

use dyson_core::gibbs::{boltzmann, ExactMeasure};
use dyson_core::model::{BoundaryCondition, CouplingFamily, InteractionMask, Window};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::formats::Dump;
use crate::output::{sha256_hex, CacheUse, Params};

/// Volumes below this size are cheaper to enumerate than to load.
pub const MIN_CACHED_SITES: usize = 12;

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    volume: Window,
    beta: f64,
    mask: InteractionMask,
    boundary: BoundaryCondition,
    couplings: CouplingFamily,
    log_partition: f64,
    truncation_remainder: f64,
}

#[derive(Debug, Clone)]
pub struct MeasureCache {
    dir: Option<PathBuf>,
}

impl MeasureCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        MeasureCache { dir }
    }

    pub fn disabled() -> Self {
        MeasureCache { dir: None }
    }

    pub fn measure(
        &self,
        params: &mut Params,
        volume: Window,
        beta: f64,
        mask: &InteractionMask,
        bc: &BoundaryCondition,
        couplings: &CouplingFamily,
    ) -> LabResult<ExactMeasure> {
        let dir = match &self.dir {
            Some(d) if volume.len() >= MIN_CACHED_SITES => d,
            _ => return Ok(boltzmann(volume, beta, mask, bc, couplings)?),
        };
        let key_doc = serde_json::json!({
            "volume": volume,
            "beta_bits": beta.to_bits(),
            "mask": mask,
            "boundary": bc,
            "couplings": couplings,
        });
        let key = sha256_hex(key_doc.to_string().as_bytes());
        let dump_path = dir.join(format!("{key}.dyex"));
        let side_path = dir.join(format!("{key}.json"));
        if let (Ok(bytes), Ok(side)) = (fs::read(&dump_path), fs::read(&side_path)) {
            if let (Ok(dump), Ok(side)) = (
                Dump::from_bytes(&bytes),
                serde_json::from_slice::<Sidecar>(&side),
            ) {
                if side.volume == volume
                    && side.beta.to_bits() == beta.to_bits()
                    && dump.n as usize == volume.len()
                {
                    let m = ExactMeasure::from_stored(
                        volume,
                        beta,
                        side.mask,
                        side.boundary,
                        dump.values,
                        side.log_partition,
                        side.truncation_remainder,
                    )?;
                    params.cache.push(CacheUse { key, hit: true });
                    return Ok(m);
                }
            }
        }
        let m = boltzmann(volume, beta, mask, bc, couplings)?;
        let side = Sidecar {
            volume,
            beta,
            mask: mask.clone(),
            boundary: bc.clone(),
            couplings: couplings.clone(),
            log_partition: m.log_partition(),
            truncation_remainder: m.truncation_remainder(),
        };
        let dump = Dump::new(volume.len(), beta, mask.id(), m.probabilities().to_vec())?;
        fs::create_dir_all(dir)
            .map_err(|e| LabError::io(format!("creating {}", dir.display()), e))?;
        // Write to temporaries and rename, so a concurrent reader never sees a partial entry.
        let side_bytes = serde_json::to_vec(&side).map_err(|e| LabError::Format(e.to_string()))?;
        for (path, bytes) in [(&dump_path, dump.to_bytes()), (&side_path, side_bytes)] {
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            fs::write(&tmp, bytes)
                .map_err(|e| LabError::io(format!("writing {}", tmp.display()), e))?;
            fs::rename(&tmp, path)
                .map_err(|e| LabError::io(format!("renaming {}", tmp.display()), e))?;
        }
        params.cache.push(CacheUse { key, hit: false });
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reload_is_bit_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = MeasureCache::new(Some(tmp.path().to_path_buf()));
        let j = CouplingFamily::power_law(2.0).unwrap();
        let w = Window::from_origin(MIN_CACHED_SITES);
        let mut p = Params::default();
        let a = cache
            .measure(
                &mut p,
                w,
                0.3,
                &InteractionMask::full(),
                &BoundaryCondition::Free,
                &j,
            )
            .unwrap();
        let b = cache
            .measure(
                &mut p,
                w,
                0.3,
                &InteractionMask::full(),
                &BoundaryCondition::Free,
                &j,
            )
            .unwrap();
        assert_eq!(a.probabilities(), b.probabilities());
        assert_eq!(a.log_partition(), b.log_partition());
        assert_eq!(
            p.cache.iter().map(|c| c.hit).collect::<Vec<_>>(),
            vec![false, true]
        );
        let c = cache
            .measure(
                &mut p,
                w,
                0.31,
                &InteractionMask::full(),
                &BoundaryCondition::Free,
                &j,
            )
            .unwrap();
        assert!(!p.cache[2].hit);
        assert_ne!(a.probabilities(), c.probabilities());
    }
}
