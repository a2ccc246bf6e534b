//! TOML configuration with `[model]`, `[exact]`, `[transfer]`, `[sampler]`,
//! `[concentration]` and `[output]` sections. Every key is optional and unknown
//! keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub model: ModelSection,
    pub exact: ExactSection,
    pub transfer: TransferSection,
    pub sampler: SamplerSection,
    pub concentration: ConcentrationSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ModelSection {
    pub alpha: Option<f64>,
    /// Coupling table file; overrides `alpha`.
    pub couplings: Option<PathBuf>,
    pub beta: Option<f64>,
    /// `full`, `half-line-right`, `half-line-left` or `intermediate`.
    pub mask: Option<String>,
    /// Index for the intermediate mask.
    pub k: Option<usize>,
    /// `free`, `plus` or `minus`.
    pub boundary: Option<String>,
    /// Sites on each side covered by a plus or minus boundary.
    pub boundary_width: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ExactSection {
    pub n: Option<usize>,
    pub beta_grid: Option<String>,
    pub enumeration_limit: Option<usize>,
    pub cache: Option<bool>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct TransferSection {
    pub depths: Option<String>,
    pub depth: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub density_n: Option<usize>,
    pub left_window: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct SamplerSection {
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub burnin: Option<usize>,
    pub sweeps: Option<usize>,
    pub chains: Option<usize>,
    pub cutoff: Option<usize>,
    pub stream_csv: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ConcentrationSection {
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub moments: Option<Vec<u32>>,
    pub constant: Option<f64>,
    pub chi: Option<f64>,
    pub search_trials: Option<usize>,
    pub lambdas: Option<String>,
    pub ns: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub csv: Option<bool>,
    pub gnuplot: Option<bool>,
    pub threads: Option<usize>,
}

impl Config {
    pub fn parse(text: &str, path: &Path) -> LabResult<Config> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            LabError::Config {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> LabResult<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
        Config::parse(&text, path)
    }
}

/// One-based line containing byte `offset`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|b| *b == b'\n')
        .count()
        + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(
            Config::parse("", Path::new("c.toml")).unwrap(),
            Config::default()
        );
    }

    #[test]
    fn sections_parse() {
        let c = Config::parse(
            "[model]\nalpha = 1.5\nbeta = 0.2\n[sampler]\nseed = 7\n",
            Path::new("c.toml"),
        )
        .unwrap();
        assert_eq!(c.model.alpha, Some(1.5));
        assert_eq!(c.sampler.seed, Some(7));
    }

    #[test]
    fn unknown_key_reports_line() {
        let e = Config::parse("[model]\nalpha = 2\ngamma = 1\n", Path::new("c.toml")).unwrap_err();
        match e {
            LabError::Config { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("gamma"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_number_reports_line() {
        let e = Config::parse("[model]\n\nbeta = 0.3.1\n", Path::new("c.toml")).unwrap_err();
        assert!(matches!(e, LabError::Config { line: 3, .. }), "{e:?}");
        assert_eq!(e.exit_code(), 2);
    }
}
