//! Subcommand implementations and the state they share.

mod concentration;
mod exact;
mod report;
mod transfer;

use std::path::PathBuf;

use dyson_core::gibbs::griffiths::straddling_window;
use dyson_core::model::{BoundaryCondition, CouplingFamily, InteractionMask, Window};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::cache::MeasureCache;
use crate::cli::{Command, MeasureArgs, ModelArgs};
use crate::config::Config;
use crate::error::{LabError, LabResult};
use crate::formats::{parse_coupling_table, parse_grid, parse_usize_grid};
use crate::output::{
    commit_run, now_rfc3339, sha256_hex, Artifacts, OutputRoot, Params, RunManifest, SCHEMA_VERSION,
};

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 0.3;
pub const DEFAULT_BOUNDARY_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Computation finished; nothing was verified.
    Ok,
    Pass,
    Fail,
}

impl Status {
    pub fn from_pass(pass: bool) -> Status {
        if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// What a command hands back: status, headline numbers, full data and console lines.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: Map<String, Value>,
    pub data: Value,
    pub lines: Vec<String>,
}

impl Outcome {
    pub fn new(status: Status, data: Value) -> Self {
        Outcome {
            status,
            summary: Map::new(),
            data,
            lines: Vec::new(),
        }
    }

    pub fn metric(mut self, key: &str, v: impl Serialize) -> Self {
        self.summary
            .insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }
}

pub struct Session {
    pub config: Config,
    pub params: Params,
    pub artifacts: Artifacts,
    pub cache: MeasureCache,
    pub out: OutputRoot,
    pub quiet: bool,
    started: String,
}

/// Couplings with the label used in records: the exponent, or `table:<digest>`.
pub struct Model {
    pub couplings: CouplingFamily,
    pub label: Value,
    pub beta: f64,
}

pub struct MeasureSetup {
    pub n: usize,
    pub volume: Window,
    pub mask: InteractionMask,
    pub bc: BoundaryCondition,
}

impl Session {
    pub fn new(config: Config, out: OutputRoot, use_cache: bool, quiet: bool) -> Self {
        let cache = if use_cache && config.exact.cache.unwrap_or(true) {
            MeasureCache::new(Some(out.cache()))
        } else {
            MeasureCache::disabled()
        };
        Session {
            config,
            params: Params::default(),
            artifacts: Artifacts::default(),
            cache,
            out,
            quiet,
            started: now_rfc3339(),
        }
    }

    pub fn csv_enabled(&self) -> bool {
        self.config.output.csv.unwrap_or(true)
    }

    pub fn gnuplot_enabled(&self) -> bool {
        self.config.output.gnuplot.unwrap_or(true)
    }

    /// Writes a table as CSV and as a gnuplot data file, as enabled.
    pub fn table(&mut self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> LabResult<()> {
        if self.csv_enabled() {
            self.artifacts.csv(&format!("{stem}.csv"), header, rows)?;
        }
        if self.gnuplot_enabled() {
            self.artifacts.dat(&format!("{stem}.dat"), header, rows);
        }
        Ok(())
    }

    /// Couplings from `--couplings`/`[model].couplings` or the power law, and beta.
    pub fn model(&mut self, args: &ModelArgs) -> LabResult<Model> {
        let cfg = self.config.model.clone();
        let table =
            self.params
                .pick_opt("couplings", args.couplings.clone(), cfg.couplings.clone());
        let beta = self.params.pick("beta", args.beta, cfg.beta, DEFAULT_BETA);
        check_beta(beta)?;
        let (couplings, label) = match table {
            Some(path) => {
                let bytes = std::fs::read(&path)
                    .map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
                let text = String::from_utf8(bytes.clone()).map_err(|_| LabError::Input {
                    path: path.clone(),
                    line: 0,
                    message: "not UTF-8 text".into(),
                })?;
                let family = parse_coupling_table(&text, &path)?;
                self.params.input_file(&path, &bytes);
                let id = format!("table:{}", &sha256_hex(&bytes)[..12]);
                self.params.set("coupling_table_id", &id);
                (family, Value::String(id))
            }
            None => {
                let alpha = self
                    .params
                    .pick("alpha", args.alpha, cfg.alpha, DEFAULT_ALPHA);
                (CouplingFamily::power_law(alpha)?, serde_json::json!(alpha))
            }
        };
        Ok(Model {
            couplings,
            label,
            beta,
        })
    }

    /// Volume, mask and boundary of an exact measure.
    pub fn measure_setup(
        &mut self,
        args: &MeasureArgs,
        default_n: usize,
    ) -> LabResult<MeasureSetup> {
        let cfg = self.config.model.clone();
        let n = self
            .params
            .pick("n", args.n, self.config.exact.n, default_n);
        if n == 0 {
            return Err(LabError::usage("--n must be at least 1"));
        }
        let limit = self
            .config
            .exact
            .enumeration_limit
            .unwrap_or(dyson_core::model::DEFAULT_ENUMERATION_LIMIT);
        if n > limit {
            return Err(dyson_core::Error::VolumeTooLarge { sites: n, limit }.into());
        }
        let volume = straddling_window(n);
        let mask_name = self.params.pick(
            "mask",
            args.mask.clone(),
            cfg.mask.clone(),
            "full".to_string(),
        );
        let mask = match mask_name.as_str() {
            "full" => InteractionMask::full(),
            "half-line-right" => InteractionMask::half_line_right(),
            "half-line-left" => InteractionMask::half_line_left(),
            "intermediate" => {
                let k = self
                    .params
                    .pick_opt("k", args.k, cfg.k)
                    .ok_or_else(|| LabError::usage("the intermediate mask needs --k"))?;
                InteractionMask::intermediate(k)
            }
            other => return Err(LabError::usage(format!(
                "unknown mask `{other}`; use full, half-line-right, half-line-left or intermediate"
            ))),
        };
        let bc_name = self.params.pick(
            "boundary",
            args.boundary.clone(),
            cfg.boundary.clone(),
            "free".to_string(),
        );
        let bc = match bc_name.as_str() {
            "free" => BoundaryCondition::Free,
            "plus" | "minus" => {
                let w = self.params.pick(
                    "boundary_width",
                    args.boundary_width,
                    cfg.boundary_width,
                    DEFAULT_BOUNDARY_WIDTH,
                );
                let outer = Window::new(volume.lo - w as i64, volume.hi + w as i64)?;
                if bc_name == "plus" {
                    BoundaryCondition::Plus { outer }
                } else {
                    BoundaryCondition::Minus { outer }
                }
            }
            other => {
                return Err(LabError::usage(format!(
                    "unknown boundary `{other}`; use free, plus or minus"
                )))
            }
        };
        Ok(MeasureSetup {
            n,
            volume,
            mask,
            bc,
        })
    }

    pub fn grid(
        &mut self,
        key: &str,
        flag: Option<String>,
        config: Option<String>,
        default: &str,
    ) -> LabResult<Vec<f64>> {
        let text = self.params.pick(key, flag, config, default.to_string());
        parse_grid(&text).map_err(|e| LabError::usage(format!("--{}: {e}", key.replace('_', "-"))))
    }

    pub fn usize_grid(
        &mut self,
        key: &str,
        flag: Option<String>,
        config: Option<String>,
        default: &str,
    ) -> LabResult<Vec<usize>> {
        let text = self.params.pick(key, flag, config, default.to_string());
        parse_usize_grid(&text)
            .map_err(|e| LabError::usage(format!("--{}: {e}", key.replace('_', "-"))))
    }

    /// Adds `result.json`, writes the run directory and its manifest.
    pub fn commit(
        &mut self,
        command: &Command,
        argv: &[String],
        outcome: &Outcome,
    ) -> LabResult<(RunManifest, PathBuf)> {
        let name = command_name(command);
        let result = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "command": name,
            "status": outcome.status,
            "summary": outcome.summary,
            "data": outcome.data,
        });
        self.artifacts.json("result.json", &result)?;
        let params = std::mem::take(&mut self.params);
        let artifacts = std::mem::take(&mut self.artifacts);
        let code = match outcome.status {
            Status::Fail => crate::error::EXIT_VERIFICATION_FAILED,
            _ => crate::error::EXIT_OK,
        };
        commit_run(
            &self.out,
            name,
            argv,
            params,
            artifacts,
            self.started.clone(),
            outcome.status.as_str(),
            code,
        )
    }
}

pub fn check_beta(beta: f64) -> LabResult<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(LabError::usage(format!(
            "beta must be finite and nonnegative, got {beta}"
        )));
    }
    Ok(())
}

pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Pressure(_) => "pressure",
        Command::Eigenfunction(_) => "eigenfunction",
        Command::Susceptibility(_) => "susceptibility",
        Command::VerifyGcb(_) => "verify-gcb",
        Command::VerifyLsi(_) => "verify-lsi",
        Command::VerifyMcb(_) => "verify-mcb",
        Command::VerifyGriffiths(_) => "verify-griffiths",
        Command::Intermediate(_) => "intermediate",
        Command::Summability(_) => "summability",
        Command::Herbst(_) => "herbst",
        Command::Modulus(_) => "modulus",
        Command::Report(_) => "report",
    }
}

pub fn dispatch(command: &Command, s: &mut Session) -> LabResult<Outcome> {
    match command {
        Command::Pressure(a) => transfer::pressure(a, s),
        Command::Eigenfunction(a) => transfer::eigenfunction(a, s),
        Command::Susceptibility(a) => exact::susceptibility(a, s),
        Command::VerifyGcb(a) => concentration::verify_gcb(a, s),
        Command::VerifyLsi(a) => concentration::verify_lsi(a, s),
        Command::VerifyMcb(a) => concentration::verify_mcb(a, s),
        Command::VerifyGriffiths(a) => exact::verify_griffiths(a, s),
        Command::Intermediate(a) => exact::intermediate(a, s),
        Command::Summability(a) => exact::summability(a, s),
        Command::Herbst(a) => concentration::herbst(a, s),
        Command::Modulus(a) => concentration::modulus(a, s),
        Command::Report(a) => report::report(a, s),
    }
}

/// Shortest round-trip formatting for table cells, scientific outside `[1e-4, 1e6)`.
pub fn cell(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
