//! Run directories, artifacts and manifests.
//!
//! Artifacts are buffered while a command runs and written once the parameter set is
//! final. Each run gets a fresh directory `<root>/runs/<command>-<digest>-<seq>`, files
//! are created with `create_new`, and `manifest.json` is written last.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUT_DIR: &str = "dyson-lab-out";
pub const OUT_ENV: &str = "DYSON_LAB_OUT";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// A flag that replaced a value given in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Override {
    pub key: String,
    pub config: Value,
    pub flag: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheUse {
    pub key: String,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub run_id: String,
    pub parameter_digest: String,
    pub parameters: Map<String, Value>,
    pub overrides: Vec<Override>,
    pub seeds: BTreeMap<String, u64>,
    pub started: String,
    pub finished: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub cache: Vec<CacheUse>,
    pub status: String,
    pub exit_code: i32,
}

/// Resolved parameters, with the record of flag-over-config precedence.
#[derive(Debug, Default)]
pub struct Params {
    pub values: Map<String, Value>,
    pub overrides: Vec<Override>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub cache: Vec<CacheUse>,
}

impl Params {
    /// Flag, then config, then default. Records the value and any override.
    pub fn pick<T: Serialize + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        config: Option<T>,
        default: T,
    ) -> T {
        let v = self.pick_opt(key, flag, config).unwrap_or(default);
        self.set(key, &v);
        v
    }

    pub fn pick_opt<T: Serialize + Clone>(
        &mut self,
        key: &str,
        flag: Option<T>,
        config: Option<T>,
    ) -> Option<T> {
        if let (Some(f), Some(c)) = (&flag, &config) {
            self.overrides.push(Override {
                key: key.to_string(),
                config: to_value(c),
                flag: to_value(f),
            });
        }
        let v = flag.or(config);
        self.set(key, &v);
        v
    }

    pub fn set<T: Serialize>(&mut self, key: &str, v: &T) {
        self.values.insert(key.to_string(), to_value(v));
    }

    pub fn seed(&mut self, key: &str, seed: u64) {
        self.seeds.insert(key.to_string(), seed);
    }

    pub fn input_file(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    /// Digest of the command and its resolved parameters.
    pub fn digest(&self, command: &str) -> String {
        let doc = serde_json::json!({ "command": command, "parameters": self.values, "seeds": self.seeds });
        sha256_hex(doc.to_string().as_bytes())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Buffered artifacts of one run.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> LabResult<()> {
        let mut bytes =
            serde_json::to_vec_pretty(value).map_err(|e| LabError::Format(e.to_string()))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// CSV with a header row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> LabResult<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)
            .map_err(|e| LabError::Format(e.to_string()))?;
        for r in rows {
            w.write_record(r)
                .map_err(|e| LabError::Format(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| LabError::Format(e.to_string()))?;
        self.add(name, bytes);
        Ok(())
    }

    /// Whitespace-separated columns with a `#` header, as read by gnuplot.
    pub fn dat(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) {
        let mut s = format!("# {}\n", header.join(" "));
        for r in rows {
            s.push_str(&r.join(" "));
            s.push('\n');
        }
        self.add(name, s.into_bytes());
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }
}

/// Output root: `runs/` for run directories and `cache/` for stored measures.
#[derive(Debug, Clone)]
pub struct OutputRoot {
    pub root: PathBuf,
}

impl OutputRoot {
    pub fn runs(&self) -> PathBuf {
        self.root.join("runs")
    }

    pub fn cache(&self) -> PathBuf {
        self.root.join("cache")
    }

    /// Creates a fresh run directory; never reuses an existing one.
    pub fn create_run_dir(&self, command: &str, digest: &str) -> LabResult<(String, PathBuf)> {
        let runs = self.runs();
        fs::create_dir_all(&runs)
            .map_err(|e| LabError::io(format!("creating {}", runs.display()), e))?;
        for seq in 1.. {
            let id = format!("{command}-{}-{seq:03}", &digest[..12]);
            let dir = runs.join(&id);
            match fs::create_dir(&dir) {
                Ok(()) => return Ok((id, dir)),
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(LabError::io(format!("creating {}", dir.display()), e)),
            }
        }
        unreachable!()
    }
}

pub fn write_new(path: &Path, bytes: &[u8]) -> LabResult<()> {
    let mut f = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| LabError::io(format!("creating {}", path.display()), e))?;
    f.write_all(bytes)
        .map_err(|e| LabError::io(format!("writing {}", path.display()), e))
}

pub fn now_rfc3339() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}

/// Writes the artifacts and then the manifest; returns the manifest.
#[allow(clippy::too_many_arguments)]
pub fn commit_run(
    out: &OutputRoot,
    command: &str,
    argv: &[String],
    params: Params,
    artifacts: Artifacts,
    started: String,
    status: &str,
    exit_code: i32,
) -> LabResult<(RunManifest, PathBuf)> {
    let digest = params.digest(command);
    let (run_id, dir) = out.create_run_dir(command, &digest)?;
    let mut outputs = Vec::new();
    for (name, bytes) in &artifacts.files {
        let path = dir.join(name);
        write_new(&path, bytes)?;
        outputs.push(FileDigest {
            path: name.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        argv: argv.to_vec(),
        run_id,
        parameter_digest: digest,
        parameters: params.values,
        overrides: params.overrides,
        seeds: params.seeds,
        started,
        finished: now_rfc3339(),
        inputs: params.inputs,
        outputs,
        cache: params.cache,
        status: status.to_string(),
        exit_code,
    };
    let mut bytes =
        serde_json::to_vec_pretty(&manifest).map_err(|e| LabError::Format(e.to_string()))?;
    bytes.push(b'\n');
    write_new(&dir.join("manifest.json"), &bytes)?;
    Ok((manifest, dir))
}
