//! Command-line laboratory on top of `dyson-core`: configuration, run manifests,
//! binary dumps, the exact-measure cache and the twelve subcommands.

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

use crate::cli::Cli;
use crate::config::Config;
use crate::error::{LabError, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED};
use crate::output::{OutputRoot, DEFAULT_OUT_DIR, OUT_ENV};

/// Runs the tool on `argv` (including the program name) and returns the exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &LabError) {
    eprintln!("dyson-lab: error[{}]: {e}", e.kind());
    let doc = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } });
    eprintln!("{doc}");
}

fn execute(cli: Cli, argv: &[String]) -> Result<i32, LabError> {
    let (config, config_bytes) = match &cli.config {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| LabError::io(format!("reading {}", path.display()), e))?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            (Config::parse(&text, path)?, Some(bytes))
        }
        None => (Config::default(), None),
    };
    if let Some(threads) = cli.threads.or(config.output.threads) {
        if threads == 0 {
            return Err(LabError::usage("--threads must be at least 1"));
        }
        // Fails only if a pool already exists in this process, which keeps its size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let root = cli
        .out
        .clone()
        .or_else(|| config.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let out = OutputRoot { root };
    let mut session = commands::Session::new(config, out, !cli.no_cache, cli.quiet);
    if let (Some(path), Some(bytes)) = (&cli.config, &config_bytes) {
        session.params.input_file(path, bytes);
    }
    let outcome = commands::dispatch(&cli.command, &mut session)?;
    let (manifest, dir) = session.commit(&cli.command, argv, &outcome)?;
    if !cli.quiet {
        for line in &outcome.lines {
            println!("{line}");
        }
    }
    println!("run: {} ({})", manifest.run_id, dir.display());
    Ok(match outcome.status {
        commands::Status::Fail => EXIT_VERIFICATION_FAILED,
        _ => EXIT_OK,
    })
}
