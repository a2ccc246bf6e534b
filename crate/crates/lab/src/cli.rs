//! Command-line definitions. Every flag is optional; unset flags fall back to the
//! config file and then to built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "dyson-lab",
    version,
    about = "Exact, transfer-operator and Monte Carlo experiments on long-range Ising chains"
)]
pub struct Cli {
    /// TOML config file with [model], [exact], [transfer], [sampler], [concentration] and [output] sections.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output root. Defaults to [output].dir, then $DYSON_LAB_OUT, then ./dyson-lab-out.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Do not read or write the exact-measure cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Only print the run directory.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Log spectral radius of truncated transfer operators.
    Pressure(PressureArgs),
    /// Principal eigenfunction and eigenprobability, optionally cross-checked against the half-line density.
    Eigenfunction(EigenfunctionArgs),
    /// Finite-volume susceptibility over a beta grid, exactly or by Monte Carlo.
    Susceptibility(SusceptibilityArgs),
    /// Gaussian concentration bound on an exact measure.
    VerifyGcb(VerifyArgs),
    /// Log-Sobolev inequality on an exact measure.
    VerifyLsi(VerifyArgs),
    /// Moment concentration bounds on an exact measure.
    VerifyMcb(VerifyMcbArgs),
    /// Correlation positivity and monotonicity in beta and in the intermediate mask.
    VerifyGriffiths(GriffithsArgs),
    /// Entropy and telescoping identities of intermediate measures.
    Intermediate(IntermediateArgs),
    /// Summability conditions and constants of a coupling family.
    Summability(SummabilityArgs),
    /// Slope of u(lambda) = log E exp(lambda F) / lambda against its log-Sobolev bound.
    Herbst(HerbstArgs),
    /// Equicontinuity moduli u_n, v_n of the half-line densities.
    Modulus(ModulusArgs),
    /// Summary tables rebuilt from stored run results.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Power-law exponent: J(k) = k^-alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Coupling table file: a `tail zero` or `tail power-law <alpha> <scale>` header, then `k value` lines.
    #[arg(long, value_name = "PATH")]
    pub couplings: Option<PathBuf>,
    /// Inverse temperature.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MeasureArgs {
    /// Number of sites of the exact volume.
    #[arg(long)]
    pub n: Option<usize>,
    /// full, half-line-right, half-line-left or intermediate.
    #[arg(long)]
    pub mask: Option<String>,
    /// Index of the intermediate mask.
    #[arg(long)]
    pub k: Option<usize>,
    /// free, plus or minus.
    #[arg(long)]
    pub boundary: Option<String>,
    /// Boundary sites on each side of the volume.
    #[arg(long)]
    pub boundary_width: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PressureArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Truncation depths, e.g. 4..12 or 2,4,8.
    #[arg(long)]
    pub depths: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EigenfunctionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Truncation depth.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// N of the half-line density used for the cross-check.
    #[arg(long)]
    pub density_n: Option<usize>,
    /// Sites of the left window approximating the left half-line measure.
    #[arg(long)]
    pub left_window: Option<usize>,
    /// Fail when the relative sup distance of the cross-check exceeds this.
    #[arg(long)]
    pub max_distance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SusceptibilityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Beta grid, e.g. 0:0.6:0.1.
    #[arg(long)]
    pub beta_grid: Option<String>,
    /// exact, mc or both.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    /// Independent chains per beta, on disjoint streams.
    #[arg(long)]
    pub chains: Option<usize>,
    /// Drop couplings beyond this distance in the sampler.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Store the sample stream of every chain as CSV.
    #[arg(long)]
    pub stream_csv: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Constant D to verify. Defaults to 1/4 + (beta/2) e^{2 beta chi} for verify-lsi and to its Herbst constant otherwise, with the exact susceptibility.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Susceptibility used for the default constant instead of the exact one.
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restarts of the log-Sobolev witness search.
    #[arg(long)]
    pub search_trials: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct VerifyMcbArgs {
    #[command(flatten)]
    pub verify: VerifyArgs,
    /// Moments to check.
    #[arg(long, value_delimiter = ',')]
    pub moments: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GriffithsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest volume; every size from 2 to n is checked.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub beta_grid: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct IntermediateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Half-width N of the window [-N, N].
    #[arg(long)]
    pub n: Option<usize>,
    /// Intermediate indices; all k <= k_N by default.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SummabilityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Partial-sum level that certifies divergence.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct HerbstArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Sites of the linear test function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sites: Option<Vec<i64>>,
    /// Coefficients of the linear test function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    /// Lambda grid in (0, 1].
    #[arg(long)]
    pub lambdas: Option<String>,
    /// Log-Sobolev constant; defaults to the certified bound.
    #[arg(long)]
    pub constant: Option<f64>,
    #[arg(long)]
    pub chi: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Values of n, e.g. 1,10,100 or 1..20.
    #[arg(long)]
    pub ns: Option<String>,
    /// Gaussian concentration constant; defaults to the certified one.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Sites of the exact measure whose susceptibility feeds the default constant.
    #[arg(long)]
    pub chi_n: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReportArgs {
    /// Only include runs of this command.
    #[arg(long)]
    pub command: Option<String>,
}
