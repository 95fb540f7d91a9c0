use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use ssa_core::input::{parse_index_spec, parse_size_list};
use ssa_core::svd::{Reorth, SvdOptions};

use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ssa", version, about = "Fast singular spectrum analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Leading singular triples of the trajectory matrix.
    Decompose(DecomposeArgs),
    /// Series reconstructed from a group of eigentriples.
    Reconstruct(ReconstructArgs),
    /// Heterogeneity matrix for structural change detection.
    Hmatrix(HmatrixArgs),
    /// Time fast FFT kernels against their direct counterparts.
    Bench(BenchArgs),
    /// Bootstrap bands for the rank-5 reconstruction of a noisy model series.
    #[command(name = "bootstrap-ci")]
    BootstrapCi(BootstrapArgs),
}

#[derive(Debug, Args, Clone)]
pub struct SvdArgs {
    /// Convergence tolerance relative to the largest singular value.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Cap on Lanczos steps (default: min(L, K)).
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Seed for the Lanczos starting vector and any noise.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Skip full reorthogonalization of Lanczos vectors.
    #[arg(long)]
    pub no_reorth: bool,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output prefix; writes `<prefix>.triples.json` and `<prefix>.vectors.csv`.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub window: usize,
    #[arg(long)]
    pub nev: usize,
    #[command(flatten)]
    pub svd: SvdArgs,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub window: usize,
    /// 1-based eigentriples, e.g. "1-5" or "1,2,7".
    #[arg(long)]
    pub group: String,
    /// Triples to compute (default: largest index in the group).
    #[arg(long)]
    pub nev: Option<usize>,
    #[command(flatten)]
    pub svd: SvdArgs,
}

#[derive(Debug, Args)]
pub struct HmatrixArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub window: usize,
    #[arg(long)]
    pub base_len: usize,
    #[arg(long)]
    pub test_len: usize,
    /// Eigentriples spanning the base subspace, e.g. "1-2".
    #[arg(long, default_value = "1-2")]
    pub indices: String,
    #[command(flatten)]
    pub svd: SvdArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchTarget {
    Matvec,
    Hankelize,
    Reconstruct,
}

impl BenchTarget {
    pub fn name(self) -> &'static str {
        match self {
            Self::Matvec => "matvec",
            Self::Hankelize => "hankelize",
            Self::Reconstruct => "reconstruct",
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchTarget::Matvec)]
    pub target: BenchTarget,
    /// Series lengths, e.g. "2^12,2^14" or "1000,2000".
    #[arg(long, default_value = "2^10,2^12")]
    pub sizes: String,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// CSV report path (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Largest L*K the direct kernels may touch; bigger cells are skipped.
    #[arg(long, default_value_t = crate::bench::DEFAULT_NAIVE_CAP)]
    pub naive_cap: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Output prefix; writes `<prefix>.bands.csv` and `<prefix>.json`.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub series_len: usize,
    /// Window length (default: N / 2).
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long, default_value_t = 5.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    /// Number of leading eigentriples in each reconstruction.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    /// Band quantiles, ascending.
    #[arg(long, default_value = "0.025,0.975")]
    pub quantiles: String,
    #[command(flatten)]
    pub svd: SvdArgs,
}

/// Fully resolved settings of one invocation; serialized into every output.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nev: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<BenchTarget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantiles: Option<Vec<f64>>,
    pub seed: u64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    pub reorth: bool,
}

impl RunConfig {
    fn base(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            input: None,
            output: None,
            window: None,
            nev: None,
            group: None,
            base_len: None,
            test_len: None,
            indices: None,
            target: None,
            sizes: None,
            reps: None,
            naive_cap: None,
            series_len: None,
            replicates: None,
            noise_sigma: None,
            rank: None,
            quantiles: None,
            seed,
            tol: SvdOptions::default().tol,
            max_steps: None,
            reorth: true,
        }
    }

    fn with_svd(mut self, svd: &SvdArgs) -> Self {
        self.seed = svd.seed;
        self.tol = svd.tol;
        self.max_steps = svd.max_steps;
        self.reorth = !svd.no_reorth;
        self
    }

    /// Resolves and validates parsed arguments.
    pub fn from_command(command: &Command) -> CliResult<Self> {
        let cfg = match command {
            Command::Decompose(a) => {
                if a.nev == 0 {
                    return Err(CliError::usage("--nev must be at least 1"));
                }
                Self {
                    input: Some(a.input.clone()),
                    output: Some(a.output.clone()),
                    window: Some(a.window),
                    nev: Some(a.nev),
                    ..Self::base("decompose", a.svd.seed)
                }
                .with_svd(&a.svd)
            }
            Command::Reconstruct(a) => {
                let group =
                    parse_index_spec(&a.group).map_err(|e| CliError::usage(e.to_string()))?;
                let largest = *group.iter().max().expect("parser rejects empty lists");
                let nev = a.nev.unwrap_or(largest);
                if nev == 0 {
                    return Err(CliError::usage("--nev must be at least 1"));
                }
                if largest > nev {
                    return Err(CliError::usage(format!(
                        "group index {largest} exceeds --nev {nev}"
                    )));
                }
                Self {
                    input: Some(a.input.clone()),
                    output: Some(a.output.clone()),
                    window: Some(a.window),
                    nev: Some(nev),
                    group: Some(group),
                    ..Self::base("reconstruct", a.svd.seed)
                }
                .with_svd(&a.svd)
            }
            Command::Hmatrix(a) => {
                let indices =
                    parse_index_spec(&a.indices).map_err(|e| CliError::usage(e.to_string()))?;
                // The library takes any subset; the command line only leading blocks.
                if indices.iter().enumerate().any(|(pos, &i)| i != pos + 1) {
                    return Err(CliError::usage(format!(
                        "--indices must be a leading block 1-r, got {:?}",
                        a.indices
                    )));
                }
                Self {
                    input: Some(a.input.clone()),
                    output: Some(a.output.clone()),
                    window: Some(a.window),
                    base_len: Some(a.base_len),
                    test_len: Some(a.test_len),
                    indices: Some(indices),
                    ..Self::base("hmatrix", a.svd.seed)
                }
                .with_svd(&a.svd)
            }
            Command::Bench(a) => {
                if a.reps == 0 {
                    return Err(CliError::usage("--reps must be at least 1"));
                }
                let sizes =
                    parse_size_list(&a.sizes).map_err(|e| CliError::usage(e.to_string()))?;
                if let Some(&bad) = sizes.iter().find(|&&n| n < 4) {
                    return Err(CliError::usage(format!(
                        "bench sizes must be at least 4, got {bad}"
                    )));
                }
                Self {
                    output: a.output.clone(),
                    target: Some(a.target),
                    sizes: Some(sizes),
                    reps: Some(a.reps),
                    naive_cap: Some(a.naive_cap),
                    ..Self::base("bench", a.seed)
                }
            }
            Command::BootstrapCi(a) => {
                if a.replicates < 2 {
                    return Err(CliError::usage("--replicates must be at least 2"));
                }
                if !a.noise_sigma.is_finite() || a.noise_sigma < 0.0 {
                    return Err(CliError::usage(
                        "--noise-sigma must be a finite nonnegative number",
                    ));
                }
                let quantiles = parse_quantiles(&a.quantiles)?;
                Self {
                    output: Some(a.output.clone()),
                    window: Some(a.window.unwrap_or(a.series_len / 2)),
                    series_len: Some(a.series_len),
                    replicates: Some(a.replicates),
                    noise_sigma: Some(a.noise_sigma),
                    rank: Some(a.rank),
                    quantiles: Some(quantiles),
                    ..Self::base("bootstrap-ci", a.svd.seed)
                }
                .with_svd(&a.svd)
            }
        };
        if cfg.tol.is_nan() || cfg.tol < 0.0 {
            return Err(CliError::usage("--tol must be nonnegative"));
        }
        Ok(cfg)
    }

    pub fn svd_options(&self) -> SvdOptions {
        SvdOptions {
            max_steps: self.max_steps,
            tol: self.tol,
            seed: self.seed,
            reorth: if self.reorth {
                Reorth::Full
            } else {
                Reorth::None
            },
        }
    }

    pub(crate) fn require<T: Clone>(&self, value: &Option<T>, flag: &str) -> CliResult<T> {
        value
            .clone()
            .ok_or_else(|| CliError::usage(format!("missing {flag}")))
    }
}

/// Comma-separated probabilities, strictly inside (0, 1) and strictly ascending.
pub fn parse_quantiles(spec: &str) -> CliResult<Vec<f64>> {
    let qs = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad quantile {s:?}")))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    if qs.is_empty() || qs.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(CliError::usage(
            "quantiles must lie strictly between 0 and 1",
        ));
    }
    if qs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage("quantiles must be strictly ascending"));
    }
    Ok(qs)
}
