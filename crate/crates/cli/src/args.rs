//! Command-line surface. Every argument struct is also serializable, because
//! the parsed command is the parameter record stored in run manifests.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maglap::distance::SweepModel;
use maglap::exact::DEFAULT_DENSE_LIMIT;
use maglap::format::linspace;
use maglap::generators::Model;
use maglap::kpm::{KpmConfig, TraceMode};
use maglap::som::{NormalizationKind, SomMode};
use maglap::OperatorKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "maglap", version, about = "Magnetic Laplacian spectra of directed graphs")]
pub struct Cli {
    /// Worker threads; all cores when unset.
    #[arg(long, global = true, env = "MAGLAP_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Sample a graph from a generator family.
    Generate(GenerateArgs),
    /// Specific-heat grid over charges and temperatures.
    Heat(HeatArgs),
    /// Exact eigenvalues at one charge.
    Spectrum(SpectrumArgs),
    /// Spectral density at one charge, exact or KPM.
    Dos(DosArgs),
    /// Von Neumann entropy of the Boltzmann density matrix.
    Entropy(EntropyArgs),
    /// Entropic dissimilarity between two graphs on the same node set.
    Dissimilarity(DissimilarityArgs),
    /// Wasserstein distance between the spectral densities of two graphs.
    Distance(DistanceArgs),
    /// Grid-search a generator parameter against a target graph.
    Infer(InferArgs),
    /// Train a self-organizing map on specific-heat fingerprints.
    Som(SomArgs),
    /// Re-run a manifest and check that its outputs are reproduced.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Heat(_) => "heat",
            Command::Spectrum(_) => "spectrum",
            Command::Dos(_) => "dos",
            Command::Entropy(_) => "entropy",
            Command::Dissimilarity(_) => "dissimilarity",
            Command::Distance(_) => "distance",
            Command::Infer(_) => "infer",
            Command::Som(_) => "som",
            Command::Replay(_) => "replay",
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Command::Generate(a) => a.output.as_ref(),
            Command::Heat(a) => a.output.as_ref(),
            Command::Spectrum(a) => a.output.as_ref(),
            Command::Dos(a) => a.output.as_ref(),
            Command::Entropy(a) => a.output.as_ref(),
            Command::Dissimilarity(a) => a.output.as_ref(),
            Command::Distance(a) => a.output.as_ref(),
            Command::Infer(a) => a.output.as_ref(),
            Command::Som(a) => a.output.as_ref(),
            Command::Replay(a) => a.output.as_ref(),
        }
    }

    pub fn set_output(&mut self, path: PathBuf) {
        let slot = match self {
            Command::Generate(a) => &mut a.output,
            Command::Heat(a) => &mut a.output,
            Command::Spectrum(a) => &mut a.output,
            Command::Dos(a) => &mut a.output,
            Command::Entropy(a) => &mut a.output,
            Command::Dissimilarity(a) => &mut a.output,
            Command::Distance(a) => &mut a.output,
            Command::Infer(a) => &mut a.output,
            Command::Som(a) => &mut a.output,
            Command::Replay(a) => &mut a.output,
        };
        *slot = Some(path);
    }

    /// Input paths, in argument order.
    pub fn inputs_mut(&mut self) -> Vec<&mut PathBuf> {
        match self {
            Command::Generate(_) => vec![],
            Command::Heat(a) => vec![&mut a.input],
            Command::Spectrum(a) => vec![&mut a.input],
            Command::Dos(a) => vec![&mut a.input],
            Command::Entropy(a) => vec![&mut a.input],
            Command::Dissimilarity(a) => vec![&mut a.tilde, &mut a.base],
            Command::Distance(a) => vec![&mut a.first, &mut a.second],
            Command::Infer(a) => vec![&mut a.target],
            Command::Som(a) => vec![&mut a.dataset],
            Command::Replay(a) => vec![&mut a.manifest],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Er,
    Ba,
    Sf,
    Ws,
    Sbm,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Node count (er, ba, sf, ws).
    #[arg(long)]
    pub n: Option<usize>,
    /// Arc probability (er).
    #[arg(long)]
    pub p: Option<f64>,
    /// Arcs per new node (ba).
    #[arg(long)]
    pub m: Option<usize>,
    /// Ring neighbours, even (ws).
    #[arg(long)]
    pub k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of blocks (sbm, uniform).
    #[arg(long)]
    pub nf: Option<usize>,
    /// Nodes per block (sbm, uniform).
    #[arg(long)]
    pub nc: Option<usize>,
    /// Intra-block arc probability (sbm).
    #[arg(long)]
    pub pc: Option<f64>,
    /// Forward inter-block arc probability (sbm).
    #[arg(long)]
    pub pd: Option<f64>,
    #[arg(long, default_value_t = 0.41)]
    pub sf_alpha: f64,
    #[arg(long, default_value_t = 0.54)]
    pub sf_beta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sf_gamma: f64,
    #[arg(long, default_value_t = 0.2)]
    pub delta_in: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta_out: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge-list file; a `.json` generator record and a manifest are written next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn required<T: Copy>(value: Option<T>, flag: &str, family: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required for family {family}")))
}

impl GenerateArgs {
    pub fn model(&self) -> Result<Model, CliError> {
        let f = |x| match x {
            Family::Er => "er",
            Family::Ba => "ba",
            Family::Sf => "sf",
            Family::Ws => "ws",
            Family::Sbm => "sbm",
            Family::Uniform => "uniform",
        };
        let name = f(self.family);
        Ok(match self.family {
            Family::Er => Model::ErdosRenyi { n: required(self.n, "n", name)?, p: required(self.p, "p", name)? },
            Family::Ba => Model::BarabasiAlbert { n: required(self.n, "n", name)?, m: required(self.m, "m", name)? },
            Family::Sf => Model::ScaleFree {
                n: required(self.n, "n", name)?,
                alpha: self.sf_alpha,
                beta: self.sf_beta,
                gamma: self.sf_gamma,
                delta_in: self.delta_in,
                delta_out: self.delta_out,
            },
            Family::Ws => Model::WattsStrogatz {
                n: required(self.n, "n", name)?,
                k: required(self.k, "k", name)?,
                beta: required(self.beta, "beta", name)?,
            },
            Family::Sbm => Model::CyclicSbm {
                n_f: required(self.nf, "nf", name)?,
                n_c: required(self.nc, "nc", name)?,
                p_c: required(self.pc, "pc", name)?,
                p_d: required(self.pd, "pd", name)?,
            },
            Family::Uniform => {
                Model::UniformModular { n_f: required(self.nf, "nf", name)?, n_c: required(self.nc, "nc", name)? }
            }
        })
    }
}

/// Charge × temperature grid, both ends inclusive.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q_min: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub q_max: f64,
    #[arg(long, default_value_t = 30)]
    pub q_steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub t_min: f64,
    #[arg(long, default_value_t = 0.15)]
    pub t_max: f64,
    #[arg(long, default_value_t = 30)]
    pub t_steps: usize,
}

impl GridArgs {
    pub fn charges(&self) -> Result<Vec<f64>, CliError> {
        axis("q", self.q_min, self.q_max, self.q_steps)
    }

    pub fn temperatures(&self) -> Result<Vec<f64>, CliError> {
        axis("t", self.t_min, self.t_max, self.t_steps)
    }
}

fn axis(name: &str, lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    let ok = lo.is_finite() && hi.is_finite() && steps >= 1 && (lo < hi || (steps == 1 && lo == hi));
    if !ok {
        return Err(CliError::Usage(format!("--{name}-min/--{name}-max/--{name}-steps describe an empty range")));
    }
    Ok(if steps == 1 { vec![lo] } else { linspace(lo, hi, steps) })
}

/// KPM knobs. Moment and probe counts default per subcommand.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KpmArgs {
    /// Chebyshev moments.
    #[arg(short = 'M', long = "moments")]
    pub moments: Option<usize>,
    /// Random probe vectors.
    #[arg(short = 'R', long = "probes")]
    pub probes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub kpm_seed: u64,
    /// Chebyshev nodes in the output density.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Trace over all basis vectors instead of random probes.
    #[arg(long)]
    pub exact_trace: bool,
}

impl KpmArgs {
    pub fn config(&self, default_moments: usize, default_probes: usize) -> KpmConfig {
        let mut cfg = KpmConfig::new(self.moments.unwrap_or(default_moments), self.probes.unwrap_or(default_probes))
            .with_seed(self.kpm_seed);
        if let Some(n) = self.grid_points {
            cfg.grid_points = n;
        }
        if self.exact_trace {
            cfg.trace = TraceMode::Exact;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Normalized,
    Combinatorial,
}

impl From<Kind> for OperatorKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Normalized => OperatorKind::Normalized,
            Kind::Combinatorial => OperatorKind::Combinatorial,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HeatArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Dense eigendecomposition per charge (the default).
    #[arg(long, conflicts_with = "kpm")]
    pub exact: bool,
    /// KPM density per charge; defaults to 40 moments and 25 probes.
    #[arg(long)]
    pub kpm: bool,
    #[command(flatten)]
    pub kpm_args: KpmArgs,
    /// Also write a polar heatmap (requires --output).
    #[arg(long)]
    pub svg: bool,
    /// Restrict to the largest weakly connected component first.
    #[arg(long)]
    pub lwcc: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    /// Output directory.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    pub input: PathBuf,
    /// Charge; reduced modulo 1 for unweighted graphs.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = Kind::Normalized)]
    pub kind: Kind,
    #[arg(long)]
    pub lwcc: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DosArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t = Kind::Normalized)]
    pub kind: Kind,
    /// KPM estimate (100 moments, 20 probes by default) instead of exact levels.
    #[arg(long)]
    pub kpm: bool,
    #[command(flatten)]
    pub kpm_args: KpmArgs,
    #[arg(long)]
    pub lwcc: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EntropyArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    /// Temperature.
    #[arg(short = 'T', long = "temperature")]
    pub temperature: f64,
    /// Report in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
    #[arg(long)]
    pub lwcc: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DissimilarityArgs {
    /// Graph whose density matrix is the first argument of the relative entropy.
    pub tilde: PathBuf,
    /// Reference graph.
    pub base: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(short = 'T', long = "temperature")]
    pub temperature: f64,
    #[arg(long)]
    pub bits: bool,
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_limit: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DistanceArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Comma-separated charges.
    #[arg(long, value_delimiter = ',', default_value = "0,0.3333333333333333", allow_negative_numbers = true)]
    pub charges: Vec<f64>,
    /// Wasserstein order d.
    #[arg(long, default_value_t = 1.0)]
    pub order: f64,
    #[command(flatten)]
    pub kpm_args: KpmArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFamily {
    /// Sweep p at fixed n.
    Er,
    /// Sweep m at fixed n.
    Ba,
    /// Sweep p_c at fixed N_f, N_c, p_d.
    SbmIntra,
    /// Sweep p_d at fixed N_f, N_c, p_c.
    SbmInter,
    /// Sweep beta at fixed n, k.
    Ws,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct InferArgs {
    pub target: PathBuf,
    #[arg(long, value_enum)]
    pub model: SweepFamily,
    /// Node count of candidate graphs; defaults to the target's.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub nf: Option<usize>,
    #[arg(long)]
    pub nc: Option<usize>,
    #[arg(long)]
    pub pc: Option<f64>,
    #[arg(long)]
    pub pd: Option<f64>,
    /// Explicit comma-separated grid; overrides --grid-min/--grid-max/--grid-steps.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 11)]
    pub grid_steps: usize,
    #[arg(long, value_delimiter = ',', default_value = "0,0.3333333333333333")]
    pub charges: Vec<f64>,
    /// Realizations per grid point.
    #[arg(long, default_value_t = 5)]
    pub n_exp: usize,
    #[arg(long, default_value_t = 1.0)]
    pub order: f64,
    #[command(flatten)]
    pub kpm_args: KpmArgs,
    /// Root seed for candidate graphs and their probes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl InferArgs {
    pub fn sweep(&self, target_nodes: usize) -> Result<SweepModel, CliError> {
        let n = self.n.unwrap_or(target_nodes);
        Ok(match self.model {
            SweepFamily::Er => SweepModel::ErdosRenyi { n },
            SweepFamily::Ba => SweepModel::BarabasiAlbert { n },
            SweepFamily::Ws => SweepModel::WattsStrogatz { n, k: required(self.k, "k", "ws")? },
            SweepFamily::SbmIntra => SweepModel::CyclicSbmIntra {
                n_f: required(self.nf, "nf", "sbm-intra")?,
                n_c: required(self.nc, "nc", "sbm-intra")?,
                p_d: required(self.pd, "pd", "sbm-intra")?,
            },
            SweepFamily::SbmInter => SweepModel::CyclicSbmInter {
                n_f: required(self.nf, "nf", "sbm-inter")?,
                n_c: required(self.nc, "nc", "sbm-inter")?,
                p_c: required(self.pc, "pc", "sbm-inter")?,
            },
        })
    }

    pub fn parameter_grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(g) = &self.grid {
            return Ok(g.clone());
        }
        match (self.grid_min, self.grid_max) {
            (Some(lo), Some(hi)) => axis("grid", lo, hi, self.grid_steps),
            _ => Err(CliError::Usage("give --grid or both --grid-min and --grid-max".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Online,
    Batch,
}

impl From<Mode> for SomMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Online => SomMode::Online,
            Mode::Batch => SomMode::Batch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalize {
    Zscore,
    None,
}

impl From<Normalize> for NormalizationKind {
    fn from(n: Normalize) -> Self {
        match n {
            Normalize::Zscore => NormalizationKind::Zscore,
            Normalize::None => NormalizationKind::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SomArgs {
    /// Directory with one subdirectory of edge lists per class.
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub width: usize,
    #[arg(long, default_value_t = 20)]
    pub height: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, value_enum, default_value_t = Mode::Online)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = Normalize::Zscore)]
    pub normalize: Normalize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fingerprint grid.
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write the reproduced outputs here instead of the recorded location.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
