use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "critmode", version, about = "Jordan-basis analysis of damped oscillator networks at critical points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spectrum, Jordan chains, duals and all verification checks
    Analyze(AnalyzeArgs),
    /// Time evolution of an initial state
    Evolve(EvolveArgs),
    /// Splitting of a critical block under a stiffness perturbation
    Perturb(PerturbArgs),
    /// Build a critical system from one of the closed-form families
    Design(DesignArgs),
    /// Eigenvalue tracks and exponent fits for one of the five figures
    ReproduceFigure(FigureArgs),
    /// Per-mode weights and cluster-sum cancellation near a critical point
    Cancellation(CancellationArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON system file, or `catalog:<name>`
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub tol_rank: Option<f64>,
    #[arg(long)]
    pub tol_cluster: Option<f64>,
    #[arg(long)]
    pub tol_residual: Option<f64>,
    /// output directory
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct EpsGrid {
    /// base value; the grid is `n^p eps0` for `n = 0 .. count-1`
    #[arg(long, allow_negative_numbers = true)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub eps_power: Option<u32>,
    #[arg(long)]
    pub eps_count: Option<usize>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// initial phase-space state `x_1..x_N, p_1..p_N`; entries are real
    /// or `re:im`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<String>>,
    /// explicit sample times
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 50)]
    pub t_steps: usize,
    /// compare against fourth-order Runge-Kutta integration
    #[arg(long)]
    pub oracle: bool,
    /// Runge-Kutta step size
    #[arg(long, default_value_t = 1e-4)]
    pub rk_step: f64,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: EpsGrid,
    /// perturbation matrix, row-major entries
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "perturbation")]
    pub dk: Option<Vec<f64>>,
    /// named perturbation of a catalog system
    #[arg(long)]
    pub perturbation: Option<String>,
    /// critical eigenvalue `re,im`; defaults to the largest block
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub omega: Option<Vec<f64>>,
    /// include the second-order correction in the predictions
    #[arg(long)]
    pub second_order: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Quartic,
    Cubic,
    Double2,
    /// rescale the input system by `--a`
    Scale,
}

#[derive(Args, Debug)]
pub struct DesignArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma11: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// quartic family: take the smaller damping root
    #[arg(long)]
    pub lower_branch: bool,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub figure: u8,
    /// one panel per value; defaults to both signs of 1e-4
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps0: Option<Vec<f64>>,
    #[arg(long)]
    pub eps_power: Option<u32>,
    #[arg(long, default_value_t = 9)]
    pub eps_count: usize,
}

#[derive(Args, Debug)]
pub struct CancellationArgs {
    #[command(flatten)]
    pub common: Common,
    /// named perturbation of a catalog system
    #[arg(long, default_value = "e11")]
    pub perturbation: String,
    #[arg(long, default_value_t = 1e-10)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_max: f64,
    /// logarithmically spaced points between the bounds
    #[arg(long, default_value_t = 9)]
    pub eps_count: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2")]
    pub times: Vec<f64>,
}
