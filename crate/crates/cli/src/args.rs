use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "statgeo", version, about = "Curvature, Frobenius and WDVV checks for statistical manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Duality, Gauss, Codazzi and α-connection curvature identities at each point.
    Identities(IdentitiesArgs),
    /// Associativity, unit, idempotents, K-curvature constancy and the Yukawa term.
    Frobenius(FrobeniusArgs),
    /// WDVV residuals of a Hessian chart or of a prepotential.
    Wdvv(WdvvArgs),
    /// The BC_n trilogarithm prepotential: B = hI and the WDVV equations.
    Bcn(BcnArgs),
    /// Fisher metric and Amari-Chentsov tensor of a finite family.
    Fisher(FisherArgs),
    /// Validate a chart or prepotential file without evaluating it.
    ParseCheck(ParseCheckArgs),
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// JSON file holding an array of points.
    #[arg(long, value_name = "PATH", conflicts_with = "sample")]
    pub points: Option<PathBuf>,
    /// Number of points to draw uniformly from the chart's domain.
    #[arg(long, value_name = "N", requires = "seed")]
    pub sample: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here (atomically).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Format of the report printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Multiplies every default tolerance; explicit tolerance flags win.
    #[arg(long, value_name = "X", default_value_t = 1.0)]
    pub tol: f64,
    /// Leave the duration out of the report so that runs compare byte for byte.
    #[arg(long)]
    pub omit_duration: bool,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Threshold for the normalized identity residuals.
    #[arg(long, value_name = "X")]
    pub identity_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FrobeniusArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Bracket threshold relative to max(1, max|K|²).
    #[arg(long, value_name = "X")]
    pub commuting_tol: Option<f64>,
    /// Residual threshold for constant sectional K-curvature.
    #[arg(long, value_name = "X")]
    pub curvature_tol: Option<f64>,
    /// Random restarts of the sphere maximization.
    #[arg(long, value_name = "N", default_value_t = statgeo_core::frobenius::DEFAULT_RESTARTS)]
    pub restarts: usize,
    /// Also report ∇̂C, ∇̂E and derivatives of the idempotents.
    #[arg(long)]
    pub rigidity: bool,
}

#[derive(Debug, Args)]
pub struct WdvvArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_name = "X")]
    pub wdvv_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BcnArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, value_name = "X")]
    pub wdvv_tol: Option<f64>,
    /// Use this r instead of the configured or constrained one.
    #[arg(long, value_name = "R", allow_hyphen_values = true)]
    pub r_override: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ParseCheckArgs {
    #[arg(long, value_name = "PATH")]
    pub chart: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}
