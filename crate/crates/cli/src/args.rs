use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "rough-dot",
    version,
    about = "Interface-roughness variability of silicon quantum-dot qubits",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "ROUGH_DOT_THREADS")]
    pub threads: Option<usize>,
    /// Log filter (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rough surface synthesis and analysis.
    #[command(subcommand, arg_required_else_help = true)]
    Surface(SurfaceCmd),
    /// Confinement potentials and gate response.
    #[command(subcommand, arg_required_else_help = true)]
    Pot(PotCmd),
    /// Valley splitting and valley phase.
    #[command(subcommand, arg_required_else_help = true)]
    Valley(ValleyCmd),
    /// g-tensors and spin-orbit coefficients.
    #[command(subcommand, arg_required_else_help = true)]
    So(SoCmd),
    /// Path-integral exchange estimates.
    #[command(subcommand, arg_required_else_help = true)]
    Pimc(PimcCmd),
    /// Full dot-grid variability report from a run configuration.
    Report(ReportArgs),
    /// Re-run a recorded manifest and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum SurfaceCmd {
    /// Generate a self-affine surface.
    Gen(SurfaceGenArgs),
    /// Power spectral density and power-law fit.
    Psd(SurfacePsdArgs),
    /// Windowed RMS roughness against window width.
    Rms(SurfaceRmsArgs),
}

#[derive(Debug, Args)]
pub struct SurfaceGenArgs {
    #[arg(long, default_value_t = 0.28)]
    pub hurst: f64,
    /// Spectral amplitude, nm³.
    #[arg(long, default_value_t = 1.4)]
    pub c0: f64,
    /// Side length, nm.
    #[arg(long, default_value_t = 500.0)]
    pub extent: f64,
    /// Grid spacing, nm; snapped so the extent holds a whole number of cells.
    #[arg(long, default_value_t = 0.13575)]
    pub dx: f64,
    /// Shortest wavelength kept, nm (default: twice the spacing).
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Longest wavelength kept, nm (default: the extent).
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; `.csv` writes a node table, anything else the binary format.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LineAxes {
    Rows,
    Columns,
    Both,
}

#[derive(Debug, Args)]
pub struct SurfaceInput {
    /// 1D profile CSV with header `x_nm,z_nm`.
    #[arg(long = "in", conflicts_with = "surface")]
    pub input: Option<PathBuf>,
    /// Surface file (binary or node CSV).
    #[arg(long)]
    pub surface: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfacePsdArgs {
    #[command(flatten)]
    pub source: SurfaceInput,
    /// Lines averaged per axis for surface input.
    #[arg(long, default_value_t = 64)]
    pub lines: usize,
    #[arg(long, value_enum, default_value_t = LineAxes::Both)]
    pub axes: LineAxes,
    /// Fit window, nm.
    #[arg(long, default_value_t = 2.0)]
    pub fit_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub fit_max: f64,
    #[arg(long, default_value_t = 10)]
    pub bins_per_decade: usize,
    /// Binned spectrum CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Log-log plot of the binned spectrum (SVG).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceRmsArgs {
    #[command(flatten)]
    pub source: SurfaceInput,
    /// Window widths, nm.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50,100")]
    pub lambdas: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PotCmd {
    /// Harmonic fit of a potential grid inside a window.
    Fit(PotFitArgs),
    /// Double-dot geometry against barrier-gate voltage.
    Sweep(PotSweepArgs),
}

#[derive(Debug, Args)]
pub struct PotFitArgs {
    /// Potential grid: CSV `x_nm,y_nm,z_nm,V_meV` or the binary format.
    #[arg(long)]
    pub grid: PathBuf,
    /// Fit box `x0,x1,y0,y1,z0,z1` in nm.
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "X0,X1,Y0,Y1,Z0,Z1",
        required = true
    )]
    pub window: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PotSweepArgs {
    /// Double-dot description (JSON); two isotropic dots at ±25 nm when absent.
    #[arg(long)]
    pub pot: Option<PathBuf>,
    /// Gate response table (JSON); the built-in table when absent.
    #[arg(long)]
    pub response: Option<PathBuf>,
    #[arg(long, default_value = "J1")]
    pub gate: String,
    /// Voltage range, V.
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 2.0)]
    pub to: f64,
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum ValleyCmd {
    /// Valley splitting and phase over a grid of dots.
    Grid(ValleyGridArgs),
    /// Valley phase from a density pair or from the interface chain.
    Phase(ValleyPhaseArgs),
}

#[derive(Debug, Args)]
pub struct ValleyGridArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Grid shape `ROWSxCOLS`.
    #[arg(long, default_value = "7x7")]
    pub dots: String,
    /// Dot pitch, nm.
    #[arg(long, default_value_t = 50.0)]
    pub pitch: f64,
    /// Vertical field, meV/nm.
    #[arg(long, default_value_t = 28.0)]
    pub ez: f64,
    /// Lateral curvature, meV/nm².
    #[arg(long, default_value_t = 0.3)]
    pub curvature: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValleyPhaseArgs {
    /// CSV `z_nm,rho_plus,rho_minus` on a uniform z grid.
    #[arg(long = "in", conflicts_with = "ez")]
    pub input: Option<PathBuf>,
    /// Solve the interface chain at this field (meV/nm) instead.
    #[arg(long)]
    pub ez: Option<f64>,
    /// Interface position for the chain, nm.
    #[arg(long, default_value_t = 0.0)]
    pub interface_z: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SoCmd {
    /// Fit `g(φ) = g₀ + α + β sin 2φ` to an in-plane sweep.
    Fit(SoFitArgs),
    /// Assemble a g-matrix from three applied/effective field pairs.
    Gmatrix(SoGmatrixArgs),
}

#[derive(Debug, Args)]
pub struct SoFitArgs {
    /// CSV `phi_rad,g`.
    #[arg(long)]
    pub angles: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SoGmatrixArgs {
    /// JSON `{"applied_t": [[..],[..],[..]], "effective_t": [[..],[..],[..]]}`.
    #[arg(long)]
    pub fields: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PimcCmd {
    /// Exchange against barrier-gate voltage.
    Exchange(PimcExchangeArgs),
    /// Compare the sampler against exact diagonalization in one dimension.
    Validate(PimcValidateArgs),
}

#[derive(Debug, Args)]
pub struct PimcRunArgs {
    #[arg(long, default_value_t = 256)]
    pub slices: usize,
    #[arg(long, default_value_t = 4000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 400)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Temperature k_B·T, meV.
    #[arg(long, default_value_t = 1.55)]
    pub kt: f64,
}

#[derive(Debug, Args)]
pub struct PimcExchangeArgs {
    /// Double-dot description (JSON).
    #[arg(long)]
    pub pot: PathBuf,
    /// Interface surface; a flat interface around the dots when absent.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    /// Gate response table (JSON); overrides the one named in the pot file.
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// Place the double-dot midpoint at `X,Y` nm.
    #[arg(long, value_delimiter = ',', value_name = "X,Y")]
    pub at: Option<Vec<f64>>,
    /// Barrier-gate voltages, V.
    #[arg(long, value_delimiter = ',', required = true)]
    pub vj: Vec<f64>,
    #[command(flatten)]
    pub run: PimcRunArgs,
    /// Closing-parameter intervals; chosen from the separation when absent.
    #[arg(long)]
    pub windows: Option<usize>,
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub checkpoint_every: usize,
    /// J against V_J plot (SVG).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PimcValidateArgs {
    /// Well separations, nm.
    #[arg(long, value_delimiter = ',', default_value = "14,18,22,26")]
    pub distances: Vec<f64>,
    /// Well curvature, meV/nm².
    #[arg(long, default_value_t = 0.3)]
    pub curvature: f64,
    /// Coulomb softening width, nm.
    #[arg(long, default_value_t = 4.0)]
    pub coulomb_width: f64,
    /// Grid points per coordinate for the exact solution.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[command(flatten)]
    pub run: PimcRunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run configuration (JSON); the default pipeline when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Surface seed of the default pipeline.
    #[arg(long, conflicts_with = "config", default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(value_name = "MANIFEST")]
    pub record: PathBuf,
    /// New output location; replaces the recorded `--out`.
    #[arg(long)]
    pub out: PathBuf,
}
