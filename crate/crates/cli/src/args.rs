//! Command-line interface definition.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "cambody",
    version,
    about = "Camera-aware body estimation: synthesize calibration data, fit bodies to 2D joints, evaluate in world coordinates"
)]
pub struct Cli {
    /// Suppress informational output on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate perspective crops with ground-truth camera labels from an
    /// equirectangular panorama.
    Synth(SynthArgs),
    /// Fit a body to observed 2D joints under a chosen camera model.
    Fit(FitArgs),
    /// Evaluate predicted against ground-truth joints (PA-MPJPE and the
    /// world-frame MPJPE variants), optionally bucketed by camera.
    Eval(EvalArgs),
    /// Focal-length sensitivity experiment: refit synthetic bodies with the
    /// focal length scaled by each factor and report mean world error.
    Sensitivity(SensitivityArgs),
    /// Verify every analytic gradient against central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    /// Uniform pitch/roll/vfov over the calibration bin ranges.
    Pano360,
    /// Synthetic-scene evaluation distributions (uniform pitch in
    /// [-30, 15] deg, normal roll with 2.8 deg std, uniform vfov in
    /// [70, 130] deg).
    Specsyn,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Panorama source: a binary PPM path or procedural:{checker,hemisphere,gradient}.
    #[arg(long)]
    pub pano: String,
    /// Number of crops to generate.
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for crops and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Distribution::Pano360)]
    pub dist: Distribution,
    /// Crop width in pixels.
    #[arg(long, default_value_t = 224)]
    pub width: u32,
    /// Crop height in pixels.
    #[arg(long, default_value_t = 224)]
    pub height: u32,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Problem JSON (single-frame unless --multi is given).
    #[arg(long)]
    pub problem: PathBuf,
    /// Camera model: gt | f5000 | f2200 | file:PATH.
    #[arg(long, default_value = "gt")]
    pub camera: String,
    /// Treat the problem file as a multi-frame problem.
    #[arg(long)]
    pub multi: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Adam steps per optimization stage.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Evaluation samples JSON (a list of sample objects).
    #[arg(long)]
    pub samples: PathBuf,
    /// Optional bucket-edges JSON for the per-camera breakdown.
    #[arg(long)]
    pub buckets: Option<PathBuf>,
    /// Root-align world errors before averaging: on | off.
    #[arg(long, default_value = "on")]
    pub root_align: String,
    /// Write the full report as JSON here (a plain-text table always goes
    /// to stdout unless --quiet).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Number of synthetic bodies.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated focal scale factors.
    #[arg(long, default_value = "0.4,0.6,0.8,1.0,1.3,1.6,2.0")]
    pub factors: String,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Adam steps per optimization stage for each refit.
    #[arg(long, default_value_t = 800)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// Which checks to run: losses | fitter | all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Test hook: corrupt the named op's analytic gradient to prove the
    /// harness catches it.
    #[arg(long, hide = true)]
    pub corrupt: Option<String>,
}
