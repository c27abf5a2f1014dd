//! Flags, the optional JSON config file, and their merge.
//!
//! Precedence is flag > file > built-in default. Every resolved value is
//! echoed back in the result document.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use torind_core::field::{EPS_ZERO, FD_REL_STEP};
use torind_core::firstintegral::{GradientConvention, EPS_CURL, RK4_STEP};
use torind_core::index::{IndexOptions, ORACLE_TOL};

#[derive(Debug, Parser)]
#[command(
    name = "torind",
    version,
    about = "Index of plane vector fields along closed curves, torus uniformization checks and first integrals"
)]
pub struct Cli {
    /// JSON file with default parameters; flags override it.
    #[arg(long, global = true, value_name = "FILE", help_heading = "Global options")]
    pub config: Option<PathBuf>,

    /// Write the JSON result here instead of standard output.
    /// Relative paths resolve against $TORIND_OUT_DIR when set.
    #[arg(long, global = true, value_name = "FILE", help_heading = "Global options")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub tolerances: ToleranceFlags,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ToleranceFlags {
    /// Convergence threshold between successive quadrature levels.
    #[arg(long, global = true, allow_hyphen_values = true, help_heading = "Tolerances")]
    pub tol: Option<f64>,
    /// Snap residuals at or above this are flagged suspicious.
    #[arg(long, global = true, allow_hyphen_values = true, help_heading = "Tolerances")]
    pub snap_tol: Option<f64>,
    /// Snap residuals above this are errors.
    #[arg(long, global = true, allow_hyphen_values = true, help_heading = "Tolerances")]
    pub error_tol: Option<f64>,
    /// Field norms below this count as zeros on the curve.
    #[arg(long, global = true, allow_hyphen_values = true, help_heading = "Tolerances")]
    pub zero_tol: Option<f64>,
    /// Allowed gap between the quadrature and unwrap routes.
    #[arg(long, global = true, allow_hyphen_values = true, help_heading = "Tolerances")]
    pub oracle_tol: Option<f64>,
    /// Coarsest quadrature grid (panels)
    #[arg(long, global = true, help_heading = "Tolerances")]
    pub min_panels: Option<usize>,
    /// Finest quadrature grid before giving up
    #[arg(long, global = true, help_heading = "Tolerances")]
    pub max_panels: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Index of a field along a closed plane curve.
    Index(IndexArgs),
    /// Index of the pushed-forward unit field along the image of a (p,q) curve.
    TheoremCheck(TheoremArgs),
    /// Necessary condition for uniformization: index 1 along every curve.
    CorollaryCheck(CorollaryArgs),
    /// Build a first integral of example((f,g),a,b) on a rectangle.
    ///
    /// The CSV written by --csv has header `x,y,h` and one row per grid node,
    /// x varying fastest.
    FirstIntegral(FirstIntegralArgs),
    /// Push a field forward through a map and sample it.
    Pushforward(PushforwardArgs),
    /// Draw curves, a quiver plot, or the image of a (p,q) curve as SVG.
    Plot(PlotArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Index(_) => "index",
            Command::TheoremCheck(_) => "theorem-check",
            Command::CorollaryCheck(_) => "corollary-check",
            Command::FirstIntegral(_) => "first-integral",
            Command::Pushforward(_) => "pushforward",
            Command::Plot(_) => "plot",
        }
    }
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    /// Field as "(P, Q)" in x, y or a registry name.
    #[arg(long)]
    pub field: Option<String>,
    /// Curve as "(x(t), y(t))", t in [0, 2π].
    #[arg(long)]
    pub curve: Option<String>,
}

#[derive(Debug, Args)]
pub struct TheoremArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<i64>,
    /// Run the standard list of eight (p,q) pairs.
    #[arg(long)]
    pub sweep: bool,
    /// Explicit pair list, e.g. "1,0;2,1".
    #[arg(long, allow_hyphen_values = true)]
    pub pairs: Option<String>,
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    #[arg(long)]
    pub field: Option<String>,
    /// Repeat for several curves.
    #[arg(long)]
    pub curve: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FirstIntegralArgs {
    /// Uniformizing map "(f, g)" or a registry name.
    #[arg(long)]
    pub psi: Option<String>,
    /// First component of the constant target field (a, b).
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Second component of the constant target field (a, b).
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// "x0,x1,y0,y1".
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Cells per side.
    #[arg(long)]
    pub res: Option<usize>,
    /// "x,y"; the grid node nearest to it gets h = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<String>,
    /// Jacobian pairing for the gradient of h (default standard).
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
    /// Integration time of each level-set flow check.
    #[arg(long)]
    pub flow_time: Option<f64>,
    /// Grid CSV (x,y,h).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Contour plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PushforwardArgs {
    #[arg(long)]
    pub field: Option<String>,
    /// Map "(f, g)" or a registry name.
    #[arg(long)]
    pub map: Option<String>,
    /// Optional field to compare against; reports the conjugacy residual.
    #[arg(long)]
    pub target: Option<String>,
    /// Source rectangle "x0,x1,y0,y1".
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// Samples per side.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum)]
    pub kind: Option<PlotKind>,
    /// Curves to draw (kind = curves); repeatable.
    #[arg(long)]
    pub curve: Vec<String>,
    /// Map applied to the curves before drawing.
    #[arg(long)]
    pub map: Option<String>,
    /// Field for kind = quiver.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<i64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Curves,
    Quiver,
    /// φ ∘ Γ and φ ∘ Γ₀ for the given (p, q).
    Image,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    /// h_x = b f_x - a g_x, h_y = b f_y - a g_y
    Standard,
    /// h_x = b f_x - a f_y, h_y = b g_x - a g_y (transposed; generally not a first integral)
    Transposed,
}

impl From<ConventionArg> for GradientConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Standard => GradientConvention::Standard,
            ConventionArg::Transposed => GradientConvention::Transposed,
        }
    }
}

/// Contents of `--config`. Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    pub field: Option<String>,
    pub curve: Option<String>,
    pub curves: Option<Vec<String>>,
    pub map: Option<String>,
    pub psi: Option<String>,
    pub target: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub p: Option<i64>,
    pub q: Option<i64>,
    pub sweep: Option<bool>,
    pub pairs: Option<Vec<(i64, i64)>>,
    pub domain: Option<String>,
    pub res: Option<usize>,
    pub anchor: Option<[f64; 2]>,
    pub convention: Option<ConventionArg>,
    pub flow_time: Option<f64>,
    pub grid: Option<usize>,
    pub levels: Option<usize>,
    pub kind: Option<PlotKind>,
    pub samples: Option<usize>,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: FileTolerances,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileTolerances {
    pub tol: Option<f64>,
    pub snap_tol: Option<f64>,
    pub error_tol: Option<f64>,
    pub zero_tol: Option<f64>,
    pub oracle_tol: Option<f64>,
    pub min_panels: Option<usize>,
    pub max_panels: Option<usize>,
}

/// Resolved tolerances, echoed in every result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    pub tol: f64,
    pub snap_tol: f64,
    pub error_tol: f64,
    pub zero_tol: f64,
    pub oracle_tol: f64,
    pub min_panels: usize,
    pub max_panels: usize,
    /// Fixed: relative finite-difference step.
    pub fd_rel_step: f64,
    /// Fixed: largest accepted curl of a gradient spec.
    pub curl_tol: f64,
    /// Fixed: RK4 step of the flow check.
    pub rk4_step: f64,
}

impl Tolerances {
    pub fn resolve(flags: &ToleranceFlags, file: &FileTolerances) -> Result<Self, String> {
        let d = IndexOptions::default();
        let t = Tolerances {
            tol: flags.tol.or(file.tol).unwrap_or(d.tol),
            snap_tol: flags.snap_tol.or(file.snap_tol).unwrap_or(d.snap_tol),
            error_tol: flags.error_tol.or(file.error_tol).unwrap_or(d.error_tol),
            zero_tol: flags.zero_tol.or(file.zero_tol).unwrap_or(EPS_ZERO),
            oracle_tol: flags.oracle_tol.or(file.oracle_tol).unwrap_or(ORACLE_TOL),
            min_panels: flags.min_panels.or(file.min_panels).unwrap_or(d.min_panels),
            max_panels: flags.max_panels.or(file.max_panels).unwrap_or(d.max_panels),
            fd_rel_step: FD_REL_STEP,
            curl_tol: EPS_CURL,
            rk4_step: RK4_STEP,
        };
        for (name, v) in [
            ("tol", t.tol),
            ("snap_tol", t.snap_tol),
            ("error_tol", t.error_tol),
            ("zero_tol", t.zero_tol),
            ("oracle_tol", t.oracle_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        if t.snap_tol > t.error_tol {
            return Err("snap_tol must not exceed error_tol".into());
        }
        if t.min_panels < 8 || t.max_panels < t.min_panels {
            return Err(format!(
                "panel limits must satisfy 8 <= min_panels <= max_panels, got {} and {}",
                t.min_panels, t.max_panels
            ));
        }
        Ok(t)
    }

    pub fn index_options(&self) -> IndexOptions {
        IndexOptions {
            tol: self.tol,
            min_panels: self.min_panels,
            max_panels: self.max_panels,
            snap_tol: self.snap_tol,
            error_tol: self.error_tol,
            zero_tol: self.zero_tol,
        }
    }
}

pub fn load_file(path: Option<&PathBuf>) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
}

/// Missing required parameter.
pub fn required<T>(value: Option<T>, name: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing required parameter `{name}`"))
}
