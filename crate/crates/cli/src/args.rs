use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use radex::genderiv::DerivativeKind;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "radex", version, about = "Generalized derivatives and radial descent for nonsmooth functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in functions and their definitions.
    ListFunctions(ListArgs),
    /// Estimate derivatives in a few directions.
    Derive(DeriveArgs),
    /// Tabulate derivatives over a grid of directions.
    Sweep(SweepArgs),
    /// Construct a weak subgradient, or verify a given pair.
    Weaksub(WeaksubArgs),
    /// Derivative chain, equality flags and support conditions.
    Regularity(RegularityArgs),
    /// Global descent driven by the radial epiderivative.
    Minimize(MinimizeArgs),
}

/// Comma-separated coordinates, e.g. `-1,0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

impl FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let coords = s
            .split(',')
            .map(|c| {
                let c = c.trim();
                match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(format!("`{c}` is not a finite number")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Coords(coords))
    }
}

/// `all`, or a comma list of derivative kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct KindList(pub Vec<DerivativeKind>);

impl FromStr for KindList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(KindList(DerivativeKind::ALL.to_vec()));
        }
        let mut kinds = Vec::new();
        for part in s.split(',') {
            let k: DerivativeKind = part.trim().parse()?;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        Ok(KindList(kinds))
    }
}

/// `a:b:step`, inclusive of both ends when `step` divides `b − a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub step: f64,
}

const MAX_GRID: f64 = 1e6;

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.b - self.a) / self.step + 1e-9).floor() as usize;
        // Round so that −1 + 10·0.1 lands on 0 rather than 1e-16.
        (0..=n).map(|k| crate::output::round12(self.a + k as f64 * self.step)).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err("grid must look like a:b:step".into());
        };
        let num = |t: &str| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or(format!("`{t}` is not a finite number"));
        let g = GridSpec {
            a: num(a)?,
            b: num(b)?,
            step: num(step)?,
        };
        if !(g.step > 0.0) || g.b < g.a {
            return Err("grid needs a ≤ b and step > 0".into());
        }
        if (g.b - g.a) / g.step > MAX_GRID {
            return Err(format!("grid has more than {MAX_GRID} points"));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L2,
    L1,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Selector {
    /// Built-in function name (see list-functions).
    #[arg(long = "fn", value_name = "NAME")]
    pub name: Option<String>,
    /// Expression in x1, x2, ...
    #[arg(long, value_name = "SOURCE", allow_hyphen_values = true)]
    pub expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct Target {
    #[command(flatten)]
    pub selector: Selector,
    /// Dimension of an --expr function.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Base point, comma separated.
    #[arg(long, value_name = "X", allow_hyphen_values = true)]
    pub at: Coords,
}

/// Overrides of the sampling schedule.
#[derive(Debug, Args, Default)]
pub struct ScheduleArgs {
    #[arg(long, value_name = "T")]
    pub t_min: Option<f64>,
    #[arg(long, value_name = "T")]
    pub t_max: Option<f64>,
    /// Log-grid points per decade.
    #[arg(long, value_name = "N")]
    pub ppd: Option<usize>,
    /// Shrinking radii, comma separated, decreasing.
    #[arg(long, value_name = "R")]
    pub ladder: Option<Coords>,
    /// Perturbations per shell.
    #[arg(long, value_name = "N")]
    pub m: Option<usize>,
    /// Neighborhood samples per radius.
    #[arg(long, value_name = "N")]
    pub samples: Option<usize>,
    #[arg(long, value_name = "R")]
    pub window_ratio: Option<f64>,
    /// Refinement rounds of the radial estimator.
    #[arg(long, value_name = "N")]
    pub refine: Option<usize>,
    #[arg(long, value_name = "TOL")]
    pub tol: Option<f64>,
    /// Magnitude beyond which a trend counts as divergent.
    #[arg(long, value_name = "D")]
    pub divergence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to a file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[command(flatten)]
    pub target: Target,
    /// Direction, comma separated; repeatable.
    #[arg(long = "dir", value_name = "H", allow_hyphen_values = true, required = true)]
    pub dirs: Vec<Coords>,
    /// radial, sub, dir, clarke, a comma list of them, or all.
    #[arg(long, default_value = "all")]
    pub kind: KindList,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long, default_value = "all")]
    pub kinds: KindList,
    /// Scalar directions a:b:step (1D only).
    #[arg(long, value_name = "A:B:STEP", allow_hyphen_values = true, conflicts_with = "dirs")]
    pub grid: Option<GridSpec>,
    /// Explicit directions; the default grid is used when neither is given.
    #[arg(long = "dir", value_name = "H", allow_hyphen_values = true)]
    pub dirs: Vec<Coords>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WeaksubArgs {
    #[command(flatten)]
    pub target: Target,
    /// Construction direction.
    #[arg(long = "dir", value_name = "H", allow_hyphen_values = true, required_unless_present = "v", conflicts_with = "v")]
    pub dir: Option<Coords>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = NormArg::L2)]
    pub norm: NormArg,
    /// Verify this slope instead of constructing one.
    #[arg(long, value_name = "V", allow_hyphen_values = true, requires = "c")]
    pub v: Option<Coords>,
    #[arg(long, value_name = "C", requires = "v")]
    pub c: Option<f64>,
    /// Largest c tried by the construction.
    #[arg(long, default_value_t = 1073741824.0)]
    pub c_max: f64,
    /// Membership sample size.
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    /// Half-width of the membership box.
    #[arg(long = "box", default_value_t = 1e6)]
    pub box_radius: f64,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[command(flatten)]
    pub target: Target,
    /// Chain directions; the default grid is used when absent.
    #[arg(long = "dir", value_name = "H", allow_hyphen_values = true)]
    pub dirs: Vec<Coords>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MinimizeArgs {
    #[command(flatten)]
    pub target: Target,
    /// Line-search horizon; defaults to 1e4·(1 + ‖x0‖).
    #[arg(long, value_name = "T")]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub descent_tol: f64,
    /// Certificate sample size.
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}
