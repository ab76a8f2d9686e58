use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use purcell_core::lindblad::{FitModel, RateMode};
use purcell_core::rates::Regime;

#[derive(Debug, Parser)]
#[command(name = "purcell", version, about = "Purcell relaxation and excitation rates of a driven, dispersively coupled qubit")]
pub struct Cli {
    /// Flat `key=value` file mirroring the long flags; flags on the command
    /// line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form, series or asymptotic rates on a parameter grid.
    Rates(RatesArgs),
    /// Master-equation simulation with fitted rates.
    Simulate(SimulateArgs),
    /// Grid sweep with any method, including `simulate`.
    Sweep(SweepArgs),
    /// Write the CSV families behind one figure.
    Reproduce(ReproduceArgs),
}

/// Grid values: comma-separated numbers or `start:stop:count` ranges.
#[derive(Debug, Args, Clone)]
pub struct PhysicsArgs {
    /// Detuning Δ/g.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid, allow_negative_numbers = true, required = true)]
    pub delta_over_g: Vec<Grid>,
    /// Resonator decay κ/g.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid, allow_negative_numbers = true, default_value = "1")]
    pub kappa_over_g: Vec<Grid>,
    /// Coupling g/2π in Hz; internally g = 2π × this in rad/s.
    #[arg(long, default_value_t = 50e6)]
    pub g_over_2pi_hz: f64,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct DriveArgs {
    /// Mean photon number n̄ of the drive-induced field.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid, allow_negative_numbers = true)]
    pub nbar: Vec<Grid>,
    /// Drive amplitude ε/2π in Hz (resonant drive).
    #[arg(long, value_delimiter = ',', value_parser = parse_grid, allow_negative_numbers = true)]
    pub epsilon: Vec<Grid>,
}

#[derive(Debug, Args, Clone)]
pub struct SeriesArgs {
    /// Relaxation series order (highest power of λ, 2 to 8).
    #[arg(long, default_value_t = 8)]
    pub order: u32,
    /// Excitation series order (6 to 10).
    #[arg(long, default_value_t = 10)]
    pub excite_order: u32,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Relaxation)]
    pub mode: ModeArg,
    /// Fock cutoff; default grows with n̄.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_rel: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_abs: f64,
    /// Longest fit window, in units of 1/κ.
    #[arg(long, default_value_t = 10.0)]
    pub max_window: f64,
    #[arg(long, value_enum, default_value_t = FitModelArg::Linear)]
    pub fit_model: FitModelArg,
    /// Re-run at cutoff + 10 until the rate moves by less than 1%.
    #[arg(long)]
    pub check_convergence: bool,
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Worker threads for independent points.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Refuse runs whose estimated single-core time exceeds this.
    #[arg(long, default_value_t = 1800.0)]
    pub budget_seconds: f64,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, value_parser = parse_method, default_value = "analytic")]
    pub method: Method,
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub physics: PhysicsArgs,
    #[command(flatten)]
    pub drive: DriveArgs,
    #[arg(long, value_parser = parse_method, default_value = "analytic")]
    pub method: Method,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    /// Fewer simulated points.
    #[arg(long)]
    pub fast: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write a gnuplot script next to the CSVs.
    #[arg(long)]
    pub gnuplot: bool,
    #[arg(long, default_value_t = 50e6)]
    pub g_over_2pi_hz: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_rel: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol_abs: f64,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Relaxation,
    Excitation,
}

impl From<ModeArg> for RateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Relaxation => RateMode::Relaxation,
            ModeArg::Excitation => RateMode::Excitation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModelArg {
    Linear,
    RateEquation,
}

impl From<FitModelArg> for FitModel {
    fn from(m: FitModelArg) -> Self {
        match m {
            FitModelArg::Linear => FitModel::Linear,
            FitModelArg::RateEquation => FitModel::RateEquation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Poisson-averaged closed form.
    Analytic,
    /// Closed form at real `n = n̄`.
    RealN,
    Series,
    Approximation(Regime),
    Simulate,
}

impl Method {
    pub fn label(self) -> String {
        match self {
            Method::Analytic => "analytic".into(),
            Method::RealN => "real_n".into(),
            Method::Series => "series".into(),
            Method::Approximation(r) => format!("approximation:{}", r.name()),
            Method::Simulate => "simulate".into(),
        }
    }
}

pub const METHOD_HELP: &str =
    "analytic, real_n, series, approximation:leading, approximation:large_nbar, approximation:strong_suppression, simulate";

fn parse_method(s: &str) -> Result<Method, String> {
    let m = match s {
        "analytic" => Method::Analytic,
        "real_n" => Method::RealN,
        "series" => Method::Series,
        "simulate" => Method::Simulate,
        "approximation:leading" => Method::Approximation(Regime::Leading),
        "approximation:large_nbar" => Method::Approximation(Regime::LargeNbar),
        "approximation:strong_suppression" => Method::Approximation(Regime::StrongSuppression),
        _ => return Err(format!("unknown method '{s}'; expected one of: {METHOD_HELP}")),
    };
    Ok(m)
}

/// One grid token, already expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => {
            let v = number(v)?;
            if v.is_finite() {
                Ok(Grid(vec![v]))
            } else {
                Err(format!("'{s}' is not finite"))
            }
        }
        [a, b, n] => {
            let (a, b) = (number(a)?, number(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?;
            if n < 2 || !a.is_finite() || !b.is_finite() {
                return Err(format!("range '{s}' needs finite ends and at least 2 points"));
            }
            Ok(Grid((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()))
        }
        _ => Err(format!("'{s}' is neither a number nor start:stop:count")),
    }
}

pub fn flatten(grids: &[Grid]) -> Vec<f64> {
    grids.iter().flat_map(|g| g.0.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_tokens() {
        assert_eq!(parse_grid("2.5").unwrap().0, vec![2.5]);
        assert_eq!(parse_grid("0:1:5").unwrap().0, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("0:1:1").is_err());
        assert!(parse_grid("x").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("inf").is_err());
    }

    #[test]
    fn methods() {
        assert_eq!(parse_method("series").unwrap(), Method::Series);
        assert_eq!(
            parse_method("approximation:large_nbar").unwrap(),
            Method::Approximation(Regime::LargeNbar)
        );
        assert!(parse_method("exact").is_err());
        for m in ["analytic", "real_n", "approximation:leading", "simulate"] {
            assert_eq!(parse_method(m).unwrap().label(), m);
        }
    }

    #[test]
    fn cli_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
