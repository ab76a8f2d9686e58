use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};

use crate::cli::{DriveArgs, Method, PhysicsArgs, RatesArgs, RunArgs, SeriesArgs, SimulateArgs, SolverArgs, SweepArgs};
use crate::points::{analytic_rates, echo_physics, gamma_p, grid, n_crit, Point};
use crate::sim::{self, Settings};
use crate::table::{num, Table};

/// Command-line misuse that clap cannot express; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const RATE_HEADER: &[&str] = &[
    "delta_over_g",
    "kappa_over_g",
    "n_bar",
    "n_bar_over_ncrit",
    "gamma_R_over_gamma_P",
    "gamma_E_over_gamma_P",
    "method",
];

pub fn rate_row(point: &Point, method: Method, series: &SeriesArgs, g_over_2pi_hz: f64) -> Result<Vec<String>> {
    let (params, n_bar) = point.driven(g_over_2pi_hz)?;
    let gp = gamma_p(&point.params(g_over_2pi_hz))?;
    let r = analytic_rates(method, series, n_bar, &params)?;
    let label = match method {
        Method::Series => format!("series({},{})", series.order, series.excite_order),
        m => m.label(),
    };
    Ok(vec![
        num(point.delta_over_g),
        num(point.kappa_over_g),
        num(n_bar),
        num(n_bar / n_crit(&params)?),
        num(r.gamma_r / gp),
        num(r.gamma_e / gp),
        label,
    ])
}

fn rate_table(physics: &PhysicsArgs, drive: &DriveArgs, method: Method, series: &SeriesArgs) -> Result<Table> {
    let start = Instant::now();
    let mut t = Table::new(RATE_HEADER);
    t.comment(format!("purcell rates method={}", method.label()));
    t.preamble.extend(echo_physics(physics, drive));
    if method == Method::Series {
        t.comment(format!("order={} excite_order={}", series.order, series.excite_order));
    }
    t.comment("rates normalized by the undriven Purcell rate gamma_P");
    for p in grid(physics, drive)? {
        t.push(rate_row(&p, method, series, physics.g_over_2pi_hz)?);
    }
    t.trailer.push(format!("wall_time_s={:.3}", start.elapsed().as_secs_f64()));
    Ok(t)
}

pub fn rates(args: &RatesArgs) -> Result<()> {
    if args.method == Method::Simulate {
        bail!(UsageError("rates does not simulate; use `purcell simulate` or `purcell sweep --method simulate`".into()));
    }
    rate_table(&args.physics, &args.drive, args.method, &args.series)?.write(args.out.as_deref())
}

fn simulate_grid(
    physics: &PhysicsArgs,
    drive: &DriveArgs,
    solver: &SolverArgs,
    run: &RunArgs,
    out: Option<&Path>,
) -> Result<()> {
    let points = grid(physics, drive)?;
    let settings = Settings::from_args(solver, physics.g_over_2pi_hz);
    let cfgs = points.iter().map(|p| sim::config(p, &settings)).collect::<Result<Vec<_>>>()?;
    let estimate = sim::check_budget(&cfgs, run)?;
    let outcomes = sim::run_all(&cfgs, run.jobs)?;
    let mut preamble = vec!["purcell simulate".to_string()];
    preamble.extend(echo_physics(physics, drive));
    preamble.push(format!("jobs={} budget_seconds={}", run.jobs, num(run.budget_seconds)));
    let mut t = sim::table(&points, &settings, &outcomes, preamble);
    t.trailer.push(format!("estimated_wall_time_s={estimate:.1}"));
    t.write(out)?;
    if outcomes.iter().all(|o| o.result.is_err()) {
        bail!("no point produced a rate");
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    simulate_grid(&args.physics, &args.drive, &args.solver, &args.run, args.out.as_deref())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    match args.method {
        Method::Simulate => simulate_grid(&args.physics, &args.drive, &args.solver, &args.run, args.out.as_deref()),
        m => rate_table(&args.physics, &args.drive, m, &args.series)?.write(args.out.as_deref()),
    }
}
