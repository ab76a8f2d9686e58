//! Batches of master-equation runs: sizing, the budget guard, parallel
//! execution and the result table.

use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use purcell_core::lindblad::{simulate_rate, simulation_extent, DriveSpec, FitModel, RateMode, SimulationConfig, SimulationResult};
use purcell_core::ode::Tolerances;
use purcell_core::PurcellError;
use rayon::prelude::*;

use crate::cli::{RunArgs, SolverArgs};
use crate::points::{Drive, Point};
use crate::table::{num, Table};

/// Seconds per unit of `dim² × spectral_scale × horizon`, measured for the
/// explicit integrator on one core.
const COST_PER_UNIT: f64 = 1.7e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub g_over_2pi_hz: f64,
    pub mode: RateMode,
    pub cutoff: Option<usize>,
    pub tol: Tolerances,
    /// Longest fit window in units of `1/κ`.
    pub max_window: f64,
    pub fit_model: FitModel,
    pub check_convergence: bool,
}

impl Settings {
    pub fn from_args(s: &SolverArgs, g_over_2pi_hz: f64) -> Self {
        Self {
            g_over_2pi_hz,
            mode: s.mode.into(),
            cutoff: s.cutoff,
            tol: Tolerances { rel: s.tol_rel, abs: s.tol_abs },
            max_window: s.max_window,
            fit_model: s.fit_model.into(),
            check_convergence: s.check_convergence,
        }
    }

    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("mode={}", mode_name(self.mode)),
            format!("cutoff={}", self.cutoff.map_or("auto".to_string(), |c| c.to_string())),
            format!("tol_rel={} tol_abs={}", num(self.tol.rel), num(self.tol.abs)),
            format!("max_window_over_kappa={}", num(self.max_window)),
            format!("fit_model={}", if self.fit_model == FitModel::Linear { "linear" } else { "rate-equation" }),
            format!("check_convergence={}", self.check_convergence),
        ]
    }
}

pub fn mode_name(mode: RateMode) -> &'static str {
    match mode {
        RateMode::Relaxation => "relaxation",
        RateMode::Excitation => "excitation",
    }
}

pub fn config(point: &Point, settings: &Settings) -> Result<SimulationConfig> {
    if !(settings.max_window > 0.0) {
        bail!("--max-window must be positive");
    }
    if !(settings.tol.rel > 0.0 && settings.tol.abs > 0.0) {
        bail!("tolerances must be positive");
    }
    let base = point.params(settings.g_over_2pi_hz);
    let (params, drive) = match point.drive {
        Drive::PhotonNumber(n) => (base, DriveSpec::TargetPhotonNumber(n)),
        Drive::EpsilonHz(e) => (base.with_drive(std::f64::consts::TAU * e), DriveSpec::Epsilon),
    };
    let mut cfg = SimulationConfig::new(params, drive, settings.mode);
    cfg.cutoff = settings.cutoff;
    cfg.evolve.tol = settings.tol;
    cfg.max_fit_duration = Some(settings.max_window / params.kappa);
    cfg.fit_model = settings.fit_model;
    cfg.check_convergence = settings.check_convergence;
    Ok(cfg)
}

/// Single-core wall-time estimate for one run. Tighter tolerances cost
/// roughly a factor 10^(1/5) per decade for the fifth-order integrator.
pub fn estimate_seconds(cfg: &SimulationConfig) -> Option<f64> {
    let ext = simulation_extent(cfg).ok()?;
    let dim = 2.0 * (ext.cutoff as f64 + 1.0);
    let tol_factor = (1e-8 / cfg.evolve.tol.rel).max(1e-3).powf(0.2);
    let reruns = if cfg.check_convergence { 2.2 } else { 1.0 };
    Some(COST_PER_UNIT * dim * dim * ext.spectral_scale * ext.horizon * tol_factor * reruns)
}

/// Refuses the batch when its estimated wall time exceeds the budget.
pub fn check_budget(cfgs: &[SimulationConfig], run: &RunArgs) -> Result<f64> {
    if run.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let per_run: Vec<f64> = cfgs.iter().map(|c| estimate_seconds(c).unwrap_or(0.0)).collect();
    let total: f64 = per_run.iter().sum();
    let workers = run.jobs.min(std::thread::available_parallelism().map_or(1, |n| n.get())).max(1);
    let wall = (total / workers as f64).max(per_run.iter().copied().fold(0.0, f64::max));
    if wall > run.budget_seconds {
        bail!(
            "estimated run time {:.0} s exceeds the budget of {:.0} s ({} points, longest {:.0} s); \
             reduce the grid, lower --max-window, use --fast, or raise --budget-seconds",
            wall,
            run.budget_seconds,
            cfgs.len(),
            per_run.iter().copied().fold(0.0, f64::max)
        );
    }
    Ok(wall)
}

pub struct Outcome {
    pub result: std::result::Result<SimulationResult, PurcellError>,
    pub elapsed: Duration,
}

pub fn run_all(cfgs: &[SimulationConfig], jobs: usize) -> Result<Vec<Outcome>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().context("starting worker pool")?;
    Ok(pool.install(|| {
        cfgs.par_iter()
            .map(|cfg| {
                let start = Instant::now();
                let result = simulate_rate(cfg);
                Outcome { result, elapsed: start.elapsed() }
            })
            .collect()
    }))
}

pub fn status(result: &std::result::Result<SimulationResult, PurcellError>) -> &'static str {
    match result {
        Ok(_) => "ok",
        Err(PurcellError::FitQuality(_)) => "fit_rejected",
        Err(PurcellError::TruncationRisk(_)) => "truncation",
        Err(_) => "error",
    }
}

pub const HEADER: &[&str] = &[
    "delta_over_g",
    "kappa_over_g",
    "mode",
    "target_n_bar",
    "epsilon_hz",
    "measured_n_bar",
    "n_bar_over_ncrit",
    "rate_per_s",
    "rate_over_gamma_p",
    "analytic_over_gamma_p",
    "r_squared",
    "t_start_s",
    "t_end_s",
    "cutoff",
    "status",
];

pub fn row(point: &Point, settings: &Settings, outcome: &Outcome) -> Vec<String> {
    let mut out = vec![num(point.delta_over_g), num(point.kappa_over_g), mode_name(settings.mode).into()];
    match &outcome.result {
        Ok(r) => {
            let analytic = match settings.mode {
                RateMode::Relaxation => r.analytic.gamma_r,
                RateMode::Excitation => r.analytic.gamma_e,
            };
            out.extend([
                num(r.target_n_bar),
                num(r.params.epsilon / std::f64::consts::TAU),
                num(r.measured_n_bar),
                purcell_core::dressed::critical_photon_number(&r.params).map_or(String::new(), |nc| num(r.measured_n_bar / nc)),
                num(r.fit.rate),
                num(r.fit.rate / r.gamma_p),
                num(analytic / r.gamma_p),
                num(r.fit.r_squared),
                num(r.fit.t_start),
                num(r.fit.t_end),
                r.cutoff.to_string(),
            ]);
        }
        Err(_) => {
            let (n, e) = point.drive_label();
            out.extend([n, e]);
            out.extend(std::iter::repeat_n(String::new(), 9));
        }
    }
    out.push(status(&outcome.result).into());
    out
}

/// Result table plus the failure messages and wall times as trailer lines.
pub fn table(points: &[Point], settings: &Settings, outcomes: &[Outcome], preamble: Vec<String>) -> Table {
    let mut t = Table::new(HEADER);
    t.preamble = preamble;
    t.preamble.extend(settings.echo());
    let mut total = Duration::ZERO;
    for (k, (p, o)) in points.iter().zip(outcomes).enumerate() {
        t.push(row(p, settings, o));
        total += o.elapsed;
        if let Err(e) = &o.result {
            t.trailer.push(format!("row {}: {e}", k + 1));
        }
        t.trailer.push(format!("row {} wall_time_s={:.3}", k + 1, o.elapsed.as_secs_f64()));
    }
    t.trailer.push(format!("total_wall_time_s={:.3}", total.as_secs_f64()));
    t
}
