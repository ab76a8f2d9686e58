use crate::dressed::Ladder;
use crate::error::{invalid, PurcellError, Result};
use crate::hilbert::{default_cutoff, SpaceDescriptor, SystemParams};
use crate::ode::OdeStats;
use crate::rates::{averaged_rates, drive_for_photon_number, steady_photon_number, RateSet};
use crate::single_excitation::{purcell_rate_nodrive, NoDriveRate};

use super::density::{initial_state, InitialShift};
use super::evolve::{evolve, EvolveOptions, Trajectory};
use super::fit::{extract_rate, measure_photon_number, FitModel, FitPolicy, RateFit, RateMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriveSpec {
    /// Use `params.epsilon` as given.
    Epsilon,
    /// Pick ε so that the photon-number balance gives this `n̄`.
    TargetPhotonNumber(f64),
}

/// One simulated rate point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub params: SystemParams,
    pub drive: DriveSpec,
    pub mode: RateMode,
    /// Fock cutoff; defaults to [`default_cutoff`] of the expected `n̄`.
    pub cutoff: Option<usize>,
    pub evolve: EvolveOptions,
    pub shift: InitialShift,
    /// Fit window opening, in units of `1/κ`.
    pub start_after: f64,
    /// Upper bound on the fit window length (same time unit as `1/κ`).
    pub max_fit_duration: Option<f64>,
    pub fit_model: FitModel,
    /// Excitation windows span this fraction of `1/(Γ_R + γ_E)`.
    pub excitation_window: f64,
    /// Samples recorded inside the fit window.
    pub samples: usize,
    /// Re-run at `cutoff + 10` and escalate until the rate moves < 1%.
    pub check_convergence: bool,
}

impl SimulationConfig {
    pub fn new(params: SystemParams, drive: DriveSpec, mode: RateMode) -> Self {
        Self {
            params,
            drive,
            mode,
            cutoff: None,
            evolve: EvolveOptions { positivity_stride: 10, ..EvolveOptions::default() },
            shift: InitialShift::Refined,
            start_after: 5.0,
            max_fit_duration: None,
            fit_model: FitModel::Linear,
            excitation_window: 0.1,
            samples: 200,
            check_convergence: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceCheck {
    pub cutoff: usize,
    pub rate: f64,
    pub relative_change: f64,
}

/// Sizing of a run before it starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationExtent {
    pub epsilon: f64,
    pub target_n_bar: f64,
    pub cutoff: usize,
    /// Final time of the integration grid.
    pub horizon: f64,
    /// Fastest rate in the generator, `√(Δ² + 4g²(N+1)) + κN/2`; the
    /// explicit integrator's step count scales with `horizon × this`.
    pub spectral_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub fit: RateFit,
    pub params: SystemParams,
    pub target_n_bar: f64,
    pub measured_n_bar: f64,
    pub cutoff: usize,
    /// Averaged closed-form rates at the measured `n̄`.
    pub analytic: RateSet,
    pub gamma_p: f64,
    pub convergence: Vec<ConvergenceCheck>,
    pub stats: OdeStats,
    pub trajectory: Trajectory,
}

const ESCALATIONS: usize = 3;
const CONVERGENCE_STEP: usize = 10;
const CONVERGENCE_TOL: f64 = 0.01;

struct Plan {
    params: SystemParams,
    target_n_bar: f64,
    grid: Vec<f64>,
    policy: FitPolicy,
}

fn plan(cfg: &SimulationConfig) -> Result<Plan> {
    let base = cfg.params;
    base.validate()?;
    if !(base.kappa > 0.0) {
        return invalid("rate simulations need kappa > 0");
    }
    if cfg.samples < 5 || !(cfg.start_after >= 0.0) || !(cfg.excitation_window > 0.0) {
        return invalid("simulation needs >= 5 samples, start_after >= 0, excitation_window > 0");
    }
    let params = match cfg.drive {
        DriveSpec::Epsilon => base,
        DriveSpec::TargetPhotonNumber(n) => base.with_drive(drive_for_photon_number(n, &base)?),
    };
    let target_n_bar = steady_photon_number(&params)?[0];
    let est = averaged_rates(target_n_bar, &params)?;
    let total = est.gamma_r + est.gamma_e;
    if !(total > 0.0) {
        return invalid("estimated rates vanish; nothing to fit");
    }
    let floor = est.gamma_e / total;
    let t_start = cfg.start_after / params.kappa;
    let mut duration = match cfg.mode {
        RateMode::Relaxation => {
            let to_decay = 1.0 / est.gamma_r;
            let to_floor = if 3.0 * floor < 1.0 { (1.0 / (3.0 * floor)).ln() / total } else { 0.0 };
            to_decay.min(to_floor)
        }
        RateMode::Excitation => cfg.excitation_window / total,
    };
    if let Some(cap) = cfg.max_fit_duration {
        duration = duration.min(cap);
    }
    if !(duration > 0.0) {
        return Err(PurcellError::FitQuality("saturation floor leaves no fit window".into()));
    }
    let dt = duration / cfg.samples as f64;
    let steps = ((t_start + duration) / dt).ceil() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let mut policy = FitPolicy::for_kappa(params.kappa).with_saturation_floor(floor);
    policy.t_start = grid[(t_start / dt).round() as usize];
    policy = policy.with_model(cfg.fit_model);
    if let Some(cap) = cfg.max_fit_duration {
        policy = policy.with_max_duration(cap);
    }
    Ok(Plan { params, target_n_bar, grid, policy })
}

/// Drive, cutoff and horizon that [`simulate_rate`] would use, without
/// integrating. Convergence re-runs are not included.
pub fn simulation_extent(cfg: &SimulationConfig) -> Result<SimulationExtent> {
    let plan = plan(cfg)?;
    let cutoff = cfg.cutoff.unwrap_or_else(|| default_cutoff(plan.target_n_bar));
    let p = &plan.params;
    let n = cutoff as f64;
    Ok(SimulationExtent {
        epsilon: p.epsilon,
        target_n_bar: plan.target_n_bar,
        cutoff,
        horizon: *plan.grid.last().unwrap_or(&0.0),
        spectral_scale: (p.delta * p.delta + 4.0 * p.g * p.g * (n + 1.0)).sqrt() + 0.5 * p.kappa * n,
    })
}

fn run_once(cfg: &SimulationConfig, plan: &Plan, cutoff: usize) -> Result<(RateFit, Trajectory)> {
    let space = SpaceDescriptor::new(cutoff);
    let ladder = match cfg.mode {
        RateMode::Relaxation => Ladder::Excited,
        RateMode::Excitation => Ladder::Ground,
    };
    let rho0 = initial_state(ladder, &plan.params, space, cfg.shift)?;
    let traj = evolve(&rho0, &plan.params, &plan.grid, &cfg.evolve)?;
    let pops = match cfg.mode {
        RateMode::Relaxation => &traj.rho_ee_bar,
        RateMode::Excitation => &traj.rho_gg_bar,
    };
    let fit = extract_rate(&traj.times, pops, cfg.mode, &plan.policy)?;
    Ok((fit, traj))
}

/// Simulate one point: pick the drive, build the coherent dressed initial
/// state, integrate, fit the rate and measure `n̄` over the fit window.
pub fn simulate_rate(cfg: &SimulationConfig) -> Result<SimulationResult> {
    let plan = plan(cfg)?;
    let mut cutoff = cfg.cutoff.unwrap_or_else(|| default_cutoff(plan.target_n_bar));
    let (mut fit, mut traj) = run_once(cfg, &plan, cutoff)?;
    let mut convergence = Vec::new();
    if cfg.check_convergence {
        for _ in 0..ESCALATIONS {
            let next = cutoff + CONVERGENCE_STEP;
            let (f2, t2) = run_once(cfg, &plan, next)?;
            let change = (f2.rate - fit.rate).abs() / f2.rate.abs();
            convergence.push(ConvergenceCheck { cutoff: next, rate: f2.rate, relative_change: change });
            cutoff = next;
            fit = f2;
            traj = t2;
            if change < CONVERGENCE_TOL {
                break;
            }
        }
        if convergence.last().is_some_and(|c| c.relative_change >= CONVERGENCE_TOL) {
            return Err(PurcellError::TruncationRisk(format!(
                "fitted rate still moves by more than 1% at cutoff {cutoff}"
            )));
        }
    }
    let measured_n_bar = measure_photon_number(&traj, plan.policy.t_start)?;
    let analytic = averaged_rates(measured_n_bar, &plan.params)?;
    let gamma_p = purcell_rate_nodrive(&plan.params, NoDriveRate::EigenstateOverlap)?;
    Ok(SimulationResult {
        fit,
        params: plan.params,
        target_n_bar: plan.target_n_bar,
        measured_n_bar,
        cutoff,
        analytic,
        gamma_p,
        convergence,
        stats: traj.stats,
        trajectory: traj,
    })
}
