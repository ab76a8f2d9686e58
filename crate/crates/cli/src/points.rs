//! Parameter points shared by the subcommands, in units of g.

use std::f64::consts::TAU;

use anyhow::{bail, Result};
use purcell_core::dressed::critical_photon_number;
use purcell_core::rates::{
    averaged_rates, approximate_rates, drive_for_photon_number, real_n_rates, series_rates, steady_photon_number,
    RateSet,
};
use purcell_core::single_excitation::{purcell_rate_nodrive, NoDriveRate};
use purcell_core::SystemParams;

use crate::cli::{flatten, DriveArgs, Method, PhysicsArgs, SeriesArgs};
use crate::table::num;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    PhotonNumber(f64),
    /// `ε/2π` in Hz.
    EpsilonHz(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub delta_over_g: f64,
    pub kappa_over_g: f64,
    pub drive: Drive,
}

impl Point {
    /// Undriven parameters in rad/s.
    pub fn params(&self, g_over_2pi_hz: f64) -> SystemParams {
        let g = TAU * g_over_2pi_hz;
        SystemParams::new(g, self.delta_over_g * g, self.kappa_over_g * g)
    }

    /// Parameters with the drive applied, and the photon number it gives.
    pub fn driven(&self, g_over_2pi_hz: f64) -> Result<(SystemParams, f64)> {
        let base = self.params(g_over_2pi_hz);
        Ok(match self.drive {
            Drive::PhotonNumber(n) => (base.with_drive(drive_for_photon_number(n, &base)?), n),
            Drive::EpsilonHz(e) => {
                let p = base.with_drive(TAU * e);
                let n = steady_photon_number(&p)?[0];
                (p, n)
            }
        })
    }

    pub fn drive_label(&self) -> (String, String) {
        match self.drive {
            Drive::PhotonNumber(n) => (num(n), String::new()),
            Drive::EpsilonHz(e) => (String::new(), num(e)),
        }
    }
}

pub fn grid(physics: &PhysicsArgs, drive: &DriveArgs) -> Result<Vec<Point>> {
    if !(physics.g_over_2pi_hz > 0.0) || !physics.g_over_2pi_hz.is_finite() {
        bail!("--g-over-2pi-hz must be positive");
    }
    let deltas = flatten(&physics.delta_over_g);
    let kappas = flatten(&physics.kappa_over_g);
    let drives: Vec<Drive> = if drive.nbar.is_empty() {
        flatten(&drive.epsilon).into_iter().map(Drive::EpsilonHz).collect()
    } else {
        flatten(&drive.nbar).into_iter().map(Drive::PhotonNumber).collect()
    };
    if deltas.is_empty() || kappas.is_empty() || drives.is_empty() {
        bail!("parameter grids must be non-empty");
    }
    let mut out = Vec::with_capacity(deltas.len() * kappas.len() * drives.len());
    for &d in &deltas {
        for &k in &kappas {
            for &drive in &drives {
                out.push(Point { delta_over_g: d, kappa_over_g: k, drive });
            }
        }
    }
    Ok(out)
}

pub fn gamma_p(params: &SystemParams) -> Result<f64> {
    Ok(purcell_rate_nodrive(params, NoDriveRate::EigenstateOverlap)?)
}

pub fn analytic_rates(method: Method, series: &SeriesArgs, n_bar: f64, params: &SystemParams) -> Result<RateSet> {
    Ok(match method {
        Method::Analytic => averaged_rates(n_bar, params)?,
        Method::RealN => real_n_rates(n_bar, params)?,
        Method::Series => series_rates(n_bar, params, series.order, series.excite_order)?,
        Method::Approximation(regime) => approximate_rates(n_bar, params, regime)?,
        Method::Simulate => bail!("simulate is not an analytic method"),
    })
}

pub fn n_crit(params: &SystemParams) -> Result<f64> {
    Ok(critical_photon_number(params)?)
}

/// Common config echo lines.
pub fn echo_physics(physics: &PhysicsArgs, drive: &DriveArgs) -> Vec<String> {
    let list = |v: Vec<f64>| v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",");
    let mut out = vec![
        format!("delta_over_g={}", list(flatten(&physics.delta_over_g))),
        format!("kappa_over_g={}", list(flatten(&physics.kappa_over_g))),
        format!("g_over_2pi_hz={}", num(physics.g_over_2pi_hz)),
    ];
    if drive.nbar.is_empty() {
        out.push(format!("epsilon_over_2pi_hz={}", list(flatten(&drive.epsilon))));
    } else {
        out.push(format!("nbar={}", list(flatten(&drive.nbar))));
    }
    out
}
