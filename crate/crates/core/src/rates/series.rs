//! Truncated expansions of the averaged rates in powers of `λ = g/Δ`.
//!
//! Both the ladder-averaging route and the transformed master equation give
//! the same polynomials, so one coefficient table serves both.

use crate::error::{invalid, Result};
use crate::hilbert::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    Relax,
    Excite,
}

/// `rate = κ n̄^nbar_power λ^lead_power Σ_k λ^{2k} P_k(n̄)`, with the
/// polynomial `P_k` stored by ascending power of `n̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTable {
    pub lead_power: u32,
    pub nbar_power: i32,
    pub terms: &'static [&'static [f64]],
}

pub const RELAX_SERIES: SeriesTable = SeriesTable {
    lead_power: 2,
    nbar_power: 0,
    terms: &[
        &[1.0],
        &[-3.0, -6.0],
        &[10.0, 62.0, 31.0],
        &[-35.0, -520.0, -675.0, -150.0],
    ],
};

pub const EXCITE_SERIES: SeriesTable = SeriesTable {
    lead_power: 6,
    nbar_power: 2,
    terms: &[&[1.0], &[-15.0, -10.0], &[159.0, 276.0, 69.0]],
};

impl SeriesTable {
    pub fn for_kind(kind: SeriesKind) -> &'static SeriesTable {
        match kind {
            SeriesKind::Relax => &RELAX_SERIES,
            SeriesKind::Excite => &EXCITE_SERIES,
        }
    }

    pub fn max_order(&self) -> u32 {
        self.lead_power + 2 * (self.terms.len() as u32 - 1)
    }

    /// Coefficient polynomial of `λ^power` (empty when absent).
    pub fn coefficient(&self, power: u32) -> &'static [f64] {
        if power < self.lead_power || (power - self.lead_power) % 2 == 1 {
            return &[];
        }
        self.terms.get(((power - self.lead_power) / 2) as usize).copied().unwrap_or(&[])
    }

    /// Dimensionless `rate/κ` truncated at `λ^order`.
    pub fn evaluate(&self, lambda: f64, n_bar: f64, order: u32) -> f64 {
        let l2 = lambda * lambda;
        let mut sum = 0.0;
        let mut lp = 1.0;
        for (k, poly) in self.terms.iter().enumerate() {
            if self.lead_power + 2 * k as u32 > order {
                break;
            }
            let p = poly.iter().rev().fold(0.0, |acc, &c| acc * n_bar + c);
            sum += lp * p;
            lp *= l2;
        }
        lambda.powi(self.lead_power as i32) * n_bar.powi(self.nbar_power) * sum
    }
}

/// Whether `λ²(2n̄+1) < 1`, the regime where the expansion can be trusted.
pub fn series_validity(n_bar: f64, params: &SystemParams) -> bool {
    match params.lambda() {
        Ok(l) => l * l * (2.0 * n_bar + 1.0) < 1.0,
        Err(_) => false,
    }
}

/// Series rate truncated at `λ^order`. Relaxation accepts orders 2 to 8,
/// excitation 6 to 10.
pub fn rate_series(kind: SeriesKind, n_bar: f64, params: &SystemParams, order: u32) -> Result<f64> {
    params.validate()?;
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return invalid(format!("mean photon number must be finite and >= 0, got {n_bar}"));
    }
    let table = SeriesTable::for_kind(kind);
    if order < table.lead_power || order > table.max_order() {
        return invalid(format!(
            "{kind:?} series supports orders {} to {}, got {order}",
            table.lead_power,
            table.max_order()
        ));
    }
    let lambda = params.lambda()?;
    Ok(params.kappa * table.evaluate(lambda, n_bar, order))
}
