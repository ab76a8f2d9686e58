//! Drive-dependent Purcell rates.
//!
//! A coherent drive leaves the resonator with a nearly Poisson photon
//! distribution over the dressed ladders. The relaxation rate `Γ_R` and the
//! excitation rate `γ_E` are the per-level jump rates averaged over that
//! distribution ([`averaged_rates`]); [`real_n_rates`] evaluates them at the
//! mean photon number instead, [`rate_series`] expands them in `λ = g/Δ`
//! and [`rate_approximation`] gives the asymptotic closed forms.
//!
//! The self-consistent photon number and the classical field equations live
//! in [`field`].

pub mod field;
pub mod series;

use std::fmt;

use crate::dressed::{critical_photon_number, excitation_rate_at, relaxation_rate_at};
use crate::error::{invalid, Result};
use crate::hilbert::SystemParams;

pub use field::{
    classical_field_dynamics, classical_field_dynamics_from, drive_for_photon_number,
    effective_detuning_three_level, steady_photon_number, steady_state, FieldAmplitudes,
    FieldSteadyState, FieldTrajectory, ThreeLevelEstimate,
};
pub use series::{rate_series, series_validity, SeriesKind, SeriesTable, EXCITE_SERIES, RELAX_SERIES};

/// Bound on the dropped tail mass relative to the kept mass. Far below
/// the `1e-12` needed for rates, so that low moments stay accurate too.
const POISSON_TAIL: f64 = 1e-16;

/// Normalized Poisson weights `P(first), P(first+1), …` covering all but a
/// negligible fraction of the distribution, never beyond
/// `n̄ + 12 sqrt(n̄+1) + 20`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonWeights {
    pub first: usize,
    pub weights: Vec<f64>,
}

impl PoissonWeights {
    pub fn new(n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0) || !n_bar.is_finite() {
            return invalid(format!("mean photon number must be finite and >= 0, got {n_bar}"));
        }
        if n_bar == 0.0 {
            return Ok(Self { first: 0, weights: vec![1.0] });
        }
        let cap = (n_bar + 12.0 * (n_bar + 1.0).sqrt() + 20.0).floor() as usize;
        let mode = (n_bar.floor() as usize).min(cap);

        // Unnormalized weights relative to the mode, built outwards.
        let mut upper = vec![1.0];
        let mut total = 1.0;
        let mut w = 1.0;
        for n in mode + 1..=cap {
            w *= n_bar / n as f64;
            upper.push(w);
            total += w;
            let r = n_bar / (n + 1) as f64;
            if r < 1.0 && w * r / (1.0 - r) < POISSON_TAIL * total {
                break;
            }
        }
        let mut lower = Vec::new();
        w = 1.0;
        for n in (0..mode).rev() {
            w *= (n + 1) as f64 / n_bar;
            lower.push(w);
            total += w;
            let r = n as f64 / n_bar;
            if w * r / (1.0 - r) < POISSON_TAIL * total {
                break;
            }
        }
        let first = mode - lower.len();
        let weights: Vec<f64> = lower.into_iter().rev().chain(upper).map(|x| x / total).collect();
        Ok(Self { first, weights })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(k, &w)| (self.first + k, w))
    }

    pub fn last(&self) -> usize {
        self.first + self.weights.len() - 1
    }

    pub fn average(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.iter().map(|(n, w)| w * f(n)).sum()
    }
}

/// `Σ P(n) f(n) / Σ P(n)` for the Poisson distribution with mean `n_bar`.
pub fn poisson_average(f: impl Fn(usize) -> f64, n_bar: f64) -> Result<f64> {
    Ok(PoissonWeights::new(n_bar)?.average(f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Approximation {
    RelaxLeading,
    RelaxLargeNbar,
    RelaxStrongSuppression,
    ExciteLeading,
    ExciteStrongSuppression,
    ExciteLargeNbar,
}

impl Approximation {
    pub const ALL: [Approximation; 6] = [
        Approximation::RelaxLeading,
        Approximation::RelaxLargeNbar,
        Approximation::RelaxStrongSuppression,
        Approximation::ExciteLeading,
        Approximation::ExciteStrongSuppression,
        Approximation::ExciteLargeNbar,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Approximation::RelaxLeading => "relax_leading",
            Approximation::RelaxLargeNbar => "relax_large_nbar",
            Approximation::RelaxStrongSuppression => "relax_strong_suppression",
            Approximation::ExciteLeading => "excite_leading",
            Approximation::ExciteStrongSuppression => "excite_strong_suppression",
            Approximation::ExciteLargeNbar => "excite_large_nbar",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn kind(self) -> SeriesKind {
        match self {
            Approximation::RelaxLeading
            | Approximation::RelaxLargeNbar
            | Approximation::RelaxStrongSuppression => SeriesKind::Relax,
            _ => SeriesKind::Excite,
        }
    }
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Asymptotic regime used by [`approximate_rates`]; picks the matching
/// relaxation and excitation formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Leading,
    LargeNbar,
    StrongSuppression,
}

impl Regime {
    pub fn pair(self) -> (Approximation, Approximation) {
        match self {
            Regime::Leading => (Approximation::RelaxLeading, Approximation::ExciteLeading),
            Regime::LargeNbar => (Approximation::RelaxLargeNbar, Approximation::ExciteLargeNbar),
            Regime::StrongSuppression => {
                (Approximation::RelaxStrongSuppression, Approximation::ExciteStrongSuppression)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Leading => "leading",
            Regime::LargeNbar => "large_nbar",
            Regime::StrongSuppression => "strong_suppression",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    AveragedClosedForm,
    RealNClosedForm,
    /// Series truncated at the given powers of λ for relaxation and excitation.
    Series { relax_order: u32, excite_order: u32 },
    Approximation(Regime),
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateMethod::AveragedClosedForm => f.write_str("averaged_closed_form"),
            RateMethod::RealNClosedForm => f.write_str("real_n_closed_form"),
            RateMethod::Series { relax_order, excite_order } => {
                write!(f, "series({relax_order},{excite_order})")
            }
            RateMethod::Approximation(r) => write!(f, "approximation({})", r.name()),
        }
    }
}

/// Relaxation and excitation rates at one mean photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet {
    pub gamma_r: f64,
    pub gamma_e: f64,
    pub n_bar: f64,
    pub method: RateMethod,
}

fn check_n_bar(n_bar: f64) -> Result<()> {
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return invalid(format!("mean photon number must be finite and >= 0, got {n_bar}"));
    }
    Ok(())
}

/// Jump rates averaged over a Poisson distribution of ladder levels.
pub fn averaged_rates(n_bar: f64, params: &SystemParams) -> Result<RateSet> {
    params.validate()?;
    let w = PoissonWeights::new(n_bar)?;
    let mut gamma_r = 0.0;
    let mut gamma_e = 0.0;
    for (n, p) in w.iter() {
        gamma_r += p * relaxation_rate_at(n as f64, params);
        gamma_e += p * excitation_rate_at(n as f64, params);
    }
    Ok(RateSet { gamma_r, gamma_e, n_bar, method: RateMethod::AveragedClosedForm })
}

/// Jump rates evaluated at the real level `n = n̄`, without averaging.
pub fn real_n_rates(n_bar: f64, params: &SystemParams) -> Result<RateSet> {
    params.validate()?;
    check_n_bar(n_bar)?;
    Ok(RateSet {
        gamma_r: relaxation_rate_at(n_bar, params),
        gamma_e: excitation_rate_at(n_bar, params),
        n_bar,
        method: RateMethod::RealNClosedForm,
    })
}

/// Both truncated series at once.
pub fn series_rates(n_bar: f64, params: &SystemParams, relax_order: u32, excite_order: u32) -> Result<RateSet> {
    Ok(RateSet {
        gamma_r: rate_series(SeriesKind::Relax, n_bar, params, relax_order)?,
        gamma_e: rate_series(SeriesKind::Excite, n_bar, params, excite_order)?,
        n_bar,
        method: RateMethod::Series { relax_order, excite_order },
    })
}

/// Named asymptotic closed form. With `x = n̄/n_crit` and `Γ_d = κg²/Δ²`:
///
/// | name | value |
/// |---|---|
/// | `relax_leading` | `Γ_d (1 − 3x/2)` |
/// | `relax_large_nbar` | `(Γ_d/4) (1/(1+x) + 1/sqrt(1+x))²` |
/// | `relax_strong_suppression` | `Γ_d/(4x) (1 + 2/sqrt(x))` |
/// | `excite_leading` | `Γ_d x²/16` |
/// | `excite_strong_suppression` | `Γ_d/(4x) (1 − 2/sqrt(x) + 3/x^{3/2})` |
/// | `excite_large_nbar` | `(Γ_d/4) (1/(1+x) − 1/sqrt(1+x))²` |
///
/// Validity regimes are not enforced.
pub fn rate_approximation(name: Approximation, n_bar: f64, params: &SystemParams) -> Result<f64> {
    params.validate()?;
    check_n_bar(n_bar)?;
    let n_crit = critical_photon_number(params)?;
    if n_crit == 0.0 {
        return invalid("approximations need a nonzero detuning");
    }
    let gamma_d = params.kappa * params.g * params.g / (params.delta * params.delta);
    let x = n_bar / n_crit;
    let strong = |sign: f64, third: f64| {
        if x == 0.0 {
            f64::INFINITY
        } else {
            let r = x.recip().sqrt();
            gamma_d / (4.0 * x) * (1.0 + sign * 2.0 * r + third * r.powi(3))
        }
    };
    let large = |sign: f64| {
        let a = 1.0 / (1.0 + x);
        let b = a.sqrt();
        gamma_d / 4.0 * (a + sign * b).powi(2)
    };
    Ok(match name {
        Approximation::RelaxLeading => gamma_d * (1.0 - 1.5 * x),
        Approximation::RelaxLargeNbar => large(1.0),
        Approximation::RelaxStrongSuppression => strong(1.0, 0.0),
        Approximation::ExciteLeading => gamma_d * x * x / 16.0,
        Approximation::ExciteStrongSuppression => strong(-1.0, 3.0),
        Approximation::ExciteLargeNbar => large(-1.0),
    })
}

/// Relaxation and excitation approximations of one regime.
pub fn approximate_rates(n_bar: f64, params: &SystemParams, regime: Regime) -> Result<RateSet> {
    let (relax, excite) = regime.pair();
    Ok(RateSet {
        gamma_r: rate_approximation(relax, n_bar, params)?,
        gamma_e: rate_approximation(excite, n_bar, params)?,
        n_bar,
        method: RateMethod::Approximation(regime),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::single_excitation::{purcell_rate_nodrive, NoDriveRate};

    fn p(d: f64) -> SystemParams {
        SystemParams::scaled(d, 1.0)
    }

    #[test]
    fn poisson_moments() {
        for n_bar in [0.0, 1e-3, 0.4, 1.0, 2.5, 10.0, 37.3, 400.0, 2.5e4] {
            let one = poisson_average(|_| 1.0, n_bar).unwrap();
            let m1 = poisson_average(|n| n as f64, n_bar).unwrap();
            let m2 = poisson_average(|n| (n as f64).powi(2), n_bar).unwrap();
            let m3 = poisson_average(|n| (n as f64).powi(3), n_bar).unwrap();
            let s = n_bar.max(1.0);
            assert!((one - 1.0).abs() < 1e-14);
            assert!((m1 - n_bar).abs() < 1e-12 * s, "n_bar {n_bar}");
            assert!((m2 - (n_bar * n_bar + n_bar)).abs() < 1e-12 * s * s);
            let want = n_bar.powi(3) + 3.0 * n_bar * n_bar + n_bar;
            assert!((m3 - want).abs() < 1e-12 * s.powi(3), "n_bar {n_bar}: {m3} vs {want}");
        }
    }

    #[test]
    fn poisson_support_is_bounded() {
        for n_bar in [0.5, 30.0, 1e4] {
            let w = PoissonWeights::new(n_bar).unwrap();
            let cap = n_bar + 12.0 * (n_bar + 1.0).sqrt() + 20.0;
            assert!((w.last() as f64) <= cap);
            assert!(w.weights.iter().all(|&x| x >= 0.0));
        }
        assert!(poisson_average(|_| 1.0, -1.0).is_err());
        assert!(poisson_average(|_| 1.0, f64::NAN).is_err());
    }

    #[test]
    fn zero_photons_give_no_drive_rate() {
        for d in [-10.0, 5.0, 20.0] {
            let r = averaged_rates(0.0, &p(d)).unwrap();
            let gp = purcell_rate_nodrive(&p(d), NoDriveRate::EigenstateOverlap).unwrap();
            assert_eq!(r.gamma_r, gp);
            assert_eq!(r.gamma_e, 0.0);
        }
    }

    #[test]
    fn suppression_at_critical_photon_number() {
        let params = p(20.0);
        let gp = purcell_rate_nodrive(&params, NoDriveRate::EigenstateOverlap).unwrap();
        let r = averaged_rates(100.0, &params).unwrap();
        assert!((r.gamma_r / gp - 0.36).abs() < 0.01, "{}", r.gamma_r / gp);
    }

    #[test]
    fn excitation_peak_stays_small() {
        let params = p(5.0);
        let gp = purcell_rate_nodrive(&params, NoDriveRate::EigenstateOverlap).unwrap();
        let nc = 6.25;
        let ratio = |x: f64| averaged_rates(x * nc, &params).unwrap().gamma_e / gp;
        let at3 = ratio(3.0);
        assert!(at3 < 0.02);
        let peak = (1..=80).map(|k| ratio(k as f64 * 0.1)).fold(0.0, f64::max);
        assert!(peak < 0.02);
        assert!(at3 > 0.95 * peak);
    }

    #[test]
    fn real_n_rates_match_level_rates() {
        let params = p(10.0);
        let r = real_n_rates(7.0, &params).unwrap();
        let j = crate::dressed::jump_rates(7.0, &params).unwrap();
        assert_eq!((r.gamma_r, r.gamma_e), (j.gamma_r, j.gamma_e));
        assert!(real_n_rates(-0.5, &params).is_err());
    }

    #[test]
    fn approximation_examples() {
        let params = p(10.0);
        let gd = 0.01;
        let nc = 25.0;
        let v = rate_approximation(Approximation::RelaxLeading, 5.0, &params).unwrap();
        assert!((v - gd * (1.0 - 1.5 * 0.2)).abs() < 1e-15);
        let v = rate_approximation(Approximation::RelaxLargeNbar, nc, &params).unwrap();
        let want = (3.0 + 2.0 * 2f64.sqrt()) / 16.0 * gd;
        assert!((v - want).abs() < 1e-15);
        assert!((v / gd - 0.364).abs() < 5e-4);
        let v = rate_approximation(Approximation::ExciteLargeNbar, 3.0 * nc, &params).unwrap();
        assert!((v - gd / 64.0).abs() < 1e-16);
        let v = rate_approximation(Approximation::ExciteLeading, 0.5 * nc, &params).unwrap();
        assert!((v - gd / 64.0).abs() < 1e-16);
        let v = rate_approximation(Approximation::RelaxStrongSuppression, 4.0 * nc, &params).unwrap();
        assert!((v - gd / 16.0 * 2.0).abs() < 1e-16);
        let v = rate_approximation(Approximation::ExciteStrongSuppression, 4.0 * nc, &params).unwrap();
        assert!((v - gd / 16.0 * (1.0 - 1.0 + 3.0 / 8.0)).abs() < 1e-16);
        assert!(rate_approximation(Approximation::RelaxLeading, 1.0, &p(0.0)).is_err());
    }

    #[test]
    fn approximation_names_round_trip() {
        for a in Approximation::ALL {
            assert_eq!(Approximation::from_name(a.name()), Some(a));
        }
        assert_eq!(Approximation::from_name("nope"), None);
    }

    #[test]
    fn large_nbar_forms_approach_averaged_rates() {
        let params = p(20.0);
        for x in [1.0, 2.0, 4.0] {
            let r = averaged_rates(x * 100.0, &params).unwrap();
            let relax = rate_approximation(Approximation::RelaxLargeNbar, x * 100.0, &params).unwrap();
            let excite = rate_approximation(Approximation::ExciteLargeNbar, x * 100.0, &params).unwrap();
            assert!((relax / r.gamma_r - 1.0).abs() < 0.03, "relax x {x}");
            assert!((excite / r.gamma_e - 1.0).abs() < 0.1, "excite x {x}");
        }
    }

    #[test]
    fn leading_forms_at_small_nbar() {
        let params = p(20.0);
        let r = averaged_rates(5.0, &params).unwrap();
        let relax = rate_approximation(Approximation::RelaxLeading, 5.0, &params).unwrap();
        assert!((relax / r.gamma_r - 1.0).abs() < 0.01);
        let excite = rate_approximation(Approximation::ExciteLeading, 5.0, &params).unwrap();
        assert!((excite / r.gamma_e - 1.0).abs() < 0.2);
    }

    #[test]
    fn method_labels() {
        assert_eq!(RateMethod::AveragedClosedForm.to_string(), "averaged_closed_form");
        assert_eq!(RateMethod::Series { relax_order: 8, excite_order: 10 }.to_string(), "series(8,10)");
        assert_eq!(RateMethod::Approximation(Regime::LargeNbar).to_string(), "approximation(large_nbar)");
    }
}
