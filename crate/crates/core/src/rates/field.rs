//! Resonator field under drive: the self-consistent mean photon number, the
//! classical amplitude equations for each qubit state, and the three-level
//! correction to the effective detuning.

use num_complex::Complex64 as C64;

use crate::dressed::critical_photon_number;
use crate::error::{invalid, PurcellError, Result};
use crate::hilbert::SystemParams;
use crate::ode::{integrate, OdeOptions, Tolerances};

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with `f(lo) ≤ 0 ≤
/// f(hi)` (or the reverse); falls back to bisection whenever the Newton step
/// leaves the bracket or stalls.
fn newton_bracketed(f: &dyn Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, seed: f64) -> f64 {
    let (flo, _) = f(lo);
    let rising = flo <= 0.0;
    let mut x = seed.clamp(lo, hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == rising {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx.is_finite() && dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// All sign changes of `f` on `[0, hi]`, refined. Sampling is quadratic in
/// the index so that roots near zero are resolved.
fn scan_roots(f: &dyn Fn(f64) -> (f64, f64), hi: f64, samples: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_f = f(0.0).0;
    if prev_f == 0.0 {
        roots.push(0.0);
    }
    for k in 1..=samples {
        let s = k as f64 / samples as f64;
        let x = hi * s * s;
        let fx = f(x).0;
        if fx == 0.0 {
            roots.push(x);
        } else if prev_f != 0.0 && (fx > 0.0) != (prev_f > 0.0) {
            roots.push(newton_bracketed(f, prev_x, x, 0.5 * (prev_x + x)));
        }
        prev_x = x;
        prev_f = fx;
    }
    roots
}

/// `n̄ [(g²/sqrt(Δ² + 4g²n̄) + ω_r − ω_d)² + κ²/4]` and its derivative in n̄.
fn drive_balance(n: f64, params: &SystemParams) -> (f64, f64) {
    let (g, d, k) = (params.g, params.delta, params.kappa);
    let delta_d = params.drive_detuning();
    let g2 = g * g;
    let s = (d * d + 4.0 * g2 * n).sqrt();
    if g == 0.0 || (s == 0.0 && d == 0.0) {
        if g == 0.0 {
            return (n * (delta_d * delta_d + k * k / 4.0), delta_d * delta_d + k * k / 4.0);
        }
        // Δ = 0, n̄ → 0: n̄ (g²/2|g|sqrt(n̄))² → g²/4.
        return (g2 / 4.0, f64::INFINITY);
    }
    let h = g2 / s + delta_d;
    let dh = -2.0 * g2 * g2 / (s * s * s);
    let value = n * (h * h + k * k / 4.0);
    (value, h * h + k * k / 4.0 + 2.0 * n * h * dh)
}

/// Self-consistent mean photon numbers: the positive roots of
/// `n̄ [(g²/sqrt(Δ² + 4g²n̄) + ω_r − ω_d)² + κ²/4] = ε²`, ascending. A drive
/// on resonance gives one root; a detuned drive may give several.
pub fn steady_photon_number(params: &SystemParams) -> Result<Vec<f64>> {
    params.validate()?;
    let eps2 = params.epsilon * params.epsilon;
    let delta_d = params.drive_detuning();
    let on_resonance = params.drive_on_resonance();
    if params.kappa == 0.0 && on_resonance {
        return invalid("steady photon number needs kappa > 0 or a detuned drive");
    }
    if eps2 == 0.0 {
        return Ok(vec![0.0]);
    }
    let f = |n: f64| {
        let (v, dv) = drive_balance(n, params);
        (v - eps2, dv)
    };
    if f(0.0).0 > 0.0 && on_resonance {
        return Err(PurcellError::NoRealRoot(format!(
            "drive epsilon = {} is below the resonant threshold |g|/2",
            params.epsilon
        )));
    }
    let kappa_bound = if params.kappa > 0.0 { 4.0 * eps2 / (params.kappa * params.kappa) } else { f64::INFINITY };
    if on_resonance {
        let seed = kappa_bound;
        let hi = 4.0 * kappa_bound;
        return Ok(vec![newton_bracketed(&f, 0.0, hi, seed)]);
    }
    // Beyond n*, |g²/Ω| ≤ |ω_r − ω_d|/2 and the bracket is at least (ω_r − ω_d)²/4.
    let g2 = params.g * params.g;
    let n_star = ((4.0 * g2 * g2 / (delta_d * delta_d) - params.delta * params.delta) / (4.0 * g2)).max(0.0);
    let detuning_bound = n_star.max(4.0 * eps2 / (delta_d * delta_d));
    let hi = kappa_bound.min(detuning_bound) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
    let roots: Vec<f64> = scan_roots(&f, hi, 20_000).into_iter().filter(|&n| n > 0.0).collect();
    if roots.is_empty() {
        return Err(PurcellError::NoRealRoot(format!(
            "no positive photon number balances drive epsilon = {}",
            params.epsilon
        )));
    }
    Ok(roots)
}

/// Drive amplitude `ε ≥ 0` that sustains the mean photon number `n_bar`.
pub fn drive_for_photon_number(n_bar: f64, params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if !(n_bar >= 0.0) || !n_bar.is_finite() {
        return invalid(format!("target photon number must be finite and >= 0, got {n_bar}"));
    }
    Ok(drive_balance(n_bar, params).0.sqrt())
}

/// Classical resonator amplitudes conditioned on the qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldAmplitudes {
    pub alpha_e: C64,
    pub alpha_g: C64,
}

impl FieldAmplitudes {
    pub fn n_bar_e(&self) -> f64 {
        self.alpha_e.norm_sqr()
    }

    pub fn n_bar_g(&self) -> f64 {
        self.alpha_g.norm_sqr()
    }
}

/// Coefficients of `α̇ = −(κ/2)K α − i(ω_r − ω_d)α + iχX α − iεE` for one
/// qubit state (`sign = +1` for e, −1 for g), each linear in `n̄ = |α|²`.
struct FieldCoefficients {
    half_kappa: f64,
    chi: f64,
    detuning: f64,
    epsilon: f64,
    lambda2: f64,
    sign: f64,
}

impl FieldCoefficients {
    fn new(params: &SystemParams, sign: f64) -> Result<Self> {
        let lambda = params.lambda()?;
        Ok(Self {
            half_kappa: params.kappa / 2.0,
            chi: params.chi()?,
            detuning: params.drive_detuning(),
            epsilon: params.epsilon,
            lambda2: lambda * lambda,
            sign,
        })
    }

    fn damping(&self, n: f64) -> f64 {
        let l2 = self.lambda2;
        1.0 + self.sign * l2 * (1.0 - 6.0 * l2 * n)
    }

    fn pull(&self, n: f64) -> f64 {
        let l2 = self.lambda2;
        l2 - self.sign * (1.0 - 2.0 * l2 * (n + 1.0))
    }

    fn drive(&self, n: f64) -> f64 {
        let l2 = self.lambda2;
        1.0 - l2 * l2 / 8.0 + self.sign * l2 / 2.0 * (1.0 - 3.0 * l2 * (2.0 * n + 1.0))
    }

    fn rate(&self, alpha: C64) -> C64 {
        let n = alpha.norm_sqr();
        let i = C64::i();
        -alpha * (self.half_kappa * self.damping(n)) + i * alpha * (self.chi * self.pull(n) - self.detuning)
            - i * (self.epsilon * self.drive(n))
    }

    /// `n [(κK/2)² + (χX − δ)²] − ε²E²`, a cubic in `n`, with its derivative.
    fn balance(&self, n: f64) -> (f64, f64) {
        let l2 = self.lambda2;
        let a = self.half_kappa * self.damping(n);
        let da = -self.half_kappa * self.sign * 6.0 * l2 * l2;
        let b = self.chi * self.pull(n) - self.detuning;
        let db = self.chi * self.sign * 2.0 * l2;
        let e = self.epsilon * self.drive(n);
        let de = -self.epsilon * self.sign * 3.0 * l2 * l2;
        let v = n * (a * a + b * b) - e * e;
        let dv = a * a + b * b + 2.0 * n * (a * da + b * db) - 2.0 * e * de;
        (v, dv)
    }

    fn amplitude(&self, n: f64) -> C64 {
        let denom = C64::new(self.half_kappa * self.damping(n), -(self.chi * self.pull(n) - self.detuning));
        -C64::i() * (self.epsilon * self.drive(n)) / denom
    }

    fn valid(&self, n: f64) -> bool {
        self.lambda2 * (2.0 * n + 1.0) < 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<FieldAmplitudes>,
    /// Set when `λ²(2n̄_j + 1) ≥ 1` somewhere along the trajectory.
    pub validity_warning: bool,
}

/// Integrate the classical amplitude equations from the vacuum.
pub fn classical_field_dynamics(params: &SystemParams, t_grid: &[f64]) -> Result<FieldTrajectory> {
    classical_field_dynamics_from(params, FieldAmplitudes::default(), t_grid)
}

pub fn classical_field_dynamics_from(
    params: &SystemParams,
    initial: FieldAmplitudes,
    t_grid: &[f64],
) -> Result<FieldTrajectory> {
    params.validate()?;
    let ce = FieldCoefficients::new(params, 1.0)?;
    let cg = FieldCoefficients::new(params, -1.0)?;
    let opts = OdeOptions { tol: Tolerances { rel: 1e-10, abs: 1e-12 }, ..OdeOptions::default() };
    let mut out = FieldTrajectory {
        times: Vec::with_capacity(t_grid.len()),
        amplitudes: Vec::with_capacity(t_grid.len()),
        validity_warning: false,
    };
    integrate(
        &[initial.alpha_e, initial.alpha_g],
        t_grid,
        &opts,
        |_, y, dy| {
            dy[0] = ce.rate(y[0]);
            dy[1] = cg.rate(y[1]);
        },
        |_| {},
        |_, t, y| {
            let a = FieldAmplitudes { alpha_e: y[0], alpha_g: y[1] };
            if !(ce.valid(a.n_bar_e()) && cg.valid(a.n_bar_g())) {
                out.validity_warning = true;
            }
            out.times.push(t);
            out.amplitudes.push(a);
            Ok(())
        },
    )?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSteadyState {
    pub amplitudes: FieldAmplitudes,
    pub validity_warning: bool,
}

fn steady_amplitude(c: &FieldCoefficients, kappa: f64) -> Result<C64> {
    if c.epsilon == 0.0 {
        return Ok(C64::default());
    }
    // The weak-drive branch: smallest positive root of the cubic.
    let lin = 4.0 * c.epsilon * c.epsilon / (kappa * kappa).max(f64::MIN_POSITIVE);
    let validity = (1.0 / c.lambda2 - 1.0) / 2.0;
    let hi = (4.0 * lin).min(4.0 * validity.max(1.0)).max(1e-300);
    let f = |n: f64| c.balance(n);
    let root = scan_roots(&f, hi, 4000).into_iter().find(|&n| n > 0.0);
    match root {
        Some(n) => Ok(c.amplitude(n)),
        None => Err(PurcellError::NoRealRoot(
            "classical field equation has no stationary amplitude in the search range".into(),
        )),
    }
}

/// Stationary amplitudes `α̇_e = α̇_g = 0`, on the branch continuously
/// connected to weak drive.
pub fn steady_state(params: &SystemParams) -> Result<FieldSteadyState> {
    params.validate()?;
    let ce = FieldCoefficients::new(params, 1.0)?;
    let cg = FieldCoefficients::new(params, -1.0)?;
    let amplitudes = FieldAmplitudes {
        alpha_e: steady_amplitude(&ce, params.kappa)?,
        alpha_g: steady_amplitude(&cg, params.kappa)?,
    };
    let validity_warning = !(ce.valid(amplitudes.n_bar_e()) && cg.valid(amplitudes.n_bar_g()));
    Ok(FieldSteadyState { amplitudes, validity_warning })
}

/// Effective detuning with a transmon's second excited level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelEstimate {
    pub delta_eff: f64,
    pub n_crit_tilde: f64,
}

/// `Δ_eff = Δ (1 + n/(2ñ_crit))` with `ñ_crit = (Δ²/4g²)(𝒜 − Δ)/𝒜`, where
/// `𝒜` is the anharmonicity carried by `params`.
pub fn effective_detuning_three_level(n: f64, params: &SystemParams) -> Result<ThreeLevelEstimate> {
    params.validate()?;
    if !(n >= 0.0) || !n.is_finite() {
        return invalid(format!("photon number must be finite and >= 0, got {n}"));
    }
    let a = match params.anharmonicity {
        Some(a) if a.is_finite() => a,
        Some(a) => return invalid(format!("anharmonicity must be finite, got {a}")),
        None => return invalid("three-level estimate needs an anharmonicity"),
    };
    if a == 0.0 {
        return invalid("anharmonicity must be nonzero");
    }
    if a == params.delta {
        return Err(PurcellError::SingularConfiguration(
            "anharmonicity equals the detuning: the e-f transition is resonant with the resonator".into(),
        ));
    }
    let n_crit_tilde = critical_photon_number(params)? * (a - params.delta) / a;
    if n_crit_tilde == 0.0 {
        return Err(PurcellError::SingularConfiguration(
            "effective critical photon number vanishes at zero detuning".into(),
        ));
    }
    Ok(ThreeLevelEstimate { delta_eff: params.delta * (1.0 + n / (2.0 * n_crit_tilde)), n_crit_tilde })
}
