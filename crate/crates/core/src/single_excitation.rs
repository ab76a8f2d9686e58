//! Undriven Purcell decay in the single-excitation subspace `{|e,0⟩, |g,1⟩}`.

use nalgebra::{DMatrix, Matrix4, Vector2, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Result};
use crate::hilbert::SystemParams;
use crate::linalg;

/// Complex energies of the decaying eigenstates of `V − iκ a†a/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigenpair {
    /// Qubit-like eigenstate, `Ω/2 − iΓ/2`.
    pub e_e: C64,
    /// Photon-like eigenstate, `−Ω/2 − i(κ − Γ)/2`.
    pub e_1: C64,
    /// Qubit relaxation rate Γ = −2 Im(E_e).
    pub gamma: f64,
    /// Signed beating frequency Ω.
    pub omega: f64,
}

/// Amplitudes of a single-excitation state and its expansion over the
/// (non-orthogonal) decaying eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleExcitationState {
    /// Amplitude of `|e,0⟩`.
    pub alpha: C64,
    /// Amplitude of `|g,1⟩`.
    pub beta: C64,
    pub c_e: C64,
    pub c_1: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoDriveRate {
    /// Closed form of the exact eigenvalue.
    Exact,
    /// `κg²/(Δ² + κ²/4)`.
    GoldenRule,
    /// `κg²/Δ²`.
    Dispersive,
    /// `κ |⟨g,1|ē,0⟩|²`.
    EigenstateOverlap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Bare `|e,0⟩`.
    BareE0,
    /// Dressed (undamped) eigenstate `|ē,0⟩`.
    EigenE0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceApproximation {
    /// Laplace-transform result for `|g| ≪ κ`, bare start only.
    GoldenRule,
    /// Dispersive `|Δ| ≫ |g| ≳ κ` forms.
    Dispersive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub initial: InitialState,
    /// From the matrix exponential of the 4×4 generator.
    pub exact: Vec<f64>,
    pub approximation: TraceApproximation,
    pub analytic: Vec<f64>,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Generator for `(ρ_ee, ρ_11, ρ_e1 − ρ_1e, ρ_e1 + ρ_1e)`, with `e = |e,0⟩`
/// and `1 = |g,1⟩`. The ground state fills as `ρ̇_gg = κ ρ_11`.
pub fn evolution_matrix(params: &SystemParams) -> Matrix4<C64> {
    let z = C64::new(0.0, 0.0);
    let ig = C64::new(0.0, params.g);
    let id = C64::new(0.0, params.delta);
    let k = C64::new(params.kappa, 0.0);
    let h = k * 0.5;
    #[rustfmt::skip]
    let m = Matrix4::new(
        z,        z,        ig,  z,
        z,        -k,       -ig, z,
        ig * 2.0, -ig * 2.0, -h,  -id,
        z,        z,        -id, -h,
    );
    m
}

/// `(−A + sqrt(A² + B²), A + sqrt(A² + B²))` without cancellation.
fn root_pair(a: f64, b2: f64) -> (f64, f64) {
    let r = (a * a + b2).sqrt();
    if a >= 0.0 {
        let plus = a + r;
        let minus = if plus > 0.0 { b2 / plus } else { 0.0 };
        (minus, plus)
    } else {
        let minus = r - a;
        let plus = if minus > 0.0 { b2 / minus } else { 0.0 };
        (minus, plus)
    }
}

/// Closed-form complex energies. `sgn(0)` is taken as `+1`.
pub fn complex_eigenenergies(params: &SystemParams) -> Result<ComplexEigenpair> {
    params.validate()?;
    let (g, d, k) = (params.g, params.delta, params.kappa);
    let a = d * d + 4.0 * g * g - k * k / 4.0;
    let (minus, plus) = root_pair(a, (k * d).powi(2));
    let half_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let gamma = k / 2.0 - half_sqrt2 * minus.sqrt();
    let omega = half_sqrt2 * plus.sqrt() * sgn(d);
    Ok(ComplexEigenpair {
        e_e: C64::new(omega / 2.0, -gamma / 2.0),
        e_1: C64::new(-omega / 2.0, -(k - gamma) / 2.0),
        gamma,
        omega,
    })
}

/// Undriven Purcell rate by the selected formula.
pub fn purcell_rate_nodrive(params: &SystemParams, variant: NoDriveRate) -> Result<f64> {
    params.validate()?;
    let (g, d, k) = (params.g, params.delta, params.kappa);
    match variant {
        NoDriveRate::Exact => Ok(complex_eigenenergies(params)?.gamma),
        NoDriveRate::GoldenRule => {
            let den = d * d + k * k / 4.0;
            if den == 0.0 {
                return invalid("golden-rule rate diverges at delta = kappa = 0");
            }
            Ok(k * g * g / den)
        }
        NoDriveRate::Dispersive => {
            if d == 0.0 {
                return invalid("dispersive Purcell rate needs a nonzero detuning");
            }
            Ok(k * g * g / (d * d))
        }
        NoDriveRate::EigenstateOverlap => Ok(k * overlap_g1_e0(g, d)),
    }
}

/// `|⟨g,1|ē,0⟩|² = (1 − |Δ|/sqrt(Δ² + 4g²))/2`, written to avoid
/// cancellation at large |Δ/g|.
pub(crate) fn overlap_g1_e0(g: f64, delta: f64) -> f64 {
    let r = (delta * delta + 4.0 * g * g).sqrt();
    if r == 0.0 {
        return 0.5;
    }
    let ad = delta.abs();
    // 1 − |Δ|/r = 4g² / (r (r + |Δ|))
    2.0 * g * g / (r * (r + ad))
}

/// Normalized right eigenvectors `(α, β)` for `E_e` and `E_1`.
fn decaying_eigenvectors(params: &SystemParams, pair: &ComplexEigenpair) -> (Vector2<C64>, Vector2<C64>) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    if params.g == 0.0 {
        return (Vector2::new(one, zero), Vector2::new(zero, one));
    }
    let half_d = C64::new(params.delta / 2.0, 0.0);
    let make = |e: C64| {
        let v = Vector2::new(one, (e - half_d) / params.g);
        v / C64::new(v.norm(), 0.0)
    };
    (make(pair.e_e), make(pair.e_1))
}

fn perpendicular(v: &Vector2<C64>) -> Vector2<C64> {
    Vector2::new(v[1].conj(), -v[0].conj())
}

fn inner(a: &Vector2<C64>, b: &Vector2<C64>) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Expand `α|e,0⟩ + β|g,1⟩` over the decaying eigenvectors using the
/// vectors orthogonal to each of them.
pub fn expand_state(params: &SystemParams, alpha: C64, beta: C64) -> Result<SingleExcitationState> {
    let pair = complex_eigenenergies(params)?;
    let (ve, v1) = decaying_eigenvectors(params, &pair);
    let psi = Vector2::new(alpha, beta);
    let ve_perp = perpendicular(&ve);
    let v1_perp = perpendicular(&v1);
    let den_1 = inner(&ve_perp, &v1);
    let den_e = inner(&v1_perp, &ve);
    if den_1.norm() < 1e-14 || den_e.norm() < 1e-14 {
        return invalid("decaying eigenvectors are degenerate (exceptional point)");
    }
    Ok(SingleExcitationState {
        alpha,
        beta,
        c_e: inner(&v1_perp, &psi) / den_e,
        c_1: inner(&ve_perp, &psi) / den_1,
    })
}

/// `(α(t), β(t))` from the eigen-expansion.
pub fn amplitudes_at(params: &SystemParams, state: &SingleExcitationState, t: f64) -> Result<(C64, C64)> {
    let pair = complex_eigenenergies(params)?;
    let (ve, v1) = decaying_eigenvectors(params, &pair);
    let fe = state.c_e * (C64::new(0.0, -t) * pair.e_e).exp();
    let f1 = state.c_1 * (C64::new(0.0, -t) * pair.e_1).exp();
    Ok((fe * ve[0] + f1 * v1[0], fe * ve[1] + f1 * v1[1]))
}

/// `(cos θ₁, sin θ₁)` of the undamped dressed state `|ē,0⟩ = c|e,0⟩ + s|g,1⟩`.
fn dressed_e0(params: &SystemParams) -> (f64, f64) {
    let s2 = overlap_g1_e0(params.g, params.delta);
    let s = s2.sqrt() * sgn(params.g) * sgn(params.delta);
    ((1.0 - s2).sqrt(), s)
}

/// Initial vector for [`evolution_matrix`].
pub fn initial_vector(params: &SystemParams, initial: InitialState) -> Vector4<C64> {
    let c = |x: f64| C64::new(x, 0.0);
    match initial {
        InitialState::BareE0 => Vector4::new(c(1.0), c(0.0), c(0.0), c(0.0)),
        InitialState::EigenE0 => {
            let (co, si) = dressed_e0(params);
            Vector4::new(c(co * co), c(si * si), c(0.0), c(2.0 * co * si))
        }
    }
}

/// Exact propagation `exp(M t) x0` of the 4×4 generator.
pub fn propagate(params: &SystemParams, x0: &Vector4<C64>, t: f64) -> Vector4<C64> {
    let m = evolution_matrix(params) * C64::new(t, 0.0);
    let dm = DMatrix::from_iterator(4, 4, m.iter().copied());
    let e = linalg::expm(&dm);
    let mut out = Vector4::zeros();
    for i in 0..4 {
        out[i] = (0..4).map(|j| e[(i, j)] * x0[j]).sum();
    }
    out
}

/// Population tracked for the given start: bare `ρ_ee`, or the dressed
/// `⟨ē,0|ρ|ē,0⟩` for the eigenstate start.
fn tracked_population(params: &SystemParams, initial: InitialState, x: &Vector4<C64>) -> f64 {
    match initial {
        InitialState::BareE0 => x[0].re,
        InitialState::EigenE0 => {
            let (co, si) = dressed_e0(params);
            co * co * x[0].re + si * si * x[1].re + co * si * x[3].re
        }
    }
}

pub fn analytic_population(
    params: &SystemParams,
    initial: InitialState,
    approximation: TraceApproximation,
    t: f64,
) -> Result<f64> {
    let (g, d, k) = (params.g, params.delta, params.kappa);
    let omega = complex_eigenenergies(params)?.omega;
    match (initial, approximation) {
        (InitialState::BareE0, TraceApproximation::GoldenRule) => {
            let rate = purcell_rate_nodrive(params, NoDriveRate::GoldenRule)?;
            let k2 = k * k;
            let d2 = 4.0 * d * d;
            let den = (k2 + d2).powi(2);
            let steady = 1.0 + 8.0 * g * g * (k2 - d2) / den;
            let osc = 8.0 * g * g / den
                * (4.0 * k * d.abs() * (omega.abs() * t).sin() + (k2 - d2) * (omega * t).cos());
            Ok((-rate * t).exp() * steady - (-k * t / 2.0).exp() * osc)
        }
        (InitialState::EigenE0, TraceApproximation::GoldenRule) => {
            invalid("the golden-rule trace is only derived for the bare |e,0> start")
        }
        (_, TraceApproximation::Dispersive) => {
            if d == 0.0 {
                return invalid("dispersive traces need a nonzero detuning");
            }
            let rate = purcell_rate_nodrive(params, NoDriveRate::EigenstateOverlap)?;
            let amp = match initial {
                InitialState::BareE0 => 2.0 * g * g / (d * d),
                InitialState::EigenE0 => -(g * g * k * k) / (2.0 * d.powi(4)),
            };
            Ok((-rate * t).exp() * (1.0 - amp) + amp * (omega * t).cos() * (-k * t / 2.0).exp())
        }
    }
}

/// Exact and approximate population traces on `t_grid`. The golden-rule
/// form is used for a bare start when `|g| < κ`, the dispersive one
/// otherwise.
pub fn population_trace_nodrive(
    params: &SystemParams,
    initial: InitialState,
    t_grid: &[f64],
) -> Result<PopulationTrace> {
    params.validate()?;
    if t_grid.is_empty() {
        return invalid("time grid is empty");
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("time grid must be finite and non-negative");
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return invalid("time grid must be sorted");
    }
    let approximation = match initial {
        InitialState::BareE0 if params.g.abs() < params.kappa => TraceApproximation::GoldenRule,
        _ => TraceApproximation::Dispersive,
    };
    let x0 = initial_vector(params, initial);
    let exact = t_grid
        .iter()
        .map(|&t| tracked_population(params, initial, &propagate(params, &x0, t)))
        .collect();
    let analytic = t_grid
        .iter()
        .map(|&t| analytic_population(params, initial, approximation, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationTrace { times: t_grid.to_vec(), initial, exact, approximation, analytic })
}
