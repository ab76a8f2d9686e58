//! Jaynes–Cummings ladder: mixing angles, dressed states, jump rates
//! between the two ladders, the exact diagonalizing transformation and
//! the emission-line positions.
//!
//! Sign convention: with `tan 2θ_n = 2g√n/Δ` and `θ_n ∈ (−π/4, π/4]`, the
//! eigenvectors of `(Δ/2)σz + g(a†σ− + aσ+)` are
//!
//! ```text
//! |ē,n⟩ = cos θ_{n+1} |e,n⟩ + sin θ_{n+1} |g,n+1⟩
//! |ḡ,n⟩ = cos θ_n |g,n⟩ − sin θ_n |e,n−1⟩
//! ```
//!
//! and the transformation producing them from bare states is
//! `D = exp(−Λ(N_e) I_−)` with `Λ(N) = arctan(2λ√N)/(2√N)`, `Λ(0) = λ`.
//! Rates only depend on squared matrix elements and are insensitive to
//! the overall sign of θ.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, PurcellError, Result};
use crate::hilbert::{elementary_operator, OperatorKind, OperatorMatrix, Qubit, SpaceDescriptor, SystemParams};
use crate::linalg::{self, CMatrix};
use crate::single_excitation::overlap_g1_e0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    /// States continuously connected to `|e,n⟩`.
    Excited,
    /// States continuously connected to `|g,n⟩`.
    Ground,
}

fn sgn(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Mixing angle for real excitation number `n ≥ 0`.
pub(crate) fn theta(n: f64, g: f64, delta: f64) -> f64 {
    if n <= 0.0 || g == 0.0 {
        0.0
    } else if delta == 0.0 {
        FRAC_PI_4 * sgn(g)
    } else {
        0.5 * (2.0 * g * n.sqrt() / delta).atan()
    }
}

/// θ_n with `tan 2θ_n = 2g√n/Δ`; `n` may be non-integer.
pub fn mixing_angle(n: f64, params: &SystemParams) -> Result<f64> {
    if !(n >= 0.0) {
        return invalid(format!("excitation number must be >= 0, got {n}"));
    }
    Ok(theta(n, params.g, params.delta))
}

/// `n_crit = Δ²/(4g²)`.
pub fn critical_photon_number(params: &SystemParams) -> Result<f64> {
    if params.g == 0.0 {
        return invalid("critical photon number needs g != 0");
    }
    Ok(params.delta * params.delta / (4.0 * params.g * params.g))
}

/// Dressed-state ladder structure for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    pub params: SystemParams,
    pub n_crit: f64,
}

impl DressedBasis {
    pub fn new(params: SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { n_crit: critical_photon_number(&params)?, params })
    }

    pub fn theta(&self, n: f64) -> f64 {
        theta(n, self.params.g, self.params.delta)
    }

    /// `E(ē, n−1) − E(ḡ, n) = sgn(Δ) sqrt(Δ² + 4ng²)`.
    pub fn splitting(&self, n: f64) -> f64 {
        let (g, d) = (self.params.g, self.params.delta);
        (d * d + 4.0 * n * g * g).sqrt() * sgn(d)
    }
}

/// Bare components `(qubit, photons, amplitude)` of a dressed state.
pub fn dressed_components(ladder: Ladder, n: usize, params: &SystemParams) -> [(Qubit, usize, f64); 2] {
    match ladder {
        Ladder::Excited => {
            let th = theta((n + 1) as f64, params.g, params.delta);
            [(Qubit::Excited, n, th.cos()), (Qubit::Ground, n + 1, th.sin())]
        }
        Ladder::Ground => {
            let th = theta(n as f64, params.g, params.delta);
            if n == 0 {
                [(Qubit::Ground, 0, 1.0), (Qubit::Excited, 0, 0.0)]
            } else {
                [(Qubit::Ground, n, th.cos()), (Qubit::Excited, n - 1, -th.sin())]
            }
        }
    }
}

/// Whether the dressed state exists in the truncated space.
pub fn dressed_state_fits(ladder: Ladder, n: usize, space: SpaceDescriptor) -> bool {
    match ladder {
        Ladder::Excited => n < space.fock_cutoff(),
        Ladder::Ground => n <= space.fock_cutoff(),
    }
}

pub fn dressed_state(
    ladder: Ladder,
    n: usize,
    params: &SystemParams,
    space: SpaceDescriptor,
) -> Result<DVector<C64>> {
    if !dressed_state_fits(ladder, n, space) {
        return Err(PurcellError::TruncationRisk(format!(
            "dressed state {ladder:?}({n}) needs photons above cutoff {}",
            space.fock_cutoff()
        )));
    }
    let mut v = DVector::zeros(space.dimension());
    for (q, m, amp) in dressed_components(ladder, n, params) {
        if amp != 0.0 {
            v[space.index(q, m).expect("checked above")] += C64::new(amp, 0.0);
        }
    }
    Ok(v)
}

/// Per-ladder-level jump rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRates {
    pub n: f64,
    /// Relaxation `κ |⟨ḡ,n| a |ē,n⟩|²`.
    pub gamma_r: f64,
    /// Excitation `κ |⟨ē,n−2| a |ḡ,n⟩|²`.
    pub gamma_e: f64,
}

pub(crate) fn relaxation_rate_at(n: f64, params: &SystemParams) -> f64 {
    let (g, d) = (params.g, params.delta);
    if n == 0.0 {
        // Same expression as the no-drive eigenstate-overlap rate.
        return params.kappa * overlap_g1_e0(g, d);
    }
    let a = theta(n + 1.0, g, d);
    let b = theta(n, g, d);
    let amp = (n + 1.0).sqrt() * a.sin() * b.cos() - n.sqrt() * b.sin() * a.cos();
    params.kappa * amp * amp
}

pub(crate) fn excitation_rate_at(n: f64, params: &SystemParams) -> f64 {
    if n < 1.0 {
        return 0.0;
    }
    let (g, d) = (params.g, params.delta);
    let a = theta(n, g, d);
    let b = theta(n - 1.0, g, d);
    let amp = (n - 1.0).sqrt() * a.sin() * b.cos() - n.sqrt() * b.sin() * a.cos();
    params.kappa * amp * amp
}

/// Relaxation and excitation jump rates from ladder level `n`. Real `n`
/// enters the mixing angles directly.
pub fn jump_rates(n: f64, params: &SystemParams) -> Result<JumpRates> {
    if !(n >= 0.0) {
        return invalid(format!("ladder level must be >= 0, got {n}"));
    }
    params.validate()?;
    Ok(JumpRates {
        n,
        gamma_r: relaxation_rate_at(n, params),
        gamma_e: excitation_rate_at(n, params),
    })
}

/// `Λ(N) = arctan(2λ√N)/(2√N)` with the removable point `Λ(0) = λ`.
fn lambda_function(n_e: f64, lambda: f64) -> f64 {
    if n_e == 0.0 {
        lambda
    } else {
        let r = n_e.sqrt();
        (2.0 * lambda * r).atan() / (2.0 * r)
    }
}

fn i_minus(space: SpaceDescriptor) -> CMatrix {
    let a = elementary_operator(OperatorKind::Annihilation, space).entries;
    let ad = elementary_operator(OperatorKind::Creation, space).entries;
    let sp = elementary_operator(OperatorKind::SigmaPlus, space).entries;
    let sm = elementary_operator(OperatorKind::SigmaMinus, space).entries;
    sp * a - sm * ad
}

/// Unitary `D` with `D†(Δσz/2 + g I₊)D` diagonal. `Λ(N_e)` is applied to
/// the (diagonal) spectrum of `N_e`, then exponentiated densely.
pub fn diagonalizing_transform(params: &SystemParams, space: SpaceDescriptor) -> Result<OperatorMatrix> {
    params.validate()?;
    let lambda = params.lambda()?;
    let ne = elementary_operator(OperatorKind::TotalExcitations, space).entries;
    let lam_diag = DVector::from_fn(space.dimension(), |i, _| {
        C64::new(lambda_function(ne[(i, i)].re, lambda), 0.0)
    });
    let gen = -(DMatrix::from_diagonal(&lam_diag) * i_minus(space));
    OperatorMatrix::new(space, linalg::expm(&gen))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMethod {
    /// `D† a D` with the exact transformation.
    Exact,
    /// Dispersive series truncated at the given power of λ (at most 7).
    Series(u32),
}

pub const MAX_SERIES_ORDER: u32 = 7;

/// `a^D = D† a D`, exactly or as the three-group dispersive series
/// `a₁ + a₂ + a₃` (photon loss, qubit decay, two-photon loss with qubit
/// excitation).
pub fn transformed_annihilation(
    params: &SystemParams,
    space: SpaceDescriptor,
    method: TransformMethod,
) -> Result<OperatorMatrix> {
    match method {
        TransformMethod::Exact => {
            let d = diagonalizing_transform(params, space)?.entries;
            let a = elementary_operator(OperatorKind::Annihilation, space).entries;
            OperatorMatrix::new(space, d.adjoint() * a * &d)
        }
        TransformMethod::Series(order) => series_annihilation(params, space, order),
    }
}

/// Coefficients of `λ^k` for the three groups, as functions of the photon
/// number `n` acted on after the lowering part and the σz eigenvalue `z`.
fn group_one(k: u32, n: f64, z: f64) -> f64 {
    match k {
        0 => 1.0,
        2 => z / 2.0,
        4 => -(12.0 * (n + 1.0) * z + 1.0) / 8.0,
        6 => (5.0 * n * n + 10.0 * n + 73.0 / 16.0) * z + (n + 1.0) / 4.0,
        _ => 0.0,
    }
}

fn group_two(k: u32, n: f64) -> f64 {
    match k {
        1 => 1.0,
        3 => -1.5 * (2.0 * n + 1.0),
        5 => 11.0 * n * n + 11.0 * n + 31.0 / 8.0,
        7 => -(42.0 * n.powi(3) + 63.0 * n * n + 355.0 / 8.0 * n + 187.0 / 16.0),
        _ => 0.0,
    }
}

fn group_three(k: u32, n: f64) -> f64 {
    match k {
        3 => 1.0,
        5 => -2.5 * (2.0 * n + 3.0),
        7 => 22.0 * n * n + 66.0 * n + 411.0 / 8.0,
        _ => 0.0,
    }
}

fn series_annihilation(params: &SystemParams, space: SpaceDescriptor, order: u32) -> Result<OperatorMatrix> {
    params.validate()?;
    if order > MAX_SERIES_ORDER {
        return invalid(format!("series order {order} exceeds {MAX_SERIES_ORDER}"));
    }
    let lambda = params.lambda()?;
    let radius = lambda.abs() * (space.fock_cutoff() as f64).sqrt();
    if radius >= 0.5 {
        return invalid(format!(
            "series needs |lambda| sqrt(N_max) < 0.5, got {radius}"
        ));
    }
    let dim = space.dimension();
    let mut out = CMatrix::zeros(dim, dim);
    let powers: Vec<f64> = (0..=order).map(|k| lambda.powi(k as i32)).collect();
    let sum = |f: &dyn Fn(u32) -> f64| -> f64 { (0..=order).map(|k| powers[k as usize] * f(k)).sum() };

    for n in 1..=space.fock_cutoff() {
        let root = (n as f64).sqrt();
        let m = (n - 1) as f64;
        // a1: |q, n⟩ → |q, n−1⟩.
        for (q, z) in [(Qubit::Ground, -1.0), (Qubit::Excited, 1.0)] {
            let i = space.index(q, n - 1).unwrap();
            let j = space.index(q, n).unwrap();
            out[(i, j)] += C64::new(root * sum(&|k| group_one(k, m, z)), 0.0);
        }
    }
    for n in 0..=space.fock_cutoff() {
        // a2: |e, n⟩ → |g, n⟩.
        let i = space.index(Qubit::Ground, n).unwrap();
        let j = space.index(Qubit::Excited, n).unwrap();
        out[(i, j)] += C64::new(sum(&|k| group_two(k, n as f64)), 0.0);
    }
    for n in 2..=space.fock_cutoff() {
        // a3: |g, n⟩ → |e, n−2⟩.
        let i = space.index(Qubit::Excited, n - 2).unwrap();
        let j = space.index(Qubit::Ground, n).unwrap();
        let amp = ((n * (n - 1)) as f64).sqrt();
        out[(i, j)] += C64::new(amp * sum(&|k| group_three(k, (n - 2) as f64)), 0.0);
    }
    OperatorMatrix::new(space, out)
}

/// Emission lines `[ω_r + g²/Ω_S, ω_r − g²/Ω_S, ω_r + Ω_S, ω_r − Ω_S]` with
/// `Ω_S = sgn(Δ) sqrt(Δ² + 4 n̄ g²)`.
pub fn spectral_lines(n_bar: f64, params: &SystemParams) -> Result<[f64; 4]> {
    if !(n_bar >= 0.0) {
        return invalid(format!("mean photon number must be >= 0, got {n_bar}"));
    }
    params.validate()?;
    let (g, d, wr) = (params.g, params.delta, params.omega_r);
    let omega_s = (d * d + 4.0 * n_bar * g * g).sqrt() * sgn(d);
    let shift = if g == 0.0 {
        0.0
    } else if omega_s == 0.0 {
        return Err(PurcellError::SingularConfiguration(
            "Stark-shifted splitting vanishes (delta = 0, n_bar = 0)".into(),
        ));
    } else {
        g * g / omega_s
    };
    Ok([wr + shift, wr - shift, wr + omega_s, wr - omega_s])
}
