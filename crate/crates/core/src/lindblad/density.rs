use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::dressed::{dressed_components, dressed_state, Ladder};
use crate::error::{invalid, PurcellError, Result};
use crate::hilbert::{Qubit, SpaceDescriptor, SystemParams};
use crate::linalg::{hermiticity_defect, CMatrix};
use crate::rates::steady_photon_number;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub space: SpaceDescriptor,
    pub entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(space: SpaceDescriptor, entries: CMatrix) -> Result<Self> {
        let d = space.dimension();
        if entries.shape() != (d, d) {
            return invalid(format!("density matrix shape {:?} does not match dimension {d}", entries.shape()));
        }
        Ok(Self { space, entries })
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(space: SpaceDescriptor, psi: &DVector<C64>) -> Result<Self> {
        if psi.len() != space.dimension() {
            return invalid("state vector length does not match the space");
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return invalid(format!("state vector must be normalized, norm is {norm}"));
        }
        Self::new(space, psi * psi.adjoint())
    }

    pub fn basis_state(space: SpaceDescriptor, q: Qubit, n: usize) -> Result<Self> {
        Self::pure(space, &space.basis_vector(q, n)?)
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ.
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }

    pub fn photon_number(&self) -> f64 {
        photon_number(&self.entries, self.space)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Cheap test of `λ_min(ρ) > −tol` through a Cholesky factorization of
    /// `ρ + tol·1`.
    pub fn is_positive_within(&self, tol: f64) -> bool {
        let d = self.space.dimension();
        let shifted = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0)
            + CMatrix::identity(d, d) * C64::new(tol, 0.0);
        hermitian_cholesky_succeeds(shifted)
    }

    /// Hermitian to `1e-10`, unit trace to `1e-8`, eigenvalues above `−1e-8`.
    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        let tr = self.trace();
        if herm > 1e-10 || (tr - 1.0).norm() > 1e-8 || !self.is_positive_within(1e-8) {
            return invalid(format!(
                "not a density matrix: hermiticity defect {herm:e}, trace {tr}, min eigenvalue {:e}",
                self.min_eigenvalue()
            ));
        }
        Ok(())
    }
}

/// In-place Cholesky of a Hermitian matrix, failing on the first pivot
/// that is not strictly positive. (nalgebra's complex Cholesky accepts
/// negative pivots by taking complex square roots.)
fn hermitian_cholesky_succeeds(mut m: CMatrix) -> bool {
    let d = m.nrows();
    for j in 0..d {
        let mut pivot = m[(j, j)].re;
        for k in 0..j {
            pivot -= m[(j, k)].norm_sqr();
        }
        if !(pivot > 0.0) {
            return false;
        }
        let root = pivot.sqrt();
        m[(j, j)] = C64::new(root, 0.0);
        for i in j + 1..d {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= m[(i, k)] * m[(j, k)].conj();
            }
            m[(i, j)] = v / root;
        }
    }
    true
}

pub(crate) fn photon_number(rho: &CMatrix, space: SpaceDescriptor) -> f64 {
    (0..space.dimension()).map(|i| space.label(i).1 as f64 * rho[(i, i)].re).sum()
}

/// `Σ_n ⟨ē,n|ρ|ē,n⟩` over all excited-ladder states in the space. The
/// unpaired `|e,N⟩` at the cutoff counts as its own ladder member.
pub(crate) fn excited_ladder_population(rho: &CMatrix, space: SpaceDescriptor, params: &SystemParams) -> f64 {
    let cutoff = space.fock_cutoff();
    let mut total = 0.0;
    for n in 0..cutoff {
        let [(qa, na, ca), (qb, nb, cb)] = dressed_components(Ladder::Excited, n, params);
        let i = space.index(qa, na).unwrap();
        let j = space.index(qb, nb).unwrap();
        total += ca * ca * rho[(i, i)].re + cb * cb * rho[(j, j)].re + 2.0 * ca * cb * rho[(i, j)].re;
    }
    let top = space.index(Qubit::Excited, cutoff).unwrap();
    total + rho[(top, top)].re
}

/// Ladder populations `(ρ̄_ee, ρ̄_gg)` with `ρ̄_gg = 1 − ρ̄_ee`.
pub fn ladder_populations(rho: &DensityMatrix, params: &SystemParams) -> (f64, f64) {
    let ee = excited_ladder_population(&rho.entries, rho.space, params);
    (ee, 1.0 - ee)
}

/// Resonator frequency shift used for the initial coherent amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialShift {
    /// `±g²/Δ`.
    Dispersive,
    /// `±g²/Ω_S` with `Ω_S` at the self-consistent photon number.
    #[default]
    Refined,
}

/// Coherent amplitude `α_in = −iε / [i(±shift + ω_r − ω_d) + κ/2]`, with the
/// upper sign for the excited ladder.
pub fn initial_amplitude(ladder: Ladder, params: &SystemParams, shift: InitialShift) -> Result<C64> {
    params.validate()?;
    if params.epsilon == 0.0 {
        return Ok(C64::default());
    }
    let (g, d) = (params.g, params.delta);
    let magnitude = match shift {
        InitialShift::Dispersive => params.chi()?,
        InitialShift::Refined => {
            let n_bar = steady_photon_number(params)?[0];
            let omega_s = (d * d + 4.0 * n_bar * g * g).sqrt() * if d < 0.0 { -1.0 } else { 1.0 };
            if omega_s == 0.0 {
                return Err(PurcellError::SingularConfiguration("Stark-shifted splitting vanishes".into()));
            }
            g * g / omega_s
        }
    };
    let sign = match ladder {
        Ladder::Excited => 1.0,
        Ladder::Ground => -1.0,
    };
    let denom = C64::new(params.kappa / 2.0, sign * magnitude + params.drive_detuning());
    if denom.norm() == 0.0 {
        return Err(PurcellError::SingularConfiguration(
            "undamped resonator driven on its shifted resonance".into(),
        ));
    }
    Ok(-C64::i() * params.epsilon / denom)
}

/// Poisson mass that may be dropped by the truncated coherent sum.
pub const INITIAL_TAIL_TOLERANCE: f64 = 1e-8;

/// `|ψ_in⟩ = e^{−|α|²/2} Σ_n α^n/sqrt(n!) |ladder, n⟩` as a pure density
/// matrix, with `α` from [`initial_amplitude`]. Fails when the Poisson mass
/// of ladder levels beyond the space exceeds [`INITIAL_TAIL_TOLERANCE`].
pub fn initial_state(
    ladder: Ladder,
    params: &SystemParams,
    space: SpaceDescriptor,
    shift: InitialShift,
) -> Result<DensityMatrix> {
    let alpha = initial_amplitude(ladder, params, shift)?;
    initial_state_with_amplitude(ladder, alpha, params, space)
}

pub fn initial_state_with_amplitude(
    ladder: Ladder,
    alpha: C64,
    params: &SystemParams,
    space: SpaceDescriptor,
) -> Result<DensityMatrix> {
    let top = match ladder {
        Ladder::Excited => space.fock_cutoff().checked_sub(1).ok_or_else(|| {
            PurcellError::TruncationRisk("excited ladder needs a Fock cutoff of at least 1".into())
        })?,
        Ladder::Ground => space.fock_cutoff(),
    };
    let n_bar = alpha.norm_sqr();
    let mut psi = DVector::<C64>::zeros(space.dimension());
    // Coefficients built by recursion: c_{n+1} = c_n α/sqrt(n+1).
    let mut coeff = C64::new((-n_bar / 2.0).exp(), 0.0);
    let mut kept = 0.0;
    for n in 0..=top {
        if n > 0 {
            coeff *= alpha / (n as f64).sqrt();
        }
        kept += coeff.norm_sqr();
        psi += dressed_state(ladder, n, params, space)? * coeff;
    }
    let tail = 1.0 - kept;
    if tail > INITIAL_TAIL_TOLERANCE {
        return Err(PurcellError::TruncationRisk(format!(
            "coherent amplitude |alpha|^2 = {n_bar:.3} leaves Poisson mass {tail:e} above cutoff {}",
            space.fock_cutoff()
        )));
    }
    let norm = psi.norm();
    psi /= C64::new(norm, 0.0);
    DensityMatrix::pure(space, &psi)
}
