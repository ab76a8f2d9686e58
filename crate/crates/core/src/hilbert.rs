//! Truncated qubit ⊗ Fock space and the elementary operators acting on it.
//!
//! Basis ordering is fixed for the whole crate: the qubit level is the slow
//! index and the photon number the fast one, so `|q, n⟩` sits at
//! `q * (N + 1) + n` with `g = 0`, `e = 1` and `N` the Fock cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{invalid, PurcellError, Result};
use crate::linalg::{self, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    Ground,
    Excited,
}

impl Qubit {
    fn slot(self) -> usize {
        match self {
            Qubit::Ground => 0,
            Qubit::Excited => 1,
        }
    }
}

/// Truncated two-level ⊗ Fock space keeping photon numbers `0..=fock_cutoff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceDescriptor {
    fock_cutoff: usize,
}

impl SpaceDescriptor {
    pub fn new(fock_cutoff: usize) -> Self {
        Self { fock_cutoff }
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn dimension(&self) -> usize {
        2 * self.fock_dim()
    }

    /// Basis index of `|q, n⟩`, or `None` above the cutoff.
    pub fn index(&self, q: Qubit, n: usize) -> Option<usize> {
        (n <= self.fock_cutoff).then(|| q.slot() * self.fock_dim() + n)
    }

    /// Inverse of [`index`](Self::index).
    pub fn label(&self, idx: usize) -> (Qubit, usize) {
        assert!(idx < self.dimension(), "basis index {idx} out of range");
        let q = if idx < self.fock_dim() { Qubit::Ground } else { Qubit::Excited };
        (q, idx % self.fock_dim())
    }

    pub fn basis_vector(&self, q: Qubit, n: usize) -> Result<DVector<C64>> {
        let idx = self.index(q, n).ok_or_else(|| {
            PurcellError::TruncationRisk(format!(
                "photon number {n} above cutoff {}",
                self.fock_cutoff
            ))
        })?;
        let mut v = DVector::zeros(self.dimension());
        v[idx] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

/// Validating constructor taking a signed cutoff, as read from user input.
pub fn build_space(fock_cutoff: i64) -> Result<SpaceDescriptor> {
    if fock_cutoff < 0 {
        return invalid(format!("Fock cutoff must be >= 0, got {fock_cutoff}"));
    }
    Ok(SpaceDescriptor::new(fock_cutoff as usize))
}

/// Default Fock cutoff for a target mean photon number:
/// `ceil(n + 10 sqrt(n + 1) + 15)`. Keeps the coherent-state tail below
/// 1e-8 up to a few tens of photons.
pub fn default_cutoff(n_bar_target: f64) -> usize {
    let n = n_bar_target.max(0.0);
    (n + 10.0 * (n + 1.0).sqrt() + 15.0).ceil() as usize
}

/// Physical constants of the qubit–resonator model, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Qubit–resonator coupling g.
    pub g: f64,
    /// Detuning Δ = ω_q − ω_r.
    pub delta: f64,
    /// Resonator energy decay rate κ.
    pub kappa: f64,
    /// Drive amplitude ε.
    pub epsilon: f64,
    pub omega_r: f64,
    pub omega_d: f64,
    /// Transmon anharmonicity, only used by the three-level estimate.
    pub anharmonicity: Option<f64>,
}

impl SystemParams {
    /// Undriven system with the drive on resonance and `ω_r = 0` (the
    /// rotating frame only ever sees `ω_r − ω_d`).
    pub fn new(g: f64, delta: f64, kappa: f64) -> Self {
        Self {
            g,
            delta,
            kappa,
            epsilon: 0.0,
            omega_r: 0.0,
            omega_d: 0.0,
            anharmonicity: None,
        }
    }

    /// Parameters in units of `g`: `g = 1`, `Δ = delta_over_g`, `κ = kappa_over_g`.
    pub fn scaled(delta_over_g: f64, kappa_over_g: f64) -> Self {
        Self::new(1.0, delta_over_g, kappa_over_g)
    }

    pub fn with_drive(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_frequencies(mut self, omega_r: f64, omega_d: f64) -> Self {
        self.omega_r = omega_r;
        self.omega_d = omega_d;
        self
    }

    pub fn with_anharmonicity(mut self, anharmonicity: f64) -> Self {
        self.anharmonicity = Some(anharmonicity);
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.g, self.delta, self.kappa, self.epsilon, self.omega_r, self.omega_d]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return invalid("system parameters must be finite");
        }
        if self.kappa < 0.0 {
            return invalid(format!("kappa must be >= 0, got {}", self.kappa));
        }
        Ok(())
    }

    /// λ = g/Δ.
    pub fn lambda(&self) -> Result<f64> {
        if self.delta == 0.0 {
            return invalid("lambda = g/delta needs a nonzero detuning");
        }
        Ok(self.g / self.delta)
    }

    /// Dispersive shift χ = g²/Δ.
    pub fn chi(&self) -> Result<f64> {
        if self.delta == 0.0 {
            return invalid("chi = g^2/delta needs a nonzero detuning");
        }
        Ok(self.g * self.g / self.delta)
    }

    /// Resonator-minus-drive detuning `ω_r − ω_d`.
    pub fn drive_detuning(&self) -> f64 {
        self.omega_r - self.omega_d
    }

    pub fn drive_on_resonance(&self) -> bool {
        let scale = self.omega_r.abs().max(self.omega_d.abs()).max(1.0);
        self.drive_detuning().abs() <= 1e-12 * scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilation,
    Creation,
    Number,
    SigmaPlus,
    SigmaMinus,
    SigmaZ,
    /// `a†a + |e⟩⟨e|`.
    TotalExcitations,
    Identity,
}

/// Dense operator on a [`SpaceDescriptor`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub space: SpaceDescriptor,
    pub entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(space: SpaceDescriptor, entries: CMatrix) -> Result<Self> {
        let d = space.dimension();
        if entries.shape() != (d, d) {
            return invalid(format!(
                "operator shape {:?} does not match space dimension {d}",
                entries.shape()
            ));
        }
        Ok(Self { space, entries })
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, entries: self.entries.adjoint() }
    }

    /// `max |H − H†| / max(|H|, tiny)`.
    pub fn relative_hermiticity_defect(&self) -> f64 {
        let scale = linalg::max_abs(&self.entries).max(f64::MIN_POSITIVE);
        linalg::hermiticity_defect(&self.entries) / scale
    }

    pub fn element(&self, bra: (Qubit, usize), ket: (Qubit, usize)) -> C64 {
        let i = self.space.index(bra.0, bra.1).expect("bra within cutoff");
        let j = self.space.index(ket.0, ket.1).expect("ket within cutoff");
        self.entries[(i, j)]
    }
}

fn qubit_matrix(kind: OperatorKind) -> CMatrix {
    let one = C64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(2, 2);
    match kind {
        // |e⟩⟨g|: row e = 1, column g = 0.
        OperatorKind::SigmaPlus => m[(1, 0)] = one,
        OperatorKind::SigmaMinus => m[(0, 1)] = one,
        OperatorKind::SigmaZ => {
            m[(1, 1)] = one;
            m[(0, 0)] = -one;
        }
        _ => unreachable!("not a qubit operator"),
    }
    m
}

fn fock_matrix(kind: OperatorKind, fock_dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(fock_dim, fock_dim);
    for n in 1..fock_dim {
        let amp = C64::new((n as f64).sqrt(), 0.0);
        match kind {
            OperatorKind::Annihilation => m[(n - 1, n)] = amp,
            OperatorKind::Creation => m[(n, n - 1)] = amp,
            _ => unreachable!("not a ladder operator"),
        }
    }
    m
}

/// Elementary operator on the composite space.
pub fn elementary_operator(kind: OperatorKind, space: SpaceDescriptor) -> OperatorMatrix {
    let fd = space.fock_dim();
    let id_q = CMatrix::identity(2, 2);
    let id_f = CMatrix::identity(fd, fd);
    let entries = match kind {
        OperatorKind::Annihilation | OperatorKind::Creation => {
            linalg::kron(&id_q, &fock_matrix(kind, fd))
        }
        OperatorKind::Number => {
            let diag = DVector::from_fn(fd, |n, _| C64::new(n as f64, 0.0));
            linalg::kron(&id_q, &DMatrix::from_diagonal(&diag))
        }
        OperatorKind::SigmaPlus | OperatorKind::SigmaMinus | OperatorKind::SigmaZ => {
            linalg::kron(&qubit_matrix(kind), &id_f)
        }
        OperatorKind::TotalExcitations => {
            let diag = DVector::from_fn(space.dimension(), |i, _| {
                let (q, n) = space.label(i);
                let e = if q == Qubit::Excited { 1.0 } else { 0.0 };
                C64::new(n as f64 + e, 0.0)
            });
            DMatrix::from_diagonal(&diag)
        }
        OperatorKind::Identity => CMatrix::identity(space.dimension(), space.dimension()),
    };
    OperatorMatrix { space, entries }
}

/// Rotating-frame Hamiltonian `(Δ/2)σz + g(a†σ− + aσ+) + ε(a + a†)`.
///
/// Only the resonant drive `ω_d = ω_r` is time independent in this frame;
/// anything else is rejected.
pub fn hamiltonian_rotating(params: &SystemParams, space: SpaceDescriptor) -> Result<OperatorMatrix> {
    params.validate()?;
    if !params.drive_on_resonance() {
        return Err(PurcellError::UnsupportedConfiguration(format!(
            "drive detuning omega_r - omega_d = {} makes the rotating-frame Hamiltonian time dependent",
            params.drive_detuning()
        )));
    }
    let a = elementary_operator(OperatorKind::Annihilation, space).entries;
    let ad = elementary_operator(OperatorKind::Creation, space).entries;
    let sp = elementary_operator(OperatorKind::SigmaPlus, space).entries;
    let sm = elementary_operator(OperatorKind::SigmaMinus, space).entries;
    let sz = elementary_operator(OperatorKind::SigmaZ, space).entries;

    let c = |x: f64| C64::new(x, 0.0);
    let mut h = sz * c(params.delta / 2.0) + (&ad * &sm + &a * &sp) * c(params.g);
    if params.epsilon != 0.0 {
        h += (&a + &ad) * c(params.epsilon);
    }
    OperatorMatrix::new(space, h)
}

/// Displacement `D(α) = exp(α a† − α* a)` on the Fock factor, identity on
/// the qubit. Refuses `|α|² > N/4` where the truncated generator no longer
/// represents a coherent displacement faithfully.
pub fn displacement(alpha: C64, space: SpaceDescriptor) -> Result<OperatorMatrix> {
    let limit = space.fock_cutoff() as f64 / 4.0;
    if alpha.norm_sqr() > limit {
        return Err(PurcellError::TruncationRisk(format!(
            "|alpha|^2 = {} exceeds cutoff/4 = {limit}",
            alpha.norm_sqr()
        )));
    }
    let fd = space.fock_dim();
    let a = fock_matrix(OperatorKind::Annihilation, fd);
    let ad = fock_matrix(OperatorKind::Creation, fd);
    let gen = ad * alpha - a * alpha.conj();
    let d_fock = linalg::expm(&gen);
    OperatorMatrix::new(space, linalg::kron(&CMatrix::identity(2, 2), &d_fock))
}
