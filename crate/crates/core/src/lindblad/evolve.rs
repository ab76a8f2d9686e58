use num_complex::Complex64 as C64;

use crate::error::{invalid, PurcellError, Result};
use crate::hilbert::{hamiltonian_rotating, SpaceDescriptor, SystemParams};
use crate::linalg::CMatrix;
use crate::ode::{integrate, OdeOptions, OdeStats, Tolerances};

use super::density::{excited_ladder_population, photon_number, DensityMatrix};

/// Right-hand side `ρ̇ = K + K† + κ aρa†` with `K = −i H_eff ρ` and
/// `H_eff = H − iκ a†a/2`, acting on column-major flattened matrices.
///
/// `H_eff` has at most four entries per row in this basis, so it is kept
/// as per-row entry lists.
pub(crate) struct LindbladRhs {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
    /// For each basis index, `(index one photon up, sqrt(n+1))` if present.
    lower_from: Vec<Option<(usize, f64)>>,
    kappa: f64,
    scratch: Vec<C64>,
}

impl LindbladRhs {
    pub(crate) fn new(params: &SystemParams, space: SpaceDescriptor) -> Result<Self> {
        let h = hamiltonian_rotating(params, space)?.entries;
        let dim = space.dimension();
        let minus_i = C64::new(0.0, -1.0);
        let rows = (0..dim)
            .map(|i| {
                let n = space.label(i).1 as f64;
                (0..dim)
                    .filter_map(|k| {
                        let mut v = h[(i, k)];
                        if i == k {
                            v -= C64::new(0.0, params.kappa * n / 2.0);
                        }
                        (v != C64::default()).then_some((k, minus_i * v))
                    })
                    .collect()
            })
            .collect();
        let lower_from = (0..dim)
            .map(|i| {
                let (q, n) = space.label(i);
                space.index(q, n + 1).map(|j| (j, ((n + 1) as f64).sqrt()))
            })
            .collect();
        Ok(Self { dim, rows, lower_from, kappa: params.kappa, scratch: vec![C64::default(); dim * dim] })
    }

    pub(crate) fn apply(&mut self, y: &[C64], dy: &mut [C64]) {
        let d = self.dim;
        let k = &mut self.scratch;
        // K[:, j] = (−i H_eff) ρ[:, j]
        for j in 0..d {
            let col = &y[j * d..(j + 1) * d];
            let out = &mut k[j * d..(j + 1) * d];
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = C64::default();
                for &(c, v) in row {
                    acc += v * col[c];
                }
                out[i] = acc;
            }
        }
        for j in 0..d {
            let lj = self.lower_from[j];
            for i in 0..d {
                let mut v = k[j * d + i] + k[i * d + j].conj();
                if let (Some((ui, ai)), Some((uj, aj))) = (self.lower_from[i], lj) {
                    v += y[uj * d + ui] * (self.kappa * ai * aj);
                }
                dy[j * d + i] = v;
            }
        }
    }
}

fn hermitize(y: &mut [C64], d: usize) {
    for j in 0..d {
        let jj = j * d + j;
        y[jj] = C64::new(y[jj].re, 0.0);
        for i in j + 1..d {
            let a = y[j * d + i];
            let b = y[i * d + j];
            let m = (a + b.conj()) * 0.5;
            y[j * d + i] = m;
            y[i * d + j] = m.conj();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub tol: Tolerances,
    /// Check positivity at every `positivity_stride`-th record (0 disables).
    pub positivity_stride: usize,
    pub keep_states: bool,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), positivity_stride: 1, keep_states: false, max_steps: 50_000_000 }
    }
}

/// Reduced observables recorded along a master-equation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SystemParams,
    pub space: SpaceDescriptor,
    pub times: Vec<f64>,
    /// `ρ̄_ee`, the excited-ladder population.
    pub rho_ee_bar: Vec<f64>,
    /// `ρ̄_gg = 1 − ρ̄_ee`.
    pub rho_gg_bar: Vec<f64>,
    /// `Tr(ρ n̂)`.
    pub photon_number: Vec<f64>,
    pub trace: Vec<f64>,
    /// Full states at each record when requested.
    pub states: Option<Vec<DensityMatrix>>,
    pub final_state: DensityMatrix,
    pub stats: OdeStats,
}

/// Integrate the Lindblad equation with photon loss from `rho0` and record
/// reduced observables at each grid time. Fails if the trace drifts by more
/// than `1e-7` or an eigenvalue drops below `−1e-7` (ten times the
/// invariant tolerances).
pub fn evolve(rho0: &DensityMatrix, params: &SystemParams, t_grid: &[f64], opts: &EvolveOptions) -> Result<Trajectory> {
    params.validate()?;
    opts.tol.validate()?;
    let space = rho0.space;
    let d = space.dimension();
    if rho0.hermiticity_defect() > 1e-10 || (rho0.trace() - 1.0).norm() > 1e-8 {
        return invalid("initial state is not a normalized Hermitian matrix");
    }
    let mut rhs = LindbladRhs::new(params, space)?;
    let ode = OdeOptions { tol: opts.tol, initial_step: None, max_step: None, max_steps: opts.max_steps };

    let mut traj = Trajectory {
        params: *params,
        space,
        times: Vec::with_capacity(t_grid.len()),
        rho_ee_bar: Vec::with_capacity(t_grid.len()),
        rho_gg_bar: Vec::with_capacity(t_grid.len()),
        photon_number: Vec::with_capacity(t_grid.len()),
        trace: Vec::with_capacity(t_grid.len()),
        states: opts.keep_states.then(Vec::new),
        final_state: rho0.clone(),
        stats: OdeStats::default(),
    };
    let y0: Vec<C64> = rho0.entries.as_slice().to_vec();
    let mut last = y0.clone();
    let stats = integrate(
        &y0,
        t_grid,
        &ode,
        |_, y, dy| rhs.apply(y, dy),
        |y| hermitize(y, d),
        |k, t, y| {
            let m = CMatrix::from_column_slice(d, d, y);
            let tr: f64 = (0..d).map(|i| m[(i, i)].re).sum();
            if (tr - 1.0).abs() > 1e-7 {
                return Err(PurcellError::IntegrationFailure {
                    time: t,
                    reason: format!("trace drifted to {tr}"),
                });
            }
            let need_positivity = opts.positivity_stride > 0 && k % opts.positivity_stride == 0;
            let state = DensityMatrix { space, entries: m };
            if need_positivity && !state.is_positive_within(1e-7) {
                return Err(PurcellError::IntegrationFailure {
                    time: t,
                    reason: format!("density matrix lost positivity, min eigenvalue {:e}", state.min_eigenvalue()),
                });
            }
            let ee = excited_ladder_population(&state.entries, space, params);
            traj.times.push(t);
            traj.rho_ee_bar.push(ee);
            traj.rho_gg_bar.push(1.0 - ee);
            traj.photon_number.push(photon_number(&state.entries, space));
            traj.trace.push(tr);
            if let Some(states) = traj.states.as_mut() {
                states.push(state);
            }
            last.copy_from_slice(y);
            Ok(())
        },
    )?;
    traj.final_state = DensityMatrix { space, entries: CMatrix::from_column_slice(d, d, &last) };
    traj.stats = stats;
    Ok(traj)
}
