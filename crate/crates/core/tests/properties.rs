use nalgebra::{DMatrix, Matrix4, Schur};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use purcell_core::dressed::{critical_photon_number, dressed_state, jump_rates, DressedBasis, Ladder};
use purcell_core::hilbert::{
    displacement, elementary_operator, hamiltonian_rotating, OperatorKind, SpaceDescriptor, SystemParams,
};
use purcell_core::linalg::{commutator, max_abs};
use purcell_core::rates::{averaged_rates, rate_approximation, Approximation};
use purcell_core::single_excitation::{
    complex_eigenenergies, evolution_matrix, purcell_rate_nodrive, NoDriveRate,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn hamiltonian_is_hermitian(d in -30.0f64..30.0, g in 0.01f64..3.0, eps in 0.0f64..2.0, n in 1usize..25) {
        let params = SystemParams::new(g, d, 1.0).with_drive(eps);
        let h = hamiltonian_rotating(&params, SpaceDescriptor::new(n)).unwrap();
        prop_assert!(h.relative_hermiticity_defect() < 1e-12);
    }

    #[test]
    fn creation_is_adjoint_of_annihilation(n in 1usize..40) {
        let s = SpaceDescriptor::new(n);
        let a = elementary_operator(OperatorKind::Annihilation, s).entries;
        let ad = elementary_operator(OperatorKind::Creation, s).entries;
        prop_assert_eq!(a.adjoint(), ad);
    }

    #[test]
    fn excitation_number_is_conserved(d in -30.0f64..30.0, g in 0.01f64..3.0, n in 1usize..30) {
        let s = SpaceDescriptor::new(n);
        let h = hamiltonian_rotating(&SystemParams::new(g, d, 1.0), s).unwrap().entries;
        let ne = elementary_operator(OperatorKind::TotalExcitations, s).entries;
        prop_assert!(max_abs(&commutator(&ne, &h)) < 1e-12);
    }

    #[test]
    fn displacement_composes_to_identity(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let s = SpaceDescriptor::new(40);
        let alpha = C64::new(re, im);
        let a = displacement(alpha, s).unwrap().entries;
        let b = displacement(-alpha, s).unwrap().entries;
        // Compare away from the top levels, which the truncation folds back.
        let prod = a * b;
        let dim = s.dimension();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let (_, ni) = s.label(i);
                let (_, nj) = s.label(j);
                if ni <= 20 && nj <= 20 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((prod[(i, j)] - want).norm());
                }
            }
        }
        prop_assert!(worst < 1e-8, "{}", worst);
    }

    #[test]
    fn generator_spectrum_matches_complex_energies(d in -20.0f64..20.0, k in 0.1f64..3.5) {
        let params = SystemParams::scaled(d, k);
        let m: Matrix4<C64> = evolution_matrix(&params);
        let ev = Schur::new(DMatrix::from_iterator(4, 4, m.iter().copied())).eigenvalues().unwrap();
        let e = complex_eigenenergies(&params).unwrap();
        let want = [
            C64::new(-e.gamma, 0.0),
            C64::new(-(k - e.gamma), 0.0),
            C64::new(-k / 2.0, e.omega),
            C64::new(-k / 2.0, -e.omega),
        ];
        let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for w in want {
            let best = ev.iter().map(|v| (v - w).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best <= 1e-10 * scale, "{} vs {:?}", w, ev);
        }
    }

    #[test]
    fn overlap_rate_error_bound(d in -20.0f64..20.0, k in 0.05f64..3.9) {
        let params = SystemParams::scaled(d, k);
        let exact = purcell_rate_nodrive(&params, NoDriveRate::Exact).unwrap();
        let overlap = purcell_rate_nodrive(&params, NoDriveRate::EigenstateOverlap).unwrap();
        prop_assert!(((overlap - exact) / exact).abs() < 0.25 * k * k / (d * d + 4.0));
    }

    #[test]
    fn dressed_pair_is_orthonormal_eigenpair(d in prop_oneof![-20.0f64..-0.5, 0.5f64..20.0], n in 0usize..25) {
        let params = SystemParams::scaled(d, 1.0);
        let s = SpaceDescriptor::new(30);
        let e = dressed_state(Ladder::Excited, n, &params, s).unwrap();
        let g = dressed_state(Ladder::Ground, n + 1, &params, s).unwrap();
        prop_assert!((e.norm() - 1.0).abs() < 1e-14 && (g.norm() - 1.0).abs() < 1e-14);
        prop_assert!(e.dotc(&g).norm() < 1e-14);
        let h = hamiltonian_rotating(&params, s).unwrap().entries;
        let half = DressedBasis::new(params).unwrap().splitting((n + 1) as f64) / 2.0;
        let scale = max_abs(&h);
        prop_assert!((&h * &e - &e * C64::from(half)).norm() < 1e-10 * scale);
        prop_assert!((&h * &g + &g * C64::from(half)).norm() < 1e-10 * scale);
    }

    #[test]
    fn jump_rates_even_in_detuning(d in 0.5f64..25.0, n in 0.0f64..200.0) {
        let a = jump_rates(n, &SystemParams::scaled(d, 1.0)).unwrap();
        let b = jump_rates(n, &SystemParams::scaled(-d, 1.0)).unwrap();
        prop_assert!((a.gamma_r - b.gamma_r).abs() <= 1e-14 * a.gamma_r);
        prop_assert!((a.gamma_e - b.gamma_e).abs() <= 1e-12 * a.gamma_e.max(1e-300));
    }

    #[test]
    fn averaged_rates_linear_in_kappa(d in 3.0f64..25.0, n in 0.0f64..60.0, k in 0.05f64..4.0) {
        let one = averaged_rates(n, &SystemParams::scaled(d, k)).unwrap();
        let two = averaged_rates(n, &SystemParams::scaled(d, 2.0 * k)).unwrap();
        prop_assert!((two.gamma_r / one.gamma_r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn excitation_small_below_critical_photon_number(
        d in prop::sample::select(vec![5.0, 10.0, 15.0, 20.0]),
        frac in 0.01f64..1.0,
    ) {
        let params = SystemParams::scaled(d, 1.0);
        let nc = critical_photon_number(&params).unwrap();
        let r = averaged_rates(frac * nc, &params).unwrap();
        prop_assert!(r.gamma_e / r.gamma_r <= 1.1 * (frac / 4.0).powi(2));
    }
}

#[test]
fn zero_photons_reproduce_no_drive_rate() {
    for d in [-7.0, 2.0, 5.0, 20.0] {
        let params = SystemParams::scaled(d, 1.0);
        let gp = purcell_rate_nodrive(&params, NoDriveRate::EigenstateOverlap).unwrap();
        assert_eq!(averaged_rates(0.0, &params).unwrap().gamma_r, gp);
    }
}

#[test]
fn relaxation_curves_collapse_for_large_detuning() {
    let curve = |d: f64, x: f64| {
        let params = SystemParams::scaled(d, 1.0);
        let nc = critical_photon_number(&params).unwrap();
        let gp = purcell_rate_nodrive(&params, NoDriveRate::EigenstateOverlap).unwrap();
        averaged_rates(x * nc, &params).unwrap().gamma_r / gp
    };
    for k in 0..=40 {
        let x = k as f64 * 0.1;
        let vals = [curve(10.0, x), curve(15.0, x), curve(20.0, x)];
        // Each curve against the mean of the family.
        let mean = vals.iter().sum::<f64>() / 3.0;
        let worst = vals.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 0.02, "x {x}: {vals:?}");
    }
}

#[test]
fn rates_become_identical_far_above_critical() {
    for d in [5.0, 10.0, 15.0, 20.0] {
        let params = SystemParams::scaled(d, 1.0);
        let n = 1e4 * critical_photon_number(&params).unwrap();
        let relax = rate_approximation(Approximation::RelaxLargeNbar, n, &params).unwrap();
        let excite = rate_approximation(Approximation::ExciteLargeNbar, n, &params).unwrap();
        assert!(excite / relax > 0.96, "d {d}: {}", excite / relax);
    }
}
