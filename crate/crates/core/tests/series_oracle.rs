mod common;

use purcell_core::rates::{SeriesTable, EXCITE_SERIES, RELAX_SERIES};

fn assert_poly_eq(got: &[f64], want: &[f64], what: &str) {
    let len = got.len().max(want.len());
    for i in 0..len {
        let g = got.get(i).copied().unwrap_or(0.0);
        let w = want.get(i).copied().unwrap_or(0.0);
        assert!((g - w).abs() < 1e-9 * w.abs().max(1.0), "{what}: n̄^{i} coefficient {g} vs {w}");
    }
}

fn check_table(table: &SeriesTable, averaged: &common::Series) {
    let skip = ((table.lead_power - 2) / 2) as usize;
    for k in 0..skip {
        assert!(averaged[k].iter().all(|c| c.abs() < 1e-9), "λ^{} term should vanish", 2 * k + 2);
    }
    let lift: Vec<f64> = (0..table.nbar_power).map(|_| 0.0).chain([1.0]).collect();
    for (k, poly) in table.terms.iter().enumerate() {
        let want = common::poly_mul(poly, &lift);
        assert_poly_eq(&averaged[skip + k], &want, &format!("λ^{}", table.lead_power + 2 * k as u32));
    }
}

#[test]
fn relaxation_table_matches_expanded_jump_rate() {
    let avg = common::averaged(&common::relax_jump_series(5));
    check_table(&RELAX_SERIES, &avg);
}

#[test]
fn excitation_table_matches_expanded_jump_rate() {
    let avg = common::averaged(&common::excite_jump_series(6));
    check_table(&EXCITE_SERIES, &avg);
}

#[test]
fn touchard_moments() {
    // ⟨n²⟩ = n̄ + n̄², ⟨n³⟩ = n̄ + 3n̄² + n̄³
    assert_poly_eq(&common::poisson_average_poly(&[0.0, 0.0, 1.0]), &[0.0, 1.0, 1.0], "m2");
    assert_poly_eq(&common::poisson_average_poly(&[0.0, 0.0, 0.0, 1.0]), &[0.0, 1.0, 3.0, 1.0], "m3");
}

#[test]
fn jump_series_matches_closed_form_at_small_lambda() {
    use purcell_core::dressed::jump_rates;
    use purcell_core::hilbert::SystemParams;
    let params = SystemParams::scaled(50.0, 1.0);
    let l2: f64 = 1.0 / 2500.0;
    let relax = common::relax_jump_series(5);
    for n in [0usize, 1, 4, 9] {
        let x = n as f64;
        let sum: f64 = relax
            .iter()
            .enumerate()
            .map(|(k, p)| l2.powi(k as i32) * p.iter().rev().fold(0.0, |a, c| a * x + c))
            .sum();
        let want = jump_rates(x, &params).unwrap().gamma_r;
        assert!((l2 * sum / want - 1.0).abs() < 1e-8, "n {n}: {:e}", l2 * sum / want - 1.0);
    }
}
