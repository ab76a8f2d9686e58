//! Power-series oracle for the averaged rates, built from the closed-form
//! jump rates by series arithmetic rather than from any stored table.
#![allow(dead_code)]

/// Polynomial in `n`, ascending powers.
pub type Poly = Vec<f64>;
/// Series in `λ²` whose coefficients are polynomials in `n`.
pub type Series = Vec<Poly>;

pub fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_scale(a: &[f64], s: f64) -> Poly {
    a.iter().map(|v| v * s).collect()
}

/// `(n + shift)^k`.
fn shifted_power(shift: f64, k: usize) -> Poly {
    (0..k).fold(vec![1.0], |acc, _| poly_mul(&acc, &[shift, 1.0]))
}

fn series_mul(a: &Series, b: &Series, terms: usize) -> Series {
    (0..terms)
        .map(|k| {
            (0..=k).fold(Vec::new(), |acc, i| match (a.get(i), b.get(k - i)) {
                (Some(x), Some(y)) => poly_add(&acc, &poly_mul(x, y)),
                _ => acc,
            })
        })
        .collect()
}

fn series_sub(a: &Series, b: &Series) -> Series {
    (0..a.len().max(b.len()))
        .map(|k| {
            let empty = Vec::new();
            poly_add(a.get(k).unwrap_or(&empty), &poly_scale(b.get(k).unwrap_or(&empty), -1.0))
        })
        .collect()
}

fn series_poly_mul(a: &Series, p: &[f64]) -> Series {
    a.iter().map(|c| poly_mul(c, p)).collect()
}

/// Scalar Taylor coefficients of `√a` given those of `a`, `a₀ > 0`.
fn scalar_sqrt(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = a[0].sqrt();
    for k in 1..a.len() {
        let cross: f64 = (1..k).map(|i| b[i] * b[k - i]).sum();
        b[k] = (a[k] - cross) / (2.0 * b[0]);
    }
    b
}

/// Taylor coefficients in `u = λ²n` of `cos θ` and of `sin θ / √u`, where
/// `tan 2θ = 2√u`.
fn angle_functions(terms: usize) -> (Vec<f64>, Vec<f64>) {
    // cos 2θ = (1 + 4u)^(-1/2)
    let mut c2 = vec![0.0; terms + 1];
    let mut binom = 1.0;
    for k in 0..=terms {
        c2[k] = binom * 4f64.powi(k as i32);
        binom *= (-0.5 - k as f64) / (k as f64 + 1.0);
    }
    let cos_sq: Vec<f64> = (0..terms).map(|k| if k == 0 { (1.0 + c2[0]) / 2.0 } else { c2[k] / 2.0 }).collect();
    // (1 − cos 2θ)/(2u): drop the constant term and shift down.
    let sin_sq_over_u: Vec<f64> = (0..terms).map(|k| -c2[k + 1] / 2.0).collect();
    (scalar_sqrt(&cos_sq), scalar_sqrt(&sin_sq_over_u))
}

/// `f(λ²(n + shift))` as a series in `λ²`.
fn substitute(coeffs: &[f64], shift: f64) -> Series {
    coeffs.iter().enumerate().map(|(k, c)| poly_scale(&shifted_power(shift, k), *c)).collect()
}

/// `Γ_R(n)/κ` divided by `λ²`, as a series in `λ²`.
pub fn relax_jump_series(terms: usize) -> Series {
    let (h, f) = angle_functions(terms);
    let (f0, f1) = (substitute(&f, 0.0), substitute(&f, 1.0));
    let (h0, h1) = (substitute(&h, 0.0), substitute(&h, 1.0));
    let bracket = series_sub(
        &series_poly_mul(&series_mul(&f1, &h0, terms), &[1.0, 1.0]),
        &series_poly_mul(&series_mul(&f0, &h1, terms), &[0.0, 1.0]),
    );
    series_mul(&bracket, &bracket, terms)
}

/// `γ_E(n)/κ` divided by `λ²`, as a series in `λ²`.
pub fn excite_jump_series(terms: usize) -> Series {
    let (h, f) = angle_functions(terms);
    let (f0, fm) = (substitute(&f, 0.0), substitute(&f, -1.0));
    let (h0, hm) = (substitute(&h, 0.0), substitute(&h, -1.0));
    let bracket = series_sub(&series_mul(&f0, &hm, terms), &series_mul(&fm, &h0, terms));
    series_poly_mul(&series_mul(&bracket, &bracket, terms), &[0.0, -1.0, 1.0])
}

/// Stirling numbers of the second kind, `S(j, i)`.
fn stirling2(j: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for m in 1..=j {
        let mut next = vec![0.0; m + 1];
        for i in 1..=m {
            next[i] = i as f64 * row.get(i).copied().unwrap_or(0.0) + row[i - 1];
        }
        row = next;
    }
    row
}

/// Poisson average of a polynomial in `n`, as a polynomial in `n̄`
/// (moments are Touchard polynomials).
pub fn poisson_average_poly(p: &[f64]) -> Poly {
    let mut out = vec![0.0; p.len().max(1)];
    for (j, c) in p.iter().enumerate() {
        for (i, s) in stirling2(j).iter().enumerate() {
            out[i] += c * s;
        }
    }
    while out.len() > 1 && out.last() == Some(&0.0) {
        out.pop();
    }
    out
}

/// Averaged series, trailing near-zero coefficients trimmed.
pub fn averaged(series: &Series) -> Series {
    series
        .iter()
        .map(|p| {
            let mut q = poisson_average_poly(p);
            let scale = q.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            while q.len() > 1 && q.last().is_some_and(|v| v.abs() < 1e-9 * scale) {
                q.pop();
            }
            q
        })
        .collect()
}
