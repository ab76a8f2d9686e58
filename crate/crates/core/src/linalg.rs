//! Dense complex linear algebra shared by the operator and propagator code.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

/// Largest absolute column sum.
pub fn norm_1(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn norm_frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest |m - m^†| entry.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

// Pade coefficients b_0..b_13 and the theta_m thresholds for the 1-norm.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152;

fn scale(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * s)
}

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant (orders 3 to 13 selected from the 1-norm, Higham 2005).
/// The thresholds bound the relative backward error by the unit roundoff.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    if n == 0 {
        return ident;
    }
    let norm = norm_1(a);

    for &(order, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match order {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(a, coeffs);
            return solve_pade(&u, &v);
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = scale(a, 0.5f64.powi(squarings));
    let (u, v) = pade_13(&scaled);
    let mut r = solve_pade(&u, &v);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    let a2 = a * a;
    // Even powers A^0, A^2, A^4, ...
    let mut even = vec![ident];
    for k in 1..b.len() / 2 {
        let next = &even[k - 1] * &a2;
        even.push(next);
    }
    let mut u_inner = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for (k, pk) in even.iter().enumerate() {
        u_inner += scale(pk, b[2 * k + 1]);
        v += scale(pk, b[2 * k]);
    }
    (a * u_inner, v)
}

fn pade_13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &PADE13;
    let n = a.nrows();
    let ident = CMatrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    let u_inner = &a6 * u_hi
        + scale(&a6, b[7])
        + scale(&a4, b[5])
        + scale(&a2, b[3])
        + scale(&ident, b[1]);
    let u = a * u_inner;
    let v_hi = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    let v = &a6 * v_hi
        + scale(&a6, b[6])
        + scale(&a4, b[4])
        + scale(&a2, b[2])
        + scale(&ident, b[0]);
    (u, v)
}

fn solve_pade(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for the selected order")
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * a / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMatrix::zeros(5, 5);
        assert!(max_abs(&(expm(&z) - CMatrix::identity(5, 5))) == 0.0);
    }

    #[test]
    fn expm_matches_taylor_for_moderate_norm() {
        let a = CMatrix::from_fn(4, 4, |i, j| {
            C64::new(0.3 * (i as f64) - 0.2 * (j as f64), 0.1 * ((i * j) as f64) - 0.15)
        });
        // Norm spans several Pade branches as we scale.
        for s in [0.005, 0.1, 0.5, 1.5, 4.0, 9.0] {
            let m = scale(&a, s);
            let e = expm(&m);
            let t = taylor_expm(&m, 80);
            let err = max_abs(&(e - &t)) / max_abs(&t);
            // The reference sum itself loses digits once the norm is large.
            let tol = 1e-12 * s.max(1.0);
            assert!(err < tol, "scale {s}: rel err {err:e}");
        }
    }

    #[test]
    fn expm_rotation_generator() {
        // exp(theta J) with J = [[0,1],[-1,0]] is a rotation.
        let th = 0.7;
        let j = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(th, 0.0), C64::new(-th, 0.0), C64::new(0.0, 0.0)],
        );
        let r = expm(&j);
        assert!((r[(0, 0)].re - th.cos()).abs() < 1e-15);
        assert!((r[(0, 1)].re - th.sin()).abs() < 1e-15);
        assert!((r[(1, 0)].re + th.sin()).abs() < 1e-15);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(-30.0, 5.0),
            C64::new(2.0, -40.0),
        ]));
        let e = expm(&d);
        let want0 = C64::new(-30.0, 5.0).exp();
        let want1 = C64::new(2.0, -40.0).exp();
        assert!((e[(0, 0)] - want0).norm() / want0.norm() < 1e-13);
        assert!((e[(1, 1)] - want1).norm() / want1.norm() < 1e-13);
    }
}
