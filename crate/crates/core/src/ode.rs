//! Adaptive Dormand–Prince 5(4) integrator for flattened complex states.

use num_complex::Complex64 as C64;

use crate::error::{invalid, PurcellError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-8, abs: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel > 0.0 && self.abs > 0.0) {
            return invalid(format!("tolerances must be positive, got {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub tol: Tolerances,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: Tolerances::default(), initial_step: None, max_step: None, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    out.copy_from_slice(y);
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        let hc = h * c;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += ki * hc;
        }
    }
}

/// Integrate `y' = rhs(t, y)` from `t_grid[0]`, calling `record` at every
/// grid time (including the first). `post_step` may project the state
/// after each accepted step.
pub fn integrate<F, P, R>(
    y0: &[C64],
    t_grid: &[f64],
    opts: &OdeOptions,
    mut rhs: F,
    mut post_step: P,
    mut record: R,
) -> Result<OdeStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    P: FnMut(&mut [C64]),
    R: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    opts.tol.validate()?;
    if t_grid.is_empty() {
        return invalid("time grid is empty");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("time grid must be strictly increasing");
    }
    let n = y0.len();
    let tol = opts.tol;
    let mut stats = OdeStats::default();
    let mut y = y0.to_vec();
    let mut t = t_grid[0];
    record(0, t, &y)?;
    if t_grid.len() == 1 {
        return Ok(stats);
    }

    let mut k1 = vec![C64::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y_new = k1.clone();

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;

    let span = t_grid[t_grid.len() - 1] - t;
    let max_step = opts.max_step.unwrap_or(f64::INFINITY).min(span);
    let mut h = match opts.initial_step {
        Some(h0) if h0 > 0.0 => h0,
        _ => {
            let weight = |v: &[C64], y: &[C64]| -> f64 {
                let s: f64 = v
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a.norm() / (tol.abs + tol.rel * b.norm())).powi(2))
                    .sum();
                (s / n.max(1) as f64).sqrt()
            };
            let d0 = weight(&y, &y);
            let d1 = weight(&k1, &y);
            if d0 < 1e-5 || d1 < 1e-5 {
                1e-6 * span
            } else {
                0.01 * d0 / d1
            }
        }
    }
    .min(max_step);

    for (gi, &t_target) in t_grid.iter().enumerate().skip(1) {
        while t < t_target {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(PurcellError::IntegrationFailure {
                    time: t,
                    reason: format!("step budget {} exhausted", opts.max_steps),
                });
            }
            let remaining = t_target - t;
            let landing = h >= remaining;
            let step = if landing { remaining } else { h };
            if step <= f64::EPSILON * t.abs().max(1.0) * 4.0 {
                return Err(PurcellError::IntegrationFailure {
                    time: t,
                    reason: format!("step size underflow (h = {step:e})"),
                });
            }

            combine(&mut tmp, &y, step, &[(A21, &k1)]);
            rhs(t + C2 * step, &tmp, &mut k2);
            combine(&mut tmp, &y, step, &[(A31, &k1), (A32, &k2)]);
            rhs(t + C3 * step, &tmp, &mut k3);
            combine(&mut tmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            rhs(t + C4 * step, &tmp, &mut k4);
            combine(&mut tmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            rhs(t + C5 * step, &tmp, &mut k5);
            combine(
                &mut tmp,
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            rhs(t + step, &tmp, &mut k6);
            combine(
                &mut y_new,
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            rhs(t + step, &y_new, &mut k7);
            stats.rhs_evals += 6;

            let mut acc = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * step;
                let sc = tol.abs + tol.rel * y[i].norm().max(y_new[i].norm());
                acc += (e.norm() / sc).powi(2);
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(PurcellError::IntegrationFailure {
                    time: t,
                    reason: "non-finite error estimate".into(),
                });
            }

            if err <= 1.0 {
                stats.accepted += 1;
                t = if landing { t_target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                post_step(&mut y);
                std::mem::swap(&mut k1, &mut k7);
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A shortened landing step says nothing about the natural size.
                if !landing || step >= h {
                    h = (step * factor).min(max_step);
                }
            } else {
                stats.rejected += 1;
                let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
                h = step * factor;
            }
        }
        record(gi, t, &y)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let mut out = Vec::new();
        integrate(
            &[C64::new(1.0, 0.0)],
            &grid,
            &OdeOptions::default(),
            |_, y, dy| dy[0] = -y[0] * 1.3,
            |_| {},
            |_, t, y| {
                out.push((t, y[0]));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(out.len(), 11);
        for (t, y) in out {
            assert!((y.re - (-1.3 * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn complex_rotation_with_tight_tolerance() {
        let grid = [0.0, 1.0, 10.0, 30.0];
        let opts = OdeOptions { tol: Tolerances { rel: 1e-11, abs: 1e-13 }, ..Default::default() };
        let w = 2.7;
        let mut last = C64::default();
        let stats = integrate(
            &[C64::new(1.0, 0.0)],
            &grid,
            &opts,
            |_, y, dy| dy[0] = C64::new(0.0, -w) * y[0],
            |_| {},
            |_, _, y| {
                last = y[0];
                Ok(())
            },
        )
        .unwrap();
        let want = C64::new(0.0, -w * 30.0).exp();
        assert!((last - want).norm() < 1e-8, "{last} vs {want}");
        assert!(stats.accepted > 10);
    }

    #[test]
    fn time_dependent_rhs_and_projection() {
        // y' = t, with a projection that zeroes the imaginary part.
        let mut fin = C64::default();
        integrate(
            &[C64::new(0.0, 0.0)],
            &[0.0, 2.0],
            &OdeOptions::default(),
            |t, _, dy| dy[0] = C64::new(t, 1e-3),
            |y| y[0].im = 0.0,
            |_, _, y| {
                fin = y[0];
                Ok(())
            },
        )
        .unwrap();
        assert!((fin.re - 2.0).abs() < 1e-10 && fin.im == 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let opts = OdeOptions::default();
        let r = integrate(&[C64::default()], &[1.0, 1.0], &opts, |_, _, _| {}, |_| {}, |_, _, _| Ok(()));
        assert!(r.is_err());
        let r = integrate(&[C64::default()], &[], &opts, |_, _, _| {}, |_| {}, |_, _, _| Ok(()));
        assert!(r.is_err());
    }

    #[test]
    fn step_budget_is_enforced() {
        let opts = OdeOptions { max_steps: 3, ..Default::default() };
        let r = integrate(
            &[C64::new(1.0, 0.0)],
            &[0.0, 100.0],
            &opts,
            |_, y, dy| dy[0] = C64::new(0.0, -50.0) * y[0],
            |_| {},
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(PurcellError::IntegrationFailure { .. })));
    }
}
