use crate::error::{invalid, PurcellError, Result};

use super::evolve::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMode {
    /// Slope of `−ln ρ̄_ee`.
    Relaxation,
    /// Slope of `−ln ρ̄_gg`.
    Excitation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitModel {
    /// Straight line; the rate is its slope.
    Linear,
    /// Two-level rate equation `u̇ = A − B·u` for the population `u` that is
    /// being filled (`1 − ρ̄_gg` when exciting, `ρ̄_ee` when relaxing), fitted
    /// in integral form. Excitation rate is `A`, relaxation rate `B − A`.
    /// Unlike the log slope it is not biased by repopulation of the source
    /// ladder during the window.
    RateEquation,
}

/// Window and acceptance rules for [`extract_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPolicy {
    pub t_start: f64,
    /// Stop once the tracked population falls below this fraction of its
    /// value at `t_start`.
    pub decay_fraction: f64,
    /// Saturation value of `ρ̄_ee`, `γ_E/(Γ_R + γ_E)`.
    pub saturation_floor: Option<f64>,
    /// Relaxation fits stop once `ρ̄_ee < floor_factor · floor`.
    pub floor_factor: f64,
    pub max_duration: Option<f64>,
    pub min_r_squared: f64,
    pub min_points: usize,
    pub model: FitModel,
}

impl FitPolicy {
    /// Window opening at `5/κ`, closing at `1/e` decay, `r² ≥ 0.999`.
    pub fn for_kappa(kappa: f64) -> Self {
        Self {
            t_start: 5.0 / kappa,
            decay_fraction: (-1.0f64).exp(),
            saturation_floor: None,
            floor_factor: 3.0,
            max_duration: None,
            min_r_squared: 0.999,
            min_points: 5,
            model: FitModel::Linear,
        }
    }

    pub fn with_saturation_floor(mut self, floor: f64) -> Self {
        self.saturation_floor = Some(floor);
        self
    }

    pub fn with_max_duration(mut self, duration: f64) -> Self {
        self.max_duration = Some(duration);
        self
    }

    pub fn with_model(mut self, model: FitModel) -> Self {
        self.model = model;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub r_squared: f64,
    pub saturation_floor: Option<f64>,
    pub points: usize,
}

/// Least squares for `y ≈ Σ_k c_k t^k`, `k < degree + 1`, on `t` shifted by
/// `t0` for conditioning. Returns coefficients in the shifted variable and r².
fn polyfit(t: &[f64], y: &[f64], degree: usize, t0: f64) -> Option<(Vec<f64>, f64)> {
    let m = degree + 1;
    let scale = t.iter().map(|x| (x - t0).abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut ata = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut aty = nalgebra::DVector::<f64>::zeros(m);
    for (&ti, &yi) in t.iter().zip(y) {
        let s = (ti - t0) / scale;
        let powers: Vec<f64> = (0..m).map(|k| s.powi(k as i32)).collect();
        for a in 0..m {
            aty[a] += powers[a] * yi;
            for b in 0..m {
                ata[(a, b)] += powers[a] * powers[b];
            }
        }
    }
    let c = ata.lu().solve(&aty)?;
    let coeffs: Vec<f64> = (0..m).map(|k| c[k] / scale.powi(k as i32)).collect();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let eval = |ti: f64| coeffs.iter().rev().fold(0.0, |acc, &ck| acc * (ti - t0) + ck);
    let ss_res: f64 = t.iter().zip(y).map(|(&ti, &yi)| (yi - eval(ti)).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Some((coeffs, r2))
}

/// Least squares for `u(t) − u(t₀) = A·(t − t₀) − B·∫u`, the integral form of
/// `u̇ = A − B·u`. Returns `(A, B, r²)`.
fn rate_equation_fit(t: &[f64], p: &[f64], mode: RateMode) -> Option<(f64, f64, f64)> {
    let u: Vec<f64> = match mode {
        RateMode::Excitation => p.iter().map(|x| 1.0 - x).collect(),
        RateMode::Relaxation => p.to_vec(),
    };
    let mut x = nalgebra::DMatrix::<f64>::zeros(t.len(), 2);
    let mut y = nalgebra::DVector::<f64>::zeros(t.len());
    let mut integral = 0.0;
    for k in 0..t.len() {
        if k > 0 {
            integral += 0.5 * (u[k] + u[k - 1]) * (t[k] - t[k - 1]);
        }
        x[(k, 0)] = t[k] - t[0];
        x[(k, 1)] = -integral;
        y[k] = u[k] - u[0];
    }
    let scale = [x.column(0).amax().max(f64::MIN_POSITIVE), x.column(1).amax().max(f64::MIN_POSITIVE)];
    for (j, s) in scale.iter().enumerate() {
        x.column_mut(j).scale_mut(1.0 / s);
    }
    let c = (x.transpose() * &x).lu().solve(&(x.transpose() * &y))?;
    let resid = &y - &x * &c;
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res = resid.norm_squared();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Some((c[0] / scale[0], c[1] / scale[1], r2))
}

/// Rate from the slope of `−ln(population)` over the policy window. For
/// relaxation pass `ρ̄_ee(t)`, for excitation `ρ̄_gg(t)`.
pub fn extract_rate(times: &[f64], populations: &[f64], mode: RateMode, policy: &FitPolicy) -> Result<RateFit> {
    if times.len() != populations.len() {
        return invalid("times and populations differ in length");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("times must be strictly increasing");
    }
    let first = times.iter().position(|&t| t >= policy.t_start - 1e-12 * policy.t_start.abs().max(1.0));
    let Some(first) = first else {
        return Err(PurcellError::FitQuality(format!("no samples after t_start = {}", policy.t_start)));
    };
    let p0 = populations[first];
    let mut last = first;
    for k in first..times.len() {
        let t = times[k];
        let p = populations[k];
        if !(p > 0.0) {
            return Err(PurcellError::FitQuality(format!("non-positive population {p} at t = {t}")));
        }
        if let Some(d) = policy.max_duration {
            if t - times[first] > d * (1.0 + 1e-12) {
                break;
            }
        }
        if mode == RateMode::Relaxation {
            if p < policy.decay_fraction * p0 {
                break;
            }
            if let Some(floor) = policy.saturation_floor {
                if p < policy.floor_factor * floor {
                    break;
                }
            }
        }
        last = k;
    }
    let points = last + 1 - first;
    let min_points = policy.min_points.max(match policy.model {
        FitModel::Linear => 2,
        FitModel::RateEquation => 3,
    });
    if points < min_points {
        return Err(PurcellError::FitQuality(format!(
            "fit window collapsed to {points} samples (need {min_points})"
        )));
    }
    let t = &times[first..=last];
    let y: Vec<f64> = populations[first..=last].iter().map(|p| -p.ln()).collect();
    let (rate, r_squared) = match policy.model {
        FitModel::Linear => {
            let (c, r2) = polyfit(t, &y, 1, t[0]).ok_or_else(|| PurcellError::FitQuality("singular fit".into()))?;
            (c[1], r2)
        }
        FitModel::RateEquation => {
            let p = &populations[first..=last];
            let (a, b, r2) = rate_equation_fit(t, p, mode).ok_or_else(|| PurcellError::FitQuality("singular fit".into()))?;
            match mode {
                RateMode::Excitation => (a, r2),
                RateMode::Relaxation => (b - a, r2),
            }
        }
    };
    let fit = RateFit {
        rate,
        t_start: t[0],
        t_end: t[t.len() - 1],
        r_squared,
        saturation_floor: policy.saturation_floor,
        points,
    };
    if !(r_squared >= policy.min_r_squared) {
        return Err(PurcellError::FitQuality(format!(
            "r^2 = {r_squared:.6} below {} over [{}, {}]",
            policy.min_r_squared, fit.t_start, fit.t_end
        )));
    }
    Ok(fit)
}

/// Time average of `Tr(ρ n̂)` from `t_start` to the end of the trajectory
/// (trapezoidal rule).
pub fn measure_photon_number(traj: &Trajectory, t_start: f64) -> Result<f64> {
    let first = traj.times.iter().position(|&t| t >= t_start - 1e-12 * t_start.abs().max(1.0));
    let Some(first) = first else {
        return invalid(format!("trajectory ends before t_start = {t_start}"));
    };
    let t = &traj.times[first..];
    let n = &traj.photon_number[first..];
    if t.len() < 2 {
        return invalid("photon-number window needs at least two samples");
    }
    let area: f64 = t.windows(2).zip(n.windows(2)).map(|(tw, nw)| 0.5 * (nw[0] + nw[1]) * (tw[1] - tw[0])).sum();
    Ok(area / (t[t.len() - 1] - t[0]))
}
