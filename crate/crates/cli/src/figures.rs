//! `reproduce`: one CSV per curve family for each figure.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use purcell_core::lindblad::{FitModel, RateMode};
use purcell_core::ode::Tolerances;
use purcell_core::rates::{approximate_rates, averaged_rates, real_n_rates, series_rates, series_validity, Regime};
use purcell_core::dressed::spectral_lines;
use purcell_core::SystemParams;

use crate::cli::{Figure, ReproduceArgs};
use crate::points::{gamma_p, n_crit, Drive, Point};
use crate::sim::{self, Outcome, Settings};
use crate::table::{num, Table};

const DELTAS: [f64; 4] = [5.0, 10.0, 15.0, 20.0];
const REGIMES: [Regime; 3] = [Regime::Leading, Regime::StrongSuppression, Regime::LargeNbar];

struct Ctx<'a> {
    args: &'a ReproduceArgs,
    g_hz: f64,
}

impl Ctx<'_> {
    fn params(&self, delta_over_g: f64, kappa_over_g: f64) -> SystemParams {
        Point { delta_over_g, kappa_over_g, drive: Drive::PhotonNumber(0.0) }.params(self.g_hz)
    }

    fn table(&self, header: &[&str], what: &str) -> Table {
        let mut t = Table::new(header);
        t.comment(format!("purcell reproduce figure={} {what}", self.args.figure.name()));
        t.comment(format!("g_over_2pi_hz={} fast={}", num(self.g_hz), self.args.fast));
        t
    }

    fn settings(&self, mode: RateMode) -> Settings {
        Settings {
            g_over_2pi_hz: self.g_hz,
            mode,
            cutoff: self.args.cutoff,
            tol: Tolerances { rel: self.args.tol_rel, abs: self.args.tol_abs },
            max_window: 10.0,
            fit_model: FitModel::Linear,
            check_convergence: false,
        }
    }
}

/// `k/den` for `k` in `lo..=hi`, exact at integers.
fn steps(lo: u32, hi: u32, den: f64) -> impl Iterator<Item = f64> {
    (lo..=hi).map(move |k| k as f64 / den)
}

fn gamma_d(p: &SystemParams) -> f64 {
    p.kappa * p.g * p.g / (p.delta * p.delta)
}

fn fig3(ctx: &Ctx) -> Result<Vec<(String, Table)>> {
    let header = ["delta_over_g", "n_bar", "n_bar_over_ncrit", "gamma_R_over_gamma_P"];
    let mut avg = ctx.table(&header, "curve=averaged");
    let mut real = ctx.table(&header, "curve=real_n");
    let mut series =
        ctx.table(&["delta_over_g", "n_bar", "n_bar_over_ncrit", "gamma_R_over_gamma_P", "series_valid"], "curve=series order=8");
    let mut crit = ctx.table(&["delta_over_g", "n_crit", "gamma_R_over_gamma_P"], "markers=n_crit");
    for d in [15.0, 10.0, 5.0] {
        let p = ctx.params(d, 1.0);
        let (gp, nc) = (gamma_p(&p)?, n_crit(&p)?);
        for n in steps(0, 400, 2.0) {
            let base = [num(d), num(n), num(n / nc)];
            let row = |v: f64| base.iter().cloned().chain([num(v / gp)]).collect();
            avg.push(row(averaged_rates(n, &p)?.gamma_r));
            real.push(row(real_n_rates(n, &p)?.gamma_r));
            if d == 15.0 {
                let mut r: Vec<String> = row(series_rates(n, &p, 8, 10)?.gamma_r);
                r.push(series_validity(n, &p).to_string());
                series.push(r);
            }
        }
        crit.push(vec![num(d), num(nc), num(averaged_rates(nc, &p)?.gamma_r / gp)]);
    }
    Ok(vec![
        ("fig3_averaged.csv".into(), avg),
        ("fig3_real_n.csv".into(), real),
        ("fig3_series.csv".into(), series),
        ("fig3_ncrit.csv".into(), crit),
    ])
}

/// Averaged curves versus `n̄/n_crit` and the three asymptotic forms over
/// `Γ_d`, for relaxation (`excite = false`) or excitation.
fn normalized_curves(ctx: &Ctx, excite: bool, x_max: u32) -> Result<Vec<(String, Table)>> {
    let fig = ctx.args.figure.name();
    let col = if excite { "gamma_E_over_gamma_P" } else { "gamma_R_over_gamma_P" };
    let pick = |r: purcell_core::rates::RateSet| if excite { r.gamma_e } else { r.gamma_r };
    let mut avg = ctx.table(&["delta_over_g", "n_bar_over_ncrit", "n_bar", col], "curve=averaged");
    for d in DELTAS {
        let p = ctx.params(d, 1.0);
        let (gp, nc) = (gamma_p(&p)?, n_crit(&p)?);
        for x in steps(0, x_max * 50, 50.0) {
            avg.push(vec![num(d), num(x), num(x * nc), num(pick(averaged_rates(x * nc, &p)?) / gp)]);
        }
    }
    let mut approx = ctx.table(
        &["n_bar_over_ncrit", "leading", "strong_suppression", "large_nbar"],
        "curves=approximations normalized by gamma_d = kappa g^2 / delta^2",
    );
    let p = ctx.params(20.0, 1.0);
    let (gd, nc) = (gamma_d(&p), n_crit(&p)?);
    for x in steps(1, x_max * 50, 50.0) {
        let mut row = vec![num(x)];
        for r in REGIMES {
            row.push(num(pick(approximate_rates(x * nc, &p, r)?) / gd));
        }
        approx.push(row);
    }
    Ok(vec![(format!("{fig}_averaged.csv"), avg), (format!("{fig}_approximations.csv"), approx)])
}

fn fig8(ctx: &Ctx) -> Result<Vec<(String, Table)>> {
    let mut t = ctx.table(
        &[
            "n_bar",
            "omega_s_over_g",
            "dispersive_plus_over_g",
            "dispersive_minus_over_g",
            "sideband_plus_over_g",
            "sideband_minus_over_g",
            "dispersive_plus_hz",
            "dispersive_minus_hz",
            "sideband_plus_hz",
            "sideband_minus_hz",
        ],
        "emission lines relative to omega_r at delta_over_g=10",
    );
    let p = ctx.params(10.0, 1.0);
    for n in steps(0, 100, 1.0) {
        let lines = spectral_lines(n, &p)?;
        let mut row = vec![num(n), num(lines[2] / p.g)];
        row.extend(lines.iter().map(|l| num(l / p.g)));
        row.extend(lines.iter().map(|l| num(l / std::f64::consts::TAU)));
        t.push(row);
    }
    Ok(vec![("fig8_lines.csv".into(), t)])
}

/// Analytic averaged curves versus `n̄` with the `n_crit` markers.
fn analytic_vs_n(ctx: &Ctx, excite: bool, n_max: &[(f64, f64)]) -> Result<Vec<(String, Table)>> {
    let fig = ctx.args.figure.name();
    let col = if excite { "gamma_E_over_gamma_P" } else { "gamma_R_over_gamma_P" };
    let mut avg = ctx.table(&["delta_over_g", "n_bar", "n_bar_over_ncrit", col], "curve=averaged kappa_over_g=1");
    let mut crit = ctx.table(&["delta_over_g", "n_crit", col], "markers=n_crit");
    for &(d, top) in n_max {
        let p = ctx.params(d, 1.0);
        let (gp, nc) = (gamma_p(&p)?, n_crit(&p)?);
        let value = |n: f64| -> Result<f64> {
            let r = averaged_rates(n, &p)?;
            Ok(if excite { r.gamma_e } else { r.gamma_r } / gp)
        };
        for n in steps(0, (top * 4.0) as u32, 4.0) {
            avg.push(vec![num(d), num(n), num(n / nc), num(value(n)?)]);
        }
        crit.push(vec![num(d), num(nc), num(value(nc)?)]);
    }
    Ok(vec![(format!("{fig}_analytic.csv"), avg), (format!("{fig}_ncrit.csv"), crit)])
}

fn nbar_points(kappa: f64, sets: &[(f64, &[f64])]) -> Vec<Point> {
    sets.iter()
        .flat_map(|&(d, ns)| {
            ns.iter().map(move |&n| Point { delta_over_g: d, kappa_over_g: kappa, drive: Drive::PhotonNumber(n) })
        })
        .collect()
}

fn run_batch(ctx: &Ctx, points: &[Point], settings: &Settings) -> Result<Vec<Outcome>> {
    let cfgs = points.iter().map(|p| sim::config(p, settings)).collect::<Result<Vec<_>>>()?;
    sim::check_budget(&cfgs, &ctx.args.run)?;
    sim::run_all(&cfgs, ctx.args.run.jobs)
}

fn simulated(ctx: &Ctx, points: &[Point], settings: &Settings, outcomes: &[Outcome]) -> Table {
    let mut pre = vec![format!("purcell reproduce figure={} curve=simulated", ctx.args.figure.name())];
    pre.push(format!("g_over_2pi_hz={} fast={}", num(ctx.g_hz), ctx.args.fast));
    sim::table(points, settings, outcomes, pre)
}

fn fig5(ctx: &Ctx) -> Result<Vec<(String, Table)>> {
    let points = if ctx.args.fast {
        nbar_points(1.0, &[(5.0, &[2.0, 6.0, 12.5]), (10.0, &[5.0, 25.0, 50.0]), (15.0, &[10.0, 40.0]), (20.0, &[10.0, 40.0])])
    } else {
        nbar_points(
            1.0,
            &[
                (5.0, &[1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.5]),
                (10.0, &[5.0, 10.0, 20.0, 30.0, 40.0, 50.0]),
                (15.0, &[5.0, 10.0, 20.0, 30.0, 40.0]),
                (20.0, &[5.0, 10.0, 20.0, 30.0, 40.0]),
            ],
        )
    };
    let mut out = analytic_vs_n(ctx, false, &[(5.0, 15.0), (10.0, 60.0), (15.0, 60.0), (20.0, 60.0)])?;
    let settings = ctx.settings(RateMode::Relaxation);
    let outcomes = run_batch(ctx, &points, &settings)?;
    out.push(("fig5_simulated.csv".into(), simulated(ctx, &points, &settings, &outcomes)));
    Ok(out)
}

/// Small-κ runs first; each κ = g partner is driven to the photon number
/// the small-κ run actually measured, so the pair compares like with like.
fn fig6(ctx: &Ctx) -> Result<Vec<(String, Table)>> {
    let slow_points = if ctx.args.fast {
        nbar_points(0.1, &[(5.0, &[2.0, 8.0]), (10.0, &[10.0, 35.0])])
    } else {
        nbar_points(
            0.1,
            &[
                (5.0, &[2.0, 5.0, 8.0, 12.0]),
                (10.0, &[10.0, 20.0, 35.0, 50.0]),
                (15.0, &[10.0, 20.0, 30.0, 40.0]),
                (20.0, &[10.0, 20.0, 30.0, 40.0]),
            ],
        )
    };
    let settings = ctx.settings(RateMode::Relaxation);
    let fast_guess: Vec<Point> = slow_points.iter().map(|p| Point { kappa_over_g: 1.0, ..*p }).collect();
    let all = slow_points.iter().chain(&fast_guess).map(|p| sim::config(p, &settings)).collect::<Result<Vec<_>>>()?;
    sim::check_budget(&all, &ctx.args.run)?;
    let slow = sim::run_all(&all[..slow_points.len()], ctx.args.run.jobs)?;
    let fast_points: Vec<Point> = slow_points
        .iter()
        .zip(&slow)
        .map(|(p, o)| {
            let n = o.result.as_ref().map_or(match p.drive {
                Drive::PhotonNumber(n) => n,
                Drive::EpsilonHz(_) => 0.0,
            }, |r| r.measured_n_bar);
            Point { kappa_over_g: 1.0, drive: Drive::PhotonNumber(n), ..*p }
        })
        .collect();
    let cfgs = fast_points.iter().map(|p| sim::config(p, &settings)).collect::<Result<Vec<_>>>()?;
    let fast = sim::run_all(&cfgs, ctx.args.run.jobs)?;
    let points: Vec<Point> = slow_points.into_iter().chain(fast_points).collect();
    let outcomes: Vec<Outcome> = slow.into_iter().chain(fast).collect();
    let mut t = simulated(ctx, &points, &settings, &outcomes);
    t.comment("kappa_over_g=1 rows are driven to the photon number measured in the matching kappa_over_g=0.1 row");
    Ok(vec![("fig6_simulated.csv".into(), t)])
}

fn fig7(ctx: &Ctx) -> Result<Vec<(String, Table)>> {
    let mut out = normalized_curves(ctx, true, 6)?;
    let nc5 = n_crit(&ctx.params(5.0, 1.0))?;
    let xs: &[f64] = if ctx.args.fast { &[0.5, 1.0, 2.0, 3.0, 4.0] } else { &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] };
    let five: Vec<f64> = xs.iter().map(|x| x * nc5).collect();
    let points = if ctx.args.fast {
        nbar_points(1.0, &[(5.0, &five)])
    } else {
        nbar_points(1.0, &[(5.0, &five), (10.0, &[10.0, 20.0, 40.0]), (15.0, &[10.0, 20.0, 40.0]), (20.0, &[10.0, 20.0, 40.0])])
    };
    let settings = ctx.settings(RateMode::Excitation);
    let outcomes = run_batch(ctx, &points, &settings)?;
    out.push(("fig7_simulated.csv".into(), simulated(ctx, &points, &settings, &outcomes)));
    Ok(out)
}

fn gnuplot(figure: Figure) -> String {
    let head = "set datafile separator ','\nset key autotitle columnhead\nset grid\n";
    let body = match figure {
        Figure::Fig3 => {
            "set xlabel 'n_bar'\nset ylabel 'Gamma_R / Gamma_P'\nset yrange [0:1.05]\n\
             plot 'fig3_averaged.csv' using 2:4 with lines title 'averaged', \\\n  \
             'fig3_real_n.csv' using 2:4 with lines dt 2 title 'real n', \\\n  \
             'fig3_series.csv' using 2:(strcol(5) eq \"true\" ? $4 : 1/0) with lines dt 4 title 'series', \\\n  \
             'fig3_ncrit.csv' using 2:3 with points pt 7 title 'n_crit'\n"
        }
        Figure::Fig4 => {
            "set xlabel 'n_bar / n_crit'\nset ylabel 'Gamma_R / Gamma_P'\nset yrange [0:1.05]\n\
             plot 'fig4_averaged.csv' using 2:4 with lines title 'averaged', \\\n  \
             for [c=2:4] 'fig4_approximations.csv' using 1:c with lines dt 2\n"
        }
        Figure::Fig5 => {
            "set xlabel 'n_bar'\nset ylabel 'Gamma_R / Gamma_P'\nset yrange [0:1.05]\n\
             plot 'fig5_analytic.csv' using 2:4 with lines title 'averaged', \\\n  \
             'fig5_ncrit.csv' using 2:3 with points pt 7 ps 1.5 title 'n_crit', \\\n  \
             'fig5_simulated.csv' using 6:9 with points pt 7 title 'simulated'\n"
        }
        Figure::Fig6 => {
            "set xlabel 'n_bar'\nset ylabel 'Gamma_R / Gamma_P'\nset yrange [0:1.05]\n\
             plot 'fig6_simulated.csv' using ($2 < 0.5 ? $6 : 1/0):9 with points pt 13 title 'kappa/g = 0.1', \\\n  \
             'fig6_simulated.csv' using ($2 > 0.5 ? $6 : 1/0):9 with points pt 7 title 'kappa/g = 1'\n"
        }
        Figure::Fig7 => {
            "set xlabel 'n_bar / n_crit'\nset ylabel 'gamma_E / Gamma_P'\n\
             plot 'fig7_averaged.csv' using 2:4 with lines title 'averaged', \\\n  \
             for [c=2:4] 'fig7_approximations.csv' using 1:c with lines dt 2, \\\n  \
             'fig7_simulated.csv' using 7:9 with points pt 7 title 'simulated'\n"
        }
        Figure::Fig8 => {
            "set xlabel 'n_bar'\nset ylabel '(omega - omega_r) / g'\n\
             plot for [c=3:6] 'fig8_lines.csv' using 1:c with lines\n"
        }
    };
    format!("{head}{body}")
}

pub fn reproduce(args: &ReproduceArgs) -> Result<Vec<PathBuf>> {
    if !(args.g_over_2pi_hz > 0.0) || !args.g_over_2pi_hz.is_finite() {
        anyhow::bail!("--g-over-2pi-hz must be positive");
    }
    let ctx = Ctx { args, g_hz: args.g_over_2pi_hz };
    let start = Instant::now();
    let tables = match args.figure {
        Figure::Fig3 => fig3(&ctx)?,
        Figure::Fig4 => normalized_curves(&ctx, false, 10)?,
        Figure::Fig5 => fig5(&ctx)?,
        Figure::Fig6 => fig6(&ctx)?,
        Figure::Fig7 => fig7(&ctx)?,
        Figure::Fig8 => fig8(&ctx)?,
    };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let elapsed = start.elapsed().as_secs_f64();
    let mut written = Vec::new();
    for (name, mut table) in tables {
        table.trailer.push(format!("figure_wall_time_s={elapsed:.3}"));
        let path = args.out.join(name);
        table.write(Some(&path))?;
        written.push(path);
    }
    if args.gnuplot {
        let path = args.out.join(format!("{}.gp", args.figure.name()));
        write_script(&path, args.figure)?;
        written.push(path);
    }
    Ok(written)
}

fn write_script(path: &Path, figure: Figure) -> Result<()> {
    fs::write(path, gnuplot(figure)).with_context(|| format!("writing {}", path.display()))
}
