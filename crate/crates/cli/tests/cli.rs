use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn purcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purcell")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header plus data rows, keyed by column name.
fn records(csv_text: &str) -> Vec<Vec<(String, String)>> {
    let mut lines = csv_text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().expect("header").split(',').map(String::from).collect();
    lines
        .map(|l| {
            let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(l.as_bytes());
            let rec = r.records().next().unwrap().unwrap();
            header.iter().cloned().zip(rec.iter().map(String::from)).collect()
        })
        .collect()
}

fn field(row: &[(String, String)], key: &str) -> f64 {
    row.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no column {key}")).1.parse().unwrap()
}

fn text_field<'a>(row: &'a [(String, String)], key: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == key).unwrap().1
}

fn data_only(s: &str) -> String {
    s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn rates_at_critical_photon_number() {
    let out = stdout(&purcell(&["rates", "--delta-over-g", "20", "--nbar", "0,100"]));
    assert!(out.starts_with("# purcell rates"));
    let rows = records(&out);
    assert_eq!(field(&rows[0], "gamma_R_over_gamma_P"), 1.0);
    assert_eq!(field(&rows[0], "gamma_E_over_gamma_P"), 0.0);
    let r = field(&rows[1], "gamma_R_over_gamma_P");
    assert!((r - 0.36).abs() < 0.01, "{r}");
    assert!((field(&rows[1], "n_bar_over_ncrit") - 1.0).abs() < 1e-12);
}

#[test]
fn rates_grid_and_methods() {
    let out = stdout(&purcell(&[
        "rates",
        "--delta-over-g",
        "10,20",
        "--kappa-over-g",
        "0.1,1",
        "--nbar",
        "0:20:3",
        "--method",
        "approximation:large_nbar",
    ]));
    let rows = records(&out);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| text_field(r, "method") == "approximation:large_nbar"));

    let out = stdout(&purcell(&["rates", "--delta-over-g", "10", "--epsilon", "0,25e6", "--method", "series", "--order", "4"]));
    let rows = records(&out);
    assert_eq!(text_field(&rows[0], "method"), "series(4,10)");
    assert_eq!(field(&rows[0], "n_bar"), 0.0);
    assert!(field(&rows[1], "n_bar") > 0.5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["rates", "--delta-over-g", "10", "--nbar", "1", "--method", "exact"],
        vec!["rates", "--delta-over-g", "10"],
        vec!["rates", "--delta-over-g", "10", "--nbar", "1", "--epsilon", "1e6"],
        vec!["rates", "--delta-over-g", "10", "--nbar", "1", "--method", "simulate"],
        vec!["reproduce", "--figure", "fig9"],
        vec!["rates", "--delta-over-g", "10", "--nbar", "1", "--config", "/nonexistent/run.cfg"],
    ] {
        let out = purcell(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = purcell(&["rates", "--delta-over-g", "10", "--nbar", "1", "--method", "exact"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("approximation:large_nbar"));
}

#[test]
fn runtime_errors_exit_1() {
    let out = purcell(&["rates", "--delta-over-g", "10", "--nbar", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = records(&stdout(&purcell(&["rates", "--delta-over-g", "-10", "--nbar", "5"])));
    assert_eq!(field(&rows[0], "delta_over_g"), -10.0);
    let out = purcell(&["rates", "--delta-over-g", "10", "--nbar", "1", "--g-over-2pi-hz", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn undriven_simulation_gives_purcell_rate() {
    let out = stdout(&purcell(&["simulate", "--delta-over-g", "10", "--epsilon", "0"]));
    let row = &records(&out)[0];
    assert_eq!(text_field(row, "status"), "ok");
    let r = field(row, "rate_over_gamma_p");
    assert!((r - 1.0).abs() < 0.02, "{r}");
}

#[test]
fn driven_simulation_matches_analytic() {
    let out = stdout(&purcell(&["simulate", "--delta-over-g", "10", "--nbar", "10"]));
    let row = &records(&out)[0];
    let (sim, ana) = (field(row, "rate_over_gamma_p"), field(row, "analytic_over_gamma_p"));
    assert!((sim / ana - 1.0).abs() < 0.1, "{sim} vs {ana}");
    assert!((field(row, "measured_n_bar") - 10.0).abs() < 0.5);
    assert!(out.lines().any(|l| l.starts_with("# total_wall_time_s=")));
}

#[test]
fn simulation_is_deterministic() {
    let args = ["sweep", "--method", "simulate", "--delta-over-g", "5", "--nbar", "2", "--jobs", "2"];
    let a = stdout(&purcell(&args));
    let b = stdout(&purcell(&args));
    assert_eq!(data_only(&a), data_only(&b));
    let strip = |s: &str| s.lines().filter(|l| !l.contains("wall_time")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn failed_rows_report_status() {
    let out = purcell(&["simulate", "--delta-over-g", "10", "--nbar", "10", "--cutoff", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text_field(&records(&text)[0], "status"), "truncation");
    assert!(text.contains("# row 1: truncation risk"));

    let out = purcell(&["simulate", "--delta-over-g", "10", "--nbar", "0.01,10", "--mode", "excitation"]);
    assert!(out.status.success(), "one good row keeps exit 0");
    let rows = records(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(text_field(&rows[0], "status"), "fit_rejected");
    assert_eq!(text_field(&rows[1], "status"), "ok");
}

#[test]
fn budget_guard_refuses_with_hint() {
    let out = purcell(&["simulate", "--delta-over-g", "10", "--nbar", "40", "--budget-seconds", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exceeds the budget") && err.contains("--budget-seconds"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\ndelta_over_g = 20\nnbar = 0\nmethod = real_n\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let rows = records(&stdout(&purcell(&["rates", "--config", cfg])));
    assert_eq!(rows.len(), 1);
    assert_eq!(text_field(&rows[0], "method"), "real_n");
    assert_eq!(field(&rows[0], "n_bar"), 0.0);
    let rows = records(&stdout(&purcell(&["rates", "--config", cfg, "--nbar", "100"])));
    assert_eq!(field(&rows[0], "n_bar"), 100.0);
    assert_eq!(field(&rows[0], "delta_over_g"), 20.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = purcell(&["rates", "--delta-over-g", "5", "--nbar", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(records(&fs::read_to_string(path).unwrap()).len(), 1);
}

#[test]
fn fig4_large_nbar_at_critical_photon_number() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let listed = stdout(&purcell(&["reproduce", "--figure", "fig4", "--out", d, "--gnuplot"]));
    assert_eq!(listed.lines().count(), 3);
    let approx = records(&read(dir.path(), "fig4_approximations.csv"));
    let at_one = approx.iter().find(|r| field(r, "n_bar_over_ncrit") == 1.0).unwrap();
    assert!((field(at_one, "large_nbar") - 0.364).abs() < 1e-3);
    let avg = records(&read(dir.path(), "fig4_averaged.csv"));
    let at_one = avg.iter().find(|r| field(r, "delta_over_g") == 20.0 && field(r, "n_bar_over_ncrit") == 1.0).unwrap();
    assert!((field(at_one, "gamma_R_over_gamma_P") - 0.364).abs() < 0.005);
    assert!(read(dir.path(), "fig4.gp").contains("fig4_averaged.csv"));
}

#[test]
fn fig7_analytic_maximum_near_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = purcell(&["reproduce", "--figure", "fig7", "--out", d, "--budget-seconds", "0.001"]);
    assert_eq!(out.status.code(), Some(1), "simulated points exceed a tiny budget");
    let _ = stdout(&purcell(&[
        "reproduce", "--figure", "fig7", "--fast", "--out", d, "--budget-seconds", "120",
    ]));
    let rows = records(&read(dir.path(), "fig7_averaged.csv"));
    let five: Vec<_> = rows.iter().filter(|r| field(r, "delta_over_g") == 5.0).collect();
    let peak = five.iter().max_by(|a, b| field(a, "gamma_E_over_gamma_P").total_cmp(&field(b, "gamma_E_over_gamma_P"))).unwrap();
    assert!((field(peak, "n_bar_over_ncrit") - 3.0).abs() < 0.5);
    assert!(rows.iter().all(|r| field(r, "gamma_E_over_gamma_P") < 0.02));
    let sim = records(&read(dir.path(), "fig7_simulated.csv"));
    assert_eq!(sim.len(), 5);
    for r in &sim {
        let (s, a) = (field(r, "rate_over_gamma_p"), field(r, "analytic_over_gamma_p"));
        assert!((s / a - 1.0).abs() < 0.15, "{s} vs {a}");
    }
}

#[test]
fn fig8_lines_without_drive() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&purcell(&["reproduce", "--figure", "fig8", "--out", d]));
    let rows = records(&read(dir.path(), "fig8_lines.csv"));
    let r = &rows[0];
    assert_eq!(field(r, "n_bar"), 0.0);
    assert!((field(r, "dispersive_plus_over_g") - 0.1).abs() < 1e-12);
    assert!((field(r, "dispersive_minus_over_g") + 0.1).abs() < 1e-12);
    assert!((field(r, "sideband_plus_over_g") - 10.0).abs() < 1e-12);
    assert!((field(r, "sideband_minus_over_g") + 10.0).abs() < 1e-12);
    assert!((field(r, "dispersive_plus_hz") - 5e6).abs() < 1e-3);
}

#[test]
fn fig3_families_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        stdout(&purcell(&["reproduce", "--figure", "fig3", "--out", dir.path().to_str().unwrap()]));
    }
    for name in ["fig3_averaged.csv", "fig3_real_n.csv", "fig3_series.csv", "fig3_ncrit.csv"] {
        assert_eq!(data_only(&read(a.path(), name)), data_only(&read(b.path(), name)), "{name}");
    }
    let crit = records(&read(a.path(), "fig3_ncrit.csv"));
    let ncrits: Vec<f64> = crit.iter().map(|r| field(r, "n_crit")).collect();
    for (got, want) in ncrits.iter().zip([56.25, 25.0, 6.25]) {
        assert!((got - want).abs() < 1e-12 * want);
    }
}
