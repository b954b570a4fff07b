use std::path::Path;
use std::process::{Command, Output};

fn varmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varmech")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
    trailer: Vec<String>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut header = Vec::new();
        let mut rows = Vec::new();
        let mut trailer = Vec::new();
        for line in text.lines() {
            if let Some(c) = line.strip_prefix("# ") {
                if !header.is_empty() {
                    trailer.push(c.to_string());
                }
            } else if header.is_empty() {
                header = line.split(',').map(str::to_string).collect();
            } else {
                rows.push(line.split(',').skip(1).map(|c| (!c.is_empty()).then(|| c.parse().unwrap())).collect());
            }
        }
        Self { header, rows, trailer }
    }

    fn column(&self, name: &str) -> Vec<Option<f64>> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}")) - 1;
        self.rows.iter().map(|r| r[i]).collect()
    }

    fn range(&self, name: &str) -> f64 {
        let xs: Vec<f64> = self.column(name).into_iter().flatten().collect();
        xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) - xs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn midpoint_disk_advances_theta_uniformly() {
    let o = varmech(&["simulate", "--system", "rolling-disk", "--rule", "midpoint", "--steps", "10000"]);
    assert_eq!(code(&o), 0);
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 10002);
    let th: Vec<f64> = csv.column("theta").into_iter().map(Option::unwrap).collect();
    let d = th[1] - th[0];
    let dev = th.iter().enumerate().map(|(k, t)| (t - th[0] - k as f64 * d).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-8, "{dev}");
    for k in ["K1d", "K2d", "K3d"] {
        assert!(csv.range(k) < 1e-8, "{k} {}", csv.range(k));
    }
    assert!(csv.header.contains(&"lambda2".to_string()));
}

#[test]
fn zero_steps_writes_the_initial_pair() {
    let o = varmech(&["simulate", "--system", "harmonic-exact", "--steps", "0"]);
    assert_eq!(code(&o), 0);
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 2);
    assert!(csv.rows[0][1].is_some() && csv.rows[1][1].is_none());
}

#[test]
fn euler_rules_do_not_conserve_the_kinetic_energies() {
    for rule in ["euler-a", "euler-b"] {
        let o = varmech(&["simulate", "--system", "rolling-disk", "--rule", rule]);
        assert_eq!(code(&o), 0);
        let csv = Csv::parse(&stdout(&o));
        assert!(csv.range("K1d") > 1e-4, "{rule} K1d {}", csv.range("K1d"));
        assert!(csv.range("K3d") > 1e-4, "{rule} K3d {}", csv.range("K3d"));
        // K2d only depends on the phi increment, which every rule keeps
        // uniform, so its variation stays small.
        assert!(csv.range("K2d") < 1e-4, "{rule} K2d {}", csv.range("K2d"));
    }
}

#[test]
fn isotropy_separates_the_disk_fiber_maps() {
    for (f, want) in [("Fd1", 0), ("Fd1bar", 0), ("Fd2", 3)] {
        let o = varmech(&["check", "isotropy", "--system", "rolling-disk", "--F", f, "--samples", "16"]);
        assert_eq!(code(&o), want, "{f}");
        let r = json(&o);
        assert_eq!(r["verdict"], if want == 0 { "pass" } else { "fail" });
        assert_eq!(r["params"]["fiber"], f);
    }
}

#[test]
fn implicit_exp_fails_the_third_condition() {
    let o = varmech(&["check", "chc", "--system", "implicit-exp"]);
    assert_eq!(code(&o), 3);
    let r = json(&o);
    let c3 = r["conditions"].as_array().unwrap().iter().find(|c| c["name"] == "cHC3").unwrap();
    assert!((c3["max_residual"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert_eq!(c3["pass"], false);
    let ihc = varmech(&["check", "ihc", "--system", "implicit-exp"]);
    assert_eq!(code(&ihc), 0);
}

#[test]
fn variational_checks_pass_on_the_smooth_systems() {
    for sys in ["toy-free-particle", "harmonic-exact", "backward-error"] {
        for check in ["dhc-explicit", "dhc-implicit", "isotropy", "two-form", "chc"] {
            let o = varmech(&["check", check, "--system", sys, "--samples", "8"]);
            assert_eq!(code(&o), 0, "{sys} {check}: {}", stdout(&o));
        }
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# disk run\nsystem = rolling-disk\nrule = euler-a\nsteps = 5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = varmech(&["simulate", "--config", cfg]);
    assert_eq!(code(&from_file), 0);
    assert!(stdout(&from_file).lines().next().unwrap().contains("rule=euler-a"));
    assert_eq!(Csv::parse(&stdout(&from_file)).rows.len(), 7);
    let flagged = varmech(&["simulate", "--config", cfg, "--rule", "midpoint", "--steps", "2"]);
    assert!(stdout(&flagged).lines().next().unwrap().contains("rule=midpoint"));
    assert_eq!(Csv::parse(&stdout(&flagged)).rows.len(), 4);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "system = harmonic-exact\nstpes = 4\n").unwrap();
    let o = varmech(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stpes"));
    assert_eq!(code(&varmech(&["simulate", "--system", "pendulum"])), 1);
    assert_eq!(code(&varmech(&["simulate", "--system", "harmonic-exact", "--h", "-0.1"])), 1);
    assert_eq!(code(&varmech(&["simulate", "--system", "implicit-exp"])), 1);
    assert_eq!(code(&varmech(&["simulate", "--wat"])), 1);
    assert_eq!(code(&varmech(&["--help"])), 0);
}

#[test]
fn csv_values_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = varmech(&["simulate", "--system", "toy-free-particle", "--steps", "50", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        for cell in line.split(',').skip(1).filter(|c| !c.is_empty()) {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), cell);
        }
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1, "no temporary files left behind");
}

#[test]
fn runs_are_deterministic() {
    let args = ["simulate", "--system", "rolling-disk", "--steps", "500"];
    assert_eq!(varmech(&args).stdout, varmech(&args).stdout);
    let args = ["check", "isotropy", "--system", "harmonic-exact", "--seed", "7"];
    assert_eq!(varmech(&args).stdout, varmech(&args).stdout);
    let other = varmech(&["check", "isotropy", "--system", "harmonic-exact", "--seed", "8"]);
    assert_ne!(varmech(&args).stdout, other.stdout);
}

#[test]
fn solver_failure_keeps_the_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.csv");
    let o = varmech(&[
        "simulate",
        "--system",
        "harmonic-exact",
        "--q0",
        "1e308",
        "--q1",
        "-1.7e308",
        "--steps",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let csv = Csv::parse(&std::fs::read_to_string(Path::new(&out)).unwrap());
    assert_eq!(csv.rows.len(), 2);
    assert!(csv.trailer.iter().any(|t| t.starts_with("failed at step")));
}

#[test]
fn order_study_writes_a_table_and_a_slope_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("order.csv");
    let o = varmech(&["order-study", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let table = Csv::parse(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(table.header, ["h", "difference"]);
    assert_eq!(table.rows.len(), 7);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("order.csv.json")).unwrap()).unwrap();
    assert!((side["slope"].as_f64().unwrap() - 3.0).abs() < 0.1);
    let o = varmech(&["order-study", "--sampling", "fixed", "--q0", "1", "--q1", "2"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let slope: f64 = first.strip_prefix("# slope=").unwrap().parse().unwrap();
    assert!((slope - 1.0).abs() < 0.1, "{slope}");
}

#[test]
fn invariant_columns_are_constant_on_the_harmonic_oscillator() {
    let o = varmech(&["invariants", "--system", "harmonic-exact", "--steps", "300", "--kmax", "3"]);
    assert_eq!(code(&o), 0);
    let csv = Csv::parse(&stdout(&o));
    assert_eq!(csv.rows.len(), 302);
    for name in ["Q", "trA1", "trA2", "trA3"] {
        let scale = csv.column(name)[0].unwrap().abs();
        assert!(csv.range(name) < 1e-10 * scale, "{name} {}", csv.range(name));
    }
    let o = varmech(&["invariants", "--system", "rolling-disk", "--steps", "400"]);
    let csv = Csv::parse(&stdout(&o));
    assert!(!csv.header.iter().any(|h| h.starts_with("trA")));
    assert!(csv.range("K1d") < 1e-8);
}
