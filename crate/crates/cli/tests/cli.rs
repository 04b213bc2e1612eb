use std::path::Path;
use std::process::{Command, Output};

use yawstab::derivatives::{DerivativeReport, MotionSeries};
use yawstab::harness::verify::synthetic_series;
use yawstab::motion::{CombinedPhaseMode, MotionSpec};

fn yawstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yawstab")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "output_dir = \"out\"\n\
[resolution]\nchord = 8\nspan = 4\nupstream = 2\ndownstream = 2\ntip = 2\nnormal = 2\nfarfield = 2\n\
[solver]\nmax_steady_iterations = 20\n";

#[test]
fn verify_tables_passes() {
    let o = yawstab(&["verify", "tables"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("tables.subtraction=pass"), "{out}");
    assert!(out.ends_with("result=pass\n"), "{out}");
}

#[test]
fn flux_fault_fails_the_shock_tube() {
    let o = yawstab(&["verify", "shocktube", "--inject-flux-fault"]);
    assert!(!o.status.success());
    assert!(stdout(&o).ends_with("result=fail\n"));
}

#[test]
fn unknown_suite_is_an_error() {
    let o = yawstab(&["verify", "sod"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_an_error() {
    let o = yawstab(&["run", "/nonexistent/run.toml"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("/nonexistent/run.toml"));
}

fn write_series(dir: &Path, name: &str, motion: MotionSpec, derivs: (f64, f64, f64)) -> String {
    let series = MotionSeries { motion, samples: synthetic_series(&motion, derivs, 64) };
    let path = dir.join(name);
    series.to_series().write(&path).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn derive_recovers_synthetic_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    let derivs = (0.05, 0.2, -0.15);
    let psi = 1f64.to_radians();
    let files = [
        write_series(dir.path(), "yaw.txt", MotionSpec::yaw(0.05, psi), derivs),
        write_series(dir.path(), "lat.txt", MotionSpec::lateral(0.05, 0.25), derivs),
        write_series(dir.path(), "comb.txt", MotionSpec::combined(0.05, 0.25, CombinedPhaseMode::ZeroSideslip, None), derivs),
    ];
    let out = dir.path().join("report");
    let mut args = vec!["derive"];
    args.extend(files.iter().map(String::as_str));
    args.extend(["--output", out.to_str().unwrap()]);
    let o = yawstab(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = DerivativeReport::read(&out.join("report.kv")).unwrap();
    assert!((r.cn_beta - derivs.0).abs() < 1e-10);
    assert!((r.cn_beta_dot - derivs.1).abs() < 1e-10);
    assert!((r.combination - derivs.1 - derivs.2).abs() < 1e-10);
    assert!((r.cn_r_combined.unwrap() - derivs.2).abs() < 1e-10);
    assert!(out.join("report.txt").is_file());
}

#[test]
fn genmesh_smooth_and_steady_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = yawstab(&["genmesh", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mesh = dir.path().join("out/mesh.dat");
    assert!(mesh.is_file() && dir.path().join("out/mesh.conn").is_file());

    let smoothed = dir.path().join("smoothed.dat");
    let o = yawstab(&["smooth", mesh.to_str().unwrap(), "--output", smoothed.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sweeps"));
    assert!(smoothed.is_file() && dir.path().join("smoothed.conn").is_file());

    let o = yawstab(&["steady", cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let kv = std::fs::read_to_string(dir.path().join("out/steady.kv")).unwrap();
    assert!(kv.contains("iterations=20\n"), "{kv}");
    assert!(dir.path().join("out/pipeline.log").is_file());
}
