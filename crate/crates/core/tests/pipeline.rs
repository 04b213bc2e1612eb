use std::path::Path;

use yawstab::derivatives::{reduce_series, DerivativeReport, MotionSeries};
use yawstab::harness::config::RunConfig;
use yawstab::harness::pipeline::{run_pipeline, series_path, LOG_FILE, REPORT_KV, REPORT_TEXT};
use yawstab::harness::wing::WingResolution;
use yawstab::loads::CoefficientSeries;
use yawstab::mesh::io::write_mesh;

fn small(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig { output_dir: dir.to_path_buf(), ..Default::default() };
    cfg.resolution = WingResolution { chord: 8, span: 4, upstream: 2, downstream: 2, tip: 2, normal: 2, farfield: 2 };
    cfg.solver.steps_per_cycle = 16;
    cfg.solver.cycles = 1;
    cfg.solver.max_pseudo_iterations = 30;
    cfg.solver.max_steady_iterations = 200;
    cfg.protocol.lateral_amplitudes = vec![0.35, 0.7];
    cfg
}

#[test]
fn stationary_protocol_reports_zero_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.protocol.yaw_amplitude_deg = 0.0;
    cfg.protocol.lateral_amplitudes = vec![0.0];
    let out = run_pipeline(&cfg).unwrap();
    let r = &out.report;
    assert_eq!(r.cn_static, out.steady.cn);
    assert_eq!((r.cn_beta, r.cn_beta_dot, r.combination, r.cy_beta), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(r.cn_r_interpolated(), Some(0.0));
    assert_eq!(r.cn_r_combined, Some(0.0));
    assert_eq!(&DerivativeReport::read(&dir.path().join(REPORT_KV)).unwrap(), r);
}

#[test]
fn pipeline_is_deterministic_and_rereadable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = small(a.path());
    let first = run_pipeline(&cfg).unwrap();
    let second = run_pipeline(&small(b.path())).unwrap();
    let kv = |d: &Path| std::fs::read_to_string(d.join(REPORT_KV)).unwrap();
    assert_eq!(kv(a.path()), kv(b.path()));
    assert_eq!(first.report, second.report);
    assert!(a.path().join(REPORT_TEXT).is_file());
    assert!(first.report.cn_r_interpolated().is_some() && first.report.cn_r_combined.is_some());

    let cg = cfg.reference_quantities().unwrap().cg;
    let p = &cfg.protocol;
    let motions: Vec<_> = p.lateral(cg).into_iter().chain([p.yaw(cg)]).chain(p.combined(cg)).collect();
    let series: Vec<MotionSeries> = motions
        .iter()
        .map(|m| MotionSeries::from_series(&CoefficientSeries::read(&series_path(a.path(), m)).unwrap()).unwrap())
        .collect();
    assert_eq!(series.len(), 5);
    assert!(series.iter().all(|s| s.samples.len() == cfg.solver.steps_per_cycle));
    let again = reduce_series(&series).unwrap();
    let rel = (again.combination - first.report.combination).abs() / first.report.combination.abs();
    assert!(rel < 1e-9, "re-read combination differs by {rel:e}");

    let log = std::fs::read_to_string(a.path().join(LOG_FILE)).unwrap();
    for stage in ["genmesh", "smooth", "steady", "lateral_0.350", "yaw_1.000", "combined_0.700", "reduce"] {
        assert!(log.contains(&format!("stage {stage}")), "log lacks stage {stage}");
    }
}

#[test]
fn failing_stage_is_named_and_keeps_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (mesh, _) = yawstab::harness::pipeline::build_mesh(&cfg).unwrap();
    let (m, c) = (dir.path().join("in.dat"), dir.path().join("in.conn"));
    write_mesh(&mesh, &m, &c).unwrap();
    let text = format!(
        "output_dir = {:?}\n[mesh]\nmesh = {:?}\nconnectivity = {:?}\nnear_field = [9999]\n[reference]\narea = 0.2\nspan = 1.5\nchord = 0.15\n",
        dir.path().join("out"),
        m,
        c
    );
    let bad = RunConfig::parse(&text).unwrap();
    let err = run_pipeline(&bad).unwrap_err().to_string();
    assert!(err.starts_with("genmesh:"), "{err}");
    assert!(dir.path().join("out/config.toml").is_file());
    assert!(dir.path().join("out").join(LOG_FILE).is_file());
}

#[test]
fn unbracketed_side_force_fails_in_reduce_after_the_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.protocol.lateral_amplitudes = vec![0.25, 0.45];
    cfg.protocol.combined = false;
    let err = run_pipeline(&cfg).unwrap_err().to_string();
    assert!(err.starts_with("reduce:") && err.contains("bracket"), "{err}");
    let cg = cfg.reference_quantities().unwrap().cg;
    for m in cfg.protocol.lateral(cg).into_iter().chain([cfg.protocol.yaw(cg)]) {
        assert!(series_path(dir.path(), &m).is_file());
    }
    assert!(!dir.path().join(REPORT_KV).exists());
}

#[test]
fn invalid_configuration_fails_before_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(&dir.path().join("out"));
    cfg.protocol.reduced_frequency = -1.0;
    let err = run_pipeline(&cfg).unwrap_err().to_string();
    assert!(err.starts_with("config:"), "{err}");
    assert!(!dir.path().join("out").exists());
}
