use yawstab::harness::config::{RunConfig, WingConfig};
use yawstab::harness::pipeline::{prepare, run_steady, RunLog};
use yawstab::harness::verify::{verify, Suite};
use yawstab::harness::wing::WingResolution;
use yawstab::solver::{steady_solve, FaultInjection};

fn small(wing: WingConfig, alpha_deg: f64) -> RunConfig {
    let mut cfg = RunConfig { wing: Some(wing), ..Default::default() };
    cfg.resolution = WingResolution { chord: 8, span: 8, upstream: 2, downstream: 2, tip: 2, normal: 2, farfield: 2 };
    cfg.freestream.alpha_deg = alpha_deg;
    cfg.solver.max_steady_iterations = 150;
    cfg
}

#[test]
fn mirror_symmetric_grid_has_no_lateral_loads() {
    let planar = WingConfig { sweep_deg: 0.0, dihedral_deg: 0.0, ..Default::default() };
    for (wing, alpha) in [(planar, 0.0), (WingConfig::default(), 3.0)] {
        let mut cfg = small(wing, alpha);
        cfg.smoothing.elliptic = false;
        let mut log = RunLog::sink();
        let setup = prepare(&cfg, &mut log).unwrap();
        let c = run_steady(&setup, &cfg, &mut log).unwrap().coefficients;
        assert!(c.cy.abs() < 1e-10 && c.cn.abs() < 1e-10 && c.croll.abs() < 1e-10, "{c:?}");
        assert!(c.cl.is_finite());
    }
}

#[test]
fn lift_grows_with_incidence() {
    let lift = |alpha| {
        let cfg = small(WingConfig::default(), alpha);
        let mut log = RunLog::sink();
        let setup = prepare(&cfg, &mut log).unwrap();
        run_steady(&setup, &cfg, &mut log).unwrap().coefficients.cl
    };
    let (a, b) = (lift(0.0), lift(4.0));
    assert!(b > a + 0.05, "C_L {a} at 0 deg, {b} at 4 deg");
}

#[test]
fn multigrid_outpaces_single_grid() {
    let mut cfg = small(WingConfig::default(), 2.0);
    cfg.solver.max_steady_iterations = 60;
    cfg.solver.steady_tolerance = 1e-12;
    let setup = prepare(&cfg, &mut RunLog::sink()).unwrap();
    let drop = |levels| {
        let mut s = cfg.solver.clone();
        s.multigrid_levels = levels;
        let h = steady_solve(&setup, &s, None).unwrap().report.history;
        h.last().unwrap() / h[0]
    };
    let (single, multi) = (drop(1), drop(2));
    assert!(multi < 0.25 * single, "residual drop {single:e} single grid, {multi:e} multigrid");
}

#[test]
fn reversed_flux_dissipation_is_caught() {
    assert!(verify(&[Suite::ShockTube], FaultInjection::None).passed());
    let r = verify(&[Suite::ShockTube], FaultInjection::FluxSign);
    assert!(!r.passed(), "{}", r.to_text());
    assert!(r.to_key_value().ends_with("result=fail\n"));
}
