//! Invariant and regression suites behind the `verify` command.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::oned::shock_tube;
use super::wing::{generate_wing, DomainExtent, WingResolution, WingSpec};
use crate::derivatives::{
    extract_combined, extract_lateral, extract_yaw_combination, fit_column, interpolate_zero_sideforce, rate_fit,
    subtract_for_cnr,
};
use crate::error::{Error, Result};
use crate::loads::CoefficientSample;
use crate::mesh::elliptic::{elliptic_smooth, ControlFunctions, SmoothingReport, DEFAULT_RELAXATION};
use crate::mesh::{cartesian_block, FaceTag, MultiBlockMesh};
use crate::motion::{CombinedPhaseMode, MotionSpec, MotionState};
use crate::solver::{unsteady_run, FaultInjection, FlowSetup, FreestreamConditions, Limiter, MovingMesh, SolverSettings};

/// `(y_max, C_N_beta_dot, C_Nr + C_N_beta_dot, C_Nr)` rows of the
/// lateral-translation table; the combination is measured once, on the
/// first row.
pub const TABLE_SUBTRACTION: [(f64, f64, f64, f64); 3] =
    [(0.25, 0.1616, 0.0612, -0.1004), (0.35, 0.2258, 0.0612, -0.1646), (0.45, 0.2920, 0.0612, -0.2308)];

/// `(y_max, C_Y_beta, C_Nr)` rows of the subtraction method.
pub const TABLE_SIDEFORCE: [(f64, f64, f64); 3] = [(0.25, -0.00044, -0.1004), (0.35, 0.00009, -0.1646), (0.45, 0.00068, -0.2308)];

/// `(y_max, C_Y_beta, C_Nr)` rows of the combined motion.
pub const TABLE_COMBINED: [(f64, f64, f64); 3] = [(0.25, -0.00044, -0.0998), (0.35, 0.00010, -0.1634), (0.45, 0.00066, -0.2265)];

pub const TABLE_SIDEFORCE_CNR: f64 = -0.1533;
pub const TABLE_COMBINED_CNR: f64 = -0.1512;
pub const TABLE_INTERPOLATION_TOLERANCE: f64 = 0.003;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gcl,
    ShockTube,
    Fourier,
    Tables,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Gcl, Suite::ShockTube, Suite::Fourier, Suite::Tables];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gcl => "gcl",
            Suite::ShockTube => "shocktube",
            Suite::Fourier => "fourier",
            Suite::Tables => "tables",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite `{name}`; expected gcl, shocktube, fourier or tables")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn suite_passed(&self, suite: Suite) -> bool {
        self.checks.iter().filter(|c| c.suite == suite).all(|c| c.passed)
    }

    fn push(&mut self, suite: Suite, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { suite, name: name.to_string(), passed, detail });
    }

    /// `suite.check=pass|fail` lines, then `result=pass|fail`.
    pub fn to_key_value(&self) -> String {
        let word = |p: bool| if p { "pass" } else { "fail" };
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{}.{}={}", c.suite.name(), c.name, word(c.passed));
        }
        let _ = writeln!(s, "result={}", word(self.passed()));
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "[{}] {}.{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite.name(), c.name, c.detail);
        }
        s
    }
}

/// Run `suites`; a failing check is report content, never an error.
/// `fault` is injected into the flow solver of the solver suites.
pub fn verify(suites: &[Suite], fault: FaultInjection) -> VerifyReport {
    let mut report = VerifyReport::default();
    for &suite in suites {
        match suite {
            Suite::Gcl => gcl_suite(&mut report, fault),
            Suite::ShockTube => shock_tube_suite(&mut report, fault),
            Suite::Fourier => fourier_suite(&mut report),
            Suite::Tables => tables_suite(&mut report),
        }
    }
    report
}

/// Largest deviation from freestream, relative to the freestream
/// magnitude of each conservative variable, over one cycle of the
/// combined motion on a wall-free moving grid.
pub fn freestream_preservation(
    resolution: &WingResolution,
    motion: &MotionSpec,
    steps: usize,
    fault: FaultInjection,
) -> Result<(f64, f64)> {
    let spec = WingSpec::default();
    let wm = generate_wing(&spec, resolution, &DomainExtent::default())?;
    let moving = MovingMesh::new(wm.mesh, wm.near_field)?.with_transparent_walls()?;
    let freestream = FreestreamConditions::default();
    let setup = FlowSetup { moving, freestream, reference: spec.reference_quantities(freestream.dynamic_pressure()) };
    let settings = SolverSettings { steps_per_cycle: steps, cycles: 1, pseudo_tolerance: 1e-12, fault, ..Default::default() };
    let q0 = setup.freestream_state();
    let run = unsteady_run(&setup, &q0, motion, &settings, |_| {})?;
    let reference = freestream.conservative();
    let momentum = reference[0] * freestream.speed();
    let scale = [reference[0], momentum, momentum, momentum, reference[4]];
    let deviation = run
        .q
        .iter()
        .flat_map(|s| (0..5).map(move |v| (s[v] - reference[v]).abs()))
        .enumerate()
        .map(|(n, d)| d / scale[n % 5])
        .fold(0.0, f64::max);
    Ok((deviation, run.gcl_defect))
}

fn gcl_suite(report: &mut VerifyReport, fault: FaultInjection) {
    let res = WingResolution { chord: 8, span: 8, upstream: 2, downstream: 2, tip: 2, normal: 2, farfield: 2 };
    let motion = MotionSpec::combined(0.05, 0.35, CombinedPhaseMode::ZeroSideslip, None);
    match freestream_preservation(&res, &motion, 16, fault) {
        Ok((dev, gcl)) => {
            report.push(Suite::Gcl, "freestream", dev < 1e-10, format!("max relative deviation {dev:.3e} (limit 1e-10)"));
            report.push(Suite::Gcl, "volume_balance", gcl < 1e-12, format!("GCL defect {gcl:.3e} (limit 1e-12)"));
        }
        Err(e) => report.push(Suite::Gcl, "freestream", false, format!("run failed: {e}")),
    }
}

fn shock_tube_suite(report: &mut VerifyReport, fault: FaultInjection) {
    let mut errors = Vec::new();
    for cells in [100, 200, 400] {
        match shock_tube(cells, Limiter::VanAlbada, fault) {
            Ok(r) if r.l1_error.is_finite() => errors.push(r.l1_error),
            Ok(_) => {
                report.push(Suite::ShockTube, "sod", false, format!("non-finite density error on {cells} cells"));
                return;
            }
            Err(e) => {
                report.push(Suite::ShockTube, "sod", false, format!("{cells} cells: {e}"));
                return;
            }
        }
    }
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.3e}")).collect();
    report.push(Suite::ShockTube, "monotone", monotone, format!("density L1 errors {}", listed.join(" ")));
    let fine = errors[2];
    report.push(Suite::ShockTube, "finest", fine < 0.01, format!("400-cell L1 error {fine:.3e} (limit 0.01)"));
}

/// Synthetic period of `C_N = C_N_beta beta + C_N_beta_dot beta_dot + C_Nr r`
/// sampled from the motion states at `n` uniform phases.
pub fn synthetic_series(motion: &MotionSpec, derivs: (f64, f64, f64), n: usize) -> Vec<CoefficientSample> {
    let (cnb, cnbd, cnr) = derivs;
    (0..n)
        .map(|j| {
            let ktau = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let MotionState { beta, beta_dot, r, .. } = motion.state(ktau);
            CoefficientSample { ktau, cn: cnb * beta + cnbd * beta_dot + cnr * r, ..Default::default() }
        })
        .collect()
}

/// Largest extraction error over `trials` random derivative triples with
/// amplitudes up to 2 deg and reduced frequencies up to 0.1.
pub fn fourier_round_trip(trials: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let derivs = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let k = rng.gen_range(0.01..=0.1);
        let amp = rng.gen_range(0.1f64..=2.0).to_radians();
        let lateral = MotionSpec::lateral(k, amp / k);
        let yaw = MotionSpec::yaw(k, amp);
        let combined = MotionSpec::combined(k, amp / k, CombinedPhaseMode::ZeroSideslip, None);

        let fit = fit_column(&synthetic_series(&lateral, derivs, samples), |s| s.cn)?;
        let (cnb, cnbd) = extract_lateral(&fit, lateral.sideslip_amplitude(), k)?;
        let fit = fit_column(&synthetic_series(&yaw, derivs, samples), |s| s.cn)?;
        let cnr_sub = subtract_for_cnr(extract_yaw_combination(&fit, amp, k)?, cnbd);
        let series = synthetic_series(&combined, derivs, samples);
        let ktau: Vec<f64> = series.iter().map(|s| s.ktau).collect();
        let cnr_direct = extract_combined(&fit_column(&series, |s| s.cn)?, &rate_fit(&combined, &ktau)?)?;

        for e in [cnb - derivs.0, cnbd - derivs.1, cnr_sub - derivs.2, cnr_direct - derivs.2] {
            worst = worst.max(e.abs());
        }
    }
    Ok(worst)
}

fn fourier_suite(report: &mut VerifyReport) {
    match fourier_round_trip(50, 64, 0x5eed) {
        Ok(e) => report.push(Suite::Fourier, "round_trip", e < 1e-8, format!("largest error {e:.3e} (limit 1e-8)")),
        Err(e) => report.push(Suite::Fourier, "round_trip", false, format!("{e}")),
    }
}

/// Unit cube of `cells`^3 cells whose interior nodes are displaced by up to
/// a fifth of the spacing along each axis.
pub fn perturbed_grid(cells: usize, seed: u64) -> Result<MultiBlockMesh> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut block = cartesian_block([0.0; 3], [1.0; 3], [cells; 3]);
    let h = 1.0 / cells as f64;
    for k in 1..cells {
        for j in 1..cells {
            for i in 1..cells {
                let p = block.node(i, j, k);
                let mut d = || rng.gen_range(-0.2..0.2) * h;
                block.set(i, j, k, [p[0] + d(), p[1] + d(), p[2] + d()]);
            }
        }
    }
    MultiBlockMesh::single(block, FaceTag::Farfield)
}

/// Elliptic smoothing of the perturbed fixture to a residual of 1e-3;
/// returns the report and the smallest cell volume afterwards.
pub fn elliptic_fixture(control: ControlFunctions, max_iterations: usize) -> Result<(SmoothingReport, f64)> {
    let mut mesh = perturbed_grid(16, 0xe11)?;
    let report = elliptic_smooth(&mut mesh, 1e-3, max_iterations, control, DEFAULT_RELAXATION)?;
    Ok((report, mesh.check_volumes()?))
}

/// Subtraction rows rounded to the four decimals of the table.
pub fn table_subtraction() -> Vec<f64> {
    TABLE_SUBTRACTION.iter().map(|&(_, cnbd, comb, _)| (subtract_for_cnr(comb, cnbd) * 1e4).round() / 1e4).collect()
}

fn tables_suite(report: &mut VerifyReport) {
    let rows = table_subtraction();
    let exact = rows.iter().zip(&TABLE_SUBTRACTION).all(|(v, t)| *v == t.3);
    report.push(Suite::Tables, "subtraction", exact, format!("C_Nr rows {rows:?}"));
    for (name, table, target) in
        [("sideforce", &TABLE_SIDEFORCE, TABLE_SIDEFORCE_CNR), ("combined", &TABLE_COMBINED, TABLE_COMBINED_CNR)]
    {
        let rows: Vec<(f64, f64)> = table.iter().map(|&(_, cyb, cnr)| (cyb, cnr)).collect();
        match interpolate_zero_sideforce(&rows) {
            Ok(z) => {
                let err = (z.piecewise - target).abs();
                report.push(
                    Suite::Tables,
                    name,
                    err <= TABLE_INTERPOLATION_TOLERANCE,
                    format!("C_Nr {:.4} against {target} (tolerance {TABLE_INTERPOLATION_TOLERANCE})", z.piecewise),
                );
            }
            Err(e) => report.push(Suite::Tables, name, false, format!("{e}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_and_fourier_pass() {
        let r = verify(&[Suite::Tables, Suite::Fourier], FaultInjection::None);
        assert!(r.passed(), "{}", r.to_text());
        assert!(r.to_key_value().ends_with("result=pass\n"));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
        }
        assert!(Suite::parse("sod").is_err());
    }

    #[test]
    fn perturbed_fixture_smooths() {
        for control in [ControlFunctions::None, ControlFunctions::FromInitialGrid] {
            let (rep, vmin) = elliptic_fixture(control, 500).unwrap();
            assert!(rep.converged);
            assert!(vmin > 0.0);
        }
    }
}
