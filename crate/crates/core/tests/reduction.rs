use std::f64::consts::PI;

use proptest::prelude::*;
use yawstab::derivatives::{
    extract_lateral, extract_yaw_combination, first_harmonic, fit_column, reduce, reduce_series, HarmonicFit, MotionSeries,
};
use yawstab::loads::CoefficientSample;
use yawstab::motion::{CombinedPhaseMode, MotionSpec};

fn phases(n: usize, start: f64) -> Vec<f64> {
    (0..n).map(|j| start + 2.0 * PI * j as f64 / n as f64).collect()
}

fn close(a: &HarmonicFit, b: &HarmonicFit, tol: f64) -> bool {
    (a.mean - b.mean).abs() < tol && (a.a1 - b.a1).abs() < tol && (a.b1 - b.b1).abs() < tol
}

/// Linear aerodynamic model evaluated along a motion.
#[derive(Debug, Clone, Copy)]
struct Model {
    cn_beta: f64,
    cn_beta_dot: f64,
    cn_r: f64,
    cy_beta: f64,
}

fn series(model: Model, motion: MotionSpec, n: usize) -> MotionSeries {
    let samples = (0..n)
        .map(|j| {
            let ktau = 2.0 * PI * j as f64 / n as f64;
            let s = motion.state(ktau);
            CoefficientSample {
                ktau,
                cn: model.cn_beta * s.beta + model.cn_beta_dot * s.beta_dot + model.cn_r * s.r,
                cy: model.cy_beta * s.beta,
                ..Default::default()
            }
        })
        .collect();
    MotionSeries { motion, samples }
}

fn protocol(model: Model, k: f64, psi: f64, amplitudes: &[f64]) -> (MotionSeries, Vec<MotionSeries>, Vec<MotionSeries>) {
    let yaw = series(model, MotionSpec::yaw(k, psi), 64);
    let lateral = amplitudes.iter().map(|a| series(model, MotionSpec::lateral(k, *a), 64)).collect();
    let combined = amplitudes
        .iter()
        .map(|a| series(model, MotionSpec::combined(k, *a, CombinedPhaseMode::ZeroSideslip, None), 64))
        .collect();
    (yaw, lateral, combined)
}

fn model() -> impl Strategy<Value = Model> {
    (-1.0..1.0, -1.0..1.0, -1.0..1.0, -1.0..-0.01).prop_map(|(a, b, c, d)| Model {
        cn_beta: a,
        cn_beta_dot: b,
        cn_r: c,
        cy_beta: d,
    })
}

proptest! {
    #[test]
    fn harmonic_round_trip(mean in -1.0..1.0, a1 in -1.0..1.0, b1 in -1.0..1.0, n in 16usize..128, start in -4.0..4.0) {
        let p = phases(n, start);
        let truth = HarmonicFit { mean, a1, b1 };
        let v: Vec<f64> = p.iter().map(|t| truth.eval(*t)).collect();
        prop_assert!(close(&first_harmonic(&p, &v).unwrap(), &truth, 1e-12));
    }

    #[test]
    fn fit_is_linear(u in prop::collection::vec(-1.0..1.0, 32), v in prop::collection::vec(-1.0..1.0, 32), c in -3.0..3.0) {
        let p = phases(32, 0.3);
        let fu = first_harmonic(&p, &u).unwrap();
        let fv = first_harmonic(&p, &v).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| c * a + b).collect();
        let fw = first_harmonic(&p, &w).unwrap();
        let expect = HarmonicFit { mean: c * fu.mean + fv.mean, a1: c * fu.a1 + fv.a1, b1: c * fu.b1 + fv.b1 };
        prop_assert!(close(&fw, &expect, 1e-12));
    }

    #[test]
    fn higher_harmonics_do_not_leak(a1 in -1.0..1.0, b1 in -1.0..1.0, a2 in -1.0..1.0, b2 in -1.0..1.0, a3 in -1.0..1.0) {
        let p = phases(64, 0.0);
        let base = HarmonicFit { mean: 0.0, a1, b1 };
        let v: Vec<f64> = p
            .iter()
            .map(|t| base.eval(*t) + a2 * (2.0 * t).sin() + b2 * (2.0 * t).cos() + a3 * (3.0 * t).sin())
            .collect();
        prop_assert!(close(&first_harmonic(&p, &v).unwrap(), &base, 1e-12));
    }

    #[test]
    fn lateral_derivatives_do_not_depend_on_amplitude(m in model(), k in 0.01..0.1, y1 in 0.05..0.6, y2 in 0.05..0.6) {
        let get = |y: f64| {
            let s = series(m, MotionSpec::lateral(k, y), 64);
            let fit = fit_column(&s.samples, |c| c.cn).unwrap();
            extract_lateral(&fit, s.motion.sideslip_amplitude(), k).unwrap()
        };
        let (a, b) = (get(y1), get(y2));
        prop_assert!((a.0 - b.0).abs() < 1e-10 && (a.1 - b.1).abs() < 1e-10);
        prop_assert!((a.0 - m.cn_beta).abs() < 1e-10 && (a.1 - m.cn_beta_dot).abs() < 1e-10);
    }

    #[test]
    fn yaw_combination_does_not_depend_on_amplitude(m in model(), k in 0.01..0.1, deg in 0.1..2.0) {
        let psi = f64::to_radians(deg);
        let s = series(m, MotionSpec::yaw(k, psi), 64);
        let c = extract_yaw_combination(&fit_column(&s.samples, |c| c.cn).unwrap(), psi, k).unwrap();
        prop_assert!((c - m.cn_r - m.cn_beta_dot).abs() < 1e-10);
    }

    #[test]
    fn both_methods_recover_a_linear_model(m in model(), k in 0.02..0.1) {
        let psi = 1f64.to_radians();
        let cross = psi / k;
        let (yaw, lateral, combined) = protocol(m, k, psi, &[0.6 * cross, cross * 1.1, 1.5 * cross]);
        let r = reduce(&yaw, &lateral, &combined).unwrap();
        prop_assert!((r.cn_r_interpolated().unwrap() - m.cn_r).abs() < 1e-8);
        prop_assert!((r.cn_r_combined.unwrap() - m.cn_r).abs() < 1e-8);
        prop_assert!(r.linearity_cn_r.unwrap().r2 > 1.0 - 1e-9);
        prop_assert!(r.linearity_cy_beta.unwrap().r2 > 1.0 - 1e-9);
    }
}

#[test]
fn fit_rejects_short_or_uneven_series() {
    assert!(first_harmonic(&phases(8, 0.0), &[0.0; 8]).is_err());
    let mut p = phases(16, 0.0);
    p[3] += 0.01;
    assert!(first_harmonic(&p, &[0.0; 16]).is_err());
}

#[test]
fn reduce_series_sorts_motions() {
    let m = Model { cn_beta: 0.05, cn_beta_dot: 0.2, cn_r: -0.15, cy_beta: -0.3 };
    let psi = 1f64.to_radians();
    let (yaw, lateral, combined) = protocol(m, 0.05, psi, &[0.25, 0.35, 0.45]);
    let direct = reduce(&yaw, &lateral, &combined).unwrap();
    let mut mixed: Vec<MotionSeries> = combined.into_iter().chain(lateral).collect();
    mixed.insert(2, yaw.clone());
    assert_eq!(reduce_series(&mixed).unwrap(), direct);
    mixed.push(yaw);
    assert!(reduce_series(&mixed).is_err());
}

#[test]
fn series_round_trip_through_text() {
    let m = Model { cn_beta: 0.05, cn_beta_dot: 0.2, cn_r: -0.15, cy_beta: -0.3 };
    let s = series(m, MotionSpec::combined(0.05, 0.35, CombinedPhaseMode::ZeroSideslip, None), 32);
    let text = s.to_series().format();
    let back = MotionSeries::from_series(&yawstab::loads::CoefficientSeries::parse(&text).unwrap()).unwrap();
    assert_eq!(back.motion.kind, s.motion.kind);
    for (a, b) in back.samples.iter().zip(&s.samples) {
        assert!((a.cn - b.cn).abs() <= 1e-14 * b.cn.abs());
        assert!((a.ktau - b.ktau).abs() < 1e-15);
    }
}
