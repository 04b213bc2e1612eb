//! Forced harmonic motions and their kinematics.
//!
//! Time is nondimensional, `tau = t V / c_ref`, so lateral offsets are in
//! chords and rates are per unit `tau`. Axes: x downstream, y spanwise, z up;
//! yaw is a counter-clockwise rotation about +z. In these axes a positive yaw
//! angle produces the same sideslip as a positive lateral velocity, so a pure
//! yaw oscillation has `beta = psi` and `beta_dot = r`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::RigidTransform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    LateralTranslation,
    YawRotation,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinedPhaseMode {
    /// `y = y_max sin(k tau)`, `psi = psi_max sin(k tau)` taken literally.
    SmallAngle,
    /// Heading follows the flight path at every instant, so sideslip is zero.
    #[default]
    ZeroSideslip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSpec {
    pub kind: MotionKind,
    /// Reduced frequency k.
    pub reduced_frequency: f64,
    /// Lateral amplitude in chords (translation and combined motions).
    #[serde(default)]
    pub lateral_amplitude: f64,
    /// Yaw amplitude in radians. Must be left unset for zero-sideslip
    /// combined motion, where it follows from `lateral_amplitude * k`.
    #[serde(default)]
    pub yaw_amplitude: Option<f64>,
    #[serde(default)]
    pub phase_mode: CombinedPhaseMode,
    /// Rotation reference point (m).
    #[serde(default)]
    pub cg: Vec3,
}

/// Instantaneous kinematics at phase `k tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotionState {
    pub phase: f64,
    /// Lateral offset (chords).
    pub y: f64,
    /// Yaw angle (rad).
    pub psi: f64,
    /// Sideslip angle (rad).
    pub beta: f64,
    pub beta_dot: f64,
    pub r: f64,
}

pub fn lateral_state(y_max: f64, k: f64, phase: f64) -> MotionState {
    let (s, c) = phase.sin_cos();
    MotionState {
        phase,
        y: y_max * s,
        psi: 0.0,
        beta: y_max * k * c,
        beta_dot: -y_max * k * k * s,
        r: 0.0,
    }
}

pub fn yaw_state(psi_max: f64, k: f64, phase: f64) -> MotionState {
    let (s, c) = phase.sin_cos();
    let psi = psi_max * c;
    let r = -psi_max * k * s;
    MotionState { phase, y: 0.0, psi, beta: psi, beta_dot: r, r }
}

/// Combined translation and yaw. `psi_max` is only used in
/// [`CombinedPhaseMode::SmallAngle`].
pub fn combined_state(y_max: f64, k: f64, phase: f64, mode: CombinedPhaseMode, psi_max: f64) -> MotionState {
    let (s, c) = phase.sin_cos();
    let y = y_max * s;
    let y_rate = y_max * k * c;
    let y_acc = -y_max * k * k * s;
    match mode {
        CombinedPhaseMode::SmallAngle => {
            let psi = psi_max * s;
            let r = psi_max * k * c;
            MotionState { phase, y, psi, beta: y_rate + psi, beta_dot: y_acc + r, r }
        }
        CombinedPhaseMode::ZeroSideslip => {
            let psi = -y_rate.atan();
            let r = -y_acc / (1.0 + y_rate * y_rate);
            MotionState { phase, y, psi, beta: 0.0, beta_dot: 0.0, r }
        }
    }
}

impl MotionSpec {
    pub fn lateral(k: f64, y_max: f64) -> Self {
        MotionSpec {
            kind: MotionKind::LateralTranslation,
            reduced_frequency: k,
            lateral_amplitude: y_max,
            yaw_amplitude: None,
            phase_mode: CombinedPhaseMode::ZeroSideslip,
            cg: [0.0; 3],
        }
    }

    pub fn yaw(k: f64, psi_max: f64) -> Self {
        MotionSpec { kind: MotionKind::YawRotation, yaw_amplitude: Some(psi_max), lateral_amplitude: 0.0, ..Self::lateral(k, 0.0) }
    }

    pub fn combined(k: f64, y_max: f64, mode: CombinedPhaseMode, psi_max: Option<f64>) -> Self {
        MotionSpec { kind: MotionKind::Combined, yaw_amplitude: psi_max, phase_mode: mode, ..Self::lateral(k, y_max) }
    }

    pub fn with_cg(mut self, cg: Vec3) -> Self {
        self.cg = cg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reduced_frequency > 0.0) {
            return Err(Error::InvalidInput(format!("reduced frequency {} must be positive", self.reduced_frequency)));
        }
        if !(self.lateral_amplitude >= 0.0) || self.yaw_amplitude.is_some_and(|a| !(a >= 0.0)) {
            return Err(Error::InvalidInput("motion amplitudes must be non-negative".into()));
        }
        if self.kind == MotionKind::Combined
            && self.phase_mode == CombinedPhaseMode::ZeroSideslip
            && self.yaw_amplitude.is_some()
        {
            return Err(Error::InvalidInput(
                "zero-sideslip combined motion derives its yaw amplitude; leave it unset".into(),
            ));
        }
        Ok(())
    }

    /// Yaw amplitude in radians, derived for zero-sideslip combined motion.
    pub fn yaw_amplitude(&self) -> f64 {
        match (self.kind, self.phase_mode) {
            (MotionKind::LateralTranslation, _) => 0.0,
            (MotionKind::Combined, CombinedPhaseMode::ZeroSideslip) => self.lateral_amplitude * self.reduced_frequency,
            _ => self.yaw_amplitude.unwrap_or(0.0),
        }
    }

    /// Peak sideslip of the motion's reference signal.
    pub fn sideslip_amplitude(&self) -> f64 {
        match self.kind {
            MotionKind::LateralTranslation => self.lateral_amplitude * self.reduced_frequency,
            MotionKind::YawRotation => self.yaw_amplitude(),
            MotionKind::Combined => match self.phase_mode {
                CombinedPhaseMode::ZeroSideslip => 0.0,
                CombinedPhaseMode::SmallAngle => {
                    (self.lateral_amplitude * self.reduced_frequency).hypot(self.yaw_amplitude())
                }
            },
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.lateral_amplitude == 0.0 && self.yaw_amplitude() == 0.0
    }

    pub fn state(&self, phase: f64) -> MotionState {
        let k = self.reduced_frequency;
        match self.kind {
            MotionKind::LateralTranslation => lateral_state(self.lateral_amplitude, k, phase),
            MotionKind::YawRotation => yaw_state(self.yaw_amplitude(), k, phase),
            MotionKind::Combined => combined_state(self.lateral_amplitude, k, phase, self.phase_mode, self.yaw_amplitude()),
        }
    }

    /// Period of the motion in nondimensional time.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.reduced_frequency
    }
}

/// Rigid body placement at phase `k tau` for reference chord `c_ref` (m).
pub fn rigid_transform_at(spec: &MotionSpec, phase: f64, c_ref: f64) -> Result<RigidTransform> {
    if !(c_ref > 0.0) {
        return Err(Error::InvalidInput(format!("reference chord {c_ref} must be positive")));
    }
    let s = spec.state(phase);
    Ok(RigidTransform { translation: [0.0, s.y * c_ref, 0.0], yaw: s.psi, reference: spec.cg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const DEG: f64 = PI / 180.0;

    #[test]
    fn lateral_start_has_one_degree_sideslip() {
        let s = lateral_state(0.349, 0.05, 0.0);
        assert_eq!(s.y, 0.0);
        assert!((s.beta - 0.01745).abs() < 1e-5);
        assert!((s.beta - 1.0 * DEG).abs() < 2e-5);
        assert_eq!(s.beta_dot, 0.0);
    }

    #[test]
    fn lateral_extremum() {
        let s = lateral_state(0.3, 0.07, FRAC_PI_2);
        assert!((s.y - 0.3).abs() < 1e-15);
        assert!(s.beta.abs() < 1e-15);
        assert!((s.beta_dot + 0.3 * 0.07 * 0.07).abs() < 1e-15);
        let z = lateral_state(0.0, 0.05, 1.234);
        assert_eq!((z.y, z.beta, z.beta_dot, z.psi, z.r), (0.0, 0.0, -0.0, 0.0, 0.0));
    }

    #[test]
    fn yaw_extrema() {
        let s = yaw_state(0.01745, 0.05, 0.0);
        assert_eq!(s.psi, 0.01745);
        assert_eq!(s.r, 0.0);
        let s = yaw_state(0.02, 0.05, FRAC_PI_2);
        assert!(s.psi.abs() < 1e-17);
        assert!((s.r + 0.02 * 0.05).abs() < 1e-18);
    }

    #[test]
    fn small_angle_phase_points() {
        let s = combined_state(0.349065, 0.05, FRAC_PI_2, CombinedPhaseMode::SmallAngle, DEG);
        assert!((s.y - 0.349065).abs() < 1e-15);
        assert!((s.psi - DEG).abs() < 1e-17);
        let s = combined_state(0.349065, 0.05, 0.0, CombinedPhaseMode::SmallAngle, DEG);
        assert_eq!((s.y, s.psi), (0.0, 0.0));
    }

    #[test]
    fn sideslip_amplitude_bounds_the_motion() {
        let lit = MotionSpec::combined(0.05, 0.35, CombinedPhaseMode::SmallAngle, Some(2.0 * DEG));
        for m in [MotionSpec::lateral(0.07, 0.3), MotionSpec::yaw(0.05, DEG), lit] {
            let peak = (0..720).map(|j| m.state(j as f64 * PI / 360.0).beta.abs()).fold(0.0, f64::max);
            assert!((peak - m.sideslip_amplitude()).abs() < 1e-4 * peak, "{:?}: {peak} {}", m.kind, m.sideslip_amplitude());
        }
    }

    #[test]
    fn zero_sideslip_has_no_beta() {
        for n in 0..64 {
            let s = combined_state(0.45, 0.05, n as f64 * 0.1, CombinedPhaseMode::ZeroSideslip, 0.0);
            assert_eq!(s.beta, 0.0);
            assert_eq!(s.beta_dot, 0.0);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MotionSpec::lateral(0.0, 0.3).validate().is_err());
        assert!(MotionSpec::lateral(0.05, -0.3).validate().is_err());
        assert!(MotionSpec::combined(0.05, 0.3, CombinedPhaseMode::ZeroSideslip, Some(0.1)).validate().is_err());
        let m = MotionSpec::combined(0.05, 0.3, CombinedPhaseMode::ZeroSideslip, None);
        m.validate().unwrap();
        assert!((m.yaw_amplitude() - 0.015).abs() < 1e-16);
    }

    #[test]
    fn transform_examples() {
        let zero = MotionSpec::yaw(0.05, 0.0);
        for n in 0..8 {
            assert!(rigid_transform_at(&zero, n as f64, 0.16).unwrap().is_identity());
        }
        let lat = MotionSpec::lateral(0.05, 0.35);
        let t = rigid_transform_at(&lat, FRAC_PI_2, 0.16).unwrap();
        assert!((t.translation[1] - 0.056).abs() < 1e-15);
        assert_eq!(t.yaw, 0.0);
        assert!(rigid_transform_at(&lat, 0.0, 0.0).is_err());
    }
}
