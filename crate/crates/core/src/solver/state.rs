//! Conservative and primitive flow states and freestream conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// (rho, rho u, rho v, rho w, rho E).
pub type Conservative = [f64; 5];
/// (rho, u, v, w, p).
pub type Primitive = [f64; 5];

pub const GAMMA_AIR: f64 = 1.4;

/// Primitive variables, or `None` when density or pressure is not positive.
#[inline]
pub fn try_primitive(q: &Conservative, gamma: f64) -> Option<Primitive> {
    let rho = q[0];
    if !(rho > 0.0) {
        return None;
    }
    let inv = 1.0 / rho;
    let (u, v, w) = (q[1] * inv, q[2] * inv, q[3] * inv);
    let p = (gamma - 1.0) * (q[4] - 0.5 * rho * (u * u + v * v + w * w));
    if !(p > 0.0) {
        return None;
    }
    Some([rho, u, v, w, p])
}

pub fn primitive_from_conservative(q: &Conservative, gamma: f64) -> Result<Primitive> {
    try_primitive(q, gamma).ok_or_else(|| Error::InvalidState {
        cell: usize::MAX,
        reason: format!("nonpositive density or pressure in {q:?}"),
    })
}

#[inline]
pub fn conservative_from_primitive(w: &Primitive, gamma: f64) -> Conservative {
    let [rho, u, v, wz, p] = *w;
    [rho, rho * u, rho * v, rho * wz, p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v + wz * wz)]
}

#[inline]
pub fn sound_speed(w: &Primitive, gamma: f64) -> f64 {
    (gamma * w[4] / w[0]).sqrt()
}

/// Analytic Euler flux through a face with unit normal `n` moving with
/// normal speed `vg`.
pub fn euler_flux(w: &Primitive, n: Vec3, vg: f64, gamma: f64) -> [f64; 5] {
    let [rho, u, v, wz, p] = *w;
    let un = u * n[0] + v * n[1] + wz * n[2];
    let rel = un - vg;
    let e = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v + wz * wz);
    [
        rho * rel,
        rho * u * rel + p * n[0],
        rho * v * rel + p * n[1],
        rho * wz * rel + p * n[2],
        e * rel + p * un,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreestreamConditions {
    pub mach: f64,
    /// Angle of attack (rad), rotating the freestream from +x toward +z.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_pressure")]
    pub pressure: f64,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_pressure() -> f64 {
    101_325.0
}

fn default_density() -> f64 {
    1.225
}

fn default_gamma() -> f64 {
    GAMMA_AIR
}

impl Default for FreestreamConditions {
    fn default() -> Self {
        FreestreamConditions::at_mach(0.15)
    }
}

impl FreestreamConditions {
    pub fn at_mach(mach: f64) -> Self {
        FreestreamConditions {
            mach,
            alpha: 0.0,
            pressure: default_pressure(),
            density: default_density(),
            gamma: GAMMA_AIR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mach > 0.0) || !(self.gamma > 1.0) || !(self.pressure > 0.0) || !(self.density > 0.0) {
            return Err(Error::InvalidInput(format!("invalid freestream {self:?}")));
        }
        Ok(())
    }

    pub fn sound_speed(&self) -> f64 {
        (self.gamma * self.pressure / self.density).sqrt()
    }

    pub fn speed(&self) -> f64 {
        self.mach * self.sound_speed()
    }

    pub fn velocity(&self) -> Vec3 {
        let v = self.speed();
        [v * self.alpha.cos(), 0.0, v * self.alpha.sin()]
    }

    pub fn dynamic_pressure(&self) -> f64 {
        0.5 * self.density * self.speed().powi(2)
    }

    pub fn primitive(&self) -> Primitive {
        let v = self.velocity();
        [self.density, v[0], v[1], v[2], self.pressure]
    }

    pub fn conservative(&self) -> Conservative {
        conservative_from_primitive(&self.primitive(), self.gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_state_energy() {
        let q = conservative_from_primitive(&[1.0, 0.0, 0.0, 0.0, 1.0], 1.4);
        assert!((q[4] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn negative_pressure_is_rejected() {
        let q = [1.0, 2.0, 0.0, 0.0, 1.0];
        assert!(primitive_from_conservative(&q, 1.4).is_err());
        assert!(primitive_from_conservative(&[0.0, 0.0, 0.0, 0.0, 1.0], 1.4).is_err());
    }

    #[test]
    fn freestream_quantities() {
        let f = FreestreamConditions::at_mach(0.15);
        let c = (1.4f64 * 101_325.0 / 1.225).sqrt();
        assert!((f.speed() - 0.15 * c).abs() < 1e-12);
        let w = try_primitive(&f.conservative(), f.gamma).unwrap();
        assert!((w[1] - f.speed()).abs() < 1e-11);
        assert!((w[4] - f.pressure).abs() < 1e-9);
    }
}
