//! Surface pressure integration into force and moment coefficients, and the
//! plain-text coefficient series format.
//!
//! Axes: x downstream, y spanwise, z up. `C_D`, `C_Y` and `C_L` are the x, y
//! and z force components over `q S`; `C_l` and `C_N` are the x and z moment
//! components over `q S b`; `C_m` is the y moment over `q S c`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{add, cross, rotate_z, scale, sub, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceQuantities {
    /// Reference area (m^2).
    pub area: f64,
    /// Reference span (m).
    pub span: f64,
    /// Reference chord (m).
    pub chord: f64,
    /// Moment reference point (m).
    pub cg: Vec3,
    /// Dynamic pressure (Pa).
    pub dynamic_pressure: f64,
}

impl ReferenceQuantities {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.area, self.span, self.chord, self.dynamic_pressure].iter().all(|v| *v > 0.0 && v.is_finite())
            && self.cg.iter().all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidInput(format!("invalid reference quantities {self:?}")));
        }
        Ok(())
    }
}

/// One surface panel: centroid, unit normal pointing out of the body, area
/// and gauge pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallPanel {
    pub center: Vec3,
    pub normal: Vec3,
    pub area: f64,
    pub pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Loads {
    pub force: Vec3,
    /// Moment about the reference point.
    pub moment: Vec3,
}

impl Loads {
    /// Same loads about the point `new_ref`.
    pub fn transfer(&self, old_ref: Vec3, new_ref: Vec3) -> Loads {
        Loads { force: self.force, moment: add(self.moment, cross(sub(old_ref, new_ref), self.force)) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientSample {
    pub ktau: f64,
    pub cy: f64,
    pub cn: f64,
    pub cl: f64,
    pub cd: f64,
    pub croll: f64,
    pub cm: f64,
}

/// Force and moment about `cg` from pressure panels, summed in panel order.
pub fn integrate_panels(panels: &[WallPanel], cg: Vec3) -> Result<Loads> {
    if panels.is_empty() {
        return Err(Error::InvalidInput("no wall panels to integrate".into()));
    }
    let mut out = Loads::default();
    for p in panels {
        if !p.pressure.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite wall pressure at {:?}", p.center)));
        }
        let f = scale(p.normal, -p.pressure * p.area);
        out.force = add(out.force, f);
        out.moment = add(out.moment, cross(sub(p.center, cg), f));
    }
    Ok(out)
}

/// Coefficients of `loads` after rotating them by `-yaw` into body axes.
pub fn coefficients(loads: &Loads, r: &ReferenceQuantities, yaw: f64, ktau: f64) -> CoefficientSample {
    let f = rotate_z(loads.force, -yaw);
    let m = rotate_z(loads.moment, -yaw);
    let qs = r.dynamic_pressure * r.area;
    CoefficientSample {
        ktau,
        cy: f[1] / qs,
        cn: m[2] / (qs * r.span),
        cl: f[2] / qs,
        cd: f[0] / qs,
        croll: m[0] / (qs * r.span),
        cm: m[1] / (qs * r.chord),
    }
}

/// Inertial-frame coefficients about `r.cg`.
pub fn integrate_loads(panels: &[WallPanel], r: &ReferenceQuantities) -> Result<CoefficientSample> {
    r.validate()?;
    Ok(coefficients(&integrate_panels(panels, r.cg)?, r, 0.0, 0.0))
}

/// Coefficient history of one run plus `key=value` metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientSeries {
    pub metadata: Vec<(String, String)>,
    pub samples: Vec<CoefficientSample>,
}

pub const SERIES_HEADER: &str = "ktau C_Y C_N C_L C_D C_l C_m";

impl CoefficientSeries {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let v = self.meta(key).ok_or_else(|| Error::Parse(format!("series lacks `{key}`")))?;
        v.parse().map_err(|_| Error::Parse(format!("`{key}` is not a number: {v}")))
    }

    pub fn format(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "{SERIES_HEADER}");
        for c in &self.samples {
            let _ = writeln!(
                s,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                c.ktau, c.cy, c.cn, c.cl, c.cd, c.croll, c.cm
            );
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = CoefficientSeries::default();
        let mut header = false;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    out.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !header {
                if line.split_whitespace().collect::<Vec<_>>() != SERIES_HEADER.split(' ').collect::<Vec<_>>() {
                    return Err(Error::Parse(format!("line {}: expected header `{SERIES_HEADER}`", n + 1)));
                }
                header = true;
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: bad number `{t}`", n + 1))))
                .collect::<Result<_>>()?;
            if v.len() != 7 {
                return Err(Error::Parse(format!("line {}: expected 7 columns, found {}", n + 1, v.len())));
            }
            out.samples.push(CoefficientSample { ktau: v[0], cy: v[1], cn: v[2], cl: v[3], cd: v[4], croll: v[5], cm: v[6] });
        }
        if !header {
            return Err(Error::Parse("missing series header".into()));
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn column(&self, pick: impl Fn(&CoefficientSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(pick).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refq() -> ReferenceQuantities {
        ReferenceQuantities { area: 2.0, span: 4.0, chord: 0.5, cg: [0.0; 3], dynamic_pressure: 10.0 }
    }

    fn cube_panels(pressure: impl Fn(Vec3) -> f64) -> Vec<WallPanel> {
        let mut out = Vec::new();
        for axis in 0..3 {
            for s in [-1.0, 1.0] {
                let mut n = [0.0; 3];
                n[axis] = s;
                let center = scale(n, 0.5);
                out.push(WallPanel { center: add(center, [0.3, -0.2, 0.1]), normal: n, area: 1.0, pressure: pressure(center) });
            }
        }
        out
    }

    #[test]
    fn uniform_pressure_on_closed_surface() {
        let l = integrate_panels(&cube_panels(|_| 7.5), [0.1, 0.2, 0.3]).unwrap();
        assert!(l.force.iter().chain(l.moment.iter()).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn plate_side_force() {
        let p = [
            WallPanel { center: [0.0, 0.0, 0.0], normal: [0.0, -1.0, 0.0], area: 0.5, pressure: 10.0 },
            WallPanel { center: [0.0, 0.0, 0.0], normal: [0.0, 1.0, 0.0], area: 0.5, pressure: 0.0 },
        ];
        let c = integrate_loads(&p, &refq()).unwrap();
        assert!((c.cy - 0.25).abs() < 1e-15);
        assert!(integrate_loads(&[], &refq()).is_err());
    }

    #[test]
    fn transfer_theorem() {
        let panels = cube_panels(|c| 1.0 + c[0] + 2.0 * c[1] * c[1]);
        let a = integrate_panels(&panels, [0.0; 3]).unwrap();
        let shift = [0.4, -1.0, 2.0];
        let b = integrate_panels(&panels, shift).unwrap();
        let t = a.transfer([0.0; 3], shift);
        for c in 0..3 {
            assert!((t.moment[c] - b.moment[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn series_roundtrip() {
        let s = CoefficientSeries {
            metadata: vec![("motion".into(), "yaw".into()), ("k".into(), "0.05".into())],
            samples: (0..4).map(|i| CoefficientSample { ktau: i as f64, cn: 0.1 / 3.0, ..Default::default() }).collect(),
        };
        let back = CoefficientSeries::parse(&s.format()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.meta_f64("k").unwrap(), 0.05);
        assert!(CoefficientSeries::parse("1 2 3").is_err());
    }
}
