//! Run configuration, read from a TOML file.
//!
//! ```toml
//! output_dir = "run"
//!
//! [wing]                  # or [mesh] with files, never both
//! span = 1.56
//! sweep_deg = 15.0
//!
//! [freestream]
//! mach = 0.15
//!
//! [protocol]
//! reduced_frequency = 0.05
//! yaw_amplitude_deg = 1.0
//! lateral_amplitudes = [0.25, 0.35, 0.45]
//!
//! [solver]
//! steps_per_cycle = 64
//! ```
//!
//! Every section and key is optional except the geometry source; see the
//! field documentation for defaults. Angles are in degrees, lengths in
//! metres, lateral amplitudes in reference chords.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::wing::{DomainExtent, WingResolution, WingSpec};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::loads::ReferenceQuantities;
use crate::motion::{CombinedPhaseMode, MotionSpec};
use crate::solver::{FreestreamConditions, SolverSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WingConfig {
    pub span: f64,
    pub root_chord: f64,
    pub tip_chord: f64,
    pub sweep_deg: f64,
    pub dihedral_deg: f64,
    pub thickness: f64,
    pub camber: f64,
    pub tip_rounding: f64,
}

impl Default for WingConfig {
    fn default() -> Self {
        WingConfig::from_spec(&WingSpec::default())
    }
}

impl WingConfig {
    pub fn from_spec(w: &WingSpec) -> Self {
        WingConfig {
            span: w.span,
            root_chord: w.root_chord,
            tip_chord: w.tip_chord,
            sweep_deg: w.sweep.to_degrees(),
            dihedral_deg: w.dihedral.to_degrees(),
            thickness: w.thickness,
            camber: w.camber,
            tip_rounding: w.tip_rounding,
        }
    }

    pub fn spec(&self) -> WingSpec {
        WingSpec {
            span: self.span,
            root_chord: self.root_chord,
            tip_chord: self.tip_chord,
            sweep: self.sweep_deg.to_radians(),
            dihedral: self.dihedral_deg.to_radians(),
            thickness: self.thickness,
            camber: self.camber,
            tip_rounding: self.tip_rounding,
        }
    }
}

/// Grid read from the native mesh and connectivity files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    pub mesh: PathBuf,
    pub connectivity: PathBuf,
    /// Blocks that move rigidly with the body.
    pub near_field: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    /// Elliptic smoothing of the generated grid.
    pub elliptic: bool,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Over-relaxation factor of the elliptic sweeps.
    pub relaxation: f64,
    /// Laplace sweeps over the far-field displacement after every move.
    pub laplace_iterations: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            elliptic: true,
            tolerance: 1e-3,
            max_iterations: 500,
            relaxation: crate::mesh::elliptic::DEFAULT_RELAXATION,
            laplace_iterations: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreestreamConfig {
    pub mach: f64,
    pub alpha_deg: f64,
    pub pressure: f64,
    pub density: f64,
    pub gamma: f64,
}

impl Default for FreestreamConfig {
    fn default() -> Self {
        let f = FreestreamConditions::default();
        FreestreamConfig { mach: f.mach, alpha_deg: f.alpha.to_degrees(), pressure: f.pressure, density: f.density, gamma: f.gamma }
    }
}

impl FreestreamConfig {
    pub fn conditions(&self) -> FreestreamConditions {
        FreestreamConditions {
            mach: self.mach,
            alpha: self.alpha_deg.to_radians(),
            pressure: self.pressure,
            density: self.density,
            gamma: self.gamma,
        }
    }
}

/// The set of forced motions of a derivative evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub reduced_frequency: f64,
    pub yaw_amplitude_deg: f64,
    /// Lateral amplitudes (chords) of the translation and combined runs.
    pub lateral_amplitudes: Vec<f64>,
    /// Run the zero-sideslip combined motions for the direct method.
    pub combined: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { reduced_frequency: 0.05, yaw_amplitude_deg: 1.0, lateral_amplitudes: vec![0.25, 0.35, 0.45], combined: true }
    }
}

impl ProtocolConfig {
    pub fn is_stationary(&self) -> bool {
        self.yaw_amplitude_deg == 0.0 && self.lateral_amplitudes.iter().all(|a| *a == 0.0)
    }

    pub fn yaw(&self, cg: Vec3) -> MotionSpec {
        MotionSpec::yaw(self.reduced_frequency, self.yaw_amplitude_deg.to_radians()).with_cg(cg)
    }

    pub fn lateral(&self, cg: Vec3) -> Vec<MotionSpec> {
        self.lateral_amplitudes.iter().map(|a| MotionSpec::lateral(self.reduced_frequency, *a).with_cg(cg)).collect()
    }

    pub fn combined(&self, cg: Vec3) -> Vec<MotionSpec> {
        if !self.combined {
            return Vec::new();
        }
        self.lateral_amplitudes
            .iter()
            .map(|a| MotionSpec::combined(self.reduced_frequency, *a, CombinedPhaseMode::ZeroSideslip, None).with_cg(cg))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reduced_frequency > 0.0) {
            return Err(Error::InvalidInput("protocol reduced frequency must be positive".into()));
        }
        if !(self.yaw_amplitude_deg >= 0.0) || self.lateral_amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::InvalidInput("protocol amplitudes must be non-negative".into()));
        }
        if self.lateral_amplitudes.is_empty() {
            return Err(Error::InvalidInput("protocol needs at least one lateral amplitude".into()));
        }
        Ok(())
    }
}

/// Overrides of the reference quantities derived from the wing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceOverrides {
    pub area: Option<f64>,
    pub span: Option<f64>,
    pub chord: Option<f64>,
    pub cg: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub wing: Option<WingConfig>,
    pub mesh: Option<MeshSource>,
    pub resolution: WingResolution,
    pub domain: DomainExtent,
    pub smoothing: SmoothingConfig,
    pub freestream: FreestreamConfig,
    pub protocol: ProtocolConfig,
    pub solver: SolverSettings,
    pub reference: ReferenceOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("run"),
            wing: Some(WingConfig::default()),
            mesh: None,
            resolution: WingResolution::default(),
            domain: DomainExtent::default(),
            smoothing: SmoothingConfig::default(),
            freestream: FreestreamConfig::default(),
            protocol: ProtocolConfig::default(),
            solver: SolverSettings {
                steps_per_cycle: 32,
                cycles: 2,
                pseudo_tolerance: 1e-5,
                max_pseudo_iterations: 150,
                steady_tolerance: 1e-5,
                max_steady_iterations: 1000,
                ..Default::default()
            },
            reference: ReferenceOverrides::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(format!("run configuration: {e}")))?;
        if text_lacks_wing(text) {
            cfg.wing = None;
        }
        Ok(cfg)
    }

    /// Read `path`; relative paths inside the file are taken relative to
    /// its directory.
    pub fn read(path: &Path) -> Result<Self> {
        let mut cfg = Self::parse(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(m) = self.mesh.as_mut() {
            fix(&mut m.mesh);
            fix(&mut m.connectivity);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.wing, &self.mesh) {
            (Some(w), None) => {
                w.spec().validate()?;
                self.resolution.validate()?;
            }
            (None, Some(m)) => {
                for p in [&m.mesh, &m.connectivity] {
                    if !p.is_file() {
                        return Err(Error::InvalidInput(format!("mesh file {} does not exist", p.display())));
                    }
                }
                let r = &self.reference;
                if r.area.is_none() || r.span.is_none() || r.chord.is_none() {
                    return Err(Error::InvalidInput("a mesh-file geometry needs reference area, span and chord".into()));
                }
            }
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give either [wing] or [mesh], not both".into())),
            (None, None) => return Err(Error::InvalidInput("no geometry: add a [wing] or [mesh] section".into())),
        }
        self.freestream.conditions().validate()?;
        self.protocol.validate()?;
        self.solver.validate()?;
        Ok(())
    }

    /// Reference quantities: derived from the wing, then overridden.
    pub fn reference_quantities(&self) -> Result<ReferenceQuantities> {
        let q = self.freestream.conditions().dynamic_pressure();
        let base = match &self.wing {
            Some(w) => w.spec().reference_quantities(q),
            None => ReferenceQuantities { area: 1.0, span: 1.0, chord: 1.0, cg: [0.0; 3], dynamic_pressure: q },
        };
        let o = &self.reference;
        let r = ReferenceQuantities {
            area: o.area.unwrap_or(base.area),
            span: o.span.unwrap_or(base.span),
            chord: o.chord.unwrap_or(base.chord),
            cg: o.cg.unwrap_or(base.cg),
            dynamic_pressure: q,
        };
        r.validate()?;
        Ok(r)
    }
}

/// The default carries a wing; a file that names only a mesh must not
/// inherit it.
fn text_lacks_wing(text: &str) -> bool {
    let value: toml::Value = match text.parse() {
        Ok(v) => v,
        Err(_) => return false,
    };
    value.get("wing").is_none() && value.get("mesh").is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_default_wing() {
        let c = RunConfig::parse("").unwrap();
        c.validate().unwrap();
        assert_eq!(c.wing.unwrap().spec(), WingSpec::default());
        assert_eq!(c.protocol.lateral_amplitudes, vec![0.25, 0.35, 0.45]);
    }

    #[test]
    fn roundtrip_through_toml() {
        let mut c = RunConfig::default();
        c.protocol.yaw_amplitude_deg = 0.5;
        c.solver.steps_per_cycle = 32;
        let back = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_unknown_keys_and_two_geometries() {
        assert!(RunConfig::parse("[wing]\nwingspan = 2.0").is_err());
        let text = "[wing]\nspan = 1.0\n[mesh]\nmesh = \"a\"\nconnectivity = \"b\"\nnear_field = [0]\n";
        let c = RunConfig::parse(text).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn mesh_only_file_drops_default_wing() {
        let text = "[mesh]\nmesh = \"missing.dat\"\nconnectivity = \"missing.conn\"\nnear_field = [0]\n";
        let c = RunConfig::parse(text).unwrap();
        assert!(c.wing.is_none());
        assert!(c.validate().is_err());
    }

    #[test]
    fn reference_overrides_apply() {
        let mut c = RunConfig::default();
        c.reference.span = Some(2.0);
        let r = c.reference_quantities().unwrap();
        assert_eq!(r.span, 2.0);
        assert!((r.area - WingSpec::default().area()).abs() < 1e-15);
    }
}
