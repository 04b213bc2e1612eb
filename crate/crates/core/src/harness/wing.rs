//! Parametric wing and its 100-block H-type grid.
//!
//! The domain is split into 5 x 5 x 4 blocks: along x (upstream farfield,
//! upstream core, chord, downstream core, downstream farfield), along y
//! (left farfield, left tip core, span, right tip core, right farfield) and
//! along z (lower farfield, lower core, upper core, upper farfield). The
//! wing is the slit between the two core blocks of the chord and span
//! zones: their shared k-faces carry the lower and upper surfaces and are
//! walls. The 18 core blocks form the near field that moves rigidly.
//!
//! Block faces are placed algebraically and block interiors filled by
//! transfinite interpolation. Every node distribution is a fixed map of a
//! uniform parameter, so doubling the cell counts nests the coarse nodes in
//! the fine grid.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::loads::ReferenceQuantities;
use crate::mesh::tfi::{tfi_fill, BoundaryFaces};
use crate::mesh::{Connection, Face, FaceRef, FaceTag, MultiBlockMesh, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WingSpec {
    /// Full span (m).
    pub span: f64,
    pub root_chord: f64,
    pub tip_chord: f64,
    /// Leading-edge sweep (rad).
    pub sweep: f64,
    /// Dihedral (rad).
    pub dihedral: f64,
    /// Maximum thickness over chord of the biconvex section.
    pub thickness: f64,
    /// Maximum parabolic camber over chord.
    pub camber: f64,
    /// Spanwise width over which the thickness is rounded off to zero at
    /// each tip, as a fraction of the tip chord.
    pub tip_rounding: f64,
}

impl Default for WingSpec {
    fn default() -> Self {
        WingSpec {
            span: 1.56,
            root_chord: 0.16,
            tip_chord: 0.1041,
            sweep: 15f64.to_radians(),
            dihedral: 10f64.to_radians(),
            thickness: 0.08,
            camber: 0.03,
            tip_rounding: 0.5,
        }
    }
}

impl WingSpec {
    pub fn rectangular(span: f64, chord: f64) -> Self {
        WingSpec { span, root_chord: chord, tip_chord: chord, sweep: 0.0, dihedral: 0.0, camber: 0.0, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.span, self.root_chord, self.tip_chord, self.thickness, self.tip_rounding];
        if pos.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(format!("wing dimensions must be positive: {self:?}")));
        }
        if !(self.camber >= 0.0) || self.sweep.abs() >= 1.4 || self.dihedral.abs() >= 1.0 {
            return Err(Error::InvalidInput(format!("wing angles or camber out of range: {self:?}")));
        }
        if self.thickness > 0.3 || self.camber > 0.15 {
            return Err(Error::InvalidInput("thickness or camber ratio too large for the section model".into()));
        }
        Ok(())
    }

    /// Planform area (m^2).
    pub fn area(&self) -> f64 {
        0.5 * self.span * (self.root_chord + self.tip_chord)
    }

    fn semispan(&self) -> f64 {
        0.5 * self.span
    }

    /// Chord at spanwise station `y`, clamped to the tip beyond it.
    pub fn chord_at(&self, y: f64) -> f64 {
        let e = (y.abs() / self.semispan()).min(1.0);
        self.root_chord + (self.tip_chord - self.root_chord) * e
    }

    pub fn leading_edge_at(&self, y: f64) -> f64 {
        y.abs().min(self.semispan()) * self.sweep.tan()
    }

    fn dihedral_height(&self, y: f64) -> f64 {
        y.abs().min(self.semispan()) * self.dihedral.tan()
    }

    /// Half-thickness and camber line height at chord fraction `xc` of
    /// station `y` (inside the span).
    fn section(&self, xc: f64, y: f64) -> (f64, f64) {
        let c = self.chord_at(y);
        let shape = xc * (1.0 - xc);
        let half = 2.0 * self.thickness * c * shape * self.tip_factor(y);
        (half, 4.0 * self.camber * c * shape)
    }

    /// Elliptic thickness taper: 1 inboard, 0 at the tip.
    fn tip_factor(&self, y: f64) -> f64 {
        let w = self.tip_rounding * self.tip_chord;
        let start = self.semispan() - w;
        let y = y.abs();
        if y <= start {
            1.0
        } else {
            let e = ((y - start) / w).min(1.0);
            (1.0 - e * e).max(0.0).sqrt()
        }
    }

    /// Reference quantities with `c_ref = root_chord` and `cg` at the root
    /// quarter chord.
    pub fn reference_quantities(&self, dynamic_pressure: f64) -> ReferenceQuantities {
        ReferenceQuantities {
            area: self.area(),
            span: self.span,
            chord: self.root_chord,
            cg: [0.25 * self.root_chord, 0.0, 0.0],
            dynamic_pressure,
        }
    }
}

/// Cell counts of the zones. `span` cells cover the whole wing span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WingResolution {
    pub chord: usize,
    pub span: usize,
    /// Core cells upstream of the leading edge.
    pub upstream: usize,
    /// Core cells downstream of the trailing edge.
    pub downstream: usize,
    /// Core cells beyond each tip.
    pub tip: usize,
    /// Core cells above and below the wing, each.
    pub normal: usize,
    /// Cells across each farfield zone.
    pub farfield: usize,
}

impl Default for WingResolution {
    fn default() -> Self {
        WingResolution { chord: 12, span: 16, upstream: 4, downstream: 4, tip: 4, normal: 4, farfield: 4 }
    }
}

impl WingResolution {
    pub fn scaled(&self, factor: usize) -> Self {
        WingResolution {
            chord: self.chord * factor,
            span: self.span * factor,
            upstream: self.upstream * factor,
            downstream: self.downstream * factor,
            tip: self.tip * factor,
            normal: self.normal * factor,
            farfield: self.farfield * factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chord < 8 {
            return Err(Error::InvalidInput(format!("{} chordwise cells cannot resolve the chord; at least 8 are required", self.chord)));
        }
        if self.span < 2 || !self.span.is_multiple_of(2) {
            return Err(Error::InvalidInput("spanwise cell count must be even and at least 2".into()));
        }
        let rest = [self.upstream, self.downstream, self.tip, self.normal, self.farfield];
        if rest.contains(&0) {
            return Err(Error::InvalidInput("every zone needs at least one cell".into()));
        }
        Ok(())
    }
}

/// Extent of the grid zones, in root chords.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DomainExtent {
    /// Thickness of the rigid core around the wing.
    pub core: f64,
    /// Distance from the core to the farfield boundary.
    pub farfield: f64,
}

impl Default for DomainExtent {
    fn default() -> Self {
        DomainExtent { core: 0.6, farfield: 8.0 }
    }
}

/// Generated grid with its near-field flags.
#[derive(Debug, Clone)]
pub struct WingMesh {
    pub mesh: MultiBlockMesh,
    pub near_field: Vec<bool>,
}

/// Geometric growth over a zone: maps uniform `s` in [0, 1] to [0, 1] with
/// the last cell `growth` times the first (approximately).
fn geometric(s: f64, growth: f64) -> f64 {
    if (growth - 1.0).abs() < 1e-12 {
        s
    } else {
        (growth.powf(s) - 1.0) / (growth - 1.0)
    }
}

/// Blend of uniform and cosine spacing, clustered at both ends.
fn cosine(s: f64) -> f64 {
    0.25 * s + 0.75 * 0.5 * (1.0 - (PI * s).cos())
}

const ZONE_GROWTH: f64 = 4.0;
const FAR_GROWTH: f64 = 6.0;

struct Zones {
    /// Node offsets of the zone boundaries along each axis.
    x: [usize; 6],
    y: [usize; 6],
    z: [usize; 5],
}

impl Zones {
    fn new(r: &WingResolution) -> Self {
        let acc = |n: &[usize]| -> Vec<usize> {
            let mut out = vec![0];
            for v in n {
                out.push(out.last().unwrap() + v);
            }
            out
        };
        let x = acc(&[r.farfield, r.upstream, r.chord, r.downstream, r.farfield]);
        let y = acc(&[r.farfield, r.tip, r.span, r.tip, r.farfield]);
        let z = acc(&[r.farfield, r.normal, r.normal, r.farfield]);
        Zones { x: x.try_into().unwrap(), y: y.try_into().unwrap(), z: z.try_into().unwrap() }
    }

    /// Zone and local parameter of a global node index.
    fn locate<const N: usize>(bounds: &[usize; N], idx: usize) -> (usize, f64) {
        for zone in 0..N - 1 {
            if idx <= bounds[zone + 1] {
                let n = bounds[zone + 1] - bounds[zone];
                return (zone, (idx - bounds[zone]) as f64 / n as f64);
            }
        }
        unreachable!("index beyond the last zone")
    }
}

struct Geometry<'a> {
    spec: &'a WingSpec,
    zones: Zones,
    core: f64,
    far: f64,
}

impl Geometry<'_> {
    fn y_at(&self, j: usize) -> f64 {
        let h = self.spec.semispan();
        let (zone, s) = Zones::locate(&self.zones.y, j);
        match zone {
            0 => -(h + self.core) - self.far * geometric(1.0 - s, FAR_GROWTH),
            1 => -h - self.core * geometric(1.0 - s, ZONE_GROWTH),
            2 => h * (0.5 * PI * (2.0 * s - 1.0)).sin(),
            3 => h + self.core * geometric(s, ZONE_GROWTH),
            _ => h + self.core + self.far * geometric(s, FAR_GROWTH),
        }
    }

    /// x coordinate and, inside the chord zone, the chord fraction.
    fn x_at(&self, i: usize, y: f64) -> (f64, Option<f64>) {
        let le = self.spec.leading_edge_at(y);
        let te = le + self.spec.chord_at(y);
        let x_min = -self.core - self.far;
        let x_max = self.spec.leading_edge_at(self.spec.semispan()) + self.spec.root_chord.max(self.spec.tip_chord) + self.core + self.far;
        let (zone, s) = Zones::locate(&self.zones.x, i);
        match zone {
            0 => {
                let a = le - self.core;
                (a + (x_min - a) * geometric(1.0 - s, FAR_GROWTH), None)
            }
            1 => (le - self.core * geometric(1.0 - s, ZONE_GROWTH), None),
            2 => {
                let xc = cosine(s);
                (le + (te - le) * xc, Some(xc))
            }
            3 => (te + self.core * geometric(s, ZONE_GROWTH), None),
            _ => {
                let a = te + self.core;
                (a + (x_max - a) * geometric(s, FAR_GROWTH), None)
            }
        }
    }

    /// Height of the cut surface at chord fraction `xc` (if inside the
    /// chord zone) and half thickness, for spanwise node `j`.
    fn cut(&self, xc: Option<f64>, j: usize, y: f64) -> (f64, f64) {
        let base = self.spec.dihedral_height(y);
        let Some(xc) = xc else { return (base, 0.0) };
        let (zone, s) = Zones::locate(&self.zones.y, j);
        match zone {
            2 => {
                let (half, camber) = self.spec.section(xc, y);
                (base + camber, half)
            }
            1 | 3 => {
                let fade = if zone == 1 { s } else { 1.0 - s };
                let (_, camber) = self.spec.section(xc, self.spec.semispan());
                (base + camber * fade * fade, 0.0)
            }
            _ => (base, 0.0),
        }
    }

    fn node(&self, i: usize, j: usize, k: usize, upper: bool) -> Vec3 {
        let y = self.y_at(j);
        let (x, xc) = self.x_at(i, y);
        let (mid, half) = self.cut(xc, j, y);
        let base = self.spec.dihedral_height(y);
        let z_lo = -self.core - self.far;
        let z_hi = self.spec.dihedral_height(self.spec.semispan()) + self.core + self.far;
        let (zone, s) = Zones::locate(&self.zones.z, k);
        let z = match zone {
            0 => {
                let a = base - self.core;
                a + (z_lo - a) * geometric(1.0 - s, FAR_GROWTH)
            }
            1 if s == 1.0 && upper => mid + half,
            1 => {
                let surf = mid - half;
                let t = geometric(1.0 - s, ZONE_GROWTH);
                surf + (base - self.core - surf) * t
            }
            2 => {
                let surf = mid + half;
                let t = geometric(s, ZONE_GROWTH);
                surf + (base + self.core - surf) * t
            }
            _ => {
                let a = base + self.core;
                a + (z_hi - a) * geometric(s, FAR_GROWTH)
            }
        };
        [x, y, z]
    }
}

/// Block index of zone `(bx, by, bz)`.
pub fn block_index(bx: usize, by: usize, bz: usize) -> usize {
    bx + 5 * (by + 5 * bz)
}

/// Generate the wing grid. Extents are in root chords.
pub fn generate_wing(spec: &WingSpec, resolution: &WingResolution, extent: &DomainExtent) -> Result<WingMesh> {
    spec.validate()?;
    resolution.validate()?;
    if !(extent.core > 0.0 && extent.farfield > 0.0) {
        return Err(Error::InvalidInput("domain extents must be positive".into()));
    }
    let geo = Geometry {
        spec,
        zones: Zones::new(resolution),
        core: extent.core * spec.root_chord,
        far: extent.farfield * spec.root_chord,
    };
    let z = &geo.zones;
    let mut blocks = Vec::with_capacity(100);
    let mut tags = Vec::with_capacity(100);
    let mut near_field = Vec::with_capacity(100);
    for bz in 0..4 {
        for by in 0..5 {
            for bx in 0..5 {
                let (i0, j0, k0) = (z.x[bx], z.y[by], z.z[bz]);
                let dims = [z.x[bx + 1] - i0 + 1, z.y[by + 1] - j0 + 1, z.z[bz + 1] - k0 + 1];
                let upper = bz >= 2;
                let faces = BoundaryFaces::from_fn(dims, |i, j, k| geo.node(i0 + i, j0 + j, k0 + k, upper));
                blocks.push(tfi_fill(&faces)?);
                let wing = bx == 2 && by == 2;
                let mut t = [FaceTag::Interblock; 6];
                if bx == 0 {
                    t[Face::IMin.index()] = FaceTag::Farfield;
                }
                if bx == 4 {
                    t[Face::IMax.index()] = FaceTag::Farfield;
                }
                if by == 0 {
                    t[Face::JMin.index()] = FaceTag::Farfield;
                }
                if by == 4 {
                    t[Face::JMax.index()] = FaceTag::Farfield;
                }
                if bz == 0 {
                    t[Face::KMin.index()] = FaceTag::Farfield;
                }
                if bz == 3 {
                    t[Face::KMax.index()] = FaceTag::Farfield;
                }
                if wing && bz == 1 {
                    t[Face::KMax.index()] = FaceTag::Wall;
                }
                if wing && bz == 2 {
                    t[Face::KMin.index()] = FaceTag::Wall;
                }
                tags.push(t);
                near_field.push((1..=3).contains(&bx) && (1..=3).contains(&by) && (1..=2).contains(&bz));
            }
        }
    }
    let mut connections = Vec::new();
    let link = |a: usize, fa: Face, b: usize, fb: Face| Connection {
        a: FaceRef { block: a, face: fa },
        b: FaceRef { block: b, face: fb },
        orientation: Orientation::ALIGNED,
    };
    for bz in 0..4 {
        for by in 0..5 {
            for bx in 0..5 {
                let here = block_index(bx, by, bz);
                if bx < 4 {
                    connections.push(link(here, Face::IMax, block_index(bx + 1, by, bz), Face::IMin));
                }
                if by < 4 {
                    connections.push(link(here, Face::JMax, block_index(bx, by + 1, bz), Face::JMin));
                }
                if bz < 3 && !(bx == 2 && by == 2 && bz == 1) {
                    connections.push(link(here, Face::KMax, block_index(bx, by, bz + 1), Face::KMin));
                }
            }
        }
    }
    let mesh = MultiBlockMesh::new(blocks, connections, tags)?;
    mesh.check_volumes()?;
    Ok(WingMesh { mesh, near_field })
}
