//! Spatial residual: net outward flux of every cell over the face table.

use rayon::prelude::*;

use super::flux::{ausm_flux, farfield_flux, wall_flux};
use super::muscl::{muscl_reconstruct, Limiter};
use super::state::{try_primitive, Conservative, Primitive};
use crate::error::{Error, Result};
use crate::geom::{norm, scale, Vec3};
use crate::mesh::metrics::{FaceGeometry, FaceSide};
use crate::mesh::MeshMetrics;

/// Deliberate defects for negative-control testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultInjection {
    #[default]
    None,
    /// Reverse the sign of the upwind dissipation in interior fluxes.
    FluxSign,
}

/// Per-face geometry of one time level: unit normal, area and normal grid
/// speed.
#[derive(Debug, Clone)]
pub struct FaceData {
    pub normal: Vec<Vec3>,
    pub area: Vec<f64>,
    pub speed: Vec<f64>,
}

impl FaceData {
    /// Geometry of a static mesh.
    pub fn fixed(metrics: &MeshMetrics) -> Self {
        let mut fd = Self::with_flux(metrics, |_| 0.0);
        fd.speed.iter_mut().for_each(|s| *s = 0.0);
        fd
    }

    /// Geometry at level n+1 with the face volume flux of the BDF2 (when
    /// `previous` is given) or BDF1 time discretization, so that the
    /// discrete geometric conservation law holds for the chosen scheme.
    pub fn moving(current: &MeshMetrics, previous: Option<&MeshMetrics>) -> Self {
        let dt = current.dt;
        match previous {
            Some(prev) => Self::with_flux(current, |f| (3.0 * current.swept[f] - prev.swept[f]) / (2.0 * dt)),
            None => Self::with_flux(current, |f| current.swept[f] / dt),
        }
    }

    fn with_flux(m: &MeshMetrics, volume_flux: impl Fn(usize) -> f64) -> Self {
        let n = m.area.len();
        let mut normal = Vec::with_capacity(n);
        let mut area = Vec::with_capacity(n);
        let mut speed = Vec::with_capacity(n);
        for f in 0..n {
            let a = norm(m.area[f]);
            if a > 0.0 {
                normal.push(scale(m.area[f], 1.0 / a));
                speed.push(volume_flux(f) / a);
            } else {
                normal.push([0.0; 3]);
                speed.push(0.0);
            }
            area.push(a);
        }
        FaceData { normal, area, speed }
    }
}

/// Everything the residual needs besides states and geometry.
#[derive(Debug, Clone, Copy)]
pub struct ResidualSettings {
    pub gamma: f64,
    pub limiter: Limiter,
    pub farfield: Primitive,
    pub fault: FaultInjection,
}

/// Primitive variables of every cell; an invalid state reports its cell.
pub fn primitives(q: &[Conservative], gamma: f64, out: &mut Vec<Primitive>) -> Result<()> {
    out.clear();
    for (c, s) in q.iter().enumerate() {
        match try_primitive(s, gamma) {
            Some(w) => out.push(w),
            None => {
                return Err(Error::InvalidState { cell: c, reason: format!("nonpositive density or pressure in {s:?}") })
            }
        }
    }
    Ok(())
}

/// Flux (already multiplied by the face area) through face `f`, pointing
/// out of its left cell.
#[inline]
pub fn face_flux(table: &FaceGeometry, fd: &FaceData, w: &[Primitive], s: &ResidualSettings, f: usize) -> [f64; 5] {
    let rec = &table.faces[f];
    let (n, a, vg) = (fd.normal[f], fd.area[f], fd.speed[f]);
    if a == 0.0 {
        return [0.0; 5];
    }
    let wl = &w[rec.left];
    let mut flux = match rec.right {
        FaceSide::Cell(r) => {
            let (fl, fr) = muscl_reconstruct(
                s.limiter,
                rec.left_far.map(|c| &w[c]),
                wl,
                &w[r],
                rec.right_far.map(|c| &w[c]),
            );
            if s.fault == FaultInjection::FluxSign {
                let central = ausm_flux(&fl, &fl, n, vg, s.gamma);
                let central_r = ausm_flux(&fr, &fr, n, vg, s.gamma);
                let up = ausm_flux(&fl, &fr, n, vg, s.gamma);
                let mut out = [0.0; 5];
                for c in 0..5 {
                    let avg = 0.5 * (central[c] + central_r[c]);
                    out[c] = avg - (up[c] - avg);
                }
                out
            } else {
                ausm_flux(&fl, &fr, n, vg, s.gamma)
            }
        }
        FaceSide::Wall => wall_flux(wl, n, vg, s.gamma),
        FaceSide::Farfield => farfield_flux(wl, &s.farfield, n, vg, s.gamma),
    };
    for v in flux.iter_mut() {
        *v *= a;
    }
    flux
}

/// Reusable buffers for residual evaluation.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    pub w: Vec<Primitive>,
    pub flux: Vec<[f64; 5]>,
    pub residual: Vec<[f64; 5]>,
}

/// Net outward flux of every cell from the primitive states in `ws.w`,
/// written to `ws.residual`. Face fluxes are computed in parallel and
/// accumulated in face order, so the result does not depend on the thread
/// count.
pub fn residual_from_primitives(table: &FaceGeometry, fd: &FaceData, s: &ResidualSettings, ws: &mut Workspace) {
    let nf = table.faces.len();
    let w = &ws.w;
    ws.flux.resize(nf, [0.0; 5]);
    ws.flux.par_iter_mut().enumerate().with_min_len(1024).for_each(|(f, out)| *out = face_flux(table, fd, w, s, f));
    ws.residual.clear();
    ws.residual.resize(table.cell_count(), [0.0; 5]);
    for (rec, fl) in table.faces.iter().zip(&ws.flux) {
        let r = &mut ws.residual[rec.left];
        for c in 0..5 {
            r[c] += fl[c];
        }
        if let FaceSide::Cell(rc) = rec.right {
            let r = &mut ws.residual[rc];
            for c in 0..5 {
                r[c] -= fl[c];
            }
        }
    }
}

/// Net outward flux of every cell.
pub fn residual(
    table: &FaceGeometry,
    fd: &FaceData,
    q: &[Conservative],
    s: &ResidualSettings,
    ws: &mut Workspace,
) -> Result<()> {
    primitives(q, s.gamma, &mut ws.w)?;
    residual_from_primitives(table, fd, s, ws);
    Ok(())
}

/// Sum over the faces of each cell of `(|u.n - vg| + c) |S|`.
pub fn spectral_radii(table: &FaceGeometry, fd: &FaceData, w: &[Primitive], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; table.cell_count()];
    let lambda = |w: &Primitive, f: usize| {
        let n = fd.normal[f];
        let un = w[1] * n[0] + w[2] * n[1] + w[3] * n[2];
        ((un - fd.speed[f]).abs() + (gamma * w[4] / w[0]).sqrt()) * fd.area[f]
    };
    for (f, rec) in table.faces.iter().enumerate() {
        out[rec.left] += lambda(&w[rec.left], f);
        if let FaceSide::Cell(r) = rec.right {
            out[r] += lambda(&w[r], f);
        }
    }
    out
}
