//! Elliptic (Poisson) grid smoothing.
//!
//! Interior nodes solve the inverse Poisson system
//! `sum g^mn r_mn + sum g^mm P_m r_m = 0` by Gauss-Seidel sweeps, with the
//! contravariant metric frozen at the current iterate. Nodes on the interior
//! of an interblock face are smoothed from the mother side, reading across the
//! face, and copied to the child side immediately.

use super::block::{face_node_extent, face_point, Face, FaceTag};
use super::MultiBlockMesh;
use crate::error::{Error, Result};
use crate::geom::{add, cross, dot, norm, scale, sub, Vec3};

/// Source terms of the Poisson system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlFunctions {
    /// Pure Laplace system (P = 0).
    None,
    /// Control functions frozen from the input grid so that its spacing
    /// along grid lines is retained (Thomas-Middlecoff style).
    FromInitialGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingReport {
    pub converged: bool,
    pub iterations: usize,
    /// Largest node movement per sweep, normalized by local grid spacing.
    pub residual_history: Vec<f64>,
}

struct Movable {
    block: usize,
    idx: [usize; 3],
    child: Option<(usize, [usize; 3])>,
    control: [f64; 3],
}

/// Over-relaxation factor of the point sweeps.
pub const DEFAULT_RELAXATION: f64 = 1.8;

/// Smooth `mesh` in place with point SOR sweeps (`relaxation` in (0, 2))
/// until the per-sweep residual drops below `tolerance` or
/// `max_iterations` sweeps have been made. Non-convergence is reported,
/// not raised; an inverted cell is a hard error.
pub fn elliptic_smooth(
    mesh: &mut MultiBlockMesh,
    tolerance: f64,
    max_iterations: usize,
    control: ControlFunctions,
    relaxation: f64,
) -> Result<SmoothingReport> {
    if !(relaxation > 0.0 && relaxation < 2.0) {
        return Err(Error::InvalidInput(format!("relaxation factor {relaxation} outside (0, 2)")));
    }
    if tolerance.is_infinite() {
        return Ok(SmoothingReport { converged: true, iterations: 0, residual_history: Vec::new() });
    }
    mesh.check_volumes()?;
    let mut nodes = movable_nodes(mesh);
    if control == ControlFunctions::FromInitialGrid {
        for m in nodes.iter_mut() {
            if let Some(stencil) = Stencil::gather(mesh, m.block, m.idx) {
                m.control = stencil.line_controls();
            }
        }
    }

    let mut history = Vec::new();
    let mut converged = false;
    for _ in 0..max_iterations {
        let mut worst: f64 = 0.0;
        for m in &nodes {
            let Some(s) = Stencil::gather(mesh, m.block, m.idx) else { continue };
            let (new, h) = s.update(m.control);
            let old = s.center;
            if h > 0.0 {
                worst = worst.max(norm(sub(new, old)) / h);
            }
            let new = add(old, scale(sub(new, old), relaxation));
            mesh.blocks[m.block].set(m.idx[0], m.idx[1], m.idx[2], new);
            if let Some((cb, ci)) = m.child {
                mesh.blocks[cb].set(ci[0], ci[1], ci[2], new);
            }
        }
        history.push(worst);
        if worst < tolerance {
            converged = true;
            break;
        }
    }
    mesh.check_volumes()?;
    if !converged {
        log::warn!(
            "elliptic smoothing did not converge in {max_iterations} sweeps (last residual {:e})",
            history.last().copied().unwrap_or(f64::NAN)
        );
    }
    Ok(SmoothingReport { converged, iterations: history.len(), residual_history: history })
}

fn movable_nodes(mesh: &MultiBlockMesh) -> Vec<Movable> {
    let topo = &mesh.topology;
    let mut out = Vec::new();
    for (b, blk) in mesh.blocks.iter().enumerate() {
        let d = blk.dims;
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let idx = [i, j, k];
                    let on: Vec<Face> = Face::ALL.into_iter().filter(|f| blk.on_face(idx, *f)).collect();
                    match on.as_slice() {
                        [] => out.push(Movable { block: b, idx, child: None, control: [0.0; 3] }),
                        [face] if topo.tag(b, *face) == FaceTag::Interblock => {
                            let Some((c, is_a)) = topo.connection_of(b, *face) else { continue };
                            if !is_a {
                                continue;
                            }
                            let (ta, tb) = face.tangent_axes();
                            let od = mesh.blocks[c.b.block].dims;
                            let (oa, ob) = face_node_extent(od, c.b.face);
                            let (p, q) = c.orientation.map(idx[ta], idx[tb], oa, ob);
                            let ci = face_point(od, c.b.face, p, q, 0);
                            out.push(Movable { block: b, idx, child: Some((c.b.block, ci)), control: [0.0; 3] });
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    out
}

/// 27-point neighbourhood of a node (only the 19 points the scheme needs are
/// populated).
struct Stencil {
    center: Vec3,
    plus: [Vec3; 3],
    minus: [Vec3; 3],
    // cross[m][n] for m < n: (++, +-, -+, --)
    cross: [[Vec3; 4]; 3],
}

impl Stencil {
    fn gather(mesh: &MultiBlockMesh, block: usize, idx: [usize; 3]) -> Option<Stencil> {
        let base = [idx[0] as isize, idx[1] as isize, idx[2] as isize];
        let at = |off: [isize; 3]| mesh.lookup(block, [base[0] + off[0], base[1] + off[1], base[2] + off[2]]);
        let unit = |m: usize, s: isize| {
            let mut o = [0; 3];
            o[m] = s;
            o
        };
        let center = at([0; 3])?;
        let mut plus = [[0.0; 3]; 3];
        let mut minus = [[0.0; 3]; 3];
        for m in 0..3 {
            plus[m] = at(unit(m, 1))?;
            minus[m] = at(unit(m, -1))?;
        }
        let pairs = [(0, 1), (0, 2), (1, 2)];
        let mut crossv = [[[0.0; 3]; 4]; 3];
        for (slot, &(m, n)) in pairs.iter().enumerate() {
            for (c, &(sm, sn)) in [(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().enumerate() {
                let mut o = [0; 3];
                o[m] = sm;
                o[n] = sn;
                crossv[slot][c] = at(o)?;
            }
        }
        Some(Stencil { center, plus, minus, cross: crossv })
    }

    fn first(&self, m: usize) -> Vec3 {
        scale(sub(self.plus[m], self.minus[m]), 0.5)
    }

    fn second(&self, m: usize) -> Vec3 {
        sub(add(self.plus[m], self.minus[m]), scale(self.center, 2.0))
    }

    fn line_controls(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for m in 0..3 {
            let rm = self.first(m);
            let len2 = dot(rm, rm);
            if len2 > 0.0 {
                p[m] = -dot(rm, self.second(m)) / len2;
            }
        }
        p
    }

    /// Gauss-Seidel point update and the local spacing used to normalize it.
    fn update(&self, control: [f64; 3]) -> (Vec3, f64) {
        let r = [self.first(0), self.first(1), self.first(2)];
        let a = [cross(r[1], r[2]), cross(r[2], r[0]), cross(r[0], r[1])];
        let g = |m: usize, n: usize| dot(a[m], a[n]);
        let mut num = [0.0; 3];
        let mut den = 0.0;
        for m in 0..3 {
            let gmm = g(m, m);
            let t = add(add(self.plus[m], self.minus[m]), scale(r[m], control[m]));
            num = add(num, scale(t, gmm));
            den += 2.0 * gmm;
        }
        for (slot, &(m, n)) in [(0, 1), (0, 2), (1, 2)].iter().enumerate() {
            let c = &self.cross[slot];
            let rmn = scale(sub(add(c[0], c[3]), add(c[1], c[2])), 0.25);
            num = add(num, scale(rmn, 2.0 * g(m, n)));
        }
        let h = (0..3).map(|m| norm(r[m])).fold(f64::INFINITY, f64::min);
        if den <= 0.0 {
            return (self.center, h);
        }
        (scale(num, 1.0 / den), h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cartesian_block, FaceTag, MultiBlockMesh};

    #[test]
    fn cartesian_grid_is_a_fixed_point() {
        let mut mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0, 2.0, 1.5], [4, 5, 6]), FaceTag::Farfield).unwrap();
        let before = mesh.clone();
        let rep = elliptic_smooth(&mut mesh, 1e-3, 50, ControlFunctions::None, 1.0).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 1);
        for (a, b) in mesh.blocks[0].coords.iter().zip(&before.blocks[0].coords) {
            assert!(crate::geom::dist(*a, *b) < 1e-14);
        }
    }

    #[test]
    fn stretched_grid_is_fixed_point_with_line_controls() {
        let blk = crate::mesh::StructuredBlock::from_fn([6, 5, 7], |i, j, k| {
            let s = |t: f64| t * t + 0.5 * t;
            [s(i as f64 / 5.0), j as f64 / 4.0, s(k as f64 / 6.0)]
        });
        let mut mesh = MultiBlockMesh::single(blk, FaceTag::Wall).unwrap();
        let before = mesh.clone();
        let rep = elliptic_smooth(&mut mesh, 1e-10, 10, ControlFunctions::FromInitialGrid, DEFAULT_RELAXATION).unwrap();
        assert!(rep.converged, "{rep:?}");
        for (a, b) in mesh.blocks[0].coords.iter().zip(&before.blocks[0].coords) {
            assert!(crate::geom::dist(*a, *b) < 1e-12);
        }
    }

    #[test]
    fn infinite_tolerance_is_a_no_op() {
        let mut mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [2, 2, 2]), FaceTag::Wall).unwrap();
        let before = mesh.clone();
        let rep = elliptic_smooth(&mut mesh, f64::INFINITY, 10, ControlFunctions::None, 1.0).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(mesh, before);
    }
}
