//! Three-dimensional transfinite interpolation (Boolean-sum of linear
//! projectors) filling a block interior from its six boundary faces.

use super::block::{face_node_extent, face_point, Face, StructuredBlock};
use crate::error::{Error, Result};
use crate::geom::{dist, Vec3};

/// Node distributions on the six faces of a block. Face `f` is stored
/// a-fastest over its in-face axes ([`Face::tangent_axes`]).
#[derive(Debug, Clone)]
pub struct BoundaryFaces {
    pub dims: [usize; 3],
    pub faces: [Vec<Vec3>; 6],
}

impl BoundaryFaces {
    /// Extract the boundary faces of an existing block.
    pub fn from_block(block: &StructuredBlock) -> Self {
        let faces = Face::ALL.map(|face| {
            let (na, nb) = face_node_extent(block.dims, face);
            let mut v = Vec::with_capacity(na * nb);
            for b in 0..nb {
                for a in 0..na {
                    let p = face_point(block.dims, face, a, b, 0);
                    v.push(block.node(p[0], p[1], p[2]));
                }
            }
            v
        });
        BoundaryFaces { dims: block.dims, faces }
    }

    /// Build from a function evaluated on boundary nodes only.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let faces = Face::ALL.map(|face| {
            let (na, nb) = face_node_extent(dims, face);
            let mut v = Vec::with_capacity(na * nb);
            for b in 0..nb {
                for a in 0..na {
                    let p = face_point(dims, face, a, b, 0);
                    v.push(f(p[0], p[1], p[2]));
                }
            }
            v
        });
        BoundaryFaces { dims, faces }
    }
}

const EDGE_TOL: f64 = 1e-12;

/// Fill a block from its boundary faces. Boundary nodes are copied verbatim;
/// interior nodes come from the Boolean sum of linear projectors in the
/// normalized index coordinates.
pub fn tfi_fill(bf: &BoundaryFaces) -> Result<StructuredBlock> {
    let d = bf.dims;
    if d.iter().any(|&n| n < 2) {
        return Err(Error::InvalidMesh(format!("TFI block dims {d:?} must be >= 2")));
    }
    for face in Face::ALL {
        let (na, nb) = face_node_extent(d, face);
        if bf.faces[face.index()].len() != na * nb {
            return Err(Error::InvalidMesh(format!(
                "face {face:?} holds {} nodes, expected {na}x{nb}",
                bf.faces[face.index()].len()
            )));
        }
    }

    // Scatter faces into a full node array, checking that shared edge nodes agree.
    let n = d[0] * d[1] * d[2];
    let mut coords: Vec<Option<Vec3>> = vec![None; n];
    let idx = |p: [usize; 3]| p[0] + d[0] * (p[1] + d[1] * p[2]);
    let mut scale: f64 = 0.0;
    for face in Face::ALL {
        let (na, _) = face_node_extent(d, face);
        for (m, &x) in bf.faces[face.index()].iter().enumerate() {
            let p = face_point(d, face, m % na, m / na, 0);
            let slot = &mut coords[idx(p)];
            if let Some(prev) = *slot {
                scale = scale.max(prev.iter().fold(0.0_f64, |s, v| s.max(v.abs())));
                if dist(prev, x) > EDGE_TOL * (1.0 + scale) {
                    return Err(Error::InvalidMesh(format!(
                        "face {face:?} disagrees with a neighbouring face at node {p:?}"
                    )));
                }
            }
            *slot = Some(x);
        }
    }
    let at = |i: usize, j: usize, k: usize| coords[idx([i, j, k])].expect("boundary node");

    // Degenerate edges: any of the twelve block edges with zero total length.
    let (ni, nj, nk) = (d[0] - 1, d[1] - 1, d[2] - 1);
    for &(a0, a1) in &[(0, 0), (ni, 0), (0, nk), (ni, nk)] {
        check_edge((0..=nj).map(|j| at(a0, j, a1)))?;
    }
    for &(a0, a1) in &[(0, 0), (0, nk), (nj, 0), (nj, nk)] {
        check_edge((0..=ni).map(|i| at(i, a0, a1)))?;
    }
    for &(a0, a1) in &[(0, 0), (ni, 0), (0, nj), (ni, nj)] {
        check_edge((0..=nk).map(|k| at(a0, a1, k)))?;
    }

    let mut out = StructuredBlock::from_fn(d, |i, j, k| coords[idx([i, j, k])].unwrap_or([0.0; 3]));
    for k in 1..nk {
        let w = k as f64 / nk as f64;
        for j in 1..nj {
            let v = j as f64 / nj as f64;
            for i in 1..ni {
                let u = i as f64 / ni as f64;
                let mut p = [0.0; 3];
                for c in 0..3 {
                    let f = |i, j, k| at(i, j, k)[c];
                    let faces = (1.0 - u) * f(0, j, k)
                        + u * f(ni, j, k)
                        + (1.0 - v) * f(i, 0, k)
                        + v * f(i, nj, k)
                        + (1.0 - w) * f(i, j, 0)
                        + w * f(i, j, nk);
                    let edges = (1.0 - u) * (1.0 - v) * f(0, 0, k)
                        + (1.0 - u) * v * f(0, nj, k)
                        + u * (1.0 - v) * f(ni, 0, k)
                        + u * v * f(ni, nj, k)
                        + (1.0 - u) * (1.0 - w) * f(0, j, 0)
                        + (1.0 - u) * w * f(0, j, nk)
                        + u * (1.0 - w) * f(ni, j, 0)
                        + u * w * f(ni, j, nk)
                        + (1.0 - v) * (1.0 - w) * f(i, 0, 0)
                        + (1.0 - v) * w * f(i, 0, nk)
                        + v * (1.0 - w) * f(i, nj, 0)
                        + v * w * f(i, nj, nk);
                    let corners = (1.0 - u) * (1.0 - v) * (1.0 - w) * f(0, 0, 0)
                        + u * (1.0 - v) * (1.0 - w) * f(ni, 0, 0)
                        + (1.0 - u) * v * (1.0 - w) * f(0, nj, 0)
                        + u * v * (1.0 - w) * f(ni, nj, 0)
                        + (1.0 - u) * (1.0 - v) * w * f(0, 0, nk)
                        + u * (1.0 - v) * w * f(ni, 0, nk)
                        + (1.0 - u) * v * w * f(0, nj, nk)
                        + u * v * w * f(ni, nj, nk);
                    p[c] = faces - edges + corners;
                }
                out.set(i, j, k, p);
            }
        }
    }
    Ok(out)
}

fn check_edge(points: impl Iterator<Item = Vec3>) -> Result<()> {
    let pts: Vec<Vec3> = points.collect();
    let len: f64 = pts.windows(2).map(|w| dist(w[0], w[1])).sum();
    if len <= 0.0 {
        return Err(Error::InvalidMesh("degenerate zero-length block edge".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cartesian_block;

    #[test]
    fn reproduces_uniform_cartesian_grid() {
        let reference = cartesian_block([0.0; 3], [1.0; 3], [4, 5, 6]);
        let filled = tfi_fill(&BoundaryFaces::from_block(&reference)).unwrap();
        for (a, b) in filled.coords.iter().zip(&reference.coords) {
            assert!(dist(*a, *b) < 1e-15);
        }
    }

    #[test]
    fn exact_for_affine_data() {
        let affine = |p: Vec3| {
            [
                2.0 * p[0] + 0.3 * p[1] - 0.1 * p[2] + 1.0,
                -0.4 * p[0] + 1.5 * p[1] + 0.2 * p[2] - 2.0,
                0.1 * p[0] + 0.2 * p[1] + 0.7 * p[2] + 0.5,
            ]
        };
        let mut reference = cartesian_block([0.0; 3], [1.0; 3], [5, 3, 4]);
        for c in reference.coords.iter_mut() {
            *c = affine(*c);
        }
        let filled = tfi_fill(&BoundaryFaces::from_block(&reference)).unwrap();
        for (a, b) in filled.coords.iter().zip(&reference.coords) {
            assert!(dist(*a, *b) < 1e-14);
        }
    }

    #[test]
    fn rejects_mismatched_faces() {
        let reference = cartesian_block([0.0; 3], [1.0; 3], [2, 2, 2]);
        let mut bf = BoundaryFaces::from_block(&reference);
        bf.faces[0].pop();
        assert!(tfi_fill(&bf).is_err());

        let mut bf = BoundaryFaces::from_block(&reference);
        bf.faces[0][0] = [9.0, 9.0, 9.0];
        assert!(tfi_fill(&bf).is_err());
    }

    #[test]
    fn rejects_degenerate_edge() {
        let collapsed = StructuredBlock::from_fn([3, 3, 3], |i, _j, k| [i as f64, 0.0, k as f64]);
        assert!(tfi_fill(&BoundaryFaces::from_block(&collapsed)).is_err());
    }
}
