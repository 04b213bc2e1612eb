//! Structured multi-block grids: generation by transfinite interpolation,
//! elliptic smoothing, rigid/blended deformation, local Laplace smoothing and
//! moving-mesh metrics.

mod block;
pub mod deform;
pub mod elliptic;
pub mod io;
pub mod laplace;
pub mod metrics;
pub mod tfi;

pub use block::{
    face_node_extent, face_point, BlockTopology, Connection, Face, FaceRef, FaceTag, Orientation,
    StructuredBlock,
};
pub use deform::{deform_mesh, DeformationPolicy, RigidTransform};
pub use elliptic::{elliptic_smooth, ControlFunctions, SmoothingReport};
pub use laplace::{local_laplace_smooth, RegionSelector};
pub use metrics::{compute_metrics, FaceGeometry, MeshMetrics};
pub use tfi::{tfi_fill, BoundaryFaces};

use crate::error::{Error, Result};
use crate::geom::{cross, dot, sub, Vec3};

/// Blocks plus their connectivity and boundary tags.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiBlockMesh {
    pub blocks: Vec<StructuredBlock>,
    pub topology: BlockTopology,
}

impl MultiBlockMesh {
    pub fn new(blocks: Vec<StructuredBlock>, connections: Vec<Connection>, tags: Vec<[FaceTag; 6]>) -> Result<Self> {
        let topology = BlockTopology {
            dims: blocks.iter().map(|b| b.dims).collect(),
            connections,
            tags,
        };
        topology.validate()?;
        Ok(MultiBlockMesh { blocks, topology })
    }

    /// A single block whose six faces all carry `tag`.
    pub fn single(block: StructuredBlock, tag: FaceTag) -> Result<Self> {
        MultiBlockMesh::new(vec![block], Vec::new(), vec![[tag; 6]])
    }

    pub fn node_count(&self) -> usize {
        self.blocks.iter().map(|b| b.coords.len()).sum()
    }

    pub fn cell_count(&self) -> usize {
        self.blocks.iter().map(|b| b.cell_count()).sum()
    }

    /// Copy mother-side node positions onto every child face so that
    /// coincident interblock nodes are bitwise identical.
    pub fn reconcile(&mut self) {
        let connections = self.topology.connections.clone();
        for c in &connections {
            let da = self.blocks[c.a.block].dims;
            let db = self.blocks[c.b.block].dims;
            let (na, nb) = face_node_extent(da, c.a.face);
            let (ta, tb) = face_node_extent(db, c.b.face);
            for b in 0..nb {
                for a in 0..na {
                    let ia = face_point(da, c.a.face, a, b, 0);
                    let (p, q) = c.orientation.map(a, b, ta, tb);
                    let ib = face_point(db, c.b.face, p, q, 0);
                    let pos = self.blocks[c.a.block].node(ia[0], ia[1], ia[2]);
                    self.blocks[c.b.block].set(ib[0], ib[1], ib[2], pos);
                }
            }
        }
    }

    /// Largest distance between nodes that should coincide across connections.
    pub fn interface_mismatch(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.topology.connections {
            let da = self.blocks[c.a.block].dims;
            let db = self.blocks[c.b.block].dims;
            let (na, nb) = face_node_extent(da, c.a.face);
            let (ta, tb) = face_node_extent(db, c.b.face);
            for b in 0..nb {
                for a in 0..na {
                    let ia = face_point(da, c.a.face, a, b, 0);
                    let (p, q) = c.orientation.map(a, b, ta, tb);
                    let ib = face_point(db, c.b.face, p, q, 0);
                    let pa = self.blocks[c.a.block].node(ia[0], ia[1], ia[2]);
                    let pb = self.blocks[c.b.block].node(ib[0], ib[1], ib[2]);
                    worst = worst.max(crate::geom::dist(pa, pb));
                }
            }
        }
        worst
    }

    /// Node at logical index `idx` of `block`, allowing a single index to
    /// overshoot the block by one layer through an interblock face.
    pub fn lookup(&self, block: usize, idx: [isize; 3]) -> Option<Vec3> {
        let blk = &self.blocks[block];
        let mut outside = None;
        for ax in 0..3 {
            let n = blk.dims[ax] as isize;
            if idx[ax] < 0 || idx[ax] >= n {
                if outside.is_some() || idx[ax] < -1 || idx[ax] > n {
                    return None;
                }
                outside = Some(ax);
            }
        }
        let Some(ax) = outside else {
            return Some(blk.node(idx[0] as usize, idx[1] as usize, idx[2] as usize));
        };
        let face = Face::from_index(2 * ax + usize::from(idx[ax] > 0))?;
        let (conn, is_a) = self.topology.connection_of(block, face)?;
        let (ta_ax, tb_ax) = face.tangent_axes();
        let (a, b) = (idx[ta_ax] as usize, idx[tb_ax] as usize);
        let (na, nb) = face_node_extent(blk.dims, face);
        let other = if is_a { conn.b } else { conn.a };
        let od = self.blocks[other.block].dims;
        let (oa, ob) = face_node_extent(od, other.face);
        let (p, q) = if is_a {
            conn.orientation.map(a, b, oa, ob)
        } else {
            conn.orientation.unmap(a, b, na, nb)
        };
        let t = face_point(od, other.face, p, q, 1);
        Some(self.blocks[other.block].node(t[0], t[1], t[2]))
    }

    /// Signed volume of every cell, block by block.
    pub fn cell_volumes(&self) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|blk| {
                let c = blk.cell_dims();
                let mut v = Vec::with_capacity(blk.cell_count());
                for k in 0..c[2] {
                    for j in 0..c[1] {
                        for i in 0..c[0] {
                            v.push(hex_volume(&blk.cell_corners(i, j, k)));
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// Error naming the first cell whose volume is not strictly positive.
    pub fn check_volumes(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for (b, blk) in self.blocks.iter().enumerate() {
            let c = blk.cell_dims();
            for k in 0..c[2] {
                for j in 0..c[1] {
                    for i in 0..c[0] {
                        let v = hex_volume(&blk.cell_corners(i, j, k));
                        if !(v > 0.0) {
                            return Err(Error::InvertedCell { block: b, i, j, k, volume: v });
                        }
                        min = min.min(v);
                    }
                }
            }
        }
        Ok(min)
    }
}

/// Corner indices (into [`StructuredBlock::cell_corners`] order) of the six
/// cell faces, each listed cyclically from its lowest-index corner and
/// oriented so the area vector points out of the cell.
pub const HEX_FACES: [[usize; 4]; 6] = [
    [0, 4, 7, 3], // i-min
    [1, 2, 6, 5], // i-max
    [0, 1, 5, 4], // j-min
    [3, 7, 6, 2], // j-max
    [0, 3, 2, 1], // k-min
    [4, 5, 6, 7], // k-max
];

/// Area vector of the quadrilateral (p0, p1, p2, p3); identical for both
/// diagonal splits.
#[inline]
pub fn quad_area_vector(p: [Vec3; 4]) -> Vec3 {
    let c = cross(sub(p[2], p[0]), sub(p[3], p[1]));
    [0.5 * c[0], 0.5 * c[1], 0.5 * c[2]]
}

/// Signed volume contribution of a quad face split along its (p0, p2)
/// diagonal, measured from the apex `q`.
#[inline]
pub fn quad_cone_volume(p: [Vec3; 4], q: Vec3) -> f64 {
    let a = sub(p[0], q);
    let b = sub(p[1], q);
    let c = sub(p[2], q);
    let d = sub(p[3], q);
    (dot(a, cross(b, c)) + dot(a, cross(c, d))) / 6.0
}

/// Volume of a hexahedron with triangulated faces. Each face is split along
/// the diagonal through its lowest-index corner and closed against corner 0.
pub fn hex_volume(c: &[Vec3; 8]) -> f64 {
    HEX_FACES
        .iter()
        .map(|f| quad_cone_volume([c[f[0]], c[f[1]], c[f[2]], c[f[3]]], c[0]))
        .sum()
}

/// Uniform Cartesian block spanning `lo..hi` with `cells` cells per axis.
pub fn cartesian_block(lo: Vec3, hi: Vec3, cells: [usize; 3]) -> StructuredBlock {
    let dims = [cells[0] + 1, cells[1] + 1, cells[2] + 1];
    StructuredBlock::from_fn(dims, |i, j, k| {
        let t = [
            i as f64 / cells[0] as f64,
            j as f64 / cells[1] as f64,
            k as f64 / cells[2] as f64,
        ];
        [
            lo[0] + (hi[0] - lo[0]) * t[0],
            lo[1] + (hi[1] - lo[1]) * t[1],
            lo[2] + (hi[2] - lo[2]) * t[2],
        ]
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_volume() {
        let b = cartesian_block([0.0; 3], [1.0; 3], [1, 1, 1]);
        assert!((hex_volume(&b.cell_corners(0, 0, 0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn closed_cell_normals_sum_to_zero() {
        let mut b = cartesian_block([0.0; 3], [1.0; 3], [1, 1, 1]);
        b.set(1, 1, 1, [1.3, 0.9, 1.2]);
        b.set(0, 1, 0, [0.1, 1.1, -0.2]);
        let c = b.cell_corners(0, 0, 0);
        let mut s = [0.0; 3];
        for f in HEX_FACES {
            let a = quad_area_vector([c[f[0]], c[f[1]], c[f[2]], c[f[3]]]);
            s = crate::geom::add(s, a);
        }
        assert!(crate::geom::norm(s) < 1e-15);
    }

    #[test]
    fn volume_is_independent_of_apex_and_translation() {
        let mut b = cartesian_block([0.0; 3], [1.0; 3], [1, 1, 1]);
        b.set(1, 1, 1, [1.3, 0.9, 1.2]);
        let c = b.cell_corners(0, 0, 0);
        let v0 = hex_volume(&c);
        let shifted: Vec<Vec3> = c.iter().map(|p| crate::geom::add(*p, [5.0, -3.0, 2.0])).collect();
        let v1 = hex_volume(&shifted.try_into().unwrap());
        assert!((v0 - v1).abs() < 1e-13);
        let via_apex: f64 = HEX_FACES
            .iter()
            .map(|f| quad_cone_volume([c[f[0]], c[f[1]], c[f[2]], c[f[3]]], [0.3, 0.2, 0.7]))
            .sum();
        assert!((v0 - via_apex).abs() < 1e-14);
    }

    #[test]
    fn orientation_roundtrip() {
        for code in 0..8 {
            let o = Orientation::new(code).unwrap();
            let (ta, tb) = o.target_extent(4, 7);
            for a in 0..4 {
                for b in 0..7 {
                    let (p, q) = o.map(a, b, ta, tb);
                    assert!(p < ta && q < tb);
                    assert_eq!(o.unmap(p, q, ta, tb), (a, b));
                }
            }
        }
        assert!(Orientation::new(8).is_err());
    }
}
