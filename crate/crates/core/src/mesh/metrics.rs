//! Face table of a multi-block mesh and the moving-mesh metrics built on it.
//!
//! Every quadrilateral face is stored once, split along the diagonal through
//! its lowest-index corner (on the mother block for interblock faces), with
//! its area vector pointing out of its `left` cell. Cell volumes are sums of
//! face cones and face swept volumes integrate the exact (quadratic in time)
//! triangle area vectors, so the discrete geometric conservation law
//! `sum_f swept_f = vol^{n+1} - vol^n` holds to round-off.

use super::block::{face_node_extent, face_point, Face, FaceTag};
use super::{quad_area_vector, quad_cone_volume, MultiBlockMesh};
use crate::error::{Error, Result};
use crate::geom::{add, cross, dot, scale, sub, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSide {
    Cell(usize),
    Wall,
    Farfield,
}

#[derive(Debug, Clone, Copy)]
pub struct FaceRecord {
    /// Global node ids, cyclic, diagonal (0, 2).
    pub nodes: [usize; 4],
    pub left: usize,
    pub right: FaceSide,
    /// Next cell beyond `left`, away from the face.
    pub left_far: Option<usize>,
    /// Next cell beyond `right`, away from the face.
    pub right_far: Option<usize>,
}

/// Topological face table; independent of node positions.
#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub node_offset: Vec<usize>,
    pub cell_offset: Vec<usize>,
    pub faces: Vec<FaceRecord>,
    /// (face, sign) pairs per cell, CSR layout; sign +1 when the face area
    /// vector points out of the cell.
    pub cell_face_start: Vec<usize>,
    pub cell_faces: Vec<(usize, f64)>,
    /// Global node id used as the cone apex of each cell.
    pub cell_apex: Vec<usize>,
    /// (block, i, j, k) of each cell.
    pub cell_index: Vec<(usize, [usize; 3])>,
    pub wall_faces: Vec<usize>,
    dims: Vec<[usize; 3]>,
}

/// Cyclic in-face axis pair giving a +axis oriented area vector.
fn cyclic_tangents(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (2, 0),
        _ => (0, 1),
    }
}

impl FaceGeometry {
    pub fn build(mesh: &MultiBlockMesh) -> Result<Self> {
        mesh.topology.validate()?;
        let nb = mesh.blocks.len();
        let mut node_offset = Vec::with_capacity(nb);
        let mut cell_offset = Vec::with_capacity(nb);
        let (mut n_nodes, mut n_cells) = (0, 0);
        for blk in &mesh.blocks {
            node_offset.push(n_nodes);
            cell_offset.push(n_cells);
            n_nodes += blk.coords.len();
            n_cells += blk.cell_count();
        }
        let dims: Vec<[usize; 3]> = mesh.blocks.iter().map(|b| b.dims).collect();
        let cdims = |b: usize| [dims[b][0] - 1, dims[b][1] - 1, dims[b][2] - 1];
        let cell_id = |b: usize, c: [usize; 3]| {
            let cd = cdims(b);
            cell_offset[b] + c[0] + cd[0] * (c[1] + cd[1] * c[2])
        };
        let node_id = |b: usize, n: [usize; 3]| node_offset[b] + n[0] + dims[b][0] * (n[1] + dims[b][1] * n[2]);

        // One cell step from (b, c) along (axis, dir), crossing interblock faces.
        let step = |b: usize, c: [usize; 3], axis: usize, dir: isize| -> Option<(usize, [usize; 3], usize, isize)> {
            let cd = cdims(b);
            let next = c[axis] as isize + dir;
            if next >= 0 && next < cd[axis] as isize {
                let mut n = c;
                n[axis] = next as usize;
                return Some((b, n, axis, dir));
            }
            let face = Face::from_index(2 * axis + usize::from(dir > 0))?;
            let (conn, is_a) = mesh.topology.connection_of(b, face)?;
            let (here, there) = if is_a { (conn.a, conn.b) } else { (conn.b, conn.a) };
            let (ta, tb) = here.face.tangent_axes();
            let (a, bb) = (c[ta], c[tb]);
            let od = cdims(there.block);
            let (ea, eb) = face_node_extent(od, there.face);
            let (ha, hb) = face_node_extent(cd, here.face);
            let (p, q) = if is_a { conn.orientation.map(a, bb, ea, eb) } else { conn.orientation.unmap(a, bb, ha, hb) };
            let t = face_point(od, there.face, p, q, 0);
            let inward = if there.face.is_max() { -1 } else { 1 };
            Some((there.block, t, there.face.axis(), inward))
        };
        let step_id = |b, c, axis, dir| step(b, c, axis, dir).map(|(b2, c2, _, _)| cell_id(b2, c2));

        let mut faces = Vec::new();
        for (b, blk) in mesh.blocks.iter().enumerate() {
            let cd = blk.cell_dims();
            for axis in 0..3 {
                let (t1, t2) = cyclic_tangents(axis);
                for s in 0..=cd[axis] {
                    for q in 0..cd[t2] {
                        for p in 0..cd[t1] {
                            let corner = |dp: usize, dq: usize| {
                                let mut n = [0; 3];
                                n[axis] = s;
                                n[t1] = p + dp;
                                n[t2] = q + dq;
                                node_id(b, n)
                            };
                            let plus = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                            let minus = [plus[0], plus[3], plus[2], plus[1]];
                            let cell_at = |layer: usize| {
                                let mut c = [0; 3];
                                c[axis] = layer;
                                c[t1] = p;
                                c[t2] = q;
                                c
                            };
                            if s > 0 && s < cd[axis] {
                                let (l, r) = (cell_at(s - 1), cell_at(s));
                                faces.push(FaceRecord {
                                    nodes: plus,
                                    left: cell_id(b, l),
                                    right: FaceSide::Cell(cell_id(b, r)),
                                    left_far: step_id(b, l, axis, -1),
                                    right_far: step_id(b, r, axis, 1),
                                });
                                continue;
                            }
                            let is_max = s == cd[axis];
                            let face = Face::from_index(2 * axis + usize::from(is_max)).expect("face index");
                            let inner = cell_at(if is_max { s - 1 } else { 0 });
                            let out_dir: isize = if is_max { 1 } else { -1 };
                            let nodes = if is_max { plus } else { minus };
                            let left = cell_id(b, inner);
                            let left_far = step_id(b, inner, axis, -out_dir);
                            let right = match mesh.topology.tag(b, face) {
                                FaceTag::Wall => FaceSide::Wall,
                                FaceTag::Farfield => FaceSide::Farfield,
                                FaceTag::Interblock => {
                                    let (_, is_a) = mesh.topology.connection_of(b, face).expect("validated");
                                    if !is_a {
                                        continue;
                                    }
                                    let (ob, oc, oax, odir) = step(b, inner, axis, out_dir).expect("connected");
                                    let r = cell_id(ob, oc);
                                    faces.push(FaceRecord {
                                        nodes,
                                        left,
                                        right: FaceSide::Cell(r),
                                        left_far,
                                        right_far: step_id(ob, oc, oax, odir),
                                    });
                                    continue;
                                }
                            };
                            faces.push(FaceRecord { nodes, left, right, left_far, right_far: None });
                        }
                    }
                }
            }
        }

        let mut per_cell: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_cells];
        let mut wall_faces = Vec::new();
        for (f, rec) in faces.iter().enumerate() {
            per_cell[rec.left].push((f, 1.0));
            match rec.right {
                FaceSide::Cell(r) => per_cell[r].push((f, -1.0)),
                FaceSide::Wall => wall_faces.push(f),
                FaceSide::Farfield => {}
            }
        }
        let mut cell_face_start = Vec::with_capacity(n_cells + 1);
        let mut cell_faces = Vec::with_capacity(6 * n_cells);
        for list in per_cell {
            cell_face_start.push(cell_faces.len());
            if list.len() != 6 {
                return Err(Error::InvalidMesh(format!("cell bounded by {} faces", list.len())));
            }
            cell_faces.extend(list);
        }
        cell_face_start.push(cell_faces.len());

        let mut cell_apex = Vec::with_capacity(n_cells);
        let mut cell_index = Vec::with_capacity(n_cells);
        for (b, blk) in mesh.blocks.iter().enumerate() {
            let cd = blk.cell_dims();
            for k in 0..cd[2] {
                for j in 0..cd[1] {
                    for i in 0..cd[0] {
                        cell_apex.push(node_id(b, [i, j, k]));
                        cell_index.push((b, [i, j, k]));
                    }
                }
            }
        }

        Ok(FaceGeometry {
            node_offset,
            cell_offset,
            faces,
            cell_face_start,
            cell_faces,
            cell_apex,
            cell_index,
            wall_faces,
            dims,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cell_apex.len()
    }

    pub fn faces_of(&self, cell: usize) -> &[(usize, f64)] {
        &self.cell_faces[self.cell_face_start[cell]..self.cell_face_start[cell + 1]]
    }

    /// Concatenated node positions in global node order.
    pub fn positions(&self, mesh: &MultiBlockMesh) -> Result<Vec<Vec3>> {
        if mesh.blocks.len() != self.dims.len() || mesh.blocks.iter().zip(&self.dims).any(|(b, d)| b.dims != *d) {
            return Err(Error::TopologyMismatch("mesh does not match the face table".into()));
        }
        Ok(mesh.blocks.iter().flat_map(|b| b.coords.iter().copied()).collect())
    }

    fn quad(&self, pos: &[Vec3], f: usize) -> [Vec3; 4] {
        self.faces[f].nodes.map(|n| pos[n])
    }

    pub fn face_center(&self, pos: &[Vec3], f: usize) -> Vec3 {
        let q = self.quad(pos, f);
        scale(add(add(q[0], q[1]), add(q[2], q[3])), 0.25)
    }
}

/// Per-time-level geometric quantities.
#[derive(Debug, Clone)]
pub struct MeshMetrics {
    pub volume: Vec<f64>,
    /// Area vector of every face (m^2), pointing out of its left cell.
    pub area: Vec<Vec3>,
    /// Volume swept by every face since the previous level (m^3).
    pub swept: Vec<f64>,
    /// Face grid velocity (m/s) with `velocity . area = swept / dt`.
    pub grid_velocity: Vec<Vec3>,
    pub dt: f64,
}

impl MeshMetrics {
    /// Largest per-cell violation of `vol^{n+1} - vol^n = sum_f swept_f`,
    /// relative to the cell volume.
    pub fn gcl_defect(&self, table: &FaceGeometry, previous: &MeshMetrics) -> f64 {
        (0..table.cell_count())
            .map(|c| {
                let swept: f64 = table.faces_of(c).iter().map(|&(f, s)| s * self.swept[f]).sum();
                ((self.volume[c] - previous.volume[c]) - swept).abs() / self.volume[c]
            })
            .fold(0.0, f64::max)
    }

    /// Largest per-cell norm of the summed outward area vectors, relative to
    /// the largest face area of that cell.
    pub fn closure_defect(&self, table: &FaceGeometry) -> f64 {
        (0..table.cell_count())
            .map(|c| {
                let mut s = [0.0; 3];
                let mut amax: f64 = 0.0;
                for &(f, sign) in table.faces_of(c) {
                    s = add(s, scale(self.area[f], sign));
                    amax = amax.max(crate::geom::norm(self.area[f]));
                }
                crate::geom::norm(s) / amax
            })
            .fold(0.0, f64::max)
    }
}

fn volumes(table: &FaceGeometry, pos: &[Vec3]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(table.cell_count());
    for c in 0..table.cell_count() {
        let apex = pos[table.cell_apex[c]];
        let v: f64 = table.faces_of(c).iter().map(|&(f, s)| s * quad_cone_volume(table.quad(pos, f), apex)).sum();
        if !(v > 0.0) {
            let (block, [i, j, k]) = table.cell_index[c];
            return Err(Error::InvertedCell { block, i, j, k, volume: v });
        }
        out.push(v);
    }
    Ok(out)
}

/// Swept volume of a triangle whose vertices move linearly from `a` to `b`.
fn triangle_swept(a: [Vec3; 3], b: [Vec3; 3]) -> f64 {
    let d = [sub(b[0], a[0]), sub(b[1], a[1]), sub(b[2], a[2])];
    let mean = scale(add(add(d[0], d[1]), d[2]), 1.0 / 3.0);
    let area = |p: [Vec3; 3]| scale(cross(sub(p[1], p[0]), sub(p[2], p[0])), 0.5);
    let mid = [0, 1, 2].map(|m| scale(add(a[m], b[m]), 0.5));
    let s = add(add(area(a), scale(area(mid), 4.0)), area(b));
    dot(mean, s) / 6.0
}

fn quad_swept(a: [Vec3; 4], b: [Vec3; 4]) -> f64 {
    triangle_swept([a[0], a[1], a[2]], [b[0], b[1], b[2]]) + triangle_swept([a[0], a[2], a[3]], [b[0], b[2], b[3]])
}

/// Metrics of a mesh that is not moving.
pub fn static_metrics(table: &FaceGeometry, mesh: &MultiBlockMesh) -> Result<MeshMetrics> {
    let pos = table.positions(mesh)?;
    let volume = volumes(table, &pos)?;
    let area: Vec<Vec3> = (0..table.faces.len()).map(|f| quad_area_vector(table.quad(&pos, f))).collect();
    let n = area.len();
    Ok(MeshMetrics { volume, area, swept: vec![0.0; n], grid_velocity: vec![[0.0; 3]; n], dt: f64::INFINITY })
}

/// Metrics at level n+1 for the motion `previous -> current` over `dt`.
pub fn compute_metrics(table: &FaceGeometry, previous: &MultiBlockMesh, current: &MultiBlockMesh, dt: f64) -> Result<MeshMetrics> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step {dt} must be positive")));
    }
    let p0 = table.positions(previous)?;
    let p1 = table.positions(current)?;
    let volume = volumes(table, &p1)?;
    let mut area = Vec::with_capacity(table.faces.len());
    let mut swept = Vec::with_capacity(table.faces.len());
    let mut grid_velocity = Vec::with_capacity(table.faces.len());
    for f in 0..table.faces.len() {
        let (qa, qb) = (table.quad(&p0, f), table.quad(&p1, f));
        let s = quad_area_vector(qb);
        let sw = quad_swept(qa, qb);
        let a2 = dot(s, s);
        grid_velocity.push(if a2 > 0.0 { scale(s, sw / (dt * a2)) } else { [0.0; 3] });
        area.push(s);
        swept.push(sw);
    }
    Ok(MeshMetrics { volume, area, swept, grid_velocity, dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cartesian_block, FaceTag, MultiBlockMesh};

    #[test]
    fn unit_cube_static() {
        let mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [1, 1, 1]), FaceTag::Wall).unwrap();
        let t = FaceGeometry::build(&mesh).unwrap();
        let m = static_metrics(&t, &mesh).unwrap();
        assert_eq!(t.faces.len(), 6);
        assert!((m.volume[0] - 1.0).abs() < 1e-15);
        assert!(m.grid_velocity.iter().all(|v| *v == [0.0; 3]));
        assert!(m.closure_defect(&t) < 1e-15);
    }

    #[test]
    fn rigid_translation_sweeps_no_net_volume() {
        let mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [2, 2, 2]), FaceTag::Farfield).unwrap();
        let mut moved = mesh.clone();
        for p in moved.blocks[0].coords.iter_mut() {
            p[1] += 0.3;
        }
        let t = FaceGeometry::build(&mesh).unwrap();
        let m0 = static_metrics(&t, &mesh).unwrap();
        let m1 = compute_metrics(&t, &mesh, &moved, 0.1).unwrap();
        for c in 0..t.cell_count() {
            let net: f64 = t.faces_of(c).iter().map(|&(f, s)| s * dot(m1.grid_velocity[f], m1.area[f])).sum();
            assert!(net.abs() < 1e-14);
        }
        assert!(m1.gcl_defect(&t, &m0) < 1e-14);
    }
}
