//! Local Laplace smoothing: selected nodes are replaced by the mean of their
//! six logical neighbours, Jacobi style.

use super::block::{Face, FaceTag};
use super::MultiBlockMesh;
use crate::error::{Error, Result};
use crate::geom::{add, dot, norm, scale, sub, Vec3};

/// Inclusive logical index box inside one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSelector {
    pub block: usize,
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl RegionSelector {
    /// Every node of `block`.
    pub fn whole_block(mesh: &MultiBlockMesh, block: usize) -> Self {
        let d = mesh.blocks[block].dims;
        RegionSelector { block, lo: [0; 3], hi: [d[0] - 1, d[1] - 1, d[2] - 1] }
    }
}

/// Nodes selected for smoothing. Wall nodes are rejected; other block-face
/// nodes are held fixed.
fn selected_nodes(mesh: &MultiBlockMesh, regions: &[RegionSelector]) -> Result<Vec<(usize, [usize; 3])>> {
    let mut out = Vec::new();
    for r in regions {
        let blk = mesh
            .blocks
            .get(r.block)
            .ok_or_else(|| Error::InvalidInput(format!("region references block {}", r.block)))?;
        for ax in 0..3 {
            if r.hi[ax] >= blk.dims[ax] || r.lo[ax] > r.hi[ax] {
                return Err(Error::InvalidInput(format!("region {r:?} outside block dims {:?}", blk.dims)));
            }
        }
        for k in r.lo[2]..=r.hi[2] {
            for j in r.lo[1]..=r.hi[1] {
                for i in r.lo[0]..=r.hi[0] {
                    let idx = [i, j, k];
                    let faces: Vec<Face> = Face::ALL.into_iter().filter(|f| blk.on_face(idx, *f)).collect();
                    if faces.iter().any(|f| mesh.topology.tag(r.block, *f) == FaceTag::Wall) {
                        return Err(Error::WallInRegion { block: r.block, i, j, k });
                    }
                    if faces.is_empty() {
                        out.push((r.block, idx));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Smooth the selected region in place for `iterations` Jacobi sweeps.
pub fn local_laplace_smooth(mesh: &mut MultiBlockMesh, regions: &[RegionSelector], iterations: usize) -> Result<()> {
    let nodes = selected_nodes(mesh, regions)?;
    for _ in 0..iterations {
        let updated: Vec<Vec3> = nodes.iter().map(|&(b, idx)| neighbour_mean(mesh, b, idx, None)).collect();
        for (&(b, idx), p) in nodes.iter().zip(updated) {
            mesh.blocks[b].set(idx[0], idx[1], idx[2], p);
        }
    }
    mesh.reconcile();
    mesh.check_volumes()?;
    Ok(())
}

/// Smooth the displacement of `mesh` relative to `reference` over the
/// selected region, leaving the reference grid's own stretching intact.
pub fn smooth_displacement(
    mesh: &mut MultiBlockMesh,
    reference: &MultiBlockMesh,
    regions: &[RegionSelector],
    iterations: usize,
) -> Result<()> {
    let nodes = selected_nodes(mesh, regions)?;
    for _ in 0..iterations {
        let updated: Vec<Vec3> = nodes
            .iter()
            .map(|&(b, idx)| {
                let d = neighbour_mean(mesh, b, idx, Some(reference));
                add(reference.blocks[b].node(idx[0], idx[1], idx[2]), d)
            })
            .collect();
        for (&(b, idx), p) in nodes.iter().zip(updated) {
            mesh.blocks[b].set(idx[0], idx[1], idx[2], p);
        }
    }
    mesh.reconcile();
    mesh.check_volumes()?;
    Ok(())
}

fn neighbour_mean(mesh: &MultiBlockMesh, b: usize, idx: [usize; 3], reference: Option<&MultiBlockMesh>) -> Vec3 {
    let blk = &mesh.blocks[b];
    let mut sum = [0.0; 3];
    for ax in 0..3 {
        for s in [-1isize, 1] {
            let mut n = idx;
            n[ax] = (n[ax] as isize + s) as usize;
            let mut p = blk.node(n[0], n[1], n[2]);
            if let Some(r) = reference {
                p = sub(p, r.blocks[b].node(n[0], n[1], n[2]));
            }
            sum = add(sum, p);
        }
    }
    scale(sum, 1.0 / 6.0)
}

/// Largest deviation (radians) from a right angle between grid lines meeting
/// at the interior nodes of the region.
pub fn max_angle_deviation(mesh: &MultiBlockMesh, region: &RegionSelector) -> f64 {
    let blk = &mesh.blocks[region.block];
    let mut worst: f64 = 0.0;
    for k in region.lo[2]..=region.hi[2] {
        for j in region.lo[1]..=region.hi[1] {
            for i in region.lo[0]..=region.hi[0] {
                let idx = [i, j, k];
                if (0..3).any(|ax| idx[ax] == 0 || idx[ax] + 1 >= blk.dims[ax]) {
                    continue;
                }
                let c = blk.node(i, j, k);
                let edge = |ax: usize, s: isize| {
                    let mut n = idx;
                    n[ax] = (n[ax] as isize + s) as usize;
                    sub(blk.node(n[0], n[1], n[2]), c)
                };
                for (m, n) in [(0, 1), (0, 2), (1, 2)] {
                    for sm in [-1, 1] {
                        for sn in [-1, 1] {
                            let (a, b) = (edge(m, sm), edge(n, sn));
                            let cosv = dot(a, b) / (norm(a) * norm(b));
                            let ang = cosv.clamp(-1.0, 1.0).acos();
                            worst = worst.max((ang - std::f64::consts::FRAC_PI_2).abs());
                        }
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cartesian_block;

    fn farfield_cube(cells: usize) -> MultiBlockMesh {
        MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [cells; 3]), FaceTag::Farfield).unwrap()
    }

    #[test]
    fn uniform_region_unchanged() {
        let mut mesh = farfield_cube(4);
        let before = mesh.clone();
        let r = RegionSelector::whole_block(&mesh, 0);
        local_laplace_smooth(&mut mesh, &[r], 3).unwrap();
        for (a, b) in mesh.blocks[0].coords.iter().zip(&before.blocks[0].coords) {
            assert!(crate::geom::dist(*a, *b) < 1e-15);
        }
    }

    #[test]
    fn single_node_goes_to_neighbour_mean() {
        let mut mesh = farfield_cube(4);
        mesh.blocks[0].set(2, 2, 2, [0.6, 0.45, 0.52]);
        let r = RegionSelector { block: 0, lo: [2; 3], hi: [2; 3] };
        local_laplace_smooth(&mut mesh, &[r], 1).unwrap();
        let p = mesh.blocks[0].node(2, 2, 2);
        assert!(crate::geom::dist(p, [0.5, 0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn wall_nodes_rejected() {
        let mut mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [3; 3]), FaceTag::Wall).unwrap();
        let r = RegionSelector::whole_block(&mesh, 0);
        assert!(matches!(local_laplace_smooth(&mut mesh, &[r], 1), Err(Error::WallInRegion { .. })));
    }
}
