//! Full-approximation-storage multigrid: coarse grids take every second
//! node of each block, and every coarse cell agglomerates the eight fine
//! cells it contains.

use std::collections::HashMap;

use super::residual::Workspace;
use super::state::{try_primitive, Conservative};
use super::time::{iterate_with, pseudo_advance, PseudoNorms, PseudoProblem, PseudoReport, SolverSettings, SpatialOperator, UnsteadyResidualTerms};
use crate::error::Result;
use crate::mesh::metrics::FaceGeometry;
use crate::mesh::{MultiBlockMesh, StructuredBlock};

/// Every second node of every block, or `None` when some block has an odd
/// cell count along an axis.
pub fn coarsen(mesh: &MultiBlockMesh) -> Option<MultiBlockMesh> {
    if mesh.blocks.iter().any(|b| b.cell_dims().iter().any(|&n| n < 2 || n % 2 != 0)) {
        return None;
    }
    let blocks = mesh
        .blocks
        .iter()
        .map(|b| {
            let d = b.cell_dims().map(|n| n / 2 + 1);
            StructuredBlock::from_fn(d, |i, j, k| b.node(2 * i, 2 * j, 2 * k))
        })
        .collect();
    MultiBlockMesh::new(blocks, mesh.topology.connections.clone(), mesh.topology.tags.clone()).ok()
}

#[derive(Debug, Clone)]
pub struct CoarseLevel {
    pub table: FaceGeometry,
    /// Cell of this level that contains each cell of the next finer level.
    pub parent: Vec<usize>,
}

/// Coarse levels below a fine grid, finest first.
#[derive(Debug, Clone, Default)]
pub struct Hierarchy {
    pub levels: Vec<CoarseLevel>,
}

impl Hierarchy {
    /// Up to `depth - 1` coarse levels below `mesh`, whose face table is
    /// `fine`.
    pub fn build(mesh: &MultiBlockMesh, fine: &FaceGeometry, depth: usize) -> Result<Self> {
        let mut levels = Vec::new();
        let mut current = mesh.clone();
        let mut finer_index = fine.cell_index.clone();
        while levels.len() + 1 < depth {
            let Some(coarse) = coarsen(&current) else { break };
            let table = FaceGeometry::build(&coarse)?;
            let lookup: HashMap<(usize, [usize; 3]), usize> =
                table.cell_index.iter().enumerate().map(|(c, &key)| (key, c)).collect();
            let parent = finer_index.iter().map(|&(b, [i, j, k])| lookup[&(b, [i / 2, j / 2, k / 2])]).collect();
            finer_index = table.cell_index.clone();
            levels.push(CoarseLevel { table, parent });
            current = coarse;
        }
        Ok(Hierarchy { levels })
    }

    /// Levels including the fine grid.
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    /// Coarse meshes of the first `count` coarse levels at the node
    /// positions of `fine`.
    pub fn meshes(&self, fine: &MultiBlockMesh, count: usize) -> Vec<MultiBlockMesh> {
        let mut out: Vec<MultiBlockMesh> = Vec::with_capacity(count);
        for _ in 0..count.min(self.levels.len()) {
            let next = coarsen(out.last().unwrap_or(fine)).expect("hierarchy was built from a coarsenable mesh");
            out.push(next);
        }
        out
    }
}

/// Operators of all levels, finest first, with the parent map of every
/// level below the finest.
pub struct LevelStack<'a> {
    pub ops: Vec<PseudoProblem<'a>>,
    pub parents: Vec<&'a [usize]>,
}

/// One sawtooth cycle: a multistage step on each level, descending, with
/// the coarse corrections injected back on the way up.
fn cycle(
    stack: &LevelStack,
    level: usize,
    q: &mut [Conservative],
    terms: &UnsteadyResidualTerms,
    settings: &SolverSettings,
    ws: &mut [Workspace],
) -> Result<PseudoNorms> {
    let norms = pseudo_advance(q, &stack.ops[level], Some(terms), settings, &mut ws[level])?;
    if level + 1 == stack.ops.len() {
        return Ok(norms);
    }
    let fine = &stack.ops[level];
    let coarse = &stack.ops[level + 1];
    let parent = stack.parents[level];
    let implicit = terms.a / terms.dt;
    fine.evaluate(q, &mut ws[level], None)?;
    let nc = coarse.volume().len();
    let mut qc0 = vec![[0.0; 5]; nc];
    let mut weight = vec![0.0; nc];
    let mut defect = vec![[0.0; 5]; nc];
    let vf = fine.volume();
    for (c, &p) in parent.iter().enumerate() {
        weight[p] += vf[c];
        for v in 0..5 {
            qc0[p][v] += vf[c] * q[c][v];
            defect[p][v] += ws[level].residual[c][v] + implicit * vf[c] * q[c][v] - terms.source[c][v];
        }
    }
    for (s, w) in qc0.iter_mut().zip(&weight) {
        s.iter_mut().for_each(|x| *x /= w);
    }
    coarse.evaluate(&qc0, &mut ws[level + 1], None)?;
    let vc = coarse.volume();
    let source = (0..nc)
        .map(|p| std::array::from_fn(|v| ws[level + 1].residual[p][v] + implicit * vc[p] * qc0[p][v] - defect[p][v]))
        .collect();
    let coarse_terms = UnsteadyResidualTerms { dt: terms.dt, a: terms.a, source };
    let mut qc = qc0.clone();
    cycle(stack, level + 1, &mut qc, &coarse_terms, settings, ws)?;
    let gamma = fine.settings.gamma;
    let mut dq: Vec<Conservative> = parent.iter().map(|&p| std::array::from_fn(|v| qc[p][v] - qc0[p][v])).collect();
    if settings.correction_smoothing > 0.0 {
        fine.smooth(&mut dq, settings.correction_smoothing);
    }
    for c in 0..parent.len() {
        let corrected: Conservative = std::array::from_fn(|v| q[c][v] + dq[c][v]);
        if try_primitive(&corrected, gamma).is_some() {
            q[c] = corrected;
        }
    }
    Ok(norms)
}

/// Multigrid counterpart of [`super::time::iterate`]; `terms` of `None`
/// is the steady problem.
pub fn iterate_multigrid(
    q: &mut [Conservative],
    stack: &LevelStack,
    terms: Option<&UnsteadyResidualTerms>,
    settings: &SolverSettings,
    tolerance: f64,
    max_iterations: usize,
) -> Result<PseudoReport> {
    let steady;
    let terms = match terms {
        Some(t) => t,
        None => {
            steady = UnsteadyResidualTerms { dt: 1.0, a: 0.0, source: vec![[0.0; 5]; q.len()] };
            &steady
        }
    };
    let mut ws: Vec<Workspace> = (0..stack.ops.len()).map(|_| Workspace::default()).collect();
    iterate_with(tolerance, max_iterations, || cycle(stack, 0, q, terms, settings, &mut ws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cartesian_block, FaceTag};

    #[test]
    fn odd_blocks_do_not_coarsen() {
        let mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [4, 3, 2]), FaceTag::Farfield).unwrap();
        assert!(coarsen(&mesh).is_none());
    }

    #[test]
    fn parents_agglomerate_eight_cells() {
        let mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [8, 4, 4]), FaceTag::Farfield).unwrap();
        let t = FaceGeometry::build(&mesh).unwrap();
        let h = Hierarchy::build(&mesh, &t, 5).unwrap();
        assert_eq!(h.depth(), 3);
        for lvl in &h.levels {
            let mut count = vec![0; lvl.table.cell_count()];
            lvl.parent.iter().for_each(|&p| count[p] += 1);
            assert!(count.iter().all(|&n| n == 8));
        }
        let coarse = h.meshes(&mesh, 2);
        assert_eq!(coarse[1].blocks[0].cell_dims(), [2, 1, 1]);
    }
}
