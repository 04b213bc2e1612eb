//! Structured blocks, block faces and inter-block connectivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// One of the six logical faces of a structured block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Face {
    IMin,
    IMax,
    JMin,
    JMax,
    KMin,
    KMax,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::IMin, Face::IMax, Face::JMin, Face::JMax, Face::KMin, Face::KMax];

    pub fn from_index(idx: usize) -> Option<Face> {
        Face::ALL.get(idx).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Logical direction normal to the face (0 = i, 1 = j, 2 = k).
    pub fn axis(self) -> usize {
        self.index() / 2
    }

    pub fn is_max(self) -> bool {
        self.index() % 2 == 1
    }

    /// The two in-face logical axes, in (a, b) order.
    pub fn tangent_axes(self) -> (usize, usize) {
        match self.axis() {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }
}

/// Boundary classification of a block face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceTag {
    Wall,
    Farfield,
    Interblock,
}

/// In-face index permutation between two connected faces.
///
/// Bit 0 swaps the in-face axes, bit 1 reverses the first target axis and
/// bit 2 reverses the second target axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation(pub u8);

impl Orientation {
    pub const ALIGNED: Orientation = Orientation(0);

    pub fn new(code: u8) -> Result<Self> {
        if code > 7 {
            return Err(Error::InvalidMesh(format!("orientation code {code} outside 0..=7")));
        }
        Ok(Orientation(code))
    }

    pub fn swaps(self) -> bool {
        self.0 & 1 != 0
    }

    /// Source face extents (na, nb) as seen on the target face.
    pub fn target_extent(self, na: usize, nb: usize) -> (usize, usize) {
        if self.swaps() {
            (nb, na)
        } else {
            (na, nb)
        }
    }

    /// Map in-face coordinates from the source face onto the target face,
    /// whose extents are `(ta, tb)`.
    pub fn map(self, a: usize, b: usize, ta: usize, tb: usize) -> (usize, usize) {
        let (p, q) = if self.swaps() { (b, a) } else { (a, b) };
        let p = if self.0 & 2 != 0 { ta - 1 - p } else { p };
        let q = if self.0 & 4 != 0 { tb - 1 - q } else { q };
        (p, q)
    }

    /// Inverse mapping, target face to source face.
    pub fn unmap(self, p: usize, q: usize, ta: usize, tb: usize) -> (usize, usize) {
        let p = if self.0 & 2 != 0 { ta - 1 - p } else { p };
        let q = if self.0 & 4 != 0 { tb - 1 - q } else { q };
        if self.swaps() {
            (q, p)
        } else {
            (p, q)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceRef {
    pub block: usize,
    pub face: Face,
}

/// A matched pair of block faces. Block `a` is the mother side: its node
/// positions win whenever shared nodes are reconciled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub a: FaceRef,
    pub b: FaceRef,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTopology {
    /// Node counts (ni, nj, nk) of every block.
    pub dims: Vec<[usize; 3]>,
    pub connections: Vec<Connection>,
    /// Tag of each of the six faces of every block.
    pub tags: Vec<[FaceTag; 6]>,
}

impl BlockTopology {
    pub fn tag(&self, block: usize, face: Face) -> FaceTag {
        self.tags[block][face.index()]
    }

    /// Connection attached to a block face, with a flag telling whether the
    /// face is the `a` side of it.
    pub fn connection_of(&self, block: usize, face: Face) -> Option<(&Connection, bool)> {
        self.connections.iter().find_map(|c| {
            if c.a.block == block && c.a.face == face {
                Some((c, true))
            } else if c.b.block == block && c.b.face == face {
                Some((c, false))
            } else {
                None
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.len() != self.tags.len() {
            return Err(Error::InvalidMesh("tag table and block list differ in length".into()));
        }
        for (b, d) in self.dims.iter().enumerate() {
            if d.iter().any(|&n| n < 2) {
                return Err(Error::InvalidMesh(format!("block {b} has fewer than 2 nodes along an axis")));
            }
        }
        let mut uses = vec![[0usize; 6]; self.dims.len()];
        for c in &self.connections {
            for side in [c.a, c.b] {
                if side.block >= self.dims.len() {
                    return Err(Error::InvalidMesh(format!("connection references block {}", side.block)));
                }
                uses[side.block][side.face.index()] += 1;
            }
            let (na, nb) = face_node_extent(self.dims[c.a.block], c.a.face);
            let (ta, tb) = face_node_extent(self.dims[c.b.block], c.b.face);
            if c.orientation.target_extent(na, nb) != (ta, tb) {
                return Err(Error::TopologyMismatch(format!(
                    "block {} face {:?} ({na}x{nb}) does not match block {} face {:?} ({ta}x{tb})",
                    c.a.block, c.a.face, c.b.block, c.b.face
                )));
            }
        }
        for (b, tags) in self.tags.iter().enumerate() {
            for face in Face::ALL {
                let n = uses[b][face.index()];
                match tags[face.index()] {
                    FaceTag::Interblock if n != 1 => {
                        return Err(Error::InvalidMesh(format!(
                            "interblock face {face:?} of block {b} appears in {n} connections"
                        )))
                    }
                    FaceTag::Wall | FaceTag::Farfield if n != 0 => {
                        return Err(Error::InvalidMesh(format!(
                            "boundary face {face:?} of block {b} is also connected"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// In-face node extents (na, nb) of a face of a block with node dims `dims`.
pub fn face_node_extent(dims: [usize; 3], face: Face) -> (usize, usize) {
    let (ta, tb) = face.tangent_axes();
    (dims[ta], dims[tb])
}

/// Logical index of the point at in-face position (a, b) and depth `depth`
/// away from `face` into the block, for an index space with extents `n`.
pub fn face_point(n: [usize; 3], face: Face, a: usize, b: usize, depth: usize) -> [usize; 3] {
    let (ta, tb) = face.tangent_axes();
    let mut idx = [0; 3];
    idx[ta] = a;
    idx[tb] = b;
    idx[face.axis()] = if face.is_max() { n[face.axis()] - 1 - depth } else { depth };
    idx
}

/// Structured hexahedral block with node coordinates stored i-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredBlock {
    pub dims: [usize; 3],
    pub coords: Vec<Vec3>,
}

impl StructuredBlock {
    pub fn new(dims: [usize; 3], coords: Vec<Vec3>) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::InvalidMesh(format!("block dims {dims:?} must be >= 2")));
        }
        if coords.len() != dims[0] * dims[1] * dims[2] {
            return Err(Error::InvalidMesh(format!(
                "block dims {dims:?} need {} nodes, got {}",
                dims[0] * dims[1] * dims[2],
                coords.len()
            )));
        }
        Ok(StructuredBlock { dims, coords })
    }

    /// Block built by evaluating `f` at every logical node.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> Vec3) -> Self {
        let mut coords = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    coords.push(f(i, j, k));
                }
            }
        }
        StructuredBlock { dims, coords }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.coords[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, p: Vec3) {
        let n = self.idx(i, j, k);
        self.coords[n] = p;
    }

    pub fn cell_dims(&self) -> [usize; 3] {
        [self.dims[0] - 1, self.dims[1] - 1, self.dims[2] - 1]
    }

    pub fn cell_count(&self) -> usize {
        let c = self.cell_dims();
        c[0] * c[1] * c[2]
    }

    /// The eight corner nodes of cell (i, j, k) in the usual hexahedron order:
    /// bottom face counter-clockwise, then top face.
    pub fn cell_corners(&self, i: usize, j: usize, k: usize) -> [Vec3; 8] {
        [
            self.node(i, j, k),
            self.node(i + 1, j, k),
            self.node(i + 1, j + 1, k),
            self.node(i, j + 1, k),
            self.node(i, j, k + 1),
            self.node(i + 1, j, k + 1),
            self.node(i + 1, j + 1, k + 1),
            self.node(i, j + 1, k + 1),
        ]
    }

    /// True if the node lies on the given block face.
    pub fn on_face(&self, idx: [usize; 3], face: Face) -> bool {
        let ax = face.axis();
        if face.is_max() {
            idx[ax] == self.dims[ax] - 1
        } else {
            idx[ax] == 0
        }
    }
}
