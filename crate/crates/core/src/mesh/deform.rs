//! Rigid motion of the near-field blocks with a smooth decay of the
//! displacement through the far-field blocks.

use serde::{Deserialize, Serialize};

use super::block::{Face, FaceTag};
use super::MultiBlockMesh;
use crate::error::{Error, Result};
use crate::geom::{add, dist, rotate_z, scale, sub, Vec3};

/// Translation plus a yaw rotation about the z-axis through `reference`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub translation: Vec3,
    pub yaw: f64,
    pub reference: Vec3,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform { translation: [0.0; 3], yaw: 0.0, reference: [0.0; 3] }
    }

    pub fn is_identity(&self) -> bool {
        self.yaw == 0.0 && self.translation == [0.0; 3]
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        if self.yaw == 0.0 {
            return add(p, self.translation);
        }
        add(add(rotate_z(sub(p, self.reference), self.yaw), self.reference), self.translation)
    }

    /// Rotate a free vector (no translation).
    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        rotate_z(v, self.yaw)
    }

    /// Rotate a free vector from the inertial frame into the body frame.
    pub fn to_body(&self, v: Vec3) -> Vec3 {
        rotate_z(v, -self.yaw)
    }
}

/// Which blocks move rigidly, and the per-node decay weight used in the
/// remaining blocks.
#[derive(Debug, Clone)]
pub struct DeformationPolicy {
    pub near_field: Vec<bool>,
    /// Blend weight per block per node: 1 moves rigidly, 0 stays fixed.
    pub weights: Vec<Vec<f64>>,
}

/// Cubic Hermite decay from 1 at `s = 0` to 0 at `s = 1` with zero slope at
/// both ends.
pub fn hermite_decay(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    1.0 - s * s * (3.0 - 2.0 * s)
}

impl DeformationPolicy {
    /// Build the blend weights on the reference mesh. For a far-field node
    /// the normalized coordinate is `d_in / (d_in + d_out)`, the distances to
    /// the nearest near-field node and to the nearest farfield-boundary node.
    pub fn new(mesh: &MultiBlockMesh, near_field: Vec<bool>) -> Result<Self> {
        if near_field.len() != mesh.blocks.len() {
            return Err(Error::InvalidInput("near-field flags must cover every block".into()));
        }
        let mut inner: Vec<Vec3> = Vec::new();
        let mut outer: Vec<Vec3> = Vec::new();
        for (b, blk) in mesh.blocks.iter().enumerate() {
            for face in Face::ALL {
                let tag = mesh.topology.tag(b, face);
                if tag == FaceTag::Wall && !near_field[b] {
                    return Err(Error::InvalidInput(format!(
                        "block {b} carries a wall face but is not in the near field"
                    )));
                }
                if tag == FaceTag::Farfield && near_field[b] {
                    return Err(Error::InvalidInput(format!(
                        "near-field block {b} touches the farfield boundary"
                    )));
                }
            }
            let d = blk.dims;
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let idx = [i, j, k];
                        let on_face = |f: Face| blk.on_face(idx, f);
                        if near_field[b] {
                            if Face::ALL.into_iter().any(on_face) {
                                inner.push(blk.node(i, j, k));
                            }
                        } else if Face::ALL
                            .into_iter()
                            .any(|f| on_face(f) && mesh.topology.tag(b, f) == FaceTag::Farfield)
                        {
                            outer.push(blk.node(i, j, k));
                        }
                    }
                }
            }
        }
        let nearest = |set: &[Vec3], p: Vec3| set.iter().map(|q| dist(*q, p)).fold(f64::INFINITY, f64::min);
        let weights = mesh
            .blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| {
                if near_field[b] {
                    return vec![1.0; blk.coords.len()];
                }
                blk.coords
                    .iter()
                    .map(|&p| {
                        let d_in = nearest(&inner, p);
                        let d_out = nearest(&outer, p);
                        if d_in == 0.0 || inner.is_empty() && outer.is_empty() {
                            1.0
                        } else if d_out == 0.0 || !d_in.is_finite() {
                            0.0
                        } else {
                            hermite_decay(d_in / (d_in + d_out))
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(DeformationPolicy { near_field, weights })
    }
}

/// Deformed copy of `reference` under `transform`.
pub fn deform_mesh(reference: &MultiBlockMesh, transform: &RigidTransform, policy: &DeformationPolicy) -> Result<MultiBlockMesh> {
    let mut out = reference.clone();
    if transform.is_identity() {
        return Ok(out);
    }
    for (b, blk) in out.blocks.iter_mut().enumerate() {
        let w = &policy.weights[b];
        for (n, p) in blk.coords.iter_mut().enumerate() {
            let moved = transform.apply(*p);
            *p = if w[n] == 1.0 {
                moved
            } else if w[n] == 0.0 {
                *p
            } else {
                add(*p, scale(sub(moved, *p), w[n]))
            };
        }
    }
    out.reconcile();
    out.check_volumes()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_endpoints() {
        assert_eq!(hermite_decay(0.0), 1.0);
        assert_eq!(hermite_decay(1.0), 0.0);
        assert!((hermite_decay(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rigid_transform_preserves_distances() {
        let t = RigidTransform { translation: [0.1, -0.3, 0.2], yaw: 0.37, reference: [1.0, 2.0, 0.5] };
        let pts = [[0.0, 0.0, 0.0], [1.5, -2.0, 3.0], [0.2, 0.9, -1.1]];
        for a in pts {
            for b in pts {
                assert!((dist(a, b) - dist(t.apply(a), t.apply(b))).abs() < 1e-14);
            }
        }
    }
}
