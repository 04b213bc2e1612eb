use proptest::prelude::*;
use yawstab::geom::{dist, Vec3};
use yawstab::harness::verify::freestream_preservation;
use yawstab::harness::wing::{generate_wing, DomainExtent, WingResolution, WingSpec};
use yawstab::mesh::deform::{deform_mesh, DeformationPolicy};
use yawstab::mesh::tfi::{tfi_fill, BoundaryFaces};
use yawstab::mesh::{Face, FaceTag};
use yawstab::motion::{rigid_transform_at, CombinedPhaseMode, MotionSpec};
use yawstab::solver::FaultInjection;

fn small() -> WingResolution {
    WingResolution { chord: 8, span: 8, upstream: 2, downstream: 2, tip: 2, normal: 2, farfield: 2 }
}

fn trilinear(c: &[Vec3; 8], u: f64, v: f64, w: f64) -> Vec3 {
    let mut p = [0.0; 3];
    for (n, corner) in c.iter().enumerate() {
        let wu = if n & 1 == 1 { u } else { 1.0 - u };
        let wv = if n & 2 == 2 { v } else { 1.0 - v };
        let ww = if n & 4 == 4 { w } else { 1.0 - w };
        for a in 0..3 {
            p[a] += wu * wv * ww * corner[a];
        }
    }
    p
}

fn corner() -> impl Strategy<Value = Vec3> {
    [-0.2..0.2f64, -0.2..0.2f64, -0.2..0.2f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn tfi_reproduces_trilinear_maps(offsets in prop::array::uniform8(corner()), n in 3usize..9) {
        let mut c = [[0.0; 3]; 8];
        for (i, o) in offsets.iter().enumerate() {
            c[i] = [(i & 1) as f64 + o[0], ((i >> 1) & 1) as f64 + o[1], ((i >> 2) & 1) as f64 + o[2]];
        }
        let dims = [n, n + 1, n + 2];
        let at = |i: usize, j: usize, k: usize| {
            trilinear(&c, i as f64 / (dims[0] - 1) as f64, j as f64 / (dims[1] - 1) as f64, k as f64 / (dims[2] - 1) as f64)
        };
        let block = tfi_fill(&BoundaryFaces::from_fn(dims, at)).unwrap();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    prop_assert!(dist(block.node(i, j, k), at(i, j, k)) < 1e-13);
                }
            }
        }
    }
}

#[test]
fn near_field_moves_rigidly_and_farfield_boundary_stays() {
    let wm = generate_wing(&WingSpec::default(), &WingResolution::default(), &DomainExtent::default()).unwrap();
    let policy = DeformationPolicy::new(&wm.mesh, wm.near_field.clone()).unwrap();
    let motion = MotionSpec::combined(0.05, 0.45, CombinedPhaseMode::ZeroSideslip, None);
    let chord = WingSpec::default().root_chord;
    for phase in [0.5, 1.0, 2.0, 4.0] {
        let t = rigid_transform_at(&motion, phase, chord).unwrap();
        let moved = deform_mesh(&wm.mesh, &t, &policy).unwrap();
        assert!(moved.interface_mismatch() < 1e-12);
        for (b, (old, new)) in wm.mesh.blocks.iter().zip(&moved.blocks).enumerate() {
            let d = old.dims;
            for k in 0..d[2] {
                for j in 0..d[1] {
                    for i in 0..d[0] {
                        let (p, q) = (old.node(i, j, k), new.node(i, j, k));
                        if wm.near_field[b] {
                            assert!(dist(q, t.apply(p)) < 1e-12);
                        }
                        let on_farfield =
                            Face::ALL.into_iter().any(|f| old.on_face([i, j, k], f) && moved.topology.tag(b, f) == FaceTag::Farfield);
                        if on_farfield {
                            assert_eq!(p, q);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn blend_weights_stay_in_unit_interval() {
    let wm = generate_wing(&WingSpec::default(), &small(), &DomainExtent::default()).unwrap();
    let policy = DeformationPolicy::new(&wm.mesh, wm.near_field.clone()).unwrap();
    let all: Vec<f64> = policy.weights.iter().flatten().copied().collect();
    assert!(all.iter().all(|w| (0.0..=1.0).contains(w)));
    assert!(all.iter().any(|w| *w > 0.0 && *w < 1.0));
}

#[test]
fn deformed_grid_preserves_uniform_flow() {
    for motion in [MotionSpec::combined(0.05, 0.35, CombinedPhaseMode::ZeroSideslip, None), MotionSpec::yaw(0.1, 2f64.to_radians())] {
        let (dev, gcl) = freestream_preservation(&small(), &motion, 16, FaultInjection::None).unwrap();
        assert!(dev < 1e-12, "deviation {dev:e}");
        assert!(gcl < 1e-12, "GCL defect {gcl:e}");
    }
}
