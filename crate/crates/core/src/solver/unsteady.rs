//! Steady solve and the unsteady forced-motion loop: move the mesh, smooth,
//! compute metrics, dual-time solve, integrate loads, advance the phase.

use std::f64::consts::PI;

use super::flux::wall_pressure;
use super::multigrid::{iterate_multigrid, Hierarchy, LevelStack};
use super::residual::{primitives, FaceData, ResidualSettings};
use super::state::{Conservative, FreestreamConditions};
use super::time::{PseudoProblem, PseudoReport, SolverSettings, UnsteadyResidualTerms};
use crate::error::{Error, Result};
use crate::geom::{scale, Vec3};
use crate::loads::{coefficients, integrate_panels, CoefficientSample, ReferenceQuantities, WallPanel};
use crate::mesh::FaceTag;
use crate::mesh::laplace::{smooth_displacement, RegionSelector};
use crate::mesh::metrics::{compute_metrics, static_metrics, FaceGeometry, MeshMetrics};
use crate::mesh::{deform_mesh, DeformationPolicy, MultiBlockMesh, RigidTransform};
use crate::motion::{rigid_transform_at, MotionSpec};

/// Reference mesh, its deformation policy and face table.
#[derive(Debug, Clone)]
pub struct MovingMesh {
    pub reference: MultiBlockMesh,
    pub policy: DeformationPolicy,
    pub table: FaceGeometry,
    /// Regions whose displacement is Laplace-smoothed after every move.
    pub smoothing: Vec<RegionSelector>,
    pub smoothing_iterations: usize,
    /// Coarse grids available to the multigrid cycle.
    pub multigrid: Hierarchy,
}

/// Deepest hierarchy built for a moving mesh.
const MAX_MULTIGRID_LEVELS: usize = 4;

impl MovingMesh {
    pub fn new(reference: MultiBlockMesh, near_field: Vec<bool>) -> Result<Self> {
        let policy = DeformationPolicy::new(&reference, near_field)?;
        let table = FaceGeometry::build(&reference)?;
        let multigrid = Hierarchy::build(&reference, &table, MAX_MULTIGRID_LEVELS)?;
        Ok(MovingMesh { reference, policy, table, smoothing: Vec::new(), smoothing_iterations: 0, multigrid })
    }

    /// Same motion with every wall replaced by a characteristic freestream
    /// boundary, leaving a body-free flow problem on the moving grid.
    pub fn with_transparent_walls(mut self) -> Result<Self> {
        for tags in self.reference.topology.tags.iter_mut() {
            for t in tags.iter_mut() {
                if *t == FaceTag::Wall {
                    *t = FaceTag::Farfield;
                }
            }
        }
        self.table = FaceGeometry::build(&self.reference)?;
        self.multigrid = Hierarchy::build(&self.reference, &self.table, MAX_MULTIGRID_LEVELS)?;
        Ok(self)
    }

    pub fn mesh_at(&self, transform: &RigidTransform) -> Result<MultiBlockMesh> {
        let mut mesh = deform_mesh(&self.reference, transform, &self.policy)?;
        if !self.smoothing.is_empty() && self.smoothing_iterations > 0 && !transform.is_identity() {
            smooth_displacement(&mut mesh, &self.reference, &self.smoothing, self.smoothing_iterations)?;
        }
        Ok(mesh)
    }
}

/// Mesh, flow conditions and load references of one configuration.
#[derive(Debug, Clone)]
pub struct FlowSetup {
    pub moving: MovingMesh,
    pub freestream: FreestreamConditions,
    pub reference: ReferenceQuantities,
}

impl FlowSetup {
    pub fn residual_settings(&self, settings: &SolverSettings) -> ResidualSettings {
        ResidualSettings {
            gamma: self.freestream.gamma,
            limiter: settings.limiter,
            farfield: self.freestream.primitive(),
            fault: settings.fault,
        }
    }

    pub fn freestream_state(&self) -> Vec<Conservative> {
        vec![self.freestream.conservative(); self.moving.table.cell_count()]
    }

    /// Wall pressure panels of state `q` on `mesh`.
    pub fn wall_panels(&self, mesh: &MultiBlockMesh, metrics: &MeshMetrics, faces: &FaceData, q: &[Conservative]) -> Result<Vec<WallPanel>> {
        let t = &self.moving.table;
        let pos = t.positions(mesh)?;
        let gamma = self.freestream.gamma;
        let mut w = Vec::new();
        primitives(q, gamma, &mut w)?;
        Ok(t.wall_faces
            .iter()
            .map(|&f| {
                let n = faces.normal[f];
                WallPanel {
                    center: t.face_center(&pos, f),
                    normal: scale(n, -1.0),
                    area: crate::geom::norm(metrics.area[f]),
                    pressure: wall_pressure(&w[t.faces[f].left], n, faces.speed[f], gamma) - self.freestream.pressure,
                }
            })
            .collect())
    }

    /// Body-axis coefficients of state `q`; zero when the mesh has no walls.
    pub fn sample(
        &self,
        mesh: &MultiBlockMesh,
        metrics: &MeshMetrics,
        faces: &FaceData,
        q: &[Conservative],
        transform: &RigidTransform,
        ktau: f64,
    ) -> Result<CoefficientSample> {
        if self.moving.table.wall_faces.is_empty() {
            return Ok(CoefficientSample { ktau, ..Default::default() });
        }
        let panels = self.wall_panels(mesh, metrics, faces, q)?;
        let cg: Vec3 = transform.apply(self.reference.cg);
        let loads = integrate_panels(&panels, cg)?;
        Ok(coefficients(&loads, &self.reference, transform.yaw, ktau))
    }

    /// Physical time step (s) for `steps` steps per motion period.
    pub fn time_step(&self, motion: &MotionSpec, steps: usize) -> f64 {
        2.0 * PI / motion.reduced_frequency / steps as f64 * self.reference.chord / self.freestream.speed()
    }
}

#[derive(Debug, Clone)]
pub struct SteadySolution {
    pub q: Vec<Conservative>,
    pub report: PseudoReport,
    pub coefficients: CoefficientSample,
}

/// Coarse meshes and their metrics at one time level.
struct CoarseGeometry {
    meshes: Vec<MultiBlockMesh>,
    metrics: Vec<MeshMetrics>,
}

impl MovingMesh {
    /// Coarse levels used with `settings`.
    fn coarse_count(&self, settings: &SolverSettings) -> usize {
        settings.multigrid_levels.min(self.multigrid.depth()) - 1
    }

    fn static_coarse(&self, mesh: &MultiBlockMesh, count: usize) -> Result<CoarseGeometry> {
        let meshes = self.multigrid.meshes(mesh, count);
        let metrics = meshes.iter().zip(&self.multigrid.levels).map(|(m, l)| static_metrics(&l.table, m)).collect::<Result<_>>()?;
        Ok(CoarseGeometry { meshes, metrics })
    }

    fn moving_coarse(&self, previous: &CoarseGeometry, mesh: &MultiBlockMesh, dt: f64) -> Result<CoarseGeometry> {
        let meshes = self.multigrid.meshes(mesh, previous.meshes.len());
        let metrics = meshes
            .iter()
            .zip(&previous.meshes)
            .zip(&self.multigrid.levels)
            .map(|((m, p), l)| compute_metrics(&l.table, p, m, dt))
            .collect::<Result<_>>()?;
        Ok(CoarseGeometry { meshes, metrics })
    }

    fn stack<'a>(&'a self, fine: PseudoProblem<'a>, faces: &'a [FaceData], metrics: &'a [MeshMetrics]) -> LevelStack<'a> {
        let settings = fine.settings;
        let mut ops = vec![fine];
        let mut parents = Vec::new();
        for ((lvl, fd), m) in self.multigrid.levels.iter().zip(faces).zip(metrics) {
            ops.push(PseudoProblem { table: &lvl.table, faces: fd, volume: &m.volume, settings });
            parents.push(lvl.parent.as_slice());
        }
        LevelStack { ops, parents }
    }
}

/// Pseudo-time march of the steady problem on the reference mesh.
pub fn steady_solve(setup: &FlowSetup, settings: &SolverSettings, initial: Option<Vec<Conservative>>) -> Result<SteadySolution> {
    settings.validate()?;
    setup.freestream.validate()?;
    let mm = &setup.moving;
    let mesh = &mm.reference;
    let t = &mm.table;
    let metrics = static_metrics(t, mesh)?;
    let faces = FaceData::fixed(&metrics);
    let mut q = initial.unwrap_or_else(|| setup.freestream_state());
    if q.len() != t.cell_count() {
        return Err(Error::TopologyMismatch("initial state does not match the mesh".into()));
    }
    let coarse = mm.static_coarse(mesh, mm.coarse_count(settings))?;
    let coarse_faces: Vec<FaceData> = coarse.metrics.iter().map(FaceData::fixed).collect();
    let problem = PseudoProblem { table: t, faces: &faces, volume: &metrics.volume, settings: setup.residual_settings(settings) };
    let stack = mm.stack(problem, &coarse_faces, &coarse.metrics);
    let report = iterate_multigrid(&mut q, &stack, None, settings, settings.steady_tolerance, settings.max_steady_iterations)?;
    if !report.converged {
        log::warn!(
            "steady solve stalled after {} iterations at relative residual {:e}",
            report.iterations,
            report.history.last().unwrap_or(&f64::NAN) / report.history[0]
        );
    }
    let coefficients = setup.sample(mesh, &metrics, &faces, &q, &RigidTransform::identity(), 0.0)?;
    Ok(SteadySolution { q, report, coefficients })
}

/// Progress of one physical step, handed to the observer of
/// [`unsteady_run`].
#[derive(Debug, Clone)]
pub struct StepReport {
    pub step: usize,
    pub sample: CoefficientSample,
    pub pseudo: PseudoReport,
}

#[derive(Debug, Clone)]
pub struct UnsteadyRun {
    /// One sample per time level, from the start state on; `ktau` runs
    /// continuously over all cycles.
    pub samples: Vec<CoefficientSample>,
    pub q: Vec<Conservative>,
    pub pseudo_iterations: Vec<usize>,
    /// Largest relative GCL defect met during the run.
    pub gcl_defect: f64,
    pub steps_per_cycle: usize,
}

impl UnsteadyRun {
    /// Samples of the last cycle with `ktau` reduced to `[0, 2 pi)`.
    pub fn final_cycle(&self) -> Vec<CoefficientSample> {
        let n = self.steps_per_cycle;
        let start = self.samples.len() - 1 - n;
        self.samples[start..start + n]
            .iter()
            .enumerate()
            .map(|(j, s)| CoefficientSample { ktau: 2.0 * PI * j as f64 / n as f64, ..*s })
            .collect()
    }
}

/// Mesh, metrics and state of one time level.
struct Level {
    mesh: MultiBlockMesh,
    metrics: MeshMetrics,
    coarse: CoarseGeometry,
    q: Vec<Conservative>,
}

/// Forced-motion run from `initial` (normally the steady solution).
/// `observer` sees every step as it completes, so a caller can keep the
/// partial history of a run that later fails.
pub fn unsteady_run(
    setup: &FlowSetup,
    initial: &[Conservative],
    motion: &MotionSpec,
    settings: &SolverSettings,
    mut observer: impl FnMut(&StepReport),
) -> Result<UnsteadyRun> {
    settings.validate()?;
    motion.validate()?;
    setup.freestream.validate()?;
    let mm = &setup.moving;
    let t = &mm.table;
    if initial.len() != t.cell_count() {
        return Err(Error::TopologyMismatch("initial state does not match the mesh".into()));
    }
    let n = settings.steps_per_cycle;
    let dt = setup.time_step(motion, n);
    let c_ref = setup.reference.chord;
    let phase_of = |m: usize| 2.0 * PI * (m % n) as f64 / n as f64;
    let rsettings = setup.residual_settings(settings);

    let tr0 = rigid_transform_at(motion, phase_of(0), c_ref)?;
    let mesh0 = mm.mesh_at(&tr0)?;
    let metrics0 = static_metrics(t, &mesh0)?;
    let faces0 = FaceData::fixed(&metrics0);
    let coarse0 = mm.static_coarse(&mesh0, mm.coarse_count(settings))?;
    let mut samples = vec![setup.sample(&mesh0, &metrics0, &faces0, initial, &tr0, 0.0)?];
    let mut current = Level { mesh: mesh0, metrics: metrics0, coarse: coarse0, q: initial.to_vec() };
    let mut previous: Option<Level> = None;
    let mut pseudo_iterations = Vec::new();
    let mut gcl_defect: f64 = 0.0;

    for m in 1..=n * settings.cycles {
        let tr = rigid_transform_at(motion, phase_of(m), c_ref)?;
        let mesh = mm.mesh_at(&tr)?;
        let metrics = compute_metrics(t, &current.mesh, &mesh, dt)?;
        gcl_defect = gcl_defect.max(metrics.gcl_defect(t, &current.metrics));
        let coarse = mm.moving_coarse(&current.coarse, &mesh, dt)?;
        let has_previous = previous.is_some();
        let faces = FaceData::moving(&metrics, has_previous.then_some(&current.metrics));
        let coarse_faces: Vec<FaceData> = coarse
            .metrics
            .iter()
            .zip(&current.coarse.metrics)
            .map(|(c, p)| FaceData::moving(c, has_previous.then_some(p)))
            .collect();
        let problem = PseudoProblem { table: t, faces: &faces, volume: &metrics.volume, settings: rsettings };
        let stack = mm.stack(problem, &coarse_faces, &coarse.metrics);
        let prev_level = previous.as_ref().map(|p| (p.q.as_slice(), p.metrics.volume.as_slice()));
        let terms = UnsteadyResidualTerms::new(dt, (&current.q, &current.metrics.volume), prev_level);
        let mut q = current.q.clone();
        let pseudo = iterate_multigrid(&mut q, &stack, Some(&terms), settings, settings.pseudo_tolerance, settings.max_pseudo_iterations)?;
        if !pseudo.converged {
            log::warn!(
                "step {m}: pseudo iteration stopped after {} iterations at relative residual {:e}",
                pseudo.iterations,
                pseudo.history.last().unwrap_or(&f64::NAN) / pseudo.history[0]
            );
        }
        let sample = setup.sample(&mesh, &metrics, &faces, &q, &tr, 2.0 * PI * m as f64 / n as f64)?;
        pseudo_iterations.push(pseudo.iterations);
        observer(&StepReport { step: m, sample, pseudo });
        samples.push(sample);
        previous = Some(std::mem::replace(&mut current, Level { mesh, metrics, coarse, q }));
    }
    Ok(UnsteadyRun { samples, q: current.q, pseudo_iterations, gcl_defect, steps_per_cycle: n })
}
