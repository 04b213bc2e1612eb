//! The end-to-end derivative pipeline: grid, steady solution, forced
//! motions, Fourier reduction and report.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::wing::generate_wing;
use crate::derivatives::{reduce, DerivativeReport, MotionSeries};
use crate::error::{Result, StageContext};
use crate::loads::{CoefficientSample, CoefficientSeries};
use crate::mesh::elliptic::{elliptic_smooth, ControlFunctions};
use crate::mesh::io::{read_mesh, write_mesh};
use crate::mesh::laplace::RegionSelector;
use crate::mesh::MultiBlockMesh;
use crate::motion::{MotionKind, MotionSpec};
use crate::solver::{steady_solve, unsteady_run, FlowSetup, MovingMesh, SteadySolution};

pub const MESH_FILE: &str = "mesh.dat";
pub const CONNECTIVITY_FILE: &str = "mesh.conn";
pub const LOG_FILE: &str = "pipeline.log";
pub const REPORT_TEXT: &str = "report.txt";
pub const REPORT_KV: &str = "report.kv";

/// Append-only run log, flushed line by line so that it survives a failed
/// stage.
pub struct RunLog {
    file: Option<File>,
}

impl RunLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(RunLog { file: Some(File::create(path)?) })
    }

    pub fn append(path: &Path) -> Result<Self> {
        Ok(RunLog { file: Some(OpenOptions::new().create(true).append(true).open(path)?) })
    }

    /// A log that discards everything.
    pub fn sink() -> Self {
        RunLog { file: None }
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        log::info!("{text}");
        if let Some(f) = self.file.as_mut() {
            writeln!(f, "{text}")?;
            f.flush()?;
        }
        Ok(())
    }

    /// One line `stage <name> residuals: r0 r1 ...`.
    pub fn history(&mut self, stage: &str, history: &[f64]) -> Result<()> {
        let mut s = format!("stage {stage} residuals:");
        for r in history {
            let _ = write!(s, " {r:.6e}");
        }
        self.line(&s)
    }
}

/// Multi-block grid of a configuration with its near-field flags, before
/// elliptic smoothing.
pub fn build_mesh(cfg: &RunConfig) -> Result<(MultiBlockMesh, Vec<bool>)> {
    match (&cfg.wing, &cfg.mesh) {
        (Some(w), _) => {
            let wm = generate_wing(&w.spec(), &cfg.resolution, &cfg.domain)?;
            Ok((wm.mesh, wm.near_field))
        }
        (None, Some(src)) => {
            let mesh = read_mesh(&src.mesh, &src.connectivity)?;
            let mut near = vec![false; mesh.blocks.len()];
            for &b in &src.near_field {
                *near.get_mut(b).ok_or_else(|| {
                    crate::Error::InvalidInput(format!("near-field block {b} outside the mesh's {} blocks", mesh.blocks.len()))
                })? = true;
            }
            Ok((mesh, near))
        }
        (None, None) => Err(crate::Error::InvalidInput("no geometry in configuration".into())),
    }
}

/// Elliptic smoothing of generated grids, as configured. Grids read from
/// files are used as given.
pub fn smooth_mesh(cfg: &RunConfig, mesh: &mut MultiBlockMesh, log: &mut RunLog) -> Result<()> {
    let s = &cfg.smoothing;
    if cfg.wing.is_none() || !s.elliptic {
        return Ok(());
    }
    let rep = elliptic_smooth(mesh, s.tolerance, s.max_iterations, ControlFunctions::FromInitialGrid, s.relaxation)?;
    log.line(&format!("stage smooth: {} sweeps, converged {}", rep.iterations, rep.converged))?;
    log.history("smooth", &rep.residual_history)
}

/// Flow setup of a configuration on `mesh`.
pub fn flow_setup(cfg: &RunConfig, mesh: MultiBlockMesh, near_field: Vec<bool>) -> Result<FlowSetup> {
    let far: Vec<usize> = (0..mesh.blocks.len()).filter(|&b| !near_field[b]).collect();
    let smoothing = far.iter().map(|&b| RegionSelector::whole_block(&mesh, b)).collect();
    let mut moving = MovingMesh::new(mesh, near_field)?;
    if cfg.smoothing.laplace_iterations > 0 {
        moving.smoothing = smoothing;
        moving.smoothing_iterations = cfg.smoothing.laplace_iterations;
    }
    Ok(FlowSetup { moving, freestream: cfg.freestream.conditions(), reference: cfg.reference_quantities()? })
}

/// Grid and flow setup with the stage log lines of mesh generation and
/// smoothing.
pub fn prepare(cfg: &RunConfig, log: &mut RunLog) -> Result<FlowSetup> {
    let (mut mesh, near) = build_mesh(cfg).stage("genmesh")?;
    log.line(&format!("stage genmesh: {} blocks, {} cells", mesh.blocks.len(), mesh.cell_count()))?;
    smooth_mesh(cfg, &mut mesh, log).stage("smooth")?;
    flow_setup(cfg, mesh, near).stage("setup")
}

pub fn run_steady(setup: &FlowSetup, cfg: &RunConfig, log: &mut RunLog) -> Result<SteadySolution> {
    let sol = steady_solve(setup, &cfg.solver, None).stage("steady")?;
    let c = &sol.coefficients;
    log.line(&format!(
        "stage steady: {} iterations, converged {}, C_L {:.6e} C_D {:.6e} C_Y {:.6e} C_N {:.6e}",
        sol.report.iterations, sol.report.converged, c.cl, c.cd, c.cy, c.cn
    ))?;
    log.history("steady", &sol.report.history)?;
    Ok(sol)
}

/// Name of a motion in stage tags and file names.
pub fn motion_label(m: &MotionSpec) -> String {
    match m.kind {
        MotionKind::LateralTranslation => format!("lateral_{:.3}", m.lateral_amplitude),
        MotionKind::YawRotation => format!("yaw_{:.3}", m.yaw_amplitude().to_degrees()),
        MotionKind::Combined => format!("combined_{:.3}", m.lateral_amplitude),
    }
}

/// One forced-motion run from the steady state; returns the final-cycle
/// series and the full history.
pub fn run_motion(
    setup: &FlowSetup,
    cfg: &RunConfig,
    steady: &SteadySolution,
    motion: &MotionSpec,
    log: &mut RunLog,
) -> Result<(MotionSeries, Vec<CoefficientSample>)> {
    let label = motion_label(motion);
    let mut write_error = None;
    let result = unsteady_run(setup, &steady.q, motion, &cfg.solver, |step| {
        let h = &step.pseudo.history;
        let drop = h.last().copied().unwrap_or(f64::NAN) / h.first().copied().unwrap_or(f64::NAN);
        let line = format!(
            "stage {label} step {}: {} pseudo iterations, residual drop {drop:.3e}, C_Y {:.6e} C_N {:.6e}",
            step.step, step.pseudo.iterations, step.sample.cy, step.sample.cn
        );
        if let Err(e) = log.line(&line) {
            write_error.get_or_insert(e);
        }
    });
    if let Some(e) = write_error {
        return Err(e).stage("output");
    }
    let run = result.stage(&label)?;
    log.line(&format!("stage {label}: GCL defect {:.3e}", run.gcl_defect))?;
    Ok((MotionSeries { motion: *motion, samples: run.final_cycle() }, run.samples))
}

pub fn series_path(dir: &Path, motion: &MotionSpec) -> PathBuf {
    dir.join(format!("series_{}.txt", motion_label(motion)))
}

pub fn history_path(dir: &Path, motion: &MotionSpec) -> PathBuf {
    dir.join(format!("history_{}.txt", motion_label(motion)))
}

/// Final-cycle series and full history of a run, as coefficient tables.
pub fn write_run(dir: &Path, series: &MotionSeries, history: &[CoefficientSample]) -> Result<()> {
    series.to_series().write(&series_path(dir, &series.motion))?;
    let full = CoefficientSeries { metadata: MotionSeries::metadata(&series.motion), samples: history.to_vec() };
    full.write(&history_path(dir, &series.motion))
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: DerivativeReport,
    pub steady: CoefficientSample,
    pub output_dir: PathBuf,
}

/// Grid generation, smoothing, steady solve, the lateral, yaw and combined
/// runs of the protocol, and the derivative report. A failing stage stops
/// the run with its stage name; artifacts already written stay in place.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput> {
    cfg.validate().stage("config")?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).stage("output")?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml()).stage("output")?;
    let mut log = RunLog::create(&dir.join(LOG_FILE)).stage("output")?;

    let setup = prepare(cfg, &mut log)?;
    write_mesh(&setup.moving.reference, &dir.join(MESH_FILE), &dir.join(CONNECTIVITY_FILE)).stage("genmesh")?;
    let steady = run_steady(&setup, cfg, &mut log)?;

    let p = &cfg.protocol;
    let report = if p.is_stationary() {
        log.line("stage reduce: stationary protocol")?;
        DerivativeReport::stationary(p.reduced_frequency, 0.0, steady.coefficients.cn)
    } else {
        let cg = setup.reference.cg;
        let mut lateral = Vec::new();
        let mut combined = Vec::new();
        for m in p.lateral(cg) {
            let (s, h) = run_motion(&setup, cfg, &steady, &m, &mut log)?;
            write_run(&dir, &s, &h).stage(&motion_label(&m))?;
            lateral.push(s);
        }
        let ym = p.yaw(cg);
        let (yaw, h) = run_motion(&setup, cfg, &steady, &ym, &mut log)?;
        write_run(&dir, &yaw, &h).stage(&motion_label(&ym))?;
        for m in p.combined(cg) {
            let (s, h) = run_motion(&setup, cfg, &steady, &m, &mut log)?;
            write_run(&dir, &s, &h).stage(&motion_label(&m))?;
            combined.push(s);
        }
        let r = reduce(&yaw, &lateral, &combined).stage("reduce")?;
        log.line(&format!(
            "stage reduce: C_Nr interpolated {:?}, combined {:?}, relative difference {:?}",
            r.cn_r_interpolated(),
            r.cn_r_combined,
            r.relative_difference()
        ))?;
        r
    };
    report.write(&dir.join(REPORT_TEXT), &dir.join(REPORT_KV)).stage("report")?;
    Ok(PipelineOutput { report, steady: steady.coefficients, output_dir: dir })
}
