use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use yawstab::derivatives::{reduce_series, MotionSeries};
use yawstab::harness::config::RunConfig;
use yawstab::harness::pipeline::{
    build_mesh, prepare, run_motion, run_pipeline, run_steady, write_run, RunLog, CONNECTIVITY_FILE, LOG_FILE, MESH_FILE,
    REPORT_KV, REPORT_TEXT,
};
use yawstab::harness::verify::{verify, Suite};
use yawstab::loads::CoefficientSeries;
use yawstab::mesh::elliptic::{elliptic_smooth, ControlFunctions, DEFAULT_RELAXATION};
use yawstab::mesh::io::{read_mesh, write_mesh};
use yawstab::solver::FaultInjection;

/// Dynamic yaw stability derivatives from forced-motion Euler simulations.
#[derive(Parser)]
#[command(name = "yawstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the multi-block grid of a configuration.
    Genmesh { config: PathBuf },
    /// Elliptic smoothing of a mesh file, in place unless --output is given.
    Smooth {
        mesh: PathBuf,
        /// Connectivity file; defaults to the mesh path with a .conn extension.
        #[arg(long)]
        connectivity: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        #[arg(long, default_value_t = DEFAULT_RELAXATION)]
        relaxation: f64,
    },
    /// Steady solution on the configured grid.
    Steady { config: PathBuf },
    /// Forced-motion runs of the configured protocol.
    Oscillate {
        config: PathBuf,
        #[arg(long, value_enum)]
        motion: MotionArg,
        /// Single lateral amplitude (chords) instead of the protocol list.
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Derivative report from series files.
    Derive {
        #[arg(required = true)]
        series: Vec<PathBuf>,
        /// Directory for the report files; printed only when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full pipeline of a configuration.
    Run { config: PathBuf },
    /// Verification suites: gcl, shocktube, fourier, tables, or all.
    Verify {
        suite: Option<String>,
        /// Reverse the interface flux dissipation (negative control).
        #[arg(long, hide = true)]
        inject_flux_fault: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MotionArg {
    Lateral,
    Yaw,
    Combined,
}

fn load(config: &Path) -> Result<RunConfig> {
    RunConfig::read(config).with_context(|| format!("reading {}", config.display()))
}

fn output_log(cfg: &RunConfig) -> Result<RunLog> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(RunLog::append(&cfg.output_dir.join(LOG_FILE))?)
}

fn genmesh(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    let (mesh, _) = build_mesh(&cfg)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let (m, c) = (cfg.output_dir.join(MESH_FILE), cfg.output_dir.join(CONNECTIVITY_FILE));
    write_mesh(&mesh, &m, &c)?;
    println!("{} blocks, {} cells -> {}", mesh.blocks.len(), mesh.cell_count(), m.display());
    Ok(())
}

fn smooth(
    mesh_path: &Path,
    connectivity: Option<PathBuf>,
    output: Option<PathBuf>,
    tolerance: f64,
    max_iterations: usize,
    relaxation: f64,
) -> Result<()> {
    let conn = connectivity.unwrap_or_else(|| mesh_path.with_extension("conn"));
    let mut mesh = read_mesh(mesh_path, &conn).with_context(|| format!("reading {}", mesh_path.display()))?;
    let rep = elliptic_smooth(&mut mesh, tolerance, max_iterations, ControlFunctions::FromInitialGrid, relaxation)?;
    let out = output.unwrap_or_else(|| mesh_path.to_path_buf());
    write_mesh(&mesh, &out, &out.with_extension("conn"))?;
    println!(
        "{} sweeps, converged {}, last residual {:.3e} -> {}",
        rep.iterations,
        rep.converged,
        rep.residual_history.last().copied().unwrap_or(0.0),
        out.display()
    );
    Ok(())
}

fn steady(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    let mut log = output_log(&cfg)?;
    let setup = prepare(&cfg, &mut log)?;
    let sol = run_steady(&setup, &cfg, &mut log)?;
    let c = &sol.coefficients;
    let text = format!(
        "converged={}\niterations={}\nC_L={:.10e}\nC_D={:.10e}\nC_Y={:.10e}\nC_N={:.10e}\nC_l={:.10e}\nC_m={:.10e}\n",
        sol.report.converged, sol.report.iterations, c.cl, c.cd, c.cy, c.cn, c.croll, c.cm
    );
    std::fs::write(cfg.output_dir.join("steady.kv"), &text)?;
    print!("{text}");
    Ok(())
}

fn oscillate(config: &Path, motion: MotionArg, amplitude: Option<f64>) -> Result<()> {
    let mut cfg = load(config)?;
    if let Some(a) = amplitude {
        cfg.protocol.lateral_amplitudes = vec![a];
    }
    let mut log = output_log(&cfg)?;
    let setup = prepare(&cfg, &mut log)?;
    let cg = setup.reference.cg;
    let motions = match motion {
        MotionArg::Lateral => cfg.protocol.lateral(cg),
        MotionArg::Yaw => vec![cfg.protocol.yaw(cg)],
        MotionArg::Combined => {
            cfg.protocol.combined = true;
            cfg.protocol.combined(cg)
        }
    };
    let sol = run_steady(&setup, &cfg, &mut log)?;
    for m in &motions {
        let (series, history) = run_motion(&setup, &cfg, &sol, m, &mut log)?;
        write_run(&cfg.output_dir, &series, &history)?;
        println!("{}", yawstab::harness::pipeline::series_path(&cfg.output_dir, m).display());
    }
    Ok(())
}

fn derive(files: &[PathBuf], output: Option<PathBuf>) -> Result<()> {
    let series = files
        .iter()
        .map(|p| {
            CoefficientSeries::read(p)
                .and_then(|s| MotionSeries::from_series(&s))
                .with_context(|| format!("reading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = reduce_series(&series)?;
    print!("{}", report.to_text());
    if let Some(dir) = output {
        std::fs::create_dir_all(&dir)?;
        report.write(&dir.join(REPORT_TEXT), &dir.join(REPORT_KV))?;
    }
    Ok(())
}

fn run(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    let out = run_pipeline(&cfg)?;
    print!("{}", out.report.to_text());
    Ok(())
}

fn run_verify(suite: Option<String>, fault: bool) -> Result<bool> {
    let suites = match suite.as_deref() {
        None | Some("all") => Suite::ALL.to_vec(),
        Some(name) => vec![Suite::parse(name)?],
    };
    let fault = if fault { FaultInjection::FluxSign } else { FaultInjection::None };
    let report = verify(&suites, fault);
    eprint!("{}", report.to_text());
    print!("{}", report.to_key_value());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = yawstab::init_threads_from_env().map_err(anyhow::Error::from).and_then(|_| match cli.command {
        Command::Genmesh { config } => genmesh(&config).map(|_| true),
        Command::Smooth { mesh, connectivity, output, tolerance, max_iterations, relaxation } => {
            smooth(&mesh, connectivity, output, tolerance, max_iterations, relaxation).map(|_| true)
        }
        Command::Steady { config } => steady(&config).map(|_| true),
        Command::Oscillate { config, motion, amplitude } => oscillate(&config, motion, amplitude).map(|_| true),
        Command::Derive { series, output } => derive(&series, output).map(|_| true),
        Command::Run { config } => run(&config).map(|_| true),
        Command::Verify { suite, inject_flux_fault } => run_verify(suite, inject_flux_fault),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
