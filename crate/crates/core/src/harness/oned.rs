//! One-dimensional verification problems run through the three-dimensional
//! solver on a single block of `cells x 1 x 1` cells with slip side walls.

use super::riemann::{exact_riemann, State1d};
use crate::error::Result;
use crate::mesh::metrics::{static_metrics, FaceGeometry};
use crate::mesh::{cartesian_block, FaceTag, MultiBlockMesh};
use crate::solver::residual::{FaceData, FaultInjection, ResidualSettings, Workspace};
use crate::solver::state::{conservative_from_primitive, try_primitive, Conservative, Primitive};
use crate::solver::time::{dual_time_step, PseudoProblem, SolverSettings};
use crate::solver::Limiter;

/// A tube on `[0, length]` discretized by `cells` cells. The ends are
/// walls, or characteristic boundaries against `farfield` when one is given.
pub struct Tube {
    pub table: FaceGeometry,
    pub faces: FaceData,
    pub volume: Vec<f64>,
    pub centers: Vec<f64>,
    pub farfield: Primitive,
}

impl Tube {
    pub fn new(length: f64, cells: usize, farfield: Option<Primitive>) -> Result<Self> {
        let h = length / cells as f64;
        let mut mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [length, h, h], [cells, 1, 1]), FaceTag::Wall)?;
        if farfield.is_some() {
            mesh.topology.tags[0][0] = FaceTag::Farfield;
            mesh.topology.tags[0][1] = FaceTag::Farfield;
        }
        let table = FaceGeometry::build(&mesh)?;
        let m = static_metrics(&table, &mesh)?;
        let centers = (0..cells).map(|i| (i as f64 + 0.5) * h).collect();
        let farfield = farfield.unwrap_or([1.0, 0.0, 0.0, 0.0, 1.0]);
        Ok(Tube { faces: FaceData::fixed(&m), volume: m.volume, table, centers, farfield })
    }

    /// Advance `q` over `steps` dual-time steps of size `dt`.
    pub fn advance(&self, q: Vec<Conservative>, dt: f64, steps: usize, settings: &SolverSettings, gamma: f64) -> Result<Vec<Conservative>> {
        let problem = PseudoProblem {
            table: &self.table,
            faces: &self.faces,
            volume: &self.volume,
            settings: ResidualSettings { gamma, limiter: settings.limiter, farfield: self.farfield, fault: settings.fault },
        };
        let mut ws = Workspace::default();
        let mut prev: Option<Vec<Conservative>> = None;
        let mut cur = q;
        for _ in 0..steps {
            let p = prev.as_ref().map(|p| (p.as_slice(), self.volume.as_slice()));
            let (next, _) = dual_time_step(&problem, (&cur, &self.volume), p, dt, settings, &mut ws)?;
            prev = Some(std::mem::replace(&mut cur, next));
        }
        Ok(cur)
    }
}

#[derive(Debug, Clone)]
pub struct ShockTubeResult {
    pub cells: usize,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub exact_density: Vec<f64>,
    pub l1_error: f64,
}

pub const SOD_LEFT: State1d = State1d { rho: 1.0, u: 0.0, p: 1.0 };
pub const SOD_RIGHT: State1d = State1d { rho: 0.125, u: 0.0, p: 0.1 };

/// Sod problem on `[0, 1]` with the diaphragm at 0.5, run to t = 0.2 with
/// a physical CFL number of about 0.5.
pub fn shock_tube(cells: usize, limiter: Limiter, fault: FaultInjection) -> Result<ShockTubeResult> {
    let gamma = 1.4;
    let tube = Tube::new(1.0, cells, None)?;
    let prim = |s: &State1d| -> Primitive { [s.rho, s.u, 0.0, 0.0, s.p] };
    let q: Vec<Conservative> = tube
        .centers
        .iter()
        .map(|&x| conservative_from_primitive(&prim(if x < 0.5 { &SOD_LEFT } else { &SOD_RIGHT }), gamma))
        .collect();
    let t_end = 0.2;
    let dx = 1.0 / cells as f64;
    let steps = (t_end / (0.5 * dx / 2.0)).ceil() as usize;
    let settings = SolverSettings {
        limiter,
        fault,
        pseudo_tolerance: 1e-6,
        max_pseudo_iterations: 400,
        ..Default::default()
    };
    let q = tube.advance(q, t_end / steps as f64, steps, &settings, gamma)?;
    let mut l1 = 0.0;
    let mut density = Vec::with_capacity(cells);
    let mut exact_density = Vec::with_capacity(cells);
    for (s, &x) in q.iter().zip(&tube.centers) {
        let e = exact_riemann(&SOD_LEFT, &SOD_RIGHT, gamma, (x - 0.5) / t_end)?;
        let rho = try_primitive(s, gamma).map(|w| w[0]).unwrap_or(f64::NAN);
        l1 += (rho - e.rho).abs() * dx;
        density.push(rho);
        exact_density.push(e.rho);
    }
    Ok(ShockTubeResult { cells, x: tube.centers, density, exact_density, l1_error: l1 })
}

/// Base flow of the acoustic problem: Mach 0.5 with unit sound speed.
pub fn acoustic_base(gamma: f64) -> Primitive {
    [1.0, 0.5, 0.0, 0.0, 1.0 / gamma]
}

/// Right-running acoustic pulse of relative amplitude `eps` in the base
/// flow, centred at x = 1.5 on a tube of length 5.
pub fn acoustic_pulse_initial(tube: &Tube, eps: f64, gamma: f64) -> Vec<Conservative> {
    let [rho0, u0, _, _, p0] = acoustic_base(gamma);
    tube.centers
        .iter()
        .map(|&x| {
            let dp = eps * p0 * (-((x - 1.5) / 0.3f64).powi(2)).exp();
            conservative_from_primitive(&[rho0 + dp, u0 + dp / rho0, 0.0, 0.0, p0 + dp], gamma)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct TemporalStudy {
    /// Step counts of the compared runs, coarsest first.
    pub steps: Vec<usize>,
    /// L2 difference of each run from the finest reference run.
    pub errors: Vec<f64>,
    /// Observed orders between successive runs.
    pub orders: Vec<f64>,
}

/// Self-convergence of dual time stepping on the acoustic pulse: runs with
/// `base_steps`, twice and four times as many steps, compared against a
/// reference with eight times as many.
pub fn temporal_order_study(cells: usize, base_steps: usize, t_end: f64, limiter: Limiter) -> Result<TemporalStudy> {
    let gamma = 1.4;
    let tube = Tube::new(5.0, cells, Some(acoustic_base(gamma)))?;
    let q0 = acoustic_pulse_initial(&tube, 1e-3, gamma);
    let settings = SolverSettings { limiter, pseudo_tolerance: 1e-11, max_pseudo_iterations: 5000, ..Default::default() };
    let run = |steps: usize| tube.advance(q0.clone(), t_end / steps as f64, steps, &settings, gamma);
    let reference = run(8 * base_steps)?;
    let steps: Vec<usize> = vec![base_steps, 2 * base_steps, 4 * base_steps];
    let mut errors = Vec::new();
    for &s in &steps {
        let q = run(s)?;
        let e: f64 = q.iter().zip(&reference).map(|(a, b)| (a[0] - b[0]).powi(2)).sum::<f64>() / q.len() as f64;
        errors.push(e.sqrt());
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(TemporalStudy { steps, errors, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_tube_stays_uniform() {
        let tube = Tube::new(1.0, 20, None).unwrap();
        let q = vec![conservative_from_primitive(&[1.0, 0.0, 0.0, 0.0, 1.0], 1.4); 20];
        let out = tube.advance(q.clone(), 0.01, 5, &SolverSettings::default(), 1.4).unwrap();
        for (a, b) in out.iter().zip(&q) {
            for v in 0..5 {
                assert!((a[v] - b[v]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coarse_shock_tube_is_close() {
        let r = shock_tube(50, Limiter::VanAlbada, FaultInjection::None).unwrap();
        assert!(r.l1_error < 0.05, "{}", r.l1_error);
    }
}
