//! Runge-Kutta pseudo-time iteration and BDF2 dual time stepping.

use serde::{Deserialize, Serialize};

use super::muscl::Limiter;
use super::residual::{primitives, residual_from_primitives, spectral_radii, FaceData, FaultInjection, ResidualSettings, Workspace};
use super::state::Conservative;
use crate::error::{Error, Result};
use crate::mesh::metrics::{FaceGeometry, FaceSide};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub cfl: f64,
    /// Implicit residual smoothing coefficient; 0 disables smoothing.
    pub residual_smoothing: f64,
    /// Stage coefficients of the multistage scheme.
    pub rk_coefficients: Vec<f64>,
    /// Grid levels of the multigrid cycle, the fine grid included; levels
    /// the mesh cannot be coarsened to are dropped.
    pub multigrid_levels: usize,
    /// Implicit smoothing coefficient of the prolongated coarse-grid
    /// corrections.
    pub correction_smoothing: f64,
    /// Pseudo-residual drop, relative to the first pseudo iterate of a step.
    pub pseudo_tolerance: f64,
    pub max_pseudo_iterations: usize,
    pub steps_per_cycle: usize,
    pub cycles: usize,
    pub limiter: Limiter,
    /// Residual drop required of the steady solve.
    pub steady_tolerance: f64,
    pub max_steady_iterations: usize,
    pub fault: FaultInjection,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            cfl: 1.2,
            residual_smoothing: 0.0,
            rk_coefficients: vec![1.0 / 3.0, 0.5, 1.0],
            multigrid_levels: 3,
            correction_smoothing: 1.0,
            pseudo_tolerance: 1e-4,
            max_pseudo_iterations: 200,
            steps_per_cycle: 64,
            cycles: 3,
            limiter: Limiter::VanAlbada,
            steady_tolerance: 1e-8,
            max_steady_iterations: 20_000,
            fault: FaultInjection::None,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(format!("solver settings: {m}")));
        if !(self.cfl > 0.0) {
            return bad("cfl must be positive");
        }
        if !(self.residual_smoothing >= 0.0) || !(self.correction_smoothing >= 0.0) {
            return bad("smoothing coefficients must be non-negative");
        }
        if self.rk_coefficients.is_empty() || self.rk_coefficients.iter().any(|a| !(*a > 0.0)) {
            return bad("stage coefficients must be positive");
        }
        if self.multigrid_levels < 1 {
            return bad("at least one multigrid level is required");
        }
        if !(self.pseudo_tolerance > 0.0) || !(self.steady_tolerance > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.steps_per_cycle < 16 {
            return bad("at least 16 steps per cycle are required");
        }
        if self.cycles < 1 {
            return bad("at least one cycle is required");
        }
        if self.max_pseudo_iterations < 1 {
            return bad("at least one pseudo iteration is required");
        }
        Ok(())
    }
}

/// Frozen terms of the pseudo-time problem of one physical step:
/// `R* = R(Q) + (a / dt) vol Q - S*`.
#[derive(Debug, Clone)]
pub struct UnsteadyResidualTerms {
    pub dt: f64,
    /// 3/2 for BDF2, 1 for the implicit Euler start.
    pub a: f64,
    /// `S*`, built from levels n and n-1 only.
    pub source: Vec<Conservative>,
}

impl UnsteadyResidualTerms {
    /// BDF2 terms, or implicit Euler when `previous` is absent. Levels are
    /// `(state, cell volumes)`.
    pub fn new(dt: f64, current: (&[Conservative], &[f64]), previous: Option<(&[Conservative], &[f64])>) -> Self {
        let (qn, vn) = current;
        match previous {
            Some((qm, vm)) => {
                let source = qn
                    .iter()
                    .zip(vn)
                    .zip(qm.iter().zip(vm))
                    .map(|((q0, v0), (q1, v1))| {
                        let mut s = [0.0; 5];
                        for c in 0..5 {
                            s[c] = (4.0 * v0 * q0[c] - v1 * q1[c]) / (2.0 * dt);
                        }
                        s
                    })
                    .collect();
                UnsteadyResidualTerms { dt, a: 1.5, source }
            }
            None => {
                let source = qn.iter().zip(vn).map(|(q, v)| q.map(|x| v * x / dt)).collect();
                UnsteadyResidualTerms { dt, a: 1.0, source }
            }
        }
    }
}

/// Spatial operator of the pseudo-time problem: cell volumes, the residual
/// `R(Q)` and the local spectral radii that set the pseudo time steps.
pub trait SpatialOperator {
    fn volume(&self) -> &[f64];
    /// Write `R(Q)` to `ws.residual`; when `radii` is given, also fill it
    /// with the per-cell sum of face wave speeds times areas.
    fn evaluate(&self, q: &[Conservative], ws: &mut Workspace, radii: Option<&mut Vec<f64>>) -> Result<()>;

    /// Replace the cell updates `d` by their implicitly smoothed values,
    /// `(1 + eps n) d_s - eps sum d_s(nb) = d`, approximately. Operators
    /// without a neighbour structure leave `d` unchanged.
    fn smooth(&self, _d: &mut [Conservative], _eps: f64) {}
}

/// Finite-volume Euler operator on one time level.
pub struct PseudoProblem<'a> {
    pub table: &'a FaceGeometry,
    pub faces: &'a FaceData,
    pub volume: &'a [f64],
    pub settings: ResidualSettings,
}

impl SpatialOperator for PseudoProblem<'_> {
    fn volume(&self) -> &[f64] {
        self.volume
    }

    fn evaluate(&self, q: &[Conservative], ws: &mut Workspace, radii: Option<&mut Vec<f64>>) -> Result<()> {
        primitives(q, self.settings.gamma, &mut ws.w)?;
        residual_from_primitives(self.table, self.faces, &self.settings, ws);
        if let Some(out) = radii {
            *out = spectral_radii(self.table, self.faces, &ws.w, self.settings.gamma);
        }
        Ok(())
    }

    fn smooth(&self, d: &mut [Conservative], eps: f64) {
        let n = d.len();
        let source = d.to_vec();
        let mut sum = vec![[0.0; 5]; n];
        let mut count = vec![0.0; n];
        for sweep in 0..SMOOTHING_SWEEPS {
            sum.iter_mut().for_each(|s| *s = [0.0; 5]);
            for rec in &self.table.faces {
                if let FaceSide::Cell(r) = rec.right {
                    let l = rec.left;
                    for v in 0..5 {
                        sum[l][v] += d[r][v];
                        sum[r][v] += d[l][v];
                    }
                    if sweep == 0 {
                        count[l] += 1.0;
                        count[r] += 1.0;
                    }
                }
            }
            for c in 0..n {
                let w = 1.0 / (1.0 + eps * count[c]);
                for v in 0..5 {
                    d[c][v] = (source[c][v] + eps * sum[c][v]) * w;
                }
            }
        }
    }
}

/// Jacobi sweeps of the residual smoothing system.
const SMOOTHING_SWEEPS: usize = 2;

/// One multistage pseudo-time step of `vol dQ/dt* = -R*(Q)` with local
/// pseudo time steps. The `(a / dt) vol Q` term is treated point-implicitly
/// at every stage.
pub fn pseudo_advance(
    q: &mut [Conservative],
    op: &impl SpatialOperator,
    terms: Option<&UnsteadyResidualTerms>,
    settings: &SolverSettings,
    ws: &mut Workspace,
) -> Result<PseudoNorms> {
    let vol = op.volume();
    let q0: Vec<Conservative> = q.to_vec();
    let implicit = terms.map(|t| t.a / t.dt).unwrap_or(0.0);
    let source = |c: usize, v: usize| terms.map(|t| t.source[c][v]).unwrap_or(0.0);
    let mut norms = PseudoNorms::default();
    let mut dts: Vec<f64> = Vec::new();
    for (stage, &alpha) in settings.rk_coefficients.iter().enumerate() {
        if stage == 0 {
            let mut radii = Vec::new();
            op.evaluate(q, ws, Some(&mut radii))?;
            dts = radii.iter().zip(vol).map(|(l, v)| 2.0 * settings.cfl * v / l).collect();
            let sum: f64 = (0..q.len())
                .map(|c| ((ws.residual[c][0] + implicit * vol[c] * q[c][0] - source(c, 0)) / vol[c]).powi(2))
                .sum();
            let mag: f64 = (0..q.len()).map(|c| (q[c][0] * (radii[c] / vol[c] + implicit)).powi(2)).sum();
            let n = q.len().max(1) as f64;
            norms = PseudoNorms { residual: (sum / n).sqrt(), magnitude: (mag / n).sqrt() };
        } else {
            op.evaluate(q, ws, None)?;
        }
        let mut d: Vec<Conservative> = (0..q.len())
            .map(|c| {
                let h = alpha * dts[c] / vol[c];
                std::array::from_fn(|v| h * (ws.residual[c][v] - source(c, v)))
            })
            .collect();
        if settings.residual_smoothing > 0.0 {
            op.smooth(&mut d, settings.residual_smoothing);
        }
        for c in 0..q.len() {
            let denom = 1.0 + alpha * dts[c] * implicit;
            for v in 0..5 {
                q[c][v] = (q0[c][v] - d[c][v]) / denom;
            }
        }
    }
    Ok(norms)
}

/// Norms of the start state of a pseudo step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PseudoNorms {
    /// Root mean square of the density component of `R* / vol`.
    pub residual: f64,
    /// Root mean square of the individual density terms it balances; a
    /// residual below `ROUNDOFF_FLOOR` times this is at round-off level.
    pub magnitude: f64,
}

pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PseudoReport {
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Pseudo-iterate until the residual has dropped by `tolerance` relative
/// to the first iterate or reached round-off level, or `max_iterations`
/// are spent.
pub fn iterate(
    q: &mut [Conservative],
    op: &impl SpatialOperator,
    terms: Option<&UnsteadyResidualTerms>,
    settings: &SolverSettings,
    tolerance: f64,
    max_iterations: usize,
    ws: &mut Workspace,
) -> Result<PseudoReport> {
    iterate_with(tolerance, max_iterations, || pseudo_advance(q, op, terms, settings, ws))
}

/// Convergence loop around any pseudo step that reports the norms of its
/// start state.
pub(crate) fn iterate_with(
    tolerance: f64,
    max_iterations: usize,
    mut step: impl FnMut() -> Result<PseudoNorms>,
) -> Result<PseudoReport> {
    let mut history = Vec::new();
    let mut first = None;
    for _ in 0..max_iterations {
        let norms = step()?;
        let r = norms.residual;
        if !r.is_finite() {
            return Err(Error::InvalidState { cell: usize::MAX, reason: "non-finite residual".into() });
        }
        history.push(r);
        let r0 = *first.get_or_insert(r);
        if r <= tolerance * r0 || r <= ROUNDOFF_FLOOR * norms.magnitude {
            return Ok(PseudoReport { converged: true, iterations: history.len(), history });
        }
    }
    Ok(PseudoReport { converged: false, iterations: history.len(), history })
}

/// One physical step: pseudo-iterate `Q*` from `Q^n` to the solution of
/// the BDF2 relation (implicit Euler when `previous` is absent) with the
/// level n+1 operator `op`.
pub fn dual_time_step(
    op: &impl SpatialOperator,
    current: (&[Conservative], &[f64]),
    previous: Option<(&[Conservative], &[f64])>,
    dt: f64,
    settings: &SolverSettings,
    ws: &mut Workspace,
) -> Result<(Vec<Conservative>, PseudoReport)> {
    dual_time_step_from(op, current, previous, dt, settings, ws, current.0.to_vec())
}

/// [`dual_time_step`] with the pseudo iteration started from `start`.
pub fn dual_time_step_from(
    op: &impl SpatialOperator,
    current: (&[Conservative], &[f64]),
    previous: Option<(&[Conservative], &[f64])>,
    dt: f64,
    settings: &SolverSettings,
    ws: &mut Workspace,
    start: Vec<Conservative>,
) -> Result<(Vec<Conservative>, PseudoReport)> {
    let terms = UnsteadyResidualTerms::new(dt, current, previous);
    let mut q = start;
    let rep = iterate(&mut q, op, Some(&terms), settings, settings.pseudo_tolerance, settings.max_pseudo_iterations, ws)?;
    if !rep.converged {
        log::warn!(
            "pseudo iteration stopped after {} iterations at relative residual {:e}",
            rep.iterations,
            rep.history.last().unwrap_or(&f64::NAN) / rep.history[0]
        );
    }
    Ok((q, rep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::metrics::static_metrics;
    use crate::mesh::{cartesian_block, FaceTag, MultiBlockMesh};
    use crate::solver::state::FreestreamConditions;

    /// `R(Q) = lambda vol Q` in every component, with spectral radii chosen
    /// so that the local pseudo step times `lambda` equals `z / cfl`.
    struct Linear {
        lambda: f64,
        z: f64,
        vol: Vec<f64>,
    }

    impl SpatialOperator for Linear {
        fn volume(&self) -> &[f64] {
            &self.vol
        }

        fn evaluate(&self, q: &[Conservative], ws: &mut Workspace, radii: Option<&mut Vec<f64>>) -> Result<()> {
            ws.residual = q.iter().zip(&self.vol).map(|(s, v)| s.map(|x| self.lambda * v * x)).collect();
            if let Some(r) = radii {
                *r = self.vol.iter().map(|v| 2.0 * v * self.lambda / self.z).collect();
            }
            Ok(())
        }
    }

    #[test]
    fn stage_amplification_matches_rk_polynomial() {
        for z in [0.1, 0.5, 1.0, 1.7] {
            let op = Linear { lambda: 2.0, z, vol: vec![0.3, 2.0] };
            let settings = SolverSettings { cfl: 1.0, ..Default::default() };
            let mut q = vec![[1.0, -2.0, 0.5, 3.0, 4.0]; 2];
            let mut ws = Workspace::default();
            pseudo_advance(&mut q, &op, None, &settings, &mut ws).unwrap();
            let g = 1.0 - z + z * z / 2.0 - z * z * z / 6.0;
            for (v, x0) in [1.0, -2.0, 0.5, 3.0, 4.0].iter().enumerate() {
                assert!((q[1][v] - g * x0).abs() < 1e-14, "z={z}");
            }
        }
    }

    #[test]
    fn dual_time_matches_bdf2_recurrence() {
        let lambda = 1.0;
        let dt = 0.2;
        let op = Linear { lambda, z: 0.8, vol: vec![1.0] };
        let settings = SolverSettings { cfl: 1.0, pseudo_tolerance: 1e-15, max_pseudo_iterations: 2000, ..Default::default() };
        let mut ws = Workspace::default();
        let vol = [1.0];
        let (q1, _) = dual_time_step(&op, (&[[1.0; 5]], &vol), None, dt, &settings, &mut ws).unwrap();
        let mut exact = vec![1.0, 1.0 / (1.0 + lambda * dt)];
        let mut levels = vec![[[1.0; 5]], [q1[0]]];
        for n in 1..20 {
            let (qn, qm) = (levels[n], levels[n - 1]);
            let (q, rep) = dual_time_step(&op, (&qn, &vol), Some((&qm, &vol)), dt, &settings, &mut ws).unwrap();
            assert!(rep.converged);
            levels.push([q[0]]);
            exact.push((4.0 * exact[n] - exact[n - 1]) / (3.0 + 2.0 * lambda * dt));
        }
        for (l, e) in levels.iter().zip(&exact) {
            assert!((l[0][2] - e).abs() < 1e-12, "{} vs {e}", l[0][2]);
        }
    }

    #[test]
    fn settings_validation() {
        SolverSettings::default().validate().unwrap();
        let s = SolverSettings { steps_per_cycle: 8, ..Default::default() };
        assert!(s.validate().is_err());
        let s = SolverSettings { cycles: 0, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn zero_pseudo_residual_leaves_state_unchanged() {
        let mesh = MultiBlockMesh::single(cartesian_block([0.0; 3], [1.0; 3], [3, 2, 2]), FaceTag::Farfield).unwrap();
        let t = FaceGeometry::build(&mesh).unwrap();
        let m = static_metrics(&t, &mesh).unwrap();
        let fd = FaceData::fixed(&m);
        let fs = FreestreamConditions::at_mach(0.4);
        let settings = SolverSettings::default();
        let p = PseudoProblem {
            table: &t,
            faces: &fd,
            volume: &m.volume,
            settings: ResidualSettings { gamma: 1.4, limiter: Limiter::VanAlbada, farfield: fs.primitive(), fault: FaultInjection::None },
        };
        let q0 = vec![fs.conservative(); t.cell_count()];
        let mut ws = Workspace::default();
        let (q1, rep) = dual_time_step(&p, (&q0, &m.volume), Some((&q0, &m.volume)), 0.01, &settings, &mut ws).unwrap();
        assert!(rep.converged);
        for (a, b) in q1.iter().zip(&q0) {
            for v in 0..5 {
                assert!((a[v] - b[v]).abs() <= 1e-12 * b[v].abs().max(1.0));
            }
        }
    }
}
