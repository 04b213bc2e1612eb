//! First-harmonic reduction of periodic coefficient histories to dynamic
//! yaw stability derivatives.
//!
//! Phase convention: every fit is taken against the sideslip phase
//! `theta = k tau + pi/2`. The lateral and yaw motions start at peak
//! sideslip, so in `theta` the sideslip is a pure sine and its rate a pure
//! cosine. Hence `a1` (sine) measures the static response and `b1` (cosine)
//! the rate response. Rates are per unit nondimensional time `tau = tV/c`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loads::{CoefficientSample, CoefficientSeries};
use crate::motion::{CombinedPhaseMode, MotionKind, MotionSpec};

/// Fewest samples per period accepted by [`first_harmonic`].
pub const MIN_SAMPLES: usize = 16;

/// Offset from the motion phase `k tau` to the sideslip phase.
pub const SIDESLIP_PHASE_SHIFT: f64 = FRAC_PI_2;

pub fn sideslip_phase(ktau: f64) -> f64 {
    ktau + SIDESLIP_PHASE_SHIFT
}

/// `mean + a1 sin(theta) + b1 cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub mean: f64,
    /// In-phase (sine) amplitude.
    pub a1: f64,
    /// Out-of-phase (cosine) amplitude.
    pub b1: f64,
}

impl HarmonicFit {
    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.mean + self.a1 * s + self.b1 * c
    }
}

/// Rectangle-rule Fourier coefficients over one period of uniformly spaced
/// samples. `phases` may start anywhere but must advance by `2 pi / N`.
pub fn first_harmonic(phases: &[f64], values: &[f64]) -> Result<HarmonicFit> {
    let n = values.len();
    if phases.len() != n {
        return Err(Error::InvalidInput(format!("{} phases for {n} samples", phases.len())));
    }
    if n < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("{n} samples per period; at least {MIN_SAMPLES} are required")));
    }
    let step = 2.0 * PI / n as f64;
    for (j, p) in phases.iter().enumerate() {
        if ((p - phases[0]) - j as f64 * step).abs() > 1e-9 * (1.0 + p.abs()) {
            return Err(Error::InvalidInput(format!(
                "samples must cover exactly one period at uniform spacing; sample {j} is at {p}"
            )));
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let (mut mean, mut a1, mut b1) = (0.0, 0.0, 0.0);
    for (p, v) in phases.iter().zip(values) {
        let (s, c) = p.sin_cos();
        mean += v;
        a1 += v * s;
        b1 += v * c;
    }
    let w = 2.0 / n as f64;
    Ok(HarmonicFit { mean: mean / n as f64, a1: a1 * w, b1: b1 * w })
}

/// Fit of one column of a single-period series against the sideslip phase.
pub fn fit_column(samples: &[CoefficientSample], pick: impl Fn(&CoefficientSample) -> f64) -> Result<HarmonicFit> {
    let phases: Vec<f64> = samples.iter().map(|s| sideslip_phase(s.ktau)).collect();
    let values: Vec<f64> = samples.iter().map(pick).collect();
    first_harmonic(&phases, &values)
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be positive, got {v}")))
    }
}

/// `(C_N_beta, C_N_beta_dot)` from the C_N fit of a lateral translation.
pub fn extract_lateral(fit: &HarmonicFit, beta_max: f64, k: f64) -> Result<(f64, f64)> {
    positive(beta_max, "sideslip amplitude")?;
    positive(k, "reduced frequency")?;
    Ok((fit.a1 / beta_max, fit.b1 / (k * beta_max)))
}

/// `C_N_r + C_N_beta_dot` from the C_N fit of a yaw oscillation.
pub fn extract_yaw_combination(fit: &HarmonicFit, psi_max: f64, k: f64) -> Result<f64> {
    positive(psi_max, "yaw amplitude")?;
    positive(k, "reduced frequency")?;
    Ok(fit.b1 / (k * psi_max))
}

pub fn subtract_for_cnr(combination: f64, cn_beta_dot: f64) -> f64 {
    combination - cn_beta_dot
}

/// `C_Y_beta` from the C_Y fit of a motion with sideslip amplitude
/// `beta_max`.
pub fn extract_sideforce_gradient(fit: &HarmonicFit, beta_max: f64) -> Result<f64> {
    positive(beta_max, "sideslip amplitude")?;
    Ok(fit.a1 / beta_max)
}

/// First harmonic of the yaw rate of `motion`, sampled at the motion phases.
pub fn rate_fit(motion: &MotionSpec, ktau: &[f64]) -> Result<HarmonicFit> {
    let phases: Vec<f64> = ktau.iter().map(|p| sideslip_phase(*p)).collect();
    let r: Vec<f64> = ktau.iter().map(|p| motion.state(*p).r).collect();
    first_harmonic(&phases, &r)
}

/// `C_N_r` from a zero-sideslip combined motion: projection of the C_N
/// harmonic onto the yaw-rate harmonic.
pub fn extract_combined(fit: &HarmonicFit, rate: &HarmonicFit) -> Result<f64> {
    let norm = rate.a1 * rate.a1 + rate.b1 * rate.b1;
    positive(norm, "yaw-rate amplitude")?;
    Ok((fit.a1 * rate.a1 + fit.b1 * rate.b1) / norm)
}

/// Least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn least_squares(rows: &[(f64, f64)]) -> Result<LinearFit> {
    let n = rows.len() as f64;
    let y0 = rows[0].1;
    let rows: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1 - y0)).collect();
    let mx = rows.iter().map(|r| r.0).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.1).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|r| (r.0 - mx).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum();
    let syy: f64 = rows.iter().map(|r| (r.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidInput("abscissae must not all coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = rows.iter().map(|r| (r.1 - intercept - slope * r.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept: intercept + y0, r2 })
}

/// Straight-line fit of `(y_max, value)` rows.
pub fn linearity_diagnostics(rows: &[(f64, f64)]) -> Result<LinearFit> {
    if rows.len() < 3 {
        return Err(Error::InvalidInput(format!("{} rows; linearity needs at least 3", rows.len())));
    }
    least_squares(rows)
}

/// `C_N_r` at vanishing side-force gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroSideforce {
    /// Linear interpolation between the rows bracketing zero.
    pub piecewise: f64,
    /// Intercept of the least-squares line through all rows.
    pub least_squares: f64,
    pub r2: f64,
}

/// Interpolate `(C_Y_beta, C_N_r)` rows at `C_Y_beta = 0`.
pub fn interpolate_zero_sideforce(rows: &[(f64, f64)]) -> Result<ZeroSideforce> {
    if rows.len() < 2 {
        return Err(Error::InvalidInput("zero side-force interpolation needs at least two rows".into()));
    }
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let piecewise = sorted
        .windows(2)
        .find(|w| w[0].0 <= 0.0 && w[1].0 >= 0.0)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x1 == x0 {
                0.5 * (y0 + y1)
            } else {
                y0 + (y1 - y0) * (0.0 - x0) / (x1 - x0)
            }
        })
        .ok_or_else(|| {
            Error::NoBracket(format!(
                "side-force gradients {:?} do not bracket zero",
                sorted.iter().map(|r| r.0).collect::<Vec<_>>()
            ))
        })?;
    let fit = least_squares(&sorted)?;
    Ok(ZeroSideforce { piecewise, least_squares: fit.intercept, r2: fit.r2 })
}

/// A coefficient history of one period with the motion that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSeries {
    pub motion: MotionSpec,
    pub samples: Vec<CoefficientSample>,
}

impl MotionSeries {
    /// Metadata identifying the motion in a series file.
    pub fn metadata(motion: &MotionSpec) -> Vec<(String, String)> {
        let kind = match motion.kind {
            MotionKind::LateralTranslation => "lateral",
            MotionKind::YawRotation => "yaw",
            MotionKind::Combined => "combined",
        };
        let mode = match motion.phase_mode {
            CombinedPhaseMode::ZeroSideslip => "zero_sideslip",
            CombinedPhaseMode::SmallAngle => "small_angle",
        };
        let mut m = vec![
            ("motion".to_string(), kind.to_string()),
            ("reduced_frequency".to_string(), format!("{}", motion.reduced_frequency)),
            ("lateral_amplitude".to_string(), format!("{}", motion.lateral_amplitude)),
            ("phase_mode".to_string(), mode.to_string()),
            ("cg".to_string(), format!("{} {} {}", motion.cg[0], motion.cg[1], motion.cg[2])),
        ];
        if let Some(psi) = motion.yaw_amplitude {
            m.push(("yaw_amplitude".to_string(), format!("{psi}")));
        }
        m
    }

    pub fn to_series(&self) -> CoefficientSeries {
        CoefficientSeries { metadata: Self::metadata(&self.motion), samples: self.samples.clone() }
    }

    pub fn from_series(series: &CoefficientSeries) -> Result<Self> {
        let kind = match series.meta("motion") {
            Some("lateral") => MotionKind::LateralTranslation,
            Some("yaw") => MotionKind::YawRotation,
            Some("combined") => MotionKind::Combined,
            other => return Err(Error::Parse(format!("series has unknown motion {other:?}"))),
        };
        let phase_mode = match series.meta("phase_mode") {
            None | Some("zero_sideslip") => CombinedPhaseMode::ZeroSideslip,
            Some("small_angle") => CombinedPhaseMode::SmallAngle,
            Some(other) => return Err(Error::Parse(format!("unknown phase mode {other}"))),
        };
        let yaw_amplitude = match series.meta("yaw_amplitude") {
            Some(_) => Some(series.meta_f64("yaw_amplitude")?),
            None => None,
        };
        let cg = match series.meta("cg") {
            Some(text) => {
                let v: Vec<f64> = text
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad cg {text}"))))
                    .collect::<Result<_>>()?;
                <[f64; 3]>::try_from(v).map_err(|_| Error::Parse(format!("cg needs 3 components: {text}")))?
            }
            None => [0.0; 3],
        };
        let motion = MotionSpec {
            kind,
            reduced_frequency: series.meta_f64("reduced_frequency")?,
            lateral_amplitude: series.meta_f64("lateral_amplitude")?,
            yaw_amplitude,
            phase_mode,
            cg,
        };
        motion.validate()?;
        Ok(MotionSeries { motion, samples: series.samples.clone() })
    }

    fn ktau(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.ktau).collect()
    }
}

/// Per-amplitude row in the layout of the subtraction tables. Lateral
/// harmonics are normalized by the yaw amplitude of the protocol, so the
/// rows vary linearly with `y_max` and cross the yaw run's side force at
/// `y_max k = psi_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeRow {
    pub y_max: f64,
    pub cn_beta_dot: f64,
    /// Lateral minus yaw in-phase side force, over `psi_max`.
    pub cy_beta: f64,
    /// Subtraction result `combination - cn_beta_dot`.
    pub cn_r: f64,
    /// Direct value from the combined motion at this amplitude, if run.
    pub cn_r_combined: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CnrMethod {
    Subtraction,
    Combined,
    Interpolated,
}

impl CnrMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            CnrMethod::Subtraction => "subtraction",
            CnrMethod::Combined => "combined",
            CnrMethod::Interpolated => "interpolated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub reduced_frequency: f64,
    pub psi_max: f64,
    /// Mean yawing moment over the yaw cycle.
    pub cn_static: f64,
    pub cn_beta: f64,
    pub cn_beta_dot: f64,
    pub combination: f64,
    pub cy_beta: f64,
    pub rows: Vec<AmplitudeRow>,
    /// Subtraction rows interpolated to zero side-force gradient.
    pub zero_sideforce: Option<ZeroSideforce>,
    /// Mean of the direct combined-motion values.
    pub cn_r_combined: Option<f64>,
    pub linearity_cn_r: Option<LinearFit>,
    pub linearity_cy_beta: Option<LinearFit>,
}

impl DerivativeReport {
    /// Report of a stationary wing: every dynamic derivative vanishes.
    pub fn stationary(reduced_frequency: f64, psi_max: f64, cn_static: f64) -> Self {
        DerivativeReport {
            reduced_frequency,
            psi_max,
            cn_static,
            cn_beta: 0.0,
            cn_beta_dot: 0.0,
            combination: 0.0,
            cy_beta: 0.0,
            rows: Vec::new(),
            zero_sideforce: Some(ZeroSideforce { piecewise: 0.0, least_squares: 0.0, r2: 1.0 }),
            cn_r_combined: Some(0.0),
            linearity_cn_r: None,
            linearity_cy_beta: None,
        }
    }

    pub fn cn_r_interpolated(&self) -> Option<f64> {
        self.zero_sideforce.map(|z| z.piecewise)
    }

    /// `|interpolated - combined| / |combined|`.
    pub fn relative_difference(&self) -> Option<f64> {
        let (a, b) = (self.cn_r_interpolated()?, self.cn_r_combined?);
        if a == b {
            Some(0.0)
        } else {
            Some((a - b).abs() / b.abs())
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.5}"));
        let _ = writeln!(s, "Dynamic yaw stability derivatives");
        let _ = writeln!(s, "  reduced frequency k      {:.4}", self.reduced_frequency);
        let _ = writeln!(s, "  yaw amplitude (deg)      {:.4}", self.psi_max.to_degrees());
        let _ = writeln!(s);
        let _ = writeln!(s, "  C_N (mean)               {:.6}", self.cn_static);
        let _ = writeln!(s, "  C_Nbeta                  {:.5}", self.cn_beta);
        let _ = writeln!(s, "  C_Nbetadot               {:.5}", self.cn_beta_dot);
        let _ = writeln!(s, "  C_Nr + C_Nbetadot        {:.5}", self.combination);
        let _ = writeln!(s, "  C_Ybeta                  {:.5}", self.cy_beta);
        let _ = writeln!(s);
        if !self.rows.is_empty() {
            let _ = writeln!(s, "  {:>8} {:>12} {:>12} {:>12} {:>12}", "y_max", "C_Nbetadot", "C_Ybeta", "C_Nr[sub]", "C_Nr[comb]");
            for r in &self.rows {
                let _ = writeln!(
                    s,
                    "  {:>8.3} {:>12.4} {:>12.5} {:>12.4} {:>12}",
                    r.y_max,
                    r.cn_beta_dot,
                    r.cy_beta,
                    r.cn_r,
                    r.cn_r_combined.map_or("n/a".to_string(), |v| format!("{v:.4}"))
                );
            }
            let _ = writeln!(s);
        }
        let _ = writeln!(s, "  C_Nr [{}]     {}", CnrMethod::Interpolated.tag(), opt(self.cn_r_interpolated()));
        let _ = writeln!(s, "  C_Nr [least squares]     {}", opt(self.zero_sideforce.map(|z| z.least_squares)));
        let _ = writeln!(s, "  C_Nr [{}]         {}", CnrMethod::Combined.tag(), opt(self.cn_r_combined));
        let _ = writeln!(
            s,
            "  relative difference      {}",
            self.relative_difference().map_or("n/a".to_string(), |d| format!("{:.2} %", 100.0 * d))
        );
        for (name, fit) in [("C_Nr", self.linearity_cn_r), ("C_Ybeta", self.linearity_cy_beta)] {
            if let Some(f) = fit {
                let _ = writeln!(s, "  {name} vs y_max: slope {:.5}, intercept {:.5}, R^2 {:.6}", f.slope, f.intercept, f.r2);
            }
        }
        s
    }

    pub fn to_key_value(&self) -> String {
        let mut m: Vec<(String, String)> = vec![
            ("reduced_frequency".into(), format!("{}", self.reduced_frequency)),
            ("psi_max".into(), format!("{}", self.psi_max)),
            ("cn_static".into(), format!("{}", self.cn_static)),
            ("cn_beta".into(), format!("{}", self.cn_beta)),
            ("cn_beta_dot".into(), format!("{}", self.cn_beta_dot)),
            ("combination".into(), format!("{}", self.combination)),
            ("cy_beta".into(), format!("{}", self.cy_beta)),
            ("rows".into(), format!("{}", self.rows.len())),
        ];
        for (i, r) in self.rows.iter().enumerate() {
            m.push((format!("row.{i}.y_max"), format!("{}", r.y_max)));
            m.push((format!("row.{i}.cn_beta_dot"), format!("{}", r.cn_beta_dot)));
            m.push((format!("row.{i}.cy_beta"), format!("{}", r.cy_beta)));
            m.push((format!("row.{i}.cn_r.{}", CnrMethod::Subtraction.tag()), format!("{}", r.cn_r)));
            if let Some(v) = r.cn_r_combined {
                m.push((format!("row.{i}.cn_r.{}", CnrMethod::Combined.tag()), format!("{v}")));
            }
        }
        if let Some(z) = self.zero_sideforce {
            m.push((format!("cn_r.{}", CnrMethod::Interpolated.tag()), format!("{}", z.piecewise)));
            m.push(("cn_r.least_squares".into(), format!("{}", z.least_squares)));
            m.push(("cn_r.least_squares_r2".into(), format!("{}", z.r2)));
        }
        if let Some(v) = self.cn_r_combined {
            m.push((format!("cn_r.{}", CnrMethod::Combined.tag()), format!("{v}")));
        }
        if let Some(d) = self.relative_difference() {
            m.push(("cn_r.relative_difference".into(), format!("{d}")));
        }
        for (name, fit) in [("linearity.cn_r", self.linearity_cn_r), ("linearity.cy_beta", self.linearity_cy_beta)] {
            if let Some(f) = fit {
                m.push((format!("{name}.slope"), format!("{}", f.slope)));
                m.push((format!("{name}.intercept"), format!("{}", f.intercept)));
                m.push((format!("{name}.r2"), format!("{}", f.r2)));
            }
        }
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected key = value: {line}")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad number in {line}")))?;
            map.insert(k.trim().to_string(), v);
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| Error::Parse(format!("report lacks {k}")));
        let opt = |k: &str| map.get(k).copied();
        let fit = |name: &str| -> Option<LinearFit> {
            Some(LinearFit {
                slope: opt(&format!("{name}.slope"))?,
                intercept: opt(&format!("{name}.intercept"))?,
                r2: opt(&format!("{name}.r2"))?,
            })
        };
        let nrows = get("rows")? as usize;
        let rows = (0..nrows)
            .map(|i| {
                Ok(AmplitudeRow {
                    y_max: get(&format!("row.{i}.y_max"))?,
                    cn_beta_dot: get(&format!("row.{i}.cn_beta_dot"))?,
                    cy_beta: get(&format!("row.{i}.cy_beta"))?,
                    cn_r: get(&format!("row.{i}.cn_r.subtraction"))?,
                    cn_r_combined: opt(&format!("row.{i}.cn_r.combined")),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let zero_sideforce = match opt("cn_r.interpolated") {
            Some(piecewise) => Some(ZeroSideforce {
                piecewise,
                least_squares: get("cn_r.least_squares")?,
                r2: get("cn_r.least_squares_r2")?,
            }),
            None => None,
        };
        Ok(DerivativeReport {
            reduced_frequency: get("reduced_frequency")?,
            psi_max: get("psi_max")?,
            cn_static: get("cn_static")?,
            cn_beta: get("cn_beta")?,
            cn_beta_dot: get("cn_beta_dot")?,
            combination: get("combination")?,
            cy_beta: get("cy_beta")?,
            rows,
            zero_sideforce,
            cn_r_combined: opt("cn_r.combined"),
            linearity_cn_r: fit("linearity.cn_r"),
            linearity_cy_beta: fit("linearity.cy_beta"),
        })
    }

    pub fn write(&self, text_path: &Path, kv_path: &Path) -> Result<()> {
        std::fs::write(text_path, self.to_text())?;
        std::fs::write(kv_path, self.to_key_value())?;
        Ok(())
    }

    pub fn read(kv_path: &Path) -> Result<Self> {
        Self::from_key_value(&std::fs::read_to_string(kv_path)?)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Reduce one yaw run, any number of lateral runs and any number of
/// zero-sideslip combined runs, all at the same reduced frequency.
pub fn reduce(yaw: &MotionSeries, lateral: &[MotionSeries], combined: &[MotionSeries]) -> Result<DerivativeReport> {
    if yaw.motion.kind != MotionKind::YawRotation {
        return Err(Error::InvalidInput("reduction needs a yaw-rotation series".into()));
    }
    let k = yaw.motion.reduced_frequency;
    let psi_max = yaw.motion.yaw_amplitude();
    for s in lateral.iter().chain(combined) {
        if (s.motion.reduced_frequency - k).abs() > 1e-12 * k {
            return Err(Error::InvalidInput(format!(
                "series at k = {} mixed with yaw run at k = {k}",
                s.motion.reduced_frequency
            )));
        }
    }
    if lateral.iter().any(|s| s.motion.kind != MotionKind::LateralTranslation) {
        return Err(Error::InvalidInput("lateral list holds a non-lateral series".into()));
    }
    if combined
        .iter()
        .any(|s| s.motion.kind != MotionKind::Combined || s.motion.phase_mode != CombinedPhaseMode::ZeroSideslip)
    {
        return Err(Error::InvalidInput("direct method needs zero-sideslip combined series".into()));
    }

    let yaw_cn = fit_column(&yaw.samples, |s| s.cn)?;
    let yaw_cy = fit_column(&yaw.samples, |s| s.cy)?;
    let combination = extract_yaw_combination(&yaw_cn, psi_max, k)?;

    let mut direct = Vec::new();
    for s in combined {
        let fit = fit_column(&s.samples, |c| c.cn)?;
        let rate = rate_fit(&s.motion, &s.ktau())?;
        direct.push((s.motion.lateral_amplitude, extract_combined(&fit, &rate)?));
    }

    let mut rows = Vec::new();
    let (mut cn_beta, mut cn_beta_dot, mut cy_beta) = (Vec::new(), Vec::new(), Vec::new());
    for s in lateral {
        let y_max = s.motion.lateral_amplitude;
        let beta_max = s.motion.sideslip_amplitude();
        let cn = fit_column(&s.samples, |c| c.cn)?;
        let cy = fit_column(&s.samples, |c| c.cy)?;
        let (nb, nbd) = extract_lateral(&cn, beta_max, k)?;
        cn_beta.push(nb);
        cn_beta_dot.push(nbd);
        cy_beta.push(extract_sideforce_gradient(&cy, beta_max)?);
        let (_, row_nbd) = extract_lateral(&cn, psi_max, k)?;
        let diff = HarmonicFit { a1: cy.a1 - yaw_cy.a1, ..cy };
        rows.push(AmplitudeRow {
            y_max,
            cn_beta_dot: row_nbd,
            cy_beta: extract_sideforce_gradient(&diff, psi_max)?,
            cn_r: subtract_for_cnr(combination, row_nbd),
            cn_r_combined: direct.iter().find(|d| (d.0 - y_max).abs() < 1e-12).map(|d| d.1),
        });
    }
    rows.sort_by(|a, b| a.y_max.total_cmp(&b.y_max));

    let zero_sideforce = if rows.len() >= 2 {
        Some(interpolate_zero_sideforce(&rows.iter().map(|r| (r.cy_beta, r.cn_r)).collect::<Vec<_>>())?)
    } else {
        None
    };
    let linear = |pick: fn(&AmplitudeRow) -> f64| -> Result<Option<LinearFit>> {
        if rows.len() >= 3 {
            Ok(Some(linearity_diagnostics(&rows.iter().map(|r| (r.y_max, pick(r))).collect::<Vec<_>>())?))
        } else {
            Ok(None)
        }
    };
    let (yaw_beta, _) = extract_lateral(&yaw_cn, psi_max, k)?;
    Ok(DerivativeReport {
        reduced_frequency: k,
        psi_max,
        cn_static: yaw_cn.mean,
        cn_beta: if cn_beta.is_empty() { yaw_beta } else { mean(&cn_beta) },
        cn_beta_dot: if cn_beta_dot.is_empty() { f64::NAN } else { mean(&cn_beta_dot) },
        combination,
        cy_beta: if cy_beta.is_empty() { extract_sideforce_gradient(&yaw_cy, psi_max)? } else { mean(&cy_beta) },
        linearity_cn_r: linear(|r| r.cn_r)?,
        linearity_cy_beta: linear(|r| r.cy_beta)?,
        rows,
        zero_sideforce,
        cn_r_combined: if direct.is_empty() { None } else { Some(mean(&direct.iter().map(|d| d.1).collect::<Vec<_>>())) },
    })
}

/// Sort a mixed set of series by motion and reduce them.
pub fn reduce_series(series: &[MotionSeries]) -> Result<DerivativeReport> {
    let mut yaw = series.iter().filter(|s| s.motion.kind == MotionKind::YawRotation);
    let first = yaw.next().ok_or_else(|| Error::InvalidInput("no yaw-rotation series given".into()))?;
    if yaw.next().is_some() {
        return Err(Error::InvalidInput("more than one yaw-rotation series given".into()));
    }
    let lateral: Vec<MotionSeries> =
        series.iter().filter(|s| s.motion.kind == MotionKind::LateralTranslation).cloned().collect();
    let combined: Vec<MotionSeries> = series.iter().filter(|s| s.motion.kind == MotionKind::Combined).cloned().collect();
    reduce(first, &lateral, &combined)
}
