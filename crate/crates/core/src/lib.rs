//! Dynamic yaw stability derivatives of a rigid wing from forced harmonic
//! motions simulated with an unsteady finite-volume Euler solver on deforming
//! structured multi-block grids.
//!
//! The crate is organised the way a run flows:
//!
//! * [`mesh`] builds, smooths, deforms and measures the multi-block grid;
//! * [`motion`] describes the lateral, yaw and combined forced motions;
//! * [`solver`] advances the Euler equations with AUSM fluxes, MUSCL
//!   reconstruction and BDF2 dual time stepping;
//! * [`loads`] integrates wall pressure into force and moment coefficients;
//! * [`derivatives`] reduces coefficient histories to stability derivatives;
//! * [`harness`] ties everything together: wing geometry, configuration,
//!   the end-to-end pipeline and the verification suites.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod derivatives;
pub mod error;
pub mod geom;
pub mod harness;
pub mod loads;
pub mod mesh;
pub mod motion;
pub mod solver;

pub use error::{Error, Result};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "YAWSTAB_THREADS";

/// Size the global thread pool from [`THREADS_ENV`]; returns the count
/// when the variable is set. Call before any parallel work.
pub fn init_threads_from_env() -> Result<Option<usize>> {
    let Ok(text) = std::env::var(THREADS_ENV) else { return Ok(None) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("{THREADS_ENV} must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    Ok(Some(n))
}
