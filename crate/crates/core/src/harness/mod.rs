//! End-to-end orchestration: wing geometry, configuration, the run pipeline
//! and the verification suites.

pub mod oned;
pub mod pipeline;
pub mod riemann;
pub mod verify;
pub mod config;
pub mod wing;
