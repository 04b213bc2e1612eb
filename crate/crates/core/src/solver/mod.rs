//! Unsteady Euler solver on moving multi-block grids: AUSM fluxes, MUSCL
//! reconstruction, multistage Runge-Kutta pseudo-time iteration and BDF2
//! dual time stepping.

pub mod checkpoint;
pub mod flux;
pub mod multigrid;
pub mod muscl;
pub mod residual;
pub mod state;
pub mod time;
pub mod unsteady;

pub use checkpoint::Checkpoint;
pub use flux::{ausm_flux, farfield_flux, wall_flux};
pub use multigrid::{coarsen, iterate_multigrid, Hierarchy, LevelStack};
pub use muscl::{muscl_reconstruct, Limiter};
pub use residual::{residual, FaceData, FaultInjection, ResidualSettings, Workspace};
pub use state::{
    conservative_from_primitive, primitive_from_conservative, Conservative, FreestreamConditions, Primitive,
};
pub use time::{
    dual_time_step, dual_time_step_from, pseudo_advance, PseudoProblem, PseudoReport, SolverSettings, SpatialOperator, UnsteadyResidualTerms,
};
pub use unsteady::{steady_solve, unsteady_run, FlowSetup, MovingMesh, StepReport, SteadySolution, UnsteadyRun};
