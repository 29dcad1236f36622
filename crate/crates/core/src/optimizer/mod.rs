//! Numerical search for phase-insensitive sequences: the linear amplitude
//! solve, the simplex method, annealed random restarts, carrier retuning and
//! sensitivity scans.

mod amplitudes;
mod retune;
mod search;
mod sensitivity;
mod simplex;

pub use amplitudes::{solve_amplitudes, AmplitudeSolution, Constraint, Rows, DEFAULT_CONSTRAINTS};
pub use retune::{retune_frequency, Retuned};
pub use search::{
    anneal_search, AnnealSchedule, Candidate, Layout, Objective, Provenance, SearchConfig, Solution,
    SMALL_SPACE_THRESHOLD, SOLUTION_THRESHOLD,
};
pub use sensitivity::{perturb, sensitivity_scan, ParamSelector, SensitivityFit, RETUNE_WINDOW};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
