//! Simulation and verification toolkit for the generalized continuous-time
//! quantum search Hamiltonian
//!
//! ```text
//! H = E (a|w><w| + b|w><s| + c|s><w| + d|s><s|),   b = r e^{i phi},  c = conj(b)
//! ```
//!
//! where `|w>` is the (normalized, projected) target state and `|s>` the
//! initial state with real overlap `x = <w|s>`. The dynamics stay in the
//! two-dimensional span of `|w>` and `|s>`, so every quantity has a closed
//! form; each one is checked against an adaptive Runge–Kutta integration of
//! the full `N`-dimensional Schrödinger equation.

pub mod closedform;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod hamiltonian;
pub mod linalg;
pub mod rng;
pub mod types;
pub mod verify;

pub use num_complex::Complex64;

pub use closedform::{
    c_paper, coefficients_eq3, interference_term, m_value, near_perfect_deficit, pg_bound_check, probability_eq1,
    probability_eq2, qd_values, readout_time, CSource, ClosedForm, Eq3Coefficients,
};
pub use error::{Result, SearchError};
pub use evolution::{
    evolve_full, evolve_full_at, evolve_reduced, probability_trace, propagator_2x2, success_probability, Trace,
};
pub use experiments::{
    discrepancy_scan, phase_sweep, random_init_trials, scaling_study, DiscrepancyReport, Family, ScalingReport,
    SweepReport, TrialsConfig, TrialsReport,
};
pub use hamiltonian::{
    check_overlap, farhi_params, fenner_params, full_matrix, is_perfect, new_params, perfect_params, reduced_matrix,
    Preset, ReducedHamiltonian,
};
pub use types::{make_params, make_problem, SearchParams, SearchProblem, StateVector, Tolerances};
