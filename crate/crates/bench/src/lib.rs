//! Fixtures shared by the criterion benchmarks.

use hsearch_core::{SearchParams, SearchProblem};

/// `a = d = 1`, `r = 1`, `phi = pi/2`: a generic near-perfect point.
pub fn generic_params() -> SearchParams {
    SearchParams::new(1.0, 1.0, 1.0, 1.0, std::f64::consts::FRAC_PI_2).expect("valid parameters")
}

/// Uniform initial state with a single target.
pub fn uniform_problem(dim: usize) -> SearchProblem {
    SearchProblem::uniform(dim, &[0]).expect("valid problem")
}
