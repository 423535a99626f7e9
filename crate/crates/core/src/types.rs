//! Shared domain types: Hamiltonian parameters, state vectors, search problems
//! and numerical tolerances.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SearchError};
use crate::linalg;

/// Numerical thresholds shared by evaluators, integrators and checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub prob_abs: f64,
    pub matrix_abs: f64,
    pub phase_mod: f64,
    /// Local error target of the adaptive integrator.
    pub ode_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { prob_abs: 1e-9, matrix_abs: 1e-10, phase_mod: 1e-12, ode_tol: 1e-10 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.prob_abs, self.matrix_abs, self.phase_mod, self.ode_tol];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(SearchError::InvalidArgument(format!("tolerances must be positive: {self:?}")))
        }
    }
}

/// Parameters of `H = E (a|w><w| + b|w><s| + c|s><w| + d|s><s|)` with
/// `b = r e^{i phi}` and `c = conj(b)`.
///
/// Fields are private so every value has passed [`SearchParams::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchParams {
    energy: f64,
    a: f64,
    d: f64,
    r: f64,
    phi: f64,
}

impl SearchParams {
    pub fn new(energy: f64, a: f64, d: f64, r: f64, phi: f64) -> Result<Self> {
        for (name, v) in [("energy", energy), ("a", a), ("d", d), ("r", r), ("phi", phi)] {
            if !v.is_finite() {
                return Err(SearchError::NonFiniteInput(name));
            }
        }
        if energy <= 0.0 {
            return Err(SearchError::NonPositiveEnergy(energy));
        }
        if r < 0.0 {
            return Err(SearchError::NegativeCoupling(r));
        }
        Ok(Self { energy, a, d, r, phi })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Coupling on `|w><s|`.
    pub fn b(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.phi)
    }

    /// Coupling on `|s><w|`; exactly `conj(b)`.
    pub fn c(&self) -> Complex64 {
        self.b().conj()
    }

    /// Scale used for relative matrix tolerances: `|a| + |d| + r + 1`.
    pub fn scale(&self) -> f64 {
        self.a.abs() + self.d.abs() + self.r + 1.0
    }

    /// Same parameters with a different phase.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.energy, self.a, self.d, self.r, phi)
    }

    pub fn with_energy(&self, energy: f64) -> Result<Self> {
        Self::new(energy, self.a, self.d, self.r, self.phi)
    }

    /// Phase reduced to `(-pi, pi]`, for display.
    pub fn phi_reduced(&self) -> f64 {
        let p = self.phi.rem_euclid(2.0 * PI);
        if p > PI {
            p - 2.0 * PI
        } else {
            p
        }
    }
}

/// Validated constructor mirroring the free-function form used elsewhere.
pub fn make_params(energy: f64, a: f64, d: f64, r: f64, phi: f64) -> Result<SearchParams> {
    SearchParams::new(energy, a, d, r, phi)
}

/// Unit-norm complex state of dimension at least 2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    const NORM_TOL: f64 = 1e-9;

    /// Wraps `amps`, requiring norm 1 within 1e-9.
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        check_amps(&amps)?;
        let n = linalg::norm(&amps);
        if (n - 1.0).abs() > Self::NORM_TOL {
            return Err(SearchError::UnnormalizedInput(n));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        check_amps(&amps)?;
        let n = linalg::norm(&amps);
        if n == 0.0 {
            return Err(SearchError::InvalidArgument("zero vector cannot be normalized".into()));
        }
        amps.iter_mut().for_each(|z| *z /= n);
        Ok(Self { amps })
    }

    pub(crate) fn from_raw_unchecked(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    /// Uniform superposition `1/sqrt(N)` over all basis states.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(SearchError::DimensionTooSmall(dim));
        }
        let v = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { amps: vec![v; dim] })
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amps)
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.amps
    }
}

fn check_amps(amps: &[Complex64]) -> Result<()> {
    if amps.len() < 2 {
        return Err(SearchError::DimensionTooSmall(amps.len()));
    }
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SearchError::NonFiniteInput("state amplitude"));
    }
    Ok(())
}

/// A full-space search instance.
///
/// The target state is the normalized projection of the initial state onto
/// the target subspace, so the overlap `x = <w|s>` is real and positive and
/// the total target-subspace probability of any evolved state equals
/// `|<w|psi>|^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchProblem {
    dim: usize,
    targets: BTreeSet<usize>,
    initial: StateVector,
    target_state: StateVector,
    overlap: f64,
}

const INPUT_NORM_TOL: f64 = 1e-6;
const ZERO_OVERLAP: f64 = 1e-12;

impl SearchProblem {
    pub fn new(dim: usize, targets: &[usize], initial: &[Complex64]) -> Result<Self> {
        if dim < 2 {
            return Err(SearchError::DimensionTooSmall(dim));
        }
        if initial.len() != dim {
            return Err(SearchError::DimensionMismatch { expected: dim, got: initial.len() });
        }
        let targets: BTreeSet<usize> = targets.iter().copied().collect();
        if targets.is_empty() {
            return Err(SearchError::EmptyTargets);
        }
        if let Some(&index) = targets.iter().find(|&&i| i >= dim) {
            return Err(SearchError::TargetOutOfRange { index, dim });
        }
        if targets.len() == dim {
            return Err(SearchError::TargetsCoverAll(dim));
        }
        check_amps(initial)?;
        let n = linalg::norm(initial);
        if (n - 1.0).abs() > INPUT_NORM_TOL {
            return Err(SearchError::UnnormalizedInput(n));
        }
        let initial: Vec<Complex64> = initial.iter().map(|z| z / n).collect();

        let mut projected = vec![Complex64::new(0.0, 0.0); dim];
        for &i in &targets {
            projected[i] = initial[i];
        }
        let overlap = linalg::norm(&projected);
        if overlap < ZERO_OVERLAP {
            return Err(SearchError::ZeroOverlap(overlap));
        }
        let rest: f64 = initial
            .iter()
            .enumerate()
            .filter(|(i, _)| !targets.contains(i))
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if rest < ZERO_OVERLAP || overlap >= 1.0 {
            return Err(SearchError::InitialInsideTargets(overlap));
        }
        projected.iter_mut().for_each(|z| *z /= overlap);

        Ok(Self {
            dim,
            targets,
            initial: StateVector::from_raw_unchecked(initial),
            target_state: StateVector::from_raw_unchecked(projected),
            overlap,
        })
    }

    /// Uniform initial superposition with the given targets; `x = sqrt(M/N)`.
    pub fn uniform(dim: usize, targets: &[usize]) -> Result<Self> {
        let init = StateVector::uniform(dim)?;
        Self::new(dim, targets, init.amps())
    }

    /// A problem realizing a prescribed overlap `x` with target `{0}`: the
    /// non-target weight is spread evenly over the remaining `N-1` states.
    pub fn with_overlap(dim: usize, x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(SearchError::OverlapOutOfRange(x));
        }
        if dim < 2 {
            return Err(SearchError::DimensionTooSmall(dim));
        }
        let rest = ((1.0 - x * x) / (dim - 1) as f64).sqrt();
        let mut amps = vec![Complex64::new(rest, 0.0); dim];
        amps[0] = Complex64::new(x, 0.0);
        Self::new(dim, &[0], &amps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn targets(&self) -> &BTreeSet<usize> {
        &self.targets
    }
    pub fn initial(&self) -> &StateVector {
        &self.initial
    }
    /// `|w>`: unit vector supported on the target indices.
    pub fn target_state(&self) -> &StateVector {
        &self.target_state
    }
    /// `x = <w|s>`, in `(0, 1)`.
    pub fn overlap(&self) -> f64 {
        self.overlap
    }

    /// `|r> = (|s> - x|w>) / sqrt(1 - x^2)`, the unit component of the initial
    /// state orthogonal to the target state.
    pub fn residual_state(&self) -> Vec<Complex64> {
        let x = self.overlap;
        let y = (1.0 - x * x).sqrt();
        self.initial.amps().iter().zip(self.target_state.amps()).map(|(s, w)| (s - w * x) / y).collect()
    }

    /// Total probability on the target indices.
    pub fn target_probability(&self, psi: &[Complex64]) -> f64 {
        self.targets.iter().map(|&i| psi[i].norm_sqr()).sum()
    }
}

pub fn make_problem(dim: usize, targets: &[usize], initial: &[Complex64]) -> Result<SearchProblem> {
    SearchProblem::new(dim, targets, initial)
}
