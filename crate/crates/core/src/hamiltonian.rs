//! Reduced (2x2) and full (N x N) matrix forms of the generalized search
//! Hamiltonian, its named special cases, and the perfect-search test.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SearchError};
use crate::linalg::{DenseMatrix, Mat2};
use crate::types::{SearchParams, SearchProblem, Tolerances};

/// Default cap on the dense full-space dimension.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// The Hamiltonian in the ordered basis `(|w>, |r>)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedHamiltonian {
    pub m: Mat2,
    pub params: SearchParams,
    pub overlap: f64,
}

impl ReducedHamiltonian {
    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `E * (|a| + |d| + r + 1)`: the magnitude against which entrywise
    /// residuals are judged.
    pub fn scale(&self) -> f64 {
        self.params.energy() * self.params.scale()
    }
}

/// `Ok` iff `0 < x < 1`.
pub fn check_overlap(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(SearchError::OverlapOutOfRange(x))
    }
}

/// Matrix of `H` on `span{|w>, |r>}` with `|s> = x|w> + sqrt(1-x^2)|r>`:
///
/// ```text
/// E [ a + (b+c)x + d x^2       (b + d x) sqrt(1-x^2) ]
///   [ (c + d x) sqrt(1-x^2)    d (1 - x^2)           ]
/// ```
pub fn reduced_matrix(params: &SearchParams, x: f64) -> Result<ReducedHamiltonian> {
    check_overlap(x)?;
    let e = params.energy();
    let (a, d) = (params.a(), params.d());
    let (b, c) = (params.b(), params.c());
    let y = (1.0 - x * x).sqrt();
    let m = [
        [(a + (b + c) * x + d * x * x) * e, (b + d * x) * y * e],
        [(c + d * x) * y * e, Complex64::new(d * (1.0 - x * x) * e, 0.0)],
    ];
    Ok(ReducedHamiltonian { m, params: *params, overlap: x })
}

/// `H = E (a w w^dagger + b w s^dagger + c s w^dagger + d s s^dagger)` as a
/// dense matrix in the computational basis.
pub fn full_matrix(params: &SearchParams, prob: &SearchProblem) -> Result<DenseMatrix> {
    full_matrix_capped(params, prob, DEFAULT_DIM_CAP)
}

pub fn full_matrix_capped(params: &SearchParams, prob: &SearchProblem, cap: usize) -> Result<DenseMatrix> {
    let dim = prob.dim();
    if dim > cap {
        return Err(SearchError::DimensionTooLarge { dim, cap });
    }
    let e = params.energy();
    let w = prob.target_state().amps();
    let s = prob.initial().amps();
    let mut h = DenseMatrix::zeros(dim);
    h.add_outer(Complex64::new(e * params.a(), 0.0), w, w);
    h.add_outer(params.b() * e, w, s);
    h.add_outer(params.c() * e, s, w);
    h.add_outer(Complex64::new(e * params.d(), 0.0), s, s);
    Ok(h)
}

/// `E(|w><w| + |s><s|)`.
pub fn farhi_params(energy: f64) -> Result<SearchParams> {
    SearchParams::new(energy, 1.0, 1.0, 0.0, 0.0)
}

/// `2iEx(|w><s| - |s><w|)`: `a = d = 0`, `r = 2x`, `phi = pi/2`.
pub fn fenner_params(energy: f64, x: f64) -> Result<SearchParams> {
    check_overlap(x)?;
    SearchParams::new(energy, 0.0, 0.0, 2.0 * x, PI / 2.0)
}

/// Coupling-only Hamiltonian `E r (e^{i phi}|w><s| + e^{-i phi}|s><w|)`.
pub fn new_params(energy: f64, r: f64, phi: f64) -> Result<SearchParams> {
    if r == 0.0 {
        return Err(SearchError::InvalidArgument("coupling-only Hamiltonian needs r > 0".into()));
    }
    SearchParams::new(energy, 0.0, 0.0, r, phi)
}

/// `E a (|w><w| + |s><s|) + E r (|w><s| + |s><w|)`; use `phi = pi` via
/// [`SearchParams::with_phi`] for the minus sign.
pub fn perfect_params(energy: f64, a: f64, r: f64) -> Result<SearchParams> {
    SearchParams::new(energy, a, a, r, 0.0)
}

/// `a = d` and `phi = n pi`, or `a = d` with vanishing coupling.
pub fn is_perfect(params: &SearchParams, tol: &Tolerances) -> bool {
    let (a, d) = (params.a(), params.d());
    let diagonal_equal = (a - d).abs() <= tol.phase_mod * (1.0 + a.abs() + d.abs());
    if !diagonal_equal {
        return false;
    }
    params.r() == 0.0 || params.phi().sin().abs() <= tol.phase_mod
}

/// Named members of the Hamiltonian family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Farhi,
    Fenner,
    Perfect,
    New,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Farhi, Preset::Fenner, Preset::Perfect, Preset::New];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Farhi => "farhi",
            Preset::Fenner => "fenner",
            Preset::Perfect => "perfect",
            Preset::New => "new",
        }
    }

    /// Default parameters; `x` is used only by `Fenner`.
    pub fn params(&self, energy: f64, x: f64) -> Result<SearchParams> {
        match self {
            Preset::Farhi => farhi_params(energy),
            Preset::Fenner => fenner_params(energy, x),
            Preset::Perfect => perfect_params(energy, 1.0, 1.0),
            Preset::New => new_params(energy, 1.0, 0.0),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SearchError::InvalidArgument(format!("unknown preset '{s}'")))
    }
}
