//! Time evolution under the search Hamiltonian.
//!
//! Two routes that share nothing beyond matrix construction:
//!
//! * the exact spectral propagator on the two-dimensional reduced space,
//!   `exp(-iHt) = e^{-iEqt} [cos(EDt) I - i t sinc(EDt) (H - Eq I)]`;
//! * an adaptive Dormand–Prince 5(4) integration of `i dpsi/dt = H psi` on the
//!   full `N`-dimensional space, used as the independent oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SearchError};
use crate::hamiltonian::{self, check_overlap, ReducedHamiltonian};
use crate::linalg::{self, DenseMatrix, Mat2};
use crate::types::{SearchParams, SearchProblem, StateVector, Tolerances};

/// Below this `|EDt|` the sinc factor switches to its series.
const SERIES_THRESHOLD: f64 = 1e-6;
/// Largest tolerated norm drift before renormalizing the oracle output.
pub const MAX_NORM_DRIFT: f64 = 1e-8;

/// Sampled target probability, with optional reduced amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub times: Vec<f64>,
    /// Raw probabilities; clamp only when writing output.
    pub probs: Vec<f64>,
    /// `(<w|psi>, <r|psi>)` per sample.
    pub amplitudes: Option<Vec<[Complex64; 2]>>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn clamped_probs(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.clamp(0.0, 1.0)).collect()
    }
}

fn sinc(theta: f64) -> f64 {
    if theta.abs() < SERIES_THRESHOLD {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    }
}

/// `exp(-i H t)` for a reduced Hamiltonian.
pub fn propagator_2x2(h: &ReducedHamiltonian, t: f64) -> Mat2 {
    let m = &h.m;
    // Half-trace and half-gap in energy units, read directly off the matrix.
    let half_trace = 0.5 * (m[0][0].re + m[1][1].re);
    let half_diff = 0.5 * (m[0][0].re - m[1][1].re);
    let gap = (half_diff * half_diff + m[0][1].norm_sqr()).sqrt();
    let theta = gap * t;
    let (cos, st) = (theta.cos(), t * sinc(theta));
    let phase = Complex64::from_polar(1.0, -half_trace * t);
    let minus_i = Complex64::new(0.0, -1.0);

    let k = [[Complex64::new(half_diff, 0.0), m[0][1]], [m[1][0], Complex64::new(-half_diff, 0.0)]];
    let mut u = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let diag = if i == j { cos } else { 0.0 };
            u[i][j] = phase * (Complex64::new(diag, 0.0) + minus_i * st * k[i][j]);
        }
    }
    u
}

/// `(<w|psi(t)>, <r|psi(t)>)` starting from `|s> = (x, sqrt(1-x^2))`.
pub fn evolve_reduced(params: &SearchParams, x: f64, t: f64) -> Result<(Complex64, Complex64)> {
    let h = hamiltonian::reduced_matrix(params, x)?;
    let u = propagator_2x2(&h, t);
    let s = [Complex64::new(x, 0.0), Complex64::new((1.0 - x * x).sqrt(), 0.0)];
    let [w, r] = linalg::mat2_apply(&u, s);
    Ok((w, r))
}

/// `|<w| e^{-iHt} |s>|^2`, exact.
pub fn success_probability(params: &SearchParams, x: f64, t: f64) -> Result<f64> {
    Ok(evolve_reduced(params, x, t)?.0.norm_sqr())
}

/// `steps` uniformly spaced samples on `[0, t_max]`.
pub fn probability_trace(params: &SearchParams, x: f64, t_max: f64, steps: usize) -> Result<Trace> {
    check_overlap(x)?;
    if steps < 2 {
        return Err(SearchError::InvalidArgument(format!("trace needs at least 2 steps, got {steps}")));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(SearchError::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let h = hamiltonian::reduced_matrix(params, x)?;
    let s = [Complex64::new(x, 0.0), Complex64::new((1.0 - x * x).sqrt(), 0.0)];
    let dt = t_max / (steps - 1) as f64;
    let mut times = Vec::with_capacity(steps);
    let mut probs = Vec::with_capacity(steps);
    let mut amps = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = if k + 1 == steps { t_max } else { k as f64 * dt };
        let v = linalg::mat2_apply(&propagator_2x2(&h, t), s);
        times.push(t);
        probs.push(v[0].norm_sqr());
        amps.push(v);
    }
    Ok(Trace { times, probs, amplitudes: Some(amps) })
}

/// Oracle trace: integrates the full space and projects onto `|w>` and `|r>`.
pub fn probability_trace_full(
    params: &SearchParams,
    prob: &SearchProblem,
    times: &[f64],
    tol: &Tolerances,
) -> Result<Trace> {
    let states = evolve_full_at(params, prob, times, tol)?;
    let w = prob.target_state().amps();
    let r = prob.residual_state();
    let mut probs = Vec::with_capacity(states.len());
    let mut amps = Vec::with_capacity(states.len());
    for psi in &states {
        let cw = linalg::inner(w, psi.amps());
        let cr = linalg::inner(&r, psi.amps());
        probs.push(prob.target_probability(psi.amps()));
        amps.push([cw, cr]);
    }
    Ok(Trace { times: times.to_vec(), probs, amplitudes: Some(amps) })
}

/// Step cap `pi / (10 E (|a| + |d| + 2r + 1))`.
pub fn max_step(params: &SearchParams) -> f64 {
    PI / (10.0 * params.energy() * (params.a().abs() + params.d().abs() + 2.0 * params.r() + 1.0))
}

/// Oracle evolution to a single time.
pub fn evolve_full(params: &SearchParams, prob: &SearchProblem, t: f64, tol: &Tolerances) -> Result<StateVector> {
    Ok(evolve_full_at(params, prob, &[t], tol)?.pop().expect("one output per time"))
}

/// Oracle evolution sampled at each of `times` (non-decreasing, `>= 0`).
pub fn evolve_full_at(
    params: &SearchParams,
    prob: &SearchProblem,
    times: &[f64],
    tol: &Tolerances,
) -> Result<Vec<StateVector>> {
    let h = hamiltonian::full_matrix(params, prob)?;
    let opts = OdeOptions { tol: tol.ode_tol, max_step: max_step(params), ..OdeOptions::default() };
    let out = integrate_schrodinger(&h, prob.initial().amps(), times, &opts)?;
    Ok(out.states)
}

/// Controls for [`integrate_schrodinger`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Max-norm local error per step.
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_step: 0.1, max_steps: 10_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeOutput {
    /// Renormalized states at the requested times.
    pub states: Vec<StateVector>,
    /// Largest `| |psi| - 1 |` seen at an output time, before renormalizing.
    pub max_drift: f64,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the stage
// nodes never enter.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// `out = -i H y`.
fn schrodinger_rhs(h: &DenseMatrix, y: &[Complex64], out: &mut [Complex64]) {
    h.mul_vec_into(y, out);
    for z in out.iter_mut() {
        *z = Complex64::new(z.im, -z.re);
    }
}

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = y[i];
        for (coef, k) in terms {
            acc += k[i] * (h * coef);
        }
        *o = acc;
    }
}

/// Integrates `i dpsi/dt = H psi` from `t = 0` and samples at `times`.
///
/// The fifth-order solution is propagated (local extrapolation); the
/// embedded fourth-order estimate drives step control in the max norm.
pub fn integrate_schrodinger(
    h: &DenseMatrix,
    psi0: &[Complex64],
    times: &[f64],
    opts: &OdeOptions,
) -> Result<OdeOutput> {
    let n = h.dim();
    if psi0.len() != n {
        return Err(SearchError::DimensionMismatch { expected: n, got: psi0.len() });
    }
    if let Some(&bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(SearchError::InvalidArgument(format!("sample time must be finite and >= 0, got {bad}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(SearchError::InvalidArgument("sample times must be non-decreasing".into()));
    }
    if !(opts.tol > 0.0 && opts.max_step > 0.0) {
        return Err(SearchError::InvalidArgument("integrator tolerance and step cap must be positive".into()));
    }

    let zero = Complex64::new(0.0, 0.0);
    let mut y = psi0.to_vec();
    let mut y_new = vec![zero; n];
    let mut tmp = vec![zero; n];
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| vec![zero; n]);
    schrodinger_rhs(h, &y, &mut k[0]);

    let mut t = 0.0f64;
    let mut step = opts.max_step * 0.1;
    let mut states = Vec::with_capacity(times.len());
    let mut max_drift = 0.0f64;
    let (mut accepted, mut rejected) = (0usize, 0usize);

    for &target in times {
        while t < target {
            if accepted + rejected >= opts.max_steps {
                return Err(SearchError::StepSizeUnderflow(t));
            }
            let remaining = target - t;
            let hit = step >= remaining;
            let hs = if hit { remaining } else { step };

            {
                let [k1, k2, k3, k4, k5, k6, k7] = &mut k;
                combine(&mut tmp, &y, hs, &[(A21, k1)]);
                schrodinger_rhs(h, &tmp, k2);
                combine(&mut tmp, &y, hs, &[(A31, k1), (A32, k2)]);
                schrodinger_rhs(h, &tmp, k3);
                combine(&mut tmp, &y, hs, &[(A41, k1), (A42, k2), (A43, k3)]);
                schrodinger_rhs(h, &tmp, k4);
                combine(&mut tmp, &y, hs, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
                schrodinger_rhs(h, &tmp, k5);
                combine(&mut tmp, &y, hs, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
                schrodinger_rhs(h, &tmp, k6);
                combine(&mut y_new, &y, hs, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
                schrodinger_rhs(h, &y_new, k7);
            }

            let mut err = 0.0f64;
            #[allow(clippy::needless_range_loop)]
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * hs;
                err = err.max(e.norm());
            }
            let ratio = err / opts.tol;

            if ratio <= 1.0 {
                t = if hit { target } else { t + hs };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                accepted += 1;
                let grow = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
                if !hit {
                    step = (hs * grow).min(opts.max_step);
                }
            } else {
                rejected += 1;
                step = hs * (0.9 * ratio.powf(-0.2)).clamp(0.2, 1.0);
                if step < 1e-14 * t.max(1.0) {
                    return Err(SearchError::StepSizeUnderflow(t));
                }
            }
        }

        let nrm = linalg::norm(&y);
        let drift = (nrm - 1.0).abs();
        if drift > MAX_NORM_DRIFT {
            return Err(SearchError::IntegratorDriftExceeded(drift));
        }
        max_drift = max_drift.max(drift);
        states.push(StateVector::from_raw_unchecked(y.iter().map(|z| z / nrm).collect()));
    }

    Ok(OdeOutput { states, max_drift, accepted, rejected })
}
