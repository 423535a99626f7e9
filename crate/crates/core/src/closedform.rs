//! Analytic expressions for the two-level search dynamics.
//!
//! The printed forms (the bracketed `C`, the two-term probability, and the
//! degree-6/degree-4 rational function with coefficients `u` and `l`) are
//! implemented verbatim. Alongside them sits the transition-amplitude
//! numerator
//!
//! ```text
//! M = <w|(H/E - q)|s> = b + (a+d)x/2 + (c-b)x^2/2
//! ```
//!
//! which gives the exact amplitude
//! `<w|psi(t)> = e^{-iEqt} [x cos(EDt) - i sin(EDt) M/D]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SearchError};
use crate::evolution;
use crate::hamiltonian::check_overlap;
use crate::types::SearchParams;

const SINGULAR: f64 = 1e-14;

/// All closed-form quantities at one `(params, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub q: f64,
    pub d: f64,
    /// `None` when `|c + dx|` vanishes.
    pub c_paper: Option<Complex64>,
    pub m: Complex64,
    pub u: [f64; 7],
    pub l: [f64; 5],
}

impl ClosedForm {
    pub fn evaluate(params: &SearchParams, x: f64) -> Result<Self> {
        let (q, d) = qd_values(params, x)?;
        let c = match c_paper(params, x) {
            Ok(c) => Some(c),
            Err(SearchError::SingularDenominator(_)) => None,
            Err(e) => return Err(e),
        };
        let coeffs = coefficients_eq3(params);
        Ok(Self { q, d, c_paper: c, m: m_value(params, x)?, u: coeffs.u, l: coeffs.l })
    }
}

/// Half-trace `q` and half-gap `D` (units of `E`); eigenvalues are `E(q ± D)`.
pub fn qd_values(params: &SearchParams, x: f64) -> Result<(f64, f64)> {
    check_overlap(x)?;
    let (a, d) = (params.a(), params.d());
    let b_plus_c = (params.b() + params.c()).re;
    let bc = (params.b() * params.c()).re;
    let q = 0.5 * ((a + d) + b_plus_c * x);
    let disc = q * q - (a * d - bc) * (1.0 - x * x);
    let scale = params.scale();
    // Hermitian input guarantees disc >= 0; anything beyond rounding is a bug.
    assert!(disc >= -1e-12 * scale * scale, "negative discriminant {disc} for {params:?}, x = {x}");
    Ok((q, disc.max(0.0).sqrt()))
}

/// `M = r e^{i phi} + (a+d)x/2 - i r sin(phi) x^2`.
pub fn m_value(params: &SearchParams, x: f64) -> Result<Complex64> {
    check_overlap(x)?;
    let (b, c) = (params.b(), params.c());
    Ok(b + 0.5 * (params.a() + params.d()) * x + 0.5 * (c - b) * x * x)
}

/// The printed
/// `[(d(1-x^2) - q)^2 + x(c+dx)(d(1-x^2) - q) - D^2] / ((c+dx) D)`.
pub fn c_paper(params: &SearchParams, x: f64) -> Result<Complex64> {
    let (q, big_d) = qd_values(params, x)?;
    let d = params.d();
    let c = params.c();
    let c_dx = c + d * x;
    let denom = c_dx * big_d;
    if c_dx.norm() < SINGULAR || denom.norm() < SINGULAR {
        return Err(SearchError::SingularDenominator("printed C"));
    }
    let h = d * (1.0 - x * x) - q;
    let numer = Complex64::new(h * h, 0.0) + x * c_dx * h - big_d * big_d;
    Ok(numer / denom)
}

/// Which `|C|^2` feeds the two-term probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CSource {
    Paper,
    Derived,
}

/// `|C|^2` from the chosen source.
pub fn c_squared(params: &SearchParams, x: f64, which: CSource) -> Result<f64> {
    match which {
        CSource::Paper => Ok(c_paper(params, x)?.norm_sqr()),
        CSource::Derived => {
            let (_, d) = qd_values(params, x)?;
            if d < SINGULAR {
                return Err(SearchError::SingularDenominator("|M|^2/D^2"));
            }
            Ok(m_value(params, x)?.norm_sqr() / (d * d))
        }
    }
}

/// Two-term form `x^2 cos^2(EDt) + |C|^2 sin^2(EDt)`.
///
/// It omits the interference term [`interference_term`], so it is exact only
/// when `sin(phi) = 0` or at the read-out time.
pub fn probability_eq1(params: &SearchParams, x: f64, t: f64, which: CSource) -> Result<f64> {
    let (_, d) = qd_values(params, x)?;
    let c2 = c_squared(params, x, which)?;
    let theta = params.energy() * d * t;
    Ok(x * x * theta.cos().powi(2) + c2 * theta.sin().powi(2))
}

/// `2x cos(EDt) sin(EDt) Im(M)/D`, with `Im(M) = r sin(phi)(1 - x^2)`.
pub fn interference_term(params: &SearchParams, x: f64, t: f64) -> Result<f64> {
    let (_, d) = qd_values(params, x)?;
    if d < SINGULAR {
        return Err(SearchError::SingularDenominator("interference term"));
    }
    let theta = params.energy() * d * t;
    let im_m = m_value(params, x)?.im;
    Ok(2.0 * x * theta.cos() * theta.sin() * im_m / d)
}

/// Numerator and denominator coefficients of the rational read-out probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eq3Coefficients {
    pub u: [f64; 7],
    pub l: [f64; 5],
}

/// The eleven printed coefficients `u_0..u_6`, `l_0..l_4`.
pub fn coefficients_eq3(params: &SearchParams) -> Eq3Coefficients {
    let (a, d, r, phi) = (params.a(), params.d(), params.r(), params.phi());
    let (cp, sp, c2p) = (phi.cos(), phi.sin(), (2.0 * phi).cos());
    let (a2, d2, r2) = (a * a, d * d, r * r);
    let (d3, d4, r3, r4) = (d2 * d, d2 * d2, r2 * r, r2 * r2);

    let u = [
        r4,
        (a + 3.0 * d) * r3 * cp,
        0.25 * r2 * (a2 + 6.0 * a * d + 9.0 * d2 - 4.0 * r2 + 4.0 * (a * d + d2 + r2) * c2p),
        0.5 * d * r * cp * (a2 + 4.0 * a * d + 3.0 * d2 - 4.0 * r2 + 4.0 * r2 * c2p),
        0.25 * (a2 * d2 + 2.0 * a * d3 + d4 - 4.0 * d2 * r2 + 2.0 * r4 + (4.0 * d2 * r2 - 2.0 * r4) * c2p),
        2.0 * d * r3 * cp * sp * sp,
        d2 * r2 * sp * sp,
    ];
    let l = [
        0.25 * (a2 * r2 - 2.0 * a * d * r2 + d2 * r2 + 4.0 * r4),
        0.5 * r * (a2 * d - 2.0 * a * d2 + d3 + 2.0 * a * r2 + 6.0 * d * r2) * cp,
        0.25 * (a2 * d2 + d4 + 8.0 * d2 * r2 - 2.0 * r4 - 2.0 * a * (d3 - 4.0 * d * r2)
            + 2.0 * r2 * (2.0 * a * d + 2.0 * d2 + r2) * c2p),
        d * r * cp * (3.0 * a * d + d2 - r2 + r2 * c2p),
        0.5 * d2 * (2.0 * a * d - r2 + r2 * c2p),
    ];
    Eq3Coefficients { u, l }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `(sum u_i x^i) / (sum l_i x^i)`.
pub fn probability_eq2(params: &SearchParams, x: f64) -> Result<f64> {
    check_overlap(x)?;
    let Eq3Coefficients { u, l } = coefficients_eq3(params);
    let den = horner(&l, x);
    if den.abs() < SINGULAR {
        return Err(SearchError::SingularDenominator("rational read-out probability"));
    }
    Ok(horner(&u, x) / den)
}

/// `T = pi / (2 E D)`: first maximum of the target probability.
pub fn readout_time(params: &SearchParams, x: f64) -> Result<f64> {
    let (_, d) = qd_values(params, x)?;
    if d <= SINGULAR {
        return Err(SearchError::NoOscillation(d));
    }
    Ok(PI / (2.0 * params.energy() * d))
}

/// `1 - P(T) = r^2 sin^2(phi) x^2 (1 - x^2) / D^2`, exact when `a = d`.
pub fn near_perfect_deficit(params: &SearchParams, x: f64) -> Result<f64> {
    let (_, d) = qd_values(params, x)?;
    if d < SINGULAR {
        return Err(SearchError::SingularDenominator("near-perfect deficit"));
    }
    let rs = params.r() * params.phi().sin();
    Ok(rs * rs * x * x * (1.0 - x * x) / (d * d))
}

/// One row of the `1 - P(T) = O(x^2)` check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgBoundRow {
    pub x: f64,
    pub readout_time: f64,
    pub probability: f64,
    pub deficit: f64,
    /// `(1 - P(T)) / x^2`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PgBoundReport {
    pub rows: Vec<PgBoundRow>,
    /// Ratios of consecutive `normalized` values.
    pub ratios: Vec<f64>,
    /// Every deficit below 1e-12, so the ratio test is vacuous.
    pub vacuous: bool,
    pub bounded: bool,
}

/// Evaluates `(1 - P(T))/x^2` along `xs` (decreasing toward 0) using exact
/// evolution, and checks that consecutive ratios stay within `[1/4, 4]`.
pub fn pg_bound_check(params: &SearchParams, xs: &[f64]) -> Result<PgBoundReport> {
    let (a, d) = (params.a(), params.d());
    if (a - d).abs() > 1e-12 * (1.0 + a.abs() + d.abs()) {
        return Err(SearchError::InvalidArgument(format!("bound check needs a = d, got a = {a}, d = {d}")));
    }
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let t = readout_time(params, x)?;
        let p = evolution::success_probability(params, x, t)?;
        let deficit = 1.0 - p;
        rows.push(PgBoundRow { x, readout_time: t, probability: p, deficit, normalized: deficit / (x * x) });
    }
    let vacuous = rows.iter().all(|row| row.deficit.abs() < 1e-12);
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].normalized / w[0].normalized).collect();
    let bounded = vacuous || ratios.iter().all(|r| (0.25..=4.0).contains(r));
    Ok(PgBoundReport { rows, ratios, vacuous, bounded })
}
