//! The verification suite behind `hsearch verify`: each criterion reports its
//! individual checks with the measured residual and the threshold used.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closedform;
use crate::error::{Result, SearchError};
use crate::evolution::{self, OdeOptions};
use crate::experiments::{self, Family, ScanConfig, TrialsConfig, DEFAULT_N_LIST};
use crate::hamiltonian::{self, farhi_params, fenner_params};
use crate::linalg::{self, mat2_adjoint, mat2_identity, mat2_max_diff, mat2_mul};
use crate::rng::{draw_unit_vector, seeded_rng};
use crate::types::{SearchParams, SearchProblem, Tolerances};

/// Seed of the random parameter grid used by the structural invariants.
pub const INVARIANT_SEED: u64 = 20_240_917;
/// Full-space dimension of the oracle in the perfect-search and arbitration criteria.
pub const ORACLE_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `value < threshold`; the threshold follows `--tolerance`.
    Residual,
    /// `lo <= value <= hi`; fixed.
    Bound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub passed: bool,
}

impl Check {
    fn residual(label: impl Into<String>, value: f64, threshold: f64, overrides: Option<f64>) -> Self {
        let hi = overrides.unwrap_or(threshold);
        Self { label: label.into(), kind: CheckKind::Residual, value, lo: 0.0, hi, passed: value < hi }
    }

    fn bound(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self { label: label.into(), kind: CheckKind::Bound, value, lo, hi, passed: (lo..=hi).contains(&value) }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            CheckKind::Residual => format!("{}: {:.3e} < {:.1e}", self.label, self.value, self.hi),
            CheckKind::Bound => format!("{}: {:.6} in [{}, {}]", self.label, self.value, self.lo, self.hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let worst =
            self.checks.iter().filter(|c| c.kind == CheckKind::Residual).map(|c| c.value).fold(0.0f64, f64::max);
        format!("[{status}] {}. {} ({}) max residual {:.3e}", self.id, self.title, self.key, worst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Criterion keys or numeric ids; empty runs everything.
    pub only: Vec<String>,
    /// Replaces every residual threshold.
    pub tolerance: Option<f64>,
    pub trial_seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { only: Vec::new(), tolerance: None, trial_seed: 42 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    /// Printed-formula arbitration scan, present when that criterion ran.
    pub discrepancy: Option<experiments::DiscrepancyReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(CriterionResult::passed)
    }
}

type CriterionFn = fn(&VerifyOptions, &mut Option<experiments::DiscrepancyReport>) -> Result<CriterionResult>;

const CRITERIA: [(u8, &str, CriterionFn); 9] = [
    (1, "perfect", perfect_search),
    (2, "near-perfect", near_perfect_bound),
    (3, "reductions", special_case_reductions),
    (4, "scaling", readout_scaling),
    (5, "consistency", reduction_consistency),
    (6, "initialization", initialization_independence),
    (7, "printed", printed_formula_arbitration),
    (8, "two-term", two_term_validity),
    (9, "invariants", structural_invariants),
];

/// Criterion keys in run order.
pub fn criterion_keys() -> impl Iterator<Item = &'static str> {
    CRITERIA.iter().map(|(_, k, _)| *k)
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    for sel in &opts.only {
        if !CRITERIA.iter().any(|(id, key, _)| sel == key || sel == &id.to_string()) {
            return Err(SearchError::InvalidArgument(format!("unknown criterion '{sel}'")));
        }
    }
    if let Some(t) = opts.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(SearchError::InvalidArgument(format!("tolerance must be positive, got {t}")));
        }
    }
    let mut discrepancy = None;
    let mut criteria = Vec::new();
    for (id, key, f) in CRITERIA {
        let selected = opts.only.is_empty() || opts.only.iter().any(|s| s == key || *s == id.to_string());
        if selected {
            criteria.push(f(opts, &mut discrepancy)?);
        }
    }
    Ok(VerifyReport { criteria, discrepancy })
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

/// The perfect-search grid: `a = d`, `r`, `phi in {0, pi}`, `E`.
pub fn perfect_grid() -> Vec<SearchParams> {
    let mut grid = Vec::new();
    for &a in &[0.5, 1.0, 2.0] {
        for &r in &[0.5, 1.0, 2.0] {
            for &phi in &[0.0, PI] {
                for &e in &[0.5, 1.0] {
                    grid.push(SearchParams::new(e, a, a, r, phi).expect("grid parameters are valid"));
                }
            }
        }
    }
    grid
}

pub const PERFECT_OVERLAPS: [f64; 5] = [0.05, 0.1, 0.3, 0.7, 0.9];

fn oracle_readout_probability(params: &SearchParams, x: f64, tol: &Tolerances) -> Result<f64> {
    let prob = SearchProblem::with_overlap(ORACLE_DIM, x)?;
    let t = closedform::readout_time(params, x)?;
    let psi = evolution::evolve_full(params, &prob, t, tol)?;
    Ok(prob.target_probability(psi.amps()))
}

fn perfect_search(opts: &VerifyOptions, _: &mut Option<experiments::DiscrepancyReport>) -> Result<CriterionResult> {
    let tol = Tolerances::default();
    let cells: Vec<(SearchParams, f64)> =
        perfect_grid().into_iter().flat_map(|p| PERFECT_OVERLAPS.map(|x| (p, x))).collect();
    let residuals = cells
        .par_iter()
        .map(|(p, x)| {
            let t = closedform::readout_time(p, *x)?;
            let exact = evolution::success_probability(p, *x, t)?;
            let oracle = oracle_readout_probability(p, *x, &tol)?;
            Ok(((exact - 1.0).abs(), (oracle - 1.0).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriterionResult {
        id: 1,
        key: "perfect",
        title: "Perfect search: a = d, phi = n pi gives P(T) = 1",
        checks: vec![
            Check::residual("exact |P(T) - 1|", max_of(residuals.iter().map(|r| r.0)), 1e-9, opts.tolerance),
            Check::residual(
                format!("oracle N={ORACLE_DIM} |P(T) - 1|"),
                max_of(residuals.iter().map(|r| r.1)),
                1e-8,
                opts.tolerance,
            ),
        ],
        notes: vec![format!("{} grid points", cells.len())],
    })
}

fn near_perfect_bound(opts: &VerifyOptions, _: &mut Option<experiments::DiscrepancyReport>) -> Result<CriterionResult> {
    let xs = [0.2, 0.1, 0.05, 0.025];
    let mut checks = Vec::new();
    for &phi in &[PI / 4.0, PI / 2.0] {
        let params = SearchParams::new(1.0, 1.0, 1.0, 1.0, phi)?;
        let report = closedform::pg_bound_check(&params, &xs)?;
        let mut worst_rel = 0.0f64;
        for row in &report.rows {
            let (_, d) = closedform::qd_values(&params, row.x)?;
            let predicted = params.r().powi(2) * phi.sin().powi(2) * (1.0 - row.x * row.x) / (d * d);
            worst_rel = worst_rel.max((row.normalized - predicted).abs() / predicted.abs());
        }
        checks.push(Check::residual(
            format!("phi={phi:.4}: relative error of (1-P(T))/x^2"),
            worst_rel,
            1e-6,
            opts.tolerance,
        ));
        let lo = report.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = report.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::bound(format!("phi={phi:.4}: min consecutive ratio"), lo, 0.25, 4.0));
        checks.push(Check::bound(format!("phi={phi:.4}: max consecutive ratio"), hi, 0.25, 4.0));
    }
    Ok(CriterionResult {
        id: 2,
        key: "near-perfect",
        title: "Near-perfect bound: a = d gives 1 - P(T) = O(x^2)",
        checks,
        notes: vec![],
    })
}

fn special_case_reductions(
    opts: &VerifyOptions,
    _: &mut Option<experiments::DiscrepancyReport>,
) -> Result<CriterionResult> {
    let tol = Tolerances::default();
    let xs = [0.05, 0.1, 0.25];
    let (mut farhi_p, mut farhi_t, mut farhi_oracle, mut fenner_p, mut fenner_oracle) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &e in &[0.5, 1.0] {
        let farhi = farhi_params(e)?;
        for &x in &xs {
            let t = closedform::readout_time(&farhi, x)?;
            let expected_t = PI / (2.0 * e * x);
            farhi_t = farhi_t.max((t - expected_t).abs() / expected_t);
            farhi_p = farhi_p.max((evolution::success_probability(&farhi, x, t)? - 1.0).abs());
            farhi_oracle = farhi_oracle.max((oracle_readout_probability(&farhi, x, &tol)? - 1.0).abs());

            let fenner = fenner_params(e, x)?;
            let t = closedform::readout_time(&fenner, x)?;
            let want = 1.0 - x * x;
            fenner_p = fenner_p.max((evolution::success_probability(&fenner, x, t)? - want).abs());
            fenner_oracle = fenner_oracle.max((oracle_readout_probability(&fenner, x, &tol)? - want).abs());
        }
    }
    Ok(CriterionResult {
        id: 3,
        key: "reductions",
        title: "Special cases: Farhi P(T) = 1, T = pi/(2Ex); Fenner P(T) = 1 - x^2",
        checks: vec![
            Check::residual("farhi |P(T) - 1|", farhi_p, 1e-9, opts.tolerance),
            Check::residual("farhi relative |T - pi/(2Ex)|", farhi_t, 1e-9, opts.tolerance),
            Check::residual("fenner |P(T) - (1 - x^2)|", fenner_p, 1e-9, opts.tolerance),
            Check::residual("farhi oracle |P(T) - 1|", farhi_oracle, 1e-8, opts.tolerance),
            Check::residual("fenner oracle |P(T) - (1 - x^2)|", fenner_oracle, 1e-8, opts.tolerance),
        ],
        notes: vec![],
    })
}

fn readout_scaling(_: &VerifyOptions, _: &mut Option<experiments::DiscrepancyReport>) -> Result<CriterionResult> {
    let farhi = experiments::scaling_study(Family::Farhi, &DEFAULT_N_LIST, 1.0)?;
    let fenner = experiments::scaling_study(Family::Fenner, &DEFAULT_N_LIST, 1.0)?;
    let fixed = experiments::scaling_study(Family::PerfectFixedR, &DEFAULT_N_LIST, 1.0)?;
    Ok(CriterionResult {
        id: 4,
        key: "scaling",
        title: "Read-out time scaling T = O(sqrt N)",
        checks: vec![
            Check::bound("farhi log-log slope", farhi.slope, 0.49, 0.51),
            Check::bound("fenner log-log slope", fenner.slope, 0.48, 0.52),
        ],
        notes: vec![format!("perfect_fixed_r slope {:.6} (fixed coupling gives T = O(1))", fixed.slope)],
    })
}

/// Oracle-vs-exact agreement over `20` samples per period.
pub fn consistency_cases(seed: u64) -> Result<Vec<(SearchParams, SearchProblem)>> {
    let params = [
        farhi_params(1.0)?,
        SearchParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?,
        SearchParams::new(1.0, 1.0, 1.0, 1.0, PI / 2.0)?,
        SearchParams::new(1.0, 0.5, 1.5, 0.7, PI / 3.0)?,
    ];
    let mut rng = seeded_rng(seed);
    let mut cases = Vec::new();
    for &n in &[16usize, 64, 256] {
        let uniform = SearchProblem::uniform(n, &[0])?;
        let targets: Vec<usize> = (0..(n / 16).max(1)).collect();
        let random = SearchProblem::new(n, &targets, &draw_unit_vector(&mut rng, n))?;
        for p in &params {
            cases.push((*p, uniform.clone()));
            cases.push((*p, random.clone()));
        }
    }
    Ok(cases)
}

fn reduction_consistency(
    opts: &VerifyOptions,
    _: &mut Option<experiments::DiscrepancyReport>,
) -> Result<CriterionResult> {
    let tol = Tolerances::default();
    let cases = consistency_cases(opts.trial_seed)?;
    let worst = cases
        .par_iter()
        .map(|(params, prob)| {
            let x = prob.overlap();
            let (_, d) = closedform::qd_values(params, x)?;
            let period = PI / (params.energy() * d);
            let times: Vec<f64> = (0..=20).map(|k| k as f64 * period / 20.0).collect();
            let states = evolution::evolve_full_at(params, prob, &times, &tol)?;
            let mut worst = 0.0f64;
            for (t, psi) in times.iter().zip(&states) {
                let exact = evolution::success_probability(params, x, *t)?;
                worst = worst.max((prob.target_probability(psi.amps()) - exact).abs());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CriterionResult {
        id: 5,
        key: "consistency",
        title: "Full-space oracle matches the reduced two-level evolution",
        checks: vec![Check::residual("max |P_oracle - P_exact|", max_of(worst), 1e-8, opts.tolerance)],
        notes: vec![format!("{} (params, problem) cases, 21 samples each", cases.len())],
    })
}

fn initialization_independence(
    opts: &VerifyOptions,
    _: &mut Option<experiments::DiscrepancyReport>,
) -> Result<CriterionResult> {
    let tol = Tolerances::default();
    let params = SearchParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?;
    let mut checks = Vec::new();
    for &n in &[16usize, 64, 256] {
        let mut ms = vec![1, n / 16, n / 4];
        ms.dedup();
        for m in ms {
            let cfg = TrialsConfig { dim: n, n_targets: m, trials: 50, seed: opts.trial_seed };
            let rep = experiments::random_init_trials(&cfg, &params, &tol)?;
            checks.push(Check::residual(format!("N={n} M={m}: 1 - min P(T)"), 1.0 - rep.min, 1e-8, opts.tolerance));
        }
    }
    Ok(CriterionResult {
        id: 6,
        key: "initialization",
        title: "Random initialization and multiple targets: perfect search still reaches P(T) = 1",
        checks,
        notes: vec![format!("50 trials per cell, seed {}", opts.trial_seed)],
    })
}

fn printed_formula_arbitration(
    opts: &VerifyOptions,
    discrepancy: &mut Option<experiments::DiscrepancyReport>,
) -> Result<CriterionResult> {
    let mut grid = perfect_grid();
    for &a in &[0.5, 1.0, 2.0] {
        for &r in &[0.5, 1.0, 2.0] {
            for &phi in &[PI / 4.0, PI / 2.0] {
                for &e in &[0.5, 1.0] {
                    grid.push(SearchParams::new(e, a, a, r, phi)?);
                }
            }
        }
    }
    let cfg = ScanConfig { oracle_dim: ORACLE_DIM, tol: Tolerances::default() };
    let scan = experiments::discrepancy_scan(&grid, &PERFECT_OVERLAPS, &[1.0], &cfg)?;

    let pair = |f: fn(&experiments::ScanPoint) -> Option<(f64, f64)>| {
        max_of(scan.points.iter().map(|p| f(p).map(|(a, b)| (a - b).abs()).unwrap_or(f64::NAN)))
    };
    let eq2_oracle = pair(|p| p.eq2.zip(p.oracle));
    let m_oracle = pair(|p| p.m_over_d_sq.zip(p.oracle));
    let eq2_m = pair(|p| p.eq2.zip(p.m_over_d_sq));

    let coeffs = closedform::coefficients_eq3(&SearchParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?);
    let binomial_u = [1.0, 4.0, 6.0, 4.0, 1.0, 0.0, 0.0];
    let binomial_l = [1.0, 4.0, 6.0, 4.0, 1.0];
    let binomial =
        max_of(coeffs.u.iter().zip(&binomial_u).chain(coeffs.l.iter().zip(&binomial_l)).map(|(a, b)| (a - b).abs()));

    let threshold = opts.tolerance.unwrap_or(1e-9);
    let mut notes = vec![format!(
        "channels at t = T: eq2-vs-oracle {eq2_oracle:.3e}, M-vs-oracle {m_oracle:.3e}, eq2-vs-M {eq2_m:.3e}, C_paper-vs-M {:.3e}",
        scan.cpaper_vs_m.max
    )];
    let mut checks = vec![
        Check::residual("|M|^2/D^2 vs oracle", m_oracle, 1e-9, opts.tolerance),
        Check::residual("binomial fixture coefficients", binomial, 1e-12, opts.tolerance),
    ];
    if eq2_oracle < threshold && eq2_m < threshold {
        checks.push(Check::residual("rational form vs oracle", eq2_oracle, 1e-9, opts.tolerance));
        checks.push(Check::residual("rational form vs |M|^2/D^2", eq2_m, 1e-9, opts.tolerance));
    } else {
        notes.push("printed coefficients deviate; passing on |M|^2/D^2 agreement, see discrepancy report".into());
    }
    *discrepancy = Some(scan);
    Ok(CriterionResult {
        id: 7,
        key: "printed",
        title: "Printed rational read-out probability vs |M|^2/D^2 vs oracle",
        checks,
        notes,
    })
}

fn two_term_validity(opts: &VerifyOptions, _: &mut Option<experiments::DiscrepancyReport>) -> Result<CriterionResult> {
    let cfg = ScanConfig::default();
    let xs = [0.1, 0.3, 0.7];
    let real_phase = [
        farhi_params(1.0)?,
        SearchParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?,
        SearchParams::new(1.0, 0.5, 1.5, 0.7, 0.0)?,
        SearchParams::new(0.5, 2.0, 0.3, 1.2, 0.0)?,
    ];
    let fractions: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
    let scan0 = experiments::discrepancy_scan(&real_phase, &xs, &fractions, &cfg)?;

    let quarter = [
        SearchParams::new(1.0, 1.0, 1.0, 1.0, PI / 2.0)?,
        SearchParams::new(1.0, 0.5, 1.5, 0.7, PI / 2.0)?,
        SearchParams::new(1.0, 0.0, 0.0, 0.6, PI / 2.0)?,
    ];
    let generic = [0.13, 0.37, 0.5, 0.81, 1.29, 1.77];
    let scan_generic = experiments::discrepancy_scan(&quarter, &xs, &generic, &cfg)?;
    let scan_readout = experiments::discrepancy_scan(&quarter, &xs, &[1.0], &cfg)?;

    let cross_mismatch = max_of(scan_generic.points.iter().map(|p| match (p.eq1, p.oracle, p.cross_term) {
        (Some(e), Some(o), Some(c)) => ((e - o).abs() - c.abs()).abs(),
        _ => f64::NAN,
    }));
    let largest_cross = max_of(scan_generic.points.iter().filter_map(|p| p.cross_term.map(f64::abs)));
    let errors = scan0.errors + scan_generic.errors + scan_readout.errors;
    let mut checks = vec![
        Check::residual("phi=0: |eq1 - oracle| over all t", scan0.eq1_vs_oracle.max, 1e-9, opts.tolerance),
        Check::residual("phi=pi/2: ||eq1 - oracle| - |interference term||", cross_mismatch, 1e-9, opts.tolerance),
        Check::residual("phi=pi/2, t=T: |eq1 - oracle|", scan_readout.eq1_vs_oracle.max, 1e-9, opts.tolerance),
    ];
    if errors > 0 {
        checks.push(Check::bound("scan points with errors", errors as f64, 0.0, 0.0));
    }
    Ok(CriterionResult {
        id: 8,
        key: "two-term",
        title: "Two-term probability: exact for phi = 0 or t = T, otherwise off by the interference term",
        checks,
        notes: vec![format!("largest interference term at generic t: {largest_cross:.3e}")],
    })
}

/// Eigenvalues of a 2x2 Hermitian matrix by a single Jacobi rotation,
/// ascending. Independent of the half-trace/half-gap route.
pub fn jacobi_eigenvalues(m: &linalg::Mat2) -> [f64; 2] {
    let (alpha, gamma) = (m[0][0].re, m[1][1].re);
    let beta = m[0][1].norm();
    let theta = 0.5 * (2.0 * beta).atan2(alpha - gamma);
    let (s, c) = theta.sin_cos();
    let l1 = alpha * c * c + 2.0 * beta * s * c + gamma * s * s;
    let l2 = alpha * s * s - 2.0 * beta * s * c + gamma * c * c;
    if l1 <= l2 {
        [l1, l2]
    } else {
        [l2, l1]
    }
}

/// One random sample for the structural invariants.
#[derive(Debug, Clone, Copy)]
pub struct InvariantSample {
    pub params: SearchParams,
    pub x: f64,
    pub t1: f64,
    pub t2: f64,
}

pub fn invariant_samples(seed: u64, count: usize) -> Vec<InvariantSample> {
    let mut rng = seeded_rng(seed);
    (0..count)
        .map(|_| {
            let params = SearchParams::new(
                rng.random_range(0.2..3.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(0.0..2.0),
                rng.random_range(-PI..2.0 * PI),
            )
            .expect("sampled parameters are valid");
            InvariantSample {
                params,
                x: rng.random_range(0.01..0.99),
                t1: rng.random_range(0.0..10.0),
                t2: rng.random_range(0.0..10.0),
            }
        })
        .collect()
}

fn structural_invariants(
    opts: &VerifyOptions,
    _: &mut Option<experiments::DiscrepancyReport>,
) -> Result<CriterionResult> {
    let samples = invariant_samples(INVARIANT_SEED, 500);
    let mut worst = [0.0f64; 8];
    for s in &samples {
        let p = &s.params;
        let h = hamiltonian::reduced_matrix(p, s.x)?;
        let scale = h.scale();
        let e = p.energy();

        let herm = (h.m[0][1] - h.m[1][0].conj()).norm().max(h.m[0][0].im.abs()).max(h.m[1][1].im.abs());
        worst[0] = worst[0].max(herm / scale);

        let want_trace = e * (p.a() + p.d() + 2.0 * p.r() * p.phi().cos() * s.x);
        worst[1] = worst[1].max((h.trace() - want_trace).norm() / scale);
        let want_det = e * e * (p.a() * p.d() - p.r() * p.r()) * (1.0 - s.x * s.x);
        worst[2] = worst[2].max((h.det() - want_det).norm() / (scale * scale));

        let u1 = evolution::propagator_2x2(&h, s.t1);
        let u2 = evolution::propagator_2x2(&h, s.t2);
        let u12 = evolution::propagator_2x2(&h, s.t1 + s.t2);
        worst[3] = worst[3].max(mat2_max_diff(&mat2_mul(&u1, &mat2_adjoint(&u1)), &mat2_identity()));
        let (w, r) = evolution::evolve_reduced(p, s.x, s.t1)?;
        worst[3] = worst[3].max(((w.norm_sqr() + r.norm_sqr()).sqrt() - 1.0).abs());
        worst[4] = worst[4].max(mat2_max_diff(&u12, &mat2_mul(&u2, &u1)));

        let s0 = [num_complex::Complex64::new(s.x, 0.0), num_complex::Complex64::new((1.0 - s.x * s.x).sqrt(), 0.0)];
        let energy = |v: [num_complex::Complex64; 2]| {
            let hv = linalg::mat2_apply(&h.m, v);
            (v[0].conj() * hv[0] + v[1].conj() * hv[1]).re
        };
        worst[5] = worst[5].max((energy([w, r]) - energy(s0)).abs() / scale);

        let (q, d) = closedform::qd_values(p, s.x)?;
        let eig = jacobi_eigenvalues(&h.m);
        let want = [e * (q - d), e * (q + d)];
        worst[6] = worst[6].max(((eig[0] - want[0]).abs().max((eig[1] - want[1]).abs())) / scale);
    }

    // Full-space hermiticity and pre-renormalization norm drift on a subset.
    let tol = Tolerances::default();
    for s in samples.iter().take(25) {
        let prob = SearchProblem::with_overlap(8, s.x)?;
        let h = hamiltonian::full_matrix(&s.params, &prob)?;
        worst[0] = worst[0].max(h.hermiticity_defect() / (s.params.energy() * s.params.scale()));
        let opts = OdeOptions { tol: tol.ode_tol, max_step: evolution::max_step(&s.params), ..OdeOptions::default() };
        let out = evolution::integrate_schrodinger(&h, prob.initial().amps(), &[s.t1], &opts)?;
        worst[7] = worst[7].max(out.max_drift);
    }

    let t = opts.tolerance;
    Ok(CriterionResult {
        id: 9,
        key: "invariants",
        title: "Structural invariants over a seeded random parameter grid",
        checks: vec![
            Check::residual("hermiticity / scale", worst[0], 1e-12, t),
            Check::residual("trace identity / scale", worst[1], 1e-12, t),
            Check::residual("determinant identity / scale^2", worst[2], 1e-12, t),
            Check::residual("unitarity of reduced propagator", worst[3], 1e-12, t),
            Check::residual("propagator composition", worst[4], 1e-11, t),
            Check::residual("energy conservation / scale", worst[5], 1e-9, t),
            Check::residual("eigenvalues E(q +- D) / scale", worst[6], 1e-10, t),
            Check::residual("oracle norm drift before renormalizing", worst[7], 1e-8, t),
        ],
        notes: vec![format!("500 samples, seed {INVARIANT_SEED}")],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_diagonal_and_known_spectrum() {
        let c = num_complex::Complex64::new;
        let m = [[c(2.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        assert_eq!(jacobi_eigenvalues(&m), [-1.0, 2.0]);
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(1.0, 0.0)]];
        let [l0, l1] = jacobi_eigenvalues(&m);
        assert!(l0.abs() < 1e-15 && (l1 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn selection_and_unknown_keys() {
        let opts = VerifyOptions { only: vec!["scaling".into(), "2".into()], ..VerifyOptions::default() };
        let rep = run(&opts).unwrap();
        assert_eq!(rep.criteria.iter().map(|c| c.id).collect::<Vec<_>>(), vec![2, 4]);
        assert!(rep.passed());
        let bad = VerifyOptions { only: vec!["grover".into()], ..VerifyOptions::default() };
        assert!(run(&bad).is_err());
    }

    #[test]
    fn over_tight_tolerance_fails_residual_checks_only() {
        let opts =
            VerifyOptions { only: vec!["near-perfect".into()], tolerance: Some(1e-30), ..VerifyOptions::default() };
        let rep = run(&opts).unwrap();
        let c = &rep.criteria[0];
        assert!(!c.passed());
        assert!(c.checks.iter().filter(|k| k.kind == CheckKind::Bound).all(|k| k.passed));
    }

    #[test]
    fn samples_are_reproducible() {
        let a = invariant_samples(5, 10);
        let b = invariant_samples(5, 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.params, y.params);
            assert_eq!((x.x, x.t1, x.t2), (y.x, y.t1, y.t2));
        }
    }
}
