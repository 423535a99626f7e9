//! Reproducible experiments: phase sweeps, read-out time scaling, randomized
//! multi-target trials and the printed-formula discrepancy scan.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::closedform::{self, CSource};
use crate::error::{Result, SearchError};
use crate::evolution;
use crate::hamiltonian::{farhi_params, fenner_params, new_params, perfect_params};
use crate::rng::{draw_unit_vector, seeded_rng};
use crate::types::{SearchParams, SearchProblem, Tolerances};

/// Read-out probability and time along one parameter axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub axis: String,
    pub values: Vec<f64>,
    /// Clamped to `[0, 1]`.
    pub probabilities: Vec<f64>,
    pub raw_probabilities: Vec<f64>,
    pub readout_times: Vec<f64>,
    pub base: SearchParams,
    pub overlap: f64,
    /// For `a = d`: whether `P(T)` is non-increasing over the grid points in
    /// `[0, pi/2]`. `None` otherwise.
    pub monotone_to_half_pi: Option<bool>,
}

/// `P(T)` for each phase in `phi_grid`, other parameters from `base`.
pub fn phase_sweep(base: &SearchParams, x: f64, phi_grid: &[f64]) -> Result<SweepReport> {
    if phi_grid.is_empty() {
        return Err(SearchError::InvalidArgument("phase grid is empty".into()));
    }
    let mut raw = Vec::with_capacity(phi_grid.len());
    let mut times = Vec::with_capacity(phi_grid.len());
    for &phi in phi_grid {
        let params = base.with_phi(phi)?;
        let t = closedform::readout_time(&params, x)?;
        raw.push(evolution::success_probability(&params, x, t)?);
        times.push(t);
    }

    let monotone = if base.a() == base.d() {
        let mut first_quadrant: Vec<(f64, f64)> = phi_grid
            .iter()
            .zip(&raw)
            .filter(|(phi, _)| (0.0..=PI / 2.0 + 1e-12).contains(*phi))
            .map(|(&phi, &p)| (phi, p))
            .collect();
        first_quadrant.sort_by(|a, b| a.0.total_cmp(&b.0));
        (first_quadrant.len() >= 2).then(|| first_quadrant.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12))
    } else {
        None
    };

    Ok(SweepReport {
        axis: "phi".into(),
        values: phi_grid.to_vec(),
        probabilities: raw.iter().map(|p| p.clamp(0.0, 1.0)).collect(),
        raw_probabilities: raw,
        readout_times: times,
        base: *base,
        overlap: x,
        monotone_to_half_pi: monotone,
    })
}

/// Hamiltonian families for the read-out time scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Farhi,
    Fenner,
    /// `a = d = 1`, `r = 1`, `phi = 0`.
    PerfectFixedR,
    /// `a = d = 0`, `r = 1`, `phi = 0`.
    New,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Farhi, Family::Fenner, Family::PerfectFixedR, Family::New];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Farhi => "farhi",
            Family::Fenner => "fenner",
            Family::PerfectFixedR => "perfect_fixed_r",
            Family::New => "new",
        }
    }

    pub fn params(&self, energy: f64, x: f64) -> Result<SearchParams> {
        match self {
            Family::Farhi => farhi_params(energy),
            Family::Fenner => fenner_params(energy, x),
            Family::PerfectFixedR => perfect_params(energy, 1.0, 1.0),
            Family::New => new_params(energy, 1.0, 0.0),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SearchError::InvalidArgument(format!("unknown family '{s}'")))
    }
}

/// Default dimension list for scaling studies.
pub const DEFAULT_N_LIST: [usize; 6] = [4, 16, 64, 256, 1024, 4096];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub family: Family,
    pub energy: f64,
    pub n_values: Vec<usize>,
    pub overlaps: Vec<f64>,
    pub readout_times: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

/// Ordinary least squares `y = slope * x + intercept`; returns the RMS residual too.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Closed-form read-out time `T(N)` with uniform initialization `x = 1/sqrt(N)`,
/// and its log-log slope.
pub fn scaling_study(family: Family, n_list: &[usize], energy: f64) -> Result<ScalingReport> {
    if n_list.len() < 3 {
        return Err(SearchError::InvalidArgument("scaling study needs at least 3 dimensions".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n < 4) {
        return Err(SearchError::InvalidArgument(format!("dimension {n} below 4")));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SearchError::InvalidArgument("dimensions must be strictly increasing".into()));
    }
    let mut overlaps = Vec::with_capacity(n_list.len());
    let mut times = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let x = 1.0 / (n as f64).sqrt();
        let params = family.params(energy, x)?;
        overlaps.push(x);
        times.push(closedform::readout_time(&params, x)?);
    }
    let log_n: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let log_t: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let (slope, intercept, residual) = least_squares(&log_n, &log_t);
    Ok(ScalingReport {
        family,
        energy,
        n_values: n_list.to_vec(),
        overlaps,
        readout_times: times,
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialsConfig {
    pub dim: usize,
    /// Targets are `{0, .., n_targets - 1}`.
    pub n_targets: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub overlap: f64,
    pub readout_time: f64,
    /// Target-subspace probability at `T` from the full-space oracle.
    pub probability: f64,
    /// `|M|^2 / D^2` at this trial's overlap.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialsReport {
    pub config: TrialsConfig,
    pub params: SearchParams,
    pub rows: Vec<TrialRow>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Initial vectors discarded for zero target overlap.
    pub redraws: usize,
}

const MAX_REDRAWS: usize = 100;

/// Random-initialization, multi-target search trials checked by the oracle.
///
/// Initial vectors are drawn sequentially from the seeded stream; the
/// evolutions then run in parallel and are reported in trial order.
pub fn random_init_trials(cfg: &TrialsConfig, params: &SearchParams, tol: &Tolerances) -> Result<TrialsReport> {
    if cfg.n_targets < 1 || cfg.n_targets >= cfg.dim {
        return Err(SearchError::InvalidArgument(format!(
            "need 1 <= targets < N, got {} targets for N = {}",
            cfg.n_targets, cfg.dim
        )));
    }
    if cfg.trials < 1 {
        return Err(SearchError::InvalidArgument("need at least one trial".into()));
    }
    let targets: Vec<usize> = (0..cfg.n_targets).collect();
    let mut rng = seeded_rng(cfg.seed);
    let mut problems = Vec::with_capacity(cfg.trials);
    let mut redraws = 0;
    for _ in 0..cfg.trials {
        let mut attempts = 0;
        loop {
            let v = draw_unit_vector(&mut rng, cfg.dim);
            match SearchProblem::new(cfg.dim, &targets, &v) {
                Ok(p) => {
                    problems.push(p);
                    break;
                }
                Err(SearchError::ZeroOverlap(_) | SearchError::InitialInsideTargets(_)) if attempts < MAX_REDRAWS => {
                    attempts += 1;
                    redraws += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let rows = problems
        .par_iter()
        .enumerate()
        .map(|(trial, prob)| {
            let x = prob.overlap();
            let t = closedform::readout_time(params, x)?;
            let psi = evolution::evolve_full(params, prob, t, tol)?;
            Ok(TrialRow {
                trial,
                overlap: x,
                readout_time: t,
                probability: prob.target_probability(psi.amps()),
                predicted: closedform::c_squared(params, x, CSource::Derived)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let probs = rows.iter().map(|r| r.probability);
    let min = probs.clone().fold(f64::INFINITY, f64::min);
    let max = probs.clone().fold(f64::NEG_INFINITY, f64::max);
    let mean = probs.sum::<f64>() / rows.len() as f64;
    Ok(TrialsReport { config: *cfg, params: *params, rows, min, max, mean, redraws })
}

/// Oracle settings for [`discrepancy_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Full-space dimension used by the oracle (target `{0}`).
    pub oracle_dim: usize,
    pub tol: Tolerances,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { oracle_dim: 16, tol: Tolerances::default() }
    }
}

/// One `(params, x, t)` point of the scan. `t = t_fraction * T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPoint {
    pub params: SearchParams,
    pub x: f64,
    pub t_fraction: f64,
    pub t: f64,
    pub oracle: Option<f64>,
    pub exact: Option<f64>,
    pub eq1: Option<f64>,
    /// Only at `t_fraction == 1`.
    pub eq2: Option<f64>,
    pub c_paper_sq: Option<f64>,
    pub m_over_d_sq: Option<f64>,
    pub cross_term: Option<f64>,
    pub eq1_vs_oracle: Option<f64>,
    pub eq2_vs_oracle: Option<f64>,
    pub cpaper_vs_m: Option<f64>,
    pub exact_vs_oracle: Option<f64>,
    /// `|eq1 - oracle + cross_term|`: what the interference term fails to explain.
    pub eq1_unexplained: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelStats {
    pub count: usize,
    pub max: f64,
    pub mean: f64,
}

impl ChannelStats {
    fn from_values(values: impl Iterator<Item = f64>) -> Self {
        let (mut count, mut max, mut sum) = (0usize, 0.0f64, 0.0);
        for v in values {
            count += 1;
            max = max.max(v);
            sum += v;
        }
        Self { count, max, mean: if count > 0 { sum / count as f64 } else { 0.0 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    pub description: String,
    pub config: ScanConfig,
    pub points: Vec<ScanPoint>,
    pub eq1_vs_oracle: ChannelStats,
    pub eq2_vs_oracle: ChannelStats,
    pub cpaper_vs_m: ChannelStats,
    pub exact_vs_oracle: ChannelStats,
    pub eq1_unexplained: ChannelStats,
    pub errors: usize,
}

/// Arbitrates the printed formulas against the full-space oracle over the
/// product grid `param_grid x x_grid x t_fractions`; `t_fractions` are in
/// units of the read-out time. Failures are recorded per point.
pub fn discrepancy_scan(
    param_grid: &[SearchParams],
    x_grid: &[f64],
    t_fractions: &[f64],
    cfg: &ScanConfig,
) -> Result<DiscrepancyReport> {
    if param_grid.is_empty() || x_grid.is_empty() || t_fractions.is_empty() {
        return Err(SearchError::InvalidArgument("discrepancy scan grids must be non-empty".into()));
    }
    if t_fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(SearchError::InvalidArgument("time fractions must be finite and >= 0".into()));
    }
    let cells: Vec<(SearchParams, f64)> =
        param_grid.iter().flat_map(|p| x_grid.iter().map(move |&x| (*p, x))).collect();

    let points: Vec<ScanPoint> =
        cells.par_iter().flat_map_iter(|(params, x)| scan_cell(params, *x, t_fractions, cfg)).collect();

    let channel = |f: fn(&ScanPoint) -> Option<f64>| ChannelStats::from_values(points.iter().filter_map(f));
    Ok(DiscrepancyReport {
        description: format!(
            "{} parameter sets x {} overlaps x {} time fractions; oracle N = {}",
            param_grid.len(),
            x_grid.len(),
            t_fractions.len(),
            cfg.oracle_dim
        ),
        config: *cfg,
        eq1_vs_oracle: channel(|p| p.eq1_vs_oracle),
        eq2_vs_oracle: channel(|p| p.eq2_vs_oracle),
        cpaper_vs_m: channel(|p| p.cpaper_vs_m),
        exact_vs_oracle: channel(|p| p.exact_vs_oracle),
        eq1_unexplained: channel(|p| p.eq1_unexplained),
        errors: points.iter().filter(|p| p.error.is_some()).count(),
        points,
    })
}

fn scan_cell(params: &SearchParams, x: f64, fractions: &[f64], cfg: &ScanConfig) -> Vec<ScanPoint> {
    let blank = |frac: f64, t: f64, err: String| ScanPoint {
        params: *params,
        x,
        t_fraction: frac,
        t,
        oracle: None,
        exact: None,
        eq1: None,
        eq2: None,
        c_paper_sq: None,
        m_over_d_sq: None,
        cross_term: None,
        eq1_vs_oracle: None,
        eq2_vs_oracle: None,
        cpaper_vs_m: None,
        exact_vs_oracle: None,
        eq1_unexplained: None,
        error: Some(err),
    };
    let readout = match closedform::readout_time(params, x) {
        Ok(t) => t,
        Err(e) => return fractions.iter().map(|&f| blank(f, f64::NAN, e.to_string())).collect(),
    };

    // Oracle at every requested time in one integration.
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&i, &j| fractions[i].total_cmp(&fractions[j]));
    let sorted_times: Vec<f64> = order.iter().map(|&i| fractions[i] * readout).collect();
    let oracle: std::result::Result<Vec<f64>, String> = SearchProblem::with_overlap(cfg.oracle_dim, x)
        .and_then(|prob| {
            let states = evolution::evolve_full_at(params, &prob, &sorted_times, &cfg.tol)?;
            Ok(states.iter().map(|s| prob.target_probability(s.amps())).collect())
        })
        .map_err(|e| e.to_string());
    let mut oracle_by_input = vec![None; fractions.len()];
    if let Ok(values) = &oracle {
        for (k, &i) in order.iter().enumerate() {
            oracle_by_input[i] = Some(values[k]);
        }
    }

    let c_paper_sq = closedform::c_squared(params, x, CSource::Paper).ok();
    let m_over_d_sq = closedform::c_squared(params, x, CSource::Derived).ok();
    let eq2_value = closedform::probability_eq2(params, x).ok();

    fractions
        .iter()
        .enumerate()
        .map(|(i, &frac)| {
            let t = frac * readout;
            let oracle_p = oracle_by_input[i];
            let exact = evolution::success_probability(params, x, t).ok();
            let eq1 = closedform::probability_eq1(params, x, t, CSource::Derived).ok();
            let cross = closedform::interference_term(params, x, t).ok();
            let eq2 = if frac == 1.0 { eq2_value } else { None };
            let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| (a - b).abs());
            ScanPoint {
                params: *params,
                x,
                t_fraction: frac,
                t,
                oracle: oracle_p,
                exact,
                eq1,
                eq2,
                c_paper_sq,
                m_over_d_sq,
                cross_term: cross,
                eq1_vs_oracle: diff(eq1, oracle_p),
                eq2_vs_oracle: diff(eq2, oracle_p),
                cpaper_vs_m: diff(c_paper_sq, m_over_d_sq),
                exact_vs_oracle: diff(exact, oracle_p),
                eq1_unexplained: eq1.zip(oracle_p).zip(cross).map(|((e, o), c)| (e - o + c).abs()),
                error: oracle.as_ref().err().cloned(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(e: f64, a: f64, d: f64, r: f64, phi: f64) -> SearchParams {
        SearchParams::new(e, a, d, r, phi).unwrap()
    }

    #[test]
    fn phase_sweep_default_fixture() {
        let rep = phase_sweep(&p(1.0, 1.0, 1.0, 1.0, 0.0), 0.1, &[0.0, PI / 2.0, PI]).unwrap();
        let want = [1.0, 0.9901, 1.0];
        for (got, want) in rep.probabilities.iter().zip(&want) {
            assert!((got - want).abs() < 1e-9);
        }
        assert_eq!(rep.monotone_to_half_pi, Some(true));
    }

    #[test]
    fn phase_sweep_zero_coupling_is_flat() {
        let grid: Vec<f64> = (0..9).map(|k| k as f64 * PI / 4.0).collect();
        let rep = phase_sweep(&p(1.0, 1.0, 1.0, 0.0, 0.0), 0.2, &grid).unwrap();
        for v in &rep.raw_probabilities {
            assert!((v - rep.raw_probabilities[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_sweep_perfect_endpoints() {
        let grid: Vec<f64> = [-1.0, 0.0, 1.0, 2.0].iter().map(|n| n * PI).collect();
        let rep = phase_sweep(&p(1.0, 0.5, 0.5, 2.0, 0.0), 0.3, &grid).unwrap();
        assert!(rep.raw_probabilities.iter().all(|v| (v - 1.0).abs() < 1e-9));
        assert!(phase_sweep(&p(1.0, 0.5, 0.5, 2.0, 0.0), 0.3, &[]).is_err());
    }

    #[test]
    fn least_squares_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 2.0).collect();
        let (s, i, r) = least_squares(&xs, &ys);
        assert!((s - 0.5).abs() < 1e-15 && (i + 2.0).abs() < 1e-15 && r < 1e-15);
    }

    #[test]
    fn scaling_slopes() {
        let farhi = scaling_study(Family::Farhi, &DEFAULT_N_LIST, 1.0).unwrap();
        assert!((farhi.slope - 0.5).abs() < 1e-12);
        let fenner = scaling_study(Family::Fenner, &DEFAULT_N_LIST, 1.0).unwrap();
        assert!((fenner.slope - 0.5).abs() < 0.02);
        let new = scaling_study(Family::New, &DEFAULT_N_LIST, 1.0).unwrap();
        assert!(new.slope.abs() < 1e-12);
        // T = pi / (2 (1 + 1/sqrt N)) still drifts slightly over this range.
        let perfect = scaling_study(Family::PerfectFixedR, &DEFAULT_N_LIST, 1.0).unwrap();
        assert!((perfect.slope - 0.053_257_68).abs() < 1e-7);
        assert!(scaling_study(Family::Farhi, &[4, 16], 1.0).is_err());
        assert!(scaling_study(Family::Farhi, &[2, 16, 64], 1.0).is_err());
        assert!(scaling_study(Family::Farhi, &[16, 4, 64], 1.0).is_err());
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = TrialsConfig { dim: 16, n_targets: 2, trials: 5, seed: 11 };
        let params = p(1.0, 1.0, 1.0, 1.0, PI / 2.0);
        let a = random_init_trials(&cfg, &params, &Tolerances::default()).unwrap();
        let b = random_init_trials(&cfg, &params, &Tolerances::default()).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert!((row.probability - row.predicted).abs() < 1e-8);
        }
        assert!(random_init_trials(&TrialsConfig { n_targets: 16, ..cfg }, &params, &Tolerances::default()).is_err());
    }

    #[test]
    fn scan_records_singular_points_without_aborting() {
        let grid = [p(1.0, 0.0, 0.0, 0.0, 0.0), p(1.0, 1.0, 1.0, 1.0, 0.0)];
        let rep = discrepancy_scan(&grid, &[0.3], &[0.5, 1.0], &ScanConfig::default()).unwrap();
        assert_eq!(rep.points.len(), 4);
        assert_eq!(rep.errors, 2);
        assert!(rep.exact_vs_oracle.max < 1e-8);
    }
}
