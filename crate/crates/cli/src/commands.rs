use std::f64::consts::PI;

use hsearch_core::evolution::probability_trace_full;
use hsearch_core::experiments::DEFAULT_N_LIST;
use hsearch_core::verify::{self, VerifyOptions};
use hsearch_core::{
    check_overlap, evolve_full, phase_sweep, probability_trace, random_init_trials, readout_time, scaling_study,
    success_probability, Complex64, Family, Preset, SearchParams, SearchProblem, Tolerances, TrialsConfig,
};
use serde::Serialize;

use crate::output::{emit, fmt_g, render_json, Meta, Table};
use crate::settings::{List, Resolver};
use crate::{
    CliError, Format, IoArgs, ParamArgs, ProblemArgs, ReadoutArgs, ScalingArgs, SimulateArgs, SweepArgs, TrialsArgs,
    VerifyArgs,
};

const DEFAULT_STEPS: usize = 201;
const DEFAULT_SEED: u64 = 42;

enum Problem {
    Reduced(f64),
    Full { n: usize, targets: usize, problem: SearchProblem },
}

impl Problem {
    fn overlap(&self) -> f64 {
        match self {
            Problem::Reduced(x) => *x,
            Problem::Full { problem, .. } => problem.overlap(),
        }
    }

    fn describe(&self, meta: &mut Meta) {
        match self {
            Problem::Reduced(x) => meta.num("overlap", *x),
            Problem::Full { n, targets, problem } => {
                meta.push("n", n.to_string());
                meta.push("targets", targets.to_string());
                meta.num("overlap", problem.overlap());
            }
        }
    }

    fn full(&self, what: &str) -> Result<&SearchProblem, CliError> {
        match self {
            Problem::Full { problem, .. } => Ok(problem),
            Problem::Reduced(_) => Err(CliError::Usage(format!("{what} needs --n (and optionally --targets)"))),
        }
    }
}

fn resolve_problem(res: &Resolver, args: &ProblemArgs) -> Result<Problem, CliError> {
    // Whichever of overlap / n is given on the command line masks the other in the config.
    let (overlap, n) = if args.overlap.is_some() || args.n.is_some() {
        (args.overlap, args.n)
    } else {
        (res.config_value("overlap")?, res.config_value("n")?)
    };
    let targets: Option<usize> = res.get("targets", args.targets)?;
    match (overlap, n) {
        (Some(_), Some(_)) => Err(CliError::Usage("--overlap and --n are mutually exclusive".into())),
        (Some(x), None) => {
            if targets.is_some() {
                return Err(CliError::Usage("--targets needs --n".into()));
            }
            check_overlap(x)?;
            Ok(Problem::Reduced(x))
        }
        (None, Some(n)) => {
            let k = targets.unwrap_or(1);
            let idx: Vec<usize> = (0..k).collect();
            let problem = SearchProblem::uniform(n, &idx)?;
            Ok(Problem::Full { n, targets: k, problem })
        }
        (None, None) => Err(CliError::Usage("specify --overlap or --n".into())),
    }
}

/// Preset (if any) supplies defaults; explicit coefficients override it.
fn resolve_params(
    res: &Resolver,
    args: &ParamArgs,
    x: Option<f64>,
) -> Result<(Option<Preset>, SearchParams), CliError> {
    let energy = res.get("energy", args.energy)?.unwrap_or(1.0);
    let preset: Option<Preset> = res.get("preset", args.preset)?;
    let base = match preset {
        Some(Preset::Fenner) => {
            let x = x.ok_or_else(|| CliError::Usage("the fenner preset needs a fixed overlap".into()))?;
            Preset::Fenner.params(energy, x)?
        }
        Some(p) => p.params(energy, 0.5)?,
        None => SearchParams::new(energy, 0.0, 0.0, 0.0, 0.0)?,
    };
    let params = SearchParams::new(
        energy,
        res.get("a", args.a)?.unwrap_or(base.a()),
        res.get("d", args.d)?.unwrap_or(base.d()),
        res.get("r", args.r)?.unwrap_or(base.r()),
        res.get("phi", args.phi)?.unwrap_or(base.phi()),
    )?;
    Ok((preset, params))
}

fn describe_params(meta: &mut Meta, preset: Option<Preset>, p: &SearchParams) {
    if let Some(preset) = preset {
        meta.push("preset", preset.name());
    }
    meta.num("energy", p.energy());
    meta.num("a", p.a());
    meta.num("d", p.d());
    meta.num("r", p.r());
    meta.num("phi", p.phi());
}

fn tolerances(res: &Resolver, flag: Option<f64>, meta: &mut Meta) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Some(t) = res.get("ode-tol", flag)? {
        tol.ode_tol = t;
    }
    tol.validate()?;
    meta.num("ode-tol", tol.ode_tol);
    Ok(tol)
}

fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Usage(format!("need at least 2 steps, got {steps}")));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Usage(format!("t-max must be positive, got {t_max}")));
    }
    let dt = t_max / (steps - 1) as f64;
    Ok((0..steps).map(|k| if k + 1 == steps { t_max } else { k as f64 * dt }).collect())
}

fn format_of(res: &Resolver, io: &IoArgs) -> Result<Format, CliError> {
    Ok(res.get("format", io.format)?.unwrap_or(Format::Csv))
}

fn finish<T: Serialize>(format: Format, table: Table, meta: &Meta, result: &T, io: &IoArgs) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => table.render(),
        Format::Json => render_json(meta, result)?,
    };
    emit(&text, io.out.as_deref())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.io.config.as_deref())?;
    let format = format_of(&res, &args.io)?;
    let problem = resolve_problem(&res, &args.problem)?;
    let x = problem.overlap();
    let (preset, params) = resolve_params(&res, &args.params, Some(x))?;
    let oracle = res.switch("oracle", args.oracle)?;
    let steps = res.get("steps", args.steps)?.unwrap_or(DEFAULT_STEPS);
    let t_max = match res.get("t-max", args.t_max)? {
        Some(t) => t,
        None => 2.0 * readout_time(&params, x)?,
    };
    let times = time_grid(t_max, steps)?;

    let mut meta = Meta::new("simulate");
    describe_params(&mut meta, preset, &params);
    problem.describe(&mut meta);
    meta.num("t-max", t_max);
    meta.push("steps", steps.to_string());
    meta.push("route", if oracle { "oracle" } else { "exact" });
    let trace = if oracle {
        let tol = tolerances(&res, args.ode_tol, &mut meta)?;
        probability_trace_full(&params, problem.full("--oracle")?, &times, &tol)?
    } else {
        probability_trace(&params, x, t_max, steps)?
    };

    let mut table = Table::new(meta.clone(), &["t", "P", "re_w", "im_w", "re_r", "im_r"]);
    let zero = [Complex64::new(0.0, 0.0); 2];
    let amps = trace.amplitudes.as_deref().unwrap_or(&[]);
    for (i, (t, p)) in trace.times.iter().zip(trace.clamped_probs()).enumerate() {
        let [w, r] = amps.get(i).copied().unwrap_or(zero);
        table.row(vec![fmt_g(*t), fmt_g(p), fmt_g(w.re), fmt_g(w.im), fmt_g(r.re), fmt_g(r.im)]);
    }
    finish(format, table, &meta, &trace, &args.io)
}

#[derive(Serialize)]
struct Readout {
    #[serde(rename = "T")]
    t: f64,
    #[serde(rename = "P")]
    p: f64,
}

pub fn readout(args: &ReadoutArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.io.config.as_deref())?;
    let format = format_of(&res, &args.io)?;
    let problem = resolve_problem(&res, &args.problem)?;
    let x = problem.overlap();
    let (preset, params) = resolve_params(&res, &args.params, Some(x))?;
    let oracle = res.switch("oracle", args.oracle)?;
    let mut meta = Meta::new("readout");
    describe_params(&mut meta, preset, &params);
    problem.describe(&mut meta);
    meta.push("route", if oracle { "oracle" } else { "exact" });

    let t = readout_time(&params, x)?;
    let p = if oracle {
        let tol = tolerances(&res, args.ode_tol, &mut meta)?;
        let prob = problem.full("--oracle")?;
        let psi = evolve_full(&params, prob, t, &tol)?;
        prob.target_probability(psi.amps())
    } else {
        success_probability(&params, x, t)?
    };
    let text = match format {
        Format::Csv => format!("T={t:.12} P={p:.12}\n"),
        Format::Json => render_json(&meta, &Readout { t, p })?,
    };
    emit(&text, args.io.out.as_deref())
}

pub fn sweep_phase(args: &SweepArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.io.config.as_deref())?;
    let format = format_of(&res, &args.io)?;
    let problem = resolve_problem(&res, &args.problem)?;
    let x = problem.overlap();
    let (preset, params) = resolve_params(&res, &args.params, Some(x))?;
    let points = res.get("points", args.points)?.unwrap_or(9);
    let lo = res.get("phi-min", args.phi_min)?.unwrap_or(0.0);
    let hi = res.get("phi-max", args.phi_max)?.unwrap_or(PI);
    if points < 1 {
        return Err(CliError::Usage("need at least one point".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Usage("phase range must be finite".into()));
    }
    let grid: Vec<f64> = if points == 1 {
        vec![lo]
    } else {
        (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect()
    };

    let mut meta = Meta::new("sweep-phase");
    describe_params(&mut meta, preset, &params);
    problem.describe(&mut meta);
    meta.push("points", points.to_string());
    meta.num("phi-min", lo);
    meta.num("phi-max", hi);
    let report = phase_sweep(&params, x, &grid)?;

    let mut table = Table::new(meta.clone(), &["phi", "P", "T"]);
    for ((phi, p), t) in report.values.iter().zip(&report.probabilities).zip(&report.readout_times) {
        table.row(vec![fmt_g(*phi), fmt_g(*p), fmt_g(*t)]);
    }
    if let Some(m) = report.monotone_to_half_pi {
        table.footer("monotone_to_half_pi", m.to_string());
    }
    finish(format, table, &meta, &report, &args.io)
}

pub fn scaling(args: &ScalingArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.io.config.as_deref())?;
    let format = format_of(&res, &args.io)?;
    let family: Family = res.get("family", args.family)?.unwrap_or(Family::Farhi);
    let n_list = res.get("n-list", args.n_list.clone())?.unwrap_or_else(|| List(DEFAULT_N_LIST.to_vec()));
    let energy = res.get("energy", args.energy)?.unwrap_or(1.0);

    let mut meta = Meta::new("scaling");
    meta.push("family", family.name());
    meta.num("energy", energy);
    meta.push("n-list", n_list.0.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
    let report = scaling_study(family, &n_list.0, energy)?;

    let mut table = Table::new(meta.clone(), &["N", "x", "T"]);
    for ((n, x), t) in report.n_values.iter().zip(&report.overlaps).zip(&report.readout_times) {
        table.row(vec![n.to_string(), fmt_g(*x), fmt_g(*t)]);
    }
    table.footer("slope", fmt_g(report.slope));
    table.footer("intercept", fmt_g(report.intercept));
    table.footer("residual", fmt_g(report.residual));
    finish(format, table, &meta, &report, &args.io)
}

pub fn trials(args: &TrialsArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.io.config.as_deref())?;
    let format = format_of(&res, &args.io)?;
    let dim = res.get("n", args.n)?.ok_or_else(|| CliError::Usage("trials needs --n".into()))?;
    let n_targets = res.get("targets", args.targets)?.unwrap_or(1);
    let count = res.get("trials", args.trials)?.unwrap_or(20);
    let seed = res.seed(args.seed, DEFAULT_SEED)?;
    let (preset, params) = resolve_params(&res, &args.params, None)?;

    let mut meta = Meta::new("trials");
    describe_params(&mut meta, preset, &params);
    meta.push("n", dim.to_string());
    meta.push("targets", n_targets.to_string());
    meta.push("trials", count.to_string());
    meta.push("seed", seed.to_string());
    let tol = tolerances(&res, args.ode_tol, &mut meta)?;
    let cfg = TrialsConfig { dim, n_targets, trials: count, seed };
    let report = random_init_trials(&cfg, &params, &tol)?;

    let mut table = Table::new(meta.clone(), &["trial", "x", "P"]);
    let probs: Vec<f64> = report.rows.iter().map(|r| r.probability.clamp(0.0, 1.0)).collect();
    for (row, p) in report.rows.iter().zip(&probs) {
        table.row(vec![row.trial.to_string(), fmt_g(row.overlap), fmt_g(*p)]);
    }
    let min = probs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = probs.iter().sum::<f64>() / probs.len() as f64;
    table.footer("min", fmt_g(min));
    table.footer("max", fmt_g(max));
    table.footer("mean", fmt_g(mean));
    table.footer("redraws", report.redraws.to_string());
    finish(format, table, &meta, &report, &args.io)
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let res = Resolver::new(args.config.as_deref())?;
    let format = res.get("format", args.format)?.unwrap_or(Format::Csv);
    let only = res.get("only", args.only.clone())?.map(|l: List<String>| l.0).unwrap_or_default();
    let tolerance = res.get("tolerance", args.tolerance)?;
    let seed = res.seed(args.seed, DEFAULT_SEED)?;
    let opts = VerifyOptions { only, tolerance, trial_seed: seed };
    let report = verify::run(&opts)?;

    let mut meta = Meta::new("verify");
    if !opts.only.is_empty() {
        meta.push("only", opts.only.join(","));
    }
    if let Some(t) = tolerance {
        meta.num("tolerance", t);
    }
    meta.push("seed", seed.to_string());

    let text = match format {
        Format::Json => render_json(&meta, &report)?,
        Format::Csv => {
            let mut s = String::new();
            for c in &report.criteria {
                s.push_str(&c.summary_line());
                s.push('\n');
                for check in &c.checks {
                    let mark = if check.passed { "ok" } else { "FAIL" };
                    s.push_str(&format!("    [{mark}] {}\n", check.describe()));
                }
                for note in &c.notes {
                    s.push_str(&format!("    note: {note}\n"));
                }
            }
            let passed = report.criteria.iter().filter(|c| c.passed()).count();
            s.push_str(&format!("{passed}/{} criteria passed\n", report.criteria.len()));
            s
        }
    };
    emit(&text, args.out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failed)
    }
}
