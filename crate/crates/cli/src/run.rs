//! Single runs and ε sweeps: solve, barriers, sandwich check and the estimator
//! battery for every ε, then the report files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use quench_core::estimator::{
    detect_free_boundary, dyadic_radii, fb_growth, gradient_bound_ratio, lipschitz_constant, spatial_holder_quotient,
    temporal_holder_quotient, FitRecord, FreeBoundarySet,
};
use quench_core::operators::check_uniform_parabolicity;
use quench_core::solver::{self, exact_profile, BoundaryPreset, OrderingReport, SolveConfig};
use quench_core::verification::{check_time_oscillation, kappa0_thm, transform_v, SourceField, TimeOscillationReport};
use quench_core::{Cylinder, Error, GridFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Loaded};
use crate::plot;
use crate::CliError;

/// One named outcome. Only `asserted` checks decide the exit status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub asserted: bool,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn asserted(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), asserted: true, passed, detail }
    }
    fn info(name: &str, detail: String) -> Self {
        Check { name: name.into(), asserted: false, passed: true, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub dt: f64,
    pub substeps: usize,
    pub steps: usize,
    pub min_value: f64,
    pub max_value: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderRecord {
    pub mu: f64,
    pub spatial: f64,
    pub temporal: f64,
    pub kappa0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub eps: f64,
    pub diagnostics: Diagnostics,
    pub sandwich: OrderingReport,
    /// Sup distance of the final level to the stationary profile (exact-profile data only).
    pub profile_distance: Option<f64>,
    pub free_boundary: Option<f64>,
    pub fits: Vec<FitRecord>,
    pub gradient_ratio: Option<f64>,
    pub lipschitz: Option<f64>,
    pub holder: Option<HolderRecord>,
    pub time_oscillation: Option<TimeOscillationReport>,
    pub checks: Vec<Check>,
}

impl EpsilonReport {
    fn fb_slope(&self) -> Option<f64> {
        self.fits.iter().find(|f| f.quantity == "fb_growth").map(|f| f.slope)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub fb_slope: Option<f64>,
    pub gradient_ratio: Option<f64>,
    pub lipschitz: Option<f64>,
    pub sandwich_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// max/min of each column over the sweep.
    pub gradient_ratio_drift: Option<f64>,
    pub lipschitz_drift: Option<f64>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub mode: String,
    pub config: ExperimentConfig,
    pub defaulted: Vec<String>,
    pub runs: Vec<EpsilonReport>,
    pub sweep: Option<SweepTable>,
    pub failed_checks: Vec<String>,
    pub passed: bool,
}

struct Solved {
    report: EpsilonReport,
    trajectory: GridFunction,
    elapsed: f64,
}

fn core(e: Error) -> CliError {
    match e {
        Error::NonFinite { node, level } => CliError::BlowUp { node, level },
        other => CliError::Numerics(other.to_string()),
    }
}

fn solve_one(cfg: &ExperimentConfig, eps: f64) -> Result<Solved, CliError> {
    let started = Instant::now();
    let grid = cfg.grid()?;
    let params = cfg.penalization(eps)?;
    let op = cfg.operator()?;
    let preset = cfg.boundary();
    let config = SolveConfig::new(grid.clone(), op, params, preset).with_shift(cfg.boundary.shift);
    let result = solver::solve(&config).map_err(core)?;
    let u = result.trajectory;
    let lower = solver::barrier_lower(&config).map_err(core)?;
    let upper = solver::barrier_upper(&config).map_err(core)?;
    let est = &cfg.estimator;
    let sandwich = solver::sandwich_check(&u, &lower, &upper, est.sandwich_tolerance).map_err(core)?;

    let mut checks = vec![Check::asserted(
        "sandwich",
        sandwich.passed,
        format!("worst violation {:.3e} (tol {:.1e})", sandwich.worst_violation, sandwich.tol),
    )];
    let nonneg = preset.is_nonnegative();
    if nonneg {
        checks.push(Check::asserted("nonnegative", result.min_value >= -1e-10, format!("min u = {:.3e}", result.min_value)));
    }
    let level = grid.final_level();
    let center = grid.nearest_node([0.5 * (grid.lo() + grid.hi()); 2]);
    let alpha = params.alpha();

    let profile_distance = matches!(preset, BoundaryPreset::ExactProfile { .. }).then(|| {
        let x0 = cfg.boundary.x0;
        u.final_level()
            .iter()
            .enumerate()
            .map(|(node, &v)| (v - exact_profile(grid.point(node)[0], params.gamma(), x0)).abs())
            .fold(0.0, f64::max)
    });
    if let Some(d) = profile_distance {
        checks.push(Check::info("profile_distance", format!("sup |u(·,0) − profile| = {d:.4e}")));
    }

    let radii = dyadic_radii(&grid, est.first_radius, est.radii_count).ok();
    let mut fits = Vec::new();
    let mut free_boundary = None;
    if cfg.wants("fb_growth") {
        let fb = detect_free_boundary(&u, FreeBoundarySet::default_threshold(&params)).map_err(core)?;
        match (fb.anchor(level), &radii) {
            (Some(anchor), Some(radii)) => match fb_growth(&u, anchor, level, radii, est.beta_reference) {
                Ok(fit) => {
                    let pass = fit.within(est.fb_tolerance);
                    let p = grid.point(anchor);
                    free_boundary = Some(p[0]);
                    checks.push(Check::asserted(
                        "fb_growth",
                        pass,
                        format!("slope {:.4} vs {:.4} ± {}", fit.slope, fit.reference.unwrap_or(f64::NAN), est.fb_tolerance),
                    ));
                    let mut c = p[..grid.dim()].to_vec();
                    c.push(grid.time(level));
                    fits.push(fit.record("fb_growth", c, pass));
                }
                Err(e) => checks.push(Check::info("fb_growth", format!("not measured: {e}"))),
            },
            (None, _) => checks.push(Check::info("fb_growth", "no free boundary at the final level".into())),
            (_, None) => checks.push(Check::info("fb_growth", "grid too coarse for 3 dyadic radii ≥ 4h".into())),
        }
    }

    let mut gradient_ratio = None;
    if cfg.wants("gradient_ratio") {
        let theta = est.theta.expect("resolved");
        let half = 0.25 * (grid.hi() - grid.lo());
        let region = Cylinder::new(center, level, half).ok().filter(|c| c.check_inside(&grid).is_ok());
        match gradient_bound_ratio(&u, theta, params.tau_high(), region.as_ref()) {
            Ok(r) => {
                gradient_ratio = Some(r);
                checks.push(Check::info("gradient_ratio", format!("max |∇u|²/u^{theta} = {r:.4}")));
            }
            Err(e) => checks.push(Check::info("gradient_ratio", format!("not measured: {e}"))),
        }
    }

    let mut lipschitz = None;
    if cfg.wants("lipschitz") {
        if let Some(radii) = &radii {
            match lipschitz_constant(&u, center, level, &radii[..radii.len().min(3)]) {
                Ok(c) => {
                    lipschitz = Some(c);
                    checks.push(Check::info("lipschitz", format!("Ĉ = {c:.4}")));
                }
                Err(e) => checks.push(Check::info("lipschitz", format!("not measured: {e}"))),
            }
        }
    }

    let v = if nonneg { transform_v(&u.map(|s| s.max(0.0)).map_err(core)?, params.gamma()).ok() } else { None };
    let mut holder = None;
    if let (true, Some(v)) = (cfg.wants("holder"), &v) {
        let spatial = spatial_holder_quotient(v, est.mu, level).map_err(core)?;
        let f_inf = SourceField::Implied(params).sup_bound();
        let k0 = kappa0_thm(spatial.max(1e-12), f_inf, grid.dim(), op.ellipticity().cap_lambda(), alpha).map_err(core)?;
        let temporal = temporal_holder_quotient(v, est.mu, center, 0.5 * k0).map_err(core)?;
        checks.push(Check::info("holder", format!("spatial {spatial:.4}, temporal {temporal:.4} on (−{:.4}, 0]", 0.5 * k0)));
        holder = Some(HolderRecord { mu: est.mu, spatial, temporal, kappa0: k0 });
    }

    let mut time_oscillation = None;
    if let (true, Some(v)) = (cfg.wants("time_oscillation"), &v) {
        let m = SourceField::Implied(params).sup_bound();
        match check_time_oscillation(v, center, m, alpha, op.ellipticity().cap_lambda()) {
            Ok(r) => {
                checks.push(Check::asserted(
                    "time_oscillation",
                    r.passed,
                    format!("{:.4e} ≤ 8L + 1e-6 = {:.4} (L = {:.4}, κ₀ = {:.5})", r.oscillation, r.bound, r.l, r.kappa0),
                ));
                time_oscillation = Some(r);
            }
            Err(e) => checks.push(Check::info("time_oscillation", format!("not measured: {e}"))),
        }
    }

    if cfg.wants("parabolicity") {
        let r = check_uniform_parabolicity(&op, 500, cfg.experiment.seed).map_err(core)?;
        checks.push(Check::asserted("parabolicity", r.passed, format!("worst margin {:.3e} over {} samples", r.worst_margin, r.samples)));
    }

    let steps = (grid.levels() - 1) * result.substeps;
    let report = EpsilonReport {
        eps,
        diagnostics: Diagnostics {
            dt: result.dt,
            substeps: result.substeps,
            steps,
            min_value: result.min_value,
            max_value: result.max_value,
            max_residual: result.level_residuals.iter().copied().fold(0.0, f64::max),
        },
        sandwich,
        profile_distance,
        free_boundary,
        fits,
        gradient_ratio,
        lipschitz,
        holder,
        time_oscillation,
        checks,
    };
    Ok(Solved { report, trajectory: u, elapsed: started.elapsed().as_secs_f64() })
}

fn drift(values: &[Option<f64>]) -> Option<f64> {
    let v: Vec<f64> = values.iter().copied().collect::<Option<Vec<f64>>>()?;
    let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    (lo > 0.0).then_some(hi / lo)
}

fn sweep_table(cfg: &ExperimentConfig, runs: &[EpsilonReport]) -> SweepTable {
    let rows: Vec<SweepRow> = runs
        .iter()
        .map(|r| SweepRow {
            eps: r.eps,
            fb_slope: r.fb_slope(),
            gradient_ratio: r.gradient_ratio,
            lipschitz: r.lipschitz,
            sandwich_margin: 0.0 - r.sandwich.worst_violation,
        })
        .collect();
    let mut checks = Vec::new();
    let reference = cfg.estimator.beta_reference.expect("resolved");
    let slopes: Option<Vec<f64>> = rows.iter().map(|r| r.fb_slope).collect();
    if let Some(slopes) = slopes {
        let gaps: Vec<f64> = slopes.iter().map(|s| (s - reference).abs()).collect();
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
        let last = *gaps.last().expect("at least two rows");
        checks.push(Check::asserted(
            "slope_convergence",
            monotone && last <= cfg.estimator.fb_tolerance,
            format!("|slope − {reference:.4}| = {gaps:.4?} as ε decreases"),
        ));
    }
    let gradient_ratio_drift = drift(&rows.iter().map(|r| r.gradient_ratio).collect::<Vec<_>>());
    if let Some(d) = gradient_ratio_drift {
        checks.push(Check::asserted(
            "gradient_ratio_drift",
            d <= cfg.estimator.gradient_drift,
            format!("max/min = {d:.4} (limit {})", cfg.estimator.gradient_drift),
        ));
    }
    let lipschitz_drift = drift(&rows.iter().map(|r| r.lipschitz).collect::<Vec<_>>());
    if let Some(d) = lipschitz_drift {
        checks.push(Check::info("lipschitz_drift", format!("max/min = {d:.4}")));
    }
    SweepTable { rows, gradient_ratio_drift, lipschitz_drift, checks }
}

/// Metadata kept apart from the report so that reports stay reproducible.
#[derive(Debug, Serialize)]
struct Metadata<'a> {
    experiment: &'a str,
    version: &'a str,
    threads: usize,
    started_unix: f64,
    wall_seconds: f64,
    solve_seconds: Vec<f64>,
}

pub struct Outcome {
    pub report: RunReport,
    pub out_dir: PathBuf,
}

pub fn execute(loaded: &Loaded, sweep: bool, out: Option<&Path>) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let eps = &cfg.penalization.eps;
    if sweep {
        if eps.len() < 2 {
            return Err(CliError::Precondition("a sweep needs at least 2 ε values".into()));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::Precondition("sweep ε values must be strictly decreasing".into()));
        }
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let solved: Vec<Solved> = eps.par_iter().map(|&e| solve_one(cfg, e)).collect::<Result<_, _>>()?;
    let runs: Vec<EpsilonReport> = solved.iter().map(|s| s.report.clone()).collect();
    let sweep_table = sweep.then(|| sweep_table(cfg, &runs));
    let failed_checks: Vec<String> = runs
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| c.asserted && !c.passed).map(move |c| format!("ε={}: {}", r.eps, c.name)))
        .chain(sweep_table.iter().flat_map(|t| t.checks.iter().filter(|c| c.asserted && !c.passed).map(|c| format!("sweep: {}", c.name))))
        .collect();
    let report = RunReport {
        experiment: cfg.experiment.name.clone(),
        mode: if sweep { "sweep" } else { "run" }.into(),
        config: cfg.clone(),
        defaulted: loaded.defaulted.clone(),
        runs,
        sweep: sweep_table,
        passed: failed_checks.is_empty(),
        failed_checks,
    };

    let out_dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let write = |path: PathBuf, bytes: &[u8]| fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())));
    for (k, s) in solved.iter().enumerate() {
        let dir = if solved.len() == 1 { out_dir.clone() } else { out_dir.join(format!("eps_{k}")) };
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut buf = Vec::new();
        solver::write_fields_csv(&s.trajectory, &mut buf).map_err(|e| CliError::Io(e.to_string()))?;
        if cfg.output.fields == "final" {
            buf = final_rows(&buf, s.trajectory.grid().final_level());
        }
        write(dir.join("fields.csv"), &buf)?;
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    write(out_dir.join("report.json"), json.as_bytes())?;
    if cfg.output.plots {
        let plots = out_dir.join("plots");
        fs::create_dir_all(&plots).map_err(|e| CliError::Io(format!("{}: {e}", plots.display())))?;
        for (k, r) in report.runs.iter().enumerate() {
            for fit in &r.fits {
                let title = format!("{} at ε = {}", fit.quantity, r.eps);
                write(plots.join(format!("{}_eps{k}.svg", fit.quantity)), plot::loglog(&title, fit).as_bytes())?;
            }
        }
    }
    let meta = Metadata {
        experiment: &cfg.experiment.name,
        version: env!("CARGO_PKG_VERSION"),
        threads: rayon::current_num_threads(),
        started_unix: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
        wall_seconds: clock.elapsed().as_secs_f64(),
        solve_seconds: solved.iter().map(|s| s.elapsed).collect(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    write(out_dir.join("metadata.json"), json.as_bytes())?;
    Ok(Outcome { report, out_dir })
}

/// Keeps the header and the rows of the last stored level.
fn final_rows(csv: &[u8], last: usize) -> Vec<u8> {
    let text = String::from_utf8_lossy(csv);
    let prefix = format!("{last},");
    let mut out = String::new();
    for (k, line) in text.lines().enumerate() {
        if k == 0 || line.starts_with(&prefix) {
            out.push_str(line);
            out.push('\n');
        }
    }
    out.into_bytes()
}

pub fn print_summary(report: &RunReport) {
    println!("experiment {} ({})", report.experiment, report.mode);
    for r in &report.runs {
        println!("  ε = {}: dt = {:.3e}, {} steps", r.eps, r.diagnostics.dt, r.diagnostics.steps);
        for c in &r.checks {
            let tag = match (c.asserted, c.passed) {
                (false, _) => "info",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            println!("    [{tag}] {}: {}", c.name, c.detail);
        }
    }
    if let Some(t) = &report.sweep {
        println!("  sweep:");
        println!("    {:>10} {:>10} {:>12} {:>10} {:>12}", "eps", "fb_slope", "grad_ratio", "lipschitz", "sandwich");
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        for row in &t.rows {
            println!(
                "    {:>10} {:>10} {:>12} {:>10} {:>12.3e}",
                row.eps,
                cell(row.fb_slope),
                cell(row.gradient_ratio),
                cell(row.lipschitz),
                row.sandwich_margin
            );
        }
        for c in &t.checks {
            let tag = if !c.asserted { "info" } else if c.passed { "PASS" } else { "FAIL" };
            println!("    [{tag}] {}: {}", c.name, c.detail);
        }
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
}
