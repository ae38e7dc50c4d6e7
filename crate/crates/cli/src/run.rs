use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;

use pucci_core::bvp::{continuation, solve_full, DiscreteOperator};
use pucci_core::certify::{
    decay_fit, eta1_select, nonexistence_certificate, prop29_diagnostics, single_max_check, xnorm,
    Certificate, Prop29Report, Verdict,
};
use pucci_core::homoclinic::{build_omega, OmegaProfile, OmegaSummary};
use pucci_core::model::{validate_nonlinearity, validate_potential, Check};
use pucci_core::scalar::{forcing_threshold, matching_levels, LandscapeSummary, MatchingLevels};
use pucci_core::{Bump, Error, Grid, Hypothesis, Landscape, Potential, Profile, Provenance, PucciParams};

use crate::error::CliError;
use crate::scenario::{GridSpec, HypothesisSpec, InitSpec, Scenario, Task};

pub const SCHEMA_VERSION: u32 = 1;

/// Samples used when checking the nonlinearity hypotheses.
const NONLINEARITY_SAMPLES: usize = 200;

/// Slack allowed below the forcing lower bound on branch entries.
const FLOOR_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    MalformedConfig,
    ValidationFailed,
    NoConvergence,
    StrictViolation,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::MalformedConfig => 1,
            Status::ValidationFailed => 2,
            Status::NoConvergence => 3,
            Status::StrictViolation => 4,
        }
    }

    fn of(err: &CliError) -> Status {
        match err {
            CliError::Config(_) => Status::MalformedConfig,
            CliError::Validation(_) => Status::ValidationFailed,
            CliError::Io(_) => Status::MalformedConfig,
            CliError::Core(e) => match e {
                Error::Parse(_) | Error::Io(_) => Status::MalformedConfig,
                Error::SolverStall { .. } | Error::IntegrationBlowUp { .. } | Error::Fit(_) => {
                    Status::NoConvergence
                }
                _ => Status::ValidationFailed,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Forcing {
    /// `-min g_inf`.
    pub c: f64,
    pub t_tilde: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub t: f64,
    pub kappa0: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub message: String,
    pub sup_norm: f64,
    pub argmax_x: f64,
    pub single_max: Option<bool>,
    pub eta1: f64,
    pub x_norm: f64,
    pub decay: Option<DecayFit>,
    /// Distance to the node-aligned translate of the ground state; only for
    /// constant potentials at `t = 0`.
    pub omega_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchRow {
    pub t: f64,
    pub sup_norm: f64,
    pub x_norm: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `kappa0^2 t / (4 Lambda)`.
    pub sup_floor: f64,
    pub above_floor: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchSummary {
    pub kappa0: f64,
    pub eta1: f64,
    pub rows: Vec<BranchRow>,
    pub sup_bound: f64,
    pub final_converged: bool,
    pub final_single_max: Option<bool>,
    pub final_argmax_x: Option<f64>,
    pub energy: Option<Prop29Report>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub name: Option<String>,
    pub task: Task,
    pub dir: String,
    pub status: Status,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub task: Task,
    pub name: Option<String>,
    pub status: Status,
    pub exit_code: i32,
    pub message: Option<String>,
    pub params: PucciParams,
    pub grid: GridSpec,
    pub validation: Vec<Check>,
    pub landscape: Option<LandscapeSummary>,
    pub matching_levels: Option<MatchingLevels>,
    pub forcing: Option<Forcing>,
    pub omega: Option<OmegaSummary>,
    pub solve: Option<SolveSummary>,
    pub branch: Option<BranchSummary>,
    pub certificate: Option<Certificate>,
    pub runs: Option<Vec<SweepEntry>>,
    pub artifacts: Vec<String>,
}

impl Report {
    fn new(sc: &Scenario, task: Task) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            task,
            name: sc.name.clone(),
            status: Status::Ok,
            exit_code: 0,
            message: None,
            params: sc.params,
            grid: sc.grid,
            validation: Vec::new(),
            landscape: None,
            matching_levels: None,
            forcing: None,
            omega: None,
            solve: None,
            branch: None,
            certificate: None,
            runs: None,
            artifacts: Vec::new(),
        }
    }
}

#[derive(Serialize)]
struct OmegaSidecar<'a> {
    schema_version: u32,
    #[serde(flatten)]
    summary: &'a OmegaSummary,
    landscape: LandscapeSummary,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: Report,
}

impl Outcome {
    pub fn code(&self) -> i32 {
        self.status.code()
    }
}

/// Run `task` for `scenario`, writing artifacts and `report.json` into
/// `out`. Relative paths in the scenario resolve against `base_dir`.
pub fn execute(scenario: &Scenario, task: Task, base_dir: &Path, out: &Path) -> Outcome {
    let mut report = Report::new(scenario, task);
    let status = match run(scenario, task, base_dir, out, &mut report) {
        Ok(s) => s,
        Err(e) => {
            report.message = Some(e.to_string());
            Status::of(&e)
        }
    };
    report.status = status;
    report.exit_code = status.code();
    if status != Status::MalformedConfig || out.is_dir() {
        if let Err(e) = write_json(out, "report.json", &report, &mut Vec::new()) {
            report.message = Some(format!("could not write report: {e}"));
            report.status = Status::MalformedConfig;
            report.exit_code = 1;
            return Outcome {
                status: Status::MalformedConfig,
                report,
            };
        }
    }
    Outcome { status, report }
}

/// Read and parse a config file, then execute. Parse failures come back as
/// status 1 without touching `out`.
pub fn execute_file(config: &Path, task: Task, out: &Path) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let sc = Scenario::from_json(&text)?;
    let task = sc.resolve_task(task)?;
    let base = config.parent().unwrap_or_else(|| Path::new("."));
    Ok(execute(&sc, task, base, out))
}

fn run(sc: &Scenario, task: Task, base: &Path, out: &Path, rep: &mut Report) -> Result<Status, CliError> {
    fs::create_dir_all(out)?;
    if task == Task::Sweep {
        return run_sweep(sc, base, out, rep);
    }
    let ctx = prepare(sc, rep)?;
    match task {
        Task::Omega => run_omega(sc, &ctx, out, rep),
        Task::Solve => run_solve(sc, &ctx, base, out, rep),
        Task::Branch => run_branch(sc, &ctx, base, out, rep),
        Task::Certify => run_certify(sc, &ctx, base, out, rep),
        Task::Sweep => unreachable!(),
    }
}

struct Ctx {
    grid: Grid,
    landscape: Landscape,
}

fn prepare(sc: &Scenario, rep: &mut Report) -> Result<Ctx, CliError> {
    let grid = Grid::from_half_length(sc.grid.half_length, sc.grid.step)?;
    let nl = validate_nonlinearity(&sc.nonlinearity, NONLINEARITY_SAMPLES)?;
    rep.validation.extend(nl.checks);
    sc.potential.check()?;
    if let Some(spec) = sc.hypothesis {
        let hyp = match spec {
            HypothesisSpec::Monotone => Hypothesis::Monotone,
            HypothesisSpec::MonotoneDecreasing => Hypothesis::MonotoneDecreasing,
            HypothesisSpec::Well { c0, xi0 } => {
                let defaults = sc.potential.default_well_constants(&sc.params);
                match (c0.or(defaults.map(|d| d.0)), xi0.or(defaults.map(|d| d.1))) {
                    (Some(c0), Some(xi0)) => Hypothesis::Well {
                        params: sc.params,
                        c0,
                        xi0,
                    },
                    _ => {
                        return Err(CliError::Validation(
                            "well hypothesis needs c0 and xi0 for this potential".into(),
                        ))
                    }
                }
            }
        };
        let pv = validate_potential(&sc.potential, &hyp, &grid)?;
        rep.validation.extend(pv.checks);
    }
    let failed: Vec<&str> = rep
        .validation
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Validation(format!(
            "failed checks: {}",
            failed.join(", ")
        )));
    }
    let landscape = Landscape::new(sc.nonlinearity.clone(), sc.potential.v_inf())?;
    rep.landscape = Some(landscape.summary());
    rep.matching_levels = Some(matching_levels(&sc.params, &landscape)?);
    let (c, t_tilde) = forcing_threshold(&sc.nonlinearity, sc.potential.v_inf())?;
    rep.forcing = Some(Forcing { c, t_tilde });
    Ok(Ctx { grid, landscape })
}

fn write_text(out: &Path, file: &str, text: &str, artifacts: &mut Vec<String>) -> Result<(), CliError> {
    fs::write(out.join(file), text)?;
    artifacts.push(file.to_string());
    Ok(())
}

fn write_json<T: Serialize>(
    out: &Path,
    file: &str,
    value: &T,
    artifacts: &mut Vec<String>,
) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, file, &text, artifacts)
}

/// Ground state built on the first of `L, 2L, 4L, 8L` that holds its far
/// field.
fn build_enlarging(
    params: &PucciParams,
    landscape: &Landscape,
    grid: &Grid,
) -> Result<OmegaProfile, CliError> {
    let mut l = grid.half_length();
    let mut last = None;
    for _ in 0..4 {
        match build_omega(params, landscape, l, grid.step()) {
            Ok(w) => return Ok(w),
            Err(e @ Error::DomainTooSmall(_)) => {
                last = Some(e);
                l *= 2.0;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("loop ran").into())
}

/// Ground state restricted to `grid`.
fn ground_state(params: &PucciParams, landscape: &Landscape, grid: &Grid) -> Result<Profile, CliError> {
    Ok(build_enlarging(params, landscape, grid)?.profile.regrid(*grid)?)
}

fn initial_guess(sc: &Scenario, ctx: &Ctx, base: &Path) -> Result<Profile, CliError> {
    let g = ctx.grid;
    match &sc.options.init {
        InitSpec::Omega { shift, v_level } => {
            let w = match v_level {
                Some(v) => {
                    let level = Landscape::new(sc.nonlinearity.clone(), *v)?;
                    ground_state(&sc.params, &level, &g)?
                }
                None => ground_state(&sc.params, &ctx.landscape, &g)?,
            };
            let k = (shift / g.step()).round();
            if (shift / g.step() - k).abs() < 1e-9 {
                Ok(w.shift_nodes(k as isize))
            } else {
                Ok(Profile::from_fn(g, Provenance::Constructed, |x| {
                    w.interpolate(x - shift)
                }))
            }
        }
        InitSpec::File { path } => {
            let p = Profile::read_csv(base.join(path))?;
            if *p.grid() == g {
                Ok(p)
            } else {
                Ok(Profile::from_fn(g, Provenance::Loaded, |x| p.interpolate(x)))
            }
        }
    }
}

fn eta1_for(sc: &Scenario, ctx: &Ctx, op: &DiscreteOperator) -> Result<f64, CliError> {
    let c2 = ctx.landscape.tail_rate(sc.params.convex_coeff());
    Ok(eta1_select(&sc.params, op.v0(), c2, sc.nonlinearity.eta0())?)
}

fn run_omega(sc: &Scenario, ctx: &Ctx, out: &Path, rep: &mut Report) -> Result<Status, CliError> {
    let w = build_enlarging(&sc.params, &ctx.landscape, &ctx.grid)?;
    let stem = format!("omega_{}", sc.params.branch().as_str());
    // half_length in the summary is the construction domain
    let summary = w.summary();
    let profile = w.profile.regrid(ctx.grid)?;
    write_text(out, &format!("{stem}.csv"), &profile.to_csv(), &mut rep.artifacts)?;
    let sidecar = OmegaSidecar {
        schema_version: SCHEMA_VERSION,
        summary: &summary,
        landscape: ctx.landscape.summary(),
    };
    write_json(out, &format!("{stem}.json"), &sidecar, &mut rep.artifacts)?;
    rep.omega = Some(summary);
    Ok(Status::Ok)
}

fn run_solve(
    sc: &Scenario,
    ctx: &Ctx,
    base: &Path,
    out: &Path,
    rep: &mut Report,
) -> Result<Status, CliError> {
    let opts = &sc.options;
    let op = DiscreteOperator::new(ctx.grid, sc.params, &sc.potential, sc.nonlinearity.clone())?;
    let bump = Bump::new(opts.kappa0)?;
    let init = initial_guess(sc, ctx, base)?;
    let sol = solve_full(&op, opts.t, &bump, &init, &opts.newton)?;
    let u = &sol.profile;
    write_text(out, "solution.csv", &u.to_csv(), &mut rep.artifacts)?;
    let eta1 = eta1_for(sc, ctx, &op)?;
    let nontrivial = u.sup_norm() > 0.0;
    let omega_distance = match (&sc.potential, sol.converged && opts.t == 0.0 && nontrivial) {
        (Potential::Constant { .. }, true) => {
            let w = ground_state(&sc.params, &ctx.landscape, &ctx.grid)?;
            let k = u.argmax() as isize - w.argmax() as isize;
            Some(w.shift_nodes(k).sup_distance(u)?)
        }
        _ => None,
    };
    rep.solve = Some(SolveSummary {
        t: opts.t,
        kappa0: opts.kappa0,
        converged: sol.converged,
        iterations: sol.iterations,
        residual: sol.residual,
        message: sol.message.clone(),
        sup_norm: u.sup_norm(),
        argmax_x: ctx.grid.x(u.argmax()),
        single_max: if nontrivial {
            Some(single_max_check(u)?.0)
        } else {
            None
        },
        eta1,
        x_norm: xnorm(u, eta1),
        decay: decay_fit(u, (0.5, 0.9)).ok().map(|(c1, c2)| DecayFit { c1, c2 }),
        omega_distance,
    });
    if sol.converged {
        Ok(Status::Ok)
    } else {
        rep.message = Some(sol.message);
        Ok(Status::NoConvergence)
    }
}

fn run_branch(
    sc: &Scenario,
    ctx: &Ctx,
    base: &Path,
    out: &Path,
    rep: &mut Report,
) -> Result<Status, CliError> {
    let opts = &sc.options;
    if opts.t_values.is_empty() {
        return Err(CliError::Config("task `branch` needs options.t_values".into()));
    }
    let op = DiscreteOperator::new(ctx.grid, sc.params, &sc.potential, sc.nonlinearity.clone())?;
    let bump = Bump::new(opts.kappa0)?;
    let init = initial_guess(sc, ctx, base)?;
    let eta1 = eta1_for(sc, ctx, &op)?;
    let br = continuation(&op, &opts.t_values, &bump, &init, eta1, &opts.newton)?;
    write_text(out, "branch.csv", &br.to_csv(), &mut rep.artifacts)?;
    for (k, e) in br.entries.iter().enumerate() {
        write_text(
            out,
            &format!("profile_{k:03}.csv"),
            &e.profile.to_csv(),
            &mut rep.artifacts,
        )?;
    }
    let big = sc.params.Lambda();
    let rows = br
        .entries
        .iter()
        .map(|e| {
            let floor = opts.kappa0 * opts.kappa0 * e.t / (4.0 * big);
            BranchRow {
                t: e.t,
                sup_norm: e.sup_norm,
                x_norm: e.x_norm,
                residual: e.residual,
                converged: e.converged,
                iterations: e.iterations,
                sup_floor: floor,
                above_floor: e.sup_norm >= floor - FLOOR_SLACK,
            }
        })
        .collect();
    let last = br.last().expect("nonempty ladder");
    let (single, argmax) = if last.converged && last.sup_norm > 0.0 {
        let (s, at) = single_max_check(&last.profile)?;
        (Some(s), Some(ctx.grid.x(at)))
    } else {
        (None, None)
    };
    let is_well = matches!(sc.potential, Potential::Well { .. })
        || matches!(sc.hypothesis, Some(HypothesisSpec::Well { .. }));
    let energy = if is_well {
        Some(prop29_diagnostics(
            &br,
            &sc.potential,
            &sc.params,
            &ctx.landscape,
        )?)
    } else {
        None
    };
    rep.branch = Some(BranchSummary {
        kappa0: opts.kappa0,
        eta1,
        rows,
        sup_bound: br.sup_bound(),
        final_converged: last.converged,
        final_single_max: single,
        final_argmax_x: argmax,
        energy,
    });
    if last.converged {
        Ok(Status::Ok)
    } else {
        rep.message = Some(format!("no convergence at t = {}", last.t));
        Ok(Status::NoConvergence)
    }
}

fn run_certify(
    sc: &Scenario,
    ctx: &Ctx,
    base: &Path,
    out: &Path,
    rep: &mut Report,
) -> Result<Status, CliError> {
    let opts = &sc.options;
    let candidate = match &opts.candidate {
        Some(path) => Profile::read_csv(base.join(path))?,
        None => {
            let op = DiscreteOperator::new(ctx.grid, sc.params, &sc.potential, sc.nonlinearity.clone())?;
            let bump = Bump::new(opts.kappa0)?;
            let init = initial_guess(sc, ctx, base)?;
            let sol = solve_full(&op, 0.0, &bump, &init, &opts.newton)?;
            write_text(out, "candidate.csv", &sol.profile.to_csv(), &mut rep.artifacts)?;
            if !sol.converged {
                rep.message = Some(format!("no candidate: {}", sol.message));
                return Ok(Status::NoConvergence);
            }
            sol.profile
        }
    };
    let cert = nonexistence_certificate(&candidate, &sc.potential, &sc.params, &ctx.landscape)?;
    write_json(out, "certificate.json", &cert, &mut rep.artifacts)?;
    let verdict = cert.verdict;
    if let Some(link) = &cert.broken_link {
        rep.message = Some(format!("broken link: {link}"));
    }
    rep.certificate = Some(cert);
    Ok(if verdict == Verdict::StrictViolation && opts.expect_consistent {
        Status::StrictViolation
    } else {
        Status::Ok
    })
}

fn run_sweep(sc: &Scenario, base: &Path, out: &Path, rep: &mut Report) -> Result<Status, CliError> {
    let children = sc.sweep_children()?;
    let n = children.len();
    let threads = sc
        .sweep
        .as_ref()
        .and_then(|s| s.threads)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |p| p.get()))
        .clamp(1, n.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Status>>> = Mutex::new(vec![None; n]);
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= n {
                    break;
                }
                let (child, task) = &children[k];
                let o = execute(child, *task, base, &out.join(run_dir(k)));
                results.lock().expect("worker panicked")[k] = Some(o.status);
            });
        }
    });
    let results = results.into_inner().expect("worker panicked");
    let mut worst = Status::Ok;
    let entries = children
        .iter()
        .zip(results)
        .enumerate()
        .map(|(k, ((child, task), status))| {
            let status = status.expect("every run finishes");
            worst = worst.max(status);
            SweepEntry {
                index: k,
                name: child.name.clone(),
                task: *task,
                dir: run_dir(k),
                status,
                exit_code: status.code(),
            }
        })
        .collect();
    rep.runs = Some(entries);
    Ok(worst)
}

fn run_dir(k: usize) -> String {
    format!("run_{k:03}")
}
