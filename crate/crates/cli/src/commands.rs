use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use activeht::bounds::{lb_alpha_form, Bounds};
use activeht::dp::{interpolation_margin, value_iterate, ValueGrid, DEFAULT_MAX_SWEEPS, MAX_HYPOTHESES};
use activeht::model::validate;
use activeht::nds::{build_model, ActionFamily, NdsSpec};
use activeht::policies::{GridPolicy, Policy, PolicyConfig, PolicyKind, ThresholdPolicy};
use activeht::sim::{self, SimEstimate};
use activeht::{Belief, BoundParams, GameQuantities, Model, ModelFile, SolverOptions};

use crate::output::{num, opt_num, Table};
use crate::source::{load_model, render_report};
use crate::{Command, Common, RunArgs};

const DP_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values: exit 2.
    Usage(String),
    /// The model or a derived precondition is invalid: exit 1.
    Validation(String),
    /// Located validation findings, already formatted line by line: exit 1.
    Report(String),
    Core(activeht::Error),
    Io(std::io::Error),
    Csv(csv::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Validation(s) | CliError::Report(s) => write!(f, "{}", s.trim_end()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Csv(e) => write!(f, "{e}"),
        }
    }
}

impl From<activeht::Error> for CliError {
    fn from(e: activeht::Error) -> Self {
        match e {
            activeht::Error::InvalidArgument { .. } => CliError::Usage(e.to_string()),
            other => CliError::Core(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Refuses to write over an input file.
fn check_out(out: Option<&Path>, inputs: &[&Path]) -> Result<()> {
    let Some(out) = out else { return Ok(()) };
    let Ok(out_c) = out.canonicalize() else { return Ok(()) };
    for input in inputs {
        if input.canonicalize().map(|c| c == out_c).unwrap_or(false) {
            return Err(usage(format!("--out {} would overwrite an input file", out.display())));
        }
    }
    Ok(())
}

fn parse_prior(spec: &str, m: usize) -> Result<Belief> {
    if spec == "uniform" {
        return Ok(Belief::uniform(m));
    }
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("--prior: cannot parse '{s}'"))))
        .collect::<Result<_>>()?;
    if v.len() != m {
        return Err(usage(format!("--prior has {} entries, model has M = {m}", v.len())));
    }
    Belief::new(v).map_err(|e| usage(format!("--prior: {e}")))
}

fn check_penalties(penalties: &[f64]) -> Result<()> {
    if let Some(l) = penalties.iter().find(|&&l| !(l > 1.0) || !l.is_finite()) {
        return Err(usage(format!("--L values must be finite and > 1, got {l}")));
    }
    Ok(())
}

fn parse_policy(s: &str) -> Result<PolicyKind> {
    s.parse::<PolicyKind>().map_err(|e| usage(e.to_string()))
}

fn solver_options(tol: f64) -> Result<SolverOptions> {
    if !(tol > 0.0) {
        return Err(usage(format!("--tol must be > 0, got {tol}")));
    }
    Ok(SolverOptions {
        tol,
        ..SolverOptions::default()
    })
}

fn quantities(model: &Model, rho_tilde: f64, tol: f64) -> Result<GameQuantities> {
    if !(rho_tilde > 0.5 && rho_tilde < 1.0) {
        return Err(usage(format!("--rho-tilde must lie in (0.5, 1), got {rho_tilde}")));
    }
    let q = GameQuantities::compute(model, rho_tilde, &solver_options(tol)?)?;
    if !q.converged() {
        eprintln!(
            "warning: game solvers stopped before reaching tol {tol} (gaps: mu {:.2e}, eta {:.2e}, i_max {:.2e})",
            q.mu_report.best_response_gap, q.eta_report.best_response_gap, q.i_max_report.best_response_gap
        );
    }
    Ok(q)
}

fn default_resolution(m: usize) -> usize {
    match m {
        2 => 1000,
        3 => 60,
        _ => 20,
    }
}

fn model_meta(table: &mut Table, path: &Path, model: &Model) {
    table.meta("model", path.display());
    table.meta("model_hash", model.content_hash());
    table.meta("M", model.num_hypotheses());
}

fn estimate_row(est: &SimEstimate) -> Vec<String> {
    vec![
        est.n_trials.to_string(),
        num(est.tau.mean),
        num(est.tau.half_width),
        est.errors.to_string(),
        est.capped.to_string(),
        num(est.pe),
        num(est.pe_upper),
        num(est.total_cost.mean),
        num(est.total_cost.half_width),
    ]
}

const ESTIMATE_COLUMNS: [&str; 9] = [
    "n_trials",
    "mean_tau",
    "tau_half_width",
    "errors",
    "capped",
    "pe",
    "pe_upper",
    "total_cost",
    "total_cost_half_width",
];

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Validate { model } => cmd_validate(&model),
        Command::SolveGame { common } => cmd_solve_game(&common),
        Command::Bounds { common, penalties, prior } => cmd_bounds(&common, &penalties, &prior),
        Command::Simulate { common, run, policy } => cmd_simulate(&common, &run, &policy),
        Command::DpSolve {
            common,
            penalty,
            resolution,
        } => cmd_dp_solve(&common, penalty, resolution),
        Command::RateSweep {
            model,
            penalty,
            policy,
            rho_tilde,
            trials,
            seed,
            tol,
            out,
        } => cmd_rate_sweep(&model, penalty, &policy, rho_tilde, trials, seed, tol, out.as_deref()),
        Command::Nds {
            locations,
            noise,
            family,
            out,
        } => cmd_nds(locations, &noise, &family, out.as_deref()),
        Command::Sandwich {
            common,
            run,
            policy,
            resolution,
        } => cmd_sandwich(&common, &run, &policy, resolution),
    }
    .map(|()| ExitCode::SUCCESS)
}

fn cmd_validate(path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: cannot read: {e}", path.display())))?;
    let file = ModelFile::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let report = validate(&file).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let rendered = render_report(path, &text, &report);
    if report.is_usable() {
        print!("{rendered}");
        println!("ok: {} hypotheses, {} actions, {} symbols", file.num_hypotheses, file.actions.len(), file.alphabet.len());
        Ok(())
    } else {
        Err(CliError::Report(rendered))
    }
}

fn cmd_solve_game(c: &Common) -> Result<()> {
    check_out(c.out.as_deref(), &[&c.model])?;
    let model = load_model(&c.model)?;
    let q = quantities(&model, c.rho_tilde, c.tol)?;
    let mut t = Table::new(&["quantity", "hypothesis", "action", "value"]);
    model_meta(&mut t, &c.model, &model);
    t.meta("rho_tilde", c.rho_tilde);
    t.meta("tol", c.tol);
    t.meta("converged", q.converged());
    t.meta("mu_gap", q.mu_report.best_response_gap);
    t.meta("eta_gap", q.eta_report.best_response_gap);
    t.meta("i_max_gap", q.i_max_report.best_response_gap);
    for (name, v) in q.scalars() {
        t.row(vec![name, String::new(), String::new(), num(v)]);
    }
    let actions = model.actions();
    let mut mixture = |name: &str, hyp: String, weights: &[f64]| {
        for (a, w) in weights.iter().enumerate() {
            t.row(vec![name.to_string(), hyp.clone(), actions[a].clone(), num(*w)]);
        }
    };
    mixture("mu0", String::new(), q.mu0.weights());
    for (i, m) in q.mu.iter().enumerate() {
        mixture("mu", i.to_string(), m.weights());
    }
    mixture("eta0", String::new(), q.eta0.weights());
    for (i, m) in q.eta.iter().enumerate() {
        mixture("eta", i.to_string(), m.weights());
    }
    t.emit(c.out.as_deref())
}

fn cmd_bounds(c: &Common, penalties: &[f64], prior: &str) -> Result<()> {
    check_out(c.out.as_deref(), &[&c.model])?;
    check_penalties(penalties)?;
    let model = load_model(&c.model)?;
    let prior = parse_prior(prior, model.num_hypotheses())?;
    let q = quantities(&model, c.rho_tilde, c.tol)?;
    let bounds = Bounds::new(&model, &q)?;
    let params = BoundParams::default();
    let mut t = Table::new(&["L", "bound", "value", "note"]);
    model_meta(&mut t, &c.model, &model);
    t.meta("prior", format!("{:?}", prior.probs()));
    t.meta("rho_tilde", c.rho_tilde);
    for &l in penalties {
        let report = bounds.report(&prior, l, &params);
        for e in &report.entries {
            t.row(vec![
                num(l),
                e.name.to_string(),
                e.bound.map(|b| b.to_string()).unwrap_or_default(),
                e.note.clone().unwrap_or_default(),
            ]);
        }
    }
    t.emit(c.out.as_deref())
}

/// Builds the requested policy and runs the estimate.
#[allow(clippy::too_many_arguments)]
fn run_policy(
    model: &Model,
    kind: PolicyKind,
    q: Option<&GameQuantities>,
    rho_tilde: f64,
    penalty: f64,
    prior: &Belief,
    run: &RunArgs,
    resolution: Option<usize>,
) -> Result<SimEstimate> {
    if run.trials == 0 {
        return Err(usage("--trials must be >= 1"));
    }
    let est = if kind == PolicyKind::Dp {
        let grid = dp_grid(model, penalty, resolution)?;
        let policy = GridPolicy::new(model, &grid)?;
        sim::estimate(model, &policy, penalty, prior, run.trials, run.seed)?
    } else {
        let q = q.expect("threshold policies need game quantities").clone();
        let policy = ThresholdPolicy::new(kind, PolicyConfig::new(penalty, rho_tilde, q)?)?;
        sim::estimate(model, &policy as &dyn Policy, penalty, prior, run.trials, run.seed)?
    };
    if est.capped > 0 {
        eprintln!("warning: {} trials hit the step cap at L = {penalty} and count as errors", est.capped);
    }
    if est.tiny_marginal_trials > 0 {
        eprintln!(
            "warning: {} trials observed a symbol with predictive probability below {:e}",
            est.tiny_marginal_trials,
            sim::TINY_MARGINAL
        );
    }
    Ok(est)
}

fn dp_grid(model: &Model, penalty: f64, resolution: Option<usize>) -> Result<ValueGrid> {
    let m = model.num_hypotheses();
    if m > MAX_HYPOTHESES {
        return Err(usage(format!("the dp oracle supports M <= {MAX_HYPOTHESES}, model has M = {m}")));
    }
    let n = resolution.unwrap_or_else(|| default_resolution(m));
    let grid = value_iterate(model, penalty, n, DP_TOL, DEFAULT_MAX_SWEEPS)?;
    if !grid.converged {
        eprintln!("warning: value iteration stopped after {} sweeps (change {:e})", grid.sweeps, grid.convergence);
    }
    Ok(grid)
}

fn cmd_simulate(c: &Common, run: &RunArgs, policy: &str) -> Result<()> {
    check_out(c.out.as_deref(), &[&c.model])?;
    check_penalties(&run.penalties)?;
    let kind = parse_policy(policy)?;
    let model = load_model(&c.model)?;
    let prior = parse_prior(&run.prior, model.num_hypotheses())?;
    let q = if kind == PolicyKind::Dp {
        None
    } else {
        Some(quantities(&model, c.rho_tilde, c.tol)?)
    };
    let mut header = vec!["policy", "L"];
    header.extend(ESTIMATE_COLUMNS);
    let mut t = Table::new(&header);
    model_meta(&mut t, &c.model, &model);
    t.meta("policy", kind);
    t.meta("L", format!("{:?}", run.penalties));
    t.meta("prior", format!("{:?}", prior.probs()));
    t.meta("rho_tilde", c.rho_tilde);
    t.meta("seed", run.seed);
    t.meta("rng", sim::RNG_NAME);
    for &l in &run.penalties {
        let est = run_policy(&model, kind, q.as_ref(), c.rho_tilde, l, &prior, run, None)?;
        let mut row = vec![kind.to_string(), num(l)];
        row.extend(estimate_row(&est));
        t.row(row);
    }
    t.emit(c.out.as_deref())
}

fn cmd_dp_solve(c: &Common, penalty: f64, resolution: Option<usize>) -> Result<()> {
    check_out(c.out.as_deref(), &[&c.model])?;
    check_penalties(&[penalty])?;
    let model = load_model(&c.model)?;
    let m = model.num_hypotheses();
    let grid = dp_grid(&model, penalty, resolution)?;
    let n = grid.resolution();
    let margin = if n % 2 == 0 && n / 2 >= activeht::dp::MIN_RESOLUTION {
        let coarse = value_iterate(&model, penalty, n / 2, DP_TOL, DEFAULT_MAX_SWEEPS)?;
        Some(interpolation_margin(&grid, &coarse)?)
    } else {
        None
    };
    let mut header: Vec<String> = (0..m).map(|i| format!("k_{i}")).collect();
    header.extend((0..m).map(|i| format!("rho_{i}")));
    header.push("value".into());
    let mut t = Table::with_header(header);
    model_meta(&mut t, &c.model, &model);
    t.meta("L", penalty);
    t.meta("resolution", n);
    t.meta("sweeps", grid.sweeps);
    t.meta("final_change", grid.convergence);
    t.meta("converged", grid.converged);
    t.meta("interpolation_margin", opt_num(margin));
    let lat = grid.lattice();
    for p in 0..lat.len() {
        let mut row: Vec<String> = lat.coords(p).iter().map(|k| k.to_string()).collect();
        row.extend(lat.belief(p).probs().iter().map(|&r| num(r)));
        row.push(num(grid.values[p]));
        t.row(row);
    }
    t.emit(c.out.as_deref())
}

#[allow(clippy::too_many_arguments)]
fn cmd_rate_sweep(
    paths: &[PathBuf],
    penalty: f64,
    policy: &str,
    rho_tilde: f64,
    trials: usize,
    seed: u64,
    tol: f64,
    out: Option<&Path>,
) -> Result<()> {
    let inputs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    check_out(out, &inputs)?;
    check_penalties(&[penalty])?;
    let kind = parse_policy(policy)?;
    if kind == PolicyKind::Dp {
        return Err(usage("rate-sweep supports the threshold policies pi1, pi2 and chernoff"));
    }
    if trials == 0 {
        return Err(usage("--trials must be >= 1"));
    }
    let models: Vec<Model> = paths.iter().map(|p| load_model(p)).collect::<Result<_>>()?;
    let sweep = sim::rate_sweep(&models, kind, penalty, rho_tilde, trials, seed, &solver_options(tol)?)?;
    let mut t = Table::new(&[
        "M",
        "mean_tau",
        "tau_half_width",
        "pe",
        "pe_upper",
        "rate",
        "reliability",
        "ub_v2bar",
        "converse_reliability",
        "achievable_reliability",
    ]);
    t.meta("models", paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
    t.meta(
        "model_hashes",
        models.iter().map(Model::content_hash).collect::<Vec<_>>().join(","),
    );
    t.meta("policy", kind);
    t.meta("L", penalty);
    t.meta("rho_tilde", rho_tilde);
    t.meta("seed", seed);
    t.meta("rng", sim::RNG_NAME);
    let r = sweep.region;
    t.meta(
        "region",
        format!("d_max_sup={} i_max_sup={} d2_inf={} i2_inf={}", r.d_max_sup, r.i_max_sup, r.d2_inf, r.i2_inf),
    );
    for p in &sweep.points {
        t.row(vec![
            p.num_hypotheses.to_string(),
            num(p.estimate.tau.mean),
            num(p.estimate.tau.half_width),
            num(p.estimate.pe),
            num(p.estimate.pe_upper),
            num(p.rate),
            num(p.reliability),
            num(p.ub_v2bar),
            num(p.converse_reliability),
            num(p.achievable_reliability),
        ]);
    }
    t.emit(out)
}

fn cmd_nds(m: usize, noise: &[f64], family: &str, out: Option<&Path>) -> Result<()> {
    let family: ActionFamily = family.parse().map_err(|e: activeht::Error| usage(e.to_string()))?;
    let spec = match noise {
        [p] => NdsSpec::size_independent(m, *p, family),
        profile => NdsSpec::new(m, profile.to_vec(), family),
    }
    .map_err(|e| match e {
        activeht::Error::TooLarge(s) => usage(s),
        other => usage(other.to_string()),
    })?;
    let model = build_model(&spec)?;
    let text = model.to_file().to_json() + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_sandwich(c: &Common, run: &RunArgs, policy: &str, resolution: Option<usize>) -> Result<()> {
    check_out(c.out.as_deref(), &[&c.model])?;
    check_penalties(&run.penalties)?;
    let kind = parse_policy(policy)?;
    if kind == PolicyKind::Dp {
        return Err(usage("sandwich compares a threshold policy against the grid optimum; use pi1, pi2 or chernoff"));
    }
    let model = load_model(&c.model)?;
    let m = model.num_hypotheses();
    let prior = parse_prior(&run.prior, m)?;
    let q = quantities(&model, c.rho_tilde, c.tol)?;
    let bounds = Bounds::new(&model, &q)?;
    let mut t = Table::new(&[
        "L",
        "lb_alpha_form",
        "dp_value",
        "dp_margin",
        "simulated_cost",
        "simulated_cost_half_width",
        "ub_v2bar",
        "ordered",
    ]);
    model_meta(&mut t, &c.model, &model);
    t.meta("policy", kind);
    t.meta("prior", format!("{:?}", prior.probs()));
    t.meta("rho_tilde", c.rho_tilde);
    t.meta("trials", run.trials);
    t.meta("seed", run.seed);
    t.meta("rng", sim::RNG_NAME);
    let mut all_ordered = true;
    for &l in &run.penalties {
        let lb = lb_alpha_form(&prior, l, q.i_max)?.as_f64();
        let ub = bounds.ub_v2bar(&prior, l)?.as_f64();
        let est = run_policy(&model, kind, Some(&q), c.rho_tilde, l, &prior, run, None)?;
        let (dp_value, margin) = if m <= MAX_HYPOTHESES {
            let grid = dp_grid(&model, l, resolution)?;
            let n = grid.resolution();
            let coarse = value_iterate(&model, l, (n / 2).max(activeht::dp::MIN_RESOLUTION), DP_TOL, DEFAULT_MAX_SWEEPS)?;
            let margin = if n % coarse.resolution() == 0 {
                interpolation_margin(&grid, &coarse)?
            } else {
                (grid.value_at(&prior) - coarse.value_at(&prior)).abs()
            };
            (Some(grid.value_at(&prior)), Some(margin))
        } else {
            (None, None)
        };
        let cost = est.total_cost;
        let ordered = match (dp_value, margin) {
            (Some(v), Some(e)) => lb <= v + e && v <= cost.upper() + e && cost.lower() <= ub,
            _ => lb <= cost.upper() && cost.lower() <= ub,
        };
        all_ordered &= ordered;
        t.row(vec![
            num(l),
            num(lb),
            opt_num(dp_value),
            opt_num(margin),
            num(cost.mean),
            num(cost.half_width),
            num(ub),
            ordered.to_string(),
        ]);
    }
    if !all_ordered {
        eprintln!("warning: the ordering lb <= dp <= simulated <= ub failed for some L; see the 'ordered' column");
    }
    t.emit(c.out.as_deref())
}
