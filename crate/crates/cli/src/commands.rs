use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use coordination::aux_opt::{brute_force_oracle, default_cardinality, maximize, AuxSolution, OptimizerConfig};
use coordination::binary_example::{
    alpha_star, alpha_star_sweep, emit_curves, make_target, ExampleParams, ALPHA_MAX,
};
use coordination::coord_sim::{estimate_error_probability, run_session, trace_csv, Scheme, SimConfig, DEFAULT_SEED};
use coordination::prob::JointDist;
use coordination::settings::var::{W, X};
use coordination::settings::{
    constraint_sc_feedback, constraint_sd_feedback, rate_window, validate_decomposition, CoordinationProblem,
    SettingId, ValidationReport, Verdict,
};
use coordination::Error;
use serde_json::{json, Value};

use crate::args::{Cli, Command, EvaluateArgs, ExampleCommand, FileArgs, OptimizeArgs, SimulateArgs};
use crate::problem_file::ProblemFile;
use crate::report::{digest, number, RunReport};
use crate::{CliError, Outcome, Output, EXIT_INFEASIBLE};

type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn dispatch(cli: &Cli, args: Vec<String>) -> Result<Outcome> {
    match &cli.command {
        Command::Validate(a) => validate(a, args),
        Command::Evaluate(a) => evaluate(a, args),
        Command::Optimize(a) => optimize(a, args),
        Command::Simulate(a) => simulate(a, args),
        Command::Example(e) => example(e, args),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON values")
}

struct Loaded {
    problem: CoordinationProblem,
    digest: String,
}

fn load(a: &FileArgs) -> Result<Loaded> {
    let bytes = fs::read(&a.file).map_err(|source| CliError::Read {
        path: a.file.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Malformed {
        path: "(document)".into(),
        reason: e.to_string(),
    })?;
    let problem = ProblemFile::parse(&text)?.to_problem(a.setting)?;
    Ok(Loaded {
        problem,
        digest: digest(&bytes),
    })
}

fn report(command: &str, args: Vec<String>, input: Option<&Loaded>, seed: u64, results: Value) -> RunReport {
    RunReport {
        command: command.to_string(),
        args,
        input_digest: input.map(|l| l.digest.clone()),
        seed,
        results,
        wall_time_seconds: None,
    }
}

fn violations(r: &ValidationReport) -> String {
    let labels: Vec<&str> = r.violations().map(|c| c.label.as_str()).collect();
    format!("decomposition violated: {}", labels.join(", "))
}

fn check_flag(flag: &'static str, ok: bool, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Flag { flag, reason: reason() })
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn validate(a: &FileArgs, args: Vec<String>) -> Result<Outcome> {
    let loaded = load(a)?;
    let p = &loaded.problem;
    let r = validate_decomposition(p.setting, p, &p.target()?);
    let results = json!({ "setting": p.setting, "validation": to_value(&r) });
    let code = if r.passed { 0 } else { EXIT_INFEASIBLE };
    let message = (!r.passed).then(|| violations(&r));
    Ok(Outcome {
        output: Output::Report(report("validate", args, Some(&loaded), DEFAULT_SEED, results)),
        code,
        message,
    })
}

fn evaluate(a: &EvaluateArgs, args: Vec<String>) -> Result<Outcome> {
    check_flag("delta", a.delta > 0.0 && a.delta.is_finite(), || format!("must be positive, got {}", a.delta))?;
    let loaded = load(&a.file)?;
    let p = &loaded.problem;
    if p.setting.auxiliary().is_some() {
        return Err(Error::NeedsAuxiliary(p.setting).into());
    }
    let target = p.target()?;
    let r = validate_decomposition(p.setting, p, &target);
    if !r.passed {
        let results = json!({ "setting": p.setting, "validation": to_value(&r) });
        return Ok(Outcome {
            output: Output::Report(report("evaluate", args, Some(&loaded), DEFAULT_SEED, results)),
            code: EXIT_INFEASIBLE,
            message: Some(violations(&r)),
        });
    }
    let (value, window) = match p.setting {
        SettingId::ScEncFb => {
            let nx = target.alphabet(X)?.len();
            let window = rate_window(&target.with_copy(X, W, nx)?, a.delta)?;
            (constraint_sc_feedback(&target)?, Some(window))
        }
        _ => (constraint_sd_feedback(&target)?, None),
    };
    let results = json!({
        "setting": p.setting,
        "value": value,
        "verdict": Verdict::of(value),
        "delta": a.delta,
        "rate_window": window.map(|w| json!({
            "r_min": w.r_min,
            "r_max": w.r_max,
            "width": w.width(),
            "feasible": w.width() > 0.0,
        })),
        "validation": to_value(&r),
    });
    Ok(Outcome::ok(Output::Report(report("evaluate", args, Some(&loaded), DEFAULT_SEED, results))))
}

fn solution_summary(s: &AuxSolution) -> Value {
    json!({
        "value": s.value,
        "feasibility_residual": s.feasibility_residual,
        "method": s.method,
        "evaluations": s.evaluations,
        "aux_cardinality": s.aux_cardinality,
        "grid": s.grid,
        "extended": to_value(&s.extended),
    })
}

fn optimize(a: &OptimizeArgs, args: Vec<String>) -> Result<Outcome> {
    let loaded = load(&a.file)?;
    let p = &loaded.problem;
    if p.setting.auxiliary().is_none() {
        return Err(Error::NoAuxiliary(p.setting).into());
    }
    let defaults = OptimizerConfig::default();
    let cfg = OptimizerConfig {
        aux_cardinality: a.cardinality,
        restarts: a.restarts.unwrap_or(defaults.restarts),
        seed: a.seed,
        ..defaults
    };
    let sol = maximize(p.setting, p, &cfg)?;
    let mut results = json!({
        "setting": p.setting,
        "cardinality_bound": default_cardinality(p),
        "solution": solution_summary(&sol),
    });
    if let Some(grid) = a.grid_oracle {
        let oracle = brute_force_oracle(p.setting, p, sol.aux_cardinality, grid)?;
        results["oracle"] = solution_summary(&oracle);
        results["difference"] = json!(sol.value - oracle.value);
    }
    Ok(Outcome::ok(Output::Report(report("optimize", args, Some(&loaded), a.seed, results))))
}

fn simulate(a: &SimulateArgs, args: Vec<String>) -> Result<Outcome> {
    let loaded = load(&a.file)?;
    let p = &loaded.problem;
    let cfg = SimConfig {
        n: a.n,
        blocks: a.blocks,
        delta: a.delta,
        rate_override: a.rate,
        typ_tol: a.typ_tol,
        coord_tol: a.coord_tol,
        seed: a.seed,
        trials: a.trials,
        scheme: a.scheme.into(),
        max_messages: a.max_messages,
        fixed_codebook: false,
    };
    cfg.check()?;
    let target = p.target()?;
    let (e, auxiliary): (JointDist, Option<AuxSolution>) = match cfg.scheme {
        Scheme::WEqualsX => (target.with_copy(X, W, target.alphabet(X)?.len())?, None),
        Scheme::GenericW => {
            let opt = OptimizerConfig {
                aux_cardinality: a.cardinality,
                seed: a.seed,
                ..OptimizerConfig::default()
            };
            let sol = maximize(SettingId::CausalEncFb, &p.with_setting(SettingId::CausalEncFb), &opt)?;
            (sol.extended.clone(), Some(sol))
        }
    };
    let sim = estimate_error_probability(p, &e, &cfg)?;
    if let Some(path) = &a.trace {
        let (trace, _) = run_session(p, &e, &cfg)?;
        write_file(path, &trace_csv(&trace))?;
    }
    let results = json!({
        "scheme": cfg.scheme,
        "config": to_value(&cfg),
        "auxiliary": auxiliary.as_ref().map(solution_summary),
        "report": to_value(&sim),
    });
    Ok(Outcome::ok(Output::Report(report("simulate", args, Some(&loaded), a.seed, results))))
}

fn check_epsilon(eps: f64) -> Result<()> {
    check_flag("epsilon", (0.0..=0.5).contains(&eps), || format!("must lie in [0, 0.5], got {eps}"))
}

fn check_grid(grid: usize) -> Result<()> {
    check_flag("grid", grid >= 2, || format!("must be at least 2, got {grid}"))
}

fn csv(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        let cells: Vec<String> = r.into_iter().map(number).collect();
        writeln!(s, "{}", cells.join(",")).unwrap();
    }
    s
}

/// Prints `body` when there is no `out`; otherwise writes it and reports
/// where.
fn table_output(command: &str, args: Vec<String>, body: String, out: Option<&Path>, mut results: Value) -> Result<Outcome> {
    match out {
        None => Ok(Outcome::ok(Output::Text(body))),
        Some(path) => {
            write_file(path, &body)?;
            results["out"] = json!(path.display().to_string());
            results["out_digest"] = json!(digest(body.as_bytes()));
            Ok(Outcome::ok(Output::Report(report(command, args, None, DEFAULT_SEED, results))))
        }
    }
}

fn example(cmd: &ExampleCommand, args: Vec<String>) -> Result<Outcome> {
    match cmd {
        ExampleCommand::Curve { epsilon, grid, out } => {
            check_epsilon(*epsilon)?;
            check_grid(*grid)?;
            let rows = emit_curves(*epsilon, *grid)?;
            let body = csv(
                "alpha,coord_constraint,lossy_constraint",
                rows.iter().map(|r| vec![r.alpha, r.coord_constraint, r.lossy_constraint]),
            );
            let results = json!({ "epsilon": epsilon, "grid": grid, "rows": rows.len() });
            table_output("example curve", args, body, out.as_deref(), results)
        }
        ExampleCommand::AlphaStar {
            epsilon: Some(eps),
            out: None,
            ..
        } => {
            check_epsilon(*eps)?;
            let results = json!({ "epsilon": eps, "alpha_star": alpha_star(*eps)? });
            Ok(Outcome::ok(Output::Report(report("example alpha-star", args, None, DEFAULT_SEED, results))))
        }
        ExampleCommand::AlphaStar { epsilon, grid, out } => {
            let rows = match epsilon {
                Some(eps) => {
                    check_epsilon(*eps)?;
                    vec![(*eps, alpha_star(*eps)?)]
                }
                None => {
                    check_grid(*grid)?;
                    alpha_star_sweep(*grid)?
                }
            };
            let body = csv("epsilon,alpha_star", rows.iter().map(|&(e, a)| vec![e, a]));
            let results = json!({ "grid": rows.len(), "rows": rows.len() });
            table_output("example alpha-star", args, body, out.as_deref(), results)
        }
        ExampleCommand::EmitProblem { alpha, epsilon, out } => {
            check_flag("alpha", (0.0..=ALPHA_MAX).contains(alpha), || format!("must lie in [0, 0.875], got {alpha}"))?;
            check_epsilon(*epsilon)?;
            let problem = make_target(ExampleParams::new(*alpha, *epsilon)?)?;
            let body = serde_json::to_string_pretty(&ProblemFile::from_problem(&problem)).expect("problem files serialize") + "\n";
            let results = json!({ "alpha": alpha, "epsilon": epsilon });
            table_output("example emit-problem", args, body, out.as_deref(), results)
        }
    }
}
