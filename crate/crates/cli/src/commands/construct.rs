//! `construct`: run the window-shrinking growth procedure, persist the
//! audit trace, optionally verify the uniform bounds or replay a saved
//! trace.

use crate::config::ConfigFile;
use crate::output::{field_dump, RunDir, SCHEMA_VERSION};
use crate::{commands::exit_code_for, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use serde::{Deserialize, Serialize};
use spectral_tower_core::construction::{
    estimate_limit_eigenvalue, replay_schedule, run_construction_observed, ConstructionConfig,
    ConstructionTrace, StepRecord, UniformBoundsReport,
};
use spectral_tower_core::Dyadic;
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    epsilon: f64,
    cubes: usize,
    a1: String,
    tau: Option<f64>,
    ell: u32,
    h0: String,
    delta_start: String,
    max_refinements: u32,
    norm_floor: f64,
    seed: u64,
    solver_tol: f64,
}

#[derive(Serialize, Deserialize)]
struct StepJson {
    n: usize,
    a_next: String,
    eps_n: f64,
    delta: String,
    h: String,
    lambda_prev: f64,
    lambda_next: f64,
    overlap: f64,
    d_lambda: f64,
    d_psi: f64,
    loc1: f64,
    res_norm: f64,
    trace_norm: f64,
    trace_tail: f64,
    refinements: u32,
    tau_eff: f64,
    gap: f64,
    rayleigh: f64,
}

#[derive(Serialize, Deserialize)]
struct TraceJson {
    schema_version: u32,
    config: ConfigJson,
    lambda_initial: f64,
    steps: Vec<StepJson>,
    lambda_limit: f64,
    bracket: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    verdicts: Option<VerdictsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct VerdictsJson {
    all_ok: bool,
    monotone: bool,
    budget: bool,
    psi_budget: bool,
    norm_conditions: bool,
    uniform_lambda: bool,
    localization: bool,
    rayleigh: bool,
    worst_budget_margin: f64,
    worst_localization_margin: f64,
    vacuous: bool,
}

fn config_to_json(c: &ConstructionConfig) -> ConfigJson {
    ConfigJson {
        epsilon: c.epsilon,
        cubes: c.cubes,
        a1: c.a1.to_string(),
        tau: c.tau,
        ell: c.ell,
        h0: c.h0.to_string(),
        delta_start: c.delta_start.to_string(),
        max_refinements: c.max_refinements,
        norm_floor: c.norm_floor,
        seed: c.seed,
        solver_tol: c.solver_tol,
    }
}

fn config_from_json(j: &ConfigJson) -> Result<ConstructionConfig, String> {
    let dy = |s: &str, what: &str| {
        Dyadic::parse(s).ok_or_else(|| format!("trace carries non-dyadic {what}: `{s}`"))
    };
    Ok(ConstructionConfig {
        epsilon: j.epsilon,
        cubes: j.cubes,
        a1: dy(&j.a1, "a1")?,
        tau: j.tau,
        ell: j.ell,
        h0: dy(&j.h0, "h0")?,
        delta_start: dy(&j.delta_start, "delta_start")?,
        max_refinements: j.max_refinements,
        norm_floor: j.norm_floor,
        seed: j.seed,
        solver_tol: j.solver_tol,
    })
}

fn step_to_json(s: &StepRecord) -> StepJson {
    StepJson {
        n: s.n,
        a_next: s.a_next.to_string(),
        eps_n: s.eps_n,
        delta: s.delta.to_string(),
        h: s.h.to_string(),
        lambda_prev: s.lambda_prev,
        lambda_next: s.lambda_next,
        overlap: s.overlap,
        d_lambda: s.d_lambda,
        d_psi: s.d_psi,
        loc1: s.loc1,
        res_norm: s.res_norm,
        trace_norm: s.trace_norm,
        trace_tail: s.trace_tail,
        refinements: s.refinements,
        tau_eff: s.tau_eff,
        gap: s.gap,
        rayleigh: s.rayleigh,
    }
}

fn verdicts_to_json(r: &UniformBoundsReport) -> VerdictsJson {
    VerdictsJson {
        all_ok: r.all_ok(),
        monotone: r.monotone,
        budget: r.budget,
        psi_budget: r.psi_budget,
        norm_conditions: r.norm_conditions,
        uniform_lambda: r.uniform_lambda,
        localization: r.localization,
        rayleigh: r.rayleigh,
        worst_budget_margin: r.worst_budget_margin,
        worst_localization_margin: r.worst_localization_margin,
        vacuous: r.vacuous,
    }
}

#[derive(Serialize)]
struct ReplayReport {
    schema_version: u32,
    lambdas_recorded: Vec<f64>,
    lambdas_replayed: Vec<f64>,
    max_deviation: f64,
    tolerance: f64,
    reproduced: bool,
}

pub fn run(
    out: &Path,
    cfg: &ConfigFile,
    verify: bool,
    dump_fields: bool,
    replay: Option<&Path>,
) -> u8 {
    let seed = cfg.u64_or("seed", 7).unwrap_or(7);
    let mut dir = match RunDir::create(out, "construct", cfg, seed) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create run directory: {e}");
            return EXIT_INPUT;
        }
    };
    let code = match replay {
        Some(trace_path) => run_replay(&mut dir, trace_path),
        None => match cfg.construction() {
            Ok(config) => run_growth(&mut dir, &config, verify, dump_fields),
            Err(e) => {
                eprintln!("config error: {e}");
                EXIT_INPUT
            }
        },
    };
    dir.finalize(code as i32);
    code
}

fn run_growth(dir: &mut RunDir, config: &ConstructionConfig, verify: bool, dump_fields: bool) -> u8 {
    let mut dumps: Vec<(usize, String)> = Vec::new();
    let run = run_construction_observed(config, &mut |n, grid, psi| {
        if dump_fields {
            dumps.push((n, field_dump(grid, psi)));
        }
    });
    for (n, body) in dumps {
        if let Err(e) = dir.write_text(&format!("psi_{n:02}.txt", n = n), &body) {
            eprintln!("cannot write field dump: {e}");
        }
    }
    let verdicts = verify.then(|| spectral_tower_core::construction::verify_uniform_bounds(&run.trace));
    let json = trace_to_json(config, &run.trace, verdicts.as_ref(), run.failure.as_ref().map(|e| e.to_string()));
    if let Err(e) = dir.write_json("trace.json", &json) {
        eprintln!("cannot write trace: {e}");
        return EXIT_NUMERICAL;
    }
    println!("lambda_1 = {:.12}", run.trace.lambda_initial);
    for s in &run.trace.steps {
        println!(
            "step {}: a = {}, delta = {}, h = {}, lambda = {:.12}, d_lambda = {:.3e}, d_psi = {:.3e}",
            s.n, s.a_next, s.delta, s.h, s.lambda_next, s.d_lambda, s.d_psi
        );
    }
    if let Ok((limit, bracket)) = estimate_limit_eigenvalue(&run.trace) {
        println!("limit estimate: {limit:.12} in [{:.12}, {:.12}]", bracket.0, bracket.1);
    }
    println!("trace: {}", dir.path.join("trace.json").display());

    if let Some(e) = run.failure {
        eprintln!("construction failed: {e}");
        return exit_code_for(&e);
    }
    if let Some(v) = verdicts {
        if !v.all_ok() {
            eprintln!("uniform-bound verdicts failed: {v:?}");
            return EXIT_NUMERICAL;
        }
        println!("uniform bounds verified");
    }
    EXIT_OK
}

fn trace_to_json(
    config: &ConstructionConfig,
    trace: &ConstructionTrace,
    verdicts: Option<&UniformBoundsReport>,
    failure: Option<String>,
) -> TraceJson {
    TraceJson {
        schema_version: SCHEMA_VERSION,
        config: config_to_json(config),
        lambda_initial: trace.lambda_initial,
        steps: trace.steps.iter().map(step_to_json).collect(),
        lambda_limit: trace.lambda_limit,
        bracket: trace.bracket,
        verdicts: verdicts.map(verdicts_to_json),
        failure,
    }
}

/// Tolerance for replay agreement on every eigenvalue.
pub const REPLAY_TOLERANCE: f64 = 1e-10;

fn run_replay(dir: &mut RunDir, trace_path: &Path) -> u8 {
    let text = match std::fs::read_to_string(trace_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read trace {}: {e}", trace_path.display());
            return EXIT_INPUT;
        }
    };
    let json: TraceJson = match serde_json::from_str(&text) {
        Ok(j) => j,
        Err(e) => {
            eprintln!("malformed trace: {e}");
            return EXIT_INPUT;
        }
    };
    let config = match config_from_json(&json.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    let mut schedule = Vec::new();
    for s in &json.steps {
        let parsed = (
            Dyadic::parse(&s.a_next),
            Dyadic::parse(&s.delta),
            Dyadic::parse(&s.h),
        );
        match parsed {
            (Some(a), Some(d), Some(h)) => schedule.push((a, d, h)),
            _ => {
                eprintln!("step {}: non-dyadic schedule entry", s.n);
                return EXIT_INPUT;
            }
        }
    }
    let mut recorded = vec![json.lambda_initial];
    recorded.extend(json.steps.iter().map(|s| s.lambda_next));
    let replayed = match replay_schedule(&config, &schedule) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("replay failed: {e}");
            return exit_code_for(&e);
        }
    };
    let max_deviation = recorded
        .iter()
        .zip(&replayed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let reproduced = replayed.len() == recorded.len() && max_deviation <= REPLAY_TOLERANCE;
    let report = ReplayReport {
        schema_version: SCHEMA_VERSION,
        lambdas_recorded: recorded,
        lambdas_replayed: replayed,
        max_deviation,
        tolerance: REPLAY_TOLERANCE,
        reproduced,
    };
    if let Err(e) = dir.write_json("replay.json", &report) {
        eprintln!("cannot write replay report: {e}");
        return EXIT_NUMERICAL;
    }
    println!("replay max deviation: {max_deviation:.3e}");
    if report.reproduced {
        EXIT_OK
    } else {
        eprintln!("replay deviates beyond {REPLAY_TOLERANCE:.1e}");
        EXIT_NUMERICAL
    }
}
