//! `spectrum`: lowest eigenvalues of a discretized tower, optionally
//! checked against the separable analytic values of a single square.

use crate::config::ConfigFile;
use crate::output::{RunDir, SCHEMA_VERSION};
use crate::{commands::exit_code_for, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use serde::Serialize;
use spectral_tower_core::spectral::lowest_eigenpairs;
use spectral_tower_core::{Dyadic, GridDomain};
use std::path::Path;

#[derive(Serialize)]
struct SpectrumReport {
    schema_version: u32,
    h: String,
    cubes: usize,
    open_windows: usize,
    nodes: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    gaps: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic: Option<AnalyticCheck>,
}

#[derive(Serialize)]
struct AnalyticCheck {
    values: Vec<f64>,
    relative_errors: Vec<f64>,
    max_relative_error: f64,
}

pub fn run(out: &Path, cfg: &ConfigFile, h_flag: Option<&str>, analytic_check: bool) -> u8 {
    let seed = match cfg.u64_or("seed", 7) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut dir = match RunDir::create(out, "spectrum", cfg, seed) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create run directory: {e}");
            return EXIT_INPUT;
        }
    };
    let code = execute(&mut dir, cfg, h_flag, analytic_check, seed);
    dir.finalize(code as i32);
    code
}

fn parse_h(cfg: &ConfigFile, flag: Option<&str>) -> Result<Dyadic, String> {
    if let Some(raw) = flag {
        return Dyadic::parse(raw).ok_or_else(|| format!("--h must be dyadic, got `{raw}`"));
    }
    cfg.dyadic_or("h", Dyadic::inv_pow2(4)).map_err(|e| e.to_string())
}

fn execute(
    dir: &mut RunDir,
    cfg: &ConfigFile,
    h_flag: Option<&str>,
    analytic_check: bool,
    seed: u64,
) -> u8 {
    let tower = match cfg.tower() {
        Ok(Some(t)) => t,
        Ok(None) => {
            eprintln!("spectrum needs a tower (`halfwidths` key)");
            return EXIT_INPUT;
        }
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let h = match parse_h(cfg, h_flag) {
        Ok(h) => h,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    let count = match cfg.usize_or("count", 6) {
        Ok(c) => c.max(1),
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let cubes = match cfg.usize_or("cubes", tower.count()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let default_open = cubes.saturating_sub(1).min(tower.windows().len());
    let open_windows = match cfg.usize_or("open_windows", default_open) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };

    let (grid, op) = match GridDomain::assemble(&tower, cubes, open_windows, h) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("assembly failed: {e}");
            return exit_code_for(&e);
        }
    };
    let solver_tol = match cfg.f64_or("solver_tol", 1e-11) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let pairs = match lowest_eigenpairs(&op, count, solver_tol, seed) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("eigensolve failed: {e}");
            return exit_code_for(&e);
        }
    };

    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let analytic = if analytic_check {
        if tower.count() != 1 {
            eprintln!("--analytic-check needs a single-square tower");
            return EXIT_INPUT;
        }
        let a = tower.halfwidth(0).to_f64();
        let base = std::f64::consts::PI.powi(2) / (4.0 * a * a);
        let mut values: Vec<f64> = (1..=count as i64 + 4)
            .flat_map(|k| (1..=count as i64 + 4).map(move |l| base * (k * k + l * l) as f64))
            .collect();
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        values.truncate(eigenvalues.len());
        let relative_errors: Vec<f64> = eigenvalues
            .iter()
            .zip(&values)
            .map(|(c, a)| (c - a).abs() / a)
            .collect();
        let max_relative_error = relative_errors.iter().copied().fold(0.0, f64::max);
        Some(AnalyticCheck { values, relative_errors, max_relative_error })
    } else {
        None
    };

    let report = SpectrumReport {
        schema_version: SCHEMA_VERSION,
        h: h.to_string(),
        cubes,
        open_windows,
        nodes: grid.len(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        gaps: pairs.iter().map(|p| p.multiplicity_gap).collect(),
        eigenvalues,
        analytic,
    };
    if let Err(e) = dir.write_json("spectrum.json", &report) {
        eprintln!("cannot write report: {e}");
        return EXIT_NUMERICAL;
    }
    for (i, v) in report.eigenvalues.iter().enumerate() {
        println!("lambda_{} = {v:.12}", i + 1);
    }
    if let Some(a) = &report.analytic {
        println!("max relative error vs analytic: {:.3e}", a.max_relative_error);
    }
    println!("report: {}", dir.path.join("spectrum.json").display());
    EXIT_OK
}
