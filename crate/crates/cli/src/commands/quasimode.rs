//! `quasimode`: residual decay of localized plane waves over growing
//! inscribed squares, with the fitted log-log slope.

use crate::config::ConfigFile;
use crate::output::{thread_cap, RunDir, SCHEMA_VERSION};
use crate::{commands::exit_code_for, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use serde::Serialize;
use spectral_tower_core::quasimode::{fit_slope, residual_scan, ScanRow, SpacingPolicy};
use spectral_tower_core::{Dyadic, TowerSpec};
use std::path::Path;

#[derive(Serialize)]
struct ScanReport {
    schema_version: u32,
    lambda: f64,
    theta: f64,
    rows: Vec<RowJson>,
    slope: Option<f64>,
}

#[derive(Serialize)]
struct RowJson {
    radius: f64,
    h: f64,
    residual: f64,
}

pub fn run(
    out: &Path,
    cfg: &ConfigFile,
    lambda_flag: Option<f64>,
    theta_flag: Option<f64>,
    h_flag: Option<&str>,
) -> u8 {
    let seed = match cfg.u64_or("seed", 7) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut dir = match RunDir::create(out, "quasimode", cfg, seed) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create run directory: {e}");
            return EXIT_INPUT;
        }
    };
    let code = execute(&mut dir, cfg, lambda_flag, theta_flag, h_flag);
    dir.finalize(code as i32);
    code
}

fn scan_parallel(
    spec: &TowerSpec,
    lambda: f64,
    theta: f64,
    truncations: &[usize],
    policy: SpacingPolicy,
) -> Result<Vec<ScanRow>, spectral_tower_core::TowerError> {
    let workers = thread_cap().min(truncations.len().max(1));
    if workers <= 1 {
        return residual_scan(spec, lambda, theta, truncations, policy).map(|s| s.rows);
    }
    let mut results: Vec<Option<Result<ScanRow, spectral_tower_core::TowerError>>> =
        (0..truncations.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks = results.chunks_mut(truncations.len().div_ceil(workers));
        for (slot_chunk, n_chunk) in
            chunks.zip(truncations.chunks(truncations.len().div_ceil(workers)))
        {
            scope.spawn(move || {
                for (slot, &n) in slot_chunk.iter_mut().zip(n_chunk) {
                    *slot = Some(
                        residual_scan(spec, lambda, theta, &[n], policy)
                            .map(|mut s| s.rows.remove(0)),
                    );
                }
            });
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

fn execute(
    dir: &mut RunDir,
    cfg: &ConfigFile,
    lambda_flag: Option<f64>,
    theta_flag: Option<f64>,
    h_flag: Option<&str>,
) -> u8 {
    let tower = match cfg.tower() {
        Ok(Some(t)) => t,
        Ok(None) => {
            eprintln!("quasimode needs a tower (`halfwidths` key)");
            return EXIT_INPUT;
        }
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let lambda = match lambda_flag {
        Some(l) => l,
        None => match cfg.f64_or("lambda", std::f64::consts::PI.powi(2) / 2.0) {
            Ok(l) => l,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_INPUT;
            }
        },
    };
    if !(lambda >= 0.0) {
        eprintln!("lambda must be non-negative");
        return EXIT_INPUT;
    }
    let theta = match theta_flag {
        Some(t) => t,
        None => match cfg.f64_or("theta", 0.0) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_INPUT;
            }
        },
    };
    let h = match h_flag {
        Some(raw) => match Dyadic::parse(raw) {
            Some(h) => h,
            None => {
                eprintln!("--h must be dyadic, got `{raw}`");
                return EXIT_INPUT;
            }
        },
        None => match cfg.dyadic_or("h", Dyadic::inv_pow2(3)) {
            Ok(h) => h,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_INPUT;
            }
        },
    };
    let truncations = match cfg.truncations(tower.count()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };

    let rows = match scan_parallel(&tower, lambda, theta, &truncations, SpacingPolicy::Fixed(h)) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("scan failed: {e}");
            return exit_code_for(&e);
        }
    };
    let slope = fit_slope(&rows);

    let mut csv = String::from("R,h,residual\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.radius, r.h, r.residual));
    }
    if let Err(e) = dir.write_text("scan.csv", &csv) {
        eprintln!("cannot write scan: {e}");
        return EXIT_NUMERICAL;
    }
    let report = ScanReport {
        schema_version: SCHEMA_VERSION,
        lambda,
        theta,
        rows: rows
            .iter()
            .map(|r| RowJson { radius: r.radius, h: r.h, residual: r.residual })
            .collect(),
        slope,
    };
    if let Err(e) = dir.write_json("quasimode.json", &report) {
        eprintln!("cannot write report: {e}");
        return EXIT_NUMERICAL;
    }
    for r in &rows {
        println!("{} {} {}", r.radius, r.h, r.residual);
    }
    if let Some(s) = slope {
        println!("slope {s}");
    }
    println!("report: {}", dir.path.join("quasimode.json").display());
    EXIT_OK
}
