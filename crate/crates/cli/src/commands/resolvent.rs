//! `resolvent`: operator norm, singular values, partial trace norm and
//! telescoping residual for the resolvent (power) difference across the
//! last window of a tower (open versus closed).

use crate::config::ConfigFile;
use crate::oracle;
use crate::output::{RunDir, SCHEMA_VERSION};
use crate::{commands::exit_code_for, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use serde::Serialize;
use spectral_tower_core::spectral::{
    operator_norm, singular_values, telescoping_residual, ResolventOp, ResolventPowerDifference,
};
use spectral_tower_core::{Dyadic, GridDomain};
use std::path::Path;

#[derive(Serialize)]
struct DenseCheck {
    s_values: Vec<f64>,
    partial_sum: f64,
    max_singular_value_deviation: f64,
    partial_sum_deviation: f64,
}

#[derive(Serialize)]
struct ResolventReport {
    schema_version: u32,
    h: String,
    ell: u32,
    nodes_big: usize,
    nodes_small: usize,
    op_norm: f64,
    s_values: Vec<f64>,
    tail_bound: f64,
    trace_norm_partial: f64,
    telescoping_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<DenseCheck>,
}

pub fn run(
    out: &Path,
    cfg: &ConfigFile,
    ell_flag: Option<u32>,
    h_flag: Option<&str>,
    dense_oracle: bool,
) -> u8 {
    let seed = match cfg.u64_or("seed", 7) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut dir = match RunDir::create(out, "resolvent", cfg, seed) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("cannot create run directory: {e}");
            return EXIT_INPUT;
        }
    };
    let code = execute(&mut dir, cfg, ell_flag, h_flag, dense_oracle, seed);
    dir.finalize(code as i32);
    code
}

fn execute(
    dir: &mut RunDir,
    cfg: &ConfigFile,
    ell_flag: Option<u32>,
    h_flag: Option<&str>,
    dense_oracle: bool,
    seed: u64,
) -> u8 {
    let tower = match cfg.tower() {
        Ok(Some(t)) if t.count() >= 2 => t,
        Ok(_) => {
            eprintln!("resolvent needs a tower with at least two squares");
            return EXIT_INPUT;
        }
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_INPUT;
        }
    };
    let h = match h_flag {
        Some(raw) => match Dyadic::parse(raw) {
            Some(h) => h,
            None => {
                eprintln!("--h must be dyadic, got `{raw}`");
                return EXIT_INPUT;
            }
        },
        None => match cfg.dyadic_or("h", Dyadic::inv_pow2(4)) {
            Ok(h) => h,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_INPUT;
            }
        },
    };
    let ell = match ell_flag {
        Some(e) => e,
        None => match cfg.u64_or("ell", 2) {
            Ok(e) => e as u32,
            Err(e) => {
                eprintln!("config error: {e}");
                return EXIT_INPUT;
            }
        },
    };
    if ell < 1 {
        eprintln!("--ell must be at least 1");
        return EXIT_INPUT;
    }

    let cubes = tower.count();
    let windows = tower.windows().len();
    let assembled = GridDomain::assemble(&tower, cubes, windows, h).and_then(|big| {
        GridDomain::assemble(&tower, cubes, windows - 1, h).map(|small| (big, small))
    });
    let ((g_big, a_big), (g_small, a_small)) = match assembled {
        Ok(x) => x,
        Err(e) => {
            eprintln!("assembly failed: {e}");
            return exit_code_for(&e);
        }
    };
    let result = (|| {
        let big = ResolventOp::new(&a_big)?;
        let small = ResolventOp::new(&a_small)?;
        let map = GridDomain::embed_map(&g_small, &g_big)?;
        let d1 = ResolventPowerDifference::new(&big, &small, &map, 1)?;
        let op_norm = operator_norm(&d1, 1e-8, seed ^ 0x11)?;
        let wall = g_big.len() - g_small.len();
        let k = (ell as usize * wall.max(1) + 8).min(g_big.len());
        let d_ell = ResolventPowerDifference::new(&big, &small, &map, ell)?;
        let spectrum = singular_values(&d_ell, k, 1e-8, seed ^ 0x22)?;
        let tele = telescoping_residual(&big, &small, &map, ell, 10, seed ^ 0x33)?;
        let dense = if dense_oracle {
            if g_big.len() > oracle::DENSE_CAP {
                return Err(spectral_tower_core::TowerError::InvalidParameter(
                    "instance too large for the dense oracle",
                ));
            }
            let m = oracle::materialize(&d_ell);
            let mut sv = oracle::dense_singular_values(&m);
            sv.truncate(spectrum.values.len());
            let max_dev = spectrum
                .values
                .iter()
                .zip(&sv)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let dense_partial: f64 = sv.iter().sum();
            Some(DenseCheck {
                partial_sum_deviation: (dense_partial - spectrum.partial_sum()).abs(),
                partial_sum: dense_partial,
                s_values: sv,
                max_singular_value_deviation: max_dev,
            })
        } else {
            None
        };
        Ok(ResolventReport {
            schema_version: SCHEMA_VERSION,
            h: h.to_string(),
            ell,
            nodes_big: g_big.len(),
            nodes_small: g_small.len(),
            op_norm,
            trace_norm_partial: spectrum.partial_sum(),
            s_values: spectrum.values,
            tail_bound: spectrum.tail_bound,
            telescoping_residual: tele,
            dense,
        })
    })();
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("resolvent study failed: {e}");
            return exit_code_for(&e);
        }
    };
    if let Err(e) = dir.write_json("resolvent.json", &report) {
        eprintln!("cannot write report: {e}");
        return EXIT_NUMERICAL;
    }
    println!("op_norm = {:.6e}", report.op_norm);
    println!("trace_norm_partial = {:.6e} (tail bound {:.3e})", report.trace_norm_partial, report.tail_bound);
    println!("telescoping_residual = {:.3e}", report.telescoping_residual);
    if let Some(d) = &report.dense {
        println!("dense check: max singular-value deviation {:.3e}", d.max_singular_value_deviation);
    }
    println!("report: {}", dir.path.join("resolvent.json").display());
    EXIT_OK
}
