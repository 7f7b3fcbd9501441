//! One cell of the marginal-law experiment: 3000 Euler paths to T = 1, KS
//! test of the end positions against u(1, .), realized QV against its
//! prediction.
//!
//! cargo run --release --example marginal_ks -- [heat|pme|plaplace] [beta]

use std::sync::Arc;

use mvsde::coeffs::{make_field, Interpretation};
use mvsde::sim::{euler_maruyama, exact_pure_drift, SimConfig};
use mvsde::verify::{ks_test, predicted_qv, qv_check};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let pde = args.get(1).map_or("pme", String::as_str);
    let beta: f64 = args.get(2).and_then(|b| b.parse().ok()).unwrap_or(1.0);
    let (family, interp) = match pde {
        "heat" => (PdeFamily::heat(1)?, Interpretation::HeatBeta { beta }),
        "plaplace" => (PdeFamily::p_laplace(4.0, 1)?, Interpretation::PLapBeta { beta }),
        _ => (PdeFamily::porous_medium(3.0, 1)?, Interpretation::PmeBeta { beta }),
    };
    let sol = Arc::new(build_solution(family, &[0.0])?);
    let field = make_field(interp, sol.clone())?;
    let mut cfg = SimConfig::new(1.0, 1e-4, 3000, 1);
    cfg.record_every = 10_000;

    let start = std::time::Instant::now();
    let ens = if beta == 0.0 { exact_pure_drift(&sol, &cfg)? } else { euler_maruyama(&field, &cfg)? };
    println!("{} paths of {} in {:.1}s", ens.n_paths(), field.label(), start.elapsed().as_secs_f64());

    let ks = ks_test(&ens.final_positions(), &sol, 1.0, 0.01)?;
    println!("{}  p = {}", ks.line(), ks.metadata["p_value"]);
    let target = predicted_qv(&field, 0.0, 1.0)?;
    if target > 0.0 {
        println!("{}", qv_check(&ens, target, 0.05).line());
    }
    Ok(())
}
