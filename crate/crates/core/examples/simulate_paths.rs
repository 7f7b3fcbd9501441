//! Euler-Maruyama paths for the porous-medium equation at several beta,
//! written as tab-separated tables (time, support radius, paths).
//!
//! cargo run --release --example simulate_paths -- [out_dir]

use std::path::PathBuf;
use std::sync::Arc;

use mvsde::cli::Table;
use mvsde::coeffs::{make_field, Interpretation};
use mvsde::sim::{euler_maruyama, SimConfig};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "paths_out".into()));
    std::fs::create_dir_all(&out)?;
    let sol = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?);

    for beta in [0.0, 0.1, 1.0, 1.5] {
        let field = make_field(Interpretation::PmeBeta { beta }, sol.clone())?;
        let mut cfg = SimConfig::new(0.5, 1e-4, 30, 1);
        cfg.record_every = 50;
        let ens = euler_maruyama(&field, &cfg)?;

        let mut header = vec!["time".to_string(), "support_radius".to_string()];
        header.extend((0..ens.n_paths()).map(|i| format!("path_{i}")));
        let mut table = Table::new(header).meta("field", field.label()).meta("seed", cfg.seed);
        for (j, &t) in ens.times.iter().enumerate() {
            let mut row = vec![t, if t > 0.0 { sol.support_radius(t)? } else { 0.0 }];
            row.extend(ens.positions.iter().map(|p| p[j]));
            table.push(row);
        }
        let path = out.join(format!("pme_beta_{beta}.tsv"));
        table.write(&path)?;

        let max_abs = ens.final_positions().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        println!(
            "beta={beta:<4} max |X_T| = {max_abs:.4} (R(T) = {:.4}), mean QV = {:.5} -> {}",
            sol.support_radius(0.5)?,
            ens.qv.iter().sum::<f64>() / ens.qv.len() as f64,
            path.display()
        );
    }
    Ok(())
}
