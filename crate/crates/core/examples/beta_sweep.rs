//! Same marginals, different processes: a beta sweep through the batch
//! front end, printing the KS and QV columns of `sweep.tsv`.

use mvsde::cli::{execute, Command, RunConfig, Table};

fn main() -> mvsde::Result<()> {
    let cfg = RunConfig::parse(
        "pde = heat\n\
         betas = 0, 0.1, 0.5, 1, 1.5\n\
         T = 1\n\
         dt = 1e-3\n\
         n_paths = 1000\n\
         record_every = 1000\n",
    )?;
    let dir = std::env::temp_dir().join("mvsde_beta_sweep");
    execute(Command::Sweep, &cfg, &dir)?;
    let t = Table::read(&dir.join("sweep.tsv"))?;
    println!("{:>6} {:>10} {:>10} {:>10}", "beta", "ks_p", "qv", "predicted");
    for r in &t.rows {
        println!("{:>6} {:>10.4} {:>10.5} {:>10.5}", r[0], r[2], r[4], r[6]);
    }
    Ok(())
}
