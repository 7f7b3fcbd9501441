//! Closed-form samplers: the Gaussian heat-beta process via a Cholesky factor
//! of its covariance, and the pure-drift process X_t = z + eta t^{k/d}.

use mvsde::sim::{exact_heat_beta, exact_pure_drift, heat_beta_covariance, SimConfig};
use mvsde::verify::{covariance_check, ks_test};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let pairs = [(0.5, 1.0), (1.0, 4.0), (2.0, 4.0)];
    for beta in [0.01, 0.5, 1.0, 1.5] {
        let ens = exact_heat_beta(beta, &SimConfig::new(4.0, 0.25, 10_000, 3))?;
        for r in covariance_check(&ens, beta, &pairs)? {
            println!("{}", r.line());
        }
    }
    println!("beta -> 0 limit at (1, 4): {:.6} vs sqrt(st) = 2", heat_beta_covariance(1e-6, 1.0, 4.0));

    let sol = build_solution(PdeFamily::p_laplace(4.0, 1)?, &[0.0])?;
    let mut cfg = SimConfig::new(2.0, 0.01, 3000, 3);
    cfg.record_every = 50;
    let ens = exact_pure_drift(&sol, &cfg)?;
    for t in [0.5, 1.0, 2.0] {
        let j = ens.time_index(t).expect("recorded");
        println!("{}", ks_test(&ens.column(j), &sol, t, 0.01)?.line());
    }
    Ok(())
}
