//! Fluctuations of the empirical measure of N frozen-coefficient particles:
//! the variance of the martingale M^N_t over independent replicas against
//! (1/N) int <u, 2 a |phi'|^2>.

use std::sync::Arc;

use mvsde::coeffs::{make_field, Interpretation};
use mvsde::particles::{fluctuation_experiment, ParticleSystem};
use mvsde::sim::SimConfig;
use mvsde::verify::TestFunction;
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let pme = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?);
    let field = make_field(Interpretation::PmeBeta { beta: 1.0 }, pme)?;
    let phi = TestFunction::bump(0.0, 0.5);
    for n in [250, 500, 1000] {
        let sys = ParticleSystem::new(field.clone(), n, SimConfig::new(1.0, 0.01, n, 4));
        let res = fluctuation_experiment(&sys, &phi, 1.0, 400, 0.15)?;
        println!("N={n:<5} {}", res.report.line());
    }
    Ok(())
}
