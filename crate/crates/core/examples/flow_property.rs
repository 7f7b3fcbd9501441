//! Restart at time s from u(s, .) with time-shifted coefficients and compare
//! the law after elapsed time t with u(s + t, .).

use std::sync::Arc;

use mvsde::coeffs::{make_field, Interpretation};
use mvsde::sim::SimConfig;
use mvsde::verify::flow_property_check;
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let pme = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?);
    let plap = Arc::new(build_solution(PdeFamily::p_laplace(4.0, 1)?, &[0.0])?);
    let mut cfg = SimConfig::new(0.5, 1e-3, 3000, 2);
    cfg.record_every = 500;
    for field in [
        make_field(Interpretation::PmeBeta { beta: 1.5 }, pme)?,
        make_field(Interpretation::PLapBeta { beta: 1.0 }, plap)?,
    ] {
        let r = flow_property_check(&field, 0.5, 0.5, &cfg, 0.01)?;
        println!("{}  p = {}", r.line(), r.metadata["p_value"]);
    }
    Ok(())
}
