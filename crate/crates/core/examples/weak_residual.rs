//! Weak-form Fokker-Planck residuals on (s, t) = (0.25, 1) for every
//! interpretation, and for a field with its diffusion scaled by 1.1.

use std::sync::Arc;

use mvsde::coeffs::{make_field, Interpretation};
use mvsde::verify::{fpe_weak_residual, TestFunction};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let heat = Arc::new(build_solution(PdeFamily::heat(1)?, &[0.0])?);
    let pme = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?);
    let plap = Arc::new(build_solution(PdeFamily::p_laplace(4.0, 1)?, &[0.0])?);
    let cases = [
        (Interpretation::HeatBeta { beta: 0.5 }, &heat),
        (Interpretation::HeatPC { p: 0.5, c: 1.0 }, &heat),
        (Interpretation::PmeBeta { beta: 0.7 }, &pme),
        (Interpretation::PmeStratonovich, &pme),
        (Interpretation::PmeAdditive, &pme),
        (Interpretation::PLapBeta { beta: 1.0 }, &plap),
        (Interpretation::PLapTheta { theta: 0.5 }, &plap),
    ];
    for (interp, sol) in cases {
        let scale = if sol.family().is_compact() { sol.support_radius(1.0)? } else { 2.0 };
        let phi = TestFunction::bump(0.2 * scale, 0.3 * scale);
        let field = make_field(interp, (*sol).clone())?;
        let good = fpe_weak_residual(sol, &field, &phi, 0.25, 1.0, 1e-6)?;
        let bad = fpe_weak_residual(sol, &field.with_diffusion_scale(1.1), &phi, 0.25, 1.0, 1e-6)?;
        println!("{:<28} residual {good:.2e}   with a x 1.1: {bad:.2e}", field.label());
    }
    Ok(())
}
