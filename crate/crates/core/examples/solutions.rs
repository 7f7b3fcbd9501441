//! Closed-form solutions: normalization, support, densities and quantiles.

use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let families = [
        PdeFamily::heat(1)?,
        PdeFamily::porous_medium(2.0, 1)?,
        PdeFamily::porous_medium(3.0, 1)?,
        PdeFamily::p_laplace(4.0, 1)?,
    ];
    println!("{:<22} {:>10} {:>10} {:>10} {:>12}", "family", "k", "C", "alpha", "R(1)");
    for fam in families {
        let sol = build_solution(fam, &[0.0])?;
        let r1 = sol.support_radius(1.0).map_or("inf".to_string(), |r| format!("{r:.6}"));
        println!(
            "{:<22} {:>10.6} {:>10.6} {:>10.6} {:>12}",
            fam.name(),
            sol.k(),
            sol.c(),
            sol.alpha(),
            r1
        );
    }

    let pme = build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?;
    println!("\npme m=3 at t = 0.5, 1, 2:");
    for t in [0.5, 1.0, 2.0] {
        println!(
            "  t={t}: u(t,0)={:.6}  R(t)={:.6}  mass={:.12}  95% quantile={:.6}",
            pme.density(t, &[0.0])?,
            pme.support_radius(t)?,
            pme.mass(t)?,
            pme.inverse_cdf(t, 0.95)?
        );
    }
    Ok(())
}
