//! Diffusion profiles h_theta of the p-Laplace interpretations on [0, R(1)],
//! and the scaling a(t, x) = t^{-alpha} h(t^{-k/d} |x|).

use std::sync::Arc;

use mvsde::coeffs::{plaplace_a, HProfile};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let sol = Arc::new(build_solution(PdeFamily::p_laplace(4.0, 1)?, &[0.0])?);
    let r1 = sol.unit_radius();
    let profiles = [0.0, 0.5, 1.0]
        .into_iter()
        .map(|th| HProfile::new(&sol, th))
        .collect::<mvsde::Result<Vec<_>>>()?;
    println!("{:>8} {:>12} {:>12} {:>12}", "xi", "theta=0", "theta=0.5", "theta=1");
    for i in 0..=10 {
        let xi = r1 * i as f64 / 10.0;
        print!("{xi:>8.4}");
        for p in &profiles {
            print!(" {:>12.6}", p.h(xi));
        }
        println!();
    }
    let h = HProfile::new(&sol, 1.0)?;
    for t in [0.1, 1.0, 10.0] {
        let x = 0.3 * sol.support_radius(t)?;
        println!(
            "t={t:<5} a={:.6e}  t^-alpha h(xi)={:.6e}",
            plaplace_a(&sol, &h, t, &[x])?,
            t.powf(-sol.alpha()) * h.h(t.powf(-sol.k_over_d()) * x)
        );
    }
    Ok(())
}
