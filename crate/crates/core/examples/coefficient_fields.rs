//! Coefficients (a, b) of several Fokker-Planck interpretations of the same
//! porous-medium solution, and the identities linking them.

use std::sync::Arc;

use mvsde::coeffs::{apply_f_transform, gradient_relation_defect, make_field, CoefficientField, Interpretation};
use mvsde::{build_solution, PdeFamily};

fn main() -> mvsde::Result<()> {
    let sol = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1)?, &[0.0])?);
    let r = sol.support_radius(1.0)?;
    let xs: Vec<f64> = (0..=4).map(|i| 0.25 * i as f64 * r).collect();

    for interp in [
        Interpretation::PmeBeta { beta: 0.0 },
        Interpretation::PmeBeta { beta: 1.0 },
        Interpretation::PmeStratonovich,
        Interpretation::PmeAdditive,
    ] {
        let f = make_field(interp, sol.clone())?;
        print!("{:<18}", f.label());
        for &x in &xs {
            let (a, b) = f.eval1(1.0, x);
            print!("  ({a:.4}, {b:+.4})");
        }
        println!();
    }

    // b = grad(a)/2 for the Stratonovich choice.
    let strat = make_field(Interpretation::PmeStratonovich, sol.clone())?;
    let worst = xs[..4]
        .iter()
        .map(|&x| gradient_relation_defect(&strat, 1.0, &[x]).map(|d| d[0].abs()))
        .collect::<mvsde::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("\nstratonovich |b - a'/2| max = {worst:.2e}");

    // Pure diffusion a = u^2 turned into pure drift with f = -u^3.
    let diffusion = make_field(Interpretation::PmeBeta { beta: 1.0 }, sol.clone())?;
    let (s1, s2) = (sol.clone(), sol.clone());
    let drift = apply_f_transform(
        &diffusion,
        Arc::new(move |t, x| -s1.density(t, x).unwrap().powi(3)),
        Arc::new(move |t, x, g| g[0] = -s2.grad_density_power(t, x, 3.0).unwrap()[0]),
    )?;
    let pure: CoefficientField = make_field(Interpretation::PmeBeta { beta: 0.0 }, sol)?;
    for &x in &xs[1..4] {
        println!("x={x:.3}: transformed {:?}  pure drift {:?}", drift.eval1(1.0, x), pure.eval1(1.0, x));
    }
    Ok(())
}
