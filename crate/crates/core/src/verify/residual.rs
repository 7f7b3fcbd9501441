//! Weak-form Fokker-Planck residual
//! | <phi, u_t> - <phi, u_s> - int_s^t <a phi'' + b phi', u_r> dr |.

use std::sync::OnceLock;

use crate::analytic::SelfSimilarSolution;
use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre, Tolerance};

use super::testfn::TestFunction;

fn time_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(32))
}

/// Sorted integration points covering supp(u_t) intersected with supp(phi).
fn space_breaks(sol: &SelfSimilarSolution, phi: &TestFunction, t: f64) -> Vec<f64> {
    let z = sol.z0();
    let reach = sol.reach(t);
    let (mut lo, mut hi) = (z - reach, z + reach);
    if let Some((a, b)) = phi.support() {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo >= hi {
        return Vec::new();
    }
    let mut pts = vec![lo, hi];
    let mut inner = phi.breakpoints();
    inner.push(z);
    pts.extend(inner.into_iter().filter(|&p| p > lo && p < hi));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// <phi, u_t> by adaptive quadrature.
pub fn pairing(sol: &SelfSimilarSolution, phi: &TestFunction, t: f64, tol: f64) -> Result<f64> {
    let z = sol.z0();
    quad::integrate_with_breaks(
        |x| phi.value(x) * sol.density_radial(t, (x - z).abs()),
        &space_breaks(sol, phi, t),
        Tolerance::abs(tol),
    )
}

/// <a phi'' + b phi', u_t> by adaptive quadrature.
pub fn generator_pairing(
    sol: &SelfSimilarSolution,
    field: &CoefficientField,
    phi: &TestFunction,
    t: f64,
    tol: f64,
) -> Result<f64> {
    let z = sol.z0();
    quad::integrate_with_breaks(
        |x| {
            let u = sol.density_radial(t, (x - z).abs());
            if u <= 0.0 {
                return 0.0;
            }
            let (_, d1, d2) = phi.eval(x);
            let (a, b) = field.eval1(t, x);
            (a * d2 + b * d1) * u
        },
        &space_breaks(sol, phi, t),
        Tolerance::abs(tol),
    )
}

/// Residual of the weak formulation on [s, t] for d = 1. Space integrals are
/// adaptive with absolute tolerance `tol`; the time integral uses 32-point
/// Gauss-Legendre.
pub fn fpe_weak_residual(
    sol: &SelfSimilarSolution,
    field: &CoefficientField,
    phi: &TestFunction,
    s: f64,
    t: f64,
    tol: f64,
) -> Result<f64> {
    if !(s > 0.0 && s < t) {
        return Err(Error::Domain(format!("need 0 < s < t, got s={s}, t={t}")));
    }
    if sol.dim() != 1 {
        return Err(Error::Domain("weak residual is implemented for d = 1".into()));
    }
    let lhs = pairing(sol, phi, t, tol)? - pairing(sol, phi, s, tol)?;
    let mut rhs = 0.0;
    for (r, w) in time_rule().mapped(s, t) {
        rhs += w * generator_pairing(sol, field, phi, r, tol)?;
    }
    Ok((lhs - rhs).abs())
}

/// int_t0^t <u_r, g(x, a(r, x))> dr for d = 1. Time uses 32-point
/// Gauss-Legendre on geometric panels, which resolve the t^{-alpha} growth of
/// a near t0; `breaks` are extra kink locations of g.
pub fn time_integrated_pairing<G: Fn(f64, f64) -> f64>(
    field: &CoefficientField,
    t0: f64,
    t: f64,
    breaks: &[f64],
    g: G,
) -> Result<f64> {
    let sol = field.solution();
    let z = sol.z0();
    let lo = t0.max(1e-12);
    if !(lo < t) {
        return Err(Error::Domain(format!("need t0 < t, got t0={t0}, t={t}")));
    }
    let panels = 6;
    let mut total = 0.0;
    for i in 0..panels {
        let a0 = lo * (t / lo).powf(i as f64 / panels as f64);
        let a1 = lo * (t / lo).powf((i + 1) as f64 / panels as f64);
        for (r, w) in time_rule().mapped(a0, a1) {
            let reach = sol.reach(r);
            let mut pts = vec![z - reach, z, z + reach];
            pts.extend(breaks.iter().copied().filter(|p| (p - z).abs() < reach));
            pts.sort_by(f64::total_cmp);
            let v = quad::integrate_with_breaks(
                |x| {
                    let u = sol.density_radial(r, (x - z).abs());
                    if u <= 0.0 {
                        return 0.0;
                    }
                    g(x, field.eval1(r, x).0) * u
                },
                &pts,
                Tolerance { abs: 1e-13, rel: 1e-10, max_segments: 20_000 },
            )?;
            total += w * v;
        }
    }
    Ok(total)
}

/// Expected quadratic variation E int_t0^t 2 a(r, X_r) dr of the diffusion
/// part, for paths with marginals u.
pub fn predicted_qv(field: &CoefficientField, t0: f64, t: f64) -> Result<f64> {
    time_integrated_pairing(field, t0, t, &[], |_, a| 2.0 * a)
}
