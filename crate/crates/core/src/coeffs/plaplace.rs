//! Diffusion profiles of the p-Laplace interpretations.
//!
//! For theta in (0, 1] the profile is
//! h_theta(xi) = (k / (d theta)) * int_xi^R1 eta (g(eta) / g(xi))^{1/theta} d eta,
//! which is the nonlocal coefficient h at theta = 1 and tends to |g'|^{p-2}
//! as theta -> 0. The ratio g(eta)/g(xi) is at most one, so it is formed in
//! log space and never overflows.

use crate::analytic::{FamilyTag, SelfSimilarSolution};
use crate::error::{Error, Result};
use crate::interp::HermiteTable;
use crate::quad::{self, Tolerance};

const TABLE_NODES: usize = 4096;

fn exponent_p(sol: &SelfSimilarSolution) -> Result<f64> {
    match sol.family().tag {
        FamilyTag::PLaplace { p } => Ok(p),
        _ => Err(Error::InvalidParameter(format!(
            "diffusion profile needs a p-Laplace solution, got {}",
            sol.family().name()
        ))),
    }
}

fn panel_tol() -> Tolerance {
    Tolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_segments: 5_000,
    }
}

/// Integral of eta (g(eta)/g(lo))^{1/theta} over [lo, hi].
fn weighted_panel(sol: &SelfSimilarSolution, theta: f64, lo: f64, hi: f64) -> Result<f64> {
    let lg0 = sol.profile(lo).ln();
    quad::integrate(
        |eta| {
            let g = sol.profile(eta);
            if g <= 0.0 {
                0.0
            } else {
                eta * ((g.ln() - lg0) / theta).exp()
            }
        },
        lo,
        hi,
        panel_tol(),
    )
}

/// h_theta(xi) by direct quadrature, without a table.
pub fn plaplace_h_theta(sol: &SelfSimilarSolution, theta: f64, xi: f64) -> Result<f64> {
    exponent_p(sol)?;
    check_theta(theta)?;
    let r1 = sol.unit_radius();
    if xi >= r1 {
        return Ok(0.0);
    }
    let xi = xi.max(0.0);
    let kd = sol.k_over_d();
    if theta == 0.0 {
        return Ok(theta_zero(sol, xi).0);
    }
    // Split so that panels near the edge see the algebraic singularity at R1.
    let mut acc = 0.0;
    let mut lo = xi;
    let mut factor = 1.0;
    let mid = xi + 0.5 * (r1 - xi);
    let lg_xi = sol.profile(xi).ln();
    for hi in [mid, r1] {
        acc += factor * weighted_panel(sol, theta, lo, hi)?;
        let g_hi = sol.profile(hi);
        factor = if g_hi > 0.0 {
            ((g_hi.ln() - lg_xi) / theta).exp()
        } else {
            0.0
        };
        lo = hi;
    }
    Ok(kd / theta * acc)
}

/// The nonlocal diffusion profile h(xi) by direct quadrature.
pub fn plaplace_h(sol: &SelfSimilarSolution, xi: f64) -> Result<f64> {
    plaplace_h_theta(sol, 1.0, xi)
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")))
    }
}

/// |g'|^{p-2} and its derivative.
fn theta_zero(sol: &SelfSimilarSolution, xi: f64) -> (f64, f64) {
    let p = exponent_p(sol).expect("checked by caller");
    let kd = sol.k_over_d();
    let e = (p - 2.0) / (p - 1.0);
    let g = sol.profile(xi);
    if g <= 0.0 {
        return (0.0, 0.0);
    }
    let w = kd * xi * g;
    let dw = kd * (g + xi * sol.profile_slope(xi));
    if w <= 0.0 {
        return (0.0, 0.0);
    }
    (w.powf(e), e * w.powf(e - 1.0) * dw)
}

/// Tabulated h_theta on [0, R1] with exact nodal slopes.
#[derive(Debug, Clone)]
pub struct HProfile {
    theta: f64,
    r1: f64,
    table: Option<HermiteTable>,
    sol_for_zero: Option<Box<SelfSimilarSolution>>,
}

impl HProfile {
    pub fn new(sol: &SelfSimilarSolution, theta: f64) -> Result<Self> {
        let p = exponent_p(sol)?;
        check_theta(theta)?;
        let r1 = sol.unit_radius();
        if theta == 0.0 {
            return Ok(Self {
                theta,
                r1,
                table: None,
                sol_for_zero: Some(Box::new(sol.clone())),
            });
        }
        let kd = sol.k_over_d();
        let gamma = (p - 1.0) / (p - 2.0);
        let n = TABLE_NODES;
        let xi: Vec<f64> = (0..=n)
            .map(|j| {
                if j == n {
                    r1
                } else {
                    0.5 * r1 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos())
                }
            })
            .collect();
        let g: Vec<f64> = xi.iter().map(|&x| sol.profile(x)).collect();
        let mut integral = vec![0.0; n + 1];
        for j in (0..n).rev() {
            let panel = weighted_panel(sol, theta, xi[j], xi[j + 1])?;
            let carry = if g[j + 1] > 0.0 {
                ((g[j + 1].ln() - g[j].ln()) / theta).exp() * integral[j + 1]
            } else {
                0.0
            };
            integral[j] = panel + carry;
        }
        let h: Vec<f64> = integral.iter().map(|v| kd / theta * v).collect();
        let mut dh = vec![0.0; n + 1];
        for j in 0..n {
            let slope = -sol.profile_slope(xi[j]);
            dh[j] = (h[j] * slope / g[j] - kd * xi[j]) / theta;
        }
        dh[n] = -kd * r1 / (gamma + theta);
        if h.iter().chain(&dh).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite diffusion profile table for theta = {theta}"
            )));
        }
        Ok(Self {
            theta,
            r1,
            table: Some(HermiteTable::new(xi, h, dh)),
            sol_for_zero: None,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// h(xi) and h'(xi); both vanish for xi >= R1.
    pub fn h_with_slope(&self, xi: f64) -> (f64, f64) {
        if xi >= self.r1 {
            return (0.0, 0.0);
        }
        match &self.table {
            Some(t) => {
                let (v, d) = t.eval_with_slope(xi.max(0.0));
                (v.max(0.0), d)
            }
            None => theta_zero(self.sol_for_zero.as_ref().expect("theta zero"), xi.max(0.0)),
        }
    }

    pub fn h(&self, xi: f64) -> f64 {
        self.h_with_slope(xi).0
    }
}

/// a(t, x) = t^{-alpha} h(t^{-k/d} |x - z|) along the Barenblatt solution.
pub fn plaplace_a(sol: &SelfSimilarSolution, profile: &HProfile, t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    if x.len() != sol.dim() {
        return Err(Error::Domain("point dimension mismatch".into()));
    }
    let r = x
        .iter()
        .zip(sol.z())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(t.powf(-sol.alpha()) * profile.h(t.powf(-sol.k_over_d()) * r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{build_solution, PdeFamily};

    fn sol() -> SelfSimilarSolution {
        build_solution(PdeFamily::p_laplace(4.0, 1).unwrap(), &[0.0]).unwrap()
    }

    #[test]
    fn direct_profile_matches_reference_values() {
        let s = sol();
        let refs = [
            (0.0, 0.09175334144358556),
            (0.5, 0.09683202761126017),
            (1.0, 0.08296046035010678),
            (1.5, 0.04781856071626148),
            (1.9, 0.004268233552966577),
        ];
        for (xi, v) in refs {
            let h = plaplace_h(&s, xi).unwrap();
            assert!((h - v).abs() < 1e-10, "h({xi}) = {h}, expected {v}");
        }
        assert_eq!(plaplace_h(&s, s.unit_radius()).unwrap(), 0.0);
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let s = sol();
        let prof = HProfile::new(&s, 1.0).unwrap();
        let r1 = s.unit_radius();
        for i in 0..200 {
            let xi = r1 * (i as f64 + 0.37) / 200.0;
            let direct = plaplace_h(&s, xi).unwrap();
            assert!((prof.h(xi) - direct).abs() < 1e-8, "xi = {xi}");
        }
        assert_eq!(prof.h(r1), 0.0);
    }
}
