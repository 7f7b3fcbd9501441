//! Self-similar solutions of the heat, porous-medium and p-Laplace equations
//! started from a Dirac mass: u(t, x) = t^{-k} g(t^{-k/d} |x - z|).

use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

const NORMALIZATION_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;
const CDF_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FamilyTag {
    Heat,
    PorousMedium { m: f64 },
    PLaplace { p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeFamily {
    pub tag: FamilyTag,
    pub d: usize,
}

impl PdeFamily {
    pub fn heat(d: usize) -> Result<Self> {
        Self::new(FamilyTag::Heat, d)
    }

    pub fn porous_medium(m: f64, d: usize) -> Result<Self> {
        Self::new(FamilyTag::PorousMedium { m }, d)
    }

    pub fn p_laplace(p: f64, d: usize) -> Result<Self> {
        Self::new(FamilyTag::PLaplace { p }, d)
    }

    pub fn new(tag: FamilyTag, d: usize) -> Result<Self> {
        let f = Self { tag, d };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        match self.tag {
            FamilyTag::Heat => Ok(()),
            FamilyTag::PorousMedium { m } if m.is_finite() && m > 1.0 => Ok(()),
            FamilyTag::PorousMedium { m } => Err(Error::InvalidParameter(format!(
                "porous medium exponent must satisfy m > 1, got {m}"
            ))),
            FamilyTag::PLaplace { p } if p.is_finite() && p > 2.0 => Ok(()),
            FamilyTag::PLaplace { p } => Err(Error::InvalidParameter(format!(
                "p-Laplace exponent must satisfy p > 2, got {p}"
            ))),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.tag, FamilyTag::Heat)
    }

    pub fn name(&self) -> String {
        match self.tag {
            FamilyTag::Heat => format!("heat(d={})", self.d),
            FamilyTag::PorousMedium { m } => format!("pme(m={m}, d={})", self.d),
            FamilyTag::PLaplace { p } => format!("plaplace(p={p}, d={})", self.d),
        }
    }
}

/// Cumulative mass of the unit-time profile on [0, s_j], d = 1.
#[derive(Debug, Clone)]
struct CdfTable {
    s: Vec<f64>,
    cum: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SelfSimilarSolution {
    family: PdeFamily,
    k: f64,
    q: f64,
    c: f64,
    alpha: f64,
    z: Vec<f64>,
    r1: f64,
    cdf: Option<CdfTable>,
}

/// Surface area of the unit sphere in R^d.
fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// Radial profile for given constants; shared by construction and evaluation.
fn profile_raw(tag: FamilyTag, d: usize, q: f64, c: f64, xi: f64) -> f64 {
    match tag {
        FamilyTag::Heat => c * (-q * xi * xi).exp(),
        FamilyTag::PorousMedium { m } => {
            let base = c - q * xi * xi;
            if base <= 0.0 {
                0.0
            } else {
                base.powf(1.0 / (m - 1.0))
            }
        }
        FamilyTag::PLaplace { p } => {
            let base = c - q * xi.powf(p / (p - 1.0));
            let _ = d;
            if base <= 0.0 {
                0.0
            } else {
                base.powf((p - 1.0) / (p - 2.0))
            }
        }
    }
}

fn unit_radius(tag: FamilyTag, q: f64, c: f64) -> f64 {
    match tag {
        FamilyTag::Heat => f64::INFINITY,
        FamilyTag::PorousMedium { .. } => (c / q).sqrt(),
        FamilyTag::PLaplace { p } => (c / q).powf((p - 1.0) / p),
    }
}

fn profile_mass(tag: FamilyTag, d: usize, q: f64, c: f64) -> Result<f64> {
    let r = unit_radius(tag, q, c);
    let dm1 = (d - 1) as i32;
    let v = quad::integrate(
        |rho| rho.powi(dm1) * profile_raw(tag, d, q, c, rho),
        0.0,
        r,
        Tolerance::abs(NORMALIZATION_TOL),
    )?;
    Ok(sphere_area(d) * v)
}

/// Build the solution centred at `z`; `z.len()` must equal the dimension.
pub fn build_solution(family: PdeFamily, z: &[f64]) -> Result<SelfSimilarSolution> {
    family.validate()?;
    let d = family.d;
    if z.len() != d {
        return Err(Error::InvalidParameter(format!(
            "centre has {} coordinates, dimension is {d}",
            z.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("centre must be finite".into()));
    }
    let df = d as f64;
    let (k, q, c, alpha) = match family.tag {
        FamilyTag::Heat => (0.5 * df, 0.5, (2.0 * std::f64::consts::PI).powf(-0.5 * df), 0.0),
        FamilyTag::PorousMedium { m } => {
            let k = 1.0 / (m - 1.0 + 2.0 / df);
            let q = (k / df) * (m - 1.0) / (2.0 * m);
            let c = normalize(family.tag, d, q)?;
            (k, q, c, k * (m - 1.0))
        }
        FamilyTag::PLaplace { p } => {
            let k = 1.0 / (p - 2.0 + p / df);
            let q = ((p - 2.0) / p) * (k / df).powf(1.0 / (p - 1.0));
            let c = normalize(family.tag, d, q)?;
            (k, q, c, 1.0 - 2.0 / ((p - 2.0) * df + p))
        }
    };
    let mut sol = SelfSimilarSolution {
        family,
        k,
        q,
        c,
        alpha,
        z: z.to_vec(),
        r1: unit_radius(family.tag, q, c),
        cdf: None,
    };
    if d == 1 && family.is_compact() {
        sol.cdf = Some(sol.build_cdf_table()?);
    }
    Ok(sol)
}

fn normalize(tag: FamilyTag, d: usize, q: f64) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while profile_mass(tag, d, q, hi)? < 1.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1000 {
            return Err(Error::Normalization { lo, hi });
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if profile_mass(tag, d, q, mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Normalization { lo, hi })
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive and finite, got {t}")))
    }
}

impl SelfSimilarSolution {
    pub fn family(&self) -> PdeFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.family.d
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Spatial scaling exponent k/d.
    pub fn k_over_d(&self) -> f64 {
        self.k / self.family.d as f64
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// First coordinate of the centre (the only one when d = 1).
    pub fn z0(&self) -> f64 {
        self.z[0]
    }

    /// Support radius at t = 1 (infinite for the heat kernel).
    pub fn unit_radius(&self) -> f64 {
        self.r1
    }

    pub fn support_radius(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        if !self.family.is_compact() {
            return Err(Error::UnboundedSupport);
        }
        Ok(self.r1 * t.powf(self.k_over_d()))
    }

    /// Profile g(xi).
    pub fn profile(&self, xi: f64) -> f64 {
        profile_raw(self.family.tag, self.family.d, self.q, self.c, xi)
    }

    /// Profile slope g'(xi); zero outside the support.
    pub fn profile_slope(&self, xi: f64) -> f64 {
        let q = self.q;
        let c = self.c;
        match self.family.tag {
            FamilyTag::Heat => -xi * self.profile(xi),
            FamilyTag::PorousMedium { m } => {
                let base = c - q * xi * xi;
                if base <= 0.0 {
                    0.0
                } else {
                    -2.0 * q * xi * base.powf(1.0 / (m - 1.0) - 1.0) / (m - 1.0)
                }
            }
            FamilyTag::PLaplace { p } => {
                let base = c - q * xi.powf(p / (p - 1.0));
                if base <= 0.0 {
                    0.0
                } else {
                    -q * p / (p - 2.0) * xi.powf(1.0 / (p - 1.0)) * base.powf(1.0 / (p - 2.0))
                }
            }
        }
    }

    /// u(t, r) as a function of the distance r = |x - z|; no argument checks.
    pub fn density_radial(&self, t: f64, r: f64) -> f64 {
        t.powf(-self.k) * self.profile(t.powf(-self.k_over_d()) * r)
    }

    /// du/dr at distance r; no argument checks.
    pub fn density_radial_slope(&self, t: f64, r: f64) -> f64 {
        let kd = self.k_over_d();
        t.powf(-self.k - kd) * self.profile_slope(t.powf(-kd) * r)
    }

    fn radius(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.family.d {
            return Err(Error::Domain(format!(
                "point has {} coordinates, dimension is {}",
                x.len(),
                self.family.d
            )));
        }
        Ok(x.iter()
            .zip(&self.z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn density(&self, t: f64, x: &[f64]) -> Result<f64> {
        check_time(t)?;
        Ok(self.density_radial(t, self.radius(x)?))
    }

    pub fn grad_density(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_time(t)?;
        let r = self.radius(x)?;
        let s = self.density_radial_slope(t, r);
        Ok(self.radial_vector(x, r, s))
    }

    /// Gradient of u^e; zero where u vanishes.
    pub fn grad_density_power(&self, t: f64, x: &[f64], exponent: f64) -> Result<Vec<f64>> {
        check_time(t)?;
        let r = self.radius(x)?;
        let u = self.density_radial(t, r);
        if u <= 0.0 {
            return Ok(vec![0.0; x.len()]);
        }
        let s = exponent * u.powf(exponent - 1.0) * self.density_radial_slope(t, r);
        Ok(self.radial_vector(x, r, s))
    }

    fn radial_vector(&self, x: &[f64], r: f64, s: f64) -> Vec<f64> {
        if r == 0.0 || s == 0.0 {
            return vec![0.0; x.len()];
        }
        x.iter().zip(&self.z).map(|(a, b)| s * (a - b) / r).collect()
    }

    /// Total mass at time t by adaptive quadrature over the support.
    pub fn mass(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let tol = Tolerance::abs(NORMALIZATION_TOL);
        let reach = self.reach(t);
        if self.family.d == 1 {
            let z = self.z[0];
            quad::integrate_with_breaks(
                |x| self.density_radial(t, (x - z).abs()),
                &[z - reach, z, z + reach],
                tol,
            )
        } else {
            let dm1 = (self.family.d - 1) as i32;
            let v = quad::integrate(
                |r| r.powi(dm1) * self.density_radial(t, r),
                0.0,
                reach,
                tol,
            )?;
            Ok(sphere_area(self.family.d) * v)
        }
    }

    /// Radius beyond which the density is zero (compact) or below ~1e-300 (heat).
    pub fn reach(&self, t: f64) -> f64 {
        if self.family.is_compact() {
            self.r1 * t.powf(self.k_over_d())
        } else {
            38.0 * t.sqrt()
        }
    }

    /// Integral of x^order against the density, d = 1.
    pub fn moment(&self, t: f64, order: u32) -> Result<f64> {
        check_time(t)?;
        self.require_1d()?;
        let z = self.z[0];
        let reach = self.reach(t);
        quad::integrate_with_breaks(
            |x| x.powi(order as i32) * self.density_radial(t, (x - z).abs()),
            &[z - reach, z, z + reach],
            Tolerance::abs(1e-13),
        )
    }

    fn require_1d(&self) -> Result<()> {
        if self.family.d == 1 {
            Ok(())
        } else {
            Err(Error::Domain("only available in dimension one".into()))
        }
    }

    fn build_cdf_table(&self) -> Result<CdfTable> {
        // Nodes cluster quadratically towards the support edge, where g has
        // its algebraic singularity.
        let n = CDF_NODES;
        let r1 = self.r1;
        let s: Vec<f64> = (0..=n)
            .map(|j| {
                if j == n {
                    r1
                } else {
                    r1 * (std::f64::consts::FRAC_PI_2 * j as f64 / n as f64).sin()
                }
            })
            .collect();
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for w in s.windows(2) {
            acc += quad::integrate(|x| self.profile(x), w[0], w[1], Tolerance::abs(1e-16))?;
            cum.push(acc);
        }
        Ok(CdfTable { s, cum })
    }

    /// Mass of the unit-time profile on [0, xi], d = 1.
    fn half_mass(&self, xi: f64) -> Result<f64> {
        let table = self.cdf.as_ref().expect("compact 1d solutions carry a table");
        if xi >= self.r1 {
            return Ok(*table.cum.last().unwrap());
        }
        let j = table.s.partition_point(|&v| v <= xi).saturating_sub(1);
        let part = quad::integrate(|x| self.profile(x), table.s[j], xi, Tolerance::abs(1e-16))?;
        Ok(table.cum[j] + part)
    }

    /// P(X_t <= x) for the d = 1 marginal.
    pub fn cdf(&self, t: f64, x: f64) -> Result<f64> {
        check_time(t)?;
        self.require_1d()?;
        let y = x - self.z[0];
        match self.family.tag {
            FamilyTag::Heat => Ok(normal_cdf(y / t.sqrt())),
            _ => {
                let xi = y.abs() * t.powf(-self.k);
                let h = self.half_mass(xi)?;
                let v = if y < 0.0 { 0.5 - h } else { 0.5 + h };
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }

    /// Quantile of the d = 1 marginal.
    pub fn inverse_cdf(&self, t: f64, u: f64) -> Result<f64> {
        check_time(t)?;
        self.require_1d()?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("probability must lie in (0, 1), got {u}")));
        }
        let z = self.z[0];
        if u == 0.5 {
            return Ok(z);
        }
        let sign = if u < 0.5 { -1.0 } else { 1.0 };
        match self.family.tag {
            FamilyTag::Heat => {
                let tail = u.min(1.0 - u);
                Ok(z - sign * t.sqrt() * normal_lower_quantile(tail)?)
            }
            _ => {
                let v = (u - 0.5).abs();
                let xi = self.solve_half_mass(v)?;
                Ok(z + sign * t.powf(self.k) * xi)
            }
        }
    }

    fn solve_half_mass(&self, v: f64) -> Result<f64> {
        let table = self.cdf.as_ref().expect("compact 1d solutions carry a table");
        let n = table.cum.len() - 1;
        if v >= table.cum[n] {
            return Ok(self.r1);
        }
        let j = table.cum.partition_point(|&c| c <= v).clamp(1, n) - 1;
        let (mut lo, mut hi) = (table.s[j], table.s[j + 1]);
        let mut x = lo + (hi - lo) * (v - table.cum[j]) / (table.cum[j + 1] - table.cum[j]);
        for _ in 0..200 {
            let f = self.half_mass(x)? - v;
            if f.abs() <= 1e-15 {
                return Ok(x);
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let g = self.profile(x);
            let newton = x - f / g;
            x = if g > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi.max(1.0) {
                return Ok(x);
            }
        }
        Err(Error::Numerical(format!(
            "inverse cdf did not converge for mass {v}, bracket [{lo}, {hi}]"
        )))
    }

    /// The same solution viewed from time `s` onward: `density(t, x)` is u(s + t, x).
    pub fn rebased(&self, s: f64) -> Result<Rebased<'_>> {
        check_time(s)?;
        Ok(Rebased { sol: self, s })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Rebased<'a> {
    sol: &'a SelfSimilarSolution,
    s: f64,
}

impl Rebased<'_> {
    pub fn density(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.sol.density(self.s + t, x)
    }
}

pub fn normal_cdf(y: f64) -> f64 {
    0.5 * erfc(-y / std::f64::consts::SQRT_2)
}

fn normal_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Lower-tail standard normal quantile for p in (0, 0.5].
fn normal_lower_quantile(p: f64) -> Result<f64> {
    use statrs::distribution::{ContinuousCDF, Normal};
    let n = Normal::standard();
    let mut y = n.inverse_cdf(p);
    for _ in 0..8 {
        let f = normal_cdf(y) - p;
        let step = f / normal_pdf(y);
        y -= step;
        if step.abs() <= 1e-15 * y.abs().max(1.0) {
            break;
        }
    }
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Numerical(format!("normal quantile failed for {p}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pme(m: f64) -> SelfSimilarSolution {
        build_solution(PdeFamily::porous_medium(m, 1).unwrap(), &[0.0]).unwrap()
    }

    fn plap(p: f64) -> SelfSimilarSolution {
        build_solution(PdeFamily::p_laplace(p, 1).unwrap(), &[0.0]).unwrap()
    }

    #[test]
    fn exponents_by_substitution() {
        let s = pme(3.0);
        assert!((s.k() - 0.25).abs() < 1e-15);
        assert!((s.q() - 1.0 / 12.0).abs() < 1e-15);
        let s = plap(4.0);
        assert!((s.k() - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.q() - 0.5 * (1.0f64 / 6.0).cbrt()).abs() < 1e-15);
        assert!((s.alpha() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalization_constants() {
        assert!((pme(3.0).c() - 0.18377629847393068).abs() < 1e-10);
        assert!((pme(2.0).c() - 0.3605623925768521).abs() < 1e-10);
        assert!((pme(1.5).c() - 0.5669832888165136).abs() < 1e-10);
        assert!((plap(4.0).c() - 0.662787402084605).abs() < 1e-10);
    }

    #[test]
    fn radii_and_point_values() {
        let s = pme(3.0);
        assert!((s.support_radius(1.0).unwrap() - 1.4850304985713823).abs() < 1e-9);
        assert!((s.support_radius(16.0).unwrap() - 2.0 * s.support_radius(1.0).unwrap()).abs() < 1e-14);
        assert!((s.density(1.0, &[0.0]).unwrap() - 0.4286913790524958).abs() < 1e-10);
        assert_eq!(s.density(1.0, &[2.0]).unwrap(), 0.0);
        assert!((plap(4.0).support_radius(1.0).unwrap() - 1.9334858277255114).abs() < 1e-9);
        let h = build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap();
        assert!(matches!(h.support_radius(1.0), Err(Error::UnboundedSupport)));
        assert!((h.density(0.5, &[1.0]).unwrap() - 0.20755374871029736).abs() < 1e-15);
        assert!((h.grad_density(1.0, &[1.0]).unwrap()[0] + 0.24197072451914334).abs() < 1e-15);
        assert!(h.density(0.0, &[0.0]).is_err());
    }

    #[test]
    fn pme_power_gradient_is_linear_drift() {
        let s = pme(3.0);
        let g = s.grad_density_power(1.0, &[0.4], 3.0).unwrap()[0];
        let u = s.density(1.0, &[0.4]).unwrap();
        assert!((g / u + 0.1).abs() < 1e-13);
        assert_eq!(s.grad_density(1.0, &[1.6]).unwrap()[0], 0.0);
    }

    #[test]
    fn quantiles() {
        let h = build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap();
        let q = h.inverse_cdf(1.0, 0.975).unwrap();
        assert!((q - 1.9599639845400538).abs() < 1e-12, "{q}");
        assert_eq!(h.inverse_cdf(1.0, 0.5).unwrap(), 0.0);
        let s = pme(3.0);
        assert_eq!(s.inverse_cdf(1.0, 0.5).unwrap(), 0.0);
        let r = s.support_radius(1.0).unwrap();
        for &u in &[1e-12, 0.3, 0.999999] {
            let x = s.inverse_cdf(1.0, u).unwrap();
            assert!(x > -r && x < r);
            assert!((s.cdf(1.0, x).unwrap() - u).abs() < 1e-10);
        }
        assert!(s.inverse_cdf(1.0, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PdeFamily::porous_medium(1.0, 1).is_err());
        assert!(PdeFamily::p_laplace(2.0, 1).is_err());
        assert!(PdeFamily::heat(0).is_err());
    }
}
