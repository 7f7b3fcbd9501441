//! Fokker-Planck interpretations as coefficient fields (a, b) along a fixed
//! self-similar solution, with generator L phi = a Laplace(phi) + b . grad(phi).

mod plaplace;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{FamilyTag, SelfSimilarSolution};
use crate::error::{Error, Result};

pub use plaplace::{plaplace_a, plaplace_h, plaplace_h_theta, HProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interpretation {
    HeatBeta { beta: f64 },
    HeatPC { p: f64, c: f64 },
    PmeBeta { beta: f64 },
    PmeAdditive,
    PmeStratonovich,
    PLapBeta { beta: f64 },
    PLapTheta { theta: f64 },
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HeatBeta { beta } => write!(f, "heat-beta({beta})"),
            Self::HeatPC { p, c } => write!(f, "heat-pc(p={p}, c={c})"),
            Self::PmeBeta { beta } => write!(f, "pme-beta({beta})"),
            Self::PmeAdditive => write!(f, "pme-additive"),
            Self::PmeStratonovich => write!(f, "pme-stratonovich"),
            Self::PLapBeta { beta } => write!(f, "plaplace-beta({beta})"),
            Self::PLapTheta { theta } => write!(f, "plaplace-theta({theta})"),
        }
    }
}

impl Interpretation {
    /// Checks the parameter ranges and that the interpretation belongs to `family`.
    pub fn validate(&self, family: &crate::analytic::PdeFamily) -> Result<()> {
        let d = family.d as f64;
        let incompatible = || Error::Incompatible {
            interpretation: self.to_string(),
            family: family.name(),
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")))
            }
        };
        match (*self, family.tag) {
            (Self::HeatBeta { beta }, FamilyTag::Heat) => nonneg("beta", beta),
            (Self::HeatPC { p, c }, FamilyTag::Heat) => {
                let ok = (p > 0.0 && p < 1.0 + 1.0 / d && c >= 0.0) || (p == 1.0 && c >= -0.5);
                if ok && c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "(p, c) = ({p}, {c}) needs 0 < p < 1 + 1/d with c >= 0, or p = 1 with c >= -1/2"
                    )))
                }
            }
            (Self::PmeBeta { beta }, FamilyTag::PorousMedium { .. }) => nonneg("beta", beta),
            (Self::PmeAdditive | Self::PmeStratonovich, FamilyTag::PorousMedium { .. }) => Ok(()),
            (Self::PLapBeta { beta }, FamilyTag::PLaplace { .. }) => nonneg("beta", beta),
            (Self::PLapTheta { theta }, FamilyTag::PLaplace { .. }) => {
                if (0.0..=1.0).contains(&theta) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")))
                }
            }
            _ => Err(incompatible()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Singularity {
    pub singular_at_t0: bool,
    pub singular_at_boundary: bool,
}

pub type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Writes a vector value into the output slice.
pub type VectorFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
enum Kind {
    HeatBeta { beta: f64 },
    HeatPC { p: f64, c: f64 },
    PmeBeta { beta: f64, m: f64 },
    PmeAdditive { m: f64 },
    PLapBeta { beta: f64, h: Arc<HProfile> },
    PLapTheta { theta: f64, h: Arc<HProfile> },
    Transformed { base: Box<CoefficientField>, f: ScalarFn, grad_f: VectorFn },
    Custom { a: ScalarFn, b: VectorFn },
    Mix { lambda: f64, first: Box<CoefficientField>, second: Box<CoefficientField> },
}

/// Evaluable (a, b) for one interpretation along one solution. Cheap to clone.
#[derive(Clone)]
pub struct CoefficientField {
    label: String,
    interpretation: Option<Interpretation>,
    sol: Arc<SelfSimilarSolution>,
    kind: Kind,
    a_scale: f64,
    singularity: Singularity,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("label", &self.label)
            .field("family", &self.sol.family())
            .field("a_scale", &self.a_scale)
            .field("singularity", &self.singularity)
            .finish()
    }
}

pub fn make_field(interp: Interpretation, sol: Arc<SelfSimilarSolution>) -> Result<CoefficientField> {
    interp.validate(&sol.family())?;
    let (kind, singularity) = match (interp, sol.family().tag) {
        (Interpretation::HeatBeta { beta }, _) => (
            Kind::HeatBeta { beta },
            Singularity { singular_at_t0: beta != 1.0, singular_at_boundary: false },
        ),
        (Interpretation::HeatPC { p, c }, _) => (
            Kind::HeatPC { p, c },
            Singularity { singular_at_t0: !(p == 1.0 && c == 0.0), singular_at_boundary: false },
        ),
        (Interpretation::PmeBeta { beta }, FamilyTag::PorousMedium { m }) => (
            Kind::PmeBeta { beta, m },
            Singularity { singular_at_t0: true, singular_at_boundary: false },
        ),
        (Interpretation::PmeStratonovich, FamilyTag::PorousMedium { m }) => (
            Kind::PmeBeta { beta: 2.0 * m / (m + 1.0), m },
            Singularity { singular_at_t0: true, singular_at_boundary: false },
        ),
        (Interpretation::PmeAdditive, FamilyTag::PorousMedium { m }) => (
            Kind::PmeAdditive { m },
            Singularity { singular_at_t0: true, singular_at_boundary: true },
        ),
        (Interpretation::PLapBeta { beta }, _) => (
            Kind::PLapBeta { beta, h: Arc::new(HProfile::new(&sol, 1.0)?) },
            Singularity { singular_at_t0: true, singular_at_boundary: false },
        ),
        (Interpretation::PLapTheta { theta }, _) => (
            Kind::PLapTheta { theta, h: Arc::new(HProfile::new(&sol, theta)?) },
            Singularity { singular_at_t0: true, singular_at_boundary: false },
        ),
        _ => unreachable!("validated above"),
    };
    Ok(CoefficientField {
        label: interp.to_string(),
        interpretation: Some(interp),
        sol,
        kind,
        a_scale: 1.0,
        singularity,
    })
}

/// Field with user-supplied evaluators, e.g. a frozen constant diffusion.
pub fn custom_field(
    label: &str,
    sol: Arc<SelfSimilarSolution>,
    a: ScalarFn,
    b: VectorFn,
    singularity: Singularity,
) -> CoefficientField {
    CoefficientField {
        label: label.to_string(),
        interpretation: None,
        sol,
        kind: Kind::Custom { a, b },
        a_scale: 1.0,
        singularity,
    }
}

/// Grid used for the admissibility check of [`apply_f_transform`].
fn check_grid(sol: &SelfSimilarSolution) -> Vec<(f64, Vec<f64>)> {
    let mut pts = Vec::new();
    let d = sol.dim();
    for &t in &[0.05, 0.25, 0.5, 1.0, 2.0] {
        let reach = if sol.family().is_compact() { sol.reach(t) } else { 6.0 * t.sqrt() };
        for i in 0..201 {
            let s = -reach + 2.0 * reach * (i as f64 + 0.5) / 201.0;
            let mut x = sol.z().to_vec();
            x[0] += s;
            let _ = d;
            pts.push((t, x));
        }
    }
    pts
}

/// a' = a + f/u and b' = b + grad(f)/u, both set to zero where u = 0.
pub fn apply_f_transform(
    base: &CoefficientField,
    f: ScalarFn,
    grad_f: VectorFn,
) -> Result<CoefficientField> {
    let sol = base.sol.clone();
    let mut bad = Vec::new();
    let mut bbuf = vec![0.0; sol.dim()];
    for (t, x) in check_grid(&sol) {
        let u = sol.density(t, &x)?;
        if u <= 0.0 {
            continue;
        }
        let a = base.eval(t, &x, &mut bbuf);
        let v = f(t, &x) + a * u;
        if !(v >= -1e-12 * (1.0 + (a * u).abs())) {
            bad.push((t, x[0], v));
        }
    }
    if !bad.is_empty() {
        return Err(Error::Admissibility(bad));
    }
    let compact = sol.family().is_compact();
    Ok(CoefficientField {
        label: format!("{} (f-transformed)", base.label),
        interpretation: None,
        singularity: Singularity {
            singular_at_t0: true,
            singular_at_boundary: base.singularity.singular_at_boundary || compact,
        },
        sol,
        kind: Kind::Transformed { base: Box::new(base.clone()), f, grad_f },
        a_scale: 1.0,
    })
}

impl CoefficientField {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn interpretation(&self) -> Option<Interpretation> {
        self.interpretation
    }

    pub fn solution(&self) -> &SelfSimilarSolution {
        &self.sol
    }

    pub fn solution_arc(&self) -> Arc<SelfSimilarSolution> {
        self.sol.clone()
    }

    pub fn singularity(&self) -> Singularity {
        self.singularity
    }

    /// Same field with the diffusion coefficient multiplied by `s`.
    pub fn with_diffusion_scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.a_scale *= s;
        out.label = format!("{} (a x {s})", self.label);
        out
    }

    /// lambda * first + (1 - lambda) * second, both on the same solution.
    pub fn mix(lambda: f64, first: &Self, second: &Self) -> Result<Self> {
        if !Arc::ptr_eq(&first.sol, &second.sol) {
            return Err(Error::InvalidParameter(
                "mixed fields must share one solution instance".into(),
            ));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        Ok(Self {
            label: format!("{lambda} * {} + {} * {}", first.label, 1.0 - lambda, second.label),
            interpretation: None,
            sol: first.sol.clone(),
            kind: Kind::Mix {
                lambda,
                first: Box::new(first.clone()),
                second: Box::new(second.clone()),
            },
            a_scale: 1.0,
            singularity: Singularity {
                singular_at_t0: first.singularity.singular_at_t0 || second.singularity.singular_at_t0,
                singular_at_boundary: first.singularity.singular_at_boundary
                    || second.singularity.singular_at_boundary,
            },
        })
    }

    /// Radial form (a, b_r) of the built-in interpretations, b = b_r (x - z)/r.
    fn radial(&self, t: f64, r: f64) -> Option<(f64, f64)> {
        let sol = &*self.sol;
        let kd = sol.k_over_d();
        Some(match &self.kind {
            Kind::HeatBeta { beta } => (0.5 * beta, (1.0 - beta) * r / (2.0 * t)),
            Kind::HeatPC { p, c } => {
                let w = sol.density_radial(t, r).powf(p - 1.0);
                (0.5 + c * w, -c * p * w * r / t)
            }
            Kind::PmeBeta { beta, m } => {
                let u = sol.density_radial(t, r);
                if u <= 0.0 {
                    (0.0, 0.0)
                } else {
                    (beta * u.powf(m - 1.0), (1.0 - beta) * kd * r / t)
                }
            }
            Kind::PmeAdditive { m } => {
                let u = sol.density_radial(t, r);
                if u <= 0.0 {
                    (0.0, 0.0)
                } else {
                    let s = sol.density_radial_slope(t, r);
                    (1.0, s * (1.0 - m * u.powf(m - 1.0)) / u)
                }
            }
            Kind::PLapBeta { beta, h } => {
                let xi = t.powf(-kd) * r;
                let hv = h.h(xi);
                if xi >= sol.unit_radius() {
                    (0.0, 0.0)
                } else {
                    (beta * t.powf(-sol.alpha()) * hv, (1.0 - beta) * kd * r / t)
                }
            }
            Kind::PLapTheta { theta, h } => {
                let xi = t.powf(-kd) * r;
                let (hv, dh) = h.h_with_slope(xi);
                let ta = t.powf(-sol.alpha());
                (ta * hv, (1.0 - theta) * ta * t.powf(-kd) * dh)
            }
            _ => return None,
        })
    }

    /// Radial derivative of a for the built-in interpretations.
    fn radial_grad_a(&self, t: f64, r: f64) -> Option<f64> {
        let sol = &*self.sol;
        let kd = sol.k_over_d();
        let u = sol.density_radial(t, r);
        Some(match &self.kind {
            Kind::HeatBeta { .. } | Kind::PmeAdditive { .. } => 0.0,
            Kind::HeatPC { p, c } => {
                if u <= 0.0 {
                    0.0
                } else {
                    c * (p - 1.0) * u.powf(p - 2.0) * sol.density_radial_slope(t, r)
                }
            }
            Kind::PmeBeta { beta, m } => {
                if u <= 0.0 {
                    0.0
                } else {
                    beta * (m - 1.0) * u.powf(m - 2.0) * sol.density_radial_slope(t, r)
                }
            }
            Kind::PLapBeta { beta, h } => {
                beta * t.powf(-sol.alpha() - kd) * h.h_with_slope(t.powf(-kd) * r).1
            }
            Kind::PLapTheta { h, .. } => t.powf(-sol.alpha() - kd) * h.h_with_slope(t.powf(-kd) * r).1,
            _ => return None,
        } * self.a_scale)
    }

    fn radius(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.sol.z())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates a(t, x) and writes b(t, x) into `b`.
    pub fn eval(&self, t: f64, x: &[f64], b: &mut [f64]) -> f64 {
        let r = self.radius(x);
        if let Some((a, br)) = self.radial(t, r) {
            let z = self.sol.z();
            for i in 0..b.len() {
                b[i] = if r > 0.0 { br * (x[i] - z[i]) / r } else { 0.0 };
            }
            return self.a_scale * a;
        }
        let a = match &self.kind {
            Kind::Custom { a, b: bf } => {
                bf(t, x, b);
                a(t, x)
            }
            Kind::Transformed { base, f, grad_f } => {
                let u = self.sol.density_radial(t, r);
                if u <= 0.0 {
                    b.fill(0.0);
                    0.0
                } else {
                    let a = base.eval(t, x, b);
                    let mut g = vec![0.0; b.len()];
                    grad_f(t, x, &mut g);
                    for (bi, gi) in b.iter_mut().zip(&g) {
                        *bi += gi / u;
                    }
                    a + f(t, x) / u
                }
            }
            Kind::Mix { lambda, first, second } => {
                let mut b2 = vec![0.0; b.len()];
                let a1 = first.eval(t, x, b);
                let a2 = second.eval(t, x, &mut b2);
                for (bi, b2i) in b.iter_mut().zip(&b2) {
                    *bi = lambda * *bi + (1.0 - lambda) * b2i;
                }
                lambda * a1 + (1.0 - lambda) * a2
            }
            _ => unreachable!("radial kinds handled above"),
        };
        self.a_scale * a
    }

    /// (a, b) in dimension one.
    #[inline]
    pub fn eval1(&self, t: f64, x: f64) -> (f64, f64) {
        if self.sol.dim() == 1 {
            let z = self.sol.z0();
            let r = (x - z).abs();
            if let Some((a, br)) = self.radial(t, r) {
                let b = if x > z { br } else if x < z { -br } else { 0.0 };
                return (self.a_scale * a, b);
            }
        }
        let mut b = [0.0];
        let a = self.eval(t, &[x], &mut b);
        (a, b[0])
    }

    pub fn diffusion(&self, t: f64, x: &[f64]) -> f64 {
        let mut b = vec![0.0; x.len()];
        self.eval(t, x, &mut b)
    }

    pub fn drift(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; x.len()];
        self.eval(t, x, &mut b);
        b
    }

    /// Gradient of a: closed form for built-in interpretations, central
    /// differences otherwise.
    pub fn grad_diffusion(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let r = self.radius(x);
        if let Some(s) = self.radial_grad_a(t, r) {
            if r == 0.0 {
                return vec![0.0; x.len()];
            }
            return x.iter().zip(self.sol.z()).map(|(a, b)| s * (a - b) / r).collect();
        }
        let h = 1e-6 * (1.0 + r);
        (0..x.len())
            .map(|i| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (self.diffusion(t, &xp) - self.diffusion(t, &xm)) / (2.0 * h)
            })
            .collect()
    }
}

/// b - (1/2) grad(a); zero where the density vanishes.
pub fn gradient_relation_defect(field: &CoefficientField, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let u = field.sol.density(t, x)?;
    if u <= 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let b = field.drift(t, x);
    let ga = field.grad_diffusion(t, x);
    Ok(b.iter().zip(&ga).map(|(bi, gi)| bi - 0.5 * gi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{build_solution, PdeFamily};

    fn pme(m: f64) -> Arc<SelfSimilarSolution> {
        Arc::new(build_solution(PdeFamily::porous_medium(m, 1).unwrap(), &[0.0]).unwrap())
    }

    fn heat() -> Arc<SelfSimilarSolution> {
        Arc::new(build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap())
    }

    #[test]
    fn reference_values() {
        let f = make_field(Interpretation::HeatBeta { beta: 1.0 }, heat()).unwrap();
        assert_eq!(f.eval1(0.3, 1.7), (0.5, 0.0));
        let f = make_field(Interpretation::HeatPC { p: 1.0, c: 0.0 }, heat()).unwrap();
        assert_eq!(f.eval1(0.3, 1.7), (0.5, 0.0));
        assert!(!f.singularity().singular_at_t0);
        let f = make_field(Interpretation::PmeBeta { beta: 0.0 }, pme(3.0)).unwrap();
        let (a, b) = f.eval1(1.0, 0.4);
        assert_eq!(a, 0.0);
        assert!((b - 0.1).abs() < 1e-15);
        let f = make_field(Interpretation::PmeBeta { beta: 1.0 }, pme(3.0)).unwrap();
        assert!((f.eval1(1.0, 0.0).0 - 0.18377629847393068).abs() < 1e-10);
    }

    #[test]
    fn incompatible_and_inadmissible() {
        assert!(matches!(
            make_field(Interpretation::PmeAdditive, heat()),
            Err(Error::Incompatible { .. })
        ));
        assert!(make_field(Interpretation::HeatPC { p: 1.0, c: -0.6 }, heat()).is_err());
        assert!(make_field(Interpretation::HeatPC { p: 2.5, c: 1.0 }, heat()).is_err());
        assert!(make_field(Interpretation::HeatPC { p: 1.0, c: -0.5 }, heat()).is_ok());
        assert!(make_field(Interpretation::PmeBeta { beta: -0.1 }, pme(2.0)).is_err());
    }

    #[test]
    fn stratonovich_defect_vanishes() {
        let f = make_field(Interpretation::PmeStratonovich, pme(3.0)).unwrap();
        let d = gradient_relation_defect(&f, 1.0, &[0.7]).unwrap();
        assert!(d[0].abs() < 1e-14);
        let f = make_field(Interpretation::PmeBeta { beta: 1.0 }, pme(3.0)).unwrap();
        assert!(gradient_relation_defect(&f, 1.0, &[0.7]).unwrap()[0].abs() > 1e-3);
        assert_eq!(gradient_relation_defect(&f, 1.0, &[3.0]).unwrap()[0], 0.0);
    }

    #[test]
    fn f_transform_to_pure_drift() {
        let sol = heat();
        let base = make_field(Interpretation::HeatBeta { beta: 1.0 }, sol.clone()).unwrap();
        let s1 = sol.clone();
        let s2 = sol.clone();
        let f: ScalarFn = Arc::new(move |t, x| -0.5 * s1.density(t, x).unwrap());
        let gf: VectorFn = Arc::new(move |t, x, out| {
            let g = s2.grad_density(t, x).unwrap();
            out[0] = -0.5 * g[0];
        });
        let tf = apply_f_transform(&base, f, gf).unwrap();
        let (a, b) = tf.eval1(0.5, 0.8);
        assert!(a.abs() < 1e-15);
        assert!((b - 0.8).abs() < 1e-12);
        let bad: ScalarFn = Arc::new(|_, _| -1.0);
        let zero: VectorFn = Arc::new(|_, _, out| out.fill(0.0));
        assert!(matches!(apply_f_transform(&base, bad, zero), Err(Error::Admissibility(_))));
    }
}
