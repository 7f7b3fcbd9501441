//! Flat `key = value` run configuration. Blank lines and `#` comments are
//! ignored; unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use serde::Serialize;

use crate::analytic::{build_solution, PdeFamily, SelfSimilarSolution};
use crate::coeffs::{make_field, CoefficientField, Interpretation};
use crate::error::{Error, Result};
use crate::sim::SimConfig;
use crate::verify::TestFunction;

pub const KEYS: &[&str] = &[
    "pde",
    "m",
    "p",
    "interpretation",
    "beta",
    "theta",
    "pc_p",
    "pc_c",
    "z",
    "T",
    "dt",
    "n_paths",
    "seed",
    "out",
    "method",
    "record_every",
    "betas",
    "significance",
    "qv_tol",
    "flow_s",
    "particles",
    "replicas",
    "phi",
    "phi_center",
    "phi_width",
    "variance_tol",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pde {
    Heat,
    Pme,
    Plaplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpretationKind {
    Beta,
    Pc,
    Stratonovich,
    Additive,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiKind {
    Bump,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub pde: Pde,
    pub m: f64,
    pub p: f64,
    pub interpretation: InterpretationKind,
    pub beta: f64,
    pub theta: f64,
    pub pc_p: f64,
    pub pc_c: f64,
    pub z: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub method: Method,
    pub record_every: usize,
    pub betas: Vec<f64>,
    pub significance: f64,
    pub qv_tol: f64,
    pub flow_s: Option<f64>,
    pub particles: usize,
    pub replicas: usize,
    pub phi: PhiKind,
    pub phi_center: f64,
    pub phi_width: f64,
    pub variance_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pde: Pde::Heat,
            m: 3.0,
            p: 4.0,
            interpretation: InterpretationKind::Beta,
            beta: 1.0,
            theta: 1.0,
            pc_p: 1.0,
            pc_c: 0.0,
            z: 0.0,
            t_end: 1.0,
            dt: 1e-4,
            n_paths: 30,
            seed: 1,
            out: None,
            method: Method::Euler,
            record_every: 1,
            betas: vec![0.0, 0.1, 1.0, 1.5],
            significance: 0.01,
            qv_tol: 0.05,
            flow_s: None,
            particles: 1000,
            replicas: 200,
            phi: PhiKind::Bump,
            phi_center: 0.0,
            phi_width: 0.5,
            variance_tol: 0.1,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T> {
    options.iter().find(|o| o.0 == v).map(|o| o.1).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|o| o.0).collect();
        Error::Config(format!("{key}: {v:?} is not one of {}", names.join(", ")))
    })
}

impl RunConfig {
    /// Parses the text of a config file and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key {k:?}", n + 1)));
            }
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {k:?}", n + 1)));
            }
        }
        let mut c = Self::default();
        for (k, v) in &seen {
            let v = v.as_str();
            match k.as_str() {
                "pde" => {
                    c.pde = choice(k, v, &[("heat", Pde::Heat), ("pme", Pde::Pme), ("plaplace", Pde::Plaplace)])?
                }
                "m" => c.m = num(k, v)?,
                "p" => c.p = num(k, v)?,
                "interpretation" => {
                    c.interpretation = choice(
                        k,
                        v,
                        &[
                            ("beta", InterpretationKind::Beta),
                            ("pc", InterpretationKind::Pc),
                            ("stratonovich", InterpretationKind::Stratonovich),
                            ("additive", InterpretationKind::Additive),
                            ("theta", InterpretationKind::Theta),
                        ],
                    )?
                }
                "beta" => c.beta = num(k, v)?,
                "theta" => c.theta = num(k, v)?,
                "pc_p" => c.pc_p = num(k, v)?,
                "pc_c" => c.pc_c = num(k, v)?,
                "z" => c.z = num(k, v)?,
                "T" => c.t_end = num(k, v)?,
                "dt" => c.dt = num(k, v)?,
                "n_paths" => c.n_paths = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                "out" => c.out = Some(PathBuf::from(v)),
                "method" => c.method = choice(k, v, &[("euler", Method::Euler), ("exact", Method::Exact)])?,
                "record_every" => c.record_every = num(k, v)?,
                "betas" => {
                    c.betas = v
                        .split(',')
                        .map(|s| num(k, s.trim()))
                        .collect::<Result<_>>()?
                }
                "significance" => c.significance = num(k, v)?,
                "qv_tol" => c.qv_tol = num(k, v)?,
                "flow_s" => c.flow_s = Some(num(k, v)?),
                "particles" => c.particles = num(k, v)?,
                "replicas" => c.replicas = num(k, v)?,
                "phi" => c.phi = choice(k, v, &[("bump", PhiKind::Bump), ("linear", PhiKind::Linear)])?,
                "phi_center" => c.phi_center = num(k, v)?,
                "phi_width" => c.phi_width = num(k, v)?,
                "variance_tol" => c.variance_tol = num(k, v)?,
                _ => unreachable!(),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Admissibility of the family, interpretation and grid, before any compute.
    pub fn validate(&self) -> Result<()> {
        let family = self.family()?;
        self.interpretation_for(self.beta)?.validate(&family)?;
        for &b in &self.betas {
            self.interpretation_for(b)?.validate(&family)?;
        }
        self.sim_config().steps()?;
        if self.n_paths == 0 || self.record_every == 0 {
            return Err(Error::Config("n_paths and record_every must be positive".into()));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::Config(format!("significance must lie in (0, 1), got {}", self.significance)));
        }
        if let Some(s) = self.flow_s {
            if !(s > 0.0) {
                return Err(Error::Config(format!("flow_s must be positive, got {s}")));
            }
        }
        if !(self.phi_width > 0.0) {
            return Err(Error::Config(format!("phi_width must be positive, got {}", self.phi_width)));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<PdeFamily> {
        match self.pde {
            Pde::Heat => PdeFamily::heat(1),
            Pde::Pme => PdeFamily::porous_medium(self.m, 1),
            Pde::Plaplace => PdeFamily::p_laplace(self.p, 1),
        }
    }

    /// The configured interpretation with its beta replaced by `beta`.
    pub fn interpretation_for(&self, beta: f64) -> Result<Interpretation> {
        use InterpretationKind as K;
        Ok(match (self.pde, self.interpretation) {
            (Pde::Heat, K::Beta) => Interpretation::HeatBeta { beta },
            (Pde::Heat, K::Pc) => Interpretation::HeatPC { p: self.pc_p, c: self.pc_c },
            (Pde::Pme, K::Beta) => Interpretation::PmeBeta { beta },
            (Pde::Pme, K::Stratonovich) => Interpretation::PmeStratonovich,
            (Pde::Pme, K::Additive) => Interpretation::PmeAdditive,
            (Pde::Plaplace, K::Beta) => Interpretation::PLapBeta { beta },
            (Pde::Plaplace, K::Theta) => Interpretation::PLapTheta { theta: self.theta },
            (pde, kind) => {
                return Err(Error::Config(format!(
                    "interpretation {kind:?} is not available for {pde:?}"
                )))
            }
        })
    }

    pub fn interpretation(&self) -> Result<Interpretation> {
        self.interpretation_for(self.beta)
    }

    pub fn solution(&self) -> Result<Arc<SelfSimilarSolution>> {
        Ok(Arc::new(build_solution(self.family()?, &[self.z])?))
    }

    pub fn field(&self, sol: Arc<SelfSimilarSolution>, beta: f64) -> Result<CoefficientField> {
        make_field(self.interpretation_for(beta)?, sol)
    }

    pub fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(self.t_end, self.dt, self.n_paths, self.seed);
        c.z = self.z;
        c.record_every = self.record_every;
        c
    }

    pub fn test_function(&self) -> TestFunction {
        match self.phi {
            PhiKind::Bump => TestFunction::bump(self.phi_center, self.phi_width),
            PhiKind::Linear => TestFunction::TruncatedLinear {
                center: self.phi_center,
                half_width: self.phi_width,
            },
        }
    }

    /// `key = value` lines in `KEYS` order, as echoed into table metadata.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let json = serde_json::to_value(self).expect("config serializes");
        KEYS.iter()
            .filter_map(|k| {
                let v = json.get(*k)?;
                let s = match v {
                    serde_json::Value::Null => return None,
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Array(a) => a
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    other => other.to_string(),
                };
                Some((k.to_string(), s))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let c = RunConfig::parse("pde = pme\nm = 3 # exponent\nbeta=1.5\nT = 0.5\ndt=1e-3\n").unwrap();
        assert_eq!(c.pde, Pde::Pme);
        assert_eq!(c.beta, 1.5);
        let pairs = c.to_pairs();
        assert!(pairs.contains(&("T".into(), "0.5".into())));
        assert!(pairs.contains(&("pde".into(), "pme".into())));
        let again = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect::<String>();
        assert_eq!(RunConfig::parse(&again).unwrap(), c);
    }

    #[test]
    fn rejects_unknown_duplicate_and_inadmissible() {
        assert!(matches!(RunConfig::parse("betta = 1"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("dt = 1e-3\ndt = 1e-3"), Err(Error::Config(_))));
        assert!(RunConfig::parse("pde = pme\nm = 1").is_err());
        assert!(RunConfig::parse("pde = heat\ninterpretation = theta").is_err());
        assert!(RunConfig::parse("T = 1\ndt = 0.3").is_err());
    }
}
