//! Path generation: the explicit Euler-Maruyama scheme
//! X_{i+1} = X_i + b(t_i, X_i) dt + sqrt(2 a(t_i, X_i)) dW_i
//! and exact samplers for the processes with closed-form solutions.

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::SelfSimilarSolution;
use crate::coeffs::CoefficientField;
use crate::error::{DivergedPath, Error, Result};
use crate::sampler::{self, RngStream};

/// Largest grid for the dense covariance factorization of [`exact_heat_beta`].
pub const MAX_CHOLESKY_POINTS: usize = 4096;
const JITTER_LADDER: [f64; 6] = [0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FirstStepPolicy {
    /// Sample the marginal when the field is singular at t = 0, else step from z.
    Auto,
    /// Draw X_1 from u(dt, .) by inversion.
    SampleMarginal,
    /// Ordinary Euler step from z with coefficients at (0, z). Unsupported
    /// for fields singular at t = 0.
    EvaluateAtZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPolicy {
    /// Clamp |b| at 1/dt for fields singular at the support boundary.
    Auto,
    None,
    ClampDrift(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub z: f64,
    pub seed: u64,
    pub first_step: FirstStepPolicy,
    pub boundary: BoundaryPolicy,
    /// Keep every `record_every`-th grid point (the last one is always kept).
    pub record_every: usize,
    /// Path `i` draws from stream `stream_offset + i`.
    pub stream_offset: u64,
}

impl SimConfig {
    pub fn new(t_end: f64, dt: f64, n_paths: usize, seed: u64) -> Self {
        Self {
            t_end,
            dt,
            n_paths,
            z: 0.0,
            seed,
            first_step: FirstStepPolicy::Auto,
            boundary: BoundaryPolicy::Auto,
            record_every: 1,
            stream_offset: 0,
        }
    }

    /// Number of steps M = T/dt; must be an integer >= 2.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.t_end > 0.0 && self.dt.is_finite() && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "T and dt must be positive, got T={}, dt={}",
                self.t_end, self.dt
            )));
        }
        let ratio = self.t_end / self.dt;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * m.max(1.0) || m < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "T/dt must be an integer >= 2, got {ratio}"
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(m as usize)
    }

    fn recorded_steps(&self, m: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..=m).step_by(self.record_every).collect();
        if *idx.last().unwrap() != m {
            idx.push(m);
        }
        idx
    }

    pub fn stream(&self, path: usize) -> RngStream {
        RngStream::new(self.seed, self.stream_offset + path as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsemble {
    /// Recorded times t_i = t0 + i dt.
    pub times: Vec<f64>,
    /// Grid index of each recorded time.
    pub steps: Vec<usize>,
    /// `positions[path][j]` is the state at `times[j]`.
    pub positions: Vec<Vec<f64>>,
    pub config: SimConfig,
    pub stream_indices: Vec<u64>,
    /// Realized quadratic variation of each path over the full grid.
    pub qv: Vec<f64>,
    /// Grid index from which the Euler recursion drives the paths.
    pub scheme_start: usize,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.positions.len()
    }

    pub fn final_positions(&self) -> Vec<f64> {
        self.positions.iter().map(|p| *p.last().unwrap()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[j]).collect()
    }

    /// Index of the recorded time closest to `t`, if within 1e-9.
    pub fn time_index(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

struct PathOut {
    rec: Vec<f64>,
    qv: f64,
}

fn drift_cap(field: &CoefficientField, cfg: &SimConfig) -> f64 {
    match cfg.boundary {
        BoundaryPolicy::None => f64::INFINITY,
        BoundaryPolicy::ClampDrift(c) => c,
        BoundaryPolicy::Auto => {
            if field.singularity().singular_at_boundary {
                1.0 / cfg.dt
            } else {
                f64::INFINITY
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_path(
    field: &CoefficientField,
    path: usize,
    t0: f64,
    x0: f64,
    sample_first: bool,
    m: usize,
    cfg: &SimConfig,
    recorded: &[usize],
    cap: f64,
) -> std::result::Result<PathOut, DivergedPath> {
    let sol = field.solution();
    let dt = cfg.dt;
    let sdt = dt.sqrt();
    let mut rng = cfg.stream(path).rng();
    let mut rec = Vec::with_capacity(recorded.len());
    let mut next = 0;
    let mut x = x0;
    let mut qv = 0.0;
    let mut push = |i: usize, x: f64, rec: &mut Vec<f64>| {
        if next < recorded.len() && recorded[next] == i {
            rec.push(x);
            next += 1;
        }
    };
    push(0, x, &mut rec);
    for i in 0..m {
        let t = t0 + i as f64 * dt;
        let (xn, a, b) = if i == 0 && sample_first {
            let v = sampler::draw_marginal(sol, dt, &mut rng).map_err(|_| DivergedPath {
                path,
                step: 0,
                t,
                x,
                a: f64::NAN,
                b: f64::NAN,
            })?;
            (v, f64::NAN, f64::NAN)
        } else {
            let (a, b) = field.eval1(t, x);
            let b = b.clamp(-cap, cap);
            let dw = sdt * sampler::standard_normal(&mut rng);
            (x + b * dt + (2.0 * a.max(0.0)).sqrt() * dw, a, b)
        };
        if !xn.is_finite() {
            return Err(DivergedPath { path, step: i, t, x, a, b });
        }
        qv += (xn - x) * (xn - x);
        x = xn;
        push(i + 1, x, &mut rec);
    }
    Ok(PathOut { rec, qv })
}

fn assemble(
    field: &CoefficientField,
    t0: f64,
    starts: Option<&[f64]>,
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    let m = cfg.steps()?;
    let sol = field.solution();
    if sol.dim() != 1 {
        return Err(Error::Domain("simulation is implemented for d = 1".into()));
    }
    if starts.is_none() && cfg.z != sol.z0() {
        return Err(Error::InvalidParameter(format!(
            "start point {} differs from the solution centre {}",
            cfg.z,
            sol.z0()
        )));
    }
    let sample_first = starts.is_none()
        && match cfg.first_step {
            FirstStepPolicy::SampleMarginal => true,
            FirstStepPolicy::EvaluateAtZ => false,
            FirstStepPolicy::Auto => field.singularity().singular_at_t0,
        };
    let recorded = cfg.recorded_steps(m);
    let cap = drift_cap(field, cfg);
    let results: Vec<_> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let x0 = starts.map_or(cfg.z, |s| s[p]);
            run_path(field, p, t0, x0, sample_first, m, cfg, &recorded, cap)
        })
        .collect();
    let mut positions = Vec::with_capacity(cfg.n_paths);
    let mut qv = Vec::with_capacity(cfg.n_paths);
    let mut diverged = Vec::new();
    for r in results {
        match r {
            Ok(o) => {
                positions.push(o.rec);
                qv.push(o.qv);
            }
            Err(d) => diverged.push(d),
        }
    }
    if !diverged.is_empty() {
        return Err(Error::Diverged(diverged));
    }
    Ok(PathEnsemble {
        times: recorded.iter().map(|&i| t0 + i as f64 * cfg.dt).collect(),
        steps: recorded,
        positions,
        config: cfg.clone(),
        stream_indices: (0..cfg.n_paths).map(|p| cfg.stream(p).index).collect(),
        qv,
        scheme_start: usize::from(sample_first),
    })
}

/// Euler-Maruyama from z at t = 0 along `field`.
pub fn euler_maruyama(field: &CoefficientField, cfg: &SimConfig) -> Result<PathEnsemble> {
    assemble(field, 0.0, None, cfg)
}

/// Euler-Maruyama from given positions at time `t0` > 0, coefficients
/// evaluated at (t0 + i dt, X_i). `cfg.t_end` is the elapsed horizon.
pub fn euler_maruyama_from(
    field: &CoefficientField,
    t0: f64,
    starts: &[f64],
    cfg: &SimConfig,
) -> Result<PathEnsemble> {
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("start time must be positive, got {t0}")));
    }
    if starts.len() != cfg.n_paths {
        return Err(Error::InvalidParameter(format!(
            "{} start points for {} paths",
            starts.len(),
            cfg.n_paths
        )));
    }
    assemble(field, t0, Some(starts), cfg)
}

/// X_t = z + eta t^{k/d} with eta drawn from the unit-time profile.
pub fn exact_pure_drift(sol: &SelfSimilarSolution, cfg: &SimConfig) -> Result<PathEnsemble> {
    let m = cfg.steps()?;
    if sol.dim() != 1 {
        return Err(Error::Domain("exact paths are implemented for d = 1".into()));
    }
    let recorded = cfg.recorded_steps(m);
    let kd = sol.k_over_d();
    let z = sol.z0();
    let dt = cfg.dt;
    let grid: Vec<f64> = (0..=m).map(|i| (i as f64 * dt).powf(kd)).collect();
    let paths: Vec<Result<(Vec<f64>, f64)>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let eta = sampler::sample_profile_eta(sol, &mut cfg.stream(p).rng())?;
            let rec = recorded.iter().map(|&i| z + eta * grid[i]).collect();
            let qv = grid
                .windows(2)
                .map(|w| {
                    let d = eta * (w[1] - w[0]);
                    d * d
                })
                .sum();
            Ok((rec, qv))
        })
        .collect();
    let mut positions = Vec::with_capacity(cfg.n_paths);
    let mut qv = Vec::with_capacity(cfg.n_paths);
    for r in paths {
        let (p, q) = r?;
        positions.push(p);
        qv.push(q);
    }
    Ok(PathEnsemble {
        times: recorded.iter().map(|&i| i as f64 * dt).collect(),
        steps: recorded,
        positions,
        config: cfg.clone(),
        stream_indices: (0..cfg.n_paths).map(|p| cfg.stream(p).index).collect(),
        qv,
        scheme_start: 0,
    })
}

/// Cov(X_s, X_t) = t^{(1-beta)/2} s^{(1+beta)/2} for s <= t.
pub fn heat_beta_covariance(beta: f64, s: f64, t: f64) -> f64 {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    t.powf(0.5 * (1.0 - beta)) * s.powf(0.5 * (1.0 + beta))
}

/// Gaussian paths X = z + L xi on the recorded grid (t > 0), L the Cholesky
/// factor of the heat-beta covariance.
pub fn exact_heat_beta(beta: f64, cfg: &SimConfig) -> Result<PathEnsemble> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let m = cfg.steps()?;
    let recorded = cfg.recorded_steps(m);
    let times: Vec<f64> = recorded.iter().map(|&i| i as f64 * cfg.dt).collect();
    let inner = &times[1..];
    let n = inner.len();
    if n > MAX_CHOLESKY_POINTS {
        return Err(Error::InvalidParameter(format!(
            "{n} grid points exceed the dense factorization limit {MAX_CHOLESKY_POINTS}; raise record_every"
        )));
    }
    let cov = DMatrix::from_fn(n, n, |i, j| heat_beta_covariance(beta, inner[i], inner[j]));
    let scale = cov.diagonal().mean();
    let mut factor = None;
    for jitter in JITTER_LADDER {
        let mut c = cov.clone();
        for i in 0..n {
            c[(i, i)] += jitter * scale;
        }
        if let Some(ch) = Cholesky::new(c) {
            factor = Some(ch.l());
            break;
        }
    }
    let l = factor.ok_or_else(|| {
        Error::Numerical(format!(
            "covariance for beta = {beta} is not positive definite after jitter {}",
            JITTER_LADDER[JITTER_LADDER.len() - 1]
        ))
    })?;
    let z = cfg.z;
    let positions: Vec<Vec<f64>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = cfg.stream(p).rng();
            let xi = DVector::from_iterator(n, (0..n).map(|_| sampler::standard_normal(&mut rng)));
            let y = &l * xi;
            std::iter::once(z).chain(y.iter().map(|v| z + v)).collect()
        })
        .collect();
    let qv = positions
        .iter()
        .map(|p| p.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum())
        .collect();
    Ok(PathEnsemble {
        times,
        steps: recorded,
        positions,
        config: cfg.clone(),
        stream_indices: (0..cfg.n_paths).map(|p| cfg.stream(p).index).collect(),
        qv,
        scheme_start: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{build_solution, PdeFamily};
    use crate::coeffs::{make_field, Interpretation};
    use std::sync::Arc;

    #[test]
    fn step_count_validation() {
        assert_eq!(SimConfig::new(1.0, 1e-4, 1, 0).steps().unwrap(), 10_000);
        assert!(SimConfig::new(1.0, 0.3, 1, 0).steps().is_err());
        assert!(SimConfig::new(1.0, 1.0, 1, 0).steps().is_err());
    }

    #[test]
    fn brownian_case_uses_raw_increments() {
        let sol = Arc::new(build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap());
        let f = make_field(Interpretation::HeatBeta { beta: 1.0 }, sol).unwrap();
        let mut cfg = SimConfig::new(0.01, 0.001, 2, 5);
        cfg.first_step = FirstStepPolicy::EvaluateAtZ;
        let ens = euler_maruyama(&f, &cfg).unwrap();
        let mut rng = cfg.stream(1).rng();
        let inc = sampler::gaussian_increments(10, 0.001, &mut rng);
        let mut x = 0.0;
        for (j, d) in inc.iter().enumerate() {
            x += 1.0 * d;
            assert!((ens.positions[1][j + 1] - x).abs() < 1e-15);
        }
    }

    #[test]
    fn pure_drift_recursion_inside_support() {
        let sol = Arc::new(build_solution(PdeFamily::porous_medium(3.0, 1).unwrap(), &[0.0]).unwrap());
        let f = make_field(Interpretation::PmeBeta { beta: 0.0 }, sol).unwrap();
        let cfg = SimConfig::new(0.1, 0.01, 3, 9);
        let ens = euler_maruyama(&f, &cfg).unwrap();
        for p in &ens.positions {
            for i in 1..10 {
                let t = i as f64 * 0.01;
                let expect = p[i] * (1.0 + 0.25 * 0.01 / t);
                assert!((p[i + 1] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_pure_drift_closed_form() {
        let sol = build_solution(PdeFamily::porous_medium(3.0, 1).unwrap(), &[0.0]).unwrap();
        let mut cfg = SimConfig::new(0.0625, 0.0625 / 4.0, 2, 1);
        cfg.record_every = 4;
        let ens = exact_pure_drift(&sol, &cfg).unwrap();
        let eta = sampler::sample_profile_eta(&sol, &mut cfg.stream(0).rng()).unwrap();
        assert!((ens.positions[0][1] - 0.5 * eta).abs() < 1e-15);
        assert_eq!(ens.times, vec![0.0, 0.0625]);
    }

    #[test]
    fn heat_beta_covariance_values() {
        assert!((heat_beta_covariance(1.0, 1.0, 2.0) - 1.0).abs() < 1e-15);
        assert!((heat_beta_covariance(0.5, 1.0, 4.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((heat_beta_covariance(1e-12, 1.0, 4.0) - 2.0).abs() < 1e-10);
    }
}
