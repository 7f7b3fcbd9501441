//! Frozen-coefficient particle systems and their fluctuation martingale
//! M^N_t = <rho_t, phi> - <rho_t0, phi> - int_t0^t <rho_r, a phi'' + b phi'> dr.
//!
//! With the measure argument frozen at the known solution the particles are
//! i.i.d., and Var(M^N_t) = (1/N) int_t0^t <rho_r, 2 a |phi'|^2> dr.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::sim::{self, PathEnsemble, SimConfig};
use crate::verify::{time_integrated_pairing, TestFunction, VerificationReport};

/// Fewest replicas accepted by [`martingale_noise_variance`].
pub const MIN_REPLICAS: usize = 100;

#[derive(Debug, Clone)]
pub struct ParticleSystem {
    pub field: CoefficientField,
    pub n: usize,
    pub cfg: SimConfig,
}

impl ParticleSystem {
    pub fn new(field: CoefficientField, n: usize, cfg: SimConfig) -> Self {
        Self { field, n, cfg }
    }

    /// Independent copy `r` of the system; its particles use a disjoint
    /// block of streams.
    pub fn replica(&self, r: usize) -> Self {
        let mut cfg = self.cfg.clone();
        cfg.stream_offset = self.cfg.stream_offset + (r * self.n) as u64;
        Self { field: self.field.clone(), n: self.n, cfg }
    }
}

#[derive(Debug, Clone)]
pub struct ParticleTrajectory {
    pub ensemble: PathEnsemble,
    pub field: CoefficientField,
}

/// N independent Euler-Maruyama particles on the full grid.
pub fn run_particles(sys: &ParticleSystem) -> Result<ParticleTrajectory> {
    let mut cfg = sys.cfg.clone();
    cfg.n_paths = sys.n;
    cfg.record_every = 1;
    Ok(ParticleTrajectory {
        ensemble: sim::euler_maruyama(&sys.field, &cfg)?,
        field: sys.field.clone(),
    })
}

impl ParticleTrajectory {
    /// <rho^N_{t_j}, phi>.
    pub fn pairing(&self, phi: &TestFunction, j: usize) -> f64 {
        let n = self.ensemble.n_paths() as f64;
        self.ensemble.positions.iter().map(|p| phi.value(p[j])).sum::<f64>() / n
    }

    /// Time at which the martingale starts: the first grid point driven by
    /// the Euler recursion.
    pub fn start_time(&self) -> f64 {
        self.ensemble.times[self.ensemble.scheme_start]
    }

    /// M^N_t with trapezoidal time integration on the simulation grid.
    pub fn noise_martingale(&self, phi: &TestFunction, t: f64) -> Result<f64> {
        let ens = &self.ensemble;
        let j_end = ens
            .time_index(t)
            .ok_or_else(|| Error::Domain(format!("time {t} not on the particle grid")))?;
        let j0 = ens.scheme_start;
        if j_end <= j0 {
            return Err(Error::Domain(format!("time {t} precedes the martingale start")));
        }
        let n = ens.n_paths() as f64;
        let gen = |j: usize| -> f64 {
            let tj = ens.times[j];
            ens.positions
                .iter()
                .map(|p| {
                    let (_, d1, d2) = phi.eval(p[j]);
                    if d1 == 0.0 && d2 == 0.0 {
                        return 0.0;
                    }
                    let (a, b) = self.field.eval1(tj, p[j]);
                    a * d2 + b * d1
                })
                .sum::<f64>()
                / n
        };
        let mut integral = 0.0;
        let mut prev = gen(j0);
        for j in j0 + 1..=j_end {
            let cur = gen(j);
            integral += 0.5 * (ens.times[j] - ens.times[j - 1]) * (prev + cur);
            prev = cur;
        }
        Ok(self.pairing(phi, j_end) - self.pairing(phi, j0) - integral)
    }
}

/// (1/N) int_t0^t <u_r, 2 a |phi'|^2> dr by quadrature along the frozen solution.
pub fn predicted_noise_variance(
    field: &CoefficientField,
    phi: &TestFunction,
    t0: f64,
    t: f64,
    n: usize,
) -> Result<f64> {
    let v = time_integrated_pairing(field, t0, t, &phi.breakpoints(), |x, a| {
        let d1 = phi.eval(x).1;
        2.0 * a * d1 * d1
    })?;
    Ok(v / n as f64)
}

/// Replica martingale values and the variance report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FluctuationResult {
    pub martingales: Vec<f64>,
    pub report: VerificationReport,
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

fn variance_report(
    martingales: Vec<f64>,
    field: &CoefficientField,
    phi: &TestFunction,
    t0: f64,
    t: f64,
    n: usize,
    rel_tol: f64,
) -> Result<FluctuationResult> {
    let r = martingales.len();
    if r < MIN_REPLICAS {
        return Err(Error::InsufficientSamples(format!(
            "noise variance needs at least {MIN_REPLICAS} replicas, got {r}"
        )));
    }
    let var = sample_variance(&martingales);
    let target = predicted_noise_variance(field, phi, t0, t, n)?;
    let report = VerificationReport::absolute(
        format!("noise variance {} N={n}", field.label()),
        var,
        target,
        rel_tol * target.abs(),
    )
    .with("replicas", r)
    .with("particles", n)
    .with("relative_standard_error", (2.0 / (r as f64 - 1.0)).sqrt())
    .with("t0", t0);
    Ok(FluctuationResult { martingales, report })
}

/// Empirical Var(M^N_t) across replica trajectories against the quadrature
/// prediction, within relative tolerance `rel_tol`.
pub fn martingale_noise_variance(
    trajectories: &[ParticleTrajectory],
    phi: &TestFunction,
    t: f64,
    rel_tol: f64,
) -> Result<VerificationReport> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InsufficientSamples("no trajectories".into()))?;
    let m: Vec<f64> = trajectories
        .iter()
        .map(|tr| tr.noise_martingale(phi, t))
        .collect::<Result<_>>()?;
    let n = first.ensemble.n_paths();
    Ok(variance_report(m, &first.field, phi, first.start_time(), t, n, rel_tol)?.report)
}

/// Runs `replicas` copies of the system one at a time (each dropped after its
/// martingale is taken) and reports the variance.
pub fn fluctuation_experiment(
    sys: &ParticleSystem,
    phi: &TestFunction,
    t: f64,
    replicas: usize,
    rel_tol: f64,
) -> Result<FluctuationResult> {
    let out: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let tr = run_particles(&sys.replica(r))?;
            Ok((tr.noise_martingale(phi, t)?, tr.start_time()))
        })
        .collect::<Result<_>>()?;
    let t0 = out.first().map_or(0.0, |v| v.1);
    let m = out.into_iter().map(|v| v.0).collect();
    variance_report(m, &sys.field, phi, t0, t, sys.n, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{build_solution, PdeFamily};
    use crate::coeffs::{custom_field, Singularity};
    use std::sync::Arc;

    fn brownian() -> CoefficientField {
        let sol = Arc::new(build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap());
        custom_field(
            "frozen a=1",
            sol,
            Arc::new(|_, _| 1.0),
            Arc::new(|_, _, b| b.fill(0.0)),
            Singularity { singular_at_t0: false, singular_at_boundary: false },
        )
    }

    #[test]
    fn constant_test_function_has_no_noise() {
        let sys = ParticleSystem::new(brownian(), 50, SimConfig::new(1.0, 0.1, 50, 3));
        let tr = run_particles(&sys).unwrap();
        let m = tr.noise_martingale(&TestFunction::Constant { value: 2.0 }, 1.0).unwrap();
        assert_eq!(m, 0.0);
    }

    #[test]
    fn prediction_for_linear_phi_is_2t_over_n() {
        let phi = TestFunction::TruncatedLinear { center: 0.0, half_width: 10.0 };
        let v = predicted_noise_variance(&brownian(), &phi, 0.0, 1.0, 100).unwrap();
        assert!((v - 0.02).abs() < 1e-9, "{v}");
    }

    #[test]
    fn replicas_use_disjoint_streams() {
        let sys = ParticleSystem::new(brownian(), 10, SimConfig::new(1.0, 0.5, 10, 3));
        assert_eq!(sys.replica(2).cfg.stream_offset, 20);
        assert!(fluctuation_experiment(
            &sys,
            &TestFunction::bump(0.0, 1.0),
            1.0,
            10,
            0.1
        )
        .is_err());
    }
}
