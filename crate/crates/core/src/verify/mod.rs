//! Statistical and analytic checks producing [`VerificationReport`]s.

mod residual;
mod testfn;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analytic::SelfSimilarSolution;
use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::sampler::{self, RngStream};
use crate::sim::{self, PathEnsemble, SimConfig};

pub use residual::{
    fpe_weak_residual, generator_pairing, pairing, predicted_qv, time_integrated_pairing,
};
pub use testfn::TestFunction;

/// Smallest sample accepted by the asymptotic KS p-value.
pub const KS_MIN_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

impl VerificationReport {
    /// Pass iff |observed - target| <= tolerance.
    pub fn absolute(name: impl Into<String>, observed: f64, target: f64, tolerance: f64) -> Self {
        let pass = (observed - target).abs() <= tolerance;
        Self {
            name: name.into(),
            observed,
            target,
            tolerance,
            pass,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// One summary line.
    pub fn line(&self) -> String {
        format!(
            "[{}] {}: observed {:.6e}, target {:.6e}, tolerance {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.target,
            self.tolerance
        )
    }
}

/// Asymptotic Kolmogorov tail P(sqrt(n) D > x) with Stephens' small-sample
/// correction.
pub fn kolmogorov_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form converges fast for small lambda.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let j = (2 * k - 1) as f64;
            s += (-j * j * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Statistic at which the p-value equals `significance`.
pub fn ks_critical_value(n: usize, significance: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_pvalue(mid, n) > significance {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided sup distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: FnMut(f64) -> Result<f64>>(samples: &[f64], mut cdf: F) -> Result<f64> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x)?;
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// KS test of `samples` against u(t, .); passes iff p > `significance`.
pub fn ks_test(
    samples: &[f64],
    sol: &SelfSimilarSolution,
    t: f64,
    significance: f64,
) -> Result<VerificationReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples("KS test on an empty sample".into()));
    }
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientSamples(format!(
            "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let d = ks_statistic(samples, |x| sol.cdf(t, x))?;
    let n = samples.len();
    let p = kolmogorov_pvalue(d, n);
    let crit = ks_critical_value(n, significance);
    let mut r = VerificationReport::absolute(format!("ks {} t={t}", sol.family().name()), d, 0.0, crit);
    r.pass = p > significance;
    Ok(r.with("p_value", p)
        .with("n", n)
        .with("significance", significance)
        .with("rule", "p_value > significance"))
}

/// Sum of squared increments along one path.
pub fn realized_qv(path: &[f64], times: &[f64]) -> Result<f64> {
    if path.len() < 2 || path.len() != times.len() {
        return Err(Error::InsufficientSamples(
            "quadratic variation needs at least two matching grid points".into(),
        ));
    }
    Ok(path.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum())
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Mean realized QV of an ensemble against `target` within relative tolerance.
pub fn qv_check(ens: &PathEnsemble, target: f64, rel_tol: f64) -> VerificationReport {
    let (mean, se) = mean_and_se(&ens.qv);
    VerificationReport::absolute("quadratic variation", mean, target, rel_tol * target.abs())
        .with("paths", ens.n_paths())
        .with("standard_error", se)
        .with("dt", ens.config.dt)
}

/// Empirical Cov(X_s, X_t) about z against the heat-beta formula, within 3
/// Monte-Carlo standard errors.
pub fn covariance_check(
    ens: &PathEnsemble,
    beta: f64,
    pairs: &[(f64, f64)],
) -> Result<Vec<VerificationReport>> {
    let z = ens.config.z;
    pairs
        .iter()
        .map(|&(s, t)| {
            let i = ens
                .time_index(s)
                .ok_or_else(|| Error::Domain(format!("time {s} not on the recorded grid")))?;
            let j = ens
                .time_index(t)
                .ok_or_else(|| Error::Domain(format!("time {t} not on the recorded grid")))?;
            let prod: Vec<f64> = ens
                .positions
                .iter()
                .map(|p| (p[i] - z) * (p[j] - z))
                .collect();
            let (mean, se) = mean_and_se(&prod);
            let target = sim::heat_beta_covariance(beta, s, t);
            Ok(VerificationReport::absolute(
                format!("covariance beta={beta} (s,t)=({s},{t})"),
                mean,
                target,
                3.0 * se,
            )
            .with("standard_error", se)
            .with("paths", ens.n_paths()))
        })
        .collect()
}

/// Empirical raw moments against quadrature moments, within 3 standard errors.
pub fn moment_check(
    samples: &[f64],
    sol: &SelfSimilarSolution,
    t: f64,
    orders: &[u32],
) -> Result<Vec<VerificationReport>> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples("moments need two samples".into()));
    }
    orders
        .iter()
        .map(|&k| {
            let pw: Vec<f64> = samples.iter().map(|x| x.powi(k as i32)).collect();
            let (mean, se) = mean_and_se(&pw);
            let target = sol.moment(t, k)?;
            Ok(VerificationReport::absolute(format!("moment order {k} t={t}"), mean, target, 3.0 * se)
                .with("standard_error", se)
                .with("n", samples.len()))
        })
        .collect()
}

/// Fraction of recorded (path, time > 0) points with |X - z| > factor R(t).
pub fn support_containment(
    ens: &PathEnsemble,
    sol: &SelfSimilarSolution,
    factor: f64,
    max_fraction: f64,
) -> Result<VerificationReport> {
    let z = sol.z0();
    let mut outside = 0usize;
    let mut total = 0usize;
    for (j, &t) in ens.times.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let r = factor * sol.support_radius(t)?;
        for p in &ens.positions {
            total += 1;
            if (p[j] - z).abs() > r {
                outside += 1;
            }
        }
    }
    let frac = outside as f64 / total.max(1) as f64;
    let mut rep = VerificationReport::absolute("support containment", frac, 0.0, max_fraction);
    rep.pass = frac <= max_fraction;
    Ok(rep.with("outside", outside).with("points", total).with("factor", factor))
}

/// Start from u(s, .), run the time-shifted field for elapsed time `t`, and
/// KS-compare against u(s + t, .). `cfg.t_end` is overridden by `t`.
pub fn flow_property_check(
    field: &CoefficientField,
    s: f64,
    t: f64,
    cfg: &SimConfig,
    significance: f64,
) -> Result<VerificationReport> {
    let sol = field.solution();
    let mut c = cfg.clone();
    c.t_end = t;
    // Initial draws use a stream block disjoint from the path streams.
    let init_stream = RngStream::new(cfg.seed, u64::MAX - cfg.stream_offset);
    let starts = sampler::sample_marginal(sol, s, c.n_paths, init_stream)?;
    let ens = sim::euler_maruyama_from(field, s, &starts, &c)?;
    let mut rep = ks_test(&ens.final_positions(), sol, s + t, significance)?;
    rep.name = format!("flow {} s={s} t={t}", field.label());
    Ok(rep.with("dt", c.dt))
}
