//! Batch front end: `simulate`, `verify`, `sweep` and `particles` driven by a
//! flat config file, writing tables and reports into an output directory.
//!
//! Exit codes: 0 success, 1 internal or I/O failure, 2 config error,
//! 3 diverged paths, 4 verification failure.

pub mod config;
pub mod table;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::analytic::SelfSimilarSolution;
use crate::coeffs::{CoefficientField, Interpretation};
use crate::error::{DivergedPath, Error, Result};
use crate::particles::{fluctuation_experiment, ParticleSystem};
use crate::sim::{self, PathEnsemble};
use crate::verify::{self, TestFunction, VerificationReport};

pub use config::RunConfig;
pub use table::Table;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "MVSDE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Verify,
    Sweep,
    Particles,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Particles => "particles",
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::InvalidParameter(_)
        | Error::Incompatible { .. }
        | Error::Admissibility(_)
        | Error::InsufficientSamples(_) => EXIT_CONFIG,
        Error::Diverged(_) => EXIT_DIVERGED,
        _ => EXIT_INTERNAL,
    }
}

/// Installs the global rayon pool if `MVSDE_THREADS` is set. Results do not
/// depend on the thread count.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs one command and maps the outcome to an exit code, printing errors
/// to stderr.
pub fn run(cmd: Command, config: &Path, out: Option<&Path>) -> i32 {
    let cfg = match RunConfig::from_file(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mvsde {}: {e}", cmd.name());
            return exit_code(&e);
        }
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    match execute(cmd, &cfg, &dir) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("mvsde {}: {e}", cmd.name());
            if let Error::Diverged(paths) = &e {
                if let Err(w) = write_diverged(&dir, paths) {
                    eprintln!("mvsde {}: could not record diverged paths: {w}", cmd.name());
                }
            }
            exit_code(&e)
        }
    }
}

/// Runs `cmd` into `dir`; `Ok(false)` means some check failed.
pub fn execute(cmd: Command, cfg: &RunConfig, dir: &Path) -> Result<bool> {
    std::fs::create_dir_all(dir)?;
    match cmd {
        Command::Simulate => simulate(cfg, dir).map(|_| true),
        Command::Verify => verify_battery(cfg, dir),
        Command::Sweep => sweep(cfg, dir),
        Command::Particles => particles(cfg, dir),
    }
}

fn write_diverged(dir: &Path, paths: &[DivergedPath]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut t = Table::new(["path", "step", "t", "x", "a", "b"].map(String::from).to_vec());
    for p in paths {
        t.push(vec![p.path as f64, p.step as f64, p.t, p.x, p.a, p.b]);
    }
    t.write(&dir.join("diverged.tsv"))
}

fn with_config(mut t: Table, cfg: &RunConfig, cmd: Command) -> Table {
    t.meta.push(("command".into(), cmd.name().into()));
    t.meta.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
    for (k, v) in cfg.to_pairs() {
        t.meta.push((k, v));
    }
    t
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    field: String,
    singular_at_t0: bool,
    singular_at_boundary: bool,
    n_paths: usize,
    recorded_times: usize,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn write_reports(dir: &Path, reports: &[VerificationReport]) -> Result<bool> {
    write_json(&dir.join("report.json"), &reports)?;
    let mut summary = String::new();
    for r in reports {
        summary.push_str(&r.line());
        summary.push('\n');
    }
    let pass = reports.iter().all(|r| r.pass);
    summary.push_str(&format!(
        "{} of {} checks passed\n",
        reports.iter().filter(|r| r.pass).count(),
        reports.len()
    ));
    std::fs::write(dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(pass)
}

/// Euler-Maruyama by default; `method = exact` uses the closed-form sampler
/// where one exists (heat-beta, and pure drift beta = 0).
fn generate(
    cfg: &RunConfig,
    sol: &SelfSimilarSolution,
    field: &CoefficientField,
    sc: &sim::SimConfig,
) -> Result<PathEnsemble> {
    match cfg.method {
        config::Method::Euler => sim::euler_maruyama(field, sc),
        config::Method::Exact => match field.interpretation() {
            Some(Interpretation::HeatBeta { beta }) => sim::exact_heat_beta(beta, sc),
            Some(
                Interpretation::PmeBeta { beta: 0.0 } | Interpretation::PLapBeta { beta: 0.0 },
            ) => sim::exact_pure_drift(sol, sc),
            _ => Err(Error::Config(format!(
                "method = exact has no closed-form sampler for {}",
                field.label()
            ))),
        },
    }
}

fn paths_table(cfg: &RunConfig, sol: &SelfSimilarSolution, ens: &PathEnsemble) -> Result<Table> {
    let compact = sol.family().is_compact();
    let mut header = vec!["time".to_string()];
    if compact {
        header.push("support_radius".into());
    }
    header.extend((0..ens.n_paths()).map(|i| format!("path_{i}")));
    let mut t = with_config(Table::new(header), cfg, Command::Simulate);
    for (j, &time) in ens.times.iter().enumerate() {
        let mut row = vec![time];
        if compact {
            row.push(if time > 0.0 { sol.support_radius(time)? } else { 0.0 });
        }
        row.extend(ens.positions.iter().map(|p| p[j]));
        t.push(row);
    }
    Ok(t)
}

/// Writes `paths.tsv`, `qv.tsv` and `meta.json`.
pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<PathEnsemble> {
    let sol = cfg.solution()?;
    let field = cfg.field(sol.clone(), cfg.beta)?;
    let ens = generate(cfg, &sol, &field, &cfg.sim_config())?;
    paths_table(cfg, &sol, &ens)?.write(&dir.join("paths.tsv"))?;
    let mut qv = with_config(Table::new(vec!["path".into(), "qv".into()]), cfg, Command::Simulate);
    for (i, q) in ens.qv.iter().enumerate() {
        qv.push(vec![i as f64, *q]);
    }
    qv.write(&dir.join("qv.tsv"))?;
    let s = field.singularity();
    write_json(
        &dir.join("meta.json"),
        &Meta {
            command: "simulate",
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            field: field.label().to_string(),
            singular_at_t0: s.singular_at_t0,
            singular_at_boundary: s.singular_at_boundary,
            n_paths: ens.n_paths(),
            recorded_times: ens.times.len(),
        },
    )?;
    Ok(ens)
}

fn scaled_bumps(sol: &SelfSimilarSolution, t: f64) -> Vec<TestFunction> {
    let r = sol.reach(t).min(if sol.family().is_compact() { f64::INFINITY } else { 2.0 * t.sqrt() });
    let z = sol.z0();
    vec![
        TestFunction::bump(z, 0.3 * r),
        TestFunction::bump(z + 0.4 * r, 0.2 * r),
        TestFunction::bump(z - 0.5 * r, 0.25 * r),
    ]
}

fn battery(
    cfg: &RunConfig,
    sol: &Arc<SelfSimilarSolution>,
    field: &CoefficientField,
) -> Result<Vec<VerificationReport>> {
    let sc = cfg.sim_config();
    let t = cfg.t_end;
    let ens = generate(cfg, sol, field, &sc)?;
    let finals = ens.final_positions();
    let mut out = vec![verify::ks_test(&finals, sol, t, cfg.significance)?];

    let target = verify::predicted_qv(field, 0.0, t)?;
    if target > 0.0 {
        out.push(verify::qv_check(&ens, target, cfg.qv_tol));
    }
    out.extend(verify::moment_check(&finals, sol, t, &[1, 2])?);
    if let Some(Interpretation::HeatBeta { beta }) = field.interpretation() {
        let pairs: Vec<(f64, f64)> = [(0.5 * t, t), (t, t)]
            .into_iter()
            .filter(|&(s, _)| ens.time_index(s).is_some())
            .collect();
        out.extend(verify::covariance_check(&ens, beta, &pairs)?);
    }
    for phi in scaled_bumps(sol, t) {
        let r = verify::fpe_weak_residual(sol, field, &phi, 0.25 * t, t, 1e-6)?;
        let mut rep = VerificationReport::absolute("weak residual", r, 0.0, 1e-3);
        rep.pass = r < 1e-3;
        out.push(rep.with("phi", format!("{phi:?}")).with("s", 0.25 * t).with("t", t));
    }
    if sol.family().is_compact() {
        out.push(verify::support_containment(&ens, sol, 1.02, 0.01)?);
    }
    if let Some(s) = cfg.flow_s {
        out.push(verify::flow_property_check(field, s, t, &sc, cfg.significance)?);
    }
    Ok(out)
}

/// Runs the verification battery; writes `report.json` and `summary.txt`.
pub fn verify_battery(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let sol = cfg.solution()?;
    let field = cfg.field(sol.clone(), cfg.beta)?;
    let reports = battery(cfg, &sol, &field)?;
    write_reports(dir, &reports)
}

/// One simulation and KS/QV evaluation per beta in `betas`; writes `sweep.tsv`.
/// beta = 0 uses the exact pure-drift sampler.
pub fn sweep(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    if cfg.interpretation != config::InterpretationKind::Beta {
        return Err(Error::Config("sweep needs interpretation = beta".into()));
    }
    let sol = cfg.solution()?;
    let header = ["beta", "ks_statistic", "ks_p_value", "ks_pass", "qv_mean", "qv_standard_error", "qv_predicted"];
    let mut table = with_config(Table::new(header.map(String::from).to_vec()), cfg, Command::Sweep);
    let mut reports = Vec::new();
    for (i, &beta) in cfg.betas.iter().enumerate() {
        let field = cfg.field(sol.clone(), beta)?;
        let mut sc = cfg.sim_config();
        sc.stream_offset = (i * cfg.n_paths) as u64;
        let ens = if beta == 0.0 {
            sim::exact_pure_drift(&sol, &sc)?
        } else {
            sim::euler_maruyama(&field, &sc)?
        };
        let mut ks = verify::ks_test(&ens.final_positions(), &sol, cfg.t_end, cfg.significance)?;
        ks.name = format!("ks {} T={}", field.label(), cfg.t_end);
        let p: f64 = ks.metadata["p_value"].parse().unwrap_or(f64::NAN);
        let predicted = verify::predicted_qv(&field, 0.0, cfg.t_end)?;
        let n = ens.qv.len() as f64;
        let mean = ens.qv.iter().sum::<f64>() / n;
        let var = ens.qv.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        table.push(vec![
            beta,
            ks.observed,
            p,
            if ks.pass { 1.0 } else { 0.0 },
            mean,
            (var / n).sqrt(),
            predicted,
        ]);
        reports.push(ks.with("beta", beta));
    }
    table.write(&dir.join("sweep.tsv"))?;
    write_reports(dir, &reports)
}

/// Replica fluctuation experiment; writes `particles.tsv` with one
/// martingale value per replica.
pub fn particles(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let sol = cfg.solution()?;
    let field = cfg.field(sol, cfg.beta)?;
    let sys = ParticleSystem::new(field, cfg.particles, cfg.sim_config());
    let phi = cfg.test_function();
    let res = fluctuation_experiment(&sys, &phi, cfg.t_end, cfg.replicas, cfg.variance_tol)?;
    let mut t = with_config(
        Table::new(vec!["replica".into(), "martingale".into()]),
        cfg,
        Command::Particles,
    );
    for (r, m) in res.martingales.iter().enumerate() {
        t.push(vec![r as f64, *m]);
    }
    t.write(&dir.join("particles.tsv"))?;
    write_reports(dir, std::slice::from_ref(&res.report))
}
