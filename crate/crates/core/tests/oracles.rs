//! Reference values and statistical oracles for the public API.

use std::sync::Arc;

use approx::assert_relative_eq;
use mvsde::analytic::{build_solution, PdeFamily, SelfSimilarSolution};
use mvsde::coeffs::{apply_f_transform, custom_field, make_field, plaplace_h, Interpretation, Singularity};
use mvsde::particles::{run_particles, ParticleSystem};
use mvsde::sampler::{gaussian_increments, sample_marginal, RngStream};
use mvsde::sim::{self, euler_maruyama, euler_maruyama_from, exact_pure_drift, SimConfig};
use mvsde::verify::{fpe_weak_residual, ks_test, moment_check, TestFunction};

fn heat() -> Arc<SelfSimilarSolution> {
    Arc::new(build_solution(PdeFamily::heat(1).unwrap(), &[0.0]).unwrap())
}

fn pme(m: f64) -> Arc<SelfSimilarSolution> {
    Arc::new(build_solution(PdeFamily::porous_medium(m, 1).unwrap(), &[0.0]).unwrap())
}

fn plap() -> Arc<SelfSimilarSolution> {
    Arc::new(build_solution(PdeFamily::p_laplace(4.0, 1).unwrap(), &[0.0]).unwrap())
}

#[test]
fn closed_form_point_values() {
    let h = heat();
    assert_relative_eq!(h.density(0.5, &[1.0]).unwrap(), 0.207_553_748_710_297_4, max_relative = 1e-14);
    assert_relative_eq!(h.grad_density(1.0, &[1.0]).unwrap()[0], -0.241_970_724_519_143_37, max_relative = 1e-14);
    assert_relative_eq!(h.inverse_cdf(1.0, 0.975).unwrap(), 1.959_963_984_540_054, max_relative = 1e-12);

    let p = pme(3.0);
    let c = 1.0 / (std::f64::consts::PI * 3f64.sqrt());
    assert_relative_eq!(p.density(1.0, &[0.0]).unwrap(), c.sqrt(), max_relative = 1e-10);
    assert_relative_eq!(p.support_radius(1.0).unwrap(), (12.0 * c).sqrt(), max_relative = 1e-10);
    let f = make_field(Interpretation::PmeBeta { beta: 1.0 }, p.clone()).unwrap();
    assert_relative_eq!(f.eval1(1.0, 0.0).0, c, max_relative = 1e-10);

    let l = plap();
    assert_relative_eq!(l.support_radius(1.0).unwrap(), (l.c() / l.q()).powf(0.75), max_relative = 1e-14);
    assert!((l.support_radius(1.0).unwrap() - 1.9335).abs() < 1e-4);
}

#[test]
fn plaplace_h_at_origin_matches_trapezoid_reference() {
    let l = plap();
    let r1 = l.unit_radius();
    let n = 1_000_000;
    let hstep = r1 / n as f64;
    let mut s = 0.5 * (0.0 + r1 * l.profile(r1));
    for i in 1..n {
        let x = i as f64 * hstep;
        s += x * l.profile(x);
    }
    let reference = l.k_over_d() * l.c().powf(-1.5) * s * hstep;
    let h0 = plaplace_h(&l, 0.0).unwrap();
    assert!((h0 - reference).abs() < 1e-9 * reference, "{h0} vs {reference}");
    assert_eq!(plaplace_h(&l, r1).unwrap(), 0.0);
}

#[test]
fn heat_f_transform_gives_pure_drift() {
    let sol = heat();
    let base = custom_field(
        "a=1/2",
        sol.clone(),
        Arc::new(|_, _| 0.5),
        Arc::new(|_, _, b| b.fill(0.0)),
        Singularity { singular_at_t0: false, singular_at_boundary: false },
    );
    let s1 = sol.clone();
    let s2 = sol.clone();
    let f = apply_f_transform(
        &base,
        Arc::new(move |t, x| -0.5 * s1.density(t, x).unwrap()),
        Arc::new(move |t, x, g| {
            let d = s2.grad_density(t, x).unwrap();
            g[0] = -0.5 * d[0];
        }),
    )
    .unwrap();
    for (t, x) in [(0.3, -1.0), (1.0, 0.5), (2.0, 2.5)] {
        let (a, b) = f.eval1(t, x);
        assert!(a.abs() < 1e-14);
        // -u'/(2u) = x/(2t) for the heat kernel.
        assert_relative_eq!(b, x / (2.0 * t), max_relative = 1e-12);
    }
}

#[test]
fn sampler_oracles() {
    let h = heat();
    let n = 100_000;
    let xs = sample_marginal(&h, 1.0, n, RngStream::new(11, 0)).unwrap();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    // Var of the sample variance of a standard normal is 2/(n-1).
    assert!((var - 1.0).abs() < 3.0 * (2.0 / (n as f64 - 1.0)).sqrt(), "{var}");

    assert!(ks_test(&xs[..10_000], &h, 1.0, 0.01).unwrap().pass);

    let p = pme(3.0);
    let ys = sample_marginal(&p, 0.7, 3000, RngStream::new(11, 1)).unwrap();
    assert!(ks_test(&ys, &p, 0.7, 0.01).unwrap().pass);
    assert!(!ks_test(&ys, &p, 1.4, 0.01).unwrap().pass, "KS should reject the law at 2t");

    let dt = 1e-4;
    let m = 1_000_000;
    let dw = gaussian_increments(m, dt, &mut RngStream::new(11, 2).rng());
    let mu = dw.iter().sum::<f64>() / m as f64;
    assert!(mu.abs() < 3.0 * (dt / m as f64).sqrt());
}

#[test]
fn brownian_euler_marginal() {
    let f = make_field(Interpretation::HeatBeta { beta: 1.0 }, heat()).unwrap();
    let mut cfg = SimConfig::new(1.0, 1e-4, 3000, 5);
    cfg.record_every = 10_000;
    let ens = euler_maruyama(&f, &cfg).unwrap();
    assert!(ks_test(&ens.final_positions(), &heat(), 1.0, 0.01).unwrap().pass);
}

#[test]
fn exact_pure_drift_law_at_every_time() {
    let p = pme(3.0);
    let mut cfg = SimConfig::new(1.0, 0.05, 3000, 7);
    cfg.record_every = 5;
    let ens = exact_pure_drift(&p, &cfg).unwrap();
    for t in [0.25, 0.5, 1.0] {
        let j = ens.time_index(t).unwrap();
        assert!(ks_test(&ens.column(j), &p, t, 0.01).unwrap().pass, "t={t}");
    }
    let moments = moment_check(&ens.final_positions(), &p, 1.0, &[2]).unwrap();
    assert!(moments[0].pass, "{}", moments[0].line());
}

#[test]
fn drift_only_euler_converges_at_first_order() {
    let p = pme(3.0);
    let f = make_field(Interpretation::PmeBeta { beta: 0.0 }, p.clone()).unwrap();
    let (t0, x0) = (0.01, 0.1);
    let exact = |t: f64| x0 * (t / t0).powf(p.k_over_d());
    let err = |dt: f64| {
        let cfg = SimConfig::new(1.0 - t0, dt, 1, 1);
        let ens = euler_maruyama_from(&f, t0, &[x0], &cfg).unwrap();
        ens.times
            .iter()
            .zip(&ens.positions[0])
            .map(|(t, x)| (x - exact(*t)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(0.99e-3) / err(0.495e-3);
    assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
}

#[test]
fn heat_beta_covariance_examples() {
    assert_relative_eq!(sim::heat_beta_covariance(0.5, 1.0, 4.0), 2f64.sqrt(), max_relative = 1e-14);
    assert_relative_eq!(sim::heat_beta_covariance(0.01, 1.0, 4.0), 4f64.powf(0.495), max_relative = 1e-14);
    assert!((sim::heat_beta_covariance(1e-9, 1.0, 4.0) - 2.0).abs() < 1e-8);
}

#[test]
fn weak_residual_and_its_sensitivity() {
    let p = pme(3.0);
    let f = make_field(Interpretation::PmeBeta { beta: 0.7 }, p.clone()).unwrap();
    let phi = TestFunction::bump(0.0, 0.4);
    let r = fpe_weak_residual(&p, &f, &phi, 0.25, 1.0, 1e-6).unwrap();
    assert!(r < 1e-3, "{r}");
    let bad = fpe_weak_residual(&p, &f.with_diffusion_scale(1.1), &phi, 0.25, 1.0, 1e-6).unwrap();
    assert!(bad > 10.0 * 1e-3, "{bad}");
}

#[test]
fn particle_law_of_large_numbers() {
    let h = heat();
    let brownian = custom_field(
        "a=1",
        h,
        Arc::new(|_, _| 1.0),
        Arc::new(|_, _, b| b.fill(0.0)),
        Singularity { singular_at_t0: false, singular_at_boundary: false },
    );
    let n = 2000;
    let tr = run_particles(&ParticleSystem::new(brownian, n, SimConfig::new(1.0, 0.01, n, 9))).unwrap();
    let mean = tr.ensemble.final_positions().iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 3.0 * (2.0 / n as f64).sqrt(), "{mean}");

    let p = pme(3.0);
    let f = make_field(Interpretation::PmeBeta { beta: 1.0 }, p.clone()).unwrap();
    let tr = run_particles(&ParticleSystem::new(f, n, SimConfig::new(1.0, 1e-3, n, 9))).unwrap();
    assert!(ks_test(&tr.ensemble.final_positions(), &p, 1.0, 0.01).unwrap().pass);
}

#[test]
fn theta_family_endpoints() {
    let l = plap();
    let one = make_field(Interpretation::PLapTheta { theta: 1.0 }, l.clone()).unwrap();
    let h = mvsde::coeffs::HProfile::new(&l, 1.0).unwrap();
    let small = make_field(Interpretation::PLapTheta { theta: 1e-3 }, l.clone()).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let r = l.support_radius(t).unwrap();
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let x = s * r;
            let a1 = one.eval1(t, x).0;
            assert!((a1 - mvsde::coeffs::plaplace_a(&l, &h, t, &[x]).unwrap()).abs() < 1e-8 * a1);
            // |grad u|^{p-2} with p = 4.
            let g = l.grad_density(t, &[x]).unwrap()[0].powi(2);
            let a0 = small.eval1(t, x).0;
            assert!((a0 - g).abs() < 0.01 * g, "t={t} x={x}: {a0} vs {g}");
        }
    }
}

#[test]
fn marginal_samples_fit_every_family() {
    for (i, sol) in [heat(), pme(2.0), pme(3.0), plap()].into_iter().enumerate() {
        for (j, t) in [0.1, 1.0].into_iter().enumerate() {
            let xs = sample_marginal(&sol, t, 10_000, RngStream::new(21, (10 * i + j) as u64 * 100_000)).unwrap();
            let r = ks_test(&xs, &sol, t, 0.01).unwrap();
            assert!(r.pass, "{} t={t}: {}", sol.family().name(), r.line());
        }
    }
}
