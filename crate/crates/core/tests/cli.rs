//! End-to-end runs of the `mvsde` binary.

use std::path::Path;
use std::process::Command;

use mvsde::cli::Table;

fn run(cmd: &str, config: &str, dir: &Path, threads: Option<&str>) -> i32 {
    std::fs::create_dir_all(dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let mut c = Command::new(env!("CARGO_BIN_EXE_mvsde"));
    c.args([cmd, "--config"]).arg(&cfg).arg("--out").arg(dir.join("out"));
    if let Some(n) = threads {
        c.env("MVSDE_THREADS", n);
    }
    let out = c.output().unwrap();
    out.status.code().unwrap()
}

const FIG2: &str = "pde = pme\nm = 3\nbeta = 0\nT = 0.5\ndt = 1e-4\nn_paths = 30\nrecord_every = 100\n";

#[test]
fn simulate_writes_figure_table() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run("simulate", FIG2, tmp.path(), None), 0);
    let t = Table::read(&tmp.path().join("out/paths.tsv")).unwrap();
    assert_eq!(t.header.len(), 32);
    assert_eq!(t.header[..2], ["time".to_string(), "support_radius".to_string()]);
    assert!(t.meta.iter().any(|(k, v)| k == "seed" && v == "1"));
    assert_eq!(t.rows.len(), 51);
    // Pure drift: |x| grows along each path and stays inside the support.
    for j in 2..32 {
        for w in t.rows.windows(2).skip(1) {
            assert!(w[1][j].abs() >= w[0][j].abs());
            assert!(w[1][j].abs() <= w[1][1] * 1.02);
        }
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["n_paths"], 30);
    assert_eq!(meta["singular_at_t0"], true);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "pde = plaplace\np = 4\nbeta = 1.5\nT = 0.5\ndt = 1e-3\nn_paths = 64\nrecord_every = 10\n";
    let read = |d: &str| std::fs::read(tmp.path().join(d).join("out/paths.tsv")).unwrap();
    assert_eq!(run("simulate", cfg, &tmp.path().join("a"), Some("1")), 0);
    assert_eq!(run("simulate", cfg, &tmp.path().join("b"), Some("1")), 0);
    assert_eq!(run("simulate", cfg, &tmp.path().join("c"), Some("4")), 0);
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
    let t = Table::read(&tmp.path().join("a/out/paths.tsv")).unwrap();
    assert_eq!(Table::parse(&t.render()).unwrap(), t);
}

#[test]
fn config_errors_exit_2_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run("simulate", "pde = pme\nm = 1\n", tmp.path(), None), 2);
    assert!(!tmp.path().join("out/paths.tsv").exists());
    assert_eq!(run("simulate", "pde = pme\nm = 0.5\n", tmp.path(), None), 2);
    assert_eq!(run("verify", "pde = heat\nbetta = 1\n", tmp.path(), None), 2);
    assert_eq!(run("simulate", "pde = heat\ninterpretation = pc\npc_p = 3\npc_c = 1\n", tmp.path(), None), 2);
    assert_eq!(run("simulate", FIG2, tmp.path(), Some("zero")), 2);
}

#[test]
fn verify_passes_then_fails_with_coarse_dt() {
    let tmp = tempfile::tempdir().unwrap();
    let good = "pde = heat\nbeta = 1.5\nT = 1\ndt = 1e-3\nn_paths = 1000\nrecord_every = 500\n";
    assert_eq!(run("verify", good, &tmp.path().join("good"), None), 0);
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("good/out/report.json")).unwrap()).unwrap();
    assert!(reports.as_array().unwrap().iter().all(|r| r["pass"] == true));
    assert!(tmp.path().join("good/out/summary.txt").exists());

    let coarse = "pde = pme\nm = 3\nbeta = 1\nT = 1\ndt = 1e-1\nn_paths = 1000\n";
    assert_eq!(run("verify", coarse, &tmp.path().join("bad"), None), 4);
}

#[test]
fn sweep_table_has_qv_near_beta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "pde = heat\nbetas = 0,0.5,1.5\nT = 1\ndt = 1e-3\nn_paths = 600\nrecord_every = 1000\n";
    assert_eq!(run("sweep", cfg, tmp.path(), None), 0);
    let t = Table::read(&tmp.path().join("out/sweep.tsv")).unwrap();
    assert_eq!(t.column("ks_pass").unwrap(), vec![1.0; 3]);
    let qv = t.column("qv_mean").unwrap();
    for (b, q) in [0.0, 0.5, 1.5].iter().zip(&qv) {
        assert!((q - b).abs() <= 0.05 * b + 0.01, "beta {b}: qv {q}");
    }
}

#[test]
fn particles_report_and_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = "pde = heat\nbeta = 1\nT = 1\ndt = 0.05\nparticles = 200\nreplicas = 400\nphi = linear\nphi_width = 8\nvariance_tol = 0.25\n";
    assert_eq!(run("particles", cfg, tmp.path(), None), 0);
    let t = Table::read(&tmp.path().join("out/particles.tsv")).unwrap();
    assert_eq!(t.rows.len(), 400);
    let reports: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    // a = 1/2 and phi' = 1 on the bulk: target T/N.
    let target = reports[0]["target"].as_f64().unwrap();
    assert!((target - 1.0 / 200.0).abs() < 1e-6, "{target}");
}
