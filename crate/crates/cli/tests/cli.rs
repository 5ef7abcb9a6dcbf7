use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gpe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpe"))
        .args(args)
        .current_dir(dir)
        .env_remove("GPE_THREADS")
        .output()
        .expect("spawn gpe")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Data rows (after comments and the header) split into fields.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().expect("header").split(',').map(str::to_string).collect();
    let data = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, data)
}

fn field(header: &[String], row: &[String], name: &str) -> String {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    row[i].clone()
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(&[], dir.path());
    assert_eq!(code(&o), 2);
    let text = String::from_utf8_lossy(&o.stderr).to_string() + &String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn usage_and_domain_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&gpe(&["ground", "--q", "5", "--bogus"], dir.path())), 2);
    assert_eq!(code(&gpe(&["ground"], dir.path())), 2);
    fs::write(dir.path().join("bad.cfg"), "q = 5\nnot_a_key = 1\n").unwrap();
    let o = gpe(&["ground", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not-a-key"));
    assert_eq!(code(&gpe(&["ground", "--config", "missing.cfg"], dir.path())), 2);
    let o = gpe(&["ground", "--q", "-5"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("repulsive"));
    let o = gpe(&["evolve", "--q", "5", "--potential", "0.01*s+k", "--t-final", "0.01"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unbound parameter `k`"));
}

#[test]
fn ground_writes_state_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(
        &["ground", "--q", "5", "--lambda-z", "0", "--geometry", "cylindrical", "--out", "gs.csv"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("gs.summary.csv"));
    assert_eq!(data.len(), 1);
    assert_eq!(field(&h, &data[0], "converged"), "true");
    assert_eq!(field(&h, &data[0], "collapsed"), "false");
    let w_s: f64 = field(&h, &data[0], "W_s").parse().unwrap();
    assert!((w_s - 4.5585).abs() < 0.1 * 4.5585);

    let (h, data) = rows(&dir.path().join("gs.csv"));
    assert_eq!(h, ["rho", "s", "re_u", "im_u"]);
    assert_eq!(data.len(), 96 * 384);
    let text = fs::read_to_string(dir.path().join("gs.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("# units:"));

    // the manifest reloads as a config file and reproduces the run exactly
    let o = gpe(&["ground", "--config", "gs.manifest", "--out", "again.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(dir.path().join("gs.csv")).unwrap(),
        fs::read(dir.path().join("again.csv")).unwrap()
    );
}

#[test]
fn output_is_identical_across_repeats_and_thread_settings() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| vec!["ground", "--q", "8", "--geometry", "spherical", "--out", out];
    assert_eq!(code(&gpe(&args("a.csv"), dir.path())), 0);
    assert_eq!(code(&gpe(&args("b.csv"), dir.path())), 0);
    let mut one = args("c.csv");
    one.extend(["--threads", "1"]);
    assert_eq!(code(&gpe(&one, dir.path())), 0);
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn config_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "# spherical probe\ngeometry = spherical\nq = 20\nn_r = 128\nout = cfg.csv\n",
    )
    .unwrap();
    let o = gpe(&["ground", "--config", "run.cfg", "--q", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("cfg.summary.csv"));
    assert_eq!(field(&h, &data[0], "Q").parse::<f64>().unwrap(), 4.0);
    let manifest = fs::read_to_string(dir.path().join("cfg.manifest")).unwrap();
    assert!(manifest.contains("n-r = 128"));
    assert!(manifest.contains("geometry = spherical"));
}

#[test]
fn evolve_writes_trajectory_snapshots_and_centroid_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(
        &[
            "evolve", "--q", "5", "--geometry", "line", "--initial", "composite", "--potential", "F*s",
            "--param", "F=0.01", "--dt", "0.005", "--t-final", "2", "--observe-every", "20",
            "--snapshots", "1", "--out", "run/traj.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("run/traj.csv"));
    assert_eq!(h[..8], ["tau", "norm", "energy_total", "X_s", "P_s", "W_s", "W_rho", "peak_density"]);
    assert_eq!(data.len(), 21);
    for d in &data {
        let norm: f64 = field(&h, d, "norm").parse().unwrap();
        assert!((norm - 1.0).abs() < 1e-8);
    }
    // uniform force -0.01: X = -0.005 tau^2
    let x: f64 = field(&h, data.last().unwrap(), "X_s").parse().unwrap();
    assert!((x + 0.02).abs() < 1e-4, "{x}");
    assert!(dir.path().join("run/traj.snapshot_t1.csv").exists());
    assert!(dir.path().join("run/traj.final.csv").exists());
    let (h, rep) = rows(&dir.path().join("run/traj.ehrenfest.csv"));
    let acc: f64 = field(&h, &rep[0], "mean_acceleration").parse().unwrap();
    assert!((acc + 0.01).abs() < 1e-4, "{acc}");
}

#[test]
fn collapse_emits_trials_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(&["collapse", "--geometry", "spherical", "--q-min", "8", "--q-max", "20", "--out", "c.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("c.csv"));
    let summary: Vec<&Vec<String>> = data.iter().filter(|r| field(&h, r, "kind") == "summary").collect();
    assert_eq!(summary.len(), 1);
    assert!(data.len() > 3);
    let lo: f64 = field(&h, summary[0], "q_lo").parse().unwrap();
    let hi: f64 = field(&h, summary[0], "q_hi").parse().unwrap();
    assert!(lo < hi && hi - lo <= 0.5);
    assert!(lo > 12.0 && hi < 16.0, "[{lo}, {hi}]");

    let o = gpe(&["collapse", "--geometry", "spherical", "--q-min", "2", "--q-max", "4"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid bracket"));
}

#[test]
fn units_table_matches_lithium_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(&["units", "--q", "10,17", "--n", "1000", "--out", "u.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let (h, data) = rows(&dir.path().join("u.csv"));
    assert_eq!(h, ["N", "Q", "a0_m", "lambda_z"]);
    let n = |i: usize| field(&h, &data[i], "N").parse::<f64>().unwrap();
    assert!(n(1) > 800.0 && n(1) < 1000.0);
    assert!(n(2) > 1350.0 && n(2) < 1650.0);
    let a0: f64 = field(&h, &data[0], "a0_m").parse().unwrap();
    assert!(a0 > 2.8e-6 && a0 < 3.3e-6);

    // stdout when no path is given
    let o = gpe(&["units", "--q", "10"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("N,Q,a0_m,lambda_z"));
}

#[test]
fn analytic_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(&["analytic", "--q", "5", "--lambda-z", "0.4", "--out", "an"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("an/profile.csv"));
    assert_eq!(h, ["s", "soliton", "composite_rho0", "gaussian_rho0"]);
    assert_eq!(data.len(), 401);
    let (h, data) = rows(&dir.path().join("an/variational.csv"));
    let q0: f64 = field(&h, &data[0], "q_c_gaussian").parse().unwrap();
    assert!((q0 - 19.5).abs() < 0.3);
    for f in ["width.csv", "ratio.csv", "variational_minimum.csv", "analytic.manifest"] {
        assert!(dir.path().join("an").join(f).exists(), "{f}");
    }
}

#[test]
fn figure_one_sections() {
    let dir = tempfile::tempdir().unwrap();
    let o = gpe(&["figures", "fig1", "--out", "f"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, data) = rows(&dir.path().join("f/fig1_s_sections.csv"));
    assert_eq!(h.len(), 7);
    assert_eq!(data.len(), 384);
    let (_, data) = rows(&dir.path().join("f/fig1_rho_sections.csv"));
    assert_eq!(data.len(), 96);
    let (h, data) = rows(&dir.path().join("f/fig1_summary.csv"));
    let s2: Vec<f64> = data.iter().map(|r| field(&h, r, "s2").parse().unwrap()).collect();
    assert!(s2[0] < s2[1] && s2[1] < s2[2]);
}
