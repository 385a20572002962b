//! End-to-end runs of the binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collapse_radiance::csl::CslParams;
use collapse_radiance::dp::DpParams;
use collapse_radiance::spectra::compute_spectrum;
use collapse_radiance::{builtin_atom, EnergyGrid, ModelParams, PairGeometry, RateModel};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-radiance"))
        .args(args)
        .env_remove("COLLAPSE_RADIANCE_DATA")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Data rows (preamble and header skipped) split into fields.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn preamble(text: &str, key: &str) -> Option<String> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim().to_string())
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn column(text: &str, i: usize) -> Vec<f64> {
    rows(text).iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn ge_csl_spectrum_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ge.csv");
    run_ok(&[
        "spectrum",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--rc",
        "1.15e-8",
        "--emin",
        "1",
        "--emax",
        "1000",
        "--points",
        "512",
        "--out",
        p(&out),
    ]);
    let text = read(&out);
    assert_eq!(rows(&text).len(), 512);
    let params: ModelParams = CslParams::markovian(1.0, 1.15e-8).unwrap().into();
    let lib = compute_spectrum(
        RateModel::CslGeneral,
        &builtin_atom("Ge").unwrap(),
        &params,
        &PairGeometry::default(),
        &EnergyGrid::log(1.0, 1000.0, 512).unwrap(),
    )
    .unwrap();
    assert_eq!(column(&text, 1), lib.values);
    assert!(rows(&text).iter().all(|r| r[2] == "csl_general:markovian" && r[3] == "Ge"));
}

#[test]
fn xe_dp_spectrum_matches_library() {
    let out = run_ok(&[
        "spectrum",
        "--atom",
        "Xe",
        "--model",
        "dp-general",
        "--r0",
        "0.54e-10",
        "--emin",
        "1",
        "--emax",
        "100",
        "--points",
        "20",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let params: ModelParams = DpParams::markovian(0.54e-10).unwrap().into();
    let lib = compute_spectrum(
        RateModel::DpGeneral,
        &builtin_atom("Xe").unwrap(),
        &params,
        &PairGeometry::default(),
        &EnergyGrid::log(1.0, 100.0, 20).unwrap(),
    )
    .unwrap();
    assert_eq!(column(&text, 1), lib.values);
}

#[test]
fn exit_codes() {
    let missing_rc = run(&["spectrum", "--atom", "Ge", "--model", "csl-general"]);
    assert_eq!(missing_rc.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing_rc.stderr).contains("--rc"));
    assert_eq!(run(&["spectrum", "--atom", "Ge", "--model", "nope", "--rc", "1e-8"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--atom", "Ge", "--model", "csl-simple", "--rc", "1e-8", "--seed", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["spectrum", "--atom", "Ge", "--model", "csl-simple", "--rc", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["spectrum", "--atom", "Unobtainium", "--model", "dp-simple", "--r0", "1e-10"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["spectrum", "--atom", "Ge", "--model", "dp-simple", "--r0", "1e-10", "--out", "/nonexistent/dir/x.csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sub_kev_points_warn() {
    let out = run_ok(&[
        "spectrum",
        "--atom",
        "Ge",
        "--model",
        "csl-simple",
        "--rc",
        "1e-8",
        "--emin",
        "0.1",
        "--emax",
        "10",
        "--points",
        "5",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(rows(&text)[0][4].contains("sub_kev"));
    let clean = run_ok(&["spectrum", "--atom", "Ge", "--model", "csl-simple", "--rc", "1e-8", "--points", "5"]);
    assert!(clean.stderr.is_empty());
}

/// Re-running with an output as `--config` reproduces it byte for byte.
fn assert_round_trip(dir: &Path, name: &str, args: &[&str]) {
    let first = dir.join(name);
    let second = dir.join(format!("again-{name}"));
    let mut a = args.to_vec();
    a.extend(["--out", p(&first)]);
    run_ok(&a);
    run_ok(&[args[0], "--config", p(&first), "--out", p(&second)]);
    assert_eq!(read(&first), read(&second), "{name}");
}

#[test]
fn outputs_round_trip_through_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_round_trip(
        d,
        "s.csv",
        &["spectrum", "--atom", "Ge", "--model", "csl-general", "--rc", "1.15e-8", "--ecut", "40", "--points", "50"],
    );
    assert_round_trip(
        d,
        "s.json",
        &[
            "spectrum",
            "--atom",
            "Xe",
            "--model",
            "dp-general",
            "--r0",
            "0.54e-10",
            "--points",
            "50",
            "--format",
            "json",
        ],
    );
    assert_round_trip(
        d,
        "c.csv",
        &["compare", "--atom", "Ge", "--model", "dp-general", "--r0", "0.54e-10", "--points", "40"],
    );
    assert_round_trip(
        d,
        "b.json",
        &["band", "--atom", "Ge", "--model", "csl-general", "--rc", "1.15e-8", "--points", "30", "--format", "json"],
    );
    assert_round_trip(
        d,
        "z.csv",
        &["zsurvey", "--model", "csl-general", "--rc", "1.15e-8", "--energy", "10", "--atoms", "Xe,Ge"],
    );
    assert_round_trip(
        d,
        "synth.json",
        &[
            "synth",
            "--atom",
            "Ge",
            "--model",
            "csl-general",
            "--rc",
            "1.15e-8",
            "--exposure",
            "1e22",
            "--seed",
            "7",
            "--format",
            "json",
        ],
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "# Fig. 1 setup\natom = \"Ge\"\nmodel = \"csl-general\"\nrc = 1e-7\npoints = 16\n").unwrap();
    let out = run_ok(&["spectrum", "--config", p(&cfg), "--rc", "1.15e-8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let config: serde_json::Value = serde_json::from_str(&preamble(&text, "config").unwrap()).unwrap();
    assert_eq!(config["rc"], 1.15e-8);
    assert_eq!(config["points"], 16);
    assert_eq!(rows(&text).len(), 16);

    std::fs::write(&cfg, "atom = \"Ge\"\nmodl = \"csl-general\"\n").unwrap();
    assert_eq!(run(&["spectrum", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn compare_outputs() {
    let out = run_ok(&[
        "compare",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--rc",
        "1.15e-8",
        "--emin",
        "1",
        "--emax",
        "1e4",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let e_star: f64 = preamble(&text, "convergence_energy_keV").unwrap().parse().unwrap();
    assert!((100.0..=1000.0).contains(&e_star));
    assert_eq!(preamble(&text, "rel_tol").unwrap().parse::<f64>().unwrap(), 0.05);

    let same = run_ok(&[
        "compare",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--reference",
        "csl-general",
        "--rc",
        "1.15e-8",
        "--points",
        "25",
    ]);
    assert!(column(&String::from_utf8(same.stdout).unwrap(), 3).iter().all(|r| *r == 1.0));

    let xe = run_ok(&[
        "compare",
        "--atom",
        "Xe",
        "--model",
        "dp-general",
        "--r0",
        "0.54e-10",
        "--emin",
        "10",
        "--emax",
        "1000",
        "--points",
        "3",
    ]);
    let text = String::from_utf8(xe.stdout).unwrap();
    assert_eq!(rows(&text).len(), 3);
    assert!((column(&text, 3)[0] - 1.0).abs() > 1e-3);

    // CSL general against DP simple needs both correlation lengths
    assert_eq!(
        run(&["compare", "--atom", "Ge", "--model", "csl-general", "--reference", "dp-simple", "--rc", "1e-8"])
            .status
            .code(),
        Some(2)
    );
    run_ok(&[
        "compare",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--reference",
        "dp-simple",
        "--rc",
        "1e-8",
        "--r0",
        "1e-10",
        "--points",
        "8",
    ]);
}

#[test]
fn band_envelope_ordering() {
    let out = run_ok(&[
        "band",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--rc",
        "1.15e-8",
        "--alpha-min",
        "1.0",
        "--alpha-max",
        "1.5",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let (lo, mid, hi) = (column(&text, 1), column(&text, 2), column(&text, 3));
    assert_eq!(lo.len(), 512);
    for i in 0..lo.len() {
        assert!(lo[i] <= mid[i] && mid[i] <= hi[i]);
    }
    assert_eq!(
        run(&["band", "--atom", "Ge", "--model", "csl-general", "--rc", "1e-8", "--alpha", "1.2"]).status.code(),
        Some(2)
    );
}

#[test]
fn zsurvey_simple_ratio() {
    let out = run_ok(&["zsurvey", "--atoms", "Ge,Xe", "--energy", "500", "--model", "csl-simple", "--rc", "1.15e-8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let r = rows(&text);
    assert_eq!(r[0][0], "Xe");
    let rate = column(&text, 2);
    assert!(((rate[0] / rate[1]) / (2970.0 / 1056.0) - 1.0).abs() < 1e-12);
    assert_eq!(run(&["zsurvey", "--model", "csl-simple", "--rc", "1e-8"]).status.code(), Some(2));
}

#[test]
fn synth_then_fit_converges() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("ge.csv");
    run_ok(&[
        "synth",
        "--atom",
        "Ge",
        "--model",
        "csl-general",
        "--rc",
        "1.15e-8",
        "--exposure",
        "1.2e29",
        "--seed",
        "3",
        "--out",
        p(&data),
    ]);
    assert!(dir.path().join("ge.json").is_file());
    let fit = dir.path().join("fit.json");
    run_ok(&["fit", "--data", p(&data), "--prior", "3.45e-8", "--out", p(&fit)]);
    let doc: serde_json::Value = serde_json::from_str(&read(&fit)).unwrap();
    assert_eq!(doc["kind"], "fit");
    assert_eq!(doc["result"]["converged"], true);
    let rc = doc["result"]["corr_length"].as_f64().unwrap();
    assert!((rc / 1.15e-8 - 1.0).abs() < 0.2);
    assert_eq!(doc["config"]["model"], "csl_general");

    let again = dir.path().join("fit2.json");
    run_ok(&["fit", "--config", p(&fit), "--out", p(&again)]);
    assert_eq!(read(&fit), read(&again));

    let csv = run_ok(&["fit", "--data", p(&data), "--prior", "3.45e-8", "--format", "csv"]);
    assert_eq!(preamble(&String::from_utf8(csv.stdout).unwrap(), "converged").as_deref(), Some("true"));

    assert_eq!(run(&["fit", "--data", p(&data)]).status.code(), Some(2));
    assert_eq!(
        run(&["synth", "--atom", "Ge", "--model", "csl-general", "--rc", "1e-8", "--exposure", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn synth_is_reproducible() {
    let args = [
        "synth",
        "--atom",
        "Ge",
        "--model",
        "dp-general",
        "--r0",
        "0.54e-10",
        "--exposure",
        "1e30",
        "--format",
        "json",
        "--seed",
        "11",
    ];
    assert_eq!(run_ok(&args).stdout, run_ok(&args).stdout);
}

#[test]
fn atom_from_file_and_data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(&h, r#"{"symbol":"H","Z":1,"radii_provenance":"sample","shells":[{"label":"1s","occupancy":1,"mean_radius_m":5.29e-11}]}"#).unwrap();
    let out = run_ok(&["spectrum", "--atom", p(&h), "--model", "dp-general", "--r0", "1e-10", "--points", "3"]);
    assert!(rows(&String::from_utf8(out.stdout).unwrap()).iter().all(|r| r[3] == "H"));

    let data: PathBuf = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    std::fs::copy(&h, data.join("h.json")).unwrap();
    let with_env = |atom: &str| {
        Command::new(env!("CARGO_BIN_EXE_collapse-radiance"))
            .args(["spectrum", "--atom", atom, "--model", "dp-simple", "--r0", "1e-10", "--points", "3"])
            .env("COLLAPSE_RADIANCE_DATA", &data)
            .output()
            .unwrap()
    };
    assert!(with_env("H").status.success());
    assert_eq!(with_env("Ge").status.code(), Some(1));

    std::fs::write(&h, r#"{"symbol":"H","Z":2,"shells":[{"label":"1s","occupancy":1,"mean_radius_m":5.29e-11}]}"#)
        .unwrap();
    assert_eq!(run(&["spectrum", "--atom", p(&h), "--model", "dp-simple", "--r0", "1e-10"]).status.code(), Some(1));
}
