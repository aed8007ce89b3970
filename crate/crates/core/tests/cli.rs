use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use waveholtz::experiment::svg::read_back;
use waveholtz::experiment::ExperimentConfig;

fn run(out: &Path, args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_waveholtz"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
        .status;
    status.code().expect("exit code")
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn series(svg_path: &Path, name: &str) -> Vec<(f64, f64)> {
    let svg = fs::read_to_string(svg_path).unwrap();
    read_back(&svg)
        .into_iter()
        .find(|(n, _)| n == name)
        .unwrap_or_else(|| panic!("no series {name}"))
        .1
}

fn keys(prefix: &str, v: &toml::Value, out: &mut BTreeSet<String>) {
    if let toml::Value::Table(t) = v {
        for (k, child) in t {
            let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            out.insert(path.clone());
            keys(&path, child, out);
        }
    }
}

const SMALL: &[&str] = &["--set", "omega_over_pi=4", "--set", "diagnostics.spectrum=true"];

#[test]
fn spectrum_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--seed", "11", "spectrum"]);
    assert_eq!(run(dir.path(), &args), 0);

    let (header, rows) = table(&dir.path().join("spectrum.csv"));
    assert_eq!(header, ["j", "re_lambda_over_omega", "im_lambda_over_omega", "beta_abs", "is_lambda_star"]);
    assert_eq!(rows.iter().filter(|r| r[4] == "true").count(), 1);
    for r in &rows {
        assert!(num(&r[1]) <= 1e-10 / (4.0 * std::f64::consts::PI));
        assert!((0.0..=1.0).contains(&num(&r[3])));
    }

    let svg = dir.path().join("spectrum.svg");
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[1]), num(&r[2]))).collect();
    assert_eq!(series(&svg, "lambda_j/omega"), pts);
    let star = rows.iter().find(|r| r[4] == "true").unwrap();
    assert_eq!(series(&svg, "lambda*"), vec![(num(&star[1]), num(&star[2]))]);

    let (header, levels) = table(&dir.path().join("levelsets.csv"));
    assert_eq!(header, ["eps", "re", "im"]);
    for eps in ["0.01", "0.05", "0.1"] {
        let pts: Vec<(f64, f64)> = levels.iter().filter(|r| r[0] == eps).map(|r| (num(&r[1]), num(&r[2]))).collect();
        assert_eq!(series(&svg, &format!("distance {eps}")), pts);
    }
}

#[test]
fn manifest_echoes_every_default_and_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = SMALL.to_vec();
    args.extend(["--seed", "42", "spectrum"]);
    assert_eq!(run(dir.path(), &args), 0);
    let text = fs::read_to_string(dir.path().join("manifest.toml")).unwrap();
    let manifest: toml::Value = toml::from_str(&text).unwrap();
    assert_eq!(manifest["seed"].as_integer(), Some(42));
    assert_eq!(manifest["command"].as_str(), Some("spectrum"));

    let echo: toml::Value = toml::from_str(&ExperimentConfig::default().to_toml()).unwrap();
    let (mut want, mut got) = (BTreeSet::new(), BTreeSet::new());
    keys("", &echo, &mut want);
    keys("", &manifest["config"], &mut got);
    assert!(!want.is_empty());
    assert_eq!(want, got);
    assert_eq!(manifest["config"]["omega_over_pi"].as_float(), Some(4.0));

    let constants = manifest["constants"].as_table().unwrap();
    for k in ["alpha", "delta", "series_switch_radius", "resonance_tol", "level_set_eps"] {
        assert!(constants.contains_key(k), "missing constant {k}");
    }
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().filter_map(|v| v.as_str()).collect();
    for f in &files {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn iterate_is_deterministic_and_charts_match() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "--set",
        "omega_over_pi=3",
        "--set",
        "diagnostics.oracle_error=true",
        "--seed",
        "5",
        "iterate",
    ];
    assert_eq!(run(a.path(), &args), 0);
    assert_eq!(run(b.path(), &args), 0);
    let first = fs::read(a.path().join("residuals.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("residuals.csv")).unwrap());

    let (header, rows) = table(&a.path().join("residuals.csv"));
    assert_eq!(header, ["n", "res", "err_e", "err_mu"]);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][1], "");
    assert_eq!(num(&rows[0][2]), 1.0);
    assert_eq!(rows[1][1], "1.0");
    let last = rows.last().unwrap();
    assert!(num(&last[1]) <= 1e-6);

    let svg = a.path().join("residuals.svg");
    let res: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| !r[1].is_empty())
        .map(|r| (num(&r[0]), num(&r[1])))
        .filter(|p| p.1 > 0.0)
        .collect();
    assert_eq!(series(&svg, "res"), res);
}

#[test]
fn sweep_writes_table_fits_and_charts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(
        &cfg,
        r#"
forcing = { kind = "implicit-from-initial-error" }
initial = "paper-1d-ic"
rate_iters = 20
max_iters = 400
sweep = { start = 2.0, stop = 4.0, count = 3 }
[diagnostics]
spectrum = true
eigen_coefficients = true
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&out, &["--config", cfg.to_str().unwrap(), "--workers", "2", "sweep"]), 0);

    let (header, rows) = table(&out.join("sweep.csv"));
    assert_eq!(header, ["omega", "N", "rate_first", "rate_avg_e", "rate_avg_mu", "eps_star", "kappa"]);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r.iter().all(|c| !c.is_empty()), "{r:?}");
        assert!(num(&r[3]) < 1.0 && num(&r[4]) < 1.0);
    }
    let omegas: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
    assert!(omegas.windows(2).all(|w| w[0] < w[1]));
    let n: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[1]))).collect();
    assert_eq!(series(&out.join("sweep_iterations.svg"), "N"), n);
    let eps: Vec<(f64, f64)> = rows.iter().map(|r| (num(&r[0]), num(&r[5]))).collect();
    assert_eq!(series(&out.join("sweep_spectrum.svg"), "eps_star"), eps);

    let (header, fits) = table(&out.join("fits.csv"));
    assert_eq!(header, ["quantity", "slope", "intercept", "points"]);
    assert!(fits.iter().any(|r| r[0] == "eps_star"));
    for k in 0..3 {
        assert!(out.join(format!("residuals_{k:02}.csv")).exists());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run(p, &["--set", "no_such_key=1", "spectrum"]), 2);
    assert_eq!(run(p, &["--set", "omega_over_pi=-1", "spectrum"]), 2);
    assert_eq!(run(p, &["--config", "/nonexistent/config.toml", "iterate"]), 2);
    assert_eq!(run(p, &["sweep"]), 2, "sweep without a range");
    // far beyond the explicit stability limit: the iterate overflows
    let unstable = ["--set", "omega_over_pi=4", "--set", "time.cfl=20", "--set", "time.min_steps=2", "iterate"];
    assert_eq!(run(p, &unstable), 3);
    assert_eq!(run(p, &["verify", "--corrupt-filter"]), 1);
    assert_eq!(run(p, &["verify"]), 0);
    let (_, checks) = table(&p.join("verify.csv"));
    assert!(checks.iter().all(|r| r[1] == "true"));
}
