use std::path::Path;
use std::process::{Command, Output};

use hypsorb_cli::config::OUT_DIR_ENV;
use hypsorb_cli::output::read_series;
use serde_json::Value;

const FIG3: [&str; 8] = ["--A", "0.001", "--B", "0.1", "--L", "1", "--N0", "3"];

fn hypsorb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypsorb"))
        .args(args)
        .current_dir(dir)
        .env(OUT_DIR_ENV, dir.join("out"))
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hypsorb(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn with_fig3<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = extra[..1].to_vec();
    v.extend(FIG3);
    v.extend(&extra[1..]);
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_series_and_diagnostics_into_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "run",
        "--engine",
        "fdm",
        "--nz",
        "100",
        "--T",
        "1",
        "--samples",
        "50",
        "--probes",
        "0,0.5",
    ]);
    let stdout = ok(dir.path(), &args);
    let csv = dir.path().join("out/fdm.csv");
    assert!(stdout.contains("fdm.csv"));
    let table = read_series(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(table.times.len(), 51);
    assert_eq!(table.probes, vec![0.0, 0.5]);
    assert_eq!(*table.times.last().unwrap(), 1.0);
    assert_eq!(table.sigma[0], 0.0);

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# hypsorb "));
    assert!(text.contains("# B = 0.1"));

    let diag = json(&dir.path().join("out/fdm.json"));
    assert_eq!(diag["diagnostics"]["engine"], "fdm");
    assert_eq!(diag["config"]["params"]["B"], 0.1);
    assert!(
        diag["diagnostics"]["conservation_residual_max"]
            .as_f64()
            .unwrap()
            < 1e-12
    );
}

#[test]
fn out_dir_flag_beats_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "run",
        "--engine",
        "parabolic",
        "--nz",
        "40",
        "--T",
        "0.5",
        "--samples",
        "10",
        "--out-dir",
        "here",
    ]);
    ok(dir.path(), &args);
    assert!(dir.path().join("here/parabolic.csv").exists());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn runs_are_byte_for_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for engine in ["fdm", "spectral"] {
        let mut contents = Vec::new();
        for name in ["first", "second"] {
            let args = with_fig3(&[
                "run",
                "--engine",
                engine,
                "--nz",
                "80",
                "--T",
                "1",
                "--samples",
                "100",
                "--name",
                name,
            ]);
            ok(dir.path(), &args);
            contents.push(std::fs::read(dir.path().join(format!("out/{name}.csv"))).unwrap());
        }
        let strip = |b: &[u8]| {
            String::from_utf8_lossy(b)
                .replace("\"first\"", "\"x\"")
                .replace("\"second\"", "\"x\"")
        };
        assert_eq!(strip(&contents[0]), strip(&contents[1]), "{engine}");
    }
}

#[test]
fn spectral_diagnostics_add_an_eigen_table() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "run",
        "--engine",
        "spectral",
        "--modes",
        "10",
        "--diagnostics",
        "--alpha-max",
        "20",
        "--alpha-step",
        "0.5",
    ]);
    ok(dir.path(), &args);
    let diag = json(&dir.path().join("out/spectral.json"));
    assert_eq!(
        diag["diagnostics"]["details"]["modes"]
            .as_array()
            .unwrap()
            .len(),
        10
    );
    assert_eq!(diag["config"]["grid"]["T"], 2.0);
    let eigen = std::fs::read_to_string(dir.path().join("out/spectral_eigen.csv")).unwrap();
    let rows: Vec<&str> = eigen.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "alpha,f1,f2,re_e,im_e");
    assert_eq!(rows.len(), 1 + 40);
}

#[test]
fn eigen_dump_samples_the_requested_grid() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "eigen-dump",
        "--alpha-min",
        "1",
        "--alpha-max",
        "3",
        "--alpha-step",
        "0.25",
        "--name",
        "roots",
    ]);
    ok(dir.path(), &args);
    let text = std::fs::read_to_string(dir.path().join("out/roots_eigen.csv")).unwrap();
    let alphas: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(
        alphas,
        vec![1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0]
    );
}

#[test]
fn sweep_writes_one_series_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "sweep",
        "--nz",
        "60",
        "--samples",
        "40",
        "--axis",
        "L",
        "--values",
        "1,10",
        "--jobs",
        "2",
    ]);
    let stdout = ok(dir.path(), &args);
    assert!(stdout.trim().ends_with("fdm_sweep.json"));
    let index = json(&dir.path().join("out/fdm_sweep.json"));
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    for (point, l) in points.iter().zip([1.0, 10.0]) {
        assert_eq!(point["params"]["L"], l);
        let eq = 3.0 * l / (1.0 + 2.0 * l);
        assert_eq!(point["diagnostics"]["sigma_eq"].as_f64().unwrap(), eq);
    }
    assert!(dir.path().join("out/fdm_L_1.csv").exists());
    assert!(dir.path().join("out/fdm_L_10.csv").exists());
}

#[test]
fn compare_reports_and_sets_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let pass = with_fig3(&["compare", "--nz", "200", "--T", "2", "--samples", "400"]);
    let stdout = ok(dir.path(), &pass);
    assert!(stdout.contains("PASS"));
    let report = json(&dir.path().join("out/compare_report.json"));
    assert_eq!(report["pass"], true);
    assert!(report["relative_sigma_max"].as_f64().unwrap() < 0.05);
    assert!(dir.path().join("out/compare_spectral.csv").exists());
    assert!(dir.path().join("out/compare_fdm.csv").exists());

    let strict = with_fig3(&[
        "compare",
        "--nz",
        "50",
        "--modes",
        "3",
        "--tolerance",
        "1e-4",
        "--name",
        "strict",
    ]);
    let out = hypsorb(dir.path(), &strict);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(
        json(&dir.path().join("out/strict_report.json"))["pass"],
        false
    );
}

#[test]
fn compare_accepts_an_engine_pair() {
    let dir = tempfile::tempdir().unwrap();
    let args = with_fig3(&[
        "compare",
        "--engines",
        "fdm,parabolic",
        "--nz",
        "60",
        "--T",
        "1",
        "--samples",
        "100",
        "--from",
        "0.1",
        "--tolerance",
        "1",
    ]);
    ok(dir.path(), &args);
    let report = json(&dir.path().join("out/compare_report.json"));
    assert_eq!(
        report["config"]["compare"]["engines"],
        serde_json::json!(["fdm", "parabolic"])
    );
}

#[test]
fn sampled_profile_from_a_file_matches_the_same_profile_in_toml() {
    let dir = tempfile::tempdir().unwrap();
    let n = 400;
    let z: Vec<f64> = (0..=n).map(|i| 0.5 * i as f64 / n as f64).collect();
    let v: Vec<f64> = z.iter().map(|z| 6.0 * (1.0 - 2.0 * z)).collect();
    let mut csv = String::from("# tent profile for N0 = 3\nz,value\n");
    for (z, v) in z.iter().zip(&v) {
        csv += &format!("{z:?},{v:?}\n");
    }
    std::fs::write(dir.path().join("ic.csv"), csv).unwrap();
    let list = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let toml = format!(
        "[initial]\nkind = \"sampled\"\nz = [{}]\nvalues = [{}]\n",
        list(&z),
        list(&v)
    );
    std::fs::write(dir.path().join("ic.toml"), toml).unwrap();

    let base = with_fig3(&["run", "--nz", "100", "--T", "0.5", "--samples", "10"]);
    let mut from_file = base.clone();
    from_file.extend(["--initial-file", "ic.csv", "--name", "file"]);
    let mut from_toml = base;
    from_toml.extend(["--config", "ic.toml", "--name", "toml"]);
    ok(dir.path(), &from_file);
    ok(dir.path(), &from_toml);
    let read = |name: &str| {
        read_series(std::fs::File::open(dir.path().join(format!("out/{name}.csv"))).unwrap())
            .unwrap()
    };
    let (a, b) = (read("file"), read("toml"));
    assert_eq!(a, b);
    assert!(a.sigma.iter().all(|s| s.is_finite()));
}

#[test]
fn invalid_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypsorb(
        dir.path(),
        &[
            "run", "--A", "0.001", "--B", "0.1", "--L", "1", "--N0", "-3",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("N0"), "{err}");

    let out = hypsorb(dir.path(), &["run", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));

    let out = hypsorb(dir.path(), &["run", "--B", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}
