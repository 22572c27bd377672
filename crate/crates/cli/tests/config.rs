use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use hypsorb::InitialCondition;
use hypsorb_cli::config::{resolve_out_dir, Axis, EngineKind, RunConfig, DEFAULT_OUT_DIR};
use hypsorb_cli::output::{read_series, write_series, SeriesTable};
use hypsorb_cli::{Cli, Command};
use proptest::prelude::*;

const FIG3: &str = r#"
engine = "spectral"
modes = 80
probes = [0.0, 0.25]

[params]
A = 0.001
B = 0.1
L = 1.0
N0 = 3.0

[grid]
T = 2.0
"#;

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("hypsorb").chain(args.iter().copied())).unwrap()
}

#[test]
fn toml_document_parses_and_resolves() {
    let cfg = RunConfig::from_toml(FIG3).unwrap().resolve().unwrap();
    let p = cfg.params.unwrap();
    assert_eq!(
        (
            p.desorption_time,
            p.relaxation_time,
            p.adsorption_length,
            p.initial_density
        ),
        (0.001, 0.1, 1.0, 3.0)
    );
    assert_eq!(cfg.engine, EngineKind::Spectral);
    assert_eq!(cfg.modes, 80);
    assert_eq!(cfg.horizon(), 2.0);
    assert_eq!(cfg.initial, InitialCondition::Step);
}

#[test]
fn resolved_config_survives_a_toml_round_trip() {
    let cfg = RunConfig::from_toml(FIG3).unwrap().resolve().unwrap();
    let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
}

#[test]
fn flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.toml");
    std::fs::write(&path, FIG3).unwrap();
    let cli = parse(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--L",
        "10",
        "--engine",
        "fdm",
        "--nz",
        "50",
    ]);
    let Command::Run(args) = cli.command else {
        panic!()
    };
    let cfg = args.common.config().unwrap();
    let p = cfg.params.unwrap();
    assert_eq!(p.adsorption_length, 10.0);
    assert_eq!(p.relaxation_time, 0.1);
    assert_eq!(cfg.engine, EngineKind::Fdm);
    assert_eq!(cfg.grid.n_z, 50);
    assert_eq!(cfg.modes, 80);
}

#[test]
fn horizon_defaults_follow_the_relaxation_time() {
    let fast = RunConfig::from_toml("[params]\nA = 1.0\nB = 0.1\nL = 1.0\nN0 = 1.0\n").unwrap();
    let slow = RunConfig::from_toml("[params]\nA = 1.0\nB = 2.0\nL = 1.0\nN0 = 1.0\n").unwrap();
    assert_eq!(fast.resolve().unwrap().horizon(), 2.0);
    assert_eq!(slow.resolve().unwrap().horizon(), 10.0);
}

#[test]
fn physical_inputs_are_converted() {
    let text = r#"
[physical]
thickness = 2.0
diffusivity = 1.0
relaxation_time = 0.4
desorption_time = 0.4
adsorption_rate = 1.0
initial_density = 5.0
"#;
    let cfg = RunConfig::from_toml(text).unwrap().resolve().unwrap();
    assert!(cfg.physical.is_none());
    let p = cfg.params.unwrap();
    assert!((p.relaxation_time - 0.1).abs() < 1e-15);
    assert!((p.desorption_time - 0.1).abs() < 1e-15);
}

fn error_of(text: &str) -> String {
    match RunConfig::from_toml(text).and_then(RunConfig::resolve) {
        Ok(_) => panic!("accepted:\n{text}"),
        Err(e) => format!("{e:#}"),
    }
}

#[test]
fn errors_name_the_offending_field() {
    let base = "[params]\nA = 1.0\nB = 0.1\nL = 1.0\nN0 = 1.0\n";
    assert!(error_of("[params]\nA = -1.0\nB = 0.1\nL = 1.0\nN0 = 1.0\n").contains("`A`"));
    assert!(error_of(&format!("modes = 0\n{base}")).contains("`modes`"));
    assert!(error_of(&format!("probes = [0.7]\n{base}")).contains("`probes`"));
    assert!(error_of(&format!("{base}[grid]\nT = 0.0\n")).contains("`grid.T`"));
    assert!(
        error_of(&format!("{base}[compare]\nengines = [\"fdm\", \"fdm\"]\n"))
            .contains("`compare.engines`")
    );
    assert!(error_of(&format!("{base}[compare]\nfrom = 5.0\n")).contains("`compare.from`"));
    assert!(error_of(&format!("bogus = 1\n{base}")).contains("bogus"));
    assert!(error_of("engine = \"fdm\"\n").contains("missing parameters"));
    let both = format!(
        "{base}[physical]\nthickness = 1.0\ndiffusivity = 1.0\nrelaxation_time = 0.1\n\
         desorption_time = 1.0\nadsorption_rate = 1.0\ninitial_density = 1.0\n"
    );
    assert!(error_of(&both).contains("not both"));
}

#[test]
fn sampled_profile_from_toml_is_validated() {
    let n = 201;
    let z: Vec<f64> = (0..n).map(|i| -0.5 + i as f64 / (n - 1) as f64).collect();
    let v: Vec<f64> = z.iter().map(|z| 2.0 * (1.0 - 2.0 * z.abs())).collect();
    let fmt = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let text = format!(
        "[params]\nA = 1.0\nB = 0.1\nL = 1.0\nN0 = 1.0\n[initial]\nkind = \"sampled\"\nz = [{}]\nvalues = [{}]\n",
        fmt(&z),
        fmt(&v)
    );
    let cfg = RunConfig::from_toml(&text).unwrap().resolve().unwrap();
    assert!(matches!(cfg.initial, InitialCondition::Sampled(_)));

    let lopsided: Vec<f64> = v.iter().zip(&z).map(|(v, z)| v * (1.0 + z)).collect();
    let bad = text.replace(&fmt(&v), &fmt(&lopsided));
    assert!(error_of(&bad).contains("not even"));

    let heavy: Vec<f64> = v.iter().map(|v| 1.1 * v).collect();
    let bad = text.replace(&fmt(&v), &fmt(&heavy));
    assert!(error_of(&bad).contains("`initial`"));

    let unsorted = text
        .replacen("-0.5, ", "", 1)
        .replacen("z = [", "z = [-0.5, -0.5, ", 1);
    assert!(RunConfig::from_toml(&unsorted).is_err());
}

#[test]
fn sweep_flags_merge_with_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        format!("{FIG3}[sweep]\naxis = \"B\"\nvalues = [0.1, 0.01]\n"),
    )
    .unwrap();
    let cli = parse(&["sweep", "-c", path.to_str().unwrap(), "--values", "1,2,3"]);
    let Command::Sweep(args) = cli.command else {
        panic!()
    };
    let sweep = args.config().unwrap().sweep.unwrap();
    assert_eq!(sweep.axis, Axis::B);
    assert_eq!(sweep.values, vec![1.0, 2.0, 3.0]);

    let cli = parse(&[
        "sweep", "--A", "1", "--B", "0.1", "--L", "1", "--N0", "1", "--axis", "L",
    ]);
    let Command::Sweep(args) = cli.command else {
        panic!()
    };
    assert!(args.config().is_err());
}

#[test]
fn negative_probe_positions_parse() {
    let cli = parse(&[
        "run",
        "--A",
        "1",
        "--B",
        "0.1",
        "--L",
        "1",
        "--N0",
        "1",
        "--probes",
        "-0.25,0,0.25",
    ]);
    let Command::Run(args) = cli.command else {
        panic!()
    };
    assert_eq!(args.common.config().unwrap().probes, vec![-0.25, 0.0, 0.25]);
}

#[test]
fn output_directory_precedence() {
    let explicit = Some(PathBuf::from("a"));
    let env = Some(OsString::from("b"));
    assert_eq!(
        resolve_out_dir(explicit.clone(), env.clone()),
        PathBuf::from("a")
    );
    assert_eq!(resolve_out_dir(None, env), PathBuf::from("b"));
    assert_eq!(
        resolve_out_dir(None, Some(OsString::new())),
        PathBuf::from(DEFAULT_OUT_DIR)
    );
    assert_eq!(resolve_out_dir(None, None), PathBuf::from(DEFAULT_OUT_DIR));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

proptest! {
    #[test]
    fn series_csv_round_trip_is_bit_exact(
        rows in prop::collection::vec((finite(), prop::collection::vec(finite(), 2)), 1..40),
        start in -1e3..1e3_f64,
    ) {
        let mut t = start;
        let mut table = SeriesTable { probes: vec![-0.25, 0.125], times: vec![], sigma: vec![], values: vec![] };
        for (s, v) in rows {
            table.times.push(t);
            t += 0.1 + s.abs().min(1.0);
            table.sigma.push(s);
            table.values.push(v);
        }
        let mut buf = Vec::new();
        write_series(&mut buf, &table, "a comment\nacross two lines").unwrap();
        let back = read_series(buf.as_slice()).unwrap();
        prop_assert_eq!(back.probes.len(), 2);
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.probes), bits(&table.probes));
        prop_assert_eq!(bits(&back.times), bits(&table.times));
        prop_assert_eq!(bits(&back.sigma), bits(&table.sigma));
        for (a, b) in back.values.iter().zip(&table.values) {
            prop_assert_eq!(bits(a), bits(b));
        }
    }
}

#[test]
fn non_increasing_times_are_rejected() {
    let table = SeriesTable {
        probes: vec![],
        times: vec![0.0, 0.0],
        sigma: vec![1.0, 1.0],
        values: vec![vec![], vec![]],
    };
    assert!(write_series(Vec::new(), &table, "").is_err());
}
