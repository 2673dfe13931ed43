use std::path::PathBuf;
use std::process::{Command, Output};

fn sphavg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphavg"))
        .args(args)
        .env_remove("SPHAVG_JOBS")
        .output()
        .expect("spawn sphavg")
}

fn temp(name: &str, body: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("sphavg-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn region_average_csv_is_all_strong() {
    let o = sphavg(&["region", "--operator", "average", "--n", "2", "--d", "2", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("coord_1,coord_2,classification"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 65 * 65);
    assert!(rows.iter().all(|r| r.ends_with(",strong")));
}

#[test]
fn region_svg_needs_small_arity() {
    let o = sphavg(&["region", "--operator", "lacunary", "--n", "4", "--d", "2", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sphavg(&["region", "--operator", "full-maximal", "--n", "2", "--d", "2", "--format", "svg"]);
    assert!(stdout(&o).starts_with("<svg"));
}

#[test]
fn density_maximum_is_pi() {
    let o = sphavg(&["density", "--n", "2", "--d", "2", "--grid", "0.05"]);
    let text = stdout(&o);
    let max = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!((max - std::f64::consts::PI).abs() < 1e-6, "{max}");
}

#[test]
fn sweep_is_reproducible_across_jobs() {
    let cfg = temp(
        "sweep.json",
        r#"{
  "schema_version": 1,
  "operator": {"kind": "average", "t": 1.0},
  "exponents": {"p": [2.0, 2.0]},
  "family": {
    "kind": "random_bumps",
    "count": 3,
    "seed": 5,
    "base": [
      {"kind": "bump", "params": {"s": 1.0}, "center": [0.0, 0.0], "d": 2},
      {"kind": "bump", "params": {"s": 1.0}, "center": [0.0, 0.0], "d": 2}
    ]
  }
}"#,
    );
    let c = cfg.to_str().unwrap();
    let a = stdout(&sphavg(&["sweep", "--config", c, "--jobs", "1"]));
    let b = stdout(&sphavg(&["sweep", "--config", c, "--jobs", "3"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 4);
    assert!(a.starts_with("member,ratio,output_norm,input_norm\n"));
}

#[test]
fn average_rows_and_monte_carlo_error_column() {
    let body = |method: &str| {
        format!(
            r#"{{"schema_version": 1,
  "functions": [
    {{"kind": "gaussian", "params": {{"a": 1.0}}, "center": [0.0, 0.0], "d": 2}},
    {{"kind": "gaussian", "params": {{"a": 1.0}}, "center": [0.0, 0.0], "d": 2}}
  ],
  "points": [[0.0, 0.0]],
  "method": {method}}}"#
        )
    };
    let sliced = temp("avg-sliced.json", &body(r#"{"kind": "sliced"}"#));
    let text = stdout(&sphavg(&["average", "--config", sliced.to_str().unwrap()]));
    let v: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    // Gaussians e^{-|x|^2} on the unit sphere of R^4: area / e
    let exact = 2.0 * std::f64::consts::PI.powi(2) / std::f64::consts::E;
    assert!((v - exact).abs() < 1e-4 * exact);
    let mc = temp("avg-mc.json", &body(r#"{"kind": "monte_carlo", "count": 1000}"#));
    let text = stdout(&sphavg(&["average", "--config", mc.to_str().unwrap()]));
    assert!(text.starts_with("x_1,x_2,value,std_error\n"));
}

#[test]
fn input_errors_exit_2() {
    let bad = temp("bad.json", "{\"schema_version\": 1,\n \"functions\": [}\n");
    let o = sphavg(&["average", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");

    let unversioned = temp("nov.json", "{\"functions\": []}");
    let o = sphavg(&["average", "--config", unversioned.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = sphavg(&["verify", "--criteria", "9", "--tol", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sphavg(&["density", "--n", "1", "--d", "2", "--grid", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_failure_exits_1_and_names_the_check() {
    // an impossibly tight partition tolerance
    let o = sphavg(&["verify", "--criteria", "9,7", "--tol", "reconstruction=1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("7 (partition and reconstruction)"), "{err}");
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains(" 7  FAIL") && table.contains(" 9  PASS"), "{table}");
}
