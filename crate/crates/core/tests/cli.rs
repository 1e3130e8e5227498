use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cantor-distortion"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn construct_counts_and_cap() {
    let o = bin(&["construct", "--sigma", "0.45", "--beta", "2", "--depth", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("level,ax0_path,ax1_path,cx,cy,side"));
    assert_eq!(lines.count(), 64);

    let o = bin(&["construct", "--sigma", "0.45", "--beta", "2", "--depth", "4", "--side", "image"]);
    assert_eq!(stdout(&o).lines().count(), 257);

    let o = bin(&["construct", "--depth", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--cap"));
}

#[test]
fn construct_json_echoes_params() {
    let o = bin(&["construct", "--depth", "3", "--format", "json", "--sigma", "0.3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["sigma"], 0.3);
    assert_eq!(v["params"]["depth"], 3);
    assert_eq!(v["results"].as_array().unwrap().len(), 64);
    assert!(v["checks"].is_object());
}

#[test]
fn invalid_parameters_exit_2() {
    assert_eq!(bin(&["verify", "--sigma", "0.5"]).status.code(), Some(2));
    assert_eq!(bin(&["construct", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(bin(&["construct", "--depth", "2"]).status.code(), Some(2));
    assert_eq!(bin(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn literal_radii_fail_verification() {
    let o = bin(&["verify", "--debug-literal-radii", "--mc-samples", "10000"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"]["02_consistency_max_mismatch"]["status"], "fail");
    assert_eq!(v["checks"]["10_determinism"]["status"], "skipped");
}

#[test]
fn default_verification_passes() {
    let o = bin(&["verify", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.starts_with("check,status,measured,target,tolerance,relation\n"));
    assert!(!text.contains(",fail,"));
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn map_reads_points_and_flags_skeleton() {
    let dir = tempfile::tempdir().unwrap();
    // a level-3 center, a level-3 cell corner, a generic point
    let pts = write(dir.path(), "pts.csv", "x,y\n0.0625,0.0625\n0.125,0.25\n0.3,0.7\n");
    let o = bin(&["map", "--points", &pts, "--depth", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["x", "y", "fx", "fy", "dnorm", "jac", "K", "skeleton"]);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2][7], "1");
    assert_eq!(&rows[2][4..7], ["", "", ""]);
    assert!((rows[2][2].parse::<f64>().unwrap() - 0.125).abs() < 1e-15);
    assert_eq!(rows[3][7], "0");
    assert!(rows[3][6].parse::<f64>().unwrap() >= 1.0);

    let bad = write(dir.path(), "bad.csv", "x,y\n1.5,0.5\n");
    assert_eq!(bin(&["map", "--points", &bad]).status.code(), Some(2));
}

#[test]
fn series_and_measure_tables() {
    let o = bin(&["series", "--kind", "tv", "--k-min", "1000", "--k-max", "100000"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,log_term,ratio,verdict"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[0], "100000");
    assert!((last[2].parse::<f64>().unwrap() - 0.9).abs() < 1e-3);
    assert_eq!(last[3], "convergent");

    let o = bin(&["series", "--format", "json", "--p", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["results"]["p0"].as_f64().unwrap() - 1.896489).abs() < 1e-5);
    assert_eq!(v["results"]["verdict"], "divergent");

    let o = bin(&["measure", "--gauge-beta", "1,2,4", "--k-max", "1000000"]);
    let text = stdout(&o);
    assert!(text.starts_with("beta_prime,k,log_sum,verdict\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 4);
    assert!(text.lines().any(|l| l.starts_with("4.0,") || l.starts_with("4,")));

    let o = bin(&["measure", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let m = v["results"]["mass"]["m"].as_f64().unwrap();
    assert_eq!(v["results"]["mass"]["lower_bound"].as_f64().unwrap(), m / 4.0);
    assert_eq!(v["results"]["mass"]["first_admissible_k"], 3);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["construct", "--depth", "5", "--format", "json"][..],
        &["map", "--grid", "40", "--depth", "9"][..],
        &["series", "--format", "json"][..],
        &["measure", "--format", "json"][..],
    ] {
        assert_eq!(bin(args).stdout, bin(args).stdout, "{args:?}");
    }
}

#[test]
fn render_regression() {
    let o = bin(&["render", "--depth", "3", "--grid", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = stdout(&o);
    assert!(svg.contains("viewBox=\"0 0 1000 1000\""));
    assert_eq!(svg.matches("<polyline").count(), 18);
    let digest: String = Sha256::digest(svg.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(digest, "56af36ed71cee63c16ef53dc8bfaef2306188c46a2c051c9b0b98927354bdd72");

    let o = bin(&["render", "--grid", "0"]);
    let svg = stdout(&o);
    assert_eq!(svg.matches("<polyline").count(), 0);
    assert!(svg.trim_end().ends_with("</svg>"));

    let o = bin(&["render", "--depth", "5", "--grid", "4", "--cells", "5"]);
    assert_eq!(stdout(&o).matches("<rect").count(), 64 + 256 + 1024);
}
