//! End-to-end runs of the `plap` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn plap(args: &[&str]) -> Output {
    plap_env(args, None)
}

fn plap_env(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_plap"));
    cmd.args(args);
    match config {
        Some(p) => cmd.env("PLAP_CONFIG", p),
        None => cmd.env_remove("PLAP_CONFIG"),
    };
    cmd.output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = plap(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Rows of a CSV file as header plus numeric columns (non-numeric fields kept as strings).
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn constants_for_the_oscillation_tuple() {
    let out = plap(&["constants", "--N", "1", "--p", "3", "--alpha", "-4", "--eps", "-1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"alpha_star\": -2.1428571428571428"), "{text}");
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["gamma"].as_f64(), Some(3.0));
    assert!((v["alpha_star"].as_f64().unwrap() + 15.0 / 7.0).abs() < 1e-15);
    assert_eq!(v["present"]["ell"], Value::Bool(false));
    assert!(v["ell"].is_null());
    assert_eq!(v["params"]["N"].as_u64(), Some(1));
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let out = plap(&["constants", "--N", "1", "--p", "2", "--alpha", "-4", "--eps", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p must exceed 2"));

    let out = plap(&["constants", "--N", "1", "--p", "3", "--alpha", "0", "--eps", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha must be nonzero"));

    let out = plap(&["constants", "--N", "1", "--p", "3", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--eps"));

    let out = plap(&["constants", "--N", "1", "--p", "3", "--alpha", "1", "--eps", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("plap.cfg");
    std::fs::write(&cfg, "# defaults\nN=2\np=3\nalpha=-6\neps=1\n").unwrap();
    let out = plap_env(&["constants"], Some(&cfg));
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["ell"].as_f64().unwrap() - 1.0 / 15.0).abs() < 1e-15);
    let out = plap_env(&["constants", "--alpha", "2"], Some(&cfg));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["params"]["alpha"].as_f64(), Some(2.0));
    assert!(v["ell"].is_null());

    std::fs::write(&cfg, "bogus=1\n").unwrap();
    assert_eq!(plap_env(&["constants"], Some(&cfg)).status.code(), Some(2));
}

fn shoot_barenblatt(dir: &Path) -> std::path::PathBuf {
    let out_path = dir.join("tr.csv");
    let out = plap(&[
        "shoot", "--kind", "T_r", "--N", "2", "--p", "3", "--alpha", "2", "--eps", "1", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    out_path
}

#[test]
fn t_r_reproduces_the_barenblatt_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = shoot_barenblatt(dir.path());
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["tau", "y", "Y", "r", "w", "dw"]);
    let (r, w) = (col(&rows, 3), col(&rows, 4));
    let hi = 0.9 * 3f64.powf(2.0 / 3.0);
    let mut checked = 0;
    for (r, w) in r.iter().zip(&w) {
        if (0.01..=hi).contains(r) {
            let exact = (1.0 - r.powf(1.5) / 3.0).powi(2);
            assert!((w - exact).abs() <= 1e-6 * exact, "r={r}: {w} vs {exact}");
            checked += 1;
        }
    }
    assert!(checked > 20);
    // The σ = ε line: Y = y away from the double zero.
    for row in rows.iter().filter(|row| row[3].parse::<f64>().unwrap() <= hi) {
        let (y, yy): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((y - yy).abs() <= 1e-9 * y.abs());
    }
}

#[test]
fn manifest_lists_every_output_with_its_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = shoot_barenblatt(dir.path());
    let m: Value = serde_json::from_slice(&std::fs::read(dir.path().join("tr.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "shoot");
    assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let outputs = m["outputs"].as_array().unwrap();
    let names: Vec<&str> = outputs.iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["tr.csv", "tr.events.csv"]);
    for o in outputs {
        let bytes = std::fs::read(path.with_file_name(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        assert_eq!(o["bytes"].as_u64().unwrap() as usize, bytes.len());
    }
}

#[test]
fn identical_runs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    shoot_barenblatt(a.path());
    shoot_barenblatt(b.path());
    for name in ["tr.csv", "tr.events.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    let strip = |p: &Path| {
        let mut v: Value = serde_json::from_slice(&std::fs::read(p.join("tr.manifest.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_s");
        v
    };
    assert_eq!(strip(a.path()), strip(b.path()));
}

#[test]
fn t_eps_ends_with_a_double_zero_capture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("teps.csv");
    let out = plap(&[
        "shoot", "--kind", "T_eps", "--N", "2", "--p", "3", "--alpha", "1", "--eps", "1", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = read_csv(&dir.path().join("teps.events.csv"));
    assert_eq!(header, ["kind", "tau", "y", "Y"]);
    assert_eq!(rows.last().unwrap()[0], "double_zero_capture", "{rows:?}");
    // It sits at the contact radius r̄ = 1.
    assert!(rows.last().unwrap()[1].parse::<f64>().unwrap().abs() < 1e-6);
}

#[test]
fn t_u_is_inadmissible_when_p_is_below_n() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tu.csv");
    let out = plap(&[
        "shoot", "--kind", "T_u", "--N", "4", "--p", "3", "--alpha", "0.5", "--eps", "-1", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("T_eta"));
    assert!(!path.exists());
    let out = plap(&["shoot", "--kind", "T_q", "--N", "4", "--p", "3", "--alpha", "0.5", "--eps", "-1", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn integrate_writes_rows_in_increasing_tau() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("orbit.csv");
    let out = plap(&[
        "integrate", "--N", "1", "--p", "3", "--alpha", "-4", "--eps", "-1", "--y0", "0.05", "--Y0", "-0.01",
        "--tau-max", "10", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (_, rows) = read_csv(&path);
    let tau = col(&rows, 0);
    assert_eq!(tau[0], 0.0);
    assert!(tau.windows(2).all(|w| w[1] > w[0]));
    assert!((tau.last().unwrap() - 10.0).abs() < 1e-9);
    // r = e^τ and w = e^{γτ} y.
    for row in &rows {
        let v: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        assert!((v[3] - v[0].exp()).abs() <= 1e-11 * v[3]);
        assert!((v[4] - (3.0 * v[0]).exp() * v[1]).abs() <= 1e-10 * v[4].abs().max(1e-300));
    }
    let (_, events) = read_csv(&dir.path().join("orbit.events.csv"));
    assert!(events.iter().any(|r| r[0] == "y_zero_crossing"));
}

fn svg_of(args: &[&str], dir: &Path, name: &str) -> String {
    let path = dir.join(name);
    let mut all: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--out", &p]);
    let out = plap(&all);
    assert!(out.status.success(), "{}", stderr(&out));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn portraits_are_plain_deterministic_svg() {
    let dir = tempfile::tempdir().unwrap();
    let a = svg_of(&["portrait", "--recipe", "fig05"], dir.path(), "a.svg");
    let b = svg_of(&["portrait", "--recipe", "fig05"], dir.path(), "b.svg");
    assert_eq!(a, b);
    assert!(a.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(a.trim_end().ends_with("</svg>"));
    assert!(!a.contains("<script"));
    assert!(a.matches("<polyline").count() > 10);
    assert_eq!(a.matches("class=\"stationary\"").count(), 1);
    assert!(dir.path().join("a.manifest.json").exists());
}

#[test]
fn sink_portrait_marks_m_ell_and_orbits_reach_it() {
    let dir = tempfile::tempdir().unwrap();
    let s = svg_of(&["portrait", "--recipe", "fig06"], dir.path(), "f6.svg");
    assert_eq!(s.matches("class=\"stationary\"").count(), 3);
    assert!(s.contains("<title>M_ell</title>"));
    // Grid orbits end at M_ell, so some polyline vertex lies within two pixels of its marker.
    let marker = s.lines().find(|l| l.contains("<title>M_ell</title>")).unwrap();
    let attr = |name: &str| -> f64 {
        let i = marker.find(&format!("{name}=\"")).unwrap() + name.len() + 2;
        marker[i..].split('"').next().unwrap().parse().unwrap()
    };
    let (cx, cy) = (attr("cx"), attr("cy"));
    let near = s.lines().filter(|l| l.contains("<polyline")).any(|l| {
        let pts = l.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        pts.split(' ').any(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse::<f64>().unwrap() - cx).hypot(y.parse::<f64>().unwrap() - cy) < 2.0
        })
    });
    assert!(near);
}

#[test]
fn empty_seed_file_gives_only_stationary_points() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = dir.path().join("seeds.txt");
    std::fs::write(&seeds, "# nothing\n").unwrap();
    let s = svg_of(
        &["portrait", "--N", "2", "--p", "3", "--alpha", "-6", "--eps", "1", "--seed-file", seeds.to_str().unwrap()],
        dir.path(),
        "e.svg",
    );
    assert_eq!(s.matches("<polyline").count(), 0);
    assert_eq!(s.matches("<circle").count(), 3);
}

#[test]
fn seed_file_orbits_are_drawn() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = dir.path().join("seeds.txt");
    std::fs::write(&seeds, "0.05 -0.01\n0.02,0.01\n").unwrap();
    let s = svg_of(
        &["portrait", "--recipe", "fig05", "--seed-file", seeds.to_str().unwrap()],
        dir.path(),
        "s.svg",
    );
    assert!(s.contains("<title>seed 0</title>") && s.contains("<title>seed 1</title>"));
    assert!(!s.contains("class=\"special\""));
}

#[test]
fn alpha_c_closed_form_and_bisection() {
    let v = ok_json(&["alpha-c", "--N", "1", "--p", "3"]);
    assert_eq!(v["alpha_c"].as_f64(), Some(-2.0));
    let v = ok_json(&["alpha-c", "--N", "1", "--p", "3", "--mode", "bisection", "--tol", "1e-3"]);
    assert!((v["alpha_c"].as_f64().unwrap() + 2.0).abs() <= 1e-3);
    let b = v["bracket"].as_array().unwrap();
    assert!(b[1].as_f64().unwrap() - b[0].as_f64().unwrap() <= 1e-3);
}

#[test]
fn classify_tags_and_check_schema() {
    for (alpha, tag) in [("-2.1", "orb"), ("-1.9", "ent")] {
        let v = ok_json(&["classify", "--N", "1", "--p", "3", "--alpha", alpha, "--eps", "-1"]);
        assert_eq!(v["theorem_tag"], tag);
        assert!(v["schema_version"].as_u64().is_some());
        for c in v["checks"].as_array().unwrap() {
            assert!(c["clause"].is_string() && c["source_theorem"].is_string());
            assert!(["pass", "fail", "untested"].contains(&c["status"].as_str().unwrap()));
        }
    }
}

#[test]
fn recipes_cover_all_seventeen_figures() {
    let v = ok_json(&["recipes"]);
    let list = v.as_array().unwrap();
    assert_eq!(list.len(), 17);
    assert_eq!(list[4]["name"], "fig05");
    assert_eq!(list[4]["params"]["alpha"].as_f64(), Some(-4.0));
    assert_eq!(list[5]["params"]["N"].as_u64(), Some(2));
}

#[test]
fn json_output_to_a_file_gets_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ac.json");
    let out = plap(&["alpha-c", "--N", "1", "--p", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let bytes = std::fs::read(&path).unwrap();
    let m: Value = serde_json::from_slice(&std::fs::read(dir.path().join("ac.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
}
