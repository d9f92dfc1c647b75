//! End-to-end runs of the `quasilocal` binary: exit codes, artifact headers
//! and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const NORMAL_FORM: &str =
    r#"metric = { name = "normal_form", ricci = [3.0, 2.0, 1.0], quartic = 1.0, ball_radius = 0.5 }"#;

fn quasilocal(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_quasilocal"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("QLM_WORKERS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every artifact starts with the toolkit header; returns the config hash.
fn check_headers(out: &Path) -> String {
    let mut hashes = Vec::new();
    for entry in fs::read_dir(out).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let hash = if path.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert_eq!(v["header"]["toolkit"], "quasilocal", "{}", path.display());
            v["header"]["config_hash"].as_str().unwrap().to_string()
        } else {
            let first = text.lines().next().unwrap();
            let rest = first.strip_prefix("# quasilocal ").unwrap_or_else(|| panic!("{}: {first}", path.display()));
            rest.split(" config-hash ").nth(1).unwrap().to_string()
        };
        assert_eq!(hash.len(), 64);
        hashes.push(hash);
    }
    assert!(!hashes.is_empty());
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));
    hashes.pop().unwrap()
}

/// Data rows of a CSV artifact after the header comment.
fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let text = fs::read_to_string(path).unwrap();
    let body = text.split_once('\n').unwrap().1;
    csv::Reader::from_reader(body.as_bytes()).records().map(Result::unwrap).collect()
}

#[test]
fn euclidean_curvature_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilocal(&["curvature"], "metric = { name = \"euclidean\" }\ncenter = [0.3, -0.2, 1.0]", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    check_headers(&out);
    let rows = csv_rows(&out.join("curvature.csv"));
    for r in rows.iter().filter(|r| r[0].starts_with("ricci") || r[0] == *"scalar") {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0, "{}", &r[0]);
    }
}

#[test]
fn validate_prints_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = quasilocal(&["validate"], "metric = { name = \"space_form\" }", dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let table: toml::Table = text.parse().unwrap();
    assert_eq!(table["mode"].as_str(), Some("small-sphere"));
    assert_eq!(table["embedding"]["degree"].as_integer(), Some(12));
    assert!(!dir.path().join("out").exists(), "validate writes nothing");
}

#[test]
fn invalid_configs_exit_2_with_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
        metric = { name = "af_perturbation", m = 1.0, tau = 0.4 }
        ladder = { r_min = 5.0, r_max = 1.0, count = 8 }
        colour = "blue"
    "#;
    let o = quasilocal(&["large-sphere"], config, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("1 ≥ τ > 1/2"), "{err}");
    assert!(err.contains("ladder.r_max"), "{err}");
    assert!(err.contains("colour: unknown field"), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_worker_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, "metric = { name = \"euclidean\" }").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_quasilocal"))
        .args(["validate", "--config"])
        .arg(&path)
        .env("QLM_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("QLM_WORKERS"));
}

#[test]
fn failed_gate_exits_3_without_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{NORMAL_FORM}\nradius = 0.15\nembedding = {{ gate_margin = 0.99 }}");
    let o = quasilocal(&["embed"], &config, dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("Gauss curvature gate"));
    assert!(!dir.path().join("out/mesh.csv").exists());
}

#[test]
fn unconverged_embedding_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let config =
        format!("{NORMAL_FORM}\nradius = 0.15\nembedding = {{ max_iterations = 1, initial_guess = {{ kind = \"round\" }} }}");
    let o = quasilocal(&["embed"], &config, dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("at radius 0.15"));
    assert!(!dir.path().join("out/mesh.csv").exists());
}

#[test]
fn embed_writes_mesh_and_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!("{NORMAL_FORM}\nradius = 0.15\n[output]\nformat = \"both\"");
    let o = quasilocal(&["embed"], &config, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    check_headers(&out);
    let mesh = csv_rows(&out.join("mesh.csv"));
    assert_eq!(mesh.len(), 26 * 52);
    let coeffs = csv_rows(&out.join("coefficients.csv"));
    assert_eq!(coeffs.len(), 13 * 13 - 1);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("embedding.json")).unwrap()).unwrap();
    assert_eq!(summary["data"]["converged"], true);
    assert!(summary["data"]["residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn short_ladder_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let config = "metric = { name = \"space_form\" }\nembedding = { degree = 6 }";
    let o = quasilocal(&["small-sphere", "--ladder", "0.05,0.4,3"], config, dir.path());
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn unit_sphere_small_sphere_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = "metric = { name = \"space_form\" }\nladder = { r_min = 0.05, r_max = 0.4, count = 8 }\nembedding = { degree = 8 }";
    let o = quasilocal(&["small-sphere"], config, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    check_headers(&out);
    let report = csv_rows(&out.join("theorem_report.csv"));
    let c3 = report.iter().find(|r| &r[0] == "c3_by").unwrap();
    assert_eq!(c3[1].parse::<f64>().unwrap(), 0.5);
    assert!((c3[2].parse::<f64>().unwrap() - 0.5).abs() < 1e-4);
    assert_eq!(&c3[5], "true");
    assert_eq!(csv_rows(&out.join("masses.csv")).len(), 8);
    assert!(String::from_utf8_lossy(&o.stdout).contains("c5_h"));
}

#[test]
fn reruns_are_byte_identical() {
    let config = "metric = { name = \"capped_schwarzschild\", m = 1.0, cap_radius = 4.0 }\nladder = { r_min = 50.0, r_max = 2000.0, count = 6 }";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = quasilocal(&["large-sphere"], config, a.path());
    let ob = quasilocal(&["large-sphere"], config, b.path());
    assert!(oa.status.success(), "{}", stderr(&oa));
    assert!(ob.status.success(), "{}", stderr(&ob));
    assert_eq!(oa.stdout, ob.stdout);
    let (da, db) = (a.path().join("out"), b.path().join("out"));
    assert_eq!(check_headers(&da), check_headers(&db), "output dir does not enter the hash");
    for name in ["masses.csv", "limits.csv"] {
        assert_eq!(fs::read(da.join(name)).unwrap(), fs::read(db.join(name)).unwrap(), "{name}");
    }
    let limits = csv_rows(&da.join("limits.csv"));
    let m_by = limits.iter().find(|r| &r[0] == "m_by").unwrap();
    assert!((m_by[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-6);
}
