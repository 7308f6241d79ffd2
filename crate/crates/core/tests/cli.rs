use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bianchi(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bianchi"))
        .args(args)
        .env("BIANCHI_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn write_form(dir: &Path) -> String {
    let p = dir.join("form.json");
    fs::write(
        &p,
        r#"{"field": -1, "level": "11", "w": {"11": -1},
            "source": {"type": "base_change", "curve": [0, -1, 1, -10, -20]}, "norm_bound": 40000}"#,
    )
    .unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn unsupported_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = bianchi(dir.path(), &["enumerate", "--field", "-19", "--level", "11", "--xmax", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("d=-19") && err.contains("Euclidean"), "{err}");
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bianchi(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(bianchi(dir.path(), &["enumerate", "--field", "-1"]).status.code(), Some(2));
    let o = bianchi(dir.path(), &["stats", "--symbols", "/nonexistent.csv", "--report", "r.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipeline_is_deterministic_and_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let form = write_form(d);
    let s = |p: &str| d.join(p).to_str().unwrap().to_string();

    let o = bianchi(d, &["coeffs", "--form", &form]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cached: Vec<_> = fs::read_dir(d).unwrap().filter_map(|e| e.ok()).filter(|e| e.path().extension().is_some_and(|x| x == "json") && e.file_name() != "form.json").collect();
    assert_eq!(cached.len(), 1, "one cached table");

    for name in ["q1.csv", "q2.csv"] {
        let o = bianchi(d, &["enumerate", "--field", "-1", "--level", "11", "--xmax", "8", "--out", &s(name)]);
        assert!(o.status.success());
    }
    let q1 = fs::read(d.join("q1.csv")).unwrap();
    assert_eq!(q1, fs::read(d.join("q2.csv")).unwrap());
    let text = String::from_utf8(q1).unwrap();
    assert!(text.starts_with("# bianchi "));
    assert!(text.lines().nth(1) == Some("a,c,absc,class"));

    for name in ["s1.csv", "s2.csv"] {
        let o = bianchi(d, &["--threads", "1", "symbols", "--form", &form, "--fractions", &s("q1.csv"), "--out", &s(name)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let s1 = fs::read_to_string(d.join("s1.csv")).unwrap();
    assert_eq!(s1, fs::read_to_string(d.join("s2.csv")).unwrap());
    assert_eq!(s1.lines().nth(1), Some("a,c,absc,class,symbol,err,terms"));
    assert_eq!(s1.lines().count() - 2, text.lines().count() - 2);

    let o = bianchi(d, &["stats", "--symbols", &s("s1.csv"), "--xgrid", "3,4,6,8", "--report", &s("st.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("st.json")).unwrap()).unwrap();
    assert_eq!(rep["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(rep["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert!(d.join("st.curves.csv").exists() && d.join("st.hist.csv").exists());

    let o = bianchi(d, &["stats", "--symbols", &s("s1.csv"), "--c-value", "-3", "--report", &s("x.json")]);
    assert_eq!(o.status.code(), Some(2));
}
