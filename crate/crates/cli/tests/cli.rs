use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gammaflow(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammaflow"))
        .env_remove("GAMMAFLOW_CACHE")
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .trim_end()
        .to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn show_and_coeff() {
    let dir = TempDir::new().unwrap();
    let o = gammaflow(dir.path(), &["show", "--n", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "-2*T2^3");

    let o = gammaflow(dir.path(), &["coeff", "--n", "9", "--partition", "8,8,2"]);
    assert_eq!((code(&o), stdout(&o)), (0, "-72".to_string()));

    let o = gammaflow(dir.path(), &["show", "--n", "3", "--output", "json"]);
    assert_eq!(
        stdout(&o),
        r#"{"n":3,"terms":[{"partition":[2,2,2],"coeff":"-2"}]}"#
    );
}

#[test]
fn coeff_weight_mismatch_and_bad_syntax() {
    let dir = TempDir::new().unwrap();
    let o = gammaflow(dir.path(), &["coeff", "--n", "9", "--partition", "8,8"]);
    assert_eq!((code(&o), stdout(&o)), (0, "0".to_string()));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));

    let o = gammaflow(dir.path(), &["coeff", "--n", "9", "--partition", "8;8"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn compute_fills_cache() {
    let dir = TempDir::new().unwrap();
    let o = gammaflow(dir.path(), &["compute", "--n", "10", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["terms"], 69);
    assert!(dir.path().join("R10.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn env_overrides_cache_flag() {
    let flag = TempDir::new().unwrap();
    let env = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gammaflow"))
        .env("GAMMAFLOW_CACHE", env.path())
        .args(["compute", "--n", "5", "--cache-dir"])
        .arg(flag.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env.path().join("R5.json").exists());
    assert!(!flag.path().join("R5.json").exists());
}

#[test]
fn corrupt_cache_exit_code() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gammaflow(dir.path(), &["compute", "--n", "6"])), 0);
    fs::write(dir.path().join("R5.json"), "{}").unwrap();
    assert_eq!(code(&gammaflow(dir.path(), &["show", "--n", "5"])), 65);
}

#[test]
fn verify() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&gammaflow(dir.path(), &["verify", "--max-n", "3"])),
        64
    );

    let o = gammaflow(dir.path(), &["verify", "--max-n", "9", "--output", "json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let golden = v["sections"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == "golden")
        .unwrap();
    assert_eq!(golden["checked"], 5);

    let o = gammaflow(dir.path(), &["verify", "--max-n", "20"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn order_cap() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gammaflow(dir.path(), &["compute", "--n", "21"])), 64);
    assert_eq!(
        code(&gammaflow(
            dir.path(),
            &["compute", "--n", "21", "--order-cap", "21"]
        )),
        0
    );
}

#[test]
fn cumulants_and_derivs() {
    let dir = TempDir::new().unwrap();
    let o = gammaflow(
        dir.path(),
        &[
            "cumulants",
            "--dist",
            "rademacher",
            "--orders",
            "6",
            "--output",
            "json",
        ],
    );
    assert_eq!(
        stdout(&o),
        r#"{"kind":"cumulants","max_order":6,"values":{"2":"1","3":"0","4":"-2","5":"0","6":"16"}}"#
    );
    let o = gammaflow(
        dir.path(),
        &[
            "mmse-derivs",
            "--dist",
            "laplace:1",
            "--orders",
            "2",
            "--output",
            "json",
        ],
    );
    assert_eq!(
        stdout(&o),
        r#"{"kind":"mmse-derivs","max_order":2,"values":{"1":"-4","2":"16"}}"#
    );
    assert_eq!(
        code(&gammaflow(
            dir.path(),
            &["cumulants", "--dist", "cauchy", "--orders", "4"]
        )),
        64
    );
    let missing = dir.path().join("nope.json");
    let dist = format!("discrete:{}", missing.display());
    assert_eq!(
        code(&gammaflow(
            dir.path(),
            &["cumulants", "--dist", &dist, "--orders", "4"]
        )),
        74
    );
}

#[test]
fn discrete_and_moment_files() {
    let dir = TempDir::new().unwrap();
    let pts = dir.path().join("pts.json");
    fs::write(&pts, r#"{"points":[{"x":"2","p":"1/4"}]}"#).unwrap();
    let dist = format!("discrete:{}", pts.display());
    let o = gammaflow(dir.path(), &["cumulants", "--dist", &dist, "--orders", "8"]);
    assert_eq!(
        stdout(&o),
        "K2 = 1\nK3 = 0\nK4 = 1\nK5 = 0\nK6 = -14\nK7 = 0\nK8 = 106"
    );

    let moments = dir.path().join("m.json");
    fs::write(
        &moments,
        r#"{"kind":"moments","max_order":4,"values":{"1":"0","2":"1","3":"0","4":"1"}}"#,
    )
    .unwrap();
    let dist = format!("from-file:{}", moments.display());
    let o = gammaflow(
        dir.path(),
        &[
            "cumulants",
            "--dist",
            &dist,
            "--orders",
            "4",
            "--output",
            "json",
        ],
    );
    assert_eq!(
        stdout(&o),
        r#"{"kind":"cumulants","max_order":4,"values":{"2":"1","3":"0","4":"-2"}}"#
    );
}

#[test]
fn recover_round_trip() {
    let dir = TempDir::new().unwrap();
    let derivs = dir.path().join("d.json");
    let o = gammaflow(
        dir.path(),
        &[
            "mmse-derivs",
            "--dist",
            "uniform",
            "--orders",
            "12",
            "--out",
        ],
    );
    assert_eq!(code(&o), 64, "--out needs a value");
    let d = derivs.to_str().unwrap();
    let o = gammaflow(
        dir.path(),
        &[
            "mmse-derivs",
            "--dist",
            "uniform",
            "--orders",
            "12",
            "--out",
            d,
        ],
    );
    assert_eq!(code(&o), 0);

    let rec = dir.path().join("k.json");
    let o = gammaflow(
        dir.path(),
        &[
            "recover",
            d,
            "--mode",
            "alternating",
            "--output",
            "json",
            "--out",
            rec.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!v["trace"].as_array().unwrap().is_empty());

    let expect = gammaflow(
        dir.path(),
        &[
            "cumulants",
            "--dist",
            "uniform",
            "--orders",
            "13",
            "--output",
            "json",
        ],
    );
    assert_eq!(
        fs::read_to_string(&rec).unwrap().trim_end(),
        stdout(&expect)
    );

    let o = gammaflow(dir.path(), &["recover", d, "--mode", "positive"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn recover_ambiguous_and_irrational() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().join("d.json");
    let ds = d.to_str().unwrap();
    // Four derivatives determine |K_4| but not its sign, which only K_6 would reveal.
    let o = gammaflow(
        dir.path(),
        &[
            "mmse-derivs",
            "--dist",
            "uniform",
            "--orders",
            "4",
            "--out",
            ds,
        ],
    );
    assert_eq!(code(&o), 0);
    let o = gammaflow(dir.path(), &["recover", ds, "--mode", "symmetric-star"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));

    fs::write(
        &d,
        r#"{"kind":"mmse-derivs","max_order":1,"values":{"1":"-2"}}"#,
    )
    .unwrap();
    let o = gammaflow(dir.path(), &["recover", ds, "--mode", "positive"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn bench_reports_counts() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gammaflow(dir.path(), &["bench", "--max-n", "9"])), 64);
    let o = gammaflow(dir.path(), &["bench", "--max-n", "15", "--output", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["monotone_terms"], true);
    let last = v["orders"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(
        (last["n"].clone(), last["terms"].clone()),
        (15.into(), 665.into())
    );
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&gammaflow(dir.path(), &["frobnicate"])), 64);
    assert_eq!(
        code(&gammaflow(
            dir.path(),
            &["recover", "x.json", "--mode", "sideways"]
        )),
        64
    );
    assert_eq!(
        code(&gammaflow(
            dir.path(),
            &["show", "--n", "3", "--threads", "0"]
        )),
        64
    );
    assert_eq!(code(&gammaflow(dir.path(), &["--help"])), 0);
}
