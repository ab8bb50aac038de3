use std::process::{Command, Output};

use serde_json::Value;

const UNIT_BALL: &str = r#"{"kind":"pball","p":2,"a1":1,"a2":1}"#;
const P4: &str = r#"{"kind":"pball","p":4,"a1":1,"a2":1}"#;
const EX1: &str = r#"{"kind":"generator","profile":{"type":"example1"}}"#;
const EX3: &str = r#"{"kind":"generator","profile":{"type":"example3"}}"#;

fn leray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leray")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = leray(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn code(args: &[&str]) -> i32 {
    leray(args).status.code().expect("exit code")
}

/// Data rows of a CSV table, split on commas.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn domain_info_classes() {
    let v = ok_json(&["domain-info", "--domain", UNIT_BALL]);
    assert_eq!(v["class"], "P");
    assert_eq!((f(&v["p_range"][0]), f(&v["p_range"][1])), (2.0, 2.0));
    for k in ["kappa1", "kappa2", "kappa3"] {
        assert!((f(&v["curvature"][k][0]) - 1.0).abs() < 1e-9 && (f(&v["curvature"][k][1]) - 1.0).abs() < 1e-9);
    }

    let v = ok_json(&["domain-info", "--domain", EX3]);
    assert_eq!(v["class"], "TildeR");
    assert!(v["notes"].as_array().unwrap().iter().any(|n| n == "R-membership fails: p̆* unbounded at s=0"));

    let ex2 = r#"{"kind":"generator","profile":{"type":"example2","nu":0.5}}"#;
    assert_eq!(ok_json(&["domain-info", "--domain", ex2])["class"], "OutsideTildeR");
}

#[test]
fn domain_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ball.json");
    std::fs::write(&path, UNIT_BALL).unwrap();
    let v = ok_json(&["domain-info", "--domain", path.to_str().unwrap()]);
    assert_eq!(v["class"], "P");
}

#[test]
fn piece_norms_unit_ball() {
    let csv = ok(&["piece-norms", "--domain", UNIT_BALL, "--n-max", "5"]);
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "n,m,norm_sq,ks_norm,logI_m1,logI_0,logI_p1");
    let r = rows(&csv);
    assert_eq!(r.len(), 36);
    for row in &r {
        let x: f64 = row[2].parse().unwrap();
        assert!((x - 1.0).abs() < 1e-9, "{row:?}");
    }
    let keys: Vec<(u32, u32)> = r.iter().map(|x| (x[0].parse().unwrap(), x[1].parse().unwrap())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // 17 significant digits
    assert!(r[5][2].split('e').next().unwrap().replace(['-', '.'], "").len() == 17);
}

#[test]
fn piece_norms_column_against_closed_form() {
    // w = 1 on a1|z1|^4 + a2|z2|^4 < 1 gives, along n = 0,
    // |L_{0,m}|^2 = (m+1)^2 / ((m/2 + 1)(3m/2 + 1)).
    let csv = ok(&["piece-norms", "--domain", P4, "--n-max", "40", "--grid", "column"]);
    let r = rows(&csv);
    assert_eq!(r.len(), 41);
    for row in &r {
        let m: f64 = row[1].parse().unwrap();
        let want = (m + 1.0).powi(2) / ((m / 2.0 + 1.0) * (1.5 * m + 1.0));
        let got: f64 = row[2].parse().unwrap();
        assert!((got - want).abs() < 1e-9 * want, "m={m}: {got} vs {want}");
    }
    let last: f64 = r[40][2].parse().unwrap();
    // approaching 4/3 from below at rate 1/m
    assert!(last < 4.0 / 3.0 && 4.0 / 3.0 - last < 2.5e-2);
}

#[test]
fn piece_norms_example1_diagonal_grows() {
    let csv = ok(&["piece-norms", "--domain", EX1, "--n-max", "1000", "--grid", "diagonal"]);
    let d: Vec<f64> = rows(&csv).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(d.len(), 1001);
    assert!(d.windows(2).skip(1).all(|w| w[1] > w[0]));
    assert!(d[1000] > 3.0, "{}", d[1000]);
}

#[test]
fn spectrum_reports() {
    let v = ok_json(&["spectrum", "--domain", UNIT_BALL, "--report-n", "8"]);
    assert_eq!((f(&v["branch"]["lower"]), f(&v["branch"]["upper"])), (1.0, 1.0));
    for fam in ["family_left", "family_right"] {
        let xs = v[fam].as_array().unwrap();
        assert_eq!(xs.len(), 8);
        assert!(xs.iter().all(|x| (f(x) - 1.0).abs() < 1e-12));
    }
    assert!((f(&v["essential_norm"]) - 1.0).abs() < 1e-12);

    let v = ok_json(&["spectrum", "--domain", P4]);
    assert!((f(&v["branch"]["upper"]) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!((f(&v["family_left"][0]) - 4.0 / 3.0).abs() < 1e-12);

    let v = ok_json(&["spectrum", "--domain", UNIT_BALL, "--kind", "ks"]);
    assert_eq!(v["kind"], "ks");
    assert_eq!(f(&v["essential_norm"]), 0.0);
    assert!(v["family_left"].as_array().unwrap().iter().all(|x| f(x) == 0.0));
}

#[test]
fn dual_reports() {
    let v = ok_json(&["dual", "--domain", r#"{"kind":"pball","p":3,"a1":1,"a2":1}"#]);
    assert_eq!(v["polar"]["kind"], "pball");
    assert!((f(&v["polar"]["p"]) - 1.5).abs() < 1e-15);
    assert_eq!(v["verification"]["passed"], true);

    let v = ok_json(&["dual", "--domain", UNIT_BALL]);
    assert!(f(&v["verification"]["max_discrepancy"]) < 1e-9);
    assert_eq!(v["verification"]["checked"], 121);

    let v = ok_json(&["dual", "--domain", EX3, "--n-max", "3", "--measure", r#"{"type":"order_q","q":0.5}"#]);
    assert_eq!(v["verification"]["passed"], true);
    let polar: leray_cli::spec::DomainSpec = serde_json::from_value(v["polar"].clone()).unwrap();
    let d = polar.build().unwrap();
    for s in [1e-6, 0.01, 0.3, 0.8] {
        let want = 2.0 * (10.0f64 / s).ln();
        assert!((d.profile().p(s) - want).abs() < 1e-12 * want);
    }
}

#[test]
fn admissible_tables() {
    let csv = ok(&["admissible", "--domain", P4, "--q=-2.5,-2,-1,0,1,1.9,2,2.5"]);
    assert!(csv.lines().any(|l| l == "# threshold: |q| < 2.0000000000000000e0"));
    let verdicts: Vec<String> = rows(&csv).into_iter().map(|r| r[2].clone()).collect();
    let want = ["NotAdmissible", "NotAdmissible", "Admissible", "Admissible", "Admissible", "Admissible", "NotAdmissible", "NotAdmissible"];
    assert_eq!(verdicts, want);

    let v = ok_json(&["admissible", "--domain", EX3, "--q-range=-1.5:1.5:0.25", "--measure", r#"{"type":"surface"}"#, "--format", "json"]);
    for row in v["rows"].as_array().unwrap() {
        let q = f(&row["q"]);
        assert_eq!(row["admissible"], q.abs() < 1.0, "{row}");
    }
    let surface = v["rows"].as_array().unwrap().last().unwrap();
    assert_eq!(surface["measure"], "surface");
    assert_eq!(surface["verdict"], "NotAdmissible");

    let v = ok_json(&["admissible", "--domain", EX1, "--q", "0", "--format", "json"]);
    assert_eq!(v["rows"][0]["verdict"], "Admissible");
}

#[test]
fn kernel_eval_reproduces_monomials() {
    let v = ok_json(&["kernel-eval", "--domain", P4, "--w", "0.3,0.1,-0.2,0.4", "--n", "3", "--m", "2", "--at", "0.4,0.1,2.0"]);
    assert!((f(&v["coefficient"][0]) - 1.0).abs() < 1e-9 && f(&v["coefficient"][1]).abs() < 1e-9);
    assert!(v["kernel"]["density"].is_array());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["domain-info"]), 2);
    assert_eq!(code(&["domain-info", "--domain", "{not json"]), 2);
    assert_eq!(code(&["domain-info", "--domain", r#"{"kind":"pball","p":0.5,"a1":1,"a2":1}"#]), 2);
    assert_eq!(code(&["domain-info", "--domain", "/nonexistent.json"]), 2);
    assert_eq!(code(&["piece-norms", "--domain", UNIT_BALL, "--tol", "-1"]), 2);
    assert_eq!(code(&["kernel-eval", "--domain", UNIT_BALL, "--w", "0.9,0,0.9,0"]), 2);
    assert_eq!(code(&["dual", "--domain", UNIT_BALL, "--format", "csv"]), 2);

    let out = leray(&["piece-norms", "--domain", P4, "--measure", r#"{"type":"order_q","q":2.5}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("I_1 diverges at s=0"));

    assert_eq!(code(&["spectrum", "--domain", EX3]), 4);
    assert_eq!(code(&["spectrum", "--domain", EX1]), 4);
    assert_eq!(code(&["dual", "--domain", EX1]), 4);
}

#[test]
fn deterministic_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_leray"))
            .env("RAYON_NUM_THREADS", threads)
            .args(["piece-norms", "--domain", EX3, "--measure", r#"{"type":"order_q","q":0.5}"#, "--n-max", "12"])
            .arg("--out")
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("4", "b.csv");
    let c = run("4", "c.csv");
    assert_eq!(a, b);
    assert_eq!(b, c);
}
