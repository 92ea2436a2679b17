use std::process::{Command, Output};

fn toepl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toepl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn debruijn_dot_for_grigorchuk_level_one() {
    let o = toepl(&["debruijn", "--spec", "bundled:grigorchuk", "--L", "1", "--format", "dot"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let edges = text.lines().filter(|l| l.contains("->")).count();
    let nodes = text.lines().filter(|l| l.contains("[label") && !l.contains("->")).count();
    assert_eq!((nodes, edges), (4, 6));
}

#[test]
fn debruijn_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let o = toepl(&[
        "debruijn", "--spec", "bundled:pd", "--L", "3", "--format", "json", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // period doubling: p(3) = 5 vertices, p(4) = 6 edges
    assert_eq!(v["vertices"].as_array().unwrap().len(), 5);
    assert_eq!(v["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn complexity_table_rows_agree() {
    let o = toepl(&["complexity", "--spec", "bundled:pd", "--max-L", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("L,formula,branch,oracle"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 65);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert_eq!(r[1], r[3]);
    }
}

#[test]
fn complexity_json_formula_only() {
    let o = toepl(&[
        "complexity", "--spec", "bundled:grigorchuk", "--max-L", "10", "--mode", "formula", "--out",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 11);
    assert!(rows[3].get("oracle").is_none());
    assert_eq!(rows[1]["formula"], "4");
}

#[test]
fn output_is_deterministic() {
    let args = ["spectrum", "--spec", "bundled:pd", "--k", "4", "--grid", "1001"];
    let a = toepl(&args);
    let b = toepl(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let dot = ["debruijn", "--spec", "bundled:nonb", "--L", "6"];
    assert_eq!(toepl(&dot).stdout, toepl(&dot).stdout);
}

#[test]
fn spectrum_of_explicit_period() {
    // free period "a" with g = 0: the band [-2, 2]
    let o = toepl(&[
        "spectrum", "--spec", "bundled:pd", "--period", "a", "--g", "a=0,b=1", "--range", "-3,3",
        "--grid", "601",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let iv = v["intervals"].as_array().unwrap();
    assert_eq!(iv.len(), 1);
    assert!((iv[0]["lo"].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((iv[0]["hi"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn verify_passes_on_bundled_spec() {
    let o = toepl(&["verify", "--spec", "bundled:grigorchuk", "--depth", "4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn verify_json_for_sturmian() {
    let o = toepl(&["verify", "--spec", "bundled:fibonacci", "--depth", "6", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] != "fail"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(toepl(&["complexity", "--spec", missing.to_str().unwrap()]).status.code(), Some(5));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"alphabet": ["a"], "a": ["a"], "n": [1]}"#).unwrap();
    assert_eq!(toepl(&["complexity", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(toepl(&["complexity", "--spec", "bundled:nosuch"]).status.code(), Some(2));

    // pd has no three-block pattern of length 3 at the origin
    let o = toepl(&[
        "gordon", "--spec", "bundled:pd", "--energy", "0.5", "--l", "3", "--kind", "left3",
    ]);
    assert_eq!(o.status.code(), Some(3));

    // a finite spec has no levels beyond its data
    let fin = dir.path().join("finite.json");
    std::fs::write(&fin, r#"{"alphabet": ["a", "b"], "a": ["a", "b"], "n": [2, 2]}"#).unwrap();
    let o = toepl(&["blocks", "--spec", fin.to_str().unwrap(), "--k-max", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gordon_scan_and_lyapunov() {
    let o = toepl(&["gordon", "--spec", "bundled:pd", "--energy", "0.3", "--k-max", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reps = v.as_array().unwrap();
    assert!(!reps.is_empty());
    assert!(reps.iter().all(|r| r["bound_ok"] == true));

    let o = toepl(&["lyapunov", "--spec", "bundled:pd", "--energy", "0.1", "--j-max", "2000", "--stride", "500"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn potential_file() {
    let dir = tempfile::tempdir().unwrap();
    let pot = dir.path().join("pot.json");
    std::fs::write(
        &pot,
        r#"{"f": {"const": 1.0}, "g": {"letters": {"a": 0.0, "b": 1.0}}}"#,
    )
    .unwrap();
    let with_file = toepl(&["tracemap", "--spec", "bundled:pd", "--k-max", "6", "--energies", "0.2,-1.1",
        "--potential", pot.to_str().unwrap()]);
    let with_lambda = toepl(&["tracemap", "--spec", "bundled:pd", "--k-max", "6", "--energies", "0.2,-1.1"]);
    assert!(with_file.status.success());
    assert_eq!(with_file.stdout, with_lambda.stdout);

    std::fs::write(&pot, r#"{"f": {"letters": {"a": 0.0, "b": 1.0}}, "g": {"const": 0.0}}"#).unwrap();
    let o = toepl(&["tracemap", "--spec", "bundled:pd", "--potential", pot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn words_commands() {
    let o = toepl(&["blocks", "--spec", "bundled:grigorchuk", "--k-max", "2"]);
    assert!(stdout(&o).contains("2,7,c,2,abacaba"));
    let o = toepl(&["sturmian", "--spec", "bundled:fibonacci", "--k-max", "5"]);
    assert!(stdout(&o).contains("5,8,abaababa,true"));
    let o = toepl(&["pq", "--spec", "bundled:fibonacci"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true")));
    let o = toepl(&["verdicts", "--spec", "bundled:pd", "--alpha", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["boshernitzan"]["verdict"], true);
}
