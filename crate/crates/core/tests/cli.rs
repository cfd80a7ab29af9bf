use std::process::{Command, Output};

fn easyq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_easyq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_csv_has_fixed_header() {
    let o = easyq(&["count", "--cat", "nc", "--upto", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "k,count\n0,1\n1,1\n2,2\n3,5\n4,14\n5,42\n6,132\n");
}

#[test]
fn verify_seeded_sample_succeeds() {
    let o = easyq(&[
        "verify", "--preset", "hpq", "--p", "2", "--q", "1", "--sample", "torus-h", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_failure_reports_residuals() {
    let o = easyq(&["verify", "--preset", "magic", "--n", "3", "--sample", "hq", "--seed", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let residuals = &v["results"][0]["reports"][0]["residuals"];
    if v["pass"] == false {
        assert_eq!(o.status.code(), Some(1));
        assert!(residuals["projections"].as_f64().unwrap() > 0.0);
    } else {
        assert_eq!(o.status.code(), Some(0));
    }
}

#[test]
fn gram_example() {
    let o = easyq(&["gram", "--cat", "nc2", "--k", "4", "--n", "3"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "2\n"));
}

#[test]
fn usage_errors_go_to_stderr() {
    let o = easyq(&["enumerate", "--cat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--help"));
}

#[test]
fn guardrail_and_override() {
    let o = easyq(&["count", "--cat", "nc", "--k", "17"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("size limit"));
    let o = Command::new(env!("CARGO_BIN_EXE_easyq"))
        .args(["count", "--cat", "nc2", "--k", "18"])
        .env("EASYQ_MAX_POINTS", "18")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "k,count\n18,4862\n");
}

#[test]
fn sample_quotient_round_trip_through_files() {
    let dir = std::env::temp_dir().join(format!("easyq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let model = dir.join("model.json");
    let o = easyq(&["sample", "--group", "torus-h", "--p", "1", "--q", "1", "--seed", "3"]);
    std::fs::write(&model, o.stdout).unwrap();
    let path = model.to_str().unwrap();
    let o = easyq(&["verify", "--preset", "hpq", "--file", path, "--p", "1", "--q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = easyq(&["quotient", "--file", path, "--p", "1", "--q", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let quotient = dir.join("quotient.json");
    std::fs::write(&quotient, o.stdout).unwrap();
    let o = easyq(&["verify", "--preset", "magic", "--file", quotient.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_runs_are_byte_identical() {
    for args in [
        &["sample", "--group", "o", "--p", "2", "--q", "1", "--seed", "9"][..],
        &["table", "--identity", "freep", "--upto", "4", "--jobs", "3"][..],
        &["moments", "--law", "free-poisson", "--t", "1/2", "--k", "10", "--format", "csv"][..],
    ] {
        assert_eq!(easyq(args).stdout, easyq(args).stdout);
    }
}

#[test]
fn table_reports_besselcount_columns() {
    let o = easyq(&["table", "--identity", "besselcount", "--upto", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "k,countNCbulletEven,perBlockNCeven,printedFormula,pass\n1,2,2,1,true\n2,16,16,4,true\n3,168,168,21,true\n"
    );
}

#[test]
fn equal_reports_counterexample() {
    let o = easyq(&["equal", "--a", "nc", "--b", "nceven", "--max-points", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["equal"], false);
    assert_eq!(v["counterexample"]["onlyIn"], "a");
    let o = easyq(&["equal", "--a", "nc2", "--b", "nc12&nceven", "--max-points", "6"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn closure_and_tmatrix() {
    let cap = r#"{"k":0,"l":2,"blocks":[[1,2]]}"#;
    let o = easyq(&["closure", "--gen", cap, "--max-points", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0,4,2\n"));
    let o = easyq(&["tmatrix", "--partition", cap, "--p", "1", "--q", "0", "--format", "csv"]);
    assert_eq!(stdout(&o), "c0\n0\n1\n1\n0\n");
}

#[test]
fn witness_search_d1_finds_nothing() {
    let o = easyq(&["witness-search", "--d", "1", "--budget", "400", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["found"], false);
}
