use std::process::{Command, Output};

fn frobg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobg")).args(args).env_remove("FROBG_PRECISION").output().expect("run frobg")
}

#[test]
fn exit_codes() {
    assert_eq!(frobg(&["verify", "cp1", "--param", "r=2", "--checks", "bo8", "--points", "5"]).status.code(), Some(0));
    assert_eq!(frobg(&["symmetry", "cp1", "--inversion"]).status.code(), Some(1));
    assert_eq!(frobg(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(frobg(&["verify", "cp1", "--checks", "nope"]).status.code(), Some(2));
    assert_eq!(frobg(&["verify", "cp1", "--param", "r=x"]).status.code(), Some(2));
    assert_eq!(frobg(&["caustic", "i2", "--ray", "t9"]).status.code(), Some(2));
    assert_eq!(frobg(&["verify", "--model-file", "/nonexistent.toml"]).status.code(), Some(2));
}

#[test]
fn json_report_shape() {
    let out = frobg(&["verify", "eaw_a2", "--checks", "getzler,gamma", "--points", "5", "--seed", "3", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["checks"][0]["name"], "getzler");
    assert_eq!(v["checks"][0]["status"], "pass");
    assert_eq!(v["gamma"]["theorem1"], "-1/16");
}

#[test]
fn precision_from_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_frobg"));
        c.args(["verify", "eaw_a2", "--checks", "getzler", "--points", "3", "--format", "json"]);
        match env {
            Some(v) => c.env("FROBG_PRECISION", v),
            None => c.env_remove("FROBG_PRECISION"),
        };
        c.output().unwrap()
    };
    let low = run(Some("20"));
    assert!(low.status.success());
    assert_ne!(low.stdout, run(None).stdout);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("i2.toml");
    let entry = frobg::catalog::get_model("i2", &[("h".to_string(), frobg::expr::rat(4, 1))].into()).unwrap();
    frobg::catalog::write_model_file(&entry, &path).unwrap();
    let out = frobg(&["verify", "--model-file", path.to_str().unwrap(), "--checks", "getzler,bo8,gamma", "--points", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn lg_and_symmetry_commands() {
    assert!(frobg(&["lg", "--k", "1", "--m", "1", "--coeffs", "1/3,4"]).status.success());
    assert_eq!(frobg(&["lg", "--k", "1", "--m", "2"]).status.code(), Some(2));
    assert!(frobg(&["symmetry", "eaw_a2", "--legendre", "3", "--points", "4"]).status.success());
    assert!(frobg(&["list", "--format", "json"]).status.success());
}
