use std::process::{Command, Output};

fn djr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_djr"))
        .args(args)
        .env_remove("DJR_CAP")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn block_examples() {
    let o = djr(&["block", "--a", "1", "--b", "2", "--k", "1"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "010\n"));
    let o = djr(&["block", "--a", "1", "--b", "2", "--k", "2", "--pos", "6"]);
    assert_eq!(stdout(&o), "1\n");
    let o = djr(&["block", "--a", "1", "--b", "2", "--k", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn block_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b2.txt");
    let o = djr(&[
        "block",
        "--a",
        "1",
        "--b",
        "2",
        "--k",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(path).unwrap(), "0100101010010\n");
}

#[test]
fn cap_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_djr"))
        .args(["block", "--a", "1", "--b", "2", "--k", "3"])
        .env("DJR_CAP", "50")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = djr(&["block", "--a", "1", "--b", "2", "--k", "3", "--cap", "200"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn residue_commands() {
    assert_eq!(
        stdout(&djr(&["nq", "--b", "2", "--q", "3", "--k-max", "6"])),
        "0 2 4 6\n"
    );
    assert_eq!(
        stdout(&djr(&["skew", "--q", "5", "--b", "2", "--steps", "2"])),
        "(2,1) (4,3)\n"
    );
    assert_eq!(
        djr(&["skew", "--q", "4", "--b", "2"]).status.code(),
        Some(2)
    );
    let csv = stdout(&djr(&[
        "nq", "--b", "2", "--q", "3", "--k-max", "2", "--format", "csv",
    ]));
    assert_eq!(
        csv,
        "q,b,k,h_k_mod_q,in_Nq\n3,2,0,1,1\n3,2,1,0,0\n3,2,2,1,1\n"
    );
}

#[test]
fn rigidity_verdict() {
    let o = djr(&["rigidity", "--a", "1", "--b", "2", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "delta(T^h3) < 1/8: PASS"));
}

#[test]
fn measure_text_and_json() {
    let o = djr(&[
        "measure", "--a", "1", "--b", "2", "--event", "1@0", "--level", "2",
    ]);
    assert!(stdout(&o).starts_with("5/13 ± 32/1575"));
    let o = djr(&[
        "measure", "--a", "1", "--b", "2", "--event", "1@0", "--level", "2", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["num"], "5");
    assert_eq!(v["radius_den"], "1575");
    let o = djr(&["measure", "--a", "1", "--b", "2", "--event", "1@@0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn density_lifted_and_scanned_agree() {
    let lifted = stdout(&djr(&[
        "density",
        "--a",
        "2",
        "--b",
        "3",
        "--event",
        "010@0 & !1@4",
        "--level",
        "4",
    ]));
    let scanned = stdout(&djr(&[
        "density",
        "--a",
        "2",
        "--b",
        "3",
        "--event",
        "010@0 & !1@4",
        "--level",
        "4",
        "--scan",
    ]));
    assert_eq!(lifted, scanned);
    assert!(lifted.starts_with("d_4 = "));
}

#[test]
fn usage_errors() {
    assert_eq!(djr(&["verify", "--b", "2"]).status.code(), Some(2));
    assert_eq!(djr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        djr(&["block", "--a", "2", "--b", "2", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        djr(&["tower", "--a", "1", "--b", "2", "--q", "3", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_file_defaults_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("djr.toml");
    std::fs::write(&path, "a = 1\nb = 2\nformat = \"json\"\n").unwrap();
    let cfg = path.to_str().unwrap();
    let o = djr(&["--config", cfg, "block", "--k", "1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["symbols"], "010");
    let o = djr(&[
        "--config", cfg, "--format", "text", "block", "--k", "1", "--b", "3",
    ]);
    assert_eq!(stdout(&o), "0100\n");
    std::fs::write(&path, "colour = 3\n").unwrap();
    assert_eq!(
        djr(&["--config", cfg, "block", "--a", "1", "--b", "2", "--k", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn tower_report_json() {
    let o = djr(&[
        "tower", "--a", "1", "--b", "2", "--q", "3", "--n", "4", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "claim2",
            "coverage",
            "disjoint_ok",
            "ineq2_ok",
            "ineq3_ok",
            "mu_A",
            "mu_base",
            "tau_ok"
        ]
    );
    let csv = stdout(&djr(&[
        "tower", "--a", "1", "--b", "2", "--q", "3", "--n", "4", "--format", "csv",
    ]));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn verify_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut docs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.json"));
        let o = djr(&[
            "verify",
            "--a",
            "1",
            "--b",
            "2",
            "--q-max",
            "5",
            "--k-max",
            "4",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert!(matches!(o.status.code(), Some(0 | 1)));
        docs.push(std::fs::read(path).unwrap());
    }
    assert_eq!(docs[0], docs[1]);
    let v: serde_json::Value = serde_json::from_slice(&docs[0]).unwrap();
    assert_eq!(v["schema"], "djr-report/1");
    assert_eq!(v["checks"].as_array().unwrap().len(), 9);
}
