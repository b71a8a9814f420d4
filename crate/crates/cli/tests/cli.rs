//! Exit codes and flags of the binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_valring"))
}

fn scenario(name: &str) -> String {
    format!("{}/scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn exit_codes() {
    let ok = bin().args(["run", &scenario("hasse-F5")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let dir = std::env::temp_dir().join(format!("valring-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "schema = \"valring-scenario/1\"\nname = \"x\"\nprecision = \"1\"\n[field]\np = 4\n").unwrap();
    let out = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("field.p"));

    let failing = dir.join("fail.toml");
    let text = std::fs::read_to_string(scenario("threshold")).unwrap().replace("expect_error = \"HorizonExhausted\"\n", "");
    std::fs::write(&failing, text).unwrap();
    let out = bin().args(["run", failing.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn structured_report_and_verify() {
    let dir = std::env::temp_dir().join(format!("valring-cli-v-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("r.json");
    let st = bin()
        .args(["run", &scenario("geometric-F2"), "--report", "structured", "--tasks", "0,classify", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.trim_start().starts_with('{'));
    assert!(text.contains("\"op\": \"classify\"") && !text.contains("\"op\": \"image\""));
    let v = bin().arg("verify").arg(&out).output().unwrap();
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn flag_overrides_are_recorded() {
    let out = bin().args(["run", &scenario("hasse-F5"), "--seed", "9", "--precision", "4", "--horizon", "3"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 9\n") && text.contains("precision = (4)\n") && text.contains("horizon = 3\n"));
}
