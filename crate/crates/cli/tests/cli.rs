use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_indlearn"))
}

fn model(name: &str, file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name).join(file)
}

fn rmc(cmd: &mut Command, name: &str) {
    cmd.args(["--mode", "rmc", "--initial"])
        .arg(model(name, "s0.aut"))
        .arg("--bad")
        .arg(model(name, "sb.aut"))
        .arg("--step")
        .arg(model(name, "step.trd"));
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const SIGMA_STAR: &str = "alphabet o x\nstates 1\ninitial 0\naccepting 0\ntrans 0 o 0\ntrans 0 x 0\n";

#[test]
fn learn_writes_invariant_that_check_accepts() {
    let dir = tempfile::tempdir().unwrap();
    let inv = dir.path().join("inv.aut");
    let stats = dir.path().join("stats.json");
    let table = dir.path().join("table.txt");
    let cnf = dir.path().join("f.cnf");
    let mut cmd = bin();
    cmd.arg("learn");
    rmc(&mut cmd, "equidist");
    cmd.arg("--out").arg(&inv).arg("--stats").arg(&stats);
    cmd.arg("--dump-table").arg(&table).arg("--dump-cnf").arg(&cnf).arg("--self-check");
    let out = cmd.output().unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(json["result"], "valid");
    assert_eq!(json["mode"], "rmc");
    assert_eq!(json["rs_strategy"], "small");
    assert!(json["hypothesis_states"].as_u64().unwrap() >= 1);
    assert!(fs::read_to_string(&cnf).unwrap().lines().any(|l| l.starts_with("p cnf ")));
    assert!(!fs::read_to_string(&table).unwrap().is_empty());

    let mut check = bin();
    check.arg("check");
    rmc(&mut check, "equidist");
    let out = check.arg("--invariant").arg(&inv).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

#[test]
fn check_rejects_universal_language() {
    let dir = tempfile::tempdir().unwrap();
    let inv = dir.path().join("all.aut");
    fs::write(&inv, SIGMA_STAR).unwrap();
    let mut cmd = bin();
    cmd.arg("check");
    rmc(&mut cmd, "equidist");
    let out = cmd.arg("--invariant").arg(&inv).output().unwrap();
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stdout).contains("xox"));
}

#[test]
fn learn_prints_to_stdout_without_out() {
    let mut cmd = bin();
    cmd.arg("learn");
    rmc(&mut cmd, "token_pass");
    let out = cmd.args(["--rs", "short"]).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("alphabet"));
}

#[test]
fn missing_step_is_an_error() {
    let out = bin()
        .args(["learn", "--mode", "rmc", "--initial"])
        .arg(model("equidist", "s0.aut"))
        .arg("--bad")
        .arg(model("equidist", "sb.aut"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--step"));
}

#[test]
fn unknown_flag_is_an_error() {
    let out = bin().args(["learn", "--bogus"]).output().unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn overlapping_separation_exits_unsafe() {
    let dir = tempfile::tempdir().unwrap();
    let all = dir.path().join("all.aut");
    fs::write(&all, SIGMA_STAR).unwrap();
    let out = bin().args(["learn", "--mode", "sep", "--pos"]).arg(&all).arg("--neg").arg(&all).output().unwrap();
    assert_eq!(code(&out), 3);
}

#[test]
fn separation_learns_a_separator() {
    let dir = tempfile::tempdir().unwrap();
    let pos = dir.path().join("pos.aut");
    let neg = dir.path().join("neg.aut");
    let inv = dir.path().join("sep.aut");
    // words starting with x / words starting with o
    fs::write(&pos, "alphabet o x\nstates 2\ninitial 0\naccepting 1\ntrans 0 x 1\ntrans 1 o 1\ntrans 1 x 1\n").unwrap();
    fs::write(&neg, "alphabet o x\nstates 2\ninitial 0\naccepting 1\ntrans 0 o 1\ntrans 1 o 1\ntrans 1 x 1\n").unwrap();
    let out = bin()
        .args(["learn", "--mode", "sep", "--pos"])
        .arg(&pos)
        .arg("--neg")
        .arg(&neg)
        .arg("--out")
        .arg(&inv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin()
        .args(["check", "--mode", "sep", "--pos"])
        .arg(&pos)
        .arg("--neg")
        .arg(&neg)
        .arg("--invariant")
        .arg(&inv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn zero_refinement_budget_times_out() {
    let mut cmd = bin();
    cmd.arg("learn");
    rmc(&mut cmd, "equidist");
    let out = cmd.args(["--max-refinements", "0"]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_on_empty_directory_writes_header() {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    fs::create_dir(&models).unwrap();
    let csv = dir.path().join("out.csv");
    let out = bin().arg("bench").arg("--models").arg(&models).arg("--out").arg(&csv).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read_to_string(&csv).unwrap().trim(),
        "model,config,repeat,result,wall_ms,mem,mem_hints,val,sat_calls,cores,states"
    );
}

#[test]
fn bench_runs_each_config_and_flags_broken_models() {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    let good = models.join("token_pass");
    fs::create_dir_all(&good).unwrap();
    for f in ["s0.aut", "sb.aut", "step.trd"] {
        fs::copy(model("token_pass", f), good.join(f)).unwrap();
    }
    fs::create_dir(models.join("empty")).unwrap();
    let csv = dir.path().join("out.csv");
    let out = bin()
        .arg("bench")
        .arg("--models")
        .arg(&models)
        .args(["--configs", "small,off:nonstrict", "--repeats", "2", "--jobs", "2", "--timeout-secs", "20"])
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let mut rdr = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!((&rows[0][0], &rows[0][3]), ("empty", "error"));
    let configs: Vec<&str> = rows[1..].iter().map(|r| &r[1]).collect();
    assert_eq!(configs, ["small-idmat", "small-idmat", "off-nonstrict", "off-nonstrict"]);
    assert!(rows[1..].iter().all(|r| &r[3] == "valid"));
}
