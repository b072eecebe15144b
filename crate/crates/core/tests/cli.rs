use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dcbpp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcbpp")).args(args).output().expect("binary runs")
}

fn write_instance(dir: &Path, weights: &[u64], capacity: u64) -> String {
    let p = dir.join("inst.json");
    fs::write(&p, format!("{{\"capacity\": {capacity}, \"weights\": {weights:?}}}")).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_is_seeded_and_checked() {
    let a = dcbpp(&["generate", "--n", "10", "--lo", "21", "--hi", "49", "--seed", "5"]);
    let b = dcbpp(&["generate", "--n", "10", "--lo", "21", "--hi", "49", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["capacity"], 120);
    let w = v["weights"].as_array().unwrap();
    assert_eq!(w.len(), 10);
    assert!(w.iter().all(|x| (21..=49).contains(&x.as_u64().unwrap())));

    let same = json(&dcbpp(&["generate", "--n", "4", "--lo", "7", "--hi", "7"]));
    assert!(same["weights"].as_array().unwrap().iter().all(|x| x == 7));
    assert_eq!(dcbpp(&["generate", "--n", "3", "--lo", "130", "--hi", "140"]).status.code(), Some(2));
}

#[test]
fn run_small_instance_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    let v = json(&dcbpp(&["run", "--instance", &inst, "--ansatz", "cdmixer", "--iterations", "30", "--trials", "2"]));
    assert_eq!(v["status"], "ok");
    assert_eq!(v["metrics"]["fr"], 1.0);
    assert_eq!(v["metrics"]["m_opt"], 2);
    assert_eq!(v["metrics"]["fs_unordered"], 1);
    assert_eq!(v["final_solutions"][0][0], "110");
}

#[test]
fn snapshots_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    let hist = dir.path().join("h.csv");
    let v = json(&dcbpp(&[
        "run",
        "--instance",
        &inst,
        "--snapshots",
        "5,50,100",
        "--trials",
        "1",
        "--history",
        hist.to_str().unwrap(),
    ]));
    let snaps: Vec<u64> = v["snapshots"].as_array().unwrap().iter().map(|s| s["iteration"].as_u64().unwrap()).collect();
    assert_eq!(snaps, [5, 50, 100]);
    let csv = fs::read_to_string(hist).unwrap();
    assert!(csv.starts_with("k,trial,iteration,cost\n"));
    // 5 ks, 1 trial, 101 costs each.
    assert_eq!(csv.lines().count(), 1 + 5 * 101);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(dcbpp(&["run", "--instance", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(dcbpp(&["oracle", "--instance", missing.to_str().unwrap()]).status.code(), Some(3));

    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    assert_eq!(dcbpp(&["run", "--instance", &inst, "--stepsize", "50"]).status.code(), Some(2));
    assert_eq!(dcbpp(&["run", "--instance", &inst, "--ansatz", "bogus"]).status.code(), Some(2));

    // No state reaches this threshold, so nothing is kept and no cover exists.
    let out = dcbpp(&["run", "--instance", &inst, "--threshold", "0.999", "--iterations", "5", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "cover_infeasible");

    let big = dir.path().join("big.json");
    fs::write(&big, format!("{{\"capacity\": 120, \"weights\": {:?}}}", vec![30u64; 15])).unwrap();
    assert_eq!(dcbpp(&["oracle", "--instance", big.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn oracle_output() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    let v = json(&dcbpp(&["oracle", "--instance", &inst]));
    assert_eq!((v["fps"].as_u64(), v["m_opt"].as_u64()), (Some(4), Some(2)));
    assert_eq!((v["fs_unordered"].as_u64(), v["fs_ordered"].as_u64()), (Some(1), Some(2)));
    assert!(v.get("ground_states").is_none());
    let v = json(&dcbpp(&["oracle", "--instance", &inst, "--stepsize", "1"]));
    assert_eq!(v["ground_states"].as_array().unwrap().len(), 5);
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, format!("# defaults\ninstance = {inst}\nansatz = qaoa\niterations = 7\ntrials = 1\n")).unwrap();
    let v = json(&dcbpp(&["run", "--config", cfg.to_str().unwrap()]));
    assert_eq!(v["config"]["kind"], "qaoa");
    assert_eq!(v["config"]["opt"]["iterations"], 7);
    let v = json(&dcbpp(&["run", "--config", cfg.to_str().unwrap(), "--iterations", "3", "--ansatz", "cd"]));
    assert_eq!(v["config"]["kind"], "cd");
    assert_eq!(v["config"]["opt"]["iterations"], 3);

    fs::write(&cfg, "unknown_key = 1\n").unwrap();
    assert_eq!(dcbpp(&["run", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_grid_and_single_cell_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), &[2, 3, 4], 5);
    let out = dir.path().join("sweep");
    let o = dcbpp(&[
        "sweep",
        "--instance",
        &inst,
        "--ansatz",
        "qaoa,dcqaoa,cd,cdmixer",
        "--iterations",
        "4,8",
        "--stepsize",
        "1,50",
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4 * 2 * 2);
    // Stepsize 50 has an empty schedule: recorded, not fatal.
    assert_eq!(rows.iter().filter(|r| r.contains(",error: ")).count(), 8);
    assert!(rows[0].starts_with("qaoa,1,1,4,"));

    let single = dir.path().join("single");
    let o = dcbpp(&[
        "sweep",
        "--instance",
        &inst,
        "--ansatz",
        "dcqaoa",
        "--iterations",
        "8",
        "--trials",
        "1",
        "--out",
        single.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let run = dcbpp(&["run", "--instance", &inst, "--ansatz", "dcqaoa", "--iterations", "8", "--trials", "1"]);
    assert_eq!(fs::read(single.join("dcqaoa_p1_s1_it8.json")).unwrap(), run.stdout);
}

#[test]
fn gates_table() {
    let out = dcbpp(&["gates", "--n", "10"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let cnots: Vec<&str> = rows.iter().map(|r| r[3]).collect();
    assert_eq!(cnots, ["90", "180", "90", "90"]);
}
