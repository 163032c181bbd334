use std::fs;
use std::process::{Command, Output};

use hetnet::io::CSV_HEADER;

fn hetnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetnet")).args(args).output().unwrap()
}

#[test]
fn writes_a_csv_any_reader_can_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let run = hetnet(&[
        "--trials", "20", "--snr", "-10,0,10", "--strategy", "no_coord,full_coord",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let mut reader = csv::Reader::from_path(&out).unwrap();
    assert!(reader.headers().unwrap().iter().eq(CSV_HEADER));
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let micro: Vec<_> = records.iter().filter(|r| &r[4] == "micro_cell_rate").collect();
    assert_eq!(micro.len(), 3 * 2);
    for r in micro {
        assert!(r[5].parse::<f64>().unwrap() > 0.0);
        assert_eq!(&r[7], "20");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("net.cfg");
    fs::write(&cfg, "trials: 5000\nseed: 3\nstrategies: [full_coord]\n").unwrap();
    let run = hetnet(&[
        "--config", cfg.to_str().unwrap(), "--trials", "10", "--snr", "10", "--format", "json",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&run.stdout).unwrap();
    assert!(!rows.is_empty());
    for r in rows {
        assert_eq!(r["trials"], 10);
        assert_eq!(r["seed"], 3);
        assert_eq!(r["strategy"], "full_coord");
    }
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| hetnet(args).status.code().unwrap();

    assert_eq!(code(&["--trials", "2", "--snr", "10", "--out", dir.path().join("ok.csv").to_str().unwrap()]), 0);
    let config = code(&["--rho", "1.5"]);
    let io = code(&["--trials", "2", "--snr", "10", "--out", "/nonexistent-dir/x.csv"]);

    let crowded = dir.path().join("crowded.cfg");
    fs::write(&crowded, "placement: edge\nplacement_attempts: 50\n").unwrap();
    let placement = code(&["--config", crowded.to_str().unwrap(), "--microcells", "60", "--trials", "1"]);

    assert_ne!(config, 0);
    assert_ne!(io, 0);
    assert_ne!(placement, 0);
    assert!(config != io && io != placement && config != placement, "{config} {io} {placement}");
}
