use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mimo_noma::experiments::SecondAxis;
use mimo_noma::SystemConfig;
use nomasim::config_file::Origin;
use nomasim::{parse_config, ParseError};

fn nomasim(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nomasim"))
        .args(args)
        .current_dir(dir)
        .env_remove("NOMASIM_OUT_DIR")
        .output()
        .unwrap()
}

#[test]
fn empty_file_gives_defaults() {
    let cfg = parse_config("", &[]).unwrap();
    assert_eq!(cfg.system, SystemConfig::default());
    assert_eq!(cfg.system.tx_antennas, 3);
    assert_eq!(cfg.system.rx_antennas, 3);
    assert_eq!(cfg.system.bandwidth_hz, 10e6);
    assert_eq!(cfg.system.noise_density_dbm_hz, -174.0);
    assert_eq!(cfg.system.pathloss_db(1.0), 114.0);
}

#[test]
fn comments_blank_lines_and_overrides() {
    let text = "# power\n\ntx_power_dbm = 40  # trailing\nrequesting_axis = target_sinr\n";
    let cfg = parse_config(text, &["tx_power_dbm=35".into()]).unwrap();
    assert_eq!(cfg.system.tx_power_dbm, 35.0);
    assert_eq!(cfg.params.requesting_axis, SecondAxis::TargetSinrDb);
}

#[test]
fn malformed_line_cites_its_number() {
    let err = parse_config("trials = 5\nnot a pair\n", &[]).unwrap_err();
    assert!(matches!(&err, ParseError::Syntax { origin: Origin::Line(2), .. }));
    assert!(err.to_string().contains("line 2"));
}

#[test]
fn unknown_key_is_named() {
    let err = parse_config("antennas = 3\n", &[]).unwrap_err();
    assert_eq!(
        err,
        ParseError::UnknownKey {
            origin: Origin::Line(1),
            key: "antennas".into()
        }
    );
    let err = parse_config("", &["colour=blue".into()]).unwrap_err();
    assert!(err.to_string().contains("override `colour=blue`"));
}

#[test]
fn invalid_values_are_named_per_field() {
    let err = parse_config("tx_power_dbm = loud\n", &[]).unwrap_err();
    assert!(err.to_string().contains("tx_power_dbm"));
    let err = parse_config("rx_antennas = 2\n", &[]).unwrap_err();
    assert!(err.to_string().contains("rx_antennas"));
    assert!(parse_config("omega1 = 1.5\n", &[]).is_err());
    assert!(parse_config("grid2 = 1,2\n", &[]).is_err());
}

#[test]
fn two_point_split_sweep_has_two_rows_per_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = nomasim(
        &["sweep-split", "--trials", "5", "--set", "grid=0.2,0.8", "--out", "s.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sweep_point,scheme,metric,mean,stderr,trials");
    for scheme in ["noma", "oma"] {
        let rows = lines.iter().filter(|l| l.split(',').nth(1) == Some(scheme)).count();
        assert_eq!(rows, 2, "{scheme}");
    }
    assert!(dir.path().join("s.meta").exists());
    assert!(dir.path().join("s.plot.py").exists());
}

#[test]
fn metadata_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = nomasim(
        &["admission", "--trials", "20", "--seed", "99", "--set", "grid=0,10", "--set", "grid2=40", "--out", "a.csv"],
        dir.path(),
    );
    assert!(first.status.success());
    let again = nomasim(&["admission", "--config", "a.meta", "--out", "b.csv"], dir.path());
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_nomasim"))
        .args(["ergodic", "--trials", "3", "--set", "grid=10"])
        .env("NOMASIM_OUT_DIR", dir.path().join("runs"))
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("runs/ergodic_power_sweep.csv").exists());
}

#[test]
fn gap_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = nomasim(&["gap", "--seed", "3", "--out", "g.csv"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("within one grid step: yes"), "{stdout}");
}

#[test]
fn verify_exit_status_reflects_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = nomasim(&["verify", "--trials", "200", "--seed", "7", "--out", "v.csv"], dir.path());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let failing = stdout.lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 14);
    assert_eq!(out.status.success(), failing == 0);
    if failing > 0 {
        assert_eq!(out.status.code(), Some(1));
    }
}

#[test]
fn io_failure_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    let out = nomasim(
        &["sweep-power", "--trials", "2", "--set", "grid=0", "--out", "blocker/x.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocker"));
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "tx_antennas = 3\nbogus\n").unwrap();
    let out = nomasim(&["sweep-power", "--config", "c.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}
