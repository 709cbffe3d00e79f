use std::process::{Command, Output};

fn ringleader(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringleader"))
        .args(args)
        .env_remove("MODE")
        .env_remove("RING_SIZE")
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn traced_actor_run_prints_the_election() {
    let out = ringleader(&[
        "--mode",
        "actors",
        "--ring-size",
        "4",
        "--trace",
        "--reps",
        "1",
        "--warmups",
        "0",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    let count = |pat: &str| text.lines().filter(|l| l.contains(pat)).count();
    assert_eq!(count(" send Init {next = ActorId "), 4);
    assert_eq!(count(" send Start to ActorId "), 4);
    assert_eq!(count(" send Winner (ActorId "), 4);
    assert_eq!(count(": I win"), 1);
    assert_eq!(count(": Confirmed"), 1);
    assert!(count("Ignored nomination") >= 1);
}

#[test]
fn control_with_an_empty_ring_succeeds() {
    let out = ringleader(&["--mode", "control", "--ring-size", "0", "--reps", "2"]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).contains("control"));
}

#[test]
fn heat_writes_thirty_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = ringleader(&[
        "--mode",
        "heat",
        "--ring-size",
        "1024",
        "--reps",
        "10",
        "--warmups",
        "0",
        "--seed",
        "3",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("mode,ring_size,seed,rep,wall_ns,messages,winner_ok")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    for (mode, group) in ["control", "actors", "channels"]
        .iter()
        .zip(rows.chunks(10))
    {
        assert!(group
            .iter()
            .all(|r| r[0] == *mode && r[1] == "1024" && r[2] == "3" && r[6] == "true"));
    }
}

#[test]
fn csv_can_go_to_stdout() {
    let out = ringleader(&[
        "--mode",
        "channels",
        "--ring-size",
        "8",
        "--reps",
        "2",
        "--csv",
        "-",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.starts_with("mode,ring_size,seed,rep,wall_ns,messages,winner_ok\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn environment_supplies_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_ringleader"))
        .args(["--reps", "1", "--csv", "-"])
        .env("MODE", "control")
        .env("RING_SIZE", "7")
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("control,7,"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["--mode", "ring"][..],
        &["--ring-size", "many"],
        &["--bogus"],
        &["--mode", "channels", "--ring-size", "1"],
    ] {
        let out = ringleader(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {out:?}");
    }
}

#[test]
fn timeouts_exit_with_one() {
    // Zero seconds is not enough for any election.
    let out = ringleader(&[
        "--mode",
        "actors",
        "--ring-size",
        "512",
        "--timeout",
        "0",
        "--reps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}
