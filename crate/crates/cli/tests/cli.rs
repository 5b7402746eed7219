use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn apmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apmatch"))
        .args(args)
        .output()
        .expect("spawn apmatch")
}

fn ok(args: &[&str]) -> Output {
    let out = apmatch(args);
    assert!(
        out.status.success(),
        "apmatch {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn values(tsv: &str) -> Vec<u64> {
    tsv.lines().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect()
}

#[test]
fn gen_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (t1, p1, t2, p2) = (
        dir.path().join("t1"),
        dir.path().join("p1"),
        dir.path().join("t2"),
        dir.path().join("p2"),
    );
    ok(&["gen", "--n", "1024", "--w", "64", "--seed", "7", "--text", s(&t1), "--pattern", s(&p1)]);
    ok(&["gen", "--n", "1024", "--w", "64", "--seed", "7", "--text", s(&t2), "--pattern", s(&p2)]);
    let (a, b) = (fs::read(&t1).unwrap(), fs::read(&t2).unwrap());
    assert_eq!(a.len(), 1024);
    assert_eq!(fs::read(&p1).unwrap().len(), 64);
    assert_eq!(a, b);
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
}

#[test]
fn planted_copy_is_found_by_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t"), dir.path().join("p"));
    ok(&[
        "gen", "--n", "1024", "--w", "64", "--plant", "100", "--seed", "7", "--text", s(&t), "--pattern", s(&p),
    ]);
    let text = fs::read(&t).unwrap();
    assert_eq!(&text[99..163], &fs::read(&p).unwrap()[..]);
    let out = ok(&["run", "--mode", "oracle", "--text", s(&t), "--pattern", s(&p)]);
    assert_eq!(values(&String::from_utf8(out.stdout).unwrap())[162], 0);
}

#[test]
fn oracle_example() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t"), dir.path().join("p"));
    fs::write(&t, "abcdef").unwrap();
    fs::write(&p, "cd").unwrap();
    let out = ok(&["run", "--mode", "oracle", "--text", s(&t), "--pattern", s(&p)]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(values(&stdout), vec![2, 2, 1, 0, 1, 2]);
    assert!(stdout.lines().all(|l| l.ends_with("\texact")));
}

#[test]
fn offline_is_deterministic_and_sound() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t"), dir.path().join("p"));
    ok(&[
        "gen", "--n", "2048", "--w", "64", "--plant", "500", "--edits", "20", "--seed", "3", "--text", s(&t),
        "--pattern", s(&p),
    ]);
    let run = |extra: &[&str]| {
        let mut args = vec!["run", "--mode", "offline", "--text", s(&t), "--pattern", s(&p), "--seed", "11"];
        args.extend_from_slice(extra);
        ok(&args).stdout
    };
    let a = run(&[]);
    assert_eq!(a, run(&[]));
    assert_eq!(a, run(&["--parallel"]));

    let approx = dir.path().join("a.tsv");
    let oracle = dir.path().join("o.tsv");
    fs::write(&approx, &a).unwrap();
    fs::write(&oracle, ok(&["run", "--mode", "oracle", "--text", s(&t), "--pattern", s(&p)]).stdout).unwrap();
    let report = String::from_utf8(
        ok(&["eval", "--approx", s(&approx), "--oracle", s(&oracle), "--theta-w", "22"]).stdout,
    )
    .unwrap();
    assert!(report.lines().any(|l| l == "violations=0"), "{report}");
}

#[test]
fn eval_identical_and_shifted() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    fs::write(&a, "1\t3\texact\n2\t5\texact\n").unwrap();
    fs::write(&b, "1\t4\tapprox\n2\t6\tapprox\n").unwrap();
    let same = String::from_utf8(ok(&["eval", "--approx", s(&a), "--oracle", s(&a)]).stdout).unwrap();
    assert!(same.contains("violations=0\n") && same.contains("ratio_max=1.0000\n"));
    let plus = String::from_utf8(ok(&["eval", "--approx", s(&b), "--oracle", s(&a)]).stdout).unwrap();
    assert!(plus.contains("violations=0\n") && plus.contains("gap_max=1\n"));
    let minus = String::from_utf8(ok(&["eval", "--approx", s(&a), "--oracle", s(&b)]).stdout).unwrap();
    assert!(minus.contains("violations=2\n"));
}

#[test]
fn online_boundaries_only_from_stdin() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t"), dir.path().join("p"));
    ok(&["gen", "--n", "512", "--w", "128", "--seed", "1", "--text", s(&t), "--pattern", s(&p)]);
    let mut child = Command::new(env!("CARGO_BIN_EXE_apmatch"))
        .args([
            "run", "--mode", "online", "--pattern", s(&p), "--boundaries-only", "--w1", "8", "--w2", "32", "--theta",
            "1/4",
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&fs::read(&t).unwrap()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let ts: Vec<usize> = stdout.lines().map(|l| l.split('\t').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ts, (1..=16).map(|b| 32 * b).collect::<Vec<_>>());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().any(|l| l == "cap_breaches=0"), "{stderr}");
}

#[test]
fn trace_boxes_are_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p, tr) = (dir.path().join("t"), dir.path().join("p"), dir.path().join("trace.jsonl"));
    ok(&["gen", "--n", "256", "--w", "64", "--plant", "10", "--seed", "2", "--text", s(&t), "--pattern", s(&p)]);
    ok(&["run", "--mode", "offline", "--text", s(&t), "--pattern", s(&p), "--trace-boxes", s(&tr)]);
    let trace = fs::read_to_string(&tr).unwrap();
    assert!(!trace.is_empty());
    for line in trace.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["cbox"]["bound"].is_u64());
        assert!(v["provenance"] == "dense" || v["provenance"] == "extension");
    }
}

#[test]
fn validation_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let (t, p) = (dir.path().join("t"), dir.path().join("p"));
    fs::write(&t, "abcdef").unwrap();
    fs::write(&p, "cd").unwrap();
    let out = apmatch(&["run", "--mode", "offline", "--text", s(&t), "--pattern", s(&p)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle"));
    let out = apmatch(&["run", "--mode", "offline", "--text", s(&t), "--pattern", s(&p), "--theta", "0.3"]);
    assert!(!out.status.success());
    let out = apmatch(&["run", "--mode", "oracle", "--text", "/nonexistent/x", "--pattern", s(&p)]);
    assert!(!out.status.success());
}

#[test]
fn bench_prints_table() {
    let out = ok(&["bench", "--n", "512", "--w", "64,128", "--reps", "1"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert!(lines[0].starts_with("n\tw\treps"));
    assert_eq!(lines.len(), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("offline_w_exponent="));
}
