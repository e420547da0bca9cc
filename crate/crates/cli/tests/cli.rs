use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pcmmap");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn f1() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/f1.pc")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pcmmap-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_reports_structure() {
    let o = run(&["check", "--circuit", f1().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("nodes: 9") && out.contains("smooth: yes") && out.contains("decomposable: yes"), "{out}");
}

#[test]
fn solve_bound_and_oracle_agree_on_f1() {
    let dir = scratch("f1");
    let inst = dir.join("q.inst");
    std::fs::write(&inst, "q 0 1\n").unwrap();
    let (c, i) = (f1(), inst);
    let trace = dir.join("trace.txt");
    let o = run(&["solve", "--circuit", c.to_str().unwrap(), "--instance", i.to_str().unwrap(), "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("value: 0.42") && stdout(&o).contains("state: 0=1 1=1"), "{}", stdout(&o));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("iter=0 u=0.42"));

    let o = run(&["bound", "--circuit", c.to_str().unwrap(), "--instance", i.to_str().unwrap()]);
    assert!(stdout(&o).contains("upper: 0.42") && stdout(&o).contains("lower: 0.42"));
    let o = run(&["oracle", "--circuit", c.to_str().unwrap(), "--instance", i.to_str().unwrap()]);
    assert!(stdout(&o).contains("value: 0.42"));
    let o = run(&["oracle", "--circuit", c.to_str().unwrap(), "--instance", i.to_str().unwrap(), "--budget", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn timeout_exits_with_two() {
    let dir = scratch("timeout");
    let inst = dir.join("q.inst");
    std::fs::write(&inst, "q 0 1 2 3 4 5 6 7\n").unwrap();
    let c = data("rand16.pc");
    let o = run(&["solve", "--circuit", c.to_str().unwrap(), "--instance", inst.to_str().unwrap(), "--timeout", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status: timeout"));
}

#[test]
fn usage_and_parse_errors_exit_with_one() {
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = scratch("bad");
    let bad = dir.join("bad.pc");
    std::fs::write(&bad, "pc 1\nl 0 0 1\nl 1 0 0\ns 2 2 0 -0.1 1 0.5\nr 2\n").unwrap();
    let o = run(&["check", "--circuit", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") && err.contains("non-positive weight"), "{err}");

    let o = run(&["gen", "--circuit", f1().to_str().unwrap(), "--proportions", "50,50,1", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_is_deterministic() {
    let c = data("rand16.pc");
    let (a, b) = (scratch("gen-a"), scratch("gen-b"));
    for dir in [&a, &b] {
        let o = run(&["gen", "--circuit", c.to_str().unwrap(), "--proportions", "30,30,40", "--count", "3", "--seed", "9", "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for i in 0..3 {
        let name = format!("rand16_30-30-40_{i:03}.inst");
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn bench_writes_csv() {
    let dir = scratch("bench");
    std::fs::copy(data("rand16.pc"), dir.join("rand16.pc")).unwrap();
    std::fs::write(dir.join("broken.pc"), "not a circuit\n").unwrap();
    let csv = dir.join("out.csv");
    let o = run(&[
        "bench", "--circuits", dir.to_str().unwrap(), "--proportions", "50,20,30", "--count", "3", "--verify",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipping"));
    assert!(stdout(&o).contains("verified 3 solved instances"));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("circuit,proportions,instances,solved,mean_seconds\nrand16,\"50,20,30\",3,3,"), "{text}");
}
