use std::io::Write;
use std::net::TcpListener;
use std::process::{Command, Output, Stdio};

use rbsa_core::trace::{deserialize, normalize_script, script};

const FIG: &str = r#"{"key":40,"color":"B","left":{"key":20,"color":"B","left":null,"right":{"key":30,"color":"R","left":null,"right":null}},"right":{"key":50,"color":"B","left":null,"right":null}}"#;

fn rbsa(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_rbsa"))
        .args(args)
        .env_remove("RBSA_PORT")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn build_prints_a_valid_tree() {
    let o = rbsa(&["build", "30", "20", "40", "35"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("valid\n"));
    assert_eq!(stdout(&rbsa(&["build"], None)), "(nil)\nvalid\n");
    assert_eq!(rbsa(&["build", "1", "1"], None).status.code(), Some(2));
    assert!(stdout(&rbsa(&["build", "1", "2", "--format", "dot"], None)).starts_with("digraph"));
}

#[test]
fn delete_emits_trace_on_stdout_and_summary_on_stderr() {
    let o = rbsa(&["delete", "--key", "50"], Some(FIG));
    assert_eq!(o.status.code(), Some(0));
    let trace = deserialize(&stdout(&o)).unwrap();
    assert_eq!(
        normalize_script(&script(&trace)),
        ["leftRotate(s)", "Δ", "rightRotate(p)"]
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("4 steps"));

    let ta = rbsa(&["delete", "--key", "50", "--method", "ta"], Some(FIG));
    let ta = deserialize(&stdout(&ta)).unwrap();
    assert_eq!(
        ta.final_state.tree.to_tree().unwrap().inorder(),
        trace.final_state.tree.to_tree().unwrap().inorder()
    );

    assert_eq!(
        rbsa(&["delete", "--key", "99"], Some(FIG)).status.code(),
        Some(3)
    );
    assert_eq!(
        rbsa(&["delete", "--key", "1"], Some("{oops")).status.code(),
        Some(2)
    );
}

#[test]
fn snapshots_flag_embeds_renders() {
    let o = rbsa(&["delete", "--key", "50", "--snapshots"], Some(FIG));
    let trace = deserialize(&stdout(&o)).unwrap();
    assert!(trace.events.iter().all(|s| s.snapshot.is_some()));
}

#[test]
fn validate_reports_red_root() {
    let o = rbsa(
        &["validate"],
        Some(r#"{"key":1,"color":"R","left":null,"right":null}"#),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("RootNotBlack"));
    assert_eq!(rbsa(&["validate"], Some(FIG)).status.code(), Some(0));
}

#[test]
fn compare_and_fuzz() {
    assert_eq!(
        stdout(&rbsa(&["compare", "comparisonB"], None)),
        "TA=5 SA=4\n"
    );
    assert_eq!(
        stdout(&rbsa(&["compare", "comparisonA"], None)),
        "TA=5 SA=5\n"
    );
    assert_eq!(rbsa(&["compare", "nope"], None).status.code(), Some(2));
    let o = rbsa(&["fuzz", "--seed", "42", "--ops", "10000"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("failures 0"));
    let bad = rbsa(&["fuzz", "--ops", "2000", "--skip-psar2", "--json"], None);
    assert_eq!(bad.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert!(report["counterexample"].is_array());
}

#[test]
fn busy_port_exits_4() {
    let held = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = held.local_addr().unwrap().port().to_string();
    let o = rbsa(&["serve", "--port", &port], None);
    assert_eq!(o.status.code(), Some(4));
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rbsa"));
    let o = cmd.arg("serve").env("RBSA_PORT", &port).output().unwrap();
    assert_eq!(o.status.code(), Some(4));
}
