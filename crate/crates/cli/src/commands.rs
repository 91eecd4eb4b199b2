//! Each command returns its stdout, stderr and exit code instead of
//! printing, so tests and the binary share one code path.

use std::fmt::Write as _;

use rbsa_core::harness::{compare_steps, fuzz_differential, run_catalog, FuzzConfig, Stop};
use rbsa_core::trace::{script, serialize};
use rbsa_core::{
    delete_sa_with, delete_traditional_with, RbError, SaOptions, TaOptions, Trace, Tree, TreeDoc,
};
use serde::{Deserialize, Serialize};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;
pub const EXIT_ENVIRONMENT: i32 = 4;

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            ..Default::default()
        }
    }

    pub fn error(err: &RbError) -> Self {
        Self {
            stderr: format!("error: {err}\n"),
            code: exit_code(err),
            ..Default::default()
        }
    }
}

pub fn exit_code(err: &RbError) -> i32 {
    match err {
        RbError::KeyNotFound(_) => EXIT_NOT_FOUND,
        RbError::DuplicateKey(_) | RbError::MalformedDocument(_) | RbError::UnknownCase(_) => {
            EXIT_BAD_INPUT
        }
        _ => EXIT_INVALID,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Sa,
    Ta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Dot,
}

/// Exact bytes of a trace document as emitted by the CLI and the service.
pub fn trace_body(trace: &Trace) -> String {
    let mut s = serialize(trace);
    s.push('\n');
    s
}

pub fn run_delete(
    tree: &mut Tree,
    key: i64,
    method: Method,
    snapshots: bool,
) -> Result<Trace, RbError> {
    match method {
        Method::Sa => delete_sa_with(
            tree,
            key,
            SaOptions {
                snapshots,
                ..Default::default()
            },
        ),
        Method::Ta => delete_traditional_with(tree, key, TaOptions { snapshots }),
    }
}

fn validation_lines(tree: &Tree) -> String {
    let v = tree.validate();
    if v.is_empty() {
        return "valid\n".to_string();
    }
    v.iter()
        .map(|v| format!("{:?}: {}\n", v.kind, v.location))
        .collect()
}

pub fn build(keys: &[i64], format: Format) -> Outcome {
    let tree = match Tree::from_keys(keys.iter().copied()) {
        Ok(t) => t,
        Err(e) => return Outcome::error(&e),
    };
    Outcome::ok(match format {
        Format::Text => format!("{}{}", tree.render(), validation_lines(&tree)),
        Format::Json => TreeDoc::from_tree(&tree).to_json() + "\n",
        Format::Dot => tree.to_dot(),
    })
}

pub fn parse_tree(text: &str) -> Result<Tree, RbError> {
    TreeDoc::from_json(text)?.to_tree()
}

pub fn delete(doc: &str, key: i64, method: Method, snapshots: bool) -> Outcome {
    let result = parse_tree(doc).and_then(|mut t| run_delete(&mut t, key, method, snapshots));
    let trace = match result {
        Ok(t) => t,
        Err(e) => return Outcome::error(&e),
    };
    let mut stderr = format!(
        "deleted {key} ({}): {} steps, {} iterations, {}\n",
        if method == Method::Sa { "sa" } else { "ta" },
        trace.steps.count,
        trace.final_state.iterations,
        if trace.final_state.balanced {
            "balanced"
        } else {
            "NOT balanced"
        }
    );
    if method == Method::Sa {
        let _ = writeln!(stderr, "script: [{}]", script(&trace).join(", "));
    }
    Outcome {
        stdout: trace_body(&trace),
        stderr,
        code: if trace.final_state.balanced {
            EXIT_OK
        } else {
            EXIT_INVALID
        },
    }
}

pub fn validate(doc: &str) -> Outcome {
    match parse_tree(doc) {
        Ok(t) => Outcome {
            stdout: validation_lines(&t),
            code: if t.validate().is_empty() {
                EXIT_OK
            } else {
                EXIT_INVALID
            },
            ..Default::default()
        },
        Err(e) => Outcome::error(&e),
    }
}

pub fn compare(name: &str) -> Outcome {
    match compare_steps(name) {
        Ok((ta, sa)) => Outcome::ok(format!("TA={ta} SA={sa}\n")),
        Err(e) => Outcome::error(&e),
    }
}

pub fn fuzz(cfg: FuzzConfig, json: bool) -> Outcome {
    let r = fuzz_differential(cfg);
    let code = if r.failure_count == 0 {
        EXIT_OK
    } else {
        EXIT_INVALID
    };
    if json {
        return Outcome {
            stdout: serde_json::to_string_pretty(&r).expect("report serializes") + "\n",
            code,
            ..Default::default()
        };
    }
    let mut out = String::new();
    let s = &r.steps;
    let _ = writeln!(
        out,
        "ops {} inserts {} deletes {} missing-key deletes {}",
        r.ops, r.inserts, r.deletes, r.missing_key_deletes
    );
    let _ = writeln!(
        out,
        "vip predictions {} mismatches {}",
        r.vip_checked, r.vip_mismatches
    );
    let _ = writeln!(
        out,
        "rule identity contexts {} mismatches {}",
        r.identity_checked, r.identity_mismatches
    );
    let _ = writeln!(
        out,
        "steps SA {} TA {} (SA fewer {}, equal {}, more {})",
        s.sa_total, s.ta_total, s.sa_fewer, s.equal, s.sa_more
    );
    let _ = writeln!(out, "failures {}", r.failure_count);
    for f in &r.failures {
        let _ = writeln!(
            out,
            "  op {} key {}: {} (before: {})",
            f.op, f.key, f.what, f.before
        );
    }
    if let Some(cx) = &r.counterexample {
        let _ = writeln!(out, "counterexample: first {} ops", cx.len());
    }
    Outcome {
        stdout: out,
        code,
        ..Default::default()
    }
}

pub fn fuzz_config(seed: u64, ops: usize, keys: i64, skip_psar2: bool) -> FuzzConfig {
    FuzzConfig {
        key_space: keys,
        skip_psar2,
        ..FuzzConfig::new(seed, Stop::Ops(ops))
    }
}

pub fn golden(json: bool) -> Outcome {
    let outs = match run_catalog() {
        Ok(o) => o,
        Err(e) => return Outcome::error(&e),
    };
    let all_ok = outs
        .iter()
        .all(|o| o.script_ok && o.rows_ok() != Some(false) && o.vip_ok() && o.balanced);
    let code = if all_ok { EXIT_OK } else { EXIT_INVALID };
    if json {
        return Outcome {
            stdout: serde_json::to_string_pretty(&outs).expect("report serializes") + "\n",
            code,
            ..Default::default()
        };
    }
    let mark = |b: bool| if b { "ok" } else { "MISMATCH" };
    let mut out = String::new();
    for o in &outs {
        let rows = o.rows_ok().map_or("-", mark);
        let _ = writeln!(
            out,
            "{:<32} script {:<8} rows {:<8} vip {:<8} bh {:?} steps SA {} TA {}",
            o.name,
            mark(o.script_ok),
            rows,
            mark(o.vip_ok()),
            o.black_height,
            o.sa_steps,
            o.ta_steps
        );
    }
    Outcome {
        stdout: out,
        code,
        ..Default::default()
    }
}
