//! Acceptance verdict: one PASS/FAIL line per criterion. Run with `--nocapture` to
//! see the table; the test itself fails if any criterion fails.

use std::time::{Duration, Instant};

use rbsa_core::harness::{
    compare_steps, fuzz_differential, run_catalog, FuzzConfig, GoldenOutcome, Stop,
};

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(lines: &[Line]) -> bool {
    println!();
    for l in lines {
        println!(
            "{} {:<24} {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.detail
        );
    }
    lines.iter().all(|l| l.pass)
}

fn failing(outs: &[GoldenOutcome], ok: impl Fn(&GoldenOutcome) -> bool) -> Vec<&'static str> {
    outs.iter().filter(|o| !ok(o)).map(|o| o.name).collect()
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();

    let t0 = Instant::now();
    let outs = run_catalog().expect("catalog runs");
    let golden_time = t0.elapsed();

    let bad = failing(&outs, |o| o.script_ok);
    lines.push(Line {
        name: "golden-scripts",
        pass: bad.is_empty() && golden_time < Duration::from_secs(1),
        detail: format!(
            "{}/{} exact, {golden_time:.2?}; mismatched: {bad:?}",
            outs.len() - bad.len(),
            outs.len()
        ),
    });

    let tabled: Vec<_> = outs.iter().filter(|o| o.rows_ok().is_some()).collect();
    let bad: Vec<_> = tabled
        .iter()
        .filter(|o| o.rows_ok() == Some(false))
        .map(|o| o.name)
        .collect();
    lines.push(Line {
        name: "table-rows",
        pass: bad.is_empty(),
        detail: format!(
            "{}/{} tables exact; mismatched: {bad:?}",
            tabled.len() - bad.len(),
            tabled.len()
        ),
    });

    let a = compare_steps("comparisonA").unwrap();
    let b = compare_steps("comparisonB").unwrap();
    lines.push(Line {
        name: "step-comparison",
        pass: a == (5, 5) && b == (5, 4),
        detail: format!(
            "comparisonA TA={} SA={}, comparisonB TA={} SA={}",
            a.0, a.1, b.0, b.1
        ),
    });

    let bad = failing(&outs, |o| o.balanced && o.black_height == Some(2));
    lines.push(Line {
        name: "black-height",
        pass: bad.is_empty(),
        detail: format!(
            "{} goldens balanced at black height 2; off: {bad:?}",
            outs.len() - bad.len()
        ),
    });

    let t0 = Instant::now();
    let vip_fuzz = fuzz_differential(FuzzConfig::new(42, Stop::Deletes(10_000)));
    let vip_time = t0.elapsed();
    let bad = failing(&outs, |o| o.vip_ok() && o.case_ok);
    lines.push(Line {
        name: "vip-corollaries",
        pass: bad.is_empty() && vip_fuzz.vip_mismatches == 0 && vip_time < Duration::from_secs(30),
        detail: format!(
            "goldens off: {bad:?}; fuzz {} deletes, {} predictions, {} mismatches, {vip_time:.2?}",
            vip_fuzz.deletes, vip_fuzz.vip_checked, vip_fuzz.vip_mismatches
        ),
    });

    let t0 = Instant::now();
    let fuzz = fuzz_differential(FuzzConfig::new(42, Stop::Ops(10_000)));
    let fuzz_time = t0.elapsed();
    lines.push(Line {
        name: "differential-fuzz",
        pass: fuzz.failure_count == 0 && fuzz_time < Duration::from_secs(60),
        detail: format!(
            "{} ops, {} deletes, {} failures, {fuzz_time:.2?}; first: {:?}",
            fuzz.ops,
            fuzz.deletes,
            fuzz.failure_count,
            fuzz.failures.first()
        ),
    });

    let checked = fuzz.identity_checked + vip_fuzz.identity_checked;
    let mismatched = fuzz.identity_mismatches + vip_fuzz.identity_mismatches;
    lines.push(Line {
        name: "rule-identity",
        pass: checked > 0 && mismatched == 0,
        detail: format!("{checked} contexts, {mismatched} mismatches"),
    });

    let bad = failing(&outs, GoldenOutcome::never_slower);
    let s = &fuzz.steps;
    lines.push(Line {
        name: "never-slower",
        pass: bad.is_empty(),
        detail: format!(
            "goldens slower: {bad:?}; fuzz SA {} vs TA {} steps (fewer {}, equal {}, more {})",
            s.sa_total, s.ta_total, s.sa_fewer, s.equal, s.sa_more
        ),
    });

    assert!(report(&lines), "acceptance criteria failed");
}
