//! Golden catalog, differential fuzzing and step comparison.
//!
//! Each golden case pins an input tree, the key to delete, the expected
//! case and VIP nephew, the reference operation list and (where one exists)
//! the reference step table. Scripts are compared after
//! [`normalize_script`]; step tables row by row.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::color::Color;
use crate::error::{RbError, Result};
use crate::sa::{
    apply_gsar, apply_psar1, apply_psar2, delete_sa_with, vip_color_transition, Classification,
    DbContext, DbSite, SaOptions,
};
use crate::ta::delete_traditional;
use crate::trace::{
    apply_event, count_steps, normalize_script, script, CaseKind, ColorChange, Procedure, Role,
    RuleKind, Trace, TraceEvent,
};
use crate::tree::{Side, Tree};

/// One line of a step table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub rotation: Option<(Side, Role)>,
    pub rule: Option<RuleKind>,
    pub operated: Vec<Role>,
    pub exempted: Vec<Role>,
    /// No double black anywhere after the row.
    pub db_removed: bool,
    /// The tree validates after the row.
    pub balanced: bool,
}

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: &'static str,
    pub shape: &'static str,
    pub delete: i64,
    pub case: CaseKind,
    pub procedure: Procedure,
    pub vip: i64,
    pub vip_final: Color,
    pub black_height: usize,
    /// Reference operation list, verbatim.
    pub script: &'static [&'static str],
    pub rows: Option<Vec<TableRow>>,
}

fn row(
    rotation: Option<(Side, Role)>,
    rule: Option<RuleKind>,
    operated: &[Role],
    exempted: &[Role],
    db_removed: bool,
    balanced: bool,
) -> TableRow {
    TableRow {
        rotation,
        rule,
        operated: operated.to_vec(),
        exempted: exempted.to_vec(),
        db_removed,
        balanced,
    }
}

fn rot(side: Side, role: Role) -> Option<(Side, Role)> {
    Some((side, role))
}

pub fn golden_catalog() -> Vec<GoldenCase> {
    use CaseKind::*;
    use Role::{Db, P, R, S, X};
    use RuleKind::*;
    use Side::{Left, Right};
    let g = |name, shape, delete, case, procedure, vip, vip_final, script, rows| GoldenCase {
        name,
        shape,
        delete,
        case,
        procedure,
        vip,
        vip_final,
        black_height: 2,
        script,
        rows,
    };
    vec![
        g(
            "lr-black-parent-inner-red",
            "B40(B20(-,R30),B50)",
            50,
            LR,
            Procedure::P3,
            30,
            Color::Black,
            &[
                "DB",
                "leftRotate(s(DB))",
                "LL",
                "Δ[DB,r,p]",
                "rightRotate(newDB)",
                "remove DB",
            ],
            Some(vec![
                row(rot(Left, S), None, &[S], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], true, false),
                row(rot(Right, P), None, &[P], &[], true, true),
            ]),
        ),
        g(
            "rl-black-parent-inner-red",
            "B20(B10,B40(R30,-))",
            10,
            RL,
            Procedure::P3,
            30,
            Color::Black,
            &[
                "DB",
                "rightRotate(s(DB))",
                "RR",
                "Δ[DB,r,p]",
                "leftRotate(newDB)",
                "remove DB",
            ],
            Some(vec![
                row(rot(Right, S), None, &[S], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], true, false),
                row(rot(Left, P), None, &[P], &[], false, false),
            ]),
        ),
        g(
            "ll-black-parent-two-red",
            "B40(B30(R20,R35),B50)",
            50,
            LL,
            Procedure::P2,
            20,
            Color::Black,
            &[
                "DB",
                "rightRotate(p)",
                "BST",
                "∂′[DB,p]",
                "newDB",
                "Δ[DB,r,p]",
                "newDB",
                "newDB(root)",
            ],
            Some(vec![
                row(rot(Right, P), None, &[P], &[], false, false),
                row(None, Some(Psar1), &[Db, P], &[X], true, false),
                row(None, Some(Gsar), &[P, R, S], &[], false, false),
                row(None, None, &[], &[], true, true),
            ]),
        ),
        g(
            "rr-black-parent-two-red",
            "B20(B10,B30(R25,R40))",
            10,
            RR,
            Procedure::P2,
            40,
            Color::Black,
            &[
                "DB",
                "leftRotate(p)",
                "BST",
                "∂′[DB,p]",
                "newDB",
                "Δ[DB,r,p]",
                "newDB(root)",
                "B(root)",
            ],
            Some(vec![
                row(rot(Left, P), None, &[P], &[], false, false),
                row(None, Some(Psar1), &[Db, P], &[X], false, false),
                row(None, Some(Gsar), &[P, R, S], &[], false, false),
                row(None, None, &[], &[], true, true),
            ]),
        ),
        g(
            "rr-black-parent-outer-red",
            "B20(B10,B30(-,R40))",
            10,
            RR,
            Procedure::P2,
            40,
            Color::Black,
            &[
                "DB",
                "leftRotate(p(DB))",
                "BST",
                "∂′[DB,p]",
                "BST",
                "Δ[DB,r,p]",
                "newDB(root)",
                "B(root)",
            ],
            Some(vec![
                row(rot(Left, P), None, &[P], &[], false, false),
                row(None, Some(Psar1), &[Db, P], &[], false, false),
                row(None, Some(Gsar), &[P, R, S], &[], false, false),
                row(None, None, &[], &[], true, true),
            ]),
        ),
        g(
            "ll-black-parent-two-black",
            "B40(R30(B20,B35),B50)",
            50,
            LL,
            Procedure::P1,
            35,
            Color::Red,
            &[
                "DB",
                "rightRotate(p)",
                "BST",
                "Δ[DB,r,p]",
                "newDB",
                "∂′[DB,p]",
                "newDB",
                "newDB(root)",
                "B(root)",
            ],
            Some(vec![
                row(rot(Right, P), None, &[P], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], false, false),
                row(None, Some(Psar1), &[P, S], &[X], false, false),
                row(None, None, &[], &[], true, true),
            ]),
        ),
        g(
            "rr-black-parent-two-black",
            "B20(B10,R30(B25,B40))",
            10,
            RR,
            Procedure::P1,
            25,
            Color::Red,
            &[
                "DB",
                "leftRotate(p)",
                "BST",
                "Δ[DB,r,p]",
                "∂′[DB,p]",
                "B(root)",
            ],
            Some(vec![
                row(rot(Left, P), None, &[P], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], false, false),
                row(None, Some(Psar1), &[P, S], &[X], false, false),
                row(None, None, &[], &[], true, true),
            ]),
        ),
        g(
            "lr-red-parent-inner-red",
            "B30(R20(B10(-,R19),B25),B40)",
            25,
            LR,
            Procedure::P4,
            19,
            Color::Red,
            &[
                "DB",
                "leftRotate(s)",
                "LL",
                "Δ[DB,r,p]",
                "rightRotate(p)",
                "BST",
                "∂″[r]",
            ],
            Some(vec![
                row(rot(Left, S), None, &[S], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], true, false),
                row(rot(Right, P), None, &[P], &[], true, false),
                row(None, Some(Psar2), &[R], &[P, S], true, true),
            ]),
        ),
        g(
            "rl-red-parent-inner-red",
            "B10(B5,R20(B15,B30(R25,-)))",
            15,
            RL,
            Procedure::P4,
            25,
            Color::Red,
            &[
                "DB",
                "rightRotate(s)",
                "RR",
                "Δ[DB,r,p]",
                "leftRotate(p)",
                "BST",
                "∂″[r]",
            ],
            Some(vec![
                row(rot(Right, S), None, &[S], &[], false, false),
                row(None, Some(Gsar), &[Db, R, P], &[], true, false),
                row(rot(Left, P), None, &[P], &[], true, false),
                row(None, Some(Psar2), &[R], &[P, S], true, true),
            ]),
        ),
        g(
            "ll-red-parent-outer-red",
            "B40(R30(B20(R15,-),B35),B50)",
            35,
            LL,
            Procedure::P5,
            15,
            Color::Black,
            &["DB", "rightRotate(p)", "RR", "∂′[DB,p]", "BST", "∂″[r]"],
            Some(vec![
                row(rot(Right, P), None, &[P], &[], false, false),
                row(None, Some(Psar1), &[Db, R], &[], true, false),
                row(None, Some(Psar2), &[R], &[P, S], true, true),
            ]),
        ),
        g(
            "rr-red-parent-outer-red",
            "B10(B5,R20(B15,B30(-,R40)))",
            15,
            RR,
            Procedure::P5,
            40,
            Color::Black,
            &["DB", "leftRotate(p)", "LL", "∂′[DB,p]", "BST", "∂″[r]"],
            None,
        ),
        g(
            "ll-red-sibling-red-grandnephew",
            "B66(R60(B50(-,R55),B63),B70)",
            70,
            LL,
            Procedure::P1,
            63,
            Color::Red,
            &[
                "DB",
                "rightRotate(p)",
                "Δ[DB,r,p]",
                "RL",
                "Δ[DB,r,p]",
                "BST",
                "∂″[r]",
            ],
            None,
        ),
    ]
}

fn has_double_black(tree: &Tree) -> bool {
    tree.phantom().is_some()
        || tree
            .validate()
            .iter()
            .any(|v| v.kind == crate::tree::ViolationKind::DoubleBlackPresent)
}

/// Step table of a symbolic trace: one row per rotation or rule. Removing
/// a DB right after a rotation shares that rotation's row; after a rule it
/// gets a row of its own.
pub fn table_rows(trace: &Trace) -> Result<Vec<TableRow>> {
    let mut tree = trace.initial_tree.to_tree()?;
    let mut rows: Vec<TableRow> = Vec::new();
    for ev in trace.events() {
        apply_event(&mut tree, ev)?;
        match ev {
            TraceEvent::Rotate {
                direction, role, ..
            } => {
                let role = role.unwrap_or(Role::P);
                rows.push(row(
                    Some((*direction, role)),
                    None,
                    &[role],
                    &[],
                    false,
                    false,
                ));
            }
            TraceEvent::RuleApplied {
                rule,
                operands,
                exempted,
                ..
            } => {
                let roles =
                    |ops: &[crate::trace::Operand]| ops.iter().map(|o| o.role).collect::<Vec<_>>();
                rows.push(row(
                    None,
                    Some(*rule),
                    &roles(operands),
                    &roles(exempted),
                    false,
                    false,
                ));
            }
            TraceEvent::DbRemoved { .. } | TraceEvent::RootBlackened { .. } => {
                let fold = rows.last().is_some_and(|r| r.rotation.is_some());
                if !fold {
                    rows.push(row(None, None, &[], &[], false, false));
                }
            }
            _ => continue,
        }
        if let Some(last) = rows.last_mut() {
            last.db_removed = !has_double_black(&tree);
            last.balanced = tree.validate().is_empty();
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct GoldenOutcome {
    pub name: &'static str,
    pub expected_script: Vec<String>,
    pub actual_script: Vec<String>,
    pub script_ok: bool,
    pub expected_rows: Option<Vec<TableRow>>,
    pub actual_rows: Vec<TableRow>,
    pub case_ok: bool,
    pub vip_predicted: Option<Color>,
    pub vip_observed: Option<Color>,
    pub vip_expected: Color,
    pub black_height: Option<usize>,
    pub balanced: bool,
    pub sa_steps: usize,
    pub ta_steps: usize,
}

impl GoldenOutcome {
    pub fn rows_ok(&self) -> Option<bool> {
        self.expected_rows.as_ref().map(|e| *e == self.actual_rows)
    }

    pub fn vip_ok(&self) -> bool {
        self.vip_predicted == self.vip_observed && self.vip_observed == Some(self.vip_expected)
    }

    pub fn never_slower(&self) -> bool {
        self.sa_steps <= self.ta_steps
    }
}

/// First context seen by the symbolic engine during one deletion.
struct FirstContext {
    case: Option<(CaseKind, Procedure)>,
    vip: Option<i64>,
    predicted: Option<Color>,
}

pub fn run_golden(case: &GoldenCase) -> Result<GoldenOutcome> {
    let mut tree = Tree::from_shape(case.shape)?;
    let mut first = FirstContext {
        case: None,
        vip: None,
        predicted: None,
    };
    let mut obs = |t: &Tree, ctx: &DbContext, cls: &Classification| {
        if first.case.is_none() {
            first.case = Some((cls.case, cls.procedure));
            first.vip = cls.vip.map(|v| t.key(v));
            first.predicted = vip_color_transition(t, ctx, cls);
        }
    };
    let trace = delete_sa_with(
        &mut tree,
        case.delete,
        SaOptions {
            observer: Some(&mut obs),
            ..Default::default()
        },
    )?;
    let mut ta_tree = Tree::from_shape(case.shape)?;
    let ta = delete_traditional(&mut ta_tree, case.delete)?;

    let expected_script = normalize_script(case.script);
    let actual_script = normalize_script(&script(&trace));
    let vip_observed = tree.find(case.vip).map(|id| tree.color(Some(id)));
    Ok(GoldenOutcome {
        name: case.name,
        script_ok: expected_script == actual_script,
        expected_script,
        actual_script,
        expected_rows: case.rows.clone(),
        actual_rows: table_rows(&trace)?,
        case_ok: first.case == Some((case.case, case.procedure)) && first.vip == Some(case.vip),
        vip_predicted: first.predicted,
        vip_observed,
        vip_expected: case.vip_final,
        black_height: trace.final_state.black_height,
        balanced: trace.final_state.balanced,
        sa_steps: trace.steps.count,
        ta_steps: count_steps(&ta).count,
    })
}

pub fn run_catalog() -> Result<Vec<GoldenOutcome>> {
    golden_catalog().iter().map(run_golden).collect()
}

/// Named instances for the step comparison. Returns `(TA, SA)` step counts.
pub fn compare_steps(name: &str) -> Result<(usize, usize)> {
    let (shape, key) = match name {
        "comparisonA" => ("B30(R20(B10(-,R19),B25),B40)", 25),
        "comparisonB" => ("B40(B20(-,R30),B50)", 50),
        "redLeaf" => ("B20(R10,R30)", 10),
        other => return Err(RbError::UnknownCase(other.to_string())),
    };
    let mut t = Tree::from_shape(shape)?;
    let ta = delete_traditional(&mut t, key)?;
    let mut t = Tree::from_shape(shape)?;
    let sa = delete_sa_with(&mut t, key, SaOptions::default())?;
    Ok((count_steps(&ta).count, count_steps(&sa).count))
}

pub const COMPARISONS: [&str; 3] = ["comparisonA", "comparisonB", "redLeaf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stop {
    Ops(usize),
    Deletes(usize),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub stop: Stop,
    /// Keys are drawn from `0..key_space`.
    pub key_space: i64,
    /// Negative control: run the symbolic engine with `∂″` disabled.
    pub skip_psar2: bool,
}

impl FuzzConfig {
    pub fn new(seed: u64, stop: Stop) -> Self {
        Self {
            seed,
            stop,
            key_space: 256,
            skip_psar2: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzFailure {
    pub op: usize,
    pub key: i64,
    pub what: String,
    /// Tree before the failing operation, in shape notation.
    pub before: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StepStats {
    pub sa_total: usize,
    pub ta_total: usize,
    pub sa_fewer: usize,
    pub equal: usize,
    pub sa_more: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "op", content = "key", rename_all = "lowercase")]
pub enum FuzzOp {
    Insert(i64),
    Delete(i64),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FuzzReport {
    pub ops: usize,
    /// Workload prefix ending at the first failing operation.
    pub counterexample: Option<Vec<FuzzOp>>,
    /// Symbolic trace of the first failing delete.
    pub failure_trace: Option<Trace>,
    pub inserts: usize,
    pub deletes: usize,
    pub missing_key_deletes: usize,
    pub failures: Vec<FuzzFailure>,
    pub failure_count: usize,
    pub vip_checked: usize,
    pub vip_mismatches: usize,
    pub identity_checked: usize,
    pub identity_mismatches: usize,
    pub steps: StepStats,
    pub elapsed_ms: u128,
}

impl FuzzReport {
    pub fn first_failure_op(&self) -> Option<usize> {
        self.failures.first().map(|f| f.op)
    }

    fn fail(&mut self, op: usize, key: i64, before: &Tree, what: impl Into<String>) {
        self.failure_count += 1;
        if self.failures.len() < 20 {
            self.failures.push(FuzzFailure {
                op,
                key,
                what: what.into(),
                before: before.to_shape(),
            });
        }
    }
}

type ChangeSet = BTreeSet<(Option<i64>, &'static str, &'static str)>;

fn change_set(changes: &[ColorChange]) -> ChangeSet {
    changes
        .iter()
        .map(|c| (c.key, c.before.tag(), c.after.tag()))
        .collect()
}

/// `Δ[DB,r,p]` against `∂′[DB,p]` followed by `∂″[r]` on copies of the
/// current state. `None` when the context has no `p`.
pub fn rule_identity_holds(tree: &Tree, ctx: &DbContext, cls: &Classification) -> Option<bool> {
    let p = ctx.parent?;
    let r = cls.vip.or(ctx.sibling)?;
    let mut a = tree.clone();
    let whole = apply_gsar(&mut a, ctx.db, r, p).map(|o| change_set(&o.changes));
    let mut b = tree.clone();
    let parts = apply_psar1(&mut b, ctx.db, p).and_then(|o1| {
        let o2 = apply_psar2(&mut b, r)?;
        Ok(change_set(&o1.changes)
            .union(&change_set(&o2.changes))
            .cloned()
            .collect::<ChangeSet>())
    });
    Some(match (whole, parts) {
        (Ok(w), Ok(p)) => w == p && a.same_as(&b),
        (Err(_), Err(_)) => true,
        _ => false,
    })
}

#[derive(Default)]
struct Observed {
    /// (DB site, procedure, parent, parent was black) per context.
    contexts: Vec<(DbSite, Procedure, Option<crate::tree::NodeId>, bool)>,
    vip: Option<(i64, Option<Color>)>,
    identity_checked: usize,
    identity_mismatches: usize,
}

/// Random inserts and deletes; after every delete both engines must leave
/// a valid tree with the expected key set, and the symbolic engine's VIP
/// prediction and rule identity are checked at every context.
pub fn fuzz_differential(cfg: FuzzConfig) -> FuzzReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tree = Tree::new();
    let mut report = FuzzReport::default();
    let mut log = Vec::new();
    let done = |r: &FuzzReport| match cfg.stop {
        Stop::Ops(n) => r.ops >= n,
        Stop::Deletes(n) => r.deletes >= n,
    };
    while !done(&report) {
        let op = report.ops;
        report.ops += 1;
        if tree.is_empty() || rng.gen_bool(0.5) {
            report.inserts += 1;
            let before = tree.clone();
            let key = rng.gen_range(0..cfg.key_space);
            log.push(FuzzOp::Insert(key));
            let _ = tree.insert(key);
            if !tree.validate().is_empty() {
                report.fail(op, -1, &before, "insert broke the tree");
            }
            continue;
        }
        let keys = tree.inorder();
        let key = if rng.gen_bool(0.9) {
            keys[rng.gen_range(0..keys.len())]
        } else {
            rng.gen_range(0..cfg.key_space)
        };
        log.push(FuzzOp::Delete(key));
        if !keys.contains(&key) {
            report.missing_key_deletes += 1;
            let (mut a, mut b) = (tree.clone(), tree.clone());
            let sa = delete_sa_with(&mut a, key, SaOptions::default());
            let ta = delete_traditional(&mut b, key);
            if !matches!(sa, Err(RbError::KeyNotFound(_)))
                || !matches!(ta, Err(RbError::KeyNotFound(_)))
                || !a.same_as(&tree)
                || !b.same_as(&tree)
            {
                report.fail(op, key, &tree, "missing key not reported cleanly");
            }
            continue;
        }
        report.deletes += 1;
        let expected: Vec<i64> = keys.iter().copied().filter(|&k| k != key).collect();
        let before = tree.clone();
        let mut ta_tree = tree.clone();
        let mut seen = Observed::default();
        let mut obs = |t: &Tree, ctx: &DbContext, cls: &Classification| {
            seen.contexts.push((
                ctx.db,
                cls.procedure,
                ctx.parent,
                ctx.parent.is_some() && !t.is_red(ctx.parent),
            ));
            if let Some(v) = cls.vip {
                seen.vip = Some((t.key(v), vip_color_transition(t, ctx, cls)));
            }
            if let Some(ok) = rule_identity_holds(t, ctx, cls) {
                seen.identity_checked += 1;
                seen.identity_mismatches += usize::from(!ok);
            }
        };
        let sa = delete_sa_with(
            &mut tree,
            key,
            SaOptions {
                skip_psar2: cfg.skip_psar2,
                observer: Some(&mut obs),
                ..Default::default()
            },
        );
        let ta = delete_traditional(&mut ta_tree, key);
        let (sa, ta) = match (sa, ta) {
            (Ok(s), Ok(t)) => (s, t),
            (s, t) => {
                report.fail(
                    op,
                    key,
                    &before,
                    format!("engine error: sa {:?}, ta {:?}", s.err(), t.err()),
                );
                tree = ta_tree;
                continue;
            }
        };
        if sa.final_state.iterations > before.height() + 6 {
            report.fail(
                op,
                key,
                &before,
                format!(
                    "{} iterations on a tree of height {}",
                    sa.final_state.iterations,
                    before.height()
                ),
            );
        }
        for pair in seen.contexts.windows(2) {
            let ((_, proc, parent, black), (next, ..)) = (pair[0], pair[1]);
            if proc == Procedure::PushUp && black && Some(next) != parent.map(DbSite::Node) {
                report.fail(
                    op,
                    key,
                    &before,
                    "push-up under a black parent did not recur at the parent",
                );
            }
        }
        if let Some(&(_, Procedure::PushUp, Some(_), true)) = seen.contexts.last() {
            report.fail(
                op,
                key,
                &before,
                "push-up under a black parent ended the loop",
            );
        }
        report.identity_checked += seen.identity_checked;
        report.identity_mismatches += seen.identity_mismatches;
        if seen.identity_mismatches > 0 {
            report.fail(op, key, &before, "rule identity mismatch");
        }
        if let Some((vip, predicted)) = seen.vip {
            report.vip_checked += 1;
            let observed = tree.find(vip).map(|id| tree.color(Some(id)));
            if observed != predicted {
                report.vip_mismatches += 1;
                report.fail(
                    op,
                    key,
                    &before,
                    format!("vip {vip}: predicted {predicted:?}, observed {observed:?}"),
                );
            }
        }
        for (name, t) in [("sa", &tree), ("ta", &ta_tree)] {
            let v = t.validate();
            if !v.is_empty() {
                report.fail(op, key, &before, format!("{name} left violations {v:?}"));
            }
            if t.inorder() != expected {
                report.fail(
                    op,
                    key,
                    &before,
                    format!("{name} lost or kept the wrong keys"),
                );
            }
        }
        let (s, t) = (sa.steps.count, ta.steps.count);
        report.steps.sa_total += s;
        report.steps.ta_total += t;
        match s.cmp(&t) {
            std::cmp::Ordering::Less => report.steps.sa_fewer += 1,
            std::cmp::Ordering::Equal => report.steps.equal += 1,
            std::cmp::Ordering::Greater => report.steps.sa_more += 1,
        }
        if report.first_failure_op() == Some(op) && report.failure_trace.is_none() {
            report.failure_trace = Some(sa);
        }
        if cfg.skip_psar2 && !tree.validate().is_empty() {
            // keep the run going from a sound state
            tree = ta_tree;
        }
    }
    if let Some(first) = report.first_failure_op() {
        report.counterexample = Some(log[..=first].to_vec());
    }
    report.elapsed_ms = start.elapsed().as_millis();
    report
}
