//! Step traces shared by both deletion engines: the event vocabulary, step
//! counting, the `rbsa-trace/1` JSON document, script labels and replay.

use serde::{Deserialize, Serialize};

use crate::color::Color;
use crate::doc::TreeDoc;
use crate::error::{RbError, Result};
use crate::tree::{Phantom, Side, Tree, Violation};

pub const TRACE_VERSION: &str = "rbsa-trace/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sa,
    Ta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    #[serde(rename = "GSAR")]
    Gsar,
    #[serde(rename = "PSAR1")]
    Psar1,
    #[serde(rename = "PSAR2")]
    Psar2,
}

impl RuleKind {
    pub fn symbol(self) -> &'static str {
        match self {
            RuleKind::Gsar => "Δ[DB,r,p]",
            RuleKind::Psar1 => "∂′[DB,p]",
            RuleKind::Psar2 => "∂″[r]",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseKind {
    LL,
    LR,
    RL,
    RR,
    PushUp,
    RootDB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Procedure {
    P1,
    P2,
    P3,
    P4,
    P5,
    /// Red sibling whose inner child has a red child: rotate, swap the
    /// colors of `s` and `p`, and classify the same DB again.
    Exchange,
    PushUp,
    Root,
}

/// Position of a node relative to the double black it was classified
/// against. `Nephew` marks the nephew of a regenerated double black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "DB")]
    Db,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "s")]
    S,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "n")]
    Nephew,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaCase {
    RedSibling,
    BlackSiblingBlackNephews,
    NearRedNephew,
    FarRedNephew,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecolorCause {
    /// A red child took the place of its deleted black parent.
    Replacement,
    Fixup(TaCase),
    /// Final blackening of the node that absorbed the extra black.
    Absorb,
}

/// Where a double black sits: a stored node (`key`) or the NIL child `side`
/// of `parent` (`parent: null` for the root position of an emptied tree).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub key: Option<i64>,
    pub parent: Option<i64>,
    pub side: Option<Side>,
}

/// One color transition. `key: null` is the phantom double black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorChange {
    pub key: Option<i64>,
    pub before: Color,
    pub after: Color,
}

impl ColorChange {
    pub fn visible(&self) -> bool {
        self.before.visible() != self.after.visible() && self.after.visible().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operand {
    pub key: Option<i64>,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "camelCase",
    rename_all_fields = "camelCase"
)]
pub enum TraceEvent {
    Delete {
        key: i64,
        substitute: Option<i64>,
    },
    DbFormed {
        site: Site,
        changes: Vec<ColorChange>,
    },
    Rotate {
        direction: Side,
        pivot: i64,
        role: Option<Role>,
    },
    RuleApplied {
        rule: RuleKind,
        case: CaseKind,
        procedure: Procedure,
        vip: Option<i64>,
        operands: Vec<Operand>,
        exempted: Vec<Operand>,
        changes: Vec<ColorChange>,
        new_db: Option<i64>,
    },
    Recolor {
        cause: RecolorCause,
        changes: Vec<ColorChange>,
    },
    DbRemoved {
        key: Option<i64>,
        changes: Vec<ColorChange>,
    },
    RootBlackened {
        key: Option<i64>,
        changes: Vec<ColorChange>,
    },
    Balanced {
        black_height: Option<usize>,
        violations: Vec<Violation>,
    },
}

impl TraceEvent {
    pub fn changes(&self) -> &[ColorChange] {
        match self {
            TraceEvent::DbFormed { changes, .. }
            | TraceEvent::RuleApplied { changes, .. }
            | TraceEvent::Recolor { changes, .. }
            | TraceEvent::DbRemoved { changes, .. }
            | TraceEvent::RootBlackened { changes, .. } => changes,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(flatten)]
    pub event: TraceEvent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FinalState {
    pub balanced: bool,
    pub black_height: Option<usize>,
    pub violations: Vec<Violation>,
    /// Fixup loop iterations (one per classified double black).
    pub iterations: usize,
    pub tree: TreeDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepCount {
    pub count: usize,
    pub breakdown: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Trace {
    pub version: String,
    pub method: Method,
    pub key: i64,
    pub initial_tree: TreeDoc,
    pub events: Vec<Step>,
    #[serde(rename = "final")]
    pub final_state: FinalState,
    pub steps: StepCount,
}

impl Trace {
    pub fn events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().map(|s| &s.event)
    }
}

/// Collects events while an engine runs.
pub(crate) struct Recorder {
    steps: Vec<Step>,
    snapshots: bool,
}

impl Recorder {
    pub(crate) fn new(snapshots: bool) -> Self {
        Self {
            steps: Vec::new(),
            snapshots,
        }
    }

    pub(crate) fn push(&mut self, tree: &Tree, event: TraceEvent) {
        let snapshot = self.snapshots.then(|| tree.render());
        self.steps.push(Step { event, snapshot });
    }

    pub(crate) fn finish(
        mut self,
        method: Method,
        key: i64,
        initial: TreeDoc,
        tree: &Tree,
        iterations: usize,
    ) -> Trace {
        let violations = tree.validate();
        let black_height = tree.black_height(tree.root()).ok();
        self.push(
            tree,
            TraceEvent::Balanced {
                black_height,
                violations: violations.clone(),
            },
        );
        let steps = count_steps_in(self.steps.iter().map(|s| &s.event));
        Trace {
            version: TRACE_VERSION.to_string(),
            method,
            key,
            initial_tree: initial,
            events: self.steps,
            final_state: FinalState {
                balanced: violations.is_empty(),
                black_height,
                violations,
                iterations,
                tree: TreeDoc::from_tree(tree),
            },
            steps,
        }
    }
}

pub const STEP_DELETE: &str = "Delete";
pub const STEP_ROTATE: &str = "Rotate";
pub const STEP_RECOLOR: &str = "Re-color";

/// One step per deletion, per rotation and per run of consecutive events
/// that visibly recolor a node. Double-black bookkeeping that leaves every
/// drawn color unchanged is not a step.
pub fn count_steps(trace: &Trace) -> StepCount {
    count_steps_in(trace.events())
}

fn count_steps_in<'a>(events: impl Iterator<Item = &'a TraceEvent>) -> StepCount {
    let mut breakdown: Vec<String> = Vec::new();
    for ev in events {
        let label = match ev {
            TraceEvent::Delete { .. } => STEP_DELETE,
            TraceEvent::Rotate { .. } => STEP_ROTATE,
            other if other.changes().iter().any(ColorChange::visible) => STEP_RECOLOR,
            _ => continue,
        };
        if label == STEP_RECOLOR && breakdown.last().map(String::as_str) == Some(STEP_RECOLOR) {
            continue;
        }
        breakdown.push(label.to_string());
    }
    StepCount {
        count: breakdown.len(),
        breakdown,
    }
}

pub fn serialize(trace: &Trace) -> String {
    serde_json::to_string_pretty(trace).expect("traces always serialize")
}

pub fn deserialize(text: &str) -> Result<Trace> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| RbError::MalformedDocument(e.to_string()))?;
    match value.get("version").and_then(|v| v.as_str()) {
        Some(TRACE_VERSION) => {}
        Some(other) => {
            return Err(RbError::MalformedDocument(format!(
                "unsupported version {other:?}"
            )));
        }
        None => return Err(RbError::MalformedDocument("missing version".into())),
    }
    serde_json::from_value(value).map_err(|e| RbError::MalformedDocument(e.to_string()))
}

/// Operation list in the `[DB, leftRotate(s), LL, Δ[DB,r,p], ...]` style.
pub fn script(trace: &Trace) -> Vec<String> {
    let mut out = Vec::new();
    for ev in trace.events() {
        match ev {
            TraceEvent::DbFormed { .. } => out.push("DB".to_string()),
            TraceEvent::Rotate {
                direction,
                pivot,
                role,
            } => {
                let dir = match direction {
                    Side::Left => "leftRotate",
                    Side::Right => "rightRotate",
                };
                let arg = match role {
                    Some(Role::P) => "p".to_string(),
                    Some(Role::S) => "s".to_string(),
                    _ => pivot.to_string(),
                };
                out.push(format!("{dir}({arg})"));
            }
            TraceEvent::RuleApplied { rule, new_db, .. } => {
                out.push(rule.symbol().to_string());
                if new_db.is_some() {
                    out.push("newDB".to_string());
                }
            }
            TraceEvent::DbRemoved { .. } => out.push("removeDB".to_string()),
            TraceEvent::RootBlackened { .. } => out.push("B(root)".to_string()),
            _ => {}
        }
    }
    out
}

/// Reduce a script to its operations: rotations keyed by the role of the
/// pivot (`s` or `p`; a regenerated double black at `p` is `p`) and rule
/// symbols without subscripts. Structural annotations are dropped.
pub fn normalize_script<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels
        .iter()
        .filter_map(|l| {
            let l = l.as_ref().trim();
            for dir in ["leftRotate", "rightRotate"] {
                if let Some(arg) = l.strip_prefix(dir).and_then(|a| a.strip_prefix('(')) {
                    let role = if arg.starts_with('s') {
                        "s"
                    } else if arg.starts_with('p') || arg.starts_with("newDB") {
                        "p"
                    } else {
                        arg.trim_end_matches(')')
                    };
                    return Some(format!("{dir}({role})"));
                }
            }
            ["Δ", "∂′", "∂″"]
                .into_iter()
                .find(|sym| l.starts_with(sym))
                .map(str::to_string)
        })
        .collect()
}

/// Apply one recorded event to `tree`.
pub fn apply_event(tree: &mut Tree, event: &TraceEvent) -> Result<()> {
    let find = |tree: &Tree, key: i64| tree.find(key).ok_or(RbError::KeyNotFound(key));
    match event {
        TraceEvent::Delete { key, .. } => {
            tree.unlink_for_delete(*key)?;
        }
        TraceEvent::DbFormed { site, changes } => {
            if site.key.is_none() {
                let parent = site.parent.map(|k| find(tree, k)).transpose()?;
                tree.set_phantom(Phantom {
                    parent,
                    side: site.side.unwrap_or(Side::Left),
                });
            }
            apply_changes(tree, changes)?;
        }
        TraceEvent::Rotate {
            direction, pivot, ..
        } => {
            let id = find(tree, *pivot)?;
            tree.rotate(id, *direction)?;
        }
        TraceEvent::Balanced { .. } => {}
        other => apply_changes(tree, other.changes())?,
    }
    Ok(())
}

fn apply_changes(tree: &mut Tree, changes: &[ColorChange]) -> Result<()> {
    for ch in changes {
        match ch.key {
            Some(k) => {
                let id = tree.find(k).ok_or(RbError::KeyNotFound(k))?;
                tree.set_color(id, ch.after);
            }
            None => {
                if ch.after == Color::NullLeaf {
                    tree.clear_phantom();
                }
            }
        }
    }
    Ok(())
}

/// Rebuild the initial tree and replay every event.
pub fn replay(trace: &Trace) -> Result<Tree> {
    let mut tree = trace.initial_tree.to_tree()?;
    for ev in trace.events() {
        apply_event(&mut tree, ev)?;
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sa::delete_sa;
    use crate::ta::delete_traditional;

    fn sa(shape: &str, key: i64) -> (Tree, Trace) {
        let mut t = Tree::from_shape(shape).unwrap();
        let tr = delete_sa(&mut t, key).unwrap();
        (t, tr)
    }

    #[test]
    fn json_round_trip() {
        let (_, tr) = sa("B40(B20(-,R30),B50)", 50);
        let text = serialize(&tr);
        assert!(text.contains("\"version\": \"rbsa-trace/1\""));
        assert_eq!(deserialize(&text).unwrap(), tr);
    }

    #[test]
    fn wrong_version_rejected() {
        let (_, tr) = sa("B20(R10,R30)", 10);
        let text = serialize(&tr).replace("rbsa-trace/1", "rbsa-trace/9");
        assert!(matches!(
            deserialize(&text),
            Err(RbError::MalformedDocument(_))
        ));
    }

    #[test]
    fn replay_reaches_final_tree() {
        for (shape, key) in [("B40(B20(-,R30),B50)", 50), ("B20(B10,B30)", 10), ("B5", 5)] {
            let (t, tr) = sa(shape, key);
            assert!(replay(&tr).unwrap().same_as(&t), "{shape}");
            let mut t2 = Tree::from_shape(shape).unwrap();
            let ta = delete_traditional(&mut t2, key).unwrap();
            assert!(replay(&ta).unwrap().same_as(&t2), "{shape}");
        }
    }

    #[test]
    fn double_black_bookkeeping_is_not_a_step() {
        let (_, tr) = sa("B40(B20(-,R30),B50)", 50);
        let steps = count_steps(&tr);
        assert_eq!(steps.count, 4);
        assert_eq!(tr.steps, steps);
    }

    #[test]
    fn script_labels() {
        let (_, tr) = sa("B40(B20(-,R30),B50)", 50);
        assert_eq!(
            script(&tr),
            [
                "DB",
                "leftRotate(s)",
                "Δ[DB,r,p]",
                "newDB",
                "rightRotate(p)",
                "removeDB"
            ]
        );
    }

    #[test]
    fn normalization_keeps_rotations_and_rules() {
        let raw = [
            "DB",
            "leftRotate(s(DB))",
            "LL",
            "Δ[DB,r,p]",
            "rightRotate(newDB)",
            "remove DB",
        ];
        assert_eq!(
            normalize_script(&raw),
            ["leftRotate(s)", "Δ", "rightRotate(p)"]
        );
    }
}
