//! Double-black removal by symbolic color arithmetic.
//!
//! A deletion that strips a black from a path leaves a double black (DB).
//! The driver names the nodes around it (`p`, `s`, nephews, the VIP nephew
//! `r` and the other nephew `x`), picks a procedure from their colors and
//! positions, and runs that procedure's script of rotations and rules:
//!
//! * GSAR `Δ[DB,r,p]`: `DB - B`, `r - B`, `p + B`
//! * PSAR1 `∂′[DB,p]`: `DB - B`, `p + B`
//! * PSAR2 `∂″[r]`: `r - B`
//!
//! A rule that turns a black `p` into a new DB either hands it to the next
//! script action or, for the push-up case, restarts the loop one level up.

use crate::color::{color_add, color_sub, Color, ColorTerm};
use crate::doc::TreeDoc;
use crate::error::{RbError, Result};
use crate::trace::{
    CaseKind, ColorChange, Method, Operand, Procedure, RecolorCause, Recorder, Role, RuleKind,
    Site, Trace, TraceEvent,
};
use crate::tree::{NodeId, Phantom, Side, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbSite {
    Node(NodeId),
    Phantom(Phantom),
}

impl DbSite {
    pub fn key(self, tree: &Tree) -> Option<i64> {
        match self {
            DbSite::Node(id) => Some(tree.key(id)),
            DbSite::Phantom(_) => None,
        }
    }

    pub fn parent(self, tree: &Tree) -> Option<NodeId> {
        match self {
            DbSite::Node(id) => tree.parent(id),
            DbSite::Phantom(ph) => ph.parent,
        }
    }

    fn to_site(self, tree: &Tree) -> Site {
        match self {
            DbSite::Node(id) => Site {
                key: Some(tree.key(id)),
                parent: tree.parent(id).map(|p| tree.key(p)),
                side: tree.side_of(id),
            },
            DbSite::Phantom(ph) => Site {
                key: None,
                parent: ph.parent.map(|p| tree.key(p)),
                side: ph.parent.map(|_| ph.side),
            },
        }
    }
}

/// The nodes around a double black. `inner` is the child of `sibling`
/// nearer the DB, `outer` the farther one; the parent doubles as the
/// grandparent of both nephews.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DbContext {
    pub db: DbSite,
    pub parent: Option<NodeId>,
    pub sibling: Option<NodeId>,
    pub side: Side,
    pub inner: Option<NodeId>,
    pub outer: Option<NodeId>,
}

impl DbContext {
    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub case: CaseKind,
    pub procedure: Procedure,
    /// The nephew that changes color.
    pub vip: Option<NodeId>,
    /// The other nephew, when the VIP is one of two.
    pub other: Option<NodeId>,
}

/// Ordered actions of a procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    RotateSibling,
    RotateParent,
    Gsar,
    Psar1,
    Psar2,
    /// `DB - B` on the double black regenerated by the previous rule.
    SettleNewDb,
    /// Second stage of procedure 1: `∂′` on the regenerated DB and its new
    /// parent, written as `Δ + ∂″` when that DB has a red inner nephew.
    AbsorbNewDb,
    /// `s - B` on the risen sibling, handing it the red of the old parent.
    RestoreSibling,
    /// `∂″[s]`, `∂″[p]`: the risen red sibling and the old parent trade colors.
    ExchangeColors,
    BlackenRoot,
}

impl Procedure {
    pub fn script(self) -> &'static [Action] {
        use Action::*;
        match self {
            Procedure::P1 => &[RotateParent, Gsar, AbsorbNewDb],
            Procedure::P2 => &[RotateParent, Psar1, Gsar, SettleNewDb],
            Procedure::P3 => &[RotateSibling, Gsar, RotateParent, SettleNewDb],
            Procedure::P4 => &[RotateSibling, Gsar, RotateParent, Psar2],
            Procedure::P5 => &[RotateParent, Psar1, Psar2, RestoreSibling],
            Procedure::Exchange => &[RotateParent, ExchangeColors],
            Procedure::PushUp => &[Gsar],
            Procedure::Root => &[BlackenRoot],
        }
    }
}

pub fn build_db_context(tree: &Tree, db: DbSite) -> Result<DbContext> {
    let parent = db.parent(tree);
    let side = match db {
        DbSite::Node(id) => tree.side_of(id).unwrap_or(Side::Left),
        DbSite::Phantom(ph) => ph.side,
    };
    let Some(p) = parent else {
        return Ok(DbContext {
            db,
            parent: None,
            sibling: None,
            side,
            inner: None,
            outer: None,
        });
    };
    let s = tree.child(p, side.flip()).ok_or_else(|| {
        let at = db
            .key(tree)
            .map_or_else(|| format!("NIL below {}", tree.key(p)), |k| k.to_string());
        RbError::NoSibling(at)
    })?;
    Ok(DbContext {
        db,
        parent: Some(p),
        sibling: Some(s),
        side,
        inner: tree.child(s, side),
        outer: tree.child(s, side.flip()),
    })
}

/// NIL nephews count as black.
pub fn classify(tree: &Tree, ctx: &DbContext) -> Classification {
    let decide = |case, procedure, vip, other| Classification {
        case,
        procedure,
        vip,
        other,
    };
    let Some(p) = ctx.parent else {
        return decide(CaseKind::RootDB, Procedure::Root, None, None);
    };
    let (outer_case, inner_case) = match ctx.side.flip() {
        Side::Left => (CaseKind::LL, CaseKind::LR),
        Side::Right => (CaseKind::RR, CaseKind::RL),
    };
    let inner_red = tree.is_red(ctx.inner);
    let outer_red = tree.is_red(ctx.outer);

    if tree.is_red(ctx.sibling) {
        let r = ctx.inner.expect("a red sibling has two black children");
        if tree.is_red(tree.child(r, Side::Left)) || tree.is_red(tree.child(r, Side::Right)) {
            return decide(outer_case, Procedure::Exchange, None, None);
        }
        // black outer nephew decides the case, black inner nephew recolors
        return decide(outer_case, Procedure::P1, ctx.inner, ctx.outer);
    }
    if !inner_red && !outer_red {
        return decide(CaseKind::PushUp, Procedure::PushUp, None, None);
    }
    match (tree.is_red(Some(p)), inner_red, outer_red) {
        (false, _, true) => decide(outer_case, Procedure::P2, ctx.outer, ctx.inner),
        (false, true, false) => decide(inner_case, Procedure::P3, ctx.inner, ctx.outer),
        (true, _, true) => decide(outer_case, Procedure::P5, ctx.outer, ctx.inner),
        (true, true, false) => decide(inner_case, Procedure::P4, ctx.inner, ctx.outer),
        (_, false, false) => unreachable!("handled above"),
    }
}

/// Predicted final color of the VIP nephew from its own color, its
/// grandparent's color and (for a red grandparent) its position.
pub fn vip_color_transition(tree: &Tree, ctx: &DbContext, cls: &Classification) -> Option<Color> {
    let vip = cls.vip?;
    let g = tree.color(ctx.parent);
    let r = tree.color(Some(vip));
    let inner = ctx.inner == Some(vip);
    match (g, r) {
        (Color::Black, Color::Red) => Some(Color::Black),
        (Color::Black, Color::Black) => Some(Color::Red),
        // red grandparent, red VIP: an inner VIP is toggled twice
        (Color::Red, Color::Red) if inner => Some(Color::Red),
        (Color::Red, Color::Red) => Some(Color::Black),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleOutcome {
    pub changes: Vec<ColorChange>,
    pub new_db: Option<NodeId>,
}

fn sub_db(tree: &mut Tree, db: DbSite) -> Result<ColorChange> {
    match db {
        DbSite::Node(id) => {
            let before = tree.color(Some(id));
            if before != Color::DoubleBlack {
                return Err(RbError::UndefinedColorOp {
                    op: '-',
                    a: ColorTerm::Stored(before),
                    b: Color::Black,
                });
            }
            let after = color_sub(before, Color::Black)?;
            tree.set_color(id, after);
            Ok(ColorChange {
                key: Some(tree.key(id)),
                before,
                after,
            })
        }
        DbSite::Phantom(_) => {
            let after = color_sub(ColorTerm::NullDoubleBlack, Color::Black)?;
            tree.clear_phantom();
            Ok(ColorChange {
                key: None,
                before: Color::DoubleBlack,
                after,
            })
        }
    }
}

/// `-B` on a red or black node (a toggle).
fn sub_black(tree: &mut Tree, id: NodeId) -> Result<ColorChange> {
    let before = tree.color(Some(id));
    if !matches!(before, Color::Red | Color::Black) {
        return Err(RbError::UndefinedColorOp {
            op: '-',
            a: ColorTerm::Stored(before),
            b: Color::Black,
        });
    }
    let after = color_sub(before, Color::Black)?;
    tree.set_color(id, after);
    Ok(ColorChange {
        key: Some(tree.key(id)),
        before,
        after,
    })
}

fn add_black(tree: &mut Tree, id: NodeId) -> Result<(ColorChange, Option<NodeId>)> {
    let before = tree.color(Some(id));
    let after = tree.add_black(id)?;
    let change = ColorChange {
        key: Some(tree.key(id)),
        before,
        after,
    };
    Ok((change, (after == Color::DoubleBlack).then_some(id)))
}

pub fn apply_gsar(tree: &mut Tree, db: DbSite, r: NodeId, p: NodeId) -> Result<RuleOutcome> {
    let a = sub_db(tree, db)?;
    let b = sub_black(tree, r)?;
    let (c, new_db) = add_black(tree, p)?;
    Ok(RuleOutcome {
        changes: vec![a, b, c],
        new_db,
    })
}

pub fn apply_psar1(tree: &mut Tree, db: DbSite, p: NodeId) -> Result<RuleOutcome> {
    let a = sub_db(tree, db)?;
    let (b, new_db) = add_black(tree, p)?;
    Ok(RuleOutcome {
        changes: vec![a, b],
        new_db,
    })
}

pub fn apply_psar2(tree: &mut Tree, r: NodeId) -> Result<RuleOutcome> {
    Ok(RuleOutcome {
        changes: vec![sub_black(tree, r)?],
        new_db: None,
    })
}

pub type ContextObserver<'a> = dyn FnMut(&Tree, &DbContext, &Classification) + 'a;

#[derive(Default)]
pub struct SaOptions<'a> {
    /// Attach a rendered snapshot to every event.
    pub snapshots: bool,
    /// Fault injection for negative controls: drop every `∂″[r]`.
    pub skip_psar2: bool,
    /// Called with the tree, context and classification before each
    /// procedure runs.
    pub observer: Option<&'a mut ContextObserver<'a>>,
}

pub fn delete_sa(tree: &mut Tree, key: i64) -> Result<Trace> {
    delete_sa_with(tree, key, SaOptions::default())
}

/// Deletes `key` and removes any double black with the symbolic rules. On
/// `KeyNotFound` the tree is untouched.
pub fn delete_sa_with(tree: &mut Tree, key: i64, mut opts: SaOptions<'_>) -> Result<Trace> {
    let initial = TreeDoc::from_tree(tree);
    let mut rec = Recorder::new(opts.snapshots);
    let unlinked = tree.unlink_for_delete(key)?;
    rec.push(
        tree,
        TraceEvent::Delete {
            key,
            substitute: unlinked.substitute,
        },
    );

    let mut pending = None;
    if unlinked.color == Color::Black {
        match unlinked.child {
            Some(c) if tree.is_red(Some(c)) => {
                // R + B = B
                let after = color_add(Color::Red, Color::Black)?;
                tree.set_color(c, after);
                let change = ColorChange {
                    key: Some(tree.key(c)),
                    before: Color::Red,
                    after,
                };
                rec.push(
                    tree,
                    TraceEvent::Recolor {
                        cause: RecolorCause::Replacement,
                        changes: vec![change],
                    },
                );
            }
            Some(c) => {
                let (change, _) = add_black(tree, c)?;
                pending = Some(DbSite::Node(c));
                let site = DbSite::Node(c).to_site(tree);
                rec.push(
                    tree,
                    TraceEvent::DbFormed {
                        site,
                        changes: vec![change],
                    },
                );
            }
            None => {
                // B + NULL_LEAF = DB
                color_add(Color::Black, Color::NullLeaf)?;
                let ph = Phantom {
                    parent: unlinked.parent,
                    side: unlinked.side,
                };
                tree.set_phantom(ph);
                let db = DbSite::Phantom(ph);
                pending = Some(db);
                let site = db.to_site(tree);
                rec.push(
                    tree,
                    TraceEvent::DbFormed {
                        site,
                        changes: vec![],
                    },
                );
            }
        }
    }

    let mut iterations = 0;
    while let Some(db) = pending {
        iterations += 1;
        let ctx = build_db_context(tree, db)?;
        let cls = classify(tree, &ctx);
        if let Some(obs) = opts.observer.as_mut() {
            obs(tree, &ctx, &cls);
        }
        let mut run = Run {
            tree: &mut *tree,
            rec: &mut rec,
            ctx,
            cls,
            skip_psar2: opts.skip_psar2,
        };
        pending = run.execute()?;
    }

    Ok(rec.finish(Method::Sa, key, initial, tree, iterations))
}

/// One procedure run against one context.
struct Run<'t> {
    tree: &'t mut Tree,
    rec: &'t mut Recorder,
    ctx: DbContext,
    cls: Classification,
    skip_psar2: bool,
}

impl Run<'_> {
    fn execute(&mut self) -> Result<Option<DbSite>> {
        let mut db = Some(self.ctx.db);
        let mut new_db = None;
        for &action in self.cls.procedure.script() {
            match action {
                Action::BlackenRoot => self.blacken_root()?,
                Action::RotateParent => self.rotate(self.p(), self.ctx.side, Role::P)?,
                Action::RotateSibling => self.rotate(self.s(), self.ctx.side.flip(), Role::S)?,
                Action::Gsar => {
                    let (r, r_role) = match self.cls.procedure {
                        Procedure::PushUp => (self.s(), Role::S),
                        _ => (self.vip(), Role::R),
                    };
                    // after psar1 regenerated a DB at p, the triple moves up one level
                    let (site, top, roles) = match db {
                        Some(site) => (site, self.p(), [Role::Db, r_role, Role::P]),
                        None => (
                            DbSite::Node(new_db.take().expect("regenerated DB")),
                            self.s(),
                            [Role::P, r_role, Role::S],
                        ),
                    };
                    let operands = vec![
                        self.operand_site(site, roles[0]),
                        self.operand(r, roles[1]),
                        self.operand(top, roles[2]),
                    ];
                    let out = apply_gsar(self.tree, site, r, top)?;
                    db = None;
                    new_db = out.new_db;
                    self.rule(RuleKind::Gsar, operands, vec![], out);
                }
                Action::Psar1 => {
                    let site = db.take().expect("psar1 runs on the original DB");
                    let operands = vec![
                        self.operand_site(site, Role::Db),
                        self.operand(self.p(), Role::P),
                    ];
                    let sib = self
                        .ctx
                        .parent
                        .and_then(|p| self.tree.child(p, self.ctx.side.flip()));
                    let exempted = sib
                        .map(|x| self.operand(x, self.role_of(x)))
                        .into_iter()
                        .collect();
                    let out = apply_psar1(self.tree, site, self.p())?;
                    new_db = out.new_db;
                    self.rule(RuleKind::Psar1, operands, exempted, out);
                }
                Action::Psar2 => {
                    if self.skip_psar2 {
                        continue;
                    }
                    let r = self.vip();
                    let operands = vec![self.operand(r, Role::R)];
                    let exempted = vec![
                        self.operand(self.p(), Role::P),
                        self.operand(self.s(), Role::S),
                    ];
                    let out = apply_psar2(self.tree, r)?;
                    self.rule(RuleKind::Psar2, operands, exempted, out);
                }
                Action::RestoreSibling => {
                    let s = self.s();
                    let operands = vec![self.operand(s, Role::S)];
                    let exempted = vec![
                        self.operand(self.p(), Role::P),
                        self.operand(self.vip(), Role::R),
                    ];
                    let out = apply_psar2(self.tree, s)?;
                    self.rule(RuleKind::Psar2, operands, exempted, out);
                }
                Action::ExchangeColors => {
                    let (s, p) = (self.s(), self.p());
                    for (id, role, other) in [(s, Role::S, Role::P), (p, Role::P, Role::S)] {
                        let operands = vec![self.operand(id, role)];
                        let exempted =
                            vec![self.operand(if role == Role::S { p } else { s }, other)];
                        let out = apply_psar2(self.tree, id)?;
                        self.rule(RuleKind::Psar2, operands, exempted, out);
                    }
                    return Ok(db);
                }
                Action::SettleNewDb => {
                    let id = new_db.take().expect("a rule regenerated a DB");
                    self.settle(id)?;
                }
                Action::AbsorbNewDb => {
                    let id = new_db.take().expect("gsar regenerated a DB at p");
                    new_db = self.absorb(id)?;
                }
            }
        }
        // only the push-up case (or an absorb into a black parent) leaves a
        // DB for the next iteration
        Ok(new_db.map(DbSite::Node))
    }

    fn p(&self) -> NodeId {
        self.ctx.parent.expect("non-root context")
    }

    fn s(&self) -> NodeId {
        self.ctx.sibling.expect("non-root context")
    }

    fn vip(&self) -> NodeId {
        self.cls.vip.expect("procedure with a VIP nephew")
    }

    fn role_of(&self, id: NodeId) -> Role {
        if Some(id) == self.cls.vip {
            Role::R
        } else if Some(id) == self.cls.other {
            Role::X
        } else if Some(id) == self.ctx.sibling {
            Role::S
        } else if Some(id) == self.ctx.parent {
            Role::P
        } else {
            Role::Nephew
        }
    }

    fn operand(&self, id: NodeId, role: Role) -> Operand {
        Operand {
            key: Some(self.tree.key(id)),
            role,
        }
    }

    fn operand_site(&self, site: DbSite, role: Role) -> Operand {
        Operand {
            key: site.key(self.tree),
            role,
        }
    }

    fn rotate(&mut self, pivot: NodeId, direction: Side, role: Role) -> Result<()> {
        self.tree.rotate(pivot, direction)?;
        let pivot = self.tree.key(pivot);
        self.rec.push(
            self.tree,
            TraceEvent::Rotate {
                direction,
                pivot,
                role: Some(role),
            },
        );
        Ok(())
    }

    fn rule(
        &mut self,
        rule: RuleKind,
        operands: Vec<Operand>,
        exempted: Vec<Operand>,
        out: RuleOutcome,
    ) {
        let new_db = out.new_db.map(|id| self.tree.key(id));
        self.rec.push(
            self.tree,
            TraceEvent::RuleApplied {
                rule,
                case: self.cls.case,
                procedure: self.cls.procedure,
                vip: self.cls.vip.map(|v| self.tree.key(v)),
                operands,
                exempted,
                changes: out.changes,
                new_db,
            },
        );
    }

    fn settle(&mut self, id: NodeId) -> Result<()> {
        let change = sub_db(self.tree, DbSite::Node(id))?;
        let key = Some(self.tree.key(id));
        let changes = vec![change];
        let event = if self.tree.root() == Some(id) {
            TraceEvent::RootBlackened { key, changes }
        } else {
            TraceEvent::DbRemoved { key, changes }
        };
        self.rec.push(self.tree, event);
        Ok(())
    }

    fn blacken_root(&mut self) -> Result<()> {
        let change = sub_db(self.tree, self.ctx.db)?;
        let key = self.ctx.db.key(self.tree);
        self.rec.push(
            self.tree,
            TraceEvent::RootBlackened {
                key,
                changes: vec![change],
            },
        );
        Ok(())
    }

    /// The DB regenerated at `p` now hangs below the risen sibling `s`, next
    /// to the old outer nephew `x`.
    fn absorb(&mut self, db: NodeId) -> Result<Option<NodeId>> {
        let s = self.s();
        debug_assert_eq!(self.tree.parent(db), Some(s));
        let x = self.tree.child(s, self.ctx.side.flip());
        let nephew = x.and_then(|x| self.tree.child(x, self.ctx.side));
        let site = DbSite::Node(db);
        if let Some(n) = nephew.filter(|&n| self.tree.is_red(Some(n))) {
            let operands = vec![
                self.operand(db, Role::P),
                self.operand(n, Role::Nephew),
                self.operand(s, Role::S),
            ];
            let out = apply_gsar(self.tree, site, n, s)?;
            let new_db = out.new_db;
            self.rule(RuleKind::Gsar, operands, vec![], out);
            let exempted = [Some(s), x]
                .into_iter()
                .flatten()
                .map(|id| self.operand(id, self.role_of(id)))
                .collect();
            let out = apply_psar2(self.tree, n)?;
            self.rule(
                RuleKind::Psar2,
                vec![self.operand(n, Role::Nephew)],
                exempted,
                out,
            );
            return Ok(new_db);
        }
        let operands = vec![self.operand(db, Role::P), self.operand(s, Role::S)];
        let exempted = x.map(|x| self.operand(x, Role::X)).into_iter().collect();
        let out = apply_psar1(self.tree, site, s)?;
        let new_db = out.new_db;
        self.rule(RuleKind::Psar1, operands, exempted, out);
        Ok(new_db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{count_steps, normalize_script, script};

    fn run(shape: &str, key: i64) -> (Tree, Trace) {
        let mut t = Tree::from_shape(shape).unwrap();
        let tr = delete_sa(&mut t, key).unwrap();
        assert!(
            t.validate().is_empty(),
            "{shape} - {key}: {:?}\n{}",
            t.validate(),
            t.render()
        );
        (t, tr)
    }

    fn classify_first(shape: &str, key: i64) -> (CaseKind, Procedure, Option<i64>) {
        let mut t = Tree::from_shape(shape).unwrap();
        let mut seen = None;
        let mut obs = |tree: &Tree, _: &DbContext, c: &Classification| {
            if seen.is_none() {
                seen = Some((c.case, c.procedure, c.vip.map(|v| tree.key(v))));
            }
        };
        delete_sa_with(
            &mut t,
            key,
            SaOptions {
                observer: Some(&mut obs),
                ..Default::default()
            },
        )
        .unwrap();
        seen.unwrap()
    }

    #[test]
    fn inner_red_nephew_black_parent() {
        let (t, tr) = run("B40(B20(-,R30),B50)", 50);
        assert_eq!(t.to_shape(), "B30(B20,B40)");
        assert_eq!(count_steps(&tr).count, 4);
        assert_eq!(
            classify_first("B40(B20(-,R30),B50)", 50),
            (CaseKind::LR, Procedure::P3, Some(30))
        );
    }

    #[test]
    fn mirror_cases() {
        assert_eq!(
            classify_first("B20(B10,B40(R30,-))", 10),
            (CaseKind::RL, Procedure::P3, Some(30))
        );
        assert_eq!(
            classify_first("B20(B10,B30(R25,R40))", 10),
            (CaseKind::RR, Procedure::P2, Some(40))
        );
        assert_eq!(
            classify_first("B40(B30(R20,R35),B50)", 50),
            (CaseKind::LL, Procedure::P2, Some(20))
        );
        assert_eq!(
            classify_first("B20(B10,R30(B25,B40))", 10),
            (CaseKind::RR, Procedure::P1, Some(25))
        );
    }

    #[test]
    fn every_catalog_shape_ends_balanced() {
        for (shape, key) in [
            ("B40(B20(-,R30),B50)", 50),
            ("B20(B10,B40(R30,-))", 10),
            ("B40(B30(R20,R35),B50)", 50),
            ("B20(B10,B30(R25,R40))", 10),
            ("B20(B10,B30(-,R40))", 10),
            ("B40(R30(B20,B35),B50)", 50),
            ("B20(B10,R30(B25,B40))", 10),
            ("B30(R20(B10(-,R19),B25),B40)", 25),
            ("B10(B5,R20(B15,B30(R25,-)))", 15),
            ("B40(R30(B20(R15,-),B35),B50)", 35),
            ("B10(B5,R20(B15,B30(-,R40)))", 15),
            ("B66(R60(B50(-,R55),B63),B70)", 70),
        ] {
            let (t, tr) = run(shape, key);
            assert_eq!(
                tr.final_state.black_height,
                Some(2),
                "{shape}\n{}",
                t.render()
            );
        }
    }

    #[test]
    fn red_parent_outer_nephew_restores_sibling() {
        let (t, _) = run("B40(R30(B20(R15,-),B35),B50)", 35);
        assert_eq!(t.to_shape(), "B40(R20(B15,B30),B50)");
    }

    #[test]
    fn red_sibling_with_red_inner_grandnephew() {
        let (_, tr) = run("B66(R60(B50(-,R55),B63),B70)", 70);
        let labels = normalize_script(&script(&tr));
        assert_eq!(labels, ["rightRotate(p)", "Δ", "Δ", "∂″"]);
    }

    #[test]
    fn red_sibling_over_red_grandchild_exchanges_colors() {
        let shape = "B33(B27,R63(B45(-,R57),B101(R91,R105)))";
        assert_eq!(
            classify_first(shape, 27),
            (CaseKind::RR, Procedure::Exchange, None)
        );
        let (_, tr) = run(shape, 27);
        assert_eq!(tr.final_state.iterations, 2);
    }

    #[test]
    fn push_up_recurses_then_blackens_root() {
        let (t, tr) = run("B20(B10,B30)", 10);
        assert_eq!(t.to_shape(), "B20(-,R30)");
        assert_eq!(tr.final_state.iterations, 2);
    }

    #[test]
    fn emptied_tree_keeps_no_double_black() {
        let (t, _) = run("B5", 5);
        assert!(t.is_empty());
        assert!(t.phantom().is_none());
    }

    #[test]
    fn vip_prediction_matches_outcome() {
        let shape = "B30(R20(B10(-,R19),B25),B40)";
        let mut t = Tree::from_shape(shape).unwrap();
        let mut predicted = None;
        let mut obs = |tree: &Tree, ctx: &DbContext, c: &Classification| {
            predicted = predicted.or(vip_color_transition(tree, ctx, c));
        };
        delete_sa_with(
            &mut t,
            25,
            SaOptions {
                observer: Some(&mut obs),
                ..Default::default()
            },
        )
        .unwrap();
        let id = t.find(19).unwrap();
        assert_eq!(Some(t.color(Some(id))), predicted);
        assert_eq!(predicted, Some(Color::Red));
    }

    #[test]
    fn skipping_psar2_unbalances() {
        let mut t = Tree::from_shape("B30(R20(B10(-,R19),B25),B40)").unwrap();
        delete_sa_with(
            &mut t,
            25,
            SaOptions {
                skip_psar2: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!t.validate().is_empty());
    }

    #[test]
    fn psar2_rejects_double_black() {
        let mut t = Tree::from_shape("B20(B10,B30)").unwrap();
        let id = t.find(10).unwrap();
        t.set_color(id, Color::DoubleBlack);
        assert!(matches!(
            apply_psar2(&mut t, id),
            Err(RbError::UndefinedColorOp { .. })
        ));
    }

    #[test]
    fn missing_sibling_is_reported() {
        let t = Tree::from_shape("B20(B10,B30)").unwrap();
        let ph = Phantom {
            parent: t.find(10),
            side: Side::Left,
        };
        assert!(matches!(
            build_db_context(&t, DbSite::Phantom(ph)),
            Err(RbError::NoSibling(_))
        ));
    }
}
