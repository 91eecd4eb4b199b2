//! Textbook deletion fixup, used as the oracle for the symbolic engine.
//!
//! The extra black rides on `x` (possibly NIL, located by its parent and
//! side). Each case rotates first and then applies its color changes as
//! one batch, so traces of both engines count steps the same way.

use crate::color::Color;
use crate::doc::TreeDoc;
use crate::error::{RbError, Result};
use crate::trace::{ColorChange, Method, RecolorCause, Recorder, TaCase, Trace, TraceEvent};
use crate::tree::{NodeId, Side, Tree};

#[derive(Debug, Clone, Copy, Default)]
pub struct TaOptions {
    pub snapshots: bool,
}

pub fn delete_traditional(tree: &mut Tree, key: i64) -> Result<Trace> {
    delete_traditional_with(tree, key, TaOptions::default())
}

pub fn delete_traditional_with(tree: &mut Tree, key: i64, opts: TaOptions) -> Result<Trace> {
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
    let mut iterations = 0;
    if unlinked.color == Color::Black {
        let mut fix = Fixup {
            tree: &mut *tree,
            rec: &mut rec,
        };
        iterations = fix.run(unlinked.child, unlinked.parent, unlinked.side)?;
    }
    Ok(rec.finish(Method::Ta, key, initial, tree, iterations))
}

struct Fixup<'t> {
    tree: &'t mut Tree,
    rec: &'t mut Recorder,
}

impl Fixup<'_> {
    fn run(
        &mut self,
        mut x: Option<NodeId>,
        mut parent: Option<NodeId>,
        mut side: Side,
    ) -> Result<usize> {
        let mut iterations = 0;
        while let Some(p) = parent {
            if self.tree.is_red(x) {
                break;
            }
            iterations += 1;
            let mut w = self.sibling(p, side)?;
            if self.tree.is_red(Some(w)) {
                self.rotate(p, side)?;
                self.recolor(TaCase::RedSibling, &[(w, Color::Black), (p, Color::Red)]);
                w = self.sibling(p, side)?;
            }
            let near = self.tree.child(w, side);
            let far = self.tree.child(w, side.flip());
            if !self.tree.is_red(near) && !self.tree.is_red(far) {
                self.recolor(TaCase::BlackSiblingBlackNephews, &[(w, Color::Red)]);
                x = Some(p);
                parent = self.tree.parent(p);
                side = self.tree.side_of(p).unwrap_or(Side::Left);
                continue;
            }
            if !self.tree.is_red(far) {
                let near = near.expect("red near nephew");
                self.rotate(w, side.flip())?;
                self.recolor(
                    TaCase::NearRedNephew,
                    &[(near, Color::Black), (w, Color::Red)],
                );
                w = near;
            }
            let far = self.tree.child(w, side.flip()).expect("red far nephew");
            self.rotate(p, side)?;
            let pc = self.tree.color(Some(p));
            self.recolor(
                TaCase::FarRedNephew,
                &[(w, pc), (p, Color::Black), (far, Color::Black)],
            );
            x = self.tree.root();
            parent = None;
        }
        if let Some(id) = x.filter(|&id| self.tree.is_red(Some(id))) {
            self.batch(RecolorCause::Absorb, &[(id, Color::Black)]);
        }
        Ok(iterations)
    }

    fn sibling(&self, p: NodeId, side: Side) -> Result<NodeId> {
        self.tree
            .child(p, side.flip())
            .ok_or_else(|| RbError::NoSibling(format!("{:?} NIL below {}", side, self.tree.key(p))))
    }

    fn rotate(&mut self, pivot: NodeId, direction: Side) -> Result<()> {
        self.tree.rotate(pivot, direction)?;
        let pivot = self.tree.key(pivot);
        self.rec.push(
            self.tree,
            TraceEvent::Rotate {
                direction,
                pivot,
                role: None,
            },
        );
        Ok(())
    }

    fn recolor(&mut self, case: TaCase, targets: &[(NodeId, Color)]) {
        self.batch(RecolorCause::Fixup(case), targets);
    }

    /// Records only the nodes whose color actually changes.
    fn batch(&mut self, cause: RecolorCause, targets: &[(NodeId, Color)]) {
        let mut changes = Vec::new();
        for &(id, after) in targets {
            let before = self.tree.color(Some(id));
            if before != after {
                self.tree.set_color(id, after);
                changes.push(ColorChange {
                    key: Some(self.tree.key(id)),
                    before,
                    after,
                });
            }
        }
        if !changes.is_empty() {
            self.rec
                .push(self.tree, TraceEvent::Recolor { cause, changes });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::count_steps;

    #[test]
    fn red_leaf_needs_no_fixup() {
        let mut t = Tree::from_shape("B20(R10,R30)").unwrap();
        let tr = delete_traditional(&mut t, 10).unwrap();
        assert_eq!(count_steps(&tr).count, 1);
        assert_eq!(t.to_shape(), "B20(-,R30)");
    }

    #[test]
    fn near_then_far_nephew() {
        let mut t = Tree::from_shape("B40(B20(-,R30),B50)").unwrap();
        let tr = delete_traditional(&mut t, 50).unwrap();
        assert!(t.validate().is_empty());
        assert_eq!(t.to_shape(), "B30(B20,B40)");
        assert_eq!(count_steps(&tr).count, 5);
    }

    #[test]
    fn push_up_to_root() {
        let mut t = Tree::from_shape("B20(B10,B30)").unwrap();
        delete_traditional(&mut t, 10).unwrap();
        assert_eq!(t.to_shape(), "B20(-,R30)");
        assert!(t.validate().is_empty());
    }

    #[test]
    fn missing_key_leaves_tree_alone() {
        let mut t = Tree::from_shape("B20(R10,R30)").unwrap();
        assert!(delete_traditional(&mut t, 99).is_err());
        assert_eq!(t.to_shape(), "B20(R10,R30)");
    }
}
