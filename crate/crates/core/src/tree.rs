//! Arena-backed red-black tree with parent links and an optional phantom
//! double black parked on a NIL position.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::color::{color_add, Color};
use crate::error::{RbError, Result};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub key: i64,
    pub color: Color,
    pub left: Option<NodeId>,
    pub right: Option<NodeId>,
    pub parent: Option<NodeId>,
}

impl Node {
    pub fn child(&self, side: Side) -> Option<NodeId> {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn child_mut(&mut self, side: Side) -> &mut Option<NodeId> {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }
}

/// A double black with no stored node: the NIL child `side` of `parent`, or
/// the root position of an emptied tree when `parent` is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phantom {
    pub parent: Option<NodeId>,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    RedRed,
    RootNotBlack,
    UnequalBlackHeight,
    BstOrder,
    DoubleBlackPresent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
}

/// What the physical unlink step of a deletion removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unlinked {
    /// Key copied into the doomed node when it had two children.
    pub substitute: Option<i64>,
    pub color: Color,
    pub parent: Option<NodeId>,
    pub side: Side,
    pub child: Option<NodeId>,
}

#[derive(Debug, Clone, Default)]
pub struct Tree {
    nodes: Vec<Option<Node>>,
    free: Vec<NodeId>,
    root: Option<NodeId>,
    len: usize,
    phantom: Option<Phantom>,
}

impl Tree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys(keys: impl IntoIterator<Item = i64>) -> Result<Self> {
        let mut tree = Tree::new();
        for k in keys {
            tree.insert(k)?;
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        self.nodes[id].as_ref().expect("dangling node id")
    }

    fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id].as_mut().expect("dangling node id")
    }

    pub fn key(&self, id: NodeId) -> i64 {
        self.node(id).key
    }

    /// NIL reads as black.
    pub fn color(&self, id: Option<NodeId>) -> Color {
        id.map_or(Color::Black, |id| self.node(id).color)
    }

    pub fn is_red(&self, id: Option<NodeId>) -> bool {
        self.color(id) == Color::Red
    }

    pub fn set_color(&mut self, id: NodeId, color: Color) {
        debug_assert_ne!(color, Color::NullLeaf, "NULL_LEAF is never stored");
        self.node_mut(id).color = color;
    }

    pub fn child(&self, id: NodeId, side: Side) -> Option<NodeId> {
        self.node(id).child(side)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    /// Which child of its parent `id` is; `None` for the root.
    pub fn side_of(&self, id: NodeId) -> Option<Side> {
        let p = self.parent(id)?;
        if self.node(p).left == Some(id) {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        }
    }

    pub fn phantom(&self) -> Option<Phantom> {
        self.phantom
    }

    pub fn set_phantom(&mut self, phantom: Phantom) {
        debug_assert!(match phantom.parent {
            Some(p) => self.child(p, phantom.side).is_none(),
            None => self.root.is_none(),
        });
        self.phantom = Some(phantom);
    }

    pub fn clear_phantom(&mut self) {
        self.phantom = None;
    }

    pub fn find(&self, key: i64) -> Option<NodeId> {
        let mut cur = self.root;
        while let Some(id) = cur {
            let n = self.node(id);
            cur = match key.cmp(&n.key) {
                std::cmp::Ordering::Less => n.left,
                std::cmp::Ordering::Greater => n.right,
                std::cmp::Ordering::Equal => return Some(id),
            };
        }
        None
    }

    pub fn search(&self, key: i64) -> bool {
        self.find(key).is_some()
    }

    fn alloc(&mut self, node: Node) -> NodeId {
        self.len += 1;
        if let Some(id) = self.free.pop() {
            self.nodes[id] = Some(node);
            id
        } else {
            self.nodes.push(Some(node));
            self.nodes.len() - 1
        }
    }

    fn release(&mut self, id: NodeId) {
        self.nodes[id] = None;
        self.free.push(id);
        self.len -= 1;
    }

    fn link(&mut self, parent: Option<NodeId>, side: Side, child: Option<NodeId>) {
        match parent {
            Some(p) => *self.node_mut(p).child_mut(side) = child,
            None => self.root = child,
        }
        if let Some(c) = child {
            self.node_mut(c).parent = parent;
        }
    }

    /// Attach a detached node as the `side` child of `parent` (or as root).
    /// Used by document and shape builders, which validate separately.
    pub(crate) fn attach(
        &mut self,
        parent: Option<NodeId>,
        side: Side,
        key: i64,
        color: Color,
    ) -> NodeId {
        let id = self.alloc(Node {
            key,
            color,
            left: None,
            right: None,
            parent,
        });
        self.link(parent, side, Some(id));
        id
    }

    pub fn insert(&mut self, key: i64) -> Result<()> {
        let mut parent = None;
        let mut side = Side::Left;
        let mut cur = self.root;
        while let Some(id) = cur {
            let n = self.node(id);
            parent = Some(id);
            side = match key.cmp(&n.key) {
                std::cmp::Ordering::Less => Side::Left,
                std::cmp::Ordering::Greater => Side::Right,
                std::cmp::Ordering::Equal => return Err(RbError::DuplicateKey(key)),
            };
            cur = n.child(side);
        }
        let mut z = self.attach(parent, side, key, Color::Red);

        while let Some(p) = self.parent(z).filter(|&p| self.is_red(Some(p))) {
            // a red parent is never the root, so the grandparent exists
            let g = self.parent(p).expect("red node without parent");
            let p_side = self.side_of(p).expect("non-root");
            let uncle = self.child(g, p_side.flip());
            if self.is_red(uncle) {
                self.set_color(p, Color::Black);
                self.set_color(uncle.unwrap(), Color::Black);
                self.set_color(g, Color::Red);
                z = g;
                continue;
            }
            let mut p = p;
            if self.side_of(z) == Some(p_side.flip()) {
                self.rotate(p, p_side)?;
                z = p;
                p = self.parent(z).unwrap();
            }
            self.set_color(p, Color::Black);
            self.set_color(g, Color::Red);
            self.rotate(g, p_side.flip())?;
        }
        let root = self.root.unwrap();
        self.set_color(root, Color::Black);
        Ok(())
    }

    /// Rotate `pivot` downward toward `direction`: `Side::Left` is a left
    /// rotation (the right child rises), `Side::Right` a right rotation.
    pub fn rotate(&mut self, pivot: NodeId, direction: Side) -> Result<()> {
        let rising_side = direction.flip();
        let Some(y) = self.child(pivot, rising_side) else {
            return Err(RbError::MissingChild {
                pivot: self.key(pivot),
                side: rising_side,
            });
        };
        let inner = self.child(y, direction);
        let parent = self.parent(pivot);
        let pivot_side = self.side_of(pivot).unwrap_or(Side::Left);

        self.link(Some(pivot), rising_side, inner);
        self.link(parent, pivot_side, Some(y));
        self.link(Some(y), direction, Some(pivot));

        // a phantom on the inner NIL of `y` travels with that NIL slot
        if self.phantom
            == Some(Phantom {
                parent: Some(y),
                side: direction,
            })
        {
            self.phantom = Some(Phantom {
                parent: Some(pivot),
                side: rising_side,
            });
        }
        Ok(())
    }

    pub fn rotate_left(&mut self, pivot: NodeId) -> Result<()> {
        self.rotate(pivot, Side::Left)
    }

    pub fn rotate_right(&mut self, pivot: NodeId) -> Result<()> {
        self.rotate(pivot, Side::Right)
    }

    fn min_below(&self, mut id: NodeId) -> NodeId {
        while let Some(l) = self.node(id).left {
            id = l;
        }
        id
    }

    /// Physical BST removal shared by both deletion engines. A two-child
    /// node takes its in-order successor's key and the successor is spliced
    /// out instead. No recoloring happens here.
    pub fn unlink_for_delete(&mut self, key: i64) -> Result<Unlinked> {
        let target = self.find(key).ok_or(RbError::KeyNotFound(key))?;
        let (doomed, substitute) = match (self.node(target).left, self.node(target).right) {
            (Some(_), Some(r)) => {
                let succ = self.min_below(r);
                let succ_key = self.key(succ);
                self.node_mut(target).key = succ_key;
                (succ, Some(succ_key))
            }
            _ => (target, None),
        };
        let n = self.node(doomed).clone();
        let child = n.left.or(n.right);
        let side = self.side_of(doomed).unwrap_or(Side::Left);
        self.link(n.parent, side, child);
        self.release(doomed);
        Ok(Unlinked {
            substitute,
            color: n.color,
            parent: n.parent,
            side,
            child,
        })
    }

    /// Black nodes on any path from `id` down to a NIL, counting `id` itself
    /// and not counting the NIL. `black_height(None) == 0`.
    pub fn black_height(&self, id: Option<NodeId>) -> Result<usize> {
        let Some(id) = id else { return Ok(0) };
        let n = self.node(id);
        let left = self.black_height(n.left)?;
        let right = self.black_height(n.right)?;
        if left != right {
            return Err(RbError::UnequalBlackHeight {
                at: n.key,
                left,
                right,
            });
        }
        Ok(left + n.color.weight())
    }

    pub fn height(&self) -> usize {
        fn go(t: &Tree, id: Option<NodeId>) -> usize {
            id.map_or(0, |id| {
                1 + go(t, t.node(id).left).max(go(t, t.node(id).right))
            })
        }
        go(self, self.root)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Some(r) = self.root {
            if self.color(Some(r)) != Color::Black {
                out.push(Violation {
                    kind: ViolationKind::RootNotBlack,
                    location: format!("root {}", self.key(r)),
                });
            }
        }
        if let Some(ph) = self.phantom {
            let location = match ph.parent {
                Some(p) => format!("{:?} NIL of {}", ph.side, self.key(p)),
                None => "root position".to_string(),
            };
            out.push(Violation {
                kind: ViolationKind::DoubleBlackPresent,
                location,
            });
        }
        self.check(self.root, None, None, &mut out);
        out
    }

    /// Returns the subtree's black height (max of the two sides when they
    /// disagree, after recording the breach).
    fn check(
        &self,
        id: Option<NodeId>,
        lo: Option<i64>,
        hi: Option<i64>,
        out: &mut Vec<Violation>,
    ) -> usize {
        let Some(id) = id else { return 0 };
        let n = self.node(id);
        if lo.is_some_and(|lo| n.key <= lo) || hi.is_some_and(|hi| n.key >= hi) {
            out.push(Violation {
                kind: ViolationKind::BstOrder,
                location: format!("node {}", n.key),
            });
        }
        if n.color == Color::DoubleBlack {
            out.push(Violation {
                kind: ViolationKind::DoubleBlackPresent,
                location: format!("node {}", n.key),
            });
        }
        if n.color == Color::Red {
            for c in [n.left, n.right].into_iter().flatten() {
                if self.is_red(Some(c)) {
                    out.push(Violation {
                        kind: ViolationKind::RedRed,
                        location: format!("{} -> {}", n.key, self.key(c)),
                    });
                }
            }
        }
        let left = self.check(n.left, lo, Some(n.key), out);
        let right = self.check(n.right, Some(n.key), hi, out);
        if left != right {
            out.push(Violation {
                kind: ViolationKind::UnequalBlackHeight,
                location: format!("node {} (left {left}, right {right})", n.key),
            });
        }
        left.max(right) + n.color.weight()
    }

    pub fn inorder(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len);
        let mut stack = Vec::new();
        let mut cur = self.root;
        while cur.is_some() || !stack.is_empty() {
            while let Some(id) = cur {
                stack.push(id);
                cur = self.node(id).left;
            }
            let id = stack.pop().unwrap();
            out.push(self.key(id));
            cur = self.node(id).right;
        }
        out
    }

    /// Indented text rendering, one node per line as `COLOR:key`. Children
    /// are prefixed `L ` / `R `; when a node has any child both slots are
    /// printed, with `(nil)` for NIL and `DB:nil` for a phantom double black.
    pub fn render(&self) -> String {
        let Some(root) = self.root else {
            return if self.phantom.is_some() {
                "DB:nil\n"
            } else {
                "(nil)\n"
            }
            .to_string();
        };
        let mut out = String::new();
        self.render_node(root, 0, "", &mut out);
        out
    }

    fn render_node(&self, id: NodeId, depth: usize, prefix: &str, out: &mut String) {
        let n = self.node(id);
        let _ = writeln!(
            out,
            "{:indent$}{prefix}{}:{}",
            "",
            n.color.tag(),
            n.key,
            indent = depth * 2
        );
        let phantom_here = |side| {
            self.phantom
                == Some(Phantom {
                    parent: Some(id),
                    side,
                })
        };
        let any = n.left.is_some()
            || n.right.is_some()
            || phantom_here(Side::Left)
            || phantom_here(Side::Right);
        if !any {
            return;
        }
        for (side, tag) in [(Side::Left, "L "), (Side::Right, "R ")] {
            match n.child(side) {
                Some(c) => self.render_node(c, depth + 1, tag, out),
                None => {
                    let leaf = if phantom_here(side) {
                        "DB:nil"
                    } else {
                        "(nil)"
                    };
                    let _ = writeln!(out, "{:indent$}{tag}{leaf}", "", indent = (depth + 1) * 2);
                }
            }
        }
    }

    /// Graphviz DOT export. Node labels are `key\ncolor`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from(
            "digraph rbtree {\n  node [shape=circle, style=filled, fontcolor=white];\n",
        );
        let mut nil = 0usize;
        let mut stack: Vec<NodeId> = self.root.into_iter().collect();
        while let Some(id) = stack.pop() {
            let n = self.node(id);
            let (fill, extra) = match n.color {
                Color::Red => ("red", ""),
                Color::DoubleBlack => ("black", ", peripheries=2"),
                _ => ("black", ""),
            };
            let _ = writeln!(
                out,
                "  n{key} [label=\"{key}\\n{tag}\", fillcolor={fill}{extra}];",
                key = n.key,
                tag = n.color.tag()
            );
            for side in [Side::Left, Side::Right] {
                match n.child(side) {
                    Some(c) => {
                        let _ = writeln!(out, "  n{} -> n{};", n.key, self.key(c));
                        stack.push(c);
                    }
                    None => {
                        let db = self.phantom
                            == Some(Phantom {
                                parent: Some(id),
                                side,
                            });
                        let style = if db {
                            "peripheries=2, label=\"DB\""
                        } else {
                            "label=\"\""
                        };
                        let _ = writeln!(
                            out,
                            "  nil{nil} [shape=point, fillcolor=black, {style}];\n  n{} -> nil{nil};",
                            n.key
                        );
                        nil += 1;
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Build a tree verbatim from a compact shape string, without
    /// rebalancing or validation:
    ///
    /// ```text
    /// node  := '-' | color key [ '(' node ',' node ')' ]
    /// color := 'R' | 'B'
    /// ```
    ///
    /// e.g. `B40(B20(-,R30),B50)`.
    pub fn from_shape(shape: &str) -> Result<Tree> {
        let chars: Vec<char> = shape.chars().filter(|c| !c.is_whitespace()).collect();
        let mut tree = Tree::new();
        let mut pos = 0;
        parse_shape_node(&chars, &mut pos, &mut tree, None, Side::Left)?;
        if pos != chars.len() {
            return Err(RbError::MalformedDocument(format!(
                "trailing input at {pos} in {shape:?}"
            )));
        }
        Ok(tree)
    }

    /// Inverse of [`Tree::from_shape`].
    pub fn to_shape(&self) -> String {
        fn go(t: &Tree, id: Option<NodeId>, out: &mut String) {
            let Some(id) = id else {
                out.push('-');
                return;
            };
            let n = t.node(id);
            let _ = write!(out, "{}{}", n.color.tag(), n.key);
            if n.left.is_some() || n.right.is_some() {
                out.push('(');
                go(t, n.left, out);
                out.push(',');
                go(t, n.right, out);
                out.push(')');
            }
        }
        let mut out = String::new();
        go(self, self.root, &mut out);
        out
    }

    /// Same keys, colors and shape (ignores arena layout).
    pub fn same_as(&self, other: &Tree) -> bool {
        self.to_shape() == other.to_shape() && self.phantom_key() == other.phantom_key()
    }

    fn phantom_key(&self) -> Option<(Option<i64>, Side)> {
        self.phantom
            .map(|p| (p.parent.map(|id| self.key(id)), p.side))
    }

    /// Black node absorbing an extra black, as in `B + NULL_LEAF = DB`.
    pub(crate) fn add_black(&mut self, id: NodeId) -> Result<Color> {
        let c = color_add(self.color(Some(id)), Color::Black)?;
        self.set_color(id, c);
        Ok(c)
    }
}

fn parse_shape_node(
    s: &[char],
    pos: &mut usize,
    tree: &mut Tree,
    parent: Option<NodeId>,
    side: Side,
) -> Result<()> {
    let bad =
        |pos: usize, what: &str| RbError::MalformedDocument(format!("expected {what} at {pos}"));
    match s.get(*pos) {
        Some('-') => {
            *pos += 1;
            return Ok(());
        }
        Some('R') | Some('B') => {}
        _ => return Err(bad(*pos, "'R', 'B' or '-'")),
    }
    let color = if s[*pos] == 'R' {
        Color::Red
    } else {
        Color::Black
    };
    *pos += 1;
    let start = *pos;
    if s.get(*pos) == Some(&'-') {
        *pos += 1;
    }
    while s.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
        *pos += 1;
    }
    let key: i64 = s[start..*pos]
        .iter()
        .collect::<String>()
        .parse()
        .map_err(|_| bad(start, "integer key"))?;
    let id = tree.attach(parent, side, key, color);
    if s.get(*pos) == Some(&'(') {
        *pos += 1;
        parse_shape_node(s, pos, tree, Some(id), Side::Left)?;
        if s.get(*pos) != Some(&',') {
            return Err(bad(*pos, "','"));
        }
        *pos += 1;
        parse_shape_node(s, pos, tree, Some(id), Side::Right)?;
        if s.get(*pos) != Some(&')') {
            return Err(bad(*pos, "')'"));
        }
        *pos += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_ascending_keys() {
        let t = Tree::from_keys([10, 20, 30, 40, 50]).unwrap();
        assert_eq!(t.to_shape(), "B20(B10,B40(R30,R50))");
        assert!(t.validate().is_empty());
    }

    #[test]
    fn duplicate_insert_fails() {
        let mut t = Tree::from_keys([1, 2]).unwrap();
        assert!(matches!(t.insert(2), Err(RbError::DuplicateKey(2))));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn rotation_needs_a_child_to_lift() {
        let mut t = Tree::from_shape("B20(B10,-)").unwrap();
        let root = t.root().unwrap();
        assert!(matches!(
            t.rotate_left(root),
            Err(RbError::MissingChild { pivot: 20, .. })
        ));
        t.rotate_right(root).unwrap();
        assert_eq!(t.to_shape(), "B10(-,B20)");
    }

    #[test]
    fn black_heights() {
        let t = Tree::new();
        assert_eq!(t.black_height(None).unwrap(), 0);
        let t = Tree::from_shape("B30(B20,B40)").unwrap();
        assert_eq!(t.black_height(t.root()).unwrap(), 2);
        let t = Tree::from_shape("B30(B20,-)").unwrap();
        assert!(matches!(
            t.black_height(t.root()),
            Err(RbError::UnequalBlackHeight {
                at: 30,
                left: 1,
                right: 0
            })
        ));
    }

    #[test]
    fn validate_names_each_breach() {
        let kinds = |s: &str| {
            Tree::from_shape(s)
                .unwrap()
                .validate()
                .into_iter()
                .map(|v| v.kind)
                .collect::<Vec<_>>()
        };
        assert_eq!(kinds("R10"), [ViolationKind::RootNotBlack]);
        assert_eq!(kinds("B10(R5(R3,-),-)"), [ViolationKind::RedRed]);
        assert_eq!(kinds("B10(B5,-)"), [ViolationKind::UnequalBlackHeight]);
        assert_eq!(kinds("B10(R15,-)"), [ViolationKind::BstOrder]);
        assert!(kinds("B10(R5,R15)").is_empty());
    }

    #[test]
    fn render_forms() {
        assert_eq!(Tree::new().render(), "(nil)\n");
        let t = Tree::from_shape("B20(-,R30)").unwrap();
        assert_eq!(t.render(), "B:20\n  L (nil)\n  R R:30\n");
        let mut t = Tree::new();
        t.set_phantom(Phantom {
            parent: None,
            side: Side::Left,
        });
        assert_eq!(t.render(), "DB:nil\n");
    }

    #[test]
    fn shape_round_trip() {
        let s = "B40(R30(B20(R15,-),B35),B50)";
        assert_eq!(Tree::from_shape(s).unwrap().to_shape(), s);
        assert!(Tree::from_shape("B40(").is_err());
    }

    proptest! {
        #[test]
        fn rotation_preserves_order(keys in proptest::collection::btree_set(0i64..500, 1..60), pick in any::<prop::sample::Index>(), left in any::<bool>()) {
            let t = Tree::from_keys(keys.iter().copied()).unwrap();
            let before = t.inorder();
            let key = before[pick.index(before.len())];
            let mut t2 = t.clone();
            let id = t2.find(key).unwrap();
            let dir = if left { Side::Left } else { Side::Right };
            match t2.rotate(id, dir) {
                Ok(()) => prop_assert_eq!(t2.inorder(), before),
                Err(RbError::MissingChild { .. }) => prop_assert!(t2.same_as(&t)),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }

        #[test]
        fn inserts_stay_balanced(keys in proptest::collection::vec(-1000i64..1000, 0..200)) {
            let mut t = Tree::new();
            for k in keys {
                let _ = t.insert(k);
                prop_assert!(t.validate().is_empty());
            }
        }
    }
}
