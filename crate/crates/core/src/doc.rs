//! Nested JSON encoding of trees: `{ "key", "color", "left", "right" }` with
//! `null` for NIL leaves.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::color::Color;
use crate::error::{RbError, Result};
use crate::tree::{NodeId, Side, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub key: i64,
    pub color: Color,
    pub left: Option<Box<NodeDoc>>,
    pub right: Option<Box<NodeDoc>>,
}

/// A whole tree; `None` is the empty tree and serializes as `null`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TreeDoc(pub Option<Box<NodeDoc>>);

impl TreeDoc {
    pub fn from_tree(tree: &Tree) -> Self {
        fn go(t: &Tree, id: Option<NodeId>) -> Option<Box<NodeDoc>> {
            let id = id?;
            let n = t.node(id);
            Some(Box::new(NodeDoc {
                key: n.key,
                color: n.color,
                left: go(t, n.left),
                right: go(t, n.right),
            }))
        }
        TreeDoc(go(tree, tree.root()))
    }

    /// Rebuild the tree exactly as described. The result is not validated.
    pub fn to_tree(&self) -> Result<Tree> {
        fn go(
            t: &mut Tree,
            seen: &mut HashSet<i64>,
            doc: &NodeDoc,
            parent: Option<NodeId>,
            side: Side,
        ) -> Result<()> {
            if matches!(doc.color, Color::NullLeaf) {
                return Err(RbError::MalformedDocument(format!(
                    "node {} has color NULL_LEAF",
                    doc.key
                )));
            }
            if !seen.insert(doc.key) {
                return Err(RbError::DuplicateKey(doc.key));
            }
            let id = t.attach(parent, side, doc.key, doc.color);
            if let Some(l) = &doc.left {
                go(t, seen, l, Some(id), Side::Left)?;
            }
            if let Some(r) = &doc.right {
                go(t, seen, r, Some(id), Side::Right)?;
            }
            Ok(())
        }
        let mut tree = Tree::new();
        if let Some(root) = &self.0 {
            go(&mut tree, &mut HashSet::new(), root, None, Side::Left)?;
        }
        Ok(tree)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RbError::MalformedDocument(e.to_string()))
    }
}

impl From<&Tree> for TreeDoc {
    fn from(t: &Tree) -> Self {
        TreeDoc::from_tree(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let t = Tree::from_shape("B40(B20(-,R30),B50)").unwrap();
        let doc = TreeDoc::from_tree(&t);
        let back = TreeDoc::from_json(&doc.to_json())
            .unwrap()
            .to_tree()
            .unwrap();
        assert!(back.same_as(&t));
    }

    #[test]
    fn empty_tree_is_null() {
        assert_eq!(TreeDoc::from_tree(&Tree::new()).to_json(), "null");
        assert!(TreeDoc::from_json("null")
            .unwrap()
            .to_tree()
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicate_keys_rejected_even_when_unsorted() {
        let json = r#"{"key":5,"color":"B","left":{"key":9,"color":"R","left":null,"right":null},
                       "right":{"key":9,"color":"R","left":null,"right":null}}"#;
        let doc = TreeDoc::from_json(json).unwrap();
        assert!(matches!(doc.to_tree(), Err(RbError::DuplicateKey(9))));
    }

    #[test]
    fn null_leaf_color_rejected() {
        let json = r#"{"key":5,"color":"NULL_LEAF","left":null,"right":null}"#;
        assert!(TreeDoc::from_json(json).unwrap().to_tree().is_err());
    }
}
