use thiserror::Error;

use crate::color::{Color, ColorTerm};
use crate::tree::Side;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RbError {
    #[error("key {0} is already present")]
    DuplicateKey(i64),
    #[error("key {0} not found")]
    KeyNotFound(i64),
    #[error("node {pivot} has no {side:?} child to rotate with")]
    MissingChild { pivot: i64, side: Side },
    #[error("unequal black height below node {at}: left {left}, right {right}")]
    UnequalBlackHeight { at: i64, left: usize, right: usize },
    #[error("color operation {a} {op} {b} is undefined")]
    UndefinedColorOp { op: char, a: ColorTerm, b: Color },
    #[error("double black at {0} has no sibling")]
    NoSibling(String),
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("unknown case {0:?}")]
    UnknownCase(String),
}

pub type Result<T, E = RbError> = std::result::Result<T, E>;
