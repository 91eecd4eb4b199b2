//! Symbolic color arithmetic.
//!
//! Colors are operands and `+B` / `-B` are the only operators. The tables are
//! directional: `a + b = c` does not license `c - b = a`, so every defined
//! combination is listed explicitly and everything else is an error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{RbError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "B")]
    Black,
    #[serde(rename = "DB")]
    DoubleBlack,
    /// Result marker for a phantom double black that collapsed back into a
    /// NIL leaf. Never stored on a node.
    #[serde(rename = "NULL_LEAF")]
    NullLeaf,
}

impl Color {
    pub fn tag(self) -> &'static str {
        match self {
            Color::Red => "R",
            Color::Black => "B",
            Color::DoubleBlack => "DB",
            Color::NullLeaf => "NULL_LEAF",
        }
    }

    /// The color a reader sees when the tree is drawn. A double black is
    /// drawn as black; a collapsed phantom is not drawn at all.
    pub fn visible(self) -> Option<Color> {
        match self {
            Color::Red => Some(Color::Red),
            Color::Black | Color::DoubleBlack => Some(Color::Black),
            Color::NullLeaf => None,
        }
    }

    /// Black weight contributed to a path.
    pub fn weight(self) -> usize {
        match self {
            Color::Red | Color::NullLeaf => 0,
            Color::Black => 1,
            Color::DoubleBlack => 2,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Left operand of a subtraction: either a stored color or a phantom double
/// black sitting on a NIL position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorTerm {
    Stored(Color),
    NullDoubleBlack,
}

impl From<Color> for ColorTerm {
    fn from(c: Color) -> Self {
        ColorTerm::Stored(c)
    }
}

impl fmt::Display for ColorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorTerm::Stored(c) => c.fmt(f),
            ColorTerm::NullDoubleBlack => f.write_str("null(DB)"),
        }
    }
}

/// `a + b`.
pub fn color_add(a: Color, b: Color) -> Result<Color> {
    use Color::*;
    match (a, b) {
        (Black, Black) => Ok(DoubleBlack),
        (Red, Black) => Ok(Black),
        (Red, DoubleBlack) => Ok(Black),
        (Red, NullLeaf) => Ok(Black),
        (Black, NullLeaf) => Ok(DoubleBlack),
        _ => Err(RbError::UndefinedColorOp {
            op: '+',
            a: a.into(),
            b,
        }),
    }
}

/// `a - b`.
pub fn color_sub(a: impl Into<ColorTerm>, b: Color) -> Result<Color> {
    use Color::*;
    let a = a.into();
    match (a, b) {
        (ColorTerm::Stored(DoubleBlack), Black) => Ok(Black),
        (ColorTerm::Stored(Black), Black) => Ok(Red),
        (ColorTerm::Stored(Red), Black) => Ok(Black),
        (ColorTerm::NullDoubleBlack, Black) => Ok(NullLeaf),
        _ => Err(RbError::UndefinedColorOp { op: '-', a, b }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::*;

    const ALL: [Color; 4] = [Red, Black, DoubleBlack, NullLeaf];

    #[test]
    fn addition_table() {
        assert_eq!(color_add(Black, Black), Ok(DoubleBlack));
        assert_eq!(color_add(Red, Black), Ok(Black));
        assert_eq!(color_add(Red, DoubleBlack), Ok(Black));
        assert_eq!(color_add(Red, NullLeaf), Ok(Black));
        assert_eq!(color_add(Black, NullLeaf), Ok(DoubleBlack));
        assert!(matches!(
            color_add(DoubleBlack, Black),
            Err(RbError::UndefinedColorOp { op: '+', .. })
        ));
    }

    #[test]
    fn subtraction_table() {
        assert_eq!(color_sub(DoubleBlack, Black), Ok(Black));
        assert_eq!(color_sub(Black, Black), Ok(Red));
        assert_eq!(color_sub(Red, Black), Ok(Black));
        assert_eq!(color_sub(ColorTerm::NullDoubleBlack, Black), Ok(NullLeaf));
        assert!(color_sub(NullLeaf, Black).is_err());
    }

    #[test]
    fn defined_domains_are_exact() {
        let mut adds = 0;
        let mut subs = 0;
        for a in ALL {
            for b in ALL {
                adds += color_add(a, b).is_ok() as usize;
                subs += color_sub(a, b).is_ok() as usize;
            }
        }
        assert_eq!(adds, 5);
        // the phantom term is the fourth defined subtraction
        assert_eq!(subs, 3);
    }

    #[test]
    fn add_and_sub_are_not_inverses() {
        // B + B = DB, then DB - B = B: the pair (B, B) is not recovered as R.
        let db = color_add(Black, Black).unwrap();
        assert_eq!(color_sub(db, Black), Ok(Black));
        assert_ne!(color_sub(Black, Black), Ok(Black));
    }
}
