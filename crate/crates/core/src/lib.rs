//! Red-black trees whose deletion fixup is driven by symbolic color
//! arithmetic, with a textbook engine alongside as an oracle.

pub mod color;
pub mod doc;
pub mod error;
pub mod harness;
pub mod sa;
pub mod ta;
pub mod trace;
pub mod tree;

pub use color::{color_add, color_sub, Color, ColorTerm};
pub use doc::{NodeDoc, TreeDoc};
pub use error::{RbError, Result};
pub use sa::{delete_sa, delete_sa_with, SaOptions};
pub use ta::{delete_traditional, delete_traditional_with, TaOptions};
pub use trace::{Method, Trace, TraceEvent};
pub use tree::{NodeId, Side, Tree, Violation, ViolationKind};
