//! Partial Boolean clones, relation pairs and qfpp-definability.

pub mod budget;
pub mod definability;
pub mod error;
pub mod families;
pub mod fingerprint;
pub mod format;
pub mod function;
pub mod intervals;
pub mod ops;
pub mod pair;
pub mod preserve;
pub mod relation;
pub mod tuple;
pub mod verify;

pub use budget::Budget;
pub use error::{Error, Result};
pub use fingerprint::CloneFingerprint;
pub use function::{PartialFunction, SymmetricPartialFunction};
pub use pair::RelationPair;
pub use relation::Relation;
pub use tuple::BitTuple;
