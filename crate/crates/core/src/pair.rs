use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::Relation;

/// A relation pair `(ρ, ρ′)` with `ρ′ ⊆ ρ`.
///
/// A function preserves it when every matrix with columns in `ρ` and rows in
/// its domain is mapped into `ρ′`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RelationPair {
    antecedent: Relation,
    consequent: Relation,
}

impl RelationPair {
    pub fn new(antecedent: Relation, consequent: Relation) -> Result<Self> {
        if antecedent.arity() != consequent.arity() {
            return Err(Error::ArityMismatch {
                expected: antecedent.arity(),
                found: consequent.arity(),
            });
        }
        if !consequent.is_subset(&antecedent) {
            return Err(Error::InvalidPair);
        }
        Ok(RelationPair {
            antecedent,
            consequent,
        })
    }

    /// `(ρ, ρ)`, whose preservation is ordinary preservation of `ρ`.
    pub fn diagonal(rho: Relation) -> Self {
        RelationPair {
            antecedent: rho.clone(),
            consequent: rho,
        }
    }

    /// `(ρ, ∅)`.
    pub fn with_empty_consequent(rho: Relation) -> Self {
        let empty = Relation::empty(rho.arity()).expect("arity already valid");
        RelationPair {
            antecedent: rho,
            consequent: empty,
        }
    }

    pub fn antecedent(&self) -> &Relation {
        &self.antecedent
    }

    pub fn consequent(&self) -> &Relation {
        &self.consequent
    }

    pub fn arity(&self) -> usize {
        self.antecedent.arity()
    }
}
