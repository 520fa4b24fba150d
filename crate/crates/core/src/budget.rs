use serde::Serialize;

/// Work limits for the exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Index tuples `t^s` scanned by a maximal γ search.
    pub max_index_tuples: u64,
    /// Column multisets enumerated by the symmetric preservation path.
    pub max_multisets: u64,
    /// Largest arity for exhaustive fingerprints.
    pub max_fingerprint_arity: usize,
    /// Largest arity of total functions enumerated by the invariance test.
    pub max_invariance_arity: usize,
    /// Largest number of restrictions produced by `str_closure`.
    pub max_restrictions: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_index_tuples: 100_000_000,
            max_multisets: 10_000_000,
            max_fingerprint_arity: 3,
            max_invariance_arity: 4,
            max_restrictions: 1 << 20,
        }
    }
}
