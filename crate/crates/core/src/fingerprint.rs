//! Bounded-arity slices of function classes.
//!
//! A fingerprint records, for every arity `n ≤ k`, exactly which of the
//! `3^(2^n)` partial functions (by base-3 code) belong to a class. Classes are
//! compared, intersected and classified through these finite slices.

use fixedbitset::FixedBitSet;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::function::{code_space, PartialFunction};

/// Fingerprints are materialized up to this arity (`3^16` bits at arity 4).
pub const MAX_FINGERPRINT_ARITY: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CloneFingerprint {
    max_arity: usize,
    per_arity: Vec<FixedBitSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArityDigest {
    pub arity: usize,
    pub members: usize,
    pub hash: String,
}

impl CloneFingerprint {
    pub fn empty(max_arity: usize) -> Result<Self> {
        if max_arity == 0 || max_arity > MAX_FINGERPRINT_ARITY {
            return Err(Error::ArityOutOfRange(max_arity));
        }
        let per_arity = (1..=max_arity)
            .map(|n| FixedBitSet::with_capacity(code_space(n) as usize))
            .collect();
        Ok(CloneFingerprint {
            max_arity,
            per_arity,
        })
    }

    /// Every partial function of arity `≤ max_arity`.
    pub fn full(max_arity: usize) -> Result<Self> {
        let mut fp = Self::empty(max_arity)?;
        for set in &mut fp.per_arity {
            set.insert_range(..);
        }
        Ok(fp)
    }

    pub fn from_predicate(max_arity: usize, pred: impl Fn(usize, u64) -> bool) -> Result<Self> {
        let mut fp = Self::empty(max_arity)?;
        for n in 1..=max_arity {
            for code in 0..code_space(n) {
                if pred(n, code) {
                    fp.per_arity[n - 1].insert(code as usize);
                }
            }
        }
        Ok(fp)
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    pub fn arity_set(&self, arity: usize) -> &FixedBitSet {
        &self.per_arity[arity - 1]
    }

    #[inline]
    pub fn contains_code(&self, arity: usize, code: u64) -> bool {
        arity >= 1 && arity <= self.max_arity && self.per_arity[arity - 1].contains(code as usize)
    }

    pub fn contains(&self, f: &PartialFunction) -> bool {
        match f.code() {
            Some(code) => self.contains_code(f.arity(), code),
            None => false,
        }
    }

    /// Inserts `f`; returns `false` when it was already present or too wide.
    pub fn insert(&mut self, f: &PartialFunction) -> bool {
        if f.arity() > self.max_arity {
            return false;
        }
        let code = f.code().expect("arity within code range") as usize;
        !self.per_arity[f.arity() - 1].put(code)
    }

    pub fn insert_code(&mut self, arity: usize, code: u64) {
        self.per_arity[arity - 1].insert(code as usize);
    }

    pub fn count(&self, arity: usize) -> usize {
        self.per_arity[arity - 1].count_ones(..)
    }

    pub fn codes(&self, arity: usize) -> impl Iterator<Item = u64> + '_ {
        self.per_arity[arity - 1].ones().map(|c| c as u64)
    }

    pub fn functions(&self, arity: usize) -> impl Iterator<Item = PartialFunction> + '_ {
        self.codes(arity)
            .map(move |c| PartialFunction::from_code(arity, c).expect("stored code is valid"))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.max_arity != other.max_arity {
            return Err(Error::ArityMismatch {
                expected: self.max_arity,
                found: other.max_arity,
            });
        }
        Ok(())
    }

    pub fn is_subset(&self, other: &Self) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self
            .per_arity
            .iter()
            .zip(&other.per_arity)
            .all(|(a, b)| a.is_subset(b)))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.per_arity.iter_mut().zip(&other.per_arity) {
            a.intersect_with(b);
        }
        Ok(out)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.per_arity.iter_mut().zip(&other.per_arity) {
            a.union_with(b);
        }
        Ok(out)
    }

    /// Keeps only the total functions.
    pub fn total_side(&self) -> Self {
        let mut out = Self::empty(self.max_arity).expect("arity already valid");
        for n in 1..=self.max_arity {
            for code in total_codes(n) {
                if self.contains_code(n, code) {
                    out.insert_code(n, code);
                }
            }
        }
        out
    }

    /// Every restriction of every member is a member.
    pub fn is_restriction_closed(&self) -> bool {
        (1..=self.max_arity).all(|n| {
            self.codes(n)
                .all(|code| one_point_restrictions(n, code).all(|r| self.contains_code(n, r)))
        })
    }

    pub fn contains_projections(&self) -> bool {
        (1..=self.max_arity).all(|n| {
            (0..n).all(|i| {
                self.contains(&PartialFunction::projection(n, i).expect("valid projection"))
            })
        })
    }

    /// Member counts and a 64-bit content hash per arity.
    pub fn digest(&self) -> Vec<ArityDigest> {
        (1..=self.max_arity)
            .map(|n| {
                let set = &self.per_arity[n - 1];
                let mut bytes = vec![0u8; set.len().div_ceil(8)];
                for i in set.ones() {
                    bytes[i / 8] |= 1 << (i % 8);
                }
                let hash = Sha256::digest(&bytes);
                let hex: String = hash[..8].iter().map(|b| format!("{b:02x}")).collect();
                ArityDigest {
                    arity: n,
                    members: set.count_ones(..),
                    hash: hex,
                }
            })
            .collect()
    }
}

/// Codes of the total functions of arity `n`, in increasing truth-table order.
pub fn total_codes(n: usize) -> impl Iterator<Item = u64> {
    let points = 1u32 << n;
    (0..(1u64 << points)).map(move |table| {
        let mut code = 0u64;
        for p in (0..points).rev() {
            code = code * 3 + 1 + ((table >> p) & 1);
        }
        code
    })
}

/// Codes obtained by removing a single point from the domain of `code`.
pub fn one_point_restrictions(n: usize, code: u64) -> impl Iterator<Item = u64> {
    let points = 1u32 << n;
    let mut pow = 1u64;
    let mut c = code;
    let mut out = Vec::new();
    for _ in 0..points {
        let d = c % 3;
        if d != 0 {
            out.push(code - d * pow);
        }
        c /= 3;
        pow *= 3;
    }
    out.into_iter()
}

/// Number of defined points of a code.
pub fn code_domain_size(n: usize, code: u64) -> usize {
    let mut c = code;
    let mut size = 0;
    for _ in 0..(1u32 << n) {
        if !c.is_multiple_of(3) {
            size += 1;
        }
        c /= 3;
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_codes_decode_to_total_functions() {
        let codes: Vec<u64> = total_codes(2).collect();
        assert_eq!(codes.len(), 16);
        for code in codes {
            assert!(PartialFunction::from_code(2, code).unwrap().is_total());
        }
    }

    #[test]
    fn restrictions_drop_one_point() {
        let and = PartialFunction::total(2, |p| p == 3).unwrap();
        let code = and.code().unwrap();
        let rs: Vec<u64> = one_point_restrictions(2, code).collect();
        assert_eq!(rs.len(), 4);
        for r in rs {
            let g = PartialFunction::from_code(2, r).unwrap();
            assert_eq!(g.domain_size(), 3);
            assert!(g.is_restriction_of(&and).unwrap());
        }
        assert_eq!(code_domain_size(2, code), 4);
    }

    #[test]
    fn full_fingerprint_is_strong_and_has_projections() {
        let fp = CloneFingerprint::full(2).unwrap();
        assert!(fp.is_restriction_closed());
        assert!(fp.contains_projections());
        assert_eq!(fp.count(1), 9);
        assert_eq!(fp.count(2), 81);
        assert_eq!(fp.total_side().count(2), 16);
    }

    #[test]
    fn digest_is_stable_and_distinguishes() {
        let a = CloneFingerprint::full(2).unwrap();
        let b = a.total_side();
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest()[1].hash, b.digest()[1].hash);
        assert_eq!(a.digest()[0].members, 9);
    }

    #[test]
    fn arity_limits() {
        assert!(CloneFingerprint::empty(0).is_err());
        assert!(CloneFingerprint::empty(5).is_err());
        let a = CloneFingerprint::empty(2).unwrap();
        let b = CloneFingerprint::empty(3).unwrap();
        assert!(a.is_subset(&b).is_err());
    }
}
