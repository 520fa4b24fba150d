//! Partial Boolean functions and their totally symmetric compact form.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tuple::{check_arity, coord, BitTuple};

/// Largest arity whose partial functions have a base-3 code in a `u64`.
pub const MAX_CODE_ARITY: usize = 5;

/// A partial function `f: S -> {0,1}` with `S ⊆ {0,1}^n`.
///
/// `values` only has bits inside `domain`; the empty-domain function exists at
/// every arity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialFunction {
    arity: usize,
    domain: FixedBitSet,
    values: FixedBitSet,
}

impl PartialFunction {
    /// The function with empty domain.
    pub fn empty(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(PartialFunction {
            arity,
            domain: FixedBitSet::with_capacity(1 << arity),
            values: FixedBitSet::with_capacity(1 << arity),
        })
    }

    pub fn total(arity: usize, f: impl Fn(u32) -> bool) -> Result<Self> {
        Self::from_fn(arity, |p| Some(f(p)))
    }

    pub fn from_fn(arity: usize, f: impl Fn(u32) -> Option<bool>) -> Result<Self> {
        let mut g = Self::empty(arity)?;
        for p in 0..(1u32 << arity) {
            if let Some(v) = f(p) {
                g.define(p, v);
            }
        }
        Ok(g)
    }

    /// Builds a function from an explicit point-to-value table.
    pub fn from_table<I>(arity: usize, table: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BitTuple, bool)>,
    {
        let mut g = Self::empty(arity)?;
        for (point, value) in table {
            if point.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: point.len(),
                });
            }
            if g.is_defined(point.bits()) {
                return Err(Error::DuplicatePoint(point.to_string()));
            }
            g.define(point.bits(), value);
        }
        Ok(g)
    }

    pub fn projection(arity: usize, i: usize) -> Result<Self> {
        if i >= arity {
            return Err(Error::InvalidParameter(format!(
                "projection index {} out of range for arity {arity}",
                i + 1
            )));
        }
        Self::total(arity, |p| coord(p, arity, i) == 1)
    }

    pub fn constant(arity: usize, value: bool) -> Result<Self> {
        Self::total(arity, |_| value)
    }

    /// Decodes a base-3 code: digit `p` (least significant first) is 0 for
    /// undefined, 1 for value 0 and 2 for value 1 at the tuple with code `p`.
    pub fn from_code(arity: usize, code: u64) -> Result<Self> {
        if arity > MAX_CODE_ARITY {
            return Err(Error::ArityOutOfRange(arity));
        }
        if code >= code_space(arity) {
            return Err(Error::InvalidParameter(format!(
                "code {code} is too large for arity {arity}"
            )));
        }
        let mut g = Self::empty(arity)?;
        let mut c = code;
        for p in 0..(1u32 << arity) {
            match c % 3 {
                1 => g.define(p, false),
                2 => g.define(p, true),
                _ => {}
            }
            c /= 3;
        }
        Ok(g)
    }

    pub fn code(&self) -> Option<u64> {
        if self.arity > MAX_CODE_ARITY {
            return None;
        }
        let mut code = 0u64;
        for p in (0..(1u32 << self.arity)).rev() {
            code = code * 3 + self.digit(p);
        }
        Some(code)
    }

    fn digit(&self, p: u32) -> u64 {
        match self.value(p) {
            None => 0,
            Some(false) => 1,
            Some(true) => 2,
        }
    }

    pub(crate) fn define(&mut self, p: u32, v: bool) {
        self.domain.insert(p as usize);
        self.values.set(p as usize, v);
    }

    pub(crate) fn undefine(&mut self, p: u32) {
        self.domain.set(p as usize, false);
        self.values.set(p as usize, false);
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    pub fn is_defined(&self, p: u32) -> bool {
        self.domain.contains(p as usize)
    }

    #[inline]
    pub fn value(&self, p: u32) -> Option<bool> {
        if self.domain.contains(p as usize) {
            Some(self.values.contains(p as usize))
        } else {
            None
        }
    }

    pub fn domain(&self) -> &FixedBitSet {
        &self.domain
    }

    pub fn values(&self) -> &FixedBitSet {
        &self.values
    }

    pub fn domain_points(&self) -> impl Iterator<Item = u32> + '_ {
        self.domain.ones().map(|p| p as u32)
    }

    pub fn domain_size(&self) -> usize {
        self.domain.count_ones(..)
    }

    pub fn is_total(&self) -> bool {
        self.domain.is_full()
    }

    pub fn table(&self) -> Vec<(BitTuple, bool)> {
        self.domain_points()
            .map(|p| {
                (
                    BitTuple::new(self.arity, p).expect("point fits arity"),
                    self.values.contains(p as usize),
                )
            })
            .collect()
    }

    /// `self ≤ other`: the domain is contained in `other`'s and values agree on it.
    pub fn is_restriction_of(&self, other: &PartialFunction) -> Result<bool> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        if !self.domain.is_subset(&other.domain) {
            return Ok(false);
        }
        let mut restricted = other.values.clone();
        restricted.intersect_with(&self.domain);
        Ok(restricted == self.values)
    }

    /// Keeps only the domain points accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(u32) -> bool) -> PartialFunction {
        let mut g = self.clone();
        for p in self.domain_points() {
            if !keep(p) {
                g.undefine(p);
            }
        }
        g
    }

    /// Renames variables: the result `g(x_1..x_n) = f(x_{perm[0]+1}, ..., x_{perm[n-1]+1})`.
    pub fn permute(&self, perm: &[usize]) -> Result<PartialFunction> {
        if perm.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: perm.len(),
            });
        }
        let n = self.arity;
        Self::from_fn(n, |x| self.value(crate::tuple::select(x, n, perm)))
    }
}

/// Number of partial functions of the given arity, `3^(2^arity)`.
pub fn code_space(arity: usize) -> u64 {
    3u64.pow(1 << arity)
}

impl fmt::Debug for PartialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialFunction[{}]{{", self.arity)?;
        for (k, (t, v)) in self.table().into_iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}->{}", v as u8)?;
        }
        f.write_str("}")
    }
}

impl Serialize for PartialFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("PartialFunction", 2)?;
        s.serialize_field("arity", &self.arity)?;
        let table: Vec<String> = self
            .table()
            .into_iter()
            .map(|(t, v)| format!("{t} -> {}", v as u8))
            .collect();
        s.serialize_field("table", &table)?;
        s.end()
    }
}

/// Upper bound on the arity of a symmetric function kept in compact form.
pub const MAX_SYMMETRIC_ARITY: usize = 64;

/// A totally symmetric partial function, given by its value on each tuple weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricPartialFunction {
    by_weight: Vec<Option<bool>>,
}

impl SymmetricPartialFunction {
    /// `by_weight[w]` is the value at every tuple with `w` ones (`None` = undefined).
    pub fn new(by_weight: Vec<Option<bool>>) -> Result<Self> {
        let arity = by_weight.len().saturating_sub(1);
        if arity == 0 || arity > MAX_SYMMETRIC_ARITY {
            return Err(Error::ArityOutOfRange(arity));
        }
        Ok(SymmetricPartialFunction { by_weight })
    }

    pub fn arity(&self) -> usize {
        self.by_weight.len() - 1
    }

    pub fn by_weight(&self) -> &[Option<bool>] {
        &self.by_weight
    }

    #[inline]
    pub fn at_weight(&self, w: usize) -> Option<bool> {
        self.by_weight[w]
    }

    /// Full table form; only possible up to the table arity cap.
    pub fn expand(&self) -> Result<PartialFunction> {
        let n = self.arity();
        check_arity(n)?;
        PartialFunction::from_fn(n, |p| self.by_weight[p.count_ones() as usize])
    }

    /// Recovers the compact form if `f`'s value depends only on the tuple weight.
    pub fn from_function(f: &PartialFunction) -> Option<Self> {
        let n = f.arity();
        let mut by_weight: Vec<Option<Option<bool>>> = vec![None; n + 1];
        for p in 0..(1u32 << n) {
            let w = p.count_ones() as usize;
            let v = f.value(p);
            match by_weight[w] {
                None => by_weight[w] = Some(v),
                Some(seen) if seen != v => return None,
                _ => {}
            }
        }
        Some(SymmetricPartialFunction {
            by_weight: by_weight.into_iter().map(|v| v.flatten()).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(v: u8) -> Option<bool> {
        match v {
            0 => Some(false),
            1 => Some(true),
            _ => None,
        }
    }

    #[test]
    fn table_encoding() {
        let id = PartialFunction::from_table(
            1,
            [("0".parse().unwrap(), false), ("1".parse().unwrap(), true)],
        )
        .unwrap();
        assert_eq!(id, PartialFunction::projection(1, 0).unwrap());

        let empty = PartialFunction::from_table(2, []).unwrap();
        assert_eq!(empty.domain_size(), 0);
        assert_eq!(empty, PartialFunction::empty(2).unwrap());
    }

    #[test]
    fn table_errors() {
        let t0: BitTuple = "0".parse().unwrap();
        assert!(matches!(
            PartialFunction::from_table(1, [(t0, false), (t0, true)]),
            Err(Error::DuplicatePoint(_))
        ));
        assert!(matches!(
            PartialFunction::from_table(2, [(t0, false)]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(PartialFunction::from_table(25, []).is_err());
    }

    #[test]
    fn restriction_order() {
        let and = PartialFunction::total(2, |p| p == 3).unwrap();
        let empty = PartialFunction::empty(2).unwrap();
        assert!(empty.is_restriction_of(&and).unwrap());
        assert!(and.is_restriction_of(&and).unwrap());
        let wrong = PartialFunction::from_fn(2, |p| (p == 3).then_some(false)).unwrap();
        assert!(!wrong.is_restriction_of(&and).unwrap());
        assert!(empty
            .is_restriction_of(&PartialFunction::empty(3).unwrap())
            .is_err());
    }

    #[test]
    fn xi1_is_not_below_the_parity_function() {
        let xi1 = SymmetricPartialFunction::new(vec![u(0), u(0), u(9), u(9), u(1)])
            .unwrap()
            .expand()
            .unwrap();
        let parity = PartialFunction::total(4, |p| p.count_ones() % 2 == 1).unwrap();
        // parity(1,1,1,1) = 0 while ξ_1(1,1,1,1) = 1.
        assert_eq!(parity.value(0b1111), Some(false));
        assert!(!xi1.is_restriction_of(&parity).unwrap());
    }

    #[test]
    fn expand_symmetric_examples() {
        let xi1 = SymmetricPartialFunction::new(vec![u(0), u(0), u(9), u(9), u(1)])
            .unwrap()
            .expand()
            .unwrap();
        let dom: Vec<u32> = xi1.domain_points().collect();
        assert_eq!(dom, vec![0b0000, 0b0001, 0b0010, 0b0100, 0b1000, 0b1111]);
        assert_eq!(xi1.value(0b1111), Some(true));
        assert!(xi1
            .domain_points()
            .filter(|&p| p != 15)
            .all(|p| xi1.value(p) == Some(false)));

        let none = SymmetricPartialFunction::new(vec![None; 4]).unwrap();
        assert_eq!(none.expand().unwrap(), PartialFunction::empty(3).unwrap());

        let two = SymmetricPartialFunction::new(vec![u(0), u(9), u(1)])
            .unwrap()
            .expand()
            .unwrap();
        assert_eq!(two.domain_points().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(two.value(0), Some(false));
        assert_eq!(two.value(3), Some(true));
    }

    #[test]
    fn all_small_codes_round_trip() {
        for arity in 1..=3 {
            for code in 0..code_space(arity) {
                let f = PartialFunction::from_code(arity, code).unwrap();
                assert_eq!(f.code(), Some(code));
                let g = PartialFunction::from_table(arity, f.table()).unwrap();
                assert_eq!(g, f);
            }
        }
        assert_eq!(code_space(1) + code_space(2) + code_space(3), 9 + 81 + 6561);
    }

    proptest! {
        #[test]
        fn expansion_is_permutation_invariant(
            weights in proptest::collection::vec(0u8..3, 2..=7),
            perm_seed in any::<u64>(),
        ) {
            let sf = SymmetricPartialFunction::new(weights.iter().map(|&w| u(if w == 2 { 9 } else { w })).collect()).unwrap();
            let f = sf.expand().unwrap();
            let n = f.arity();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = perm_seed;
            for i in (1..n).rev() {
                let j = (s % (i as u64 + 1)) as usize;
                s /= i as u64 + 1;
                perm.swap(i, j);
            }
            prop_assert_eq!(f.permute(&perm).unwrap(), f.clone());
            prop_assert_eq!(SymmetricPartialFunction::from_function(&f).unwrap(), sf);
        }
    }
}
