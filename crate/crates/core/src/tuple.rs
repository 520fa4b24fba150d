//! Boolean tuples packed into integers.
//!
//! A tuple `(x_1, ..., x_n)` is stored with `x_1` in the most significant of
//! the `n` low bits, so the integer order of codes is the lexicographic order
//! of tuples. Every table and file format in the crate uses this order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest arity for which full tables (`2^arity` bits) are materialized.
pub const MAX_ARITY: usize = 24;

pub(crate) fn check_arity(arity: usize) -> Result<()> {
    if arity == 0 || arity > MAX_ARITY {
        Err(Error::ArityOutOfRange(arity))
    } else {
        Ok(())
    }
}

/// Value of coordinate `i` (0-based, `i = 0` is `x_1`) of the packed tuple `point`.
#[inline]
pub fn coord(point: u32, arity: usize, i: usize) -> u32 {
    (point >> (arity - 1 - i)) & 1
}

/// Builds the packed tuple `(x_{i_1}, ..., x_{i_l})` from `point` (0-based indices).
#[inline]
pub fn select(point: u32, arity: usize, indices: &[usize]) -> u32 {
    indices
        .iter()
        .fold(0, |acc, &i| (acc << 1) | coord(point, arity, i))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitTuple {
    len: u8,
    bits: u32,
}

impl BitTuple {
    pub fn new(len: usize, bits: u32) -> Result<Self> {
        check_arity(len)?;
        if len < 32 && bits >> len != 0 {
            return Err(Error::InvalidParameter(format!(
                "{bits} does not fit in {len} bits"
            )));
        }
        Ok(BitTuple {
            len: len as u8,
            bits,
        })
    }

    pub fn from_bools(values: &[bool]) -> Result<Self> {
        let bits = values.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Self::new(values.len(), bits)
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(len, 0)
    }

    pub fn ones(len: usize) -> Result<Self> {
        check_arity(len)?;
        Self::new(len, (1u32 << len) - 1)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Coordinate `i`, 0-based.
    pub fn get(&self, i: usize) -> bool {
        coord(self.bits, self.len(), i) == 1
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

impl fmt::Display for BitTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "unexpected character `{other}` in tuple `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bools(&values)
    }
}

impl TryFrom<String> for BitTuple {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<BitTuple> for String {
    fn from(value: BitTuple) -> Self {
        value.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_coordinate_is_most_significant() {
        let t: BitTuple = "100".parse().unwrap();
        assert_eq!(t.bits(), 4);
        assert!(t.get(0));
        assert!(!t.get(2));
        assert_eq!(select(0b110, 3, &[2, 0, 0]), 0b011);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(BitTuple::new(0, 0).is_err());
        assert!(BitTuple::new(25, 0).is_err());
        assert!(BitTuple::new(2, 4).is_err());
        assert!("01x".parse::<BitTuple>().is_err());
    }

    proptest! {
        #[test]
        fn decode_encode_is_identity(len in 1usize..=24, raw in any::<u32>()) {
            let bits = raw & ((1u32 << len) - 1);
            let t = BitTuple::new(len, bits).unwrap();
            let back = BitTuple::from_bools(&t.to_bools()).unwrap();
            prop_assert_eq!(back, t);
            prop_assert_eq!(t.to_string().parse::<BitTuple>().unwrap(), t);
        }
    }
}
