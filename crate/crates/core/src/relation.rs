use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tuple::{check_arity, BitTuple};

/// An `h`-ary Boolean relation stored as a membership table over all `2^h` tuples.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    members: FixedBitSet,
}

impl Relation {
    pub fn empty(arity: usize) -> Result<Self> {
        check_arity(arity)?;
        Ok(Relation {
            arity,
            members: FixedBitSet::with_capacity(1 << arity),
        })
    }

    pub fn full(arity: usize) -> Result<Self> {
        let mut r = Self::empty(arity)?;
        r.members.insert_range(..);
        Ok(r)
    }

    pub fn from_predicate(arity: usize, pred: impl Fn(u32) -> bool) -> Result<Self> {
        let mut r = Self::empty(arity)?;
        for p in 0..(1u32 << arity) {
            if pred(p) {
                r.members.insert(p as usize);
            }
        }
        Ok(r)
    }

    pub fn from_points(arity: usize, points: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut r = Self::empty(arity)?;
        for p in points {
            if (p as usize) >= r.members.len() {
                return Err(Error::InvalidParameter(format!(
                    "point {p} does not fit arity {arity}"
                )));
            }
            r.members.insert(p as usize);
        }
        Ok(r)
    }

    /// Builds a relation from tuples written as `0`/`1` strings of equal length.
    pub fn from_tuples<S: AsRef<str>>(tuples: &[S]) -> Result<Self> {
        let first = tuples.first().ok_or_else(|| {
            Error::InvalidParameter("arity of an empty tuple list is unknown".into())
        })?;
        let arity = first.as_ref().len();
        let mut r = Self::empty(arity)?;
        for t in tuples {
            let t: BitTuple = t.as_ref().parse()?;
            if t.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: t.len(),
                });
            }
            r.members.insert(t.bits() as usize);
        }
        Ok(r)
    }

    /// Reads a displayed matrix whose rows are coordinates and whose columns
    /// are the member tuples.
    pub fn from_matrix_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let arity = rows.len();
        check_arity(arity)?;
        let width = rows[0].as_ref().len();
        let grid: Vec<Vec<u8>> = rows.iter().map(|r| r.as_ref().bytes().collect()).collect();
        if grid.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("ragged matrix".into()));
        }
        let mut r = Self::empty(arity)?;
        for col in 0..width {
            let mut p = 0u32;
            for row in &grid {
                p = (p << 1)
                    | match row[col] {
                        b'0' => 0,
                        b'1' => 1,
                        c => {
                            return Err(Error::InvalidParameter(format!(
                                "unexpected matrix entry `{}`",
                                c as char
                            )))
                        }
                    };
            }
            r.members.insert(p as usize);
        }
        Ok(r)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn members(&self) -> &FixedBitSet {
        &self.members
    }

    #[inline]
    pub fn contains(&self, point: u32) -> bool {
        self.members.contains(point as usize)
    }

    pub fn contains_tuple(&self, t: &BitTuple) -> bool {
        t.len() == self.arity && self.contains(t.bits())
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.members.is_full()
    }

    /// Member tuples in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.ones().map(|p| p as u32)
    }

    pub fn tuples(&self) -> impl Iterator<Item = BitTuple> + '_ {
        self.points()
            .map(move |p| BitTuple::new(self.arity, p).expect("member fits arity"))
    }

    pub fn insert(&mut self, point: u32) {
        self.members.insert(point as usize);
    }

    pub fn remove(&mut self, point: u32) {
        self.members.set(point as usize, false);
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.arity == other.arity && self.members.is_subset(&other.members)
    }

    fn same_arity(&self, other: &Relation) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        self.same_arity(other)?;
        let mut r = self.clone();
        r.members.intersect_with(&other.members);
        Ok(r)
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.same_arity(other)?;
        let mut r = self.clone();
        r.members.union_with(&other.members);
        Ok(r)
    }

    pub fn complement(&self) -> Relation {
        let mut r = self.clone();
        r.members.toggle_range(..);
        r
    }

    /// Relational product: `(x, y)` is a member iff `x ∈ self` and `y ∈ other`.
    pub fn product(&self, other: &Relation) -> Result<Relation> {
        let arity = self.arity + other.arity;
        check_arity(arity)?;
        let mut r = Self::empty(arity)?;
        for a in self.points() {
            for b in other.points() {
                r.insert((a << other.arity) | b);
            }
        }
        Ok(r)
    }

    /// Swaps 0 and 1 in every coordinate.
    pub fn dual(&self) -> Relation {
        let mask = ((1u64 << self.arity) - 1) as u32;
        let mut r = Self::empty(self.arity).expect("arity already checked");
        for p in self.points() {
            r.insert(!p & mask);
        }
        r
    }

    /// Projection onto the given 0-based coordinates.
    pub fn project(&self, coords: &[usize]) -> Result<Relation> {
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.arity) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {} out of range for arity {}",
                bad + 1,
                self.arity
            )));
        }
        let mut r = Self::empty(coords.len())?;
        for p in self.points() {
            r.insert(crate::tuple::select(p, self.arity, coords));
        }
        Ok(r)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}]{{", self.arity)?;
        for (k, t) in self.tuples().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for Relation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Relation", 2)?;
        s.serialize_field("arity", &self.arity)?;
        let tuples: Vec<String> = self.tuples().map(|t| t.to_string()).collect();
        s.serialize_field("tuples", &tuples)?;
        s.end()
    }
}
