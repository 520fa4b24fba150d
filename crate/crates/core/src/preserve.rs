//! Preservation of relations and relation pairs, bounded-arity fingerprints of
//! `pPol`, `Pol` and `cPol`, and invariance tests for total clones.
//!
//! A matrix has one row per coordinate of the relation and one column per
//! argument of the function. Rows must lie in the domain of `f`, columns in
//! the antecedent; the output column `f(M)` must then lie in the consequent.
//! Rows may repeat.

use std::fmt;
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::fingerprint::{code_domain_size, one_point_restrictions, total_codes, CloneFingerprint};
use crate::function::{code_space, PartialFunction, SymmetricPartialFunction};
use crate::pair::RelationPair;
use crate::relation::Relation;
use crate::tuple::BitTuple;

/// Largest arity for which fingerprints over all partial functions are built.
pub const EXHAUSTIVE_ARITY: usize = 3;

/// An `h × n` Boolean matrix stored as its rows (points of arity `n`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    width: usize,
    rows: Vec<u32>,
}

impl Matrix {
    pub fn new(width: usize, rows: Vec<u32>) -> Self {
        Matrix { width, rows }
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> Vec<BitTuple> {
        self.rows
            .iter()
            .map(|&r| BitTuple::new(self.width, r).expect("row fits width"))
            .collect()
    }

    /// Column `j` (0-based) as an `h`-tuple.
    pub fn column(&self, j: usize) -> BitTuple {
        let shift = self.width - 1 - j;
        let bits = self
            .rows
            .iter()
            .fold(0u32, |acc, &r| (acc << 1) | ((r >> shift) & 1));
        BitTuple::new(self.height(), bits).expect("column fits height")
    }

    pub fn columns(&self) -> Vec<BitTuple> {
        (0..self.width).map(|j| self.column(j)).collect()
    }

    /// `f(M)`, or `None` if some row lies outside `dom f`.
    pub fn apply(&self, f: &PartialFunction) -> Option<BitTuple> {
        let mut bits = 0u32;
        for &r in &self.rows {
            bits = (bits << 1) | f.value(r)? as u32;
        }
        Some(BitTuple::new(self.height(), bits).expect("output fits height"))
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows().iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Matrix", 2)?;
        let rows: Vec<String> = self.rows().iter().map(|r| r.to_string()).collect();
        let cols: Vec<String> = self.columns().iter().map(|c| c.to_string()).collect();
        st.serialize_field("rows", &rows)?;
        st.serialize_field("columns", &cols)?;
        st.end()
    }
}

/// Prefix sets of a relation: `levels[d]` holds the length-`d` prefixes of members.
#[derive(Clone, Debug)]
pub(crate) struct PrefixTable {
    pub(crate) levels: Vec<FixedBitSet>,
}

impl PrefixTable {
    pub(crate) fn new(rel: &Relation) -> Self {
        let h = rel.arity();
        let mut levels = vec![FixedBitSet::new(); h + 1];
        levels[h] = rel.members().clone();
        for d in (0..h).rev() {
            let mut set = FixedBitSet::with_capacity(1 << d);
            for p in levels[d + 1].ones() {
                set.insert(p >> 1);
            }
            levels[d] = set;
        }
        PrefixTable { levels }
    }

    fn height(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Depth-first enumeration of the matrices with rows in `dom f` and columns in
/// a relation, pruned by column prefixes.
struct MatrixSearch<'a> {
    f: &'a PartialFunction,
    table: &'a PrefixTable,
    dom: Vec<u32>,
    prefixes: Vec<u32>,
    rows: Vec<u32>,
}

impl<'a> MatrixSearch<'a> {
    fn new(f: &'a PartialFunction, table: &'a PrefixTable) -> Self {
        MatrixSearch {
            f,
            table,
            dom: f.domain_points().collect(),
            prefixes: vec![0; f.arity()],
            rows: Vec::with_capacity(table.height()),
        }
    }

    /// Calls `visit(rows, output)` on every matrix until it breaks.
    fn run(&mut self, visit: &mut impl FnMut(&[u32], u32) -> ControlFlow<()>) -> ControlFlow<()> {
        if self.dom.is_empty() || self.table.levels[0].is_clear() {
            return ControlFlow::Continue(());
        }
        self.descend(0, 0, visit)
    }

    fn descend(
        &mut self,
        depth: usize,
        out: u32,
        visit: &mut impl FnMut(&[u32], u32) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if depth == self.table.height() {
            return visit(&self.rows, out);
        }
        let next = &self.table.levels[depth + 1];
        let n = self.f.arity();
        let (mut must_one, mut must_zero) = (0u32, 0u32);
        for c in 0..n {
            let p = (self.prefixes[c] << 1) as usize;
            match (next.contains(p), next.contains(p | 1)) {
                (false, false) => return ControlFlow::Continue(()),
                (true, false) => must_zero |= 1 << c,
                (false, true) => must_one |= 1 << c,
                (true, true) => {}
            }
        }
        let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let free = all & !must_one & !must_zero;
        if (1u64 << free.count_ones()) <= self.dom.len() as u64 {
            let mut s = free;
            loop {
                let r = must_one | s;
                if self.f.is_defined(r) {
                    self.step(depth, out, r, visit)?;
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & free;
            }
        } else {
            for k in 0..self.dom.len() {
                let r = self.dom[k];
                if r & must_zero == 0 && r & must_one == must_one {
                    self.step(depth, out, r, visit)?;
                }
            }
        }
        ControlFlow::Continue(())
    }

    fn step(
        &mut self,
        depth: usize,
        out: u32,
        r: u32,
        visit: &mut impl FnMut(&[u32], u32) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        for (c, p) in self.prefixes.iter_mut().enumerate() {
            *p = (*p << 1) | ((r >> c) & 1);
        }
        self.rows.push(r);
        let v = self.f.value(r).expect("row in domain") as u32;
        let flow = self.descend(depth + 1, (out << 1) | v, visit);
        self.rows.pop();
        for p in self.prefixes.iter_mut() {
            *p >>= 1;
        }
        flow
    }
}

/// A relation pair prepared for repeated preservation queries.
#[derive(Clone, Debug)]
pub struct Preserver {
    table: PrefixTable,
    consequent: Relation,
}

impl Preserver {
    pub fn relation(rho: &Relation) -> Self {
        Preserver {
            table: PrefixTable::new(rho),
            consequent: rho.clone(),
        }
    }

    pub fn pair(q: &RelationPair) -> Self {
        Preserver {
            table: PrefixTable::new(q.antecedent()),
            consequent: q.consequent().clone(),
        }
    }

    /// A matrix whose output leaves the consequent, if one exists.
    pub fn find_violation(&self, f: &PartialFunction) -> Option<Matrix> {
        let mut found = None;
        let _ = MatrixSearch::new(f, &self.table).run(&mut |rows, out| {
            if self.consequent.contains(out) {
                ControlFlow::Continue(())
            } else {
                found = Some(Matrix::new(f.arity(), rows.to_vec()));
                ControlFlow::Break(())
            }
        });
        found
    }

    pub fn preserves(&self, f: &PartialFunction) -> bool {
        self.find_violation(f).is_none()
    }
}

pub fn find_violation(f: &PartialFunction, rho: &Relation) -> Option<Matrix> {
    Preserver::relation(rho).find_violation(f)
}

pub fn preserves(f: &PartialFunction, rho: &Relation) -> bool {
    find_violation(f, rho).is_none()
}

pub fn preserves_all(f: &PartialFunction, sigma: &[Relation]) -> bool {
    sigma.iter().all(|rho| preserves(f, rho))
}

pub fn find_pair_violation(f: &PartialFunction, q: &RelationPair) -> Option<Matrix> {
    Preserver::pair(q).find_violation(f)
}

pub fn preserves_pair(f: &PartialFunction, q: &RelationPair) -> bool {
    find_pair_violation(f, q).is_none()
}

/// All outputs `f(M)` over matrices with columns in `rho`.
pub fn image(f: &PartialFunction, rho: &Relation) -> Relation {
    let table = PrefixTable::new(rho);
    let mut out = Relation::empty(rho.arity()).expect("arity already valid");
    let _ = MatrixSearch::new(f, &table).run(&mut |_, o| {
        out.insert(o);
        ControlFlow::Continue(())
    });
    out
}

/// `C(n + r - 1, r - 1)`: multisets of size `n` drawn from `r` kinds.
pub fn multiset_count(n: usize, r: usize) -> u128 {
    if r == 0 {
        return (n == 0) as u128;
    }
    let k = (r - 1) as u128;
    let top = (n + r - 1) as u128;
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (top - i) / (i + 1);
    }
    acc
}

/// A violating matrix of a symmetric function, given by column multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymmetricViolation {
    pub columns: Vec<(BitTuple, usize)>,
    pub output: BitTuple,
}

/// Symmetric-function preservation by enumerating column multisets.
///
/// Row weights are fixed by the multiset, so they decide domain membership and
/// the output column without expanding the function.
pub fn find_symmetric_violation(
    sf: &SymmetricPartialFunction,
    rho: &Relation,
    budget: &Budget,
) -> Result<Option<SymmetricViolation>> {
    let n = sf.arity();
    let members: Vec<u32> = rho.points().collect();
    let needed = multiset_count(n, members.len());
    if needed > budget.max_multisets as u128 {
        return Err(Error::BudgetExceeded {
            what: "column multisets",
            needed,
            budget: budget.max_multisets as u128,
        });
    }
    if members.is_empty() {
        return Ok(None);
    }
    let h = rho.arity();
    let mut counts = vec![0usize; members.len()];
    let mut weights = vec![0usize; h];
    let mut found = None;
    let _ = multisets(
        0,
        n,
        &members,
        h,
        &mut counts,
        &mut weights,
        &mut |counts, weights| {
            let mut out = 0u32;
            for &w in weights {
                match sf.at_weight(w) {
                    Some(v) => out = (out << 1) | v as u32,
                    None => return ControlFlow::Continue(()),
                }
            }
            if rho.contains(out) {
                return ControlFlow::Continue(());
            }
            let columns = members
                .iter()
                .zip(counts)
                .filter(|(_, &c)| c > 0)
                .map(|(&m, &c)| (BitTuple::new(h, m).expect("member fits arity"), c))
                .collect();
            found = Some(SymmetricViolation {
                columns,
                output: BitTuple::new(h, out).expect("output fits arity"),
            });
            ControlFlow::Break(())
        },
    );
    Ok(found)
}

fn multisets(
    kind: usize,
    remaining: usize,
    members: &[u32],
    h: usize,
    counts: &mut [usize],
    weights: &mut [usize],
    visit: &mut impl FnMut(&[usize], &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let last = kind + 1 == members.len();
    let range = if last {
        remaining..=remaining
    } else {
        0..=remaining
    };
    for c in range {
        counts[kind] = c;
        add_weight(weights, members[kind], h, c, true);
        let flow = if last {
            visit(counts, weights)
        } else {
            multisets(kind + 1, remaining - c, members, h, counts, weights, visit)
        };
        add_weight(weights, members[kind], h, c, false);
        flow?;
    }
    counts[kind] = 0;
    ControlFlow::Continue(())
}

fn add_weight(weights: &mut [usize], column: u32, h: usize, times: usize, add: bool) {
    for (i, w) in weights.iter_mut().enumerate() {
        if (column >> (h - 1 - i)) & 1 == 1 {
            if add {
                *w += times;
            } else {
                *w -= times;
            }
        }
    }
}

pub fn preserves_symmetric(
    sf: &SymmetricPartialFunction,
    rho: &Relation,
    budget: &Budget,
) -> Result<bool> {
    Ok(find_symmetric_violation(sf, rho, budget)?.is_none())
}

/// Builds the fingerprint of a restriction-closed class.
///
/// Codes are visited by increasing domain size, so a code is tested only when
/// all of its one-point restrictions are already members.
fn strong_fingerprint(
    k: usize,
    test: impl Fn(&PartialFunction) -> bool + Sync,
) -> Result<CloneFingerprint> {
    if k > EXHAUSTIVE_ARITY {
        return Err(Error::BudgetExceeded {
            what: "exhaustive fingerprint arity",
            needed: k as u128,
            budget: EXHAUSTIVE_ARITY as u128,
        });
    }
    let mut fp = CloneFingerprint::empty(k)?;
    for n in 1..=k {
        let mut by_size: Vec<Vec<u64>> = vec![Vec::new(); (1 << n) + 1];
        for code in 0..code_space(n) {
            by_size[code_domain_size(n, code)].push(code);
        }
        for level in by_size {
            let snapshot = &fp;
            let members: Vec<u64> = level
                .into_par_iter()
                .filter(|&code| {
                    one_point_restrictions(n, code).all(|r| snapshot.contains_code(n, r))
                        && test(&PartialFunction::from_code(n, code).expect("code in range"))
                })
                .collect();
            for code in members {
                fp.insert_code(n, code);
            }
        }
    }
    Ok(fp)
}

/// `pPol Σ` at arities `1..=k` (`k ≤ 3`).
pub fn ppol_fingerprint(sigma: &[Relation], k: usize) -> Result<CloneFingerprint> {
    let preservers: Vec<Preserver> = sigma.iter().map(Preserver::relation).collect();
    strong_fingerprint(k, |f| preservers.iter().all(|p| p.preserves(f)))
}

/// `cPol` of a set of relation pairs at arities `1..=k` (`k ≤ 3`).
pub fn cpol_fingerprint(pairs: &[RelationPair], k: usize) -> Result<CloneFingerprint> {
    let preservers: Vec<Preserver> = pairs.iter().map(Preserver::pair).collect();
    strong_fingerprint(k, |f| preservers.iter().all(|p| p.preserves(f)))
}

/// `Pol Σ` (total functions only) at arities `1..=k` (`k ≤ 4`).
pub fn pol_fingerprint(sigma: &[Relation], k: usize) -> Result<CloneFingerprint> {
    let preservers: Vec<Preserver> = sigma.iter().map(Preserver::relation).collect();
    let mut fp = CloneFingerprint::empty(k)?;
    for n in 1..=k {
        let codes: Vec<u64> = total_codes(n).collect();
        let members: Vec<u64> = codes
            .into_par_iter()
            .filter(|&code| {
                let f = PartialFunction::from_code(n, code).expect("code in range");
                preservers.iter().all(|p| p.preserves(&f))
            })
            .collect();
        for code in members {
            fp.insert_code(n, code);
        }
    }
    Ok(fp)
}

/// Whether `sigma` is preserved by every total function preserving `clone_rels`.
///
/// With `m = |sigma|` it suffices to test `m`-ary functions on the single
/// matrix whose columns are the members of `sigma`.
pub fn invariant_under_clone(
    sigma: &Relation,
    clone_rels: &[Relation],
    budget: &Budget,
) -> Result<bool> {
    let cols: Vec<u32> = sigma.points().collect();
    let m = cols.len();
    if m == 0 {
        return Ok(true);
    }
    if m > budget.max_invariance_arity {
        return Err(Error::BudgetExceeded {
            what: "invariance test arity",
            needed: m as u128,
            budget: budget.max_invariance_arity as u128,
        });
    }
    let h = sigma.arity();
    let rows: Vec<u32> = (0..h)
        .map(|i| {
            cols.iter()
                .fold(0u32, |acc, &c| (acc << 1) | ((c >> (h - 1 - i)) & 1))
        })
        .collect();
    let preservers: Vec<Preserver> = clone_rels.iter().map(Preserver::relation).collect();
    let counterexample = (0u64..(1u64 << (1u32 << m))).into_par_iter().any(|table| {
        let out = rows
            .iter()
            .fold(0u32, |acc, &r| (acc << 1) | ((table >> r) & 1) as u32);
        if sigma.contains(out) {
            return false;
        }
        let f = PartialFunction::total(m, |p| (table >> p) & 1 == 1).expect("arity within cap");
        preservers.iter().all(|p| p.preserves(&f))
    });
    Ok(!counterexample)
}

/// All pairs `(ρ, ρ′)` of arity `h ≤ 3` preserved by `f`.
pub fn preserved_pairs(f: &PartialFunction, h: usize) -> Result<Vec<RelationPair>> {
    if h == 0 || h > 3 {
        return Err(Error::ArityOutOfRange(h));
    }
    let mut out = Vec::new();
    for rho_bits in 0u64..(1u64 << (1u32 << h)) {
        let rho = Relation::from_predicate(h, |p| (rho_bits >> p) & 1 == 1)?;
        let img = image(f, &rho);
        let img_bits = img.points().fold(0u64, |acc, p| acc | (1 << p));
        let mut sub = rho_bits;
        loop {
            if img_bits & !sub == 0 {
                let cons = Relation::from_predicate(h, |p| (sub >> p) & 1 == 1)?;
                out.push(RelationPair::new(rho.clone(), cons)?);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rho_bits;
        }
    }
    Ok(out)
}

/// A smallest-arity partial function in `pPol inside` but not in `pPol outside`.
///
/// Arities up to 3 are searched exhaustively; arity 4 is streamed with early
/// exit.
pub fn separating_function(
    inside: &[Relation],
    outside: &[Relation],
    max_arity: usize,
) -> Result<Option<PartialFunction>> {
    if max_arity > crate::fingerprint::MAX_FINGERPRINT_ARITY {
        return Err(Error::ArityOutOfRange(max_arity));
    }
    let ins: Vec<Preserver> = inside.iter().map(Preserver::relation).collect();
    let outs: Vec<Preserver> = outside.iter().map(Preserver::relation).collect();
    for n in 1..=max_arity {
        let mut members = FixedBitSet::with_capacity(code_space(n) as usize);
        for code in 0..code_space(n) {
            if !one_point_restrictions(n, code).all(|r| members.contains(r as usize)) {
                continue;
            }
            let f = PartialFunction::from_code(n, code)?;
            if !ins.iter().all(|p| p.preserves(&f)) {
                continue;
            }
            members.insert(code as usize);
            if !outs.iter().all(|p| p.preserves(&f)) {
                return Ok(Some(f));
            }
        }
    }
    Ok(None)
}
