//! Finite intervals of strong partial clones above a total clone.
//!
//! Elements are `pPol U` for unions `U` of basis relations. Two unions give the
//! same clone iff they define the same basis relations, so every union is
//! reduced to its closure `cl(U) = {σ ∈ basis | σ definable from U}` and
//! elements are the distinct closures. Fingerprints only serve as cross-checks
//! and for classifying total parts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::definability::{qfpp_definable, DefinabilityVerdict};
use crate::error::{Error, Result};
use crate::families::{basis_relation, clone_catalog, CloneCatalogEntry, BASIS_NAMES};
use crate::fingerprint::{ArityDigest, CloneFingerprint};
use crate::function::PartialFunction;
use crate::ops::{delta, nabla, star, tau, zeta};
use crate::pair::RelationPair;
use crate::preserve::{cpol_fingerprint, invariant_under_clone, pol_fingerprint, ppol_fingerprint};
use crate::relation::Relation;

/// Arity of the fingerprints attached to interval elements.
pub const ELEMENT_ARITY: usize = 3;

/// Completeness assumption carried by every report.
pub const ASSUMPTION: &str =
    "every strong partial clone in the interval is pPol of a union of basis relations";

/// Interval sizes `(|I_str↑(C)|, |I_str(C)|)` known for finite intervals.
pub fn known_counts(clone_key: &str) -> Option<(usize, Option<usize>)> {
    match clone_key {
        "O" => Some((1, None)),
        "T0" | "T1" => Some((2, None)),
        "T0T1" => Some((7, Some(4))),
        "MT0T1" => Some((25, Some(13))),
        "ST0T1" => Some((33, Some(25))),
        "M" | "S" => Some((2, None)),
        "MT0" | "MT1" => Some((5, None)),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalElement {
    /// A smallest union with this closure.
    pub representative: Vec<String>,
    /// All basis relations definable from the representative.
    pub closure: Vec<String>,
    pub digest: Vec<ArityDigest>,
    pub total_part: Option<String>,
    /// Number of unions merged into this element.
    pub unions: usize,
    #[serde(skip)]
    pub relations: Vec<Relation>,
    #[serde(skip)]
    pub fingerprint: CloneFingerprint,
    #[serde(skip)]
    rep_mask: u32,
    #[serde(skip)]
    closure_mask: u32,
    #[serde(skip)]
    union_masks: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeReport {
    pub basis: Vec<String>,
    pub assumption: String,
    pub elements: Vec<IntervalElement>,
    /// `(i, j)`: element `i` is contained in element `j`.
    pub order: Vec<(usize, usize)>,
    pub covers: Vec<(usize, usize)>,
    pub counts_by_total_part: BTreeMap<String, usize>,
    pub not_computed: String,
    #[serde(skip)]
    basis_relations: Vec<Relation>,
    /// `verdicts[U][σ]`: definability of basis relation `σ` from union `U`.
    #[serde(skip)]
    verdicts: Vec<Vec<DefinabilityVerdict>>,
}

fn mask_names(names: &[String], mask: u32) -> Vec<String> {
    (0..names.len())
        .filter(|&i| (mask >> i) & 1 == 1)
        .map(|i| names[i].clone())
        .collect()
}

fn mask_relations(rels: &[Relation], mask: u32) -> Vec<Relation> {
    (0..rels.len())
        .filter(|&i| (mask >> i) & 1 == 1)
        .map(|i| rels[i].clone())
        .collect()
}

fn is_submask(a: u32, b: u32) -> bool {
    a & !b == 0
}

/// One element per distinct `pPol` over all unions of `basis`.
pub fn intersection_closure(
    names: &[String],
    basis: &[Relation],
    budget: &Budget,
) -> Result<LatticeReport> {
    let r = basis.len();
    if r > 12 {
        return Err(Error::BudgetExceeded {
            what: "basis size",
            needed: r as u128,
            budget: 12,
        });
    }
    if names.len() != r {
        return Err(Error::InvalidParameter(
            "one name per basis relation required".into(),
        ));
    }
    let verdicts: Vec<Vec<DefinabilityVerdict>> = (0u32..(1 << r))
        .into_par_iter()
        .map(|u| {
            let sources = mask_relations(basis, u);
            basis
                .iter()
                .map(|s| qfpp_definable(s, &sources, budget))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let closure_of = |u: usize| -> u32 {
        (0..r)
            .filter(|&i| verdicts[u][i].definable)
            .fold(0, |acc, i| acc | (1 << i))
    };

    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for u in 0..(1u32 << r) {
        groups.entry(closure_of(u as usize)).or_default().push(u);
    }
    let mut keyed: Vec<(u32, Vec<u32>)> = groups.into_iter().collect();
    keyed.sort_by_key(|(cl, _)| (cl.count_ones(), *cl));

    let elements: Vec<IntervalElement> = keyed
        .into_par_iter()
        .map(|(cl, unions)| {
            let rep = *unions
                .iter()
                .min_by_key(|u| (u.count_ones(), **u))
                .expect("nonempty group");
            let relations = mask_relations(basis, rep);
            let fingerprint = ppol_fingerprint(&relations, ELEMENT_ARITY)?;
            Ok(IntervalElement {
                representative: mask_names(names, rep),
                closure: mask_names(names, cl),
                digest: fingerprint.digest(),
                total_part: None,
                unions: unions.len(),
                relations,
                fingerprint,
                rep_mask: rep,
                closure_mask: cl,
                union_masks: unions,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = LatticeReport {
        basis: names.to_vec(),
        assumption: ASSUMPTION.to_string(),
        elements,
        order: Vec::new(),
        covers: Vec::new(),
        counts_by_total_part: BTreeMap::new(),
        not_computed: "intervals of partial clones that are not strong".to_string(),
        basis_relations: basis.to_vec(),
        verdicts,
    };
    report.rebuild_order();
    Ok(report)
}

impl LatticeReport {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `pPol(rep_i) ⊆ pPol(rep_j)` iff `cl(rep_j) ⊆ cl(rep_i)`.
    pub fn leq(&self, i: usize, j: usize) -> bool {
        is_submask(self.elements[j].closure_mask, self.elements[i].closure_mask)
    }

    fn rebuild_order(&mut self) {
        let n = self.elements.len();
        self.order = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.leq(i, j))
            .collect();
        self.covers = self
            .order
            .iter()
            .copied()
            .filter(|&(i, j)| {
                i != j && !(0..n).any(|k| k != i && k != j && self.leq(i, k) && self.leq(k, j))
            })
            .collect();
        self.counts_by_total_part.clear();
        for e in &self.elements {
            if let Some(t) = &e.total_part {
                *self.counts_by_total_part.entry(t.clone()).or_default() += 1;
            }
        }
    }

    /// Index of the element equal to `pPol` of the named basis relations.
    pub fn element_of(&self, names: &[&str]) -> Option<usize> {
        let mut mask = 0u32;
        for n in names {
            mask |= 1 << self.basis.iter().position(|b| b == n)?;
        }
        self.elements
            .iter()
            .position(|e| e.union_masks.contains(&mask))
    }

    /// Elements whose total part is exactly `name`.
    pub fn count_total_part(&self, name: &str) -> usize {
        self.counts_by_total_part.get(name).copied().unwrap_or(0)
    }

    /// Re-validates the stored definability verdicts behind every merge and
    /// every distinction.
    pub fn validate_dedup(&self) -> Result<()> {
        let r = self.basis_relations.len();
        for e in &self.elements {
            for &u in &e.union_masks {
                let sources = mask_relations(&self.basis_relations, u);
                for i in 0..r {
                    let v = &self.verdicts[u as usize][i];
                    v.validate(&self.basis_relations[i], &sources)?;
                    if v.definable != ((e.closure_mask >> i) & 1 == 1) {
                        return Err(Error::InvalidWitness(format!(
                            "union {:?} disagrees with its element on {}",
                            mask_names(&self.basis, u),
                            self.basis[i]
                        )));
                    }
                }
            }
        }
        for (a, ea) in self.elements.iter().enumerate() {
            for eb in &self.elements[a + 1..] {
                let separated = (0..r).any(|i| {
                    let in_a = (ea.closure_mask >> i) & 1 == 1;
                    let in_b = (eb.closure_mask >> i) & 1 == 1;
                    (in_b
                        && !self.verdicts[ea.rep_mask as usize][i].definable
                        && self.verdicts[ea.rep_mask as usize][i].defect.is_some())
                        || (in_a
                            && !self.verdicts[eb.rep_mask as usize][i].definable
                            && self.verdicts[eb.rep_mask as usize][i].defect.is_some())
                });
                if !separated {
                    return Err(Error::InvalidWitness(format!(
                        "elements {:?} and {:?} carry no separating defect",
                        ea.representative, eb.representative
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reflexive, antisymmetric and transitive.
    pub fn check_poset(&self) -> Result<()> {
        let n = self.elements.len();
        for i in 0..n {
            if !self.leq(i, i) {
                return Err(Error::Classification(format!("order not reflexive at {i}")));
            }
            for j in 0..n {
                if i != j && self.leq(i, j) && self.leq(j, i) {
                    return Err(Error::Classification(format!(
                        "elements {i} and {j} coincide"
                    )));
                }
                for k in 0..n {
                    if self.leq(i, j) && self.leq(j, k) && !self.leq(i, k) {
                        return Err(Error::Classification(format!(
                            "order not transitive at {i},{j},{k}"
                        )));
                    }
                }
            }
        }
        let bottom = (0..n).filter(|&i| (0..n).all(|j| self.leq(i, j))).count();
        if bottom != 1 {
            return Err(Error::Classification(format!("{bottom} bottom elements")));
        }
        Ok(())
    }

    /// Inclusion by definability implies inclusion of fingerprints.
    pub fn check_fingerprint_agreement(&self) -> Result<()> {
        for &(i, j) in &self.order {
            if !self.elements[i]
                .fingerprint
                .is_subset(&self.elements[j].fingerprint)?
            {
                return Err(Error::Classification(format!(
                    "{:?} ⊆ {:?} by definability but not by fingerprint",
                    self.elements[i].representative, self.elements[j].representative
                )));
            }
        }
        Ok(())
    }

    /// Keeps the elements containing the total clone `c`.
    pub fn filter_above(&self, c: &CloneCatalogEntry, budget: &Budget) -> Result<LatticeReport> {
        let mut invariant = 0u32;
        for (i, sigma) in self.basis_relations.iter().enumerate() {
            if invariant_under_clone(sigma, &c.defining_relations, budget)? {
                invariant |= 1 << i;
            }
        }
        let mut out = self.clone();
        out.elements.retain(|e| is_submask(e.rep_mask, invariant));
        out.rebuild_order();
        Ok(out)
    }

    /// Labels every element with the unique candidate whose total fingerprint
    /// equals the element's total side.
    pub fn classify(&mut self, candidates: &[CloneCatalogEntry]) -> Result<()> {
        let fps: Vec<CloneFingerprint> = candidates
            .iter()
            .map(|c| pol_fingerprint(&c.defining_relations, ELEMENT_ARITY))
            .collect::<Result<_>>()?;
        for a in 0..fps.len() {
            for b in (a + 1)..fps.len() {
                if fps[a] == fps[b] {
                    return Err(Error::Classification(format!(
                        "{} and {} are not separated at arity {ELEMENT_ARITY}",
                        candidates[a].name, candidates[b].name
                    )));
                }
            }
        }
        for e in &mut self.elements {
            e.total_part = Some(classify_fingerprint(&e.fingerprint, candidates, &fps)?);
        }
        self.rebuild_order();
        Ok(())
    }

    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph interval {\n  rankdir=BT;\n");
        for (i, e) in self.elements.iter().enumerate() {
            let basis = if e.representative.is_empty() {
                "∅".to_string()
            } else {
                e.representative.join(",")
            };
            let label = match &e.total_part {
                Some(t) => format!("{basis}\\n{t}"),
                None => basis,
            };
            let _ = writeln!(out, "  e{i} [label=\"{label}\"];");
        }
        for &(i, j) in &self.covers {
            let _ = writeln!(out, "  e{i} -> e{j};");
        }
        out.push_str("}\n");
        out
    }
}

fn classify_fingerprint(
    fp: &CloneFingerprint,
    candidates: &[CloneCatalogEntry],
    candidate_fps: &[CloneFingerprint],
) -> Result<String> {
    let total = fp.total_side();
    let matches: Vec<&CloneCatalogEntry> = candidates
        .iter()
        .zip(candidate_fps)
        .filter(|(_, c)| **c == total)
        .map(|(e, _)| e)
        .collect();
    match matches.as_slice() {
        [one] => Ok(one.name.clone()),
        [] => Err(Error::Classification(
            "no candidate matches the total part".into(),
        )),
        many => Err(Error::Classification(format!(
            "several candidates match: {}",
            many.iter()
                .map(|e| e.name.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

/// The total part of `pPol relations` among `candidates`.
pub fn classify_total_part(
    relations: &[Relation],
    candidates: &[CloneCatalogEntry],
) -> Result<String> {
    let fp = ppol_fingerprint(relations, ELEMENT_ARITY)?;
    let fps: Vec<CloneFingerprint> = candidates
        .iter()
        .map(|c| pol_fingerprint(&c.defining_relations, ELEMENT_ARITY))
        .collect::<Result<_>>()?;
    classify_fingerprint(&fp, candidates, &fps)
}

/// Catalog clones containing `c`.
///
/// A candidate is dropped when some function of `c` of arity `≤ 3` violates
/// its relations; otherwise containment is confirmed by the invariance test.
pub fn candidates_above(c: &CloneCatalogEntry, budget: &Budget) -> Result<Vec<CloneCatalogEntry>> {
    let c_fp = pol_fingerprint(&c.defining_relations, ELEMENT_ARITY)?;
    let mut out = Vec::new();
    for d in clone_catalog() {
        let d_fp = pol_fingerprint(&d.defining_relations, ELEMENT_ARITY)?;
        if !c_fp.is_subset(&d_fp)? {
            continue;
        }
        let mut above = true;
        for sigma in &d.defining_relations {
            if !invariant_under_clone(sigma, &c.defining_relations, budget)? {
                above = false;
                break;
            }
        }
        if above {
            out.push(d);
        }
    }
    Ok(out)
}

/// Outcome of an interval computation.
#[derive(Clone, Debug, Serialize)]
pub struct IntervalResult {
    pub clone: String,
    pub basis_family: Vec<String>,
    pub up_count: usize,
    pub exact_count: usize,
    pub expected: Option<(usize, Option<usize>)>,
    /// Set when the first basis did not reproduce the expected counts.
    pub discrepancy: Option<String>,
    pub report: LatticeReport,
}

/// Builds `I_str↑(c)` from `family` and classifies total parts.
pub fn compute_interval(
    c: &CloneCatalogEntry,
    family: &[&str],
    budget: &Budget,
) -> Result<IntervalResult> {
    let names: Vec<String> = family.iter().map(|s| s.to_string()).collect();
    let rels: Vec<Relation> = family
        .iter()
        .map(|n| basis_relation(n))
        .collect::<Result<_>>()?;
    let full = intersection_closure(&names, &rels, budget)?;
    let mut report = full.filter_above(c, budget)?;
    let candidates = candidates_above(c, budget)?;
    report.classify(&candidates)?;
    Ok(IntervalResult {
        clone: c.name.clone(),
        basis_family: names,
        up_count: report.len(),
        exact_count: report.count_total_part(&c.name),
        expected: known_counts(&c.key),
        discrepancy: None,
        report,
    })
}

/// `compute_interval`, retried with all basis relations when the counts
/// differ from the known ones. The mismatch is recorded, never hidden.
pub fn compute_interval_with_retry(
    c: &CloneCatalogEntry,
    family: &[&str],
    budget: &Budget,
) -> Result<IntervalResult> {
    let first = compute_interval(c, family, budget)?;
    let Some((up, exact)) = first.expected else {
        return Ok(first);
    };
    let matches = |r: &IntervalResult| r.up_count == up && exact.is_none_or(|e| e == r.exact_count);
    if matches(&first) {
        return Ok(first);
    }
    let note = format!(
        "basis {:?} gave {} / {} elements",
        family, first.up_count, first.exact_count
    );
    let mut second = compute_interval(c, &BASIS_NAMES, budget)?;
    second.discrepancy = Some(note);
    Ok(second)
}

/// `Str(D)` at arities `≤ k`: every restriction of a total member of `D`.
pub fn str_fingerprint(d: &CloneCatalogEntry, k: usize) -> Result<CloneFingerprint> {
    let totals = pol_fingerprint(&d.defining_relations, k)?;
    let mut fp = CloneFingerprint::empty(k)?;
    for n in 1..=k {
        for code in totals.codes(n).collect::<Vec<_>>() {
            let points = 1usize << n;
            for keep in 0u64..(1 << points) {
                let mut c = code;
                let mut out = 0u64;
                let mut pow = 1u64;
                for p in 0..points {
                    let digit = c % 3;
                    c /= 3;
                    if (keep >> p) & 1 == 1 {
                        out += digit * pow;
                    }
                    pow *= 3;
                }
                fp.insert_code(n, out);
            }
        }
    }
    Ok(fp)
}

/// `Str(D) ∪ (X ∩ cPol(pair))` at arities `≤ k`, checked for closure.
pub fn transfer(
    x: &CloneFingerprint,
    d: &CloneCatalogEntry,
    pair: &RelationPair,
    k: usize,
) -> Result<CloneFingerprint> {
    if !pair.consequent().is_empty() {
        return Err(Error::InvalidParameter(
            "transfer expects an empty consequent".into(),
        ));
    }
    let str_d = str_fingerprint(d, k)?;
    let t = cpol_fingerprint(std::slice::from_ref(pair), k)?;
    let out = str_d.union(&x.intersection(&t)?)?;
    check_strong_closure(&out)?;
    Ok(out)
}

/// Closure under restriction, ζ, τ, Δ, ∇ and ⋆ wherever the result has arity `≤ k`.
pub fn check_strong_closure(fp: &CloneFingerprint) -> Result<()> {
    let k = fp.max_arity();
    if !fp.is_restriction_closed() {
        return Err(Error::ClosureViolation(
            "not closed under restriction".into(),
        ));
    }
    let members: Vec<Vec<PartialFunction>> = (1..=k).map(|n| fp.functions(n).collect()).collect();
    let miss = |f: &PartialFunction, what: &str, g: &PartialFunction| -> Result<()> {
        if fp.contains(g) {
            Ok(())
        } else {
            Err(Error::ClosureViolation(format!(
                "{what} of {:?} leaves the class",
                f.code()
            )))
        }
    };
    for level in &members {
        for f in level {
            miss(f, "ζ", &zeta(f))?;
            miss(f, "τ", &tau(f))?;
            miss(f, "Δ", &delta(f))?;
            if f.arity() < k {
                miss(f, "∇", &nabla(f)?)?;
            }
        }
    }
    for (a, fs) in members.iter().enumerate() {
        for (b, gs) in members.iter().enumerate() {
            if a + b + 1 > k {
                continue;
            }
            let bad = fs.par_iter().find_map_any(|f| {
                gs.iter()
                    .find(|g| !fp.contains(&star(f, g).expect("arity within bound")))
                    .map(|g| (f.code(), g.code()))
            });
            if let Some((f, g)) = bad {
                return Err(Error::ClosureViolation(format!(
                    "⋆ of {f:?} and {g:?} leaves the class"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{catalog_entry, r02, rho_02};

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn rels(ns: &[&str]) -> Vec<Relation> {
        ns.iter().map(|n| basis_relation(n).unwrap()).collect()
    }

    #[test]
    fn small_basis_closure() {
        let b = ["P0", "P1", "P01"];
        let report = intersection_closure(&names(&b), &rels(&b), &Budget::default()).unwrap();
        assert_eq!(report.len(), 7);
        report.check_poset().unwrap();
        report.validate_dedup().unwrap();
        report.check_fingerprint_agreement().unwrap();
        assert_eq!(
            report.element_of(&["P0", "P1", "P01"]),
            report.element_of(&["P0", "P1"])
        );
        assert_ne!(
            report.element_of(&["P0", "P01"]),
            report.element_of(&["P0", "P1"])
        );
        let one =
            intersection_closure(&names(&["Ple"]), &rels(&["Ple"]), &Budget::default()).unwrap();
        assert_eq!(one.len(), 2);
    }

    #[test]
    fn small_intervals() {
        let budget = Budget::default();
        for (key, up, exact) in [("O", 1, 1), ("T0", 2, 1), ("T1", 2, 1), ("T0T1", 7, 4)] {
            let c = catalog_entry(key).unwrap();
            let r = compute_interval(&c, &["P0", "P1", "P01"], &budget).unwrap();
            assert_eq!((r.up_count, r.exact_count), (up, exact), "{key}");
        }
    }

    #[test]
    fn mismatch_triggers_full_basis_retry() {
        let c = catalog_entry("MT0T1").unwrap();
        let r = compute_interval_with_retry(&c, &["P0", "P1", "P01"], &Budget::default()).unwrap();
        let note = r.discrepancy.clone().unwrap();
        assert!(
            note.starts_with("basis [\"P0\", \"P1\", \"P01\"] gave 7 / "),
            "{note}"
        );
        assert_eq!(r.basis_family.len(), BASIS_NAMES.len());
        assert_eq!((r.up_count, r.exact_count), (25, 13));
    }

    #[test]
    fn classification_examples() {
        let t0 = catalog_entry("T0").unwrap();
        let candidates =
            candidates_above(&catalog_entry("T0T1").unwrap(), &Budget::default()).unwrap();
        let keys: Vec<&str> = candidates.iter().map(|c| c.key.as_str()).collect();
        assert_eq!(keys, vec!["O", "T0", "T1", "T0T1"]);
        assert_eq!(
            classify_total_part(&rels(&["P0"]), &candidates).unwrap(),
            t0.name
        );
    }

    #[test]
    fn dot_export() {
        let b = ["P0", "P1", "P01"];
        let report = intersection_closure(&names(&b), &rels(&b), &Budget::default()).unwrap();
        let dot = report.export_dot();
        assert_eq!(dot.matches("[label=").count(), 7);
        assert_eq!(dot.matches("->").count(), report.covers.len());
        let single = report
            .filter_above(&catalog_entry("O").unwrap(), &Budget::default())
            .unwrap();
        let dot = single.export_dot();
        assert_eq!(dot.matches("[label=").count(), 1);
        assert_eq!(dot.matches("->").count(), 0);
    }

    #[test]
    fn transfer_of_everything_by_o_is_everything() {
        let full = CloneFingerprint::full(2).unwrap();
        let pair = RelationPair::with_empty_consequent(Relation::from_tuples(&["0"]).unwrap());
        let out = transfer(&full, &catalog_entry("O").unwrap(), &pair, 2).unwrap();
        assert_eq!(out, full);
    }

    #[test]
    fn transfer_default_instance() {
        let x = ppol_fingerprint(&[r02(3).unwrap()], 2).unwrap();
        let d = CloneCatalogEntry {
            name: "T0,2".into(),
            key: "T0_2".into(),
            defining_relations: vec![rho_02(), Relation::from_tuples(&["0"]).unwrap()],
            notes: String::new(),
        };
        let pair = RelationPair::with_empty_consequent(Relation::from_tuples(&["0"]).unwrap());
        let out = transfer(&x, &d, &pair, 2).unwrap();
        assert_eq!(
            out.total_side(),
            pol_fingerprint(&d.defining_relations, 2).unwrap()
        );
    }
}
