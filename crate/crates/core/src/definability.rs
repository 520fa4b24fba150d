//! Quantifier-free primitive-positive definability.
//!
//! For an irredundant `t`-ary `ρ` and a set `Σ`, `pPol Σ ⊆ pPol ρ` iff there
//! are sets `γ_σ ⊆ [t]^{arity σ}` with
//! `ρ = {x ∈ 2^t | x_i ∈ σ for all σ ∈ Σ, i ∈ γ_σ}` whose entries cover `[t]`.
//!
//! Each constraint only removes tuples, so the largest admissible `γ_σ`
//! (every `i` with `x_i ∈ σ` for all `x ∈ ρ`) gives the least conjunction
//! containing `ρ` and the largest coverage. A definition exists iff this
//! maximal choice already works.

use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::preserve::PrefixTable;
use crate::relation::Relation;
use crate::tuple::{coord, BitTuple};

/// Coordinates of the target relation, stored 0-based and shown 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple(pub Vec<usize>);

impl IndexTuple {
    /// Builds an index tuple from 1-based entries.
    pub fn one_based(entries: &[usize]) -> Self {
        IndexTuple(entries.iter().map(|&e| e - 1).collect())
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    /// `x_i` for a point of arity `t`.
    pub fn select(&self, x: u32, t: usize) -> u32 {
        crate::tuple::select(x, t, &self.0)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", e + 1)?;
        }
        f.write_str(")")
    }
}

impl Serialize for IndexTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<usize> = self.0.iter().map(|e| e + 1).collect();
        one_based.serialize(s)
    }
}

/// `γ_σ` for the source relation at position `source` of `Σ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaEntry {
    pub source: usize,
    pub tuples: Vec<IndexTuple>,
}

/// Why no definition exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Defect {
    /// The first tuple of the maximal conjunction that is not in `ρ`.
    pub extra_tuple: Option<BitTuple>,
    /// Coordinates (1-based) that no admissible index tuple mentions.
    pub uncovered: Vec<usize>,
}

/// Coordinate reduction applied before deciding a redundant target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    /// Coordinates (1-based) of the original relation that were kept.
    pub kept: Vec<usize>,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefinabilityVerdict {
    pub definable: bool,
    /// The maximal `γ`, or the identity tuple alone when `ρ` is one of the
    /// sources. A witness when `definable`.
    pub gamma: Vec<GammaEntry>,
    pub defect: Option<Defect>,
    /// Present when the target was reduced first; the answer then concerns
    /// the reduced relation.
    pub reduction: Option<Reduction>,
}

impl DefinabilityVerdict {
    pub fn witness_size(&self) -> usize {
        self.gamma.iter().map(|g| g.tuples.len()).sum()
    }

    /// Re-checks the verdict against `ρ` and `Σ`.
    ///
    /// Every stored index tuple must be admissible. A definable verdict must
    /// reproduce `ρ` and cover all coordinates; a defect must be witnessed by
    /// the stored tuples.
    pub fn validate(&self, rho: &Relation, sigma: &[Relation]) -> Result<()> {
        let rho = match &self.reduction {
            Some(r) => &r.relation,
            None => rho,
        };
        let t = rho.arity();
        for entry in &self.gamma {
            let s = sigma.get(entry.source).ok_or_else(|| {
                Error::InvalidWitness(format!("source index {} out of range", entry.source))
            })?;
            for i in &entry.tuples {
                if i.0.len() != s.arity() || i.0.iter().any(|&e| e >= t) {
                    return Err(Error::InvalidWitness(format!(
                        "index tuple {i} has the wrong shape"
                    )));
                }
                if let Some(x) = rho.points().find(|&x| !s.contains(i.select(x, t))) {
                    let x = BitTuple::new(t, x)?;
                    return Err(Error::InvalidWitness(format!(
                        "{x} restricted to {i} leaves source {}",
                        entry.source
                    )));
                }
            }
        }
        let conj = evaluate_conjunction(t, sigma, &self.gamma)?;
        let covered = coverage(t, &self.gamma);
        if self.definable {
            if &conj != rho {
                return Err(Error::InvalidWitness(
                    "conjunction differs from the target".into(),
                ));
            }
            if covered.iter().any(|c| !c) {
                return Err(Error::InvalidWitness(
                    "witness does not cover every coordinate".into(),
                ));
            }
            if self.defect.is_some() {
                return Err(Error::InvalidWitness(
                    "definable verdict carries a defect".into(),
                ));
            }
            return Ok(());
        }
        let defect = self
            .defect
            .as_ref()
            .ok_or_else(|| Error::InvalidWitness("negative verdict without defect".into()))?;
        if defect.extra_tuple.is_none() && defect.uncovered.is_empty() {
            return Err(Error::InvalidWitness("empty defect".into()));
        }
        if let Some(x) = &defect.extra_tuple {
            if rho.contains_tuple(x) || !conj.contains_tuple(x) {
                return Err(Error::InvalidWitness(format!(
                    "extra tuple {x} is not extra"
                )));
            }
        }
        for &c in &defect.uncovered {
            if c == 0 || c > t || covered[c - 1] {
                return Err(Error::InvalidWitness(format!("coordinate {c} is covered")));
            }
        }
        Ok(())
    }
}

/// No two coordinates agree on all members and no coordinate is fictitious.
pub fn is_irredundant(rho: &Relation) -> Result<bool> {
    Ok(redundancy(rho)?.is_none())
}

/// A description of the first redundancy found, if any.
fn redundancy(rho: &Relation) -> Result<Option<String>> {
    if rho.is_empty() {
        return Err(Error::EmptyRelation);
    }
    let t = rho.arity();
    let cols: Vec<Vec<u32>> = (0..t)
        .map(|i| rho.points().map(|x| coord(x, t, i)).collect())
        .collect();
    for i in 0..t {
        for j in (i + 1)..t {
            if cols[i] == cols[j] {
                return Ok(Some(format!(
                    "coordinates {} and {} coincide",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    for i in 0..t {
        let bit = 1u32 << (t - 1 - i);
        if rho.points().all(|x| rho.contains(x ^ bit)) {
            return Ok(Some(format!("coordinate {} is fictitious", i + 1)));
        }
    }
    Ok(None)
}

/// Drops fictitious coordinates and merges coinciding ones until irredundant.
pub fn reduce_redundant(rho: &Relation) -> Result<Reduction> {
    let mut kept: Vec<usize> = (0..rho.arity()).collect();
    let mut rel = rho.clone();
    loop {
        let t = rel.arity();
        let cols: Vec<Vec<u32>> = (0..t)
            .map(|i| rel.points().map(|x| coord(x, t, i)).collect())
            .collect();
        let drop = (0..t)
            .find(|&i| {
                let bit = 1u32 << (t - 1 - i);
                rel.points().all(|x| rel.contains(x ^ bit))
            })
            .or_else(|| (1..t).find(|&j| (0..j).any(|i| cols[i] == cols[j])));
        let Some(d) = drop else { break };
        if t == 1 {
            return Err(Error::NotIrredundant(
                "every coordinate is fictitious".into(),
            ));
        }
        let keep: Vec<usize> = (0..t).filter(|&i| i != d).collect();
        rel = rel.project(&keep)?;
        kept.remove(d);
    }
    Ok(Reduction {
        kept: kept.into_iter().map(|k| k + 1).collect(),
        relation: rel,
    })
}

/// All `i ∈ [t]^s` with `x_i ∈ σ` for every `x ∈ ρ`, in lexicographic order.
pub fn maximal_gamma(rho: &Relation, sigma: &Relation, budget: &Budget) -> Result<Vec<IndexTuple>> {
    let t = rho.arity();
    let s = sigma.arity();
    let needed = (t as u128).pow(s as u32);
    if needed > budget.max_index_tuples as u128 {
        return Err(Error::BudgetExceeded {
            what: "index tuples",
            needed,
            budget: budget.max_index_tuples as u128,
        });
    }
    let members: Vec<u32> = rho.points().collect();
    let cols: Vec<Vec<u32>> = (0..t)
        .map(|c| members.iter().map(|&x| coord(x, t, c)).collect())
        .collect();
    let table = PrefixTable::new(sigma);
    let parts: Vec<Vec<IndexTuple>> = (0..t)
        .into_par_iter()
        .map(|first| {
            let mut search = GammaSearch {
                cols: &cols,
                table: &table,
                prefixes: vec![vec![0; members.len()]; s + 1],
                index: Vec::with_capacity(s),
                out: Vec::new(),
            };
            search.try_extend(0, first);
            search.out
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

struct GammaSearch<'a> {
    cols: &'a [Vec<u32>],
    table: &'a PrefixTable,
    /// `prefixes[d][k]`: the first `d` selected coordinates of member `k`.
    prefixes: Vec<Vec<u32>>,
    index: Vec<usize>,
    out: Vec<IndexTuple>,
}

impl GammaSearch<'_> {
    fn try_extend(&mut self, depth: usize, c: usize) {
        let next = &self.table.levels[depth + 1];
        let (head, tail) = self.prefixes.split_at_mut(depth + 1);
        let (cur, new) = (&head[depth], &mut tail[0]);
        for (k, (&p, &b)) in cur.iter().zip(&self.cols[c]).enumerate() {
            let q = (p << 1) | b;
            if !next.contains(q as usize) {
                return;
            }
            new[k] = q;
        }
        self.index.push(c);
        if depth + 1 == self.table.levels.len() - 1 {
            self.out.push(IndexTuple(self.index.clone()));
        } else {
            for c2 in 0..self.cols.len() {
                self.try_extend(depth + 1, c2);
            }
        }
        self.index.pop();
    }
}

/// `{x ∈ 2^t | x_i ∈ σ for every entry}`.
pub fn evaluate_conjunction(
    t: usize,
    sigma: &[Relation],
    gamma: &[GammaEntry],
) -> Result<Relation> {
    let constraints: Vec<(&Relation, &IndexTuple)> = gamma
        .iter()
        .flat_map(|g| g.tuples.iter().map(move |i| (&sigma[g.source], i)))
        .collect();
    Relation::from_predicate(t, |x| {
        constraints.iter().all(|(s, i)| s.contains(i.select(x, t)))
    })
}

fn coverage(t: usize, gamma: &[GammaEntry]) -> Vec<bool> {
    let mut covered = vec![false; t];
    for i in gamma.iter().flat_map(|g| &g.tuples) {
        for &e in &i.0 {
            covered[e] = true;
        }
    }
    covered
}

fn decide(rho: &Relation, sigma: &[Relation], budget: &Budget) -> Result<DefinabilityVerdict> {
    let t = rho.arity();
    if let Some(k) = sigma.iter().position(|s| s == rho) {
        let gamma = (0..sigma.len())
            .map(|j| GammaEntry {
                source: j,
                tuples: if j == k {
                    vec![IndexTuple((0..t).collect())]
                } else {
                    Vec::new()
                },
            })
            .collect();
        return Ok(DefinabilityVerdict {
            definable: true,
            gamma,
            defect: None,
            reduction: None,
        });
    }
    let mut gamma = Vec::with_capacity(sigma.len());
    for (k, s) in sigma.iter().enumerate() {
        gamma.push(GammaEntry {
            source: k,
            tuples: maximal_gamma(rho, s, budget)?,
        });
    }
    let conj = evaluate_conjunction(t, sigma, &gamma)?;
    let extra = conj.points().find(|&x| !rho.contains(x));
    let uncovered: Vec<usize> = coverage(t, &gamma)
        .iter()
        .enumerate()
        .filter(|(_, c)| !**c)
        .map(|(i, _)| i + 1)
        .collect();
    let definable = extra.is_none() && uncovered.is_empty();
    let defect = (!definable).then(|| Defect {
        extra_tuple: extra.map(|x| BitTuple::new(t, x).expect("point fits arity")),
        uncovered,
    });
    Ok(DefinabilityVerdict {
        definable,
        gamma,
        defect,
        reduction: None,
    })
}

/// Decides whether `ρ` is qfpp-definable from `Σ`. The verdict is validated
/// before it is returned.
pub fn qfpp_definable(
    rho: &Relation,
    sigma: &[Relation],
    budget: &Budget,
) -> Result<DefinabilityVerdict> {
    if let Some(why) = redundancy(rho)? {
        return Err(Error::NotIrredundant(why));
    }
    let verdict = decide(rho, sigma, budget)?;
    verdict.validate(rho, sigma)?;
    Ok(verdict)
}

/// Like `qfpp_definable`, but reduces a redundant target first and records
/// the reduction in the verdict.
pub fn qfpp_definable_reduced(
    rho: &Relation,
    sigma: &[Relation],
    budget: &Budget,
) -> Result<DefinabilityVerdict> {
    if is_irredundant(rho)? {
        return qfpp_definable(rho, sigma, budget);
    }
    let reduction = reduce_redundant(rho)?;
    let mut verdict = decide(&reduction.relation, sigma, budget)?;
    verdict.reduction = Some(reduction);
    verdict.validate(rho, sigma)?;
    Ok(verdict)
}

/// Greedily removes index tuples from a definable verdict while it stays a witness.
pub fn minimize_witness(
    verdict: &DefinabilityVerdict,
    rho: &Relation,
    sigma: &[Relation],
) -> Result<DefinabilityVerdict> {
    if !verdict.definable {
        return Ok(verdict.clone());
    }
    let target = verdict.reduction.as_ref().map_or(rho, |r| &r.relation);
    let t = target.arity();
    let mut gamma = verdict.gamma.clone();
    for g in 0..gamma.len() {
        let mut k = 0;
        while k < gamma[g].tuples.len() {
            let removed = gamma[g].tuples.remove(k);
            let ok = coverage(t, &gamma).iter().all(|&c| c)
                && &evaluate_conjunction(t, sigma, &gamma)? == target;
            if !ok {
                gamma[g].tuples.insert(k, removed);
                k += 1;
            }
        }
    }
    let out = DefinabilityVerdict {
        gamma,
        ..verdict.clone()
    };
    out.validate(rho, sigma)?;
    Ok(out)
}

/// Outcome of checking `pPol Σ_1 ⊆ pPol Σ_2`.
#[derive(Clone, Debug, Serialize)]
pub struct LeqReport {
    pub holds: bool,
    /// One verdict per target in `Σ_2`, stopping at the first failure.
    pub verdicts: Vec<DefinabilityVerdict>,
}

/// `pPol Σ_1 ⊆ pPol Σ_2`: every member of `Σ_2` is definable from `Σ_1`.
pub fn ppol_leq_report(
    sigma1: &[Relation],
    sigma2: &[Relation],
    budget: &Budget,
) -> Result<LeqReport> {
    let mut verdicts = Vec::new();
    for rho in sigma2 {
        let v = qfpp_definable(rho, sigma1, budget)?;
        let ok = v.definable;
        verdicts.push(v);
        if !ok {
            return Ok(LeqReport {
                holds: false,
                verdicts,
            });
        }
    }
    Ok(LeqReport {
        holds: true,
        verdicts,
    })
}

pub fn ppol_leq(sigma1: &[Relation], sigma2: &[Relation], budget: &Budget) -> Result<bool> {
    Ok(ppol_leq_report(sigma1, sigma2, budget)?.holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{r02, r_lambda, r_lambda_lambda, rho_02};
    use crate::preserve::{ppol_fingerprint, separating_function};

    fn rel(ts: &[&str]) -> Relation {
        Relation::from_tuples(ts).unwrap()
    }

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn irredundancy_examples() {
        assert!(is_irredundant(&rho_02()).unwrap());
        assert!(!is_irredundant(&Relation::full(2).unwrap()).unwrap());
        assert!(is_irredundant(&r_lambda_lambda()).unwrap());
        assert!(!is_irredundant(&rel(&["00", "11"])).unwrap());
        assert_eq!(
            is_irredundant(&Relation::empty(2).unwrap()),
            Err(Error::EmptyRelation)
        );
    }

    #[test]
    fn reduction_examples() {
        // Merging coordinates 2 and 3 leaves a fictitious coordinate.
        let r = reduce_redundant(&rel(&["000", "011"])).unwrap();
        assert_eq!(r.kept, vec![1]);
        assert_eq!(r.relation, rel(&["0"]));
        let r = reduce_redundant(&rel(&["000", "011", "100"])).unwrap();
        assert_eq!(r.kept, vec![1, 2]);
        assert_eq!(r.relation, rel(&["00", "01", "10"]));
        let r = reduce_redundant(&rel(&["00", "01"])).unwrap();
        assert_eq!(r.kept, vec![1]);
        assert!(reduce_redundant(&Relation::full(2).unwrap()).is_err());
        let v = qfpp_definable_reduced(
            &rel(&["000", "011"]),
            &[rel(&["0"]), rel(&["01", "00"])],
            &budget(),
        )
        .unwrap();
        assert!(v.reduction.is_some());
        assert!(qfpp_definable(&rel(&["000", "011"]), &[rel(&["0"])], &budget()).is_err());
    }

    #[test]
    fn gamma_examples() {
        let r = r_lambda_lambda();
        let g = maximal_gamma(&r, &r, &budget()).unwrap();
        assert!(g.contains(&IndexTuple::one_based(&[1, 2, 3])));
        let g = maximal_gamma(&r, &r_lambda(3).unwrap(), &budget()).unwrap();
        for e in [[1, 2, 3, 3], [2, 1, 1, 1], [3, 1, 1, 1]] {
            assert!(g.contains(&IndexTuple::one_based(&e)));
        }
        let tiny = Budget {
            max_index_tuples: 10,
            ..Budget::default()
        };
        assert!(maximal_gamma(&r, &r_lambda(3).unwrap(), &tiny).is_err());
    }

    #[test]
    fn gamma_is_exactly_the_admissible_tuples() {
        let rho = r_lambda_lambda();
        let sigma = rel(&["001", "010", "111", "100"]);
        let g = maximal_gamma(&rho, &sigma, &budget()).unwrap();
        let mut brute = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let i = IndexTuple(vec![a, b, c]);
                    if rho.points().all(|x| sigma.contains(i.select(x, 3))) {
                        brute.push(i);
                    }
                }
            }
        }
        assert_eq!(g, brute);
    }

    #[test]
    fn verdict_examples() {
        let r = r_lambda_lambda();
        let v = qfpp_definable(&r, std::slice::from_ref(&r), &budget()).unwrap();
        assert!(v.definable);
        assert_eq!(v.witness_size(), 1);
        let big = r02(5).unwrap();
        let v = qfpp_definable(&big, &[r02(3).unwrap(), big.clone()], &budget()).unwrap();
        assert!(v.definable && v.gamma[0].tuples.is_empty());
        let v = qfpp_definable(&r, &[r_lambda(3).unwrap()], &budget()).unwrap();
        assert!(v.definable);
        let m = minimize_witness(&v, &r, &[r_lambda(3).unwrap()]).unwrap();
        assert!(m.witness_size() <= v.witness_size());
        let (r3, r4) = (r_lambda(3).unwrap(), r_lambda(4).unwrap());
        assert!(
            !qfpp_definable(&r3, std::slice::from_ref(&r4), &budget())
                .unwrap()
                .definable
        );
        assert!(!qfpp_definable(&r4, &[r3], &budget()).unwrap().definable);
    }

    #[test]
    fn r02_smaller_from_larger_is_not_definable() {
        let (a, b) = (r02(3).unwrap(), r02(4).unwrap());
        let v = qfpp_definable(&a, std::slice::from_ref(&b), &budget()).unwrap();
        assert!(!v.definable);
        // No index tuple is admissible: the clique part needs four pairwise
        // exclusive coordinates.
        assert!(v.gamma[0].tuples.is_empty());
        assert_eq!(v.defect.unwrap().uncovered, vec![1, 2, 3, 4, 5, 6]);
        let v = qfpp_definable(&b, &[a], &budget()).unwrap();
        assert!(!v.definable);
        let uncovered = v.defect.unwrap().uncovered;
        assert!((1..=4).all(|c| uncovered.contains(&c)));
    }

    #[test]
    fn ppol_leq_examples() {
        let (zero, one, pair) = (rel(&["0"]), rel(&["1"]), rel(&["01"]));
        let s1 = [zero.clone(), one.clone()];
        let s2 = [zero.clone(), one.clone(), pair.clone()];
        assert!(ppol_leq(&s1, &s2, &budget()).unwrap());
        assert!(ppol_leq(&s2, &s1, &budget()).unwrap());
        assert!(!ppol_leq(&[zero.clone(), pair], &[one], &budget()).unwrap());
        assert!(ppol_leq(&[rho_02()], &[rho_02()], &budget()).unwrap());
    }

    #[test]
    fn validation_rejects_tampering() {
        let r = r_lambda_lambda();
        let mut v = qfpp_definable(&r, std::slice::from_ref(&r), &budget()).unwrap();
        v.gamma[0].tuples.push(IndexTuple(vec![2, 2, 0]));
        assert!(v.validate(&r, std::slice::from_ref(&r)).is_err());
        let mut v = qfpp_definable(&r, std::slice::from_ref(&r), &budget()).unwrap();
        v.definable = false;
        assert!(v.validate(&r, std::slice::from_ref(&r)).is_err());
    }

    fn irredundant_small() -> Vec<Relation> {
        let mut out = Vec::new();
        for h in 1..=2 {
            for bits in 1u32..(1 << (1 << h)) {
                let r = Relation::from_predicate(h, |p| (bits >> p) & 1 == 1).unwrap();
                if is_irredundant(&r).unwrap() {
                    out.push(r);
                }
            }
        }
        out
    }

    #[test]
    fn agrees_with_function_side_on_small_relations() {
        let rels = irredundant_small();
        let fps: Vec<_> = rels
            .iter()
            .map(|r| ppol_fingerprint(std::slice::from_ref(r), 3).unwrap())
            .collect();
        for (a, rho) in rels.iter().enumerate() {
            for (b, sigma) in rels.iter().enumerate() {
                let v = qfpp_definable(rho, std::slice::from_ref(sigma), &budget()).unwrap();
                if v.definable {
                    assert!(fps[b].is_subset(&fps[a]).unwrap());
                } else {
                    let f = separating_function(
                        std::slice::from_ref(sigma),
                        std::slice::from_ref(rho),
                        3,
                    )
                    .unwrap();
                    assert!(f.is_some(), "{rho} from {sigma}");
                }
            }
        }
    }

    #[test]
    fn definability_is_monotone_in_sources() {
        let rels = irredundant_small();
        for rho in &rels {
            for (k, s) in rels.iter().enumerate() {
                if qfpp_definable(rho, std::slice::from_ref(s), &budget())
                    .unwrap()
                    .definable
                {
                    let more = [s.clone(), rels[(k + 1) % rels.len()].clone()];
                    assert!(qfpp_definable(rho, &more, &budget()).unwrap().definable);
                }
            }
        }
    }

    #[test]
    fn conjunction_contains_target() {
        let rels = irredundant_small();
        for rho in &rels {
            for s in &rels {
                let v = qfpp_definable(rho, std::slice::from_ref(s), &budget()).unwrap();
                let conj =
                    evaluate_conjunction(rho.arity(), std::slice::from_ref(s), &v.gamma).unwrap();
                assert!(rho.is_subset(&conj));
            }
        }
    }
}
