//! Registry of reproducible checks, grouped by topic and numbered by
//! acceptance criterion.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::budget::Budget;
use crate::definability::{ppol_leq_report, qfpp_definable, DefinabilityVerdict};
use crate::error::{Error, Result};
use crate::families::{
    catalog_entry, gamma_m, linear_functions, r02, r02_c, r02_k, r_lambda, r_lambda_lambda, rho_02,
    rho_1, rho_c, rho_l, xi, LAMBDA_FAMILY, LE_FAMILY,
};
use crate::fingerprint::CloneFingerprint;
use crate::function::{PartialFunction, SymmetricPartialFunction};
use crate::intervals::{compute_interval_with_retry, str_fingerprint, transfer, IntervalResult};
use crate::ops::star;
use crate::pair::RelationPair;
use crate::preserve::{
    cpol_fingerprint, find_symmetric_violation, multiset_count, pol_fingerprint, ppol_fingerprint,
    preserves, preserves_symmetric,
};
use crate::relation::Relation;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Linear,
    T02,
    Lambda,
    Pairs,
    Intervals,
}

impl Section {
    pub const ALL: [Section; 5] = [
        Section::Linear,
        Section::T02,
        Section::Lambda,
        Section::Pairs,
        Section::Intervals,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Linear => "linear",
            Section::T02 => "t02",
            Section::Lambda => "lambda",
            Section::Pairs => "pairs",
            Section::Intervals => "intervals",
        }
    }

    pub fn parse(s: &str) -> Result<Vec<Section>> {
        if s == "all" {
            return Ok(Self::ALL.to_vec());
        }
        Self::ALL
            .iter()
            .find(|x| x.name() == s)
            .map(|x| vec![*x])
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub id: &'static str,
    pub section: Section,
    pub criterion: u8,
    pub claim: &'static str,
    pub verdict: Verdict,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u128>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Outcome = Result<(bool, String)>;

pub struct Check {
    pub id: &'static str,
    pub section: Section,
    pub criterion: u8,
    pub claim: &'static str,
    run: fn(&Budget) -> Outcome,
}

impl Check {
    pub fn run(&self, budget: &Budget, timings: bool) -> CheckRecord {
        let start = Instant::now();
        let (verdict, detail) = match (self.run)(budget) {
            Ok((true, d)) => (Verdict::Pass, d),
            Ok((false, d)) => (Verdict::Fail, d),
            Err(e @ Error::BudgetExceeded { .. }) => (Verdict::Skipped, e.to_string()),
            Err(e) => (Verdict::Fail, format!("error: {e}")),
        };
        CheckRecord {
            id: self.id,
            section: self.section,
            criterion: self.criterion,
            claim: self.claim,
            verdict,
            detail,
            runtime_ms: timings.then(|| start.elapsed().as_millis()),
        }
    }
}

macro_rules! check {
    ($id:expr, $section:ident, $crit:expr, $claim:expr, $run:expr) => {
        Check {
            id: $id,
            section: Section::$section,
            criterion: $crit,
            claim: $claim,
            run: $run,
        }
    };
}

pub fn registry() -> Vec<Check> {
    vec![
        check!(
            "linear.rho-matrices",
            Linear,
            1,
            "ρ_C, ρ_1, ρ_L have 4, 6, 8 members and form a chain",
            rho_matrices
        ),
        check!(
            "linear.xi1-naive",
            Linear,
            3,
            "ξ_1 preserves ρ_1 and ρ_C (naive search)",
            xi1_naive
        ),
        check!(
            "linear.xi2-symmetric",
            Linear,
            3,
            "ξ_2 preserves ρ_1 and ρ_C (multiset search)",
            xi2_symmetric
        ),
        check!(
            "linear.fast-equals-naive",
            Linear,
            3,
            "multiset search agrees with naive search up to arity 4",
            fast_vs_naive
        ),
        check!(
            "linear.pol-rho-c",
            Linear,
            4,
            "Pol ρ_C = constants and projections",
            pol_rho_c
        ),
        check!(
            "linear.xi1-not-str-l",
            Linear,
            9,
            "no linear 4-ary function extends ξ_1",
            xi1_not_str_l
        ),
        check!(
            "t02.matrices",
            T02,
            1,
            "R^{0,2}_{C,5} and R^{0,2}_{K,5} columns",
            t02_matrices
        ),
        check!(
            "t02.pol-identity",
            T02,
            4,
            "Pol R^{0,2}_n = Pol ρ_{0,2} for n = 3, 5",
            t02_pol_identity
        ),
        check!(
            "t02.not-5-from-3",
            T02,
            5,
            "R^{0,2}_5 is not definable from R^{0,2}_3",
            t02_5_from_3
        ),
        check!(
            "t02.not-3-from-5",
            T02,
            5,
            "R^{0,2}_3 is not definable from R^{0,2}_5",
            t02_3_from_5
        ),
        check!(
            "t02.independence",
            T02,
            6,
            "pPol of subsets of {R^{0,2}_3, R^{0,2}_5} are pairwise distinct",
            t02_independence
        ),
        check!(
            "lambda.table",
            Lambda,
            1,
            "Γ_4 has the 13 listed conditions and R^Λ_4 forbids 10011, 10111",
            lambda_table
        ),
        check!(
            "lambda.monster-properties",
            Lambda,
            2,
            "membership properties of R^Λ_m for m = 3..6",
            monster_properties
        ),
        check!(
            "lambda.pol-identity",
            Lambda,
            4,
            "Pol R^Λ_m = Λ for m = 3, 4",
            lambda_pol_identity
        ),
        check!(
            "lambda.definable-rll",
            Lambda,
            5,
            "R^Λ_Λ is definable from R^Λ_3",
            lambda_definable
        ),
        check!(
            "lambda.separation",
            Lambda,
            5,
            "R^Λ_3 and R^Λ_4 are mutually not definable",
            lambda_separation
        ),
        check!(
            "lambda.independence",
            Lambda,
            6,
            "pPol of subsets of {R^Λ_3, R^Λ_4} are pairwise distinct",
            lambda_independence
        ),
        check!(
            "pairs.no-total",
            Pairs,
            8,
            "cPol(ρ, ∅) has no total member for ρ = {0}, ρ_{0,2}",
            pairs_no_total
        ),
        check!(
            "pairs.star",
            Pairs,
            8,
            "T ⋆ D ⊆ T and D ⋆ T ⊆ T for T = cPol({0}, ∅), D = pPol {0}",
            pairs_star
        ),
        check!(
            "pairs.diagonal",
            Pairs,
            8,
            "cPol(ρ, ρ) = pPol ρ for ρ = ρ_{0,2}, ρ_C",
            pairs_diagonal
        ),
        check!(
            "intervals.small",
            Intervals,
            7,
            "interval sizes 1, 2, 2, 7 and 4 for O, T_0, T_1, T_0∩T_1",
            intervals_small
        ),
        check!(
            "intervals.monotone",
            Intervals,
            7,
            "25 elements above M∩T_0∩T_1, 13 with that total part",
            intervals_monotone
        ),
        check!(
            "intervals.selfdual",
            Intervals,
            7,
            "33 elements above S∩T_0∩T_1, 25 with that total part",
            intervals_selfdual
        ),
        check!(
            "intervals.transfer",
            Intervals,
            7,
            "transfer by T_{0,2} is closed, keeps its total part and separates",
            intervals_transfer
        ),
    ]
}

/// Runs every check of `sections`; records come back in registry order.
pub fn run_checks(sections: &[Section], budget: &Budget, timings: bool) -> VerifyReport {
    let selected: Vec<Check> = registry()
        .into_iter()
        .filter(|c| sections.contains(&c.section))
        .collect();
    let checks: Vec<CheckRecord> = selected
        .par_iter()
        .map(|c| c.run(budget, timings))
        .collect();
    let count = |v| checks.iter().filter(|c| c.verdict == v).count();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        skipped: count(Verdict::Skipped),
        checks,
    }
}

fn rel(tuples: &[&str]) -> Relation {
    Relation::from_tuples(tuples).expect("literal relation")
}

fn all_of(parts: Vec<(bool, String)>) -> Outcome {
    let ok = parts.iter().all(|(b, _)| *b);
    let detail = parts
        .into_iter()
        .filter(|(b, _)| !ok || *b)
        .filter(|(b, _)| ok || !*b)
        .map(|(_, d)| d)
        .collect::<Vec<_>>()
        .join("; ");
    Ok((ok, detail))
}

fn rho_matrices(_: &Budget) -> Outcome {
    let c = rel(&["0000", "0011", "0101", "1111"]);
    let one = rel(&["0000", "0011", "0101", "1010", "1100", "1111"]);
    let l = rel(&[
        "0000", "0011", "0101", "0110", "1001", "1010", "1100", "1111",
    ]);
    all_of(vec![
        (rho_c() == c, "ρ_C".into()),
        (rho_1() == one, "ρ_1".into()),
        (rho_l() == l, "ρ_L".into()),
        (c.is_subset(&one) && one.is_subset(&l), "chain".into()),
    ])
}

fn xi1_naive(_: &Budget) -> Outcome {
    let f = xi(1)?.expand()?;
    all_of(vec![
        (preserves(&f, &rho_1()), "ρ_1".into()),
        (preserves(&f, &rho_c()), "ρ_C".into()),
    ])
}

fn xi2_symmetric(budget: &Budget) -> Outcome {
    let f = xi(2)?;
    let mut parts = Vec::new();
    for (name, r) in [("ρ_1", rho_1()), ("ρ_C", rho_c())] {
        let ok = preserves_symmetric(&f, &r, budget)?;
        parts.push((
            ok,
            format!("{name}: {} multisets", multiset_count(f.arity(), r.len())),
        ));
    }
    all_of(parts)
}

fn fast_vs_naive(budget: &Budget) -> Outcome {
    let mut compared = 0usize;
    for n in 1..=4usize {
        for code in 0..3u64.pow(n as u32 + 1) {
            let weights: Vec<Option<bool>> = (0..=n)
                .map(|w| match (code / 3u64.pow(w as u32)) % 3 {
                    0 => None,
                    1 => Some(false),
                    _ => Some(true),
                })
                .collect();
            let sf = SymmetricPartialFunction::new(weights)?;
            let f = sf.expand()?;
            for h in 1..=3usize {
                for members in 0u32..(1 << (1 << h)) {
                    let r = Relation::from_points(
                        h,
                        (0..(1u32 << h)).filter(|p| (members >> p) & 1 == 1),
                    )?;
                    let fast = find_symmetric_violation(&sf, &r, budget)?.is_none();
                    if fast != preserves(&f, &r) {
                        return Ok((
                            false,
                            format!(
                                "disagreement at arity {n}, relation {members:#x} of arity {h}"
                            ),
                        ));
                    }
                    compared += 1;
                }
            }
        }
    }
    Ok((true, format!("{compared} pairs")))
}

fn pol_rho_c(_: &Budget) -> Outcome {
    let k = 3;
    let fp = pol_fingerprint(&[rho_c()], k)?;
    let mut expected = CloneFingerprint::empty(k)?;
    for n in 1..=k {
        for v in [false, true] {
            expected.insert(&PartialFunction::constant(n, v)?);
        }
        for i in 0..n {
            expected.insert(&PartialFunction::projection(n, i)?);
        }
    }
    Ok((fp == expected, format!("{} ternary members", fp.count(3))))
}

fn xi1_not_str_l(_: &Budget) -> Outcome {
    let f = xi(1)?.expand()?;
    let lin = linear_functions(4)?;
    let extending = lin
        .iter()
        .map(|g| f.is_restriction_of(g))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|b| *b)
        .count();
    Ok((
        lin.len() == 32 && extending == 0,
        format!("{} linear functions, {extending} extend ξ_1", lin.len()),
    ))
}

fn t02_matrices(_: &Budget) -> Outcome {
    let c5 = rel(&[
        "00000", "00001", "00010", "00100", "01000", "10000", "00101", "01010", "10100", "01001",
        "10010",
    ]);
    let k5 = rel(&["00000", "00001", "00010", "00100", "01000", "10000"]);
    all_of(vec![
        (r02_c(5)? == c5, "R^{0,2}_{C,5}".into()),
        (r02_k(5)? == k5, "R^{0,2}_{K,5}".into()),
    ])
}

fn t02_pol_identity(_: &Budget) -> Outcome {
    let base = pol_fingerprint(&[rho_02()], 3)?;
    let mut parts = Vec::new();
    for n in [3, 5] {
        parts.push((pol_fingerprint(&[r02(n)?], 3)? == base, format!("n = {n}")));
    }
    all_of(parts)
}

fn uncovered_prefix(v: &DefinabilityVerdict, n: usize) -> bool {
    v.defect
        .as_ref()
        .is_some_and(|d| (1..=n).all(|i| d.uncovered.contains(&i)))
}

fn not_definable(target: &Relation, source: &Relation, n: usize, budget: &Budget) -> Outcome {
    let v = qfpp_definable(target, std::slice::from_ref(source), budget)?;
    v.validate(target, std::slice::from_ref(source))?;
    let uncovered = v
        .defect
        .as_ref()
        .map(|d| d.uncovered.clone())
        .unwrap_or_default();
    Ok((
        !v.definable && uncovered_prefix(&v, n),
        format!("|γ| = {}, uncovered {:?}", v.witness_size(), uncovered),
    ))
}

fn t02_5_from_3(budget: &Budget) -> Outcome {
    not_definable(&r02(5)?, &r02(3)?, 5, budget)
}

fn t02_3_from_5(budget: &Budget) -> Outcome {
    not_definable(&r02(3)?, &r02(5)?, 3, budget)
}

/// The four clones `pPol S` for `S ⊆ {a, b}` are pairwise distinct.
fn independence(a: Relation, b: Relation, budget: &Budget) -> Outcome {
    let subsets: Vec<Vec<Relation>> = vec![vec![], vec![a.clone()], vec![b.clone()], vec![a, b]];
    let mut distinct = 0;
    for i in 0..subsets.len() {
        for j in (i + 1)..subsets.len() {
            let ij = ppol_leq_report(&subsets[i], &subsets[j], budget)?;
            let ji = ppol_leq_report(&subsets[j], &subsets[i], budget)?;
            for (rep, lhs, rhs) in [
                (&ij, &subsets[j], &subsets[i]),
                (&ji, &subsets[i], &subsets[j]),
            ] {
                for (target, v) in lhs.iter().zip(&rep.verdicts) {
                    v.validate(target, rhs)?;
                }
            }
            if ij.holds && ji.holds {
                return Ok((false, format!("subsets {i} and {j} define each other")));
            }
            distinct += 1;
        }
    }
    Ok((true, format!("{distinct} pairs distinct")))
}

fn t02_independence(budget: &Budget) -> Outcome {
    independence(r02(3)?, r02(5)?, budget)
}

fn lambda_table(_: &Budget) -> Outcome {
    let rows: Vec<(usize, Vec<usize>)> = vec![
        (1, vec![2, 3, 4, 5]),
        (2, vec![1, 3, 4]),
        (2, vec![1, 3, 5]),
        (2, vec![1, 4, 5]),
        (3, vec![1, 2, 4]),
        (3, vec![1, 2, 5]),
        (3, vec![1, 4, 5]),
        (4, vec![1, 2, 3]),
        (4, vec![1, 2, 5]),
        (4, vec![1, 3, 5]),
        (5, vec![1, 2, 3]),
        (5, vec![1, 2, 4]),
        (5, vec![1, 3, 4]),
    ];
    let r = r_lambda(4)?;
    all_of(vec![
        (gamma_m(4)? == rows, "Γ_4".into()),
        (
            !r.contains_tuple(&"10011".parse()?),
            "10011 excluded".into(),
        ),
        (
            !r.contains_tuple(&"10111".parse()?),
            "10111 excluded".into(),
        ),
    ])
}

fn monster_properties(_: &Budget) -> Outcome {
    let mut parts = Vec::new();
    for m in 3..=6usize {
        let r = r_lambda(m)?;
        let h = m + 1;
        let ones = (1u32 << h) - 1;
        let first = 1u32 << m;
        let all_ones = r.contains(ones);
        let no_single_zero = (0..h).all(|i| !r.contains(ones ^ (1 << i)));
        let zero_prefix = (0..first).all(|x| r.contains(x) == (x != first - 1));
        let two_units = (0..h).all(|i| ((i + 1)..h).all(|j| r.contains((1 << i) | (1 << j))));
        parts.push((
            all_ones && no_single_zero && zero_prefix && two_units,
            format!("m = {m}"),
        ));
    }
    all_of(parts)
}

fn lambda_pol_identity(_: &Budget) -> Outcome {
    let lambda = catalog_entry("Lambda")?;
    let base = pol_fingerprint(&lambda.defining_relations, 3)?;
    let mut parts = Vec::new();
    for m in [3, 4] {
        parts.push((
            pol_fingerprint(&[r_lambda(m)?], 3)? == base,
            format!("m = {m}"),
        ));
    }
    all_of(parts)
}

fn lambda_definable(budget: &Budget) -> Outcome {
    let target = r_lambda_lambda();
    let sources = [r_lambda(3)?];
    let v = qfpp_definable(&target, &sources, budget)?;
    v.validate(&target, &sources)?;
    let tuples: Vec<Vec<usize>> = v
        .gamma
        .iter()
        .flat_map(|g| {
            g.tuples
                .iter()
                .map(|t| t.entries().iter().map(|i| i + 1).collect())
        })
        .collect();
    let wanted = [vec![1, 2, 3, 3], vec![2, 1, 1, 1], vec![3, 1, 1, 1]];
    let present = wanted.iter().all(|w| tuples.contains(w));
    Ok((
        v.definable && present,
        format!("|γ| = {}", v.witness_size()),
    ))
}

fn lambda_separation(budget: &Budget) -> Outcome {
    let (r3, r4) = (r_lambda(3)?, r_lambda(4)?);
    let mut parts = Vec::new();
    for (name, target, source) in [("3 from 4", &r3, &r4), ("4 from 3", &r4, &r3)] {
        let v = qfpp_definable(target, std::slice::from_ref(source), budget)?;
        v.validate(target, std::slice::from_ref(source))?;
        parts.push((!v.definable && v.defect.is_some(), name.to_string()));
    }
    all_of(parts)
}

fn lambda_independence(budget: &Budget) -> Outcome {
    independence(r_lambda(3)?, r_lambda(4)?, budget)
}

fn pairs_no_total(_: &Budget) -> Outcome {
    let mut parts = Vec::new();
    for (name, r) in [("{0}", rel(&["0"])), ("ρ_{0,2}", rho_02())] {
        let fp = cpol_fingerprint(&[RelationPair::with_empty_consequent(r)], 3)?;
        let totals: usize = (1..=3).map(|n| fp.total_side().count(n)).sum();
        parts.push((totals == 0, format!("{name}: {totals} total members")));
    }
    all_of(parts)
}

fn pairs_star(_: &Budget) -> Outcome {
    let k = 3;
    let t = cpol_fingerprint(&[RelationPair::with_empty_consequent(rel(&["0"]))], k)?;
    let d = ppol_fingerprint(&[rel(&["0"])], k)?;
    let ts: Vec<Vec<PartialFunction>> = (1..=k).map(|n| t.functions(n).collect()).collect();
    let ds: Vec<Vec<PartialFunction>> = (1..=k).map(|n| d.functions(n).collect()).collect();
    let mut tested = 0usize;
    for a in 1..=k {
        for b in 1..=k {
            if a + b - 1 > k {
                continue;
            }
            for (left, right) in [(&ts[a - 1], &ds[b - 1]), (&ds[a - 1], &ts[b - 1])] {
                let bad = left.par_iter().any(|f| {
                    right
                        .iter()
                        .any(|g| !t.contains(&star(f, g).expect("arity in range")))
                });
                if bad {
                    return Ok((false, format!("violation with arities {a} and {b}")));
                }
                tested += left.len() * right.len();
            }
        }
    }
    Ok((true, format!("{tested} products")))
}

fn pairs_diagonal(_: &Budget) -> Outcome {
    let mut parts = Vec::new();
    for (name, r) in [("ρ_{0,2}", rho_02()), ("ρ_C", rho_c())] {
        let c = cpol_fingerprint(&[RelationPair::diagonal(r.clone())], 3)?;
        parts.push((c == ppol_fingerprint(&[r], 3)?, name.to_string()));
    }
    all_of(parts)
}

fn interval_outcome(key: &str, family: &[&str], budget: &Budget) -> Result<(IntervalResult, bool)> {
    let c = catalog_entry(key)?;
    let r = compute_interval_with_retry(&c, family, budget)?;
    r.report.validate_dedup()?;
    r.report.check_poset()?;
    r.report.check_fingerprint_agreement()?;
    let ok = r.expected.is_some_and(|(up, exact)| {
        r.up_count == up && exact.is_none_or(|e| e == r.exact_count) && r.discrepancy.is_none()
    });
    Ok((r, ok))
}

fn describe(key: &str, r: &IntervalResult) -> String {
    let mut s = format!("{key}: {} above, {} exact", r.up_count, r.exact_count);
    if let Some(d) = &r.discrepancy {
        s.push_str(&format!(" (retried with all relations: {d})"));
    }
    s
}

fn intervals_small(budget: &Budget) -> Outcome {
    let mut parts = Vec::new();
    let basis = ["P0", "P1", "P01"];
    for key in ["O", "T0", "T1", "T0T1"] {
        let (r, ok) = interval_outcome(key, &basis, budget)?;
        let exact_one = key == "T0T1" || r.exact_count == 1;
        parts.push((ok && exact_one, describe(key, &r)));
    }
    all_of(parts)
}

fn intervals_monotone(budget: &Budget) -> Outcome {
    let (r, ok) = interval_outcome("MT0T1", &LE_FAMILY, budget)?;
    Ok((ok, describe("MT0T1", &r)))
}

fn intervals_selfdual(budget: &Budget) -> Outcome {
    let (r, ok) = interval_outcome("ST0T1", &LAMBDA_FAMILY, budget)?;
    Ok((ok, describe("ST0T1", &r)))
}

fn intervals_transfer(_: &Budget) -> Outcome {
    let k = 3;
    let d = catalog_entry("T0_2")?.meet(&catalog_entry("T0")?, "T0,2", "T0_2");
    let pair = RelationPair::with_empty_consequent(rel(&["0"]));
    let (a, b) = (r02(3)?, r02(5)?);
    let xs = [
        ppol_fingerprint(std::slice::from_ref(&a), k)?,
        ppol_fingerprint(std::slice::from_ref(&b), k)?,
        ppol_fingerprint(&[a, b], k)?,
    ];
    let outs = xs
        .iter()
        .map(|x| transfer(x, &d, &pair, k))
        .collect::<Result<Vec<_>>>()?;
    let total_ok = outs[0].total_side() == pol_fingerprint(&d.defining_relations, k)?;
    let str_ok = str_fingerprint(&d, k)?.is_subset(&outs[0])?;
    let mut separated = true;
    let mut distinct_inputs = 0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if xs[i] != xs[j] {
                distinct_inputs += 1;
                separated &= outs[i] != outs[j];
            }
        }
    }
    Ok((
        total_ok && str_ok && separated,
        format!("{distinct_inputs} distinct input pairs at arity ≤ {k}"),
    ))
}
