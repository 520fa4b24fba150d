//! Named relations and partial functions, and a catalog of total clones given
//! by defining relations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{PartialFunction, SymmetricPartialFunction, MAX_SYMMETRIC_ARITY};
use crate::relation::Relation;
use crate::tuple::{coord, MAX_ARITY};

/// `{00, 01, 10}`.
pub fn rho_02() -> Relation {
    Relation::from_tuples(&["00", "01", "10"]).expect("fixed relation")
}

fn check_cycle_size(n: usize) -> Result<()> {
    if n < 2 || 2 * n > MAX_ARITY {
        return Err(Error::InvalidParameter(format!(
            "n must lie in 2..={}, got {n}",
            MAX_ARITY / 2
        )));
    }
    Ok(())
}

/// `ρ_{0,2}(x_i, x_{i+1 mod n})` for all `i`: no two cyclically adjacent ones.
pub fn r02_c(n: usize) -> Result<Relation> {
    check_cycle_size(n)?;
    let mask = (1u32 << n) - 1;
    Relation::from_predicate(n, |p| {
        let rotated = ((p << 1) | (p >> (n - 1))) & mask;
        p & rotated == 0
    })
}

/// `ρ_{0,2}(x_i, x_j)` for all `i ≠ j`: at most one coordinate is 1.
pub fn r02_k(n: usize) -> Result<Relation> {
    check_cycle_size(n)?;
    Relation::from_predicate(n, |p| p.count_ones() <= 1)
}

/// `r02_c(n) × r02_k(n)`, of arity `2n`.
pub fn r02(n: usize) -> Result<Relation> {
    r02_c(n)?.product(&r02_k(n)?)
}

/// `λ_k = 2^{k+1} ∖ {(0, 1, ..., 1)}`.
pub fn lambda_k(k: usize) -> Result<Relation> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let forbidden = (1u32 << k) - 1;
    Relation::from_predicate(k + 1, |p| p != forbidden)
}

/// `x_i ∨ ⋁_{j ∈ J} ¬x_j` on `n` variables, indices 1-based.
pub fn lambda_ij(n: usize, i: usize, js: &[usize]) -> Result<Relation> {
    let check = |x: usize| {
        if x == 0 || x > n {
            Err(Error::InvalidParameter(format!(
                "index {x} outside 1..={n}"
            )))
        } else {
            Ok(())
        }
    };
    check(i)?;
    for &j in js {
        check(j)?;
    }
    Relation::from_predicate(n, |p| {
        coord(p, n, i - 1) == 1 || js.iter().any(|&j| coord(p, n, j - 1) == 0)
    })
}

/// Conjunction of `lambda_ij` over `gamma`; the full relation when `gamma` is empty.
pub fn lambda_gamma(n: usize, gamma: &[(usize, Vec<usize>)]) -> Result<Relation> {
    let mut rel = Relation::full(n)?;
    for (i, js) in gamma {
        rel = rel.intersection(&lambda_ij(n, *i, js)?)?;
    }
    Ok(rel)
}

/// `(1, [2, m+1])` followed by `(i, {1, j_1, j_2})` for distinct `i, j_1, j_2 ∈ [2, m+1]`,
/// ordered by `i` and then lexicographically by `J`.
pub fn gamma_m(m: usize) -> Result<Vec<(usize, Vec<usize>)>> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 3, got {m}"
        )));
    }
    let mut out = vec![(1, (2..=m + 1).collect())];
    for i in 2..=m + 1 {
        for j1 in 2..=m + 1 {
            for j2 in (j1 + 1)..=m + 1 {
                if j1 != i && j2 != i {
                    out.push((i, vec![1, j1, j2]));
                }
            }
        }
    }
    Ok(out)
}

/// `R^Λ_m = λ^{m+1}_{Γ_m}`.
pub fn r_lambda(m: usize) -> Result<Relation> {
    lambda_gamma(m + 1, &gamma_m(m)?)
}

/// `{000, 001, 010, 111}`.
pub fn r_lambda_lambda() -> Relation {
    Relation::from_tuples(&["000", "001", "010", "111"]).expect("fixed relation")
}

/// The dual of `R^Λ_m`, for the `V` side.
pub fn r_lambda_dual(m: usize) -> Result<Relation> {
    Ok(r_lambda(m)?.dual())
}

pub fn rho_c() -> Relation {
    Relation::from_matrix_rows(&["0001", "0011", "0101", "0111"]).expect("fixed relation")
}

pub fn rho_1() -> Relation {
    Relation::from_matrix_rows(&["000111", "001011", "010101", "011001"]).expect("fixed relation")
}

pub fn rho_l() -> Relation {
    Relation::from_matrix_rows(&["00001111", "00110011", "01010101", "01101001"])
        .expect("fixed relation")
}

/// `n(k, p) = (2k - 1)p + 1`.
pub fn tau_arity(k: u64, p: u64) -> u64 {
    (2 * k - 1) * p + 1
}

/// `τ_p^k`: 1 on the all-ones tuple, 0 on tuples of weight `≤ p`, undefined otherwise.
pub fn tau(k: usize, p: usize) -> Result<SymmetricPartialFunction> {
    if k < 2 || p < 1 {
        return Err(Error::InvalidParameter(format!(
            "need k ≥ 2 and p ≥ 1, got k={k}, p={p}"
        )));
    }
    let n = tau_arity(k as u64, p as u64);
    if n > MAX_SYMMETRIC_ARITY as u64 {
        return Err(Error::ArityOutOfRange(n as usize));
    }
    let n = n as usize;
    let by_weight = (0..=n)
        .map(|w| {
            if w == n {
                Some(true)
            } else if w <= p {
                Some(false)
            } else {
                None
            }
        })
        .collect();
    SymmetricPartialFunction::new(by_weight)
}

/// `p_1 = 1`, `p_j = n(j, p_{j-1})`.
pub fn p_seq(j: usize) -> Result<u64> {
    if j == 0 {
        return Err(Error::InvalidParameter("j must be at least 1".into()));
    }
    let mut p = 1u64;
    for i in 2..=j {
        p = tau_arity(i as u64, p);
    }
    Ok(p)
}

/// `ξ_j = τ_{p_j}^{j+1}`.
pub fn xi(j: usize) -> Result<SymmetricPartialFunction> {
    let p = p_seq(j)?;
    tau(j + 1, p as usize)
}

pub fn and() -> PartialFunction {
    PartialFunction::total(2, |p| p == 0b11).expect("fixed function")
}

pub fn or() -> PartialFunction {
    PartialFunction::total(2, |p| p != 0).expect("fixed function")
}

pub fn not() -> PartialFunction {
    PartialFunction::total(1, |p| p == 0).expect("fixed function")
}

/// The `2^(n+1)` total linear functions `c ⊕ ⨁_{i ∈ S} x_i` of arity `n`.
pub fn linear_functions(n: usize) -> Result<Vec<PartialFunction>> {
    let mut out = Vec::new();
    for c in [false, true] {
        for s in 0u32..(1 << n) {
            out.push(PartialFunction::total(n, |p| {
                ((p & s).count_ones() % 2 == 1) != c
            })?);
        }
    }
    Ok(out)
}

/// Names accepted by `basis_relation`, in catalog order.
pub const BASIS_NAMES: [&str; 11] = [
    "P0",
    "P1",
    "P01",
    "Ple",
    "P0le",
    "P1le",
    "P01le",
    "Plambda",
    "P0lambda",
    "P1lambda",
    "P01lambda",
];

/// Generating relations for the `≤` interval.
pub const LE_FAMILY: [&str; 7] = ["P0", "P1", "P01", "Ple", "P0le", "P1le", "P01le"];

/// Generating relations for the `λ` interval.
pub const LAMBDA_FAMILY: [&str; 7] = [
    "P0",
    "P1",
    "P01",
    "Plambda",
    "P0lambda",
    "P1lambda",
    "P01lambda",
];

/// The relation `σ` with `P_name = pPol σ`.
pub fn basis_relation(name: &str) -> Result<Relation> {
    let tuples: &[&str] = match name {
        "P0" => &["0"],
        "P1" => &["1"],
        "P01" => &["01"],
        "Ple" => &["00", "01", "11"],
        "P0le" => &["000", "001", "011"],
        "P1le" => &["100", "101", "111"],
        "P01le" => &["0100", "0101", "0111"],
        "Plambda" => &["01", "10"],
        "P0lambda" => &["001", "010"],
        "P1lambda" => &["101", "110"],
        "P01lambda" => &["0101", "0110"],
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    Relation::from_tuples(tuples)
}

/// A total clone given as `Pol` of its defining relations.
#[derive(Clone, Debug, Serialize)]
pub struct CloneCatalogEntry {
    pub name: String,
    /// ASCII alias for command lines.
    pub key: String,
    pub defining_relations: Vec<Relation>,
    pub notes: String,
}

impl CloneCatalogEntry {
    fn new(name: &str, key: &str, rels: Vec<Relation>, notes: &str) -> Self {
        CloneCatalogEntry {
            name: name.to_string(),
            key: key.to_string(),
            defining_relations: rels,
            notes: notes.to_string(),
        }
    }

    /// Intersection with another catalog clone: the union of defining relations.
    pub fn meet(&self, other: &CloneCatalogEntry, name: &str, key: &str) -> Self {
        let mut rels = self.defining_relations.clone();
        for r in &other.defining_relations {
            if !rels.contains(r) {
                rels.push(r.clone());
            }
        }
        let notes = format!("{} ∩ {}", self.name, other.name);
        CloneCatalogEntry::new(name, key, rels, &notes)
    }
}

fn singleton(a: &str) -> Relation {
    Relation::from_tuples(&[a]).expect("fixed relation")
}

/// `2^μ ∖ {(b, ..., b)}` with `b = ¬a`.
pub fn t_a_mu_relation(a: bool, mu: usize) -> Result<Relation> {
    if mu < 2 {
        return Err(Error::InvalidParameter(format!(
            "μ must be at least 2, got {mu}"
        )));
    }
    let b = if a { 0 } else { (1u32 << mu) - 1 };
    Relation::from_predicate(mu, |p| p != b)
}

/// `O`, the `T`-family with `μ ≤ 4`, `M`, `S`, `L`, `Λ`, `V`, `C01`, `Ω1` and
/// the intersections used by the interval computations.
pub fn clone_catalog() -> Vec<CloneCatalogEntry> {
    let o = CloneCatalogEntry::new("O", "O", vec![], "all total functions");
    let t0 = CloneCatalogEntry::new("T0", "T0", vec![singleton("0")], "Pol {0}");
    let t1 = CloneCatalogEntry::new("T1", "T1", vec![singleton("1")], "Pol {1}");
    let m = CloneCatalogEntry::new(
        "M",
        "M",
        vec![Relation::from_tuples(&["00", "01", "11"]).expect("fixed relation")],
        "monotone functions",
    );
    let s = CloneCatalogEntry::new(
        "S",
        "S",
        vec![Relation::from_tuples(&["01", "10"]).expect("fixed relation")],
        "self-dual functions",
    );
    let t01 = t0.meet(&t1, "T0∩T1", "T0T1");
    let mut out = vec![o, t0.clone(), t1.clone(), t01.clone()];
    for (a, t) in [(false, &t0), (true, &t1)] {
        for mu in 2..=4 {
            let tag = if a { 1 } else { 0 };
            out.push(CloneCatalogEntry::new(
                &format!("T{tag},{mu}"),
                &format!("T{tag}_{mu}"),
                vec![t_a_mu_relation(a, mu).expect("μ in range")],
                &format!(
                    "Pol of 2^{mu} minus a constant tuple, contained in {}",
                    t.name
                ),
            ));
        }
    }
    let lambda = CloneCatalogEntry::new("Λ", "Lambda", vec![r_lambda_lambda()], "clone{∧, c0, c1}");
    let vee = CloneCatalogEntry::new("V", "V", vec![r_lambda_lambda().dual()], "clone{∨, c0, c1}");
    out.extend([
        m.clone(),
        s.clone(),
        CloneCatalogEntry::new("L", "L", vec![rho_l()], "linear functions"),
        lambda.meet(&t1, "Λ∩T1", "LambdaT1"),
        vee.meet(&t0, "V∩T0", "VT0"),
        lambda,
        vee,
        CloneCatalogEntry::new("C01", "C01", vec![rho_c()], "clone{c0, c1}"),
        CloneCatalogEntry::new(
            "Ω1",
            "Omega1",
            vec![rho_1()],
            "clone of all unary functions",
        ),
        m.meet(&t0, "M∩T0", "MT0"),
        m.meet(&t1, "M∩T1", "MT1"),
        m.meet(&t01, "M∩T0∩T1", "MT0T1"),
        s.meet(&t01, "S∩T0∩T1", "ST0T1"),
    ]);
    out
}

/// Looks up a catalog clone by display name or ASCII key.
pub fn catalog_entry(name: &str) -> Result<CloneCatalogEntry> {
    clone_catalog()
        .into_iter()
        .find(|e| e.name == name || e.key.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownName(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuples(r: &Relation) -> Vec<String> {
        r.tuples().map(|t| t.to_string()).collect()
    }

    #[test]
    fn rho_02_members() {
        let r = rho_02();
        assert!(r.contains_tuple(&"01".parse().unwrap()));
        assert!(!r.contains_tuple(&"11".parse().unwrap()));
        assert_eq!(r.arity(), 2);
    }

    #[test]
    fn cycle_and_clique_relations() {
        let c5 = Relation::from_matrix_rows(&[
            "00000100101",
            "00001001010",
            "00010010100",
            "00100001001",
            "01000010010",
        ])
        .unwrap();
        assert_eq!(r02_c(5).unwrap(), c5);
        assert_eq!(c5.len(), 11);
        let k5 = Relation::from_matrix_rows(&["000001", "000010", "000100", "001000", "010000"])
            .unwrap();
        assert_eq!(r02_k(5).unwrap(), k5);
        assert_eq!(tuples(&r02_c(3).unwrap()), vec!["000", "001", "010", "100"]);
        assert_eq!(r02(3).unwrap().len(), 16);
        assert_eq!(r02(3).unwrap().arity(), 6);
        assert_eq!(r02_c(2).unwrap(), rho_02());
        assert!(r02(13).is_err());
        assert!(r02_c(1).is_err());
    }

    #[test]
    fn cycle_relation_against_conjunction() {
        for n in 2..=8 {
            let rel = r02_c(n).unwrap();
            let expected = Relation::from_predicate(n, |p| {
                (0..n).all(|i| {
                    let a = coord(p, n, i);
                    let b = coord(p, n, (i + 1) % n);
                    rho_02().contains((a << 1) | b)
                })
            })
            .unwrap();
            assert_eq!(rel, expected);
        }
    }

    #[test]
    fn lambda_relations() {
        assert_eq!(tuples(&lambda_k(1).unwrap()), vec!["00", "10", "11"]);
        assert!(lambda_ij(3, 1, &[1, 2]).unwrap().is_full());
        assert!(lambda_gamma(4, &[]).unwrap().is_full());
        assert_eq!(lambda_ij(2, 1, &[2]).unwrap(), lambda_k(1).unwrap());
        assert!(lambda_ij(3, 4, &[1]).is_err());
    }

    #[test]
    fn gamma_4_is_table_1() {
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
        assert_eq!(gamma_m(4).unwrap(), rows);
        for m in 3..=6 {
            assert_eq!(gamma_m(m).unwrap().len(), 1 + m * (m - 1) * (m - 2) / 2);
        }
        let r = r_lambda(4).unwrap();
        assert!(!r.contains_tuple(&"10011".parse().unwrap()));
        assert!(!r.contains_tuple(&"10111".parse().unwrap()));
        assert!(gamma_m(2).is_err());
    }

    #[test]
    fn monster_properties() {
        for m in 3..=6 {
            let r = r_lambda(m).unwrap();
            let h = m + 1;
            let ones = (1u32 << h) - 1;
            assert!(r.contains(ones));
            for i in 0..h {
                assert!(!r.contains(ones ^ (1 << i)));
            }
            for x in 0..ones >> 1 {
                assert!(r.contains(x));
            }
            assert!(!r.contains(ones >> 1));
            for i in 0..h {
                for j in (i + 1)..h {
                    assert!(r.contains((1 << i) | (1 << j)));
                }
            }
        }
    }

    #[test]
    fn four_ary_relations() {
        let (c, one, l) = (rho_c(), rho_1(), rho_l());
        assert_eq!((c.len(), one.len(), l.len()), (4, 6, 8));
        assert!(c.is_subset(&one) && one.is_subset(&l));
        for r in [&c, &one, &l] {
            assert!(r.contains(0));
        }
        let parity = Relation::from_predicate(4, |p| p.count_ones() % 2 == 0).unwrap();
        assert_eq!(l, parity);
    }

    #[test]
    fn tau_and_xi() {
        assert_eq!(p_seq(1).unwrap(), 1);
        assert_eq!(p_seq(2).unwrap(), 4);
        assert_eq!(p_seq(3).unwrap(), 21);
        let x1 = xi(1).unwrap();
        assert_eq!(x1.arity(), 4);
        assert_eq!(x1.expand().unwrap().domain_size(), 6);
        assert_eq!(xi(2).unwrap().arity(), 21);
        assert!(xi(3).is_err());
        let t = tau(2, 1).unwrap();
        assert_eq!(
            t.by_weight(),
            &[Some(false), Some(false), None, None, Some(true)]
        );
    }

    #[test]
    fn basis_relations() {
        assert_eq!(
            tuples(&basis_relation("Ple").unwrap()),
            vec!["00", "01", "11"]
        );
        assert_eq!(
            tuples(&basis_relation("P01lambda").unwrap()),
            vec!["0101", "0110"]
        );
        assert_eq!(
            tuples(&basis_relation("Plambda").unwrap()),
            vec!["01", "10"]
        );
        assert!(basis_relation("Pfoo").is_err());
        for name in BASIS_NAMES {
            assert!(basis_relation(name).is_ok());
        }
    }

    #[test]
    fn catalog_entries() {
        let t02 = catalog_entry("T0_2").unwrap();
        assert_eq!(t02.defining_relations, vec![rho_02()]);
        assert_eq!(catalog_entry("T0,2").unwrap().key, "T0_2");
        let mt01 = catalog_entry("MT0T1").unwrap();
        assert_eq!(mt01.defining_relations.len(), 3);
        assert!(catalog_entry("O").unwrap().defining_relations.is_empty());
        assert!(clone_catalog()
            .iter()
            .skip(1)
            .all(|e| !e.defining_relations.is_empty()));
        assert!(catalog_entry("nope").is_err());
        let names: Vec<String> = clone_catalog().into_iter().map(|e| e.key).collect();
        let mut dedup = names.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(names.len(), dedup.len());
    }

    #[test]
    fn linear_functions_count() {
        assert_eq!(linear_functions(4).unwrap().len(), 32);
    }
}
