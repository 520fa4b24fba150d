//! The function algebra: composition, the five Maltsev operations, restriction
//! closure, constant pinning and bounded-arity clone closure.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fingerprint::CloneFingerprint;
use crate::function::PartialFunction;
use crate::tuple::{check_arity, MAX_ARITY};

/// `F = f(g_1, ..., g_n)`.
///
/// `x ∈ dom F` iff `x ∈ dom g_i` for every `i` and `(g_1(x), ..., g_n(x)) ∈ dom f`.
pub fn compose(f: &PartialFunction, gs: &[PartialFunction]) -> Result<PartialFunction> {
    let n = f.arity();
    if gs.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: gs.len(),
        });
    }
    let m = gs[0].arity();
    if let Some(g) = gs.iter().find(|g| g.arity() != m) {
        return Err(Error::ArityMismatch {
            expected: m,
            found: g.arity(),
        });
    }
    PartialFunction::from_fn(m, |x| {
        let mut y = 0u32;
        for g in gs {
            y = (y << 1) | g.value(x)? as u32;
        }
        f.value(y)
    })
}

/// Substitutes variables: `x ∈ dom g` iff `source(x) ∈ dom f`, and then `g(x) = f(source(x))`.
fn transport(
    f: &PartialFunction,
    arity: usize,
    source: impl Fn(u32) -> u32,
) -> Result<PartialFunction> {
    PartialFunction::from_fn(arity, |x| f.value(source(x)))
}

/// `(ζf)(x_1, ..., x_n) = f(x_2, ..., x_n, x_1)`.
pub fn zeta(f: &PartialFunction) -> PartialFunction {
    let n = f.arity();
    if n == 1 {
        return f.clone();
    }
    let mask = (1u32 << n) - 1;
    transport(f, n, |x| ((x << 1) | (x >> (n - 1))) & mask).expect("same arity")
}

/// `(τf)(x_1, x_2, ...) = f(x_2, x_1, ...)`.
pub fn tau(f: &PartialFunction) -> PartialFunction {
    let n = f.arity();
    if n == 1 {
        return f.clone();
    }
    let hi = 1u32 << (n - 1);
    let lo = 1u32 << (n - 2);
    transport(f, n, |x| {
        let a = (x & hi != 0) as u32;
        let b = (x & lo != 0) as u32;
        (x & !(hi | lo)) | (b * hi) | (a * lo)
    })
    .expect("same arity")
}

/// `(Δf)(x_1, ..., x_{n-1}) = f(x_1, x_1, x_2, ..., x_{n-1})`.
pub fn delta(f: &PartialFunction) -> PartialFunction {
    let n = f.arity();
    if n == 1 {
        return f.clone();
    }
    transport(f, n - 1, |x| ((x >> (n - 2)) << (n - 1)) | x).expect("smaller arity")
}

/// `(∇f)(x_1, ..., x_{n+1}) = f(x_2, ..., x_{n+1})`.
pub fn nabla(f: &PartialFunction) -> Result<PartialFunction> {
    let n = f.arity();
    check_arity(n + 1)?;
    let mask = (1u32 << n) - 1;
    transport(f, n + 1, |x| x & mask)
}

/// `(f ⋆ g)(x_1, ..., x_{n+m-1}) = f(g(x_1, ..., x_m), x_{m+1}, ..., x_{n+m-1})`.
pub fn star(f: &PartialFunction, g: &PartialFunction) -> Result<PartialFunction> {
    let n = f.arity();
    let m = g.arity();
    let arity = n + m - 1;
    check_arity(arity)?;
    let tail_bits = n - 1;
    let tail_mask = (1u32 << tail_bits) - 1;
    PartialFunction::from_fn(arity, |x| {
        let v = g.value(x >> tail_bits)? as u32;
        f.value((v << tail_bits) | (x & tail_mask))
    })
}

/// `f_a`: defined exactly on `(a, x)` for `x ∈ dom f`, with `f_a(a, x) = f(x)`.
pub fn pin_first(f: &PartialFunction, a: bool) -> Result<PartialFunction> {
    let n = f.arity();
    check_arity(n + 1)?;
    PartialFunction::from_fn(n + 1, |x| {
        if (x >> n) == a as u32 {
            f.value(x & ((1u32 << n) - 1))
        } else {
            None
        }
    })
}

/// All restrictions `g ≤ f`, including `f` and the empty-domain function.
pub fn restrictions(f: &PartialFunction, limit: usize) -> Result<Vec<PartialFunction>> {
    let points: Vec<u32> = f.domain_points().collect();
    let count = 1u128 << points.len().min(127);
    if points.len() >= 64 || count > limit as u128 {
        return Err(Error::BudgetExceeded {
            what: "restriction enumeration",
            needed: count,
            budget: limit as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for mask in 0..(1u64 << points.len()) {
        out.push(f.restrict(|p| {
            points
                .iter()
                .position(|&q| q == p)
                .is_some_and(|k| (mask >> k) & 1 == 1)
        }));
    }
    Ok(out)
}

/// `Str{X}`: every restriction of every member, deduplicated and sorted.
pub fn str_closure(fs: &[PartialFunction], limit: usize) -> Result<Vec<PartialFunction>> {
    let mut out = BTreeSet::new();
    for f in fs {
        for g in restrictions(f, limit)? {
            out.insert(g);
            if out.len() > limit {
                return Err(Error::BudgetExceeded {
                    what: "restriction closure",
                    needed: out.len() as u128,
                    budget: limit as u128,
                });
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// A named generating set for `clone_closure_bounded`.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratorSet {
    pub name: String,
    pub members: Vec<PartialFunction>,
}

impl GeneratorSet {
    pub fn new(name: impl Into<String>, members: Vec<PartialFunction>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameter("generator set is empty".into()));
        }
        if let Some(f) = members.iter().find(|f| f.arity() > MAX_ARITY) {
            return Err(Error::ArityOutOfRange(f.arity()));
        }
        Ok(GeneratorSet {
            name: name.into(),
            members,
        })
    }
}

/// Least class containing the generators and all projections of arity `≤ k`,
/// closed under ζ, τ, Δ, ∇ and ⋆ wherever the result has arity `≤ k`.
///
/// Results wider than `k` are discarded, so this is the closure of the
/// truncated system, which can be smaller than the arity-`k` slice of the
/// generated clone.
pub fn clone_closure_bounded(gen: &GeneratorSet, k: usize) -> Result<CloneFingerprint> {
    let mut fp = CloneFingerprint::empty(k)?;
    let mut members: Vec<Vec<PartialFunction>> = vec![Vec::new(); k + 1];

    let mut seed: Vec<PartialFunction> = gen
        .members
        .iter()
        .filter(|f| f.arity() <= k)
        .cloned()
        .collect();
    for n in 1..=k {
        for i in 0..n {
            seed.push(PartialFunction::projection(n, i)?);
        }
    }
    let mut frontier = absorb(&mut fp, &mut members, seed);

    while !frontier.is_empty() {
        let mut produced = Vec::new();
        for f in &frontier {
            produced.push(zeta(f));
            produced.push(tau(f));
            produced.push(delta(f));
            if f.arity() < k {
                produced.push(nabla(f)?);
            }
            for (m, pool) in members.iter().enumerate().skip(1) {
                if f.arity() + m - 1 > k {
                    continue;
                }
                for g in pool {
                    produced.push(star(f, g)?);
                    produced.push(star(g, f)?);
                }
            }
        }
        frontier = absorb(&mut fp, &mut members, produced);
    }
    Ok(fp)
}

/// Adds new functions in a canonical order and returns the ones that were new.
fn absorb(
    fp: &mut CloneFingerprint,
    members: &mut [Vec<PartialFunction>],
    mut candidates: Vec<PartialFunction>,
) -> Vec<PartialFunction> {
    candidates.sort_by_key(|f| (f.arity(), f.code()));
    candidates.dedup();
    let mut fresh = Vec::new();
    for f in candidates {
        if fp.insert(&f) {
            members[f.arity()].push(f.clone());
            fresh.push(f);
        }
    }
    fresh
}

/// Composition rebuilt from ⋆, ζ, τ and Δ only.
///
/// This is the second route to `compose`; the two are cross-checked in tests.
pub fn compose_via_maltsev(f: &PartialFunction, gs: &[PartialFunction]) -> Result<PartialFunction> {
    let n = f.arity();
    if gs.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: gs.len(),
        });
    }
    let m = gs[0].arity();
    if gs.iter().any(|g| g.arity() != m) {
        return Err(Error::ArityMismatch {
            expected: m,
            found: gs.iter().find(|g| g.arity() != m).map_or(0, |g| g.arity()),
        });
    }
    check_arity(n * m)?;

    // `names[s]` is the variable feeding slot `s`: `Pending(i)` for the still
    // unsubstituted i-th argument of f, `Final(j)` for the variable x_j.
    #[derive(Clone, Copy, PartialEq, Eq)]
    enum Var {
        Pending(usize),
        Final(usize),
    }

    let mut h = f.clone();
    let mut names: Vec<Var> = (0..n).map(Var::Pending).collect();
    for (i, g) in gs.iter().enumerate() {
        let pos = names
            .iter()
            .position(|&v| v == Var::Pending(i))
            .expect("pending slot");
        let (h2, names2) = move_to_front(&h, &names, pos);
        h = star(&h2, g)?;
        names = (0..m)
            .map(Var::Final)
            .chain(names2.into_iter().skip(1))
            .collect();
    }

    // Identify equal variables pairwise with Δ.
    loop {
        let dup = (0..names.len()).find(|&a| names[a + 1..].contains(&names[a]));
        let Some(a) = dup else { break };
        let (h2, names2) = move_to_front(&h, &names, a);
        let b = names2[1..]
            .iter()
            .position(|&v| v == names2[0])
            .expect("duplicate")
            + 1;
        let (h3, names3) = move_to_position(&h2, &names2, b, 1);
        h = delta(&h3);
        names = names3.into_iter().skip(1).collect();
    }

    // Sort slots into x_1, ..., x_m.
    for target in 0..m {
        let pos = names
            .iter()
            .position(|&v| v == Var::Final(target))
            .expect("variable present");
        let (h2, names2) = move_to_position(&h, &names, pos, target);
        h = h2;
        names = names2;
    }
    Ok(h)
}

/// ζ rotates slot names right by one: slot 0 takes the name of the last slot.
fn rotate_right<T: Copy>(
    f: &PartialFunction,
    names: &[T],
    times: usize,
) -> (PartialFunction, Vec<T>) {
    let mut h = f.clone();
    let mut names = names.to_vec();
    for _ in 0..times % names.len().max(1) {
        h = zeta(&h);
        names.rotate_right(1);
    }
    (h, names)
}

fn move_to_front<T: Copy>(
    f: &PartialFunction,
    names: &[T],
    pos: usize,
) -> (PartialFunction, Vec<T>) {
    let len = names.len();
    rotate_right(f, names, (len - pos) % len)
}

/// Moves slot `from` to index `to` using adjacent transpositions.
fn move_to_position<T: Copy>(
    f: &PartialFunction,
    names: &[T],
    from: usize,
    to: usize,
) -> (PartialFunction, Vec<T>) {
    let mut h = f.clone();
    let mut names = names.to_vec();
    let mut at = from;
    while at != to {
        let left = if at > to { at - 1 } else { at };
        (h, names) = swap_adjacent(&h, &names, left);
        at = if at > to { at - 1 } else { at + 1 };
    }
    (h, names)
}

/// Swaps slots `p` and `p + 1` by rotating them to the front and applying τ.
fn swap_adjacent<T: Copy>(f: &PartialFunction, names: &[T], p: usize) -> (PartialFunction, Vec<T>) {
    let len = names.len();
    let (h, mut names) = move_to_front(f, names, p);
    let h = tau(&h);
    names.swap(0, 1);
    rotate_right(&h, &names, p % len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_function(rng: &mut impl Rng, arity: usize) -> PartialFunction {
        let code = rng.gen_range(0..crate::function::code_space(arity));
        PartialFunction::from_code(arity, code).unwrap()
    }

    fn and() -> PartialFunction {
        PartialFunction::total(2, |p| p == 3).unwrap()
    }

    fn id() -> PartialFunction {
        PartialFunction::projection(1, 0).unwrap()
    }

    fn only_one() -> PartialFunction {
        PartialFunction::from_fn(1, |p| (p == 1).then_some(true)).unwrap()
    }

    #[test]
    fn projection_composition_intersects_domains() {
        let g = PartialFunction::from_fn(2, |p| (p != 0).then_some(p == 3)).unwrap();
        let h = PartialFunction::from_fn(2, |p| (p != 3).then_some(false)).unwrap();
        let e1 = PartialFunction::projection(2, 0).unwrap();
        let out = compose(&e1, &[g.clone(), h]).unwrap();
        assert_eq!(out, g.restrict(|p| p != 0 && p != 3));
    }

    #[test]
    fn and_of_identity_is_identity() {
        assert_eq!(compose(&and(), &[id(), id()]).unwrap(), id());
    }

    #[test]
    fn domain_rule_on_partial_outer_function() {
        let out = compose(&only_one(), &[id()]).unwrap();
        assert_eq!(out.domain_points().collect::<Vec<_>>(), vec![1]);
        assert!(compose(&and(), &[id()]).is_err());
    }

    #[test]
    fn maltsev_operations_on_small_cases() {
        let f = only_one();
        assert_eq!(zeta(&f), f);
        assert_eq!(tau(&f), f);
        assert_eq!(delta(&f), f);
        assert_eq!(delta(&and()), id());
        assert_eq!(
            nabla(&id()).unwrap(),
            PartialFunction::projection(2, 1).unwrap()
        );
        // ζ on x_1 ∧ ¬x_2 gives x_2 ∧ ¬x_1.
        let f = PartialFunction::total(2, |p| p == 0b10).unwrap();
        assert_eq!(zeta(&f), PartialFunction::total(2, |p| p == 0b01).unwrap());
        assert_eq!(tau(&f), zeta(&f));
        let e13 = PartialFunction::projection(3, 0).unwrap();
        assert_eq!(zeta(&e13), PartialFunction::projection(3, 1).unwrap());
    }

    #[test]
    fn star_examples() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let g = random_function(&mut rng, 2);
            assert_eq!(star(&id(), &g).unwrap(), g);
        }
        let out = star(&only_one(), &id()).unwrap();
        assert_eq!(out.domain_points().collect::<Vec<_>>(), vec![1]);
        // Δ(f_0 ⋆ c_0) recovers a unary f.
        let c0 = PartialFunction::constant(1, false).unwrap();
        for code in 0..9 {
            let f = PartialFunction::from_code(1, code).unwrap();
            let back = delta(&star(&pin_first(&f, false).unwrap(), &c0).unwrap());
            assert_eq!(back, f);
        }
        let wide = PartialFunction::empty(20).unwrap();
        assert!(star(&wide, &wide).is_err());
    }

    #[test]
    fn pin_first_examples() {
        let f0 = pin_first(&id(), false).unwrap();
        assert_eq!(f0.table().len(), 2);
        assert_eq!(f0.value(0b00), Some(false));
        assert_eq!(f0.value(0b01), Some(true));
        assert_eq!(f0.value(0b10), None);
        assert_eq!(
            pin_first(&PartialFunction::empty(2).unwrap(), true).unwrap(),
            PartialFunction::empty(3).unwrap()
        );
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let arity = rng.gen_range(1..=3);
            let f = random_function(&mut rng, arity);
            let a = rng.gen_bool(0.5);
            assert!(pin_first(&f, a)
                .unwrap()
                .is_restriction_of(&nabla(&f).unwrap())
                .unwrap());
        }
    }

    #[test]
    fn str_closure_examples() {
        let empty = PartialFunction::empty(1).unwrap();
        assert_eq!(
            str_closure(std::slice::from_ref(&empty), 100).unwrap(),
            vec![empty]
        );
        assert_eq!(str_closure(&[id()], 100).unwrap().len(), 4);

        let closed = str_closure(&[and()], 100).unwrap();
        let brute: Vec<PartialFunction> = (0..81)
            .map(|c| PartialFunction::from_code(2, c).unwrap())
            .filter(|g| g.is_restriction_of(&and()).unwrap())
            .collect();
        assert_eq!(closed.len(), brute.len());
        assert_eq!(closed.len(), 16);
        assert_eq!(str_closure(&closed, 100).unwrap(), closed);
        assert!(str_closure(&[PartialFunction::total(4, |_| true).unwrap()], 100).is_err());
    }

    #[test]
    fn str_closure_is_idempotent_on_random_sets() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..30 {
            let xs: Vec<PartialFunction> = (0..3).map(|_| random_function(&mut rng, 2)).collect();
            let once = str_closure(&xs, 1000).unwrap();
            assert_eq!(str_closure(&once, 1000).unwrap(), once);
        }
    }

    #[test]
    fn domain_rule_soundness_and_maltsev_agreement() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.gen_range(1..=3);
            let m = rng.gen_range(1..=3);
            let f = random_function(&mut rng, n);
            let gs: Vec<PartialFunction> = (0..n).map(|_| random_function(&mut rng, m)).collect();
            let composed = compose(&f, &gs).unwrap();
            for x in 0..(1u32 << m) {
                let inner: Option<Vec<bool>> = gs.iter().map(|g| g.value(x)).collect();
                let expected = inner.and_then(|vals| {
                    let y = vals.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                    f.value(y)
                });
                assert_eq!(composed.value(x), expected);
            }
            assert_eq!(compose_via_maltsev(&f, &gs).unwrap(), composed);
        }
    }

    #[test]
    fn delta_undoes_nabla() {
        for code in (0..6561u64).step_by(10) {
            let f = PartialFunction::from_code(3, code).unwrap();
            assert_eq!(delta(&nabla(&f).unwrap()), f);
        }
        for code in 0..81u64 {
            let f = PartialFunction::from_code(2, code).unwrap();
            assert_eq!(delta(&nabla(&f).unwrap()), f);
        }
    }

    fn total_members(fp: &CloneFingerprint) -> BTreeSet<(usize, u64)> {
        let t = fp.total_side();
        (1..=fp.max_arity())
            .flat_map(|n| t.codes(n).map(move |c| (n, c)).collect::<Vec<_>>())
            .collect()
    }

    #[test]
    fn closure_of_and_or() {
        let or = PartialFunction::total(2, |p| p != 0).unwrap();
        let gen = GeneratorSet::new("and-or", vec![and(), or]).unwrap();
        let fp = clone_closure_bounded(&gen, 2).unwrap();
        // Oracle: monotone, 0- and 1-preserving total functions of arity ≤ 2.
        let mut expected = BTreeSet::new();
        for n in 1..=2usize {
            for table in 0u32..(1 << (1 << n)) {
                let f = |p: u32| (table >> p) & 1;
                let top = (1u32 << n) - 1;
                let monotone =
                    (0..(1u32 << n)).all(|a| (0..(1u32 << n)).all(|b| a & b != a || f(a) <= f(b)));
                if monotone && f(0) == 0 && f(top) == 1 {
                    let g = PartialFunction::total(n, |p| f(p) == 1).unwrap();
                    expected.insert((n, g.code().unwrap()));
                }
            }
        }
        assert_eq!(expected.len(), 5);
        assert_eq!(total_members(&fp), expected);
    }

    #[test]
    fn closure_of_projections_and_negation() {
        let gen = GeneratorSet::new("proj", vec![id()]).unwrap();
        let fp = clone_closure_bounded(&gen, 3).unwrap();
        assert_eq!(fp.count(1), 1);
        assert_eq!(fp.count(2), 2);
        assert_eq!(fp.count(3), 3);

        let not = PartialFunction::total(1, |p| p == 0).unwrap();
        let gen = GeneratorSet::new("not", vec![not.clone()]).unwrap();
        let fp = clone_closure_bounded(&gen, 1).unwrap();
        let expected: BTreeSet<(usize, u64)> =
            [(1, id().code().unwrap()), (1, not.code().unwrap())]
                .into_iter()
                .collect();
        assert_eq!(total_members(&fp), expected);
        assert!(GeneratorSet::new("none", vec![]).is_err());
    }
}
