//! The orbit algebra at desk scale.
//!
//! Degree-`n` elements are rational-valued functions on the isomorphism
//! types of `n`-point age members; the product of `f` and `g` evaluates on
//! a type `A` by summing `f(X1) * g(X2)` over all ordered splits of `A`'s
//! point set. The unit is the indicator of the empty type in degree 0.
//!
//! Two checks probe polynomiality: the Hilbert identity (the profile
//! equals the Euler transform of the indecomposable census) and the rank
//! check (generator monomials of a fixed total degree are as numerous as
//! the types of that degree and evaluate to a matrix of full rational
//! rank).

use crate::enumerate::{AgeEnumerator, Census, EnumError, Profile};
use crate::metric::{CanonicalCode, Dist, MetricSpace};
use crate::series::RationalSeries;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashMap};

/// Euler transform: the coefficients of `prod_d (1 - x^d)^(-c_d)` up to
/// degree `n_max` — the Hilbert series of a free graded commutative
/// algebra with `c_d` generators in each degree `d`.
pub fn euler_transform(census: &Census, n_max: usize) -> Profile {
    let mut series = RationalSeries::one(n_max);
    for d in 1..=n_max.min(census.max_size()) {
        let c = census.by_size(d);
        if c > 0 {
            series = series.mul(&RationalSeries::inv_one_minus_pow(d, c, n_max));
        }
    }
    Profile::new(
        series
            .coeffs()
            .iter()
            .map(|q| {
                assert!(q.is_integer() && !q.is_negative(), "Euler coefficient {q}");
                q.to_integer().to_u64().expect("Euler coefficient fits u64")
            })
            .collect(),
    )
}

/// A graded element: a map from size-`degree` type codes to rationals.
/// Missing keys mean zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitFunction {
    degree: usize,
    values: BTreeMap<CanonicalCode, BigRational>,
}

impl OrbitFunction {
    pub fn zero(degree: usize) -> Self {
        OrbitFunction {
            degree,
            values: BTreeMap::new(),
        }
    }

    /// The two-sided identity: the indicator of the empty type.
    pub fn unit() -> Self {
        Self::indicator(&MetricSpace::empty().canonical_code())
    }

    /// The indicator of one isomorphism type.
    pub fn indicator(code: &CanonicalCode) -> Self {
        let mut values = BTreeMap::new();
        values.insert(code.clone(), BigRational::one());
        OrbitFunction {
            degree: code.size(),
            values,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Stored (nonzero) values.
    pub fn values(&self) -> &BTreeMap<CanonicalCode, BigRational> {
        &self.values
    }

    pub fn value(&self, code: &CanonicalCode) -> BigRational {
        self.values
            .get(code)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn insert_nonzero(&mut self, code: CanonicalCode, v: BigRational) {
        if !v.is_zero() {
            self.values.insert(code, v);
        }
    }
}

/// Largest degree at which orbit products are attempted; the per-type
/// split tables grow as `2^degree`.
pub const MAX_PRODUCT_DEGREE: usize = 16;

/// Product context over one age: carries the enumerator plus caches for
/// induced-subspace codes and monomial evaluations, the cost centers of
/// structure-constant computations.
pub struct OrbitAlgebra<'a> {
    age: &'a mut AgeEnumerator,
    split_codes: HashMap<CanonicalCode, Vec<CanonicalCode>>,
    monomial_cache: HashMap<Vec<CanonicalCode>, OrbitFunction>,
}

impl<'a> OrbitAlgebra<'a> {
    pub fn new(age: &'a mut AgeEnumerator) -> Self {
        OrbitAlgebra {
            age,
            split_codes: HashMap::new(),
            monomial_cache: HashMap::new(),
        }
    }

    pub fn age(&mut self) -> &mut AgeEnumerator {
        self.age
    }

    /// Codes of all `2^n` induced subspaces of a representative, indexed
    /// by point mask.
    fn splits(&mut self, code: &CanonicalCode, rep: &MetricSpace) -> &[CanonicalCode] {
        self.split_codes.entry(code.clone()).or_insert_with(|| {
            let n = rep.n();
            (0u32..(1 << n))
                .map(|mask| {
                    let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                    rep.induced(&subset).canonical_code()
                })
                .collect()
        })
    }

    /// The reduced-incidence product: for each type `A` of size
    /// `deg f + deg g`, sums `f(A|X) * g(A|X^c)` over all subsets `X` of
    /// `f`'s degree. Subsets and their complements give the ordered splits.
    pub fn product(
        &mut self,
        f: &OrbitFunction,
        g: &OrbitFunction,
    ) -> Result<OrbitFunction, EnumError> {
        let degree = f.degree() + g.degree();
        // Split tables hold 2^degree entries per target type.
        if degree > MAX_PRODUCT_DEGREE {
            return Err(EnumError::ProductDegree {
                degree,
                bound: MAX_PRODUCT_DEGREE,
            });
        }
        self.age.ensure(degree)?;
        let level = self.age.level_ref(degree);
        let targets: Vec<(CanonicalCode, MetricSpace)> = level
            .codes()
            .iter()
            .cloned()
            .zip(level.reps().iter().cloned())
            .collect();

        let mut out = OrbitFunction::zero(degree);
        let full: u32 = (1 << degree) - 1;
        for (code, rep) in &targets {
            let splits = self.splits(code, rep);
            let mut acc = BigRational::zero();
            for mask in 0u32..=full {
                if mask.count_ones() as usize != f.degree() {
                    continue;
                }
                let left = &splits[mask as usize];
                let Some(fv) = f.values.get(left) else {
                    continue;
                };
                let right = &splits[(full & !mask) as usize];
                if let Some(gv) = g.values.get(right) {
                    acc += fv * gv;
                }
            }
            out.insert_nonzero(code.clone(), acc);
        }
        Ok(out)
    }

    /// Evaluates a monomial in type indicators by repeated binary
    /// products, memoized on the sorted factor multiset.
    pub fn eval_monomial(&mut self, factors: &[CanonicalCode]) -> Result<OrbitFunction, EnumError> {
        let mut key: Vec<CanonicalCode> = factors.to_vec();
        key.sort();
        self.eval_sorted(&key)
    }

    fn eval_sorted(&mut self, key: &[CanonicalCode]) -> Result<OrbitFunction, EnumError> {
        if key.is_empty() {
            return Ok(OrbitFunction::unit());
        }
        if key.len() == 1 {
            return Ok(OrbitFunction::indicator(&key[0]));
        }
        if let Some(hit) = self.monomial_cache.get(key) {
            return Ok(hit.clone());
        }
        let (last, rest) = key.split_last().expect("nonempty");
        let left = self.eval_sorted(rest)?;
        let result = self.product(&left, &OrbitFunction::indicator(last))?;
        self.monomial_cache.insert(key.to_vec(), result.clone());
        Ok(result)
    }
}

/// Result of the Hilbert-identity check at one `M`.
#[derive(Debug, Clone)]
pub struct HilbertReport {
    pub m: Dist,
    pub n_max: usize,
    pub profile: Profile,
    pub census: Census,
    pub euler: Profile,
    pub first_mismatch: Option<usize>,
}

impl HilbertReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": "hilbert",
            "status": if self.passed() { "pass" } else { "fail" },
            "degree": self.n_max,
            "m": self.m,
            "profile": self.profile.counts(),
            "census": self.census.counts(),
            "euler": self.euler.counts(),
            "witness": self.first_mismatch.map(|d| json!({
                "degree": d,
                "profile": self.profile.count(d),
                "euler": self.euler.count(d),
            })),
        })
    }
}

/// Compares the profile against the Euler transform of the
/// `+_M`-indecomposable census, coefficient by coefficient.
pub fn verify_hilbert(
    age: &mut AgeEnumerator,
    m: Dist,
    n_max: usize,
) -> Result<HilbertReport, EnumError> {
    let profile = age.profile(n_max)?;
    let census = age.census(m, n_max)?;
    let euler = euler_transform(&census, n_max);
    let first_mismatch = (0..=n_max).find(|&d| profile.count(d) != euler.count(d));
    Ok(HilbertReport {
        m,
        n_max,
        profile,
        census,
        euler,
        first_mismatch,
    })
}

/// Result of the generator-monomial rank check at one degree.
#[derive(Debug, Clone)]
pub struct RankReport {
    pub m: Dist,
    pub degree: usize,
    pub monomial_count: usize,
    pub type_count: usize,
    pub rank: usize,
}

impl RankReport {
    pub fn passed(&self) -> bool {
        self.monomial_count == self.type_count && self.rank == self.type_count
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": "rank",
            "status": if self.passed() { "pass" } else { "fail" },
            "degree": self.degree,
            "m": self.m,
            "witness": if self.passed() { Value::Null } else { json!({
                "monomials": self.monomial_count,
                "types": self.type_count,
                "rank": self.rank,
            })},
        })
    }
}

/// All multisets of generator indices with total size `degree`, generators
/// taken in sorted code order; emitted in lexicographic index order.
fn generator_monomials(sizes: &[usize], degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        sizes: &[usize],
        start: usize,
        remaining: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for i in start..sizes.len() {
            if sizes[i] <= remaining {
                current.push(i);
                rec(sizes, i, remaining - sizes[i], current, out);
                current.pop();
            }
        }
    }
    rec(sizes, 0, degree, &mut current, &mut out);
    out
}

/// Builds every monomial in indicators of indecomposable types with total
/// degree `degree`, evaluates each on every type of that degree, and
/// checks that monomials are exactly as numerous as types and that the
/// evaluation matrix has full rank over the rationals.
pub fn verify_polynomial_rank(
    age: &mut AgeEnumerator,
    m: Dist,
    degree: usize,
) -> Result<RankReport, EnumError> {
    age.ensure(degree)?;
    let mut generators: Vec<CanonicalCode> = Vec::new();
    for d in 1..=degree {
        for sp in age.indecomposables(m, d)? {
            generators.push(sp.canonical_code());
        }
    }
    generators.sort();
    let sizes: Vec<usize> = generators.iter().map(|c| c.size()).collect();
    let monomials = generator_monomials(&sizes, degree);

    let types: Vec<CanonicalCode> = age.level_ref(degree).codes().to_vec();
    let mut algebra = OrbitAlgebra::new(age);
    let mut matrix: Vec<Vec<BigInt>> = Vec::with_capacity(monomials.len());
    for mono in &monomials {
        let factors: Vec<CanonicalCode> = mono.iter().map(|&i| generators[i].clone()).collect();
        let value = algebra.eval_monomial(&factors)?;
        matrix.push(
            types
                .iter()
                .map(|t| {
                    let q = value.value(t);
                    debug_assert!(q.is_integer());
                    q.to_integer()
                })
                .collect(),
        );
    }
    let rank = bareiss_rank(matrix);
    Ok(RankReport {
        m,
        degree,
        monomial_count: monomials.len(),
        type_count: types.len(),
        rank,
    })
}

/// Rank by fraction-free (Bareiss) Gaussian elimination: exact over the
/// integers, divisions always come out even.
pub(crate) fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0usize;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot_row);
        let (pivot_rows, rest) = m.split_at_mut(rank + 1);
        let pivot = &pivot_rows[rank];
        for row in rest.iter_mut() {
            for c in (col + 1)..cols {
                let num = &pivot[col] * &row[c] - &row[col] * &pivot[c];
                row[c] = num / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::Budget;
    use crate::params::ParameterSequence;
    use crate::sumop::{leq, sum_all};

    fn running_example() -> ParameterSequence {
        ParameterSequence::numeric(3, 1, 3, 10, 11).unwrap()
    }

    fn age() -> AgeEnumerator {
        AgeEnumerator::new(running_example(), Budget::default())
    }

    /// Test-only oracle: number of generator multisets of total size `n`
    /// by direct enumeration of multiplicity vectors.
    fn multiset_count(gen_sizes: &[usize], n: usize) -> u64 {
        fn rec(sizes: &[usize], idx: usize, remaining: usize) -> u64 {
            if remaining == 0 {
                return 1;
            }
            if idx == sizes.len() {
                return 0;
            }
            let mut total = 0;
            let mut used = 0;
            while used <= remaining {
                total += rec(sizes, idx + 1, remaining - used);
                used += sizes[idx];
            }
            total
        }
        rec(gen_sizes, 0, n)
    }

    #[test]
    fn euler_transform_examples() {
        // One size-1 generator: constant profile.
        let p = euler_transform(&Census::new(vec![1, 0, 0]), 3);
        assert_eq!(p.counts(), &[1, 1, 1, 1]);

        // c = (1, 2): cross-checked against brute-force multiset counting.
        let c = Census::new(vec![1, 2, 0]);
        let p = euler_transform(&c, 3);
        assert_eq!(p.counts(), &[1, 1, 3, 3]);
        let sizes = [1, 2, 2];
        for n in 0..=3 {
            assert_eq!(p.count(n), multiset_count(&sizes, n));
        }

        // One size-2 generator: its powers.
        let p = euler_transform(&Census::new(vec![0, 1, 0, 0]), 4);
        assert_eq!(p.counts(), &[1, 0, 1, 0, 1]);
    }

    #[test]
    fn euler_transform_monotone_and_unital() {
        let small = euler_transform(&Census::new(vec![1, 1, 1]), 3);
        let large = euler_transform(&Census::new(vec![1, 2, 1]), 3);
        assert_eq!(small.count(0), 1);
        for n in 0..=3 {
            assert!(small.count(n) <= large.count(n));
        }
    }

    #[test]
    fn point_squared_counts_ordered_splits() {
        let mut age = age();
        let pt = OrbitFunction::indicator(&MetricSpace::point().canonical_code());
        let mut alg = OrbitAlgebra::new(&mut age);
        let sq = alg.product(&pt, &pt).unwrap();
        assert_eq!(sq.degree(), 2);
        let two = BigRational::from_integer(BigInt::from(2));
        assert_eq!(sq.values().len(), 3);
        for v in sq.values().values() {
            assert_eq!(v, &two);
        }

        let cube = alg.product(&sq, &pt).unwrap();
        let six = BigRational::from_integer(BigInt::from(6));
        assert_eq!(cube.values().len(), 9);
        for v in cube.values().values() {
            assert_eq!(v, &six);
        }
    }

    #[test]
    fn pair_times_point_on_isoceles_triangle() {
        let mut age = age();
        let mut alg = OrbitAlgebra::new(&mut age);
        let e1 = OrbitFunction::indicator(&MetricSpace::pair(1).canonical_code());
        let pt = OrbitFunction::indicator(&MetricSpace::point().canonical_code());
        let prod = alg.product(&e1, &pt).unwrap();
        let t112 = MetricSpace::new(3, vec![1, 1, 2]).unwrap().canonical_code();
        assert_eq!(
            prod.value(&t112),
            BigRational::from_integer(BigInt::from(2))
        );
    }

    #[test]
    fn unit_is_identity() {
        let mut age = age();
        let mut alg = OrbitAlgebra::new(&mut age);
        let e3 = OrbitFunction::indicator(&MetricSpace::pair(3).canonical_code());
        let unit = OrbitFunction::unit();
        assert_eq!(alg.product(&unit, &e3).unwrap(), e3);
        assert_eq!(alg.product(&e3, &unit).unwrap(), e3);
    }

    #[test]
    fn product_commutes_small() {
        let mut age = age();
        age.ensure(3).unwrap();
        let pairs: Vec<CanonicalCode> = age.level_ref(2).codes().to_vec();
        let pt = age.level_ref(1).codes()[0].clone();
        let mut alg = OrbitAlgebra::new(&mut age);
        for code in &pairs {
            let f = OrbitFunction::indicator(code);
            let g = OrbitFunction::indicator(&pt);
            assert_eq!(alg.product(&f, &g).unwrap(), alg.product(&g, &f).unwrap());
        }
    }

    #[test]
    fn hilbert_identity_small() {
        let mut age = age();
        for m in [2, 3] {
            let report = verify_hilbert(&mut age, m, 3).unwrap();
            assert!(report.passed(), "M = {m}: {:?}", report.first_mismatch);
            assert_eq!(report.profile.counts(), &[1, 1, 3, 9]);
        }
        let trivial = verify_hilbert(&mut age, 2, 1).unwrap();
        assert!(trivial.passed());
    }

    #[test]
    fn rank_matrix_degree_two() {
        // Monomials {pt^2, e_1, e_3} against types {d=1, d=2, d=3} at M = 2.
        let mut age = age();
        age.ensure(2).unwrap();
        let types: Vec<CanonicalCode> = age.level_ref(2).codes().to_vec();
        let gens = [
            MetricSpace::point().canonical_code(),
            MetricSpace::pair(1).canonical_code(),
            MetricSpace::pair(3).canonical_code(),
        ];
        let mut alg = OrbitAlgebra::new(&mut age);
        let monos: Vec<Vec<CanonicalCode>> = vec![
            vec![gens[0].clone(), gens[0].clone()],
            vec![gens[1].clone()],
            vec![gens[2].clone()],
        ];
        let matrix: Vec<Vec<i64>> = monos
            .iter()
            .map(|mono| {
                let f = alg.eval_monomial(mono).unwrap();
                types
                    .iter()
                    .map(|t| f.value(t).to_integer().to_i64().unwrap())
                    .collect()
            })
            .collect();
        assert_eq!(matrix, vec![vec![2, 2, 2], vec![1, 0, 0], vec![0, 0, 1]]);

        let report = verify_polynomial_rank(&mut age, 2, 2).unwrap();
        assert!(report.passed());
        assert_eq!(report.monomial_count, 3);
        assert_eq!(report.type_count, 3);
        assert_eq!(report.rank, 3);
    }

    #[test]
    fn product_degree_is_capped() {
        // Degenerate ages can stay tiny at every size, so the cap must
        // trigger before any split table of 2^degree entries is built.
        let mut age = age();
        let f = OrbitFunction::indicator(&MetricSpace::clique(9, 2).canonical_code());
        let g = OrbitFunction::indicator(&MetricSpace::clique(8, 2).canonical_code());
        let mut alg = OrbitAlgebra::new(&mut age);
        assert_eq!(
            alg.product(&f, &g).unwrap_err(),
            EnumError::ProductDegree {
                degree: 17,
                bound: MAX_PRODUCT_DEGREE
            }
        );
    }

    #[test]
    fn rank_degree_one_trivial() {
        let mut age = age();
        let report = verify_polynomial_rank(&mut age, 2, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.monomial_count, 1);
    }

    #[test]
    fn bareiss_rank_matches_rational_elimination() {
        // Deterministic pseudo-random matrices, cross-checked against a
        // plain rational Gaussian elimination.
        fn rational_rank(m: &[Vec<BigInt>]) -> usize {
            let rows = m.len();
            if rows == 0 {
                return 0;
            }
            let cols = m[0].len();
            let mut a: Vec<Vec<BigRational>> = m
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| BigRational::from_integer(x.clone()))
                        .collect()
                })
                .collect();
            let mut rank = 0;
            for col in 0..cols {
                let Some(pr) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
                    continue;
                };
                a.swap(rank, pr);
                let pivot = a[rank][col].clone();
                for r in (rank + 1)..rows {
                    let factor = &a[r][col] / &pivot;
                    for c in col..cols {
                        let sub = &factor * &a[rank][c];
                        a[r][c] -= sub;
                    }
                }
                rank += 1;
                if rank == rows {
                    break;
                }
            }
            rank
        }

        let mut state = 0x243f6a8885a308d3u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) as i64 % 7) - 3
        };
        for rows in 1..=5usize {
            for cols in 1..=5usize {
                for _ in 0..8 {
                    let m: Vec<Vec<BigInt>> = (0..rows)
                        .map(|_| (0..cols).map(|_| BigInt::from(next())).collect())
                        .collect();
                    assert_eq!(bareiss_rank(m.clone()), rational_rank(&m));
                }
            }
        }
    }

    #[test]
    fn unitriangularity_of_generator_monomials() {
        // The product of indicators of indecomposables is positive on the
        // type of their sum and vanishes on types not above the sum.
        let mut age = age();
        for m in [2u32, 3] {
            age.ensure(4).unwrap();
            let mut gens: Vec<MetricSpace> = Vec::new();
            for d in 1..=3 {
                gens.extend(age.indecomposables(m, d).unwrap());
            }
            let combos: Vec<Vec<&MetricSpace>> = {
                let mut out = Vec::new();
                for (i, a) in gens.iter().enumerate() {
                    for (j, b) in gens.iter().enumerate().skip(i) {
                        if a.n() + b.n() <= 4 {
                            out.push(vec![a, b]);
                        }
                        for c in gens.iter().skip(j) {
                            if a.n() + b.n() + c.n() <= 4 {
                                out.push(vec![a, b, c]);
                            }
                        }
                    }
                }
                out
            };
            for combo in combos {
                let total: usize = combo.iter().map(|s| s.n()).sum();
                let sum = sum_all(combo.iter().copied(), m).unwrap();
                let sum_code = sum.canonical_code();
                let factors: Vec<CanonicalCode> =
                    combo.iter().map(|s| s.canonical_code()).collect();
                let mut alg = OrbitAlgebra::new(&mut age);
                let value = alg.eval_monomial(&factors).unwrap();
                assert!(value.value(&sum_code).is_positive());
                let types = alg.age().level(total).unwrap().reps().to_vec();
                for t in &types {
                    if !leq(&sum, t, m) {
                        assert!(value.value(&t.canonical_code()).is_zero());
                    }
                }
            }
        }
    }
}
