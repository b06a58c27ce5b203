//! Isomorph-free enumeration of age members by size.
//!
//! Generation is extension-based: every representative of size `n-1` is
//! extended by one point with distances in `[1, delta]`, only the new
//! triangles and new Henson embeddings are checked, and duplicates are
//! merged by canonical code. Hereditary classes make this complete. The
//! stored representative of each type is the canonical form itself, so
//! output is identical across runs and worker counts.

use crate::metric::{CanonicalCode, Dist, MetricSpace, TriangleType};
use crate::params::{in_age, triangle_allowed, ParameterSequence};
use crate::sumop::is_indecomposable;
use itertools::Itertools;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::Instant;
use thiserror::Error;

/// Caps on the enumeration: fail loudly, never silently truncate.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Maximum number of isomorphism types per size.
    pub max_types_per_size: usize,
    /// Wall-clock cap for the whole enumerator, if any.
    pub max_seconds: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_types_per_size: 1_000_000,
            max_seconds: None,
        }
    }
}

/// Resource-limit failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("type budget exceeded at size {size}: more than {limit} isomorphism types")]
    TypeBudget { size: usize, limit: usize },
    #[error("time budget of {limit_seconds}s exceeded while enumerating size {size}")]
    TimeBudget { size: usize, limit_seconds: u64 },
    #[error("oracle bound exceeded: n = {n} is larger than the configured bound {bound}")]
    OracleBound { n: usize, bound: usize },
    #[error("orbit products are limited to total degree {bound}, requested {degree}")]
    ProductDegree { degree: usize, bound: usize },
}

/// The profile: exact counts of isomorphism types per size, starting at
/// `a_0 = 1` for the empty type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    counts: Vec<u64>,
}

impl Profile {
    pub fn new(counts: Vec<u64>) -> Self {
        debug_assert_eq!(counts.first(), Some(&1));
        Profile { counts }
    }

    /// `counts()[n]` is the number of types of size `n`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, n: usize) -> u64 {
        self.counts[n]
    }

    pub fn max_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn to_json(&self) -> Value {
        json!({ "profile": self.counts })
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.counts.iter().join(", "))
    }
}

/// Counts of indecomposable types per size, starting at size 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    counts: Vec<u64>,
}

impl Census {
    /// `counts[d-1]` is the number of indecomposable types of size `d`.
    pub fn new(counts: Vec<u64>) -> Self {
        Census { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of indecomposable types of size `d >= 1`.
    pub fn by_size(&self, d: usize) -> u64 {
        self.counts[d - 1]
    }

    pub fn max_size(&self) -> usize {
        self.counts.len()
    }

    pub fn to_json(&self) -> Value {
        json!({ "census": self.counts, "sizes": (1..=self.counts.len()).collect::<Vec<_>>() })
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.counts.iter().join(", "))
    }
}

/// One enumerated size: canonical codes with their representative spaces,
/// sorted by code. Representatives are the canonical forms themselves.
#[derive(Debug, Clone, Default)]
pub struct Level {
    codes: Vec<CanonicalCode>,
    reps: Vec<MetricSpace>,
}

impl Level {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[CanonicalCode] {
        &self.codes
    }

    pub fn reps(&self) -> &[MetricSpace] {
        &self.reps
    }

    pub fn index_of(&self, code: &CanonicalCode) -> Option<usize> {
        self.codes.binary_search(code).ok()
    }
}

/// Lazy, cached, isomorph-free enumeration of one age.
pub struct AgeEnumerator {
    params: ParameterSequence,
    budget: Budget,
    started: Instant,
    levels: Vec<Level>,
}

impl AgeEnumerator {
    pub fn new(params: ParameterSequence, budget: Budget) -> Self {
        let empty = MetricSpace::empty();
        let level0 = Level {
            codes: vec![empty.canonical_code()],
            reps: vec![empty],
        };
        AgeEnumerator {
            params,
            budget,
            started: Instant::now(),
            levels: vec![level0],
        }
    }

    pub fn params(&self) -> &ParameterSequence {
        &self.params
    }

    /// Builds all levels up to `n` if not yet present.
    pub fn ensure(&mut self, n: usize) -> Result<(), EnumError> {
        while self.levels.len() <= n {
            self.extend_once()?;
        }
        Ok(())
    }

    /// Representatives of size `n`, building lazily.
    pub fn level(&mut self, n: usize) -> Result<&Level, EnumError> {
        self.ensure(n)?;
        Ok(&self.levels[n])
    }

    /// Already-built level; panics if [`AgeEnumerator::ensure`] has not
    /// reached `n`.
    pub fn level_ref(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    /// Exact type counts for sizes `0..=n_max`.
    pub fn profile(&mut self, n_max: usize) -> Result<Profile, EnumError> {
        self.ensure(n_max)?;
        Ok(Profile::new(
            (0..=n_max).map(|n| self.levels[n].len() as u64).collect(),
        ))
    }

    /// Counts of `+_M`-indecomposable types for sizes `1..=n_max`.
    pub fn census(&mut self, m: Dist, n_max: usize) -> Result<Census, EnumError> {
        self.ensure(n_max)?;
        let counts = (1..=n_max)
            .map(|d| {
                self.levels[d]
                    .reps
                    .iter()
                    .filter(|sp| is_indecomposable(sp, m))
                    .count() as u64
            })
            .collect();
        Ok(Census::new(counts))
    }

    /// Indecomposable representatives of size `d` under `+_M`.
    pub fn indecomposables(&mut self, m: Dist, d: usize) -> Result<Vec<MetricSpace>, EnumError> {
        self.ensure(d)?;
        Ok(self.levels[d]
            .reps
            .iter()
            .filter(|sp| is_indecomposable(sp, m))
            .cloned()
            .collect())
    }

    fn check_time(&self, size: usize) -> Result<(), EnumError> {
        if let Some(limit) = self.budget.max_seconds {
            if self.started.elapsed().as_secs() >= limit {
                return Err(EnumError::TimeBudget {
                    size,
                    limit_seconds: limit,
                });
            }
        }
        Ok(())
    }

    /// Builds the next level from the last one. Parents are processed in
    /// parallel batches; the merged code set is order-independent, so the
    /// result does not depend on the worker count.
    fn extend_once(&mut self) -> Result<(), EnumError> {
        let size = self.levels.len();
        let params = &self.params;
        let parents = &self.levels[size - 1];
        let mut codes: BTreeSet<CanonicalCode> = BTreeSet::new();

        for batch in parents.reps.chunks(256) {
            self.check_time(size)?;
            let found: Vec<Vec<CanonicalCode>> = batch
                .par_iter()
                .map(|parent| {
                    let mut local = Vec::new();
                    for_each_extension(params, parent, |candidate| {
                        local.push(candidate.canonical_code());
                    });
                    local
                })
                .collect();
            for group in found {
                for code in group {
                    codes.insert(code);
                }
            }
            if codes.len() > self.budget.max_types_per_size {
                return Err(EnumError::TypeBudget {
                    size,
                    limit: self.budget.max_types_per_size,
                });
            }
        }

        let level = Level {
            reps: codes.iter().map(MetricSpace::from_code).collect(),
            codes: codes.into_iter().collect(),
        };
        self.levels.push(level);
        Ok(())
    }
}

/// Runs `visit` on every valid one-point extension of `parent`. Only the
/// new triangles and Henson embeddings through the new point are checked;
/// the parent is valid by induction.
fn for_each_extension<F: FnMut(MetricSpace)>(
    params: &ParameterSequence,
    parent: &MetricSpace,
    mut visit: F,
) {
    let k = parent.n();
    let delta = params.delta();
    let mut dvec = vec![1 as Dist; k];
    loop {
        if extension_admissible(params, parent, &dvec) {
            let candidate = extend_space(parent, &dvec);
            let new_point = k;
            let henson_hit = params
                .henson()
                .constraints()
                .iter()
                .any(|h| h.embeds_into_using(&candidate, new_point));
            if !henson_hit {
                visit(candidate);
            }
        }
        // Odometer over [1, delta]^k; empty dvec yields the single
        // extension of the empty space.
        let mut pos = 0;
        loop {
            if pos == k {
                return;
            }
            if dvec[pos] < delta {
                dvec[pos] += 1;
                break;
            }
            dvec[pos] = 1;
            pos += 1;
        }
    }
}

fn extension_admissible(params: &ParameterSequence, parent: &MetricSpace, dvec: &[Dist]) -> bool {
    let k = parent.n();
    for i in 0..k {
        for j in (i + 1)..k {
            let a = parent.dist(i, j);
            let b = dvec[i];
            let c = dvec[j];
            if a > b + c || b > a + c || c > a + b {
                return false;
            }
            if !triangle_allowed(params, TriangleType::new(a, b, c)) {
                return false;
            }
        }
    }
    true
}

fn extend_space(parent: &MetricSpace, dvec: &[Dist]) -> MetricSpace {
    let k = parent.n();
    let n = k + 1;
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            upper.push(if j < k { parent.dist(i, j) } else { dvec[i] });
        }
    }
    MetricSpace::from_parts_unchecked(n, upper, None)
}

/// Default cap on the naive oracle's point count.
pub const ORACLE_DEFAULT_BOUND: usize = 4;

/// Independent type count: enumerates all labeled distance assignments in
/// `[1, delta]^C(n,2)`, filters by the class constraints, and dedups by
/// exhaustive permutation testing. No canonical codes involved.
pub fn oracle_enumerate(p: &ParameterSequence, n: usize) -> Result<u64, EnumError> {
    oracle_enumerate_bounded(p, n, ORACLE_DEFAULT_BOUND)
}

/// As [`oracle_enumerate`] with an explicit bound on `n`.
pub fn oracle_enumerate_bounded(
    p: &ParameterSequence,
    n: usize,
    bound: usize,
) -> Result<u64, EnumError> {
    if n > bound {
        return Err(EnumError::OracleBound { n, bound });
    }
    if n <= 1 {
        return Ok(1);
    }
    let pairs = n * (n - 1) / 2;
    let delta = p.delta();
    let mut buckets: HashMap<Vec<Dist>, Vec<MetricSpace>> = HashMap::new();
    let mut count = 0u64;
    let mut upper = vec![1 as Dist; pairs];
    loop {
        if let Ok(sp) = MetricSpace::new(n, upper.clone()) {
            if in_age(p, &sp) {
                let mut key = upper.clone();
                key.sort_unstable();
                let bucket = buckets.entry(key).or_default();
                if !bucket.iter().any(|r| isometric_by_permutation(r, &sp)) {
                    bucket.push(sp);
                    count += 1;
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == pairs {
                return Ok(count);
            }
            if upper[pos] < delta {
                upper[pos] += 1;
                break;
            }
            upper[pos] = 1;
            pos += 1;
        }
    }
}

/// Isometry by brute-force permutation search; deliberately independent of
/// the canonical-code machinery.
fn isometric_by_permutation(a: &MetricSpace, b: &MetricSpace) -> bool {
    if a.n() != b.n() {
        return false;
    }
    (0..a.n())
        .permutations(a.n())
        .any(|perm| a.relabel(&perm) == *b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ExtNat, HensonSet};

    fn running_example() -> ParameterSequence {
        ParameterSequence::numeric(3, 1, 3, 10, 11).unwrap()
    }

    fn bipartite_antipodal() -> ParameterSequence {
        ParameterSequence::new(
            3,
            ExtNat::Inf,
            ExtNat::Fin(0),
            ExtNat::Fin(8),
            ExtNat::Fin(7),
            HensonSet::empty(),
        )
        .unwrap()
    }

    #[test]
    fn running_example_small_counts() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        assert_eq!(age.level(1).unwrap().len(), 1);
        assert_eq!(age.level(2).unwrap().len(), 3);
        assert_eq!(age.level(3).unwrap().len(), 9);
        let profile = age.profile(3).unwrap();
        assert_eq!(profile.counts(), &[1, 1, 3, 9]);
    }

    #[test]
    fn bipartite_profile_small() {
        let mut age = AgeEnumerator::new(bipartite_antipodal(), Budget::default());
        let profile = age.profile(2).unwrap();
        assert_eq!(profile.counts(), &[1, 1, 3]);
    }

    #[test]
    fn trivial_profile() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        assert_eq!(age.profile(0).unwrap().counts(), &[1]);
    }

    #[test]
    fn census_small() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        assert_eq!(age.census(2, 2).unwrap().counts(), &[1, 2]);
        assert_eq!(age.census(3, 2).unwrap().counts(), &[1, 2]);
    }

    #[test]
    fn cliques_witness_indecomposables_every_size() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        let census = age.census(2, 4).unwrap();
        for d in 1..=4 {
            assert!(census.by_size(d) >= 1);
        }
        // The 1-clique itself is the witness.
        assert!(is_indecomposable(&MetricSpace::clique(4, 1), 2));
    }

    #[test]
    fn oracle_matches_enumeration() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        for n in 0..=4 {
            assert_eq!(
                oracle_enumerate(age.params(), n).unwrap(),
                age.level(n).unwrap().len() as u64,
                "size {n}"
            );
        }
        assert_eq!(oracle_enumerate(&running_example(), 3).unwrap(), 9);
    }

    #[test]
    fn oracle_bound_is_enforced() {
        assert_eq!(
            oracle_enumerate(&running_example(), 5).unwrap_err(),
            EnumError::OracleBound { n: 5, bound: 4 }
        );
    }

    #[test]
    fn time_budget_fails_loudly() {
        let budget = Budget {
            max_types_per_size: 1_000_000,
            max_seconds: Some(0),
        };
        let mut age = AgeEnumerator::new(running_example(), budget);
        assert_eq!(
            age.profile(2).unwrap_err(),
            EnumError::TimeBudget {
                size: 1,
                limit_seconds: 0
            }
        );
    }

    #[test]
    fn generation_is_hereditary() {
        let mut age = AgeEnumerator::new(running_example(), Budget::default());
        age.ensure(5).unwrap();
        for n in 1..=5usize {
            let child_reps = age.level_ref(n).reps().to_vec();
            let parent_codes: BTreeSet<_> = age.level_ref(n - 1).codes().iter().cloned().collect();
            for rep in child_reps {
                for drop in 0..n {
                    let subset: Vec<usize> = (0..n).filter(|&v| v != drop).collect();
                    let code = rep.induced(&subset).canonical_code();
                    assert!(parent_codes.contains(&code));
                }
            }
        }
    }

    #[test]
    fn deterministic_across_runs_and_thread_counts() {
        let mut a = AgeEnumerator::new(running_example(), Budget::default());
        a.ensure(4).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let mut b = AgeEnumerator::new(running_example(), Budget::default());
        single.install(|| b.ensure(4)).unwrap();
        for n in 0..=4 {
            assert_eq!(a.level_ref(n).codes(), b.level_ref(n).codes());
            assert_eq!(a.level_ref(n).reps(), b.level_ref(n).reps());
        }
    }

    #[test]
    fn type_budget_fails_loudly() {
        let budget = Budget {
            max_types_per_size: 2,
            max_seconds: None,
        };
        let mut age = AgeEnumerator::new(running_example(), budget);
        assert_eq!(
            age.profile(3).unwrap_err(),
            EnumError::TypeBudget { size: 2, limit: 2 }
        );
    }

    #[test]
    fn henson_constraint_prunes_members() {
        // Forbidding the distance-3 anticlique on 3 points removes exactly
        // one 3-point type.
        let p = ParameterSequence::new(
            3,
            ExtNat::Fin(1),
            ExtNat::Fin(3),
            ExtNat::Fin(10),
            ExtNat::Fin(11),
            HensonSet::new(vec![MetricSpace::clique(3, 3)]),
        )
        .unwrap();
        let mut age = AgeEnumerator::new(p.clone(), Budget::default());
        assert_eq!(age.level(3).unwrap().len(), 8);
        assert_eq!(oracle_enumerate(&p, 3).unwrap(), 8);
    }
}
