//! The disjoint-sum operator `+_M` and its decomposition theory.
//!
//! For a distance `M`, the sum `A +_M B` is the disjoint union of `A` and
//! `B` with every cross distance set to `M`. Inside the window of "magic"
//! parameters the class is closed under this sum, every member splits
//! uniquely into indecomposables (the components of the graph of non-`M`
//! pairs), and the partial order `B <= A` ("some distances of `A` reset to
//! `M`") witnesses freeness of the operator.

use crate::enumerate::{AgeEnumerator, EnumError};
use crate::metric::{CanonicalCode, Dist, MetricSpace, SpaceError};
use crate::params::{membership_failure, MembershipFailure, ParameterSequence};
use itertools::Itertools;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Why no magic parameter exists for a parameter sequence.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RangeError {
    #[error("K1 is infinite, so max(K1, ceil(delta/2)) <= min(K2, (C-delta-1)/2) cannot hold")]
    K1Infinite,
    #[error("window is empty: lower bound max(K1, ceil(delta/2)) = {lo} exceeds upper bound min(K2, floor((C-delta-1)/2), delta) = {hi}")]
    EmptyWindow { lo: Dist, hi: i64 },
    #[error("the only candidate M = delta = {delta} is excluded by a Henson constraint mentioning delta")]
    ExcludedByHenson { delta: Dist },
}

/// The window of magic parameters `M`: the class is `+_M`-closed exactly
/// for `M` in `valid_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagicRange {
    lo: Dist,
    hi: Dist,
    excluded: BTreeSet<Dist>,
    valid: BTreeSet<Dist>,
}

impl MagicRange {
    /// `max(K1, ceil(delta/2))`.
    pub fn lo(&self) -> Dist {
        self.lo
    }

    /// `min(K2, floor((C-delta-1)/2))`, capped at `delta` since `M` ranges
    /// over distances.
    pub fn hi(&self) -> Dist {
        self.hi
    }

    /// Values excluded by the Henson rule (`M = delta` when some
    /// constraint mentions `delta` and `C > 2*delta + 1`).
    pub fn excluded(&self) -> &BTreeSet<Dist> {
        &self.excluded
    }

    pub fn valid_set(&self) -> &BTreeSet<Dist> {
        &self.valid
    }

    pub fn contains(&self, m: Dist) -> bool {
        self.valid.contains(&m)
    }

    /// The default choice `M = max(K1, ceil(delta/2))` (the smallest valid
    /// value).
    pub fn default_m(&self) -> Dist {
        *self
            .valid
            .first()
            .expect("valid set nonempty by construction")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "lo": self.lo,
            "hi": self.hi,
            "excluded": self.excluded.iter().collect::<Vec<_>>(),
            "valid": self.valid.iter().collect::<Vec<_>>(),
            "default": self.default_m(),
        })
    }
}

/// Computes the magic window for an admissible parameter sequence.
///
/// The bounds are `max(K1, ceil(delta/2)) <= M <= min(K2, (C-delta-1)/2)`
/// with `C = min(C0, C1)`; when `C > 2*delta + 1` and some Henson
/// constraint mentions the distance `delta`, the value `M = delta` is
/// excluded. When `C = 2*delta + 1` the Henson alphabet is `{1, delta-1}`
/// and no exclusion applies.
pub fn magic_range(p: &ParameterSequence) -> Result<MagicRange, RangeError> {
    let delta = p.delta();
    let Some(k1) = p.k1().finite() else {
        return Err(RangeError::K1Infinite);
    };
    let lo = k1.max(delta.div_ceil(2));

    // M is a distance, so the window lives inside [1, delta].
    let mut hi: i64 = i64::from(delta);
    if let Some(k2) = p.k2().finite() {
        hi = hi.min(i64::from(k2));
    }
    if let Some(c) = p.c().finite() {
        hi = hi.min((i64::from(c) - i64::from(delta) - 1).div_euclid(2));
    }
    if i64::from(lo) > hi {
        return Err(RangeError::EmptyWindow { lo, hi });
    }
    let hi = hi as Dist;

    let mut excluded = BTreeSet::new();
    if p.c() > 2 * delta + 1 && p.henson().mentions_distance(delta) {
        excluded.insert(delta);
    }
    let valid: BTreeSet<Dist> = (lo..=hi).filter(|m| !excluded.contains(m)).collect();
    if valid.is_empty() {
        return Err(RangeError::ExcludedByHenson { delta });
    }
    Ok(MagicRange {
        lo,
        hi,
        excluded,
        valid,
    })
}

/// Disjoint union of `A` and `B` with all cross distances equal to `m`.
///
/// The points of `A` come first. Fails with a witness triple when the
/// result is not a metric space.
pub fn sum_m(a: &MetricSpace, b: &MetricSpace, m: Dist) -> Result<MetricSpace, SpaceError> {
    let n = a.n() + b.n();
    let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = if j < a.n() {
                a.dist(i, j)
            } else if i >= a.n() {
                b.dist(i - a.n(), j - a.n())
            } else {
                m
            };
            upper.push(d);
        }
    }
    MetricSpace::new(n, upper)
}

/// Sum of a sequence of spaces, left to right. The empty product is the
/// empty space.
pub fn sum_all<'a, I>(factors: I, m: Dist) -> Result<MetricSpace, SpaceError>
where
    I: IntoIterator<Item = &'a MetricSpace>,
{
    let mut acc = MetricSpace::empty();
    for f in factors {
        acc = sum_m(&acc, f, m)?;
    }
    Ok(acc)
}

/// The factors of a space under `+_M`: the connected components of the
/// graph of pairs at distance other than `M`, sorted by canonical code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    factors: Vec<MetricSpace>,
    codes: Vec<CanonicalCode>,
    m: Dist,
}

impl Decomposition {
    /// Factors, each indecomposable, sorted by canonical code.
    pub fn factors(&self) -> &[MetricSpace] {
        &self.factors
    }

    /// Codes of the factors, parallel to [`Decomposition::factors`].
    pub fn factor_codes(&self) -> &[CanonicalCode] {
        &self.codes
    }

    pub fn m(&self) -> Dist {
        self.m
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `+_M`-sum of the factors; isometric to the decomposed space.
    pub fn recompose(&self) -> MetricSpace {
        sum_all(&self.factors, self.m).expect("recomposition of a valid space is metric")
    }
}

/// Splits a space into its `+_M`-indecomposable factors.
///
/// A cross pair between two components is necessarily at distance `M`
/// (components are maximal), so recomposition always reproduces the space
/// up to isometry.
pub fn decompose(a: &MetricSpace, m: Dist) -> Decomposition {
    let n = a.n();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(v) = stack.pop() {
            for u in 0..n {
                if comp[u] == usize::MAX && a.dist(v, u) != m {
                    comp[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    let mut factors: Vec<MetricSpace> = (0..count)
        .map(|c| {
            let points: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
            a.induced(&points)
        })
        .collect();
    let mut keyed: Vec<(CanonicalCode, MetricSpace)> =
        factors.drain(..).map(|f| (f.canonical_code(), f)).collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    let (codes, factors) = keyed.into_iter().unzip();
    Decomposition { factors, codes, m }
}

/// True iff a space is `+_M`-indecomposable: its non-`M` distance graph is
/// connected. The empty space is not indecomposable (it is the unit).
pub fn is_indecomposable(a: &MetricSpace, m: Dist) -> bool {
    !a.is_empty() && decompose(a, m).len() == 1
}

/// The freeness order: `B <= A` iff `|B| = |A|` and some bijection sends
/// every pair of `B` either to a pair of `A` at the same distance or to
/// the reset value `M`.
pub fn leq(b: &MetricSpace, a: &MetricSpace, m: Dist) -> bool {
    if b.n() != a.n() {
        return false;
    }
    let mut image = vec![usize::MAX; b.n()];
    let mut used = vec![false; a.n()];
    leq_search(b, a, m, 0, &mut image, &mut used)
}

fn leq_search(
    b: &MetricSpace,
    a: &MetricSpace,
    m: Dist,
    next: usize,
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    if next == b.n() {
        return true;
    }
    'cand: for v in 0..a.n() {
        if used[v] {
            continue;
        }
        for prev in 0..next {
            let db = b.dist(prev, next);
            if db != m && db != a.dist(image[prev], v) {
                continue 'cand;
            }
        }
        image[next] = v;
        used[v] = true;
        if leq_search(b, a, m, next + 1, image, used) {
            return true;
        }
        used[v] = false;
        image[next] = usize::MAX;
    }
    false
}

/// How a closure pair failed: the sum is either not metric at all, or
/// metric but outside the class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SumViolation {
    NotMetric(SpaceError),
    NotInAge {
        sum: MetricSpace,
        failure: MembershipFailure,
    },
}

impl fmt::Display for SumViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SumViolation::NotMetric(e) => write!(f, "sum is not metric: {e}"),
            SumViolation::NotInAge { failure, .. } => write!(f, "sum leaves the age: {failure}"),
        }
    }
}

/// First failing pair in canonical enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureWitness {
    pub a: MetricSpace,
    pub b: MetricSpace,
    pub violation: SumViolation,
}

/// Outcome of the exhaustive `+_M` closure check.
#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub m: Dist,
    pub max_total: usize,
    pub pairs_checked: u64,
    pub witness: Option<ClosureWitness>,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": "closure",
            "status": if self.passed() { "pass" } else { "fail" },
            "m": self.m,
            "max_total": self.max_total,
            "pairs_checked": self.pairs_checked,
            "witness": self.witness.as_ref().map(|w| {
                json!({
                    "a": serde_json::to_value(&w.a).unwrap(),
                    "b": serde_json::to_value(&w.b).unwrap(),
                    "violation": w.violation.to_string(),
                    "sum": match &w.violation {
                        SumViolation::NotInAge { sum, .. } => serde_json::to_value(sum).unwrap(),
                        SumViolation::NotMetric(_) => Value::Null,
                    },
                })
            }),
        })
    }
}

/// Checks `A +_M B` for every unordered pair of nonempty age members with
/// `|A| + |B| <= max_total`, in code order with the larger summand first.
/// The first witness in this order is deterministic regardless of worker
/// count. Pairs involving the empty space are trivial and skipped.
pub fn verify_closure(
    age: &mut AgeEnumerator,
    m: Dist,
    max_total: usize,
) -> Result<ClosureReport, EnumError> {
    let p = age.params().clone();
    if max_total > 0 {
        age.ensure(max_total - 1)?;
    }
    let mut pairs_checked = 0u64;
    let mut witness = None;
    'scan: for size_a in 1..max_total {
        for size_b in 1..=size_a.min(max_total - size_a) {
            let reps_a = age.level_ref(size_a).reps();
            let reps_b = age.level_ref(size_b).reps();
            for (i, a) in reps_a.iter().enumerate() {
                let upto = if size_a == size_b {
                    i + 1
                } else {
                    reps_b.len()
                };
                for b in reps_b.iter().take(upto) {
                    pairs_checked += 1;
                    let violation = match sum_m(a, b, m) {
                        Err(e) => Some(SumViolation::NotMetric(e)),
                        Ok(sum) => membership_failure(&p, &sum)
                            .map(|failure| SumViolation::NotInAge { sum, failure }),
                    };
                    if let Some(violation) = violation {
                        witness = Some(ClosureWitness {
                            a: a.clone(),
                            b: b.clone(),
                            violation,
                        });
                        break 'scan;
                    }
                }
            }
        }
    }
    Ok(ClosureReport {
        m,
        max_total,
        pairs_checked,
        witness,
    })
}

/// First freeness failure: a member together with the partition or
/// relabeling that broke one of the checked laws.
#[derive(Debug, Clone)]
pub struct FreenessWitness {
    pub member: MetricSpace,
    pub detail: String,
}

/// Outcome of the exhaustive freeness check.
#[derive(Debug, Clone)]
pub struct FreenessReport {
    pub m: Dist,
    pub max_size: usize,
    pub members_checked: u64,
    pub partitions_checked: u64,
    pub witness: Option<FreenessWitness>,
}

impl FreenessReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": "freeness",
            "status": if self.passed() { "pass" } else { "fail" },
            "m": self.m,
            "max_size": self.max_size,
            "members_checked": self.members_checked,
            "partitions_checked": self.partitions_checked,
            "witness": self.witness.as_ref().map(|w| {
                json!({
                    "member": serde_json::to_value(&w.member).unwrap(),
                    "detail": w.detail,
                })
            }),
        })
    }
}

/// All set partitions of `{0, ..., n-1}` as restricted growth strings, in
/// lexicographic order; parts are listed by first occurrence.
pub(crate) fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        let blocks = rgs.iter().copied().max().unwrap() + 1;
        let mut parts = vec![Vec::new(); blocks];
        for (i, &b) in rgs.iter().enumerate() {
            parts[b].push(i);
        }
        out.push(parts);
        // Next restricted growth string.
        let mut i = n;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let cap = rgs[..i].iter().copied().max().unwrap() + 1;
            if rgs[i] < cap {
                rgs[i] += 1;
                for v in rgs.iter_mut().skip(i + 1) {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Deterministic sample of permutations of `0..n`: everything for small
/// `n`, otherwise the identity, the reversal, and seeded shuffles.
fn relabelings(n: usize, cap: usize) -> Vec<Vec<usize>> {
    let total: usize = (1..=n).product();
    if total <= cap {
        return (0..n).permutations(n).collect();
    }
    let mut out = Vec::with_capacity(cap);
    out.push((0..n).collect::<Vec<_>>());
    out.push((0..n).rev().collect::<Vec<_>>());
    let mut state = 0x9e3779b97f4a7c15u64 ^ (n as u64);
    while out.len() < cap {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            perm.swap(i, (state >> 33) as usize % (i + 1));
        }
        out.push(perm);
    }
    out
}

/// Exhaustive freeness check for all members up to `max_size`:
///
/// - for every set partition of a member's points, the `+_M`-sum of the
///   induced parts is metric, stays in the age, and sits below the member
///   in the freeness order;
/// - decomposition is unique: the factor multiset is invariant under
///   relabeling, and the factors recompose to the member.
pub fn verify_freeness(
    age: &mut AgeEnumerator,
    m: Dist,
    max_size: usize,
) -> Result<FreenessReport, EnumError> {
    let p = age.params().clone();
    age.ensure(max_size)?;
    let mut members_checked = 0u64;
    let mut partitions_checked = 0u64;
    let mut witness = None;

    'scan: for size in 1..=max_size {
        let reps = age.level_ref(size).reps();
        for member in reps {
            members_checked += 1;
            let code = member.canonical_code();

            for parts in set_partitions(size) {
                partitions_checked += 1;
                let induced: Vec<MetricSpace> =
                    parts.iter().map(|pts| member.induced(pts)).collect();
                let sum = match sum_all(&induced, m) {
                    Ok(s) => s,
                    Err(e) => {
                        witness = Some(FreenessWitness {
                            member: member.clone(),
                            detail: format!("partition {parts:?}: sum not metric: {e}"),
                        });
                        break 'scan;
                    }
                };
                if let Some(failure) = membership_failure(&p, &sum) {
                    witness = Some(FreenessWitness {
                        member: member.clone(),
                        detail: format!("partition {parts:?}: sum leaves the age: {failure}"),
                    });
                    break 'scan;
                }
                if !leq(&sum, member, m) {
                    witness = Some(FreenessWitness {
                        member: member.clone(),
                        detail: format!("partition {parts:?}: sum of parts is not <= the member"),
                    });
                    break 'scan;
                }
            }

            let base = decompose(member, m);
            if base.recompose().canonical_code() != code {
                witness = Some(FreenessWitness {
                    member: member.clone(),
                    detail: "factors do not recompose to the member".to_string(),
                });
                break 'scan;
            }
            for perm in relabelings(size, 120) {
                let relabeled = member.relabel(&perm);
                let other = decompose(&relabeled, m);
                if other.factor_codes() != base.factor_codes() {
                    witness = Some(FreenessWitness {
                        member: member.clone(),
                        detail: format!("factor multiset changed under relabeling {perm:?}"),
                    });
                    break 'scan;
                }
            }
        }
    }

    Ok(FreenessReport {
        m,
        max_size,
        members_checked,
        partitions_checked,
        witness,
    })
}
