//! The bipartite antipodal class of diameter 3.
//!
//! Members are exactly the age members for the parameters
//! `(delta=3, K1=inf, K2=0, C0=8, C1=7)`: all odd perimeters are forbidden
//! (bipartite), and even perimeters of 8 or more are forbidden, which
//! makes distance-3 pairs a partial matching without any dedicated check.
//! Isomorphism types are classified by signatures `(k, m, n)` — antipodal
//! pairs, smaller part, larger part — and the signature semigroup is
//! freely generated by `x = (0,0,1)`, `y = (0,1,1)`, `z = (1,1,1)`.

use crate::enumerate::{AgeEnumerator, Budget, Census, EnumError, Profile};
use crate::metric::{Dist, MetricSpace};
use crate::params::{membership_failure, ExtNat, HensonSet, ParameterSequence};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// The parameter sequence whose age is the bipartite antipodal class:
/// `C1 = 2*delta + 1 = 7` kills odd perimeters alongside `K1 = inf`, and
/// `C0 = 8` enforces antipodality on even perimeters.
pub fn antipodal_params() -> ParameterSequence {
    ParameterSequence::new(
        3,
        ExtNat::Inf,
        ExtNat::Fin(0),
        ExtNat::Fin(8),
        ExtNat::Fin(7),
        HensonSet::empty(),
    )
    .expect("antipodal parameters are structurally valid")
}

/// `(k, m, n)`: antipodal-pair count, smaller part size, larger part size,
/// with `k <= m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AntipodalSignature {
    k: usize,
    m: usize,
    n: usize,
}

impl AntipodalSignature {
    /// The generator `x = (0,0,1)`: a single point.
    pub const X: AntipodalSignature = AntipodalSignature { k: 0, m: 0, n: 1 };
    /// The generator `y = (0,1,1)`: a cross pair at distance 1.
    pub const Y: AntipodalSignature = AntipodalSignature { k: 0, m: 1, n: 1 };
    /// The generator `z = (1,1,1)`: an antipodal pair at distance 3.
    pub const Z: AntipodalSignature = AntipodalSignature { k: 1, m: 1, n: 1 };

    pub fn new(k: usize, m: usize, n: usize) -> Self {
        assert!(k <= m && m <= n, "need k <= m <= n, got ({k},{m},{n})");
        AntipodalSignature { k, m, n }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Smaller part size.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Larger part size.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of points.
    pub fn size(&self) -> usize {
        self.m + self.n
    }

    /// Pointwise sum in the signature semigroup.
    pub fn plus(&self, other: &AntipodalSignature) -> AntipodalSignature {
        AntipodalSignature::new(self.k + other.k, self.m + other.m, self.n + other.n)
    }
}

impl fmt::Display for AntipodalSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.k, self.m, self.n)
    }
}

impl Serialize for AntipodalSignature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&self.k)?;
        seq.serialize_element(&self.m)?;
        seq.serialize_element(&self.n)?;
        seq.end()
    }
}

/// Failure to read a space as a bipartite antipodal member.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NotInClass {
    #[error("not a member of the bipartite antipodal age: {0}")]
    NotMember(String),
    #[error("distance parities admit no bipartition")]
    NoBipartition,
}

/// Signature of a member: parts are the classes of the "even distance"
/// relation, `k` counts the distance-3 pairs. An empty part is read as the
/// smaller one, so `m = min` is always well defined.
pub fn alpha(a: &MetricSpace) -> Result<AntipodalSignature, NotInClass> {
    let p = antipodal_params();
    if let Some(failure) = membership_failure(&p, a) {
        return Err(NotInClass::NotMember(failure.to_string()));
    }
    // Parity classes relative to point 0.
    let side: Vec<bool> = (0..a.n()).map(|v| a.dist(0, v) % 2 == 1).collect();
    for x in 0..a.n() {
        for y in (x + 1)..a.n() {
            let cross = side[x] != side[y];
            if (a.dist(x, y) % 2 == 1) != cross {
                return Err(NotInClass::NoBipartition);
            }
        }
    }
    let ones = side.iter().filter(|&&s| s).count();
    let zeros = a.n() - ones;
    let mut k = 0;
    for x in 0..a.n() {
        for y in (x + 1)..a.n() {
            if a.dist(x, y) == 3 {
                k += 1;
            }
        }
    }
    Ok(AntipodalSignature::new(k, ones.min(zeros), ones.max(zeros)))
}

/// The member a signature denotes: parts of sizes `m` and `n`, `k` matched
/// cross pairs at distance 3, other cross distances 1, within-part
/// distances 2.
pub fn beta(s: &AntipodalSignature) -> MetricSpace {
    let total = s.size();
    // Points 0..m are the smaller part, m..m+n the larger; the first k of
    // each part are matched.
    let mut upper = Vec::with_capacity(total * total.saturating_sub(1) / 2);
    for i in 0..total {
        for j in (i + 1)..total {
            // i < j, so a cross pair always has i in the smaller part.
            let same_part = (i < s.m) == (j < s.m);
            let matched = j >= s.m && i < s.k && j - s.m == i;
            let d: Dist = if same_part {
                2
            } else if matched {
                3
            } else {
                1
            };
            upper.push(d);
        }
    }
    let sp = MetricSpace::new(total, upper).expect("beta output is metric");
    debug_assert!(membership_failure(&antipodal_params(), &sp).is_none());
    sp
}

/// Unique expression of a signature in the generators: multiplicities
/// `(z, y, x) = (k, m - k, n - m)`.
pub fn signature_decompose(s: &AntipodalSignature) -> (usize, usize, usize) {
    (s.k, s.m - s.k, s.n - s.m)
}

/// The order on signatures: `k` and `m` grow, total size is preserved.
pub fn signature_leq(s1: &AntipodalSignature, s2: &AntipodalSignature) -> bool {
    s1.k <= s2.k && s1.m <= s2.m && s1.m + s1.n == s2.m + s2.n
}

/// Profile of the class by direct triple enumeration:
/// `a_s = #{(k,m,n) : k <= m <= n, m + n = s}`.
pub fn antipodal_profile(n_max: usize) -> Profile {
    let counts = (0..=n_max)
        .map(|s| {
            let mut count = 0u64;
            for m in 0..=s / 2 {
                let n = s - m;
                count += (0..=m.min(n)).count() as u64;
            }
            count
        })
        .collect();
    Profile::new(counts)
}

/// All signatures of total size `s`, sorted.
pub fn signatures_of_size(s: usize) -> Vec<AntipodalSignature> {
    let mut out = Vec::new();
    for m in 0..=s / 2 {
        let n = s - m;
        for k in 0..=m.min(n) {
            out.push(AntipodalSignature::new(k, m, n));
        }
    }
    out.sort();
    out
}

/// Result of the exhaustive bijection and cross-agreement check.
#[derive(Debug, Clone)]
pub struct AntipodalReport {
    pub max_size: usize,
    pub enumerated_to: usize,
    pub members_checked: u64,
    pub profile: Profile,
    pub witness: Option<String>,
}

impl AntipodalReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": "antipodal",
            "status": if self.passed() { "pass" } else { "fail" },
            "max_size": self.max_size,
            "enumerated_to": self.enumerated_to,
            "members_checked": self.members_checked,
            "profile": self.profile.counts(),
            "witness": self.witness,
        })
    }
}

/// Checks, exhaustively up to `max_size`:
///
/// - `alpha` and `beta` are mutually inverse between isomorphism types and
///   signatures of each size;
/// - the triple count, the Euler transform of `c = (1, 2)`, and the
///   general enumeration under the antipodal parameters agree;
/// - sums of signatures over set partitions sit below the whole member in
///   the signature order.
pub fn verify_antipodal(max_size: usize, budget: Budget) -> Result<AntipodalReport, EnumError> {
    let mut age = AgeEnumerator::new(antipodal_params(), budget);
    age.ensure(max_size)?;
    let profile = antipodal_profile(max_size);
    let euler = crate::algebra::euler_transform(&Census::new(vec![1, 2]), max_size);
    let mut members_checked = 0u64;
    let mut witness = None;

    'scan: for size in 0..=max_size {
        let level = age.level_ref(size);
        if euler.count(size) != profile.count(size) {
            witness = Some(format!(
                "size {size}: euler transform of (1,2) gives {}, triple count {}",
                euler.count(size),
                profile.count(size)
            ));
            break 'scan;
        }
        if level.len() as u64 != profile.count(size) {
            witness = Some(format!(
                "size {size}: enumeration finds {} types, triple count {}",
                level.len(),
                profile.count(size)
            ));
            break 'scan;
        }
        let mut seen = BTreeSet::new();
        for rep in level.reps() {
            members_checked += 1;
            let sig = match alpha(rep) {
                Ok(s) => s,
                Err(e) => {
                    witness = Some(format!("size {size}: alpha failed on {rep}: {e}"));
                    break 'scan;
                }
            };
            if !seen.insert(sig) {
                witness = Some(format!("size {size}: duplicate signature {sig}"));
                break 'scan;
            }
            if beta(&sig).canonical_code() != rep.canonical_code() {
                witness = Some(format!("size {size}: beta(alpha({rep})) differs"));
                break 'scan;
            }
            // Freeness order over set partitions of the member.
            for parts in crate::sumop::set_partitions(size) {
                let mut total = AntipodalSignature::new(0, 0, 0);
                for part in &parts {
                    let piece = alpha(&rep.induced(part)).expect("parts are members");
                    total = total.plus(&piece);
                }
                if !signature_leq(&total, &sig) {
                    witness = Some(format!(
                        "size {size}: partition {parts:?} of {rep} gives {total} not <= {sig}"
                    ));
                    break 'scan;
                }
            }
        }
        if witness.is_none() {
            for sig in signatures_of_size(size) {
                if alpha(&beta(&sig)).expect("beta lands in the class") != sig {
                    witness = Some(format!("alpha(beta({sig})) differs"));
                    break 'scan;
                }
            }
        }
    }

    Ok(AntipodalReport {
        max_size,
        enumerated_to: max_size,
        members_checked,
        profile,
        witness,
    })
}
