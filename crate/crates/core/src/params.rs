//! Parameter sequences and the constraints they induce.
//!
//! A class of finite integer-distance metric spaces is cut out of the
//! spaces of diameter at most `delta` by three families of constraints:
//! forbidden triangles determined by `(delta, K1, K2, C0, C1)`, and a set
//! of forbidden `{1, delta}`-spaces (Henson constraints). This module
//! holds the numeric parameters, classifies them against the three
//! admissibility cases, and decides membership of concrete spaces.

use crate::metric::{Dist, MetricSpace, SpaceFile, TriangleType};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;
use thiserror::Error;

/// A nonnegative integer extended with infinity.
///
/// `Inf` compares above every finite value and absorbs addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(u32),
    Inf,
}

impl ExtNat {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtNat::Fin(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            ExtNat::Fin(v) => Some(v),
            ExtNat::Inf => None,
        }
    }
}

impl From<u32> for ExtNat {
    fn from(v: u32) -> Self {
        ExtNat::Fin(v)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (ExtNat::Fin(a), ExtNat::Fin(b)) => ExtNat::Fin(a + b),
            _ => ExtNat::Inf,
        }
    }
}

impl Add<u32> for ExtNat {
    type Output = ExtNat;
    fn add(self, rhs: u32) -> ExtNat {
        self + ExtNat::Fin(rhs)
    }
}

impl Mul<u32> for ExtNat {
    type Output = ExtNat;
    fn mul(self, rhs: u32) -> ExtNat {
        match self {
            ExtNat::Fin(a) => ExtNat::Fin(a * rhs),
            ExtNat::Inf if rhs == 0 => ExtNat::Fin(0),
            ExtNat::Inf => ExtNat::Inf,
        }
    }
}

impl PartialEq<u32> for ExtNat {
    fn eq(&self, other: &u32) -> bool {
        *self == ExtNat::Fin(*other)
    }
}

impl PartialOrd<u32> for ExtNat {
    fn partial_cmp(&self, other: &u32) -> Option<Ordering> {
        Some(self.cmp(&ExtNat::Fin(*other)))
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(v) => write!(f, "{v}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtNat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtNat::Inf);
        }
        t.parse::<u32>()
            .map(ExtNat::Fin)
            .map_err(|_| format!("expected a nonnegative integer or \"inf\", got {s:?}"))
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Fin(v) => serializer.serialize_u32(*v),
            ExtNat::Inf => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtNatVisitor;
        impl Visitor<'_> for ExtNatVisitor {
            type Value = ExtNat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a nonnegative integer or the string \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNat, E> {
                u32::try_from(v)
                    .map(ExtNat::Fin)
                    .map_err(|_| E::custom("value out of range"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNat, E> {
                u32::try_from(v)
                    .map(ExtNat::Fin)
                    .map_err(|_| E::custom("value out of range"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNat, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(ExtNatVisitor)
    }
}

/// Errors raised when assembling a parameter sequence.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("delta must be at least 3, got {0}")]
    DeltaTooSmall(u32),
    #[error("K1 = {k1} must not exceed K2 = {k2}")]
    K1ExceedsK2 { k1: ExtNat, k2: ExtNat },
    #[error("Henson constraint {index} has fewer than 2 points")]
    HensonTooSmall { index: usize },
    #[error("Henson constraint {index} uses distance {found}, outside the alphabet {{1, {big}}}")]
    HensonAlphabet {
        index: usize,
        found: Dist,
        big: Dist,
    },
}

/// A finite set of forbidden spaces over the two-letter distance alphabet
/// `{1, delta}` (or `{1, delta-1}` when `C = 2*delta + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HensonSet {
    constraints: Vec<MetricSpace>,
}

impl HensonSet {
    pub fn empty() -> Self {
        HensonSet::default()
    }

    pub fn new(constraints: Vec<MetricSpace>) -> Self {
        HensonSet { constraints }
    }

    pub fn constraints(&self) -> &[MetricSpace] {
        &self.constraints
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Whether any constraint uses the given distance.
    pub fn mentions_distance(&self, d: Dist) -> bool {
        self.constraints.iter().any(|h| h.upper().contains(&d))
    }
}

/// The numeric parameters `(delta, K1, K2, C0, C1)` plus Henson set.
///
/// `C0` bounds even perimeters, `C1` odd perimeters; the derived values
/// are `C = min(C0, C1)` and `C' = max(C0, C1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ParamsFile", try_from = "ParamsFile")]
pub struct ParameterSequence {
    delta: u32,
    k1: ExtNat,
    k2: ExtNat,
    c0: ExtNat,
    c1: ExtNat,
    henson: HensonSet,
}

/// On-disk shape: `{"delta":3,"k1":1,"k2":3,"c0":10,"c1":11,"henson":[...]}`
/// with `"inf"` allowed for the extended-natural entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub delta: u32,
    pub k1: ExtNat,
    pub k2: ExtNat,
    pub c0: ExtNat,
    pub c1: ExtNat,
    #[serde(default)]
    pub henson: Vec<SpaceFile>,
}

impl From<ParameterSequence> for ParamsFile {
    fn from(p: ParameterSequence) -> Self {
        ParamsFile {
            delta: p.delta,
            k1: p.k1,
            k2: p.k2,
            c0: p.c0,
            c1: p.c1,
            henson: p
                .henson
                .constraints
                .into_iter()
                .map(SpaceFile::from)
                .collect(),
        }
    }
}

impl TryFrom<ParamsFile> for ParameterSequence {
    type Error = String;
    fn try_from(f: ParamsFile) -> Result<Self, String> {
        let mut spaces = Vec::with_capacity(f.henson.len());
        for (i, file) in f.henson.into_iter().enumerate() {
            let sp =
                MetricSpace::try_from(file).map_err(|e| format!("henson constraint {i}: {e}"))?;
            spaces.push(sp);
        }
        ParameterSequence::new(f.delta, f.k1, f.k2, f.c0, f.c1, HensonSet::new(spaces))
            .map_err(|e| e.to_string())
    }
}

impl ParameterSequence {
    /// Structural validation: `delta >= 3`, `K1 <= K2`, and the Henson set
    /// restricted to its two-letter alphabet. Deeper, catalog-level
    /// admissibility of the Henson set is not decided here; see
    /// [`ParameterSequence::henson_shape_note`].
    pub fn new(
        delta: u32,
        k1: ExtNat,
        k2: ExtNat,
        c0: ExtNat,
        c1: ExtNat,
        henson: HensonSet,
    ) -> Result<Self, ParamError> {
        if delta < 3 {
            return Err(ParamError::DeltaTooSmall(delta));
        }
        // K1 <= K2 holds whenever K1 is finite; the bipartite convention
        // K1 = inf, K2 = 0 makes both odd-perimeter bounds unsatisfiable.
        if k1.is_finite() && k1 > k2 {
            return Err(ParamError::K1ExceedsK2 { k1, k2 });
        }
        let p = ParameterSequence {
            delta,
            k1,
            k2,
            c0,
            c1,
            henson,
        };
        let big = p.henson_alphabet_big();
        for (index, h) in p.henson.constraints.iter().enumerate() {
            if h.n() < 2 {
                return Err(ParamError::HensonTooSmall { index });
            }
            if let Some(&found) = h.upper().iter().find(|&&d| d != 1 && d != big) {
                return Err(ParamError::HensonAlphabet { index, found, big });
            }
        }
        Ok(p)
    }

    /// Shorthand for all-finite parameter sequences without Henson set.
    pub fn numeric(delta: u32, k1: u32, k2: u32, c0: u32, c1: u32) -> Result<Self, ParamError> {
        Self::new(
            delta,
            ExtNat::Fin(k1),
            ExtNat::Fin(k2),
            ExtNat::Fin(c0),
            ExtNat::Fin(c1),
            HensonSet::empty(),
        )
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }
    pub fn k1(&self) -> ExtNat {
        self.k1
    }
    pub fn k2(&self) -> ExtNat {
        self.k2
    }
    pub fn c0(&self) -> ExtNat {
        self.c0
    }
    pub fn c1(&self) -> ExtNat {
        self.c1
    }
    pub fn henson(&self) -> &HensonSet {
        &self.henson
    }

    /// `C = min(C0, C1)`.
    pub fn c(&self) -> ExtNat {
        self.c0.min(self.c1)
    }

    /// `C' = max(C0, C1)`.
    pub fn c_prime(&self) -> ExtNat {
        self.c0.max(self.c1)
    }

    /// The larger letter of the Henson alphabet: `delta - 1` when
    /// `C = 2*delta + 1`, `delta` otherwise.
    fn henson_alphabet_big(&self) -> Dist {
        if self.c() == 2 * self.delta + 1 {
            self.delta - 1
        } else {
            self.delta
        }
    }

    /// A caution for nonempty Henson sets: only the shape (point count and
    /// distance alphabet) is validated here.
    pub fn henson_shape_note(&self) -> Option<String> {
        if self.henson.is_empty() {
            None
        } else {
            Some(format!(
                "Henson set validated for shape only (alphabet {{1, {}}}); \
                 catalog-level admissibility is accepted on trust",
                self.henson_alphabet_big()
            ))
        }
    }
}

impl fmt::Display for ParameterSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(delta={}, K1={}, K2={}, C0={}, C1={}, |S|={})",
            self.delta,
            self.k1,
            self.k2,
            self.c0,
            self.c1,
            self.henson.constraints.len()
        )
    }
}

/// One violated admissibility condition, identified structurally so tests
/// and reports can name the exact failed clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Case (a) requires `K2 = 0`.
    BipartiteK2NotZero { k2: ExtNat },
    /// Case (a) requires `C1 = 2*delta + 1`.
    BipartiteC1NotMinimal { c1: ExtNat, expected: u32 },
    /// Case (b) requires `C = 2*K1 + 2*K2 + 1`.
    LowCSumMismatch { c: ExtNat, expected: ExtNat },
    /// Case (b) requires `C >= 2*delta + 1`.
    LowCBelowFloor { c: ExtNat, floor: u32 },
    /// Case (b) requires `K1 + 2*K2 <= 2*delta - 1`.
    LowCK1K2TooLarge { k1_plus_2k2: ExtNat, cap: u32 },
    /// Case (b) with `C' > C + 1` requires `K1 = K2`.
    LowCSpreadNeedsK1EqK2 { k1: ExtNat, k2: ExtNat },
    /// Case (b) with `C' > C + 1` requires `3*K2 = 2*delta - 1`.
    LowCSpreadNeedsThreeK2 { three_k2: ExtNat, expected: u32 },
    /// Case (c) requires `K1 + 2*K2 >= 2*delta - 1`.
    HighCK1K2TooSmall { k1_plus_2k2: ExtNat, floor: u32 },
    /// Case (c) requires `3*K2 >= 2*delta`.
    HighCThreeK2TooSmall { three_k2: ExtNat, floor: u32 },
    /// Case (c) with `K1 + 2*K2 = 2*delta - 1` requires `C >= 2*delta + K1 + 2`.
    HighCBoundaryTooLow { c: ExtNat, floor: ExtNat },
    /// Case (c) with `C' > C + 1` requires `C >= 2*delta + K2`.
    HighCSpreadTooLow { c: ExtNat, floor: ExtNat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BipartiteK2NotZero { k2 } => {
                write!(f, "case (a) needs K2 = 0, got K2 = {k2}")
            }
            Violation::BipartiteC1NotMinimal { c1, expected } => {
                write!(
                    f,
                    "case (a) needs C1 = 2*delta+1 = {expected}, got C1 = {c1}"
                )
            }
            Violation::LowCSumMismatch { c, expected } => {
                write!(
                    f,
                    "case (b) needs C = 2*K1+2*K2+1 = {expected}, got C = {c}"
                )
            }
            Violation::LowCBelowFloor { c, floor } => {
                write!(f, "case (b) needs C >= 2*delta+1 = {floor}, got C = {c}")
            }
            Violation::LowCK1K2TooLarge { k1_plus_2k2, cap } => {
                write!(
                    f,
                    "case (b) needs K1+2*K2 <= 2*delta-1 = {cap}, got {k1_plus_2k2}"
                )
            }
            Violation::LowCSpreadNeedsK1EqK2 { k1, k2 } => {
                write!(
                    f,
                    "case (b) with C' > C+1 needs K1 = K2, got K1 = {k1}, K2 = {k2}"
                )
            }
            Violation::LowCSpreadNeedsThreeK2 { three_k2, expected } => {
                write!(
                    f,
                    "case (b) with C' > C+1 needs 3*K2 = 2*delta-1 = {expected}, got {three_k2}"
                )
            }
            Violation::HighCK1K2TooSmall { k1_plus_2k2, floor } => {
                write!(
                    f,
                    "case (c) needs K1+2*K2 >= 2*delta-1 = {floor}, got {k1_plus_2k2}"
                )
            }
            Violation::HighCThreeK2TooSmall { three_k2, floor } => {
                write!(
                    f,
                    "case (c) needs 3*K2 >= 2*delta = {floor}, got {three_k2}"
                )
            }
            Violation::HighCBoundaryTooLow { c, floor } => {
                write!(f, "case (c) with K1+2*K2 = 2*delta-1 needs C >= 2*delta+K1+2 = {floor}, got C = {c}")
            }
            Violation::HighCSpreadTooLow { c, floor } => {
                write!(
                    f,
                    "case (c) with C' > C+1 needs C >= 2*delta+K2 = {floor}, got C = {c}"
                )
            }
        }
    }
}

/// Outcome of checking a parameter sequence against the three
/// admissibility cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmissibilityVerdict {
    /// Case (a): `K1` infinite.
    Bipartite,
    /// Case (b): `K1` finite, `C <= 2*delta + K1`.
    LowC,
    /// Case (c): `C > 2*delta + K1`.
    HighC,
    /// The side conditions of the unique matching case failed.
    Rejected(Vec<Violation>),
}

impl AdmissibilityVerdict {
    pub fn is_admissible(&self) -> bool {
        !matches!(self, AdmissibilityVerdict::Rejected(_))
    }

    pub fn case_letter(&self) -> Option<char> {
        match self {
            AdmissibilityVerdict::Bipartite => Some('a'),
            AdmissibilityVerdict::LowC => Some('b'),
            AdmissibilityVerdict::HighC => Some('c'),
            AdmissibilityVerdict::Rejected(_) => None,
        }
    }
}

impl fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityVerdict::Bipartite => write!(f, "bipartite (a)"),
            AdmissibilityVerdict::LowC => write!(f, "low-C (b)"),
            AdmissibilityVerdict::HighC => write!(f, "high-C (c)"),
            AdmissibilityVerdict::Rejected(violations) => {
                write!(f, "rejected:")?;
                for v in violations {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
        }
    }
}

/// Classifies a parameter sequence against the admissibility table.
///
/// The case headers (`K1` infinite; `K1` finite and `C <= 2*delta + K1`;
/// `C > 2*delta + K1`) partition the parameter space, so exactly one case
/// is examined; every violated side condition of that case is reported.
pub fn classify_admissible(p: &ParameterSequence) -> AdmissibilityVerdict {
    let delta = p.delta();
    let c = p.c();
    let c_prime = p.c_prime();
    let mut violations = Vec::new();

    if !p.k1().is_finite() {
        // Case (a), bipartite.
        if p.k2() != 0 {
            violations.push(Violation::BipartiteK2NotZero { k2: p.k2() });
        }
        let expected = 2 * delta + 1;
        if p.c1() != expected {
            violations.push(Violation::BipartiteC1NotMinimal {
                c1: p.c1(),
                expected,
            });
        }
        if violations.is_empty() {
            return AdmissibilityVerdict::Bipartite;
        }
        return AdmissibilityVerdict::Rejected(violations);
    }

    if c <= p.k1() + 2 * delta {
        // Case (b), low C.
        let expected = p.k1() * 2 + p.k2() * 2 + 1;
        if c != expected {
            violations.push(Violation::LowCSumMismatch { c, expected });
        }
        if c < 2 * delta + 1 {
            violations.push(Violation::LowCBelowFloor {
                c,
                floor: 2 * delta + 1,
            });
        }
        let k1_plus_2k2 = p.k1() + p.k2() * 2;
        if k1_plus_2k2 > 2 * delta - 1 {
            violations.push(Violation::LowCK1K2TooLarge {
                k1_plus_2k2,
                cap: 2 * delta - 1,
            });
        }
        if c_prime > c + 1 {
            if p.k1() != p.k2() {
                violations.push(Violation::LowCSpreadNeedsK1EqK2 {
                    k1: p.k1(),
                    k2: p.k2(),
                });
            }
            let three_k2 = p.k2() * 3;
            if three_k2 != 2 * delta - 1 {
                violations.push(Violation::LowCSpreadNeedsThreeK2 {
                    three_k2,
                    expected: 2 * delta - 1,
                });
            }
        }
        if violations.is_empty() {
            return AdmissibilityVerdict::LowC;
        }
        return AdmissibilityVerdict::Rejected(violations);
    }

    // Case (c), high C.
    let k1_plus_2k2 = p.k1() + p.k2() * 2;
    if k1_plus_2k2 < 2 * delta - 1 {
        violations.push(Violation::HighCK1K2TooSmall {
            k1_plus_2k2,
            floor: 2 * delta - 1,
        });
    }
    let three_k2 = p.k2() * 3;
    if three_k2 < 2 * delta {
        violations.push(Violation::HighCThreeK2TooSmall {
            three_k2,
            floor: 2 * delta,
        });
    }
    if k1_plus_2k2 == 2 * delta - 1 {
        let floor = p.k1() + (2 * delta + 2);
        if c < floor {
            violations.push(Violation::HighCBoundaryTooLow { c, floor });
        }
    }
    if c_prime > c + 1 {
        let floor = p.k2() + 2 * delta;
        if c < floor {
            violations.push(Violation::HighCSpreadTooLow { c, floor });
        }
    }
    if violations.is_empty() {
        return AdmissibilityVerdict::HighC;
    }
    AdmissibilityVerdict::Rejected(violations)
}

/// Whether a metric triple embeds in the class: all sides at most `delta`;
/// odd perimeters `p` must satisfy `2*K1 < p < 2*K2 + 2*min(i,j,k)`; and
/// any perimeter of parity `eps` must stay below `C_eps`.
pub fn triangle_allowed(p: &ParameterSequence, t: TriangleType) -> bool {
    let (_, _, max_side) = t.sides();
    if max_side > p.delta() {
        return false;
    }
    let per = t.perimeter();
    if per % 2 == 1 {
        if p.k1() * 2 >= per {
            return false;
        }
        if p.k2() * 2 + 2 * t.min_side() <= per {
            return false;
        }
    }
    let c_eps = if per % 2 == 0 { p.c0() } else { p.c1() };
    c_eps > per
}

/// The reason a space falls outside the class, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipFailure {
    DistanceTooLarge { x: usize, y: usize, d: Dist },
    ForbiddenTriangle { t: TriangleType },
    HensonEmbeds { index: usize },
}

impl fmt::Display for MembershipFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MembershipFailure::DistanceTooLarge { x, y, d } => {
                write!(f, "distance d({x},{y}) = {d} exceeds delta")
            }
            MembershipFailure::ForbiddenTriangle { t } => {
                write!(f, "forbidden triangle {t}")
            }
            MembershipFailure::HensonEmbeds { index } => {
                write!(f, "Henson constraint {index} embeds")
            }
        }
    }
}

/// First violated constraint witnessing that `a` is not an age member,
/// or `None` when `a` belongs to the class.
pub fn membership_failure(p: &ParameterSequence, a: &MetricSpace) -> Option<MembershipFailure> {
    for x in 0..a.n() {
        for y in (x + 1)..a.n() {
            let d = a.dist(x, y);
            if d > p.delta() {
                return Some(MembershipFailure::DistanceTooLarge { x, y, d });
            }
        }
    }
    for t in a.triangle_types() {
        if !triangle_allowed(p, t) {
            return Some(MembershipFailure::ForbiddenTriangle { t });
        }
    }
    for (index, h) in p.henson().constraints().iter().enumerate() {
        if h.embeds_into(a) {
            return Some(MembershipFailure::HensonEmbeds { index });
        }
    }
    None
}

/// Membership of a concrete space in the class the parameters define:
/// every distance at most `delta`, every triangle allowed, and no Henson
/// constraint embedding.
pub fn in_age(p: &ParameterSequence, a: &MetricSpace) -> bool {
    membership_failure(p, a).is_none()
}

/// The finite list of forbidden metric triples with sides at most `delta`,
/// sorted. Finite because sides are bounded by `delta`.
pub fn forbidden_triangles(p: &ParameterSequence) -> Vec<TriangleType> {
    let d = p.delta();
    let mut out = Vec::new();
    for i in 1..=d {
        for j in i..=d {
            for k in j..=(d.min(i + j)) {
                let t = TriangleType::new(i, j, k);
                if !triangle_allowed(p, t) {
                    out.push(t);
                }
            }
        }
    }
    out
}
