//! Finite integer-distance metric spaces.
//!
//! A [`MetricSpace`] is a finite point set `{0, ..., n-1}` together with a
//! symmetric map assigning a positive integer distance to every unordered
//! pair of distinct points, subject to the triangle inequality. Distances
//! `d(x,x) = 0` are implicit and never stored; the upper triangle is kept
//! in row-major order `d(0,1), d(0,2), ..., d(n-2,n-1)`.
//!
//! Spaces are value-semantic and immutable after construction, so they can
//! be shared and sent across threads freely.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{Hash, Hasher};
use thiserror::Error;

/// Integer distance. Diameters in this domain are single digits, but we
/// keep a full word for arithmetic headroom.
pub type Dist = u32;

/// Errors raised when constructing or combining metric spaces.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    /// The flat distance list does not have length `C(n,2)`.
    #[error("expected {expected} upper-triangle entries for {n} points, got {got}")]
    WrongUpperLength {
        n: usize,
        expected: usize,
        got: usize,
    },
    /// Distances between distinct points must be at least 1.
    #[error("distance d({x},{y}) must be positive")]
    NonPositiveDistance { x: usize, y: usize },
    /// `d(x,z) > d(x,y) + d(y,z)` for the reported triple.
    #[error(
        "triangle inequality fails: d({x},{z}) = {dxz} > {dxy} + {dyz} = d({x},{y}) + d({y},{z})"
    )]
    TriangleViolation {
        x: usize,
        y: usize,
        z: usize,
        dxz: Dist,
        dxy: Dist,
        dyz: Dist,
    },
    /// A distance exceeds the declared diameter bound.
    #[error("distance d({x},{y}) = {d} exceeds diameter bound {bound}")]
    DiameterExceeded {
        x: usize,
        y: usize,
        d: Dist,
        bound: Dist,
    },
}

/// On-disk shape of a metric space: `{"n": ..., "upper": [...]}` with the
/// upper triangle in row-major order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    pub upper: Vec<Dist>,
}

/// A finite integer-distance metric space.
///
/// The optional `diameter_bound` is a validation tag: when present, all
/// distances were checked against it at construction. It is contextual
/// metadata and does not participate in equality or hashing.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(into = "SpaceFile", try_from = "SpaceFile")]
pub struct MetricSpace {
    n: usize,
    upper: Vec<Dist>,
    diameter_bound: Option<Dist>,
}

impl PartialEq for MetricSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.upper == other.upper
    }
}

impl Eq for MetricSpace {}

impl Hash for MetricSpace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.upper.hash(state);
    }
}

impl From<MetricSpace> for SpaceFile {
    fn from(sp: MetricSpace) -> Self {
        SpaceFile {
            n: sp.n,
            upper: sp.upper,
        }
    }
}

impl TryFrom<SpaceFile> for MetricSpace {
    type Error = SpaceError;

    fn try_from(file: SpaceFile) -> Result<Self, SpaceError> {
        MetricSpace::new(file.n, file.upper)
    }
}

#[inline]
fn pair_count(n: usize) -> usize {
    n * (n.saturating_sub(1)) / 2
}

/// Row-major upper-triangle offset of the pair `(i, j)` with `i < j`.
#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl MetricSpace {
    /// Validates and builds a space from its point count and upper triangle.
    pub fn new(n: usize, upper: Vec<Dist>) -> Result<Self, SpaceError> {
        Self::build(n, upper, None)
    }

    /// As [`MetricSpace::new`], but additionally checks every distance
    /// against `bound` and records the bound as a tag.
    pub fn with_diameter_bound(
        n: usize,
        upper: Vec<Dist>,
        bound: Dist,
    ) -> Result<Self, SpaceError> {
        Self::build(n, upper, Some(bound))
    }

    fn build(n: usize, upper: Vec<Dist>, bound: Option<Dist>) -> Result<Self, SpaceError> {
        let expected = pair_count(n);
        if upper.len() != expected {
            return Err(SpaceError::WrongUpperLength {
                n,
                expected,
                got: upper.len(),
            });
        }
        let sp = MetricSpace {
            n,
            upper,
            diameter_bound: bound,
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let d = sp.dist(i, j);
                if d == 0 {
                    return Err(SpaceError::NonPositiveDistance { x: i, y: j });
                }
                if let Some(b) = bound {
                    if d > b {
                        return Err(SpaceError::DiameterExceeded {
                            x: i,
                            y: j,
                            d,
                            bound: b,
                        });
                    }
                }
            }
        }
        sp.check_triangles()?;
        Ok(sp)
    }

    /// Triangle inequality over all triples, reporting the first failure
    /// as a path witness `d(x,z) > d(x,y) + d(y,z)`.
    fn check_triangles(&self) -> Result<(), SpaceError> {
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                for z in (y + 1)..self.n {
                    let dxy = self.dist(x, y);
                    let dxz = self.dist(x, z);
                    let dyz = self.dist(y, z);
                    if dyz > dxy + dxz {
                        return Err(SpaceError::TriangleViolation {
                            x: y,
                            y: x,
                            z,
                            dxz: dyz,
                            dxy,
                            dyz: dxz,
                        });
                    }
                    if dxz > dxy + dyz {
                        return Err(SpaceError::TriangleViolation {
                            x,
                            y,
                            z,
                            dxz,
                            dxy,
                            dyz,
                        });
                    }
                    if dxy > dxz + dyz {
                        return Err(SpaceError::TriangleViolation {
                            x,
                            y: z,
                            z: y,
                            dxz: dxy,
                            dxy: dxz,
                            dyz,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Internal constructor for restrictions and relabelings of already
    /// valid spaces.
    pub(crate) fn from_parts_unchecked(n: usize, upper: Vec<Dist>, bound: Option<Dist>) -> Self {
        debug_assert_eq!(upper.len(), pair_count(n));
        MetricSpace {
            n,
            upper,
            diameter_bound: bound,
        }
    }

    /// The empty space: unit of the disjoint-sum operations.
    pub fn empty() -> Self {
        MetricSpace {
            n: 0,
            upper: Vec::new(),
            diameter_bound: None,
        }
    }

    /// A single point.
    pub fn point() -> Self {
        MetricSpace {
            n: 1,
            upper: Vec::new(),
            diameter_bound: None,
        }
    }

    /// A pair of points at the given positive distance.
    pub fn pair(d: Dist) -> Self {
        assert!(d >= 1, "pair distance must be positive");
        MetricSpace {
            n: 2,
            upper: vec![d],
            diameter_bound: None,
        }
    }

    /// The `n`-point space with every distance equal to `d` (a `d`-clique).
    pub fn clique(n: usize, d: Dist) -> Self {
        assert!(d >= 1, "clique distance must be positive");
        MetricSpace {
            n,
            upper: vec![d; pair_count(n)],
            diameter_bound: None,
        }
    }

    /// Rebuilds the canonical representative a code denotes.
    pub fn from_code(code: &CanonicalCode) -> Self {
        let sp = MetricSpace {
            n: code.n,
            upper: code.upper.clone(),
            diameter_bound: None,
        };
        debug_assert!(sp.check_triangles().is_ok());
        sp
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn diameter_bound(&self) -> Option<Dist> {
        self.diameter_bound
    }

    /// Upper triangle in row-major order.
    pub fn upper(&self) -> &[Dist] {
        &self.upper
    }

    /// Distance between two points; `0` exactly when `i == j`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> Dist {
        if i == j {
            return 0;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.upper[pair_index(self.n, a, b)]
    }

    /// Largest distance occurring in the space (`0` for fewer than 2 points).
    pub fn max_dist(&self) -> Dist {
        self.upper.iter().copied().max().unwrap_or(0)
    }

    /// Restriction to a subset of points, in the order given.
    ///
    /// Restrictions of valid spaces are valid (the class is hereditary).
    pub fn induced(&self, subset: &[usize]) -> MetricSpace {
        let m = subset.len();
        let mut upper = Vec::with_capacity(pair_count(m));
        for a in 0..m {
            for b in (a + 1)..m {
                upper.push(self.dist(subset[a], subset[b]));
            }
        }
        MetricSpace::from_parts_unchecked(m, upper, self.diameter_bound)
    }

    /// The space with point `i` sent to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> MetricSpace {
        debug_assert_eq!(perm.len(), self.n);
        let mut upper = vec![0; self.upper.len()];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let (a, b) = if perm[i] < perm[j] {
                    (perm[i], perm[j])
                } else {
                    (perm[j], perm[i])
                };
                upper[pair_index(self.n, a, b)] = self.dist(i, j);
            }
        }
        MetricSpace::from_parts_unchecked(self.n, upper, self.diameter_bound)
    }

    /// One sorted triple per 3-subset of points, in lexicographic subset
    /// order of the underlying points.
    pub fn triangle_types(&self) -> Vec<TriangleType> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                for z in (y + 1)..self.n {
                    out.push(TriangleType::from_sides(
                        self.dist(x, y),
                        self.dist(x, z),
                        self.dist(y, z),
                    ));
                }
            }
        }
        out
    }

    /// True iff some injection of `self`'s points into `host`'s points
    /// preserves all distances exactly.
    pub fn embeds_into(&self, host: &MetricSpace) -> bool {
        if self.n > host.n {
            return false;
        }
        let mut image = vec![usize::MAX; self.n];
        let mut used = vec![false; host.n];
        self.embed_from(host, 0, &mut image, &mut used, None)
    }

    /// As [`MetricSpace::embeds_into`], restricted to embeddings whose image
    /// contains the host point `anchor`. Used to check only the constraints
    /// a newly added point can introduce.
    pub fn embeds_into_using(&self, host: &MetricSpace, anchor: usize) -> bool {
        if self.n > host.n || self.n == 0 {
            return false;
        }
        let mut image = vec![usize::MAX; self.n];
        let mut used = vec![false; host.n];
        self.embed_from(host, 0, &mut image, &mut used, Some(anchor))
    }

    fn embed_from(
        &self,
        host: &MetricSpace,
        next: usize,
        image: &mut [usize],
        used: &mut [bool],
        anchor: Option<usize>,
    ) -> bool {
        if next == self.n {
            return match anchor {
                Some(a) => used[a],
                None => true,
            };
        }
        'cand: for v in 0..host.n {
            if used[v] {
                continue;
            }
            for prev in 0..next {
                if host.dist(image[prev], v) != self.dist(prev, next) {
                    continue 'cand;
                }
            }
            image[next] = v;
            used[v] = true;
            if self.embed_from(host, next + 1, image, used, anchor) {
                return true;
            }
            used[v] = false;
            image[next] = usize::MAX;
        }
        false
    }

    /// Canonical code of the isometry class: equal codes iff a
    /// distance-preserving bijection exists, independent of labeling.
    ///
    /// Colors points by iterated distance-multiset refinement, then
    /// backtracks over the refinement-compatible orderings and keeps the
    /// cellwise minimal distance matrix.
    pub fn canonical_code(&self) -> CanonicalCode {
        if self.n <= 1 {
            return CanonicalCode {
                n: self.n,
                upper: Vec::new(),
            };
        }
        if self.n == 2 {
            return CanonicalCode {
                n: 2,
                upper: self.upper.clone(),
            };
        }

        let colors = self.refine_colors();
        // Positions are grouped by color class in class order; the search
        // permutes points freely within a class.
        let mut slots: Vec<usize> = (0..self.n).collect();
        slots.sort_by_key(|&p| (colors[p], p));
        let slot_colors: Vec<usize> = slots.iter().map(|&p| colors[p]).collect();

        let mut search = CanonSearch {
            sp: self,
            colors: &colors,
            slot_colors: &slot_colors,
            perm: Vec::with_capacity(self.n),
            used: vec![false; self.n],
            cells: Vec::with_capacity(pair_count(self.n)),
            best_cells: None,
            best_perm: Vec::new(),
        };
        search.descend();

        let perm = search.best_perm;
        debug_assert_eq!(perm.len(), self.n);
        let mut upper = Vec::with_capacity(pair_count(self.n));
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                upper.push(self.dist(perm[i], perm[j]));
            }
        }
        CanonicalCode { n: self.n, upper }
    }

    /// Stable point coloring: start from sorted distance multisets and
    /// refine by neighboring (distance, color) multisets until the
    /// partition stops splitting. Class ids are assigned in sorted key
    /// order, which is labeling-invariant.
    fn refine_colors(&self) -> Vec<usize> {
        let n = self.n;
        let mut colors = vec![0usize; n];
        loop {
            let mut keys: Vec<(usize, Vec<(Dist, usize)>)> = Vec::with_capacity(n);
            for v in 0..n {
                let mut row: Vec<(Dist, usize)> = (0..n)
                    .filter(|&u| u != v)
                    .map(|u| (self.dist(v, u), colors[u]))
                    .collect();
                row.sort_unstable();
                keys.push((colors[v], row));
            }
            let mut uniq = keys.clone();
            uniq.sort_unstable();
            uniq.dedup();
            let next: Vec<usize> = keys
                .iter()
                .map(|k| uniq.binary_search(k).expect("own key"))
                .collect();
            if next == colors {
                return colors;
            }
            colors = next;
        }
    }
}

impl fmt::Display for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.n)?;
        for (k, d) in self.upper.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// Backtracking state for the canonical-form search.
///
/// Cells are compared in column order: fixing position `p` determines the
/// distances to all earlier positions, so prefixes grow monotonically and
/// branches that exceed the best known prefix are cut.
struct CanonSearch<'a> {
    sp: &'a MetricSpace,
    colors: &'a [usize],
    slot_colors: &'a [usize],
    perm: Vec<usize>,
    used: Vec<bool>,
    cells: Vec<Dist>,
    best_cells: Option<Vec<Dist>>,
    best_perm: Vec<usize>,
}

impl CanonSearch<'_> {
    /// Invariant: whenever `best_cells` is set, the current cell prefix
    /// equals the corresponding prefix of `best_cells` (branches that go
    /// strictly below clear the best, since all their completions win).
    /// A leaf reached with a surviving best is therefore an automorphic
    /// copy of it and can be ignored.
    fn descend(&mut self) {
        let depth = self.perm.len();
        let n = self.sp.n();
        if depth == n {
            if self.best_cells.is_none() {
                self.best_cells = Some(self.cells.clone());
                self.best_perm = self.perm.clone();
            }
            return;
        }
        let want = self.slot_colors[depth];
        let base = self.cells.len();
        for v in 0..n {
            if self.used[v] || self.colors[v] != want {
                continue;
            }
            for &u in self.perm.iter() {
                self.cells.push(self.sp.dist(u, v));
            }
            let mut prune = false;
            if let Some(best) = &self.best_cells {
                match self.cells[base..].cmp(&best[base..self.cells.len()]) {
                    std::cmp::Ordering::Greater => prune = true,
                    std::cmp::Ordering::Less => self.best_cells = None,
                    std::cmp::Ordering::Equal => {}
                }
            }
            if !prune {
                self.perm.push(v);
                self.used[v] = true;
                self.descend();
                self.used[v] = false;
                self.perm.pop();
            }
            self.cells.truncate(base);
        }
    }
}

/// A sorted metric triple of positive side lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriangleType {
    sides: [Dist; 3],
}

impl TriangleType {
    /// Sorts the sides; panics if the triple is not metric or not positive.
    pub fn new(a: Dist, b: Dist, c: Dist) -> Self {
        let t = Self::from_sides(a, b, c);
        assert!(t.sides[0] >= 1, "triangle sides must be positive");
        assert!(
            t.sides[2] <= t.sides[0] + t.sides[1],
            "not a metric triple: {:?}",
            t.sides
        );
        t
    }

    fn from_sides(a: Dist, b: Dist, c: Dist) -> Self {
        let mut sides = [a, b, c];
        sides.sort_unstable();
        TriangleType { sides }
    }

    /// Checks the metric condition without panicking.
    pub fn try_new(a: Dist, b: Dist, c: Dist) -> Option<Self> {
        let t = Self::from_sides(a, b, c);
        if t.sides[0] >= 1 && t.sides[2] <= t.sides[0] + t.sides[1] {
            Some(t)
        } else {
            None
        }
    }

    pub fn sides(&self) -> (Dist, Dist, Dist) {
        (self.sides[0], self.sides[1], self.sides[2])
    }

    pub fn min_side(&self) -> Dist {
        self.sides[0]
    }

    pub fn perimeter(&self) -> Dist {
        self.sides.iter().sum()
    }
}

impl fmt::Display for TriangleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.sides[0], self.sides[1], self.sides[2])
    }
}

/// A totally ordered token identifying an isometry class: the point count
/// followed by the canonical upper triangle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    n: usize,
    upper: Vec<Dist>,
}

impl CanonicalCode {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Canonical upper triangle in row-major order.
    pub fn upper(&self) -> &[Dist] {
        &self.upper
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.n)?;
        for (k, d) in self.upper.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn space(n: usize, upper: &[Dist]) -> MetricSpace {
        MetricSpace::new(n, upper.to_vec()).unwrap()
    }

    /// Test-only oracle: isometry by exhaustive permutation search.
    fn isometric_by_permutation(a: &MetricSpace, b: &MetricSpace) -> bool {
        if a.n() != b.n() {
            return false;
        }
        (0..a.n())
            .permutations(a.n())
            .any(|perm| a.relabel(&perm) == *b)
    }

    #[test]
    fn make_space_single_point() {
        let sp = space(1, &[]);
        assert_eq!(sp.n(), 1);
        assert!(sp.triangle_types().is_empty());
    }

    #[test]
    fn make_space_rejects_triangle_violation() {
        let err = MetricSpace::new(3, vec![1, 1, 3]).unwrap_err();
        assert!(matches!(err, SpaceError::TriangleViolation { .. }));
    }

    #[test]
    fn make_space_rejects_zero_distance() {
        let err = MetricSpace::new(2, vec![0]).unwrap_err();
        assert_eq!(err, SpaceError::NonPositiveDistance { x: 0, y: 1 });
    }

    #[test]
    fn make_space_rejects_wrong_length() {
        let err = MetricSpace::new(3, vec![1, 2]).unwrap_err();
        assert!(matches!(
            err,
            SpaceError::WrongUpperLength {
                expected: 3,
                got: 2,
                ..
            }
        ));
    }

    #[test]
    fn make_space_valid_triangle() {
        let sp = space(3, &[1, 2, 2]);
        assert_eq!(sp.triangle_types(), vec![TriangleType::new(1, 2, 2)]);
    }

    #[test]
    fn diameter_bound_checked() {
        assert!(MetricSpace::with_diameter_bound(2, vec![3], 3).is_ok());
        let err = MetricSpace::with_diameter_bound(2, vec![4], 3).unwrap_err();
        assert!(matches!(
            err,
            SpaceError::DiameterExceeded { d: 4, bound: 3, .. }
        ));
    }

    #[test]
    fn code_invariant_under_relabeling() {
        let a = space(3, &[1, 2, 1]);
        let b = space(3, &[2, 1, 1]);
        assert_eq!(a.canonical_code(), b.canonical_code());
    }

    #[test]
    fn single_point_code_is_fixed() {
        let code = MetricSpace::point().canonical_code();
        assert_eq!(code.size(), 1);
        assert!(code.upper().is_empty());
        assert_ne!(code, MetricSpace::empty().canonical_code());
    }

    #[test]
    fn nine_codes_on_three_points_up_to_delta_three() {
        // All 27 labeled triples with entries in 1..=3; brute-force dedup by
        // permutation search must agree with code dedup.
        let mut by_code = std::collections::BTreeSet::new();
        let mut reps: Vec<MetricSpace> = Vec::new();
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 1..=3 {
                    let Ok(sp) = MetricSpace::new(3, vec![a, b, c]) else {
                        continue;
                    };
                    by_code.insert(sp.canonical_code());
                    if !reps.iter().any(|r| isometric_by_permutation(r, &sp)) {
                        reps.push(sp);
                    }
                }
            }
        }
        assert_eq!(by_code.len(), 9);
        assert_eq!(reps.len(), 9);
    }

    #[test]
    fn embeds_examples() {
        let point = MetricSpace::point();
        let triangle = space(3, &[3, 3, 3]);
        assert!(point.embeds_into(&triangle));
        assert!(triangle.embeds_into(&triangle));
        assert!(!MetricSpace::pair(1).embeds_into(&triangle));
        assert!(MetricSpace::empty().embeds_into(&point));
    }

    #[test]
    fn embeds_anchored() {
        // (1,2,2) extends a distance-1 pair by point 2; the pair at distance
        // 1 embeds, but not through the new point.
        let tri = space(3, &[1, 2, 2]);
        let pair1 = MetricSpace::pair(1);
        assert!(pair1.embeds_into_using(&tri, 0));
        assert!(!pair1.embeds_into_using(&tri, 2));
        assert!(MetricSpace::pair(2).embeds_into_using(&tri, 2));
    }

    #[test]
    fn induced_examples() {
        let sp = space(3, &[1, 2, 2]);
        assert_eq!(sp.induced(&[0, 1, 2]), sp);
        assert_eq!(sp.induced(&[]), MetricSpace::empty());
        assert_eq!(sp.induced(&[0, 2]), MetricSpace::pair(2));
    }

    #[test]
    fn triangle_types_count() {
        let sp = space(4, &[1, 1, 1, 1, 1, 1]);
        assert_eq!(sp.triangle_types().len(), 4);
        assert!(MetricSpace::point().triangle_types().is_empty());
    }

    /// Exhaustive completeness check at small size: equal codes iff
    /// permutation-isometric, over every valid 4-point space with
    /// distances at most 3.
    #[test]
    fn code_is_complete_invariant_n4() {
        let mut all = Vec::new();
        let m = 6;
        let mut upper = vec![1u32; m];
        loop {
            if let Ok(sp) = MetricSpace::new(4, upper.clone()) {
                all.push(sp);
            }
            let mut k = 0;
            while k < m && upper[k] == 3 {
                upper[k] = 1;
                k += 1;
            }
            if k == m {
                break;
            }
            upper[k] += 1;
        }
        let codes: Vec<CanonicalCode> = all.iter().map(|s| s.canonical_code()).collect();
        for i in 0..all.len() {
            for j in (i + 1)..all.len() {
                let iso = isometric_by_permutation(&all[i], &all[j]);
                assert_eq!(codes[i] == codes[j], iso, "{} vs {}", all[i], all[j]);
            }
        }
    }

    /// Five points, two distance letters: all 1024 labeled spaces (every
    /// `{1,2}`-assignment is metric). Codes must agree within isometry
    /// classes and separate distinct ones.
    #[test]
    fn code_is_complete_invariant_n5_two_letters() {
        let mut groups: BTreeMap<CanonicalCode, Vec<MetricSpace>> = BTreeMap::new();
        for bits in 0u32..(1 << 10) {
            let upper: Vec<Dist> = (0..10).map(|k| 1 + ((bits >> k) & 1)).collect();
            let sp = MetricSpace::new(5, upper).unwrap();
            groups.entry(sp.canonical_code()).or_default().push(sp);
        }
        // 34 graphs on 5 vertices up to isomorphism.
        assert_eq!(groups.len(), 34);
        let reps: Vec<&MetricSpace> = groups.values().map(|g| &g[0]).collect();
        for group in groups.values() {
            for member in group {
                assert!(isometric_by_permutation(&group[0], member));
            }
        }
        for i in 0..reps.len() {
            for j in (i + 1)..reps.len() {
                assert!(!isometric_by_permutation(reps[i], reps[j]));
            }
        }
    }

    fn arb_space(max_n: usize, delta: Dist) -> impl Strategy<Value = MetricSpace> {
        (0..=max_n)
            .prop_flat_map(move |n| {
                proptest::collection::vec(1..=delta, n * n.saturating_sub(1) / 2)
                    .prop_map(move |upper| MetricSpace::new(n, upper))
            })
            .prop_filter_map("metric", |r| r.ok())
    }

    proptest! {
        #[test]
        fn code_survives_random_relabeling(sp in arb_space(5, 3), seed in any::<u64>()) {
            let n = sp.n();
            let mut perm: Vec<usize> = (0..n).collect();
            // Cheap seeded shuffle.
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let j = (s >> 33) as usize % (i + 1);
                perm.swap(i, j);
            }
            prop_assert_eq!(sp.relabel(&perm).canonical_code(), sp.canonical_code());
        }

        #[test]
        fn induced_is_hereditary_and_embeds_transitive(sp in arb_space(5, 3), mask1 in any::<u32>(), mask2 in any::<u32>()) {
            let s1: Vec<usize> = (0..sp.n()).filter(|i| mask1 & (1 << i) != 0).collect();
            let b = sp.induced(&s1);
            prop_assert!(MetricSpace::new(b.n(), b.upper().to_vec()).is_ok());
            let s2: Vec<usize> = (0..b.n()).filter(|i| mask2 & (1 << i) != 0).collect();
            let c = b.induced(&s2);
            prop_assert!(b.embeds_into(&sp));
            prop_assert!(c.embeds_into(&b));
            prop_assert!(c.embeds_into(&sp));
        }

        #[test]
        fn from_code_round_trips(sp in arb_space(5, 3)) {
            let code = sp.canonical_code();
            let rep = MetricSpace::from_code(&code);
            prop_assert_eq!(rep.canonical_code(), code);
        }
    }
}
