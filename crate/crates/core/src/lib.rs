//! Ages of metrically homogeneous graphs of generic type.
//!
//! This crate realizes, at desk scale, the combinatorics of the classes
//! `A^delta_{K1,K2,C0,C1,S}` of finite integer-distance metric spaces:
//!
//! - [`metric`]: finite metric spaces with integer distances, canonical
//!   forms, isometric embedding, induced subspaces;
//! - [`params`]: parameter sequences `(delta, K1, K2, C0, C1, S)`,
//!   admissibility classification, the forbidden-triangle predicate, and
//!   age membership;
//! - [`sumop`]: the disjoint-sum operator `+_M`, the window of magic
//!   parameters `M`, decomposition into indecomposables, the freeness
//!   order, and exhaustive closure/freeness verification;
//! - [`enumerate`]: isomorph-free enumeration of age members by size,
//!   profiles, indecomposable censuses, and a naive labeled oracle;
//! - [`algebra`]: exact-rational truncated power series, the Euler
//!   transform, the orbit-algebra product, and the two polynomiality
//!   checks (Hilbert identity and generator-monomial rank);
//! - [`antipodal`]: the bipartite antipodal diameter-3 class, classified
//!   by signatures `(k, m, n)` with three free generators.
//!
//! All arithmetic is exact: integer distances, big-integer rationals in
//! the algebra, no floating point anywhere.
//!
//! ```
//! use mhg_core::{AgeEnumerator, Budget, ParameterSequence};
//! use mhg_core::algebra::verify_hilbert;
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let p = ParameterSequence::numeric(3, 1, 3, 10, 11)?;
//! let mut age = AgeEnumerator::new(p, Budget::default());
//! assert_eq!(age.profile(4)?.counts(), &[1, 1, 3, 9, 48]);
//!
//! // The profile equals the Euler transform of the indecomposable
//! // census for every magic value of M.
//! for m in [2, 3] {
//!     assert!(verify_hilbert(&mut age, m, 5)?.passed());
//! }
//! # Ok(())
//! # }
//! ```

pub mod algebra;
pub mod antipodal;
pub mod enumerate;
pub mod metric;
pub mod params;
pub mod series;
pub mod sumop;

pub use algebra::{
    euler_transform, verify_hilbert, verify_polynomial_rank, HilbertReport, OrbitAlgebra,
    OrbitFunction, RankReport,
};
pub use antipodal::{
    alpha, antipodal_params, antipodal_profile, beta, signature_decompose, signature_leq,
    verify_antipodal, AntipodalReport, AntipodalSignature,
};
pub use enumerate::{
    oracle_enumerate, AgeEnumerator, Budget, Census, EnumError, Profile, ORACLE_DEFAULT_BOUND,
};
pub use metric::{CanonicalCode, Dist, MetricSpace, SpaceError, TriangleType};
pub use params::{
    classify_admissible, in_age, triangle_allowed, AdmissibilityVerdict, ExtNat, HensonSet,
    ParamError, ParameterSequence, Violation,
};
pub use series::RationalSeries;
pub use sumop::{
    decompose, is_indecomposable, leq, magic_range, sum_all, sum_m, verify_closure,
    verify_freeness, ClosureReport, Decomposition, FreenessReport, MagicRange, RangeError,
};
