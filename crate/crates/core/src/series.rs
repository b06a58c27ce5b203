//! Truncated formal power series with exact big-rational coefficients.
//!
//! Just enough arithmetic for Hilbert-series work: addition, truncated
//! multiplication, and the expansions of `(1 - x^d)^(-c)` needed by the
//! Euler transform. All operations respect the truncation order.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficients indexed `0..=order`; the truncation order is `len - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    /// Wraps explicit coefficients; at least the constant term must be given.
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least a constant term");
        RationalSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        RationalSeries {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigRational::one();
        s
    }

    pub fn from_integers(values: &[u64]) -> Self {
        RationalSeries::new(
            values
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Sum, truncated to the smaller order.
    pub fn add(&self, other: &RationalSeries) -> RationalSeries {
        let order = self.order().min(other.order());
        RationalSeries::new(
            (0..=order)
                .map(|k| &self.coeffs[k] + &other.coeffs[k])
                .collect(),
        )
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, other: &RationalSeries) -> RationalSeries {
        let order = self.order().min(other.order());
        let mut coeffs = vec![BigRational::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        RationalSeries::new(coeffs)
    }

    /// The expansion of `(1 - x^d)^(-c)`: coefficient `binom(c-1+k, k)` at
    /// `x^(d*k)`, truncated at `order`. Requires `d >= 1`, `c >= 1`.
    pub fn inv_one_minus_pow(d: usize, c: u64, order: usize) -> RationalSeries {
        assert!(d >= 1 && c >= 1);
        let mut s = Self::zero(order);
        let mut binom = BigInt::one();
        let mut k = 0usize;
        loop {
            let pos = d * k;
            if pos > order {
                break;
            }
            s.coeffs[pos] = BigRational::from_integer(binom.clone());
            k += 1;
            // binom(c-1+k, k) from binom(c-1+k-1, k-1): exact at each step.
            binom = binom * BigInt::from(c - 1 + k as u64) / BigInt::from(k as u64);
        }
        s
    }
}
