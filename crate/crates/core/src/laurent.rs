//! Truncated Laurent series in `ε` with real coefficients.
//!
//! A series is stored as a run of coefficients starting at its valuation and
//! ending just before its truncation order. Coefficients at or beyond the
//! truncation order are *unknown*, not zero, and every operation propagates
//! the tightest truncation that the inputs justify.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative size below which a leading coefficient produced by cancellation
/// counts as zero.
pub const CANCELLATION_THRESHOLD: f64 = 1e-14;

// Truncation order of the exact zero; no other series is exact.
const EXACT: i64 = i64::MAX;

/// The non-Archimedean valuation: index of the first nonzero coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    /// `e^{-ν}`, with `e^{-∞} = 0`.
    pub fn norm(self) -> f64 {
        match self {
            Valuation::Finite(k) => libm::exp(-(k as f64)),
            Valuation::Infinite => 0.0,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(k) => Some(k),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(k) => write!(f, "{k}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// An element of the Laurent series field, known up to `O(ε^trunc_order)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(into = "repr::SeriesRepr", try_from = "repr::SeriesRepr")
)]
pub struct LaurentSeries {
    // exponent of coeffs[0]; equals trunc_order when no coefficient is known
    // to be nonzero
    start: i64,
    coeffs: Vec<f64>,
    trunc_order: i64,
}

impl LaurentSeries {
    /// The exact zero.
    pub fn zero() -> Self {
        Self::zero_to(EXACT)
    }

    /// A series whose known coefficients all vanish: `O(ε^trunc_order)`.
    pub fn zero_to(trunc_order: i64) -> Self {
        Self {
            start: trunc_order,
            coeffs: Vec::new(),
            trunc_order,
        }
    }

    /// `1 + O(ε^trunc_order)`.
    pub fn one(trunc_order: i64) -> Self {
        Self::monomial(0, 1.0, trunc_order)
    }

    /// `coeff · ε^k + O(ε^trunc_order)`.
    pub fn monomial(k: i64, coeff: f64, trunc_order: i64) -> Self {
        debug_assert!(trunc_order != EXACT);
        if k >= trunc_order {
            return Self::zero_to(trunc_order);
        }
        let mut coeffs = vec![0.0; (trunc_order - k) as usize];
        coeffs[0] = coeff;
        Self::normalized(k, coeffs, trunc_order, 0.0)
    }

    /// Builds `Σ coeffs[i] ε^{start+i} + O(ε^trunc_order)`.
    ///
    /// `coeffs.len()` must equal `trunc_order - start`; leading exact zeros
    /// are stripped.
    pub fn new(start: i64, coeffs: Vec<f64>, trunc_order: i64) -> Result<Self> {
        if start > trunc_order || (trunc_order - start) as u64 != coeffs.len() as u64 {
            return Err(Error::InvalidInput(alloc::format!(
                "Laurent series needs trunc_order - start = {} coefficients, got {}",
                trunc_order.saturating_sub(start),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite Laurent coefficient".into()));
        }
        Ok(Self::normalized(start, coeffs, trunc_order, 0.0))
    }

    /// Series whose truncation order is one past the last given coefficient.
    pub fn from_coeffs(start: i64, coeffs: Vec<f64>) -> Result<Self> {
        let trunc = start + coeffs.len() as i64;
        Self::new(start, coeffs, trunc)
    }

    fn normalized(start: i64, mut coeffs: Vec<f64>, trunc_order: i64, scale: f64) -> Self {
        let cutoff = CANCELLATION_THRESHOLD * scale;
        let lead = coeffs
            .iter()
            .position(|c| c.abs() > cutoff && *c != 0.0)
            .unwrap_or(coeffs.len());
        coeffs.drain(..lead);
        if coeffs.is_empty() {
            return Self::zero_to(trunc_order);
        }
        Self {
            start: start + lead as i64,
            coeffs,
            trunc_order,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::Finite(self.start)
        }
    }

    /// Non-Archimedean norm `|x| = e^{-ν(x)}`.
    pub fn norm(&self) -> f64 {
        self.valuation().norm()
    }

    pub fn trunc_order(&self) -> i64 {
        self.trunc_order
    }

    /// Known coefficients, starting at the valuation.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `ε^k`, or `None` when it lies beyond the truncation.
    pub fn coeff(&self, k: i64) -> Option<f64> {
        if k >= self.trunc_order {
            None
        } else if k < self.start {
            Some(0.0)
        } else {
            Some(self.coeffs[(k - self.start) as usize])
        }
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add_series(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub_series(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let trunc = self.trunc_order.min(other.trunc_order);
        let start = self.start.min(other.start).min(trunc);
        if start == trunc {
            return Self::zero_to(trunc);
        }
        let len = (trunc - start) as usize;
        let mut coeffs = vec![0.0; len];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let e = start + k as i64;
            *c = self.coeff(e).unwrap_or(0.0) + sign * other.coeff(e).unwrap_or(0.0);
        }
        let scale = self.max_abs().max(other.max_abs());
        Self::normalized(start, coeffs, trunc, scale)
    }

    /// Cauchy product.
    pub fn mul_series(&self, other: &Self) -> Self {
        let trunc = self
            .start
            .saturating_add(other.trunc_order)
            .min(other.start.saturating_add(self.trunc_order));
        if self.is_zero() || other.is_zero() {
            return Self::zero_to(trunc);
        }
        let start = self.start + other.start;
        let len = (trunc - start) as usize;
        let mut coeffs = vec![0.0; len];
        for (n, c) in coeffs.iter_mut().enumerate() {
            let hi = n.min(self.coeffs.len() - 1);
            let mut acc = 0.0;
            for i in 0..=hi {
                if let Some(b) = other.coeffs.get(n - i) {
                    acc += self.coeffs[i] * b;
                }
            }
            *c = acc;
        }
        Self::normalized(start, coeffs, trunc, 0.0)
    }

    /// Multiplicative inverse, known to the same relative precision.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.coeffs.len();
        let a0 = self.coeffs[0];
        let mut out = vec![0.0; prec];
        out[0] = 1.0 / a0;
        for n in 1..prec {
            let mut acc = 0.0;
            for i in 1..=n {
                acc += self.coeffs[i] * out[n - i];
            }
            out[n] = -acc / a0;
        }
        Ok(Self::normalized(
            -self.start,
            out,
            -self.start + prec as i64,
            0.0,
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_series(&other.inv()?))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Self::normalized(self.start, coeffs, self.trunc_order, 0.0)
    }

    /// Compares coefficient-wise up to the shared truncation order.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let trunc = self.trunc_order.min(other.trunc_order);
        let lo = self.start.min(other.start);
        (lo..trunc)
            .all(|k| (self.coeff(k).unwrap_or(0.0) - other.coeff(k).unwrap_or(0.0)).abs() <= tol)
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: Self) -> LaurentSeries {
        self.add_series(rhs)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: Self) -> LaurentSeries {
        self.sub_series(rhs)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: Self) -> LaurentSeries {
        self.mul_series(rhs)
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(-1.0)
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "{c}ε^{}", self.start + i as i64)?;
        }
        if self.trunc_order != EXACT {
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "O(ε^{})", self.trunc_order)?;
        } else if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(feature = "serde")]
mod repr {
    use super::*;

    /// Wire form: `{"valuation": k | null, "coeffs": [...], "trunc_order": m}`.
    #[derive(Debug, serde::Serialize, serde::Deserialize)]
    pub struct SeriesRepr {
        valuation: Option<i64>,
        coeffs: Vec<f64>,
        trunc_order: i64,
    }

    impl From<LaurentSeries> for SeriesRepr {
        fn from(s: LaurentSeries) -> Self {
            SeriesRepr {
                valuation: s.valuation().finite(),
                coeffs: s.coeffs,
                trunc_order: s.trunc_order,
            }
        }
    }

    impl TryFrom<SeriesRepr> for LaurentSeries {
        type Error = Error;
        fn try_from(r: SeriesRepr) -> Result<Self> {
            match r.valuation {
                None if r.coeffs.is_empty() => Ok(LaurentSeries::zero_to(r.trunc_order)),
                None => Err(Error::InvalidInput(
                    "zero series must not carry coefficients".into(),
                )),
                Some(k) => {
                    let s = LaurentSeries::new(k, r.coeffs, r.trunc_order)?;
                    if s.valuation() != Valuation::Finite(k) {
                        return Err(Error::InvalidInput(
                            "leading Laurent coefficient must be nonzero".into(),
                        ));
                    }
                    Ok(s)
                }
            }
        }
    }
}
