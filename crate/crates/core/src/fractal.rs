//! The fractal real line `R^alpha`.
//!
//! An element `a^alpha` is stored by its pre-image `a`. Addition and
//! multiplication act on the pre-images, so the algebraic identities of the
//! set (commutativity, associativity, distributivity, neutral elements) hold
//! exactly up to rounding of ordinary `f64` arithmetic on the bases.
//!
//! Negative bases follow the signed-power convention
//! `real_value(a^alpha) = sign(a)·|a|^alpha`, which gives every element an
//! additive inverse. Order is compared base-wise.
//!
//! ```
//! use fractal_hh::fractal::FractalNumber;
//!
//! let alpha = 0.5;
//! let two = FractalNumber::new(2.0, alpha).unwrap();
//! let three = FractalNumber::new(3.0, alpha).unwrap();
//! assert_eq!(two.f_add(&three).unwrap().base(), 5.0);
//! assert_eq!(two.f_mul(&three).unwrap().base(), 6.0);
//! ```

use std::cmp::Ordering;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractalNumber {
    base: f64,
    alpha: f64,
}

impl FractalNumber {
    pub fn new(base: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if base.is_nan() {
            return Err(domain("fractal number base is NaN"));
        }
        Ok(FractalNumber { base, alpha })
    }

    pub fn zero(alpha: f64) -> Result<Self> {
        Self::new(0.0, alpha)
    }

    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(1.0, alpha)
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.alpha == other.alpha {
            Ok(())
        } else {
            Err(Error::AlphaMismatch {
                left: self.alpha,
                right: other.alpha,
            })
        }
    }

    /// `a^alpha + b^alpha = (a + b)^alpha`
    pub fn f_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FractalNumber {
            base: self.base + other.base,
            alpha: self.alpha,
        })
    }

    /// `a^alpha · b^alpha = (a b)^alpha`
    pub fn f_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(FractalNumber {
            base: self.base * other.base,
            alpha: self.alpha,
        })
    }

    pub fn f_neg(&self) -> Self {
        FractalNumber {
            base: -self.base,
            alpha: self.alpha,
        }
    }

    pub fn f_sub(&self, other: &Self) -> Result<Self> {
        self.f_add(&other.f_neg())
    }

    /// Image of the element on the ordinary real line.
    pub fn real_value(&self) -> f64 {
        signed_pow(self.base, self.alpha)
    }

    /// Base-wise order; `None` when the alphas differ.
    pub fn f_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.alpha != other.alpha {
            return None;
        }
        self.base.partial_cmp(&other.base)
    }
}

pub(crate) fn signed_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(p)
    }
}
