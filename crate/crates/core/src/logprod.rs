//! Complex numbers stored as `(log|z|, arg z)` so that products of many
//! factors never overflow.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, MulAssign};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Relative size below which a signed sum is treated as cancelled away.
pub const DEFAULT_PRECISION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogProduct {
    pub log_magnitude: f64,
    /// In `(-π, π]`.
    pub phase: f64,
    pub zero: bool,
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

impl LogProduct {
    pub const ONE: LogProduct = LogProduct { log_magnitude: 0.0, phase: 0.0, zero: false };
    pub const ZERO: LogProduct = LogProduct { log_magnitude: f64::NEG_INFINITY, phase: 0.0, zero: true };

    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        LogProduct { log_magnitude, phase: wrap_phase(phase), zero: false }
    }

    /// `exp(z)`.
    pub fn from_log(z: Complex64) -> Self {
        LogProduct::new(z.re, z.im)
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            LogProduct::ZERO
        } else {
            LogProduct::new(z.norm().ln(), z.arg())
        }
    }

    pub fn from_real(x: f64) -> Self {
        LogProduct::from_complex(Complex64::new(x, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Principal logarithm; `None` for zero.
    pub fn ln(&self) -> Option<Complex64> {
        (!self.zero).then(|| Complex64::new(self.log_magnitude, self.phase))
    }

    /// The value as a double-precision complex number, if it fits.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.zero {
            return Some(Complex64::new(0.0, 0.0));
        }
        let r = self.log_magnitude.exp();
        (r.is_finite()).then(|| Complex64::from_polar(r, self.phase))
    }

    pub fn recip(&self) -> Result<LogProduct> {
        if self.zero {
            return Err(Error::ZeroDivision("reciprocal".into()));
        }
        Ok(LogProduct::new(-self.log_magnitude, -self.phase))
    }

    pub fn div(&self, other: &LogProduct) -> Result<LogProduct> {
        Ok(*self * other.recip()?)
    }

    pub fn powi(&self, k: i64) -> LogProduct {
        if self.zero {
            return if k == 0 { LogProduct::ONE } else { LogProduct::ZERO };
        }
        LogProduct::new(self.log_magnitude * k as f64, self.phase * k as f64)
    }

    pub fn neg(&self) -> LogProduct {
        if self.zero {
            return *self;
        }
        LogProduct::new(self.log_magnitude, self.phase + PI)
    }

    /// `Σ c_i t_i`, evaluated after scaling every term by the largest
    /// magnitude. Fails if the result is below `floor` times the largest term.
    pub fn signed_sum(terms: &[(f64, LogProduct)], floor: f64) -> Result<LogProduct> {
        let live: Vec<(f64, LogProduct)> =
            terms.iter().copied().filter(|(c, t)| *c != 0.0 && !t.zero).collect();
        if live.is_empty() {
            return Ok(LogProduct::ZERO);
        }
        let shift = live
            .iter()
            .map(|(c, t)| c.abs().ln() + t.log_magnitude)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: Complex64 = live
            .iter()
            .map(|(c, t)| Complex64::from_polar(c.abs() * (t.log_magnitude - shift).exp(), t.phase) * c.signum())
            .sum();
        let rel = sum.norm();
        if !(rel >= floor) {
            return Err(Error::precision(format!(
                "signed sum cancelled to {rel:.3e} of its largest term (floor {floor:.1e})"
            )));
        }
        Ok(LogProduct::new(rel.ln() + shift, sum.arg()))
    }
}

impl Default for LogProduct {
    fn default() -> Self {
        LogProduct::ONE
    }
}

impl Mul for LogProduct {
    type Output = LogProduct;
    fn mul(self, rhs: LogProduct) -> LogProduct {
        if self.zero || rhs.zero {
            return LogProduct::ZERO;
        }
        LogProduct::new(self.log_magnitude + rhs.log_magnitude, self.phase + rhs.phase)
    }
}

impl MulAssign for LogProduct {
    fn mul_assign(&mut self, rhs: LogProduct) {
        *self = *self * rhs;
    }
}

impl fmt::Display for LogProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            f.write_str("0")
        } else {
            write!(f, "exp({} {:+}i)", self.log_magnitude, self.phase)
        }
    }
}
