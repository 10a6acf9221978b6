//! Perturbed partition functions `Z_{m,n}(α, β)` from the product of the
//! characteristic polynomial over roots of unity.
//!
//! With `P(z, w) = w/b² + b²/w + 2 - a²z` and
//! `Z^{(ση)} = ∏_{z^m = (-1)^σ} ∏_{w^n = (-1)^η} P(z, w)`,
//!
//! ```text
//! Z = ½ ((-1)^n (-Z^{(00)} + Z^{(01)}) + Z^{(10)} + Z^{(11)})
//! ```
//!
//! Everything in this module runs in double precision through
//! [`LogProduct`]; see [`extended`] for the multiprecision path.

pub mod extended;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logprod::{LogProduct, DEFAULT_PRECISION_FLOOR};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The `(α, β)` perturbation of the edge weights: type I edges carry `a`,
/// type II `1/b`, type III `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Perturbation {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Perturbation { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Perturbation { alpha: alpha.into(), beta: beta.into() }
    }

    pub fn zero() -> Self {
        Perturbation::real(0.0, 0.0)
    }

    /// `a = e^{-απ/(2m)}`.
    pub fn a(&self, m: usize) -> Complex64 {
        (-self.alpha * PI / (2.0 * m as f64)).exp()
    }

    /// `b = e^{βπ/(2n)}`.
    pub fn b(&self, n: usize) -> Complex64 {
        (self.beta * PI / (2.0 * n as f64)).exp()
    }

    /// `A = a^{-2m} = e^{απ}`.
    pub fn big_a(&self) -> Complex64 {
        (self.alpha * PI).exp()
    }

    /// `B = b^{2n} = e^{βπ}`.
    pub fn big_b(&self) -> Complex64 {
        (self.beta * PI).exp()
    }
}

/// `P(z, w) = w/b² + b²/w + 2 - a²z`, the determinant of the Fourier block
/// of the Kasteleyn matrix.
pub fn charpoly(z: Complex64, w: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let b2 = b * b;
    w / b2 + b2 / w + 2.0 - a * a * z
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Z^{(ση)}` over the grid `z^m = (-1)^σ`, `w^n = (-1)^η`. A factor is
/// declared an exact zero when it is at rounding level relative to its terms.
pub fn block_term(sigma: u8, eta: u8, p: &Perturbation, m: usize, n: usize) -> LogProduct {
    // a²z and w/b² are formed as single exponentials to keep the grid exact.
    let ln_a2 = -p.alpha * PI / m as f64;
    let ln_b2 = p.beta * PI / n as f64;
    let az: Vec<Complex64> = (0..m)
        .map(|j| (ln_a2 + I * (PI * (2 * j + sigma as usize) as f64 / m as f64)).exp())
        .collect();
    let wb: Vec<Complex64> = (0..n)
        .map(|k| (I * (PI * (2 * k + eta as usize) as f64 / n as f64) - ln_b2).exp())
        .collect();

    let mut acc = LogProduct::ONE;
    for x in &az {
        for y in &wb {
            let inv = 1.0 / y;
            let value = y + inv + 2.0 - x;
            let scale = y.norm() + inv.norm() + 2.0 + x.norm();
            if value.norm() <= 16.0 * f64::EPSILON * scale {
                return LogProduct::ZERO;
            }
            acc *= LogProduct::from_complex(value);
        }
    }
    acc
}

/// The four block terms indexed `[Z00, Z01, Z10, Z11]`.
pub fn block_terms(p: &Perturbation, m: usize, n: usize) -> [LogProduct; 4] {
    [
        block_term(0, 0, p, m, n),
        block_term(0, 1, p, m, n),
        block_term(1, 0, p, m, n),
        block_term(1, 1, p, m, n),
    ]
}

/// `Z_{m,n}(α, β)`, failing if the signed combination loses more than ten
/// digits to cancellation.
pub fn partition(p: &Perturbation, m: usize, n: usize) -> Result<LogProduct> {
    partition_with_floor(p, m, n, DEFAULT_PRECISION_FLOOR)
}

pub fn partition_with_floor(p: &Perturbation, m: usize, n: usize, floor: f64) -> Result<LogProduct> {
    check_size(m, n)?;
    let [z00, z01, z10, z11] = block_terms(p, m, n);
    let s = parity(n);
    LogProduct::signed_sum(&[(-0.5 * s, z00), (0.5 * s, z01), (0.5, z10), (0.5, z11)], floor)
}

/// `e^{παn/3} Z(α, β) / Z(0, 0)`, the moment generating function of the
/// winding number.
pub fn mgf(alpha: f64, beta: f64, m: usize, n: usize) -> Result<f64> {
    let z0 = partition(&Perturbation::zero(), m, n)?;
    let z = partition(&Perturbation::real(alpha, beta), m, n)?;
    let ratio = z.div(&z0)? * LogProduct::new(PI * alpha * n as f64 / 3.0, 0.0);
    let v = ratio.to_complex().ok_or_else(|| Error::precision("moment generating function overflows"))?;
    Ok(v.re)
}

pub(crate) fn check_size(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSize { m, n });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(m: usize, n: usize) -> f64 {
        partition(&Perturbation::zero(), m, n).unwrap().to_complex().unwrap().re
    }

    #[test]
    fn charpoly_values() {
        let one = Complex64::new(1.0, 0.0);
        assert!((charpoly(one, one, one, one) - 3.0).norm() < 1e-15);
        assert!((charpoly(-one, -one, one, one) - 1.0).norm() < 1e-15);
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(charpoly(one, w, one, one).norm() < 1e-15);
    }

    #[test]
    fn perturbation_weights() {
        let p = Perturbation::real(0.7, -0.3);
        let (m, n) = (3, 6);
        assert!((p.a(m).powi(-2 * m as i32) - p.big_a()).norm() < 1e-13);
        assert!((p.b(n).powi(2 * n as i32) - p.big_b()).norm() < 1e-13);
        assert!(p.a(m).im == 0.0 && p.a(m).re > 0.0 && p.b(n).re > 0.0);
    }

    #[test]
    fn block_terms_small() {
        let p = Perturbation::zero();
        let z = block_term(1, 1, &p, 1, 1).to_complex().unwrap();
        assert!((z - 1.0).norm() < 1e-15);
        assert!(block_term(0, 0, &p, 2, 3).is_zero());
        assert!(block_term(0, 0, &p, 5, 9).is_zero());
        assert!(!block_term(0, 0, &p, 2, 4).is_zero());
        for s in 0..2 {
            for e in 0..2 {
                let t = block_term(s, e, &Perturbation::real(0.4, -0.9), 3, 5);
                let ph = t.phase.abs();
                assert!(ph < 1e-12 || (ph - PI).abs() < 1e-12, "phase {ph}");
            }
        }
    }

    #[test]
    fn partition_counts_match_enumeration() {
        for ((m, n), c) in [((1, 1), 5.0), ((1, 2), 9.0), ((2, 1), 17.0), ((1, 3), 20.0), ((2, 3), 116.0),
            ((3, 3), 860.0), ((2, 6), 7248.0), ((3, 4), 5857.0), ((2, 5), 1777.0), ((3, 6), 281268.0),
            ((4, 6), 13154448.0), ((2, 9), 547316.0)]
        {
            let z = count(m, n);
            assert!((z - c).abs() < 1e-9 * c, "Z({m},{n}) = {z}, expected {c}");
        }
    }

    #[test]
    fn grid_rotation_invariance() {
        // Multiplying a² by an m-th root of unity only permutes the z-grid.
        let (m, n) = (4, 6);
        let p = Perturbation::real(0.3, 0.2);
        let q = Perturbation::new(p.alpha - I * 2.0, p.beta);
        for s in 0..2 {
            for e in 0..2 {
                let x = block_term(s, e, &p, m, n);
                let y = block_term(s, e, &q, m, n);
                assert!((x.log_magnitude - y.log_magnitude).abs() < 1e-12);
                assert!(crate::logprod::wrap_phase(x.phase - y.phase).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn large_tori_do_not_overflow() {
        let z = partition(&Perturbation::zero(), 64, 192).unwrap();
        let f = -z.log_magnitude / (64.0 * 192.0);
        assert!((f + 0.646132).abs() < 1e-3, "{f}");
        assert!(z.phase.abs() < 1e-9);
    }

    #[test]
    fn mgf_basic() {
        assert!((mgf(0.0, 0.0, 2, 6).unwrap() - 1.0).abs() < 1e-14);
        let a = mgf(0.3, 0.4, 2, 6).unwrap();
        let b = mgf(0.3, -0.4, 2, 6).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }
}
