//! Multiprecision evaluation of the same product formula, used for exact
//! counts and for reading off the winding table by discrete Fourier
//! inversion.

use std::f64::consts::LN_10;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::{Complex, Float, Integer};

use super::{check_size, partition, Perturbation};
use crate::error::{Error, Result};
use crate::table::{support_k, WindingTable};

pub const DEFAULT_DIGITS: u32 = 50;

/// Distance from an integer tolerated when snapping Fourier coefficients.
pub const ROUNDING_TOLERANCE: f64 = 1e-3;

/// Guard digits added on top of `log10 Z(0,0)` by [`required_digits`].
const GUARD_DIGITS: u32 = 12;

pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * LN_10 / std::f64::consts::LN_2).ceil() as u32 + 16
}

/// Decimal digits needed for exact coefficient extraction at `(m, n)`.
pub fn required_digits(m: usize, n: usize) -> Result<u32> {
    let z = partition(&Perturbation::zero(), m, n)?;
    Ok((z.log_magnitude / LN_10).ceil().max(0.0) as u32 + GUARD_DIGITS)
}

/// `Z^{(ση)}` given `ln a²` and `ln b²`.
fn block_term(sigma: u8, eta: u8, ln_a2: &Complex, ln_b2: &Complex, m: usize, n: usize) -> Complex {
    let bits = ln_a2.prec().0;
    let pi = Float::with_val(bits, Constant::Pi);
    let az: Vec<Complex> = (0..m)
        .map(|j| {
            let theta = Float::with_val(bits, &pi * (2 * j + sigma as usize) as u32) / m as u32;
            Complex::with_val(bits, ln_a2 + Complex::with_val(bits, (0, theta))).exp()
        })
        .collect();
    let wb: Vec<(Complex, Complex)> = (0..n)
        .map(|k| {
            let theta = Float::with_val(bits, &pi * (2 * k + eta as usize) as u32) / n as u32;
            let w = Complex::with_val(bits, Complex::with_val(bits, (0, theta)) - ln_b2).exp();
            let inv = Complex::with_val(bits, w.recip_ref());
            (w, inv)
        })
        .collect();
    let mut acc = Complex::with_val(bits, 1);
    for x in &az {
        for (w, inv) in &wb {
            let mut factor = Complex::with_val(bits, w + inv);
            factor += 2;
            factor -= x;
            acc *= factor;
        }
    }
    acc
}

fn partition_from_logs(ln_a2: &Complex, ln_b2: &Complex, m: usize, n: usize) -> Complex {
    let z00 = block_term(0, 0, ln_a2, ln_b2, m, n);
    let z01 = block_term(0, 1, ln_a2, ln_b2, m, n);
    let z10 = block_term(1, 0, ln_a2, ln_b2, m, n);
    let z11 = block_term(1, 1, ln_a2, ln_b2, m, n);
    let mut z = z01 - z00;
    if n % 2 == 1 {
        z = -z;
    }
    z += z10;
    z += z11;
    z / 2u32
}

fn logs_of(alpha: &Complex, beta: &Complex, m: usize, n: usize) -> (Complex, Complex) {
    let bits = alpha.prec().0;
    let pi = Float::with_val(bits, Constant::Pi);
    let ln_a2 = -Complex::with_val(bits, alpha * &pi) / m as u32;
    let ln_b2 = Complex::with_val(bits, beta * &pi) / n as u32;
    (ln_a2, ln_b2)
}

/// `Z_{m,n}(α, β)` carried with `digits` significant decimal digits.
pub fn partition_extended(alpha: Complex64, beta: Complex64, m: usize, n: usize, digits: u32) -> Result<Complex> {
    check_size(m, n)?;
    let bits = digits_to_bits(digits);
    let a = Complex::with_val(bits, (alpha.re, alpha.im));
    let b = Complex::with_val(bits, (beta.re, beta.im));
    let (la, lb) = logs_of(&a, &b, m, n);
    Ok(partition_from_logs(&la, &lb, m, n))
}

fn snap(value: &Complex, what: impl Fn() -> String) -> Result<Integer> {
    let (re, im) = (value.real(), value.imag());
    let rounded = Float::with_val(re.prec(), re.round_ref());
    let frac = Float::with_val(re.prec(), re - &rounded).abs().to_f64();
    let im = im.to_f64().abs();
    if !(frac < ROUNDING_TOLERANCE && im < ROUNDING_TOLERANCE) {
        return Err(Error::precision(format!(
            "{} is {:.3e} from an integer (imaginary part {:.3e})",
            what(),
            frac,
            im
        )));
    }
    Ok(rounded.to_integer().expect("finite"))
}

/// The number of perfect matchings, `Z_{m,n}(0, 0)`, as an exact integer.
pub fn exact_partition_count(m: usize, n: usize, digits: u32) -> Result<Integer> {
    let z = partition_extended(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), m, n, digits)?;
    snap(&z, || format!("Z_{{{m},{n}}}(0,0)"))
}

/// `e^{παn/3} Z(α, β) / Z(0, 0)` with `digits` decimal digits.
pub fn mgf_extended(alpha: f64, beta: f64, m: usize, n: usize, digits: u32) -> Result<Float> {
    let bits = digits_to_bits(digits);
    let z0 = partition_extended(0.0.into(), 0.0.into(), m, n, digits)?;
    let z = partition_extended(alpha.into(), beta.into(), m, n, digits)?;
    let pi = Float::with_val(bits, Constant::Pi);
    let pref = (Float::with_val(bits, alpha) * pi * n as u32 / 3u32).exp();
    if z0.real().is_zero() {
        return Err(Error::ZeroDivision("Z(0,0)".into()));
    }
    Ok(Float::with_val(bits, z.real() / z0.real()) * pref)
}

/// Fourier grid `(N_A, N_B)`: one sample more than the width of the
/// winding support in each direction.
pub fn grid_size(m: usize, n: usize) -> (usize, usize) {
    (n + n / 3 + 2, 2 * m + 2)
}

/// Exact `C_{k,l}` from `F(s, t) = e^{παn/3} Z(α_s, β_t)` sampled where
/// `e^{-πα}` and `e^{-πβ}` run over `N_A`-th and `N_B`-th roots of unity.
/// Every coefficient, including the ones outside the support, must be within
/// [`ROUNDING_TOLERANCE`] of an integer.
pub fn extract_winding_counts(m: usize, n: usize, digits: u32) -> Result<WindingTable> {
    check_size(m, n)?;
    if n % 3 != 0 {
        return Err(Error::NotMultipleOfThree { n });
    }
    let bits = digits_to_bits(digits);
    let (na, nb) = grid_size(m, n);
    let pi = Float::with_val(bits, Constant::Pi);
    let two_pi_i = Complex::with_val(bits, (0, Float::with_val(bits, &pi * 2u32)));

    // F(s, t), row-major in s.
    let samples: Vec<Complex> = (0..na * nb)
        .into_par_iter()
        .map(|idx| {
            let (s, t) = (idx / nb, idx % nb);
            // a² = e^{2πi s/(m N_A)}, b² = e^{-2πi t/(n N_B)}
            let ln_a2 = Complex::with_val(bits, &two_pi_i * s as u32) / (m * na) as u32;
            let ln_b2 = -(Complex::with_val(bits, &two_pi_i * t as u32) / (n * nb) as u32);
            let z = partition_from_logs(&ln_a2, &ln_b2, m, n);
            // e^{παn/3} with πα = -2πi s/N_A
            let pref = (-(Complex::with_val(bits, &two_pi_i * (s * n) as u32) / (3 * na) as u32)).exp();
            z * pref
        })
        .collect();

    let root = |k: i64, big_n: usize| -> Complex {
        let r = k.rem_euclid(big_n as i64) as u32;
        (-(Complex::with_val(bits, &two_pi_i * r) / big_n as u32)).exp()
    };

    // Invert along t, then along s.
    let mut partial: Vec<Complex> = vec![Complex::new(bits); na * nb];
    for l in 0..nb {
        let rt: Vec<Complex> = (0..nb).map(|t| root((t * l) as i64, nb)).collect();
        for s in 0..na {
            let mut acc = Complex::with_val(bits, 0);
            for t in 0..nb {
                acc += Complex::with_val(bits, &samples[s * nb + t] * &rt[t]);
            }
            partial[s * nb + l] = acc;
        }
    }
    let norm = (na * nb) as u32;
    let (kmin, kmax) = support_k(n);
    let mm = m as i64;
    let mut table = WindingTable::new(m, n);
    for kr in 0..na {
        let rs: Vec<Complex> = (0..na).map(|s| root((s * kr) as i64, na)).collect();
        for lr in 0..nb {
            let mut acc = Complex::with_val(bits, 0);
            for s in 0..na {
                acc += Complex::with_val(bits, &partial[s * nb + lr] * &rs[s]);
            }
            acc /= norm;
            // Representatives of the residues inside the support.
            let k = lift(kr as i64, na as i64, kmin, kmax);
            let l = lift(lr as i64, nb as i64, -mm, mm);
            let c = snap(&acc, || format!("coefficient at residue ({kr},{lr})"))?;
            match (k, l) {
                (Some(k), Some(l)) => {
                    if c < 0 {
                        return Err(Error::precision(format!("negative count {c} at ({k},{l})")));
                    }
                    table.add(k, l, c);
                }
                _ if c != 0 => {
                    return Err(Error::precision(format!(
                        "nonzero coefficient {c} outside the winding support at residue ({kr},{lr})"
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(table)
}

fn lift(r: i64, modulus: i64, lo: i64, hi: i64) -> Option<i64> {
    let k = lo + (r - lo).rem_euclid(modulus);
    (k <= hi).then_some(k)
}
