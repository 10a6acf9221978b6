//! Jacobi theta functions `ϑ_1..ϑ_4(ζ, q)` by series and by infinite
//! product, the Euler product `P(q) = ∏ (1 - q^{2k})`, the modular
//! transformation of `ϑ_3`, and the four-term recombination identity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-14;

/// Hard stop for pathological inputs (|q| extremely close to 1).
const MAX_TERMS: usize = 1_000_000;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A nome `q` with `|q| < 1`, optionally carrying `τ` with `q = e^{iπτ}` so
/// that fractional powers of `q` are taken on the branch fixed by `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nome {
    pub q: Complex64,
    pub tau: Option<Complex64>,
}

impl Nome {
    pub fn new(q: Complex64) -> Result<Self> {
        if !(q.norm() < 1.0) {
            return Err(Error::NomeOutsideDisk { modulus: q.norm() });
        }
        Ok(Nome { q, tau: None })
    }

    pub fn real(q: f64) -> Result<Self> {
        Nome::new(Complex64::new(q, 0.0))
    }

    pub fn from_tau(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::NotUpperHalfPlane { im: tau.im });
        }
        Ok(Nome { q: (I * PI * tau).exp(), tau: Some(tau) })
    }

    /// `log q`, on the branch `iπτ` when `τ` is known.
    pub fn ln(&self) -> Complex64 {
        match self.tau {
            Some(t) => I * PI * t,
            None => self.q.ln(),
        }
    }

    fn is_zero(&self) -> bool {
        self.q == Complex64::new(0.0, 0.0)
    }
}

/// A theta value with the number of series terms or product factors used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaValue {
    pub value: Complex64,
    pub terms_used: usize,
}

fn check_index(index: u8) -> Result<()> {
    if !(1..=4).contains(&index) {
        return Err(Error::InvalidArgument(format!("theta index must be 1..4, got {index}")));
    }
    Ok(())
}

/// Series definition of `ϑ_index(ζ, q)`.
pub fn theta(index: u8, zeta: Complex64, nome: &Nome) -> Result<Complex64> {
    theta_series(index, zeta, nome, DEFAULT_EPS).map(|t| t.value)
}

/// Series evaluation with explicit tolerance. For `ϑ_1` the factor
/// `(-1)^{k-1/2}` is read as `e^{iπ(k-1/2)} = -i(-1)^k`.
///
/// Terms are added symmetrically outward from the centre; summation stops
/// once three consecutive shells are below `eps (1 + |sum|)` and the shell
/// index is past the peak of `|e^{2kiζ} q^{k²}|`. When the rounding error
/// implied by the term sizes exceeds `eps (1 + |value|)`, the sum is redone
/// in multiprecision.
pub fn theta_series(index: u8, zeta: Complex64, nome: &Nome, eps: f64) -> Result<ThetaValue> {
    check_index(index)?;
    if nome.is_zero() {
        // Only the k = 0 term of ϑ3, ϑ4 survives; ϑ1, ϑ2 carry q^{1/4}.
        let v = if index >= 3 { 1.0 } else { 0.0 };
        return Ok(ThetaValue { value: v.into(), terms_used: 1 });
    }
    let lq = nome.ln();
    let half = index <= 2;
    let term = |k: i64| -> (Complex64, f64) {
        let (freq, power) = if half {
            let h = k as f64 + 0.5;
            (2.0 * h, h * h)
        } else {
            (2.0 * k as f64, (k * k) as f64)
        };
        let x = I * zeta * freq + lq * power;
        let mut t = x.exp();
        if (index == 1 || index == 4) && k.rem_euclid(2) == 1 {
            t = -t;
        }
        if index == 1 {
            t *= -I;
        }
        // exp loses about |x| ulps of relative accuracy.
        (t, t.norm() * (2.0 + x.norm()))
    };

    let peak = zeta.im.abs() / (-lq.re).max(f64::MIN_POSITIVE) + 1.0;
    let first: Vec<i64> = if half { vec![0, -1] } else { vec![0] };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut weight = 0.0;
    let mut largest: f64 = 0.0;
    let mut add = |t: Complex64, w: f64, sum: &mut Complex64| {
        // Neumaier compensation.
        let s = *sum + t;
        comp += if sum.norm() >= t.norm() { (*sum - s) + t } else { (t - s) + *sum };
        *sum = s;
        weight += w;
        largest = largest.max(t.norm());
    };
    for &k in &first {
        let (t, w) = term(k);
        add(t, w, &mut sum);
    }
    let mut terms = first.len();
    let mut quiet = 0;
    let mut k = 1i64;
    while quiet < 3 {
        // Shell k pairs the indices k and -k (k and -1-k for half-integer ones).
        let partner = if half { -1 - k } else { -k };
        let (a, wa) = term(k);
        let (b, wb) = term(partner);
        add(a, wa, &mut sum);
        add(b, wb, &mut sum);
        terms += 2;
        let size = a.norm().max(b.norm());
        if size < eps * (1.0 + sum.norm()) && (k as f64) > peak {
            quiet += 1;
        } else {
            quiet = 0;
        }
        k += 1;
        if terms > MAX_TERMS {
            return Err(Error::precision(format!("theta series did not converge within {MAX_TERMS} terms")));
        }
    }
    let value = sum + comp;
    let rounding = f64::EPSILON * weight;
    if rounding <= eps * (1.0 + value.norm()) {
        return Ok(ThetaValue { value, terms_used: terms });
    }
    // The terms cancel by more than double precision can carry: redo the sum
    // with enough extra bits to cover the cancellation.
    let lost = (largest / value.norm().max(f64::MIN_POSITIVE)).log2().clamp(0.0, 2000.0);
    let bits = 64 + lost.ceil() as u32 + (weight / largest.max(f64::MIN_POSITIVE)).log2().max(0.0).ceil() as u32;
    Ok(series_multiprecision(index, zeta, nome, bits, peak))
}

fn series_multiprecision(index: u8, zeta: Complex64, nome: &Nome, bits: u32, peak: f64) -> ThetaValue {
    use rug::float::Constant;
    use rug::{Complex, Float};

    let lq = match nome.tau {
        Some(t) => {
            let pi = Float::with_val(bits, Constant::Pi);
            Complex::with_val(bits, (0, 1)) * Complex::with_val(bits, (t.re, t.im)) * pi
        }
        None => Complex::with_val(bits, (nome.q.re, nome.q.im)).ln(),
    };
    let iz = Complex::with_val(bits, (-zeta.im, zeta.re));
    let half = index <= 2;
    let term = |k: i64| -> Complex {
        let (freq, power) = if half {
            let h2 = 2 * k + 1;
            (Float::with_val(bits, h2), Float::with_val(bits, h2 * h2) / 4u32)
        } else {
            (Float::with_val(bits, 2 * k), Float::with_val(bits, k * k))
        };
        let x = Complex::with_val(bits, &iz * &freq) + Complex::with_val(bits, &lq * &power);
        let mut t = x.exp();
        if (index == 1 || index == 4) && k.rem_euclid(2) == 1 {
            t = -t;
        }
        if index == 1 {
            t *= Complex::with_val(bits, (0, -1));
        }
        t
    };
    let tiny = Float::with_val(bits, Float::i_exp(1, -(bits as i32)));
    let mut sum = Complex::with_val(bits, 0);
    let mut largest = Float::with_val(bits, 0);
    let mut terms = 0;
    let push = |t: Complex, sum: &mut Complex, largest: &mut Float| {
        let n = Float::with_val(bits, t.abs_ref());
        if n > *largest {
            *largest = n.clone();
        }
        *sum += t;
        n
    };
    for k in if half { vec![0, -1] } else { vec![0] } {
        push(term(k), &mut sum, &mut largest);
        terms += 1;
    }
    let mut quiet = 0;
    let mut k = 1i64;
    while quiet < 3 && terms < MAX_TERMS {
        let partner = if half { -1 - k } else { -k };
        let a = push(term(k), &mut sum, &mut largest);
        let b = push(term(partner), &mut sum, &mut largest);
        terms += 2;
        let bound = Float::with_val(bits, &largest * &tiny);
        if a.max(&b) < bound && (k as f64) > peak {
            quiet += 1;
        } else {
            quiet = 0;
        }
        k += 1;
    }
    ThetaValue { value: Complex64::new(sum.real().to_f64(), sum.imag().to_f64()), terms_used: terms }
}

/// Product form of `ϑ_index(ζ, q)`.
pub fn theta_product(index: u8, zeta: Complex64, nome: &Nome) -> Result<Complex64> {
    theta_product_terms(index, zeta, nome, DEFAULT_EPS).map(|t| t.value)
}

pub fn theta_product_terms(index: u8, zeta: Complex64, nome: &Nome, eps: f64) -> Result<ThetaValue> {
    check_index(index)?;
    let q = nome.q;
    let q2 = q * q;
    let cos2 = (zeta * 2.0).cos();
    let p = euler_p_terms(nome, eps)?;
    let (sign, mut qpow, mut prefactor) = match index {
        1 => (-1.0, q2, (nome.ln() / 4.0).exp() * zeta.sin() * 2.0),
        2 => (1.0, q2, (nome.ln() / 4.0).exp() * zeta.cos() * 2.0),
        3 => (1.0, q, Complex64::new(1.0, 0.0)),
        _ => (-1.0, q, Complex64::new(1.0, 0.0)),
    };
    if nome.is_zero() {
        let v = if index >= 3 { 1.0 } else { 0.0 };
        return Ok(ThetaValue { value: v.into(), terms_used: 1 });
    }
    let mut terms = p.terms_used;
    let mut quiet = 0;
    while quiet < 3 {
        let dev = qpow * cos2 * 2.0 * sign + qpow * qpow;
        prefactor *= 1.0 + dev;
        terms += 1;
        if dev.norm() < eps {
            quiet += 1;
        } else {
            quiet = 0;
        }
        qpow *= q2;
        if terms > MAX_TERMS {
            return Err(Error::precision("theta product did not converge"));
        }
    }
    Ok(ThetaValue { value: prefactor * p.value, terms_used: terms })
}

/// `P(q) = ∏_{k ≥ 1} (1 - q^{2k})`.
pub fn euler_p(nome: &Nome) -> Result<Complex64> {
    euler_p_terms(nome, DEFAULT_EPS).map(|t| t.value)
}

fn euler_p_terms(nome: &Nome, eps: f64) -> Result<ThetaValue> {
    let q2 = nome.q * nome.q;
    let mut pow = q2;
    let mut acc = Complex64::new(1.0, 0.0);
    let mut terms = 0;
    let mut quiet = 0;
    while quiet < 3 {
        acc *= 1.0 - pow;
        terms += 1;
        if pow.norm() < eps {
            quiet += 1;
        } else {
            quiet = 0;
        }
        pow *= q2;
        if terms > MAX_TERMS {
            return Err(Error::precision("Euler product did not converge"));
        }
    }
    Ok(ThetaValue { value: acc, terms_used: terms })
}

/// `ϑ_index(ζ | τ) = ϑ_index(ζ, e^{iπτ})`.
pub fn theta_tau(index: u8, zeta: Complex64, tau: Complex64) -> Result<Complex64> {
    theta(index, zeta, &Nome::from_tau(tau)?)
}

/// `|ϑ_3(u|σ) - √(i/σ) e^{-iu²/(πσ)} ϑ_3(u/σ | -1/σ)|`.
pub fn jacobi_transform_residual(u: Complex64, sigma: Complex64) -> Result<f64> {
    let lhs = theta_tau(3, u, sigma)?;
    let rhs = (I / sigma).sqrt() * (-I * u * u / (PI * sigma)).exp() * theta_tau(3, u / sigma, -1.0 / sigma)?;
    Ok((lhs - rhs).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CombinationSide {
    /// `Σ_i ϑ_i(ζ|τ) ϑ_i(ζ̄|τ)`.
    Sum,
    /// `√(2i/τ) e^{-2ix²/(πτ)} ϑ_3(x/τ | -1/(2τ)) ϑ_3(iy | τ/2)`, `ζ = x + iy`.
    Closed,
}

pub fn theta_combination(zeta: Complex64, tau: Complex64, side: CombinationSide) -> Result<Complex64> {
    let nome = Nome::from_tau(tau)?;
    match side {
        CombinationSide::Sum => {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 1..=4 {
                s += theta(i, zeta, &nome)? * theta(i, zeta.conj(), &nome)?;
            }
            Ok(s)
        }
        CombinationSide::Closed => {
            let (x, y) = (zeta.re, zeta.im);
            Ok((2.0 * I / tau).sqrt()
                * (-2.0 * I * x * x / (PI * tau)).exp()
                * theta_tau(3, Complex64::from(x) / tau, -1.0 / (2.0 * tau))?
                * theta_tau(3, I * y, tau / 2.0)?)
        }
    }
}

/// `Σ_k e^{c k - s k²}` over a window wide enough that the dropped tail is
/// below `eps` relative to the peak term.
pub(crate) fn gaussian_line_sum(c: f64, s: f64, eps: f64) -> f64 {
    let centre = c / (2.0 * s);
    let width = ((-eps.ln()).max(1.0) / s).sqrt() + 2.0;
    let lo = (centre - width).floor() as i64;
    let hi = (centre + width).ceil() as i64;
    // Factor out the peak so large shifts do not overflow early.
    let peak = c * centre - s * centre * centre;
    let sum: f64 = (lo..=hi).map(|k| (c * k as f64 - s * (k * k) as f64 - peak).exp()).sum();
    sum * peak.exp()
}

/// `√(2/ρ) e^{-πα²ρ/2} Σ_{k,l} A^k B^l e^{-π(k²/ρ + ρl²)/2}` with
/// `A = e^{πα}`, `B = e^{πβ}`.
pub fn corollary10_sum(alpha: f64, beta: f64, rho: f64, eps: f64) -> f64 {
    let sk = gaussian_line_sum(PI * alpha, PI / (2.0 * rho), eps);
    let sl = gaussian_line_sum(PI * beta, PI * rho / 2.0, eps);
    (2.0 / rho).sqrt() * (-PI * alpha * alpha * rho / 2.0).exp() * sk * sl
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_values() {
        for q in [0.1, 0.5, 0.9] {
            let nome = Nome::real(q).unwrap();
            assert!(theta(1, c(0.0, 0.0), &nome).unwrap().norm() < 1e-15);
            assert!(theta(2, c(PI / 2.0, 0.0), &nome).unwrap().norm() < 1e-13);
            assert!(theta_product(1, c(PI, 0.0), &nome).unwrap().norm() < 1e-13);
        }
        let tiny = Nome::real(1e-20).unwrap();
        assert!((theta(3, c(0.4, 0.2), &tiny).unwrap() - 1.0).norm() < 1e-15);
        assert_eq!(theta(3, c(0.4, 0.2), &Nome::real(0.0).unwrap()).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(Nome::real(1.0), Err(Error::NomeOutsideDisk { .. })));
        assert!(matches!(Nome::from_tau(c(0.3, 0.0)), Err(Error::NotUpperHalfPlane { .. })));
        assert!(theta(5, c(0.0, 0.0), &Nome::real(0.1).unwrap()).is_err());
        assert!(jacobi_transform_residual(c(0.0, 0.0), c(1.0, -1.0)).is_err());
    }

    #[test]
    fn series_matches_product() {
        let zetas = [c(0.3, 0.0), c(-1.1, 0.7), c(2.5, -1.0), c(0.05, 1.0), c(1.6, 0.4), c(-0.7, -0.9)];
        let mut worst: f64 = 0.0;
        for q in [0.1, 0.5, 0.9] {
            let nome = Nome::real(q).unwrap();
            for i in 1..=4 {
                for &z in &zetas {
                    let s = theta(i, z, &nome).unwrap();
                    let p = theta_product(i, z, &nome).unwrap();
                    worst = worst.max((s - p).norm() / (1.0 + s.norm()));
                }
            }
        }
        assert!(worst < 1e-12, "worst {worst:e}");
    }

    #[test]
    fn product_at_zero() {
        let nome = Nome::real(0.3).unwrap();
        let p = euler_p(&nome).unwrap();
        let prod: f64 = (0..60).map(|l| (1.0 - 0.3f64.powi(2 * l + 1)).powi(2)).product();
        let t = theta_product(4, c(0.0, 0.0), &nome).unwrap();
        assert!((t - p * prod).norm() < 1e-15);
    }

    #[test]
    fn euler_product_values() {
        assert_eq!(euler_p(&Nome::real(0.0).unwrap()).unwrap(), c(1.0, 0.0));
        for q in [0.1, 0.5, 0.9] {
            let p = euler_p(&Nome::real(q).unwrap()).unwrap();
            assert!(p.re > 0.0 && p.re < 1.0 && p.im == 0.0);
        }
        // ϑ2ϑ3ϑ4(0) = ϑ1'(0) = 2 q^{1/4} P(q)^3
        let q = (-PI).exp();
        let nome = Nome::real(q).unwrap();
        let z = c(0.0, 0.0);
        let lhs = theta(2, z, &nome).unwrap() * theta(3, z, &nome).unwrap() * theta(4, z, &nome).unwrap();
        let rhs = 2.0 * q.powf(0.25) * euler_p(&nome).unwrap().powi(3);
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn jacobi_transform() {
        assert!(jacobi_transform_residual(c(0.0, 0.0), c(0.0, 1.0)).unwrap() < 1e-15);
        assert!(jacobi_transform_residual(c(0.3, 0.1), c(0.0, 2.0)).unwrap() < 1e-10);
        for x in [-1.0, -0.4, 0.0, 0.5, 1.2] {
            for s in [c(0.0, 0.5), c(0.3, 0.8), c(0.0, 1.0), c(-0.5, 1.5), c(0.2, 3.0)] {
                let r = jacobi_transform_residual(c(x, 0.1 * x), s).unwrap();
                assert!(r < 1e-10, "residual {r:e} at ({x}, {s})");
            }
        }
    }

    #[test]
    fn recombination_identity() {
        let tau = c(0.0, 1.0);
        let z = c(0.0, 0.0);
        let nome = Nome::from_tau(tau).unwrap();
        let expect: Complex64 = (2..=4).map(|i| theta(i, z, &nome).unwrap().powi(2)).sum();
        let sum = theta_combination(z, tau, CombinationSide::Sum).unwrap();
        assert!((sum - expect).norm() < 1e-14);

        let z = c(0.2, 0.3);
        let a = theta_combination(z, tau, CombinationSide::Sum).unwrap();
        let b = theta_combination(z, tau, CombinationSide::Closed).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn corollary10() {
        for rho in [0.5, 1.0, 1.7] {
            let z: f64 = (-30..=30)
                .flat_map(|k| (-30..=30).map(move |l| (k, l)))
                .map(|(k, l)| (-PI * ((k * k) as f64 / rho + rho * (l * l) as f64) / 2.0).exp())
                .sum();
            let v = corollary10_sum(0.0, 0.0, rho, 1e-15);
            assert!((v - (2.0 / rho).sqrt() * z).abs() < 1e-13);
        }
        let (alpha, beta, rho) = (0.3, -0.4, 1.2);
        let zeta = c(PI / 2.0 * rho * alpha, PI / 2.0 * beta);
        let sum = theta_combination(zeta, c(0.0, rho), CombinationSide::Sum).unwrap();
        let v = corollary10_sum(alpha, beta, rho, 1e-15);
        assert!((sum - v).norm() < 1e-10, "{sum} vs {v}");
        assert!((corollary10_sum(-alpha, -beta, rho, 1e-15) - v).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn parity_and_periodicity(re in -3.0f64..3.0, im in -1.0f64..1.0, q in 0.05f64..0.9) {
            let nome = Nome::real(q).unwrap();
            let z = c(re, im);
            let shift = c(PI, 0.0);
            for (i, parity, period) in [(1u8, -1.0, -1.0), (2, 1.0, -1.0), (3, 1.0, 1.0), (4, 1.0, 1.0)] {
                let v = theta(i, z, &nome).unwrap();
                let scale = 1.0 + v.norm();
                prop_assert!((theta(i, -z, &nome).unwrap() - v * parity).norm() < 1e-12 * scale);
                prop_assert!((theta(i, z + shift, &nome).unwrap() - v * period).norm() < 1e-12 * scale);
            }
        }

        #[test]
        fn prop9_random(re in -2.0f64..2.0, im in -1.0f64..1.0, rho_idx in 0usize..3) {
            let rho = [0.5, 1.0, 2.0][rho_idx];
            let z = c(re, im);
            let tau = c(0.0, rho);
            let a = theta_combination(z, tau, CombinationSide::Sum).unwrap();
            let b = theta_combination(z, tau, CombinationSide::Closed).unwrap();
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}
