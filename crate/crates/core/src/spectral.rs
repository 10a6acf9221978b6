//! The roots `r₁(φ), r₂(φ)` of `r + 1/r = e^{iφ} - 2`, the bulk products
//! `Λ¹Λ²` and `Γ¹Γ²`, finite-size versions of the asymptotic statements
//! built from them, and the free energy.
//!
//! `φ` is tied to the Fourier grid by `a²z = e^{iφ}`, so the grid point
//! `z = e^{iπ(2j+σ)/m}` corresponds to `φ = π(iα + 2j + σ)/m`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kasteleyn::{block_term, Perturbation};
use crate::logprod::{wrap_phase, LogProduct};
use crate::quadrature::Adaptive;
use crate::theta::{euler_p, theta, Nome};

/// Half-width of the strip in `Im φ` on which roots are tracked.
pub const STRIP_HALF_WIDTH: f64 = 1.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchedRoot {
    pub phi: Complex64,
    pub r1: Complex64,
    pub r2: Complex64,
    /// `log r₁` with imaginary part in `(π/2, 3π/2)`.
    pub log_r1: Complex64,
}

/// Solves `r² + (2 - e^{iφ}) r + 1 = 0` and labels the roots.
///
/// On `(0, 2π)` the branch is the root of modulus above one, elsewhere the
/// one below, consistent with `r₁(φ+2π) = 1/r₁(φ)`.
/// Where the moduli coincide (`Re φ ≡ 0 mod 2π`) the sign of `Im r₁` decides:
/// positive left of `π`, negative right of it.
pub fn roots(phi: Complex64) -> Result<BranchedRoot> {
    if !(phi.re >= -PI && phi.re <= 3.0 * PI && phi.im.abs() <= STRIP_HALF_WIDTH) {
        return Err(Error::OutsideStrip { re: phi.re, im: phi.im });
    }
    let e = (I * phi).exp();
    let half = 1.0 - e / 2.0;
    let disc = (1.0 - half * half).sqrt();
    let plus = -half + I * disc;
    let minus = -half - I * disc;
    let (mp, mm) = (plus.norm(), minus.norm());
    let r1 = if (mp - mm).abs() > 1e-9 * (mp + mm) {
        let want_large = phi.re > 0.0 && phi.re < 2.0 * PI;
        if (mp > mm) == want_large {
            plus
        } else {
            minus
        }
    } else {
        let want_upper = phi.re < PI;
        if (plus.im > 0.0) == want_upper {
            plus
        } else {
            minus
        }
    };
    let mut arg = r1.arg();
    if arg < 0.0 {
        arg += 2.0 * PI;
    }
    Ok(BranchedRoot { phi, r1, r2: 1.0 / r1, log_r1: Complex64::new(r1.norm().ln(), arg) })
}

/// `|arg r₁(φ + 2π) + arg r₁(φ) - 2π|`.
pub fn arg_shift_check(phi: Complex64) -> Result<f64> {
    let a = roots(phi)?.log_r1.im;
    let b = roots(phi + 2.0 * PI)?.log_r1.im;
    Ok((a + b - 2.0 * PI).abs())
}

/// `n Σ_j log r₁(π(iα + 2j + σ)/m)` for `j` in `range`, without phase wrapping.
fn grid_log(alpha: f64, sigma: usize, range: std::ops::Range<usize>, m: usize, n: usize) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for j in range {
        let phi = Complex64::new(PI * (2 * j + sigma) as f64, PI * alpha) / m as f64;
        s += roots(phi)?.log_r1;
    }
    Ok(s * n as f64)
}

fn check_grid(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSize { m, n });
    }
    Ok(())
}

/// `log(Λ¹Λ²(α)) = n Σ_{j=0}^{m-1} log r₁(π(iα + 2j + 1)/m)`.
pub fn lambda_log(alpha: f64, m: usize, n: usize) -> Result<Complex64> {
    check_grid(m, n)?;
    grid_log(alpha, 1, 0..m, m, n)
}

/// `Λ¹Λ²(α)`; `Λ²` is folded in through `r₂(φ) = r₁(φ + 2π)`.
pub fn lambda_product(alpha: f64, m: usize, n: usize) -> Result<LogProduct> {
    lambda_log(alpha, m, n).map(LogProduct::from_log)
}

/// `log(Γ¹Γ²(α)) = n Σ_{j=1}^{m-1} log r₁(π(iα + 2j)/m)`.
pub fn gamma_log(alpha: f64, m: usize, n: usize) -> Result<Complex64> {
    check_grid(m, n)?;
    grid_log(alpha, 0, 1..m, m, n)
}

pub fn gamma_product(alpha: f64, m: usize, n: usize) -> Result<LogProduct> {
    gamma_log(alpha, m, n).map(LogProduct::from_log)
}

/// `ρ = n/(√3 m)`.
pub fn rho(m: usize, n: usize) -> f64 {
    n as f64 / (3f64.sqrt() * m as f64)
}

/// `(ζ, q)` with `ζ = π/2 (ρα + iβ)` and `q = e^{-ρπ}`.
pub fn limit_parameters(alpha: f64, beta: f64, rho: f64) -> (Complex64, f64) {
    (Complex64::new(PI / 2.0 * rho * alpha, PI / 2.0 * beta), (-rho * PI).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corollary {
    /// `Z^{(11)}` against `Λ`, limit `ϑ₃ϑ₃/P²`.
    C11,
    /// `Z^{(10)}` against `Λ`, limit `ϑ₄ϑ₄/P²`.
    C10,
    /// `Z^{(01)}` against `Γ`, limit `q^{-1/2} ϑ₂ϑ₂/P²`.
    C01,
    /// `Z^{(00)}` against `Γ`, limit `-q^{-1/2} ϑ₁ϑ₁/P²`.
    C00,
}

impl Corollary {
    pub const ALL: [Corollary; 4] = [Corollary::C11, Corollary::C10, Corollary::C01, Corollary::C00];

    pub fn label(self) -> &'static str {
        match self {
            Corollary::C11 => "11",
            Corollary::C10 => "10",
            Corollary::C01 => "01",
            Corollary::C00 => "00",
        }
    }

    pub fn parse(s: &str) -> Option<Corollary> {
        Corollary::ALL.into_iter().find(|c| c.label() == s)
    }

    fn indices(self) -> (u8, u8) {
        match self {
            Corollary::C11 => (1, 1),
            Corollary::C10 => (1, 0),
            Corollary::C01 => (0, 1),
            Corollary::C00 => (0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryCheck {
    pub which: Corollary,
    pub finite: Complex64,
    pub limit: Complex64,
}

impl CorollaryCheck {
    /// `|log(finite/limit)|`, or `None` when either side vanishes.
    pub fn log_ratio(&self) -> Option<f64> {
        if self.finite.norm() == 0.0 || self.limit.norm() == 0.0 {
            return None;
        }
        Some((self.finite / self.limit).ln().norm())
    }
}

/// `(-1)^{mn} Z^{(ση)}(α, β) / (Λ¹Λ² or Γ¹Γ²)(α)` against its theta limit at
/// `ρ = n/(√3 m)`.
pub fn corollary_check(which: Corollary, alpha: f64, beta: f64, m: usize, n: usize) -> Result<CorollaryCheck> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("corollary checks need m, n >= 2, got ({m}, {n})")));
    }
    let (sigma, eta) = which.indices();
    let z = block_term(sigma, eta, &Perturbation::real(alpha, beta), m, n);
    let denom = match which {
        Corollary::C11 | Corollary::C10 => lambda_product(alpha, m, n)?,
        Corollary::C01 | Corollary::C00 => gamma_product(alpha, m, n)?,
    };
    let mut ratio = z.div(&denom)?;
    if (m * n) % 2 == 1 {
        ratio = ratio.neg();
    }
    let finite = ratio.to_complex().ok_or_else(|| Error::precision("corollary ratio overflows"))?;

    let r = rho(m, n);
    let (zeta, q) = limit_parameters(alpha, beta, r);
    let nome = Nome::real(q)?;
    let p2 = euler_p(&nome)?.powi(2);
    let pair = |i: u8| -> Result<Complex64> { Ok(theta(i, zeta, &nome)? * theta(i, zeta.conj(), &nome)?) };
    let limit = match which {
        Corollary::C11 => pair(3)? / p2,
        Corollary::C10 => pair(4)? / p2,
        Corollary::C01 => pair(2)? / (p2 * q.sqrt()),
        Corollary::C00 => -pair(1)? / (p2 * q.sqrt()),
    };
    Ok(CorollaryCheck { which, finite, limit })
}

/// The three finite-size residuals of the bulk-product asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop18Residuals {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    /// `|log(A^{n/3} ΛΛ(α)/ΛΛ(0)) - πα²ρ/2|`.
    pub part1: f64,
    /// `|log(A^{n/3} (-1)^n ΓΓ(α)/ΛΛ(0)) - (log q^{1/2} + πα²ρ/2)|`, phase taken mod 2π.
    pub part2: f64,
    /// `|log|ΛΛ(0)| - (πρ/6 - mn f)|`.
    pub part3: f64,
    /// Phase of `ΛΛ(0)` relative to `π mn`, wrapped.
    pub part3_phase: f64,
}

pub fn prop18_residuals(alpha: f64, m: usize, n: usize, f: f64) -> Result<Prop18Residuals> {
    let r = rho(m, n);
    let l0 = lambda_log(0.0, m, n)?;
    let la = lambda_log(alpha, m, n)?;
    let ga = gamma_log(alpha, m, n)?;
    let log_a = PI * alpha * n as f64 / 3.0;
    let gauss = PI * alpha * alpha * r / 2.0;

    let d1 = la - l0 + log_a - gauss;
    let d2 = ga + I * PI * n as f64 - l0 + log_a - (-PI * r / 2.0 + gauss);
    let part2 = Complex64::new(d2.re, wrap_phase(d2.im)).norm();
    let part3 = (l0.re - (PI * r / 6.0 - (m * n) as f64 * f)).abs();
    let part3_phase = wrap_phase(l0.im - PI * (m * n) as f64).abs();
    Ok(Prop18Residuals { m, n, alpha, part1: d1.norm(), part2, part3, part3_phase })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1213Report {
    pub m: usize,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `⌊m^{1/4}⌋`, the split between head and tail frequencies.
    pub cutoff: usize,
    /// The four tail products, in the order `B⁻¹r₁⁻ⁿ(+)`, `Br₂ⁿ(+)`, `Br₁ⁿ(-)`, `B⁻¹r₂⁻ⁿ(-)`.
    pub tails: [Complex64; 4],
    pub tail_deviation: f64,
    /// Head products for `r₁` and `r₂`.
    pub heads: [Complex64; 2],
    /// `ϑ₃(ζ̄, q)/P(q)` and `ϑ₃(ζ, q)/P(q)`.
    pub head_targets: [Complex64; 2],
    pub head_deviation: f64,
}

fn fourth_root_floor(m: usize) -> usize {
    let mut j = (m as f64).powf(0.25).floor() as usize;
    while (j + 1).pow(4) <= m {
        j += 1;
    }
    while j > 0 && j.pow(4) > m {
        j -= 1;
    }
    j
}

/// Splits the `Z^{(11)}` correction factors at `j = ⌊m^{1/4}⌋` and compares
/// the tails with 1 and the heads with their theta limits.
pub fn lemma12_13_report(alpha: f64, beta: f64, m: usize, n: usize) -> Result<Lemma1213Report> {
    check_grid(m, n)?;
    let cutoff = fourth_root_floor(m);
    let big_b = (PI * beta).exp();
    let nf = n as f64;
    // log r₁ at φ = π(iα ± (2j+1))/m
    let up = |j: usize| roots(Complex64::new(PI * (2 * j + 1) as f64, PI * alpha) / m as f64).map(|r| r.log_r1);
    let down = |j: usize| roots(Complex64::new(-PI * (2 * j + 1) as f64, PI * alpha) / m as f64).map(|r| r.log_r1);
    // r₂ = 1/r₁, so r₂ⁿ = e^{-n log r₁}
    let f_up_r1 = |l: Complex64| 1.0 + (-nf * l).exp() / big_b;
    let f_up_r2 = |l: Complex64| 1.0 + (-nf * l).exp() * big_b;
    let f_down_r1 = |l: Complex64| 1.0 + (nf * l).exp() * big_b;
    let f_down_r2 = |l: Complex64| 1.0 + (nf * l).exp() / big_b;

    let one = Complex64::new(1.0, 0.0);
    let mut tails = [one; 4];
    for j in cutoff..=(m - 1) / 2 {
        let l = up(j)?;
        tails[0] *= f_up_r1(l);
        tails[1] *= f_up_r2(l);
    }
    for j in cutoff..(m / 2) {
        let l = down(j)?;
        tails[2] *= f_down_r1(l);
        tails[3] *= f_down_r2(l);
    }
    let mut heads = [one; 2];
    for j in 0..cutoff {
        let (lu, ld) = (up(j)?, down(j)?);
        heads[0] *= f_up_r1(lu) * f_down_r1(ld);
        heads[1] *= f_up_r2(lu) * f_down_r2(ld);
    }
    let (zeta, q) = limit_parameters(alpha, beta, rho(m, n));
    let nome = Nome::real(q)?;
    let p = euler_p(&nome)?;
    let head_targets = [theta(3, zeta.conj(), &nome)? / p, theta(3, zeta, &nome)? / p];
    let tail_deviation = tails.iter().map(|t| (t - 1.0).norm()).fold(0.0, f64::max);
    let head_deviation = (0..2).map(|i| (heads[i] - head_targets[i]).norm()).fold(0.0, f64::max);
    Ok(Lemma1213Report { m, n, alpha, beta, cutoff, tails, tail_deviation, heads, head_targets, head_deviation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FreeEnergyMethod {
    /// `-(1/4π²) ∫_0^{2π} ∫_0^{2π} log|2(cos ψ + 1) - e^{iφ}| dφ dψ`, `φ` inner.
    DoubleIntegral,
    /// The same integral with `ψ` inner.
    DoubleIntegralSwapped,
    /// `-(1/2π) ∫_0^{2π} log|r₁(φ)| dφ`.
    LogR1Integral,
}

impl FreeEnergyMethod {
    pub const ALL: [FreeEnergyMethod; 3] =
        [FreeEnergyMethod::DoubleIntegral, FreeEnergyMethod::DoubleIntegralSwapped, FreeEnergyMethod::LogR1Integral];

    pub fn label(self) -> &'static str {
        match self {
            FreeEnergyMethod::DoubleIntegral => "double_integral",
            FreeEnergyMethod::DoubleIntegralSwapped => "double_integral_swapped",
            FreeEnergyMethod::LogR1Integral => "log_r1_integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub method: FreeEnergyMethod,
    pub estimated_error: f64,
}

fn integrand(phi: f64, psi: f64) -> f64 {
    (Complex64::from(2.0 * (psi.cos() + 1.0)) - Complex64::from_polar(1.0, phi)).norm().ln()
}

/// Free energy per fundamental domain.
pub fn free_energy(method: FreeEnergyMethod, tol: f64) -> Result<FreeEnergy> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let q = Adaptive::new();
    let two_pi = 2.0 * PI;
    // 2(cos ψ + 1) crosses 1 at 2π/3 and 4π/3 and vanishes at π.
    let psi_breaks = [0.0, two_pi / 3.0, PI, 2.0 * two_pi / 3.0, two_pi];
    let scale = 4.0 * PI * PI;
    let (integral, err) = match method {
        FreeEnergyMethod::DoubleIntegral => {
            let inner_tol = tol * scale / (4.0 * two_pi);
            let mut failure = None;
            let outer = q.integrate(&psi_breaks, tol * scale / 2.0, |psi| {
                match q.integrate(&[0.0, PI, two_pi], inner_tol, |phi| integrand(phi, psi)) {
                    Ok(e) => e.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            (outer.value, outer.error + inner_tol * two_pi)
        }
        FreeEnergyMethod::DoubleIntegralSwapped => {
            let inner_tol = tol * scale / (4.0 * two_pi);
            let mut failure = None;
            let outer = q.integrate(&[0.0, PI, two_pi], tol * scale / 2.0, |phi| {
                match q.integrate(&psi_breaks, inner_tol, |psi| integrand(phi, psi)) {
                    Ok(e) => e.value,
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            (outer.value, outer.error + inner_tol * two_pi)
        }
        FreeEnergyMethod::LogR1Integral => {
            let mut failure = None;
            let e = q.integrate(&[0.0, PI, two_pi], tol * two_pi, |phi| match roots(Complex64::from(phi)) {
                Ok(r) => r.log_r1.re,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            return Ok(FreeEnergy { value: -e.value / two_pi, method, estimated_error: e.error / two_pi });
        }
    };
    Ok(FreeEnergy { value: -integral / scale, method, estimated_error: err / scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn special_values() {
        let r = roots(c(0.0, 0.0)).unwrap();
        assert!((r.r1 - Complex64::from_polar(1.0, 2.0 * PI / 3.0)).norm() < 1e-15);
        let r = roots(c(PI, 0.0)).unwrap();
        assert!((r.r1.re + (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14 && r.r1.im.abs() < 1e-15);
        for y in [-0.9, -0.3, 0.0, 0.4, 1.0] {
            assert!((roots(c(0.0, y)).unwrap().r1.norm() - 1.0).abs() < 1e-14);
        }
        assert!(roots(c(0.0, 1.2)).is_err());
        assert!(roots(c(-3.2, 0.0)).is_err());
    }

    #[test]
    fn branch_is_continuous_across_pi() {
        for y in [-0.5, 0.0, 0.5] {
            let a = roots(c(PI - 1e-9, y)).unwrap().r1;
            let b = roots(c(PI, y)).unwrap().r1;
            let d = roots(c(PI + 1e-9, y)).unwrap().r1;
            assert!((a - b).norm() < 1e-6 && (b - d).norm() < 1e-6);
            assert!(b.norm() > 1.0);
        }
        // and through 0 and 2π the argument stays in (π/2, 3π/2)
        for x in [-0.01, -1e-12, 0.0, 1e-12, 0.01, 2.0 * PI - 0.01, 2.0 * PI, 2.0 * PI + 0.01] {
            let l = roots(c(x, 0.3)).unwrap().log_r1.im;
            assert!(l > PI / 2.0 && l < 1.5 * PI);
        }
    }

    #[test]
    fn arg_shift() {
        assert!(arg_shift_check(c(0.0, 0.0)).unwrap() < 1e-14);
        assert!(arg_shift_check(c(0.5, 0.0)).unwrap() < 1e-10);
        assert!(arg_shift_check(c(0.5, 0.1)).unwrap() < 1e-10);
    }

    #[test]
    fn lambda_and_gamma_are_real_at_zero() {
        for (m, n) in [(3, 9), (4, 12), (5, 6)] {
            for p in [lambda_product(0.0, m, n).unwrap(), gamma_product(0.0, m, n).unwrap()] {
                let ph = p.phase.abs();
                assert!(ph < 1e-9 || (ph - PI).abs() < 1e-9, "phase {ph}");
            }
        }
    }

    #[test]
    fn bulk_product_matches_block_term_split() {
        // Z^{(11)} = (-1)^{mn} ΛΛ · (correction factors), and the corrections
        // are bounded, so log|Z^{(11)}| - log|ΛΛ| stays O(1).
        let (m, n) = (6, 18);
        let z = block_term(1, 1, &Perturbation::real(0.3, 0.2), m, n);
        let l = lambda_product(0.3, m, n).unwrap();
        assert!((z.log_magnitude - l.log_magnitude).abs() < 2.0);
    }

    #[test]
    fn free_energy_methods_agree() {
        let vals: Vec<f64> =
            FreeEnergyMethod::ALL.iter().map(|&m| free_energy(m, 1e-11).unwrap().value).collect();
        assert!((vals[0] + 0.646132).abs() < 1e-6, "{vals:?}");
        assert!((vals[0] - vals[1]).abs() < 1e-9 && (vals[0] - vals[2]).abs() < 1e-9, "{vals:?}");
        assert!(free_energy(FreeEnergyMethod::LogR1Integral, 0.0).is_err());
    }

    #[test]
    fn corollary_00_degenerate() {
        let c = corollary_check(Corollary::C00, 0.0, 0.0, 4, 12).unwrap();
        assert_eq!(c.finite, Complex64::new(0.0, 0.0));
        assert!(c.limit.norm() < 1e-15);
        assert!(c.log_ratio().is_none());
    }

    #[test]
    fn fourth_root() {
        assert_eq!(fourth_root_floor(15), 1);
        assert_eq!(fourth_root_floor(16), 2);
        assert_eq!(fourth_root_floor(80), 2);
        assert_eq!(fourth_root_floor(81), 3);
    }
}
