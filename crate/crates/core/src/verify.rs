//! Numerical check suites behind `dimer verify`. Each check reports the
//! computed value, what it is compared against, the residual and a verdict.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;

use crate::error::Result;
use crate::kasteleyn::{partition, Perturbation};
use crate::spectral::{
    arg_shift_check, corollary_check, free_energy, lemma12_13_report, prop18_residuals, roots, Corollary,
    FreeEnergyMethod, STRIP_HALF_WIDTH,
};
use crate::theta::{
    corollary10_sum, jacobi_transform_residual, theta, theta_combination, theta_product, CombinationSide, Nome,
};

/// Sizes `(k, 3k)` along which the asymptotic statements are followed.
pub const TREND_SIZES: [usize; 3] = [4, 8, 16];

const SEED: u64 = 0x5eed_d1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Suite {
    Theta,
    Roots,
    Prop18,
    Corollaries,
    Lemma1213,
    FreeEnergy,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Theta, Suite::Roots, Suite::Prop18, Suite::Corollaries, Suite::Lemma1213, Suite::FreeEnergy];

    pub fn label(self) -> &'static str {
        match self {
            Suite::Theta => "theta",
            Suite::Roots => "roots",
            Suite::Prop18 => "prop18",
            Suite::Corollaries => "corollaries",
            Suite::Lemma1213 => "lemma12-13",
            Suite::FreeEnergy => "free-energy",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check_name: String,
    pub value: f64,
    pub target: f64,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, residual: f64, bound: f64) -> Check {
        Check { check_name: name.into(), value: residual, target: 0.0, residual, pass: residual < bound }
    }

    fn compare(name: impl Into<String>, value: f64, target: f64, bound: f64) -> Check {
        let residual = (value - target).abs();
        Check { check_name: name.into(), value, target, residual, pass: residual < bound }
    }

    /// Passes when `seq` is strictly decreasing; reports the last element.
    fn decreasing(name: impl Into<String>, seq: &[f64]) -> Check {
        let last = *seq.last().unwrap_or(&f64::NAN);
        Check {
            check_name: name.into(),
            value: last,
            target: 0.0,
            residual: last,
            pass: strictly_decreasing(seq),
        }
    }
}

pub fn strictly_decreasing(seq: &[f64]) -> bool {
    seq.windows(2).all(|w| w[1] < w[0])
}

pub fn run(suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Theta => theta_suite(),
        Suite::Roots => roots_suite(),
        Suite::Prop18 => prop18_suite(),
        Suite::Corollaries => corollaries_suite(),
        Suite::Lemma1213 => lemma_suite(),
        Suite::FreeEnergy => free_energy_suite(),
    }
}

/// `max |ϑ - ϑ_product| / (1 + |ϑ|)` over `q ∈ {0.1, 0.5, 0.9}`, all four
/// indices and a fixed grid plus random points with `|Im ζ| ≤ 1`.
pub fn theta_series_product_gap() -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut zetas: Vec<Complex64> = Vec::new();
    for re in [-2.5, -1.0, 0.0, 0.3, 1.6, 3.0] {
        for im in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            zetas.push(Complex64::new(re, im));
        }
    }
    for _ in 0..40 {
        zetas.push(Complex64::new(rng.random_range(-PI..PI), rng.random_range(-1.0..=1.0)));
    }
    let mut worst: f64 = 0.0;
    for q in [0.1, 0.5, 0.9] {
        let nome = Nome::real(q)?;
        for i in 1..=4 {
            for &z in &zetas {
                let s = theta(i, z, &nome)?;
                let p = theta_product(i, z, &nome)?;
                worst = worst.max((s - p).norm() / (1.0 + s.norm()));
            }
        }
    }
    Ok(worst)
}

/// Largest sum-versus-closed discrepancy of the four-term theta identity at
/// random `ζ` with `τ = iρ`, `ρ ∈ {0.5, 1, 2}`.
pub fn theta_recombination_gap() -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    for rho in [0.5, 1.0, 2.0] {
        let tau = Complex64::new(0.0, rho);
        for _ in 0..30 {
            let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0));
            let a = theta_combination(z, tau, CombinationSide::Sum)?;
            let b = theta_combination(z, tau, CombinationSide::Closed)?;
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// Largest modular-transformation residual on a 5×5 grid of `(u, σ)`.
pub fn jacobi_transform_gap() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in [-1.0, -0.4, 0.0, 0.5, 1.2] {
        for s in [
            Complex64::new(0.0, 0.5),
            Complex64::new(0.3, 0.8),
            Complex64::new(0.0, 1.0),
            Complex64::new(-0.5, 1.5),
            Complex64::new(0.2, 3.0),
        ] {
            worst = worst.max(jacobi_transform_residual(Complex64::new(x, 0.1 * x), s)?);
        }
    }
    Ok(worst)
}

fn theta_suite() -> Result<Vec<Check>> {
    let (a, b, r) = (0.3, -0.4, 1.2);
    let zeta = Complex64::new(PI / 2.0 * r * a, PI / 2.0 * b);
    let sum = theta_combination(zeta, Complex64::new(0.0, r), CombinationSide::Sum)?.re;
    Ok(vec![
        Check::below("theta.series_vs_product", theta_series_product_gap()?, 1e-12),
        Check::below("theta.recombination", theta_recombination_gap()?, 1e-10),
        Check::below("theta.jacobi_transform", jacobi_transform_gap()?, 1e-10),
        Check::compare("theta.gaussian_lattice_sum", corollary10_sum(a, b, r, 1e-15), sum, 1e-10),
    ])
}

/// `20 × 10` points covering `Re φ ∈ [-π, 3π]`, `|Im φ| ≤ 1`.
pub fn strip_grid() -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(200);
    for i in 0..20 {
        let re = -PI + 4.0 * PI * i as f64 / 19.0;
        for j in 0..10 {
            let im = -STRIP_HALF_WIDTH + 2.0 * STRIP_HALF_WIDTH * j as f64 / 9.0;
            pts.push(Complex64::new(re, im));
        }
    }
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootsSummary {
    pub reciprocal_residual: f64,
    pub quadratic_residual: f64,
    /// Sampled points where the modulus rule fails on either side of 0.
    pub modulus_violations: usize,
    /// Largest `||r₁| - 1|` on `Re φ = 0`.
    pub unit_circle_residual: f64,
    /// Points where `|r₁|` decreases in `Re φ` on `[-π, 0)`.
    pub monotonicity_violations: usize,
    /// `log₂` of the error ratio of the local expansion between `φ = 10⁻²` and `5·10⁻³`.
    pub expansion_order: f64,
    pub arg_shift_residual: f64,
}

pub fn roots_summary() -> Result<RootsSummary> {
    let mut reciprocal: f64 = 0.0;
    let mut quadratic: f64 = 0.0;
    for phi in strip_grid() {
        let r = roots(phi)?;
        reciprocal = reciprocal.max((r.r1 * r.r2 - 1.0).norm());
        let e = (Complex64::i() * phi).exp();
        quadratic = quadratic.max((r.r1 * r.r1 + r.r1 * (2.0 - e) + 1.0).norm());
    }

    let mut modulus_violations = 0;
    for i in 1..=10 {
        let x = PI * i as f64 / 10.0;
        for j in 0..10 {
            let y = -0.5 + j as f64 / 9.0;
            if roots(Complex64::new(x, y))?.r1.norm() <= 1.0 {
                modulus_violations += 1;
            }
            if roots(Complex64::new(-x, y))?.r1.norm() >= 1.0 {
                modulus_violations += 1;
            }
        }
    }
    let mut unit: f64 = 0.0;
    for j in 0..21 {
        let y = -STRIP_HALF_WIDTH + 0.1 * j as f64;
        unit = unit.max((roots(Complex64::new(0.0, y))?.r1.norm() - 1.0).abs());
    }
    let mut monotonicity_violations = 0;
    for y in [-0.3, -0.1, 0.0, 0.1, 0.3] {
        let mut prev = 0.0;
        for i in 0..100 {
            let x = -PI + PI * i as f64 / 100.0;
            let m = roots(Complex64::new(x, y))?.r1.norm();
            if m < prev {
                monotonicity_violations += 1;
            }
            prev = m;
        }
    }
    let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let err = |phi: f64| -> Result<f64> {
        Ok((roots(Complex64::from(phi))?.r1 - w * (phi / 3f64.sqrt()).exp()).norm())
    };
    let expansion_order = (err(1e-2)? / err(5e-3)?).log2();
    let arg_shift = [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.1)]
        .into_iter()
        .map(arg_shift_check)
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(RootsSummary {
        reciprocal_residual: reciprocal,
        quadratic_residual: quadratic,
        modulus_violations,
        unit_circle_residual: unit,
        monotonicity_violations,
        expansion_order,
        arg_shift_residual: arg_shift,
    })
}

fn roots_suite() -> Result<Vec<Check>> {
    let s = roots_summary()?;
    Ok(vec![
        Check::below("roots.reciprocal", s.reciprocal_residual, 1e-12),
        Check::below("roots.quadratic", s.quadratic_residual, 1e-12),
        Check::below("roots.modulus_sign_violations", s.modulus_violations as f64, 0.5),
        Check::below("roots.unit_modulus_on_imaginary_axis", s.unit_circle_residual, 1e-12),
        Check::below("roots.monotone_modulus_violations", s.monotonicity_violations as f64, 0.5),
        Check::compare("roots.expansion_order", s.expansion_order, 2.0, 0.2),
        Check::below("roots.arg_shift", s.arg_shift_residual, 1e-10),
    ])
}

fn reference_free_energy() -> Result<f64> {
    Ok(free_energy(FreeEnergyMethod::LogR1Integral, 1e-13)?.value)
}

fn prop18_suite() -> Result<Vec<Check>> {
    let f = reference_free_energy()?;
    let mut out = Vec::new();
    let mut parts = [vec![], vec![], vec![]];
    for &k in &TREND_SIZES {
        let zero = prop18_residuals(0.0, k, 3 * k, f)?;
        out.push(Check::below(format!("prop18.part1.alpha0.k{k}"), zero.part1, 1e-12));
        out.push(Check::below(format!("prop18.part3.sign.k{k}"), zero.part3_phase, 1e-9));
        let r = prop18_residuals(0.5, k, 3 * k, f)?;
        parts[0].push(r.part1);
        parts[1].push(r.part2);
        parts[2].push(r.part3);
    }
    for (i, seq) in parts.iter().enumerate() {
        out.push(Check::decreasing(format!("prop18.part{}.decreasing", i + 1), seq));
    }
    Ok(out)
}

/// The `(α, β)` points at which the corollaries are followed.
pub const COROLLARY_POINTS: [(f64, f64); 2] = [(0.0, 0.0), (0.5, -0.5)];

fn corollaries_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &(a, b) in &COROLLARY_POINTS {
        for which in Corollary::ALL {
            let mut seq = Vec::new();
            for &k in &TREND_SIZES {
                let c = corollary_check(which, a, b, k, 3 * k)?;
                match c.log_ratio() {
                    Some(lr) => {
                        out.push(Check {
                            check_name: format!("corollary{}.a{a}.b{b}.k{k}", which.label()),
                            value: c.finite.re,
                            target: c.limit.re,
                            residual: lr,
                            pass: lr.is_finite(),
                        });
                        seq.push(lr);
                    }
                    None => out.push(Check {
                        check_name: format!("corollary{}.a{a}.b{b}.k{k}.vanishes", which.label()),
                        value: c.finite.norm(),
                        target: 0.0,
                        residual: c.finite.norm() + c.limit.norm(),
                        pass: c.finite.norm() == 0.0 && c.limit.norm() < 1e-14,
                    }),
                }
            }
            if !seq.is_empty() {
                out.push(Check::decreasing(format!("corollary{}.a{a}.b{b}.decreasing", which.label()), &seq));
            }
        }
    }
    Ok(out)
}

fn lemma_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let r = lemma12_13_report(0.0, 0.0, 16, 48)?;
    out.push(Check::below("lemma12.tails.m16", r.tail_deviation, 1e-3));
    let mut heads = Vec::new();
    for &k in &TREND_SIZES {
        let r = lemma12_13_report(0.0, 0.0, k, 3 * k)?;
        out.push(Check::compare(format!("lemma13.head.k{k}"), r.heads[0].re, r.head_targets[0].re, 1e-1));
        heads.push(r.head_deviation);
    }
    out.push(Check::decreasing("lemma13.heads.decreasing", &heads));
    Ok(out)
}

/// `-log Z_{k,3k}(0,0) / (3k²)`.
pub fn finite_free_energy(k: usize) -> Result<f64> {
    let z = partition(&Perturbation::zero(), k, 3 * k)?;
    Ok(-z.log_magnitude / (3 * k * k) as f64)
}

fn free_energy_suite() -> Result<Vec<Check>> {
    let vals = FreeEnergyMethod::ALL
        .iter()
        .map(|&m| free_energy(m, 1e-11))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for v in &vals[1..] {
        out.push(Check::compare(
            format!("free_energy.{}_vs_{}", v.method.label(), vals[0].method.label()),
            v.value,
            vals[0].value,
            1e-8,
        ));
    }
    let f = vals[0].value;
    out.push(Check { check_name: "free_energy.negative".into(), value: f, target: 0.0, residual: f.max(0.0), pass: f < 0.0 });
    let errs = [2, 4, 8].iter().map(|&k| Ok((finite_free_energy(k)? - f).abs())).collect::<Result<Vec<f64>>>()?;
    out.push(Check::decreasing("free_energy.finite_size.decreasing", &errs));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_labels_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::parse(s.label()), Some(s));
        }
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn decreasing_rule() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
        assert!(strictly_decreasing(&[1.0]));
    }

    #[test]
    fn theta_and_roots_suites_pass() {
        for s in [Suite::Theta, Suite::Roots] {
            for c in run(s).unwrap() {
                assert!(c.pass, "{c:?}");
            }
        }
    }
}
