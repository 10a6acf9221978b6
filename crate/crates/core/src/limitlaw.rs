//! The two-dimensional discrete Gaussian on `ℤ²` with weights
//! `e^{-π(k²/ρ + ρl²)/2}`, the leading-order asymptotics of `Z_{m,n}(α, β)`,
//! and finite-size convergence diagnostics.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kasteleyn::extended::{extract_winding_counts, required_digits, DEFAULT_DIGITS};
use crate::kasteleyn::{partition, Perturbation};
use crate::logprod::LogProduct;
use crate::spectral::{free_energy, rho, FreeEnergyMethod};
use crate::table::{count_json, WindingTable};
use crate::theta::{euler_p, gaussian_line_sum, Nome};

pub const DEFAULT_TAIL: f64 = 1e-12;

/// `(α, β)` grid on which finite and limiting MGFs are compared.
pub const MGF_GRID: [f64; 3] = [-1.0, 0.0, 1.0];

/// Largest relative deviation of `n/(√3 m)` from the target modulus.
pub const MODULUS_SLACK: f64 = 0.2;

/// A probability law on `ℤ²`, possibly known only on a finite window.
pub trait LatticeDistribution {
    fn probability(&self, k: i64, l: i64) -> f64;
    /// Points carrying positive mass.
    fn support(&self) -> Vec<(i64, i64)>;
    /// Whether `probability(k, l)` is known at this point.
    fn covers(&self, k: i64, l: i64) -> bool;
}

impl LatticeDistribution for WindingTable {
    fn probability(&self, k: i64, l: i64) -> f64 {
        WindingTable::probability(self, k, l).to_f64()
    }

    fn support(&self) -> Vec<(i64, i64)> {
        self.entries().map(|(kl, _)| kl).collect()
    }

    fn covers(&self, _: i64, _: i64) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteGaussianLaw {
    pub rho: f64,
    /// Truncation radius: the law is tabulated on `[-K, K]²`.
    pub radius: i64,
    /// `Z_ρ` over the truncated window.
    pub normalizer: f64,
    #[serde(skip)]
    pub probabilities: BTreeMap<(i64, i64), f64>,
}

impl DiscreteGaussianLaw {
    pub fn get(&self, k: i64, l: i64) -> f64 {
        self.probabilities.get(&(k, l)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// `Σ P(k, l) e^{-π(αk + βl)}` over the truncated window.
    pub fn mgf(&self, alpha: f64, beta: f64) -> f64 {
        self.probabilities
            .iter()
            .map(|(&(k, l), p)| p * (-PI * (alpha * k as f64 + beta * l as f64)).exp())
            .sum()
    }
}

impl LatticeDistribution for DiscreteGaussianLaw {
    fn probability(&self, k: i64, l: i64) -> f64 {
        self.get(k, l)
    }

    fn support(&self) -> Vec<(i64, i64)> {
        self.probabilities.keys().copied().collect()
    }

    fn covers(&self, k: i64, l: i64) -> bool {
        k.abs() <= self.radius && l.abs() <= self.radius
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
    }
    Ok(())
}

/// Smallest `K` for which both one-dimensional Gaussian tails beyond `K` are
/// below `eps`. The narrower direction has variance `min(ρ, 1/ρ)/π`, the
/// wider one `max(ρ, 1/ρ)/π`.
pub fn truncation_radius(rho: f64, eps: f64) -> i64 {
    let wide = rho.max(1.0 / rho);
    (2.0 * wide * eps.ln().abs() / PI).sqrt().ceil() as i64 + 1
}

pub fn law(rho: f64, eps: f64) -> Result<DiscreteGaussianLaw> {
    check_rho(rho)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("tail tolerance must lie in (0, 1), got {eps}")));
    }
    law_with_radius(rho, truncation_radius(rho, eps))
}

/// The law tabulated on `[-radius, radius]²`.
pub fn law_with_radius(rho: f64, radius: i64) -> Result<DiscreteGaussianLaw> {
    check_rho(rho)?;
    let mut weights = BTreeMap::new();
    for k in -radius..=radius {
        for l in -radius..=radius {
            let w = (-PI * ((k * k) as f64 / rho + rho * (l * l) as f64) / 2.0).exp();
            weights.insert((k, l), w);
        }
    }
    let normalizer: f64 = weights.values().sum();
    let probabilities = weights.into_iter().map(|(kl, w)| (kl, w / normalizer)).collect();
    Ok(DiscreteGaussianLaw { rho, radius, normalizer, probabilities })
}

/// `F_ρ(α, β) = Σ e^{-π(αk+βl)} e^{-π(k²/ρ + ρl²)/2} / Z_ρ`, summed along
/// each axis separately on windows centred at the shifted peak.
pub fn limit_mgf(alpha: f64, beta: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let (sk, sl) = (PI / (2.0 * rho), PI * rho / 2.0);
    let num = gaussian_line_sum(-PI * alpha, sk, DEFAULT_TAIL) * gaussian_line_sum(-PI * beta, sl, DEFAULT_TAIL);
    let den = gaussian_line_sum(0.0, sk, DEFAULT_TAIL) * gaussian_line_sum(0.0, sl, DEFAULT_TAIL);
    Ok(num / den)
}

/// The leading asymptotic form of `Z_{m,n}(α, β)`:
///
/// ```text
/// (-1)^{mn} e^{-πnα/3} e^{-mn f} e^{πρ/6} / (√(2ρ) P(e^{-ρπ})²)
///     × Σ_{k,l} e^{π(αk+βl)} e^{-π(k²/ρ + ρl²)/2}
/// ```
///
/// at `ρ = n/(√3 m)`.
pub fn theorem4_prediction(alpha: f64, beta: f64, m: usize, n: usize, f: f64) -> Result<LogProduct> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidSize { m, n });
    }
    let r = rho(m, n);
    let p = euler_p(&Nome::real((-r * PI).exp())?)?.re;
    let s = gaussian_line_sum(PI * alpha, PI / (2.0 * r), DEFAULT_TAIL)
        * gaussian_line_sum(PI * beta, PI * r / 2.0, DEFAULT_TAIL);
    let mn = (m * n) as f64;
    let log = -PI * n as f64 * alpha / 3.0 - mn * f + PI * r / 6.0 - 0.5 * (2.0 * r).ln() - 2.0 * p.ln() + s.ln();
    let phase = if (m * n) % 2 == 0 { 0.0 } else { PI };
    Ok(LogProduct::new(log, phase))
}

/// `Z_{m,n}(α, β) / prediction` as a real number.
pub fn theorem4_ratio(alpha: f64, beta: f64, m: usize, n: usize, f: f64) -> Result<f64> {
    let z = partition(&Perturbation::real(alpha, beta), m, n)?;
    let pred = theorem4_prediction(alpha, beta, m, n, f)?;
    let ratio = z.div(&pred)?;
    ratio.to_complex().map(|c| c.re).ok_or_else(|| Error::precision("theorem 4 ratio overflows"))
}

/// `½ Σ |p(k,l) - q(k,l)|` over the union of the supports.
pub fn tv_distance<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: LatticeDistribution + ?Sized,
    B: LatticeDistribution + ?Sized,
{
    let mut points: BTreeSet<(i64, i64)> = a.support().into_iter().collect();
    points.extend(b.support());
    let mut sum = 0.0;
    for &(k, l) in &points {
        if !a.covers(k, l) || !b.covers(k, l) {
            return Err(Error::InvalidArgument(format!(
                "truncation window does not cover ({k}, {l}); lower the tail tolerance"
            )));
        }
        sum += (a.probability(k, l) - b.probability(k, l)).abs();
    }
    Ok(0.5 * sum)
}

/// Whether the exact probabilities of `table` add up to one.
pub fn sums_to_one(table: &WindingTable) -> bool {
    let mut s = Rational::new();
    for ((k, l), _) in table.entries() {
        s += table.probability(k, l);
    }
    s == 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub m: usize,
    pub n: usize,
    pub rho: f64,
    pub digits: u32,
    pub total: serde_json::Value,
    pub tv: f64,
    pub mgf_gap_max: f64,
    pub theorem4_ratio: f64,
    pub table_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rho_target: f64,
    pub free_energy: f64,
    pub entries: Vec<ConvergenceEntry>,
    #[serde(skip)]
    pub tables: Vec<WindingTable>,
}

#[derive(Debug, Clone, Default)]
pub struct ConvergenceOptions {
    /// Decimal digits for the extraction; by default the larger of the
    /// default precision and what the size requires.
    pub digits: Option<u32>,
    /// Directory receiving one `winding_m{m}_n{n}.csv` per size.
    pub table_dir: Option<PathBuf>,
}

fn table_file(dir: &Path, m: usize, n: usize) -> PathBuf {
    dir.join(format!("winding_m{m}_n{n}.csv"))
}

/// Exact winding tables for each size compared against the discrete
/// Gaussian at that size's own modulus.
pub fn convergence_report(rho_target: f64, sizes: &[(usize, usize)], opts: &ConvergenceOptions) -> Result<ConvergenceReport> {
    check_rho(rho_target)?;
    for &(m, n) in sizes {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSize { m, n });
        }
        if n % 3 != 0 {
            return Err(Error::NotMultipleOfThree { n });
        }
        let r = rho(m, n);
        if (r / rho_target - 1.0).abs() > MODULUS_SLACK {
            return Err(Error::InvalidArgument(format!(
                "size ({m}, {n}) has modulus {r:.4}, more than 20% away from {rho_target}"
            )));
        }
    }
    let f = free_energy(FreeEnergyMethod::LogR1Integral, 1e-13)?.value;
    let mut entries = Vec::new();
    let mut tables = Vec::new();
    for &(m, n) in sizes {
        let digits = match opts.digits {
            Some(d) => d,
            None => required_digits(m, n)?.max(DEFAULT_DIGITS),
        };
        let table = extract_winding_counts(m, n, digits)?;
        let r = rho(m, n);
        // The window must also reach every class the table can hold.
        let reach = (2 * n / 3).max(m) as i64;
        let limit = law_with_radius(r, truncation_radius(r, DEFAULT_TAIL).max(reach))?;
        let tv = tv_distance(&table, &limit)?;
        let mut gap: f64 = 0.0;
        for &a in &MGF_GRID {
            for &b in &MGF_GRID {
                gap = gap.max((table.mgf(a, b) - limit_mgf(a, b, r)?).abs());
            }
        }
        let table_path = match &opts.table_dir {
            Some(dir) => {
                let path = table_file(dir, m, n);
                std::fs::write(&path, table.to_csv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                Some(path.display().to_string())
            }
            None => None,
        };
        entries.push(ConvergenceEntry {
            m,
            n,
            rho: r,
            digits,
            total: count_json(&table.total()),
            tv,
            mgf_gap_max: gap,
            theorem4_ratio: theorem4_ratio(0.0, 0.0, m, n, f)?,
            table_path,
        });
        tables.push(table);
    }
    Ok(ConvergenceReport { rho_target, free_energy: f, entries, tables })
}
