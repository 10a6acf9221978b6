//! Exact winding-number histograms `C_{k,l}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rug::float::Constant;
use rug::{Float, Integer, Rational};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Largest integer exactly representable as an IEEE double.
const EXACT_F64_LIMIT: u64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindingTable {
    pub m: usize,
    pub n: usize,
    counts: BTreeMap<(i64, i64), Integer>,
}

impl WindingTable {
    pub fn new(m: usize, n: usize) -> Self {
        WindingTable { m, n, counts: BTreeMap::new() }
    }

    /// Adds `c` to `C_{k,l}`. Zero entries are not stored.
    pub fn add(&mut self, k: i64, l: i64, c: impl Into<Integer>) {
        let c = c.into();
        if c == 0 {
            return;
        }
        let slot = self.counts.entry((k, l)).or_default();
        *slot += c;
        if *slot == 0 {
            self.counts.remove(&(k, l));
        }
    }

    pub fn get(&self, k: i64, l: i64) -> Integer {
        self.counts.get(&(k, l)).cloned().unwrap_or_default()
    }

    /// Number of nonzero entries.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i64, i64), &Integer)> {
        self.counts.iter().map(|(&kl, c)| (kl, c))
    }

    pub fn total(&self) -> Integer {
        Integer::sum(self.counts.values()).into()
    }

    /// `C_{k,l} = C_{k,-l}` for all entries.
    pub fn is_reflection_symmetric(&self) -> bool {
        self.counts.iter().all(|(&(k, l), c)| self.counts.get(&(k, -l)) == Some(c))
    }

    /// Support within `k ∈ [-n/3, 2n/3]`, `l ∈ [-m, m]`.
    pub fn within_support_bounds(&self) -> bool {
        let (kmin, kmax) = support_k(self.n);
        let m = self.m as i64;
        self.counts.keys().all(|&(k, l)| (kmin..=kmax).contains(&k) && (-m..=m).contains(&l))
    }

    /// Exact probability of class `(k, l)`.
    pub fn probability(&self, k: i64, l: i64) -> Rational {
        let total = self.total();
        if total == 0 {
            return Rational::new();
        }
        Rational::from((self.get(k, l), total))
    }

    /// `Σ C e^{-π(αk+βl)} / Σ C` in double precision. The largest count is
    /// factored out first so that huge tables do not overflow.
    pub fn mgf(&self, alpha: f64, beta: f64) -> f64 {
        let total = self.total();
        let mut sum = 0.0;
        for (&(k, l), c) in &self.counts {
            let p = Rational::from((c.clone(), total.clone())).to_f64();
            sum += p * (-std::f64::consts::PI * (alpha * k as f64 + beta * l as f64)).exp();
        }
        sum
    }

    /// Same as [`WindingTable::mgf`] evaluated with `bits` of precision.
    pub fn mgf_extended(&self, alpha: f64, beta: f64, bits: u32) -> Float {
        let pi = Float::with_val(bits, Constant::Pi);
        let mut num = Float::with_val(bits, 0);
        for (&(k, l), c) in &self.counts {
            let mut expo = Float::with_val(bits, alpha) * k + Float::with_val(bits, beta) * l;
            expo *= &pi;
            expo = -expo;
            num += Float::with_val(bits, c) * expo.exp();
        }
        num / Float::with_val(bits, self.total())
    }

    /// CSV with header `k,l,count`, rows sorted by `(k, l)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l,count\n");
        for (&(k, l), c) in &self.counts {
            writeln!(out, "{k},{l},{c}").unwrap();
        }
        out
    }

    pub fn from_csv(m: usize, n: usize, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "k,l,count" => {}
            _ => return Err(Error::Parse { line: 1, detail: "expected header `k,l,count`".into() }),
        }
        let mut t = WindingTable::new(m, n);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Parse { line: idx + 1, detail: format!("malformed row `{line}`") };
            let mut f = line.split(',');
            let k: i64 = f.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let l: i64 = f.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            let c: Integer = f.next().and_then(|s| s.trim().parse().ok()).ok_or_else(bad)?;
            if f.next().is_some() || c < 0 {
                return Err(bad());
            }
            t.add(k, l, c);
        }
        Ok(t)
    }

    /// JSON `{m, n, total, entries: [{k, l, count}]}`; counts beyond 2^53 are
    /// written as decimal strings.
    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .counts
            .iter()
            .map(|(&(k, l), c)| json!({ "k": k, "l": l, "count": count_json(c) }))
            .collect();
        json!({
            "m": self.m,
            "n": self.n,
            "total": count_json(&self.total()),
            "entries": entries,
        })
    }
}

/// Inclusive range of possible horizontal winding numbers at height `n`.
pub fn support_k(n: usize) -> (i64, i64) {
    let n = n as i64;
    (-(n / 3), 2 * n / 3)
}

pub fn count_json(c: &Integer) -> Value {
    match c.to_u64() {
        Some(v) if v <= EXACT_F64_LIMIT => json!(v),
        _ => json!(c.to_string()),
    }
}
