//! Adaptive Gauss–Legendre quadrature on finite intervals.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const DEGREE: usize = 20;
const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

pub struct Adaptive {
    rule: GaussLegendre,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive::new()
    }
}

impl Adaptive {
    pub fn new() -> Self {
        Adaptive { rule: GaussLegendre::new(NonZeroUsize::new(DEGREE).unwrap()) }
    }

    /// `∫_a^b f` over the panels delimited by `breaks` (which must include
    /// both ends). Each panel is bisected until a one-panel and a two-panel
    /// estimate agree to a share of `tol` proportional to its width.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, breaks: &[f64], tol: f64, mut f: F) -> Result<Estimate> {
        let total = breaks[breaks.len() - 1] - breaks[0];
        let mut value = 0.0;
        let mut error = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let whole = self.rule.integrate(a, b, &mut f);
            let mut stack = vec![(a, b, whole, 0u32)];
            while let Some((a, b, whole, depth)) = stack.pop() {
                let mid = 0.5 * (a + b);
                let left = self.rule.integrate(a, mid, &mut f);
                let right = self.rule.integrate(mid, b, &mut f);
                let diff = (left + right - whole).abs();
                let share = tol * (b - a) / total;
                if diff <= share || depth >= MAX_DEPTH {
                    value += left + right;
                    error += diff;
                } else {
                    stack.push((a, mid, left, depth + 1));
                    stack.push((mid, b, right, depth + 1));
                }
            }
        }
        if !(error <= tol) {
            return Err(Error::Quadrature { tol, estimate: error });
        }
        Ok(Estimate { value, error })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn smooth_and_singular() {
        let q = Adaptive::new();
        let e = q.integrate(&[0.0, PI], 1e-13, f64::sin).unwrap();
        assert!((e.value - 2.0).abs() < 1e-13);
        // ∫_0^1 ln x = -1
        let e = q.integrate(&[0.0, 1.0], 1e-11, |x| x.ln()).unwrap();
        assert!((e.value + 1.0).abs() < 1e-10, "{}", e.value);
    }
}
