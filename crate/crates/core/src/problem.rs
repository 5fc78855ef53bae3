//! The problem triple (n, p, b) and its derived constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sixth-order problem instance: dimension `n`, exponent `p`, and the
/// theorem parameter `b` that sets the amplitude of the second-order term.
///
/// The derived constants are cached on construction: `m = 6/(p-1)` and the
/// singular-solution amplitude `L` with
/// `L^{p-1} = m(m+2)(m+4)(n-2-m)(n-4-m)(n-6-m)`, so that `u = L r^{-m}`
/// solves (-Δ)³u = uᵖ away from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub n: u32,
    pub p: f64,
    pub b: f64,
    /// Decay exponent of the singular solution, 6/(p-1).
    pub m: f64,
    /// Amplitude L of the singular solution.
    pub big_l: f64,
}

impl Problem {
    /// Validates (n, p, b) and computes the derived constants.
    ///
    /// Requires n ≥ 15, p > n/(n-6) (so m ∈ (0, n-6) and every factor of the
    /// L-product is positive), and b > 0.
    pub fn new(n: u32, p: f64, b: f64) -> Result<Problem> {
        if n < 15 {
            return Err(Error::domain(format!("n = {n} < 15")));
        }
        if !p.is_finite() || p <= f64::from(n) / f64::from(n - 6) {
            return Err(Error::domain(format!(
                "p = {p} must exceed n/(n-6) = {}",
                f64::from(n) / f64::from(n - 6)
            )));
        }
        if !(b > 0.0) {
            return Err(Error::domain(format!("b = {b} must be positive")));
        }
        let m = 6.0 / (p - 1.0);
        let prod = sextic_product(n, m);
        debug_assert!(prod > 0.0);
        let big_l = prod.powf(1.0 / (p - 1.0));
        Ok(Problem { n, p, b, m, big_l })
    }

    /// L^{p-1}, i.e. the six-factor product at m.
    pub fn l_pow_pm1(&self) -> f64 {
        sextic_product(self.n, self.m)
    }

    /// d = p L^{p-1}, the constant term of the characteristic equation.
    pub fn d(&self) -> f64 {
        self.p * self.l_pow_pm1()
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }
}

/// m(m+2)(m+4)(n-2-m)(n-4-m)(n-6-m).
pub(crate) fn sextic_product(n: u32, m: f64) -> f64 {
    let nf = f64::from(n);
    m * (m + 2.0) * (m + 4.0) * (nf - 2.0 - m) * (nf - 4.0 - m) * (nf - 6.0 - m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_at_n15_p2() {
        let prob = Problem::new(15, 2.0, 1.0).unwrap();
        assert_eq!(prob.m, 6.0);
        // 6*8*10*7*5*3 = 50400, (p-1)-th root with p-1 = 1
        assert_eq!(prob.big_l, 50400.0);
        assert_eq!(prob.d(), 100800.0);
    }

    #[test]
    fn rejects_inadmissible_input() {
        assert!(Problem::new(14, 2.0, 1.0).is_err());
        assert!(Problem::new(15, 15.0 / 9.0, 1.0).is_err()); // p = n/(n-6)
        assert!(Problem::new(15, 2.0, 0.0).is_err());
        assert!(Problem::new(15, 2.0, -1.0).is_err());
    }

    #[test]
    fn defining_identity_of_l() {
        for &(n, p) in &[(15u32, 2.0f64), (20, 4.5), (25, 2.7), (40, 1.7)] {
            let prob = Problem::new(n, p, 1.0).unwrap();
            let lhs = prob.big_l.powf(p - 1.0);
            let rhs = prob.l_pow_pm1();
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-12,
                "L^(p-1) identity off at n={n} p={p}: {lhs} vs {rhs}"
            );
        }
    }
}
