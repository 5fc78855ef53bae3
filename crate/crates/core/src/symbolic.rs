//! Exact radial calculus on finite sums of power-log terms
//! a·r^{-α}·logᵞ(r/R), the representation every barrier formula lives in,
//! plus the binomial bound constant C_p of
//!
//!   1 - pz ≤ (1-z)ᵖ ≤ 1 - pz + C_p z²,   z ∈ [0, 1].
//!
//! The workhorse identity (γ a non-negative integer):
//!
//!   Δ(r^{-α} logᵞ(r/R)) = -α(n-2-α) r^{-α-2} logᵞ
//!                       + γ(n-2-2α) r^{-α-2} logᵞ⁻¹
//!                       + γ(γ-1) r^{-α-2} logᵞ⁻²,
//!
//! closed on the term algebra, so (-Δ)³ of any barrier is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for merging decay powers α that arise from root
/// finding; near-equal powers must merge or the Laplacian identities fail
/// structurally.
pub const ALPHA_MERGE_TOL: f64 = 1e-12;

/// One term a·r^{-α}·logᵞ(r/R). Terms with γ = 0 ignore the log base
/// (normalized to 1 on construction).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogTerm {
    pub coef: f64,
    pub alpha: f64,
    pub gamma: u32,
    pub log_base: f64,
}

impl PowerLogTerm {
    pub fn new(coef: f64, alpha: f64, gamma: u32, log_base: f64) -> PowerLogTerm {
        assert!(coef.is_finite() && alpha.is_finite());
        assert!(log_base > 0.0, "log base must be positive");
        PowerLogTerm {
            coef,
            alpha,
            gamma,
            log_base: if gamma == 0 { 1.0 } else { log_base },
        }
    }

    /// Pure power a·r^{-α}.
    pub fn power(coef: f64, alpha: f64) -> PowerLogTerm {
        PowerLogTerm::new(coef, alpha, 0, 1.0)
    }

    fn eval(&self, r: f64) -> f64 {
        let mut v = self.coef * r.powf(-self.alpha);
        if self.gamma > 0 {
            v *= (r / self.log_base).ln().powi(self.gamma as i32);
        }
        v
    }
}

/// Canonicalized finite sum of power-log terms: no two terms share
/// (α, γ, R) (α compared within [`ALPHA_MERGE_TOL`]), zero coefficients
/// dropped, sorted by α then γ.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerLogSum {
    terms: Vec<PowerLogTerm>,
}

impl PowerLogSum {
    pub fn new(terms: Vec<PowerLogTerm>) -> PowerLogSum {
        let mut s = PowerLogSum { terms };
        s.canonicalize();
        s
    }

    pub fn zero() -> PowerLogSum {
        PowerLogSum::default()
    }

    pub fn terms(&self) -> &[PowerLogTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|t| t.coef != 0.0);
        self.terms.sort_by(|a, b| {
            a.alpha
                .partial_cmp(&b.alpha)
                .unwrap()
                .then(a.gamma.cmp(&b.gamma))
                .then(a.log_base.partial_cmp(&b.log_base).unwrap())
        });
        let mut merged: Vec<PowerLogTerm> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match merged.last_mut() {
                Some(last)
                    if (last.alpha - t.alpha).abs() <= ALPHA_MERGE_TOL
                        && last.gamma == t.gamma
                        && last.log_base == t.log_base =>
                {
                    last.coef += t.coef;
                }
                _ => merged.push(*t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, other: &PowerLogSum) -> PowerLogSum {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PowerLogSum::new(terms)
    }

    pub fn scale(&self, c: f64) -> PowerLogSum {
        PowerLogSum::new(self.terms.iter().map(|t| PowerLogTerm { coef: c * t.coef, ..*t }).collect())
    }

    /// Radial Laplacian in dimension n, term by term via the log identity.
    pub fn laplacian(&self, n: u32) -> PowerLogSum {
        let nf = f64::from(n);
        let mut out = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            let a = t.alpha;
            let g = t.gamma as f64;
            out.push(PowerLogTerm::new(
                -t.coef * a * (nf - 2.0 - a),
                a + 2.0,
                t.gamma,
                t.log_base,
            ));
            if t.gamma >= 1 {
                out.push(PowerLogTerm::new(
                    t.coef * g * (nf - 2.0 - 2.0 * a),
                    a + 2.0,
                    t.gamma - 1,
                    t.log_base,
                ));
            }
            if t.gamma >= 2 {
                out.push(PowerLogTerm::new(
                    t.coef * g * (g - 1.0),
                    a + 2.0,
                    t.gamma - 2,
                    t.log_base,
                ));
            }
        }
        PowerLogSum::new(out)
    }

    pub fn neg_laplacian(&self, n: u32) -> PowerLogSum {
        self.laplacian(n).scale(-1.0)
    }

    /// Evaluate at r > 0, summing contributions from smallest magnitude
    /// upward. Evaluation at r ≤ R with γ > 0 is permitted (negative log);
    /// callers enforce their own domains.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("eval requires r > 0, got {r}")));
        }
        let mut contribs: Vec<f64> = self.terms.iter().map(|t| t.eval(r)).collect();
        contribs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        Ok(contribs.iter().sum())
    }
}

/// (-Δ)³f evaluated at r, minus f(r)ᵖ: the pointwise triharmonic residual.
/// Rejects f(r) ≤ 0 (the positive-solution regime only).
pub fn triharmonic_residual(f: &PowerLogSum, n: u32, p: f64, r: f64) -> Result<f64> {
    let fr = f.eval(r)?;
    if fr <= 0.0 {
        return Err(Error::domain(format!("f({r}) = {fr} is not positive")));
    }
    let tri = f
        .neg_laplacian(n)
        .neg_laplacian(n)
        .neg_laplacian(n)
        .eval(r)?;
    Ok(tri - fr.powf(p))
}

/// A valid constant for the upper binomial bound: 1.01 times the numerical
/// supremum of ((1-z)ᵖ - 1 + pz)/z² over z ∈ [0, 1].
///
/// The supremum candidates are a uniform grid (refined by golden section
/// around the best point) plus the z→0 limit p(p-1)/2. For p ≥ 2 the limit
/// is the analytic supremum (Taylor with remainder), which is asserted to
/// dominate the grid and used exactly, so C_p = 1.01·p(p-1)/2 there.
pub fn binomial_cp(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("binomial_cp requires p > 1, got {p}")));
    }
    let h = |z: f64| (((1.0 - z).powf(p) - 1.0) + p * z) / (z * z);
    let limit = 0.5 * p * (p - 1.0);

    // The grid starts away from 0: the numerator cancels catastrophically as
    // z → 0 (relative error ~ε/z²) and the z→0 limit is covered analytically.
    const GRID: usize = 2000;
    const Z_MIN: f64 = 0.01;
    let z_at = |i: usize| Z_MIN + (1.0 - Z_MIN) * i as f64 / GRID as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let v = h(z_at(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement in the bracketing cell
    let (mut a, mut b) = (z_at(best_i.saturating_sub(1)), z_at((best_i + 1).min(GRID)));
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..80 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = h(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = h(x1);
        }
    }
    let grid_sup = best.max(f1).max(f2);

    let sup = if p >= 2.0 {
        assert!(
            grid_sup <= limit * (1.0 + 1e-10),
            "analytic bound p(p-1)/2 = {limit} fails to dominate grid supremum {grid_sup}"
        );
        limit
    } else {
        grid_sup.max(limit)
    };
    Ok(1.01 * sup)
}
