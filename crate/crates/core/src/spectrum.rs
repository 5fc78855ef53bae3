//! Characteristic roots of the linearization around the singular solution.
//!
//! Perturbing u_∞ = L r^{-m} by r^{-m-λ} turns (-Δ)³u = uᵖ into the
//! degree-6 characteristic equation
//!
//!   (m+λ)(m+λ+2)(m+λ+4)(n-2-m-λ)(n-4-m-λ)(n-6-m-λ) = p L^{p-1} =: d.
//!
//! With l = m+λ and x = l(n-6-l) the sextic collapses to the cubic
//! P₁(x) = x³ + bx² + cx − d, b = 6n-16, c = 8(n-2)(n-4).
//!
//! For p ≥ p_JL(6,n) the cubic has exactly one real root x₃, trapped in
//! (m(n-6-m), (n-6)²/4]; its two λ-branches are the real roots
//! 0 < λ₃ ≤ λ₄ that drive the whole construction (l = m+λ₃ is the
//! second-order decay rate, k₀ = min{m+λ₄, 2l−m} caps the super-solution
//! correction). The remaining cubic roots form a complex-conjugate pair —
//! d always exceeds the cubic's local maximum in this regime — so the other
//! four λ's come in two conjugate pairs, with Re λ₁ = Re λ₂ < 0 and
//! Re λ₅ = Re λ₆ > λ₄. λ₃ = λ₄ exactly at p = p_JL.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{jl_exponent, Exponent, Order};
use crate::problem::Problem;

/// Relative slack accepted below p_JL at the precondition (p_JL itself is
/// computed numerically).
pub const P_JL_SLACK: f64 = 1e-10;

/// Degeneracy test: |λ₃-λ₄| ≤ DEGENERACY_TOL·(1+|λ₄|) sets the flag,
/// matching double-precision root sensitivity near a double root.
pub const DEGENERACY_TOL: f64 = 1e-7;

/// Coefficients of the reduced cubic P₁(x) = x³ + bx² + cx − d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cubic {
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Cubic {
    pub fn eval(&self, x: f64) -> f64 {
        ((x + self.b) * x + self.c) * x - self.d
    }

    fn eval_c(&self, x: Complex64) -> Complex64 {
        ((x + self.b) * x + self.c) * x - self.d
    }

    fn deriv_c(&self, x: Complex64) -> Complex64 {
        (3.0 * x + 2.0 * self.b) * x + self.c
    }
}

/// The root spectrum of the characteristic equation.
///
/// `lambda` holds all six roots ordered by (real part, imaginary part);
/// entries 2 and 3 (λ₃, λ₄) are real for p ≥ p_JL and duplicated in
/// `lambda3`/`lambda4`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    /// The unique real cubic root, in (m(n-6-m), (n-6)²/4].
    pub x3: f64,
    /// The remaining cubic roots (complex-conjugate pair in the admissible
    /// regime; stored as found).
    pub x_pair: [Complex64; 2],
    /// All six characteristic roots, sorted by (re, im).
    pub lambda: [Complex64; 6],
    pub lambda3: f64,
    pub lambda4: f64,
    /// Second-order decay rate l = m + λ₃.
    pub l: f64,
    /// k₀ = min{m+λ₄, 2l−m}; upper end of the admissible correction
    /// exponents (l, k₀) in the supercritical construction.
    pub k0: f64,
    /// λ₃ = λ₄, i.e. p = p_JL (logarithmic-correction regime).
    pub degenerate: bool,
}

/// P(λ): the six-factor product minus d. Negative at λ = 0 (value
/// (1-p)L^{p-1}) and positive exactly between the real roots.
pub fn characteristic_value(prob: &Problem, lambda: f64) -> f64 {
    let (n, m) = (prob.nf(), prob.m);
    let l = m + lambda;
    l * (l + 2.0) * (l + 4.0) * (n - 2.0 - l) * (n - 4.0 - l) * (n - 6.0 - l) - prob.d()
}

/// Cubic reduction of the characteristic equation: x = l(n-6-l) maps P(λ)
/// onto P₁(x) = x³ + (6n-16)x² + 8(n-2)(n-4)x − pL^{p-1}.
pub fn reduce_to_cubic(prob: &Problem) -> Cubic {
    let n = prob.nf();
    Cubic {
        b: 6.0 * n - 16.0,
        c: 8.0 * (n - 2.0) * (n - 4.0),
        d: prob.d(),
    }
}

/// Q(m) = (m+6)(m+2)(m+4)(n-2-m)(n-4-m)(n-6-m) − (n-6)²(n-2)²(n+2)²/64.
///
/// Q vanishes exactly at the m corresponding to p_JL(6,n), and is strictly
/// negative for p > p_JL (smaller m). Doubles as the sign test for
/// x₃ ≤ (n-6)²/4: Q(m) = −P₁((n-6)²/4).
pub fn q_of_m(n: u32, m: f64) -> Result<f64> {
    let nf = f64::from(n);
    if !(m > 0.0 && m < nf - 6.0) {
        return Err(Error::domain(format!("q_of_m requires 0 < m < n-6, got m={m}")));
    }
    let prod = (m + 6.0) * (m + 2.0) * (m + 4.0) * (nf - 2.0 - m) * (nf - 4.0 - m) * (nf - 6.0 - m);
    let corner = (nf - 6.0) * (nf - 6.0) * (nf - 2.0) * (nf - 2.0) * (nf + 2.0) * (nf + 2.0) / 64.0;
    Ok(prod - corner)
}

/// All three roots of the monic cubic, via the trigonometric branch when the
/// discriminant allows three real roots and Cardano (real cube roots) plus
/// the conjugate pair otherwise, each polished by complex Newton steps to
/// 1e-13 relative.
fn cubic_roots(cubic: &Cubic) -> [Complex64; 3] {
    let (b, c, d) = (cubic.b, cubic.c, -cubic.d); // x³ + bx² + cx + d
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let mut roots = if disc >= 0.0 {
        // three real roots
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos();
        let mut r = [Complex64::default(); 3];
        for (k, slot) in r.iter_mut().enumerate() {
            let y = amp * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
            *slot = Complex64::new(y - shift, 0.0);
        }
        r
    } else {
        // one real root, one conjugate pair
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = (-q / 2.0 + s).cbrt();
        let v = (-q / 2.0 - s).cbrt();
        let re = -(u + v) / 2.0 - shift;
        let im = 3.0_f64.sqrt() / 2.0 * (u - v);
        [
            Complex64::new(u + v - shift, 0.0),
            Complex64::new(re, -im.abs()),
            Complex64::new(re, im.abs()),
        ]
    };
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = cubic.eval_c(*r);
            let df = cubic.deriv_c(*r);
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.norm() <= 1e-13 * (1.0 + r.norm()) {
                break;
            }
        }
        if r.im.abs() <= 1e-12 * (1.0 + r.re.abs()) {
            r.im = 0.0;
        }
    }
    roots
}

/// Solve the characteristic spectrum for p ≥ p_JL(6,n) (within 1e-10
/// relative slack at equality).
///
/// Errors on p below the threshold: there λ₃, λ₄ leave the real axis and the
/// barrier construction has no admissible decay rate.
pub fn solve_spectrum(prob: &Problem) -> Result<Spectrum> {
    let p_jl = match jl_exponent(Order::Six, prob.n)? {
        Exponent::Finite(v) => v,
        Exponent::Infinite => {
            return Err(Error::regime(format!("p_JL(6, {}) is infinite", prob.n)))
        }
    };
    if prob.p < p_jl * (1.0 - P_JL_SLACK) {
        return Err(Error::regime(format!(
            "p = {} is below p_JL(6,{}) = {p_jl}",
            prob.p, prob.n
        )));
    }
    let cubic = reduce_to_cubic(prob);
    let roots = cubic_roots(&cubic);
    let (nf, m) = (prob.nf(), prob.m);
    let corner = (nf - 6.0) * (nf - 6.0) / 4.0;
    let x_low = m * (nf - 6.0 - m);

    // The real root trapped in (m(n-6-m), (n-6)²/4]; a hair of slack on both
    // ends absorbs roundoff at p = p_JL and deep-supercritical clustering.
    let mut real_in_bracket: Option<f64> = None;
    let mut others: Vec<Complex64> = Vec::new();
    for r in roots {
        let in_bracket = r.im == 0.0
            && r.re > x_low * (1.0 - 1e-9)
            && r.re <= corner * (1.0 + 1e-9);
        if in_bracket && real_in_bracket.is_none() {
            real_in_bracket = Some(r.re);
        } else {
            others.push(r);
        }
    }
    let x3 = real_in_bracket.ok_or_else(|| {
        Error::inconsistent(format!(
            "no real cubic root in ({x_low}, {corner}]: roots {roots:?}"
        ))
    })?;
    let x3 = x3.min(corner); // clamp within the precondition slack
    let x_pair = [others[0], others[1]];

    // λ-branches: l = ((n-6) ∓ √((n-6)²-4x))/2, λ = l − m.
    let branch = |x: Complex64| -> (Complex64, Complex64) {
        let disc = (Complex64::new((nf - 6.0) * (nf - 6.0), 0.0) - 4.0 * x).sqrt();
        (
            (Complex64::new(nf - 6.0, 0.0) - disc) / 2.0 - m,
            (Complex64::new(nf - 6.0, 0.0) + disc) / 2.0 - m,
        )
    };
    let disc3 = ((nf - 6.0) * (nf - 6.0) - 4.0 * x3).max(0.0).sqrt();
    let lambda3 = (nf - 6.0 - disc3) / 2.0 - m;
    let lambda4 = (nf - 6.0 + disc3) / 2.0 - m;

    let mut lambda: Vec<Complex64> = vec![
        Complex64::new(lambda3, 0.0),
        Complex64::new(lambda4, 0.0),
    ];
    for x in x_pair {
        let (a, b) = branch(x);
        lambda.push(a);
        lambda.push(b);
    }
    lambda.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let lambda: [Complex64; 6] = lambda.try_into().unwrap();

    let degenerate = (lambda3 - lambda4).abs() <= DEGENERACY_TOL * (1.0 + lambda4.abs());
    let (lambda3, lambda4) = if degenerate {
        let mid = (nf - 6.0) / 2.0 - m;
        (mid, mid)
    } else {
        (lambda3, lambda4)
    };
    let l = m + lambda3;
    let k0 = (m + lambda4).min(2.0 * l - m);

    // Ordering sanity: Re λ₁ = Re λ₂ < 0 < λ₃ ≤ λ₄ < Re λ₅ = Re λ₆.
    if !(lambda[0].re < 0.0 && lambda3 > 0.0 && lambda3 <= lambda4 && lambda4 < lambda[4].re) {
        return Err(Error::inconsistent(format!(
            "root ordering violated: {lambda:?}"
        )));
    }

    Ok(Spectrum {
        x3,
        x_pair,
        lambda,
        lambda3,
        lambda4,
        l,
        k0,
        degenerate,
    })
}
