//! Piecewise sub- and super-solution triples (u, v, w) for the system
//! -Δu = v, -Δv = w, -Δw = uᵖ, with all parameter selection, junction
//! radii, and numerical verification of the defining inequalities.
//!
//! A sub-solution is zero on an inner ball and switches to an explicit
//! power(-log) tail; a super-solution glues the regularized singular family
//! L(r²+ε)^{-m/2} (and its -Δ iterates) to a tail with one extra correction
//! term. Junctions are the first crossing of the inner/outer gap functions,
//! located by bracketed bisection; the admissible ε comes from a descending
//! ladder, accepting the first value for which all junction orderings hold.
//!
//! Triples serialize to JSON (role, regime, params, term lists, radii) for
//! reuse by the evolution and fitting stages.

mod critical;
mod supercritical;
mod verify;

pub use critical::{ab_coefficients, build_sub_critical, build_super_critical, AbCoefficients};
pub use supercritical::{build_sub_supercritical, build_super_supercritical, SuperOpts};
pub use verify::{
    verification_grid, verify_barrier, FdCheck, PointCheck, VerificationReport, WeakCheck,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::symbolic::PowerLogSum;

/// Descending ε ladder realizing "ε small enough" deterministically.
pub const EPS_LADDER: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

/// Pad factor applied to every "large enough" constant (c, μ).
pub const PAD: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    Critical,
}

/// One tail term a·r^{-α}·(log(r/R))^s with an arbitrary real log power.
///
/// Integer log powers evaluate for any r > 0; fractional powers require
/// log(r/R) ≥ 0, i.e. r ≥ R, which every caller guarantees (junctions sit
/// far outside R).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailTerm {
    pub coef: f64,
    pub alpha: f64,
    pub log_pow: f64,
    pub log_base: f64,
}

impl TailTerm {
    pub fn power(coef: f64, alpha: f64) -> TailTerm {
        TailTerm { coef, alpha, log_pow: 0.0, log_base: 1.0 }
    }

    fn eval(&self, r: f64) -> f64 {
        let mut v = self.coef * r.powf(-self.alpha);
        if self.log_pow != 0.0 {
            let x = (r / self.log_base).ln();
            v *= if self.log_pow.fract() == 0.0 {
                x.powi(self.log_pow as i32)
            } else {
                x.powf(self.log_pow)
            };
        }
        v
    }
}

/// Finite sum of tail terms; the storage/evaluation form of every outer
/// barrier piece. Exact Laplacians are attached at build time (from the
/// integer-γ calculus or the expanded β-identities), not derived here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub terms: Vec<TailTerm>,
}

impl TailSum {
    pub fn eval(&self, r: f64) -> f64 {
        let mut contribs: Vec<f64> = self.terms.iter().map(|t| t.eval(r)).collect();
        contribs.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
        contribs.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl From<&PowerLogSum> for TailSum {
    fn from(s: &PowerLogSum) -> TailSum {
        TailSum {
            terms: s
                .terms()
                .iter()
                .map(|t| TailTerm {
                    coef: t.coef,
                    alpha: t.alpha,
                    log_pow: f64::from(t.gamma),
                    log_base: t.log_base,
                })
                .collect(),
        }
    }
}

/// Inner piece of a barrier component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerPiece {
    /// Identically zero (sub-solutions).
    Zero,
    /// coef·(r²+ε)^{-power/2} (super-solutions).
    EpsPower { coef: f64, power: f64, eps: f64 },
}

impl InnerPiece {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            InnerPiece::Zero => 0.0,
            InnerPiece::EpsPower { coef, power, eps } => {
                coef * (r * r + eps).powf(-0.5 * power)
            }
        }
    }

    /// -Δ of the piece, from the closed form
    /// -Δ(r²+ε)^{-k/2} = k(n-2-k)(r²+ε)^{-(k+2)/2} + k(k+2)ε(r²+ε)^{-(k+4)/2}.
    pub fn neg_laplacian(&self, r: f64, n: u32) -> f64 {
        match *self {
            InnerPiece::Zero => 0.0,
            InnerPiece::EpsPower { coef, power, eps } => {
                let nf = f64::from(n);
                let s = r * r + eps;
                coef * power
                    * ((nf - 2.0 - power) * s.powf(-0.5 * (power + 2.0))
                        + (power + 2.0) * eps * s.powf(-0.5 * (power + 4.0)))
            }
        }
    }
}

/// One radial component of a barrier triple: inner piece below the junction
/// radius, tail at and beyond it, with the tail's exact -Δ carried along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub inner: InnerPiece,
    pub outer: TailSum,
    pub outer_neg_lap: TailSum,
    pub junction: f64,
}

impl Component {
    pub fn eval(&self, r: f64) -> f64 {
        if r < self.junction {
            self.inner.eval(r)
        } else {
            self.outer.eval(r)
        }
    }

    pub fn neg_laplacian(&self, r: f64, n: u32) -> f64 {
        if r < self.junction {
            self.inner.neg_laplacian(r, n)
        } else {
            self.outer_neg_lap.eval(r)
        }
    }
}

/// Resolved construction parameters, recorded for reproducibility and for
/// downstream stages (ε-family, correction exponent k, constants c and μ,
/// log base R, log exponent β, binomial constant C_p, and the three radius
/// triples: sub-side zeros, outer-gap limits, and ε-junctions).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_under: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_limit: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_eps: Option<[f64; 3]>,
}

/// A sub- or super-solution triple with its problem constants and resolved
/// parameters. Serializable as the on-disk barrier document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierTriple {
    pub role: Role,
    pub regime: Regime,
    pub n: u32,
    pub p: f64,
    pub b: f64,
    pub m: f64,
    pub big_l: f64,
    /// Second-order decay rate l = m + λ₃.
    pub l: f64,
    pub params: BarrierParams,
    pub u: Component,
    pub v: Component,
    pub w: Component,
}

impl BarrierTriple {
    pub fn components(&self) -> [&Component; 3] {
        [&self.u, &self.v, &self.w]
    }

    pub fn u_at(&self, r: f64) -> f64 {
        self.u.eval(r)
    }
    pub fn v_at(&self, r: f64) -> f64 {
        self.v.eval(r)
    }
    pub fn w_at(&self, r: f64) -> f64 {
        self.w.eval(r)
    }

    pub fn max_junction(&self) -> f64 {
        self.u.junction.max(self.v.junction).max(self.w.junction)
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.n, self.p, self.b)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<BarrierTriple> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Componentwise margins super − sub over a set of radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichMargins {
    /// Minimum of (super − sub) per component, with the radius attaining it.
    pub min_margin: [f64; 3],
    pub at_radius: [f64; 3],
    pub ordered: bool,
}

/// Check sub ≤ super componentwise on the given radii (slack 1e-9 on the
/// local scale).
pub fn sandwich_margins(sub: &BarrierTriple, sup: &BarrierTriple, radii: &[f64]) -> SandwichMargins {
    let mut min_margin = [f64::INFINITY; 3];
    let mut at_radius = [0.0; 3];
    let mut ordered = true;
    for &r in radii {
        let pairs = [
            (sub.u_at(r), sup.u_at(r)),
            (sub.v_at(r), sup.v_at(r)),
            (sub.w_at(r), sup.w_at(r)),
        ];
        for (i, (lo, hi)) in pairs.into_iter().enumerate() {
            let margin = hi - lo;
            if margin < min_margin[i] {
                min_margin[i] = margin;
                at_radius[i] = r;
            }
            if margin < -1e-9 * (lo.abs() + hi.abs() + f64::MIN_POSITIVE) {
                ordered = false;
            }
        }
    }
    SandwichMargins { min_margin, at_radius, ordered }
}

/// The regularized singular family feeding every super-solution inner piece:
/// coefficient/power pairs for (u, v, w).
pub(crate) fn inner_family(prob: &Problem) -> [(f64, f64); 3] {
    let (n, m, l) = (prob.nf(), prob.m, prob.big_l);
    [
        (l, m),
        (m * (n - 2.0 - m) * l, m + 2.0),
        (m * (m + 2.0) * (n - 2.0 - m) * (n - 4.0 - m) * l, m + 4.0),
    ]
}

/// Locate the unique sign change of `f` on [lo, hi]: scans `cells`
/// subintervals, requires exactly one crossing, and bisects it to 1e-14
/// relative.
pub(crate) fn find_single_sign_change(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    cells: usize,
    what: &str,
) -> Result<f64> {
    debug_assert!(lo < hi && lo > 0.0);
    let mut crossings = Vec::new();
    let mut prev_r = lo;
    let mut prev_v = f(lo);
    for i in 1..=cells {
        let r = lo + (hi - lo) * i as f64 / cells as f64;
        let v = f(r);
        if prev_v == 0.0 {
            crossings.push((prev_r, r));
        } else if prev_v < 0.0 && v >= 0.0 || prev_v > 0.0 && v <= 0.0 {
            crossings.push((prev_r, r));
        }
        prev_r = r;
        prev_v = v;
    }
    if crossings.len() != 1 {
        return Err(Error::search(format!(
            "{what}: expected exactly one sign change on [{lo}, {hi}], found {}",
            crossings.len()
        )));
    }
    let (mut a, mut b) = crossings[0];
    let fa = f(a);
    while b - a > 1e-14 * b {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) <= 0.0) == (fa <= 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Smallest argument at which the monotone-in-c slack becomes positive,
/// found by geometric growth from `start` and bisection. The caller must
/// ensure `slack` is increasing past `start`.
pub(crate) fn monotone_threshold(
    slack: impl Fn(f64) -> f64,
    start: f64,
    what: &str,
) -> Result<f64> {
    if slack(start) > 0.0 {
        return Ok(start);
    }
    let mut lo = start;
    let mut hi = start;
    for _ in 0..200 {
        hi *= 1.5;
        if slack(hi) > 0.0 {
            break;
        }
        lo = hi;
    }
    if slack(hi) <= 0.0 {
        return Err(Error::search(format!("{what}: no threshold found up to {hi}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slack(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
