//! Barrier construction at the threshold p = p_JL, where λ₃ = λ₄,
//! l = (n-6)/2, and the second-order term carries a logarithmic factor.
//!
//! Sub-solution tail: u = L r^{-m} − b r^{-l} log(r/R), with
//! R = e^{-μ}(μb/L)^{1/(l-m)} and μ = 1.1 × the largest of the five lower
//! bounds that make the zero radii r₁ = (μb/L)^{1/(l-m)} < r₂ < r₃ unique
//! and ordered. v = -Δu and w = -Δv stay inside the integer-γ calculus.
//!
//! Super-solution tail: u = L r^{-m} − b r^{-l} log(r/R) + c r^{-l} logᵝ(r/R)
//! with β ∈ (0,1). The fractional-log pieces fall outside the exact term
//! algebra; their Laplacians are the expanded identities, with
//! -Δw̄_out assembled from the coefficient table A₀..A₂, B₀..B₆ below. At
//! l = (n-6)/2 the coefficients A₂, B₁, B₃, B₅ vanish identically, which is
//! what makes the construction close. (As printed, the source formula for
//! w̄_out carries the opposite sign on its b-part; the sign used here is the
//! one consistent with -Δv̄_out = w̄_out and with the φ₃ gap limit, and is
//! finite-difference-checked in the tests.)

use serde::{Deserialize, Serialize};

use crate::barriers::supercritical::{junctions_for_eps, SuperOpts};
use crate::barriers::{
    find_single_sign_change, inner_family, monotone_threshold, BarrierParams, BarrierTriple,
    Component, InnerPiece, Regime, Role, TailSum, TailTerm, EPS_LADDER, PAD,
};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::spectrum::Spectrum;
use crate::symbolic::{binomial_cp, PowerLogSum, PowerLogTerm};

/// Sub-solution triple at p = p_JL.
pub fn build_sub_critical(prob: &Problem, spec: &Spectrum) -> Result<BarrierTriple> {
    if !spec.degenerate {
        return Err(Error::regime(
            "non-degenerate spectrum: use the supercritical builder",
        ));
    }
    let (n, m, big_l, b) = (prob.nf(), prob.m, prob.big_l, prob.b);
    let l = (n - 6.0) / 2.0;
    let lm = l - m;

    let l1 = l * (n - 2.0 - l);
    let e1 = n - 2.0 - 2.0 * l; // = 4 at l = (n-6)/2
    let mu_bounds = [
        1.0 / lm,
        e1 / ((n - 2.0 - l - m) * lm),
        l1 / (m * (n - 2.0 - m) * lm),
        e1 / l1,
        l * (l + 2.0) * (n - 2.0 - l) * (n - 4.0 - l)
            / (m * (m + 2.0) * (n - 2.0 - m) * (n - 4.0 - m) * lm),
    ];
    let mu = PAD * mu_bounds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let big_r = (-mu).exp() * (mu * b / big_l).powf(1.0 / lm);
    let r1 = (mu * b / big_l).powf(1.0 / lm);

    let u_out = PowerLogSum::new(vec![
        PowerLogTerm::power(big_l, m),
        PowerLogTerm::new(-b, l, 1, big_r),
    ]);
    let v_out = u_out.neg_laplacian(prob.n);
    let w_out = v_out.neg_laplacian(prob.n);
    let w_neg_lap = w_out.neg_laplacian(prob.n);

    // φ₁(r₁) = 0 by the closed forms: L r₁^{l-m} = b log(r₁/R) = bμ.
    let phi1 = u_out.eval(r1)?;
    if phi1.abs() > 1e-9 * big_l * r1.powf(-m) {
        return Err(Error::inconsistent(format!("u_out(r₁) = {phi1}, expected 0")));
    }
    // r₂, r₃: unique zeros of v_out, w_out past the previous radius.
    if !(v_out.eval(r1)? < 0.0) {
        return Err(Error::inconsistent("v_out(r₁) must be negative"));
    }
    let r2 = next_zero(|r| v_out.eval(r).unwrap(), r1, "v_out")?;
    if !(w_out.eval(r2)? < 0.0) {
        return Err(Error::inconsistent("w_out(r₂) must be negative"));
    }
    let r3 = next_zero(|r| w_out.eval(r).unwrap(), r2, "w_out")?;
    if !(big_r < r1 && r1 < r2 && r2 < r3) {
        return Err(Error::inconsistent(format!(
            "critical sub radii not ordered: R={big_r}, {r1}, {r2}, {r3}"
        )));
    }

    Ok(BarrierTriple {
        role: Role::Sub,
        regime: Regime::Critical,
        n: prob.n,
        p: prob.p,
        b,
        m,
        big_l,
        l,
        params: BarrierParams {
            mu: Some(mu),
            big_r: Some(big_r),
            r_under: Some([r1, r2, r3]),
            ..Default::default()
        },
        u: Component {
            inner: InnerPiece::Zero,
            outer: TailSum::from(&u_out),
            outer_neg_lap: TailSum::from(&v_out),
            junction: r1,
        },
        v: Component {
            inner: InnerPiece::Zero,
            outer: TailSum::from(&v_out),
            outer_neg_lap: TailSum::from(&w_out),
            junction: r2,
        },
        w: Component {
            inner: InnerPiece::Zero,
            outer: TailSum::from(&w_out),
            outer_neg_lap: TailSum::from(&w_neg_lap),
            junction: r3,
        },
    })
}

/// Zero of `f` on (start, ∞), bracketing by geometric growth and requiring a
/// single crossing.
fn next_zero(f: impl Fn(f64) -> f64, start: f64, what: &str) -> Result<f64> {
    let lo = start * (1.0 + 1e-9);
    let mut hi = start * 1.5;
    for _ in 0..200 {
        if f(hi) > 0.0 {
            break;
        }
        hi *= 1.5;
    }
    if f(hi) <= 0.0 {
        return Err(Error::search(format!("{what}: no sign change up to {hi}")));
    }
    find_single_sign_change(f, lo, hi, 1000, what)
}

/// Coefficients of the assembled -Δw̄_out at the critical decay rate:
///
///   -Δw̄_out = A₀·L r^{-m-6} − A₁·b r^{-l-6} log + A₂·b r^{-l-6}
///     + c r^{-l-6}[B₀ logᵝ − B₁ logᵝ⁻¹ + B₂ logᵝ⁻² + B₃ logᵝ⁻³
///                  − B₄ logᵝ⁻⁴ + B₅ logᵝ⁻⁵ + B₆ logᵝ⁻⁶].
///
/// At l = (n-6)/2 the table degenerates: A₂ = B₁ = B₃ = B₅ = 0 and
/// B₂ = β(1-β)(3n⁴-24n³+72n²-96n+304)/16.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbCoefficients {
    /// A₁ = l(l+2)(l+4)(n-2-l)(n-4-l)(n-6-l); equals B₀ (and pL^{p-1} at
    /// criticality). A₀ is the sextic product at m and lives on the Problem.
    pub a1: f64,
    pub a2: f64,
    pub b: [f64; 7],
}

pub fn ab_coefficients(n: u32, beta: f64) -> AbCoefficients {
    let nf = f64::from(n);
    let l = (nf - 6.0) / 2.0;
    let l1 = l * (nf - 2.0 - l);
    let l2 = (l + 2.0) * (nf - 4.0 - l);
    let l3 = (l + 4.0) * (nf - 6.0 - l);
    let e1 = nf - 2.0 - 2.0 * l;
    let e2 = nf - 10.0 - 2.0 * l;
    let bt = beta;
    let a2 = l2 * (l1 * e2 + l3 * e1);
    AbCoefficients {
        a1: l1 * l2 * l3,
        a2,
        b: [
            l1 * l2 * l3,
            bt * a2,
            bt * (1.0 - bt) * (l1 * l2 - l2 * e1 * e2 + l3 * (l1 + l2)),
            bt * (1.0 - bt) * (2.0 - bt) * (e1 * l2 + e2 * (l1 + l2) + e1 * l3),
            bt * (1.0 - bt) * (2.0 - bt) * (3.0 - bt) * (l1 + l2 + l3 - e1 * e2),
            bt * (1.0 - bt) * (2.0 - bt) * (3.0 - bt) * (4.0 - bt) * (-e1 - e2),
            bt * (1.0 - bt) * (2.0 - bt) * (3.0 - bt) * (4.0 - bt) * (5.0 - bt),
        ],
    }
}

/// Super-solution triple at p = p_JL: ε-regularized singular family inside,
/// fractional-log tails outside. Builds the companion sub-solution first
/// (the tails share its log base R, and the constant c must push r̄₁ beyond
/// the sub radii).
pub fn build_super_critical(
    prob: &Problem,
    spec: &Spectrum,
    opts: &SuperOpts,
) -> Result<BarrierTriple> {
    if !spec.degenerate {
        return Err(Error::regime(
            "non-degenerate spectrum: use the supercritical builder",
        ));
    }
    let beta = opts.beta.unwrap_or(0.5);
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("β = {beta} outside (0, 1)")));
    }
    let sub = build_sub_critical(prob, spec)?;
    let big_r = sub.params.big_r.unwrap();
    let mu = sub.params.mu.unwrap();
    let r_under = sub.params.r_under.unwrap();

    let (n, m, big_l, b) = (prob.nf(), prob.m, prob.big_l, prob.b);
    let l = (n - 6.0) / 2.0;
    let lm = l - m;
    let l1 = l * (n - 2.0 - l);
    let l2 = (l + 2.0) * (n - 4.0 - l);
    let e1 = n - 2.0 - 2.0 * l;
    let cp = binomial_cp(prob.p)?;
    let quartic = 3.0 * n.powi(4) - 24.0 * n.powi(3) + 72.0 * n * n - 96.0 * n + 304.0;
    let quadratic = 3.0 * n * n - 12.0 * n + 44.0;

    // Closed-form lower bounds, expressed through T = (c/b)^{1/(1-β)}.
    let c_of_t = |t: f64| b * t.powf(1.0 - beta);
    let t_of_c = |c: f64| (c / b).powf(1.0 / (1.0 - beta));
    let mut floor: f64 = 0.0;
    // (l-m)·T > 4-β
    floor = floor.max(c_of_t((4.0 - beta) / lm));
    // (l-m)·L·(R e^T)^{l-m} > b
    let t_b = (b / (lm * big_l * big_r.powf(lm))).ln() / lm;
    if t_b > 0.0 {
        floor = floor.max(c_of_t(t_b));
    }
    // (c/b)^{2/(1-β)}·(paper constant) > 1
    floor = floor.max(
        b * (24.0 * (2.0 - beta) * (3.0 - beta) * quadratic / quartic).powf((1.0 - beta) / 2.0),
    );
    // l(n-2-l)·T > β(n-2-2l)
    floor = floor.max(c_of_t(beta * e1 / l1));
    // l(n-2-l)·T² > (2-β)(3-β)
    floor = floor.max(c_of_t(((2.0 - beta) * (3.0 - beta) / l1).sqrt()));
    // T > log(r̲₃/R): pushes r̄₁ past the sub radii
    floor = floor.max(c_of_t((r_under[2] / big_r).ln()));

    // Transcendental bounds, monotone in c past the floor above.
    let r1bar_of = |c: f64| big_r * t_of_c(c).exp();
    let mut c_min = floor;
    c_min = c_min.max(monotone_threshold(
        |c| big_l * r1bar_of(c).powf(lm) - b * t_of_c(c),
        floor,
        "u_out positivity at r̄₁",
    )?);
    c_min = c_min.max(monotone_threshold(
        |c| {
            let t = t_of_c(c);
            c * r1bar_of(c).powf(lm) * t.powf(beta - 4.0)
                - 16.0 * cp * big_l.powf(prob.p - 2.0) * b * b / (beta * (1.0 - beta) * quartic)
        },
        floor,
        "binomial-remainder domination",
    )?);
    c_min = c_min.max(monotone_threshold(
        |c| {
            let s = 1.0 / t_of_c(c);
            b * (l1 * l2
                - beta * (l1 + l2) * s * s
                - beta * (2.0 - beta) * e1 * s * s * s)
        },
        floor,
        "φ₃ monotonicity",
    )?);
    c_min = c_min.max(monotone_threshold(
        |c| {
            let t = t_of_c(c);
            l1 * l2 * t.powi(4)
                - beta * e1 * l2 * t.powi(3)
                - beta * (1.0 - beta) * (2.0 - beta) * (3.0 - beta)
        },
        floor,
        "w̄ − w̲ positivity",
    )?);
    let c = match opts.c {
        Some(c) if c < c_min => {
            return Err(Error::domain(format!(
                "c = {c} violates the lower bounds (need ≥ {c_min})"
            )));
        }
        Some(c) => c,
        None => PAD * c_min,
    };

    // Tails and their exact -Δ's via the expanded log-power identities.
    let lt = |coef: f64, alpha: f64, log_pow: f64| TailTerm {
        coef,
        alpha,
        log_pow,
        log_base: big_r,
    };
    let bt = beta;
    let cw = m * (m + 2.0) * (n - 2.0 - m) * (n - 4.0 - m);
    let u_out = TailSum {
        terms: vec![
            TailTerm::power(big_l, m),
            lt(-b, l, 1.0),
            lt(c, l, bt),
        ],
    };
    let v_out = TailSum {
        terms: vec![
            TailTerm::power(m * (n - 2.0 - m) * big_l, m + 2.0),
            lt(-l1 * b, l + 2.0, 1.0),
            lt(e1 * b, l + 2.0, 0.0),
            lt(l1 * c, l + 2.0, bt),
            lt(-bt * e1 * c, l + 2.0, bt - 1.0),
            lt(bt * (1.0 - bt) * c, l + 2.0, bt - 2.0),
        ],
    };
    let w_out = TailSum {
        terms: vec![
            TailTerm::power(cw * big_l, m + 4.0),
            lt(-l1 * l2 * b, l + 4.0, 1.0),
            lt(e1 * l2 * b, l + 4.0, 0.0),
            lt(l1 * l2 * c, l + 4.0, bt),
            lt(-bt * e1 * l2 * c, l + 4.0, bt - 1.0),
            lt(bt * (1.0 - bt) * (l1 + l2) * c, l + 4.0, bt - 2.0),
            lt(bt * (1.0 - bt) * (2.0 - bt) * e1 * c, l + 4.0, bt - 3.0),
            lt(-bt * (1.0 - bt) * (2.0 - bt) * (3.0 - bt) * c, l + 4.0, bt - 4.0),
        ],
    };
    let ab = ab_coefficients(prob.n, beta);
    let mut w_neg_lap_terms = vec![
        TailTerm::power(prob.l_pow_pm1() * big_l, m + 6.0),
        lt(-ab.a1 * b, l + 6.0, 1.0),
    ];
    if ab.a2 != 0.0 {
        w_neg_lap_terms.push(lt(ab.a2 * b, l + 6.0, 0.0));
    }
    let b_signs = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0];
    for (j, (&bj, &sign)) in ab.b.iter().zip(b_signs.iter()).enumerate() {
        if bj != 0.0 {
            w_neg_lap_terms.push(lt(sign * bj * c, l + 6.0, bt - j as f64));
        }
    }
    let w_neg_lap = TailSum { terms: w_neg_lap_terms };

    // Limit radii: r̄₁ closed-form, r̄₂/r̄₃ as zeros of the ε→0 gaps.
    let rb1 = r1bar_of(c);
    let family = inner_family(prob);
    let phi2 = |r: f64| family[1].0 * r.powf(-(m + 2.0)) - v_out.eval(r);
    if !(phi2(rb1) < 0.0) {
        return Err(Error::inconsistent("φ₂(r̄₁) must be negative"));
    }
    let rb2 = next_zero(phi2, rb1, "φ₂")?;
    let phi3 = |r: f64| family[2].0 * r.powf(-(m + 4.0)) - w_out.eval(r);
    if !(phi3(rb2) < 0.0) {
        return Err(Error::inconsistent("φ₃(r̄₂) must be negative"));
    }
    let rb3 = next_zero(phi3, rb2, "φ₃")?;
    let r_limit = [rb1, rb2, rb3];

    let eval_u = |r: f64| u_out.eval(r);
    let eval_v = |r: f64| v_out.eval(r);
    let eval_w = |r: f64| w_out.eval(r);
    let outers: [&dyn Fn(f64) -> f64; 3] = [&eval_u, &eval_v, &eval_w];
    let ladder: &[f64] = match opts.eps {
        Some(_) => &[0.0],
        None => &EPS_LADDER,
    };
    let mut accepted = None;
    let mut last_err = String::new();
    for &rung in ladder {
        let eps = opts.eps.unwrap_or(rung);
        match junctions_for_eps(eps, &family, &outers, &r_limit, big_r * (1.0 + 1e-9)) {
            Ok(r_eps) => {
                accepted = Some((eps, r_eps));
                break;
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    let (eps, r_eps) = accepted.ok_or_else(|| {
        Error::search(format!("no ε in the ladder yields the junction ordering: {last_err}"))
    })?;

    // Joined ordering r̲₁ < r̲₂ < r̲₃ < r̄₁ < r̄₁(ε) < … < r̄₃(ε).
    if !(r_under[2] < rb1) {
        return Err(Error::inconsistent(format!(
            "sub radius r̲₃ = {} not below r̄₁ = {rb1}",
            r_under[2]
        )));
    }

    let inner = |i: usize| InnerPiece::EpsPower {
        coef: family[i].0,
        power: family[i].1,
        eps,
    };
    Ok(BarrierTriple {
        role: Role::Super,
        regime: Regime::Critical,
        n: prob.n,
        p: prob.p,
        b,
        m,
        big_l,
        l,
        params: BarrierParams {
            eps: Some(eps),
            c: Some(c),
            mu: Some(mu),
            big_r: Some(big_r),
            beta: Some(beta),
            cp: Some(cp),
            r_under: Some(r_under),
            r_limit: Some(r_limit),
            r_eps: Some(r_eps),
            ..Default::default()
        },
        u: Component {
            inner: inner(0),
            outer: u_out,
            outer_neg_lap: v_out.clone(),
            junction: r_eps[0],
        },
        v: Component {
            inner: inner(1),
            outer: v_out,
            outer_neg_lap: w_out.clone(),
            junction: r_eps[1],
        },
        w: Component {
            inner: inner(2),
            outer: w_out,
            outer_neg_lap: w_neg_lap,
            junction: r_eps[2],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{jl_exponent, Order};
    use crate::spectrum::solve_spectrum;

    fn setup(n: u32, b: f64) -> (Problem, Spectrum) {
        let pjl = jl_exponent(Order::Six, n).unwrap().value();
        let prob = Problem::new(n, pjl, b).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        (prob, spec)
    }

    #[test]
    fn sub_critical_radii_and_signs() {
        let (prob, spec) = setup(20, 1.0);
        let sub = build_sub_critical(&prob, &spec).unwrap();
        let big_r = sub.params.big_r.unwrap();
        let mu = sub.params.mu.unwrap();
        let [r1, r2, r3] = sub.params.r_under.unwrap();
        assert!(big_r < r1 && r1 < r2 && r2 < r3);
        // frozen reference values (independent 40-digit pipeline)
        assert!((mu - 0.844006578541).abs() < 1e-9, "μ = {mu}");
        assert!((big_r - 0.214429016867).abs() < 1e-9, "R = {big_r}");
        assert!((r1 - 0.498690338227).abs() < 1e-9, "r₁ = {r1}");
        assert!((r2 - 0.623205529974).abs() < 1e-8, "r₂ = {r2}");
        assert!((r3 - 0.685786273553).abs() < 1e-8, "r₃ = {r3}");
        // φ₁(r₁) = 0 means L r₁^{l-m} = b log(r₁/R) = bμ
        assert!(((r1 / big_r).ln() - mu).abs() < 1e-12);
        // sign checks from the uniqueness proof
        assert!(sub.v.outer.eval(r1) < 0.0, "φ₂(r₁) < 0");
        assert!(sub.w.outer.eval(r2) < 0.0, "φ₃(r₂) < 0");
    }

    #[test]
    fn ab_identities_at_criticality() {
        for n in [20u32, 25, 31] {
            for beta in [0.25, 0.5, 0.75] {
                let ab = ab_coefficients(n, beta);
                assert_eq!(ab.a2, 0.0, "A₂ at n={n}");
                assert_eq!(ab.b[1], 0.0, "B₁ at n={n}");
                assert_eq!(ab.b[3], 0.0, "B₃ at n={n}");
                assert_eq!(ab.b[5], 0.0, "B₅ at n={n}");
                let nf = f64::from(n);
                let quartic = 3.0 * nf.powi(4) - 24.0 * nf.powi(3) + 72.0 * nf * nf - 96.0 * nf
                    + 304.0;
                let b2 = beta * (1.0 - beta) * quartic / 16.0;
                assert!(
                    ((ab.b[2] - b2) / b2).abs() < 1e-13,
                    "B₂ at n={n}: {} vs {b2}",
                    ab.b[2]
                );
            }
        }
    }

    #[test]
    fn super_critical_builds_and_orders() {
        let (prob, spec) = setup(20, 1.0);
        let sup = build_super_critical(&prob, &spec, &SuperOpts::default()).unwrap();
        let r_under = sup.params.r_under.unwrap();
        let rl = sup.params.r_limit.unwrap();
        let re = sup.params.r_eps.unwrap();
        assert!(r_under[2] < rl[0]);
        assert!(rl[0] < re[0] && re[0] < rl[1]);
        assert!(rl[1] < re[1] && re[1] < rl[2]);
        assert!(rl[2] < re[2] && re[2] < rl[2] + 1.0);
        // B₄/(B₂/2) · log(r̄₁/R)^{-2} < 1 with the chosen c
        let beta = sup.params.beta.unwrap();
        let ab = ab_coefficients(prob.n, beta);
        let x1 = (rl[0] / sup.params.big_r.unwrap()).ln();
        let ratio = ab.b[4] / (0.5 * ab.b[2]) / (x1 * x1);
        assert!(ratio < 1.0, "B₄ domination ratio = {ratio}");
    }

    #[test]
    fn super_critical_neg_laplacians_match_finite_differences() {
        let (prob, spec) = setup(20, 1.0);
        let sup = build_super_critical(&prob, &spec, &SuperOpts::default()).unwrap();
        let n = prob.n;
        for comp in sup.components() {
            for mult in [1.05, 1.6, 3.0, 10.0] {
                let r = mult * sup.params.r_limit.unwrap()[0];
                let exact = comp.outer_neg_lap.eval(r);
                let h = 3e-3 * r;
                let g = |x: f64| comp.outer.eval(x);
                let d2 = (-g(r + 2.0 * h) + 16.0 * g(r + h) - 30.0 * g(r) + 16.0 * g(r - h)
                    - g(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = (-g(r + 2.0 * h) + 8.0 * g(r + h) - 8.0 * g(r - h) + g(r - 2.0 * h))
                    / (12.0 * h);
                let fd = -(d2 + f64::from(n - 1) / r * d1);
                assert!(
                    ((exact - fd) / (1.0 + exact.abs())).abs() < 1e-6,
                    "component −Δ mismatch at r={r}: exact {exact} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn critical_builders_reject_supercritical_spectrum() {
        let pjl = jl_exponent(Order::Six, 20).unwrap().value();
        let prob = Problem::new(20, 1.5 * pjl, 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        assert!(build_sub_critical(&prob, &spec).is_err());
        assert!(build_super_critical(&prob, &spec, &SuperOpts::default()).is_err());
    }
}
