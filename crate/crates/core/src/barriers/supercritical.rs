//! Barrier construction for the strictly supercritical regime p > p_JL.
//!
//! Sub-solution tails (r beyond the zero radius):
//!   u = L r^{-m} − b r^{-l},   v = -Δu,   w = -Δv,
//! vanishing at the closed-form radii
//!   r₁ = (b/L)^{1/(l-m)},
//!   r₂ = (l(n-2-l)b / (m(n-2-m)L))^{1/(l-m)},
//!   r₃ = (l(l+2)(n-2-l)(n-4-l)b / (m(m+2)(n-2-m)(n-4-m)L))^{1/(l-m)}.
//!
//! Super-solution tails add a correction c r^{-k} with k ∈ (l, k₀); c must
//! satisfy c·P(k) ≥ C_p L^{p-2} b² r̄₁^{k+m-2l} and r̄₁ ≥ r₁, where
//! r̄₁ = (c/b)^{1/(k-l)}. The inner pieces are the ε-regularized singular
//! family; the glue radii r̄ᵢ(ε) are the unique crossings of the gap
//! functions ψ_{i,ε} = inner − outer, required to interlace
//! r̄₁ < r̄₁(ε) < r̄₂ < r̄₂(ε) < r̄₃ < r̄₃(ε) < r̄₃ + 1.

use crate::barriers::{
    find_single_sign_change, inner_family, BarrierParams, BarrierTriple, Component, InnerPiece,
    Regime, Role, TailSum, EPS_LADDER, PAD,
};
use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::spectrum::{characteristic_value, Spectrum};
use crate::symbolic::{binomial_cp, PowerLogSum, PowerLogTerm};

/// Optional overrides for the super-solution builders. Values are validated
/// against the lemma-admissible ranges; `None` selects the defaults
/// (k the midpoint of (l, k₀), c = 1.1 × the largest lower bound, ε the
/// first admissible rung of the descending ladder, β = 1/2).
#[derive(Debug, Clone, Copy, Default)]
pub struct SuperOpts {
    pub eps: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
}

/// Sub-solution triple for p > p_JL: zero inside the closed-form radii,
/// the explicit two-term tails outside.
pub fn build_sub_supercritical(prob: &Problem, spec: &Spectrum) -> Result<BarrierTriple> {
    if spec.degenerate {
        return Err(Error::regime(
            "degenerate spectrum: use the critical-regime builder",
        ));
    }
    let (n, m, big_l, b) = (prob.nf(), prob.m, prob.big_l, prob.b);
    let l = spec.l;

    let u_out = PowerLogSum::new(vec![
        PowerLogTerm::power(big_l, m),
        PowerLogTerm::power(-b, l),
    ]);
    let v_out = u_out.neg_laplacian(prob.n);
    let w_out = v_out.neg_laplacian(prob.n);
    let w_neg_lap = w_out.neg_laplacian(prob.n);

    let exp = 1.0 / (l - m);
    let r1 = (b / big_l).powf(exp);
    let r2 = (l * (n - 2.0 - l) * b / (m * (n - 2.0 - m) * big_l)).powf(exp);
    let r3 = (l * (l + 2.0) * (n - 2.0 - l) * (n - 4.0 - l) * b
        / (m * (m + 2.0) * (n - 2.0 - m) * (n - 4.0 - m) * big_l))
        .powf(exp);
    if !(0.0 < r1 && r1 < r2 && r2 < r3) {
        return Err(Error::inconsistent(format!(
            "sub radii not ordered: {r1}, {r2}, {r3}"
        )));
    }

    Ok(BarrierTriple {
        role: Role::Sub,
        regime: Regime::Supercritical,
        n: prob.n,
        p: prob.p,
        b,
        m,
        big_l,
        l,
        params: BarrierParams {
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

/// Super-solution triple for p > p_JL: ε-regularized singular family inside,
/// three-term tails outside, glued at the gap-function crossings.
pub fn build_super_supercritical(
    prob: &Problem,
    spec: &Spectrum,
    opts: &SuperOpts,
) -> Result<BarrierTriple> {
    if spec.degenerate {
        return Err(Error::regime(
            "degenerate spectrum: use the critical-regime builder",
        ));
    }
    let (n, m, big_l, b) = (prob.nf(), prob.m, prob.big_l, prob.b);
    let (l, k0) = (spec.l, spec.k0);

    let k = opts.k.unwrap_or(0.5 * (l + k0));
    if !(k > l && k < k0) {
        return Err(Error::domain(format!("k = {k} outside the admissible ({l}, {k0})")));
    }
    let p_of_k = characteristic_value(prob, k - m);
    debug_assert!(p_of_k > 0.0, "P(k) must be positive on (l, k0)");
    let cp = binomial_cp(prob.p)?;

    // c P(k) ≥ C_p L^{p-2} b² r̄₁^{k+m-2l} with r̄₁ = (c/b)^{1/(k-l)} solves in
    // closed form because the exponent θ = (k+m-2l)/(k-l) is negative.
    let theta = (k + m - 2.0 * l) / (k - l);
    let c_lb1 = (cp * big_l.powf(prob.p - 2.0) * b.powf(2.0 - theta) / p_of_k)
        .powf(1.0 / (1.0 - theta));
    // r̄₁ ≥ r₁, i.e. (c/b)^{1/(k-l)} ≥ (b/L)^{1/(l-m)}.
    let c_lb2 = b * (b / big_l).powf((k - l) / (l - m));
    let c_min = c_lb1.max(c_lb2);
    let c = match opts.c {
        Some(c) => {
            if c < c_min {
                return Err(Error::domain(format!(
                    "c = {c} violates the lower bounds (need ≥ {c_min})"
                )));
            }
            c
        }
        None => PAD * c_min,
    };

    let u_out = PowerLogSum::new(vec![
        PowerLogTerm::power(big_l, m),
        PowerLogTerm::power(-b, l),
        PowerLogTerm::power(c, k),
    ]);
    let v_out = u_out.neg_laplacian(prob.n);
    let w_out = v_out.neg_laplacian(prob.n);
    let w_neg_lap = w_out.neg_laplacian(prob.n);

    // Limit crossings of the outer gaps (ε → 0).
    let exp = 1.0 / (k - l);
    let rb1 = (c / b).powf(exp);
    let rb2 = (k * (n - 2.0 - k) * c / (l * (n - 2.0 - l) * b)).powf(exp);
    let rb3 = (k * (k + 2.0) * (n - 2.0 - k) * (n - 4.0 - k) * c
        / (l * (l + 2.0) * (n - 2.0 - l) * (n - 4.0 - l) * b))
        .powf(exp);
    if !(rb1 < rb2 && rb2 < rb3) {
        return Err(Error::inconsistent(format!(
            "outer gap radii not ordered: {rb1}, {rb2}, {rb3}"
        )));
    }
    let r_limit = [rb1, rb2, rb3];

    let family = inner_family(prob);
    let eval_u = |r: f64| u_out.eval(r).unwrap();
    let eval_v = |r: f64| v_out.eval(r).unwrap();
    let eval_w = |r: f64| w_out.eval(r).unwrap();
    let outers: [&dyn Fn(f64) -> f64; 3] = [&eval_u, &eval_v, &eval_w];
    let ladder: &[f64] = match opts.eps {
        Some(_) => &[0.0],
        None => &EPS_LADDER,
    };
    let mut accepted: Option<(f64, [f64; 3])> = None;
    let mut last_err = String::new();
    for &rung in ladder {
        let eps = opts.eps.unwrap_or(rung);
        match junctions_for_eps(eps, &family, &outers, &r_limit, f64::MIN_POSITIVE) {
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

    let inner = |i: usize| InnerPiece::EpsPower {
        coef: family[i].0,
        power: family[i].1,
        eps,
    };

    Ok(BarrierTriple {
        role: Role::Super,
        regime: Regime::Supercritical,
        n: prob.n,
        p: prob.p,
        b,
        m,
        big_l,
        l,
        params: BarrierParams {
            eps: Some(eps),
            k: Some(k),
            c: Some(c),
            cp: Some(cp),
            r_limit: Some(r_limit),
            r_eps: Some(r_eps),
            ..Default::default()
        },
        u: Component {
            inner: inner(0),
            outer: TailSum::from(&u_out),
            outer_neg_lap: TailSum::from(&v_out),
            junction: r_eps[0],
        },
        v: Component {
            inner: inner(1),
            outer: TailSum::from(&v_out),
            outer_neg_lap: TailSum::from(&w_out),
            junction: r_eps[1],
        },
        w: Component {
            inner: inner(2),
            outer: TailSum::from(&w_out),
            outer_neg_lap: TailSum::from(&w_neg_lap),
            junction: r_eps[2],
        },
    })
}

/// Junction radii r̄ᵢ(ε) for one ε: the unique crossing of each gap
/// ψ_{i,ε} = inner − outer on (r̄ᵢ·…, r̄ᵢ+1], plus the interlacing check.
/// `floor` bounds the scan from below (the critical regime must stay
/// outside the log base R).
pub(crate) fn junctions_for_eps(
    eps: f64,
    family: &[(f64, f64); 3],
    outers: &[&dyn Fn(f64) -> f64; 3],
    r_limit: &[f64; 3],
    floor: f64,
) -> Result<[f64; 3]> {
    let mut r_eps = [0.0; 3];
    for i in 0..3 {
        let (coef, power) = family[i];
        let outer = outers[i];
        let gap = |r: f64| coef * (r * r + eps).powf(-0.5 * power) - outer(r);
        let lo = (0.5 * r_limit[i]).max(floor);
        let hi = r_limit[i] + 1.0;
        r_eps[i] = find_single_sign_change(gap, lo, hi, 1000, "gap function")?;
    }
    let ok = r_limit[0] < r_eps[0]
        && r_eps[0] < r_limit[1]
        && r_limit[1] < r_eps[1]
        && r_eps[1] < r_limit[2]
        && r_limit[2] < r_eps[2]
        && r_eps[2] < r_limit[2] + 1.0;
    if !ok {
        return Err(Error::search(format!(
            "junction interlacing fails at ε = {eps}: limits {r_limit:?}, crossings {r_eps:?}"
        )));
    }
    Ok(r_eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{jl_exponent, Order};
    use crate::spectrum::solve_spectrum;

    fn setup(n: u32, factor: f64, b: f64) -> (Problem, Spectrum) {
        let pjl = jl_exponent(Order::Six, n).unwrap().value();
        let prob = Problem::new(n, factor * pjl, b).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        (prob, spec)
    }

    #[test]
    fn sub_radii_closed_forms() {
        let (prob, spec) = setup(20, 1.5, 1.0);
        let sub = build_sub_supercritical(&prob, &spec).unwrap();
        let r = sub.params.r_under.unwrap();
        // with b = L the first radius is exactly 1
        let prob_bl = Problem::new(20, prob.p, prob.big_l).unwrap();
        let sub_bl = build_sub_supercritical(&prob_bl, &spec).unwrap();
        assert!((sub_bl.params.r_under.unwrap()[0] - 1.0).abs() < 1e-14);
        // ordering and positivity of the tail past r₂
        assert!(0.0 < r[0] && r[0] < r[1] && r[1] < r[2]);
        let u_r2 = sub.u_at(r[1]);
        let expected = prob.big_l * r[1].powf(-prob.m) - prob.b * r[1].powf(-spec.l);
        assert!((u_r2 - expected).abs() < 1e-12 * expected.abs());
        assert!(u_r2 > 0.0);
        // u vanishes at its junction
        assert!(sub.u.outer.eval(r[0]).abs() < 1e-12 * prob.big_l * r[0].powf(-prob.m));
        assert_eq!(sub.u_at(0.5 * r[0]), 0.0);
    }

    #[test]
    fn super_junctions_interlace() {
        let (prob, spec) = setup(20, 1.5, 1.0);
        let sup = build_super_supercritical(&prob, &spec, &SuperOpts::default()).unwrap();
        let rl = sup.params.r_limit.unwrap();
        let re = sup.params.r_eps.unwrap();
        assert!(rl[0] < re[0] && re[0] < rl[1]);
        assert!(rl[1] < re[1] && re[1] < rl[2]);
        assert!(rl[2] < re[2] && re[2] < rl[2] + 1.0);
        // r̄₁ ≥ sub's r₁
        let sub = build_sub_supercritical(&prob, &spec).unwrap();
        assert!(rl[0] >= sub.params.r_under.unwrap()[0]);
        // continuity at the junctions (Lipschitz gluing)
        for comp in sup.components() {
            let j = comp.junction;
            let gap = comp.inner.eval(j) - comp.outer.eval(j);
            assert!(
                gap.abs() < 1e-9 * comp.outer.eval(j).abs(),
                "discontinuous at junction {j}: {gap}"
            );
        }
    }

    #[test]
    fn eps_monotonicity_of_junctions() {
        // Smaller ε lifts the inner pieces and pulls every junction toward
        // its limit radius from above.
        let (prob, spec) = setup(20, 1.5, 1.0);
        let a = build_super_supercritical(
            &prob,
            &spec,
            &SuperOpts { eps: Some(1e-2), ..Default::default() },
        )
        .unwrap();
        let b = build_super_supercritical(
            &prob,
            &spec,
            &SuperOpts { eps: Some(1e-4), ..Default::default() },
        )
        .unwrap();
        let rl = a.params.r_limit.unwrap();
        for i in 0..3 {
            let (ra, rb) = (a.params.r_eps.unwrap()[i], b.params.r_eps.unwrap()[i]);
            assert!(rb < ra, "smaller ε must shrink junction {i}: {rb} vs {ra}");
            assert!(rb > rl[i]);
        }
        // pointwise: smaller ε gives a larger inner piece
        for r in [0.1, 0.5, 1.0] {
            assert!(b.u.inner.eval(r) > a.u.inner.eval(r));
        }
    }

    #[test]
    fn rejects_bad_overrides() {
        let (prob, spec) = setup(20, 1.5, 1.0);
        let bad_k = SuperOpts { k: Some(spec.k0 + 1.0), ..Default::default() };
        assert!(build_super_supercritical(&prob, &spec, &bad_k).is_err());
        let bad_c = SuperOpts { c: Some(1e-12), ..Default::default() };
        assert!(build_super_supercritical(&prob, &spec, &bad_c).is_err());
    }

    #[test]
    fn rejects_degenerate_spectrum() {
        let n = 20;
        let pjl = jl_exponent(Order::Six, n).unwrap().value();
        let prob = Problem::new(n, pjl, 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        assert!(build_sub_supercritical(&prob, &spec).is_err());
        assert!(build_super_supercritical(&prob, &spec, &SuperOpts::default()).is_err());
    }

    #[test]
    fn psi_sign_pattern_near_limit() {
        // ψ₁ with small ε: negative below r̄₁, positive just past r̄₁(ε).
        let (prob, spec) = setup(20, 1.5, 1.0);
        let sup = build_super_supercritical(
            &prob,
            &spec,
            &SuperOpts { eps: Some(1e-6), ..Default::default() },
        )
        .unwrap();
        let rb1 = sup.params.r_limit.unwrap()[0];
        let j = sup.u.junction;
        let psi = |r: f64| sup.u.inner.eval(r) - sup.u.outer.eval(r);
        assert!(psi(0.9 * rb1) < 0.0);
        assert!(psi(0.999 * j) < 0.0);
        assert!(psi(1.001 * j) > 0.0);
    }
}
