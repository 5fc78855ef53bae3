//! Numerical verification of the barrier inequalities.
//!
//! Pointwise, on a grid covering (0, r_max] with dense windows around every
//! junction: the signed residuals of
//!
//!   -Δu ≤ v,  -Δv ≤ w,  -Δw ≤ uᵖ   (sub; reversed for super)
//!
//! must stay below 1e-9 of the local scale. Laplacians are exact away from
//! junctions (term calculus / ε-family closed forms); an independent
//! finite-difference cross-check guards the stored forms.
//!
//! At each junction radius the piecewise glue has a derivative kink, so the
//! corresponding inequality is also tested in weak form: for C² radial
//! bumps ψ ≥ 0 straddling the junction,
//!
//!   ∫ (comp·Δψ + rhs·ψ) rⁿ⁻¹ dr  ≥ 0  (sub; ≤ 0 for super),
//!
//! by composite trapezoid quadrature with 10⁴ nodes per bump.

use serde::{Deserialize, Serialize};

use crate::barriers::{BarrierTriple, Regime, Role};

/// Relative tolerance for pointwise residuals and weak margins.
pub const VERIFY_TOL: f64 = 1e-9;

/// Worst signed violation of one inequality over the grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointCheck {
    /// 1: -Δu vs v, 2: -Δv vs w, 3: -Δw vs uᵖ, 4: tail-only w-inequality.
    pub inequality: u8,
    /// Largest violation measured in units of the local scale (positive
    /// means the inequality is broken by that relative amount).
    pub worst_rel_violation: f64,
    pub at_radius: f64,
    pub pass: bool,
}

/// Weak-form margin for one bump at one junction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeakCheck {
    pub inequality: u8,
    pub junction: f64,
    pub bump_center: f64,
    pub bump_width: f64,
    /// Sign668 margin normalized by the integral scale; ≥ -tol passes.
    pub rel_margin: f64,
    pub pass: bool,
}

/// Deviation of the stored -Δ forms from a 5-point finite-difference
/// Laplacian of the stored tails.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FdCheck {
    pub max_rel_dev: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub role: Role,
    pub regime: Regime,
    pub pass: bool,
    pub grid_points: usize,
    pub junction_ordering_ok: bool,
    pub pointwise: Vec<PointCheck>,
    pub weak: Vec<WeakCheck>,
    pub fd: FdCheck,
}

/// Standard verification grid: log-spaced base points on
/// (min junction/100, r_max], a dense linear window within ±10% of every
/// junction, and extra resolution on the far tail.
pub fn verification_grid(triple: &BarrierTriple, base_points: usize) -> Vec<f64> {
    let junctions = [triple.u.junction, triple.v.junction, triple.w.junction];
    let jmin = junctions.iter().cloned().fold(f64::INFINITY, f64::min);
    let jmax = triple.max_junction();
    let r_max = 10.0 * jmax;
    // tails with fractional log powers are only defined beyond the log base
    let floor = triple.params.big_r.map_or(0.0, |r| r * (1.0 + 1e-9));
    let r_lo = (jmin / 100.0).max(1e-8);
    let mut grid = Vec::with_capacity(base_points + 6 * 400);
    let (la, lb) = (r_lo.ln(), r_max.ln());
    for i in 0..=base_points {
        let r = (la + (lb - la) * i as f64 / base_points as f64).exp();
        grid.push(r);
    }
    for &j in &junctions {
        for i in 0..=400 {
            let r = j * (0.9 + 0.2 * i as f64 / 400.0);
            if r > 0.0 {
                grid.push(r);
            }
        }
    }
    grid.retain(|&r| {
        // inner pieces are defined everywhere; tails need r > R (critical)
        let needs_tail = r >= jmin;
        !needs_tail || r > floor
    });
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Verify every defining inequality of the triple on the grid; reports (not
/// raises) violations with location and magnitude.
pub fn verify_barrier(triple: &BarrierTriple, grid: &[f64]) -> VerificationReport {
    let n = triple.n;
    let p = triple.p;
    let sign = match triple.role {
        Role::Sub => 1.0,
        Role::Super => -1.0,
    };

    let mut pointwise = vec![
        PointCheck { inequality: 1, worst_rel_violation: f64::NEG_INFINITY, at_radius: 0.0, pass: true },
        PointCheck { inequality: 2, worst_rel_violation: f64::NEG_INFINITY, at_radius: 0.0, pass: true },
        PointCheck { inequality: 3, worst_rel_violation: f64::NEG_INFINITY, at_radius: 0.0, pass: true },
        PointCheck { inequality: 4, worst_rel_violation: f64::NEG_INFINITY, at_radius: 0.0, pass: true },
    ];
    let mut update = |idx: usize, viol: f64, scale: f64, r: f64| {
        let rel = viol / scale.max(f64::MIN_POSITIVE);
        if rel > pointwise[idx].worst_rel_violation {
            pointwise[idx].worst_rel_violation = rel;
            pointwise[idx].at_radius = r;
        }
    };

    for &r in grid {
        let u = triple.u_at(r);
        let v = triple.v_at(r);
        let w = triple.w_at(r);
        let up = u.max(0.0).powf(p);

        let nl_u = triple.u.neg_laplacian(r, n);
        let nl_v = triple.v.neg_laplacian(r, n);
        let nl_w = triple.w.neg_laplacian(r, n);

        update(0, sign * (nl_u - v), nl_u.abs() + v.abs(), r);
        update(1, sign * (nl_v - w), nl_v.abs() + w.abs(), r);
        update(2, sign * (nl_w - up), nl_w.abs() + up.abs(), r);

        // The tail w-inequality holds from the first zero radius on, well
        // before the triple switches to its tail piece.
        if triple.role == Role::Sub {
            let r1 = triple.params.r_under.map_or(triple.u.junction, |ru| ru[0]);
            if r > r1 * (1.0 + 1e-9) {
                let u_out = triple.u.outer.eval(r).max(0.0);
                let nl_w_out = triple.w.outer_neg_lap.eval(r);
                let up_out = u_out.powf(p);
                update(3, nl_w_out - up_out, nl_w_out.abs() + up_out.abs(), r);
            }
        }
    }
    for c in pointwise.iter_mut() {
        if c.worst_rel_violation == f64::NEG_INFINITY {
            c.worst_rel_violation = 0.0;
        }
        c.pass = c.worst_rel_violation <= VERIFY_TOL;
    }

    // Weak form at each component's own junction.
    let mut weak = Vec::new();
    let comps = triple.components();
    for (i, comp) in comps.iter().enumerate() {
        let junction = comp.junction;
        let rhs = |r: f64| match i {
            0 => triple.v_at(r),
            1 => triple.w_at(r),
            _ => triple.u_at(r).max(0.0).powf(p),
        };
        let width = junction / 10.0;
        for offset in [-0.5, -0.25, 0.0, 0.25, 0.5] {
            let center = junction + offset * width;
            let (integral, scale) =
                weak_integral(|r| comp.eval(r), &rhs, center, width, n);
            let margin = sign * integral / scale.max(f64::MIN_POSITIVE);
            weak.push(WeakCheck {
                inequality: (i + 1) as u8,
                junction,
                bump_center: center,
                bump_width: width,
                rel_margin: margin,
                pass: margin >= -VERIFY_TOL,
            });
        }
    }

    let junction_ordering_ok = check_ordering(triple);
    let fd = fd_crosscheck(triple);
    let pass = pointwise.iter().all(|c| c.pass)
        && weak.iter().all(|c| c.pass)
        && junction_ordering_ok
        && fd.pass;
    VerificationReport {
        role: triple.role,
        regime: triple.regime,
        pass,
        grid_points: grid.len(),
        junction_ordering_ok,
        pointwise,
        weak,
        fd,
    }
}

/// ∫ (comp·Δψ + rhs·ψ) rⁿ⁻¹ dr over the bump support (trapezoid, 10⁴
/// nodes), together with the absolute-integrand scale for normalization.
/// The sub-solution inequality asks this to be ≥ 0, the super ≤ 0.
fn weak_integral(
    comp: impl Fn(f64) -> f64,
    rhs: impl Fn(f64) -> f64,
    center: f64,
    width: f64,
    n: u32,
) -> (f64, f64) {
    const NODES: usize = 10_000;
    let nf = f64::from(n);
    let a = (center - width).max(width * 1e-6);
    let b = center + width;
    let h = (b - a) / NODES as f64;
    let mut integral = 0.0;
    let mut scale = 0.0;
    for i in 0..=NODES {
        let r = a + h * i as f64;
        let s = (r - center) / width;
        // C² bump (1-s²)³ and its radial Laplacian
        let (psi, dpsi, d2psi) = if s.abs() >= 1.0 {
            (0.0, 0.0, 0.0)
        } else {
            let q = 1.0 - s * s;
            (
                q * q * q,
                -6.0 * s * q * q / width,
                (-6.0 * q * q + 24.0 * s * s * q) / (width * width),
            )
        };
        let lap_psi = d2psi + (nf - 1.0) / r * dpsi;
        let weight = if i == 0 || i == NODES { 0.5 } else { 1.0 };
        let meas = weight * r.powf(nf - 1.0) * h;
        let term = comp(r) * lap_psi + rhs(r) * psi;
        integral += term * meas;
        scale += (comp(r) * lap_psi).abs().max((rhs(r) * psi).abs()) * meas;
    }
    (integral, scale)
}

fn check_ordering(triple: &BarrierTriple) -> bool {
    match (triple.role, triple.params.r_under, triple.params.r_limit, triple.params.r_eps) {
        (Role::Sub, Some(ru), _, _) => {
            let base_ok = 0.0 < ru[0] && ru[0] < ru[1] && ru[1] < ru[2];
            let r_ok = triple.params.big_r.map_or(true, |r| r < ru[0]);
            base_ok && r_ok
        }
        (Role::Super, ru, Some(rl), Some(re)) => {
            let interlace = rl[0] < re[0]
                && re[0] < rl[1]
                && rl[1] < re[1]
                && re[1] < rl[2]
                && rl[2] < re[2]
                && re[2] < rl[2] + 1.0;
            let joined = ru.map_or(true, |ru| ru[2] < rl[0]);
            interlace && joined
        }
        _ => false,
    }
}

/// Compare the stored tail -Δ forms against 5-point finite differences at
/// sample radii clear of junctions and the log base.
fn fd_crosscheck(triple: &BarrierTriple) -> FdCheck {
    let nf = f64::from(triple.n);
    let floor = triple.params.big_r.unwrap_or(0.0) * 1.3;
    let mut max_rel_dev: f64 = 0.0;
    for comp in triple.components() {
        let lo = (comp.junction * 1.05).max(floor).max(1e-6);
        for i in 0..16 {
            let r = lo * (10.0f64).powf(i as f64 / 10.0);
            let g = |x: f64| comp.outer.eval(x);
            let stencil = |h: f64| {
                let d2 = (-g(r + 2.0 * h) + 16.0 * g(r + h) - 30.0 * g(r) + 16.0 * g(r - h)
                    - g(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = (-g(r + 2.0 * h) + 8.0 * g(r + h) - 8.0 * g(r - h) + g(r - 2.0 * h))
                    / (12.0 * h);
                -(d2 + (nf - 1.0) / r * d1)
            };
            // Richardson over h and h/2 cancels the O(h⁴) term.
            let h = 6e-3 * r;
            let fd = (16.0 * stencil(0.5 * h) - stencil(h)) / 15.0;
            let exact = comp.outer_neg_lap.eval(r);
            let dev = ((exact - fd) / (1.0 + exact.abs())).abs();
            max_rel_dev = max_rel_dev.max(dev);
        }
    }
    FdCheck { max_rel_dev, pass: max_rel_dev < 1e-6 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barriers::supercritical::{
        build_sub_supercritical, build_super_supercritical, SuperOpts,
    };
    use crate::barriers::critical::{build_sub_critical, build_super_critical};
    use crate::barriers::sandwich_margins;
    use crate::exponents::{jl_exponent, Order};
    use crate::problem::Problem;
    use crate::spectrum::solve_spectrum;

    fn jl(n: u32) -> f64 {
        jl_exponent(Order::Six, n).unwrap().value()
    }

    #[test]
    fn supercritical_sub_and_super_verify() {
        let prob = Problem::new(20, 1.5 * jl(20), 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        let sub = build_sub_supercritical(&prob, &spec).unwrap();
        let sup = build_super_supercritical(&prob, &spec, &SuperOpts::default()).unwrap();
        for t in [&sub, &sup] {
            let grid = verification_grid(t, 4000);
            let report = verify_barrier(t, &grid);
            assert!(
                report.pass,
                "{:?} {:?} failed: ordering={} fd={:?} {:#?}",
                t.role,
                t.regime,
                report.junction_ordering_ok,
                report.fd,
                report.pointwise,
            );
        }
        // sub ≤ super pointwise
        let grid = verification_grid(&sup, 2000);
        let margins = sandwich_margins(&sub, &sup, &grid);
        assert!(margins.ordered, "sandwich violated: {margins:?}");
    }

    #[test]
    fn critical_sub_and_super_verify() {
        let prob = Problem::new(20, jl(20), 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        let sub = build_sub_critical(&prob, &spec).unwrap();
        let sup = build_super_critical(&prob, &spec, &SuperOpts::default()).unwrap();
        for t in [&sub, &sup] {
            let grid = verification_grid(t, 4000);
            let report = verify_barrier(t, &grid);
            assert!(
                report.pass,
                "{:?} {:?} failed: ordering={} fd={:?} {:#?}",
                t.role,
                t.regime,
                report.junction_ordering_ok,
                report.fd,
                report.pointwise,
            );
        }
        let grid = verification_grid(&sup, 2000);
        let margins = sandwich_margins(&sub, &sup, &grid);
        assert!(margins.ordered, "sandwich violated: {margins:?}");
    }

    #[test]
    fn zero_region_is_trivially_admissible() {
        let prob = Problem::new(20, 1.5 * jl(20), 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        let sub = build_sub_supercritical(&prob, &spec).unwrap();
        let r1 = sub.params.r_under.unwrap()[0];
        for r in [0.01 * r1, 0.5 * r1, 0.99 * r1] {
            assert_eq!(sub.u_at(r), 0.0);
            assert_eq!(sub.u.neg_laplacian(r, sub.n), 0.0);
        }
    }

    #[test]
    fn super_inner_inequalities_closed_form() {
        // -Δ(r²+ε)^{-k/2} ≥ k(n-2-k)(r²+ε)^{-(k+2)/2} with the ε-margin.
        let prob = Problem::new(20, 1.5 * jl(20), 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        let sup = build_super_supercritical(&prob, &spec, &SuperOpts::default()).unwrap();
        for r in [0.0, 0.3, 1.0, 2.0] {
            let nl = sup.u.inner.neg_laplacian(r, sup.n);
            let v_in = sup.v.inner.eval(r);
            assert!(nl >= v_in, "inner u-inequality at r={r}: {nl} < {v_in}");
            let nl_w = sup.w.inner.neg_laplacian(r, sup.n);
            let up = sup.u.inner.eval(r).powf(sup.p);
            assert!(nl_w >= up, "inner w-inequality at r={r}: {nl_w} < {up}");
        }
    }

    #[test]
    fn barrier_json_roundtrip() {
        let prob = Problem::new(20, 1.5 * jl(20), 1.0).unwrap();
        let spec = solve_spectrum(&prob).unwrap();
        let sup = build_super_supercritical(&prob, &spec, &SuperOpts::default()).unwrap();
        let json = sup.to_json().unwrap();
        let back = BarrierTriple::from_json(&json).unwrap();
        assert_eq!(sup, back);
        // deterministic serialization
        assert_eq!(json, back.to_json().unwrap());
    }
}
