use trilane::asymptotics::*;
use trilane::barriers::*;
use trilane::evolve::*;
use trilane::exponents::{jl_exponent, Order};
use trilane::problem::Problem;
use trilane::spectrum::solve_spectrum;

fn main() {
    let pjl = jl_exponent(Order::Six, 20).unwrap().value();
    let probc = Problem::new(20, pjl, 1.0).unwrap();
    let specc = solve_spectrum(&probc).unwrap();
    let subc = build_sub_critical(&probc, &specc).unwrap();
    let supc = build_super_critical(&probc, &specc, &SuperOpts::default()).unwrap();
    let r_max = 8.0 * supc.params.r_eps.unwrap()[2];
    let grid = RadialGrid::new(20, r_max, 160_000).unwrap();
    let mut state = init_state(&subc, &grid).unwrap();
    let opts = RunOpts {
        implicit_factor: 1e7,
        step_budget: 1e14,
        init_fixup: false,
        ..Default::default()
    };
    let t0 = std::time::Instant::now();
    let res = run_to_steady(&mut state, &supc, &grid, &opts).unwrap();
    println!("critical evolve (no fixup): elapsed {:?}", t0.elapsed());
    println!(
        "converged={} steps={} t={:.2} dt={:.2e} sandwich={} monotone={} m_viol={} worst_m={:.2e}",
        res.converged, res.steps, res.t_final, res.dt, res.sandwich_ok, res.monotone_ok,
        res.monitor.monotone_violations, res.monitor.worst_monotone
    );
    println!("u(0) = {:.5}", state.fields[0][0]);

    let radii = grid.radii();
    let window = default_window(supc.max_junction(), grid.r_max);
    println!("window = [{:.3}, {:.3}]", window.lo, window.hi);
    let fit = fit_critical(&radii, state.u(), &probc, &specc, &window).unwrap();
    println!("critical fit: b̂={:.5} intercept={:.4} tstat={:.2} ill={}", fit.b_hat, fit.intercept, fit.curvature_tstat, fit.ill_conditioned);
    let wrong = fit_supercritical(&radii, state.u(), &probc, &specc, &window).unwrap();
    println!("supercritical-model: tstat={:.2} l̂={:?} b̂={:.4}", wrong.curvature_tstat, wrong.l_hat, wrong.b_hat);
    let cert = sandwich_certificate(&radii, state.u(), state.v(), state.w(), &subc, &supc);
    println!("certificate pass={} lower={:?}", cert.pass, cert.lower_margin);
}
