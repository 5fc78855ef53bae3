//! Numerical laboratory for the radial triharmonic Lane-Emden equation
//!
//!   (-Δ)³u = uᵖ   in ℝⁿ,  n ≥ 15,  p ≥ p_JL(6,n),
//!
//! built around the singular solution u_∞ = L r^{-m} (m = 6/(p-1)) and the
//! sub/super-solution sandwich for the equivalent second-order system
//!
//!   -Δu = v,  -Δv = w,  -Δw = uᵖ.
//!
//! The crate has one module per pipeline stage:
//!
//! * [`exponents`] — Sobolev and Joseph-Lundgren exponent ladders for the
//!   orders 2, 4, 6 and the decay constants (m_k, L_k).
//! * [`spectrum`] — characteristic roots of the linearization around u_∞
//!   via the cubic reduction x = l(n-6-l).
//! * [`symbolic`] — exact radial calculus on sums a·r^{-α}·log^γ(r/R),
//!   plus the binomial bound constant C_p.
//! * [`barriers`] — construction and verification of the piecewise
//!   sub/super-solution triples (u,v,w), supercritical and critical.
//! * [`evolve`] — the cooperative parabolic relaxation U_t = ΔU + V, … on a
//!   truncated radial grid, with comparison/monotonicity monitors.
//! * [`asymptotics`] — decay-rate fits of steady profiles against the
//!   two-term expansions L r^{-m} - b r^{-l} (·log r at criticality).
//!
//! All operations are deterministic; reports and profiles serialize to JSON
//! and CSV for external tooling.

pub mod asymptotics;
pub mod barriers;
pub mod error;
pub mod evolve;
pub mod exponents;
pub mod problem;
pub mod spectrum;
pub mod symbolic;

pub use error::{Error, Result};
pub use problem::Problem;
