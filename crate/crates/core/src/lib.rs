//! Ground states of nonlinear scalar field equations with prescribed L² mass.
//!
//! The crate computes global minimizers of
//! `I(u) = 1/2 ∫|∇u|² - ∫F(u)` on the constraint `‖u‖²_{L²} = m`
//! (normalized gradient flow on radial grids), the associated Lagrange
//! multipliers, the critical mass where the ground-state energy turns
//! negative, and least-action solutions of the free equation
//! `-Δu = f(u) - μu` (phase-plane shooting). A verification layer replays
//! the structural claims on concrete instances: energy-curve shape, sign
//! and monotonicity of minimizers, mountain-pass path geometry, and the
//! identity `A_μ = E_m + μm/2`, reporting one verdict per claim.
//!
//! All numerics are generic over the scalar type via [`scalar::Real`];
//! the `*64` aliases below fix `f64`, which is what the CLI uses.

// negated comparisons like `!(x > 0)` are deliberate: they reject NaN
// along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical_mass;
pub mod functionals;
pub mod linalg;
pub mod minimizer;
pub mod mp_path;
pub mod nonlinearity;
pub mod radial;
pub mod scalar;
pub mod shooting;
pub mod verification;

pub use scalar::Real;

/// Cap the global worker pool (first call wins; later calls are ignored).
/// The batch layers (curve rows, restarts) use this pool.
pub fn set_worker_threads(n: usize) {
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

pub type Model64 = nonlinearity::NonlinearityModel<f64>;
pub type Shifted64 = nonlinearity::ShiftedNonlinearity<f64>;
pub type Grid64 = radial::RadialGrid<f64>;
pub type Profile64 = radial::RadialProfile<f64>;
pub type SolverConfig64 = minimizer::SolverConfig<f64>;
pub type ShootConfig64 = shooting::ShootConfig<f64>;
pub type MinimizeResult64 = minimizer::MinimizeResult<f64>;
pub type Verdict64 = verification::Verdict<f64>;
