//! Energy ground states on the mass sphere by normalized gradient flow.
//!
//! One pseudo-time step treats the radial Laplacian implicitly (a
//! tridiagonal solve, unconditionally stable) and the nonlinearity
//! explicitly, then projects back onto the constraint:
//!
//! ```text
//! (1/dt - Δ_r) u* = u/dt + f(u),      u ← √m · u* / ‖u*‖_{L²}
//! ```
//!
//! The discrete Laplacian is the finite-volume form
//! `(Δu)_i = [A_{i+1/2}(u_{i+1}-u_i) - A_{i-1/2}(u_i-u_{i-1})] / (V_i h)`
//! with face areas `A = ω_N r^{N-1}`, whose quadratic form is exactly the
//! staggered Dirichlet energy of [`RadialProfile::grad_norm_sq`]. At the
//! origin the regularized row `(Δu)_0 = 2N (u_1 - u_0)/h²` is the same
//! formula written for the half-cell `[0, h/2]`.
//!
//! The energy decreases along the flow; if a step raises it beyond
//! rounding the step is rejected and `dt` halved. Blow-up triggers a
//! retry with a smaller step, and an error only after all restarts fail.
//! Non-converged outcomes are returned with `converged = false`, never
//! dropped: on a truncated grid the flow cannot distinguish "the infimum
//! is zero and not attained" from slow convergence, so the caller sees
//! the best profile found and decides with that honesty in mind.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::functionals::{action_report, energy_report, multiplier_estimate, ActionReport, EnergyReport};
use crate::linalg::TridiagonalSolver;
use crate::nonlinearity::{check_hypotheses, NonlinearityModel};
use crate::radial::{RadialGrid, RadialProfile};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("hypotheses fail for this model/dimension: {0:?}")]
    Hypotheses(Vec<&'static str>),
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    #[error("flow blew up in every restart (last sup norm {sup})")]
    BlowUp { sup: f64 },
    #[error("energy became non-finite during the flow")]
    NonFiniteEnergy,
    #[error("masses must be strictly increasing")]
    MassesNotIncreasing,
    #[error("profile error: {0}")]
    Profile(#[from] crate::radial::ProfileError),
}

/// Initial iterate for the flow.
#[derive(Debug, Clone)]
pub enum InitStrategy<T: Real> {
    /// Gaussian of the given width, scaled to the target mass.
    Gaussian { width: T },
    /// Randomly placed and shaped bump (seeded).
    RandomBump,
    /// Start from an existing profile (e.g. loaded from CSV).
    Profile(RadialProfile<T>),
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T: Real> {
    pub dt: T,
    /// Convergence tolerance on the sup-norm change per unit pseudo-time.
    pub tol: T,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub init: InitStrategy<T>,
    /// Sup-norm guard above which the iterate counts as blown up.
    pub blowup_guard: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::of(0.1),
            tol: T::of(1e-8),
            max_iter: 20_000,
            restarts: 4,
            seed: 42,
            init: InitStrategy::Gaussian { width: T::one() },
            blowup_guard: T::of(1e8),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    /// Negativity margin used when deciding whether an energy level is
    /// certifiably below zero: ten times the convergence tolerance.
    pub fn negativity_margin(&self) -> T {
        self.tol * T::of(10.0)
    }
}

/// Converged (or best-effort) ground-state candidate.
#[derive(Debug, Clone)]
pub struct MinimizeResult<T: Real> {
    pub profile: RadialProfile<T>,
    pub energy: T,
    pub mu: T,
    pub report: EnergyReport<T>,
    pub residuals: ActionReport<T>,
    /// Discrete L² norm of `-Δu - f(u) + μu`.
    pub el_residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub restart_index: usize,
}

struct FlowOutcome<T: Real> {
    values: Vec<T>,
    iterations: usize,
    converged: bool,
    blew_up: bool,
}

/// Finite-volume radial Laplacian applied to node values (zero Dirichlet
/// at the last node).
pub(crate) fn apply_laplacian<T: Real>(grid: &RadialGrid<T>, u: &[T], out: &mut Vec<T>) {
    let m = grid.intervals();
    let h = grid.spacing();
    let n = T::of_usize(grid.dim());
    out.clear();
    out.resize(m + 1, T::zero());
    out[0] = T::of(2.0) * n * (u[1] - u[0]) / (h * h);
    for i in 1..m {
        let r = grid.node(i);
        let rm = radial_face(grid, i - 1);
        let rp = radial_face(grid, i);
        let denom = r.powi(grid.dim() as i32 - 1) * h * h;
        out[i] = (rp * (u[i + 1] - u[i]) - rm * (u[i] - u[i - 1])) / denom;
    }
    out[m] = T::zero();
}

fn radial_face<T: Real>(grid: &RadialGrid<T>, i: usize) -> T {
    let r = grid.node(i) + grid.spacing() / T::of(2.0);
    r.powi(grid.dim() as i32 - 1)
}

/// Build the backward-Euler operator `(1/dt + shift) I - Δ` on nodes
/// `0..M-1`, where `shift` is the current multiplier estimate.
fn build_solver<T: Real>(grid: &RadialGrid<T>, dt: T, shift: T) -> TridiagonalSolver<T> {
    let m = grid.intervals();
    let h = grid.spacing();
    let n = T::of_usize(grid.dim());
    let base = T::one() / dt + shift;

    let mut lower = Vec::with_capacity(m - 1);
    let mut diag = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m - 1);

    let a0 = T::of(2.0) * n / (h * h);
    diag.push(base + a0);
    upper.push(-a0);
    for i in 1..m {
        let denom = grid.node(i).powi(grid.dim() as i32 - 1) * h * h;
        let alpha = radial_face(grid, i - 1) / denom;
        let beta = radial_face(grid, i) / denom;
        lower.push(-alpha);
        diag.push(base + alpha + beta);
        if i < m - 1 {
            upper.push(-beta);
        }
    }
    TridiagonalSolver::new(lower, diag, upper)
}

fn initial_values<T: Real>(
    grid: &RadialGrid<T>,
    mass: T,
    init: &InitStrategy<T>,
    restart: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<T> {
    let mut profile = match init {
        InitStrategy::Gaussian { width } => {
            // Restarts sweep widths log-uniformly up to the radius at
            // which the start has order-one amplitude at this mass.
            // Saturating nonlinearities need wide low-amplitude starts
            // (the narrow ones sit in the defocusing regime and spread),
            // while narrow starts probe the focusing branch.
            let w = if restart == 0 {
                *width
            } else {
                let m_f = mass.to_f64().unwrap_or(1.0).max(1e-6);
                let hi: f64 = 3f64.max(1.5 * m_f.powf(1.0 / grid.dim() as f64));
                let lo: f64 = 0.4;
                let x: f64 = rng.gen_range(0.0..1.0);
                *width * T::of(lo * (hi / lo).powf(x))
            };
            let w = w.min(grid.r_max() / T::of(4.0));
            RadialProfile::from_fn(grid.clone(), |r| (-(r / w).sq() / T::of(2.0)).exp())
        }
        InitStrategy::RandomBump => {
            let center = T::of(rng.gen_range(0.0..0.3)) * grid.r_max();
            let width = T::of(rng.gen_range(0.3..2.0));
            RadialProfile::from_fn(grid.clone(), |r| (-((r - center) / width).sq()).exp())
        }
        InitStrategy::Profile(p) => p.clone(),
    };
    if restart > 0 {
        // low-amplitude node noise decorrelates the restarts
        let sup = profile.sup_norm();
        let amp = sup * T::of(0.01);
        let m = grid.intervals();
        for (i, v) in profile.values_mut().iter_mut().enumerate() {
            if i < m {
                *v += amp * T::of(rng.gen_range(-1.0..1.0));
            }
        }
    }
    let nm = profile.mass();
    let scale = (mass / nm).sqrt();
    profile.values().iter().map(|v| *v * scale).collect()
}

fn renormalize<T: Real>(grid: &RadialGrid<T>, values: &mut [T], mass: T) -> Option<T> {
    let prof = RadialProfile::from_values(grid.clone(), values.to_vec()).ok()?;
    let nm = prof.mass();
    if !(nm > T::zero()) || !nm.is_finite() {
        return None;
    }
    let scale = (mass / nm).sqrt();
    for v in values.iter_mut() {
        *v *= scale;
    }
    Some(scale)
}

fn flow<T: Real>(
    model: &NonlinearityModel<T>,
    grid: &RadialGrid<T>,
    mass: T,
    cfg: &SolverConfig<T>,
    start: Vec<T>,
) -> FlowOutcome<T> {
    // The implicit operator carries the current multiplier estimate:
    // at a discrete critical point -Δu - f(u) + μu = 0 the step
    // (1/dt - Δ + μ) u* = u/dt + f(u) returns u* = u exactly, so the
    // flow equilibrates on the critical point itself. Without the shift
    // the projected splitting equilibrates O(dt) away from it.
    let m = grid.intervals();
    let mut dt = cfg.dt;
    let mut u = start;
    renormalize(grid, &mut u, mass);

    let energy_of = |vals: &[T]| -> T {
        let prof = RadialProfile::from_values(grid.clone(), vals.to_vec()).unwrap();
        energy_report(model, &prof).energy
    };
    let multiplier_of = |vals: &[T]| -> T {
        let prof = RadialProfile::from_values(grid.clone(), vals.to_vec()).unwrap();
        multiplier_estimate(model, &prof).unwrap_or(T::zero())
    };
    let mut energy_prev = energy_of(&u);

    let mut rhs = vec![T::zero(); m];
    let mut interior = Vec::with_capacity(m);
    let dt_floor = cfg.dt * T::of(1e-9);

    for iter in 0..cfg.max_iter {
        // keep the shifted diagonal dominant even for negative estimates
        let shift = multiplier_of(&u).max(-T::of(0.5) / dt);
        let solver = build_solver(grid, dt, shift);
        for i in 0..m {
            rhs[i] = u[i] / dt + model.f(u[i]);
        }
        solver.solve(&rhs, &mut interior);

        let mut next = interior.clone();
        next.push(T::zero());
        let finite = next.iter().all(|v| v.is_finite());
        let sup = next.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        if !finite || sup > cfg.blowup_guard {
            return FlowOutcome { values: u, iterations: iter, converged: false, blew_up: true };
        }
        if renormalize(grid, &mut next, mass).is_none() {
            return FlowOutcome { values: u, iterations: iter, converged: false, blew_up: true };
        }

        let energy_next = energy_of(&next);
        if !energy_next.is_finite() {
            return FlowOutcome { values: u, iterations: iter, converged: false, blew_up: true };
        }
        if energy_next > energy_prev + T::of(1e-12) * (T::one() + energy_prev.abs()) {
            // reject the step: the explicit nonlinearity is monotone only
            // while it stays contractive at the current dt
            dt /= T::of(2.0);
            if dt < dt_floor {
                return FlowOutcome {
                    values: u,
                    iterations: iter,
                    converged: false,
                    blew_up: false,
                };
            }
            continue;
        }

        let mut change = T::zero();
        for i in 0..=m {
            change = change.max((next[i] - u[i]).abs());
        }
        u = next;
        energy_prev = energy_next;
        if change / dt < cfg.tol {
            return FlowOutcome { values: u, iterations: iter + 1, converged: true, blew_up: false };
        }
    }
    FlowOutcome { values: u, iterations: cfg.max_iter, converged: false, blew_up: false }
}

/// Discrete Euler-Lagrange residual norm `‖-Δu - f(u) + μu‖_{L²}`.
pub fn euler_lagrange_residual<T: Real>(
    model: &NonlinearityModel<T>,
    u: &RadialProfile<T>,
    mu: T,
) -> T {
    let grid = u.grid();
    let mut lap = Vec::new();
    apply_laplacian(grid, u.values(), &mut lap);
    let mut acc = T::zero();
    for i in 0..grid.intervals() {
        let v = u.values()[i];
        let r = -lap[i] - model.f(v) + mu * v;
        acc += grid.cell_measure(i) * r * r;
    }
    acc.sqrt()
}

/// Minimize `I` on the sphere of the given mass.
///
/// Restarts perturb the initial iterate; the winner has the lowest energy,
/// with ties broken by the smaller Euler-Lagrange residual.
pub fn minimize<T: Real>(
    model: &NonlinearityModel<T>,
    grid: &RadialGrid<T>,
    mass: T,
    cfg: &SolverConfig<T>,
) -> Result<MinimizeResult<T>, SolveError> {
    let report = check_hypotheses(model, grid.dim());
    if !report.all_hold() {
        return Err(SolveError::Hypotheses(report.violations()));
    }
    if !(mass > T::zero()) {
        return Err(SolveError::BadMass(mass.to_f64().unwrap_or(f64::NAN)));
    }

    let outcomes: Vec<(usize, FlowOutcome<T>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(restart as u64 * 0x9e37));
            let start = initial_values(grid, mass, &cfg.init, restart, &mut rng);
            // blow-up inside a restart retries the same start at smaller dt
            let mut local = cfg.clone();
            let mut out = flow(model, grid, mass, &local, start.clone());
            let mut retries = 0;
            while out.blew_up && retries < 4 {
                local.dt /= T::of(4.0);
                out = flow(model, grid, mass, &local, start.clone());
                retries += 1;
            }
            (restart, out)
        })
        .collect();

    if outcomes.iter().all(|(_, o)| o.blew_up) {
        let sup = outcomes
            .last()
            .map(|(_, o)| o.values.iter().fold(T::zero(), |a, v| a.max(v.abs())))
            .unwrap_or(T::zero());
        return Err(SolveError::BlowUp { sup: sup.to_f64().unwrap_or(f64::NAN) });
    }

    let mut best: Option<MinimizeResult<T>> = None;
    for (restart, out) in outcomes {
        if out.blew_up {
            continue;
        }
        let profile = RadialProfile::from_values(grid.clone(), out.values)?;
        let report = energy_report(model, &profile);
        if !report.energy.is_finite() {
            return Err(SolveError::NonFiniteEnergy);
        }
        let mu = multiplier_estimate(model, &profile).unwrap_or(T::zero());
        let el = euler_lagrange_residual(model, &profile, mu);
        let residuals = action_report(model, &profile, mu);
        let candidate = MinimizeResult {
            energy: report.energy,
            mu,
            report,
            residuals,
            el_residual: el,
            iterations: out.iterations,
            converged: out.converged,
            restart_index: restart,
            profile,
        };
        let better = match &best {
            None => true,
            Some(b) => {
                let tie = (candidate.energy - b.energy).abs()
                    <= T::of(1e-12) * (T::one() + b.energy.abs());
                if tie {
                    candidate.el_residual < b.el_residual
                } else {
                    candidate.energy < b.energy
                }
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart survived"))
}

/// One row of an energy-curve table.
#[derive(Debug, Clone)]
pub struct CurveRow<T: Real> {
    pub mass: T,
    pub outcome: Result<MinimizeResult<T>, String>,
}

/// Ground-state energy over a strictly increasing list of masses.
///
/// Rows run independently (in parallel, each with its own seed) unless
/// `warm_start` is set, in which case they run sequentially, each row
/// starting from the previous converged profile. Warm starts bias the
/// restarts toward the previous branch and stay off by default.
pub fn energy_curve<T: Real>(
    model: &NonlinearityModel<T>,
    grid: &RadialGrid<T>,
    masses: &[T],
    cfg: &SolverConfig<T>,
    warm_start: bool,
) -> Result<Vec<CurveRow<T>>, SolveError> {
    if masses.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolveError::MassesNotIncreasing);
    }
    if warm_start {
        let mut rows = Vec::with_capacity(masses.len());
        let mut carry: Option<RadialProfile<T>> = None;
        for (i, &m) in masses.iter().enumerate() {
            let mut local = cfg.clone();
            local.seed = cfg.seed.wrapping_add(i as u64);
            if let Some(prev) = &carry {
                local.init = InitStrategy::Profile(prev.clone());
            }
            let outcome = minimize(model, grid, m, &local).map_err(|e| e.to_string());
            if let Ok(res) = &outcome {
                if res.converged {
                    carry = Some(res.profile.clone());
                }
            }
            rows.push(CurveRow { mass: m, outcome });
        }
        return Ok(rows);
    }
    let rows: Vec<CurveRow<T>> = masses
        .par_iter()
        .enumerate()
        .map(|(i, &m)| {
            let mut local = cfg.clone();
            local.seed = cfg.seed.wrapping_add(i as u64);
            CurveRow { mass: m, outcome: minimize(model, grid, m, &local).map_err(|e| e.to_string()) }
        })
        .collect();
    Ok(rows)
}

/// Sign and radial-monotonicity diagnostics of a computed minimizer.
#[derive(Debug, Clone, Copy)]
pub struct SignMonotonicity {
    pub constant_sign: bool,
    pub nonincreasing_modulus: bool,
    /// Noise floor used for both checks, `1e-8 ‖u‖_∞`.
    pub floor: f64,
}

pub fn sign_monotonicity_check<T: Real>(result: &MinimizeResult<T>) -> SignMonotonicity {
    let u = &result.profile;
    let floor = u.sup_norm() * T::of(1e-8);
    let mut has_pos = false;
    let mut has_neg = false;
    for v in u.values() {
        if *v > floor {
            has_pos = true;
        }
        if *v < -floor {
            has_neg = true;
        }
    }
    let constant_sign = !(has_pos && has_neg);
    let mut nonincreasing = true;
    for w in u.values().windows(2) {
        if w[1].abs() > w[0].abs() + floor {
            nonincreasing = false;
            break;
        }
    }
    SignMonotonicity {
        constant_sign,
        nonincreasing_modulus: nonincreasing,
        floor: floor.to_f64().unwrap_or(f64::NAN),
    }
}
