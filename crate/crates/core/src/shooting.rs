//! Least-action solutions of the free problem `-Δu = g_mu(u)` by shooting.
//!
//! In one dimension every decaying solution starts (after translation)
//! at a zero of `G_mu` with zero slope: positive solutions at the first
//! positive zero where `g_mu > 0`, negative ones at the last negative
//! zero where `g_mu < 0`. The trajectory from that height is integrated
//! by fixed-step RK4 and conserves the phase-plane energy
//! `H = u'²/2 + G_mu(u)`, which is zero on the decaying orbit; its
//! measured drift is reported as a diagnostic.
//!
//! The origin of the phase plane is a saddle, so a forward-shot orbit
//! tracks the decaying solution only until the initial-height error is
//! amplified by `e^{sqrt(mu) x}`. The shooter therefore refines the
//! height by bisection on the turn/cross dichotomy (an orbit that turns
//! back before reaching zero undershot; one that crosses zero overshot)
//! down to machine resolution, then truncates the reported trajectory
//! where `|u| + |u'|` is smallest. Decay is declared when that minimum
//! lies under the configured threshold with a monotone tail; thresholds
//! near 1e-10 are unreachable in `f64` (the minimum scales like the
//! square root of the height resolution), so the default is 1e-6.
//!
//! For `N >= 2` the radial equation gains the friction term
//! `(N-1)/r u'`, the phase energy strictly decreases, and shooting
//! bisects the initial height itself; the least action found this way is
//! an upper bound (shooting enumerates radial monotone solutions only)
//! and is flagged as such.

use thiserror::Error;

use crate::functionals::ActionReport;
use crate::nonlinearity::{NonlinearityModel, ShiftedNonlinearity, Sign};
use crate::radial::{unit_sphere_measure, RadialGrid, RadialProfile};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ShootError {
    #[error("frequency must be positive, got {0}")]
    BadFrequency(f64),
    #[error("initial height must be nonzero")]
    ZeroHeight,
    #[error("step size must be positive and finite")]
    BadStep,
    #[error("height search could not bracket a crossing below {0}")]
    NoCrossingBracket(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootStatus {
    Decayed,
    BlewUp,
    Oscillated,
    /// No admissible initial height exists for the requested sign
    /// (no zero of `G_mu`, or the slope condition fails there).
    NoSolution,
}

impl std::fmt::Display for ShootStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShootStatus::Decayed => write!(f, "decayed"),
            ShootStatus::BlewUp => write!(f, "blew-up"),
            ShootStatus::Oscillated => write!(f, "oscillated"),
            ShootStatus::NoSolution => write!(f, "no-solution"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryPoint<T: Real> {
    pub x: T,
    pub u: T,
    pub du: T,
}

#[derive(Debug, Clone)]
pub struct ShootResult<T: Real> {
    pub dim: usize,
    pub mu: T,
    /// Initial height: `u(0)`.
    pub height: T,
    pub sign: Sign,
    pub status: ShootStatus,
    pub samples: Vec<TrajectoryPoint<T>>,
    /// Action of the (reflected / radially weighted) trajectory; only
    /// present when the orbit decayed.
    pub action: Option<T>,
    pub mass: Option<T>,
    /// Max deviation of `u'²/2 + G_mu(u)` from zero; one dimension only,
    /// where the quantity is conserved.
    pub phase_energy_max_dev: Option<T>,
}

#[derive(Debug, Clone)]
pub struct ShootConfig<T: Real> {
    pub step: T,
    /// Integration domain `[0, domain_factor / sqrt(mu)]`.
    pub domain_factor: T,
    /// Decay is `min |u| + |u'| <= decay_threshold (1 + |height|)`.
    pub decay_threshold: T,
    /// Blow-up is `|u| > blowup_factor |height|`.
    pub blowup_factor: T,
    /// Refine the initial height by event bisection before the final shot.
    pub refine_height: bool,
}

impl<T: Real> Default for ShootConfig<T> {
    fn default() -> Self {
        Self {
            step: T::of(1e-3),
            domain_factor: T::of(40.0),
            decay_threshold: T::of(1e-6),
            blowup_factor: T::of(10.0),
            refine_height: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    /// `u` reached zero (overshoot).
    Crossed,
    /// `u'` turned positive while `u > 0` (undershoot).
    Turned,
    BlownUp,
    /// Integrated to the end of the domain without an event.
    Reached,
}

/// RK4 integration of the oriented system `w'' = -ghat(w) - friction`,
/// starting from `(w0, 0)`. Oriented means the caller has flipped signs
/// so that `w0 > 0`; `dim` controls the friction term.
fn integrate<T: Real>(
    ghat: &impl Fn(T) -> T,
    dim: usize,
    w0: T,
    x_max: T,
    step: T,
    blow_level: T,
    stop_on_event: bool,
) -> (Vec<TrajectoryPoint<T>>, Event) {
    let n1 = T::of_usize(dim) - T::one();
    let rhs = |x: T, w: T, v: T| -> (T, T) {
        if dim == 1 {
            (v, -ghat(w))
        } else if x <= T::of(1e-12) {
            // regular radial solutions have u''(0) = -g(u(0))/N
            (v, -ghat(w) / T::of_usize(dim))
        } else {
            (v, -ghat(w) - n1 * v / x)
        }
    };

    let steps = (x_max / step).to_usize().unwrap_or(0).max(8);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut x = T::zero();
    let mut w = w0;
    let mut v = T::zero();
    samples.push(TrajectoryPoint { x, u: w, du: v });

    let mut event = Event::Reached;
    for _ in 0..steps {
        let (k1w, k1v) = rhs(x, w, v);
        let half = step / T::of(2.0);
        let (k2w, k2v) = rhs(x + half, w + half * k1w, v + half * k1v);
        let (k3w, k3v) = rhs(x + half, w + half * k2w, v + half * k2v);
        let (k4w, k4v) = rhs(x + step, w + step * k3w, v + step * k3v);
        let six = T::of(6.0);
        w += step / six * (k1w + T::of(2.0) * (k2w + k3w) + k4w);
        v += step / six * (k1v + T::of(2.0) * (k2v + k3v) + k4v);
        x += step;
        samples.push(TrajectoryPoint { x, u: w, du: v });

        if !w.is_finite() || !v.is_finite() || w.abs() > blow_level {
            event = Event::BlownUp;
            break;
        }
        if w <= T::zero() {
            event = Event::Crossed;
            if stop_on_event {
                break;
            }
        }
        if v > T::zero() && w > T::zero() && event == Event::Reached {
            event = Event::Turned;
            if stop_on_event {
                break;
            }
        }
    }
    (samples, event)
}

/// Bisection on the turn/cross dichotomy around an initial guess for the
/// decaying height. Returns the refined height.
fn refine_height<T: Real>(
    ghat: &impl Fn(T) -> T,
    dim: usize,
    guess: T,
    x_max: T,
    step: T,
    blow_level: T,
) -> T {
    let classify = |h: T| -> Event {
        let (_, e) = integrate(ghat, dim, h, x_max, step, blow_level, true);
        e
    };
    // establish a (turned, crossed) bracket around the guess
    let mut lo = guess * (T::one() - T::of(1e-6));
    let mut hi = guess * (T::one() + T::of(1e-6));
    let mut lo_ev = classify(lo);
    let mut hi_ev = classify(hi);
    let mut tries = 0;
    while lo_ev != Event::Turned && tries < 40 {
        lo *= T::one() - T::of(1e-4) * T::of(2f64.powi(tries));
        lo_ev = classify(lo);
        tries += 1;
    }
    tries = 0;
    while hi_ev != Event::Crossed && hi_ev != Event::BlownUp && tries < 40 {
        hi *= T::one() + T::of(1e-4) * T::of(2f64.powi(tries));
        hi_ev = classify(hi);
        tries += 1;
    }
    if lo_ev != Event::Turned {
        return guess;
    }
    for _ in 0..120 {
        let mid = (lo + hi) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid) {
            Event::Turned => lo = mid,
            _ => hi = mid,
        }
    }
    (lo + hi) / T::of(2.0)
}

/// Truncate a trajectory at the point where `|u| + |u'|` is smallest
/// (the closest approach to the saddle at the origin).
fn truncate_at_closest_approach<T: Real>(samples: &mut Vec<TrajectoryPoint<T>>) -> T {
    let mut best = T::infinity();
    let mut best_idx = samples.len() - 1;
    for (i, p) in samples.iter().enumerate() {
        let d = p.u.abs() + p.du.abs();
        if d < best {
            best = d;
            best_idx = i;
        }
    }
    samples.truncate(best_idx + 1);
    best
}

/// Composite Simpson over uniformly sampled values (trapezoid fallback
/// on the last interval when the count is even).
pub(crate) fn simpson<T: Real>(step: T, values: &[T]) -> T {
    let n = values.len();
    if n < 2 {
        return T::zero();
    }
    let pairs = (n - 1) / 2;
    let mut acc = T::zero();
    for k in 0..pairs {
        let i = 2 * k;
        acc += step / T::of(3.0) * (values[i] + T::of(4.0) * values[i + 1] + values[i + 2]);
    }
    if (n - 1) % 2 == 1 {
        acc += step / T::of(2.0) * (values[n - 2] + values[n - 1]);
    }
    acc
}

fn no_solution<T: Real>(dim: usize, mu: T, sign: Sign) -> ShootResult<T> {
    ShootResult {
        dim,
        mu,
        height: T::zero(),
        sign,
        status: ShootStatus::NoSolution,
        samples: Vec::new(),
        action: None,
        mass: None,
        phase_energy_max_dev: None,
    }
}

/// Integrals of a decayed trajectory: action, mass, and for one
/// dimension the phase-energy deviation.
fn finalize<T: Real>(
    shifted: &ShiftedNonlinearity<T>,
    dim: usize,
    sign: Sign,
    mut samples: Vec<TrajectoryPoint<T>>,
    cfg: &ShootConfig<T>,
    height: T,
) -> ShootResult<T> {
    let s: T = sign.factor();
    let closest = truncate_at_closest_approach(&mut samples);
    // flip oriented samples back to the requested sign
    for p in samples.iter_mut() {
        p.u = s * p.u;
        p.du = s * p.du;
    }

    let tail_monotone = {
        let start = samples.len().saturating_sub(samples.len() / 5);
        samples[start..].windows(2).all(|w| w[1].u.abs() <= w[0].u.abs() + T::epsilon())
    };
    let decayed =
        closest <= cfg.decay_threshold * (T::one() + height.abs()) && tail_monotone;

    let status = if decayed { ShootStatus::Decayed } else { ShootStatus::Oscillated };
    let (action, mass, phase_dev) = if decayed {
        let weight = |x: T| -> T {
            if dim == 1 {
                T::of(2.0) // even reflection across the origin
            } else {
                T::of(unit_sphere_measure(dim)) * x.powi(dim as i32 - 1)
            }
        };
        let action_density: Vec<T> = samples
            .iter()
            .map(|p| weight(p.x) * (p.du.sq() / T::of(2.0) - shifted.big_g(p.u)))
            .collect();
        let mass_density: Vec<T> = samples.iter().map(|p| weight(p.x) * p.u.sq()).collect();
        let action = simpson(cfg.step, &action_density);
        let mass = simpson(cfg.step, &mass_density);
        let phase = if dim == 1 {
            let mut dev = T::zero();
            for p in &samples {
                dev = dev.max((p.du.sq() / T::of(2.0) + shifted.big_g(p.u)).abs());
            }
            Some(dev)
        } else {
            None
        };
        (Some(action), Some(mass), phase)
    } else {
        (None, None, None)
    };

    ShootResult {
        dim,
        mu: shifted.mu,
        height: s * height,
        sign,
        status,
        samples,
        action,
        mass,
        phase_energy_max_dev: phase_dev,
    }
}

/// Shoot the one-dimensional problem from the extreme zero of `G_mu` on
/// the requested side. Refuses (status `NoSolution`) when the zero does
/// not exist or carries the wrong slope sign, since no decaying solution
/// of that sign exists then.
pub fn shoot_1d<T: Real>(
    model: &NonlinearityModel<T>,
    mu: T,
    sign: Sign,
    cfg: &ShootConfig<T>,
) -> Result<ShootResult<T>, ShootError> {
    if !(mu > T::zero()) {
        return Err(ShootError::BadFrequency(mu.to_f64().unwrap_or(f64::NAN)));
    }
    if !(cfg.step > T::zero()) || !cfg.step.is_finite() {
        return Err(ShootError::BadStep);
    }
    let shifted = ShiftedNonlinearity::new(model.clone(), mu);
    let root = match shifted.find_zeta(sign) {
        Some(r) => r,
        None => return Ok(no_solution(1, mu, sign)),
    };
    // slope condition: the shifted nonlinearity must point outward at the
    // zero, otherwise the orbit through it is not homoclinic
    if !(sign.factor::<T>() * root.g_at_zeta > T::zero()) {
        return Ok(no_solution(1, mu, sign));
    }

    let s: T = sign.factor();
    let ghat = |w: T| s * shifted.g(s * w);
    let x_max = cfg.domain_factor / mu.sqrt();
    let guess = s * root.zeta; // oriented, positive
    let blow_level = cfg.blowup_factor * guess;

    let height = if cfg.refine_height {
        refine_height(&ghat, 1, guess, x_max, cfg.step, blow_level)
    } else {
        guess
    };
    let (samples, event) = integrate(&ghat, 1, height, x_max, cfg.step, blow_level, false);
    if event == Event::BlownUp {
        let mut r = no_solution(1, mu, sign);
        r.status = ShootStatus::BlewUp;
        r.height = s * height;
        r.samples = samples;
        return Ok(r);
    }
    Ok(finalize(&shifted, 1, sign, samples, cfg, height))
}

/// Shoot the one-dimensional problem from an explicit height, without
/// locating or refining the zero of `G_mu` first. Used to probe
/// neighborhoods (no decaying orbit starts away from the extreme zero).
pub fn shoot_1d_from_height<T: Real>(
    model: &NonlinearityModel<T>,
    mu: T,
    height: T,
    cfg: &ShootConfig<T>,
) -> Result<ShootResult<T>, ShootError> {
    if !(mu > T::zero()) {
        return Err(ShootError::BadFrequency(mu.to_f64().unwrap_or(f64::NAN)));
    }
    if height == T::zero() {
        return Err(ShootError::ZeroHeight);
    }
    let shifted = ShiftedNonlinearity::new(model.clone(), mu);
    let sign = if height > T::zero() { Sign::Plus } else { Sign::Minus };
    let s: T = sign.factor();
    let ghat = |w: T| s * shifted.g(s * w);
    let oriented = s * height;
    let x_max = cfg.domain_factor / mu.sqrt();
    let blow_level = cfg.blowup_factor * oriented;
    let (samples, event) = integrate(&ghat, 1, oriented, x_max, cfg.step, blow_level, false);
    if event == Event::BlownUp {
        let mut r = no_solution(1, mu, sign);
        r.status = ShootStatus::BlewUp;
        r.height = height;
        r.samples = samples
            .into_iter()
            .map(|p| TrajectoryPoint { x: p.x, u: s * p.u, du: s * p.du })
            .collect();
        return Ok(r);
    }
    Ok(finalize(&shifted, 1, sign, samples, cfg, oriented))
}

/// Shoot the radial problem in dimension `dim >= 2` from the height `b`.
pub fn shoot_radial<T: Real>(
    model: &NonlinearityModel<T>,
    dim: usize,
    mu: T,
    b: T,
    cfg: &ShootConfig<T>,
) -> Result<ShootResult<T>, ShootError> {
    assert!(dim >= 2, "use shoot_1d in one dimension");
    if !(mu > T::zero()) {
        return Err(ShootError::BadFrequency(mu.to_f64().unwrap_or(f64::NAN)));
    }
    if b == T::zero() {
        return Err(ShootError::ZeroHeight);
    }
    let shifted = ShiftedNonlinearity::new(model.clone(), mu);
    let sign = if b > T::zero() { Sign::Plus } else { Sign::Minus };
    let s: T = sign.factor();
    let ghat = |w: T| s * shifted.g(s * w);
    let x_max = cfg.domain_factor / mu.sqrt();
    let height = s * b;
    let blow_level = cfg.blowup_factor * height;

    let (samples, event) = integrate(&ghat, dim, height, x_max, cfg.step, blow_level, false);
    if event == Event::BlownUp {
        let mut r = no_solution(dim, mu, sign);
        r.status = ShootStatus::BlewUp;
        r.height = b;
        r.samples = samples
            .into_iter()
            .map(|p| TrajectoryPoint { x: p.x, u: s * p.u, du: s * p.du })
            .collect();
        return Ok(r);
    }
    Ok(finalize(&shifted, dim, sign, samples, cfg, height))
}

/// Ground-state height for the radial problem on one side: bisection on
/// the first-crossing dichotomy starting just above the zero of `G_mu`.
fn radial_ground_height<T: Real>(
    shifted: &ShiftedNonlinearity<T>,
    dim: usize,
    sign: Sign,
    cfg: &ShootConfig<T>,
) -> Result<Option<T>, ShootError> {
    let root = match shifted.find_zeta(sign) {
        Some(r) => r,
        None => return Ok(None),
    };
    if !(sign.factor::<T>() * root.g_at_zeta > T::zero()) {
        return Ok(None);
    }
    let s: T = sign.factor();
    let ghat = |w: T| s * shifted.g(s * w);
    let x_max = cfg.domain_factor / shifted.mu.sqrt();
    let zeta = s * root.zeta;

    let classify = |h: T| -> Event {
        let (_, e) =
            integrate(&ghat, dim, h, x_max, cfg.step, cfg.blowup_factor * h, true);
        e
    };
    let mut lo = zeta * T::of(1.02);
    if classify(lo) == Event::Crossed {
        return Ok(Some(s * lo));
    }
    let mut hi = lo;
    let mut grew = 0;
    loop {
        hi *= T::of(1.3);
        match classify(hi) {
            Event::Crossed => break,
            _ => {
                lo = hi;
                grew += 1;
                if grew > 60 {
                    return Err(ShootError::NoCrossingBracket(hi.to_f64().unwrap_or(f64::NAN)));
                }
            }
        }
    }
    for _ in 0..120 {
        let mid = (lo + hi) / T::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid) {
            Event::Crossed => hi = mid,
            _ => lo = mid,
        }
    }
    Ok(Some(s * (lo + hi) / T::of(2.0)))
}

/// Outcome of the least-action search.
#[derive(Debug, Clone)]
pub enum LeastActionOutcome<T: Real> {
    Found(LeastAction<T>),
    /// No decaying solution exists (or none was found) at this frequency.
    NoSolution { reason: String },
}

#[derive(Debug, Clone)]
pub struct LeastAction<T: Real> {
    pub action: T,
    pub witness: ShootResult<T>,
    /// For `dim >= 2` shooting enumerates radial monotone solutions only,
    /// so the value bounds the least action from above.
    pub upper_bound_only: bool,
}

/// Search for the least-action solution at frequency `mu`.
///
/// One dimension evaluates both signs (the classification gives exactly
/// one decaying solution per admissible sign) and keeps the smaller
/// action. Higher dimensions bisect the initial height to the positive
/// radial ground state, and also the negative one when the model is not
/// odd; the result is flagged as an upper bound.
pub fn least_action<T: Real>(
    model: &NonlinearityModel<T>,
    dim: usize,
    mu: T,
    cfg: &ShootConfig<T>,
) -> Result<LeastActionOutcome<T>, ShootError> {
    let mut best: Option<LeastAction<T>> = None;
    let signs: &[Sign] = if dim >= 2 && model.is_odd() {
        // odd models: the negative solution mirrors the positive one
        &[Sign::Plus]
    } else {
        &[Sign::Plus, Sign::Minus]
    };

    for &sign in signs {
        let witness = if dim == 1 {
            shoot_1d(model, mu, sign, cfg)?
        } else {
            let shifted = ShiftedNonlinearity::new(model.clone(), mu);
            match radial_ground_height(&shifted, dim, sign, cfg)? {
                None => no_solution(dim, mu, sign),
                Some(b) => shoot_radial(model, dim, mu, b, cfg)?,
            }
        };
        if witness.status == ShootStatus::Decayed {
            let action = witness.action.expect("decayed trajectories carry an action");
            let replace = match &best {
                None => true,
                Some(b) => action < b.action,
            };
            if replace {
                best = Some(LeastAction { action, witness, upper_bound_only: dim >= 2 });
            }
        }
    }
    Ok(match best {
        Some(la) => LeastActionOutcome::Found(la),
        None => LeastActionOutcome::NoSolution {
            reason: "no decaying trajectory for any admissible sign".into(),
        },
    })
}

impl<T: Real> ShootResult<T> {
    /// Action report of the trajectory at its own frequency (quadrature
    /// over the samples, consistent with the action/mass fields).
    pub fn action_report(&self, model: &NonlinearityModel<T>) -> ActionReport<T> {
        let shifted = ShiftedNonlinearity::new(model.clone(), self.mu);
        let step = if self.samples.len() >= 2 {
            self.samples[1].x - self.samples[0].x
        } else {
            T::one()
        };
        let weight = |x: T| -> T {
            if self.dim == 1 {
                T::of(2.0)
            } else {
                T::of(unit_sphere_measure(self.dim)) * x.powi(self.dim as i32 - 1)
            }
        };
        let grad: Vec<T> = self.samples.iter().map(|p| weight(p.x) * p.du.sq()).collect();
        let big_g: Vec<T> =
            self.samples.iter().map(|p| weight(p.x) * shifted.big_g(p.u)).collect();
        let pair: Vec<T> =
            self.samples.iter().map(|p| weight(p.x) * shifted.g(p.u) * p.u).collect();
        let grad = simpson(step, &grad);
        let big_g_int = simpson(step, &big_g);
        let pair = simpson(step, &pair);
        let action = grad / T::of(2.0) - big_g_int;
        let n = T::of_usize(self.dim);
        let coeff = (n - T::of(2.0)) / (T::of(2.0) * n);
        ActionReport {
            action,
            pohozaev: coeff * grad - big_g_int,
            nehari: grad - pair,
            mu: self.mu,
        }
    }

    /// Resample the trajectory onto a radial grid (for cross-solver
    /// comparisons against minimizer profiles).
    pub fn to_profile(&self, grid: &RadialGrid<T>) -> RadialProfile<T> {
        let step = if self.samples.len() >= 2 {
            self.samples[1].x - self.samples[0].x
        } else {
            T::one()
        };
        let samples = &self.samples;
        RadialProfile::from_fn(grid.clone(), |r| {
            let idx = (r / step).floor().to_usize().unwrap_or(usize::MAX);
            if idx + 1 >= samples.len() {
                return T::zero();
            }
            let frac = r / step - T::of_usize(idx);
            samples[idx].u * (T::one() - frac) + samples[idx + 1].u * frac
        })
    }
}
