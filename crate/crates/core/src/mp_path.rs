//! Explicit mountain-pass paths through a solution of the free problem,
//! and the checks on their endpoints, maximum, separation and mass.
//!
//! Three constructions, one per dimension regime, all built from a
//! certified solution `w` of `-Δw = g_mu(w)`:
//!
//! * `dim >= 3`: the dilation path `γ(t) = w(·/t)`, whose action is the
//!   closed formula `J(γ(t)) = (t^{N-2} - (N-2)/N t^N)/2 · ‖∇w‖²` when
//!   `w` satisfies its Pohozaev identity. The path is evaluated both by
//!   that formula and by the scaling laws applied to independently
//!   quadratured integrals; disagreement is exactly a Pohozaev residual,
//!   so a mismatch rejects the witness.
//! * `dim == 1`: the plateau continuation. The negative solution is
//!   extended below its minimum by a quartic cap and a constant tail,
//!   and slid along the axis: `γ(t) = W(|·| - ln t)`. The cap margin is
//!   found by verified search on the strict inequality
//!   `8x⁶ - G_mu(ζ₋ - x⁴) < 0`, which holds near 0 because
//!   `G_mu(ζ₋) = 0` with `g_mu(ζ₋) < 0`.
//! * `dim == 2`: the two-parameter family `Ψ(θ, s) = J_mu(θ w(·/s))`,
//!   followed along a seven-segment rectilinear curve through `(1, 1)`.
//!   The segment margins come from sign scans of `Ψ_θ` and of
//!   `d/dθ ∫G_mu(θw)`, anchored at the Nehari and Pohozaev identities.

use thiserror::Error;

use crate::nonlinearity::{NonlinearityModel, ShiftedNonlinearity};
use crate::scalar::Real;
use crate::shooting::{simpson, ShootResult, ShootStatus};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("witness trajectory did not decay; cannot build a path")]
    WitnessNotDecayed,
    #[error("dilation path needs dimension >= 3, got {0}")]
    NeedsHigherDimension(usize),
    #[error("plateau path needs a one-dimensional negative-side witness")]
    NeedsNegativeWitness,
    #[error("two-parameter path needs a two-dimensional witness")]
    NeedsPlanarWitness,
    #[error("formula/quadrature mismatch {mismatch:.3e} at t = {t}; the witness fails its dilation identity")]
    FormulaQuadratureMismatch { t: f64, mismatch: f64 },
    #[error("no cap margin down to {floor:.1e} satisfies the strict inequality; the witness slope condition failed upstream")]
    CapSearchFailed { floor: f64 },
    #[error("witness violates the {identity} identity (relative residual {residual:.3e})")]
    IdentityResidual { identity: &'static str, residual: f64 },
    #[error("sign scan failed to bracket the {what} margin")]
    SignScanFailed { what: &'static str },
}

/// One point of a path: parameter, mass, action, and L² distance to the
/// witness solution.
#[derive(Debug, Clone, Copy)]
pub struct PathSample<T: Real> {
    pub t: T,
    pub mass: T,
    pub action: T,
    pub dist_l2: T,
}

/// A sampled path with the index of the sample that passes through the
/// witness solution.
#[derive(Debug, Clone)]
pub struct PathData<T: Real> {
    pub samples: Vec<PathSample<T>>,
    pub witness_index: usize,
    pub t_end: T,
    pub witness_action: T,
}

/// Decimated radial samples of a witness with its certified integrals.
#[derive(Debug, Clone)]
pub struct WitnessData<T: Real> {
    pub dim: usize,
    pub mu: T,
    /// `∫|∇w|²` (un-halved).
    pub kinetic: T,
    /// `∫ G_mu(w)`.
    pub big_g: T,
    /// `∫ g_mu(w) w`.
    pub nehari_pair: T,
    pub mass: T,
    pub action: T,
    /// `(r, w(r))` at the decimated resolution `step`.
    pub radial: Vec<(T, T)>,
    pub step: T,
}

fn weight<T: Real>(dim: usize, r: T) -> T {
    if dim == 1 {
        T::of(2.0)
    } else {
        T::of(crate::radial::unit_sphere_measure(dim)) * r.powi(dim as i32 - 1)
    }
}

fn trapezoid<T: Real>(step: T, values: &[T]) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let mut acc = (values[0] + values[values.len() - 1]) / T::of(2.0);
    for v in &values[1..values.len() - 1] {
        acc += *v;
    }
    acc * step
}

impl<T: Real> WitnessData<T> {
    /// Extract integrals and decimated samples from a decayed shot.
    /// `decimate` keeps every k-th trajectory point (the paths only need
    /// moderate resolution for their scans and cross terms).
    pub fn from_shoot(
        model: &NonlinearityModel<T>,
        shot: &ShootResult<T>,
        decimate: usize,
    ) -> Result<Self, PathError> {
        if shot.status != ShootStatus::Decayed {
            return Err(PathError::WitnessNotDecayed);
        }
        let d = decimate.max(1);
        let raw_step = shot.samples[1].x - shot.samples[0].x;
        let step = raw_step * T::of_usize(d);
        let radial: Vec<(T, T)> =
            shot.samples.iter().step_by(d).map(|p| (p.x, p.u)).collect();
        let slopes: Vec<T> = shot.samples.iter().step_by(d).map(|p| p.du).collect();

        let shifted = ShiftedNonlinearity::new(model.clone(), shot.mu);
        let dim = shot.dim;
        let kinetic = simpson(
            step,
            &radial
                .iter()
                .zip(&slopes)
                .map(|(&(r, _), &du)| weight(dim, r) * du.sq())
                .collect::<Vec<_>>(),
        );
        let big_g = simpson(
            step,
            &radial.iter().map(|&(r, u)| weight(dim, r) * shifted.big_g(u)).collect::<Vec<_>>(),
        );
        let nehari_pair = simpson(
            step,
            &radial.iter().map(|&(r, u)| weight(dim, r) * shifted.g(u) * u).collect::<Vec<_>>(),
        );
        let mass = simpson(
            step,
            &radial.iter().map(|&(r, u)| weight(dim, r) * u.sq()).collect::<Vec<_>>(),
        );
        let action = kinetic / T::of(2.0) - big_g;
        Ok(Self { dim, mu: shot.mu, kinetic, big_g, nehari_pair, mass, action, radial, step })
    }

    /// Linear interpolation of the stored samples (zero past the end).
    pub fn eval(&self, r: T) -> T {
        if r < T::zero() {
            return self.eval(-r);
        }
        let x = r / self.step;
        let i = x.floor().to_usize().unwrap_or(usize::MAX);
        if i + 1 >= self.radial.len() {
            return T::zero();
        }
        let frac = x - T::of_usize(i);
        self.radial[i].1 * (T::one() - frac) + self.radial[i + 1].1 * frac
    }

    /// `∫ w(r/t) w(r) dx` over ℝᴺ by quadrature.
    fn dilation_cross(&self, t: T) -> T {
        let vals: Vec<T> = self
            .radial
            .iter()
            .map(|&(r, u)| weight(self.dim, r) * u * self.eval(r / t))
            .collect();
        trapezoid(self.step, &vals)
    }

    pub fn pohozaev_relative(&self) -> T {
        let n = T::of_usize(self.dim);
        let coeff = (n - T::of(2.0)) / (T::of(2.0) * n);
        (coeff * self.kinetic - self.big_g).abs() / (T::one() + self.action.abs())
    }

    pub fn nehari_relative(&self) -> T {
        (self.kinetic - self.nehari_pair).abs() / (T::one() + self.action.abs())
    }
}

/// Dilation path for `dim >= 3`, evaluated by the closed formula and by
/// scaling-law quadrature; the two must agree to `mismatch_tol` relative
/// at every sample, which is how a non-solution witness is rejected.
pub fn dilation_path<T: Real>(
    witness: &WitnessData<T>,
    samples: usize,
    mass_target: T,
    mismatch_tol: T,
) -> Result<PathData<T>, PathError> {
    let n = witness.dim;
    if n < 3 {
        return Err(PathError::NeedsHigherDimension(n));
    }
    let k = witness.kinetic;
    let nf = T::of_usize(n);
    let formula = |t: T| -> T {
        (t.powi(n as i32 - 2) - (nf - T::of(2.0)) / nf * t.powi(n as i32)) / T::of(2.0) * k
    };
    let quadrature = |t: T| -> T {
        t.powi(n as i32 - 2) / T::of(2.0) * k - t.powi(n as i32) * witness.big_g
    };

    let mut t_end = T::of(1.5);
    while !(formula(t_end) < -T::one()
        && t_end.powi(n as i32) * witness.mass > mass_target)
    {
        t_end *= T::of(1.1);
        if t_end > T::of(1e6) {
            break;
        }
    }

    let count = samples.max(16);
    let mut ts: Vec<T> = (0..=count).map(|i| t_end * T::of_usize(i) / T::of_usize(count)).collect();
    // the witness parameter must be a sample
    ts.push(T::one());
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-14));

    let mut out = Vec::with_capacity(ts.len());
    let mut witness_index = 0;
    for (i, &t) in ts.iter().enumerate() {
        let jf = formula(t);
        let jq = quadrature(t);
        let mismatch = (jf - jq).abs() / (T::one() + jf.abs());
        if mismatch > mismatch_tol {
            return Err(PathError::FormulaQuadratureMismatch {
                t: t.to_f64().unwrap_or(f64::NAN),
                mismatch: mismatch.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mass = t.powi(n as i32) * witness.mass;
        let dist_sq = if t == T::zero() {
            witness.mass
        } else {
            (mass + witness.mass - T::of(2.0) * witness.dilation_cross(t)).max(T::zero())
        };
        if (t - T::one()).abs() < T::of(1e-14) {
            witness_index = i;
        }
        out.push(PathSample { t, mass, action: jq, dist_l2: dist_sq.sqrt() });
    }
    Ok(PathData { samples: out, witness_index, t_end, witness_action: witness.action })
}

/// Plateau continuation in one dimension. `witness` must be the
/// negative-side decayed shot, so that the construction extends it below
/// its minimum `ζ₋`.
pub struct PlateauPath<T: Real> {
    pub path: PathData<T>,
    /// Verified cap margin.
    pub epsilon: T,
}

pub fn plateau_path_1d<T: Real>(
    model: &NonlinearityModel<T>,
    witness: &ShootResult<T>,
    samples: usize,
    mass_target: T,
) -> Result<PlateauPath<T>, PathError> {
    if witness.dim != 1 || witness.height >= T::zero() {
        return Err(PathError::NeedsNegativeWitness);
    }
    if witness.status != ShootStatus::Decayed {
        return Err(PathError::WitnessNotDecayed);
    }
    let shifted = ShiftedNonlinearity::new(model.clone(), witness.mu);
    let zeta = witness.height;

    // cap margin: halve until 8x⁶ - G(ζ₋ - x⁴) < 0 on a fine grid in
    // [-eps, 0); the inequality holds near 0 since G(ζ₋ - x⁴) ≈ |g(ζ₋)| x⁴
    let mut eps = T::of(0.5);
    let floor = T::of(1e-4);
    'search: loop {
        let pts = 2000;
        for i in 1..=pts {
            let x = -eps * T::of_usize(i) / T::of_usize(pts);
            let lhs = T::of(8.0) * x.powi(6) - shifted.big_g(zeta - x.powi(4));
            if !(lhs < T::zero()) {
                eps /= T::of(2.0);
                if eps < floor {
                    return Err(PathError::CapSearchFailed {
                        floor: floor.to_f64().unwrap_or(f64::NAN),
                    });
                }
                continue 'search;
            }
        }
        break;
    }

    // prefix integrals over the trajectory: action density ½w'² - G(w)
    // and mass density w², cumulative from 0
    let step = witness.samples[1].x - witness.samples[0].x;
    let mut cum_action = Vec::with_capacity(witness.samples.len());
    let mut cum_mass = Vec::with_capacity(witness.samples.len());
    let mut acc_a = T::zero();
    let mut acc_m = T::zero();
    let dens_a =
        |u: T, du: T| -> T { du.sq() / T::of(2.0) - shifted.big_g(u) };
    cum_action.push(T::zero());
    cum_mass.push(T::zero());
    for w in witness.samples.windows(2) {
        acc_a += step / T::of(2.0) * (dens_a(w[0].u, w[0].du) + dens_a(w[1].u, w[1].du));
        acc_m += step / T::of(2.0) * (w[0].u.sq() + w[1].u.sq());
        cum_action.push(acc_a);
        cum_mass.push(acc_m);
    }
    let x_end = witness.samples.last().unwrap().x;
    let interp = |cum: &[T], x: T| -> T {
        let x = x.max(T::zero()).min(x_end);
        let idx = (x / step).floor().to_usize().unwrap_or(0).min(cum.len() - 2);
        let frac = x / step - T::of_usize(idx);
        cum[idx] * (T::one() - frac) + cum[idx + 1] * frac
    };
    let j_w = T::of(2.0) * acc_a;
    let m_w = T::of(2.0) * acc_m;

    // plateau-side prefix integrals on [-eps, 0]
    let cap_pts = 4000usize;
    let cap_h = eps / T::of_usize(cap_pts);
    let mut cap_action = vec![T::zero()];
    let mut cap_mass = vec![T::zero()];
    let mut ca = T::zero();
    let mut cm = T::zero();
    let cap_dens_a = |x: T| T::of(8.0) * x.powi(6) - shifted.big_g(zeta - x.powi(4));
    let cap_dens_m = |x: T| (zeta - x.powi(4)).sq();
    for i in 0..cap_pts {
        let x0 = -cap_h * T::of_usize(i);
        let x1 = -cap_h * T::of_usize(i + 1);
        ca += cap_h / T::of(2.0) * (cap_dens_a(x0) + cap_dens_a(x1));
        cm += cap_h / T::of(2.0) * (cap_dens_m(x0) + cap_dens_m(x1));
        cap_action.push(ca);
        cap_mass.push(cm);
    }
    let cap_interp = |cum: &[T], depth: T| -> T {
        // depth in [0, eps]
        let d = depth.max(T::zero()).min(eps);
        let idx = (d / cap_h).floor().to_usize().unwrap_or(0).min(cum.len() - 2);
        let frac = d / cap_h - T::of_usize(idx);
        cum[idx] * (T::one() - frac) + cum[idx + 1] * frac
    };
    let tail_a = -shifted.big_g(zeta - eps.powi(4)); // density past the cap
    let tail_m = (zeta - eps.powi(4)).sq();

    // action and mass as functions of tau = ln t
    let j_of = |tau: T| -> T {
        if tau <= T::zero() {
            j_w - T::of(2.0) * interp(&cum_action, -tau)
        } else {
            let cap = cap_interp(&cap_action, tau.min(eps));
            let tail = if tau > eps { (tau - eps) * tail_a } else { T::zero() };
            j_w + T::of(2.0) * (cap + tail)
        }
    };
    let m_of = |tau: T| -> T {
        if tau <= T::zero() {
            m_w - T::of(2.0) * interp(&cum_mass, -tau)
        } else {
            let cap = cap_interp(&cap_mass, tau.min(eps));
            let tail = if tau > eps { (tau - eps) * tail_m } else { T::zero() };
            m_w + T::of(2.0) * (cap + tail)
        }
    };

    // choose the end of the path
    let mut tau_end = eps + T::one();
    while !(j_of(tau_end) < -T::one() && m_of(tau_end) > mass_target) {
        tau_end *= T::of(1.3);
        if tau_end > T::of(1e6) {
            break;
        }
    }

    // L² distance to w by direct quadrature of the slid profile
    let w_eval = |x: T| -> T {
        if x > x_end {
            return T::zero();
        }
        let idx = (x / step).floor().to_usize().unwrap_or(0).min(witness.samples.len() - 2);
        let frac = x / step - T::of_usize(idx);
        witness.samples[idx].u * (T::one() - frac) + witness.samples[idx + 1].u * frac
    };
    let cap_eval = |y: T| -> T {
        // W on [-eps, 0): ζ₋ - y⁴; below: constant
        if y >= -eps {
            zeta - y.powi(4)
        } else {
            zeta - eps.powi(4)
        }
    };
    let big_w = |y: T| -> T { if y >= T::zero() { w_eval(y) } else { cap_eval(y) } };
    let dist_of = |tau: T| -> T {
        let upper = x_end + tau.max(T::zero()) + T::one();
        let n_pts = 4000usize;
        let h = upper / T::of_usize(n_pts);
        let vals: Vec<T> = (0..=n_pts)
            .map(|i| {
                let x = h * T::of_usize(i);
                (big_w(x - tau) - w_eval(x)).sq()
            })
            .collect();
        (T::of(2.0) * trapezoid(h, &vals)).sqrt()
    };

    // samples uniform in tau, with tau = 0 (the witness) inserted
    // deeper slides remove tail mass below f64 resolution and break the
    // strict-mass-increase sampling; half the trajectory is plenty for the
    // start of the path to sit at zero within tolerance
    let tau_min = -x_end * T::of(0.5);
    let count = samples.max(16);
    let mut taus: Vec<T> =
        (0..=count).map(|i| tau_min + (tau_end - tau_min) * T::of_usize(i) / T::of_usize(count)).collect();
    taus.push(T::zero());
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-14));

    let mut out = Vec::with_capacity(taus.len() + 1);
    // exact start of the path
    out.push(PathSample { t: T::zero(), mass: T::zero(), action: T::zero(), dist_l2: m_w.sqrt() });
    let mut witness_index = 0;
    for &tau in &taus {
        let t = tau.exp();
        if tau == T::zero() {
            witness_index = out.len();
        }
        out.push(PathSample { t, mass: m_of(tau), action: j_of(tau), dist_l2: dist_of(tau) });
    }
    Ok(PlateauPath {
        path: PathData {
            samples: out,
            witness_index,
            t_end: tau_end.exp(),
            witness_action: j_w,
        },
        epsilon: eps,
    })
}

/// Parameters of the planar two-parameter construction.
#[derive(Debug, Clone, Copy)]
pub struct Path2DParams<T: Real> {
    pub theta1: T,
    pub theta2: T,
    pub theta_star: T,
    pub eps: T,
    pub s_star: T,
    pub vartheta_lo: T,
    pub vartheta_hi: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentTrend {
    Increasing,
    Constant,
    Decreasing,
}

pub struct Path2D<T: Real> {
    pub path: PathData<T>,
    pub params: Path2DParams<T>,
    /// Observed action trend per segment; the construction expects
    /// `[Inc, Inc, Inc, Const, Const, Dec, Dec]`.
    pub trends: Vec<SegmentTrend>,
}

pub fn expected_trends() -> [SegmentTrend; 7] {
    use SegmentTrend::*;
    [Increasing, Increasing, Increasing, Constant, Constant, Decreasing, Decreasing]
}

pub fn two_param_path_2d<T: Real>(
    model: &NonlinearityModel<T>,
    witness: &ShootResult<T>,
    samples_per_segment: usize,
    delta: T,
    mass_target: T,
) -> Result<Path2D<T>, PathError> {
    if witness.dim != 2 {
        return Err(PathError::NeedsPlanarWitness);
    }
    let data = WitnessData::from_shoot(model, witness, 4)?;
    let shifted = ShiftedNonlinearity::new(model.clone(), witness.mu);
    let identity_tol = T::of(1e-4);
    if data.pohozaev_relative() > identity_tol {
        return Err(PathError::IdentityResidual {
            identity: "Pohozaev",
            residual: data.pohozaev_relative().to_f64().unwrap_or(f64::NAN),
        });
    }
    if data.nehari_relative() > identity_tol {
        return Err(PathError::IdentityResidual {
            identity: "Nehari",
            residual: data.nehari_relative().to_f64().unwrap_or(f64::NAN),
        });
    }

    let k = data.kinetic;
    let m_w = data.mass;
    // P(θ) = ∫G(θw), Q(θ) = ∫g(θw)w, ρ(θ) = ∫h(θw)w² with h = g(t)/t
    let big_p = |theta: T| -> T {
        simpson(
            data.step,
            &data
                .radial
                .iter()
                .map(|&(r, u)| weight(2, r) * shifted.big_g(theta * u))
                .collect::<Vec<_>>(),
        )
    };
    let q_pair = |theta: T| -> T {
        simpson(
            data.step,
            &data
                .radial
                .iter()
                .map(|&(r, u)| weight(2, r) * shifted.g(theta * u) * u)
                .collect::<Vec<_>>(),
        )
    };
    let rho = |theta: T| -> T {
        simpson(
            data.step,
            &data
                .radial
                .iter()
                .map(|&(r, u)| {
                    let t = theta * u;
                    let h = if t == T::zero() { -shifted.mu } else { shifted.g(t) / t };
                    weight(2, r) * h * u.sq()
                })
                .collect::<Vec<_>>(),
        )
    };
    let psi = |theta: T, s: T| -> T { theta.sq() / T::of(2.0) * k - s.sq() * big_p(theta) };
    let psi_theta = |theta: T, s: T| -> T { theta * k - s.sq() * q_pair(theta) };

    // θ margin on which dP/dθ = Q stays positive (largest dyadic)
    let scan = 33usize;
    let mut d_theta = T::of(0.5);
    let theta_margin = loop {
        let ok = (0..=scan).all(|i| {
            let theta = T::one() - d_theta + T::of(2.0) * d_theta * T::of_usize(i) / T::of_usize(scan);
            q_pair(theta) > T::zero()
        });
        if ok {
            break d_theta;
        }
        d_theta /= T::of(2.0);
        if d_theta < T::of(1e-6) {
            return Err(PathError::SignScanFailed { what: "dP/dθ > 0" });
        }
    };
    let theta1 = T::one() - theta_margin;
    let theta2 = T::one() + theta_margin;
    // P sign pattern on the bracket
    for i in 0..=scan {
        let theta = theta1 + (theta2 - theta1) * T::of_usize(i) / T::of_usize(scan);
        let p = big_p(theta);
        let slack = identity_tol * (T::one() + data.action.abs());
        let ok = if theta < T::one() - T::of(1e-9) {
            p < slack
        } else if theta > T::one() + T::of(1e-9) {
            p > -slack
        } else {
            p.abs() <= slack
        };
        if !ok {
            return Err(PathError::SignScanFailed { what: "sign pattern of ∫G(θw)" });
        }
    }

    // s* from Ψ_θ = θ (K - s² ρ(θ)) > 0 on (0, 1] × (0, s*]
    let mut rho_max = T::zero();
    for i in 1..=scan {
        let theta = T::of_usize(i) / T::of_usize(scan);
        rho_max = rho_max.max(rho(theta));
    }
    let mut s_star = if rho_max > T::zero() {
        (k / rho_max).sqrt() / T::of(2.0)
    } else {
        T::of(0.5)
    };
    'verify: loop {
        for i in 1..=scan {
            let theta = T::of_usize(i) / T::of_usize(scan);
            for j in 1..=8 {
                let s = s_star * T::of_usize(j) / T::of(8.0);
                if !(psi_theta(theta, s) > T::zero()) {
                    s_star /= T::of(2.0);
                    if s_star < T::of(1e-6) {
                        return Err(PathError::SignScanFailed { what: "s* window" });
                    }
                    continue 'verify;
                }
            }
        }
        break;
    }

    // dilation margin: ‖w(·/s) - w‖ < δ on [1-ε, 1+ε], and 1-ε > s*
    let cross_s = |s: T| -> T {
        simpson(
            data.step,
            &data
                .radial
                .iter()
                .map(|&(r, u)| weight(2, r) * u * data.eval(r / s))
                .collect::<Vec<_>>(),
        )
    };
    let dist_s = |s: T| -> T {
        (s.sq() * m_w + m_w - T::of(2.0) * cross_s(s)).max(T::zero()).sqrt()
    };
    let mut eps = ((T::one() - s_star) / T::of(2.0)).min(T::of(0.25));
    while dist_s(T::one() - eps) >= delta || dist_s(T::one() + eps) >= delta {
        eps /= T::of(2.0);
        if eps < T::of(1e-6) {
            return Err(PathError::SignScanFailed { what: "dilation margin" });
        }
    }

    // ϑ margins: sign-definiteness of Ψ_θ near θ = 1 at s = 1 ∓ ε
    let vartheta_at = |s: T, positive: bool| -> Option<T> {
        let mut v = T::of(0.5);
        loop {
            let ok = (0..=scan).all(|i| {
                let theta = T::one() - v + T::of(2.0) * v * T::of_usize(i) / T::of_usize(scan);
                let val = psi_theta(theta, s);
                if positive {
                    val > T::zero()
                } else {
                    val < T::zero()
                }
            });
            if ok {
                return Some(v);
            }
            v /= T::of(2.0);
            if v < T::of(1e-6) {
                return None;
            }
        }
    };
    let vartheta_lo = vartheta_at(T::one() - eps, true)
        .ok_or(PathError::SignScanFailed { what: "ϑ at s = 1-ε" })?;
    let vartheta_hi = vartheta_at(T::one() + eps, false)
        .ok_or(PathError::SignScanFailed { what: "ϑ at s = 1+ε" })?;

    let theta_star = (T::one() - theta1)
        .min(theta2 - T::one())
        .min(vartheta_lo)
        .min(vartheta_hi);

    // end of the last segment: grow s until the action is low and the
    // mass is past the target
    let theta_hi = T::one() + theta_star;
    let mut s_end = (T::one() + eps) * T::of(1.5);
    while !(psi(theta_hi, s_end) < -T::one() && theta_hi.sq() * s_end.sq() * m_w > mass_target) {
        s_end *= T::of(1.2);
        if s_end > T::of(1e6) {
            break;
        }
    }

    // seven rectilinear segments through (θ, s) = (1, 1)
    let nodes = [
        (T::zero(), s_star),
        (T::one() - theta_star, s_star),
        (T::one() - theta_star, T::one() - eps),
        (T::one(), T::one() - eps),
        (T::one(), T::one()),
        (T::one(), T::one() + eps),
        (T::one() + theta_star, T::one() + eps),
        (theta_hi, s_end),
    ];

    let per = samples_per_segment.max(4);
    let mut out = Vec::new();
    let mut witness_index = 0;
    let mut trends = Vec::with_capacity(7);
    for seg in 0..7 {
        let (t0, s0) = nodes[seg];
        let (t1, s1) = nodes[seg + 1];
        let mut seg_actions = Vec::with_capacity(per + 1);
        for i in 0..=per {
            // segment endpoints are shared; skip the duplicate start
            if seg > 0 && i == 0 {
                continue;
            }
            let frac = T::of_usize(i) / T::of_usize(per);
            let theta = t0 + (t1 - t0) * frac;
            let s = s0 + (s1 - s0) * frac;
            let t = T::of_usize(seg) + frac;
            let action = psi(theta, s);
            let mass = theta.sq() * s.sq() * m_w;
            let dist_sq = theta.sq() * s.sq() * m_w + m_w - T::of(2.0) * theta * cross_s(s);
            if seg == 4 && i == 0 {
                witness_index = out.len();
            }
            if (theta - T::one()).abs() < T::of(1e-14) && (s - T::one()).abs() < T::of(1e-14) {
                witness_index = out.len();
            }
            out.push(PathSample { t, mass, action, dist_l2: dist_sq.max(T::zero()).sqrt() });
            seg_actions.push(action);
        }
        let first = seg_actions[0];
        let last = *seg_actions.last().unwrap();
        let span = (last - first).abs();
        // on the θ = 1 segments the action varies by exactly the measured
        // Pohozaev residual times the s² increment; treat that as flat
        let residual_scale = big_p(T::one()).abs() * T::of(4.0);
        let scale = T::of(1e-9) * (T::one() + data.action.abs()) + residual_scale;
        let trend = if span <= scale {
            SegmentTrend::Constant
        } else if seg_actions.windows(2).all(|w| w[1] >= w[0] - scale) {
            SegmentTrend::Increasing
        } else if seg_actions.windows(2).all(|w| w[1] <= w[0] + scale) {
            SegmentTrend::Decreasing
        } else {
            SegmentTrend::Constant
        };
        trends.push(trend);
    }

    Ok(Path2D {
        path: PathData {
            samples: out,
            witness_index,
            t_end: T::of(7.0),
            witness_action: psi(T::one(), T::one()),
        },
        params: Path2DParams {
            theta1,
            theta2,
            theta_star,
            eps,
            s_star,
            vartheta_lo,
            vartheta_hi,
        },
        trends,
    })
}

/// Report of the path checks: endpoints and maximum, separation, and
/// strict mass growth up to the target.
#[derive(Debug, Clone)]
pub struct PathCheck {
    pub starts_at_zero: bool,
    pub ends_below_minus_one: bool,
    pub max_matches_witness: bool,
    /// Only meaningful for paths with a unique action maximum.
    pub max_at_witness_sample: bool,
    pub delta_separation: bool,
    pub mass_strictly_increasing: bool,
    pub mass_exceeds_target: bool,
    pub reasons: Vec<String>,
}

impl PathCheck {
    pub fn pass(&self, expect_unique_max: bool) -> bool {
        self.starts_at_zero
            && self.ends_below_minus_one
            && self.max_matches_witness
            && (!expect_unique_max || self.max_at_witness_sample)
            && self.delta_separation
            && self.mass_strictly_increasing
            && self.mass_exceeds_target
    }
}

pub fn check_path<T: Real>(
    data: &PathData<T>,
    delta: T,
    mass_target: T,
    tol: T,
) -> PathCheck {
    let mut reasons = Vec::new();
    let first = &data.samples[0];
    let last = data.samples.last().unwrap();

    let starts_at_zero = first.mass.abs() <= tol && first.action.abs() <= tol;
    if !starts_at_zero {
        reasons.push(format!(
            "path start has mass {:.3e}, action {:.3e}",
            first.mass.to_f64().unwrap_or(f64::NAN),
            first.action.to_f64().unwrap_or(f64::NAN)
        ));
    }
    let ends_below_minus_one = last.action < -T::one();
    if !ends_below_minus_one {
        reasons.push(format!(
            "terminal action {:.4} is not below -1 (sample list truncated?)",
            last.action.to_f64().unwrap_or(f64::NAN)
        ));
    }

    let mut max_idx = 0;
    let mut max_action = T::neg_infinity();
    for (i, s) in data.samples.iter().enumerate() {
        if s.action > max_action {
            max_action = s.action;
            max_idx = i;
        }
    }
    let max_matches_witness = (max_action - data.witness_action).abs()
        <= tol * (T::one() + data.witness_action.abs());
    if !max_matches_witness {
        reasons.push(format!(
            "path maximum {:.6e} differs from the witness action {:.6e}",
            max_action.to_f64().unwrap_or(f64::NAN),
            data.witness_action.to_f64().unwrap_or(f64::NAN)
        ));
    }
    let max_at_witness_sample = max_idx == data.witness_index;
    if !max_at_witness_sample {
        reasons.push(format!(
            "maximum at sample {max_idx}, witness at {}",
            data.witness_index
        ));
    }

    let mut delta_separation = true;
    for (i, s) in data.samples.iter().enumerate() {
        if i == data.witness_index {
            continue;
        }
        if s.dist_l2 >= delta && !(s.action < data.witness_action) {
            delta_separation = false;
            reasons.push(format!(
                "sample {} at distance {:.3} has action {:.6e} >= witness",
                i,
                s.dist_l2.to_f64().unwrap_or(f64::NAN),
                s.action.to_f64().unwrap_or(f64::NAN)
            ));
            break;
        }
    }

    let mut mass_strictly_increasing = true;
    for w in data.samples.windows(2) {
        if !(w[1].mass > w[0].mass) {
            mass_strictly_increasing = false;
            reasons.push(format!(
                "mass not strictly increasing between t = {} and t = {}",
                w[0].t.to_f64().unwrap_or(f64::NAN),
                w[1].t.to_f64().unwrap_or(f64::NAN)
            ));
            break;
        }
    }
    let mass_exceeds_target = last.mass > mass_target;
    if !mass_exceeds_target {
        reasons.push(format!(
            "terminal mass {:.4} does not exceed the target {:.4}",
            last.mass.to_f64().unwrap_or(f64::NAN),
            mass_target.to_f64().unwrap_or(f64::NAN)
        ));
    }

    PathCheck {
        starts_at_zero,
        ends_below_minus_one,
        max_matches_witness,
        max_at_witness_sample,
        delta_separation,
        mass_strictly_increasing,
        mass_exceeds_target,
        reasons,
    }
}
