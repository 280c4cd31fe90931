//! Critical-mass estimation and qualitative checks of the energy curve.
//!
//! The ground-state energy is zero up to a threshold mass and strictly
//! negative beyond it. Numerically only one side is decidable: a
//! converged run with `E < -margin` certifies negativity, while "E = 0"
//! is operationally "no restart certifies a negative energy". The
//! estimator brackets the threshold by bisection on that predicate,
//! re-verifying both endpoints at every accepted halving since the
//! predicate is a Monte-Carlo-over-restarts decision, not a function.

use std::fmt;

use thiserror::Error;

use crate::minimizer::{minimize, InitStrategy, MinimizeResult, SolveError, SolverConfig, CurveRow};
use crate::nonlinearity::{classify_small_mass, NonlinearityModel, SmallMassClass};
use crate::radial::{RadialGrid, RadialProfile};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum MStarError {
    #[error("negativity already certified at the lower endpoint {m}; bracket invalid")]
    BracketInvalid { m: f64 },
    #[error("no mass up to {m} certified a negative energy")]
    NoNegativityFound { m: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MStarClass {
    /// Threshold known to vanish from the small-mass classification.
    Zero,
    /// Threshold known positive from the classification; bracket applies.
    Positive,
    /// Classification undetermined; the bracket is purely numerical.
    Bracketed,
}

impl fmt::Display for MStarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MStarClass::Zero => write!(f, "zero"),
            MStarClass::Positive => write!(f, "positive"),
            MStarClass::Bracketed => write!(f, "bracketed"),
        }
    }
}

/// Endpoint status of one bisection step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativityStatus {
    Certified,
    NotCertified,
}

impl fmt::Display for NegativityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegativityStatus::Certified => write!(f, "negative"),
            NegativityStatus::NotCertified => write!(f, "not-negative"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BisectionStep<T: Real> {
    pub iteration: usize,
    pub m_lo: T,
    pub m_hi: T,
    pub status_lo: NegativityStatus,
    pub status_hi: NegativityStatus,
}

/// Bracket for the critical mass. For [`MStarClass::Zero`] the bracket
/// fields are vacuous (the threshold is exactly zero); otherwise
/// `lower < upper`, negativity is certified at `upper` and was never
/// certified at `lower`.
#[derive(Debug, Clone)]
pub struct MStarEstimate<T: Real> {
    pub lower: T,
    pub upper: T,
    pub width: T,
    pub classification: MStarClass,
    pub trace: Vec<BisectionStep<T>>,
}

/// One negativity certification attempt: sequential restarts over a
/// deterministic amplitude ladder, stopping at the first certificate.
/// Wide low-amplitude starts come first; saturating nonlinearities reach
/// their droplet branch from those, while narrow starts spread out.
pub fn certify_negative<T: Real>(
    model: &NonlinearityModel<T>,
    grid: &RadialGrid<T>,
    mass: T,
    cfg: &SolverConfig<T>,
    restarts: usize,
    seed_salt: u64,
) -> Result<(NegativityStatus, T), SolveError> {
    let margin = cfg.negativity_margin();
    let amplitudes = [0.5, 1.0, 0.25, 2.0, 0.75, 1.5, 0.35, 3.0];
    let mut best = T::infinity();
    for k in 0..restarts.max(1) {
        let a = amplitudes[k % amplitudes.len()];
        let m_f = mass.to_f64().unwrap_or(1.0);
        let width = (m_f / (a * a)).powf(1.0 / grid.dim() as f64) / std::f64::consts::PI.sqrt();
        let width = width.min(grid.r_max().to_f64().unwrap() / 4.0).max(0.2);
        let mut local = cfg.clone();
        local.restarts = 1;
        local.seed = cfg.seed.wrapping_add(seed_salt).wrapping_add(k as u64 * 7919);
        local.init = InitStrategy::Gaussian { width: T::of(width) };
        let res = minimize(model, grid, mass, &local)?;
        if res.converged {
            best = best.min(res.energy);
            if res.energy < -margin {
                return Ok((NegativityStatus::Certified, res.energy));
            }
        }
    }
    Ok((NegativityStatus::NotCertified, best))
}

/// Bracket the critical mass by bisection on the negativity predicate.
///
/// Models classified threshold-zero return immediately. Otherwise the
/// upper endpoint grows geometrically until negativity fires, the lower
/// endpoint is widened (and finally rejected) if it certifies, and each
/// accepted halving re-checks both endpoints with fresh seeds.
pub fn estimate_mstar<T: Real>(
    model: &NonlinearityModel<T>,
    grid: &RadialGrid<T>,
    bracket: (T, T),
    tol_mass: T,
    cfg: &SolverConfig<T>,
) -> Result<MStarEstimate<T>, MStarError> {
    let class = classify_small_mass(model, grid.dim());
    if class == SmallMassClass::ThresholdZero {
        return Ok(MStarEstimate {
            lower: T::zero(),
            upper: T::zero(),
            width: T::zero(),
            classification: MStarClass::Zero,
            trace: Vec::new(),
        });
    }
    let classification = match class {
        SmallMassClass::ThresholdPositive => MStarClass::Positive,
        _ => MStarClass::Bracketed,
    };

    let (mut lo, mut hi) = bracket;
    let restarts = cfg.restarts.max(1);

    // grow the upper endpoint until the predicate fires
    let mut grew = 0;
    loop {
        let (status, _) = certify_negative(model, grid, hi, cfg, restarts, 1000 + grew)?;
        if status == NegativityStatus::Certified {
            break;
        }
        lo = lo.max(hi);
        hi *= T::of(2.0);
        grew += 1;
        if grew > 24 {
            return Err(MStarError::NoNegativityFound { m: hi.to_f64().unwrap_or(f64::NAN) });
        }
    }

    // the lower endpoint must not certify; widen downward before giving up
    let mut widened = 0;
    loop {
        let (status, _) = certify_negative(model, grid, lo, cfg, restarts, 2000 + widened)?;
        if status == NegativityStatus::NotCertified {
            break;
        }
        if widened >= 3 {
            return Err(MStarError::BracketInvalid { m: lo.to_f64().unwrap_or(f64::NAN) });
        }
        lo /= T::of(10.0);
        widened += 1;
    }

    let mut trace = Vec::new();
    let mut iteration = 0;
    while hi - lo > tol_mass && iteration < 64 {
        let mid = (lo + hi) / T::of(2.0);
        let salt = 3000 + iteration as u64 * 17;
        let (mid_status, _) = certify_negative(model, grid, mid, cfg, restarts, salt)?;
        if mid_status == NegativityStatus::Certified {
            hi = mid;
        } else {
            lo = mid;
        }
        // fresh-seed re-verification of both endpoints; a flipped status
        // moves the bracket instead of silently trusting monotonicity
        let (lo_status, _) = certify_negative(model, grid, lo, cfg, 2, salt + 1)?;
        let (hi_status, _) = certify_negative(model, grid, hi, cfg, 1, salt + 2)?;
        trace.push(BisectionStep {
            iteration,
            m_lo: lo,
            m_hi: hi,
            status_lo: lo_status,
            status_hi: hi_status,
        });
        if lo_status == NegativityStatus::Certified {
            hi = lo;
            lo /= T::of(2.0);
        }
        iteration += 1;
    }

    // final confirmation of the lower endpoint at full restart count
    let (final_lo, _) = certify_negative(model, grid, lo, cfg, restarts, 9001)?;
    if final_lo == NegativityStatus::Certified {
        return Err(MStarError::BracketInvalid { m: lo.to_f64().unwrap_or(f64::NAN) });
    }

    Ok(MStarEstimate { lower: lo, upper: hi, width: hi - lo, classification, trace })
}

/// Qualitative report on a computed energy curve.
#[derive(Debug, Clone)]
pub struct CurveReport<T: Real> {
    pub nonincreasing: bool,
    /// `None` in one dimension, where concavity is not asserted.
    pub concave: Option<bool>,
    pub subhomogeneous: bool,
    /// Largest jump per unit mass between adjacent rows.
    pub max_slope: T,
    pub continuous_gap: bool,
}

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curve checks need at least 4 converged rows, got {0}")]
    TooFewRows(usize),
}

/// Check monotonicity, concavity (N >= 2), sub-homogeneity and a
/// Lipschitz bound on a curve of converged rows.
///
/// Energies that were not certified below `-margin` are treated as zero:
/// on a truncated grid the flow settles on a small positive level when
/// the true infimum is zero, and the dichotomy statement concerns the
/// operational value.
pub fn curve_properties<T: Real>(
    rows: &[CurveRow<T>],
    dim: usize,
    tol: T,
    slope_bound: Option<T>,
) -> Result<CurveReport<T>, CurveError> {
    let margin = tol * T::of(10.0);
    let mut pts: Vec<(T, T)> = Vec::new();
    for row in rows {
        if let Ok(res) = &row.outcome {
            if res.converged {
                let e = if res.energy < -margin { res.energy } else { T::zero() };
                pts.push((row.mass, e));
            }
        }
    }
    if pts.len() < 4 {
        return Err(CurveError::TooFewRows(pts.len()));
    }

    let slack = T::of(2.0) * tol;
    let nonincreasing = pts.windows(2).all(|w| w[1].1 <= w[0].1 + slack);

    let concave = if dim >= 2 {
        // slopes must not increase between consecutive chords
        let mut ok = true;
        for w in pts.windows(3) {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            let scale = slack * (T::one() / (w[1].0 - w[0].0) + T::one() / (w[2].0 - w[1].0));
            if s2 > s1 + scale {
                ok = false;
            }
        }
        Some(ok)
    } else {
        None
    };

    let mut subhomogeneous = true;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (mi, ei) = pts[i];
            let (mj, ej) = pts[j];
            if ej > (mj / mi) * ei + slack {
                subhomogeneous = false;
            }
        }
    }

    let mut max_slope = T::zero();
    for w in pts.windows(2) {
        max_slope = max_slope.max((w[1].1 - w[0].1).abs() / (w[1].0 - w[0].0));
    }
    let continuous_gap = match slope_bound {
        Some(c) => max_slope <= c,
        None => max_slope.is_finite(),
    };

    Ok(CurveReport { nonincreasing, concave, subhomogeneous, max_slope, continuous_gap })
}

#[derive(Debug, Error)]
pub enum PhiProbeError {
    #[error("the dilation family argument needs dimension >= 2, got 1")]
    OneDimensional,
    #[error("probe profile must have unit mass, got {0}")]
    NotUnitMass(f64),
}

/// Sample of the dilation family `Φ_u(m) = m^{1-2/N} ‖∇u‖² - m ∫F(u)`
/// for a unit-mass profile (the kinetic term enters un-halved; at m = 1
/// the value is `I(u) + ‖∇u‖²/2`, not `I(u)`).
#[derive(Debug, Clone, Copy)]
pub struct PhiSample<T: Real> {
    pub mass: T,
    pub phi: T,
}

pub fn phi_u_probe<T: Real>(
    model: &NonlinearityModel<T>,
    unit_profile: &RadialProfile<T>,
    masses: &[T],
) -> Result<Vec<PhiSample<T>>, PhiProbeError> {
    let n = unit_profile.grid().dim();
    if n < 2 {
        return Err(PhiProbeError::OneDimensional);
    }
    let mass = unit_profile.mass();
    if (mass - T::one()).abs() > T::of(1e-6) {
        return Err(PhiProbeError::NotUnitMass(mass.to_f64().unwrap_or(f64::NAN)));
    }
    let grad = unit_profile.grad_norm_sq();
    let potential = unit_profile.integral_of(|t| model.big_f(t));
    let exponent = T::one() - T::of(2.0) / T::of_usize(n);
    Ok(masses
        .iter()
        .map(|&m| PhiSample { mass: m, phi: m.powf(exponent) * grad - m * potential })
        .collect())
}

/// Spot-check `E < 0` at the given masses (used for threshold-zero
/// models, where every mass admits a negative level).
pub fn spot_check_negative<T: Real>(
    model: &NonlinearityModel<T>,
    runs: &[(RadialGrid<T>, T, SolverConfig<T>)],
) -> Result<Vec<(T, MinimizeResult<T>, bool)>, SolveError> {
    let mut out = Vec::new();
    for (grid, mass, cfg) in runs {
        let res = minimize(model, grid, *mass, cfg)?;
        let ok = res.converged && res.energy < -cfg.negativity_margin();
        out.push((*mass, res, ok));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Sign;

    fn cubic() -> NonlinearityModel<f64> {
        NonlinearityModel::single_power(4.0, Sign::Plus).unwrap()
    }

    fn rows_from(masses: &[f64], energies: &[f64]) -> Vec<CurveRow<f64>> {
        // synthetic converged rows for the property checks
        let grid = RadialGrid::new(1, 20.0, 400).unwrap();
        let cfg = SolverConfig { restarts: 1, max_iter: 400, tol: 1e-6, ..Default::default() };
        let template = minimize(&cubic(), &grid, 1.0, &cfg).unwrap();
        masses
            .iter()
            .zip(energies)
            .map(|(&m, &e)| {
                let mut res = template.clone();
                res.energy = e;
                res.converged = true;
                CurveRow { mass: m, outcome: Ok(res) }
            })
            .collect()
    }

    #[test]
    fn zero_classification_short_circuits() {
        // threshold-zero models skip the bisection entirely
        let model = NonlinearityModel::cubic_quintic();
        let grid = RadialGrid::new(1, 20.0, 400).unwrap();
        let cfg = SolverConfig::default();
        let est = estimate_mstar(&model, &grid, (0.1, 200.0), 1e-2, &cfg).unwrap();
        assert_eq!(est.classification, MStarClass::Zero);
        assert!(est.trace.is_empty());
    }

    #[test]
    fn threshold_zero_for_any_bracket() {
        // the attractive single power is subcritical at the origin in one
        // dimension, so the classification short-circuits for any bracket
        let grid = RadialGrid::new(1, 20.0, 400).unwrap();
        for bracket in [(0.1, 200.0), (5.0, 10.0)] {
            let est =
                estimate_mstar(&cubic(), &grid, bracket, 1e-2, &SolverConfig::default()).unwrap();
            assert_eq!(est.classification, MStarClass::Zero);
        }
    }

    #[test]
    fn curve_properties_soliton_law() {
        // exact curve E = -m³/96 sampled at 1..4: nonincreasing and
        // subhomogeneous; concavity is not asserted in one dimension
        let masses = [1.0, 2.0, 3.0, 4.0];
        let energies: Vec<f64> = masses.iter().map(|m: &f64| -m.powi(3) / 96.0).collect();
        let report = curve_properties(&rows_from(&masses, &energies), 1, 1e-8, None).unwrap();
        assert!(report.nonincreasing);
        assert!(report.subhomogeneous);
        assert!(report.concave.is_none());
        assert!(report.continuous_gap);
    }

    #[test]
    fn curve_properties_constant_zero() {
        let masses = [1.0, 2.0, 3.0, 4.0];
        let report = curve_properties(&rows_from(&masses, &[0.0; 4]), 3, 1e-8, None).unwrap();
        assert!(report.nonincreasing);
        assert!(report.subhomogeneous);
        assert_eq!(report.concave, Some(true));
    }

    #[test]
    fn curve_properties_detects_violations() {
        let masses = [1.0, 2.0, 3.0, 4.0];
        // increasing curve (above the clamp margin in magnitude)
        let report =
            curve_properties(&rows_from(&masses, &[-4.0, -3.0, -2.0, -0.5]), 2, 1e-8, None)
                .unwrap();
        assert!(!report.subhomogeneous);
        // convex negative curve fails the concavity check
        let report =
            curve_properties(&rows_from(&masses, &[-1.0, -1.9, -2.7, -3.4]), 2, 1e-8, None)
                .unwrap();
        assert_eq!(report.concave, Some(false));
        assert!(report.nonincreasing);
    }

    #[test]
    fn curve_properties_needs_rows() {
        let masses = [1.0, 2.0];
        assert!(matches!(
            curve_properties(&rows_from(&masses, &[0.0, 0.0]), 1, 1e-8, None),
            Err(CurveError::TooFewRows(2))
        ));
    }

    #[test]
    fn phi_probe_free_model() {
        // with F = 0 the family reduces to m^{1/3} ‖∇u‖²: concave increasing
        let free = NonlinearityModel::custom(crate::nonlinearity::CustomNonlinearity {
            f: std::sync::Arc::new(|_t: f64| 0.0),
            zero: crate::nonlinearity::LeadingTerm { exponent: 10.0, coefficient: 0.0 },
            infinity: crate::nonlinearity::LeadingTerm { exponent: 0.0, coefficient: 0.0 },
            odd: true,
            quad_tol: 1e-12,
        })
        .unwrap();
        let grid = RadialGrid::new(3, 12.0, 600).unwrap();
        let gauss = RadialProfile::from_fn(grid, |r: f64| (-r * r / 2.0).exp());
        let scale = 1.0 / gauss.mass().sqrt();
        let unit =
            RadialProfile::from_fn(gauss.grid().clone(), |r: f64| scale * (-r * r / 2.0).exp());
        let grad = unit.grad_norm_sq();
        let masses = [1.0, 2.0, 4.0, 8.0];
        let samples = phi_u_probe(&free, &unit, &masses).unwrap();
        for s in &samples {
            let expect = s.mass.powf(1.0 / 3.0) * grad;
            assert!((s.phi - expect).abs() < 1e-12 * expect);
        }
        // increasing and concave in m
        for w in samples.windows(2) {
            assert!(w[1].phi > w[0].phi);
        }
        let slopes: Vec<f64> = samples
            .windows(2)
            .map(|w| (w[1].phi - w[0].phi) / (w[1].mass - w[0].mass))
            .collect();
        for w in slopes.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn phi_probe_unit_mass_at_one() {
        // at m = 1 the formula returns I(u) plus the other half of the
        // kinetic term
        let model = NonlinearityModel::power_sum(3.0, 2.5, 1.0).unwrap();
        let grid = RadialGrid::new(3, 12.0, 600).unwrap();
        let gauss = RadialProfile::from_fn(grid, |r: f64| (-r * r / 2.0).exp());
        let scale = 1.0 / gauss.mass().sqrt();
        let unit =
            RadialProfile::from_fn(gauss.grid().clone(), |r: f64| scale * (-r * r / 2.0).exp());
        let sample = phi_u_probe(&model, &unit, &[1.0]).unwrap()[0];
        let report = crate::functionals::energy_report(&model, &unit);
        assert!((sample.phi - (report.energy + report.kinetic)).abs() < 1e-12);
    }

    #[test]
    fn phi_probe_bounds_computed_curve() {
        // the dilation family of any unit-mass profile dominates the
        // ground-state curve: E_m <= Phi_u(m) at every mass (with the
        // kinetic term un-halved the bound is only looser)
        let model = NonlinearityModel::single_power(3.0, Sign::Plus).unwrap();
        let grid = RadialGrid::new(3, 14.0, 700).unwrap();
        let gauss = RadialProfile::from_fn(grid.clone(), |r: f64| (-r * r / 2.0).exp());
        let scale = 1.0 / gauss.mass().sqrt();
        let unit = RadialProfile::from_fn(grid.clone(), |r: f64| scale * (-r * r / 2.0).exp());

        let masses = [1.0, 2.0, 4.0, 8.0];
        let samples = phi_u_probe(&model, &unit, &masses).unwrap();
        let cfg = SolverConfig { restarts: 2, max_iter: 6000, ..SolverConfig::default() };
        let rows = crate::minimizer::energy_curve(&model, &grid, &masses, &cfg, false).unwrap();
        for (row, sample) in rows.iter().zip(&samples) {
            let res = row.outcome.as_ref().unwrap();
            assert!(res.converged, "m = {}", row.mass);
            assert!(
                sample.phi >= res.energy - 2.0 * cfg.tol,
                "m = {}: phi {} < E {}",
                row.mass,
                sample.phi,
                res.energy
            );
        }
    }

    #[test]
    fn phi_probe_rejections() {
        let model = cubic();
        let grid1 = RadialGrid::new(1, 10.0, 100).unwrap();
        let p1 = RadialProfile::from_fn(grid1, |r: f64| (-r * r).exp());
        assert!(matches!(phi_u_probe(&model, &p1, &[1.0]), Err(PhiProbeError::OneDimensional)));

        let grid3 = RadialGrid::new(3, 10.0, 100).unwrap();
        let p3 = RadialProfile::from_fn(grid3, |r: f64| (-r * r).exp());
        assert!(matches!(phi_u_probe(&model, &p3, &[1.0]), Err(PhiProbeError::NotUnitMass(_))));
    }
}
