//! Constrained energy, free action, and the identity residuals that
//! certify numerical solutions.
//!
//! The energy is `I(u) = 1/2 ∫|∇u|² - ∫F(u)` and the action at frequency
//! `mu` is `J_mu(u) = I(u) + mu/2 ∫|u|²`. Solutions of `-Δu = f(u) - mu u`
//! satisfy two integral identities used as residual diagnostics:
//!
//! * Pohozaev:  `(N-2)/(2N) ∫|∇u|² = ∫G_mu(u)`,
//! * Nehari:    `∫|∇u|² = ∫g_mu(u) u`.
//!
//! Residual thresholds are applied relative to `1 + |J|` so that they do
//! not depend on the problem scale.

use thiserror::Error;

use crate::nonlinearity::{NonlinearityModel, ShiftedNonlinearity};
use crate::radial::RadialProfile;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("multiplier estimate needs a nonzero profile")]
    ZeroMass,
}

/// Energy of a profile, split into its defining pieces.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport<T: Real> {
    /// `1/2 ∫|∇u|²`
    pub kinetic: T,
    /// `∫F(u)`
    pub potential: T,
    /// `I(u) = kinetic - potential`
    pub energy: T,
    pub mass: T,
}

/// Action value and identity residuals at a frequency `mu`.
///
/// Residual fields are absolute; use [`ActionReport::pohozaev_relative`] and
/// [`ActionReport::nehari_relative`] for the scale-free versions.
#[derive(Debug, Clone, Copy)]
pub struct ActionReport<T: Real> {
    pub action: T,
    pub pohozaev: T,
    pub nehari: T,
    pub mu: T,
}

impl<T: Real> ActionReport<T> {
    pub fn pohozaev_relative(&self) -> T {
        self.pohozaev.abs() / (T::one() + self.action.abs())
    }

    pub fn nehari_relative(&self) -> T {
        self.nehari.abs() / (T::one() + self.action.abs())
    }
}

pub fn energy_report<T: Real>(
    model: &NonlinearityModel<T>,
    u: &RadialProfile<T>,
) -> EnergyReport<T> {
    let kinetic = u.grad_norm_sq() / T::of(2.0);
    let potential = u.integral_of(|t| model.big_f(t));
    EnergyReport { kinetic, potential, energy: kinetic - potential, mass: u.mass() }
}

pub fn action_report<T: Real>(
    model: &NonlinearityModel<T>,
    u: &RadialProfile<T>,
    mu: T,
) -> ActionReport<T> {
    let n = u.grid().dim();
    let shifted = ShiftedNonlinearity::new(model.clone(), mu);
    let grad = u.grad_norm_sq();
    let mass = u.mass();
    let energy = grad / T::of(2.0) - u.integral_of(|t| model.big_f(t));
    let action = energy + mu / T::of(2.0) * mass;

    // one coefficient covers every dimension: (N-2)/(2N) is 0 at N = 2 and
    // -1/2 at N = 1
    let coeff = (T::of_usize(n) - T::of(2.0)) / (T::of(2.0) * T::of_usize(n));
    let pohozaev = coeff * grad - u.integral_of(|t| shifted.big_g(t));
    let nehari = grad - u.integral_of(|t| shifted.g(t) * t);
    ActionReport { action, pohozaev, nehari, mu }
}

/// Read the multiplier off the equation tested with `u` itself:
/// `mu = (∫f(u)u - ∫|∇u|²) / ∫|u|²`.
pub fn multiplier_estimate<T: Real>(
    model: &NonlinearityModel<T>,
    u: &RadialProfile<T>,
) -> Result<T, FunctionalError> {
    let mass = u.mass();
    if !(mass > T::zero()) {
        return Err(FunctionalError::ZeroMass);
    }
    let pairing = u.integral_of(|t| model.f(t) * t);
    Ok((pairing - u.grad_norm_sq()) / mass)
}

/// Outcome of the multiplier sign test for minimizers with `I <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositivityCheck<T: Real> {
    Pass { bound: T },
    Fail { bound: T },
    /// The hypothesis `I <= 0` does not hold, so the bound says nothing.
    NotApplicable,
}

/// For a minimizer with `I(v) <= 0`, combining the energy with the
/// Pohozaev identity gives `mu >= (2/N) ∫|∇v|² / m`; check it.
pub fn multiplier_positivity_check<T: Real>(
    report: &EnergyReport<T>,
    dim: usize,
    mu: T,
    tol: T,
) -> PositivityCheck<T> {
    if report.energy > T::zero() {
        return PositivityCheck::NotApplicable;
    }
    let unhalved = report.kinetic * T::of(2.0);
    let bound = T::of(2.0) / T::of_usize(dim) * unhalved / report.mass;
    if mu >= bound - tol {
        PositivityCheck::Pass { bound }
    } else {
        PositivityCheck::Fail { bound }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Sign;
    use crate::radial::RadialGrid;

    fn cubic() -> NonlinearityModel<f64> {
        NonlinearityModel::single_power(4.0, Sign::Plus).unwrap()
    }

    fn soliton_grid() -> RadialGrid<f64> {
        RadialGrid::new(1, 20.0, 4000).unwrap()
    }

    fn sech_soliton(mu: f64) -> RadialProfile<f64> {
        let amp = (2.0 * mu).sqrt();
        let k = mu.sqrt();
        RadialProfile::from_fn(soliton_grid(), move |r| amp / (k * r).cosh())
    }

    #[test]
    fn zero_profile_reports() {
        let zero = RadialProfile::zero(soliton_grid());
        let e = energy_report(&cubic(), &zero);
        assert_eq!(e.energy, 0.0);
        let a = action_report(&cubic(), &zero, 1.0);
        assert_eq!(a.action, 0.0);
        assert_eq!(a.pohozaev, 0.0);
        assert_eq!(a.nehari, 0.0);
    }

    #[test]
    fn soliton_energy() {
        // I(w) = -2/3 at mu = 1 (mass 4), from the sech family algebra
        let e = energy_report(&cubic(), &sech_soliton(1.0));
        assert!((e.energy + 2.0 / 3.0).abs() < 1e-4, "I = {}", e.energy);
        assert!((e.mass - 4.0).abs() < 1e-5);
    }

    #[test]
    fn gaussian_energy_against_fine_quadrature() {
        // working-resolution value matches a 4x refined quadrature; the
        // kinetic term converges at O(h²) so 16000 intervals on [0, 20]
        // leave a few 1e-7 of discretization error
        let coarse = RadialProfile::from_fn(RadialGrid::new(1, 20.0, 16000).unwrap(), |r: f64| {
            1.3 * (-r * r).exp()
        });
        let fine = RadialProfile::from_fn(RadialGrid::new(1, 20.0, 64000).unwrap(), |r: f64| {
            1.3 * (-r * r).exp()
        });
        let model = cubic();
        let e_coarse = energy_report(&model, &coarse).energy;
        let e_fine = energy_report(&model, &fine).energy;
        assert!((e_coarse - e_fine).abs() < 1e-6, "{e_coarse} vs {e_fine}");
    }

    #[test]
    fn soliton_action_and_residuals() {
        // J = 4/3 at mu = 1, with both identities satisfied
        let a = action_report(&cubic(), &sech_soliton(1.0), 1.0);
        assert!((a.action - 4.0 / 3.0).abs() < 1e-4, "J = {}", a.action);
        assert!(a.pohozaev_relative() < 1e-4, "pohozaev {}", a.pohozaev);
        assert!(a.nehari_relative() < 1e-4, "nehari {}", a.nehari);
    }

    #[test]
    fn action_energy_consistency() {
        // J - I = mu/2 * mass exactly as computed
        let u = RadialProfile::from_fn(soliton_grid(), |r| (-r * r / 3.0).exp());
        let model = cubic();
        let mu = 0.7;
        let e = energy_report(&model, &u);
        let a = action_report(&model, &u, mu);
        let diff = a.action - e.energy - mu / 2.0 * e.mass;
        assert!(diff.abs() < 1e-14 * (1.0 + a.action.abs()));
    }

    #[test]
    fn non_solution_has_nonzero_residuals() {
        let u = RadialProfile::from_fn(
            RadialGrid::new(3, 12.0, 1200).unwrap(),
            |r: f64| (-r * r).exp(),
        );
        let a = action_report(&cubic(), &u, 1.0);
        assert!(a.pohozaev.abs() > 1e-3 || a.nehari.abs() > 1e-3);
    }

    #[test]
    fn multiplier_estimates() {
        // exact soliton at mu = 1
        let mu = multiplier_estimate(&cubic(), &sech_soliton(1.0)).unwrap();
        assert!((mu - 1.0).abs() < 1e-4, "mu = {mu}");

        // scaled family member w_mu = sqrt(2 mu) sech(sqrt(mu) r) at mu = 4
        let mu = multiplier_estimate(&cubic(), &sech_soliton(4.0)).unwrap();
        assert!((mu - 4.0).abs() < 1e-3, "mu = {mu}");

        // with f = 0 the estimate reduces to -grad/mass <= 0
        let free = NonlinearityModel::custom(crate::nonlinearity::CustomNonlinearity {
            f: std::sync::Arc::new(|_t: f64| 0.0),
            zero: crate::nonlinearity::LeadingTerm { exponent: 10.0, coefficient: 0.0 },
            infinity: crate::nonlinearity::LeadingTerm { exponent: 0.0, coefficient: 0.0 },
            odd: true,
            quad_tol: 1e-12,
        })
        .unwrap();
        let u = RadialProfile::from_fn(soliton_grid(), |r| (-r * r).exp());
        let mu = multiplier_estimate(&free, &u).unwrap();
        assert!((mu + u.grad_norm_sq() / u.mass()).abs() < 1e-12);
        assert!(mu <= 0.0);

        let zero = RadialProfile::zero(soliton_grid());
        assert!(multiplier_estimate(&cubic(), &zero).is_err());
    }

    #[test]
    fn positivity_check_cases() {
        // exact 1D soliton at m = 4: bound (2/1)(4/3)/4 = 2/3 <= mu = 1
        let e = energy_report(&cubic(), &sech_soliton(1.0));
        match multiplier_positivity_check(&e, 1, 1.0, 1e-9) {
            PositivityCheck::Pass { bound } => assert!((bound - 2.0 / 3.0).abs() < 1e-4),
            other => panic!("expected pass, got {other:?}"),
        }

        // mu far below the bound fails
        match multiplier_positivity_check(&e, 1, 0.5, 1e-9) {
            PositivityCheck::Fail { .. } => {}
            other => panic!("expected fail, got {other:?}"),
        }

        // positive energy input is out of the hypothesis
        let pos = EnergyReport { kinetic: 1.0, potential: 0.0, energy: 1.0, mass: 1.0 };
        assert_eq!(
            multiplier_positivity_check(&pos, 1, 1.0, 1e-9),
            PositivityCheck::NotApplicable
        );
    }

    #[test]
    fn one_dimensional_action_equals_gradient_integral() {
        // at N = 1 the Pohozaev identity gives -∫|u'|²/2 = ∫G, so
        // J = ∫|u'|² on solutions
        let w = sech_soliton(1.0);
        let a = action_report(&cubic(), &w, 1.0);
        let grad = w.grad_norm_sq();
        assert!(
            (a.action - grad).abs() / grad.abs() < 1e-3,
            "J = {} vs grad {}",
            a.action,
            grad
        );
    }

    #[test]
    fn pohozaev_coefficient_by_dimension() {
        // N = 1: residual = -1/2 grad - ∫G; N = 2: residual = -∫G
        let grid2 = RadialGrid::new(2, 10.0, 500).unwrap();
        let u = RadialProfile::from_fn(grid2, |r: f64| (-r * r).exp());
        let a = action_report(&cubic(), &u, 1.0);
        let shifted = ShiftedNonlinearity::new(cubic(), 1.0);
        let direct = -u.integral_of(|t| shifted.big_g(t));
        assert!((a.pohozaev - direct).abs() < 1e-13);
    }

    #[test]
    fn coercivity_probe_scaled_sequence() {
        // push the gradient up with mass fixed: I must leave any bound behind
        let model = cubic();
        let u = RadialProfile::from_fn(soliton_grid(), |r| (-r * r).exp());
        let mut previous = f64::NEG_INFINITY;
        let mut crossed_large = false;
        for k in 1..=8 {
            let s = 0.5 * k as f64;
            let scaled = u.l2_scaling(s);
            let e = energy_report(&model, &scaled);
            if e.kinetic > 50.0 {
                assert!(e.energy > previous, "tail not monotone");
                crossed_large = true;
            }
            previous = e.energy;
        }
        assert!(crossed_large);
        assert!(previous > 1e3, "I stayed bounded: {previous}");
    }
}
