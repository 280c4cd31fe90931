//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured numbers (run with `--nocapture` to see them).
//!
//! Closed-form oracles come from the sech soliton family of the cubic
//! problem in one dimension, `w_mu(x) = sqrt(2 mu) sech(sqrt(mu) x)`:
//! mass 4 sqrt(mu), energy -m³/96 at mass m, action (4/3) mu^{3/2}.
//! Saturating-model quantities with no closed form are locked in as
//! regression baselines.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use groundstate::critical_mass::{
    certify_negative, curve_properties, estimate_mstar, MStarClass, NegativityStatus,
};
use groundstate::minimizer::{
    energy_curve, minimize, sign_monotonicity_check, CurveRow, InitStrategy, MinimizeResult,
    SolverConfig,
};
use groundstate::mp_path::{
    check_path, dilation_path, expected_trends, plateau_path_1d, two_param_path_2d, WitnessData,
};
use groundstate::nonlinearity::{classify_small_mass, NonlinearityModel, Sign, SmallMassClass};
use groundstate::radial::RadialGrid;
use groundstate::shooting::{
    least_action, shoot_1d, LeastActionOutcome, ShootConfig, ShootResult, ShootStatus,
};
use groundstate::verification::{random_center_dominant_profile, verify_lemma32};

fn criterion(number: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {number} [{}]: {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

fn cubic() -> NonlinearityModel<f64> {
    NonlinearityModel::single_power(4.0, Sign::Plus).unwrap()
}

fn cubic_quintic() -> NonlinearityModel<f64> {
    NonlinearityModel::cubic_quintic()
}

fn soliton_grid() -> RadialGrid<f64> {
    RadialGrid::new(1, 20.0, 4000).unwrap()
}

/// Shared artifacts, computed once per process.
struct SolitonRun {
    result: MinimizeResult<f64>,
    elapsed: Duration,
}

fn soliton_m4() -> &'static SolitonRun {
    static CELL: OnceLock<SolitonRun> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let result = minimize(&cubic(), &soliton_grid(), 4.0, &SolverConfig::default()).unwrap();
        SolitonRun { result, elapsed: start.elapsed() }
    })
}

fn soliton_curve() -> &'static Vec<CurveRow<f64>> {
    static CELL: OnceLock<Vec<CurveRow<f64>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = SolverConfig { restarts: 2, ..SolverConfig::default() };
        energy_curve(&cubic(), &soliton_grid(), &[1.0, 2.0, 3.0, 4.0], &cfg, false).unwrap()
    })
}

fn cubic_shot_mu1() -> &'static ShootResult<f64> {
    static CELL: OnceLock<ShootResult<f64>> = OnceLock::new();
    CELL.get_or_init(|| shoot_1d(&cubic(), 1.0, Sign::Plus, &ShootConfig::default()).unwrap())
}

struct CrossSolver {
    minimizer: MinimizeResult<f64>,
    witness: ShootResult<f64>,
}

/// Saturating model in one dimension at unit mass: the multiplier sits
/// near m²/16 and the soliton is a few units wide, so the grid reaches
/// to 40.
fn cubic_quintic_cross() -> &'static CrossSolver {
    static CELL: OnceLock<CrossSolver> = OnceLock::new();
    CELL.get_or_init(|| {
        let grid = RadialGrid::new(1, 40.0, 2000).unwrap();
        let cfg = SolverConfig { restarts: 2, ..SolverConfig::default() };
        let minimizer = minimize(&cubic_quintic(), &grid, 1.0, &cfg).unwrap();
        assert!(minimizer.converged);
        let witness =
            shoot_1d(&cubic_quintic(), minimizer.mu, Sign::Plus, &ShootConfig::default()).unwrap();
        CrossSolver { minimizer, witness }
    })
}

#[test]
fn c01_cubic_soliton_ground_state() {
    let run = soliton_m4();
    let res = &run.result;
    let e_err = (res.energy + 2.0 / 3.0).abs();
    let mu_err = (res.mu - 1.0).abs();
    let ok = res.converged && e_err <= 1e-3 && mu_err <= 1e-3 && run.elapsed < Duration::from_secs(5);
    criterion(
        1,
        "cubic soliton ground state",
        ok,
        &format!(
            "E = {:.6} (err {:.2e}), mu = {:.6} (err {:.2e}), {:.2?}",
            res.energy, e_err, res.mu, mu_err, run.elapsed
        ),
    );
}

#[test]
fn c02_energy_curve_law() {
    let rows = soliton_curve();
    let mut worst = 0.0f64;
    for row in rows.iter() {
        let res = row.outcome.as_ref().unwrap();
        assert!(res.converged, "row m = {} did not converge", row.mass);
        let exact = -row.mass.powi(3) / 96.0;
        worst = worst.max((res.energy - exact).abs() / exact.abs());
    }
    let props = curve_properties(rows, 1, 1e-8, None).unwrap();
    let ok = worst <= 5e-3 && props.nonincreasing && props.subhomogeneous;
    criterion(
        2,
        "energy curve matches -m^3/96",
        ok,
        &format!(
            "worst relative error {:.2e}; nonincreasing {}, subhomogeneous {}",
            worst, props.nonincreasing, props.subhomogeneous
        ),
    );
}

#[test]
fn c03_least_action_identity() {
    let shot = cubic_shot_mu1();
    let action = shot.action.expect("decayed");
    let e4 = soliton_m4().result.energy;
    let action_err = (action - 4.0 / 3.0).abs();
    let identity_gap = (action - (e4 + 2.0)).abs();
    let ok = action_err <= 1e-4 && identity_gap <= 2e-3;
    criterion(
        3,
        "least action equals E + mu m / 2",
        ok,
        &format!("A = {action:.8} (err {action_err:.2e}), |A - (E_4 + 2)| = {identity_gap:.2e}"),
    );
}

#[test]
fn c04_identity_residuals_across_suite() {
    // every converged minimizer and decayed shooting witness produced by
    // the suite keeps both identities below 1e-3 relative
    let mut worst: (f64, String) = (0.0, String::new());
    let mut track = |tag: &str, pohozaev: f64, nehari: f64| {
        for (name, v) in [("pohozaev", pohozaev), ("nehari", nehari)] {
            if v > worst.0 {
                worst = (v, format!("{tag} {name}"));
            }
        }
    };

    let res = &soliton_m4().result;
    track("minimize-cubic-m4", res.residuals.pohozaev_relative(), res.residuals.nehari_relative());
    for row in soliton_curve() {
        let res = row.outcome.as_ref().unwrap();
        track(
            &format!("curve-m{}", row.mass),
            res.residuals.pohozaev_relative(),
            res.residuals.nehari_relative(),
        );
    }
    let report = cubic_shot_mu1().action_report(&cubic());
    track("shoot-cubic-mu1", report.pohozaev_relative(), report.nehari_relative());

    let cross = cubic_quintic_cross();
    track(
        "minimize-cubic-quintic",
        cross.minimizer.residuals.pohozaev_relative(),
        cross.minimizer.residuals.nehari_relative(),
    );
    let report = cross.witness.action_report(&cubic_quintic());
    track("shoot-cubic-quintic", report.pohozaev_relative(), report.nehari_relative());

    let ok = worst.0 <= 1e-3;
    criterion(4, "identity residuals below 1e-3", ok, &format!("worst {:.2e} at {}", worst.0, worst.1));
}

#[test]
fn c05_phase_plane_conservation() {
    let shot = cubic_shot_mu1();
    let dev = shot.phase_energy_max_dev.expect("one-dimensional trajectory");
    let ok = dev <= 1e-6;
    criterion(5, "phase-plane energy conserved", ok, &format!("max |u'^2/2 + G(u)| = {dev:.2e}"));
}

#[test]
fn c06_critical_mass_dichotomy() {
    let start = Instant::now();
    let model = cubic_quintic();

    // one dimension: threshold zero, negativity certified across two
    // decades of mass with frequency-adapted grids and steps
    let class = classify_small_mass(&model, 1);
    assert_eq!(class, SmallMassClass::ThresholdZero);
    let mut spot_details = Vec::new();
    let mut spots_ok = true;
    for m in [0.01f64, 0.1, 1.0] {
        let mu_expected = m * m / 16.0;
        let r = 10.0 / mu_expected.sqrt();
        let grid = RadialGrid::new(1, r, 2000).unwrap();
        let tol = (m.powi(3) / 96.0) / 1e4;
        let cfg = SolverConfig {
            dt: 0.1 / mu_expected,
            tol,
            restarts: 2,
            init: InitStrategy::Gaussian { width: 1.0 / mu_expected.sqrt() },
            ..SolverConfig::default()
        };
        let res = minimize(&model, &grid, m, &cfg).unwrap();
        let certified = res.converged && res.energy < -cfg.negativity_margin();
        spots_ok &= certified;
        spot_details.push(format!("E({m}) = {:.3e}", res.energy));
    }

    // three dimensions: positive threshold bracketed to width 1e-2; the
    // example bracket (0.1, 200) sits below the threshold and the upper
    // endpoint grows geometrically until negativity fires
    let grid3 = RadialGrid::new(3, 13.0, 400).unwrap();
    let cfg3 = SolverConfig { max_iter: 3000, restarts: 4, ..SolverConfig::default() };
    assert_eq!(classify_small_mass(&model, 3), SmallMassClass::ThresholdPositive);
    let est = estimate_mstar(&model, &grid3, (0.1, 200.0), 1e-2, &cfg3).unwrap();
    let bracket_ok = est.classification == MStarClass::Positive
        && est.width <= 1e-2
        && est.lower < est.upper;
    let (upper_status, upper_e) =
        certify_negative(&model, &grid3, est.upper, &cfg3, 4, 77).unwrap();
    let (lower_status, _) = certify_negative(&model, &grid3, est.lower, &cfg3, 4, 78).unwrap();

    // the bracket has no closed form; it is locked in as a regression
    // baseline next to this test
    let baseline_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/baselines.txt");
    let mut store = groundstate::verification::BaselineStore::open(&baseline_path).unwrap();
    let baseline = store.check("mstar-cubic-quintic-N3-R13-M400", est.upper, 1e-3);
    store.save().unwrap();
    let baseline_ok =
        !matches!(baseline, groundstate::verification::BaselineOutcome::Mismatch { .. });

    // concavity of the curve above the threshold: warm-started rows track
    // the droplet branch (larger box for the wider droplets)
    let grid_sweep = RadialGrid::new(3, 16.0, 480).unwrap();
    // the first row starts cold: a wide order-one-amplitude droplet shape
    // puts it in the right basin, and warm starts carry the branch on
    let droplet_width = (2.0 * est.upper).powf(1.0 / 3.0) / std::f64::consts::PI.sqrt();
    let cfg_sweep = SolverConfig {
        max_iter: 5000,
        restarts: 2,
        init: InitStrategy::Gaussian { width: droplet_width },
        ..SolverConfig::default()
    };
    let masses: Vec<f64> = [1.05, 1.2, 1.4, 1.6, 1.8].iter().map(|f| f * est.upper).collect();
    let rows = energy_curve(&model, &grid_sweep, &masses, &cfg_sweep, true).unwrap();
    let props = curve_properties(&rows, 3, cfg_sweep.tol, None).unwrap();

    let elapsed = start.elapsed();
    let ok = spots_ok
        && bracket_ok
        && baseline_ok
        && upper_status == NegativityStatus::Certified
        && lower_status == NegativityStatus::NotCertified
        && props.concave == Some(true)
        && props.nonincreasing
        && elapsed < Duration::from_secs(120);
    criterion(
        6,
        "critical-mass dichotomy",
        ok,
        &format!(
            "1D: {}; 3D bracket [{:.4}, {:.4}] width {:.1e}, E(upper) = {:.3e}, lower {}; concave {:?}; {:.1?}",
            spot_details.join(", "),
            est.lower,
            est.upper,
            est.width,
            upper_e,
            lower_status,
            props.concave,
            elapsed
        ),
    );
}

#[test]
fn c07_mountain_pass_paths() {
    // three dimensions: dilation path off the radial ground state
    let la3 = match least_action(&cubic(), 3, 1.0, &ShootConfig::default()).unwrap() {
        LeastActionOutcome::Found(la) => la,
        LeastActionOutcome::NoSolution { reason } => panic!("no 3d witness: {reason}"),
    };
    let w3 = WitnessData::from_shoot(&cubic(), &la3.witness, 4).unwrap();
    let path3 = dilation_path(&w3, 256, 2.0 * w3.mass, 1e-6).unwrap();
    let mut mismatch = 0.0f64;
    {
        // recompute the two routes for the reported maximum deviation
        let k = w3.kinetic;
        for s in &path3.samples {
            let t: f64 = s.t;
            let formula = (t - t.powi(3) / 3.0) / 2.0 * k;
            mismatch = mismatch.max((formula - s.action).abs() / (1.0 + formula.abs()));
        }
    }
    let check3 = check_path(&path3, 0.5, 2.0 * w3.mass, 1e-6 * (1.0 + w3.action));
    let max3 = path3.samples.iter().cloned().fold(path3.samples[0], |a, b| {
        if b.action > a.action {
            b
        } else {
            a
        }
    });
    let dim3_ok = mismatch <= 1e-6
        && (max3.t - 1.0).abs() < 1e-12
        && check3.ends_below_minus_one
        && check3.mass_strictly_increasing;

    // one dimension: plateau continuation of the negative soliton
    let shot1 = shoot_1d(&cubic(), 1.0, Sign::Minus, &ShootConfig::default()).unwrap();
    let j_w = shot1.action.unwrap();
    let plateau = plateau_path_1d(&cubic(), &shot1, 256, 2.0 * shot1.mass.unwrap()).unwrap();
    let dim1_ok = plateau
        .path
        .samples
        .iter()
        .enumerate()
        .all(|(i, s)| i == plateau.path.witness_index || s.action < j_w);

    // two dimensions: segment pattern of the two-parameter construction
    let model2 = NonlinearityModel::single_power(3.0, Sign::Plus).unwrap();
    let la2 = match least_action(&model2, 2, 1.0, &ShootConfig::default()).unwrap() {
        LeastActionOutcome::Found(la) => la,
        LeastActionOutcome::NoSolution { reason } => panic!("no 2d witness: {reason}"),
    };
    let path2 =
        two_param_path_2d(&model2, &la2.witness, 40, 0.5, 2.0 * la2.witness.mass.unwrap()).unwrap();
    let dim2_ok = path2.trends == expected_trends().to_vec();

    let ok = dim3_ok && dim1_ok && dim2_ok;
    criterion(
        7,
        "mountain-pass paths",
        ok,
        &format!(
            "3D mismatch {:.2e}, max at t = {:.3}, end J = {:.3}; 1D strict below J(w) {}; 2D pattern {:?}",
            mismatch,
            max3.t,
            path3.samples.last().unwrap().action,
            dim1_ok,
            path2.trends
        ),
    );
}

#[test]
fn c08_rearrangement_properties() {
    let grid = RadialGrid::new(1, 20.0, 2000).unwrap();
    let report = verify_lemma32(&grid, 100, 2024);
    // the three verdicts carry the measured extremes
    let ok = report.all_pass();
    // the generator guarantee: sampled maxima sit at the origin
    let mut rng = rand::SeedableRng::seed_from_u64(2024);
    for _ in 0..100 {
        let p = random_center_dominant_profile(&grid, &mut rng);
        let max = p.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(p.values()[0], max, "profile maximum away from the origin");
    }
    criterion(8, "rearrangement preserves mass, contracts gradient", ok, &report.text_table().replace('\n', " | "));
}

#[test]
fn c09_sign_monotonicity_over_random_instances() {
    use rand::Rng;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    let grid = RadialGrid::new(1, 20.0, 1200).unwrap();
    let cfg = SolverConfig { restarts: 2, ..SolverConfig::default() };

    let mut all_ok = true;
    let mut details = Vec::new();
    for k in 0..10 {
        // admissible threshold-zero families in one dimension
        let model = match k % 4 {
            0 => NonlinearityModel::single_power(rng.gen_range(2.5..5.5), Sign::Plus).unwrap(),
            1 => {
                let q = rng.gen_range(2.2..3.5);
                let p = rng.gen_range(q + 0.2..5.5);
                NonlinearityModel::power_sum(p, q, rng.gen_range(0.0..2.0)).unwrap()
            }
            2 => {
                let p = rng.gen_range(2.3..4.5);
                let q = rng.gen_range(p + 0.5..9.0);
                NonlinearityModel::power_difference(p, q).unwrap()
            }
            _ => cubic_quintic(),
        };
        let mass = rng.gen_range(0.5..4.0);
        let res = minimize(&model, &grid, mass, &cfg).unwrap();
        let check = sign_monotonicity_check(&res);
        let ok = res.converged && check.constant_sign && check.nonincreasing_modulus;
        all_ok &= ok;
        details.push(format!("{}@m={mass:.2}:{}", model.describe(), if ok { "ok" } else { "BAD" }));
    }
    criterion(9, "sign and monotonicity diagnostics", all_ok, &details.join(" "));
}

#[test]
fn c10_cross_solver_agreement() {
    let cross = cubic_quintic_cross();
    assert_eq!(cross.witness.status, ShootStatus::Decayed);
    // both solvers approximate the same soliton; heights align at the
    // origin by evenness, so the sup norm of the difference is direct
    let grid = cross.minimizer.profile.grid();
    let resampled = cross.witness.to_profile(grid);
    let mut sup = 0.0f64;
    for (a, b) in cross.minimizer.profile.values().iter().zip(resampled.values()) {
        sup = sup.max((a - b).abs());
    }
    let ok = sup <= 1e-3;
    criterion(
        10,
        "minimizer and shooting witness agree",
        ok,
        &format!("mu = {:.6}, sup distance {:.2e}", cross.minimizer.mu, sup),
    );
}
