//! Run configuration: a single JSON document plus CLI overrides.
//!
//! Every flag mirrors a config key; the fully resolved configuration
//! (defaults included) is echoed to `manifest.json` in the output
//! directory so that a run is reproducible from one artifact.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use groundstate::minimizer::InitStrategy;
use groundstate::nonlinearity::Sign;
use groundstate::radial::RadialProfile;
use groundstate::{Grid64, Model64, ShootConfig64, SolverConfig64};

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Optional; the CLI subcommand always wins.
    pub command: Option<String>,
    pub model: Option<ModelSpec>,
    pub dim: Option<usize>,
    pub mass: Option<f64>,
    pub masses: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub mu_list: Option<Vec<f64>>,
    pub sign: Option<String>,
    pub height: Option<f64>,
    pub grid: Option<GridSpec>,
    pub solver: Option<SolverSpec>,
    pub shoot: Option<ShootSpec>,
    pub bracket: Option<[f64; 2]>,
    pub tol_mass: Option<f64>,
    pub delta: Option<f64>,
    pub mass_target: Option<f64>,
    pub suite: Option<String>,
    pub baselines: Option<String>,
    pub output_dir: Option<String>,
    pub warm_start: Option<bool>,
    pub workers: Option<usize>,
    pub tolerances: Option<TolSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    #[serde(rename = "A")]
    pub coeff: Option<f64>,
    pub sign: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_max: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<InitSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpec {
    /// "gaussian", "random-bump" or "file".
    pub kind: String,
    pub width: Option<f64>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSpec {
    pub step: Option<f64>,
    pub domain_factor: Option<f64>,
    pub decay_threshold: Option<f64>,
    pub blowup_factor: Option<f64>,
    pub refine_height: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub thm18: Option<f64>,
    pub thm14: Option<f64>,
    pub lemma31_phase: Option<f64>,
    pub lemma41: Option<f64>,
}

/// Fully resolved configuration, serialized into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: String,
    pub model: String,
    pub dim: usize,
    pub mass: Option<f64>,
    pub masses: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub mu_list: Option<Vec<f64>>,
    pub sign: Option<String>,
    pub height: Option<f64>,
    pub grid_r_max: f64,
    pub grid_intervals: usize,
    pub dt: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub init: String,
    pub shoot_step: f64,
    pub shoot_domain_factor: f64,
    pub shoot_decay_threshold: f64,
    pub shoot_blowup_factor: f64,
    pub shoot_refine_height: bool,
    pub bracket: Option<[f64; 2]>,
    pub tol_mass: f64,
    pub delta: f64,
    pub mass_target: Option<f64>,
    pub suite: Option<String>,
    pub baselines: Option<String>,
    pub output_dir: String,
    pub warm_start: bool,
    pub workers: Option<usize>,
    pub tol_thm18: f64,
    pub tol_thm14: f64,
    pub tol_lemma31_phase: f64,
    pub tol_lemma41: f64,
}

pub fn parse_sign(s: &str) -> Result<Sign> {
    match s {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        other => bail!("unknown sign {other:?}; use + or -"),
    }
}

/// Parse a model descriptor like `single-power:p=4,sign=+` or the block
/// from the config file.
pub fn parse_model(desc: &str) -> Result<Model64> {
    let (family, rest) = match desc.split_once(':') {
        Some((f, r)) => (f, r),
        None => (desc, ""),
    };
    let mut p = None;
    let mut q = None;
    let mut coeff = None;
    let mut sign = Sign::Plus;
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("bad model parameter {kv:?}; expected key=value"))?;
        match k {
            "p" => p = Some(v.parse::<f64>().context("p")?),
            "q" => q = Some(v.parse::<f64>().context("q")?),
            "A" | "a" => coeff = Some(v.parse::<f64>().context("A")?),
            "sign" => sign = parse_sign(v)?,
            other => bail!("unknown model parameter {other:?}"),
        }
    }
    build_model(family, p, q, coeff, sign)
}

pub fn model_from_spec(spec: &ModelSpec) -> Result<Model64> {
    let sign = match &spec.sign {
        Some(s) => parse_sign(s)?,
        None => Sign::Plus,
    };
    build_model(&spec.family, spec.p, spec.q, spec.coeff, sign)
}

fn build_model(family: &str, p: Option<f64>, q: Option<f64>, coeff: Option<f64>, sign: Sign) -> Result<Model64> {
    let model = match family {
        "single-power" => Model64::single_power(p.context("single-power needs p")?, sign)?,
        "power-sum" => Model64::power_sum(
            p.context("power-sum needs p")?,
            q.context("power-sum needs q")?,
            coeff.unwrap_or(1.0),
        )?,
        "power-difference" => Model64::power_difference(
            p.context("power-difference needs p")?,
            q.context("power-difference needs q")?,
        )?,
        "cubic-quintic" => Model64::cubic_quintic(),
        other => bail!("unknown model family {other:?}"),
    };
    Ok(model)
}

impl Resolved {
    pub fn grid(&self) -> Result<Grid64> {
        Ok(Grid64::new(self.dim, self.grid_r_max, self.grid_intervals)?)
    }

    pub fn model(&self) -> Result<Model64> {
        parse_model(&self.model)
    }

    pub fn solver(&self) -> Result<SolverConfig64> {
        let init = match self.init.split_once(':') {
            None => match self.init.as_str() {
                "gaussian" => InitStrategy::Gaussian { width: 1.0 },
                "random-bump" => InitStrategy::RandomBump,
                other => bail!("unknown init {other:?}"),
            },
            Some(("gaussian", w)) => InitStrategy::Gaussian { width: w.parse().context("width")? },
            Some(("file", path)) => {
                let file = std::fs::File::open(path)
                    .with_context(|| format!("init profile {path}"))?;
                let profile =
                    RadialProfile::read_csv(self.dim, std::io::BufReader::new(file))?;
                InitStrategy::Profile(profile)
            }
            Some((other, _)) => bail!("unknown init {other:?}"),
        };
        Ok(SolverConfig64 {
            dt: self.dt,
            tol: self.tol,
            max_iter: self.max_iter,
            restarts: self.restarts,
            seed: self.seed,
            init,
            blowup_guard: 1e8,
        })
    }

    pub fn shoot(&self) -> ShootConfig64 {
        ShootConfig64 {
            step: self.shoot_step,
            domain_factor: self.shoot_domain_factor,
            decay_threshold: self.shoot_decay_threshold,
            blowup_factor: self.shoot_blowup_factor,
            refine_height: self.shoot_refine_height,
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(&self.output_dir)
    }
}

pub struct Overrides {
    pub model: Option<String>,
    pub dim: Option<usize>,
    pub mass: Option<f64>,
    pub masses: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub mu_list: Option<Vec<f64>>,
    pub sign: Option<String>,
    pub height: Option<f64>,
    pub grid_r: Option<f64>,
    pub grid_m: Option<usize>,
    pub dt: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub init: Option<String>,
    pub step: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub tol_mass: Option<f64>,
    pub delta: Option<f64>,
    pub mass_target: Option<f64>,
    pub suite: Option<String>,
    pub baselines: Option<String>,
    pub out: Option<String>,
    pub warm_start: bool,
}

/// Defaults <- config file <- CLI flags.
pub fn resolve(command: &str, file: Option<FileConfig>, ov: Overrides) -> Result<Resolved> {
    let file = file.unwrap_or_default();

    let model = match (&ov.model, &file.model) {
        (Some(m), _) => m.clone(),
        (None, Some(spec)) => {
            // normalize through the constructor so the manifest echoes a
            // canonical descriptor
            model_from_spec(spec)?.describe()
        }
        (None, None) => bail!("a model is required (flag --model or config key \"model\")"),
    };
    // validate early so bad descriptors are usage errors
    parse_model(&model)?;

    let dim = ov.dim.or(file.dim).unwrap_or(1);
    if dim == 0 {
        bail!("dimension must be at least 1");
    }

    let grid = file.grid.clone();
    let grid_r_max = ov.grid_r.or(grid.as_ref().map(|g| g.r_max)).unwrap_or(20.0);
    let grid_intervals =
        ov.grid_m.or(grid.as_ref().map(|g| g.intervals)).unwrap_or(if dim == 1 { 4000 } else { 1500 });

    let solver = file.solver.clone();
    let s = |f: fn(&SolverSpec) -> Option<f64>| solver.as_ref().and_then(f);
    let init = ov
        .init
        .or(solver.as_ref().and_then(|s| {
            s.init.as_ref().map(|i| match (&i.kind[..], i.width, &i.path) {
                ("gaussian", Some(w), _) => format!("gaussian:{w}"),
                ("file", _, Some(p)) => format!("file:{p}"),
                (k, _, _) => k.to_string(),
            })
        }))
        .unwrap_or_else(|| "gaussian:1".into());

    let shoot = file.shoot.clone();
    let tols = file.tolerances.clone().unwrap_or_default();

    let output_dir = ov
        .out
        .or(file.output_dir.clone())
        .or_else(|| std::env::var("GROUNDSTATE_OUT").ok())
        .unwrap_or_else(|| "out".into());

    Ok(Resolved {
        command: command.to_string(),
        model,
        dim,
        mass: ov.mass.or(file.mass),
        masses: ov.masses.or(file.masses.clone()),
        mu: ov.mu.or(file.mu),
        mu_list: ov.mu_list.or(file.mu_list.clone()),
        sign: ov.sign.or(file.sign.clone()),
        height: ov.height.or(file.height),
        grid_r_max,
        grid_intervals,
        dt: ov.dt.or(s(|x| x.dt)).unwrap_or(0.1),
        tol: ov.tol.or(s(|x| x.tol)).unwrap_or(1e-8),
        max_iter: ov.max_iter.or(solver.as_ref().and_then(|x| x.max_iter)).unwrap_or(20_000),
        restarts: ov.restarts.or(solver.as_ref().and_then(|x| x.restarts)).unwrap_or(4),
        seed: ov.seed.or(solver.as_ref().and_then(|x| x.seed)).unwrap_or(42),
        init,
        shoot_step: ov.step.or(shoot.as_ref().and_then(|x| x.step)).unwrap_or(1e-3),
        shoot_domain_factor: shoot.as_ref().and_then(|x| x.domain_factor).unwrap_or(40.0),
        shoot_decay_threshold: shoot.as_ref().and_then(|x| x.decay_threshold).unwrap_or(1e-6),
        shoot_blowup_factor: shoot.as_ref().and_then(|x| x.blowup_factor).unwrap_or(10.0),
        shoot_refine_height: shoot.as_ref().and_then(|x| x.refine_height).unwrap_or(true),
        bracket: ov.bracket.or(file.bracket),
        tol_mass: ov.tol_mass.or(file.tol_mass).unwrap_or(1e-2),
        delta: ov.delta.or(file.delta).unwrap_or(0.5),
        mass_target: ov.mass_target.or(file.mass_target),
        suite: ov.suite.or(file.suite.clone()),
        baselines: ov.baselines.or(file.baselines.clone()),
        output_dir,
        warm_start: ov.warm_start || file.warm_start.unwrap_or(false),
        workers: file.workers,
        tol_thm18: tols.thm18.unwrap_or(2e-3),
        tol_thm14: tols.thm14.unwrap_or(1e-6),
        tol_lemma31_phase: tols.lemma31_phase.unwrap_or(1e-6),
        tol_lemma41: tols.lemma41.unwrap_or(1e-3),
    })
}

pub fn load_file(path: &std::path::Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let cfg: FileConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {} (unknown keys are rejected)", path.display()))?;
    Ok(cfg)
}
