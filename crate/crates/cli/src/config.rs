//! TOML run configuration.
//!
//! Physical and discretization parameters (alpha, the measure, grid, dt) have
//! no defaults. Solver knobs do.

use std::path::{Path, PathBuf};

use nonlocal_fronts::bounds::{log_grid, validate_sigma};
use nonlocal_fronts::front::{FrontOptions, RecursionConfig, DEFAULT_EPSILON};
use nonlocal_fronts::measure::{Measure, MeasureSpec};
use nonlocal_fronts::profile::{Grid, Profile};
use nonlocal_fronts::semiflow::{CertifyOptions, Nonlinearity, SemiflowConfig};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub recursion: RecursionConfig,
    #[serde(default)]
    pub front: FrontSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
    #[serde(default)]
    pub hypotheses: CertifyOptions,
    #[serde(default)]
    pub mgf: MgfSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub measure: MeasureSpec,
    pub nonlinearity: NonlinearitySpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearitySpec {
    Cubic { alpha: f64, lambda: f64 },
    Tabulated { alpha: f64, u: Vec<f64>, f: Vec<f64> },
}

impl NonlinearitySpec {
    pub fn build(&self) -> nonlocal_fronts::Result<Nonlinearity> {
        match self {
            NonlinearitySpec::Cubic { alpha, lambda } => Nonlinearity::cubic(*lambda, *alpha),
            NonlinearitySpec::Tabulated { alpha, u, f } => {
                Nonlinearity::tabulated(*alpha, u.clone(), f.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub dt: f64,
    /// Final time of `simulate` and of the direct speed measurement in `front`.
    pub horizon: f64,
    pub projection_tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrontSpec {
    pub epsilon: f64,
    pub slope_out: Option<f64>,
    /// Run the direct-simulation speed measurement as a cross-check.
    pub measure_speed: bool,
    pub speed_samples: usize,
}

impl Default for FrontSpec {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            slope_out: None,
            measure_speed: true,
            speed_samples: 41,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSpec {
    /// Defaults to `f'(alpha)/2`.
    pub sigma: Option<f64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
    pub refine_tol: f64,
    /// Also build both reduced sub-fronts and compare their speeds with the bounds.
    pub subfronts: bool,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        Self {
            sigma: None,
            lambda_min: 1e-3,
            lambda_max: 1e3,
            lambda_points: 241,
            refine_tol: 1e-10,
            subfronts: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Ramp { center: f64, width: f64 },
    Step { at: f64 },
    Constant { value: f64 },
}

impl InitialSpec {
    pub fn build(&self, grid: Grid) -> nonlocal_fronts::Result<Profile> {
        match *self {
            InitialSpec::Ramp { center, width } => Profile::ramp(grid, center, width),
            InitialSpec::Step { at } => Profile::step(grid, at),
            InitialSpec::Constant { value } => Profile::constant(grid, value),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSpec {
    pub initial: InitialSpec,
    /// Number of equally spaced snapshots after `t = 0`.
    pub snapshots: usize,
    /// Level whose crossing is tracked; defaults to alpha.
    pub level: Option<f64>,
}

impl Default for SimulateSpec {
    fn default() -> Self {
        Self {
            initial: InitialSpec::Ramp {
                center: 0.0,
                width: 4.0,
            },
            snapshots: 10,
            level: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MgfSpec {
    pub lambdas: Vec<f64>,
    /// Series order; picked automatically when absent.
    pub order: Option<usize>,
    pub tol: f64,
    /// Time step of the linear-flow cross-check.
    pub linear_dt: f64,
}

impl Default for MgfSpec {
    fn default() -> Self {
        Self {
            lambdas: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            order: None,
            tol: 1e-6,
            linear_dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: Option<PathBuf>,
    pub svg: bool,
}

/// Everything built from a validated [`RunConfig`].
pub struct Problem {
    pub cfg: RunConfig,
    pub f: Nonlinearity,
    pub measure: Measure,
    pub flow: SemiflowConfig,
    pub sigma: f64,
}

impl Problem {
    pub fn front_options(&self) -> FrontOptions {
        FrontOptions {
            epsilon: self.cfg.front.epsilon,
            slope_out: self.cfg.front.slope_out,
            recursion: self.cfg.recursion.clone(),
            speed_horizon: self.cfg.front.measure_speed.then_some(self.cfg.time.horizon),
            speed_samples: self.cfg.front.speed_samples,
        }
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        let b = &self.cfg.bounds;
        log_grid(b.lambda_min, b.lambda_max, b.lambda_points)
    }
}

pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(toml::from_str(&text)?)
}

/// Cross-field validation; every error here maps to exit code 2.
pub fn validate(cfg: RunConfig) -> anyhow::Result<Problem> {
    let f = cfg.problem.nonlinearity.build()?;
    let measure = cfg.problem.measure.build()?;
    let grid = Grid::spanning(cfg.grid.min, cfg.grid.max, cfg.grid.step)?;
    if !(cfg.time.horizon > 0.0) {
        anyhow::bail!("time.horizon must be positive");
    }
    let mut flow = SemiflowConfig::new(measure.clone(), f.clone(), grid, cfg.time.dt)?;
    if let Some(tol) = cfg.time.projection_tol {
        if !(tol > 0.0) {
            anyhow::bail!("time.projection_tol must be positive");
        }
        flow = flow.with_projection_tol(tol);
    }
    cfg.recursion.validate()?;
    if let (Some(lo), Some(hi)) = (cfg.recursion.level_lo, cfg.recursion.level_hi) {
        let a = f.alpha();
        if !(0.0 < lo && lo < a && a < hi && hi < 1.0) {
            anyhow::bail!("levels must satisfy 0 < level_lo < alpha < level_hi < 1");
        }
    }
    if !(cfg.front.epsilon > 0.0) {
        anyhow::bail!("front.epsilon must be positive");
    }
    let b = &cfg.bounds;
    if !(b.lambda_min > 0.0 && b.lambda_max > b.lambda_min && b.lambda_points >= 3) {
        anyhow::bail!("bounds lambda grid needs 0 < lambda_min < lambda_max and at least 3 points");
    }
    let sigma = b.sigma.unwrap_or(0.5 * f.derivative_at_alpha());
    validate_sigma(sigma, &f)?;
    if cfg.mgf.lambdas.is_empty() || !(cfg.mgf.linear_dt > 0.0) {
        anyhow::bail!("mgf needs at least one lambda and a positive linear_dt");
    }
    Ok(Problem {
        cfg,
        f,
        measure,
        flow,
        sigma,
    })
}
