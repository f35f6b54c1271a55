//! Sub/super-solutions, the pinned fixed-point recursion and front extraction.

mod extract;
mod recursion;
mod subsuper;

pub use extract::{
    classify_limits, extract_front, measure_speed, traveling_residual, FrontResult, Limit,
    RecursionTrace, SpeedMeasurement, TraceRow,
};
pub use recursion::{
    certify_step_speeds, perturbed_fixed_point, FixedPoint, RecursionConfig, StepSpeeds,
};
pub use subsuper::{
    build_sub_super, build_sub_super_auto, speed_violation, RampFn, SubSuperPair,
    DEFAULT_EPSILON, MAX_HALVINGS, RESIDUAL_POINTS, RESIDUAL_TIMES,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::measure::Measure;
use crate::profile::Profile;
use crate::semiflow::{extend_nonlinearity, Nonlinearity, SemiflowConfig};

/// Everything the front pipeline produces.
#[derive(Debug, Clone, Serialize)]
pub struct FrontReport {
    pub pair: PairSummary,
    pub trace: RecursionTrace,
    pub minus: FrontResult,
    pub plus: FrontResult,
    /// Branch reported as the front: the accepted one with the smaller residual.
    pub primary: Option<FrontResult>,
    /// Speed from direct simulation, when requested.
    pub measured: Option<SpeedMeasurement>,
}

impl FrontReport {
    /// The reported speed: primary branch if any, else the minus branch.
    pub fn speed(&self) -> f64 {
        self.primary.as_ref().unwrap_or(&self.minus).c
    }
}

/// The scalar part of a [`SubSuperPair`].
#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub epsilon: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub delta: f64,
    pub c_const: f64,
    pub residual_lower: f64,
    pub residual_upper: f64,
    pub test_points: usize,
}

impl From<&SubSuperPair> for PairSummary {
    fn from(p: &SubSuperPair) -> Self {
        Self {
            epsilon: p.epsilon,
            c_lower: p.c_lower,
            c_upper: p.c_upper,
            delta: p.delta,
            c_const: p.c_const,
            residual_lower: p.residual_lower,
            residual_upper: p.residual_upper,
            test_points: p.test_points,
        }
    }
}

/// Knobs of [`find_front`] beyond the recursion itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontOptions {
    pub epsilon: f64,
    /// Outer slope of the extended nonlinearity; `None` uses the Lipschitz constant of `f`.
    pub slope_out: Option<f64>,
    pub recursion: RecursionConfig,
    /// Horizon of the direct-simulation cross-check; `None` skips it.
    pub speed_horizon: Option<f64>,
    pub speed_samples: usize,
}

impl Default for FrontOptions {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            slope_out: None,
            recursion: RecursionConfig::default(),
            speed_horizon: None,
            speed_samples: 41,
        }
    }
}

/// Extended nonlinearity, sub/super pair, all `n` in parallel, extraction.
pub fn find_front(
    f: &Nonlinearity,
    m: &Measure,
    flow: &SemiflowConfig,
    opt: &FrontOptions,
) -> Result<FrontReport> {
    let cfg = &opt.recursion;
    cfg.validate()?;
    let fhat = extend_nonlinearity(f, opt.slope_out.unwrap_or(f.lipschitz()))?;
    let pair = build_sub_super_auto(&fhat, m, opt.epsilon, *flow.grid())?;
    let levels = cfg.levels(&pair)?;
    let speeds = certify_step_speeds(&pair, flow, cfg.tau)?;
    let points: Vec<FixedPoint> = cfg
        .n_list
        .par_iter()
        .map(|&n| perturbed_fixed_point(n, &pair, &speeds, cfg, flow))
        .collect::<Result<_>>()?;
    let (trace, minus, plus) = extract_front(&points, &speeds, levels, f.alpha(), cfg, flow)?;
    let primary = [&minus, &plus]
        .into_iter()
        .filter(|r| r.accepted)
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .cloned();
    let measured = match opt.speed_horizon {
        Some(t) => {
            let u0 = Profile::ramp(*flow.grid(), 0.0, 4.0)?;
            Some(measure_speed(&u0, t, f.alpha(), opt.speed_samples, flow)?)
        }
        None => None,
    };
    Ok(FrontReport {
        pair: (&pair).into(),
        trace,
        minus,
        plus,
        primary,
        measured,
    })
}
