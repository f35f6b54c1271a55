//! From pinned profiles `phi_n` to a traveling front `(c, phi)`.

use serde::Serialize;

use super::recursion::{FixedPoint, RecursionConfig, StepSpeeds};
use crate::error::{invalid, Error, Result};
use crate::profile::{sup_dist, GridFn, Profile, Side};
use crate::semiflow::SemiflowConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Limit {
    Zero,
    Alpha,
    One,
}

impl Limit {
    pub fn value(self, alpha: f64) -> f64 {
        match self {
            Limit::Zero => 0.0,
            Limit::Alpha => alpha,
            Limit::One => 1.0,
        }
    }
}

/// Snaps both tails to the nearest equilibrium within `tol`.
pub fn classify_limits(phi: &Profile, alpha: f64, tol: f64) -> Result<(Limit, Limit)> {
    let snap = |v: f64| {
        [Limit::Zero, Limit::Alpha, Limit::One]
            .into_iter()
            .map(|l| (l, (v - l.value(alpha)).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|(_, d)| *d <= tol)
            .map(|(l, _)| l)
            .ok_or(Error::NotSettled { tail: v })
    };
    Ok((snap(phi.left_tail())?, snap(phi.right_tail())?))
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub n: u32,
    pub iterations: usize,
    pub residual: f64,
    pub worst_decrease: f64,
    pub worst_sandwich: f64,
    pub y: f64,
    pub z: f64,
    pub y_over_n: f64,
    pub z_over_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionTrace {
    pub rows: Vec<TraceRow>,
    pub speeds: StepSpeeds,
    pub level_lo: f64,
    pub level_hi: f64,
    /// Slopes of `y_n`, `z_n` between consecutive entries of `n_list`.
    pub xi_minus_pairs: Vec<f64>,
    pub xi_plus_pairs: Vec<f64>,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    /// Spread of the last two speed estimates (0 with only two `n`).
    pub cauchy_spread: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrontResult {
    pub branch: Side,
    pub c: f64,
    pub phi: Profile,
    /// `sup |Q^tau[phi](x - c tau) - phi(x)|` on the window.
    pub residual: f64,
    /// Same at `2 tau`.
    pub residual_2tau: f64,
    pub limits: (Limit, Limit),
    pub accepted: bool,
}

/// `sup_{|x| <= window} |Q^t[phi](x - c t) - phi(x)|`.
pub fn traveling_residual(
    phi: &Profile,
    c: f64,
    t: f64,
    flow: &SemiflowConfig,
    window: f64,
) -> Result<f64> {
    let q = flow.evolve(phi, t)?;
    Ok(sup_dist(
        q.translate(c * t).as_grid_fn(),
        phi.as_grid_fn(),
        (-window, window),
    ))
}

/// `x -> phi_n(x + shift)` sampled on the flow grid.
fn recentered(phi: &Profile, shift: f64, flow: &SemiflowConfig) -> GridFn {
    phi.translate(-shift).resample(flow.grid()).into_grid_fn()
}

/// Removes the `1/n` term: `(n2 f2 - n1 f1)/(n2 - n1)`, then projects onto profiles.
fn richardson(n1: f64, f1: &GridFn, n2: f64, f2: &GridFn) -> Profile {
    let w = |a: f64, b: f64| (n2 * b - n1 * a) / (n2 - n1);
    let values = f1.values.iter().zip(&f2.values).map(|(&a, &b)| w(a, b)).collect();
    let g = GridFn {
        grid: f1.grid,
        values,
        left_tail: w(f1.left_tail, f2.left_tail),
        right_tail: w(f1.right_tail, f2.right_tail),
    };
    Profile::project(g).0
}

/// Speeds and candidate fronts from converged `phi_n` (sorted by `n`, at least two).
pub fn extract_front(
    points: &[FixedPoint],
    speeds: &StepSpeeds,
    levels: (f64, f64),
    alpha: f64,
    cfg: &RecursionConfig,
    flow: &SemiflowConfig,
) -> Result<(RecursionTrace, FrontResult, FrontResult)> {
    if points.len() < 2 {
        return invalid("front extraction needs at least two values of n");
    }
    let (level_lo, level_hi) = levels;
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let y = p.phi.level_crossing(level_lo)?;
        let z = p.phi.level_crossing(level_hi)?;
        let n = p.n as f64;
        rows.push(TraceRow {
            n: p.n,
            iterations: p.iterations,
            residual: p.residual,
            worst_decrease: p.worst_decrease,
            worst_sandwich: p.worst_sandwich,
            y,
            z,
            y_over_n: y / n,
            z_over_n: z / n,
        });
    }
    let slopes = |f: fn(&TraceRow) -> f64| -> Vec<f64> {
        rows.windows(2)
            .map(|w| (f(&w[1]) - f(&w[0])) / (w[1].n as f64 - w[0].n as f64))
            .collect()
    };
    let xi_minus_pairs = slopes(|r| r.y);
    let xi_plus_pairs = slopes(|r| r.z);
    let xi_minus = *xi_minus_pairs.last().expect("two rows");
    let xi_plus = *xi_plus_pairs.last().expect("two rows");
    let c_minus = speeds.speed(xi_minus);
    let c_plus = speeds.speed(xi_plus);
    let spread = |xs: &[f64]| -> f64 {
        match xs {
            [.., a, b] => (speeds.speed(*a) - speeds.speed(*b)).abs(),
            _ => 0.0,
        }
    };
    let cauchy_spread = spread(&xi_minus_pairs).max(spread(&xi_plus_pairs));
    if cauchy_spread > cfg.cauchy_tol {
        return Err(Error::NotCauchy {
            spread: cauchy_spread,
            tol: cfg.cauchy_tol,
        });
    }

    let (a, b) = (&points[points.len() - 2], &points[points.len() - 1]);
    let (ra, rb) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
    let branch = |side: Side, c: f64, sa: f64, sb: f64| -> Result<FrontResult> {
        let fa = recentered(&a.phi, sa, flow);
        let fb = recentered(&b.phi, sb, flow);
        let phi = richardson(a.n as f64, &fa, b.n as f64, &fb);
        let limits = classify_limits(&phi, alpha, cfg.limit_tol)
            .unwrap_or((Limit::Alpha, Limit::Alpha));
        let residual = traveling_residual(&phi, c, cfg.tau, flow, cfg.window)?;
        let residual_2tau = traveling_residual(&phi, c, 2.0 * cfg.tau, flow, cfg.window)?;
        let accepted = limits == (Limit::Zero, Limit::One)
            && residual < cfg.accept_tol
            && residual_2tau < cfg.accept_tol;
        Ok(FrontResult {
            branch: side,
            c,
            phi,
            residual,
            residual_2tau,
            limits,
            accepted,
        })
    };
    let minus = branch(Side::Minus, c_minus, ra.y, rb.y)?;
    let plus = branch(Side::Plus, c_plus, ra.z, rb.z)?;
    let trace = RecursionTrace {
        rows,
        speeds: *speeds,
        level_lo,
        level_hi,
        xi_minus_pairs,
        xi_plus_pairs,
        xi_minus,
        xi_plus,
        c_minus,
        c_plus,
        cauchy_spread,
    };
    Ok((trace, minus, plus))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpeedMeasurement {
    pub c: f64,
    pub times: Vec<f64>,
    pub crossings: Vec<f64>,
}

/// Direct simulation: least-squares slope of the `level` crossing over `[T/2, T]`,
/// negated so that `u(t, x) = phi(x + c t)`.
pub fn measure_speed(
    u0: &Profile,
    horizon: f64,
    level: f64,
    samples: usize,
    flow: &SemiflowConfig,
) -> Result<SpeedMeasurement> {
    if !(horizon > 0.0) || samples < 2 {
        return invalid("measure_speed needs a positive horizon and at least two samples");
    }
    let times: Vec<f64> = (0..samples)
        .map(|k| 0.5 * horizon * (1.0 + k as f64 / (samples - 1) as f64))
        .collect();
    let grid = *flow.grid();
    let margin = 0.1 * (grid.max() - grid.min);
    let (lo, hi) = (grid.min + margin, grid.max() - margin);
    let mut crossings = Vec::with_capacity(samples);
    for (p, _) in flow.evolve_snapshots(u0, &times)? {
        let x = p.level_crossing(level)?;
        if x < lo || x > hi {
            return Err(Error::DomainTooSmall { crossing: x, lo, hi });
        }
        crossings.push(x);
    }
    let nt = samples as f64;
    let tm = times.iter().sum::<f64>() / nt;
    let xm = crossings.iter().sum::<f64>() / nt;
    let sxy: f64 = times
        .iter()
        .zip(&crossings)
        .map(|(t, x)| (t - tm) * (x - xm))
        .sum();
    let sxx: f64 = times.iter().map(|t| (t - tm).powi(2)).sum();
    Ok(SpeedMeasurement {
        c: -sxy / sxx,
        times,
        crossings,
    })
}
