//! Exponential-moment bounds on sub-front speeds.
//!
//! For a `0 -> alpha` front with speed `c_minus` and a `alpha -> 1` front with
//! speed `c_plus` (both in the `u = phi(x + c t)` convention):
//!
//! ```text
//! inf_{lam > 0} (M(lam) - 1 + sigma)/lam  <= -c_minus
//! inf_{lam > 0} (M(-lam) - 1 + sigma)/lam <=  c_plus
//! ```
//!
//! with `M(lam) = int e^{lam y} dmu(y)` and `0 < sigma < f'(alpha)`. A positive
//! sum of the two infima therefore forces `c_minus < c_plus`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::front::{classify_limits, measure_speed, FrontResult, Limit};
use crate::measure::Measure;
use crate::profile::{sub_front_transform, Direction, Profile, Side};
use crate::semiflow::{Nonlinearity, Reaction, SemiflowConfig};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
/// Largest `lam` probed when the sampled minimum sits at the upper end.
pub const LAMBDA_CAP: f64 = 1e8;

/// `(M(s lam) - 1 + sigma)/lam` with `s = +1` on the minus side, `-1` on the plus side.
pub fn bound_curve(m: &Measure, sigma: f64, side: Side, lam: f64) -> f64 {
    let s = match side {
        Side::Minus => 1.0,
        Side::Plus => -1.0,
    };
    let v = (m.exp_moment(s * lam) - 1.0 + sigma) / lam;
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedBoundQuery {
    pub measure: Measure,
    pub sigma: f64,
    pub side: Side,
    pub lambda_grid: Vec<f64>,
    pub refine_tol: f64,
}

impl SpeedBoundQuery {
    /// 241 log-spaced points on `[1e-3, 1e3]`.
    pub fn new(measure: Measure, sigma: f64, side: Side) -> Result<Self> {
        Self::with_grid(measure, sigma, side, log_grid(1e-3, 1e3, 241), 1e-10)
    }

    pub fn with_grid(
        measure: Measure,
        sigma: f64,
        side: Side,
        lambda_grid: Vec<f64>,
        refine_tol: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) {
            return invalid(format!("sigma must be positive, got {sigma}"));
        }
        if lambda_grid.len() < 3
            || lambda_grid[0] <= 0.0
            || lambda_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return invalid("lambda grid must be positive, strictly increasing, with at least 3 points");
        }
        if !(refine_tol > 0.0) {
            return invalid("refine_tol must be positive");
        }
        Ok(Self {
            measure,
            sigma,
            side,
            lambda_grid,
            refine_tol,
        })
    }

    pub fn curve(&self, lam: f64) -> f64 {
        bound_curve(&self.measure, self.sigma, self.side, lam)
    }
}

/// `n` points spaced evenly in `log(lam)` from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `sigma` must lie in `(0, f'(alpha))`.
pub fn validate_sigma(sigma: f64, f: &Nonlinearity) -> Result<()> {
    let d = f.derivative_at_alpha();
    if !(sigma > 0.0 && sigma < d) {
        return invalid(format!("sigma must lie in (0, f'(alpha) = {d}), got {sigma}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub lambda: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedBoundReport {
    pub side: Side,
    pub sigma: f64,
    pub value: f64,
    /// Minimizer; `None` when the infimum is only approached as `lam -> inf`.
    pub lambda_star: Option<f64>,
    pub attained: bool,
    pub curve: Vec<CurvePoint>,
}

fn golden_section(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    // on log(lam), which keeps brackets spanning decades well conditioned
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while (b - a) > tol {
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - GOLDEN * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + GOLDEN * (b - a);
            g2 = g(x2);
        }
    }
    if g1 <= g2 {
        (x1, g1)
    } else {
        (x2, g2)
    }
}

/// Grid scan, then golden-section refinement around the best sample.
pub fn infimum(q: &SpeedBoundQuery) -> SpeedBoundReport {
    let mut curve: Vec<CurvePoint> = q
        .lambda_grid
        .iter()
        .map(|&lambda| CurvePoint {
            lambda,
            value: q.curve(lambda),
        })
        .collect();
    let best = |c: &[CurvePoint]| {
        c.iter()
            .enumerate()
            .min_by(|a, b| a.1.value.total_cmp(&b.1.value))
            .map(|(i, _)| i)
            .expect("nonempty grid")
    };
    let mut i = best(&curve);
    // still decreasing at the top: keep doubling up to the cap
    while i == curve.len() - 1 && curve[i].lambda < LAMBDA_CAP {
        let lambda = 2.0 * curve[i].lambda;
        curve.push(CurvePoint {
            lambda,
            value: q.curve(lambda),
        });
        i = best(&curve);
    }
    let report = |value, lambda_star, attained, curve| SpeedBoundReport {
        side: q.side,
        sigma: q.sigma,
        value,
        lambda_star,
        attained,
        curve,
    };
    if i == curve.len() - 1 {
        // bounded moments in this direction: the curve decays like 1/lam towards 0
        let sign = match q.side {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        };
        let bounded = q.measure.directional_support(sign).map_or(true, |r| r <= 0.0);
        let value = if bounded { 0.0 } else { curve[i].value };
        return report(value, None, false, curve);
    }
    let lo = curve[i.saturating_sub(1)].lambda.ln();
    let hi = curve[i + 1].lambda.ln();
    let (t, v) = golden_section(|t| q.curve(t.exp()), lo, hi, q.refine_tol);
    let (lam, value) = if v <= curve[i].value {
        (t.exp(), v)
    } else {
        (curve[i].lambda, curve[i].value)
    };
    report(value, Some(lam), true, curve)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub minus: SpeedBoundReport,
    pub plus: SpeedBoundReport,
    /// Sum of the two infima.
    pub gap: f64,
    pub positive: bool,
}

/// Both infima and their sum. Needs a probability measure.
pub fn hypothesis7_gap(m: &Measure, sigma: f64) -> Result<GapReport> {
    if (m.total_mass() - 1.0).abs() > 1e-10 {
        return invalid(format!("measure must have mass 1, got {}", m.total_mass()));
    }
    let minus = infimum(&SpeedBoundQuery::new(m.clone(), sigma, Side::Minus)?);
    let plus = infimum(&SpeedBoundQuery::new(m.clone(), sigma, Side::Plus)?);
    let gap = minus.value + plus.value;
    Ok(GapReport {
        positive: gap > 0.0,
        gap,
        minus,
        plus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubFrontCheck {
    pub side: Side,
    pub speed: f64,
    pub bound: f64,
    /// `-c_minus - bound` or `c_plus - bound`; the inequality holds when `>= -tol`.
    pub slack: f64,
    pub holds: bool,
}

/// Compares a sub-front's speed with its exponential-moment bound.
pub fn check_subfront_speed_bound(
    front: &FrontResult,
    m: &Measure,
    sigma: f64,
    tol: f64,
) -> Result<SubFrontCheck> {
    let side = match front.limits {
        (Limit::Zero, Limit::Alpha) => Side::Minus,
        (Limit::Alpha, Limit::One) => Side::Plus,
        _ => return Err(Error::NotSubFront),
    };
    let bound = infimum(&SpeedBoundQuery::new(m.clone(), sigma, side)?).value;
    let slack = match side {
        Side::Minus => -front.c - bound,
        Side::Plus => front.c - bound,
    };
    Ok(SubFrontCheck {
        side,
        speed: front.c,
        bound,
        slack,
        holds: slack >= -tol,
    })
}

/// A sub-front built from the monostable reduction on one side.
///
/// The reduced equation is simulated from a steep ramp, its speed is measured
/// at level 1/2 and the final profile, centered at that level, is mapped back
/// with `R_-` or `R_+`.
pub fn reduced_subfront(
    f: &Nonlinearity,
    m: &Measure,
    flow: &SemiflowConfig,
    side: Side,
    horizon: f64,
    samples: usize,
) -> Result<FrontResult> {
    let alpha = f.alpha();
    let (reaction, measure) = match side {
        Side::Minus => (Reaction::MinusReduced(f.clone()), m.reflect()),
        Side::Plus => (Reaction::PlusReduced(f.clone()), m.clone()),
    };
    let reduced = SemiflowConfig::new(measure, reaction, *flow.grid(), flow.dt())?
        .with_projection_tol(flow.projection_tol());
    let u0 = Profile::ramp(*flow.grid(), 0.0, 1.0)?;
    let s = measure_speed(&u0, horizon, 0.5, samples, &reduced)?;
    let last = reduced.evolve(&u0, horizon)?;
    let center = last.level_crossing(0.5)?;
    let v = last.translate(-center).resample(flow.grid());
    let phi = sub_front_transform(&v, side, alpha, Direction::Forward)?;
    let c = match side {
        Side::Minus => -s.c,
        Side::Plus => s.c,
    };
    let limits = classify_limits(&phi, alpha, 1e-3)?;
    Ok(FrontResult {
        branch: side,
        c,
        phi,
        residual: f64::NAN,
        residual_2tau: f64::NAN,
        limits,
        accepted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dirac_zero_curve_is_sigma_over_lambda() {
        let m = Measure::dirac(0.0);
        for lam in [0.01, 1.0, 30.0] {
            assert_relative_eq!(bound_curve(&m, 0.1, Side::Minus, lam), 0.1 / lam, max_relative = 1e-14);
        }
    }

    #[test]
    fn dirac_one_single_value() {
        let v = bound_curve(&Measure::dirac(1.0), 0.1, Side::Minus, 1.0);
        assert_relative_eq!(v, std::f64::consts::E - 0.9, epsilon = 1e-12);
    }

    #[test]
    fn dirac_zero_infimum_not_attained() {
        let r = infimum(&SpeedBoundQuery::new(Measure::dirac(0.0), 0.1, Side::Minus).unwrap());
        assert!(!r.attained);
        assert_eq!(r.value, 0.0);
        assert!(r.lambda_star.is_none());
    }

    #[test]
    fn dirac_one_minimizer() {
        let r = infimum(&SpeedBoundQuery::new(Measure::dirac(1.0), 0.1, Side::Minus).unwrap());
        assert!(r.attained);
        // independent oracle: Newton on the stationarity condition e^lam (lam - 1) = -0.9
        let mut lam: f64 = 0.5;
        for _ in 0..50 {
            let g = lam.exp() * (lam - 1.0) + 0.9;
            lam -= g / (lam.exp() * lam);
        }
        let value = (lam.exp() - 0.9) / lam;
        assert_relative_eq!(r.lambda_star.unwrap(), lam, epsilon = 1e-4);
        assert_relative_eq!(r.value, value, epsilon = 1e-9);
    }

    #[test]
    fn vanishing_endpoint_density_stays_finite() {
        let m = Measure::triangle(0.0, 1.0, 0.05, 1.0).unwrap();
        assert!(!bound_curve(&m, 0.1, Side::Minus, 1e3).is_nan());
        let g = hypothesis7_gap(&m, 0.1).unwrap();
        assert!(g.gap.is_finite() && g.positive);
    }

    #[test]
    fn gap_examples() {
        let g0 = hypothesis7_gap(&Measure::dirac(0.0), 0.1).unwrap();
        assert_eq!(g0.gap, 0.0);
        assert!(!g0.positive);
        assert!(hypothesis7_gap(&Measure::dirac(1.0), 0.1).unwrap().positive);
        let sym = Measure::atomic(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let g = hypothesis7_gap(&sym, 0.05).unwrap();
        assert_relative_eq!(g.minus.value, g.plus.value, max_relative = 1e-9);
        assert_relative_eq!(g.gap, 2.0 * g.minus.value, max_relative = 1e-12);
        assert!(g.positive);
    }

    #[test]
    fn full_front_is_rejected() {
        let g = crate::profile::Grid::spanning(-5.0, 5.0, 0.1).unwrap();
        let front = FrontResult {
            branch: Side::Minus,
            c: 0.0,
            phi: Profile::ramp(g, 0.0, 1.0).unwrap(),
            residual: 0.0,
            residual_2tau: 0.0,
            limits: (Limit::Zero, Limit::One),
            accepted: true,
        };
        assert!(matches!(
            check_subfront_speed_bound(&front, &Measure::dirac(1.0), 0.05, 1e-3),
            Err(Error::NotSubFront)
        ));
    }
}
