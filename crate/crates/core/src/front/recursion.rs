//! The pinned fixed-point recursion `Q_n = Q^tau o A_n`.
//!
//! `A_n[u] = u o rho_n` with `rho_n(x) = ((n + D)/n)(x - m)`, where `m` and `D`
//! are the midpoint and half width of the per-step speed bracket. Rescaling
//! breaks translation invariance, so monotone iteration from the shifted
//! sub-solution converges to a pinned profile `phi_n` whose position encodes
//! the front speed.

use serde::{Deserialize, Serialize};

use super::subsuper::SubSuperPair;
use crate::error::{invalid, Error, Result};
use crate::profile::{leq, max_excess, sup_dist, AffineMap, Profile};
use crate::semiflow::SemiflowConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecursionConfig {
    pub n_list: Vec<u32>,
    pub tau: f64,
    /// Target distance to the fixed point; also bounds the returned residual.
    pub fixpoint_tol: f64,
    pub max_iters: usize,
    /// Allowed violation of the sandwich and of iterate monotonicity.
    pub order_tol: f64,
    /// Tail margin used for the default crossing levels; `None` means `1/eps`.
    pub n0: Option<f64>,
    pub level_lo: Option<f64>,
    pub level_hi: Option<f64>,
    /// Largest spread between the last two speed estimates across `n_list`.
    pub cauchy_tol: f64,
    /// Traveling residual below which a front is accepted.
    pub accept_tol: f64,
    /// Distance within which a tail counts as settled at 0, alpha or 1.
    pub limit_tol: f64,
    /// Half width of the window on which traveling residuals are measured.
    pub window: f64,
}

impl Default for RecursionConfig {
    fn default() -> Self {
        Self {
            n_list: vec![20, 40, 80, 160],
            tau: 1.0,
            fixpoint_tol: 1e-7,
            max_iters: 50_000,
            order_tol: 1e-8,
            n0: None,
            level_lo: None,
            level_hi: None,
            cauchy_tol: 5e-3,
            accept_tol: 1e-3,
            limit_tol: 1e-3,
            window: 15.0,
        }
    }
}

impl RecursionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty()
            || self.n_list[0] == 0
            || self.n_list.windows(2).any(|w| w[1] <= w[0])
        {
            return invalid("n_list must be strictly increasing positive integers");
        }
        if !(self.tau > 0.0) || !(self.fixpoint_tol > 0.0) || self.max_iters == 0 {
            return invalid("tau, fixpoint_tol and max_iters must be positive");
        }
        if !(self.window > 0.0) {
            return invalid("window must be positive");
        }
        Ok(())
    }

    /// Crossing levels: `((psi_upper(-N0) + alpha)/2, (alpha + psi_lower(N0))/2)` unless overridden.
    pub fn levels(&self, pair: &SubSuperPair) -> Result<(f64, f64)> {
        let a = pair.alpha;
        let n0 = self.n0.unwrap_or(1.0 / pair.epsilon);
        let lo = self
            .level_lo
            .unwrap_or_else(|| 0.5 * (pair.upper_exact(-n0) + a));
        let hi = self
            .level_hi
            .unwrap_or_else(|| 0.5 * (a + pair.lower_exact(n0)));
        if !(0.0 < lo && lo < a && a < hi && hi < 1.0) {
            return invalid(format!(
                "levels must satisfy 0 < {lo} < alpha = {a} < {hi} < 1"
            ));
        }
        Ok((lo, hi))
    }
}

/// Per-step speeds certified on the grid: `psi_lower <= Q^tau[psi_lower](. - lower tau)`
/// and `Q^tau[psi_upper](. - upper tau) <= psi_upper`.
///
/// Both displacements are even multiples of the grid step, so `m`, `D` and the
/// `n + D` shifts stay on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepSpeeds {
    pub lower: f64,
    pub upper: f64,
    pub tau: f64,
}

impl StepSpeeds {
    /// `m = (lower + upper) tau / 2`.
    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper) * self.tau
    }

    /// `D = (upper - lower) tau / 2`.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower) * self.tau
    }

    /// Front speed from the limit `xi` of the crossings over `n`.
    pub fn speed(&self, xi: f64) -> f64 {
        (self.mid() - self.half_width() * xi) / self.tau
    }
}

fn search_boundary(ok: impl Fn(i64) -> bool, want_largest: bool, limit: i64) -> Option<i64> {
    // find one k where ok holds and one where it fails, then bisect
    let dir: i64 = if want_largest { -1 } else { 1 };
    let mut good = 0_i64;
    let mut step = 1_i64;
    while !ok(good) {
        good = dir * step;
        step *= 2;
        if good.abs() > limit {
            return None;
        }
    }
    let mut bad = good - dir;
    let mut step = 1_i64;
    while ok(bad) {
        bad = good - dir * step;
        step *= 2;
        if bad.abs() > 4 * limit {
            return None;
        }
    }
    while (bad - good).abs() > 1 {
        let mid = (bad + good).div_euclid(2);
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

/// Tightest even grid displacements for which the sampled pair is still a
/// sub- and super-solution of `Q^tau`.
pub fn certify_step_speeds(
    pair: &SubSuperPair,
    flow: &SemiflowConfig,
    tau: f64,
) -> Result<StepSpeeds> {
    let grid = *flow.grid();
    let h = grid.step;
    let lower = pair.psi_lower.resample(&grid);
    let upper = pair.psi_upper.resample(&grid);
    let ql = flow.evolve(&lower, tau)?;
    let qu = flow.evolve(&upper, tau)?;
    let limit = grid.len as i64;
    let k_lo = search_boundary(
        |k| leq(&lower, &ql.translate(k as f64 * h), 0.0),
        true,
        limit,
    )
    .ok_or_else(|| Error::Invalid("no sub-solution speed found on this grid".into()))?;
    let k_hi = search_boundary(
        |k| leq(&qu.translate(k as f64 * h), &upper, 0.0),
        false,
        limit,
    )
    .ok_or_else(|| Error::Invalid("no super-solution speed found on this grid".into()))?;
    let mut k_lo = k_lo - k_lo.rem_euclid(2);
    let mut k_hi = k_hi + k_hi.rem_euclid(2);
    if k_hi - k_lo < 2 {
        k_hi += 2;
        k_lo -= 2;
    }
    Ok(StepSpeeds {
        lower: k_lo as f64 * h / tau,
        upper: k_hi as f64 * h / tau,
        tau,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPoint {
    pub n: u32,
    pub phi: Profile,
    pub iterations: usize,
    /// `sup_dist(Q_n[phi], phi)`.
    pub residual: f64,
    /// Largest decrease between consecutive iterates (0 for a monotone run).
    pub worst_decrease: f64,
    /// Largest violation of the sandwich `psi_lower_n <= u <= psi_upper_n`.
    pub worst_sandwich: f64,
    /// Largest summed projection correction of a single `Q^tau` call.
    pub projection_budget: f64,
    /// Step sizes `sup_dist(u_{k+1}, u_k)`.
    pub history: Vec<f64>,
}

/// Iterates `Q_n` from the shifted sub-solution until the estimated distance
/// to the fixed point drops below `fixpoint_tol`.
///
/// The iteration contracts by roughly `n/(n + D)` per step, so the stopping
/// rule is `sup_dist(u_{k+1}, u_k) < fixpoint_tol * D/(n + D)`.
pub fn perturbed_fixed_point(
    n: u32,
    pair: &SubSuperPair,
    speeds: &StepSpeeds,
    cfg: &RecursionConfig,
    flow: &SemiflowConfig,
) -> Result<FixedPoint> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let grid = *flow.grid();
    let (m, d) = (speeds.mid(), speeds.half_width());
    let shift = n as f64 + d;
    let lower_n = pair.psi_lower.translate(shift).resample(&grid);
    let upper_n = pair.psi_upper.translate(-shift).resample(&grid);
    let rho = AffineMap::new(shift / n as f64, m)?;
    let q_n = |u: &Profile| -> Result<(Profile, f64)> {
        flow.evolve_logged(&u.affine_precompose_on(&rho, &grid), cfg.tau)
    };
    let whole = (f64::NEG_INFINITY, f64::INFINITY);
    let stop = cfg.fixpoint_tol * d / shift;

    let mut u = lower_n.clone();
    let mut out = FixedPoint {
        n,
        phi: u.clone(),
        iterations: 0,
        residual: f64::INFINITY,
        worst_decrease: 0.0,
        worst_sandwich: 0.0,
        projection_budget: 0.0,
        history: Vec::new(),
    };
    for k in 1..=cfg.max_iters {
        let (next, budget) = q_n(&u)?;
        out.projection_budget = out.projection_budget.max(budget);
        let decrease = max_excess(u.as_grid_fn(), next.as_grid_fn()).max(0.0);
        let sandwich = max_excess(lower_n.as_grid_fn(), next.as_grid_fn())
            .max(max_excess(next.as_grid_fn(), upper_n.as_grid_fn()))
            .max(0.0);
        out.worst_decrease = out.worst_decrease.max(decrease);
        out.worst_sandwich = out.worst_sandwich.max(sandwich);
        if decrease > cfg.order_tol {
            return Err(Error::OrderBroken {
                iteration: k,
                detail: format!("iterate decreased by {decrease:e} (n = {n})"),
            });
        }
        if sandwich > cfg.order_tol {
            return Err(Error::OrderBroken {
                iteration: k,
                detail: format!("sandwich violated by {sandwich:e} (n = {n})"),
            });
        }
        let step = sup_dist(next.as_grid_fn(), u.as_grid_fn(), whole);
        out.history.push(step);
        u = next;
        if step < stop {
            let (again, _) = q_n(&u)?;
            out.residual = sup_dist(again.as_grid_fn(), u.as_grid_fn(), whole);
            out.iterations = k;
            out.phi = u;
            return Ok(out);
        }
    }
    let last = out.history.last().copied().unwrap_or(f64::NAN);
    Err(Error::NotConverged {
        n,
        iterations: cfg.max_iters,
        last,
        history: out.history,
    })
}
