//! Explicit sub- and super-solutions built from a smooth ramp.
//!
//! With `rho` a `C^1` ramp (0 below 0, 1 above 1), the functions
//! `rho(eps x - t/eps) - (1 - alpha)/4` and `rho(eps x + t/eps + 1) + alpha/4`
//! are sub- and super-solutions of the extended equation once `eps` is small.
//! Both travel rigidly, with speeds `-1/eps^2` and `+1/eps^2` in the
//! `u = phi(x + c t)` convention. The residual inequalities are checked
//! directly on a space-time grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::profile::{leq, Grid, Profile};
use crate::semiflow::{ExtendedNonlinearity, SemiflowConfig};

/// Smoothstep ramp `z^2 (3 - 2z)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampFn {
    pub epsilon: f64,
}

impl RampFn {
    pub fn new(epsilon: f64) -> Self {
        Self { epsilon }
    }

    #[inline]
    pub fn rho(z: f64) -> f64 {
        if z <= 0.0 {
            0.0
        } else if z >= 1.0 {
            1.0
        } else {
            z * z * (3.0 - 2.0 * z)
        }
    }

    #[inline]
    pub fn rho_prime(z: f64) -> f64 {
        if z <= 0.0 || z >= 1.0 {
            0.0
        } else {
            6.0 * z * (1.0 - z)
        }
    }
}

/// Grid sizes of the residual test.
pub const RESIDUAL_TIMES: usize = 64;
pub const RESIDUAL_POINTS: usize = 200;

/// Default first `eps` and the number of halvings tried by [`build_sub_super_auto`].
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const MAX_HALVINGS: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct SubSuperPair {
    pub epsilon: f64,
    pub alpha: f64,
    /// `max(rho(eps x) - (1 - alpha)/4, 0)`.
    pub psi_lower: Profile,
    pub c_lower: f64,
    /// `min(rho(eps x + 1) + alpha/4, 1)`.
    pub psi_upper: Profile,
    pub c_upper: f64,
    pub delta: f64,
    pub c_const: f64,
    /// Smallest value of `mu * u - u + f(u) - u_t` for the sub-solution (must be >= 0).
    pub residual_lower: f64,
    /// Smallest value of `u_t - (mu * u - u + f(u))` for the super-solution (must be >= 0).
    pub residual_upper: f64,
    pub test_points: usize,
}

impl SubSuperPair {
    pub fn lower_exact(&self, x: f64) -> f64 {
        (RampFn::rho(self.epsilon * x) - (1.0 - self.alpha) / 4.0).max(0.0)
    }

    pub fn upper_exact(&self, x: f64) -> f64 {
        (RampFn::rho(self.epsilon * x + 1.0) + self.alpha / 4.0).min(1.0)
    }

    /// The same pair sampled on another grid.
    pub fn on_grid(&self, grid: Grid) -> Result<Self> {
        let mut out = self.clone();
        out.psi_lower = Profile::from_fn(
            grid,
            |x| self.lower_exact(x),
            0.0,
            (3.0 + self.alpha) / 4.0,
        )?;
        out.psi_upper = Profile::from_fn(grid, |x| self.upper_exact(x), self.alpha / 4.0, 1.0)?;
        Ok(out)
    }
}

/// `(mu * g)(x)` for a closed-form `g`, using the measure's own quadrature weights.
fn convolve_at(m: &Measure, g: impl Fn(f64) -> f64, x: f64) -> f64 {
    let atoms: f64 = m.atoms().iter().map(|a| a.mass * g(x - a.loc)).sum();
    let dens = m.density().map_or(0.0, |d| {
        d.weights()
            .iter()
            .enumerate()
            .map(|(j, w)| w * g(x - d.node(j)))
            .sum()
    });
    atoms + dens
}

fn min_over(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    (0..=400)
        .map(|k| g(lo + (hi - lo) * k as f64 / 400.0))
        .fold(f64::INFINITY, f64::min)
}

/// The constants `delta` (sign margin of `f_hat` near the ends of both ranges)
/// and `C` (least slope of `rho` on its middle range).
fn margins(fhat: &ExtendedNonlinearity) -> (f64, f64) {
    let a = fhat.alpha();
    let f = |u: f64| fhat.eval(u);
    let delta = min_over(-(1.0 - a) / 4.0, -(1.0 - a) / 8.0, f)
        .min(min_over(1.0 - (1.0 - a) / 2.0, 1.0 - (1.0 - a) / 4.0, f))
        .min(min_over(a / 4.0, a / 2.0, |u| -f(u)))
        .min(min_over(1.0 + a / 8.0, 1.0 + a / 4.0, |u| -f(u)));
    let lo = ((1.0 - a) / 8.0).min(a / 4.0);
    let hi = 1.0 - ((1.0 - a) / 4.0).min(a / 8.0);
    let c = (1..2000)
        .map(|k| k as f64 / 2000.0)
        .filter(|&z| {
            let r = RampFn::rho(z);
            r >= lo && r <= hi
        })
        .map(RampFn::rho_prime)
        .fold(f64::INFINITY, f64::min);
    (delta, c)
}

/// Builds the pair for one `eps` and checks both residuals on a
/// `RESIDUAL_TIMES x RESIDUAL_POINTS` space-time grid.
pub fn build_sub_super(
    fhat: &ExtendedNonlinearity,
    m: &Measure,
    ramp: RampFn,
    grid: Grid,
) -> Result<SubSuperPair> {
    let eps = ramp.epsilon;
    let a = fhat.alpha();
    let r = m.support_radius();
    let lower = |t: f64, x: f64| RampFn::rho(eps * x - t / eps) - (1.0 - a) / 4.0;
    let upper = |t: f64, x: f64| RampFn::rho(eps * x + t / eps + 1.0) + a / 4.0;

    let mut res_lo = f64::INFINITY;
    let mut res_hi = f64::INFINITY;
    for it in 0..RESIDUAL_TIMES {
        let t = it as f64 / (RESIDUAL_TIMES - 1) as f64;
        // windows covering each moving transition plus the kernel reach
        let lo_start = t / (eps * eps) - r - 2.0;
        let hi_start = -t / (eps * eps) - 1.0 / eps - r - 2.0;
        let span = 1.0 / eps + 2.0 * r + 4.0;
        for ix in 0..RESIDUAL_POINTS {
            let s = span * ix as f64 / (RESIDUAL_POINTS - 1) as f64;

            let x = lo_start + s;
            let u = lower(t, x);
            let ut = -RampFn::rho_prime(eps * x - t / eps) / eps;
            let conv = convolve_at(m, |y| lower(t, y), x);
            res_lo = res_lo.min(conv - u + fhat.eval(u) - ut);

            let x = hi_start + s;
            let u = upper(t, x);
            let ut = RampFn::rho_prime(eps * x + t / eps + 1.0) / eps;
            let conv = convolve_at(m, |y| upper(t, y), x);
            res_hi = res_hi.min(ut - (conv - u + fhat.eval(u)));
        }
    }
    let margin = res_lo.min(res_hi);
    if margin < 0.0 {
        return Err(Error::EpsilonTooLarge {
            eps,
            margin,
            suggested: eps / 2.0,
        });
    }
    let (delta, c_const) = margins(fhat);
    let pair = SubSuperPair {
        epsilon: eps,
        alpha: a,
        psi_lower: Profile::constant(grid, 0.0)?,
        c_lower: -1.0 / (eps * eps),
        psi_upper: Profile::constant(grid, 1.0)?,
        c_upper: 1.0 / (eps * eps),
        delta,
        c_const,
        residual_lower: res_lo,
        residual_upper: res_hi,
        test_points: 2 * RESIDUAL_TIMES * RESIDUAL_POINTS,
    };
    pair.on_grid(grid)
}

/// Tries `eps`, `eps/2`, ... ([`MAX_HALVINGS`] halvings) until both residuals are nonnegative.
pub fn build_sub_super_auto(
    fhat: &ExtendedNonlinearity,
    m: &Measure,
    eps: f64,
    grid: Grid,
) -> Result<SubSuperPair> {
    let mut eps = eps;
    let mut last = None;
    for _ in 0..=MAX_HALVINGS {
        match build_sub_super(fhat, m, RampFn::new(eps), grid) {
            Ok(p) => return Ok(p),
            Err(e @ Error::EpsilonTooLarge { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        eps /= 2.0;
    }
    Err(last.expect("at least one attempt"))
}

/// Worst violation of `psi_lower(x + c_lower t) <= Q^t[psi_lower](x)` and
/// `Q^t[psi_upper](x) <= psi_upper(x + c_upper t)` over `times`.
pub fn speed_violation(pair: &SubSuperPair, flow: &SemiflowConfig, times: &[f64]) -> Result<f64> {
    let lower = pair.psi_lower.resample(flow.grid());
    let upper = pair.psi_upper.resample(flow.grid());
    let lo_t = flow.evolve_snapshots(&lower, times)?;
    let hi_t = flow.evolve_snapshots(&upper, times)?;
    let mut worst = 0.0_f64;
    for ((&t, (ql, _)), (qu, _)) in times.iter().zip(&lo_t).zip(&hi_t) {
        // translate(u, h)(x) = u(x - h), so u(x + c t) is translate(u, -c t)
        let sub = lower.translate(-pair.c_lower * t);
        let sup = upper.translate(-pair.c_upper * t);
        worst = worst.max(excess(&sub, ql)).max(excess(qu, &sup));
    }
    Ok(worst)
}

fn excess(a: &Profile, b: &Profile) -> f64 {
    if leq(a, b, 0.0) {
        0.0
    } else {
        crate::profile::max_excess(a.as_grid_fn(), b.as_grid_fn())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiflow::{extend_nonlinearity, Nonlinearity};

    fn fhat() -> ExtendedNonlinearity {
        let f = Nonlinearity::cubic(1.0, 0.3).unwrap();
        extend_nonlinearity(&f, f.lipschitz()).unwrap()
    }

    #[test]
    fn ramp_is_c1_and_monotone() {
        assert_eq!(RampFn::rho(-1.0), 0.0);
        assert_eq!(RampFn::rho(2.0), 1.0);
        assert_eq!(RampFn::rho_prime(0.0), 0.0);
        assert_eq!(RampFn::rho_prime(1.0), 0.0);
        for k in 1..100 {
            assert!(RampFn::rho_prime(k as f64 / 100.0) > 0.0);
        }
        let h = 1e-6;
        for z in [0.2, 0.5, 0.77] {
            let fd = (RampFn::rho(z + h) - RampFn::rho(z - h)) / (2.0 * h);
            assert!((fd - RampFn::rho_prime(z)).abs() < 1e-8);
        }
    }

    #[test]
    fn lattice_pair_at_default_eps() {
        let g = Grid::spanning(-40.0, 40.0, 0.05).unwrap();
        let p = build_sub_super(&fhat(), &Measure::dirac(1.0), RampFn::new(0.05), g).unwrap();
        assert!(p.residual_lower >= 0.0 && p.residual_upper >= 0.0);
        assert!(p.test_points >= 10_000);
        assert_eq!(p.psi_lower.evaluate(0.0), 0.0);
        assert!((p.psi_lower.right_tail() - (1.0 - 0.7 / 4.0)).abs() < 1e-15);
        assert_eq!(p.psi_upper.evaluate(0.0), 1.0);
        assert!(p.c_lower <= p.c_upper);
        assert!(p.delta > 0.0 && p.c_const > 0.0);
    }

    #[test]
    fn large_eps_is_rejected() {
        let g = Grid::spanning(-40.0, 40.0, 0.05).unwrap();
        let wide = Measure::atomic(&[(-30.0, 0.5), (30.0, 0.5)]).unwrap();
        let err = build_sub_super(&fhat(), &wide, RampFn::new(0.9), g).unwrap_err();
        assert!(matches!(err, Error::EpsilonTooLarge { suggested, .. } if suggested == 0.45));
    }
}
