//! The evolution operator `Q^t` of `u_t = mu * u - u + f(u)` on profiles.
//!
//! Method of lines: the convolution is a [`Stencil`] on the profile grid, the
//! tails are carried as two extra unknowns obeying the scalar ODE, and time
//! stepping is classical RK4 at a fixed `dt` followed by a monotone
//! projection whose size is logged and bounded.

mod certify;
mod nonlinearity;

pub use certify::{certify_hypotheses, CertifyOptions, CheckResult, HypothesisReport};
pub use nonlinearity::{extend_nonlinearity, ExtendedNonlinearity, Nonlinearity, Reaction};

use crate::error::{invalid, Error, Result};
use crate::measure::{convolve, exp_series, Measure, Stencil};
use crate::profile::{monotone_project, sup_dist, Grid, GridFn, Profile};

/// Largest tolerated distance between an atom and the nearest grid offset.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SemiflowConfig {
    measure: Measure,
    reaction: Reaction,
    grid: Grid,
    dt: f64,
    projection_tol: f64,
    stencil: Stencil,
}

impl SemiflowConfig {
    /// Validates `mu(R) = 1`, the step budget `dt (1 + Lip f) < 1`, and that
    /// every atom sits on the grid lattice.
    pub fn new(
        measure: Measure,
        reaction: impl Into<Reaction>,
        grid: Grid,
        dt: f64,
    ) -> Result<Self> {
        let reaction = reaction.into();
        let mass = measure.total_mass();
        if (mass - 1.0).abs() > 1e-10 {
            return invalid(format!("the kernel must have total mass 1, got {mass}"));
        }
        let budget = dt * (1.0 + reaction.lipschitz());
        if !(dt > 0.0) || budget >= 1.0 {
            return invalid(format!(
                "dt = {dt} breaks the step budget dt * (1 + Lip f) = {budget} < 1"
            ));
        }
        let stencil = Stencil::new(&measure, grid.step)?;
        if stencil.snap_error() > SNAP_TOL {
            return invalid(format!(
                "atoms are off the grid lattice by {:e}; choose a step dividing the atom offsets",
                stencil.snap_error()
            ));
        }
        Ok(Self {
            measure,
            reaction,
            grid,
            dt,
            projection_tol: 1e-6,
            stencil,
        })
    }

    /// Per-step bound on the monotone projection correction (default 1e-6).
    pub fn with_projection_tol(mut self, tol: f64) -> Self {
        self.projection_tol = tol;
        self
    }

    /// Same kernel and time step, different reaction.
    pub fn with_reaction(&self, reaction: impl Into<Reaction>) -> Result<Self> {
        Ok(Self::new(self.measure.clone(), reaction, self.grid, self.dt)?
            .with_projection_tol(self.projection_tol))
    }

    /// Same physics on another grid.
    pub fn with_grid(&self, grid: Grid) -> Result<Self> {
        Ok(
            Self::new(self.measure.clone(), self.reaction.clone(), grid, self.dt)?
                .with_projection_tol(self.projection_tol),
        )
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn reaction(&self) -> &Reaction {
        &self.reaction
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn projection_tol(&self) -> f64 {
        self.projection_tol
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        if (g.step - self.grid.step).abs() > 1e-12 * self.grid.step {
            return invalid(format!(
                "profile step {} differs from the configured step {}",
                g.step, self.grid.step
            ));
        }
        Ok(())
    }

    /// `G(u) = mu * u - u + f(u)`, tails included.
    pub fn rhs(&self, u: &GridFn) -> Result<GridFn> {
        self.check_grid(&u.grid)?;
        let state = pack(u);
        let mut out = vec![0.0; state.len()];
        self.rhs_packed(&state, &mut out);
        Ok(unpack(u.grid, &out))
    }

    fn rhs_packed(&self, s: &[f64], out: &mut [f64]) {
        let n = s.len() - 2;
        let (l, r) = (s[0], s[n + 1]);
        self.stencil.apply(&s[1..=n], l, r, &mut out[1..=n]);
        let f = &self.reaction;
        for (o, &v) in out[1..=n].iter_mut().zip(&s[1..=n]) {
            *o += -v + f.eval(v);
        }
        let total = self.stencil.total();
        out[0] = total * l - l + f.eval(l);
        out[n + 1] = total * r - r + f.eval(r);
    }

    /// One RK4 step of size `dt` (at most the configured one), then projection.
    /// Returns the projection correction.
    fn step_packed(&self, s: &mut Vec<f64>, dt: f64, w: &mut Work) -> Result<f64> {
        rk4(s, dt, w, |x, o| self.rhs_packed(x, o));
        let (p, correction) = monotone_project(s);
        if correction > self.projection_tol {
            return Err(Error::ProjectionBudget {
                correction,
                tol: self.projection_tol,
            });
        }
        *s = p;
        Ok(correction)
    }

    /// One step of size `dt`; returns the new profile and the projection correction.
    pub fn step(&self, u: &Profile) -> Result<(Profile, f64)> {
        self.check_grid(u.grid())?;
        let mut s = pack(u.as_grid_fn());
        let mut w = Work::new(s.len());
        let c = self.step_packed(&mut s, self.dt, &mut w)?;
        Ok((to_profile(u.grid(), &s), c))
    }

    /// `Q^t[u]`.
    pub fn evolve(&self, u: &Profile, t: f64) -> Result<Profile> {
        Ok(self.evolve_logged(u, t)?.0)
    }

    /// `Q^t[u]` and the summed projection corrections.
    pub fn evolve_logged(&self, u: &Profile, t: f64) -> Result<(Profile, f64)> {
        let mut out = self.evolve_snapshots(u, &[t])?;
        Ok(out.pop().expect("one snapshot"))
    }

    /// Profiles at the increasing times `times`, with the running projection total.
    pub fn evolve_snapshots(&self, u: &Profile, times: &[f64]) -> Result<Vec<(Profile, f64)>> {
        self.check_grid(u.grid())?;
        if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
            return invalid("snapshot times must be nonnegative and increasing");
        }
        let mut s = pack(u.as_grid_fn());
        let mut w = Work::new(s.len());
        let mut now = 0.0;
        let mut budget = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            for dt in substeps(t - now, self.dt) {
                budget += self.step_packed(&mut s, dt, &mut w)?;
            }
            now = t;
            out.push((to_profile(u.grid(), &s), budget));
        }
        Ok(out)
    }
}

/// Full steps of size `dt` covering `t`, with a final partial step.
fn substeps(t: f64, dt: f64) -> impl Iterator<Item = f64> {
    let full = (t / dt + 1e-9).floor();
    let rest = t - full * dt;
    let tail = (rest > 1e-12 * t.max(1.0)).then_some(rest);
    std::iter::repeat_n(dt, full as usize).chain(tail)
}

fn pack(u: &GridFn) -> Vec<f64> {
    let mut s = Vec::with_capacity(u.values.len() + 2);
    s.push(u.left_tail);
    s.extend_from_slice(&u.values);
    s.push(u.right_tail);
    s
}

fn unpack(grid: Grid, s: &[f64]) -> GridFn {
    let n = s.len();
    GridFn {
        grid,
        values: s[1..n - 1].to_vec(),
        left_tail: s[0],
        right_tail: s[n - 1],
    }
}

fn to_profile(grid: &Grid, s: &[f64]) -> Profile {
    // `s` is the output of monotone_project, so this cannot fail
    Profile::from_grid_fn(unpack(*grid, s)).expect("projected state is a profile")
}

struct Work {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
        }
    }
}

fn rk4(s: &mut [f64], dt: f64, w: &mut Work, rhs: impl Fn(&[f64], &mut [f64])) {
    let Work { k, tmp } = w;
    let [k1, k2, k3, k4] = k;
    rhs(s, k1);
    for ((t, &x), &d) in tmp.iter_mut().zip(s.iter()).zip(k1.iter()) {
        *t = x + 0.5 * dt * d;
    }
    rhs(tmp, k2);
    for ((t, &x), &d) in tmp.iter_mut().zip(s.iter()).zip(k2.iter()) {
        *t = x + 0.5 * dt * d;
    }
    rhs(tmp, k3);
    for ((t, &x), &d) in tmp.iter_mut().zip(s.iter()).zip(k3.iter()) {
        *t = x + dt * d;
    }
    rhs(tmp, k4);
    for (i, x) in s.iter_mut().enumerate() {
        *x += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// RK4 for `v_t = mhat * v` up to time `t`. No projection; `v` need not be monotone.
pub fn evolve_linear(v: &GridFn, mhat: &Measure, t: f64, dt: f64) -> Result<GridFn> {
    if !(t >= 0.0 && dt > 0.0) {
        return invalid("evolve_linear needs t >= 0 and dt > 0");
    }
    let stencil = Stencil::new(mhat, v.grid.step)?;
    let total = stencil.total();
    let rhs = |s: &[f64], out: &mut [f64]| {
        let n = s.len() - 2;
        stencil.apply(&s[1..=n], s[0], s[n + 1], &mut out[1..=n]);
        out[0] = total * s[0];
        out[n + 1] = total * s[n + 1];
    };
    let mut s = pack(v);
    let mut w = Work::new(s.len());
    for h in substeps(t, dt) {
        rk4(&mut s, h, &mut w, rhs);
    }
    Ok(unpack(v.grid, &s))
}

/// `sup |evolve_linear(v, mhat, 1) - exp_series(mhat, order) * v|`, the
/// time-one linear flow against its series measure.
pub fn linear_series_discrepancy(v: &GridFn, mhat: &Measure, order: usize, dt: f64) -> Result<f64> {
    let flowed = evolve_linear(v, mhat, 1.0, dt)?;
    let series = convolve(&exp_series(mhat, order)?, v)?;
    Ok(sup_dist(&flowed, &series, (f64::NEG_INFINITY, f64::INFINITY)))
}
