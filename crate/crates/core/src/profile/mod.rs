//! Monotone profiles on uniform grids.
//!
//! A [`Profile`] is a nondecreasing, `[0, 1]`-valued function sampled on a
//! [`Grid`], linear between samples and constant beyond the grid ends. Every
//! constructor validates those invariants, so any `Profile` in hand is an
//! element of the monotone class the semiflow acts on. [`GridFn`] is the same
//! storage without the invariants; it carries intermediate fields such as
//! right-hand sides or linear evolutions.

mod io;
mod transform;

pub use io::{read_profile, write_profile, ProfileSidecar};
pub use transform::{sub_front_transform, Direction, Side};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Uniform grid `x_i = min + i * step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn new(min: f64, step: f64, len: usize) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("grid step must be positive, got {step}"));
        }
        if !min.is_finite() {
            return invalid("grid min must be finite");
        }
        if len < 2 {
            return invalid("grid needs at least two points");
        }
        Ok(Self { min, step, len })
    }

    /// Grid from `min` to `max` inclusive; `max - min` must be a multiple of `step`.
    pub fn spanning(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(max > min) {
            return invalid(format!("grid max {max} must exceed min {min}"));
        }
        let cells = (max - min) / step;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 {
            return invalid(format!(
                "grid span {} is not a multiple of step {step}",
                max - min
            ));
        }
        Self::new(min, step, rounded as usize + 1)
    }

    /// Symmetric grid `[-half_width, half_width]`, with `half_width` rounded up to a step multiple.
    pub fn centered(half_width: f64, step: f64) -> Result<Self> {
        let cells = (half_width / step - 1e-9).ceil().max(1.0);
        Self::new(-cells * step, step, 2 * cells as usize + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.x(i))
    }

    /// Fractional index of `x`; snaps to the nearest integer when within 1e-9.
    #[inline]
    fn position(&self, x: f64) -> f64 {
        let s = (x - self.min) / self.step;
        let r = s.round();
        if (s - r).abs() < 1e-9 {
            r
        } else {
            s
        }
    }

    /// Nearest index of `x` if it sits on the grid lattice (possibly outside the range).
    pub fn lattice_index(&self, x: f64) -> Option<i64> {
        let s = (x - self.min) / self.step;
        let r = s.round();
        ((s - r).abs() < 1e-9).then_some(r as i64)
    }

    /// True when both grids share step and lattice alignment.
    pub fn aligned_with(&self, other: &Grid) -> bool {
        (self.step - other.step).abs() <= 1e-12 * self.step
            && self.lattice_index(other.min).is_some()
    }
}

/// A sampled function on a grid with constant tails. No invariants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFn {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub left_tail: f64,
    pub right_tail: f64,
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<f64>, left_tail: f64, right_tail: f64) -> Result<Self> {
        if values.len() != grid.len {
            return invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len
            ));
        }
        if values.iter().any(|v| !v.is_finite()) || !left_tail.is_finite() || !right_tail.is_finite()
        {
            return invalid("non-finite sample");
        }
        Ok(Self {
            grid,
            values,
            left_tail,
            right_tail,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64, left_tail: f64, right_tail: f64) -> Self {
        let values = grid.points().map(f).collect();
        Self {
            grid,
            values,
            left_tail,
            right_tail,
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len],
            left_tail: value,
            right_tail: value,
        }
    }

    /// Piecewise-linear evaluation; tails outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let s = self.grid.position(x);
        if s < 0.0 {
            return self.left_tail;
        }
        let last = (self.grid.len - 1) as f64;
        if s > last {
            return self.right_tail;
        }
        let i = s.floor() as usize;
        if i >= self.grid.len - 1 {
            return self.values[self.grid.len - 1];
        }
        let t = s - i as f64;
        if t == 0.0 {
            self.values[i]
        } else {
            self.values[i] + t * (self.values[i + 1] - self.values[i])
        }
    }

    /// Limit from the left at `x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        if self.grid.position(x) <= 0.0 {
            self.left_tail
        } else {
            self.eval(x)
        }
    }

    /// Limit from the right at `x`.
    pub fn eval_right(&self, x: f64) -> f64 {
        if self.grid.position(x) >= (self.grid.len - 1) as f64 {
            self.right_tail
        } else {
            self.eval(x)
        }
    }

    /// Value at integer index `j`, reading tails outside `0..len`.
    #[inline]
    pub fn at(&self, j: i64) -> f64 {
        if j < 0 {
            self.left_tail
        } else if j as usize >= self.grid.len {
            self.right_tail
        } else {
            self.values[j as usize]
        }
    }

    /// Samples this function on `grid`, keeping the tails.
    pub fn resample(&self, grid: &Grid) -> GridFn {
        if let Some(offset) = grid.lattice_index(self.grid.min).filter(|_| {
            (grid.step - self.grid.step).abs() <= 1e-12 * grid.step
        }) {
            // grid-aligned: exact index shift
            let values = (0..grid.len as i64).map(|i| self.at(i - offset)).collect();
            return GridFn {
                grid: *grid,
                values,
                left_tail: self.left_tail,
                right_tail: self.right_tail,
            };
        }
        GridFn {
            grid: *grid,
            values: grid.points().map(|x| self.eval(x)).collect(),
            left_tail: self.left_tail,
            right_tail: self.right_tail,
        }
    }

    pub fn translate(&self, h: f64) -> GridFn {
        let mut out = self.clone();
        out.grid.min += h;
        out
    }

    /// Sup norm over samples and tails.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .chain([&self.left_tail, &self.right_tail])
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Running maximum followed by a clamp to `[0, 1]`.
///
/// Returns the projected sequence and the largest absolute change applied.
pub fn monotone_project(values: &[f64]) -> (Vec<f64>, f64) {
    let mut out = Vec::with_capacity(values.len());
    let mut running = f64::NEG_INFINITY;
    let mut correction = 0.0_f64;
    for &v in values {
        running = running.max(v);
        let p = running.clamp(0.0, 1.0);
        correction = correction.max((p - v).abs());
        out.push(p);
    }
    (out, correction)
}

/// A nondecreasing `[0, 1]`-valued profile with flat tails.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Profile(GridFn);

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>, left_tail: f64, right_tail: f64) -> Result<Self> {
        Self::from_grid_fn(GridFn::new(grid, values, left_tail, right_tail)?)
    }

    /// Validates a sampled function as a profile (monotone with zero tolerance, values in `[0, 1]`).
    pub fn from_grid_fn(f: GridFn) -> Result<Self> {
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        if !in_range(f.left_tail) || !in_range(f.right_tail) || !f.values.iter().all(|&v| in_range(v))
        {
            return Err(Error::Range("profile values must lie in [0, 1]".into()));
        }
        let seq = std::iter::once(f.left_tail)
            .chain(f.values.iter().copied())
            .chain(std::iter::once(f.right_tail));
        let mut prev = f64::NEG_INFINITY;
        for v in seq {
            if v < prev {
                return invalid("profile is not nondecreasing");
            }
            prev = v;
        }
        Ok(Self(f))
    }

    /// Projects an arbitrary sampled function (tails included) onto the profile class.
    pub fn project(f: GridFn) -> (Self, f64) {
        let mut seq = Vec::with_capacity(f.values.len() + 2);
        seq.push(f.left_tail);
        seq.extend_from_slice(&f.values);
        seq.push(f.right_tail);
        let (p, correction) = monotone_project(&seq);
        let n = p.len();
        let profile = Profile(GridFn {
            grid: f.grid,
            left_tail: p[0],
            right_tail: p[n - 1],
            values: p[1..n - 1].to_vec(),
        });
        (profile, correction)
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::from_grid_fn(GridFn::constant(grid, value))
    }

    /// `f` sampled on `grid`; the tails are taken as `f(-inf)`, `f(+inf)` supplied by the caller.
    pub fn from_fn(
        grid: Grid,
        f: impl Fn(f64) -> f64,
        left_tail: f64,
        right_tail: f64,
    ) -> Result<Self> {
        Self::from_grid_fn(GridFn::from_fn(grid, f, left_tail, right_tail))
    }

    /// Linear ramp from 0 at `center - width/2` to 1 at `center + width/2`.
    pub fn ramp(grid: Grid, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return invalid("ramp width must be positive");
        }
        Self::from_fn(
            grid,
            |x| ((x - center) / width + 0.5).clamp(0.0, 1.0),
            0.0,
            1.0,
        )
    }

    /// A steep ramp of one grid cell, the piecewise-linear stand-in for a unit step at `at`.
    pub fn step(grid: Grid, at: f64) -> Result<Self> {
        Self::ramp(grid, at, grid.step)
    }

    pub fn grid(&self) -> &Grid {
        &self.0.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.0.values
    }

    pub fn left_tail(&self) -> f64 {
        self.0.left_tail
    }

    pub fn right_tail(&self) -> f64 {
        self.0.right_tail
    }

    pub fn as_grid_fn(&self) -> &GridFn {
        &self.0
    }

    pub fn into_grid_fn(self) -> GridFn {
        self.0
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.0.eval(x)
    }

    /// `x -> u(x - h)`; exact (only the grid origin moves).
    pub fn translate(&self, h: f64) -> Profile {
        Profile(self.0.translate(h))
    }

    /// Resamples onto `grid` by linear interpolation. Monotone data stays monotone.
    pub fn resample(&self, grid: &Grid) -> Profile {
        Profile(self.0.resample(grid))
    }

    /// Restricts to `[lo, hi]` (snapped outward to grid points); tails become the edge samples.
    pub fn crop(&self, lo: f64, hi: f64) -> Result<Profile> {
        let g = self.grid();
        let i0 = g.position(lo).floor().max(0.0) as usize;
        let i1 = (g.position(hi).ceil().max(0.0) as usize).min(g.len - 1);
        if i1 <= i0 {
            return invalid("crop window does not overlap the grid");
        }
        let values = self.values()[i0..=i1].to_vec();
        let grid = Grid::new(g.x(i0), g.step, values.len())?;
        Ok(Profile(GridFn {
            grid,
            left_tail: values[0],
            right_tail: values[values.len() - 1],
            values,
        }))
    }

    /// `x -> u(rho(x))` on `u`'s grid extended to cover the preimage of `u`'s grid.
    pub fn affine_precompose(&self, rho: &AffineMap) -> Profile {
        let g = self.grid();
        let lo = rho.preimage(g.min).min(g.min);
        let hi = rho.preimage(g.max()).max(g.max());
        let i_lo = ((lo - g.min) / g.step).floor() as i64;
        let i_hi = ((hi - g.min) / g.step).ceil() as i64;
        let grid = Grid {
            min: g.min + i_lo as f64 * g.step,
            step: g.step,
            len: (i_hi - i_lo + 1) as usize,
        };
        self.affine_precompose_on(rho, &grid)
    }

    /// `x -> u(rho(x))` sampled on `grid`.
    pub fn affine_precompose_on(&self, rho: &AffineMap, grid: &Grid) -> Profile {
        Profile(GridFn {
            grid: *grid,
            values: grid.points().map(|x| self.0.eval(rho.apply(x))).collect(),
            left_tail: self.left_tail(),
            right_tail: self.right_tail(),
        })
    }

    /// Smallest `x` with `u(x) >= level`.
    pub fn level_crossing(&self, level: f64) -> Result<f64> {
        if !(self.left_tail() < level && level < self.right_tail()) {
            return Err(Error::LevelNotCrossed {
                level,
                left: self.left_tail(),
                right: self.right_tail(),
            });
        }
        let v = self.values();
        let g = self.grid();
        // bisection over the sorted samples
        let i = v.partition_point(|&s| s < level);
        if i == 0 {
            return Ok(g.min);
        }
        if i == v.len() {
            return Ok(g.max());
        }
        let (a, b) = (v[i - 1], v[i]);
        Ok(g.x(i - 1) + g.step * (level - a) / (b - a))
    }

    /// Pointwise maximum of two profiles on `self`'s grid.
    pub fn max_with(&self, other: &Profile) -> Profile {
        let g = *self.grid();
        Profile(GridFn {
            grid: g,
            values: g
                .points()
                .zip(self.values())
                .map(|(x, &a)| a.max(other.evaluate(x)))
                .collect(),
            left_tail: self.left_tail().max(other.left_tail()),
            right_tail: self.right_tail().max(other.right_tail()),
        })
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = GridFn::deserialize(d)?;
        Profile::from_grid_fn(f).map_err(serde::de::Error::custom)
    }
}

/// `rho(x) = slope * (x - center)` with `slope > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    slope: f64,
    center: f64,
}

impl AffineMap {
    pub fn new(slope: f64, center: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) || !center.is_finite() {
            return invalid(format!("affine map needs a positive slope, got {slope}"));
        }
        Ok(Self { slope, center })
    }

    pub fn identity() -> Self {
        Self {
            slope: 1.0,
            center: 0.0,
        }
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.slope * (x - self.center)
    }

    pub fn preimage(&self, y: f64) -> f64 {
        y / self.slope + self.center
    }
}

/// All breakpoints of both functions, sorted and deduplicated.
fn union_points(a: &GridFn, b: &GridFn) -> Vec<f64> {
    let mut pts: Vec<f64> = a.grid.points().chain(b.grid.points()).collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    pts
}

/// `u1 <= u2 + tol` everywhere, checked exactly on the piecewise-linear representation.
pub fn leq(u1: &Profile, u2: &Profile, tol: f64) -> bool {
    max_excess(u1.as_grid_fn(), u2.as_grid_fn()) <= tol
}

/// `sup_x (a(x) - b(x))`, exact for piecewise-linear functions with flat tails.
pub fn max_excess(a: &GridFn, b: &GridFn) -> f64 {
    let mut worst = (a.left_tail - b.left_tail).max(a.right_tail - b.right_tail);
    if a.grid == b.grid {
        // same nodes: the linear pieces line up, so the nodes decide
        return a
            .values
            .iter()
            .zip(&b.values)
            .fold(worst, |w, (x, y)| w.max(x - y));
    }
    for x in union_points(a, b) {
        worst = worst
            .max(a.eval(x) - b.eval(x))
            .max(a.eval_left(x) - b.eval_left(x))
            .max(a.eval_right(x) - b.eval_right(x));
    }
    worst
}

/// `max |u1 - u2|` over union grid points inside `[lo, hi]` (window ends included).
pub fn sup_dist(u1: &GridFn, u2: &GridFn, window: (f64, f64)) -> f64 {
    let (lo, hi) = window;
    if u1.grid == u2.grid && lo <= u1.grid.min && hi >= u1.grid.max() {
        let tails = (u1.left_tail - u2.left_tail)
            .abs()
            .max((u1.right_tail - u2.right_tail).abs());
        let inside = u1
            .values
            .iter()
            .zip(&u2.values)
            .fold(0.0_f64, |w, (x, y)| w.max((x - y).abs()));
        // the tails only count when the window reaches beyond the grid
        let reach = lo < u1.grid.min || hi > u1.grid.max();
        return if reach { inside.max(tails) } else { inside };
    }
    union_points(u1, u2)
        .into_iter()
        .filter(|&x| x >= lo && x <= hi)
        .chain([lo, hi])
        .map(|x| (u1.eval(x) - u2.eval(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::spanning(-5.0, 5.0, 0.1).unwrap()
    }

    #[test]
    fn evaluate_step_tail_and_nodes() {
        let u = Profile::step(grid(), 0.0).unwrap();
        assert_eq!(u.evaluate(-5.0 - 1.0), 0.0);
        assert_eq!(u.evaluate(-5.0), 0.0);
        let r = Profile::ramp(grid(), 0.0, 4.0).unwrap();
        for i in [0, 17, 50, 73, 100] {
            assert_eq!(r.evaluate(r.grid().x(i)), r.values()[i]);
        }
        let (a, b) = (r.values()[40], r.values()[41]);
        let mid = 0.5 * (r.grid().x(40) + r.grid().x(41));
        assert!((r.evaluate(mid) - 0.5 * (a + b)).abs() < 1e-15);
    }

    #[test]
    fn translate_identity_group_law_and_step() {
        let u = Profile::ramp(grid(), 0.3, 2.0).unwrap();
        assert_eq!(u.translate(0.0), u);
        let w = (-6.0, 6.0);
        let ab = u.translate(0.5).translate(-1.2);
        let direct = u.translate(-0.7);
        assert!(sup_dist(ab.as_grid_fn(), direct.as_grid_fn(), w) < 1e-12);
        let s = Profile::step(grid(), 0.0).unwrap().translate(2.0);
        assert!((s.level_crossing(0.5).unwrap() - 2.0).abs() <= 0.1);
    }

    #[test]
    fn affine_precompose_examples() {
        let u = Profile::ramp(grid(), 0.0, 1.0).unwrap();
        let same = u.affine_precompose(&AffineMap::identity());
        assert!(sup_dist(same.as_grid_fn(), u.as_grid_fn(), (-5.0, 5.0)) == 0.0);
        // step at 0 composed with 2(x - 1) is a step at 1
        let s = Profile::step(grid(), 0.0).unwrap();
        let r = s.affine_precompose(&AffineMap::new(2.0, 1.0).unwrap());
        assert!((r.level_crossing(0.5).unwrap() - 1.0).abs() <= 0.1);
        // slope one equals translation by the center
        let t = u.affine_precompose_on(&AffineMap::new(1.0, 0.7).unwrap(), u.grid());
        let tr = u.translate(0.7);
        assert!(sup_dist(t.as_grid_fn(), tr.as_grid_fn(), (-4.0, 4.0)) < 1e-12);
    }

    #[test]
    fn leq_examples() {
        let u = Profile::ramp(grid(), 0.0, 2.0).unwrap();
        assert!(leq(&u, &u, 0.0));
        let zero = Profile::constant(grid(), 0.0).unwrap();
        assert!(leq(&zero, &u, 0.0));
        let s0 = Profile::step(grid(), 0.0).unwrap();
        let s_minus = Profile::step(grid(), -1.0).unwrap();
        assert!(leq(&s0, &s_minus, 0.0));
        assert!(!leq(&s_minus, &s0, 0.0));
    }

    #[test]
    fn leq_sees_tail_jumps_between_grids() {
        // u2 lives on a shorter grid whose right tail drops below u1's samples
        let u1 = Profile::constant(grid(), 0.5).unwrap();
        let g2 = Grid::spanning(-1.0, 1.0, 0.1).unwrap();
        let u2 = Profile::new(g2, vec![0.5; g2.len], 0.5, 0.5).unwrap();
        assert!(leq(&u1, &u2, 0.0));
        let u3 = Profile::new(g2, vec![0.6; g2.len], 0.4, 0.6).unwrap();
        assert!(!leq(&u1, &u3, 0.0));
    }

    #[test]
    fn sup_dist_examples() {
        let u = Profile::ramp(grid(), 0.0, 2.0).unwrap();
        assert_eq!(sup_dist(u.as_grid_fn(), u.as_grid_fn(), (-1.0, 1.0)), 0.0);
        let z = GridFn::constant(grid(), 0.0);
        let o = GridFn::constant(grid(), 1.0);
        assert_eq!(sup_dist(&z, &o, (-1.0, 1.0)), 1.0);
        let s0 = Profile::step(grid(), 0.0).unwrap();
        let sh = s0.translate(0.05);
        let d = sup_dist(s0.as_grid_fn(), sh.as_grid_fn(), (-1.0, 1.0));
        assert!(d > 0.0 && d <= 1.0);
    }

    #[test]
    fn level_crossing_examples() {
        let s = Profile::step(grid(), 0.0).unwrap();
        assert!(s.level_crossing(0.5).unwrap().abs() <= 0.1);
        let g = Grid::spanning(-1.0, 2.0, 0.01).unwrap();
        let r = Profile::from_fn(g, |x| x.clamp(0.0, 1.0), 0.0, 1.0).unwrap();
        assert!((r.level_crossing(0.25).unwrap() - 0.25).abs() < 1e-12);
        let h = 0.37;
        let d = r.translate(h).level_crossing(0.25).unwrap() - r.level_crossing(0.25).unwrap();
        assert!((d - h).abs() < 1e-12);
        assert!(matches!(
            r.level_crossing(1.0),
            Err(Error::LevelNotCrossed { .. })
        ));
    }

    #[test]
    fn monotone_project_examples() {
        let (v, c) = monotone_project(&[0.0, 0.2, 0.2, 0.9]);
        assert_eq!(v, vec![0.0, 0.2, 0.2, 0.9]);
        assert_eq!(c, 0.0);
        let (v, c) = monotone_project(&[0.5, 0.4]);
        assert_eq!(v, vec![0.5, 0.5]);
        assert!((c - 0.1).abs() < 1e-15);
        let (v, _) = monotone_project(&[0.3, 1.2]);
        assert_eq!(v, vec![0.3, 1.0]);
    }

    #[test]
    fn profile_rejects_invalid_data() {
        let g = Grid::spanning(0.0, 1.0, 0.5).unwrap();
        assert!(Profile::new(g, vec![0.2, 0.1, 0.3], 0.0, 1.0).is_err());
        assert!(Profile::new(g, vec![0.2, 0.3, 1.1], 0.0, 1.0).is_err());
        assert!(Profile::new(g, vec![0.2, 0.3, 0.4], 0.3, 1.0).is_err());
    }

    #[test]
    fn crop_keeps_samples() {
        let u = Profile::ramp(grid(), 0.0, 2.0).unwrap();
        let c = u.crop(-2.0, 2.0).unwrap();
        assert_eq!(c.left_tail(), 0.0);
        assert_eq!(c.right_tail(), 1.0);
        assert!((c.grid().min + 2.0).abs() < 1e-12);
        assert_eq!(c.evaluate(0.3), u.evaluate(0.3));
    }
}
