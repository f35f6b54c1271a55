//! Finite measures on the line: atoms plus a sampled density.
//!
//! A [`Density`] lives on the lattice `y_j = (first + j) * step` and is
//! handled through its trapezoid weights `w_j = step * v_j` (halved at the
//! two ends). Convolution, sums and exponential moments all act on those
//! weights, so the discrete algebra is exact: the exponential moment of a
//! convolution is the product of the exponential moments.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profile::GridFn;

/// Default cap on the support radius of convolution products.
pub const DEFAULT_MAX_SUPPORT: f64 = 1.0e3;

/// Hard cap on the order of the measure exponential.
pub const MAX_SERIES_ORDER: usize = 64;

const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub loc: f64,
    pub mass: f64,
}

/// Nonnegative piecewise-linear density sampled on an aligned lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    first: i64,
    step: f64,
    values: Vec<f64>,
}

fn lattice_offset(x: f64, step: f64) -> Option<i64> {
    let s = x / step;
    let r = s.round();
    ((s - r).abs() < LATTICE_TOL).then_some(r as i64)
}

impl Density {
    /// Density with samples `values` at `grid_min + j * step`.
    ///
    /// `grid_min` must be an integer multiple of `step`.
    pub fn new(grid_min: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return invalid(format!("density step must be positive, got {step}"));
        }
        if values.len() < 2 {
            return invalid("density needs at least two samples");
        }
        if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return invalid("density samples must be finite and nonnegative");
        }
        let Some(first) = lattice_offset(grid_min, step) else {
            return invalid(format!(
                "density grid_min {grid_min} is not a multiple of its step {step}"
            ));
        };
        Ok(Self {
            first,
            step,
            values,
        })
    }

    /// Density on `[grid_min, grid_max]`; the sample count must match the span.
    pub fn spanning(grid_min: f64, grid_max: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        let cells = (grid_max - grid_min) / step;
        if (cells - cells.round()).abs() > 1e-6 || cells.round() as usize + 1 != values.len() {
            return invalid(format!(
                "density on [{grid_min}, {grid_max}] with step {step} needs {} samples, got {}",
                cells.round() as i64 + 1,
                values.len()
            ));
        }
        Self::new(grid_min, step, values)
    }

    fn from_weights(first: i64, step: f64, weights: &[f64]) -> Self {
        let n = weights.len();
        let values = weights
            .iter()
            .enumerate()
            .map(|(j, &w)| {
                let end = j == 0 || j == n - 1;
                if end {
                    2.0 * w / step
                } else {
                    w / step
                }
            })
            .collect();
        Self {
            first,
            step,
            values,
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_min(&self) -> f64 {
        self.first as f64 * self.step
    }

    pub fn grid_max(&self) -> f64 {
        (self.first + self.values.len() as i64 - 1) as f64 * self.step
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (self.first + j as i64) as f64 * self.step
    }

    /// Trapezoid weights `step * v_j`, halved at both ends.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let w = self.step * v;
                if j == 0 || j == n - 1 {
                    0.5 * w
                } else {
                    w
                }
            })
            .collect()
    }

    pub fn mass(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Linear interpolation, zero outside `[grid_min, grid_max]`.
    pub fn eval(&self, y: f64) -> f64 {
        let s = y / self.step - self.first as f64;
        let last = (self.values.len() - 1) as f64;
        if s < -LATTICE_TOL || s > last + LATTICE_TOL {
            return 0.0;
        }
        let s = s.clamp(0.0, last);
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let t = s - i as f64;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }

    fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            first: -(self.first + self.values.len() as i64 - 1),
            step: self.step,
            values,
        }
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            first: self.first,
            step: self.step,
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }
}

/// Weights on an aligned lattice, the working form for algebra on densities.
struct Weights {
    first: i64,
    step: f64,
    w: Vec<f64>,
}

impl Weights {
    fn of(d: &Density) -> Self {
        Self {
            first: d.first,
            step: d.step,
            w: d.weights(),
        }
    }

    fn into_density(self) -> Density {
        Density::from_weights(self.first, self.step, &self.w)
    }

    fn add(mut self, other: Weights) -> Weights {
        let lo = self.first.min(other.first);
        let hi = (self.first + self.w.len() as i64).max(other.first + other.w.len() as i64);
        let mut w = vec![0.0; (hi - lo) as usize];
        for (src, first) in [(&self.w, self.first), (&other.w, other.first)] {
            let off = (first - lo) as usize;
            for (dst, &v) in w[off..off + src.len()].iter_mut().zip(src) {
                *dst += v;
            }
        }
        self.first = lo;
        self.w = w;
        self
    }

    /// Shift by `loc` and scale by `mass`; off-lattice shifts are split linearly.
    fn shifted(&self, loc: f64, mass: f64) -> Weights {
        let s = loc / self.step;
        let k = s.floor();
        let t = s - k;
        let k = k as i64;
        if t < LATTICE_TOL || 1.0 - t < LATTICE_TOL {
            let k = s.round() as i64;
            return Weights {
                first: self.first + k,
                step: self.step,
                w: self.w.iter().map(|v| v * mass).collect(),
            };
        }
        let mut w = vec![0.0; self.w.len() + 1];
        for (j, &v) in self.w.iter().enumerate() {
            w[j] += (1.0 - t) * mass * v;
            w[j + 1] += t * mass * v;
        }
        Weights {
            first: self.first + k,
            step: self.step,
            w,
        }
    }

    fn convolve(&self, other: &Weights) -> Weights {
        let mut w = vec![0.0; self.w.len() + other.w.len() - 1];
        for (i, &a) in self.w.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (dst, &b) in w[i..].iter_mut().zip(&other.w) {
                *dst += a * b;
            }
        }
        Weights {
            first: self.first + other.first,
            step: self.step,
            w,
        }
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.loc.total_cmp(&b.loc));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if (last.loc - a.loc).abs() <= 1e-12 * (1.0 + a.loc.abs()) => {
                last.mass += a.mass
            }
            _ => out.push(a),
        }
    }
    out
}

/// A finite compactly supported measure: atoms plus an optional density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    atoms: Vec<Atom>,
    density: Option<Density>,
}

impl Measure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        for a in &atoms {
            if !a.loc.is_finite() || !(a.mass >= 0.0 && a.mass.is_finite()) {
                return invalid(format!(
                    "atom at {} with mass {} is not a finite nonnegative atom",
                    a.loc, a.mass
                ));
            }
        }
        Ok(Self {
            atoms: merge_atoms(atoms),
            density,
        })
    }

    pub fn zero() -> Self {
        Self {
            atoms: Vec::new(),
            density: None,
        }
    }

    pub fn dirac(loc: f64) -> Self {
        Self {
            atoms: vec![Atom { loc, mass: 1.0 }],
            density: None,
        }
    }

    /// Sum of atoms given as `(loc, mass)` pairs.
    pub fn atomic(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(loc, mass)| Atom { loc, mass })
                .collect(),
            None,
        )
    }

    pub fn from_density(d: Density) -> Self {
        Self {
            atoms: Vec::new(),
            density: Some(d),
        }
    }

    /// Uniform density of total `mass` on `[a, b]`; `a`, `b` must lie on the `step` lattice.
    pub fn uniform(a: f64, b: f64, step: f64, mass: f64) -> Result<Self> {
        if !(b > a) {
            return invalid(format!("uniform needs a < b, got [{a}, {b}]"));
        }
        let d = Density::spanning(a, b, step, vec![1.0; lattice_len(a, b, step)?])?;
        Self::normalized(d, mass)
    }

    /// Symmetric hat of total `mass` centered at `center` with half width `half_width`.
    pub fn triangle(center: f64, half_width: f64, step: f64, mass: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return invalid("triangle half width must be positive");
        }
        let (a, b) = (center - half_width, center + half_width);
        let n = lattice_len(a, b, step)?;
        let values = (0..n)
            .map(|j| (1.0 - ((a + j as f64 * step) - center).abs() / half_width).max(0.0))
            .collect();
        Self::normalized(Density::spanning(a, b, step, values)?, mass)
    }

    /// Gaussian of width `sigma` truncated to `[center - radius, center + radius]`, renormalized to `mass`.
    pub fn gaussian_truncated(
        sigma: f64,
        radius: f64,
        center: f64,
        step: f64,
        mass: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0 && radius > 0.0) {
            return invalid("gaussian needs positive sigma and radius");
        }
        let (a, b) = (center - radius, center + radius);
        let n = lattice_len(a, b, step)?;
        let values = (0..n)
            .map(|j| {
                let y = a + j as f64 * step - center;
                (-0.5 * (y / sigma).powi(2)).exp()
            })
            .collect();
        Self::normalized(Density::spanning(a, b, step, values)?, mass)
    }

    fn normalized(d: Density, mass: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return invalid(format!("mass must be finite and nonnegative, got {mass}"));
        }
        let total = d.mass();
        Ok(Self::from_density(d.scaled(mass / total)))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Atom masses plus the trapezoid integral of the density.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.density.as_ref().map_or(0.0, Density::mass)
    }

    /// Mass of the atom sitting at `y`, if any.
    pub fn atom_mass_at(&self, y: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| (a.loc - y).abs() <= 1e-12 * (1.0 + y.abs()))
            .map(|a| a.mass)
            .sum()
    }

    /// Smallest `r` with the support inside `[-r, r]`.
    pub fn support_radius(&self) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.loc.abs()).fold(0.0, f64::max);
        let dens = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.grid_min().abs().max(d.grid_max().abs()));
        atoms.max(dens)
    }

    /// Largest support point in direction `sign` (`+1` or `-1`), or `None` for the zero measure.
    pub fn directional_support(&self, sign: f64) -> Option<f64> {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| sign * a.loc);
        let dens = self.density.iter().flat_map(|d| {
            d.values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(move |(j, _)| sign * d.node(j))
        });
        atoms.chain(dens).reduce(f64::max)
    }

    /// `sum mass * e^{lam * loc} + sum_j w_j e^{lam * y_j}`.
    pub fn exp_moment(&self, lam: f64) -> f64 {
        // zero weights are skipped so that 0 * inf never turns into NaN
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.mass != 0.0)
            .map(|a| a.mass * (lam * a.loc).exp())
            .sum();
        let dens = self.density.as_ref().map_or(0.0, |d| {
            d.weights()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(j, w)| w * (lam * d.node(j)).exp())
                .sum()
        });
        atoms + dens
    }

    /// Mirror image `y -> -y`.
    pub fn reflect(&self) -> Self {
        Self {
            atoms: merge_atoms(
                self.atoms
                    .iter()
                    .map(|a| Atom {
                        loc: -a.loc,
                        mass: a.mass,
                    })
                    .collect(),
            ),
            density: self.density.as_ref().map(Density::reflect),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    loc: a.loc,
                    mass: a.mass * k,
                })
                .collect(),
            density: self.density.as_ref().map(|d| d.scaled(k)),
        }
    }

    /// Sum of two measures. Densities must share their step.
    pub fn plus(&self, other: &Measure) -> Result<Self> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let density = match (&self.density, &other.density) {
            (Some(a), Some(b)) => {
                same_step(a, b)?;
                Some(Weights::of(a).add(Weights::of(b)).into_density())
            }
            (Some(a), None) => Some(a.clone()),
            (None, b) => b.clone(),
        };
        Ok(Self {
            atoms: merge_atoms(atoms),
            density,
        })
    }
}

fn lattice_len(a: f64, b: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) {
        return invalid("step must be positive");
    }
    let cells = (b - a) / step;
    if (cells - cells.round()).abs() > 1e-6 {
        return invalid(format!(
            "interval [{a}, {b}] is not a whole number of steps {step}"
        ));
    }
    Ok(cells.round() as usize + 1)
}

fn same_step(a: &Density, b: &Density) -> Result<()> {
    if (a.step - b.step).abs() > 1e-12 * a.step {
        return invalid(format!(
            "density steps differ ({} vs {}); resample to a common step",
            a.step, b.step
        ));
    }
    Ok(())
}

/// `m1 * m2` with the default support cap.
pub fn convolve_measures(m1: &Measure, m2: &Measure) -> Result<Measure> {
    convolve_measures_capped(m1, m2, DEFAULT_MAX_SUPPORT)
}

/// `m1 * m2`; fails if the product's support radius would exceed `max_radius`.
pub fn convolve_measures_capped(m1: &Measure, m2: &Measure, max_radius: f64) -> Result<Measure> {
    let required = m1.support_radius() + m2.support_radius();
    if required > max_radius {
        return Err(Error::SupportTooLarge {
            required,
            limit: max_radius,
        });
    }
    let mut atoms = Vec::with_capacity(m1.atoms.len() * m2.atoms.len());
    for a in &m1.atoms {
        for b in &m2.atoms {
            atoms.push(Atom {
                loc: a.loc + b.loc,
                mass: a.mass * b.mass,
            });
        }
    }
    let mut parts: Vec<Weights> = Vec::new();
    if let (Some(a), Some(b)) = (&m1.density, &m2.density) {
        same_step(a, b)?;
        parts.push(Weights::of(a).convolve(&Weights::of(b)));
    }
    for (atoms_of, dens_of) in [(m1, m2), (m2, m1)] {
        if let Some(d) = &dens_of.density {
            let w = Weights::of(d);
            for a in &atoms_of.atoms {
                parts.push(w.shifted(a.loc, a.mass));
            }
        }
    }
    let density = parts
        .into_iter()
        .reduce(Weights::add)
        .map(Weights::into_density);
    Ok(Measure {
        atoms: merge_atoms(atoms),
        density,
    })
}

/// `sum_{k=0}^{K} mhat^{*k} / k!`, the time-one measure of `v_t = mhat * v` truncated at order `K`.
pub fn exp_series(mhat: &Measure, order: usize) -> Result<Measure> {
    exp_series_capped(mhat, order, DEFAULT_MAX_SUPPORT)
}

pub fn exp_series_capped(mhat: &Measure, order: usize, max_radius: f64) -> Result<Measure> {
    let mut term = Measure::dirac(0.0);
    let mut sum = term.clone();
    for k in 1..=order {
        term = convolve_measures_capped(&term, mhat, max_radius)?.scaled(1.0 / k as f64);
        sum = sum.plus(&term)?;
    }
    Ok(sum)
}

/// Ratio of the `K`-th series term to the running sum, at exponent `lam`.
fn tail_ratio(mhat: &Measure, lam: f64, order: usize) -> f64 {
    let m = mhat.exp_moment(lam);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=order {
        term *= m / k as f64;
        sum += term;
    }
    if sum == 0.0 {
        0.0
    } else {
        term / sum
    }
}

/// Smallest order whose last term is below `rel_tol` of the running sum at every `lam`.
pub fn series_order(mhat: &Measure, lams: &[f64], rel_tol: f64) -> Result<usize> {
    for order in 1..=MAX_SERIES_ORDER {
        if lams.iter().all(|&l| tail_ratio(mhat, l, order) < rel_tol) {
            return Ok(order);
        }
    }
    let (lambda, ratio) = lams
        .iter()
        .map(|&l| (l, tail_ratio(mhat, l, MAX_SERIES_ORDER)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, f64::NAN));
    Err(Error::NonConvergentSeries { lambda, ratio })
}

/// [`exp_series`] with the order picked by [`series_order`] at tolerance 1e-12.
pub fn exp_series_adaptive(mhat: &Measure, lams: &[f64]) -> Result<(Measure, usize)> {
    let order = series_order(mhat, lams, 1e-12)?;
    Ok((exp_series(mhat, order)?, order))
}

/// Worst relative error of `log E_nu(lam) = E_mhat(lam)` over `lams`, with `nu = exp_series(mhat, K)`.
pub fn verify_mgf_identity(mhat: &Measure, lams: &[f64], order: usize) -> Result<f64> {
    for &lam in lams {
        let ratio = tail_ratio(mhat, lam, order);
        if ratio >= 1e-12 {
            return Err(Error::NonConvergentSeries { lambda: lam, ratio });
        }
    }
    let nu = exp_series(mhat, order)?;
    Ok(lams
        .iter()
        .map(|&lam| {
            let target = mhat.exp_moment(lam);
            let got = nu.exp_moment(lam).ln();
            (got - target).abs() / target.abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max))
}

/// A measure laid onto a profile grid as integer offsets with weights.
///
/// `(S u)_i = sum_k w_k u_{i - k}`, reading the tails outside the grid.
#[derive(Debug, Clone)]
pub struct Stencil {
    offsets: Vec<i64>,
    weights: Vec<f64>,
    total: f64,
    snap_error: f64,
}

impl Stencil {
    /// Atoms snap to the nearest offset (the error is recorded); density nodes
    /// off the lattice are split linearly between neighbors, which evaluates
    /// piecewise-linear profiles exactly.
    pub fn new(m: &Measure, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return invalid("stencil step must be positive");
        }
        let mut pairs: Vec<(i64, f64)> = Vec::new();
        let mut snap_error = 0.0_f64;
        for a in &m.atoms {
            let k = (a.loc / step).round();
            snap_error = snap_error.max((a.loc - k * step).abs());
            pairs.push((k as i64, a.mass));
        }
        if let Some(d) = &m.density {
            for (j, w) in d.weights().into_iter().enumerate() {
                let s = d.node(j) / step;
                let r = s.round();
                if (s - r).abs() < LATTICE_TOL {
                    pairs.push((r as i64, w));
                } else {
                    let k = s.floor();
                    let t = s - k;
                    pairs.push((k as i64, (1.0 - t) * w));
                    pairs.push((k as i64 + 1, t * w));
                }
            }
        }
        pairs.sort_by_key(|p| p.0);
        let mut offsets = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (k, w) in pairs {
            if offsets.last() == Some(&k) {
                *weights.last_mut().unwrap() += w;
            } else {
                offsets.push(k);
                weights.push(w);
            }
        }
        let total = weights.iter().sum();
        Ok(Self {
            offsets,
            weights,
            total,
            snap_error,
        })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Largest distance an atom was moved to land on the grid.
    pub fn snap_error(&self) -> f64 {
        self.snap_error
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Writes `S u` into `out` (same length as `values`).
    pub fn apply(&self, values: &[f64], left: f64, right: f64, out: &mut [f64]) {
        let n = values.len() as i64;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (&k, &w) in self.offsets.iter().zip(&self.weights) {
            // i - k < 0  <=>  i < k;  i - k >= n  <=>  i >= n + k
            let lo = k.clamp(0, n) as usize;
            let hi = (n + k).clamp(0, n) as usize;
            for o in &mut out[..lo] {
                *o += w * left;
            }
            if hi > lo {
                let src = &values[(lo as i64 - k) as usize..(hi as i64 - k) as usize];
                for (o, &v) in out[lo..hi].iter_mut().zip(src) {
                    *o += w * v;
                }
            }
            for o in &mut out[hi.max(lo)..] {
                *o += w * right;
            }
        }
    }
}

/// `(m * u)(x) = int u(x - y) dm(y)` on `u`'s grid; tails become `total_mass * u(-+inf)`.
pub fn convolve(m: &Measure, u: &GridFn) -> Result<GridFn> {
    let s = Stencil::new(m, u.grid.step)?;
    let mut out = vec![0.0; u.values.len()];
    s.apply(&u.values, u.left_tail, u.right_tail, &mut out);
    Ok(GridFn {
        grid: u.grid,
        values: out,
        left_tail: s.total * u.left_tail,
        right_tail: s.total * u.right_tail,
    })
}

/// Density literal in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub grid_min: f64,
    pub grid_max: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

/// Named density generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Uniform {
        a: f64,
        b: f64,
        step: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    Triangle {
        #[serde(default)]
        center: f64,
        half_width: f64,
        step: f64,
        #[serde(default = "one")]
        mass: f64,
    },
    GaussianTruncated {
        sigma: f64,
        radius: f64,
        #[serde(default)]
        center: f64,
        step: f64,
        #[serde(default = "one")]
        mass: f64,
    },
}

impl Generator {
    pub fn build(&self) -> Result<Measure> {
        match *self {
            Generator::Uniform { a, b, step, mass } => Measure::uniform(a, b, step, mass),
            Generator::Triangle {
                center,
                half_width,
                step,
                mass,
            } => Measure::triangle(center, half_width, step, mass),
            Generator::GaussianTruncated {
                sigma,
                radius,
                center,
                step,
                mass,
            } => Measure::gaussian_truncated(sigma, radius, center, step, mass),
        }
    }
}

/// Measure literal: atoms plus at most one of an explicit density or a generator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default, rename = "atom")]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
    #[serde(default)]
    pub generator: Option<Generator>,
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure> {
        let density = match (&self.density, &self.generator) {
            (Some(_), Some(_)) => return invalid("give either a density or a generator, not both"),
            (Some(d), None) => Some(Density::spanning(
                d.grid_min,
                d.grid_max,
                d.step,
                d.values.clone(),
            )?),
            (None, Some(g)) => g.build()?.density,
            (None, None) => None,
        };
        Measure::new(self.atoms.clone(), density)
    }
}
