//! Maps between full fronts and sub-fronts.
//!
//! `R_-[u](x) = alpha * (1 - u(-x))` sends a `0 -> 1` profile to a `0 -> alpha`
//! profile, `R_+[u] = (1 - alpha) u + alpha` sends it to an `alpha -> 1` one.
//! The inverses are `S_-[v](x) = 1 - v(-x) / alpha` and
//! `S_+[v] = (v - alpha) / (1 - alpha)`.

use serde::{Deserialize, Serialize};

use super::{Grid, GridFn, Profile};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

const RANGE_TOL: f64 = 1e-12;

fn check_range(u: &Profile, lo: f64, hi: f64) -> Result<()> {
    let bad = |v: f64| v < lo - RANGE_TOL || v > hi + RANGE_TOL;
    if bad(u.left_tail()) || bad(u.right_tail()) || u.values().iter().any(|&v| bad(v)) {
        return Err(Error::Range(format!(
            "profile leaves [{lo}, {hi}] required by the inverse transform"
        )));
    }
    Ok(())
}

/// `x -> g(u(-x))`, stored on the mirrored grid. `g` must be nonincreasing.
fn reflect_with(u: &Profile, g: impl Fn(f64) -> f64) -> Result<Profile> {
    let grid = u.grid();
    let mirrored = Grid::new(-grid.max(), grid.step, grid.len)?;
    let values = u.values().iter().rev().map(|&v| g(v)).collect();
    let out = GridFn::new(mirrored, values, g(u.right_tail()), g(u.left_tail()))?;
    Ok(Profile::project(out).0)
}

fn map_values(u: &Profile, g: impl Fn(f64) -> f64) -> Result<Profile> {
    let f = u.as_grid_fn();
    let out = GridFn::new(
        f.grid,
        f.values.iter().map(|&v| g(v)).collect(),
        g(f.left_tail),
        g(f.right_tail),
    )?;
    Ok(Profile::project(out).0)
}

/// Applies `R_-`, `R_+` (forward) or `S_-`, `S_+` (inverse).
pub fn sub_front_transform(
    u: &Profile,
    side: Side,
    alpha: f64,
    direction: Direction,
) -> Result<Profile> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    match (side, direction) {
        (Side::Minus, Direction::Forward) => reflect_with(u, |v| alpha * (1.0 - v)),
        (Side::Minus, Direction::Inverse) => {
            check_range(u, 0.0, alpha)?;
            reflect_with(u, |v| 1.0 - v / alpha)
        }
        (Side::Plus, Direction::Forward) => map_values(u, |v| (1.0 - alpha) * v + alpha),
        (Side::Plus, Direction::Inverse) => {
            check_range(u, alpha, 1.0)?;
            map_values(u, |v| (v - alpha) / (1.0 - alpha))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::sup_dist;

    const A: f64 = 0.3;

    fn grid() -> Grid {
        Grid::spanning(-4.0, 4.0, 0.05).unwrap()
    }

    #[test]
    fn plus_maps_endpoints() {
        let zero = Profile::constant(grid(), 0.0).unwrap();
        let one = Profile::constant(grid(), 1.0).unwrap();
        let r0 = sub_front_transform(&zero, Side::Plus, A, Direction::Forward).unwrap();
        let r1 = sub_front_transform(&one, Side::Plus, A, Direction::Forward).unwrap();
        assert!(r0.values().iter().all(|&v| (v - A).abs() < 1e-15));
        assert!(r1.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn inverse_pairs_recover_ramp() {
        let u = Profile::ramp(grid(), 0.4, 2.0).unwrap();
        for side in [Side::Minus, Side::Plus] {
            let r = sub_front_transform(&u, side, A, Direction::Forward).unwrap();
            let back = sub_front_transform(&r, side, A, Direction::Inverse).unwrap();
            let d = sup_dist(back.as_grid_fn(), u.as_grid_fn(), (-4.0, 4.0));
            assert!(d < 1e-12, "{side:?}: {d}");
        }
    }

    #[test]
    fn minus_swaps_limits_and_formula() {
        let u = Profile::ramp(grid(), 0.4, 2.0).unwrap();
        let r = sub_front_transform(&u, Side::Minus, A, Direction::Forward).unwrap();
        assert_eq!(r.left_tail(), 0.0);
        assert!((r.right_tail() - A).abs() < 1e-15);
        for x in [-1.3, -0.2, 0.0, 0.55, 2.0] {
            let expect = A * (1.0 - u.evaluate(-x));
            assert!((r.evaluate(x) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_checks_range() {
        let u = Profile::ramp(grid(), 0.0, 2.0).unwrap();
        assert!(matches!(
            sub_front_transform(&u, Side::Minus, A, Direction::Inverse),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            sub_front_transform(&u, Side::Plus, A, Direction::Inverse),
            Err(Error::Range(_))
        ));
    }
}
