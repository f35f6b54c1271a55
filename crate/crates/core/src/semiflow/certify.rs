//! Numerical certification of the structural hypotheses on `Q^tau`:
//! order preservation, translation equivariance, bistable constant dynamics,
//! continuity and the semigroup law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SemiflowConfig;
use crate::error::Result;
use crate::profile::{max_excess, sup_dist, Grid, GridFn, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub tau: f64,
    /// Time over which constants are evolved.
    pub horizon: f64,
    /// Largest random shift, in grid steps.
    pub max_shift: i64,
    pub order_tol: f64,
    pub translation_tol: f64,
    pub equilibrium_tol: f64,
    pub semigroup_tol: f64,
    pub perturbation: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            tau: 1.0,
            horizon: 10.0,
            max_shift: 40,
            order_tol: 1e-8,
            translation_tol: 1e-8,
            equilibrium_tol: 1e-9,
            semigroup_tol: 1e-6,
            perturbation: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    /// Distance to failure; negative when the check failed.
    pub margin: f64,
    pub detail: String,
}

impl CheckResult {
    fn upper(name: &str, worst: f64, limit: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: worst <= limit,
            worst,
            margin: limit - worst,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Largest summed projection correction over all evolutions performed.
    pub projection_budget: f64,
}

impl HypothesisReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Random nondecreasing profile whose transition sits in the middle half of the grid.
fn random_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> Profile {
    let (a, b) = (grid.min, grid.max());
    let (lo, hi) = (a + 0.25 * (b - a), b - 0.25 * (b - a));
    let knots = rng.gen_range(2..=7);
    let mut xs: Vec<f64> = (0..knots).map(|_| rng.gen_range(lo..hi)).collect();
    xs.sort_by(f64::total_cmp);
    let bottom = rng.gen_range(0.0..0.3);
    let top = rng.gen_range(0.7..1.0);
    let inc: Vec<f64> = (1..knots).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = inc.iter().sum();
    let mut ys = vec![bottom];
    for d in &inc {
        let last = ys[ys.len() - 1];
        ys.push((last + d / total * (top - bottom)).min(top));
    }
    let eval = |x: f64| {
        let i = xs.partition_point(|&k| k <= x);
        if i == 0 {
            bottom
        } else if i == knots {
            top
        } else {
            let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            ys[i - 1] + t * (ys[i] - ys[i - 1])
        }
    };
    let (p, _) = Profile::project(GridFn::from_fn(*grid, eval, bottom, top));
    p
}

#[derive(Default)]
struct Trial {
    order: f64,
    order_slack: f64,
    translation: f64,
    continuity_ratio: f64,
    semigroup: f64,
    budget: f64,
}

fn run_trial(cfg: &SemiflowConfig, opt: &CertifyOptions, seed: u64) -> Result<Trial> {
    let grid = *cfg.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = opt.tau;
    let mut t = Trial::default();

    // order preservation on u1 <= u2 = max(u1, w)
    let u1 = random_profile(&grid, &mut rng);
    let u2 = u1.max_with(&random_profile(&grid, &mut rng));
    let (q1, b1) = cfg.evolve_logged(&u1, tau)?;
    let (q2, b2) = cfg.evolve_logged(&u2, tau)?;
    t.order = max_excess(q1.as_grid_fn(), q2.as_grid_fn()).max(0.0);
    t.order_slack = b1 + b2;
    t.budget = b1.max(b2);

    // translation equivariance on the fixed grid
    let k = loop {
        let k = rng.gen_range(-opt.max_shift..=opt.max_shift);
        if k != 0 {
            break k;
        }
    };
    let h = k as f64 * grid.step;
    let shifted = u1.translate(h).resample(&grid);
    let lhs = cfg.evolve(&shifted, tau)?;
    let rhs = q1.translate(h).resample(&grid);
    let pad = h.abs() + 0.25 * (grid.max() - grid.min);
    t.translation = sup_dist(
        lhs.as_grid_fn(),
        rhs.as_grid_fn(),
        (grid.min + pad, grid.max() - pad),
    );

    // continuity: Lipschitz ratio under a small monotone perturbation
    let bump = random_profile(&grid, &mut rng);
    let mut pert = u1.as_grid_fn().clone();
    for (v, b) in pert.values.iter_mut().zip(bump.values()) {
        *v = (*v + opt.perturbation * b).min(1.0);
    }
    pert.right_tail = (pert.right_tail + opt.perturbation * bump.right_tail()).min(1.0);
    pert.left_tail = (pert.left_tail + opt.perturbation * bump.left_tail()).min(1.0);
    let (pert, _) = Profile::project(pert);
    let win = (f64::NEG_INFINITY, f64::INFINITY);
    let din = sup_dist(pert.as_grid_fn(), u1.as_grid_fn(), win);
    let dout = sup_dist(cfg.evolve(&pert, tau)?.as_grid_fn(), q1.as_grid_fn(), win);
    t.continuity_ratio = if din > 0.0 { dout / din } else { 0.0 };

    // semigroup law with split times off the step lattice
    let a = 0.45 * tau;
    let two = cfg.evolve(&cfg.evolve(&u1, a)?, tau - a)?;
    t.semigroup = sup_dist(two.as_grid_fn(), q1.as_grid_fn(), win);
    Ok(t)
}

/// Runs all checks; failures are report entries, not errors.
///
/// Solver errors (for example an exceeded projection budget) still propagate.
pub fn certify_hypotheses(cfg: &SemiflowConfig, opt: &CertifyOptions) -> Result<HypothesisReport> {
    let mut seeder = ChaCha8Rng::seed_from_u64(opt.seed);
    let seeds: Vec<u64> = (0..opt.trials).map(|_| seeder.gen()).collect();
    let trials: Vec<Trial> = seeds
        .par_iter()
        .map(|&s| run_trial(cfg, opt, s))
        .collect::<Result<_>>()?;

    let fold = |f: fn(&Trial) -> f64| trials.iter().map(f).fold(0.0, f64::max);
    let order_excess = trials
        .iter()
        .map(|t| t.order - t.order_slack)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut budget = fold(|t| t.budget);
    let mut checks = vec![
        CheckResult {
            name: "order_preservation".into(),
            passed: order_excess <= opt.order_tol,
            worst: fold(|t| t.order),
            margin: opt.order_tol - order_excess.max(0.0),
            detail: format!(
                "{} ordered pairs, projection slack up to {:e}",
                opt.trials,
                fold(|t| t.order_slack)
            ),
        },
        CheckResult::upper(
            "translation_equivariance",
            fold(|t| t.translation),
            opt.translation_tol,
            format!("grid-aligned shifts up to {} steps", opt.max_shift),
        ),
    ];
    let lip_bound = ((2.0 + cfg.reaction().lipschitz()) * opt.tau).exp();
    checks.push(CheckResult::upper(
        "continuity",
        fold(|t| t.continuity_ratio),
        lip_bound,
        format!(
            "output/input sup ratio for perturbations of size {:e}",
            opt.perturbation
        ),
    ));
    checks.push(CheckResult::upper(
        "semigroup",
        fold(|t| t.semigroup),
        opt.semigroup_tol,
        "Q^a Q^b vs Q^(a+b)".into(),
    ));

    // constants: a two-point grid is enough since the tails carry the dynamics
    let tiny = cfg.with_grid(Grid::new(0.0, cfg.grid().step, 2)?)?;
    let g = *tiny.grid();
    let alpha = cfg.reaction().base().alpha();
    let evolve_const = |gamma: f64| -> Result<(f64, f64)> {
        let (p, b) = tiny.evolve_logged(&Profile::constant(g, gamma)?, opt.horizon)?;
        Ok((p.values()[0], b))
    };
    let mut eq_worst = 0.0_f64;
    for gamma in [0.0, alpha, 1.0] {
        let (v, b) = evolve_const(gamma)?;
        budget = budget.max(b);
        eq_worst = eq_worst.max((v - gamma).abs());
    }
    checks.push(CheckResult::upper(
        "equilibria",
        eq_worst,
        opt.equilibrium_tol,
        format!("0, alpha, 1 over t = {}", opt.horizon),
    ));
    let mut worst = (f64::INFINITY, 0.0);
    for k in 1..10 {
        let s = k as f64 / 10.0;
        for (gamma, sign) in [(s * alpha, -1.0), (alpha + s * (1.0 - alpha), 1.0)] {
            let (v, b) = evolve_const(gamma)?;
            budget = budget.max(b);
            let m = sign * (v - gamma);
            if m < worst.0 {
                worst = (m, gamma);
            }
        }
    }
    checks.push(CheckResult {
        name: "bistable_constants".into(),
        passed: worst.0 > 0.0,
        worst: worst.1,
        margin: worst.0,
        detail: format!(
            "constants below alpha must decrease and above alpha increase over t = {}; tightest at gamma = {}",
            opt.horizon, worst.1
        ),
    });

    Ok(HypothesisReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        projection_budget: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Measure;
    use crate::semiflow::Nonlinearity;

    #[test]
    fn random_profiles_are_valid_and_deterministic() {
        let g = Grid::spanning(-10.0, 10.0, 0.1).unwrap();
        let a = random_profile(&g, &mut ChaCha8Rng::seed_from_u64(3));
        let b = random_profile(&g, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!(a.left_tail() < a.right_tail());
    }

    #[test]
    fn corrupted_nonlinearity_fails_constants() {
        let g = Grid::spanning(-10.0, 10.0, 0.1).unwrap();
        let bad = Nonlinearity::tabulated(
            0.3,
            vec![0.0, 0.15, 0.3, 0.6, 0.9, 1.0],
            vec![0.0, -0.02, 0.0, 0.05, -0.05, 0.0],
        )
        .unwrap();
        let cfg = SemiflowConfig::new(Measure::dirac(1.0), bad, g, 0.1).unwrap();
        let opt = CertifyOptions {
            trials: 4,
            ..Default::default()
        };
        let r = certify_hypotheses(&cfg, &opt).unwrap();
        assert!(!r.check("bistable_constants").unwrap().passed);
        assert!(!r.passed);
    }
}
