//! End-to-end checks of sub/super-solutions, the pinned recursion, extraction
//! and the sub-front speed bounds.

use nonlocal_fronts::bounds::{
    bound_curve, check_subfront_speed_bound, hypothesis7_gap, infimum, log_grid, reduced_subfront,
    SpeedBoundQuery,
};
use nonlocal_fronts::front::{
    build_sub_super_auto, certify_step_speeds, classify_limits, extract_front, measure_speed,
    perturbed_fixed_point, speed_violation, FixedPoint, RecursionConfig, StepSpeeds, SubSuperPair,
    DEFAULT_EPSILON,
};
use nonlocal_fronts::measure::Measure;
use nonlocal_fronts::profile::{Grid, Profile, Side};
use nonlocal_fronts::semiflow::{extend_nonlinearity, Nonlinearity, SemiflowConfig};
use nonlocal_fronts::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 0.05;

struct Setup {
    flow: SemiflowConfig,
    pair: SubSuperPair,
    speeds: StepSpeeds,
    cfg: RecursionConfig,
}

fn setup(m: Measure, alpha: f64) -> Setup {
    let f = Nonlinearity::cubic(1.0, alpha).unwrap();
    let grid = Grid::spanning(-80.0, 80.0, H).unwrap();
    let flow = SemiflowConfig::new(m.clone(), f.clone(), grid, 0.1).unwrap();
    let fhat = extend_nonlinearity(&f, f.lipschitz()).unwrap();
    let pair = build_sub_super_auto(&fhat, &m, DEFAULT_EPSILON, grid).unwrap();
    let cfg = RecursionConfig::default();
    let speeds = certify_step_speeds(&pair, &flow, cfg.tau).unwrap();
    Setup {
        flow,
        pair,
        speeds,
        cfg,
    }
}

fn solve(s: &Setup, ns: &[u32]) -> Vec<FixedPoint> {
    ns.iter()
        .map(|&n| perturbed_fixed_point(n, &s.pair, &s.speeds, &s.cfg, &s.flow).unwrap())
        .collect()
}

#[test]
fn sub_and_super_solutions_travel_no_slower_than_claimed() {
    let s = setup(Measure::dirac(1.0), 0.3);
    assert!(s.pair.residual_lower >= 0.0 && s.pair.residual_upper >= 0.0);
    assert_eq!(s.pair.psi_lower.evaluate(0.0), 0.0);
    assert!((s.pair.psi_lower.right_tail() - (1.0 - 0.7 / 4.0)).abs() < 1e-15);
    assert!((s.pair.c_lower + 400.0).abs() < 1e-9);
    let v = speed_violation(&s.pair, &s.flow, &[1.0, 2.0, 4.0]).unwrap();
    assert!(v <= 1e-8, "violation {v}");
    // the certified per-step bracket is far tighter and still contains the true speed
    assert!(s.pair.c_lower <= s.speeds.lower && s.speeds.upper <= s.pair.c_upper);
}

#[test]
fn pinned_profile_connects_zero_to_one_inside_the_sandwich() {
    let s = setup(Measure::dirac(1.0), 0.3);
    let n = 20;
    let p = &solve(&s, &[n])[0];
    assert!(p.residual < s.cfg.fixpoint_tol);
    assert!(p.worst_decrease <= 1e-8 && p.worst_sandwich <= 1e-8);
    assert!(p.phi.left_tail() < 1e-6 && p.phi.right_tail() > 1.0 - 1e-6);
    let margin = 1.0 / s.pair.epsilon + s.speeds.half_width();
    for level in [0.1, 0.5, 0.9] {
        let x = p.phi.level_crossing(level).unwrap();
        assert!(x.abs() <= n as f64 + margin, "level {level} at {x}");
    }
    // iterates only grow, so the step history is nonnegative by construction
    assert!(p.history.iter().all(|d| *d >= 0.0));
}

#[test]
fn recursion_reports_history_when_out_of_iterations() {
    let mut s = setup(Measure::dirac(1.0), 0.3);
    s.cfg.max_iters = 5;
    match perturbed_fixed_point(10, &s.pair, &s.speeds, &s.cfg, &s.flow) {
        Err(Error::NotConverged { history, .. }) => assert_eq!(history.len(), 5),
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn extraction_orders_speeds_and_centers_profiles() {
    let s = setup(Measure::atomic(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(), 0.3);
    let points = solve(&s, &[20, 40, 80]);
    let levels = s.cfg.levels(&s.pair).unwrap();
    let (trace, minus, plus) =
        extract_front(&points, &s.speeds, levels, 0.3, &s.cfg, &s.flow).unwrap();
    let tol = s.cfg.cauchy_tol;
    assert!(s.speeds.lower <= plus.c + tol);
    assert!(plus.c <= minus.c + tol);
    assert!(minus.c <= s.speeds.upper + tol);
    for r in &trace.rows {
        assert!(r.y <= r.z);
    }
    assert!(-1.0 <= trace.xi_minus && trace.xi_minus <= trace.xi_plus + tol && trace.xi_plus <= 1.0);
    assert!(minus.phi.level_crossing(levels.0).unwrap().abs() <= H);
    assert!(plus.phi.level_crossing(levels.1).unwrap().abs() <= H);
    assert!(minus.accepted && plus.accepted);
}

#[test]
fn extraction_ignores_common_translation() {
    let s = setup(Measure::atomic(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap(), 0.3);
    let points = solve(&s, &[20, 40, 80]);
    let levels = s.cfg.levels(&s.pair).unwrap();
    let (t0, ..) = extract_front(&points, &s.speeds, levels, 0.3, &s.cfg, &s.flow).unwrap();
    let shifted: Vec<FixedPoint> = points
        .iter()
        .map(|p| FixedPoint {
            phi: p.phi.translate(0.5).resample(s.flow.grid()),
            ..p.clone()
        })
        .collect();
    let (t1, ..) = extract_front(&shifted, &s.speeds, levels, 0.3, &s.cfg, &s.flow).unwrap();
    assert!((t0.c_minus - t1.c_minus).abs() < 1e-9);
    assert!((t0.c_plus - t1.c_plus).abs() < 1e-9);
}

#[test]
fn unsettled_tail_is_rejected() {
    let g = Grid::spanning(-5.0, 5.0, 0.1).unwrap();
    let p = Profile::new(g, vec![0.15; g.len], 0.15, 0.15).unwrap();
    assert!(matches!(
        classify_limits(&p, 0.3, 0.05),
        Err(Error::NotSettled { .. })
    ));
}

#[test]
fn fast_front_leaves_a_small_domain() {
    let f = Nonlinearity::cubic(1.0, 0.3).unwrap();
    let g = Grid::spanning(-10.0, 10.0, H).unwrap();
    let flow = SemiflowConfig::new(Measure::dirac(1.0), f, g, 0.1).unwrap();
    let u0 = Profile::ramp(g, 0.0, 2.0).unwrap();
    assert!(matches!(
        measure_speed(&u0, 40.0, 0.3, 11, &flow),
        Err(Error::DomainTooSmall { .. })
    ));
}

#[test]
fn infimum_is_below_every_sample() {
    let m = Measure::uniform(-0.5, 1.5, H, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for side in [Side::Minus, Side::Plus] {
        let r = infimum(&SpeedBoundQuery::new(m.clone(), 0.1, side).unwrap());
        for _ in 0..100 {
            let lam = 10f64.powf(rng.gen_range(-3.0..3.0));
            assert!(r.value <= bound_curve(&m, 0.1, side, lam) + 1e-12);
        }
    }
}

#[test]
fn infimum_is_stable_under_grid_doubling() {
    let m = Measure::atomic(&[(-0.5, 0.3), (1.0, 0.7)]).unwrap();
    for side in [Side::Minus, Side::Plus] {
        let coarse = infimum(&SpeedBoundQuery::with_grid(m.clone(), 0.1, side, log_grid(1e-3, 1e3, 121), 1e-10).unwrap());
        let fine = infimum(&SpeedBoundQuery::with_grid(m.clone(), 0.1, side, log_grid(1e-3, 1e3, 241), 1e-10).unwrap());
        assert!((coarse.value - fine.value).abs() < 1e-9);
    }
}

#[test]
fn reflection_swaps_infima() {
    let m = Measure::atomic(&[(-0.5, 0.3), (1.0, 0.7)]).unwrap();
    let a = hypothesis7_gap(&m, 0.1).unwrap();
    let b = hypothesis7_gap(&m.reflect(), 0.1).unwrap();
    assert!((a.minus.value - b.plus.value).abs() < 1e-12);
    assert!((a.plus.value - b.minus.value).abs() < 1e-12);
}

#[test]
fn curve_blows_up_near_zero() {
    let m = Measure::dirac(1.0);
    let grid = log_grid(1e-3, 1e3, 241);
    let small = bound_curve(&m, 0.1, Side::Minus, grid[0]);
    let median = bound_curve(&m, 0.1, Side::Minus, grid[120]);
    assert!(small > 50.0 * median);
}

#[test]
fn reduced_subfronts_respect_their_bounds() {
    let m = Measure::atomic(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap();
    let f = Nonlinearity::cubic(1.0, 0.5).unwrap();
    let g = Grid::spanning(-80.0, 80.0, H).unwrap();
    let flow = SemiflowConfig::new(m.clone(), f.clone(), g, 0.1).unwrap();
    let sigma = 0.5 * f.derivative_at_alpha();
    let minus = reduced_subfront(&f, &m, &flow, Side::Minus, 60.0, 31).unwrap();
    let plus = reduced_subfront(&f, &m, &flow, Side::Plus, 60.0, 31).unwrap();
    let cm = check_subfront_speed_bound(&minus, &m, sigma, 1e-3).unwrap();
    let cp = check_subfront_speed_bound(&plus, &m, sigma, 1e-3).unwrap();
    assert!(cm.holds && cp.holds);
    // a positive gap rules out a common speed for the two sub-fronts
    let gap = hypothesis7_gap(&m, sigma).unwrap();
    assert!(gap.positive);
    assert!(minus.c < plus.c);
    assert!(-minus.c + plus.c >= gap.gap - 2e-3);
}
