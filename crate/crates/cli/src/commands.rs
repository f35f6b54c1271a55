//! One function per subcommand. Each writes its outputs and reports whether
//! its checks passed; solver errors propagate.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nonlocal_fronts::bounds::{
    check_subfront_speed_bound, infimum, reduced_subfront, SpeedBoundQuery, SpeedBoundReport,
    SubFrontCheck,
};
use nonlocal_fronts::front::{
    build_sub_super_auto, certify_step_speeds, find_front, speed_violation, FrontResult, Limit,
    PairSummary, RecursionTrace, SpeedMeasurement, StepSpeeds,
};
use nonlocal_fronts::measure::{series_order, verify_mgf_identity};
use nonlocal_fronts::profile::{write_profile, GridFn, Profile, Side};
use nonlocal_fronts::semiflow::{
    certify_hypotheses, extend_nonlinearity, linear_series_discrepancy, HypothesisReport,
};
use serde::Serialize;

use crate::config::Problem;
use crate::svg::{line_plot, Series};

pub struct RunContext<'a> {
    pub problem: &'a Problem,
    pub out: PathBuf,
    pub svg: bool,
}

/// Outcome of a command that ran to completion.
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn points(p: &Profile) -> Vec<(f64, f64)> {
    let g = p.grid();
    p.values().iter().enumerate().map(|(i, &v)| (g.x(i), v)).collect()
}

fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct SimulateReport {
    times: Vec<f64>,
    level: f64,
    /// `None` where the level is not crossed.
    crossings: Vec<Option<f64>>,
    projection_budget: Vec<f64>,
    profiles: Vec<String>,
}

pub fn simulate(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let spec = &p.cfg.simulate;
    let u0 = spec.initial.build(*p.flow.grid())?;
    let k = spec.snapshots.max(1);
    let times: Vec<f64> = (1..=k).map(|i| p.cfg.time.horizon * i as f64 / k as f64).collect();
    let level = spec.level.unwrap_or(p.f.alpha());
    let snaps = p.flow.evolve_snapshots(&u0, &times)?;

    let mut report = SimulateReport {
        times: vec![0.0],
        level,
        crossings: vec![u0.level_crossing(level).ok()],
        projection_budget: vec![0.0],
        profiles: vec!["snapshot_000.csv".into()],
    };
    write_profile(&u0, &ctx.out.join("snapshot_000.csv"))?;
    for (i, (t, (u, budget))) in times.iter().zip(&snaps).enumerate() {
        let name = format!("snapshot_{:03}.csv", i + 1);
        write_profile(u, &ctx.out.join(&name))?;
        report.times.push(*t);
        report.crossings.push(u.level_crossing(level).ok());
        report.projection_budget.push(*budget);
        report.profiles.push(name);
    }
    write_json(&ctx.out.join("simulate.json"), &report)?;
    if ctx.svg {
        let mut series: Vec<Series> = Vec::new();
        let first = points(&u0);
        series.push(Series { label: "t = 0", points: first });
        if let Some((last, _)) = snaps.last() {
            series.push(Series { label: "t = T", points: points(last) });
        }
        line_plot(&ctx.out.join("simulate.svg"), "snapshots", "x", &series)?;
        let track: Vec<(f64, f64)> = report
            .times
            .iter()
            .zip(&report.crossings)
            .filter_map(|(t, x)| x.map(|x| (*t, x)))
            .collect();
        line_plot(
            &ctx.out.join("crossing_track.svg"),
            "level crossing x(t)",
            "t",
            &[Series { label: "x(t)", points: track }],
        )?;
    }
    Ok(Outcome {
        passed: true,
        summary: format!("{} snapshots up to t = {}", k, p.cfg.time.horizon),
    })
}

#[derive(Serialize)]
struct BranchSummary {
    branch: Side,
    c: f64,
    residual: f64,
    residual_2tau: f64,
    limits: (Limit, Limit),
    accepted: bool,
    profile: String,
}

impl BranchSummary {
    fn new(r: &FrontResult, profile: &str) -> Self {
        Self {
            branch: r.branch,
            c: r.c,
            residual: r.residual,
            residual_2tau: r.residual_2tau,
            limits: r.limits,
            accepted: r.accepted,
            profile: profile.into(),
        }
    }
}

#[derive(Serialize)]
struct FrontSummary {
    c: Option<f64>,
    primary: Option<Side>,
    c_lower: f64,
    c_upper: f64,
    ordering_ok: bool,
    measured: Option<SpeedMeasurement>,
    pair: PairSummary,
    minus: BranchSummary,
    plus: BranchSummary,
    trace: RecursionTrace,
}

pub fn front(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let r = find_front(&p.f, &p.measure, &p.flow, &p.front_options())?;
    write_profile(&r.minus.phi, &ctx.out.join("phi_minus.csv"))?;
    write_profile(&r.plus.phi, &ctx.out.join("phi_plus.csv"))?;
    let tol = p.cfg.recursion.cauchy_tol;
    let (lo, hi) = (r.pair.c_lower, r.pair.c_upper);
    let ordering_ok = lo <= r.plus.c + tol
        && r.plus.c <= r.minus.c + tol
        && r.minus.c <= hi + tol;
    let summary = FrontSummary {
        c: r.primary.as_ref().map(|f| f.c),
        primary: r.primary.as_ref().map(|f| f.branch),
        c_lower: lo,
        c_upper: hi,
        ordering_ok,
        measured: r.measured.clone(),
        pair: r.pair.clone(),
        minus: BranchSummary::new(&r.minus, "phi_minus.csv"),
        plus: BranchSummary::new(&r.plus, "phi_plus.csv"),
        trace: r.trace.clone(),
    };
    write_json(&ctx.out.join("front.json"), &summary)?;
    if ctx.svg {
        line_plot(
            &ctx.out.join("front.svg"),
            "front profiles",
            "x",
            &[
                Series { label: "phi_minus", points: points(&r.minus.phi) },
                Series { label: "phi_plus", points: points(&r.plus.phi) },
            ],
        )?;
        if let Some(m) = &r.measured {
            let track = m.times.iter().copied().zip(m.crossings.iter().copied()).collect();
            line_plot(
                &ctx.out.join("crossing_track.svg"),
                "level crossing x(t)",
                "t",
                &[Series { label: "x(t)", points: track }],
            )?;
        }
    }
    let text = match &r.primary {
        Some(f) => format!(
            "c = {:.6} ({:?} branch, residual {:.2e})",
            f.c, f.branch, f.residual
        ),
        None => format!(
            "no branch accepted: c_minus = {:.6} (residual {:.2e}), c_plus = {:.6} (residual {:.2e})",
            r.minus.c, r.minus.residual, r.plus.c, r.plus.residual
        ),
    };
    let text = match &r.measured {
        Some(m) => format!("{text}; direct simulation c = {:.6}", m.c),
        None => text,
    };
    Ok(Outcome {
        passed: r.primary.is_some() && ordering_ok,
        summary: text,
    })
}

#[derive(Serialize)]
struct BoundsReport {
    sigma: f64,
    derivative_at_alpha: f64,
    minus: SpeedBoundReport,
    plus: SpeedBoundReport,
    gap: f64,
    positive: bool,
    subfronts: Vec<SubFrontCheck>,
}

pub fn bounds(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let b = &p.cfg.bounds;
    let query = |side| {
        SpeedBoundQuery::with_grid(p.measure.clone(), p.sigma, side, p.lambda_grid(), b.refine_tol)
    };
    let mut minus = infimum(&query(Side::Minus)?);
    let mut plus = infimum(&query(Side::Plus)?);
    for (r, name) in [(&minus, "curve_minus.csv"), (&plus, "curve_plus.csv")] {
        let rows: Vec<Vec<f64>> = r.curve.iter().map(|c| vec![c.lambda, c.value]).collect();
        write_csv_rows(&ctx.out.join(name), &["lambda", "value"], &rows)?;
    }
    if ctx.svg {
        let pts = |r: &SpeedBoundReport| -> Vec<(f64, f64)> {
            r.curve
                .iter()
                .filter(|c| c.value.is_finite() && c.value < 10.0 * r.value.abs().max(1.0))
                .map(|c| (c.lambda.log10(), c.value))
                .collect()
        };
        line_plot(
            &ctx.out.join("bounds.svg"),
            "(M(s lam) - 1 + sigma)/lam",
            "log10 lambda",
            &[
                Series { label: "minus", points: pts(&minus) },
                Series { label: "plus", points: pts(&plus) },
            ],
        )?;
    }
    let mut subfronts = Vec::new();
    if b.subfronts {
        for side in [Side::Minus, Side::Plus] {
            let sf = reduced_subfront(&p.f, &p.measure, &p.flow, side, p.cfg.time.horizon, 31)?;
            let name = match side {
                Side::Minus => "subfront_minus.csv",
                Side::Plus => "subfront_plus.csv",
            };
            write_profile(&sf.phi, &ctx.out.join(name))?;
            subfronts.push(check_subfront_speed_bound(&sf, &p.measure, p.sigma, 1e-3)?);
        }
    }
    let gap = minus.value + plus.value;
    let holds = subfronts.iter().all(|c| c.holds);
    let summary = format!(
        "minus {:.6}, plus {:.6}, gap {:.6} ({})",
        minus.value,
        plus.value,
        gap,
        if gap > 0.0 { "positive" } else { "not positive" }
    );
    // the curves live in the CSV files
    minus.curve.clear();
    plus.curve.clear();
    write_json(
        &ctx.out.join("bounds.json"),
        &BoundsReport {
            sigma: p.sigma,
            derivative_at_alpha: p.f.derivative_at_alpha(),
            minus,
            plus,
            gap,
            positive: gap > 0.0,
            subfronts,
        },
    )?;
    Ok(Outcome {
        passed: holds,
        summary,
    })
}

pub fn hypotheses(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let mut opt = p.cfg.hypotheses;
    opt.seed = p.cfg.seed;
    let report: HypothesisReport = certify_hypotheses(&p.flow, &opt)?;
    write_json(&ctx.out.join("hypotheses.json"), &report)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("all {} checks passed", report.checks.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    Ok(Outcome {
        passed: report.passed,
        summary,
    })
}

#[derive(Serialize)]
struct MgfReport {
    lambdas: Vec<f64>,
    order: usize,
    relative_error: f64,
    linear_discrepancy: f64,
    tol: f64,
    passed: bool,
}

pub fn mgf_check(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let spec = &p.cfg.mgf;
    let order = match spec.order {
        Some(k) => k,
        None => series_order(&p.measure, &spec.lambdas, 1e-12)?,
    };
    let relative_error = verify_mgf_identity(&p.measure, &spec.lambdas, order)?;
    let grid = *p.flow.grid();
    let bump = GridFn::from_fn(grid, |x| (-x * x / 8.0).exp(), 0.0, 0.0);
    let linear_discrepancy = linear_series_discrepancy(&bump, &p.measure, order, spec.linear_dt)?;
    let passed = relative_error < spec.tol && linear_discrepancy < spec.tol;
    write_json(
        &ctx.out.join("mgf.json"),
        &MgfReport {
            lambdas: spec.lambdas.clone(),
            order,
            relative_error,
            linear_discrepancy,
            tol: spec.tol,
            passed,
        },
    )?;
    Ok(Outcome {
        passed,
        summary: format!(
            "order {order}: relative error {relative_error:.2e}, linear flow discrepancy {linear_discrepancy:.2e}"
        ),
    })
}

#[derive(Serialize)]
struct SubSuperReport {
    pair: PairSummary,
    speed_violation: f64,
    step_speeds: StepSpeeds,
    passed: bool,
}

pub fn subsuper_check(ctx: &RunContext) -> anyhow::Result<Outcome> {
    let p = ctx.problem;
    let slope = p.cfg.front.slope_out.unwrap_or(p.f.lipschitz());
    let fhat = extend_nonlinearity(&p.f, slope)?;
    let pair = build_sub_super_auto(&fhat, &p.measure, p.cfg.front.epsilon, *p.flow.grid())?;
    let violation = speed_violation(&pair, &p.flow, &[1.0, 2.0, 4.0])?;
    let step_speeds = certify_step_speeds(&pair, &p.flow, p.cfg.recursion.tau)?;
    write_profile(&pair.psi_lower, &ctx.out.join("psi_lower.csv"))?;
    write_profile(&pair.psi_upper, &ctx.out.join("psi_upper.csv"))?;
    let passed = pair.residual_lower >= 0.0 && pair.residual_upper >= 0.0 && violation <= 1e-6;
    let summary = format!(
        "eps = {}, residuals {:.3e} / {:.3e}, speed check violation {:.2e}",
        pair.epsilon, pair.residual_lower, pair.residual_upper, violation
    );
    if ctx.svg {
        line_plot(
            &ctx.out.join("subsuper.svg"),
            "sub- and super-solution",
            "x",
            &[
                Series { label: "psi_lower", points: points(&pair.psi_lower) },
                Series { label: "psi_upper", points: points(&pair.psi_upper) },
            ],
        )?;
    }
    write_json(
        &ctx.out.join("subsuper.json"),
        &SubSuperReport {
            pair: (&pair).into(),
            speed_violation: violation,
            step_speeds,
            passed,
        },
    )?;
    Ok(Outcome { passed, summary })
}
