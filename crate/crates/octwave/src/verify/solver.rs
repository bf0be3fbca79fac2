//! Small-data fixed point, regularity of the solution and the large-data pipeline.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::{drift, suite_rng, Case, SuiteReport};
use crate::error::{Error, Result};
use crate::kernels::{ModelParams, DEFAULT_EPS0};
use crate::norms::{mixed_norm, MixedNormSpec, NormSpec, TimeSeries};
use crate::propagator::calibrate::{first_admissible_cube, CalibrationConfig, FittedConstants};
use crate::propagator::{budget_amplitude, calibrate_constants, picard_solve, regularity_norms, PicardConfig, Problem, SolutionRecord};
use crate::scaling::{descale_solution, selection_lhs, selection_rhs, plan_large_data, Dilation};
use crate::spectral::{CubeIndex, GridSpec, SpectralField};

pub const CONTRACTION_BOUND: f64 = 0.5;
pub const MAX_ITERATIONS: usize = 20;
pub const ORIGINAL_RESIDUAL_TOL: f64 = 1e-5;
pub const TAIL_FACTOR: f64 = 1.2;
pub const FLATNESS_TOL: f64 = 0.25;
const ALPHA: f64 = -1.0;

/// One desk-scale configuration of the fixed-point solver.
struct DeskRun {
    label: String,
    params: ModelParams,
    grid: GridSpec,
    s: f64,
    steps: usize,
}

fn desk_runs() -> Result<Vec<DeskRun>> {
    let run = |sigma, delta, p, n, grid: GridSpec, s, steps| -> Result<DeskRun> {
        Ok(DeskRun {
            label: format!("({sigma}, {delta}, {p}) n={n}"),
            params: ModelParams::new(sigma, delta, p, n)?,
            grid,
            s,
            steps,
        })
    };
    Ok(vec![
        run(1.0, 0.0, 2, 1, GridSpec::new(1, 4, 64)?, -1.5, 4000)?,
        run(2.0, 1.0, 2, 1, GridSpec::new(1, 4, 32)?, -3.0, 4000)?,
        run(1.0, 1.0, 2, 1, GridSpec::new(1, 4, 128)?, -2.5, 4000)?,
        run(1.0, 0.0, 3, 1, GridSpec::new(1, 4, 32)?, -0.75, 4000)?,
        run(1.0, 0.0, 2, 2, GridSpec::new(2, 1, 32)?, -1.0, 1000)?,
    ])
}

fn problem(params: ModelParams, lambda: f64, s: f64) -> Problem {
    Problem { params, lambda, norm: NormSpec { alpha: ALPHA, s }, eps0: DEFAULT_EPS0 }
}

fn calibrate(problem: &Problem, grid: GridSpec, cube: &CubeIndex, seed: u64, steps: usize) -> Result<FittedConstants> {
    let cfg = CalibrationConfig { seed, steps, cubes: vec![cube.clone()], ..CalibrationConfig::default() };
    calibrate_constants(problem, grid, &cfg)
}

/// Random data on the lowest admissible cube, sized to `fraction` of the accepted maximum.
fn budget_data(
    problem: &Problem,
    grid: GridSpec,
    cfg: &PicardConfig,
    constants: &FittedConstants,
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(SpectralField, SpectralField)> {
    let r = problem.support_radius()?;
    let cube = first_admissible_cube(&grid, r);
    let u0 = SpectralField::random_on_cubes(grid, std::slice::from_ref(&cube), rng)?.octant_mask(r);
    let u1 = SpectralField::random_on_cubes(grid, std::slice::from_ref(&cube), rng)?.octant_mask(r);
    // Stay a hair inside the accepted region so round-off cannot trip the smallness check.
    let amp = budget_amplitude(problem, &u0, &u1, cfg, constants, fraction * (1.0 - 1e-9))?;
    let a = Complex64::new(amp, 0.0);
    Ok((u0.scale(a), u1.scale(a)))
}

fn max_abs(u: &TimeSeries) -> f64 {
    u.fields.iter().flat_map(|f| f.coeffs.iter().map(|c| c.norm())).fold(0.0, f64::max)
}

/// The solver certificate: contraction, iteration count, residuals and support.
fn record_checks(report: &mut SuiteReport, label: &str, rec: &SolutionRecord, cfg: &PicardConfig) -> Result<()> {
    let r = rec.problem.support_radius()?;
    let worst_factor = rec.contraction_factors.iter().copied().fold(0.0, f64::max);
    report.push(Case::flag(&format!("{label} converged"), rec.converged).with("iterations", rec.iterations));
    report.push(Case::at_most(&format!("{label} iterations"), rec.iterations as f64, MAX_ITERATIONS as f64));
    report.push(
        Case::at_most(&format!("{label} contraction factor"), worst_factor, CONTRACTION_BOUND)
            .with("factors", rec.contraction_factors.clone()),
    );
    report.push(Case::at_most(&format!("{label} mild residual"), rec.residual, cfg.residual_tol));
    report.push(Case::at_most(&format!("{label} modewise residual"), rec.residual_modewise, cfg.residual_tol));
    report.push(Case::at_most(&format!("{label} round-off outside the support"), rec.support_leakage, 1e-12));
    let outside = rec.series.fields.iter().map(|f| f.octant_leakage(r)).fold(0.0, f64::max);
    report.push(Case::at_most(&format!("{label} solution support"), outside, 0.0));
    Ok(())
}

fn solve_at_budget(
    run: &DeskRun,
    lambda: f64,
    fraction: f64,
    cfg: &PicardConfig,
    rng: &mut ChaCha8Rng,
    seed: u64,
) -> Result<(Problem, FittedConstants, SpectralField, SpectralField, Result<SolutionRecord>)> {
    let pb = problem(run.params, lambda, run.s);
    let cube = first_admissible_cube(&run.grid, pb.support_radius()?);
    let constants = calibrate(&pb, run.grid, &cube, seed, run.steps.min(2000))?;
    let (u0, u1) = budget_data(&pb, run.grid, cfg, &constants, fraction, rng)?;
    let rec = picard_solve(&pb, &u0, &u1, cfg, &constants);
    Ok((pb, constants, u0, u1, rec))
}

/// `(L¹ ratio, L^∞ ratio)` of the regularity norms on `[T, 2T]` against `[0, T]`.
fn tail_ratios(rec: &SolutionRecord, half: usize) -> Result<(f64, f64)> {
    let params = &rec.problem.params;
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    let s = rec.problem.norm.s;
    let l1 = MixedNormSpec { gamma: 1.0, alpha: ALPHA, s: s + 2.0 * k - 2.0 * d + kb, cube_set: None };
    let linf = MixedNormSpec { gamma: f64::INFINITY, alpha: ALPHA, s: s + kb, cube_set: None };
    let head = rec.series.window(0..half + 1)?;
    let tail = rec.series.window(half..rec.series.len())?;
    Ok((
        mixed_norm(&tail, &l1)? / mixed_norm(&head, &l1)?,
        mixed_norm(&tail, &linf)? / mixed_norm(&head, &linf)?,
    ))
}

pub fn fixed_point(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("fixed_point", "global small-data mild solution: contraction, Lipschitz bound and regularity", seed);
    let mut rng = suite_rng(seed, 5);
    let cfg = PicardConfig::default();
    let runs = desk_runs()?;

    for run in &runs {
        let cfg = PicardConfig { steps: run.steps, ..cfg.clone() };
        let (pb, constants, u0, u1, rec) = solve_at_budget(run, 1.0, 1.0, &cfg, &mut rng, seed)?;
        report.constant(&format!("{}.c", run.label), constants.c);
        report.constant(&format!("{}.c0", run.label), constants.c0);
        report.constant(&format!("{}.c1", run.label), constants.c1);
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                report.push(Case::flag(&format!("{} solve", run.label), false).note(&e.to_string()));
                continue;
            }
        };
        record_checks(&mut report, &run.label, &rec, &cfg)?;
        let reg = regularity_norms(&rec, &run.params, 1.0, ALPHA, run.s)?;
        report.push(Case::flag(&format!("{} regularity norms finite", run.label), reg.l1.is_finite() && reg.linf.is_finite() && reg.dt_linf.is_finite()).with("c2", reg.c2));

        if run.params == runs[0].params && run.grid == runs[0].grid {
            let zero_cfg = PicardConfig { start_from_zero: true, ..cfg.clone() };
            let other = picard_solve(&pb, &u0, &u1, &zero_cfg, &constants)?;
            let gap = max_abs(&other.series.sub(&rec.series)) / max_abs(&rec.series);
            report.push(Case::at_most(&format!("{} uniqueness from a zero start", run.label), gap, 10.0 * cfg.residual_tol));
        }
    }

    // Zero data: the solution is zero after one iteration.
    let run = &runs[0];
    let pb = problem(run.params, 1.0, run.s);
    let zero = SpectralField::zeros(run.grid);
    let rec = picard_solve(&pb, &zero, &zero, &cfg, &FittedConstants::unit())?;
    report.push(Case::flag("zero data gives the zero solution", rec.converged && rec.series.is_zero()).with("iterations", rec.iterations));

    // Oversized data: budget doubled past the bound, then doubled until the contraction fails.
    let pb = problem(run.params, 1.0, run.s);
    let cube = first_admissible_cube(&run.grid, pb.support_radius()?);
    let constants = calibrate(&pb, run.grid, &cube, seed, run.steps.min(2000))?;
    let loose = PicardConfig { enforce_smallness: false, max_iter: 60, ..cfg.clone() };
    let (base0, base1) = budget_data(&pb, run.grid, &cfg, &constants, 1.0, &mut rng)?;
    // `budget_data` sizes to ν/2 with ν = nu_fraction · bound; the first multiplier gives ν = 2 · bound.
    let first = 2.0 / cfg.nu_fraction;
    let mut multiplier = first;
    let mut outcome = None;
    while multiplier <= first * 1024.0 {
        let a = Complex64::new(multiplier, 0.0);
        match picard_solve(&pb, &base0.scale(a), &base1.scale(a), &loose, &constants) {
            Err(Error::Divergence { .. }) | Err(Error::SpectralOverflow { .. }) => {
                outcome = Some((multiplier, f64::INFINITY));
                break;
            }
            Err(e) => return Err(e),
            Ok(r) => {
                let f = r.contraction_factors.iter().copied().fold(0.0, f64::max);
                if f > CONTRACTION_BOUND || !r.converged {
                    outcome = Some((multiplier, f));
                    break;
                }
            }
        }
        multiplier *= 2.0;
    }
    let (mult, factor) = outcome.unwrap_or((f64::NAN, 0.0));
    report.push(
        Case::at_most("oversized budget breaks the contraction", factor, CONTRACTION_BOUND)
            .negative()
            .with("budget_over_bound", mult * cfg.nu_fraction)
            .note("smallest budget multiple (starting at 2x the bound) at which the contraction check fails"),
    );
    report.push(Case::rejection(
        "smallness check refuses oversized data",
        picard_solve(&pb, &base0.scale(Complex64::new(first, 0.0)), &base1.scale(Complex64::new(first, 0.0)), &cfg, &constants),
    ));

    // Regularity constant across λ at a fixed budget fraction.
    // The support moves out with λ, so the lattice is widened to keep the outer shell quiet.
    let wide = DeskRun { grid: GridSpec::new(1, 4, 128)?, label: run.label.clone(), params: run.params, s: run.s, steps: 2000 };
    let sweep = PicardConfig { steps: wide.steps, ..cfg.clone() };
    let mut c2s = Vec::new();
    for lambda in [1.0, 2.0, 4.0] {
        let (_, _, _, _, rec) = solve_at_budget(&wide, lambda, 1.0, &sweep, &mut rng, seed)?;
        let rec = rec?;
        c2s.push(regularity_norms(&rec, &run.params, lambda, ALPHA, run.s)?.c2);
    }
    report.push(Case::at_most("regularity constant flat in lambda", drift(&c2s), FLATNESS_TOL).with("lambdas", vec![1.0, 2.0, 4.0]).with("c2", c2s.clone()));

    // Tail over [T, 2T] against the kernel decay prediction.
    let horizon = pb.default_horizon()?;
    let long = PicardConfig { t_final: Some(2.0 * horizon), steps: 2 * cfg.steps, ..cfg.clone() };
    let (u0, u1) = budget_data(&pb, run.grid, &cfg, &constants, 1.0, &mut rng)?;
    let rec = picard_solve(&pb, &u0, &u1, &long, &constants)?;
    let predicted = (-pb.decay_rate()? * horizon).exp();
    let (l1, linf) = tail_ratios(&rec, cfg.steps)?;
    for (name, v) in [("L1", l1), ("Linf", linf)] {
        report.push(
            Case::at_most(&format!("{name} tail over [T, 2T] against decay prediction"), v / predicted, TAIL_FACTOR)
                .with("T", horizon)
                .with("predicted", predicted)
                .with("measured", v),
        );
    }
    Ok(report.finish())
}

pub fn large_data(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("large_data", "large rough data through scaling: lambda selection, support condition and descaling", seed);
    let mut rng = suite_rng(seed, 6);
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let grid = GridSpec::new(1, 1, 512)?;
    let original = problem(params, 1.0, -1.5);
    let dx = original.derived()?;
    let cal = CalibrationConfig { seed, cubes: vec![CubeIndex::new(&[1])], ..CalibrationConfig::default() };
    let constants = calibrate_constants(&original, grid, &cal)?;
    report.constant("c", constants.c);
    report.constant("c0", constants.c0);
    report.constant("c1", constants.c1);
    let cfg = PicardConfig::default();
    let zero = SpectralField::zeros(grid);

    let coeff = SpectralField::random_on_cubes(grid, &[CubeIndex::new(&[1])], &mut rng)?;
    let shape = coeff.scale(Complex64::new(1.0 / coeff.l2_norm(), 0.0));
    let admissible = selection_rhs(&params, 1.0, &constants) / selection_lhs(&params, ALPHA, -1.5, dx.r, 2.0, Dilation::Periodic);

    for (label, factor) in [("10x oversized", 10.0), ("already admissible", 0.1)] {
        let amp = factor * admissible / original.data_norm(&shape, &zero);
        let u0 = shape.scale(Complex64::new(amp, 0.0));
        let plan = plan_large_data(&u0, &zero, &original, &constants, cfg.nu_fraction, None)?;
        report.push(
            Case::at_least(&format!("{label}: lambda found"), plan.lambda as f64, 2.0)
                .with("selected_lambda", plan.selected_lambda)
                .with("lambda", plan.lambda),
        );
        if factor < 1.0 {
            report.push(Case::at_most(&format!("{label}: smallest lambda used"), plan.lambda as f64, 2.0));
        }
        report.push(Case::at_most(&format!("{label}: scaled data within budget"), plan.scaled_norm, plan.nu / (2.0 * constants.c)));
        report.push(Case::at_most(&format!("{label}: selection inequality"), plan.selection_lhs, plan.selection_rhs).with("margin", plan.selection_margin));
        let scaled = Problem { lambda: plan.lambda as f64, ..original };
        let rec = match picard_solve(&scaled, &plan.scaled_u0, &plan.scaled_u1, &cfg, &constants) {
            Ok(r) => r,
            Err(e) => {
                report.push(Case::flag(&format!("{label}: scaled solve"), false).note(&e.to_string()));
                continue;
            }
        };
        report.push(Case::at_most(&format!("{label}: scaled linear part within budget"), rec.linear_b_norm, 0.5 * rec.nu));
        record_checks(&mut report, label, &rec, &cfg)?;
        let back = descale_solution(&rec, plan.lambda as f64, &params, ALPHA)?;
        report.push(Case::at_most(&format!("{label}: original-equation residual"), back.residual, ORIGINAL_RESIDUAL_TOL).with("lambda", plan.lambda));
        report.push(
            Case::at_most(&format!("{label}: final radius alpha0 = lambda alpha"), (back.alpha0 - plan.lambda as f64 * ALPHA).abs(), 0.0)
                .with("alpha0", back.alpha0),
        );
        let recovered = back.u0.sub(&u0).l2_norm() / u0.l2_norm();
        report.push(Case::at_most(&format!("{label}: descaled data recovers the input"), recovered, 1e-12));
    }

    let sobolev = Problem { norm: NormSpec { alpha: 0.0, s: -1.5 }, ..original };
    let u0 = shape.scale(Complex64::new(10.0, 0.0));
    report.push(Case::rejection("alpha = 0 is inapplicable", plan_large_data(&u0, &zero, &sobolev, &constants, cfg.nu_fraction, None)));
    Ok(report.finish())
}
