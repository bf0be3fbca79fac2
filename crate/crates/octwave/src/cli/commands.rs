use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataKind, RunConfig, Sizing};
use super::{write_columns, write_json, CliResult, Failure, Session, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use crate::error::{Error, Result};
use crate::kernels::{default_decay_constant, derived_exponents, kernel_sweep, ModelParams, Regime};
use crate::norms::{e_norm, TimeSeries};
use crate::propagator::calibrate::{first_admissible_cube, FittedConstants};
use crate::propagator::{budget_amplitude, calibrate_constants, picard_solve, regularity_norms, Problem, SolutionRecord};
use crate::scaling::{descale_solution, selection_lhs, selection_rhs, plan_large_data, Dilation};
use crate::spectral::io::{read_binary, read_csv, write_binary};
use crate::spectral::{GridSpec, SpectralField};
use crate::verify::{run_suite, summary_table, SuiteReport};

/// Relative margin kept below the accepted budget so round-off cannot trip the smallness check.
const BUDGET_MARGIN: f64 = 1e-9;

#[derive(Debug, Serialize)]
struct KernelCsvRow<'a> {
    regime: &'a str,
    sigma: f64,
    delta: f64,
    lambda: f64,
    r: f64,
    t: f64,
    which: &'a str,
    value_re: f64,
    value_im: f64,
    ratio: f64,
}

pub fn kernels(session: &Session, regime: Option<&str>, stdout: &mut dyn Write) -> CliResult<i32> {
    let filter = match regime {
        Some(r) => Some(Regime::parse(r).ok_or_else(|| {
            Failure::new(EXIT_USAGE, format!("unknown regime '{r}' (effective, scale_invariant, non_effective)"))
        })?),
        None => None,
    };
    let cfg = &session.config;
    let k = &cfg.kernels;
    let mut rows = Vec::new();
    for &[sigma, delta] in &k.pairs {
        let params = ModelParams::new(sigma, delta, cfg.model.p, cfg.model.n)?;
        if filter.is_some_and(|f| f != params.regime()) {
            continue;
        }
        let dx = derived_exponents(&params, cfg.scaling.eps0)?;
        let c = default_decay_constant(&params);
        for row in kernel_sweep(&params, &dx, &k.lambdas, k.r_points, &k.times, c)? {
            rows.push((params.regime().name(), row));
        }
    }
    if rows.is_empty() {
        return Err(Failure::new(EXIT_USAGE, "no configured (sigma, delta) pair falls in the selected regime"));
    }
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for (regime, r) in &rows {
            w.serialize(KernelCsvRow {
                regime,
                sigma: r.sigma,
                delta: r.delta,
                lambda: r.lambda,
                r: r.r,
                t: r.t,
                which: &r.which,
                value_re: r.value_re,
                value_im: r.value_im,
                ratio: r.ratio,
            })
            .map_err(Error::from)?;
        }
        w.flush()?;
    }
    stdout.write_all(&buf)?;
    if session.wants("csv") {
        std::fs::write(session.path("kernels.csv"), &buf)?;
    }
    if session.wants("json") {
        let json: Vec<_> = rows
            .iter()
            .map(|(regime, r)| serde_json::json!({ "regime": regime, "row": r }))
            .collect();
        write_json(&session.path("kernels.json"), &json)?;
    }
    Ok(EXIT_OK)
}

pub fn verify(session: &Session, suites: &[&str], stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let seed = session.seed;
    // Suites run as independent jobs; collecting keeps the registry order.
    let reports: Vec<SuiteReport> = suites.par_iter().map(|name| run_suite(name, seed)).collect::<Result<_>>()?;
    for r in &reports {
        let mut text = r.to_json()?;
        text.push('\n');
        std::fs::write(session.path(&format!("{}.json", r.suite_name)), text)?;
    }
    let table = summary_table(&reports);
    std::fs::write(session.path("summary.txt"), &table)?;
    stdout.write_all(table.as_bytes())?;
    let mut failed = 0;
    for r in &reports {
        for c in r.failures() {
            failed += 1;
            let note = if c.note.is_empty() { String::new() } else { format!(": {}", c.note) };
            writeln!(stderr, "FAIL {} / {}{note}", r.suite_name, c.name)?;
        }
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAIL })
}

fn read_field(path: &std::path::Path) -> Result<SpectralField> {
    let file = std::fs::File::open(path).map_err(|e| Error::Config(format!("cannot open data file {}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_csv(std::io::BufReader::new(file)),
        _ => read_binary(std::io::BufReader::new(file)),
    }
}

/// Unsized data of the configured kind for a problem whose support starts at `r`.
fn raw_data(cfg: &RunConfig, grid: GridSpec, r: f64) -> Result<(SpectralField, SpectralField)> {
    let cubes = if cfg.data.cubes.is_empty() { vec![first_admissible_cube(&grid, r)] } else { cfg.data.cube_indices() };
    let zero = SpectralField::zeros(grid);
    Ok(match cfg.data.kind {
        DataKind::Zero => (zero.clone(), zero),
        DataKind::SingleCube => {
            let mut f = SpectralField::zeros(grid);
            for idx in grid.cube_points(&cubes[0])? {
                f.coeffs[idx] = Complex64::new(1.0, 0.0);
            }
            let f = f.octant_mask(r);
            (f.clone(), f)
        }
        DataKind::RandomOctant => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.data.seed);
            let u0 = SpectralField::random_on_cubes(grid, &cubes, &mut rng)?.octant_mask(r);
            let u1 = SpectralField::random_on_cubes(grid, &cubes, &mut rng)?.octant_mask(r);
            (u0, u1)
        }
        DataKind::File => {
            let path = cfg.data.path.as_ref().ok_or_else(|| Error::Config("data.path is required for kind = \"file\"".into()))?;
            let f = read_field(path)?;
            if f.grid != grid {
                return Err(Error::Config(format!("data file grid {:?} differs from the configured grid {:?}", f.grid, grid)));
            }
            (f, zero)
        }
    })
}

fn fitted_constants(cfg: &RunConfig, problem: &Problem, grid: GridSpec) -> Result<FittedConstants> {
    let mut k = calibrate_constants(problem, grid, &cfg.calibration())?;
    if let Some(c) = cfg.scaling.c {
        k.c = c;
    }
    if let Some(c0) = cfg.scaling.c0 {
        k.c0 = c0;
    }
    if let Some(c1) = cfg.scaling.c1 {
        k.c1 = c1;
    }
    Ok(k)
}

/// Configured data sized for `problem`.
fn sized_data(
    cfg: &RunConfig,
    problem: &Problem,
    grid: GridSpec,
    constants: &FittedConstants,
) -> Result<(SpectralField, SpectralField)> {
    let (u0, u1) = raw_data(cfg, grid, problem.support_radius()?)?;
    if u0.is_zero() && u1.is_zero() {
        return Ok((u0, u1));
    }
    let sizing = match (cfg.data.kind, cfg.data.budget_fraction, cfg.data.amplitude, cfg.data.admissible_multiple) {
        (DataKind::File, None, None, None) => Sizing::Amplitude(1.0),
        _ => cfg.data.sizing(),
    };
    let amp = match sizing {
        Sizing::Amplitude(a) => a,
        Sizing::Budget(f) => budget_amplitude(problem, &u0, &u1, &cfg.picard(), constants, f * (1.0 - BUDGET_MARGIN))?,
        Sizing::Admissible(m) => {
            let params = problem.params;
            let dx = problem.derived()?;
            let admissible = selection_rhs(&params, 1.0, constants)
                / selection_lhs(&params, problem.norm.alpha, problem.norm.s, dx.r, 2.0, Dilation::Periodic);
            if !admissible.is_finite() {
                return Err(Error::Inapplicable("the admissible data size needs alpha < 0".into()));
            }
            m * admissible / problem.data_norm(&u0, &u1)
        }
    };
    let a = Complex64::new(amp, 0.0);
    Ok((u0.scale(a), u1.scale(a)))
}

/// Persisted summary of a solve; the fields themselves go to binary files.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub problem: Problem,
    pub grid: GridSpec,
    pub converged: bool,
    pub iterations: usize,
    pub contraction_factors: Vec<f64>,
    pub norm_history: Vec<f64>,
    pub x_norm: f64,
    pub b_norm: f64,
    pub linear_b_norm: f64,
    pub nu: f64,
    pub residual: f64,
    pub residual_modewise: f64,
    pub support_leakage: f64,
    pub max_shell_fraction: f64,
    pub tail_bound: f64,
    pub constants: FittedConstants,
    pub regularity_l1: f64,
    pub regularity_linf: f64,
    pub regularity_dt_linf: f64,
    /// `(t, ‖u(t)‖_{E^{α,s}})` on the stored grid, thinned to at most 512 rows.
    pub norm_vs_time: Vec<(f64, f64)>,
}

fn norm_curve(series: &TimeSeries, problem: &Problem) -> Vec<(f64, f64)> {
    let stride = series.len().div_ceil(512).max(1);
    series
        .times
        .iter()
        .zip(&series.fields)
        .step_by(stride)
        .map(|(t, f)| (*t, e_norm(f, problem.norm)))
        .collect()
}

fn run_record(rec: &SolutionRecord, constants: &FittedConstants) -> Result<RunRecord> {
    let reg = regularity_norms(rec, &rec.problem.params, rec.problem.lambda, rec.problem.norm.alpha, rec.problem.norm.s)?;
    Ok(RunRecord {
        kind: "solve_record".into(),
        problem: rec.problem,
        grid: rec.series.grid(),
        converged: rec.converged,
        iterations: rec.iterations,
        contraction_factors: rec.contraction_factors.clone(),
        norm_history: rec.norm_history.clone(),
        x_norm: rec.x_norm,
        b_norm: rec.b_norm,
        linear_b_norm: rec.linear_b_norm,
        nu: rec.nu,
        residual: rec.residual,
        residual_modewise: rec.residual_modewise,
        support_leakage: rec.support_leakage,
        max_shell_fraction: rec.max_shell_fraction,
        tail_bound: rec.tail_bound,
        constants: constants.clone(),
        regularity_l1: reg.l1,
        regularity_linf: reg.linf,
        regularity_dt_linf: reg.dt_linf,
        norm_vs_time: norm_curve(&rec.series, &rec.problem),
    })
}

fn write_field(session: &Session, name: &str, f: &SpectralField) -> CliResult<()> {
    let path = session.path(name);
    let file = std::fs::File::create(&path).map_err(|e| Failure::new(EXIT_FAIL, format!("cannot write {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    write_binary(f, &mut w)?;
    w.flush()?;
    Ok(())
}

fn persist_solution(session: &Session, rec: &SolutionRecord, record: &RunRecord, u0: &SpectralField, u1: &SpectralField) -> CliResult<()> {
    write_json(&session.path("record.json"), record)?;
    write_columns(&session.path("norm_vs_time.dat"), ("t", "norm"), record.norm_vs_time.iter().copied())?;
    write_field(session, "u0.bin", u0)?;
    write_field(session, "u1.bin", u1)?;
    write_field(session, "u_final.bin", rec.series.fields.last().expect("nonempty series"))?;
    Ok(())
}

fn print_record(out: &mut dyn Write, r: &RunRecord) -> std::io::Result<()> {
    writeln!(out, "lambda          {}", r.problem.lambda)?;
    writeln!(out, "converged       {}", r.converged)?;
    writeln!(out, "iterations      {}", r.iterations)?;
    let worst = r.contraction_factors.iter().copied().fold(0.0, f64::max);
    writeln!(out, "max_factor      {worst:.6e}")?;
    writeln!(out, "nu              {:.6e}", r.nu)?;
    writeln!(out, "linear_b_norm   {:.6e}", r.linear_b_norm)?;
    writeln!(out, "b_norm          {:.6e}", r.b_norm)?;
    writeln!(out, "residual        {:.6e}", r.residual)?;
    writeln!(out, "residual_mode   {:.6e}", r.residual_modewise)?;
    writeln!(out, "regularity_l1   {:.6e}", r.regularity_l1)?;
    writeln!(out, "regularity_linf {:.6e}", r.regularity_linf)?;
    Ok(())
}

pub fn solve(session: &Session, lambda: Option<u32>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let cfg = &session.config;
    let lambda = lambda.or(cfg.scaling.lambda).unwrap_or(1) as f64;
    let problem = cfg.problem(lambda)?;
    let grid = cfg.grid_spec()?;
    let constants = fitted_constants(cfg, &problem, grid)?;
    let (u0, u1) = sized_data(cfg, &problem, grid, &constants)?;
    let rec = picard_solve(&problem, &u0, &u1, &cfg.picard(), &constants)?;
    let record = run_record(&rec, &constants)?;
    persist_solution(session, &rec, &record, &u0, &u1)?;
    print_record(stdout, &record)?;
    if !rec.converged {
        writeln!(stderr, "Picard iteration did not converge within {} iterations", cfg.solver.max_iter)?;
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct DescaledSummary {
    lambda: f64,
    alpha0: f64,
    residual: f64,
    l1_norm: f64,
    linf_norm: f64,
}

pub fn scale(session: &Session, lambda: Option<u32>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let cfg = &session.config;
    let original = cfg.problem(1.0)?;
    let grid = cfg.grid_spec()?;
    if original.norm.alpha == 0.0 {
        return Err(Error::Inapplicable("alpha = 0 gives no exponential gain from scaling; use alpha < 0".into()).into());
    }
    let constants = fitted_constants(cfg, &original, grid)?;
    let (u0, u1) = sized_data(cfg, &original, grid, &constants)?;
    let plan = plan_large_data(&u0, &u1, &original, &constants, cfg.solver.nu_fraction, lambda.or(cfg.scaling.lambda))?;
    writeln!(stdout, "lambda          {}", plan.lambda)?;
    writeln!(stdout, "selected_lambda {}", plan.selected_lambda)?;
    writeln!(stdout, "nu              {:.6e}", plan.nu)?;
    writeln!(stdout, "epsilon         {:.6e}", plan.epsilon)?;
    writeln!(stdout, "scaled_norm     {:.6e}", plan.scaled_norm)?;
    writeln!(stdout, "selection_margin {:.6e}", plan.selection_margin)?;
    writeln!(stdout, "alpha0          {}", plan.alpha0)?;
    write_json(&session.path("plan.json"), &plan)?;

    let scaled = Problem { lambda: plan.lambda as f64, ..original };
    let rec = picard_solve(&scaled, &plan.scaled_u0, &plan.scaled_u1, &cfg.picard(), &constants)?;
    let record = run_record(&rec, &constants)?;
    persist_solution(session, &rec, &record, &plan.scaled_u0, &plan.scaled_u1)?;
    print_record(stdout, &record)?;
    let back = descale_solution(&rec, plan.lambda as f64, &original.params, original.norm.alpha)?;
    writeln!(stdout, "original_residual {:.6e}", back.residual)?;
    write_json(
        &session.path("descaled.json"),
        &DescaledSummary { lambda: back.lambda, alpha0: back.alpha0, residual: back.residual, l1_norm: back.l1_norm, linf_norm: back.linf_norm },
    )?;
    write_field(session, "u_final_descaled.bin", back.series.fields.last().expect("nonempty series"))?;
    if !rec.converged {
        writeln!(stderr, "Picard iteration did not converge within {} iterations", cfg.solver.max_iter)?;
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}
