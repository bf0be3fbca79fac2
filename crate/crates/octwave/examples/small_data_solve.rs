//! Calibrate the small-data constants, solve at half the ν budget and print
//! the iteration log.

use num_complex::Complex64;
use octwave::kernels::{ModelParams, DEFAULT_EPS0};
use octwave::norms::NormSpec;
use octwave::propagator::calibrate::{first_admissible_cube, CalibrationConfig};
use octwave::propagator::{calibrate_constants, nu_bound, picard_solve, PicardConfig, Problem};
use octwave::spectral::{GridSpec, SpectralField};

fn main() -> octwave::Result<()> {
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let grid = GridSpec::new(1, 4, 64)?;
    let problem = Problem { params, lambda: 1.0, norm: NormSpec::new(-1.0, -1.5)?, eps0: DEFAULT_EPS0 };
    let r = problem.support_radius()?;
    let cube = first_admissible_cube(&grid, r);

    let constants = calibrate_constants(&problem, grid, &CalibrationConfig::default())?;
    println!("fitted constants: {constants:?}");

    let cfg = PicardConfig::default();
    let nu = cfg.nu_fraction * nu_bound(&params, problem.lambda, constants.c0, constants.c1);
    let shape = SpectralField::single_cube(grid, &cube, Complex64::new(1.0, 0.0))?;
    let zero = SpectralField::zeros(grid);
    let (lin, _) = octwave::propagator::linear_evolve(
        &params,
        problem.lambda,
        r,
        &shape,
        &zero,
        &octwave::propagator::uniform_times(problem.default_horizon()?, cfg.steps),
    )?;
    let amp = 0.5 * nu / problem.b_norm(&lin)?;
    let u0 = shape.scale(Complex64::new(amp, 0.0));

    let rec = picard_solve(&problem, &u0, &zero, &cfg, &constants)?;
    for entry in &rec.log {
        println!(
            "iter {:>2}  X = {:.6e}  increment = {:.3e}  factor = {}",
            entry.iteration,
            entry.x_norm,
            entry.increment,
            entry.contraction_factor.map_or("-".into(), |f| format!("{f:.3e}"))
        );
    }
    println!("converged: {}  residual: {:.3e}  modewise: {:.3e}", rec.converged, rec.residual, rec.residual_modewise);
    println!("B(lin) = {:.4e}  nu = {:.4e}  tail = {:.3e}", rec.linear_b_norm, rec.nu, rec.tail_bound);
    Ok(())
}
