//! Rough large data: pick λ, scale, solve the small-data problem and map the
//! solution back to the original equation.

use num_complex::Complex64;
use octwave::kernels::{ModelParams, DEFAULT_EPS0};
use octwave::norms::NormSpec;
use octwave::propagator::calibrate::CalibrationConfig;
use octwave::propagator::{calibrate_constants, picard_solve, PicardConfig, Problem};
use octwave::scaling::{descale_solution, selection_lhs, selection_rhs, plan_large_data, Dilation};
use octwave::spectral::{GridSpec, SpectralField};

fn main() -> octwave::Result<()> {
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let grid = GridSpec::new(1, 1, 512)?;
    let original = Problem { params, lambda: 1.0, norm: NormSpec::new(-1.0, -1.5)?, eps0: DEFAULT_EPS0 };
    let dx = original.derived()?;

    let cal = CalibrationConfig { cubes: vec![octwave::spectral::CubeIndex::new(&[1])], ..CalibrationConfig::default() };
    let constants = calibrate_constants(&original, grid, &cal)?;
    println!("constants: {constants:?}");

    // Size admissible at λ = 2, then ten times more.
    let q = selection_rhs(&params, 1.0, &constants);
    let admissible = q / selection_lhs(&params, -1.0, -1.5, dx.r, 2.0, Dilation::Periodic);
    let shape = SpectralField::single_mode(grid, &[1], Complex64::new(1.0, 0.0))?;
    let zero = SpectralField::zeros(grid);
    let amp = 10.0 * admissible / original.data_norm(&shape, &zero);
    let u0 = shape.scale(Complex64::new(amp, 0.0));

    let cfg = PicardConfig::default();
    let plan = plan_large_data(&u0, &zero, &original, &constants, cfg.nu_fraction, None)?;
    println!(
        "lambda = {} (selected {}), nu = {:.4e}, epsilon = {:.4e}, scaled norm = {:.4e}, margin = {:.3}",
        plan.lambda, plan.selected_lambda, plan.nu, plan.epsilon, plan.scaled_norm, plan.selection_margin
    );

    let scaled = Problem { lambda: plan.lambda as f64, ..original };
    let rec = picard_solve(&scaled, &plan.scaled_u0, &plan.scaled_u1, &cfg, &constants)?;
    println!(
        "iterations = {}, factors = {:?}, residual = {:.3e}, B(lin)/nu = {:.3}",
        rec.iterations,
        rec.contraction_factors,
        rec.residual,
        rec.linear_b_norm / rec.nu
    );
    let back = descale_solution(&rec, plan.lambda as f64, &params, -1.0)?;
    println!(
        "alpha0 = {}, L1 = {:.4e}, Linf = {:.4e}, original residual = {:.3e}",
        back.alpha0, back.l1_norm, back.linf_norm, back.residual
    );
    Ok(())
}
