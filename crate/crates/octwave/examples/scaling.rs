//! Scale data with `u ↦ λ^{2κ/(p−1)} u(λ·)`, measure what it does to the
//! weighted norm, and undo it.

use num_complex::Complex64;
use octwave::kernels::ModelParams;
use octwave::norms::{e_norm, NormSpec};
use octwave::scaling::{descale_data, min_lambda, scale_data, scaling_bound_ratio, selection_exponent, Dilation};
use octwave::spectral::{CubeIndex, GridSpec, SpectralField};

fn main() -> octwave::Result<()> {
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let grid = GridSpec::new(1, 2, 128)?;
    let spec = NormSpec::new(-1.0, -1.5)?;
    let phi = SpectralField::single_cube(grid, &CubeIndex::new(&[1]), Complex64::new(1.0, 0.0))?;
    let zero = SpectralField::zeros(grid);
    println!("smallest admissible lambda: {}", min_lambda(&params, 0.25));
    println!("selection exponent: {}", selection_exponent(&params, spec.s, Dilation::Periodic));
    println!("{:>6} {:>14} {:>14} {:>10}", "lambda", "||u0||", "||u0_lambda||", "ratio");
    for lambda in 1..=6u32 {
        let l = lambda as f64;
        let (s0, s1) = scale_data(&phi, &zero, l, &params, Dilation::Periodic)?;
        let ratio = scaling_bound_ratio(&phi, l, spec.alpha, spec.s, 0.25)?;
        println!("{lambda:>6} {:>14.6e} {:>14.6e} {ratio:>10.5}", e_norm(&phi, spec), e_norm(&s0, spec));
        let (b0, _) = descale_data(&s0, &s1, l, &params, Dilation::Periodic)?;
        assert!(b0.sub(&phi).l2_norm() <= 1e-14 * phi.l2_norm());
    }
    Ok(())
}
