//! Tabulate the four propagator kernels for one damping pair and check them
//! against the numerical ODE oracle at a few frequencies.
//!
//! `cargo run --example kernel_sweep -- 2.0 0.5`

use octwave::kernels::{
    default_decay_constant, derived_exponents, kernel_eval, kernel_sweep, ode_oracle, r_lambda, InitialCondition, ModelParams, DEFAULT_EPS0,
};

fn main() -> octwave::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (sigma, delta) = match args.as_slice() {
        [s, d, ..] => (*s, *d),
        _ => (2.0, 0.5),
    };
    let params = ModelParams::new(sigma, delta, 2, 1)?;
    let dx = derived_exponents(&params, DEFAULT_EPS0)?;
    let c = default_decay_constant(&params);
    println!("sigma = {sigma}, delta = {delta}, regime = {}, kappa = {}, kappa_bar = {}", params.regime().name(), params.kappa(), params.kappa_bar());

    let rows = kernel_sweep(&params, &dx, &[1.0, 4.0], 4, &[0.0, 0.1, 1.0, 10.0], c)?;
    println!("{:>6} {:>10} {:>6} {:>5} {:>13} {:>13} {:>9}", "lambda", "r", "t", "which", "re", "im", "ratio");
    for row in &rows {
        println!(
            "{:>6} {:>10.4} {:>6} {:>5} {:>13.5e} {:>13.5e} {:>9.4}",
            row.lambda, row.r, row.t, row.which, row.value_re, row.value_im, row.ratio
        );
    }
    let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    println!("largest bound ratio: {worst:.4}");

    let lambda = 4.0;
    let r = 2.0 * r_lambda(&dx, lambda);
    for t in [0.5, 2.0, 8.0] {
        let k = kernel_eval(&params, lambda, r, t)?;
        let k0 = ode_oracle(&params, lambda, r, t, InitialCondition::Position)?;
        let k1 = ode_oracle(&params, lambda, r, t, InitialCondition::Velocity)?;
        println!(
            "t = {t:>4}: |K0 - oracle| / |oracle| = {:.2e}, |K1 - oracle| / |oracle| = {:.2e}",
            (k.k0 - k0).norm() / k0.norm().max(1e-300),
            (k.k1 - k1).norm() / k1.norm().max(1e-300)
        );
    }
    Ok(())
}
