//! Empirical constants of the small-data theory.
//!
//! Every constant is the largest ratio seen over a seeded sample of random
//! octant data: `C` bounds the linear part, `C₀` the nonlinear map and `C₁` its
//! Lipschitz modulus, all measured in the λ-weighted norm of the solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{duhamel_series, linear_evolve, nonlinearity, uniform_times, Problem};
use crate::error::{Error, Result};
use crate::norms::TimeSeries;
use crate::spectral::{CubeIndex, GridSpec, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstants {
    /// `‖u^lin‖_B <= C ‖(u0, u1)‖`.
    pub c: f64,
    /// `‖N(u)‖_B <= C₀ λ^e ‖u‖_B^p`.
    pub c0: f64,
    /// `‖N(u) − N(v)‖_B <= C₁ λ^e (‖u‖_B^{p−1} + ‖v‖_B^{p−1}) ‖u − v‖_B`.
    pub c1: f64,
    /// Data-scaling constant, fitted by the scaling module.
    pub c_tilde1: f64,
    pub samples: usize,
}

impl FittedConstants {
    pub fn unit() -> Self {
        FittedConstants { c: 1.0, c0: 1.0, c1: 1.0, c_tilde1: 1.0, samples: 0 }
    }
}

/// How the calibration sample is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub samples: usize,
    pub seed: u64,
    pub steps: usize,
    pub t_final: Option<f64>,
    /// Cubes carrying the random data; empty means the first admissible cube.
    pub cubes: Vec<CubeIndex>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig { samples: 8, seed: 0, steps: 2000, t_final: None, cubes: Vec::new() }
    }
}

/// `κ − 2δ + (κ̄ − κ)p`.
fn lambda_exponent(problem: &Problem) -> f64 {
    let p = &problem.params;
    p.kappa() - 2.0 * p.delta + (p.kappa_bar() - p.kappa()) * p.p as f64
}

/// Lowest diagonal cube lying entirely in `{ξ_i >= r}`.
pub fn first_admissible_cube(grid: &GridSpec, r: f64) -> CubeIndex {
    CubeIndex(vec![(r - 1e-12).ceil().max(0.0) as i64; grid.n])
}

fn random_data(grid: GridSpec, cubes: &[CubeIndex], r: f64, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    Ok(SpectralField::random_on_cubes(grid, cubes, rng)?.octant_mask(r))
}

fn nonlinear_part(problem: &Problem, r: f64, u: &TimeSeries) -> Result<TimeSeries> {
    let (force, _) = nonlinearity(u, problem.params.p, r)?;
    Ok(duhamel_series(&problem.params, problem.lambda, r, &force)?.0)
}

pub fn calibrate_constants(problem: &Problem, grid: GridSpec, cfg: &CalibrationConfig) -> Result<FittedConstants> {
    if cfg.samples == 0 {
        return Err(Error::Config("calibration needs at least one sample".into()));
    }
    let r = problem.support_radius()?;
    let cubes = if cfg.cubes.is_empty() { vec![first_admissible_cube(&grid, r)] } else { cfg.cubes.clone() };
    let t_final = match cfg.t_final {
        Some(t) => t,
        None => problem.default_horizon()?,
    };
    let times = uniform_times(t_final, cfg.steps);
    let lam_e = problem.lambda.powf(lambda_exponent(problem));
    let p = problem.params.p as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut c, mut c0, mut c1) = (0.0f64, 0.0f64, 0.0f64);

    for _ in 0..cfg.samples {
        let u0 = random_data(grid, &cubes, r, &mut rng)?;
        let u1 = random_data(grid, &cubes, r, &mut rng)?;
        let v0 = random_data(grid, &cubes, r, &mut rng)?;
        let v1 = random_data(grid, &cubes, r, &mut rng)?;
        let (u, _) = linear_evolve(&problem.params, problem.lambda, r, &u0, &u1, &times)?;
        let (v, _) = linear_evolve(&problem.params, problem.lambda, r, &v0, &v1, &times)?;

        let data = problem.data_norm(&u0, &u1);
        let bu = problem.b_norm(&u)?;
        if data > 0.0 {
            c = c.max(bu / data);
        }
        let nu = nonlinear_part(problem, r, &u)?;
        if bu > 0.0 {
            c0 = c0.max(problem.b_norm(&nu)? / (lam_e * bu.powi(p)));
        }
        let nv = nonlinear_part(problem, r, &v)?;
        let bv = problem.b_norm(&v)?;
        let bdiff = problem.b_norm(&u.sub(&v))?;
        let denom = lam_e * (bu.powi(p - 1) + bv.powi(p - 1)) * bdiff;
        if denom > 0.0 {
            c1 = c1.max(problem.b_norm(&nu.sub(&nv))? / denom);
        }
    }
    Ok(FittedConstants { c, c0, c1, c_tilde1: 1.0, samples: cfg.samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ModelParams, DEFAULT_EPS0};
    use crate::norms::NormSpec;

    fn problem() -> Problem {
        Problem {
            params: ModelParams::new(1.0, 0.0, 2, 1).unwrap(),
            lambda: 1.0,
            norm: NormSpec { alpha: -1.0, s: -1.5 },
            eps0: DEFAULT_EPS0,
        }
    }

    #[test]
    fn admissible_cube_clears_threshold() {
        let g = GridSpec::new(1, 4, 16).unwrap();
        assert_eq!(first_admissible_cube(&g, 1.5), CubeIndex::new(&[2]));
        assert_eq!(first_admissible_cube(&g, 1.0), CubeIndex::new(&[1]));
        assert_eq!(first_admissible_cube(&g, 0.25), CubeIndex::new(&[1]));
    }

    #[test]
    fn calibration_is_seeded_and_positive() {
        let g = GridSpec::new(1, 4, 16).unwrap();
        let cfg = CalibrationConfig { samples: 2, steps: 200, ..CalibrationConfig::default() };
        let a = calibrate_constants(&problem(), g, &cfg).unwrap();
        let b = calibrate_constants(&problem(), g, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.c > 0.0 && a.c0 > 0.0 && a.c1 > 0.0);
        assert!(a.c.is_finite() && a.c0.is_finite() && a.c1.is_finite());
    }
}
