//! Uniform-in-time estimates for the scaled linear problem and its Duhamel part.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::{drift, suite_rng, Case, SuiteReport};
use crate::error::Result;
use crate::kernels::{decay_exponent, kernel_eval, ModelParams, DEFAULT_EPS0};
use crate::norms::{cube_time_norms, cube_weight, e_norm, mixed_norm, MixedNormSpec, NormSpec, TimeSeries};
use crate::propagator::{duhamel_series, linear_evolve, uniform_times, Problem};
use crate::scaling::dilate_field;
use crate::spectral::{CubeIndex, GridSpec, SpectralField};

const LAMBDAS: [u32; 3] = [2, 4, 8];
const ALPHA: f64 = -0.25;
const S: f64 = 0.0;
const STEPS: usize = 2000;
pub const FLATNESS_TOL: f64 = 0.25;

fn grid() -> Result<GridSpec> {
    GridSpec::new(1, 2, 128)
}

struct Setting {
    params: ModelParams,
    base_cubes: Vec<CubeIndex>,
}

fn settings() -> Result<Vec<Setting>> {
    Ok(vec![
        Setting { params: ModelParams::new(1.0, 0.0, 2, 1)?, base_cubes: vec![CubeIndex::new(&[1]), CubeIndex::new(&[2])] },
        Setting { params: ModelParams::new(1.0, 1.0, 2, 1)?, base_cubes: vec![CubeIndex::new(&[3]), CubeIndex::new(&[4])] },
    ])
}

fn problem(params: ModelParams, lambda: f64) -> Problem {
    Problem { params, lambda, norm: NormSpec { alpha: ALPHA, s: S }, eps0: DEFAULT_EPS0 }
}

fn random_field(grid: GridSpec, cubes: &[CubeIndex], rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    SpectralField::random_on_cubes(grid, cubes, rng)
}

/// Regularity index of the left side: `s + (2κ−2δ)/γ + κ̄(1−j)`.
fn lhs_index(params: &ModelParams, gamma: f64, j: usize) -> f64 {
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    S + (2.0 * k - 2.0 * d) / gamma + kb * (1.0 - j as f64)
}

/// Left and right sides of the homogeneous estimate.
fn homogeneous_sides(
    params: &ModelParams,
    lambda: f64,
    u0: &SpectralField,
    u1: &SpectralField,
    series: &[TimeSeries; 2],
    gamma: f64,
    j: usize,
) -> Result<(f64, f64)> {
    let (k, kb, d, sg) = (params.kappa(), params.kappa_bar(), params.delta, params.sigma);
    let jf = j as f64;
    let lhs = mixed_norm(&series[j], &MixedNormSpec { gamma, alpha: ALPHA, s: lhs_index(params, gamma, j), cube_set: None })?;
    let tail = (2.0 * d - k) / gamma;
    let rhs = lambda.powf((2.0 * d - sg) * jf - tail) * e_norm(u0, NormSpec { alpha: ALPHA, s: S + kb + (2.0 * sg - 2.0 * kb) * jf })
        + lambda.powf((k - kb) * (jf - 1.0) - tail) * e_norm(u1, NormSpec { alpha: ALPHA, s: S });
    Ok((lhs, rhs))
}

fn gammas(p: usize) -> Vec<f64> {
    let mut g = vec![1.0, 2.0, p as f64, f64::INFINITY];
    g.dedup();
    g
}

fn gamma_label(g: f64) -> String {
    if g.is_infinite() { "inf".to_string() } else { format!("{g}") }
}

fn evolve(pb: &Problem, u0: &SpectralField, u1: &SpectralField, r: f64) -> Result<[TimeSeries; 2]> {
    let times = uniform_times(pb.default_horizon()?, STEPS);
    let (u, du) = linear_evolve(&pb.params, pb.lambda, r, u0, u1, &times)?;
    Ok([u, du])
}

pub fn linear(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("linear", "uniform-in-time estimates for the scaled linear and inhomogeneous problems", seed);
    let mut rng = suite_rng(seed, 3);
    let grid = grid()?;

    for setting in settings()? {
        let params = setting.params;
        let regime = params.regime().name();
        let base0 = random_field(grid, &setting.base_cubes, &mut rng)?;
        let base1 = random_field(grid, &setting.base_cubes, &mut rng)?;
        let gs = gammas(params.p);
        let modes: Vec<usize> = (0..grid.len()).filter(|&i| base0.coeffs[i] != Complex64::new(0.0, 0.0)).collect();
        let unit = |idx: usize| {
            let mut f = SpectralField::zeros(grid);
            f.coeffs[idx] = Complex64::new(1.0, 0.0);
            f
        };
        let zero = SpectralField::zeros(grid);
        let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
        // Fitted constants: sup over single-mode data, which bounds every superposition
        // with at most one mode per cube.
        let mut hom: Vec<Vec<f64>> = Vec::new();
        let mut inh: Vec<Vec<f64>> = Vec::new();
        let mut random_excess: f64 = 0.0;
        for &l in &LAMBDAS {
            let lambda = l as f64;
            let pb = problem(params, lambda);
            let r = pb.support_radius()?;
            let rate = decay_exponent(&params, lambda, r);
            let mut hom_row = vec![0.0f64; 2 * gs.len()];
            let mut inh_row = vec![0.0f64; 2 * gs.len()];
            for &idx in &modes {
                let e = dilate_field(&unit(idx), l, 1.0)?;
                for (u0, u1) in [(&e, &zero), (&zero, &e)] {
                    let series = evolve(&pb, u0, u1, r)?;
                    for (gi, &g) in gs.iter().enumerate() {
                        for j in 0..2 {
                            let (lhs, rhs) = homogeneous_sides(&params, lambda, u0, u1, &series, g, j)?;
                            hom_row[2 * gi + j] = hom_row[2 * gi + j].max(lhs / rhs);
                        }
                    }
                }
                // Forcing decaying on the natural time scale of the scaled problem.
                let times = uniform_times(pb.default_horizon()?, STEPS);
                let forcing = TimeSeries::separable(times, &e, |t| (-rate * t).exp())?;
                let (v, dv) = duhamel_series(&params, lambda, r, &forcing)?;
                let duh = [v, dv];
                let g_norm = mixed_norm(&forcing, &MixedNormSpec { gamma: 1.0, alpha: ALPHA, s: S, cube_set: None })?;
                for (gi, &g) in gs.iter().enumerate() {
                    for j in 0..2 {
                        let spec = MixedNormSpec { gamma: g, alpha: ALPHA, s: lhs_index(&params, g, j), cube_set: None };
                        let rhs = lambda.powf((k - kb) * (j as f64 - 1.0) - (2.0 * d - k) / g) * g_norm;
                        inh_row[2 * gi + j] = inh_row[2 * gi + j].max(mixed_norm(&duh[j], &spec)? / rhs);
                    }
                }
            }
            let u0 = dilate_field(&base0, l, 1.0)?;
            let u1 = dilate_field(&base1, l, 1.0)?;
            let series = evolve(&pb, &u0, &u1, r)?;
            for (gi, &g) in gs.iter().enumerate() {
                for j in 0..2 {
                    let (lhs, rhs) = homogeneous_sides(&params, lambda, &u0, &u1, &series, g, j)?;
                    random_excess = random_excess.max(lhs / rhs / hom_row[2 * gi + j]);
                }
            }
            hom.push(hom_row);
            inh.push(inh_row);
        }
        let mut col = 0;
        for &g in &gs {
            for j in 0..2 {
                for (label, table) in [("homogeneous", &hom), ("inhomogeneous", &inh)] {
                    let consts: Vec<f64> = table.iter().map(|row| row[col]).collect();
                    let c = consts.iter().copied().fold(0.0, f64::max);
                    report.constant(&format!("{regime}.{label}.gamma{}.j{j}", gamma_label(g)), c);
                    report.push(
                        Case::at_most(&format!("{regime} {label} gamma={} j={j} flatness", gamma_label(g)), drift(&consts), FLATNESS_TOL)
                            .with("sigma", params.sigma)
                            .with("delta", params.delta)
                            .with("alpha", ALPHA)
                            .with("s", S)
                            .with("lambdas", LAMBDAS.to_vec())
                            .with("constants", consts.clone()),
                    );
                }
                col += 1;
            }
        }
        report.push(Case::at_most(&format!("{regime} random data within the fitted constants"), random_excess, 1.0 + 1e-9));

        // Hölder between the L¹ and L^∞ time norms, cube by cube.
        let pb = problem(params, 2.0);
        let r = pb.support_radius()?;
        let u0 = dilate_field(&base0, 2, 1.0)?;
        let u1 = dilate_field(&base1, 2, 1.0)?;
        let series = evolve(&pb, &u0, &u1, r)?;
        let p = params.p as f64;
        let (n1, np, ni) = (cube_time_norms(&series[0], 1.0), cube_time_norms(&series[0], p), cube_time_norms(&series[0], f64::INFINITY));
        let worst = n1
            .iter()
            .zip(&np)
            .zip(&ni)
            .filter(|((_, v), _)| **v > 0.0)
            .map(|((a, v), b)| v / (a.powf(1.0 / p) * b.powf(1.0 - 1.0 / p)))
            .fold(0.0, f64::max);
        report.push(Case::at_most(&format!("{regime} log-convexity of cube time norms"), worst, 1.0 + 1e-12).with("gamma", p));

        // Data below R_λ is outside the estimate's hypotheses.
        let low = SpectralField::single_mode(grid, &[1], Complex64::new(1.0, 0.0))?;
        let zero = SpectralField::zeros(grid);
        let pb8 = problem(params, 8.0);
        report.push(
            Case::rejection(&format!("{regime} data below R_lambda rejected"), linear_evolve(&params, 8.0, pb8.support_radius()?, &low, &zero, &[0.0, 1.0]))
                .with("lambda", 8.0)
                .with("xi", 0.5),
        );
        if params.regime() == crate::kernels::Regime::Effective {
            // Bypassing the support condition: a slow low-frequency mode breaks the γ = 1 bound.
            let series = evolve(&pb8, &low, &zero, 0.0)?;
            let (lhs, rhs) = homogeneous_sides(&params, 8.0, &low, &zero, &series, 1.0, 0)?;
            let fitted = report.fitted_constants[&format!("{regime}.homogeneous.gamma1.j0")];
            report.push(
                Case::at_most(&format!("{regime} low-frequency data against the fitted gamma=1 constant"), lhs / rhs, fitted)
                    .negative()
                    .with("lambda", 8.0)
                    .with("xi", 0.5),
            );
        }
    }

    // Zero data and a single mode with a closed form.
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let pb = problem(params, 1.0);
    let r = pb.support_radius()?;
    let zero = SpectralField::zeros(grid);
    let series = evolve(&pb, &zero, &zero, r)?;
    let (lhs, _) = homogeneous_sides(&params, 1.0, &zero, &zero, &series, f64::INFINITY, 0)?;
    report.push(Case::at_most("zero data gives zero", lhs, 0.0));

    let c = Complex64::new(0.7, -0.2);
    let u1 = SpectralField::single_mode(grid, &[5], c)?;
    let series = evolve(&pb, &zero, &u1, r)?;
    let (lhs, _) = homogeneous_sides(&params, 1.0, &zero, &u1, &series, f64::INFINITY, 0)?;
    let xi = 2.5;
    let sup = series[0].times.iter().map(|&t| kernel_eval(&params, 1.0, xi, t).map(|k| k.k1.norm())).collect::<Result<Vec<_>>>()?;
    let sup = sup.into_iter().fold(0.0, f64::max);
    let expected = sup * c.norm() * grid.box_measure().sqrt() * cube_weight(&CubeIndex::new(&[2]), ALPHA, lhs_index(&params, f64::INFINITY, 0));
    report.push(Case::at_most("single mode: sup of K1 times data", (lhs - expected).abs() / expected, 1e-12).with("xi", xi));
    Ok(report.finish())
}
