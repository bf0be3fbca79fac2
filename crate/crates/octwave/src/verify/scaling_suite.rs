//! Scaling-type bounds in the rough spaces and the scaling bookkeeping of the
//! large-data argument.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use super::{suite_rng, Case, SuiteReport};
use crate::error::Result;
use crate::kernels::{ModelParams, DEFAULT_EPS0};
use crate::norms::{NormSpec, TimeSeries};
use crate::propagator::calibrate::FittedConstants;
use crate::propagator::Problem;
use crate::scaling::{
    descale_data, descaling_ratio, dilate_field, fit_c_tilde1, scale_data, scaling_bound_ratio, select_lambda, Dilation,
};
use crate::spectral::{CubeIndex, GridSpec, SpectralField};

const LAMBDAS: [u32; 3] = [2, 3, 4];
const ALPHA: f64 = -1.0;
const SAMPLES: usize = 6;
pub const REFINEMENT_FACTOR: f64 = 2.0;

fn grid(n: usize, m: usize) -> Result<GridSpec> {
    if n == 1 { GridSpec::new(1, m, 64) } else { GridSpec::new(2, m, 32) }
}

fn base_cubes(n: usize) -> Vec<CubeIndex> {
    if n == 1 {
        vec![CubeIndex::new(&[1]), CubeIndex::new(&[2])]
    } else {
        vec![CubeIndex::new(&[1, 1]), CubeIndex::new(&[2, 1])]
    }
}

fn phi(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    SpectralField::random_on_cubes(grid(n, m)?, &base_cubes(n), rng)
}

/// Largest whole-space scaling ratio over the samples, λ values and regularity indices.
fn fit_scaling_constant(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut best: f64 = 0.0;
    for _ in 0..SAMPLES {
        let f = phi(n, m, rng)?;
        for &l in &LAMBDAS {
            for s in [-1.0, 0.0, 1.5] {
                best = best.max(scaling_bound_ratio(&f, l as f64, ALPHA, s, 1.0)?);
            }
        }
    }
    Ok(best)
}

/// `g = h(λ·)` for a random decaying `h`, so that `g` lives on the λ-lattice.
fn lattice_series(m: usize, lambda: u32, rng: &mut ChaCha8Rng) -> Result<TimeSeries> {
    let h = phi(1, m, rng)?;
    let g = dilate_field(&h, lambda, 1.0)?;
    let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
    TimeSeries::separable(times, &g, |t| (-t).exp())
}

/// `c = max log₂(ratio) / ((−α)λ)` over the samples and λ values, clamped at 0.
fn fit_descaling_constant(params: &ModelParams, m: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut c: f64 = 0.0;
    for _ in 0..SAMPLES {
        for &l in &LAMBDAS {
            let g = lattice_series(m, l, rng)?;
            let ratio = descaling_ratio(&g, l as f64, params, ALPHA, 0.0)?;
            c = c.max(ratio.log2() / (-ALPHA * l as f64));
        }
    }
    Ok(c)
}

fn refinement_change(a: f64, b: f64) -> f64 {
    if a == b {
        1.0
    } else {
        (a / b).max(b / a)
    }
}

pub fn scaling(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("scaling", "scaling-type bounds for supported data and for descaled solutions", seed);
    let mut rng = suite_rng(seed, 4);

    for n in [1usize, 2] {
        let c2 = fit_scaling_constant(n, 2, &mut rng)?;
        let c4 = fit_scaling_constant(n, 4, &mut rng)?;
        report.constant(&format!("dilation.n{n}.M2"), c2);
        report.constant(&format!("dilation.n{n}.M4"), c4);
        report.push(Case::at_most(&format!("dilation constant refinement, n = {n}"), refinement_change(c2, c4), REFINEMENT_FACTOR).with("eps0", 1.0));
        // Fresh samples against the constant fitted on the fine grid.
        let mut worst: f64 = 0.0;
        for _ in 0..SAMPLES {
            let f = phi(n, 4, &mut rng)?;
            for &l in &LAMBDAS {
                for s in [-1.0, 0.0, 1.5] {
                    worst = worst.max(scaling_bound_ratio(&f, l as f64, ALPHA, s, 1.0)?);
                }
            }
        }
        report.push(Case::at_most(&format!("dilation ratios within fitted constant, n = {n}"), worst, c4).with("lambdas", LAMBDAS.to_vec()));
        let f = phi(n, 4, &mut rng)?;
        let id = scaling_bound_ratio(&f, 1.0, ALPHA, 0.5, 1.0)?;
        report.push(Case::at_most(&format!("dilation at lambda = 1 is the identity, n = {n}"), (id - 1.0).abs(), 0.0));
    }
    let low = SpectralField::single_mode(grid(1, 4)?, &[1], Complex64::new(1.0, 0.0))?;
    report.push(Case::rejection("support below eps0 rejected", scaling_bound_ratio(&low, 2.0, ALPHA, 0.0, 1.0)));

    for (sigma, delta) in [(1.0, 0.0), (1.0, 1.0)] {
        let params = ModelParams::new(sigma, delta, 2, 1)?;
        let regime = params.regime().name();
        let c2 = fit_descaling_constant(&params, 2, &mut rng)?;
        let c4 = fit_descaling_constant(&params, 4, &mut rng)?;
        report.constant(&format!("descaling.{regime}.M2"), c2);
        report.constant(&format!("descaling.{regime}.M4"), c4);
        let change = if c2.max(c4) < 1e-3 { 1.0 } else { refinement_change(c2, c4) };
        report.push(Case::at_most(&format!("{regime} descaling constant refinement"), change, REFINEMENT_FACTOR).with("c_m2", c2).with("c_m4", c4));
        let mut worst: f64 = 0.0;
        for _ in 0..SAMPLES {
            for &l in &LAMBDAS {
                let g = lattice_series(4, l, &mut rng)?;
                let ratio = descaling_ratio(&g, l as f64, &params, ALPHA, 0.0)?;
                worst = worst.max(ratio / (-ALPHA * c4 * l as f64).exp2());
            }
        }
        report.push(Case::at_most(&format!("{regime} descaling ratios within 2^(-alpha c lambda)"), worst, 1.0).with("c", c4));
        let g = lattice_series(4, 1, &mut rng)?;
        let id = descaling_ratio(&g, 1.0, &params, ALPHA, 0.0)?;
        report.push(Case::at_most(&format!("{regime} descaling at lambda = 1 is the identity"), (id - 1.0).abs(), 0.0));
    }

    // Scaling bookkeeping of the data.
    let params = ModelParams::new(1.0, 0.0, 2, 1)?;
    let problem = Problem { params, lambda: 1.0, norm: NormSpec { alpha: ALPHA, s: -1.5 }, eps0: DEFAULT_EPS0 };
    let g = grid(1, 2)?;
    let samples: Vec<(SpectralField, SpectralField)> = (0..SAMPLES)
        .map(|_| {
            Ok((
                SpectralField::random_on_cubes(g, &base_cubes(1), &mut rng)?,
                SpectralField::random_on_cubes(g, &base_cubes(1), &mut rng)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut roundtrip: f64 = 0.0;
    for (u0, u1) in &samples {
        for &l in &LAMBDAS {
            let (a, b) = scale_data(u0, u1, l as f64, &params, Dilation::Periodic)?;
            let (c, d) = descale_data(&a, &b, l as f64, &params, Dilation::Periodic)?;
            let err = c.sub(u0).l2_norm() / u0.l2_norm() + d.sub(u1).l2_norm() / u1.l2_norm();
            roundtrip = roundtrip.max(err);
        }
    }
    report.push(Case::at_most("scale then descale recovers the data", roundtrip, 1e-14));
    let (a, b) = scale_data(&samples[0].0, &samples[0].1, 1.0, &params, Dilation::Periodic)?;
    report.push(Case::flag("scaling at lambda = 1 is the identity", a == samples[0].0 && b == samples[0].1));
    let ct = fit_c_tilde1(&samples, &problem, &LAMBDAS)?;
    let ct_fine = {
        let g4 = grid(1, 4)?;
        let fine: Vec<(SpectralField, SpectralField)> = (0..SAMPLES)
            .map(|_| {
                Ok((
                    SpectralField::random_on_cubes(g4, &base_cubes(1), &mut rng)?,
                    SpectralField::random_on_cubes(g4, &base_cubes(1), &mut rng)?,
                ))
            })
            .collect::<Result<_>>()?;
        fit_c_tilde1(&fine, &problem, &LAMBDAS)?
    };
    report.constant("c_tilde1.M2", ct);
    report.constant("c_tilde1.M4", ct_fine);
    report.push(Case::at_most("data scaling constant refinement", refinement_change(ct, ct_fine), REFINEMENT_FACTOR));

    let k = FittedConstants::unit();
    report.push(Case::rejection("alpha = 0 has no scaling gain", select_lambda(1.0, &params, 0.0, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic)));
    report.push(Case::rejection("non-integer lambda rejected", scale_data(&samples[0].0, &samples[0].1, 2.5, &params, Dilation::Periodic)));
    let l_small = select_lambda(1e-6, &params, ALPHA, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic)?;
    let l_big = select_lambda(1e3, &params, ALPHA, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic)?;
    report.push(Case::at_most("small data selects lambda = 2", l_small as f64, 2.0));
    report.push(Case::at_least("larger data needs a larger lambda", l_big as f64, l_small as f64 + 1.0).with("lambda_small", l_small).with("lambda_big", l_big));
    Ok(report.finish())
}
