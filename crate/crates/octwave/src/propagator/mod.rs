//! Linear evolution, Duhamel integrals and the global-in-time Picard solver for
//!
//! ```text
//! u = K0 u0 + K1 u1 + ∫₀ᵗ K1(t−τ) u(τ)^p dτ
//! ```
//!
//! on octant-supported data above the threshold `R_λ`.

pub mod calibrate;
mod duhamel;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{derived_exponents, kernel_decay_rate, kernel_eval, r_lambda, DerivedExponents, ModelParams};
use crate::norms::{cube_time_norms, cube_weight, mixed_norm, MixedNormSpec, NormSpec, TimeSeries};
use crate::spectral::{GridSpec, SpectralField};

pub use calibrate::{calibrate_constants, FittedConstants};
pub use duhamel::StepWeights;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative X-norm increment below which contraction factors are not recorded.
pub const FACTOR_FLOOR: f64 = 1e-11;

/// The scaled problem: equation, scaling parameter and solution-space norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub params: ModelParams,
    pub lambda: f64,
    pub norm: NormSpec,
    pub eps0: f64,
}

impl Problem {
    pub fn derived(&self) -> Result<DerivedExponents> {
        derived_exponents(&self.params, self.eps0)
    }

    /// Support threshold `R_λ` of the data.
    pub fn support_radius(&self) -> Result<f64> {
        Ok(r_lambda(&self.derived()?, self.lambda))
    }

    /// Regularity shift of the solution space `X = L̃^p(E^{α, s+(2κ−2δ)/p+κ̄})`.
    pub fn x_shift(&self) -> f64 {
        let p = self.params.p as f64;
        (2.0 * self.params.kappa() - 2.0 * self.params.delta) / p + self.params.kappa_bar()
    }

    pub fn x_spec(&self) -> MixedNormSpec {
        MixedNormSpec {
            gamma: self.params.p as f64,
            alpha: self.norm.alpha,
            s: self.norm.s + self.x_shift(),
            cube_set: None,
        }
    }

    /// `λ^{(2δ−κ)/p+κ−κ̄}`: the factor turning the X-norm into the B-norm.
    pub fn b_factor(&self) -> f64 {
        let (k, kb, d) = (self.params.kappa(), self.params.kappa_bar(), self.params.delta);
        self.lambda.powf((2.0 * d - k) / self.params.p as f64 + k - kb)
    }

    pub fn x_norm(&self, u: &TimeSeries) -> Result<f64> {
        mixed_norm(u, &self.x_spec())
    }

    pub fn b_norm(&self, u: &TimeSeries) -> Result<f64> {
        Ok(self.b_factor() * self.x_norm(u)?)
    }

    /// Size of the data pair `‖u0‖_{E^α_{s+κ̄}} + ‖u1‖_{E^α_s}`.
    pub fn data_norm(&self, u0: &SpectralField, u1: &SpectralField) -> f64 {
        crate::norms::e_norm(u0, self.norm.shifted(self.params.kappa_bar())) + crate::norms::e_norm(u1, self.norm)
    }

    /// Exponential rate `rate · λ^{2δ−κ} R_λ^{2κ−2δ}` of the slowest admissible mode.
    pub fn decay_rate(&self) -> Result<f64> {
        let rl = self.support_radius()?;
        Ok(kernel_decay_rate(&self.params) * crate::kernels::decay_exponent(&self.params, self.lambda, rl))
    }

    /// Horizon `T` with `e^{−rate T} <= 1e−8`.
    pub fn default_horizon(&self) -> Result<f64> {
        Ok(1e8f64.ln() / self.decay_rate()?)
    }
}

/// `(max{2C₀, 4C₁})^{−1/(p−1)} λ^{−(κ−2δ+(κ̄−κ)p)/(p−1)}`.
pub fn nu_bound(params: &ModelParams, lambda: f64, c0: f64, c1: f64) -> f64 {
    let p = params.p as f64;
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    let expo = (k - 2.0 * d + (kb - k) * p) / (p - 1.0);
    (2.0 * c0).max(4.0 * c1).powf(-1.0 / (p - 1.0)) * lambda.powf(-expo)
}

/// Uniform grid `0, h, …, T` with `steps` intervals.
pub fn uniform_times(t_final: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| t_final * i as f64 / steps as f64).collect()
}

fn check_support(f: &SpectralField, r: f64, what: &str) -> Result<()> {
    if f.is_octant_supported(r) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} must be octant-supported with |ξ|_∞ >= {r} (leakage {:.3e})",
            f.octant_leakage(r)
        )))
    }
}

/// Storage indices of the lattice points inside the admissible region.
fn support_modes(grid: &GridSpec, r: f64) -> Vec<usize> {
    let probe = SpectralField { grid: *grid, coeffs: vec![Complex64::new(1.0, 0.0); grid.len()] };
    let masked = probe.octant_mask(r);
    masked.coeffs.iter().enumerate().filter(|(_, c)| c.re != 0.0).map(|(i, _)| i).collect()
}

/// `(K0 u0 + K1 u1, ∂t(K0 u0 + K1 u1))` at every time, mode by mode.
pub fn linear_evolve(
    params: &ModelParams,
    lambda: f64,
    r_support: f64,
    u0: &SpectralField,
    u1: &SpectralField,
    times: &[f64],
) -> Result<(TimeSeries, TimeSeries)> {
    if u0.grid != u1.grid {
        return Err(Error::Precondition("u0 and u1 live on different grids".into()));
    }
    check_support(u0, r_support, "u0")?;
    check_support(u1, r_support, "u1")?;
    let grid = u0.grid;
    let active: Vec<usize> = (0..grid.len())
        .filter(|&i| u0.coeffs[i] != ZERO || u1.coeffs[i] != ZERO)
        .collect();
    let columns: Vec<(Vec<Complex64>, Vec<Complex64>)> = active
        .par_iter()
        .map(|&idx| {
            let r = grid.radius(idx);
            let (a0, a1) = (u0.coeffs[idx], u1.coeffs[idx]);
            let mut v = Vec::with_capacity(times.len());
            let mut dv = Vec::with_capacity(times.len());
            for &t in times {
                let kv = kernel_eval(params, lambda, r, t)?;
                v.push(kv.k0 * a0 + kv.k1 * a1);
                dv.push(kv.dtk0 * a0 + kv.dtk1 * a1);
            }
            Ok((v, dv))
        })
        .collect::<Result<_>>()?;
    let mut u = vec![SpectralField::zeros(grid); times.len()];
    let mut du = vec![SpectralField::zeros(grid); times.len()];
    for (&idx, (v, dv)) in active.iter().zip(&columns) {
        for ti in 0..times.len() {
            u[ti].coeffs[idx] = v[ti];
            du[ti].coeffs[idx] = dv[ti];
        }
    }
    Ok((TimeSeries::new(times.to_vec(), u)?, TimeSeries::new(times.to_vec(), du)?))
}

/// `(∫₀ᵗ K1(t−τ) g(τ) dτ, ∫₀ᵗ ∂tK1(t−τ) g(τ) dτ)` at every stored time, with `g`
/// interpolated linearly between samples and integrated exactly per mode.
pub fn duhamel_series(
    params: &ModelParams,
    lambda: f64,
    r_support: f64,
    forcing: &TimeSeries,
) -> Result<(TimeSeries, TimeSeries)> {
    let grid = forcing.grid();
    for f in &forcing.fields {
        check_support(f, r_support, "forcing")?;
    }
    let times = &forcing.times;
    let modes = support_modes(&grid, r_support);
    let columns: Vec<(Vec<Complex64>, Vec<Complex64>)> = modes
        .par_iter()
        .map(|&idx| {
            let (a, b) = params.mode_coefficients(lambda, grid.radius(idx));
            let mut y = [ZERO; 2];
            let mut v = Vec::with_capacity(times.len());
            let mut dv = Vec::with_capacity(times.len());
            v.push(ZERO);
            dv.push(ZERO);
            let mut cached: Option<(f64, StepWeights)> = None;
            for i in 1..times.len() {
                let h = times[i] - times[i - 1];
                let w = match cached {
                    Some((hc, w)) if (hc - h).abs() <= 1e-12 * h => w,
                    _ => {
                        let w = StepWeights::new(a, b, h);
                        cached = Some((h, w));
                        w
                    }
                };
                y = w.apply(y, forcing.fields[i - 1].coeffs[idx], forcing.fields[i].coeffs[idx]);
                v.push(y[0]);
                dv.push(y[1]);
            }
            (v, dv)
        })
        .collect();
    let mut u = vec![SpectralField::zeros(grid); times.len()];
    let mut du = vec![SpectralField::zeros(grid); times.len()];
    for (&idx, (v, dv)) in modes.iter().zip(&columns) {
        for ti in 0..times.len() {
            u[ti].coeffs[idx] = v[ti];
            du[ti].coeffs[idx] = dv[ti];
        }
    }
    Ok((TimeSeries::new(times.clone(), u)?, TimeSeries::new(times.clone(), du)?))
}

/// The Duhamel integral at a single stored time index.
pub fn duhamel(
    params: &ModelParams,
    lambda: f64,
    r_support: f64,
    forcing: &TimeSeries,
    t_index: usize,
) -> Result<SpectralField> {
    if t_index >= forcing.len() {
        return Err(Error::Range(format!(
            "time index {t_index} outside the {} stored samples",
            forcing.len()
        )));
    }
    let window = TimeSeries::new(forcing.times[..=t_index].to_vec(), forcing.fields[..=t_index].to_vec())?;
    let (u, _) = duhamel_series(params, lambda, r_support, &window)?;
    Ok(u.fields[t_index].clone())
}

/// `u^p` at every time, masked back onto the admissible region. Returns the series
/// and the largest relative round-off leakage removed by the mask.
pub fn nonlinearity(u: &TimeSeries, p: usize, r_support: f64) -> Result<(TimeSeries, f64)> {
    let parts: Vec<(SpectralField, f64)> = u
        .fields
        .par_iter()
        .map(|f| {
            let raw = f.pointwise_power(p)?;
            let scale = raw.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let leak = if scale > 0.0 { raw.octant_leakage(r_support) / scale } else { 0.0 };
            Ok((raw.octant_mask(r_support), leak))
        })
        .collect::<Result<_>>()?;
    let leak = parts.iter().map(|(_, l)| *l).fold(0.0, f64::max);
    let fields = parts.into_iter().map(|(f, _)| f).collect();
    Ok((TimeSeries::new(u.times.clone(), fields)?, leak))
}

/// Controls of [`picard_solve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    /// Horizon `T`; `None` picks `e^{−rate T} = 1e−8`.
    pub t_final: Option<f64>,
    /// Uniform steps on `[0, T]`.
    pub steps: usize,
    pub max_iter: usize,
    /// Stop once `‖u⁽ᵐ⁺¹⁾ − u⁽ᵐ⁾‖_X <= contraction_tol · ‖u⁽ᵐ⁺¹⁾‖_X`.
    pub contraction_tol: f64,
    pub residual_tol: f64,
    /// Fraction of the ν bound used as the budget.
    pub nu_fraction: f64,
    /// Largest tolerated fraction of the X-weighted norm in the outer lattice shell.
    pub truncation_tol: f64,
    /// Relative width of the monitored outer shell.
    pub shell: f64,
    /// Disable the nonlinearity (linear consistency runs).
    pub nonlinear: bool,
    /// Start from `u⁽⁰⁾ = 0` instead of the linear part.
    pub start_from_zero: bool,
    /// Reject data whose linear part exceeds half the budget.
    pub enforce_smallness: bool,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            t_final: None,
            steps: 4000,
            max_iter: 40,
            contraction_tol: 1e-12,
            residual_tol: 1e-6,
            nu_fraction: 0.5,
            truncation_tol: 1e-8,
            shell: 0.1,
            nonlinear: true,
            start_from_zero: false,
            enforce_smallness: true,
        }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.max_iter == 0 {
            return Err(Error::Config("steps and max_iter must be positive".into()));
        }
        if !(self.contraction_tol > 0.0 && self.contraction_tol < 1.0) {
            return Err(Error::Config("contraction_tol must lie in (0, 1)".into()));
        }
        if !(self.nu_fraction > 0.0 && self.nu_fraction <= 1.0) {
            return Err(Error::Config("nu_fraction must lie in (0, 1]".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::Config("residual_tol must be positive".into()));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return Err(Error::Config("t_final must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One Picard iteration's bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub x_norm: f64,
    pub increment: f64,
    /// `max |Δû| / max |û|` over stored times and modes.
    pub modewise_increment: f64,
    pub contraction_factor: Option<f64>,
    pub shell_fraction: f64,
    pub leakage: f64,
}

/// Accepted solution together with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub problem: Problem,
    pub series: TimeSeries,
    pub dt_series: TimeSeries,
    pub norm_history: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub log: Vec<IterationLog>,
    pub x_norm: f64,
    pub b_norm: f64,
    pub linear_b_norm: f64,
    pub nu: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖defect‖_X / ‖u‖_X` after re-substitution.
    pub residual: f64,
    /// `max |defect| / max |u|` over stored times and modes.
    pub residual_modewise: f64,
    /// Largest relative coefficient outside the admissible region over all iterates.
    pub support_leakage: f64,
    pub max_shell_fraction: f64,
    /// Exponential estimate of the X-norm contribution of `(T, ∞)`.
    pub tail_bound: f64,
}

/// Largest over times of the weighted `ℓ²` fraction carried by the outer lattice shell.
fn weighted_shell_fraction(u: &TimeSeries, weights: &[f64], shell: f64) -> f64 {
    let grid = u.grid();
    u.fields
        .iter()
        .map(|f| {
            let (mut outer, mut total) = (0.0, 0.0);
            for (i, c) in f.coeffs.iter().enumerate() {
                let v = (weights[i] * c.norm()).powi(2);
                total += v;
                if grid.in_outer_shell(i, shell) {
                    outer += v;
                }
            }
            if total > 0.0 { (outer / total).sqrt() } else { 0.0 }
        })
        .fold(0.0, f64::max)
}

/// Re-substitution defect `K0u0 + K1u1 + Duhamel[u^p] − u`.
pub fn mild_defect(problem: &Problem, u0: &SpectralField, u1: &SpectralField, u: &TimeSeries) -> Result<TimeSeries> {
    mild_defect_on(problem, problem.support_radius()?, u0, u1, u)
}

/// [`mild_defect`] with an explicit support threshold.
pub fn mild_defect_on(
    problem: &Problem,
    r: f64,
    u0: &SpectralField,
    u1: &SpectralField,
    u: &TimeSeries,
) -> Result<TimeSeries> {
    let (lin, _) = linear_evolve(&problem.params, problem.lambda, r, u0, u1, &u.times)?;
    let (force, _) = nonlinearity(u, problem.params.p, r)?;
    let (duh, _) = duhamel_series(&problem.params, problem.lambda, r, &force)?;
    Ok(lin.add(&duh).sub(u))
}

fn max_abs(u: &TimeSeries) -> f64 {
    u.fields
        .iter()
        .flat_map(|f| f.coeffs.iter().map(|c| c.norm()))
        .fold(0.0, f64::max)
}

/// Exponential tail estimate of the mixed norm beyond the last stored time:
/// per cube `‖□_k u(T)‖ (γ ρ)^{−1/γ}` with `ρ` the slowest kernel decay rate.
pub fn tail_bound(u: &TimeSeries, spec: &MixedNormSpec, rate: f64) -> f64 {
    let last = TimeSeries { times: vec![0.0], fields: vec![u.fields.last().expect("nonempty").clone()] };
    let at_t = cube_time_norms(&last, f64::INFINITY);
    let factor = if spec.gamma.is_infinite() { 1.0 } else { (spec.gamma * rate).powf(-1.0 / spec.gamma) };
    let grid = u.grid();
    at_t.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(id, v)| (cube_weight(&grid.cube_from_id(id), spec.alpha, spec.s) * v * factor).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Global-in-time Picard iteration `u⁽ᵐ⁺¹⁾ = u^lin + Duhamel[(u⁽ᵐ⁾)^p]`.
pub fn picard_solve(
    problem: &Problem,
    u0: &SpectralField,
    u1: &SpectralField,
    cfg: &PicardConfig,
    constants: &FittedConstants,
) -> Result<SolutionRecord> {
    cfg.validate()?;
    let params = &problem.params;
    let r = problem.support_radius()?;
    let t_final = match cfg.t_final {
        Some(t) => t,
        None => problem.default_horizon()?,
    };
    let times = uniform_times(t_final, cfg.steps);
    let (lin, dlin) = linear_evolve(params, problem.lambda, r, u0, u1, &times)?;
    let nu = cfg.nu_fraction * nu_bound(params, problem.lambda, constants.c0, constants.c1);
    let linear_b_norm = problem.b_norm(&lin)?;
    if cfg.enforce_smallness && linear_b_norm > 0.5 * nu * (1.0 + 1e-12) {
        return Err(Error::Smallness { b_norm: linear_b_norm, nu });
    }

    let mut u = if cfg.start_from_zero { TimeSeries::zeros(times.clone(), u0.grid)? } else { lin.clone() };
    let mut du = if cfg.start_from_zero { TimeSeries::zeros(times.clone(), u0.grid)? } else { dlin.clone() };
    let mut log = Vec::new();
    let mut norm_history = Vec::new();
    let mut factors = Vec::new();
    let mut prev_increment: Option<f64> = None;
    let mut above_one = 0usize;
    let mut converged = false;
    let mut support_leakage: f64 = 0.0;
    let mut max_shell: f64 = 0.0;
    let spec = problem.x_spec();
    let grid = u0.grid;
    let shell_weights: Vec<f64> = (0..grid.len())
        .map(|i| cube_weight(&grid.cube_from_id(grid.cube_id_of(i)), spec.alpha, spec.s))
        .collect();

    for iteration in 1..=cfg.max_iter {
        let (next, dnext, leak) = if cfg.nonlinear {
            let (force, leak) = nonlinearity(&u, params.p, r)?;
            let (duh, dduh) = duhamel_series(params, problem.lambda, r, &force)?;
            (lin.add(&duh), dlin.add(&dduh), leak)
        } else {
            (lin.clone(), dlin.clone(), 0.0)
        };
        support_leakage = support_leakage.max(leak);
        if leak > 1e-12 {
            return Err(Error::Precondition(format!(
                "nonlinearity leaked {leak:.3e} outside the admissible region"
            )));
        }
        let shell = weighted_shell_fraction(&next, &shell_weights, cfg.shell);
        max_shell = max_shell.max(shell);
        if shell > cfg.truncation_tol {
            return Err(Error::SpectralOverflow { fraction: shell, tol: cfg.truncation_tol });
        }
        let x_next = problem.x_norm(&next)?;
        let diff = next.sub(&u);
        let increment = problem.x_norm(&diff)?;
        let modewise = {
            let peak = max_abs(&next);
            if peak > 0.0 { max_abs(&diff) / peak } else { 0.0 }
        };
        // Factors are only meaningful while increments sit above the FFT round-off.
        let floor = FACTOR_FLOOR * x_next;
        let factor = prev_increment.and_then(|p| if p > floor { Some(increment / p) } else { None });
        if let Some(f) = factor {
            factors.push(f);
            above_one = if f > 1.0 { above_one + 1 } else { 0 };
        }
        log.push(IterationLog {
            iteration,
            x_norm: x_next,
            increment,
            modewise_increment: modewise,
            contraction_factor: factor,
            shell_fraction: shell,
            leakage: leak,
        });
        norm_history.push(x_next);
        u = next;
        du = dnext;
        if above_one >= 3 {
            return Err(Error::Divergence { iteration, factors });
        }
        if !x_next.is_finite() {
            return Err(Error::Divergence { iteration, factors });
        }
        if increment <= cfg.contraction_tol * x_next && modewise <= cfg.contraction_tol {
            converged = true;
            break;
        }
        prev_increment = Some(increment);
    }

    let x_norm = problem.x_norm(&u)?;
    let (residual, residual_modewise) = if cfg.nonlinear {
        let defect = mild_defect(problem, u0, u1, &u)?;
        let rel = if x_norm > 0.0 { problem.x_norm(&defect)? / x_norm } else { problem.x_norm(&defect)? };
        let umax = max_abs(&u);
        let modewise = if umax > 0.0 { max_abs(&defect) / umax } else { max_abs(&defect) };
        (rel, modewise)
    } else {
        (0.0, 0.0)
    };
    let tail = tail_bound(&u, &problem.x_spec(), problem.decay_rate()?);
    Ok(SolutionRecord {
        problem: *problem,
        b_norm: problem.b_factor() * x_norm,
        series: u,
        dt_series: du,
        norm_history,
        contraction_factors: factors,
        log,
        x_norm,
        linear_b_norm,
        nu,
        iterations: 0,
        converged,
        residual,
        residual_modewise,
        support_leakage,
        max_shell_fraction: max_shell,
        tail_bound: tail,
    })
    .map(|mut rec| {
        rec.iterations = rec.log.len();
        rec
    })
}

/// Amplitude `a` for which the linear part of `(a u0, a u1)` has B-norm `fraction · ν/2`,
/// the largest size the smallness check accepts when `fraction = 1`.
pub fn budget_amplitude(
    problem: &Problem,
    u0: &SpectralField,
    u1: &SpectralField,
    cfg: &PicardConfig,
    constants: &FittedConstants,
    fraction: f64,
) -> Result<f64> {
    let t_final = match cfg.t_final {
        Some(t) => t,
        None => problem.default_horizon()?,
    };
    let times = uniform_times(t_final, cfg.steps);
    let (lin, _) = linear_evolve(&problem.params, problem.lambda, problem.support_radius()?, u0, u1, &times)?;
    let b = problem.b_norm(&lin)?;
    if !(b > 0.0) {
        return Err(Error::Domain("data shape has a vanishing linear part".into()));
    }
    let nu = cfg.nu_fraction * nu_bound(&problem.params, problem.lambda, constants.c0, constants.c1);
    Ok(fraction * 0.5 * nu / b)
}

/// Norms of the regularity estimate, each with its ratio to `λ^{κ̄−κ} ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    /// `L̃¹(E^{α, s+2κ−2δ+κ̄})` of `u`.
    pub l1: f64,
    /// `L̃^∞(E^{α, s+κ̄})` of `u`.
    pub linf: f64,
    /// `L̃^∞(E^{α, s})` of `∂t u`.
    pub dt_linf: f64,
    /// `λ^{κ̄−κ} ν`.
    pub scale: f64,
    /// Largest of the three norms over `scale`: the fitted `C₂`.
    pub c2: f64,
}

pub fn regularity_norms(rec: &SolutionRecord, params: &ModelParams, lambda: f64, alpha: f64, s: f64) -> Result<RegularityReport> {
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    let l1 = mixed_norm(&rec.series, &MixedNormSpec { gamma: 1.0, alpha, s: s + 2.0 * k - 2.0 * d + kb, cube_set: None })?;
    let linf = mixed_norm(&rec.series, &MixedNormSpec { gamma: f64::INFINITY, alpha, s: s + kb, cube_set: None })?;
    let dt_linf = mixed_norm(&rec.dt_series, &MixedNormSpec { gamma: f64::INFINITY, alpha, s, cube_set: None })?;
    let scale = lambda.powf(kb - k) * rec.nu;
    let c2 = if scale > 0.0 { l1.max(linf).max(dt_linf) / scale } else { 0.0 };
    Ok(RegularityReport { l1, linf, dt_linf, scale, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ode_oracle, InitialCondition, DEFAULT_EPS0};
    use crate::spectral::CubeIndex;

    fn problem(sigma: f64, delta: f64, p: usize) -> Problem {
        Problem {
            params: ModelParams::new(sigma, delta, p, 1).unwrap(),
            lambda: 1.0,
            norm: NormSpec { alpha: -1.0, s: -1.5 },
            eps0: DEFAULT_EPS0,
        }
    }

    fn grid() -> GridSpec {
        GridSpec::new(1, 4, 16).unwrap()
    }

    #[test]
    fn linear_evolve_initial_and_velocity_mode() {
        let pb = problem(1.0, 0.0, 2);
        let r = pb.support_radius().unwrap();
        let g = grid();
        let u0 = SpectralField::single_cube(g, &CubeIndex::new(&[1]), Complex64::new(1.0, 0.5)).unwrap();
        let z = SpectralField::zeros(g);
        let (u, du) = linear_evolve(&pb.params, 1.0, r, &u0, &z, &[0.0, 0.5]).unwrap();
        assert_eq!(u.fields[0], u0);
        assert!(du.fields[0].is_zero());

        let u1 = SpectralField::single_mode(g, &[6], Complex64::new(2.0, 0.0)).unwrap();
        let (u, _) = linear_evolve(&pb.params, 1.0, r, &z, &u1, &[0.0, 1.3]).unwrap();
        let o = ode_oracle(&pb.params, 1.0, 1.5, 1.3, InitialCondition::Velocity).unwrap() * 2.0;
        let got = u.fields[1].coeffs[g.index_of(&[6]).unwrap()];
        assert!((got - o).norm() < 1e-9);
    }

    #[test]
    fn linear_evolve_rejects_unsupported_data() {
        let pb = problem(1.0, 0.0, 2);
        let g = grid();
        let bad = SpectralField::single_mode(g, &[1], Complex64::new(1.0, 0.0)).unwrap(); // ξ = 0.25 < R
        let z = SpectralField::zeros(g);
        assert!(linear_evolve(&pb.params, 1.0, pb.support_radius().unwrap(), &bad, &z, &[0.0]).is_err());
    }

    #[test]
    fn duhamel_zero_and_constant_forcing() {
        let pb = problem(1.0, 0.0, 2);
        let r = pb.support_radius().unwrap();
        let g = grid();
        let times = uniform_times(0.01, 10);
        let z = TimeSeries::zeros(times.clone(), g).unwrap();
        assert!(duhamel(&pb.params, 1.0, r, &z, 10).unwrap().is_zero());
        assert!(matches!(duhamel(&pb.params, 1.0, r, &z, 11), Err(Error::Range(_))));

        let f = SpectralField::single_mode(g, &[4], Complex64::new(1.0, 0.0)).unwrap();
        let forcing = TimeSeries::constant(times, &f).unwrap();
        let v = duhamel(&pb.params, 1.0, r, &forcing, 10).unwrap().coeffs[g.index_of(&[4]).unwrap()];
        let t = 0.01f64;
        assert!((v.re - t * t / 2.0).abs() < t.powi(3));
    }

    #[test]
    fn duhamel_exponential_forcing_matches_refined_quadrature() {
        let pb = problem(1.0, 0.0, 2);
        let r_support = pb.support_radius().unwrap();
        let g = grid();
        let beta = 1.0;
        let t_end = 2.0;
        let times = uniform_times(t_end, 2000);
        let f = SpectralField::single_mode(g, &[6], Complex64::new(1.0, 0.0)).unwrap();
        let forcing = TimeSeries::separable(times, &f, |t| (-beta * t).exp()).unwrap();
        let got = duhamel(&pb.params, 1.0, r_support, &forcing, 2000).unwrap().coeffs[g.index_of(&[6]).unwrap()];
        // Composite Simpson with 200 000 panels on ∫₀ᵗ K1(t−τ) e^{−βτ} dτ.
        let n = 200_000;
        let hq = t_end / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let tau = i as f64 * hq;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let k1 = kernel_eval(&pb.params, 1.0, 1.5, t_end - tau).unwrap().k1;
            acc += k1 * (-beta * tau).exp() * w;
        }
        acc *= hq / 3.0;
        assert!((got - acc).norm() <= 1e-6 * acc.norm(), "{got} vs {acc}");
    }

    #[test]
    fn nu_bound_exponents() {
        let p = ModelParams::new(2.0, 1.0, 2, 1).unwrap();
        assert_eq!(nu_bound(&p, 1.0, 1.0, 2.0), nu_bound(&p, 9.0, 1.0, 2.0));
        let p = ModelParams::new(1.0, 0.0, 2, 1).unwrap();
        let ratio = nu_bound(&p, 2.0, 1.0, 1.0) / nu_bound(&p, 1.0, 1.0, 1.0);
        assert!((ratio - 0.25).abs() < 1e-14);
        assert!((nu_bound(&p, 1.0, 0.5, 1.0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn zero_data_is_a_one_iteration_fixed_point() {
        let pb = problem(1.0, 0.0, 2);
        let g = grid();
        let z = SpectralField::zeros(g);
        let cfg = PicardConfig { steps: 50, ..PicardConfig::default() };
        let rec = picard_solve(&pb, &z, &z, &cfg, &FittedConstants::unit()).unwrap();
        assert_eq!(rec.iterations, 1);
        assert!(rec.series.is_zero());
        assert!(rec.converged);
    }

    #[test]
    fn linear_runs_reproduce_linear_evolve() {
        let pb = problem(1.0, 0.0, 2);
        let g = grid();
        let u0 = SpectralField::single_cube(g, &CubeIndex::new(&[1]), Complex64::new(1e-3, 0.0)).unwrap();
        let z = SpectralField::zeros(g);
        let cfg = PicardConfig { steps: 200, nonlinear: false, enforce_smallness: false, ..PicardConfig::default() };
        let rec = picard_solve(&pb, &u0, &z, &cfg, &FittedConstants::unit()).unwrap();
        let (lin, _) = linear_evolve(&pb.params, 1.0, pb.support_radius().unwrap(), &u0, &z, &rec.series.times).unwrap();
        assert_eq!(rec.iterations, 1);
        assert_eq!(rec.series, lin);
    }

    #[test]
    fn oversized_data_is_rejected_with_diagnosis() {
        let pb = problem(1.0, 0.0, 2);
        let g = grid();
        let u0 = SpectralField::single_cube(g, &CubeIndex::new(&[1]), Complex64::new(10.0, 0.0)).unwrap();
        let z = SpectralField::zeros(g);
        let cfg = PicardConfig { steps: 100, ..PicardConfig::default() };
        match picard_solve(&pb, &u0, &z, &cfg, &FittedConstants::unit()) {
            Err(Error::Smallness { b_norm, nu }) => assert!(b_norm > nu / 2.0),
            other => panic!("expected smallness error, got {other:?}"),
        }
    }
}
