//! Large-data machinery: exact lattice dilation of the data, choice of the
//! scaling parameter, and the way back to the original equation.
//!
//! On the torus the substitution `u_λ(t, x) = λ^{2κ/(p−1)} u(λ^κ t, λx)` moves
//! the coefficient at `ξ` to `λξ` and leaves the equation invariant. The whole-space
//! convention additionally multiplies Fourier coefficients by `λ^{−n}`; it is kept
//! for the scaling-bound ratios, which compare with whole-space estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{derived_exponents, ModelParams};
use crate::norms::{e_norm, mixed_norm, MixedNormSpec, NormSpec, TimeSeries};
use crate::propagator::{mild_defect_on, FittedConstants, Problem, SolutionRecord};
use crate::spectral::SpectralField;

/// Fourier-side normalisation of `f ↦ f(λ ·)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dilation {
    /// Coefficients move unchanged: the exact dilation of periodic functions.
    Periodic,
    /// Coefficients pick up `λ^{−n}` as for the whole-space Fourier transform.
    Distributional,
}

impl Dilation {
    fn factor(self, n: usize, lambda: f64) -> f64 {
        match self {
            Dilation::Periodic => 1.0,
            Dilation::Distributional => lambda.powi(-(n as i32)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dilation::Periodic => "periodic",
            Dilation::Distributional => "distributional",
        }
    }
}

/// Checks that `lambda` is an integer `>= 1`.
pub fn integer_lambda(lambda: f64) -> Result<u32> {
    if !(lambda >= 1.0) || lambda.fract() != 0.0 || lambda > u32::MAX as f64 {
        return Err(Error::Unsupported(format!("scaling needs an integer λ >= 1, got {lambda}")));
    }
    Ok(lambda as u32)
}

/// Moves the coefficient at lattice point `m` to `λm`, multiplied by `amp`.
pub fn dilate_field(f: &SpectralField, lambda: u32, amp: f64) -> Result<SpectralField> {
    let grid = f.grid;
    let mut out = SpectralField::zeros(grid);
    for (idx, c) in f.coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let m = grid.lattice(idx);
        let target: Vec<i64> = m[..grid.n].iter().map(|v| v * lambda as i64).collect();
        let j = grid.index_of(&target).ok_or_else(|| {
            Error::Overflow(format!("mode {:?} dilated by {lambda} leaves the grid", &m[..grid.n]))
        })?;
        out.coeffs[j] = c * amp;
    }
    Ok(out)
}

/// Coefficients off the dilated lattice below this fraction of the largest one are
/// treated as round-off and dropped by [`contract_field`].
pub const OFF_LATTICE_TOL: f64 = 1e-12;

/// Inverse of [`dilate_field`]: moves `λm` back to `m` and multiplies by `amp`.
pub fn contract_field(f: &SpectralField, lambda: u32, amp: f64) -> Result<SpectralField> {
    let grid = f.grid;
    let l = lambda as i64;
    let peak = f.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = SpectralField::zeros(grid);
    for (idx, c) in f.coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let m = grid.lattice(idx);
        if m[..grid.n].iter().any(|v| v.rem_euclid(l) != 0) {
            if c.norm() <= OFF_LATTICE_TOL * peak {
                continue;
            }
            return Err(Error::Precondition(format!(
                "mode {:?} is not a multiple of λ = {lambda}",
                &m[..grid.n]
            )));
        }
        let target: Vec<i64> = m[..grid.n].iter().map(|v| v / l).collect();
        let j = grid.index_of(&target).expect("contraction stays inside the grid");
        out.coeffs[j] = c * amp;
    }
    Ok(out)
}

/// Amplitudes `(λ^{2κ/(p−1)}, λ^{2κ/(p−1)+κ})` of position and velocity, times the
/// Fourier factor of the dilation.
fn data_amplitudes(params: &ModelParams, lambda: f64, dilation: Dilation) -> (f64, f64) {
    let k = params.kappa();
    let base = lambda.powf(2.0 * k / (params.p as f64 - 1.0)) * dilation.factor(params.n, lambda);
    (base, base * lambda.powf(k))
}

/// `(u0, u1) ↦ (λ^{2κ/(p−1)} u0(λ·), λ^{2κ/(p−1)+κ} u1(λ·))`.
pub fn scale_data(
    u0: &SpectralField,
    u1: &SpectralField,
    lambda: f64,
    params: &ModelParams,
    dilation: Dilation,
) -> Result<(SpectralField, SpectralField)> {
    let l = integer_lambda(lambda)?;
    let (a0, a1) = data_amplitudes(params, lambda, dilation);
    Ok((dilate_field(u0, l, a0)?, dilate_field(u1, l, a1)?))
}

/// Inverse of [`scale_data`].
pub fn descale_data(
    u0: &SpectralField,
    u1: &SpectralField,
    lambda: f64,
    params: &ModelParams,
    dilation: Dilation,
) -> Result<(SpectralField, SpectralField)> {
    let l = integer_lambda(lambda)?;
    let (a0, a1) = data_amplitudes(params, lambda, dilation);
    Ok((contract_field(u0, l, 1.0 / a0)?, contract_field(u1, l, 1.0 / a1)?))
}

/// `u(t, x) = λ^{−2κ/(p−1)} u_λ(λ^{−κ} t, λ^{−1} x)` (and `λ^{−κ}` more for `∂t u`),
/// on the time grid `t = λ^κ t_λ`.
pub fn descale_series(
    u: &TimeSeries,
    lambda: f64,
    params: &ModelParams,
    dilation: Dilation,
    derivative: bool,
) -> Result<TimeSeries> {
    let l = integer_lambda(lambda)?;
    let (a0, a1) = data_amplitudes(params, lambda, dilation);
    let amp = if derivative { 1.0 / a1 } else { 1.0 / a0 };
    let stretch = lambda.powf(params.kappa());
    let times = u.times.iter().map(|t| t * stretch).collect();
    let fields = u.fields.iter().map(|f| contract_field(f, l, amp)).collect::<Result<_>>()?;
    TimeSeries::new(times, fields)
}

/// `‖φ(λ·)‖_{E^α_s} / (λ^{−n/2+max{s,0}} 2^{α(λ−1)ε} ‖φ‖_{E^α_s})` under the
/// whole-space normalisation.
pub fn scaling_bound_ratio(phi: &SpectralField, lambda: f64, alpha: f64, s: f64, eps_support: f64) -> Result<f64> {
    let l = integer_lambda(lambda)?;
    if alpha > 0.0 {
        return Err(Error::Domain(format!("alpha = {alpha} must be <= 0")));
    }
    if !(eps_support > 0.0) {
        return Err(Error::Domain("eps_support must be positive".into()));
    }
    let low = phi
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() != 0.0)
        .any(|(i, _)| phi.grid.xi(i)[..phi.grid.n].iter().map(|x| x * x).sum::<f64>().sqrt() < eps_support * (1.0 - 1e-12));
    if low {
        return Err(Error::Precondition(format!("φ has frequencies with |ξ| < {eps_support}")));
    }
    let spec = NormSpec { alpha, s };
    let base = e_norm(phi, spec);
    if base == 0.0 {
        return Err(Error::Domain("φ = 0 makes the ratio undefined".into()));
    }
    let n = phi.grid.n as f64;
    let scaled = dilate_field(phi, l, Dilation::Distributional.factor(phi.grid.n, lambda))?;
    let bound = lambda.powf(-n / 2.0 + s.max(0.0)) * (alpha * (lambda - 1.0) * eps_support).exp2();
    Ok(e_norm(&scaled, spec) / (bound * base))
}

/// Norm pair `L̃¹(E^{α, s+2κ−2δ+κ̄}) + L̃^∞(E^{α, s+κ̄})` of the regularity estimate.
pub fn regularity_pair(u: &TimeSeries, params: &ModelParams, alpha: f64, s: f64) -> Result<(f64, f64)> {
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    let l1 = mixed_norm(u, &MixedNormSpec { gamma: 1.0, alpha, s: s + 2.0 * k - 2.0 * d + kb, cube_set: None })?;
    let linf = mixed_norm(u, &MixedNormSpec { gamma: f64::INFINITY, alpha, s: s + kb, cube_set: None })?;
    Ok((l1, linf))
}

/// Raw descaling ratio `N(g_{1/λ}; λα) / N(g; α)` with `N` the regularity norm pair
/// and `g_{1/λ}(t, x) = g(λ^{−κ} t, λ^{−1} x)` in the whole-space normalisation.
pub fn descaling_ratio(g: &TimeSeries, lambda: f64, params: &ModelParams, alpha: f64, s: f64) -> Result<f64> {
    let l = integer_lambda(lambda)?;
    let amp = lambda.powi(params.n as i32);
    let stretch = lambda.powf(params.kappa());
    let times = g.times.iter().map(|t| t * stretch).collect();
    let fields = g.fields.iter().map(|f| contract_field(f, l, amp)).collect::<Result<_>>()?;
    let g_inv = TimeSeries::new(times, fields)?;
    let (a, b) = regularity_pair(&g_inv, params, lambda * alpha, s)?;
    let (c, d) = regularity_pair(g, params, alpha, s)?;
    if c + d == 0.0 {
        return Err(Error::Domain("g = 0 makes the ratio undefined".into()));
    }
    Ok((a + b) / (c + d))
}

/// Power of λ in the decaying side of the λ-selection inequality. The `−n/2`
/// belongs to the whole-space normalisation only.
pub fn selection_exponent(params: &ModelParams, s: f64, dilation: Dilation) -> f64 {
    let (k, kb, d) = (params.kappa(), params.kappa_bar(), params.delta);
    let p = params.p as f64;
    let n_term = match dilation {
        Dilation::Periodic => 0.0,
        Dilation::Distributional => params.n as f64 / 2.0,
    };
    (3.0 * k - 2.0 * d + (kb - k) * p) / (p - 1.0) - n_term + (s + kb).max(k)
}

/// `2^{α(λ−1)R} λ^{exponent}`.
pub fn selection_lhs(params: &ModelParams, alpha: f64, s: f64, r: f64, lambda: f64, dilation: Dilation) -> f64 {
    (alpha * (lambda - 1.0) * r).exp2() * lambda.powf(selection_exponent(params, s, dilation))
}

/// `(max{2C₀, 4C₁})^{−1/(p−1)} / (2 C C̃₁ ‖(u0, u1)‖)`.
pub fn selection_rhs(params: &ModelParams, data_norm: f64, constants: &FittedConstants) -> f64 {
    let p = params.p as f64;
    (2.0 * constants.c0).max(4.0 * constants.c1).powf(-1.0 / (p - 1.0))
        / (2.0 * constants.c * constants.c_tilde1 * data_norm)
}

/// Largest λ tried before giving up.
pub const LAMBDA_CAP: u32 = 1 << 16;

/// Smallest admissible λ: 2, raised to `⌈1/ε₀⌉` in the scale-invariant regime where
/// the scaled support `ε₀λ` must reach `R_λ = 1`.
pub fn min_lambda(params: &ModelParams, eps0: f64) -> u32 {
    match params.regime() {
        crate::kernels::Regime::ScaleInvariant => 2u32.max((1.0 / eps0).ceil() as u32),
        _ => 2,
    }
}

/// Smallest integer `λ >= min_lambda` satisfying the λ-selection inequality.
#[allow(clippy::too_many_arguments)]
pub fn select_lambda(
    data_norm: f64,
    params: &ModelParams,
    alpha: f64,
    s: f64,
    constants: &FittedConstants,
    eps0: f64,
    dilation: Dilation,
) -> Result<u32> {
    if alpha == 0.0 {
        return Err(Error::Inapplicable(
            "alpha = 0 has no exponential gain from scaling; use the small-data solver".into(),
        ));
    }
    if alpha > 0.0 {
        return Err(Error::Domain(format!("alpha = {alpha} must be negative")));
    }
    if !(data_norm > 0.0) {
        return Err(Error::Domain("data norm must be positive".into()));
    }
    let dx = derived_exponents(params, eps0)?;
    let rhs = selection_rhs(params, data_norm, constants);
    (min_lambda(params, eps0)..=LAMBDA_CAP)
        .find(|&l| selection_lhs(params, alpha, s, dx.r, l as f64, dilation) <= rhs)
        .ok_or_else(|| Error::Overflow(format!("no λ <= {LAMBDA_CAP} satisfies the selection inequality")))
}

/// `C̃₁`: largest `‖(u_{0,λ}, u_{1,λ})‖ / (λ^{2κ/(p−1)+max{s+κ̄,κ}} 2^{α(λ−1)R} ‖(u0, u1)‖)`
/// over the samples and λ values (periodic dilation).
pub fn fit_c_tilde1(
    samples: &[(SpectralField, SpectralField)],
    problem: &Problem,
    lambdas: &[u32],
) -> Result<f64> {
    let params = &problem.params;
    let dx = problem.derived()?;
    let (k, kb) = (params.kappa(), params.kappa_bar());
    let s = problem.norm.s;
    let mut best: f64 = 0.0;
    for (u0, u1) in samples {
        let base = problem.data_norm(u0, u1);
        if base == 0.0 {
            continue;
        }
        for &l in lambdas {
            let lf = l as f64;
            let (a, b) = scale_data(u0, u1, lf, params, Dilation::Periodic)?;
            let power = lf.powf(2.0 * k / (params.p as f64 - 1.0) + (s + kb).max(k));
            let decay = (problem.norm.alpha * (lf - 1.0) * dx.r).exp2();
            best = best.max(problem.data_norm(&a, &b) / (power * decay * base));
        }
    }
    Ok(best)
}

/// Scaled data ready for the small-data solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub lambda: u32,
    /// λ returned by the selection inequality before any smallness adjustment.
    pub selected_lambda: u32,
    pub manual: bool,
    pub scaled_u0: SpectralField,
    pub scaled_u1: SpectralField,
    pub nu: f64,
    /// Data budget `ν / (2C)`.
    pub epsilon: f64,
    pub scaled_norm: f64,
    pub r_lambda: f64,
    pub original_norm: f64,
    pub selection_lhs: f64,
    pub selection_rhs: f64,
    /// `rhs / lhs` at the chosen λ; at least 1 when the inequality holds.
    pub selection_margin: f64,
    /// Radius `λα` at which the descaled solution is measured.
    pub alpha0: f64,
    pub constants: FittedConstants,
}

/// Picks λ, scales the data and checks the scaled budget `‖data_λ‖ <= ν/(2C)`.
/// When the integer λ from the selection inequality misses the budget because
/// of the fitted constants, λ is raised until it is met.
pub fn plan_large_data(
    u0: &SpectralField,
    u1: &SpectralField,
    original: &Problem,
    constants: &FittedConstants,
    nu_fraction: f64,
    lambda_override: Option<u32>,
) -> Result<ScalingPlan> {
    let params = original.params;
    let alpha = original.norm.alpha;
    let s = original.norm.s;
    let dx = original.derived()?;
    if !u0.is_octant_supported(dx.r) || !u1.is_octant_supported(dx.r) {
        return Err(Error::Precondition(format!("data must be octant-supported with |ξ|_∞ >= R = {}", dx.r)));
    }
    let original_norm = original.data_norm(u0, u1);
    let selected = select_lambda(original_norm, &params, alpha, s, constants, original.eps0, Dilation::Periodic)?;
    let budget = |l: f64| nu_fraction * crate::propagator::nu_bound(&params, l, constants.c0, constants.c1) / (2.0 * constants.c);

    let (lambda, manual) = match lambda_override {
        Some(l) => {
            let min = min_lambda(&params, original.eps0);
            if l < min {
                return Err(Error::Config(format!("manual λ = {l} is below the admissible minimum {min}")));
            }
            (l, true)
        }
        None => {
            let mut l = selected;
            loop {
                let (a, b) = scale_data(u0, u1, l as f64, &params, Dilation::Periodic)?;
                let scaled = Problem { lambda: l as f64, ..*original };
                if scaled.data_norm(&a, &b) <= budget(l as f64) {
                    break;
                }
                if l >= LAMBDA_CAP {
                    return Err(Error::Overflow("scaled data never meets the ν budget".into()));
                }
                l += 1;
            }
            (l, false)
        }
    };
    let lf = lambda as f64;
    let (scaled_u0, scaled_u1) = scale_data(u0, u1, lf, &params, Dilation::Periodic)?;
    let scaled = Problem { lambda: lf, ..*original };
    let nu = nu_fraction * crate::propagator::nu_bound(&params, lf, constants.c0, constants.c1);
    let lhs = selection_lhs(&params, alpha, s, dx.r, lf, Dilation::Periodic);
    let rhs = selection_rhs(&params, original_norm, constants);
    Ok(ScalingPlan {
        lambda,
        selected_lambda: selected,
        manual,
        scaled_norm: scaled.data_norm(&scaled_u0, &scaled_u1),
        scaled_u0,
        scaled_u1,
        nu,
        epsilon: budget(lf),
        r_lambda: scaled.support_radius()?,
        original_norm,
        selection_lhs: lhs,
        selection_rhs: rhs,
        selection_margin: rhs / lhs,
        alpha0: lf * alpha,
        constants: constants.clone(),
    })
}

/// The solution mapped back to the original equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescaledSolution {
    pub lambda: f64,
    pub alpha0: f64,
    pub u0: SpectralField,
    pub u1: SpectralField,
    pub series: TimeSeries,
    pub dt_series: TimeSeries,
    pub l1_norm: f64,
    pub linf_norm: f64,
    /// `max_t ‖defect(t)‖_{ℓ²} / max_t ‖u(t)‖_{ℓ²}` in the original mild equation.
    pub residual: f64,
}

/// Descales `rec` and re-checks the mild equation at `λ = 1`.
pub fn descale_solution(rec: &SolutionRecord, lambda: f64, params: &ModelParams, alpha: f64) -> Result<DescaledSolution> {
    let series = descale_series(&rec.series, lambda, params, Dilation::Periodic, false)?;
    let dt_series = descale_series(&rec.dt_series, lambda, params, Dilation::Periodic, true)?;
    let u0 = series.fields[0].clone();
    let u1 = dt_series.fields[0].clone();
    let alpha0 = lambda * alpha;
    let (l1_norm, linf_norm) = regularity_pair(&series, params, alpha0, rec.problem.norm.s)?;

    let original = Problem { lambda: 1.0, norm: NormSpec { alpha, s: rec.problem.norm.s }, ..rec.problem };
    let r = original.derived()?.r;
    let mut defect = mild_defect_on(&original, r, &u0, &u1, &series)?;
    // Only modes whose dilation fits on the grid were resolved by the scaled run;
    // on octant data the remaining ones never feed back into them.
    let grid = series.grid();
    let l = lambda as i64;
    let resolved: Vec<bool> = (0..grid.len())
        .map(|i| grid.index_of(&grid.lattice(i)[..grid.n].iter().map(|m| m * l).collect::<Vec<_>>()).is_some())
        .collect();
    for f in &mut defect.fields {
        for (c, keep) in f.coeffs.iter_mut().zip(&resolved) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    let peak = |u: &TimeSeries| u.fields.iter().map(|f| f.coeff_norm_sq().sqrt()).fold(0.0, f64::max);
    let scale = peak(&series);
    let residual = if scale > 0.0 { peak(&defect) / scale } else { peak(&defect) };
    Ok(DescaledSolution { lambda, alpha0, u0, u1, series, dt_series, l1_norm, linf_norm, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::DEFAULT_EPS0;
    use crate::spectral::GridSpec;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn distributional_example_moves_and_shrinks() {
        let g = GridSpec::new(1, 1, 32).unwrap();
        let params = ModelParams::new(1.0, 0.0, 2, 1).unwrap();
        let u0 = SpectralField::single_mode(g, &[2], one()).unwrap();
        let z = SpectralField::zeros(g);
        let (a, b) = scale_data(&u0, &z, 3.0, &params, Dilation::Distributional).unwrap();
        let c = a.coeffs[g.index_of(&[6]).unwrap()];
        assert!((c.re - 1.0 / 3.0).abs() < 1e-15);
        assert!(b.is_zero());
        let (a, _) = scale_data(&u0, &z, 3.0, &params, Dilation::Periodic).unwrap();
        assert_eq!(a.coeffs[g.index_of(&[6]).unwrap()], one());
    }

    #[test]
    fn identity_and_errors() {
        let g = GridSpec::new(1, 1, 32).unwrap();
        let params = ModelParams::new(2.0, 0.5, 3, 1).unwrap();
        let u0 = SpectralField::single_mode(g, &[5], Complex64::new(0.3, -1.0)).unwrap();
        let (a, b) = scale_data(&u0, &u0, 1.0, &params, Dilation::Periodic).unwrap();
        assert_eq!(a, u0);
        assert_eq!(b, u0);
        assert!(matches!(scale_data(&u0, &u0, 2.5, &params, Dilation::Periodic), Err(Error::Unsupported(_))));
        assert!(matches!(scale_data(&u0, &u0, 4.0, &params, Dilation::Periodic), Err(Error::Overflow(_))));
    }

    #[test]
    fn descale_inverts_scale() {
        let g = GridSpec::new(2, 2, 16).unwrap();
        let params = ModelParams::new(2.0, 0.5, 2, 2).unwrap();
        let u0 = SpectralField::single_mode(g, &[1, 3], Complex64::new(0.7, 0.1)).unwrap();
        let u1 = SpectralField::single_mode(g, &[2, 2], Complex64::new(-0.2, 0.4)).unwrap();
        for dil in [Dilation::Periodic, Dilation::Distributional] {
            let (a, b) = scale_data(&u0, &u1, 3.0, &params, dil).unwrap();
            let (c, d) = descale_data(&a, &b, 3.0, &params, dil).unwrap();
            assert!(c.sub(&u0).coeffs.iter().all(|z| z.norm() < 1e-14));
            assert!(d.sub(&u1).coeffs.iter().all(|z| z.norm() < 1e-14));
        }
        let odd = SpectralField::single_mode(g, &[1, 2], one()).unwrap();
        assert!(matches!(contract_field(&odd, 2, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn scaling_ratio_is_one_at_lambda_one() {
        let g = GridSpec::new(1, 1, 32).unwrap();
        let phi = SpectralField::single_mode(g, &[1], one()).unwrap();
        let r = scaling_bound_ratio(&phi, 1.0, -1.0, 0.0, 1.0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert!(scaling_bound_ratio(&phi, 2.0, -1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn select_lambda_minimal_and_monotone() {
        let params = ModelParams::new(1.0, 0.0, 2, 1).unwrap();
        let k = FittedConstants::unit();
        assert_eq!(select_lambda(1e-6, &params, -1.0, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic).unwrap(), 2);
        let si = ModelParams::new(2.0, 1.0, 2, 1).unwrap();
        assert_eq!(select_lambda(1e-6, &si, -1.0, 0.0, &k, DEFAULT_EPS0, Dilation::Periodic).unwrap(), 4);
        let dx = derived_exponents(&params, DEFAULT_EPS0).unwrap();
        let d = 1.0;
        let l = select_lambda(d, &params, -1.0, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic).unwrap();
        let l_big = select_lambda(1000.0 * d, &params, -1.0, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic).unwrap();
        assert!(l_big > l);
        let rhs = selection_rhs(&params, 1000.0 * d, &k);
        assert!(selection_lhs(&params, -1.0, -1.5, dx.r, l_big as f64, Dilation::Periodic) <= rhs);
        assert!(selection_lhs(&params, -1.0, -1.5, dx.r, l_big as f64 - 1.0, Dilation::Periodic) > rhs);
        assert!(matches!(
            select_lambda(d, &params, 0.0, -1.5, &k, DEFAULT_EPS0, Dilation::Periodic),
            Err(Error::Inapplicable(_))
        ));
    }
}
