//! Cube-weighted norms `E^α_s`, their mixed time-frequency versions
//! `L̃^γ(E^{α,s})`, Bernstein ratios and the p-linear product estimate.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{pointwise_product, CubeIndex, GridSpec, SpectralField};

/// Parameters `(α, s)` of the norm `(Σ_k (⟨k⟩^s 2^{α|k|} ‖□_k f‖_{L²})²)^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub alpha: f64,
    pub s: f64,
}

impl NormSpec {
    pub fn new(alpha: f64, s: f64) -> Result<Self> {
        if alpha > 0.0 {
            return Err(Error::Domain(format!("alpha = {alpha} must be <= 0")));
        }
        Ok(NormSpec { alpha, s })
    }

    pub fn shifted(&self, ds: f64) -> NormSpec {
        NormSpec { alpha: self.alpha, s: self.s + ds }
    }

    pub fn mixed(&self, gamma: f64) -> MixedNormSpec {
        MixedNormSpec { gamma, alpha: self.alpha, s: self.s, cube_set: None }
    }
}

/// Parameters `(γ, α, s)` and an optional cube restriction for `L̃^γ(E^{α,s})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub gamma: f64,
    pub alpha: f64,
    pub s: f64,
    pub cube_set: Option<BTreeSet<CubeIndex>>,
}

impl MixedNormSpec {
    pub fn new(gamma: f64, alpha: f64, s: f64) -> Result<Self> {
        if !(gamma >= 1.0) {
            return Err(Error::Domain(format!("gamma = {gamma} must be >= 1")));
        }
        if alpha > 0.0 {
            return Err(Error::Domain(format!("alpha = {alpha} must be <= 0")));
        }
        Ok(MixedNormSpec { gamma, alpha, s, cube_set: None })
    }

    pub fn restricted(mut self, cubes: BTreeSet<CubeIndex>) -> Self {
        self.cube_set = Some(cubes);
        self
    }
}

/// `⟨k⟩^s 2^{α|k|}`.
pub fn cube_weight(k: &CubeIndex, alpha: f64, s: f64) -> f64 {
    k.bracket().powf(s) * (alpha * k.norm()).exp2()
}

/// The `E^α_s` norm as an `ℓ²` sum over cubes.
pub fn e_norm(f: &SpectralField, spec: NormSpec) -> f64 {
    let norms = f.cube_norms_sq();
    norms
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(id, v)| {
            let w = cube_weight(&f.grid.cube_from_id(id), spec.alpha, spec.s);
            w * w * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Per-cube terms `(k, ⟨k⟩^s 2^{α|k|} ‖□_k f‖)` of the nonzero cubes.
pub fn e_norm_breakdown(f: &SpectralField, spec: NormSpec) -> Vec<(CubeIndex, f64)> {
    f.cube_norms_sq()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(id, v)| {
            let k = f.grid.cube_from_id(id);
            let w = cube_weight(&k, spec.alpha, spec.s);
            (k, w * v.sqrt())
        })
        .collect()
}

/// A field sampled on an increasing time grid starting at 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Domain("time series needs one field per time, at least one".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Domain("time series must start at t = 0".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        let grid = fields[0].grid;
        if fields.iter().any(|f| f.grid != grid) {
            return Err(Error::Domain("all fields of a series must share a grid".into()));
        }
        Ok(TimeSeries { times, fields })
    }

    /// Same field at every time.
    pub fn constant(times: Vec<f64>, f: &SpectralField) -> Result<Self> {
        let fields = vec![f.clone(); times.len()];
        Self::new(times, fields)
    }

    /// `f · profile(t)` at every time.
    pub fn separable(times: Vec<f64>, f: &SpectralField, profile: impl Fn(f64) -> f64) -> Result<Self> {
        let fields = times
            .iter()
            .map(|&t| f.scale(num_complex::Complex64::new(profile(t), 0.0)))
            .collect();
        Self::new(times, fields)
    }

    pub fn zeros(times: Vec<f64>, grid: GridSpec) -> Result<Self> {
        Self::constant(times, &SpectralField::zeros(grid))
    }

    pub fn grid(&self) -> GridSpec {
        self.fields[0].grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_final(&self) -> f64 {
        *self.times.last().expect("nonempty series")
    }

    pub fn sub(&self, other: &TimeSeries) -> TimeSeries {
        TimeSeries {
            times: self.times.clone(),
            fields: self.fields.iter().zip(&other.fields).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn add(&self, other: &TimeSeries) -> TimeSeries {
        TimeSeries {
            times: self.times.clone(),
            fields: self.fields.iter().zip(&other.fields).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// Samples with indices in `range`, with times shifted to start at 0.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<TimeSeries> {
        let t0 = self.times[range.start];
        let times = self.times[range.clone()].iter().map(|t| t - t0).collect();
        TimeSeries::new(times, self.fields[range].to_vec())
    }

    pub fn is_zero(&self) -> bool {
        self.fields.iter().all(|f| f.is_zero())
    }
}

/// Per-cube time norms `‖□_k u‖_{L^γ_t L²_x}` indexed by dense cube id.
pub fn cube_time_norms(u: &TimeSeries, gamma: f64) -> Vec<f64> {
    let per_time: Vec<Vec<f64>> = u.fields.par_iter().map(|f| f.cube_norms_sq()).collect();
    let cubes = u.grid().cube_count();
    let mut out = vec![0.0; cubes];
    for (id, slot) in out.iter_mut().enumerate() {
        if gamma.is_infinite() {
            *slot = per_time.iter().map(|v| v[id].sqrt()).fold(0.0, f64::max);
        } else if u.len() == 1 {
            *slot = 0.0;
        } else {
            let mut acc = 0.0;
            for i in 1..u.len() {
                let dt = u.times[i] - u.times[i - 1];
                let a = per_time[i - 1][id].sqrt().powf(gamma);
                let b = per_time[i][id].sqrt().powf(gamma);
                acc += 0.5 * dt * (a + b);
            }
            *slot = acc.powf(1.0 / gamma);
        }
    }
    out
}

/// `L̃^γ(E^{α,s})`: per-cube time norm (trapezoid, or sample max for `γ = ∞`), then the
/// weighted `ℓ²` sum over cubes, restricted to `cube_set` when given.
pub fn mixed_norm(u: &TimeSeries, spec: &MixedNormSpec) -> Result<f64> {
    if !(spec.gamma >= 1.0) {
        return Err(Error::Domain(format!("gamma = {} must be >= 1", spec.gamma)));
    }
    let grid = u.grid();
    let norms = cube_time_norms(u, spec.gamma);
    let mut acc = 0.0;
    for (id, v) in norms.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let k = grid.cube_from_id(id);
        if let Some(set) = &spec.cube_set {
            if !set.contains(&k) {
                continue;
            }
        }
        let w = cube_weight(&k, spec.alpha, spec.s);
        acc += (w * v).powi(2);
    }
    Ok(acc.sqrt())
}

/// `‖□_k f‖_{L^q} / ‖□_k f‖_{L^m}` on the torus (samples refined fourfold).
pub fn bernstein_ratio(f: &SpectralField, k: &CubeIndex, m: f64, q: f64) -> Result<f64> {
    if !(m > 1.0 && q >= m) {
        return Err(Error::Domain(format!("need 1 < m <= q, got m = {m}, q = {q}")));
    }
    let piece = f.decompose(k)?;
    if piece.is_zero() {
        return Err(Error::Domain(format!("□_k f vanishes for k = {k}; ratio undefined")));
    }
    if m == q {
        return Ok(1.0);
    }
    Ok(piece.lebesgue_norm(q, 4) / piece.lebesgue_norm(m, 4))
}

/// `n/2 − p/(p−1)·β_p`.
pub fn s_threshold_for_product(n: usize, p: usize, beta_p: f64) -> f64 {
    n as f64 / 2.0 - p as f64 / (p as f64 - 1.0) * beta_p
}

/// Outcome of one product-estimate evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductRatio {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Set when `lhs = rhs = 0`; `ratio` is then reported as 0.
    pub degenerate: bool,
}

/// Pointwise product of several series, time by time.
pub fn series_product(us: &[&TimeSeries]) -> Result<TimeSeries> {
    let first = us.first().ok_or_else(|| Error::Domain("empty product".into()))?;
    if us.iter().any(|u| u.times != first.times) {
        return Err(Error::Precondition("product factors use different time grids".into()));
    }
    let fields = (0..first.len())
        .into_par_iter()
        .map(|i| {
            let factors: Vec<&SpectralField> = us.iter().map(|u| &u.fields[i]).collect();
            pointwise_product(&factors)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(first.times.clone(), fields)
}

/// `‖u⁽¹⁾⋯u⁽ᵖ⁾‖_{L̃¹(E^{α,s})}` against `∏‖u⁽ʲ⁾‖_{L̃^p(E^{α,s+β_p})}`.
pub fn product_estimate_ratio(us: &[&TimeSeries], alpha: f64, s: f64, beta_p: f64) -> Result<ProductRatio> {
    let p = us.len();
    if p < 2 {
        return Err(Error::Domain("product estimate needs at least two factors".into()));
    }
    if beta_p < 0.0 {
        return Err(Error::Domain(format!("beta_p = {beta_p} must be >= 0")));
    }
    let n = us[0].grid().n;
    let threshold = s_threshold_for_product(n, p, beta_p);
    if s < threshold - 1e-12 {
        return Err(Error::Precondition(format!("s = {s} below the product threshold {threshold}")));
    }
    for (j, u) in us.iter().enumerate() {
        if u.fields.iter().any(|f| !f.is_octant_supported(0.0)) {
            return Err(Error::Precondition(format!("factor {j} is not octant-supported")));
        }
    }
    let product = series_product(us)?;
    let lhs = mixed_norm(&product, &MixedNormSpec { gamma: 1.0, alpha, s, cube_set: None })?;
    let mut rhs = 1.0;
    for u in us {
        rhs *= mixed_norm(u, &MixedNormSpec { gamma: p as f64, alpha, s: s + beta_p, cube_set: None })?;
    }
    if lhs == 0.0 {
        return Ok(ProductRatio { lhs, rhs, ratio: 0.0, degenerate: rhs == 0.0 });
    }
    Ok(ProductRatio { lhs, rhs, ratio: lhs / rhs, degenerate: false })
}

/// `max_k ⟨k⟩^{s−s₀} 2^{α|k|}` over the grid's cubes: the constant in
/// `‖f‖_{E^α_s} <= C ‖f‖_{H^{s₀}}` (cube form).
pub fn sobolev_containment_constant(grid: &GridSpec, alpha: f64, s: f64, s0: f64) -> f64 {
    (0..grid.cube_count())
        .map(|id| {
            let k = grid.cube_from_id(id);
            k.bracket().powf(s - s0) * (alpha * k.norm()).exp2()
        })
        .fold(0.0, f64::max)
}

/// Supremum over `|k⁽ᵖ⁾| <= radius` of
/// `Σ_{k⁽¹⁾..k⁽ᵖ⁻¹⁾ ∈ Z^n_{≥0}, |k⁽ʲ⁾| <= |k⁽ᵖ⁾|} ∏⟨k⁽ʲ⁾⟩^{−2(s+β)} · ⟨k⁽ᵖ⁾⟩^{−2β}`.
///
/// The inner sum factorizes into a power of a single lattice sum, evaluated by
/// sorting octant lattice points by length and accumulating.
pub fn s_sum(p: usize, n: usize, s: f64, beta: f64, radius: u64) -> f64 {
    let mut points: Vec<u64> = Vec::new();
    let r2 = radius * radius;
    let side = radius + 1;
    let total = side.pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut len2 = 0u64;
        for _ in 0..n {
            let c = rem % side;
            rem /= side;
            len2 += c * c;
        }
        if len2 <= r2 {
            points.push(len2);
        }
    }
    points.sort_unstable();
    let mut best: f64 = 0.0;
    let mut prefix = 0.0;
    let mut i = 0;
    while i < points.len() {
        let len2 = points[i];
        let bracket = (1.0 + len2 as f64).sqrt();
        let w = bracket.powf(-2.0 * (s + beta));
        let mut j = i;
        while j < points.len() && points[j] == len2 {
            prefix += w;
            j += 1;
        }
        let value = prefix.powi(p as i32 - 1) * bracket.powf(-2.0 * beta);
        best = best.max(value);
        i = j;
    }
    best
}

/// Convergence record of [`s_sum`] under radius doubling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SSumTrace {
    pub radii: Vec<u64>,
    pub values: Vec<f64>,
    /// Relative change across the last doubling.
    pub last_change: f64,
    /// Final over first value.
    pub growth: f64,
}

impl SSumTrace {
    pub fn stabilized(&self, tol: f64) -> bool {
        self.last_change < tol
    }
}

/// Evaluate [`s_sum`] at `r0, 2r0, …` up to `r_max`.
pub fn s_sum_trace(p: usize, n: usize, s: f64, beta: f64, r0: u64, r_max: u64) -> SSumTrace {
    let mut radii = Vec::new();
    let mut r = r0.max(1);
    while r <= r_max {
        radii.push(r);
        r *= 2;
    }
    let values: Vec<f64> = radii.par_iter().map(|&r| s_sum(p, n, s, beta, r)).collect();
    let last_change = match values.len() {
        0 | 1 => f64::INFINITY,
        l => (values[l - 1] - values[l - 2]).abs() / values[l - 2].abs().max(f64::MIN_POSITIVE),
    };
    let growth = values.last().copied().unwrap_or(0.0) / values.first().copied().unwrap_or(1.0);
    SSumTrace { radii, values, last_change, growth }
}
