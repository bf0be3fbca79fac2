//! Model parameters, damping regimes, characteristic roots and the Fourier
//! kernels of the linear propagator.
//!
//! For a frequency of size `r` and scaling parameter `λ`, every Fourier mode of
//! the linear problem solves
//!
//! ```text
//! v'' + b v' + a v = 0,   b = λ^{κ-2δ} r^{2δ},   a = λ^{2κ-2σ} r^{2σ}.
//! ```
//!
//! `K0` is the solution with `(v, v') = (1, 0)` at `t = 0`, `K1` the one with
//! `(0, 1)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents of the equation `∂t²u + (−Δ)^σ u + (−Δ)^δ ∂t u = u^p` in `n` dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub delta: f64,
    pub p: usize,
    pub n: usize,
}

impl ModelParams {
    pub fn new(sigma: f64, delta: f64, p: usize, n: usize) -> Result<Self> {
        let params = ModelParams { sigma, delta, p, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(0.0..=self.sigma).contains(&self.delta) {
            return Err(Error::Domain(format!(
                "delta = {} must lie in [0, sigma = {}]",
                self.delta, self.sigma
            )));
        }
        if self.p < 2 {
            return Err(Error::Domain(format!("p = {} must be at least 2", self.p)));
        }
        if !(1..=3).contains(&self.n) {
            return Err(Error::Domain(format!("n = {} must be 1, 2 or 3", self.n)));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        (2.0 * self.delta).min(self.sigma)
    }

    pub fn kappa_bar(&self) -> f64 {
        (2.0 * self.delta).max(self.sigma)
    }

    pub fn regime(&self) -> Regime {
        let gap = self.delta - self.sigma / 2.0;
        if gap.abs() <= 1e-12 * self.sigma.max(1.0) {
            Regime::ScaleInvariant
        } else if gap < 0.0 {
            Regime::Effective
        } else {
            Regime::NonEffective
        }
    }

    /// Damping and stiffness coefficients `(a, b)` of the mode ODE.
    pub fn mode_coefficients(&self, lambda: f64, r: f64) -> (f64, f64) {
        let k = self.kappa();
        let a = lambda.powf(2.0 * k - 2.0 * self.sigma) * r.powf(2.0 * self.sigma);
        let b = lambda.powf(k - 2.0 * self.delta) * r.powf(2.0 * self.delta);
        (a, b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Effective,
    ScaleInvariant,
    NonEffective,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Effective => "effective",
            Regime::ScaleInvariant => "scale_invariant",
            Regime::NonEffective => "non_effective",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s {
            "effective" => Some(Regime::Effective),
            "scale_invariant" => Some(Regime::ScaleInvariant),
            "non_effective" => Some(Regime::NonEffective),
            _ => None,
        }
    }
}

/// Quantities derived from [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub kappa: f64,
    pub kappa_bar: f64,
    pub regime: Regime,
    /// Support threshold `R` at `λ = 1`.
    pub r: f64,
    /// Smallest admissible regularity index.
    pub s_min: f64,
}

pub const DEFAULT_EPS0: f64 = 0.25;

pub fn derived_exponents(params: &ModelParams, eps0: f64) -> Result<DerivedExponents> {
    params.validate()?;
    if !(eps0 > 0.0) {
        return Err(Error::Domain(format!("eps0 = {eps0} must be positive")));
    }
    let (s, d) = (params.sigma, params.delta);
    let kappa = params.kappa();
    let kappa_bar = params.kappa_bar();
    let regime = params.regime();
    let r = match regime {
        Regime::Effective => 3f64.powf(-1.0 / (2.0 * s - 4.0 * d)),
        Regime::ScaleInvariant => eps0,
        Regime::NonEffective => 5f64.powf(1.0 / (4.0 * d - 2.0 * s)),
    };
    let p = params.p as f64;
    let s_min = params.n as f64 / 2.0 - (2.0 * kappa + kappa_bar - 2.0 * d) / (p - 1.0) - kappa_bar;
    Ok(DerivedExponents { kappa, kappa_bar, regime, r, s_min })
}

/// `R_λ`: the support threshold of the `λ`-scaled problem.
pub fn r_lambda(dx: &DerivedExponents, lambda: f64) -> f64 {
    match dx.regime {
        Regime::ScaleInvariant => 1.0,
        _ => dx.r * lambda,
    }
}

/// Roots `(μ₊, μ₋)` of `μ² + bμ + a = 0`; `μ₊` has the larger real part
/// (ties broken toward nonnegative imaginary part).
pub fn characteristic_roots(params: &ModelParams, lambda: f64, r: f64) -> Result<(Complex64, Complex64)> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("frequency r = {r} must be positive")));
    }
    let (a, b) = params.mode_coefficients(lambda, r);
    Ok(roots_of(a, b))
}

fn roots_of(a: f64, b: f64) -> (Complex64, Complex64) {
    let disc = Complex64::new(b * b - 4.0 * a, 0.0).sqrt();
    // q = -(b + sqrt(disc))/2 has no cancellation since b >= 0 and Re sqrt >= 0.
    let q = -(Complex64::new(b, 0.0) + disc) / 2.0;
    let other = if q.norm() > 0.0 { Complex64::new(a, 0.0) / q } else { Complex64::new(0.0, 0.0) };
    order_roots(q, other)
}

fn order_roots(x: Complex64, y: Complex64) -> (Complex64, Complex64) {
    let tie = (x.re - y.re).abs() <= 1e-14 * x.norm().max(y.norm());
    if tie {
        if x.im >= y.im {
            (x, y)
        } else {
            (y, x)
        }
    } else if x.re > y.re {
        (x, y)
    } else {
        (y, x)
    }
}

/// The four propagator kernels at one `(λ, r, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub k0: Complex64,
    pub k1: Complex64,
    pub dtk0: Complex64,
    pub dtk1: Complex64,
}

impl KernelValue {
    pub fn initial() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        KernelValue { k0: one, k1: zero, dtk0: zero, dtk1: one }
    }

    pub fn get(&self, which: Which) -> Complex64 {
        match which {
            Which::K0 => self.k0,
            Which::K1 => self.k1,
            Which::DtK0 => self.dtk0,
            Which::DtK1 => self.dtk1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    K0,
    K1,
    DtK0,
    DtK1,
}

impl Which {
    pub const ALL: [Which; 4] = [Which::K0, Which::K1, Which::DtK0, Which::DtK1];

    pub fn name(&self) -> &'static str {
        match self {
            Which::K0 => "K0",
            Which::K1 => "K1",
            Which::DtK0 => "dtK0",
            Which::DtK1 => "dtK1",
        }
    }
}

/// Below this `|μ₊ − μ₋|·t/2` the quotient formulas are replaced by power series.
const SERIES_SWITCH: f64 = 0.1;

/// Closed-form kernels built from the characteristic roots.
pub fn kernel_eval(params: &ModelParams, lambda: f64, r: f64, t: f64) -> Result<KernelValue> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    let (mp, mm) = characteristic_roots(params, lambda, r)?;
    if t == 0.0 {
        return Ok(KernelValue::initial());
    }
    let (a, _) = params.mode_coefficients(lambda, r);
    Ok(kernels_from_roots(a, mp, mm, t))
}

/// Kernels for the ODE with roots `μ±` and `a = μ₊μ₋`.
pub(crate) fn kernels_from_roots(a: f64, mp: Complex64, mm: Complex64, t: f64) -> KernelValue {
    let d = mp - mm;
    let half = d * (t / 2.0);
    let (k0, k1, dtk1);
    if half.norm() < SERIES_SWITCH || d.norm() < 1e-6 * mp.norm() {
        // μ± = m ± d/2: K1 = t e^{mt} sinh(dt/2)/(dt/2), K0 = e^{mt}(cosh(dt/2) − m t sinhc).
        let mid = (mp + mm) / 2.0;
        let e = (mid * t).exp();
        let (ch, shc) = cosh_sinhc(half);
        k1 = e * shc * t;
        k0 = e * (ch - mid * t * shc);
        // dtK1 = e^{mt}(cosh + m t sinhc)
        dtk1 = e * (ch + mid * t * shc);
    } else {
        let ep = (mp * t).exp();
        let em = (mm * t).exp();
        k1 = (ep - em) / d;
        k0 = (mp * em - mm * ep) / d;
        dtk1 = (mp * ep - mm * em) / d;
    }
    KernelValue { k0, k1, dtk0: -k1 * a, dtk1 }
}

/// `(cosh z, sinh z / z)` by their Taylor series, accurate for `|z| <= 0.1`.
fn cosh_sinhc(z: Complex64) -> (Complex64, Complex64) {
    let z2 = z * z;
    let mut term_c = Complex64::new(1.0, 0.0);
    let mut term_s = Complex64::new(1.0, 0.0);
    let mut ch = term_c;
    let mut shc = term_s;
    for k in 1..12 {
        let kk = k as f64;
        term_c *= z2 / ((2.0 * kk - 1.0) * (2.0 * kk));
        term_s *= z2 / ((2.0 * kk) * (2.0 * kk + 1.0));
        ch += term_c;
        shc += term_s;
    }
    (ch, shc)
}

/// The printed closed form in the scale-invariant regime (`δ = σ/2`):
/// `K0 = [cos(√3/2 ρ t) + sin(√3/2 ρ t)/√3] e^{−ρt/2}` and
/// `K1 = (2/√3) sin(√3/2 ρ t) ρ^{−1} e^{−ρt/2}` with `ρ = r^{2δ}`.
pub fn scale_invariant_closed_form(delta: f64, r: f64, t: f64) -> (f64, f64) {
    let rho = r.powf(2.0 * delta);
    let w = 3f64.sqrt() / 2.0 * rho * t;
    let decay = (-rho * t / 2.0).exp();
    let k0 = (w.cos() + w.sin() / 3f64.sqrt()) * decay;
    let k1 = 2.0 / 3f64.sqrt() * w.sin() / rho * decay;
    (k0, k1)
}

/// Initial data for [`ode_oracle`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCondition {
    Position,
    Velocity,
}

/// Tolerance on the relative local error per accepted oracle step.
pub const ORACLE_LOCAL_TOL: f64 = 1e-14;

/// Numerically integrated mode state `(v(t), v'(t))` from canonical data.
///
/// Uses the three-stage Radau IIA collocation method (order 5, L-stable) with
/// step-doubling error control, so stiff non-effective modes do not force tiny
/// steps once their fast component has decayed.
pub fn ode_oracle_state(
    params: &ModelParams,
    lambda: f64,
    r: f64,
    t: f64,
    ic: InitialCondition,
) -> Result<[Complex64; 2]> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time t = {t} must be nonnegative")));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("frequency r = {r} must be positive")));
    }
    let (a, b) = params.mode_coefficients(lambda, r);
    let mut y = match ic {
        InitialCondition::Position => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        InitialCondition::Velocity => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    };
    if t == 0.0 {
        return Ok(y);
    }
    let scale = 1.0 + b + a.sqrt();
    let mut h = (1e-3 / scale).min(t);
    let mut now = 0.0;
    let mut steps = 0usize;
    while now < t {
        if t - now < h {
            h = t - now;
        }
        let full = radau_step(a, b, h, y);
        let half = radau_step(a, b, h / 2.0, y);
        let twice = radau_step(a, b, h / 2.0, half);
        let size = norm2(&twice).max(1e-300);
        let diff = [twice[0] - full[0], twice[1] - full[1]];
        let err = norm2(&diff) / 31.0 / size;
        if err <= ORACLE_LOCAL_TOL || h <= 1e-15 * t {
            if h <= 1e-15 * t && err > ORACLE_LOCAL_TOL {
                return Err(Error::Oracle(format!(
                    "step size underflow at t = {now} (a = {a}, b = {b})"
                )));
            }
            y = twice;
            now += h;
            steps += 1;
            if steps > 50_000_000 {
                return Err(Error::Oracle("step budget exhausted".into()));
            }
        }
        let factor = if err == 0.0 { 4.0 } else { (0.9 * (ORACLE_LOCAL_TOL / err).powf(1.0 / 6.0)).clamp(0.2, 4.0) };
        h *= factor;
    }
    Ok(y)
}

/// Mode value `v(t)` from [`ode_oracle_state`].
pub fn ode_oracle(params: &ModelParams, lambda: f64, r: f64, t: f64, ic: InitialCondition) -> Result<Complex64> {
    Ok(ode_oracle_state(params, lambda, r, t, ic)?[0])
}

fn norm2(v: &[Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

/// One Radau IIA step for `y' = J y`, `J = [[0, 1], [−a, −b]]`.
fn radau_step(a: f64, b: f64, h: f64, y: [Complex64; 2]) -> [Complex64; 2] {
    let s6 = 6f64.sqrt();
    let coef = [
        [(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0],
        [(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0],
        [(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
    ];
    let jac = [[0.0, 1.0], [-a, -b]];
    // Stage system (I − h A⊗J) Y = 1⊗y, unknowns ordered (stage, component).
    let mut m = [[Complex64::new(0.0, 0.0); 7]; 6];
    for i in 0..3 {
        for ci in 0..2 {
            let row = 2 * i + ci;
            for j in 0..3 {
                for cj in 0..2 {
                    let col = 2 * j + cj;
                    let id = if row == col { 1.0 } else { 0.0 };
                    m[row][col] = Complex64::new(id - h * coef[i][j] * jac[ci][cj], 0.0);
                }
            }
            m[row][6] = y[ci];
        }
    }
    let sol = solve6(m);
    [sol[4], sol[5]]
}

/// Gaussian elimination with partial pivoting on an augmented 6×7 system.
fn solve6(mut m: [[Complex64; 7]; 6]) -> [Complex64; 6] {
    for col in 0..6 {
        let piv = (col..6)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .expect("nonempty");
        m.swap(col, piv);
        let p = m[col][col];
        for row in col + 1..6 {
            let f = m[row][col] / p;
            if f.norm() == 0.0 {
                continue;
            }
            for k in col..7 {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 6];
    for row in (0..6).rev() {
        let mut acc = m[row][6];
        for k in row + 1..6 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Per-regime coefficient of the high-frequency decay exponent.
fn decay_coefficient(regime: Regime) -> f64 {
    match regime {
        Regime::Effective | Regime::ScaleInvariant => 0.5,
        Regime::NonEffective => 1.0,
    }
}

/// Default decay constant `c = ¼·min{1, coefficient}` for the pointwise bounds.
pub fn default_decay_constant(params: &ModelParams) -> f64 {
    0.25 * decay_coefficient(params.regime()).min(1.0)
}

/// Exact per-regime exponential rate: `|Re μ₊| >= rate · λ^{2δ−κ} r^{2κ−2δ}` for `r >= R_λ`.
pub fn kernel_decay_rate(params: &ModelParams) -> f64 {
    decay_coefficient(params.regime())
}

/// Rate in the exponent `λ^{2δ−κ} r^{2κ−2δ}` at a given frequency, without the constant.
pub fn decay_exponent(params: &ModelParams, lambda: f64, r: f64) -> f64 {
    let k = params.kappa();
    lambda.powf(2.0 * params.delta - k) * r.powf(2.0 * k - 2.0 * params.delta)
}

/// `log` of the λ- and r-power in the majorant of `which`.
fn majorant_log_power(params: &ModelParams, lambda: f64, r: f64, which: Which) -> f64 {
    let (s, d) = (params.sigma, params.delta);
    let (k, kb) = (params.kappa(), params.kappa_bar());
    let (lp, rp) = match which {
        Which::K0 => (0.0, 0.0),
        Which::DtK0 => (2.0 * d - s, 2.0 * s - kb),
        Which::K1 => (kb - k, -kb),
        Which::DtK1 => (0.0, 0.0),
    };
    lp * lambda.ln() + rp * r.ln()
}

/// `|∂t^j K| / (λ-power · r-power · e^{−c λ^{2δ−κ} r^{2κ−2δ} t})` for `r >= R_λ`.
pub fn pointwise_bound_ratio(
    params: &ModelParams,
    dx: &DerivedExponents,
    lambda: f64,
    r: f64,
    t: f64,
    which: Which,
    c: f64,
) -> Result<f64> {
    let rl = r_lambda(dx, lambda);
    if r < rl * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!(
            "pointwise bounds are claimed only for r >= R_λ = {rl}, got r = {r}"
        )));
    }
    let kv = kernel_eval(params, lambda, r, t)?;
    let value = kv.get(which).norm();
    if value == 0.0 {
        return Ok(0.0);
    }
    let log_major = majorant_log_power(params, lambda, r, which) - c * decay_exponent(params, lambda, r) * t;
    Ok((value.ln() - log_major).exp())
}

/// Low-frequency majorant selection for [`low_frequency_bound_ratio`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowFrequency {
    /// `|K0| ≲ e^{−c r^{2κ̄−2δ} t}`.
    K0,
    /// `|K1| ≲ min{r^{−κ}, t} e^{−c r^{2κ̄−2δ} t}`.
    K1,
    /// `|K1| ≲ r^{−κ} e^{−c r^{2κ̄−2δ} t}`.
    K1Power,
    /// `|K1| ≲ t e^{−c r^{2κ̄−2δ} t}`.
    K1Time,
}

/// Radius below which the low-frequency bounds are checked: half the radius where the
/// `λ = 1` discriminant `r^{4δ} − 4 r^{2σ}` changes sign (`1/2` when it never does).
pub fn default_eps2(params: &ModelParams) -> f64 {
    let (s, d) = (params.sigma, params.delta);
    match params.regime() {
        Regime::ScaleInvariant => 0.5,
        _ => 0.5 * 4f64.powf(-1.0 / (2.0 * s - 4.0 * d)),
    }
}

/// Default low-frequency decay constant: `¼·min{1, coefficient}` with the exact
/// low-frequency coefficient (1 when overdamped, 1/2 when oscillatory).
pub fn default_low_frequency_constant(params: &ModelParams) -> f64 {
    match params.regime() {
        Regime::Effective => 0.25,
        _ => 0.125,
    }
}

/// Ratio against the low-frequency majorant at `λ = 1`, for `0 < r <= eps2`.
pub fn low_frequency_bound_ratio(
    params: &ModelParams,
    r: f64,
    t: f64,
    which: LowFrequency,
    c: f64,
    eps2: f64,
) -> Result<f64> {
    if !(r > 0.0) || r > eps2 {
        return Err(Error::Precondition(format!(
            "low-frequency bounds need 0 < r <= eps2 = {eps2}, got r = {r}"
        )));
    }
    let kv = kernel_eval(params, 1.0, r, t)?;
    let expo = -c * r.powf(2.0 * params.kappa_bar() - 2.0 * params.delta) * t;
    let power = r.powf(-params.kappa());
    let (value, prefactor) = match which {
        LowFrequency::K0 => (kv.k0.norm(), 1.0),
        LowFrequency::K1 => (kv.k1.norm(), power.min(t)),
        LowFrequency::K1Power => (kv.k1.norm(), power),
        LowFrequency::K1Time => (kv.k1.norm(), t),
    };
    if value == 0.0 {
        return Ok(0.0);
    }
    Ok((value.ln() - prefactor.ln() - expo).exp())
}

/// One row of a kernel sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub sigma: f64,
    pub delta: f64,
    pub lambda: f64,
    pub r: f64,
    pub t: f64,
    pub which: String,
    pub value_re: f64,
    pub value_im: f64,
    pub ratio: f64,
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Kernel values and bound ratios for `r ∈ [R_λ, 8R_λ]` log-spaced and the given times.
pub fn kernel_sweep(
    params: &ModelParams,
    dx: &DerivedExponents,
    lambdas: &[f64],
    r_points: usize,
    times: &[f64],
    c: f64,
) -> Result<Vec<KernelRow>> {
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let rl = r_lambda(dx, lambda);
        for r in log_space(rl, 8.0 * rl, r_points) {
            for &t in times {
                let kv = kernel_eval(params, lambda, r, t)?;
                for which in Which::ALL {
                    let v = kv.get(which);
                    rows.push(KernelRow {
                        sigma: params.sigma,
                        delta: params.delta,
                        lambda,
                        r,
                        t,
                        which: which.name().to_string(),
                        value_re: v.re,
                        value_im: v.im,
                        ratio: pointwise_bound_ratio(params, dx, lambda, r, t, which, c)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
