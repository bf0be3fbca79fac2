//! Exact per-mode stepping of `v'' + b v' + a v = g` with `g` linear on each step.
//!
//! Over one step of length `h` the state `y = (v, v')` obeys
//! `y(h) = E y(0) + W₀ g(0) + W₁ g(h)`, where `E` holds the kernels
//! `[[K0, K1], [∂tK0, ∂tK1]]` at `h` and `W₀, W₁` are the first and second
//! order exponential integrals of `(K1, ∂tK1)` against the hat functions. All
//! of them are read off one 4×4 matrix exponential of the augmented system
//! `(v, v', g, g')`, which stays accurate for stiff modes and for (near) double
//! roots alike.

use num_complex::Complex64;

type Mat4 = [[f64; 4]; 4];

/// One-step update coefficients for a single mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepWeights {
    pub e: [[f64; 2]; 2],
    pub w0: [f64; 2],
    pub w1: [f64; 2],
}

impl StepWeights {
    /// Weights for stiffness `a`, damping `b` and step `h`.
    pub fn new(a: f64, b: f64, h: f64) -> Self {
        let m: Mat4 = [
            [0.0, h, 0.0, 0.0],
            [-a * h, -b * h, h, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        // In the unit-step variable τ = s/h the forcing is g(0) + τ (g(h) − g(0)),
        // so the last state component is the increment g(h) − g(0).
        let x = expm4(&m);
        let e = [[x[0][0], x[0][1]], [x[1][0], x[1][1]]];
        let f = [x[0][2], x[1][2]];
        let gcol = [x[0][3], x[1][3]];
        StepWeights { e, w0: [f[0] - gcol[0], f[1] - gcol[1]], w1: gcol }
    }

    #[inline]
    pub fn apply(&self, y: [Complex64; 2], g0: Complex64, g1: Complex64) -> [Complex64; 2] {
        [
            y[0] * self.e[0][0] + y[1] * self.e[0][1] + g0 * self.w0[0] + g1 * self.w1[0],
            y[0] * self.e[1][0] + y[1] * self.e[1][1] + g0 * self.w0[1] + g1 * self.w1[1],
        ]
    }
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn norm1(a: &Mat4) -> f64 {
    (0..4).map(|j| (0..4).map(|i| a[i][j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-20 Taylor polynomial.
pub(crate) fn expm4(a: &Mat4) -> Mat4 {
    let norm = norm1(a);
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(squarings);
    let mut x = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            x[i][j] = a[i][j] * scale;
        }
    }
    let mut result = [[0.0; 4]; 4];
    let mut term = [[0.0; 4]; 4];
    for i in 0..4 {
        result[i][i] = 1.0;
        term[i][i] = 1.0;
    }
    for k in 1..=20 {
        term = matmul(&term, &x);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_eval, ModelParams};

    #[test]
    fn propagator_block_matches_closed_form_kernels() {
        for (s, d, lambda, r) in [(1.0, 0.0, 1.0, 1.0), (1.0, 1.0, 2.0, 9.0), (2.0, 1.0, 1.0, 3.0), (2.0, 0.5, 4.0, 5.0)] {
            let params = ModelParams::new(s, d, 2, 1).unwrap();
            let (a, b) = params.mode_coefficients(lambda, r);
            for h in [1e-3, 0.01, 0.1] {
                let w = StepWeights::new(a, b, h);
                let kv = kernel_eval(&params, lambda, r, h).unwrap();
                let scale = 1.0 + kv.k1.norm() + kv.dtk0.norm();
                assert!((kv.k0.re - w.e[0][0]).abs() < 1e-12 * scale);
                assert!((kv.k1.re - w.e[0][1]).abs() < 1e-12 * scale);
                assert!((kv.dtk0.re - w.e[1][0]).abs() < 1e-12 * scale * a.max(1.0));
                assert!((kv.dtk1.re - w.e[1][1]).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn constant_forcing_integrates_exactly() {
        // v'' = 1 (a = b = 0): v(h) = h²/2, v'(h) = h.
        let w = StepWeights::new(0.0, 0.0, 0.3);
        let one = Complex64::new(1.0, 0.0);
        let y = w.apply([Complex64::new(0.0, 0.0); 2], one, one);
        assert!((y[0].re - 0.045).abs() < 1e-15);
        assert!((y[1].re - 0.3).abs() < 1e-15);
    }

    #[test]
    fn linear_forcing_integrates_exactly() {
        // v'' = t: v(h) = h³/6, v'(h) = h²/2.
        let h = 0.7;
        let w = StepWeights::new(0.0, 0.0, h);
        let y = w.apply([Complex64::new(0.0, 0.0); 2], Complex64::new(0.0, 0.0), Complex64::new(h, 0.0));
        assert!((y[0].re - h * h * h / 6.0).abs() < 1e-15);
        assert!((y[1].re - h * h / 2.0).abs() < 1e-15);
    }
}
