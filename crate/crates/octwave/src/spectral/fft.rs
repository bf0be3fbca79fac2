//! Cached FFT plans and separable n-dimensional transforms.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn registry() -> &'static RwLock<HashMap<(usize, bool), Plan>> {
    static PLANS: OnceLock<RwLock<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    PLANS.get_or_init(|| RwLock::new(HashMap::new()))
}

fn plan(len: usize, inverse: bool) -> Plan {
    if let Some(p) = registry().read().expect("plan registry poisoned").get(&(len, inverse)) {
        return Arc::clone(p);
    }
    let mut guard = registry().write().expect("plan registry poisoned");
    let entry = guard.entry((len, inverse)).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    });
    Arc::clone(entry)
}

/// In-place unnormalized transform of a row-major `len^dim` array along every axis.
///
/// `inverse = false` computes `Σ_j x_j e^{-2πi jk/len}`, `inverse = true` the
/// conjugate-sign sum; neither scales the result.
pub fn transform_nd(data: &mut [Complex64], len: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), len.pow(dim as u32));
    let fft = plan(len, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if dim == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for axis in 0..dim {
        let stride = len.pow((dim - 1 - axis) as u32);
        let block = stride * len;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                if stride == 1 {
                    fft.process_with_scratch(&mut data[base..base + len], &mut scratch);
                    continue;
                }
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
    }
}
