//! Product estimate, lattice-sum convergence, almost-orthogonality of products and the
//! Bernstein inequality on single cubes.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{drift, suite_rng, Case, SuiteReport};
use crate::error::Result;
use crate::norms::{bernstein_ratio, product_estimate_ratio, s_sum_trace, s_threshold_for_product, TimeSeries};
use crate::spectral::{pointwise_product, CubeIndex, GridSpec, SpectralField};

const PRODUCT_K: usize = 16;
const PRODUCT_TIMES: usize = 17;
pub const PRODUCT_INSTANCES: usize = 100;
pub const REFINEMENT_FACTOR: f64 = 2.0;

fn unit_random(grid: GridSpec, cubes: &[CubeIndex], rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    let f = SpectralField::random_on_cubes(grid, cubes, rng)?;
    let norm = f.l2_norm();
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Random octant series: a unit field on one or two of the lowest cubes times a
/// decaying exponential profile.
fn random_octant_series(grid: GridSpec, rng: &mut ChaCha8Rng) -> Result<TimeSeries> {
    let count = rng.gen_range(1..=2);
    let mut cubes: Vec<CubeIndex> = Vec::new();
    while cubes.len() < count {
        let k = CubeIndex((0..grid.n).map(|_| rng.gen_range(0..(PRODUCT_K / 4) as i64)).collect());
        if !cubes.contains(&k) {
            cubes.push(k);
        }
    }
    let f = unit_random(grid, &cubes, rng)?;
    let rate: f64 = rng.gen_range(0.0..2.0);
    let times: Vec<f64> = (0..PRODUCT_TIMES).map(|i| 2.0 * i as f64 / (PRODUCT_TIMES - 1) as f64).collect();
    TimeSeries::separable(times, &f, move |t| (-rate * t).exp())
}

/// Largest product ratio over seeded instances at `(n, p) = (1, 2)` on a grid with `m`
/// points per cube.
fn max_product_ratio(m: usize, alpha: f64, beta: f64, instances: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = GridSpec::new(1, m, PRODUCT_K)?;
    let s = s_threshold_for_product(1, 2, beta);
    let mut best: f64 = 0.0;
    for _ in 0..instances {
        let u = random_octant_series(grid, rng)?;
        let v = random_octant_series(grid, rng)?;
        best = best.max(product_estimate_ratio(&[&u, &v], alpha, s, beta)?.ratio);
    }
    Ok(best)
}

/// Direct convolution of two coefficient arrays on the lattice, dropping products
/// that leave the grid.
fn direct_convolution(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let grid = a.grid;
    let mut out = SpectralField::zeros(grid);
    for i in 0..grid.len() {
        if a.coeffs[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mi = grid.lattice(i);
        for j in 0..grid.len() {
            if b.coeffs[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mj = grid.lattice(j);
            let m: Vec<i64> = (0..grid.n).map(|d| mi[d] + mj[d]).collect();
            if let Some(idx) = grid.index_of(&m) {
                out.coeffs[idx] += a.coeffs[i] * b.coeffs[j];
            }
        }
    }
    out
}

pub fn product(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("product", "power-nonlinearity estimate with a flexible parameter, and its lattice sum", seed);
    let alpha = -1.0;

    for (beta, instances) in [(1.0, PRODUCT_INSTANCES), (0.0, 30), (2.0, 30)] {
        let mut rng4 = suite_rng(seed, 40 + beta as u64);
        let mut rng8 = suite_rng(seed, 80 + beta as u64);
        let c4 = max_product_ratio(4, alpha, beta, instances, &mut rng4)?;
        let c8 = max_product_ratio(8, alpha, beta, instances, &mut rng8)?;
        report.constant(&format!("beta{beta}.M4"), c4);
        report.constant(&format!("beta{beta}.M8"), c8);
        let change = (c4 / c8).max(c8 / c4);
        report.push(
            Case::at_most(&format!("beta = {beta}: max ratio change under M 4 -> 8"), change, REFINEMENT_FACTOR)
                .with("beta_p", beta)
                .with("s", s_threshold_for_product(1, 2, beta))
                .with("alpha", alpha)
                .with("instances", instances)
                .with("max_ratio_m4", c4)
                .with("max_ratio_m8", c8),
        );
    }

    let mut rng = suite_rng(seed, 1);
    let grid = GridSpec::new(1, 4, PRODUCT_K)?;
    let u = random_octant_series(grid, &mut rng)?;
    let zero = TimeSeries::zeros(u.times.clone(), grid)?;
    let z = product_estimate_ratio(&[&u, &zero], alpha, -1.5, 1.0)?;
    report.push(Case::at_most("zero factor gives zero", z.lhs, 0.0).with("degenerate", z.degenerate));

    let tiny = GridSpec::new(1, 4, 8)?;
    let a = unit_random(tiny, &[CubeIndex::new(&[1])], &mut rng)?;
    let b = unit_random(tiny, &[CubeIndex::new(&[2])], &mut rng)?;
    let fft = pointwise_product(&[&a, &b])?;
    let direct = direct_convolution(&a, &b);
    let err = fft.sub(&direct).coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let scale = direct.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    report.push(Case::at_most("two-cube product vs direct convolution", err / scale, 1e-12).with("cubes", "[1] x [2]"));

    let mut off = SpectralField::random_on_cubes(grid, &[CubeIndex::new(&[-1]), CubeIndex::new(&[1])], &mut rng)?;
    off = off.scale(Complex64::new(1.0 / off.l2_norm(), 0.0));
    let w = TimeSeries::separable(u.times.clone(), &off, |t| (-t).exp())?;
    report.push(Case::rejection("non-octant factor rejected", product_estimate_ratio(&[&u, &w], alpha, -1.5, 1.0)));
    report.push(
        Case::rejection("s below threshold rejected", product_estimate_ratio(&[&u, &u], alpha, -1.6, 1.0))
            .with("s", -1.6)
            .with("threshold", -1.5),
    );

    // Lattice sum at (n, p, β) = (1, 2, 1): the threshold lies at −1.5 and the
    // transitions at n/2 − β = −0.5 and n/2 = 0.5.
    let (n, p, beta) = (1usize, 2usize, 1.0);
    let threshold = s_threshold_for_product(n, p, beta);
    for (label, s) in [
        ("at threshold, below n/2 - beta", threshold),
        ("at n/2 - beta", 0.5 - beta),
        ("between n/2 - beta and n/2", 0.0),
        ("at n/2", 0.5),
        ("above n/2", 1.0),
    ] {
        let trace = s_sum_trace(p, n, s, beta, 16, 1 << 16);
        report.constant(&format!("s_sum.s{s}"), *trace.values.last().expect("nonempty"));
        report.push(
            Case::at_most(&format!("lattice sum stabilizes {label}"), trace.last_change, 0.01)
                .with("s", s)
                .with("beta_p", beta)
                .with("max_radius", *trace.radii.last().expect("nonempty")),
        );
    }
    let s_below = s_threshold_for_product(n, p, 0.0) - 0.25;
    let trace = s_sum_trace(p, n, s_below, 0.0, 1, 1 << 16);
    report.push(
        Case::at_most("lattice sum below threshold with beta = 0", trace.growth, 10.0)
            .negative()
            .with("s", s_below)
            .with("beta_p", 0.0)
            .with("max_radius", *trace.radii.last().expect("nonempty")),
    );
    Ok(report.finish())
}

pub const ORTHOGONALITY_TOL: f64 = 1e-12;
const ORTHO_TUPLES: usize = 50;

/// Largest cube norms of a product outside and inside the window `|k − Σk⁽ʲ⁾|_∞ <= p+1`.
fn window_norms(product: &SpectralField, centre: &CubeIndex, p: usize) -> Result<(f64, f64)> {
    let grid = product.grid;
    let (mut outside, mut inside): (f64, f64) = (0.0, 0.0);
    for id in 0..grid.cube_count() {
        let k = grid.cube_from_id(id);
        let v = product.decompose(&k)?.l2_norm();
        if k.sup_distance(centre) > p as i64 + 1 {
            outside = outside.max(v);
        } else {
            inside = inside.max(v);
        }
    }
    Ok((outside, inside))
}

pub fn orthogonality(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("orthogonality", "almost-orthogonality of cube products and the Bernstein inequality", seed);
    let mut rng = suite_rng(seed, 2);
    let (mut worst, mut worst_inputs) = (0.0f64, (0usize, 0usize, String::new()));
    let mut nonzero_inside = 0usize;
    for i in 0..ORTHO_TUPLES {
        let p = 2 + i % 2;
        let n = 1 + (i / 2) % 2;
        let grid = if n == 1 { GridSpec::new(1, 4, 16)? } else { GridSpec::new(2, 2, 16)? };
        let cubes: Vec<CubeIndex> =
            (0..p).map(|_| CubeIndex((0..n).map(|_| rng.gen_range(-2i64..=2)).collect())).collect();
        let fields: Vec<SpectralField> =
            cubes.iter().map(|k| unit_random(grid, std::slice::from_ref(k), &mut rng)).collect::<Result<_>>()?;
        let refs: Vec<&SpectralField> = fields.iter().collect();
        let prod = pointwise_product(&refs)?;
        let centre = cubes[1..].iter().fold(cubes[0].clone(), |acc, k| acc.add(k));
        let (outside, inside) = window_norms(&prod, &centre, p)?;
        if inside > 1e-6 {
            nonzero_inside += 1;
        }
        if outside >= worst {
            worst = outside;
            worst_inputs = (p, n, format!("{cubes:?}"));
        }
    }
    report.push(
        Case::at_most("cube norms outside the window", worst, ORTHOGONALITY_TOL)
            .with("tuples", ORTHO_TUPLES)
            .with("worst_p", worst_inputs.0)
            .with("worst_n", worst_inputs.1)
            .with("worst_cubes", worst_inputs.2),
    );
    report.push(Case::at_least("tuples with nonzero inside-window cubes", nonzero_inside as f64, 1.0));

    // Without padding the product of two high cubes wraps around the lattice.
    let grid = GridSpec::new(1, 4, 16)?;
    let k = CubeIndex::new(&[6]);
    let a = unit_random(grid, std::slice::from_ref(&k), &mut rng)?;
    let b = unit_random(grid, std::slice::from_ref(&k), &mut rng)?;
    let mut samples = a.to_physical(1);
    for (x, y) in samples.iter_mut().zip(b.to_physical(1)) {
        *x *= y;
    }
    let aliased = SpectralField::from_physical(grid, samples, 1);
    let (outside, _) = window_norms(&aliased, &k.add(&k), 2)?;
    report.push(
        Case::at_most("unpadded product aliases outside the window", outside, ORTHOGONALITY_TOL)
            .negative()
            .with("cubes", "[6] x [6]")
            .with("padding", 1),
    );
    report.push(Case::rejection("padding below requirement rejected", a.pointwise_power_padded(3, 1)));

    for (n, grid, ks) in [
        (1usize, GridSpec::new(1, 4, 16)?, (-8i64..8).map(|k| CubeIndex::new(&[k])).collect::<Vec<_>>()),
        (2usize, GridSpec::new(2, 4, 8)?, (-4i64..4).flat_map(|a| (-4i64..4).map(move |b| CubeIndex::new(&[a, b]))).collect()),
    ] {
        let m_pts = (grid.m as f64).powi(n as i32);
        let bound_inf = (m_pts / grid.box_measure()).sqrt();
        let mut ratios = Vec::new();
        let mut worst_inf: f64 = 0.0;
        let mut worst_four: f64 = 0.0;
        let pattern = unit_random(grid, std::slice::from_ref(&ks[0]), &mut rng)?;
        let base = grid.cube_points(&ks[0])?;
        for k in &ks {
            let f = unit_random(grid, std::slice::from_ref(k), &mut rng)?;
            worst_inf = worst_inf.max(bernstein_ratio(&f, k, 2.0, f64::INFINITY)? / bound_inf);
            worst_four = worst_four.max(bernstein_ratio(&f, k, 2.0, 4.0)? / bound_inf.sqrt());
            let mut moved = SpectralField::zeros(grid);
            for (src, dst) in base.iter().zip(grid.cube_points(k)?) {
                moved.coeffs[dst] = pattern.coeffs[*src];
            }
            ratios.push(bernstein_ratio(&moved, k, 2.0, f64::INFINITY)?);
        }
        report.constant(&format!("bernstein.n{n}.inf"), worst_inf * bound_inf);
        report.push(Case::at_most(&format!("Bernstein L2 -> Linf, n = {n}"), worst_inf, 1.0).with("cubes", ks.len()).with("analytic_constant", bound_inf));
        report.push(Case::at_most(&format!("Bernstein L2 -> L4, n = {n}"), worst_four, 1.0).with("cubes", ks.len()).with("analytic_constant", bound_inf.sqrt()));
        report.push(Case::at_most(&format!("Bernstein ratio independent of k, n = {n}"), drift(&ratios), 1e-10).with("cubes", ks.len()));
    }
    let f = SpectralField::single_cube(GridSpec::new(1, 4, 16)?, &CubeIndex::new(&[1]), Complex64::new(1.0, 0.0))?;
    report.push(Case::rejection("Bernstein with q < m rejected", bernstein_ratio(&f, &CubeIndex::new(&[1]), 4.0, 2.0)));
    Ok(report.finish())
}
