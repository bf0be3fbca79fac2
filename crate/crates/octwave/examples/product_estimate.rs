//! Weighted norms of octant-supported fields and the product estimate
//! `‖uv‖ <= C ‖u‖ ‖v‖` across lattice refinements.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use octwave::norms::{e_norm, e_norm_breakdown, product_estimate_ratio, s_sum_trace, NormSpec, TimeSeries};
use octwave::propagator::uniform_times;
use octwave::spectral::{CubeIndex, GridSpec, SpectralField};

fn main() -> octwave::Result<()> {
    let (alpha, s, beta) = (-1.0, -1.5, 1.0);
    let spec = NormSpec::new(alpha, s)?;
    let cubes: Vec<CubeIndex> = [1, 2, 3].iter().map(|k| CubeIndex::new(&[*k])).collect();

    for m in [4, 8] {
        let grid = GridSpec::new(1, m, 32)?;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = SpectralField::random_on_cubes(grid, &cubes, &mut rng)?;
        let g = SpectralField::random_on_cubes(grid, &cubes, &mut rng)?;
        println!("M = {m}: ||f|| = {:.5e}", e_norm(&f, spec));
        for (k, v) in e_norm_breakdown(&f, spec) {
            println!("    cube {:?}: {v:.5e}", k.0);
        }
        let times = uniform_times(5.0, 64);
        let u = TimeSeries::separable(times.clone(), &f, |t| (-t).exp())?;
        let v = TimeSeries::separable(times, &g, |t| 1.0 / (1.0 + t))?;
        let r = product_estimate_ratio(&[&u, &v], alpha, s, beta)?;
        println!("    product: lhs = {:.5e}, rhs = {:.5e}, ratio = {:.5}", r.lhs, r.rhs, r.ratio);
        let uu = u.add(&TimeSeries::separable(u.times.clone(), &f.scale(Complex64::new(0.0, 1.0)), |t| t.cos().abs())?);
        println!("    self product ratio: {:.5}", product_estimate_ratio(&[&uu, &uu], alpha, s, beta)?.ratio);
    }

    let trace = s_sum_trace(2, 1, s, beta, 8, 4096);
    println!("lattice sum at s = {s}, beta = {beta}:");
    for (r, v) in trace.radii.iter().zip(&trace.values) {
        println!("    radius {r:>5}: {v:.8}");
    }
    Ok(())
}
