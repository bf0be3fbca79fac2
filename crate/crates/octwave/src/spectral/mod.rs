//! Finite frequency lattices, the cube decomposition `□_k`, octant masks and
//! dealiased pointwise products.
//!
//! A [`GridSpec`] describes the lattice `{m/M : -KM/2 <= m < KM/2}^n`; the
//! matching physical box is the torus of period `2πM`, sampled on `N = KM`
//! points per axis. Coefficients are stored in centered order (axis position
//! `m + N/2`), row-major with the last axis fastest.

mod fft;
pub mod io;

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::transform_nd;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lattice geometry shared by every field in a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial dimension, 1 to 3.
    pub n: usize,
    /// Lattice points per unit frequency interval.
    pub m: usize,
    /// Unit cubes per axis.
    pub k: usize,
}

/// Integer corner of a unit frequency cube `k + [0,1)^n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CubeIndex(pub Vec<i64>);

impl CubeIndex {
    pub fn new(k: &[i64]) -> Self {
        CubeIndex(k.to_vec())
    }

    /// Euclidean length `|k|`.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
    }

    /// `⟨k⟩ = (1 + |k|^2)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.0.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt()
    }

    pub fn sup_distance(&self, other: &CubeIndex) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &CubeIndex) -> CubeIndex {
        CubeIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl std::fmt::Display for CubeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl GridSpec {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::Domain(format!("dimension n = {n} must be 1, 2 or 3")));
        }
        if m == 0 || k < 2 {
            return Err(Error::Domain(
                "cells per cube must be positive and cubes per axis at least 2".into(),
            ));
        }
        if !(k * m).is_power_of_two() || k * m < 2 {
            return Err(Error::Domain(format!(
                "points per axis K*M = {} must be a power of two >= 2",
                k * m
            )));
        }
        Ok(GridSpec { n, m, k })
    }

    /// Points per axis `N = K M`.
    pub fn points_per_axis(&self) -> usize {
        self.k * self.m
    }

    /// Total number of lattice points `N^n`.
    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn half(&self) -> i64 {
        (self.points_per_axis() / 2) as i64
    }

    /// Measure of the physical box, `(2πM)^n`.
    pub fn box_measure(&self) -> f64 {
        (2.0 * PI * self.m as f64).powi(self.n as i32)
    }

    /// Integer lattice coordinates `m` (so `ξ = m/M`) of a storage index.
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let len = self.points_per_axis();
        let mut out = [0i64; 3];
        let mut rem = idx;
        for axis in (0..self.n).rev() {
            out[axis] = (rem % len) as i64 - self.half();
            rem /= len;
        }
        out
    }

    /// Storage index of integer lattice coordinates, if inside the grid.
    pub fn index_of(&self, m: &[i64]) -> Option<usize> {
        if m.len() != self.n {
            return None;
        }
        let len = self.points_per_axis() as i64;
        let mut idx = 0usize;
        for &c in m {
            let pos = c + self.half();
            if pos < 0 || pos >= len {
                return None;
            }
            idx = idx * len as usize + pos as usize;
        }
        Some(idx)
    }

    /// Frequency `ξ = m/M` of a storage index.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let m = self.lattice(idx);
        let scale = self.m as f64;
        [m[0] as f64 / scale, m[1] as f64 / scale, m[2] as f64 / scale]
    }

    /// Euclidean `|ξ|` of a storage index.
    pub fn radius(&self, idx: usize) -> f64 {
        let xi = self.xi(idx);
        xi[..self.n].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cube coordinate along one axis: `floor(m / M)`.
    fn cube_coord(&self, m: i64) -> i64 {
        m.div_euclid(self.m as i64)
    }

    /// Dense id of the cube containing a storage index.
    pub fn cube_id_of(&self, idx: usize) -> usize {
        let m = self.lattice(idx);
        let half_k = (self.k / 2) as i64;
        let mut id = 0usize;
        for &c in &m[..self.n] {
            id = id * self.k + (self.cube_coord(c) + half_k) as usize;
        }
        id
    }

    /// Number of cubes `K^n`.
    pub fn cube_count(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    pub fn cube_from_id(&self, id: usize) -> CubeIndex {
        let half_k = (self.k / 2) as i64;
        let mut out = vec![0i64; self.n];
        let mut rem = id;
        for axis in (0..self.n).rev() {
            out[axis] = (rem % self.k) as i64 - half_k;
            rem /= self.k;
        }
        CubeIndex(out)
    }

    pub fn cube_id(&self, k: &CubeIndex) -> Result<usize> {
        if k.0.len() != self.n {
            return Err(Error::Range(format!("cube {k} has wrong dimension for n = {}", self.n)));
        }
        let lo = -((self.k / 2) as i64);
        let hi = lo + self.k as i64;
        let mut id = 0usize;
        for &c in &k.0 {
            if c < lo || c >= hi {
                return Err(Error::Range(format!("cube {k} outside [{lo}, {hi})")));
            }
            id = id * self.k + (c - lo) as usize;
        }
        Ok(id)
    }

    /// Storage indices of the `M^n` lattice points in a cube.
    pub fn cube_points(&self, k: &CubeIndex) -> Result<Vec<usize>> {
        self.cube_id(k)?;
        let mm = self.m as i64;
        let count = self.m.pow(self.n as u32);
        let mut out = Vec::with_capacity(count);
        for local in 0..count {
            let mut rem = local;
            let mut coords = vec![0i64; self.n];
            for axis in (0..self.n).rev() {
                coords[axis] = k.0[axis] * mm + (rem % self.m) as i64;
                rem /= self.m;
            }
            out.push(self.index_of(&coords).expect("cube inside grid"));
        }
        Ok(out)
    }

    /// Index of the outer `shell` fraction: points whose largest `|m_j|` is at least
    /// `(1 - shell) N/2`.
    pub fn in_outer_shell(&self, idx: usize, shell: f64) -> bool {
        let m = self.lattice(idx);
        let edge = (1.0 - shell) * self.half() as f64;
        m[..self.n].iter().any(|&c| (c.abs() as f64) >= edge)
    }
}

/// Complex field given by its Fourier coefficients on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

/// Smallest padding factor that makes a degree-`p` product alias-free.
pub fn required_padding(p: usize) -> usize {
    let need = (p as f64 + 1.0) / 2.0;
    (need.ceil() as usize).next_power_of_two()
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField { grid, coeffs: vec![ZERO; grid.len()] }
    }

    /// A single lattice mode at integer coordinates `m` with coefficient `c`.
    pub fn single_mode(grid: GridSpec, m: &[i64], c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        let idx = grid
            .index_of(m)
            .ok_or_else(|| Error::Range(format!("mode {m:?} outside grid")))?;
        f.coeffs[idx] = c;
        Ok(f)
    }

    /// Constant coefficient `c` on every lattice point of cube `k`.
    pub fn single_cube(grid: GridSpec, k: &CubeIndex, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for idx in grid.cube_points(k)? {
            f.coeffs[idx] = c;
        }
        Ok(f)
    }

    /// I.i.d. standard complex Gaussian coefficients on the given cubes.
    pub fn random_on_cubes<R: Rng>(grid: GridSpec, cubes: &[CubeIndex], rng: &mut R) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for k in cubes {
            for idx in grid.cube_points(k)? {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                f.coeffs[idx] = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            }
        }
        Ok(f)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        SpectralField { grid: self.grid, coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    /// Spectral `ℓ²` sum `Σ|û|²`.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Physical `L²` norm over the box, `(|box| Σ|û|²)^{1/2}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.box_measure() * self.coeff_norm_sq()).sqrt()
    }

    /// Squared `L²` norm of every cube, indexed by dense cube id.
    pub fn cube_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.cube_count()];
        let measure = self.grid.box_measure();
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c != ZERO {
                out[self.grid.cube_id_of(idx)] += measure * c.norm_sqr();
            }
        }
        out
    }

    /// `□_k f`: zero every coefficient outside `k + [0,1)^n`.
    pub fn decompose(&self, k: &CubeIndex) -> Result<Self> {
        let id = self.grid.cube_id(k)?;
        let mut out = Self::zeros(self.grid);
        for (idx, c) in self.coeffs.iter().enumerate() {
            if self.grid.cube_id_of(idx) == id {
                out.coeffs[idx] = *c;
            }
        }
        Ok(out)
    }

    /// Keep only `ξ` in the first octant with `|ξ|_∞ >= r`.
    pub fn octant_mask(&self, r: f64) -> Self {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            if !in_octant(&self.grid, idx, r) {
                *c = ZERO;
            }
        }
        out
    }

    /// Largest `|û|` outside the octant region `{ξ_j >= 0, |ξ|_∞ >= r}`.
    pub fn octant_leakage(&self, r: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(idx, _)| !in_octant(&self.grid, *idx, r))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_octant_supported(&self, r: f64) -> bool {
        self.octant_leakage(r) == 0.0
    }

    /// Cubes carrying more than `tol` times the total `L²` norm.
    pub fn support_cubes(&self, tol: f64) -> BTreeSet<CubeIndex> {
        let norms = self.cube_norms_sq();
        let total: f64 = norms.iter().sum::<f64>().sqrt();
        if total == 0.0 {
            return BTreeSet::new();
        }
        norms
            .iter()
            .enumerate()
            .filter(|(_, v)| v.sqrt() > tol * total)
            .map(|(id, _)| self.grid.cube_from_id(id))
            .collect()
    }

    /// Fraction of the coefficient `ℓ²` norm in the outer `shell` of the lattice.
    pub fn outer_shell_fraction(&self, shell: f64) -> f64 {
        let total = self.coeff_norm_sq();
        if total == 0.0 {
            return 0.0;
        }
        let outer: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.in_outer_shell(*idx, shell))
            .map(|(_, c)| c.norm_sqr())
            .sum();
        (outer / total).sqrt()
    }

    /// Physical samples on a grid refined by `pad` per axis:
    /// `u(x_j) = Σ_m û_m e^{i x_j m/M}` with `x_j = 2πM j/(N pad)`.
    pub fn to_physical(&self, pad: usize) -> Vec<Complex64> {
        let n = self.grid.n;
        let big = self.grid.points_per_axis() * pad;
        let mut buf = vec![ZERO; big.pow(n as u32)];
        for (idx, c) in self.coeffs.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            buf[padded_position(&self.grid, idx, big)] = *c;
        }
        transform_nd(&mut buf, big, n, true);
        buf
    }

    /// Inverse of [`SpectralField::to_physical`], truncating to the lattice of `grid`.
    pub fn from_physical(grid: GridSpec, mut samples: Vec<Complex64>, pad: usize) -> Self {
        let n = grid.n;
        let big = grid.points_per_axis() * pad;
        debug_assert_eq!(samples.len(), big.pow(n as u32));
        transform_nd(&mut samples, big, n, false);
        let norm = 1.0 / samples.len() as f64;
        let coeffs = (0..grid.len())
            .map(|idx| samples[padded_position(&grid, idx, big)] * norm)
            .collect();
        SpectralField { grid, coeffs }
    }

    /// Physical `L^q` norm on the torus from samples refined by `pad`; `q = ∞` gives the sample max.
    pub fn lebesgue_norm(&self, q: f64, pad: usize) -> f64 {
        let samples = self.to_physical(pad);
        if q.is_infinite() {
            return samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let cell = self.grid.box_measure() / samples.len() as f64;
        (samples.iter().map(|z| z.norm().powf(q)).sum::<f64>() * cell).powf(1.0 / q)
    }

    /// Spectral representation of `u(x)^p` (no conjugation), alias-free.
    pub fn pointwise_power(&self, p: usize) -> Result<Self> {
        self.pointwise_power_padded(p, required_padding(p))
    }

    /// [`SpectralField::pointwise_power`] with an explicit padding factor.
    pub fn pointwise_power_padded(&self, p: usize, pad: usize) -> Result<Self> {
        check_padding(p, pad)?;
        if self.is_zero() {
            return Ok(Self::zeros(self.grid));
        }
        let mut samples = self.to_physical(pad);
        for z in samples.iter_mut() {
            *z = z.powu(p as u32);
        }
        finite_or_err(&samples)?;
        Ok(Self::from_physical(self.grid, samples, pad))
    }
}

/// Alias-free product of several fields on a shared grid.
pub fn pointwise_product(fields: &[&SpectralField]) -> Result<SpectralField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Domain("empty product".into()))?;
    let grid = first.grid;
    if fields.iter().any(|f| f.grid != grid) {
        return Err(Error::Precondition("product factors live on different grids".into()));
    }
    if fields.iter().any(|f| f.is_zero()) {
        return Ok(SpectralField::zeros(grid));
    }
    let pad = required_padding(fields.len());
    let mut acc = first.to_physical(pad);
    for f in &fields[1..] {
        for (a, b) in acc.iter_mut().zip(f.to_physical(pad)) {
            *a *= b;
        }
    }
    finite_or_err(&acc)?;
    Ok(SpectralField::from_physical(grid, acc, pad))
}

fn check_padding(p: usize, pad: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::Domain(format!("power p = {p} must be at least 2")));
    }
    let required = (p as f64 + 1.0) / 2.0;
    if (pad as f64) < required {
        return Err(Error::Aliasing { pad, required, degree: p });
    }
    Ok(())
}

fn finite_or_err(samples: &[Complex64]) -> Result<()> {
    if samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericRange("pointwise power overflowed".into()))
    }
}

fn in_octant(grid: &GridSpec, idx: usize, r: f64) -> bool {
    let m = grid.lattice(idx);
    let scale = grid.m as f64;
    let coords = &m[..grid.n];
    if coords.iter().any(|&c| c < 0) {
        return false;
    }
    let sup = coords.iter().map(|&c| c as f64 / scale).fold(0.0, f64::max);
    sup >= r - 1e-12 * r.max(1.0)
}

/// Position of a centered lattice index inside an FFT-ordered array of side `big`.
fn padded_position(grid: &GridSpec, idx: usize, big: usize) -> usize {
    let m = grid.lattice(idx);
    let mut pos = 0usize;
    for &c in &m[..grid.n] {
        pos = pos * big + c.rem_euclid(big as i64) as usize;
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn decompose_respects_half_open_cubes() {
        let g = GridSpec::new(1, 2, 8).unwrap();
        let f = SpectralField::single_mode(g, &[1], c(1.0, 0.0)).unwrap(); // ξ = 0.5
        assert_eq!(f.decompose(&CubeIndex::new(&[0])).unwrap(), f);
        assert!(f.decompose(&CubeIndex::new(&[1])).unwrap().is_zero());
        let edge = SpectralField::single_mode(g, &[2], c(1.0, 0.0)).unwrap(); // ξ = 1
        assert!(edge.decompose(&CubeIndex::new(&[0])).unwrap().is_zero());
    }

    #[test]
    fn decompose_out_of_range_is_an_error() {
        let g = GridSpec::new(1, 2, 8).unwrap();
        let f = SpectralField::zeros(g);
        assert!(matches!(f.decompose(&CubeIndex::new(&[4])), Err(Error::Range(_))));
        assert!(f.decompose(&CubeIndex::new(&[-4])).is_ok());
    }

    #[test]
    fn cubes_partition_the_lattice() {
        let g = GridSpec::new(2, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let all: Vec<CubeIndex> = (0..g.cube_count()).map(|i| g.cube_from_id(i)).collect();
        let f = SpectralField::random_on_cubes(g, &all, &mut rng).unwrap();
        let mut sum = SpectralField::zeros(g);
        for k in &all {
            sum = sum.add(&f.decompose(k).unwrap());
        }
        assert_eq!(sum, f);
    }

    #[test]
    fn cube_energy_sums_to_total() {
        let g = GridSpec::new(1, 4, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let all: Vec<CubeIndex> = (0..g.cube_count()).map(|i| g.cube_from_id(i)).collect();
        let f = SpectralField::random_on_cubes(g, &all, &mut rng).unwrap();
        let direct: f64 = all.iter().map(|k| f.decompose(k).unwrap().l2_norm().powi(2)).sum();
        let total = f.l2_norm().powi(2);
        assert!((direct - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn octant_mask_threshold() {
        // A lattice with spacing 1/4 cannot hold 0.2, so 0.25 stands in for it.
        let g = GridSpec::new(1, 4, 16).unwrap();
        let mut f = SpectralField::zeros(g);
        f.coeffs[g.index_of(&[-4]).unwrap()] = c(1.0, 0.0); // -1
        f.coeffs[g.index_of(&[1]).unwrap()] = c(1.0, 0.0); // 0.25
        f.coeffs[g.index_of(&[8]).unwrap()] = c(1.0, 0.0); // 2
        let masked = f.octant_mask(3f64.powf(-0.5));
        let kept: Vec<usize> = masked.coeffs.iter().enumerate().filter(|(_, v)| v.norm() > 0.0).map(|(i, _)| i).collect();
        assert_eq!(kept, vec![g.index_of(&[8]).unwrap()]);
        assert!(masked.is_octant_supported(3f64.powf(-0.5)));
    }

    #[test]
    fn octant_mask_drops_negative_components_in_2d() {
        let g = GridSpec::new(2, 4, 8).unwrap();
        let f = SpectralField::single_mode(g, &[4, -1], c(1.0, 0.0)).unwrap();
        assert!(f.octant_mask(0.0).is_zero());
    }

    #[test]
    fn parseval_and_round_trip() {
        let g = GridSpec::new(2, 4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let all: Vec<CubeIndex> = (0..g.cube_count()).map(|i| g.cube_from_id(i)).collect();
        let f = SpectralField::random_on_cubes(g, &all, &mut rng).unwrap();
        let phys = f.to_physical(1);
        let cell = g.box_measure() / phys.len() as f64;
        let l2 = (phys.iter().map(|z| z.norm_sqr()).sum::<f64>() * cell).sqrt();
        assert!((l2 - f.l2_norm()).abs() <= 1e-12 * l2);
        let back = SpectralField::from_physical(g, phys, 1);
        let err: f64 = back.sub(&f).coeff_norm_sq().sqrt();
        assert!(err <= 1e-13 * f.coeff_norm_sq().sqrt());
    }

    #[test]
    fn square_of_single_mode_is_single_mode_at_double_frequency() {
        let g = GridSpec::new(1, 4, 8).unwrap();
        let a = c(0.3, -0.7);
        let f = SpectralField::single_mode(g, &[5], a).unwrap();
        let sq = f.pointwise_power(2).unwrap();
        for (idx, v) in sq.coeffs.iter().enumerate() {
            let expected = if g.lattice(idx)[0] == 10 { a * a } else { c(0.0, 0.0) };
            assert!((v - expected).norm() < 1e-14, "idx {idx}: {v}");
        }
    }

    #[test]
    fn power_matches_direct_convolution() {
        let g = GridSpec::new(1, 2, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = SpectralField::random_on_cubes(g, &[CubeIndex::new(&[0]), CubeIndex::new(&[1])], &mut rng).unwrap();
        let cube = f.pointwise_power(3).unwrap();
        let half = 8i64;
        for out in -half..half {
            let mut acc = c(0.0, 0.0);
            for a in -half..half {
                for b in -half..half {
                    let rest = out - a - b;
                    if rest < -half || rest >= half {
                        continue;
                    }
                    let ca = f.coeffs[g.index_of(&[a]).unwrap()];
                    let cb = f.coeffs[g.index_of(&[b]).unwrap()];
                    let cr = f.coeffs[g.index_of(&[rest]).unwrap()];
                    acc += ca * cb * cr;
                }
            }
            let got = cube.coeffs[g.index_of(&[out]).unwrap()];
            assert!((got - acc).norm() < 1e-12, "m={out}: {got} vs {acc}");
        }
    }

    #[test]
    fn insufficient_padding_is_reported() {
        let g = GridSpec::new(1, 2, 8).unwrap();
        let f = SpectralField::single_mode(g, &[1], c(1.0, 0.0)).unwrap();
        assert!(matches!(f.pointwise_power_padded(3, 1), Err(Error::Aliasing { .. })));
        assert_eq!(required_padding(2), 2);
        assert_eq!(required_padding(3), 2);
        assert_eq!(required_padding(4), 4);
    }

    #[test]
    fn overflow_is_reported() {
        let g = GridSpec::new(1, 2, 8).unwrap();
        let f = SpectralField::single_mode(g, &[1], c(1e200, 0.0)).unwrap();
        assert!(matches!(f.pointwise_power(2), Err(Error::NumericRange(_))));
    }

    #[test]
    fn support_cubes_of_single_cube_and_zero() {
        let g = GridSpec::new(2, 2, 8).unwrap();
        let k = CubeIndex::new(&[1, 2]);
        let f = SpectralField::single_cube(g, &k, c(1.0, 1.0)).unwrap();
        assert_eq!(f.support_cubes(0.0).into_iter().collect::<Vec<_>>(), vec![k]);
        assert!(SpectralField::zeros(g).support_cubes(0.0).is_empty());
    }

    #[test]
    fn bernstein_single_mode_ratio_is_inverse_root_measure() {
        let g = GridSpec::new(1, 4, 8).unwrap();
        let f = SpectralField::single_mode(g, &[6], c(1.0, 0.0)).unwrap();
        let ratio = f.lebesgue_norm(f64::INFINITY, 1) / f.lebesgue_norm(2.0, 1);
        assert!((ratio - g.box_measure().powf(-0.5)).abs() < 1e-12);
    }
}
