use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use octwave::cli::RunConfig;
use octwave::kernels::{characteristic_roots, kernel_eval, ode_oracle, InitialCondition, KernelValue, ModelParams};
use octwave::norms::{e_norm, s_sum, NormSpec};
use octwave::scaling::{contract_field, descale_data, dilate_field, scale_data, Dilation};
use octwave::spectral::io::{read_binary, write_binary};
use octwave::spectral::{pointwise_product, CubeIndex, GridSpec, SpectralField};

fn grid_1d() -> GridSpec {
    GridSpec::new(1, 4, 64).unwrap()
}

fn field_on(grid: GridSpec, cubes: &[i64], seed: u64) -> SpectralField {
    let cubes: Vec<CubeIndex> = cubes.iter().map(|k| CubeIndex::new(&[*k])).collect();
    SpectralField::random_on_cubes(grid, &cubes, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

fn octant_cubes() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::btree_set(1i64..=6, 1..=3).prop_map(|s| s.into_iter().collect())
}

/// `(σ, δ)` with `0 <= δ <= σ`.
fn model() -> impl Strategy<Value = (f64, f64)> {
    (0.25f64..3.0, 0.0f64..=1.0).prop_map(|(sigma, frac)| (sigma, frac * sigma))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn products_of_octant_fields_stay_in_the_octant(a in octant_cubes(), b in octant_cubes(), seed in any::<u64>()) {
        let grid = grid_1d();
        let f = field_on(grid, &a, seed);
        let g = field_on(grid, &b, seed.wrapping_add(1));
        prop_assert!(f.is_octant_supported(0.5) && g.is_octant_supported(0.5));
        let fg = pointwise_product(&[&f, &g]).unwrap();
        prop_assert!(fg.octant_leakage(1.0) <= 1e-12 * fg.l2_norm().max(1e-300));
    }

    #[test]
    fn scale_then_descale_is_the_identity(
        cubes in octant_cubes(),
        seed in any::<u64>(),
        lambda in 1u32..=4,
        (sigma, delta) in model(),
        p in 2usize..=4,
        periodic in any::<bool>(),
    ) {
        let grid = grid_1d();
        let params = ModelParams::new(sigma, delta, p, 1).unwrap();
        let dilation = if periodic { Dilation::Periodic } else { Dilation::Distributional };
        let u0 = field_on(grid, &cubes, seed);
        let u1 = field_on(grid, &cubes, seed ^ 0x5555);
        let (s0, s1) = scale_data(&u0, &u1, lambda as f64, &params, dilation).unwrap();
        let (b0, b1) = descale_data(&s0, &s1, lambda as f64, &params, dilation).unwrap();
        prop_assert!(b0.sub(&u0).l2_norm() <= 1e-13 * u0.l2_norm());
        prop_assert!(b1.sub(&u1).l2_norm() <= 1e-13 * u1.l2_norm());
    }

    #[test]
    fn dilation_moves_support_outward(cubes in octant_cubes(), seed in any::<u64>(), lambda in 2u32..=4) {
        let grid = grid_1d();
        let f = field_on(grid, &cubes, seed);
        let d = dilate_field(&f, lambda, 1.0).unwrap();
        prop_assert!((d.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
        prop_assert!(d.is_octant_supported(0.5 * lambda as f64));
        prop_assert!(contract_field(&d, lambda, 1.0).unwrap() == f);
        // Anything off the dilated lattice cannot be contracted.
        let on_lattice = |i: usize| grid.lattice(i)[0] % lambda as i64 == 0;
        let all_on = f.coeffs.iter().enumerate().all(|(i, c)| c.norm() == 0.0 || on_lattice(i));
        prop_assert_eq!(contract_field(&f.add(&d), lambda, 1.0).is_ok(), all_on);
    }

    #[test]
    fn kernels_start_from_canonical_data((sigma, delta) in model(), lambda in 1.0f64..8.0, r in 0.05f64..20.0) {
        let params = ModelParams::new(sigma, delta, 2, 1).unwrap();
        prop_assert_eq!(kernel_eval(&params, lambda, r, 0.0).unwrap(), KernelValue::initial());
    }

    #[test]
    fn roots_have_nonpositive_real_parts((sigma, delta) in model(), lambda in 1.0f64..8.0, r in 0.05f64..20.0) {
        let params = ModelParams::new(sigma, delta, 2, 1).unwrap();
        let (mp, mm) = characteristic_roots(&params, lambda, r).unwrap();
        prop_assert!(mp.re <= 0.0 && mm.re <= 0.0);
        let (a, b) = params.mode_coefficients(lambda, r);
        prop_assert!(((mp * mm).re - a).abs() <= 1e-9 * a.max(1.0));
        prop_assert!((-(mp + mm).re - b).abs() <= 1e-9 * b.max(1.0));
    }

    #[test]
    fn kernels_are_bounded_by_the_mode_energy((sigma, delta) in model(), r in 0.1f64..10.0, t in 0.0f64..20.0) {
        // The damped mode energy |v'|² + a|v|² never increases.
        let params = ModelParams::new(sigma, delta, 2, 1).unwrap();
        let (a, _) = params.mode_coefficients(1.0, r);
        let k = kernel_eval(&params, 1.0, r, t).unwrap();
        prop_assert!(k.dtk0.norm_sqr() + a * k.k0.norm_sqr() <= a * (1.0 + 1e-9));
        prop_assert!(k.dtk1.norm_sqr() + a * k.k1.norm_sqr() <= 1.0 + 1e-9);
    }

    #[test]
    fn norms_are_homogeneous_and_subadditive(
        a in octant_cubes(),
        b in octant_cubes(),
        seed in any::<u64>(),
        alpha in -2.0f64..=0.0,
        s in -3.0f64..3.0,
        c in -5.0f64..5.0,
    ) {
        let grid = grid_1d();
        let f = field_on(grid, &a, seed);
        let g = field_on(grid, &b, seed.wrapping_mul(3));
        let spec = NormSpec::new(alpha, s).unwrap();
        let nf = e_norm(&f, spec);
        prop_assert!((e_norm(&f.scale(Complex64::new(c, 0.0)), spec) - c.abs() * nf).abs() <= 1e-12 * nf.max(1.0));
        prop_assert!(e_norm(&f.add(&g), spec) <= (nf + e_norm(&g, spec)) * (1.0 + 1e-12));
        // Cubes k >= 1 have weight increasing in s.
        prop_assert!(e_norm(&f, spec.shifted(0.5)) >= nf);
    }

    #[test]
    fn binary_fields_round_trip(cubes in octant_cubes(), seed in any::<u64>()) {
        let f = field_on(grid_1d(), &cubes, seed);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        prop_assert!(read_binary(buf.as_slice()).unwrap() == f);
    }

    #[test]
    fn lattice_sums_grow_with_the_radius(p in 2usize..=3, s in -1.0f64..1.0, beta in 0.0f64..2.0, r in 1u64..40) {
        prop_assert!(s_sum(p, 1, s, beta, r + 1) >= s_sum(p, 1, s, beta, r));
    }

    #[test]
    fn environment_overrides_round_trip(steps in 1usize..100_000, seed in any::<u64>(), alpha in -4.0f64..0.0) {
        let env = BTreeMap::from([
            ("OCTWAVE_SOLVER_STEPS".to_string(), steps.to_string()),
            ("OCTWAVE_SEED".to_string(), seed.to_string()),
            ("OCTWAVE_NORM_ALPHA".to_string(), format!("{alpha:?}")),
        ]);
        let cfg = RunConfig::default().with_env(&env).unwrap();
        prop_assert_eq!(cfg.solver.steps, steps);
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.norm.alpha, alpha);
        // A config file holds seeds up to i64::MAX.
        let cfg = RunConfig { seed: seed >> 1, ..cfg };
        let again = RunConfig::from_toml_str(&toml::to_string(&cfg).unwrap(), "roundtrip").unwrap();
        prop_assert_eq!(again.hash(), cfg.hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_form_kernels_match_the_ode((sigma, delta) in model(), lambda in 1.0f64..4.0, r in 0.2f64..5.0, t in 0.0f64..5.0) {
        let params = ModelParams::new(sigma, delta, 2, 1).unwrap();
        let k = kernel_eval(&params, lambda, r, t).unwrap();
        let v0 = ode_oracle(&params, lambda, r, t, InitialCondition::Position).unwrap();
        let v1 = ode_oracle(&params, lambda, r, t, InitialCondition::Velocity).unwrap();
        prop_assert!((k.k0 - v0).norm() <= 1e-8 * (1.0 + v0.norm()));
        prop_assert!((k.k1 - v1).norm() <= 1e-8 * (1.0 + v1.norm()));
    }
}
