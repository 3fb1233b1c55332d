use std::f64::consts::PI;

use proptest::prelude::*;

use gsqg::analysis::commutator_g;
use gsqg::dynamics::phi_a;
use gsqg::harness::ic::{build_ic, InitialCondition, RandomBand};
use gsqg::{
    error_norm, forward_transform, fractional_laplacian, gradient, inverse_transform, sobolev_norm,
    velocity, Complex64, Grid, ModelParams, SpectralField,
};

fn random_field(grid: &Grid, seed: u64, band: i64, decay: f64) -> SpectralField {
    build_ic(
        &InitialCondition::RandomBand(RandomBand {
            seed,
            decay_exponent: decay,
            band,
        }),
        grid,
    )
    .unwrap()
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().coefficient_norm() / b.coefficient_norm().max(f64::MIN_POSITIVE)
}

/// Deterministic pseudo-random samples without the library's IC path.
fn hashed_samples(grid: &Grid, seed: u64) -> ndarray::Array2<f64> {
    grid.sample(|x, y| {
        let mut h = seed ^ x.to_bits().rotate_left(17) ^ y.to_bits().rotate_left(41);
        for _ in 0..3 {
            h = (h ^ (h >> 33)).wrapping_mul(0xff51afd7ed558ccd);
        }
        ((h >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    })
}

#[test]
fn round_trip_on_seeded_fields() {
    let grid = Grid::new(32).unwrap();
    for seed in 0..100 {
        let samples = hashed_samples(&grid, seed);
        let field = forward_transform(&samples, &grid).unwrap();
        let mean = samples.sum() / (32.0 * 32.0);
        assert!((field.zero_mode().re - mean).abs() < 1e-15);
        let back = inverse_transform(&field).unwrap();
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = back.iter().zip(&samples).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * scale, "seed {seed}: {err}");

        let again = forward_transform(&back, &grid).unwrap();
        assert!(rel(&again, &field) <= 1e-12);
    }
}

#[test]
fn error_norm_triangle_inequality() {
    let grid = Grid::new(16).unwrap();
    for seed in 0..100u64 {
        let [a, b, c] = [0, 1, 2].map(|i| random_field(&grid, 3 * seed + i, 4, 1.0));
        for s in [0.0, 1.0, 3.0] {
            let ac = error_norm(&a, &c, s).unwrap();
            let ab = error_norm(&a, &b, s).unwrap();
            let bc = error_norm(&b, &c, s).unwrap();
            assert!(ac <= (ab + bc) * (1.0 + 1e-14));
        }
    }
}

#[test]
fn parseval_matches_trapezoid_quadrature() {
    let grid = Grid::new(32).unwrap();
    for seed in 0..20 {
        let f = random_field(&grid, seed, 8, 0.5);
        let samples = inverse_transform(&f).unwrap();
        let quad = samples.mapv(|v| v * v).sum() * (2.0 * PI / 32.0).powi(2);
        let spectral = sobolev_norm(&f, 0.0).powi(2);
        assert!((quad - spectral).abs() <= 1e-10 * spectral);
    }
}

#[test]
fn commutator_derivative_in_alpha() {
    // d/dα |k|^α = ln|k|·|k|^α; compare the analytic derivative of G^α with
    // a centered difference at step 1e-4.
    let grid = Grid::new(32).unwrap();
    let f = random_field(&grid, 11, 5, 1.0);
    let g = random_field(&grid, 12, 5, 1.0);
    let dlambda = |h: &SpectralField, alpha: f64| {
        h.apply_real_symbol(|k1, k2| {
            let m = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if m == 0.0 {
                0.0
            } else {
                m.ln() * m.powf(alpha)
            }
        })
    };
    for alpha in [1.0, 1.5, 1.9] {
        let step = 1e-4;
        let fd = commutator_g(&f, &g, alpha + step)
            .unwrap()
            .sub(&commutator_g(&f, &g, alpha - step).unwrap())
            .unwrap()
            .scaled(0.5 / step);
        let analytic = dlambda(&f.dealiased_product(&g).unwrap(), alpha)
            .sub(&f.dealiased_product(&dlambda(&g, alpha)).unwrap())
            .unwrap()
            .sub(&g.dealiased_product(&dlambda(&f, alpha)).unwrap())
            .unwrap();
        assert!(rel(&fd, &analytic) <= 1e-6, "alpha {alpha}: {}", rel(&fd, &analytic));
    }
}

#[test]
fn phi_a_dissipates_every_norm() {
    let grid = Grid::new(32).unwrap();
    let f = random_field(&grid, 5, 8, 0.0);
    for alpha in [0.5, 1.0, 2.0] {
        let p = ModelParams::new(alpha, 1.0).unwrap();
        for s in [-2.0, 0.0, 1.5, 4.0] {
            let mut last = sobolev_norm(&f, s);
            for i in 1..=10 {
                let now = sobolev_norm(&phi_a(0.05 * i as f64, &f, &p).unwrap(), s);
                assert!(now <= last);
                last = now;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multiplier_composition(seed in 0u64..10_000, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let grid = Grid::new(16).unwrap();
        let f = random_field(&grid, seed, 4, 1.0);
        let two = fractional_laplacian(&fractional_laplacian(&f, a).unwrap(), b).unwrap();
        let one = fractional_laplacian(&f, a + b).unwrap();
        prop_assert!(rel(&two, &one) <= 1e-12);
    }

    #[test]
    fn lambda_two_is_minus_laplacian(seed in 0u64..10_000) {
        let grid = Grid::new(16).unwrap();
        let f = random_field(&grid, seed, 4, 0.5);
        let (fx, fy) = gradient(&f);
        let lap = gradient(&fx).0.add(&gradient(&fy).1).unwrap();
        let spectral = fractional_laplacian(&f, 2.0).unwrap();
        prop_assert!(rel(&spectral, &lap.scaled(-1.0)) <= 1e-12);
    }

    #[test]
    fn velocity_is_divergence_free(seed in 0u64..10_000, beta in 1.0f64..=2.0) {
        let grid = Grid::new(16).unwrap();
        let theta = random_field(&grid, seed, 4, 1.0);
        let u = velocity(&theta, beta).unwrap();
        let scale = u.u_x.coefficient_norm().max(u.u_y.coefficient_norm());
        prop_assert!(u.divergence_residual() <= 1e-12 * scale);
    }

    #[test]
    fn sobolev_norms_ordered(seed in 0u64..10_000, s1 in -4.0f64..12.0, gap in 0.0f64..4.0) {
        let grid = Grid::new(16).unwrap();
        let f = random_field(&grid, seed, 4, 1.0);
        let s2 = (s1 + gap).min(12.0);
        prop_assert!(sobolev_norm(&f, s1) <= sobolev_norm(&f, s2) * (1.0 + 1e-14));
    }

    #[test]
    fn commutator_bilinear(seed in 0u64..10_000, a in -3.0f64..3.0, alpha in 0.1f64..=2.0) {
        let grid = Grid::new(16).unwrap();
        let f1 = random_field(&grid, seed, 4, 1.0);
        let f2 = random_field(&grid, seed + 1, 4, 1.0);
        let g = random_field(&grid, seed + 2, 4, 1.0);
        let lhs = commutator_g(&f1.scaled(a).add(&f2).unwrap(), &g, alpha).unwrap();
        let rhs = commutator_g(&f1, &g, alpha).unwrap().scaled(a)
            .add(&commutator_g(&f2, &g, alpha).unwrap()).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
    }

    #[test]
    fn commutator_against_constant(seed in 0u64..10_000, c in -5.0f64..5.0, alpha in 0.1f64..=2.0) {
        let grid = Grid::new(16).unwrap();
        let f = random_field(&grid, seed, 4, 1.0);
        let constant = SpectralField::from_modes(&grid, &[((0, 0), Complex64::new(c, 0.0))]).unwrap();
        let out = commutator_g(&f, &constant, alpha).unwrap();
        prop_assert!(sobolev_norm(&out, 0.0) <= 1e-12 * sobolev_norm(&f, 0.0) * c.abs() + 1e-300);
    }

    #[test]
    fn phi_a_semigroup(seed in 0u64..10_000, s in 0.0f64..1.0, t in 0.0f64..1.0, alpha in 0.1f64..=2.0) {
        let grid = Grid::new(32).unwrap();
        let f = random_field(&grid, seed, 6, 0.5);
        let p = ModelParams::new(alpha, 1.0).unwrap();
        let two = phi_a(s, &phi_a(t, &f, &p).unwrap(), &p).unwrap();
        let one = phi_a(s + t, &f, &p).unwrap();
        prop_assert!(rel(&two, &one) <= 1e-13);
    }
}
