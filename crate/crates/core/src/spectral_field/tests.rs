use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::oracle;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n).unwrap()
}

fn sine_mode(g: GridSpec) -> SpectralField {
    let mut f = SpectralField::zeros(g);
    let z = Complex64::default();
    f.set_mode([1, 0, 0], [z, Complex64::new(0.0, -0.5), z]);
    f
}

fn random_physical(g: GridSpec, seed: u64) -> PhysicalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = [0, 1, 2].map(|_| (0..g.len()).map(|_| rng.random::<f64>() - 0.5).collect());
    PhysicalField::from_values(g, vals).unwrap()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn zero_field_transforms_to_zero() {
    let g = grid(8);
    let p = to_physical(&SpectralField::zeros(g));
    assert!(p.values().iter().all(|c| c.iter().all(|v| *v == 0.0)));
}

#[test]
fn single_mode_is_a_sine() {
    let g = grid(16);
    let p = to_physical(&sine_mode(g));
    let want = PhysicalField::from_fn(g, |x| [0.0, x[0].sin(), 0.0]);
    for c in 0..3 {
        for (a, b) in p.component(c).iter().zip(want.component(c)) {
            assert!((a - b).abs() < 1e-14);
        }
    }
    let back = to_spectral(&want);
    for c in 0..3 {
        for (a, b) in back.component(c).iter().zip(sine_mode(g).component(c)) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}

#[test]
fn constant_field_has_only_mean_mode() {
    let g = grid(8);
    let f = to_spectral(&PhysicalField::from_fn(g, |_| [1.0, -2.0, 0.5]));
    assert!((f.mean()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    assert!((f.mean()[1] - Complex64::new(-2.0, 0.0)).norm() < 1e-15);
    for c in 0..3 {
        assert!(f.component(c)[1..].iter().all(|v| v.norm() < 1e-15));
    }
}

#[test]
fn synthesis_matches_direct_sum() {
    let g = grid(32);
    let f = SpectralField::random_solenoidal(g, 4, 0.0, 10.0, 1.0).unwrap();
    let p = to_physical(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts: Vec<[usize; 3]> = (0..40)
        .map(|_| {
            [
                rng.random_range(0..32),
                rng.random_range(0..32),
                rng.random_range(0..32),
            ]
        })
        .collect();
    let want = oracle::direct_synthesis_at(&f, &pts);
    let scale = p.values().iter().map(|c| max_abs(c)).fold(0.0, f64::max);
    for (pt, w) in pts.iter().zip(want) {
        let idx = g.index(pt[0], pt[1], pt[2]);
        for c in 0..3 {
            assert!((p.component(c)[idx] - w[c]).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn analysis_matches_direct_sum() {
    let g = grid(8);
    let phys = random_physical(g, 2);
    let f = to_spectral(&phys);
    let want = oracle::direct_analysis(&phys);
    let scale = want
        .iter()
        .flat_map(|c| c.iter())
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    for c in 0..3 {
        for (a, b) in f.component(c).iter().zip(&want[c]) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
    }
}

#[test]
fn round_trip_is_tight() {
    for n in [16usize, 32, 64] {
        let g = grid(n);
        let f = to_spectral(&random_physical(g, n as u64));
        let back = to_spectral(&to_physical(&f));
        let err = back.sub(&f).unwrap().l2_norm() / f.l2_norm();
        assert!(err <= 1e-13, "n = {n}: {err}");
    }
}

#[test]
fn parseval() {
    let g = grid(16);
    let phys = random_physical(g, 8);
    let f = to_spectral(&phys);
    let lattice = lp_norm(&phys, Exponent::Two).powi(2);
    assert!((lattice - f.energy()).abs() <= 1e-12 * lattice);
}

#[test]
fn leray_idempotent_on_solenoidal_fields() {
    let g = grid(16);
    let f = SpectralField::random_solenoidal(g, 3, 1.0, 5.0, 1.0).unwrap();
    let p = leray_project(&f);
    assert!(p.sub(&f).unwrap().l2_norm() <= 1e-14 * f.l2_norm());
}

#[test]
fn leray_kills_gradients() {
    let g = grid(16);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut potential = PhysicalField::zeros(g);
    let vals: Vec<f64> = (0..g.len()).map(|_| rng.random::<f64>()).collect();
    potential = PhysicalField::from_values(
        g,
        [
            vals,
            potential.component(1).to_vec(),
            potential.component(2).to_vec(),
        ],
    )
    .unwrap();
    let phi = to_spectral(&potential);
    let mut grad = SpectralField::zeros(g);
    for idx in 0..g.len() {
        let l = g.unindex(idx);
        for c in 0..3 {
            grad.coeffs_mut()[c][idx] =
                Complex64::new(0.0, g.derivative_wavenumber(l[c])) * phi.component(0)[idx];
        }
    }
    let p = leray_project(&grad);
    assert!(p.l2_norm() <= 1e-13 * grad.l2_norm());
}

#[test]
fn leray_on_random_field() {
    let g = grid(16);
    let f = to_spectral(&random_physical(g, 12));
    let p = leray_project(&f);
    assert!(p.divergence_residual() <= 1e-12);
    let pp = leray_project(&p);
    assert!(pp.sub(&p).unwrap().l2_norm() <= 1e-14 * p.l2_norm());
    assert!(p.hermitian_residual() <= 1e-15);
    // Self-adjoint in the L2 inner product.
    let h = to_spectral(&random_physical(g, 13));
    let ph = leray_project(&h);
    let lhs: f64 = (0..3)
        .map(|c| inner(&g, p.component(c), h.component(c)))
        .sum();
    let rhs: f64 = (0..3)
        .map(|c| inner(&g, f.component(c), ph.component(c)))
        .sum();
    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn product_of_zero_is_zero() {
    let g = grid(8);
    let f = SpectralField::zeros(g);
    let h = SpectralField::random_solenoidal(g, 1, 1.0, 2.0, 1.0).unwrap();
    assert_eq!(dealiased_product(&f, &h).unwrap().energy(), 0.0);
    assert!(dealiased_product(&f, &SpectralField::zeros(grid(16))).is_err());
}

#[test]
fn low_mode_product_is_exact() {
    // sin(x1) * cos(x2) = (sin(x1 + x2) + sin(x1 - x2)) / 2
    let g = grid(16);
    let a = to_spectral(&PhysicalField::from_fn(g, |x| [x[0].sin(), 0.0, 0.0]));
    let b = to_spectral(&PhysicalField::from_fn(g, |x| [x[1].cos(), 0.0, 0.0]));
    let t = dealiased_product(&a, &b).unwrap();
    let want = to_spectral(&PhysicalField::from_fn(g, |x| {
        [0.5 * ((x[0] + x[1]).sin() + (x[0] - x[1]).sin()), 0.0, 0.0]
    }));
    for (x, y) in t.get(0, 0).iter().zip(want.component(0)) {
        assert!((x - y).norm() < 1e-15);
    }
}

#[test]
fn product_matches_convolution_oracle() {
    let g = grid(32);
    let f = SpectralField::random_solenoidal(g, 21, 0.0, 10.0, 1.0).unwrap();
    let h = SpectralField::random_solenoidal(g, 22, 0.0, 10.0, 1.0).unwrap();
    let t = dealiased_product(&f, &h).unwrap();
    let want = oracle::convolution_product(&f, &h);
    let err = t.axpy(-1.0, &want).unwrap().energy().sqrt() / want.energy().sqrt();
    assert!(err <= 1e-10, "{err}");
    // symmetric up to transpose
    let swapped = dealiased_product(&h, &f).unwrap().transpose();
    assert!(t.axpy(-1.0, &swapped).unwrap().energy().sqrt() <= 1e-14 * want.energy().sqrt());
}

#[test]
fn lp_norms_of_simple_fields() {
    let g = grid(16);
    let s = PhysicalField::from_fn(g, |x| [x[0].sin(), 0.0, 0.0]);
    let l2 = lp_norm(&s, Exponent::Two).powi(2);
    assert!((l2 - (2.0 * PI).powi(3) / 2.0).abs() < 1e-10);
    assert!((l2 - 124.025).abs() < 1e-3);
    let z = PhysicalField::zeros(g);
    for p in Exponent::ALL {
        assert_eq!(lp_norm(&z, p), 0.0);
    }
    let tg = PhysicalField::from_fn(g, |x| {
        [
            x[0].sin() * x[1].cos() * x[2].cos(),
            -x[0].cos() * x[1].sin() * x[2].cos(),
            0.0,
        ]
    });
    assert!(
        (lp_norm(&tg, Exponent::Two).powi(2) - 2.0 * PI.powi(3)).abs() <= 1e-10 * 2.0 * PI.powi(3)
    );
}

#[test]
fn gradient_energy_matches_tensor() {
    let g = grid(16);
    let f = SpectralField::random_solenoidal(g, 2, 1.0, 5.0, 1.0).unwrap();
    let grad = gradient(&f);
    assert!((grad.energy() - f.gradient_energy()).abs() <= 1e-12 * f.gradient_energy());
}

#[test]
fn random_field_rejects_band_overflow() {
    let g = grid(16);
    assert!(SpectralField::random_solenoidal(g, 1, 2.0, 6.0, 1.0).is_err());
    let f = SpectralField::random_solenoidal(g, 7, 2.0, 5.0, 1.0).unwrap();
    assert!((f.energy() - 1.0).abs() < 1e-12);
    assert!(f.divergence_residual() <= 1e-12);
    assert_eq!(f.mean(), [Complex64::default(); 3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn product_is_bilinear(seed in 0u64..1000, alpha in -3.0f64..3.0) {
        let g = grid(8);
        let a = SpectralField::random_solenoidal(g, seed, 0.0, 2.0, 1.0).unwrap();
        let b = SpectralField::random_solenoidal(g, seed + 1, 0.0, 2.0, 1.0).unwrap();
        let c = SpectralField::random_solenoidal(g, seed + 2, 0.0, 2.0, 1.0).unwrap();
        let lhs = dealiased_product(&a.axpy(alpha, &b).unwrap(), &c).unwrap();
        let rhs = dealiased_product(&a, &c).unwrap().axpy(alpha, &dealiased_product(&b, &c).unwrap()).unwrap();
        let err = lhs.axpy(-1.0, &rhs).unwrap().energy().sqrt();
        prop_assert!(err <= 1e-12 * (1.0 + rhs.energy().sqrt()));
    }

    #[test]
    fn round_trip_property(seed in 0u64..10_000) {
        let g = grid(8);
        let phys = random_physical(g, seed);
        let back = to_physical(&to_spectral(&phys));
        for c in 0..3 {
            for (x, y) in back.component(c).iter().zip(phys.component(c)) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn oversampling_recovers_off_lattice_peak() {
    let g = grid(8);
    let shift = 0.3;
    let u = to_spectral(&PhysicalField::from_fn(g, |x| {
        [(x[0] + shift).sin(), 0.0, 0.0]
    }));
    let lattice = lp_norm(&to_physical(&u), Exponent::Infinity);
    assert_eq!(oversampled_linf(&u, 1).unwrap(), lattice);
    let coarse = oversampled_linf(&u, 2).unwrap();
    let fine = oversampled_linf(&u, 16).unwrap();
    assert!(lattice < coarse && coarse <= fine && fine <= 1.0 + 1e-12);
    // sin(x + 0.3) peaks at x = pi/2 - 0.3, between 1/16-spaced points.
    let step = 2.0 * PI / 128.0;
    let nearest = ((PI / 2.0 - shift) / step).round() * step + shift;
    assert!((fine - nearest.sin()).abs() < 1e-12);
    assert!(oversampled_linf(&u, 0).is_err());
}

#[test]
fn oversampling_keeps_nyquist_real() {
    let g = grid(8);
    let u = to_spectral(&PhysicalField::from_fn(g, |x| {
        [0.0, (4.0 * x[1]).cos(), 0.0]
    }));
    assert!((oversampled_linf(&u, 2).unwrap() - 1.0).abs() < 1e-12);
    assert!((oversampled_linf(&u, 4).unwrap() - 1.0).abs() < 1e-12);
}
