mod common;

use std::f64::consts::PI;

use common::sp2;
use num_complex::Complex64;
use trotter_lab::grid::GridSpec;
use trotter_lab::rng::SplitMix64;
use trotter_lab::tfa::{mod_norm, NormKind};
use trotter_lab::trotter::kernel_norm_spec;
use trotter_lab::weyl::{
    compose_with_flow, default_probes, fio_conjugation_residual, symbol_of_kernel, symplectic_covariance_residual,
    twisted_product, weyl_quantize, SymbolField,
};

/// random trig polynomial in (x, xi); x-modes are even so the symbol is
/// L-periodic, which the wrapped diagonals of a periodic kernel require
fn random_symbol(g: GridSpec, rng: &mut SplitMix64, band: i64) -> SymbolField {
    let l = g.half_width();
    let lxi = g.points() as f64 / (4.0 * l);
    let mut terms = Vec::new();
    for _ in 0..6 {
        let p = 2.0 * rng.range_i64(-band / 2, band / 2) as f64 / (2.0 * l);
        let q = rng.range_i64(-band, band) as f64 / (2.0 * lxi);
        terms.push((p, q, Complex64::new(rng.normal(), rng.normal()) / 3.0));
    }
    SymbolField::from_fn(g, |x, xi| {
        terms.iter().map(|&(p, q, c)| c * Complex64::from_polar(1.0, 2.0 * PI * (p * x + q * xi))).sum()
    })
    .unwrap()
}

fn rel_err(a: &SymbolField, b: &SymbolField) -> f64 {
    a.sub(b).unwrap().max_abs() / b.max_abs()
}

#[test]
fn round_trip_and_associativity() {
    let g = GridSpec::new(1, 4.0, 64).unwrap();
    let mut rng = SplitMix64::new(21);
    for _ in 0..5 {
        let (a, b, c) = (random_symbol(g, &mut rng, 6), random_symbol(g, &mut rng, 6), random_symbol(g, &mut rng, 6));
        let back = symbol_of_kernel(&weyl_quantize(&a).unwrap()).unwrap();
        assert!(rel_err(&back, &a) < 1e-8);
        let left = twisted_product(&twisted_product(&a, &b).unwrap(), &c).unwrap();
        let right = twisted_product(&a, &twisted_product(&b, &c).unwrap()).unwrap();
        assert!(rel_err(&left, &right) < 1e-6);
    }
}

#[test]
fn flow_composition_is_a_right_action() {
    let g = GridSpec::new(1, 6.0, 128).unwrap();
    let sigma = SymbolField::from_fn(g, |x, xi| {
        Complex64::new((-PI * (x * x + xi * xi) / 2.0).exp() * (2.0 * PI * (x - 0.5 * xi)).cos(), 0.0)
    })
    .unwrap();
    let (s1, s2) = (sp2(1.1, 0.3, -0.2), sp2(0.9, -0.4, 0.25));
    let once = compose_with_flow(&sigma, &s1.compose(&s2)).unwrap();
    let twice = compose_with_flow(&compose_with_flow(&sigma, &s1).unwrap(), &s2).unwrap();
    assert!(rel_err(&twice, &once) < 1e-6, "{}", rel_err(&twice, &once));
}

#[test]
fn twisted_product_submultiplicative() {
    // N = 4L^2 makes the x and xi nodes coincide, so symbols are fields on
    // one square 2d grid
    let g = GridSpec::new(1, 4.0, 64).unwrap();
    let spec = kernel_norm_spec(&g, 4.0, 0.0).unwrap();
    let norm = |s: &SymbolField| mod_norm(&s.as_field_2d().unwrap(), &spec, NormKind::Inf1).unwrap();
    let mut rng = SplitMix64::new(8);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let (a, b) = (random_symbol(g, &mut rng, 4), random_symbol(g, &mut rng, 4));
        let ab = twisted_product(&a, &b).unwrap();
        worst = worst.max(norm(&ab) / (norm(&a) * norm(&b)));
    }
    assert!(worst.is_finite() && worst < 4.0, "{worst}");
}

#[test]
fn covariance_and_fio_residuals() {
    let g = GridSpec::new(1, 6.0, 256).unwrap();
    let probes = default_probes(g);
    let sigma = SymbolField::from_fn(g, |x, xi| {
        Complex64::new((-PI * (x * x + xi * xi) / 8.0).exp() * (2.0 * PI * x).cos(), 0.0)
    })
    .unwrap();
    let s = sp2(1.2, 0.5, 0.3);
    assert!(symplectic_covariance_residual(&sigma, &s, &probes).unwrap() < 1e-3);
    assert!(fio_conjugation_residual(&sigma, &s, &probes).unwrap() < 1e-3);
}
