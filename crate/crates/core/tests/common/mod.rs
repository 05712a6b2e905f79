#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use trotter_lab::grid::{GridSpec, SampledField};
use trotter_lab::rng::SplitMix64;
use trotter_lab::symplectic::{QuadraticHamiltonian, SymplecticBlocks};

pub fn random_symmetric(rng: &mut SplitMix64, d: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(d, d, |_, _| rng.uniform(lo, hi));
    m = (&m + m.transpose()) * 0.5;
    m
}

pub fn random_hamiltonian(rng: &mut SplitMix64, d: usize) -> QuadraticHamiltonian {
    let a = random_symmetric(rng, d, -2.0, 2.0);
    let b = DMatrix::from_fn(d, d, |_, _| rng.uniform(-2.0, 2.0));
    let c = random_symmetric(rng, d, -2.0, 2.0);
    QuadraticHamiltonian::new(a, b, c).unwrap()
}

/// 1d symplectic [[a, b], [c, (1 + bc)/a]].
pub fn sp2(a: f64, b: f64, c: f64) -> SymplecticBlocks {
    let m = |v: f64| DMatrix::from_element(1, 1, v);
    SymplecticBlocks::from_blocks(m(a), m(b), m(c), m((1.0 + b * c) / a))
}

pub fn packet(grid: GridSpec, x0: f64, xi0: f64) -> SampledField {
    SampledField::from_fn(grid, |x| {
        let u = x[0] - x0;
        Complex64::from_polar(2f64.powf(0.25) * (-PI * u * u).exp(), 2.0 * PI * xi0 * x[0])
    })
}

/// Random combination of grid-periodic modes |k| <= band.
pub fn random_band_limited(grid: GridSpec, rng: &mut SplitMix64, band: usize) -> SampledField {
    let l = grid.half_width();
    let modes: Vec<(f64, Complex64)> = (0..=2 * band)
        .map(|j| ((j as f64 - band as f64) / (2.0 * l), Complex64::new(rng.normal(), rng.normal())))
        .collect();
    SampledField::from_fn(grid, |x| {
        modes.iter().map(|(k, c)| c * Complex64::from_polar(1.0, 2.0 * PI * k * x[0])).sum()
    })
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
