mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use trotter_lab::grid::{dft, translate, Direction, GridSpec, SampledField};
use trotter_lab::linalg::{expm, max_abs};
use trotter_lab::symplectic::{flow, lie_generator, symplectic_form, QuadraticHamiltonian};
use trotter_lab::tfa::{stft, stft_adjoint, StftSpec};
use trotter_lab::weyl::{symbol_of_kernel, weyl_quantize, SymbolField};

fn hamiltonian() -> impl Strategy<Value = QuadraticHamiltonian> {
    (1usize..=3).prop_flat_map(|d| {
        (
            prop::collection::vec(-2.0f64..2.0, d * d),
            prop::collection::vec(-2.0f64..2.0, d * d),
            prop::collection::vec(-2.0f64..2.0, d * d),
        )
            .prop_map(move |(a, b, c)| {
                let sym = |v: Vec<f64>| {
                    let m = DMatrix::from_vec(d, d, v);
                    (&m + m.transpose()) * 0.5
                };
                QuadraticHamiltonian::new(sym(a), DMatrix::from_vec(d, d, b), sym(c)).unwrap()
            })
    })
}

fn field(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_is_symplectic(h in hamiltonian(), t in -10.0f64..10.0) {
        prop_assert!(flow(&h, t).symplectic_defect() <= 1e-10);
    }

    #[test]
    fn generator_is_hamiltonian(h in hamiltonian()) {
        // J X is symmetric for X in sp(2d)
        let jx = symplectic_form(h.dim()) * lie_generator(&h);
        prop_assert!(max_abs(&(&jx - jx.transpose())) <= 1e-12);
    }

    #[test]
    fn exponential_of_sums(h in hamiltonian(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let x = lie_generator(&h);
        let lhs = expm(&(&x * s)) * expm(&(&x * t));
        let rhs = expm(&(&x * (s + t)));
        prop_assert!(max_abs(&(lhs - &rhs)) <= 1e-8 * max_abs(&rhs).max(1.0));
    }

    #[test]
    fn parseval(v in field(64)) {
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        let f = SampledField::new(g, v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let ff = dft(&f, Direction::Forward);
        let energy: f64 = ff.values().iter().map(|c| c.norm_sqr()).sum::<f64>() * g.freq_spacing();
        prop_assert!((energy - f.norm_l2().powi(2)).abs() <= 1e-10 * energy.max(1e-12));
        let back = dft(&ff, Direction::Inverse);
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn translation_is_an_isometry_on_compact_data(k in -8i64..8, x0 in -1.0f64..1.0) {
        let g = GridSpec::new(1, 6.0, 128).unwrap();
        let f = common::packet(g, x0, 0.5);
        let shift = k as f64 * g.spacing();
        let tf = translate(&f, &[shift]).unwrap();
        prop_assert!((tf.norm_l2() - f.norm_l2()).abs() < 1e-9);
    }

    #[test]
    fn stft_inverts(v in field(32)) {
        let g = GridSpec::new(1, 3.0, 32).unwrap();
        let spec = StftSpec::dense(g);
        let f = SampledField::new(g, v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
        let back = stft_adjoint(&stft(&f, &spec).unwrap(), &spec).unwrap();
        prop_assert!(back.sub(&f).unwrap().norm_l2() <= 1e-8 * f.norm_l2().max(1e-12));
    }

    #[test]
    fn weyl_round_trip(p in -3i64..=3, q in -5i64..=5, c in (-1.0f64..1.0, -1.0f64..1.0)) {
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        let (pp, qq) = (2.0 * p as f64 / 8.0, q as f64 / 8.0);
        let amp = Complex64::new(c.0, c.1);
        let s = SymbolField::from_fn(g, |x, xi| amp * Complex64::from_polar(1.0, 2.0 * PI * (pp * x + qq * xi))).unwrap();
        let back = symbol_of_kernel(&weyl_quantize(&s).unwrap()).unwrap();
        prop_assert!(back.sub(&s).unwrap().max_abs() <= 1e-8);
    }
}
