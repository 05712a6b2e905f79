mod common;

use std::f64::consts::PI;

use common::{packet, sp2};
use num_complex::Complex64;
use trotter_lab::grid::{compact_indices, GridSpec};
use trotter_lab::metaplectic::{mehler_oracle, resolve_phase, Method, MetaplecticPropagator, PhaseMode};
use trotter_lab::symplectic::{flow, QuadraticHamiltonian};

fn grid() -> GridSpec {
    GridSpec::new(1, 6.0, 256).unwrap()
}

#[test]
fn free_kernel_is_fresnel() {
    let g = grid();
    let h = QuadraticHamiltonian::free_particle(1);
    let t = 1.0;
    let k = MetaplecticPropagator::for_flow(&h, t, g, Method::Quadrature, PhaseMode::Resolve(64)).unwrap().kernel().unwrap();
    let xs = g.coords();
    let idx = compact_indices(&g, 3.0);
    let mut worst = 0.0f64;
    for &i in &idx {
        for &j in &idx {
            let (x, y) = (xs[i], xs[j]);
            let want = Complex64::new(0.0, 2.0 * PI * t).powf(-0.5) * Complex64::from_polar(1.0, (x - y).powi(2) / (2.0 * t));
            worst = worst.max((k.get(i, j) - want).norm() / want.norm());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn mehler_paths_agree() {
    let g = grid();
    for t in [0.4, 1.0, 2.5, -1.2] {
        let m = mehler_oracle(t, g, PhaseMode::Resolve(64)).unwrap();
        let p = MetaplecticPropagator::for_flow(&QuadraticHamiltonian::harmonic_oscillator(1), t, g, Method::Quadrature, PhaseMode::Resolve(64)).unwrap();
        let k = p.kernel().unwrap();
        assert!(k.sub(&m).unwrap().max_abs() < 1e-10 * m.max_abs(), "t = {t}");
        assert!(((k.max_abs() - t.sin().abs().powf(-0.5)) / k.max_abs()).abs() < 1e-12);
    }
}

#[test]
fn unitary_on_packets() {
    let g = grid();
    let h = QuadraticHamiltonian::harmonic_oscillator(1);
    for t in [0.6, 1.0, 2.0, 4.0] {
        let mu = MetaplecticPropagator::for_flow(&h, t, g, Method::FastChirpFFT, PhaseMode::Resolve(64)).unwrap();
        for (x0, xi0) in [(0.0, 0.0), (1.5, -1.0), (-1.0, 2.0)] {
            let f = packet(g, x0, xi0);
            let a = packet(g, 0.5, 0.5);
            let lhs = mu.apply(&f).unwrap().inner(&mu.apply(&a).unwrap()).unwrap();
            let rhs = f.inner(&a).unwrap();
            assert!((lhs - rhs).norm() < 1e-8, "t = {t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn packets_follow_the_flow() {
    let g = grid();
    let h = QuadraticHamiltonian::harmonic_oscillator(1);
    for t in [0.7, 1.9] {
        let mu = MetaplecticPropagator::for_flow(&h, t, g, Method::FastChirpFFT, PhaseMode::Resolve(64)).unwrap();
        let s = flow(&h, t);
        for z in [(1.0, 0.0), (0.0, 1.0), (1.0, -0.5)] {
            let (x, xi) = s.apply(&[z.0], &[z.1]);
            let overlap = mu.apply(&packet(g, z.0, z.1)).unwrap().inner(&packet(g, x[0], xi[0])).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-8, "t = {t}, z = {z:?}: {overlap}");
        }
    }
}

#[test]
fn semigroup_with_resolved_phase() {
    let g = grid();
    let h = QuadraticHamiltonian::harmonic_oscillator(1);
    // every |sin| stays above 2Lh so the quadrature sums do not alias;
    // (2.2, 2.0) crosses the exceptional time pi
    for (s, t) in [(0.7, 0.9), (2.2, 2.0), (-0.8, 1.7)] {
        let mu = |tt: f64| MetaplecticPropagator::for_flow(&h, tt, g, Method::FastChirpFFT, PhaseMode::Resolve(64)).unwrap();
        let f = packet(g, 0.5, -0.5);
        let two = mu(s).apply(&mu(t).apply(&f).unwrap()).unwrap();
        let one = mu(s + t).apply(&f).unwrap();
        assert!(two.sub(&one).unwrap().norm_l2() < 1e-8, "s = {s}, t = {t}");
    }
}

#[test]
fn phase_of_full_turn() {
    // mu(A_{2 pi}) = -1 for the oscillator: the metaplectic double cover
    let h = QuadraticHamiltonian::harmonic_oscillator(1);
    let c2 = resolve_phase(&h, 2.0 * PI + 0.3, 64).unwrap();
    let c0 = resolve_phase(&h, 0.3, 64).unwrap();
    assert!((c2 + c0).norm() < 1e-12, "{c2} {c0}");
}

#[test]
fn general_free_matrix() {
    let g = grid();
    let s = sp2(1.2, 0.5, 0.3);
    let q = MetaplecticPropagator::build(&s, g, Method::Quadrature).unwrap();
    let fst = MetaplecticPropagator::build(&s, g, Method::FastChirpFFT).unwrap();
    let f = packet(g, 0.3, 0.4);
    let a = q.apply(&f).unwrap();
    let b = fst.apply(&f).unwrap();
    assert!(a.sub(&b).unwrap().norm_l2() < 1e-10 * a.norm_l2());
    let back = fst.inverse().unwrap().apply(&b).unwrap();
    assert!(back.sub(&f).unwrap().norm_l2() < 1e-8);
}
