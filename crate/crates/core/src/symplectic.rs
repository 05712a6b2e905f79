//! Quadratic Hamiltonians, their linear flows in Sp(d, R) and the generating
//! quadratic form of a free symplectic matrix.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{expm, guarded_inverse, max_abs, RealMatrix};
use crate::tolerances::{FREE_TOL_FACTOR, ROOT_TOL};

/// Symbol a(x, xi) = 1/2 x.Ax + xi.Bx + 1/2 xi.Cxi.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    dim: usize,
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
}

impl QuadraticHamiltonian {
    pub fn new(a: RealMatrix, b: RealMatrix, c: RealMatrix) -> Result<Self> {
        let d = a.nrows();
        if d == 0 {
            return Err(Error::InvalidArgument("empty Hamiltonian".into()));
        }
        for m in [&a, &b, &c] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.nrows().max(m.ncols()),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite Hamiltonian entry".into()));
            }
        }
        if a != a.transpose() || c != c.transpose() {
            return Err(Error::InvalidArgument("A and C must be symmetric".into()));
        }
        Ok(Self { dim: d, a, b, c })
    }

    /// a = pi(|x|^2 + |xi|^2), whose flow is the rotation by angle t.
    pub fn harmonic_oscillator(d: usize) -> Self {
        let two_pi = RealMatrix::identity(d, d) * (2.0 * PI);
        Self::new(two_pi.clone(), RealMatrix::zeros(d, d), two_pi).unwrap()
    }

    /// a = 2 pi^2 |xi|^2, the Weyl symbol of -Delta/2.
    pub fn free_particle(d: usize) -> Self {
        let c = RealMatrix::identity(d, d) * (4.0 * PI * PI);
        Self::new(RealMatrix::zeros(d, d), RealMatrix::zeros(d, d), c).unwrap()
    }

    pub fn zero(d: usize) -> Self {
        let z = RealMatrix::zeros(d, d);
        Self::new(z.clone(), z.clone(), z).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn mat_a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn mat_b(&self) -> &RealMatrix {
        &self.b
    }
    pub fn mat_c(&self) -> &RealMatrix {
        &self.c
    }

    pub fn symbol(&self, x: &[f64], xi: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        let xi = DVector::from_column_slice(xi);
        0.5 * x.dot(&(&self.a * &x)) + xi.dot(&(&self.b * &x)) + 0.5 * xi.dot(&(&self.c * &xi))
    }
}

/// A 2d x 2d matrix [[A, B], [C, D]] acting on (x, xi).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticBlocks {
    dim: usize,
    a: RealMatrix,
    b: RealMatrix,
    c: RealMatrix,
    d: RealMatrix,
}

impl SymplecticBlocks {
    pub fn from_blocks(a: RealMatrix, b: RealMatrix, c: RealMatrix, d: RealMatrix) -> Self {
        let dim = a.nrows();
        Self { dim, a, b, c, d }
    }

    pub fn from_matrix(m: &RealMatrix) -> Self {
        let dim = m.nrows() / 2;
        Self {
            dim,
            a: m.view((0, 0), (dim, dim)).into_owned(),
            b: m.view((0, dim), (dim, dim)).into_owned(),
            c: m.view((dim, 0), (dim, dim)).into_owned(),
            d: m.view((dim, dim), (dim, dim)).into_owned(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(&RealMatrix::identity(2 * dim, 2 * dim))
    }

    pub fn to_matrix(&self) -> RealMatrix {
        let n = self.dim;
        let mut m = RealMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.a);
        m.view_mut((0, n), (n, n)).copy_from(&self.b);
        m.view_mut((n, 0), (n, n)).copy_from(&self.c);
        m.view_mut((n, n), (n, n)).copy_from(&self.d);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn block_a(&self) -> &RealMatrix {
        &self.a
    }
    pub fn block_b(&self) -> &RealMatrix {
        &self.b
    }
    pub fn block_c(&self) -> &RealMatrix {
        &self.c
    }
    pub fn block_d(&self) -> &RealMatrix {
        &self.d
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_matrix(&(self.to_matrix() * other.to_matrix()))
    }

    /// Symplectic inverse -J M^T J, i.e. [[D^T, -B^T], [-C^T, A^T]].
    pub fn inverse(&self) -> Self {
        Self::from_blocks(
            self.d.transpose(),
            -self.b.transpose(),
            -self.c.transpose(),
            self.a.transpose(),
        )
    }

    pub fn apply(&self, x: &[f64], xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let x = DVector::from_column_slice(x);
        let xi = DVector::from_column_slice(xi);
        let nx = &self.a * &x + &self.b * &xi;
        let nxi = &self.c * &x + &self.d * &xi;
        (nx.as_slice().to_vec(), nxi.as_slice().to_vec())
    }

    /// Max entry of M^T J M - J.
    pub fn symplectic_defect(&self) -> f64 {
        let m = self.to_matrix();
        let j = symplectic_form(self.dim);
        max_abs(&(m.transpose() * &j * &m - j))
    }
}

/// J = [[0, I], [-I, 0]].
pub fn symplectic_form(d: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        j[(i, d + i)] = 1.0;
        j[(d + i, i)] = -1.0;
    }
    j
}

/// Hamiltonian matrix [[B, C], [-A, -B^T]] of the quadratic symbol.
pub fn lie_generator(h: &QuadraticHamiltonian) -> RealMatrix {
    let d = h.dim;
    let mut m = RealMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&h.b);
    m.view_mut((0, d), (d, d)).copy_from(&h.c);
    m.view_mut((d, 0), (d, d)).copy_from(&(-&h.a));
    m.view_mut((d, d), (d, d)).copy_from(&(-h.b.transpose()));
    m
}

/// exp((t / 2pi) * generator).
pub fn flow(h: &QuadraticHamiltonian, t: f64) -> SymplecticBlocks {
    if t == 0.0 {
        return SymplecticBlocks::identity(h.dim);
    }
    SymplecticBlocks::from_matrix(&expm(&(lie_generator(h) * (t / (2.0 * PI)))))
}

/// `1e-8 * max(|S|_max, 1)^d`, the scale of det B for a matrix of this size.
pub fn default_free_tol(s: &SymplecticBlocks) -> f64 {
    FREE_TOL_FACTOR * max_abs(&s.to_matrix()).max(1.0).powi(s.dim as i32)
}

pub fn is_free(s: &SymplecticBlocks, tol: f64) -> (bool, f64) {
    let det = s.b.clone().lu().determinant();
    (det.abs() > tol, det)
}

/// Phi(x, y) = 1/2 x.m_xx x - y.m_xy x + 1/2 y.m_yy y.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseQuadratic {
    pub dim: usize,
    pub m_xx: RealMatrix,
    pub m_xy: RealMatrix,
    pub m_yy: RealMatrix,
}

impl PhaseQuadratic {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += 0.5 * x[i] * self.m_xx[(i, j)] * x[j] - y[i] * self.m_xy[(i, j)] * x[j]
                    + 0.5 * y[i] * self.m_yy[(i, j)] * y[j];
            }
        }
        s
    }

    pub fn negated(&self) -> Self {
        Self {
            dim: self.dim,
            m_xx: -&self.m_xx,
            m_xy: -&self.m_xy,
            m_yy: -&self.m_yy,
        }
    }

    pub fn xy_is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.m_xy[(i, j)] == 0.0))
    }
}

pub fn phase_form(s: &SymplecticBlocks) -> Result<PhaseQuadratic> {
    let (free, det_b) = is_free(s, default_free_tol(s));
    if !free {
        return Err(Error::NotFree { det_b });
    }
    let b_inv = guarded_inverse(&s.b)?;
    let m_xx = &s.d * &b_inv;
    let m_yy = &b_inv * &s.a;
    let scale = max_abs(&m_xx).max(max_abs(&m_yy)).max(1.0);
    for m in [&m_xx, &m_yy] {
        let asym = max_abs(&(m - m.transpose()));
        if asym > 1e-8 * scale {
            return Err(Error::InvalidArgument(format!(
                "phase block not symmetric (defect {asym:e}); is the matrix symplectic?"
            )));
        }
    }
    // symmetrize away the rounding residue
    Ok(PhaseQuadratic {
        dim: s.dim,
        m_xx: (&m_xx + m_xx.transpose()) * 0.5,
        m_xy: b_inv,
        m_yy: (&m_yy + m_yy.transpose()) * 0.5,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

impl TimeInterval {
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

fn det_b_at(h: &QuadraticHamiltonian, t: f64) -> f64 {
    flow(h, t).b.lu().determinant()
}

/// Intervals inside `range` where |det B_t| <= tol, found by sampling with
/// `step`, locating sign changes and grazing minima, and bisecting the
/// interval edges to `ROOT_TOL`.
pub fn exceptional_times(
    h: &QuadraticHamiltonian,
    range: (f64, f64),
    step: f64,
    tol: f64,
) -> Result<Vec<TimeInterval>> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument(format!("scan step must be positive, got {step}")));
    }
    let (lo, hi) = range;
    if !(hi > lo) {
        return Ok(Vec::new());
    }
    let count = ((hi - lo) / step).ceil() as usize;
    let ts: Vec<f64> = (0..=count).map(|k| (lo + k as f64 * step).min(hi)).collect();
    let dets: Vec<f64> = ts.iter().map(|&t| det_b_at(h, t)).collect();
    let g = |t: f64| det_b_at(h, t).abs();

    let mut seeds = Vec::new();
    for k in 0..ts.len() {
        if dets[k].abs() <= tol {
            seeds.push(ts[k]);
        }
        if k + 1 < ts.len() && dets[k].signum() * dets[k + 1].signum() < 0.0 {
            let (mut a, mut b) = (ts[k], ts[k + 1]);
            let fa = dets[k];
            while b - a > ROOT_TOL {
                let m = 0.5 * (a + b);
                if det_b_at(h, m).signum() == fa.signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            seeds.push(0.5 * (a + b));
        }
        if k > 0 && k + 1 < ts.len() {
            let (l, c, r) = (dets[k - 1].abs(), dets[k].abs(), dets[k + 1].abs());
            if c <= l && c <= r && dets[k - 1].signum() == dets[k + 1].signum() {
                let t = golden_min(&g, ts[k - 1], ts[k + 1]);
                if g(t) <= tol {
                    seeds.push(t);
                }
            }
        }
    }

    let mut out: Vec<TimeInterval> = Vec::new();
    for s in seeds {
        if out.iter().any(|iv| iv.contains(s)) {
            continue;
        }
        let start = edge(&g, s, lo, step, tol, -1.0);
        let end = edge(&g, s, hi, step, tol, 1.0);
        out.push(TimeInterval { start, end });
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut merged: Vec<TimeInterval> = Vec::new();
    for iv in out {
        match merged.last_mut() {
            Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
            _ => merged.push(iv),
        }
    }
    Ok(merged)
}

/// Walk from `s` toward `limit` until g > tol, then bisect the crossing.
fn edge(g: &impl Fn(f64) -> f64, s: f64, limit: f64, step: f64, tol: f64, dir: f64) -> f64 {
    let mut inside = s;
    loop {
        let probe = inside + dir * step;
        let past = if dir > 0.0 { probe >= limit } else { probe <= limit };
        let probe = if past { limit } else { probe };
        if g(probe) > tol {
            let (mut a, mut b) = (inside, probe);
            while (b - a).abs() > ROOT_TOL {
                let m = 0.5 * (a + b);
                if g(m) <= tol {
                    a = m;
                } else {
                    b = m;
                }
            }
            return a;
        }
        if past {
            return limit;
        }
        inside = probe;
    }
}

fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > ROOT_TOL {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(v: f64) -> RealMatrix {
        RealMatrix::from_element(1, 1, v)
    }

    #[test]
    fn generators() {
        let g = lie_generator(&QuadraticHamiltonian::harmonic_oscillator(1));
        assert_eq!(g, RealMatrix::from_row_slice(2, 2, &[0.0, 2.0 * PI, -2.0 * PI, 0.0]));
        let g = lie_generator(&QuadraticHamiltonian::free_particle(1));
        assert_eq!(g, RealMatrix::from_row_slice(2, 2, &[0.0, 4.0 * PI * PI, 0.0, 0.0]));
        assert_eq!(lie_generator(&QuadraticHamiltonian::zero(2)), RealMatrix::zeros(4, 4));
    }

    #[test]
    fn generator_in_sp() {
        let h = QuadraticHamiltonian::new(
            RealMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0]),
            RealMatrix::from_row_slice(2, 2, &[0.5, -1.0, 0.2, 0.1]),
            RealMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 1.5]),
        )
        .unwrap();
        let m = lie_generator(&h);
        let j = symplectic_form(2);
        assert!(max_abs(&(&m * &j + &j * m.transpose())) < 1e-15);
    }

    #[test]
    fn harmonic_quarter_turn() {
        let s = flow(&QuadraticHamiltonian::harmonic_oscillator(1), PI / 2.0);
        assert!((s.block_a()[(0, 0)]).abs() < 1e-14);
        assert!((s.block_b()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((s.block_c()[(0, 0)] + 1.0).abs() < 1e-14);
        assert!((s.block_d()[(0, 0)]).abs() < 1e-14);
    }

    #[test]
    fn free_flow_closed_form() {
        let t = 1.7;
        let s = flow(&QuadraticHamiltonian::free_particle(1), t);
        let expect = RealMatrix::from_row_slice(2, 2, &[1.0, 2.0 * PI * t, 0.0, 1.0]);
        assert!(max_abs(&(s.to_matrix() - expect)) < 1e-13);
    }

    #[test]
    fn freeness() {
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let s = flow(&h, PI);
        let (free, det) = is_free(&s, default_free_tol(&s));
        assert!(!free && det.abs() < 1e-14);
        let s = flow(&h, PI / 2.0);
        let (free, det) = is_free(&s, default_free_tol(&s));
        assert!(free && (det - 1.0).abs() < 1e-14);
        let (free, det) = is_free(&SymplecticBlocks::identity(1), 1e-8);
        assert!(!free && det == 0.0);
    }

    #[test]
    fn phase_forms() {
        let t = 0.8;
        let p = phase_form(&flow(&QuadraticHamiltonian::free_particle(1), t)).unwrap();
        let k = 1.0 / (2.0 * PI * t);
        for m in [&p.m_xx, &p.m_xy, &p.m_yy] {
            assert!((m[(0, 0)] - k).abs() < 1e-13);
        }
        // 2 pi Phi equals the free kernel phase (x - y)^2 / (2t)
        let (x, y) = (0.37, -1.2);
        assert!((2.0 * PI * p.eval(&[x], &[y]) - (x - y).powi(2) / (2.0 * t)).abs() < 1e-13);

        let p = phase_form(&flow(&QuadraticHamiltonian::harmonic_oscillator(1), t)).unwrap();
        assert!((p.m_xx[(0, 0)] - t.cos() / t.sin()).abs() < 1e-13);
        assert!((p.m_yy[(0, 0)] - t.cos() / t.sin()).abs() < 1e-13);
        assert!((p.m_xy[(0, 0)] - 1.0 / t.sin()).abs() < 1e-13);

        let singular = SymplecticBlocks::from_blocks(m1(1.0), m1(0.0), m1(0.3), m1(1.0));
        assert!(matches!(phase_form(&singular), Err(Error::NotFree { .. })));
    }

    #[test]
    fn harmonic_exceptional_scan() {
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let ivs = exceptional_times(&h, (0.1, 7.0), 0.05, 1e-6).unwrap();
        assert_eq!(ivs.len(), 2);
        for (iv, k) in ivs.iter().zip([1.0, 2.0]) {
            assert!(iv.contains(k * PI));
            assert!(iv.end - iv.start < 1e-5);
        }
        let free = QuadraticHamiltonian::free_particle(1);
        assert!(exceptional_times(&free, (0.1, 7.0), 0.05, 1e-6).unwrap().is_empty());
        assert!(exceptional_times(&h, (2.0, 2.0), 0.05, 1e-6).unwrap().is_empty());
    }

    #[test]
    fn grazing_zero_found() {
        // det B_t = sin^2 t for the 2d oscillator: touches zero without a sign change
        let h = QuadraticHamiltonian::harmonic_oscillator(2);
        let ivs = exceptional_times(&h, (0.1, 4.0), 0.07, 1e-9).unwrap();
        assert_eq!(ivs.len(), 1);
        assert!(ivs[0].contains(PI));
    }
}
