//! Uniform centred grids, sampled fields, the continuum-normalized DFT and
//! kernel matrices with rectangle-rule quadrature.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::CenteredFft;
use crate::linalg::cmatmul;
use crate::tolerances::TRIG_CUTOFF;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Grid x_i = -L + i h, h = 2L/N, on each of `dim` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=2")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        Ok(Self { dim, half_width, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }
    pub fn freq_spacing(&self) -> f64 {
        0.5 / self.half_width
    }
    /// Total number of samples N^d.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    pub fn freq_cell(&self) -> f64 {
        self.freq_spacing().powi(self.dim as i32)
    }
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }
    pub fn freq(&self, k: usize) -> f64 {
        (k as f64 - (self.points / 2) as f64) * self.freq_spacing()
    }
    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }
    pub fn freqs(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.freq(k)).collect()
    }
    /// Per-axis indices of a flat row-major index.
    pub fn unravel(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.points, idx % self.points]
        }
    }
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unravel(idx);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }
    pub fn frequency(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unravel(idx);
        if self.dim == 1 {
            [self.freq(i), 0.0]
        } else {
            [self.freq(i), self.freq(j)]
        }
    }
    /// Grid index of x if x is (to rounding) a node.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = (x + self.half_width) / self.spacing();
        let i = r.round();
        if (r - i).abs() < 1e-9 && i >= 0.0 && (i as usize) < self.points {
            Some(i as usize)
        } else {
            None
        }
    }
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Complex samples f(x_i), row-major over axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("field has non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![ZERO; grid.len()] }
    }

    /// Samples `f` at the grid nodes; the closure receives a d-slice.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let d = grid.dim();
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.position(idx);
                f(&p[..d])
            })
            .collect();
        Self { grid, values }
    }

    /// Discrete delta 1/h^d at node `idx`.
    pub fn delta(grid: GridSpec, idx: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.values[idx] = Complex64::new(1.0 / grid.cell(), 0.0);
        f
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// sqrt(h^d sum |f|^2).
    pub fn norm_l2(&self) -> f64 {
        (self.grid.cell() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.grid.cell() * self.values.iter().map(|v| v.norm()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// h^d sum f conj(g).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_grid(&self.grid, &other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum::<Complex64>()
            * self.grid.cell())
    }
}

pub(crate) fn check_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a != b {
        return Err(Error::InvalidGrid(format!("grid mismatch: {a:?} vs {b:?}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// e^{-2pi i x xi}, scaled by h^d.
    Forward,
    /// e^{+2pi i x xi}, scaled by (1/2L)^d.
    Inverse,
}

/// Centred transform along every axis of a row-major N^d array.
pub(crate) fn centred_transform(values: &mut [Complex64], n: usize, dim: usize, dir: Direction) {
    centred_transform_with(&CenteredFft::new(n), values, dim, dir)
}

pub(crate) fn centred_transform_with(plan: &CenteredFft, values: &mut [Complex64], dim: usize, dir: Direction) {
    let n = plan.len();
    let run = |buf: &mut [Complex64]| match dir {
        Direction::Forward => plan.forward(buf),
        Direction::Inverse => plan.inverse(buf),
    };
    run(values);
    if dim == 2 {
        let mut col = vec![ZERO; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = values[i * n + j];
            }
            run(&mut col);
            for i in 0..n {
                values[i * n + j] = col[i];
            }
        }
    }
}

/// Continuum-normalized DFT; the output lives on the frequency grid
/// xi_k = (k - N/2) / (2L) but is stored in the same `SampledField` type.
pub fn dft(f: &SampledField, dir: Direction) -> SampledField {
    let g = f.grid;
    let mut values = f.values.clone();
    centred_transform(&mut values, g.points(), g.dim(), dir);
    let s = match dir {
        Direction::Forward => g.cell(),
        Direction::Inverse => g.freq_cell(),
    };
    for v in values.iter_mut() {
        *v *= s;
    }
    SampledField { grid: g, values }
}

/// (T_x0 f)(y) = f(y - x0) with zero fill; `shift` must be on-grid.
pub fn translate(f: &SampledField, shift: &[f64]) -> Result<SampledField> {
    let g = f.grid;
    if shift.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: shift.len() });
    }
    let mut steps = [0i64; 2];
    for (a, &s) in shift.iter().enumerate() {
        let r = s / g.spacing();
        if (r - r.round()).abs() > 1e-9 {
            return Err(Error::OffGrid { shift: s });
        }
        steps[a] = r.round() as i64;
    }
    let n = g.points() as i64;
    let mut out = SampledField::zeros(g);
    for idx in 0..g.len() {
        let [i, j] = g.unravel(idx);
        let si = i as i64 - steps[0];
        let sj = j as i64 - steps[1];
        if si < 0 || si >= n || sj < 0 || (g.dim() == 2 && sj >= n) {
            continue;
        }
        let src = if g.dim() == 1 { si as usize } else { si as usize * g.points() + sj as usize };
        out.values[idx] = f.values[src];
    }
    Ok(out)
}

/// (M_xi0 f)(y) = e^{2pi i xi0.y} f(y).
pub fn modulate(f: &SampledField, xi0: &[f64]) -> Result<SampledField> {
    let g = f.grid;
    if xi0.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: xi0.len() });
    }
    let mut out = f.clone();
    for (idx, v) in out.values.iter_mut().enumerate() {
        let p = g.position(idx);
        let ph: f64 = (0..g.dim()).map(|a| p[a] * xi0[a]).sum();
        *v *= Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * ph);
    }
    Ok(out)
}

/// Dense kernel with (Kf)(x_i) = sum_j K[i][j] f(y_j) h^d.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    grid: GridSpec,
    entries: Vec<Complex64>,
}

impl KernelMatrix {
    pub fn new(grid: GridSpec, entries: Vec<Complex64>) -> Result<Self> {
        let side = grid.len();
        if entries.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, found: entries.len() });
        }
        Ok(Self { grid, entries })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let side = grid.len();
        let entries = (0..side * side).into_par_iter().map(|e| f(e / side, e % side)).collect();
        Self { grid, entries }
    }

    /// Identity operator, entries I / h^d.
    pub fn identity(grid: GridSpec) -> Self {
        let w = 1.0 / grid.cell();
        Self::from_fn(grid, |i, j| if i == j { Complex64::new(w, 0.0) } else { ZERO })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn side(&self) -> usize {
        self.grid.len()
    }
    pub fn weight(&self) -> f64 {
        self.grid.cell()
    }
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.side() + j]
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        check_grid(&self.grid, &f.grid)?;
        let side = self.side();
        let w = self.weight();
        let values = self
            .entries
            .par_chunks(side)
            .map(|row| row.iter().zip(&f.values).map(|(k, v)| k * v).sum::<Complex64>() * w)
            .collect();
        Ok(SampledField { grid: self.grid, values })
    }

    /// Kernel of `self` after `other`: entries A B h^d.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        let n = self.side();
        let entries = cmatmul(&self.entries, &other.entries, n, n, n, Complex64::new(self.weight(), 0.0));
        Ok(Self { grid: self.grid, entries })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { grid: self.grid, entries: self.entries.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn column(&self, j: usize) -> SampledField {
        let side = self.side();
        SampledField { grid: self.grid, values: (0..side).map(|i| self.entries[i * side + j]).collect() }
    }

    /// Adjoint kernel conj(K(y, x)).
    pub fn adjoint(&self) -> Self {
        let n = self.side();
        Self::from_fn(self.grid, |i, j| self.entries[j * n + i].conj())
    }

    /// The kernel as a field on the 2d product grid (requires d = 1).
    pub fn as_field_2d(&self) -> Result<SampledField> {
        if self.grid.dim() != 1 {
            return Err(Error::DimensionUnsupported {
                what: "kernel as 2d field",
                supported: "1",
                found: self.grid.dim(),
            });
        }
        let g2 = GridSpec::new(2, self.grid.half_width(), self.grid.points())?;
        SampledField::new(g2, self.entries.clone())
    }
}

/// Columns are the operator applied to discrete deltas 1/h^d, computed in
/// parallel.
pub fn kernel_of_operator(
    apply: impl Fn(&SampledField) -> Result<SampledField> + Sync,
    grid: GridSpec,
) -> Result<KernelMatrix> {
    let side = grid.len();
    let cols: Vec<SampledField> = (0..side)
        .into_par_iter()
        .map(|j| apply(&SampledField::delta(grid, j)))
        .collect::<Result<_>>()?;
    let mut entries = vec![ZERO; side * side];
    for (j, col) in cols.iter().enumerate() {
        check_grid(&grid, col.grid())?;
        for i in 0..side {
            entries[i * side + j] = col.values[i];
        }
    }
    Ok(KernelMatrix { grid, entries })
}

/// Indices whose coordinates all satisfy |x| <= r.
pub fn compact_indices(grid: &GridSpec, r: f64) -> Vec<usize> {
    let d = grid.dim();
    (0..grid.len())
        .filter(|&idx| grid.position(idx)[..d].iter().all(|x| x.abs() <= r + 1e-12))
        .collect()
}

/// max |K1 - K2| over |x_i|, |y_j| <= r.
pub fn sup_norm_on_compact(k1: &KernelMatrix, k2: &KernelMatrix, r: f64) -> Result<f64> {
    if k1.side() != k2.side() {
        return Err(Error::DimensionMismatch { expected: k1.side(), found: k2.side() });
    }
    check_grid(&k1.grid, &k2.grid)?;
    if !(r < k1.grid.half_width()) {
        return Err(Error::InvalidArgument(format!("radius {r} must be below L")));
    }
    let idx = compact_indices(&k1.grid, r);
    let side = k1.side();
    let mut m = 0.0f64;
    for &i in &idx {
        for &j in &idx {
            m = m.max((k1.entries[i * side + j] - k2.entries[i * side + j]).norm());
        }
    }
    Ok(m)
}

/// Sparse Fourier series of a field viewed as periodic over the box,
/// f(x) = sum_k a_k e^{2pi i xi_k.x}. Exact at the nodes; between nodes it is
/// the trigonometric interpolant.
#[derive(Debug, Clone)]
pub struct TrigSeries {
    dim: usize,
    terms: Vec<([f64; 2], Complex64)>,
}

impl TrigSeries {
    pub fn from_field(f: &SampledField) -> Self {
        let g = *f.grid();
        let spec = dft(f, Direction::Forward);
        let scale = g.freq_cell();
        let nyq = -0.25 * g.points() as f64 * g.freq_spacing() * 2.0;
        let mut raw: Vec<([f64; 2], Complex64)> = Vec::new();
        for (idx, v) in spec.values().iter().enumerate() {
            let fr = g.frequency(idx);
            let a = v * scale;
            // split Nyquist coefficients symmetrically
            let parts: Vec<[f64; 2]> = {
                let mut ps = vec![fr];
                for ax in 0..g.dim() {
                    if (fr[ax] - nyq).abs() < 1e-12 * g.freq_spacing().max(1.0) {
                        let mut extra = Vec::new();
                        for p in &ps {
                            let mut q = *p;
                            q[ax] = -q[ax];
                            extra.push(q);
                        }
                        ps.extend(extra);
                    }
                }
                ps
            };
            let w = 1.0 / parts.len() as f64;
            for p in parts {
                raw.push((p, a * w));
            }
        }
        let amax = raw.iter().fold(0.0f64, |m, (_, a)| m.max(a.norm()));
        let terms = raw.into_iter().filter(|(_, a)| a.norm() > TRIG_CUTOFF * amax).collect();
        Self { dim: g.dim(), terms }
    }

    pub fn from_terms(dim: usize, terms: Vec<([f64; 2], Complex64)>) -> Self {
        Self { dim, terms }
    }

    pub fn terms(&self) -> &[([f64; 2], Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let tau = 2.0 * std::f64::consts::PI;
        self.terms
            .iter()
            .map(|(k, a)| {
                let ph: f64 = (0..self.dim).map(|ax| k[ax] * x[ax]).sum();
                a * Complex64::from_polar(1.0, tau * ph)
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_real(&self) -> bool {
        // real iff coefficients pair up as a(-k) = conj(a(k))
        let tol = 1e-12 * self.terms.iter().fold(0.0f64, |m, (_, a)| m.max(a.norm())).max(1e-300);
        self.terms.iter().all(|(k, a)| {
            let conj: Complex64 = self
                .terms
                .iter()
                .filter(|(q, _)| (0..self.dim).all(|ax| (q[ax] + k[ax]).abs() < 1e-9))
                .map(|(_, b)| b.conj())
                .sum();
            (conj - a).norm() <= tol
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn g1(l: f64, n: usize) -> GridSpec {
        GridSpec::new(1, l, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1, 1.0, 12).is_err());
        assert!(GridSpec::new(1, 1.0, 4).is_err());
        assert!(GridSpec::new(3, 1.0, 16).is_err());
        assert!(GridSpec::new(1, -1.0, 16).is_err());
        let g = g1(8.0, 256);
        assert!((g.spacing() * 256.0 - 16.0).abs() < 1e-14);
        assert_eq!(g.coord(128), 0.0);
        assert_eq!(g.freq(128), 0.0);
    }

    #[test]
    fn gaussian_is_self_dual() {
        let g = g1(8.0, 256);
        let f = SampledField::from_fn(g, |x| Complex64::new((-PI * x[0] * x[0]).exp(), 0.0));
        let ff = dft(&f, Direction::Forward);
        for k in 0..256 {
            let xi = g.freq(k);
            assert!((ff.values()[k] - (-PI * xi * xi).exp()).norm() < 1e-10);
        }
        let back = dft(&ff, Direction::Inverse);
        let err = back.sub(&f).unwrap().norm_l2() / f.norm_l2();
        assert!(err < 1e-12);
    }

    #[test]
    fn delta_and_plane_wave() {
        let g = g1(4.0, 64);
        let ff = dft(&SampledField::delta(g, 32), Direction::Forward);
        assert!(ff.values().iter().all(|v| (v - 1.0).norm() < 1e-13));
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * x[0]));
        let ff = dft(&f, Direction::Forward);
        let k = (0..64).max_by(|&a, &b| ff.values()[a].norm().total_cmp(&ff.values()[b].norm())).unwrap();
        assert!((g.freq(k) - 3.0).abs() < 1e-12);
        // direct quadrature at xi = 3
        let direct: Complex64 = (0..64)
            .map(|j| f.values()[j] * Complex64::from_polar(g.spacing(), -2.0 * PI * 3.0 * g.coord(j)))
            .sum();
        assert!((direct - ff.values()[k]).norm() < 1e-12);
    }

    #[test]
    fn two_dimensional_gaussian() {
        let g = GridSpec::new(2, 6.0, 128).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new((-PI * (x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), 0.0));
        let ff = dft(&f, Direction::Forward);
        for idx in (0..g.len()).step_by(37) {
            let [a, b] = g.frequency(idx);
            let expect = (-PI * a * a).exp() * (-PI * b * b / 2.0).exp() / 2f64.sqrt();
            assert!((ff.values()[idx] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn translate_and_modulate() {
        let g = g1(2.0, 16);
        let h = g.spacing();
        let t = translate(&SampledField::delta(g, 8), &[h]).unwrap();
        assert_eq!(t.values()[9], Complex64::new(1.0 / h, 0.0));
        assert!(matches!(translate(&t, &[0.3 * h]), Err(Error::OffGrid { .. })));
        let edge = translate(&SampledField::delta(g, 15), &[h]).unwrap();
        assert!(edge.values().iter().all(|v| v.norm() == 0.0));

        let f = SampledField::from_fn(g, |x| Complex64::new((-x[0] * x[0]).exp(), x[0]));
        let (x0, xi0) = (3.0 * h, 0.7);
        let tm = translate(&modulate(&f, &[xi0]).unwrap(), &[x0]).unwrap();
        let mt = modulate(&translate(&f, &[x0]).unwrap(), &[xi0]).unwrap();
        let phase = Complex64::from_polar(1.0, -2.0 * PI * xi0 * x0);
        for j in 0..16 {
            assert!((tm.values()[j] - phase * mt.values()[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn kernels_of_simple_operators() {
        let g = g1(3.0, 16);
        let id = kernel_of_operator(|f| Ok(f.clone()), g).unwrap();
        assert_eq!(id, KernelMatrix::identity(g));
        let v = SampledField::from_fn(g, |x| Complex64::new(x[0].cos(), 0.5));
        let mk = kernel_of_operator(|f| f.mul(&v), g).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i == j { v.values()[i] / g.spacing() } else { ZERO };
                assert!((mk.get(i, j) - expect).norm() < 1e-14);
            }
        }
        let fk = kernel_of_operator(|f| Ok(dft(f, Direction::Forward)), g).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expect = Complex64::from_polar(1.0, -2.0 * PI * g.freq(i) * g.coord(j));
                assert!((fk.get(i, j) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn compact_sup_norm() {
        let g = g1(4.0, 16);
        let k = KernelMatrix::from_fn(g, |i, j| Complex64::new(i as f64, j as f64));
        assert_eq!(sup_norm_on_compact(&k, &k, 2.0).unwrap(), 0.0);
        let mut k2 = k.clone();
        k2.entries_mut()[8 * 16 + 8] += Complex64::new(0.0, 2.5);
        assert!((sup_norm_on_compact(&k, &k2, 2.0).unwrap() - 2.5).abs() < 1e-15);
        let mut k3 = k.clone();
        k3.entries_mut()[0] += Complex64::new(9.0, 0.0);
        assert_eq!(sup_norm_on_compact(&k, &k3, 2.0).unwrap(), 0.0);
        assert!(sup_norm_on_compact(&k, &k, 4.0).is_err());
    }

    #[test]
    fn trig_series_interpolates() {
        let g = g1(3.0, 32);
        let f = SampledField::from_fn(g, |x| Complex64::new((2.0 * PI * x[0] / 3.0).cos(), (PI * x[0]).sin()));
        let ts = TrigSeries::from_field(&f);
        assert!(ts.terms().len() <= 4);
        for x in [-2.9, -0.123, 0.5, 1.77, 7.3] {
            let expect = Complex64::new((2.0 * PI * x / 3.0).cos(), (PI * x).sin());
            assert!((ts.eval(&[x]) - expect).norm() < 1e-12);
        }
        let real = SampledField::from_fn(g, |x| Complex64::new((2.0 * PI * x[0] / 3.0).cos(), 0.0));
        assert!(TrigSeries::from_field(&real).is_real());
        assert!(!ts.is_real());
    }
}
