//! Discrete Weyl calculus in d = 1: quantization, dequantization, twisted
//! product, composition with linear flows and conjugation through
//! quadratic-phase integral operators.
//!
//! Symbols live on the paired phase grid (x_i, xi_k) of a position grid.
//! Midpoints (x_i + x_j)/2 fall on the half grid and are reached by
//! band-limited refinement along x.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{half_shift, refine2, CenteredFft};
use crate::grid::{check_grid, GridSpec, KernelMatrix, SampledField};
use crate::linalg::cmatmul;
use crate::metaplectic::{Method, MetaplecticPropagator};
use crate::symplectic::{PhaseQuadratic, SymplecticBlocks};
use crate::tolerances::TRIG_CUTOFF;


fn require_1d(grid: &GridSpec, what: &'static str) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::DimensionUnsupported { what, supported: "1", found: grid.dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolCoords {
    /// sigma(x_i, xi_k)
    PositionFrequency,
    /// amplitude a(x_i, y_j) of an integral operator
    PositionPosition,
}

/// Row-major N x N samples, row index = x.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolField {
    grid: GridSpec,
    coords: SymbolCoords,
    values: Vec<Complex64>,
}

impl SymbolField {
    pub fn new(grid: GridSpec, coords: SymbolCoords, values: Vec<Complex64>) -> Result<Self> {
        require_1d(&grid, "SymbolField")?;
        let n = grid.points();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("symbol has non-finite samples".into()));
        }
        Ok(Self { grid, coords, values })
    }

    /// Samples sigma(x_i, xi_k).
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<Self> {
        require_1d(&grid, "SymbolField")?;
        let n = grid.points();
        let xs = grid.coords();
        let fs = grid.freqs();
        let values = (0..n * n).into_par_iter().map(|e| f(xs[e / n], fs[e % n])).collect();
        Ok(Self { grid, coords: SymbolCoords::PositionFrequency, values })
    }

    /// V(x) (x) 1.
    pub fn multiplication(v: &SampledField) -> Result<Self> {
        let g = *v.grid();
        require_1d(&g, "multiplication symbol")?;
        let n = g.points();
        let values = (0..n * n).map(|e| v.values()[e / n]).collect();
        Ok(Self { grid: g, coords: SymbolCoords::PositionFrequency, values })
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Result<Self> {
        Self::from_fn(grid, |_, _| c)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn coords(&self) -> SymbolCoords {
        self.coords
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.values[i * self.grid.points() + k]
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            coords: self.coords,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// The samples as a field on the square 2d grid with the position
    /// spacing. Used for norm diagnostics on symbols.
    pub fn as_field_2d(&self) -> Result<SampledField> {
        let g2 = GridSpec::new(2, self.grid.half_width(), self.grid.points())?;
        SampledField::new(g2, self.values.clone())
    }
}

/// Kernel from rows of sigma sampled at the 2N-1 half-grid midpoints.
fn quantize_rows(grid: &GridSpec, rows: &[Vec<Complex64>]) -> KernelMatrix {
    let n = grid.points();
    let plan = CenteredFft::new(n);
    let dxi = grid.freq_spacing();
    // g_m(q) for q = -N/2..N/2-1 stored at q + N/2
    let g: Vec<Vec<Complex64>> = rows
        .par_iter()
        .map(|row| {
            let mut buf = row.clone();
            plan.inverse(&mut buf);
            buf.iter().map(|v| v * dxi).collect()
        })
        .collect();
    let half = (n / 2) as i64;
    KernelMatrix::from_fn(*grid, |i, j| {
        let q = (i as i64 - j as i64 + half).rem_euclid(n as i64) as usize;
        g[i + j][q]
    })
}

/// K(x, y) = sum_k dxi sigma((x+y)/2, xi_k) e^{2 pi i (x-y) xi_k}.
///
/// Offsets x - y are taken mod 2L, so a wrapped entry has two midpoints a
/// distance L apart. `symbol_of_kernel` inverts this exactly for symbols
/// that are L-periodic in x or vanish near the edge of the box.
pub fn weyl_quantize(sigma: &SymbolField) -> Result<KernelMatrix> {
    if sigma.coords != SymbolCoords::PositionFrequency {
        return Err(Error::InvalidArgument("weyl_quantize needs a (x, xi) symbol".into()));
    }
    let g = sigma.grid;
    let n = g.points();
    let cols: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|k| refine2(&(0..n).map(|i| sigma.get(i, k)).collect::<Vec<_>>()))
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..2 * n - 1).map(|m| (0..n).map(|k| cols[k][m]).collect()).collect();
    Ok(quantize_rows(&g, &rows))
}

/// Quantize a symbol given in closed form, evaluated at the exact midpoints.
pub fn weyl_quantize_fn(grid: GridSpec, sigma: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<KernelMatrix> {
    require_1d(&grid, "weyl_quantize_fn")?;
    let n = grid.points();
    let h = grid.spacing();
    let fs = grid.freqs();
    let rows: Vec<Vec<Complex64>> = (0..2 * n - 1)
        .into_par_iter()
        .map(|m| {
            let x = -grid.half_width() + 0.5 * m as f64 * h;
            fs.iter().map(|&xi| sigma(x, xi)).collect()
        })
        .collect();
    Ok(quantize_rows(&grid, &rows))
}

/// sigma(x_i, xi_k) = sum_q h e^{-2 pi i q h xi_k} K(x_i + qh/2, x_i - qh/2),
/// with odd q read off half-shifted diagonals.
pub fn symbol_of_kernel(k: &KernelMatrix) -> Result<SymbolField> {
    let g = *k.grid();
    require_1d(&g, "symbol_of_kernel")?;
    let n = g.points();
    let half = (n / 2) as i64;
    // d[q + N/2][i] = K at row i + q/2, column i - q/2
    let diag: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|qi| {
            let q = qi as i64 - half;
            let seq: Vec<Complex64> =
                (0..n).map(|p| k.get(((p as i64 + q).rem_euclid(n as i64)) as usize, p)).collect();
            if q % 2 == 0 {
                (0..n).map(|i| seq[((i as i64 - q / 2).rem_euclid(n as i64)) as usize]).collect()
            } else {
                let hs = half_shift(&seq);
                (0..n).map(|i| hs[((i as i64 - (q + 1) / 2).rem_euclid(n as i64)) as usize]).collect()
            }
        })
        .collect();
    let plan = CenteredFft::new(n);
    let h = g.spacing();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut buf: Vec<Complex64> = (0..n).map(|qi| diag[qi][i]).collect();
            plan.forward(&mut buf);
            buf.iter().map(|v| v * h).collect()
        })
        .collect();
    SymbolField::new(g, SymbolCoords::PositionFrequency, rows.concat())
}

/// Symbol of sigma^w rho^w.
pub fn twisted_product(sigma: &SymbolField, rho: &SymbolField) -> Result<SymbolField> {
    check_grid(&sigma.grid, &rho.grid)?;
    symbol_of_kernel(&weyl_quantize(sigma)?.compose(&weyl_quantize(rho)?)?)
}

/// Sparse double Fourier series sigma(x, xi) = sum a e^{2 pi i (zeta x + eta xi)},
/// periodic over the phase box (periods 2L in x and 1/h in xi).
#[derive(Debug, Clone)]
pub struct SymbolSeries {
    terms: Vec<(f64, f64, Complex64)>,
}

impl SymbolSeries {
    pub fn from_symbol(sigma: &SymbolField) -> Self {
        let g = sigma.grid;
        let n = g.points();
        let mut vals = sigma.values.clone();
        crate::grid::centred_transform(&mut vals, n, 2, crate::grid::Direction::Forward);
        let s = 1.0 / (n * n) as f64;
        let h = g.spacing();
        let dz = g.freq_spacing();
        let mut raw = Vec::new();
        for p in 0..n {
            for q in 0..n {
                let a = vals[p * n + q] * s;
                let zeta = (p as f64 - (n / 2) as f64) * dz;
                let eta = (q as f64 - (n / 2) as f64) * h;
                let mut zs = vec![zeta];
                if p == 0 {
                    zs.push(-zeta);
                }
                let mut es = vec![eta];
                if q == 0 {
                    es.push(-eta);
                }
                let w = 1.0 / (zs.len() * es.len()) as f64;
                for &z in &zs {
                    for &e in &es {
                        raw.push((z, e, a * w));
                    }
                }
            }
        }
        let amax = raw.iter().fold(0.0f64, |m, t| m.max(t.2.norm()));
        let terms = raw.into_iter().filter(|t| t.2.norm() > TRIG_CUTOFF * amax).collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[(f64, f64, Complex64)] {
        &self.terms
    }

    pub fn eval(&self, x: f64, xi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(z, e, a)| a * Complex64::from_polar(1.0, 2.0 * PI * (z * x + e * xi)))
            .sum()
    }
}

/// sigma(S(x, xi)) by trigonometric interpolation. Cost is N^2 times the
/// number of retained Fourier terms, so it is meant for band-limited symbols.
pub fn compose_with_flow(sigma: &SymbolField, s: &SymplecticBlocks) -> Result<SymbolField> {
    require_1d(&sigma.grid, "compose_with_flow")?;
    if sigma.coords != SymbolCoords::PositionFrequency {
        return Err(Error::InvalidArgument("compose_with_flow needs a (x, xi) symbol".into()));
    }
    let series = SymbolSeries::from_symbol(sigma);
    let (a, b, c, d) = (s.block_a()[(0, 0)], s.block_b()[(0, 0)], s.block_c()[(0, 0)], s.block_d()[(0, 0)]);
    // z(ax + b xi) + e(cx + d xi) = (za + ec) x + (zb + ed) xi
    let terms: Vec<(f64, f64, Complex64)> =
        series.terms.iter().map(|&(z, e, w)| (z * a + e * c, z * b + e * d, w)).collect();
    let g = sigma.grid;
    SymbolField::new(g, SymbolCoords::PositionFrequency, separable_sum(&g.coords(), &g.freqs(), &terms))
}

/// out[i * m + k] = sum_t w_t e^{2 pi i (alpha_t u_i + beta_t v_k)}, as one
/// matrix product of the two exponential tables.
fn separable_sum(us: &[f64], vs: &[f64], terms: &[(f64, f64, Complex64)]) -> Vec<Complex64> {
    let nt = terms.len();
    if nt == 0 {
        return vec![Complex64::new(0.0, 0.0); us.len() * vs.len()];
    }
    let left: Vec<Complex64> = us
        .par_iter()
        .flat_map_iter(|&u| terms.iter().map(move |&(al, _, w)| w * Complex64::from_polar(1.0, 2.0 * PI * al * u)))
        .collect();
    let mut right = vec![Complex64::new(0.0, 0.0); nt * vs.len()];
    for (t, &(_, be, _)) in terms.iter().enumerate() {
        for (k, &v) in vs.iter().enumerate() {
            right[t * vs.len() + k] = Complex64::from_polar(1.0, 2.0 * PI * be * v);
        }
    }
    cmatmul(&left, &right, us.len(), nt, vs.len(), Complex64::new(1.0, 0.0))
}

/// Coefficients (A, B, C) of Phi(x, y) = 1/2 Ax^2 + yBx + 1/2 Cy^2 as used in
/// the conjugation lemma; for a metaplectic phase A = m_xx, B = -m_xy, C = m_yy.
fn fio_coefficients(phi: &PhaseQuadratic) -> Result<(f64, f64)> {
    if phi.dim != 1 {
        return Err(Error::DimensionUnsupported { what: "conjugate_through_fio", supported: "1", found: phi.dim });
    }
    let b = -phi.m_xy[(0, 0)];
    if b == 0.0 || !b.is_finite() {
        return Err(Error::NotFree { det_b: 0.0 });
    }
    Ok((phi.m_xx[(0, 0)], b))
}

/// Amplitude a(x, y) with sigma^w T_Phi = T_{Phi, a}: per Fourier term,
/// e^{2 pi i (zeta x + eta xi)} becomes e^{pi i zeta' eta} e^{2 pi i (zeta' x + B eta y)}
/// with zeta' = zeta + A eta.
pub fn conjugate_through_fio(sigma: &SymbolField, phi: &PhaseQuadratic) -> Result<SymbolField> {
    require_1d(&sigma.grid, "conjugate_through_fio")?;
    let (a, b) = fio_coefficients(phi)?;
    let series = SymbolSeries::from_symbol(sigma);
    let g = sigma.grid;
    let xs = g.coords();
    let terms: Vec<(f64, f64, Complex64)> = series
        .terms
        .iter()
        .map(|&(z, eta, c)| {
            let zp = z + a * eta;
            (zp, b * eta, c * Complex64::from_polar(1.0, PI * zp * eta))
        })
        .collect();
    let values = separable_sum(&xs, &xs, &terms);
    SymbolField::new(g, SymbolCoords::PositionPosition, values)
}

/// Gabor packets pi(x0, xi0) g with the unit Gaussian window, for x0 in
/// {-L/4, 0, L/4} and xi0 in {-1, 0, 1}.
pub fn default_probes(grid: GridSpec) -> Vec<SampledField> {
    let l = grid.half_width();
    let mut out = Vec::new();
    for x0 in [-0.25 * l, 0.0, 0.25 * l] {
        for xi0 in [-1.0, 0.0, 1.0] {
            out.push(SampledField::from_fn(grid, |x| {
                let u = x[0] - x0;
                Complex64::from_polar(2f64.powf(0.25) * (-PI * u * u).exp(), 2.0 * PI * xi0 * x[0])
            }));
        }
    }
    out
}

fn relative_residual(lhs: &[SampledField], rhs: &[SampledField]) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (l, r) in lhs.iter().zip(rhs) {
        num += l.sub(r)?.norm_l2().powi(2);
        den += r.norm_l2().powi(2);
    }
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

/// Relative residual of (sigma o S)^w = mu(S)^{-1} sigma^w mu(S) on probe
/// fields (Frobenius over the probe set).
pub fn symplectic_covariance_residual(
    sigma: &SymbolField,
    s: &SymplecticBlocks,
    probes: &[SampledField],
) -> Result<f64> {
    let g = sigma.grid;
    let mu = MetaplecticPropagator::build(s, g, Method::FastChirpFFT)?;
    let mu_inv = mu.inverse()?;
    let lhs_k = weyl_quantize(&compose_with_flow(sigma, s)?)?;
    let sw = weyl_quantize(sigma)?;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for p in probes {
        lhs.push(lhs_k.apply(p)?);
        rhs.push(mu_inv.apply(&sw.apply(&mu.apply(p)?)?)?);
    }
    relative_residual(&lhs, &rhs)
}

/// Relative residual of sigma^w mu(S) against the integral operator with
/// kernel K_S(x, y) * conjugate_through_fio(sigma, Phi_S)(x, y).
pub fn fio_conjugation_residual(
    sigma: &SymbolField,
    s: &SymplecticBlocks,
    probes: &[SampledField],
) -> Result<f64> {
    let g = sigma.grid;
    let mu = MetaplecticPropagator::build(s, g, Method::FastChirpFFT)?;
    let mu_q = MetaplecticPropagator::build(s, g, Method::Quadrature)?;
    let amp = conjugate_through_fio(sigma, mu.phase())?;
    let base = mu_q.kernel()?;
    let n = g.points();
    let fio = KernelMatrix::from_fn(g, |i, j| base.get(i, j) * amp.values[i * n + j]);
    let sw = weyl_quantize(sigma)?;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for p in probes {
        lhs.push(sw.apply(&mu.apply(p)?)?);
        rhs.push(fio.apply(p)?);
    }
    relative_residual(&lhs, &rhs)
}

/// e^z - 1 without cancellation for small |z|.
fn cexpm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let s = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * s * s, a.exp() * b.sin())
}

/// u0 with e^{-i(t/n)u} = 1 + i(t/n) u0, pointwise.
pub fn exp_remainder(u: &SampledField, t: f64, n: usize) -> Result<SampledField> {
    if t == 0.0 || n == 0 {
        return Err(Error::InvalidArgument("exp_remainder needs t != 0 and n > 0".into()));
    }
    let tau = t / n as f64;
    let i_tau = Complex64::new(0.0, tau);
    Ok(u.map(|v| cexpm1(-i_tau * v) / i_tau))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    /// (shell radius |w - z|, max matrix element on the shell)
    pub shells: Vec<(f64, f64)>,
    /// -slope of log(max) against log(1 + r) over the nonzero shells
    pub fitted_exponent: f64,
    pub target_exponent: f64,
}

impl DecayTable {
    pub fn exceeds_target(&self) -> bool {
        self.fitted_exponent > self.target_exponent
    }
}

/// max |<sigma^w pi(z) phi, pi(w) phi>| over shells |w - z| = r, with z, w on
/// the square lattice of spacing `step` inside |x|, |xi| <= `extent`.
pub fn almost_diag_profile(sigma: &SymbolField, s: f64, step: f64, extent: f64) -> Result<DecayTable> {
    let g = sigma.grid;
    let k = weyl_quantize(sigma)?;
    let m = (extent / step).floor() as i64;
    let mut lattice = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            lattice.push((a, b));
        }
    }
    let packet = |a: i64, b: i64| {
        let (x0, xi0) = (a as f64 * step, b as f64 * step);
        SampledField::from_fn(g, |x| {
            let u = x[0] - x0;
            Complex64::from_polar(2f64.powf(0.25) * (-PI * u * u).exp(), 2.0 * PI * xi0 * x[0])
        })
    };
    let packets: Vec<SampledField> = lattice.iter().map(|&(a, b)| packet(a, b)).collect();
    let images: Vec<SampledField> = packets.par_iter().map(|p| k.apply(p)).collect::<Result<_>>()?;
    let mut shells: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for (zi, &(za, zb)) in lattice.iter().enumerate() {
        for (wi, &(wa, wb)) in lattice.iter().enumerate() {
            let r2 = (wa - za).pow(2) + (wb - zb).pow(2);
            let v = images[zi].inner(&packets[wi])?.norm();
            let e = shells.entry(r2).or_insert(0.0);
            *e = e.max(v);
        }
    }
    let shells: Vec<(f64, f64)> = shells.into_iter().map(|(r2, v)| ((r2 as f64).sqrt() * step, v)).collect();
    let peak = shells.iter().fold(0.0f64, |a, s| a.max(s.1));
    let pts: Vec<(f64, f64)> = shells
        .iter()
        .filter(|(r, v)| *r > 0.0 && *v > 1e-13 * peak)
        .map(|(r, v)| ((1.0 + r).ln(), v.ln()))
        .collect();
    let fitted_exponent = if pts.len() >= 2 {
        let nn = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / nn;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / nn;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else if peak == 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(DecayTable { shells, fitted_exponent, target_exponent: s })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1, 4.0, n).unwrap()
    }

    #[test]
    fn multiplication_symbol_is_diagonal() {
        let g = grid(32);
        let v = SampledField::from_fn(g, |x| Complex64::new((PI * x[0] / 2.0).cos(), 0.3));
        let k = weyl_quantize(&SymbolField::multiplication(&v).unwrap()).unwrap();
        let h = g.spacing();
        for i in 0..32 {
            for j in 0..32 {
                let expect = if i == j { v.values()[i] / h } else { ZERO };
                assert!((k.get(i, j) - expect).norm() < 1e-11, "{i} {j}");
            }
        }
        let one = weyl_quantize(&SymbolField::constant(g, Complex64::new(1.0, 0.0)).unwrap()).unwrap();
        let id = KernelMatrix::identity(g);
        assert!(one.sub(&id).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn kinetic_symbol_eigenvalue() {
        let g = grid(64);
        let sigma = SymbolField::from_fn(g, |_, xi| Complex64::new(2.0 * PI * PI * xi * xi, 0.0)).unwrap();
        let k = weyl_quantize(&sigma).unwrap();
        let kk = 1.25;
        let f = SampledField::from_fn(g, |x| Complex64::from_polar(1.0, 2.0 * PI * kk * x[0]));
        let out = k.apply(&f).unwrap();
        let expect = f.scale(Complex64::new(2.0 * PI * PI * kk * kk, 0.0));
        assert!(out.sub(&expect).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_sampled_quantization() {
        let g = grid(32);
        let f = |x: f64, xi: f64| Complex64::from_polar(1.0, 2.0 * PI * (0.25 * x + 0.5 * xi)) + (PI * x / 4.0).cos();
        let a = weyl_quantize_fn(g, f).unwrap();
        let b = weyl_quantize(&SymbolField::from_fn(g, f).unwrap()).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn round_trips() {
        let g = grid(32);
        let id = KernelMatrix::identity(g);
        let s = symbol_of_kernel(&id).unwrap();
        assert!(s.values().iter().all(|v| (v - 1.0).norm() < 1e-12));
        let v = SampledField::from_fn(g, |x| Complex64::new(x[0].sin(), x[0]));
        let dk = KernelMatrix::from_fn(g, |i, j| if i == j { v.values()[i] / g.spacing() } else { ZERO });
        let s = symbol_of_kernel(&dk).unwrap();
        for i in 0..32 {
            for k in 0..32 {
                assert!((s.get(i, k) - v.values()[i]).norm() < 1e-12);
            }
        }
        let sigma = SymbolField::from_fn(g, |x, xi| {
            Complex64::new((PI * x / 2.0).cos() * (2.0 * PI * xi / 4.0 * 0.5).cos(), (PI * x / 4.0).sin())
        })
        .unwrap();
        let back = symbol_of_kernel(&weyl_quantize(&sigma).unwrap()).unwrap();
        assert!(back.sub(&sigma).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn twisted_unit_and_commuting_multipliers() {
        let g = grid(32);
        let one = SymbolField::constant(g, Complex64::new(1.0, 0.0)).unwrap();
        let sigma = SymbolField::from_fn(g, |x, xi| Complex64::new((PI * x / 4.0).cos(), 0.2 * (PI * xi / 2.0).sin())).unwrap();
        assert!(twisted_product(&sigma, &one).unwrap().sub(&sigma).unwrap().max_abs() < 1e-10);
        assert!(twisted_product(&one, &sigma).unwrap().sub(&sigma).unwrap().max_abs() < 1e-10);
        let v = SampledField::from_fn(g, |x| Complex64::new((PI * x[0] / 4.0).cos(), 0.0));
        let w = SampledField::from_fn(g, |x| Complex64::new(0.0, (PI * x[0] / 2.0).sin()));
        let vw = SymbolField::multiplication(&v.mul(&w).unwrap()).unwrap();
        let tp = twisted_product(&SymbolField::multiplication(&v).unwrap(), &SymbolField::multiplication(&w).unwrap()).unwrap();
        assert!(tp.sub(&vw).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn exp_remainder_formulas() {
        let g = grid(16);
        let z = exp_remainder(&SampledField::zeros(g), 1.0, 4).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let c = Complex64::new(0.7, 0.0);
        let u = SampledField::from_fn(g, |_| c);
        let (t, n) = (1.3, 5usize);
        let u0 = exp_remainder(&u, t, n).unwrap();
        // -c sum_k (-i t c / n)^k / (k+1)!
        let a = Complex64::new(0.0, -t / n as f64) * c;
        let mut s2 = ZERO;
        let mut p = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..30 {
            fact *= (k + 1) as f64;
            s2 += p / fact;
            p *= a;
        }
        assert!((u0.values()[0] - (-c * s2)).norm() < 1e-14);
        assert!(u0.values()[0].norm() <= c.norm() * (t * c.norm()).exp());
    }
}
