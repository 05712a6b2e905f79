//! Discrete short-time Fourier transform on a lattice, modulation-norm
//! estimators, the Wigner transform, Sjostrand splitting and potentials that
//! are Fourier transforms of finite measures.
//!
//! An STFT lattice puts window centres every `step_x` grid nodes and reads
//! frequencies from a length-P patch around each centre, which gives a
//! frequency step of (N/P)/(2L). P = N with periodic window translation is
//! the dense lattice, on which the adjoint inverts the transform exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{refine2, CenteredFft};
use crate::grid::{centred_transform_with, check_grid, dft, Direction, GridSpec, SampledField};
use crate::tolerances::WINDOW_LEAK;
use crate::weyl::{SymbolCoords, SymbolField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Window translates wrap around the box.
    Periodic,
    /// Only centres whose patch fits inside the box.
    Interior,
}

#[derive(Debug, Clone)]
pub struct StftSpec {
    grid: GridSpec,
    window: SampledField,
    step_x: usize,
    patch: usize,
    weight_s: f64,
    boundary: Boundary,
    radius: Option<f64>,
}

/// 2^{d/4} e^{-pi |x|^2}, rescaled to unit discrete L2 norm.
pub fn gaussian_window(grid: GridSpec) -> SampledField {
    let w = SampledField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        Complex64::new((-PI * r2).exp(), 0.0)
    });
    let n = w.norm_l2();
    w.scale(Complex64::new(1.0 / n, 0.0))
}

impl StftSpec {
    /// Gaussian window, steps h and 1/(2L), periodic translates, s = 0.
    pub fn dense(grid: GridSpec) -> Self {
        Self {
            grid,
            window: gaussian_window(grid),
            step_x: 1,
            patch: grid.points(),
            weight_s: 0.0,
            boundary: Boundary::Periodic,
            radius: None,
        }
    }

    pub fn new(
        window: SampledField,
        step_x: usize,
        patch: usize,
        weight_s: f64,
        boundary: Boundary,
    ) -> Result<Self> {
        let grid = *window.grid();
        let n = grid.points();
        if step_x == 0 || n % step_x != 0 {
            return Err(Error::InvalidArgument(format!("lattice step {step_x} must divide N = {n}")));
        }
        if patch < 2 || patch > n || !patch.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("patch {patch} must be a power of two <= N")));
        }
        if !(weight_s >= 0.0) {
            return Err(Error::InvalidArgument("weight exponent must be >= 0".into()));
        }
        let norm = window.norm_l2();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("window norm {norm} is not 1")));
        }
        let spec = Self { grid, window, step_x, patch, weight_s, boundary, radius: None };
        let inside: f64 = spec.patch_offsets().iter().map(|&idx| spec.window.values()[idx].norm_sqr()).sum::<f64>()
            * grid.cell();
        if 1.0 - inside > WINDOW_LEAK.max(1e-15) {
            return Err(Error::InvalidArgument(format!(
                "window leaks {:e} of its energy outside the {patch}-point patch",
                1.0 - inside
            )));
        }
        Ok(spec)
    }

    pub fn with_weight(mut self, s: f64) -> Self {
        self.weight_s = s;
        self
    }

    /// Keep only lattice centres with |x|_inf <= r.
    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }
    pub fn window(&self) -> &SampledField {
        &self.window
    }
    pub fn weight_s(&self) -> f64 {
        self.weight_s
    }
    pub fn patch(&self) -> usize {
        self.patch
    }
    pub fn step_x(&self) -> usize {
        self.step_x
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn freq_step(&self) -> f64 {
        (self.grid.points() / self.patch) as f64 * self.grid.freq_spacing()
    }

    /// Frequency cell of the lattice, (freq_step)^d.
    pub fn freq_cell(&self) -> f64 {
        self.freq_step().powi(self.grid.dim() as i32)
    }

    pub fn cell_area(&self) -> f64 {
        (self.step_x as f64 * self.grid.spacing()).powi(self.grid.dim() as i32) * self.freq_cell()
    }

    /// Window indices of the patch, i.e. offsets -P/2..P/2 about the origin.
    fn patch_offsets(&self) -> Vec<usize> {
        let n = self.grid.points() as i64;
        let half = (self.patch / 2) as i64;
        let axis: Vec<usize> = (-half..half).map(|o| (n / 2 + o).rem_euclid(n) as usize).collect();
        if self.grid.dim() == 1 {
            axis
        } else {
            let mut out = Vec::new();
            for &a in &axis {
                for &b in &axis {
                    out.push(a * self.grid.points() + b);
                }
            }
            out
        }
    }

    fn axis_centres(&self) -> Vec<usize> {
        let n = self.grid.points() as i64;
        let half = (self.patch / 2) as i64;
        let step = self.step_x as i64;
        let mut out: Vec<usize> = Vec::new();
        let lo = -(n / 2) / step;
        let hi = (n / 2 - 1) / step;
        for k in lo..=hi {
            let i = n / 2 + k * step;
            if self.boundary == Boundary::Interior && (i - half < 0 || i + half > n) {
                continue;
            }
            if let Some(r) = self.radius {
                if self.grid.coord(i as usize).abs() > r + 1e-12 {
                    continue;
                }
            }
            out.push(i as usize);
        }
        out
    }

    /// Per-axis index pairs of the lattice centres.
    pub fn centres(&self) -> Vec<[usize; 2]> {
        let ax = self.axis_centres();
        if self.grid.dim() == 1 {
            ax.iter().map(|&i| [i, 0]).collect()
        } else {
            let mut out = Vec::new();
            for &a in &ax {
                for &b in &ax {
                    out.push([a, b]);
                }
            }
            out
        }
    }

    /// Lattice frequency of flat patch index `b`.
    pub fn frequency(&self, b: usize) -> [f64; 2] {
        let p = self.patch;
        let f = |k: usize| (k as f64 - (p / 2) as f64) * self.freq_step();
        if self.grid.dim() == 1 {
            [f(b), 0.0]
        } else {
            [f(b / p), f(b % p)]
        }
    }

    fn patch_len(&self) -> usize {
        self.patch.pow(self.grid.dim() as u32)
    }
}

/// V_g f on the lattice, rows = centres, columns = patch frequencies.
#[derive(Debug, Clone)]
pub struct StftMatrix {
    centres: Vec<[usize; 2]>,
    values: Vec<Complex64>,
    width: usize,
}

impl StftMatrix {
    pub fn centres(&self) -> &[[usize; 2]] {
        &self.centres
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn get(&self, centre: usize, freq: usize) -> Complex64 {
        self.values[centre * self.width + freq]
    }
    pub fn zeros_like(&self) -> Self {
        Self { centres: self.centres.clone(), values: vec![ZERO; self.values.len()], width: self.width }
    }
}

/// Patch sample positions (flat grid index, or None if outside for interior
/// boundaries, which cannot happen by construction) for a centre.
fn patch_indices(spec: &StftSpec, c: [usize; 2]) -> Vec<(usize, usize)> {
    let n = spec.grid.points() as i64;
    let half = (spec.patch / 2) as i64;
    let offs: Vec<i64> = (-half..half).collect();
    let wrap = |v: i64| v.rem_euclid(n) as usize;
    let win = |o: i64| (n / 2 + o).rem_euclid(n) as usize;
    if spec.grid.dim() == 1 {
        offs.iter().map(|&o| (wrap(c[0] as i64 + o), win(o))).collect()
    } else {
        let mut out = Vec::with_capacity(offs.len() * offs.len());
        for &a in &offs {
            for &b in &offs {
                out.push((
                    wrap(c[0] as i64 + a) * n as usize + wrap(c[1] as i64 + b),
                    win(a) * n as usize + win(b),
                ));
            }
        }
        out
    }
}

/// Per-axis tables e^{sign 2 pi i x_c xi_k}; the phase of flat index b is
/// their product.
fn centre_phase_tables(spec: &StftSpec, c: [usize; 2], sign: f64) -> [Vec<Complex64>; 2] {
    let g = spec.grid;
    let p = spec.patch;
    let table = |x: f64| -> Vec<Complex64> {
        (0..p)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * x * (k as f64 - (p / 2) as f64) * spec.freq_step()))
            .collect()
    };
    if g.dim() == 1 {
        [table(g.coord(c[0])), Vec::new()]
    } else {
        [table(g.coord(c[0])), table(g.coord(c[1]))]
    }
}

fn apply_phase(buf: &mut [Complex64], tables: &[Vec<Complex64>; 2], scale: f64) {
    if tables[1].is_empty() {
        for (v, t) in buf.iter_mut().zip(&tables[0]) {
            *v *= t * scale;
        }
    } else {
        let p = tables[0].len();
        for (row, t0) in buf.chunks_exact_mut(p).zip(&tables[0]) {
            for (v, t1) in row.iter_mut().zip(&tables[1]) {
                *v *= t0 * t1 * scale;
            }
        }
    }
}

fn windowed_patch(f: &SampledField, spec: &StftSpec, c: [usize; 2], plan: &CenteredFft) -> Vec<Complex64> {
    let w = spec.window.values();
    let mut buf: Vec<Complex64> = patch_indices(spec, c).iter().map(|&(y, o)| f.values()[y] * w[o].conj()).collect();
    centred_transform_with(plan, &mut buf, spec.grid.dim(), Direction::Forward);
    buf
}

/// V_g f(x_a, xi_b) = h^d sum_y f(y) conj(g(y - x_a)) e^{-2 pi i y.xi_b}.
pub fn stft(f: &SampledField, spec: &StftSpec) -> Result<StftMatrix> {
    check_grid(f.grid(), &spec.grid)?;
    let centres = spec.centres();
    let plan = CenteredFft::new(spec.patch);
    let width = spec.patch_len();
    let hd = spec.grid.cell();
    let rows: Vec<Vec<Complex64>> = centres
        .par_iter()
        .map(|&c| {
            let mut buf = windowed_patch(f, spec, c, &plan);
            apply_phase(&mut buf, &centre_phase_tables(spec, c, -1.0), hd);
            buf
        })
        .collect();
    Ok(StftMatrix { centres, values: rows.concat(), width })
}

/// |V_g f| on the lattice, same layout as `stft`.
fn stft_magnitudes(f: &SampledField, spec: &StftSpec) -> Result<Vec<Vec<f64>>> {
    check_grid(f.grid(), &spec.grid)?;
    let plan = CenteredFft::new(spec.patch);
    let hd = spec.grid.cell();
    Ok(spec.centres().par_iter().map(|&c| windowed_patch(f, spec, c, &plan).iter().map(|v| v.norm() * hd).collect()).collect())
}

/// One STFT row at an arbitrary node `centre` (per-axis indices), ignoring
/// the lattice and radius restriction.
pub fn stft_row(f: &SampledField, spec: &StftSpec, centre: [usize; 2]) -> Result<Vec<Complex64>> {
    check_grid(f.grid(), &spec.grid)?;
    let mut buf = windowed_patch(f, spec, centre, &CenteredFft::new(spec.patch));
    apply_phase(&mut buf, &centre_phase_tables(spec, centre, -1.0), spec.grid.cell());
    Ok(buf)
}

/// || F[f conj(T_z g)] (1 + |xi|)^r ||_L1 from the STFT row at z.
pub fn windowed_fl1(f: &SampledField, spec: &StftSpec, centre: [usize; 2], r: f64) -> Result<f64> {
    let d = spec.grid.dim();
    let row = stft_row(f, spec, centre)?;
    Ok(row
        .iter()
        .enumerate()
        .map(|(b, v)| v.norm() * (1.0 + freq_norm(spec.frequency(b), d)).powf(r))
        .sum::<f64>()
        * spec.freq_cell())
}

/// V_g^* F = sum F(x, xi) pi(x, xi) g times the lattice cell area.
pub fn stft_adjoint(fm: &StftMatrix, spec: &StftSpec) -> Result<SampledField> {
    let centres = spec.centres();
    if centres != fm.centres || fm.width != spec.patch_len() {
        return Err(Error::InvalidArgument("STFT matrix does not match the lattice".into()));
    }
    let plan = CenteredFft::new(spec.patch);
    let cell = spec.cell_area();
    let w = spec.window.values();
    let parts: Vec<Vec<(usize, Complex64)>> = centres
        .par_iter()
        .enumerate()
        .map(|(a, &c)| {
            let mut buf = fm.values[a * fm.width..(a + 1) * fm.width].to_vec();
            apply_phase(&mut buf, &centre_phase_tables(spec, c, 1.0), 1.0);
            centred_transform_with(&plan, &mut buf, spec.grid.dim(), Direction::Inverse);
            patch_indices(spec, c)
                .into_iter()
                .zip(buf)
                .map(|((y, o), v)| (y, v * w[o] * cell))
                .collect()
        })
        .collect();
    let mut out = SampledField::zeros(spec.grid);
    for part in parts {
        for (y, v) in part {
            out.values_mut()[y] += v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// max |V_g f| (1 + |xi|)^s
    InfS(f64),
    /// sum_xi max_x |V_g f| times the frequency cell
    Inf1,
    /// sum |F f| (1 + |xi|)^r times the frequency cell, no STFT
    FL1(f64),
}

fn freq_norm(fr: [f64; 2], d: usize) -> f64 {
    if d == 1 {
        fr[0].abs()
    } else {
        fr[0].hypot(fr[1])
    }
}

pub fn mod_norm(f: &SampledField, spec: &StftSpec, kind: NormKind) -> Result<f64> {
    let d = spec.grid.dim();
    match kind {
        NormKind::FL1(r) => {
            check_grid(f.grid(), &spec.grid)?;
            let ff = dft(f, Direction::Forward);
            let g = spec.grid;
            Ok(ff.values()
                .iter()
                .enumerate()
                .map(|(k, v)| v.norm() * (1.0 + freq_norm(g.frequency(k), d)).powf(r))
                .sum::<f64>()
                * g.freq_cell())
        }
        NormKind::InfS(s) => {
            let weight: Vec<f64> =
                (0..spec.patch_len()).map(|b| (1.0 + freq_norm(spec.frequency(b), d)).powf(s)).collect();
            let rows = stft_magnitudes(f, spec)?;
            Ok(rows.iter().flat_map(|r| r.iter().zip(&weight).map(|(v, w)| v * w)).fold(0.0, f64::max))
        }
        NormKind::Inf1 => {
            let rows = stft_magnitudes(f, spec)?;
            let mut prof = vec![0.0f64; spec.patch_len()];
            for r in &rows {
                for (p, v) in prof.iter_mut().zip(r) {
                    *p = p.max(*v);
                }
            }
            Ok(prof.iter().sum::<f64>() * spec.freq_cell())
        }
    }
}

/// W(f, g)(x, xi) = sum_q h e^{-2 pi i q h xi} f(x + qh/2) conj(g(x - qh/2)).
pub fn wigner(f: &SampledField, g: &SampledField) -> Result<SymbolField> {
    check_grid(f.grid(), g.grid())?;
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionUnsupported { what: "wigner", supported: "1", found: grid.dim() });
    }
    let n = grid.points();
    let fr = refine2(f.values());
    let gr = refine2(g.values());
    let plan = CenteredFft::new(n);
    let h = grid.spacing();
    let two_n = 2 * n as i64;
    let half = (n / 2) as i64;
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut buf: Vec<Complex64> = (0..n as i64)
                .map(|qi| {
                    let q = qi - half;
                    let a = (2 * i as i64 + q).rem_euclid(two_n) as usize;
                    let b = (2 * i as i64 - q).rem_euclid(two_n) as usize;
                    fr[a] * gr[b].conj()
                })
                .collect();
            plan.forward(&mut buf);
            buf.iter().map(|v| v * h).collect()
        })
        .collect();
    SymbolField::new(grid, SymbolCoords::PositionFrequency, rows.concat())
}

/// <sigma, W> = sum sigma conj(W) h dxi.
pub fn symbol_pairing(sigma: &SymbolField, w: &SymbolField) -> Result<Complex64> {
    check_grid(sigma.grid(), w.grid())?;
    let g = sigma.grid();
    Ok(sigma.values().iter().zip(w.values()).map(|(a, b)| a * b.conj()).sum::<Complex64>()
        * g.spacing()
        * g.freq_spacing())
}

#[derive(Debug, Clone)]
pub struct SjostrandSplit {
    /// V_g^*(w V_g f) with w = 1 for |xi| < R, `shell_weight` on |xi| = R, 0 beyond
    pub smooth: SampledField,
    /// f - smooth
    pub rough: SampledField,
    pub radius: f64,
    pub shell_weight: f64,
    /// Inf1 norm of the rough part
    pub rough_norm: f64,
}

const SHELL_BISECTIONS: usize = 40;

/// Sjostrand split f = smooth + rough with ||rough||_Inf1 <= eps. R is the
/// smallest lattice radius for which cutting at R meets eps; the weight of
/// the shell |xi| = R is then lowered as far as the bound allows, so the
/// rough norm lands on eps instead of jumping past it.
pub fn sjostrand_decompose(f: &SampledField, eps: f64, spec: &StftSpec) -> Result<SjostrandSplit> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let d = spec.grid.dim();
    if f.max_abs() == 0.0 {
        return Ok(SjostrandSplit {
            smooth: f.clone(),
            rough: f.clone(),
            radius: 0.0,
            shell_weight: 1.0,
            rough_norm: 0.0,
        });
    }
    let m = stft(f, spec)?;
    let radii_of: Vec<f64> = (0..m.width).map(|b| freq_norm(spec.frequency(b), d)).collect();
    let mut radii = radii_of.clone();
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let g2 = spec.window.norm_l2().powi(2);
    let split = |r: f64, theta: f64| -> Result<(SampledField, SampledField, f64)> {
        let mut masked = m.clone();
        for row in masked.values_mut().chunks_exact_mut(m.width) {
            for (v, &q) in row.iter_mut().zip(&radii_of) {
                if q > r + 1e-12 {
                    *v = ZERO;
                } else if q > r - 1e-12 {
                    *v *= theta;
                }
            }
        }
        let smooth = stft_adjoint(&masked, spec)?.scale(Complex64::new(1.0 / g2, 0.0));
        let rough = f.sub(&smooth)?;
        let rn = mod_norm(&rough, spec, NormKind::Inf1)?;
        Ok((smooth, rough, rn))
    };
    let mut best = f64::INFINITY;
    for &r in radii.iter() {
        let (smooth, rough, rn) = split(r, 1.0)?;
        best = best.min(rn);
        if rn > eps {
            continue;
        }
        // rough is affine in the shell weight, so its norm is convex in it
        let mut out = (smooth, rough, rn, 1.0);
        if split(r, 0.0)?.2 > eps {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..SHELL_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                let (s, q, n) = split(r, mid)?;
                if n <= eps {
                    hi = mid;
                    out = (s, q, n, mid);
                } else {
                    lo = mid;
                }
            }
        }
        let (smooth, rough, rough_norm, shell_weight) = out;
        return Ok(SjostrandSplit { smooth, rough, radius: r, shell_weight, rough_norm });
    }
    Err(Error::EpsilonTooSmall { epsilon: eps, best })
}

/// V(x) = sum_j c_j e^{2 pi i k_j.x}, the Fourier transform of sum_j c_j delta_{-k_j}.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurePotential {
    pub atoms: Vec<([f64; 2], Complex64)>,
}

impl MeasurePotential {
    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.1.norm()).sum()
    }
}

pub fn measure_potential_field(p: &MeasurePotential, grid: GridSpec) -> SampledField {
    let d = grid.dim();
    SampledField::from_fn(grid, |x| {
        p.atoms
            .iter()
            .map(|(k, c)| {
                let ph: f64 = (0..d).map(|a| k[a] * x[a]).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * ph)
            })
            .sum()
    })
}

/// (Inf1 norm of V, ||g||_L1 * total variation of the measure).
pub fn measure_norm_bound(p: &MeasurePotential, spec: &StftSpec) -> Result<(f64, f64)> {
    let v = measure_potential_field(p, spec.grid);
    let lhs = mod_norm(&v, spec, NormKind::Inf1)?;
    Ok((lhs, spec.window.norm_l1() * p.total_variation()))
}
