//! Metaplectic propagators mu(S) for free symplectic S as grid operators:
//! mu(S) f(x) = c |det B|^{-1/2} sum_y h^d e^{2 pi i Phi(x, y)} f(y).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::Fft;

use crate::error::{Error, Result};
use crate::fft::plan_pair;
use crate::grid::{check_grid, kernel_of_operator, GridSpec, KernelMatrix, SampledField};
use crate::linalg::signature;
use crate::symplectic::{
    default_free_tol, flow, is_free, phase_form, PhaseQuadratic, QuadraticHamiltonian, SymplecticBlocks,
};

/// Steps used for path-continuity phase tracking when the caller has no
/// preference.
pub const DEFAULT_PHASE_STEPS: usize = 64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Direct O(N^{2d}) sum.
    Quadrature,
    /// chirp(y) -> chirp-z Fourier transform at B^{-1} x -> chirp(x).
    FastChirpFFT,
}

/// How the unit factor c is chosen when building from a Hamiltonian flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// Continuity-resolved from t = 0 with the given number of steps.
    Resolve(usize),
    /// c = 1; for magnitude-only diagnostics.
    Skip,
}

/// e^{pi i alpha m^2} with the argument reduced mod 2 before scaling by pi.
fn quad_phase(alpha: f64, m: f64) -> Complex64 {
    let q = alpha * m * m;
    Complex64::from_polar(1.0, PI * (q - 2.0 * (0.5 * q).round()))
}

/// Bluestein evaluation of y_i = sum_j u_j e^{-2 pi i alpha i' j'} with centred
/// indices i' = i - N/2, j' = j - N/2.
#[derive(Clone)]
struct ChirpZ {
    n: usize,
    pre: Vec<Complex64>,
    kernel_hat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ChirpZ {
    fn new(n: usize, alpha: f64) -> Self {
        let half = (n / 2) as f64;
        let pre = (0..n).map(|j| quad_phase(-alpha, j as f64 - half)).collect();
        let m = 2 * n;
        let (fwd, inv) = plan_pair(m);
        let mut kernel_hat = vec![ZERO; m];
        for k in 0..n {
            let b = quad_phase(alpha, k as f64);
            kernel_hat[k] = b;
            if k > 0 {
                kernel_hat[m - k] = b;
            }
        }
        fwd.process(&mut kernel_hat);
        Self { n, pre, kernel_hat, fwd, inv }
    }

    fn process(&self, buf: &mut [Complex64]) {
        let m = 2 * self.n;
        let mut a = vec![ZERO; m];
        for j in 0..self.n {
            a[j] = buf[j] * self.pre[j];
        }
        self.fwd.process(&mut a);
        for (v, k) in a.iter_mut().zip(&self.kernel_hat) {
            *v *= k;
        }
        self.inv.process(&mut a);
        let s = 1.0 / m as f64;
        for i in 0..self.n {
            buf[i] = a[i] * self.pre[i] * s;
        }
    }
}

impl std::fmt::Debug for ChirpZ {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChirpZ").field("n", &self.n).finish()
    }
}

#[derive(Debug, Clone)]
pub struct MetaplecticPropagator {
    blocks: SymplecticBlocks,
    phase: PhaseQuadratic,
    abs_det_b: f64,
    phase_factor: Complex64,
    method: Method,
    grid: GridSpec,
    chirp_x: Vec<Complex64>,
    chirp_y: Vec<Complex64>,
    czt: Vec<ChirpZ>,
}

/// Pointwise e^{pi i z.M z} on the grid nodes.
fn chirp_field(grid: &GridSpec, m: &nalgebra::DMatrix<f64>) -> Vec<Complex64> {
    let d = grid.dim();
    (0..grid.len())
        .map(|idx| {
            let p = grid.position(idx);
            let mut q = 0.0;
            for a in 0..d {
                for b in 0..d {
                    q += p[a] * m[(a, b)] * p[b];
                }
            }
            Complex64::from_polar(1.0, PI * q)
        })
        .collect()
}

impl MetaplecticPropagator {
    /// Propagator with c = 1; attach a resolved phase with `with_phase`.
    pub fn build(s: &SymplecticBlocks, grid: GridSpec, method: Method) -> Result<Self> {
        if s.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: s.dim() });
        }
        let phase = phase_form(s)?;
        let (_, det_b) = is_free(s, default_free_tol(s));
        let czt = match method {
            Method::Quadrature => Vec::new(),
            Method::FastChirpFFT => {
                if !phase.xy_is_diagonal() {
                    return Err(Error::DimensionUnsupported {
                        what: "chirp-z path with non-diagonal B^{-1}",
                        supported: "1, or 2 with diagonal B",
                        found: grid.dim(),
                    });
                }
                let h = grid.spacing();
                (0..grid.dim()).map(|a| ChirpZ::new(grid.points(), phase.m_xy[(a, a)] * h * h)).collect()
            }
        };
        Ok(Self {
            blocks: s.clone(),
            chirp_x: chirp_field(&grid, &phase.m_xx),
            chirp_y: chirp_field(&grid, &phase.m_yy),
            phase,
            abs_det_b: det_b.abs(),
            phase_factor: Complex64::new(1.0, 0.0),
            method,
            grid,
            czt,
        })
    }

    /// mu(flow(H, t)) with the phase chosen by `mode`.
    pub fn for_flow(
        h: &QuadraticHamiltonian,
        t: f64,
        grid: GridSpec,
        method: Method,
        mode: PhaseMode,
    ) -> Result<Self> {
        let p = Self::build(&flow(h, t), grid, method)?;
        match mode {
            PhaseMode::Skip => Ok(p),
            PhaseMode::Resolve(steps) => Ok(p.with_phase(resolve_phase(h, t, steps)?)),
        }
    }

    pub fn with_phase(mut self, c: Complex64) -> Self {
        assert!((c.norm() - 1.0).abs() < 1e-12, "phase factor must have unit modulus");
        self.phase_factor = c;
        self
    }

    /// mu(S)^{-1} = mu(S^{-1}) with the conjugate phase.
    pub fn inverse(&self) -> Result<Self> {
        Ok(Self::build(&self.blocks.inverse(), self.grid, self.method)?.with_phase(self.phase_factor.conj()))
    }

    pub fn blocks(&self) -> &SymplecticBlocks {
        &self.blocks
    }
    pub fn phase(&self) -> &PhaseQuadratic {
        &self.phase
    }
    pub fn abs_det_b(&self) -> f64 {
        self.abs_det_b
    }
    pub fn phase_factor(&self) -> Complex64 {
        self.phase_factor
    }
    pub fn method(&self) -> Method {
        self.method
    }
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// c |det B|^{-1/2}.
    pub fn amplitude(&self) -> Complex64 {
        self.phase_factor / self.abs_det_b.sqrt()
    }

    fn cross(&self, i: usize, j: usize) -> Complex64 {
        let x = self.grid.position(i);
        let y = self.grid.position(j);
        let d = self.grid.dim();
        let mut q = 0.0;
        for a in 0..d {
            for b in 0..d {
                q += y[a] * self.phase.m_xy[(a, b)] * x[b];
            }
        }
        Complex64::from_polar(1.0, -2.0 * PI * q)
    }

    pub fn apply(&self, f: &SampledField) -> Result<SampledField> {
        check_grid(&self.grid, f.grid())?;
        let side = self.grid.len();
        let h_d = self.grid.cell();
        let amp = self.amplitude() * h_d;
        let g: Vec<Complex64> = f.values().iter().zip(&self.chirp_y).map(|(v, c)| v * c).collect();
        let out = match self.method {
            Method::Quadrature => (0..side)
                .into_par_iter()
                .map(|i| {
                    let s: Complex64 = g.iter().enumerate().map(|(j, gj)| gj * self.cross(i, j)).sum();
                    s * self.chirp_x[i] * amp
                })
                .collect(),
            Method::FastChirpFFT => {
                let n = self.grid.points();
                let mut buf = g;
                if self.grid.dim() == 1 {
                    self.czt[0].process(&mut buf);
                } else {
                    for row in buf.chunks_exact_mut(n) {
                        self.czt[1].process(row);
                    }
                    let mut col = vec![ZERO; n];
                    for j in 0..n {
                        for i in 0..n {
                            col[i] = buf[i * n + j];
                        }
                        self.czt[0].process(&mut col);
                        for i in 0..n {
                            buf[i * n + j] = col[i];
                        }
                    }
                }
                buf.iter().zip(&self.chirp_x).map(|(v, c)| v * c * amp).collect()
            }
        };
        SampledField::new(self.grid, out)
    }

    /// Quadrature: closed-form entries. FastChirpFFT: columns from `apply`.
    pub fn kernel(&self) -> Result<KernelMatrix> {
        match self.method {
            Method::Quadrature => {
                let amp = self.amplitude();
                Ok(KernelMatrix::from_fn(self.grid, |i, j| {
                    amp * self.chirp_x[i] * self.cross(i, j) * self.chirp_y[j]
                }))
            }
            Method::FastChirpFFT => kernel_of_operator(|f| self.apply(f), self.grid),
        }
    }
}

/// Same as `MetaplecticPropagator::build`.
pub fn build_propagator(s: &SymplecticBlocks, grid: GridSpec, method: Method) -> Result<MetaplecticPropagator> {
    MetaplecticPropagator::build(s, grid, method)
}

const SIG_TOL: f64 = 1e-10;

fn free_at(h: &QuadraticHamiltonian, t: f64) -> Option<PhaseQuadratic> {
    phase_form(&flow(h, t)).ok()
}

/// Short-step phase e^{-i pi sig(m_yy) / 4}, the normalization under which
/// the kernel tends to a delta as the step shrinks.
fn short_step_phase(p: &PhaseQuadratic) -> Option<Complex64> {
    let sig = signature(&p.m_yy, SIG_TOL)?;
    Some(Complex64::from_polar(1.0, -PI * sig as f64 / 4.0))
}

/// c for mu(S1) mu(S2) from the Gaussian integral over the middle variable.
fn compose_phase(c1: Complex64, p1: &PhaseQuadratic, c2: Complex64, p2: &PhaseQuadratic) -> Option<Complex64> {
    let q = &p1.m_yy + &p2.m_xx;
    let sig = signature(&q, SIG_TOL)?;
    Some(c1 * c2 * Complex64::from_polar(1.0, PI * sig as f64 / 4.0))
}

/// Phase of mu(flow(H, j tau)) from j steps of tau, jumping over
/// intermediate times where the flow is not free.
fn path_phase(h: &QuadraticHamiltonian, tau: f64, m: usize, depth: usize) -> Option<Complex64> {
    if depth > 8 {
        return None;
    }
    let p_tau = free_at(h, tau)?;
    let c_tau = short_step_phase(&p_tau)?;
    let mut k = 1usize;
    let mut c = c_tau;
    let mut p = p_tau;
    while k < m {
        let mut advanced = false;
        for j in 1..=(m - k) {
            let target = (k + j) as f64 * tau;
            let Some(p_target) = free_at(h, target) else { continue };
            let (c_j, p_j) = if j == 1 {
                (c_tau, free_at(h, tau)?)
            } else {
                let Some(pj) = free_at(h, j as f64 * tau) else { continue };
                let Some(cj) = path_phase(h, tau, j, depth + 1) else { continue };
                (cj, pj)
            };
            let Some(next) = compose_phase(c, &p, c_j, &p_j) else { continue };
            c = next;
            p = p_target;
            k += j;
            advanced = true;
            break;
        }
        if !advanced {
            return None;
        }
    }
    Some(c)
}

/// Continuity-resolved c(t) for mu(flow(H, t)), built from `steps` short
/// free steps; refines the step up to five times if tau itself is not free.
pub fn resolve_phase(h: &QuadraticHamiltonian, t: f64, steps: usize) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("phase resolution needs at least one step".into()));
    }
    let end = flow(h, t);
    let (free, det_b) = is_free(&end, default_free_tol(&end));
    if !free {
        return Err(Error::NotFree { det_b });
    }
    let mut m = steps;
    for _ in 0..6 {
        if let Some(c) = path_phase(h, t / m as f64, m, 0) {
            return Ok(c);
        }
        m *= 2;
    }
    Err(Error::PathThroughExceptional { time: t })
}

/// Harmonic oscillator kernel
/// c(t) |sin t|^{-1/2} exp(2 pi i (cos t (x^2 + y^2) - 2xy) / (2 sin t)).
pub fn mehler_oracle(t: f64, grid: GridSpec, mode: PhaseMode) -> Result<KernelMatrix> {
    if grid.dim() != 1 {
        return Err(Error::DimensionUnsupported { what: "mehler_oracle", supported: "1", found: grid.dim() });
    }
    let s = t.sin();
    if s.abs() <= 1e-8 {
        return Err(Error::NotFree { det_b: s });
    }
    let c = match mode {
        PhaseMode::Skip => Complex64::new(1.0, 0.0),
        PhaseMode::Resolve(m) => resolve_phase(&QuadraticHamiltonian::harmonic_oscillator(1), t, m)?,
    };
    let amp = c / s.abs().sqrt();
    let ct = t.cos();
    let xs = grid.coords();
    Ok(KernelMatrix::from_fn(grid, |i, j| {
        let (x, y) = (xs[i], xs[j]);
        amp * Complex64::from_polar(1.0, PI * (ct * (x * x + y * y) - 2.0 * x * y) / s)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dft, Direction};

    fn gauss(grid: GridSpec) -> SampledField {
        SampledField::from_fn(grid, |x| Complex64::new((-PI * x[0] * x[0]).exp(), 0.0))
    }

    #[test]
    fn quarter_turn_is_fourier() {
        // N = 4 L^2 makes the position and frequency grids coincide
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let p = MetaplecticPropagator::for_flow(&h, PI / 2.0, g, Method::FastChirpFFT, PhaseMode::Resolve(32)).unwrap();
        let f = gauss(g);
        let out = p.apply(&f).unwrap();
        let c = out.values()[32] / f.values()[32];
        assert!((c.norm() - 1.0).abs() < 1e-10);
        assert!(out.sub(&f.scale(c)).unwrap().norm_l2() < 1e-10);

        // with Phi = -xy the quarter turn is the forward transform up to the phase
        let z = SampledField::from_fn(g, |x| Complex64::new((-PI * (x[0] - 0.5).powi(2)).exp(), x[0].sin() * (-x[0] * x[0]).exp()));
        let lhs = p.apply(&z).unwrap();
        let rhs = dft(&z, Direction::Forward).scale(p.phase_factor());
        assert!(lhs.sub(&rhs).unwrap().norm_l2() < 1e-9);
    }

    #[test]
    fn phase_limits() {
        let free = QuadraticHamiltonian::free_particle(1);
        let c = resolve_phase(&free, 1e-3, 4).unwrap();
        assert!((c - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-12);
        let c = resolve_phase(&free, -0.5, 4).unwrap();
        assert!((c - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-12);
        assert_eq!(resolve_phase(&free, 0.0, 4).unwrap(), Complex64::new(1.0, 0.0));
        let free2 = QuadraticHamiltonian::free_particle(2);
        let c = resolve_phase(&free2, 0.3, 4).unwrap();
        assert!((c - Complex64::from_polar(1.0, -PI / 2.0)).norm() < 1e-12);
    }

    #[test]
    fn harmonic_phase_composition_and_doubling() {
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let direct = resolve_phase(&h, PI / 2.0, 16).unwrap();
        let pq = free_at(&h, PI / 4.0).unwrap();
        let cq = resolve_phase(&h, PI / 4.0, 8).unwrap();
        let composed = compose_phase(cq, &pq, cq, &pq).unwrap();
        assert!((direct - composed).norm() < 1e-6);
        for t in [0.4, 2.0, 3.5, 5.0, 8.0] {
            let a = resolve_phase(&h, t, 16).unwrap();
            let b = resolve_phase(&h, t, 32).unwrap();
            assert!((a - b).norm() < 1e-6);
        }
        assert!(matches!(resolve_phase(&h, PI, 16), Err(Error::NotFree { .. })));
    }

    #[test]
    fn path_jumps_over_exceptional_step() {
        // 4 steps of pi/2 land exactly on pi after two steps
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let c = resolve_phase(&h, 1.5 * PI, 3).unwrap();
        let fine = resolve_phase(&h, 1.5 * PI, 64).unwrap();
        assert!((c - fine).norm() < 1e-12);
    }

    #[test]
    fn zero_hamiltonian_is_never_free() {
        let h = QuadraticHamiltonian::zero(1);
        assert!(resolve_phase(&h, 1.0, 4).is_err());
    }

    #[test]
    fn constant_modulus_kernel() {
        let g = GridSpec::new(1, 4.0, 64).unwrap();
        let h = QuadraticHamiltonian::harmonic_oscillator(1);
        let p = MetaplecticPropagator::for_flow(&h, 0.9, g, Method::Quadrature, PhaseMode::Skip).unwrap();
        let k = p.kernel().unwrap();
        let expect = 1.0 / 0.9f64.sin().sqrt();
        assert!(k.entries().iter().all(|v| (v.norm() - expect).abs() < 1e-10));
    }

    #[test]
    fn two_dim_fast_matches_quadrature() {
        let g = GridSpec::new(2, 3.0, 16).unwrap();
        let h = QuadraticHamiltonian::harmonic_oscillator(2);
        let q = MetaplecticPropagator::for_flow(&h, 0.6, g, Method::Quadrature, PhaseMode::Skip).unwrap();
        let f = MetaplecticPropagator::for_flow(&h, 0.6, g, Method::FastChirpFFT, PhaseMode::Skip).unwrap();
        let v = SampledField::from_fn(g, |x| Complex64::new((-PI * (x[0] * x[0] + x[1] * x[1])).exp(), x[1] * 0.1));
        let a = q.apply(&v).unwrap();
        let b = f.apply(&v).unwrap();
        assert!(a.sub(&b).unwrap().norm_l2() <= 1e-10 * a.norm_l2());
    }

    #[test]
    fn mehler_refuses_exceptional() {
        let g = GridSpec::new(1, 4.0, 16).unwrap();
        assert!(matches!(mehler_oracle(PI, g, PhaseMode::Skip), Err(Error::NotFree { .. })));
    }
}
