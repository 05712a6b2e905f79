//! Trotter approximants E_n(t) = (e^{-i(t/n)H0} e^{-i(t/n)V})^n for a quadratic
//! H0 = a^w, their kernels, reference kernels and diagnostics.
//!
//! The short step mu(A_tau) is applied in one of two ways. `Shear` factors
//! A_tau into a lower shear, an upper shear and a lower shear, i.e. a chirp
//! multiplication, a Fourier multiplier and a chirp multiplication. For small
//! tau all three are slowly varying on the grid. `ChirpZ` is the chirp-z
//! evaluation of the quadrature sum, which reproduces the sampled kernel
//! exactly but whose chirps are aliased once cot tau exceeds the grid band.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::CenteredFft;
use crate::grid::{
    compact_indices, kernel_of_operator, sup_norm_on_compact, GridSpec, KernelMatrix, SampledField, TrigSeries,
};
use crate::metaplectic::{resolve_phase, Method, MetaplecticPropagator, PhaseMode, DEFAULT_PHASE_STEPS};
use crate::symplectic::{
    default_free_tol, flow, is_free, phase_form, PhaseQuadratic, QuadraticHamiltonian, SymplecticBlocks,
};
use crate::tfa::{gaussian_window, mod_norm, sjostrand_decompose, windowed_fl1, Boundary, NormKind, StftSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitOrder {
    /// (e^{-i tau H0} e^{-i tau V})^n
    KineticPotential,
    /// (e^{-i tau V} e^{-i tau H0})^n
    PotentialKinetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    Shear,
    ChirpZ,
}

/// mu(S) for a free 1d S = [[1,0],[p,1]] [[1,b],[0,1]] [[1,0],[q,1]]:
/// multiply by e^{pi i q x^2}, apply the multiplier e^{-pi i b xi^2},
/// multiply by e^{pi i p x^2}.
#[derive(Debug, Clone)]
pub struct ShearStep {
    pre: Vec<Complex64>,
    mult: Vec<Complex64>,
    post: Vec<Complex64>,
    plan: CenteredFft,
}

impl ShearStep {
    /// `c` is the constant of mu(S) in front of |det B|^{-1/2} e^{2 pi i Phi}.
    pub fn new(s: &SymplecticBlocks, grid: GridSpec, c: Complex64) -> Result<Self> {
        if grid.dim() != 1 || s.dim() != 1 {
            return Err(Error::DimensionUnsupported { what: "shear steps", supported: "1", found: grid.dim() });
        }
        let (free, det_b) = is_free(s, default_free_tol(s));
        if !free {
            return Err(Error::NotFree { det_b });
        }
        let a = s.block_a()[(0, 0)];
        let b = s.block_b()[(0, 0)];
        let d = s.block_d()[(0, 0)];
        let (p, q) = ((d - 1.0) / b, (a - 1.0) / b);
        let n = grid.points();
        // the Fresnel integral of the middle factor contributes e^{i pi sgn(b) / 4}
        let scale = c * Complex64::from_polar(1.0 / n as f64, PI * b.signum() / 4.0);
        let chirp = |k: f64| grid.coords().iter().map(|x| Complex64::from_polar(1.0, PI * k * x * x)).collect();
        Ok(Self {
            pre: chirp(q),
            mult: grid.freqs().iter().map(|xi| scale * Complex64::from_polar(1.0, -PI * b * xi * xi)).collect(),
            post: chirp(p),
            plan: CenteredFft::new(n),
        })
    }

    pub fn apply_in_place(&self, f: &mut [Complex64]) {
        for (v, w) in f.iter_mut().zip(&self.pre) {
            *v *= w;
        }
        self.plan.forward(f);
        for (v, w) in f.iter_mut().zip(&self.mult) {
            *v *= w;
        }
        self.plan.inverse(f);
        for (v, w) in f.iter_mut().zip(&self.post) {
            *v *= w;
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrotterScenario {
    pub hamiltonian: QuadraticHamiltonian,
    pub potential: SampledField,
    pub time: f64,
    pub n_list: Vec<usize>,
    pub grid: GridSpec,
    pub reference_n: usize,
    pub order: SplitOrder,
    pub step_method: StepMethod,
    pub phase_mode: PhaseMode,
    series: TrigSeries,
    warnings: Vec<String>,
}

impl TrotterScenario {
    pub fn new(
        hamiltonian: QuadraticHamiltonian,
        potential: SampledField,
        time: f64,
        n_list: Vec<usize>,
        grid: GridSpec,
        reference_n: usize,
    ) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::DimensionUnsupported { what: "Trotter kernels", supported: "1", found: grid.dim() });
        }
        if hamiltonian.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: hamiltonian.dim() });
        }
        if potential.grid() != &grid {
            return Err(Error::InvalidGrid("potential is sampled on a different grid".into()));
        }
        if !time.is_finite() || time == 0.0 {
            return Err(Error::InvalidArgument(format!("time {time} must be finite and nonzero")));
        }
        if n_list.iter().any(|&n| n == 0) {
            return Err(Error::InvalidArgument("step counts must be positive".into()));
        }
        let max_n = n_list.iter().copied().max().unwrap_or(1);
        if reference_n < 4 * max_n {
            return Err(Error::InvalidArgument(format!(
                "reference n = {reference_n} must be at least 4 x max(n) = {}",
                4 * max_n
            )));
        }
        let mut warnings = Vec::new();
        let s = flow(&hamiltonian, time);
        let (free, det_b) = is_free(&s, default_free_tol(&s));
        if !free {
            warnings.push(format!("t = {time} is exceptional for H (det B = {det_b:e})"));
        }
        let series = TrigSeries::from_field(&potential);
        Ok(Self {
            hamiltonian,
            potential,
            time,
            n_list,
            grid,
            reference_n,
            order: SplitOrder::KineticPotential,
            step_method: StepMethod::Shear,
            phase_mode: PhaseMode::Resolve(DEFAULT_PHASE_STEPS),
            series,
            warnings,
        })
    }

    pub fn with_order(mut self, order: SplitOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_step_method(mut self, method: StepMethod) -> Self {
        self.step_method = method;
        self
    }

    pub fn with_phase_mode(mut self, mode: PhaseMode) -> Self {
        self.phase_mode = mode;
        self
    }

    /// Same scenario with a different potential.
    pub fn with_potential(&self, potential: SampledField) -> Result<Self> {
        let mut sc = Self::new(
            self.hamiltonian.clone(),
            potential,
            self.time,
            self.n_list.clone(),
            self.grid,
            self.reference_n,
        )?;
        sc.order = self.order;
        sc.step_method = self.step_method;
        sc.phase_mode = self.phase_mode;
        Ok(sc)
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_real_potential(&self) -> bool {
        self.potential.values().iter().all(|v| v.im == 0.0)
    }

    /// Default compact radius L/2.
    pub fn compact_radius(&self) -> f64 {
        0.5 * self.grid.half_width()
    }

    fn phase_at(&self, t: f64) -> Result<Complex64> {
        match self.phase_mode {
            PhaseMode::Skip => Ok(Complex64::new(1.0, 0.0)),
            PhaseMode::Resolve(m) => resolve_phase(&self.hamiltonian, t, m),
        }
    }

    fn propagator(&self, t: f64, method: Method) -> Result<MetaplecticPropagator> {
        Ok(MetaplecticPropagator::build(&flow(&self.hamiltonian, t), self.grid, method)?.with_phase(self.phase_at(t)?))
    }

    fn potential_phase(&self, tau: f64) -> Vec<Complex64> {
        let it = Complex64::new(0.0, -tau);
        self.potential.values().iter().map(|v| (it * v).exp()).collect()
    }

    fn is_zero_potential(&self) -> bool {
        self.series.is_zero()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    Ok(())
}

enum Step {
    Shear(ShearStep),
    Chirp(MetaplecticPropagator),
}

impl Step {
    fn new(sc: &TrotterScenario, tau: f64) -> Result<Self> {
        Ok(match sc.step_method {
            StepMethod::Shear => Step::Shear(ShearStep::new(&flow(&sc.hamiltonian, tau), sc.grid, sc.phase_at(tau)?)?),
            StepMethod::ChirpZ => Step::Chirp(sc.propagator(tau, Method::FastChirpFFT)?),
        })
    }

    fn apply(&self, g: SampledField) -> Result<SampledField> {
        match self {
            Step::Shear(s) => {
                let mut g = g;
                s.apply_in_place(g.values_mut());
                Ok(g)
            }
            Step::Chirp(p) => p.apply(&g),
        }
    }
}

fn run_steps(sc: &TrotterScenario, step: &Step, ph: &[Complex64], n: usize, f: &SampledField) -> Result<SampledField> {
    let mul = |g: &mut SampledField| {
        for (v, p) in g.values_mut().iter_mut().zip(ph) {
            *v *= p;
        }
    };
    let mut g = f.clone();
    for _ in 0..n {
        match sc.order {
            SplitOrder::KineticPotential => {
                mul(&mut g);
                g = step.apply(g)?;
            }
            SplitOrder::PotentialKinetic => {
                g = step.apply(g)?;
                mul(&mut g);
            }
        }
    }
    Ok(g)
}

/// E_n(t) f. For V = 0 this is mu(A_t) f in one step.
pub fn trotter_apply(sc: &TrotterScenario, n: usize, f: &SampledField) -> Result<SampledField> {
    check_n(n)?;
    if f.grid() != &sc.grid {
        return Err(Error::InvalidGrid("field is sampled on a different grid".into()));
    }
    if sc.is_zero_potential() {
        return sc.propagator(sc.time, Method::FastChirpFFT)?.apply(f);
    }
    let tau = sc.time / n as f64;
    run_steps(sc, &Step::new(sc, tau)?, &sc.potential_phase(tau), n, f)
}

/// e_{n,t} as a kernel matrix, one column per grid delta. For V = 0 the
/// closed-form metaplectic kernel of A_t.
pub fn trotter_kernel(sc: &TrotterScenario, n: usize) -> Result<KernelMatrix> {
    check_n(n)?;
    if sc.is_zero_potential() {
        return sc.propagator(sc.time, Method::Quadrature)?.kernel();
    }
    let tau = sc.time / n as f64;
    let step = Step::new(sc, tau)?;
    let ph = sc.potential_phase(tau);
    kernel_of_operator(|f| run_steps(sc, &step, &ph, n, f), sc.grid)
}

#[derive(Debug, Clone)]
pub struct ReferenceKernel {
    pub kernel: KernelMatrix,
    /// sup over the compact set of K(reference_n) - K(reference_n / 2)
    pub cauchy_tag: f64,
}

pub fn reference_kernel(sc: &TrotterScenario) -> Result<ReferenceKernel> {
    let kernel = trotter_kernel(sc, sc.reference_n)?;
    let half = trotter_kernel(sc, (sc.reference_n / 2).max(1))?;
    let cauchy_tag = sup_norm_on_compact(&kernel, &half, sc.compact_radius())?;
    Ok(ReferenceKernel { kernel, cauchy_tag })
}

/// Entrywise e^{-2 pi i Phi(x_i, y_j)} K.
pub fn factor_out_phase(k: &KernelMatrix, phi: &PhaseQuadratic) -> Result<KernelMatrix> {
    let g = *k.grid();
    if g.dim() != 1 || phi.dim != 1 {
        return Err(Error::DimensionUnsupported { what: "factor_out_phase", supported: "1", found: g.dim() });
    }
    let xs = g.coords();
    Ok(KernelMatrix::from_fn(g, |i, j| {
        k.get(i, j) * Complex64::from_polar(1.0, -2.0 * PI * phi.eval(&[xs[i]], &[xs[j]]))
    }))
}

/// STFT lattice for 2d norms of kernels: unit Gaussian window, patch wide
/// enough that the window leaks nothing, centres restricted to |x|, |y| <= r.
pub fn kernel_norm_spec(grid: &GridSpec, radius: f64, weight_s: f64) -> Result<StftSpec> {
    let g2 = GridSpec::new(2, grid.half_width(), grid.points())?;
    let n = grid.points();
    let needed = (6.0 / grid.spacing()).ceil() as usize;
    let patch = needed.next_power_of_two().min(n);
    let boundary = if patch == n { Boundary::Periodic } else { Boundary::Interior };
    let step = (patch / 16).max(1);
    Ok(StftSpec::new(gaussian_window(g2), step, patch, weight_s, boundary)?.with_radius(radius))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub sup_error: f64,
    pub fl1_errors: Vec<f64>,
    pub mod_inf1: f64,
    pub mod_infs: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// step counts skipped because t/n was exceptional, with the reason
    pub skipped: Vec<(usize, String)>,
    pub cauchy_tag: f64,
    /// per-axis node indices of the window centres
    pub centres: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub radius: f64,
    /// weight exponent of the windowed FL1 errors
    pub fl1_weight: f64,
    /// exponent s of the InfS column
    pub infs_weight: f64,
}

/// Snap kernel-plane points (x, y) to grid nodes.
pub fn snap_centres(grid: &GridSpec, points: &[[f64; 2]]) -> Vec<[usize; 2]> {
    let idx = |v: f64| {
        let i = ((v + grid.half_width()) / grid.spacing()).round();
        (i.max(0.0) as usize).min(grid.points() - 1)
    };
    points.iter().map(|p| [idx(p[0]), idx(p[1])]).collect()
}

pub fn convergence_report(
    sc: &TrotterScenario,
    centres: &[[f64; 2]],
    opts: ConvergenceOptions,
) -> Result<ConvergenceReport> {
    let reference = reference_kernel(sc)?;
    let spec = kernel_norm_spec(&sc.grid, opts.radius, opts.infs_weight)?;
    let phi = phase_form(&flow(&sc.hamiltonian, sc.time))?;
    let snapped = snap_centres(&sc.grid, centres);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &n in &sc.n_list {
        let k = match trotter_kernel(sc, n) {
            Ok(k) => k,
            Err(e @ Error::NotFree { .. }) | Err(e @ Error::PathThroughExceptional { .. }) => {
                skipped.push((n, e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let diff = k.sub(&reference.kernel)?.as_field_2d()?;
        let fl1_errors = snapped
            .iter()
            .map(|&c| windowed_fl1(&diff, &spec, c, opts.fl1_weight))
            .collect::<Result<Vec<_>>>()?;
        let amp = factor_out_phase(&k, &phi)?.as_field_2d()?;
        rows.push(ConvergenceRow {
            n,
            sup_error: sup_norm_on_compact(&k, &reference.kernel, opts.radius)?,
            fl1_errors,
            mod_inf1: mod_norm(&amp, &spec, NormKind::Inf1)?,
            mod_infs: mod_norm(&amp, &spec, NormKind::InfS(opts.infs_weight))?,
        });
    }
    Ok(ConvergenceReport { rows, skipped, cauchy_tag: reference.cauchy_tag, centres: snapped })
}

/// 2d Inf1 norm of e^{-2 pi i Phi_t} e_{n,t} on the compact set.
pub fn phase_factored_norm(sc: &TrotterScenario, n: usize, radius: f64) -> Result<f64> {
    let spec = kernel_norm_spec(&sc.grid, radius, 0.0)?;
    let phi = phase_form(&flow(&sc.hamiltonian, sc.time))?;
    let amp = factor_out_phase(&trotter_kernel(sc, n)?, &phi)?.as_field_2d()?;
    mod_norm(&amp, &spec, NormKind::Inf1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRow {
    pub epsilon: f64,
    pub radius: f64,
    /// Inf1 norm of V2 = V - V1
    pub rough_norm: f64,
    /// 2d Inf1 norm of e^{-2 pi i Phi_t} (e_n[V] - e_n[V1])
    pub remainder_norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub rows: Vec<PerturbationRow>,
    /// least-squares slope of log remainder against log epsilon
    pub slope: f64,
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Split V = V1 + V2 with ||V2||_Inf1 <= eps and measure the kernel of
/// E_n[V] - E_n[V1]. The bound column is eps t C e^{2tC} with C the Inf1
/// norm of V.
pub fn perturbation_split_report(sc: &TrotterScenario, epsilons: &[f64], n: usize) -> Result<PerturbationReport> {
    let radius = sc.compact_radius();
    let spec1 = StftSpec::dense(sc.grid);
    let c = mod_norm(&sc.potential, &spec1, NormKind::Inf1)?;
    let t = sc.time.abs();
    let spec2 = kernel_norm_spec(&sc.grid, radius, 0.0)?;
    let phi = phase_form(&flow(&sc.hamiltonian, sc.time))?;
    let full = trotter_kernel(sc, n)?;
    let mut rows = Vec::new();
    for &eps in epsilons {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {eps} must lie in (0, 1]")));
        }
        let split = sjostrand_decompose(&sc.potential, eps, &spec1)?;
        let smooth = sc.with_potential(split.smooth.clone())?;
        let diff = full.sub(&trotter_kernel(&smooth, n)?)?;
        let remainder_norm = mod_norm(&factor_out_phase(&diff, &phi)?.as_field_2d()?, &spec2, NormKind::Inf1)?;
        rows.push(PerturbationRow {
            epsilon: eps,
            radius: split.radius,
            rough_norm: split.rough_norm,
            remainder_norm,
            bound: eps * t * c * (2.0 * t * c).exp(),
        });
    }
    let slope = log_log_slope(&rows.iter().map(|r| (r.epsilon, r.remainder_norm)).collect::<Vec<_>>());
    Ok(PerturbationReport { rows, slope })
}

/// (2 pi i tau)^{-1/2} exp(i (x - y)^2 / (2 tau)).
pub fn free_step_kernel(tau: f64, x: f64, y: f64) -> Complex64 {
    let amp = Complex64::from_polar((2.0 * PI * tau.abs()).powf(-0.5), -PI / 4.0 * tau.signum());
    amp * Complex64::from_polar(1.0, (x - y).powi(2) / (2.0 * tau))
}

/// Polygonal-path time slicing for H0 = -Delta/2: iterated products of the
/// free one-step kernel and the potential phase. `PotentialKinetic` puts
/// V at the endpoints x_1..x_n of each leg as in the action S_n;
/// `KineticPotential` puts it at x_0..x_{n-1} and matches the default
/// Trotter order.
pub fn time_slice_free_kernel(
    v: &SampledField,
    t: f64,
    n: usize,
    grid: GridSpec,
    order: SplitOrder,
) -> Result<KernelMatrix> {
    if grid.dim() != 1 {
        return Err(Error::DimensionUnsupported { what: "time_slice_free_kernel", supported: "1", found: grid.dim() });
    }
    check_n(n)?;
    if v.grid() != &grid {
        return Err(Error::InvalidGrid("potential is sampled on a different grid".into()));
    }
    if t == 0.0 {
        return Err(Error::InvalidArgument("t must be nonzero".into()));
    }
    let tau = t / n as f64;
    let xs = grid.coords();
    let it = Complex64::new(0.0, -tau);
    let ph: Vec<Complex64> = v.values().iter().map(|u| (it * u).exp()).collect();
    let leg = KernelMatrix::from_fn(grid, |i, j| {
        let k = free_step_kernel(tau, xs[i], xs[j]);
        match order {
            SplitOrder::KineticPotential => k * ph[j],
            SplitOrder::PotentialKinetic => ph[i] * k,
        }
    });
    let mut out = leg.clone();
    for _ in 1..n {
        out = leg.compose(&out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupRow {
    pub delta: f64,
    pub sup_kernel: f64,
    pub det_b_inv_sqrt: f64,
    pub ratio: f64,
}

/// V = 0 kernels at tStar - delta for each offset.
pub fn exceptional_blowup_scan(
    h: &QuadraticHamiltonian,
    t_star: f64,
    offsets: &[f64],
    grid: GridSpec,
) -> Result<Vec<BlowupRow>> {
    let s = flow(h, t_star);
    let (free, det_b) = is_free(&s, default_free_tol(&s));
    if free {
        return Err(Error::NotExceptional { time: t_star, det_b });
    }
    if offsets.iter().any(|&d| !(d > 0.0)) || offsets.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("offsets must be positive and decreasing".into()));
    }
    offsets
        .iter()
        .map(|&delta| {
            let t = t_star - delta;
            let p = MetaplecticPropagator::build(&flow(h, t), grid, Method::Quadrature)?;
            let k = p.kernel()?;
            let idx = compact_indices(&grid, grid.half_width());
            let side = k.side();
            let sup = idx
                .iter()
                .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
                .fold(0.0f64, |m, (i, j)| m.max(k.entries()[i * side + j].norm()));
            let b = p.abs_det_b().powf(-0.5);
            Ok(BlowupRow { delta, sup_kernel: sup, det_b_inv_sqrt: b, ratio: sup / b })
        })
        .collect()
}
