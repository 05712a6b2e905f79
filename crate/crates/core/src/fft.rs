//! Centred DFT helpers on top of rustfft.
//!
//! Sample j sits at offset j - N/2, so for even N
//! sum_j f_j e^{-2pi i (j-N/2)(k-N/2)/N} = (-1)^{k+N/2} FFT((-1)^j f_j)_k.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct CenteredFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CenteredFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CenteredFft").field("len", &self.len).finish()
    }
}

impl CenteredFft {
    pub fn new(len: usize) -> Self {
        assert!(len >= 2 && len % 2 == 0, "centred FFT needs even length");
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    fn flip(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }

    fn post(&self, buf: &mut [Complex64]) {
        self.flip(buf);
        if (self.len / 2) % 2 == 1 {
            for v in buf.iter_mut() {
                *v = -*v;
            }
        }
    }

    /// In place sum_j f_j e^{-2pi i (j-N/2)(k-N/2)/N}, unnormalized.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.len, 0);
        for chunk in buf.chunks_exact_mut(self.len) {
            self.flip(chunk);
        }
        self.forward.process(buf);
        for chunk in buf.chunks_exact_mut(self.len) {
            self.post(chunk);
        }
    }

    /// In place sum_k F_k e^{+2pi i (j-N/2)(k-N/2)/N}, unnormalized.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len() % self.len, 0);
        for chunk in buf.chunks_exact_mut(self.len) {
            self.flip(chunk);
        }
        self.inverse.process(buf);
        for chunk in buf.chunks_exact_mut(self.len) {
            self.post(chunk);
        }
    }
}

/// Plain (uncentred) length-N transforms, used by the chirp-z path.
pub fn plan_pair(len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
}

/// Trigonometric refinement of a periodic sequence to twice the rate:
/// `out[2j] = v[j]`, odd entries are the band-limited midpoints. The Nyquist
/// coefficient is split evenly between +N/2 and -N/2.
pub fn refine2(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let (fwd, _) = plan_pair(n);
    let (_, inv2) = plan_pair(2 * n);
    let mut spec = values.to_vec();
    fwd.process(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); 2 * n];
    let half = n / 2;
    for k in 0..half {
        padded[k] = spec[k];
    }
    for k in half + 1..n {
        padded[n + k] = spec[k];
    }
    padded[half] = spec[half] * 0.5;
    padded[n + half] = spec[half] * 0.5;
    inv2.process(&mut padded);
    let s = 1.0 / n as f64;
    padded.iter().map(|v| v * s).collect()
}

/// Periodic band-limited shift: returns `v(p + 1/2)` for each integer p.
/// The Nyquist term is treated as cos(pi p), whose half-step value is zero.
pub fn half_shift(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let (fwd, inv) = plan_pair(n);
    let mut spec = values.to_vec();
    fwd.process(&mut spec);
    for (k, v) in spec.iter_mut().enumerate() {
        let kk = if k < n / 2 {
            k as f64
        } else if k == n / 2 {
            *v = Complex64::new(0.0, 0.0);
            continue;
        } else {
            k as f64 - n as f64
        };
        *v *= Complex64::from_polar(1.0, std::f64::consts::PI * kk / n as f64);
    }
    inv.process(&mut spec);
    let s = 1.0 / n as f64;
    spec.iter().map(|v| v * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn centred_matches_direct_sum() {
        for n in [8usize, 12, 16] {
            let f: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64).sin(), 0.1 * j as f64)).collect();
            let mut buf = f.clone();
            CenteredFft::new(n).forward(&mut buf);
            for k in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, fj) in f.iter().enumerate() {
                    let ph = -2.0 * PI * (j as f64 - n as f64 / 2.0) * (k as f64 - n as f64 / 2.0) / n as f64;
                    s += fj * Complex64::from_polar(1.0, ph);
                }
                assert!((s - buf[k]).norm() < 1e-12, "n={n} k={k}");
            }
            let mut back = buf.clone();
            CenteredFft::new(n).inverse(&mut back);
            for j in 0..n {
                assert!((back[j] / n as f64 - f[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn refine_and_half_shift_on_trig_poly() {
        let n = 16;
        let g = |p: f64| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * p / n as f64) + 0.5 * (2.0 * PI * 5.0 * p / n as f64).cos();
        let v: Vec<Complex64> = (0..n).map(|p| g(p as f64)).collect();
        let r = refine2(&v);
        for (m, rv) in r.iter().enumerate() {
            assert!((rv - g(m as f64 / 2.0)).norm() < 1e-13);
        }
        let hs = half_shift(&v);
        for (p, hv) in hs.iter().enumerate() {
            assert!((hv - g(p as f64 + 0.5)).norm() < 1e-13);
        }
    }
}
