//! Small dense helpers: Pade matrix exponential, guarded inverses and a
//! complex GEMM wrapper.

use matrixmultiply::{zgemm, CGemmOption};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::MAX_CONDITION;

pub type RealMatrix = DMatrix<f64>;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

pub fn norm1(m: &RealMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Scaling-and-squaring with a degree 13 Pade approximant.
pub fn expm(a: &RealMatrix) -> RealMatrix {
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > THETA13 {
        (nrm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-s);
    let id = RealMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Inverse with an exact 1-norm condition check.
pub fn guarded_inverse(m: &RealMatrix) -> Result<RealMatrix> {
    let inv = m
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let condition = norm1(m) * norm1(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    Ok(inv)
}

/// Signature (positive minus negative eigenvalue count) of a symmetric
/// matrix. Eigenvalues within `rel_tol * max|eig|` of zero make it `None`.
pub fn signature(m: &RealMatrix, rel_tol: f64) -> Option<i32> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let mut sig = 0;
    for &e in eig.iter() {
        if e.abs() <= rel_tol * scale {
            return None;
        }
        sig += if e > 0.0 { 1 } else { -1 };
    }
    Some(sig)
}

/// Row-major complex product `c = alpha * a * b` with `a` m-by-k and `b` k-by-n.
pub fn cmatmul(
    a: &[Complex64],
    b: &[Complex64],
    m: usize,
    k: usize,
    n: usize,
    alpha: Complex64,
) -> Vec<Complex64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![Complex64::new(0.0, 0.0); m * n];
    // Complex64 is repr(C) {re, im}, the same layout as [f64; 2].
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [alpha.re, alpha.im],
            a.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}
