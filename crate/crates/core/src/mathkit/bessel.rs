//! Spherical Bessel functions `j_l`, `y_l` and `h_l^(1)` of complex argument.
//!
//! `j_l` uses upward recurrence when `l <= |z|` and otherwise a downward
//! ratio recurrence normalized against `j_0` or `j_1`. On the real axis `y_l`
//! recurs upward. Off it, the Hankel function that decays in the half plane
//! recurs upward and the other two kinds follow from `h^(1) + h^(2) = 2j`,
//! since `y_l ≈ ±i j_l` there and a direct recurrence cancels.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    Y,
    H1,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("y_l and h_l have a pole at z = 0")]
    PoleAtZero,
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn sph_bessel(kind: BesselKind, l: usize, z: Complex64) -> Result<Complex64, BesselError> {
    Ok(sph_bessel_seq(kind, l, z)?[l])
}

/// Values for degrees `0..=lmax`.
pub fn sph_bessel_seq(
    kind: BesselKind,
    lmax: usize,
    z: Complex64,
) -> Result<Vec<Complex64>, BesselError> {
    match kind {
        BesselKind::J => Ok(j_seq(lmax, z)),
        BesselKind::Y | BesselKind::H1 if z.im != 0.0 => {
            let j = j_seq(lmax, z);
            let out = if z.im > 0.0 {
                let h1 = h1_upward(lmax, z);
                match kind {
                    BesselKind::Y => h1.iter().zip(&j).map(|(h, j)| -I * (h - j)).collect(),
                    _ => h1,
                }
            } else {
                // h^(2)(z) = conj(h^(1)(conj z))
                let h2: Vec<Complex64> = h1_upward(lmax, z.conj()).iter().map(|h| h.conj()).collect();
                match kind {
                    BesselKind::Y => h2.iter().zip(&j).map(|(h, j)| -I * (j - h)).collect(),
                    _ => h2.iter().zip(&j).map(|(h, j)| 2.0 * j - h).collect(),
                }
            };
            Ok(out)
        }
        BesselKind::Y => {
            if z == Complex64::new(0.0, 0.0) {
                return Err(BesselError::PoleAtZero);
            }
            let c = z.cos();
            let s = z.sin();
            let y0 = -c / z;
            let y1 = -c / (z * z) - s / z;
            Ok(upward(lmax, z, y0, y1))
        }
        BesselKind::H1 => {
            if z == Complex64::new(0.0, 0.0) {
                return Err(BesselError::PoleAtZero);
            }
            Ok(h1_upward(lmax, z))
        }
    }
}

fn upward(lmax: usize, z: Complex64, f0: Complex64, f1: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(f0);
    if lmax >= 1 {
        out.push(f1);
    }
    for n in 1..lmax {
        let next = (2 * n + 1) as f64 / z * out[n] - out[n - 1];
        out.push(next);
    }
    out
}

fn h1_upward(lmax: usize, z: Complex64) -> Vec<Complex64> {
    let e = (I * z).exp();
    let h0 = -I * e / z;
    let h1 = -e * (z + I) / (z * z);
    upward(lmax, z, h0, h1)
}

fn j_seq(lmax: usize, z: Complex64) -> Vec<Complex64> {
    let az = z.norm();
    if az == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); lmax + 1];
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    if az < 1e-3 {
        return (0..=lmax).map(|l| j_series(l, z)).collect();
    }
    let s = z.sin();
    let c = z.cos();
    let j0 = s / z;
    let j1 = s / (z * z) - c / z;
    if (lmax as f64) <= az {
        return upward(lmax, z, j0, j1);
    }
    // r[n] = j_n / j_{n-1}, from a continued-fraction start well above lmax
    let start = lmax + 30 + (az as usize) + ((lmax as f64).sqrt() as usize) * 4;
    let mut r = vec![Complex64::new(0.0, 0.0); lmax + 2];
    let mut next = Complex64::new(0.0, 0.0);
    for n in (1..=start).rev() {
        let cur = z / ((2 * n + 1) as f64 - z * next);
        if n <= lmax + 1 {
            r[n] = cur;
        }
        next = cur;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); lmax + 1];
    if j0.norm() >= j1.norm() {
        out[0] = j0;
        for n in 1..=lmax {
            out[n] = out[n - 1] * r[n];
        }
    } else {
        out[0] = j0;
        out[1] = j1;
        for n in 2..=lmax {
            out[n] = out[n - 1] * r[n];
        }
    }
    out
}

/// Power series, used for very small `|z|`.
fn j_series(l: usize, z: Complex64) -> Complex64 {
    let mut df = 1.0; // (2l+1)!!
    for k in 1..=l {
        df *= (2 * k + 1) as f64;
    }
    let lead = z.powu(l as u32) / df;
    let w = -z * z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..20 {
        term = term * w / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// `w_l(z) = (z f_l(z))' / z = f_{l-1}(z) - l f_l(z) / z` for `l >= 1`,
/// taken from a sequence of values.
pub fn riccati_ratio(seq: &[Complex64], l: usize, z: Complex64) -> Complex64 {
    debug_assert!(l >= 1);
    seq[l - 1] - l as f64 * seq[l] / z
}

/// Derivative `f_l'(z) = f_{l-1}(z) - (l+1) f_l(z) / z` for `l >= 1`;
/// `f_0' = -f_1`.
pub fn derivative(seq: &[Complex64], l: usize, z: Complex64) -> Complex64 {
    if l == 0 {
        -seq[1]
    } else {
        seq[l - 1] - (l + 1) as f64 * seq[l] / z
    }
}
