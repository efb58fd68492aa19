//! Orthonormal associated Legendre functions and spherical harmonics.
//!
//! `Y_lm(θ, φ) = P̄_lm(cos θ) e^{imφ}` with the Condon–Shortley phase and
//! `∫|Y_lm|² dΩ = 1`; negative orders follow `Y_{l,-m} = (-1)^m conj(Y_lm)`.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Packed index for `0 <= m <= l`.
#[inline]
pub fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Tables at one polar angle for `0 <= m <= l <= lmax`:
/// `p = P̄_lm`, `q = P̄_lm / sin θ` (regular at the poles for `m >= 1`, zero for
/// `m = 0`) and `dp = dP̄_lm/dθ`.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    pub lmax: usize,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub dp: Vec<f64>,
}

impl LegendreTable {
    pub fn new(lmax: usize, cos_t: f64, sin_t: f64) -> Self {
        let n = tri(lmax, lmax) + 1;
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut dp = vec![0.0; n];
        let x = cos_t;
        // m = 0 column
        p[0] = 1.0 / (4.0 * PI).sqrt();
        if lmax >= 1 {
            p[tri(1, 0)] = 3f64.sqrt() * x * p[0];
        }
        for l in 2..=lmax {
            let (a, b) = ab(l, 0);
            p[tri(l, 0)] = a * (x * p[tri(l - 1, 0)] - b * p[tri(l - 2, 0)]);
        }
        // m >= 1 columns of q = P̄ / sin θ; q_mm carries sin^(m-1)
        let mut qmm = 0.0;
        for m in 1..=lmax {
            qmm = if m == 1 {
                -(1.5f64).sqrt() * p[0]
            } else {
                -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t * qmm
            };
            q[tri(m, m)] = qmm;
            if m < lmax {
                q[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * qmm;
            }
            for l in m + 2..=lmax {
                let (a, b) = ab(l, m);
                q[tri(l, m)] = a * (x * q[tri(l - 1, m)] - b * q[tri(l - 2, m)]);
            }
            for l in m..=lmax {
                p[tri(l, m)] = sin_t * q[tri(l, m)];
            }
        }
        // derivatives
        for l in 1..=lmax {
            dp[tri(l, 0)] = ((l * (l + 1)) as f64).sqrt() * p[tri(l, 1)];
            for m in 1..=l {
                let c = if l > m {
                    (((2 * l + 1) as f64 / (2 * l - 1) as f64) * ((l * l - m * m) as f64)).sqrt()
                } else {
                    0.0
                };
                let below = if l > m { q[tri(l - 1, m)] } else { 0.0 };
                dp[tri(l, m)] = l as f64 * x * q[tri(l, m)] - c * below;
            }
        }
        LegendreTable { lmax, p, q, dp }
    }

    pub fn from_theta(lmax: usize, theta: f64) -> Self {
        Self::new(lmax, theta.cos(), theta.sin())
    }
}

fn ab(l: usize, m: usize) -> (f64, f64) {
    let l2 = (l * l) as f64;
    let m2 = (m * m) as f64;
    let a = ((4.0 * l2 - 1.0) / (l2 - m2)).sqrt();
    let lm1 = (l - 1) as f64;
    let b = ((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
    (a, b)
}

/// Signed-order lookup into a table: `(P̄, Q, dP̄/dθ)` for `Y_lm`.
#[inline]
pub fn signed(t: &LegendreTable, l: usize, m: i64) -> (f64, f64, f64) {
    let am = m.unsigned_abs() as usize;
    let i = tri(l, am);
    let s = if m < 0 && am % 2 == 1 { -1.0 } else { 1.0 };
    (s * t.p[i], s * t.q[i], s * t.dp[i])
}

/// Direct evaluation of `Y_lm` at a unit vector.
pub fn ylm(l: usize, m: i64, x: [f64; 3]) -> Complex64 {
    let (theta, phi) = angles(x);
    let t = LegendreTable::from_theta(l, theta);
    let (p, _, _) = signed(&t, l, m);
    Complex64::from_polar(p, m as f64 * phi)
}

/// Polar and azimuthal angle of a nonzero vector.
pub fn angles(x: [f64; 3]) -> (f64, f64) {
    let rxy = x[0].hypot(x[1]);
    (rxy.atan2(x[2]), x[1].atan2(x[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkit::quadrature::sphere_quadrature;

    #[test]
    fn y10_closed_form() {
        let x = [0.3, -0.4, (1.0f64 - 0.25).sqrt()];
        let want = (3.0 / (4.0 * PI)).sqrt() * x[2];
        assert!((ylm(1, 0, x).re - want).abs() < 1e-15);
    }

    #[test]
    fn y11_closed_form() {
        let x = [0.6, 0.0, 0.8];
        // Y_11 = -sqrt(3/8π) sin θ e^{iφ}
        let want = -(3.0 / (8.0 * PI)).sqrt() * 0.6;
        assert!((ylm(1, 1, x).re - want).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let th = 0.7;
        let h = 1e-6;
        let a = LegendreTable::from_theta(12, th + h);
        let b = LegendreTable::from_theta(12, th - h);
        let t = LegendreTable::from_theta(12, th);
        for l in 0..=12 {
            for m in 0..=l {
                let fd = (a.p[tri(l, m)] - b.p[tri(l, m)]) / (2.0 * h);
                assert!((fd - t.dp[tri(l, m)]).abs() < 1e-7, "l={l} m={m}");
            }
        }
    }

    #[test]
    fn orthonormal_on_grid() {
        let g = sphere_quadrature(8);
        let pairs = [((3, 2), (3, 2), 1.0), ((5, 1), (7, 1), 0.0), ((8, -3), (8, -3), 1.0)];
        for ((l1, m1), (l2, m2), want) in pairs {
            let s: Complex64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(x, w)| ylm(l1, m1, *x) * ylm(l2, m2, *x).conj() * *w)
                .sum();
            assert!((s - want).norm() < 1e-12);
        }
    }
}
