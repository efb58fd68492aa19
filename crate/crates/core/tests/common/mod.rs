#![allow(dead_code)]

use enclosure::mathkit::vec3::{C3, V3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_unit(r: &mut ChaCha8Rng) -> V3 {
    loop {
        let v: [f64; 3] = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n: f64 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn random_c(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Central-difference curl of a complex vector field.
pub fn fd_curl<F: Fn(V3) -> C3>(f: &F, x: V3, h: f64) -> C3 {
    let d = |i: usize, c: usize| {
        let mut a = x;
        let mut b = x;
        a[i] += h;
        b[i] -= h;
        (f(a)[c] - f(b)[c]) / (2.0 * h)
    };
    [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
}

pub fn fd_div<F: Fn(V3) -> C3>(f: &F, x: V3, h: f64) -> Complex64 {
    let d = |i: usize| {
        let mut a = x;
        let mut b = x;
        a[i] += h;
        b[i] -= h;
        (f(a)[i] - f(b)[i]) / (2.0 * h)
    };
    d(0) + d(1) + d(2)
}

pub fn norm3(v: C3) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

pub fn sub3(a: C3, b: C3) -> C3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(s: Complex64, a: C3) -> C3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// 4th-order Runge–Kutta for `u'' = (l(l+1)/r² - κ²) u` from `r0` to `r1`.
pub fn rk4_radial(l: usize, kappa: f64, r0: f64, r1: f64, u0: f64, du0: f64, steps: usize) -> (f64, f64) {
    let ll = (l * (l + 1)) as f64;
    let f = |r: f64, u: f64, v: f64| (v, (ll / (r * r) - kappa * kappa) * u);
    let h = (r1 - r0) / steps as f64;
    let (mut u, mut v, mut r) = (u0, du0, r0);
    for _ in 0..steps {
        let (k1u, k1v) = f(r, u, v);
        let (k2u, k2v) = f(r + h / 2.0, u + h / 2.0 * k1u, v + h / 2.0 * k1v);
        let (k3u, k3v) = f(r + h / 2.0, u + h / 2.0 * k2u, v + h / 2.0 * k2v);
        let (k4u, k4v) = f(r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += h;
    }
    (u, v)
}

/// Fourth-order central-difference curl.
pub fn fd_curl4<F: Fn(V3) -> C3>(f: &F, x: V3, h: f64) -> C3 {
    let d = |i: usize, c: usize| {
        let at = |s: f64| {
            let mut y = x;
            y[i] += s * h;
            f(y)[c]
        };
        (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h)
    };
    [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
}
