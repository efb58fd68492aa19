//! Small fixed-size vector helpers for real and complex 3-vectors.

use num_complex::Complex64;

pub type V3 = [f64; 3];
pub type C3 = [Complex64; 3];

pub const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(s: f64, a: V3) -> V3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn normalize(a: V3) -> V3 {
    scale(1.0 / norm(a), a)
}

pub fn to_c(a: V3) -> C3 {
    [a[0].into(), a[1].into(), a[2].into()]
}

/// Bilinear product `a·b` without conjugation.
pub fn cdot(a: C3, b: C3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Hermitian product `a·conj(b)`.
pub fn hdot(a: C3, b: C3) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

pub fn ccross(a: C3, b: C3) -> C3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn cscale(s: Complex64, a: C3) -> C3 {
    [s * a[0], s * a[1], s * a[2]]
}

pub fn cadd(a: C3, b: C3) -> C3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn csub(a: C3, b: C3) -> C3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Hermitian norm `sqrt(a·conj(a))`.
pub fn cnorm(a: C3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

pub fn conj3(a: C3) -> C3 {
    [a[0].conj(), a[1].conj(), a[2].conj()]
}
