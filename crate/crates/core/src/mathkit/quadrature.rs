//! Gauss–Legendre rules and the product grid on the unit sphere.

use super::vec3::V3;
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre_p(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product grid: `L+1` Gauss–Legendre rings in `cos θ` times `2L+2` equispaced
/// azimuths. Integrates every spherical harmonic of degree `<= 2L+1` exactly.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub max_degree: usize,
    pub cos_theta: Vec<f64>,
    pub ring_weights: Vec<f64>,
    pub n_phi: usize,
    /// Ring-major: index `i_theta * n_phi + i_phi`.
    pub nodes: Vec<V3>,
    pub weights: Vec<f64>,
}

pub fn sphere_quadrature(l: usize) -> SphereGrid {
    let l = l.max(1);
    let n_theta = l + 1;
    let n_phi = 2 * l + 2;
    let (ct, wt) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (c, w) in ct.iter().zip(&wt) {
        let s = (1.0 - c * c).sqrt();
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            nodes.push([s * phi.cos(), s * phi.sin(), *c]);
            weights.push(w * dphi);
        }
    }
    SphereGrid {
        max_degree: l,
        cos_theta: ct,
        ring_weights: wt,
        n_phi,
        nodes,
        weights,
    }
}

impl SphereGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * 2.0 * PI / self.n_phi as f64
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: Fn(V3) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for p in 0..14 {
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn weights_sum_to_four_pi() {
        for l in [1, 4, 17, 60] {
            let g = sphere_quadrature(l);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-12);
        }
    }
}
