//! Tangential vector spherical harmonics on the unit sphere.
//!
//! Convention, used everywhere in the crate:
//!
//! * `U_lm = ∇_S Y_lm / sqrt(l(l+1))` (grad-type),
//! * `V_lm = r̂ × U_lm` (curl-type),
//!
//! for `1 <= l <= L`, `|m| <= l`. Both families are orthonormal in
//! `L²(S², dΩ)` and mutually orthogonal. Hence `r̂ × (aU + bV) = aV - bU`.
//! Coefficients are always taken against the unit-sphere measure `dΩ`,
//! regardless of the physical radius.

use super::legendre::{signed, LegendreTable};
use super::quadrature::SphereGrid;
use super::vec3::{C3, C0, V3};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VshError {
    #[error("field is not tangential: radial leakage {0:e} exceeds 1e-10 relative")]
    NotTangential(f64),
    #[error("sample count {got} does not match grid size {want}")]
    SizeMismatch { got: usize, want: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VshCoeffs {
    pub lmax: usize,
    /// `U_lm` coefficients at `index(l, m)`.
    pub grad: Vec<Complex64>,
    /// `V_lm` coefficients at `index(l, m)`.
    pub curl: Vec<Complex64>,
}

/// Position of `(l, m)` in coefficient vectors, `l >= 1`.
#[inline]
pub fn index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 - 1 + m) as usize
}

/// Number of `(l, m)` pairs with `1 <= l <= lmax`.
#[inline]
pub fn count(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1) - 1
}

/// Position of `(l, m)` in scalar coefficient vectors, `l >= 0`.
#[inline]
pub fn scalar_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

impl VshCoeffs {
    pub fn zeros(lmax: usize) -> Self {
        VshCoeffs {
            lmax,
            grad: vec![C0; count(lmax)],
            curl: vec![C0; count(lmax)],
        }
    }

    /// `Σ |a|² + |b|²`, the `L²(S²)` energy of the field.
    pub fn energy(&self) -> f64 {
        self.grad.iter().chain(&self.curl).map(|z| z.norm_sqr()).sum()
    }

    pub fn degree_energy(&self, l: usize) -> f64 {
        let (s, e) = (index(l, -(l as i64)), index(l, l as i64) + 1);
        self.grad[s..e].iter().chain(&self.curl[s..e]).map(|z| z.norm_sqr()).sum()
    }

    /// Energy fraction carried by the top 10% of degrees (at least one).
    pub fn tail(&self) -> f64 {
        let total = self.energy();
        if total == 0.0 {
            return 0.0;
        }
        let top = ((self.lmax as f64) / 10.0).ceil().max(1.0) as usize;
        let first = self.lmax + 1 - top;
        let t: f64 = (first..=self.lmax).map(|l| self.degree_energy(l)).sum();
        t / total
    }

    /// Applies `r̂ ×`: `(a, b) -> (-b, a)`.
    pub fn rotate_normal(&self) -> Self {
        VshCoeffs {
            lmax: self.lmax,
            grad: self.curl.iter().map(|z| -z).collect(),
            curl: self.grad.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        VshCoeffs {
            lmax: self.lmax,
            grad: self.grad.iter().map(|z| z * s).collect(),
            curl: self.curl.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, o: &VshCoeffs) -> Self {
        assert_eq!(self.lmax, o.lmax);
        VshCoeffs {
            lmax: self.lmax,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            curl: self.curl.iter().zip(&o.curl).map(|(a, b)| a + b).collect(),
        }
    }

    /// Copies into a coefficient set of degree `lmax`, truncating or padding.
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = VshCoeffs::zeros(lmax);
        let n = count(lmax.min(self.lmax));
        out.grad[..n].copy_from_slice(&self.grad[..n]);
        out.curl[..n].copy_from_slice(&self.curl[..n]);
        out
    }

    /// Relative `L²` distance `‖self - o‖ / ‖o‖`.
    pub fn rel_diff(&self, o: &VshCoeffs) -> f64 {
        let d: f64 = self
            .grad
            .iter()
            .zip(&o.grad)
            .chain(self.curl.iter().zip(&o.curl))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (d / o.energy()).sqrt()
    }
}

/// Result of an analysis: coefficients plus the tail diagnostic.
#[derive(Debug, Clone)]
pub struct VshAnalysis {
    pub coeffs: VshCoeffs,
    pub tail: f64,
}

struct RingBasis {
    ct: f64,
    st: f64,
}

fn ring_frames(ct: f64, st: f64, phi: f64) -> (V3, V3, V3) {
    let (sp, cp) = phi.sin_cos();
    let rhat = [st * cp, st * sp, ct];
    let th = [ct * cp, ct * sp, -st];
    let ph = [-sp, cp, 0.0];
    (rhat, th, ph)
}

fn exp_table(grid: &SphereGrid, lmax: usize) -> Vec<Complex64> {
    // e^{i m φ_j} for m in -lmax..=lmax, row-major in m
    let n = grid.n_phi;
    let mut t = Vec::with_capacity((2 * lmax + 1) * n);
    for m in -(lmax as i64)..=(lmax as i64) {
        for j in 0..n {
            t.push(Complex64::from_polar(1.0, m as f64 * grid.phi(j)));
        }
    }
    t
}

/// Projects a tangential field sampled on `grid` onto `U_lm`, `V_lm`,
/// `l <= lmax`. Exact for band-limited fields when `lmax <= grid.max_degree`.
pub fn vsh_analyze(grid: &SphereGrid, samples: &[C3], lmax: usize) -> Result<VshAnalysis, VshError> {
    if samples.len() != grid.len() {
        return Err(VshError::SizeMismatch {
            got: samples.len(),
            want: grid.len(),
        });
    }
    let fmax = samples
        .iter()
        .map(|f| f.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .sqrt();
    let mut leak = 0.0f64;
    for (x, f) in grid.nodes.iter().zip(samples) {
        let r = (f[0] * x[0] + f[1] * x[1] + f[2] * x[2]).norm();
        leak = leak.max(r);
    }
    if fmax > 0.0 && leak > 1e-10 * fmax {
        return Err(VshError::NotTangential(leak / fmax));
    }
    let mut out = VshCoeffs::zeros(lmax);
    let et = exp_table(grid, lmax);
    let n = grid.n_phi;
    let dphi = 2.0 * std::f64::consts::PI / n as f64;
    let nm = 2 * lmax + 1;
    for (i, &ct) in grid.cos_theta.iter().enumerate() {
        let rb = RingBasis {
            ct,
            st: (1.0 - ct * ct).sqrt(),
        };
        let mut ft = vec![C0; n];
        let mut fp = vec![C0; n];
        for j in 0..n {
            let (_, th, ph) = ring_frames(rb.ct, rb.st, grid.phi(j));
            let f = samples[i * n + j];
            ft[j] = f[0] * th[0] + f[1] * th[1] + f[2] * th[2];
            fp[j] = f[0] * ph[0] + f[1] * ph[1] + f[2] * ph[2];
        }
        // azimuthal transforms ∫ f e^{-imφ} dφ
        let mut gt = vec![C0; nm];
        let mut gp = vec![C0; nm];
        for mi in 0..nm {
            let row = &et[mi * n..(mi + 1) * n];
            let mut st = C0;
            let mut sp = C0;
            for j in 0..n {
                let e = row[j].conj();
                st += ft[j] * e;
                sp += fp[j] * e;
            }
            gt[mi] = st * dphi;
            gp[mi] = sp * dphi;
        }
        let w = grid.ring_weights[i];
        let tab = LegendreTable::new(lmax, rb.ct, rb.st);
        for l in 1..=lmax {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            for m in -(l as i64)..=(l as i64) {
                let (_, q, dp) = signed(&tab, l, m);
                let mi = (m + lmax as i64) as usize;
                let imq = Complex64::new(0.0, m as f64 * q);
                let a = gt[mi] * dp - imq * gp[mi];
                let b = gp[mi] * dp + imq * gt[mi];
                let k = index(l, m);
                out.grad[k] += a * (w * norm);
                out.curl[k] += b * (w * norm);
            }
        }
    }
    let tail = out.tail();
    Ok(VshAnalysis { coeffs: out, tail })
}

/// Evaluates `Σ a_lm U_lm + b_lm V_lm` at the grid nodes (Cartesian).
pub fn vsh_synthesize(coeffs: &VshCoeffs, grid: &SphereGrid) -> Vec<C3> {
    let lmax = coeffs.lmax;
    let n = grid.n_phi;
    let nm = 2 * lmax + 1;
    let et = exp_table(grid, lmax);
    let mut out = vec![[C0; 3]; grid.len()];
    for (i, &ct) in grid.cos_theta.iter().enumerate() {
        let st = (1.0 - ct * ct).sqrt();
        let tab = LegendreTable::new(lmax, ct, st);
        let mut gt = vec![C0; nm];
        let mut gp = vec![C0; nm];
        for l in 1..=lmax {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            for m in -(l as i64)..=(l as i64) {
                let (_, q, dp) = signed(&tab, l, m);
                let k = index(l, m);
                let a = coeffs.grad[k] * norm;
                let b = coeffs.curl[k] * norm;
                let imq = Complex64::new(0.0, m as f64 * q);
                let mi = (m + lmax as i64) as usize;
                gt[mi] += a * dp - imq * b;
                gp[mi] += imq * a + b * dp;
            }
        }
        for j in 0..n {
            let mut vt = C0;
            let mut vp = C0;
            for mi in 0..nm {
                let e = et[mi * n + j];
                vt += gt[mi] * e;
                vp += gp[mi] * e;
            }
            let (_, th, ph) = ring_frames(ct, st, grid.phi(j));
            out[i * n + j] = [
                vt * th[0] + vp * ph[0],
                vt * th[1] + vp * ph[1],
                vt * th[2] + vp * ph[2],
            ];
        }
    }
    out
}

/// Scalar coefficients `∫ f conj(Y_lm) dΩ`, `0 <= l <= lmax`, at `scalar_index`.
pub fn scalar_analyze(grid: &SphereGrid, samples: &[Complex64], lmax: usize) -> Vec<Complex64> {
    let n = grid.n_phi;
    let nm = 2 * lmax + 1;
    let et = exp_table(grid, lmax);
    let dphi = 2.0 * std::f64::consts::PI / n as f64;
    let mut out = vec![C0; (lmax + 1) * (lmax + 1)];
    for (i, &ct) in grid.cos_theta.iter().enumerate() {
        let st = (1.0 - ct * ct).sqrt();
        let tab = LegendreTable::new(lmax, ct, st);
        let mut g = vec![C0; nm];
        for mi in 0..nm {
            let mut s = C0;
            for j in 0..n {
                s += samples[i * n + j] * et[mi * n + j].conj();
            }
            g[mi] = s * dphi;
        }
        let w = grid.ring_weights[i];
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                let (p, _, _) = signed(&tab, l, m);
                out[scalar_index(l, m)] += g[(m + lmax as i64) as usize] * (p * w);
            }
        }
    }
    out
}

/// Evaluates `Σ c_lm Y_lm` at the grid nodes.
pub fn scalar_synthesize(coeffs: &[Complex64], lmax: usize, grid: &SphereGrid) -> Vec<Complex64> {
    let n = grid.n_phi;
    let nm = 2 * lmax + 1;
    let et = exp_table(grid, lmax);
    let mut out = vec![C0; grid.len()];
    for (i, &ct) in grid.cos_theta.iter().enumerate() {
        let st = (1.0 - ct * ct).sqrt();
        let tab = LegendreTable::new(lmax, ct, st);
        let mut g = vec![C0; nm];
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                let (p, _, _) = signed(&tab, l, m);
                g[(m + lmax as i64) as usize] += coeffs[scalar_index(l, m)] * p;
            }
        }
        for j in 0..n {
            let mut v = C0;
            for mi in 0..nm {
                v += g[mi] * et[mi * n + j];
            }
            out[i * n + j] = v;
        }
    }
    out
}

/// `Y_lm`, `U_lm`, `V_lm` at a single unit vector for all `l <= lmax`.
#[derive(Debug, Clone)]
pub struct PointBasis {
    pub lmax: usize,
    /// At `scalar_index`.
    pub y: Vec<Complex64>,
    /// At `index`.
    pub u: Vec<C3>,
    pub v: Vec<C3>,
    pub rhat: V3,
}

impl PointBasis {
    pub fn new(lmax: usize, x: V3) -> Self {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let rxy = x[0].hypot(x[1]);
        let (ct, st) = (x[2] / r, rxy / r);
        let phi = x[1].atan2(x[0]);
        let (rhat, th, ph) = ring_frames(ct, st, phi);
        let tab = LegendreTable::new(lmax, ct, st);
        let mut y = vec![C0; (lmax + 1) * (lmax + 1)];
        let mut u = vec![[C0; 3]; count(lmax)];
        let mut v = vec![[C0; 3]; count(lmax)];
        for l in 0..=lmax {
            for m in -(l as i64)..=(l as i64) {
                let (p, q, dp) = signed(&tab, l, m);
                let e = Complex64::from_polar(1.0, m as f64 * phi);
                y[scalar_index(l, m)] = e * p;
                if l == 0 {
                    continue;
                }
                let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
                let imq = Complex64::new(0.0, m as f64 * q);
                let ut = e * dp * norm;
                let up = e * imq * norm;
                let k = index(l, m);
                u[k] = [
                    ut * th[0] + up * ph[0],
                    ut * th[1] + up * ph[1],
                    ut * th[2] + up * ph[2],
                ];
                // V = r̂ × U: θ̂ -> φ̂, φ̂ -> -θ̂
                v[k] = [
                    ut * ph[0] - up * th[0],
                    ut * ph[1] - up * th[1],
                    ut * ph[2] - up * th[2],
                ];
            }
        }
        PointBasis { lmax, y, u, v, rhat }
    }
}
