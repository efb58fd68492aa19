//! Complex geometrical optics solutions
//! `E₀ = η e^{τ(x·ρ - t) + i√(τ²+k²) x·ρ⊥}`, `H₀ = θ e^{(same)}` of
//! `curl E₀ = ik H₀`, `curl H₀ = -ik E₀`.
//!
//! With `ζ = -iτρ + √(τ²+k²)ρ⊥` the phase is `e^{iζ·x}` and curl acts as `iζ∧`.

use crate::mathkit::frame::{build_frame, Frame, FrameError};
use crate::mathkit::quadrature::gauss_legendre;
use crate::mathkit::vec3::{add, ccross, cdot, cnorm, conj3, cscale, scale, to_c, C3, V3};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("volume quadrature did not converge to 1e-6 (last relative change {0:e})")]
    QuadratureUnderResolved(f64),
}

/// Which amplitude pair `(a, b)` is used.
///
/// * `Impenetrable`: `a = √2 ρ⊥`, `b = ρ×ρ⊥`, giving `|η| ~ τ`, `|θ| ~ 1`.
/// * `Penetrable`: `a = ρ×ρ⊥`, `b = conj(ζ/|ζ|)`, giving `|η| ~ 1`, `|θ| ~ τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgoMode {
    Impenetrable,
    Penetrable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgoProbe {
    pub k: f64,
    pub tau: f64,
    pub t: f64,
    pub frame: Frame,
    pub mode: CgoMode,
    pub zeta: C3,
    pub a: V3,
    pub b: C3,
    pub eta: C3,
    pub theta: C3,
}

pub fn make_zeta(k: f64, tau: f64, frame: &Frame) -> C3 {
    let s = (tau * tau + k * k).sqrt();
    let mut z = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        z[i] = Complex64::new(s * frame.rho_perp[i], -tau * frame.rho[i]);
    }
    z
}

pub fn build_probe(k: f64, tau: f64, t: f64, rho: V3, mode: CgoMode) -> Result<CgoProbe, CgoError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(CgoError::InvalidParameter(format!("k must be positive, got {k}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(CgoError::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    if !t.is_finite() {
        return Err(CgoError::InvalidParameter("t must be finite".into()));
    }
    let frame = build_frame(rho)?;
    let zeta = make_zeta(k, tau, &frame);
    let zn = cnorm(zeta);
    let (a, b) = match mode {
        CgoMode::Impenetrable => (scale(2f64.sqrt(), frame.rho_perp), to_c(frame.rho_cross)),
        CgoMode::Penetrable => (frame.rho_cross, conj3(cscale((1.0 / zn).into(), zeta))),
    };
    let ac = to_c(a);
    let kc = Complex64::new(k, 0.0);
    let za = cdot(zeta, ac);
    let zb = cdot(zeta, b);
    let inv = Complex64::new(1.0 / zn, 0.0);
    let mut eta = [Complex64::new(0.0, 0.0); 3];
    let mut theta = [Complex64::new(0.0, 0.0); 3];
    let zxa = ccross(zeta, ac);
    let zxb = ccross(zeta, b);
    for i in 0..3 {
        eta[i] = inv * (-za * zeta[i] - kc * zxb[i] + kc * kc * ac[i]);
        theta[i] = inv * (kc * zxa[i] - zb * zeta[i] + kc * kc * b[i]);
    }
    Ok(CgoProbe {
        k,
        tau,
        t,
        frame,
        mode,
        zeta,
        a,
        b,
        eta,
        theta,
    })
}

/// Fields at a point as `vector · e^{exponent}`; the oscillatory phase is
/// folded into the vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgoFields {
    pub e: C3,
    pub h: C3,
    pub exponent: f64,
}

impl CgoFields {
    pub fn e_plain(&self) -> C3 {
        cscale(self.exponent.exp().into(), self.e)
    }

    pub fn h_plain(&self) -> C3 {
        cscale(self.exponent.exp().into(), self.h)
    }
}

impl CgoProbe {
    pub fn s(&self) -> f64 {
        (self.tau * self.tau + self.k * self.k).sqrt()
    }

    /// `τ(x·ρ - t)` and `√(τ²+k²) x·ρ⊥`.
    pub fn exponent_phase(&self, x: V3) -> (f64, f64) {
        let f = &self.frame;
        let xr = x[0] * f.rho[0] + x[1] * f.rho[1] + x[2] * f.rho[2];
        let xp = x[0] * f.rho_perp[0] + x[1] * f.rho_perp[1] + x[2] * f.rho_perp[2];
        (self.tau * (xr - self.t), self.s() * xp)
    }

    /// Same probe at another level `t`.
    pub fn with_t(&self, t: f64) -> CgoProbe {
        CgoProbe { t, ..self.clone() }
    }

    /// Symbol of the curl: `curl F = iζ ∧ F` for fields of this probe.
    pub fn curl_symbol(&self, v: C3) -> C3 {
        cscale(Complex64::new(0.0, 1.0), ccross(self.zeta, v))
    }
}

/// Relative residuals of `ζ·ζ = k²`, `ζ·η = 0`, `ζ·θ = 0`, `ζ∧η = kθ`,
/// `ζ∧θ = -kη`, each divided by the natural size of its terms.
pub fn algebra_residuals(p: &CgoProbe) -> [f64; 5] {
    let k = Complex64::new(p.k, 0.0);
    let (zn, en, tn) = (cnorm(p.zeta), cnorm(p.eta), cnorm(p.theta));
    let zz = (cdot(p.zeta, p.zeta) - k * k).norm() / (zn * zn);
    let ze = cdot(p.zeta, p.eta).norm() / (zn * en);
    let zt = cdot(p.zeta, p.theta).norm() / (zn * tn);
    let d1 = ccross(p.zeta, p.eta);
    let d2 = ccross(p.zeta, p.theta);
    let mut r1 = [Complex64::new(0.0, 0.0); 3];
    let mut r2 = r1;
    for i in 0..3 {
        r1[i] = d1[i] - k * p.theta[i];
        r2[i] = d2[i] + k * p.eta[i];
    }
    [zz, ze, zt, cnorm(r1) / (zn * en), cnorm(r2) / (zn * tn)]
}

pub fn eval_cgo(probe: &CgoProbe, x: V3) -> CgoFields {
    let (ex, ph) = probe.exponent_phase(x);
    let p = Complex64::from_polar(1.0, ph);
    CgoFields {
        e: cscale(p, probe.eta),
        h: cscale(p, probe.theta),
        exponent: ex,
    }
}

/// Natural logs of the `L^q(ball)` norms of `E₀`, `H₀` and `curl H₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeNorms {
    pub ln_e0: f64,
    pub ln_h0: f64,
    pub ln_curl_h0: f64,
}

/// `L^q` norms over the ball by radial × polar Gauss–Legendre × azimuthal
/// quadrature in the probe frame, with the exponent peeled at
/// `max_{x∈ball} x·ρ`. Node counts double until the result moves by less
/// than `1e-6` relative.
pub fn cgo_volume_norms(probe: &CgoProbe, center: V3, radius: f64, q: f64) -> Result<VolumeNorms, CgoError> {
    if !(q >= 1.0) {
        return Err(CgoError::InvalidParameter(format!("q must be >= 1, got {q}")));
    }
    if !(radius > 0.0) {
        return Err(CgoError::InvalidParameter("ball radius must be positive".into()));
    }
    let mut n = 16;
    let mut prev = volume_sums(probe, center, radius, q, n);
    let mut change = f64::INFINITY;
    while n <= 512 {
        n *= 2;
        let cur = volume_sums(probe, center, radius, q, n);
        change = (0..3)
            .map(|i| ((cur.0[i] - prev.0[i]) / cur.0[i]).abs())
            .fold(0.0, f64::max);
        prev = cur;
        if change < 1e-6 {
            let peel = prev.1;
            let ln = |s: f64| (s.ln() + peel) / q;
            return Ok(VolumeNorms {
                ln_e0: ln(prev.0[0]),
                ln_h0: ln(prev.0[1]),
                ln_curl_h0: ln(prev.0[2]),
            });
        }
    }
    Err(CgoError::QuadratureUnderResolved(change))
}

/// Peeled sums of `|E₀|^q`, `|H₀|^q`, `|curl H₀|^q` and the peeled exponent
/// (already multiplied by `q`).
fn volume_sums(probe: &CgoProbe, center: V3, radius: f64, q: f64, n: usize) -> ([f64; 3], f64) {
    let f = &probe.frame;
    let (xr, wr) = gauss_legendre(n);
    let (xs, ws) = gauss_legendre(n);
    let nphi = 8;
    let top = add(center, scale(radius, f.rho));
    let peel = q * probe.exponent_phase(top).0;
    let mut acc = [0.0; 3];
    for (ri, wri) in xr.iter().zip(&wr) {
        let r = 0.5 * radius * (ri + 1.0);
        let wrad = 0.5 * radius * wri * r * r;
        for (si, wsi) in xs.iter().zip(&ws) {
            let st = (1.0 - si * si).max(0.0).sqrt();
            for j in 0..nphi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / nphi as f64;
                let w = wrad * wsi * 2.0 * std::f64::consts::PI / nphi as f64;
                let d = add(
                    scale(*si, f.rho),
                    add(scale(st * phi.cos(), f.rho_perp), scale(st * phi.sin(), f.rho_cross)),
                );
                let x = add(center, scale(r, d));
                let fl = eval_cgo(probe, x);
                let g = (q * fl.exponent - peel).exp();
                let curl_h = probe.curl_symbol(fl.h);
                acc[0] += w * g * cnorm(fl.e).powf(q);
                acc[1] += w * g * cnorm(fl.h).powf(q);
                acc[2] += w * g * cnorm(curl_h).powf(q);
            }
        }
    }
    (acc, peel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_example() {
        let f = Frame {
            rho: [0.0, 0.0, 1.0],
            rho_perp: [1.0, 0.0, 0.0],
            rho_cross: [0.0, 1.0, 0.0],
        };
        let z = make_zeta(1.0, 2.0, &f);
        assert!((z[0] - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(z[1], Complex64::new(0.0, 0.0));
        assert_eq!(z[2], Complex64::new(0.0, -2.0));
        assert!((cdot(z, z) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zeta_norm() {
        let f = build_frame([0.0, 1.0, 0.0]).unwrap();
        let z = make_zeta(2.0, 10.0, &f);
        assert!((cnorm(z).powi(2) - 204.0).abs() < 1e-12);
        for i in 0..3 {
            assert_eq!(z[i].im, -10.0 * f.rho[i]);
        }
    }

    #[test]
    fn zero_exponent_on_level_plane() {
        let p = build_probe(1.3, 4.0, 0.25, [0.0, 0.0, 1.0], CgoMode::Penetrable).unwrap();
        let fl = eval_cgo(&p, [0.3, -0.2, 0.25]);
        assert!(fl.exponent.abs() < 1e-15);
        assert!((cnorm(fl.e) - cnorm(p.eta)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_probe(0.0, 1.0, 0.0, [1.0, 0.0, 0.0], CgoMode::Impenetrable).is_err());
        assert!(build_probe(1.0, -1.0, 0.0, [1.0, 0.0, 0.0], CgoMode::Impenetrable).is_err());
    }
}
