//! Exact spectral impedance maps for concentric spheres.
//!
//! Maxwell system `curl E = ikμH`, `curl H = -ikE` (`ε ≡ 1`). In a homogeneous
//! shell with wave number `κ = k√μ` every solution is a sum of
//!
//! * TE modes: `E = α z_l(κr) V_lm`, tangential `H` along `U_lm`;
//! * TM modes: `E = β Ñ_lm` (tangential part `-w_l U_lm`), `H` along `V_lm`;
//!
//! where `z_l` is a spherical Bessel combination and `w_l(x) = (x z_l)'/x`.
//!
//! Sign table for traces at `r = R` (see [`crate::mathkit::vsh`]):
//!
//! | pol | `ν∧E` component | `ν∧H` component | scalar `λ`        |
//! |-----|-----------------|-----------------|-------------------|
//! | TE  | grad (`U`)      | curl (`V`)      | `-i w_l / z_l`    |
//! | TM  | curl (`V`)      | grad (`U`)      | `-i z_l / w_l`    |
//!
//! so `Λ(aU + bV) = λ_TM b U + λ_TE a V`. The obstacle perturbation
//! `Δ = λ_D - λ_∅` is formed in closed form through the Wronskian, never by
//! subtracting the two maps, so tiny high-degree entries keep full relative
//! precision.

use crate::mathkit::bessel::{riccati_ratio, sph_bessel_seq, BesselKind};
use crate::mathkit::vec3::{C0, C3, V3};
use crate::mathkit::vsh::{index, scalar_index, PointBasis, VshCoeffs};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Default threshold for the relative size of the radial determinant (see
/// `scaled_det`).
pub const DEFAULT_GUARD: f64 = 1e-10;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForwardError {
    #[error("k = {k} is within the guard of a resonance at degree {l} ({pol:?}): scaled determinant {det:e}")]
    NearEigenvalue { k: f64, l: usize, pol: Pol, det: f64 },
    #[error("invalid medium: permeability inside the obstacle is {0}, must be positive")]
    InvalidMedium(f64),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("coefficient degree {got} exceeds operator degree {max}")]
    DegreeMismatch { got: usize, max: usize },
    #[error("point at radius {0} lies outside the solution domain")]
    PointOutOfDomain(f64),
    #[error("radial functions at degree {0} leave the double-precision range")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    TE,
    TM,
}

/// Concentric spheres `|x| < R_D` inside `|x| < R_Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub r_d: f64,
    pub r_omega: f64,
}

impl Geometry {
    pub fn new(r_d: f64, r_omega: f64) -> Result<Self, ForwardError> {
        if !(r_d > 0.0 && r_d < r_omega && r_omega.is_finite()) {
            return Err(ForwardError::InvalidGeometry(format!(
                "need 0 < R_D < R_Omega, got R_D = {r_d}, R_Omega = {r_omega}"
            )));
        }
        Ok(Geometry { r_d, r_omega })
    }
}

/// Permeability contrast: `μ = 1 - mu_d` inside the obstacle, `1` outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub mu_d: f64,
}

impl Medium {
    pub fn mu_inside(&self) -> f64 {
        1.0 - self.mu_d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Empty,
    Pec { geometry: Geometry },
    Transmission { geometry: Geometry, medium: Medium },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceOperator {
    pub k: f64,
    pub r_omega: f64,
    pub lmax: usize,
    pub obstacle: Obstacle,
    /// Indexed by degree `l`; entry 0 unused.
    pub lambda_te: Vec<Complex64>,
    pub lambda_tm: Vec<Complex64>,
    /// `λ_D - λ_∅` per degree, formed without cancellation.
    pub delta_te: Vec<Complex64>,
    pub delta_tm: Vec<Complex64>,
}

impl ImpedanceOperator {
    pub fn lambda(&self, l: usize, pol: Pol) -> Complex64 {
        match pol {
            Pol::TE => self.lambda_te[l],
            Pol::TM => self.lambda_tm[l],
        }
    }

    pub fn delta(&self, l: usize, pol: Pol) -> Complex64 {
        match pol {
            Pol::TE => self.delta_te[l],
            Pol::TM => self.delta_tm[l],
        }
    }
}

/// Spherical Bessel `j`, `y` and their `w` ratios at a real argument.
struct Radial {
    x: f64,
    j: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl Radial {
    fn new(lmax: usize, x: f64) -> Self {
        let z = Complex64::new(x, 0.0);
        Radial {
            x,
            j: sph_bessel_seq(BesselKind::J, lmax, z).expect("j has no pole"),
            y: sph_bessel_seq(BesselKind::Y, lmax, z).expect("x > 0"),
        }
    }
    fn wj(&self, l: usize) -> Complex64 {
        riccati_ratio(&self.j, l, self.x.into())
    }
    fn wy(&self, l: usize) -> Complex64 {
        riccati_ratio(&self.y, l, self.x.into())
    }
}

fn check_k(k: f64, lmax: usize) -> Result<(), ForwardError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(ForwardError::InvalidGeometry(format!("k must be positive, got {k}")));
    }
    if lmax < 1 {
        return Err(ForwardError::InvalidGeometry("degree L must be >= 1".into()));
    }
    Ok(())
}

pub fn impedance_empty(k: f64, r_omega: f64, lmax: usize) -> Result<ImpedanceOperator, ForwardError> {
    impedance(k, r_omega, Obstacle::Empty, lmax, DEFAULT_GUARD)
}

pub fn impedance_pec(k: f64, geometry: Geometry, lmax: usize) -> Result<ImpedanceOperator, ForwardError> {
    impedance(k, geometry.r_omega, Obstacle::Pec { geometry }, lmax, DEFAULT_GUARD)
}

pub fn impedance_transmission(
    k: f64,
    geometry: Geometry,
    medium: Medium,
    lmax: usize,
) -> Result<ImpedanceOperator, ForwardError> {
    impedance(
        k,
        geometry.r_omega,
        Obstacle::Transmission { geometry, medium },
        lmax,
        DEFAULT_GUARD,
    )
}

/// Per-degree coefficients `(n, d)` of the outer-shell profile
/// `z = d·j - n·y` (TE then TM), from the condition at `r = R_D`.
fn inner_condition(
    k: f64,
    obstacle: &Obstacle,
    lmax: usize,
) -> Result<Option<Vec<[(Complex64, Complex64); 2]>>, ForwardError> {
    let (geometry, mu) = match obstacle {
        Obstacle::Empty => return Ok(None),
        Obstacle::Pec { geometry } => (geometry, None),
        Obstacle::Transmission { geometry, medium } => {
            let mu = medium.mu_inside();
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(ForwardError::InvalidMedium(mu));
            }
            if medium.mu_d == 0.0 {
                return Ok(None);
            }
            (geometry, Some(mu))
        }
    };
    Geometry::new(geometry.r_d, geometry.r_omega)?;
    let a = Radial::new(lmax, k * geometry.r_d);
    let inner = mu.map(|mu| (mu, Radial::new(lmax, k * mu.sqrt() * geometry.r_d)));
    let mut out = vec![[(C0, C0); 2]; lmax + 1];
    for l in 1..=lmax {
        // TE: ratio H/E continuity, PEC is w(a) = 0
        let (p0, p1) = match &inner {
            None => (Complex64::new(1.0, 0.0), C0),
            Some((mu, r1)) => (mu.sqrt() * r1.j[l], r1.wj(l)),
        };
        let (p0, p1) = unit_pair(p0, p1);
        let te = unit_pair(p0 * a.wj(l) - p1 * a.j[l], p0 * a.wy(l) - p1 * a.y[l]);
        // TM: PEC is z(a) = 0
        let (q0, q1) = match &inner {
            None => (Complex64::new(1.0, 0.0), C0),
            Some((mu, r1)) => (mu.sqrt() * r1.wj(l), r1.j[l]),
        };
        let (q0, q1) = unit_pair(q0, q1);
        let tm = unit_pair(q0 * a.j[l] - q1 * a.wj(l), q0 * a.y[l] - q1 * a.wy(l));
        out[l] = [te, tm];
    }
    Ok(Some(out))
}

/// Rescales a homogeneous pair so its larger entry has modulus 1; the
/// interior Bessel factors otherwise underflow at high degree.
fn unit_pair(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let s = a.norm().max(b.norm());
    if s == 0.0 || !s.is_finite() {
        return (a, b);
    }
    (a / s, b / s)
}

/// `|c00·c11 - c01·c10| / (|c00·c11| + |c01·c10|)`: how much of the
/// determinant cancels. It is 1 without cancellation and 0 at a resonance;
/// NaN when both products leave the double range.
fn scaled_det(c00: Complex64, c01: Complex64, c10: Complex64, c11: Complex64) -> f64 {
    let (p, q) = (c00 * c11, c01 * c10);
    let s = p.norm() + q.norm();
    if s == 0.0 {
        return f64::NAN;
    }
    (p - q).norm() / s
}

/// General constructor with an explicit guard threshold.
pub fn impedance(
    k: f64,
    r_omega: f64,
    obstacle: Obstacle,
    lmax: usize,
    guard: f64,
) -> Result<ImpedanceOperator, ForwardError> {
    check_k(k, lmax)?;
    if !(r_omega > 0.0 && r_omega.is_finite()) {
        return Err(ForwardError::InvalidGeometry(format!("R_Omega must be positive, got {r_omega}")));
    }
    if let Obstacle::Pec { geometry } | Obstacle::Transmission { geometry, .. } = &obstacle {
        if geometry.r_omega != r_omega {
            return Err(ForwardError::InvalidGeometry("R_Omega mismatch".into()));
        }
    }
    let bx = k * r_omega;
    let b = Radial::new(lmax, bx);
    let cond = inner_condition(k, &obstacle, lmax)?;
    let per_l: Vec<Result<[Complex64; 4], ForwardError>> = (1..=lmax)
        .into_par_iter()
        .map(|l| {
            let (j, y, wj, wy) = (b.j[l], b.y[l], b.wj(l), b.wy(l));
            let s = j.norm().max(wj.norm());
            if j.norm() / s < guard {
                return Err(ForwardError::NearEigenvalue { k, l, pol: Pol::TE, det: j.norm() / s });
            }
            if wj.norm() / s < guard {
                return Err(ForwardError::NearEigenvalue { k, l, pol: Pol::TM, det: wj.norm() / s });
            }
            let lam_te = (-I * wj).fdiv(j);
            let lam_tm = (-I * j).fdiv(wj);
            let (dte, dtm) = match &cond {
                None => (C0, C0),
                Some(c) => {
                    let [(n, d), (nm, dm)] = c[l];
                    let det = scaled_det(j, y, n, d);
                    if !det.is_finite() {
                        return Err(ForwardError::NonFinite(l));
                    }
                    if det < guard {
                        return Err(ForwardError::NearEigenvalue { k, l, pol: Pol::TE, det });
                    }
                    let det = scaled_det(wj, wy, nm, dm);
                    if !det.is_finite() {
                        return Err(ForwardError::NonFinite(l));
                    }
                    if det < guard {
                        return Err(ForwardError::NearEigenvalue { k, l, pol: Pol::TM, det });
                    }
                    // Wronskian j y' - j' y = 1/x² collapses λ_D - λ_∅. Dividing in two
                    // steps keeps every intermediate inside the double range.
                    let b2 = bx * bx;
                    let dte = (I * n).fdiv(j).fdiv(b2 * (d * j - n * y));
                    let dtm = (-I * nm).fdiv(wj).fdiv(b2 * (dm * wj - nm * wy));
                    (dte, dtm)
                }
            };
            let out = [lam_te + dte, lam_tm + dtm, dte, dtm];
            if out.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(ForwardError::NonFinite(l));
            }
            Ok(out)
        })
        .collect();
    let mut op = ImpedanceOperator {
        k,
        r_omega,
        lmax,
        obstacle,
        lambda_te: vec![C0; lmax + 1],
        lambda_tm: vec![C0; lmax + 1],
        delta_te: vec![C0; lmax + 1],
        delta_tm: vec![C0; lmax + 1],
    };
    for (i, r) in per_l.into_iter().enumerate() {
        let [a, b, c, d] = r?;
        let l = i + 1;
        op.lambda_te[l] = a;
        op.lambda_tm[l] = b;
        op.delta_te[l] = c;
        op.delta_tm[l] = d;
    }
    Ok(op)
}

fn apply_with(te: &[Complex64], tm: &[Complex64], lmax: usize, f: &VshCoeffs) -> Result<VshCoeffs, ForwardError> {
    if f.lmax > lmax {
        return Err(ForwardError::DegreeMismatch { got: f.lmax, max: lmax });
    }
    let mut out = VshCoeffs::zeros(f.lmax);
    for l in 1..=f.lmax {
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            out.grad[i] = tm[l] * f.curl[i];
            out.curl[i] = te[l] * f.grad[i];
        }
    }
    Ok(out)
}

/// `ν∧E` coefficients to `ν∧H` coefficients.
pub fn apply_impedance(op: &ImpedanceOperator, f: &VshCoeffs) -> Result<VshCoeffs, ForwardError> {
    apply_with(&op.lambda_te, &op.lambda_tm, op.lmax, f)
}

/// `(Λ_D - Λ_∅) f` using the cancellation-free entries.
pub fn apply_delta(op: &ImpedanceOperator, f: &VshCoeffs) -> Result<VshCoeffs, ForwardError> {
    apply_with(&op.delta_te, &op.delta_tm, op.lmax, f)
}

/// Spectral description of `E` and `H` on the sphere `|x| = r`:
/// tangential parts as VSH coefficients, radial parts as scalar `Y_lm`
/// coefficients (`scalar_index`).
#[derive(Debug, Clone)]
pub struct ShellFields {
    pub r: f64,
    pub e_tan: VshCoeffs,
    pub e_rad: Vec<Complex64>,
    pub h_tan: VshCoeffs,
    pub h_rad: Vec<Complex64>,
}

/// Per-degree amplitudes turning boundary data into radial profiles.
struct Profiles {
    k: f64,
    lmax: usize,
    obstacle: Obstacle,
    /// Outer-shell profile coefficients `(A, B)` for TE and TM.
    ab: Vec<[(Complex64, Complex64); 2]>,
    /// Profile values `Z_TE(R)` and `W_TM(R)` at the outer boundary.
    z_te_r: Vec<Complex64>,
    w_tm_r: Vec<Complex64>,
}

impl Profiles {
    fn new(op: &ImpedanceOperator) -> Result<Self, ForwardError> {
        let cond = inner_condition(op.k, &op.obstacle, op.lmax)?;
        let mut ab = vec![[(Complex64::new(1.0, 0.0), C0); 2]; op.lmax + 1];
        if let Some(c) = cond {
            for l in 1..=op.lmax {
                let [(n, d), (nm, dm)] = c[l];
                ab[l] = [(d, -n), (dm, -nm)];
            }
        }
        let b = Radial::new(op.lmax, op.k * op.r_omega);
        let mut z_te_r = vec![C0; op.lmax + 1];
        let mut w_tm_r = vec![C0; op.lmax + 1];
        for l in 1..=op.lmax {
            let (a0, b0) = ab[l][0];
            z_te_r[l] = a0 * b.j[l] + b0 * b.y[l];
            let (a1, b1) = ab[l][1];
            w_tm_r[l] = a1 * b.wj(l) + b1 * b.wy(l);
        }
        Ok(Profiles {
            k: op.k,
            lmax: op.lmax,
            obstacle: op.obstacle,
            ab,
            z_te_r,
            w_tm_r,
        })
    }

    fn inner(&self) -> Option<(f64, f64)> {
        match self.obstacle {
            Obstacle::Transmission { geometry, medium } if medium.mu_d != 0.0 => {
                Some((geometry.r_d, medium.mu_inside()))
            }
            _ => None,
        }
    }

    fn shell(&self, f: &VshCoeffs, r: f64) -> ShellFields {
        let lmax = self.lmax;
        let mut e_tan = VshCoeffs::zeros(lmax);
        let mut h_tan = VshCoeffs::zeros(lmax);
        let mut e_rad = vec![C0; (lmax + 1) * (lmax + 1)];
        let mut h_rad = vec![C0; (lmax + 1) * (lmax + 1)];
        let k = self.k;
        let inside = self.inner().filter(|(rd, _)| r < *rd);
        // outer-shell profiles at r, or at R_D for matching
        let r_eval = match inside {
            Some((rd, _)) => rd,
            None => r,
        };
        let o = Radial::new(lmax, k * r_eval);
        // interior profiles at r and at the interface
        let ir = inside.map(|(rd, mu)| {
            let k1 = k * mu.sqrt();
            (mu, Radial::new(lmax, k1 * r), Radial::new(lmax, k1 * rd))
        });
        for l in 1..=lmax {
            let (a0, b0) = self.ab[l][0];
            let (a1, b1) = self.ab[l][1];
            let z_te = a0 * o.j[l] + b0 * o.y[l];
            let w_te = a0 * o.wj(l) + b0 * o.wy(l);
            let z_tm = a1 * o.j[l] + b1 * o.y[l];
            let w_tm = a1 * o.wj(l) + b1 * o.wy(l);
            let sl = ((l * (l + 1)) as f64).sqrt();
            for m in -(l as i64)..=(l as i64) {
                let i = index(l, m);
                let si = scalar_index(l, m);
                let alpha = (-f.grad[i]).fdiv(self.z_te_r[l]);
                let beta = (-f.curl[i]).fdiv(self.w_tm_r[l]);
                match &ir {
                    None => {
                        let kr = k * r;
                        e_tan.curl[i] += alpha * z_te;
                        h_tan.grad[i] += I * alpha * w_te;
                        h_rad[si] += I * alpha * sl * z_te / kr;
                        e_tan.grad[i] += -beta * w_tm;
                        e_rad[si] += -beta * sl * z_tm / kr;
                        h_tan.curl[i] += -I * beta * z_tm;
                    }
                    Some((mu, rin, rd)) => {
                        let sm = mu.sqrt();
                        let kr = k * sm * r;
                        let a_in = (alpha * z_te).fdiv(rd.j[l]);
                        let b_in = (beta * w_tm).fdiv(rd.wj(l));
                        e_tan.curl[i] += a_in * rin.j[l];
                        h_tan.grad[i] += I * a_in / sm * rin.wj(l);
                        h_rad[si] += I * a_in / sm * sl * rin.j[l] / kr;
                        e_tan.grad[i] += -b_in * rin.wj(l);
                        e_rad[si] += -b_in * sl * rin.j[l] / kr;
                        h_tan.curl[i] += -I * b_in / sm * rin.j[l];
                    }
                }
            }
        }
        ShellFields {
            r,
            e_tan,
            e_rad,
            h_tan,
            h_rad,
        }
    }
}

/// Fields of the boundary-value problem with `ν∧E = f` on `|x| = R_Ω`, on the
/// sphere of radius `r`.
pub fn annulus_shell(op: &ImpedanceOperator, f: &VshCoeffs, r: f64) -> Result<ShellFields, ForwardError> {
    if f.lmax > op.lmax {
        return Err(ForwardError::DegreeMismatch { got: f.lmax, max: op.lmax });
    }
    check_radius(op, r)?;
    let p = Profiles::new(op)?;
    Ok(p.shell(&f.resized(op.lmax), r))
}

fn check_radius(op: &ImpedanceOperator, r: f64) -> Result<(), ForwardError> {
    let lo = match op.obstacle {
        Obstacle::Pec { geometry } => geometry.r_d * (1.0 - 1e-12),
        _ => 0.0,
    };
    if !(r >= lo && r <= op.r_omega * (1.0 + 1e-12)) || (r <= 0.0) {
        return Err(ForwardError::PointOutOfDomain(r));
    }
    Ok(())
}

/// Point values `(E, H)` of the solved problem with boundary data `f`.
/// Points exactly at the origin are moved to radius `1e-10`.
pub fn eval_annulus_fields(
    op: &ImpedanceOperator,
    boundary_e: &VshCoeffs,
    points: &[V3],
) -> Result<Vec<(C3, C3)>, ForwardError> {
    if boundary_e.lmax > op.lmax {
        return Err(ForwardError::DegreeMismatch { got: boundary_e.lmax, max: op.lmax });
    }
    let f = boundary_e.resized(op.lmax);
    let p = Profiles::new(op)?;
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let mut x = x;
        let mut r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < 1e-10 && !matches!(op.obstacle, Obstacle::Pec { .. }) {
            x = [0.0, 0.0, 1e-10];
            r = 1e-10;
        }
        check_radius(op, r)?;
        let sh = p.shell(&f, r);
        let pb = PointBasis::new(op.lmax, x);
        out.push((point_value(&pb, &sh.e_tan, &sh.e_rad), point_value(&pb, &sh.h_tan, &sh.h_rad)));
    }
    Ok(out)
}

/// Evaluates a tangential + radial spectral field at one point.
pub fn point_value(pb: &PointBasis, tan: &VshCoeffs, rad: &[Complex64]) -> C3 {
    let mut v = [C0; 3];
    for l in 1..=tan.lmax.min(pb.lmax) {
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            let s = rad[scalar_index(l, m)] * pb.y[scalar_index(l, m)];
            for c in 0..3 {
                v[c] += tan.grad[i] * pb.u[i][c] + tan.curl[i] * pb.v[i][c] + s * pb.rhat[c];
            }
        }
    }
    v
}
