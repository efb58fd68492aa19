//! Layer potentials on a sphere of radius `R` with the fundamental solution
//! `Φ_k(x, y) = -e^{ik|x-y|} / (4π|x-y|)` (note the sign).
//!
//! Densities are tangential fields in VSH coefficients. With
//! `Φ_k = -ik Σ j_l(kr<) h_l(kr>) Y_lm(x̂) conj(Y_lm(ŷ))` every operator is
//! diagonal per `(l, pol)`:
//!
//! * `curl S_k U_lm = ik²R² w_src(kR) z(kr) V_lm`,
//! * `curl S_k V_lm = -ik²R² src(kR) Ñ_z`,
//!
//! where outside the sphere `z = h_l`, `src = j_l`, and inside they swap.
//! This sign of `Φ_k` yields exterior traces `(-½I + M_k) f` and interior
//! traces `(½I + M_k) f` for `ν∧curl S_k f`.

use crate::mathkit::bessel::{derivative, riccati_ratio, sph_bessel_seq, BesselKind};
use crate::mathkit::quadrature::sphere_quadrature;
use crate::mathkit::vec3::{norm, sub, C0, C3, V3};
use crate::mathkit::vsh::{index, scalar_index, vsh_synthesize, PointBasis, VshCoeffs};
use crate::forward::point_value;
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("x and y coincide")]
    CoincidentPoints,
    #[error("point at radius {r} is within 1e-6·R of the surface R = {radius}")]
    TooCloseToSurface { r: f64, radius: f64 },
    #[error("point at radius {0} lies on the surface")]
    OnSurface(f64),
    #[error("point at radius {r} is not outside the sphere R = {radius}")]
    PointInside { r: f64, radius: f64 },
    #[error("k = {k} is near an interior Maxwell eigenvalue of the ball (degree {l}, |-1/2 + m| = {value:e})")]
    NearInteriorEigenvalue { k: f64, l: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Tangential density on the sphere `|y| = radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDensity {
    pub radius: f64,
    pub coeffs: VshCoeffs,
}

pub fn fundamental(k: f64, x: V3, y: V3) -> Result<Complex64, LayerError> {
    let d = norm(sub(x, y));
    if d == 0.0 {
        return Err(LayerError::CoincidentPoints);
    }
    Ok(-Complex64::from_polar(1.0, k * d) / (4.0 * PI * d))
}

/// `j_l`, `h_l`, their `w` ratios and derivatives at `kR` or `kr`.
struct Bes {
    x: Complex64,
    j: Vec<Complex64>,
    h: Vec<Complex64>,
}

impl Bes {
    fn new(lmax: usize, x: f64) -> Self {
        let z = Complex64::new(x, 0.0);
        Bes {
            x: z,
            j: sph_bessel_seq(BesselKind::J, lmax + 1, z).expect("j"),
            h: sph_bessel_seq(BesselKind::H1, lmax + 1, z).expect("x > 0"),
        }
    }
    fn wj(&self, l: usize) -> Complex64 {
        riccati_ratio(&self.j, l, self.x)
    }
    fn wh(&self, l: usize) -> Complex64 {
        riccati_ratio(&self.h, l, self.x)
    }
}

/// Diagonal symbols of `M_k` on grad- and curl-type coefficients.
#[derive(Debug, Clone)]
pub struct MkSymbols {
    pub grad: Vec<Complex64>,
    pub curl: Vec<Complex64>,
}

pub fn mk_symbols(k: f64, radius: f64, lmax: usize) -> MkSymbols {
    let b = Bes::new(lmax, k * radius);
    let c = I * k * k * radius * radius / 2.0;
    let mut grad = vec![C0; lmax + 1];
    let mut curl = vec![C0; lmax + 1];
    for l in 1..=lmax {
        grad[l] = -c * (b.wj(l) * b.h[l] + b.wh(l) * b.j[l]);
        curl[l] = c * (b.j[l] * b.wh(l) + b.h[l] * b.wj(l));
    }
    MkSymbols { grad, curl }
}

fn apply_diag(d: &SurfaceDensity, grad: &[Complex64], curl: &[Complex64]) -> SurfaceDensity {
    let f = &d.coeffs;
    let mut out = VshCoeffs::zeros(f.lmax);
    for l in 1..=f.lmax {
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            out.grad[i] = grad[l] * f.grad[i];
            out.curl[i] = curl[l] * f.curl[i];
        }
    }
    SurfaceDensity {
        radius: d.radius,
        coeffs: out,
    }
}

/// `M_k f`, the principal-value trace `ν∧curl S_k f` on the sphere.
pub fn mk_apply(k: f64, density: &SurfaceDensity) -> SurfaceDensity {
    mk_apply_with(k, density, false)
}

/// Test hook: `flip = true` negates `M_k` to exercise the jump-relation check.
#[doc(hidden)]
pub fn mk_apply_with(k: f64, density: &SurfaceDensity, flip: bool) -> SurfaceDensity {
    let s = mk_symbols(k, density.radius, density.coeffs.lmax);
    let sign = if flip { -1.0 } else { 1.0 };
    let g: Vec<_> = s.grad.iter().map(|z| z * sign).collect();
    let c: Vec<_> = s.curl.iter().map(|z| z * sign).collect();
    apply_diag(density, &g, &c)
}

/// `(σ·½ I + M_k) f` with `σ = -1` (exterior trace) or `+1` (interior).
pub fn jump_apply(k: f64, density: &SurfaceDensity, sigma: f64, flip: bool) -> SurfaceDensity {
    let m = mk_apply_with(k, density, flip);
    let half = density.coeffs.scale((0.5 * sigma).into());
    SurfaceDensity {
        radius: density.radius,
        coeffs: m.coeffs.add(&half),
    }
}

/// Solves `(-½I + M_k) f = rhs` per `(l, pol)`.
pub fn solve_exterior(k: f64, rhs: &SurfaceDensity) -> Result<SurfaceDensity, LayerError> {
    let lmax = rhs.coeffs.lmax;
    let s = mk_symbols(k, rhs.radius, lmax);
    let mut ig = vec![C0; lmax + 1];
    let mut ic = vec![C0; lmax + 1];
    for l in 1..=lmax {
        let dg = s.grad[l] - 0.5;
        let dc = s.curl[l] - 0.5;
        for d in [dg, dc] {
            if d.norm() < 1e-10 {
                return Err(LayerError::NearInteriorEigenvalue { k, l, value: d.norm() });
            }
        }
        ig[l] = 1.0 / dg;
        ic[l] = 1.0 / dc;
    }
    Ok(apply_diag(rhs, &ig, &ic))
}

/// `H = curl S_k f` and `E = -(1/ik) curl H` on the sphere `|x| = r`, `r ≠ R`.
#[derive(Debug, Clone)]
pub struct PotentialShell {
    pub r: f64,
    pub h_tan: VshCoeffs,
    pub h_rad: Vec<Complex64>,
    pub e_tan: VshCoeffs,
    pub e_rad: Vec<Complex64>,
}

pub fn potential_shell(k: f64, density: &SurfaceDensity, r: f64) -> Result<PotentialShell, LayerError> {
    let rr = density.radius;
    if r == rr {
        return Err(LayerError::OnSurface(r));
    }
    let f = &density.coeffs;
    let lmax = f.lmax;
    let src = Bes::new(lmax, k * rr);
    let fld = Bes::new(lmax, k * r);
    let outside = r > rr;
    let mut sh = PotentialShell {
        r,
        h_tan: VshCoeffs::zeros(lmax),
        h_rad: vec![C0; (lmax + 1) * (lmax + 1)],
        e_tan: VshCoeffs::zeros(lmax),
        e_rad: vec![C0; (lmax + 1) * (lmax + 1)],
    };
    let c0 = I * k * k * rr * rr;
    let kr = k * r;
    for l in 1..=lmax {
        let (s_val, s_w, z, wz) = if outside {
            (src.j[l], src.wj(l), fld.h[l], fld.wh(l))
        } else {
            (src.h[l], src.wh(l), fld.j[l], fld.wj(l))
        };
        let sl = ((l * (l + 1)) as f64).sqrt();
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            let si = scalar_index(l, m);
            let cu = c0 * s_w * f.grad[i];
            let cv = -c0 * s_val * f.curl[i];
            sh.h_tan.curl[i] += cu * z;
            sh.h_tan.grad[i] += -cv * wz;
            sh.h_rad[si] += -cv * sl * z / kr;
            sh.e_tan.grad[i] += -I * cu * wz;
            sh.e_rad[si] += -I * cu * sl * z / kr;
            sh.e_tan.curl[i] += I * cv * z;
        }
    }
    Ok(sh)
}

/// `ν∧curl S_k f` on `|x| = r` as VSH coefficients.
pub fn trace_curl_sl(k: f64, density: &SurfaceDensity, r: f64) -> Result<VshCoeffs, LayerError> {
    Ok(potential_shell(k, density, r)?.h_tan.rotate_normal())
}

/// `(H^ex, E^ex)` at points strictly outside the sphere.
pub fn eval_exterior_fields(k: f64, f: &SurfaceDensity, points: &[V3]) -> Result<Vec<(C3, C3)>, LayerError> {
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let r = norm(x);
        if !(r > f.radius) {
            return Err(LayerError::PointInside { r, radius: f.radius });
        }
        let sh = potential_shell(k, f, r)?;
        let pb = PointBasis::new(f.coeffs.lmax, x);
        out.push((point_value(&pb, &sh.h_tan, &sh.h_rad), point_value(&pb, &sh.e_tan, &sh.e_rad)));
    }
    Ok(out)
}

/// Which evaluation route [`single_layer_apply`] takes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlPath {
    Spectral,
    /// Product-grid quadrature of the given degree.
    Direct(usize),
}

/// Componentwise `S_k f(x) = ∫ Φ_k(x, y) f(y) ds(y)`.
pub fn single_layer_apply(k: f64, density: &SurfaceDensity, points: &[V3], path: SlPath) -> Result<Vec<C3>, LayerError> {
    match path {
        SlPath::Spectral => points.iter().map(|x| sl_spectral(k, density, *x)).collect(),
        SlPath::Direct(deg) => {
            let rr = density.radius;
            let g = sphere_quadrature(deg.max(density.coeffs.lmax));
            let f = vsh_synthesize(&density.coeffs, &g);
            points
                .iter()
                .map(|x| {
                    let r = norm(*x);
                    if (r - rr).abs() < 1e-6 * rr {
                        return Err(LayerError::TooCloseToSurface { r, radius: rr });
                    }
                    let mut acc = [C0; 3];
                    for (i, y) in g.nodes.iter().enumerate() {
                        let yy = [rr * y[0], rr * y[1], rr * y[2]];
                        let p = fundamental(k, *x, yy)? * (g.weights[i] * rr * rr);
                        for c in 0..3 {
                            acc[c] += p * f[i][c];
                        }
                    }
                    Ok(acc)
                })
                .collect()
        }
    }
}

fn sl_spectral(k: f64, density: &SurfaceDensity, x: V3) -> Result<C3, LayerError> {
    let rr = density.radius;
    let r = norm(x);
    if r == rr {
        return Err(LayerError::OnSurface(r));
    }
    let f = &density.coeffs;
    let lmax = f.lmax;
    let src = Bes::new(lmax, k * rr);
    let fld = Bes::new(lmax, k * r);
    let outside = r > rr;
    let pb = PointBasis::new(lmax, x);
    let mut tan = VshCoeffs::zeros(lmax);
    let mut rad = vec![C0; (lmax + 1) * (lmax + 1)];
    let kr = k * r;
    for l in 1..=lmax {
        let (s_val, s_w, z, wz, dz) = if outside {
            (src.j[l], src.wj(l), fld.h[l], fld.wh(l), derivative(&fld.h, l, fld.x))
        } else {
            (src.h[l], src.wh(l), fld.j[l], fld.wj(l), derivative(&fld.j, l, fld.x))
        };
        let sl = ((l * (l + 1)) as f64).sqrt();
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            let si = scalar_index(l, m);
            // S U = ikR² w_src Ñ_z - (i/k) R √(l(l+1)) src ∇(z Y)
            let a = f.grad[i];
            let cn = I * k * rr * rr * s_w * a;
            let cg = -I / k * rr * sl * s_val * a;
            tan.grad[i] += -cn * wz + cg * sl * z / r;
            rad[si] += -cn * sl * z / kr + cg * k * dz;
            // S V = -ikR² src z V
            tan.curl[i] += -I * k * rr * rr * s_val * z * f.curl[i];
        }
    }
    Ok(point_value(&pb, &tan, &rad))
}

/// Scalar single layer of `Σ c_lm Y_lm` (coefficients at `scalar_index`).
pub fn scalar_single_layer(k: f64, radius: f64, coeffs: &[Complex64], lmax: usize, x: V3) -> Result<Complex64, LayerError> {
    let r = norm(x);
    if r == radius {
        return Err(LayerError::OnSurface(r));
    }
    let src = Bes::new(lmax, k * radius);
    let fld = Bes::new(lmax, k * r);
    let pb = PointBasis::new(lmax, x);
    let mut acc = C0;
    for l in 0..=lmax {
        let jh = if r > radius { src.j[l] * fld.h[l] } else { src.h[l] * fld.j[l] };
        for m in -(l as i64)..=(l as i64) {
            let si = scalar_index(l, m);
            acc += -I * k * radius * radius * jh * coeffs[si] * pb.y[si];
        }
    }
    Ok(acc)
}

/// Surface divergence in scalar `Y_lm` coefficients:
/// `Div U_lm = -√(l(l+1))/R · Y_lm`, `Div V_lm = 0`.
pub fn surface_divergence(density: &SurfaceDensity) -> Vec<Complex64> {
    let f = &density.coeffs;
    let mut out = vec![C0; (f.lmax + 1) * (f.lmax + 1)];
    for l in 1..=f.lmax {
        let c = -((l * (l + 1)) as f64).sqrt() / density.radius;
        for m in -(l as i64)..=(l as i64) {
            out[scalar_index(l, m)] = f.grad[index(l, m)] * c;
        }
    }
    out
}

/// Richardson-extrapolated trace of `ν∧curl S_k f` from radii
/// `R(1 + σε)`, `ε ∈ {1e-2, 1e-3, 1e-4}`, `σ = +1` exterior, `-1` interior.
pub fn extrapolated_trace(k: f64, density: &SurfaceDensity, sigma: f64) -> Result<VshCoeffs, LayerError> {
    let rr = density.radius;
    let t: Vec<VshCoeffs> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|e| trace_curl_sl(k, density, rr * (1.0 + sigma * e)))
        .collect::<Result<_, _>>()?;
    let rich = |a: &VshCoeffs, b: &VshCoeffs, q: f64| b.scale(q.into()).add(&a.scale((-1.0).into())).scale((1.0 / (q - 1.0)).into());
    let r1 = rich(&t[0], &t[1], 10.0);
    let r2 = rich(&t[1], &t[2], 10.0);
    Ok(rich(&r1, &r2, 100.0))
}

/// Impedance entries `(λ_TE[l], λ_TM[l])` of the PEC ball `r_d` seen from
/// `|x| = r_omega`, assembled as regular field plus radiating correction
/// `curl S_k f` with `(-½I + M_k) f = -ν∧H_reg` on the ball.
pub fn composite_pec_impedance(
    k: f64,
    r_d: f64,
    r_omega: f64,
    lmax: usize,
) -> Result<(Vec<Complex64>, Vec<Complex64>), LayerError> {
    if !(k > 0.0 && r_d > 0.0 && r_omega > r_d) {
        return Err(LayerError::InvalidParameter(format!("k = {k}, r_d = {r_d}, r_omega = {r_omega}")));
    }
    // Regular fields: TE E = j V, H = i w_j U + rad; TM E = -w_j U + rad, H = -i j V.
    let regular_tan = |r: f64| {
        let b = Bes::new(lmax, k * r);
        let mut e = VshCoeffs::zeros(lmax);
        let mut h = VshCoeffs::zeros(lmax);
        for l in 1..=lmax {
            let i = index(l, 0);
            e.curl[i] = b.j[l];
            h.grad[i] = I * b.wj(l);
            e.grad[i] = -b.wj(l);
            h.curl[i] = -I * b.j[l];
        }
        (e, h)
    };
    let (_, h_d) = regular_tan(r_d);
    let rhs = SurfaceDensity {
        radius: r_d,
        coeffs: h_d.rotate_normal().scale((-1.0).into()),
    };
    let f = solve_exterior(k, &rhs)?;
    let sh = potential_shell(k, &f, r_omega)?;
    let (e_o, h_o) = regular_tan(r_omega);
    let ne = e_o.add(&sh.e_tan).rotate_normal();
    let nh = h_o.add(&sh.h_tan).rotate_normal();
    let mut te = vec![C0; lmax + 1];
    let mut tm = vec![C0; lmax + 1];
    for l in 1..=lmax {
        let i = index(l, 0);
        te[l] = nh.curl[i].fdiv(ne.grad[i]);
        tm[l] = nh.grad[i].fdiv(ne.curl[i]);
    }
    Ok((te, tm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_values() {
        let v = fundamental(0.0, [0.0; 3], [1.0, 0.0, 0.0]).unwrap();
        assert!((v + 1.0 / (4.0 * PI)).norm() < 1e-16);
        let v = fundamental(1.0, [0.0; 3], [0.0, 1.0, 0.0]).unwrap();
        assert!((v + I.exp() / (4.0 * PI)).norm() < 1e-16);
        assert_eq!(fundamental(1.0, [1.0; 3], [1.0; 3]), Err(LayerError::CoincidentPoints));
    }

    #[test]
    fn exterior_limit_symbol_is_product() {
        // -½ + m_grad = -ik²R² w_j h
        let (k, r) = (1.3, 0.7);
        let s = mk_symbols(k, r, 6);
        let b = Bes::new(6, k * r);
        for l in 1..=6 {
            let want = -I * k * k * r * r * b.wj(l) * b.h[l];
            assert!((s.grad[l] - 0.5 - want).norm() < 1e-13);
        }
    }
}
