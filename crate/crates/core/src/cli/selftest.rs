//! Invariant suites run by `enclosure selftest`.

use crate::cgo::{algebra_residuals, build_probe, eval_cgo, CgoMode};
use crate::forward::{impedance_empty, impedance_pec, impedance_transmission, Geometry, Medium};
use crate::indicator::{indicator_value, volume_indicator_pec, volume_indicator_transmission};
use crate::layerpot::{composite_pec_impedance, extrapolated_trace, jump_apply, SurfaceDensity};
use crate::mathkit::vec3::{cnorm, normalize, C3, V3};
use crate::mathkit::{halfspace_hull, VshCoeffs};
use crate::recon::{estimate_support, planted_sweep, spiral, FitConfig};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Deliberate defects for checking that the suites catch them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    None,
    /// Flips the sign of `M_k` in the jump-relation reference.
    MkSign,
}

pub struct SuiteResult {
    pub name: &'static str,
    pub outcome: Result<String, String>,
    pub elapsed: Duration,
}

type Suite = fn(&mut ChaCha8Rng, Mutation) -> Result<String, String>;

const SUITES: [(&str, Suite); 8] = [
    ("cgo-algebra", cgo_algebra),
    ("cgo-maxwell-residual", cgo_maxwell),
    ("jump-relation", jump_relation),
    ("forward-vs-layerpot", forward_vs_layerpot),
    ("scaling-law", scaling_law),
    ("energy-identity", energy_identity),
    ("support-fit", support_fit),
    ("hull", hull),
];

pub fn run(seed: u64, mutation: Mutation) -> Vec<SuiteResult> {
    SUITES
        .iter()
        .map(|(name, f)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t0 = Instant::now();
            let outcome = f(&mut rng, mutation);
            SuiteResult { name, outcome, elapsed: t0.elapsed() }
        })
        .collect()
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn unit(r: &mut ChaCha8Rng) -> V3 {
    loop {
        let v: V3 = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return normalize(v);
        }
    }
}

fn cgo_algebra(r: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (k, tau) = (r.gen_range(0.5..2.0), r.gen_range(1.0..50.0));
        for mode in [CgoMode::Impenetrable, CgoMode::Penetrable] {
            let p = build_probe(k, tau, 0.0, unit(r), mode).map_err(|e| e.to_string())?;
            worst = algebra_residuals(&p).into_iter().fold(worst, f64::max);
        }
    }
    check(worst < 1e-12, || format!("max relative residual {worst:e} >= 1e-12"))?;
    Ok(format!("400 probes, max relative residual {worst:.1e}"))
}

/// Fourth-order central differences of the plain fields.
fn fd_curl(f: &dyn Fn(V3) -> C3, x: V3, h: f64) -> C3 {
    let d = |i: usize, j: usize| {
        let at = |s: f64| {
            let mut y = x;
            y[j] += s * h;
            f(y)[i]
        };
        (at(-2.0) - at(-1.0) * 8.0 + at(1.0) * 8.0 - at(2.0)) / (12.0 * h)
    };
    [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)]
}

fn cgo_maxwell(r: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (k, tau) = (r.gen_range(0.5..2.0), r.gen_range(1.0..20.0));
        let p = build_probe(k, tau, 0.0, unit(r), CgoMode::Impenetrable).map_err(|e| e.to_string())?;
        let x = unit(r);
        let h = 1e-3 / p.s();
        let e = |y: V3| eval_cgo(&p, y).e_plain();
        let hf = |y: V3| eval_cgo(&p, y).h_plain();
        let (ce, ch) = (fd_curl(&e, x, h), fd_curl(&hf, x, h));
        let ik = Complex64::new(0.0, k);
        let (e0, h0) = (e(x), hf(x));
        let r1: C3 = std::array::from_fn(|i| ce[i] - ik * h0[i]);
        let r2: C3 = std::array::from_fn(|i| ch[i] + ik * e0[i]);
        worst = worst.max(cnorm(r1) / cnorm(ce)).max(cnorm(r2) / cnorm(ch));
    }
    check(worst < 1e-6, || format!("max FD residual {worst:e} >= 1e-6"))?;
    Ok(format!("20 points, max FD residual {worst:.1e}"))
}

fn jump_relation(r: &mut ChaCha8Rng, m: Mutation) -> Result<String, String> {
    let flip = m == Mutation::MkSign;
    let mut worst = 0.0f64;
    for (k, radius) in [(1.0, 0.5), (0.6, 1.0), (2.0, 0.5)] {
        let mut c = VshCoeffs::zeros(5);
        for i in 0..c.grad.len() {
            c.grad[i] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            c.curl[i] = Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        }
        let f = SurfaceDensity { radius, coeffs: c };
        for (sigma, side) in [(1.0, -1.0), (-1.0, 1.0)] {
            let lim = extrapolated_trace(k, &f, sigma).map_err(|e| e.to_string())?;
            let want = jump_apply(k, &f, side, flip).coeffs;
            worst = worst.max(lim.rel_diff(&want));
        }
    }
    check(worst < 1e-5, || format!("trace limit differs from (∓½I + M_k)f by {worst:e}"))?;
    Ok(format!("6 limits, max relative error {worst:.1e}"))
}

fn forward_vs_layerpot(_: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (k, rd, ro) in [(1.0, 0.5, 1.0), (0.7, 0.4, 1.2), (1.5, 0.3, 0.9)] {
        let (te, tm) = composite_pec_impedance(k, rd, ro, 5).map_err(|e| e.to_string())?;
        let g = Geometry::new(rd, ro).map_err(|e| e.to_string())?;
        let op = impedance_pec(k, g, 5).map_err(|e| e.to_string())?;
        for l in 1..=5 {
            worst = worst
                .max((te[l] - op.lambda_te[l]).norm() / op.lambda_te[l].norm())
                .max((tm[l] - op.lambda_tm[l]).norm() / op.lambda_tm[l].norm());
        }
    }
    check(worst < 1e-6, || format!("max relative difference {worst:e} >= 1e-6"))?;
    Ok(format!("l <= 5, 3 geometries, max relative difference {worst:.1e}"))
}

fn scaling_law(r: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let g = Geometry::new(0.5, 1.0).map_err(|e| e.to_string())?;
    let op = impedance_pec(1.0, g, 40).map_err(|e| e.to_string())?;
    let op0 = impedance_empty(1.0, 1.0, 40).map_err(|e| e.to_string())?;
    let rho = unit(r);
    let mut worst = 0.0f64;
    for tau in [5.0, 10.0, 15.0] {
        let val = |t: f64| {
            let p = build_probe(1.0, tau, t, rho, CgoMode::Impenetrable).map_err(|e| e.to_string())?;
            indicator_value(&op, &op0, &p, 1e-8).map_err(|e| e.to_string())
        };
        let base = val(0.0)?;
        for t in [0.3, 0.6, 0.9] {
            let want = base.shift(-2.0 * tau * t);
            let d = val(t)? - want;
            if !d.is_zero() {
                worst = worst.max((d.ln_abs() - want.ln_abs()).exp());
            }
        }
    }
    check(worst < 1e-12, || format!("max relative deviation {worst:e} >= 1e-12"))?;
    Ok(format!("3x3 grid, max relative deviation {worst:.1e}"))
}

fn energy_identity(r: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let g = Geometry::new(0.5, 1.0).map_err(|e| e.to_string())?;
    let l = 30;
    let op0 = impedance_empty(1.0, 1.0, l).map_err(|e| e.to_string())?;
    let pec = impedance_pec(1.0, g, l).map_err(|e| e.to_string())?;
    let tr = impedance_transmission(1.0, g, Medium { mu_d: 0.5 }, l).map_err(|e| e.to_string())?;
    let rho = unit(r);
    let rel = |a: crate::mathkit::ScaledComplex, b: crate::mathkit::ScaledComplex| {
        let d = a - b;
        if d.is_zero() {
            0.0
        } else {
            (d.ln_abs() - b.ln_abs()).exp()
        }
    };
    let p = build_probe(1.0, 5.0, 0.0, rho, CgoMode::Impenetrable).map_err(|e| e.to_string())?;
    let v = volume_indicator_pec(&p, &pec, &op0, 1e-8).map_err(|e| e.to_string())?;
    let e1 = rel(v.scaled(), indicator_value(&pec, &op0, &p, 1e-8).map_err(|e| e.to_string())?);
    let p = build_probe(1.0, 5.0, 0.0, rho, CgoMode::Penetrable).map_err(|e| e.to_string())?;
    let v = volume_indicator_transmission(&p, &tr, &op0, 1e-8).map_err(|e| e.to_string())?;
    let e2 = rel(v.scaled(), indicator_value(&tr, &op0, &p, 1e-8).map_err(|e| e.to_string())?);
    check(e1 < 1e-3 && e2 < 1e-3, || format!("boundary vs volume: pec {e1:e}, transmission {e2:e}"))?;
    Ok(format!("pec {e1:.1e}, transmission {e2:.1e}"))
}

fn support_fit(_: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let taus: Vec<f64> = (10..=30).map(f64::from).collect();
    let s = planted_sweep([0.0, 0.0, 1.0], 0.0, &taus, |t| 1.2 * t + 0.3 * t.ln() - 1.0);
    let e = estimate_support(&s, &FitConfig::default()).map_err(|e| e.to_string())?;
    let err = (e.h_hat - 0.6).abs();
    check(err < 1e-10 && e.residual < 1e-12, || format!("planted slope error {err:e}, residual {:e}", e.residual))?;
    Ok(format!("planted support error {err:.1e}"))
}

fn hull(_: &mut ChaCha8Rng, _: Mutation) -> Result<String, String> {
    let planes: Vec<(V3, f64)> = spiral(50).into_iter().map(|r| (r, 1.0)).collect();
    let m = halfspace_hull(&planes).map_err(|e| e.to_string())?;
    let v = m.volume();
    let err = (v - 4.0 * std::f64::consts::PI / 3.0).abs() / (4.0 * std::f64::consts::PI / 3.0);
    check(m.is_watertight() && err < 0.10, || format!("unit-ball hull volume error {err:e}"))?;
    Ok(format!("50 planes, watertight, volume error {:.1}%", 100.0 * err))
}
