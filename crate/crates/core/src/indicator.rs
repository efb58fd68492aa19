//! The indicator `I_ρ(τ,t) = ikτ ∫_{∂Ω} (ν∧E₀)·conj((Λ_D - Λ_∅)(ν∧E₀)∧ν) dS`
//! and the volume energy identities it satisfies.
//!
//! With `ν∧E₀ = Σ a_lm U_lm + b_lm V_lm` on `|x| = R_Ω`,
//!
//! `I = ikτR_Ω² Σ_l [ conj(Δ_TE,l) Σ_m |a_lm|² - conj(Δ_TM,l) Σ_m |b_lm|² ]`.
//!
//! Traces are stored with the factor `e^{τ(R_Ω - t)}` peeled off, so the
//! level `t` enters only through the exponent of the result.

use crate::cgo::{build_probe, CgoError, CgoMode, CgoProbe};
use crate::forward::{annulus_shell, impedance, ForwardError, ImpedanceOperator, Obstacle, ShellFields};
use crate::mathkit::quadrature::{gauss_legendre, sphere_quadrature};
use crate::mathkit::scaled::ScaledComplex;
use crate::mathkit::vec3::{ccross, cnorm, cscale, to_c, C3, V3};
use crate::mathkit::vsh::{index, vsh_analyze, VshCoeffs};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("trace tail {tail:e} exceeds tolerance {tol:e} at degree {lmax}")]
    TruncationInsufficient { tail: f64, tol: f64, lmax: usize },
    #[error("operator degrees or parameters disagree: {0}")]
    DegreeMismatch(String),
    #[error("volume quadrature did not converge (last relative change {0:e})")]
    QuadratureUnderResolved(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Cgo(#[from] CgoError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// Default degree rule `L = ⌈1.5·√(τ²+k²)·R_Ω⌉ + 10`.
pub fn auto_l(k: f64, tau: f64, r_omega: f64) -> usize {
    (1.5 * (tau * tau + k * k).sqrt() * r_omega).ceil() as usize + 10
}

/// `ν∧E₀` on `|x| = R_Ω` divided by `e^{exponent}`, `exponent = τ(R_Ω - t)`.
#[derive(Debug, Clone)]
pub struct CgoTrace {
    pub coeffs: VshCoeffs,
    pub tail: f64,
    pub exponent: f64,
}

pub fn cgo_trace(probe: &CgoProbe, r_omega: f64, lmax: usize, tol: f64) -> Result<CgoTrace, IndicatorError> {
    if !(r_omega > 0.0) || lmax < 1 {
        return Err(IndicatorError::InvalidInput(format!("R_Omega = {r_omega}, L = {lmax}")));
    }
    // Oversample so that degrees above L do not alias into the projection.
    let lq = lmax + (probe.s() * r_omega).ceil() as usize + 10;
    let grid = sphere_quadrature(lq);
    let samples: Vec<C3> = grid
        .nodes
        .iter()
        .map(|n| {
            let x = [n[0] * r_omega, n[1] * r_omega, n[2] * r_omega];
            let (ex, ph) = probe.exponent_phase(x);
            let amp = (ex - probe.tau * (r_omega - probe.t)).exp();
            let e = cscale(Complex64::from_polar(amp, ph), probe.eta);
            ccross(to_c(*n), e)
        })
        .collect();
    let an = vsh_analyze(&grid, &samples, lmax).map_err(|e| IndicatorError::InvalidInput(e.to_string()))?;
    let tail = an.coeffs.tail();
    if !(tail <= tol) {
        return Err(IndicatorError::TruncationInsufficient { tail, tol, lmax });
    }
    Ok(CgoTrace {
        coeffs: an.coeffs,
        tail,
        exponent: probe.tau * (r_omega - probe.t),
    })
}

fn check_pair(op_d: &ImpedanceOperator, op_empty: &ImpedanceOperator) -> Result<(), IndicatorError> {
    if op_d.k != op_empty.k || op_d.r_omega != op_empty.r_omega || op_d.lmax != op_empty.lmax {
        return Err(IndicatorError::DegreeMismatch(format!(
            "(k, R_Omega, L) = ({}, {}, {}) vs ({}, {}, {})",
            op_d.k, op_d.r_omega, op_d.lmax, op_empty.k, op_empty.r_omega, op_empty.lmax
        )));
    }
    if op_empty.obstacle != Obstacle::Empty {
        return Err(IndicatorError::DegreeMismatch("second operator must be the empty map".into()));
    }
    Ok(())
}

/// Indicator from a precomputed trace.
pub fn indicator_from_trace(op_d: &ImpedanceOperator, trace: &CgoTrace, tau: f64) -> Result<ScaledComplex, IndicatorError> {
    let f = &trace.coeffs;
    if f.lmax > op_d.lmax {
        return Err(IndicatorError::DegreeMismatch(format!("trace degree {} > operator degree {}", f.lmax, op_d.lmax)));
    }
    let mut acc = ScaledComplex::ZERO;
    for l in 1..=f.lmax {
        let (mut ea, mut eb) = (0.0, 0.0);
        for m in -(l as i64)..=(l as i64) {
            let i = index(l, m);
            ea += f.grad[i].norm_sqr();
            eb += f.curl[i].norm_sqr();
        }
        let te = ScaledComplex::from_complex(op_d.delta_te[l].conj()) * ScaledComplex::from_complex(ea.into());
        let tm = ScaledComplex::from_complex(op_d.delta_tm[l].conj()) * ScaledComplex::from_complex(eb.into());
        acc = acc + (te - tm);
    }
    let r2 = op_d.r_omega * op_d.r_omega;
    Ok(acc.scale(Complex64::new(0.0, op_d.k * tau * r2)).shift(2.0 * trace.exponent))
}

pub fn indicator_value(
    op_d: &ImpedanceOperator,
    op_empty: &ImpedanceOperator,
    probe: &CgoProbe,
    tol: f64,
) -> Result<ScaledComplex, IndicatorError> {
    check_pair(op_d, op_empty)?;
    if probe.k != op_d.k {
        return Err(IndicatorError::DegreeMismatch(format!("probe k {} vs operator k {}", probe.k, op_d.k)));
    }
    let tr = cgo_trace(probe, op_d.r_omega, op_d.lmax, tol)?;
    indicator_from_trace(op_d, &tr, probe.tau)
}

/// `ln ∫_{|x|<r} e^{α x·ρ} dx = ln(4π(αr cosh αr - sinh αr)/α³)`, evaluated stably.
pub fn ln_ball_exp_integral(alpha: f64, r: f64) -> f64 {
    let a = alpha * r;
    // 4π e^{a}[(a - 1) + (a + 1)e^{-2a}] / (2α³), or its series for small a
    if a < 0.1 {
        let s = 1.0 / 3.0 + a * a / 30.0 + a.powi(4) / 840.0 + a.powi(6) / 45360.0;
        return (4.0 * PI * r * r * r * s).ln();
    }
    let br = (a - 1.0) + (a + 1.0) * (-2.0 * a).exp();
    (4.0 * PI).ln() + a + br.ln() - (2.0 * alpha.powi(3)).ln()
}

/// Terms of a volume identity, all scaled by `e^{-exponent}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeIndicator {
    /// Reassembled indicator value `value·e^{exponent}` (real).
    pub value: f64,
    pub exponent: f64,
    /// Obstacle term built from the incident field.
    pub d_term: f64,
    /// `∫ |curl H̃|²` (PEC) or `∫ (1/μ)|curl Ẽ|²` (transmission).
    pub scattered_curl: f64,
    /// `∫ |H̃|²` (PEC) or `∫ |Ẽ|²` (transmission).
    pub scattered_l2: f64,
}

impl VolumeIndicator {
    pub fn scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.value.into(), self.exponent)
    }
}

fn diff_energy(a: &ShellFields, b: &ShellFields, e_field: bool, mu: f64) -> (f64, f64) {
    // returns (Σ|F_D - F_∅|², Σ|G_D·s - G_∅|²) with F the first field, G the other
    let (fa, fra, fb, frb, ga, gra, gb, grb) = if e_field {
        (&a.e_tan, &a.e_rad, &b.e_tan, &b.e_rad, &a.h_tan, &a.h_rad, &b.h_tan, &b.h_rad)
    } else {
        (&a.h_tan, &a.h_rad, &b.h_tan, &b.h_rad, &a.e_tan, &a.e_rad, &b.e_tan, &b.e_rad)
    };
    let sq = |x: &[Complex64], y: &[Complex64], s: f64| -> f64 { x.iter().zip(y).map(|(p, q)| (p * s - q).norm_sqr()).sum() };
    let f2 = sq(&fa.grad, &fb.grad, 1.0) + sq(&fa.curl, &fb.curl, 1.0) + sq(fra, frb, 1.0);
    let g2 = sq(&ga.grad, &gb.grad, mu) + sq(&ga.curl, &gb.curl, mu) + sq(gra, grb, mu);
    (f2, g2)
}

/// `∫_{r0}^{r1} r² g(r) dr` by Gauss–Legendre, doubling until the relative
/// change drops below `1e-10`.
fn radial_integral<F>(r0: f64, r1: f64, g: F) -> Result<(f64, f64), IndicatorError>
where
    F: Fn(f64) -> Result<(f64, f64), IndicatorError> + Sync,
{
    let eval = |n: usize| -> Result<(f64, f64), IndicatorError> {
        let (x, w) = gauss_legendre(n);
        let h = 0.5 * (r1 - r0);
        let parts: Vec<(f64, f64)> = x
            .par_iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let r = r0 + h * (xi + 1.0);
                let (a, b) = g(r)?;
                Ok((wi * h * r * r * a, wi * h * r * r * b))
            })
            .collect::<Result<_, IndicatorError>>()?;
        Ok(parts.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1)))
    };
    let mut n = 16;
    let mut prev = eval(n)?;
    let mut change = f64::INFINITY;
    while n < 1024 {
        n *= 2;
        let cur = eval(n)?;
        let scale = cur.0.abs().max(cur.1.abs()).max(f64::MIN_POSITIVE);
        change = ((cur.0 - prev.0).abs()).max((cur.1 - prev.1).abs()) / scale;
        prev = cur;
        if change < 1e-10 {
            return Ok(prev);
        }
    }
    Err(IndicatorError::QuadratureUnderResolved(change))
}

fn probe_amplitudes(probe: &CgoProbe) -> (f64, f64) {
    let e = cnorm(probe.eta);
    let h = cnorm(probe.theta);
    (e * e, h * h)
}

/// Volume side of the PEC identity
/// `-I/τ = ∫_D (|curl H₀|² - k²|H₀|²) + ∫_{Ω∖D} (|curl H̃|² - k²|H̃|²)`,
/// returned as `-τ·(right-hand side)` for comparison with the indicator.
/// `H̃ = H - H₀` is assembled shell by shell from the solved annulus fields.
pub fn volume_indicator_pec(probe: &CgoProbe, op_d: &ImpedanceOperator, op_empty: &ImpedanceOperator, tol: f64) -> Result<VolumeIndicator, IndicatorError> {
    check_pair(op_d, op_empty)?;
    let tr = cgo_trace(probe, op_d.r_omega, op_d.lmax, tol)?;
    let k = probe.k;
    let exponent = 2.0 * tr.exponent;
    let (r_d, d_term) = match op_d.obstacle {
        Obstacle::Empty => {
            return Ok(VolumeIndicator {
                value: 0.0,
                exponent,
                d_term: 0.0,
                scattered_curl: 0.0,
                scattered_l2: 0.0,
            })
        }
        Obstacle::Pec { geometry } => {
            let (e2, h2) = probe_amplitudes(probe);
            // |curl H₀|² = k²|E₀|²; ∫_D e^{2τ(x·ρ - t)} peeled by e^{2τ(R_Ω - t)}
            let ln_j = ln_ball_exp_integral(2.0 * probe.tau, geometry.r_d) - 2.0 * probe.tau * op_d.r_omega;
            (geometry.r_d, k * k * (e2 - h2) * ln_j.exp())
        }
        Obstacle::Transmission { .. } => {
            return Err(IndicatorError::InvalidInput("PEC identity needs a PEC operator".into()));
        }
    };
    let (h2, e2) = radial_integral(r_d, op_d.r_omega, |r| {
        let a = annulus_shell(op_d, &tr.coeffs, r)?;
        let b = annulus_shell(op_empty, &tr.coeffs, r)?;
        Ok(diff_energy(&a, &b, false, 1.0))
    })?;
    let curl2 = k * k * e2; // |curl H̃|² = k²|Ẽ|²
    let sum = d_term + curl2 - k * k * h2;
    Ok(VolumeIndicator {
        value: -probe.tau * sum,
        exponent,
        d_term,
        scattered_curl: curl2,
        scattered_l2: h2,
    })
}

/// Volume side of the transmission identity
/// `Q = ∫_D (1/μ - 1)|curl E₀|² + k²∫_Ω |Ẽ|² - ∫_Ω (1/μ)|curl Ẽ|²`
/// (`ε ≡ 1`), returned as `-τ·Q` for comparison with the indicator.
pub fn volume_indicator_transmission(
    probe: &CgoProbe,
    op_d: &ImpedanceOperator,
    op_empty: &ImpedanceOperator,
    tol: f64,
) -> Result<VolumeIndicator, IndicatorError> {
    check_pair(op_d, op_empty)?;
    let tr = cgo_trace(probe, op_d.r_omega, op_d.lmax, tol)?;
    let k = probe.k;
    let exponent = 2.0 * tr.exponent;
    let (geometry, mu) = match op_d.obstacle {
        Obstacle::Transmission { geometry, medium } => (geometry, medium.mu_inside()),
        Obstacle::Empty => {
            return Ok(VolumeIndicator {
                value: 0.0,
                exponent,
                d_term: 0.0,
                scattered_curl: 0.0,
                scattered_l2: 0.0,
            })
        }
        Obstacle::Pec { .. } => return Err(IndicatorError::InvalidInput("transmission identity needs a transmission operator".into())),
    };
    let (_, h2) = probe_amplitudes(probe);
    let ln_j = ln_ball_exp_integral(2.0 * probe.tau, geometry.r_d) - 2.0 * probe.tau * op_d.r_omega;
    // |curl E₀|² = k²|H₀|²
    let d_term = (1.0 / mu - 1.0) * k * k * h2 * ln_j.exp();
    // curl Ẽ = ik(μH - H₀); inside D weight 1/μ, outside μ = 1
    let piece = |r0: f64, r1: f64, m: f64| {
        radial_integral(r0, r1, |r| {
            let a = annulus_shell(op_d, &tr.coeffs, r)?;
            let b = annulus_shell(op_empty, &tr.coeffs, r)?;
            Ok(diff_energy(&a, &b, true, m))
        })
    };
    let (ei, hi) = piece(0.0, geometry.r_d, mu)?;
    let (eo, ho) = piece(geometry.r_d, op_d.r_omega, 1.0)?;
    let l2 = ei + eo;
    let curl = k * k * (hi / mu + ho);
    let q = d_term + k * k * l2 - curl;
    Ok(VolumeIndicator {
        value: -probe.tau * q,
        exponent,
        d_term,
        scattered_curl: curl,
        scattered_l2: l2,
    })
}

/// Shared settings for sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    pub k: f64,
    pub r_omega: f64,
    pub obstacle: Obstacle,
    pub mode: CgoMode,
    /// Fixed degree, or `None` for [`auto_l`] at the largest `τ`.
    pub lmax: Option<usize>,
    pub tail_tol: f64,
    pub guard: f64,
}

impl SweepSetup {
    /// Natural probe mode for the obstacle type.
    pub fn new(k: f64, r_omega: f64, obstacle: Obstacle) -> Self {
        let mode = match obstacle {
            Obstacle::Transmission { .. } => CgoMode::Penetrable,
            _ => CgoMode::Impenetrable,
        };
        SweepSetup {
            k,
            r_omega,
            obstacle,
            mode,
            lmax: None,
            tail_tol: 1e-8,
            guard: crate::forward::DEFAULT_GUARD,
        }
    }

    /// Fixed degree if set; otherwise [`auto_l`] at `tau_max`, raised in steps
    /// of 5 until the trace tail at `tau_max` passes `tail_tol`. The tail is
    /// rotation invariant, so one direction suffices.
    pub fn degree_for(&self, tau_max: f64) -> Result<usize, IndicatorError> {
        if let Some(l) = self.lmax {
            return Ok(l);
        }
        let start = auto_l(self.k, tau_max, self.r_omega);
        let probe = build_probe(self.k, tau_max, 0.0, [0.0, 0.0, 1.0], self.mode)?;
        let mut l = start;
        loop {
            match cgo_trace(&probe, self.r_omega, l, self.tail_tol) {
                Ok(_) => return Ok(l),
                Err(IndicatorError::TruncationInsufficient { .. }) if l < 3 * start => l += 5,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn operator(&self, lmax: usize) -> Result<ImpedanceOperator, IndicatorError> {
        Ok(impedance(self.k, self.r_omega, self.obstacle, lmax, self.guard)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSample {
    pub rho: V3,
    pub tau: f64,
    pub t: f64,
    pub value: ScaledComplex,
    pub trace_tail: f64,
    pub trusted: bool,
}

fn check_sorted(v: &[f64], name: &str) -> Result<(), IndicatorError> {
    if v.is_empty() {
        return Err(IndicatorError::InvalidInput(format!("{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) || v.windows(2).any(|w| w[0] > w[1]) {
        return Err(IndicatorError::InvalidInput(format!("{name} must be finite and sorted")));
    }
    Ok(())
}

fn sample_at(setup: &SweepSetup, op: &ImpedanceOperator, rho: V3, tau: f64, t: f64) -> Result<IndicatorSample, IndicatorError> {
    let probe = build_probe(setup.k, tau, t, rho, setup.mode)?;
    let tr = cgo_trace(&probe, setup.r_omega, op.lmax, setup.tail_tol)?;
    Ok(IndicatorSample {
        rho: probe.frame.rho,
        tau,
        t,
        value: indicator_from_trace(op, &tr, tau)?,
        trace_tail: tr.tail,
        trusted: tr.tail < setup.tail_tol,
    })
}

/// Samples over `τ` at a fixed level `t`, sharing one operator assembly.
pub fn tau_sweep(setup: &SweepSetup, rho: V3, t: f64, taus: &[f64]) -> Result<Vec<IndicatorSample>, IndicatorError> {
    check_sorted(taus, "taus")?;
    let op = setup.operator(setup.degree_for(*taus.last().unwrap())?)?;
    tau_sweep_with(setup, &op, rho, t, taus)
}

/// [`tau_sweep`] with a caller-provided operator.
pub fn tau_sweep_with(setup: &SweepSetup, op: &ImpedanceOperator, rho: V3, t: f64, taus: &[f64]) -> Result<Vec<IndicatorSample>, IndicatorError> {
    check_sorted(taus, "taus")?;
    taus.par_iter().map(|&tau| sample_at(setup, op, rho, tau, t)).collect()
}

/// Samples over `t` at a fixed `τ`; one trace serves every level.
pub fn t_sweep(setup: &SweepSetup, rho: V3, tau: f64, ts: &[f64]) -> Result<Vec<IndicatorSample>, IndicatorError> {
    check_sorted(ts, "ts")?;
    let op = setup.operator(setup.degree_for(tau)?)?;
    let probe = build_probe(setup.k, tau, ts[0], rho, setup.mode)?;
    let tr = cgo_trace(&probe, setup.r_omega, op.lmax, setup.tail_tol)?;
    let base = indicator_from_trace(&op, &tr, tau)?;
    Ok(ts
        .iter()
        .map(|&t| IndicatorSample {
            rho: probe.frame.rho,
            tau,
            t,
            value: base.shift(2.0 * tau * (ts[0] - t)),
            trace_tail: tr.tail,
            trusted: tr.tail < setup.tail_tol,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_integral_matches_direct_formula() {
        for (a, r) in [(0.5, 1.0), (3.0, 0.5), (0.3, 0.4), (20.0, 0.7)] {
            let x: f64 = a * r;
            let direct = 4.0 * PI * (x * x.cosh() - x.sinh()) / (a * a * a);
            let got = ln_ball_exp_integral(a, r).exp();
            assert!((got - direct).abs() < 1e-9 * direct, "{a} {r}: {got} {direct}");
        }
    }

    #[test]
    fn ball_integral_small_argument_limit() {
        // volume of the ball as α -> 0
        let v = ln_ball_exp_integral(1e-9, 2.0).exp();
        assert!((v - 4.0 * PI * 8.0 / 3.0).abs() < 1e-12 * v);
        // both branches agree at the switch
        let (lo, hi) = (ln_ball_exp_integral(0.099_999_999, 1.0), ln_ball_exp_integral(0.1, 1.0));
        assert!((lo - hi).abs() < 1e-8);
    }

    #[test]
    fn auto_degree_rule() {
        assert_eq!(auto_l(1.0, 0.0, 1.0), 12);
        assert_eq!(auto_l(0.0, 30.0, 1.0), 55);
    }
}
