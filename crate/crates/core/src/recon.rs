//! From indicator sweeps to support functions and a convex hull.
//!
//! With `I(τ, 0) = e^{2τ h_D(ρ)} I(τ, h_D(ρ))` and at most polynomial behaviour
//! at the critical level, the support value is half the asymptotic slope of
//! `log|I(τ, 0)|`. The slope is fitted on the upper part of the `τ` range with
//! an optional `log τ` term absorbing the polynomial prefactor.

use crate::indicator::{tau_sweep_with, IndicatorError, IndicatorSample, SweepSetup};
use crate::mathkit::hull::{halfspace_hull, HullError, HullMesh};
use crate::mathkit::vec3::{dot, norm, normalize, sub, V3};
use crate::mathkit::ScaledComplex;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::f64::consts::PI;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReconError {
    #[error("need at least {need} trusted samples spanning tau_max/tau_min >= 2, got {found}")]
    InsufficientTrustedSamples { found: usize, need: usize },
    #[error("indicator vanishes on the fit window; no obstacle signal")]
    VanishingIndicator,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Hull(#[from] HullError),
}

/// Fit settings shared by regime classification and support estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Slopes within `±slope_tol` are labelled critical.
    pub slope_tol: f64,
    /// Fraction of the trusted `τ` range, measured from the top, used for fits.
    pub window_fraction: f64,
    /// Include a `log τ` column when estimating the support value.
    pub log_correction: bool,
    /// RMS fit residual above which the estimate carries a warning.
    pub residual_bound: f64,
    /// Two-sided confidence level of the reported interval.
    pub confidence: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            slope_tol: 0.05,
            window_fraction: 0.5,
            log_correction: true,
            residual_bound: 1e-2,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    Decay,
    Growth,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub tag: RegimeTag,
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitWarning {
    /// Residual above the configured bound, or `log|I(τ,0)|` not monotone on
    /// the window.
    NonMonotoneTail { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportEstimate {
    pub rho: V3,
    pub h_hat: f64,
    /// Confidence interval for `h_hat`, i.e. for half the fitted slope.
    pub fit_slope_ci: (f64, f64),
    pub n_points: usize,
    /// RMS residual of the fit in `log|I|`.
    pub residual: f64,
    pub warning: Option<FitWarning>,
}

struct Fit {
    slope: f64,
    slope_se: f64,
    residual: f64,
    dof: usize,
}

/// Least squares for `y ≈ a τ + b (+ c log τ)`.
fn fit_slope(tau: &[f64], y: &[f64], log_term: bool) -> Fit {
    let p = if log_term { 3 } else { 2 };
    let n = tau.len();
    let x = DMatrix::from_fn(n, p, |i, j| match j {
        0 => tau[i],
        1 => 1.0,
        _ => tau[i].ln(),
    });
    let yv = DVector::from_column_slice(y);
    let svd = x.clone().svd(true, true);
    let beta = svd.solve(&yv, 0.0).expect("svd with both factors");
    let r = &yv - &x * &beta;
    let rss = r.norm_squared();
    let dof = n - p;
    let v_t = svd.v_t.as_ref().expect("right singular vectors");
    let var_factor: f64 = (0..p)
        .map(|j| {
            let s = svd.singular_values[j];
            if s > 0.0 {
                (v_t[(j, 0)] / s).powi(2)
            } else {
                f64::INFINITY
            }
        })
        .sum();
    let sigma2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    Fit {
        slope: beta[0],
        slope_se: (sigma2 * var_factor).sqrt(),
        residual: (rss / n as f64).sqrt(),
        dof,
    }
}

/// Trusted samples in the top `fraction` of the trusted `τ` range, sorted by `τ`.
fn window(samples: &[IndicatorSample], fraction: f64, need: usize) -> Result<Vec<&IndicatorSample>, ReconError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(ReconError::InvalidInput(format!("window fraction {fraction} outside (0, 1]")));
    }
    let mut trusted: Vec<&IndicatorSample> = samples.iter().filter(|s| s.trusted).collect();
    trusted.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    if !trusted.is_empty() && trusted.iter().all(|s| s.value.is_zero()) {
        return Err(ReconError::VanishingIndicator);
    }
    let insufficient = ReconError::InsufficientTrustedSamples { found: trusted.len(), need: need.max(5) };
    if trusted.len() < 5 {
        return Err(insufficient);
    }
    let (lo, hi) = (trusted[0].tau, trusted[trusted.len() - 1].tau);
    if !(lo > 0.0 && hi >= 2.0 * lo) {
        return Err(insufficient);
    }
    let cut = hi - fraction * (hi - lo);
    let w: Vec<&IndicatorSample> = trusted.into_iter().filter(|s| s.tau >= cut).collect();
    if w.len() < need {
        return Err(ReconError::InsufficientTrustedSamples { found: w.len(), need });
    }
    if w.iter().any(|s| s.value.is_zero()) {
        return Err(ReconError::VanishingIndicator);
    }
    Ok(w)
}

/// Least-squares slope of `log|I|` against `τ` over `[tau_lo, tau_hi]`.
pub fn slope_over(samples: &[IndicatorSample], tau_lo: f64, tau_hi: f64) -> Result<f64, ReconError> {
    let w: Vec<&IndicatorSample> = samples.iter().filter(|s| s.trusted && s.tau >= tau_lo && s.tau <= tau_hi).collect();
    if w.len() < 3 {
        return Err(ReconError::InsufficientTrustedSamples { found: w.len(), need: 3 });
    }
    if w.iter().any(|s| s.value.is_zero()) {
        return Err(ReconError::VanishingIndicator);
    }
    let tau: Vec<f64> = w.iter().map(|s| s.tau).collect();
    let y: Vec<f64> = w.iter().map(|s| s.value.ln_abs()).collect();
    Ok(fit_slope(&tau, &y, false).slope)
}

/// Labels a fixed-`t` sweep by its slope over the top of the `τ` range.
pub fn classify_regime(sweep: &[IndicatorSample], cfg: &FitConfig) -> Result<RegimeLabel, ReconError> {
    let w = window(sweep, cfg.window_fraction, 3)?;
    let tau: Vec<f64> = w.iter().map(|s| s.tau).collect();
    let y: Vec<f64> = w.iter().map(|s| s.value.ln_abs()).collect();
    let slope = fit_slope(&tau, &y, false).slope;
    let tag = if slope < -cfg.slope_tol {
        RegimeTag::Decay
    } else if slope > cfg.slope_tol {
        RegimeTag::Growth
    } else {
        RegimeTag::Critical
    };
    Ok(RegimeLabel { tag, slope })
}

/// Support value from a sweep in `τ`. Samples at `t ≠ 0` are moved to level 0
/// with the exact scaling law, so any fixed-`t` sweep is accepted.
pub fn estimate_support(sweep: &[IndicatorSample], cfg: &FitConfig) -> Result<SupportEstimate, ReconError> {
    let need = if cfg.log_correction { 4 } else { 3 };
    let w = window(sweep, cfg.window_fraction, need)?;
    let rho = w[0].rho;
    if w.iter().any(|s| s.rho != rho) {
        return Err(ReconError::InvalidInput("sweep mixes directions".into()));
    }
    let tau: Vec<f64> = w.iter().map(|s| s.tau).collect();
    let y: Vec<f64> = w.iter().map(|s| s.value.ln_abs() + 2.0 * s.tau * s.t).collect();
    let fit = fit_slope(&tau, &y, cfg.log_correction);
    let h_hat = 0.5 * fit.slope;
    let half = if fit.slope_se > 0.0 {
        let q = StudentsT::new(0.0, 1.0, fit.dof as f64)
            .map_err(|e| ReconError::InvalidInput(e.to_string()))?
            .inverse_cdf(0.5 + 0.5 * cfg.confidence);
        0.5 * q * fit.slope_se
    } else {
        0.0
    };
    let monotone = y.windows(2).all(|p| (p[1] - p[0]) * fit.slope >= 0.0);
    let warning = (!fit.residual.is_finite() || fit.residual > cfg.residual_bound || !monotone)
        .then_some(FitWarning::NonMonotoneTail { residual: fit.residual });
    Ok(SupportEstimate {
        rho,
        h_hat,
        fit_slope_ci: (h_hat - half, h_hat + half),
        n_points: w.len(),
        residual: fit.residual,
        warning,
    })
}

/// Samples for the configuration translated by `c`: each value gains the
/// factor `e^{2τ c·ρ}`.
pub fn synth_translated(samples: &[IndicatorSample], c: V3) -> Vec<IndicatorSample> {
    samples
        .iter()
        .map(|s| IndicatorSample {
            value: s.value.shift(2.0 * s.tau * dot(c, s.rho)),
            ..s.clone()
        })
        .collect()
}

/// Sweeps every direction at level `t`, sharing one operator.
pub fn sweep_directions(setup: &SweepSetup, dirs: &[V3], t: f64, taus: &[f64]) -> Result<Vec<Vec<IndicatorSample>>, ReconError> {
    let tau_max = taus
        .iter()
        .copied()
        .fold(f64::NAN, f64::max);
    if !tau_max.is_finite() {
        return Err(ReconError::InvalidInput("tau grid is empty or non-finite".into()));
    }
    let op = setup.operator(setup.degree_for(tau_max)?)?;
    dirs.par_iter()
        .map(|&rho| tau_sweep_with(setup, &op, rho, t, taus).map_err(ReconError::from))
        .collect()
}

/// The 26 directions `normalize(i, j, k)` with `i, j, k ∈ {-1, 0, 1}` not all zero.
pub fn axis26() -> Vec<V3> {
    let mut out = Vec::with_capacity(26);
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                if (i, j, k) != (0, 0, 0) {
                    out.push(normalize([i as f64, j as f64, k as f64]));
                }
            }
        }
    }
    out
}

/// `n` golden-angle spiral points on the unit sphere.
pub fn spiral(n: usize) -> Vec<V3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Reference ball for error reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallTruth {
    pub center: V3,
    pub radius: f64,
}

impl BallTruth {
    pub fn support(&self, rho: V3) -> f64 {
        dot(self.center, rho) + self.radius * norm(rho)
    }

    pub fn volume(&self) -> f64 {
        4.0 * PI * self.radius.powi(3) / 3.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullReport {
    pub n_directions: usize,
    pub volume: f64,
    pub centroid: V3,
    pub truth: Option<TruthComparison>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthComparison {
    pub truth: BallTruth,
    /// `max |ĥ(ρ) − h(ρ)|` over the estimation directions.
    pub sup_support_error: f64,
    /// Hausdorff distance between hull and ball, sampled on 2000 directions.
    pub hausdorff: f64,
    pub volume_rel_error: f64,
    /// Hull centroid minus the true center.
    pub centroid_offset: V3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub mesh: HullMesh,
    pub report: HullReport,
}

pub fn reconstruct_hull(estimates: &[SupportEstimate], truth: Option<BallTruth>) -> Result<Reconstruction, ReconError> {
    let planes: Vec<(V3, f64)> = estimates.iter().map(|e| (e.rho, e.h_hat)).collect();
    let mesh = halfspace_hull(&planes)?;
    let volume = mesh.volume();
    let centroid = mesh.centroid();
    let truth = truth.map(|b| {
        let sup_support_error = estimates
            .iter()
            .map(|e| (e.h_hat - b.support(normalize(e.rho))).abs())
            .fold(0.0, f64::max);
        // support functions of convex bodies realise the Hausdorff distance
        let hausdorff = spiral(2000)
            .into_iter()
            .map(|r| (mesh.support(r) - b.support(r)).abs())
            .fold(0.0, f64::max);
        TruthComparison {
            truth: b,
            sup_support_error,
            hausdorff,
            volume_rel_error: (volume - b.volume()).abs() / b.volume(),
            centroid_offset: sub(centroid, b.center),
        }
    });
    Ok(Reconstruction {
        mesh,
        report: HullReport {
            n_directions: estimates.len(),
            volume,
            centroid,
            truth,
        },
    })
}

impl fmt::Display for HullReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "directions: {}", self.n_directions)?;
        writeln!(f, "hull volume: {:.6}", self.volume)?;
        let c = self.centroid;
        writeln!(f, "hull centroid: ({:.6}, {:.6}, {:.6})", c[0], c[1], c[2])?;
        if let Some(t) = &self.truth {
            let (c, o) = (t.truth.center, t.centroid_offset);
            writeln!(f, "truth: ball center ({:.6}, {:.6}, {:.6}) radius {:.6}", c[0], c[1], c[2], t.truth.radius)?;
            writeln!(f, "sup support error: {:.6}", t.sup_support_error)?;
            writeln!(f, "hausdorff distance (sampled): {:.6}", t.hausdorff)?;
            writeln!(f, "volume relative error: {:.6}", t.volume_rel_error)?;
            writeln!(f, "centroid offset: ({:.6}, {:.6}, {:.6})", o[0], o[1], o[2])?;
        }
        Ok(())
    }
}

/// Convenience for tests and the CLI: a sample list from planted `log|I|` values.
pub fn planted_sweep(rho: V3, t: f64, taus: &[f64], log_abs: impl Fn(f64) -> f64) -> Vec<IndicatorSample> {
    taus.iter()
        .map(|&tau| IndicatorSample {
            rho,
            tau,
            t,
            value: ScaledComplex::exp(log_abs(tau)),
            trace_tail: 0.0,
            trusted: true,
        })
        .collect()
}
