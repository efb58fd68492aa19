mod common;

use enclosure::forward::*;
use enclosure::indicator::*;
use enclosure::mathkit::vec3::{dot, norm};
use enclosure::recon::*;
use proptest::prelude::*;
use std::sync::OnceLock;

const E3: [f64; 3] = [0.0, 0.0, 1.0];

fn taus(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn pec_setup() -> SweepSetup {
    SweepSetup::new(1.0, 1.0, Obstacle::Pec { geometry: Geometry::new(0.5, 1.0).unwrap() })
}

/// PEC ball sweeps at t = 0 over the 26 directions, computed once.
fn pec_sweeps() -> &'static Vec<Vec<IndicatorSample>> {
    static S: OnceLock<Vec<Vec<IndicatorSample>>> = OnceLock::new();
    S.get_or_init(|| sweep_directions(&pec_setup(), &axis26(), 0.0, &taus(5.0, 30.0, 26)).unwrap())
}

fn estimates(sweeps: &[Vec<IndicatorSample>]) -> Vec<SupportEstimate> {
    sweeps.iter().map(|s| estimate_support(s, &FitConfig::default()).unwrap()).collect()
}

#[test]
fn classify_planted_inputs() {
    let cfg = FitConfig::default();
    let s = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| -3.0 * t + 1.0);
    let r = classify_regime(&s, &cfg).unwrap();
    assert_eq!(r.tag, RegimeTag::Decay);
    assert!((r.slope + 3.0).abs() < 1e-12);
    let s = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| 0.5 * t.ln());
    assert_eq!(classify_regime(&s, &cfg).unwrap().tag, RegimeTag::Critical);
    let s = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| 0.2 * t);
    assert_eq!(classify_regime(&s, &cfg).unwrap().tag, RegimeTag::Growth);
}

#[test]
fn classify_pec_ball_regimes() {
    let setup = pec_setup();
    let cfg = FitConfig::default();
    let g = taus(10.0, 30.0, 21);
    let up = tau_sweep(&setup, [0.0, 1.0, 0.0], 0.7, &g).unwrap();
    assert_eq!(classify_regime(&up, &cfg).unwrap().tag, RegimeTag::Decay);
    let down = tau_sweep(&setup, [0.0, 1.0, 0.0], 0.3, &g).unwrap();
    assert_eq!(classify_regime(&down, &cfg).unwrap().tag, RegimeTag::Growth);
}

#[test]
fn estimate_planted_support() {
    let s = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| 2.0 * t * 0.5 + 0.3 * t.ln() + 1.0);
    for log_correction in [false, true] {
        let e = estimate_support(&s, &FitConfig { log_correction, ..Default::default() }).unwrap();
        assert!((e.h_hat - 0.5).abs() < 0.01);
    }
    let e = estimate_support(&s, &FitConfig::default()).unwrap();
    assert!((e.h_hat - 0.5).abs() < 1e-10);
    assert!(e.residual < 1e-12);
    assert!(e.warning.is_none());
    assert_eq!(e.n_points, 11);
}

#[test]
fn estimate_accepts_any_level() {
    let g = taus(10.0, 30.0, 21);
    let a = planted_sweep(E3, 0.0, &g, |t| 0.8 * t + 0.2 * t.ln());
    let b = planted_sweep(E3, 0.25, &g, |t| 0.8 * t + 0.2 * t.ln() - 0.5 * t);
    let cfg = FitConfig::default();
    let (ea, eb) = (estimate_support(&a, &cfg).unwrap(), estimate_support(&b, &cfg).unwrap());
    assert!((ea.h_hat - eb.h_hat).abs() < 1e-10);
}

#[test]
fn estimate_errors() {
    let cfg = FitConfig::default();
    let few = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 4), |t| t);
    assert!(matches!(estimate_support(&few, &cfg), Err(ReconError::InsufficientTrustedSamples { .. })));
    let narrow = planted_sweep(E3, 0.0, &taus(20.0, 30.0, 11), |t| t);
    assert!(matches!(classify_regime(&narrow, &cfg), Err(ReconError::InsufficientTrustedSamples { .. })));
    let mut untrusted = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| t);
    untrusted.iter_mut().skip(3).for_each(|s| s.trusted = false);
    assert!(matches!(estimate_support(&untrusted, &cfg), Err(ReconError::InsufficientTrustedSamples { .. })));
    let mut mixed = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| t);
    mixed[20].rho = [1.0, 0.0, 0.0];
    assert!(matches!(estimate_support(&mixed, &cfg), Err(ReconError::InvalidInput(_))));
    let empty = SweepSetup::new(1.0, 1.0, Obstacle::Empty);
    let s = tau_sweep(&empty, E3, 0.0, &taus(10.0, 20.0, 11)).unwrap();
    assert!(matches!(estimate_support(&s, &cfg), Err(ReconError::VanishingIndicator)));
    let wavy = planted_sweep(E3, 0.0, &taus(10.0, 30.0, 21), |t| t + 0.5 * (3.0 * t).sin());
    assert!(estimate_support(&wavy, &cfg).unwrap().warning.is_some());
}

#[test]
fn pec_support_on_26_directions() {
    for e in estimates(pec_sweeps()) {
        assert!((e.h_hat - 0.5).abs() <= 0.05, "{:?}", e);
        assert!(e.warning.is_none());
    }
}

#[test]
fn transmission_support() {
    let g = Geometry::new(0.5, 1.0).unwrap();
    for mu_d in [0.5, -0.5] {
        let setup = SweepSetup::new(1.0, 1.0, Obstacle::Transmission { geometry: g, medium: Medium { mu_d } });
        let sweeps = sweep_directions(&setup, &axis26()[..6], 0.0, &taus(5.0, 30.0, 26)).unwrap();
        for e in estimates(&sweeps) {
            assert!((e.h_hat - 0.5).abs() <= 0.05, "mu_d {mu_d}: {e:?}");
        }
    }
}

#[test]
fn translation_is_exact_in_the_estimate() {
    let c = [0.2, 0.0, 0.0];
    let cfg = FitConfig::default();
    for s in pec_sweeps() {
        assert_eq!(&synth_translated(s, [0.0; 3]), s);
        let e = estimate_support(s, &cfg).unwrap();
        let et = estimate_support(&synth_translated(s, c), &cfg).unwrap();
        assert!((et.h_hat - e.h_hat - dot(c, e.rho)).abs() < 1e-10);
        assert!((et.h_hat - (0.5 + 0.2 * e.rho[0])).abs() <= 0.06);
    }
}

#[test]
fn exact_unit_ball_hull() {
    let est: Vec<SupportEstimate> = spiral(50)
        .into_iter()
        .map(|rho| SupportEstimate { rho, h_hat: 1.0, fit_slope_ci: (1.0, 1.0), n_points: 0, residual: 0.0, warning: None })
        .collect();
    let truth = BallTruth { center: [0.0; 3], radius: 1.0 };
    let r = reconstruct_hull(&est, Some(truth)).unwrap();
    assert!(r.mesh.is_watertight());
    let t = r.report.truth.unwrap();
    assert!(t.volume_rel_error < 0.10);
    assert!(t.sup_support_error < 1e-12);
}

#[test]
fn pec_pipeline_hull() {
    let truth = BallTruth { center: [0.0; 3], radius: 0.5 };
    let est = estimates(pec_sweeps());
    let r = reconstruct_hull(&est, Some(truth)).unwrap();
    let t = r.report.truth.as_ref().unwrap();
    assert!(t.sup_support_error <= 0.05);
    assert!(t.volume_rel_error <= 0.15, "{}", r.report);
    // the 26-plane hull of an exact ball has corners about 0.09 R outside it
    assert!(t.hausdorff <= 0.1, "{}", r.report);
    assert!(norm(t.centroid_offset) < 1e-3);
    // the ball shrunk by the tolerance lies inside the hull
    for rho in spiral(2000) {
        assert!(r.mesh.support(rho) >= 0.45);
    }
    assert!(est.iter().all(|e| e.h_hat >= 0.45));
}

#[test]
fn translated_pipeline_hull() {
    let c = [0.2, 0.0, 0.0];
    let est = estimates(&pec_sweeps().iter().map(|s| synth_translated(s, c)).collect::<Vec<_>>());
    let r = reconstruct_hull(&est, Some(BallTruth { center: c, radius: 0.5 })).unwrap();
    let t = r.report.truth.as_ref().unwrap();
    assert!(t.sup_support_error <= 0.06);
    assert!(norm(t.centroid_offset) <= 0.05, "{}", r.report);
    assert!(r.report.to_string().contains("centroid offset"));
}

#[test]
fn enlarging_window_does_not_worsen() {
    let setup = pec_setup();
    let s = tau_sweep(&setup, [0.6, 0.0, 0.8], 0.0, &taus(5.0, 40.0, 36)).unwrap();
    let cfg = FitConfig::default();
    let mut prev: Option<f64> = None;
    for hi in [20.0, 25.0, 30.0, 35.0, 40.0] {
        let w: Vec<IndicatorSample> = s.iter().filter(|x| x.tau <= hi).cloned().collect();
        let e = estimate_support(&w, &cfg).unwrap();
        let err = (e.h_hat - 0.5).abs();
        if let Some(p) = prev {
            assert!(err <= p + 0.5 * (e.fit_slope_ci.1 - e.fit_slope_ci.0), "hi {hi}: {err} vs {p}");
        }
        prev = Some(err);
    }
}

#[test]
fn too_few_directions_fail_in_hull() {
    let est: Vec<SupportEstimate> = axis26()[..3]
        .iter()
        .map(|&rho| SupportEstimate { rho, h_hat: 1.0, fit_slope_ci: (1.0, 1.0), n_points: 0, residual: 0.0, warning: None })
        .collect();
    assert!(matches!(reconstruct_hull(&est, None), Err(ReconError::Hull(_))));
}

proptest! {
    #[test]
    fn planted_affine_inputs_are_exact(a in -3.0f64..3.0, b in -5.0f64..5.0, p in -1.0f64..1.0) {
        let g = taus(8.0, 32.0, 25);
        let s = planted_sweep(E3, 0.0, &g, |t| a * t + b + p * t.ln());
        let e = estimate_support(&s, &FitConfig::default()).unwrap();
        prop_assert!((e.h_hat - 0.5 * a).abs() < 1e-10);
        prop_assert!(e.residual < 1e-12);
        let lin = planted_sweep(E3, 0.0, &g, |t| a * t + b);
        let r = classify_regime(&lin, &FitConfig::default()).unwrap();
        prop_assert!((r.slope - a).abs() < 1e-10);
    }

    #[test]
    fn translation_equivariance(cx in -1.0f64..1.0, cy in -1.0f64..1.0, cz in -1.0f64..1.0, i in 0usize..26) {
        let rho = axis26()[i];
        let s = planted_sweep(rho, 0.0, &taus(10.0, 30.0, 21), |t| 0.9 * t + 0.4 * t.ln() - 2.0);
        let cfg = FitConfig::default();
        let e = estimate_support(&s, &cfg).unwrap();
        let et = estimate_support(&synth_translated(&s, [cx, cy, cz]), &cfg).unwrap();
        prop_assert!((et.h_hat - e.h_hat - dot([cx, cy, cz], rho)).abs() < 1e-10);
    }
}
