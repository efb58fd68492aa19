//! Run configuration: JSON schema, `ENCLOSURE_` environment overrides and
//! physical validation.
//!
//! Overrides address keys by path with `__` between levels, e.g.
//! `ENCLOSURE_GEOMETRY__R_D=0.4` or `ENCLOSURE_K=2`. Values are parsed as JSON
//! when possible and taken as strings otherwise.

use crate::forward::{Geometry, Medium, Obstacle};
use crate::indicator::SweepSetup;
use crate::mathkit::vec3::{norm, normalize, V3};
use crate::recon::{axis26, spiral, FitConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::path::Path;

pub const ENV_PREFIX: &str = "ENCLOSURE_";

/// Largest fixed degree accepted; radial functions for the default
/// geometries stay in double range well past it.
pub const MAX_FIXED_L: usize = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryCfg,
    pub problem: Problem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumCfg>,
    pub k: f64,
    pub tau_grid: TauGrid,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub directions: DirectionSpec,
    #[serde(default)]
    pub lmax: LSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Rigid translation applied by CGO covariance to every sample.
    #[serde(default)]
    pub translation: V3,
    /// Compare the hull against the known ball in the report.
    #[serde(default = "yes")]
    pub truth: bool,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub seed: u64,
}

fn default_t_grid() -> Vec<f64> {
    vec![0.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryCfg {
    pub r_d: f64,
    pub r_omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Pec,
    Transmission,
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumCfg {
    /// Permeability inside the obstacle is `1 - mu_d`.
    pub mu_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauGrid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TauGrid::Range { min, max, count } => {
                if *count < 2 {
                    return vec![*min; *count];
                }
                (0..*count)
                    .map(|i| min + (max - min) * i as f64 / (*count - 1) as f64)
                    .collect()
            }
            TauGrid::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "lowercase", deny_unknown_fields)]
pub enum DirectionSpec {
    #[default]
    Axis26,
    Spiral { count: usize },
    /// Uniform on the sphere, drawn from the run seed.
    Random { count: usize },
    List { dirs: Vec<V3> },
}

impl DirectionSpec {
    pub fn resolve(&self, seed: u64) -> Vec<V3> {
        match self {
            DirectionSpec::Axis26 => axis26(),
            DirectionSpec::Spiral { count } => spiral(*count),
            DirectionSpec::Random { count } => {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                (0..*count)
                    .map(|_| loop {
                        let v: V3 = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
                        let n = norm(v);
                        if n > 1e-3 && n <= 1.0 {
                            break normalize(v);
                        }
                    })
                    .collect()
            }
            DirectionSpec::List { dirs } => dirs.iter().map(|d| normalize(*d)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LSpec {
    Fixed(usize),
    Auto(AutoTag),
}

impl Default for LSpec {
    fn default() -> Self {
        LSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tail: f64,
    pub slope_tol: f64,
    pub guard: f64,
    pub window_fraction: f64,
    pub residual_bound: f64,
    pub confidence: f64,
    pub log_correction: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        let f = FitConfig::default();
        Tolerances {
            tail: 1e-8,
            slope_tol: f.slope_tol,
            guard: crate::forward::DEFAULT_GUARD,
            window_fraction: f.window_fraction,
            residual_bound: f.residual_bound,
            confidence: f.confidence,
            log_correction: f.log_correction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub sweep_csv: String,
    pub estimates_csv: String,
    pub hull_off: String,
    pub report: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            sweep_csv: "sweep.csv".into(),
            estimates_csv: "estimates.csv".into(),
            hull_off: "hull.off".into(),
            report: "report.txt".into(),
        }
    }
}

/// Reads the file, applies overrides and validates. Errors are the lines to
/// print, one problem per line.
pub fn load(path: &Path, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig, Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| vec![format!("{}: cannot read: {e}", path.display())])?;
    parse(&text, env)
}

pub fn parse(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<RunConfig, Vec<String>> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| vec![format!("config: {e}")])?;
    let mut overrides: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    overrides.sort();
    // without overrides, parse the text itself so schema errors keep line numbers
    let cfg: RunConfig = if overrides.is_empty() {
        serde_json::from_str(text)
    } else {
        for (k, v) in overrides {
            apply_override(&mut value, &k[ENV_PREFIX.len()..], &v).map_err(|e| vec![e])?;
        }
        serde_json::from_value(value)
    }
    .map_err(|e| vec![format!("config: {e}")])?;
    let problems = cfg.problems();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(problems)
    }
}

fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<(), String> {
    let path: Vec<String> = key.split("__").map(|s| s.to_ascii_lowercase()).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(format!("{ENV_PREFIX}{key}: malformed override key"));
    }
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    for (i, p) in path.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| format!("{ENV_PREFIX}{key}: '{}' is not an object", path[..i].join(".")))?;
        if i + 1 == path.len() {
            obj.insert(p.clone(), parsed);
            return Ok(());
        }
        node = obj.entry(p.clone()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl RunConfig {
    /// Every violated constraint, named by key.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                out.push(msg);
            }
        };
        let g = self.geometry;
        need(g.r_d.is_finite() && g.r_d > 0.0, format!("geometry.r_d: must be positive (got {})", g.r_d));
        need(
            g.r_omega.is_finite() && g.r_d < g.r_omega,
            format!("geometry: constraint 0 < r_d < r_omega violated (r_d = {}, r_omega = {})", g.r_d, g.r_omega),
        );
        need(self.k.is_finite() && self.k > 0.0, format!("k: wave number must be positive (got {})", self.k));
        match (self.problem, self.medium) {
            (Problem::Transmission, None) => need(false, "medium: required for problem 'transmission'".into()),
            (Problem::Transmission, Some(m)) => need(
                m.mu_d.is_finite() && 1.0 - m.mu_d > 0.0,
                format!("medium.mu_d: permeability inside D is 1 - mu_d and must be positive (got mu_d = {})", m.mu_d),
            ),
            (_, Some(_)) => need(false, "medium: only valid for problem 'transmission'".into()),
            (_, None) => {}
        }
        let taus = self.tau_grid.values();
        need(taus.len() >= 5, format!("tau_grid: need at least 5 values (got {})", taus.len()));
        need(
            taus.iter().all(|t| t.is_finite() && *t > 0.0) && taus.windows(2).all(|w| w[0] < w[1]),
            "tau_grid: values must be positive, finite and strictly increasing".into(),
        );
        if let TauGrid::Range { min, max, .. } = self.tau_grid {
            need(min < max, format!("tau_grid: min ({min}) must be below max ({max})"));
        }
        need(!self.t_grid.is_empty(), "t_grid: must not be empty".into());
        need(
            self.t_grid.iter().all(|t| t.is_finite()) && self.t_grid.windows(2).all(|w| w[0] < w[1]),
            "t_grid: values must be finite and strictly increasing".into(),
        );
        match &self.directions {
            DirectionSpec::Spiral { count } | DirectionSpec::Random { count } => {
                need(*count >= 4, format!("directions.count: need at least 4 directions (got {count})"))
            }
            DirectionSpec::List { dirs } => {
                need(!dirs.is_empty(), "directions.dirs: must not be empty".into());
                need(
                    dirs.iter().all(|d| d.iter().all(|x| x.is_finite()) && norm(*d) > 1e-12),
                    "directions.dirs: every direction must be finite and nonzero".into(),
                );
            }
            DirectionSpec::Axis26 => {}
        }
        if let LSpec::Fixed(l) = self.lmax {
            need((1..=MAX_FIXED_L).contains(&l), format!("lmax: fixed degree must lie in 1..={MAX_FIXED_L} (got {l})"));
        }
        let t = self.tolerances;
        need(t.tail > 0.0 && t.tail < 1.0, format!("tolerances.tail: must lie in (0, 1) (got {})", t.tail));
        need(t.slope_tol > 0.0 && t.slope_tol.is_finite(), format!("tolerances.slope_tol: must be positive (got {})", t.slope_tol));
        need(t.guard > 0.0 && t.guard < 1.0, format!("tolerances.guard: must lie in (0, 1) (got {})", t.guard));
        need(
            t.window_fraction > 0.0 && t.window_fraction <= 1.0,
            format!("tolerances.window_fraction: must lie in (0, 1] (got {})", t.window_fraction),
        );
        need(
            t.residual_bound > 0.0 && !t.residual_bound.is_nan(),
            format!("tolerances.residual_bound: must be positive (got {})", t.residual_bound),
        );
        need(t.confidence > 0.0 && t.confidence < 1.0, format!("tolerances.confidence: must lie in (0, 1) (got {})", t.confidence));
        need(self.translation.iter().all(|x| x.is_finite()), "translation: must be finite".into());
        let o = &self.outputs;
        need(
            [&o.sweep_csv, &o.estimates_csv, &o.hull_off, &o.report].iter().all(|s| !s.trim().is_empty()),
            "outputs: file names must not be empty".into(),
        );
        out
    }

    pub fn obstacle(&self) -> Obstacle {
        let geometry = Geometry {
            r_d: self.geometry.r_d,
            r_omega: self.geometry.r_omega,
        };
        match self.problem {
            Problem::Pec => Obstacle::Pec { geometry },
            Problem::Transmission => Obstacle::Transmission {
                geometry,
                medium: Medium {
                    mu_d: self.medium.map_or(0.0, |m| m.mu_d),
                },
            },
            Problem::Empty => Obstacle::Empty,
        }
    }

    pub fn setup(&self) -> SweepSetup {
        let mut s = SweepSetup::new(self.k, self.geometry.r_omega, self.obstacle());
        s.lmax = match self.lmax {
            LSpec::Fixed(l) => Some(l),
            LSpec::Auto(_) => None,
        };
        s.tail_tol = self.tolerances.tail;
        s.guard = self.tolerances.guard;
        s
    }

    pub fn fit(&self) -> FitConfig {
        let t = self.tolerances;
        FitConfig {
            slope_tol: t.slope_tol,
            window_fraction: t.window_fraction,
            log_correction: t.log_correction,
            residual_bound: t.residual_bound,
            confidence: t.confidence,
        }
    }

    pub fn directions(&self) -> Vec<V3> {
        self.directions.resolve(self.seed)
    }
}
