//! Experiment configuration: TOML with nested sections, unknown keys
//! rejected, defaults filled in and echoed into every output header.

use serde::{Deserialize, Serialize};
use std::path::Path;

use sdcar::lattice::Boundary;
use sdcar::flow::GeneratorMode;

use crate::ExperimentError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    /// Kitaev chain: hopping t, chemical potential mu, pairing delta.
    Kitaev {
        n_sites: usize,
        #[serde(default = "one")]
        t: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default = "one")]
        delta: f64,
        #[serde(default = "open")]
        boundary: Boundary,
    },
    /// Random tight-binding model on a box: Laplacian plus diagonal
    /// disorder.
    Anderson {
        d: usize,
        box_radius: i64,
        #[serde(default = "one_spin")]
        spins: Vec<String>,
        #[serde(default = "open")]
        boundary: Boundary,
        #[serde(default = "one")]
        hopping_scale: f64,
    },
    /// Self-dual matrices loaded from JSON files; the path interpolates
    /// linearly between the two endpoints.
    Custom { h0_file: String, h1_file: String },
}

fn one() -> f64 {
    1.0
}

fn open() -> Boundary {
    Boundary::Open
}

fn one_spin() -> Vec<String> {
    vec!["0".into()]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// Grid resolution along s in [0, 1].
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    /// Kitaev: waypoints of mu(s), piecewise linear over equal subintervals.
    #[serde(default)]
    pub mu_waypoints: Option<Vec<f64>>,
    /// Anderson: waypoints of the hopping scale.
    #[serde(default)]
    pub hopping_waypoints: Option<Vec<f64>>,
}

fn default_grid() -> usize {
    101
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { grid_points: default_grid(), mu_waypoints: None, hopping_waypoints: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "kato")]
    pub mode: GeneratorMode,
    /// Filter cutoff; defaults to twice the minimal gap on the path.
    #[serde(default)]
    pub nu0: Option<f64>,
    #[serde(default = "default_h_init")]
    pub h_init: f64,
    #[serde(default = "default_h_min")]
    pub h_min: f64,
    #[serde(default = "default_transport_tol")]
    pub transport_tol: f64,
}

fn kato() -> GeneratorMode {
    GeneratorMode::Kato
}

fn default_h_init() -> f64 {
    1e-2
}

fn default_h_min() -> f64 {
    1e-5
}

fn default_transport_tol() -> f64 {
    1e-6
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            mode: kato(),
            nu0: None,
            h_init: default_h_init(),
            h_min: default_h_min(),
            transport_tol: default_transport_tol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSection {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "one_usize")]
    pub n_realizations: usize,
}

fn one_usize() -> usize {
    1
}

impl Default for DisorderSection {
    fn default() -> Self {
        DisorderSection { lambda: 0.0, master_seed: 0, n_realizations: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtSection {
    #[serde(default = "default_ct_mu")]
    pub mu: f64,
    #[serde(default = "one")]
    pub epsilon: f64,
    /// Spectral parameter z as [re, im].
    #[serde(default = "default_z")]
    pub z: [f64; 2],
}

fn default_ct_mu() -> f64 {
    0.2
}

fn default_z() -> [f64; 2] {
    [0.0, 0.2]
}

impl Default for CtSection {
    fn default() -> Self {
        CtSection { mu: default_ct_mu(), epsilon: 1.0, z: default_z() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Eigenvalues below this factor of the spectral radius count as zero.
    #[serde(default = "default_zero_tol_factor")]
    pub zero_tol_factor: f64,
    /// Largest gap accepted at a located crossing.
    #[serde(default = "default_gap_escalation")]
    pub gap_escalation: f64,
    /// Bisection interval width for gap closing.
    #[serde(default = "default_bisection")]
    pub bisection_interval: f64,
    /// One-sided offset for the crossing projections.
    #[serde(default = "default_crossing_delta")]
    pub crossing_delta: f64,
    /// Truncation of the weak* observable family.
    #[serde(default = "default_n_max")]
    pub weakstar_n_max: usize,
}

fn default_zero_tol_factor() -> f64 {
    1e-8
}

fn default_gap_escalation() -> f64 {
    1e-6
}

fn default_bisection() -> f64 {
    1e-8
}

fn default_crossing_delta() -> f64 {
    1e-4
}

fn default_n_max() -> usize {
    64
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection {
            zero_tol_factor: default_zero_tol_factor(),
            gap_escalation: default_gap_escalation(),
            bisection_interval: default_bisection(),
            crossing_delta: default_crossing_delta(),
            weakstar_n_max: default_n_max(),
        }
    }
}

/// Box radii for the finite-size study, e.g. [4, 6, 8].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default)]
    pub box_radii: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub disorder: DisorderSection,
    #[serde(default)]
    pub ct: CtSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub study: StudySection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.path.grid_points < 2 {
            return Err(ExperimentError::Parse("path.grid_points must be at least 2".into()));
        }
        match &self.model {
            ModelConfig::Kitaev { n_sites, .. } => {
                if *n_sites < 2 {
                    return Err(ExperimentError::Parse("kitaev needs n_sites >= 2".into()));
                }
            }
            ModelConfig::Anderson { d, box_radius, spins, .. } => {
                if *d < 1 || *box_radius < 0 || spins.is_empty() {
                    return Err(ExperimentError::Parse("invalid anderson geometry".into()));
                }
                if self.path.mu_waypoints.is_some() {
                    return Err(ExperimentError::Parse(
                        "mu_waypoints apply to the kitaev model only".into(),
                    ));
                }
            }
            ModelConfig::Custom { .. } => {}
        }
        if let Some(w) = &self.path.mu_waypoints {
            if w.len() < 2 {
                return Err(ExperimentError::Parse("mu_waypoints needs at least 2 values".into()));
            }
        }
        if let Some(w) = &self.path.hopping_waypoints {
            if w.len() < 2 {
                return Err(ExperimentError::Parse(
                    "hopping_waypoints needs at least 2 values".into(),
                ));
            }
        }
        if !(self.ct.epsilon > 0.0 && self.ct.epsilon <= 1.0) {
            return Err(ExperimentError::Parse("ct.epsilon must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Piecewise-linear interpolation of waypoints over equal subintervals of
/// s in [0, 1], and its derivative.
pub fn waypoint_value(waypoints: &[f64], s: f64) -> f64 {
    let n = waypoints.len();
    if n == 1 {
        return waypoints[0];
    }
    let segs = (n - 1) as f64;
    let x = (s.clamp(0.0, 1.0)) * segs;
    let k = (x.floor() as usize).min(n - 2);
    let frac = x - k as f64;
    waypoints[k] * (1.0 - frac) + waypoints[k + 1] * frac
}

pub fn waypoint_derivative(waypoints: &[f64], s: f64) -> f64 {
    let n = waypoints.len();
    if n == 1 {
        return 0.0;
    }
    let segs = (n - 1) as f64;
    let x = (s.clamp(0.0, 1.0)) * segs;
    let k = (x.floor() as usize).min(n - 2);
    (waypoints[k + 1] - waypoints[k]) * segs
}
