use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::budget::GeometryConstants;
use crate::forward::{MeshResolution, ModelKind};
use crate::projection::SolverConfig;
use crate::{Error, Result};

/// Projection constants shared by every volume query.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeSettings {
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub gamma: f64,
    pub eps1: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "C0_prime")]
    pub c0_prime: f64,
}

impl Default for VolumeSettings {
    fn default() -> Self {
        VolumeSettings { big_lambda: 1.0, gamma: 1.0, eps1: 0.05, c0: 1.0, c0_prime: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSettings {
    pub i0: f64,
    #[serde(rename = "L", default)]
    pub l: usize,
    /// Overrides `c_n ηⁿ / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Overrides the model diameter.
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    #[default]
    Preset,
    /// Derive J and δ from the parameter cascade (fails when they underflow).
    ReferenceCascade,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshResolution>,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
    pub eta: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub volume: VolumeSettings,
    pub reconstruction: ReconstructionSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConstants>,
    #[serde(default)]
    pub mode: RunMode,
    /// Ground-truth grid spacing; defaults to η/4 on the interval and η/2 on surfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn bad(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.into(), reason: reason.into() }
}

/// Pulls the backticked field name out of a serde message.
fn serde_field(msg: &str) -> Option<String> {
    for marker in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(start) = msg.find(marker) {
            let rest = &msg[start + marker.len()..];
            if let Some(end) = rest.find('`') {
                return Some(rest[..end].to_string());
            }
        }
    }
    None
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(value).map_err(|e| {
            let msg = e.inner().to_string();
            let path = e.path().to_string();
            let path = if path == "." { None } else { Some(path) };
            let field = match (path, serde_field(&msg)) {
                (Some(p), Some(f)) if !p.ends_with(&f) => format!("{p}.{f}"),
                (Some(p), _) => p,
                (None, Some(f)) => f,
                (None, None) => "config".into(),
            };
            bad(&field, msg)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| bad("config", e.to_string()))?;
        Self::from_value(value)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("config", format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(bad("name", "must not be empty"));
        }
        if self.j < 2 {
            return Err(bad("J", format!("need at least 2 modes, got {}", self.j)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(bad("delta", format!("must be finite and nonnegative, got {}", self.delta)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(bad("eta", format!("must be positive, got {}", self.eta)));
        }
        if let Some(h) = self.sample_spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(bad("sample_spacing", format!("must be positive, got {h}")));
            }
        }
        self.solver.validate()?;
        let v = &self.volume;
        for (name, x) in [("volume.Lambda", v.big_lambda), ("volume.gamma", v.gamma), ("volume.eps1", v.eps1), ("volume.C0", v.c0), ("volume.C0_prime", v.c0_prime)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(bad(name, format!("must be positive, got {x}")));
            }
        }
        if let Some(g) = &self.geometry {
            g.validate()?;
        }
        if self.mode == RunMode::ReferenceCascade && self.geometry.is_none() {
            return Err(bad("geometry", "reference-cascade mode needs geometry constants"));
        }
        Ok(())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// Applies `key=value` overrides with dotted keys; values parse as JSON
    /// when possible and as strings otherwise.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = self.to_value();
        for (key, raw) in overrides {
            let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
            set_path(&mut value, key, parsed)?;
        }
        Self::from_value(value)
    }
}

fn set_path(root: &mut Value, key: &str, v: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| bad(key, "path does not lead to an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), v);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Names of the shipped presets.
pub const PRESETS: [&str; 9] = [
    "interval-pi-1",
    "interval-pi-2",
    "interval-pi-3",
    "square-pi-1",
    "square-pi-2",
    "square-pi-3",
    "disk-1-1",
    "disk-1-2",
    "disk-1-3",
];

fn base(name: &str, model: ModelKind, j: usize, eta: f64, i0: f64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        model,
        mesh: None,
        j,
        delta: 0.0,
        seed: 7,
        eta,
        solver: SolverConfig::default(),
        volume: VolumeSettings::default(),
        reconstruction: ReconstructionSettings { i0, l: 0, epsilon: None, diameter: None, max_points: None },
        geometry: None,
        mode: RunMode::Preset,
        sample_spacing: None,
        output_dir: None,
    }
}

pub const SQUARE_EPSILON: f64 = 3.4;

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "interval-pi-1" => coarse_interval(name),
        "interval-pi-2" => base(name, ModelKind::Interval { length: PI }, 64, 0.2, 8.0),
        "interval-pi-3" => base(name, ModelKind::Interval { length: PI }, 64, 0.1, 8.0),
        "square-pi-1" => square(name, 16),
        "square-pi-2" => square(name, 24),
        "square-pi-3" => square(name, 32),
        "disk-1-1" => surface(name, ModelKind::Disk { radius: 1.0 }, 16, 0.9),
        "disk-1-2" => surface(name, ModelKind::Disk { radius: 1.0 }, 24, 0.9),
        "disk-1-3" => surface(name, ModelKind::Disk { radius: 1.0 }, 32, 0.8),
        _ => return Err(bad("preset", format!("unknown preset `{name}`; known: {}", PRESETS.join(", ")))),
    };
    Ok(cfg)
}

/// Coarsest interval level. Slice volumes here are differences of four
/// projections, so it carries more modes and a tighter trace cap than the
/// finer levels.
fn coarse_interval(name: &str) -> ExperimentConfig {
    let mut cfg = base(name, ModelKind::Interval { length: PI }, 256, 0.4, 8.0);
    cfg.volume.eps1 = 0.02;
    cfg
}

/// Side-pi squares admit too many neighbouring level combinations at the
/// default slice threshold, so these presets raise it.
fn square(name: &str, j: usize) -> ExperimentConfig {
    let mut cfg = surface(name, ModelKind::Rectangle { lx: PI, ly: PI }, j, 0.95);
    cfg.reconstruction.epsilon = Some(SQUARE_EPSILON);
    cfg
}

fn surface(name: &str, model: ModelKind, j: usize, eta: f64) -> ExperimentConfig {
    let mut cfg = base(name, model, j, eta, 8.0);
    cfg.mesh = Some(MeshResolution { interior: 48, boundary: 256 });
    cfg
}
