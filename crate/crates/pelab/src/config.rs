//! Experiment configuration files.
//!
//! A config names a closed-loop system, a list of signals and a list of
//! analysis entries. Every name is an enum tag, so a misspelt system, signal
//! kind or op is rejected while parsing, with the line and column of the
//! offending key.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, deserialize_with = "system_with_default_params", skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub signals: Vec<SignalSpec>,
    pub analysis: Vec<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        // Relative CSV paths are taken relative to the config file.
        let base = path.parent().unwrap_or(Path::new("."));
        for s in &mut cfg.signals {
            if let SignalKind::Csv { path, .. } = &mut s.signal {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn signal(&self, id: &str) -> Option<&SignalSpec> {
        self.signals.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub id: String,
    pub signal: SignalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalKind {
    /// Column `(sin ωt, cos ωt)`.
    SinCos {
        #[serde(default = "one")]
        omega: f64,
    },
    Sin {
        #[serde(default = "one")]
        omega: f64,
    },
    AbsSin {
        #[serde(default = "one")]
        omega: f64,
    },
    InverseTime,
    /// Row-major entries.
    Constant { rows: usize, cols: usize, values: Vec<f64> },
    /// Header row, then `t` followed by `rows · cols` row-major entries.
    Csv { path: PathBuf, rows: usize, cols: usize },
}

/// `{"name": ..., "params": {...}}`; `params` may be omitted when every
/// parameter has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    LinearDecay {
        #[serde(default = "one_usize")]
        n: usize,
        #[serde(default = "one")]
        a: f64,
    },
    InverseTimeDecay {
        #[serde(default = "one_usize")]
        n: usize,
    },
    Rotation {},
    /// Gradient adaptive error dynamics driven by the regressor signal `phi`;
    /// `a_tilde` and `p` multiply identities.
    GradientAdaptive {
        phi: String,
        #[serde(default = "minus_one")]
        a_tilde: f64,
        #[serde(default = "one")]
        p: f64,
    },
    /// `ξ̇ = g(t) tanh z` with `g` a signal id.
    Driftless { g: String },
    OscillatorFeedforward {},
    SlotineLi {
        plant: PlantSpec,
        trajectory: TrajectorySpec,
        #[serde(default = "five")]
        kd: f64,
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "two")]
        gamma: f64,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    name: serde_json::Value,
    #[serde(default)]
    params: Option<serde_json::Value>,
}

fn system_with_default_params<'de, D>(d: D) -> std::result::Result<Option<SystemSpec>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let Some(raw) = Option::<RawSystem>::deserialize(d)? else {
        return Ok(None);
    };
    let params = raw.params.unwrap_or_else(|| serde_json::json!({}));
    serde_json::from_value(serde_json::json!({ "name": raw.name, "params": params }))
        .map(Some)
        .map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantSpec {
    Pendulum,
    PendulumViscous,
    TwoLink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Sinusoid {
        #[serde(default = "one")]
        amp: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    Rest,
}

/// State functions examined by the certificate ops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `x₁ sin t − x₂ cos t`.
    RotatingProjection,
    /// `x_k`, excited part given by `x1` (indices).
    Coordinate { n: usize, k: usize, x1: Vec<usize> },
    /// `Φ(t)ᵀx` for a signal id.
    Linear { signal: String },
    /// The config's system vector field on `[t_lo, t_hi]`.
    VectorField { t_lo: f64, t_hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Directions {
    /// Deterministic spread over the unit sphere.
    Sphere(usize),
    List(Vec<Vec<f64>>),
    /// Uniform on the sphere, drawn from the config seed.
    Random(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    ClassicalPe {
        signal: String,
        window: f64,
        t_lo: f64,
        t_hi: f64,
        #[serde(default = "starts")]
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad_step: Option<f64>,
    },
    Udpe {
        function: FunctionSpec,
        delta: f64,
        big_delta: f64,
        window: f64,
        t_lo: f64,
        t_hi: f64,
        #[serde(default = "starts")]
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad_step: Option<f64>,
    },
    PointwiseScan {
        function: FunctionSpec,
        x: Vec<f64>,
        max_window: f64,
        #[serde(default = "one")]
        first_window: f64,
        t_lo: f64,
        t_hi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad_step: Option<f64>,
    },
    CertificateMap {
        function: FunctionSpec,
        big_delta: f64,
        deltas: Vec<f64>,
        first_window: f64,
        max_window: f64,
        t_samples: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        quad_step: Option<f64>,
    },
    Mornar {
        signal: String,
        directions: Vec<Vec<f64>>,
        t0_lo: f64,
        t0_hi: f64,
        #[serde(default = "starts")]
        count: usize,
        horizon: f64,
    },
    Simulate {
        t0s: Vec<f64>,
        x0s: Vec<Vec<f64>>,
        horizon: f64,
        #[serde(default = "default_step")]
        step: f64,
        #[serde(default = "yes")]
        plot: bool,
    },
    Uniformity {
        #[serde(default = "one")]
        r: f64,
        sigma: f64,
        t0s: Vec<f64>,
        directions: Directions,
        horizon: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
}

impl Analysis {
    pub fn op(&self) -> &'static str {
        match self {
            Self::ClassicalPe { .. } => "classical_pe",
            Self::Udpe { .. } => "udpe",
            Self::PointwiseScan { .. } => "pointwise_scan",
            Self::CertificateMap { .. } => "certificate_map",
            Self::Mornar { .. } => "mornar",
            Self::Simulate { .. } => "simulate",
            Self::Uniformity { .. } => "uniformity",
        }
    }

    pub fn is_certificate(&self) -> bool {
        !matches!(self, Self::Simulate { .. } | Self::Uniformity { .. })
    }

    /// Replaces the integration step of simulation entries.
    pub fn override_step(&mut self, h: f64) {
        if let Self::Simulate { step, .. } | Self::Uniformity { step, .. } = self {
            *step = h;
        }
    }
}

fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn five() -> f64 {
    5.0
}
fn minus_one() -> f64 {
    -1.0
}
fn one_usize() -> usize {
    1
}
fn starts() -> usize {
    17
}
fn default_step() -> f64 {
    1e-2
}
fn yes() -> bool {
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    const EG: &str = r#"{
        "name": "t",
        "system": {"name": "gradient_adaptive", "params": {"phi": "s"}},
        "signals": [{"id": "s", "signal": {"kind": "sin"}}],
        "analysis": [
            {"op": "uniformity", "sigma": 0.1, "t0s": [0, 10], "directions": {"sphere": 4}, "horizon": 50},
            {"op": "udpe", "function": {"name": "rotating_projection"}, "delta": 1, "big_delta": 1,
             "window": 6.283185307179586, "t_lo": 0, "t_hi": 6.3}
        ]
    }"#;

    #[test]
    fn round_trip_is_semantic_identity() {
        let c = ExperimentConfig::parse(EG).unwrap();
        let again = ExperimentConfig::parse(&c.to_json()).unwrap();
        assert_eq!(c, again);
        let a: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        let b: serde_json::Value = serde_json::from_str(&again.to_json()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_names_are_rejected_with_the_key() {
        for (bad, key) in [
            (EG.replace("gradient_adaptive", "gradient_adaptiv"), "gradient_adaptiv"),
            (EG.replace("\"udpe\"", "\"udpee\""), "udpee"),
            (EG.replace("\"sin\"", "\"sine\""), "sine"),
            (EG.replace("\"sigma\"", "\"sigm\""), "sigm"),
        ] {
            let e = ExperimentConfig::parse(&bad).unwrap_err().to_string();
            assert!(e.contains(key) && e.contains("line"), "{e}");
        }
    }
}
