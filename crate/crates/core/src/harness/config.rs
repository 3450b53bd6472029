//! Experiment configuration, overrides, and scene construction.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::io;
use crate::noise::{corrupt_gaussian, corrupt_poisson, NoiseModel, PhaselessData};
use crate::operator::{CdpOperator, MeasurementOperator, Operator, ProbeShape, PtychoOperator};
use crate::phantom::Phantom;
use crate::pnp::PnpConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    Cdp,
    Ptycho,
}

fn default_size() -> usize {
    64
}
fn default_true() -> bool {
    true
}

/// Image size and measurement layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Phantom size; ignored when the input is a file.
    #[serde(default = "default_size")]
    pub height: usize,
    #[serde(default = "default_size")]
    pub width: usize,
    /// CDP mask count `K`; defaults to 2 for real and 4 for complex images.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<usize>,
    /// Ptychography frame size `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<usize>,
    /// Ptychography scan grid `[rows, cols]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default = "default_true")]
    pub wrap: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeShape>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            height: default_size(),
            width: default_size(),
            masks: None,
            frame: None,
            grid: None,
            stride: None,
            wrap: true,
            probe: None,
        }
    }
}

/// Noise model plus a switch that skips the corruption while keeping the
/// model's fidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(flatten)]
    pub model: NoiseModel,
    #[serde(default)]
    pub noiseless: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Input {
    Phantom(Phantom),
    /// 8-bit grayscale PNG/PGM, or a `.c128` complex image.
    Path(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: Problem,
    #[serde(default)]
    pub geometry: Geometry,
    pub noise: NoiseConfig,
    pub solver: PnpConfig,
    pub input: Input,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Sets `path` (dot-separated) in a JSON tree, creating objects as needed.
/// The value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        Error::config(
            "--override",
            format!("expected key=value, got `{assignment}`"),
        )
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::config(
                "--override",
                format!("empty segment in `{key}`"),
            ));
        }
        let obj = match node {
            Value::Object(map) => map,
            _ => {
                return Err(Error::config(
                    "--override",
                    format!("`{}` is not an object", parts[..i].join(".")),
                ))
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, overrides)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON encoding, hex.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Hash of the fields that determine the simulated scene, so solver
    /// changes can reuse measurements on disk.
    pub fn scene_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut value {
            map.remove("solver");
            map.remove("output");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.height == 0 || g.width == 0 {
            return Err(Error::config(
                "geometry.height",
                "image size must be positive",
            ));
        }
        match self.problem {
            Problem::Cdp => {
                if g.masks == Some(0) {
                    return Err(Error::config("geometry.masks", "K must be at least 1"));
                }
            }
            Problem::Ptycho => {
                if g.stride == Some(0) {
                    return Err(Error::config(
                        "geometry.stride",
                        "stride must be at least 1",
                    ));
                }
                if g.frame == Some(0) {
                    return Err(Error::config("geometry.frame", "frame must be at least 1"));
                }
                if let Some([r, c]) = g.grid {
                    if r == 0 || c == 0 {
                        return Err(Error::config("geometry.grid", "grid must be nonempty"));
                    }
                }
            }
        }
        self.noise.model.validate()?;
        self.solver.validate()
    }

    fn mask_seed(&self) -> u64 {
        self.seed
    }

    fn noise_seed(&self) -> u64 {
        self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
    }

    pub(crate) fn init_seed(&self) -> u64 {
        self.seed.wrapping_add(0x3C6E_F372_FE94_F82B)
    }
}

/// A simulated experiment: scaled ground truth, operator, and measurements.
#[derive(Clone, Debug)]
pub struct Scene {
    pub truth: ComplexImage,
    pub op: Operator,
    pub data: PhaselessData,
    /// Solver settings with image-dependent defaults resolved.
    pub solver: PnpConfig,
}

fn load_input(cfg: &ExperimentConfig) -> Result<ComplexImage> {
    match &cfg.input {
        Input::Phantom(p) => Ok(p.generate(cfg.geometry.height, cfg.geometry.width)),
        Input::Path(path) => {
            if !path.exists() {
                return Err(Error::config(
                    "input.path",
                    format!("{} does not exist", path.display()),
                ));
            }
            if path.extension().is_some_and(|e| e == "c128") {
                io::read_c128(path)
            } else {
                io::read_grayscale(path)
            }
        }
    }
}

fn build_operator(cfg: &ExperimentConfig, h: usize, w: usize, real: bool) -> Result<Operator> {
    let g = &cfg.geometry;
    Ok(match cfg.problem {
        Problem::Cdp => {
            let k = g.masks.unwrap_or(if real { 2 } else { 4 });
            CdpOperator::octanary(h, w, k, cfg.mask_seed())?.into()
        }
        Problem::Ptycho => {
            let s = g.frame.unwrap_or(h.min(w).min(64));
            let stride = g.stride.unwrap_or((s / 4).max(1));
            let [rows, cols] = g
                .grid
                .unwrap_or([h.div_ceil(stride).max(1), w.div_ceil(stride).max(1)]);
            let probe = g
                .probe
                .unwrap_or(ProbeShape::Zone {
                    radius: s as f64 * 0.4,
                    curvature: 1.0,
                })
                .generate(s);
            PtychoOperator::grid(h, w, probe, rows, cols, stride, g.wrap)?.into()
        }
    })
}

/// Builds the scene deterministically from the configuration.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Scene> {
    cfg.validate()?;
    let raw = load_input(cfg)?;
    let (h, w) = raw.shape();
    let real = raw.is_real();
    let op = build_operator(cfg, h, w, real)?;
    let truth = match cfg.noise.model {
        NoiseModel::Poisson { peak } => raw.scale(num_complex::Complex64::new(peak, 0.0)),
        NoiseModel::Gaussian { .. } => raw,
    };
    let clean = op.forward(&truth)?.intensities();
    let data = if cfg.noise.noiseless {
        PhaselessData {
            f: clean,
            model: cfg.noise.model,
            seed: cfg.noise_seed(),
        }
    } else {
        match cfg.noise.model {
            NoiseModel::Poisson { peak } => corrupt_poisson(&clean, peak, cfg.noise_seed())?,
            NoiseModel::Gaussian { snr_db } => corrupt_gaussian(&clean, snr_db, cfg.noise_seed())?,
        }
    };
    let mut solver = cfg.solver;
    solver.seed = cfg.init_seed();
    cfg.solver.denoiser.validate(h, w)?;
    Ok(Scene {
        truth,
        op,
        data,
        solver,
    })
}
