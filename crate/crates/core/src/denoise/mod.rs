//! Gaussian denoisers `D_σ` used as the regularization step.

pub mod bm3d;
pub mod grad;
pub mod nlm;
pub mod tgv;
pub mod tv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ComplexImage;

pub use bm3d::{bm3d_lite_denoise, Bm3dParams};
pub use grad::{Boundary, GradientField};
pub use nlm::nlm_denoise;
pub use tgv::tgv2_denoise;
pub use tv::{tv_denoise, tv_objective};

fn default_gamma() -> f64 {
    1.0
}
fn default_tv_iters() -> usize {
    50
}
fn default_tgv_iters() -> usize {
    100
}
fn default_ratio() -> f64 {
    2.0
}
fn default_patch() -> usize {
    1
}
fn default_search() -> usize {
    5
}

/// Denoiser family and its filter parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Denoiser {
    Identity,
    Tv {
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_tv_iters")]
        iters: usize,
    },
    Tgv2 {
        /// Second-order weight over first-order weight.
        #[serde(default = "default_ratio")]
        ratio: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_tgv_iters")]
        iters: usize,
        #[serde(default)]
        boundary: Boundary,
    },
    Nlm {
        #[serde(default = "default_patch")]
        patch_radius: usize,
        #[serde(default = "default_search")]
        search_radius: usize,
    },
    Bm3dLite {
        #[serde(default = "Bm3dDefaults::block")]
        block: usize,
        #[serde(default = "Bm3dDefaults::group")]
        group: usize,
        #[serde(default = "Bm3dDefaults::search")]
        search: usize,
        #[serde(default = "Bm3dDefaults::step")]
        step: usize,
        #[serde(default = "Bm3dDefaults::threshold_mult")]
        threshold_mult: f64,
    },
}

struct Bm3dDefaults;

impl Bm3dDefaults {
    fn block() -> usize {
        Bm3dParams::default().block
    }
    fn group() -> usize {
        Bm3dParams::default().group
    }
    fn search() -> usize {
        Bm3dParams::default().search
    }
    fn step() -> usize {
        Bm3dParams::default().step
    }
    fn threshold_mult() -> f64 {
        Bm3dParams::default().threshold_mult
    }
}

impl Denoiser {
    pub fn tv() -> Self {
        Denoiser::Tv {
            gamma: default_gamma(),
            iters: default_tv_iters(),
        }
    }

    pub fn tgv2() -> Self {
        Denoiser::Tgv2 {
            ratio: default_ratio(),
            gamma: default_gamma(),
            iters: default_tgv_iters(),
            boundary: Boundary::Periodic,
        }
    }

    pub fn nlm() -> Self {
        Denoiser::Nlm {
            patch_radius: default_patch(),
            search_radius: default_search(),
        }
    }

    pub fn bm3d_lite() -> Self {
        let p = Bm3dParams::default();
        Denoiser::Bm3dLite {
            block: p.block,
            group: p.group,
            search: p.search,
            step: p.step,
            threshold_mult: p.threshold_mult,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Denoiser::Identity => "identity",
            Denoiser::Tv { .. } => "tv",
            Denoiser::Tgv2 { .. } => "tgv2",
            Denoiser::Nlm { .. } => "nlm",
            Denoiser::Bm3dLite { .. } => "bm3d_lite",
        }
    }

    /// Checks parameters against an image of the given shape.
    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        let field = "solver.denoiser";
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    format!("{field}.{name}"),
                    format!("must be positive, got {v}"),
                ))
            }
        };
        let nonzero = |name: &str, v: usize| {
            if v > 0 {
                Ok(())
            } else {
                Err(Error::config(
                    format!("{field}.{name}"),
                    "must be at least 1",
                ))
            }
        };
        match *self {
            Denoiser::Identity => Ok(()),
            Denoiser::Tv { gamma, .. } => positive("gamma", gamma),
            Denoiser::Tgv2 { ratio, gamma, .. } => {
                positive("gamma", gamma)?;
                positive("ratio", ratio)
            }
            Denoiser::Nlm {
                patch_radius,
                search_radius,
            } => {
                nonzero("patch_radius", patch_radius)?;
                nonzero("search_radius", search_radius)
            }
            Denoiser::Bm3dLite {
                block,
                group,
                step,
                threshold_mult,
                ..
            } => {
                nonzero("block", block)?;
                nonzero("group", group)?;
                nonzero("step", step)?;
                if block > height || block > width {
                    return Err(Error::config(
                        format!("{field}.block"),
                        format!("block {block} exceeds image {height}x{width}"),
                    ));
                }
                if !(threshold_mult >= 0.0) {
                    return Err(Error::config(
                        format!("{field}.threshold_mult"),
                        "must be nonnegative",
                    ));
                }
                Ok(())
            }
        }
    }
}

/// A denoiser together with its strength `σ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiserSpec {
    pub kind: Denoiser,
    pub sigma: f64,
}

impl DenoiserSpec {
    pub fn new(kind: Denoiser, sigma: f64) -> Self {
        Self { kind, sigma }
    }
}

/// Applies `spec` to `v0`. `Identity` and `σ = 0` return `v0` unchanged.
pub fn denoise(spec: &DenoiserSpec, v0: &ComplexImage) -> Result<ComplexImage> {
    let sigma = spec.sigma;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::config(
            "solver.denoiser.sigma",
            format!("must be finite and nonnegative, got {sigma}"),
        ));
    }
    spec.kind.validate(v0.height(), v0.width())?;
    if sigma == 0.0 {
        return Ok(v0.clone());
    }
    Ok(match spec.kind {
        Denoiser::Identity => v0.clone(),
        Denoiser::Tv { gamma, iters } => tv_denoise(v0, sigma, gamma, iters),
        Denoiser::Tgv2 {
            ratio,
            gamma,
            iters,
            boundary,
        } => tgv2_denoise(v0, sigma, ratio, gamma, iters, boundary),
        Denoiser::Nlm {
            patch_radius,
            search_radius,
        } => nlm_denoise(
            v0,
            nlm::bandwidth(sigma, patch_radius),
            patch_radius,
            search_radius,
        ),
        Denoiser::Bm3dLite {
            block,
            group,
            search,
            step,
            threshold_mult,
        } => bm3d_lite_denoise(
            v0,
            sigma,
            &Bm3dParams {
                block,
                step: step.min(block),
                group,
                search,
                threshold_mult,
            },
        ),
    })
}
