//! Parameter presets shipped with the crate, embedded at build time.

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// `(name, JSON)` for every preset, sorted by name.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "acceptance_ls_noiseless",
        include_str!("../../presets/acceptance_ls_noiseless.json"),
    ),
    (
        "acceptance_texture_poisson",
        include_str!("../../presets/acceptance_texture_poisson.json"),
    ),
    (
        "acceptance_tv_poisson",
        include_str!("../../presets/acceptance_tv_poisson.json"),
    ),
    (
        "cdp_complex_bm3d_lite_peak1e-1",
        include_str!("../../presets/cdp_complex_bm3d_lite_peak1e-1.json"),
    ),
    (
        "cdp_complex_bm3d_lite_peak5e-2",
        include_str!("../../presets/cdp_complex_bm3d_lite_peak5e-2.json"),
    ),
    (
        "cdp_complex_bm3d_lite_peak8e-2",
        include_str!("../../presets/cdp_complex_bm3d_lite_peak8e-2.json"),
    ),
    (
        "cdp_complex_nlm_peak1e-1",
        include_str!("../../presets/cdp_complex_nlm_peak1e-1.json"),
    ),
    (
        "cdp_complex_nlm_peak5e-2",
        include_str!("../../presets/cdp_complex_nlm_peak5e-2.json"),
    ),
    (
        "cdp_complex_nlm_peak8e-2",
        include_str!("../../presets/cdp_complex_nlm_peak8e-2.json"),
    ),
    (
        "cdp_complex_tgv2_peak1e-1",
        include_str!("../../presets/cdp_complex_tgv2_peak1e-1.json"),
    ),
    (
        "cdp_complex_tgv2_peak5e-2",
        include_str!("../../presets/cdp_complex_tgv2_peak5e-2.json"),
    ),
    (
        "cdp_complex_tgv2_peak8e-2",
        include_str!("../../presets/cdp_complex_tgv2_peak8e-2.json"),
    ),
    (
        "cdp_real_bm3d_lite_peak1e-2",
        include_str!("../../presets/cdp_real_bm3d_lite_peak1e-2.json"),
    ),
    (
        "cdp_real_bm3d_lite_peak3e-3",
        include_str!("../../presets/cdp_real_bm3d_lite_peak3e-3.json"),
    ),
    (
        "cdp_real_bm3d_lite_peak5e-3",
        include_str!("../../presets/cdp_real_bm3d_lite_peak5e-3.json"),
    ),
    (
        "cdp_real_nlm_peak1e-2",
        include_str!("../../presets/cdp_real_nlm_peak1e-2.json"),
    ),
    (
        "cdp_real_nlm_peak3e-3",
        include_str!("../../presets/cdp_real_nlm_peak3e-3.json"),
    ),
    (
        "cdp_real_nlm_peak5e-3",
        include_str!("../../presets/cdp_real_nlm_peak5e-3.json"),
    ),
    (
        "cdp_real_tgv2_peak1e-2",
        include_str!("../../presets/cdp_real_tgv2_peak1e-2.json"),
    ),
    (
        "cdp_real_tgv2_peak3e-3",
        include_str!("../../presets/cdp_real_tgv2_peak3e-3.json"),
    ),
    (
        "cdp_real_tgv2_peak5e-3",
        include_str!("../../presets/cdp_real_tgv2_peak5e-3.json"),
    ),
    (
        "cdp_real_tv_peak3e-3",
        include_str!("../../presets/cdp_real_tv_peak3e-3.json"),
    ),
    (
        "ptycho_gaussian_bm3d_snr15",
        include_str!("../../presets/ptycho_gaussian_bm3d_snr15.json"),
    ),
    (
        "ptycho_gaussian_bm3d_snr20",
        include_str!("../../presets/ptycho_gaussian_bm3d_snr20.json"),
    ),
    (
        "ptycho_gaussian_bm3d_snr30",
        include_str!("../../presets/ptycho_gaussian_bm3d_snr30.json"),
    ),
    (
        "ptycho_poisson_bm3d_peak0.2",
        include_str!("../../presets/ptycho_poisson_bm3d_peak0.2.json"),
    ),
    (
        "ptycho_poisson_bm3d_peak0.5",
        include_str!("../../presets/ptycho_poisson_bm3d_peak0.5.json"),
    ),
    (
        "ptycho_poisson_bm3d_peak0.8",
        include_str!("../../presets/ptycho_poisson_bm3d_peak0.8.json"),
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn json(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, j)| *j)
        .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`")))
}

/// Loads a preset and applies `key=value` overrides.
pub fn load(name: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(json(name)?, overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for (name, _) in PRESETS {
            load(name, &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_preset_is_config_error() {
        assert!(matches!(load("nope", &[]), Err(Error::Config { .. })));
    }
}
