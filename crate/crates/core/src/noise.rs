//! Measurement noise: Poisson photon counting and additive Gaussian noise on
//! intensities, plus the matching MAP fidelity `B(h, f)`.
//!
//! Sampling uses one ChaCha stream per measurement index, so `f[i]` depends
//! only on `(seed, i, h[i])` and never on evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Noise model tag and level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    /// Photon counting; `peak` is the scale ν applied to the ground truth.
    Poisson { peak: f64 },
    /// Additive noise on intensities at a target measurement SNR (dB).
    /// `f64::INFINITY` means noiseless.
    Gaussian { snr_db: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::Poisson { peak } if !(peak > 0.0 && peak.is_finite()) => {
                Err(Error::config(
                    "noise.level",
                    format!("Poisson peak must be positive, got {peak}"),
                ))
            }
            NoiseModel::Gaussian { snr_db } if snr_db.is_nan() => {
                Err(Error::config("noise.level", "Gaussian SNR must not be NaN"))
            }
            _ => Ok(()),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseModel::Poisson { .. } => "poisson",
            NoiseModel::Gaussian { .. } => "gaussian",
        }
    }

    pub fn level(&self) -> f64 {
        match *self {
            NoiseModel::Poisson { peak } => peak,
            NoiseModel::Gaussian { snr_db } => snr_db,
        }
    }

    pub fn is_poisson(&self) -> bool {
        matches!(self, NoiseModel::Poisson { .. })
    }
}

/// Measured intensities `f` with the model that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaselessData {
    pub f: Vec<f64>,
    pub model: NoiseModel,
    pub seed: u64,
}

impl PhaselessData {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Wraps noiseless intensities under the given fidelity model.
    pub fn exact(h: Vec<f64>, model: NoiseModel) -> Self {
        Self {
            f: h,
            model,
            seed: 0,
        }
    }
}

fn index_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `f(i) ~ Poisson(h(i))` independently.
pub fn corrupt_poisson(h: &[f64], peak: f64, seed: u64) -> Result<PhaselessData> {
    if let Some((i, v)) = h
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(Error::Domain(format!(
            "Poisson mean must be finite and nonnegative, h[{i}] = {v}"
        )));
    }
    let mut f = vec![0.0; h.len()];
    par::zip_with(h, &mut f, |i, &mean, out| {
        *out = sample_poisson(&mut index_rng(seed, i), mean);
    });
    Ok(PhaselessData {
        f,
        model: NoiseModel::Poisson { peak },
        seed,
    })
}

/// `f = h + ε` with `ε` Gaussian, rescaled so `20·log10(‖h‖/‖ε‖)` equals
/// `snr_db` exactly. An infinite target returns `f = h`.
pub fn corrupt_gaussian(h: &[f64], snr_db: f64, seed: u64) -> Result<PhaselessData> {
    let hn = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(hn > 0.0) {
        return Err(Error::Domain(
            "Gaussian corruption needs nonzero intensities".into(),
        ));
    }
    if snr_db.is_nan() {
        return Err(Error::Domain("target SNR is NaN".into()));
    }
    let model = NoiseModel::Gaussian { snr_db };
    if snr_db == f64::INFINITY {
        return Ok(PhaselessData {
            f: h.to_vec(),
            model,
            seed,
        });
    }
    let eps = par::map_range(h.len(), |i| {
        let x: f64 = index_rng(seed, i).sample(StandardNormal);
        x
    });
    let en = eps.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = hn / (en * 10f64.powf(snr_db / 20.0));
    let f = h.iter().zip(&eps).map(|(a, e)| a + scale * e).collect();
    Ok(PhaselessData { f, model, seed })
}

/// MAP fidelity `B(h, f)`: `½Σ(h − f·ln h)` for Poisson, `½‖h − f‖²` for Gaussian.
/// Poisson terms with `f(i) = 0` contribute `½h(i)`.
pub fn fidelity(h: &[f64], data: &PhaselessData) -> Result<f64> {
    if h.len() != data.f.len() {
        return Err(Error::dim(data.f.len(), h.len()));
    }
    match data.model {
        NoiseModel::Gaussian { .. } => Ok(0.5
            * h.iter()
                .zip(&data.f)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()),
        NoiseModel::Poisson { .. } => {
            let mut acc = 0.0;
            for (i, (&hi, &fi)) in h.iter().zip(&data.f).enumerate() {
                if fi == 0.0 {
                    acc += hi;
                } else if hi > 0.0 {
                    acc += hi - fi * hi.ln();
                } else {
                    return Err(Error::Domain(format!(
                        "Poisson fidelity undefined: h[{i}] = {hi} with f[{i}] = {fi}"
                    )));
                }
            }
            Ok(0.5 * acc)
        }
    }
}

/// Like [`fidelity`], but floors `h` at the smallest positive double so
/// diagnostics never fail on iterates that hit exact zeros.
pub fn fidelity_floored(h: &[f64], data: &PhaselessData) -> f64 {
    if data.model.is_poisson() {
        let floored: Vec<f64> = h.iter().map(|&x| x.max(f64::MIN_POSITIVE)).collect();
        fidelity(&floored, data).unwrap_or(f64::NAN)
    } else {
        fidelity(h, data).unwrap_or(f64::NAN)
    }
}

/// Draws one Poisson variate: inversion for small means, PTRS above.
pub fn sample_poisson<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < 10.0 {
        let mut p = (-mean).exp();
        let mut cdf = p;
        let u: f64 = rng.random();
        let mut k = 0u64;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
            if p == 0.0 && cdf < u {
                // lost to rounding in the far tail
                break;
            }
        }
        return k as f64;
    }
    // Transformed rejection with squeeze (Hörmann 1993).
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_factorial(k);
        if lhs <= rhs {
            return k;
        }
    }
}

/// `ln(k!)` for integer-valued `k ≥ 0`.
fn ln_factorial(k: f64) -> f64 {
    if k < 16.0 {
        return (2..=k as u64).map(|i| (i as f64).ln()).sum();
    }
    // Stirling series; error below 1e-12 for k >= 16.
    let x = k + 1.0;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}
