//! Entrywise proximal maps of the magnitude fidelity.
//!
//! Both solve `min_z B(|z|², f) + (η/2)‖z − z0‖²` pixel by pixel. The
//! minimizer keeps the phase of `z0` and only the modulus `ρ` is computed:
//!
//! * Poisson: `ρ = (η|z0| + sqrt(η²|z0|² + 4(1+η)f)) / (2(1+η))`.
//! * Gaussian: `ρ` is the nonnegative root of `x³ + (η/2 − f)x − (η/2)|z0| = 0`
//!   (Cardano when the discriminant is nonnegative, trigonometric otherwise),
//!   compared against `x = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::operator::Spectrum;
use crate::par;

/// Unit phase of `z`, with `sign(0) = 1`.
#[inline]
pub fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        z / r
    }
}

#[inline]
fn with_modulus(z0: Complex64, rho: f64) -> Complex64 {
    let r = z0.norm();
    if r == 0.0 {
        Complex64::new(rho, 0.0)
    } else {
        z0 * (rho / r)
    }
}

/// Poisson modulus update for one entry.
#[inline]
pub fn poisson_modulus(a: f64, f: f64, eta: f64) -> f64 {
    (eta * a + (eta * eta * a * a + 4.0 * (1.0 + eta) * f).sqrt()) / (2.0 * (1.0 + eta))
}

/// Objective of the Gaussian modulus problem, `½(x² − f)² + (η/2)(x − a)²`.
#[inline]
pub fn gaussian_objective(x: f64, a: f64, f: f64, eta: f64) -> f64 {
    0.5 * (x * x - f).powi(2) + 0.5 * eta * (x - a).powi(2)
}

/// Gaussian modulus update for one entry: the global minimizer over `x ≥ 0`.
pub fn gaussian_modulus(a: f64, f: f64, eta: f64) -> f64 {
    // depressed cubic x³ + p x + q = 0
    let p = 0.5 * eta - f;
    let half_q = 0.25 * eta * a; // −q/2
    let disc = p * p * p / 27.0 + half_q * half_q;
    let mut x = if disc >= 0.0 {
        let s = disc.sqrt();
        (half_q + s).cbrt() + (half_q - s).cbrt()
    } else {
        // p < 0 here; largest of three real roots
        let m = (-p / 3.0).sqrt();
        let theta = (half_q / (m * m * m)).clamp(-1.0, 1.0);
        2.0 * m * (theta.acos() / 3.0).cos()
    };
    // one Newton polish against cancellation in the Cardano sum
    let d = 3.0 * x * x + p;
    if d > 0.0 {
        let step = (x * x * x + p * x - 2.0 * half_q) / d;
        if step.is_finite() {
            x -= step;
        }
    }
    let x = x.max(0.0);
    if gaussian_objective(0.0, a, f, eta) < gaussian_objective(x, a, f, eta) {
        0.0
    } else {
        x
    }
}

fn check(z0: &Spectrum, f: &[f64], eta: f64) -> Result<()> {
    if z0.len() != f.len() {
        return Err(Error::dim(z0.len(), f.len()));
    }
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

/// Closed-form prox for the Poisson fidelity.
pub fn prox_poisson(z0: &Spectrum, f: &[f64], eta: f64) -> Result<Spectrum> {
    check(z0, f, eta)?;
    if let Some((i, v)) = f.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Domain(format!("negative count f[{i}] = {v}")));
    }
    let mut out = z0.clone();
    par::for_each_indexed(out.data_mut(), |i, z| {
        *z = with_modulus(*z, poisson_modulus(z.norm(), f[i], eta));
    });
    Ok(out)
}

/// Closed-form prox for the Gaussian (intensity least squares) fidelity.
pub fn prox_gaussian(z0: &Spectrum, f: &[f64], eta: f64) -> Result<Spectrum> {
    check(z0, f, eta)?;
    let mut out = z0.clone();
    par::for_each_indexed(out.data_mut(), |i, z| {
        *z = with_modulus(*z, gaussian_modulus(z.norm(), f[i], eta));
    });
    Ok(out)
}

/// Dispatches on the noise model.
pub fn prox_magnitude(model: &NoiseModel, z0: &Spectrum, f: &[f64], eta: f64) -> Result<Spectrum> {
    match model {
        NoiseModel::Poisson { .. } => prox_poisson(z0, f, eta),
        NoiseModel::Gaussian { .. } => prox_gaussian(z0, f, eta),
    }
}
