//! Deterministic synthetic test images.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ComplexImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phantom {
    /// Piecewise-constant disks and rectangles on a dark background.
    Shapes,
    /// Piecewise-affine ramps.
    Ramps,
    /// Repeated 8×8 tiles of a striped/checkered motif.
    Texture,
    /// Magnitude from `Shapes`, phase from `Ramps`.
    Complex,
    /// Two levels, 0 and 1, with a vertical strip of value 1.
    Strip,
}

impl Phantom {
    pub const ALL: [Phantom; 5] = [
        Phantom::Shapes,
        Phantom::Ramps,
        Phantom::Texture,
        Phantom::Complex,
        Phantom::Strip,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Phantom::Shapes => "shapes",
            Phantom::Ramps => "ramps",
            Phantom::Texture => "texture",
            Phantom::Complex => "complex",
            Phantom::Strip => "strip",
        }
    }

    pub fn is_real(&self) -> bool {
        !matches!(self, Phantom::Complex)
    }

    pub fn generate(&self, height: usize, width: usize) -> ComplexImage {
        let real = |f: fn(f64, f64) -> f64| {
            ComplexImage::from_fn(height, width, |i, j| {
                let y = (i as f64 + 0.5) / height as f64;
                let x = (j as f64 + 0.5) / width as f64;
                Complex64::new(f(y, x), 0.0)
            })
        };
        match self {
            Phantom::Shapes => real(shapes),
            Phantom::Ramps => real(ramps),
            Phantom::Texture => ComplexImage::from_fn(height, width, |i, j| {
                Complex64::new(texture_tile(i % 8, j % 8), 0.0)
            }),
            Phantom::Complex => ComplexImage::from_fn(height, width, |i, j| {
                let y = (i as f64 + 0.5) / height as f64;
                let x = (j as f64 + 0.5) / width as f64;
                let mag = 0.2 + 0.8 * shapes(y, x);
                let phase = PI / 2.0 * (ramps(y, x) - 0.5);
                Complex64::from_polar(mag, phase)
            }),
            Phantom::Strip => {
                let lo = width / 4;
                let hi = width - width / 4;
                ComplexImage::from_fn(height, width, |_, j| {
                    Complex64::new(if (lo..hi).contains(&j) { 1.0 } else { 0.0 }, 0.0)
                })
            }
        }
    }
}

fn shapes(y: f64, x: f64) -> f64 {
    let mut v = 0.1;
    if (0.15..0.45).contains(&y) && (0.1..0.55).contains(&x) {
        v = 0.6;
    }
    if (y - 0.62).powi(2) + (x - 0.62).powi(2) < 0.22f64.powi(2) {
        v = 1.0;
    }
    if (y - 0.7).powi(2) + (x - 0.25).powi(2) < 0.1f64.powi(2) {
        v = 0.35;
    }
    if (0.55..0.68).contains(&y) && (0.55..0.7).contains(&x) {
        v = 0.8;
    }
    v
}

fn ramps(y: f64, x: f64) -> f64 {
    if x < 0.5 {
        0.1 + 0.8 * y
    } else if y < 0.5 {
        0.9 - 0.6 * (x - 0.5)
    } else {
        0.3 + 0.5 * (x - 0.5) + 0.4 * (y - 0.5)
    }
}

fn texture_tile(i: usize, j: usize) -> f64 {
    let stripes = if j % 4 < 2 { 0.8 } else { 0.2 };
    let check = if (i / 2 + j / 2).is_multiple_of(2) {
        0.15
    } else {
        0.0
    };
    if i < 4 {
        stripes + check
    } else if (i + j).is_multiple_of(3) {
        0.9
    } else {
        0.3 + check
    }
}

impl fmt::Display for Phantom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Phantom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Phantom::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::config(
                    "input.phantom",
                    format!(
                        "unknown phantom `{s}`; expected one of {}",
                        Phantom::ALL.map(|p| p.name()).join(", ")
                    ),
                )
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        for p in Phantom::ALL {
            let a = p.generate(24, 20);
            assert_eq!(a.shape(), (24, 20));
            assert_eq!(a, p.generate(24, 20));
            assert_eq!(a.is_real(), p.is_real(), "{p}");
        }
    }

    #[test]
    fn texture_repeats_every_eight_pixels() {
        let t = Phantom::Texture.generate(32, 32);
        for i in 0..24 {
            for j in 0..24 {
                assert_eq!(t.get(i, j), t.get(i + 8, j + 8));
            }
        }
    }

    #[test]
    fn strip_has_two_levels() {
        let s = Phantom::Strip.generate(16, 16);
        assert!(s.data().iter().all(|c| c.re == 0.0 || c.re == 1.0));
        assert_eq!(s.get(3, 4).re, 1.0);
        assert_eq!(s.get(3, 3).re, 0.0);
    }

    #[test]
    fn names_round_trip() {
        for p in Phantom::ALL {
            assert_eq!(p.name().parse::<Phantom>().unwrap(), p);
        }
        assert!("lena".parse::<Phantom>().is_err());
    }
}
