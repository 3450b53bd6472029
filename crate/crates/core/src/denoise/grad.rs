//! Forward differences, their adjoints, and the periodic `(I − γΔ)` solve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fft::Dft2;
use crate::image::ComplexImage;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Differences wrap around the image edges.
    #[default]
    Periodic,
    /// Differences across the last row/column are dropped (zero).
    Neumann,
}

/// A pair of complex images `(p_x, p_y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    pub x: ComplexImage,
    pub y: ComplexImage,
}

impl GradientField {
    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            x: ComplexImage::zeros(height, width),
            y: ComplexImage::zeros(height, width),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x.norm_sqr() + self.y.norm_sqr()
    }

    /// `Σ_j sqrt(|p_x(j)|² + |p_y(j)|²)`.
    pub fn isotropic_l1(&self) -> f64 {
        self.x
            .data()
            .iter()
            .zip(self.y.data())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .sum()
    }

    pub fn zip_map(
        &self,
        o: &GradientField,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Copy,
    ) -> Self {
        Self {
            x: self.x.zip_map(&o.x, f),
            y: self.y.zip_map(&o.y, f),
        }
    }
}

/// `D_x v`: difference along columns (`v[i, j+1] − v[i, j]`).
pub fn diff_x(v: &ComplexImage, bc: Boundary) -> ComplexImage {
    let (h, w) = v.shape();
    ComplexImage::from_fn(h, w, |i, j| {
        if j + 1 < w {
            v.get(i, j + 1) - v.get(i, j)
        } else {
            match bc {
                Boundary::Periodic => v.get(i, 0) - v.get(i, j),
                Boundary::Neumann => Complex64::new(0.0, 0.0),
            }
        }
    })
}

/// `D_y v`: difference along rows (`v[i+1, j] − v[i, j]`).
pub fn diff_y(v: &ComplexImage, bc: Boundary) -> ComplexImage {
    let (h, w) = v.shape();
    ComplexImage::from_fn(h, w, |i, j| {
        if i + 1 < h {
            v.get(i + 1, j) - v.get(i, j)
        } else {
            match bc {
                Boundary::Periodic => v.get(0, j) - v.get(i, j),
                Boundary::Neumann => Complex64::new(0.0, 0.0),
            }
        }
    })
}

/// Adjoint of [`diff_x`].
pub fn diff_x_adj(p: &ComplexImage, bc: Boundary) -> ComplexImage {
    let (h, w) = p.shape();
    ComplexImage::from_fn(h, w, |i, j| match bc {
        Boundary::Periodic => p.get(i, (j + w - 1) % w) - p.get(i, j),
        Boundary::Neumann => {
            let prev = if j >= 1 {
                p.get(i, j - 1)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let cur = if j + 1 < w {
                p.get(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            };
            prev - cur
        }
    })
}

/// Adjoint of [`diff_y`].
pub fn diff_y_adj(p: &ComplexImage, bc: Boundary) -> ComplexImage {
    let (h, w) = p.shape();
    ComplexImage::from_fn(h, w, |i, j| match bc {
        Boundary::Periodic => p.get((i + h - 1) % h, j) - p.get(i, j),
        Boundary::Neumann => {
            let prev = if i >= 1 {
                p.get(i - 1, j)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let cur = if i + 1 < h {
                p.get(i, j)
            } else {
                Complex64::new(0.0, 0.0)
            };
            prev - cur
        }
    })
}

pub fn gradient(v: &ComplexImage, bc: Boundary) -> GradientField {
    GradientField {
        x: diff_x(v, bc),
        y: diff_y(v, bc),
    }
}

/// `div p = −∇ᵀp`, so `⟨∇v, p⟩ = −⟨v, div p⟩`.
pub fn divergence(p: &GradientField, bc: Boundary) -> ComplexImage {
    let ax = diff_x_adj(&p.x, bc);
    let ay = diff_y_adj(&p.y, bc);
    ax.zip_map(&ay, |a, b| -(a + b))
}

/// Solver for `(I − γΔ)v = rhs` with periodic boundaries, diagonalized by the DFT.
#[derive(Clone, Debug)]
pub struct ScreenedPoisson {
    dft: Dft2,
    denom: Vec<f64>,
}

impl ScreenedPoisson {
    pub fn new(height: usize, width: usize, gamma: f64) -> Self {
        let mut denom = Vec::with_capacity(height * width);
        for k in 0..height {
            let sy = (std::f64::consts::PI * k as f64 / height as f64).sin();
            for l in 0..width {
                let sx = (std::f64::consts::PI * l as f64 / width as f64).sin();
                denom.push(1.0 + gamma * 4.0 * (sx * sx + sy * sy));
            }
        }
        Self {
            dft: Dft2::new(height, width),
            denom,
        }
    }

    pub fn solve(&self, rhs: &ComplexImage) -> ComplexImage {
        let mut buf = rhs.clone();
        self.dft.forward_inplace(buf.data_mut());
        for (b, d) in buf.data_mut().iter_mut().zip(&self.denom) {
            *b /= d;
        }
        self.dft.inverse_inplace(buf.data_mut());
        buf
    }
}
