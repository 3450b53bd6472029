//! Unitary 2-D discrete Fourier transform.
//!
//! Both directions are scaled by `1/sqrt(n1·n2)`, so the forward transform is
//! unitary and its inverse is its adjoint.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::image::ComplexImage;
use crate::par;

#[derive(Clone)]
pub struct Dft2 {
    height: usize,
    width: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl fmt::Debug for Dft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft2")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl Dft2 {
    pub fn new(height: usize, width: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            height,
            width,
            row_fwd: planner.plan_fft_forward(width),
            row_inv: planner.plan_fft_inverse(width),
            col_fwd: planner.plan_fft_forward(height),
            col_inv: planner.plan_fft_inverse(height),
            scale: 1.0 / ((height * width) as f64).sqrt(),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// In-place forward transform of a row-major `height × width` buffer.
    pub fn forward_inplace(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_fwd, &self.col_fwd);
    }

    pub fn inverse_inplace(&self, buf: &mut [Complex64]) {
        self.apply(buf, &self.row_inv, &self.col_inv);
    }

    fn apply(&self, buf: &mut [Complex64], rows: &Arc<dyn Fft<f64>>, cols: &Arc<dyn Fft<f64>>) {
        let (h, w) = (self.height, self.width);
        assert_eq!(buf.len(), h * w, "buffer does not match transform shape");
        if w > 1 {
            transform_rows(buf, w, rows);
        }
        if h > 1 {
            let mut t = transpose(buf, h, w);
            transform_rows(&mut t, h, cols);
            transpose_into(&t, w, h, buf);
        }
        let s = self.scale;
        for c in buf.iter_mut() {
            *c *= s;
        }
    }

    pub fn forward(&self, img: &ComplexImage) -> ComplexImage {
        let mut out = img.clone();
        self.forward_inplace(out.data_mut());
        out
    }

    pub fn inverse(&self, img: &ComplexImage) -> ComplexImage {
        let mut out = img.clone();
        self.inverse_inplace(out.data_mut());
        out
    }
}

fn transform_rows(buf: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    // Small transforms are cheaper batched on one thread.
    if buf.len() < 4096 {
        fft.process(buf);
    } else {
        par::for_each_chunk(buf, len, |_, row| fft.process(row));
    }
}

fn transpose(src: &[Complex64], h: usize, w: usize) -> Vec<Complex64> {
    let mut dst = vec![Complex64::new(0.0, 0.0); h * w];
    transpose_into(src, h, w, &mut dst);
    dst
}

/// `src` is `h × w`; `dst` becomes `w × h`.
fn transpose_into(src: &[Complex64], h: usize, w: usize, dst: &mut [Complex64]) {
    for i in 0..h {
        for j in 0..w {
            dst[j * h + i] = src[i * w + j];
        }
    }
}

/// Unitary forward DFT of an image.
pub fn dft2_unitary(img: &ComplexImage) -> ComplexImage {
    Dft2::new(img.height(), img.width()).forward(img)
}

/// Unitary inverse DFT of an image.
pub fn idft2_unitary(img: &ComplexImage) -> ComplexImage {
    Dft2::new(img.height(), img.width()).inverse(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Direct O(n²) evaluation of the unitary DFT definition.
    fn naive_dft(img: &ComplexImage) -> ComplexImage {
        let (h, w) = img.shape();
        let s = 1.0 / ((h * w) as f64).sqrt();
        ComplexImage::from_fn(h, w, |k, l| {
            let mut acc = c(0.0, 0.0);
            for i in 0..h {
                for j in 0..w {
                    let ph = -2.0
                        * std::f64::consts::PI
                        * ((k * i) as f64 / h as f64 + (l * j) as f64 / w as f64);
                    acc += img.get(i, j) * Complex64::from_polar(1.0, ph);
                }
            }
            acc * s
        })
    }

    #[test]
    fn delta_maps_to_constant() {
        let mut d = ComplexImage::zeros(4, 4);
        d.set(0, 0, c(1.0, 0.0));
        let f = dft2_unitary(&d);
        for v in f.data() {
            assert!((v - c(0.25, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_maps_to_scaled_delta() {
        let one = ComplexImage::filled(4, 4, c(1.0, 0.0));
        let f = dft2_unitary(&one);
        assert!((f.get(0, 0) - c(4.0, 0.0)).norm() < 1e-14);
        for (k, v) in f.data().iter().enumerate().skip(1) {
            assert!(v.norm() < 1e-14, "entry {k} = {v}");
        }
    }

    #[test]
    fn unitary_and_invertible() {
        let x = ComplexImage::random(8, 8, 11);
        let f = dft2_unitary(&x);
        assert!((f.norm() - x.norm()).abs() < 1e-12 * x.norm());
        let back = idft2_unitary(&f);
        assert!(back.distance(&x) < 1e-12 * x.norm());
    }

    #[test]
    fn matches_definition_on_rectangular_grid() {
        let x = ComplexImage::random(6, 10, 3);
        let fast = dft2_unitary(&x);
        let slow = naive_dft(&x);
        assert!(fast.distance(&slow) < 1e-12 * x.norm());
    }

    #[test]
    fn large_images_use_parallel_rows_consistently() {
        let x = ComplexImage::random(128, 64, 5);
        let f = dft2_unitary(&x);
        assert!(idft2_unitary(&f).distance(&x) < 1e-12 * x.norm());
    }
}
