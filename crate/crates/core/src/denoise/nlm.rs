//! Nonlocal means on complex images.
//!
//! `NLM(v)(x) = Σ_y w(x,y) v(y)` over a square search window clipped to the
//! image, with `w(x,y) ∝ exp(−d²(x,y)/h²)` and `d²` the mean squared complex
//! modulus difference of the patches around `x` and `y` (edge-replicated).

use num_complex::Complex64;

use crate::image::ComplexImage;
use crate::par;

/// Bandwidth below which the filter is the identity.
pub const MIN_BANDWIDTH: f64 = 1e-12;

/// Bandwidth `h = 0.55·σ·(2·patch_radius + 1)`.
pub fn bandwidth(sigma: f64, patch_radius: usize) -> f64 {
    0.55 * sigma * (2 * patch_radius + 1) as f64
}

#[inline]
fn clamp(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Mean squared difference between the patches centred at `a` and `b`.
pub fn patch_distance(
    v: &ComplexImage,
    a: (usize, usize),
    b: (usize, usize),
    patch_radius: usize,
) -> f64 {
    let (h, w) = v.shape();
    let r = patch_radius as isize;
    let mut acc = 0.0;
    for di in -r..=r {
        for dj in -r..=r {
            let pa = v.get(clamp(a.0 as isize + di, h), clamp(a.1 as isize + dj, w));
            let pb = v.get(clamp(b.0 as isize + di, h), clamp(b.1 as isize + dj, w));
            acc += (pa - pb).norm_sqr();
        }
    }
    acc / ((2 * patch_radius + 1) * (2 * patch_radius + 1)) as f64
}

pub fn nlm_denoise(
    v0: &ComplexImage,
    h: f64,
    patch_radius: usize,
    search_radius: usize,
) -> ComplexImage {
    if h < MIN_BANDWIDTH {
        return v0.clone();
    }
    let (ht, wd) = v0.shape();
    let inv_h2 = 1.0 / (h * h);
    let s = search_radius as isize;
    let mut out = v0.clone();
    par::for_each_indexed(out.data_mut(), |k, px| {
        let (i, j) = (k / wd, k % wd);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut total = 0.0;
        for y in (i as isize - s).max(0)..=(i as isize + s).min(ht as isize - 1) {
            for x in (j as isize - s).max(0)..=(j as isize + s).min(wd as isize - 1) {
                let (y, x) = (y as usize, x as usize);
                let d2 = patch_distance(v0, (i, j), (y, x), patch_radius);
                let wgt = (-d2 * inv_h2).exp();
                acc += v0.get(y, x) * wgt;
                total += wgt;
            }
        }
        *px = acc / total;
    });
    out
}
