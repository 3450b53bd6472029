//! Block-matching collaborative hard-thresholding filter (first BM3D stage).
//!
//! For each reference block on a strided raster, the most similar blocks in a
//! search window are stacked into a group, transformed by a separable 3-D
//! transform (orthonormal 2-D DCT per block, orthonormal Haar across the
//! group), hard-thresholded at `threshold_mult·σ` (the 3-D DC coefficient is
//! kept), inverted, and aggregated with weight `1/(1 + #retained)`.
//!
//! Complex images share one grouping computed from complex distances; the
//! transforms act on the complex values directly and thresholding uses the
//! coefficient modulus.

use num_complex::Complex64;

use crate::image::ComplexImage;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bm3dParams {
    pub block: usize,
    pub step: usize,
    pub group: usize,
    pub search: usize,
    pub threshold_mult: f64,
}

impl Default for Bm3dParams {
    fn default() -> Self {
        Self {
            block: 8,
            step: 3,
            group: 16,
            search: 12,
            threshold_mult: 2.7,
        }
    }
}

/// Orthonormal DCT-II matrix, `m[k][n] = α_k cos(π(2n+1)k / 2B)`.
fn dct_matrix(b: usize) -> Vec<f64> {
    let mut m = vec![0.0; b * b];
    for k in 0..b {
        let a = if k == 0 {
            (1.0 / b as f64).sqrt()
        } else {
            (2.0 / b as f64).sqrt()
        };
        for n in 0..b {
            m[k * b + n] =
                a * (std::f64::consts::PI * (2 * n + 1) as f64 * k as f64 / (2 * b) as f64).cos();
        }
    }
    m
}

/// `out = M · blk · Mᵀ` (forward) or `Mᵀ · blk · M` (inverse).
fn dct2(blk: &mut [Complex64], m: &[f64], b: usize, inverse: bool) {
    let at = |k: usize, n: usize| if inverse { m[n * b + k] } else { m[k * b + n] };
    let mut tmp = vec![Complex64::new(0.0, 0.0); b * b];
    // rows
    for i in 0..b {
        for k in 0..b {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..b {
                acc += blk[i * b + n] * at(k, n);
            }
            tmp[i * b + k] = acc;
        }
    }
    // columns
    for j in 0..b {
        for k in 0..b {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..b {
                acc += tmp[n * b + j] * at(k, n);
            }
            blk[k * b + j] = acc;
        }
    }
}

/// In-place orthonormal Haar transform of `len` (a power of two) vectors of
/// size `stride` laid out consecutively.
fn haar(data: &mut [Complex64], len: usize, stride: usize, inverse: bool) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut tmp = data.to_vec();
    if !inverse {
        let mut n = len;
        while n > 1 {
            let half = n / 2;
            for i in 0..half {
                for c in 0..stride {
                    let a = data[(2 * i) * stride + c];
                    let b = data[(2 * i + 1) * stride + c];
                    tmp[i * stride + c] = (a + b) * s;
                    tmp[(half + i) * stride + c] = (a - b) * s;
                }
            }
            data[..n * stride].copy_from_slice(&tmp[..n * stride]);
            n = half;
        }
    } else {
        let mut n = 2;
        while n <= len {
            let half = n / 2;
            for i in 0..half {
                for c in 0..stride {
                    let a = data[i * stride + c];
                    let d = data[(half + i) * stride + c];
                    tmp[(2 * i) * stride + c] = (a + d) * s;
                    tmp[(2 * i + 1) * stride + c] = (a - d) * s;
                }
            }
            data[..n * stride].copy_from_slice(&tmp[..n * stride]);
            n *= 2;
        }
    }
}

/// Raster offsets `0, step, 2·step, …` plus the last valid offset.
fn offsets(extent: usize, block: usize, step: usize) -> Vec<usize> {
    let last = extent - block;
    let mut v: Vec<usize> = (0..=last).step_by(step).collect();
    if *v.last().unwrap() != last {
        v.push(last);
    }
    v
}

fn block_distance(v: &ComplexImage, a: (usize, usize), b: (usize, usize), bs: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..bs {
        for j in 0..bs {
            acc += (v.get(a.0 + i, a.1 + j) - v.get(b.0 + i, b.1 + j)).norm_sqr();
        }
    }
    acc
}

/// Similar blocks for a reference: the reference first, then ascending
/// distance with ties broken by raster position.
pub fn match_blocks(
    v: &ComplexImage,
    reference: (usize, usize),
    p: &Bm3dParams,
) -> Vec<(usize, usize)> {
    let (h, w) = v.shape();
    let bs = p.block;
    let lo = |c: usize| c.saturating_sub(p.search);
    let y_hi = (reference.0 + p.search).min(h - bs);
    let x_hi = (reference.1 + p.search).min(w - bs);
    let mut cands: Vec<(f64, usize, (usize, usize))> = Vec::new();
    for y in lo(reference.0)..=y_hi {
        for x in lo(reference.1)..=x_hi {
            if (y, x) == reference {
                continue;
            }
            cands.push((block_distance(v, reference, (y, x), bs), y * w + x, (y, x)));
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out = vec![reference];
    out.extend(cands.into_iter().map(|c| c.2));
    let keep = prev_power_of_two(out.len().min(p.group.max(1)));
    out.truncate(keep);
    out
}

fn prev_power_of_two(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        1 << (usize::BITS - 1 - n.leading_zeros())
    }
}

struct GroupEstimate {
    positions: Vec<(usize, usize)>,
    blocks: Vec<Complex64>,
    weight: f64,
}

pub fn bm3d_lite_denoise(v0: &ComplexImage, sigma: f64, p: &Bm3dParams) -> ComplexImage {
    let (h, w) = v0.shape();
    let bs = p.block;
    let bb = bs * bs;
    let m = dct_matrix(bs);
    let thr = p.threshold_mult * sigma;

    let refs: Vec<(usize, usize)> = offsets(h, bs, p.step)
        .into_iter()
        .flat_map(|y| offsets(w, bs, p.step).into_iter().map(move |x| (y, x)))
        .collect();

    let estimates: Vec<GroupEstimate> = par::map_range(refs.len(), |r| {
        let positions = match_blocks(v0, refs[r], p);
        let n = positions.len();
        let mut stack = vec![Complex64::new(0.0, 0.0); n * bb];
        for (g, &(y, x)) in positions.iter().enumerate() {
            let blk = &mut stack[g * bb..(g + 1) * bb];
            for i in 0..bs {
                for j in 0..bs {
                    blk[i * bs + j] = v0.get(y + i, x + j);
                }
            }
            dct2(blk, &m, bs, false);
        }
        haar(&mut stack, n, bb, false);
        let mut retained = 0usize;
        for (k, c) in stack.iter_mut().enumerate() {
            if k != 0 && c.norm() < thr {
                *c = Complex64::new(0.0, 0.0);
            } else if *c != Complex64::new(0.0, 0.0) || k == 0 {
                retained += 1;
            }
        }
        haar(&mut stack, n, bb, true);
        for g in 0..n {
            dct2(&mut stack[g * bb..(g + 1) * bb], &m, bs, true);
        }
        GroupEstimate {
            positions,
            blocks: stack,
            weight: 1.0 / (1.0 + retained as f64),
        }
    });

    let mut num = vec![Complex64::new(0.0, 0.0); h * w];
    let mut den = vec![0.0; h * w];
    for est in &estimates {
        for (g, &(y, x)) in est.positions.iter().enumerate() {
            let blk = &est.blocks[g * bb..(g + 1) * bb];
            for i in 0..bs {
                for j in 0..bs {
                    let k = (y + i) * w + x + j;
                    num[k] += blk[i * bs + j] * est.weight;
                    den[k] += est.weight;
                }
            }
        }
    }
    let data = num
        .iter()
        .zip(&den)
        .zip(v0.data())
        .map(|((n, &d), &orig)| if d > 0.0 { n / d } else { orig })
        .collect();
    ComplexImage::from_vec(h, w, data).expect("aggregation preserves shape")
}
