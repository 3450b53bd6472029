//! Independent reference implementations shared by the integration tests and
//! the acceptance suite. Everything here is written from the defining
//! formulas with plain loops and no calls into the crate's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use phasepnp::image::ComplexImage;

/// Unitary 2-D DFT by direct summation.
pub fn dense_dft(img: &ComplexImage) -> Vec<Complex64> {
    let (h, w) = img.shape();
    let scale = 1.0 / ((h * w) as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for k in 0..h {
        for l in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..h {
                for j in 0..w {
                    let phase = -2.0 * PI * ((k * i) as f64 / h as f64 + (l * j) as f64 / w as f64);
                    acc += img.get(i, j) * Complex64::from_polar(1.0, phase);
                }
            }
            out[k * w + l] = acc * scale;
        }
    }
    out
}

/// Bisection on a strictly increasing function over `[lo, hi]`.
fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Global minimizer over `[0, hi]` by grid search, golden-section refinement,
/// then bisection on the derivative inside the refined bracket.
pub fn brute_min(phi: impl Fn(f64) -> f64, dphi: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 4000;
    let step = (hi - lo) / n as f64;
    let mut best = lo;
    let mut best_val = phi(lo);
    for k in 1..=n {
        let x = lo + k as f64 * step;
        let v = phi(x);
        if v < best_val {
            best = x;
            best_val = v;
        }
    }
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if phi(c) < phi(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    let (a, b) = ((x - 1e-6).max(lo), (x + 1e-6).min(hi));
    if dphi(a) < 0.0 && dphi(b) > 0.0 {
        bisect_increasing(dphi, a, b)
    } else {
        x
    }
}

/// Poisson modulus reference: minimizes `½x² − f ln x + (η/2)(x − a)²`.
/// The derivative is increasing on `x > 0`, so bisection alone is exact.
pub fn poisson_reference(a: f64, f: f64, eta: f64) -> f64 {
    let d = |x: f64| x - f / x + eta * (x - a);
    if f == 0.0 {
        return (eta * a / (1.0 + eta)).max(0.0);
    }
    let hi = a.abs() + f.sqrt() + 1.0;
    bisect_increasing(d, 1e-300, hi)
}

/// Gaussian modulus reference: minimizes `½(x² − f)² + (η/2)(x − a)²` over
/// `x ≥ 0`.
pub fn gaussian_reference(a: f64, f: f64, eta: f64) -> f64 {
    let phi = |x: f64| 0.5 * (x * x - f).powi(2) + 0.5 * eta * (x - a).powi(2);
    let dphi = |x: f64| 2.0 * x * (x * x - f) + eta * (x - a);
    let hi = a.abs() + f.abs().sqrt() + 1.0;
    brute_min(phi, dphi, 0.0, hi)
}

pub fn gaussian_objective(x: f64, a: f64, f: f64, eta: f64) -> f64 {
    0.5 * (x * x - f).powi(2) + 0.5 * eta * (x - a).powi(2)
}

type Field = (Vec<Complex64>, Vec<Complex64>);

fn grad(v: &[Complex64], h: usize, w: usize) -> Field {
    let mut gx = vec![Complex64::new(0.0, 0.0); h * w];
    let mut gy = gx.clone();
    for i in 0..h {
        for j in 0..w {
            gx[i * w + j] = v[i * w + (j + 1) % w] - v[i * w + j];
            gy[i * w + j] = v[((i + 1) % h) * w + j] - v[i * w + j];
        }
    }
    (gx, gy)
}

fn grad_adj(p: &Field, h: usize, w: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            out[k] =
                p.0[i * w + (j + w - 1) % w] - p.0[k] + p.1[((i + h - 1) % h) * w + j] - p.1[k];
        }
    }
    out
}

/// `σ·Σ|∇v| + ½‖v − v0‖²` with periodic forward differences.
pub fn tv_energy(v: &ComplexImage, v0: &ComplexImage, sigma: f64) -> f64 {
    let (h, w) = v.shape();
    let (gx, gy) = grad(v.data(), h, w);
    let tv: f64 = gx
        .iter()
        .zip(&gy)
        .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
        .sum();
    let fit: f64 = v
        .data()
        .iter()
        .zip(v0.data())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    sigma * tv + 0.5 * fit
}

/// TV denoising by accelerated projected gradient on the dual,
/// `min_{|p|≤1} ½‖v0 − σ∇ᵀp‖²`, with `v = v0 − σ∇ᵀp`.
pub fn tv_reference(v0: &ComplexImage, sigma: f64, iters: usize) -> ComplexImage {
    let (h, w) = v0.shape();
    let n = h * w;
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let mut p: Field = (zero.clone(), zero.clone());
    let mut q = p.clone();
    let mut t = 1.0f64;
    let tau = 1.0 / (8.0 * sigma * sigma);
    let primal = |p: &Field| -> Vec<Complex64> {
        let a = grad_adj(p, h, w);
        v0.data()
            .iter()
            .zip(&a)
            .map(|(v, a)| v - a * sigma)
            .collect()
    };
    for _ in 0..iters {
        let v = primal(&q);
        let (gx, gy) = grad(&v, h, w);
        let mut next: Field = (zero.clone(), zero.clone());
        for k in 0..n {
            let px = q.0[k] + gx[k] * (tau * sigma);
            let py = q.1[k] + gy[k] * (tau * sigma);
            let m = (px.norm_sqr() + py.norm_sqr()).sqrt().max(1.0);
            next.0[k] = px / m;
            next.1[k] = py / m;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        for k in 0..n {
            q.0[k] = next.0[k] + (next.0[k] - p.0[k]) * beta;
            q.1[k] = next.1[k] + (next.1[k] - p.1[k]) * beta;
        }
        p = next;
        t = t_next;
    }
    ComplexImage::from_vec(h, w, primal(&p)).unwrap()
}

/// Nonlocal means written straight from the weight formula.
pub fn nlm_reference(v0: &ComplexImage, h: f64, patch: usize, search: usize) -> ComplexImage {
    let (ht, wd) = v0.shape();
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, ht as isize - 1) as usize;
        let j = j.clamp(0, wd as isize - 1) as usize;
        v0.get(i, j)
    };
    let pr = patch as isize;
    let sr = search as isize;
    let area = ((2 * patch + 1) * (2 * patch + 1)) as f64;
    ComplexImage::from_fn(ht, wd, |i, j| {
        let (i, j) = (i as isize, j as isize);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for y in i - sr..=i + sr {
            for x in j - sr..=j + sr {
                if y < 0 || x < 0 || y >= ht as isize || x >= wd as isize {
                    continue;
                }
                let mut d2 = 0.0;
                for a in -pr..=pr {
                    for b in -pr..=pr {
                        d2 += (at(i + a, j + b) - at(y + a, x + b)).norm_sqr();
                    }
                }
                let wgt = (-(d2 / area) / (h * h)).exp();
                num += at(y, x) * wgt;
                den += wgt;
            }
        }
        num / den
    })
}

/// Which regimes a Gaussian triple exercises.
#[derive(Default, Debug, Clone, Copy)]
pub struct Coverage {
    pub disc_pos: usize,
    pub disc_neg: usize,
    pub f_below: usize,
    pub f_above: usize,
    pub f_match: usize,
}

impl Coverage {
    pub fn record(&mut self, a: f64, f: f64, eta: f64) {
        let p = 0.5 * eta - f;
        let half_q = 0.25 * eta * a;
        if p * p * p / 27.0 + half_q * half_q >= 0.0 {
            self.disc_pos += 1;
        } else {
            self.disc_neg += 1;
        }
        if f < 0.5 * eta {
            self.f_below += 1;
        } else {
            self.f_above += 1;
        }
        if f == a * a {
            self.f_match += 1;
        }
    }

    pub fn complete(&self) -> bool {
        self.disc_pos > 0
            && self.disc_neg > 0
            && self.f_below > 0
            && self.f_above > 0
            && self.f_match > 0
    }
}

/// Seeded `(a, f, η)` triples cycling through: `f < η/2`, `f > η/2` with a
/// small anchor (three real roots), `f = a²`, and unconstrained draws.
pub fn prox_triples(n: usize, seed: u64) -> Vec<(f64, f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let eta = 10f64.powf(rng.random_range(-2.0..2.0));
            let a: f64 = rng.random_range(0.0..5.0);
            let f = match k % 4 {
                0 => rng.random_range(0.0..0.5) * eta,
                1 => {
                    let a_small = rng.random_range(0.0..0.1) * eta.sqrt();
                    return (a_small, 0.5 * eta + rng.random_range(0.5..10.0), eta);
                }
                2 => a * a,
                _ => rng.random_range(0.0..25.0),
            };
            (a, f, eta)
        })
        .collect()
}

/// Worst deviation of the closed forms from the references over `triples`,
/// as `|x − x_ref| / max(1, x_ref)`.
pub fn prox_worst(triples: &[(f64, f64, f64)], poisson: bool) -> f64 {
    use phasepnp::prox::{gaussian_modulus, poisson_modulus};
    triples
        .iter()
        .map(|&(a, f, eta)| {
            let (x, r) = if poisson {
                (poisson_modulus(a, f, eta), poisson_reference(a, f, eta))
            } else {
                (gaussian_modulus(a, f, eta), gaussian_reference(a, f, eta))
            };
            (x - r).abs() / r.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}
