//! Second-order TGV denoising
//!
//! `min_v σ·TGV²(v) + ½‖v − v0‖²` with
//! `TGV²(v) = min_w ‖∇v − w‖₁ + ratio·‖E w‖₁`, solved by a first-order
//! primal-dual iteration on `(v, w)` with duals `(p, q)`.

use super::grad::{diff_x, diff_x_adj, diff_y, diff_y_adj, Boundary, GradientField};
use crate::image::ComplexImage;

/// Squared operator-norm bound of `(v, w) ↦ (∇v − w, E w)`.
const OP_NORM_SQR: f64 = 12.0;

type Sym = [ComplexImage; 3];

/// Which difference components exist at each pixel.
fn masks(h: usize, w: usize, bc: Boundary) -> (Vec<f64>, Vec<f64>) {
    let mut mx = vec![1.0; h * w];
    let mut my = vec![1.0; h * w];
    if bc == Boundary::Neumann {
        for i in 0..h {
            for j in 0..w {
                if j + 1 == w {
                    mx[i * w + j] = 0.0;
                }
                if i + 1 == h {
                    my[i * w + j] = 0.0;
                }
            }
        }
    }
    (mx, my)
}

fn apply_mask(img: &mut ComplexImage, m: &[f64]) {
    for (c, &k) in img.data_mut().iter_mut().zip(m) {
        *c *= k;
    }
}

fn sym_grad(wf: &GradientField, bc: Boundary) -> Sym {
    let xx = diff_x(&wf.x, bc);
    let yy = diff_y(&wf.y, bc);
    let a = diff_y(&wf.x, bc);
    let b = diff_x(&wf.y, bc);
    let xy = a.zip_map(&b, |a, b| (a + b) * 0.5);
    [xx, yy, xy]
}

/// Adjoint of [`sym_grad`] under `⟨E w, q⟩ = Σ q0·xx + q1·yy + 2·q2·xy`.
fn sym_grad_adj(q: &Sym, bc: Boundary) -> GradientField {
    let x = diff_x_adj(&q[0], bc).zip_map(&diff_y_adj(&q[2], bc), |a, b| a + b);
    let y = diff_y_adj(&q[1], bc).zip_map(&diff_x_adj(&q[2], bc), |a, b| a + b);
    GradientField { x, y }
}

/// Initial `w`: the gradient, with dropped boundary components filled from
/// the neighbouring valid entry.
fn initial_w(v: &ComplexImage, bc: Boundary) -> GradientField {
    let (h, w) = v.shape();
    let mut gx = diff_x(v, bc);
    let mut gy = diff_y(v, bc);
    if bc == Boundary::Neumann {
        for i in 0..h {
            if w >= 2 {
                let prev = gx.get(i, w - 2);
                gx.set(i, w - 1, prev);
            }
        }
        for j in 0..w {
            if h >= 2 {
                let prev = gy.get(h - 2, j);
                gy.set(h - 1, j, prev);
            }
        }
    }
    GradientField { x: gx, y: gy }
}

/// Runs `iters` primal-dual steps. `ratio` is the second-order weight relative
/// to the first-order one; `gamma` balances primal and dual step sizes.
pub fn tgv2_denoise(
    v0: &ComplexImage,
    sigma: f64,
    ratio: f64,
    gamma: f64,
    iters: usize,
    bc: Boundary,
) -> ComplexImage {
    if sigma == 0.0 {
        return v0.clone();
    }
    let (h, wd) = v0.shape();
    let alpha1 = sigma;
    let alpha0 = sigma * ratio;
    let l = OP_NORM_SQR.sqrt();
    let tau = 1.0 / (l * gamma);
    let s = gamma / l;
    let (mx, my) = masks(h, wd, bc);

    let mut v = v0.clone();
    let mut w = initial_w(v0, bc);
    let mut v_bar = v.clone();
    let mut w_bar = w.clone();
    let mut p = GradientField::zeros(h, wd);
    let mut q: Sym = [
        ComplexImage::zeros(h, wd),
        ComplexImage::zeros(h, wd),
        ComplexImage::zeros(h, wd),
    ];

    for _ in 0..iters {
        // dual ascent on p
        let mut rx = diff_x(&v_bar, bc).zip_map(&w_bar.x, |a, b| a - b);
        let mut ry = diff_y(&v_bar, bc).zip_map(&w_bar.y, |a, b| a - b);
        apply_mask(&mut rx, &mx);
        apply_mask(&mut ry, &my);
        for (k, (px, py)) in
            p.x.data_mut()
                .iter_mut()
                .zip(p.y.data_mut().iter_mut())
                .enumerate()
        {
            *px += rx.data()[k] * s;
            *py += ry.data()[k] * s;
            let n = (px.norm_sqr() + py.norm_sqr()).sqrt();
            if n > alpha1 {
                let f = alpha1 / n;
                *px *= f;
                *py *= f;
            }
        }

        // dual ascent on q
        let e = sym_grad(&w_bar, bc);
        for k in 0..h * wd {
            let a = q[0].data()[k] + e[0].data()[k] * s;
            let b = q[1].data()[k] + e[1].data()[k] * s;
            let c = q[2].data()[k] + e[2].data()[k] * s;
            let n = (a.norm_sqr() + b.norm_sqr() + 2.0 * c.norm_sqr()).sqrt();
            let f = if n > alpha0 { alpha0 / n } else { 1.0 };
            q[0].data_mut()[k] = a * f;
            q[1].data_mut()[k] = b * f;
            q[2].data_mut()[k] = c * f;
        }

        // primal descent
        let mut mpx = p.x.clone();
        let mut mpy = p.y.clone();
        apply_mask(&mut mpx, &mx);
        apply_mask(&mut mpy, &my);
        let kt_v = diff_x_adj(&mpx, bc).zip_map(&diff_y_adj(&mpy, bc), |a, b| a + b);
        let v_new = ComplexImage::from_fn(h, wd, |i, j| {
            let k = i * wd + j;
            (v.data()[k] - kt_v.data()[k] * tau + v0.data()[k] * tau) / (1.0 + tau)
        });
        let et = sym_grad_adj(&q, bc);
        let w_new = GradientField {
            x: ComplexImage::from_fn(h, wd, |i, j| {
                let k = i * wd + j;
                w.x.data()[k] - (et.x.data()[k] - mpx.data()[k]) * tau
            }),
            y: ComplexImage::from_fn(h, wd, |i, j| {
                let k = i * wd + j;
                w.y.data()[k] - (et.y.data()[k] - mpy.data()[k]) * tau
            }),
        };

        v_bar = v_new.zip_map(&v, |a, b| a * 2.0 - b);
        w_bar = w_new.zip_map(&w, |a, b| a * 2.0 - b);
        v = v_new;
        w = w_new;
    }
    v
}

/// Mean squared second difference, a measure of slope variation.
pub fn slope_variation(v: &ComplexImage) -> f64 {
    let bc = Boundary::Periodic;
    let gx = diff_x(v, bc);
    let gy = diff_y(v, bc);
    let terms = [diff_x(&gx, bc), diff_y(&gy, bc), diff_y(&gx, bc)];
    terms.iter().map(|t| t.norm_sqr()).sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn zero_strength_is_identity() {
        let v0 = ComplexImage::random(8, 8, 1);
        assert_eq!(tgv2_denoise(&v0, 0.0, 2.0, 1.0, 10, Boundary::Periodic), v0);
    }

    #[test]
    fn constant_is_fixed_point() {
        let v0 = ComplexImage::filled(12, 9, Complex64::new(0.7, 0.1));
        for bc in [Boundary::Periodic, Boundary::Neumann] {
            let v = tgv2_denoise(&v0, 0.5, 2.0, 1.0, 100, bc);
            assert!(v.distance(&v0) < 1e-8);
        }
    }

    #[test]
    fn affine_ramp_is_fixed_point_without_wrap() {
        let v0 = ComplexImage::from_fn(16, 16, |i, j| {
            Complex64::new(0.2 + 0.03 * i as f64 - 0.02 * j as f64, 0.01 * j as f64)
        });
        let v = tgv2_denoise(&v0, 0.5, 2.0, 1.0, 200, Boundary::Neumann);
        assert!(v.distance(&v0) < 1e-8, "{}", v.distance(&v0));
    }

    #[test]
    fn symmetric_gradient_adjoint() {
        for bc in [Boundary::Periodic, Boundary::Neumann] {
            let w = GradientField {
                x: ComplexImage::random(5, 6, 1),
                y: ComplexImage::random(5, 6, 2),
            };
            let q = [
                ComplexImage::random(5, 6, 3),
                ComplexImage::random(5, 6, 4),
                ComplexImage::random(5, 6, 5),
            ];
            let e = sym_grad(&w, bc);
            let lhs = (e[0].inner(&q[0]) + e[1].inner(&q[1]) + e[2].inner(&q[2]) * 2.0).re;
            let et = sym_grad_adj(&q, bc);
            let rhs = (w.x.inner(&et.x) + w.y.inner(&et.y)).re;
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_equivariant() {
        let x = ComplexImage::random(12, 12, 6);
        let e = Complex64::from_polar(1.0, -1.1);
        let a = tgv2_denoise(&x.scale(e), 0.2, 2.0, 1.0, 40, Boundary::Periodic);
        let b = tgv2_denoise(&x, 0.2, 2.0, 1.0, 40, Boundary::Periodic).scale(e);
        assert!(a.distance(&b) < 1e-10);
    }
}
