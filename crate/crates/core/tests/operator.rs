mod common;

use num_complex::Complex64;
use phasepnp::prelude::*;
use proptest::prelude::*;

fn rel_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn ptycho(n: usize, s: usize, stride: usize, seed: u64) -> PtychoOperator {
    let probe = ComplexImage::random(s, s, seed);
    let grid = n.div_ceil(stride);
    PtychoOperator::grid(n, n, probe, grid, grid, stride, true).unwrap()
}

/// `diag(A*A)` by applying `A*A` to each basis image.
fn probed_diagonal<A: MeasurementOperator>(op: &A) -> Vec<f64> {
    let (h, w) = op.image_shape();
    (0..h * w)
        .map(|k| {
            let mut e = ComplexImage::zeros(h, w);
            e.data_mut()[k] = Complex64::new(1.0, 0.0);
            let back = op.adjoint(&op.forward(&e).unwrap()).unwrap();
            back.data()[k].re
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cdp_adjoint_identity(h in 1usize..10, w in 1usize..10, k in 1usize..5, seed in any::<u64>()) {
        let op = CdpOperator::octanary(h, w, k, seed).unwrap();
        let u = ComplexImage::random(h, w, seed ^ 1);
        let z = Spectrum::random(h, w, k, seed ^ 2);
        let lhs = op.forward(&u).unwrap().inner(&z);
        let rhs = u.inner(&op.adjoint(&z).unwrap());
        prop_assert!(rel_gap(lhs, rhs) < 1e-10);
    }

    #[test]
    fn ptycho_adjoint_identity(n in 4usize..12, s in 2usize..5, stride in 1usize..4, seed in any::<u64>()) {
        let s = s.min(n);
        let op = ptycho(n, s, stride, seed);
        let u = ComplexImage::random(n, n, seed ^ 1);
        let z = Spectrum::random(s, s, op.num_frames(), seed ^ 2);
        let lhs = op.forward(&u).unwrap().inner(&z);
        let rhs = u.inner(&op.adjoint(&z).unwrap());
        prop_assert!(rel_gap(lhs, rhs) < 1e-10);
    }

    #[test]
    fn forward_is_linear(h in 1usize..8, w in 1usize..8, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let op = CdpOperator::octanary(h, w, 2, seed).unwrap();
        let x = ComplexImage::random(h, w, seed ^ 3);
        let y = ComplexImage::random(h, w, seed ^ 4);
        let c = Complex64::new(a, b);
        let combo = x.zip_map(&y, |p, q| p * c + q);
        let lhs = op.forward(&combo).unwrap();
        let rhs = op.forward(&x).unwrap().zip_map(&op.forward(&y).unwrap(), |p, q| p * c + q);
        prop_assert!(lhs.distance(&rhs) <= 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn diagonal_matches_basis_probing(h in 1usize..7, w in 1usize..7, seed in any::<u64>()) {
        let op = CdpOperator::octanary(h, w, 3, seed).unwrap();
        for (d, p) in op.ata_diagonal().data().iter().zip(probed_diagonal(&op)) {
            prop_assert!((d - p).abs() < 1e-12 * d.max(1.0));
        }
        let op = ptycho(6, 3, 2, seed);
        for (d, p) in op.ata_diagonal().data().iter().zip(probed_diagonal(&op)) {
            prop_assert!((d - p).abs() < 1e-12 * d.max(1.0));
        }
    }
}

#[test]
fn single_unit_mask_is_the_unitary_dft() {
    for (h, w) in [(1, 1), (3, 5), (8, 8), (6, 4)] {
        let ones = ComplexImage::filled(h, w, Complex64::new(1.0, 0.0));
        let op = CdpOperator::new(vec![ones]).unwrap();
        let u = ComplexImage::random(h, w, (h * w) as u64);
        let fast = op.forward(&u).unwrap();
        let slow = common::dense_dft(&u);
        for (a, b) in fast.data().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12, "{h}x{w}");
        }
    }
}

#[test]
fn masked_frames_match_dense_dft() {
    let op = CdpOperator::octanary(5, 7, 2, 11).unwrap();
    let u = ComplexImage::random(5, 7, 2);
    let z = op.forward(&u).unwrap();
    for (k, mask) in op.masks().iter().enumerate() {
        let slow = common::dense_dft(&u.zip_map(mask, |a, m| a * m));
        for (a, b) in z.frame(k).iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn octanary_masks_use_only_the_eight_values() {
    let cands = phasepnp::operator::octanary_candidates();
    let op = CdpOperator::octanary(16, 16, 4, 3).unwrap();
    for m in op.masks() {
        for c in m.data() {
            assert!(cands.iter().any(|x| (x - c).norm() < 1e-15));
        }
    }
}

#[test]
fn paper_scan_geometry_has_expected_size() {
    // 16×16 frames of 64×64 with stride 16 over a 256×256 object.
    let probe = ProbeShape::Zone {
        radius: 25.6,
        curvature: 1.0,
    }
    .generate(64);
    let op = PtychoOperator::grid(256, 256, probe, 16, 16, 16, true).unwrap();
    assert_eq!(op.output_len(), 256 * 64 * 64);
}
